//! Point lists: one point per line, coordinates separated by commas or
//! whitespace, `#` starts a comment.

use crate::error::CliError;
use num_rational::BigRational;

pub fn parse_point(s: &str) -> Result<Vec<BigRational>, CliError> {
    let coords: Vec<&str> = s
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .collect();
    if coords.is_empty() {
        return Err(CliError::Input(format!("empty point {s:?}")));
    }
    coords
        .iter()
        .map(|t| {
            t.parse::<BigRational>()
                .map_err(|_| CliError::Input(format!("bad coordinate {t:?} in {s:?}")))
        })
        .collect()
}

pub fn parse_points(src: &str) -> Result<Vec<Vec<BigRational>>, CliError> {
    src.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(parse_point)
        .collect()
}

pub fn format_point(x: &[BigRational]) -> String {
    x.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_lists() {
        let pts = parse_points("# pts\n1/5, 2\n\n-3 4/6 # tail\n").unwrap();
        assert_eq!(pts.len(), 2);
        assert_eq!(format_point(&pts[0]), "1/5,2");
        assert_eq!(format_point(&pts[1]), "-3,2/3");
        assert!(parse_point("1/0").is_err());
        assert!(parse_point("x,1").is_err());
    }
}
