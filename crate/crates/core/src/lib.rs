pub mod arith;
pub mod certificates;
pub mod green;
pub mod heights;
pub mod linalg;
pub mod padic;
pub mod periodic;
pub mod place;
pub mod poly;
pub mod real;
pub mod regularity;

pub use place::Place;
pub use poly::{MultiPoly, PolyError, PolyMap};
