//! Sparse multivariate polynomials in distributed form, with a lock-free
//! parallel multiplication.
//!
//! The product `A * B` is computed by cutting the range of exponent sums
//! `alpha_i + beta_j` into left-closed, right-open intervals. Every interval
//! owns all the products whose exponent falls inside it, so the intervals can
//! be merged independently by any number of workers and the sorted partial
//! results are simply concatenated.
//!
//! Module map:
//!
//! * [`exponent`], [`coeff`], [`poly`]: packed exponents, coefficient rings
//!   and the canonical term list, plus the schoolbook product used as oracle.
//! * [`io`]: expression parser and the plain-text polynomial file format.
//! * [`split`]: grid selection of the interval bounds and the edge search.
//! * [`merge`]: per-interval heap and 16-ary radix tree mergers.
//! * [`parmul`]: the parallel driver, random operands and the grid tuner.
//! * [`cluster`]: the same algorithm over simulated message-passing nodes.

pub mod cluster;
pub mod coeff;
pub mod error;
pub mod exponent;
pub mod io;
pub mod merge;
pub mod parmul;
pub mod poly;
pub mod split;

pub use coeff::Coeff;
pub use error::{Error, Result};
pub use exponent::{Exponent, Layout, MonomialOrder};
pub use merge::MergerKind;
pub use parmul::{mul, MulConfig};
pub use poly::{naive_mul, PolySpace, Polynomial, VarTable};
pub use split::GridParams;
