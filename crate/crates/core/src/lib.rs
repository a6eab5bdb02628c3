//! Exact algebra of differential functions, differential and nonlocal
//! operators, and integrability of recursion operators.

pub mod bidiff;
pub mod calculus;
pub mod corpus;
pub mod diffop;
pub mod gcd;
pub mod integrability;
pub mod jet;
pub mod lenard;
pub mod linalg;
pub mod nonlocal;
pub mod parse;
pub mod poly;
pub mod ratfun;
pub mod registry;
pub mod schema;

pub use bidiff::BiDiffOp;
pub use calculus::{integrate, is_total_derivative, potential, Grading, Parity};
pub use diffop::{DiffOp, FractionPair};
pub use integrability::{is_hereditary, is_integrable_diffop, is_integrable_pair, is_integrable_wnl, Verdict};
pub use jet::{Indet, JetVar, Monomial};
pub use lenard::{extend, Hierarchy};
pub use nonlocal::{nl_apply, nl_mul, NonlocalOp};
pub use parse::parse_function;
pub use poly::{evo_apply, lie_bracket, variational_derivative, DiffPoly, Q};
pub use ratfun::RatFun;
