//! Text formats and the command-line front end for `biasgraph-core`.
//!
//! Model files (`.cg`) are line oriented:
//!
//! ```text
//! # comments run to the end of the line
//! model definitions
//! node Gender
//! node Productivity
//! node Impact
//! node FacultyPosition
//! edge Gender -> Productivity unjustified
//! edge Productivity -> FacultyPosition
//! edge Impact -> FacultyPosition
//! interest Gender
//! outcome FacultyPosition
//! ```
//!
//! Names must be declared with `node` before any line refers to them.

pub mod cli;
pub mod coeffs;
pub mod dot;
pub mod model;
pub mod parse;

pub use coeffs::{parse_coefficients, CoefficientFile};
pub use dot::{export_dot, DotOptions};
pub use model::{serialize_model, ModelSpec};
pub use parse::{parse_model, ParseError, ParseErrorKind};
