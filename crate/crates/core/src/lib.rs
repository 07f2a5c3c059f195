//! Fractal functions on half-lines, the real line and compact intervals.
//!
//! A fractal function here is the unique fixed point of a contractive
//! Read-Bajraktarević operator
//!
//! ```text
//! Φf(x) = v_j(b_j⁻¹(x), f(b_j⁻¹(x)))   for x in b_j(K_j)
//!       = w_i(u_i⁻¹(x), f(u_i⁻¹(x)))   for x in u_i(V_i)
//! ```
//!
//! built over a partition of the half-line, the real line or a compact
//! interval into bounded pieces `K_j` and unbounded pieces `V_i`.
//!
//! The crate is organised bottom-up:
//!
//! * [`point`], [`maps`], [`partition`]: extended points, monotone maps and
//!   partition schemes with their cover checks;
//! * [`function`], [`rb`]: scalar functions, the operator, grid iteration and
//!   certified recursive evaluation;
//! * [`scenario`]: ready-made operators (a compact-interval example, its
//!   pullback to the half-line, and a direct construction on the half-line);
//! * [`algebra`]: the offset-to-function isomorphism, fractal Lagrange bases
//!   and tensor products;
//! * [`lp`]: Lp contractivity criteria;
//! * [`local_ifs`]: the associated local IFS on cell grids;
//! * [`config`], [`output`], [`figures`], [`verify`]: plumbing for the CLI.

pub mod algebra;
pub mod config;
pub mod error;
pub mod figures;
pub mod function;
pub mod local_ifs;
pub mod lp;
pub mod maps;
pub mod output;
pub mod partition;
pub mod point;
pub mod rb;
pub mod report;
pub mod scenario;
pub mod verify;

pub use error::{Error, Result};
pub use function::{FnKind, ScalarFunction};
pub use maps::{compose, verify_homeomorphism, Direction, Homeomorphism1D, MapKind};
pub use partition::{validate_partition, Ambient, PartitionScheme, Piece, PieceId, PieceKind};
pub use point::{ExtendedPoint, Interval};
pub use rb::{build_rb, FractalFunction, GridFunction, RBOperator, RealFunction, VerticalMap};
pub use report::{ValidationReport, Violation};
