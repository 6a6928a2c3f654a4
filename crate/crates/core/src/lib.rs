//! Numerical verification engine for the differential geometry of maps and
//! immersed surfaces: tension and bitension fields, the biharmonic
//! stress-energy tensor, and the pointwise/integral identities relating them.
//!
//! The crate is organised bottom-up:
//!
//! * [`jet`] — truncated bivariate Taylor arithmetic, the differentiation kernel;
//! * [`expr`] — the expression language used for coordinate maps and metrics;
//! * [`ambient`] — chart-presented Riemannian manifolds with curvature;
//! * [`immersion`] — surface geometry of a parametrised map (frames, second
//!   fundamental form, shape operator, Gaussian curvature);
//! * [`bienergy`] — tension, bitension, stress-energy tensor and their calculus;
//! * [`verify`] — residual checkers, quadrature and parameter scans;
//! * [`catalog`] — built-in example maps with independently known geometry.

pub mod jet;
pub mod expr;
mod linalg;
pub mod ambient;
pub mod immersion;
mod pipeline;
pub mod quad;
pub mod bienergy;
pub mod verify;
pub mod catalog;

pub use jet::{Jet, JetError};
pub use expr::{Expr, ParseError, EvalError};
pub use ambient::{AmbientManifold, AmbientError};
pub use immersion::{Domain, GeomError, Immersion, MetricMode};
pub use verify::{CheckId, CheckOptions, ResidualReport, Verdict, VerifyError};
pub use catalog::{CatalogError, ExampleSpec};
