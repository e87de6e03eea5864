//! Hermite B-spline quasi-interpolation.

pub mod basis;
pub mod convergence;
pub mod error;
pub mod fd;
pub mod grid;
pub mod knots;
mod linalg;
pub mod metrics;
pub mod qi1d;
pub mod qi_tensor;
pub mod serialize;
pub mod spline;
pub mod tensor;

pub use basis::ActiveBasis;
pub use convergence::{
    estimate_order, graded_mesh, loglog_slope, lookup, registry, run_study, Mesh, StudyConfig,
    StudyRow, TestProblem,
};
pub use error::{QiError, Result};
pub use fd::{fd_weights, FdOperator, FdStencil};
pub use grid::{Encoding, GridFile};
pub use knots::{linspace, Axis, KnotVector};
pub use metrics::Metrics;
pub use qi1d::{
    default_fd_order, local_weights, qi_approx, qi_hermite, ApproxQi, HermiteData, LocalWeights,
    QiOperator, QiWeights,
};
pub use qi_tensor::{
    qi2d_approx, qi2d_hermite, qi2d_polar, qi3d_approx, qi_nd_approx, GridSample2D, GridSample3D,
};
pub use serialize::{Spline, SplineJson};
pub use spline::{Antiderivative, SplineCurve, SplineSurface, SplineVolume};
pub use tensor::Tensor;
