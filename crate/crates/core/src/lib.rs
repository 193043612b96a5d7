//! Set inversion toolkit: compute pre-images P = F⁻¹(U) of boxes under
//! nonlinear forward models.
//!
//! Two inverters are provided. The active one trains a Gaussian-RBF SVM
//! on adaptively chosen samples, querying the membership oracle at
//! points projected onto the current decision boundary. The baseline
//! bisects the state space with interval arithmetic into inner /
//! uncertain / outer subpavings. A benchmark harness scores both on
//! dense ground-truth grids.

pub mod bench;
pub mod contour;
pub mod error;
pub mod geometry;
pub mod models;
pub mod oasis;
pub mod plot;
pub mod project;
pub mod sivia;
pub mod svm;

pub use error::{Error, Result};
pub use geometry::{BoxClass, Interval, IntervalBox, Subpaving};
pub use models::{builtin_problem, ForwardModel, ProblemSpec, BUILTIN_PROBLEMS};
pub use oasis::{run_oasis, OasisConfig, OasisRun};
pub use sivia::{sivia_invert, subpaving_classify, SubpavingIndex, DEFAULT_BOX_BUDGET};
pub use svm::{calibrate_gamma, train_svm, GammaSchedule, SvmModel, TrainOptions};
