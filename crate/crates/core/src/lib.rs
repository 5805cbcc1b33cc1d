//! Double-coupling support vector machines for multi-task data streams.
//!
//! Several related streams are each cut into time windows, and every
//! (task, window) cell gets its own kernel classifier. Two coupling terms
//! tie the classifiers together: an *internal* one between consecutive
//! windows of the same task, and an *external* one between tasks at the
//! same window. The whole family is trained jointly through a single
//! simplex-constrained quadratic program.
//!
//! | module | contents |
//! |---|---|
//! | [`kernelcore`] | samples, streams, kernels, stream CSV |
//! | [`coupling`] | window assignment, coupling graphs, coupling matrix |
//! | [`qp_solver`] | pairwise coordinate descent on the simplex |
//! | [`model`] | dual assembly, fitting, decision functions, persistence |
//! | [`streams`] | synthetic drift generators and dataset loaders |
//! | [`harness`] | grid search, repeated-run and prequential protocols |
//! | [`cli`] | the `dcsvm` command-line tool |
//!
//! Runnable walkthroughs of each capability live in `examples/`
//! (`cargo run --release --example <name>`).
//!
//! ```
//! use dcsvm::{fit, HyperParams, KernelSpec};
//! use dcsvm::streams::{gen_ds1, Ds1Spec};
//!
//! let train = gen_ds1(&Ds1Spec { n: 100, m: 5, r: 0.05, ..Default::default() }).unwrap();
//! let hyper = HyperParams::new(10.0, KernelSpec::Linear, 16.0, 16.0).unwrap();
//! let model = fit(&train, &hyper).unwrap();
//! let p = model.predict(2, 5, &[0.3, 0.2]).unwrap();
//! assert!(p.score.is_finite());
//! ```

pub mod cli;
pub mod coupling;
pub mod error;
pub mod harness;
pub mod kernelcore;
pub mod model;
pub mod qp_solver;
pub mod streams;

pub use coupling::CouplingStructure;
pub use error::{Error, Result};
pub use kernelcore::{HyperParams, KernelSpec, Label, MultiTaskStream, Sample};
pub use model::{fit, fit_with, Prediction, TrainedModel};
pub use qp_solver::{solve_simplex_qp, QpSolution, SolverOptions};
