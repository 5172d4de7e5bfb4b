//! Mallows permutations: exact sampling, the arc chain, diagonal
//! exposure, stitching of i.i.d. windows, and Poisson–Dirichlet
//! comparisons of cycle structure.

pub mod arc;
pub mod error;
pub mod experiment;
pub mod exposure;
mod fenwick;
pub mod mallows;
pub mod oracle;
pub mod pd;
pub mod perm;
pub mod qmath;
pub mod replicate;
pub mod rng;
pub mod stats;
pub mod stitch;

pub use arc::{ArcChain, ArcTrajectory, ChainKind, HittingTime, StationaryDistribution, StepProbabilities};
pub use error::{Error, Result};
pub use mallows::MallowsParams;
pub use perm::{CycleDecomposition, Permutation, PlanarPoints};
pub use rng::{seed_stream, RandomStream};
