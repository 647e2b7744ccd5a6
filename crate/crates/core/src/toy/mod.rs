//! Two-dimensional toy task: latent `N(0, I)` pushed by a small MLP toward a
//! two-component Gaussian mixture, scored by the moment-form Fréchet distance.

pub mod frechet;
pub mod mixture;
pub mod net;
pub mod train;

pub use frechet::{frechet_distance, frechet_from_moments, FdReport};
pub use mixture::{sample_mixture, GaussianMixture, MixtureComponent};
pub use net::{mse_loss, Activation, GeneratorNet};
pub use train::{
    dm_train_step, evaluate, init_generator, run_methods, run_seed, run_table1, train,
    RepulsionBatch, ResultRow, ResultTable, RunOutcome, StepLog, TrainConfig, DEFAULT_N_EVAL,
};
