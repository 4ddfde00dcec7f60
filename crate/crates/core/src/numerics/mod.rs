//! Fixed-point encoding and the small plaintext classifier used by clients.

pub mod dataset;
pub mod fixed;
pub mod idx;
pub mod model;
pub mod train;

pub use dataset::Dataset;
pub use fixed::{decode_fixed, encode_fixed, quantize, quantize_toward_zero, FixedParams, FixedVec, Ring};
pub use model::{accuracy, argmax, forward_fixed, max_softmax_mean, param_count, softmax, MlpModel};
pub use train::{local_train, local_update, sgd_train, TrainOptions};
