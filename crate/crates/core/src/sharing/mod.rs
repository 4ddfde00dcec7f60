//! Simulated three-party replicated secret sharing over `Z_{2^K}`.
//!
//! Share, reconstruction, local linear maps and multiplication run as
//! share-level protocols. Comparison, square root, sorting, zero-one
//! vectors and the two inference scores run as sealed functionalities
//! (reconstruct, compute, reshare) and are charged a synthetic
//! communication cost of input plus output share size.

mod functionalities;
pub mod ledger;
pub mod mpc;
pub mod prf;
pub mod shares;

pub use ledger::{CommLedger, LedgerEntry};
pub use mpc::{InferenceArithmetic, Mpc, MultMode, Party, SharedDataset};
pub use prf::{substream_seed, PrfKey};
pub use shares::ShareVec;
