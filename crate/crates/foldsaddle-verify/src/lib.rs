//! Holds the `acceptance` test target. The checks themselves live in
//! `foldsaddle::acceptance` so that `foldsaddle verify` runs the same code.

pub use foldsaddle::acceptance::{criteria, Check, DEFAULT_SEED};
