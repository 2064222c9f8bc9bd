//! Library side of the experiment harness: verification suites and the
//! report/serialization helpers the `abl` binary is built from.

pub mod output;
pub mod verify;
