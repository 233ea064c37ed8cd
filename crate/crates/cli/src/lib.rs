//! Batch front-end for valmono: runs problem files and verifies traces.

pub mod problem;
pub mod run;
pub mod trace;
pub mod verify;

pub use problem::{Problem, SchemaError};
pub use run::{batch_code, run_batch, run_problem};
pub use trace::{RunOptions, Trace};
pub use verify::{verify_trace, VerifyError};

pub const EXIT_OK: i32 = 0;
/// Input could not be read at all.
pub const EXIT_IO: i32 = 1;
pub const EXIT_SCHEMA: i32 = 2;
pub const EXIT_ALGORITHM: i32 = 3;
pub const EXIT_MISMATCH: i32 = 4;
