//! Monte-Carlo harness for dithered OFDM-IM: PAPR/CCDF runs, BER sweeps,
//! super-constellation dumps and single-block solver inspection.

pub mod cli;
pub mod error;
pub mod report;
pub mod rng;
pub mod run;
pub mod scheme;
pub mod spec;

pub use error::{Result, SimError};
pub use report::RunReport;
pub use run::{dump_super_constellation, run_ber, run_papr, solve_one};
pub use spec::{RunSpec, Scheme};
