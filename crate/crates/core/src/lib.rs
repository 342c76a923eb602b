//! OFDM with index modulation (OFDM-IM) and peak-to-average power ratio
//! reduction by dithering the idle subcarriers.
//!
//! Each OFDM-IM block of `N` subcarriers is split into `g` subblocks of
//! length `n`. In every subblock only `k` subcarriers are active: their
//! positions carry `p1` index bits and their QAM symbols carry
//! `p2 = k log2 M` bits. The remaining (idle) subcarriers are zero, which
//! leaves room to add small "dither" values there that flatten the
//! time-domain peaks without touching the data-bearing tones.
//!
//! Two dither schemes are supported:
//!
//!  - **single level**: every idle subcarrier obeys `|ζ| <= R`;
//!  - **multilevel**: the bound of an idle subcarrier depends on the
//!    smallest active amplitude `A_l` of its subblock, `R_l = A_l - A_1 + R_1`,
//!    so subblocks with strong active symbols can carry larger dither while
//!    the index-detection margin `ν = min(μ - λ)` stays at least `A_1 - R_1`.
//!
//! The crate is `no_std` (with `alloc`) when the default `std` feature is
//! disabled. IO, the Monte-Carlo driver and the command line live in the
//! companion `ofdm-im-sim` crate.
//!
//! ```
//! use ofdm_im::{dither, Transceiver, SystemConfig};
//!
//! let cfg = SystemConfig::new(128, 4, 2, 16).unwrap();
//! let trx = Transceiver::qam(cfg).unwrap();
//! let bits = vec![1u8; cfg.block_bits()];
//! let block = trx.modulate(&bits).unwrap();
//! let plan = dither::build_plan(&block, trx.config(), trx.constellation(), 0.0).unwrap();
//! let x = trx.transmit(&block).unwrap();
//! let solution = dither::solve(&x, &plan, &dither::SolverOptions::default()).unwrap();
//! assert!(solution.objective <= x.peak_power() + 1e-9);
//! ```

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod bits;
pub mod channel;
pub mod config;
pub mod constellation;
pub mod dither;
mod error;
pub mod index;
mod math;
pub mod metrics;
pub mod signal;
pub mod transceiver;
pub mod transform;

pub use config::SystemConfig;
pub use constellation::Constellation;
pub use error::Error;
pub use index::{ActivationPattern, LegalPatternSet};
pub use signal::{FrequencyBlock, TimeSignal};
pub use transceiver::Transceiver;
pub use transform::Dft;

/// Complex baseband sample.
pub type Complex = num_complex::Complex64;

pub type Result<T, E = Error> = core::result::Result<T, E>;
