//! Models, fits and design analysis for cavity-enhanced quantum frequency
//! conversion in a singly resonant difference-frequency cavity.
//!
//! Frequencies follow the unit in their name (`_mhz`, `_ghz`); pump powers
//! are in mW and count rates in counts per second.

pub mod comb;
pub mod error;
pub mod estimation;
pub mod noise;
pub mod presets;
pub mod quad;
pub mod snr;
pub mod spectral;
pub mod stats;
pub mod synthetic;

pub use error::{QfcError, Result};
