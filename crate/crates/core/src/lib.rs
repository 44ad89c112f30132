//! Condition-monitoring toolkit for multi-channel gearbox vibration recordings.
//!
//! The crate covers the full analysis pipeline:
//!
//! - **[`ingest`]**: parse MAT v5 files (double-precision numeric subset) and
//!   CSV files into [`ingest::Recording`]s, with day/timestamp identity taken
//!   from the `DayNNN_<tag>_<YYYYMMDD>_<HHMMSS>` file naming scheme.
//! - **[`features`]**: fixed-length segmentation and the statistical fault
//!   indicators (mean, sample standard deviation, peak-to-peak) per channel.
//! - **[`cwt`]**: analytic Morlet filter banks with a configurable number of
//!   voices per octave, frequency-domain continuous wavelet transform, and
//!   scalogram rasterization to 8-bit grayscale.
//! - **[`pgm`]**: binary PGM (P5) image encoding and decoding.
//! - **[`detect`]**: tier classification of per-channel indicators against an
//!   early-corpus baseline, plus increasing/accelerating trend verdicts.
//! - **[`trend`]**: ARIMA(p,d,q) fitting by conditional sum of squares with a
//!   simplex minimizer, AIC order selection, and multi-step forecasting.

pub mod cwt;
pub mod detect;
pub mod features;
pub mod ingest;
pub mod pgm;
pub mod trend;
