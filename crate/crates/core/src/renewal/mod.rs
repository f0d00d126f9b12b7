//! Exact computations for renewal shifts: lifetime laws, renewal sequences,
//! convolution powers, local limit checks and tied-down expectations.

mod conv;
mod lifetime;
mod llt;
mod tables;
mod tied;

pub use conv::{convolution_power, convolve, ConvolutionPower};
pub use lifetime::{Family, LifetimeDist};
pub use llt::{llt_check, llt_check_arithmetic, llt_profile, llt_scale, KappaWindow, LltProfile, ZetaSumLaw};
pub use tables::{doney_statistic, fft_renewal, karamata_check, naive_renewal, srt_report, RenewalTables, SrtRatio};
pub use tied::{
    cesaro_tied_down, corollary7_check, corollary7_report, tied_down_enumerate, tied_down_enumerate_pf, tied_down_exact,
    tied_down_exact_fn, tied_down_with_tables, CesaroValue, MAX_TIED_N,
};

#[cfg(test)]
mod tests;
