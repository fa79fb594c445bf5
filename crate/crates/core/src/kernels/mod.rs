//! Numerical kernels shared by the front end and the reconstructions.

pub mod autocorr;
pub mod fft;
pub mod flops;
pub mod nufft;
