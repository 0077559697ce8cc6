//! Special functions and fractional calculus.

mod calculus;
mod gamma;
mod mittag_leffler;
mod subordinator;

pub use calculus::{caputo_derivative, fractional_integral, uniform_grid, SampledFunction};
pub use gamma::{gamma, ln_gamma, power_exp_integral, rgamma};
pub use mittag_leffler::mittag_leffler;
pub use subordinator::{
    inverse_subordinator_density, stable_subordinator_density, subordinator_head_law, subordinator_tail_law,
};
