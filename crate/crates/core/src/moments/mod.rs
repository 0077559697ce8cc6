//! Second-moment Volterra equations, renewal machinery and the lower-bound series.

mod colored;
mod field;
mod renewal;
mod series;
mod step;
mod white;

pub use colored::{second_moment_colored, ColoredVolterra, MAX_TWO_POINT_NODES};
pub use field::{MomentField, TwoPointField};
pub use renewal::{late_growth_rate, renewal_growth_exponent, renewal_volterra_solve};
pub use series::{
    colored_lower_bound_series, fit_colored_floor_constant, initial_term_floor, ln_colored_lower_bound_series,
    ln_lower_series, lower_series, InitialFloor, COLORED_FLOOR_C1,
};
pub use white::{second_moment_white, WhiteVolterra};

