//! Gaussian local zeta functions, heights of polynomials and their
//! determinant closed forms.

pub mod gamma;
pub mod height;
pub mod mc;
pub mod zeta;

pub use height::{
    degeneration_limit_heights, height, height_bounds_audit, height_det_closed, height_formal, height_monomial_closed,
    height_monte_carlo, loglog_exponent, rnc_degeneration, rnc_delta_ratio, rnc_leading_fit, BoundsAudit,
    DegenerationLimits, HeightMethod, HeightReport, LeadingFit,
};
pub use mc::{joint_moments, mc_moment, MomentEstimate};
pub use zeta::{zeta, zeta_det_closed, zeta_prime_zero, DetConvention, ZetaEstimate, ZetaPrime};

#[cfg(test)]
mod tests;
