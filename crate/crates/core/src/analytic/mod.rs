//! Ball-arithmetic analysis: Bessel enclosures, incomplete gamma, the exact
//! formula for `p_α(n)` and the main term of `p(n−1)p(ℓ+1) − p(n)p(ℓ)`.

mod bessel;
mod formula;
mod gamma;
mod main_term;

pub use bessel::{
    asymptotic_threshold, bessel_i, bessel_i_asymptotic, bessel_i_series, bessel_regime, bessel_upper_bound,
    BesselRegime, Regime,
};
pub use formula::{determined_integer, p_alpha_analytic, p_alpha_analytic_prec, tail_bound_f, AnalyticMode, AnalyticValue};
pub use gamma::{gamma_upper_eval, incomplete_gamma_upper};
pub use main_term::{envelope, hn_threshold, main_term, MainTerm, MainTermInput};
