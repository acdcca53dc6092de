//! Secrecy-capacity bounds under a joint mean and peak intensity
//! constraint, `0 <= X <= A` and `E[X] = xi * P`.
//!
//! The average-to-peak ratio `alpha = xi P / A` selects between the
//! branches of the first lower bound. Every closed form is evaluated in
//! the log domain where the raw expression would overflow or cancel.

use std::f64::consts::{E, PI};

use crate::avg_bounds::{validate_xi, Asymptote, BoundParams, BoundReport};
use crate::error::{Error, Result};
use crate::numerics::{
    ln_expm1_over, one_minus_two_q, q_diff, q_function, softplus, solve_c, solve_mu_tilde,
    trunc_exp_entropy_offset, trunc_exp_variance_fraction, SQRT_2PI,
};
use crate::scenario::{is_degraded_secure, validate_sigmas, LinkGains};

/// `|alpha - 0.5|` below this uses the uniform-input branch.
pub const UNIFORM_TIE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakConstraints {
    pub xi: f64,
    pub p: f64,
    pub a: f64,
}

impl PeakConstraints {
    /// Requires `0 < xi <= 1` and `0 < P <= A`.
    pub fn new(xi: f64, p: f64, a: f64) -> Result<Self> {
        validate_xi(xi)?;
        if !(p > 0.0 && p.is_finite() && a.is_finite() && p <= a) {
            return Err(Error::invalid(format!(
                "need 0 < P <= A with both finite (got P = {p}, A = {a})"
            )));
        }
        Ok(Self { xi, p, a })
    }

    /// Average-to-peak intensity ratio `xi P / A`.
    pub fn alpha(&self) -> f64 {
        self.xi * self.p / self.a
    }

    pub fn mean(&self) -> f64 {
        self.xi * self.p
    }
}

fn check_inputs(g: &LinkGains, pc: &PeakConstraints, sigma_b: f64, sigma_e: f64) -> Result<f64> {
    LinkGains::new(g.h_b, g.h_e)?;
    validate_sigmas(sigma_b, sigma_e)?;
    let alpha = pc.alpha();
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::invalid(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    Ok(alpha)
}

fn peak_delta(g: &LinkGains, pc: &PeakConstraints, sigma_e: f64) -> f64 {
    sigma_e * (g.h_e * pc.a / sigma_e).ln_1p()
}

/// Default `(mu, delta, mu_tilde)` for the `alpha < 0.5` branch:
/// `delta = sigma_E ln(1 + H_E A / sigma_E)`, `mu_tilde` from
/// [`solve_mu_tilde`] and `mu = mu_tilde (1 - exp(-alpha delta^2 / 2 sigma_E^2))`.
pub fn default_mu_delta(g: &LinkGains, pc: &PeakConstraints, sigma_e: f64) -> Result<(f64, f64, f64)> {
    let alpha = pc.alpha();
    let mu_tilde = solve_mu_tilde(alpha)?;
    let delta = peak_delta(g, pc, sigma_e);
    let s = delta / sigma_e;
    let mu = mu_tilde * -(-0.5 * alpha * s * s).exp_m1();
    Ok((mu, delta, mu_tilde))
}

/// `-Q(s) - s phi(s) + 1/2`, shared by both branches of the first bound.
fn gaussian_edge_term(s: f64) -> f64 {
    0.5 - q_function(s) - s / SQRT_2PI * (-0.5 * s * s).exp()
}

/// `1/2 ln(1 + H_B^2 A^2 e^{2 k} / (2 pi e sigma_B^2))`.
fn epi_main_term(h_b: f64, a: f64, sigma_b: f64, k: f64) -> f64 {
    0.5 * softplus(2.0 * ((h_b * a).ln() + k - sigma_b.ln()) - (2.0 * PI * E).ln())
}

/// Branch of the first lower bound for `alpha < 0.5`.
fn lower_peak_low_alpha(
    g: &LinkGains,
    pc: &PeakConstraints,
    sigma_b: f64,
    sigma_e: f64,
    alpha: f64,
) -> Result<(f64, BoundParams)> {
    let (mu, delta, mu_tilde) = default_mu_delta(g, pc, sigma_e)?;
    // ln[ e^{alpha mu~} (1 - e^{-mu~}) / mu~ ]
    let k = alpha * mu_tilde - mu_tilde + ln_expm1_over(mu_tilde);
    let main = epi_main_term(g.h_b, pc.a, sigma_b, k);
    let params = BoundParams::Peak {
        mu: Some(mu),
        delta,
        mu_tilde: Some(mu_tilde),
        c: None,
    };

    let ha = g.h_e * pc.a;
    if ha == 0.0 || delta == 0.0 {
        return Ok((main, params));
    }
    let se = sigma_e;
    let s = delta / se;
    let spread = mu * se / (ha * SQRT_2PI)
        * ((-0.5 * s * s).exp() - (-0.5 * ((ha + delta) / se).powi(2)).exp());
    let weight = q_diff(-(delta + alpha * ha) / se, (delta + (1.0 - alpha) * ha) / se);
    let x = mu * (1.0 + 2.0 * delta / ha);
    let log_term = ha.ln() - (SQRT_2PI * se).ln() + mu * delta / ha - x
        + ln_expm1_over(x)
        + (2.0 * delta / ha).ln_1p()
        - one_minus_two_q(s).ln();
    let tail = mu * alpha * one_minus_two_q((delta + 0.5 * ha) / se);
    Ok((main + gaussian_edge_term(s) - spread - weight * log_term - tail, params))
}

/// Branch of the first lower bound for `alpha >= 0.5`.
fn lower_peak_high_alpha(g: &LinkGains, pc: &PeakConstraints, sigma_b: f64, sigma_e: f64) -> (f64, BoundParams) {
    let delta = peak_delta(g, pc, sigma_e);
    let main = epi_main_term(g.h_b, pc.a, sigma_b, 0.0);
    let params = BoundParams::Peak {
        mu: None,
        delta,
        mu_tilde: None,
        c: None,
    };
    let ha = g.h_e * pc.a;
    if ha == 0.0 || delta == 0.0 {
        return (main, params);
    }
    let s = delta / sigma_e;
    let weight = one_minus_two_q((delta + 0.5 * ha) / sigma_e);
    let log_term = (ha + 2.0 * delta).ln() - (SQRT_2PI * sigma_e).ln() - one_minus_two_q(s).ln();
    (main - weight * log_term + gaussian_edge_term(s), params)
}

/// First lower bound: the `alpha < 0.5` branch built on a two-sided
/// exponential auxiliary law, or the `alpha >= 0.5` branch built on a
/// uniform-window auxiliary law.
pub fn lower_bound_peak_1(g: &LinkGains, pc: &PeakConstraints, sigma_b: f64, sigma_e: f64) -> Result<f64> {
    Ok(lower_bound_peak_1_with_params(g, pc, sigma_b, sigma_e)?.0)
}

fn lower_bound_peak_1_with_params(
    g: &LinkGains,
    pc: &PeakConstraints,
    sigma_b: f64,
    sigma_e: f64,
) -> Result<(f64, BoundParams)> {
    let alpha = check_inputs(g, pc, sigma_b, sigma_e)?;
    if alpha < 0.5 {
        lower_peak_low_alpha(g, pc, sigma_b, sigma_e, alpha)
    } else {
        Ok(lower_peak_high_alpha(g, pc, sigma_b, sigma_e))
    }
}

/// Second lower bound, from the entropy-power inequality with the
/// maximum-entropy input on `[0, A]` with mean `xi P`: uniform at
/// `alpha = 0.5`, truncated exponential otherwise.
pub fn lower_bound_peak_2(g: &LinkGains, pc: &PeakConstraints, sigma_b: f64, sigma_e: f64) -> Result<f64> {
    Ok(lower_bound_peak_2_with_rate(g, pc, sigma_b, sigma_e)?.0)
}

fn lower_bound_peak_2_with_rate(
    g: &LinkGains,
    pc: &PeakConstraints,
    sigma_b: f64,
    sigma_e: f64,
) -> Result<(f64, Option<f64>)> {
    let alpha = check_inputs(g, pc, sigma_b, sigma_e)?;
    let lse = sigma_e.ln();
    let l2pie_b = (2.0 * PI * E).ln() + 2.0 * sigma_b.ln();
    // ln(H_B^2 A^2 e^{2k} + 2 pi e sigma_B^2) - ln(2 pi e sigma_B^2)
    let main = |k: f64| softplus(2.0 * ((g.h_b * pc.a).ln() + k) - l2pie_b);
    if (alpha - 0.5).abs() < UNIFORM_TIE {
        // 3 sigma_E^2 / (H_E^2 xi^2 P^2 + 3 sigma_E^2)
        let eve = softplus(2.0 * ((g.h_e * pc.mean()).ln() - lse) - 3f64.ln());
        return Ok((0.5 * (main(0.0) - eve), None));
    }
    let c = solve_c(alpha, pc.a)?;
    let u = c * pc.a;
    let k = trunc_exp_entropy_offset(u, alpha);
    let var_frac = trunc_exp_variance_fraction(u);
    let eve = softplus(2.0 * ((g.h_e * pc.a).ln() - lse) + var_frac.ln());
    Ok((0.5 * (main(k) - eve), Some(c)))
}

/// Upper bound
/// `1/2 ln[ (r sigma_B^2 + sigma_E^2)(H_B^2 A xi P + sigma_B^2) /
/// (sigma_B^2 (H_E^2 A xi P + 2 r sigma_B^2 + sigma_E^2)(1 + r sigma_B^2 / sigma_E^2)) ]`
/// with `r = H_E^2 / H_B^2`.
pub fn upper_bound_peak(g: &LinkGains, pc: &PeakConstraints, sigma_b: f64, sigma_e: f64) -> Result<f64> {
    check_inputs(g, pc, sigma_b, sigma_e)?;
    if g.h_b == 0.0 {
        return Err(Error::invalid("main-channel gain must be positive for the upper bound"));
    }
    let r = (g.h_e / g.h_b).powi(2);
    let rb = r * sigma_b * sigma_b;
    let se2 = sigma_e * sigma_e;
    let ln_rho = pc.a.ln() + pc.mean().ln();
    let lsb2 = 2.0 * sigma_b.ln();
    let main = softplus(2.0 * g.h_b.ln() + ln_rho - lsb2);
    let k = 2.0 * rb + se2;
    let eve = k.ln() + softplus(2.0 * g.h_e.ln() + ln_rho - k.ln());
    Ok(0.5 * ((rb + se2).ln() + main - eve - (rb / se2).ln_1p()))
}

/// High-SNR limit `ln(H_B sigma_E / (H_E sigma_B))`, shared by the lower
/// and upper bounds.
pub fn asymptote_peak(g: &LinkGains, sigma_b: f64, sigma_e: f64) -> Result<Asymptote> {
    LinkGains::new(g.h_b, g.h_e)?;
    validate_sigmas(sigma_b, sigma_e)?;
    if g.h_e == 0.0 {
        return Err(Error::invalid("asymptote is undefined when the eavesdropper gain is zero"));
    }
    if !is_degraded_secure(g, sigma_b, sigma_e) {
        return Err(Error::invalid("asymptote requested for a degraded scenario"));
    }
    let v = (g.h_b / g.h_e).ln() + (sigma_e / sigma_b).ln();
    Ok(Asymptote { lower: v, upper: v })
}

/// All peak-constrained bounds for one operating point.
pub fn evaluate_peak(g: &LinkGains, pc: &PeakConstraints, sigma_b: f64, sigma_e: f64) -> Result<BoundReport> {
    check_inputs(g, pc, sigma_b, sigma_e)?;
    if !is_degraded_secure(g, sigma_b, sigma_e) || g.h_b == 0.0 {
        return Ok(BoundReport::degraded());
    }
    let (lower_1, params) = lower_bound_peak_1_with_params(g, pc, sigma_b, sigma_e)?;
    let (lower_2, c) = lower_bound_peak_2_with_rate(g, pc, sigma_b, sigma_e)?;
    let upper = upper_bound_peak(g, pc, sigma_b, sigma_e)?;
    let params = match params {
        BoundParams::Peak { mu, delta, mu_tilde, .. } => BoundParams::Peak { mu, delta, mu_tilde, c },
        other => other,
    };
    let asymptote = if g.h_e > 0.0 {
        Some(asymptote_peak(g, sigma_b, sigma_e)?)
    } else {
        None
    };
    Ok(BoundReport {
        lower_1,
        lower_2,
        upper,
        degraded: false,
        clamped_lower: lower_1.max(lower_2).max(0.0),
        params,
        asymptote,
    })
}
