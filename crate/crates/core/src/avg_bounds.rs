//! Secrecy-capacity bounds when only the mean optical intensity is
//! constrained.
//!
//! All functions take the link gains and noise levels directly and
//! return raw values in nats per channel use; raw values can be negative
//! at low SNR. [`evaluate_avg`] bundles them into a [`BoundReport`] with
//! the degradedness test and clamping applied.

use std::f64::consts::{E, PI};

use crate::error::{Error, Result};
use crate::numerics::{q_function, scaled_q, softplus, SQRT_2PI};
use crate::scenario::{is_degraded_secure, validate_sigmas, LinkGains};

/// Mean-intensity constraint `E[X] = xi * P`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AvgConstraints {
    pub xi: f64,
    pub p: f64,
}

impl AvgConstraints {
    pub fn new(xi: f64, p: f64) -> Result<Self> {
        validate_xi(xi)?;
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::invalid(format!("nominal intensity must be positive, got {p}")));
        }
        Ok(Self { xi, p })
    }

    /// The mean intensity `xi * P`.
    pub fn mean(&self) -> f64 {
        self.xi * self.p
    }
}

pub(crate) fn validate_xi(xi: f64) -> Result<()> {
    if xi > 0.0 && xi <= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("dimming target must lie in (0, 1], got {xi}")))
    }
}

/// Auxiliary parameters that produced the lower bounds in a report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundParams {
    Avg {
        beta: f64,
        delta: f64,
    },
    Peak {
        mu: Option<f64>,
        delta: f64,
        mu_tilde: Option<f64>,
        /// Truncated-exponential rate; `None` on the uniform branch.
        c: Option<f64>,
    },
    /// Degraded scenario: nothing was evaluated.
    None,
}

/// High-SNR limits of the bounds. Equal for the peak-constrained case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Asymptote {
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    pub lower_1: f64,
    pub lower_2: f64,
    pub upper: f64,
    /// True when the eavesdropper's channel is the stronger one. Every
    /// numeric field is then 0.
    pub degraded: bool,
    /// `max(0, lower_1, lower_2)`.
    pub clamped_lower: f64,
    pub params: BoundParams,
    /// `None` when degraded or when `H_E = 0`.
    pub asymptote: Option<Asymptote>,
}

impl BoundReport {
    pub fn degraded() -> Self {
        Self {
            lower_1: 0.0,
            lower_2: 0.0,
            upper: 0.0,
            degraded: true,
            clamped_lower: 0.0,
            params: BoundParams::None,
            asymptote: None,
        }
    }

    /// `max(0, upper)`.
    pub fn clamped_upper(&self) -> f64 {
        self.upper.max(0.0)
    }
}

fn check_inputs(g: &LinkGains, sigma_b: f64, sigma_e: f64) -> Result<()> {
    LinkGains::new(g.h_b, g.h_e)?;
    validate_sigmas(sigma_b, sigma_e)
}

/// Default `(beta, delta)` for the first lower bound:
/// `delta = sigma_E ln(1 + H_E xi P / sigma_E)` and `beta` the positive
/// root that balances the two halves of the auxiliary output law.
pub fn default_beta_delta(g: &LinkGains, c: &AvgConstraints, sigma_e: f64) -> (f64, f64) {
    let hxp = g.h_e * c.mean();
    let delta = sigma_e * (hxp / sigma_e).ln_1p();
    let s = delta / sigma_e;
    let t = delta + hxp + sigma_e / SQRT_2PI * (-0.5 * s * s).exp();
    // t/2 + sqrt(t^2 + 4 t k)/2 with k = sqrt(2 pi) sigma_E e^{s^2/2} Q(s),
    // factored so that t^2 never overflows.
    let k = SQRT_2PI * sigma_e * scaled_q(s);
    let beta = 0.5 * t + 0.5 * t.sqrt() * (t + 4.0 * k).sqrt();
    (beta, delta)
}

/// First lower bound, built from a two-sided exponential auxiliary law for
/// the eavesdropper's output. `beta_delta` overrides the defaults.
pub fn lower_bound_avg_1(
    g: &LinkGains,
    c: &AvgConstraints,
    sigma_b: f64,
    sigma_e: f64,
    beta_delta: Option<(f64, f64)>,
) -> Result<f64> {
    check_inputs(g, sigma_b, sigma_e)?;
    let (beta, delta) = match beta_delta {
        Some((b, d)) => {
            if !(b > 0.0 && b.is_finite()) {
                return Err(Error::invalid(format!("beta must be positive, got {b}")));
            }
            if !(d >= 0.0 && d.is_finite()) {
                return Err(Error::invalid(format!("delta must be non-negative, got {d}")));
            }
            (b, d)
        }
        None => default_beta_delta(g, c, sigma_e),
    };
    let se = sigma_e;
    let s = delta / se;
    let gauss = (-0.5 * s * s).exp();
    let hxp = g.h_e * c.mean();

    // ln[ sigma_E sqrt(2 pi e (1 + e H_B^2 xi^2 P^2 / (2 pi sigma_B^2))) ]
    let snr_log = 2.0 * (g.h_b * c.mean()).ln() + 1.0 - (2.0 * PI).ln() - 2.0 * sigma_b.ln();
    let ln_num = se.ln() + 0.5 * (2.0 * PI * E).ln() + 0.5 * softplus(snr_log);
    // ln[ beta e^{-s^2/2} + sqrt(2 pi) sigma_E Q(s) ]
    let ln_den = -0.5 * s * s + (beta + SQRT_2PI * se * scaled_q(s)).ln();

    Ok(ln_num - ln_den
        - 0.5 * q_function(s)
        - s / (2.0 * SQRT_2PI) * gauss
        - 0.5 * s * s * q_function(-(delta + hxp) / se)
        - (delta + hxp) / beta
        - se / (SQRT_2PI * beta) * gauss)
}

/// Second lower bound, from the entropy-power inequality with an
/// exponential input:
/// `1/2 ln[ sigma_E^2 (e xi^2 P^2 H_B^2 + 2 pi sigma_B^2) / (2 pi sigma_B^2 (H_E^2 xi^2 P^2 + sigma_E^2)) ]`.
pub fn lower_bound_avg_2(g: &LinkGains, c: &AvgConstraints, sigma_b: f64, sigma_e: f64) -> Result<f64> {
    check_inputs(g, sigma_b, sigma_e)?;
    let lm = c.mean().ln();
    let main = softplus(2.0 * (g.h_b.ln() + lm - sigma_b.ln()) + 1.0 - (2.0 * PI).ln());
    let eve = softplus(2.0 * (g.h_e.ln() + lm - sigma_e.ln()));
    Ok(0.5 * (main - eve))
}

/// Two-branch upper bound. The first branch applies when
/// `sqrt((H_E^2 sigma_B^2 / H_B^2 + sigma_E^2) / 2 pi) >= (H_E/H_B)(sigma_B/sqrt(2 pi) + H_B xi P / 2)`,
/// which always holds for `H_E = 0`.
pub fn upper_bound_avg(g: &LinkGains, c: &AvgConstraints, sigma_b: f64, sigma_e: f64) -> Result<f64> {
    check_inputs(g, sigma_b, sigma_e)?;
    if g.h_b == 0.0 {
        return Err(Error::invalid("main-channel gain must be positive for the upper bound"));
    }
    let r = g.h_e / g.h_b;
    let spread = sigma_b / SQRT_2PI + 0.5 * g.h_b * c.mean();
    let lhs = ((r * r * sigma_b * sigma_b + sigma_e * sigma_e) / (2.0 * PI)).sqrt();
    if lhs >= r * spread {
        let k = (r * sigma_b / sigma_e).powi(2);
        Ok((4.0 * E).ln() + spread.ln()
            - 0.5 * ((2.0 * PI * E).ln() + 2.0 * sigma_b.ln() + k.ln_1p()))
    } else {
        Ok(high_snr_upper_gap() + (sigma_e / (r * sigma_b)).ln())
    }
}

/// `ln(2 sqrt(e) / pi)`, the limiting distance between the average-only
/// upper and lower bounds.
pub fn high_snr_upper_gap() -> f64 {
    (2.0 * E.sqrt() / PI).ln()
}

/// High-SNR limits: `lower = ln(H_B sigma_E / (H_E sigma_B))` and
/// `upper = lower + ln(2 sqrt(e) / pi)`.
pub fn asymptote_avg(g: &LinkGains, sigma_b: f64, sigma_e: f64) -> Result<Asymptote> {
    check_inputs(g, sigma_b, sigma_e)?;
    if g.h_e == 0.0 {
        return Err(Error::invalid("asymptote is undefined when the eavesdropper gain is zero"));
    }
    if !is_degraded_secure(g, sigma_b, sigma_e) {
        return Err(Error::invalid("asymptote requested for a degraded scenario"));
    }
    let lower = (g.h_b / g.h_e).ln() + (sigma_e / sigma_b).ln();
    Ok(Asymptote {
        lower,
        upper: lower + high_snr_upper_gap(),
    })
}

/// Gaussian capacity of the main channel with the mean intensity as
/// amplitude, `1/2 ln(1 + H_B^2 xi^2 P^2 / sigma_B^2)`. A plotting
/// reference only; it is not a bound on the secrecy capacity.
pub fn shannon_limit(h_b: f64, mean: f64, sigma_b: f64) -> f64 {
    0.5 * softplus(2.0 * (h_b.ln() + mean.ln() - sigma_b.ln()))
}

/// All average-constrained bounds for one operating point.
pub fn evaluate_avg(g: &LinkGains, c: &AvgConstraints, sigma_b: f64, sigma_e: f64) -> Result<BoundReport> {
    check_inputs(g, sigma_b, sigma_e)?;
    if !is_degraded_secure(g, sigma_b, sigma_e) || g.h_b == 0.0 {
        return Ok(BoundReport::degraded());
    }
    let (beta, delta) = default_beta_delta(g, c, sigma_e);
    let lower_1 = lower_bound_avg_1(g, c, sigma_b, sigma_e, Some((beta, delta)))?;
    let lower_2 = lower_bound_avg_2(g, c, sigma_b, sigma_e)?;
    let upper = upper_bound_avg(g, c, sigma_b, sigma_e)?;
    let asymptote = if g.h_e > 0.0 {
        Some(asymptote_avg(g, sigma_b, sigma_e)?)
    } else {
        None
    };
    Ok(BoundReport {
        lower_1,
        lower_2,
        upper,
        degraded: false,
        clamped_lower: lower_1.max(lower_2).max(0.0),
        params: BoundParams::Avg { beta, delta },
        asymptote,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{channel_gain, PdParams, Position};

    fn table_gain() -> f64 {
        channel_gain(Position::new(5.0, 5.0, 3.0), Position::new(5.0, 4.5, 0.0), &PdParams::table_i()).unwrap()
    }

    fn gains(ratio: f64) -> LinkGains {
        let hb = table_gain();
        LinkGains { h_b: hb, h_e: hb / ratio }
    }

    #[test]
    fn beta_delta_with_silent_eavesdropper() {
        let g = LinkGains { h_b: 1.0, h_e: 0.0 };
        let c = AvgConstraints::new(0.5, 10.0).unwrap();
        let (beta, delta) = default_beta_delta(&g, &c, 1.0);
        assert_eq!(delta, 0.0);
        let k = 1.0 / SQRT_2PI;
        let want = 0.5 * k + 0.5 * (k * k + 4.0 * k * SQRT_2PI * 0.5).sqrt();
        assert!((beta - want).abs() < 1e-15);
    }

    #[test]
    fn delta_examples() {
        let g = LinkGains { h_b: 1.0, h_e: 1.0 };
        let c = AvgConstraints::new(1.0, E - 1.0).unwrap();
        assert!((default_beta_delta(&g, &c, 1.0).1 - 1.0).abs() < 1e-15);
        let g = LinkGains { h_b: 1.0, h_e: 1e-7 };
        let c = AvgConstraints::new(1.0, 6.3e6).unwrap();
        let d = default_beta_delta(&g, &c, 1.0).1;
        assert!((d - 1.63f64.ln()).abs() < 1e-12);
        assert!((d - 0.4886).abs() < 1e-4);
    }

    #[test]
    fn lower_1_low_power_is_nonpositive() {
        let c = AvgConstraints::new(0.2, 1e-9).unwrap();
        let v = lower_bound_avg_1(&gains(30.0), &c, 1.0, 1.0, None).unwrap();
        assert!(v <= 0.0, "{v}");
        let r = evaluate_avg(&gains(30.0), &c, 1.0, 1.0).unwrap();
        assert_eq!(r.clamped_lower.max(r.lower_1.max(0.0)), r.clamped_lower);
    }

    #[test]
    fn lower_1_rejects_bad_overrides() {
        let c = AvgConstraints::new(0.2, 1e3).unwrap();
        assert!(lower_bound_avg_1(&gains(30.0), &c, 1.0, 1.0, Some((0.0, 1.0))).is_err());
        assert!(lower_bound_avg_1(&gains(30.0), &c, 1.0, 1.0, Some((1.0, -1.0))).is_err());
    }

    #[test]
    fn lower_1_is_deterministic() {
        let c = AvgConstraints::new(0.2, 10f64.powf(7.3)).unwrap();
        let a = lower_bound_avg_1(&gains(300.0), &c, 1.0, 1.0, None).unwrap();
        let b = lower_bound_avg_1(&gains(300.0), &c, 1.0, 1.0, None).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn gap_at_85_db_near_limit() {
        let c = AvgConstraints::new(0.2, 10f64.powf(8.5)).unwrap();
        let g = gains(300.0);
        let gap = upper_bound_avg(&g, &c, 1.0, 1.0).unwrap() - lower_bound_avg_1(&g, &c, 1.0, 1.0, None).unwrap();
        assert!((gap - 0.04858).abs() < 0.05);
        assert!((gap - 0.04858).abs() < 2e-3);
    }

    #[test]
    fn lower_2_special_cases() {
        let g = LinkGains { h_b: 2e-3, h_e: 0.0 };
        let c = AvgConstraints::new(0.3, 1e4).unwrap();
        let v = lower_bound_avg_2(&g, &c, 1.3, 1.3).unwrap();
        let m = c.mean();
        let want = 0.5 * (1.0 + E * m * m * 4e-6 / (2.0 * PI * 1.69)).ln();
        assert!((v - want).abs() < 1e-14);
        let c = AvgConstraints::new(1.0, 1e-200).unwrap();
        assert!(lower_bound_avg_2(&gains(3.0), &c, 1.0, 2.0).unwrap().abs() < 1e-15);
    }

    #[test]
    fn upper_branches() {
        let g = gains(300.0);
        let tiny = AvgConstraints::new(0.2, 1e-12).unwrap();
        let v = upper_bound_avg(&g, &tiny, 1.0, 1.0).unwrap();
        let k = (1.0f64 / 300.0).powi(2);
        let want = (4.0 * E / SQRT_2PI / (2.0 * PI * E * (1.0 + k)).sqrt()).ln();
        assert!((v - want).abs() < 1e-9);
        let big = AvgConstraints::new(0.2, 1e12).unwrap();
        let v = upper_bound_avg(&g, &big, 1.0, 1.0).unwrap();
        assert!((v - (2.0 * E.sqrt() * 300.0 / PI).ln()).abs() < 1e-12);
        assert!((v - 5.7522).abs() < 1e-4);
    }

    #[test]
    fn upper_is_continuous_at_branch_switch() {
        for &(hb, he, sb, se) in &[(1e-2, 1e-4, 1.0, 1.0), (3.0, 1.0, 0.7, 1.9), (0.5, 0.49, 1.0, 1.0)] {
            let r: f64 = he / hb;
            let lhs = ((r * r * sb * sb + se * se) / (2.0 * PI)).sqrt();
            // Solve lhs = r (sb/sqrt(2pi) + hb m / 2) for the mean m.
            let m = 2.0 * (lhs / r - sb / SQRT_2PI) / hb;
            assert!(m > 0.0);
            let g = LinkGains { h_b: hb, h_e: he };
            let below = upper_bound_avg(&g, &AvgConstraints { xi: 1.0, p: m * (1.0 - 1e-12) }, sb, se).unwrap();
            let above = upper_bound_avg(&g, &AvgConstraints { xi: 1.0, p: m * (1.0 + 1e-12) }, sb, se).unwrap();
            assert!((below - above).abs() < 1e-9, "{below} vs {above}");
        }
    }

    #[test]
    fn asymptote_values() {
        let a = asymptote_avg(&gains(30.0), 1.0, 1.0).unwrap();
        assert!((a.lower - 30f64.ln()).abs() < 1e-12);
        assert!((a.lower - 3.4012).abs() < 1e-4);
        assert!((a.upper - a.lower - 0.0484).abs() < 5e-4);
        let eq = asymptote_avg(&LinkGains { h_b: 1.0, h_e: 1.0 }, 1.0, 1.0).unwrap();
        assert_eq!(eq.lower, 0.0);
        assert!(asymptote_avg(&LinkGains { h_b: 1.0, h_e: 0.0 }, 1.0, 1.0).is_err());
    }

    #[test]
    fn degraded_report_is_zero() {
        let r = evaluate_avg(&LinkGains { h_b: 1.0, h_e: 2.0 }, &AvgConstraints::new(0.2, 1e6).unwrap(), 1.0, 1.0).unwrap();
        assert!(r.degraded);
        assert_eq!([r.lower_1, r.lower_2, r.upper, r.clamped_lower], [0.0; 4]);
    }

    #[test]
    fn constraint_validation() {
        assert!(AvgConstraints::new(1.5, 1.0).is_err());
        assert!(AvgConstraints::new(0.0, 1.0).is_err());
        assert!(AvgConstraints::new(0.5, 0.0).is_err());
        assert!(AvgConstraints::new(1.0, 1.0).is_ok());
    }

    #[test]
    fn shannon_reference() {
        assert!((shannon_limit(0.5, 4.0, 1.0) - 0.5 * 5f64.ln()).abs() < 1e-15);
    }
}
