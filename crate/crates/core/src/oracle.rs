//! Numerical mutual information `I(X; HX + Z)` for the maximum-entropy
//! input laws, used to check the closed-form bounds from outside.
//!
//! `I = h(Y) - 1/2 ln(2 pi e sigma^2)` with `h(Y)` integrated by adaptive
//! Gauss–Kronrod over a window that holds all but a negligible part of
//! the output mass. The output density is in closed form for all three
//! input laws, evaluated in log space so that the far tails stay finite.

use std::f64::consts::{E, PI};

use crate::error::{Error, Result};
use crate::numerics::{
    ln_q, mean_fraction, q_diff, scaled_q, solve_c, stable_log_expm1, trunc_exp_entropy_offset,
};
use crate::peak_bounds::UNIFORM_TIE;
use crate::quadrature::{integrate, QuadratureSpec};
use crate::scenario::{is_degraded_secure, validate_sigmas, LinkGains};

/// Noise standard deviations added beyond the input-induced support.
const WINDOW_SIGMAS: f64 = 8.0;
/// The exponential input's window ends at its `1 - 1e-16` quantile.
const EXP_TAIL_LOG: f64 = 36.841_361_487_904_734; // ln(1e16)

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InputDistribution {
    /// Density `e^{-x/mean} / mean` on `[0, inf)`.
    Exponential { mean: f64 },
    /// Density `1/A` on `[0, A]`.
    Uniform { a: f64 },
    /// Density `c e^{cx} / (e^{cA} - 1)` on `[0, A]`, `c != 0`.
    TruncExp { c: f64, a: f64 },
}

impl InputDistribution {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Self::Exponential { mean } => mean > 0.0 && mean.is_finite(),
            Self::Uniform { a } => a > 0.0 && a.is_finite(),
            Self::TruncExp { c, a } => a > 0.0 && a.is_finite() && c != 0.0 && c.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!("invalid input distribution {self:?}")))
        }
    }

    /// Maximum-entropy law on `[0, A]` with mean `alpha A`.
    pub fn max_entropy_peak(alpha: f64, a: f64) -> Result<Self> {
        if (alpha - 0.5).abs() < UNIFORM_TIE {
            Ok(Self::Uniform { a })
        } else {
            Ok(Self::TruncExp { c: solve_c(alpha, a)?, a })
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Self::Exponential { mean } => mean,
            Self::Uniform { a } => 0.5 * a,
            Self::TruncExp { c, a } => a * mean_fraction(c * a),
        }
    }

    /// Largest input value the output window has to cover.
    fn support_top(&self) -> f64 {
        match *self {
            Self::Exponential { mean } => mean * EXP_TAIL_LOG,
            Self::Uniform { a } | Self::TruncExp { a, .. } => a,
        }
    }
}

/// Differential entropy of the input in nats.
pub fn input_entropy(d: &InputDistribution) -> f64 {
    match *d {
        InputDistribution::Exponential { mean } => 1.0 + mean.ln(),
        InputDistribution::Uniform { a } => a.ln(),
        InputDistribution::TruncExp { c, a } => {
            let u = c * a;
            a.ln() + trunc_exp_entropy_offset(u, mean_fraction(u))
        }
    }
}

/// Inverse CDF of the truncated exponential, clamped to `[0, A]`.
fn trunc_exp_quantile(c: f64, a: f64, s: f64) -> f64 {
    let u = c * a;
    let x = if c > 0.0 {
        a + (s + (1.0 - s) * (-u).exp()).ln() / c
    } else {
        (s * u.exp_m1()).ln_1p() / c
    };
    x.clamp(0.0, a)
}

#[cfg(test)]
fn trunc_exp_cdf(c: f64, a: f64, x: f64) -> f64 {
    let u = c * a;
    let v = if c > 0.0 {
        ((c * (x - a)).exp() - (-u).exp()) / -(-u).exp_m1()
    } else {
        (c * x).exp_m1() / u.exp_m1()
    };
    v.clamp(0.0, 1.0)
}

/// `ln f_Y(y)` for `Y = H X + Z`, `Z ~ N(0, sigma^2)`, `H > 0`.
fn ln_output_density(d: &InputDistribution, h: f64, sigma: f64, y: f64) -> f64 {
    match *d {
        InputDistribution::Exponential { mean } => {
            let hm = h * mean;
            let x = sigma / hm - y / sigma;
            if x >= 0.0 {
                -hm.ln() - 0.5 * (y / sigma).powi(2) + scaled_q(x).ln()
            } else {
                -hm.ln() + 0.5 * (sigma / hm).powi(2) - y / hm + ln_q(x)
            }
        }
        InputDistribution::Uniform { a } => {
            let ha = h * a;
            q_diff((y - ha) / sigma, y / sigma).ln() - ha.ln()
        }
        InputDistribution::TruncExp { c, a } => ln_trunc_exp_output(c, a, h, sigma, y),
    }
}

/// Closed-form `ln f_Y(y)` for the truncated-exponential input.
///
/// With `k = c/H` and `m = y + k sigma^2`, the convolution is
/// `w/H e^{k y + k^2 sigma^2 / 2} [Q(-m/sigma) - Q((HA - m)/sigma)]`,
/// `w = c/(e^{cA} - 1)`. In either tail the Gaussian exponent of the
/// dominant Q term cancels the exponential factor analytically, leaving
/// only bounded terms.
fn ln_trunc_exp_output(c: f64, a: f64, h: f64, sigma: f64, y: f64) -> f64 {
    let k = c / h;
    let m = y + k * sigma * sigma;
    let (lo, hi) = (-m / sigma, (h * a - m) / sigma);
    let base = -stable_log_expm1(c, a) - h.ln();
    if lo > 0.0 {
        let ratio = ln_q(hi) - ln_q(lo);
        base - 0.5 * (y / sigma).powi(2) + scaled_q(lo).ln() + (-ratio.exp_m1()).ln()
    } else if hi < 0.0 {
        let ratio = ln_q(-lo) - ln_q(-hi);
        let dy = (y - h * a) / sigma;
        base + c * a - 0.5 * dy * dy + scaled_q(-hi).ln() + (-ratio.exp_m1()).ln()
    } else {
        base + k * y + 0.5 * (k * sigma).powi(2) + q_diff(lo, hi).ln()
    }
}

fn breakpoints(d: &InputDistribution, h: f64, sigma: f64) -> Vec<f64> {
    let mut b = vec![-sigma, 0.0, sigma];
    match *d {
        InputDistribution::Exponential { mean } => {
            let hm = h * mean;
            b.extend([hm, 5.0 * hm, 15.0 * hm]);
        }
        InputDistribution::Uniform { a } => {
            let ha = h * a;
            b.extend([ha - sigma, ha, ha + sigma]);
        }
        InputDistribution::TruncExp { c, a } => {
            let ha = h * a;
            b.extend([ha - sigma, ha, ha + sigma]);
            for s in [1e-6, 1e-3, 0.05, 0.25, 0.5, 0.75, 0.95, 0.999, 1.0 - 1e-6] {
                b.push(h * trunc_exp_quantile(c, a, s));
            }
        }
    }
    b
}

/// `I(X; HX + Z)` in nats for `Z ~ N(0, sigma^2)`.
pub fn mutual_information(d: &InputDistribution, h: f64, sigma: f64, quad: &QuadratureSpec) -> Result<f64> {
    d.validate()?;
    if !(h >= 0.0 && h.is_finite()) {
        return Err(Error::invalid(format!("gain must be finite and non-negative, got {h}")));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::invalid(format!("noise level must be positive, got {sigma}")));
    }
    if h == 0.0 {
        return Ok(0.0);
    }
    let lo = -WINDOW_SIGMAS * sigma;
    let hi = h * d.support_top() + WINDOW_SIGMAS * sigma;
    let integrand = |y: f64| {
        let lf = ln_output_density(d, h, sigma, y);
        if lf == f64::NEG_INFINITY {
            0.0
        } else {
            -lf.exp() * lf
        }
    };
    let h_y = integrate(integrand, lo, hi, &breakpoints(d, h, sigma), quad)?;
    Ok(h_y - 0.5 * (2.0 * PI * E * sigma * sigma).ln())
}

/// `I(X; Y_B) - I(X; Y_E)` at a fixed input law: an achievable secrecy
/// rate, hence a lower bound on the secrecy capacity. Returns 0 without
/// integrating when the scenario is not degraded-secure.
pub fn oracle_secrecy_rate(
    d: &InputDistribution,
    g: &LinkGains,
    sigma_b: f64,
    sigma_e: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    LinkGains::new(g.h_b, g.h_e)?;
    validate_sigmas(sigma_b, sigma_e)?;
    if !is_degraded_secure(g, sigma_b, sigma_e) {
        return Ok(0.0);
    }
    let ib = mutual_information(d, g.h_b, sigma_b, quad)?;
    let ie = mutual_information(d, g.h_e, sigma_e, quad)?;
    Ok(ib - ie)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{normal_pdf, solve_c};

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn entropies() {
        assert!((input_entropy(&InputDistribution::Exponential { mean: 1.0 }) - 1.0).abs() < 1e-15);
        assert!((input_entropy(&InputDistribution::Uniform { a: 2.0 }) - 2f64.ln()).abs() < 1e-15);
        let near_uniform = input_entropy(&InputDistribution::TruncExp { c: 1e-9, a: 3.0 });
        assert!((near_uniform - 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn trunc_exp_entropy_by_quadrature() {
        for &(c, a) in &[(0.8, 2.0), (-3.0, 1.5), (40.0, 1.0)] {
            let d = InputDistribution::TruncExp { c, a };
            let z = (c * a).exp_m1() / c;
            let q = QuadratureSpec::with_abs_tol(1e-13);
            let h = integrate(
                |x: f64| {
                    let f = (c * x).exp() / z;
                    -f * f.ln()
                },
                0.0,
                a,
                &[],
                &q,
            )
            .unwrap();
            assert!((input_entropy(&d) - h).abs() < 1e-10, "c = {c}");
        }
    }

    #[test]
    fn means() {
        let c = solve_c(0.3, 5.0).unwrap();
        let d = InputDistribution::TruncExp { c, a: 5.0 };
        assert!((d.mean() - 1.5).abs() < 1e-10);
        assert_eq!(InputDistribution::Uniform { a: 4.0 }.mean(), 2.0);
        assert!(matches!(
            InputDistribution::max_entropy_peak(0.5, 3.0).unwrap(),
            InputDistribution::Uniform { .. }
        ));
    }

    #[test]
    fn quantile_inverts_cdf() {
        for &(c, a) in &[(2.0, 1.0), (-7.0, 3.0), (900.0, 1.0), (-900.0, 1.0)] {
            for s in [0.01, 0.3, 0.7, 0.99] {
                let x = trunc_exp_quantile(c, a, s);
                assert!((trunc_exp_cdf(c, a, x) - s).abs() < 1e-9, "c = {c}, s = {s}");
            }
        }
    }

    #[test]
    fn exponential_density_matches_convolution() {
        let (mean, h, sigma) = (2.0, 0.7, 0.9);
        let d = InputDistribution::Exponential { mean };
        let q = QuadratureSpec::with_abs_tol(1e-15);
        for y in [-2.0, -0.3, 0.4, 1.9, 7.5] {
            let conv = integrate(
                |x: f64| (-x / mean).exp() / mean * normal_pdf((y - h * x) / sigma) / sigma,
                0.0,
                80.0,
                &[y / h],
                &q,
            )
            .unwrap();
            let closed = ln_output_density(&d, h, sigma, y).exp();
            assert!(((closed - conv) / conv).abs() < 1e-10, "y = {y}: {closed} vs {conv}");
        }
    }

    #[test]
    fn zero_gain_gives_zero() {
        for d in [
            InputDistribution::Exponential { mean: 3.0 },
            InputDistribution::Uniform { a: 3.0 },
        ] {
            assert_eq!(mutual_information(&d, 0.0, 1.0, &spec()).unwrap(), 0.0);
        }
    }

    #[test]
    fn exponential_above_epi_bound() {
        for &(h, m) in &[(1.0, 0.5), (0.3, 20.0), (1.0, 300.0)] {
            let d = InputDistribution::Exponential { mean: m };
            let i = mutual_information(&d, h, 1.0, &spec()).unwrap();
            let hm: f64 = h * m;
            let epi = 0.5 * (1.0 + E * hm * hm / (2.0 * PI)).ln();
            let cap = 0.5 * (1.0 + 2.0 * hm * hm).ln();
            assert!(i >= epi && i <= cap, "{epi} <= {i} <= {cap}");
        }
    }

    #[test]
    fn uniform_above_epi_bound() {
        // h(X) = ln 2: 1/2 ln(1 + 4 / (2 pi e 0.01)) = 1.598...
        let d = InputDistribution::Uniform { a: 2.0 };
        let i = mutual_information(&d, 1.0, 0.1, &spec()).unwrap();
        let epi = 0.5 * (1.0 + 4.0 / (2.0 * PI * E * 0.01)).ln();
        assert!((epi - 1.598).abs() < 1e-3);
        // Gaussian input with the same variance is the ceiling.
        let cap = 0.5 * (1.0 + (4.0 / 12.0) / 0.01f64).ln();
        assert!(i >= epi && i <= cap, "{i}");
    }

    #[test]
    fn trunc_exp_matches_direct_convolution() {
        // Closed form against a plain x-space convolution, including steep
        // laws, low and high SNR and both tails.
        let cases = [
            (1.3, 4.0, 0.8, 0.5),
            (-2.0, 3.0, 5.0, 1.0),
            (30.0, 1.0, 0.05, 1.0),
            (-30.0, 1.0, 0.05, 1.0),
            (-6.158e-7, 6.744e6, 0.0823, 1.04),
        ];
        for &(c, a, h, sigma) in &cases {
            let d = InputDistribution::TruncExp { c, a };
            let z = (c * a).exp_m1() / c;
            let q = QuadratureSpec {
                abs_tol: 0.0,
                rel_tol: 1e-11,
                max_intervals: 4000,
            };
            let ha: f64 = h * a;
            for t in [-0.3, 0.0, 0.01, 0.5, 0.99, 1.0, 1.3] {
                let y = t * ha + (t - 0.5).signum() * 2.0 * sigma;
                let lo = ((y - 12.0 * sigma) / h).max(0.0);
                let hi = ((y + 12.0 * sigma) / h).min(a);
                if lo >= hi {
                    continue;
                }
                let conv = integrate(
                    |x: f64| (c * x).exp() / z * normal_pdf((y - h * x) / sigma) / sigma,
                    lo,
                    hi,
                    &[(y / h).clamp(lo, hi)],
                    &q,
                )
                .unwrap();
                let got = ln_output_density(&d, h, sigma, y).exp();
                assert!(((got - conv) / conv).abs() < 1e-9, "{c} {a} {h} y = {y}: {got} vs {conv}");
            }
        }
    }

    #[test]
    fn mi_increases_with_gain() {
        let c = solve_c(0.3, 10.0).unwrap();
        for d in [
            InputDistribution::Exponential { mean: 3.0 },
            InputDistribution::Uniform { a: 10.0 },
            InputDistribution::TruncExp { c, a: 10.0 },
        ] {
            let mut prev = 0.0;
            for h in [0.01, 0.05, 0.2, 1.0, 5.0] {
                let i = mutual_information(&d, h, 1.0, &spec()).unwrap();
                assert!(i >= prev - 1e-8, "{d:?} h = {h}");
                prev = i;
            }
        }
    }

    #[test]
    fn identical_channels_give_zero_rate() {
        let g = LinkGains { h_b: 0.2, h_e: 0.2 };
        let d = InputDistribution::Uniform { a: 30.0 };
        assert_eq!(oracle_secrecy_rate(&d, &g, 1.0, 1.0, &spec()).unwrap(), 0.0);
        let g = LinkGains { h_b: 0.1, h_e: 0.2 };
        assert_eq!(oracle_secrecy_rate(&d, &g, 1.0, 1.0, &spec()).unwrap(), 0.0);
    }

    #[test]
    fn reference_rate_for_exponential_input() {
        // Independent SciPy quadrature of the same operating point.
        let g = LinkGains { h_b: 3e-5, h_e: 1e-7 };
        let d = InputDistribution::Exponential { mean: 0.2 * 1e6 };
        let r = oracle_secrecy_rate(&d, &g, 1.0, 1.0, &spec()).unwrap();
        assert!((r - 1.517_690_343_076_488).abs() < 1e-6, "{r}");
    }

    #[test]
    fn tolerance_halving_is_stable() {
        let c = solve_c(0.8, 50.0).unwrap();
        let d = InputDistribution::TruncExp { c, a: 50.0 };
        let a = mutual_information(&d, 0.3, 1.0, &QuadratureSpec::with_abs_tol(1e-8)).unwrap();
        let b = mutual_information(&d, 0.3, 1.0, &QuadratureSpec::with_abs_tol(5e-9)).unwrap();
        assert!((a - b).abs() < 1e-6);
    }
}
