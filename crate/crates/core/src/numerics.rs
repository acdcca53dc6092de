//! Gaussian tail functions, log-domain helpers and the two scalar root
//! solvers used by the peak-constrained bounds.
//!
//! Everything here is a pure function of `f64` inputs. The helpers that
//! deal with truncated-exponential moments are written in terms of the
//! dimensionless rate `u = c * A`, which is what keeps them scale free.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};

/// `sqrt(2 * pi)`.
pub const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

/// Below this `x` the Mills ratio is formed as `exp(x^2/2) * Q(x)` directly.
const SCALED_Q_DIRECT_LIMIT: f64 = 5.0;

/// Gaussian tail probability `Q(x) = P(N(0,1) > x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

/// `exp(x^2 / 2) * Q(x)` for `x >= 0`, without overflow or underflow.
///
/// Tends to `1 / (x * sqrt(2 pi))` as `x` grows. Negative inputs are
/// accepted and evaluated through the direct product.
pub fn scaled_q(x: f64) -> f64 {
    if x < SCALED_Q_DIRECT_LIMIT {
        (0.5 * x * x).exp() * q_function(x)
    } else {
        mills_ratio_cf(x) / SQRT_2PI
    }
}

/// Mills ratio `Q(x) / phi(x)` by the Laplace continued fraction
/// `1/(x + 1/(x + 2/(x + 3/(x + ...))))`, modified Lentz evaluation.
fn mills_ratio_cf(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for k in 1..2000 {
        let a = k as f64;
        d = x + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = x + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    1.0 / f
}

/// `ln Q(x)` for any finite `x`.
pub fn ln_q(x: f64) -> f64 {
    if x > 0.0 {
        scaled_q(x).ln() - 0.5 * x * x
    } else {
        (-q_function(-x)).ln_1p()
    }
}

/// `1 - 2 Q(x)`, exact near zero where the subtraction would cancel.
pub fn one_minus_two_q(x: f64) -> f64 {
    libm::erf(x * FRAC_1_SQRT_2)
}

/// `Q(a) - Q(b)`, choosing the evaluation that avoids cancellation.
pub fn q_diff(a: f64, b: f64) -> f64 {
    if a > 0.0 && b > 0.0 {
        q_function(a) - q_function(b)
    } else if a < 0.0 && b < 0.0 {
        q_function(-b) - q_function(-a)
    } else {
        0.5 * (libm::erf(b * FRAC_1_SQRT_2) - libm::erf(a * FRAC_1_SQRT_2))
    }
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / SQRT_2PI
}

/// `ln(1 + e^z)` without overflow.
pub fn softplus(z: f64) -> f64 {
    if z > 35.0 {
        z + (-z).exp()
    } else {
        z.exp().ln_1p()
    }
}

/// `ln(e^a + e^b)`.
pub fn ln_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// `ln((e^u - 1) / u)`, finite for every finite `u` (limit 0 at `u = 0`).
pub fn ln_expm1_over(u: f64) -> f64 {
    if u.abs() < 1e-3 {
        let u2 = u * u;
        u / 2.0 + u2 / 24.0 - u2 * u2 / 2880.0
    } else if u > 0.0 {
        u + (-(-u).exp_m1()).ln() - u.ln()
    } else {
        (-u.exp_m1()).ln() - (-u).ln()
    }
}

/// `ln((e^{cA} - 1) / c)` for a truncated-exponential rate `c` on `[0, A]`.
pub fn stable_log_expm1(c: f64, a: f64) -> f64 {
    ln_expm1_over(c * a) + a.ln()
}

/// Mean of the truncated exponential `f(x) ∝ e^{u x}` on `[0, 1]`:
/// `1/(1 - e^{-u}) - 1/u`, with value 1/2 at `u = 0`.
///
/// Strictly increasing from 0 (u → -∞) to 1 (u → +∞), and
/// `mean_fraction(-u) = 1 - mean_fraction(u)`.
pub fn mean_fraction(u: f64) -> f64 {
    if u.abs() < 0.05 {
        let u2 = u * u;
        0.5 + u * (1.0 / 12.0 - u2 * (1.0 / 720.0 - u2 * (1.0 / 30240.0 - u2 / 1_209_600.0)))
    } else {
        -1.0 / (-u).exp_m1() - 1.0 / u
    }
}

/// Variance of the same law on `[0, 1]`: `1/u^2 - 1/(4 sinh^2(u/2))`,
/// 1/12 at `u = 0`. Multiply by `A^2` for support `[0, A]`.
pub fn trunc_exp_variance_fraction(u: f64) -> f64 {
    if u.abs() < 0.1 {
        let u2 = u * u;
        1.0 / 12.0
            - u2 * (1.0 / 240.0
                - u2 * (1.0 / 6048.0 - u2 * (1.0 / 172_800.0 - u2 / 5_322_240.0)))
    } else {
        let s = (0.5 * u).sinh();
        1.0 / (u * u) - 1.0 / (4.0 * s * s)
    }
}

/// Differential entropy of the truncated exponential on `[0, A]` minus
/// `ln A`, given its dimensionless rate `u` and mean fraction `alpha`:
/// `ln((e^u - 1)/u) - alpha * u`, arranged so large `|u|` does not cancel.
pub fn trunc_exp_entropy_offset(u: f64, alpha: f64) -> f64 {
    if u.abs() < 1e-3 {
        ln_expm1_over(u) - alpha * u
    } else if u > 0.0 {
        u * (1.0 - alpha) + (-(-u).exp_m1()).ln() - u.ln()
    } else {
        (-u.exp_m1()).ln() - (-u).ln() - alpha * u
    }
}

/// Solves `mean_fraction(u) = target` for `u`.
///
/// Bracketing with a safeguarded secant step. Iterates to machine
/// resolution of the bracket rather than stopping at a residual
/// threshold, so that roots are accurate in `u` even where the residual
/// is flat.
fn solve_mean_fraction(target: f64) -> Result<f64> {
    let resid = |u: f64| mean_fraction(u) - target;
    if target == 0.5 {
        return Ok(0.0);
    }
    // Bracket [lo, hi] with resid(lo) < 0 <= resid(hi).
    let (mut lo, mut hi) = if target > 0.5 { (0.0, 1.0) } else { (-1.0, 0.0) };
    if target > 0.5 {
        while resid(hi) < 0.0 {
            lo = hi;
            hi *= 2.0;
            if !hi.is_finite() || hi > 1e300 {
                return Err(Error::Numerical(format!(
                    "no finite root bracket for mean fraction {target}"
                )));
            }
        }
    } else {
        while resid(lo) >= 0.0 {
            hi = lo;
            lo *= 2.0;
            if !lo.is_finite() || lo < -1e300 {
                return Err(Error::Numerical(format!(
                    "no finite root bracket for mean fraction {target}"
                )));
            }
        }
    }

    let mut f_lo = resid(lo);
    let mut f_hi = resid(hi);
    for _ in 0..400 {
        if f_hi == 0.0 {
            return Ok(hi);
        }
        let width = hi - lo;
        if width <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE) {
            break;
        }
        let mid = lo + 0.5 * width;
        let secant = lo - f_lo * width / (f_hi - f_lo);
        // Accept the secant point only if it lands well inside the bracket.
        let x = if secant.is_finite() && secant > lo + 0.05 * width && secant < hi - 0.05 * width {
            secant
        } else {
            mid
        };
        let fx = resid(x);
        if fx < 0.0 {
            lo = x;
            f_lo = fx;
        } else {
            hi = x;
            f_hi = fx;
        }
        // Force a bisection after a lopsided secant step.
        if x != mid {
            let m = lo + 0.5 * (hi - lo);
            let fm = resid(m);
            if fm < 0.0 {
                lo = m;
                f_lo = fm;
            } else {
                hi = m;
                f_hi = fm;
            }
        }
    }
    Ok(if f_hi.abs() <= f_lo.abs() { hi } else { lo })
}

/// Solves `alpha = 1/m - e^{-m}/(1 - e^{-m})` for `m > 0`, given
/// `0 < alpha < 0.5`.
pub fn solve_mu_tilde(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(Error::invalid(format!(
            "mu-tilde equation needs 0 < alpha < 0.5, got {alpha}"
        )));
    }
    // The right-hand side equals mean_fraction(-m).
    let u = solve_mean_fraction(alpha)?;
    Ok(-u)
}

/// Solves `alpha = 1/(1 - e^{-cA}) - 1/(cA)` for the truncated-exponential
/// rate `c`, given `0 < alpha <= 1`, `alpha != 0.5` and `A > 0`.
///
/// `c < 0` for `alpha < 0.5`, `c > 0` above. At `alpha = 1` there is no
/// finite root; the returned `c` is the smallest for which the residual
/// vanishes in double precision.
pub fn solve_c(alpha: f64, a: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::invalid(format!(
            "truncated-exponential rate needs 0 < alpha <= 1, got {alpha}"
        )));
    }
    if alpha == 0.5 {
        return Err(Error::invalid(
            "alpha = 0.5 is the uniform law; the rate is identically zero",
        ));
    }
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::invalid(format!("peak intensity must be positive, got {a}")));
    }
    Ok(solve_mean_fraction(alpha)? / a)
}

/// `ln(2 pi e)`.
pub fn ln_2pie() -> f64 {
    (2.0 * PI * std::f64::consts::E).ln()
}
