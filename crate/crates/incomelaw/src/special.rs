//! Special functions needed by the statistical machinery.
//!
//! Only two functions live here: the log-gamma function and the regularized
//! incomplete beta function. They are written out rather than pulled from a
//! dependency because the t-distribution p-values they feed are part of the
//! crate's reproducibility contract: the same inputs must give the same
//! digits on every platform and toolchain.

/// Absolute tolerance for the continued-fraction evaluation of the
/// regularized incomplete beta function.
const BETA_CF_TOL: f64 = 1e-12;

/// Iteration cap for the continued fraction. Convergence is typically reached
/// in well under 100 iterations for the parameter ranges that arise from
/// t-distribution tail probabilities.
const BETA_CF_MAX_ITER: usize = 500;

/// Guard value used by the modified Lentz algorithm to avoid division by
/// numbers indistinguishable from zero.
const LENTZ_TINY: f64 = 1e-300;

/// Natural log of the gamma function, via the Lanczos approximation (g = 7,
/// nine coefficients), with the reflection formula for arguments below 1/2.
///
/// Accurate to roughly 1e-13 relative over the positive reals, which is far
/// below the tolerance of every consumer in this crate.
pub(crate) fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    // Canonical table values, quoted at their published precision.
    #[allow(clippy::excessive_precision)]
    const COEFFS: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];

    if x < 0.5 {
        // Reflection: Gamma(x) * Gamma(1-x) = pi / sin(pi x).
        let sin_pi_x = (std::f64::consts::PI * x).sin();
        return std::f64::consts::PI.ln() - sin_pi_x.abs().ln() - ln_gamma(1.0 - x);
    }

    let x = x - 1.0;
    let mut acc = COEFFS[0];
    for (i, &c) in COEFFS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Natural log of `n!`, exact in the sense of `ln_gamma`.
pub(crate) fn ln_factorial(n: u64) -> f64 {
    ln_gamma(n as f64 + 1.0)
}

/// Regularized incomplete beta function `I_x(a, b)` for `a, b > 0` and
/// `x` in `[0, 1]`.
///
/// Evaluated by the modified Lentz continued fraction, using the symmetry
/// `I_x(a, b) = 1 - I_{1-x}(b, a)` to stay in the rapidly converging regime
/// `x < (a + 1) / (a + b + 2)`.
pub(crate) fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    debug_assert!(a > 0.0 && b > 0.0);
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }

    // front = x^a (1-x)^b / (a B(a, b)), the prefactor of the CF expansion;
    // computed in log space to dodge over/underflow at extreme arguments.
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();

    if x < (a + 1.0) / (a + b + 2.0) {
        (ln_front.exp() / a) * beta_continued_fraction(a, b, x)
    } else {
        1.0 - (ln_front.exp() / b) * beta_continued_fraction(b, a, 1.0 - x)
    }
}

/// The continued-fraction part of the incomplete beta expansion, evaluated by
/// the modified Lentz algorithm.
fn beta_continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;

    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < LENTZ_TINY {
        d = LENTZ_TINY;
    }
    d = 1.0 / d;
    let mut h = d;

    for m in 1..=BETA_CF_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;

        // Even step.
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < LENTZ_TINY {
            d = LENTZ_TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < LENTZ_TINY {
            c = LENTZ_TINY;
        }
        d = 1.0 / d;
        h *= d * c;

        // Odd step.
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < LENTZ_TINY {
            d = LENTZ_TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < LENTZ_TINY {
            c = LENTZ_TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;

        if (delta - 1.0).abs() < BETA_CF_TOL {
            break;
        }
    }
    h
}
