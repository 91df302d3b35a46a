//! Standard normal and χ² distribution functions.
//!
//! Everything is built on the regularized incomplete gamma function, evaluated
//! by its power series below `x = a + 1` and by a Lentz continued fraction
//! above. `Φ` follows from `erfc(z) = Q(1/2, z²)`. Quantiles are refined with
//! safeguarded Newton steps.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};

const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;
const MAX_ITER: usize = 100_000;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
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

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x < 0.5 {
        // Reflection keeps the Lanczos sum in its accurate range.
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let t = x + LANCZOS_G + 0.5;
    let series = LANCZOS[1..]
        .iter()
        .enumerate()
        .fold(LANCZOS[0], |acc, (i, c)| acc + c / (x + i as f64 + 1.0));
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + series.ln()
}

/// Regularized incomplete gamma pair `(P(a, x), Q(a, x))`.
pub fn gamma_pq(a: f64, x: f64) -> (f64, f64) {
    debug_assert!(a > 0.0 && x >= 0.0);
    if x == 0.0 {
        return (0.0, 1.0);
    }
    if x.is_infinite() {
        return (1.0, 0.0);
    }
    let prefactor = (a * x.ln() - x - ln_gamma(a)).exp();
    if x < a + 1.0 {
        let p = (prefactor * lower_series(a, x)).min(1.0);
        (p, 1.0 - p)
    } else {
        let q = (prefactor * upper_fraction(a, x)).min(1.0);
        (1.0 - q, q)
    }
}

fn lower_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut term = 1.0 / a;
    let mut sum = term;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * EPS {
            break;
        }
    }
    sum
}

fn upper_fraction(a: f64, x: f64) -> f64 {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// `Φ(x)` without argument checks.
pub(crate) fn phi(x: f64) -> f64 {
    let z = x / SQRT_2;
    let (p, q) = gamma_pq(0.5, z * z);
    if x < 0.0 {
        0.5 * q
    } else {
        0.5 + 0.5 * p
    }
}

/// Standard normal c.d.f.
pub fn normal_cdf(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::InvalidArgument("normal_cdf of NaN".into()));
    }
    Ok(phi(x))
}

/// Standard normal survival function `1 − Φ(x)`, accurate in the upper tail.
pub fn normal_sf(x: f64) -> Result<f64> {
    normal_cdf(-x)
}

/// Standard normal quantile `Φ⁻¹(u)` for `0 < u < 1`.
pub fn normal_quantile(u: f64) -> Result<f64> {
    check_probability(u)?;
    Ok(phi_inv(u))
}

pub(crate) fn phi_inv(u: f64) -> f64 {
    if u > 0.5 {
        -lower_normal_quantile(1.0 - u)
    } else {
        lower_normal_quantile(u)
    }
}

/// Quantile for `u ≤ 1/2`: Acklam's rational approximation polished by
/// Halley steps against [`phi`].
fn lower_normal_quantile(u: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_671_071_363_357,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    if u == 0.5 {
        return 0.0;
    }
    let mut x = if u < 0.024_25 {
        let q = (-2.0 * u.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = u - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };
    for _ in 0..3 {
        let e = phi(x) - u;
        let step = e * (2.0 * PI).sqrt() * (0.5 * x * x).exp();
        x -= step / (1.0 + 0.5 * x * step);
    }
    x
}

fn check_probability(u: f64) -> Result<()> {
    if u > 0.0 && u < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("probability {u} outside (0,1)")))
    }
}

/// χ² distribution with a positive integer number of degrees of freedom.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChiSquare {
    dof: u32,
}

impl ChiSquare {
    pub fn new(dof: u32) -> Result<Self> {
        if dof == 0 {
            return Err(Error::InvalidArgument("chi-square needs at least 1 degree of freedom".into()));
        }
        Ok(ChiSquare { dof })
    }

    pub fn dof(&self) -> u32 {
        self.dof
    }

    fn shape(&self) -> f64 {
        0.5 * f64::from(self.dof)
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        self.check_support(x)?;
        Ok(gamma_pq(self.shape(), 0.5 * x).0)
    }

    pub fn sf(&self, x: f64) -> Result<f64> {
        self.check_support(x)?;
        Ok(gamma_pq(self.shape(), 0.5 * x).1)
    }

    fn check_support(&self, x: f64) -> Result<()> {
        if x >= 0.0 {
            Ok(())
        } else {
            Err(Error::Domain(format!("chi-square argument {x} is negative")))
        }
    }

    fn density(&self, x: f64) -> f64 {
        let a = self.shape();
        let y = 0.5 * x;
        0.5 * ((a - 1.0) * y.ln() - y - ln_gamma(a)).exp()
    }

    /// Lower quantile: the `x` with `cdf(x) = u`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        check_probability(u)?;
        Ok(self.solve(u, 1.0 - u))
    }

    /// Upper quantile: the `x` with `sf(x) = q`. Accurate for tiny `q`.
    pub fn inverse_sf(&self, q: f64) -> Result<f64> {
        check_probability(q)?;
        Ok(self.solve(1.0 - q, q))
    }

    /// Safeguarded Newton iteration from the Wilson–Hilferty start. The
    /// residual is taken on whichever tail is smaller so that it keeps full
    /// relative precision.
    fn solve(&self, lower: f64, upper: f64) -> f64 {
        let a = self.shape();
        let f = f64::from(self.dof);
        let residual = |x: f64| {
            let (p, q) = gamma_pq(a, 0.5 * x);
            if lower <= 0.5 {
                p - lower
            } else {
                upper - q
            }
        };

        let z = if lower <= 0.5 { phi_inv(lower) } else { -phi_inv(upper) };
        let k = 2.0 / (9.0 * f);
        let mut x = f * (1.0 - k + z * k.sqrt()).powi(3);
        if !(x > 0.0) || lower < 0.05 {
            // Small-x behaviour P(a, y) ≈ y^a / Γ(a + 1).
            let small = 2.0 * ((lower.ln() + ln_gamma(a + 1.0)) / a).exp();
            if !(x > 0.0) || small < x {
                x = small;
            }
        }

        let (mut lo, mut hi) = (0.0_f64, f64::INFINITY);
        for _ in 0..400 {
            let r = residual(x);
            if r == 0.0 {
                return x;
            }
            if r < 0.0 {
                lo = lo.max(x);
            } else {
                hi = hi.min(x);
            }
            let mut next = x - r / self.density(x);
            if !(next > lo && next < hi) || !next.is_finite() {
                next = if hi.is_finite() { 0.5 * (lo + hi) } else { 2.0 * x.max(1.0) };
            }
            if (next - x).abs() <= 4.0 * f64::EPSILON * x {
                return next;
            }
            x = next;
        }
        x
    }
}

/// `P(f/2, x/2)`.
pub fn chisq_cdf(x: f64, dof: u32) -> Result<f64> {
    ChiSquare::new(dof)?.cdf(x)
}

pub fn chisq_quantile(u: f64, dof: u32) -> Result<f64> {
    ChiSquare::new(dof)?.quantile(u)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Composite Simpson rule; the independent oracle for `Φ`.
    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
        let h = (b - a) / panels as f64;
        let mut acc = f(a) + f(b);
        for k in 1..panels {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(a + k as f64 * h);
        }
        acc * h / 3.0
    }

    fn density(t: f64) -> f64 {
        (-0.5 * t * t).exp() / (2.0 * PI).sqrt()
    }

    #[test]
    fn ln_gamma_known_values() {
        assert!((ln_gamma(1.0)).abs() < 1e-14);
        assert!((ln_gamma(0.5) - PI.sqrt().ln()).abs() < 1e-14);
        assert!((ln_gamma(10.0) - 362_880f64.ln()).abs() < 1e-12);
        assert!((ln_gamma(0.1) - 2.252_712_651_734_206).abs() < 1e-13);
    }

    #[test]
    fn normal_cdf_symmetry() {
        assert_eq!(normal_cdf(0.0).unwrap(), 0.5);
        for k in 0..200 {
            let x = k as f64 * 0.05;
            let s = normal_cdf(x).unwrap() + normal_cdf(-x).unwrap();
            assert!((s - 1.0).abs() < 1e-14, "x={x}");
        }
        assert!(normal_cdf(f64::NAN).is_err());
    }

    #[test]
    fn normal_cdf_matches_quadrature() {
        let x = 1.959_963_985;
        let oracle = 0.5 + simpson(density, 0.0, x, 2000);
        assert!((normal_cdf(x).unwrap() - 0.975).abs() < 1e-9);
        assert!((normal_cdf(x).unwrap() - oracle).abs() < 1e-12);
        for &x in &[-6.0, -3.3, -1.0, 0.4, 2.5, 5.0] {
            let oracle = if x < 0.0 {
                0.5 - simpson(density, x, 0.0, 4000)
            } else {
                0.5 + simpson(density, 0.0, x, 4000)
            };
            assert!((normal_cdf(x).unwrap() - oracle).abs() < 1e-12, "x={x}");
        }
    }

    #[test]
    fn normal_cdf_monotone_and_saturating() {
        let mut prev = 0.0;
        for k in 0..=1600 {
            let x = -8.0 + k as f64 * 0.01;
            let v = normal_cdf(x).unwrap();
            // Strict until Φ saturates at double resolution.
            assert!(if x < 5.0 { v > prev } else { v >= prev }, "x={x}");
            prev = v;
        }
        assert!(normal_cdf(-8.0).unwrap() < 1e-15);
        assert!(1.0 - normal_cdf(8.0).unwrap() < 1e-15);
    }

    #[test]
    fn normal_quantile_values() {
        assert_eq!(normal_quantile(0.5).unwrap(), 0.0);
        // Bisection on Φ as the oracle.
        let (mut lo, mut hi) = (0.0, 5.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if phi(mid) < 0.975 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((normal_quantile(0.975).unwrap() - lo).abs() < 1e-12);
        assert!((normal_quantile(0.975).unwrap() - 1.959_963_985).abs() < 1e-8);
        assert!(normal_quantile(0.0).is_err());
        assert!(normal_quantile(1.0).is_err());
    }

    #[test]
    fn normal_round_trip_grid() {
        for k in 1..1000 {
            let u = k as f64 / 1000.0;
            let back = normal_cdf(normal_quantile(u).unwrap()).unwrap();
            assert!((back - u).abs() < 1e-10, "u={u}");
        }
        for &u in &[1e-300, 1e-100, 1e-20, 1e-8] {
            let back = normal_cdf(normal_quantile(u).unwrap()).unwrap();
            assert!(((back - u) / u).abs() < 1e-10, "u={u}");
        }
    }

    #[test]
    fn chisq_cdf_special_cases() {
        for f in [1, 3, 7, 63] {
            assert_eq!(chisq_cdf(0.0, f).unwrap(), 0.0);
        }
        for k in 0..400 {
            let x = k as f64 * 0.1;
            let want = 1.0 - (-x / 2.0).exp();
            assert!((chisq_cdf(x, 2).unwrap() - want).abs() < 1e-12, "x={x}");
        }
        assert!(chisq_cdf(-1.0, 2).is_err());
        assert!(chisq_cdf(1.0, 0).is_err());
    }

    #[test]
    fn chisq_cdf_one_dof_is_squared_normal() {
        for k in 1..200 {
            let x = k as f64 * 0.07;
            let want = 2.0 * phi(x.sqrt()) - 1.0;
            assert!((chisq_cdf(x, 1).unwrap() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn chisq_cdf_monotone() {
        for f in [1, 3, 7, 63] {
            let mut prev = -1.0;
            for k in 0..1000 {
                let x = k as f64 * 0.15;
                let v = chisq_cdf(x, f).unwrap();
                assert!(v >= prev, "f={f} x={x}");
                prev = v;
            }
        }
    }

    #[test]
    fn chisq_quantile_known_values() {
        let median2 = chisq_quantile(0.5, 2).unwrap();
        assert!((median2 - 2.0 * 2f64.ln()).abs() < 1e-9);
        // Bisection oracle on the c.d.f. for f = 3.
        let (mut lo, mut hi) = (0.0, 50.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if chisq_cdf(mid, 3).unwrap() < 0.95 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let q = chisq_quantile(0.95, 3).unwrap();
        assert!(((q - lo) / lo).abs() < 1e-9, "{q} vs {lo}");
        assert!((chisq_cdf(q, 3).unwrap() - 0.95).abs() < 1e-9);
        assert!((q - 7.814_727_903_251_178).abs() < 1e-9);
    }

    #[test]
    fn chisq_quantile_one_dof_identity() {
        for k in 1..100 {
            let u = k as f64 / 100.0;
            let z = normal_quantile((1.0 + u) / 2.0).unwrap();
            let q = chisq_quantile(u, 1).unwrap();
            assert!((q - z * z).abs() < 1e-8, "u={u}");
        }
    }

    #[test]
    fn chisq_round_trip() {
        for f in [1, 2, 3, 5, 7, 21, 63, 200, 1023] {
            for k in 1..100 {
                let u = k as f64 / 100.0;
                let x = chisq_quantile(u, f).unwrap();
                assert!((chisq_cdf(x, f).unwrap() - u).abs() < 1e-8, "f={f} u={u}");
            }
        }
    }

    #[test]
    fn chisq_inverse_sf_tail() {
        let c = ChiSquare::new(1).unwrap();
        for &q in &[1e-3, 1e-6, 1e-12, 0.2, 0.9] {
            let x = c.inverse_sf(q).unwrap();
            assert!(((c.sf(x).unwrap() - q) / q).abs() < 1e-9, "q={q}");
        }
        assert!(c.quantile(0.0).is_err());
        assert!(c.inverse_sf(1.0).is_err());
    }
}
