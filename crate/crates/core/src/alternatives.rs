//! Samplers for the alternatives used in power studies.
//!
//! Bivariate copulas are drawn by conditional inversion: `U` is uniform and
//! `V` solves `∂C(u, v)/∂u = W` for an independent uniform `W`. FGM, Clayton
//! and Plackett invert in closed form, AMH by bisection.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid_arg, Error, Result};
use crate::sample::{Sample, MAX_DIMENSION};
use crate::special::{ln_gamma, phi};
use crate::stream::RandomStream;

const BISECTION_TOLERANCE: f64 = 1e-12;
const BISECTION_MAX_ITER: usize = 200;

pub const SUPPORTED_FAMILIES: &str = "uniform, amh, fgm, clayton, plackett, beta, normal-copula";

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Family {
    Uniform,
    /// Ali–Mikhail–Haq, `θ ∈ [−1, 1)`.
    Amh { theta: f64 },
    /// Farlie–Gumbel–Morgenstern, `θ ∈ [−1, 1]`.
    Fgm { theta: f64 },
    /// Clayton, `θ ∈ [−1, ∞) \ {0}`.
    Clayton { theta: f64 },
    /// Plackett, `θ > 0`, independence at `θ = 1`.
    Plackett { theta: f64 },
    /// Independent Beta(α, β) coordinates.
    BetaIid { alpha: f64, beta: f64 },
    /// Gaussian copula with equicorrelation `ρ`.
    NormalCopula { rho: f64 },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Uniform => "uniform",
            Family::Amh { .. } => "amh",
            Family::Fgm { .. } => "fgm",
            Family::Clayton { .. } => "clayton",
            Family::Plackett { .. } => "plackett",
            Family::BetaIid { .. } => "beta",
            Family::NormalCopula { .. } => "normal-copula",
        }
    }

    fn is_bivariate_copula(&self) -> bool {
        matches!(
            self,
            Family::Amh { .. } | Family::Fgm { .. } | Family::Clayton { .. } | Family::Plackett { .. }
        )
    }
}

/// A validated alternative distribution on `[0,1]^p`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlternativeSpec {
    family: Family,
    p: usize,
}

impl AlternativeSpec {
    pub fn new(family: Family, p: usize) -> Result<Self> {
        if p == 0 || p > MAX_DIMENSION {
            return Err(invalid_arg!("dimension p = {p} outside 1..={MAX_DIMENSION}"));
        }
        if family.is_bivariate_copula() && p != 2 {
            return Err(invalid_arg!("{} is a bivariate copula; p must be 2", family.name()));
        }
        let ok = match family {
            Family::Uniform => true,
            Family::Amh { theta } => (-1.0..1.0).contains(&theta),
            Family::Fgm { theta } => (-1.0..=1.0).contains(&theta),
            Family::Clayton { theta } => theta >= -1.0 && theta != 0.0 && theta.is_finite(),
            Family::Plackett { theta } => theta > 0.0 && theta.is_finite(),
            Family::BetaIid { alpha, beta } => {
                alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite()
            }
            Family::NormalCopula { rho } => {
                rho < 1.0 && (p == 1 && rho > -1.0 || p > 1 && rho > -1.0 / (p - 1) as f64)
            }
        };
        if !ok {
            return Err(invalid_arg!("parameter out of range for {}", AlternativeSpec { family, p }));
        }
        Ok(AlternativeSpec { family, p })
    }

    pub fn uniform(p: usize) -> Result<Self> {
        AlternativeSpec::new(Family::Uniform, p)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// Parameter list as `key=value` pairs joined by `;`.
    pub fn params(&self) -> String {
        match self.family {
            Family::Uniform => format!("p={}", self.p),
            Family::Amh { theta }
            | Family::Fgm { theta }
            | Family::Clayton { theta }
            | Family::Plackett { theta } => format!("theta={theta}"),
            Family::BetaIid { alpha, beta } => format!("alpha={alpha};beta={beta};p={}", self.p),
            Family::NormalCopula { rho } => format!("rho={rho};p={}", self.p),
        }
    }
}

impl fmt::Display for AlternativeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.family.name(), self.params().replace(';', ","))
    }
}

impl FromStr for AlternativeSpec {
    type Err = Error;

    /// Parses `family[:key=value,...]`, e.g. `clayton:theta=2`,
    /// `beta:alpha=0.5,beta=3` or `normal-copula:rho=0.3,p=6`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, args) = s.split_once(':').unwrap_or((s, ""));
        let mut theta = None;
        let mut alpha = None;
        let mut beta = None;
        let mut rho = None;
        let mut p = None;
        for pair in args.split([',', ';']).map(str::trim).filter(|a| !a.is_empty()) {
            let (key, value) = pair
                .split_once('=')
                .ok_or_else(|| invalid_arg!("expected key=value in '{pair}'"))?;
            let slot = match key.trim() {
                "theta" => &mut theta,
                "alpha" => &mut alpha,
                "beta" => &mut beta,
                "rho" => &mut rho,
                "p" => {
                    p = Some(value.trim().parse::<usize>().map_err(|_| invalid_arg!("bad dimension '{value}'"))?);
                    continue;
                }
                other => return Err(invalid_arg!("unknown parameter '{other}' in '{s}'")),
            };
            *slot = Some(value.trim().parse::<f64>().map_err(|_| invalid_arg!("bad number '{value}'"))?);
        }
        let need = |v: Option<f64>, key: &str| v.ok_or_else(|| invalid_arg!("'{name}' requires {key}=<value>"));
        let family = match name.trim() {
            "uniform" => Family::Uniform,
            "amh" => Family::Amh { theta: need(theta, "theta")? },
            "fgm" => Family::Fgm { theta: need(theta, "theta")? },
            "clayton" => Family::Clayton { theta: need(theta, "theta")? },
            "plackett" => Family::Plackett { theta: need(theta, "theta")? },
            "beta" | "beta-iid" => Family::BetaIid { alpha: need(alpha, "alpha")?, beta: need(beta, "beta")? },
            "normal-copula" => Family::NormalCopula { rho: need(rho, "rho")? },
            other => {
                return Err(invalid_arg!("unknown alternative '{other}'; supported: {SUPPORTED_FAMILIES}"))
            }
        };
        AlternativeSpec::new(family, p.unwrap_or(2))
    }
}

/// A uniform draw from the open interval `(0, 1)`.
fn open01<R: Rng>(rng: &mut R) -> f64 {
    ((rng.random::<u64>() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// `n` i.i.d. draws from `spec`, generated row by row from one stream.
pub fn sample_alternative(stream: &RandomStream, spec: &AlternativeSpec, n: usize) -> Result<Sample> {
    if n == 0 {
        return Err(invalid_arg!("sample size must be at least 1"));
    }
    let p = spec.p;
    let mut rng = stream.rng();
    let mut data = Vec::with_capacity(n * p);
    match spec.family {
        Family::Uniform => data.extend((0..n * p).map(|_| rng.random::<f64>())),
        Family::BetaIid { alpha, beta } => {
            for _ in 0..n * p {
                data.push(beta_quantile(open01(&mut rng), alpha, beta));
            }
        }
        Family::NormalCopula { rho } => {
            let chol = cholesky(&equicorrelation(p, rho), p)?;
            let mut z = vec![0.0; p];
            for _ in 0..n {
                for zj in z.iter_mut() {
                    *zj = StandardNormal.sample(&mut rng);
                }
                for i in 0..p {
                    let x: f64 = (0..=i).map(|k| chol[i * p + k] * z[k]).sum();
                    data.push(phi(x));
                }
            }
        }
        family => {
            for _ in 0..n {
                let u = open01(&mut rng);
                let w = open01(&mut rng);
                data.push(u);
                data.push(conditional_inverse(family, u, w).clamp(0.0, 1.0));
            }
        }
    }
    Sample::new(data, n, p)
}

/// The `v` solving `∂C(u, v)/∂u = w`.
fn conditional_inverse(family: Family, u: f64, w: f64) -> f64 {
    match family {
        Family::Fgm { theta } => {
            // Root in [0,1] of a v² − (1 + a) v + w = 0, rationalised.
            let a = theta * (1.0 - 2.0 * u);
            let b = 1.0 + a;
            2.0 * w / (b + (b * b - 4.0 * a * w).sqrt())
        }
        Family::Clayton { theta } => {
            if theta == -1.0 {
                return 1.0 - u;
            }
            let inner = u.powf(-theta) * (w.powf(-theta / (1.0 + theta)) - 1.0) + 1.0;
            inner.max(0.0).powf(-1.0 / theta)
        }
        Family::Plackett { theta } => {
            let a = w * (1.0 - w);
            let b = theta + a * (theta - 1.0).powi(2);
            let c = 2.0 * a * (u * theta * theta + 1.0 - u) + theta * (1.0 - 2.0 * a);
            let d = theta.sqrt() * (theta + 4.0 * a * u * (1.0 - u) * (1.0 - theta).powi(2)).sqrt();
            (c - (1.0 - 2.0 * w) * d) / (2.0 * b)
        }
        Family::Amh { theta } => {
            let conditional = |v: f64| {
                let d = 1.0 - theta * (1.0 - u) * (1.0 - v);
                v * (1.0 - theta * (1.0 - v)) / (d * d)
            };
            bisect(|v| conditional(v) - w, 0.0, 1.0)
        }
        _ => unreachable!("not a bivariate copula"),
    }
}

/// Root of an increasing function on `[lo, hi]`.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..BISECTION_MAX_ITER {
        if hi - lo <= BISECTION_TOLERANCE {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `C_θ(u, v)` for the bivariate families (and the independence copula).
pub fn copula_cdf(spec: &AlternativeSpec, u: f64, v: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&u) || !(0.0..=1.0).contains(&v) {
        return Err(Error::Domain(format!("({u}, {v}) outside the unit square")));
    }
    let c = match spec.family {
        Family::Uniform if spec.p == 2 => u * v,
        Family::Amh { theta } => u * v / (1.0 - theta * (1.0 - u) * (1.0 - v)),
        Family::Fgm { theta } => u * v * (1.0 + theta * (1.0 - u) * (1.0 - v)),
        Family::Clayton { theta } => {
            if u == 0.0 || v == 0.0 {
                0.0
            } else {
                (u.powf(-theta) + v.powf(-theta) - 1.0).max(0.0).powf(-1.0 / theta)
            }
        }
        Family::Plackett { theta } => {
            // [A − √(A² − 4uvθ(θ−1))] / (2(θ−1)) with the difference
            // rationalised, which also covers θ = 1.
            let a = 1.0 + (theta - 1.0) * (u + v);
            2.0 * u * v * theta / (a + (a * a - 4.0 * u * v * theta * (theta - 1.0)).sqrt())
        }
        _ => return Err(Error::Unsupported(format!("no bivariate copula c.d.f. for {spec}"))),
    };
    Ok(c)
}

fn equicorrelation(p: usize, rho: f64) -> Vec<f64> {
    (0..p * p).map(|k| if k / p == k % p { 1.0 } else { rho }).collect()
}

/// Lower Cholesky factor of a symmetric positive-definite `p × p` matrix.
fn cholesky(a: &[f64], p: usize) -> Result<Vec<f64>> {
    let mut l = vec![0.0; p * p];
    for i in 0..p {
        for j in 0..=i {
            let dot: f64 = (0..j).map(|k| l[i * p + k] * l[j * p + k]).sum();
            if i == j {
                let d = a[i * p + i] - dot;
                if d <= 0.0 {
                    return Err(invalid_arg!("matrix is not positive definite"));
                }
                l[i * p + i] = d.sqrt();
            } else {
                l[i * p + j] = (a[i * p + j] - dot) / l[j * p + j];
            }
        }
    }
    Ok(l)
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn beta_inc(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let front = (ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln()).exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_fraction(a, b, x) / a
    } else {
        1.0 - front * beta_fraction(b, a, 1.0 - x) / b
    }
}

/// Lentz evaluation of the incomplete beta continued fraction.
fn beta_fraction(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..10_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        d = if d.abs() < TINY { 1.0 / TINY } else { 1.0 / d };
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        d = if d.abs() < TINY { 1.0 / TINY } else { 1.0 / d };
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

/// Beta(a, b) quantile by Newton steps safeguarded with bisection.
pub fn beta_quantile(u: f64, a: f64, b: f64) -> f64 {
    let ln_norm = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b);
    let density = |x: f64| (ln_norm + (a - 1.0) * x.ln() + (b - 1.0) * (1.0 - x).ln()).exp();
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let mut x = a / (a + b);
    for _ in 0..BISECTION_MAX_ITER {
        let r = beta_inc(a, b, x) - u;
        if r == 0.0 {
            return x;
        }
        if r < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo <= BISECTION_TOLERANCE {
            break;
        }
        let mut next = x - r / density(x);
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-15 {
            return next;
        }
        x = next;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(s: &str) -> AlternativeSpec {
        s.parse().unwrap()
    }

    /// Kolmogorov–Smirnov distance to Uniform(0, 1).
    fn ks_uniform(mut xs: Vec<f64>) -> f64 {
        xs.sort_by(f64::total_cmp);
        let n = xs.len() as f64;
        xs.iter()
            .enumerate()
            .map(|(i, &x)| f64::max(x - i as f64 / n, (i + 1) as f64 / n - x))
            .fold(0.0, f64::max)
    }

    /// Asymptotic 1% critical value of the one-sample KS distance.
    fn ks_critical_1pct(n: usize) -> f64 {
        1.6276 / (n as f64).sqrt()
    }

    /// 1% critical value Bonferroni-split over `m` columns:
    /// `√(−ln(α/(2m))/2) / √n`.
    fn ks_critical_family(n: usize, m: usize) -> f64 {
        (-(0.01 / (2.0 * m as f64)).ln() / 2.0).sqrt() / (n as f64).sqrt()
    }

    /// Kendall's τ in O(n log n): discordant pairs are inversions of the
    /// second coordinate once the first is sorted.
    fn kendall_tau(pairs: &mut [(f64, f64)]) -> f64 {
        fn count(v: &mut [f64], buf: &mut Vec<f64>) -> u64 {
            let n = v.len();
            if n < 2 {
                return 0;
            }
            let mid = n / 2;
            let mut inv = count(&mut v[..mid], buf) + count(&mut v[mid..], buf);
            buf.clear();
            let (mut i, mut j) = (0, mid);
            while i < mid && j < n {
                if v[i] <= v[j] {
                    buf.push(v[i]);
                    i += 1;
                } else {
                    buf.push(v[j]);
                    inv += (mid - i) as u64;
                    j += 1;
                }
            }
            buf.extend_from_slice(&v[i..mid]);
            buf.extend_from_slice(&v[j..n]);
            v.copy_from_slice(buf);
            inv
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut v: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let n = v.len() as f64;
        let discordant = count(&mut v, &mut Vec::new()) as f64;
        1.0 - 4.0 * discordant / (n * (n - 1.0))
    }

    #[test]
    fn parses_cli_strings() {
        let c = spec("clayton:theta=2");
        assert_eq!(c.family(), Family::Clayton { theta: 2.0 });
        assert_eq!(c.to_string(), "clayton:theta=2");
        let b = spec("beta:alpha=0.5,beta=3");
        assert_eq!(b.family(), Family::BetaIid { alpha: 0.5, beta: 3.0 });
        assert_eq!(b.p(), 2);
        let nc = spec("normal-copula:rho=0.3,p=6");
        assert_eq!((nc.family(), nc.p()), (Family::NormalCopula { rho: 0.3 }, 6));
        assert_eq!(nc.params(), "rho=0.3;p=6");
        assert_eq!(spec("uniform").p(), 2);
        assert_eq!(spec(&nc.to_string()), nc);
    }

    #[test]
    fn rejects_bad_specs() {
        for bad in [
            "amh:theta=1",
            "fgm:theta=1.5",
            "clayton:theta=0",
            "clayton:theta=-2",
            "plackett:theta=0",
            "beta:alpha=0,beta=1",
            "normal-copula:rho=-0.25,p=6",
            "normal-copula:rho=1,p=3",
            "clayton:theta=2,p=3",
            "gumbel:theta=2",
            "clayton",
            "clayton:theta",
        ] {
            assert!(bad.parse::<AlternativeSpec>().is_err(), "{bad}");
        }
        let err = "gumbel:theta=2".parse::<AlternativeSpec>().unwrap_err().to_string();
        assert!(err.contains("normal-copula"), "{err}");
    }

    #[test]
    fn cdf_margins_and_values() {
        for s in ["amh:theta=0.9", "fgm:theta=1", "clayton:theta=2", "clayton:theta=-0.5", "plackett:theta=5"] {
            let a = spec(s);
            for k in 0..=10 {
                let u = k as f64 / 10.0;
                assert!((copula_cdf(&a, u, 1.0).unwrap() - u).abs() < 1e-14, "{s}");
                assert!((copula_cdf(&a, 1.0, u).unwrap() - u).abs() < 1e-14, "{s}");
            }
        }
        let amh = copula_cdf(&spec("amh:theta=0.9"), 0.5, 0.5).unwrap();
        assert!((amh - 0.25 / (1.0 - 0.9 * 0.25)).abs() < 1e-15);
        assert!((amh - 0.322_580_645_161_290_3).abs() < 1e-12);
        let clayton = copula_cdf(&spec("clayton:theta=2"), 0.5, 0.5).unwrap();
        assert!((clayton - 7f64.powf(-0.5)).abs() < 1e-15);
        for theta in [1.0 - 1e-6, 1.0, 1.0 + 1e-6] {
            let a = AlternativeSpec::new(Family::Plackett { theta }, 2).unwrap();
            // C − uv = (θ − 1) uv(1 − u)(1 − v) + O((θ − 1)²).
            for &(u, v) in &[(0.3, 0.7), (0.5, 0.5), (0.9, 0.1)] {
                let dev = (theta - 1.0) * u * v * (1.0 - u) * (1.0 - v);
                assert!((copula_cdf(&a, u, v).unwrap() - u * v - dev).abs() < 1e-11);
            }
        }
        assert!(copula_cdf(&spec("beta:alpha=1,beta=1"), 0.5, 0.5).is_err());
        assert!(copula_cdf(&spec("clayton:theta=2"), 1.5, 0.5).is_err());
    }

    #[test]
    fn plackett_cdf_matches_textbook_form() {
        let theta: f64 = 5.0;
        let a = spec("plackett:theta=5");
        for &(u, v) in &[(0.2f64, 0.3f64), (0.5, 0.5), (0.8, 0.4)] {
            let big_a = 1.0 + (theta - 1.0) * (u + v);
            let textbook =
                (big_a - (big_a * big_a - 4.0 * u * v * theta * (theta - 1.0)).sqrt()) / (2.0 * (theta - 1.0));
            assert!((copula_cdf(&a, u, v).unwrap() - textbook).abs() < 1e-14);
        }
    }

    #[test]
    fn conditional_inverse_solves_derivative() {
        // Finite-difference ∂C/∂u at the returned v must reproduce w.
        for s in ["amh:theta=0.9", "amh:theta=-0.7", "fgm:theta=1", "fgm:theta=-1", "clayton:theta=2",
                  "clayton:theta=-0.5", "plackett:theta=5", "plackett:theta=0.2"] {
            let a = spec(s);
            for &(u, w) in &[(0.3, 0.2), (0.6, 0.9), (0.5, 0.5), (0.05, 0.7)] {
                let v = conditional_inverse(a.family(), u, w);
                let h = 1e-6;
                let d = (copula_cdf(&a, u + h, v).unwrap() - copula_cdf(&a, u - h, v).unwrap()) / (2.0 * h);
                assert!((d - w).abs() < 1e-6, "{s} u={u} w={w}: {d}");
            }
        }
        assert_eq!(conditional_inverse(Family::Clayton { theta: -1.0 }, 0.3, 0.9), 0.7);
    }

    #[test]
    fn copula_margins_pass_ks() {
        let n = 100_000;
        let families = ["amh:theta=0.9", "fgm:theta=1", "clayton:theta=2", "plackett:theta=5", "normal-copula:rho=0.4,p=3"];
        let columns = 11;
        for (k, s) in families.iter().enumerate() {
            let a = spec(s);
            let x = sample_alternative(&RandomStream::new(100 + k as u64, 0), &a, n).unwrap();
            for j in 0..a.p() {
                let d = ks_uniform(x.column(j));
                assert!(d < ks_critical_family(n, columns), "{s} column {j}: D = {d}");
            }
        }
    }

    #[test]
    fn sampler_matches_cdf_on_grid() {
        let n = 1_000_000;
        for (k, s) in ["amh:theta=0.9", "fgm:theta=1", "clayton:theta=2", "plackett:theta=5"].iter().enumerate() {
            let a = spec(s);
            let x = sample_alternative(&RandomStream::new(200 + k as u64, 0), &a, n).unwrap();
            for gu in 1..=5 {
                for gv in 1..=5 {
                    let (u, v) = (gu as f64 / 6.0, gv as f64 / 6.0);
                    let hits = x.rows().filter(|r| r[0] <= u && r[1] <= v).count();
                    let emp = hits as f64 / n as f64;
                    let c = copula_cdf(&a, u, v).unwrap();
                    let tol = 3.0 * (c * (1.0 - c) / n as f64).sqrt();
                    assert!((emp - c).abs() < tol + 1e-12, "{s} ({u:.3},{v:.3}): {emp} vs {c}");
                }
            }
        }
    }

    #[test]
    fn clayton_joint_cdf_at_center() {
        let n = 1_000_000;
        let x = sample_alternative(&RandomStream::new(300, 0), &spec("clayton:theta=2"), n).unwrap();
        let emp = x.rows().filter(|r| r[0] <= 0.5 && r[1] <= 0.5).count() as f64 / n as f64;
        let c = 7f64.powf(-0.5);
        assert!((emp - c).abs() < 3.0 * (c * (1.0 - c) / n as f64).sqrt(), "{emp}");
    }

    #[test]
    fn fgm_at_zero_is_independent() {
        let n = 100_000;
        let a = AlternativeSpec::new(Family::Fgm { theta: 0.0 }, 2).unwrap();
        let x = sample_alternative(&RandomStream::new(400, 0), &a, n).unwrap();
        let mut pairs: Vec<(f64, f64)> = x.rows().map(|r| (r[0], r[1])).collect();
        let tau = kendall_tau(&mut pairs);
        let nf = n as f64;
        let se = (2.0 * (2.0 * nf + 5.0) / (9.0 * nf * (nf - 1.0))).sqrt();
        assert!(tau.abs() < 3.0 * se, "tau {tau}");
    }

    #[test]
    fn kendall_tau_oracle_on_small_input() {
        let mut pairs = vec![(0.1, 0.2), (0.2, 0.1), (0.3, 0.4), (0.4, 0.3)];
        // Brute force: concordant − discordant over all pairs.
        let mut score = 0.0;
        for i in 0..4 {
            for j in i + 1..4 {
                let (a, b): ((f64, f64), (f64, f64)) = (pairs[i], pairs[j]);
                score += ((a.0 - b.0) * (a.1 - b.1)).signum();
            }
        }
        assert!((kendall_tau(&mut pairs) - score / 6.0).abs() < 1e-15);
    }

    #[test]
    fn normal_copula_at_zero_is_independent() {
        let n = 100_000;
        let x = sample_alternative(&RandomStream::new(500, 0), &spec("normal-copula:rho=0,p=2"), n).unwrap();
        for j in 0..2 {
            assert!(ks_uniform(x.column(j)) < ks_critical_1pct(n));
        }
        let mut pairs: Vec<(f64, f64)> = x.rows().map(|r| (r[0], r[1])).collect();
        let tau = kendall_tau(&mut pairs);
        let nf = n as f64;
        assert!(tau.abs() < 3.0 * (2.0 * (2.0 * nf + 5.0) / (9.0 * nf * (nf - 1.0))).sqrt());
    }

    #[test]
    fn normal_copula_kendall_matches_rho() {
        // For the Gaussian copula τ = (2/π) asin ρ.
        let n = 50_000;
        let x = sample_alternative(&RandomStream::new(501, 0), &spec("normal-copula:rho=0.3,p=6"), n).unwrap();
        let mut pairs: Vec<(f64, f64)> = x.rows().map(|r| (r[2], r[5])).collect();
        let tau = kendall_tau(&mut pairs);
        let want = 2.0 / std::f64::consts::PI * 0.3f64.asin();
        assert!((tau - want).abs() < 0.01, "{tau} vs {want}");
    }

    #[test]
    fn beta_one_one_is_uniform() {
        let n = 100_000;
        let x = sample_alternative(&RandomStream::new(600, 0), &spec("beta:alpha=1,beta=1"), n).unwrap();
        for j in 0..2 {
            assert!(ks_uniform(x.column(j)) < ks_critical_1pct(n));
        }
    }

    #[test]
    fn beta_functions() {
        // I_x(a, 1) = x^a and I_x(1, b) = 1 − (1 − x)^b.
        for &x in &[0.01, 0.3, 0.77, 0.99] {
            assert!((beta_inc(2.5, 1.0, x) - x.powf(2.5)).abs() < 1e-13);
            assert!((beta_inc(1.0, 3.0, x) - (1.0 - (1.0 - x).powi(3))).abs() < 1e-13);
        }
        for &(a, b) in &[(0.5, 0.5), (0.5, 3.0), (2.0, 2.0), (3.0, 3.0)] {
            for k in 1..50 {
                let u = k as f64 / 50.0;
                let x = beta_quantile(u, a, b);
                assert!((beta_inc(a, b, x) - u).abs() < 1e-10, "a={a} b={b} u={u}");
            }
        }
        // Beta(1/2, 1/2) is the arcsine law: F(x) = (2/π) asin √x.
        let x = beta_quantile(0.3, 0.5, 0.5);
        assert!((2.0 / std::f64::consts::PI * x.sqrt().asin() - 0.3).abs() < 1e-10);
    }

    #[test]
    fn beta_sample_moments() {
        let n = 100_000;
        let x = sample_alternative(&RandomStream::new(700, 0), &spec("beta:alpha=2,beta=3"), n).unwrap();
        let col = x.column(0);
        let mean = col.iter().sum::<f64>() / n as f64;
        let var = 2.0 * 3.0 / (25.0 * 6.0);
        assert!((mean - 0.4).abs() < 3.0 * (var / n as f64).sqrt(), "{mean}");
    }

    #[test]
    fn samples_are_reproducible() {
        let a = spec("amh:theta=0.9");
        let s = RandomStream::new(9, 9);
        assert_eq!(sample_alternative(&s, &a, 100).unwrap(), sample_alternative(&s, &a, 100).unwrap());
        assert!(sample_alternative(&s, &a, 0).is_err());
    }
}
