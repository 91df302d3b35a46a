//! Brownian tents, the Brownian sheet, and the laws of tent norms.
//!
//! A Brownian `H`-tent is the centred Gaussian process on `C_H` with
//! covariance `Π_{j∈H} (s_j ∧ t_j − s_j t_j)`. It is simulated through the
//! truncated Karhunen–Loève series
//!
//! ```text
//! T_H(t) = Σ_{ν ∈ {1..N}^k} Z_ν / (Π ν_j · π^k) · Π_{j∈H} √2 sin(ν_j π t_j)
//! ```
//!
//! whose squared L² norm is `Σ Z_ν² / (Π ν_j² · π^{2k})`. Adding independent
//! Brownian ramps over all `H ⊂ J` yields a Brownian sheet.

use std::f64::consts::{PI, SQRT_2};

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::decompose::{GridFunction, RampComponent};
use crate::error::{invalid_arg, Result};
use crate::stream::{domain, RandomStream};
use crate::subset::SubsetMask;

/// Largest dimension for which a full sheet lattice is simulated.
pub const MAX_SHEET_DIMENSION: usize = 4;

/// Truncation of the Karhunen–Loève series and the evaluation lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KlConfig {
    /// Each multi-index component runs over `1..=nu_max`.
    pub nu_max: usize,
    /// Points per axis of the lattice `{0, 1/(m−1), …, 1}`.
    pub m: usize,
}

impl KlConfig {
    pub fn new(nu_max: usize, m: usize) -> Result<Self> {
        if nu_max < 1 {
            return Err(invalid_arg!("truncation nu_max must be at least 1"));
        }
        if m < 2 {
            return Err(invalid_arg!("lattice needs at least 2 points per axis"));
        }
        Ok(KlConfig { nu_max, m })
    }
}

/// Default per-axis truncation for a tent of cardinality `k`, keeping
/// `nu_max^k` at most about `2·10⁴` terms.
pub fn default_truncation(k: usize) -> usize {
    match k {
        0 | 1 => 200,
        2 => 64,
        3 => 24,
        _ => 12,
    }
}

/// `Σ_{ν=1}^{N} 1/(ν²π²)`, summed from the small end.
pub fn truncated_eigen_sum(nu_max: usize) -> f64 {
    (1..=nu_max).rev().map(|nu| 1.0 / (nu as f64 * PI).powi(2)).sum()
}

/// Mean of the neglected tail of the norm series: `6^{−k} − (Σ_{ν≤N} 1/(ν²π²))^k`.
pub fn truncation_tail_mean(k: usize, nu_max: usize) -> f64 {
    6f64.powi(-(k as i32)) - truncated_eigen_sum(nu_max).powi(k as i32)
}

/// Covariance `Σ_{ν≤N} 2 sin(νπs) sin(νπt) / (ν²π²)` of the truncated
/// one-dimensional tent (the Brownian bridge).
pub fn truncated_bridge_kernel(s: f64, t: f64, nu_max: usize) -> f64 {
    (1..=nu_max)
        .rev()
        .map(|nu| {
            let w = nu as f64 * PI;
            2.0 * (w * s).sin() * (w * t).sin() / (w * w)
        })
        .sum()
}

/// Row `ν − 1` holds `√2 sin(νπ t_i) / (νπ)` over the lattice, exactly zero
/// at both endpoints.
fn sine_basis(cfg: &KlConfig) -> Vec<f64> {
    let m = cfg.m;
    let mut basis = vec![0.0; cfg.nu_max * m];
    for nu in 1..=cfg.nu_max {
        let w = nu as f64 * PI;
        for i in 1..m - 1 {
            let t = i as f64 / (m - 1) as f64;
            basis[(nu - 1) * m + i] = SQRT_2 * (w * t).sin() / w;
        }
    }
    basis
}

/// Contracts `axis` of a tensor (axis 0 fastest) against `matrix`
/// (`rows × cols`, row-major), replacing an extent of `rows` by `cols`.
fn mode_product(data: &[f64], shape: &mut [usize], axis: usize, matrix: &[f64], cols: usize) -> Vec<f64> {
    let rows = shape[axis];
    let inner: usize = shape[..axis].iter().product();
    let outer: usize = shape[axis + 1..].iter().product();
    let mut out = vec![0.0; inner * cols * outer];
    for o in 0..outer {
        for r in 0..rows {
            let src = &data[inner * (r + rows * o)..inner * (r + 1 + rows * o)];
            for c in 0..cols {
                let w = matrix[r * cols + c];
                if w == 0.0 {
                    continue;
                }
                let dst = &mut out[inner * (c + cols * o)..inner * (c + 1 + cols * o)];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += w * s;
                }
            }
        }
    }
    shape[axis] = cols;
    out
}

/// One Brownian `H`-tent on the face lattice of `H`.
pub fn simulate_tent(stream: &RandomStream, subset: SubsetMask, cfg: &KlConfig) -> Result<RampComponent> {
    if subset.is_empty() {
        return Err(invalid_arg!("Brownian tents need a nonempty subset"));
    }
    Ok(simulate_tent_with_basis(stream, subset, cfg, &sine_basis(cfg)))
}

fn simulate_tent_with_basis(stream: &RandomStream, subset: SubsetMask, cfg: &KlConfig, basis: &[f64]) -> RampComponent {
    let k = subset.cardinality();
    let mut rng = stream.rng();
    let mut data: Vec<f64> = (0..cfg.nu_max.pow(k as u32))
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    let mut shape = vec![cfg.nu_max; k];
    for axis in 0..k {
        data = mode_product(&data, &mut shape, axis, basis, cfg.m);
    }
    RampComponent { mask: subset, m: cfg.m, tent: data }
}

/// A `p`-parameter Brownian sheet on the lattice, assembled as
/// `Σ_{H⊂J} Π_{j∉H} t_j · T_H(t_H)` from independent tents. The ∅-tent is a
/// single standard normal.
pub fn simulate_sheet(stream: &RandomStream, p: usize, cfg: &KlConfig) -> Result<GridFunction> {
    if p == 0 || p > MAX_SHEET_DIMENSION {
        return Err(invalid_arg!("sheet dimension {p} outside 1..={MAX_SHEET_DIMENSION}"));
    }
    let basis = sine_basis(cfg);
    let mut sheet = GridFunction::zeros(p, cfg.m)?;
    let components: Vec<RampComponent> = (0u32..1 << p)
        .map(|bits| {
            let mask = SubsetMask::from_bits(bits);
            let sub = stream.substream(u64::from(bits));
            if mask.is_empty() {
                let g: f64 = StandardNormal.sample(&mut sub.rng());
                RampComponent { mask, m: cfg.m, tent: vec![g] }
            } else {
                simulate_tent_with_basis(&sub, mask, cfg, &basis)
            }
        })
        .collect();
    for k in 0..sheet.values().len() {
        let idx = sheet.multi_index(k);
        sheet.values_mut()[k] = components.iter().map(|c| c.ramp_at(&idx)).sum();
    }
    Ok(sheet)
}

/// Sorted Monte Carlo draws of `‖T_H‖²` for tents of cardinality `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct AsymptoticNormTable {
    pub k: usize,
    pub nu_max: usize,
    pub seed: u64,
    /// Whether the truncation tail mean was added to every draw.
    pub tail_compensated: bool,
    pub draws: Vec<f64>,
}

impl AsymptoticNormTable {
    /// Canonical table for `seed`: the root stream is
    /// `(seed, domain::ASYMPTOTIC)` and cardinality `k` uses its substream `k`.
    pub fn build(seed: u64, k: usize, nu_max: usize, count: usize) -> Result<Self> {
        let root = RandomStream::new(seed, domain::ASYMPTOTIC);
        let mut table = asymptotic_norm_draws(&root.substream(k as u64), k, nu_max, count, true)?;
        table.seed = seed;
        Ok(table)
    }

    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.draws.iter().sum::<f64>() / self.draws.len() as f64
    }
}

/// `count` independent draws of the truncated norm series; draw `d` uses
/// substream `d`. With `tail_compensation` each draw is shifted by
/// [`truncation_tail_mean`].
pub fn asymptotic_norm_draws(
    stream: &RandomStream,
    k: usize,
    nu_max: usize,
    count: usize,
    tail_compensation: bool,
) -> Result<AsymptoticNormTable> {
    if k < 1 {
        return Err(invalid_arg!("tent cardinality must be at least 1"));
    }
    if count < 1 {
        return Err(invalid_arg!("need at least one draw"));
    }
    if nu_max < 1 {
        return Err(invalid_arg!("truncation nu_max must be at least 1"));
    }
    let axis: Vec<f64> = (1..=nu_max).map(|nu| 1.0 / (nu as f64 * PI).powi(2)).collect();
    let mut weights = vec![1.0];
    for _ in 0..k {
        weights = axis.iter().flat_map(|a| weights.iter().map(move |w| w * a)).collect();
    }
    let shift = if tail_compensation { truncation_tail_mean(k, nu_max) } else { 0.0 };

    let mut draws: Vec<f64> = (0..count as u64)
        .into_par_iter()
        .map(|d| {
            let mut rng = stream.substream(d).rng();
            let sum: f64 = weights
                .iter()
                .map(|w| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    w * z * z
                })
                .sum();
            sum + shift
        })
        .collect();
    draws.sort_by(f64::total_cmp);
    Ok(AsymptoticNormTable { k, nu_max, seed: stream.seed(), tail_compensated: tail_compensation, draws })
}

/// Empirical `P_H(x)`: the fraction of draws `≤ x`.
pub fn asymptotic_cdf(table: &AsymptoticNormTable, x: f64) -> f64 {
    table.draws.partition_point(|&d| d <= x) as f64 / table.draws.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean_and_se(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, (var / n).sqrt())
    }

    #[test]
    fn eigen_sum_converges_to_one_sixth() {
        // Σ 1/ν² = π²/6; check the partial sums numerically.
        let s = truncated_eigen_sum(1_000_000);
        assert!((s - 1.0 / 6.0).abs() < 2e-7);
        let tail = truncation_tail_mean(1, 200);
        let direct: f64 = (201..2_000_000).map(|nu| 1.0 / (nu as f64 * PI).powi(2)).sum();
        assert!((tail - direct).abs() < 1e-7);
        for k in 1..=4 {
            let n = default_truncation(k);
            let want = 6f64.powi(-(k as i32)) - truncated_eigen_sum(n).powi(k as i32);
            assert!((truncation_tail_mean(k, n) - want).abs() < 1e-12);
        }
    }

    #[test]
    fn bridge_kernel_converges() {
        for &(s, t) in &[(0.25, 0.75), (0.5, 0.5), (0.1, 0.9)] {
            let exact = f64::min(s, t) - s * t;
            assert!((truncated_bridge_kernel(s, t, 20_000) - exact).abs() < 1e-4);
        }
    }

    #[test]
    fn tents_vanish_on_boundary() {
        let cfg = KlConfig::new(10, 5).unwrap();
        let tent = simulate_tent(&RandomStream::new(1, 0), SubsetMask::from_indices([0, 1]), &cfg).unwrap();
        for a in 0..5 {
            for b in 0..5 {
                if a == 0 || a == 4 || b == 0 || b == 4 {
                    assert_eq!(tent.tent_at(&[a, b]), 0.0);
                }
            }
        }
        assert!(simulate_tent(&RandomStream::new(1, 0), SubsetMask::EMPTY, &cfg).is_err());
    }

    #[test]
    fn tent_variance_and_covariance() {
        let cfg = KlConfig::new(200, 5).unwrap();
        let mask = SubsetMask::from_indices([0]);
        let root = RandomStream::new(2, 0);
        let draws: Vec<Vec<f64>> = (0..10_000)
            .map(|r| simulate_tent(&root.substream(r), mask, &cfg).unwrap().tent)
            .collect();
        for i in 1..4 {
            let t = i as f64 / 4.0;
            let sq: Vec<f64> = draws.iter().map(|d| d[i] * d[i]).collect();
            let (var, se) = mean_and_se(&sq);
            let truncated = truncated_bridge_kernel(t, t, 200);
            let bias = (t - t * t - truncated).abs();
            assert!((var - (t - t * t)).abs() < 3.0 * se + bias, "t={t}: {var}");
        }
        let prods: Vec<f64> = draws.iter().map(|d| d[1] * d[3]).collect();
        let (cov, se) = mean_and_se(&prods);
        let bias = (0.0625 - truncated_bridge_kernel(0.25, 0.75, 200)).abs();
        assert!((cov - 0.0625).abs() < 3.0 * se + bias, "cov {cov}");
    }

    #[test]
    fn sheet_vanishes_on_lower_boundary() {
        let cfg = KlConfig::new(8, 5).unwrap();
        let sheet = simulate_sheet(&RandomStream::new(3, 0), 3, &cfg).unwrap();
        assert_eq!(sheet.lower_boundary_max(), 0.0);
        assert!(simulate_sheet(&RandomStream::new(3, 0), 5, &cfg).is_err());
    }

    #[test]
    fn one_parameter_sheet_has_unit_variance_at_one() {
        let cfg = KlConfig::new(50, 3).unwrap();
        let root = RandomStream::new(4, 0);
        let ends: Vec<f64> = (0..10_000)
            .map(|r| simulate_sheet(&root.substream(r), 1, &cfg).unwrap().values()[2].powi(2))
            .collect();
        let (var, se) = mean_and_se(&ends);
        assert!((var - 1.0).abs() < 3.0 * se, "{var}");
    }

    #[test]
    fn two_parameter_sheet_covariance() {
        let cfg = KlConfig::new(64, 5).unwrap();
        let root = RandomStream::new(5, 0);
        // s = (0.5, 0.5), t = (0.25, 0.75) on the 5-point lattice.
        let prods: Vec<f64> = (0..20_000)
            .map(|r| {
                let w = simulate_sheet(&root.substream(r), 2, &cfg).unwrap();
                w.at(&[2, 2]) * w.at(&[1, 3])
            })
            .collect();
        let (cov, se) = mean_and_se(&prods);
        let truncated: f64 = [(0.5, 0.25), (0.5, 0.75)]
            .iter()
            .map(|&(s, t)| s * t + truncated_bridge_kernel(s, t, 64))
            .product();
        let bias = (0.125 - truncated).abs();
        assert!((cov - 0.125).abs() < 3.0 * se + bias, "{cov}");
    }

    #[test]
    fn norm_draws_mean_and_sign() {
        let table = asymptotic_norm_draws(&RandomStream::new(6, 0), 1, 200, 100_000, true).unwrap();
        assert!(table.draws.iter().all(|&d| d >= 0.0));
        assert!(table.draws.windows(2).all(|w| w[0] <= w[1]));
        let (mean, se) = mean_and_se(&table.draws);
        assert!((mean - 1.0 / 6.0).abs() < 3.0 * se, "{mean}");
    }

    fn upper_quantile(draws: &[f64], q: f64) -> f64 {
        draws[((draws.len() as f64 * q).ceil() as usize).min(draws.len()) - 1]
    }

    #[test]
    fn bridge_norm_quantile_is_stable_in_truncation() {
        // For k = 1 the first N normals of each draw are shared between
        // truncation levels, so the two quantiles differ only by the
        // neglected tail.
        let s = RandomStream::new(12, 0);
        let coarse = asymptotic_norm_draws(&s, 1, 200, 20_000, true).unwrap();
        let fine = asymptotic_norm_draws(&s, 1, 10_000, 20_000, true).unwrap();
        let (a, b) = (upper_quantile(&coarse.draws, 0.95), upper_quantile(&fine.draws, 0.95));
        assert!((a - b).abs() < 2e-3, "{a} vs {b}");
        // Known 95% point of the Cramér–von Mises limit law, 0.46136; the
        // quantile's Monte Carlo SE at 2·10⁴ draws is about 0.0045.
        assert!((a - 0.46136).abs() < 0.014, "{a}");
    }

    #[test]
    #[ignore = "10^6 draws at nu_max = 10^4 take several minutes"]
    fn bridge_norm_quantile_full_scale() {
        let s = RandomStream::new(13, 0);
        let coarse = asymptotic_norm_draws(&s, 1, 200, 1_000_000, true).unwrap();
        let fine = asymptotic_norm_draws(&s, 1, 10_000, 1_000_000, true).unwrap();
        let (a, b) = (upper_quantile(&coarse.draws, 0.95), upper_quantile(&fine.draws, 0.95));
        assert!((a - b).abs() < 2e-3, "{a} vs {b}");
    }

    #[test]
    fn norm_draws_are_deterministic() {
        let s = RandomStream::new(7, 3);
        let a = asymptotic_norm_draws(&s, 2, 10, 500, true).unwrap();
        let b = asymptotic_norm_draws(&s, 2, 10, 500, true).unwrap();
        assert_eq!(a, b);
        assert!(asymptotic_norm_draws(&s, 0, 10, 5, true).is_err());
        assert!(asymptotic_norm_draws(&s, 1, 10, 0, true).is_err());
    }

    #[test]
    fn norms_of_distinct_subsets_are_uncorrelated() {
        // Tents for different H come from different substreams; the squared
        // norms must show no cross-correlation.
        let root = RandomStream::new(8, 0);
        let (a, b): (Vec<f64>, Vec<f64>) = (0..10_000u64)
            .map(|r| {
                let x = asymptotic_norm_draws(&root.substream(r).substream(1), 1, 50, 1, false).unwrap().draws[0];
                let y = asymptotic_norm_draws(&root.substream(r).substream(3), 2, 20, 1, false).unwrap().draws[0];
                (x, y)
            })
            .unzip();
        let (ma, _) = mean_and_se(&a);
        let (mb, _) = mean_and_se(&b);
        let prods: Vec<f64> = a.iter().zip(&b).map(|(x, y)| (x - ma) * (y - mb)).collect();
        let (cov, se) = mean_and_se(&prods);
        assert!(cov.abs() < 3.0 * se, "{cov} ± {se}");
    }

    #[test]
    fn empirical_cdf_edges() {
        let table = AsymptoticNormTable {
            k: 1,
            nu_max: 1,
            seed: 0,
            tail_compensated: false,
            draws: vec![0.1, 0.2, 0.3, 0.4, 0.5],
        };
        assert_eq!(asymptotic_cdf(&table, 0.05), 0.0);
        assert_eq!(asymptotic_cdf(&table, 0.6), 1.0);
        assert!((asymptotic_cdf(&table, 0.3) - 0.5).abs() <= 1.0 / 5.0);
    }
}
