//! Empirical H-tents and their squared L² norms.
//!
//! For a sample `U_1, …, U_n` the `H`-tent of the empirical process is
//! `T_{n,H}(t) = n^{-1/2} Σ_i Π_{j∈H} (1{U_ij ≤ t_j} − t_j)` and its squared
//! norm has the closed form
//!
//! ```text
//! ‖T_{n,H}‖² = (1/n) Σ_{a,b} Π_{j∈H} pair_factor(U_aj, U_bj)
//! ```
//!
//! with `pair_factor(u, v) = (u² + v²)/2 − max(u, v) + 1/3`.

use crate::error::{invalid_arg, Result};
use crate::sample::Sample;
use crate::subset::{enumerate_subsets, SubsetMask};

/// `∫₀¹ (1{u ≤ t} − t)(1{v ≤ t} − t) dt`.
#[inline]
pub fn pair_factor(u: f64, v: f64) -> f64 {
    0.5 * (u * u + v * v) - u.max(v) + 1.0 / 3.0
}

/// `‖T_{n,H}‖²` for a single subset.
///
/// Sums each unordered pair once and doubles the off-diagonal terms. The
/// product over `H` runs from the highest coordinate down, which matches the
/// subset recurrence in [`all_tent_norms`] bit for bit.
pub fn tent_norm(sample: &Sample, subset: SubsetMask) -> Result<f64> {
    if subset.is_empty() {
        return Err(invalid_arg!("tent norm needs a nonempty subset"));
    }
    if subset.bits() >> sample.p() != 0 {
        return Err(invalid_arg!("subset {subset} exceeds dimension {}", sample.p()));
    }
    let members: Vec<usize> = subset.indices().collect();
    let rows = canonical_rows(sample);
    let mut acc = 0.0;
    for (a, ra) in rows.iter().enumerate() {
        for (b, rb) in rows[..=a].iter().enumerate() {
            let prod = members
                .iter()
                .rev()
                .fold(1.0, |prod, &j| prod * pair_factor(ra[j], rb[j]));
            acc += if a == b { prod } else { 2.0 * prod };
        }
    }
    Ok(acc / sample.n() as f64)
}

/// Rows in lexicographic order. Summing pairs in this order makes the norms
/// exactly invariant under row permutations.
fn canonical_rows(sample: &Sample) -> Vec<&[f64]> {
    let mut rows: Vec<&[f64]> = sample.rows().collect();
    rows.sort_by(|x, y| {
        x.iter()
            .zip(y.iter())
            .map(|(a, b)| a.total_cmp(b))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    rows
}

/// Squared tent norms for every subset of a family `{H : 0 < #H ≤ h}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TentNorms {
    n: usize,
    p: usize,
    h: usize,
    masks: Vec<SubsetMask>,
    values: Vec<f64>,
}

impl TentNorms {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn h(&self) -> usize {
        self.h
    }

    pub fn masks(&self) -> &[SubsetMask] {
        &self.masks
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[cfg(test)]
    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (SubsetMask, f64)> + '_ {
        self.masks.iter().copied().zip(self.values.iter().copied())
    }

    pub fn get(&self, subset: SubsetMask) -> Option<f64> {
        self.position(subset).map(|k| self.values[k])
    }

    fn position(&self, subset: SubsetMask) -> Option<usize> {
        self.masks
            .binary_search_by_key(&(subset.cardinality(), subset.bits()), |m| (m.cardinality(), m.bits()))
            .ok()
    }

    /// The sub-family `#H ≤ h`. Values are reused unchanged, so the result
    /// equals a direct computation at cardinality `h`.
    pub fn restrict(&self, h: usize) -> Result<TentNorms> {
        if h < 1 || h > self.h {
            return Err(invalid_arg!("cannot restrict norms computed up to {} to {h}", self.h));
        }
        let keep = self.masks.partition_point(|m| m.cardinality() <= h);
        Ok(TentNorms {
            n: self.n,
            p: self.p,
            h,
            masks: self.masks[..keep].to_vec(),
            values: self.values[..keep].to_vec(),
        })
    }
}

/// `‖T_{n,H}‖²` for every `H` in `enumerate_subsets(p, h)`.
///
/// For each pair of observations the `p` coordinate factors are computed
/// once and the subset products are assembled in increasing bit order with
/// `prod(H) = prod(H \ {min H}) · factor(min H)`.
pub fn all_tent_norms(sample: &Sample, h: usize) -> Result<TentNorms> {
    let p = sample.p();
    let masks = enumerate_subsets(p, h)?;
    let mut by_bits: Vec<u32> = masks.iter().map(|m| m.bits()).collect();
    by_bits.sort_unstable();

    let mut factors = vec![0.0; p];
    let mut prod = vec![0.0; 1 << p];
    prod[0] = 1.0;
    let mut acc = vec![0.0; 1 << p];

    let rows = canonical_rows(sample);
    for (a, ra) in rows.iter().enumerate() {
        for (b, rb) in rows[..=a].iter().enumerate() {
            for (f, (&u, &v)) in factors.iter_mut().zip(ra.iter().zip(rb.iter())) {
                *f = pair_factor(u, v);
            }
            let diagonal = a == b;
            for &bits in &by_bits {
                let rest = (bits & (bits - 1)) as usize;
                let value = prod[rest] * factors[bits.trailing_zeros() as usize];
                prod[bits as usize] = value;
                acc[bits as usize] += if diagonal { value } else { 2.0 * value };
            }
        }
    }

    let n = sample.n() as f64;
    let values = masks.iter().map(|m| acc[m.bits() as usize] / n).collect();
    Ok(TentNorms { n: sample.n(), p, h, masks, values })
}

/// `T_{n,H}(t)`; `t` is a point of `[0,1]^p` and only its `H` coordinates
/// are read.
pub fn tent_eval(sample: &Sample, subset: SubsetMask, t: &[f64]) -> f64 {
    debug_assert_eq!(t.len(), sample.p());
    let sum: f64 = sample
        .rows()
        .map(|row| {
            subset
                .indices()
                .map(|j| f64::from(u8::from(row[j] <= t[j])) - t[j])
                .product::<f64>()
        })
        .sum();
    sum / (sample.n() as f64).sqrt()
}
