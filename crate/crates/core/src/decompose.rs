//! Ramp/tent decomposition of functions on `[0,1]^p` that vanish on the
//! lower boundary `{t : some t_j = 0}`.
//!
//! Every such `g` is uniquely `Σ_{H ⊂ J} R_H`, where the `H`-ramp
//! `R_H(t) = Π_{j∉H} t_j · T_H(t_H)` extends an `H`-tent `T_H`, a function on
//! the face `C_H = {t : t_j = 1 for j ∉ H}` vanishing wherever an `H`
//! coordinate is 0 or 1. The tents are peeled off by increasing cardinality:
//! `T_∅ = g(1)`, and each `T_H` with `#H = h` is the restriction to `C_H` of
//! the residual left after subtracting all ramps of cardinality below `h`.
//!
//! Everything here works on a regular lattice `{0, 1/(m−1), …, 1}^p`.

use rand::Rng;

use crate::error::{invalid_arg, Error, Result};
use crate::stream::RandomStream;
use crate::subset::SubsetMask;

/// Largest lattice dimension accepted by this module (`m^p` values).
pub const MAX_GRID_DIMENSION: usize = 6;

const BOUNDARY_TOLERANCE: f64 = 1e-12;

/// Values of a function on the lattice `{0, 1/(m−1), …, 1}^p`.
///
/// Storage is flat with coordinate 0 varying fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    p: usize,
    m: usize,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(p: usize, m: usize, values: Vec<f64>) -> Result<Self> {
        check_lattice(p, m)?;
        if values.len() != m.pow(p as u32) {
            return Err(invalid_arg!("expected {} grid values, got {}", m.pow(p as u32), values.len()));
        }
        Ok(GridFunction { p, m, values })
    }

    pub fn zeros(p: usize, m: usize) -> Result<Self> {
        check_lattice(p, m)?;
        Ok(GridFunction { p, m, values: vec![0.0; m.pow(p as u32)] })
    }

    /// Samples `f` at every lattice point.
    pub fn from_fn(p: usize, m: usize, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let mut grid = GridFunction::zeros(p, m)?;
        let mut t = vec![0.0; p];
        for k in 0..grid.values.len() {
            grid.point_into(k, &mut t);
            grid.values[k] = f(&t);
        }
        Ok(grid)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Lattice coordinate `i / (m − 1)`.
    pub fn coordinate(&self, i: usize) -> f64 {
        lattice_coordinate(i, self.m)
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().rev().fold(0, |acc, &i| acc * self.m + i)
    }

    pub fn multi_index(&self, mut k: usize) -> Vec<usize> {
        (0..self.p)
            .map(|_| {
                let i = k % self.m;
                k /= self.m;
                i
            })
            .collect()
    }

    fn point_into(&self, mut k: usize, t: &mut [f64]) {
        for tj in t.iter_mut() {
            *tj = self.coordinate(k % self.m);
            k /= self.m;
        }
    }

    pub fn at(&self, idx: &[usize]) -> f64 {
        self.values[self.flat_index(idx)]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// Largest `|g|` over lattice points with some coordinate equal to 0.
    pub fn lower_boundary_max(&self) -> f64 {
        (0..self.values.len())
            .filter(|&k| self.multi_index(k).contains(&0))
            .fold(0.0, |acc, k| acc.max(self.values[k].abs()))
    }

    /// `a·self + b·other` on the same lattice.
    pub fn combine(&self, a: f64, other: &GridFunction, b: f64) -> Result<GridFunction> {
        if (self.p, self.m) != (other.p, other.m) {
            return Err(invalid_arg!("lattices differ"));
        }
        let values = self.values.iter().zip(&other.values).map(|(x, y)| a * x + b * y).collect();
        Ok(GridFunction { p: self.p, m: self.m, values })
    }
}

fn lattice_coordinate(i: usize, m: usize) -> f64 {
    if i + 1 == m {
        1.0
    } else {
        i as f64 / (m - 1) as f64
    }
}

fn check_lattice(p: usize, m: usize) -> Result<()> {
    if p == 0 || p > MAX_GRID_DIMENSION {
        return Err(invalid_arg!("grid dimension {p} outside 1..={MAX_GRID_DIMENSION}"));
    }
    if m < 2 {
        return Err(invalid_arg!("grid needs at least 2 points per axis, got {m}"));
    }
    Ok(())
}

/// An `H`-tent on the face lattice `C_H`, standing for its ramp
/// `R_H(t) = Π_{j∉H} t_j · T_H(t_H)`.
///
/// `tent` has extent `m` along each member of `H` (increasing coordinate
/// order, lowest fastest); the ∅-tent holds the single value `T_∅`.
#[derive(Clone, Debug, PartialEq)]
pub struct RampComponent {
    pub mask: SubsetMask,
    pub m: usize,
    pub tent: Vec<f64>,
}

impl RampComponent {
    /// Tent value at lattice indices given for the members of `H`.
    pub fn tent_at(&self, local: &[usize]) -> f64 {
        self.tent[local.iter().rev().fold(0, |acc, &i| acc * self.m + i)]
    }

    /// Ramp value at a full lattice point of `[0,1]^p`.
    pub fn ramp_at(&self, idx: &[usize]) -> f64 {
        let mut scale = 1.0;
        let mut local = 0;
        let mut stride = 1;
        for (j, &i) in idx.iter().enumerate() {
            if self.mask.contains(j) {
                local += i * stride;
                stride *= self.m;
            } else {
                scale *= lattice_coordinate(i, self.m);
            }
        }
        scale * self.tent[local]
    }

    pub fn max_abs(&self) -> f64 {
        self.tent.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// Largest `|T_H|` over face points with some member coordinate at 0 or 1.
    pub fn boundary_max(&self) -> f64 {
        let k = self.mask.cardinality();
        let mut worst: f64 = 0.0;
        for (local, v) in self.tent.iter().enumerate() {
            let mut rest = local;
            let on_edge = (0..k).any(|_| {
                let i = rest % self.m;
                rest /= self.m;
                i == 0 || i == self.m - 1
            });
            if on_edge {
                worst = worst.max(v.abs());
            }
        }
        worst
    }
}

/// A lattice function with i.i.d. Uniform(−1, 1) values off the lower
/// boundary and zeros on it.
pub fn random_vanishing_grid(stream: &RandomStream, p: usize, m: usize) -> Result<GridFunction> {
    let mut rng = stream.rng();
    let mut g = GridFunction::zeros(p, m)?;
    for k in 0..g.values.len() {
        if !g.multi_index(k).contains(&0) {
            g.values[k] = rng.random_range(-1.0..1.0);
        }
    }
    Ok(g)
}

/// Splits `g` into its `2^p` ramp components, ∅ first and then by
/// cardinality and bit pattern.
pub fn decompose(g: &GridFunction) -> Result<Vec<RampComponent>> {
    let boundary = g.lower_boundary_max();
    if boundary > BOUNDARY_TOLERANCE {
        return Err(Error::InvalidInput(format!(
            "function does not vanish on the lower boundary (max |g| = {boundary:e})"
        )));
    }
    let (p, m) = (g.p, g.m);
    let mut residual = g.clone();
    let mut components = Vec::with_capacity(1 << p);

    for card in 0..=p {
        let masks: Vec<SubsetMask> = (0u32..1 << p)
            .map(SubsetMask::from_bits)
            .filter(|h| h.cardinality() == card)
            .collect();
        let layer: Vec<RampComponent> = masks
            .into_iter()
            .map(|mask| RampComponent { mask, m, tent: restrict_to_face(&residual, mask) })
            .collect();
        for k in 0..residual.values.len() {
            let idx = residual.multi_index(k);
            let ramps: f64 = layer.iter().map(|c| c.ramp_at(&idx)).sum();
            residual.values[k] -= ramps;
        }
        components.extend(layer);
    }
    Ok(components)
}

/// Values of `g` on the face `C_H` (non-members pinned at index `m − 1`).
fn restrict_to_face(g: &GridFunction, mask: SubsetMask) -> Vec<f64> {
    let members: Vec<usize> = mask.indices().collect();
    let size = g.m.pow(members.len() as u32);
    let mut idx = vec![g.m - 1; g.p];
    (0..size)
        .map(|mut local| {
            for &j in &members {
                idx[j] = local % g.m;
                local /= g.m;
            }
            g.at(&idx)
        })
        .collect()
}

/// Pointwise sum of the ramps. The components must cover every `H ⊂ J`
/// exactly once.
pub fn reconstruct(components: &[RampComponent], m: usize) -> Result<GridFunction> {
    let count = components.len();
    if !count.is_power_of_two() || count < 2 {
        return Err(Error::InvalidInput(format!("{count} components cannot cover all subsets")));
    }
    let p = count.trailing_zeros() as usize;
    let mut seen = vec![false; count];
    for c in components {
        let bits = c.mask.bits() as usize;
        if bits >= count || seen[bits] {
            return Err(Error::InvalidInput(format!("subset {} missing or duplicated", c.mask)));
        }
        if c.m != m || c.tent.len() != m.pow(c.mask.cardinality() as u32) {
            return Err(Error::InvalidInput(format!("component {} has the wrong lattice", c.mask)));
        }
        seen[bits] = true;
    }
    let mut g = GridFunction::zeros(p, m)?;
    for k in 0..g.values.len() {
        let idx = g.multi_index(k);
        g.values[k] = components.iter().map(|c| c.ramp_at(&idx)).sum();
    }
    Ok(g)
}

/// `K_p = Π_{j=0}^{p−1} (1 + C(p, j))`, a bound on `sup|T_H| / sup|g|`.
pub fn bound_constant(p: usize) -> f64 {
    let mut binom = 1.0;
    let mut k = 1.0;
    for j in 0..p {
        k *= 1.0 + binom;
        binom = binom * (p - j) as f64 / (j + 1) as f64;
    }
    k
}
