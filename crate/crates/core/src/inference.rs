//! Decision rules: the finite-sample m-test and s-test calibrated by a Monte
//! Carlo null reference, their partial variants (cardinality cutoff `h < p`),
//! and the asymptotic m-as/s-as variants calibrated by Brownian tent norms.
//!
//! With `K` subsets in the family and per-subset p-values `p̂_H`:
//!
//! - m-test rejects iff `min_H p̂_H < 1 − (1 − α)^{1/K}`;
//! - s-test rejects iff `Σ_H Q₁(1 − p̂_H) > Q_K(1 − α)`, `Q_f` the χ²_f quantile.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::brownian::AsymptoticNormTable;
use crate::error::{invalid_arg, Error, Result};
use crate::sample::{uniform_sample, Sample, MAX_DIMENSION};
use crate::special::ChiSquare;
use crate::stream::{domain, RandomStream};
use crate::subset::{enumerate_subsets, SubsetMask};
use crate::tent::{all_tent_norms, TentNorms};

pub const DEFAULT_REPLICATES: usize = 999;

const CACHE_MAGIC: &str = "unicube-null v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    M,
    S,
    MAs,
    SAs,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::M => "m",
            Mode::S => "s",
            Mode::MAs => "m-as",
            Mode::SAs => "s-as",
        }
    }

    pub fn is_asymptotic(self) -> bool {
        matches!(self, Mode::MAs | Mode::SAs)
    }

    fn uses_min(self) -> bool {
        matches!(self, Mode::M | Mode::MAs)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "m" => Ok(Mode::M),
            "s" => Ok(Mode::S),
            "m-as" => Ok(Mode::MAs),
            "s-as" => Ok(Mode::SAs),
            other => Err(invalid_arg!("unknown mode '{other}'; expected m, s, m-as or s-as")),
        }
    }
}

impl Serialize for Mode {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Decision {
    Reject,
    NotReject,
}

impl Decision {
    pub fn is_reject(self) -> bool {
        self == Decision::Reject
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Decision::Reject => "reject",
            Decision::NotReject => "not-reject",
        })
    }
}

/// Monte Carlo null distribution of every `‖T_H‖²`, `H ∈ enumerate_subsets(p, h)`.
#[derive(Clone, Debug, PartialEq)]
pub struct NullReference {
    n: usize,
    p: usize,
    h: usize,
    replicates: usize,
    seed: u64,
    masks: Vec<SubsetMask>,
    /// One ascending vector of length `replicates` per mask.
    draws: Vec<Vec<f64>>,
}

/// `replicates` independent uniform samples of size `n` in `[0,1]^p`;
/// replicate `r` is drawn from `stream.substream(r)`.
pub fn build_null_reference(
    stream: &RandomStream,
    n: usize,
    p: usize,
    h: usize,
    replicates: usize,
) -> Result<NullReference> {
    if n == 0 {
        return Err(invalid_arg!("sample size must be at least 1"));
    }
    if replicates == 0 {
        return Err(invalid_arg!("number of replicates R must be at least 1"));
    }
    let masks = enumerate_subsets(p, h)?;
    let per_replicate: Vec<Vec<f64>> = (0..replicates as u64)
        .into_par_iter()
        .map(|r| {
            let x = uniform_sample(&stream.substream(r), n, p)?;
            Ok(all_tent_norms(&x, h)?.values().to_vec())
        })
        .collect::<Result<_>>()?;
    let mut draws: Vec<Vec<f64>> =
        (0..masks.len()).map(|i| per_replicate.iter().map(|v| v[i]).collect()).collect();
    for d in &mut draws {
        d.sort_by(f64::total_cmp);
    }
    Ok(NullReference { n, p, h, replicates, seed: stream.seed(), masks, draws })
}

impl NullReference {
    /// The canonical reference for `seed`, rooted at `(seed, domain::NULL_REFERENCE)`.
    pub fn build(seed: u64, n: usize, p: usize, h: usize, replicates: usize) -> Result<Self> {
        build_null_reference(&RandomStream::new(seed, domain::NULL_REFERENCE), n, p, h, replicates)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn h(&self) -> usize {
        self.h
    }

    pub fn replicates(&self) -> usize {
        self.replicates
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn masks(&self) -> &[SubsetMask] {
        &self.masks
    }

    pub fn draws(&self, subset: SubsetMask) -> Option<&[f64]> {
        self.index_of(subset).map(|i| self.draws[i].as_slice())
    }

    fn index_of(&self, subset: SubsetMask) -> Option<usize> {
        self.masks
            .binary_search_by_key(&(subset.cardinality(), subset.bits()), |m| (m.cardinality(), m.bits()))
            .ok()
    }

    /// The sub-reference for a smaller cutoff. Replicate samples do not
    /// depend on `h`, so this equals a direct build at `h`.
    pub fn restrict(&self, h: usize) -> Result<NullReference> {
        if h == 0 || h > self.h {
            return Err(invalid_arg!("cannot restrict a reference with h = {} to h = {h}", self.h));
        }
        let keep = self.masks.iter().take_while(|m| m.cardinality() <= h).count();
        Ok(NullReference {
            h,
            masks: self.masks[..keep].to_vec(),
            draws: self.draws[..keep].to_vec(),
            ..*self
        })
    }

    /// `(#{r : ‖T_H^r‖² > observed} + 1) / (R + 1)`.
    pub fn phat(&self, subset: SubsetMask, observed: f64) -> Result<f64> {
        let draws = self
            .draws(subset)
            .ok_or_else(|| invalid_arg!("subset {subset} is not in the null reference"))?;
        let exceed = draws.len() - draws.partition_point(|&d| d <= observed);
        Ok((exceed + 1) as f64 / (self.replicates + 1) as f64)
    }

    pub fn cache_file_name(&self) -> String {
        cache_file_name(self.n, self.p, self.h, self.replicates, self.seed)
    }

    pub fn to_cache_string(&self) -> String {
        let header = format!(
            "n={} p={} h={} R={} seed={}",
            self.n, self.p, self.h, self.replicates, self.seed
        );
        write_cache(&header, self.masks.iter().copied().zip(&self.draws))
    }

    pub fn from_cache_str(text: &str) -> Result<Self> {
        let parsed = parse_cache(text)?;
        let field = |key: &str| parsed.field(key);
        let n = field("n")?.parse().map_err(|_| format_err("bad n"))?;
        let p: usize = field("p")?.parse().map_err(|_| format_err("bad p"))?;
        let h: usize = field("h")?.parse().map_err(|_| format_err("bad h"))?;
        let replicates: usize = field("R")?.parse().map_err(|_| format_err("bad R"))?;
        let seed = field("seed")?.parse().map_err(|_| format_err("bad seed"))?;
        if n == 0 || replicates == 0 {
            return Err(format_err("n and R must be positive"));
        }
        let masks = enumerate_subsets(p, h).map_err(|e| format_err(&e.to_string()))?;
        if parsed.masks != masks {
            return Err(format_err("subset lines do not match enumerate_subsets(p, h)"));
        }
        check_draws(&parsed.draws, replicates)?;
        Ok(NullReference { n, p, h, replicates, seed, masks, draws: parsed.draws })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_cache_string())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        NullReference::from_cache_str(&fs::read_to_string(path)?)
    }

    fn check_matches(&self, sample: &Sample) -> Result<()> {
        if sample.n() != self.n || sample.p() != self.p {
            return Err(invalid_arg!(
                "null reference was built for n = {}, p = {} but the sample has n = {}, p = {}",
                self.n,
                self.p,
                sample.n(),
                sample.p()
            ));
        }
        Ok(())
    }
}

/// `null_n<N>_p<P>_h<H>_R<R>_s<SEED>.txt`
pub fn cache_file_name(n: usize, p: usize, h: usize, replicates: usize, seed: u64) -> String {
    format!("null_n{n}_p{p}_h{h}_R{replicates}_s{seed}.txt")
}

fn format_err(msg: &str) -> Error {
    Error::Format(msg.to_string())
}

fn write_cache<'a>(header: &str, lines: impl Iterator<Item = (SubsetMask, &'a Vec<f64>)>) -> String {
    use fmt::Write;
    let mut out = format!("{CACHE_MAGIC}\n{header}\n");
    for (mask, values) in lines {
        write!(out, "H={mask:x} :").unwrap();
        for v in values {
            // 17 significant digits round-trip every f64 exactly.
            write!(out, " {v:.16e}").unwrap();
        }
        out.push('\n');
    }
    out
}

struct ParsedCache {
    fields: Vec<(String, String)>,
    masks: Vec<SubsetMask>,
    draws: Vec<Vec<f64>>,
}

impl ParsedCache {
    fn field(&self, key: &str) -> Result<&str> {
        self.fields
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
            .ok_or_else(|| format_err(&format!("missing '{key}=' in header")))
    }
}

fn parse_cache(text: &str) -> Result<ParsedCache> {
    let mut lines = text.lines();
    if lines.next().map(str::trim_end) != Some(CACHE_MAGIC) {
        return Err(format_err(&format!("first line must be '{CACHE_MAGIC}'")));
    }
    let header = lines.next().ok_or_else(|| format_err("missing header line"))?;
    let fields = header
        .split_whitespace()
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .ok_or_else(|| format_err(&format!("bad header entry '{kv}'")))
        })
        .collect::<Result<_>>()?;
    let mut masks = Vec::new();
    let mut draws = Vec::new();
    for (i, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let (key, values) = line
            .split_once(':')
            .ok_or_else(|| format_err(&format!("line {}: expected 'H=<hex> : values'", i + 3)))?;
        let hex = key.trim().strip_prefix("H=").ok_or_else(|| format_err(&format!("line {}: expected 'H='", i + 3)))?;
        let bits = u32::from_str_radix(hex, 16).map_err(|_| format_err(&format!("line {}: bad mask '{hex}'", i + 3)))?;
        masks.push(SubsetMask::from_bits(bits));
        draws.push(
            values
                .split_whitespace()
                .map(|v| v.parse::<f64>().map_err(|_| format_err(&format!("line {}: bad number '{v}'", i + 3))))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    Ok(ParsedCache { fields, masks, draws })
}

fn check_draws(draws: &[Vec<f64>], len: usize) -> Result<()> {
    for d in draws {
        if d.len() != len {
            return Err(format_err(&format!("expected {len} values per subset, found {}", d.len())));
        }
        if d.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(format_err("values must be finite and nonnegative"));
        }
        if d.windows(2).any(|w| w[0] > w[1]) {
            return Err(format_err("values must be sorted ascending"));
        }
    }
    Ok(())
}

impl AsymptoticNormTable {
    /// Cache text in the null-reference format: `n=0`, `p = h = k`, one
    /// subset line for the full set, plus `nu_max=` and `tail=` header keys.
    pub fn to_cache_string(&self) -> String {
        let header = format!(
            "n=0 p={k} h={k} R={} seed={} nu_max={} tail={}",
            self.draws.len(),
            self.seed,
            self.nu_max,
            u8::from(self.tail_compensated),
            k = self.k
        );
        write_cache(&header, std::iter::once((SubsetMask::full(self.k), &self.draws)))
    }

    pub fn from_cache_str(text: &str) -> Result<Self> {
        let parsed = parse_cache(text)?;
        let field = |key: &str| parsed.field(key);
        if field("n")? != "0" {
            return Err(format_err("asymptotic tables have n=0"));
        }
        let k: usize = field("p")?.parse().map_err(|_| format_err("bad p"))?;
        let count: usize = field("R")?.parse().map_err(|_| format_err("bad R"))?;
        let seed = field("seed")?.parse().map_err(|_| format_err("bad seed"))?;
        let nu_max = field("nu_max")?.parse().map_err(|_| format_err("bad nu_max"))?;
        let tail_compensated = match field("tail")? {
            "1" => true,
            "0" => false,
            _ => return Err(format_err("tail must be 0 or 1")),
        };
        if k == 0 || k > MAX_DIMENSION || field("h")? != field("p")? {
            return Err(format_err("asymptotic tables need 1 ≤ p = h ≤ 20"));
        }
        if parsed.masks != [SubsetMask::full(k)] {
            return Err(format_err("expected a single line for the full subset"));
        }
        check_draws(&parsed.draws, count)?;
        let draws = parsed.draws.into_iter().next().unwrap();
        Ok(AsymptoticNormTable { k, nu_max, seed, tail_compensated, draws })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubsetResult {
    pub subset: SubsetMask,
    pub statistic: f64,
    pub p_value: f64,
}

/// Outcome of one test. For the asymptotic modes `replicates` and `seed`
/// echo the norm tables and `h = p`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TestReport {
    pub mode: Mode,
    pub n: usize,
    pub p: usize,
    pub h: usize,
    #[serde(rename = "R")]
    pub replicates: usize,
    pub seed: u64,
    pub alpha: f64,
    pub subsets: Vec<SubsetResult>,
    /// `min p` for m-type rules, `S` for s-type rules. An asymptotic p-value
    /// of 0 makes `S` infinite, which serializes as `null`.
    pub aggregate: f64,
    pub threshold: f64,
    pub decision: Decision,
}

impl TestReport {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serialization cannot fail")
    }
}

impl fmt::Display for TestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{}-test  n={} p={} h={} R={} seed={} alpha={}",
            self.mode, self.n, self.p, self.h, self.replicates, self.seed, self.alpha
        )?;
        writeln!(f, "{:<24} {:>24} {:>12}", "H", "statistic", "p-value")?;
        for r in &self.subsets {
            writeln!(f, "{:<24} {:>24.16e} {:>12.6}", r.subset.to_string(), r.statistic, r.p_value)?;
        }
        let name = if self.mode.uses_min() { "min p" } else { "S" };
        let op = if self.mode.uses_min() { "<" } else { ">" };
        write!(
            f,
            "{name} = {:.6}  threshold = {:.6}  ({name} {op} threshold rejects)  decision: {}",
            self.aggregate, self.threshold, self.decision
        )
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(invalid_arg!("alpha = {alpha} must lie in (0, 1)"))
    }
}

/// Šidák-style min-p threshold `1 − (1 − α)^{1/K}`.
pub fn min_p_threshold(alpha: f64, family_size: usize) -> Result<f64> {
    check_alpha(alpha)?;
    if family_size == 0 {
        return Err(invalid_arg!("empty subset family"));
    }
    Ok(-((-alpha).ln_1p() / family_size as f64).exp_m1())
}

/// `Q_K(1 − α)`.
pub fn sum_threshold(alpha: f64, family_size: usize) -> Result<f64> {
    check_alpha(alpha)?;
    let dof = u32::try_from(family_size).map_err(|_| invalid_arg!("family too large"))?;
    ChiSquare::new(dof)?.inverse_sf(alpha)
}

/// `Q₁(1 − p)`; zero at `p = 1` and infinite at `p = 0`.
pub fn chi1_transform(p: f64) -> f64 {
    if p >= 1.0 {
        0.0
    } else if p <= 0.0 {
        f64::INFINITY
    } else {
        ChiSquare::new(1).and_then(|c| c.inverse_sf(p)).expect("p lies in (0, 1)")
    }
}

fn decide(mode: Mode, p_values: &[f64], alpha: f64) -> Result<(f64, f64, Decision)> {
    let k = p_values.len();
    let (aggregate, threshold, reject) = if mode.uses_min() {
        let min = p_values.iter().copied().fold(f64::INFINITY, f64::min);
        let c = min_p_threshold(alpha, k)?;
        (min, c, min < c)
    } else {
        let s: f64 = p_values.iter().map(|&p| chi1_transform(p)).sum();
        let q = sum_threshold(alpha, k)?;
        (s, q, s > q)
    };
    let decision = if reject { Decision::Reject } else { Decision::NotReject };
    Ok((aggregate, threshold, decision))
}

/// Applies a finite-sample rule to already computed statistics. `norms` must
/// cover at least the reference's subset family.
pub fn evaluate(norms: &TentNorms, reference: &NullReference, alpha: f64, mode: Mode) -> Result<TestReport> {
    if mode.is_asymptotic() {
        return Err(invalid_arg!("mode {mode} needs asymptotic tables, not a null reference"));
    }
    if norms.n() != reference.n || norms.p() != reference.p {
        return Err(invalid_arg!(
            "null reference was built for n = {}, p = {} but the statistics are for n = {}, p = {}",
            reference.n,
            reference.p,
            norms.n(),
            norms.p()
        ));
    }
    let subsets = reference
        .masks
        .iter()
        .zip(&reference.draws)
        .map(|(&subset, _)| {
            let statistic = norms
                .get(subset)
                .ok_or_else(|| invalid_arg!("statistics do not include subset {subset}"))?;
            Ok(SubsetResult { subset, statistic, p_value: reference.phat(subset, statistic)? })
        })
        .collect::<Result<Vec<_>>>()?;
    let p_values: Vec<f64> = subsets.iter().map(|r| r.p_value).collect();
    let (aggregate, threshold, decision) = decide(mode, &p_values, alpha)?;
    Ok(TestReport {
        mode,
        n: reference.n,
        p: reference.p,
        h: reference.h,
        replicates: reference.replicates,
        seed: reference.seed,
        alpha,
        subsets,
        aggregate,
        threshold,
        decision,
    })
}

fn finite_test(sample: &Sample, reference: &NullReference, alpha: f64, mode: Mode) -> Result<TestReport> {
    check_alpha(alpha)?;
    reference.check_matches(sample)?;
    evaluate(&all_tent_norms(sample, reference.h)?, reference, alpha, mode)
}

pub fn m_test(sample: &Sample, reference: &NullReference, alpha: f64) -> Result<TestReport> {
    finite_test(sample, reference, alpha, Mode::M)
}

pub fn s_test(sample: &Sample, reference: &NullReference, alpha: f64) -> Result<TestReport> {
    finite_test(sample, reference, alpha, Mode::S)
}

/// m-as or s-as over the full family of `2^p − 1` subsets, with
/// `p_H = 1 − P_H(‖T_H‖²)` read from the table of cardinality `#H`.
pub fn asymptotic_test(
    sample: &Sample,
    tables: &[AsymptoticNormTable],
    alpha: f64,
    mode: Mode,
) -> Result<TestReport> {
    if !mode.is_asymptotic() {
        return Err(invalid_arg!("mode {mode} is not an asymptotic mode"));
    }
    check_alpha(alpha)?;
    let p = sample.p();
    let by_k = (1..=p)
        .map(|k| {
            tables
                .iter()
                .find(|t| t.k == k && !t.draws.is_empty())
                .ok_or_else(|| invalid_arg!("no asymptotic table for cardinality {k}"))
        })
        .collect::<Result<Vec<_>>>()?;
    let norms = all_tent_norms(sample, p)?;
    let subsets: Vec<SubsetResult> = norms
        .iter()
        .map(|(subset, statistic)| {
            let draws = &by_k[subset.cardinality() - 1].draws;
            let exceed = draws.len() - draws.partition_point(|&d| d <= statistic);
            SubsetResult { subset, statistic, p_value: exceed as f64 / draws.len() as f64 }
        })
        .collect();
    let p_values: Vec<f64> = subsets.iter().map(|r| r.p_value).collect();
    let (aggregate, threshold, decision) = decide(mode, &p_values, alpha)?;
    Ok(TestReport {
        mode,
        n: sample.n(),
        p,
        h: p,
        replicates: by_k.iter().map(|t| t.draws.len()).min().unwrap_or(0),
        seed: by_k[0].seed,
        alpha,
        subsets,
        aggregate,
        threshold,
        decision,
    })
}
