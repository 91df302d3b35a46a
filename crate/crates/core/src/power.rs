//! Monte Carlo power estimation and the benchmark table grids.
//!
//! Every experiment builds one null reference from its seed and reuses it
//! across all trials; trial `t` draws its sample from
//! `RandomStream::new(seed, domain::TRIALS).substream(t)`.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::alternatives::{sample_alternative, AlternativeSpec, Family};
use crate::error::{invalid_arg, Error, Result};
use crate::inference::{evaluate, Mode, NullReference};
use crate::published;
use crate::stream::{domain, RandomStream};
use crate::tent::all_tent_norms;

pub const DEFAULT_TRIALS: usize = 500;
pub const DEFAULT_POWER_REPLICATES: usize = 499;
pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_SEED: u64 = 1;

pub const CSV_HEADER: &str = "table,alternative,param,n,h,mode,power,se,trials,R,seed,paper_ref_value";

/// Sample sizes of the copula table.
pub const COPULA_SIZES: [usize; 3] = [10, 25, 50];
/// Correlations of the partial-test table.
pub const PARTIAL_RHOS: [f64; 6] = [0.05, 0.10, 0.15, 0.20, 0.30, 0.40];
/// Sample size used for the Beta table, whose size is not reported.
pub const BETA_TABLE_N: usize = 50;

#[derive(Clone, Debug, PartialEq)]
pub struct PowerExperiment {
    pub alternative: AlternativeSpec,
    pub n: usize,
    pub trials: usize,
    pub alpha: f64,
    pub modes: Vec<Mode>,
    pub h: usize,
    pub replicates: usize,
    pub seed: u64,
}

impl PowerExperiment {
    /// Desk-scale defaults with the full cutoff `h = p` and the m-test only.
    pub fn new(alternative: AlternativeSpec, n: usize) -> Self {
        PowerExperiment {
            alternative,
            n,
            trials: DEFAULT_TRIALS,
            alpha: DEFAULT_ALPHA,
            modes: vec![Mode::M],
            h: alternative.p(),
            replicates: DEFAULT_POWER_REPLICATES,
            seed: DEFAULT_SEED,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(invalid_arg!("trials must be at least 1"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(invalid_arg!("alpha = {} must lie in (0, 1)", self.alpha));
        }
        if self.modes.is_empty() {
            return Err(invalid_arg!("no test mode selected"));
        }
        if let Some(m) = self.modes.iter().find(|m| m.is_asymptotic()) {
            return Err(invalid_arg!("power estimation supports modes m and s, not {m}"));
        }
        if self.n == 0 || self.replicates == 0 {
            return Err(invalid_arg!("n and R must be at least 1"));
        }
        if self.h == 0 || self.h > self.alternative.p() {
            return Err(invalid_arg!("h = {} outside 1..={}", self.h, self.alternative.p()));
        }
        Ok(())
    }

    pub fn null_reference(&self) -> Result<NullReference> {
        NullReference::build(self.seed, self.n, self.alternative.p(), self.h, self.replicates)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerEstimate {
    pub mode: Mode,
    pub rejections: usize,
    pub trials: usize,
    pub power: f64,
    /// Binomial standard error `√(π̂(1 − π̂)/trials)`.
    pub se: f64,
}

impl PowerEstimate {
    fn from_counts(mode: Mode, rejections: usize, trials: usize) -> Self {
        let power = rejections as f64 / trials as f64;
        PowerEstimate { mode, rejections, trials, power, se: (power * (1.0 - power) / trials as f64).sqrt() }
    }
}

/// Rejection fractions, one per configured mode, in the order of `experiment.modes`.
pub fn estimate_power(experiment: &PowerExperiment) -> Result<Vec<PowerEstimate>> {
    experiment.validate()?;
    estimate_power_with(experiment, &experiment.null_reference()?)
}

/// As [`estimate_power`] with a prebuilt reference; a reference with a larger
/// cutoff is restricted to `experiment.h`.
pub fn estimate_power_with(experiment: &PowerExperiment, reference: &NullReference) -> Result<Vec<PowerEstimate>> {
    experiment.validate()?;
    let p = experiment.alternative.p();
    if reference.n() != experiment.n || reference.p() != p || reference.replicates() != experiment.replicates {
        return Err(invalid_arg!("null reference does not match the experiment configuration"));
    }
    let restricted;
    let reference = if reference.h() == experiment.h {
        reference
    } else {
        restricted = reference.restrict(experiment.h)?;
        &restricted
    };
    let root = RandomStream::new(experiment.seed, domain::TRIALS);
    let outcomes: Vec<Vec<bool>> = (0..experiment.trials as u64)
        .into_par_iter()
        .map(|t| {
            let x = sample_alternative(&root.substream(t), &experiment.alternative, experiment.n)?;
            let norms = all_tent_norms(&x, experiment.h)?;
            experiment
                .modes
                .iter()
                .map(|&mode| Ok(evaluate(&norms, reference, experiment.alpha, mode)?.decision.is_reject()))
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(experiment
        .modes
        .iter()
        .enumerate()
        .map(|(i, &mode)| {
            let rejections = outcomes.iter().filter(|o| o[i]).count();
            PowerEstimate::from_counts(mode, rejections, experiment.trials)
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableId {
    Copulas,
    Beta,
    Partial,
}

impl TableId {
    pub fn as_str(self) -> &'static str {
        match self {
            TableId::Copulas => "copulas",
            TableId::Beta => "beta",
            TableId::Partial => "partial",
        }
    }
}

impl fmt::Display for TableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TableId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "copulas" => Ok(TableId::Copulas),
            "beta" => Ok(TableId::Beta),
            "partial" => Ok(TableId::Partial),
            other => Err(invalid_arg!("unknown table '{other}'; expected copulas, beta or partial")),
        }
    }
}

/// Settings applied to every cell of a table. The filters keep only the
/// matching grid cells.
#[derive(Clone, Debug, PartialEq)]
pub struct TableOverrides {
    /// `0` is a dry run: rows carry only the reference values.
    pub trials: usize,
    pub replicates: usize,
    pub seed: u64,
    pub alpha: f64,
    pub modes: Vec<Mode>,
    pub n: Option<usize>,
    pub h: Option<usize>,
    pub rho: Option<f64>,
}

impl Default for TableOverrides {
    fn default() -> Self {
        TableOverrides {
            trials: DEFAULT_TRIALS,
            replicates: DEFAULT_POWER_REPLICATES,
            seed: DEFAULT_SEED,
            alpha: DEFAULT_ALPHA,
            modes: vec![Mode::M],
            n: None,
            h: None,
            rho: None,
        }
    }
}

/// The published value attached to a row.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PaperRef {
    Value(f64),
    /// The published table does not state its sample size.
    NotComparable,
    Missing,
}

impl fmt::Display for PaperRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PaperRef::Value(v) => write!(f, "{v:.3}"),
            PaperRef::NotComparable => f.write_str("NA-comparability"),
            PaperRef::Missing => f.write_str("NA"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PowerRow {
    pub table: String,
    pub alternative: AlternativeSpec,
    pub n: usize,
    pub h: usize,
    pub mode: Mode,
    /// `None` for a dry run.
    pub estimate: Option<PowerEstimate>,
    pub trials: usize,
    pub replicates: usize,
    pub seed: u64,
    pub paper_ref: PaperRef,
}

impl PowerRow {
    pub fn to_csv(&self) -> String {
        let (power, se) = match &self.estimate {
            Some(e) => (format!("{:.6}", e.power), format!("{:.6}", e.se)),
            None => ("NA".into(), "NA".into()),
        };
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.table,
            self.alternative.family().name(),
            self.alternative.params(),
            self.n,
            self.h,
            self.mode,
            power,
            se,
            self.trials,
            self.replicates,
            self.seed,
            self.paper_ref
        )
    }
}

pub fn to_csv(rows: &[PowerRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out += &r.to_csv();
        out.push('\n');
    }
    out
}

/// Published value for a cell, looked up across all three tables.
pub fn paper_reference(alternative: &AlternativeSpec, n: usize, h: usize, mode: Mode) -> PaperRef {
    let pick = |m: f64, s: f64| match mode {
        Mode::M => PaperRef::Value(m),
        Mode::S => PaperRef::Value(s),
        _ => PaperRef::Missing,
    };
    match alternative.family() {
        Family::BetaIid { alpha, beta } if alternative.p() == 2 => match published::beta_row(alpha, beta) {
            Some(_) => PaperRef::NotComparable,
            None => PaperRef::Missing,
        },
        Family::NormalCopula { rho } if alternative.p() == 6 && n == 50 => {
            published::partial_row(rho, h).map_or(PaperRef::Missing, |r| pick(r.m_test, r.s_test))
        }
        Family::Amh { theta } | Family::Fgm { theta } | Family::Clayton { theta } | Family::Plackett { theta }
            if h == 2 =>
        {
            published::copula_row(alternative.family().name(), theta, n)
                .map_or(PaperRef::Missing, |r| pick(r.m_test, r.s_test))
        }
        _ => PaperRef::Missing,
    }
}

struct Cell {
    alternative: AlternativeSpec,
    n: usize,
    h: usize,
}

fn table_cells(table: TableId, o: &TableOverrides) -> Result<Vec<Cell>> {
    let mut cells = Vec::new();
    match table {
        TableId::Copulas => {
            let families = [
                Family::Amh { theta: 0.9 },
                Family::Fgm { theta: 1.0 },
                Family::Clayton { theta: 2.0 },
                Family::Plackett { theta: 5.0 },
            ];
            for family in families {
                for n in COPULA_SIZES {
                    cells.push(Cell { alternative: AlternativeSpec::new(family, 2)?, n, h: 2 });
                }
            }
        }
        TableId::Beta => {
            for r in &published::BETA_TABLE {
                let family = Family::BetaIid { alpha: r.alpha, beta: r.beta };
                cells.push(Cell { alternative: AlternativeSpec::new(family, 2)?, n: BETA_TABLE_N, h: 2 });
            }
        }
        TableId::Partial => {
            for rho in PARTIAL_RHOS {
                for h in 1..=6 {
                    cells.push(Cell { alternative: AlternativeSpec::new(Family::NormalCopula { rho }, 6)?, n: 50, h });
                }
            }
        }
    }
    if let Some(n) = o.n {
        cells.retain(|c| c.n == n);
    }
    if let Some(h) = o.h {
        cells.retain(|c| c.h == h);
    }
    if let Some(rho) = o.rho {
        cells.retain(|c| matches!(c.alternative.family(), Family::NormalCopula { rho: r } if (r - rho).abs() < 1e-9));
    }
    if cells.is_empty() {
        return Err(invalid_arg!("the filters select no cell of table {table}"));
    }
    Ok(cells)
}

/// Runs every selected cell of a benchmark table, one row per cell and mode.
/// Null references are shared between cells with equal `(n, p)`.
pub fn run_table(table: TableId, overrides: &TableOverrides) -> Result<Vec<PowerRow>> {
    let cells = table_cells(table, overrides)?;
    let mut rows = Vec::new();
    let mut cached: Option<NullReference> = None;
    for cell in cells {
        let experiment = PowerExperiment {
            alternative: cell.alternative,
            n: cell.n,
            trials: overrides.trials.max(1),
            alpha: overrides.alpha,
            modes: overrides.modes.clone(),
            h: cell.h,
            replicates: overrides.replicates,
            seed: overrides.seed,
        };
        experiment.validate()?;
        let estimates = if overrides.trials == 0 {
            None
        } else {
            let p = cell.alternative.p();
            if !cached.as_ref().is_some_and(|r| r.n() == cell.n && r.p() == p) {
                cached = Some(NullReference::build(overrides.seed, cell.n, p, p, overrides.replicates)?);
            }
            Some(estimate_power_with(&experiment, cached.as_ref().unwrap())?)
        };
        for (i, &mode) in overrides.modes.iter().enumerate() {
            rows.push(PowerRow {
                table: table.to_string(),
                alternative: cell.alternative,
                n: cell.n,
                h: cell.h,
                mode,
                estimate: estimates.as_ref().map(|e| e[i]),
                trials: overrides.trials,
                replicates: overrides.replicates,
                seed: overrides.seed,
                paper_ref: paper_reference(&cell.alternative, cell.n, cell.h, mode),
            });
        }
    }
    Ok(rows)
}

/// Runs a single experiment and formats it like a table row (table `custom`).
pub fn run_single(experiment: &PowerExperiment) -> Result<Vec<PowerRow>> {
    let estimates = estimate_power(experiment)?;
    Ok(estimates
        .into_iter()
        .map(|e| PowerRow {
            table: "custom".into(),
            alternative: experiment.alternative,
            n: experiment.n,
            h: experiment.h,
            mode: e.mode,
            estimate: Some(e),
            trials: experiment.trials,
            replicates: experiment.replicates,
            seed: experiment.seed,
            paper_ref: paper_reference(&experiment.alternative, experiment.n, experiment.h, e.mode),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn experiment(alt: &str, n: usize, trials: usize) -> PowerExperiment {
        PowerExperiment {
            trials,
            modes: vec![Mode::M, Mode::S],
            replicates: 199,
            seed: 3,
            ..PowerExperiment::new(alt.parse().unwrap(), n)
        }
    }

    #[test]
    fn power_at_the_null_is_the_level() {
        // Conditional on one shared reference the rejection rate also varies
        // with that reference, by about √(α/(R+1)) across the family.
        let mut e = experiment("uniform:p=2", 20, 1000);
        e.replicates = 999;
        for est in estimate_power(&e).unwrap() {
            let trial_var: f64 = 0.05 * 0.95 / 1000.0;
            let reference_var = 0.05 / 1000.0;
            let tol = 3.0 * (trial_var + reference_var).sqrt();
            assert!((est.power - 0.05).abs() < tol, "{est:?}");
        }
    }

    #[test]
    fn standard_error_formula() {
        let e = PowerEstimate::from_counts(Mode::M, 30, 100);
        assert_eq!(e.power, 0.3);
        assert!((e.se - (0.3f64 * 0.7 / 100.0).sqrt()).abs() < 1e-16);
        assert_eq!(PowerEstimate::from_counts(Mode::S, 0, 10).se, 0.0);
    }

    #[test]
    fn power_grows_with_dependence() {
        let strong = estimate_power(&experiment("clayton:theta=2", 25, 300)).unwrap();
        let weak = estimate_power(&experiment("clayton:theta=0.5", 25, 300)).unwrap();
        for (s, w) in strong.iter().zip(&weak) {
            assert!(s.power + 2.0 * s.se >= w.power, "{s:?} vs {w:?}");
        }
    }

    #[test]
    fn reproducible_and_reference_sharing_is_exact() {
        let e = experiment("amh:theta=0.9", 15, 60);
        let a = estimate_power(&e).unwrap();
        assert_eq!(a, estimate_power(&e).unwrap());
        let shared = NullReference::build(e.seed, 15, 2, 2, 199).unwrap();
        assert_eq!(a, estimate_power_with(&e, &shared).unwrap());
    }

    #[test]
    fn validation() {
        let mut e = experiment("clayton:theta=2", 10, 5);
        e.trials = 0;
        assert!(estimate_power(&e).is_err());
        let mut e = experiment("clayton:theta=2", 10, 5);
        e.h = 3;
        assert!(estimate_power(&e).is_err());
        let mut e = experiment("clayton:theta=2", 10, 5);
        e.modes = vec![Mode::MAs];
        assert!(estimate_power(&e).is_err());
        assert!("tables".parse::<TableId>().is_err());
    }

    #[test]
    fn dry_run_emits_reference_values() {
        let o = TableOverrides { trials: 0, ..TableOverrides::default() };
        let rows = run_table(TableId::Copulas, &o).unwrap();
        assert_eq!(rows.len(), 12);
        let csv = to_csv(&rows);
        assert!(csv.starts_with(CSV_HEADER));
        assert!(csv.contains("copulas,clayton,theta=2,50,2,m,NA,NA,0,499,1,0.998"));
        let both = TableOverrides { modes: vec![Mode::M, Mode::S], ..o.clone() };
        let partial = run_table(TableId::Partial, &TableOverrides { rho: Some(0.3), ..both }).unwrap();
        assert_eq!(partial.len(), 12);
        assert_eq!(partial[3].paper_ref, PaperRef::Value(0.965));
        let beta = run_table(TableId::Beta, &o).unwrap();
        assert_eq!(beta.len(), 10);
        assert!(beta.iter().all(|r| r.paper_ref == PaperRef::NotComparable));
        assert!(to_csv(&beta).contains(",NA-comparability\n"));
        assert!(run_table(TableId::Copulas, &TableOverrides { n: Some(11), ..o }).is_err());
    }

    #[test]
    fn small_table_run() {
        let o = TableOverrides { trials: 20, replicates: 49, n: Some(10), ..TableOverrides::default() };
        let rows = run_table(TableId::Copulas, &o).unwrap();
        assert_eq!(rows.len(), 4);
        for r in &rows {
            let e = r.estimate.unwrap();
            assert_eq!(e.trials, 20);
            let single = PowerExperiment {
                trials: 20,
                replicates: 49,
                seed: 1,
                h: 2,
                ..PowerExperiment::new(r.alternative, 10)
            };
            assert_eq!(run_single(&single).unwrap()[0].estimate.unwrap(), e);
        }
    }
}
