//! `unicube diagnose`: decomposition round trip, Brownian-sheet covariance
//! and asymptotic norm means, each reported with its measured error.

use clap::Args;
use rand::Rng;
use rayon::prelude::*;
use unicube::brownian::{
    asymptotic_norm_draws, default_truncation, simulate_sheet, truncated_bridge_kernel, truncated_eigen_sum,
    KlConfig, MAX_SHEET_DIMENSION,
};
use unicube::decompose::{bound_constant, decompose, random_vanishing_grid, reconstruct};
use unicube::{domain, RandomStream};

const MAX_DIAGNOSE_GRID: usize = 33;
const ROUND_TRIP_TOLERANCE: f64 = 1e-12;
/// Standard errors allowed in the Monte Carlo checks.
const SE_MULTIPLIER: f64 = 4.0;

#[derive(Args)]
pub struct DiagnoseArgs {
    /// Dimension p (1..=4).
    #[arg(long, default_value_t = 2)]
    p: usize,

    /// Lattice points per axis (2..=33).
    #[arg(long, default_value_t = 9)]
    m: usize,

    /// Karhunen–Loève truncation nu_max (>= 1; default depends on the cardinality).
    #[arg(long)]
    truncation: Option<usize>,

    /// Simulated sheets and asymptotic norm draws (>= 2).
    #[arg(long, default_value_t = 4000)]
    draws: usize,

    /// Random grid functions for the decomposition round trip (>= 1).
    #[arg(long, default_value_t = 10)]
    functions: usize,

    /// Covariance points checked on the sheet (>= 1).
    #[arg(long, default_value_t = 5)]
    points: usize,

    /// Seed (any u64).
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
}

pub fn run(args: DiagnoseArgs) -> Result<u8, String> {
    if args.p == 0 || args.p > MAX_SHEET_DIMENSION {
        return Err(format!("--p {} outside 1..={MAX_SHEET_DIMENSION}", args.p));
    }
    if args.m < 2 || args.m > MAX_DIAGNOSE_GRID {
        return Err(format!("--m {} outside 2..={MAX_DIAGNOSE_GRID}", args.m));
    }
    if args.truncation == Some(0) || args.draws < 2 || args.functions == 0 || args.points == 0 {
        return Err("--truncation, --functions and --points must be >= 1, --draws >= 2".into());
    }
    let root = RandomStream::new(args.seed, domain::DIAGNOSTICS);
    let checks = [
        decomposition_check(&args, &root.substream(0))?,
        covariance_check(&args, &root.substream(1))?,
        norm_mean_check(&args, &root.substream(2))?,
    ];
    let mut failed = false;
    for c in &checks {
        println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
        failed |= !c.pass;
    }
    Ok(u8::from(failed))
}

fn decomposition_check(args: &DiagnoseArgs, root: &RandomStream) -> Result<Check, String> {
    let bound = bound_constant(args.p);
    let (mut err, mut edge, mut ratio) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..args.functions {
        let g = random_vanishing_grid(&root.substream(i as u64), args.p, args.m).map_err(|e| e.to_string())?;
        let parts = decompose(&g).map_err(|e| e.to_string())?;
        let back = reconstruct(&parts, args.m).map_err(|e| e.to_string())?;
        for (a, b) in back.values().iter().zip(g.values()) {
            err = err.max((a - b).abs());
        }
        for c in &parts {
            edge = edge.max(c.boundary_max());
            ratio = ratio.max(c.max_abs() / g.max_abs());
        }
    }
    Ok(Check {
        name: "decomposition round-trip",
        pass: err <= ROUND_TRIP_TOLERANCE && edge <= ROUND_TRIP_TOLERANCE && ratio <= bound,
        detail: format!(
            "{} functions, p={} m={}: max reconstruction error {err:.3e}, max tent boundary value {edge:.3e}, \
             max sup|T_H|/sup|g| = {ratio:.3} (bound K_p = {bound})",
            args.functions, args.p, args.m
        ),
    })
}

fn covariance_check(args: &DiagnoseArgs, root: &RandomStream) -> Result<Check, String> {
    let (p, m) = (args.p, args.m);
    let nu_max = args.truncation.unwrap_or_else(|| default_truncation(p));
    let cfg = KlConfig::new(nu_max, m).map_err(|e| e.to_string())?;
    let mut rng = root.substream(u64::MAX).rng();
    let pairs: Vec<(Vec<usize>, Vec<usize>)> = (0..args.points)
        .map(|_| {
            let mut pick = || (0..p).map(|_| rng.random_range(1..m)).collect::<Vec<usize>>();
            (pick(), pick())
        })
        .collect();
    let flat = |idx: &[usize]| idx.iter().rev().fold(0, |acc, &i| acc * m + i);
    let products: Vec<Vec<f64>> = (0..args.draws as u64)
        .into_par_iter()
        .map(|d| {
            let sheet = simulate_sheet(&root.substream(d), p, &cfg)?;
            Ok(pairs.iter().map(|(s, t)| sheet.values()[flat(s)] * sheet.values()[flat(t)]).collect())
        })
        .collect::<unicube::Result<_>>()
        .map_err(|e| e.to_string())?;

    let coord = |i: usize| i as f64 / (m - 1) as f64;
    // Per-axis kernel error is at most 2 Σ_{ν>N} 1/(ν²π²).
    let tail_bound = 2.0 * (1.0 / 6.0 - truncated_eigen_sum(nu_max));
    let mut pass = true;
    let mut worst_z: f64 = 0.0;
    let mut worst_bias: f64 = 0.0;
    let count = args.draws as f64;
    for (k, (s, t)) in pairs.iter().enumerate() {
        let xs: Vec<f64> = products.iter().map(|v| v[k]).collect();
        let mean = xs.iter().sum::<f64>() / count;
        let se = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (count - 1.0) / count).sqrt();
        let exact: f64 = s.iter().zip(t).map(|(&a, &b)| coord(a).min(coord(b))).product();
        let truncated: f64 = s
            .iter()
            .zip(t)
            .map(|(&a, &b)| truncated_bridge_kernel(coord(a), coord(b), nu_max) + coord(a) * coord(b))
            .product();
        let bias = truncated - exact;
        pass &= (mean - exact).abs() <= SE_MULTIPLIER * se + bias.abs();
        worst_z = worst_z.max((mean - truncated).abs() / se);
        worst_bias = worst_bias.max(bias.abs());
    }
    Ok(Check {
        name: "sheet covariance",
        pass,
        detail: format!(
            "{} sheets, p={p} m={m} nu_max={nu_max}, {} point pairs: worst |emp - truncated| = {worst_z:.2} SE, \
             max truncation bias {worst_bias:.3e} (per-axis tail bound {tail_bound:.3e}), allowance {SE_MULTIPLIER} SE + bias",
            args.draws, args.points
        ),
    })
}

fn norm_mean_check(args: &DiagnoseArgs, root: &RandomStream) -> Result<Check, String> {
    let mut pass = true;
    let mut parts = Vec::new();
    for k in 1..=args.p {
        let nu_max = args.truncation.unwrap_or_else(|| default_truncation(k));
        let table = asymptotic_norm_draws(&root.substream(k as u64), k, nu_max, args.draws, true)
            .map_err(|e| e.to_string())?;
        let n = table.draws.len() as f64;
        let mean = table.mean();
        let se = (table.draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt();
        let want = 6f64.powi(-(k as i32));
        let z = (mean - want).abs() / se;
        pass &= z <= SE_MULTIPLIER;
        parts.push(format!("k={k} mean {mean:.5e} vs {want:.5e} ({z:.2} SE)"));
    }
    Ok(Check {
        name: "asymptotic norm means",
        pass,
        detail: format!("{} draws, tail-compensated: {}", args.draws, parts.join("; ")),
    })
}
