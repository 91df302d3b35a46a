//! Published power values for the three benchmark tables, kept as
//! literal constants for side-by-side comparison. Nothing here is computed.
//!
//! The competitor tests are never implemented; their columns are reproduced
//! verbatim so that reports can show them next to the estimated powers.

/// Competitor columns of the bivariate tables, in order.
pub const COMPETITORS: [&str; 9] = ["M2_S", "M2_L", "M2_T", "C_N", "BCV", "MST", "Q1", "Q2", "Q3"];

/// Competitor columns of the six-dimensional partial-test table.
pub const PARTIAL_COMPETITORS: [&str; 4] = ["C_N", "Q1", "Q2", "Q3"];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CopulaRow {
    /// Family name as accepted by the alternative parser.
    pub family: &'static str,
    pub theta: f64,
    pub n: usize,
    pub competitors: [f64; 9],
    pub m_test: f64,
    pub s_test: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BetaRow {
    pub alpha: f64,
    pub beta: f64,
    pub competitors: [f64; 9],
    pub m_test: f64,
    pub s_test: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PartialRow {
    pub rho: f64,
    pub h: usize,
    pub m_test: f64,
    pub s_test: f64,
}

/// Competitor powers per `ρ` for the partial-test table (they do not depend on `h`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PartialCompetitorRow {
    pub rho: f64,
    pub competitors: [f64; 4],
}

const fn copula(family: &'static str, theta: f64, n: usize, c: [f64; 9], m_test: f64, s_test: f64) -> CopulaRow {
    CopulaRow { family, theta, n, competitors: c, m_test, s_test }
}

const fn beta(alpha: f64, beta: f64, c: [f64; 9], m_test: f64, s_test: f64) -> BetaRow {
    BetaRow { alpha, beta, competitors: c, m_test, s_test }
}

const fn partial(rho: f64, h: usize, m_test: f64, s_test: f64) -> PartialRow {
    PartialRow { rho, h, m_test, s_test }
}

/// Copula alternatives, `p = 2`, sizes 10, 25 and 50.
pub const COPULA_TABLE: [CopulaRow; 12] = [
    copula("amh", 0.9, 10, [0.376, 0.038, 0.062, 0.056, 0.056, 0.066, 0.065, 0.121, 0.127], 0.137, 0.144),
    copula("amh", 0.9, 25, [0.328, 0.118, 0.054, 0.068, 0.062, 0.112, 0.066, 0.170, 0.164], 0.359, 0.339),
    copula("amh", 0.9, 50, [0.504, 0.166, 0.060, 0.078, 0.072, 0.154, 0.063, 0.233, 0.204], 0.695, 0.648),
    copula("fgm", 1.0, 10, [0.672, 0.046, 0.096, 0.060, 0.044, 0.044, 0.055, 0.090, 0.094], 0.093, 0.086),
    copula("fgm", 1.0, 25, [0.590, 0.076, 0.060, 0.072, 0.040, 0.052, 0.052, 0.104, 0.115], 0.238, 0.250),
    copula("fgm", 1.0, 50, [0.390, 0.072, 0.050, 0.062, 0.040, 0.094, 0.049, 0.126, 0.127], 0.459, 0.431),
    copula("clayton", 2.0, 10, [0.384, 0.016, 0.078, 0.088, 0.078, 0.164, 0.097, 0.257, 0.237], 0.372, 0.319),
    copula("clayton", 2.0, 25, [0.638, 0.472, 0.076, 0.074, 0.136, 0.592, 0.101, 0.427, 0.370], 0.888, 0.849),
    copula("clayton", 2.0, 50, [0.984, 0.850, 0.060, 0.090, 0.194, 0.894, 0.098, 0.640, 0.566], 0.998, 0.998),
    copula("plackett", 5.0, 10, [0.572, 0.026, 0.064, 0.078, 0.051, 0.082, 0.078, 0.162, 0.153], 0.185, 0.171),
    copula("plackett", 5.0, 25, [0.414, 0.170, 0.046, 0.072, 0.078, 0.152, 0.076, 0.234, 0.210], 0.536, 0.513),
    copula("plackett", 5.0, 50, [0.632, 0.356, 0.038, 0.086, 0.082, 0.270, 0.071, 0.349, 0.295], 0.860, 0.839),
];

/// Bivariate i.i.d. Beta alternatives. The sample size is not reported.
pub const BETA_TABLE: [BetaRow; 10] = [
    beta(0.5, 0.5, [0.140, 0.356, 0.472, 0.268, 0.998, 0.106, 0.997, 0.999, 0.999], 0.444, 0.683),
    beta(0.5, 1.0, [0.330, 0.242, 0.182, 1.000, 0.976, 0.254, 0.184, 0.415, 0.386], 0.998, 1.000),
    beta(0.5, 2.0, [0.950, 0.698, 0.090, 1.000, 1.000, 0.998, 0.998, 0.951, 0.991], 1.000, 1.000),
    beta(0.5, 3.0, [0.996, 0.776, 0.086, 1.000, 1.000, 1.000, 1.000, 1.000, 1.000], 1.000, 1.000),
    beta(1.0, 1.0, [0.056, 0.054, 0.044, 0.056, 0.056, 0.030, 0.048, 0.042, 0.074], 0.048, 0.048),
    beta(1.0, 2.0, [0.124, 0.254, 0.018, 1.000, 0.066, 0.856, 0.971, 0.495, 0.965], 1.000, 1.000),
    beta(1.0, 3.0, [0.374, 0.456, 0.070, 1.000, 0.426, 1.000, 1.000, 0.221, 1.000], 1.000, 1.000),
    beta(2.0, 2.0, [0.262, 0.222, 0.070, 0.030, 0.992, 0.880, 1.000, 0.949, 1.000], 0.108, 0.207),
    beta(2.0, 3.0, [0.172, 0.314, 0.096, 0.806, 0.998, 0.998, 1.000, 1.000, 1.000], 0.977, 0.994),
    beta(3.0, 3.0, [0.166, 0.426, 0.150, 0.030, 1.000, 1.000, 1.000, 0.544, 1.000], 0.720, 0.935),
];

/// Equicorrelated normal copula, `p = 6`, `n = 50`.
pub const PARTIAL_TABLE: [PartialRow; 36] = [
    partial(0.05, 1, 0.041, 0.050),
    partial(0.05, 2, 0.065, 0.098),
    partial(0.05, 3, 0.023, 0.147),
    partial(0.05, 4, 0.000, 0.193),
    partial(0.05, 5, 0.000, 0.220),
    partial(0.05, 6, 0.000, 0.228),
    partial(0.10, 1, 0.037, 0.053),
    partial(0.10, 2, 0.113, 0.236),
    partial(0.10, 3, 0.042, 0.238),
    partial(0.10, 4, 0.000, 0.286),
    partial(0.10, 5, 0.000, 0.306),
    partial(0.10, 6, 0.000, 0.308),
    partial(0.15, 1, 0.034, 0.056),
    partial(0.15, 2, 0.193, 0.477),
    partial(0.15, 3, 0.079, 0.417),
    partial(0.15, 4, 0.000, 0.420),
    partial(0.15, 5, 0.000, 0.426),
    partial(0.15, 6, 0.000, 0.429),
    partial(0.20, 1, 0.036, 0.057),
    partial(0.20, 2, 0.327, 0.706),
    partial(0.20, 3, 0.150, 0.603),
    partial(0.20, 4, 0.000, 0.601),
    partial(0.20, 5, 0.000, 0.590),
    partial(0.20, 6, 0.000, 0.588),
    partial(0.30, 1, 0.034, 0.056),
    partial(0.30, 2, 0.684, 0.965),
    partial(0.30, 3, 0.414, 0.906),
    partial(0.30, 4, 0.000, 0.881),
    partial(0.30, 5, 0.000, 0.861),
    partial(0.30, 6, 0.000, 0.857),
    partial(0.40, 1, 0.030, 0.063),
    partial(0.40, 2, 0.911, 1.000),
    partial(0.40, 3, 0.744, 0.988),
    partial(0.40, 4, 0.000, 0.974),
    partial(0.40, 5, 0.000, 0.968),
    partial(0.40, 6, 0.000, 0.968),
];

pub const PARTIAL_COMPETITOR_TABLE: [PartialCompetitorRow; 6] = [
    PartialCompetitorRow { rho: 0.05, competitors: [0.052, 0.043, 0.055, 0.077] },
    PartialCompetitorRow { rho: 0.10, competitors: [0.051, 0.050, 0.107, 0.113] },
    PartialCompetitorRow { rho: 0.15, competitors: [0.056, 0.060, 0.220, 0.191] },
    PartialCompetitorRow { rho: 0.20, competitors: [0.058, 0.072, 0.366, 0.314] },
    PartialCompetitorRow { rho: 0.30, competitors: [0.060, 0.091, 0.720, 0.683] },
    PartialCompetitorRow { rho: 0.40, competitors: [0.065, 0.116, 0.929, 0.954] },
];

fn same(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-9
}

pub fn copula_row(family: &str, theta: f64, n: usize) -> Option<&'static CopulaRow> {
    COPULA_TABLE.iter().find(|r| r.family == family && same(r.theta, theta) && r.n == n)
}

pub fn beta_row(alpha: f64, beta: f64) -> Option<&'static BetaRow> {
    BETA_TABLE.iter().find(|r| same(r.alpha, alpha) && same(r.beta, beta))
}

pub fn partial_row(rho: f64, h: usize) -> Option<&'static PartialRow> {
    PARTIAL_TABLE.iter().find(|r| same(r.rho, rho) && r.h == h)
}

pub fn partial_competitors(rho: f64) -> Option<&'static PartialCompetitorRow> {
    PARTIAL_COMPETITOR_TABLE.iter().find(|r| same(r.rho, rho))
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>().join(",")
}

/// The published values of one table as CSV, every column labelled as
/// such. Returns `None` for an unknown table id.
pub fn reference_csv(table: &str) -> Option<String> {
    let mut out = String::new();
    match table {
        "copulas" => {
            out += &format!("source,alternative,param,n,{},m-test,s-test\n", COMPETITORS.join(","));
            for r in &COPULA_TABLE {
                out += &format!(
                    "paper-reported,{},theta={},{},{},{:.3},{:.3}\n",
                    r.family,
                    r.theta,
                    r.n,
                    join(&r.competitors),
                    r.m_test,
                    r.s_test
                );
            }
        }
        "beta" => {
            out += &format!("source,alternative,param,n,{},m-test,s-test\n", COMPETITORS.join(","));
            for r in &BETA_TABLE {
                out += &format!(
                    "paper-reported,beta,alpha={};beta={},NA,{},{:.3},{:.3}\n",
                    r.alpha,
                    r.beta,
                    join(&r.competitors),
                    r.m_test,
                    r.s_test
                );
            }
        }
        "partial" => {
            out += &format!("source,alternative,param,n,h,{},m-test,s-test\n", PARTIAL_COMPETITORS.join(","));
            for r in &PARTIAL_TABLE {
                let c = partial_competitors(r.rho).expect("every rho has competitor values");
                out += &format!(
                    "paper-reported,normal-copula,rho={};p=6,50,{},{},{:.3},{:.3}\n",
                    r.rho,
                    r.h,
                    join(&c.competitors),
                    r.m_test,
                    r.s_test
                );
            }
        }
        _ => return None,
    }
    Some(out)
}
