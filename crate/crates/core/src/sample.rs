use rand::Rng;

use crate::error::{invalid_arg, Error, Result};
use crate::stream::RandomStream;

/// Largest supported dimension; `2^p` subset enumeration must stay addressable.
pub const MAX_DIMENSION: usize = 20;

/// An `n × p` sample of points in `[0,1]^p`, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    data: Vec<f64>,
    n: usize,
    p: usize,
}

impl Sample {
    /// Wraps row-major data, rejecting entries outside `[0,1]` and NaN.
    pub fn new(data: Vec<f64>, n: usize, p: usize) -> Result<Self> {
        check_shape(n, p)?;
        if data.len() != n * p {
            return Err(invalid_arg!("expected {} values for {n}×{p}, got {}", n * p, data.len()));
        }
        if let Some(k) = data.iter().position(|x| !(0.0..=1.0).contains(x)) {
            return Err(Error::InvalidInput(format!(
                "row {} column {}: value {} outside [0,1]",
                k / p + 1,
                k % p + 1,
                data[k]
            )));
        }
        Ok(Sample { data, n, p })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let p = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * p);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != p {
                return Err(Error::InvalidInput(format!(
                    "row {} has {} columns, expected {p}",
                    i + 1,
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Sample::new(data, rows.len(), p)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.p..(i + 1) * self.p]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.data.chunks_exact(self.p)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.p + j]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

fn check_shape(n: usize, p: usize) -> Result<()> {
    if n == 0 {
        return Err(invalid_arg!("sample size must be at least 1"));
    }
    if p == 0 || p > MAX_DIMENSION {
        return Err(invalid_arg!("dimension p = {p} outside 1..={MAX_DIMENSION}"));
    }
    Ok(())
}

/// `n` i.i.d. Uniform`[0,1)^p` points drawn from `stream`.
pub fn uniform_sample(stream: &RandomStream, n: usize, p: usize) -> Result<Sample> {
    check_shape(n, p)?;
    let mut rng = stream.rng();
    let data = (0..n * p).map(|_| rng.random::<f64>()).collect();
    Ok(Sample { data, n, p })
}
