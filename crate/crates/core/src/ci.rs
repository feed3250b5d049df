//! Conditional-independence providers: the abstraction consumed by the
//! discovery algorithm, plus the Gaussian Fisher-z implementation on data.
//! The exact-oracle implementation lives in [`crate::dsep`].

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use nalgebra::DMatrix;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::Error;
use crate::format::Dataset;
use crate::graph::VertexId;
use crate::Result;

/// Answers conditional-independence queries over variables `0..n_vars`.
///
/// Implementations must be symmetric in `(i, j)`, deterministic for fixed
/// inputs, and must count every call in `query_count`.
pub trait CiProvider: Sync {
    /// Whether `i` and `j` are independent given `w` (with `i, j` not in `w`).
    fn independent(&self, i: VertexId, j: VertexId, w: &std::collections::BTreeSet<VertexId>)
        -> Result<bool>;

    /// Number of variables the provider answers for.
    fn n_vars(&self) -> usize;

    /// Monotone count of `independent` calls.
    fn query_count(&self) -> u64;
}

/// Test configuration for Fisher's z.
#[derive(Debug, Clone, Copy)]
pub struct FisherZConfig {
    pub alpha: f64,
    pub n: usize,
}

impl FisherZConfig {
    pub fn new(alpha: f64, n: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::invalid(format!("alpha {alpha} not in (0,1)")));
        }
        Ok(FisherZConfig { alpha, n })
    }
}

/// Significance level schedule by sample size: 1e-2 up to 1000 samples,
/// 1e-3 up to 10000, 1e-4 beyond.
pub fn alpha_for_sample_size(n: usize) -> f64 {
    if n <= 1000 {
        1e-2
    } else if n <= 10_000 {
        1e-3
    } else {
        1e-4
    }
}

/// Partial correlation of `i` and `j` given `w`, computed from a correlation
/// matrix by inverting the sub-matrix over `{i, j} u w` (Cholesky):
/// `rho = -Theta_ij / sqrt(Theta_ii Theta_jj)`.
pub fn partial_correlation(
    corr: &DMatrix<f64>,
    i: usize,
    j: usize,
    w: &[usize],
) -> Result<f64> {
    let p = corr.nrows();
    if corr.ncols() != p {
        return Err(Error::invalid("correlation matrix must be square"));
    }
    for &v in w.iter().chain([i, j].iter()) {
        if v >= p {
            return Err(Error::VertexOutOfRange(v as u32, p));
        }
    }
    if w.is_empty() {
        return Ok(corr[(i, j)]);
    }
    let mut idx = Vec::with_capacity(2 + w.len());
    idx.push(i);
    idx.push(j);
    idx.extend_from_slice(w);
    let k = idx.len();
    let sub = DMatrix::from_fn(k, k, |r, c| corr[(idx[r], idx[c])]);
    let chol = sub
        .cholesky()
        .ok_or_else(|| Error::Numeric("sub-correlation matrix not positive definite".into()))?;
    let theta = chol.inverse();
    let denom = (theta[(0, 0)] * theta[(1, 1)]).sqrt();
    if !denom.is_finite() || denom == 0.0 {
        return Err(Error::Numeric("degenerate precision entries".into()));
    }
    Ok(-theta[(0, 1)] / denom)
}

/// Outcome of one Fisher-z test.
#[derive(Debug, Clone, Copy)]
pub struct FisherZRecord {
    pub r: f64,
    pub z: f64,
    pub threshold: f64,
    pub independent: bool,
    /// Set when the partial correlation was numerically +-1.
    pub infinite_statistic: bool,
}

/// Fisher-z decision: `z = 0.5 ln((1+r)/(1-r)) sqrt(n - |w| - 3)`,
/// independent iff `|z| <= Phi^-1(1 - alpha/2)`.
pub fn fisher_z_independent(
    corr: &DMatrix<f64>,
    cfg: FisherZConfig,
    i: usize,
    j: usize,
    w: &[usize],
) -> Result<FisherZRecord> {
    if cfg.n < w.len() + 4 {
        return Err(Error::invalid(format!(
            "need n - |w| - 3 >= 1, got n = {}, |w| = {}",
            cfg.n,
            w.len()
        )));
    }
    let raw = partial_correlation(corr, i, j, w)?;
    let clamp = 1.0 - 1e-12;
    let infinite = raw.abs() >= clamp;
    let r = raw.clamp(-clamp, clamp);
    let dof = (cfg.n - w.len() - 3) as f64;
    let z = 0.5 * ((1.0 + r) / (1.0 - r)).ln() * dof.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let threshold = normal.inverse_cdf(1.0 - cfg.alpha / 2.0);
    Ok(FisherZRecord {
        r: raw,
        z,
        threshold,
        independent: !infinite && z.abs() <= threshold,
        infinite_statistic: infinite,
    })
}

/// Column-standardized correlation matrix of a dataset.
pub fn correlation_matrix(data: &Dataset) -> Result<DMatrix<f64>> {
    let n = data.n_rows;
    let p = data.n_cols();
    if n < 2 {
        return Err(Error::invalid("need at least two rows"));
    }
    let mut means = vec![0.0; p];
    for row in 0..n {
        for col in 0..p {
            means[col] += data.value(row, col);
        }
    }
    for m in &mut means {
        *m /= n as f64;
    }
    let mut cov: DMatrix<f64> = DMatrix::zeros(p, p);
    for row in 0..n {
        for a in 0..p {
            let da = data.value(row, a) - means[a];
            for b in a..p {
                cov[(a, b)] += da * (data.value(row, b) - means[b]);
            }
        }
    }
    let denom = (n - 1) as f64;
    let mut corr: DMatrix<f64> = DMatrix::zeros(p, p);
    for a in 0..p {
        for b in a..p {
            let c = cov[(a, b)] / denom;
            cov[(a, b)] = c;
            cov[(b, a)] = c;
        }
    }
    for a in 0..p {
        if cov[(a, a)] <= 0.0 {
            return Err(Error::Numeric(format!("column {a} has zero variance")));
        }
    }
    for a in 0..p {
        for b in 0..p {
            let scale: f64 = cov[(a, a)] * cov[(b, b)];
            corr[(a, b)] = cov[(a, b)] / scale.sqrt();
        }
    }
    Ok(corr)
}

/// Data-backed CI provider: Fisher's z on a cached correlation matrix, with
/// per-query memoization (constraint-based searches repeat queries heavily).
pub struct FisherZCi {
    corr: DMatrix<f64>,
    cfg: FisherZConfig,
    queries: AtomicU64,
    memo: Mutex<BTreeMap<(VertexId, VertexId, Vec<VertexId>), bool>>,
}

impl FisherZCi {
    /// Builds a provider over the dataset's columns; `alpha` defaults to the
    /// sample-size schedule when `None`.
    pub fn from_dataset(data: &Dataset, alpha: Option<f64>) -> Result<Self> {
        let corr = correlation_matrix(data)?;
        let alpha = alpha.unwrap_or_else(|| alpha_for_sample_size(data.n_rows));
        Ok(FisherZCi {
            corr,
            cfg: FisherZConfig::new(alpha, data.n_rows)?,
            queries: AtomicU64::new(0),
            memo: Mutex::new(BTreeMap::new()),
        })
    }

    pub fn alpha(&self) -> f64 {
        self.cfg.alpha
    }

    pub fn n(&self) -> usize {
        self.cfg.n
    }
}

impl CiProvider for FisherZCi {
    fn independent(
        &self,
        i: VertexId,
        j: VertexId,
        w: &std::collections::BTreeSet<VertexId>,
    ) -> Result<bool> {
        self.queries.fetch_add(1, Ordering::Relaxed);
        if i == j || w.contains(&i) || w.contains(&j) {
            return Err(Error::invalid("query indices must be disjoint"));
        }
        let (lo, hi) = if i < j { (i, j) } else { (j, i) };
        let key = (lo, hi, w.iter().copied().collect::<Vec<_>>());
        if let Some(&hit) = self.memo.lock().unwrap().get(&key) {
            return Ok(hit);
        }
        let w_idx: Vec<usize> = w.iter().map(|&v| v as usize).collect();
        let rec = fisher_z_independent(&self.corr, self.cfg, lo as usize, hi as usize, &w_idx)?;
        self.memo.lock().unwrap().insert(key, rec.independent);
        Ok(rec.independent)
    }

    fn n_vars(&self) -> usize {
        self.corr.nrows()
    }

    fn query_count(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }
}
