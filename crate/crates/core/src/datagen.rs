//! Random linear Gaussian systems and equilibrium sampling.
//!
//! Cyclic systems draw every off-diagonal coefficient independently with
//! probability `E(N) / (2p - 2)`, resampling until at least one directed
//! cycle exists, the fixed-point iteration converges (spectral radius of
//! `B` below one) and `(I - B)` is safely invertible. Acyclic systems use a
//! strictly lower-triangular support with probability `E(N) / (p - 1)`.
//! Nonzero coefficients are uniform on `[-hi, -lo] u [lo, hi]`.
//!
//! Samples solve `X = B X + eps` in closed form: `X = (I - B)^-1 eps` with
//! independent standard Gaussian errors, so the equilibrium covariance is
//! `(I - B)^-1 (I - B)^-T`. Selection bias is modeled by keeping the rows
//! where every selection variable is positive.

use nalgebra::{DMatrix, DVector};
use rand::seq::IndexedRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::Error;
use crate::format::Dataset;
use crate::graph::{DirectedSystem, VertexClass, VertexId};
use crate::Result;

/// Resample budget for the cyclic generator.
const MAX_ATTEMPTS: usize = 1000;
/// Guards on `(I - B)`.
const MIN_ABS_DET: f64 = 1e-12;
const MAX_CONDITION: f64 = 1e8;
/// Equilibrium processes must converge: the fixed-point iteration
/// `X <- BX + eps` does so exactly when the spectral radius of `B` is
/// below one. Keep a small safety margin away from criticality.
const MAX_SPECTRAL_RADIUS: f64 = 0.95;

/// Parameters for random system generation.
#[derive(Debug, Clone)]
pub struct GenConfig {
    pub p: usize,
    pub expected_neighborhood: f64,
    pub cyclic: bool,
    pub coef_range: (f64, f64),
    pub n_latent_max: usize,
    pub n_select_max: usize,
    pub seed: u64,
}

impl GenConfig {
    pub fn new(p: usize, expected_neighborhood: f64, cyclic: bool, seed: u64) -> Result<Self> {
        let cfg = GenConfig {
            p,
            expected_neighborhood,
            cyclic,
            coef_range: (0.1, 1.0),
            n_latent_max: 3,
            n_select_max: 3,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.p < 2 {
            return Err(Error::invalid("need p >= 2"));
        }
        let (lo, hi) = self.coef_range;
        if !(0.0 < lo && lo < hi) {
            return Err(Error::invalid("need 0 < coef low < high"));
        }
        if !(self.expected_neighborhood >= 0.0
            && self.expected_neighborhood < self.p as f64)
        {
            return Err(Error::invalid("need 0 <= E(N) < p"));
        }
        Ok(())
    }
}

fn draw_coef<R: Rng + ?Sized>(cfg: &GenConfig, rng: &mut R) -> f64 {
    let (lo, hi) = cfg.coef_range;
    let magnitude = rng.random_range(lo..hi);
    if rng.random::<bool>() {
        magnitude
    } else {
        -magnitude
    }
}

fn system_from_coeffs(p: usize, coeffs: Vec<f64>) -> Result<DirectedSystem> {
    let mut edges = Vec::new();
    for row in 0..p {
        for col in 0..p {
            if coeffs[row * p + col] != 0.0 {
                edges.push((col as VertexId, row as VertexId));
            }
        }
    }
    let mut g = DirectedSystem::new(p, &edges)?;
    g.set_coeffs(coeffs)?;
    Ok(g)
}

fn i_minus_b(p: usize, coeffs: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(p, p, |r, c| {
        let b = coeffs[r * p + c];
        if r == c {
            1.0 - b
        } else {
            -b
        }
    })
}

fn invertibility_ok(m: &DMatrix<f64>) -> bool {
    if m.determinant().abs() <= MIN_ABS_DET {
        return false;
    }
    match m.clone().try_inverse() {
        Some(inv) => {
            let cond = m.norm() * inv.norm();
            cond.is_finite() && cond <= MAX_CONDITION
        }
        None => false,
    }
}

fn spectral_radius(p: usize, coeffs: &[f64]) -> f64 {
    let b = DMatrix::from_fn(p, p, |r, c| coeffs[r * p + c]);
    b.complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Random directed cyclic Gaussian system.
pub fn random_dcg<R: Rng + ?Sized>(cfg: &GenConfig, rng: &mut R) -> Result<DirectedSystem> {
    cfg.validate()?;
    if !cfg.cyclic {
        return Err(Error::invalid("random_dcg requires cfg.cyclic"));
    }
    let p = cfg.p;
    let density = cfg.expected_neighborhood / (2.0 * p as f64 - 2.0);
    for _ in 0..MAX_ATTEMPTS {
        let mut coeffs = vec![0.0; p * p];
        for row in 0..p {
            for col in 0..p {
                if row != col && rng.random::<f64>() < density {
                    coeffs[row * p + col] = draw_coef(cfg, rng);
                }
            }
        }
        let g = system_from_coeffs(p, coeffs.clone())?;
        if !g.has_cycle() {
            continue;
        }
        if spectral_radius(p, &coeffs) >= MAX_SPECTRAL_RADIUS {
            continue;
        }
        if !invertibility_ok(&i_minus_b(p, &coeffs)) {
            continue;
        }
        return Ok(g);
    }
    Err(Error::Generation(format!(
        "no admissible cyclic system in {MAX_ATTEMPTS} attempts (E(N) = {})",
        cfg.expected_neighborhood
    )))
}

/// Random Gaussian DAG with strictly lower-triangular support.
pub fn random_dag<R: Rng + ?Sized>(cfg: &GenConfig, rng: &mut R) -> Result<DirectedSystem> {
    cfg.validate()?;
    if cfg.cyclic {
        return Err(Error::invalid("random_dag requires !cfg.cyclic"));
    }
    let p = cfg.p;
    let density = cfg.expected_neighborhood / (p as f64 - 1.0);
    let mut coeffs = vec![0.0; p * p];
    for row in 0..p {
        for col in 0..row {
            if rng.random::<f64>() < density {
                coeffs[row * p + col] = draw_coef(cfg, rng);
            }
        }
    }
    system_from_coeffs(p, coeffs)
}

/// Relabels up to `n_latent_max` common causes (vertices with at least two
/// children) as latent, then up to `n_select_max` of the remaining vertices
/// with at least two parents (in the original graph) as selection. Counts
/// are drawn uniformly and truncated by pool size.
pub fn inject_latent_selection<R: Rng + ?Sized>(
    g: &DirectedSystem,
    cfg: &GenConfig,
    rng: &mut R,
) -> Result<DirectedSystem> {
    if g.labels().iter().any(|&l| l != VertexClass::Observed) {
        return Err(Error::invalid("expected a fully observed system"));
    }
    let mut out = g.clone();
    let latent_pool: Vec<VertexId> = (0..g.p() as VertexId)
        .filter(|&v| g.children_of(v).len() >= 2)
        .collect();
    let want_latent = rng.random_range(0..=cfg.n_latent_max);
    let mut latents: Vec<VertexId> = latent_pool
        .choose_multiple(rng, want_latent.min(latent_pool.len()))
        .copied()
        .collect();
    latents.sort_unstable();
    for &v in &latents {
        out.set_label(v, VertexClass::Latent)?;
    }
    let select_pool: Vec<VertexId> = (0..g.p() as VertexId)
        .filter(|&v| !latents.contains(&v) && g.parents_of(v).len() >= 2)
        .collect();
    let want_select = rng.random_range(0..=cfg.n_select_max);
    let mut selects: Vec<VertexId> = select_pool
        .choose_multiple(rng, want_select.min(select_pool.len()))
        .copied()
        .collect();
    selects.sort_unstable();
    for &v in &selects {
        out.set_label(v, VertexClass::Selection)?;
    }
    Ok(out)
}

/// Analytic equilibrium covariance `(I - B)^-1 (I - B)^-T`.
pub fn analytic_covariance(g: &DirectedSystem) -> Result<DMatrix<f64>> {
    let coeffs = g
        .coeffs()
        .ok_or_else(|| Error::invalid("system has no coefficients"))?;
    let m = i_minus_b(g.p(), coeffs);
    let inv = m
        .try_inverse()
        .ok_or_else(|| Error::Numeric("(I - B) is singular".into()))?;
    Ok(&inv * inv.transpose())
}

/// Draws `n` i.i.d. equilibrium samples over all `p` columns.
pub fn sample_equilibrium<R: Rng + ?Sized>(
    g: &DirectedSystem,
    n: usize,
    rng: &mut R,
) -> Result<Dataset> {
    let coeffs = g
        .coeffs()
        .ok_or_else(|| Error::invalid("system has no coefficients"))?;
    let p = g.p();
    let m = i_minus_b(p, coeffs);
    let inv = m
        .try_inverse()
        .ok_or_else(|| Error::Numeric("(I - B) is singular".into()))?;
    let mut values = Vec::with_capacity(n * p);
    let mut eps = DVector::zeros(p);
    for _ in 0..n {
        for e in eps.iter_mut() {
            *e = rng.sample(StandardNormal);
        }
        let x = &inv * &eps;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("non-finite sample".into()));
        }
        values.extend(x.iter());
    }
    Dataset::new(values, (0..p as VertexId).collect(), n)
}

/// Keeps rows where every selection column is positive, then drops the
/// latent and selection columns. Errors when no row survives.
pub fn apply_selection(d: &Dataset, g: &DirectedSystem) -> Result<Dataset> {
    let mut sel_cols = Vec::new();
    let mut keep_cols = Vec::new();
    for (idx, &vertex) in d.columns.iter().enumerate() {
        if vertex as usize >= g.p() {
            return Err(Error::VertexOutOfRange(vertex, g.p()));
        }
        match g.label(vertex) {
            VertexClass::Selection => sel_cols.push(idx),
            VertexClass::Latent => {}
            VertexClass::Observed => keep_cols.push(idx),
        }
    }
    for &v in &g.selection_set() {
        if d.column_index(v).is_none() {
            return Err(Error::invalid(format!(
                "dataset lacks selection column for vertex {v}"
            )));
        }
    }
    let mut values = Vec::new();
    let mut retained = 0usize;
    for row in 0..d.n_rows {
        if sel_cols.iter().all(|&c| d.value(row, c) > 0.0) {
            retained += 1;
            for &c in &keep_cols {
                values.push(d.value(row, c));
            }
        }
    }
    if retained == 0 {
        return Err(Error::DegenerateSelection);
    }
    let columns: Vec<VertexId> = keep_cols.iter().map(|&c| d.columns[c]).collect();
    Dataset::new(values, columns, d.n_rows)
}
