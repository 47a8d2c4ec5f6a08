//! Maximization of linear functionals `Tr[W Z]` over the covariant convex
//! sets: POVM seeds with per-block normalization constraints, and covariant
//! Choi operators with fixed `Tr_K[R]`.
//!
//! Algorithm: projected gradient ascent (step `1/||W||`) with Dykstra
//! alternating projections for feasibility; channels are optimized in the
//! commutant block coordinates so covariance holds by construction. A final
//! purification pass walks along perturbation witnesses (which leave the
//! objective unchanged at an optimum) until the iterate is an extreme point.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channels::{project_covariant, qo_extremality, ChannelError, ChoiOperator};
use crate::extremality::ExtremalityReport;
use crate::numkernel::{hermitian_eig, partial_trace, ComplexMatrix, MatError, TensorShape};
use crate::povm::{check_seed, extremality as povm_extremality, PovmError, PovmSeed};
use crate::reps::{IsotypicDecomposition, RepError, DEFAULT_SEED};

#[derive(Debug, Error)]
pub enum OptError {
    #[error(transparent)]
    Mat(#[from] MatError),
    #[error(transparent)]
    Rep(#[from] RepError),
    #[error(transparent)]
    Povm(#[from] PovmError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error("contract violation: {0}")]
    ContractViolation(String),
    #[error("projection failed: residual {residual:.3e} after {iterations} iterations")]
    ProjectionFailed { residual: f64, iterations: usize },
}

/// Which covariant convex set to optimize over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConvexSetKind {
    PovmSeeds,
    CovariantChannels,
}

/// A covariant convex set: the seed polytope-like spectrahedron of a POVM
/// decomposition, or the covariant Choi operators with a fixed `Tr_K`.
#[derive(Clone, Debug)]
pub struct ConvexSetSpec {
    pub kind: ConvexSetKind,
    pub dec: IsotypicDecomposition,
    /// Channel sets only: the affine target `K = Tr_K[R]`.
    pub target_k: Option<ComplexMatrix>,
    pub dim_in: usize,
    pub dim_out: usize,
}

impl ConvexSetSpec {
    pub fn povm(dec: IsotypicDecomposition) -> Self {
        let n = dec.carrier_dim();
        Self {
            kind: ConvexSetKind::PovmSeeds,
            dec,
            target_k: None,
            dim_in: n,
            dim_out: n,
        }
    }

    /// Covariant channels on `K (x) H` with `Tr_K[R] = target_k`
    /// (`None` = trace-preserving, `K = I`).
    pub fn channels(
        dec: IsotypicDecomposition,
        dim_in: usize,
        dim_out: usize,
        target_k: Option<ComplexMatrix>,
    ) -> Result<Self, OptError> {
        if dec.carrier_dim() != dim_in * dim_out {
            return Err(OptError::Mat(MatError::DimensionMismatch(format!(
                "decomposition carrier {} does not match dim_in*dim_out {}",
                dec.carrier_dim(),
                dim_in * dim_out
            ))));
        }
        let k = target_k.unwrap_or_else(|| ComplexMatrix::identity(dim_in));
        if k.rows() != dim_in || k.cols() != dim_in || !k.is_hermitian(1e-8) {
            return Err(OptError::ContractViolation(
                "target K must be Hermitian on the input space".into(),
            ));
        }
        Ok(Self {
            kind: ConvexSetKind::CovariantChannels,
            dec,
            target_k: Some(k),
            dim_in,
            dim_out,
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.dec.carrier_dim()
    }

    fn shape(&self) -> TensorShape {
        TensorShape::new(vec![self.dim_out, self.dim_in]).unwrap()
    }

    /// The canonical identity-based feasible point.
    pub fn canonical_point(&self) -> ComplexMatrix {
        match self.kind {
            ConvexSetKind::PovmSeeds => ComplexMatrix::identity(self.ambient_dim()),
            ConvexSetKind::CovariantChannels => {
                // I_K/dim(K) (x) K has Tr_K = K; twirl restores covariance
                let k = self.target_k.as_ref().unwrap();
                let raw = ComplexMatrix::identity(self.dim_out)
                    .scale_re(1.0 / self.dim_out as f64)
                    .kron(k);
                self.dec.twirl(&raw)
            }
        }
    }

    /// Whether `z` lies in the set within `feas_tol`.
    pub fn is_feasible(&self, z: &ComplexMatrix, feas_tol: f64) -> bool {
        match self.kind {
            ConvexSetKind::PovmSeeds => check_seed(z, &self.dec, feas_tol)
                .map(|r| r.feasible)
                .unwrap_or(false),
            ConvexSetKind::CovariantChannels => {
                let k = self.target_k.as_ref().unwrap();
                z.is_psd(feas_tol)
                    && partial_trace(z, &self.shape(), &[0])
                        .map(|t| t.sub(k).opnorm() < feas_tol * 10.0)
                        .unwrap_or(false)
                    && self.dec.twirl(z).sub(z).frobenius_norm()
                        < feas_tol * 10.0 * z.frobenius_norm().max(1.0)
            }
        }
    }
}

/// Hermitian cost operator for the linear functional `Tr[W Z]`.
#[derive(Clone, Debug)]
pub struct CostOperator {
    w: ComplexMatrix,
}

impl CostOperator {
    pub fn new(w: ComplexMatrix) -> Result<Self, OptError> {
        if !w.is_square() {
            return Err(OptError::Mat(MatError::DimensionMismatch(
                "cost operator must be square".into(),
            )));
        }
        if !w.is_hermitian(1e-8) {
            return Err(OptError::ContractViolation(
                "cost operator must be Hermitian".into(),
            ));
        }
        Ok(Self { w })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.w
    }

    pub fn value(&self, z: &ComplexMatrix) -> f64 {
        self.w.hs_inner(z).re
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OptimizeConfig {
    pub tol: f64,
    pub feas_tol: f64,
    pub seed: u64,
    pub restarts: usize,
    pub max_iterations: usize,
    /// Consecutive near-flat iterates required before declaring convergence.
    pub flat_window: usize,
    pub purify_rounds: usize,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            feas_tol: 1e-8,
            seed: DEFAULT_SEED,
            restarts: 4,
            max_iterations: 100_000,
            flat_window: 50,
            purify_rounds: 50,
        }
    }
}

#[derive(Clone, Debug)]
pub struct OptimizeOutcome {
    pub maximizer: ComplexMatrix,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Index of the restart that produced the reported maximizer.
    pub restart: usize,
    pub extremality: Option<ExtremalityReport>,
}

// ---------------------------------------------------------------------------
// real coordinates for Hermitian block variables (orthonormal, so Euclidean
// distance in coordinates equals Frobenius distance on operators)

fn block_coord_len(dims: &[usize]) -> usize {
    dims.iter().map(|&m| m * m).sum()
}

fn vectorize_hermitian(m: &ComplexMatrix, out: &mut [f64]) {
    let r = m.rows();
    let s = 2f64.sqrt();
    let mut idx = 0;
    for i in 0..r {
        out[idx] = m.get(i, i).re;
        idx += 1;
    }
    for i in 0..r {
        for j in (i + 1)..r {
            let z = m.get(i, j);
            out[idx] = s * z.re;
            out[idx + 1] = s * z.im;
            idx += 2;
        }
    }
}

fn unvectorize_hermitian(x: &[f64], r: usize) -> ComplexMatrix {
    let s = 1.0 / 2f64.sqrt();
    let mut bd = DMatrix::<C64>::zeros(r, r);
    let mut idx = 0;
    for i in 0..r {
        bd[(i, i)] = C64::new(x[idx], 0.0);
        idx += 1;
    }
    for i in 0..r {
        for j in (i + 1)..r {
            let z = C64::new(x[idx] * s, x[idx + 1] * s);
            bd[(i, j)] = z;
            bd[(j, i)] = z.conj();
            idx += 2;
        }
    }
    ComplexMatrix::from_dmatrix(bd)
}

fn blocks_to_vec(blocks: &[ComplexMatrix], dims: &[usize]) -> Vec<f64> {
    let mut x = vec![0.0; block_coord_len(dims)];
    let mut off = 0;
    for (b, &m) in blocks.iter().zip(dims) {
        vectorize_hermitian(b, &mut x[off..off + m * m]);
        off += m * m;
    }
    x
}

fn vec_to_blocks(x: &[f64], dims: &[usize]) -> Vec<ComplexMatrix> {
    let mut blocks = Vec::with_capacity(dims.len());
    let mut off = 0;
    for &m in dims {
        blocks.push(unvectorize_hermitian(&x[off..off + m * m], m));
        off += m * m;
    }
    blocks
}

/// Frobenius projection of a Hermitian matrix onto the PSD cone.
fn psd_clip(m: &ComplexMatrix, tol: f64) -> ComplexMatrix {
    let (vals, vecs) = hermitian_eig(&m.hermitian_part(), tol.max(1e-10) * 1e3).unwrap();
    let clipped: Vec<C64> = vals
        .iter()
        .map(|&l| C64::new(l.max(0.0), 0.0))
        .collect();
    vecs.matmul(&ComplexMatrix::diagonal(&clipped))
        .matmul(&vecs.dagger())
}

// ---------------------------------------------------------------------------
// POVM set: ambient Dykstra between the PSD cone and the block-trace affine
// subspace (whose orthogonal projection has closed form)

fn povm_affine_project(z: &ComplexMatrix, dec: &IsotypicDecomposition) -> ComplexMatrix {
    let mut out = z.clone();
    for b in dec.blocks() {
        let target = ComplexMatrix::identity(b.multiplicity).scale_re(b.irrep_dim as f64);
        let delta = b
            .block_trace(z)
            .hermitian_part()
            .sub(&target)
            .scale_re(1.0 / b.irrep_dim as f64);
        out = out.sub(&b.embed(&delta));
    }
    out
}

fn povm_project(
    z: &ComplexMatrix,
    dec: &IsotypicDecomposition,
    cfg: &OptimizeConfig,
) -> Result<ComplexMatrix, OptError> {
    let mut x = z.hermitian_part();
    let mut p = ComplexMatrix::zeros(x.rows(), x.cols());
    let mut q = ComplexMatrix::zeros(x.rows(), x.cols());
    let cap = 20_000;
    let mut residual = f64::INFINITY;
    for _ in 0..cap {
        let y = psd_clip(&x.add(&p), cfg.tol);
        p = x.add(&p).sub(&y);
        let x_next = povm_affine_project(&y.add(&q), dec);
        q = y.add(&q).sub(&x_next);
        residual = x_next.sub(&y).frobenius_norm();
        x = x_next;
        if residual < cfg.feas_tol * 0.1 {
            let out = psd_clip(&x, cfg.tol);
            if check_seed(&out, dec, cfg.feas_tol)?.feasible {
                return Ok(out);
            }
        }
    }
    Err(OptError::ProjectionFailed {
        residual,
        iterations: cap,
    })
}

// ---------------------------------------------------------------------------
// channel set: Dykstra in commutant block coordinates between the product of
// PSD cones and the affine subspace `sum_k L_k(B_k) = K`

struct ChannelCoords {
    dims: Vec<usize>,
    /// Real matrix of the constraint map (input-space Hermitian coordinates
    /// by block coordinates) and its pseudoinverse.
    a: DMatrix<f64>,
    a_pinv: DMatrix<f64>,
    b: DVecF,
}

type DVecF = nalgebra::DVector<f64>;

impl ChannelCoords {
    fn new(spec: &ConvexSetSpec) -> Self {
        let dims: Vec<usize> = spec.dec.blocks().iter().map(|b| b.multiplicity).collect();
        let q = block_coord_len(&dims);
        let p = spec.dim_in * spec.dim_in;
        let shape = spec.shape();
        let mut a = DMatrix::<f64>::zeros(p, q);
        let mut col = 0;
        for (k, &m) in dims.iter().enumerate() {
            for c in 0..m * m {
                let mut e = vec![0.0; m * m];
                e[c] = 1.0;
                let basis = unvectorize_hermitian(&e, m);
                let image = partial_trace(
                    &spec.dec.blocks()[k].embed(&basis),
                    &shape,
                    &[0],
                )
                .unwrap();
                let mut coords = vec![0.0; p];
                vectorize_hermitian(&image, &mut coords);
                for (row, &v) in coords.iter().enumerate() {
                    a[(row, col)] = v;
                }
                col += 1;
            }
        }
        let a_pinv = a
            .clone()
            .svd(true, true)
            .pseudo_inverse(1e-12)
            .expect("pseudo-inverse of constraint map");
        let mut b_coords = vec![0.0; p];
        vectorize_hermitian(spec.target_k.as_ref().unwrap(), &mut b_coords);
        Self {
            dims,
            a,
            a_pinv,
            b: DVecF::from_vec(b_coords),
        }
    }

    fn affine_project(&self, x: &DVecF) -> DVecF {
        x - &self.a_pinv * (&self.a * x - &self.b)
    }

    fn psd_project(&self, x: &DVecF, tol: f64) -> DVecF {
        let blocks = vec_to_blocks(x.as_slice(), &self.dims);
        let clipped: Vec<ComplexMatrix> = blocks.iter().map(|b| psd_clip(b, tol)).collect();
        DVecF::from_vec(blocks_to_vec(&clipped, &self.dims))
    }

    fn dykstra(&self, x0: &DVecF, cfg: &OptimizeConfig) -> Result<DVecF, OptError> {
        let mut x = x0.clone();
        let mut p = DVecF::zeros(x.len());
        let mut q = DVecF::zeros(x.len());
        let cap = 20_000;
        let mut residual = f64::INFINITY;
        for _ in 0..cap {
            let y = self.psd_project(&(&x + &p), cfg.tol);
            p = &x + &p - &y;
            let x_next = self.affine_project(&(&y + &q));
            q = &y + &q - &x_next;
            residual = (&x_next - &y).norm();
            x = x_next;
            if residual < cfg.feas_tol * 0.1 {
                let out = self.psd_project(&x, cfg.tol);
                if (&self.a * &out - &self.b).norm() < cfg.feas_tol {
                    return Ok(out);
                }
            }
        }
        Err(OptError::ProjectionFailed {
            residual,
            iterations: cap,
        })
    }

    fn ambient(&self, x: &DVecF, dec: &IsotypicDecomposition) -> ComplexMatrix {
        let blocks = vec_to_blocks(x.as_slice(), &self.dims);
        let n = dec.carrier_dim();
        blocks
            .iter()
            .zip(dec.blocks())
            .fold(ComplexMatrix::zeros(n, n), |acc, (bm, blk)| {
                acc.add(&blk.embed(bm))
            })
    }

    fn from_ambient(&self, z: &ComplexMatrix, dec: &IsotypicDecomposition) -> DVecF {
        let blocks: Vec<ComplexMatrix> = dec
            .blocks()
            .iter()
            .map(|b| {
                b.block_trace(z)
                    .hermitian_part()
                    .scale_re(1.0 / b.irrep_dim as f64)
            })
            .collect();
        DVecF::from_vec(blocks_to_vec(&blocks, &self.dims))
    }

    fn gradient(&self, w: &ComplexMatrix, dec: &IsotypicDecomposition) -> DVecF {
        // adjoint of embed: <W, Y(I (x) B)Y^dag> = <Tr_{H_k}[Y^dag W Y], B>
        let blocks: Vec<ComplexMatrix> = dec
            .blocks()
            .iter()
            .map(|b| {
                let chart = b.chart(w);
                let shape =
                    TensorShape::new(vec![b.irrep_dim, b.multiplicity]).unwrap();
                partial_trace(&chart, &shape, &[0]).unwrap().hermitian_part()
            })
            .collect();
        DVecF::from_vec(blocks_to_vec(&blocks, &self.dims))
    }
}

/// Projects a Hermitian `z` onto the feasible set within `cfg.feas_tol`.
pub fn project_feasible(
    z: &ComplexMatrix,
    set: &ConvexSetSpec,
    cfg: &OptimizeConfig,
) -> Result<ComplexMatrix, OptError> {
    if z.rows() != set.ambient_dim() || z.cols() != set.ambient_dim() {
        return Err(OptError::Mat(MatError::DimensionMismatch(format!(
            "point must be {0}x{0}",
            set.ambient_dim()
        ))));
    }
    if set.is_feasible(z, cfg.feas_tol) {
        return Ok(z.clone());
    }
    match set.kind {
        ConvexSetKind::PovmSeeds => povm_project(&z.hermitian_part(), &set.dec, cfg),
        ConvexSetKind::CovariantChannels => {
            let coords = ChannelCoords::new(set);
            let x0 = coords.from_ambient(&set.dec.twirl(&z.hermitian_part()), &set.dec);
            let x = coords.dykstra(&x0, cfg)?;
            Ok(coords.ambient(&x, &set.dec))
        }
    }
}

/// Largest step along a feasible direction before the boundary, found by
/// doubling from a known-feasible step and bisecting.
fn max_feasible_step(
    z: &ComplexMatrix,
    dir: &ComplexMatrix,
    t0: f64,
    set: &ConvexSetSpec,
    feas_tol: f64,
) -> f64 {
    let feasible = |t: f64| set.is_feasible(&z.add(&dir.scale_re(t)), feas_tol);
    if !feasible(t0) {
        return 0.0;
    }
    let mut lo = t0;
    let mut hi = t0;
    for _ in 0..60 {
        let next = hi * 2.0;
        if feasible(next) {
            lo = next;
            hi = next;
        } else {
            hi = next;
            break;
        }
    }
    if hi > lo {
        for _ in 0..50 {
            let mid = 0.5 * (lo + hi);
            if feasible(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    lo
}

fn extremality_report(
    z: &ComplexMatrix,
    set: &ConvexSetSpec,
    tol: f64,
) -> Result<ExtremalityReport, OptError> {
    match set.kind {
        ConvexSetKind::PovmSeeds => {
            let seed = PovmSeed::with_decomposition(z.clone(), set.dec.clone(), tol.max(1e-7))?;
            Ok(povm_extremality(&seed, tol)?)
        }
        ConvexSetKind::CovariantChannels => {
            let choi = ChoiOperator::new(z.clone(), set.dim_in, set.dim_out)?;
            // lenient PSD threshold: boundary iterates carry projection noise
            let cov = project_covariant(&choi, &set.dec, tol.max(1e-7))?;
            Ok(qo_extremality(&cov, tol)?)
        }
    }
}

/// Walks along witness directions (objective-neutral at an optimum, sign
/// chosen to not decrease the objective) to the boundary until the point is
/// extremal or the round budget is exhausted.
fn purify(
    mut z: ComplexMatrix,
    w: &CostOperator,
    set: &ConvexSetSpec,
    cfg: &OptimizeConfig,
) -> Result<(ComplexMatrix, ExtremalityReport), OptError> {
    let mut report = extremality_report(&z, set, cfg.tol)?;
    for _ in 0..cfg.purify_rounds {
        if report.is_extremal {
            break;
        }
        let (dir, t0) = match (&report.witness, report.witness_step) {
            (Some(d), Some(t)) => (d.clone(), t),
            _ => break,
        };
        let slope = w.matrix().hs_inner(&dir).re;
        let dir = if slope < 0.0 { dir.scale_re(-1.0) } else { dir };
        let t = max_feasible_step(&z, &dir, t0, set, cfg.feas_tol);
        if t <= 0.0 {
            break;
        }
        let candidate = z.add(&dir.scale_re(t));
        if w.value(&candidate) + 1e-9 * w.matrix().frobenius_norm().max(1.0) < w.value(&z) {
            break;
        }
        z = candidate;
        report = extremality_report(&z, set, cfg.tol)?;
    }
    Ok((z, report))
}

/// Maximizes `Tr[W Z]` over the set by seeded multi-restart projected
/// gradient ascent; ties between restarts resolve to the lowest index.
pub fn maximize_linear(
    w: &CostOperator,
    set: &ConvexSetSpec,
    cfg: &OptimizeConfig,
) -> Result<OptimizeOutcome, OptError> {
    if w.matrix().rows() != set.ambient_dim() {
        return Err(OptError::Mat(MatError::DimensionMismatch(format!(
            "cost operator must be {0}x{0}",
            set.ambient_dim()
        ))));
    }
    let wnorm = w.matrix().opnorm();
    let canonical = project_feasible(&set.canonical_point(), set, cfg)?;
    if wnorm < 1e-14 {
        return Ok(OptimizeOutcome {
            value: w.value(&canonical),
            maximizer: canonical,
            iterations: 0,
            converged: true,
            restart: 0,
            extremality: None,
        });
    }

    let mut best: Option<OptimizeOutcome> = None;
    for restart in 0..cfg.restarts.max(1) {
        let start = if restart == 0 {
            canonical.clone()
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(restart as u64));
            let n = set.ambient_dim();
            let noise = ComplexMatrix::from_fn(n, n, |_, _| {
                C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            })
            .hermitian_part();
            project_feasible(&canonical.add(&noise), set, cfg)?
        };
        let (z, value, iterations, converged) = ascend(w, set, cfg, start, wnorm)?;
        let better = match &best {
            None => true,
            Some(b) => value > b.value + 1e-10 * wnorm.max(1.0),
        };
        if better {
            best = Some(OptimizeOutcome {
                maximizer: z,
                value,
                iterations,
                converged,
                restart,
                extremality: None,
            });
        }
    }
    let mut out = best.unwrap();
    let (purified, report) = purify(out.maximizer.clone(), w, set, cfg)?;
    out.value = w.value(&purified);
    out.maximizer = purified;
    out.extremality = Some(report);
    Ok(out)
}

fn ascend(
    w: &CostOperator,
    set: &ConvexSetSpec,
    cfg: &OptimizeConfig,
    start: ComplexMatrix,
    wnorm: f64,
) -> Result<(ComplexMatrix, f64, usize, bool), OptError> {
    match set.kind {
        ConvexSetKind::PovmSeeds => {
            let step0 = 1.0 / wnorm;
            let mut z = start;
            let mut f = w.value(&z);
            let mut step = step0;
            let mut flat = 0usize;
            let mut iterations = 0usize;
            while iterations < cfg.max_iterations {
                iterations += 1;
                let trial = povm_project(&z.add(&w.matrix().scale_re(step)), &set.dec, cfg)?;
                let f_new = w.value(&trial);
                if f_new + 1e-12 * wnorm.max(1.0) < f {
                    step *= 0.5;
                    if step < 1e-12 * step0 {
                        return Ok((z, f, iterations, true));
                    }
                    continue;
                }
                let rel = (f_new - f).abs() / f_new.abs().max(1.0);
                flat = if rel < 1e-8 { flat + 1 } else { 0 };
                z = trial;
                f = f_new;
                if flat >= cfg.flat_window {
                    return Ok((z, f, iterations, true));
                }
            }
            Ok((z, f, iterations, false))
        }
        ConvexSetKind::CovariantChannels => {
            let coords = ChannelCoords::new(set);
            let g = coords.gradient(w.matrix(), &set.dec);
            let gnorm = g.norm().max(1e-14);
            let step0 = 1.0 / gnorm;
            let mut x = coords.from_ambient(&start, &set.dec);
            let mut f = g.dot(&x);
            let mut step = step0;
            let mut flat = 0usize;
            let mut iterations = 0usize;
            while iterations < cfg.max_iterations {
                iterations += 1;
                let trial = coords.dykstra(&(&x + &g * step), cfg)?;
                let f_new = g.dot(&trial);
                if f_new + 1e-12 * gnorm.max(1.0) < f {
                    step *= 0.5;
                    if step < 1e-12 * step0 {
                        break;
                    }
                    continue;
                }
                let rel = (f_new - f).abs() / f_new.abs().max(1.0);
                flat = if rel < 1e-8 { flat + 1 } else { 0 };
                x = trial;
                f = f_new;
                if flat >= cfg.flat_window {
                    let z = coords.ambient(&x, &set.dec);
                    let v = w.value(&z);
                    return Ok((z, v, iterations, true));
                }
            }
            let z = coords.ambient(&x, &set.dec);
            let v = w.value(&z);
            Ok((z, v, iterations, iterations < cfg.max_iterations))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::builtin_examples;
    use crate::numkernel::max_entangled_vec;
    use crate::reps::Representation;

    fn u1_set(weights: Vec<i64>) -> ConvexSetSpec {
        let dec = Representation::u1_weights(weights)
            .unwrap()
            .isotypic_decompose(1e-9)
            .unwrap();
        ConvexSetSpec::povm(dec)
    }

    #[test]
    fn zero_cost_returns_feasible_point() {
        let set = u1_set(vec![0, 1, 2]);
        let w = CostOperator::new(ComplexMatrix::zeros(3, 3)).unwrap();
        let out = maximize_linear(&w, &set, &OptimizeConfig::default()).unwrap();
        assert!(out.converged);
        assert!(out.value.abs() < 1e-12);
        assert!(set.is_feasible(&out.maximizer, 1e-7));
    }

    #[test]
    fn project_feasible_fixed_point_and_zero() {
        let set = u1_set(vec![0, 1, 2]);
        let cfg = OptimizeConfig::default();
        let id = ComplexMatrix::identity(3);
        let back = project_feasible(&id, &set, &cfg).unwrap();
        assert!(back.sub(&id).frobenius_norm() < 1e-7);
        // zero projects to a feasible seed with unit diagonal blocks
        let z = project_feasible(&ComplexMatrix::zeros(3, 3), &set, &cfg).unwrap();
        assert!(set.is_feasible(&z, 1e-7));
    }

    #[test]
    fn phase_seed_overlap_optimum() {
        // distinct weights: feasible seeds are unit-diagonal PSD matrices;
        // max of <e|Xi|e>/2 over them is 2, attained at the all-ones seed
        let set = u1_set(vec![0, 1]);
        let e_hat = ComplexMatrix::from_real_row_slice(2, 1, &[1.0, 1.0])
            .scale_re(1.0 / 2f64.sqrt());
        let w = CostOperator::new(e_hat.matmul(&e_hat.dagger())).unwrap();
        let out = maximize_linear(&w, &set, &OptimizeConfig::default()).unwrap();
        assert!((out.value - 2.0).abs() < 1e-6, "value {}", out.value);
        let target = ComplexMatrix::from_real_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(out.maximizer.sub(&target).frobenius_norm() < 1e-4);
        let rep = out.extremality.unwrap();
        assert!(rep.is_extremal);
    }

    #[test]
    fn channel_projection_feasible_on_cloning_space() {
        let ex = builtin_examples("clone12", 2).unwrap();
        let dec = ex.choi.decomposition().clone();
        let set = ConvexSetSpec::channels(dec, 2, 4, None).unwrap();
        let cfg = OptimizeConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let z = ComplexMatrix::from_fn(8, 8, |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
        .hermitian_part();
        let proj = project_feasible(&z, &set, &cfg).unwrap();
        assert!(set.is_feasible(&proj, 1e-6));
        let choi = ChoiOperator::new(proj, 2, 4).unwrap();
        assert!(choi.check_tni(1e-6).identity_deviation < 1e-6);
    }

    #[test]
    fn cloning_fidelity_optimum() {
        let ex = builtin_examples("clone12", 2).unwrap();
        let dec = ex.choi.decomposition().clone();
        let set = ConvexSetSpec::channels(dec, 2, 4, None).unwrap();
        let (wm, expected) = ex.fidelity.clone().unwrap();
        let w = CostOperator::new(wm).unwrap();
        let out = maximize_linear(&w, &set, &OptimizeConfig::default()).unwrap();
        assert!(
            (out.value - expected).abs() < 1e-6,
            "value {} vs {}",
            out.value,
            expected
        );
        let report = out.extremality.unwrap();
        assert!(report.is_extremal);
        // never exceeds the analytic optimum
        assert!(out.value <= expected + 1e-6);
    }

    #[test]
    fn determinism() {
        let set = u1_set(vec![0, 1, 2]);
        let e = ComplexMatrix::from_real_row_slice(3, 1, &[1.0, 1.0, 1.0]);
        let w = CostOperator::new(e.matmul(&e.dagger()).scale_re(1.0 / 3.0)).unwrap();
        let cfg = OptimizeConfig::default();
        let a = maximize_linear(&w, &set, &cfg).unwrap();
        let b = maximize_linear(&w, &set, &cfg).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.restart, b.restart);
        assert!(a.maximizer.sub(&b.maximizer).frobenius_norm() == 0.0);
    }

    #[test]
    fn identity_cost_over_sud_channels() {
        // V = U, d = 2: the feasible trace-preserving covariant operators are
        // the segment between |I><I| and the depolarizing operator; cost
        // W = |I><I| picks the identity channel with value Tr[|I><I|^2] = 4
        let d = 2;
        let rep = crate::reps::Representation::su_d_tensor(
            d,
            crate::reps::SUdVariant::UUstar,
        )
        .unwrap();
        let dec = rep.isotypic_decompose(1e-9).unwrap();
        let set = ConvexSetSpec::channels(dec, d, d, None).unwrap();
        let bell = max_entangled_vec(d);
        let w = CostOperator::new(bell.matmul(&bell.dagger())).unwrap();
        let out = maximize_linear(&w, &set, &OptimizeConfig::default()).unwrap();
        assert!((out.value - 4.0).abs() < 1e-6, "value {}", out.value);
        assert!(out.extremality.unwrap().is_extremal);
    }
}
