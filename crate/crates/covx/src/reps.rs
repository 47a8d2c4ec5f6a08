//! Unitary group representations and their isotypic (Wedderburn)
//! decomposition into blocks `H_k (x) C^{m_k}`, with explicit aligning
//! isometries for the multiplicity spaces.
//!
//! Three kinds of representation are supported: U(1) actions given by integer
//! weights, explicit finite groups given as closed lists of unitaries, and the
//! two analytic SU(d) tensor-square cases (`U (x) U*` and `U* (x) U*`).

use num_complex::Complex64 as C64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numkernel::{
    hermitian_eig, partial_trace, ComplexMatrix, MatError, TensorShape,
};

/// Deterministic RNG seed used by the finite-group splitting procedure.
/// (Mnemonic "covar"; hex digits only go to F, so the V became a 5.)
pub const DEFAULT_SEED: u64 = 0xC0_5A_17;

const SUD_SAMPLES: usize = 6;
const RETRY_BUDGET: usize = 6;

#[derive(Debug, Error)]
pub enum RepError {
    #[error(transparent)]
    Mat(#[from] MatError),
    #[error("invalid representation: {0}")]
    Invalid(String),
    #[error("unsupported combination: {0}")]
    UnsupportedCombination(String),
    #[error("group element does not match representation kind: {0}")]
    BadElement(String),
    #[error("isotypic decomposition failed after {retries} retries (residual {residual:.3e})")]
    DecompositionFailed { retries: usize, residual: f64 },
}

/// Which SU(d) tensor-square representation is meant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SUdVariant {
    /// `V = U`: the carrier representation is `U_g (x) U_g*` on `C^{d^2}`.
    #[serde(rename = "u_ustar")]
    UUstar,
    /// `V = U*`: the carrier representation is `U_g* (x) U_g*`.
    #[serde(rename = "ustar_ustar")]
    UstarUstar,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum RepKind {
    #[serde(rename = "u1_weights")]
    U1Weights { weights: Vec<i64> },
    #[serde(rename = "finite")]
    FiniteGroup { unitaries: Vec<ComplexMatrix> },
    #[serde(rename = "su_d_tensor")]
    SUdTensor { d: usize, variant: SUdVariant },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Representation {
    kind: RepKind,
}

/// A point of the group: an angle for U(1), a list index for finite groups.
#[derive(Clone, Copy, Debug)]
pub enum GroupElement {
    Angle(f64),
    Index(usize),
}

impl Representation {
    pub fn u1_weights(weights: Vec<i64>) -> Result<Self, RepError> {
        if weights.is_empty() {
            return Err(RepError::Invalid("weight list must be nonempty".into()));
        }
        Ok(Self {
            kind: RepKind::U1Weights { weights },
        })
    }

    /// Builds a finite-group representation; the list must contain the
    /// identity and be closed under products within `tol`.
    pub fn finite_group(unitaries: Vec<ComplexMatrix>, tol: f64) -> Result<Self, RepError> {
        if unitaries.is_empty() {
            return Err(RepError::Invalid("unitary list must be nonempty".into()));
        }
        let n = unitaries[0].rows();
        for u in &unitaries {
            if u.rows() != n || u.cols() != n {
                return Err(RepError::Invalid("unitaries must share one dimension".into()));
            }
            if !u.is_unitary(tol.max(1e-12) * 1e3) {
                return Err(RepError::Invalid("list entry is not unitary".into()));
            }
        }
        let close_tol = tol.max(1e-12) * 1e3 * (n as f64);
        let find = |m: &ComplexMatrix| -> Option<usize> {
            unitaries
                .iter()
                .position(|u| u.sub(m).frobenius_norm() <= close_tol)
        };
        if find(&ComplexMatrix::identity(n)).is_none() {
            return Err(RepError::Invalid("identity element missing".into()));
        }
        for a in &unitaries {
            for b in &unitaries {
                if find(&a.matmul(b)).is_none() {
                    return Err(RepError::Invalid("list is not closed under products".into()));
                }
            }
            if find(&a.dagger()).is_none() {
                return Err(RepError::Invalid("list is not closed under inverses".into()));
            }
        }
        Ok(Self {
            kind: RepKind::FiniteGroup { unitaries },
        })
    }

    /// Finite-group constructor that trusts the caller (used internally for
    /// element-wise transforms of already-validated lists).
    fn finite_group_unchecked(unitaries: Vec<ComplexMatrix>) -> Self {
        Self {
            kind: RepKind::FiniteGroup { unitaries },
        }
    }

    pub fn su_d_tensor(d: usize, variant: SUdVariant) -> Result<Self, RepError> {
        if d < 2 {
            return Err(RepError::Invalid("SU(d) requires d >= 2".into()));
        }
        Ok(Self {
            kind: RepKind::SUdTensor { d, variant },
        })
    }

    pub fn kind(&self) -> &RepKind {
        &self.kind
    }

    /// Carrier dimension.
    pub fn dim(&self) -> usize {
        match &self.kind {
            RepKind::U1Weights { weights } => weights.len(),
            RepKind::FiniteGroup { unitaries } => unitaries[0].rows(),
            RepKind::SUdTensor { d, .. } => d * d,
        }
    }

    /// Carrier unitary for an explicit group element. Not available for the
    /// analytic SU(d) cases, which are handled by sampling.
    pub fn unitary(&self, g: &GroupElement) -> Result<ComplexMatrix, RepError> {
        match (&self.kind, g) {
            (RepKind::U1Weights { weights }, GroupElement::Angle(phi)) => {
                Ok(ComplexMatrix::diagonal(
                    &weights
                        .iter()
                        .map(|&w| C64::from_polar(1.0, w as f64 * phi))
                        .collect::<Vec<_>>(),
                ))
            }
            (RepKind::FiniteGroup { unitaries }, GroupElement::Index(i)) => unitaries
                .get(*i)
                .cloned()
                .ok_or_else(|| RepError::BadElement(format!("index {i} out of range"))),
            (RepKind::U1Weights { .. }, _) => {
                Err(RepError::BadElement("U(1) element must be an angle".into()))
            }
            (RepKind::FiniteGroup { .. }, _) => Err(RepError::BadElement(
                "finite-group element must be an index".into(),
            )),
            (RepKind::SUdTensor { .. }, _) => Err(RepError::BadElement(
                "SU(d) tensor representations have no enumerable elements".into(),
            )),
        }
    }

    /// Unitaries whose equal-weight average realizes the Haar integral
    /// exactly for U(1) (trigonometric quadrature at `4*max|weight| + 1`
    /// angles) and finite groups (the full list). For SU(d) the returned
    /// sample is a seeded random draw, suitable only for residual checks.
    pub fn sample_unitaries(&self, seed: u64) -> Vec<ComplexMatrix> {
        match &self.kind {
            RepKind::U1Weights { weights } => {
                let wmax = weights.iter().map(|w| w.unsigned_abs()).max().unwrap_or(0);
                let n = (4 * wmax as usize) + 1;
                (0..n)
                    .map(|j| {
                        let phi = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
                        self.unitary(&GroupElement::Angle(phi)).unwrap()
                    })
                    .collect()
            }
            RepKind::FiniteGroup { unitaries } => unitaries.clone(),
            RepKind::SUdTensor { d, variant } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..SUD_SAMPLES)
                    .map(|_| {
                        let u = random_special_unitary(&mut rng, *d);
                        match variant {
                            SUdVariant::UUstar => u.kron(&u.conj()),
                            SUdVariant::UstarUstar => u.conj().kron(&u.conj()),
                        }
                    })
                    .collect()
            }
        }
    }

    /// Whether `sample_unitaries` yields an exact quadrature for the Haar
    /// average (true for U(1) and finite groups).
    pub fn has_exact_quadrature(&self) -> bool {
        !matches!(self.kind, RepKind::SUdTensor { .. })
    }

    /// Tensor product of two representations of the same group.
    pub fn tensor(&self, other: &Representation) -> Result<Representation, RepError> {
        match (&self.kind, &other.kind) {
            (RepKind::U1Weights { weights: w1 }, RepKind::U1Weights { weights: w2 }) => {
                let mut weights = Vec::with_capacity(w1.len() * w2.len());
                for a in w1 {
                    for b in w2 {
                        weights.push(a + b);
                    }
                }
                Representation::u1_weights(weights)
            }
            (RepKind::FiniteGroup { unitaries: u1 }, RepKind::FiniteGroup { unitaries: u2 }) => {
                if u1.len() != u2.len() {
                    return Err(RepError::UnsupportedCombination(
                        "finite groups of different order".into(),
                    ));
                }
                Ok(Representation::finite_group_unchecked(
                    u1.iter().zip(u2).map(|(a, b)| a.kron(b)).collect(),
                ))
            }
            _ => Err(RepError::UnsupportedCombination(
                "tensor requires two U(1) or two same-order finite-group representations".into(),
            )),
        }
    }

    /// Entrywise complex conjugate representation.
    pub fn conjugate(&self) -> Result<Representation, RepError> {
        match &self.kind {
            RepKind::U1Weights { weights } => {
                Representation::u1_weights(weights.iter().map(|w| -w).collect())
            }
            RepKind::FiniteGroup { unitaries } => Ok(Representation::finite_group_unchecked(
                unitaries.iter().map(|u| u.conj()).collect(),
            )),
            RepKind::SUdTensor { .. } => Err(RepError::UnsupportedCombination(
                "conjugate of an SU(d) tensor-square case is not representable here".into(),
            )),
        }
    }

    /// Projection of `z` onto the commutant: the Haar average of
    /// `U_g^dag z U_g`. Exact for every kind: finite groups average over the
    /// list, U(1) zeroes matrix elements between unequal weights, SU(d) uses
    /// the two-block projector formula.
    pub fn twirl(&self, z: &ComplexMatrix) -> Result<ComplexMatrix, RepError> {
        if !z.is_square() || z.rows() != self.dim() {
            return Err(RepError::Mat(MatError::DimensionMismatch(format!(
                "twirl input must be {0}x{0}",
                self.dim()
            ))));
        }
        match &self.kind {
            RepKind::U1Weights { weights } => Ok(ComplexMatrix::from_fn(
                z.rows(),
                z.cols(),
                |i, j| {
                    if weights[i] == weights[j] {
                        z.get(i, j)
                    } else {
                        C64::ZERO
                    }
                },
            )),
            RepKind::FiniteGroup { unitaries } => {
                let mut acc = ComplexMatrix::zeros(z.rows(), z.cols());
                for u in unitaries {
                    acc = acc.add(&u.dagger().matmul(z).matmul(u));
                }
                Ok(acc.scale_re(1.0 / unitaries.len() as f64))
            }
            RepKind::SUdTensor { .. } => {
                let dec = self.isotypic_decompose(1e-12)?;
                Ok(dec.twirl(z))
            }
        }
    }

    /// Computes the isotypic decomposition with the default RNG seed.
    pub fn isotypic_decompose(&self, tol: f64) -> Result<IsotypicDecomposition, RepError> {
        self.isotypic_decompose_seeded(tol, DEFAULT_SEED)
    }

    pub fn isotypic_decompose_seeded(
        &self,
        tol: f64,
        seed: u64,
    ) -> Result<IsotypicDecomposition, RepError> {
        match &self.kind {
            RepKind::U1Weights { weights } => Ok(decompose_u1(weights)),
            RepKind::SUdTensor { d, variant } => Ok(decompose_sud(*d, *variant)),
            RepKind::FiniteGroup { unitaries } => decompose_finite(unitaries, tol, seed),
        }
    }
}

/// Label of an equivalence class of irreducible components.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BlockLabel {
    /// U(1) weight.
    Weight(i64),
    /// Finite-group / SU(d) class, numbered by first occurrence.
    Class(usize),
}

impl std::fmt::Display for BlockLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BlockLabel::Weight(w) => write!(f, "{w}"),
            BlockLabel::Class(c) => write!(f, "c{c}"),
        }
    }
}

/// One isotypic block `H_k (x) C^{m_k}` together with the aligning isometry
/// `Y_k` into the carrier. Column `a * m_k + i` of `Y_k` is the image of
/// `|a> (x) |i>` (irrep factor major).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IsotypicBlock {
    pub label: BlockLabel,
    pub irrep_dim: usize,
    pub multiplicity: usize,
    pub isometry: ComplexMatrix,
}

impl IsotypicBlock {
    pub fn block_dim(&self) -> usize {
        self.irrep_dim * self.multiplicity
    }

    /// Orthogonal projector `P_k = Y_k Y_k^dag` on the carrier.
    pub fn projector(&self) -> ComplexMatrix {
        self.isometry.matmul(&self.isometry.dagger())
    }

    /// `Y_k^dag M Y_k`, the compression of a carrier operator to the chart.
    pub fn chart(&self, m: &ComplexMatrix) -> ComplexMatrix {
        self.isometry.dagger().matmul(m).matmul(&self.isometry)
    }

    /// `Tr_{H_k}(P_k M P_k)` as an `m_k x m_k` matrix in the chart.
    pub fn block_trace(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let shape = TensorShape::new(vec![self.irrep_dim, self.multiplicity]).unwrap();
        partial_trace(&self.chart(m), &shape, &[0]).unwrap()
    }

    /// `Y_k (I_{d_k} (x) B) Y_k^dag` for an `m_k x m_k` block operator.
    pub fn embed(&self, b: &ComplexMatrix) -> ComplexMatrix {
        let lifted = ComplexMatrix::identity(self.irrep_dim).kron(b);
        self.isometry.matmul(&lifted).matmul(&self.isometry.dagger())
    }
}

/// The Wedderburn data of a representation: blocks `(k, d_k, m_k)` with
/// aligning isometries, satisfying `sum_k d_k m_k = dim` and
/// `sum_k Y_k Y_k^dag = I`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IsotypicDecomposition {
    blocks: Vec<IsotypicBlock>,
    carrier_dim: usize,
}

impl IsotypicDecomposition {
    /// Assembles a decomposition from explicit blocks, validating the
    /// structural invariants (`sum d_k m_k = dim`, isometries orthonormal and
    /// jointly complete).
    pub fn from_blocks(
        blocks: Vec<IsotypicBlock>,
        carrier_dim: usize,
        tol: f64,
    ) -> Result<Self, RepError> {
        let total: usize = blocks.iter().map(|b| b.block_dim()).sum();
        if total != carrier_dim {
            return Err(RepError::Invalid(format!(
                "block dimensions sum to {total}, carrier is {carrier_dim}"
            )));
        }
        let dec = Self {
            blocks,
            carrier_dim,
        };
        let residual = dec.resolution_residual();
        if residual > tol.max(1e-10) * carrier_dim as f64 {
            return Err(RepError::Invalid(format!(
                "isometries fail resolution of identity (residual {residual:.3e})"
            )));
        }
        Ok(dec)
    }

    pub fn blocks(&self) -> &[IsotypicBlock] {
        &self.blocks
    }

    pub fn carrier_dim(&self) -> usize {
        self.carrier_dim
    }

    /// `sum_k m_k^2`, the right-hand side of the rank bound.
    pub fn multiplicity_square_sum(&self) -> usize {
        self.blocks.iter().map(|b| b.multiplicity * b.multiplicity).sum()
    }

    /// Exact commutant projection through the block structure:
    /// `sum_k Y_k (I (x) d_k^{-1} Tr_{H_k}[Y_k^dag Z Y_k]) Y_k^dag`.
    pub fn twirl(&self, z: &ComplexMatrix) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.carrier_dim, self.carrier_dim);
        for b in &self.blocks {
            let t = b.block_trace(z).scale_re(1.0 / b.irrep_dim as f64);
            acc = acc.add(&b.embed(&t));
        }
        acc
    }

    /// `sum_k ||P_k P_j||`-style structural residual: how far the projectors
    /// are from an orthogonal resolution of identity.
    pub fn resolution_residual(&self) -> f64 {
        let mut sum = ComplexMatrix::zeros(self.carrier_dim, self.carrier_dim);
        let mut worst: f64 = 0.0;
        for b in &self.blocks {
            let ytxy = b.isometry.dagger().matmul(&b.isometry);
            worst = worst.max(
                ytxy.sub(&ComplexMatrix::identity(b.block_dim()))
                    .frobenius_norm(),
            );
            sum = sum.add(&b.projector());
        }
        worst.max(sum.sub(&ComplexMatrix::identity(self.carrier_dim)).frobenius_norm())
    }

    /// Worst-case covariance-alignment residual
    /// `||U_g Y_k - Y_k (pi_k(g) (x) I)||` over the supplied group elements,
    /// with `pi_k` read off the first multiplicity copy.
    pub fn alignment_residual(&self, elements: &[ComplexMatrix]) -> f64 {
        let mut worst: f64 = 0.0;
        for b in &self.blocks {
            let (d, m) = (b.irrep_dim, b.multiplicity);
            let first_copy =
                ComplexMatrix::from_fn(self.carrier_dim, d, |r, a| b.isometry.get(r, a * m));
            for u in elements {
                let pi = first_copy.dagger().matmul(u).matmul(&first_copy);
                let lhs = u.matmul(&b.isometry);
                let rhs = b.isometry.matmul(&pi.kron(&ComplexMatrix::identity(m)));
                worst = worst.max(lhs.sub(&rhs).frobenius_norm());
            }
        }
        worst
    }
}

// ---------------------------------------------------------------------------
// decomposition backends
// ---------------------------------------------------------------------------

fn basis_column(dim: usize, idx: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim, 1, |r, _| {
        if r == idx {
            C64::new(1.0, 0.0)
        } else {
            C64::ZERO
        }
    })
}

fn decompose_u1(weights: &[i64]) -> IsotypicDecomposition {
    let dim = weights.len();
    let mut distinct: Vec<i64> = weights.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    let blocks = distinct
        .into_iter()
        .map(|w| {
            let indices: Vec<usize> = (0..dim).filter(|&j| weights[j] == w).collect();
            let m = indices.len();
            let isometry = ComplexMatrix::from_fn(dim, m, |r, c| {
                if r == indices[c] {
                    C64::new(1.0, 0.0)
                } else {
                    C64::ZERO
                }
            });
            IsotypicBlock {
                label: BlockLabel::Weight(w),
                irrep_dim: 1,
                multiplicity: m,
                isometry,
            }
        })
        .collect();
    IsotypicDecomposition {
        blocks,
        carrier_dim: dim,
    }
}

fn decompose_sud(d: usize, variant: SUdVariant) -> IsotypicDecomposition {
    let dim = d * d;
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let blocks = match variant {
        SUdVariant::UUstar => {
            // invariant line |I>/sqrt(d), plus its orthocomplement
            let v = crate::numkernel::max_entangled_vec(d).scale_re(1.0 / (d as f64).sqrt());
            let mut cols: Vec<ComplexMatrix> = vec![v.clone()];
            for idx in 0..dim {
                let mut cand = basis_column(dim, idx);
                for c in &cols {
                    let overlap = c.hs_inner(&cand);
                    cand = cand.sub(&c.scale(overlap));
                }
                let norm = cand.frobenius_norm();
                if norm > 0.5 {
                    cols.push(cand.scale_re(1.0 / norm));
                }
            }
            debug_assert_eq!(cols.len(), dim);
            let complement = ComplexMatrix::from_fn(dim, dim - 1, |r, c| cols[c + 1].get(r, 0));
            vec![
                IsotypicBlock {
                    label: BlockLabel::Class(0),
                    irrep_dim: 1,
                    multiplicity: 1,
                    isometry: v,
                },
                IsotypicBlock {
                    label: BlockLabel::Class(1),
                    irrep_dim: dim - 1,
                    multiplicity: 1,
                    isometry: complement,
                },
            ]
        }
        SUdVariant::UstarUstar => {
            // symmetric / antisymmetric split P_+- = (I +- E)/2
            let mut sym_cols = Vec::new();
            let mut anti_cols = Vec::new();
            for i in 0..d {
                sym_cols.push(basis_column(dim, i * d + i));
                for j in (i + 1)..d {
                    let plus = basis_column(dim, i * d + j)
                        .add(&basis_column(dim, j * d + i))
                        .scale_re(inv_sqrt2);
                    let minus = basis_column(dim, i * d + j)
                        .sub(&basis_column(dim, j * d + i))
                        .scale_re(inv_sqrt2);
                    sym_cols.push(plus);
                    anti_cols.push(minus);
                }
            }
            let pack = |cols: &[ComplexMatrix]| {
                ComplexMatrix::from_fn(dim, cols.len(), |r, c| cols[c].get(r, 0))
            };
            vec![
                IsotypicBlock {
                    label: BlockLabel::Class(0),
                    irrep_dim: d * (d + 1) / 2,
                    multiplicity: 1,
                    isometry: pack(&sym_cols),
                },
                IsotypicBlock {
                    label: BlockLabel::Class(1),
                    irrep_dim: d * (d - 1) / 2,
                    multiplicity: 1,
                    isometry: pack(&anti_cols),
                },
            ]
        }
    };
    IsotypicDecomposition {
        blocks,
        carrier_dim: dim,
    }
}

fn random_hermitian(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    let a = ComplexMatrix::from_fn(n, n, |_, _| {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    a.hermitian_part()
}

fn random_special_unitary(rng: &mut impl Rng, d: usize) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(d, d, |_, _| {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let qr = g.as_dmatrix().clone().qr();
    let q = qr.q();
    let det = q.determinant();
    // det has unit modulus; divide each column by det^{1/d} to land in SU(d)
    let phase = C64::from_polar(1.0, -det.arg() / d as f64);
    ComplexMatrix::from_dmatrix(q).scale(phase)
}

/// Average of `rho(g)^dag h rho(g)` for a restricted representation given as
/// explicit matrices.
fn restricted_twirl(rhos: &[ComplexMatrix], h: &ComplexMatrix) -> ComplexMatrix {
    let mut acc = ComplexMatrix::zeros(h.rows(), h.cols());
    for r in rhos {
        acc = acc.add(&r.dagger().matmul(h).matmul(r));
    }
    acc.scale_re(1.0 / rhos.len() as f64)
}

/// Splits eigenvalue-sorted columns into clusters separated by a relative gap.
fn eigen_clusters(vals: &[f64]) -> Vec<Vec<usize>> {
    let scale = vals
        .iter()
        .fold(0.0f64, |a, &b| a.max(b.abs()))
        .max(1.0);
    let gap = 1e-7 * scale;
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for i in 0..vals.len() {
        match clusters.last_mut() {
            Some(c) if vals[i] - vals[*c.last().unwrap()] <= gap => c.push(i),
            _ => clusters.push(vec![i]),
        }
    }
    clusters
}

fn select_columns(m: &ComplexMatrix, cols: &[usize]) -> ComplexMatrix {
    ComplexMatrix::from_fn(m.rows(), cols.len(), |r, c| m.get(r, cols[c]))
}

/// Recursively splits an invariant subspace (orthonormal basis `basis`) into
/// minimal invariant subspaces, using twirled random Hermitian operators.
fn split_minimal(
    basis: ComplexMatrix,
    unitaries: &[ComplexMatrix],
    rng: &mut impl Rng,
    out: &mut Vec<ComplexMatrix>,
) -> Result<(), RepError> {
    let d = basis.cols();
    if d == 0 {
        return Ok(());
    }
    let rhos: Vec<ComplexMatrix> = unitaries
        .iter()
        .map(|u| basis.dagger().matmul(u).matmul(&basis))
        .collect();
    let t = restricted_twirl(&rhos, &random_hermitian(rng, d));
    let mean = t.trace().re / d as f64;
    let dev = t
        .sub(&ComplexMatrix::identity(d).scale_re(mean))
        .frobenius_norm();
    if dev <= 1e-8 * t.frobenius_norm().max(1.0) {
        out.push(basis);
        return Ok(());
    }
    let (vals, vecs) = hermitian_eig(&t, 1e-8)?;
    let clusters = eigen_clusters(&vals);
    if clusters.len() == 1 {
        // non-scalar commutant element failed to separate; caller retries
        return Err(RepError::DecompositionFailed {
            retries: 0,
            residual: dev,
        });
    }
    for cluster in clusters {
        let sub = basis.matmul(&select_columns(&vecs, &cluster));
        split_minimal(sub, unitaries, rng, out)?;
    }
    Ok(())
}

/// Intertwiner from the subrep on `from` to the subrep on `to`, obtained by
/// twirling a random map. Zero (within tolerance) iff inequivalent.
fn intertwiner(
    from: &ComplexMatrix,
    to: &ComplexMatrix,
    unitaries: &[ComplexMatrix],
    rng: &mut impl Rng,
) -> ComplexMatrix {
    let d = from.cols();
    let m = ComplexMatrix::from_fn(to.cols(), d, |_, _| {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let mut acc = ComplexMatrix::zeros(to.cols(), d);
    for u in unitaries {
        let rho_from = from.dagger().matmul(u).matmul(from);
        let rho_to = to.dagger().matmul(u).matmul(to);
        acc = acc.add(&rho_to.matmul(&m).matmul(&rho_from.dagger()));
    }
    acc.scale_re(1.0 / unitaries.len() as f64)
}

fn decompose_finite(
    unitaries: &[ComplexMatrix],
    tol: f64,
    seed: u64,
) -> Result<IsotypicDecomposition, RepError> {
    let dim = unitaries[0].rows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut last_residual = f64::INFINITY;

    'attempt: for _retry in 0..RETRY_BUDGET {
        // a generic twirled Hermitian operator lies in the commutant; its
        // eigenspaces refine into minimal invariant subspaces
        let full = ComplexMatrix::identity(dim);
        let twirled = restricted_twirl(unitaries, &random_hermitian(&mut rng, dim));
        let (vals, vecs) = hermitian_eig(&twirled, 1e-8)?;
        let mut minimal: Vec<ComplexMatrix> = Vec::new();
        let mut ok = true;
        for cluster in eigen_clusters(&vals) {
            let sub = full.matmul(&select_columns(&vecs, &cluster));
            if split_minimal(sub, unitaries, &mut rng, &mut minimal).is_err() {
                ok = false;
                break;
            }
        }
        if !ok {
            continue 'attempt;
        }

        // group minimal subspaces into equivalence classes by first occurrence
        let mut class_of = vec![usize::MAX; minimal.len()];
        let mut classes: Vec<Vec<usize>> = Vec::new();
        for i in 0..minimal.len() {
            if class_of[i] != usize::MAX {
                continue;
            }
            let c = classes.len();
            class_of[i] = c;
            let mut members = vec![i];
            for j in (i + 1)..minimal.len() {
                if class_of[j] != usize::MAX || minimal[j].cols() != minimal[i].cols() {
                    continue;
                }
                let t = intertwiner(&minimal[i], &minimal[j], unitaries, &mut rng);
                if t.frobenius_norm() > 1e-6 {
                    class_of[j] = c;
                    members.push(j);
                }
            }
            classes.push(members);
        }

        // align multiplicity copies: normalize the intertwiner from the
        // reference copy into each equivalent copy to a unitary
        let mut blocks = Vec::with_capacity(classes.len());
        for (label, members) in classes.iter().enumerate() {
            let d_k = minimal[members[0]].cols();
            let m_k = members.len();
            let reference = &minimal[members[0]];
            let mut charts: Vec<ComplexMatrix> = Vec::with_capacity(m_k);
            for (copy_idx, &mem) in members.iter().enumerate() {
                if copy_idx == 0 {
                    charts.push(reference.clone());
                    continue;
                }
                let t = intertwiner(reference, &minimal[mem], unitaries, &mut rng);
                let gram = t.dagger().matmul(&t);
                let c = gram.trace().re / d_k as f64;
                if c <= 1e-12 {
                    continue 'attempt;
                }
                charts.push(minimal[mem].matmul(&t.scale_re(1.0 / c.sqrt())));
            }
            let isometry = ComplexMatrix::from_fn(dim, d_k * m_k, |r, col| {
                let (a, i) = (col / m_k, col % m_k);
                charts[i].get(r, a)
            });
            blocks.push(IsotypicBlock {
                label: BlockLabel::Class(label),
                irrep_dim: d_k,
                multiplicity: m_k,
                isometry,
            });
        }

        let dec = IsotypicDecomposition {
            blocks,
            carrier_dim: dim,
        };
        let residual = dec
            .resolution_residual()
            .max(dec.alignment_residual(unitaries));
        if residual <= tol.max(1e-10) * (dim as f64) {
            return Ok(dec);
        }
        last_residual = last_residual.min(residual);
    }
    Err(RepError::DecompositionFailed {
        retries: RETRY_BUDGET,
        residual: last_residual,
    })
}
