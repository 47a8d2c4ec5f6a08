//! Choi-operator machinery for (covariant) quantum operations: the
//! channel/operator correspondence, trace constraints, covariance, the
//! extremality test with perturbation witnesses, and built-in reference
//! channels (phase-covariant cloners, depolarizing, optimal transposition).
//!
//! Conventions: the Choi operator `R` lives on `K (x) H` with the OUTPUT
//! factor first; `|W> = (W (x) I)|I>` vectorizes Kraus operators
//! `W: H -> K` row-major, and the Schroedinger action is
//! `M(rho) = Tr_H[(I_K (x) rho^T) R]`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::extremality::{
    hermitian_coord_matrix, hermitian_coords, hermitian_kernel_blocks, span_verdict,
    ExtremalityReport,
};
use crate::numkernel::{
    hermitian_eig, max_entangled_vec, op_to_vec, partial_trace, psd_factor, span_dimension,
    vec_to_op, ComplexMatrix, MatError, TensorShape,
};
use crate::reps::{IsotypicDecomposition, RepError, Representation, SUdVariant};

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error(transparent)]
    Mat(#[from] MatError),
    #[error(transparent)]
    Rep(#[from] RepError),
    #[error("contract violation: {0}")]
    ContractViolation(String),
    #[error("unknown example `{0}`")]
    UnknownExample(String),
}

/// A (not necessarily covariant) Choi operator together with its input and
/// output dimensions.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChoiOperator {
    r: ComplexMatrix,
    dim_in: usize,
    dim_out: usize,
}

/// Trace verdict: preserving, properly nonincreasing, or outside the cone.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TniVerdict {
    TracePreserving,
    TraceNonincreasing,
    Violating,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TniReport {
    pub verdict: TniVerdict,
    /// Complete positivity of the operator itself.
    pub cp_ok: bool,
    /// `K = Tr_K[R]` acting on the input space.
    pub k_operator: ComplexMatrix,
    pub identity_deviation: f64,
}

impl ChoiOperator {
    pub fn new(
        r: ComplexMatrix,
        dim_in: usize,
        dim_out: usize,
    ) -> Result<Self, ChannelError> {
        if !r.is_square() || r.rows() != dim_in * dim_out {
            return Err(ChannelError::Mat(MatError::DimensionMismatch(format!(
                "Choi operator must be {0}x{0} for dim_in {1}, dim_out {2}",
                dim_in * dim_out,
                dim_in,
                dim_out
            ))));
        }
        if !r.is_hermitian(1e-8) {
            return Err(ChannelError::ContractViolation(
                "Choi operator must be Hermitian".into(),
            ));
        }
        Ok(Self { r, dim_in, dim_out })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.r
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    fn shape(&self) -> TensorShape {
        TensorShape::new(vec![self.dim_out, self.dim_in]).unwrap()
    }

    /// `K = Tr_K[R]` on the input space.
    pub fn k_operator(&self) -> ComplexMatrix {
        partial_trace(&self.r, &self.shape(), &[0]).unwrap()
    }

    /// Schroedinger action `M(rho) = Tr_H[(I_K (x) rho^T) R]`.
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix, ChannelError> {
        if rho.rows() != self.dim_in || rho.cols() != self.dim_in {
            return Err(ChannelError::Mat(MatError::DimensionMismatch(format!(
                "state must be {0}x{0}",
                self.dim_in
            ))));
        }
        let lifted = ComplexMatrix::identity(self.dim_out)
            .kron(&rho.transpose())
            .matmul(&self.r);
        Ok(partial_trace(&lifted, &self.shape(), &[1])?)
    }

    /// Heisenberg action `M(X) = sum_i W_i^dag X W_i` for `X` on the output
    /// space, computed directly from `R` as `Tr_K[(X (x) I) R]^T`.
    pub fn apply_heisenberg(&self, x: &ComplexMatrix) -> Result<ComplexMatrix, ChannelError> {
        if x.rows() != self.dim_out || x.cols() != self.dim_out {
            return Err(ChannelError::Mat(MatError::DimensionMismatch(format!(
                "observable must be {0}x{0}",
                self.dim_out
            ))));
        }
        let lifted = x
            .kron(&ComplexMatrix::identity(self.dim_in))
            .matmul(&self.r);
        Ok(partial_trace(&lifted, &self.shape(), &[0])?.transpose())
    }

    /// Trace-constraint verdict for `K = Tr_K[R]`: `K = I` is preserving,
    /// `0 <= K <= I` nonincreasing, anything else violating.
    pub fn check_tni(&self, tol: f64) -> TniReport {
        let cp_ok = self.r.is_psd(tol.max(1e-9));
        let k = self.k_operator();
        let id = ComplexMatrix::identity(self.dim_in);
        let identity_deviation = k.sub(&id).opnorm();
        let verdict = if !cp_ok {
            TniVerdict::Violating
        } else if identity_deviation <= tol.max(1e-9) * 10.0 {
            TniVerdict::TracePreserving
        } else if k.is_psd(tol.max(1e-9)) && id.sub(&k).is_psd(tol.max(1e-9)) {
            TniVerdict::TraceNonincreasing
        } else {
            TniVerdict::Violating
        };
        TniReport {
            verdict,
            cp_ok,
            k_operator: k,
            identity_deviation,
        }
    }

    /// Kraus operators from the spectral decomposition of `R`.
    pub fn kraus(&self, tol: f64) -> Result<KrausSet, ChannelError> {
        let (vals, vecs) = hermitian_eig(&self.r, tol.max(1e-12) * 1e3)?;
        let scale = vals.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        if vals.iter().any(|&l| l < -tol * scale.max(1.0)) {
            return Err(ChannelError::ContractViolation(
                "Kraus decomposition requires a PSD Choi operator".into(),
            ));
        }
        let mut operators = Vec::new();
        for i in 0..vals.len() {
            if vals[i] > tol * scale {
                let s = vals[i].sqrt();
                let col = ComplexMatrix::from_fn(self.r.rows(), 1, |r, _| {
                    vecs.get(r, i) * C64::new(s, 0.0)
                });
                operators.push(vec_to_op(&col, self.dim_out, self.dim_in)?);
            }
        }
        Ok(KrausSet {
            operators,
            dim_in: self.dim_in,
            dim_out: self.dim_out,
        })
    }
}

/// Kraus operators `W_i: H -> K` (`dim_out x dim_in` each).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KrausSet {
    pub operators: Vec<ComplexMatrix>,
    pub dim_in: usize,
    pub dim_out: usize,
}

impl KrausSet {
    pub fn new(
        operators: Vec<ComplexMatrix>,
        dim_in: usize,
        dim_out: usize,
    ) -> Result<Self, ChannelError> {
        if operators.is_empty() {
            return Err(ChannelError::ContractViolation(
                "Kraus set must be nonempty".into(),
            ));
        }
        for w in &operators {
            if w.rows() != dim_out || w.cols() != dim_in {
                return Err(ChannelError::Mat(MatError::DimensionMismatch(format!(
                    "Kraus operators must be {dim_out}x{dim_in}"
                ))));
            }
        }
        Ok(Self {
            operators,
            dim_in,
            dim_out,
        })
    }

    /// Direct Schroedinger sum `sum_i W_i rho W_i^dag`.
    pub fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        self.operators
            .iter()
            .fold(ComplexMatrix::zeros(self.dim_out, self.dim_out), |acc, w| {
                acc.add(&w.matmul(rho).matmul(&w.dagger()))
            })
    }
}

/// `R = sum_i |W_i><W_i|` with the row-major vectorization.
pub fn choi_from_kraus(ops: &KrausSet) -> ChoiOperator {
    let n = ops.dim_in * ops.dim_out;
    let r = ops
        .operators
        .iter()
        .fold(ComplexMatrix::zeros(n, n), |acc, w| {
            let v = op_to_vec(w);
            acc.add(&v.matmul(&v.dagger()))
        });
    ChoiOperator {
        r,
        dim_in: ops.dim_in,
        dim_out: ops.dim_out,
    }
}

/// Convenience free function mirroring [`ChoiOperator::apply`].
pub fn apply_channel(
    choi: &ChoiOperator,
    rho: &ComplexMatrix,
) -> Result<ComplexMatrix, ChannelError> {
    choi.apply(rho)
}

/// Maximum commutator norm `||[R, V_g (x) U_g^*]||_F` over the sampled
/// elements of the covariance representation.
pub fn covariance_check(
    choi: &ChoiOperator,
    rep_v: &Representation,
    rep_u: &Representation,
    seed: u64,
) -> Result<f64, ChannelError> {
    let rep = rep_v.tensor(&rep_u.conjugate()?)?;
    if rep.dim() != choi.dim_in * choi.dim_out {
        return Err(ChannelError::Mat(MatError::DimensionMismatch(format!(
            "covariance representation acts on dim {}, Choi operator on dim {}",
            rep.dim(),
            choi.dim_in * choi.dim_out
        ))));
    }
    let mut worst = 0.0f64;
    for u in rep.sample_unitaries(seed) {
        worst = worst.max(choi.matrix().commutator(&u).frobenius_norm());
    }
    Ok(worst)
}

/// A covariant Choi operator in commutant coordinates: per isotypic block of
/// the `V (x) U^*` decomposition, a factor `w_k` (`r_k x m_k`, possibly with
/// zero rows) with `R = sum_k Y_k (I_{d_k} (x) w_k^dag w_k) Y_k^dag`.
#[derive(Clone, Debug)]
pub struct CovariantChoi {
    base: ChoiOperator,
    dec: IsotypicDecomposition,
    factors: Vec<ComplexMatrix>,
}

impl CovariantChoi {
    pub fn base(&self) -> &ChoiOperator {
        &self.base
    }

    pub fn decomposition(&self) -> &IsotypicDecomposition {
        &self.dec
    }

    pub fn factors(&self) -> &[ComplexMatrix] {
        &self.factors
    }
}

/// Assembles a covariant Choi operator from per-block factors.
pub fn covariant_choi(
    factors: Vec<ComplexMatrix>,
    dec: IsotypicDecomposition,
    dim_in: usize,
    dim_out: usize,
) -> Result<CovariantChoi, ChannelError> {
    if dec.carrier_dim() != dim_in * dim_out {
        return Err(ChannelError::Mat(MatError::DimensionMismatch(format!(
            "decomposition carrier {} does not match dim_in*dim_out {}",
            dec.carrier_dim(),
            dim_in * dim_out
        ))));
    }
    if factors.len() != dec.blocks().len() {
        return Err(ChannelError::Mat(MatError::DimensionMismatch(format!(
            "expected {} block factors, got {}",
            dec.blocks().len(),
            factors.len()
        ))));
    }
    let n = dec.carrier_dim();
    let mut r = ComplexMatrix::zeros(n, n);
    for (w, b) in factors.iter().zip(dec.blocks()) {
        if w.cols() != b.multiplicity {
            return Err(ChannelError::Mat(MatError::DimensionMismatch(format!(
                "factor for block {} must have {} columns, got {}",
                b.label, b.multiplicity, w.cols()
            ))));
        }
        if w.rows() == 0 {
            continue;
        }
        r = r.add(&b.embed(&w.dagger().matmul(w)));
    }
    let base = ChoiOperator::new(r, dim_in, dim_out)?;
    Ok(CovariantChoi {
        base,
        dec,
        factors,
    })
}

/// Twirls `R` into the commutant of the decomposition and extracts the block
/// factors; a fixed point exactly when `R` is already covariant.
pub fn project_covariant(
    choi: &ChoiOperator,
    dec: &IsotypicDecomposition,
    tol: f64,
) -> Result<CovariantChoi, ChannelError> {
    if dec.carrier_dim() != choi.dim_in * choi.dim_out {
        return Err(ChannelError::Mat(MatError::DimensionMismatch(
            "decomposition carrier does not match the Choi operator".into(),
        )));
    }
    // eigen-decompose every chart first so the rank threshold can use one
    // scale across blocks; a per-block relative threshold would keep pure
    // numerical noise in blocks the operator does not occupy
    let mut charts = Vec::with_capacity(dec.blocks().len());
    let mut global = 0.0f64;
    for b in dec.blocks() {
        // twirled chart is I_{d_k} (x) G_k with G_k = block_trace / d_k
        let g = b
            .block_trace(choi.matrix())
            .scale_re(1.0 / b.irrep_dim as f64)
            .hermitian_part();
        let (vals, vecs) = hermitian_eig(&g, tol.max(1e-9))?;
        global = global.max(vals.iter().fold(0.0f64, |a, &v| a.max(v.abs())));
        charts.push((vals, vecs));
    }
    let thresh = tol.max(1e-12) * global;
    let mut factors = Vec::with_capacity(dec.blocks().len());
    for ((vals, vecs), b) in charts.into_iter().zip(dec.blocks()) {
        if vals.iter().any(|&l| l < -thresh.max(1e-12) * 10.0) {
            return Err(ChannelError::ContractViolation(format!(
                "chart of block {} is not positive semidefinite",
                b.label
            )));
        }
        let kept: Vec<(f64, usize)> = vals
            .iter()
            .enumerate()
            .filter(|&(_, &l)| l > thresh)
            .map(|(i, &l)| (l, i))
            .collect();
        factors.push(ComplexMatrix::from_fn(kept.len(), b.multiplicity, |r, c| {
            vecs.get(c, kept[r].1).conj() * kept[r].0.sqrt()
        }));
    }
    covariant_choi(factors, dec.clone(), choi.dim_in, choi.dim_out)
}

/// Extremality of a covariant quantum operation within the convex set of
/// covariant operations sharing its `Tr_K[R]`. The seed factors are reduced
/// to canonical PSD factors `X_k` (`r_k` rows); extremality holds iff the
/// map `(O_k) -> sum_k Tr_K[Y_k (I (x) X_k^dag O_k X_k) Y_k^dag]` over the
/// `sum_k r_k^2` block-Hermitian coordinates is injective. A kernel element
/// yields a Hermitian witness `S` with `Tr_K[S] = 0` and `R +- tS` feasible.
pub fn qo_extremality(cov: &CovariantChoi, tol: f64) -> Result<ExtremalityReport, ChannelError> {
    let dec = cov.decomposition();
    let (dim_in, dim_out) = (cov.base().dim_in, cov.base().dim_out);
    let shape = TensorShape::new(vec![dim_out, dim_in]).unwrap();
    let tni = cov.base().check_tni(tol.max(1e-8));
    if tni.verdict == TniVerdict::Violating {
        return Err(ChannelError::ContractViolation(
            "extremality requires a trace-nonincreasing CP input".into(),
        ));
    }

    // canonical PSD factors per block
    let xs: Vec<ComplexMatrix> = cov
        .factors()
        .iter()
        .map(|w| psd_factor(&w.dagger().matmul(w).hermitian_part(), tol))
        .collect::<Result<_, _>>()?;
    let ranks: Vec<usize> = xs.iter().map(|x| x.rows()).collect();
    let rank: usize = ranks
        .iter()
        .zip(dec.blocks())
        .map(|(&r, b)| r * b.irrep_dim)
        .sum();
    let span_required: usize = ranks.iter().map(|&r| r * r).sum();
    let necessary_bound_ok = span_required <= dim_in * dim_in;

    let image = |k: usize, o: &ComplexMatrix| -> ComplexMatrix {
        let inner = xs[k].dagger().matmul(o).matmul(&xs[k]);
        let lifted = dec.blocks()[k].embed(&inner);
        partial_trace(&lifted, &shape, &[0]).unwrap()
    };

    let mut candidates = Vec::new();
    for (k, &r) in ranks.iter().enumerate() {
        for a in 0..r {
            for b in 0..r {
                let e_ab = ComplexMatrix::from_fn(r, r, |i, j| {
                    if i == a && j == b {
                        C64::new(1.0, 0.0)
                    } else {
                        C64::ZERO
                    }
                });
                candidates.push(image(k, &e_ab));
            }
        }
    }
    let (span_achieved, gap) = span_verdict(&candidates, tol);
    let is_extremal = span_achieved == span_required;

    let (witness, witness_step) = if is_extremal {
        (None, None)
    } else {
        let images: Vec<Vec<ComplexMatrix>> = ranks
            .iter()
            .enumerate()
            .map(|(k, &r)| {
                hermitian_coords(r)
                    .into_iter()
                    .map(|c| image(k, &hermitian_coord_matrix(r, c)))
                    .collect()
            })
            .collect();
        match hermitian_kernel_blocks(&images, &ranks, tol) {
            Some(o_blocks) => {
                let mut s = ComplexMatrix::zeros(dec.carrier_dim(), dec.carrier_dim());
                let mut max_norm = 0.0f64;
                for (k, o) in o_blocks.iter().enumerate() {
                    if o.rows() == 0 {
                        continue;
                    }
                    max_norm = max_norm.max(o.opnorm());
                    let inner = xs[k].dagger().matmul(o).matmul(&xs[k]);
                    s = s.add(&dec.blocks()[k].embed(&inner));
                }
                // X_k^dag (I +- t O_k) X_k >= 0 for t <= 1/||O||
                let mut t = 0.5 / max_norm.max(1e-12);
                let k_ref = cov.base().k_operator();
                let mut ok = false;
                for _ in 0..60 {
                    let feasible = |m: &ComplexMatrix| {
                        m.is_psd(tol.max(1e-8) * 10.0)
                            && partial_trace(m, &shape, &[0])
                                .unwrap()
                                .sub(&k_ref)
                                .opnorm()
                                < tol.max(1e-8) * 100.0
                    };
                    let plus = cov.base().matrix().add(&s.scale_re(t));
                    let minus = cov.base().matrix().sub(&s.scale_re(t));
                    if feasible(&plus) && feasible(&minus) {
                        ok = true;
                        break;
                    }
                    t *= 0.5;
                }
                if ok {
                    (Some(s), Some(t))
                } else {
                    (None, None)
                }
            }
            None => (None, None),
        }
    };

    Ok(ExtremalityReport {
        is_extremal,
        rank,
        span_achieved,
        span_required,
        necessary_bound_ok,
        singular_value_gap: gap,
        witness,
        witness_step,
    })
}

/// Extremality of a general (non-covariant) quantum operation: linear
/// independence of the `r^2` products `W_i^dag W_j`.
pub fn choi_extremality_noncov(ops: &KrausSet, tol: f64) -> bool {
    let mut products = Vec::with_capacity(ops.operators.len() * ops.operators.len());
    for wi in &ops.operators {
        for wj in &ops.operators {
            products.push(wi.dagger().matmul(wj));
        }
    }
    span_dimension(&products, tol) == products.len()
}

/// A reference channel with its covariance representation and expected
/// verdicts.
#[derive(Clone, Debug)]
pub struct BuiltinExample {
    pub name: String,
    pub choi: CovariantChoi,
    /// The full covariance representation `V (x) U^*` on `K (x) H`.
    pub rep: Representation,
    pub expected_extremal: bool,
    pub expected_trace_preserving: bool,
    /// Cost operator and the value `Tr[W R]` where a fidelity criterion
    /// applies.
    pub fidelity: Option<(ComplexMatrix, f64)>,
}

pub fn qubit_plus() -> ComplexMatrix {
    ComplexMatrix::from_real_row_slice(2, 1, &[1.0, 1.0]).scale_re(1.0 / 2f64.sqrt())
}

pub fn qubit_minus() -> ComplexMatrix {
    ComplexMatrix::from_real_row_slice(2, 1, &[1.0, -1.0]).scale_re(1.0 / 2f64.sqrt())
}

pub fn projector(v: &ComplexMatrix) -> ComplexMatrix {
    v.matmul(&v.dagger())
}

/// Basis vector on `n` qubits from a bit string (first bit = leftmost = most
/// significant in the row-major index).
pub fn bit_vector(bits: &[u8]) -> ComplexMatrix {
    let n = 1usize << bits.len();
    let idx = bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
    ComplexMatrix::from_fn(n, 1, |i, _| {
        if i == idx {
            C64::new(1.0, 0.0)
        } else {
            C64::ZERO
        }
    })
}

pub fn superposition(terms: &[(&[u8], f64)]) -> ComplexMatrix {
    terms
        .iter()
        .fold(None::<ComplexMatrix>, |acc, &(bits, c)| {
            let t = bit_vector(bits).scale_re(c);
            Some(match acc {
                Some(v) => v.add(&t),
                None => t,
            })
        })
        .unwrap()
}

/// Phase-covariance representation for 1 -> n cloning on `K (x) H` with
/// weights `(sum of output bits) - input bit`, basis `|b_1..b_n b_0>`.
pub fn cloning_rep(n_outputs: usize) -> Representation {
    let total = n_outputs + 1;
    let dim = 1usize << total;
    let weights: Vec<i64> = (0..dim)
        .map(|idx| {
            let input = (idx & 1) as i64;
            let outputs = (idx >> 1).count_ones() as i64;
            outputs - input
        })
        .collect();
    Representation::u1_weights(weights).unwrap()
}

/// The swap operator on `C^d (x) C^d`.
pub fn swap_operator(d: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d * d, d * d, |r, c| {
        let (a, b) = (r / d, r % d);
        let (x, y) = (c / d, c % d);
        if a == y && b == x {
            C64::new(1.0, 0.0)
        } else {
            C64::ZERO
        }
    })
}

/// Equatorial-fidelity cost operator for 1 -> n cloning: the uniform average
/// over output slots of `|+><+|_s (x) I_other (x) |+><+|_in`.
pub fn cloning_fidelity_operator(n_outputs: usize) -> ComplexMatrix {
    let p_plus = projector(&qubit_plus());
    let dim = 1usize << (n_outputs + 1);
    let mut w = ComplexMatrix::zeros(dim, dim);
    for s in 0..n_outputs {
        let mut term = ComplexMatrix::identity(1);
        for slot in 0..n_outputs {
            let f = if slot == s {
                p_plus.clone()
            } else {
                ComplexMatrix::identity(2)
            };
            term = term.kron(&f);
        }
        term = term.kron(&p_plus);
        w = w.add(&term.scale_re(1.0 / n_outputs as f64));
    }
    w
}

/// The printed optimal 1 -> 2 cloning fidelity operator
/// `|+><+|^(x)3 + (|-><-| (x) |+><+| + |+><+| (x) |-><-|) (x) |+><+| / 2`.
pub fn clone12_fidelity_operator() -> ComplexMatrix {
    let p = projector(&qubit_plus());
    let m = projector(&qubit_minus());
    p.kron(&p)
        .kron(&p)
        .add(&m.kron(&p).add(&p.kron(&m)).kron(&p).scale_re(0.5))
}

pub fn builtin_examples(name: &str, d: usize) -> Result<BuiltinExample, ChannelError> {
    let inv_sqrt2 = 1.0 / 2f64.sqrt();
    match name {
        "clone12" => {
            let rep = cloning_rep(2);
            let dec = rep.isotypic_decompose(1e-9)?;
            let psi0 = superposition(&[
                (&[0, 0, 0], inv_sqrt2),
                (&[0, 1, 1], 0.5),
                (&[1, 0, 1], 0.5),
            ]);
            let psi1 = superposition(&[
                (&[1, 1, 1], inv_sqrt2),
                (&[1, 0, 0], 0.5),
                (&[0, 1, 0], 0.5),
            ]);
            let r = projector(&psi0).add(&projector(&psi1));
            let choi = project_covariant(&ChoiOperator::new(r, 2, 4)?, &dec, 1e-10)?;
            Ok(BuiltinExample {
                name: name.into(),
                choi,
                rep,
                // midpoint of the segment between the two feasible rank-one
                // operators 2|psi_j><psi_j|, hence not an extreme point
                expected_extremal: false,
                expected_trace_preserving: true,
                fidelity: Some((clone12_fidelity_operator(), (2.0 + 2f64.sqrt()) / 4.0)),
            })
        }
        "clone13" => {
            let rep = cloning_rep(3);
            let dec = rep.isotypic_decompose(1e-9)?;
            let c = 1.0 / 3f64.sqrt();
            let psi1 = superposition(&[
                (&[1, 0, 0, 0], c),
                (&[0, 1, 0, 0], c),
                (&[0, 0, 1, 0], c),
                (&[1, 1, 0, 1], c),
                (&[1, 0, 1, 1], c),
                (&[0, 1, 1, 1], c),
            ]);
            let choi = project_covariant(&ChoiOperator::new(projector(&psi1), 2, 8)?, &dec, 1e-10)?;
            Ok(BuiltinExample {
                name: name.into(),
                choi,
                rep,
                expected_extremal: true,
                expected_trace_preserving: true,
                fidelity: Some((cloning_fidelity_operator(3), 5.0 / 6.0)),
            })
        }
        "depolarizing" => {
            if d < 2 {
                return Err(ChannelError::ContractViolation(
                    "depolarizing requires d >= 2".into(),
                ));
            }
            let rep = Representation::su_d_tensor(d, SUdVariant::UUstar)?;
            let dec = rep.isotypic_decompose(1e-9)?;
            let bell = max_entangled_vec(d);
            let r = ComplexMatrix::identity(d * d)
                .sub(&projector(&bell).scale_re(1.0 / d as f64))
                .scale_re(d as f64 / (d * d - 1) as f64);
            let choi = project_covariant(&ChoiOperator::new(r, d, d)?, &dec, 1e-10)?;
            Ok(BuiltinExample {
                name: name.into(),
                choi,
                rep,
                expected_extremal: true,
                expected_trace_preserving: true,
                fidelity: None,
            })
        }
        "transpose_plus" | "transpose_minus" => {
            if d < 2 {
                return Err(ChannelError::ContractViolation(
                    "transposition requires d >= 2".into(),
                ));
            }
            let sign = if name == "transpose_plus" { 1.0 } else { -1.0 };
            let rep = Representation::su_d_tensor(d, SUdVariant::UstarUstar)?;
            let dec = rep.isotypic_decompose(1e-9)?;
            let e = swap_operator(d);
            let r = ComplexMatrix::identity(d * d)
                .add(&e.scale_re(sign))
                .scale_re(1.0 / (d as f64 + sign));
            let choi = project_covariant(&ChoiOperator::new(r, d, d)?, &dec, 1e-10)?;
            Ok(BuiltinExample {
                name: name.into(),
                choi,
                rep,
                expected_extremal: true,
                expected_trace_preserving: true,
                fidelity: None,
            })
        }
        other => Err(ChannelError::UnknownExample(other.into())),
    }
}

pub fn builtin_example_names() -> &'static [&'static str] {
    &[
        "clone12",
        "clone13",
        "depolarizing",
        "transpose_plus",
        "transpose_minus",
    ]
}
