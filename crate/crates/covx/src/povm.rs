//! Covariant POVM seeds: feasibility, densities and outcome probabilities,
//! extremality with perturbation witnesses, and rank bounds.
//!
//! A covariant POVM is generated by a single PSD seed through
//! `dP_g = U_g^dag Xi U_g dg`; normalization splits into one block-trace
//! constraint per isotypic class, `Tr_{H_k}(P_k Xi P_k) = d_k I_{m_k}`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::extremality::{hermitian_nullspace_direction, span_verdict, ExtremalityReport};
use crate::numkernel::{hermitian_eig, psd_factor, vec_to_op, ComplexMatrix, MatError};
use crate::reps::{BlockLabel, GroupElement, IsotypicDecomposition, RepError, Representation};

#[derive(Debug, Error)]
pub enum PovmError {
    #[error(transparent)]
    Mat(#[from] MatError),
    #[error(transparent)]
    Rep(#[from] RepError),
    #[error("contract violation: {0}")]
    ContractViolation(String),
}

/// Feasibility verdict for a candidate seed, with per-block residuals
/// (max-abs deviation of the block trace from `d_k I`).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub psd_ok: bool,
    pub min_eigenvalue: f64,
    pub block_residuals: Vec<(BlockLabel, f64)>,
}

/// Checks `Xi >= 0` and the per-block normalization constraints.
pub fn check_seed(
    xi: &ComplexMatrix,
    dec: &IsotypicDecomposition,
    tol: f64,
) -> Result<FeasibilityReport, PovmError> {
    if !xi.is_square() || xi.rows() != dec.carrier_dim() {
        return Err(PovmError::Mat(MatError::DimensionMismatch(format!(
            "seed must be {0}x{0}",
            dec.carrier_dim()
        ))));
    }
    let (eigs, _) = hermitian_eig(xi, tol.max(1e-12) * 1e3)?;
    let scale = eigs.iter().fold(0.0f64, |a, &b| a.max(b.abs())).max(1.0);
    let min_eigenvalue = eigs.first().cloned().unwrap_or(0.0);
    let psd_ok = min_eigenvalue >= -tol * scale;

    let mut feasible = psd_ok;
    let mut block_residuals = Vec::with_capacity(dec.blocks().len());
    for b in dec.blocks() {
        let target = ComplexMatrix::identity(b.multiplicity).scale_re(b.irrep_dim as f64);
        let delta = b.block_trace(xi).sub(&target);
        let residual = (0..b.multiplicity)
            .flat_map(|i| (0..b.multiplicity).map(move |j| (i, j)))
            .map(|(i, j)| delta.get(i, j).norm())
            .fold(0.0f64, f64::max);
        if residual > tol * (b.irrep_dim as f64).max(1.0) {
            feasible = false;
        }
        block_residuals.push((b.label, residual));
    }
    Ok(FeasibilityReport {
        feasible,
        psd_ok,
        min_eigenvalue,
        block_residuals,
    })
}

/// A feasible seed bound to its decomposition (and, when available, the
/// representation it came from, for density evaluation).
#[derive(Clone, Debug)]
pub struct PovmSeed {
    xi: ComplexMatrix,
    dec: IsotypicDecomposition,
    rep: Option<Representation>,
}

impl PovmSeed {
    /// Validates feasibility before binding; infeasible input is a contract
    /// violation.
    pub fn new(
        xi: ComplexMatrix,
        rep: Representation,
        tol: f64,
    ) -> Result<Self, PovmError> {
        let dec = rep.isotypic_decompose(tol)?;
        Self::with_decomposition(xi, dec, tol).map(|mut s| {
            s.rep = Some(rep);
            s
        })
    }

    pub fn with_decomposition(
        xi: ComplexMatrix,
        dec: IsotypicDecomposition,
        tol: f64,
    ) -> Result<Self, PovmError> {
        let report = check_seed(&xi, &dec, tol)?;
        if !report.feasible {
            return Err(PovmError::ContractViolation(format!(
                "seed is not feasible: psd_ok={}, worst block residual {:.3e}",
                report.psd_ok,
                report
                    .block_residuals
                    .iter()
                    .map(|(_, r)| *r)
                    .fold(0.0f64, f64::max)
            )));
        }
        Ok(Self {
            xi,
            dec,
            rep: None,
        })
    }

    pub fn xi(&self) -> &ComplexMatrix {
        &self.xi
    }

    pub fn decomposition(&self) -> &IsotypicDecomposition {
        &self.dec
    }

    pub fn representation(&self) -> Option<&Representation> {
        self.rep.as_ref()
    }

    fn rep_or_err(&self) -> Result<&Representation, PovmError> {
        self.rep.as_ref().ok_or_else(|| {
            PovmError::ContractViolation(
                "seed carries no representation; densities unavailable".into(),
            )
        })
    }

    /// `U_g^dag Xi U_g`, the POVM density at the group element.
    pub fn density_at(&self, g: &GroupElement) -> Result<ComplexMatrix, PovmError> {
        let u = self.rep_or_err()?.unitary(g)?;
        Ok(u.dagger().matmul(&self.xi).matmul(&u))
    }

    /// `Tr[U_g^dag Xi U_g rho]` for a density matrix `rho`.
    pub fn probability_density(
        &self,
        rho: &ComplexMatrix,
        g: &GroupElement,
        tol: f64,
    ) -> Result<f64, PovmError> {
        if !rho.is_psd(tol.max(1e-9)) || (rho.trace().re - 1.0).abs() > tol.max(1e-9) * 10.0 {
            return Err(PovmError::ContractViolation(
                "rho must be PSD with unit trace".into(),
            ));
        }
        Ok(self.density_at(g)?.matmul(rho).trace().re)
    }
}

/// Necessary condition for extremality: `rank(Xi)^2 <= sum_k m_k^2`.
pub fn necessary_rank_bound(seed: &PovmSeed, tol: f64) -> Result<bool, PovmError> {
    let rank = psd_factor(seed.xi(), tol)?.rows();
    Ok(rank * rank <= seed.decomposition().multiplicity_square_sum())
}

/// Full extremality test: factor `Xi = X^dag X`, span the operators
/// `X Y_k (I (x) E_ab) Y_k^dag X^dag` over all blocks and multiplicity index
/// pairs, and compare against `rank^2`. Non-extremal seeds get a Hermitian
/// perturbation witness with vanishing block traces and a step size keeping
/// `Xi +- t Theta` feasible.
pub fn extremality(seed: &PovmSeed, tol: f64) -> Result<ExtremalityReport, PovmError> {
    let xi = seed.xi();
    let dec = seed.decomposition();
    let x = psd_factor(xi, tol)?;
    let r = x.rows();
    if r == 0 {
        return Err(PovmError::ContractViolation("zero seed".into()));
    }

    // candidates in sorted (k, a, b) order for deterministic reports
    let mut candidates = Vec::new();
    for b in dec.blocks() {
        let m = b.multiplicity;
        for a_idx in 0..m {
            for b_idx in 0..m {
                let e_ab = ComplexMatrix::from_fn(m, m, |i, j| {
                    if i == a_idx && j == b_idx {
                        num_complex::Complex64::new(1.0, 0.0)
                    } else {
                        num_complex::Complex64::ZERO
                    }
                });
                candidates.push(x.matmul(&b.embed(&e_ab)).matmul(&x.dagger()));
            }
        }
    }

    let (span_achieved, gap) = span_verdict(&candidates, tol);
    let span_required = r * r;
    let necessary_bound_ok = span_required <= dec.multiplicity_square_sum();
    let is_extremal = span_achieved == span_required;

    let (witness, witness_step) = if is_extremal {
        (None, None)
    } else {
        match hermitian_nullspace_direction(&candidates, r, tol) {
            Some(b) => {
                let theta = x.dagger().matmul(&b).matmul(&x);
                // I +- t B >= 0 guarantees Xi +- t Theta = X^dag (I +- tB) X >= 0
                let mut t = 0.5 / b.opnorm().max(1e-12);
                let mut ok = false;
                for _ in 0..60 {
                    let plus = check_seed(&xi.add(&theta.scale_re(t)), dec, tol.max(1e-8) * 10.0)?;
                    let minus =
                        check_seed(&xi.sub(&theta.scale_re(t)), dec, tol.max(1e-8) * 10.0)?;
                    if plus.feasible && minus.feasible {
                        ok = true;
                        break;
                    }
                    t *= 0.5;
                }
                if ok {
                    (Some(theta), Some(t))
                } else {
                    (None, None)
                }
            }
            None => (None, None),
        }
    };

    Ok(ExtremalityReport {
        is_extremal,
        rank: r,
        span_achieved,
        span_required,
        necessary_bound_ok,
        singular_value_gap: gap,
        witness,
        witness_step,
    })
}

/// Independent single-class oracle: with one block `H_h (x) C^{m_h}`,
/// extremality is equivalent to linear independence of the products
/// `W_i^dag W_j` built from the spectral decomposition of the seed.
pub fn single_class_extremality(seed: &PovmSeed, tol: f64) -> Result<bool, PovmError> {
    let dec = seed.decomposition();
    if dec.blocks().len() != 1 {
        return Err(PovmError::ContractViolation(format!(
            "single-class test requires exactly one block, found {}",
            dec.blocks().len()
        )));
    }
    let block = &dec.blocks()[0];
    let (d_h, m_h) = (block.irrep_dim, block.multiplicity);
    let chart = block.chart(seed.xi());
    let (vals, vecs) = hermitian_eig(&chart, tol.max(1e-12) * 1e3)?;
    let scale = vals.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let kept: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > tol * scale).collect();

    let w_ops: Vec<ComplexMatrix> = kept
        .iter()
        .map(|&i| {
            let col = ComplexMatrix::from_fn(d_h * m_h, 1, |r, _| {
                vecs.get(r, i) * num_complex::Complex64::new(vals[i].sqrt(), 0.0)
            });
            vec_to_op(&col, d_h, m_h).unwrap()
        })
        .collect();

    let mut products = Vec::with_capacity(w_ops.len() * w_ops.len());
    for wi in &w_ops {
        for wj in &w_ops {
            products.push(wi.dagger().matmul(wj));
        }
    }
    Ok(crate::numkernel::span_dimension(&products, tol) == products.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reps::IsotypicBlock;
    use num_complex::Complex64 as C64;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn u1_rep(weights: Vec<i64>) -> Representation {
        Representation::u1_weights(weights).unwrap()
    }

    /// Synthetic single-block decomposition on `C^{d*m}` with the identity
    /// isometry: models a rep `pi (x) I_m` with `pi` irreducible of dim `d`.
    fn single_block_dec(d: usize, m: usize) -> IsotypicDecomposition {
        IsotypicDecomposition::from_blocks(
            vec![IsotypicBlock {
                label: BlockLabel::Class(0),
                irrep_dim: d,
                multiplicity: m,
                isometry: ComplexMatrix::identity(d * m),
            }],
            d * m,
            1e-9,
        )
        .unwrap()
    }

    /// Random feasible single-block seed of the requested rank, built from
    /// Kraus-style vectors normalized so that `sum W_i^dag W_i = d I`.
    fn random_single_block_seed(
        rng: &mut impl Rng,
        d: usize,
        m: usize,
        rank: usize,
    ) -> ComplexMatrix {
        let ws: Vec<ComplexMatrix> = (0..rank)
            .map(|_| {
                ComplexMatrix::from_fn(d, m, |_, _| {
                    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                })
            })
            .collect();
        let gram = ws
            .iter()
            .fold(ComplexMatrix::zeros(m, m), |acc, w| {
                acc.add(&w.dagger().matmul(w))
            });
        // G^{-1/2} via eigendecomposition; a singular Gram matrix yields an
        // infeasible seed, rejected downstream by the feasibility check
        let (vals, vecs) = hermitian_eig(&gram, 1e-9).unwrap();
        let vmax = vals.iter().fold(0.0f64, |a, &b| a.max(b));
        let inv_sqrt = vecs
            .matmul(&ComplexMatrix::diagonal(
                &vals
                    .iter()
                    .map(|&l| {
                        if l > 1e-10 * vmax {
                            C64::new(1.0 / l.sqrt(), 0.0)
                        } else {
                            C64::ZERO
                        }
                    })
                    .collect::<Vec<_>>(),
            ))
            .matmul(&vecs.dagger());
        let mut xi = ComplexMatrix::zeros(d * m, d * m);
        for w in &ws {
            let wn = w.matmul(&inv_sqrt).scale_re((d as f64).sqrt());
            let v = crate::numkernel::op_to_vec(&wn);
            xi = xi.add(&v.matmul(&v.dagger()));
        }
        xi
    }

    #[test]
    fn identity_seed_is_feasible() {
        let dec = u1_rep(vec![0, 0, 1, 1]).isotypic_decompose(1e-9).unwrap();
        let report = check_seed(&ComplexMatrix::identity(4), &dec, 1e-9).unwrap();
        assert!(report.feasible);
        let report2 = check_seed(&ComplexMatrix::identity(4).scale_re(2.0), &dec, 1e-9).unwrap();
        assert!(!report2.feasible);
        // residual d_k per block for Xi = 2I
        for (_, r) in report2.block_residuals {
            assert!((r - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn all_ones_projector_is_feasible_correlation_matrix() {
        let rep = u1_rep(vec![0, 1, 2]);
        let e = ComplexMatrix::col_vector(&[C64::new(1.0, 0.0); 3]);
        let xi = e.matmul(&e.dagger());
        let seed = PovmSeed::new(xi.clone(), rep, 1e-9).unwrap();
        for i in 0..3 {
            assert!((xi.get(i, i).re - 1.0).abs() < 1e-14);
        }
        // rank-one seeds are always extremal
        let report = extremality(&seed, 1e-9).unwrap();
        assert!(report.is_extremal);
        assert_eq!(report.rank, 1);
        assert!(report.necessary_bound_ok);
    }

    #[test]
    fn density_and_probability() {
        let rep = u1_rep(vec![0, 1, 2]);
        let e = ComplexMatrix::col_vector(&[C64::new(1.0, 0.0); 3]);
        let xi = e.matmul(&e.dagger());
        let seed = PovmSeed::new(xi.clone(), rep, 1e-9).unwrap();
        // identity element reproduces the seed
        let at_zero = seed.density_at(&GroupElement::Angle(0.0)).unwrap();
        assert!(at_zero.sub(&xi).frobenius_norm() < 1e-14);
        // rho = |e><e|/3 gives density Tr[Xi rho] = 3
        let rho = xi.scale_re(1.0 / 3.0);
        let p = seed
            .probability_density(&rho, &GroupElement::Angle(0.0), 1e-9)
            .unwrap();
        assert!((p - 3.0).abs() < 1e-12);
        let bad_rho = ComplexMatrix::identity(3);
        assert!(seed
            .probability_density(&bad_rho, &GroupElement::Angle(0.0), 1e-9)
            .is_err());
    }

    #[test]
    fn normalization_quadrature() {
        let rep = u1_rep(vec![0, 1, 2, 3]);
        let e = ComplexMatrix::col_vector(&[C64::new(1.0, 0.0); 4]);
        let xi = e.matmul(&e.dagger());
        let elements = rep.sample_unitaries(0);
        let mut avg = ComplexMatrix::zeros(4, 4);
        for u in &elements {
            avg = avg.add(&u.dagger().matmul(&xi).matmul(u));
        }
        avg = avg.scale_re(1.0 / elements.len() as f64);
        assert!(avg.sub(&ComplexMatrix::identity(4)).frobenius_norm() < 1e-8);
    }

    #[test]
    fn rank_bound_examples() {
        // d=4 U(1) rep with distinct weights: sum m_k^2 = 4, rank-2 allowed
        let rep = u1_rep(vec![0, 1, 2, 3]);
        let e_plus = ComplexMatrix::col_vector(&[
            C64::new(1.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(1.0, 0.0),
        ]);
        let e_minus = ComplexMatrix::col_vector(&[
            C64::new(1.0, 0.0),
            C64::new(-1.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(-1.0, 0.0),
        ]);
        let xi = e_plus
            .matmul(&e_plus.dagger())
            .add(&e_minus.matmul(&e_minus.dagger()))
            .scale_re(0.5);
        let seed = PovmSeed::new(xi, rep, 1e-9).unwrap();
        assert!(necessary_rank_bound(&seed, 1e-9).unwrap());
    }

    #[test]
    fn irreducible_rank_two_not_extremal_with_witness() {
        // irreducible rep: single block, multiplicity 1; feasible means Tr = d
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let d = 4;
        let dec = single_block_dec(d, 1);
        let xi = random_single_block_seed(&mut rng, d, 1, 2);
        let seed = PovmSeed::with_decomposition(xi.clone(), dec.clone(), 1e-8).unwrap();
        let report = extremality(&seed, 1e-9).unwrap();
        assert!(!report.is_extremal);
        assert_eq!(report.rank, 2);
        let theta = report.witness.expect("witness");
        let t = report.witness_step.expect("step");
        assert!(theta.frobenius_norm() > 1e-10);
        // block traces of the witness vanish
        for b in dec.blocks() {
            assert!(b.block_trace(&theta).frobenius_norm() < 1e-8);
        }
        for sign in [1.0, -1.0] {
            let shifted = xi.add(&theta.scale_re(sign * t));
            assert!(check_seed(&shifted, &dec, 1e-7).unwrap().feasible);
        }
    }

    #[test]
    fn bell_povm_seed_is_extremal() {
        // U_g (x) I with U irreducible on C^d: single class, m_h = d; the
        // maximally entangled projector is the Bell POVM seed
        for d in 2..=3usize {
            let dec = single_block_dec(d, d);
            let bell = crate::numkernel::max_entangled_vec(d);
            let xi = bell.matmul(&bell.dagger()).scale_re(d as f64);
            let seed = PovmSeed::with_decomposition(xi, dec, 1e-9).unwrap();
            assert!(single_class_extremality(&seed, 1e-9).unwrap());
            assert!(extremality(&seed, 1e-9).unwrap().is_extremal);
        }
    }

    #[test]
    fn two_entangled_vectors_not_extremal() {
        // two maximally entangled vectors make {W_i^dag W_j} dependent
        let d = 2;
        let dec = single_block_dec(d, d);
        let bell = crate::numkernel::max_entangled_vec(d);
        let sx = ComplexMatrix::from_real_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let bell_x = crate::numkernel::op_to_vec(&sx);
        let xi = bell
            .matmul(&bell.dagger())
            .add(&bell_x.matmul(&bell_x.dagger()));
        let seed = PovmSeed::with_decomposition(xi, dec, 1e-9).unwrap();
        assert!(!single_class_extremality(&seed, 1e-9).unwrap());
        assert!(!extremality(&seed, 1e-9).unwrap().is_extremal);
    }

    #[test]
    fn oracle_agreement_random_single_block() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..60 {
            let d = rng.gen_range(2..=4usize);
            let m = rng.gen_range(1..=3usize);
            if d * m > 12 {
                continue;
            }
            let max_rank = m.min(d * m);
            let rank = rng.gen_range(1..=max_rank + 1).min(d * m);
            let dec = single_block_dec(d, m);
            let xi = random_single_block_seed(&mut rng, d, m, rank);
            let seed = match PovmSeed::with_decomposition(xi, dec, 1e-7) {
                Ok(s) => s,
                Err(_) => continue,
            };
            let a = extremality(&seed, 1e-9).unwrap().is_extremal;
            let b = single_class_extremality(&seed, 1e-9).unwrap();
            assert_eq!(a, b, "disagreement at trial {trial} (d={d}, m={m}, rank={rank})");
        }
    }

    #[test]
    fn max_rank_in_single_class_is_multiplicity() {
        // random rank-m seeds are extremal with probability ~1; rank m+1
        // seeds can never be
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let (d, m) = (3, 2);
        let dec = single_block_dec(d, m);
        let xi = random_single_block_seed(&mut rng, d, m, m);
        let seed = PovmSeed::with_decomposition(xi, dec.clone(), 1e-7).unwrap();
        assert!(extremality(&seed, 1e-9).unwrap().is_extremal);

        let xi_over = random_single_block_seed(&mut rng, d, m, m + 1);
        let seed_over = PovmSeed::with_decomposition(xi_over, dec, 1e-7).unwrap();
        assert!(!extremality(&seed_over, 1e-9).unwrap().is_extremal);
    }

    #[test]
    fn convex_mixtures_are_feasible_and_non_extremal() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let (d, m) = (3, 2);
        let dec = single_block_dec(d, m);
        let xi1 = random_single_block_seed(&mut rng, d, m, 1);
        let xi2 = random_single_block_seed(&mut rng, d, m, 1);
        let lambda = 0.3;
        let mix = xi1.scale_re(lambda).add(&xi2.scale_re(1.0 - lambda));
        let seed = PovmSeed::with_decomposition(mix, dec, 1e-7).unwrap();
        let report = extremality(&seed, 1e-9).unwrap();
        assert!(!report.is_extremal);
        assert!(report.witness.is_some());
    }

    #[test]
    fn verdict_is_covariant() {
        let rep = u1_rep(vec![0, 1, 2, 3]);
        let dec = rep.isotypic_decompose(1e-9).unwrap();
        let e = ComplexMatrix::col_vector(&[C64::new(1.0, 0.0); 4]);
        let xi = e.matmul(&e.dagger());
        let u = rep.unitary(&GroupElement::Angle(1.234)).unwrap();
        let conj = u.dagger().matmul(&xi).matmul(&u);
        let s1 = PovmSeed::with_decomposition(xi, dec.clone(), 1e-9).unwrap();
        let s2 = PovmSeed::with_decomposition(conj, dec, 1e-9).unwrap();
        let r1 = extremality(&s1, 1e-9).unwrap();
        let r2 = extremality(&s2, 1e-9).unwrap();
        assert_eq!(r1.is_extremal, r2.is_extremal);
        assert_eq!(r1.rank, r2.rank);
        assert_eq!(r1.span_achieved, r2.span_achieved);
    }

    #[test]
    fn zero_seed_rejected() {
        let rep = u1_rep(vec![0, 1]);
        assert!(PovmSeed::new(ComplexMatrix::zeros(2, 2), rep, 1e-9).is_err());
    }
}
