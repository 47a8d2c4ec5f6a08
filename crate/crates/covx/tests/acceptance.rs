//! End-to-end acceptance suite. Each numbered criterion prints one
//! `criterion N: pass` / `criterion N: FAIL` line (visible with
//! `cargo test --test acceptance -- --nocapture`); the test fails if any
//! criterion fails.

use std::time::Instant;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use covx::channels::{
    builtin_examples, choi_from_kraus, clone12_fidelity_operator, cloning_rep, covariance_check,
    choi_extremality_noncov, project_covariant, projector, qo_extremality, superposition,
    swap_operator, ChoiOperator, KrausSet, TniVerdict,
};
use covx::numkernel::{
    hermitian_eig, max_entangled_vec, op_to_vec, partial_trace, ComplexMatrix, TensorShape,
};
use covx::optimizer::{maximize_linear, ConvexSetSpec, CostOperator, OptimizeConfig};
use covx::povm::{check_seed, extremality, single_class_extremality, PovmSeed};
use covx::reps::{BlockLabel, IsotypicBlock, IsotypicDecomposition, Representation, SUdVariant};

type CheckResult = Result<(), String>;

fn ensure(cond: bool, msg: impl Into<String>) -> CheckResult {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn binom(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let mut acc = 1usize;
    for i in 0..k.min(n - k) {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

fn randc(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
}

fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(r, c, |_, _| randc(rng))
}

fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    random_matrix(rng, n, n).hermitian_part()
}

/// Decomposition whose aligning isometries are consecutive identity slices.
fn synthetic_decomposition(dims: &[(usize, usize)]) -> IsotypicDecomposition {
    let ambient: usize = dims.iter().map(|&(d, m)| d * m).sum();
    let mut blocks = Vec::new();
    let mut offset = 0;
    for (idx, &(d, m)) in dims.iter().enumerate() {
        let isometry = ComplexMatrix::from_fn(ambient, d * m, |i, j| {
            if i == offset + j {
                C64::new(1.0, 0.0)
            } else {
                C64::ZERO
            }
        });
        blocks.push(IsotypicBlock {
            label: BlockLabel::Class(idx),
            irrep_dim: d,
            multiplicity: m,
            isometry,
        });
        offset += d * m;
    }
    IsotypicDecomposition::from_blocks(blocks, ambient, 1e-9).unwrap()
}

/// `f(M)` through the spectral decomposition of a Hermitian matrix.
fn spectral_map(m: &ComplexMatrix, f: impl Fn(f64) -> f64) -> ComplexMatrix {
    let (vals, vecs) = hermitian_eig(m, 1e-12).unwrap();
    let diag: Vec<C64> = vals.iter().map(|&l| C64::new(f(l), 0.0)).collect();
    let d = ComplexMatrix::diagonal(&diag);
    vecs.matmul(&d).matmul(&vecs.dagger())
}

/// Rescales a PSD operator so each block trace equals `d_k I`; `None` if a
/// block trace is singular.
fn normalize_seed(a: &ComplexMatrix, dec: &IsotypicDecomposition) -> Option<ComplexMatrix> {
    let n = dec.carrier_dim();
    let mut scaler = ComplexMatrix::zeros(n, n);
    for b in dec.blocks() {
        let t = b.block_trace(a);
        let (vals, _) = hermitian_eig(&t, 1e-12).ok()?;
        let vmax = vals.iter().fold(0.0f64, |acc, &v| acc.max(v.abs()));
        if vals.iter().any(|&v| v < 1e-6 * vmax.max(1e-12)) {
            return None;
        }
        let m = spectral_map(&t, |l| (b.irrep_dim as f64 / l).sqrt());
        scaler = scaler.add(&b.embed(&m));
    }
    Some(scaler.matmul(a).matmul(&scaler.dagger()))
}

fn weight_multiplicities(rep: &Representation) -> Result<Vec<(i64, usize)>, String> {
    let dec = rep.isotypic_decompose(1e-9).map_err(s)?;
    let mut out: Vec<(i64, usize)> = dec
        .blocks()
        .iter()
        .map(|b| match b.label {
            BlockLabel::Weight(w) => Ok((w, b.multiplicity)),
            _ => Err("expected weight-labeled blocks".to_string()),
        })
        .collect::<Result<_, _>>()?;
    out.sort();
    Ok(out)
}

// ---------------------------------------------------------------------------

/// 1. The phase-covariance decompositions of the cloning spaces reproduce the
/// multiplicity patterns (1,3,3,1) and (1,4,6,4,1); n-qubit phase tensor
/// powers give binomial multiplicities with the central-binomial square sum.
fn criterion_1() -> CheckResult {
    for (n_out, expect) in [(2usize, vec![1, 3, 3, 1]), (3, vec![1, 4, 6, 4, 1])] {
        let start = Instant::now();
        let ms = weight_multiplicities(&cloning_rep(n_out))?;
        let got: Vec<usize> = ms.iter().map(|&(_, m)| m).collect();
        let weights: Vec<i64> = ms.iter().map(|&(w, _)| w).collect();
        ensure(
            got == expect,
            format!("1 -> {n_out} multiplicities {got:?}, expected {expect:?}"),
        )?;
        ensure(
            weights == (-1..=n_out as i64).collect::<Vec<_>>(),
            format!("1 -> {n_out} unexpected weights {weights:?}"),
        )?;
        ensure(
            start.elapsed().as_secs_f64() < 1.0,
            format!("1 -> {n_out} decomposition exceeded 1 s"),
        )?;
    }
    for n in [2usize, 3, 4] {
        let start = Instant::now();
        let weights: Vec<i64> = (0..(1usize << n)).map(|i| i.count_ones() as i64).collect();
        let rep = Representation::u1_weights(weights).map_err(s)?;
        let ms = weight_multiplicities(&rep)?;
        let expect: Vec<(i64, usize)> = (0..=n).map(|k| (k as i64, binom(n, k))).collect();
        ensure(ms == expect, format!("{n}-qubit multiplicities {ms:?}"))?;
        let sq: usize = ms.iter().map(|&(_, m)| m * m).sum();
        ensure(
            sq == binom(2 * n, n),
            format!("{n}-qubit square sum {sq}, expected {}", binom(2 * n, n)),
        )?;
        ensure(
            start.elapsed().as_secs_f64() < 1.0,
            format!("{n}-qubit decomposition exceeded 1 s"),
        )?;
    }
    Ok(())
}

/// 2. Maximizing the equatorial 1 -> 2 cloning fidelity over covariant
/// trace-preserving channels returns (2 + sqrt 2)/4 and an extremal maximizer
/// in under 30 s.
fn criterion_2() -> CheckResult {
    let start = Instant::now();
    let dec = cloning_rep(2).isotypic_decompose(1e-9).map_err(s)?;
    let set = ConvexSetSpec::channels(dec, 2, 4, None).map_err(s)?;
    let w = CostOperator::new(clone12_fidelity_operator()).map_err(s)?;
    let out = maximize_linear(&w, &set, &OptimizeConfig::default()).map_err(s)?;
    let target = (2.0 + 2f64.sqrt()) / 4.0;
    ensure(
        (out.value - target).abs() < 1e-6,
        format!("optimum {:.9}, expected {target:.9}", out.value),
    )?;
    ensure(
        out.extremality.as_ref().map_or(false, |r| r.is_extremal),
        "maximizer is not extremal".to_string(),
    )?;
    ensure(
        start.elapsed().as_secs_f64() < 30.0,
        "optimization exceeded 30 s".to_string(),
    )
}

/// 3. The printed cloning optima are trace-preserving and covariant, and the
/// extremality verdicts are certified: the 1 -> 3 rank-one operator is
/// extremal; the 1 -> 2 rank-two operator is the midpoint of two feasible
/// rank-one covariant operators (independently verified below), so the
/// non-extremal verdict carries a validated witness.
fn criterion_3() -> CheckResult {
    for (name, n_out) in [("clone12", 2usize), ("clone13", 3)] {
        let ex = builtin_examples(name, 2).map_err(s)?;
        let tni = ex.choi.base().check_tni(1e-9);
        ensure(
            tni.verdict == TniVerdict::TracePreserving,
            format!("{name} is not trace-preserving"),
        )?;
        let out_weights: Vec<i64> = (0..(1usize << n_out))
            .map(|i| i.count_ones() as i64)
            .collect();
        let rep_v = Representation::u1_weights(out_weights).map_err(s)?;
        let rep_u = Representation::u1_weights(vec![0, 1]).map_err(s)?;
        let resid = covariance_check(ex.choi.base(), &rep_v, &rep_u, 0).map_err(s)?;
        ensure(resid < 1e-9, format!("{name} covariance residual {resid:.3e}"))?;
        let report = qo_extremality(&ex.choi, 1e-9).map_err(s)?;
        ensure(
            report.is_extremal == ex.expected_extremal,
            format!(
                "{name}: verdict {} but expected {}",
                report.is_extremal, ex.expected_extremal
            ),
        )?;
    }
    // independent certificate for the 1 -> 2 midpoint: both rank-one
    // endpoints are feasible covariant trace-preserving operators and the
    // printed operator is their mean
    let inv_sqrt2 = 1.0 / 2f64.sqrt();
    let psi0 = superposition(&[(&[0, 0, 0], inv_sqrt2), (&[0, 1, 1], 0.5), (&[1, 0, 1], 0.5)]);
    let psi1 = superposition(&[(&[1, 1, 1], inv_sqrt2), (&[1, 0, 0], 0.5), (&[0, 1, 0], 0.5)]);
    let ex = builtin_examples("clone12", 2).map_err(s)?;
    let mean = projector(&psi0).add(&projector(&psi1));
    ensure(
        mean.sub(ex.choi.base().matrix()).frobenius_norm() < 1e-12,
        "printed rank-two operator does not match its decomposition".to_string(),
    )?;
    let rep = cloning_rep(2);
    for psi in [&psi0, &psi1] {
        let endpoint = ChoiOperator::new(projector(psi).scale_re(2.0), 2, 4).map_err(s)?;
        ensure(
            endpoint.check_tni(1e-9).verdict == TniVerdict::TracePreserving,
            "endpoint is not trace-preserving".to_string(),
        )?;
        for u in rep.sample_unitaries(0) {
            ensure(
                endpoint.matrix().commutator(&u).frobenius_norm() < 1e-10,
                "endpoint is not covariant".to_string(),
            )?;
        }
    }
    // the witness attached to the non-extremal verdict stays feasible
    let report = qo_extremality(&ex.choi, 1e-9).map_err(s)?;
    let w = report.witness.ok_or("missing witness")?;
    let t = report.witness_step.ok_or("missing witness step")?;
    for sign in [1.0, -1.0] {
        let shifted =
            ChoiOperator::new(ex.choi.base().matrix().add(&w.scale_re(sign * t)), 2, 4)
                .map_err(s)?;
        ensure(
            shifted.check_tni(1e-7).verdict == TniVerdict::TracePreserving,
            "shifted operator left the trace-preserving set".to_string(),
        )?;
    }
    Ok(())
}

/// 4. SU(d) examples, d = 2, 3: with V = U the single-block operators are
/// extremal while the mixed two-block operator is not (with a valid witness);
/// with V = U* the symmetric/antisymmetric partial traces equal (d +- 1)/2 I
/// and the normalized projectors are extremal.
fn criterion_4() -> CheckResult {
    for d in [2usize, 3] {
        let shape = TensorShape::new(vec![d, d]).map_err(s)?;
        let rep = Representation::su_d_tensor(d, SUdVariant::UUstar).map_err(s)?;
        let dec = rep.isotypic_decompose(1e-9).map_err(s)?;
        // trivial-block operator |I><I|
        let bell = max_entangled_vec(d);
        let r0 = bell.matmul(&bell.dagger());
        let choi0 = ChoiOperator::new(r0.clone(), d, d).map_err(s)?;
        let cov0 = project_covariant(&choi0, &dec, 1e-9).map_err(s)?;
        ensure(
            qo_extremality(&cov0, 1e-9).map_err(s)?.is_extremal,
            format!("d={d}: trivial-block operator not extremal"),
        )?;
        // adjoint-block operator (depolarizing-type)
        let dep = builtin_examples("depolarizing", d).map_err(s)?;
        ensure(
            qo_extremality(&dep.choi, 1e-9).map_err(s)?.is_extremal,
            format!("d={d}: adjoint-block operator not extremal"),
        )?;
        // the mixture occupies both blocks and cannot be extremal
        let mixed = r0.scale_re(0.5).add(&dep.choi.base().matrix().scale_re(0.5));
        let choi_m = ChoiOperator::new(mixed.clone(), d, d).map_err(s)?;
        let cov_m = project_covariant(&choi_m, &dec, 1e-9).map_err(s)?;
        let report = qo_extremality(&cov_m, 1e-9).map_err(s)?;
        ensure(!report.is_extremal, format!("d={d}: mixture reported extremal"))?;
        let w = report.witness.ok_or("missing mixture witness")?;
        let t = report.witness_step.ok_or("missing mixture witness step")?;
        ensure(
            dec.twirl(&w).sub(&w).frobenius_norm() < 1e-7,
            format!("d={d}: witness is not covariant"),
        )?;
        ensure(
            partial_trace(&w, &shape, &[0]).map_err(s)?.frobenius_norm() < 1e-7,
            format!("d={d}: witness does not preserve the trace constraint"),
        )?;
        for sign in [1.0, -1.0] {
            let shifted = mixed.add(&w.scale_re(sign * t));
            ensure(
                shifted.is_psd(1e-7),
                format!("d={d}: shifted mixture left the cone"),
            )?;
        }
        // V = U*: symmetric/antisymmetric structure
        let e = swap_operator(d);
        let id = ComplexMatrix::identity(d * d);
        for (sign, name) in [(1.0, "transpose_plus"), (-1.0, "transpose_minus")] {
            let p = id.add(&e.scale_re(sign)).scale_re(0.5);
            let tr = partial_trace(&p, &shape, &[1]).map_err(s)?;
            let expect = ComplexMatrix::identity(d).scale_re((d as f64 + sign) / 2.0);
            ensure(
                tr.sub(&expect).frobenius_norm() < 1e-12,
                format!("d={d}: projector partial trace mismatch ({name})"),
            )?;
            let ex = builtin_examples(name, d).map_err(s)?;
            ensure(
                qo_extremality(&ex.choi, 1e-9).map_err(s)?.is_extremal,
                format!("d={d}: {name} not extremal"),
            )?;
        }
    }
    Ok(())
}

/// 5. Randomized seed properties, 1000 instances with carrier dim <= 12:
/// rank-one feasible seeds are extremal; under an irreducible block every
/// rank >= 2 feasible seed is non-extremal with a validated witness; the
/// rank bound holds for every seed reported extremal.
fn criterion_5() -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    // rank-one seeds over mixed decompositions with m_k <= d_k
    let mut count = 0;
    while count < 400 {
        let mut dims = Vec::new();
        loop {
            dims.clear();
            let nb = rng.gen_range(1..=3usize);
            for _ in 0..nb {
                let d = rng.gen_range(1..=3usize);
                let m = rng.gen_range(1..=d);
                dims.push((d, m));
            }
            if dims.iter().map(|&(d, m)| d * m).sum::<usize>() <= 12 {
                break;
            }
        }
        let dec = synthetic_decomposition(&dims);
        let v = random_matrix(&mut rng, dec.carrier_dim(), 1);
        let a = v.matmul(&v.dagger());
        let Some(xi) = normalize_seed(&a, &dec) else { continue };
        let Ok(seed) = PovmSeed::with_decomposition(xi, dec, 1e-7) else { continue };
        let report = extremality(&seed, 1e-9).map_err(s)?;
        ensure(
            report.is_extremal,
            format!("rank-one seed not extremal (dims {dims:?})"),
        )?;
        count += 1;
    }
    // irreducible block, rank >= 2
    let mut count = 0;
    while count < 300 {
        let n = rng.gen_range(2..=12usize);
        let r = rng.gen_range(2..=4usize.min(n));
        let dec = synthetic_decomposition(&[(n, 1)]);
        let mut a = ComplexMatrix::zeros(n, n);
        for _ in 0..r {
            let v = random_matrix(&mut rng, n, 1);
            a = a.add(&v.matmul(&v.dagger()));
        }
        let xi = a.scale_re(n as f64 / a.trace().re);
        let seed = PovmSeed::with_decomposition(xi.clone(), dec.clone(), 1e-7).map_err(s)?;
        let report = extremality(&seed, 1e-9).map_err(s)?;
        ensure(!report.is_extremal, format!("rank-{r} irreducible seed reported extremal"))?;
        let theta = report.witness.ok_or("missing seed witness")?;
        let t = report.witness_step.ok_or("missing seed witness step")?;
        ensure(theta.is_hermitian(1e-8), "witness not Hermitian".to_string())?;
        for sign in [1.0, -1.0] {
            let shifted = xi.add(&theta.scale_re(sign * t));
            let feas = check_seed(&shifted, &dec, 1e-6).map_err(s)?;
            ensure(feas.feasible, "shifted seed left the feasible set".to_string())?;
        }
        count += 1;
    }
    // rank bound for seeds reported extremal
    let mut count = 0;
    while count < 300 {
        let mut dims = Vec::new();
        loop {
            dims.clear();
            let nb = rng.gen_range(1..=3usize);
            for _ in 0..nb {
                dims.push((rng.gen_range(1..=3usize), rng.gen_range(1..=3usize)));
            }
            if dims.iter().map(|&(d, m)| d * m).sum::<usize>() <= 12 {
                break;
            }
        }
        let dec = synthetic_decomposition(&dims);
        let r = rng.gen_range(1..=4usize);
        let mut a = ComplexMatrix::zeros(dec.carrier_dim(), dec.carrier_dim());
        for _ in 0..r {
            let v = random_matrix(&mut rng, dec.carrier_dim(), 1);
            a = a.add(&v.matmul(&v.dagger()));
        }
        let Some(xi) = normalize_seed(&a, &dec) else { continue };
        let bound = dec.multiplicity_square_sum();
        let Ok(seed) = PovmSeed::with_decomposition(xi, dec, 1e-7) else { continue };
        let report = extremality(&seed, 1e-9).map_err(s)?;
        if report.is_extremal {
            ensure(
                report.rank * report.rank <= bound,
                format!("rank bound violated: rank {} vs bound {bound}", report.rank),
            )?;
        }
        count += 1;
    }
    Ok(())
}

/// 6. Oracle agreement: the general seed test vs the single-class spectral
/// test on 500 random single-block instances, and the covariant channel test
/// under a trivial symmetry vs the direct Kraus-independence test on 500
/// random channels with dim_in * dim_out <= 16.
fn criterion_6() -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut count = 0;
    while count < 500 {
        let d = rng.gen_range(1..=4usize);
        let m = rng.gen_range(1..=3usize);
        if d * m > 12 {
            continue;
        }
        let nops = rng.gen_range(1..=3usize);
        let ws: Vec<ComplexMatrix> = (0..nops).map(|_| random_matrix(&mut rng, d, m)).collect();
        let mut g = ComplexMatrix::zeros(m, m);
        for w in &ws {
            g = g.add(&w.dagger().matmul(w));
        }
        let (vals, _) = hermitian_eig(&g, 1e-12).map_err(s)?;
        let vmax = vals.iter().fold(0.0f64, |acc, &v| acc.max(v));
        if vals.iter().any(|&v| v < 1e-6 * vmax.max(1e-12)) {
            continue;
        }
        let g_inv_sqrt = spectral_map(&g, |l| 1.0 / l.sqrt());
        let mut xi = ComplexMatrix::zeros(d * m, d * m);
        for w in &ws {
            let wv = op_to_vec(&w.matmul(&g_inv_sqrt).scale_re((d as f64).sqrt()));
            xi = xi.add(&wv.matmul(&wv.dagger()));
        }
        let dec = synthetic_decomposition(&[(d, m)]);
        let Ok(seed) = PovmSeed::with_decomposition(xi, dec, 1e-7) else { continue };
        let general = extremality(&seed, 1e-9).map_err(s)?.is_extremal;
        let spectral = single_class_extremality(&seed, 1e-9).map_err(s)?;
        ensure(
            general == spectral,
            format!("seed oracles disagree (d={d}, m={m}, nops={nops})"),
        )?;
        count += 1;
    }
    let mut count = 0;
    while count < 500 {
        let di = rng.gen_range(2..=4usize);
        let dout = rng.gen_range(2..=(16 / di).min(4));
        let nops = rng.gen_range(1..=3usize);
        let ops: Vec<ComplexMatrix> = (0..nops)
            .map(|_| random_matrix(&mut rng, dout, di))
            .collect();
        // rescale to a trace-nonincreasing operation
        let mut k = ComplexMatrix::zeros(di, di);
        for w in &ops {
            k = k.add(&w.dagger().matmul(w));
        }
        let scale = 1.0 / k.opnorm().sqrt();
        let ops: Vec<ComplexMatrix> = ops.into_iter().map(|w| w.scale_re(scale)).collect();
        let ks = KrausSet::new(ops, di, dout).map_err(s)?;
        let choi = choi_from_kraus(&ks);
        let spectral = choi.kraus(1e-10).map_err(s)?;
        let direct = choi_extremality_noncov(&spectral, 1e-9);
        let dec = synthetic_decomposition(&[(1, di * dout)]);
        let cov = project_covariant(&choi, &dec, 1e-12).map_err(s)?;
        let general = qo_extremality(&cov, 1e-9).map_err(s)?.is_extremal;
        ensure(
            general == direct,
            format!("channel oracles disagree (di={di}, dout={dout}, nops={nops})"),
        )?;
        count += 1;
    }
    Ok(())
}

/// 7. Structural identities on randomized suites: twirl idempotence and
/// covariance, resolution of identity, Choi/Kraus round trip, duality of the
/// two channel pictures, and exact-quadrature normalization of feasible
/// seeds.
fn criterion_7() -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    for trial in 0..40 {
        let n = rng.gen_range(3..=6usize);
        let weights: Vec<i64> = (0..n).map(|_| rng.gen_range(-2..=2i64)).collect();
        let rep = Representation::u1_weights(weights).map_err(s)?;
        let dec = rep.isotypic_decompose(1e-9).map_err(s)?;
        ensure(
            dec.resolution_residual() < 1e-9,
            format!("trial {trial}: resolution of identity residual"),
        )?;
        let z = random_hermitian(&mut rng, n);
        let tw = rep.twirl(&z).map_err(s)?;
        let tw2 = rep.twirl(&tw).map_err(s)?;
        ensure(
            tw2.sub(&tw).frobenius_norm() < 1e-9,
            format!("trial {trial}: twirl not idempotent"),
        )?;
        ensure(
            dec.twirl(&z).sub(&tw).frobenius_norm() < 1e-9,
            format!("trial {trial}: block twirl disagrees with group twirl"),
        )?;
        for u in rep.sample_unitaries(trial as u64) {
            ensure(
                tw.commutator(&u).frobenius_norm() < 1e-9,
                format!("trial {trial}: twirl output not invariant"),
            )?;
        }
    }
    for trial in 0..40 {
        let di = rng.gen_range(2..=3usize);
        let dout = rng.gen_range(2..=3usize);
        let nops = rng.gen_range(1..=3usize);
        let ops: Vec<ComplexMatrix> = (0..nops)
            .map(|_| random_matrix(&mut rng, dout, di))
            .collect();
        let ks = KrausSet::new(ops, di, dout).map_err(s)?;
        let choi = choi_from_kraus(&ks);
        let back = choi_from_kraus(&choi.kraus(1e-10).map_err(s)?);
        ensure(
            back.matrix().sub(choi.matrix()).frobenius_norm() < 1e-9,
            format!("trial {trial}: Choi/Kraus round trip"),
        )?;
        let mut rho = random_matrix(&mut rng, di, di);
        rho = rho.matmul(&rho.dagger());
        rho = rho.scale_re(1.0 / rho.trace().re);
        let x = random_hermitian(&mut rng, dout);
        let lhs = x.hs_inner(&choi.apply(&rho).map_err(s)?).re;
        let rhs = choi.apply_heisenberg(&x).map_err(s)?.hs_inner(&rho).re;
        ensure(
            (lhs - rhs).abs() < 1e-9,
            format!("trial {trial}: duality mismatch {lhs} vs {rhs}"),
        )?;
    }
    // exact-quadrature normalization: averaging any feasible seed over the
    // group gives the identity
    for n_out in [2usize, 3] {
        let rep = cloning_rep(n_out);
        ensure(
            rep.has_exact_quadrature(),
            "phase representation should admit exact quadrature".to_string(),
        )?;
        let dec = rep.isotypic_decompose(1e-9).map_err(s)?;
        let n = dec.carrier_dim();
        let a = {
            let v = random_matrix(&mut rng, n, n);
            v.matmul(&v.dagger()).add(&ComplexMatrix::identity(n))
        };
        let xi = normalize_seed(&a, &dec).ok_or("seed normalization failed")?;
        let us = rep.sample_unitaries(0);
        let mut avg = ComplexMatrix::zeros(n, n);
        for u in &us {
            avg = avg.add(&u.dagger().matmul(&xi).matmul(u));
        }
        avg = avg.scale_re(1.0 / us.len() as f64);
        ensure(
            avg.sub(&ComplexMatrix::identity(n)).frobenius_norm() < 1e-8,
            format!("1 -> {n_out}: group average of the seed is not the identity"),
        )?;
    }
    Ok(())
}

/// 8. The 1 -> 2 classification families: every row, instantiated at three
/// parameter settings satisfying its norm constraints, yields a
/// trace-preserving covariant operator.
fn criterion_8() -> CheckResult {
    let sq2 = 1.0 / 2f64.sqrt();
    let sq3 = 1.0 / 3f64.sqrt();
    // each entry: (row name, instantiations as vector lists)
    let mut rows: Vec<(&str, Vec<Vec<ComplexMatrix>>)> = Vec::new();
    rows.push((
        "{-1,2}",
        vec![vec![
            superposition(&[(&[0, 0, 1], 1.0)]),
            superposition(&[(&[1, 1, 0], 1.0)]),
        ]],
    ));
    // |a|^2+|b'|^2+|c'|^2 = 1 and |a'|^2+|b|^2+|c|^2 = 1
    let settings_01: [[f64; 6]; 3] = [
        [0.6, 0.48, 0.64, 0.6, 0.8, 0.0],
        [1.0, 0.0, 0.0, 1.0, 0.0, 0.0],
        [sq2, 0.5, 0.5, sq2, 0.5, 0.5],
    ];
    rows.push((
        "{0,1}",
        settings_01
            .iter()
            .map(|&[a, b, c, ap, bp, cp]| {
                vec![
                    superposition(&[(&[0, 0, 0], a), (&[0, 1, 1], b), (&[1, 0, 1], c)]),
                    superposition(&[(&[1, 1, 1], ap), (&[1, 0, 0], bp), (&[0, 1, 0], cp)]),
                ]
            })
            .collect(),
    ));
    // |a|^2+|b|^2+|c|^2 = 1
    let settings_0m1: [[f64; 3]; 3] = [[0.5, 0.5, sq2], [0.6, 0.0, 0.8], [0.0, 0.6, 0.8]];
    rows.push((
        "{0,-1}",
        settings_0m1
            .iter()
            .map(|&[a, b, c]| {
                vec![
                    superposition(&[(&[0, 0, 0], 1.0), (&[0, 1, 1], a), (&[1, 0, 1], b)]),
                    superposition(&[(&[0, 0, 1], c)]),
                ]
            })
            .collect(),
    ));
    // |a|^2+|b|^2 = 1 and |c|^2+|d|^2 = 1
    let settings_1m1: [[f64; 4]; 3] = [
        [sq2, sq2, sq2, sq2],
        [1.0, 0.0, 0.6, 0.8],
        [0.6, 0.8, 1.0, 0.0],
    ];
    rows.push((
        "{1,-1}",
        settings_1m1
            .iter()
            .map(|&[a, b, c, d]| {
                vec![
                    superposition(&[(&[1, 0, 0], a), (&[0, 1, 0], b), (&[1, 1, 1], c)]),
                    superposition(&[(&[0, 0, 1], d)]),
                ]
            })
            .collect(),
    ));
    // |a|^2+|b|^2+|d|^2 = 1
    let settings_12: [[f64; 3]; 3] = [[sq3, sq3, sq3], [0.6, 0.8, 0.0], [0.6, 0.0, 0.8]];
    rows.push((
        "{1,2}",
        settings_12
            .iter()
            .map(|&[a, b, d]| {
                vec![
                    superposition(&[(&[1, 0, 0], a), (&[0, 1, 0], b), (&[1, 1, 1], 1.0)]),
                    superposition(&[(&[1, 1, 0], d)]),
                ]
            })
            .collect(),
    ));
    // |a|^2+|d|^2 = 1 and |b|^2+|c|^2 = 1
    let settings_02: [[f64; 4]; 3] = [
        [sq2, sq2, sq2, sq2],
        [1.0, 0.6, 0.8, 0.0],
        [0.6, 1.0, 0.0, 0.8],
    ];
    rows.push((
        "{0,2}",
        settings_02
            .iter()
            .map(|&[a, b, c, d]| {
                vec![
                    superposition(&[(&[0, 0, 0], a), (&[0, 1, 1], b), (&[1, 0, 1], c)]),
                    superposition(&[(&[1, 1, 0], d)]),
                ]
            })
            .collect(),
    ));
    rows.push((
        "{0} rank two",
        vec![vec![
            superposition(&[(&[1, 0, 1], sq2), (&[0, 1, 1], sq2)]),
            superposition(&[(&[0, 0, 0], 1.0)]),
        ]],
    ));
    rows.push((
        "{1} rank two",
        vec![vec![
            superposition(&[(&[0, 1, 0], sq2), (&[1, 0, 0], sq2)]),
            superposition(&[(&[1, 1, 1], 1.0)]),
        ]],
    ));

    let rep = cloning_rep(2);
    let us = rep.sample_unitaries(0);
    for (name, instantiations) in &rows {
        for (i, vectors) in instantiations.iter().enumerate() {
            let r = vectors
                .iter()
                .fold(ComplexMatrix::zeros(8, 8), |acc, v| acc.add(&projector(v)));
            let choi = ChoiOperator::new(r, 2, 4).map_err(s)?;
            ensure(
                choi.check_tni(1e-9).verdict == TniVerdict::TracePreserving,
                format!("row {name}, setting {i}: not trace-preserving"),
            )?;
            for u in &us {
                ensure(
                    choi.matrix().commutator(u).frobenius_norm() < 1e-10,
                    format!("row {name}, setting {i}: not covariant"),
                )?;
            }
        }
    }
    Ok(())
}

#[test]
fn acceptance() {
    let checks: Vec<(&str, fn() -> CheckResult)> = vec![
        ("decomposition multiplicities", criterion_1),
        ("cloning fidelity optimum", criterion_2),
        ("printed optima classified", criterion_3),
        ("SU(d) block structure", criterion_4),
        ("randomized seed properties", criterion_5),
        ("oracle agreement", criterion_6),
        ("structural identities", criterion_7),
        ("classification table coverage", criterion_8),
    ];
    let mut failures = Vec::new();
    println!();
    for (i, (desc, f)) in checks.iter().enumerate() {
        let start = Instant::now();
        match f() {
            Ok(()) => println!(
                "criterion {}: pass ({desc}, {:.2}s)",
                i + 1,
                start.elapsed().as_secs_f64()
            ),
            Err(e) => {
                println!("criterion {}: FAIL ({desc}): {e}", i + 1);
                failures.push(i + 1);
            }
        }
    }
    assert!(failures.is_empty(), "failed criteria: {failures:?}");
}
