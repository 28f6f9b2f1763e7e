//! One line per acceptance criterion; exits nonzero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, Stdio};
use std::io::Write;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use qcp_cli::spec::{example, EXAMPLE_NAMES};
use qcp_core::edgecorr::{
    aperiodicity_report, condition_s_certificate, family_phi, is_hereditary, is_saturated, periodic_at,
    scan_saturated_hereditary, Aperiodicity, FamilyKind, PeriodicOutcome, StructuredFamily, TensorPowerVector,
};
use qcp_core::linalg::rank;
use qcp_core::{
    certify_simplicity, qck_separation, AlgebraElement, Config, EdgeCorrespondence, EdgeVector, Evidence,
    FockOperator, FockTruncation, Ideal, QuantumGraph, QuantumSpace, Route, Separated, SimplicityParams, Verdict,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-9;

type Check = Result<(), String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn cfg() -> Config {
    Config::default()
}

fn tracial(sizes: &[usize]) -> QuantumSpace {
    QuantumSpace::tracial(sizes.to_vec()).unwrap()
}

fn corr(g: &QuantumGraph) -> EdgeCorrespondence {
    EdgeCorrespondence::build(g, &cfg()).unwrap()
}

fn main_graph(n: usize) -> QuantumGraph {
    QuantumGraph::main_example(n).unwrap()
}

/// Graphs used for the Fock criteria.
fn fock_set() -> Vec<(&'static str, QuantumGraph)> {
    vec![
        ("main n=1", main_graph(1)),
        ("main n=2", main_graph(2)),
        ("complete C^2", QuantumGraph::complete(tracial(&[1, 1])).unwrap()),
        ("complete M_2", QuantumGraph::complete(tracial(&[2])).unwrap()),
        ("trivial C^3", QuantumGraph::trivial(tracial(&[1, 1, 1])).unwrap()),
    ]
}

fn builtins() -> Vec<(String, QuantumGraph)> {
    let mut out = Vec::new();
    for name in EXAMPLE_NAMES {
        for (blocks, n) in [(vec![2], 1), (vec![1, 2], 2), (vec![1, 1, 1], 3)] {
            let spec = example(name, &blocks, n).unwrap();
            out.push((format!("{name} {blocks:?} n={n}"), spec.to_graph(&cfg()).unwrap()));
        }
    }
    out
}

fn criterion_1() -> Check {
    let c = cfg();
    for (name, g) in builtins() {
        let schur = g.check_schur_idempotent(&c);
        let cp = g.check_cp(&c);
        let delta = g.space().mm_star_residual();
        ensure(schur.residual < TOL && cp.pass && delta < TOL, || {
            format!("{name}: schur {:e}, cp {}, delta-form {:e}", schur.residual, cp.pass, delta)
        })?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for trial in 0..20 {
        let d = rng.random_range(1..=5);
        let mut m: Vec<Vec<f64>> =
            (0..d).map(|_| (0..d).map(|_| f64::from(rng.random_range(0..2u8))).collect()).collect();
        let zero_one = trial % 2 == 0;
        if !zero_one {
            let bad = [2.0, 0.5, -1.0, 3.0][rng.random_range(0..4)];
            m[rng.random_range(0..d)][rng.random_range(0..d)] = bad;
        }
        let schur = QuantumGraph::classical_unchecked(&m).unwrap().check_schur_idempotent(&c);
        ensure(schur.pass == zero_one, || format!("Schur check {} on {m:?}", schur.pass))?;
        ensure(QuantumGraph::classical(&m).is_ok() == zero_one, || format!("constructor on {m:?}"))?;
    }
    Ok(())
}

fn criterion_2() -> Check {
    let c = cfg();
    let g = main_graph(1);
    let e = corr(&g);
    ensure(e.is_faithful(&c), || "main example not faithful".into())?;
    ensure(!e.is_full(&c), || "main example full".into())?;
    ensure(g.quantum_sinks(&c) == vec![2], || format!("sinks {:?}", g.quantum_sinks(&c)))?;
    ensure(g.quantum_sources(&c).is_empty(), || "sources present".into())?;
    ensure(e.inner_ideal(&c) == Ideal::new(vec![0, 1]), || format!("K = {:?}", e.inner_ideal(&c)))?;
    for (name, g) in builtins() {
        let Ok(e) = EdgeCorrespondence::build(&g, &c) else { continue };
        ensure(e.inner_ideal(&c) == g.range_ideal(&c), || format!("{name}: inner ideal differs from range ideal"))?;
    }
    Ok(())
}

/// Rank of `{e_p ε e_r}` computed from the tensor `ε` directly.
fn spanning_rank(g: &QuantumGraph) -> usize {
    let space = g.space();
    let d = space.dim();
    let eps = g.epsilon_vector().coeffs;
    let w = space.metric();
    let mut cols = DMatrix::<C64>::zeros(d * d, d * d);
    for p in 0..d {
        let l = space.left_mul_matrix(&space.unit(p));
        for r in 0..d {
            let rm = space.right_mul_matrix(&space.unit(r));
            let t = &l * &eps * rm.transpose();
            // weight by the ambient metric so the rank is taken in the right geometry
            let v = DVector::from_fn(d * d, |k, _| t[(k / d, k % d)] * (w[k / d] * w[k % d]).sqrt());
            cols.set_column(p * d + r, &v);
        }
    }
    rank(&cols, 1e-8)
}

fn criterion_3() -> Check {
    for sizes in [vec![1], vec![2], vec![1, 1], vec![1, 2], vec![1, 1, 1]] {
        let s = tracial(&sizes);
        let d = s.dim();
        let t = QuantumGraph::trivial(s.clone()).unwrap();
        let k = QuantumGraph::complete(s).unwrap();
        ensure(corr(&t).dim() == d, || format!("trivial {sizes:?}: {} vs {d}", corr(&t).dim()))?;
        ensure(corr(&k).dim() == d * d, || format!("complete {sizes:?}: {} vs {}", corr(&k).dim(), d * d))?;
    }
    let g = main_graph(1);
    let oracle = spanning_rank(&g);
    ensure(oracle == 5 && corr(&g).dim() == 5, || format!("main n=1: dim {} oracle {oracle}", corr(&g).dim()))
}

fn criterion_4() -> Check {
    for (name, g) in fock_set() {
        let e = corr(&g);
        let f = FockTruncation::new(&e, 3, &cfg()).map_err(|err| format!("{name}: {err}"))?;
        let phi = e.phi_compacts_check();
        let r = f.verify_toeplitz_identities();
        ensure(phi < TOL && r.max() < TOL, || format!("{name}: phi {phi:e}, toeplitz {r:?}"))?;
    }
    Ok(())
}

fn criterion_5() -> Check {
    for (name, g) in fock_set() {
        let f = FockTruncation::new(&corr(&g), 3, &cfg()).map_err(|err| format!("{name}: {err}"))?;
        let q = f.verify_qck();
        ensure(
            q.qck1_residual < TOL && q.qck2_defect_residual < TOL && q.qck3_defect_residual < TOL && q.qck3_off_vacuum < TOL,
            || format!("{name}: {q:?}"),
        )?;
    }
    Ok(())
}

fn criterion_6() -> Check {
    let f = FockTruncation::new(&corr(&main_graph(1)), 3, &cfg()).unwrap();
    let k = Ideal::new(vec![0, 1]);
    let outside = f.separation_check(&k, 2, &cfg()).map_err(|e| e.to_string())?;
    ensure(outside, || "q = 3 not separated".into())?;
    for q in [0, 1] {
        let r = f.separation_residual(&k, q, &cfg()).map_err(|e| e.to_string())?;
        ensure(r <= TOL, || format!("q = {} inside K has residual {r:e}", q + 1))?;
    }
    Ok(())
}

/// `t^m(ξ)` as a sum of products of single creations over product labels.
fn creation_power(f: &FockTruncation, xi: &TensorPowerVector) -> FockOperator {
    let k1 = f.correspondence().dim();
    let m = xi.level;
    let unit = |i: usize| {
        let mut c = DVector::zeros(k1);
        c[i] = C64::new(1.0, 0.0);
        f.op_t(&EdgeVector { coeffs: c })
    };
    let singles: Vec<FockOperator> = (0..k1).map(unit).collect();
    let mut acc: Option<FockOperator> = None;
    for (label, c) in xi.coeffs.iter().enumerate() {
        if c.norm() == 0.0 {
            continue;
        }
        let mut rest = label;
        let mut digits = vec![0; m];
        for slot in (0..m).rev() {
            digits[slot] = rest % k1;
            rest /= k1;
        }
        let mut op = singles[digits[0]].clone();
        for &dgt in &digits[1..] {
            op = op.compose(&singles[dgt]);
        }
        let term = op.scale(*c);
        acc = Some(match acc {
            None => term,
            Some(a) => a.add(&term),
        });
    }
    acc.expect("nonzero vector")
}

/// Refutes non-returning on the vacuum of a level-3 truncation: some
/// `t²(ξ)* t(b_j) t²(ξ)` acts nontrivially on level 0.
fn fock_refutes(f: &FockTruncation, xi: &TensorPowerVector) -> bool {
    let k1 = f.correspondence().dim();
    let tm = creation_power(f, xi);
    let scale = tm.max_abs_on(0).powi(2).max(1e-300);
    (0..k1).any(|j| {
        let mut c = DVector::zeros(k1);
        c[j] = C64::new(1.0, 0.0);
        let op = tm.adjoint().compose(&f.op_t(&EdgeVector { coeffs: c })).compose(&tm);
        op.max_abs_on(0) > 1e-8 * scale
    })
}

fn random_element(space: &QuantumSpace, rng: &mut ChaCha8Rng) -> AlgebraElement {
    AlgebraElement::new(DVector::from_fn(space.dim(), |_, _| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    }))
}

fn criterion_7() -> Check {
    let c = cfg();
    let g = main_graph(1);
    let e = corr(&g);
    let tp = qcp_core::TensorPowers::build(&e, 3, &c).map_err(|err| err.to_string())?;
    let kinds = [FamilyKind::Pair { a: 0, b: 1 }, FamilyKind::Pair { a: 1, b: 0 }, FamilyKind::Pair { a: 2, b: 0 }];
    let mut families = Vec::new();
    for kind in kinds {
        for m in [2, 3] {
            let fam = StructuredFamily::new(kind, m, &e, &c).map_err(|err| err.to_string())?;
            let v = fam.vector(&e, &tp);
            let r = tp.is_non_returning(&v, &c).map_err(|err| err.to_string())?;
            ensure(r.non_returning, || format!("{} length {m} returned", kind.label()))?;
            if m == 2 {
                families.push(v);
            }
        }
    }

    let k = QuantumGraph::complete(tracial(&[2])).unwrap();
    let ek = corr(&k);
    let tk = qcp_core::TensorPowers::build(&ek, 2, &c).map_err(|err| err.to_string())?;
    let eps = ek.epsilon_vector().coeffs;
    let v = tk.elementary(&[eps.clone(), eps]);
    let r = tk.is_non_returning(&v, &c).map_err(|err| err.to_string())?;
    ensure(!r.non_returning, || "eps_K (x) eps_K reported non-returning".into())?;

    let f = FockTruncation::new(&e, 3, &c).map_err(|err| err.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let space = e.space().clone();
    let mut seen = [0usize; 2];
    for trial in 0..20 {
        let xi = if trial % 2 == 0 {
            let coords = DVector::from_fn(tp.level(2).dim, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            tp.from_coords(2, &coords).map_err(|err| err.to_string())?
        } else {
            // x·ξ·y keeps a non-returning ξ non-returning
            let base = &families[trial % families.len()];
            let left = tp.left_act(&random_element(&space, &mut rng), base);
            tp.right_act(&left, &random_element(&space, &mut rng))
        };
        let checker = tp.is_non_returning(&xi, &c).map_err(|err| err.to_string())?.non_returning;
        let refuted = fock_refutes(&f, &xi);
        ensure(checker != refuted, || format!("trial {trial}: checker {checker}, Fock refuter {refuted}"))?;
        seen[usize::from(checker)] += 1;
    }
    ensure(seen[0] > 0 && seen[1] > 0, || format!("only one outcome sampled: {seen:?}"))
}

fn criterion_8() -> Check {
    let c = cfg();
    let e = corr(&main_graph(1));
    let cert = condition_s_certificate(&e, 8, &c).map_err(|err| err.to_string())?;
    ensure(cert.certified, || format!("not certified: {:?}", cert.reason))?;
    let expected = [(FamilyKind::Pair { a: 0, b: 1 }, 1), (FamilyKind::Pair { a: 1, b: 0 }, 0), (FamilyKind::Pair { a: 2, b: 0 }, 0)];
    let space = e.space();
    for (block, (kind, target)) in cert.blocks.iter().zip(expected) {
        ensure(block.family == Some(kind), || format!("block {}: {:?}", block.block + 1, block.family))?;
        let phi = family_phi(&e, &StructuredFamily { kind, length: 2 }, &c).map_err(|err| err.to_string())?;
        let image = space.apply(&phi, &space.block_unit(block.block));
        let off = space.one().sub(&space.block_unit(target));
        let leak = space.mul(&off, &image).max_abs();
        ensure(leak < TOL && image.max_abs() > 0.1, || format!("block {}: image leaks {leak:e}", block.block + 1))?;
    }
    let mut hereditary = Vec::new();
    let mut non_hereditary = 0;
    for mask in 1u8..7 {
        let ideal = Ideal::new((0..3).filter(|b| mask >> b & 1 == 1).collect());
        if is_hereditary(&e, &ideal, &c) {
            hereditary.push((ideal.clone(), is_saturated(&e, &ideal, &c)));
        } else {
            non_hereditary += 1;
        }
    }
    ensure(non_hereditary == 5, || format!("{non_hereditary} non-hereditary ideals"))?;
    ensure(hereditary == vec![(Ideal::new(vec![0, 1]), false)], || format!("hereditary: {hereditary:?}"))?;
    ensure(scan_saturated_hereditary(&e, &c).is_empty(), || "saturated hereditary ideal found".into())
}

fn criterion_9() -> Check {
    let c = cfg();
    let p = SimplicityParams::default();
    let run = |g: &QuantumGraph| {
        let v = certify_simplicity(g, &p, &c);
        (v.recheck(g, &c), v)
    };

    let (ok, v) = run(&QuantumGraph::complete(tracial(&[2])).unwrap());
    ensure(ok && v.verdict == Verdict::Simple && v.evidence == Evidence::KrausRank { rank: 4 }, || format!("complete M_2: {v:?}"))?;
    let (ok, v) = run(&QuantumGraph::complete(tracial(&[2, 2])).unwrap());
    ensure(ok && v.verdict == Verdict::Simple && v.route == Route::Schweizer, || format!("complete M_2+M_2: {v:?}"))?;

    let (ok, v) = run(&QuantumGraph::trivial(tracial(&[1, 1, 1])).unwrap());
    ensure(ok && v.verdict == Verdict::NotSimple && matches!(v.evidence, Evidence::InvariantIdeal { .. }), || format!("trivial C^3: {v:?}"))?;
    let (ok, v) = run(&QuantumGraph::trivial(tracial(&[2])).unwrap());
    ensure(ok && v.verdict == Verdict::NotSimple && v.evidence == Evidence::KrausRank { rank: 1 }, || format!("trivial M_2: {v:?}"))?;

    let swap = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]).map(|x| C64::new(x, 0.0));
    let r1 = QuantumGraph::rank_one(tracial(&[2]), &[swap], &c).map_err(|err| err.to_string())?;
    let (ok, v) = run(&r1);
    ensure(ok && v.verdict == Verdict::NotSimple && v.evidence == Evidence::KrausRank { rank: 1 }, || format!("rank-one: {v:?}"))?;

    for n in [1, 2] {
        let g = main_graph(n);
        let (ok, v) = run(&g);
        ensure(ok && v.verdict == Verdict::Simple, || format!("main n={n}: {v:?}"))?;
        let s = qck_separation(&g, &p, &c);
        ensure(s.separated == Separated::True, || format!("main n={n}: separation {s:?}"))?;
    }
    Ok(())
}

fn criterion_10() -> Check {
    let c = cfg();
    let e = corr(&QuantumGraph::trivial(tracial(&[1, 1, 1])).unwrap());
    let a = aperiodicity_report(&e, 3, &c).map_err(|err| err.to_string())?;
    ensure(a == Aperiodicity::PeriodicAt { n: 1 }, || format!("trivial: {a:?}"))?;
    let w = periodic_at(&e, 1, &c).map_err(|err| err.to_string())?;
    ensure(matches!(w, PeriodicOutcome::Periodic { .. }), || format!("witness does not re-validate: {w:?}"))?;

    let e = corr(&main_graph(1));
    let a = aperiodicity_report(&e, 3, &c).map_err(|err| err.to_string())?;
    ensure(
        matches!(&a, Aperiodicity::AperiodicCertified { reason } if reason.contains("sink")),
        || format!("main: {a:?}"),
    )?;

    for sizes in [vec![1, 1], vec![2]] {
        let e = corr(&QuantumGraph::complete(tracial(&sizes)).unwrap());
        let a = aperiodicity_report(&e, 3, &c).map_err(|err| err.to_string())?;
        ensure(a == Aperiodicity::NoPeriodUpToN { n: 3 }, || format!("complete {sizes:?}: {a:?}"))?;
        let d = e.space().dim();
        ensure((1..=3).all(|n| e.predicted_power_dim(n) != d), || "dimension count matches".into())?;
    }
    Ok(())
}

fn qcp(args: &[&str], stdin: &str) -> Vec<u8> {
    let mut child = Command::new(env!("CARGO_BIN_EXE_qcp"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .expect("spawn qcp");
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success(), "qcp {args:?} failed");
    out.stdout
}

fn criterion_11() -> Check {
    for name in EXAMPLE_NAMES {
        for blocks in ["2", "1,2", "1,1,1"] {
            let spec = String::from_utf8(qcp(&["example", name, "--blocks", blocks, "--n", "1"], "")).unwrap();
            let a = qcp(&["certify", "--json", "--seed", "0"], &spec);
            let b = qcp(&["certify", "--json", "--seed", "0"], &spec);
            ensure(a == b, || format!("{name} {blocks}: reports differ"))?;
        }
    }
    Ok(())
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("1 delta-form and Schur idempotence", criterion_1),
        ("2 main example structure", criterion_2),
        ("3 correspondence dimensions", criterion_3),
        ("4 compact action and Toeplitz identities", criterion_4),
        ("5 QCK relations and defects", criterion_5),
        ("6 separation desk check", criterion_6),
        ("7 non-returning vectors", criterion_7),
        ("8 Condition (S) and ideal classification", criterion_8),
        ("9 simplicity verdicts", criterion_9),
        ("10 periodicity", criterion_10),
        ("11 deterministic reports", criterion_11),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match result {
            Ok(()) => println!("PASS  criterion {name}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  criterion {name}: {why}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
