use super::*;
use crate::linalg::{max_abs, re, C64};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cfg() -> Config {
    Config::default()
}

fn tracial(sizes: &[usize]) -> QuantumSpace {
    QuantumSpace::tracial(sizes.to_vec()).unwrap()
}

fn corr(g: &QuantumGraph) -> EdgeCorrespondence {
    EdgeCorrespondence::build(g, &cfg()).unwrap()
}

fn main1() -> EdgeCorrespondence {
    corr(&QuantumGraph::main_example(1).unwrap())
}

fn non_tracial() -> QuantumSpace {
    // ρ = diag(s/4, 3s/4) ⊕ (s/d²), with d² = 16/3 and s = d²/(d²+1)
    let d2 = 16.0 / 3.0;
    let s = d2 / (d2 + 1.0);
    let blocks = crate::qspace::BlockStructure::new(vec![2, 1]).unwrap();
    QuantumSpace::new(blocks, vec![vec![s / 4.0, 3.0 * s / 4.0], vec![s / d2]], &cfg()).unwrap()
}

fn random_element(space: &QuantumSpace, rng: &mut ChaCha8Rng) -> AlgebraElement {
    AlgebraElement::new(DVector::from_fn(space.dim(), |_, _| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    }))
}

fn random_vector(k: usize, rng: &mut ChaCha8Rng) -> EdgeVector {
    EdgeVector {
        coeffs: DVector::from_fn(k, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))),
    }
}

fn sample_graphs() -> Vec<QuantumGraph> {
    vec![
        QuantumGraph::trivial(tracial(&[2])).unwrap(),
        QuantumGraph::complete(tracial(&[2])).unwrap(),
        QuantumGraph::complete(tracial(&[1, 2])).unwrap(),
        QuantumGraph::main_example(1).unwrap(),
        QuantumGraph::main_example(2).unwrap(),
        QuantumGraph::complete(non_tracial()).unwrap(),
        QuantumGraph::trivial(non_tracial()).unwrap(),
    ]
}

#[test]
fn dimensions_of_standard_correspondences() {
    for sizes in [vec![1], vec![2], vec![1, 1], vec![2, 1], vec![3]] {
        let s = tracial(&sizes);
        let d = s.dim();
        assert_eq!(corr(&QuantumGraph::trivial(s.clone()).unwrap()).dim(), d);
        assert_eq!(corr(&QuantumGraph::complete(s).unwrap()).dim(), d * d);
    }
    assert_eq!(main1().dim(), 5);
    // 5n² in general: one copy of M_n per classical edge
    assert_eq!(corr(&QuantumGraph::main_example(2).unwrap()).dim(), 20);
}

#[test]
fn zero_graph_has_zero_correspondence() {
    let g = QuantumGraph::unchecked(tracial(&[1, 1]), DMatrix::zeros(2, 2)).unwrap();
    assert!(matches!(EdgeCorrespondence::build(&g, &cfg()), Err(Error::ZeroCorrespondence)));
}

#[test]
fn basis_is_orthonormal() {
    for g in sample_graphs() {
        let e = corr(&g);
        let k = e.dim();
        assert!(max_abs(&(e.gram() - DMatrix::identity(k, k))) < 1e-9);
    }
}

#[test]
fn bgram_matches_ambient_inner_product() {
    for g in sample_graphs() {
        let e = corr(&g);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let x = random_vector(e.dim(), &mut rng);
            let y = random_vector(e.dim(), &mut rng);
            let via_basis = e.inner_product(&x, &y);
            let via_ambient = e.ambient_inner(&e.ambient(&x), &e.ambient(&y));
            assert!(via_basis.sub(&via_ambient).max_abs() < 1e-9);
        }
    }
}

#[test]
fn inner_product_matches_generator_formula() {
    // ⟨x₁εy₁|x₂εy₂⟩ = δ⁻² y₁* A(x₁*x₂) y₂ against the ambient product
    for g in sample_graphs().into_iter().take(4) {
        let e = corr(&g);
        let d = e.space().dim();
        let gens = e.generator_matrix();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let c1 = DVector::from_fn(d * d, |_, _| C64::new(rng.random_range(-1.0..1.0), 0.3));
            let c2 = DVector::from_fn(d * d, |_, _| C64::new(0.2, rng.random_range(-1.0..1.0)));
            let t1 = TensorElement::from_vec(&(&gens * &c1), d);
            let t2 = TensorElement::from_vec(&(&gens * &c2), d);
            let ambient = e.ambient_inner(&t1, &t2);
            let formula = e.formula_inner(&c1, &c2);
            assert!(ambient.sub(&formula).max_abs() < 1e-9);
        }
    }
}

#[test]
fn formula_inner_product_is_well_defined_on_null_combinations() {
    for g in [QuantumGraph::main_example(1).unwrap(), QuantumGraph::trivial(tracial(&[2])).unwrap()] {
        let e = corr(&g);
        let d = e.space().dim();
        let gens = e.generator_matrix();
        let null = crate::linalg::null_space(&gens, 1e-10);
        assert!(null.ncols() > 0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let mix = DVector::from_fn(null.ncols(), |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            let c = &null * mix;
            for col in 0..d * d {
                let mut unit = DVector::zeros(d * d);
                unit[col] = re(1.0);
                assert!(e.formula_inner(&c, &unit).max_abs() < 1e-9);
            }
        }
    }
}

#[test]
fn inner_product_examples() {
    let k = corr(&QuantumGraph::complete(tracial(&[2])).unwrap());
    let eps = k.epsilon_vector();
    let ip = k.inner_product(&eps, &eps);
    assert!(ip.sub(&k.space().one()).max_abs() < 1e-9);

    let e = main1();
    let s = e.space();
    let eps = e.epsilon_vector();
    let e3 = e.right_act(&eps, &s.block_unit(2));
    assert!(e.inner_product(&e3, &e3).max_abs() < 1e-12);
    assert!(e3.coeffs.norm() < 1e-12);
}

#[test]
fn inner_products_are_positive() {
    for g in sample_graphs() {
        let e = corr(&g);
        let s = e.space();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let x = random_vector(e.dim(), &mut rng);
            let ip = e.inner_product(&x, &x);
            for a in 0..s.num_blocks() {
                let (vals, _) = crate::linalg::hermitian_eigen(&s.block_matrix(&ip, a));
                assert!(vals.iter().all(|&v| v > -1e-9));
            }
        }
    }
}

#[test]
fn actions_stay_in_the_span_and_agree_with_ambient() {
    for g in sample_graphs() {
        let e = corr(&g);
        let s = e.space();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..5 {
            let x = random_element(s, &mut rng);
            let xi = random_vector(e.dim(), &mut rng);
            let left = e.left_act_ambient(&x, &xi, &cfg()).unwrap();
            assert!((left.coeffs - e.left_act(&x, &xi).coeffs).norm() < 1e-9);
            let right = e.right_act_ambient(&xi, &x, &cfg()).unwrap();
            assert!((right.coeffs - e.right_act(&xi, &x).coeffs).norm() < 1e-9);
        }
    }
}

#[test]
fn action_identities() {
    for g in sample_graphs() {
        let e = corr(&g);
        let s = e.space();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..5 {
            let (x, y) = (random_element(s, &mut rng), random_element(s, &mut rng));
            let (xi, eta) = (random_vector(e.dim(), &mut rng), random_vector(e.dim(), &mut rng));
            assert!((e.left_act(&s.one(), &xi).coeffs - &xi.coeffs).norm() < 1e-9);
            let lhs = e.left_act(&s.mul(&x, &y), &xi);
            let rhs = e.left_act(&x, &e.left_act(&y, &xi));
            assert!((lhs.coeffs - rhs.coeffs).norm() < 1e-9);
            let lhs = e.right_act(&xi, &s.mul(&x, &y));
            let rhs = e.right_act(&e.right_act(&xi, &x), &y);
            assert!((lhs.coeffs - rhs.coeffs).norm() < 1e-9);
            // adjointability and right linearity
            let a = e.inner_product(&e.left_act(&x, &xi), &eta);
            let b = e.inner_product(&xi, &e.left_act(&s.star(&x), &eta));
            assert!(a.sub(&b).max_abs() < 1e-9);
            let a = e.inner_product(&e.right_act(&xi, &y), &eta);
            let b = s.mul(&s.star(&y), &e.inner_product(&xi, &eta));
            assert!(a.sub(&b).max_abs() < 1e-9);
        }
    }
}

#[test]
fn phi_lands_in_compacts() {
    for g in [
        QuantumGraph::trivial(tracial(&[2, 1])).unwrap(),
        QuantumGraph::complete(tracial(&[1, 1])).unwrap(),
        QuantumGraph::main_example(1).unwrap(),
        QuantumGraph::complete(non_tracial()).unwrap(),
    ] {
        assert!(corr(&g).phi_compacts_check() < 1e-9);
    }
}

#[test]
fn inner_ideal_is_range_ideal_and_kernel_is_source_set() {
    let mut graphs = sample_graphs();
    // A killing block 0: complete on block 1 of C ⊕ M_2, zero on block 0
    let s = tracial(&[1, 2]);
    let k = QuantumGraph::complete(tracial(&[2])).unwrap();
    let mut m = DMatrix::zeros(5, 5);
    m.view_mut((1, 1), (4, 4)).copy_from(k.adjacency());
    graphs.push(QuantumGraph::new(s, m, &cfg()).unwrap());
    graphs.push(QuantumGraph::classical(&[vec![1.0, 1.0, 0.0], vec![0.0, 0.0, 0.0], vec![0.0, 1.0, 1.0]]).unwrap());
    for g in graphs {
        let e = corr(&g);
        assert_eq!(e.inner_ideal(&cfg()), g.range_ideal(&cfg()));
        // kernel from the adjoint graph: blocks outside B A*(B) B
        let dual_range = g.adjoint_graph().range_ideal(&cfg());
        let expected: Vec<usize> =
            (0..g.space().num_blocks()).filter(|b| !dual_range.contains(*b)).collect();
        assert_eq!(e.left_kernel(&cfg()).blocks(), expected.as_slice());
        let kernel_dim: usize = expected.iter().map(|&b| g.space().blocks().size(b).pow(2)).sum();
        assert_eq!(e.left_kernel_dim(&cfg()), kernel_dim);
    }
}

#[test]
fn katsura_examples() {
    let e = main1();
    assert_eq!(katsura_ideal(&e, &cfg()).blocks(), &[0, 1, 2]);
    let k = corr(&QuantumGraph::complete(tracial(&[1, 2])).unwrap());
    assert_eq!(katsura_ideal(&k, &cfg()).blocks(), &[0, 1]);
    // complete on block 2 only: block 1 is a source and leaves J
    let s = tracial(&[1, 1]);
    let m = DMatrix::from_row_slice(2, 2, &[re(0.0), re(0.0), re(0.0), re(1.0)]);
    let g = QuantumGraph::new(s, m, &cfg()).unwrap();
    assert_eq!(katsura_ideal(&corr(&g), &cfg()).blocks(), &[1]);
}

#[test]
fn minimality_examples() {
    let k = corr(&QuantumGraph::complete(tracial(&[1, 2])).unwrap());
    assert!(is_minimal(&k, &cfg()).unwrap().minimal);
    let t = corr(&QuantumGraph::trivial(tracial(&[1, 1])).unwrap());
    let m = is_minimal(&t, &cfg()).unwrap();
    assert!(!m.minimal);
    assert_eq!(m.witness.unwrap().blocks(), &[0]);
    let single = corr(&QuantumGraph::trivial(tracial(&[2])).unwrap());
    assert!(is_minimal(&single, &cfg()).unwrap().minimal);
    assert!(matches!(is_minimal(&main1(), &cfg()), Err(Error::NotFull)));
}

#[test]
fn hereditary_and_saturated_on_main_example() {
    for n in [1, 2] {
        let e = corr(&QuantumGraph::main_example(n).unwrap());
        for blocks in [vec![0], vec![1], vec![2], vec![0, 2], vec![1, 2]] {
            assert!(!is_hereditary(&e, &Ideal::new(blocks), &cfg()));
        }
        let i12 = Ideal::new(vec![0, 1]);
        assert!(is_hereditary(&e, &i12, &cfg()));
        assert!(!is_saturated(&e, &i12, &cfg()));
        let all = Ideal::new(vec![0, 1, 2]);
        assert!(is_hereditary(&e, &all, &cfg()) && is_saturated(&e, &all, &cfg()));
        assert!(scan_saturated_hereditary(&e, &cfg()).is_empty());
    }
}

#[test]
fn trivial_graph_ideals_are_all_saturated_hereditary() {
    let e = corr(&QuantumGraph::trivial(tracial(&[1, 2])).unwrap());
    let found = scan_saturated_hereditary(&e, &cfg());
    assert_eq!(found, vec![Ideal::new(vec![0]), Ideal::new(vec![1])]);
}

#[test]
fn tensor_power_dimensions() {
    let k = corr(&QuantumGraph::complete(tracial(&[1, 1])).unwrap());
    let tp = TensorPowers::build(&k, 3, &cfg()).unwrap();
    assert_eq!(tp.dims(), vec![2, 4, 8, 16]);
    let t = corr(&QuantumGraph::trivial(tracial(&[2, 1])).unwrap());
    let tp = TensorPowers::build(&t, 4, &cfg()).unwrap();
    assert_eq!(tp.dims(), vec![5; 5]);
    let m2 = corr(&QuantumGraph::main_example(2).unwrap());
    let tp = TensorPowers::build(&m2, 3, &cfg()).unwrap();
    assert_eq!(tp.dims(), vec![12, 20, 40, 80]);
    for g in sample_graphs() {
        let e = corr(&g);
        let tp = TensorPowers::build(&e, 2, &cfg()).unwrap();
        for (n, &dim) in tp.dims().iter().enumerate() {
            assert_eq!(dim, e.predicted_power_dim(n));
        }
    }
}

#[test]
fn tensor_level_budget() {
    let k = corr(&QuantumGraph::complete(tracial(&[2])).unwrap());
    let tight = Config { label_cap: 100, ..cfg() };
    assert!(matches!(TensorPowers::build(&k, 2, &tight), Err(Error::BudgetExceeded(_))));
    let low = Config { level_cap: 2, ..cfg() };
    assert!(matches!(TensorPowers::build(&k, 3, &low), Err(Error::BudgetExceeded(_))));
}

#[test]
fn level_gram_agrees_with_recursive_definition() {
    // ⟨v₁⊗v₂|w₁⊗w₂⟩ = ⟨v₂|⟨v₁|w₁⟩·w₂⟩
    for g in sample_graphs().into_iter().take(5) {
        let e = corr(&g);
        let tp = TensorPowers::build(&e, 2, &cfg()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..4 {
            let v: Vec<_> = (0..4).map(|_| random_vector(e.dim(), &mut rng)).collect();
            let l = tp.elementary(&[v[0].coeffs.clone(), v[1].coeffs.clone()]);
            let r = tp.elementary(&[v[2].coeffs.clone(), v[3].coeffs.clone()]);
            let lhs = tp.inner(&l, &r).unwrap();
            let mid = e.inner_product(&v[0], &v[2]);
            let rhs = e.inner_product(&v[1], &e.left_act(&mid, &v[3]));
            assert!(lhs.sub(&rhs).max_abs() < 1e-9);
        }
    }
}

#[test]
fn level_actions_are_module_maps() {
    for g in sample_graphs().into_iter().take(5) {
        let e = corr(&g);
        let s = e.space();
        let top = if e.dim() >= 16 { 2 } else { 3 };
        let tp = TensorPowers::build(&e, top, &cfg()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for m in 0..=top {
            let lv = tp.level(m);
            let k = lv.dim;
            let x = random_element(s, &mut rng);
            let v = DVector::from_fn(k, |_, _| C64::new(rng.random_range(-1.0..1.0), 0.5));
            let w = DVector::from_fn(k, |_, _| C64::new(0.1, rng.random_range(-1.0..1.0)));
            let lx = super::combine(&lv.left, &x.coeffs, k);
            let rx = super::combine(&lv.right, &x.coeffs, k);
            let a = super::bvalued(&lv.bgram, &(&lx * &v), &w);
            let b = super::bvalued(&lv.bgram, &v, &(super::combine(&lv.left, &s.star(&x).coeffs, k) * &w));
            assert!(a.sub(&b).max_abs() < 1e-8);
            let a = super::bvalued(&lv.bgram, &(&rx * &v), &w);
            let b = s.mul(&s.star(&x), &super::bvalued(&lv.bgram, &v, &w));
            assert!(a.sub(&b).max_abs() < 1e-8);
        }
    }
}

#[test]
fn coordinates_round_trip_and_partial_inner() {
    let e = corr(&QuantumGraph::main_example(1).unwrap());
    let tp = TensorPowers::build(&e, 3, &cfg()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for m in 1..=3 {
        let labels = e.dim().pow(m as u32);
        let v = TensorPowerVector {
            level: m,
            coeffs: DVector::from_fn(labels, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))),
        };
        let back = tp.from_coords(m, &tp.coords(&v).unwrap()).unwrap();
        assert!(tp.approx_eq(&v, &back, &cfg()).unwrap());
        // full contraction equals the inner product
        let full = tp.partial_inner(&v, &v).unwrap();
        assert_eq!(full.level, 0);
        assert!(AlgebraElement::new(full.coeffs).sub(&tp.inner(&v, &v).unwrap()).max_abs() < 1e-9);
    }
    // ⟨l₁|r₁⊗r₂⟩ on the first leg is ⟨l₁|r₁⟩·r₂
    let v: Vec<_> = (0..3).map(|_| random_vector(e.dim(), &mut rng)).collect();
    let l = tp.elementary(&[v[0].coeffs.clone()]);
    let r = tp.elementary(&[v[1].coeffs.clone(), v[2].coeffs.clone()]);
    let got = tp.partial_inner(&l, &r).unwrap();
    let b = e.inner_product(&v[0], &v[1]);
    let want = tp.elementary(&[e.left_act(&b, &v[2]).coeffs]);
    assert!(tp.approx_eq(&got, &want, &cfg()).unwrap());
}

#[test]
fn non_returning_examples() {
    let e = main1();
    let s = e.space();
    let tp = TensorPowers::build(&e, 3, &cfg()).unwrap();
    let one = s.one();
    let eps = e.generator(&one, &one).coeffs;
    // (1₃·ε)⊗ε
    let sink = tp.elementary(&[e.generator(&s.block_unit(2), &one).coeffs, eps.clone()]);
    assert!(tp.is_non_returning(&sink, &cfg()).unwrap().non_returning);
    // (1₁·ε·1₂)⊗(ε·1₂)
    let p2 = s.block_unit(1);
    let pair = tp.elementary(&[e.generator(&s.block_unit(0), &p2).coeffs, e.generator(&one, &p2).coeffs]);
    assert!(tp.is_non_returning(&pair, &cfg()).unwrap().non_returning);
    // level 1 is vacuous
    let r = tp.is_non_returning(&tp.elementary(std::slice::from_ref(&eps)), &cfg()).unwrap();
    assert!(r.vacuous && r.non_returning);

    let k = corr(&QuantumGraph::complete(tracial(&[1, 1])).unwrap());
    let tk = TensorPowers::build(&k, 2, &cfg()).unwrap();
    let ek = k.epsilon_vector().coeffs;
    let r = tk.is_non_returning(&tk.elementary(&[ek.clone(), ek]), &cfg()).unwrap();
    assert!(!r.non_returning);
    assert!(!r.sufficient_only);
}

#[test]
fn family_phi_examples() {
    for n in [1, 2] {
        let e = corr(&QuantumGraph::main_example(n).unwrap());
        let s = e.space();
        let b = s.blocks().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let x = random_element(s, &mut rng);
        let block = |m: DMatrix<C64>, at: usize| {
            let mut mats = vec![DMatrix::zeros(n, n); 3];
            mats[at] = m;
            s.from_block_matrices(&mats)
        };
        for m in 1..=4 {
            let fam = StructuredFamily::new(FamilyKind::Pair { a: 0, b: 1 }, m, &e, &cfg()).unwrap();
            let phi = family_phi(&e, &fam, &cfg()).unwrap();
            let want = block(s.block_matrix(&x, 0), 1);
            assert!(s.apply(&phi, &x).sub(&want).max_abs() < 1e-9);
            assert!((s.norm(&s.apply(&phi, &s.one())) - 1.0).abs() < 1e-12);

            let fam = StructuredFamily::new(FamilyKind::Pair { a: 1, b: 0 }, m, &e, &cfg()).unwrap();
            let phi = family_phi(&e, &fam, &cfg()).unwrap();
            let want = block(s.block_matrix(&x, 1), 0);
            assert!(s.apply(&phi, &x).sub(&want).max_abs() < 1e-9);
        }
        let _ = b;
        // ε·1₃ = 0 kills the (1,3) family
        let fam = StructuredFamily::new(FamilyKind::Pair { a: 0, b: 2 }, 2, &e, &cfg()).unwrap();
        assert!(matches!(family_phi(&e, &fam, &cfg()), Err(Error::ZeroVector)));
        assert!(StructuredFamily::new(FamilyKind::Sink { c: 0 }, 2, &e, &cfg()).is_err());
        assert!(StructuredFamily::new(FamilyKind::Sink { c: 2 }, 2, &e, &cfg()).is_ok());
    }
}

#[test]
fn family_phi_matches_tensor_computation() {
    for g in [QuantumGraph::main_example(1).unwrap(), QuantumGraph::complete(tracial(&[1, 1])).unwrap()] {
        let e = corr(&g);
        let s = e.space();
        let tp = TensorPowers::build(&e, 3, &cfg()).unwrap();
        let sinks = g.quantum_sinks(&cfg());
        let mut kinds = vec![FamilyKind::Pair { a: 0, b: 1 }, FamilyKind::Pair { a: 1, b: 0 }];
        kinds.extend(sinks.iter().map(|&c| FamilyKind::Sink { c }));
        if s.num_blocks() > 2 {
            kinds.push(FamilyKind::Pair { a: 2, b: 0 });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for kind in kinds {
            for m in 1..=3 {
                let fam = StructuredFamily::new(kind, m, &e, &cfg()).unwrap();
                let x = random_element(s, &mut rng);
                let direct = family_phi_direct(&e, &tp, &fam, &x).unwrap();
                let iterated = s.apply(&super::condition_s::compression_for_tests(&e, &fam), &x);
                assert!(direct.sub(&iterated).max_abs() < 1e-9, "{kind:?} m={m}");
            }
        }
    }
}

#[test]
fn condition_s_examples() {
    for n in [1, 2] {
        let e = corr(&QuantumGraph::main_example(n).unwrap());
        let cert = condition_s_certificate(&e, 6, &cfg()).unwrap();
        assert!(cert.certified);
        let fams: Vec<_> = cert.blocks.iter().map(|b| b.family.unwrap()).collect();
        assert_eq!(
            fams,
            vec![
                FamilyKind::Pair { a: 0, b: 1 },
                FamilyKind::Pair { a: 1, b: 0 },
                FamilyKind::Pair { a: 2, b: 0 }
            ]
        );
    }
    let t = corr(&QuantumGraph::trivial(tracial(&[1, 1])).unwrap());
    assert!(!condition_s_certificate(&t, 6, &cfg()).unwrap().certified);
    let single = corr(&QuantumGraph::complete(tracial(&[2])).unwrap());
    assert!(!condition_s_certificate(&single, 6, &cfg()).unwrap().certified);
}

#[test]
fn periodicity_examples() {
    let t = corr(&QuantumGraph::trivial(tracial(&[1, 2])).unwrap());
    assert!(matches!(periodic_at(&t, 1, &cfg()).unwrap(), PeriodicOutcome::Periodic { .. }));
    assert_eq!(aperiodicity_report(&t, 3, &cfg()).unwrap(), Aperiodicity::PeriodicAt { n: 1 });
    assert!(!multiplicity_aperiodic(&t));

    let e = main1();
    assert!(matches!(aperiodicity_report(&e, 3, &cfg()).unwrap(), Aperiodicity::AperiodicCertified { .. }));

    let k = corr(&QuantumGraph::complete(tracial(&[1, 1])).unwrap());
    assert_eq!(aperiodicity_report(&k, 3, &cfg()).unwrap(), Aperiodicity::NoPeriodUpToN { n: 3 });
    assert!(multiplicity_aperiodic(&k));

    // flip on C²: E ≅ B twisted by the swap, periodic with period 2
    let flip = corr(&QuantumGraph::classical(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap());
    assert_eq!(periodic_at(&flip, 1, &cfg()).unwrap(), PeriodicOutcome::NotPeriodic);
    assert!(matches!(periodic_at(&flip, 2, &cfg()).unwrap(), PeriodicOutcome::Periodic { .. }));
}

#[test]
fn multiplicity_matrix_of_main_example_is_the_classical_pattern() {
    let e = corr(&QuantumGraph::main_example(2).unwrap());
    let mu = e.multiplicity_matrix();
    let want = [[1.0, 1.0, 0.0], [1.0, 1.0, 0.0], [1.0, 0.0, 0.0]];
    for a in 0..3 {
        for b in 0..3 {
            assert!((mu[(a, b)] - want[a][b]).abs() < 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn classical_correspondence_dim_counts_edges(
        d in 1usize..=4,
        bits in proptest::collection::vec(0u8..2, 16),
    ) {
        let m: Vec<Vec<f64>> = (0..d).map(|i| (0..d).map(|j| bits[i * 4 + j] as f64).collect()).collect();
        let edges = m.iter().flatten().filter(|&&x| x == 1.0).count();
        let g = QuantumGraph::classical(&m).unwrap();
        match EdgeCorrespondence::build(&g, &cfg()) {
            Ok(e) => {
                prop_assert_eq!(e.dim(), edges);
                prop_assert_eq!(e.predicted_power_dim(2), TensorPowers::build(&e, 2, &cfg()).unwrap().level(2).dim);
            }
            Err(Error::ZeroCorrespondence) => prop_assert_eq!(edges, 0),
            Err(other) => prop_assert!(false, "{other}"),
        }
    }
}
