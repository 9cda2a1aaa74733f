use std::sync::Arc;

use metriplex_core::brackets::{four_bracket, g_metric, g_metric_from_gradient, sectional_curvature, two_bracket};
use metriplex_core::constructors::{
    b_tensor, generic_linearize, generic_symmetrize, kn_product, lie_algebra_4tensor, space_form, torsion_removal,
};
use metriplex_core::field::{ConstantFourBracket, FourBracketFlags, Polynomial};
use metriplex_core::tensor::{contract4, cyclic_part, symmetry_defects, total_antisymmetry_defect, DEFAULT_ATOL};
use metriplex_core::{CovectorValue, FourBracketField, PhaseState, Rank2Value, Rank4Value, ScalarField, StructureConstants, SymmetryTag};
use proptest::prelude::*;

fn vec_of(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0f64, n)
}

fn state(n: usize) -> impl Strategy<Value = PhaseState> {
    vec_of(n).prop_map(|v| PhaseState::new(v).unwrap())
}

fn symmetric(n: usize) -> impl Strategy<Value = Rank2Value> {
    vec_of(n * n).prop_map(move |v| Rank2Value::from_fn(n, SymmetryTag::Symmetric, |i, j| v[i * n + j] + v[j * n + i]))
}

/// `B Bᵀ`, positive semidefinite.
fn psd(n: usize) -> impl Strategy<Value = Rank2Value> {
    vec_of(n * n).prop_map(move |v| Rank2Value::from_fn(n, SymmetryTag::Symmetric, |i, j| (0..n).map(|k| v[i * n + k] * v[j * n + k]).sum()))
}

fn rank4(n: usize) -> impl Strategy<Value = Rank4Value> {
    vec_of(n.pow(4)).prop_map(move |v| Rank4Value::new(n, v).unwrap())
}

/// Linear plus quadratic polynomial with random coefficients.
fn polynomial(n: usize) -> impl Strategy<Value = Polynomial> {
    (vec_of(n), symmetric(n)).prop_map(|(b, q)| Polynomial::linear(&b).add(&Polynomial::quadratic(&q)))
}

fn constant(r: Rank4Value) -> ConstantFourBracket {
    ConstantFourBracket::new(r, FourBracketFlags::default())
}

/// Rebuilds an algebraic curvature tensor from its G-metrics for `H = z^r`
/// and `H = z^r + z^s` alone.
fn rebuild_from_probes(r: &dyn FourBracketField) -> Rank4Value {
    let n = r.dim();
    let z = PhaseState::new(vec![0.0; n]).unwrap();
    let e = |a: usize| CovectorValue::basis(n, a);
    let g = |h: &CovectorValue| g_metric_from_gradient(r, h.entries(), &z).unwrap();
    // Q(i, j, k, l) = R^{ijkl} + R^{ilkj}
    let q = |i: usize, j: usize, k: usize, l: usize| -> f64 {
        if j == l {
            2.0 * g(&e(j)).get(i, k)
        } else {
            g(&(&e(j) + &e(l))).get(i, k) - g(&e(j)).get(i, k) - g(&e(l)).get(i, k)
        }
    };
    Rank4Value::from_fn(n, |i, j, k, l| (q(i, j, k, l) - q(j, i, k, l)) / 3.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn contraction_is_multilinear(r in rank4(3), a in vec_of(3), a2 in vec_of(3), b in vec_of(3), c in vec_of(3), d in vec_of(3), s in -2.0..2.0f64) {
        let cv = |v: &[f64]| CovectorValue::new(v.to_vec());
        let mixed: Vec<f64> = a.iter().zip(&a2).map(|(x, y)| x + s * y).collect();
        let lhs = contract4(&r, &cv(&mixed), &cv(&b), &cv(&c), &cv(&d)).unwrap();
        let rhs = contract4(&r, &cv(&a), &cv(&b), &cv(&c), &cv(&d)).unwrap() + s * contract4(&r, &cv(&a2), &cv(&b), &cv(&c), &cv(&d)).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12);
    }

    #[test]
    fn cyclic_part_is_totally_antisymmetric(s in symmetric(4), m in symmetric(4), c in symmetric(4)) {
        // a minimal metriplectic tensor with torsion: KN plus a totally antisymmetric piece
        let mut a = kn_product(&s, &m).unwrap();
        let t = Rank4Value::from_fn(4, |i, j, k, l| permutation_sign([i, j, k, l]) * c.get(0, 1));
        a = &a + &t;
        let cyc = cyclic_part(&a, DEFAULT_ATOL).unwrap();
        prop_assert!(total_antisymmetry_defect(&cyc) <= 1e-12);
        prop_assert!(cyc.max_difference(&t) <= 1e-12);
        prop_assert!(symmetry_defects(&torsion_removal(&a).unwrap()).max() <= 1e-12);
    }

    #[test]
    fn four_bracket_has_curvature_symmetries(s in symmetric(3), m in symmetric(3), f in polynomial(3), k in polynomial(3), g in polynomial(3), nn in polynomial(3), z in state(3)) {
        let r = constant(kn_product(&s, &m).unwrap());
        let b = |a: &Polynomial, b: &Polynomial, c: &Polynomial, d: &Polynomial| four_bracket(&r, a, b, c, d, &z).unwrap();
        let v = b(&f, &k, &g, &nn);
        let tol = 1e-10 * v.abs().max(1.0);
        prop_assert!((v + b(&k, &f, &g, &nn)).abs() <= tol);
        prop_assert!((v + b(&f, &k, &nn, &g)).abs() <= tol);
        prop_assert!((v - b(&g, &nn, &f, &k)).abs() <= tol);
        let cyc = v + b(&f, &g, &nn, &k) + b(&f, &nn, &k, &g);
        prop_assert!(cyc.abs() <= tol);
    }

    #[test]
    fn g_metric_annihilates_energy_gradient(s in psd(3), m in psd(3), h in polynomial(3), z in state(3)) {
        let r = constant(kn_product(&s, &m).unwrap());
        let g = g_metric(&r, &h, &z).unwrap();
        let dh = h.gradient(&z);
        let scale = g.max_abs().max(1.0) * dh.norm().max(1.0);
        prop_assert!(g.matvec(dh.entries()).iter().all(|x| x.abs() <= 1e-12 * scale));
        prop_assert_eq!(g.symmetry_defect(), 0.0);
    }

    #[test]
    fn kn_of_semidefinite_inputs_has_nonnegative_sectional_curvature(s in psd(4), m in psd(4), a in vec_of(4), b in vec_of(4)) {
        let r = constant(kn_product(&s, &m).unwrap());
        let z = PhaseState::new(vec![0.0; 4]).unwrap();
        let k = sectional_curvature(&r, &CovectorValue::new(a), &CovectorValue::new(b), &z).unwrap();
        prop_assert!(k >= -1e-10);
    }

    #[test]
    fn torsion_removal_leaves_two_bracket_unchanged(g in psd(4), f in polynomial(4), gg in polynomial(4), h in polynomial(4), z in state(4)) {
        let c = StructureConstants::from_triples(4, &[(0, 1, 1, 1.0), (2, 3, 3, 1.0)]).unwrap();
        let a = lie_algebra_4tensor(&c, &g).unwrap();
        let ra = constant(a.clone());
        let rr = constant(torsion_removal(&a).unwrap());
        let x = four_bracket(&ra, &f, &h, &gg, &h, &z).unwrap();
        let y = four_bracket(&rr, &f, &h, &gg, &h, &z).unwrap();
        prop_assert!((x - y).abs() <= 1e-10 * x.abs().max(1.0));
        prop_assert!(rr.tensor().max_difference(&b_tensor(&c, &g).unwrap()) <= 1e-12);
    }

    #[test]
    fn algebraic_curvature_is_fixed_by_its_g_metrics(s in symmetric(3), m in symmetric(3), s2 in symmetric(4), m2 in symmetric(4)) {
        for t in [kn_product(&s, &m).unwrap(), kn_product(&s2, &m2).unwrap()] {
            let rebuilt = rebuild_from_probes(&constant(t.clone()));
            prop_assert!(rebuilt.max_difference(&t) <= 1e-10);
        }
    }

    #[test]
    fn generic_symmetrization_keeps_the_entropy_direction(y in vec_of(3), h in polynomial(3), z in state(3)) {
        let s = Polynomial::norm_squared_power(3, 1).add(&Polynomial::linear(&[0.5, -0.2, 0.1]));
        let dh = h.gradient(&z);
        prop_assume!(dh.norm() > 1e-3);
        // project Y onto the energy surface tangent space
        let yy = dh.dot(&y) / dh.dot(dh.entries());
        let y: Vec<f64> = y.iter().zip(dh.entries()).map(|(a, b)| a - yy * b).collect();
        let yc = y.clone();
        let ghat = generic_linearize(move |_| yc.clone(), &s, &z).unwrap();
        let g = generic_symmetrize(&ghat, &s, &z).unwrap();
        let gs = g.matvec(s.gradient(&z).entries());
        prop_assert_eq!(g.symmetry_defect(), 0.0);
        prop_assert!(gs.iter().zip(&y).all(|(a, b)| (a - b).abs() <= 1e-12));
        prop_assert!(dh.dot(&gs).abs() <= 1e-12);
    }
}

fn permutation_sign(p: [usize; 4]) -> f64 {
    let mut sign = 1.0;
    for a in 0..4 {
        for b in a + 1..4 {
            if p[a] == p[b] {
                return 0.0;
            }
            if p[a] > p[b] {
                sign = -sign;
            }
        }
    }
    sign
}

#[test]
fn different_constructions_with_equal_g_metrics_coincide() {
    let a = constant(torsion_removal(&lie_algebra_4tensor(&StructureConstants::so3(), &Rank2Value::identity(3)).unwrap()).unwrap());
    let b = constant(space_form(&Rank2Value::identity(3), 1.0).unwrap());
    let (ra, rb) = (rebuild_from_probes(&a), rebuild_from_probes(&b));
    assert!(ra.max_difference(&rb) <= 1e-10);
    assert!(ra.max_difference(a.tensor()) <= 1e-10);
}

#[test]
fn lie_double_bracket_matches_j_g_j() {
    use metriplex_core::brackets::double_bracket_tensor;
    use metriplex_core::constructors::{cartan_killing, ck_4tensor};
    use metriplex_core::field::LiePoisson;
    let c = StructureConstants::so3();
    let j = LiePoisson::new(c.clone());
    for lambda in [-0.5, -1.0, -2.0] {
        // the Killing form is contravariant; S_LP and J g J use its inverse
        let gbar = cartan_killing(&c, lambda).inverse().unwrap().symmetrized();
        let r = constant(ck_4tensor(&c, lambda).unwrap());
        let s_lp = Polynomial::quadratic(&gbar);
        use proptest::strategy::ValueTree;
        let mut runner = proptest::test_runner::TestRunner::deterministic();
        for _ in 0..100 {
            let (f, g, z) = (polynomial(3), polynomial(3), state(3));
            let f = f.new_tree(&mut runner).unwrap().current();
            let g = g.new_tree(&mut runner).unwrap().current();
            let z = z.new_tree(&mut runner).unwrap().current();
            let lhs = two_bracket(&r, &s_lp, &f, &g, &z).unwrap();
            let d = double_bracket_tensor(&j, &gbar, &z).unwrap();
            let rhs = d.bilinear(f.gradient(&z).entries(), g.gradient(&z).entries());
            assert!((lhs - rhs).abs() <= 1e-10, "{lambda}: {lhs} vs {rhs}");
        }
    }
}

#[test]
fn casimirs_annihilate_contravariant_curvature() {
    use metriplex_core::constructors::ContravariantCurvatureField;
    use metriplex_core::field::{ConstantMetric, LiePoisson};
    let r = ContravariantCurvatureField::new(
        Arc::new(LiePoisson::new(StructureConstants::so3())),
        Arc::new(ConstantMetric::new(Rank2Value::diagonal(&[1.0, 2.0, 0.5])).unwrap()),
    )
    .unwrap();
    let s = Polynomial::norm_squared_power(3, 1);
    let c = Polynomial::norm_squared_power(3, 2);
    for z in metriplex_core::verify::SampleBox::cube(3, -1.0, 1.0).sample(100, 0) {
        assert!(four_bracket(&r, &s, &c, &s, &c, &z).unwrap().abs() <= 1e-10);
    }
}
