use std::sync::Arc;

use metriplex_core::brackets::sectional_curvature;
use metriplex_core::constructors::RiemannField;
use metriplex_core::field::{Definiteness, FnMetric};
use metriplex_core::tensor::symmetry_defects;
use metriplex_core::verify::{verify_minimal_metriplectic, SampleBox};
use metriplex_core::{CovectorValue, FourBracketField, MetricField, Rank2Value, Rank4Value, SymmetryTag};

/// Round unit sphere in stereographic coordinates, `g = 4 δ / (1 + |x|²)²`.
fn stereographic_sphere() -> Arc<FnMetric> {
    Arc::new(FnMetric::new(2, Definiteness::PositiveDefinite, |z| {
        let r2 = z[0] * z[0] + z[1] * z[1];
        let f = 4.0 / ((1.0 + r2) * (1.0 + r2));
        Rank2Value::diagonal(&[f, f])
    }))
}

#[test]
fn round_sphere_has_unit_curvature() {
    let g = stereographic_sphere();
    let r = RiemannField::new(g.clone()).unwrap();
    for z in SampleBox::cube(2, -0.8, 0.8).sample(20, 4) {
        let t = r.eval(&z).unwrap();
        let gi = g.eval(&z).inverse().unwrap();
        let want = Rank4Value::from_fn(2, |i, j, k, l| gi.get(i, k) * gi.get(j, l) - gi.get(i, l) * gi.get(j, k));
        assert!(t.max_difference(&want) <= 1e-5 * want.max_abs(), "{}", t.max_difference(&want));
        assert!(symmetry_defects(&t).max() <= 1e-5 * want.max_abs());
        let (a, b) = (CovectorValue::new(vec![1.0, 0.3]), CovectorValue::new(vec![-0.2, 1.0]));
        assert!(sectional_curvature(&r, &a, &b, &z).unwrap() > 0.0);
    }
    let rep = verify_minimal_metriplectic(&r, &SampleBox::cube(2, -0.8, 0.8).sample(10, 0), 100, 0).unwrap();
    assert!(rep.verdict, "{rep}");
}

#[test]
fn flat_metric_in_curvilinear_chart_has_no_curvature() {
    // Euclidean metric pulled back by (x, y) ↦ (x, y + x²)
    let g = Arc::new(FnMetric::new(2, Definiteness::PositiveDefinite, |z| {
        let a = 2.0 * z[0];
        Rank2Value::new(2, vec![1.0 + a * a, a, a, 1.0], SymmetryTag::Symmetric).unwrap()
    }));
    let r = RiemannField::new(g).unwrap();
    for z in SampleBox::cube(2, -1.0, 1.0).sample(10, 2) {
        assert!(r.eval(&z).unwrap().max_abs() <= 1e-6);
    }
}
