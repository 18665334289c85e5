mod common;

use common::*;
use dyadlab_core::dyadic::{DyadicGrid, IntervalId, StepFunction};
use dyadlab_core::operators::*;
use dyadlab_core::weights::Weight;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn basis(g: DyadicGrid, k: usize) -> StepFunction {
    let mut v = vec![0.0; g.leaf_count()];
    v[k] = 1.0;
    StepFunction::on_grid(g, v).unwrap()
}

/// Matrix of a leafwise linear map: column `k` is the image of the `k`-th leaf indicator.
fn materialize(g: DyadicGrid, map: impl Fn(&StepFunction) -> StepFunction) -> DMatrix<f64> {
    let n = g.leaf_count();
    let mut a = DMatrix::zeros(n, n);
    for k in 0..n {
        let col = map(&basis(g, k));
        for (x, v) in col.leaves().iter().enumerate() {
            a[(x, k)] = *v;
        }
    }
    a
}

/// The operator assembled term by term from its defining double sum, using
/// explicit Haar functions and inner products only.
fn definition_matrix(op: &OperatorSpec, g: DyadicGrid) -> DMatrix<f64> {
    let d = g.depth();
    let top = d - op.m.max(op.n) - 1;
    let h = |i: IntervalId| StepFunction::haar(g, i).unwrap();
    materialize(g, |f| {
        let mut out = vec![0.0; g.leaf_count()];
        for l in g.up_to_level(top) {
            for i in l.generation(op.n) {
                let hi = h(i);
                for j in l.generation(op.m) {
                    let hj = h(j);
                    let c = op.coefficient(l, i, j);
                    let (factor, pointwise): (f64, Option<Vec<f64>>) = match &op.family {
                        OperatorFamily::HaarShift => (f.inner(&hi).unwrap(), None),
                        OperatorFamily::Paraproduct { b } => {
                            let mi = leaf_mean(f.leaves(), d, i);
                            (mi * b.inner(&hi).unwrap(), None)
                        }
                        OperatorFamily::HaarMultiplier { t, w } => {
                            let ml = leaf_mean(w.leaves(), d, l);
                            let ratio = w.leaves().iter().map(|x| (x / ml).powf(*t)).collect();
                            (f.inner(&hi).unwrap(), Some(ratio))
                        }
                    };
                    for (x, o) in out.iter_mut().enumerate() {
                        let p = pointwise.as_ref().map_or(1.0, |r| r[x]);
                        *o += c * factor * p * hj.leaves()[x];
                    }
                }
            }
        }
        StepFunction::on_grid(g, out).unwrap()
    })
}

fn families(r: &mut ChaCha8Rng, d: u32, m: u32, n: u32) -> Vec<OperatorSpec> {
    let b = random_function(r, d);
    let w = cascade(d, 0.8, r.gen());
    let mut ops = Vec::new();
    for coeffs in [
        CoefficientFamily::Maximal,
        CoefficientFamily::RandomSigns { seed: r.gen() },
    ] {
        ops.push(OperatorSpec::paraproduct(b.clone(), m, n, coeffs.clone()).unwrap());
        ops.push(OperatorSpec::haar_shift(m, n, coeffs.clone()).unwrap());
        for t in [-0.5, 0.5, 1.0] {
            ops.push(OperatorSpec::haar_multiplier(t, w.clone(), m, n, coeffs.clone()).unwrap());
        }
    }
    ops
}

fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).abs().max()
}

#[test]
fn matrix_free_matches_definition() {
    let mut r = rng(41);
    for d in [3u32, 5, 6] {
        for (m, n) in [(0, 0), (1, 0), (0, 2), (2, 1)] {
            if m.max(n) >= d {
                continue;
            }
            for op in families(&mut r, d, m, n) {
                let g = grid(d);
                let dense = definition_matrix(&op, g);
                let fwd = materialize(g, |f| apply(&op, f).unwrap());
                let back = materialize(g, |f| apply_adjoint(&op, f).unwrap());
                let scale = dense.abs().max().max(1.0);
                assert!(max_abs_diff(&fwd, &dense) <= 1e-12 * scale, "{op} at depth {d}");
                assert!(
                    max_abs_diff(&back, &dense.transpose()) <= 1e-12 * scale,
                    "{op} adjoint at depth {d}"
                );
            }
        }
    }
}

#[test]
fn weighted_norm_matches_dense_singular_value() {
    let mut r = rng(42);
    for d in [4u32, 6] {
        for (m, n) in [(0, 0), (1, 1), (2, 0)] {
            let w = random_weight(&mut r, d, 1.0);
            for op in families(&mut r, d, m, n) {
                let g = grid(d);
                let a = definition_matrix(&op, g);
                let sw: Vec<f64> = w.leaves().iter().map(|x| x.sqrt()).collect();
                let scaled = DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| sw[i] * a[(i, j)] / sw[j]);
                let sigma = scaled.singular_values().max();
                let est = weighted_norm(&op, &w, 1e-13, 20_000).unwrap();
                assert!(
                    rel_err(est.value, sigma) < 1e-6,
                    "{op} depth {d}: {} vs {sigma}",
                    est.value
                );
                assert!(est.value <= sigma * (1.0 + 1e-10));
            }
        }
    }
}

#[test]
fn plain_norm_of_multiplier_matches_dense() {
    let mut r = rng(43);
    let d = 6;
    let w = cascade(d, 0.9, 3);
    let one = Weight::lebesgue(grid(d));
    for t in [-0.5, 0.5, 1.0] {
        let op = OperatorSpec::haar_multiplier(t, w.clone(), 1, 1, CoefficientFamily::RandomSigns { seed: r.gen() })
            .unwrap();
        let sigma = definition_matrix(&op, grid(d)).singular_values().max();
        let est = weighted_norm(&op, &one, 1e-13, 20_000).unwrap();
        assert!(rel_err(est.value, sigma) < 1e-6);
    }
}

#[test]
fn haar_shift_is_a_contraction() {
    let d = 10;
    let one = Weight::lebesgue(grid(d));
    for seed in 0..6u64 {
        for (m, n) in [(0, 0), (0, 3), (2, 1), (3, 3)] {
            let op = OperatorSpec::haar_shift(m, n, CoefficientFamily::RandomSigns { seed }).unwrap();
            let est = weighted_norm(&op, &one, 1e-10, 2000).unwrap();
            assert!(est.value <= 1.0 + 1e-8, "({m},{n}) seed {seed}: {}", est.value);
        }
    }
}

#[test]
fn zero_operator_has_zero_norm() {
    let d = 7;
    let b = StepFunction::constant(grid(d), 2.5);
    let w = cascade(d, 0.7, 1);
    for (m, n) in [(0, 0), (1, 2)] {
        let op = OperatorSpec::paraproduct(b.clone(), m, n, CoefficientFamily::Maximal).unwrap();
        let est = weighted_norm(&op, &w, 1e-10, 100).unwrap();
        assert_eq!(est.value, 0.0);
        assert!(est.converged);
    }
}

#[test]
fn multiplier_at_t_zero_is_shift() {
    let mut r = rng(44);
    let d = 8;
    let w = cascade(d, 0.9, 9);
    for (m, n) in [(0, 0), (1, 2), (3, 1)] {
        let coeffs = CoefficientFamily::RandomSigns { seed: 5 };
        let shift = OperatorSpec::haar_shift(m, n, coeffs.clone()).unwrap();
        let mult = OperatorSpec::haar_multiplier(0.0, w.clone(), m, n, coeffs).unwrap();
        let f = random_function(&mut r, d);
        assert_eq!(apply(&shift, &f).unwrap(), apply(&mult, &f).unwrap());
    }
}

#[test]
fn paraproduct_factors_through_shift() {
    let mut r = rng(45);
    for d in [4u32, 6] {
        let b = random_function(&mut r, d);
        let base = OperatorSpec::paraproduct(b.clone(), 0, 0, CoefficientFamily::Maximal).unwrap();
        for (m, n) in [(1, 0), (0, 1), (1, 1), (2, 1)] {
            for coeffs in [CoefficientFamily::Maximal, CoefficientFamily::RandomSigns { seed: 8 }] {
                let para = OperatorSpec::paraproduct(b.clone(), m, n, coeffs.clone()).unwrap();
                let shift = OperatorSpec::haar_shift(m, n, coeffs).unwrap();
                let g = grid(d);
                let lhs = materialize(g, |f| apply(&para, f).unwrap());
                let rhs = materialize(g, |f| apply(&shift, &apply(&base, f).unwrap()).unwrap());
                assert!(max_abs_diff(&lhs, &rhs) <= 1e-12 * lhs.abs().max().max(1.0));
            }
        }
    }
}

#[test]
fn adjoint_pairing_on_random_pairs() {
    let mut r = rng(46);
    let d = 8;
    let ops = families(&mut r, d, 1, 2);
    for _ in 0..100 {
        let f = random_function(&mut r, d);
        let g = random_function(&mut r, d);
        for op in &ops {
            let lhs = apply(op, &f).unwrap().inner(&g).unwrap();
            let rhs = f.inner(&apply_adjoint(op, &g).unwrap()).unwrap();
            assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(1.0), "{op}");
        }
    }
}

#[test]
fn diagnostics_respect_cauchy_schwarz_and_vanish_when_flat() {
    let mut r = rng(47);
    let d = 8;
    let v = cascade(d, 0.9, 2);
    let one = Weight::lebesgue(grid(d));
    let b = StepFunction::constant(grid(d), 1.0);
    for _ in 0..5 {
        let phi = random_function(&mut r, d);
        for l in grid(d).up_to_level(4) {
            for m in 0..3 {
                let s = diagnostic_s(&v, &phi, l, m).unwrap();
                assert!(s <= s_bound(&v, &phi, l, m).unwrap() * (1.0 + 1e-12));
                assert_eq!(diagnostic_r(&one, &phi, l, m).unwrap(), 0.0);
                assert_eq!(diagnostic_pb(&b, &v, &phi, l, m).unwrap(), 0.0);
            }
        }
    }
    assert!(diagnostic_s(&v, &StepFunction::zero(grid(d)), IntervalId::root(), 2).unwrap() == 0.0);
    assert!(diagnostic_s(&v, &random_function(&mut r, d), IntervalId::root(), d).is_err());
}

#[test]
fn bound_shape_ratios_are_finite() {
    let mut r = rng(48);
    let d = 9;
    for seed in 0..4u64 {
        let w = cascade(d, 0.95, seed);
        let b = random_function(&mut r, d);
        let f = random_function(&mut r, d);
        for (m, n) in [(0, 0), (1, 2), (3, 3)] {
            let shapes = BoundShapes::new(&w, &b, m, n).unwrap();
            for s in [1.0, 2.0] {
                let pb = shapes.pb_ratio(&f, s).unwrap();
                let rr = shapes.r_ratio(&f, s).unwrap();
                assert!(pb.max_ratio.is_finite() && pb.max_ratio > 0.0);
                assert!(rr.max_ratio.is_finite() && rr.max_ratio > 0.0);
            }
            assert!(shapes.s_ratio(&f).unwrap().max_ratio <= 1.0 + 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn operators_are_linear(seed in any::<u64>(), m in 0u32..3, n in 0u32..3, a in -3.0f64..3.0, c in -3.0f64..3.0) {
        let mut r = rng(seed);
        let d = 7;
        for op in families(&mut r, d, m, n) {
            let f = random_function(&mut r, d);
            let g = random_function(&mut r, d);
            let combo = f.scale(a).add(&g.scale(c)).unwrap();
            let lhs = apply(&op, &combo).unwrap();
            let rhs = apply(&op, &f).unwrap().scale(a).add(&apply(&op, &g).unwrap().scale(c)).unwrap();
            let size = lhs.leaves().iter().fold(1.0f64, |s, x| s.max(x.abs()));
            for (x, y) in lhs.leaves().iter().zip(rhs.leaves()) {
                prop_assert!((x - y).abs() <= 1e-12 * size);
            }
        }
    }

    #[test]
    fn random_sign_shifts_contract(seed in any::<u64>(), m in 0u32..4, n in 0u32..4) {
        let d = 7;
        let op = OperatorSpec::haar_shift(m, n, CoefficientFamily::RandomSigns { seed }).unwrap();
        let est = weighted_norm(&op, &Weight::lebesgue(grid(d)), 1e-10, 1000).unwrap();
        prop_assert!(est.value <= 1.0 + 1e-8);
    }
}
