mod common;

use common::*;
use infodist::anneal::fixed_point_update;
use infodist::curve::{build_curve, max_information, CurveSpec, SolverOptions};
use infodist::dataset::format_f64;
use infodist::prob::{
    compression_information, conditional_entropy, grad_conditional_entropy,
    grad_mutual_information, mutual_information,
};
use infodist::spectral::{classify_quantizer, DEFAULT_TOL_EIG};
use infodist::{JointDistribution, ObjectiveKind, Quantizer};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(0.05f64..1.0, rows * cols)
        .prop_map(move |v| DMatrix::from_row_slice(rows, cols, &v))
}

/// `(p, q)` with `K_X, K <= 10` and `N <= 5`.
fn instance() -> impl Strategy<Value = (JointDistribution, Quantizer)> {
    (2usize..=10, 2usize..=10, 1usize..=5).prop_flat_map(|(kx, k, n)| {
        (matrix(kx, k), matrix(n, k)).prop_map(|(p, q)| {
            (
                JointDistribution::from_unnormalized(p).unwrap(),
                Quantizer::normalized(q).unwrap(),
            )
        })
    })
}

fn kind() -> impl Strategy<Value = ObjectiveKind> {
    prop_oneof![
        Just(ObjectiveKind::InformationDistortion),
        Just(ObjectiveKind::InformationBottleneck)
    ]
}

fn reversed(n: usize) -> Vec<usize> {
    (0..n).rev().collect()
}

proptest! {
    #[test]
    fn euler_identities_hold((p, q) in instance()) {
        let i = mutual_information(&p, &q).unwrap();
        let h = conditional_entropy(&p, &q).unwrap();
        prop_assert!((grad_mutual_information(&p, &q).unwrap().dot(q.matrix()) - i).abs() < 1e-10);
        prop_assert!((grad_conditional_entropy(&p, &q).unwrap().dot(q.matrix()) - (h - 1.0)).abs() < 1e-10);
    }

    #[test]
    fn functionals_agree_with_reference((p, q) in instance()) {
        prop_assert!((mutual_information(&p, &q).unwrap() - mi_oracle(p.matrix(), q.matrix())).abs() < 1e-12);
        prop_assert!((conditional_entropy(&p, &q).unwrap() - cond_entropy_oracle(p.matrix(), q.matrix())).abs() < 1e-12);
        prop_assert!((compression_information(&p, &q).unwrap() - compression_oracle(p.matrix(), q.matrix())).abs() < 1e-12);
    }

    #[test]
    fn information_is_bounded((p, q) in instance()) {
        let i = mutual_information(&p, &q).unwrap();
        prop_assert!(i >= -1e-14);
        prop_assert!(i <= p.mutual_information() + 1e-12);
    }

    #[test]
    fn fixed_point_update_stays_column_stochastic((p, q) in instance(), kind in kind(), beta in 0.0f64..8.0) {
        let next = fixed_point_update(kind, &p, &q, beta).unwrap();
        for col in next.matrix().column_iter() {
            prop_assert!((col.sum() - 1.0).abs() < 1e-12);
            prop_assert!(col.iter().all(|&v| v > 0.0 && v.is_finite()));
        }
    }

    #[test]
    fn functionals_ignore_class_labels((p, q) in instance()) {
        let perm = reversed(q.classes());
        let r = q.permute_classes(&perm);
        prop_assert!((mutual_information(&p, &q).unwrap() - mutual_information(&p, &r).unwrap()).abs() < 1e-13);
        prop_assert!((conditional_entropy(&p, &q).unwrap() - conditional_entropy(&p, &r).unwrap()).abs() < 1e-13);
        let g = grad_mutual_information(&p, &q).unwrap();
        let gr = grad_mutual_information(&p, &r).unwrap();
        for (nu, &src) in perm.iter().enumerate() {
            prop_assert!((gr.row(nu) - g.row(src)).amax() < 1e-12);
        }
        prop_assert_eq!(q.canonical().into_matrix(), r.canonical().into_matrix());
    }

    #[test]
    fn float_formatting_round_trips(v in prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO) {
        let back: f64 = format_f64(v).parse().unwrap();
        prop_assert_eq!(back.to_bits(), v.to_bits());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn classification_ignores_class_labels(
        (p, q) in (2usize..=5, 2usize..=5, 2usize..=3).prop_flat_map(|(kx, k, n)| {
            (matrix(kx, k), matrix(n, k)).prop_map(|(p, q)| {
                (JointDistribution::from_unnormalized(p).unwrap(), Quantizer::normalized(q).unwrap())
            })
        }),
        kind in kind(),
        beta in 0.0f64..5.0,
    ) {
        let a = classify_quantizer(kind, &p, &q, beta, DEFAULT_TOL_EIG).unwrap();
        let b = classify_quantizer(kind, &p, &q.permute_classes(&reversed(q.classes())), beta, DEFAULT_TOL_EIG).unwrap();
        for (x, y) in a.lagrangian_eigenvalues.iter().zip(&b.lagrangian_eigenvalues) {
            prop_assert!((x - y).abs() < 1e-10);
        }
        prop_assert_eq!(a.solves_lagrangian, b.solves_lagrangian);
        prop_assert_eq!(a.solves_constrained, b.solves_constrained);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn curves_are_non_increasing_with_active_constraint(p in matrix(3, 3), kind in kind()) {
        let p = JointDistribution::from_unnormalized(p).unwrap();
        let top = max_information(&p, 2, 0);
        prop_assume!(top > 0.02);
        let spec = CurveSpec {
            kind,
            i0_min: 0.05 * top,
            i0_max: 0.6 * top,
            points: 8,
            solver: SolverOptions::default(),
            anneal: None,
            ..CurveSpec::default()
        };
        let curve = build_curve(&spec, &p).unwrap();
        for w in curve.points.windows(2) {
            prop_assert!(w[1].r <= w[0].r + 1e-6);
        }
        for cp in &curve.points {
            prop_assert!((cp.information - cp.i0).abs() < 1e-8);
            prop_assert!(cp.beta >= 0.0);
        }
    }
}
