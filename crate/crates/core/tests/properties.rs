//! Property tests over random inputs.

use fld_transfer::dataset::{
    consecutive_split, format_float, signed_rank_exact_brute_force, signed_rank_test, SessionDataset, SplitSpec,
};
use fld_transfer::fld::{decide, fit_assumption_transform, fit_fld, projection_covariance_with};
use fld_transfer::linalg::min_eigenvalue;
use fld_transfer::transfer::{combined_covariance, expected_risk_mc, optimal_alpha};
use fld_transfer::*;
use proptest::prelude::*;

fn vec_of(d: usize) -> impl Strategy<Value = Vector> {
    prop::collection::vec(-3.0f64..3.0, d).prop_map(Vector::from_vec)
}

fn nonzero_vec(d: usize) -> impl Strategy<Value = Vector> {
    vec_of(d).prop_filter("nonzero", |v| v.norm() > 1e-3)
}

/// `A A^T + 0.1 I` for a random square `A`.
fn spd(d: usize) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(-1.5f64..1.5, d * d).prop_map(move |a| {
        let a = Matrix::from_vec(d, d, a);
        &a * a.transpose() + Matrix::identity(d, d) * 0.1
    })
}

fn task_inputs() -> impl Strategy<Value = (Vector, Vector, Matrix)> {
    (2usize..6).prop_flat_map(|d| (nonzero_vec(d), nonzero_vec(d), spd(d)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn decision_is_scale_invariant(w in nonzero_vec(4), x in vec_of(4), c in 1e-3f64..1e3) {
        prop_assert_eq!(decide(&(&w * c), &x), decide(&w, &x));
        let pw = ProjectionVector::new(&w).unwrap();
        prop_assert_eq!(predict(&pw, &x).unwrap(), decide(&w, &x));
    }

    #[test]
    fn risk_is_scale_invariant((w, nu, sigma) in task_inputs(), c in 1e-3f64..1e3) {
        let a = closed_form_risk(&w, &nu, &sigma).unwrap();
        let b = closed_form_risk(&(&w * c), &nu, &sigma).unwrap();
        prop_assert!((a - b).abs() < 1e-12, "{} vs {}", a, b);
        prop_assert!((0.0..=1.0).contains(&a));
    }

    #[test]
    fn projection_covariance_is_psd((_w, nu, sigma) in task_inputs(), n in 2usize..500) {
        for model in [CovarianceModel::Published, CovarianceModel::DeltaMethod] {
            let c = projection_covariance_with(&nu, &sigma, n, model).unwrap();
            prop_assert_eq!(&c, &c.transpose());
            let scale = c.amax().max(1.0);
            prop_assert!(min_eigenvalue(&c) >= -1e-9 * scale, "{:?}", model);
        }
    }

    #[test]
    fn combined_covariance_endpoints((_w, nu, sigma) in task_inputs(), psi in 0.0f64..2.0) {
        let so = projection_covariance(&nu, &sigma, 30).unwrap();
        prop_assert_eq!(combined_covariance(1.0, &so, psi), so.clone());
        let d = so.nrows();
        prop_assert_eq!(combined_covariance(0.0, &so, psi), Matrix::identity(d, d) * psi);
    }

    #[test]
    fn assumption_transform_is_idempotent(
        (nu, sigma) in (2usize..5).prop_flat_map(|d| (nonzero_vec(d), spd(d))),
        shift in -5.0f64..5.0,
        seed in any::<u64>(),
    ) {
        let dist = TaskDistribution::new(nu, sigma, 0.5).unwrap();
        let raw: Vec<_> = sample_task(&dist, 60, RngStream::new(seed, 0))
            .into_iter()
            .map(|s| LabeledSample::new(s.x.add_scalar(shift) * 3.0, s.y))
            .collect();
        prop_assume!(raw.iter().filter(|s| s.y == Label::One).count() >= 2);
        prop_assume!(raw.iter().filter(|s| s.y == Label::Zero).count() >= 2);
        let Ok(t) = fit_assumption_transform(&raw) else { return Ok(()) };
        let again = fit_assumption_transform(&t.apply_all(&raw)).unwrap();
        prop_assert!(again.shift.amax() < 1e-8, "{}", again.shift);
        prop_assert!((again.scale - 1.0).abs() < 1e-8, "{}", again.scale);
    }

    #[test]
    fn mc_risk_is_a_probability(alpha in 0.0f64..=1.0, seed in any::<u64>(), psi in 0.0f64..3.0) {
        let nu = Vector::from_vec(vec![1.0, 0.0, 0.0]);
        let s = sample_task(&TaskDistribution::isotropic(nu), 10, RngStream::new(seed, 1));
        prop_assume!(s.iter().filter(|x| x.y == Label::One).count() >= 2);
        prop_assume!(s.iter().filter(|x| x.y == Label::Zero).count() >= 2);
        let fit = fit_fld(&s).unwrap();
        let src = SourceSummary::new(Vector::from_vec(vec![0.0, 1.0, 0.0]), psi, 5, 0.5).unwrap();
        let r = expected_risk_mc(alpha, &fit, &src, 20, RngStream::new(seed, 2)).unwrap();
        prop_assert!((0.0..=1.0).contains(&r));
    }

    #[test]
    fn enlarging_the_grid_never_raises_min_risk(
        seed in any::<u64>(),
        sub in prop::collection::btree_set(0usize..=10, 1..6),
    ) {
        let nu = Vector::from_vec(vec![0.6, 0.8]);
        let s = sample_task(&TaskDistribution::isotropic(nu), 16, RngStream::new(seed, 0));
        prop_assume!(s.iter().filter(|x| x.y == Label::One).count() >= 2);
        prop_assume!(s.iter().filter(|x| x.y == Label::Zero).count() >= 2);
        let fit = fit_fld(&s).unwrap();
        let src = SourceSummary::new(Vector::from_vec(vec![1.0, 0.0]), 0.1, 20, 0.8).unwrap();
        let small = AlphaGrid::new(sub.iter().map(|&i| i as f64 / 10.0).collect()).unwrap();
        let stream = RngStream::new(seed, 9);
        let a = optimal_alpha(&fit, &src, &small, 30, stream).unwrap();
        let b = optimal_alpha(&fit, &src, &AlphaGrid::default(), 30, stream).unwrap();
        prop_assert!(b.min_risk() <= a.min_risk());
    }

    #[test]
    fn splits_are_partitions(
        n0 in 4usize..60,
        n1 in 4usize..60,
        p in 0.05f64..0.95,
        seed in any::<u64>(),
        k in 0usize..1000,
        order in any::<u64>(),
    ) {
        let mut labels: Vec<Label> = (0..n0).map(|_| Label::Zero).chain((0..n1).map(|_| Label::One)).collect();
        // Deterministic shuffle so classes interleave.
        let mut state = order;
        for i in (1..labels.len()).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            labels.swap(i, (state >> 33) as usize % (i + 1));
        }
        let n = labels.len();
        let ds = SessionDataset::new("s", Matrix::zeros(n, 1), labels).unwrap();
        let spec = SplitSpec::new(p, 1, seed).unwrap();
        match consecutive_split(&ds, &spec, k) {
            Ok(split) => {
                let mut all: Vec<usize> = split.train.iter().chain(&split.test).copied().collect();
                all.sort_unstable();
                prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
                prop_assert_eq!(split.train.len(), spec.block_len(n0) + spec.block_len(n1));
                prop_assert_eq!(consecutive_split(&ds, &spec, k).unwrap(), split);
            }
            Err(Error::TooFewWindows(_)) => {
                prop_assert!(spec.block_len(n0) < 2 || spec.block_len(n1) < 2);
            }
            Err(e) => prop_assert!(false, "{}", e),
        }
    }

    #[test]
    fn signed_rank_exact_matches_enumeration(
        d in prop::collection::vec(-5i32..=5, 5..=12),
        scale in 0.1f64..10.0,
    ) {
        // Small integers force ties and zeros.
        let d: Vec<f64> = d.into_iter().map(|x| x as f64 * scale).collect();
        match (signed_rank_test(&d), signed_rank_exact_brute_force(&d)) {
            (Ok(a), Ok(b)) => prop_assert!((a - b).abs() < 1e-12, "{} vs {}", a, b),
            (Err(Error::TooFewPairs(x)), Err(Error::TooFewPairs(y))) => prop_assert_eq!(x, y),
            other => prop_assert!(false, "{:?}", other),
        }
    }

    #[test]
    fn float_format_round_trips(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        prop_assert_eq!(format_float(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
    }

    #[test]
    fn balanced_accuracy_is_bounded(
        pairs in prop::collection::vec((any::<bool>(), any::<bool>()), 2..50),
    ) {
        let lab = |b: bool| if b { Label::One } else { Label::Zero };
        let truth: Vec<_> = pairs.iter().map(|p| lab(p.0)).collect();
        let pred: Vec<_> = pairs.iter().map(|p| lab(p.1)).collect();
        prop_assume!(truth.contains(&Label::One) && truth.contains(&Label::Zero));
        let b = balanced_accuracy(&pred, &truth).unwrap();
        prop_assert!((0.0..=1.0).contains(&b));
        let flipped: Vec<_> = pred.iter().map(|&l| lab(l == Label::Zero)).collect();
        let c = balanced_accuracy(&flipped, &truth).unwrap();
        prop_assert!((b + c - 1.0).abs() < 1e-12);
    }
}
