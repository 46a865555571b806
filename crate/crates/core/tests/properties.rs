//! Property tests over the numeric invariants.

use proptest::prelude::*;
use synalloc::data::derived_rng;
use synalloc::ensemble::score_centroid;
use synalloc::{
    allocate, compute_weights, opinion_pool, random_split, synth_stream, CfTree, ClusterFeature, EnsembleParams,
    Metric, ScenarioSpec, Synopsis,
};

fn component() -> impl Strategy<Value = f64> {
    prop_oneof![
        1 => Just(0.0),
        1 => 0.0..1e-3,
        6 => 0.0..500.0,
    ]
}

fn vector(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(component(), dim)
}

fn pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..10).prop_flat_map(|d| (vector(d), vector(d)))
}

fn point_set() -> impl Strategy<Value = (usize, Vec<Vec<f64>>)> {
    (1usize..6).prop_flat_map(|d| (Just(d), prop::collection::vec(vector(d), 1..120)))
}

proptest! {
    #[test]
    fn metrics_bounded_symmetric_and_zero_on_identity((x, s) in pair()) {
        for m in Metric::ALL {
            let d = m.dissimilarity(&x, &s).unwrap();
            prop_assert!((0.0..=1.0).contains(&d), "{} = {d}", m.name());
            prop_assert!((d - m.dissimilarity(&s, &x).unwrap()).abs() <= 1e-12);
            prop_assert_eq!(m.dissimilarity(&x, &x).unwrap(), 0.0);
        }
    }

    #[test]
    fn metrics_are_scale_invariant((x, s) in pair(), c in 1e-3f64..1e3) {
        let xs: Vec<f64> = x.iter().map(|v| v * c).collect();
        let ss: Vec<f64> = s.iter().map(|v| v * c).collect();
        for m in Metric::ALL {
            let a = m.dissimilarity(&x, &s).unwrap();
            let b = m.dissimilarity(&xs, &ss).unwrap();
            prop_assert!((a - b).abs() <= 1e-12, "{}: {a} vs {b}", m.name());
        }
    }

    #[test]
    fn jaccard_is_function_of_sorensen((x, s) in pair()) {
        let j = Metric::Jaccard.dissimilarity(&x, &s).unwrap();
        let so = Metric::Sorensen.dissimilarity(&x, &s).unwrap();
        prop_assert!((j - 2.0 * so / (1.0 + so)).abs() <= 1e-12);
        prop_assert!(j >= so - 1e-15);
    }

    #[test]
    fn weights_convex_and_rule_shaped(
        o in prop::collection::vec(0.0f64..=1.0, 2..9),
        k in 0.5f64..4.0,
        frac in 0.05f64..0.95,
    ) {
        let theta = frac / o.len() as f64;
        let w = compute_weights(&o, theta, k).unwrap();
        prop_assert!(w.is_convex());
        let sum: f64 = w.as_slice().iter().sum();
        prop_assert!((sum - 1.0).abs() <= 1e-12);
        // outliers (if any, and not all) carry exactly theta
        let n = o.len() as f64;
        let mean = o.iter().sum::<f64>() / n;
        let sd = (o.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
        let flagged: Vec<bool> = o.iter().map(|v| sd > 0.0 && (v - mean).abs() > k * sd).collect();
        let n_out = flagged.iter().filter(|f| **f).count();
        if n_out > 0 && n_out < o.len() {
            for (wi, f) in w.as_slice().iter().zip(&flagged) {
                if *f { prop_assert_eq!(*wi, theta); }
            }
        } else {
            for wi in w.as_slice() { prop_assert!((wi - 1.0 / n).abs() <= 1e-15); }
        }
    }

    #[test]
    fn pool_lies_between_extremes(o in prop::collection::vec(0.0f64..=1.0, 3..6), k in 0.5f64..3.0) {
        let w = compute_weights(&o, 0.1, k).unwrap();
        let p = opinion_pool(&o, &w).unwrap();
        let lo = o.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = o.iter().cloned().fold(0.0, f64::max);
        prop_assert!(p >= lo - 1e-12 && p <= hi + 1e-12);
    }

    #[test]
    fn cf_merge_is_additive((dim, pts) in point_set(), cut in any::<prop::sample::Index>()) {
        let cut = cut.index(pts.len() + 1);
        let whole = ClusterFeature::from_points(dim, pts.iter().map(Vec::as_slice)).unwrap();
        let left = ClusterFeature::from_points(dim, pts[..cut].iter().map(Vec::as_slice)).unwrap();
        let right = ClusterFeature::from_points(dim, pts[cut..].iter().map(Vec::as_slice)).unwrap();
        let merged = left.merge(&right).unwrap();
        prop_assert_eq!(merged.count(), whole.count());
        for j in 0..dim {
            let tol = 1e-9 * whole.square_sum()[j].max(1.0);
            prop_assert!((merged.linear_sum()[j] - whole.linear_sum()[j]).abs() <= tol);
            prop_assert!((merged.square_sum()[j] - whole.square_sum()[j]).abs() <= tol);
        }
        prop_assert!(merged.check_invariants().is_ok());
    }

    #[test]
    fn tree_conserves_mass_and_stays_consistent(
        (dim, pts) in point_set(),
        branching in 2usize..6,
        threshold in 0.5f64..200.0,
    ) {
        let mut tree = CfTree::new(dim, branching, threshold).unwrap();
        for p in &pts {
            tree.insert(p).unwrap();
        }
        let leaf: u64 = tree.leaf_entries().map(|e| e.cf.count()).sum();
        prop_assert_eq!(leaf, pts.len() as u64);
        prop_assert_eq!(tree.root_cf().count(), pts.len() as u64);
        let problems = tree.audit();
        prop_assert!(problems.is_empty(), "{problems:?}");
    }

    #[test]
    fn synopsis_keeps_only_heavy_clusters((dim, pts) in point_set(), alpha in 1u64..30) {
        let mut tree = CfTree::new(dim, 4, 50.0).unwrap();
        for p in &pts {
            tree.insert(p).unwrap();
        }
        let syn = Synopsis::extract(&tree, alpha, 0, 0).unwrap();
        prop_assert!(syn.check(alpha).is_ok());
        let heavy = tree.leaf_entries().filter(|e| e.cf.count() >= alpha).count();
        if heavy == 0 {
            prop_assert!(syn.is_fallback());
            prop_assert_eq!(syn.dominant()[0].count(), pts.len() as u64);
        } else {
            prop_assert_eq!(syn.dominant().len(), heavy);
            let counts: Vec<u64> = syn.dominant().iter().map(ClusterFeature::count).collect();
            prop_assert!(counts.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn allocation_is_permutation_equivariant(
        (dim, means) in (1usize..6).prop_flat_map(|d| (Just(d), prop::collection::vec(vector(d), 2..7))),
        x_seed in any::<u64>(),
        rot in any::<prop::sample::Index>(),
    ) {
        let x: Vec<f64> = {
            use rand::Rng;
            let mut r = derived_rng(x_seed, 0);
            (0..dim).map(|_| r.random_range(0.0..500.0)).collect()
        };
        let params = EnsembleParams::default();
        let syn: Vec<Synopsis> = means.iter().enumerate().map(|(i, m)| Synopsis::from_mean(i, m).unwrap()).collect();
        let (chosen, scores) = allocate(&x, &syn, &params).unwrap();
        let best = scores[chosen].similarity;
        prop_assert!(scores.iter().all(|s| s.similarity <= best));
        prop_assert!(scores[..chosen].iter().all(|s| s.similarity < best));

        let r = rot.index(means.len());
        let mut rotated = syn.clone();
        rotated.rotate_left(r);
        let (c2, scores2) = allocate(&x, &rotated, &params).unwrap();
        prop_assert_eq!(scores2[c2].similarity, best);
        for (i, s) in scores.iter().enumerate() {
            let j = (i + means.len() - r) % means.len();
            prop_assert_eq!(s.similarity, scores2[j].similarity);
        }
    }

    #[test]
    fn score_matches_pooled_metrics((x, s) in pair()) {
        let params = EnsembleParams::default();
        let score = score_centroid(&x, &s, &params).unwrap();
        let o: Vec<f64> = score.per_metric.iter().map(|m| m.dissimilarity).collect();
        prop_assert!((score.pooled_dissimilarity - opinion_pool(&o, &score.weights).unwrap()).abs() <= 1e-15);
        prop_assert!((score.similarity + score.pooled_dissimilarity - 1.0).abs() <= 1e-15);
    }

    #[test]
    fn random_split_is_a_partition(rows in 1usize..400, n in 1usize..12, seed in any::<u64>()) {
        prop_assume!(n <= rows);
        let parts = random_split(rows, n, seed).unwrap();
        prop_assert_eq!(parts.len(), n);
        let mut seen = vec![false; rows];
        for idx in parts.iter().flatten() {
            prop_assert!(!seen[*idx]);
            seen[*idx] = true;
        }
        prop_assert!(seen.iter().all(|s| *s));
        prop_assert_eq!(random_split(rows, n, seed).unwrap(), parts);
    }

    #[test]
    fn synthetic_stream_non_negative_and_never_all_zero(
        mu in 0.0f64..60.0,
        sigma in 0.1f64..80.0,
        seed in any::<u64>(),
        dim in 1usize..6,
    ) {
        let spec = ScenarioSpec { mu, sigma, count: 200, seed };
        let v = synth_stream(&spec, dim).unwrap();
        prop_assert_eq!(v.len(), 200);
        for x in &v {
            prop_assert!(x.iter().all(|c| *c >= 0.0 && c.is_finite()));
            prop_assert!(x.iter().any(|c| *c > 0.0));
        }
        prop_assert_eq!(synth_stream(&spec, dim).unwrap(), v);
    }
}
