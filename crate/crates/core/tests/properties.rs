use approx::assert_abs_diff_eq;
use ndarray::Array2;
use proptest::prelude::*;

use spot::*;

fn instance(max_m: usize, max_n: usize) -> impl Strategy<Value = (SimilarityMatrix, SimplexWeights)> {
    (1..=max_m, 1..=max_n).prop_flat_map(|(m, n)| {
        (
            prop::collection::vec(0.001f64..1.0, m * n),
            prop::collection::vec(0.01f64..1.0, n),
        )
            .prop_map(move |(s, q)| {
                (
                    SimilarityMatrix::from_entries(Array2::from_shape_vec((m, n), s).unwrap()).unwrap(),
                    SimplexWeights::normalized(q).unwrap(),
                )
            })
    })
}

fn subset(m: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::sample::subsequence((0..m).collect::<Vec<_>>(), 0..=m)
}

fn points(max_m: usize, dim: usize) -> impl Strategy<Value = Dataset> {
    (1..=max_m).prop_flat_map(move |m| {
        prop::collection::vec(-3.0f64..3.0, m * dim)
            .prop_map(move |v| Dataset::new(Array2::from_shape_vec((m, dim), v).unwrap(), None, "p").unwrap())
    })
}

fn f(s: &SimilarityMatrix, q: &SimplexWeights, set: &[usize]) -> f64 {
    if set.is_empty() {
        0.0
    } else {
        objective_of(s, q, set).unwrap()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn monotone_and_submodular(
        (s, q, a, b, i) in instance(9, 7).prop_flat_map(|(s, q)| {
            let m = s.nrows();
            (Just(s), Just(q), subset(m), subset(m), 0..m)
        })
    ) {
        // A = a ∩ b ⊆ B = b, i ∉ B
        let a: Vec<usize> = a.into_iter().filter(|x| b.contains(x)).collect();
        prop_assume!(!b.contains(&i));
        let fa = f(&s, &q, &a);
        let fb = f(&s, &q, &b);
        prop_assert!(fb >= fa - 1e-12);
        let mut ai = a.clone();
        ai.push(i);
        let mut bi = b.clone();
        bi.push(i);
        let gain_a = f(&s, &q, &ai) - fa;
        let gain_b = f(&s, &q, &bi) - fb;
        prop_assert!(gain_a >= gain_b - 1e-12);
        prop_assert!(gain_b >= -1e-12);
    }

    #[test]
    fn cache_matches_rebuild((s, q, base, extra) in instance(10, 8).prop_flat_map(|(s, q)| {
        let m = s.nrows();
        (Just(s), Just(q), subset(m), subset(m))
    })) {
        let extra: Vec<usize> = extra.into_iter().filter(|x| !base.contains(x)).collect();
        let mut cache = empty_cache(&s, &q).unwrap();
        cache.extend(&base).unwrap();
        let gains = incremental_gains(&cache, &extra).unwrap();
        for (&x, g) in extra.iter().zip(&gains) {
            let mut with = base.clone();
            with.push(x);
            assert_abs_diff_eq!(*g, f(&s, &q, &with) - f(&s, &q, &base), epsilon = 1e-12);
        }
        let next = extend_cache(&cache, &extra).unwrap();
        let mut all = base.clone();
        all.extend(&extra);
        assert_abs_diff_eq!(next.objective(), f(&s, &q, &all), epsilon = 1e-12);
        if !all.is_empty() {
            prop_assert_eq!(next.plan().unwrap(), plan_for_set(&s, &q, &all).unwrap());
        }
    }

    #[test]
    fn objective_ignores_order((s, q, set, seed) in instance(10, 8).prop_flat_map(|(s, q)| {
        let m = s.nrows();
        (Just(s), Just(q), subset(m), any::<u64>())
    })) {
        prop_assume!(!set.is_empty());
        let mut shuffled = set.clone();
        let k = shuffled.len();
        shuffled.rotate_left((seed as usize) % k);
        shuffled.reverse();
        prop_assert_eq!(f(&s, &q, &set), f(&s, &q, &shuffled));
        // the argmax plan is the same mass assignment, up to row order
        let a = plan_for_set(&s, &q, &set).unwrap();
        let b = plan_for_set(&s, &q, &shuffled).unwrap();
        let mut na: Vec<_> = a.nonzeros();
        let mut nb: Vec<_> = b.nonzeros();
        na.sort_by_key(|x| (x.0, x.1));
        nb.sort_by_key(|x| (x.0, x.1));
        prop_assert_eq!(na, nb);
    }

    #[test]
    fn plan_is_feasible_and_attains_objective((s, q, set) in instance(10, 8).prop_flat_map(|(s, q)| {
        let m = s.nrows();
        (Just(s), Just(q), subset(m))
    })) {
        prop_assume!(!set.is_empty());
        let plan = plan_for_set(&s, &q, &set).unwrap();
        for (c, qj) in plan.column_sums().iter().zip(q.values()) {
            assert_abs_diff_eq!(*c, *qj, epsilon = 1e-15);
        }
        prop_assert!(plan.count_nonzero() <= q.len());
        assert_abs_diff_eq!(plan.similarity_inner(&s), f(&s, &q, &set), epsilon = 1e-12);
        let w = weights_from_plan(&plan, &q).unwrap();
        assert_abs_diff_eq!(w.values().iter().sum::<f64>(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn greedy_step_takes_a_maximal_gain((s, q, k) in instance(12, 8).prop_flat_map(|(s, q)| {
        let m = s.nrows();
        (Just(s), Just(q), 1..=m)
    })) {
        let (set, trace) = spot_greedy(&s, &q, &SelectionConfig::new(k)).unwrap();
        prop_assert_eq!(set.len(), k);
        let mut cache = empty_cache(&s, &q).unwrap();
        for rec in &trace.per_iteration {
            let best = cache.remaining_gains().iter().map(|g| g.1).fold(f64::NEG_INFINITY, f64::max);
            let picked = cache.gains(&rec.added_indices).unwrap()[0];
            prop_assert!(picked >= best - 1e-15);
            cache.extend(&rec.added_indices).unwrap();
        }
        assert_abs_diff_eq!(set.objective, f(&s, &q, &set.indices), epsilon = 1e-12);
        let objs: Vec<f64> = trace.per_iteration.iter().map(|r| r.objective).collect();
        prop_assert!(objs.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn batch_greedy_respects_k((s, q, k, b) in instance(12, 6).prop_flat_map(|(s, q)| {
        let m = s.nrows();
        (Just(s), Just(q), 1..=m, 1..=4usize)
    })) {
        let (set, trace) = spot_greedy(&s, &q, &SelectionConfig::new(k).with_batch(b.min(k))).unwrap();
        prop_assert_eq!(set.len(), k);
        prop_assert_eq!(trace.per_iteration.len(), k.div_ceil(b.min(k)));
        let mut sorted = set.indices.clone();
        sorted.sort_unstable();
        sorted.dedup();
        prop_assert_eq!(sorted.len(), k);
    }

    #[test]
    fn ratio_within_bounds((s, q, base, added) in instance(10, 8).prop_flat_map(|(s, q)| {
        let m = s.nrows();
        (Just(s), Just(q), subset(m), subset(m))
    })) {
        let added: Vec<usize> = added.into_iter().filter(|x| !base.contains(x)).collect();
        prop_assume!(!added.is_empty());
        if let Some(alpha) = submodularity_ratio(&s, &q, &base, &added).unwrap() {
            prop_assert!(alpha >= 1.0 - 1e-9);
            prop_assert!(alpha <= added.len() as f64 + 1e-9);
        }
    }

    #[test]
    fn simple_never_beats_brute_force((s, q, k) in instance(8, 6).prop_flat_map(|(s, q)| {
        let m = s.nrows();
        (Just(s), Just(q), 1..=m.min(4))
    })) {
        let opt = brute_force_optimum(&s, &q, k).unwrap();
        let simple = spot_simple(&s, &q, k).unwrap();
        let (greedy, _) = spot_greedy(&s, &q, &SelectionConfig::new(k)).unwrap();
        prop_assert!(simple.objective <= opt.objective + 1e-12);
        prop_assert!(greedy.objective <= opt.objective + 1e-12);
        prop_assert!(greedy.objective >= (1.0 - (-1.0f64).exp()) * opt.objective - 1e-12);
    }

    #[test]
    fn similarity_from_cost_is_positive(costs in prop::collection::vec(0.0f64..100.0, 1..40)) {
        let n = costs.len();
        let c = GroundCost::new(Array2::from_shape_vec((1, n), costs.clone()).unwrap(), MetricKind::Precomputed).unwrap();
        let s = to_similarity(&c, None).unwrap();
        let beta = s.beta().unwrap();
        for (j, cj) in costs.iter().enumerate() {
            prop_assert!(s.get(0, j) > 0.0);
            assert_abs_diff_eq!(s.get(0, j), beta - cj, epsilon = 1e-12);
        }
    }

    #[test]
    fn mmd_gradient_matches_finite_differences(
        (pts, w, sigma) in points(8, 2).prop_flat_map(|p| {
            let m = p.len();
            (Just(p), prop::collection::vec(0.05f64..1.0, m), prop::sample::select(SIGMA_GRID.to_vec()))
        })
    ) {
        let km = gaussian_kernel(&pts, &pts, sigma).unwrap();
        let grad = mmd_gradient(&km, &w).unwrap();
        let h = 1e-5;
        for i in 0..w.len() {
            let mut up = w.clone();
            up[i] += h;
            let mut down = w.clone();
            down[i] -= h;
            let fd = (mmd_objective(&km, &up).unwrap() - mmd_objective(&km, &down).unwrap()) / (2.0 * h);
            assert_abs_diff_eq!(fd, grad[i], epsilon = 1e-6);
        }
    }

    #[test]
    fn protodash_refit_never_decreases((pts, k) in points(10, 2).prop_flat_map(|p| {
        let m = p.len();
        (Just(p), 1..=m)
    })) {
        let tgt = Dataset::new(pts.points().mapv(|x| x * 0.5 + 0.3), None, "t").unwrap();
        let km = gaussian_kernel(&pts, &tgt, 1.0).unwrap();
        let sel = protodash_select(&km, k).unwrap();
        prop_assert!(sel.weights.iter().all(|w| *w >= 0.0));
        prop_assert!(sel.history.windows(2).all(|h| h[1] >= h[0] - 1e-12));
        let mut w = vec![0.0; sel.indices.len()];
        let scores = refit_weights(&km, &sel.indices, &mut w, &RefitConfig::default()).unwrap();
        prop_assert!(scores.first().is_none_or(|s| *s >= -1e-12));
        prop_assert!(scores.windows(2).all(|s| s[1] >= s[0] - 1e-12));
    }

    #[test]
    fn exact_plan_is_a_sparse_vertex((k, n, cost, p, q) in (1..=5usize, 1..=5usize).prop_flat_map(|(k, n)| (
        Just(k),
        Just(n),
        prop::collection::vec(0.0f64..10.0, k * n),
        prop::collection::vec(0.01f64..1.0, k),
        prop::collection::vec(0.01f64..1.0, n),
    ))) {
        let problem = OtProblem::new(
            Array2::from_shape_vec((k, n), cost).unwrap(),
            SimplexWeights::normalized(p).unwrap(),
            SimplexWeights::normalized(q).unwrap(),
        ).unwrap();
        let exact = solve_exact(&problem).unwrap();
        prop_assert!(exact.marginal_violation < 1e-12);
        prop_assert!(exact.plan.count_nonzero() < k + n);
        prop_assert!(exact.plan.entries.iter().all(|x| *x >= 0.0));
        let cfg = SinkhornConfig { reg: 0.5, max_iters: 10_000, tol: 1e-9 };
        let sk = solve_sinkhorn(&problem, &cfg).unwrap();
        // any feasible plan costs at least the optimum, up to its marginal error
        prop_assert!(sk.objective >= exact.objective - 10.0 * 2.0 * sk.marginal_violation - 1e-9);
    }

    #[test]
    fn barycentric_images_lie_in_the_box((pts, k, seed) in points(6, 3).prop_flat_map(|p| (Just(p), 1..=4usize, any::<u64>()))) {
        let n = pts.len();
        let cost: Vec<f64> = (0..k * n).map(|x| ((x as u64).wrapping_mul(seed | 1) % 97) as f64).collect();
        let problem = OtProblem::new(
            Array2::from_shape_vec((k, n), cost).unwrap(),
            uniform_weights(k).unwrap(),
            uniform_weights(n).unwrap(),
        ).unwrap();
        let sol = solve_exact(&problem).unwrap();
        let images = barycentric_map(&sol.plan, &pts).unwrap();
        for img in images.into_iter().flatten() {
            for (d, x) in img.iter().enumerate() {
                let col = pts.points().column(d);
                let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                prop_assert!(*x >= lo - 1e-12 && *x <= hi + 1e-12);
            }
        }
    }

    #[test]
    fn skewed_targets_are_deterministic(seed in any::<u64>(), z in 0.0f64..=100.0) {
        let pool = gaussian_blobs(3, 30, 3, 4.0, 1.0, 1).unwrap();
        let spec = SkewSpec { skew_class: "2".into(), z_percent: z, seed };
        match (build_skewed_target(&pool, &spec), build_skewed_target(&pool, &spec)) {
            (Ok(a), Ok(b)) => {
                prop_assert_eq!(&a, &b);
                let labels = a.labels().unwrap();
                let skew = labels.iter().filter(|l| *l == "2").count() as f64;
                let total = labels.len() as f64;
                // the skew class absorbs the rounding of the two other classes
                prop_assert!((skew - z / 100.0 * total).abs() < 2.0 + 1e-9);
                for other in ["0", "1"] {
                    let c = labels.iter().filter(|l| *l == other).count() as f64;
                    prop_assert!((c - (100.0 - z) / 200.0 * total).abs() < 1.0 + 1e-9);
                }
            }
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "non-deterministic feasibility"),
        }
    }
}

#[test]
fn lp_value_equals_objective_on_fixed_instance() {
    // LP over plans supported on P: each column goes to its best row
    let s = SimilarityMatrix::from_entries(ndarray::array![[3.0, 1.0, 2.0], [2.0, 4.0, 2.0]]).unwrap();
    let q = SimplexWeights::new(vec![0.25, 0.25, 0.5]).unwrap();
    assert_abs_diff_eq!(f(&s, &q, &[0, 1]), 0.25 * 3.0 + 0.25 * 4.0 + 0.5 * 2.0);
    let plan = plan_for_set(&s, &q, &[1, 0]).unwrap();
    // column 2 ties; the lower source index gets the mass
    assert_eq!(plan.entries[[1, 2]], 0.5);
}
