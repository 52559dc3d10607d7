//! Cross-module invariants, mostly property-based.

use folio_core::*;
use ndarray::Array2;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_instance(rng: &mut ChaCha8Rng, n: usize, penalty_a: f64) -> PortfolioInstance {
    let mut sigma = Array2::zeros((n, n));
    // factor-free random covariance, guaranteed PSD-ish diagonally dominant
    for i in 0..n {
        sigma[[i, i]] = rng.gen_range(0.5..2.0) * 1e-4;
        for j in (i + 1)..n {
            let v = rng.gen_range(-0.4..0.4) * 1e-4;
            sigma[[i, j]] = v;
            sigma[[j, i]] = v;
        }
    }
    let mu = (0..n).map(|_| rng.gen_range(-2e-3..2e-3)).collect();
    let k = rng.gen_range(1..=n);
    let lambda = rng.gen_range(0.5..2.5);
    PortfolioInstance::new(
        mu,
        sigma,
        lambda,
        penalty_a,
        k,
        (0..n).map(|i| format!("A{i}")).collect(),
        InstanceKind::Equity,
    )
    .unwrap()
}

fn random_selection(rng: &mut ChaCha8Rng, n: usize) -> Selection {
    Selection::from_bits((0..n).map(|_| rng.gen()).collect())
}

/// Direct term-by-term evaluation of the penalized objective
/// −μᵀx + λxᵀΣx + A(1ᵀx − K)².
fn penalized_oracle(inst: &PortfolioInstance, x: &Selection) -> f64 {
    objective_oracle(inst, x)
        + inst.penalty_a() * (x.weight() as f64 - inst.k() as f64).powi(2)
}

fn objective_oracle(inst: &PortfolioInstance, x: &Selection) -> f64 {
    let mut e = 0.0;
    for &i in x.support() {
        e -= inst.mu()[i];
        for &j in x.support() {
            e += inst.lambda() * inst.sigma()[[i, j]];
        }
    }
    e
}

#[test]
fn energy_identity_over_1000_random_draws() {
    let mut rng = ChaCha8Rng::seed_from_u64(987);
    for round in 0..1000 {
        let n = rng.gen_range(2..16);
        let a = if round % 2 == 0 { rng.gen_range(0.5..8.0) } else { 4.0 };
        let inst = random_instance(&mut rng, n, a);
        let x = random_selection(&mut rng, n);

        let qp = build_penalized_qubo(&inst).unwrap();
        let expected = penalized_oracle(&inst, &x);
        let scale = expected.abs().max(1.0);
        assert!((qp.energy(&x).unwrap() - expected).abs() <= 1e-9 * scale);
        let up = qp.to_upper_triangular().unwrap();
        assert!((up.energy(&x).unwrap() - expected).abs() <= 1e-9 * scale);

        let qo = build_objective_qubo(&inst).unwrap();
        let expected = objective_oracle(&inst, &x);
        let scale = expected.abs().max(1.0);
        assert!((qo.energy(&x).unwrap() - expected).abs() <= 1e-9 * scale);
        let uo = qo.to_upper_triangular().unwrap();
        assert!((uo.energy(&x).unwrap() - expected).abs() <= 1e-9 * scale);
    }
}

#[test]
fn penalized_graph_is_complete_for_nondegenerate_sigma() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..50 {
        let n = rng.gen_range(2..30);
        let a = rng.gen_range(0.5..8.0);
        let inst = random_instance(&mut rng, n, a);
        let q = build_penalized_qubo(&inst).unwrap();
        assert_eq!(q.edge_count(), n * (n - 1) / 2);
    }
}

#[test]
fn betting_sigma_components_equal_match_count() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for m in [1usize, 3, 7, 16] {
        let slate = synth_slate(&mut rng, m);
        let (_, sigma) = betting_moments(&slate);
        // union-find over the sparsity graph
        let n = 3 * m;
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut Vec<usize>, i: usize) -> usize {
            if p[i] != i {
                let r = find(p, p[i]);
                p[i] = r;
            }
            p[i]
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if sigma[[i, j]] != 0.0 {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    parent[a] = b;
                }
            }
        }
        let comps: std::collections::HashSet<usize> =
            (0..n).map(|i| find(&mut parent, i)).collect();
        assert_eq!(comps.len(), m);
        // and N = 3M with probabilities summing to 1 per match
        assert_eq!(slate.n(), 3 * m);
    }
}

fn synth_slate(rng: &mut ChaCha8Rng, m: usize) -> BettingSlate {
    let date = chrono::NaiveDate::from_ymd_opt(2023, 10, 7).unwrap();
    let matches = (0..m)
        .map(|i| {
            let ph: f64 = rng.gen_range(0.2..0.6);
            let pd: f64 = rng.gen_range(0.15..0.31);
            let pa = 1.0 - ph - pd;
            let over = rng.gen_range(1.02..1.08);
            let price = |p: f64| (1.0 / (p * over)).clamp(1.1, 15.0);
            SlateMatch {
                date,
                home: format!("H{i}"),
                away: format!("A{i}"),
                outcomes: [
                    SlateOutcome { odds: price(ph), prob: ph },
                    SlateOutcome { odds: price(pd), prob: pd },
                    SlateOutcome { odds: price(pa), prob: pa },
                ],
                result: Some(MatchResult::Home),
            }
        })
        .collect();
    BettingSlate::new(matches).unwrap()
}

/// The exact-K penalty depends on a selection only through its Hamming
/// weight, so every same-direction flip candidate at a given step carries the
/// same penalty delta: greedy projection paths on the penalized and the
/// objective-only model coincide.
#[test]
fn projection_path_is_invariant_to_the_penalty_term() {
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    for _ in 0..25 {
        let n = rng.gen_range(4..20);
        let a = rng.gen_range(1.0..8.0);
        let inst = random_instance(&mut rng, n, a);
        let qp = build_penalized_qubo(&inst).unwrap();
        let qo = build_objective_qubo(&inst).unwrap();
        let k = rng.gen_range(1..=n);
        let start = random_selection(&mut rng, n);
        let tp = project_to_k(&qp, &start, k).unwrap();
        let to = project_to_k(&qo, &start, k).unwrap();
        assert_eq!(tp.end, to.end);
        let flips_p: Vec<usize> = tp.flips.iter().map(|f| f.index).collect();
        let flips_o: Vec<usize> = to.flips.iter().map(|f| f.index).collect();
        assert_eq!(flips_p, flips_o);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sparsifiers_preserve_diagonal_offset_and_subset(seed in 0u64..10_000, n in 4usize..16) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(&mut rng, n, 4.0);
        let q = build_penalized_qubo(&inst).unwrap();
        let corr = folio_core::sparsify::correlation_matrix(inst.sigma()).unwrap();
        let mask = knn_correlation_mask(inst.sigma(), 2).unwrap();
        let r = 2.min(n * (n - 1) / 2 - mask.edge_count());
        let specs: Vec<SparsifierSpec> = vec![
            SparsifierSpec::Threshold { tau: 4.0 },
            SparsifierSpec::TopK { k: 2 },
            SparsifierSpec::Mask { mask: mask.clone() },
            SparsifierSpec::MaskResidual { mask, r, corr },
        ];
        let orig_edges: std::collections::HashSet<(usize, usize)> =
            q.edges().into_iter().collect();
        for spec in &specs {
            let s = spec.apply(&q).unwrap();
            prop_assert_eq!(s.offset(), q.offset());
            for i in 0..n {
                prop_assert_eq!(s.diagonal(i), q.diagonal(i));
            }
            for e in s.edges() {
                prop_assert!(orig_edges.contains(&e));
            }
            // idempotence
            let twice = spec.apply(&s).unwrap();
            prop_assert_eq!(twice.q(), s.q());
        }
    }

    #[test]
    fn topk_edge_bound(seed in 0u64..10_000, n in 4usize..20, k in 1usize..4) {
        let k = k.min(n - 1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(&mut rng, n, 2.0);
        let q = build_penalized_qubo(&inst).unwrap();
        let s = sparsify_topk(&q, k).unwrap();
        prop_assert!(s.edge_count() <= n * k / 2);
    }

    #[test]
    fn mask_output_pattern_within_mask(seed in 0u64..10_000, n in 4usize..16) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(&mut rng, n, 3.0);
        let q = build_penalized_qubo(&inst).unwrap();
        let mask = knn_correlation_mask(inst.sigma(), 1).unwrap();
        let s = sparsify_mask(&q, &mask).unwrap();
        for (i, j) in s.edges() {
            prop_assert!(mask.allows(i, j));
        }
        let rep = dilution_report(&q, &s, inst.penalty_a()).unwrap();
        prop_assert_eq!(rep.removed_edges + rep.retained_edges, q.edge_count());
        let units = rep.removed_penalty_weight / inst.penalty_a();
        prop_assert_eq!(units, units.round());
    }

    #[test]
    fn projection_always_lands_on_weight_k(seed in 0u64..10_000, n in 2usize..20) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(&mut rng, n, 1.0);
        let q = build_objective_qubo(&inst).unwrap();
        let k = rng.gen_range(0..=n);
        let x = random_selection(&mut rng, n);
        let trace = project_to_k(&q, &x, k).unwrap();
        prop_assert_eq!(trace.end.weight(), k);
        prop_assert_eq!(trace.flips.len(), x.weight().abs_diff(k));
        // determinism
        let again = project_to_k(&q, &x, k).unwrap();
        prop_assert_eq!(trace.end, again.end);
    }

    #[test]
    fn upper_triangular_energy_equivalence(seed in 0u64..10_000, n in 2usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(&mut rng, n, 2.0);
        let q = build_penalized_qubo(&inst).unwrap();
        let u = q.to_upper_triangular().unwrap();
        for _ in 0..20 {
            let x = random_selection(&mut rng, n);
            let (a, b) = (q.energy(&x).unwrap(), u.energy(&x).unwrap());
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }

    #[test]
    fn jaccard_symmetry_and_bounds(bits_a in proptest::collection::vec(any::<bool>(), 8),
                                   bits_b in proptest::collection::vec(any::<bool>(), 8)) {
        let a = Selection::from_bits(bits_a);
        let b = Selection::from_bits(bits_b);
        let jab = metrics::jaccard(&a, &b).unwrap();
        let jba = metrics::jaccard(&b, &a).unwrap();
        prop_assert_eq!(jab, jba);
        prop_assert!((0.0..=1.0).contains(&jab));
        prop_assert_eq!(jab == 1.0, a.support() == b.support());
    }
}

#[test]
fn sampler_determinism_across_thread_counts() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let inst = random_instance(&mut rng, 16, 4.0);
    let q = build_penalized_qubo(&inst).unwrap();
    let schedule = AnnealSchedule {
        sweeps: 200,
        beta_start: 0.1,
        beta_end: 10.0,
        reads: 128,
    };
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| simulated_annealing_sample(&q, &schedule, 9).unwrap());
    let many = rayon::ThreadPoolBuilder::new()
        .num_threads(8)
        .build()
        .unwrap()
        .install(|| simulated_annealing_sample(&q, &schedule, 9).unwrap());
    assert_eq!(single.records.len(), many.records.len());
    for (a, b) in single.records.iter().zip(&many.records) {
        assert_eq!(a.selection, b.selection);
        assert_eq!(a.energy, b.energy);
        assert_eq!(a.occurrences, b.occurrences);
    }
}

#[test]
fn no_sampler_beats_the_constrained_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(64);
    for _ in 0..10 {
        let n = rng.gen_range(8..14);
        let inst = random_instance(&mut rng, n, 4.0);
        let k = inst.k();
        let q = build_penalized_qubo(&inst).unwrap();
        let (_, e_opt, _) = brute_force_k_subsets(&q, k, 1_000_000).unwrap();
        for spec in [
            SamplerSpec::Greedy { k, restarts: 32 },
            SamplerSpec::Sa {
                schedule: AnnealSchedule {
                    sweeps: 300,
                    beta_start: 0.1,
                    beta_end: 10.0,
                    reads: 200,
                },
            },
        ] {
            let set = sample(&spec, &q, 5).unwrap();
            for rec in &set.records {
                if rec.selection.weight() == k {
                    assert!(rec.energy >= e_opt - 1e-9);
                }
            }
        }
    }
}

#[test]
fn sample_energies_reevaluate_against_the_model() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let inst = random_instance(&mut rng, 10, 4.0);
    let q = build_penalized_qubo(&inst).unwrap();
    let set = simulated_annealing_sample(
        &q,
        &AnnealSchedule {
            sweeps: 100,
            beta_start: 0.1,
            beta_end: 10.0,
            reads: 256,
        },
        3,
    )
    .unwrap();
    let total: u32 = set.records.iter().map(|r| r.occurrences).sum();
    assert_eq!(total, set.reads);
    for rec in &set.records {
        let again = q.energy(&rec.selection).unwrap();
        assert!((rec.energy - again).abs() <= 1e-9 * again.abs().max(1.0));
    }
}
