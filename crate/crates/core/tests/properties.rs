mod common;

use common::{close, instance_from};
use fairtopk::dp::solve_dp;
use fairtopk::experiments::{run_sweep, LambdaGrid, SweepConfig};
use fairtopk::greedy::{solve_greedy_merged, solve_greedy_naive};
use fairtopk::ingest::{read_csv, write_csv, CodingConfig};
use fairtopk::lp::{kkt_check, round_lp, solve_lp_relaxation};
use fairtopk::objective::{class_discrepancy, evaluate, marginal_gain, prefix_table};
use fairtopk::oracle::{oracle_counts, oracle_min_discrepancy};
use fairtopk::{build_instance, Candidate, Instance, PolicyParams, Selection};
use proptest::prelude::*;

fn scores() -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec((0u32..=40).prop_map(|s| s as f64 * 12.5), 1..=5), 1..=3)
}

fn rate() -> impl Strategy<Value = f64> {
    prop::sample::select(vec![0.1, 0.2, 0.25, 0.3, 0.5, 0.75, 1.0])
}

fn lambda() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.0), 0.0..50.0f64, 50.0..5000.0f64]
}

fn problem() -> impl Strategy<Value = (Instance, PolicyParams)> {
    (scores(), rate(), lambda()).prop_map(|(s, p, l)| {
        let inst = instance_from(&s);
        let params = PolicyParams::from_rate(inst.total_candidates(), p, l).unwrap();
        (inst, params)
    })
}

/// Any feasible count vector summing to `k`.
fn with_selection() -> impl Strategy<Value = (Instance, PolicyParams, Selection)> {
    (problem(), any::<u64>()).prop_map(|((inst, params), seed)| {
        let mut counts = vec![0; inst.num_classes()];
        let mut left = params.quota;
        let mut s = seed;
        while left > 0 {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let i = (s >> 33) as usize % counts.len();
            if counts[i] < inst.class(i).size() {
                counts[i] += 1;
                left -= 1;
            }
        }
        (inst, params, Selection::new(counts))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn classes_partition_and_sort(raw in prop::collection::vec((0u8..3, 0u8..2, 0u32..20), 1..40)) {
        let cands: Vec<Candidate> = raw
            .iter()
            .enumerate()
            .map(|(i, &(a, b, s))| Candidate::new(format!("id{:03}", 39 - i), s as f64, vec![a.to_string(), b.to_string()]))
            .collect();
        let inst = build_instance(cands.clone()).unwrap();
        prop_assert_eq!(inst.total_candidates(), cands.len());
        let labels = inst.labels();
        prop_assert!(labels.windows(2).all(|w| w[0] < w[1]));
        for class in inst.classes() {
            prop_assert!(class.members().iter().all(|m| m.class_label() == class.label()));
            let sorted = class
                .members()
                .windows(2)
                .all(|w| w[0].score > w[1].score || (w[0].score == w[1].score && w[0].id < w[1].id));
            prop_assert!(sorted);
            prop_assert_eq!(class.prefix_utility(class.size()), class.utilities().iter().sum::<f64>());
        }
    }

    #[test]
    fn evaluate_matches_prefix_table((inst, params, sel) in with_selection()) {
        let b = evaluate(&inst, &params, &sel).unwrap();
        let table = prefix_table(&inst, &params);
        prop_assert!(close(b.total, table.total(&sel), 1e-12));
        prop_assert!(close(b.total, b.utility - params.tradeoff * b.discrepancy, 1e-12));
        for (i, class) in inst.classes().iter().enumerate() {
            prop_assert_eq!(table.get(i, 0), -params.tradeoff * params.selection_rate);
            prop_assert_eq!(table.row(i).len(), class.size() + 1);
        }
    }

    #[test]
    fn marginal_gains_telescope((inst, params, sel) in with_selection()) {
        let mut cur = Selection::empty(inst.num_classes());
        let mut sum = evaluate(&inst, &params, &cur).unwrap().total;
        for (i, &c) in sel.counts.iter().enumerate() {
            for _ in 0..c {
                sum += marginal_gain(&inst, &params, &cur, i).unwrap();
                cur.counts[i] += 1;
            }
        }
        prop_assert!(close(sum, evaluate(&inst, &params, &sel).unwrap().total, 1e-9));
    }

    #[test]
    fn class_discrepancy_is_piecewise_linear(n in 1usize..30, p in 0.0..=1.0f64) {
        let d: Vec<f64> = (0..=n).map(|m| class_discrepancy(m, n, p)).collect();
        let step = 1.0 / n as f64;
        let mut crossings = 0;
        for w in d.windows(2) {
            let diff = w[1] - w[0];
            if (diff + step).abs() > 1e-12 && (diff - step).abs() > 1e-12 {
                crossings += 1;
            }
        }
        // only the step straddling p * n_i may have another slope
        prop_assert!(crossings <= 1);
    }

    #[test]
    fn dp_matches_oracle((inst, params) in problem()) {
        let dp = solve_dp(&inst, &params).unwrap();
        let (_, j) = oracle_counts(&inst, &params).unwrap();
        prop_assert!((dp.breakdown.total - j).abs() <= 1e-9);
        prop_assert_eq!(dp.selection.total(), params.quota);
        prop_assert!(dp.selection.validate(&inst).is_ok());
    }

    #[test]
    fn dp_recurrence_and_prefix_optima((inst, params) in problem()) {
        let dp = solve_dp(&inst, &params).unwrap();
        let t = &dp.table;
        let r = prefix_table(&inst, &params);
        let k = params.quota;
        prop_assert_eq!(t.value.len(), inst.num_classes() + 1);
        prop_assert_eq!(t.value[0][0], 0.0);
        prop_assert!(t.value[0][1..].iter().all(|v| *v == f64::NEG_INFINITY));
        let mut expected_updates = 0u64;
        for i in 1..=inst.num_classes() {
            let n_i = inst.class(i - 1).size();
            for j in 0..=k {
                expected_updates += (j.min(n_i) + 1) as u64;
                let best = (0..=j.min(n_i))
                    .map(|m| t.value[i - 1][j - m] + r.get(i - 1, m))
                    .fold(f64::NEG_INFINITY, f64::max);
                prop_assert_eq!(t.value[i][j], best);
                // the value on classes 0..i with budget j is that subproblem's optimum
                let scores: Vec<Vec<f64>> = inst.classes()[..i].iter().map(|c| c.utilities().to_vec()).collect();
                let sub = instance_from(&scores);
                if j <= sub.total_candidates() {
                    let sub_params = PolicyParams { quota: j, ..params };
                    let (_, oj) = oracle_counts(&sub, &sub_params).unwrap();
                    prop_assert!((t.value[i][j] - oj).abs() <= 1e-9);
                } else {
                    prop_assert_eq!(t.value[i][j], f64::NEG_INFINITY);
                }
            }
        }
        prop_assert_eq!(t.cell_updates, expected_updates);
    }

    #[test]
    fn greedy_variants_agree_and_admit_prefixes((inst, params) in problem()) {
        let naive = solve_greedy_naive(&inst, &params).unwrap();
        let merged = solve_greedy_merged(&inst, &params).unwrap();
        prop_assert_eq!(&naive.selection, &merged.selection);
        prop_assert_eq!(naive.selection.total(), params.quota);
        let dp = solve_dp(&inst, &params).unwrap();
        prop_assert!(merged.breakdown.total <= dp.breakdown.total + 1e-9);
        // counts-based selections are per-class prefixes by construction
        let bits = merged.selection.to_bits(&inst);
        for row in bits {
            prop_assert!(row.windows(2).all(|w| w[0] || !w[1]));
        }
    }

    #[test]
    fn lp_sandwich_and_certificate((inst, params) in problem()) {
        let lp = solve_lp_relaxation(&inst, &params).unwrap();
        prop_assert!((lp.fractional.total() - params.quota as f64).abs() < 1e-9);
        for (a, class) in lp.fractional.amounts.iter().zip(inst.classes()) {
            prop_assert!(*a >= -1e-12 && *a <= class.size() as f64 + 1e-12);
        }
        let rounded = round_lp(&lp.fractional, &inst, &params).unwrap();
        prop_assert_eq!(rounded.selection.total(), params.quota);
        let dp = solve_dp(&inst, &params).unwrap().breakdown.total;
        prop_assert!(rounded.breakdown.total <= dp + 1e-9);
        prop_assert!(dp <= lp.relaxed_total + 1e-9);
        prop_assert!(rounded.gap >= -1e-9);
        prop_assert!(kkt_check(&inst, &params, &lp.fractional, 1e-7).satisfied);
    }

    #[test]
    fn huge_lambda_counts_bracket_target((inst, params) in problem()) {
        let huge = params.with_tradeoff(1e6 * inst.max_score().max(1.0));
        let dp = solve_dp(&inst, &huge).unwrap();
        let (_, d_min) = oracle_min_discrepancy(&inst, &huge).unwrap();
        prop_assert!(dp.breakdown.discrepancy <= d_min + 1e-12);
        for (&c, class) in dp.selection.counts.iter().zip(inst.classes()) {
            let target = params.selection_rate * class.size() as f64;
            prop_assert!((c as f64 - target).abs() <= 1.0 + 1e-9, "count {} target {}", c, target);
        }
    }

    #[test]
    fn sweep_is_monotone((inst, params) in problem()) {
        prop_assume!(params.quota > 0);
        let config = SweepConfig {
            rates: vec![params.selection_rate],
            lambda_grid: LambdaGrid::Geometric { max_doublings: 20 },
            parity_threshold: 1e-12,
            parallel: false,
            ..SweepConfig::default()
        };
        let out = run_sweep(&inst, params.selection_rate, &config).unwrap();
        prop_assert_eq!(out.results[0].avg_utility_decrease, 0.0);
        for w in out.results.windows(2) {
            prop_assert!(w[1].lambda > w[0].lambda);
            prop_assert!(w[1].discrepancy <= w[0].discrepancy + 1e-9);
            prop_assert!(w[1].total_utility <= w[0].total_utility + 1e-9);
        }
    }

    #[test]
    fn csv_round_trip(rows in prop::collection::vec(("[a-z][a-z0-9]{0,6}", 0u32..=85000, 0u8..4), 1..30)) {
        let mut seen = std::collections::BTreeSet::new();
        let cands: Vec<Candidate> = rows
            .into_iter()
            .filter(|(id, _, _)| seen.insert(id.clone()))
            .map(|(id, s, g)| Candidate::new(id, s as f64 / 100.0, vec![format!("g{g}")]))
            .collect();
        let inst = build_instance(cands).unwrap();
        let mut buf = Vec::new();
        write_csv(&inst, &["group"], &mut buf).unwrap();
        let back = read_csv(buf.as_slice(), &CodingConfig::passthrough("id", "score", &["group"])).unwrap();
        prop_assert_eq!(back, inst);
    }
}
