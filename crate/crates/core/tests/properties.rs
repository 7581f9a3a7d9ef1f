use proptest::prelude::*;
use wks_core::feasibility::oracle::{last_labels_by_enumeration, q_from_tuples, DEFAULT_ENUMERATION_BUDGET};
use wks_core::feasibility::{compute_q, is_feasible, FeasibilityIndex, LabelSet};
use wks_core::offline::{opt_cost, opt_hierarchical};
use wks_core::sequences::n_value;
use wks_core::spc::lazy_spc_step;
use wks_core::{pattern_cost, ExtensionTrace, Level, Point, RspEngine, Universe, Weights};

fn levels(k: usize, max_len: usize) -> impl Strategy<Value = Vec<Level>> {
    prop::collection::vec(0..=k, 0..max_len).prop_map(move |mut rest| {
        rest.insert(0, k);
        rest
    })
}

fn instance(k: usize, max_len: usize, size: u32) -> impl Strategy<Value = (Vec<Level>, Vec<Point>)> {
    levels(k, max_len).prop_flat_map(move |ells| {
        let n = ells.len();
        (Just(ells), prop::collection::vec(0..size, n))
    })
}

/// Requests paired with the least extension level at or above a random
/// proposal that keeps the pattern feasible.
fn feasible_reveals(k: usize, size: u32, requests: &[Point], proposals: &[Level]) -> Vec<(Point, Level)> {
    let mut idx = FeasibilityIndex::new(Universe::new(size).unwrap(), k).unwrap();
    let mut out = Vec::new();
    for (t, (&sigma, &want)) in requests.iter().zip(proposals).enumerate() {
        let start = if t == 0 { k } else { want.min(k) };
        let ell = (start..=k)
            .find(|&ell| {
                idx.push(sigma, ell).unwrap();
                let ok = idx.is_feasible();
                idx.pop();
                ok
            })
            .unwrap();
        idx.push(sigma, ell).unwrap();
        out.push((sigma, ell));
    }
    out
}

fn all_tops(size: u32, len: usize) -> Vec<Vec<Point>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..size).map(move |p| {
                    let mut w = v.clone();
                    w.push(p);
                    w
                })
            })
            .collect();
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn patterns_are_hierarchical(k in 1usize..=4, ells in levels(4, 12)) {
        let ells: Vec<Level> = ells.iter().map(|&l| l.min(k)).collect();
        let mut ells = ells;
        ells[0] = k;
        let trace = ExtensionTrace::from_levels(k, &ells).unwrap();
        let set = trace.intervals();
        prop_assert!(set.is_hierarchical());
        for level in 1..=k {
            let fresh = 1 + ells[1..].iter().filter(|&&l| l >= level).count();
            prop_assert_eq!(trace.interval_count(level), fresh);
            if level < k {
                prop_assert!(trace.interval_count(level) >= trace.interval_count(level + 1));
            }
            let covered: u32 = trace.intervals_at(level).map(|iv| iv.len()).sum();
            prop_assert_eq!(covered as usize, ells.len());
        }
    }

    #[test]
    fn extend_matches_from_levels(k in 1usize..=3, ells in levels(3, 6), next in 0usize..=3) {
        let mut ells = ells;
        ells.iter_mut().for_each(|l| *l = (*l).min(k));
        ells[0] = k;
        let trace = ExtensionTrace::from_levels(k, &ells).unwrap();
        let ext = trace.extend(next.min(k)).unwrap();
        ells.push(next.min(k));
        prop_assert_eq!(ext, ExtensionTrace::from_levels(k, &ells).unwrap());
    }

    #[test]
    fn all_fresh_pattern_cost(ws in prop::collection::vec(1u64..20, 1..4), t in 1usize..8) {
        let mut ws = ws;
        ws.sort_unstable();
        let k = ws.len();
        let w = Weights::from_integers(&ws).unwrap();
        let trace = ExtensionTrace::from_levels(k, &vec![k; t]).unwrap();
        let expected = w.total() * num::BigRational::from_integer((t as i64).into());
        prop_assert_eq!(pattern_cost(&trace, &w).unwrap(), expected);
    }

    #[test]
    fn q_matches_enumeration((ells, reqs) in instance(2, 5, 3), size in 1u32..=3) {
        let reqs: Vec<Point> = reqs.iter().map(|&p| p % size).collect();
        let u = Universe::new(size).unwrap();
        let trace = ExtensionTrace::from_levels(2, &ells).unwrap();
        let tuples = last_labels_by_enumeration(&trace, &reqs, u, DEFAULT_ENUMERATION_BUDGET).unwrap();
        prop_assert_eq!(is_feasible(&trace, &reqs, u).unwrap(), !tuples.is_empty());
        for level in 1..=2 {
            for top in all_tops(size, 2 - level) {
                let q = compute_q(&trace, &reqs, u, level, &top).unwrap();
                prop_assert_eq!(q, q_from_tuples(&tuples, u, level, &top));
            }
        }
    }

    #[test]
    fn feasibility_is_prefix_closed((ells, reqs) in instance(2, 7, 3)) {
        let u = Universe::new(3).unwrap();
        let trace = ExtensionTrace::from_levels(2, &ells).unwrap();
        if is_feasible(&trace, &reqs, u).unwrap() {
            for t in 1..=reqs.len() {
                prop_assert!(is_feasible(&trace.prefix(t), &reqs[..t], u).unwrap());
            }
        }
    }

    #[test]
    fn q_sets_shrink_and_obey_dichotomy(
        reqs in prop::collection::vec(0u32..6, 1..7),
        proposals in prop::collection::vec(0usize..=2, 7),
    ) {
        let (k, size) = (2, 6);
        let u = Universe::new(size).unwrap();
        let reveals = feasible_reveals(k, size, &reqs, &proposals);
        let mut idx = FeasibilityIndex::new(u, k).unwrap();
        let mut prev: Option<Vec<(Level, Vec<Point>, LabelSet)>> = None;
        for &(sigma, ell) in &reveals {
            idx.push(sigma, ell).unwrap();
            let mut now = Vec::new();
            for level in 1..=k {
                for top in all_tops(size, k - level) {
                    let q = idx.compute_q(level, &top).unwrap();
                    prop_assert!(!q.is_empty() || level < k);
                    if let LabelSet::Explicit(v) = &q {
                        prop_assert!(v.len() as u64 <= n_value(level).unwrap());
                    }
                    now.push((level, top, q));
                }
            }
            if let Some(before) = &prev {
                for ((level, _, q_now), (_, _, q_before)) in now.iter().zip(before) {
                    if *level > ell {
                        prop_assert!(q_now.is_subset_of(q_before));
                    }
                }
            }
            prev = Some(now);
        }
    }

    #[test]
    fn lazy_level_is_minimal((ells, reqs) in instance(2, 5, 3), sigma in 0u32..3) {
        let u = Universe::new(3).unwrap();
        let trace = ExtensionTrace::from_levels(2, &ells).unwrap();
        prop_assume!(is_feasible(&trace, &reqs, u).unwrap());
        let ell = lazy_spc_step(&reqs, &trace, sigma, u).unwrap();
        let mut longer = reqs.clone();
        longer.push(sigma);
        prop_assert!(is_feasible(&trace.extend(ell).unwrap(), &longer, u).unwrap());
        for lower in 0..ell {
            prop_assert!(!is_feasible(&trace.extend(lower).unwrap(), &longer, u).unwrap());
        }
    }

    #[test]
    fn hierarchical_optimum_is_optimal(reqs in prop::collection::vec(0u32..3, 1..6), w2 in 1u64..6) {
        let u = Universe::new(3).unwrap();
        let w = Weights::from_integers(&[1, w2]).unwrap();
        let opt = opt_hierarchical(&reqs, &w, u).unwrap();
        prop_assert!(is_feasible(&opt.trace, &reqs, u).unwrap());
        prop_assert!(opt.labeling.serves(&opt.trace, &reqs));
        prop_assert_eq!(pattern_cost(&opt.trace, &w).unwrap(), opt.cost.clone());
        let mut best: Option<num::BigRational> = None;
        let rest = reqs.len() - 1;
        for code in 0..3usize.pow(rest as u32) {
            let mut ells = vec![2];
            let mut c = code;
            for _ in 0..rest {
                ells.push(c % 3);
                c /= 3;
            }
            let trace = ExtensionTrace::from_levels(2, &ells).unwrap();
            if is_feasible(&trace, &reqs, u).unwrap() {
                let cost = pattern_cost(&trace, &w).unwrap();
                if best.as_ref().is_none_or(|b| cost < *b) {
                    best = Some(cost);
                }
            }
        }
        prop_assert_eq!(best.unwrap(), opt.cost.clone());
        prop_assert!(opt_cost(&reqs, &w, u).unwrap() <= opt.cost);
    }

    #[test]
    fn engine_serves_and_respects_counts(
        reqs in prop::collection::vec(0u32..4, 1..12),
        proposals in prop::collection::vec(0usize..=3, 12),
        seed in any::<u64>(),
    ) {
        let (k, size) = (3, 4);
        let reveals = feasible_reveals(k, size, &reqs, &proposals);
        let mut engine = RspEngine::new(Universe::new(size).unwrap(), k, seed).unwrap();
        for &(sigma, ell) in &reveals {
            let out = engine.step(sigma, ell).unwrap();
            prop_assert!(out.positions().contains(&sigma));
            for l in 1..=ell {
                prop_assert_eq!(out.level(l).kind, wks_core::MoveKind::Forced);
            }
        }
        prop_assert!(engine.check_membership().unwrap());
        let w = Weights::from_integers(&[1, 3, 9]).unwrap();
        let report = engine.cost_report(&w).unwrap();
        prop_assert_eq!(report.check_counting_bounds(), Ok(()));
    }
}

#[test]
fn same_seed_same_run() {
    let reveals = [(0, 2), (1, 0), (0, 0), (2, 2), (1, 0)];
    let run = |seed| {
        let mut e = RspEngine::new(Universe::new(3).unwrap(), 2, seed).unwrap();
        reveals
            .iter()
            .map(|&(s, l)| e.step(s, l).unwrap().positions())
            .collect::<Vec<_>>()
    };
    assert_eq!(run(17), run(17));
}
