use lsc_core::dtw::{dtw_fast_with_path, DtwMode};
use lsc_core::{dtw_exact, dtw_fast, pairwise_dtw, FastDtwSpec, LineSeries};
use proptest::prelude::*;

/// Minimum path cost over every monotone, continuous path, by exhaustive
/// depth-first enumeration.
fn brute_force(s: &[f64], t: &[f64]) -> f64 {
    fn walk(s: &[f64], t: &[f64], i: usize, j: usize, acc: f64, best: &mut f64) {
        let acc = acc + (s[i] - t[j]).abs();
        if i + 1 == s.len() && j + 1 == t.len() {
            *best = best.min(acc);
            return;
        }
        if i + 1 < s.len() {
            walk(s, t, i + 1, j, acc, best);
        }
        if j + 1 < t.len() {
            walk(s, t, i, j + 1, acc, best);
        }
        if i + 1 < s.len() && j + 1 < t.len() {
            walk(s, t, i + 1, j + 1, acc, best);
        }
    }
    let mut best = f64::INFINITY;
    walk(s, t, 0, 0, 0.0, &mut best);
    best
}

fn small_seq() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((0u8..4).prop_map(f64::from), 1..=6)
}

fn real_seq(max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0f64..5.0, 1..=max)
}

#[test]
fn all_pairs_up_to_length_three_match_enumeration() {
    let mut seqs = vec![];
    for len in 1..=3u32 {
        for code in 0..4u32.pow(len) {
            seqs.push((0..len).map(|p| f64::from((code / 4u32.pow(p)) % 4)).collect::<Vec<_>>());
        }
    }
    for s in &seqs {
        for t in &seqs {
            assert_eq!(dtw_exact(s, t).unwrap().distance, brute_force(s, t), "{s:?} vs {t:?}");
        }
    }
}

#[test]
fn reported_path_is_valid_and_optimal_on_a_known_case() {
    let s = [0.0, 1.0, 2.0, 3.0];
    let t = [0.0, 0.0, 1.0, 2.0, 2.0, 3.0];
    let al = dtw_exact(&s, &t).unwrap();
    assert_eq!(al.distance, 0.0);
    assert!(al.path.is_valid(s.len(), t.len()));
    assert_eq!(al.path.cost(&s, &t), 0.0);
}

#[test]
fn pairwise_matrix_matches_single_calls() {
    let lines: Vec<LineSeries> = [[0.0, 1.0, 2.0], [2.0, 1.0, 0.0], [1.0, 1.0, 1.0], [0.0, 3.0, 0.0]]
        .iter()
        .enumerate()
        .map(|(i, r)| LineSeries::new(i, r.to_vec()))
        .collect();
    let dm = pairwise_dtw(&lines, DtwMode::Exact).unwrap();
    for i in 0..4 {
        assert_eq!(dm.get(i, i), 0.0);
        for j in 0..4 {
            let d = dtw_exact(lines[i].values(), lines[j].values()).unwrap().distance;
            assert_eq!(dm.get(i, j), d);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn exact_equals_enumeration(s in small_seq(), t in small_seq()) {
        prop_assert_eq!(dtw_exact(&s, &t).unwrap().distance, brute_force(&s, &t));
    }

    #[test]
    fn path_cost_equals_distance(s in real_seq(20), t in real_seq(20)) {
        let al = dtw_exact(&s, &t).unwrap();
        prop_assert!(al.path.is_valid(s.len(), t.len()));
        prop_assert!((al.path.cost(&s, &t) - al.distance).abs() <= 1e-9);
    }

    #[test]
    fn bounded_by_lockstep_on_equal_lengths(s in real_seq(24)) {
        let t: Vec<f64> = s.iter().map(|v| v * 0.5 + 1.0).collect();
        let lockstep: f64 = s.iter().zip(&t).map(|(a, b)| (a - b).abs()).sum();
        prop_assert!(dtw_exact(&s, &t).unwrap().distance <= lockstep + 1e-9);
    }

    #[test]
    fn fast_never_underestimates(s in real_seq(64), t in real_seq(64), radius in 0usize..4) {
        let spec = FastDtwSpec::new(radius, 4).unwrap();
        let exact = dtw_exact(&s, &t).unwrap().distance;
        let fast = dtw_fast_with_path(&s, &t, spec).unwrap();
        prop_assert!(fast.distance >= exact - 1e-9);
        prop_assert!(fast.path.is_valid(s.len(), t.len()));
        prop_assert!((fast.path.cost(&s, &t) - fast.distance).abs() <= 1e-9);
    }

    #[test]
    fn fast_with_full_radius_is_exact(s in real_seq(40), t in real_seq(40)) {
        let spec = FastDtwSpec::new(s.len().max(t.len()), 4).unwrap();
        let exact = dtw_exact(&s, &t).unwrap().distance;
        prop_assert!((dtw_fast(&s, &t, spec).unwrap() - exact).abs() <= 1e-9);
    }
}
