use nes_core::metrics::{aggregate, friedman_ranks, igd, nof, wilcoxon_signed_rank, ObjectiveImage};
use nes_core::suite::suite_entry;
use nes_core::transforms::{mones_objectives, RepulsionConfig, RootArchive, DEFAULT_ZETA_CAP};
use nes_core::{evaluate_reduced, expand_individual, ObjectiveKind};
use proptest::prelude::*;

fn images(xs: &[f64]) -> Vec<ObjectiveImage> {
    xs.iter().map(|&x| ObjectiveImage::new(x)).collect()
}

fn brute_igd(ip: &[ObjectiveImage], star: &[ObjectiveImage]) -> f64 {
    let mut total = 0.0;
    for s in star {
        let mut best = f64::INFINITY;
        for p in ip {
            let d = ((s.x - p.x).powi(2) + (s.y - p.y).powi(2)).sqrt();
            if d < best {
                best = d;
            }
        }
        total += best;
    }
    total / star.len() as f64
}

fn brute_nof(ip: &[ObjectiveImage], star: &[ObjectiveImage], eps: f64) -> usize {
    let mut count = 0;
    for s in star {
        let mut best = f64::INFINITY;
        for p in ip {
            let d = ((s.x - p.x).powi(2) + (s.y - p.y).powi(2)).sqrt();
            if d < best {
                best = d;
            }
        }
        if best <= eps {
            count += 1;
        }
    }
    count
}

fn points(max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 1..max)
}

proptest! {
    #[test]
    fn igd_and_nof_equal_the_double_loop(ip in points(50), star in points(50), eps in 0.001f64..0.5) {
        let (ip, star) = (images(&ip), images(&star));
        prop_assert_eq!(igd(&ip, &star).unwrap().to_bits(), brute_igd(&ip, &star).to_bits());
        prop_assert_eq!(nof(&ip, &star, eps), brute_nof(&ip, &star, eps));
    }

    #[test]
    fn nof_grows_with_epsilon_and_points(ip in points(30), extra in points(10), star in points(30), e1 in 0.0f64..0.3, e2 in 0.0f64..0.3) {
        let (ip, star) = (images(&ip), images(&star));
        let (lo, hi) = (e1.min(e2), e1.max(e2));
        prop_assert!(nof(&ip, &star, lo) <= nof(&ip, &star, hi));
        let mut more = ip.clone();
        more.extend(images(&extra));
        prop_assert!(nof(&ip, &star, hi) <= nof(&more, &star, hi));
    }

    #[test]
    fn signed_rank_sums_cover_all_ranks(pairs in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 5..40)) {
        let w = wilcoxon_signed_rank(&pairs).unwrap();
        let n = w.n as f64;
        prop_assert!((w.r_plus + w.r_minus - n * (n + 1.0) / 2.0).abs() < 1e-9);
        prop_assert!(w.p > 0.0 && w.p <= 1.0);
        let swapped: Vec<(f64, f64)> = pairs.iter().map(|&(a, b)| (b, a)).collect();
        let s = wilcoxon_signed_rank(&swapped).unwrap();
        prop_assert_eq!((s.r_plus, s.r_minus), (w.r_minus, w.r_plus));
        prop_assert!((s.p - w.p).abs() < 1e-12);
    }

    #[test]
    fn empty_archive_leaves_the_objective_alone(g in 0.0f64..1e6, x in prop::collection::vec(-5.0f64..5.0, 1..6), t in 0u64..200) {
        let cfg = RepulsionConfig::new(0.1, 100, 0.1, 5.0, DEFAULT_ZETA_CAP).unwrap();
        prop_assert_eq!(cfg.repulsion_value(g, &x, &RootArchive::default(), t).to_bits(), g.to_bits());
    }

    #[test]
    fn repulsion_never_lowers_the_objective(g in 0.0f64..10.0, x in prop::collection::vec(-1.0f64..1.0, 2), r in prop::collection::vec(-1.0f64..1.0, 2), t in 0u64..=100) {
        let cfg = RepulsionConfig::new(0.1, 100, 0.02, 1.0, DEFAULT_ZETA_CAP).unwrap();
        let mut a = RootArchive::default();
        a.try_add(&r, 0.0);
        prop_assert!(cfg.repulsion_value(g, &x, &a, t) >= g);
    }

    #[test]
    fn roots_sit_on_the_mones_line(x in -1.0f64..1.0) {
        let (g1, g2) = mones_objectives(x, &[0.0, 0.0, 0.0]);
        prop_assert_eq!(g2, 1.0 - g1);
    }

    #[test]
    fn f6_expansions_keep_the_core(core in prop::collection::vec(-1.0f64..1.0, 3)) {
        let e = suite_entry("F6").unwrap();
        let (p, s) = (&e.file.problem, e.file.scheme.as_ref().unwrap());
        let cands = expand_individual(p, s, &core);
        prop_assert!(!cands.is_empty() && cands.len() <= 4);
        for c in &cands {
            prop_assert_eq!(s.core_of(&c.full), core.clone());
            prop_assert!(p.in_bounds(&c.full).unwrap());
        }
        let best = evaluate_reduced(p, s, &core, ObjectiveKind::Sq);
        prop_assert!(best.value >= 0.0);
        for c in &cands {
            let v: f64 = s.retained_eqs().iter().map(|&i| p.residual(i, &c.full).powi(2)).sum();
            prop_assert!(best.value <= v || v.is_nan());
        }
    }

    #[test]
    fn aggregate_orders_its_statistics(values in prop::collection::vec(0.0f64..100.0, 1..40)) {
        let a = aggregate(&values, true).unwrap();
        prop_assert!(a.best <= a.mean + 1e-9 && a.mean <= a.worst + 1e-9 && a.std >= 0.0);
        let b = aggregate(&values, false).unwrap();
        prop_assert_eq!((b.best, b.worst), (a.worst, a.best));
    }
}

/// Two-sided exact p by enumerating every sign assignment.
fn enumerated_p(diffs: &[f64]) -> f64 {
    let mut abs: Vec<(f64, usize)> = diffs.iter().map(|d| d.abs()).zip(0..).collect();
    abs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut ranks = vec![0.0; diffs.len()];
    let mut i = 0;
    while i < abs.len() {
        let mut j = i;
        while j + 1 < abs.len() && abs[j + 1].0 == abs[i].0 {
            j += 1;
        }
        for k in i..=j {
            ranks[abs[k].1] = (i + j) as f64 / 2.0 + 1.0;
        }
        i = j + 1;
    }
    let observed: f64 = diffs.iter().zip(&ranks).filter(|(d, _)| **d > 0.0).map(|(_, r)| r).sum();
    let n = diffs.len();
    let (mut le, mut ge) = (0u32, 0u32);
    for mask in 0u32..(1 << n) {
        let s: f64 = (0..n).filter(|k| mask & (1 << k) != 0).map(|k| ranks[k]).sum();
        if s <= observed + 1e-9 {
            le += 1;
        }
        if s >= observed - 1e-9 {
            ge += 1;
        }
    }
    (2.0 * le.min(ge) as f64 / (1u64 << n) as f64).min(1.0)
}

#[test]
fn exact_p_matches_enumeration() {
    let cases: [[f64; 6]; 4] = [
        [0.3, -1.2, 2.5, 0.7, -0.1, 1.9],
        [1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
        [1.0, -1.0, 2.0, -2.0, 3.0, 0.5],
        [0.4, 0.4, -0.4, 1.1, 2.2, -3.3],
    ];
    for diffs in cases {
        let pairs: Vec<(f64, f64)> = diffs.iter().map(|&d| (0.0, d)).collect();
        let w = wilcoxon_signed_rank(&pairs).unwrap();
        assert!((w.p - enumerated_p(&diffs)).abs() < 1e-12, "{diffs:?}: {} vs {}", w.p, enumerated_p(&diffs));
    }
}

#[test]
fn friedman_hand_ranked_matrix() {
    let m = vec![vec![1.0, 2.0, 3.0], vec![2.0, 1.0, 3.0], vec![3.0, 3.0, 1.0]];
    assert_eq!(friedman_ranks(&m, true).unwrap(), vec![(1.0 + 2.0 + 2.5) / 3.0, (2.0 + 1.0 + 2.5) / 3.0, (3.0 + 3.0 + 1.0) / 3.0]);
    let tied = vec![vec![4.0, 4.0], vec![1.0, 1.0]];
    assert_eq!(friedman_ranks(&tied, true).unwrap(), vec![1.5, 1.5]);
}
