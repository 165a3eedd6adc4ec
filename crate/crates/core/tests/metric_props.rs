use mambaad_core::metrics::oracle::{
    aupro_exhaustive, auroc_pairs, average_precision_thresholds, count_regions, f1_max_thresholds,
};
use mambaad_core::metrics::{aupro, auroc, average_precision, connected_components, f1_max, mad, LabeledScores};
use mambaad_core::{BinaryMask, Tensor};
use proptest::prelude::*;

/// Scores on a coarse grid so ties are common.
fn labeled(max_len: usize) -> impl Strategy<Value = (Vec<f64>, Vec<bool>)> {
    prop::collection::vec((0u8..12, any::<bool>()), 2..=max_len)
        .prop_map(|v| v.into_iter().map(|(s, l)| (s as f64 / 11.0, l)).unzip())
        .prop_filter("both classes", |(_, l): &(Vec<f64>, Vec<bool>)| l.iter().any(|&x| x) && l.iter().any(|&x| !x))
}

fn mask_and_map(max_side: usize) -> impl Strategy<Value = (BinaryMask, Tensor)> {
    (2..=max_side, 2..=max_side).prop_flat_map(|(h, w)| {
        (
            prop::collection::vec(prop::bool::weighted(0.25), h * w),
            prop::collection::vec(0u8..16, h * w),
        )
            .prop_map(move |(bits, q)| {
                let mask = BinaryMask::new(h, w, bits.into_iter().map(u8::from).collect()).unwrap();
                let map = Tensor::new(vec![h, w], q.into_iter().map(|v| v as f32 / 15.0).collect()).unwrap();
                (mask, map)
            })
    })
}

fn has_both(masks: &[BinaryMask]) -> bool {
    let pos: usize = masks.iter().map(|m| m.count_positive()).sum();
    let total: usize = masks.iter().map(|m| m.bits().len()).sum();
    pos > 0 && pos < total
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn curve_metrics_match_oracles((s, l) in labeled(200)) {
        let d = LabeledScores::new(s.clone(), l.clone()).unwrap();
        prop_assert!((auroc(&d).unwrap() - auroc_pairs(&s, &l)).abs() <= 1e-12);
        prop_assert!((average_precision(&d).unwrap() - average_precision_thresholds(&s, &l)).abs() <= 1e-9);
        prop_assert!((f1_max(&d).unwrap() - f1_max_thresholds(&s, &l)).abs() <= 1e-9);
    }

    #[test]
    fn curve_metrics_invariant_under_monotone_maps((s, l) in labeled(100)) {
        let d = LabeledScores::new(s.clone(), l.clone()).unwrap();
        let t = LabeledScores::new(s.iter().map(|v| (3.0 * v).exp() - 7.0).collect(), l).unwrap();
        prop_assert_eq!(auroc(&d).unwrap(), auroc(&t).unwrap());
        prop_assert_eq!(average_precision(&d).unwrap(), average_precision(&t).unwrap());
        prop_assert_eq!(f1_max(&d).unwrap(), f1_max(&t).unwrap());
    }

    #[test]
    fn components_partition_positives((m, _) in mask_and_map(12)) {
        let set = connected_components(&m);
        let mut all = set.regions().concat();
        let n = all.len();
        all.sort_unstable();
        all.dedup();
        prop_assert_eq!(all.len(), n);
        prop_assert_eq!(n, m.count_positive());
        prop_assert_eq!(set.len(), count_regions(&m));
    }

    #[test]
    fn aupro_matches_exhaustive(samples in prop::collection::vec(mask_and_map(16), 1..=3), limit in 0.05f64..=1.0) {
        let (masks, maps): (Vec<_>, Vec<_>) = samples.into_iter().unzip();
        prop_assume!(has_both(&masks));
        let a = aupro(&maps, &masks, limit).unwrap();
        let b = aupro_exhaustive(&maps, &masks, limit).unwrap();
        prop_assert!((a - b).abs() <= 1e-9, "{} vs {}", a, b);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&a));
    }

    #[test]
    fn aupro_invariant_under_sample_order(samples in prop::collection::vec(mask_and_map(8), 2..=4)) {
        let (masks, maps): (Vec<_>, Vec<_>) = samples.into_iter().unzip();
        prop_assume!(has_both(&masks));
        let (mut rm, mut rp) = (masks.clone(), maps.clone());
        rm.reverse();
        rp.reverse();
        let a = aupro(&maps, &masks, 0.3).unwrap();
        let b = aupro(&rp, &rm, 0.3).unwrap();
        prop_assert!((a - b).abs() <= 1e-12);
    }

    #[test]
    fn aupro_invariant_under_monotone_maps((m, map) in mask_and_map(10)) {
        prop_assume!(has_both(std::slice::from_ref(&m)));
        let t = Tensor::new(map.shape().to_vec(), map.data().iter().map(|v| 2.0 * v + 1.0).collect()).unwrap();
        let a = aupro(&[map], &[m.clone()], 0.3).unwrap();
        let b = aupro(&[t], &[m], 0.3).unwrap();
        prop_assert!((a - b).abs() <= 1e-12);
    }

    #[test]
    fn mad_is_monotone(v in prop::array::uniform7(0.0f64..=1.0), i in 0usize..7, bump in 0.0f64..=1.0) {
        let split = |v: [f64; 7]| ([v[0], v[1], v[2]], [v[3], v[4], v[5], v[6]]);
        let (a, b) = split(v);
        let base = mad(a, b).unwrap();
        let mut w = v;
        w[i] = (w[i] + bump).min(1.0);
        let (a, b) = split(w);
        prop_assert!(mad(a, b).unwrap() >= base);
    }
}

#[test]
fn mad_of_ones() {
    assert_eq!(mad([1.0; 3], [1.0; 4]).unwrap(), 1.0);
}
