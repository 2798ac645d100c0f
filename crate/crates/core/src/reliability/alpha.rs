use std::collections::{BTreeMap, BTreeSet};

use super::ReliabilityError;
use crate::bws::Judgment;
use crate::scalar::Scalar;

/// Nominal Krippendorff's alpha over a units × annotators table with missing cells.
///
/// Units with fewer than two values are not pairable and are skipped.
pub fn krippendorff_alpha<T: Scalar, L: Ord + Clone>(labels: &[Vec<Option<L>>]) -> Result<T, ReliabilityError> {
    // coincidence matrix over the observed value space
    let mut coincidence: BTreeMap<(L, L), T> = BTreeMap::new();
    let mut pairable = 0usize;
    for unit in labels {
        let values: Vec<&L> = unit.iter().flatten().collect();
        let m = values.len();
        if m < 2 {
            continue;
        }
        pairable += 1;
        let w = T::one() / T::of_usize(m - 1);
        for (i, a) in values.iter().enumerate() {
            for (j, b) in values.iter().enumerate() {
                if i != j {
                    *coincidence.entry(((*a).clone(), (*b).clone())).or_default() += w;
                }
            }
        }
    }
    if pairable == 0 {
        return Err(ReliabilityError::NoOverlap);
    }
    let mut marginals: BTreeMap<&L, T> = BTreeMap::new();
    let mut observed_disagreement = T::zero();
    for ((c, k), &o) in &coincidence {
        *marginals.entry(c).or_default() += o;
        if c != k {
            observed_disagreement += o;
        }
    }
    if observed_disagreement == T::zero() {
        return Ok(T::one());
    }
    let n: T = marginals.values().copied().sum();
    let total_sq: T = marginals.values().map(|&v| v * v).sum();
    // Σ_{c≠k} n_c n_k = n² − Σ n_c²
    let expected_disagreement = n * n - total_sq;
    Ok(T::one() - (n - T::one()) * observed_disagreement / expected_disagreement)
}

/// Two nominal units per tuple (best pick, worst pick); one column per annotator.
pub fn bws_alpha_units(judgments: &[Judgment]) -> Vec<Vec<Option<String>>> {
    let annotators: Vec<&str> = judgments
        .iter()
        .map(|j| j.annotator_id.as_str())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut by_tuple: BTreeMap<&str, Vec<&Judgment>> = BTreeMap::new();
    for j in judgments {
        by_tuple.entry(j.tuple_id.as_str()).or_default().push(j);
    }
    let mut units = Vec::with_capacity(by_tuple.len() * 2);
    for js in by_tuple.values() {
        let mut best = vec![None; annotators.len()];
        let mut worst = vec![None; annotators.len()];
        for j in js {
            let col = annotators.binary_search(&j.annotator_id.as_str()).expect("collected");
            best[col] = Some(j.best.clone());
            worst[col] = Some(j.worst.clone());
        }
        units.push(best);
        units.push(worst);
    }
    units
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn s(v: &str) -> Option<String> {
        Some(v.to_string())
    }

    #[test]
    fn perfect_agreement_is_one() {
        let units: Vec<Vec<Option<u8>>> = (0..10).map(|i| vec![Some(i % 3), Some(i % 3)]).collect();
        assert_eq!(krippendorff_alpha::<f64, _>(&units).unwrap(), 1.0);
    }

    #[test]
    fn hand_computed_fixture() {
        // unit      A  B  C
        // u1        a  a  -   o_aa += 2
        // u2        a  b  -   o_ab += 1, o_ba += 1
        // u3        b  b  b   o_bb += 6 * 1/2 = 3
        // u4        a  b  b   o_ab += 1, o_ba += 1, o_bb += 1
        // n_a = 4, n_b = 6, n = 10
        // D_o/D_e = (n-1) * (o_ab + o_ba) / (2 n_a n_b) = 9 * 4 / 48 = 0.75
        let units = vec![
            vec![s("a"), s("a"), None],
            vec![s("a"), s("b"), None],
            vec![s("b"), s("b"), s("b")],
            vec![s("a"), s("b"), s("b")],
        ];
        let a: f64 = krippendorff_alpha(&units).unwrap();
        assert!((a - 0.25).abs() < 1e-12);
    }

    #[test]
    fn uniform_random_labels_near_zero() {
        let mut r = crate::stats::rng(11);
        let units: Vec<Vec<Option<u8>>> = (0..10_000)
            .map(|_| vec![Some(r.random_range(0..4)), Some(r.random_range(0..4))])
            .collect();
        let a: f64 = krippendorff_alpha(&units).unwrap();
        assert!(a.abs() <= 0.05, "{a}");
    }

    #[test]
    fn no_overlap() {
        let units = vec![vec![s("a"), None], vec![None, s("b")]];
        assert!(matches!(
            krippendorff_alpha::<f64, _>(&units),
            Err(ReliabilityError::NoOverlap)
        ));
    }

    #[test]
    fn bws_units_two_per_tuple() {
        let j = |t: &str, b: &str, w: &str, a: &str| Judgment {
            tuple_id: t.into(),
            best: b.into(),
            worst: w.into(),
            annotator_id: a.into(),
            timestamp: None,
        };
        let units = bws_alpha_units(&[j("t1", "a", "d", "x"), j("t1", "a", "c", "y"), j("t2", "e", "f", "x")]);
        assert_eq!(units.len(), 4);
        assert_eq!(units[0], vec![s("a"), s("a")]);
        assert_eq!(units[1], vec![s("d"), s("c")]);
        assert_eq!(units[2], vec![s("e"), None]);
    }

    proptest! {
        #[test]
        fn relabeling_invariance(table in prop::collection::vec(prop::collection::vec(prop::option::of(0u8..4), 3), 2..30)) {
            let relabeled: Vec<Vec<Option<u8>>> = table
                .iter()
                .map(|u| u.iter().map(|v| v.map(|x| (x * 3 + 1) % 4)).collect())
                .collect();
            match (krippendorff_alpha::<f64, _>(&table), krippendorff_alpha::<f64, _>(&relabeled)) {
                (Ok(a), Ok(b)) => prop_assert!((a - b).abs() < 1e-12 || (a.is_nan() && b.is_nan())),
                (Err(_), Err(_)) => {}
                _ => prop_assert!(false),
            }
        }

        #[test]
        fn alpha_at_most_one(table in prop::collection::vec(prop::collection::vec(prop::option::of(0u8..3), 2), 1..30)) {
            if let Ok(a) = krippendorff_alpha::<f64, _>(&table) {
                prop_assert!(a <= 1.0 + 1e-12 || a.is_nan());
            }
        }
    }
}
