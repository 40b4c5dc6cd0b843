use ltrkit_core::metrics::{align, corpus_rate};
use proptest::prelude::*;

/// Plain recursive edit distance with memoization.
fn edit_distance(a: &[String], b: &[String]) -> usize {
    fn go(a: &[String], b: &[String], i: usize, j: usize, memo: &mut Vec<Vec<Option<usize>>>) -> usize {
        if let Some(v) = memo[i][j] {
            return v;
        }
        let v = if i == a.len() {
            b.len() - j
        } else if j == b.len() {
            a.len() - i
        } else if a[i] == b[j] {
            go(a, b, i + 1, j + 1, memo)
        } else {
            1 + go(a, b, i + 1, j, memo)
                .min(go(a, b, i, j + 1, memo))
                .min(go(a, b, i + 1, j + 1, memo))
        };
        memo[i][j] = Some(v);
        v
    }
    let mut memo = vec![vec![None; b.len() + 1]; a.len() + 1];
    go(a, b, 0, 0, &mut memo)
}

fn tokens(max_len: usize) -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(prop::sample::select(vec!["a", "b", "c", "d"]), 0..=max_len)
        .prop_map(|v| v.into_iter().map(String::from).collect())
}

fn nonempty(max_len: usize) -> impl Strategy<Value = Vec<String>> {
    tokens(max_len).prop_filter("non-empty", |v| !v.is_empty())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn errors_equal_edit_distance(r in nonempty(6), h in tokens(6)) {
        let rep = align(&r, &h).unwrap();
        prop_assert_eq!(rep.errors(), edit_distance(&r, &h));
        prop_assert_eq!(rep.hits + rep.substitutions + rep.deletions, r.len());
        prop_assert_eq!(rep.hits + rep.substitutions + rep.insertions, h.len());
        prop_assert_eq!(rep.confusions.len(), rep.substitutions);
    }

    #[test]
    fn self_alignment_is_clean(r in nonempty(8)) {
        let rep = align(&r, &r).unwrap();
        prop_assert_eq!(rep.errors(), 0);
        prop_assert_eq!(rep.rate, 0.0);
    }

    #[test]
    fn swap_exchanges_insertions_and_deletions(a in nonempty(6), b in nonempty(6)) {
        let ab = align(&a, &b).unwrap();
        let ba = align(&b, &a).unwrap();
        prop_assert_eq!(ab.errors(), ba.errors());
        prop_assert_eq!(ab.insertions, ba.deletions);
        prop_assert_eq!(ab.deletions, ba.insertions);
        prop_assert_eq!(ab.substitutions, ba.substitutions);
    }

    #[test]
    fn triangle_inequality(a in nonempty(6), b in nonempty(6), c in tokens(6)) {
        let ac = align(&a, &c).unwrap().errors();
        let ab = align(&a, &b).unwrap().errors();
        let bc = align(&b, &c).unwrap().errors();
        prop_assert!(ac <= ab + bc);
    }

    #[test]
    fn corpus_rate_pools(pairs in prop::collection::vec((nonempty(6), tokens(6)), 1..6)) {
        let errors: usize = pairs.iter().map(|(r, h)| edit_distance(r, h)).sum();
        let len: usize = pairs.iter().map(|(r, _)| r.len()).sum();
        prop_assert_eq!(corpus_rate(&pairs).unwrap(), errors as f64 / len as f64);
    }
}
