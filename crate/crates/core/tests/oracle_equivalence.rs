mod common;

use bibcount::collab::is_international;
use bibcount::counting::{
    fractional_count, subject_group_count, whole_count, CountingMethod, FractionalMode,
};
use bibcount::rank::{average_ranks, pearson, spearman};
use common::*;
use proptest::prelude::*;

const TOL: f64 = 1e-9;

fn groups() -> [(&'static str, &'static [&'static str]); 3] {
    [
        ("phys", &["PHYS", "CHEM"]),
        ("health", &["MED", "BIO"]),
        ("cs", &["CS"]),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn whole_matches_oracle(corpus in arb_corpus(200)) {
        prop_assert_eq!(whole_count(&corpus).scores, oracle_whole(&corpus));
    }

    #[test]
    fn fractional_author_matches_oracle(corpus in arb_corpus(200)) {
        let got = fractional_count(&corpus, FractionalMode::Author).unwrap().scores;
        prop_assert!(max_diff(&got, &oracle_fractional_author(&corpus)) <= TOL);
    }

    #[test]
    fn fractional_country_matches_oracle(corpus in arb_corpus(200)) {
        let got = fractional_count(&corpus, FractionalMode::Country).unwrap().scores;
        prop_assert!(max_diff(&got, &oracle_fractional_country(&corpus)) <= TOL);
    }

    #[test]
    fn subject_groups_match_oracle(corpus in arb_corpus(200)) {
        for (name, codes) in groups() {
            let sliced = oracle_group(&corpus, codes);
            let got = subject_group_count(&corpus, name, CountingMethod::Whole).unwrap();
            prop_assert_eq!(got.records, sliced.len());
            prop_assert_eq!(got.scores, oracle_whole(&sliced));
            let got = subject_group_count(&corpus, name, CountingMethod::FractionalAuthor).unwrap();
            prop_assert!(max_diff(&got.scores, &oracle_fractional_author(&sliced)) <= TOL);
        }
    }

    #[test]
    fn international_matches_oracle(corpus in arb_corpus(200)) {
        for r in corpus.records() {
            prop_assert_eq!(is_international(r), oracle_is_international(r));
        }
    }

    #[test]
    fn spearman_matches_oracle(
        pairs in proptest::collection::vec((0u8..12, 0u8..12), 3..40)
    ) {
        let x: Vec<f64> = pairs.iter().map(|p| f64::from(p.0)).collect();
        let y: Vec<f64> = pairs.iter().map(|p| f64::from(p.1)).collect();
        prop_assert_eq!(average_ranks(&x), oracle_average_ranks(&x));
        let expected = oracle_spearman(&x, &y);
        match spearman(&x, &y) {
            Ok(v) => prop_assert!((v - expected).abs() <= TOL, "{} vs {}", v, expected),
            // Constant column: the oracle divides by zero too.
            Err(_) => prop_assert!(!expected.is_finite()),
        }
    }

    #[test]
    fn pearson_matches_oracle(
        pairs in proptest::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 3..40)
    ) {
        let x: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let y: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let v = pearson(&x, &y).unwrap();
        prop_assert!((v - oracle_pearson(&x, &y)).abs() <= TOL);
    }
}

#[test]
fn deterministic_sample_matches_oracle() {
    for corpus in sample_corpora(25, 200) {
        assert_eq!(whole_count(&corpus).scores, oracle_whole(&corpus));
        let fa = fractional_count(&corpus, FractionalMode::Author).unwrap();
        assert!(max_diff(&fa.scores, &oracle_fractional_author(&corpus)) <= TOL);
    }
}
