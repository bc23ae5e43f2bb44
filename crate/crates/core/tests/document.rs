//! Document round trips: writing and re-reading a chain changes no bits.

use proptest::prelude::*;
use tripwalk::document::{load, save};
use tripwalk::exact::excursion_stats;
use tripwalk::generators::{punctured_annulus, random_chain, GridSpec};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn random_chains_round_trip(n in 3usize..14, seed in any::<u64>(), sparsity in 0.0f64..0.8) {
        let (chain, partition) = random_chain(n, seed, sparsity, (0.4, 0.3, 0.3)).unwrap();
        let text = save(&chain, &partition);
        let (again, part_again) = load(&text).unwrap();
        prop_assert_eq!(again.to_dense(), chain.to_dense());
        prop_assert_eq!(&part_again, &partition);
        prop_assert_eq!(save(&again, &part_again), text);
    }
}

#[test]
fn grid_round_trip_reproduces_statistics() {
    let mut spec = GridSpec::new(9, 9, 1, 3);
    spec.laziness = 0.3;
    let (chain, partition) = punctured_annulus(&spec, 2).unwrap();
    let (again, part_again) = load(&save(&chain, &partition)).unwrap();
    assert_eq!(again.labels(), chain.labels());
    assert_eq!(
        excursion_stats(&chain, &partition).unwrap(),
        excursion_stats(&again, &part_again).unwrap()
    );
}

#[test]
fn thirds_survive_renormalization() {
    let text = r#"{"states":["a","b","c"],"transitions":[[0.3333333333333333,0.3333333333333333,0.3333333333333333],[0,0,1],[0,0,1]],"partition":{"A":["a"],"B":["b"],"C":["c"]}}"#;
    let (chain, partition) = load(text).unwrap();
    let (again, _) = load(&save(&chain, &partition)).unwrap();
    assert_eq!(again.to_dense(), chain.to_dense());
}
