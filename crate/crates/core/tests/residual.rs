use lambda_forge::arith::{is_prime, PrimeRange};
use lambda_forge::config::RunConfig;
use lambda_forge::forms::{CertifiedInputs, CoefficientBackend, CoefficientTable, FormContext};
use lambda_forge::residual::{
    classify, classify_range, classify_range_sequential, ClassifiedPrime, Verdict,
};
use proptest::prelude::*;

fn small_primes(lo: u64, hi: u64) -> Vec<u64> {
    (lo..hi).filter(|&n| is_prime(n)).collect()
}

#[test]
fn classification_is_reproducible_and_thread_independent() {
    let ctx = RunConfig::default_config().context().unwrap();
    let range = PrimeRange::new(2, 100_000).unwrap();
    let parallel = classify_range(&ctx, range).unwrap();
    let sequential = classify_range_sequential(&ctx, range).unwrap();
    assert_eq!(parallel, sequential);
    assert!(parallel.windows(2).all(|w| w[0].ell() < w[1].ell()));
    let count = |v: Verdict| parallel.iter().filter(|c| c.verdict() == Some(v)).count();
    assert!(count(Verdict::PiMember) > 0 && count(Verdict::OmegaMember) > 0);
}

#[test]
fn primes_dividing_level_or_p_are_skipped() {
    let ctx = RunConfig::default_config().context().unwrap();
    let out = classify_range(&ctx, PrimeRange::new(7, 11).unwrap()).unwrap();
    assert_eq!(
        out,
        vec![
            ClassifiedPrime::Skipped { ell: 7 },
            ClassifiedPrime::Skipped { ell: 11 }
        ]
    );
}

#[test]
fn table_gap_names_the_prime() {
    let table = CoefficientTable::from_rows(11, [(2, -2), (3, -1), (7, -2), (13, 4)]).unwrap();
    let inputs = CertifiedInputs {
        p: 7,
        lambda_g: 0,
        mu_zero: true,
        surjective_mod_p: true,
        optimal_level_asserted: true,
    };
    let ctx = FormContext::new(11, inputs, CoefficientBackend::Table(table)).unwrap();
    let err = classify_range(&ctx, PrimeRange::new(2, 13).unwrap()).unwrap_err();
    assert!(
        matches!(err, lambda_forge::Error::Coverage { ell: 5 }),
        "{err}"
    );
}

proptest! {
    #[test]
    fn verdicts_follow_the_definitions(
        p in prop::sample::select(vec![5u64, 7, 11, 13, 17]),
        ell in prop::sample::select(small_primes(2, 2000)),
        a in -90i64..=90,
    ) {
        prop_assume!(ell != p);
        let level = 11 * 23;
        prop_assume!(level % ell != 0);
        let c = classify(p, level, ell, a).unwrap();
        prop_assert_eq!(c.det_mod_p, ell % p);
        let t = a.rem_euclid(p as i64) as u64;
        let l = ell % p;
        let not_pm1 = l != 1 && l != p - 1;
        let pi = not_pm1 && t == (1 + l) % p
            && lambda_forge::arith::pow_mod(ell as i64, p - 1, p * p).unwrap() != 1;
        let omega = not_pm1 && t == (p - (1 + l) % p) % p;
        prop_assert_eq!(c.verdict == Verdict::PiMember, pi);
        prop_assert_eq!(c.verdict == Verdict::OmegaMember, omega);
        prop_assert!(!(pi && omega));
        prop_assert_eq!(classify(p, level, ell, a).unwrap(), c);
    }
}
