use lambda_forge::arith::PrimeRange;
use lambda_forge::config::RunConfig;
use lambda_forge::forms::FormContext;
use lambda_forge::levels::{
    carayol_check, enumerate_level_sets, plan_target_lambda, satisfies_case_one, Admissibility,
    CarayolCase, Existence, LevelSet,
};
use lambda_forge::residual::{classify_range, ClassifiedPrime, Verdict};
use lambda_forge::Error;

fn ctx() -> FormContext {
    RunConfig::default_config().context().unwrap()
}

fn classified(to: u64) -> Vec<ClassifiedPrime> {
    classify_range(&ctx(), PrimeRange::new(2, to).unwrap()).unwrap()
}

fn first(kind: Verdict, classes: &[ClassifiedPrime]) -> Vec<u64> {
    classes
        .iter()
        .filter(|c| c.verdict() == Some(kind))
        .map(ClassifiedPrime::ell)
        .collect()
}

#[test]
fn identity_set() {
    let sets = enumerate_level_sets(&ctx(), &[], 0, 0, 5, 20).unwrap();
    assert_eq!(sets, vec![LevelSet::identity(&ctx())]);
    assert_eq!(
        (sets[0].n_sigma, sets[0].n_f, sets[0].existence),
        (1, 11, Existence::Identity)
    );
}

#[test]
fn single_pi_prime_set_uses_the_smallest() {
    let classes = classified(5000);
    let pis = first(Verdict::PiMember, &classes);
    let sets = enumerate_level_sets(&ctx(), &classes, 1, 0, 1, 20).unwrap();
    assert_eq!(sets[0].pi_primes, vec![pis[0]]);
    assert_eq!(sets[0].n_f, 11 * pis[0]);
    assert_eq!(sets[0].predicted_lambda, 1);
}

#[test]
fn enumeration_is_lexicographic_and_lambda_ignores_omega_choice() {
    let classes = classified(5000);
    let pis = first(Verdict::PiMember, &classes);
    let omegas = first(Verdict::OmegaMember, &classes);
    let sets = enumerate_level_sets(&ctx(), &classes, 2, 1, 40, 20).unwrap();
    assert_eq!(sets.len(), 40);
    assert_eq!(sets[0].pi_primes, vec![pis[0], pis[1]]);
    assert_eq!(sets[0].omega_primes, vec![omegas[0]]);
    assert_eq!(sets[1].omega_primes, vec![omegas[1]]);
    let keys: Vec<_> = sets
        .iter()
        .map(|s| (s.pi_primes.clone(), s.omega_primes.clone()))
        .collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    for s in &sets {
        assert_eq!(s.predicted_lambda, 2);
        assert_eq!(s.n_f, 11 * s.n_sigma);
        assert_eq!(
            s.n_sigma,
            s.pi_primes.iter().chain(&s.omega_primes).product::<u64>()
        );
    }
}

#[test]
fn every_enumerated_prime_passes_case_one() {
    let ctx = ctx();
    let classes = classified(20_000);
    for set in enumerate_level_sets(&ctx, &classes, 2, 2, 25, 20).unwrap() {
        let report = carayol_check(&ctx, set.n_f, 1_000_000).unwrap();
        assert_eq!(report.status, Admissibility::Admissible);
        for prime in &report.primes {
            assert_eq!(prime.alpha, 1);
            assert!(prime.satisfied_cases.contains(&CarayolCase::One));
            assert!(satisfies_case_one(
                7,
                prime.ell,
                prime.trace_mod_p.unwrap(),
                prime.ell % 7
            ));
        }
    }
}

#[test]
fn scarcity_reports_found_count() {
    let classes = classified(50);
    let err = enumerate_level_sets(&ctx(), &classes, 3, 0, 1, 20).unwrap_err();
    match err {
        Error::Scarcity {
            needed,
            found,
            expected_rate,
            ..
        } => {
            assert_eq!((needed, found), (3, 1));
            assert!(expected_rate.contains("2/21"), "{expected_rate}");
        }
        other => panic!("unexpected {other}"),
    }
}

#[test]
fn plan_examples() {
    let ctx = ctx();
    let set = plan_target_lambda(&ctx, 3, 0, 100_000, 20).unwrap();
    assert_eq!((set.n(), set.r(), set.predicted_lambda), (3, 0, 3));

    let stable = plan_target_lambda(&ctx, 0, 2, 100_000, 20).unwrap();
    assert_eq!((stable.n(), stable.r(), stable.predicted_lambda), (0, 2, 0));

    assert!(matches!(
        plan_target_lambda(&ctx, 0, 0, 100_000, 20),
        Err(Error::InvalidArgument(_))
    ));
    assert!(matches!(
        plan_target_lambda(&ctx, 5, 0, 30, 20),
        Err(Error::Scarcity { .. })
    ));
}

#[test]
fn plan_below_lambda_g_is_rejected() {
    let cfg = RunConfig::load(concat!(env!("CARGO_MANIFEST_DIR"), "/configs/37a1.toml")).unwrap();
    let ctx = cfg.context().unwrap();
    assert!(matches!(
        plan_target_lambda(&ctx, 0, 1, 1000, 20),
        Err(Error::InvalidArgument(_))
    ));
}

#[test]
fn carayol_structural_errors() {
    let ctx = ctx();
    assert!(matches!(
        carayol_check(&ctx, 13, 1000),
        Err(Error::NotMultipleOfLevel { .. })
    ));
    assert!(matches!(
        carayol_check(&ctx, 77, 1000),
        Err(Error::InvalidArgument(_))
    ));
    assert!(matches!(
        carayol_check(&ctx, 11 * 1_000_003 * 1_000_033, 1000),
        Err(Error::Unfactorable(_))
    ));
    assert_eq!(
        carayol_check(&ctx, 11, 1000).unwrap().status,
        Admissibility::Admissible
    );
}

#[test]
fn carayol_square_of_level_prime_is_inadmissible() {
    // 11 || N_g and 11 ≢ ±1 mod 7, so no case allows raising its exponent.
    let report = carayol_check(&ctx(), 121, 1000).unwrap();
    assert_eq!(report.status, Admissibility::Inadmissible);
}
