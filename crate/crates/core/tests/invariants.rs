use proptest::prelude::*;

use catastro::cli::{format_num, parse_num};
use catastro::exact;
use catastro::firework::{self, RadiusLaw};
use catastro::montecarlo::{self, Mechanism, ModelSpec, SimConfig, SimModel};
use catastro::oracle;
use catastro::SurvivalLaw;

fn beta_law() -> impl Strategy<Value = SurvivalLaw> {
    (0.2f64..6.0, 0.2f64..6.0).prop_map(|(a, b)| SurvivalLaw::beta(a, b).unwrap())
}

fn any_law() -> impl Strategy<Value = SurvivalLaw> {
    prop_oneof![
        (0.0f64..0.95).prop_map(|p| SurvivalLaw::degenerate(p).unwrap()),
        beta_law(),
        (0.2f64..6.0).prop_map(|a| SurvivalLaw::power(a).unwrap()),
        Just(SurvivalLaw::Uniform),
        (0.1f64..5.0).prop_map(|g| SurvivalLaw::truncated_exponential(g).unwrap()),
    ]
}

fn support() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(1u32..20, 1..4).prop_map(|w| {
        let total: u32 = w.iter().sum();
        w.iter().map(|&x| f64::from(x) / f64::from(total)).collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn moments_are_probabilities_and_decrease(law in any_law()) {
        let m: Vec<f64> = law.moments().take(40).collect();
        for (j, w) in m.windows(2).enumerate() {
            prop_assert!((0.0..=1.0).contains(&w[0]));
            prop_assert!(w[1] <= w[0] + 1e-15, "m_{} = {} < m_{} = {}", j + 2, w[1], j + 1, w[0]);
        }
        prop_assert!((law.moment(7).unwrap() - m[6]).abs() < 1e-12);
    }

    #[test]
    fn law_grammar_round_trips(law in any_law()) {
        let back: SurvivalLaw = law.to_string().parse().unwrap();
        prop_assert_eq!(back.to_string(), law.to_string());
    }

    #[test]
    fn survival_is_a_probability_and_monotone(law in beta_law(), lambda in 0.05f64..8.0, step in 0.01f64..2.0) {
        let lo = exact::ind_random_survival(lambda, &law).unwrap().to_f64();
        let hi = exact::ind_random_survival(lambda + step, &law).unwrap().to_f64();
        prop_assert!((0.0..=1.0).contains(&lo));
        prop_assert!(hi >= lo - 1e-8, "{law}: {lo} at {lambda}, {hi} at {}", lambda + step);
    }

    #[test]
    fn power_law_closed_form_matches_killed_truncation(a in 0.3f64..3.0, lambda in 0.1f64..2.5) {
        let law = SurvivalLaw::power(a).unwrap();
        let e = exact::cat_random_expected(lambda, &law).unwrap().to_f64();
        let killed = oracle::truncated_kolmogorov_tau(lambda, &law, 1, 1e-10).unwrap();
        prop_assert!(e >= 1.0);
        prop_assert!((e - killed.value).abs() < 1e-6 * e.max(1.0), "closed {e} vs killed {killed:?}");
    }

    #[test]
    fn generic_series_matches_power_closed_form(a in 0.3f64..4.0, lambda in 0.05f64..0.85) {
        let law = SurvivalLaw::power(a).unwrap();
        let closed = exact::s_nu(lambda, &law).unwrap().to_f64();
        let series = exact::s_nu_series(lambda, &law).unwrap().unwrap().value.to_f64();
        prop_assert!((closed - series).abs() < 1e-10, "{closed} vs {series}");
    }

    #[test]
    fn recovered_moments_match_killed_truncation(law in any_law(), lambda in 0.1f64..0.8, i in 1u32..5) {
        let rec = exact::cat_random_tau_recovery(lambda, &law, i).unwrap().to_f64();
        let killed = oracle::truncated_kolmogorov_tau(lambda, &law, i as usize, 1e-11).unwrap().value;
        prop_assert!((rec - killed).abs() < 1e-6 * killed, "{law} lambda={lambda} i={i}: {rec} vs {killed}");
    }

    #[test]
    fn killed_truncations_increase_with_the_level(law in any_law(), lambda in 0.1f64..4.0) {
        let mut prev = 0.0;
        for n in [2usize, 4, 8, 16, 32, 64] {
            let v = oracle::truncated_tau(lambda, &law, n, 1).unwrap()[0];
            prop_assert!(v >= prev - 1e-12 * v);
            prev = v;
        }
    }

    #[test]
    fn renewal_matches_enumeration(probs in support(), n in 1u32..8) {
        let law = RadiusLaw::finite_support(probs.clone()).unwrap();
        let u = firework::renewal_sequence(&law, n as usize).unwrap().u;
        let brute = oracle::rational_to_f64(&oracle::brute_force_firework_tail(&probs, n + 1).unwrap());
        prop_assert!((u[n as usize] - brute).abs() < 1e-12);
        for w in u.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-15);
        }
    }

    #[test]
    fn bridge_recovers_the_classical_model(lambda in 0.1f64..4.0, p in 0.0f64..0.85) {
        let alpha = RadiusLaw::geometric_lifetime(p).unwrap().effective(lambda).unwrap();
        let ef = firework::firework_expected_range(&alpha).unwrap();
        let e = firework::bridge_expected(lambda, ef.value).unwrap().to_f64();
        let c = exact::classical_extinction_time(lambda, p).unwrap().to_f64();
        prop_assert!((e - c).abs() < 1e-8 * c, "{e} vs {c}");
    }

    #[test]
    fn bridge_recovers_individual_random_survival(law in beta_law(), lambda in 0.2f64..5.0) {
        let alpha = RadiusLaw::FromSurvivalLaw(law.clone()).effective(lambda).unwrap();
        let pf = firework::firework_survival(&alpha).unwrap().to_f64();
        let bridged = firework::bridge_survival(lambda, pf).unwrap();
        let direct = exact::ind_random_survival(lambda, &law).unwrap().to_f64();
        prop_assert!((bridged - direct).abs() < 1e-6, "{law} at {lambda}: {bridged} vs {direct}");
    }

    #[test]
    fn numbers_round_trip_at_twelve_digits(x in prop::num::f64::NORMAL) {
        let back = parse_num(&format_num(x)).unwrap();
        prop_assert!((back - x).abs() <= 1e-11 * x.abs(), "{x} -> {}", format_num(x));
        prop_assert_eq!(format_num(back), format_num(x));
    }

    #[test]
    fn replicas_depend_only_on_seed_and_index(seed in any::<u64>(), replica in 0u64..1000, law in any_law()) {
        let config = SimConfig::new(
            SimModel::Population(ModelSpec { lambda: 1.3, mechanism: Mechanism::IndividualRandom(law) }),
            1,
            seed,
        )
        .with_horizon(200);
        prop_assert_eq!(montecarlo::run_replica(&config, replica), montecarlo::run_replica(&config, replica));
    }
}
