use perpetuity::engine::{estimate_event, TiltSchedule};
use perpetuity::estimate::Accumulator;
use perpetuity::oracle::{exact_event_prob, exact_tau_pmf, DiscreteInstance};
use perpetuity::rng::batch_lengths;
use perpetuity::{cgf, merge, ALawSpec, BLawSpec, InnovationLaw};
use proptest::prelude::*;

fn instance() -> impl Strategy<Value = DiscreteInstance> {
    (0.1f64..0.95, 0.05f64..0.95, 1.05f64..3.0, -1.0f64..2.0, 0.05f64..0.95, -1.0f64..2.0, 1usize..9, 0.1f64..6.0)
        .prop_map(|(a1, p, a2, b1, q, b2, n_max, u)| DiscreteInstance {
            a_atoms: vec![(a1, p), (a2, 1.0 - p)],
            b_atoms: vec![(b1, q), (b2, 1.0 - q)],
            n_max,
            u,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn oracle_mass_is_conserved(inst in instance()) {
        let pmf = exact_tau_pmf(&inst).unwrap();
        let total: f64 = pmf.pmf.iter().sum::<f64>() + pmf.censored_mass;
        prop_assert!((total - 1.0).abs() < 1e-12, "total {total}");
        prop_assert!(pmf.pmf.iter().all(|&p| p >= 0.0));
    }

    #[test]
    fn oracle_pruning_matches_full_enumeration(inst in instance()) {
        let pmf = exact_tau_pmf(&inst).unwrap();
        for k in 1..=inst.n_max {
            let full = exact_event_prob(&inst, k).unwrap();
            prop_assert!((pmf.pmf[k] - full).abs() < 1e-12);
        }
    }

    #[test]
    fn passage_cdf_decreases_in_level(inst in instance(), du in 0.0f64..3.0) {
        let higher = DiscreteInstance { u: inst.u + du, ..inst.clone() };
        let (lo, hi) = (exact_tau_pmf(&inst).unwrap(), exact_tau_pmf(&higher).unwrap());
        let (mut c_lo, mut c_hi) = (0.0, 0.0);
        for k in 1..=inst.n_max {
            c_lo += lo.pmf[k];
            c_hi += hi.pmf[k];
            prop_assert!(c_hi <= c_lo + 1e-12);
        }
    }

    #[test]
    fn legendre_duality_on_lognormal(mu in -3.0f64..1.0, sigma in 0.2f64..2.0, s in 0.1f64..4.0) {
        let law = InnovationLaw { a: ALawSpec::LogNormal { mu, sigma }, b: BLawSpec::Const { value: 1.0 } };
        let c = law.a.cumulants(s).unwrap();
        let dual = cgf::legendre(&law, c.first).unwrap();
        prop_assert!((dual - (s * c.first - c.value)).abs() < 1e-8 * (1.0 + dual.abs()));
        prop_assert!((cgf::solve_alpha(&law, c.first).unwrap() - s).abs() < 1e-8);
    }

    #[test]
    fn merge_matches_pooled_accumulator(ws in prop::collection::vec(0.0f64..10.0, 2..200), cut in 1usize..199) {
        let cut = cut.min(ws.len() - 1);
        let rec = |xs: &[f64]| {
            let mut a = Accumulator::default();
            xs.iter().for_each(|&w| a.push(w));
            a.into_record("t")
        };
        let merged = merge(&[rec(&ws[..cut]), rec(&ws[cut..])]).unwrap();
        let whole = rec(&ws);
        prop_assert_eq!(merged.n_samples, whole.n_samples);
        prop_assert!((merged.value - whole.value).abs() <= 1e-12 * (1.0 + whole.value));
        prop_assert!((merged.stderr - whole.stderr).abs() <= 1e-9 * (1.0 + whole.stderr));
    }

    #[test]
    fn batches_cover_samples(samples in 0usize..50_000) {
        prop_assert_eq!(batch_lengths(samples).iter().sum::<usize>(), samples);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn estimates_are_seed_deterministic_probabilities(seed in any::<u64>(), s in 0.5f64..2.5, k in 1u64..6) {
        let law = InnovationLaw { a: ALawSpec::LogNormal { mu: -1.0, sigma: std::f64::consts::SQRT_2 }, b: BLawSpec::Const { value: 1.0 } };
        let schedule = TiltSchedule::ConstantTilt { s, horizon: k };
        let a = estimate_event(&law, schedule, 20.0, k, 3000, seed).unwrap();
        let b = estimate_event(&law, schedule, 20.0, k, 3000, seed).unwrap();
        prop_assert_eq!(&a, &b);
        let naive = estimate_event(&law, TiltSchedule::Untilted, 20.0, k, 3000, seed).unwrap();
        prop_assert!((0.0..=1.0).contains(&naive.value));
        prop_assert!(a.ess <= a.n_samples as f64 + 1e-9);
    }
}
