use purcellkit::dynamics::{
    coupled_lifetime, sample_arrival_times, simulate_histogram, Contamination, HistogramSimulation,
};
use purcellkit::fit::{fit_lifetime, LifetimeModel};
use purcellkit::model::{CavityMode, DecayModel, EmitterTransition, RingGeometry};
use purcellkit::purcell::{
    enhanced_branching, f_cav, lorentzian_detuning, purcell_factor, purcell_from_lifetimes,
};
use proptest::prelude::*;

fn sim(tau: f64, n: u64) -> HistogramSimulation<f64> {
    HistogramSimulation {
        true_lifetime_ns: tau,
        n_photons: n,
        bin_width_ns: 0.2,
        repetition_rate_mhz: 4.75,
        contamination: Contamination::none(),
    }
}

/// Maximum-likelihood lifetime of an exponential folded into [0, period):
/// the root of τ - period·q/(1-q) = mean, q = exp(-period/τ), by bisection.
fn folded_exponential_mle(times: &[f64], period: f64) -> f64 {
    let mean = times.iter().sum::<f64>() / times.len() as f64;
    let model = |tau: f64| {
        let q = (-period / tau).exp();
        tau - period * q / (1.0 - q)
    };
    let (mut lo, mut hi) = (1e-3, 1e4);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if model(mid) < mean {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn arrival_times_match_folded_exponential_mle() {
    let s = sim(11.1, 1_000_000);
    let period = 1e3 / 4.75;
    let times = sample_arrival_times(&s, 7).unwrap();
    assert!(times.iter().all(|&t| (0.0..period).contains(&t)));
    let tau = folded_exponential_mle(&times, period);
    assert!(((tau - 11.1) / 11.1).abs() < 0.01, "MLE {tau}");
}

#[test]
fn binned_counts_follow_expected_occupancy() {
    let s = sim(11.1, 200_000);
    let h = simulate_histogram(&s, 3).unwrap();
    let period = 1e3 / 4.75;
    let norm = 1.0 - (-period / 11.1f64).exp();
    let n = s.n_photons as f64;
    for (i, &c) in h.counts.iter().enumerate().take(100) {
        let (a, b) = (h.bin_edges_ns[i], h.bin_edges_ns[i + 1]);
        let p = ((-a / 11.1f64).exp() - (-b / 11.1f64).exp()) / norm;
        let expect = n * p;
        let z = (c as f64 - expect) / expect.sqrt();
        assert!(z.abs() < 5.0, "bin {i}: {c} vs {expect}");
    }
}

#[test]
fn simulated_histogram_fits_back_over_seeds() {
    let s = HistogramSimulation {
        contamination: Contamination { amplitude_fraction: 0.3, tau_ns: 1.0 },
        ..sim(11.1, 100_000)
    };
    for seed in 0..20 {
        let h = simulate_histogram(&s, seed).unwrap();
        let r = fit_lifetime(&h, 3.0, LifetimeModel::SingleExp).unwrap();
        let tau = r.get("tau_ns");
        assert!(((tau - 11.1) / 11.1).abs() <= 0.03, "seed {seed}: {tau}");
    }
}

#[test]
fn same_seed_same_histogram() {
    let s = sim(9.0, 50_000);
    assert_eq!(simulate_histogram(&s, 11).unwrap(), simulate_histogram(&s, 11).unwrap());
    assert_ne!(simulate_histogram(&s, 11).unwrap().counts, simulate_histogram(&s, 12).unwrap().counts);
}

#[test]
fn json_round_trip_is_bit_exact() {
    let e = EmitterTransition::new(637.0000000000001, 11.099999999999998, 0.03).with_overlap(0.7071067811865475);
    let m = CavityMode::resonance(642.1963, 3800.0, 34.45123456789012);
    let d = DecayModel::from_transition(&e, 11.24498031496063);
    let g = RingGeometry::diamond_microring();
    assert_eq!(serde_json::from_str::<EmitterTransition<f64>>(&serde_json::to_string(&e).unwrap()).unwrap(), e);
    assert_eq!(serde_json::from_str::<CavityMode<f64>>(&serde_json::to_string(&m).unwrap()).unwrap(), m);
    assert_eq!(serde_json::from_str::<DecayModel<f64>>(&serde_json::to_string(&d).unwrap()).unwrap(), d);
    assert_eq!(serde_json::from_str::<RingGeometry<f64>>(&serde_json::to_string(&g).unwrap()).unwrap(), g);
}

proptest! {
    #[test]
    fn f_cav_grows_with_q(q in 10.0f64..1e6, k in 1.001f64..10.0, v in 0.5f64..100.0) {
        let a = f_cav(&CavityMode::resonance(637.0, q, v));
        let b = f_cav(&CavityMode::resonance(637.0, q * k, v));
        prop_assert!(b > a);
    }

    #[test]
    fn lorentzian_is_symmetric_in_relative_detuning(q in 100.0f64..1e5, x in 0.0f64..0.01) {
        let lc = 637.0;
        let m = CavityMode::resonance(lc, q, 10.0);
        let up = lorentzian_detuning(&m, lc * (1.0 + x));
        let down = lorentzian_detuning(&m, lc * (1.0 - x));
        // λc(1±x) rounds, so the relative detuning carries ~ε/x error
        prop_assert!((up - down).abs() <= 1e-9 * up.max(down));
        prop_assert!(up <= 1.0 && up > 0.0);
    }

    #[test]
    fn branching_is_monotone_and_bounded(xi in 0.001f64..0.999, f in 0.0f64..1e4, df in 0.01f64..100.0) {
        let a = enhanced_branching(xi, f);
        let b = enhanced_branching(xi, f + df);
        prop_assert!(a >= xi - 1e-15);
        prop_assert!(b >= a && b < 1.0);
    }

    #[test]
    fn lifetime_round_trip(tau0 in 1.0f64..50.0, xi in 0.005f64..0.9, f in 0.0f64..200.0) {
        let e = EmitterTransition::new(637.0, tau0, xi);
        let tau = coupled_lifetime(&e, f);
        prop_assert!(tau <= tau0);
        let back = purcell_from_lifetimes(tau0, tau, xi).unwrap();
        prop_assert!((back - f).abs() <= 1e-10 * (1.0 + f) / xi);
    }

    #[test]
    fn on_resonance_purcell_equals_f_cav(q in 100.0f64..1e5, v in 1.0f64..100.0) {
        let m = CavityMode::resonance(637.0, q, v);
        let e = EmitterTransition::new(637.0, 11.1, 0.03);
        prop_assert!((purcell_factor(&m, &e) - f_cav(&m)).abs() <= 1e-12 * f_cav(&m));
    }
}
