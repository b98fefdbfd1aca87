use needsim::needs::{all_weights, auto_delta, weight, NeedHierarchy, NeedId, NeedEvent, NeedMap, SatisfactionState, WeightParams, S_MAX};
use proptest::prelude::*;

fn sats() -> impl Strategy<Value = NeedMap<f64>> {
    prop::array::uniform10(0.0..=S_MAX).prop_map(|a| NeedMap::from_fn(|n| a[n.index()]))
}

fn coeffs() -> impl Strategy<Value = WeightParams> {
    (-2.0..-0.01f64, -1.0..-0.001f64, 0.001..1.0f64, 0.0..20.0f64)
        .prop_map(|(a, b, g, d)| WeightParams::uniform(a, b, g, [d, 0.0, 0.0, 0.0]))
}

#[test]
fn worked_examples() {
    let h = NeedHierarchy::default();
    let p = WeightParams::uniform(-1.0, -0.2, 0.1, [10.0; 4]);
    let mut s = NeedMap::splat(S_MAX);
    s[NeedId::Energy] = 3.0;
    assert!((weight(&p, &h, &s, NeedId::Energy) - 7.0).abs() < 1e-9);
    s[NeedId::Energy] = 10.0;
    assert!(weight(&p, &h, &s, NeedId::Energy).abs() < 1e-9);
    for (n, v) in [(NeedId::PersonalSafety, 4.0), (NeedId::Sleep, 6.0), (NeedId::Energy, 5.0), (NeedId::Water, 7.0), (NeedId::Breed, 8.0)] {
        s[n] = v;
    }
    assert!((weight(&p, &h, &s, NeedId::PersonalSafety) - 5.0).abs() < 1e-9);
}

proptest! {
    #[test]
    fn level_one_is_ten_minus_sat(s in sats()) {
        let w = all_weights(&WeightParams::default(), &NeedHierarchy::default(), &s, 0).w;
        for n in NeedId::at_level(1) {
            prop_assert_eq!(w[n], 10.0 - s[n]);
        }
    }

    #[test]
    fn derived_corrections_keep_weights_nonnegative(p in coeffs(), s in sats()) {
        let h = NeedHierarchy::default();
        let p = p.with_auto_delta(&h);
        for n in NeedId::ALL.into_iter().filter(|n| n.level() > 1) {
            prop_assert!(weight(&p, &h, &s, n) >= -1e-9, "{n}: {}", weight(&p, &h, &s, n));
        }
        // And no smaller correction would do: some corner reaches zero.
        for level in 2..=4u8 {
            prop_assert!(auto_delta(&p, &h, level) >= 0.0);
        }
    }

    #[test]
    fn satisfaction_stays_clamped(start in sats(), events in prop::collection::vec((0usize..10, -20.0..20.0f64, 0.0..80.0f64), 0..40)) {
        let mut st = SatisfactionState { sat: start, ..Default::default() };
        for (i, v, d) in events {
            st.set(NeedId::ALL[i], v);
            st.decay_tick();
            st.apply_event(NeedEvent::PredatorProximity { distance: d, radius: 23.0 }).unwrap();
            st.apply_event(NeedEvent::Recover(NeedId::Friendship)).unwrap();
            for n in NeedId::ALL {
                prop_assert!((0.0..=S_MAX).contains(&st.get(n)));
            }
        }
    }
}
