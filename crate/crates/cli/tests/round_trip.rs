use layerguard::{Device, Instance, LayerSchedule};
use layerguard_cli::instance_file::{parse_str, to_toml};
use proptest::prelude::*;

fn instance_strategy() -> impl Strategy<Value = Instance> {
    (1usize..=4).prop_flat_map(|layers| {
        let rates = proptest::collection::btree_set(1u32..=1000, layers)
            .prop_map(|s| s.into_iter().map(|k| k as f64 / 1000.0).collect::<Vec<_>>());
        let costs = proptest::collection::vec(0.0f64..50.0, layers);
        let alpha = 1..=layers;
        (Just(layers), rates, costs, alpha, 0.0f64..500.0, 1usize..6).prop_flat_map(
            |(layers, rates, costs, alpha, budget, n)| {
                let devices = proptest::collection::vec(
                    (0.0f64..100.0, 0.0f64..=1.0, any::<bool>(), "[a-z][a-z0-9_ -]{0,12}"),
                    n,
                )
                .prop_flat_map(move |raw| {
                    let caps: Vec<_> = raw
                        .iter()
                        .map(|(_, _, critical, _)| if *critical { alpha..=layers } else { 1..=layers })
                        .collect();
                    (Just(raw), caps)
                })
                .prop_map(|(raw, caps)| {
                    raw.into_iter()
                        .zip(caps)
                        .enumerate()
                        .map(|(i, ((w, p, critical, name), cap))| Device {
                            id: format!("d{i}"),
                            name,
                            weight: w,
                            attack_prob: p,
                            critical,
                            max_layer: cap,
                        })
                        .collect::<Vec<_>>()
                });
                let rates = rates.clone();
                let costs = costs.clone();
                devices.prop_map(move |devices| Instance {
                    schedule: LayerSchedule::from_rates_and_costs(&rates, &costs),
                    devices,
                    alpha,
                    budget,
                })
            },
        )
    })
}

proptest! {
    #[test]
    fn parse_of_serialize_is_identity(inst in instance_strategy()) {
        inst.validate().unwrap();
        let text = to_toml(&inst);
        let parsed = parse_str(&text).unwrap();
        prop_assert_eq!(parsed.single().unwrap(), inst);
    }
}
