use proptest::prelude::*;
use taylorom::{load_config, BcKind, InnerKind, PodInner, SimConfig};

fn configs() -> impl Strategy<Value = SimConfig> {
    (
        (1.0f64..200.0, 2usize..400, 1e-5f64..0.1, 1usize..10_000, 0.0f64..1.0, 0.0f64..1.0),
        (prop_oneof![Just(BcKind::Dirichlet), Just(BcKind::Abc1)], 1e-12f64..1.0, 0usize..8, 1usize..9),
        (0.1f64..50.0, -1.0f64..1.0, 1e-3f64..100.0, 1usize..500, any::<u64>()),
        (0.0f64..1e-2, 1e-2f64..1.0, 1usize..400, 0.0f64..0.2, proptest::option::of(1usize..300)),
        (any::<bool>(), any::<bool>(), 1usize..4),
    )
        .prop_map(|(g, m, p, ls, flags)| {
            let mut cfg = SimConfig::reference(m.0);
            let (extent, nodes, dt, nt, fx, fy) = g;
            cfg.domain_extent = extent;
            cfg.nodes_per_side = nodes;
            cfg.dt = dt;
            cfg.nt = nt;
            cfg.source_pos = (fx * extent, fy * extent);
            cfg.epsilon = m.1;
            cfg.taylor_degree = m.2;
            cfg.snapshot_stride = m.3;
            cfg.medium.velocity = p.0;
            cfg.medium.gradient = p.1;
            cfg.perturbation.radius = p.2;
            cfg.receivers.count = p.3;
            cfg.rng_seed = p.4;
            cfg.line_search.alpha_min = ls.0;
            cfg.line_search.alpha_max = ls.0 + ls.1;
            cfg.line_search.points = ls.2;
            cfg.line_search.noise_level = ls.3;
            cfg.pod.rank = ls.4;
            cfg.inner_product = if flags.0 { InnerKind::Mass } else { InnerKind::Stiffness };
            cfg.pod.inner = if flags.1 { PodInner::Mass } else { PodInner::Euclidean };
            cfg.stiffness_fallback = flags.0 && flags.1;
            cfg.reorth_passes = flags.2;
            cfg
        })
}

proptest! {
    #[test]
    fn text_form_round_trips(cfg in configs()) {
        prop_assert_eq!(load_config(&cfg.to_text()).unwrap(), cfg);
    }
}

#[test]
fn shipped_configs_load() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "cfg") {
            let text = std::fs::read_to_string(&path).unwrap();
            load_config(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            seen += 1;
        }
    }
    assert!(seen >= 4);
}
