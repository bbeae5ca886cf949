#![allow(dead_code)]

use taylorom::{BcKind, SimConfig};

/// 10 m square, 21 nodes per side, 60 steps: small enough for every test.
pub fn small_cfg(bc: BcKind) -> SimConfig {
    let mut cfg = SimConfig::reference(bc);
    cfg.domain_extent = 10.0;
    cfg.nodes_per_side = 21;
    cfg.nt = 60;
    cfg.dt = 0.01;
    cfg.source_pos = (5.0, 5.0);
    cfg.source_freq = 5.0;
    cfg.source_delay = 0.2;
    cfg.medium.velocity = 5.0;
    cfg.perturbation.center = (6.0, 4.0);
    cfg.perturbation.radius = 2.0;
    cfg.perturbation.norm_ratio = 1.0;
    cfg.receivers.y = 7.0;
    cfg.receivers.count = 21;
    cfg.receivers.trace_point = (7.0, 7.0);
    cfg
}

pub fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}
