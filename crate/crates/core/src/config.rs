//! Flat `key = value` run configuration.
//!
//! Lines are `key = value`; everything after `#` is a comment. Unknown keys
//! are rejected so that typos do not silently fall back to defaults. The
//! full key list with units is in [`KEY_DOC`].

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Documented key list, also used as the header of serialized configs.
pub const KEY_DOC: &str = "\
# domain_extent     m      side of the square domain
# nodes_per_side    -      grid nodes per side (>= 2)
# dt                s      time step
# nt                -      number of time steps
# source_x/y        m      point source position
# source_freq       Hz     Ricker central frequency
# source_delay      s      Ricker delay (default 1/source_freq)
# bc_kind           -      dirichlet | abc1
# epsilon           -      Gram-Schmidt truncation tolerance (default 0.01)
# taylor_degree     -      highest Frechet derivative order L (default 0)
# inner_product     -      stiffness | mass (default stiffness)
# stiffness_fallback -     true: degenerate stiffness norms switch to mass
# snapshot_stride   -      keep every k-th step as a snapshot candidate
# reorth_passes     -      extra projection sweeps on accepted vectors
# rng_seed          -      seed for the noise generator
# velocity          m/s    background velocity at y = 0
# velocity_gradient 1/s    dc/dy of the background
# lens_x/y/radius   m      Gaussian velocity lens (off when lens_amplitude = 0)
# lens_amplitude    m/s    lens peak velocity change
# perturb_x/y/radius m     Gaussian bump of the perturbation direction
# perturb_ratio     -      target |dtheta|_2 / |theta0|_2
# receiver_x0/x1/y  m      receiver line
# receiver_count    -      receivers on the line
# trace_x/y         m      single trace location
# alpha_true        -      step used to synthesise observations
# alpha_min/max     -      line-search interval
# alpha_points      -      line-search grid size
# noise_level       -      noise std as a fraction of trace RMS
# pod_rank          -      POD rank (0: singular-value ratio rule)
# pod_inner         -      euclidean | mass
# pod_stride        -      snapshot stride for the materialised POD matrix
";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcKind {
    Dirichlet,
    Abc1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnerKind {
    Stiffness,
    Mass,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PodInner {
    Euclidean,
    Mass,
}

impl FromStr for BcKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "dirichlet" => Ok(BcKind::Dirichlet),
            "abc1" | "abc" => Ok(BcKind::Abc1),
            other => Err(format!("unknown boundary kind `{other}`")),
        }
    }
}

impl FromStr for InnerKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "stiffness" => Ok(InnerKind::Stiffness),
            "mass" => Ok(InnerKind::Mass),
            other => Err(format!("unknown inner product `{other}`")),
        }
    }
}

impl FromStr for PodInner {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "euclidean" => Ok(PodInner::Euclidean),
            "mass" => Ok(PodInner::Mass),
            other => Err(format!("unknown POD inner product `{other}`")),
        }
    }
}

impl BcKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BcKind::Dirichlet => "dirichlet",
            BcKind::Abc1 => "abc1",
        }
    }
}

impl InnerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            InnerKind::Stiffness => "stiffness",
            InnerKind::Mass => "mass",
        }
    }
}

impl PodInner {
    pub fn as_str(self) -> &'static str {
        match self {
            PodInner::Euclidean => "euclidean",
            PodInner::Mass => "mass",
        }
    }
}

/// Background medium: linear vertical gradient plus an optional Gaussian lens.
#[derive(Debug, Clone, PartialEq)]
pub struct MediumSpec {
    pub velocity: f64,
    pub gradient: f64,
    pub lens: Option<Lens>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lens {
    pub center: (f64, f64),
    pub radius: f64,
    pub amplitude: f64,
}

/// Smooth bump describing the perturbation direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpSpec {
    pub center: (f64, f64),
    pub radius: f64,
    /// Target `‖δθ‖₂ / ‖θ₀‖₂` after normalisation.
    pub norm_ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReceiverSpec {
    pub x0: f64,
    pub x1: f64,
    pub y: f64,
    pub count: usize,
    pub trace_point: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearchSpec {
    pub alpha_true: f64,
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub points: usize,
    pub noise_level: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PodSpec {
    pub rank: Option<usize>,
    pub inner: PodInner,
    pub stride: usize,
}

/// Validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub domain_extent: f64,
    pub nodes_per_side: usize,
    pub dt: f64,
    pub nt: usize,
    pub source_pos: (f64, f64),
    pub source_freq: f64,
    pub source_delay: f64,
    pub bc_kind: BcKind,
    pub epsilon: f64,
    pub taylor_degree: usize,
    pub inner_product: InnerKind,
    pub stiffness_fallback: bool,
    pub snapshot_stride: usize,
    pub reorth_passes: usize,
    pub rng_seed: u64,
    pub medium: MediumSpec,
    pub perturbation: BumpSpec,
    pub receivers: ReceiverSpec,
    pub line_search: LineSearchSpec,
    pub pod: PodSpec,
}

impl SimConfig {
    /// Homogeneous `c = 15` setup on a 50 m square with 201 nodes per side,
    /// 4000 steps of 1 ms, Ricker at 2.5 Hz from (25, 5).
    pub fn reference(bc_kind: BcKind) -> Self {
        SimConfig {
            domain_extent: 50.0,
            nodes_per_side: 201,
            dt: 1e-3,
            nt: 4000,
            source_pos: (25.0, 5.0),
            source_freq: 2.5,
            source_delay: 0.4,
            bc_kind,
            epsilon: 0.01,
            taylor_degree: 0,
            inner_product: InnerKind::Stiffness,
            stiffness_fallback: false,
            snapshot_stride: 1,
            reorth_passes: 1,
            rng_seed: 0,
            medium: MediumSpec {
                velocity: 15.0,
                gradient: 0.0,
                lens: None,
            },
            perturbation: default_bump(),
            receivers: ReceiverSpec {
                x0: 0.0,
                x1: 50.0,
                y: 15.42,
                count: 202,
                trace_point: (39.05, 15.42),
            },
            line_search: LineSearchSpec {
                alpha_true: 2.12e-3,
                alpha_min: 0.0,
                alpha_max: 4e-3,
                points: 201,
                noise_level: 0.0,
            },
            pod: PodSpec {
                rank: None,
                inner: PodInner::Euclidean,
                stride: 4,
            },
        }
    }

    pub fn grid_spacing(&self) -> f64 {
        self.domain_extent / (self.nodes_per_side - 1) as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes_per_side < 2 {
            return Err(Error::invalid("nodes_per_side", "nodes_per_side must be >= 2"));
        }
        positive("domain_extent", self.domain_extent)?;
        positive("dt", self.dt)?;
        if self.nt < 1 {
            return Err(Error::invalid("nt", "nt must be >= 1"));
        }
        positive("source_freq", self.source_freq)?;
        positive("epsilon", self.epsilon)?;
        if self.snapshot_stride < 1 {
            return Err(Error::invalid("snapshot_stride", "snapshot_stride must be >= 1"));
        }
        let (sx, sy) = self.source_pos;
        let inside = |v: f64| (0.0..=self.domain_extent).contains(&v);
        if !inside(sx) || !inside(sy) {
            return Err(Error::invalid(
                "source_x/source_y",
                format!("source ({sx}, {sy}) lies outside the domain"),
            ));
        }
        positive("velocity", self.medium.velocity)?;
        if let Some(lens) = self.medium.lens {
            positive("lens_radius", lens.radius)?;
        }
        positive("perturb_radius", self.perturbation.radius)?;
        positive("perturb_ratio", self.perturbation.norm_ratio)?;
        if self.receivers.count < 1 {
            return Err(Error::invalid("receiver_count", "receiver_count must be >= 1"));
        }
        let ls = &self.line_search;
        if ls.alpha_min < 0.0 {
            return Err(Error::invalid("alpha_min", "negative alpha is excluded"));
        }
        if ls.alpha_max < ls.alpha_min {
            return Err(Error::invalid("alpha_max", "alpha_max < alpha_min"));
        }
        if ls.points < 1 {
            return Err(Error::invalid("alpha_points", "alpha_points must be >= 1"));
        }
        if ls.noise_level < 0.0 {
            return Err(Error::invalid("noise_level", "noise level must be >= 0"));
        }
        if self.pod.stride < 1 {
            return Err(Error::invalid("pod_stride", "pod_stride must be >= 1"));
        }
        Ok(())
    }

    /// Serialize to the flat text format. `load_config(cfg.to_text())`
    /// reproduces `cfg` exactly.
    pub fn to_text(&self) -> String {
        let mut s = String::from(KEY_DOC);
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("domain_extent", fmt_f(self.domain_extent));
        kv("nodes_per_side", self.nodes_per_side.to_string());
        kv("dt", fmt_f(self.dt));
        kv("nt", self.nt.to_string());
        kv("source_x", fmt_f(self.source_pos.0));
        kv("source_y", fmt_f(self.source_pos.1));
        kv("source_freq", fmt_f(self.source_freq));
        kv("source_delay", fmt_f(self.source_delay));
        kv("bc_kind", self.bc_kind.as_str().into());
        kv("epsilon", fmt_f(self.epsilon));
        kv("taylor_degree", self.taylor_degree.to_string());
        kv("inner_product", self.inner_product.as_str().into());
        kv("stiffness_fallback", self.stiffness_fallback.to_string());
        kv("snapshot_stride", self.snapshot_stride.to_string());
        kv("reorth_passes", self.reorth_passes.to_string());
        kv("rng_seed", self.rng_seed.to_string());
        kv("velocity", fmt_f(self.medium.velocity));
        kv("velocity_gradient", fmt_f(self.medium.gradient));
        let lens = self.medium.lens.unwrap_or(Lens {
            center: (0.0, 0.0),
            radius: 1.0,
            amplitude: 0.0,
        });
        kv("lens_x", fmt_f(lens.center.0));
        kv("lens_y", fmt_f(lens.center.1));
        kv("lens_radius", fmt_f(lens.radius));
        kv("lens_amplitude", fmt_f(lens.amplitude));
        kv("perturb_x", fmt_f(self.perturbation.center.0));
        kv("perturb_y", fmt_f(self.perturbation.center.1));
        kv("perturb_radius", fmt_f(self.perturbation.radius));
        kv("perturb_ratio", fmt_f(self.perturbation.norm_ratio));
        kv("receiver_x0", fmt_f(self.receivers.x0));
        kv("receiver_x1", fmt_f(self.receivers.x1));
        kv("receiver_y", fmt_f(self.receivers.y));
        kv("receiver_count", self.receivers.count.to_string());
        kv("trace_x", fmt_f(self.receivers.trace_point.0));
        kv("trace_y", fmt_f(self.receivers.trace_point.1));
        kv("alpha_true", fmt_f(self.line_search.alpha_true));
        kv("alpha_min", fmt_f(self.line_search.alpha_min));
        kv("alpha_max", fmt_f(self.line_search.alpha_max));
        kv("alpha_points", self.line_search.points.to_string());
        kv("noise_level", fmt_f(self.line_search.noise_level));
        kv("pod_rank", self.pod.rank.unwrap_or(0).to_string());
        kv("pod_inner", self.pod.inner.as_str().into());
        kv("pod_stride", self.pod.stride.to_string());
        s
    }
}

fn default_bump() -> BumpSpec {
    BumpSpec {
        center: (25.0, 12.0),
        radius: 10.0,
        norm_ratio: 0.10 / 2.12e-3,
    }
}

fn fmt_f(v: f64) -> String {
    // `{:?}` is the shortest representation that parses back bit-exactly.
    format!("{v:?}")
}

fn positive(key: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(key, format!("{key} must be positive")))
    }
}

const KNOWN_KEYS: &[&str] = &[
    "domain_extent",
    "nodes_per_side",
    "dt",
    "nt",
    "source_x",
    "source_y",
    "source_freq",
    "source_delay",
    "bc_kind",
    "epsilon",
    "taylor_degree",
    "inner_product",
    "stiffness_fallback",
    "snapshot_stride",
    "reorth_passes",
    "rng_seed",
    "velocity",
    "velocity_gradient",
    "lens_x",
    "lens_y",
    "lens_radius",
    "lens_amplitude",
    "perturb_x",
    "perturb_y",
    "perturb_radius",
    "perturb_ratio",
    "receiver_x0",
    "receiver_x1",
    "receiver_y",
    "receiver_count",
    "trace_x",
    "trace_y",
    "alpha_true",
    "alpha_min",
    "alpha_max",
    "alpha_points",
    "noise_level",
    "pod_rank",
    "pod_inner",
    "pod_stride",
];

/// Raw key/value document before validation.
#[derive(Debug, Clone, Default)]
pub struct ConfigDoc {
    entries: BTreeMap<String, String>,
}

impl ConfigDoc {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: i + 1,
                reason: format!("expected `key = value`, got `{line}`"),
            })?;
            let key = k.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(Error::Parse {
                    line: i + 1,
                    reason: format!("unknown key `{key}`"),
                });
            }
            if entries.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(Error::Parse {
                    line: i + 1,
                    reason: format!("duplicate key `{key}`"),
                });
            }
        }
        Ok(ConfigDoc { entries })
    }

    /// Replace or add one entry (command-line overrides).
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if !KNOWN_KEYS.contains(&key) {
            return Err(Error::invalid(key, "unknown key"));
        }
        self.entries.insert(key.to_string(), value.trim().to_string());
        Ok(())
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<T>()
                .map(Some)
                .map_err(|e| Error::invalid(key, format!("`{v}`: {e}"))),
        }
    }

    fn req<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)?.ok_or_else(|| Error::MissingKey(key.to_string()))
    }

    fn opt<T: FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn into_config(self) -> Result<SimConfig> {
        let d = SimConfig::reference(BcKind::Dirichlet);
        let source_freq: f64 = self.req("source_freq")?;
        positive("source_freq", source_freq)?;
        let lens_amp: f64 = self.opt("lens_amplitude", 0.0)?;
        let lens = if lens_amp != 0.0 {
            Some(Lens {
                center: (self.req("lens_x")?, self.req("lens_y")?),
                radius: self.req("lens_radius")?,
                amplitude: lens_amp,
            })
        } else {
            None
        };
        let bump = default_bump();
        let pod_rank: usize = self.opt("pod_rank", 0)?;
        let cfg = SimConfig {
            domain_extent: self.req("domain_extent")?,
            nodes_per_side: self.req("nodes_per_side")?,
            dt: self.req("dt")?,
            nt: self.req("nt")?,
            source_pos: (self.req("source_x")?, self.req("source_y")?),
            source_freq,
            source_delay: self.opt("source_delay", 1.0 / source_freq)?,
            bc_kind: self.req("bc_kind")?,
            epsilon: self.opt("epsilon", 0.01)?,
            taylor_degree: self.opt("taylor_degree", 0)?,
            inner_product: self.opt("inner_product", InnerKind::Stiffness)?,
            stiffness_fallback: self.opt("stiffness_fallback", false)?,
            snapshot_stride: self.opt("snapshot_stride", 1)?,
            reorth_passes: self.opt("reorth_passes", 1)?,
            rng_seed: self.opt("rng_seed", 0)?,
            medium: MediumSpec {
                velocity: self.opt("velocity", d.medium.velocity)?,
                gradient: self.opt("velocity_gradient", 0.0)?,
                lens,
            },
            perturbation: BumpSpec {
                center: (
                    self.opt("perturb_x", bump.center.0)?,
                    self.opt("perturb_y", bump.center.1)?,
                ),
                radius: self.opt("perturb_radius", bump.radius)?,
                norm_ratio: self.opt("perturb_ratio", bump.norm_ratio)?,
            },
            receivers: ReceiverSpec {
                x0: self.opt("receiver_x0", d.receivers.x0)?,
                x1: self.opt("receiver_x1", d.receivers.x1)?,
                y: self.opt("receiver_y", d.receivers.y)?,
                count: self.opt("receiver_count", d.receivers.count)?,
                trace_point: (
                    self.opt("trace_x", d.receivers.trace_point.0)?,
                    self.opt("trace_y", d.receivers.trace_point.1)?,
                ),
            },
            line_search: LineSearchSpec {
                alpha_true: self.opt("alpha_true", d.line_search.alpha_true)?,
                alpha_min: self.opt("alpha_min", d.line_search.alpha_min)?,
                alpha_max: self.opt("alpha_max", d.line_search.alpha_max)?,
                points: self.opt("alpha_points", d.line_search.points)?,
                noise_level: self.opt("noise_level", 0.0)?,
            },
            pod: PodSpec {
                rank: (pod_rank > 0).then_some(pod_rank),
                inner: self.opt("pod_inner", PodInner::Euclidean)?,
                stride: self.opt("pod_stride", d.pod.stride)?,
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Parse and validate a configuration document.
pub fn load_config(text: &str) -> Result<SimConfig> {
    ConfigDoc::parse(text)?.into_config()
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
domain_extent = 50   # m
nodes_per_side = 201
dt = 0.001
nt = 4000
source_x = 25
source_y = 5
source_freq = 2.5
bc_kind = dirichlet
";

    #[test]
    fn defaults_are_applied() {
        let cfg = load_config(MINIMAL).unwrap();
        assert_eq!(cfg.epsilon, 0.01);
        assert_eq!(cfg.snapshot_stride, 1);
        assert_eq!(cfg.reorth_passes, 1);
        assert_eq!(cfg.inner_product, InnerKind::Stiffness);
        assert_eq!(cfg.source_delay, 0.4);
        assert_eq!(cfg.grid_spacing(), 0.25);
    }

    #[test]
    fn zero_dt_is_rejected_by_name() {
        let text = MINIMAL.replace("dt = 0.001", "dt = 0");
        let err = load_config(&text).unwrap_err();
        assert!(err.to_string().contains("dt must be positive"), "{err}");
    }

    #[test]
    fn missing_key_is_named() {
        let text = MINIMAL.replace("nt = 4000\n", "");
        match load_config(&text) {
            Err(Error::MissingKey(k)) => assert_eq!(k, "nt"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn source_outside_domain() {
        let text = MINIMAL.replace("source_y = 5", "source_y = 51");
        let err = load_config(&text).unwrap_err();
        assert!(err.to_string().contains("source_x/source_y"), "{err}");
    }

    #[test]
    fn non_positive_epsilon() {
        let text = format!("{MINIMAL}epsilon = -1\n");
        assert!(load_config(&text).unwrap_err().to_string().contains("epsilon"));
    }

    #[test]
    fn unknown_and_duplicate_keys() {
        assert!(load_config(&format!("{MINIMAL}epsilom = 1\n")).is_err());
        assert!(load_config(&format!("{MINIMAL}nt = 3\n")).is_err());
    }

    #[test]
    fn reference_round_trip() {
        let mut cfg = SimConfig::reference(BcKind::Abc1);
        cfg.medium.lens = Some(Lens {
            center: (30.0, 30.0),
            radius: 5.0,
            amplitude: -2.5,
        });
        cfg.pod.rank = Some(81);
        let back = load_config(&cfg.to_text()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn override_replaces_entry() {
        let mut doc = ConfigDoc::parse(MINIMAL).unwrap();
        doc.set("nt", "10").unwrap();
        assert_eq!(doc.into_config().unwrap().nt, 10);
    }
}
