//! Receivers, synthetic observations and the `J(α)` line search.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::basis::SnapshotBasis;
use crate::config::{LineSearchSpec, ReceiverSpec};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::linalg::gemm_nn;
use crate::rom::ReducedOperators;

/// Receivers snapped to grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceiverLine {
    positions: Vec<(f64, f64)>,
    nodes: Vec<usize>,
    offsets: Vec<(f64, f64)>,
}

impl ReceiverLine {
    /// `count` equidistant points from `(x0, y)` to `(x1, y)`.
    pub fn new(grid: &Grid, spec: &ReceiverSpec) -> Result<Self> {
        if spec.count == 0 {
            return Err(Error::invalid("receiver_count", "receiver_count must be >= 1"));
        }
        let positions: Vec<(f64, f64)> = (0..spec.count)
            .map(|i| {
                let t = if spec.count == 1 {
                    0.0
                } else {
                    i as f64 / (spec.count - 1) as f64
                };
                (spec.x0 + t * (spec.x1 - spec.x0), spec.y)
            })
            .collect();
        Ok(ReceiverLine::at_points(grid, &positions))
    }

    pub fn at_points(grid: &Grid, positions: &[(f64, f64)]) -> Self {
        let (nodes, offsets) = positions
            .iter()
            .map(|&(x, y)| grid.nearest_node(x, y))
            .unzip();
        ReceiverLine {
            positions: positions.to_vec(),
            nodes,
            offsets,
        }
    }

    pub fn single(grid: &Grid, point: (f64, f64)) -> Self {
        ReceiverLine::at_points(grid, &[point])
    }

    pub fn count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn positions(&self) -> &[(f64, f64)] {
        &self.positions
    }

    pub fn offsets(&self) -> &[(f64, f64)] {
        &self.offsets
    }

    /// Largest per-coordinate snap distance.
    pub fn max_offset(&self) -> f64 {
        self.offsets
            .iter()
            .map(|(dx, dy)| dx.abs().max(dy.abs()))
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseInfo {
    pub level: f64,
    pub seed: u64,
}

/// Pressure samples, row-major `nt × count` (one row per time step).
#[derive(Debug, Clone, PartialEq)]
pub struct TraceSet {
    times: Vec<f64>,
    positions: Vec<(f64, f64)>,
    samples: Vec<f64>,
    noise: Option<NoiseInfo>,
}

impl TraceSet {
    pub fn new(times: Vec<f64>, positions: Vec<(f64, f64)>, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != times.len() * positions.len() {
            return Err(Error::Dimension(format!(
                "{} samples for {} steps x {} receivers",
                samples.len(),
                times.len(),
                positions.len()
            )));
        }
        Ok(TraceSet {
            times,
            positions,
            samples,
            noise: None,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn positions(&self) -> &[(f64, f64)] {
        &self.positions
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn noise(&self) -> Option<NoiseInfo> {
        self.noise
    }

    pub fn steps(&self) -> usize {
        self.times.len()
    }

    pub fn count(&self) -> usize {
        self.positions.len()
    }

    pub fn row(&self, step_index: usize) -> &[f64] {
        let c = self.count();
        &self.samples[step_index * c..(step_index + 1) * c]
    }

    /// Time series of one receiver.
    pub fn column(&self, receiver: usize) -> Vec<f64> {
        self.samples
            .iter()
            .skip(receiver)
            .step_by(self.count().max(1))
            .copied()
            .collect()
    }

    pub fn rms(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        (crate::linalg::dot(&self.samples, &self.samples) / self.samples.len() as f64).sqrt()
    }
}

/// Samples a field stream at the receivers.
#[derive(Debug, Clone)]
pub struct TraceRecorder<'a> {
    line: &'a ReceiverLine,
    dt: f64,
    times: Vec<f64>,
    samples: Vec<f64>,
}

impl<'a> TraceRecorder<'a> {
    pub fn new(line: &'a ReceiverLine, dt: f64) -> Self {
        TraceRecorder {
            line,
            dt,
            times: Vec::new(),
            samples: Vec::new(),
        }
    }

    pub fn push(&mut self, n: usize, u: &[f64]) {
        self.times.push(n as f64 * self.dt);
        self.samples.extend(self.line.nodes.iter().map(|&k| u[k]));
    }

    pub fn finish(self) -> TraceSet {
        TraceSet {
            times: self.times,
            positions: self.line.positions.clone(),
            samples: self.samples,
            noise: None,
        }
    }
}

/// Records a stream of `(step, field)` pairs.
pub fn record<I, V>(stream: I, receivers: &ReceiverLine, dt: f64) -> TraceSet
where
    I: IntoIterator<Item = (usize, V)>,
    V: AsRef<[f64]>,
{
    let mut rec = TraceRecorder::new(receivers, dt);
    for (n, u) in stream {
        rec.push(n, u.as_ref());
    }
    rec.finish()
}

/// Adds white Gaussian noise with standard deviation `level · rms(traces)`.
pub fn add_noise(traces: &TraceSet, level: f64, seed: u64) -> Result<TraceSet> {
    if !(level >= 0.0) || !level.is_finite() {
        return Err(Error::invalid("noise_level", "noise level must be >= 0"));
    }
    let mut out = traces.clone();
    out.noise = Some(NoiseInfo { level, seed });
    if level == 0.0 {
        return Ok(out);
    }
    let sigma = level * traces.rms();
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::invalid("noise_level", e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for v in &mut out.samples {
        *v += normal.sample(&mut rng);
    }
    Ok(out)
}

/// `J = ½ Σ (test − obs)²` over all samples.
pub fn cost(test: &TraceSet, obs: &TraceSet) -> Result<f64> {
    cost_samples(&test.samples, test.steps(), test.count(), obs)
}

fn cost_samples(test: &[f64], steps: usize, count: usize, obs: &TraceSet) -> Result<f64> {
    if steps != obs.steps() || count != obs.count() {
        return Err(Error::Dimension(format!(
            "traces {steps}x{count} vs observations {}x{}",
            obs.steps(),
            obs.count()
        )));
    }
    let mut acc = [0.0f64; 4];
    for (i, (a, b)) in test.iter().zip(&obs.samples).enumerate() {
        let d = a - b;
        acc[i & 3] += d * d;
    }
    Ok(0.5 * ((acc[0] + acc[2]) + (acc[1] + acc[3])))
}

/// Evenly spaced `α` values, endpoints included.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaGrid {
    values: Vec<f64>,
}

impl AlphaGrid {
    pub fn linspace(min: f64, max: f64, points: usize) -> Result<Self> {
        if points == 0 {
            return Err(Error::Empty("alpha grid has no points".into()));
        }
        if !(max >= min) {
            return Err(Error::invalid("alpha_max", "alpha_max must be >= alpha_min"));
        }
        let values = if points == 1 {
            vec![min]
        } else {
            let h = (max - min) / (points - 1) as f64;
            (0..points).map(|i| min + i as f64 * h).collect()
        };
        Ok(AlphaGrid { values })
    }

    pub fn from_spec(spec: &LineSearchSpec) -> Result<Self> {
        AlphaGrid::linspace(spec.alpha_min, spec.alpha_max, spec.points)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        if self.values.len() < 2 {
            0.0
        } else {
            self.values[1] - self.values[0]
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineSearchResult {
    pub alphas: Vec<f64>,
    pub costs: Vec<f64>,
    pub alpha_star: f64,
    pub index: usize,
}

impl LineSearchResult {
    /// Smallest `α` among the minimizers.
    pub fn from_curve(alphas: Vec<f64>, costs: Vec<f64>) -> Self {
        let mut index = 0;
        for (i, c) in costs.iter().enumerate() {
            if *c < costs[index] {
                index = i;
            }
        }
        LineSearchResult {
            alpha_star: alphas[index],
            alphas,
            costs,
            index,
        }
    }
}

/// Reduced traces at `receivers` for a given `α`: row-major `nt × count`.
pub fn reduced_traces(
    red: &ReducedOperators,
    basis: &SnapshotBasis,
    receivers: &ReceiverLine,
    alpha: f64,
) -> Result<Vec<f64>> {
    let sys = red.assemble_at_alpha(alpha)?;
    let traj = sys.trajectory()?;
    let n = basis.count();
    let rc = receivers.count();
    let mut rphi = vec![0.0; rc * n];
    for (i, v) in basis.vectors().enumerate() {
        for (r, &node) in receivers.nodes().iter().enumerate() {
            rphi[r + i * rc] = v[node];
        }
    }
    Ok(gemm_nn(&rphi, &traj, rc, n, red.nt()))
}

/// Evaluates `J` over `grid` against each observation set; the reduced
/// solve at each `α` is shared by all observation sets.
pub fn line_search_multi(
    red: &ReducedOperators,
    basis: &SnapshotBasis,
    receivers: &ReceiverLine,
    observations: &[&TraceSet],
    grid: &AlphaGrid,
) -> Result<Vec<LineSearchResult>> {
    if grid.is_empty() {
        return Err(Error::Empty("alpha grid has no points".into()));
    }
    for a in grid.values() {
        red.check_admissible(*a)?;
    }
    let mut curves = vec![Vec::with_capacity(grid.len()); observations.len()];
    for &alpha in grid.values() {
        let tr = reduced_traces(red, basis, receivers, alpha)?;
        for (curve, obs) in curves.iter_mut().zip(observations) {
            curve.push(cost_samples(&tr, red.nt(), receivers.count(), obs)?);
        }
    }
    Ok(curves
        .into_iter()
        .map(|c| LineSearchResult::from_curve(grid.values().to_vec(), c))
        .collect())
}

pub fn line_search(
    red: &ReducedOperators,
    basis: &SnapshotBasis,
    receivers: &ReceiverLine,
    obs: &TraceSet,
    grid: &AlphaGrid,
) -> Result<LineSearchResult> {
    Ok(line_search_multi(red, basis, receivers, &[obs], grid)?.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn traces(samples: Vec<f64>, steps: usize) -> TraceSet {
        let count = samples.len() / steps;
        TraceSet::new(
            (1..=steps).map(|n| n as f64).collect(),
            (0..count).map(|i| (i as f64, 0.0)).collect(),
            samples,
        )
        .unwrap()
    }

    #[test]
    fn cost_examples() {
        let obs = traces(vec![0.0; 4], 2);
        let mut t = vec![0.0; 4];
        t[3] = 2.0;
        assert_eq!(cost(&traces(t.clone(), 2), &obs).unwrap(), 2.0);
        assert_eq!(cost(&obs, &obs).unwrap(), 0.0);
        let t3: Vec<f64> = t.iter().map(|v| 3.0 * v).collect();
        assert_eq!(cost(&traces(t3, 2), &obs).unwrap(), 18.0);
        assert!(cost(&traces(vec![0.0; 4], 4), &obs).is_err());
    }

    #[test]
    fn receiver_line_snaps_within_half_spacing() {
        let g = Grid::new(50.0, 201).unwrap();
        let spec = ReceiverSpec {
            x0: 0.0,
            x1: 50.0,
            y: 15.42,
            count: 202,
            trace_point: (39.05, 15.42),
        };
        let line = ReceiverLine::new(&g, &spec).unwrap();
        assert_eq!(line.count(), 202);
        assert!(line.max_offset() <= 0.125 + 1e-12);
    }

    #[test]
    fn noise_level_zero_and_determinism() {
        let t = traces((0..40).map(|i| (i as f64).sin()).collect(), 10);
        let z = add_noise(&t, 0.0, 3).unwrap();
        assert_eq!(z.samples(), t.samples());
        assert_eq!(add_noise(&t, 0.1, 5).unwrap(), add_noise(&t, 0.1, 5).unwrap());
        assert!(add_noise(&t, -0.1, 5).is_err());
    }

    #[test]
    fn argmin_prefers_smallest_alpha() {
        let r = LineSearchResult::from_curve(vec![0.0, 1.0, 2.0], vec![1.0, 0.5, 0.5]);
        assert_eq!(r.alpha_star, 1.0);
        assert_eq!(r.index, 1);
    }

    #[test]
    fn alpha_grid_spacing() {
        let g = AlphaGrid::linspace(0.0, 4e-3, 201).unwrap();
        assert_eq!(g.len(), 201);
        assert!((g.spacing() - 2e-5).abs() < 1e-18);
        assert!(g.values().iter().any(|a| (a - 2.12e-3).abs() < 1e-15));
        assert!(AlphaGrid::linspace(0.0, 1.0, 0).is_err());
    }
}
