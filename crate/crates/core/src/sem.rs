//! Q1 spectral-element discretization and the full-order leapfrog solver.
//!
//! Mass and boundary damping use vertex (GLL order 1) quadrature and are
//! therefore diagonal; the stiffness is the exactly integrated Q1 Laplacian,
//! applied matrix-free. The semi-discrete system is
//!
//! ```text
//! M ü + D u̇ + K u = f
//! ```
//!
//! and one leapfrog step solves, entrywise,
//! `(M + dt/2 D) u⁺ = (2M − dt² K) u − (M − dt/2 D) u⁻ + dt² f`.

use std::f64::consts::PI;

use crate::config::{BcKind, SimConfig};
use crate::error::{Error, Result};
use crate::field::ParameterField;
use crate::grid::Grid;
use crate::linalg::wdot;

/// Leapfrog with lumped Q1 mass is stable for `c dt / h < 1`.
pub const CFL_BOUND: f64 = 1.0;

/// Ricker wavelet `(1 − ½ω²τ²) exp(−¼ω²τ²)` with `ω = 2π fs`, `τ = t − t0`.
pub fn ricker(t: f64, fs: f64, t0: f64) -> f64 {
    let w = 2.0 * PI * fs;
    let a = w * w * (t - t0) * (t - t0);
    (1.0 - 0.5 * a) * (-0.25 * a).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagonalRole {
    Mass,
    Damping,
}

/// Diagonal (lumped) operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalOperator {
    values: Vec<f64>,
    role: DiagonalRole,
}

impl DiagonalOperator {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn role(&self) -> DiagonalRole {
        self.role
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn apply(&self, u: &[f64], out: &mut [f64]) {
        for ((o, &d), &x) in out.iter_mut().zip(&self.values).zip(u) {
            *o = d * x;
        }
    }

    pub fn quadratic(&self, u: &[f64], v: &[f64]) -> f64 {
        wdot(u, &self.values, v)
    }
}

/// Lumped mass `∫ θ ψ_k ψ_l`: `θ_j · (h²/4 per adjacent element)`.
pub fn assemble_mass(grid: &Grid, theta: &ParameterField) -> DiagonalOperator {
    weighted_mass(grid, theta.values())
}

/// Lumped mass with arbitrary (possibly signed) nodal coefficient, e.g. `M_δθ`.
pub fn weighted_mass(grid: &Grid, coef: &[f64]) -> DiagonalOperator {
    let values = grid
        .volume_weights()
        .into_iter()
        .zip(coef)
        .map(|(w, c)| w * c)
        .collect();
    DiagonalOperator {
        values,
        role: DiagonalRole::Mass,
    }
}

/// Lumped boundary damping `∫_∂Ω √θ ψ_k ψ_l`: `√θ_j · h` on ∂Ω, zero inside.
pub fn assemble_damping(grid: &Grid, theta: &ParameterField) -> DiagonalOperator {
    let values = grid
        .boundary_weights()
        .into_iter()
        .zip(theta.values())
        .map(|(b, t)| b * t.sqrt())
        .collect();
    DiagonalOperator {
        values,
        role: DiagonalRole::Damping,
    }
}

/// Exactly integrated Q1 stiffness `∫ ∇ψ_k·∇ψ_l` on square elements, with
/// natural (Neumann) rows on the boundary. In 2D it does not depend on `h`.
///
/// Interior stencil: `8/3` at the center, `−1/3` on all eight neighbours.
#[derive(Debug, Clone)]
pub struct StiffnessOperator {
    n: usize,
}

impl StiffnessOperator {
    pub fn new(grid: &Grid) -> Self {
        StiffnessOperator { n: grid.n() }
    }

    pub fn node_count(&self) -> usize {
        self.n * self.n
    }

    /// Element matrix on a square, local nodes counter-clockwise from
    /// the lower-left corner.
    pub fn element_matrix() -> [[f64; 4]; 4] {
        let (d, e, o) = (2.0 / 3.0, -1.0 / 6.0, -1.0 / 3.0);
        [[d, e, o, e], [e, d, e, o], [o, e, d, e], [e, o, e, d]]
    }

    fn row_generic(&self, u: &[f64], ix: usize, iy: usize) -> f64 {
        let n = self.n;
        let last = n - 1;
        let idx = |x: usize, y: usize| y * n + x;
        let cx = (ix > 0) as usize + (ix < last) as usize;
        let cy = (iy > 0) as usize + (iy < last) as usize;
        let mut acc = (2.0 / 3.0) * (cx * cy) as f64 * u[idx(ix, iy)];
        // horizontal neighbours share an edge with `cy` elements
        let ex = -(1.0 / 6.0) * cy as f64;
        let ey = -(1.0 / 6.0) * cx as f64;
        if ix > 0 {
            acc += ex * u[idx(ix - 1, iy)];
        }
        if ix < last {
            acc += ex * u[idx(ix + 1, iy)];
        }
        if iy > 0 {
            acc += ey * u[idx(ix, iy - 1)];
        }
        if iy < last {
            acc += ey * u[idx(ix, iy + 1)];
        }
        let diag = -1.0 / 3.0;
        for (dx, dy) in [(-1i64, -1i64), (1, -1), (1, 1), (-1, 1)] {
            let (x, y) = (ix as i64 + dx, iy as i64 + dy);
            if x >= 0 && y >= 0 && x <= last as i64 && y <= last as i64 {
                acc += diag * u[idx(x as usize, y as usize)];
            }
        }
        acc
    }

    /// `out = K u`.
    pub fn apply(&self, u: &[f64], out: &mut [f64]) {
        let n = self.n;
        assert_eq!(u.len(), n * n);
        assert_eq!(out.len(), n * n);
        if n < 3 {
            for iy in 0..n {
                for ix in 0..n {
                    out[iy * n + ix] = self.row_generic(u, ix, iy);
                }
            }
            return;
        }
        let c = 8.0 / 3.0;
        let t = 1.0 / 3.0;
        for iy in 1..n - 1 {
            let dn = &u[(iy - 1) * n..iy * n];
            let md = &u[iy * n..(iy + 1) * n];
            let up = &u[(iy + 1) * n..(iy + 2) * n];
            let row = &mut out[iy * n..(iy + 1) * n];
            for ix in 1..n - 1 {
                let s = dn[ix - 1] + dn[ix] + dn[ix + 1] + md[ix - 1] + md[ix + 1]
                    + up[ix - 1]
                    + up[ix]
                    + up[ix + 1];
                row[ix] = c * md[ix] - t * s;
            }
        }
        for ix in 0..n {
            out[ix] = self.row_generic(u, ix, 0);
            out[(n - 1) * n + ix] = self.row_generic(u, ix, n - 1);
        }
        for iy in 1..n - 1 {
            out[iy * n] = self.row_generic(u, 0, iy);
            out[iy * n + n - 1] = self.row_generic(u, n - 1, iy);
        }
    }

    /// `uᵀ K v` using a caller-provided scratch buffer.
    pub fn quadratic(&self, u: &[f64], v: &[f64], scratch: &mut [f64]) -> f64 {
        self.apply(v, scratch);
        crate::linalg::dot(u, scratch)
    }
}

/// Nodal point load: unit value at the node nearest the requested source.
#[derive(Debug, Clone, PartialEq)]
pub struct SourcePattern {
    pub node: usize,
    pub offset: (f64, f64),
    pub amplitude: f64,
}

impl SourcePattern {
    pub fn to_dense(&self, len: usize) -> Vec<f64> {
        let mut v = vec![0.0; len];
        v[self.node] = self.amplitude;
        v
    }
}

pub fn inject_source(grid: &Grid, pos: (f64, f64)) -> SourcePattern {
    let (node, offset) = grid.nearest_node(pos.0, pos.1);
    if offset != (0.0, 0.0) {
        log::warn!(
            "source ({}, {}) is not a grid node; snapped by ({:.3e}, {:.3e})",
            pos.0,
            pos.1,
            offset.0,
            offset.1
        );
    }
    SourcePattern {
        node,
        offset,
        amplitude: 1.0,
    }
}

/// Pressure at two consecutive time levels.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveState {
    pub u_prev: Vec<f64>,
    pub u_curr: Vec<f64>,
    pub step: usize,
}

impl WaveState {
    pub fn zero(len: usize) -> Self {
        WaveState {
            u_prev: vec![0.0; len],
            u_curr: vec![0.0; len],
            step: 0,
        }
    }
}

/// Right-hand side of one step.
#[derive(Debug, Clone, Copy)]
pub enum Load<'a> {
    None,
    Point { node: usize, value: f64 },
    Dense(&'a [f64]),
}

/// Everything needed to advance the full-order system at fixed `θ`.
#[derive(Debug, Clone)]
pub struct Leapfrog {
    pub mass: DiagonalOperator,
    pub damping: Option<DiagonalOperator>,
    pub stiffness: StiffnessOperator,
    pub bc: BcKind,
    pub dt: f64,
    inv_lhs: Vec<f64>,
    prev_coef: Vec<f64>,
    boundary: Vec<usize>,
}

/// Courant number `max c · dt / h`.
pub fn courant(grid: &Grid, theta: &ParameterField, dt: f64) -> f64 {
    theta.max_velocity() * dt / grid.spacing()
}

impl Leapfrog {
    pub fn new(grid: &Grid, theta: &ParameterField, bc: BcKind, dt: f64) -> Result<Self> {
        let cn = courant(grid, theta, dt);
        if !(cn < CFL_BOUND) {
            return Err(Error::Cfl {
                courant: cn,
                bound: CFL_BOUND,
            });
        }
        let mass = assemble_mass(grid, theta);
        let damping = match bc {
            BcKind::Abc1 => Some(assemble_damping(grid, theta)),
            BcKind::Dirichlet => None,
        };
        let (inv_lhs, prev_coef) = match &damping {
            Some(d) => mass
                .values()
                .iter()
                .zip(d.values())
                .map(|(m, d)| (1.0 / (m + 0.5 * dt * d), m - 0.5 * dt * d))
                .unzip(),
            None => mass.values().iter().map(|m| (1.0 / m, *m)).unzip(),
        };
        Ok(Leapfrog {
            mass,
            damping,
            stiffness: StiffnessOperator::new(grid),
            bc,
            dt,
            inv_lhs,
            prev_coef,
            boundary: grid.boundary_nodes(),
        })
    }

    pub fn len(&self) -> usize {
        self.inv_lhs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inv_lhs.is_empty()
    }

    fn mask(&self, out: &mut [f64]) {
        if self.bc == BcKind::Dirichlet {
            for &b in &self.boundary {
                out[b] = 0.0;
            }
        }
    }

    /// `u⁺` from `u⁻`, `u` and the load at the current time level.
    /// `ku` is scratch of node-count length.
    pub fn step(&self, prev: &[f64], curr: &[f64], load: Load<'_>, out: &mut [f64], ku: &mut [f64]) {
        let dt2 = self.dt * self.dt;
        self.stiffness.apply(curr, ku);
        let m = self.mass.values();
        for j in 0..out.len() {
            out[j] = self.inv_lhs[j]
                * (2.0 * m[j] * curr[j] - dt2 * ku[j] - self.prev_coef[j] * prev[j]);
        }
        self.add_load(load, dt2, out);
        self.mask(out);
    }

    fn add_load(&self, load: Load<'_>, scale: f64, out: &mut [f64]) {
        match load {
            Load::None => {}
            Load::Point { node, value } => out[node] += self.inv_lhs[node] * scale * value,
            Load::Dense(f) => {
                for j in 0..out.len() {
                    out[j] += self.inv_lhs[j] * scale * f[j];
                }
            }
        }
    }

    /// First step from zero data with zero initial velocity:
    /// `u¹ = dt²/2 · M⁻¹ f⁰`.
    pub fn startup(&self, load: Load<'_>, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        let half_dt2 = 0.5 * self.dt * self.dt;
        let m = self.mass.values();
        match load {
            Load::None => {}
            Load::Point { node, value } => out[node] = half_dt2 * value / m[node],
            Load::Dense(f) => {
                for j in 0..out.len() {
                    out[j] = half_dt2 * f[j] / m[j];
                }
            }
        }
        self.mask(out);
    }

    /// Discrete energy `½‖(u⁺ − u)/dt‖²_M + ½ ⟨K u⁺, u⟩`, conserved by the
    /// source-free undamped scheme.
    pub fn energy(&self, curr: &[f64], next: &[f64], scratch: &mut [f64]) -> f64 {
        let vel: Vec<f64> = next
            .iter()
            .zip(curr)
            .map(|(a, b)| (a - b) / self.dt)
            .collect();
        0.5 * self.mass.quadratic(&vel, &vel) + 0.5 * self.stiffness.quadratic(curr, next, scratch)
    }
}

pub(crate) fn check_finite(v: &[f64], step: usize) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { step })
    }
}

/// Full-order forward problem at a fixed parameter field.
#[derive(Debug, Clone)]
pub struct FullSolver {
    pub grid: Grid,
    pub ops: Leapfrog,
    pub source: SourcePattern,
    pub nt: usize,
    pub freq: f64,
    pub delay: f64,
}

impl FullSolver {
    pub fn new(cfg: &SimConfig, grid: &Grid, theta: &ParameterField) -> Result<Self> {
        Ok(FullSolver {
            grid: grid.clone(),
            ops: Leapfrog::new(grid, theta, cfg.bc_kind, cfg.dt)?,
            source: inject_source(grid, cfg.source_pos),
            nt: cfg.nt,
            freq: cfg.source_freq,
            delay: cfg.source_delay,
        })
    }

    pub fn source_amplitude(&self, step: usize) -> f64 {
        self.source.amplitude * ricker(step as f64 * self.ops.dt, self.freq, self.delay)
    }

    fn load(&self, step: usize) -> Load<'static> {
        Load::Point {
            node: self.source.node,
            value: self.source_amplitude(step),
        }
    }

    /// Runs `nt` steps from zero data. `sink(n, u)` receives `uⁿ` for
    /// `n = 1..=nt`.
    pub fn run<F: FnMut(usize, &[f64])>(&self, mut sink: F) -> Result<()> {
        let len = self.grid.node_count();
        let mut prev = vec![0.0; len];
        let mut curr = vec![0.0; len];
        let mut next = vec![0.0; len];
        let mut ku = vec![0.0; len];
        self.ops.startup(self.load(0), &mut curr);
        check_finite(&curr, 1)?;
        sink(1, &curr);
        for n in 1..self.nt {
            self.ops.step(&prev, &curr, self.load(n), &mut next, &mut ku);
            check_finite(&next, n + 1)?;
            sink(n + 1, &next);
            std::mem::swap(&mut prev, &mut curr);
            std::mem::swap(&mut curr, &mut next);
        }
        Ok(())
    }
}

/// Full solve that streams fields to `sink` and records traces at `receivers`.
pub fn solve_full<F: FnMut(usize, &[f64])>(
    cfg: &SimConfig,
    grid: &Grid,
    theta: &ParameterField,
    receivers: &crate::inverse::ReceiverLine,
    mut sink: F,
) -> Result<crate::inverse::TraceSet> {
    let solver = FullSolver::new(cfg, grid, theta)?;
    let mut rec = crate::inverse::TraceRecorder::new(receivers, cfg.dt);
    solver.run(|n, u| {
        rec.push(n, u);
        sink(n, u);
    })?;
    Ok(rec.finish())
}
