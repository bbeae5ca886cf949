//! Sequential solves for the Fréchet derivatives `v⁰ … v^L` of the pressure
//! with respect to `θ` in the direction `δθ`.
//!
//! Every level solves the same discrete wave system at `θ₀`; level 0 is
//! driven by the physical source and level `ℓ ≥ 1` by
//!
//! ```text
//! f^ℓ = −ℓ M_δθ ∂²ₜ v^{ℓ−1} − Σ_{k<ℓ} C(ℓ,k) D^{(ℓ−k)} ∂ₜ v^k
//! ```
//!
//! with the second and first time derivatives taken as the same leapfrog
//! differences the solver uses. `D^{(m)}` is the m-th directional derivative
//! of the `√θ` boundary damping and only appears with absorbing boundaries.
//! With these loads the levels are exactly the α-derivatives of the
//! discrete solution at `θ₀ + αδθ`, so `Σ αˡ/ℓ! vˡ` is its Taylor polynomial.

use crate::config::{BcKind, SimConfig};
use crate::error::{Error, Result};
use crate::field::{ParameterField, Perturbation};
use crate::grid::Grid;
use crate::linalg::norm2;
use crate::sem::{check_finite, weighted_mass, FullSolver, Leapfrog, Load};

/// Three consecutive time levels `(uⁿ⁻¹, uⁿ, uⁿ⁺¹)` of one cascade level.
#[derive(Debug, Clone, Copy)]
pub struct Triple<'a> {
    pub prev: &'a [f64],
    pub curr: &'a [f64],
    pub next: &'a [f64],
}

/// Mass part of the level-`ℓ` load:
/// `−ℓ · w ⊙ δθ ⊙ (uⁿ⁺¹ − 2uⁿ + uⁿ⁻¹)/dt²` with `w` the lumped volume weights.
pub fn cascade_rhs(
    grid: &Grid,
    level: usize,
    prev_level: Triple<'_>,
    dtheta: &Perturbation,
    dt: f64,
) -> Result<Vec<f64>> {
    if level == 0 {
        return Err(Error::Misuse(
            "cascade_rhs called for level 0, which is driven by the physical source".into(),
        ));
    }
    let mdelta = weighted_mass(grid, dtheta.values());
    let mut out = vec![0.0; grid.node_count()];
    add_mass_term(level, prev_level, mdelta.values(), dt, &mut out);
    Ok(out)
}

fn add_mass_term(level: usize, t: Triple<'_>, mdelta: &[f64], dt: f64, out: &mut [f64]) {
    let s = -(level as f64) / (dt * dt);
    for j in 0..out.len() {
        out[j] += s * mdelta[j] * (t.next[j] - 2.0 * t.curr[j] + t.prev[j]);
    }
}

/// Directional derivatives of the boundary damping `b √θ`:
/// entry `m − 1` holds `D^{(m)} = b · c_m θ^{1/2−m} δθ^m`.
pub fn damping_derivatives(
    grid: &Grid,
    theta0: &ParameterField,
    dtheta: &Perturbation,
    max_order: usize,
) -> Vec<Vec<f64>> {
    let b = grid.boundary_weights();
    let mut out = Vec::with_capacity(max_order);
    let mut c = 1.0;
    for m in 1..=max_order {
        c *= 0.5 - (m - 1) as f64;
        let vals = b
            .iter()
            .zip(theta0.values())
            .zip(dtheta.values())
            .map(|((&bj, &t), &d)| {
                if bj == 0.0 {
                    0.0
                } else {
                    bj * c * t.powf(0.5 - m as f64) * d.powi(m as i32)
                }
            })
            .collect();
        out.push(vals);
    }
    out
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Per-level time levels during a cascade run.
#[derive(Debug, Clone)]
pub struct CascadeState {
    pub prev: Vec<Vec<f64>>,
    pub curr: Vec<Vec<f64>>,
    pub next: Vec<Vec<f64>>,
    pub step: usize,
}

/// Lockstep solver for levels `0..=L`.
#[derive(Debug, Clone)]
pub struct CascadeSolver {
    full: FullSolver,
    degree: usize,
    mdelta: Vec<f64>,
    damping_derivs: Vec<Vec<f64>>,
}

impl CascadeSolver {
    pub fn new(
        cfg: &SimConfig,
        grid: &Grid,
        theta0: &ParameterField,
        dtheta: &Perturbation,
        degree: usize,
    ) -> Result<Self> {
        if dtheta.len() != grid.node_count() {
            return Err(Error::Dimension("perturbation length != node count".into()));
        }
        let full = FullSolver::new(cfg, grid, theta0)?;
        let damping_derivs = match cfg.bc_kind {
            BcKind::Abc1 => damping_derivatives(grid, theta0, dtheta, degree),
            BcKind::Dirichlet => Vec::new(),
        };
        Ok(CascadeSolver {
            full,
            degree,
            mdelta: weighted_mass(grid, dtheta.values()).values().to_vec(),
            damping_derivs,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn ops(&self) -> &Leapfrog {
        &self.full.ops
    }

    fn level_load(&self, level: usize, st: &CascadeState, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        let below = level - 1;
        add_mass_term(
            level,
            Triple {
                prev: &st.prev[below],
                curr: &st.curr[below],
                next: &st.next[below],
            },
            &self.mdelta,
            self.full.ops.dt,
            out,
        );
        if self.damping_derivs.is_empty() {
            return;
        }
        let inv2dt = 1.0 / (2.0 * self.full.ops.dt);
        for k in 0..level {
            let d = &self.damping_derivs[level - k - 1];
            let c = -binomial(level, k) * inv2dt;
            let (nx, pv) = (&st.next[k], &st.prev[k]);
            for (j, &dj) in d.iter().enumerate() {
                if dj != 0.0 {
                    out[j] += c * dj * (nx[j] - pv[j]);
                }
            }
        }
    }

    /// Runs all levels for `nt` steps. `sink(level, n, vˡ(tₙ))` is called for
    /// every level (in order `0..=L`) at every step `n = 1..=nt`.
    pub fn run<F: FnMut(usize, usize, &[f64])>(&self, mut sink: F) -> Result<()> {
        let len = self.full.grid.node_count();
        let levels = self.degree + 1;
        let zeros = || vec![vec![0.0; len]; levels];
        let mut st = CascadeState {
            prev: zeros(),
            curr: zeros(),
            next: zeros(),
            step: 0,
        };
        let mut load = vec![0.0; len];
        let mut ku = vec![0.0; len];
        let ops = &self.full.ops;

        // Startup: zero data, zero velocity. The ghost level u⁻¹ = u¹ turns the
        // mass term into −2ℓ M_δθ v^{ℓ−1,1}/dt² and cancels the damping terms.
        ops.startup(self.full_load(0), &mut st.curr[0]);
        for l in 1..levels {
            let (lo, hi) = st.curr.split_at_mut(l);
            let below = &lo[l - 1];
            let s = -2.0 * l as f64 / (ops.dt * ops.dt);
            for j in 0..len {
                load[j] = s * self.mdelta[j] * below[j];
            }
            ops.startup(Load::Dense(&load), &mut hi[0]);
        }
        for l in 0..levels {
            check_finite(&st.curr[l], 1).map_err(|e| e.at_level(l))?;
            sink(l, 1, &st.curr[l]);
        }
        st.step = 1;

        for n in 1..self.full.nt {
            for l in 0..levels {
                let mut next = std::mem::take(&mut st.next[l]);
                if l == 0 {
                    ops.step(&st.prev[0], &st.curr[0], self.full_load(n), &mut next, &mut ku);
                } else {
                    self.level_load(l, &st, &mut load);
                    ops.step(&st.prev[l], &st.curr[l], Load::Dense(&load), &mut next, &mut ku);
                }
                check_finite(&next, n + 1).map_err(|e| e.at_level(l))?;
                st.next[l] = next;
            }
            for l in 0..levels {
                sink(l, n + 1, &st.next[l]);
            }
            std::mem::swap(&mut st.prev, &mut st.curr);
            std::mem::swap(&mut st.curr, &mut st.next);
            st.step = n + 1;
        }
        Ok(())
    }

    fn full_load(&self, step: usize) -> Load<'static> {
        Load::Point {
            node: self.full.source.node,
            value: self.full.source_amplitude(step),
        }
    }
}

/// Convenience wrapper: run the cascade and hand every level's field to `sink`.
pub fn solve_cascade<F: FnMut(usize, usize, &[f64])>(
    cfg: &SimConfig,
    grid: &Grid,
    theta0: &ParameterField,
    dtheta: &Perturbation,
    degree: usize,
    sink: F,
) -> Result<()> {
    CascadeSolver::new(cfg, grid, theta0, dtheta, degree)?.run(sink)
}

/// Final-time fields of every level.
pub fn cascade_final(
    cfg: &SimConfig,
    grid: &Grid,
    theta0: &ParameterField,
    dtheta: &Perturbation,
    degree: usize,
) -> Result<Vec<Vec<f64>>> {
    let mut out = vec![Vec::new(); degree + 1];
    solve_cascade(cfg, grid, theta0, dtheta, degree, |l, n, v| {
        if n == cfg.nt {
            out[l] = v.to_vec();
        }
    })?;
    Ok(out)
}

/// Result of comparing `v¹` with finite differences of full solves.
#[derive(Debug, Clone, PartialEq)]
pub struct FdCheck {
    pub eps: Vec<f64>,
    /// `‖v¹ − (u(θ₀+εδθ) − u(θ₀))/ε‖₂ / ‖v¹‖₂` at the final time.
    pub ratios: Vec<f64>,
    /// Set when `δθ = 0`: nothing to compare.
    pub skipped: bool,
}

pub fn frechet_fd_check(
    cfg: &SimConfig,
    grid: &Grid,
    theta0: &ParameterField,
    dtheta: &Perturbation,
    eps_list: &[f64],
) -> Result<FdCheck> {
    if dtheta.is_zero() {
        log::info!("zero perturbation direction: finite-difference check skipped");
        return Ok(FdCheck {
            eps: eps_list.to_vec(),
            ratios: Vec::new(),
            skipped: true,
        });
    }
    let final_field = |theta: &ParameterField| -> Result<Vec<f64>> {
        let mut last = Vec::new();
        FullSolver::new(cfg, grid, theta)?.run(|n, u| {
            if n == cfg.nt {
                last = u.to_vec();
            }
        })?;
        Ok(last)
    };
    let v1 = cascade_final(cfg, grid, theta0, dtheta, 1)?.swap_remove(1);
    let u0 = final_field(theta0)?;
    let v1_norm = norm2(&v1);
    let mut ratios = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let ue = final_field(&theta0.perturbed(dtheta, eps)?)?;
        let diff: Vec<f64> = v1
            .iter()
            .zip(ue.iter().zip(&u0))
            .map(|(v, (a, b))| v - (a - b) / eps)
            .collect();
        ratios.push(norm2(&diff) / v1_norm);
    }
    Ok(FdCheck {
        eps: eps_list.to_vec(),
        ratios,
        skipped: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg(bc: BcKind) -> SimConfig {
        let mut cfg = SimConfig::reference(bc);
        cfg.domain_extent = 10.0;
        cfg.nodes_per_side = 21;
        cfg.nt = 60;
        cfg.dt = 0.01;
        cfg.source_pos = (5.0, 5.0);
        cfg.source_freq = 5.0;
        cfg.source_delay = 0.2;
        cfg.medium.velocity = 5.0;
        cfg
    }

    #[test]
    fn rhs_edge_cases() {
        let g = Grid::new(1.0, 4).unwrap();
        let a = vec![0.3; 16];
        let t = Triple {
            prev: &a,
            curr: &a,
            next: &a,
        };
        let d = Perturbation::new(vec![1.0; 16]).unwrap();
        assert!(cascade_rhs(&g, 1, t, &d, 0.1).unwrap().iter().all(|v| *v == 0.0));
        assert!(matches!(cascade_rhs(&g, 0, t, &d, 0.1), Err(Error::Misuse(_))));

        let b: Vec<f64> = (0..16).map(|i| i as f64).collect();
        let c: Vec<f64> = (0..16).map(|i| (i * i) as f64).collect();
        let t = Triple {
            prev: &a,
            curr: &b,
            next: &c,
        };
        let r1 = cascade_rhs(&g, 1, t, &d, 0.1).unwrap();
        let r2 = cascade_rhs(&g, 2, t, &d, 0.1).unwrap();
        for (x, y) in r1.iter().zip(&r2) {
            assert_eq!(2.0 * x, *y);
        }
        let z = Perturbation::zero(16);
        assert!(cascade_rhs(&g, 3, t, &z, 0.1).unwrap().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn damping_derivative_coefficients() {
        // d/dα √(θ+αδ) = δ/(2√θ); d²/dα² = −δ²/(4 θ^{3/2})
        let g = Grid::new(1.0, 3).unwrap();
        let theta = ParameterField::new(vec![4.0; 9], "t").unwrap();
        let d = Perturbation::new(vec![2.0; 9]).unwrap();
        let dd = damping_derivatives(&g, &theta, &d, 2);
        let h = 0.5;
        assert!((dd[0][0] - h * 2.0 / 4.0).abs() < 1e-15);
        assert!((dd[1][0] + h * 4.0 / (4.0 * 8.0)).abs() < 1e-15);
        assert_eq!(dd[0][4], 0.0);
    }

    #[test]
    fn degree_zero_matches_full_solve() {
        let cfg = small_cfg(BcKind::Abc1);
        let g = Grid::from_config(&cfg).unwrap();
        let theta = ParameterField::homogeneous(&g, 5.0).unwrap();
        let d = Perturbation::new(vec![1e-3; g.node_count()]).unwrap();
        let mut casc = Vec::new();
        solve_cascade(&cfg, &g, &theta, &d, 0, |_, _, v| casc.push(v.to_vec())).unwrap();
        let mut full = Vec::new();
        FullSolver::new(&cfg, &g, &theta)
            .unwrap()
            .run(|_, u| full.push(u.to_vec()))
            .unwrap();
        assert_eq!(casc, full);
    }

    #[test]
    fn zero_direction_gives_zero_derivatives() {
        let cfg = small_cfg(BcKind::Abc1);
        let g = Grid::from_config(&cfg).unwrap();
        let theta = ParameterField::homogeneous(&g, 5.0).unwrap();
        let d = Perturbation::zero(g.node_count());
        solve_cascade(&cfg, &g, &theta, &d, 2, |l, _, v| {
            if l > 0 {
                assert!(v.iter().all(|x| *x == 0.0));
            }
        })
        .unwrap();
        let check = frechet_fd_check(&cfg, &g, &theta, &d, &[1e-2]).unwrap();
        assert!(check.skipped);
    }

    #[test]
    fn appending_levels_keeps_lower_levels() {
        let cfg = small_cfg(BcKind::Abc1);
        let g = Grid::from_config(&cfg).unwrap();
        let theta = ParameterField::homogeneous(&g, 5.0).unwrap();
        let d = Perturbation::new(g.coords().map(|(x, _)| 1e-3 * (1.0 + x)).collect()).unwrap();
        let a = cascade_final(&cfg, &g, &theta, &d, 1).unwrap();
        let b = cascade_final(&cfg, &g, &theta, &d, 2).unwrap();
        assert_eq!(a[0], b[0]);
        assert_eq!(a[1], b[1]);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 0), 1.0);
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(4, 3), 4.0);
    }
}
