//! A configured problem instance: grid, background, perturbation direction
//! and receivers, plus the end-to-end pipeline steps built on them.

use crate::basis::{
    build_augmented_basis, pod_basis, CascadeBasisBuilder, InnerProduct, PodResult, ProductKind,
    SnapshotBasis, SnapshotMatrix, Truncation,
};
use crate::cascade::CascadeSolver;
use crate::config::{BcKind, InnerKind, PodInner, SimConfig};
use crate::error::Result;
use crate::field::{make_perturbation, ParameterField, Perturbation, PerturbationShape};
use crate::grid::Grid;
use crate::inverse::{ReceiverLine, TraceRecorder, TraceSet};
use crate::rom::{project, ReducedOperators};
use crate::sem::{assemble_mass, FullSolver, StiffnessOperator};

#[derive(Debug, Clone)]
pub struct Problem {
    pub cfg: SimConfig,
    pub grid: Grid,
    pub theta0: ParameterField,
    pub dtheta: Perturbation,
    pub receivers: ReceiverLine,
    pub trace: ReceiverLine,
}

/// Per-level bases and their augmented combination.
#[derive(Debug, Clone)]
pub struct MorBasis {
    pub levels: Vec<SnapshotBasis>,
    pub basis: SnapshotBasis,
}

impl Problem {
    pub fn new(cfg: SimConfig) -> Result<Self> {
        cfg.validate()?;
        let grid = Grid::from_config(&cfg)?;
        let theta0 = ParameterField::from_medium(&grid, &cfg.medium)?;
        let dtheta = make_perturbation(&grid, &theta0, &PerturbationShape::Bump(cfg.perturbation))?;
        let receivers = ReceiverLine::new(&grid, &cfg.receivers)?;
        let trace = ReceiverLine::single(&grid, cfg.receivers.trace_point);
        Ok(Problem {
            cfg,
            grid,
            theta0,
            dtheta,
            receivers,
            trace,
        })
    }

    /// Inner product used by the QR bases. With `stiffness_fallback` set,
    /// absorbing runs (whose stiffness has constants in its kernel) use the
    /// mass product instead.
    pub fn inner_kind(&self) -> ProductKind {
        match (self.cfg.inner_product, self.cfg.stiffness_fallback, self.cfg.bc_kind) {
            (InnerKind::Stiffness, true, BcKind::Abc1) => ProductKind::Mass,
            (k, _, _) => k.into(),
        }
    }

    pub fn inner_product(&self, kind: ProductKind) -> InnerProduct {
        InnerProduct::new(
            kind,
            &assemble_mass(&self.grid, &self.theta0),
            &StiffnessOperator::new(&self.grid),
        )
    }

    pub fn full_solver(&self, alpha: f64) -> Result<FullSolver> {
        let theta = if alpha == 0.0 {
            self.theta0.clone()
        } else {
            self.theta0.perturbed(&self.dtheta, alpha)?
        };
        FullSolver::new(&self.cfg, &self.grid, &theta)
    }

    /// Full-order traces at `θ₀ + α δθ` on the receiver line.
    pub fn observe(&self, alpha: f64) -> Result<TraceSet> {
        let solver = self.full_solver(alpha)?;
        let mut rec = TraceRecorder::new(&self.receivers, self.cfg.dt);
        solver.run(|n, u| rec.push(n, u))?;
        Ok(rec.finish())
    }

    /// Cascade of degree `degree` compressed level by level, then merged.
    pub fn build_qr(&self, degree: usize) -> Result<MorBasis> {
        let inner = self.inner_product(self.inner_kind());
        let solver = CascadeSolver::new(&self.cfg, &self.grid, &self.theta0, &self.dtheta, degree)?;
        let mut builder = CascadeBasisBuilder::new(
            &inner,
            degree + 1,
            self.cfg.epsilon,
            self.cfg.reorth_passes,
            self.cfg.snapshot_stride,
        );
        solver.run(|l, n, v| builder.push(l, n, v))?;
        let levels = builder.finish()?;
        for (l, b) in levels.iter().enumerate() {
            let s = b.stats();
            log::info!(
                "level {l}: {} vectors from {} candidates ({} degenerate)",
                b.count(),
                s.candidates,
                s.degenerate
            );
        }
        let basis = build_augmented_basis(&levels, &inner, self.cfg.epsilon, self.cfg.reorth_passes)?;
        Ok(MorBasis { levels, basis })
    }

    /// Augmented basis from the first `degree + 1` levels of `mor`.
    pub fn augment(&self, mor: &MorBasis, degree: usize) -> Result<SnapshotBasis> {
        let kind = mor.levels[0].kind();
        build_augmented_basis(
            &mor.levels[..=degree],
            &self.inner_product(kind),
            self.cfg.epsilon,
            self.cfg.reorth_passes,
        )
    }

    /// POD of the `θ₀` snapshots taken every `pod.stride` steps.
    pub fn build_pod(&self, truncation: Option<Truncation>) -> Result<PodResult> {
        let solver = self.full_solver(0.0)?;
        let mut snaps = SnapshotMatrix::new(self.grid.node_count());
        let stride = self.cfg.pod.stride;
        solver.run(|n, u| snaps.push(n, u, stride))?;
        let truncation = truncation.unwrap_or(match self.cfg.pod.rank {
            Some(r) => Truncation::Rank(r),
            None => Truncation::Ratio(self.cfg.epsilon.sqrt()),
        });
        let mass = match self.cfg.pod.inner {
            PodInner::Mass => Some(solver.ops.mass.values().to_vec()),
            PodInner::Euclidean => None,
        };
        pod_basis(snaps.data, snaps.rows, mass.as_deref(), truncation)
    }

    /// Projected operators of the `θ₀` system onto `basis`.
    pub fn reduce(&self, basis: &SnapshotBasis) -> Result<ReducedOperators> {
        project(basis, &self.full_solver(0.0)?, &self.theta0, &self.dtheta)
    }
}
