//! Galerkin reduced model on a snapshot basis.
//!
//! With `u ≈ Φ a` the reduced system at `θ_α = θ₀ + α δθ` is
//!
//! ```text
//! M̂(α) ä + D̂(α) ȧ + K̂ a = f̂ r(t),   M̂(α) = Φᵀ M_θ₀ Φ + α Φᵀ M_δθ Φ
//! ```
//!
//! The mass is affine in `α` and projected once. The damping depends on
//! `√θ_α` and lives on the boundary only, so it is re-projected per `α`
//! from the boundary rows of `Φ`.

use nalgebra::{Cholesky, DMatrix, Dyn};

use crate::basis::{ProductKind, SnapshotBasis};
use crate::config::BcKind;
use crate::error::{Error, Result};
use crate::field::{ParameterField, Perturbation};
use crate::grid::Grid;
use crate::linalg::{axpy, dot, gemm_nn, gemm_tn, matvec, norm2};
use crate::sem::{check_finite, ricker, FullSolver};

fn symmetrize(a: &mut [f64], n: usize) {
    for j in 0..n {
        for i in 0..j {
            let s = 0.5 * (a[i + j * n] + a[j + i * n]);
            a[i + j * n] = s;
            a[j + i * n] = s;
        }
    }
}

/// `Φᵀ diag(w) Φ` for column-major `Φ` (`rows × n`).
fn project_diagonal(phi: &[f64], rows: usize, n: usize, w: &[f64]) -> Vec<f64> {
    let mut scaled = phi.to_vec();
    for col in scaled.chunks_exact_mut(rows.max(1)) {
        col.iter_mut().zip(w).for_each(|(v, wi)| *v *= wi);
    }
    let mut out = gemm_tn(phi, &scaled, rows, n, n);
    symmetrize(&mut out, n);
    out
}

/// Projected operators at `θ₀` plus what is needed to assemble any `α`.
#[derive(Debug, Clone)]
pub struct ReducedOperators {
    n: usize,
    bc: BcKind,
    dt: f64,
    nt: usize,
    freq: f64,
    delay: f64,
    kind: ProductKind,
    m0: Vec<f64>,
    mdelta: Vec<f64>,
    k: Vec<f64>,
    load: Vec<f64>,
    boundary_rows: Vec<f64>,
    boundary_weights: Vec<f64>,
    theta0_b: Vec<f64>,
    dtheta_b: Vec<f64>,
    theta0: Vec<f64>,
    dtheta: Vec<f64>,
}

/// Projects the operators of `solver` (built at `θ₀`) onto `basis`.
pub fn project(
    basis: &SnapshotBasis,
    solver: &FullSolver,
    theta0: &ParameterField,
    dtheta: &Perturbation,
) -> Result<ReducedOperators> {
    let grid = &solver.grid;
    let rows = grid.node_count();
    if basis.len() != rows || theta0.len() != rows || dtheta.len() != rows {
        return Err(Error::Dimension(format!(
            "basis length {}, theta {}, dtheta {}, grid {rows}",
            basis.len(),
            theta0.len(),
            dtheta.len()
        )));
    }
    let n = basis.count();
    if n == 0 {
        return Err(Error::Empty("basis has no vectors".into()));
    }
    let phi = basis.matrix();
    let m0 = project_diagonal(phi, rows, n, solver.ops.mass.values());
    let vol = grid.volume_weights();
    let md: Vec<f64> = vol.iter().zip(dtheta.values()).map(|(w, d)| w * d).collect();
    let mdelta = project_diagonal(phi, rows, n, &md);
    let k = if basis.kind() == ProductKind::Stiffness {
        let mut eye = vec![0.0; n * n];
        (0..n).for_each(|i| eye[i + i * n] = 1.0);
        eye
    } else {
        let mut kphi = vec![0.0; rows * n];
        for (src, dst) in basis.vectors().zip(kphi.chunks_exact_mut(rows)) {
            solver.ops.stiffness.apply(src, dst);
        }
        let mut k = gemm_tn(phi, &kphi, rows, n, n);
        symmetrize(&mut k, n);
        k
    };
    let src = solver.source.node;
    let load = (0..n)
        .map(|i| solver.source.amplitude * basis.vector(i)[src])
        .collect();
    let bnodes = grid.boundary_nodes();
    let nb = bnodes.len();
    let mut boundary_rows = vec![0.0; nb * n];
    for i in 0..n {
        let v = basis.vector(i);
        for (r, &b) in bnodes.iter().enumerate() {
            boundary_rows[r + i * nb] = v[b];
        }
    }
    let bw = grid.boundary_weights();
    Ok(ReducedOperators {
        n,
        bc: solver.ops.bc,
        dt: solver.ops.dt,
        nt: solver.nt,
        freq: solver.freq,
        delay: solver.delay,
        kind: basis.kind(),
        m0,
        mdelta,
        k,
        load,
        boundary_weights: bnodes.iter().map(|&b| bw[b]).collect(),
        theta0_b: bnodes.iter().map(|&b| theta0.values()[b]).collect(),
        dtheta_b: bnodes.iter().map(|&b| dtheta.values()[b]).collect(),
        boundary_rows,
        theta0: theta0.values().to_vec(),
        dtheta: dtheta.values().to_vec(),
    })
}

impl ReducedOperators {
    /// Basis size `N`.
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn bc(&self) -> BcKind {
        self.bc
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn nt(&self) -> usize {
        self.nt
    }

    pub fn kind(&self) -> ProductKind {
        self.kind
    }

    pub fn mass0(&self) -> &[f64] {
        &self.m0
    }

    pub fn mass_delta(&self) -> &[f64] {
        &self.mdelta
    }

    pub fn stiffness(&self) -> &[f64] {
        &self.k
    }

    pub fn load(&self) -> &[f64] {
        &self.load
    }

    pub fn source_signal(&self, step: usize) -> f64 {
        ricker(step as f64 * self.dt, self.freq, self.delay)
    }

    /// Rejects `α` for which `θ₀ + α δθ` is not positive somewhere.
    pub fn check_admissible(&self, alpha: f64) -> Result<()> {
        for (node, (t, d)) in self.theta0.iter().zip(&self.dtheta).enumerate() {
            let value = t + alpha * d;
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::NonPositiveTheta { node, value });
            }
        }
        Ok(())
    }

    pub fn mass_at(&self, alpha: f64) -> Vec<f64> {
        let mut m = self.m0.clone();
        axpy(alpha, &self.mdelta, &mut m);
        m
    }

    /// `D̂(α) = B_Φᵀ diag(b √θ_α) B_Φ` from the boundary rows only.
    pub fn damping_at(&self, alpha: f64) -> Vec<f64> {
        let w: Vec<f64> = self
            .boundary_weights
            .iter()
            .zip(self.theta0_b.iter().zip(&self.dtheta_b))
            .map(|(b, (t, d))| b * (t + alpha * d).sqrt())
            .collect();
        project_diagonal(&self.boundary_rows, w.len(), self.n, &w)
    }

    pub fn assemble_at_alpha(&self, alpha: f64) -> Result<ReducedSystem> {
        self.check_admissible(alpha)?;
        let n = self.n;
        let dt = self.dt;
        let mass = self.mass_at(alpha);
        let damping = match self.bc {
            BcKind::Abc1 => Some(self.damping_at(alpha)),
            BcKind::Dirichlet => None,
        };
        let chol = |a: &[f64]| -> Result<Cholesky<f64, Dyn>> {
            Cholesky::new(DMatrix::from_column_slice(n, n, a)).ok_or(Error::SingularReduced)
        };
        let mchol = chol(&mass)?;
        let fvec = DMatrix::from_column_slice(n, 1, &self.load);
        let start: Vec<f64> = mchol
            .solve(&fvec)
            .iter()
            .map(|v| 0.5 * dt * dt * v)
            .collect();
        let kmat = DMatrix::from_column_slice(n, n, &self.k);
        let (step_matrix, forcing) = match &damping {
            None => {
                let s = mchol.solve(&kmat);
                let g = mchol.solve(&fvec);
                (to_row_major(&s), g.iter().map(|v| dt * dt * v).collect())
            }
            Some(d) => {
                let mm = DMatrix::from_column_slice(n, n, &mass);
                let dd = DMatrix::from_column_slice(n, n, d);
                let a = &mm + &dd * (0.5 * dt);
                let achol = chol(a.as_slice())?;
                let p = achol.solve(&(&mm * 2.0 - &kmat * (dt * dt)));
                let q = achol.solve(&(&mm - &dd * (0.5 * dt)));
                let mut pq = vec![0.0; 2 * n * n];
                for i in 0..n {
                    for j in 0..n {
                        pq[i * 2 * n + j] = p[(i, j)];
                        pq[i * 2 * n + n + j] = -q[(i, j)];
                    }
                }
                let g = achol.solve(&fvec);
                (pq, g.iter().map(|v| dt * dt * v).collect())
            }
        };
        Ok(ReducedSystem {
            n,
            alpha,
            dt,
            nt: self.nt,
            freq: self.freq,
            delay: self.delay,
            mass,
            damping,
            stiffness: self.k.clone(),
            load: self.load.clone(),
            step_matrix,
            forcing,
            start,
        })
    }
}

fn to_row_major(m: &DMatrix<f64>) -> Vec<f64> {
    let (r, c) = m.shape();
    let mut out = vec![0.0; r * c];
    for i in 0..r {
        for j in 0..c {
            out[i * c + j] = m[(i, j)];
        }
    }
    out
}

/// Reduced system at one `α`, factorized for time stepping.
#[derive(Debug, Clone)]
pub struct ReducedSystem {
    n: usize,
    alpha: f64,
    dt: f64,
    nt: usize,
    freq: f64,
    delay: f64,
    pub mass: Vec<f64>,
    pub damping: Option<Vec<f64>>,
    pub stiffness: Vec<f64>,
    pub load: Vec<f64>,
    /// Dirichlet: `M̂⁻¹K̂` (N×N); absorbing: `[P | −Q]` (N×2N), row-major.
    step_matrix: Vec<f64>,
    /// `dt² (M̂ + dt/2 D̂)⁻¹ f̂`.
    forcing: Vec<f64>,
    /// `dt²/2 M̂⁻¹ f̂`.
    start: Vec<f64>,
}

/// Reduced coefficients at two consecutive time levels.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedState {
    pub a_prev: Vec<f64>,
    pub a_curr: Vec<f64>,
    pub step: usize,
}

impl ReducedSystem {
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// One leapfrog step with source amplitude `r` at the current level.
    /// `work` must hold `2N` values.
    pub fn step(&self, prev: &[f64], curr: &[f64], r: f64, out: &mut [f64], work: &mut [f64]) {
        let n = self.n;
        match self.damping {
            None => {
                matvec(&self.step_matrix, curr, &mut work[..n]);
                let h2 = self.dt * self.dt;
                for i in 0..n {
                    out[i] = 2.0 * curr[i] - prev[i] - h2 * work[i] + r * self.forcing[i];
                }
            }
            Some(_) => {
                work[..n].copy_from_slice(curr);
                work[n..2 * n].copy_from_slice(prev);
                matvec(&self.step_matrix, &work[..2 * n], out);
                axpy(r, &self.forcing, out);
            }
        }
    }

    /// `a¹` from zero data: `dt²/2 M̂⁻¹ f̂ r₀`.
    pub fn startup(&self, r0: f64, out: &mut [f64]) {
        for (o, s) in out.iter_mut().zip(&self.start) {
            *o = r0 * s;
        }
    }

    fn signal(&self, step: usize) -> f64 {
        ricker(step as f64 * self.dt, self.freq, self.delay)
    }

    /// Runs `nt` steps from `a⁰ = a0` with zero initial velocity and feeds
    /// `sink(n, aⁿ)` for `n = 1..=nt`.
    pub fn run_from<F: FnMut(usize, &[f64])>(&self, a0: &[f64], nt: usize, mut sink: F) -> Result<()> {
        let n = self.n;
        if a0.len() != n {
            return Err(Error::Dimension("initial coefficients length != N".into()));
        }
        let mut prev = a0.to_vec();
        let mut curr = vec![0.0; n];
        let mut next = vec![0.0; n];
        let mut work = vec![0.0; 2 * n];
        self.startup(self.signal(0), &mut curr);
        if a0.iter().any(|v| *v != 0.0) {
            // a¹ = a⁰ − dt²/2 M̂⁻¹ K̂ a⁰ (+ source part); damping drops out at rest
            let m = DMatrix::from_column_slice(n, n, &self.mass);
            let chol = Cholesky::new(m).ok_or(Error::SingularReduced)?;
            let mut ka = vec![0.0; n];
            for j in 0..n {
                axpy(a0[j], &self.stiffness[j * n..(j + 1) * n], &mut ka);
            }
            let corr = chol.solve(&DMatrix::from_column_slice(n, 1, &ka));
            let h = 0.5 * self.dt * self.dt;
            for i in 0..n {
                curr[i] += a0[i] - h * corr[i];
            }
        }
        check_finite(&curr, 1)?;
        sink(1, &curr);
        for step in 1..nt {
            self.step(&prev, &curr, self.signal(step), &mut next, &mut work);
            check_finite(&next, step + 1)?;
            sink(step + 1, &next);
            std::mem::swap(&mut prev, &mut curr);
            std::mem::swap(&mut curr, &mut next);
        }
        Ok(())
    }

    pub fn run<F: FnMut(usize, &[f64])>(&self, sink: F) -> Result<()> {
        self.run_from(&vec![0.0; self.n], self.nt, sink)
    }

    /// Coefficient trajectory, column-major `N × nt` (column `n−1` is `aⁿ`).
    pub fn trajectory(&self) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.n * self.nt);
        self.run(|_, a| out.extend_from_slice(a))?;
        Ok(out)
    }
}

/// `u = Σ aᵢ φᵢ`.
pub fn reconstruct(basis: &SnapshotBasis, a: &[f64]) -> Result<Vec<f64>> {
    if a.len() != basis.count() {
        return Err(Error::Dimension(format!(
            "{} coefficients for {} basis vectors",
            a.len(),
            basis.count()
        )));
    }
    Ok(gemm_nn(basis.matrix(), a, basis.len(), basis.count(), 1))
}

/// `Φ A` for a column-major coefficient block `A` (`N × cols`).
pub fn reconstruct_many(basis: &SnapshotBasis, coeffs: &[f64], cols: usize) -> Vec<f64> {
    gemm_nn(basis.matrix(), coeffs, basis.len(), basis.count(), cols)
}

/// Coefficients `aᵢ = ⟨u, φᵢ⟩` in the basis inner product.
pub fn project_state(basis: &SnapshotBasis, inner: &crate::basis::InnerProduct, u: &[f64]) -> Vec<f64> {
    let mut au = vec![0.0; u.len()];
    inner.apply(u, &mut au);
    basis.vectors().map(|v| dot(v, &au)).collect()
}

/// Taylor polynomial `Σ αˡ/ℓ! vˡ`.
pub fn taylor_reconstruct(levels: &[&[f64]], alpha: f64) -> Vec<f64> {
    let len = levels.first().map_or(0, |v| v.len());
    let mut out = vec![0.0; len];
    let mut c = 1.0;
    for (l, v) in levels.iter().enumerate() {
        if l > 0 {
            c *= alpha / l as f64;
        }
        axpy(c, v, &mut out);
    }
    out
}

/// Steps whose reference norm is below this fraction of the largest one are
/// left out of the average.
pub const ERROR_GUARD: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorSeries {
    /// Per-step `‖ref − test‖₂ / ‖ref‖₂`; NaN for excluded steps.
    pub errors: Vec<f64>,
    pub ref_norms: Vec<f64>,
    pub average: f64,
    pub excluded: usize,
}

/// Streaming accumulator for [`ErrorSeries`].
#[derive(Debug, Clone, Default)]
pub struct ErrorAccumulator {
    diff: Vec<f64>,
    refs: Vec<f64>,
}

impl ErrorAccumulator {
    pub fn new() -> Self {
        ErrorAccumulator::default()
    }

    pub fn push(&mut self, reference: &[f64], test: &[f64]) -> Result<()> {
        if reference.len() != test.len() {
            return Err(Error::Dimension(format!(
                "reference has {} nodes, test has {}",
                reference.len(),
                test.len()
            )));
        }
        let mut acc = [0.0f64; 4];
        let mut i = 0;
        for (a, b) in reference.iter().zip(test) {
            let d = a - b;
            acc[i & 3] += d * d;
            i += 1;
        }
        self.diff.push(((acc[0] + acc[2]) + (acc[1] + acc[3])).sqrt());
        self.refs.push(norm2(reference));
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.refs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.refs.is_empty()
    }

    pub fn finish(self) -> ErrorSeries {
        let max = self.refs.iter().copied().fold(0.0, f64::max);
        let cut = ERROR_GUARD * max;
        let mut sum = 0.0;
        let mut used = 0usize;
        let errors: Vec<f64> = self
            .diff
            .iter()
            .zip(&self.refs)
            .map(|(d, r)| {
                if *r > cut && *r > 0.0 {
                    let e = d / r;
                    sum += e;
                    used += 1;
                    e
                } else {
                    f64::NAN
                }
            })
            .collect();
        let excluded = errors.len() - used;
        ErrorSeries {
            errors,
            ref_norms: self.refs,
            average: if used > 0 { sum / used as f64 } else { 0.0 },
            excluded,
        }
    }
}

pub fn relative_error_series<R, T, A, B>(reference: R, test: T) -> Result<ErrorSeries>
where
    R: IntoIterator<Item = A>,
    T: IntoIterator<Item = B>,
    A: AsRef<[f64]>,
    B: AsRef<[f64]>,
{
    let mut acc = ErrorAccumulator::new();
    let mut t = test.into_iter();
    for r in reference {
        let x = t
            .next()
            .ok_or_else(|| Error::Dimension("test stream shorter than reference".into()))?;
        acc.push(r.as_ref(), x.as_ref())?;
    }
    if t.next().is_some() {
        return Err(Error::Dimension("test stream longer than reference".into()));
    }
    Ok(acc.finish())
}

/// Compares a streamed full-order run against a reduced trajectory,
/// reconstructing the reduced fields in blocks.
#[derive(Debug)]
pub struct StreamingComparator<'a> {
    basis: &'a SnapshotBasis,
    coeffs: &'a [f64],
    chunk: usize,
    buffer: Vec<f64>,
    steps: Vec<usize>,
    acc: ErrorAccumulator,
    error: Option<Error>,
}

impl<'a> StreamingComparator<'a> {
    /// `coeffs` is the trajectory from [`ReducedSystem::trajectory`].
    pub fn new(basis: &'a SnapshotBasis, coeffs: &'a [f64], chunk: usize) -> Self {
        StreamingComparator {
            basis,
            coeffs,
            chunk: chunk.max(1),
            buffer: Vec::new(),
            steps: Vec::new(),
            acc: ErrorAccumulator::new(),
            error: None,
        }
    }

    /// Feeds the full-order field at step `n` (1-based).
    pub fn push(&mut self, n: usize, u: &[f64]) {
        self.buffer.extend_from_slice(u);
        self.steps.push(n);
        if self.steps.len() == self.chunk {
            self.flush();
        }
    }

    fn flush(&mut self) {
        if self.steps.is_empty() || self.error.is_some() {
            return;
        }
        let nb = self.basis.count();
        let rows = self.basis.len();
        let mut block = Vec::with_capacity(nb * self.steps.len());
        for &n in &self.steps {
            match self.coeffs.get((n - 1) * nb..n * nb) {
                Some(c) => block.extend_from_slice(c),
                None => {
                    self.error = Some(Error::Dimension(format!("no reduced coefficients for step {n}")));
                    return;
                }
            }
        }
        let rec = reconstruct_many(self.basis, &block, self.steps.len());
        for (r, t) in self.buffer.chunks_exact(rows).zip(rec.chunks_exact(rows)) {
            if let Err(e) = self.acc.push(r, t) {
                self.error = Some(e);
                return;
            }
        }
        self.buffer.clear();
        self.steps.clear();
    }

    pub fn finish(mut self) -> Result<ErrorSeries> {
        self.flush();
        match self.error {
            Some(e) => Err(e),
            None => Ok(self.acc.finish()),
        }
    }
}

/// Full-order solve at `θ_α` compared step by step with the reduced
/// trajectory `coeffs`.
pub fn compare_with_full(
    solver: &FullSolver,
    basis: &SnapshotBasis,
    coeffs: &[f64],
) -> Result<ErrorSeries> {
    let mut cmp = StreamingComparator::new(basis, coeffs, 64);
    solver.run(|n, u| cmp.push(n, u))?;
    cmp.finish()
}

/// Builds the full-order solver at `θ₀ + α δθ` on `grid`.
pub fn full_solver_at(
    cfg: &crate::SimConfig,
    grid: &Grid,
    theta0: &ParameterField,
    dtheta: &Perturbation,
    alpha: f64,
) -> Result<FullSolver> {
    FullSolver::new(cfg, grid, &theta0.perturbed(dtheta, alpha)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn taylor_edge_cases() {
        let v0 = [1.0, 2.0];
        let v1 = [3.0, -1.0];
        let v2 = [4.0, 4.0];
        assert_eq!(taylor_reconstruct(&[&v0, &v1, &v2], 0.0), v0.to_vec());
        assert_eq!(taylor_reconstruct(&[&v0], 7.0), v0.to_vec());
        let p = taylor_reconstruct(&[&v0, &v1, &v2], 0.5);
        assert_eq!(p, vec![1.0 + 1.5 + 0.5, 2.0 - 0.5 + 0.5]);
    }

    #[test]
    fn error_series_basics() {
        let r = vec![vec![1.0, 2.0], vec![0.0, 0.0], vec![3.0, 4.0]];
        let same = relative_error_series(&r, &r).unwrap();
        assert_eq!(same.excluded, 1);
        assert_eq!(same.average, 0.0);
        let scaled: Vec<Vec<f64>> = r.iter().map(|v| v.iter().map(|x| 1.01 * x).collect()).collect();
        let s = relative_error_series(&r, &scaled).unwrap();
        assert!((s.errors[0] - 0.01).abs() < 1e-14);
        assert!((s.errors[2] - 0.01).abs() < 1e-14);
        assert!(s.errors[1].is_nan());
        assert!(relative_error_series(&r, &r[..2]).is_err());
    }

    #[test]
    fn symmetrize_averages() {
        let mut a = vec![1.0, 2.0, 4.0, 5.0];
        symmetrize(&mut a, 2);
        assert_eq!(a, vec![1.0, 3.0, 3.0, 5.0]);
    }

    fn oscillator(m: f64, k: f64, dt: f64) -> ReducedSystem {
        ReducedSystem {
            n: 1,
            alpha: 0.0,
            dt,
            nt: 0,
            freq: 1.0,
            delay: 0.0,
            mass: vec![m],
            damping: None,
            stiffness: vec![k],
            load: vec![0.0],
            step_matrix: vec![k / m],
            forcing: vec![0.0],
            start: vec![0.0],
        }
    }

    #[test]
    fn scalar_leapfrog_matches_discrete_cosine() {
        // a_n = cos(nφ) with cos φ = 1 − dt²k/(2m) solves the recurrence
        // and the Taylor startup exactly.
        let (m, k, dt): (f64, f64, f64) = (2.0, 50.0, 0.05);
        let phi = (1.0 - dt * dt * k / (2.0 * m)).acos();
        let mut got = Vec::new();
        oscillator(m, k, dt).run_from(&[1.0], 400, |_, a| got.push(a[0])).unwrap();
        for (i, a) in got.iter().enumerate() {
            let want = ((i + 1) as f64 * phi).cos();
            assert!((a - want).abs() <= 1e-10, "step {}: {a} vs {want}", i + 1);
        }
    }

    #[test]
    fn scalar_leapfrog_blows_up_past_stability_limit() {
        let (m, k) = (1.0, 1.0);
        let mut peak = 0.0f64;
        oscillator(m, k, 2.01).run_from(&[1.0], 200, |_, a| peak = peak.max(a[0].abs())).unwrap_or(());
        assert!(peak > 1e3 || peak.is_nan());
        let mut bounded = 0.0f64;
        oscillator(m, k, 1.99).run_from(&[1.0], 2000, |_, a| bounded = bounded.max(a[0].abs())).unwrap();
        assert!(bounded <= 1.0 + 1e-9);
    }
}
