//! Orthonormal snapshot bases: streaming truncated Gram-Schmidt per level,
//! the time-ordered augmented basis over all levels, and a POD baseline.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::config::{InnerKind, PodInner};
use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, gemm_nn, gemm_tn, scale};
use crate::sem::{DiagonalOperator, StiffnessOperator};

/// Relative tolerance below which a snapshot has no energy in the stiffness
/// inner product and is skipped.
pub const DEGENERACY_TOL: f64 = 1e-14;

/// Pythagorean estimates are trusted for rejections only when `ε` is well
/// above roundoff.
const FAST_REJECT_MIN_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProductKind {
    Stiffness,
    Mass,
    Euclidean,
}

impl ProductKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ProductKind::Stiffness => "stiffness",
            ProductKind::Mass => "mass",
            ProductKind::Euclidean => "euclidean",
        }
    }
}

impl std::str::FromStr for ProductKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stiffness" => Ok(ProductKind::Stiffness),
            "mass" => Ok(ProductKind::Mass),
            "euclidean" => Ok(ProductKind::Euclidean),
            _ => Err(Error::invalid("inner_product", format!("unknown inner product '{s}'"))),
        }
    }
}

impl From<InnerKind> for ProductKind {
    fn from(k: InnerKind) -> Self {
        match k {
            InnerKind::Stiffness => ProductKind::Stiffness,
            InnerKind::Mass => ProductKind::Mass,
        }
    }
}

impl From<PodInner> for ProductKind {
    fn from(k: PodInner) -> Self {
        match k {
            PodInner::Euclidean => ProductKind::Euclidean,
            PodInner::Mass => ProductKind::Mass,
        }
    }
}

/// Inner product `⟨u, v⟩ = uᵀ A v` with `A` the stiffness, the lumped mass
/// or the identity. The mass diagonal is kept for every kind so the
/// stiffness degeneracy guard can compare against it.
#[derive(Debug, Clone)]
pub struct InnerProduct {
    kind: ProductKind,
    mass: Vec<f64>,
    stiffness: StiffnessOperator,
    guard: f64,
}

impl InnerProduct {
    pub fn new(kind: ProductKind, mass: &DiagonalOperator, stiffness: &StiffnessOperator) -> Self {
        InnerProduct {
            kind,
            mass: mass.values().to_vec(),
            stiffness: stiffness.clone(),
            guard: DEGENERACY_TOL,
        }
    }

    pub fn kind(&self) -> ProductKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn guard_tolerance(&self) -> f64 {
        self.guard
    }

    pub fn mass_weights(&self) -> &[f64] {
        &self.mass
    }

    /// `out = A u`.
    pub fn apply(&self, u: &[f64], out: &mut [f64]) {
        match self.kind {
            ProductKind::Stiffness => self.stiffness.apply(u, out),
            ProductKind::Mass => {
                for ((o, &w), &x) in out.iter_mut().zip(&self.mass).zip(u) {
                    *o = w * x;
                }
            }
            ProductKind::Euclidean => out.copy_from_slice(u),
        }
    }

    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        match self.kind {
            ProductKind::Stiffness => {
                let mut kv = vec![0.0; v.len()];
                self.stiffness.apply(v, &mut kv);
                dot(u, &kv)
            }
            ProductKind::Mass => crate::linalg::wdot(u, &self.mass, v),
            ProductKind::Euclidean => dot(u, v),
        }
    }

    /// True when `s` carries (numerically) no energy. `ss` is `⟨s, s⟩`.
    fn degenerate(&self, s: &[f64], ss: f64) -> bool {
        if !(ss > 0.0) {
            return true;
        }
        match self.kind {
            ProductKind::Stiffness => ss < self.guard * crate::linalg::wdot(s, &self.mass, s),
            _ => false,
        }
    }
}

/// Where a basis vector came from: cascade level and time step. For POD
/// modes `step` is the 1-based mode index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Provenance {
    pub level: usize,
    pub step: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BasisStats {
    pub candidates: usize,
    pub accepted: usize,
    pub rejected: usize,
    pub degenerate: usize,
}

/// Orthonormal vectors stored contiguously (column-major `len × count`).
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotBasis {
    len: usize,
    data: Vec<f64>,
    provenance: Vec<Provenance>,
    kind: ProductKind,
    epsilon: f64,
    stats: BasisStats,
}

impl SnapshotBasis {
    pub fn empty(len: usize, kind: ProductKind, epsilon: f64) -> Self {
        SnapshotBasis {
            len,
            data: Vec::new(),
            provenance: Vec::new(),
            kind,
            epsilon,
            stats: BasisStats::default(),
        }
    }

    /// Rebuilds a basis from stored parts (no orthonormality check).
    pub fn from_parts(
        len: usize,
        data: Vec<f64>,
        provenance: Vec<Provenance>,
        kind: ProductKind,
        epsilon: f64,
    ) -> Result<Self> {
        if len == 0 || data.len() != len * provenance.len() {
            return Err(Error::Dimension(format!(
                "basis data has {} values for {} vectors of length {len}",
                data.len(),
                provenance.len()
            )));
        }
        let count = provenance.len();
        Ok(SnapshotBasis {
            len,
            data,
            provenance,
            kind,
            epsilon,
            stats: BasisStats {
                candidates: count,
                accepted: count,
                ..BasisStats::default()
            },
        })
    }

    /// Number of vectors `N`.
    pub fn count(&self) -> usize {
        self.provenance.len()
    }

    pub fn is_empty(&self) -> bool {
        self.provenance.is_empty()
    }

    /// Length of each vector (node count).
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn vector(&self, i: usize) -> &[f64] {
        &self.data[i * self.len..(i + 1) * self.len]
    }

    pub fn vectors(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.len.max(1))
    }

    /// Column-major `len × count` matrix.
    pub fn matrix(&self) -> &[f64] {
        &self.data
    }

    pub fn provenance(&self) -> &[Provenance] {
        &self.provenance
    }

    pub fn kind(&self) -> ProductKind {
        self.kind
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn stats(&self) -> BasisStats {
        self.stats
    }

    /// Number of vectors per cascade level, indices `0..=max level`.
    pub fn level_counts(&self) -> Vec<usize> {
        let top = self.provenance.iter().map(|p| p.level).max();
        let mut out = vec![0; top.map_or(0, |t| t + 1)];
        for p in &self.provenance {
            out[p.level] += 1;
        }
        out
    }

    fn push(&mut self, v: &[f64], prov: Provenance) {
        self.data.extend_from_slice(v);
        self.provenance.push(prov);
    }

    /// Gram matrix `Φᵀ A Φ` (column-major `N × N`).
    pub fn gram(&self, inner: &InnerProduct) -> Vec<f64> {
        let n = self.count();
        let mut applied = vec![0.0; self.data.len()];
        for (src, dst) in self.vectors().zip(applied.chunks_exact_mut(self.len.max(1))) {
            inner.apply(src, dst);
        }
        gemm_tn(&self.data, &applied, self.len, n, n)
    }

    /// `(max |G_ij|, i ≠ j; max |G_ii − 1|)` of the Gram matrix.
    pub fn orthonormality_error(&self, inner: &InnerProduct) -> (f64, f64) {
        let n = self.count();
        let g = self.gram(inner);
        let mut off = 0.0f64;
        let mut diag = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                let v = g[i + j * n];
                if i == j {
                    diag = diag.max((v - 1.0).abs());
                } else {
                    off = off.max(v.abs());
                }
            }
        }
        (off, diag)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Accepted,
    Rejected,
    Degenerate,
}

/// Incremental truncated Gram-Schmidt. Owns the basis under construction
/// and the scratch buffers reused across candidates.
#[derive(Debug, Clone)]
pub struct GsBuilder<'a> {
    inner: &'a InnerProduct,
    basis: SnapshotBasis,
    reorth_passes: usize,
    applied: Vec<f64>,
    residual: Vec<f64>,
    coeffs: Vec<f64>,
}

impl<'a> GsBuilder<'a> {
    pub fn new(inner: &'a InnerProduct, epsilon: f64, reorth_passes: usize) -> Self {
        let len = inner.len();
        GsBuilder::from_basis(inner, SnapshotBasis::empty(len, inner.kind(), epsilon), reorth_passes)
    }

    pub fn from_basis(inner: &'a InnerProduct, basis: SnapshotBasis, reorth_passes: usize) -> Self {
        let len = basis.len();
        GsBuilder {
            inner,
            basis,
            reorth_passes,
            applied: vec![0.0; len],
            residual: vec![0.0; len],
            coeffs: Vec::new(),
        }
    }

    pub fn basis(&self) -> &SnapshotBasis {
        &self.basis
    }

    pub fn finish(self) -> SnapshotBasis {
        self.basis
    }

    /// `coeffs = Φᵀ A x`, given `applied = A x`.
    fn project_applied(&mut self) {
        let n = self.basis.count();
        self.coeffs.clear();
        self.coeffs
            .extend((0..n).map(|k| dot(self.basis.vector(k), &self.applied)));
    }

    /// `residual -= Φ coeffs`.
    fn subtract(&mut self) {
        for (k, &c) in self.coeffs.iter().enumerate() {
            axpy(-c, self.basis.vector(k), &mut self.residual);
        }
    }

    /// Tests `s` against the current basis and appends its normalized
    /// residual when `‖r‖² > ε ‖s‖²`.
    pub fn try_accept(&mut self, s: &[f64], prov: Provenance) -> Result<Decision> {
        if s.len() != self.basis.len {
            return Err(Error::Dimension(format!(
                "snapshot has {} entries, basis vectors have {}",
                s.len(),
                self.basis.len
            )));
        }
        let eps = self.basis.epsilon;
        self.basis.stats.candidates += 1;
        self.inner.apply(s, &mut self.applied);
        let ss = dot(s, &self.applied);
        if self.inner.degenerate(s, ss) {
            self.basis.stats.degenerate += 1;
            log::debug!("degenerate snapshot at level {} step {} skipped", prov.level, prov.step);
            return Ok(Decision::Degenerate);
        }
        self.project_applied();
        if eps >= FAST_REJECT_MIN_EPS {
            let captured: f64 = self.coeffs.iter().map(|c| c * c).sum();
            if ss - captured < 0.5 * eps * ss {
                self.basis.stats.rejected += 1;
                return Ok(Decision::Rejected);
            }
        }
        self.residual.copy_from_slice(s);
        self.subtract();
        self.inner.apply(&self.residual, &mut self.applied);
        let rr = dot(&self.residual, &self.applied);
        if !(rr > eps * ss) {
            self.basis.stats.rejected += 1;
            return Ok(Decision::Rejected);
        }
        for _ in 0..self.reorth_passes {
            self.project_applied();
            self.subtract();
            self.inner.apply(&self.residual, &mut self.applied);
        }
        let norm = dot(&self.residual, &self.applied).sqrt();
        scale(1.0 / norm, &mut self.residual);
        let v = std::mem::take(&mut self.residual);
        self.basis.push(&v, prov);
        self.residual = v;
        self.basis.stats.accepted += 1;
        Ok(Decision::Accepted)
    }
}

/// One-shot form of [`GsBuilder::try_accept`] on an existing basis.
pub fn gs_try_accept(
    s: &[f64],
    prov: Provenance,
    basis: &mut SnapshotBasis,
    inner: &InnerProduct,
    reorth_passes: usize,
) -> Result<Decision> {
    if basis.kind != inner.kind() {
        return Err(Error::InnerProductMismatch(format!(
            "basis is {}-orthonormal, inner product is {}",
            basis.kind.as_str(),
            inner.kind().as_str()
        )));
    }
    let taken = std::mem::replace(basis, SnapshotBasis::empty(basis.len, basis.kind, basis.epsilon));
    let mut b = GsBuilder::from_basis(inner, taken, reorth_passes);
    let d = b.try_accept(s, prov);
    *basis = b.finish();
    d
}

/// Whether step `n` (1-based) is a snapshot candidate.
pub fn is_candidate(step: usize, stride: usize) -> bool {
    step >= 1 && (step - 1) % stride.max(1) == 0
}

/// Builds the basis of one level from a time-ordered stream of
/// `(step, snapshot)` pairs, keeping every `stride`-th step.
pub fn build_level_basis<I, V>(
    level: usize,
    stream: I,
    inner: &InnerProduct,
    epsilon: f64,
    reorth_passes: usize,
    stride: usize,
) -> Result<SnapshotBasis>
where
    I: IntoIterator<Item = (usize, V)>,
    V: AsRef<[f64]>,
{
    let mut b = GsBuilder::new(inner, epsilon, reorth_passes);
    for (step, s) in stream {
        if is_candidate(step, stride) {
            b.try_accept(s.as_ref(), Provenance { level, step })?;
        }
    }
    Ok(b.finish())
}

/// Per-level builders fed directly from a cascade sink.
#[derive(Debug)]
pub struct CascadeBasisBuilder<'a> {
    levels: Vec<GsBuilder<'a>>,
    stride: usize,
    error: Option<Error>,
}

impl<'a> CascadeBasisBuilder<'a> {
    pub fn new(
        inner: &'a InnerProduct,
        levels: usize,
        epsilon: f64,
        reorth_passes: usize,
        stride: usize,
    ) -> Self {
        CascadeBasisBuilder {
            levels: (0..levels)
                .map(|_| GsBuilder::new(inner, epsilon, reorth_passes))
                .collect(),
            stride,
            error: None,
        }
    }

    /// Matches the cascade sink signature `(level, step, field)`.
    pub fn push(&mut self, level: usize, step: usize, v: &[f64]) {
        if self.error.is_some() || !is_candidate(step, self.stride) {
            return;
        }
        if let Err(e) = self.levels[level].try_accept(v, Provenance { level, step }) {
            self.error = Some(e.at_level(level));
        }
    }

    pub fn finish(self) -> Result<Vec<SnapshotBasis>> {
        match self.error {
            Some(e) => Err(e),
            None => Ok(self.levels.into_iter().map(GsBuilder::finish).collect()),
        }
    }
}

/// Merges the level bases ordered by `(step, level)` and compresses the
/// merged sequence once more.
pub fn build_augmented_basis(
    level_bases: &[SnapshotBasis],
    inner: &InnerProduct,
    epsilon: f64,
    reorth_passes: usize,
) -> Result<SnapshotBasis> {
    for b in level_bases {
        if b.kind != inner.kind() {
            return Err(Error::InnerProductMismatch(format!(
                "level basis is {}-orthonormal, requested {}",
                b.kind.as_str(),
                inner.kind().as_str()
            )));
        }
        if b.len != inner.len() {
            return Err(Error::Dimension("level basis length != node count".into()));
        }
    }
    if level_bases.len() == 1 {
        return Ok(level_bases[0].clone());
    }
    let mut order: Vec<(Provenance, usize, usize)> = level_bases
        .iter()
        .enumerate()
        .flat_map(|(b, basis)| {
            basis
                .provenance
                .iter()
                .enumerate()
                .map(move |(i, p)| (*p, b, i))
        })
        .collect();
    order.sort_by_key(|(p, b, i)| (p.step, p.level, *b, *i));
    let mut gs = GsBuilder::new(inner, epsilon, reorth_passes);
    for (p, b, i) in order {
        gs.try_accept(level_bases[b].vector(i), p)?;
    }
    Ok(gs.finish())
}

/// Column-major snapshot matrix collected with a stride filter.
#[derive(Debug, Clone, Default)]
pub struct SnapshotMatrix {
    pub rows: usize,
    pub data: Vec<f64>,
    pub steps: Vec<usize>,
}

impl SnapshotMatrix {
    pub fn new(rows: usize) -> Self {
        SnapshotMatrix {
            rows,
            data: Vec::new(),
            steps: Vec::new(),
        }
    }

    pub fn cols(&self) -> usize {
        self.steps.len()
    }

    pub fn push(&mut self, step: usize, v: &[f64], stride: usize) {
        if is_candidate(step, stride) {
            assert_eq!(v.len(), self.rows);
            self.data.extend_from_slice(v);
            self.steps.push(step);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Truncation {
    Rank(usize),
    /// Keep `σ_k` while `σ_k / σ_1 ≥ threshold`.
    Ratio(f64),
}

#[derive(Debug, Clone)]
pub struct PodResult {
    pub basis: SnapshotBasis,
    /// All singular values in decreasing order.
    pub singular_values: Vec<f64>,
}

/// Modified Gram-Schmidt in the weighted inner product, in place.
fn mgs_columns(data: &mut [f64], rows: usize, weights: Option<&[f64]>) {
    let cols = data.len() / rows;
    let ip = |a: &[f64], b: &[f64]| match weights {
        Some(w) => crate::linalg::wdot(a, w, b),
        None => dot(a, b),
    };
    for j in 0..cols {
        let (done, rest) = data.split_at_mut(j * rows);
        let v = &mut rest[..rows];
        for k in 0..j {
            let q = &done[k * rows..(k + 1) * rows];
            let c = ip(q, v);
            axpy(-c, q, v);
        }
        let nrm = ip(v, v).sqrt();
        scale(1.0 / nrm, v);
    }
}

/// Truncated POD by the method of snapshots. `snapshots` is column-major
/// `rows × cols`; `mass` selects the weighted inner product.
pub fn pod_basis(
    mut snapshots: Vec<f64>,
    rows: usize,
    mass: Option<&[f64]>,
    truncation: Truncation,
) -> Result<PodResult> {
    if rows == 0 || snapshots.is_empty() {
        return Err(Error::Empty("snapshot matrix is empty".into()));
    }
    if snapshots.len() % rows != 0 {
        return Err(Error::Dimension("snapshot data is not a whole number of columns".into()));
    }
    let cols = snapshots.len() / rows;
    let sqrt_w: Option<Vec<f64>> = mass.map(|w| w.iter().map(|x| x.sqrt()).collect());
    if let Some(sw) = &sqrt_w {
        if sw.len() != rows {
            return Err(Error::Dimension("mass weights length != rows".into()));
        }
        for col in snapshots.chunks_exact_mut(rows) {
            col.iter_mut().zip(sw).for_each(|(v, s)| *v *= s);
        }
    }
    let gram = gemm_tn(&snapshots, &snapshots, rows, cols, cols);
    let eig = SymmetricEigen::new(DMatrix::from_vec(cols, cols, gram));
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut v = Vec::with_capacity(cols * cols);
    for &i in &order {
        v.extend(eig.eigenvectors.column(i).iter());
    }
    let sv = gemm_nn(&snapshots, &v, rows, cols, cols);
    let mut sigma: Vec<f64> = sv.chunks_exact(rows).map(crate::linalg::norm2).collect();
    // recomputed norms may break the eigenvalue order at roundoff level
    let mut perm: Vec<usize> = (0..cols).collect();
    perm.sort_by(|&a, &b| sigma[b].total_cmp(&sigma[a]));
    sigma = perm.iter().map(|&i| sigma[i]).collect();
    let s1 = sigma[0];
    if !(s1 > 0.0) {
        return Err(Error::Empty("snapshot matrix is zero".into()));
    }
    let numerical_rank = sigma.iter().take_while(|&&s| s > 1e-12 * s1).count();
    let k = match truncation {
        Truncation::Rank(r) => {
            if r > numerical_rank {
                log::warn!("requested POD rank {r} exceeds numerical rank {numerical_rank}");
            }
            r.min(numerical_rank)
        }
        Truncation::Ratio(t) => sigma
            .iter()
            .take(numerical_rank)
            .take_while(|&&s| s / s1 >= t)
            .count(),
    };
    let mut u = Vec::with_capacity(rows * k);
    for &i in perm.iter().take(k) {
        let col = &sv[i * rows..(i + 1) * rows];
        let inv = 1.0 / sigma_of(col);
        match &sqrt_w {
            Some(sw) => u.extend(col.iter().zip(sw).map(|(x, s)| x * inv / s)),
            None => u.extend(col.iter().map(|x| x * inv)),
        }
    }
    for _ in 0..2 {
        mgs_columns(&mut u, rows, mass);
    }
    let kind = if mass.is_some() {
        ProductKind::Mass
    } else {
        ProductKind::Euclidean
    };
    let provenance = (1..=k).map(|step| Provenance { level: 0, step }).collect();
    let mut basis = SnapshotBasis {
        len: rows,
        data: u,
        provenance,
        kind,
        epsilon: match truncation {
            Truncation::Ratio(t) => t * t,
            Truncation::Rank(_) => 0.0,
        },
        stats: BasisStats::default(),
    };
    basis.stats = BasisStats {
        candidates: cols,
        accepted: k,
        rejected: cols - k,
        degenerate: 0,
    };
    Ok(PodResult {
        basis,
        singular_values: sigma,
    })
}

fn sigma_of(col: &[f64]) -> f64 {
    crate::linalg::norm2(col)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::ParameterField;
    use crate::grid::Grid;
    use crate::sem::assemble_mass;

    fn setup(kind: ProductKind) -> InnerProduct {
        let g = Grid::new(1.0, 6).unwrap();
        let theta = ParameterField::homogeneous(&g, 1.0).unwrap();
        InnerProduct::new(kind, &assemble_mass(&g, &theta), &StiffnessOperator::new(&g))
    }

    fn bump(k: usize) -> Vec<f64> {
        (0..36).map(|i| ((i * (k + 2)) as f64 * 0.37).sin()).collect()
    }

    #[test]
    fn first_vector_is_normalized_snapshot() {
        let ip = setup(ProductKind::Mass);
        let mut b = GsBuilder::new(&ip, 0.01, 1);
        let s = bump(0);
        assert_eq!(b.try_accept(&s, Provenance { level: 0, step: 1 }).unwrap(), Decision::Accepted);
        let nrm = ip.inner(&s, &s).sqrt();
        for (p, q) in b.basis().vector(0).iter().zip(&s) {
            assert!((p - q / nrm).abs() < 1e-14);
        }
    }

    #[test]
    fn duplicate_rejected_and_zero_degenerate() {
        let ip = setup(ProductKind::Euclidean);
        let mut b = GsBuilder::new(&ip, 0.01, 1);
        let s = bump(1);
        b.try_accept(&s, Provenance { level: 0, step: 1 }).unwrap();
        let dup = b.basis().vector(0).to_vec();
        assert_eq!(b.try_accept(&dup, Provenance { level: 0, step: 2 }).unwrap(), Decision::Rejected);
        let z = vec![0.0; 36];
        assert_eq!(b.try_accept(&z, Provenance { level: 0, step: 3 }).unwrap(), Decision::Degenerate);
        assert_eq!(b.basis().stats().candidates, 3);
    }

    #[test]
    fn constants_are_degenerate_in_stiffness_product() {
        let ip = setup(ProductKind::Stiffness);
        let mut b = GsBuilder::new(&ip, 0.01, 1);
        let c = vec![2.0; 36];
        assert_eq!(b.try_accept(&c, Provenance { level: 0, step: 1 }).unwrap(), Decision::Degenerate);
    }

    #[test]
    fn orthogonal_snapshot_accepted_verbatim() {
        let ip = setup(ProductKind::Euclidean);
        let mut b = GsBuilder::new(&ip, 0.5, 1);
        let mut e1 = vec![0.0; 36];
        e1[3] = 2.0;
        let mut e2 = vec![0.0; 36];
        e2[7] = -3.0;
        b.try_accept(&e1, Provenance { level: 0, step: 1 }).unwrap();
        assert_eq!(b.try_accept(&e2, Provenance { level: 0, step: 2 }).unwrap(), Decision::Accepted);
        assert_eq!(b.basis().vector(1)[7], -1.0);
    }

    #[test]
    fn stride_filter() {
        let kept: Vec<usize> = (1..=10).filter(|&n| is_candidate(n, 4)).collect();
        assert_eq!(kept, vec![1, 5, 9]);
        assert!(is_candidate(7, 1));
    }

    #[test]
    fn augmented_single_level_is_identity() {
        let ip = setup(ProductKind::Stiffness);
        let stream = (1..=8).map(|n| (n, bump(n)));
        let b = build_level_basis(0, stream, &ip, 0.01, 1, 1).unwrap();
        let a = build_augmented_basis(std::slice::from_ref(&b), &ip, 0.01, 1).unwrap();
        assert_eq!(a, b);
        let wrong = setup(ProductKind::Mass);
        assert!(matches!(
            build_augmented_basis(&[b.clone(), b], &wrong, 0.01, 1),
            Err(Error::InnerProductMismatch(_))
        ));
    }

    #[test]
    fn pod_rank_one() {
        let u: Vec<f64> = (0..20).map(|i| (i as f64).cos()).collect();
        let mut data = Vec::new();
        for j in 0..5 {
            data.extend(u.iter().map(|x| x * (j as f64 + 1.0)));
        }
        let r = pod_basis(data, 20, None, Truncation::Ratio(0.1)).unwrap();
        assert_eq!(r.basis.count(), 1);
        assert!(r.singular_values[1] / r.singular_values[0] <= 1e-12);
    }

    #[test]
    fn pod_empty_rejected() {
        assert!(matches!(pod_basis(Vec::new(), 4, None, Truncation::Rank(1)), Err(Error::Empty(_))));
    }
}
