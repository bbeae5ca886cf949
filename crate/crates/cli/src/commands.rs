use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use taylorom::inverse::{reduced_traces, TraceRecorder};
use taylorom::io::{read_basis, read_traces_csv, write_basis, write_cost_csv, write_error_csv, write_traces_csv, MorfWriter};
use taylorom::rom::compare_with_full;
use taylorom::{
    add_noise, line_search, AlphaGrid, CascadeSolver, Problem, ReceiverLine, SnapshotBasis, TraceSet,
    Truncation,
};

use crate::manifest::RunManifest;

/// Grids with at most this many points are reported as coarse.
pub const COARSE_GRID_POINTS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Qr,
    Pod,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize, PartialEq)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Command {
    /// Full-order solve; writes receiver traces and optional field frames.
    SolveFull(SolveFullArgs),
    /// Solve the derivative cascade up to a Taylor degree.
    Cascade(CascadeArgs),
    /// Build a QR (cascade) or POD basis and write it as MORF + manifest.
    BuildBasis(BuildBasisArgs),
    /// Reduced solve at one alpha using a stored basis.
    RomSolve(RomSolveArgs),
    /// Offline/online/full timing and error of a reduced model at one alpha.
    Compare(CompareArgs),
    /// Misfit line search along the perturbation direction.
    Linesearch(LinesearchArgs),
}

#[derive(Debug, Clone, Args, Serialize, Deserialize, PartialEq)]
pub struct SolveFullArgs {
    /// Parameter step along the perturbation direction.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub alpha: f64,
    /// Write every k-th field to fields.morf (0 disables).
    #[arg(long, default_value_t = 0)]
    pub field_stride: usize,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize, PartialEq)]
pub struct CascadeArgs {
    /// Highest derivative order (defaults to taylor_degree).
    #[arg(long)]
    pub degree: Option<usize>,
    /// Write every k-th field of each level to level<l>.morf (0 disables).
    #[arg(long, default_value_t = 0)]
    pub field_stride: usize,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize, PartialEq)]
pub struct BuildBasisArgs {
    #[arg(long, value_enum, default_value_t = Method::Qr)]
    pub method: Method,
    /// Taylor degree for QR bases (defaults to taylor_degree).
    #[arg(long)]
    pub degree: Option<usize>,
    /// POD rank (defaults to pod_rank, then the singular-value ratio rule).
    #[arg(long)]
    pub rank: Option<usize>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize, PartialEq)]
pub struct RomSolveArgs {
    /// Basis MORF file written by build-basis.
    #[arg(long)]
    pub basis: PathBuf,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub alpha: f64,
    /// Also run the full-order model and report the relative error.
    #[arg(long)]
    pub reference: bool,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize, PartialEq)]
pub struct CompareArgs {
    #[arg(long, value_enum, default_value_t = Method::Qr)]
    pub method: Method,
    #[arg(long)]
    pub degree: Option<usize>,
    #[arg(long)]
    pub rank: Option<usize>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub alpha: f64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize, PartialEq)]
pub struct LinesearchArgs {
    /// Taylor degree of the QR basis built for the search.
    #[arg(long, conflicts_with = "basis")]
    pub degree: Option<usize>,
    /// Use a stored basis instead of building one.
    #[arg(long)]
    pub basis: Option<PathBuf>,
    /// Noise level as a fraction of the trace RMS (defaults to noise_level).
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Grid points on [alpha_min, alpha_max] (defaults to alpha_points).
    #[arg(long)]
    pub points: Option<usize>,
    /// Observed traces CSV; by default they are synthesised by a full solve
    /// at alpha_true.
    #[arg(long)]
    pub obs: Option<PathBuf>,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::SolveFull(_) => "solve-full",
            Command::Cascade(_) => "cascade",
            Command::BuildBasis(_) => "build-basis",
            Command::RomSolve(_) => "rom-solve",
            Command::Compare(_) => "compare",
            Command::Linesearch(_) => "linesearch",
        }
    }

    pub fn run(&self, problem: &Problem, out: &Path, m: &mut RunManifest) -> Result<()> {
        match self {
            Command::SolveFull(a) => solve_full(problem, a, out, m),
            Command::Cascade(a) => cascade(problem, a, out, m),
            Command::BuildBasis(a) => build_basis(problem, a, out, m),
            Command::RomSolve(a) => rom_solve(problem, a, out, m),
            Command::Compare(a) => compare(problem, a, out, m),
            Command::Linesearch(a) => linesearch(problem, a, out, m),
        }
    }
}

fn secs(t: Instant) -> f64 {
    t.elapsed().as_secs_f64()
}

fn write_traces(out: &Path, name: &str, traces: &TraceSet, m: &mut RunManifest) -> Result<()> {
    write_traces_csv(&out.join(name), traces)?;
    m.artifact(out, name)
}

fn solve_full(p: &Problem, a: &SolveFullArgs, out: &Path, m: &mut RunManifest) -> Result<()> {
    let solver = p.full_solver(a.alpha)?;
    let n = p.grid.n();
    let mut line = TraceRecorder::new(&p.receivers, p.cfg.dt);
    let mut point = TraceRecorder::new(&p.trace, p.cfg.dt);
    let mut fields = match a.field_stride {
        0 => None,
        _ => Some(MorfWriter::create(&out.join("fields.morf"), n, n)?),
    };
    let mut write_err = None;
    let t = Instant::now();
    solver.run(|step, u| {
        line.push(step, u);
        point.push(step, u);
        if let Some(w) = fields.as_mut() {
            if step % a.field_stride == 0 && write_err.is_none() {
                write_err = w.write_frame(u).err();
            }
        }
    })?;
    m.durations.full_s = Some(secs(t));
    if let Some(e) = write_err {
        return Err(e.into());
    }
    if let Some(w) = fields {
        m.result("field_frames", w.frames());
        w.finish()?;
        m.artifact(out, "fields.morf")?;
    }
    let line = line.finish();
    write_traces(out, "traces.csv", &line, m)?;
    write_traces(out, "trace.csv", &point.finish(), m)?;
    m.result("alpha", a.alpha);
    m.result("steps", p.cfg.nt);
    m.result("nodes", p.grid.node_count());
    m.result("receivers", p.receivers.count());
    m.result("trace_point", p.trace.positions()[0]);
    m.result("trace_rms", line.rms());
    Ok(())
}

fn cascade(p: &Problem, a: &CascadeArgs, out: &Path, m: &mut RunManifest) -> Result<()> {
    let degree = a.degree.unwrap_or(p.cfg.taylor_degree);
    let solver = CascadeSolver::new(&p.cfg, &p.grid, &p.theta0, &p.dtheta, degree)?;
    let n = p.grid.n();
    let node = p.trace.nodes()[0];
    let mut writers = Vec::new();
    if a.field_stride > 0 {
        for l in 0..=degree {
            writers.push(MorfWriter::create(&out.join(format!("level{l}.morf")), n, n)?);
        }
    }
    let mut trace = vec![vec![0.0; degree + 1]; p.cfg.nt];
    let mut norms = vec![0.0; degree + 1];
    let mut write_err = None;
    let t = Instant::now();
    solver.run(|l, step, v| {
        trace[step - 1][l] = v[node];
        if step == p.cfg.nt {
            norms[l] = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        }
        if let Some(w) = writers.get_mut(l) {
            if step % a.field_stride == 0 && write_err.is_none() {
                write_err = w.write_frame(v).err();
            }
        }
    })?;
    m.durations.offline_s = Some(secs(t));
    if let Some(e) = write_err {
        return Err(e.into());
    }
    for (l, w) in writers.into_iter().enumerate() {
        w.finish()?;
        m.artifact(out, &format!("level{l}.morf"))?;
    }
    let mut text = String::from("time");
    for l in 0..=degree {
        let _ = write!(text, ",v{l}");
    }
    text.push('\n');
    for (i, row) in trace.iter().enumerate() {
        let _ = write!(text, "{:?}", (i + 1) as f64 * p.cfg.dt);
        for v in row {
            let _ = write!(text, ",{v:?}");
        }
        text.push('\n');
    }
    fs::write(out.join("cascade_trace.csv"), text)?;
    m.artifact(out, "cascade_trace.csv")?;
    m.result("degree", degree);
    m.result("final_norms", norms);
    Ok(())
}

/// Builds the requested basis, returning it with the per-level counts.
fn make_basis(
    p: &Problem,
    method: Method,
    degree: Option<usize>,
    rank: Option<usize>,
    m: &mut RunManifest,
) -> Result<SnapshotBasis> {
    match method {
        Method::Qr => {
            let degree = degree.unwrap_or(p.cfg.taylor_degree);
            let mor = p.build_qr(degree)?;
            let counts: Vec<usize> = mor.levels.iter().map(SnapshotBasis::count).collect();
            let candidates: Vec<usize> = mor.levels.iter().map(|b| b.stats().candidates).collect();
            m.result("method", "qr");
            m.result("degree", degree);
            m.result("level_counts", counts);
            m.result("level_candidates", candidates);
            Ok(mor.basis)
        }
        Method::Pod => {
            let pod = p.build_pod(rank.map(Truncation::Rank))?;
            m.result("method", "pod");
            let shown = pod.singular_values.len().min(pod.basis.count() + 1);
            m.result("singular_values", &pod.singular_values[..shown]);
            Ok(pod.basis)
        }
    }
}

fn record_basis(p: &Problem, basis: &SnapshotBasis, m: &mut RunManifest) {
    let (offdiag, diag) = basis.orthonormality_error(&p.inner_product(basis.kind()));
    m.result("basis_size", basis.count());
    m.result("inner_product", basis.kind().as_str());
    m.result("orthonormality_offdiag", offdiag);
    m.result("orthonormality_diag", diag);
}

fn save_basis(p: &Problem, basis: &SnapshotBasis, out: &Path, m: &mut RunManifest) -> Result<()> {
    write_basis(&out.join("basis.morf"), basis, p.grid.n())?;
    m.artifact(out, "basis.morf")?;
    m.artifact(out, "basis.manifest")
}

fn build_basis(p: &Problem, a: &BuildBasisArgs, out: &Path, m: &mut RunManifest) -> Result<()> {
    let t = Instant::now();
    let basis = make_basis(p, a.method, a.degree, a.rank, m)?;
    m.durations.offline_s = Some(secs(t));
    record_basis(p, &basis, m);
    save_basis(p, &basis, out, m)
}

fn load_basis(p: &Problem, path: &Path, m: &mut RunManifest) -> Result<SnapshotBasis> {
    let basis = read_basis(path).with_context(|| format!("loading basis {}", path.display()))?;
    m.input(path)?;
    m.input(&taylorom::io::basis_manifest_path(path))?;
    if basis.len() != p.grid.node_count() {
        anyhow::bail!(taylorom::Error::Dimension(format!(
            "basis has {} nodes, grid has {}",
            basis.len(),
            p.grid.node_count()
        )));
    }
    Ok(basis)
}

/// Reduced solve plus reconstruction at `line`; returns traces and the
/// coefficient trajectory.
fn online(
    p: &Problem,
    red: &taylorom::ReducedOperators,
    basis: &SnapshotBasis,
    line: &ReceiverLine,
    alpha: f64,
) -> Result<TraceSet> {
    let samples = reduced_traces(red, basis, line, alpha)?;
    let times = (1..=p.cfg.nt).map(|n| n as f64 * p.cfg.dt).collect();
    Ok(TraceSet::new(times, line.positions().to_vec(), samples)?)
}

fn rom_solve(p: &Problem, a: &RomSolveArgs, out: &Path, m: &mut RunManifest) -> Result<()> {
    let basis = load_basis(p, &a.basis, m)?;
    let t = Instant::now();
    let red = p.reduce(&basis)?;
    red.check_admissible(a.alpha)?;
    m.durations.offline_s = Some(secs(t));
    let t = Instant::now();
    let traces = online(p, &red, &basis, &p.receivers, a.alpha)?;
    m.durations.online_s = Some(secs(t));
    let point = online(p, &red, &basis, &p.trace, a.alpha)?;
    write_traces(out, "traces.csv", &traces, m)?;
    write_traces(out, "trace.csv", &point, m)?;
    m.result("alpha", a.alpha);
    m.result("basis_size", basis.count());
    m.result("bc_kind", p.cfg.bc_kind.as_str());
    if a.reference {
        let coeffs = red.assemble_at_alpha(a.alpha)?.trajectory()?;
        let t = Instant::now();
        let series = compare_with_full(&p.full_solver(a.alpha)?, &basis, &coeffs)?;
        m.durations.full_s = Some(secs(t));
        write_error_csv(&out.join("errors.csv"), &series, p.cfg.dt)?;
        m.artifact(out, "errors.csv")?;
        m.result("average_error", series.average);
        m.result("excluded_steps", series.excluded);
    }
    Ok(())
}

fn compare(p: &Problem, a: &CompareArgs, out: &Path, m: &mut RunManifest) -> Result<()> {
    let t = Instant::now();
    let basis = make_basis(p, a.method, a.degree, a.rank, m)?;
    let red = p.reduce(&basis)?;
    red.check_admissible(a.alpha)?;
    m.durations.offline_s = Some(secs(t));

    let t = Instant::now();
    let traces = online(p, &red, &basis, &p.receivers, a.alpha)?;
    m.durations.online_s = Some(secs(t));

    let solver = p.full_solver(a.alpha)?;
    let mut rec = TraceRecorder::new(&p.receivers, p.cfg.dt);
    let t = Instant::now();
    solver.run(|n, u| rec.push(n, u))?;
    m.durations.full_s = Some(secs(t));
    let full = rec.finish();

    let coeffs = red.assemble_at_alpha(a.alpha)?.trajectory()?;
    let series = compare_with_full(&solver, &basis, &coeffs)?;
    record_basis(p, &basis, m);
    save_basis(p, &basis, out, m)?;
    write_traces(out, "traces_rom.csv", &traces, m)?;
    write_traces(out, "traces_full.csv", &full, m)?;
    write_error_csv(&out.join("errors.csv"), &series, p.cfg.dt)?;
    m.artifact(out, "errors.csv")?;
    m.result("alpha", a.alpha);
    m.result("nodes", p.grid.node_count());
    m.result("average_error", series.average);
    m.result("excluded_steps", series.excluded);
    if let (Some(on), Some(full)) = (m.durations.online_s, m.durations.full_s) {
        m.result("online_faster_than_full", on < full);
    }
    Ok(())
}

fn linesearch(p: &Problem, a: &LinesearchArgs, out: &Path, m: &mut RunManifest) -> Result<()> {
    let spec = &p.cfg.line_search;
    let points = a.points.unwrap_or(spec.points);
    let grid = AlphaGrid::linspace(spec.alpha_min, spec.alpha_max, points)?;
    let noise = a.noise.unwrap_or(spec.noise_level);
    let seed = a.seed.unwrap_or(p.cfg.rng_seed);

    let t = Instant::now();
    let basis = match &a.basis {
        Some(path) => load_basis(p, path, m)?,
        None => make_basis(p, Method::Qr, a.degree, None, m)?,
    };
    let red = p.reduce(&basis)?;
    m.durations.offline_s = Some(secs(t));

    let clean = match &a.obs {
        Some(path) => {
            m.input(path)?;
            read_traces_csv(path, p.cfg.receivers.y)?
        }
        None => {
            let t = Instant::now();
            let obs = p.observe(spec.alpha_true)?;
            m.durations.full_s = Some(secs(t));
            obs
        }
    };
    let obs = add_noise(&clean, noise, seed)?;
    write_traces(out, "observations.csv", &obs, m)?;

    let t = Instant::now();
    let result = line_search(&red, &basis, &p.receivers, &obs, &grid)?;
    m.durations.online_s = Some(secs(t));
    write_cost_csv(&out.join("cost.csv"), &result)?;
    m.artifact(out, "cost.csv")?;

    m.result("basis_size", basis.count());
    m.result("points", points);
    m.result("spacing", grid.spacing());
    m.result("coarse_grid", points <= COARSE_GRID_POINTS);
    m.result("noise", noise);
    m.result("seed", seed);
    m.result("alpha_true", spec.alpha_true);
    m.result("alpha_star", result.alpha_star);
    m.result("cost_min", result.costs[result.index]);
    Ok(())
}
