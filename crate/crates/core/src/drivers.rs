//! End-to-end pipelines behind the command-line tool.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::asymptotics::{solve_bo, two_term_eigenvalue, BoGrid, Prediction};
use crate::bounds::{count_lower_bound, epsilon_rule, existence_certificate, sufficient_n, CountBound};
use crate::config::RunConfig;
use crate::decay::{fem_decay, DecayReport, DecayWindow};
use crate::eigensolve::{certify, solve_gevp, CertificateReport, EigenResult, SolverParams};
use crate::error::{Error, Result, StageExt};
use crate::fem::{discretize_mesh, Discretization, FemParams};
use crate::geometry::{mesh_for, DomainSpec};
use crate::output::{opt, sig15, vtk_unstructured, Table, ASYMPTOTIC_HEADER, BOUNDS_HEADER, CONVERGENCE_HEADER,
    DECAY_HEADER, EIGEN_HEADER, FIELD_HEADER};

/// Environment variable capping the number of worker threads.
pub const THREADS_VAR: &str = "BROKENGUIDE_THREADS";

/// Worker count from [`THREADS_VAR`]; 1 when unset or unreadable.
pub fn thread_count() -> usize {
    std::env::var(THREADS_VAR).ok().and_then(|v| v.trim().parse().ok()).filter(|&n| n >= 1).unwrap_or(1)
}

/// Applies `f` to every item on up to `threads` workers; results keep the input order.
pub fn parallel_map<T: Sync, R: Send>(items: &[T], threads: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let threads = threads.clamp(1, items.len().max(1));
    if threads == 1 {
        return items.iter().map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<R>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let r = f(&items[i]);
                slots.lock().unwrap()[i] = Some(r);
            });
        }
    });
    slots.into_inner().unwrap().into_iter().map(|r| r.expect("every slot is filled")).collect()
}

/// A certified solve together with the discretization it came from.
#[derive(Clone, Debug)]
pub struct Solved {
    pub disc: Discretization,
    pub params: FemParams,
    pub result: EigenResult,
    pub certificate: CertificateReport,
}

impl Solved {
    pub fn n_dofs(&self) -> usize {
        self.disc.system.n_dofs()
    }

    /// Eigenvector of the 1-based `mode`.
    pub fn mode(&self, mode: usize) -> Result<(f64, &[f64])> {
        if mode == 0 || mode > self.result.eigenvalues.len() {
            return Err(Error::InvalidParameter(format!(
                "mode {mode} outside 1..={}",
                self.result.eigenvalues.len()
            )));
        }
        Ok((self.result.eigenvalues[mode - 1], &self.result.eigenvectors[mode - 1]))
    }
}

/// Mesh, assemble, solve and certify; errors carry the failing stage.
pub fn run_solve(spec: &DomainSpec, fem: &FemParams, solver: &SolverParams) -> Result<Solved> {
    spec.validate().stage("config")?;
    solver.validate().stage("config")?;
    let mesh = mesh_for(spec, fem.level).stage("mesh")?;
    let disc = discretize_mesh(spec, mesh, fem).stage("assemble")?;
    let (s, m) = (&disc.system.s, &disc.system.m);
    let result = solve_gevp(s, m, solver).stage("solve")?;
    let certificate = certify(s, m, &result, solver.tolerance);
    if !certificate.passed() {
        return Err(Error::Unresolved(certificate.violations.join("; ")).at("certify"));
    }
    Ok(Solved { disc, params: *fem, result, certificate })
}

pub fn solve_config(cfg: &RunConfig) -> Result<Solved> {
    run_solve(&cfg.domain().stage("config")?, &cfg.fem(), &cfg.solver())
}

/// One eigenvalue row per computed pair.
pub fn eigen_table(solved: &Solved) -> Table {
    let mut t = Table::new(EIGEN_HEADER);
    let r = &solved.result;
    for (j, (l, res)) in r.eigenvalues.iter().zip(&r.residuals).enumerate() {
        t.push(vec![
            sig15(solved.disc.spec.theta),
            (j + 1).to_string(),
            sig15(*l),
            sig15(*res),
            r.iterations.to_string(),
            solved.n_dofs().to_string(),
            solved.params.level.to_string(),
            solved.params.degree.to_string(),
        ]);
    }
    t
}

/// Result of one angle of a sweep.
#[derive(Clone, Debug)]
pub struct SweepEntry {
    pub theta: f64,
    /// Finite-element eigenvalues, or the diagnostic of the failed solve.
    pub fem: std::result::Result<Vec<f64>, String>,
    pub bo: Option<Vec<f64>>,
    pub predictions: Vec<Prediction>,
}

/// A decrease of `lambda_j` between two consecutive angles.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonotonicityViolation {
    pub j: usize,
    pub theta_from: f64,
    pub theta_to: f64,
    pub drop: f64,
}

#[derive(Clone, Debug)]
pub struct SweepReport {
    pub entries: Vec<SweepEntry>,
    pub violations: Vec<MonotonicityViolation>,
}

/// Absolute slack allowed before a decrease counts as a violation.
pub const MONOTONICITY_TOLERANCE: f64 = 1e-8;

impl SweepReport {
    pub fn table(&self) -> Table {
        let mut t = Table::new(ASYMPTOTIC_HEADER);
        for e in &self.entries {
            for p in &e.predictions {
                t.push(vec![
                    sig15(p.theta),
                    p.j.to_string(),
                    sig15(p.two_term),
                    opt(p.bo_value),
                    opt(p.fem_value),
                    opt(p.gap()),
                ]);
            }
        }
        t
    }

    pub fn failures(&self) -> impl Iterator<Item = (f64, &str)> {
        self.entries.iter().filter_map(|e| e.fem.as_ref().err().map(|m| (e.theta, m.as_str())))
    }
}

/// Finite-element, two-term and Born-Oppenheimer values over an ascending list of angles.
/// A failed angle is recorded and the sweep continues.
pub fn sweep(cfg: &RunConfig, thetas: &[f64], threads: usize) -> Result<SweepReport> {
    if thetas.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Config("sweep angles must be strictly ascending".into()));
    }
    for &t in thetas {
        cfg.domain_at(t).stage("config")?;
    }
    let entries = parallel_map(thetas, threads, |&theta| {
        let fem = cfg
            .domain_at(theta)
            .and_then(|spec| run_solve(&spec, &cfg.fem(), &cfg.solver()))
            .map(|s| s.result.eigenvalues)
            .map_err(|e| e.to_string());
        let bo = solve_bo(theta, &BoGrid::for_angle(theta)).ok();
        let predictions = (1..=cfg.nval)
            .map(|j| Prediction {
                theta,
                j,
                two_term: two_term_eigenvalue(theta, j).expect("angle validated"),
                bo_value: bo.as_ref().and_then(|b| b.get(j - 1).copied()),
                fem_value: fem.as_ref().ok().and_then(|f| f.get(j - 1).copied()),
            })
            .collect();
        SweepEntry { theta, fem, bo, predictions }
    });
    let mut violations = Vec::new();
    let solved: Vec<(f64, &Vec<f64>)> = entries.iter().filter_map(|e| e.fem.as_ref().ok().map(|f| (e.theta, f))).collect();
    for w in solved.windows(2) {
        let ((t0, a), (t1, b)) = (w[0], w[1]);
        for (j, (x, y)) in a.iter().zip(b).enumerate() {
            if *x < 1.0 && *y < x - MONOTONICITY_TOLERANCE {
                violations.push(MonotonicityViolation { j: j + 1, theta_from: t0, theta_to: t1, drop: x - y });
            }
        }
    }
    Ok(SweepReport { entries, violations })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub level: usize,
    pub degree: usize,
    pub n_dofs: usize,
    pub j: usize,
    pub lambda: f64,
    pub error: f64,
}

#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    pub reference_level: usize,
    pub reference_degree: usize,
    pub reference: Vec<f64>,
    pub rows: Vec<ConvergenceRow>,
    /// Rate in `h` of `lambda_1` at each degree that has three or more levels.
    pub h_rates: Vec<(usize, f64)>,
    /// Rate in `1/k` of `lambda_1` at each level that has three or more degrees.
    pub k_rates: Vec<(usize, f64)>,
}

impl ConvergenceReport {
    pub fn table(&self) -> Table {
        let mut t = Table::new(CONVERGENCE_HEADER);
        for r in &self.rows {
            t.push(vec![
                r.level.to_string(),
                r.degree.to_string(),
                r.n_dofs.to_string(),
                sig15((r.n_dofs as f64).log10() / 2.0),
                r.j.to_string(),
                sig15(r.lambda),
                sig15(r.error),
            ]);
        }
        t
    }

    pub fn h_rate(&self, degree: usize) -> Option<f64> {
        self.h_rates.iter().find(|r| r.0 == degree).map(|r| r.1)
    }

    pub fn k_rate(&self, level: usize) -> Option<f64> {
        self.k_rates.iter().find(|r| r.0 == level).map(|r| r.1)
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        points.iter().filter(|p| p.0 > 0.0 && p.1 > 0.0).map(|p| (p.0.ln(), p.1.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Rate in `h = 1/level` from differences of successive levels, which scale like the error
/// under geometric refinement.
pub fn h_rate_from(values: &[(usize, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        values.windows(2).map(|w| (1.0 / w[0].0 as f64, (w[0].1 - w[1].1).abs())).collect();
    if pts.len() < 2 {
        return None;
    }
    log_log_slope(&pts)
}

/// Rate `r` in `1/k` from differences of consecutive degrees: if the error is `C k^{-r}`
/// the differences behave like `C r k^{-r-1}` at the midpoints.
pub fn k_rate_from(values: &[(usize, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = values
        .windows(2)
        .map(|w| (0.5 * (w[0].0 + w[1].0) as f64, (w[0].1 - w[1].1).abs()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    log_log_slope(&pts).map(|s| -s - 1.0)
}

/// Solves every `(level, degree)` pair and the reference pair (finest level, highest degree),
/// reporting errors against the reference and empirical rates for `lambda_1`.
pub fn convergence(cfg: &RunConfig, pairs: &[(usize, usize)], threads: usize) -> Result<ConvergenceReport> {
    let spec = cfg.domain().stage("config")?;
    if pairs.is_empty() {
        return Err(Error::Config("convergence study needs at least one (level, degree) pair".into()));
    }
    let reference_level = pairs.iter().map(|p| p.0).max().unwrap();
    let reference_degree = pairs.iter().map(|p| p.1).max().unwrap();
    let mut all: Vec<(usize, usize)> = pairs.to_vec();
    if !all.contains(&(reference_level, reference_degree)) {
        all.push((reference_level, reference_degree));
    }
    let fem = |(level, degree): (usize, usize)| FemParams { level, degree, ..cfg.fem() };
    let solves = parallel_map(&all, threads, |&p| run_solve(&spec, &fem(p), &cfg.solver()));
    let mut results = Vec::with_capacity(all.len());
    for (p, s) in all.iter().zip(solves) {
        results.push((*p, s?));
    }
    let reference = results
        .iter()
        .find(|(p, _)| *p == (reference_level, reference_degree))
        .map(|(_, s)| s.result.eigenvalues.clone())
        .expect("reference solved");
    let mut rows = Vec::new();
    for ((level, degree), s) in results.iter().filter(|(p, _)| pairs.contains(p)) {
        for (j, (l, r)) in s.result.eigenvalues.iter().zip(&reference).enumerate() {
            rows.push(ConvergenceRow {
                level: *level,
                degree: *degree,
                n_dofs: s.n_dofs(),
                j: j + 1,
                lambda: *l,
                error: (l - r).abs(),
            });
        }
    }
    let first = |level: usize, degree: usize| {
        results.iter().find(|(p, _)| *p == (level, degree)).map(|(_, s)| s.result.eigenvalues[0])
    };
    let mut degrees: Vec<usize> = pairs.iter().map(|p| p.1).collect();
    let mut levels: Vec<usize> = pairs.iter().map(|p| p.0).collect();
    degrees.sort_unstable();
    degrees.dedup();
    levels.sort_unstable();
    levels.dedup();
    let h_rates = degrees
        .iter()
        .filter_map(|&k| {
            let v: Vec<(usize, f64)> = levels.iter().filter_map(|&l| first(l, k).map(|x| (l, x))).collect();
            h_rate_from(&v).map(|r| (k, r))
        })
        .collect();
    let k_rates = levels
        .iter()
        .filter_map(|&l| {
            let v: Vec<(usize, f64)> = degrees.iter().filter_map(|&k| first(l, k).map(|x| (k, x))).collect();
            k_rate_from(&v).map(|r| (l, r))
        })
        .collect();
    Ok(ConvergenceReport { reference_level, reference_degree, reference, rows, h_rates, k_rates })
}

/// One row of the bounds report.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundsEntry {
    pub theta: f64,
    pub count: CountBound,
    /// Eigenvalues below 1 found by the finite-element solve, if it succeeded.
    pub fem_count: Option<usize>,
    pub cert_n: usize,
    pub certificate_value: f64,
}

pub fn bounds_entry(cfg: &RunConfig, theta: f64) -> Result<BoundsEntry> {
    let count = count_lower_bound(theta).stage("bounds")?;
    let eps = epsilon_rule(theta).stage("certificate")?;
    let n = match cfg.cert_n {
        Some(n) => n,
        None => sufficient_n(theta, eps).stage("certificate")?,
    };
    let cert = existence_certificate(theta, n, eps).stage("certificate")?;
    let fem_count = cfg
        .domain_at(theta)
        .and_then(|spec| run_solve(&spec, &cfg.fem(), &cfg.solver()))
        .ok()
        .map(|s| s.result.bound_state_count());
    Ok(BoundsEntry { theta, count, fem_count, cert_n: n, certificate_value: cert.value })
}

pub fn bounds_report(cfg: &RunConfig, thetas: &[f64], threads: usize) -> Result<Vec<BoundsEntry>> {
    parallel_map(thetas, threads, |&t| bounds_entry(cfg, t)).into_iter().collect()
}

pub fn bounds_table(entries: &[BoundsEntry]) -> Table {
    let mut t = Table::new(BOUNDS_HEADER);
    for e in entries {
        t.push(vec![
            sig15(e.theta),
            sig15(e.count.z_root),
            e.count.j_min.to_string(),
            e.fem_count.map(|c| c.to_string()).unwrap_or_default(),
            sig15(e.certificate_value),
        ]);
    }
    t
}

/// Decay of the configured mode along the straight arm.
pub fn decay_report(cfg: &RunConfig) -> Result<DecayReport> {
    let solved = solve_config(cfg)?;
    let (lambda, vector) = solved.mode(cfg.mode).stage("decay")?;
    let window = DecayWindow { margin: cfg.margin, count: cfg.slices };
    fem_decay(&solved.disc, vector, lambda, &window).stage("decay")
}

pub fn decay_table(report: &DecayReport) -> Table {
    let mut t = Table::new(DECAY_HEADER);
    t.push(vec![
        sig15(report.theta),
        sig15(report.lambda),
        sig15(report.predicted_rate),
        sig15(report.fitted_rate()),
        sig15(report.fit.residual),
        report.n_slices().to_string(),
    ]);
    t
}

/// Samples a mode on a regular `nx x ny` grid over the mesh bounding box; points
/// outside the domain are omitted.
pub fn field_table(solved: &Solved, mode: usize, nx: usize, ny: usize) -> Result<Table> {
    if nx < 2 || ny < 2 {
        return Err(Error::InvalidParameter("export grid needs at least 2 x 2 points".into()).at("export"));
    }
    let (_, vector) = solved.mode(mode).stage("export")?;
    let f = solved.disc.function(vector);
    let verts = &solved.disc.mesh.vertices;
    let fold = |i: usize, init: f64, g: fn(f64, f64) -> f64| verts.iter().map(|p| p[i]).fold(init, g);
    let (u0, u1) = (fold(0, f64::INFINITY, f64::min), fold(0, f64::NEG_INFINITY, f64::max));
    let (v0, v1) = (fold(1, f64::INFINITY, f64::min), fold(1, f64::NEG_INFINITY, f64::max));
    let mut t = Table::new(FIELD_HEADER);
    for j in 0..ny {
        let v = v0 + (v1 - v0) * j as f64 / (ny - 1) as f64;
        for i in 0..nx {
            let u = u0 + (u1 - u0) * i as f64 / (nx - 1) as f64;
            if let Some(value) = f.try_value([u, v]) {
                t.push(vec![sig15(u), sig15(v), sig15(value)]);
            }
        }
    }
    Ok(t)
}

/// Legacy VTK file with the mode sampled at the mesh vertices.
pub fn field_vtk(solved: &Solved, mode: usize) -> Result<String> {
    let (_, vector) = solved.mode(mode).stage("export")?;
    let f = solved.disc.function(vector);
    let values = solved.disc.mesh.vertices.iter().map(|&p| f.value(p)).collect::<Result<Vec<_>>>().stage("export")?;
    vtk_unstructured(&solved.disc.mesh, &format!("mode_{mode}"), &values).stage("export")
}
