//! Stability studies and convergence/timing harnesses.

use std::time::Instant;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::ExtendedSet;
use crate::linalg::{eig_dense, lu_factor, Mat};
use crate::operators::{assemble, DiffMatrix, OpData};
use crate::params::{phs_degree_alt, OperatorKind, OperatorSpec, ScalingLaw};
use crate::point::Point;
use crate::problems::ProblemDef;
use crate::stencils::{make_stencil, KdTree};
use crate::timestepper::{SolverConfig, SolverState};
use crate::weights::{center_condition, Functional, LocalSystem};

/// Laplacian spec for the stability studies.
pub fn study_spec(ell: u32, law: ScalingLaw) -> OperatorSpec {
    OperatorSpec::with_degrees(OperatorKind::Laplacian, ell, phs_degree_alt(ell, law))
}

#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Sorted by real part.
    pub eigenvalues: Vec<Complex64>,
    pub max_re: f64,
    pub trace: f64,
    /// `|L|_1` of the block.
    pub norm_1: f64,
}

/// Laplacian with Neumann data folded in: the ghost unknowns are
/// eliminated through `B x = 0`, leaving an operator on the interior and
/// boundary nodes. Its constant null vector gives one zero eigenvalue.
pub fn neumann_operator(ext: &ExtendedSet, ell: u32, law: ScalingLaw) -> Result<Mat> {
    let spec = study_spec(ell, law);
    let (l, _) = assemble(ext, &spec, OpData::Laplacian)?;
    let nb = ext.n_boundary;
    let (alpha, beta) = (vec![1.0; nb], vec![0.0; nb]);
    let bspec = OperatorSpec::with_degrees(OperatorKind::BoundaryRobin, ell, spec.m);
    let (b, _) = assemble(ext, &bspec, OpData::Robin { alpha: &alpha, beta: &beta })?;
    let n = ext.n();
    let bg = b.matrix.block(0..nb, n..n + nb).to_dense();
    let bd = b.matrix.block(0..nb, 0..n).to_dense();
    let g = lu_factor(bg)?.solve_mat(&bd);
    let lg = l.matrix.block(0..n, n..n + nb).to_dense();
    let mut a = l.matrix.block(0..n, 0..n).to_dense();
    let lgg = lg.matmul(&g);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] -= lgg[(i, j)];
        }
    }
    Ok(a)
}

/// Spectrum of [`neumann_operator`].
pub fn spectrum_study(ext: &ExtendedSet, ell: u32, law: ScalingLaw) -> Result<Spectrum> {
    spectrum_of(&neumann_operator(ext, ell, law)?)
}

pub fn spectrum_of(a: &Mat) -> Result<Spectrum> {
    let eigenvalues = eig_dense(a)?;
    let max_re = eigenvalues.last().map_or(f64::NEG_INFINITY, |z| z.re);
    Ok(Spectrum {
        eigenvalues,
        max_re,
        trace: a.trace(),
        norm_1: a.norm_1(),
    })
}

/// `n` points of the Halton sequence with bases 2 and 3, mapped to
/// `[-1, 1]^2`. The sequence starts at index 1.
pub fn halton_square(n: usize) -> Vec<Point> {
    fn radical_inverse(mut i: usize, base: usize) -> f64 {
        let mut f = 1.0;
        let mut r = 0.0;
        while i > 0 {
            f /= base as f64;
            r += f * (i % base) as f64;
            i /= base;
        }
        r
    }
    (1..=n)
        .map(|i| Point::new(2.0 * radical_inverse(i, 2) - 1.0, 2.0 * radical_inverse(i, 3) - 1.0))
        .collect()
}

/// Halton points plus `per_side` evenly spaced points on each side of the
/// square boundary.
pub fn halton_with_boundary(n: usize, per_side: usize) -> Vec<Point> {
    let mut pts = halton_square(n);
    for k in 0..per_side {
        let s = -1.0 + 2.0 * k as f64 / per_side as f64;
        pts.push(Point::new(s, -1.0));
        pts.push(Point::new(1.0, s));
        pts.push(Point::new(-s, 1.0));
        pts.push(Point::new(-1.0, -s));
    }
    pts
}

/// Local Laplacian Lebesgue function on each node's own stencil.
#[derive(Debug, Clone, PartialEq)]
pub struct LebesgueMap {
    pub points: Vec<Point>,
    /// `|w|_1` for the node itself.
    pub at_node: Vec<f64>,
    /// Largest `|w(y)|_1` over the stencil nodes `y`.
    pub stencil_max: Vec<f64>,
}

pub fn lebesgue_map(points: &[Point], ell: u32, law: ScalingLaw) -> Result<LebesgueMap> {
    let spec = study_spec(ell, law);
    let tree = KdTree::build(points);
    let mut at_node = Vec::with_capacity(points.len());
    let mut stencil_max = Vec::with_capacity(points.len());
    for i in 0..points.len() {
        let st = make_stencil(&tree, i, spec.n)?;
        let coords: Vec<Point> = st.neighbors.iter().map(|&j| points[j]).collect();
        let ls = LocalSystem::assemble(&coords, i, spec.ell, spec.m)?;
        let targets: Vec<(Point, Functional)> = coords.iter().map(|&p| (p, Functional::Laplacian)).collect();
        let w = ls.solve_weights(&targets);
        let lam: Vec<f64> = (0..coords.len())
            .map(|j| (0..coords.len()).map(|k| w.w[(k, j)].abs()).sum())
            .collect();
        at_node.push(lam[0]);
        stencil_max.push(lam.iter().cloned().fold(0.0, f64::max));
    }
    Ok(LebesgueMap {
        points: points.to_vec(),
        at_node,
        stencil_max,
    })
}

#[cfg(test)]
fn center_weights(points: &[Point], tree: &KdTree, i: usize, spec: &OperatorSpec) -> Result<Vec<f64>> {
    let st = make_stencil(tree, i, spec.n)?;
    let coords: Vec<Point> = st.neighbors.iter().map(|&j| points[j]).collect();
    let ls = LocalSystem::assemble(&coords, i, spec.ell, spec.m)?;
    Ok(ls.solve_weights(&[(points[i], Functional::Laplacian)]).column(0))
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Rows of a Laplacian that pass [`center_condition`], with the own
/// weight moved to the front.
pub fn center_screen(l: &DiffMatrix) -> (usize, usize) {
    let mut pass = 0;
    for r in 0..l.rows() {
        let node = l.row_nodes[r];
        let (cols, vals) = l.matrix.row(r);
        let mut w = Vec::with_capacity(vals.len());
        w.push(cols.iter().position(|&c| c == node).map_or(0.0, |k| vals[k]));
        w.extend(cols.iter().zip(vals).filter(|(&c, _)| c != node).map(|(_, &v)| v));
        if center_condition(&w) {
            pass += 1;
        }
    }
    (pass, l.rows())
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let k = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    num / den
}

/// Map `f` over `items` on up to `jobs` threads, keeping input order.
pub fn par_map<T: Sync, R: Send>(items: &[T], jobs: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let jobs = jobs.max(1).min(items.len().max(1));
    if jobs == 1 {
        return items.iter().map(f).collect();
    }
    let next = std::sync::atomic::AtomicUsize::new(0);
    let mut slots: Vec<Option<R>> = (0..items.len()).map(|_| None).collect();
    let results = std::sync::Mutex::new(&mut slots);
    std::thread::scope(|s| {
        for _ in 0..jobs {
            s.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let r = f(&items[i]);
                results.lock().unwrap()[i] = Some(r);
            });
        }
    });
    slots.into_iter().map(|r| r.expect("every item mapped")).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub h: f64,
    pub xi: u32,
    pub error: f64,
    pub iters: f64,
}

/// Run the solver to the final time for every `(xi, h)` pair. Rows come
/// back ordered by `xi`, then by `hs`.
pub fn convergence_run(
    problem: &ProblemDef,
    xis: &[u32],
    hs: &[f64],
    seed: u64,
    jobs: usize,
) -> Result<Vec<ConvergenceRow>> {
    let cases: Vec<(u32, f64)> = xis.iter().flat_map(|&x| hs.iter().map(move |&h| (x, h))).collect();
    par_map(&cases, jobs, |&(xi, h)| {
        let mut st = SolverState::init(problem.clone(), SolverConfig::new(xi, h, seed))?;
        st.run()?;
        Ok(ConvergenceRow {
            n: st.ext.n(),
            h,
            xi,
            error: st.error()?,
            iters: st.mean_iterations(),
        })
    })
    .into_iter()
    .collect()
}

/// Convergence slope of error against `sqrt(N)` for the rows of one `xi`.
pub fn convergence_slope(rows: &[ConvergenceRow], xi: u32) -> f64 {
    let sel: Vec<&ConvergenceRow> = rows.iter().filter(|r| r.xi == xi).collect();
    let x: Vec<f64> = sel.iter().map(|r| (r.n as f64).sqrt()).collect();
    let y: Vec<f64> = sel.iter().map(|r| r.error).collect();
    -loglog_slope(&x, &y)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimingRow {
    pub n: usize,
    pub preprocess_ms: f64,
    /// Median over the timed steps.
    pub step_ms: f64,
}

/// Preprocessing and median per-step wall time at each spacing, over
/// `steps` steps after the first (which warms the history).
pub fn timing_run(problem: &ProblemDef, xi: u32, hs: &[f64], seed: u64, steps: usize) -> Result<Vec<TimingRow>> {
    hs.iter()
        .map(|&h| {
            let mut st = SolverState::init(problem.clone(), SolverConfig::new(xi, h, seed))?;
            st.step()?;
            let mut times = Vec::with_capacity(steps);
            while times.len() < steps && !st.is_done() {
                let start = Instant::now();
                st.step()?;
                times.push(start.elapsed().as_secs_f64() * 1e3);
            }
            if times.is_empty() {
                return Err(Error::Dimension("no steps left to time".into()));
            }
            Ok(TimingRow {
                n: st.ext.n(),
                preprocess_ms: st.preprocess_ms,
                step_ms: median(&times),
            })
        })
        .collect()
}

/// Error at the final time for each prescribed step size on one fixed
/// spacing.
pub fn temporal_run(problem: &ProblemDef, xi: u32, h: f64, dts: &[f64], seed: u64, jobs: usize) -> Result<Vec<f64>> {
    par_map(dts, jobs, |&dt| {
        let mut cfg = SolverConfig::new(xi, h, seed);
        cfg.dt = Some(dt);
        let mut st = SolverState::init(problem.clone(), cfg)?;
        st.run()?;
        st.error()
    })
    .into_iter()
    .collect()
}
