//! Semi-Lagrangian BDF time stepping on moving node sets.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::geometry::{adapt_nodes, advect_seeds, generate_reference_nodes, DomainModel, ExtendedSet, NodeSet};
use crate::linalg::{equilibrate, gmres, GmresOutput, Identity, Preconditioner, SaddlePrecond, SparseMat};
use crate::operators::{
    assemble, build_interp_bundle, update, update_interp_bundle, AssemblyStats, DiffMatrix, InterpBundle, OpData,
};
use crate::params::{build_spec, OperatorKind, OperatorSpec};
use crate::problems::{rel_l2_error, ProblemDef};
use crate::semilag::{reconstruct, trace_levels};

/// Multiplier of `h / U_max` in the step size.
pub const CFL: f64 = 0.3;
pub const GMRES_MAX_ITERATIONS: usize = 500;

/// `c C^{n+1} - ... ` form of a BDF method: the new value equals
/// `sum_k history[k] C^{n-k} + lhs dt (rhs)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BdfScheme {
    pub order: usize,
    pub lhs_coeff: f64,
    pub history_coeffs: Vec<f64>,
}

impl BdfScheme {
    pub fn new(order: usize) -> Result<BdfScheme> {
        let (lhs_coeff, history_coeffs) = match order {
            1 => (1.0, vec![1.0]),
            2 => (2.0 / 3.0, vec![4.0 / 3.0, -1.0 / 3.0]),
            3 => (6.0 / 11.0, vec![18.0 / 11.0, -9.0 / 11.0, 2.0 / 11.0]),
            _ => return Err(Error::Dimension(format!("BDF order {order}"))),
        };
        Ok(BdfScheme {
            order,
            lhs_coeff,
            history_coeffs,
        })
    }
}

/// `dt = 0.3 h / U_max` (or `0.3 h` without flow), shrunk so that an
/// integer number of steps reaches `t_final`. Returns `(dt, steps)`.
pub fn choose_dt(h: f64, u_max: f64, t_final: f64) -> (f64, usize) {
    let dt = if u_max > 0.0 { CFL * h / u_max } else { CFL * h };
    fit_dt(dt, t_final)
}

fn fit_dt(dt: f64, t_final: f64) -> (f64, usize) {
    let steps = ((t_final / dt) - 1e-9).ceil().max(1.0) as usize;
    (t_final / steps as f64, steps)
}

/// Assemble
/// ```text
/// [ I - c nu dt L ] C = sum_k a_k C_d^{n-k} + c dt f
/// [       B       ] C = g
/// ```
/// over the extended node set. `departures[k]` holds level `k` values
/// at the departure points of the `N` interior and boundary nodes.
#[allow(clippy::too_many_arguments)]
pub fn form_system(
    l: &DiffMatrix,
    b: &DiffMatrix,
    scheme: &BdfScheme,
    nu: f64,
    dt: f64,
    departures: &[Vec<f64>],
    forcing: &[f64],
    bc_data: &[f64],
) -> Result<(SparseMat, Vec<f64>)> {
    let n = l.n_interior + l.n_boundary;
    let nb = l.n_boundary;
    let n_ext = n + nb;
    if l.rows() != n || b.rows() != nb || l.matrix.ncols() != n_ext || b.matrix.ncols() != n_ext {
        return Err(Error::Dimension(format!(
            "L is {}x{}, B is {}x{}, expected {n}x{n_ext} and {nb}x{n_ext}",
            l.rows(),
            l.matrix.ncols(),
            b.rows(),
            b.matrix.ncols()
        )));
    }
    if departures.len() != scheme.order
        || departures.iter().any(|d| d.len() != n)
        || forcing.len() != n
        || bc_data.len() != nb
    {
        return Err(Error::Dimension("right-hand side data does not match the node set".into()));
    }
    let s = scheme.lhs_coeff * nu * dt;
    let mut rows = Vec::with_capacity(n_ext);
    for r in 0..n {
        let (cols, vals) = l.matrix.row(r);
        let mut row: Vec<(usize, f64)> = cols.iter().zip(vals).map(|(&c, &v)| (c, -s * v)).collect();
        match row.iter_mut().find(|(c, _)| *c == r) {
            Some(e) => e.1 += 1.0,
            None => row.push((r, 1.0)),
        }
        rows.push(row);
    }
    for r in 0..nb {
        let (cols, vals) = b.matrix.row(r);
        rows.push(cols.iter().zip(vals).map(|(&c, &v)| (c, v)).collect());
    }
    let mut rhs = vec![0.0; n_ext];
    for (r, v) in rhs.iter_mut().enumerate().take(n) {
        *v = scheme
            .history_coeffs
            .iter()
            .zip(departures)
            .map(|(a, d)| a * d[r])
            .sum::<f64>()
            + scheme.lhs_coeff * dt * forcing[r];
    }
    rhs[n..].copy_from_slice(bc_data);
    Ok((SparseMat::from_rows(n_ext, rows), rhs))
}

/// Initial GMRES iterate: level `n` departure values for interior and
/// boundary nodes followed by those of the ghosts.
pub fn gmres_guess(domain: &[f64], ghosts: &[f64]) -> Vec<f64> {
    domain.iter().chain(ghosts).copied().collect()
}

/// `min(0.1 h^xi, 1e-7)`.
pub fn gmres_tolerance(h: f64, xi: u32) -> f64 {
    (0.1 * h.powi(xi as i32)).min(1e-7)
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub xi: u32,
    pub h: f64,
    pub seed: u64,
    /// Overrides the problem's final time.
    pub t_final: Option<f64>,
    /// Overrides the step size rule; still adjusted to divide `t_final`.
    pub dt: Option<f64>,
    pub precondition: bool,
    pub warm_start: bool,
    pub max_iterations: usize,
    /// Record wall-clock times in the step log; zero otherwise.
    pub wall_clock: bool,
}

impl SolverConfig {
    pub fn new(xi: u32, h: f64, seed: u64) -> SolverConfig {
        SolverConfig {
            xi,
            h,
            seed,
            t_final: None,
            dt: None,
            precondition: true,
            warm_start: true,
            max_iterations: GMRES_MAX_ITERATIONS,
            wall_clock: false,
        }
    }
}

/// One line of the per-step log.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub t: f64,
    pub n: usize,
    pub n_b: usize,
    pub n_s: usize,
    pub rows_copied: usize,
    pub rows_recomputed: usize,
    pub gmres_iters: usize,
    pub residual: f64,
    pub wall_ms: f64,
}

/// A solution level with the nodes and interpolants it lives on.
#[derive(Debug, Clone)]
pub struct Level {
    pub t: f64,
    pub ext: ExtendedSet,
    pub bundle: InterpBundle,
    /// Values at the interior and boundary nodes.
    pub values: Vec<f64>,
}

/// Operator statistics of the latest update.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct UpdateStats {
    pub laplacian: AssemblyStats,
    pub boundary: AssemblyStats,
    pub interp: AssemblyStats,
}

pub struct SolverState {
    pub problem: ProblemDef,
    pub config: SolverConfig,
    pub spec_l: OperatorSpec,
    pub spec_b: OperatorSpec,
    pub spec_i: OperatorSpec,
    pub reference: NodeSet,
    pub model: DomainModel,
    pub ext: ExtendedSet,
    pub l: DiffMatrix,
    pub b: DiffMatrix,
    /// Newest first, at most three levels.
    pub history: Vec<Level>,
    /// Latest solution including ghost values.
    pub solution: Vec<f64>,
    pub step: usize,
    pub t: f64,
    pub dt: f64,
    pub n_steps: usize,
    pub t_final: f64,
    pub log: Vec<StepRecord>,
    pub stats: UpdateStats,
    /// Time spent in [`SolverState::init`].
    pub preprocess_ms: f64,
}

fn robin_data(problem: &ProblemDef, ext: &ExtendedSet, t: f64) -> (Vec<f64>, Vec<f64>) {
    ext.boundary_points()
        .iter()
        .map(|&p| ((problem.alpha)(p, t), (problem.beta)(p, t)))
        .unzip()
}

fn model_at(problem: &ProblemDef) -> Result<DomainModel> {
    if problem.seeds.is_empty() {
        Ok(DomainModel::disk())
    } else {
        DomainModel::from_seeds(&problem.seeds, 0.0)
    }
}

impl SolverState {
    /// Generate nodes, fit the boundaries, and assemble all operators at
    /// `t = 0` with the exact initial condition.
    pub fn init(problem: ProblemDef, config: SolverConfig) -> Result<SolverState> {
        let start = Instant::now();
        let reference = generate_reference_nodes(config.h, config.seed)?;
        Self::init_with_nodes(problem, config, reference, start)
    }

    /// As [`SolverState::init`] on a given reference node set.
    pub fn init_on(problem: ProblemDef, config: SolverConfig, reference: NodeSet) -> Result<SolverState> {
        Self::init_with_nodes(problem, config, reference, Instant::now())
    }

    fn init_with_nodes(
        problem: ProblemDef,
        config: SolverConfig,
        reference: NodeSet,
        start: Instant,
    ) -> Result<SolverState> {
        let spec_l = build_spec(OperatorKind::Laplacian, config.xi);
        let spec_b = build_spec(OperatorKind::BoundaryRobin, config.xi);
        let spec_i = build_spec(OperatorKind::PointEvaluation, config.xi);
        let model = model_at(&problem)?;
        let nodes = adapt_nodes(&reference, &model)?;
        let ext = nodes.extended();
        let (l, sl) = assemble(&ext, &spec_l, OpData::Laplacian)?;
        let (alpha, beta) = robin_data(&problem, &ext, 0.0);
        let (b, sb) = assemble(&ext, &spec_b, OpData::Robin { alpha: &alpha, beta: &beta })?;
        let (bundle, si) = build_interp_bundle(&ext, &spec_i, 0.0)?;
        let t_final = config.t_final.unwrap_or(problem.t_final);
        let (dt, n_steps) = match config.dt {
            Some(dt) => fit_dt(dt, t_final),
            None => choose_dt(reference.h, problem.u_max, t_final),
        };
        let values: Vec<f64> = ext.domain_points().iter().map(|&p| (problem.exact)(p, 0.0)).collect();
        let solution = ext.coords.iter().map(|&p| (problem.exact)(p, 0.0)).collect();
        let preprocess_ms = start.elapsed().as_secs_f64() * 1e3;
        Ok(SolverState {
            history: vec![Level {
                t: 0.0,
                ext: ext.clone(),
                bundle,
                values,
            }],
            problem,
            config,
            spec_l,
            spec_b,
            spec_i,
            reference,
            model,
            ext,
            l,
            b,
            solution,
            step: 0,
            t: 0.0,
            dt,
            n_steps,
            t_final,
            log: Vec::new(),
            stats: UpdateStats {
                laplacian: sl,
                boundary: sb,
                interp: si,
            },
            preprocess_ms,
        })
    }

    pub fn is_done(&self) -> bool {
        self.step >= self.n_steps
    }

    /// Advance one step.
    pub fn step(&mut self) -> Result<&StepRecord> {
        let start = Instant::now();
        let p = &self.problem;
        let dt = self.dt;
        let t_new = if self.step + 1 == self.n_steps {
            self.t_final
        } else {
            (self.step + 1) as f64 * dt
        };
        let velocity = |x, t| (p.velocity)(x, t);

        let model = if self.model.embedded.is_empty() {
            DomainModel {
                embedded: Vec::new(),
                t: t_new,
            }
        } else {
            advect_seeds(&self.model, &velocity, self.t, dt)?
        };
        let ext = adapt_nodes(&self.reference, &model)?.extended();
        let (l, sl) = update(&self.l, &self.ext, &ext, &self.spec_l, OpData::Laplacian)?;
        let (alpha, beta) = robin_data(p, &ext, t_new);
        let (b, sb) = update(
            &self.b,
            &self.ext,
            &ext,
            &self.spec_b,
            OpData::Robin { alpha: &alpha, beta: &beta },
        )?;
        let (bundle, si) = update_interp_bundle(&self.history[0].bundle, &ext, &self.spec_i, t_new)?;

        let order = (self.step + 1).min(3);
        let scheme = BdfScheme::new(order)?;
        let n = ext.n();
        let coords = trace_levels(&ext.coords, &velocity, t_new, dt, order);
        let domain_coords: Vec<_> = coords.iter().map(|c| c[..n].to_vec()).collect();
        let hist: Vec<(&InterpBundle, &[f64])> =
            self.history.iter().map(|lv| (&lv.bundle, lv.values.as_slice())).collect();
        let dep = reconstruct(&hist, &ext.coords[..n], domain_coords);
        let ghost_vals = self.history[0].bundle.eval(&self.history[0].values, &coords[0][n..]);

        let forcing: Vec<f64> = ext.domain_points().iter().map(|&x| (p.forcing)(x, t_new)).collect();
        let bc: Vec<f64> = ext
            .boundary_points()
            .iter()
            .zip(&ext.normals)
            .map(|(&x, &nrm)| p.bc_data(x, nrm, t_new))
            .collect();
        let (a, rhs) = form_system(&l, &b, &scheme, p.nu, dt, &dep.values, &forcing, &bc)?;
        let guess = if self.config.warm_start {
            gmres_guess(&dep.values[0], &ghost_vals)
        } else {
            vec![0.0; a.nrows()]
        };
        let tol = gmres_tolerance(self.reference.h, self.config.xi);
        let out = solve_system(&a, &rhs, &guess, n, tol, self.config.max_iterations, self.config.precondition)?;

        let values = out.x[..n].to_vec();
        self.history.insert(
            0,
            Level {
                t: t_new,
                ext: ext.clone(),
                bundle,
                values,
            },
        );
        self.history.truncate(3);
        self.solution = out.x;
        self.model = model;
        self.ext = ext;
        self.l = l;
        self.b = b;
        self.t = t_new;
        self.step += 1;
        self.stats = UpdateStats {
            laplacian: sl,
            boundary: sb,
            interp: si,
        };
        let wall_ms = if self.config.wall_clock {
            start.elapsed().as_secs_f64() * 1e3
        } else {
            0.0
        };
        self.log.push(StepRecord {
            step: self.step,
            t: t_new,
            n,
            n_b: self.ext.n_boundary,
            n_s: sl.n_s,
            rows_copied: sl.rows_copied,
            rows_recomputed: sl.rows_recomputed,
            gmres_iters: out.iterations,
            residual: out.residual,
            wall_ms,
        });
        Ok(self.log.last().unwrap())
    }

    /// Step until the final time.
    pub fn run(&mut self) -> Result<()> {
        while !self.is_done() {
            self.step()?;
        }
        Ok(())
    }

    /// Relative l2 error against the exact solution at the interior and
    /// boundary nodes.
    pub fn error(&self) -> Result<f64> {
        let lv = &self.history[0];
        let exact: Vec<f64> = lv.ext.domain_points().iter().map(|&x| (self.problem.exact)(x, lv.t)).collect();
        rel_l2_error(&lv.values, &exact)
    }

    /// Mean GMRES iterations per step.
    pub fn mean_iterations(&self) -> f64 {
        if self.log.is_empty() {
            return 0.0;
        }
        self.log.iter().map(|r| r.gmres_iters as f64).sum::<f64>() / self.log.len() as f64
    }
}

/// Equilibrate, precondition with the diagonal Schur approximation (or
/// not), and run GMRES from `guess`. The first `n` unknowns form the
/// leading block.
pub fn solve_system(
    a: &SparseMat,
    rhs: &[f64],
    guess: &[f64],
    n: usize,
    tol: f64,
    maxit: usize,
    precondition: bool,
) -> Result<GmresOutput> {
    let eq = equilibrate(a)?;
    let rb: Vec<f64> = rhs.iter().zip(&eq.row).map(|(v, r)| v * r).collect();
    let y0: Vec<f64> = guess.iter().zip(&eq.col).map(|(v, c)| v / c).collect();
    let pc: Box<dyn Preconditioner> = if precondition {
        Box::new(SaddlePrecond::build(&eq.matrix, n, a.nrows() - n)?)
    } else {
        Box::new(Identity)
    };
    let mut out = gmres(&eq.matrix, &rb, &y0, tol, maxit, pc.as_ref())?;
    out.x.iter_mut().zip(&eq.col).for_each(|(v, c)| *v *= c);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point::Point;
    use crate::problems::{make_disk2d, make_heat};
    use std::sync::Arc;

    #[test]
    fn dt_examples() {
        let (dt, n) = choose_dt(0.05, 1.0, 0.5);
        assert_eq!(n, 34);
        assert!((dt - 0.5 / 34.0).abs() < 1e-15);
        let (dt2, _) = choose_dt(0.05, 2.0, 0.5);
        assert!(dt2 < dt);
        assert_eq!(CFL * 0.05 / 2.0, 0.5 * CFL * 0.05 / 1.0);
        let (dt, n) = choose_dt(0.1, 0.3, 0.5);
        assert_eq!((dt, n), (0.1, 5));
        assert_eq!(choose_dt(0.1, 0.0, 0.3), (0.03, 10));
    }

    #[test]
    fn bdf_coefficients_and_exactness() {
        for order in 1..=3 {
            let s = BdfScheme::new(order).unwrap();
            assert!((s.history_coeffs.iter().sum::<f64>() - 1.0).abs() < 1e-15);
            // y' = 3 t^2 - 2 t + 1 integrated exactly for polynomials of degree <= order.
            let y = |t: f64| t.powi(order as i32) + 0.5 * t - 1.0;
            let dy = |t: f64| order as f64 * t.powi(order as i32 - 1) + 0.5;
            let dt = 0.1;
            let t = 0.7;
            let hist: f64 = s
                .history_coeffs
                .iter()
                .enumerate()
                .map(|(k, a)| a * y(t - k as f64 * dt))
                .sum();
            let next = hist + s.lhs_coeff * dt * dy(t + dt);
            assert!((next - y(t + dt)).abs() < 1e-13, "order {order}");
        }
        assert!(BdfScheme::new(4).is_err());
    }

    fn setup(h: f64, xi: u32) -> SolverState {
        let mut c = SolverConfig::new(xi, h, 1);
        c.t_final = Some(0.1);
        SolverState::init(make_heat(), c).unwrap()
    }

    #[test]
    fn system_degenerates_without_diffusion() {
        let st = setup(0.15, 2);
        let n = st.ext.n();
        let s = BdfScheme::new(3).unwrap();
        let deps: Vec<Vec<f64>> = (0..3).map(|k| vec![k as f64 + 1.0; n]).collect();
        let (a, r) = form_system(&st.l, &st.b, &s, 0.0, 0.1, &deps, &vec![0.0; n], &vec![0.0; st.ext.n_boundary])
            .unwrap();
        assert_eq!(a.nrows(), st.ext.n_ext());
        assert_eq!(a.ncols(), st.ext.n_ext());
        for i in 0..n {
            let (cols, vals) = a.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                assert_eq!(v, if c == i { 1.0 } else { 0.0 });
            }
            assert!((r[i] - (18.0 - 18.0 + 6.0) / 11.0).abs() < 1e-15);
        }
        let s1 = BdfScheme::new(1).unwrap();
        assert!(form_system(&st.l, &st.b, &s1, 0.0, 0.1, &deps, &vec![0.0; n], &[]).is_err());
    }

    #[test]
    fn constant_state_is_preserved() {
        let mut p = make_heat();
        p.exact = Arc::new(|_, _| 2.0);
        p.grad_exact = Arc::new(|_, _| Point::ZERO);
        p.forcing = Arc::new(|_, _| 0.0);
        p.nu = 0.0;
        p.alpha = Arc::new(|_, _| -1.0);
        let mut c = SolverConfig::new(2, 0.15, 1);
        c.t_final = Some(0.3);
        let mut st = SolverState::init(p, c).unwrap();
        while !st.is_done() {
            st.step().unwrap();
            assert!(st.history[0].values.iter().all(|v| (v - 2.0).abs() < 1e-10));
        }
        assert!(st.log.iter().skip(1).all(|r| r.rows_recomputed == 0));
    }

    #[test]
    fn frozen_domain_copies_all_rows() {
        let mut st = setup(0.12, 2);
        for _ in 0..3 {
            let r = st.step().unwrap().clone();
            assert_eq!(r.rows_recomputed, 0);
            assert_eq!(st.stats.laplacian.tau, 1.0);
            assert_eq!(st.stats.interp.tau, 1.0);
        }
        assert_eq!(st.history.len(), 3);
    }

    #[test]
    fn manufactured_step_converges() {
        let mut c = SolverConfig::new(2, 0.07, 3);
        c.t_final = Some(0.5);
        let mut st = SolverState::init(make_disk2d(1).unwrap(), c).unwrap();
        let tol = gmres_tolerance(0.07, 2);
        for _ in 0..3 {
            let r = st.step().unwrap();
            assert!(r.residual <= tol, "{}", r.residual);
            assert_eq!(st.solution.len(), st.ext.n_ext());
        }
        assert!(st.error().unwrap() < 1e-2);
    }

    #[test]
    fn warm_start_helps() {
        let run = |warm: bool| {
            let mut c = SolverConfig::new(2, 0.07, 3);
            c.t_final = Some(0.1);
            c.warm_start = warm;
            let mut st = SolverState::init(make_disk2d(1).unwrap(), c).unwrap();
            st.run().unwrap();
            st.log.iter().map(|r| r.gmres_iters).sum::<usize>()
        };
        assert!(run(true) <= run(false));
    }

    #[test]
    fn static_guess_is_previous_solution() {
        let mut st = setup(0.15, 2);
        st.step().unwrap();
        let prev = st.history[0].values.clone();
        let n = st.ext.n();
        let coords = trace_levels(&st.ext.coords, &|_, _| Point::ZERO, st.t + st.dt, st.dt, 1);
        let vals = st.history[0].bundle.eval(&prev, &coords[0][..n]);
        assert_eq!(gmres_guess(&vals, &[]), prev);
    }
}
