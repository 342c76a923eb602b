//! Idle-subcarrier dither planning and the minimax peak solver.
//!
//! A [`DitherPlan`] partitions the idle subcarriers `U` of a block into
//! groups `U_1..U_L` with modulus bounds `R_1..R_L`. The solver then finds
//! dither values `ζ` on those subcarriers that minimise the peak
//! `‖x + F_U^H ζ‖∞` subject to `|ζ_i| <= R_l(i)`.
//!
//! The peak is replaced by the log-sum-exp surrogate
//! `S_τ(y) = τ log Σ_j exp(|y_j| / τ)`, which overestimates the true peak
//! by at most `τ log N`. The surrogate is minimised by accelerated
//! projected gradient (restarted on increase) with a backtracking Armijo
//! step, while `τ` is annealed geometrically down to a floor. Projection
//! onto the disks is radial clipping. One iteration costs one forward
//! transform for the gradient plus one inverse transform per line-search
//! trial; everything else is O(N).

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::Rng;

use crate::{math, Complex, Constellation, Dft, Error, FrequencyBlock, Result, SystemConfig, TimeSignal};

/// Grouping of the idle subcarriers and the modulus bound of each group.
#[derive(Debug, Clone, PartialEq)]
pub struct DitherPlan {
    groups: Vec<Vec<usize>>,
    radii: Vec<f64>,
    subblock_groups: Vec<usize>,
    subblock_len: usize,
    radius_by_index: Vec<f64>,
}

impl DitherPlan {
    fn from_assignment(block: &FrequencyBlock, subblock_len: usize, subblock_groups: Vec<usize>, radii: Vec<f64>) -> Self {
        let mut groups = vec![Vec::new(); radii.len()];
        let mut radius_by_index = vec![0.0; block.len()];
        for i in block.idle_indices() {
            let g = subblock_groups[i / subblock_len];
            groups[g].push(i);
            radius_by_index[i] = radii[g];
        }
        Self { groups, radii, subblock_groups, subblock_len, radius_by_index }
    }

    /// `U_1..U_L`, each ascending.
    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    /// `R_1..R_L`
    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    /// Group index of every subblock.
    pub fn subblock_groups(&self) -> &[usize] {
        &self.subblock_groups
    }

    pub fn subblock_len(&self) -> usize {
        self.subblock_len
    }

    /// Bound on subcarrier `index`; zero on active subcarriers.
    pub fn radius_at(&self, index: usize) -> f64 {
        self.radius_by_index[index]
    }

    pub fn radius_by_index(&self) -> &[f64] {
        &self.radius_by_index
    }

    /// N
    pub fn len(&self) -> usize {
        self.radius_by_index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radius_by_index.is_empty()
    }

    pub fn idle_count(&self) -> usize {
        self.groups.iter().map(Vec::len).sum()
    }

    /// Uniformly random point inside every disk (zero where the bound is zero).
    pub fn random_feasible<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Complex> {
        self.radius_by_index
            .iter()
            .map(|&r| {
                if r > 0.0 {
                    let rho = r * math::sqrt(rng.random::<f64>());
                    Complex::from_polar(rho, 2.0 * PI * rng.random::<f64>())
                } else {
                    Complex::new(0.0, 0.0)
                }
            })
            .collect()
    }
}

/// Level index of `μ_β`, the smallest active-symbol modulus, for every
/// subblock.
pub fn derive_mu(block: &FrequencyBlock, cfg: &SystemConfig, cons: &Constellation) -> Result<Vec<usize>> {
    check_block(block, cfg)?;
    let n = cfg.subblock_len();
    (0..cfg.subblocks())
        .map(|beta| {
            let mut level = None;
            for i in beta * n..(beta + 1) * n {
                if block.is_active(i) {
                    let v = block.values()[i];
                    let l = cons.level_of(v).ok_or(Error::UnknownLevel(v.norm()))?;
                    level = Some(level.map_or(l, |m: usize| m.min(l)));
                }
            }
            level.ok_or(Error::Param { field: "block", reason: "subblock without active subcarriers" })
        })
        .collect()
}

/// Multilevel plan with radii `R_l = A_l − A_1 + r1`.
///
/// Rejects `r1 >= A_1`, which would let a dither value reach the weakest
/// active amplitude; see [`build_plan_unchecked`] to allow it anyway.
pub fn build_plan(block: &FrequencyBlock, cfg: &SystemConfig, cons: &Constellation, r1: f64) -> Result<DitherPlan> {
    let a1 = cons.levels()[0];
    if r1 >= a1 {
        return Err(Error::MarginViolation { r1, a1 });
    }
    build_plan_unchecked(block, cfg, cons, r1)
}

/// [`build_plan`] without the `r1 < A_1` check.
pub fn build_plan_unchecked(block: &FrequencyBlock, cfg: &SystemConfig, cons: &Constellation, r1: f64) -> Result<DitherPlan> {
    let radii = criterion_radii(cons, r1)?;
    plan_from_radii(block, cfg, cons, &radii)
}

/// `R_l = A_l − A_1 + r1` for every level.
pub fn criterion_radii(cons: &Constellation, r1: f64) -> Result<Vec<f64>> {
    if !(r1 >= 0.0) || !r1.is_finite() {
        return Err(Error::Param { field: "R1", reason: "must be finite and nonnegative" });
    }
    let a1 = cons.levels()[0];
    Ok(cons.levels().iter().map(|&a| a - a1 + r1).collect())
}

/// Multilevel grouping with caller-chosen radii, one per amplitude level.
pub fn plan_from_radii(block: &FrequencyBlock, cfg: &SystemConfig, cons: &Constellation, radii: &[f64]) -> Result<DitherPlan> {
    if radii.len() != cons.level_count() {
        return Err(Error::Length { expected: cons.level_count(), actual: radii.len() });
    }
    if radii.iter().any(|r| !(*r >= 0.0) || !r.is_finite()) {
        return Err(Error::Param { field: "radii", reason: "must be finite and nonnegative" });
    }
    let levels = derive_mu(block, cfg, cons)?;
    Ok(DitherPlan::from_assignment(block, cfg.subblock_len(), levels, radii.to_vec()))
}

/// Single group holding every idle subcarrier, bounded by `radius`.
pub fn build_single_level_plan(block: &FrequencyBlock, cfg: &SystemConfig, radius: f64) -> Result<DitherPlan> {
    check_block(block, cfg)?;
    if !(radius >= 0.0) || !radius.is_finite() {
        return Err(Error::Param { field: "R", reason: "must be finite and nonnegative" });
    }
    Ok(DitherPlan::from_assignment(block, cfg.subblock_len(), vec![0; cfg.subblocks()], vec![radius]))
}

fn check_block(block: &FrequencyBlock, cfg: &SystemConfig) -> Result<()> {
    if block.len() != cfg.subcarriers() {
        return Err(Error::Length { expected: cfg.subcarriers(), actual: block.len() });
    }
    Ok(())
}

/// Annealing schedule for the smoothing width `τ`, relative to the peak
/// amplitude of the undithered signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Smoothing {
    pub initial: f64,
    pub floor: f64,
    /// Per-iteration multiplier.
    pub decay: f64,
}

impl Default for Smoothing {
    fn default() -> Self {
        Self { initial: 0.1, floor: 1e-4, decay: 0.99 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub max_iterations: usize,
    /// Relative change of the true peak regarded as stalled.
    pub tolerance: f64,
    /// Consecutive stalled iterations (at the smoothing floor) that stop the solver.
    pub patience: usize,
    pub smoothing: Smoothing,
    /// Number of starts for [`DitherSolver::solve_multistart`]; the first is ζ = 0.
    pub restarts: usize,
    /// Armijo sufficient-decrease constant.
    pub armijo: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iterations: 2000,
            tolerance: 1e-6,
            patience: 10,
            smoothing: Smoothing::default(),
            restarts: 1,
            armijo: 1e-4,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        let s = &self.smoothing;
        if !(s.initial > 0.0 && s.floor > 0.0 && s.floor <= s.initial && s.decay > 0.0 && s.decay <= 1.0) {
            return Err(Error::Param { field: "smoothing", reason: "need 0 < floor <= initial and 0 < decay <= 1" });
        }
        if !(self.tolerance >= 0.0) {
            return Err(Error::Param { field: "tolerance", reason: "must be nonnegative" });
        }
        if !(self.armijo > 0.0 && self.armijo < 1.0) {
            return Err(Error::Param { field: "armijo", reason: "must lie in (0, 1)" });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DitherSolution {
    /// Dither per subcarrier (length N, zero on active subcarriers).
    pub dither: Vec<Complex>,
    /// `‖x + F_U^H ζ‖∞²`, recomputed from the returned dither.
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `λ_β`: largest dither modulus in each subblock.
    pub lambda_per_subblock: Vec<f64>,
    /// The dithered time signal.
    pub signal: TimeSignal,
}

impl DitherSolution {
    /// Dither values grouped as `ζ_1..ζ_L`, in the order of the plan's groups.
    pub fn grouped(&self, plan: &DitherPlan) -> Vec<Vec<Complex>> {
        plan.groups().iter().map(|g| g.iter().map(|&i| self.dither[i]).collect()).collect()
    }
}

/// Solver bound to one transform length.
#[derive(Debug, Clone)]
pub struct DitherSolver {
    dft: Dft,
}

/// Solves one block from `ζ = 0`.
pub fn solve(x: &TimeSignal, plan: &DitherPlan, opts: &SolverOptions) -> Result<DitherSolution> {
    DitherSolver::new(x.len())?.solve(x, plan, opts)
}

struct Smoothed {
    value: f64,
}

/// Terms with `(|y_j| − peak)/τ` below this contribute less than `e^-40`.
const NEGLIGIBLE: f64 = -40.0;

#[inline]
fn amplitude(v: Complex) -> f64 {
    math::sqrt(v.re * v.re + v.im * v.im)
}

/// `S_τ(y)` and, when `grad` is given, `∂S/∂y` written into it.
fn smoothed_peak(y: &[Complex], tau: f64, grad: Option<&mut [Complex]>) -> Smoothed {
    let peak = peak_amplitude(y);
    let cutoff = peak + NEGLIGIBLE * tau;
    let mut sum = 0.0;
    match grad {
        Some(g) => {
            for (gj, &v) in g.iter_mut().zip(y) {
                let a = amplitude(v);
                *gj = if a > cutoff && a > 0.0 {
                    let e = math::exp((a - peak) / tau);
                    sum += e;
                    v * (e / a)
                } else {
                    Complex::new(0.0, 0.0)
                };
            }
            if sum == 0.0 {
                return Smoothed { value: peak };
            }
            let inv = 1.0 / sum;
            for gj in g.iter_mut() {
                *gj *= inv;
            }
        }
        None => {
            for &v in y {
                let a = amplitude(v);
                if a > cutoff {
                    sum += math::exp((a - peak) / tau);
                }
            }
        }
    }
    if sum == 0.0 {
        return Smoothed { value: peak };
    }
    Smoothed { value: peak + tau * math::ln(sum) }
}

fn peak_amplitude(y: &[Complex]) -> f64 {
    math::sqrt(crate::signal::peak_power(y))
}

impl DitherSolver {
    pub fn new(n: usize) -> Result<Self> {
        Ok(Self { dft: Dft::new(n)? })
    }

    pub fn dft(&self) -> &Dft {
        &self.dft
    }

    pub fn solve(&self, x: &TimeSignal, plan: &DitherPlan, opts: &SolverOptions) -> Result<DitherSolution> {
        let zero = vec![Complex::new(0.0, 0.0); plan.len()];
        self.solve_from(x, plan, opts, &zero)
    }

    /// Best of `opts.restarts` runs: one from `ζ = 0`, the rest from random
    /// feasible points drawn from `rng`.
    pub fn solve_multistart<R: Rng + ?Sized>(
        &self,
        x: &TimeSignal,
        plan: &DitherPlan,
        opts: &SolverOptions,
        rng: &mut R,
    ) -> Result<DitherSolution> {
        let mut best = self.solve(x, plan, opts)?;
        for _ in 1..opts.restarts {
            let start = plan.random_feasible(rng);
            let candidate = self.solve_from(x, plan, opts, &start)?;
            if candidate.objective < best.objective {
                best = candidate;
            }
        }
        Ok(best)
    }

    /// Solves starting from `start` (length N, projected onto the plan).
    pub fn solve_from(&self, x: &TimeSignal, plan: &DitherPlan, opts: &SolverOptions, start: &[Complex]) -> Result<DitherSolution> {
        opts.validate()?;
        let n = self.dft.len();
        if x.len() != n {
            return Err(Error::Length { expected: n, actual: x.len() });
        }
        if plan.len() != n {
            return Err(Error::Length { expected: n, actual: plan.len() });
        }
        if start.len() != n {
            return Err(Error::Length { expected: n, actual: start.len() });
        }

        let radius = plan.radius_by_index();
        // zero-radius subcarriers are pinned and never touched
        let free: Vec<usize> = (0..n).filter(|&i| radius[i] > 0.0).collect();
        let project = |i: usize, v: Complex| -> Complex {
            let r = radius[i];
            let m = v.norm();
            if m > r {
                v * (r / m)
            } else {
                v
            }
        };

        let mut z = vec![Complex::new(0.0, 0.0); n];
        for &i in &free {
            z[i] = project(i, start[i]);
        }
        let scale = peak_amplitude(x.samples());
        if free.is_empty() || scale == 0.0 {
            return self.finish(x, plan, z, 0, true);
        }

        let mut y = self.synthesize_add(x.samples(), &z)?;
        let mut z_prev = z.clone();
        let mut y_prev = y.clone();
        let mut best_z = z.clone();
        let mut best_peak = peak_amplitude(&y);
        let mut last_peak = best_peak;

        let mut grad_y = vec![Complex::new(0.0, 0.0); n];
        let mut v = vec![Complex::new(0.0, 0.0); n];
        let mut yv = vec![Complex::new(0.0, 0.0); n];
        let mut z_next = vec![Complex::new(0.0, 0.0); n];
        let mut step_buf = vec![Complex::new(0.0, 0.0); n];
        let mut y_next = vec![Complex::new(0.0, 0.0); n];

        let mut t = 1.0f64;
        let mut step = 1.0f64;
        let mut stalled = 0usize;
        let mut converged = false;
        let mut iterations = 0;
        let mut rel_tau = opts.smoothing.initial;

        for _ in 0..opts.max_iterations {
            iterations += 1;
            let at_floor = rel_tau <= opts.smoothing.floor;
            let tau = scale * rel_tau.max(opts.smoothing.floor);

            let t_next = 0.5 * (1.0 + math::sqrt(1.0 + 4.0 * t * t));
            let beta = (t - 1.0) / t_next;
            for j in 0..n {
                v[j] = z[j] + (z[j] - z_prev[j]) * beta;
                yv[j] = y[j] + (y[j] - y_prev[j]) * beta;
            }

            let sv = smoothed_peak(&yv, tau, Some(&mut grad_y)).value;
            self.dft.forward_in_place(&mut grad_y)?;

            // backtracking along the projection arc
            let mut accepted = false;
            let mut s_next = sv;
            step *= 2.0;
            for _ in 0..60 {
                let mut decrease = 0.0;
                let mut moved = false;
                for s in step_buf.iter_mut() {
                    *s = Complex::new(0.0, 0.0);
                }
                for &i in &free {
                    let zi = project(i, v[i] - grad_y[i] * step);
                    let d = zi - v[i];
                    z_next[i] = zi;
                    step_buf[i] = d;
                    decrease += grad_y[i].re * d.re + grad_y[i].im * d.im;
                    moved |= d != Complex::new(0.0, 0.0);
                }
                if !moved {
                    accepted = true;
                    y_next.copy_from_slice(&yv);
                    break;
                }
                self.dft.inverse_in_place(&mut step_buf)?;
                for j in 0..n {
                    y_next[j] = yv[j] + step_buf[j];
                }
                s_next = smoothed_peak(&y_next, tau, None).value;
                if s_next <= sv + opts.armijo * decrease {
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                // no decrease found from the extrapolated point: drop momentum
                t = 1.0;
                z_prev.copy_from_slice(&z);
                y_prev.copy_from_slice(&y);
                rel_tau *= opts.smoothing.decay;
                continue;
            }

            // monotone variant: a step that ends above the current iterate is
            // dropped and the momentum restarted from the current iterate
            if s_next > smoothed_peak(&y, tau, None).value {
                t = 1.0;
                z_prev.copy_from_slice(&z);
                y_prev.copy_from_slice(&y);
                rel_tau *= opts.smoothing.decay;
                continue;
            }
            t = t_next;
            for &i in &free {
                z_prev[i] = z[i];
                z[i] = z_next[i];
            }
            y_prev.copy_from_slice(&y);
            y.copy_from_slice(&y_next);

            let peak = peak_amplitude(&y);
            if peak < best_peak {
                best_peak = peak;
                best_z.copy_from_slice(&z);
            }
            // the best peak is monotone, so its relative change is a clean
            // stall signal even while momentum makes iterates oscillate
            if at_floor {
                if last_peak - best_peak <= opts.tolerance * last_peak {
                    stalled += 1;
                    if stalled >= opts.patience {
                        converged = true;
                        break;
                    }
                } else {
                    stalled = 0;
                }
            }
            last_peak = best_peak;
            rel_tau *= opts.smoothing.decay;
        }

        self.finish(x, plan, best_z, iterations, converged)
    }

    fn synthesize_add(&self, x: &[Complex], z: &[Complex]) -> Result<Vec<Complex>> {
        let mut buf = z.to_vec();
        self.dft.inverse_in_place(&mut buf)?;
        for (b, &s) in buf.iter_mut().zip(x) {
            *b += s;
        }
        Ok(buf)
    }

    fn finish(&self, x: &TimeSignal, plan: &DitherPlan, dither: Vec<Complex>, iterations: usize, converged: bool) -> Result<DitherSolution> {
        let samples = self.synthesize_add(x.samples(), &dither)?;
        let signal = TimeSignal::new(samples);
        let sb = plan.subblock_len();
        let lambda_per_subblock = dither.chunks(sb).map(|c| c.iter().map(|d| d.norm()).fold(0.0, f64::max)).collect();
        Ok(DitherSolution { objective: signal.peak_power(), dither, iterations, converged, lambda_per_subblock, signal })
    }
}
