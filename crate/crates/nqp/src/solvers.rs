//! Exact and heuristic minimizers over the level-set lattice.
//!
//! All solvers share the same contract: immutable instance in, deterministic
//! [`SolveResult`] out (for a fixed seed), evaluation counts included. The
//! exhaustive solver is the ground-truth oracle; the heuristics never claim
//! optimality. Single-coordinate move costs are computed incrementally from a
//! maintained vector `g = Q w` in O(1) per candidate level, and in debug
//! builds every accepted move is cross-checked against a from-scratch
//! evaluation on small instances.

use crate::error::{Error, Result};
use crate::instance::{Assignment, QpInstance, Scalar};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

/// Caps on solver effort.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverBudget {
    /// Maximum number of objective (or move-delta) evaluations.
    pub max_evaluations: u64,
    /// Optional wall-clock limit for the heuristics. Interrupting on time
    /// makes results machine-dependent, so none is set by default.
    pub max_seconds: Option<f64>,
    /// Maximum iterations (sweeps for local search, proposals for annealing).
    pub max_iterations: u64,
}

impl Default for SolverBudget {
    fn default() -> Self {
        Self {
            max_evaluations: 100_000_000,
            max_seconds: None,
            max_iterations: u64::MAX,
        }
    }
}

impl SolverBudget {
    pub fn with_max_evaluations(max_evaluations: u64) -> Self {
        Self {
            max_evaluations,
            ..Self::default()
        }
    }
}

/// Geometric cooling schedule for [`solve_anneal`].
#[derive(Debug, Clone, PartialEq)]
pub struct AnnealSchedule {
    pub t_initial: f64,
    pub t_final: f64,
    pub steps: u64,
    pub moves_per_step: u64,
}

impl Default for AnnealSchedule {
    fn default() -> Self {
        Self {
            t_initial: 10.0,
            t_final: 1e-3,
            steps: 200,
            moves_per_step: 50,
        }
    }
}

impl AnnealSchedule {
    fn validate(&self) -> Result<()> {
        let ok = self.t_initial > 0.0
            && self.t_final > 0.0
            && self.t_final < self.t_initial
            && self.steps >= 1
            && self.moves_per_step >= 1;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(
                "schedule needs 0 < t_final < t_initial and positive counts".into(),
            ))
        }
    }

    /// Per-step multiplier `(t_final / t_initial)^(1/steps)`, in `(0, 1)`.
    pub fn cooling_factor(&self) -> f64 {
        (self.t_final / self.t_initial).powf(1.0 / self.steps as f64)
    }
}

/// Outcome of a solver run.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult<T> {
    pub best: Assignment<T>,
    pub evaluations: u64,
    pub iterations: u64,
    /// True only for the exhaustive solver.
    pub optimal_proven: bool,
    /// Seed used, absent for deterministic solvers.
    pub seed: Option<u64>,
}

/// Inner solver run from each start of [`solve_multi_start`].
#[derive(Debug, Clone, PartialEq)]
pub enum InnerSolver {
    LocalSearch,
    Anneal(AnnealSchedule),
}

/// Number of points in `S^n`, or an error when it exceeds the budget.
fn search_space(levels: usize, n: usize, budget: &SolverBudget) -> Result<u64> {
    let mut size: u128 = 1;
    for _ in 0..n {
        size = size.saturating_mul(levels as u128);
    }
    if size > budget.max_evaluations as u128 {
        return Err(Error::BudgetExceeded {
            required: size,
            max_evaluations: budget.max_evaluations,
        });
    }
    Ok(size as u64)
}

/// Exhaustive minimization in mixed-radix order (last coordinate fastest).
///
/// Among tied minimizers the lexicographically smallest assignment (components
/// compared by their position in `S`) is returned, which is simply the first
/// one found in enumeration order. Refuses to start when `|S|^N` exceeds the
/// evaluation budget.
pub fn solve_brute_force<T: Scalar>(
    inst: &QpInstance<T>,
    budget: &SolverBudget,
) -> Result<SolveResult<T>> {
    let mut best: Option<(T, Vec<usize>)> = None;
    let evaluations = enumerate_lattice(inst, budget, |value, idx| {
        if best.as_ref().is_none_or(|(b, _)| value < *b) {
            best = Some((value, idx.to_vec()));
        }
    })?;
    let (objective, idx) = best.expect("n >= 1 and |S| >= 1 imply a nonempty lattice");
    let w: Vec<i64> = idx.iter().map(|&i| inst.levels().value_at(i)).collect();
    Ok(SolveResult {
        best: Assignment { w, objective },
        evaluations,
        iterations: evaluations,
        optimal_proven: true,
        seed: None,
    })
}

/// Exhaustive enumeration of the full argmin set, in mixed-radix order.
pub fn brute_force_argmin_set<T: Scalar>(
    inst: &QpInstance<T>,
    budget: &SolverBudget,
) -> Result<(T, Vec<Vec<i64>>)> {
    let mut best: Option<T> = None;
    let mut args: Vec<Vec<usize>> = Vec::new();
    enumerate_lattice(inst, budget, |value, idx| match &best {
        Some(b) if value > *b => {}
        Some(b) if value == *b => args.push(idx.to_vec()),
        _ => {
            best = Some(value);
            args.clear();
            args.push(idx.to_vec());
        }
    })?;
    let to_values = |idx: Vec<usize>| -> Vec<i64> {
        idx.into_iter().map(|i| inst.levels().value_at(i)).collect()
    };
    Ok((
        best.expect("nonempty lattice"),
        args.into_iter().map(to_values).collect(),
    ))
}

/// Depth-first mixed-radix enumeration with incremental partial objectives:
/// the cross term against the fixed prefix is computed once per node, so a
/// full leaf evaluation costs O(N) amortized instead of O(N^2).
fn enumerate_lattice<T: Scalar>(
    inst: &QpInstance<T>,
    budget: &SolverBudget,
    mut visit: impl FnMut(T, &[usize]),
) -> Result<u64> {
    let n = inst.n();
    let expected = search_space(inst.levels().len(), n, budget)?;
    let level_values: Vec<T> = inst
        .levels()
        .values()
        .iter()
        .map(|&v| T::from_level(v))
        .collect();
    let mut idx = vec![0usize; n];
    let mut chosen = vec![T::ZERO; n];
    let mut evaluations = 0u64;

    // partial = objective restricted to the fixed prefix chosen[0..depth]
    #[allow(clippy::too_many_arguments)]
    fn descend<T: Scalar>(
        inst: &QpInstance<T>,
        level_values: &[T],
        depth: usize,
        partial: T,
        idx: &mut [usize],
        chosen: &mut [T],
        evaluations: &mut u64,
        visit: &mut impl FnMut(T, &[usize]),
    ) -> Result<()> {
        let n = inst.n();
        if depth == n {
            *evaluations += 1;
            visit(partial, idx);
            return Ok(());
        }
        let mut cross = T::ZERO;
        for (i, &prefix) in chosen[..depth].iter().enumerate() {
            cross = cross.try_add(inst.q_at(i, depth).try_mul(prefix)?)?;
        }
        cross = cross.try_add(cross)?; // symmetric matrix: both off-diagonal terms
        let q_dd = inst.q_at(depth, depth);
        let c_d = inst.c()[depth];
        for (li, &lv) in level_values.iter().enumerate() {
            let mut value = partial.try_add(q_dd.try_mul(lv.try_mul(lv)?)?)?;
            value = value.try_add(cross.try_mul(lv)?)?;
            value = value.try_add(c_d.try_mul(lv)?)?;
            idx[depth] = li;
            chosen[depth] = lv;
            descend(
                inst,
                level_values,
                depth + 1,
                value,
                idx,
                chosen,
                evaluations,
                visit,
            )?;
        }
        Ok(())
    }

    descend(
        inst,
        &level_values,
        0,
        T::ZERO,
        &mut idx,
        &mut chosen,
        &mut evaluations,
        &mut visit,
    )?;
    debug_assert_eq!(evaluations, expected);
    Ok(evaluations)
}

/// Visit every point of `S^N` with its objective value, in mixed-radix order.
/// Returns the number of points visited.
pub fn for_each_point<T: Scalar>(
    inst: &QpInstance<T>,
    budget: &SolverBudget,
    mut visit: impl FnMut(T, &[i64]),
) -> Result<u64> {
    let values = inst.levels().values();
    let mut w = vec![0i64; inst.n()];
    enumerate_lattice(inst, budget, |objective, idx| {
        for (k, &i) in idx.iter().enumerate() {
            w[k] = values[i];
        }
        visit(objective, &w);
    })
}

/// State shared by the incremental-move heuristics: the assignment, the
/// vector `g = Q w`, and the current objective.
struct MoveState<T> {
    w: Vec<i64>,
    w_t: Vec<T>,
    g: Vec<T>,
    objective: T,
}

impl<T: Scalar> MoveState<T> {
    fn new(inst: &QpInstance<T>, w: Vec<i64>) -> Result<Self> {
        inst.check_assignment(&w)?;
        let w_t: Vec<T> = w.iter().map(|&v| T::from_level(v)).collect();
        let n = inst.n();
        let mut g = Vec::with_capacity(n);
        for i in 0..n {
            let mut acc = T::ZERO;
            for (qij, &wj) in inst.q_row(i).iter().zip(&w_t) {
                acc = acc.try_add(qij.try_mul(wj)?)?;
            }
            g.push(acc);
        }
        let mut objective = T::ZERO;
        for i in 0..n {
            objective = objective.try_add(w_t[i].try_mul(g[i])?)?;
            objective = objective.try_add(inst.c()[i].try_mul(w_t[i])?)?;
        }
        Ok(Self {
            w,
            w_t,
            g,
            objective,
        })
    }

    /// Objective change from setting coordinate `i` to `level`, in O(1).
    fn move_delta(&self, inst: &QpInstance<T>, i: usize, level: i64) -> Result<T> {
        let a = self.w_t[i];
        let b = T::from_level(level);
        let db = b.try_sub(a)?;
        let q_ii = inst.q_at(i, i);
        // Q_ii (b^2 - a^2) + 2 (b - a) (g_i - Q_ii a) + c_i (b - a)
        let quad = q_ii.try_mul(b.try_mul(b)?.try_sub(a.try_mul(a)?)?)?;
        let cross = self.g[i].try_sub(q_ii.try_mul(a)?)?;
        let lin = db.try_mul(cross.try_add(cross)?)?;
        quad.try_add(lin)?.try_add(inst.c()[i].try_mul(db)?)
    }

    /// Objective change from moving coordinates `i` and `j` together: the two
    /// single moves plus the interaction correction `2 Q_ij (bi - ai)(bj - aj)`.
    fn pair_delta(
        &self,
        inst: &QpInstance<T>,
        i: usize,
        level_i: i64,
        j: usize,
        level_j: i64,
    ) -> Result<T> {
        let di = self.move_delta(inst, i, level_i)?;
        let dj = self.move_delta(inst, j, level_j)?;
        let step_i = T::from_level(level_i).try_sub(self.w_t[i])?;
        let step_j = T::from_level(level_j).try_sub(self.w_t[j])?;
        let cross = inst.q_at(i, j).try_mul(step_i)?.try_mul(step_j)?;
        di.try_add(dj)?.try_add(cross.try_add(cross)?)
    }

    fn apply_move(&mut self, inst: &QpInstance<T>, i: usize, level: i64, delta: T) -> Result<()> {
        let a = self.w_t[i];
        let b = T::from_level(level);
        let db = b.try_sub(a)?;
        for (j, gj) in self.g.iter_mut().enumerate() {
            *gj = gj.try_add(inst.q_at(j, i).try_mul(db)?)?;
        }
        self.w[i] = level;
        self.w_t[i] = b;
        self.objective = self.objective.try_add(delta)?;
        self.check_consistency(inst)
    }

    /// Debug-build cross-check: the incremental objective must match a
    /// from-scratch evaluation exactly in the integer domain.
    #[cfg(debug_assertions)]
    fn check_consistency(&self, inst: &QpInstance<T>) -> Result<()> {
        if inst.n() > 16 {
            return Ok(());
        }
        let fresh = inst.objective(&self.w)?;
        use crate::instance::Domain;
        match T::domain() {
            Domain::Int => debug_assert!(
                fresh == self.objective,
                "incremental objective {:?} != fresh {:?}",
                self.objective,
                fresh
            ),
            Domain::Real => {
                let scale = fresh.to_f64().abs().max(1.0);
                debug_assert!(
                    (fresh.to_f64() - self.objective.to_f64()).abs() <= 1e-9 * scale,
                    "incremental objective {:?} drifted from fresh {:?}",
                    self.objective,
                    fresh
                );
            }
        }
        Ok(())
    }

    #[cfg(not(debug_assertions))]
    fn check_consistency(&self, _inst: &QpInstance<T>) -> Result<()> {
        Ok(())
    }
}

fn random_assignment<T: Scalar>(inst: &QpInstance<T>, rng: &mut ChaCha8Rng) -> Vec<i64> {
    let values = inst.levels().values();
    (0..inst.n())
        .map(|_| values[rng.gen_range(0..values.len())])
        .collect()
}

/// Coordinate descent with a pair-move escape phase.
///
/// Scans coordinates in a seed-determined random permutation (reshuffled each
/// sweep) and sets each to its best level with the others fixed; when a full
/// sweep makes no strict improvement, the best joint move of a coordinate
/// pair is tried, and any success returns the search to single-coordinate
/// sweeps. Terminates when neither phase improves, so the result is a 1-swap
/// (indeed 2-swap) local optimum and the objective sequence never increases.
/// A pair scan costs O(N^2 |S|^2) delta evaluations, each O(1).
pub fn solve_local_search<T: Scalar>(
    inst: &QpInstance<T>,
    init: &[i64],
    seed: u64,
    budget: &SolverBudget,
) -> Result<SolveResult<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut result = local_search_with_rng(inst, init.to_vec(), &mut rng, budget)?;
    result.seed = Some(seed);
    Ok(result)
}

fn local_search_with_rng<T: Scalar>(
    inst: &QpInstance<T>,
    init: Vec<i64>,
    rng: &mut ChaCha8Rng,
    budget: &SolverBudget,
) -> Result<SolveResult<T>> {
    let started = Instant::now();
    let mut state = MoveState::new(inst, init)?;
    let n = inst.n();
    let mut order: Vec<usize> = (0..n).collect();
    let mut evaluations = 0u64;
    let mut sweeps = 0u64;

    'outer: loop {
        // phase 1: single-coordinate sweeps until none improves
        loop {
            if sweeps >= budget.max_iterations || out_of_time(&started, budget) {
                break 'outer;
            }
            sweeps += 1;
            order.shuffle(rng);
            let mut improved = false;
            for &i in &order {
                let current = state.w[i];
                let mut best: Option<(T, i64)> = None;
                for &level in inst.levels().values() {
                    if level == current {
                        continue;
                    }
                    if evaluations >= budget.max_evaluations {
                        break 'outer;
                    }
                    evaluations += 1;
                    let delta = state.move_delta(inst, i, level)?;
                    if delta < T::ZERO && best.as_ref().is_none_or(|(d, _)| delta < *d) {
                        best = Some((delta, level));
                    }
                }
                if let Some((delta, level)) = best {
                    state.apply_move(inst, i, level, delta)?;
                    improved = true;
                }
            }
            if !improved {
                break;
            }
        }

        // phase 2: best joint move of any coordinate pair
        let mut best: Option<(T, usize, i64, usize, i64)> = None;
        for i in 0..n {
            for j in (i + 1)..n {
                for &level_i in inst.levels().values() {
                    for &level_j in inst.levels().values() {
                        if level_i == state.w[i] && level_j == state.w[j] {
                            continue;
                        }
                        if evaluations >= budget.max_evaluations || out_of_time(&started, budget) {
                            break 'outer;
                        }
                        evaluations += 1;
                        let delta = state.pair_delta(inst, i, level_i, j, level_j)?;
                        if delta < T::ZERO && best.as_ref().is_none_or(|(d, ..)| delta < *d) {
                            best = Some((delta, i, level_i, j, level_j));
                        }
                    }
                }
            }
        }
        match best {
            Some((_, i, level_i, j, level_j)) => {
                let delta_i = state.move_delta(inst, i, level_i)?;
                state.apply_move(inst, i, level_i, delta_i)?;
                let delta_j = state.move_delta(inst, j, level_j)?;
                state.apply_move(inst, j, level_j, delta_j)?;
            }
            None => break,
        }
    }

    // re-evaluate from scratch so the reported objective carries no
    // incremental-accumulation drift in the real domain
    let objective = inst.objective(&state.w)?;
    Ok(SolveResult {
        best: Assignment {
            w: state.w,
            objective,
        },
        evaluations,
        iterations: sweeps,
        optimal_proven: false,
        seed: None,
    })
}

/// Metropolis annealing on single-coordinate moves with geometric cooling.
///
/// Proposals pick a coordinate uniformly and a new level uniformly over the
/// other levels; improving moves are always accepted, worsening moves with
/// probability `exp(-delta / T)`. The best assignment seen is returned, not
/// the final state.
pub fn solve_anneal<T: Scalar>(
    inst: &QpInstance<T>,
    schedule: &AnnealSchedule,
    seed: u64,
    budget: &SolverBudget,
) -> Result<SolveResult<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let init = random_assignment(inst, &mut rng);
    let mut result = anneal_with_rng(inst, schedule, init, &mut rng, budget)?;
    result.seed = Some(seed);
    Ok(result)
}

fn anneal_with_rng<T: Scalar>(
    inst: &QpInstance<T>,
    schedule: &AnnealSchedule,
    init: Vec<i64>,
    rng: &mut ChaCha8Rng,
    budget: &SolverBudget,
) -> Result<SolveResult<T>> {
    schedule.validate()?;
    let started = Instant::now();
    let mut state = MoveState::new(inst, init)?;
    let mut best = Assignment {
        w: state.w.clone(),
        objective: state.objective,
    };
    let n = inst.n();
    let levels = inst.levels().values();
    let factor = schedule.cooling_factor();
    let mut temperature = schedule.t_initial;
    let mut evaluations = 0u64;
    let mut proposals = 0u64;

    'outer: for _ in 0..schedule.steps {
        for _ in 0..schedule.moves_per_step {
            if proposals >= budget.max_iterations
                || evaluations >= budget.max_evaluations
                || out_of_time(&started, budget)
            {
                break 'outer;
            }
            proposals += 1;
            evaluations += 1;
            let i = rng.gen_range(0..n);
            let current_idx = inst
                .levels()
                .index_of(state.w[i])
                .expect("state stays inside the level set");
            let mut pick = rng.gen_range(0..levels.len() - 1);
            if pick >= current_idx {
                pick += 1;
            }
            let level = levels[pick];
            let delta = state.move_delta(inst, i, level)?;
            let accept =
                delta <= T::ZERO || rng.gen::<f64>() < (-delta.to_f64() / temperature).exp();
            if accept {
                state.apply_move(inst, i, level, delta)?;
                if state.objective < best.objective {
                    best = Assignment {
                        w: state.w.clone(),
                        objective: state.objective,
                    };
                }
            }
        }
        temperature *= factor;
    }

    best.objective = inst.objective(&best.w)?;
    Ok(SolveResult {
        best,
        evaluations,
        iterations: proposals,
        optimal_proven: false,
        seed: None,
    })
}

/// Run the inner solver from `starts` independent random initial assignments
/// with seeds `seed + k` and keep the best outcome (ties go to the earliest
/// start). Evaluation and iteration counts accumulate across starts.
pub fn solve_multi_start<T: Scalar>(
    inst: &QpInstance<T>,
    starts: u64,
    seed: u64,
    inner: &InnerSolver,
    budget: &SolverBudget,
) -> Result<SolveResult<T>> {
    if starts < 1 {
        return Err(Error::InvalidArgument("need at least one start".into()));
    }
    let mut best: Option<Assignment<T>> = None;
    let mut evaluations = 0u64;
    let mut iterations = 0u64;
    for k in 0..starts {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k));
        let init = random_assignment(inst, &mut rng);
        let run = match inner {
            InnerSolver::LocalSearch => local_search_with_rng(inst, init, &mut rng, budget)?,
            InnerSolver::Anneal(schedule) => {
                anneal_with_rng(inst, schedule, init, &mut rng, budget)?
            }
        };
        evaluations += run.evaluations;
        iterations += run.iterations;
        if best
            .as_ref()
            .is_none_or(|b| run.best.objective < b.objective)
        {
            best = Some(run.best);
        }
    }
    Ok(SolveResult {
        best: best.expect("starts >= 1"),
        evaluations,
        iterations,
        optimal_proven: false,
        seed: Some(seed),
    })
}

fn out_of_time(started: &Instant, budget: &SolverBudget) -> bool {
    budget
        .max_seconds
        .is_some_and(|limit| started.elapsed().as_secs_f64() > limit)
}

/// Solver selection for callers that dispatch by name (pipeline, CLI).
#[derive(Debug, Clone, PartialEq)]
pub enum SolverChoice {
    Brute,
    /// Single local search from a seed-derived random start.
    Local,
    Anneal(AnnealSchedule),
    Multi {
        starts: u64,
        inner: InnerSolver,
    },
}

/// Run the chosen solver. `seed` is ignored by the exhaustive solver.
pub fn run_solver<T: Scalar>(
    inst: &QpInstance<T>,
    choice: &SolverChoice,
    seed: u64,
    budget: &SolverBudget,
) -> Result<SolveResult<T>> {
    match choice {
        SolverChoice::Brute => solve_brute_force(inst, budget),
        SolverChoice::Local => solve_multi_start(inst, 1, seed, &InnerSolver::LocalSearch, budget),
        SolverChoice::Anneal(schedule) => solve_anneal(inst, schedule, seed, budget),
        SolverChoice::Multi { starts, inner } => {
            solve_multi_start(inst, *starts, seed, inner, budget)
        }
    }
}
