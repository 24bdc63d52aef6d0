//! Echo state network front end: simulate a random recurrent network, harvest
//! states, and train readouts — a real-valued baseline by ridge regression and
//! a discrete readout over a level set via the lattice solvers.
//!
//! The network is `x(i+1) = tanh(W x(i) + W_in u(i+1))` from `x(0) = 0` with
//! fixed random weights; only the linear readout is trained. Squared-loss
//! readout training over harvested states `X` and targets `y` is exactly the
//! quadratic program with `Q = X X^T`, `c = -2 X y`, which is what links this
//! module to the rest of the crate.

use crate::error::{Error, Result};
use crate::instance::QpInstance;
use crate::level_set::LevelSet;
use crate::solvers::{run_solver, SolveResult, SolverBudget, SolverChoice};
use crate::spectral;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Construction parameters for [`Esn::new`].
#[derive(Debug, Clone, PartialEq)]
pub struct EsnConfig {
    pub reservoir_size: usize,
    pub input_dim: usize,
    /// Target spectral radius of the recurrent matrix; canonical 0.9.
    pub spectral_radius: f64,
    /// Input weights are uniform in `[-input_scale, input_scale]`.
    pub input_scale: f64,
    /// Probability that a recurrent weight is nonzero.
    pub density: f64,
    pub seed: u64,
}

impl Default for EsnConfig {
    fn default() -> Self {
        Self {
            reservoir_size: 30,
            input_dim: 1,
            spectral_radius: 0.9,
            input_scale: 0.5,
            density: 0.1,
            seed: 0,
        }
    }
}

/// A fixed random reservoir: recurrent weights `w` rescaled to the requested
/// spectral radius and input weights `w_in`.
#[derive(Debug, Clone, PartialEq)]
pub struct Esn {
    pub w: DMatrix<f64>,
    pub w_in: DMatrix<f64>,
    pub spectral_radius: f64,
    pub input_scale: f64,
    pub density: f64,
    /// Seed actually used; differs from the requested one only if a draw had
    /// to be regenerated because its spectral radius was numerically zero.
    pub seed: u64,
}

impl Esn {
    /// Draw random weights and rescale `w` to the target spectral radius.
    ///
    /// Recurrent entries are nonzero with probability `density`, uniform in
    /// `[-1, 1]`; the spectral radius estimate is by power iteration (two-term
    /// fit) with a dense eigendecomposition as fallback. A draw whose radius
    /// is numerically zero is regenerated from `seed + 1`, and so on.
    pub fn new(config: &EsnConfig) -> Result<Esn> {
        let n = config.reservoir_size;
        if n < 1 || config.input_dim < 1 {
            return Err(Error::InvalidArgument(
                "reservoir size and input dimension must be at least 1".into(),
            ));
        }
        if config.spectral_radius.is_nan()
            || config.spectral_radius <= 0.0
            || !config.spectral_radius.is_finite()
        {
            return Err(Error::InvalidArgument(
                "spectral radius must be positive and finite".into(),
            ));
        }
        if !(config.density > 0.0 && config.density <= 1.0) {
            return Err(Error::InvalidArgument("density must be in (0, 1]".into()));
        }
        if config.input_scale.is_nan()
            || config.input_scale < 0.0
            || !config.input_scale.is_finite()
        {
            return Err(Error::InvalidArgument(
                "input scale must be non-negative and finite".into(),
            ));
        }

        const MAX_REGENERATIONS: u64 = 16;
        for attempt in 0..MAX_REGENERATIONS {
            let seed = config.seed.wrapping_add(attempt);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut w_raw = vec![0.0f64; n * n];
            for entry in w_raw.iter_mut() {
                if rng.gen::<f64>() < config.density {
                    *entry = rng.gen_range(-1.0..=1.0);
                }
            }
            let w_in = DMatrix::from_fn(n, config.input_dim, |_, _| {
                rng.gen_range(-config.input_scale..=config.input_scale)
            });

            let rho = spectral::spectral_radius(&w_raw, n, 1e-9, 50_000)
                .unwrap_or_else(|| dense_spectral_radius(&w_raw, n));
            if rho <= 1e-12 {
                continue;
            }
            let factor = config.spectral_radius / rho;
            w_raw.iter_mut().for_each(|v| *v *= factor);
            return Ok(Esn {
                w: DMatrix::from_row_slice(n, n, &w_raw),
                w_in,
                spectral_radius: config.spectral_radius,
                input_scale: config.input_scale,
                density: config.density,
                seed,
            });
        }
        Err(Error::InvalidArgument(
            "recurrent matrix kept a zero spectral radius; raise the density".into(),
        ))
    }

    pub fn reservoir_size(&self) -> usize {
        self.w.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.w_in.ncols()
    }

    /// Iterate the network over `inputs` (one column per step) from the zero
    /// state and return the states after the first `washout` are discarded.
    pub fn drive(&self, inputs: &DMatrix<f64>, washout: usize) -> Result<DMatrix<f64>> {
        self.drive_from(&DVector::zeros(self.reservoir_size()), inputs, washout)
    }

    /// [`Esn::drive`] from an arbitrary initial state. Exposed so the fading-
    /// memory property (initial states wash out) can be checked directly.
    pub fn drive_from(
        &self,
        initial: &DVector<f64>,
        inputs: &DMatrix<f64>,
        washout: usize,
    ) -> Result<DMatrix<f64>> {
        if inputs.nrows() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                found: inputs.nrows(),
            });
        }
        if initial.len() != self.reservoir_size() {
            return Err(Error::DimensionMismatch {
                expected: self.reservoir_size(),
                found: initial.len(),
            });
        }
        let total = inputs.ncols();
        if washout >= total {
            return Err(Error::InvalidArgument(format!(
                "washout {washout} must be smaller than the input length {total}"
            )));
        }
        let mut x = initial.clone();
        let mut kept = DMatrix::zeros(self.reservoir_size(), total - washout);
        for step in 0..total {
            let pre = &self.w * &x + &self.w_in * inputs.column(step);
            x = pre.map(f64::tanh);
            if step >= washout {
                kept.set_column(step - washout, &x);
            }
        }
        Ok(kept)
    }
}

fn dense_spectral_radius(w: &[f64], n: usize) -> f64 {
    DMatrix::from_row_slice(n, n, w)
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Harvested reservoir states (one column per kept step) with their targets.
#[derive(Debug, Clone, PartialEq)]
pub struct StateMatrix {
    x: DMatrix<f64>,
    y: DVector<f64>,
    washout: usize,
}

impl StateMatrix {
    pub fn new(x: DMatrix<f64>, y: DVector<f64>, washout: usize) -> Result<Self> {
        if x.ncols() == 0 {
            return Err(Error::InvalidArgument("need at least one state".into()));
        }
        if y.len() != x.ncols() {
            return Err(Error::DimensionMismatch {
                expected: x.ncols(),
                found: y.len(),
            });
        }
        Ok(Self { x, y, washout })
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn washout(&self) -> usize {
        self.washout
    }

    pub fn len(&self) -> usize {
        self.x.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.x.ncols() == 0
    }

    pub fn reservoir_size(&self) -> usize {
        self.x.nrows()
    }

    /// States multiplied by `factor`, targets untouched.
    pub fn scaled(&self, factor: f64) -> StateMatrix {
        StateMatrix {
            x: &self.x * factor,
            y: self.y.clone(),
            washout: self.washout,
        }
    }

    /// Keep only the first `size` reservoir dimensions.
    pub fn truncated(&self, size: usize) -> Result<StateMatrix> {
        if size == 0 || size > self.reservoir_size() {
            return Err(Error::InvalidArgument(format!(
                "cannot truncate {} states to {size}",
                self.reservoir_size()
            )));
        }
        Ok(StateMatrix {
            x: self.x.rows(0, size).into_owned(),
            y: self.y.clone(),
            washout: self.washout,
        })
    }
}

/// The readout quadratic program: `Q = X X^T`, `c = -2 X y`, so that
/// `w^T Q w + w^T c = |w^T X - y|^2 - |y|^2` for every real `w`. `Q` is PSD by
/// construction and emitted with literal symmetry.
pub fn regression_qp(states: &StateMatrix, levels: LevelSet) -> Result<QpInstance<f64>> {
    let n = states.reservoir_size();
    let gram = states.x() * states.x().transpose();
    let mut q = vec![0.0f64; n * n];
    for i in 0..n {
        for j in i..n {
            let v = gram[(i, j)];
            q[i * n + j] = v;
            q[j * n + i] = v;
        }
    }
    let cv = states.x() * states.y();
    let c: Vec<f64> = cv.iter().map(|v| -2.0 * v).collect();
    QpInstance::new(n, q, c, levels, true)
}

/// A real-valued readout and its training error.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousReadout {
    pub w: DVector<f64>,
    pub nmse: f64,
}

/// Solve `(X X^T + ridge I) w = X y` by Cholesky and report the training NMSE.
///
/// With `ridge = 0` the Gram matrix must be numerically nonsingular (smallest
/// eigenvalue above `1e-10` times the largest); the solved system is checked
/// to a residual of `1e-8` relative.
pub fn ridge_readout(states: &StateMatrix, ridge: f64) -> Result<ContinuousReadout> {
    if ridge.is_nan() || ridge < 0.0 || !ridge.is_finite() {
        return Err(Error::InvalidArgument(
            "ridge must be finite and >= 0".into(),
        ));
    }
    let n = states.reservoir_size();
    let mut gram = states.x() * states.x().transpose();
    if ridge == 0.0 {
        let eigen = gram.symmetric_eigenvalues();
        let largest = eigen.iter().cloned().fold(f64::MIN, f64::max);
        let smallest = eigen.iter().cloned().fold(f64::MAX, f64::min);
        if smallest <= 1e-10 * largest {
            return Err(Error::SingularSystem);
        }
    } else {
        for i in 0..n {
            gram[(i, i)] += ridge;
        }
    }
    let rhs = states.x() * states.y();
    let w = gram
        .clone()
        .cholesky()
        .ok_or(Error::SingularSystem)?
        .solve(&rhs);
    let residual = (&gram * &w - &rhs).norm();
    if residual > 1e-8 * rhs.norm() {
        return Err(Error::Soundness(format!(
            "normal-equation residual {residual:e} exceeds 1e-8 relative"
        )));
    }
    let prediction = states.x().transpose() * &w;
    let nmse = nmse(prediction.as_slice(), states.y().as_slice())?;
    Ok(ContinuousReadout { w, nmse })
}

/// Unconstrained minimizer of the readout quadratic program and its objective
/// value. Falls back to an SVD least-squares solve when the Gram matrix is
/// singular (the system `X X^T w = X y` is always consistent).
fn continuous_qp_minimum(
    states: &StateMatrix,
    qp: &QpInstance<f64>,
) -> Result<(DVector<f64>, f64)> {
    let gram = states.x() * states.x().transpose();
    let rhs = states.x() * states.y();
    let w = match gram.clone().cholesky() {
        Some(chol) => chol.solve(&rhs),
        None => states
            .x()
            .transpose()
            .clone_owned()
            .svd(true, true)
            .solve(states.y(), 1e-12)
            .map_err(|message| {
                Error::Soundness(format!("least-squares solve failed: {message}"))
            })?,
    };
    let value = qp.quadratic_value(w.as_slice())?;
    Ok((w, value))
}

/// A readout restricted to the level set, with the state scaling that places
/// the levels on the continuous solution's range.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteReadout {
    /// One level per reservoir dimension.
    pub w_levels: Vec<i64>,
    /// States were multiplied by this factor before training; the effective
    /// weight on raw states is `level * state_scale`.
    pub state_scale: f64,
    pub nmse: f64,
}

impl DiscreteReadout {
    pub fn effective_weights(&self) -> Vec<f64> {
        self.w_levels
            .iter()
            .map(|&l| l as f64 * self.state_scale)
            .collect()
    }
}

/// Everything produced by discrete readout training.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteTrainingReport {
    pub discrete: DiscreteReadout,
    /// Ridge baseline at the requested ridge, computed on the raw states
    /// (its weights and NMSE are scale-free).
    pub continuous: ContinuousReadout,
    /// Objective of the discrete solution on the readout program.
    pub discrete_objective: f64,
    /// Unconstrained minimum of the same program.
    pub continuous_objective: f64,
    /// `discrete_objective - continuous_objective`; non-negative up to
    /// floating-point noise since the lattice is a subset of real space.
    pub gap: f64,
    pub solve: SolveResult<f64>,
}

/// Train a discrete readout from already-harvested states.
///
/// The states are rescaled so the ridge baseline's largest weight magnitude
/// lands on the largest level magnitude, the readout program is built on the
/// scaled states, and the chosen solver minimizes it over the lattice.
pub fn train_discrete_from_states(
    states: &StateMatrix,
    levels: &LevelSet,
    choice: &SolverChoice,
    ridge: f64,
    seed: u64,
    budget: &SolverBudget,
) -> Result<DiscreteTrainingReport> {
    let baseline = ridge_readout(states, ridge)?;
    let max_weight = baseline.w.amax();
    let max_level = levels.max_abs_member().unsigned_abs() as f64;
    let state_scale = if max_weight > 0.0 {
        max_weight / max_level
    } else {
        1.0
    };
    let scaled = states.scaled(state_scale);

    let qp = regression_qp(&scaled, levels.clone())?;
    let solve = run_solver(&qp, choice, seed, budget)?;
    let discrete_objective = solve.best.objective;

    let (_, continuous_objective) = continuous_qp_minimum(&scaled, &qp)?;
    let gap = discrete_objective - continuous_objective;

    let prediction = scaled.x().transpose()
        * DVector::from_iterator(qp.n(), solve.best.w.iter().map(|&l| l as f64));
    let discrete_nmse = nmse(prediction.as_slice(), states.y().as_slice())?;

    // the baseline was computed on unscaled states; its NMSE is scale-free
    Ok(DiscreteTrainingReport {
        discrete: DiscreteReadout {
            w_levels: solve.best.w.clone(),
            state_scale,
            nmse: discrete_nmse,
        },
        continuous: baseline,
        discrete_objective,
        continuous_objective,
        gap,
        solve,
    })
}

/// Full pipeline: drive the reservoir over the input sequence, pair the kept
/// states with the kept targets, and train the discrete readout.
#[allow(clippy::too_many_arguments)]
pub fn train_discrete_readout(
    esn: &Esn,
    inputs: &DMatrix<f64>,
    targets: &DVector<f64>,
    washout: usize,
    levels: &LevelSet,
    choice: &SolverChoice,
    ridge: f64,
    seed: u64,
    budget: &SolverBudget,
) -> Result<(DiscreteTrainingReport, StateMatrix)> {
    if targets.len() != inputs.ncols() {
        return Err(Error::DimensionMismatch {
            expected: inputs.ncols(),
            found: targets.len(),
        });
    }
    let x = esn.drive(inputs, washout)?;
    let kept = x.ncols();
    let y = targets.rows(washout, kept).into_owned();
    let states = StateMatrix::new(x, y, washout)?;
    let report = train_discrete_from_states(&states, levels, choice, ridge, seed, budget)?;
    Ok((report, states))
}

/// Mean squared error divided by the population variance of the target.
pub fn nmse(prediction: &[f64], target: &[f64]) -> Result<f64> {
    if prediction.len() != target.len() {
        return Err(Error::DimensionMismatch {
            expected: target.len(),
            found: prediction.len(),
        });
    }
    if target.len() < 2 {
        return Err(Error::InvalidArgument(
            "need at least 2 samples for a variance".into(),
        ));
    }
    let len = target.len() as f64;
    let mean = target.iter().sum::<f64>() / len;
    let variance = target.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / len;
    if variance <= 0.0 {
        return Err(Error::InvalidArgument(
            "target variance is zero; NMSE is undefined".into(),
        ));
    }
    let mse = prediction
        .iter()
        .zip(target)
        .map(|(p, t)| (p - t) * (p - t))
        .sum::<f64>()
        / len;
    Ok(mse / variance)
}

/// Delay-recall task: input uniform in `[-0.5, 0.5]`, target is the input
/// `delay` steps earlier (zero before that). Returned as a one-row input
/// matrix plus the target vector.
pub fn delay_recall_task(length: usize, delay: usize, seed: u64) -> (DMatrix<f64>, DVector<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u: Vec<f64> = (0..length).map(|_| rng.gen_range(-0.5..=0.5)).collect();
    let y = DVector::from_fn(length, |i, _| if i >= delay { u[i - delay] } else { 0.0 });
    (DMatrix::from_row_slice(1, length, &u), y)
}

/// Denoising task: input is a sine with additive uniform noise, target is the
/// clean sine.
pub fn noisy_sine_task(length: usize, seed: u64) -> (DMatrix<f64>, DVector<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let period = 20.0;
    let clean: Vec<f64> = (0..length)
        .map(|i| (2.0 * std::f64::consts::PI * i as f64 / period).sin())
        .collect();
    let noisy: Vec<f64> = clean
        .iter()
        .map(|v| v + rng.gen_range(-0.1..=0.1))
        .collect();
    (
        DMatrix::from_row_slice(1, length, &noisy),
        DVector::from_vec(clean),
    )
}
