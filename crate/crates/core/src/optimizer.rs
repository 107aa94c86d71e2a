//! Heavy-ball gradient descent with ascent reset and Armijo backtracking.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::{Evaluation, Objective, ObjectiveConfig};
use crate::waveform::{CoefficientVector, WaveformConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub initial_step: f64,
    /// Sufficient-decrease constant.
    pub armijo_c: f64,
    /// Weight on the previous search direction.
    pub momentum: f64,
    pub rho_down: f64,
    pub rho_up: f64,
    pub max_iterations: usize,
    /// Threshold on `||grad_i - grad_{i-1}||_2`.
    pub gradient_threshold: f64,
    pub max_backtracks: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            initial_step: 1.0,
            armijo_c: 0.1,
            momentum: 0.1,
            rho_down: 0.25,
            rho_up: 1.01,
            max_iterations: 500,
            gradient_threshold: 1e-5,
            max_backtracks: 60,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Err(Error::InvalidConfig(format!("{what} out of range: {v}")));
        if !(self.initial_step > 0.0 && self.initial_step.is_finite()) {
            return bad("initial_step", self.initial_step);
        }
        if !(self.armijo_c > 0.0 && self.armijo_c < 1.0) {
            return bad("armijo_c", self.armijo_c);
        }
        if !(0.0..=1.0).contains(&self.momentum) {
            return bad("momentum", self.momentum);
        }
        if !(self.rho_down > 0.0 && self.rho_down < 1.0) {
            return bad("rho_down", self.rho_down);
        }
        if !(self.rho_up >= 1.0 && self.rho_up.is_finite()) {
            return bad("rho_up", self.rho_up);
        }
        if self.max_iterations == 0 {
            return bad("max_iterations", 0.0);
        }
        if !(self.gradient_threshold >= 0.0) {
            return bad("gradient_threshold", self.gradient_threshold);
        }
        if self.max_backtracks == 0 {
            return bad("max_backtracks", 0.0);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    GradientConverged,
    MaxIterations,
    LineSearchStalled,
}

impl std::fmt::Display for RunStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RunStatus::GradientConverged => "gradient_converged",
            RunStatus::MaxIterations => "max_iterations",
            RunStatus::LineSearchStalled => "line_search_stalled",
        })
    }
}

/// One accepted iteration; iteration 0 is the seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub objective: f64,
    pub gisl: f64,
    pub penalty: f64,
    pub gradient_norm: f64,
    pub step: f64,
    pub backtracks: usize,
    pub c1: f64,
    pub c2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub records: Vec<IterationRecord>,
    pub status: RunStatus,
    pub wall_time: Duration,
}

impl RunTrace {
    /// Accepted iterations, excluding the seed record.
    pub fn iterations(&self) -> usize {
        self.records.len().saturating_sub(1)
    }

    pub fn objective_non_increasing(&self) -> bool {
        self.records.windows(2).all(|w| w[1].objective <= w[0].objective)
    }
}

/// `q = -g + beta q_prev`, reset to `-g` when `q . g >= 0`.
pub fn descent_direction(gradient: &[f64], previous: &[f64], momentum: f64) -> Vec<f64> {
    debug_assert_eq!(gradient.len(), previous.len());
    let q: Vec<f64> = gradient
        .iter()
        .zip(previous)
        .map(|(g, p)| -g + momentum * p)
        .collect();
    if dot(&q, gradient) >= 0.0 {
        gradient.iter().map(|g| -g).collect()
    } else {
        q
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearchOutcome {
    pub step: f64,
    pub value: f64,
    pub backtracks: usize,
}

/// Shrinks `step` by `rho_down` until
/// `Q(x + step q) <= Q(x) + c step grad^T q`.
#[allow(clippy::too_many_arguments)]
pub fn armijo_backtrack<F>(
    mut objective: F,
    x: &[f64],
    value: f64,
    direction: &[f64],
    gradient: &[f64],
    initial_step: f64,
    armijo_c: f64,
    rho_down: f64,
    max_backtracks: usize,
) -> Result<LineSearchOutcome>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let slope = dot(gradient, direction);
    let mut step = initial_step;
    let mut probe = vec![0.0; x.len()];
    for backtracks in 0..=max_backtracks {
        for ((p, xi), qi) in probe.iter_mut().zip(x).zip(direction) {
            *p = xi + step * qi;
        }
        let trial = objective(&probe)?;
        if trial <= value + armijo_c * step * slope {
            return Ok(LineSearchOutcome {
                step,
                value: trial,
                backtracks,
            });
        }
        if backtracks < max_backtracks {
            step *= rho_down;
        }
    }
    Err(Error::LineSearchStalled {
        backtracks: max_backtracks,
        step,
    })
}

/// Final iterate and run history.
#[derive(Debug, Clone)]
pub struct OptimizationResult {
    pub coefficients: CoefficientVector,
    pub trace: RunTrace,
}

/// Runs the descent from `seed` with masks frozen from the seed ACF.
pub fn optimize(
    seed: &CoefficientVector,
    wconfig: &WaveformConfig,
    objcfg: &ObjectiveConfig,
    optcfg: &OptimizerConfig,
) -> Result<OptimizationResult> {
    optcfg.validate()?;
    let objective = Objective::new(wconfig, *objcfg)?;
    objective.synthesizer().render(seed)?;
    run(&objective, seed, optcfg)
}

/// Runs the descent with a prebuilt evaluator.
pub fn run(
    objective: &Objective,
    seed: &CoefficientVector,
    optcfg: &OptimizerConfig,
) -> Result<OptimizationResult> {
    let start = Instant::now();
    let active = objective.waveform_config().basis_kind.active_mask(seed.num_harmonics());
    let mut phi = seed.to_stacked();
    if phi.len() != objective.dimension() {
        return Err(Error::Dimension(format!(
            "seed has {} stacked coefficients, objective expects {}",
            phi.len(),
            objective.dimension()
        )));
    }
    let project = |g: &mut Vec<f64>| g.iter_mut().zip(&active).for_each(|(x, m)| *x *= m);

    let (mut eval, mut grad) = objective.value_and_gradient_stacked(&phi)?;
    project(&mut grad);
    let mut records = vec![record(0, &eval, &grad, 0.0, 0)];
    let mut previous = vec![0.0; phi.len()];
    let mut step = optcfg.initial_step;
    let mut status = RunStatus::MaxIterations;

    for i in 1..=optcfg.max_iterations {
        let direction = descent_direction(&grad, &previous, optcfg.momentum);
        let outcome = armijo_backtrack(
            |x| objective.value_stacked(x),
            &phi,
            eval.objective,
            &direction,
            &grad,
            step,
            optcfg.armijo_c,
            optcfg.rho_down,
            optcfg.max_backtracks,
        );
        let outcome = match outcome {
            Ok(o) => o,
            Err(Error::LineSearchStalled { .. }) => {
                status = RunStatus::LineSearchStalled;
                break;
            }
            Err(e) => return Err(e),
        };

        for (p, q) in phi.iter_mut().zip(&direction) {
            *p += outcome.step * q;
        }
        step = outcome.step * optcfg.rho_up;

        let (new_eval, mut new_grad) = objective.value_and_gradient_stacked(&phi)?;
        project(&mut new_grad);
        let change = grad
            .iter()
            .zip(&new_grad)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        records.push(record(i, &new_eval, &new_grad, outcome.step, outcome.backtracks));
        eval = new_eval;
        grad = new_grad;
        previous = direction;

        if change <= optcfg.gradient_threshold {
            status = RunStatus::GradientConverged;
            break;
        }
    }

    Ok(OptimizationResult {
        coefficients: CoefficientVector::from_stacked(&phi)?,
        trace: RunTrace {
            records,
            status,
            wall_time: start.elapsed(),
        },
    })
}

fn record(iteration: usize, eval: &Evaluation, grad: &[f64], step: f64, backtracks: usize) -> IterationRecord {
    IterationRecord {
        iteration,
        objective: eval.objective,
        gisl: eval.gisl,
        penalty: eval.penalty,
        gradient_norm: dot(grad, grad).sqrt(),
        step,
        backtracks,
        c1: eval.c1,
        c2: eval.c2,
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
