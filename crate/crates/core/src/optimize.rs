//! Plain gradient descent on real expectation values.

use crate::circuits::{wrap_phase, ParamCircuit};
use crate::error::{Error, Result};
use crate::expectation::{expectation, EvalMode, NormalObservable};
use crate::fock::OccupationState;
use crate::gradient::gradient;
use crate::scalar::Real;

/// Minimize `<input| C(theta)^† Q C(theta) |input>` over the circuit's parameters.
#[derive(Clone, Debug)]
pub struct OptimizationProblem<T: Real> {
    pub circuit: ParamCircuit<T>,
    pub observable: NormalObservable<T>,
    pub input: OccupationState,
}

impl<T: Real> OptimizationProblem<T> {
    pub fn new(
        circuit: ParamCircuit<T>,
        observable: NormalObservable<T>,
        input: OccupationState,
    ) -> Result<Self> {
        if !observable.is_hermitian() {
            return Err(Error::NotHermitian {
                residual: crate::linalg::hermiticity_residual(observable.matrix())?.as_f64(),
            });
        }
        if observable.modes() != circuit.modes() || input.modes() != circuit.modes() {
            return Err(Error::DimensionMismatch {
                what: "observable/input modes vs circuit modes",
                expected: circuit.modes(),
                found: if observable.modes() != circuit.modes() {
                    observable.modes()
                } else {
                    input.modes()
                },
            });
        }
        Ok(Self {
            circuit,
            observable,
            input,
        })
    }

    pub fn objective(&self, theta: &[T], mode: EvalMode) -> Result<T> {
        Ok(expectation(&self.observable, &self.circuit, theta, &self.input, mode)?.re)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Iteration<T> {
    pub theta: Vec<T>,
    pub objective: T,
    pub gradient_norm: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxIterations,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<T> {
    pub iterations: Vec<Iteration<T>>,
    pub termination: Termination,
    /// Set when an exact-mode objective rose between consecutive iterations.
    pub objective_increased: bool,
}

impl<T: Real> Trajectory<T> {
    pub fn last(&self) -> &Iteration<T> {
        self.iterations.last().expect("trajectory has at least one iteration")
    }
}

/// `theta <- wrap(theta - step * grad)` until `||grad|| < tol` or `max_iters`
/// iterations have been recorded.
///
/// Iteration `t` evaluates the objective and gradient on seed streams
/// `2t` and `2t + 1` in shots mode.
pub fn gradient_descent<T: Real>(
    problem: &OptimizationProblem<T>,
    theta0: &[T],
    step: T,
    max_iters: usize,
    tol: T,
    mode: EvalMode,
) -> Result<Trajectory<T>> {
    if !(step > T::zero()) {
        return Err(Error::InvalidArgument("step must be positive".into()));
    }
    if max_iters == 0 {
        return Err(Error::InvalidArgument("max_iters must be at least 1".into()));
    }
    if theta0.len() != problem.circuit.num_params() {
        return Err(Error::ParameterCount {
            expected: problem.circuit.num_params(),
            found: theta0.len(),
        });
    }
    let mut theta: Vec<T> = theta0.iter().map(|&t| wrap_phase(t)).collect();
    let mut iterations = Vec::new();
    let mut termination = Termination::MaxIterations;
    let mut increased = false;
    let slack = T::tol(1e-12);
    for t in 0..max_iters as u64 {
        let objective = problem.objective(&theta, mode.substream(2 * t))?;
        let report = gradient(
            &problem.circuit,
            &theta,
            &problem.observable,
            &problem.input,
            mode.substream(2 * t + 1),
        )?;
        let grad = report.real_parts();
        let gradient_norm = grad.iter().fold(T::zero(), |a, &g| a + g * g).sqrt();
        if mode == EvalMode::Exact {
            if let Some(prev) = iterations.last() {
                let prev: &Iteration<T> = prev;
                if objective > prev.objective + slack {
                    increased = true;
                }
            }
        }
        iterations.push(Iteration {
            theta: theta.clone(),
            objective,
            gradient_norm,
        });
        if gradient_norm < tol {
            termination = Termination::Converged;
            break;
        }
        for (x, g) in theta.iter_mut().zip(&grad) {
            *x = wrap_phase(*x - step * *g);
        }
    }
    Ok(Trajectory {
        iterations,
        termination,
        objective_increased: increased,
    })
}
