use num_traits::Float;

use crate::error::{Error, Result};
use crate::mapper::CoreAllocation;
use crate::scalar::Scalar;

/// Leaky integrate-and-fire parameters, SI units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LifParams<F> {
    /// Membrane time constant `R·C` (s).
    pub tau_m: F,
    /// Membrane resistance (Ω); scales the input current.
    pub resistance: F,
    pub u_rest: F,
    pub u_threshold: F,
    pub u_reset: F,
    /// Integration step (s).
    pub dt: F,
}

impl<F: Float + Scalar> Default for LifParams<F> {
    fn default() -> Self {
        let f = |v: f64| F::from_f64(v).unwrap();
        LifParams {
            tau_m: f(20e-3),
            resistance: f(1.0),
            u_rest: f(0.0),
            u_threshold: f(1.0),
            u_reset: f(0.0),
            dt: f(1e-3),
        }
    }
}

impl<F: Float + Scalar> LifParams<F> {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau_m > F::zero()) {
            return Err(Error::Config("tau_m must be > 0".into()));
        }
        if !(self.dt > F::zero()) {
            return Err(Error::Config("dt must be > 0".into()));
        }
        if self.dt > self.tau_m {
            return Err(Error::Config(format!("dt {} exceeds tau_m {}", self.dt, self.tau_m)));
        }
        if !(self.u_threshold > self.u_reset) {
            return Err(Error::Config("u_threshold must exceed u_reset".into()));
        }
        Ok(())
    }
}

/// Per-core simulation state.
#[derive(Clone, Debug, PartialEq)]
pub struct CoreState<F> {
    /// Membrane potential per neuron slot.
    pub potentials: Vec<F>,
    /// Last value driven onto each axon slot.
    pub axon_inputs: Vec<F>,
}

impl<F: Float + Scalar> CoreState<F> {
    pub fn new(core: &CoreAllocation<F>, u_rest: F) -> Self {
        CoreState {
            potentials: vec![u_rest; core.neurons_used()],
            axon_inputs: vec![F::zero(); core.axons_used()],
        }
    }

    pub fn with_neurons(n: usize, u_rest: F) -> Self {
        CoreState {
            potentials: vec![u_rest; n],
            axon_inputs: Vec::new(),
        }
    }

    pub fn reset(&mut self, u_rest: F) {
        self.potentials.iter_mut().for_each(|u| *u = u_rest);
        self.axon_inputs.iter_mut().for_each(|x| *x = F::zero());
    }
}

/// One forward-Euler step of `τ du/dt = −(u − u_rest) + R·I`, then
/// threshold: neurons at or above `u_threshold` spike and drop to `u_reset`.
pub fn lif_step<F: Float + Scalar>(state: &mut CoreState<F>, params: &LifParams<F>, input_current: &[F]) -> Result<Vec<bool>> {
    params.validate()?;
    if input_current.len() != state.potentials.len() {
        return Err(Error::Dimension {
            expected: state.potentials.len(),
            actual: input_current.len(),
        });
    }
    let k = params.dt / params.tau_m;
    Ok(state
        .potentials
        .iter_mut()
        .zip(input_current)
        .map(|(u, &i)| {
            *u = *u + k * (params.u_rest - *u + params.resistance * i);
            if *u >= params.u_threshold {
                *u = params.u_reset;
                true
            } else {
                false
            }
        })
        .collect())
}
