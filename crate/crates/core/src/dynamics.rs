//! Belief-update rules for a single agent.
//!
//! An agent holds a weight `w` on the optimistic model. Its subjective
//! probability that the damaging event occurs is the convex combination
//! `w * pi_o + (1 - w) * pi_p`. Every received signal, whether it comes from a
//! peer or from a lobbyist, moves `w` part of the way towards the Bayes
//! posterior; how far depends on a signal- and prior-dependent under-reaction
//! coefficient.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Weights are kept inside `[WEIGHT_EPSILON, 1 - WEIGHT_EPSILON]`.
pub const WEIGHT_EPSILON: f64 = 1e-12;

/// The optimistic and pessimistic probabilities of the damaging event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelPair {
    pub pi_o: f64,
    pub pi_p: f64,
}

impl ModelPair {
    pub fn new(pi_o: f64, pi_p: f64) -> Result<Self> {
        let models = ModelPair { pi_o, pi_p };
        models.validate()?;
        Ok(models)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.pi_o > 0.0 && self.pi_o < self.pi_p && self.pi_p < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "models must satisfy 0 < pi_o < pi_p < 1, got pi_o={} pi_p={}",
                self.pi_o, self.pi_p
            )));
        }
        Ok(())
    }

    /// Probability of the event under the given model.
    pub fn probability_of(&self, model: SupportedModel) -> f64 {
        match model {
            SupportedModel::Optimistic => self.pi_o,
            SupportedModel::Pessimistic => self.pi_p,
        }
    }

    /// Width of the reachable probability range.
    pub fn spread(&self) -> f64 {
        self.pi_p - self.pi_o
    }
}

impl Default for ModelPair {
    fn default() -> Self {
        ModelPair {
            pi_o: 0.01,
            pi_p: 0.99,
        }
    }
}

/// Baseline under-reaction and the strength of directional motivated
/// reasoning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasProfile {
    pub lambda_base: f64,
    pub phi: f64,
}

impl BiasProfile {
    pub fn new(lambda_base: f64, phi: f64) -> Result<Self> {
        let bias = BiasProfile { lambda_base, phi };
        bias.validate()?;
        Ok(bias)
    }

    pub fn validate(&self) -> Result<()> {
        let in_unit = |x: f64| (0.0..=1.0).contains(&x);
        if !in_unit(self.lambda_base) || !in_unit(self.phi) {
            return Err(Error::InvalidConfig(format!(
                "bias coefficients must lie in [0,1], got lambda={} phi={}",
                self.lambda_base, self.phi
            )));
        }
        Ok(())
    }

    /// `lambda = 1, phi = 0`: every update keeps the prior unchanged.
    pub fn is_frozen(&self) -> bool {
        self.lambda_base == 1.0 && self.phi == 0.0
    }
}

/// A binary message about the damaging event.
///
/// `Pessimistic` is the value 1 ("the event will occur"); `Optimistic` is 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Signal {
    Optimistic,
    Pessimistic,
}

impl Signal {
    pub fn value(self) -> u8 {
        match self {
            Signal::Optimistic => 0,
            Signal::Pessimistic => 1,
        }
    }

    pub fn from_value(value: u8) -> Option<Signal> {
        match value {
            0 => Some(Signal::Optimistic),
            1 => Some(Signal::Pessimistic),
            _ => None,
        }
    }
}

/// The model a lobbyist argues for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SupportedModel {
    Optimistic,
    Pessimistic,
}

impl SupportedModel {
    /// The signal a lobbyist backing this model sends.
    pub fn signal(self) -> Signal {
        match self {
            SupportedModel::Optimistic => Signal::Optimistic,
            SupportedModel::Pessimistic => Signal::Pessimistic,
        }
    }
}

pub fn subjective_probability(weight: f64, models: &ModelPair) -> f64 {
    weight * models.pi_o + (1.0 - weight) * models.pi_p
}

/// `phi * |1 - s - w| + (1 - phi) * lambda`.
///
/// Signals that confirm the prior (large `w` with `s = 0`, small `w` with
/// `s = 1`) get a small coefficient; contradicting ones a large one.
pub fn underreaction_coefficient(bias: &BiasProfile, signal: Signal, weight: f64) -> f64 {
    let s = f64::from(signal.value());
    bias.phi * (1.0 - s - weight).abs() + (1.0 - bias.phi) * bias.lambda_base
}

/// Exact Bayes update of the weight on the optimistic model.
pub fn bayes_posterior_weight(weight: f64, signal: Signal, models: &ModelPair) -> f64 {
    let (like_o, like_p) = match signal {
        Signal::Pessimistic => (models.pi_o, models.pi_p),
        Signal::Optimistic => (1.0 - models.pi_o, 1.0 - models.pi_p),
    };
    let num = weight * like_o;
    num / (num + (1.0 - weight) * like_p)
}

/// Biased update applied to a receiver of `signal`.
///
/// This is the single update rule for both peer and lobbyist signals; the
/// result is not clamped (see [`clamp_weight`]).
pub fn peer_update(weight: f64, signal: Signal, bias: &BiasProfile, models: &ModelPair) -> f64 {
    let lambda = underreaction_coefficient(bias, signal, weight);
    lambda * weight + (1.0 - lambda) * bayes_posterior_weight(weight, signal, models)
}

/// Update triggered by a lobbyist supporting `model`.
pub fn lobby_update(
    weight: f64,
    model: SupportedModel,
    bias: &BiasProfile,
    models: &ModelPair,
) -> f64 {
    peer_update(weight, model.signal(), bias, models)
}

pub fn clamp_weight(weight: f64) -> f64 {
    weight.clamp(WEIGHT_EPSILON, 1.0 - WEIGHT_EPSILON)
}
