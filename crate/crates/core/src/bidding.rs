//! Assumed-bid-cost estimation: initial bids from historical estimates,
//! Bayesian revision, deviation penalties and the bid adjustment impact.

use crate::error::{Error, Result};
use crate::model::Participant;

/// Running mean and variance of the winning bids a participant has observed.
#[derive(Debug, Clone, PartialEq)]
pub struct BidEstimator {
    pub historical_mean: f64,
    pub historical_variance: f64,
    pub sample_count: u32,
    // Welford accumulator: sum of squared deviations.
    m2: f64,
}

impl BidEstimator {
    /// No auction history yet: the mean is the participant's own assumed cost.
    pub fn unseeded(assumed_cost: f64) -> Self {
        Self {
            historical_mean: assumed_cost,
            historical_variance: 0.0,
            sample_count: 0,
            m2: 0.0,
        }
    }

    pub fn from_moments(mean: f64, variance: f64, sample_count: u32) -> Self {
        let variance = variance.max(0.0);
        Self {
            historical_mean: mean,
            historical_variance: variance,
            sample_count,
            m2: variance * sample_count as f64,
        }
    }

    /// Folds one observed winning bid into the estimate.
    ///
    /// The first real observation replaces the assumed-cost seed. Variance is
    /// the population variance of the observations.
    pub fn observe(&mut self, winning_bid: f64) {
        if self.sample_count == 0 {
            self.historical_mean = winning_bid;
            self.m2 = 0.0;
            self.sample_count = 1;
        } else {
            self.sample_count += 1;
            let delta = winning_bid - self.historical_mean;
            self.historical_mean += delta / self.sample_count as f64;
            self.m2 += delta * (winning_bid - self.historical_mean);
        }
        self.historical_variance = (self.m2 / self.sample_count as f64).max(0.0);
    }
}

/// A real-time cost signal seen during the revision window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub value: f64,
}

impl Observation {
    pub fn new(value: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::config("observation must be finite"));
        }
        Ok(Self { value })
    }
}

/// `E[b] + risk_alpha * V[b]`, floored at zero.
pub fn initial_bid(estimator: &BidEstimator, risk_alpha: f64) -> Result<f64> {
    if !(risk_alpha >= 0.0) {
        return Err(Error::config("risk_alpha must be non-negative"));
    }
    Ok((estimator.historical_mean + risk_alpha * estimator.historical_variance).max(0.0))
}

/// Kalman-style shrink of the previous bid toward the observation, with gain
/// `prior_var / (prior_var + obs_var)`. In monotone mode the bid never decreases.
pub fn bayesian_revise(
    prev_bid: f64,
    obs: Observation,
    prior_var: f64,
    obs_var: f64,
    clamp_monotone: bool,
) -> Result<f64> {
    let denom = prior_var + obs_var;
    if denom == 0.0 {
        return Err(Error::DivisionByZero("bayesian revision gain"));
    }
    let revised = prev_bid + prior_var / denom * (obs.value - prev_bid);
    let revised = if clamp_monotone {
        revised.max(prev_bid)
    } else {
        revised
    };
    Ok(revised.max(0.0))
}

/// Ranking penalty for drifting away from the entry bid. Never part of a payment.
pub fn deviation_penalty(final_bid: f64, initial_bid: f64, gamma: f64) -> f64 {
    gamma * (final_bid - initial_bid).abs()
}

/// Relative bid change weighted by the historical win probability.
pub fn bid_adjustment_impact(final_bid: f64, initial_bid: f64, win_prob: f64) -> Result<f64> {
    if initial_bid == 0.0 {
        return Err(Error::UndefinedMetric("bid adjustment impact with zero initial bid"));
    }
    Ok((final_bid - initial_bid) / initial_bid * win_prob)
}

pub fn win_probability(participant: &Participant) -> f64 {
    if participant.rounds_participated == 0 {
        0.0
    } else {
        participant.rounds_won as f64 / participant.rounds_participated as f64
    }
}
