//! EWMA participation and earnings trackers, ROI, and the drop/rejoin lifecycle.

use crate::bidding;
use crate::error::{Error, Result};
use crate::model::{Participant, ScenarioConfig, Status};

/// Whether a participant bid in a round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParticipationEvent {
    Absent = 0,
    Present = 1,
}

impl ParticipationEvent {
    pub fn value(self) -> f64 {
        self as u8 as f64
    }
}

impl From<bool> for ParticipationEvent {
    fn from(present: bool) -> Self {
        if present {
            ParticipationEvent::Present
        } else {
            ParticipationEvent::Absent
        }
    }
}

pub fn update_participation(prev: f64, event: ParticipationEvent, ewma_alpha: f64) -> Result<f64> {
    if !(ewma_alpha > 0.0 && ewma_alpha < 1.0) {
        return Err(Error::config("ewma_alpha must lie strictly inside (0, 1)"));
    }
    Ok(ewma_alpha * event.value() + (1.0 - ewma_alpha) * prev)
}

pub fn update_earnings(prev: f64, won: bool, bid: f64, ewma_beta: f64) -> f64 {
    if won {
        ewma_beta * bid + (1.0 - ewma_beta) * prev
    } else {
        (1.0 - ewma_beta) * prev
    }
}

/// `(m + τ) / (p·c + τ)`.
pub fn roi_active(avg_earnings: f64, participation: f64, cost: f64, tolerance: f64) -> Result<f64> {
    let denom = participation * cost + tolerance;
    if denom == 0.0 {
        return Err(Error::UndefinedMetric("ROI with zero participation and zero tolerance"));
    }
    Ok((avg_earnings + tolerance) / denom)
}

/// Next-round ROI a dropped participant expects if it rejoins and wins at
/// `projected_win_bid`. Uses the assumed cost. Does not mutate anything.
pub fn roi_estimate_dropped(
    participant: &Participant,
    projected_win_bid: f64,
    config: &ScenarioConfig,
) -> Result<f64> {
    if participant.status != Status::Dropped {
        return Err(Error::State(format!(
            "rejoin estimate requested for participant {} in state {:?}",
            participant.id, participant.status
        )));
    }
    let p_next = update_participation(
        participant.participation_freq,
        ParticipationEvent::Present,
        config.ewma_alpha,
    )?;
    let m_next = update_earnings(
        participant.avg_earnings,
        true,
        projected_win_bid,
        config.ewma_beta,
    );
    roi_active(m_next, p_next, participant.assumed_cost, participant.tolerance)
}

/// Public information revealed at the end of a round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundSignal {
    /// Highest price paid to a winner this round: the marginal winning bid
    /// in a first-price auction, the prize in a lottery contest.
    pub top_winning_bid: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transition {
    Unchanged,
    Dropped,
    Rejoined,
    Exited,
}

/// Applies the end-of-round lifecycle rule to one participant.
///
/// Active participants leave when their ROI falls strictly below the
/// threshold. Dropped participants rejoin when the estimate reaches the
/// threshold, re-entering with a bid rebuilt from their updated estimator,
/// capped at the revealed price and never below their own cost estimate. After `exit_patience` failed
/// evaluations in a row they exit for good.
pub fn lifecycle_step(
    participant: &mut Participant,
    signal: RoundSignal,
    config: &ScenarioConfig,
) -> Result<Transition> {
    match participant.status {
        Status::Exited => Ok(Transition::Unchanged),
        Status::Active => {
            if participant.roi < config.satisfaction_threshold {
                participant.transition(Status::Dropped)?;
                participant.dropped_streak = 0;
                Ok(Transition::Dropped)
            } else {
                Ok(Transition::Unchanged)
            }
        }
        Status::Dropped => {
            let estimate = match signal.top_winning_bid {
                Some(bid) => Some(roi_estimate_dropped(participant, bid, config)?),
                None => None,
            };
            match (estimate, signal.top_winning_bid) {
                (Some(eta), Some(bid)) if eta >= config.satisfaction_threshold => {
                    participant.transition(Status::Active)?;
                    participant.estimator.observe(bid);
                    participant.roi = eta;
                    participant.dropped_streak = 0;
                    let rebid = bidding::initial_bid(&participant.estimator, config.risk_alpha)?;
                    participant.current_bid = rebid.min(bid).max(participant.cost_estimate());
                    Ok(Transition::Rejoined)
                }
                _ => {
                    participant.dropped_streak += 1;
                    if participant.dropped_streak >= config.exit_patience {
                        participant.transition(Status::Exited)?;
                        Ok(Transition::Exited)
                    } else {
                        Ok(Transition::Unchanged)
                    }
                }
            }
        }
    }
}
