//! Round-advancing auction engines.
//!
//! One [`MechanismEngine`] runs a single seeded scenario. Each round walks
//! the same pipeline for every mechanism:
//!
//! 1. active participants revise their bids against a noisy cost signal;
//! 2. winners are selected (penalised ascending bids, or a Tullock lottery);
//! 3. winners perform the task and learn their true cost;
//! 4. EWMA trackers and ROI are updated;
//! 5. drop / rejoin / exit transitions are applied;
//! 6. with dynamic recruitment, Poisson arrivals join;
//! 7. round metrics are recorded.

use std::cmp::Ordering;
use std::collections::HashMap;

use crate::bidding::{self, Observation};
use crate::engagement::{self, ParticipationEvent, RoundSignal, Transition};
use crate::error::{Error, Result};
use crate::metrics::{self, WinTally};
use crate::model::{
    Mechanism, MpiPopulation, Participant, ParticipantId, RoundRecord, ScenarioConfig, Status,
};
use crate::rng::SimRng;

/// A submitted bid as seen by the RA-ABC ranking.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankedBid {
    pub id: ParticipantId,
    pub bid: f64,
    pub penalty: f64,
    pub participation: f64,
}

impl RankedBid {
    pub fn score(&self) -> f64 {
        self.bid + self.penalty
    }
}

fn ranking_order(a: &RankedBid, b: &RankedBid) -> Ordering {
    a.score()
        .total_cmp(&b.score())
        .then_with(|| b.participation.total_cmp(&a.participation))
        .then_with(|| a.id.cmp(&b.id))
}

/// Lowest `bid + penalty` wins; ties go to the more frequent participant,
/// then to the lower id. Returns at most `winners` entries, best first.
pub fn select_winners_ra_abc(bids: &[RankedBid], winners: usize) -> Vec<RankedBid> {
    let mut ranked = bids.to_vec();
    ranked.sort_by(ranking_order);
    ranked.truncate(winners);
    ranked
}

/// Draws up to `winners` distinct winners without replacement.
///
/// Each draw picks candidate `i` with probability `effort_i^ρ / Σ effort_j^ρ`
/// over the remaining candidates: one uniform `u`, then a linear scan over
/// candidates in input order until the running weight exceeds `u·Σ`. If all
/// remaining weights are zero the draw is uniform over the remaining ones.
pub fn select_winners_tullock(
    efforts: &[(ParticipantId, f64)],
    winners: usize,
    exponent: f64,
    rng: &mut SimRng,
) -> Vec<ParticipantId> {
    let mut pool: Vec<(ParticipantId, f64)> = efforts
        .iter()
        .map(|&(id, e)| (id, if e > 0.0 { e.powf(exponent) } else { 0.0 }))
        .collect();
    let mut chosen = Vec::with_capacity(winners.min(pool.len()));
    while chosen.len() < winners && !pool.is_empty() {
        let total: f64 = pool.iter().map(|&(_, w)| w).sum();
        let pick = if total > 0.0 && total.is_finite() {
            let target = rng.uniform() * total;
            let mut acc = 0.0;
            let mut idx = pool.len() - 1;
            for (i, &(_, w)) in pool.iter().enumerate() {
                acc += w;
                if target < acc {
                    idx = i;
                    break;
                }
            }
            idx
        } else {
            rng.index(pool.len())
        };
        chosen.push(pool.remove(pick).0);
    }
    chosen
}

/// State machine for one seeded run of one mechanism.
#[derive(Debug, Clone)]
pub struct MechanismEngine {
    config: ScenarioConfig,
    participants: Vec<Participant>,
    round: usize,
    rng: SimRng,
    history: Vec<RoundRecord>,
    next_id: ParticipantId,
}

impl MechanismEngine {
    pub fn new(config: ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = SimRng::new(config.seed);
        let participants = (0..config.initial_population as ParticipantId)
            .map(|id| Participant::sample(id, 0, &mut rng, &config))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            next_id: participants.len() as ParticipantId,
            config,
            participants,
            round: 0,
            rng,
            history: Vec::new(),
        })
    }

    /// Builds an engine around a hand-made population. Ids must be unique.
    pub fn with_participants(config: ScenarioConfig, participants: Vec<Participant>) -> Result<Self> {
        let mut ids: Vec<_> = participants.iter().map(|p| p.id).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::config("participant ids must be unique"));
        }
        let rng = SimRng::new(config.seed);
        Ok(Self {
            next_id: ids.last().map_or(0, |m| m + 1),
            config,
            participants,
            round: 0,
            rng,
            history: Vec::new(),
        })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn participants(&self) -> &[Participant] {
        &self.participants
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn history(&self) -> &[RoundRecord] {
        &self.history
    }

    pub fn into_history(self) -> Vec<RoundRecord> {
        self.history
    }

    pub fn is_finished(&self) -> bool {
        self.round >= self.config.num_rounds
    }

    /// Runs every remaining round.
    pub fn run(&mut self) -> Result<&[RoundRecord]> {
        while !self.is_finished() {
            self.advance_round()?;
        }
        Ok(&self.history)
    }

    pub fn advance_round(&mut self) -> Result<&RoundRecord> {
        if self.is_finished() {
            return Err(Error::State(format!(
                "all {} rounds already played",
                self.config.num_rounds
            )));
        }
        let round = self.round + 1;
        let cfg = self.config.clone();

        // (1) revision phase
        let bidders: Vec<usize> = (0..self.participants.len())
            .filter(|&i| self.participants[i].is_active())
            .collect();
        let mut bai = Vec::with_capacity(bidders.len());
        for &i in &bidders {
            let noise = self.rng.standard_normal() * cfg.observation_variance.sqrt();
            let p = &mut self.participants[i];
            let obs = Observation::new(p.cost_estimate() + noise)?;
            p.current_bid = bidding::bayesian_revise(
                p.current_bid,
                obs,
                cfg.prior_variance,
                cfg.observation_variance,
                cfg.clamp_monotone,
            )?;
            if p.initial_bid > 0.0 {
                bai.push(bidding::bid_adjustment_impact(
                    p.current_bid,
                    p.initial_bid,
                    bidding::win_probability(p),
                )?);
            }
        }

        // (2) winner selection; payments are aligned with `winners`
        let slot_of: HashMap<ParticipantId, usize> =
            bidders.iter().map(|&i| (self.participants[i].id, i)).collect();
        let (winners, payments): (Vec<usize>, Vec<f64>) = match cfg.mechanism {
            Mechanism::RaAbc | Mechanism::RaAbcDr => {
                let bids: Vec<RankedBid> = bidders
                    .iter()
                    .map(|&i| {
                        let p = &self.participants[i];
                        RankedBid {
                            id: p.id,
                            bid: p.current_bid,
                            penalty: bidding::deviation_penalty(
                                p.current_bid,
                                p.initial_bid,
                                cfg.penalty_gamma,
                            ),
                            participation: p.participation_freq,
                        }
                    })
                    .collect();
                select_winners_ra_abc(&bids, cfg.winners_per_round)
                    .iter()
                    .map(|b| (slot_of[&b.id], b.bid))
                    .unzip()
            }
            Mechanism::Tullock => {
                // Effort is the inverse ask: cheaper bidders try harder.
                let efforts: Vec<(ParticipantId, f64)> = bidders
                    .iter()
                    .map(|&i| {
                        let p = &self.participants[i];
                        let effort = if p.current_bid > 0.0 { 1.0 / p.current_bid } else { 0.0 };
                        (p.id, effort)
                    })
                    .collect();
                let prize = cfg.cost_mean;
                select_winners_tullock(
                    &efforts,
                    cfg.winners_per_round,
                    cfg.tullock_exponent,
                    &mut self.rng,
                )
                .into_iter()
                .map(|id| (slot_of[&id], prize))
                .unzip()
            }
        };

        // (3) winners perform the task
        let mut won = vec![false; self.participants.len()];
        let mut paid = vec![0.0; self.participants.len()];
        let mut bar = Vec::new();
        let mut top_winning_bid: Option<f64> = None;
        let mut lowest_winning_bid: Option<f64> = None;
        for (&slot, &pay) in winners.iter().zip(&payments) {
            won[slot] = true;
            paid[slot] = pay;
            let p = &mut self.participants[slot];
            if p.knows_true_cost {
                bar.push(metrics::bar(p.current_bid, p.true_cost)?);
            }
            p.knows_true_cost = true;
            p.rounds_won += 1;
            top_winning_bid = Some(top_winning_bid.map_or(pay, |t: f64| t.max(pay)));
            lowest_winning_bid =
                Some(lowest_winning_bid.map_or(p.current_bid, |t: f64| t.min(p.current_bid)));
        }

        // (4) trackers and ROI
        let mut net_utility = Vec::with_capacity(bidders.len());
        for (i, p) in self.participants.iter_mut().enumerate() {
            match p.status {
                Status::Active => {
                    p.rounds_participated += 1;
                    p.participation_freq = engagement::update_participation(
                        p.participation_freq,
                        ParticipationEvent::Present,
                        cfg.ewma_alpha,
                    )?;
                    p.avg_earnings =
                        engagement::update_earnings(p.avg_earnings, won[i], paid[i], cfg.ewma_beta);
                    // A newcomer's first bid is not judged: its ROI stays at the entry value.
                    if p.rounds_participated > 1 {
                        p.roi = engagement::roi_active(
                            p.avg_earnings,
                            p.participation_freq,
                            p.cost_estimate(),
                            p.tolerance,
                        )?;
                    }
                    let realized = if won[i] { paid[i] - p.true_cost } else { 0.0 };
                    net_utility.push(realized - cfg.participation_fee);
                }
                Status::Dropped if cfg.decay_while_dropped => {
                    p.participation_freq = engagement::update_participation(
                        p.participation_freq,
                        ParticipationEvent::Absent,
                        cfg.ewma_alpha,
                    )?;
                    p.avg_earnings = engagement::update_earnings(p.avg_earnings, false, 0.0, cfg.ewma_beta);
                }
                _ => {}
            }
        }
        let mean_roi = mean_of(bidders.iter().map(|&i| self.participants[i].roi));

        // (5) lifecycle; everyone active folds the lowest winning bid into its estimator
        let signal = RoundSignal { top_winning_bid };
        let (mut dropped, mut rejoined, mut exited) = (0, 0, 0);
        for p in self.participants.iter_mut() {
            let was_bidder = p.is_active();
            match engagement::lifecycle_step(p, signal, &cfg)? {
                Transition::Dropped => dropped += 1,
                Transition::Rejoined => rejoined += 1,
                Transition::Exited => exited += 1,
                Transition::Unchanged => {}
            }
            if was_bidder && p.is_active() {
                if let Some(bid) = lowest_winning_bid {
                    p.estimator.observe(bid);
                }
            }
        }

        // (6) recruitment
        self.round = round;
        let recruited = if cfg.mechanism.recruits() {
            self.recruit()?
        } else {
            0
        };

        // (7) metrics
        let tally = WinTally::from_counts(
            self.participants
                .iter()
                .filter(|p| match cfg.mpi_population {
                    MpiPopulation::Current => p.status != Status::Exited && p.join_round < round,
                    MpiPopulation::EverSeen => p.join_round < round,
                })
                .map(|p| (p.id, p.rounds_won)),
        );
        let record = RoundRecord {
            round,
            winner_ids: winners.iter().map(|&s| self.participants[s].id).collect(),
            auction_cost: metrics::auction_cost(&payments),
            payments,
            active_count: bidders.len(),
            dropped_this_round: dropped,
            rejoined_this_round: rejoined,
            recruited_this_round: recruited,
            exited_this_round: exited,
            mpi: tally.mpi(round),
            mean_bar: mean_of(bar.into_iter()),
            mean_bai: mean_of(bai.into_iter()),
            mean_roi,
            mean_net_utility: mean_of(net_utility.into_iter()),
        };
        self.history.push(record);
        Ok(self.history.last().expect("just pushed"))
    }

    /// Poisson arrivals for the current round; they bid from the next round on.
    pub fn recruit(&mut self) -> Result<usize> {
        if !self.config.mechanism.recruits() {
            return Ok(0);
        }
        let k = self.rng.poisson(self.config.recruitment_rate) as usize;
        for _ in 0..k {
            let p = Participant::sample(self.next_id, self.round, &mut self.rng, &self.config)?;
            self.next_id += 1;
            self.participants.push(p);
        }
        Ok(k)
    }
}

fn mean_of(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}
