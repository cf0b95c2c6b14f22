//! Domain types shared by every other module.

use std::fmt;
use std::str::FromStr;

use crate::bidding::BidEstimator;
use crate::error::{Error, Result};
use crate::rng::SimRng;

pub type ParticipantId = u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mechanism {
    RaAbc,
    RaAbcDr,
    Tullock,
}

impl Mechanism {
    pub const ALL: [Mechanism; 3] = [Mechanism::RaAbc, Mechanism::RaAbcDr, Mechanism::Tullock];

    pub fn name(self) -> &'static str {
        match self {
            Mechanism::RaAbc => "ra-abc",
            Mechanism::RaAbcDr => "ra-abcdr",
            Mechanism::Tullock => "tullock",
        }
    }

    pub fn recruits(self) -> bool {
        matches!(self, Mechanism::RaAbcDr)
    }
}

impl fmt::Display for Mechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mechanism {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "ra-abc" | "raabc" => Ok(Mechanism::RaAbc),
            "ra-abcdr" | "raabcdr" | "ra-abc-dr" => Ok(Mechanism::RaAbcDr),
            "tullock" => Ok(Mechanism::Tullock),
            other => Err(Error::config(format!("unknown mechanism `{other}`"))),
        }
    }
}

/// Which population the monopoly prevention index is computed over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MpiPopulation {
    /// Participants that are Active or Dropped at the end of the round.
    Current,
    /// Every participant ever created, including exited ones.
    EverSeen,
}

impl FromStr for MpiPopulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "current" => Ok(MpiPopulation::Current),
            "ever-seen" | "ever_seen" => Ok(MpiPopulation::EverSeen),
            other => Err(Error::config(format!("unknown mpi population `{other}`"))),
        }
    }
}

impl fmt::Display for MpiPopulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MpiPopulation::Current => "current",
            MpiPopulation::EverSeen => "ever-seen",
        })
    }
}

/// Every tunable of one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub initial_population: usize,
    pub winners_per_round: usize,
    pub num_rounds: usize,
    pub satisfaction_threshold: f64,
    /// Risk weight on the variance term of the initial bid.
    pub risk_alpha: f64,
    /// EWMA weight of the participation-frequency tracker.
    pub ewma_alpha: f64,
    /// EWMA weight of the earnings tracker.
    pub ewma_beta: f64,
    pub penalty_gamma: f64,
    pub prior_variance: f64,
    pub observation_variance: f64,
    pub cost_mean: f64,
    pub cost_stddev: f64,
    /// Mean Poisson arrivals per round (dynamic recruitment only).
    pub recruitment_rate: f64,
    pub initial_roi_epsilon: f64,
    pub participation_fee: f64,
    pub tullock_exponent: f64,
    pub mechanism: Mechanism,
    pub seed: u64,
    pub num_runs: usize,
    pub tolerance_min: f64,
    pub tolerance_max: f64,
    /// Consecutive failed rejoin evaluations before a dropped participant exits.
    pub exit_patience: u32,
    /// Forbid the Bayesian revision from lowering a bid.
    pub clamp_monotone: bool,
    /// Dropped participants' trackers keep decaying (otherwise they freeze).
    pub decay_while_dropped: bool,
    pub mpi_population: MpiPopulation,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            initial_population: 100,
            winners_per_round: 20,
            num_rounds: 100,
            satisfaction_threshold: 0.5,
            risk_alpha: 0.5,
            ewma_alpha: 0.3,
            ewma_beta: 0.3,
            penalty_gamma: 0.5,
            prior_variance: 0.04,
            observation_variance: 0.01,
            cost_mean: 5.0,
            cost_stddev: 1.0,
            recruitment_rate: 1.0,
            initial_roi_epsilon: 0.1,
            participation_fee: 0.0,
            tullock_exponent: 1.0,
            mechanism: Mechanism::RaAbc,
            seed: 2024,
            num_runs: 50,
            tolerance_min: 0.5,
            tolerance_max: 1.5,
            exit_patience: 10,
            clamp_monotone: true,
            decay_while_dropped: true,
            mpi_population: MpiPopulation::Current,
        }
    }
}

/// Canonical parameter keys, in manifest order.
pub const CONFIG_KEYS: &[&str] = &[
    "initial_population",
    "winners_per_round",
    "num_rounds",
    "satisfaction_threshold",
    "risk_alpha",
    "ewma_alpha",
    "ewma_beta",
    "penalty_gamma",
    "prior_variance",
    "observation_variance",
    "cost_mean",
    "cost_stddev",
    "recruitment_rate",
    "initial_roi_epsilon",
    "participation_fee",
    "tullock_exponent",
    "mechanism",
    "seed",
    "num_runs",
    "tolerance_min",
    "tolerance_max",
    "exit_patience",
    "clamp_monotone",
    "decay_while_dropped",
    "mpi_population",
];

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::config(format!("invalid value `{value}` for `{key}`")))
}

impl ScenarioConfig {
    /// Maps CLI-style aliases onto canonical keys.
    pub fn canonical_key(key: &str) -> Option<&'static str> {
        let key = key.trim().replace('-', "_");
        let alias = match key.as_str() {
            "participants" | "n" => "initial_population",
            "winners" | "w" => "winners_per_round",
            "rounds" => "num_rounds",
            "threshold" | "s" => "satisfaction_threshold",
            "runs" => "num_runs",
            "gamma" => "penalty_gamma",
            "rho" => "tullock_exponent",
            "epsilon" => "initial_roi_epsilon",
            "fee" => "participation_fee",
            other => other,
        };
        CONFIG_KEYS.iter().copied().find(|k| *k == alias)
    }

    /// Sets one parameter from its textual form. Accepts canonical keys and aliases.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let canonical = Self::canonical_key(key)
            .ok_or_else(|| Error::config(format!("unknown parameter `{key}`")))?;
        match canonical {
            "initial_population" => self.initial_population = parse(canonical, value)?,
            "winners_per_round" => self.winners_per_round = parse(canonical, value)?,
            "num_rounds" => self.num_rounds = parse(canonical, value)?,
            "satisfaction_threshold" => self.satisfaction_threshold = parse(canonical, value)?,
            "risk_alpha" => self.risk_alpha = parse(canonical, value)?,
            "ewma_alpha" => self.ewma_alpha = parse(canonical, value)?,
            "ewma_beta" => self.ewma_beta = parse(canonical, value)?,
            "penalty_gamma" => self.penalty_gamma = parse(canonical, value)?,
            "prior_variance" => self.prior_variance = parse(canonical, value)?,
            "observation_variance" => self.observation_variance = parse(canonical, value)?,
            "cost_mean" => self.cost_mean = parse(canonical, value)?,
            "cost_stddev" => self.cost_stddev = parse(canonical, value)?,
            "recruitment_rate" => self.recruitment_rate = parse(canonical, value)?,
            "initial_roi_epsilon" => self.initial_roi_epsilon = parse(canonical, value)?,
            "participation_fee" => self.participation_fee = parse(canonical, value)?,
            "tullock_exponent" => self.tullock_exponent = parse(canonical, value)?,
            "mechanism" => self.mechanism = value.trim().parse()?,
            "seed" => self.seed = parse(canonical, value)?,
            "num_runs" => self.num_runs = parse(canonical, value)?,
            "tolerance_min" => self.tolerance_min = parse(canonical, value)?,
            "tolerance_max" => self.tolerance_max = parse(canonical, value)?,
            "exit_patience" => self.exit_patience = parse(canonical, value)?,
            "clamp_monotone" => self.clamp_monotone = parse(canonical, value)?,
            "decay_while_dropped" => self.decay_while_dropped = parse(canonical, value)?,
            "mpi_population" => self.mpi_population = value.trim().parse()?,
            _ => unreachable!("every canonical key is handled"),
        }
        Ok(())
    }

    /// Textual value of a canonical key; round-trips through [`ScenarioConfig::set`].
    pub fn get(&self, key: &str) -> Option<String> {
        let v = match Self::canonical_key(key)? {
            "initial_population" => self.initial_population.to_string(),
            "winners_per_round" => self.winners_per_round.to_string(),
            "num_rounds" => self.num_rounds.to_string(),
            "satisfaction_threshold" => self.satisfaction_threshold.to_string(),
            "risk_alpha" => self.risk_alpha.to_string(),
            "ewma_alpha" => self.ewma_alpha.to_string(),
            "ewma_beta" => self.ewma_beta.to_string(),
            "penalty_gamma" => self.penalty_gamma.to_string(),
            "prior_variance" => self.prior_variance.to_string(),
            "observation_variance" => self.observation_variance.to_string(),
            "cost_mean" => self.cost_mean.to_string(),
            "cost_stddev" => self.cost_stddev.to_string(),
            "recruitment_rate" => self.recruitment_rate.to_string(),
            "initial_roi_epsilon" => self.initial_roi_epsilon.to_string(),
            "participation_fee" => self.participation_fee.to_string(),
            "tullock_exponent" => self.tullock_exponent.to_string(),
            "mechanism" => self.mechanism.to_string(),
            "seed" => self.seed.to_string(),
            "num_runs" => self.num_runs.to_string(),
            "tolerance_min" => self.tolerance_min.to_string(),
            "tolerance_max" => self.tolerance_max.to_string(),
            "exit_patience" => self.exit_patience.to_string(),
            "clamp_monotone" => self.clamp_monotone.to_string(),
            "decay_while_dropped" => self.decay_while_dropped.to_string(),
            "mpi_population" => self.mpi_population.to_string(),
            _ => return None,
        };
        Some(v)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::config(msg));
        if self.initial_population == 0 {
            return fail("initial_population must be positive");
        }
        if self.winners_per_round == 0 {
            return fail("winners_per_round must be positive");
        }
        if self.winners_per_round > self.initial_population {
            return fail("winners_per_round must not exceed initial_population");
        }
        if self.num_rounds == 0 {
            return fail("num_rounds must be positive");
        }
        if self.num_runs == 0 {
            return fail("num_runs must be positive");
        }
        if !(self.satisfaction_threshold > 0.0 && self.satisfaction_threshold <= 1.0) {
            return fail("satisfaction_threshold must lie in (0, 1]");
        }
        if !(self.ewma_alpha > 0.0 && self.ewma_alpha < 1.0) {
            return fail("ewma_alpha must lie strictly inside (0, 1)");
        }
        if !(self.ewma_beta > 0.0 && self.ewma_beta < 1.0) {
            return fail("ewma_beta must lie strictly inside (0, 1)");
        }
        if !(self.risk_alpha >= 0.0 && self.risk_alpha.is_finite()) {
            return fail("risk_alpha must be non-negative");
        }
        if !(self.penalty_gamma >= 0.0 && self.penalty_gamma.is_finite()) {
            return fail("penalty_gamma must be non-negative");
        }
        if !(self.prior_variance > 0.0 && self.observation_variance > 0.0) {
            return fail("prior_variance and observation_variance must be positive");
        }
        if !(self.cost_mean > 0.0 && self.cost_mean.is_finite()) {
            return fail("cost_mean must be positive");
        }
        if !(self.cost_stddev > 0.0 && self.cost_stddev.is_finite()) {
            return fail("cost_stddev must be positive");
        }
        if !(self.recruitment_rate >= 0.0 && self.recruitment_rate.is_finite()) {
            return fail("recruitment_rate must be non-negative");
        }
        if !(self.initial_roi_epsilon > 0.0 && self.initial_roi_epsilon.is_finite()) {
            return fail("initial_roi_epsilon must be positive");
        }
        if !(self.participation_fee >= 0.0 && self.participation_fee.is_finite()) {
            return fail("participation_fee must be non-negative");
        }
        if !(self.tullock_exponent > 0.0 && self.tullock_exponent.is_finite()) {
            return fail("tullock_exponent must be positive");
        }
        if !(self.tolerance_min >= 0.0 && self.tolerance_max >= self.tolerance_min) {
            return fail("tolerance bounds must satisfy 0 <= min <= max");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Active,
    Dropped,
    Exited,
}

impl Status {
    /// Active -> Dropped -> {Active, Exited}; Exited is terminal.
    pub fn can_transition_to(self, next: Status) -> bool {
        matches!(
            (self, next),
            (Status::Active, Status::Dropped)
                | (Status::Dropped, Status::Active)
                | (Status::Dropped, Status::Exited)
        ) || self == next && self != Status::Exited
    }
}

/// One bidder's full lifecycle state.
#[derive(Debug, Clone, PartialEq)]
pub struct Participant {
    pub id: ParticipantId,
    pub true_cost: f64,
    pub assumed_cost: f64,
    pub knows_true_cost: bool,
    pub tolerance: f64,
    /// Entry bid; the reference point of the deviation penalty.
    pub initial_bid: f64,
    pub current_bid: f64,
    pub participation_freq: f64,
    pub avg_earnings: f64,
    pub roi: f64,
    pub status: Status,
    pub rounds_participated: u32,
    pub rounds_won: u32,
    pub join_round: usize,
    pub estimator: BidEstimator,
    /// Consecutive rounds spent dropped with a failing rejoin estimate.
    pub dropped_streak: u32,
}

impl Participant {
    /// Samples a fresh participant.
    ///
    /// Draw order: true cost (Gaussian, resampled until positive), the
    /// assumed-cost factor in `[0.9, 1.05)`, then the tolerance.
    pub fn sample(
        id: ParticipantId,
        join_round: usize,
        rng: &mut SimRng,
        config: &ScenarioConfig,
    ) -> Result<Self> {
        if !(config.cost_mean > 0.0) {
            return Err(Error::config("cost_mean must be positive"));
        }
        if !(config.cost_stddev > 0.0) {
            return Err(Error::config("cost_stddev must be positive"));
        }
        let true_cost = loop {
            let c = rng.normal(config.cost_mean, config.cost_stddev);
            if c > 0.0 {
                break c;
            }
        };
        let assumed_cost = true_cost * rng.uniform_range(0.9, 1.05);
        let tolerance = rng.uniform_range(config.tolerance_min, config.tolerance_max);
        Self::with_costs(id, join_round, true_cost, assumed_cost, tolerance, config)
    }

    pub fn with_costs(
        id: ParticipantId,
        join_round: usize,
        true_cost: f64,
        assumed_cost: f64,
        tolerance: f64,
        config: &ScenarioConfig,
    ) -> Result<Self> {
        let estimator = BidEstimator::unseeded(assumed_cost);
        let initial_bid = crate::bidding::initial_bid(&estimator, config.risk_alpha)?;
        Ok(Self {
            id,
            true_cost,
            assumed_cost,
            knows_true_cost: false,
            tolerance,
            initial_bid,
            current_bid: initial_bid,
            participation_freq: 0.0,
            avg_earnings: 0.0,
            roi: config.satisfaction_threshold + config.initial_roi_epsilon,
            status: Status::Active,
            rounds_participated: 0,
            rounds_won: 0,
            join_round,
            estimator,
            dropped_streak: 0,
        })
    }

    /// The cost the participant reasons with: realized once it has performed a task.
    pub fn cost_estimate(&self) -> f64 {
        if self.knows_true_cost {
            self.true_cost
        } else {
            self.assumed_cost
        }
    }

    pub fn is_active(&self) -> bool {
        self.status == Status::Active
    }

    /// Moves to `next`, refusing transitions the lifecycle forbids.
    pub fn transition(&mut self, next: Status) -> Result<()> {
        if !self.status.can_transition_to(next) {
            return Err(Error::State(format!(
                "participant {} cannot move from {:?} to {:?}",
                self.id, self.status, next
            )));
        }
        self.status = next;
        Ok(())
    }
}

/// Outcome of one auction round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub round: usize,
    pub winner_ids: Vec<ParticipantId>,
    pub payments: Vec<f64>,
    pub auction_cost: f64,
    pub active_count: usize,
    pub dropped_this_round: usize,
    pub rejoined_this_round: usize,
    pub recruited_this_round: usize,
    pub exited_this_round: usize,
    pub mpi: Option<f64>,
    pub mean_bar: Option<f64>,
    pub mean_bai: Option<f64>,
    pub mean_roi: Option<f64>,
    /// Mean over bidders of payment minus realized cost minus the participation fee.
    pub mean_net_utility: Option<f64>,
}
