//! Stability and fairness metrics, and cross-run aggregation.

use crate::error::{Error, Result};
use crate::model::{Mechanism, ParticipantId, RoundRecord};

/// Sum of the payments made to a round's winners.
pub fn auction_cost(payments: &[f64]) -> f64 {
    payments.iter().sum()
}

/// Monopoly prevention index of a win-frequency vector.
///
/// `1 - Σw²/N - |max(w)/Σw - 1/N|`. Returns `None` when nobody has won yet,
/// since the dominance term is then 0/0.
pub fn mpi(win_freqs: &[f64]) -> Option<f64> {
    let n = win_freqs.len();
    if n == 0 {
        return None;
    }
    let total: f64 = win_freqs.iter().sum();
    if total <= 0.0 {
        return None;
    }
    let n = n as f64;
    let sum_sq: f64 = win_freqs.iter().map(|w| w * w).sum();
    let max = win_freqs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Some(1.0 - sum_sq / n - (max / total - 1.0 / n).abs())
}

/// Bid accuracy ratio `|bid - cost| / cost`.
pub fn bar(bid: f64, cost: f64) -> Result<f64> {
    if cost == 0.0 {
        return Err(Error::UndefinedMetric("bid accuracy ratio with zero cost"));
    }
    Ok((bid - cost).abs() / cost)
}

/// Per-participant win counts, turned into frequencies over elapsed rounds.
#[derive(Debug, Clone, Default)]
pub struct WinTally {
    wins: Vec<(ParticipantId, u32)>,
}

impl WinTally {
    pub fn from_counts(wins: impl IntoIterator<Item = (ParticipantId, u32)>) -> Self {
        Self {
            wins: wins.into_iter().collect(),
        }
    }

    pub fn frequencies(&self, rounds_elapsed: usize) -> Vec<f64> {
        if rounds_elapsed == 0 {
            return vec![0.0; self.wins.len()];
        }
        self.wins
            .iter()
            .map(|&(_, w)| w as f64 / rounds_elapsed as f64)
            .collect()
    }

    pub fn total_wins(&self) -> u64 {
        self.wins.iter().map(|&(_, w)| w as u64).sum()
    }

    pub fn mpi(&self, rounds_elapsed: usize) -> Option<f64> {
        mpi(&self.frequencies(rounds_elapsed))
    }
}

/// Percentage deviation of each series' mean from the grand mean of all means.
pub fn retention_vs_average(series: &[&[f64]]) -> Result<Vec<f64>> {
    if series.is_empty() || series.iter().any(|s| s.is_empty()) {
        return Err(Error::config("retention comparison needs non-empty series"));
    }
    let means: Vec<f64> = series
        .iter()
        .map(|s| s.iter().sum::<f64>() / s.len() as f64)
        .collect();
    let grand = means.iter().sum::<f64>() / means.len() as f64;
    if grand == 0.0 {
        return Err(Error::UndefinedMetric("retention comparison with zero grand mean"));
    }
    Ok(means.iter().map(|m| (m / grand - 1.0) * 100.0).collect())
}

/// Mean and sample standard deviation over the runs where a value was defined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
    pub samples: usize,
}

impl Stat {
    pub fn from_values(values: impl IntoIterator<Item = f64>) -> Self {
        let values: Vec<f64> = values.into_iter().collect();
        let n = values.len();
        if n == 0 {
            return Self {
                mean: f64::NAN,
                std: f64::NAN,
                samples: 0,
            };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Self {
            mean,
            std,
            samples: n,
        }
    }

    pub fn is_defined(&self) -> bool {
        self.samples > 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundAggregate {
    pub round: usize,
    pub active: Stat,
    pub auction_cost: Stat,
    pub mpi: Stat,
    pub bar: Stat,
    pub bai: Stat,
    pub roi: Stat,
    pub recruited: Stat,
    pub dropped: Stat,
    pub rejoined: Stat,
}

/// Per-round aggregates across runs for one (mechanism, sweep value) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSeries {
    pub mechanism: Mechanism,
    pub sweep_value: Option<f64>,
    pub runs: usize,
    pub rounds: Vec<RoundAggregate>,
}

impl MetricSeries {
    /// Aggregates equal-length run histories round by round.
    pub fn aggregate(
        mechanism: Mechanism,
        sweep_value: Option<f64>,
        histories: &[Vec<RoundRecord>],
    ) -> Result<Self> {
        let len = histories.first().map_or(0, Vec::len);
        if histories.iter().any(|h| h.len() != len) {
            return Err(Error::State("run histories differ in length".into()));
        }
        let rounds = (0..len)
            .map(|i| {
                let col = |f: &dyn Fn(&RoundRecord) -> Option<f64>| {
                    Stat::from_values(histories.iter().filter_map(|h| f(&h[i])))
                };
                RoundAggregate {
                    round: i + 1,
                    active: col(&|r| Some(r.active_count as f64)),
                    auction_cost: col(&|r| Some(r.auction_cost)),
                    mpi: col(&|r| r.mpi),
                    bar: col(&|r| r.mean_bar),
                    bai: col(&|r| r.mean_bai),
                    roi: col(&|r| r.mean_roi),
                    recruited: col(&|r| Some(r.recruited_this_round as f64)),
                    dropped: col(&|r| Some(r.dropped_this_round as f64)),
                    rejoined: col(&|r| Some(r.rejoined_this_round as f64)),
                }
            })
            .collect();
        Ok(Self {
            mechanism,
            sweep_value,
            runs: histories.len(),
            rounds,
        })
    }

    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    pub fn active_means(&self) -> Vec<f64> {
        self.rounds.iter().map(|r| r.active.mean).collect()
    }

    pub fn auction_cost_means(&self) -> Vec<f64> {
        self.rounds.iter().map(|r| r.auction_cost.mean).collect()
    }

    /// Mean active participants in the last round.
    pub fn final_active(&self) -> f64 {
        self.rounds.last().map_or(f64::NAN, |r| r.active.mean)
    }

    /// Time average of the per-round mean active count.
    pub fn mean_active(&self) -> f64 {
        mean(self.rounds.iter().map(|r| r.active.mean))
    }

    pub fn mean_auction_cost(&self) -> f64 {
        mean(self.rounds.iter().map(|r| r.auction_cost.mean))
    }

    /// Time average over rounds where the metric is defined.
    pub fn time_mean(&self, pick: impl Fn(&RoundAggregate) -> Stat) -> f64 {
        mean(
            self.rounds
                .iter()
                .map(pick)
                .filter(Stat::is_defined)
                .map(|s| s.mean),
        )
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        sum / n as f64
    }
}
