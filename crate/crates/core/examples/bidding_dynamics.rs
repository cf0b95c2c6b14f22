//! Bid estimation and revision for a single participant, step by step.

use crowdsense::bidding::{
    bayesian_revise, bid_adjustment_impact, deviation_penalty, initial_bid, BidEstimator, Observation,
};
use crowdsense::SimRng;

fn main() -> crowdsense::Result<()> {
    let mut estimator = BidEstimator::unseeded(4.8);
    for winning in [5.1, 4.9, 5.4, 5.0] {
        estimator.observe(winning);
    }
    let start = initial_bid(&estimator, 0.5)?;
    println!(
        "history mean {:.3}, variance {:.4} -> initial bid {start:.4}",
        estimator.historical_mean, estimator.historical_variance
    );

    let mut rng = SimRng::new(7);
    let true_cost = 5.6;
    let (prior_var, obs_var): (f64, f64) = (0.04, 0.01);
    let mut clamped = start;
    let mut free = start;
    println!("step observation  clamped  unclamped  penalty");
    for step in 1..=8 {
        let x = Observation::new(rng.normal(true_cost, obs_var.sqrt()))?;
        clamped = bayesian_revise(clamped, x, prior_var, obs_var, true)?;
        free = bayesian_revise(free, x, prior_var, obs_var, false)?;
        println!(
            "{step:4} {:11.4} {clamped:8.4} {free:10.4} {:8.4}",
            x.value,
            deviation_penalty(clamped, start, 0.5)
        );
    }
    println!("adjustment impact at win rate 0.3: {:.5}", bid_adjustment_impact(clamped, start, 0.3)?);
    Ok(())
}
