//! How the satisfaction threshold shapes retention for the two auction variants.

use crowdsense::{run_experiment, ExperimentPlan, Mechanism, ScenarioConfig, SweepAxis};

fn main() -> crowdsense::Result<()> {
    let thresholds = vec![0.5, 0.6, 0.7, 0.8];
    let mut plan = ExperimentPlan::compare(ScenarioConfig { num_runs: 20, ..Default::default() })
        .with_sweep(SweepAxis::new("threshold", thresholds));
    plan.mechanisms = vec![Mechanism::RaAbc, Mechanism::RaAbcDr];

    println!("{:<10} {:>5} {:>12} {:>10}", "mechanism", "S", "mean active", "mean cost");
    for s in run_experiment(&plan)? {
        println!(
            "{:<10} {:>5} {:>12.2} {:>10.2}",
            s.mechanism.name(),
            s.sweep_value.unwrap_or_default(),
            s.mean_active(),
            s.mean_auction_cost()
        );
    }
    Ok(())
}
