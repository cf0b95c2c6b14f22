//! All three mechanisms over the same seeds, with retention and cost summaries.

use crowdsense::metrics::retention_vs_average;
use crowdsense::{run_experiment, ExperimentPlan, ScenarioConfig};

fn main() -> crowdsense::Result<()> {
    let plan = ExperimentPlan::compare(ScenarioConfig { num_runs: 20, ..Default::default() });
    let series = run_experiment(&plan)?;

    println!("{:<10} {:>12} {:>12} {:>10}", "mechanism", "final active", "mean active", "mean cost");
    for s in &series {
        println!(
            "{:<10} {:>12.2} {:>12.2} {:>10.2}",
            s.mechanism.name(),
            s.final_active(),
            s.mean_active(),
            s.mean_auction_cost()
        );
    }

    let actives: Vec<Vec<f64>> = series.iter().map(|s| s.active_means()).collect();
    let refs: Vec<&[f64]> = actives.iter().map(Vec::as_slice).collect();
    for (s, delta) in series.iter().zip(retention_vs_average(&refs)?) {
        println!("{} retention vs average: {delta:+.1}%", s.mechanism);
    }
    Ok(())
}
