//! Fairness and accuracy metrics on hand-made inputs and on a live run.

use crowdsense::metrics::{bar, mpi, WinTally};
use crowdsense::{Mechanism, MechanismEngine, ScenarioConfig};

fn main() -> crowdsense::Result<()> {
    println!("mpi uniform   {:?}", mpi(&[0.25; 4]));
    println!("mpi one-sided {:?}", mpi(&[1.0, 0.0]));
    println!("mpi no wins   {:?}", mpi(&[0.0, 0.0, 0.0]));
    println!("bar 5.5 vs 5  {:.3}", bar(5.5, 5.0)?);

    for mechanism in Mechanism::ALL {
        let mut engine = MechanismEngine::new(ScenarioConfig { mechanism, ..Default::default() })?;
        engine.run()?;
        let rounds = engine.round();
        let tally = WinTally::from_counts(engine.participants().iter().map(|p| (p.id, p.rounds_won)));
        let mut freqs = tally.frequencies(rounds);
        freqs.sort_by(|a, b| b.total_cmp(a));
        let never = freqs.iter().filter(|&&f| f == 0.0).count();
        println!(
            "{:<9} mpi {:.3}  top win rate {:.2}  never won {never}",
            mechanism.name(),
            tally.mpi(rounds).unwrap_or(f64::NAN),
            freqs[0],
        );
    }
    Ok(())
}
