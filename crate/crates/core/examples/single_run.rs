//! One seeded RA-ABCDR run, printed round by round.
//!
//! cargo run --example single_run -- [seed]

use crowdsense::{Mechanism, MechanismEngine, ScenarioConfig};

fn main() -> crowdsense::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2024);
    let config = ScenarioConfig {
        mechanism: Mechanism::RaAbcDr,
        seed,
        ..Default::default()
    };
    let mut engine = MechanismEngine::new(config)?;
    println!("round active winners   cost   mpi  dropped rejoined recruited");
    for rec in engine.run()? {
        if rec.round % 10 != 0 && rec.round > 5 {
            continue;
        }
        println!(
            "{:5} {:6} {:7} {:6.2} {:5.3} {:8} {:8} {:9}",
            rec.round,
            rec.active_count,
            rec.winner_ids.len(),
            rec.auction_cost,
            rec.mpi.unwrap_or(f64::NAN),
            rec.dropped_this_round,
            rec.rejoined_this_round,
            rec.recruited_this_round,
        );
    }
    let pool = engine.participants();
    println!("population {} after {} rounds", pool.len(), engine.round());
    Ok(())
}
