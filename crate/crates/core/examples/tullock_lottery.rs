//! The Tullock contest sampler: empirical win rates against x^ρ / Σx^ρ.

use crowdsense::mechanisms::select_winners_tullock;
use crowdsense::SimRng;

fn main() {
    let efforts = [(0, 3.0), (1, 1.0), (2, 0.5)];
    let draws = 200_000;
    for rho in [0.0, 1.0, 2.0] {
        let mut rng = SimRng::new(1);
        let mut wins = [0u32; 3];
        for _ in 0..draws {
            wins[select_winners_tullock(&efforts, 1, rho, &mut rng)[0] as usize] += 1;
        }
        let total: f64 = efforts.iter().map(|&(_, e)| f64::powf(e, rho)).sum();
        print!("rho {rho}:");
        for (i, &(_, e)) in efforts.iter().enumerate() {
            print!(
                "  #{i} {:.4} (expect {:.4})",
                wins[i] as f64 / draws as f64,
                e.powf(rho) / total
            );
        }
        println!();
    }
}
