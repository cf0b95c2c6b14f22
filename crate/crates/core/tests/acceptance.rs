//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails. Magnitude reports never gate.

use std::fs;
use std::process::ExitCode;

use crowdsense::bidding::{self, BidEstimator, Observation};
use crowdsense::engagement::{self, ParticipationEvent};
use crowdsense::harness::{run_experiment, ExperimentPlan, SweepAxis};
use crowdsense::mechanisms::select_winners_tullock;
use crowdsense::metrics::{self, MetricSeries};
use crowdsense::{cli, Mechanism, Participant, ScenarioConfig, SimRng, Status};

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

fn close(got: f64, want: f64, rel: f64) -> bool {
    if want == 0.0 {
        got.abs() <= 1e-15
    } else {
        ((got - want) / want).abs() <= rel
    }
}

// Closed-form oracles, written out independently of the library.
mod oracle {
    pub fn initial_bid(mean: f64, var: f64, alpha: f64) -> f64 {
        mean + alpha * var
    }
    pub fn revise(b: f64, x: f64, s2: f64, t2: f64) -> f64 {
        let k = s2 / (s2 + t2);
        (1.0 - k) * b + k * x
    }
    pub fn penalty(b: f64, b0: f64, g: f64) -> f64 {
        if b >= b0 {
            g * (b - b0)
        } else {
            g * (b0 - b)
        }
    }
    pub fn bai(b: f64, b0: f64, pw: f64) -> f64 {
        (b / b0 - 1.0) * pw
    }
    pub fn participation(p: f64, e: f64, a: f64) -> f64 {
        a * e + (1.0 - a) * p
    }
    pub fn earnings(m: f64, won: bool, b: f64, beta: f64) -> f64 {
        if won {
            beta * b + (1.0 - beta) * m
        } else {
            (1.0 - beta) * m
        }
    }
    pub fn roi(m: f64, p: f64, c: f64, tau: f64) -> f64 {
        (m + tau) / (p * c + tau)
    }
    pub fn roi_dropped(m: f64, p: f64, cbar: f64, tau: f64, bid: f64, a: f64, beta: f64) -> f64 {
        let p1 = a + (1.0 - a) * p;
        let m1 = beta * bid + (1.0 - beta) * m;
        (m1 + tau) / (p1 * cbar + tau)
    }
    pub fn cost(pay: &[f64]) -> f64 {
        let mut s = 0.0;
        for &x in pay {
            s += x;
        }
        s
    }
    pub fn mpi(w: &[f64]) -> f64 {
        let n = w.len() as f64;
        let total: f64 = w.iter().sum();
        let sq: f64 = w.iter().map(|x| x * x).sum();
        let mx = w.iter().cloned().fold(f64::MIN, f64::max);
        1.0 - sq / n - (mx / total - 1.0 / n).abs()
    }
    pub fn bar(b: f64, c: f64) -> f64 {
        ((b - c) / c).abs()
    }
}

fn formula_oracles() -> Outcome {
    let mut rng = SimRng::new(11);
    let trials = 200;
    let mut failures: Vec<String> = Vec::new();
    let mut check = |name: &str, got: f64, want: f64| {
        if !close(got, want, 1e-9) {
            failures.push(format!("{name}: got {got}, want {want}"));
        }
    };
    let cfg = ScenarioConfig::default();
    for _ in 0..trials {
        let mean = rng.uniform_range(0.5, 10.0);
        let var = rng.uniform_range(0.0, 3.0);
        let alpha = rng.uniform_range(0.0, 2.0);
        let est = BidEstimator::from_moments(mean, var, 5);
        check("initial bid", bidding::initial_bid(&est, alpha).unwrap(), oracle::initial_bid(mean, var, alpha));

        let b = rng.uniform_range(0.5, 10.0);
        let x = rng.uniform_range(0.5, 10.0);
        let s2 = rng.uniform_range(0.001, 2.0);
        let t2 = rng.uniform_range(0.001, 2.0);
        let obs = Observation::new(x).unwrap();
        check(
            "revision",
            bidding::bayesian_revise(b, obs, s2, t2, false).unwrap(),
            oracle::revise(b, x, s2, t2),
        );

        let b0 = rng.uniform_range(0.5, 10.0);
        let g = rng.uniform_range(0.0, 5.0);
        check("penalty", bidding::deviation_penalty(b, b0, g), oracle::penalty(b, b0, g));
        let pw = rng.uniform();
        check("bai", bidding::bid_adjustment_impact(b, b0, pw).unwrap(), oracle::bai(b, b0, pw));

        let p = rng.uniform();
        let a = rng.uniform_range(0.01, 0.99);
        let present = rng.uniform() < 0.5;
        let ev = if present { ParticipationEvent::Present } else { ParticipationEvent::Absent };
        check(
            "participation",
            engagement::update_participation(p, ev, a).unwrap(),
            oracle::participation(p, if present { 1.0 } else { 0.0 }, a),
        );

        let m = rng.uniform_range(0.0, 8.0);
        let beta = rng.uniform_range(0.01, 0.99);
        let won = rng.uniform() < 0.5;
        check("earnings", engagement::update_earnings(m, won, b, beta), oracle::earnings(m, won, b, beta));

        let c = rng.uniform_range(1.0, 9.0);
        let tau = rng.uniform_range(0.1, 2.0);
        check("roi", engagement::roi_active(m, p, c, tau).unwrap(), oracle::roi(m, p, c, tau));

        let dcfg = ScenarioConfig { ewma_alpha: a, ewma_beta: beta, ..cfg.clone() };
        let mut person = Participant::with_costs(0, 0, c, c * 0.95, tau, &dcfg).unwrap();
        person.participation_freq = p;
        person.avg_earnings = m;
        person.transition(Status::Dropped).unwrap();
        check(
            "dropped roi",
            engagement::roi_estimate_dropped(&person, b, &dcfg).unwrap(),
            oracle::roi_dropped(m, p, c * 0.95, tau, b, a, beta),
        );

        let n = 1 + rng.index(30);
        let pays: Vec<f64> = (0..n).map(|_| rng.uniform_range(0.1, 10.0)).collect();
        check("auction cost", metrics::auction_cost(&pays), oracle::cost(&pays));
        let w: Vec<f64> = (0..n.max(2)).map(|_| rng.uniform()).collect();
        check("mpi", metrics::mpi(&w).unwrap(), oracle::mpi(&w));
        check("bar", metrics::bar(b, c).unwrap(), oracle::bar(b, c));
    }
    let pass = failures.is_empty();
    let detail = if pass {
        format!("{trials} random inputs per formula, 11 formulas, rel err <= 1e-9")
    } else {
        format!("{} mismatches, first: {}", failures.len(), failures[0])
    };
    Outcome::new(pass, detail)
}

fn monotone_revision() -> Outcome {
    let mut rng = SimRng::new(12);
    let trajectories = 10_000;
    let steps = 50;
    let mut bad = 0usize;
    let mut finals = Vec::with_capacity(trajectories);
    for _ in 0..trajectories {
        let mut b = rng.uniform_range(0.0, 10.0);
        let s2 = rng.uniform_range(0.001, 2.0);
        let t2 = rng.uniform_range(0.001, 2.0);
        let centre = rng.uniform_range(0.0, 10.0);
        for _ in 0..steps {
            let x = centre + rng.standard_normal() * 3.0;
            let next = bidding::bayesian_revise(b, Observation::new(x).unwrap(), s2, t2, true).unwrap();
            if next < 0.0 || next < b {
                bad += 1;
            }
            b = next;
        }
        finals.push(b);
    }
    let mut agg_bad = 0usize;
    for pair in finals.chunks_exact(2) {
        let joint = metrics::auction_cost(pair);
        if joint > pair[0] + pair[1] || joint.is_nan() {
            agg_bad += 1;
        }
    }
    Outcome::new(
        bad == 0 && agg_bad == 0,
        format!(
            "{trajectories} trajectories x {steps} steps: {bad} violations; {} pair aggregates: {agg_bad} violations",
            finals.len() / 2
        ),
    )
}

fn find(series: &[MetricSeries], m: Mechanism) -> &MetricSeries {
    series.iter().find(|s| s.mechanism == m).expect("mechanism present")
}

fn last_k_mean(s: &MetricSeries, k: usize) -> f64 {
    let a = s.active_means();
    let tail = &a[a.len() - k..];
    tail.iter().sum::<f64>() / k as f64
}

fn retention_and_cost(series: &[MetricSeries]) -> (Outcome, Outcome) {
    let ra = find(series, Mechanism::RaAbc);
    let dr = find(series, Mechanism::RaAbcDr);
    let tu = find(series, Mechanism::Tullock);
    let (a, d, t) = (ra.final_active(), dr.final_active(), tu.final_active());
    let advantage = (d / t - 1.0) * 100.0;
    let actives = [ra.active_means(), dr.active_means(), tu.active_means()];
    let refs: Vec<&[f64]> = actives.iter().map(|v| v.as_slice()).collect();
    let deltas = metrics::retention_vs_average(&refs).unwrap();
    let mut detail = format!(
        "round 100 active: ra-abcdr {d:.2} > ra-abc {a:.2} > tullock {t:.2}; ra-abcdr over tullock {advantage:+.1}%{}; \
         vs grand mean ra-abc {:+.1}% ra-abcdr {:+.1}% tullock {:+.1}%; last-10-round means {:.2} / {:.2} / {:.2}",
        if advantage < 25.0 { " [FLAG: below +25%]" } else { "" },
        deltas[0],
        deltas[1],
        deltas[2],
        last_k_mean(dr, 10),
        last_k_mean(ra, 10),
        last_k_mean(tu, 10),
    );
    let ordered = d > a && a > t;
    if !ordered {
        detail.push_str(" [ordering violated]");
    }
    let (ld, la, lt) = (last_k_mean(dr, 10), last_k_mean(ra, 10), last_k_mean(tu, 10));
    if !(ld > la && la > lt) {
        detail.push_str(" [FLAG: ordering does not hold on last-10-round means]");
    }
    let retention = Outcome::new(ordered, detail);

    let (ca, cd, ct) = (ra.mean_auction_cost(), dr.mean_auction_cost(), tu.mean_auction_cost());
    let saving = (1.0 - cd / ct) * 100.0;
    let cost = Outcome::new(
        ct > ca && ca > cd,
        format!(
            "mean auction cost: tullock {ct:.3} > ra-abc {ca:.3} > ra-abcdr {cd:.3}; ra-abcdr saving vs tullock {saving:.1}%{}",
            if saving < 10.0 { " [FLAG: below 10%]" } else { "" }
        ),
    );
    (retention, cost)
}

fn threshold_sweep() -> Outcome {
    let thresholds = [0.5, 0.6, 0.7, 0.8];
    let mut plan = ExperimentPlan::compare(ScenarioConfig::default())
        .with_sweep(SweepAxis::new("threshold", thresholds.to_vec()));
    plan.mechanisms = vec![Mechanism::RaAbc, Mechanism::RaAbcDr];
    let series = run_experiment(&plan).unwrap();
    let pick = |m: Mechanism| -> Vec<f64> {
        thresholds
            .iter()
            .map(|&s| {
                series
                    .iter()
                    .find(|x| x.mechanism == m && x.sweep_value == Some(s))
                    .expect("sweep cell")
                    .mean_active()
            })
            .collect()
    };
    let ra = pick(Mechanism::RaAbc);
    let dr = pick(Mechanism::RaAbcDr);
    let non_increasing = |v: &[f64]| v.windows(2).all(|w| w[1] <= w[0]);
    let dominance = ra.iter().zip(&dr).all(|(a, d)| d >= a);
    let pass = non_increasing(&ra) && non_increasing(&dr) && dominance;
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.1}")).collect::<Vec<_>>().join(" ");
    let mut flags = Vec::new();
    if (ra[0] - 100.0).abs() > 15.0 {
        flags.push("ra-abc at S=0.5 not within 100±15");
    }
    if (ra[3] - 75.0).abs() > 15.0 {
        flags.push("ra-abc at S=0.8 not within 75±15");
    }
    if (dr[3] - 90.0).abs() > 15.0 {
        flags.push("ra-abcdr at S=0.8 not within 90±15");
    }
    let flag_text = if flags.is_empty() {
        String::new()
    } else {
        format!(" [FLAG: {}]", flags.join("; "))
    };
    Outcome::new(
        pass,
        format!(
            "mean active over S=0.5..0.8: ra-abc {} | ra-abcdr {}; non-increasing {} / {}, dominance {}{flag_text}",
            fmt(&ra),
            fmt(&dr),
            non_increasing(&ra),
            non_increasing(&dr),
            dominance
        ),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for tag in ["a", "b"] {
        let out = dir.path().join(tag);
        let code = cli::main_with_args([
            "crowdsense",
            "compare",
            "--seed",
            "99",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "compare exited with {code}");
        let series = fs::read(out.join("series.csv")).unwrap();
        let summary = fs::read(out.join("summary.csv")).unwrap();
        outputs.push((series, summary));
    }
    let bytes_equal = outputs[0] == outputs[1];

    let base = ScenarioConfig { num_runs: 12, ..Default::default() };
    let one = run_experiment(&ExperimentPlan::compare(base.clone()).with_workers(1)).unwrap();
    let mut worst = 0.0f64;
    for workers in [2, 3, 8] {
        let many = run_experiment(&ExperimentPlan::compare(base.clone()).with_workers(workers)).unwrap();
        for (x, y) in one.iter().zip(&many) {
            for (rx, ry) in x.rounds.iter().zip(&y.rounds) {
                for (a, b) in [
                    (rx.active, ry.active),
                    (rx.auction_cost, ry.auction_cost),
                    (rx.mpi, ry.mpi),
                    (rx.bar, ry.bar),
                    (rx.bai, ry.bai),
                    (rx.roi, ry.roi),
                ] {
                    for (u, v) in [(a.mean, b.mean), (a.std, b.std)] {
                        if u.is_finite() || v.is_finite() {
                            worst = worst.max((u - v).abs());
                        }
                    }
                }
            }
        }
    }
    Outcome::new(
        bytes_equal && worst <= 1e-12,
        format!("compare outputs byte-identical: {bytes_equal}; max aggregate gap across worker counts {worst:e}"),
    )
}

fn tullock_sampler() -> Outcome {
    let mut rng = SimRng::new(13);
    let draws = 1_000_000;
    let efforts = [(0, 3.0), (1, 1.0)];
    let wins = (0..draws)
        .filter(|_| select_winners_tullock(&efforts, 1, 1.0, &mut rng)[0] == 0)
        .count();
    let rate = wins as f64 / draws as f64;
    Outcome::new((rate - 0.75).abs() <= 0.002, format!("win rate {rate:.5} over {draws} draws (target 0.75 ± 0.002)"))
}

fn mpi_fairness() -> Outcome {
    let mut rng = SimRng::new(14);
    let mut beaten = 0usize;
    for n in [2usize, 10, 100] {
        for total in [1.0, 0.2 * n as f64] {
            let uniform = metrics::mpi(&vec![total / n as f64; n]).unwrap();
            for _ in 0..10_000 {
                let raw: Vec<f64> = (0..n).map(|_| rng.uniform()).collect();
                let s: f64 = raw.iter().sum();
                let v: Vec<f64> = raw.iter().map(|x| x * total / s).collect();
                if metrics::mpi(&v).unwrap() > uniform + 1e-12 {
                    beaten += 1;
                }
            }
        }
    }
    let half = metrics::mpi(&[0.5, 0.5]).unwrap();
    let skew = metrics::mpi(&[1.0, 0.0]).unwrap();
    Outcome::new(
        beaten == 0 && half == 0.75 && skew == 0.0,
        format!("uniform beaten {beaten} times in 6x10^4 vectors; MPI(0.5,0.5) = {half}, MPI(1,0) = {skew}"),
    )
}

fn main() -> ExitCode {
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    results.push(("1 formula oracles", formula_oracles()));
    results.push(("2 monotone revision", monotone_revision()));
    let baseline = run_experiment(&ExperimentPlan::compare(ScenarioConfig::default())).unwrap();
    let (retention, cost) = retention_and_cost(&baseline);
    results.push(("3 retention ordering", retention));
    results.push(("4 cost ordering", cost));
    results.push(("5 threshold sweep", threshold_sweep()));
    results.push(("6 determinism", determinism()));
    results.push(("7 tullock sampler", tullock_sampler()));
    results.push(("8 mpi fairness", mpi_fairness()));

    let mut failed = 0;
    for (name, o) in &results {
        println!("{} criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
