//! The look-ahead strategy under the enlarged filtration against a control
//! that only sees prices.
//!
//! cargo run --release --example lookahead_arbitrage -- [n_scenarios]

use tclab::filtration::{run_arbitrage_experiment, ArbitrageConfig, Drift, DriftName};
use tclab::seed::Seed;

fn main() -> tclab::error::Result<()> {
    let n = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2000);
    let mut config = ArbitrageConfig::new(n);
    config.drift = Drift::Named(DriftName::Martingale);
    let report = run_arbitrage_experiment(&config, Seed::new(2024))?;
    println!(" rho  arm        mean pnl        se   t-stat  trades");
    for r in &report.results {
        for (arm, s) in [("lookahead", &r.lookahead), ("natural", &r.natural)] {
            println!(
                "{:4.1}  {arm:9} {:10.5} {:9.5} {:8} {:7}",
                r.rho,
                s.mean_pnl,
                s.se,
                s.t_stat.map_or("-".into(), |t| format!("{t:.2}")),
                s.n_trades
            );
        }
    }
    let unit = report.for_rho(1.0).unwrap();
    println!(
        "rho = 1: worst trade {:.3e}, scenarios where the control beats it {}",
        unit.lookahead.min_trade_pnl.unwrap_or(0.0) + 0.0,
        unit.dominance_failures
    );
    Ok(())
}
