//! Recovering business time from the realized variance of log prices.

use tclab::grid::PathGrid;
use tclab::levy::LevyParams;
use tclab::scenario::{build_scenario, realized_qv, ScenarioSpec};
use tclab::seed::Seed;
use tclab::time_change::{CirParams, RateModel};

fn main() -> tclab::error::Result<()> {
    let levy = LevyParams::martingale(0.4, 0.0)?;
    let mut previous: Option<(f64, f64)> = None;
    for n in [256, 1024, 4096] {
        let grid = PathGrid::new(1.0, n)?;
        let spec = ScenarioSpec::new(levy, RateModel::Cir(CirParams::default()), grid, 1.0);
        let mean_sup = (0..64)
            .map(|k| realized_qv(&build_scenario(&spec, Seed::new(9).path(k)).unwrap()).sup_distance)
            .sum::<f64>()
            / 64.0;
        print!("h = 1/{n:<5} mean sup |QV/sigma^2 - T| = {mean_sup:.5}");
        if let Some((h0, d0)) = previous {
            let h = grid.step();
            print!("  fitted exponent {:.3}", (mean_sup / d0).ln() / (h / h0).ln());
        }
        println!();
        previous = Some((grid.step(), mean_sup));
    }
    Ok(())
}
