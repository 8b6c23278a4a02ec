//! A two-year CIR activity rate, its integrated clock, and how often the clock
//! crosses calendar time.
//!
//! cargo run --release --example figure1_clock -- [seed]

use tclab::grid::PathGrid;
use tclab::seed::Seed;
use tclab::time_change::{identity_crossings, simulate_clock, CirParams, RateModel};

fn main() -> tclab::error::Result<()> {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let model = RateModel::Cir(CirParams::default());
    let grid = PathGrid::new(2.0, 2048)?;
    let (rate, clock) = simulate_clock(&model, grid, Seed::new(seed))?;

    println!("  t      v_t      T_t");
    for i in (0..grid.len()).step_by(256) {
        println!("{:5.2} {:8.4} {:8.4}", grid.point(i), rate.v[i], clock.clock[i]);
    }
    println!("crossings of y = t: {}", identity_crossings(&clock));

    let hits = (0..100)
        .filter(|&s| {
            let (_, c) = simulate_clock(&model, grid, Seed::new(s)).unwrap();
            identity_crossings(&c) > 0
        })
        .count();
    println!("seeds 0..100 with at least one crossing: {hits}");
    Ok(())
}
