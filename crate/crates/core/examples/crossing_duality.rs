//! Level-crossing times `C_s = inf{t : T_t > s}` of a stochastic clock and the
//! inversion back to `T`.

use tclab::grid::PathGrid;
use tclab::seed::Seed;
use tclab::time_change::{crossing_curve, invert_crossing, simulate_clock, CirParams, RateModel};

fn main() -> tclab::error::Result<()> {
    let grid = PathGrid::new(3.0, 3072)?;
    let (rate, clock) = simulate_clock(&RateModel::Cir(CirParams::default()), grid, Seed::new(7))?;

    let levels: Vec<f64> = (0..=24).map(|k| 0.1 * k as f64).collect();
    let curve = crossing_curve(&clock, &levels)?;
    for (s, c) in curve.levels.iter().zip(&curve.times).step_by(4) {
        println!("C_{s:.1} = {c:.4}");
    }

    // {C_t >= s} and {T_s <= t} agree on every pair of grid points.
    let mismatches = grid
        .points()
        .flat_map(|s| grid.points().map(move |t| (s, t)))
        .filter(|&(s, t)| {
            let c = tclab::time_change::crossing_time(&clock, t).unwrap();
            (c >= s) != (clock.value_at(s).unwrap() <= t)
        })
        .count();
    println!("set identity mismatches: {mismatches}");

    let fine: Vec<f64> = (0..=20_000).map(|k| clock.last() * k as f64 / 20_000.0).collect();
    let dense = crossing_curve(&clock, &fine)?;
    let tail = PathGrid::new(dense.times.last().unwrap().min(grid.t_max()) * 0.999, 1000)?;
    let back = invert_crossing(&dense.finite_prefix(), tail)?;
    let err = tail
        .points()
        .zip(&back.clock)
        .map(|(t, b)| (clock.value_at(t).unwrap() - b).abs())
        .fold(0.0, f64::max);
    println!("sup |T - inverted C| = {err:.2e} (bound 2h max v = {:.2e})", 2.0 * grid.step() * rate.max());
    Ok(())
}
