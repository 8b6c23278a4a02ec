//! Closed-form Laplace transform of integrated CIR time against simulation.

use num_complex::Complex64;
use tclab::grid::PathGrid;
use tclab::pricing::laplace_integrated_cir;
use tclab::seed::Seed;
use tclab::stats::Welford;
use tclab::time_change::{simulate_clock, CirParams, RateModel};

fn main() -> tclab::error::Result<()> {
    let p = CirParams::default();
    let grid = PathGrid::new(1.0, 1024)?;
    let clocks: Vec<f64> = (0..50_000)
        .map(|i| simulate_clock(&RateModel::Cir(p), grid, Seed::new(3).path(i)).map(|(_, c)| c.last()))
        .collect::<Result<_, _>>()?;
    for lambda in [0.5, 1.0, 2.0] {
        let mc: Welford = clocks.iter().map(|t| (-lambda * t).exp()).collect();
        let exact = laplace_integrated_cir(&p, Complex64::new(lambda, 0.0), 1.0)?.re;
        println!(
            "lambda {lambda}: closed form {exact:.6}, simulated {:.6} +- {:.6}",
            mc.mean(),
            mc.std_error()
        );
    }
    let z = laplace_integrated_cir(&p, Complex64::new(0.3, 4.0), 2.0)?;
    println!("complex argument 0.3+4i at t = 2: {z:.6}");
    Ok(())
}
