//! Resimulating the future of a clock from its state at `t`: when `T_t < t`
//! the crossing time `C_t` depends on that future, so it is not a function of
//! the history.

use tclab::filtration::{measurability_test, Classification, MeasurabilityOptions};
use tclab::seed::Seed;
use tclab::time_change::{CirParams, RateModel};

fn main() -> tclab::error::Result<()> {
    let opts = MeasurabilityOptions::default();
    let cir = RateModel::Cir(CirParams::default());
    let (mut undetermined, mut positive) = (0, 0);
    for k in 0..30 {
        let r = measurability_test(&cir, 1.0, Seed::new(5).path(k), 256, &opts)?;
        if r.classification == Classification::Undetermined {
            undetermined += 1;
            positive += (r.dispersion > 0.0) as usize;
            println!(
                "state {k:2}: T_1 = {:.4}, C_1 spread {:.4} over {} continuations",
                r.state.clock,
                r.dispersion,
                r.crossing_samples.len()
            );
        }
    }
    println!("{positive} of {undetermined} undetermined states have positive dispersion");

    let flat = measurability_test(&RateModel::Constant { rate: 0.5 }, 1.0, Seed::new(0), 256, &opts)?;
    println!("constant rate 0.5: C_1 = {:.4}, dispersion {}", flat.crossing_samples[0], flat.dispersion);
    Ok(())
}
