//! Transform prices for a CIR time-changed Brownian motion against Monte Carlo,
//! plus the lognormal check under a deterministic clock.
//!
//! cargo run --release --example fourier_vs_monte_carlo -- [mc_paths]

use tclab::levy::LevyParams;
use tclab::pricing::{black_scholes, compare_prices, fourier_price, OptionSpec, PricingConfig, PricingModel};
use tclab::seed::Seed;
use tclab::time_change::{CirParams, RateModel};

fn main() -> tclab::error::Result<()> {
    let paths = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(50_000);
    let config = PricingConfig {
        mc_paths: paths,
        ..Default::default()
    };

    let lognormal = PricingModel::new(LevyParams::martingale(0.2, 0.0)?, RateModel::Constant { rate: 1.0 });
    let atm = OptionSpec::call(1.0, 1.0, 1.0);
    let cf = fourier_price(|u, t| lognormal.cf(u, t), &atm, &config)?;
    println!(
        "lognormal at the money: transform {:.8}, closed form {:.8}",
        cf.price,
        black_scholes(&atm, 0.2)?.price
    );

    let model = PricingModel::new(LevyParams::martingale(0.3, 0.0)?, RateModel::Cir(CirParams::default()));
    let options: Vec<OptionSpec> = [0.5, 1.0, 2.0]
        .iter()
        .flat_map(|&t| [0.8, 1.0, 1.2].map(|k| OptionSpec::call(k, t, 1.0)))
        .collect();
    let table = compare_prices(&model, &options, &config, Seed::new(11))?;
    println!("strike maturity  transform         mc       se      z");
    for r in &table.rows {
        println!(
            "{:6.2} {:8.2} {:10.6} {:10.6} {:8.6} {:6.2}",
            r.strike,
            r.maturity,
            r.cf_price.unwrap_or(f64::NAN),
            r.mc_price.unwrap_or(f64::NAN),
            r.mc_se.unwrap_or(f64::NAN),
            r.z.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
