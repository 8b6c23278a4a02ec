use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::grid::PathGrid;
use crate::scenario::{build_scenario, ScenarioSpec};
use crate::seed::Seed;
use crate::stats::Welford;

use super::{Diagnostics, Method, OptionSpec, PriceReport, PricingConfig, PricingModel};

const CHUNK: usize = 256;

/// Monte Carlo prices of several options from one set of scenarios.
///
/// Each path is simulated once up to the longest maturity and read at every
/// maturity, so the estimates are correlated across options. Path `i` uses
/// seed stream `i` and chunks are merged in index order, which makes the
/// result independent of the thread count.
pub fn mc_prices(
    model: &PricingModel,
    options: &[OptionSpec],
    n_paths: usize,
    seed: Seed,
    config: &PricingConfig,
) -> Result<Vec<PriceReport>> {
    model.validate()?;
    if n_paths < 100 {
        return Err(domain("n_paths", format!("must be >= 100, got {n_paths}")));
    }
    if options.is_empty() {
        return Ok(Vec::new());
    }
    for o in options {
        o.validate()?;
    }
    let t_max = options.iter().map(|o| o.maturity).fold(0.0, f64::max);
    let grid = PathGrid::with_max_step(t_max, config.mc_step)?;
    let spec = ScenarioSpec::new(model.levy, model.rate_model, grid, 1.0).with_refinement(config.refinement);

    let n_chunks = n_paths.div_ceil(CHUNK);
    let partials: Vec<Vec<Welford>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![Welford::new(); options.len()];
            for i in c * CHUNK..((c + 1) * CHUNK).min(n_paths) {
                let sc = build_scenario(&spec, seed.path(i as u64))?;
                for (w, o) in acc.iter_mut().zip(options) {
                    let s = o.spot * (o.rate * o.maturity).exp() * sc.price_at(o.maturity)?;
                    w.push(o.discount() * o.payoff(s));
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut total = vec![Welford::new(); options.len()];
    for part in &partials {
        for (t, p) in total.iter_mut().zip(part) {
            t.merge(p);
        }
    }
    Ok(total
        .iter()
        .map(|w| PriceReport {
            price: w.mean(),
            method: Method::Mc,
            std_error: w.std_error(),
            diagnostics: Diagnostics {
                n_paths: Some(n_paths),
                ..Default::default()
            },
        })
        .collect())
}

pub fn mc_price(
    model: &PricingModel,
    option: &OptionSpec,
    n_paths: usize,
    seed: Seed,
    config: &PricingConfig,
) -> Result<PriceReport> {
    mc_prices(model, std::slice::from_ref(option), n_paths, seed, config).map(|mut v| v.remove(0))
}
