use serde::Serialize;

use crate::error::Result;
use crate::export::{fmt_num, write_columns};
use crate::filtration::{measurability_test, run_arbitrage_experiment, write_ledger_csv, Classification};
use crate::grid::PathGrid;
use crate::pricing::{compare_prices, write_comparison_csv, OptionKind};
use crate::seed::Seed;
use crate::stats::MeanSummary;
use crate::time_change::{
    identity_crossings, simulate_clock, unconditional_mean_with_step, ActivityPath, RateModel, TimeChangePath,
};

use super::config::{ClockMeanConfig, Experiment, Figure1Config, MeasurabilityConfig, PriceCompareConfig};
use crate::filtration::ArbitrageConfig;

/// One named pass/fail invariant attached to an experiment run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// Files produced by an experiment, held in memory until committed.
#[derive(Debug, Clone, Default)]
pub struct Outputs {
    pub files: Vec<(String, Vec<u8>)>,
    pub summary: String,
    pub checks: Vec<Check>,
}

impl Outputs {
    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.files.push((name.into(), bytes));
        Ok(())
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn file(&self, name: &str) -> Option<&[u8]> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, b)| b.as_slice())
    }
}

#[derive(Serialize)]
struct Echo<'a, C: Serialize> {
    experiment: Experiment,
    seed: u64,
    config: &'a C,
}

/// Rate and clock of one Figure 1 style CIR path.
#[derive(Debug, Clone)]
pub struct Figure1Run {
    pub rate: ActivityPath,
    pub clock: TimeChangePath,
    /// Sign changes of `T_t - t`.
    pub crossings: usize,
}

pub fn simulate_figure1(config: &Figure1Config, seed: u64) -> Result<Figure1Run> {
    let grid = PathGrid::with_max_step(config.horizon, config.step)?;
    let (rate, clock) = simulate_clock(&RateModel::Cir(config.cir), grid, Seed::new(seed))?;
    let crossings = identity_crossings(&clock);
    Ok(Figure1Run { rate, clock, crossings })
}

#[derive(Serialize)]
struct Figure1Summary<'a> {
    #[serde(flatten)]
    echo: Echo<'a, Figure1Config>,
    n_steps: usize,
    crossings: usize,
    final_clock: f64,
    max_rate: f64,
    feller: bool,
}

/// `figure1_rate.csv` (`t,v`), `figure1_clock.csv` (`t,T,identity`) and a
/// JSON summary with the number of crossings of `y = t`.
pub fn run_figure1(config: &Figure1Config, seed: u64) -> Result<Outputs> {
    let run = simulate_figure1(config, seed)?;
    let grid = run.clock.grid;
    let t: Vec<f64> = grid.points().collect();
    let mut out = Outputs::default();
    let mut rate_csv = Vec::new();
    write_columns(&mut rate_csv, &["t", "v"], &[&t, &run.rate.v])?;
    let mut clock_csv = Vec::new();
    write_columns(&mut clock_csv, &["t", "T", "identity"], &[&t, &run.clock.clock, &t])?;
    out.files.push(("figure1_rate.csv".into(), rate_csv));
    out.files.push(("figure1_clock.csv".into(), clock_csv));
    out.json(
        "figure1_summary.json",
        &Figure1Summary {
            echo: Echo {
                experiment: Experiment::Figure1,
                seed,
                config,
            },
            n_steps: grid.n_steps(),
            crossings: run.crossings,
            final_clock: run.clock.last(),
            max_rate: run.rate.max(),
            feller: config.cir.feller_satisfied(),
        },
    )?;
    let monotone = run.clock.clock.windows(2).all(|w| w[1] >= w[0]);
    out.checks.push(Check::new("clock_nondecreasing", monotone, ""));
    out.checks.push(Check::new(
        "rate_nonnegative",
        run.rate.v.iter().all(|&v| v >= 0.0),
        "",
    ));
    out.summary = format!(
        "figure1: {} steps over {} years, T crosses y = t {} time(s), T_end = {:.4}",
        grid.n_steps(),
        config.horizon,
        run.crossings,
        run.clock.last()
    );
    Ok(out)
}

pub fn run_arbitrage(config: &ArbitrageConfig, seed: u64) -> Result<Outputs> {
    let report = run_arbitrage_experiment(config, Seed::new(seed))?;
    let mut out = Outputs::default();
    #[derive(Serialize)]
    struct Report<'a> {
        #[serde(flatten)]
        echo: Echo<'a, ArbitrageConfig>,
        results: &'a [crate::filtration::RhoReport],
    }
    out.json(
        "arbitrage_report.json",
        &Report {
            echo: Echo {
                experiment: Experiment::Arbitrage,
                seed,
                config,
            },
            results: &report.results,
        },
    )?;
    let mut parts = Vec::new();
    for r in &report.results {
        for (arm, ledgers) in [("lookahead", &r.lookahead_ledgers), ("natural", &r.natural_ledgers)] {
            let mut csv = Vec::new();
            write_ledger_csv(&mut csv, ledgers)?;
            out.files.push((format!("arbitrage_ledger_rho{}_{arm}.csv", r.rho), csv));
        }
        let violations = r.lookahead.violations + r.natural.violations;
        out.checks.push(Check::new(
            &format!("rho{}_information_discipline", r.rho),
            violations == 0,
            format!("{violations} violations"),
        ));
        if r.rho == 1.0 {
            let min = r.lookahead.min_trade_pnl.unwrap_or(0.0);
            out.checks.push(Check::new(
                "rho1_trades_nonnegative",
                min >= 0.0,
                format!("min pnl {min:e}"),
            ));
            out.checks.push(Check::new(
                "rho1_dominates_natural",
                r.dominance_failures == 0,
                format!("{} failing scenarios", r.dominance_failures),
            ));
        }
        parts.push(format!(
            "rho={} lookahead mean {:.4} (t={}) natural mean {:.4}",
            r.rho,
            r.lookahead.mean_pnl,
            r.lookahead.t_stat.map_or("n/a".into(), |t| format!("{t:.2}")),
            r.natural.mean_pnl
        ));
    }
    out.summary = format!("arbitrage: {}", parts.join("; "));
    Ok(out)
}

#[derive(Serialize)]
struct StateRow {
    t: f64,
    state: usize,
    clock_value: f64,
    classification: Classification,
    dispersion: f64,
    n_censored: usize,
    censored_flag: bool,
}

pub fn run_measurability(config: &MeasurabilityConfig, seed: u64) -> Result<Outputs> {
    let opts = config.options();
    let root = Seed::new(seed);
    let mut rows = Vec::new();
    let mut samples = String::from("t,state,C\n");
    for (ti, &t) in config.times.iter().enumerate() {
        for k in 0..config.n_states {
            let r = measurability_test(
                &config.rate_model,
                t,
                root.derive(ti as u64).path(k as u64),
                config.n_continuations,
                &opts,
            )?;
            for c in &r.crossing_samples {
                samples.push_str(&format!("{},{k},{}\n", fmt_num(t), fmt_num(*c)));
            }
            rows.push(StateRow {
                t,
                state: k,
                clock_value: r.state.clock,
                classification: r.classification,
                dispersion: r.dispersion,
                n_censored: r.n_censored,
                censored_flag: r.censored_flag,
            });
        }
    }
    let undetermined: Vec<&StateRow> = rows
        .iter()
        .filter(|r| r.classification == Classification::Undetermined)
        .collect();
    let positive = undetermined.iter().filter(|r| r.dispersion > 0.0).count();
    let determined_exact = rows
        .iter()
        .filter(|r| r.classification == Classification::Determined)
        .all(|r| r.dispersion == 0.0);
    let mut out = Outputs::default();
    #[derive(Serialize)]
    struct Report<'a> {
        #[serde(flatten)]
        echo: Echo<'a, MeasurabilityConfig>,
        n_undetermined: usize,
        n_positive_dispersion: usize,
        states: &'a [StateRow],
    }
    out.json(
        "measurability_report.json",
        &Report {
            echo: Echo {
                experiment: Experiment::Measurability,
                seed,
                config,
            },
            n_undetermined: undetermined.len(),
            n_positive_dispersion: positive,
            states: &rows,
        },
    )?;
    out.files.push(("measurability_samples.csv".into(), samples.into_bytes()));
    out.checks.push(Check::new("determined_dispersion_zero", determined_exact, ""));
    if config.rate_model.is_deterministic() {
        out.checks.push(Check::new(
            "deterministic_rate_dispersion_zero",
            rows.iter().all(|r| r.dispersion == 0.0),
            "",
        ));
    }
    out.summary = format!(
        "measurability: {} states, {} undetermined, {} with positive dispersion",
        rows.len(),
        undetermined.len(),
        positive
    );
    Ok(out)
}

pub fn run_price_compare(config: &PriceCompareConfig, seed: u64) -> Result<Outputs> {
    let model = config.model()?;
    let table = compare_prices(&model, &config.options, &config.pricing, Seed::new(seed))?;
    let mut out = Outputs::default();
    let mut csv = Vec::new();
    write_comparison_csv(&mut csv, &table)?;
    out.files.push(("price_compare.csv".into(), csv));
    #[derive(Serialize)]
    struct Report<'a> {
        #[serde(flatten)]
        echo: Echo<'a, PriceCompareConfig>,
        table: &'a crate::pricing::ComparisonTable,
    }
    out.json(
        "price_compare.json",
        &Report {
            echo: Echo {
                experiment: Experiment::PriceCompare,
                seed,
                config,
            },
            table: &table,
        },
    )?;
    let in_bounds = config.options.iter().zip(&table.rows).all(|(o, r)| match r.cf_price {
        None => true,
        Some(p) => {
            let upper = match o.kind {
                OptionKind::Call => o.spot,
                OptionKind::Put => o.strike * o.discount(),
            };
            p >= o.intrinsic_bound() - 1e-8 && p <= upper + 1e-8
        }
    });
    out.checks.push(Check::new("cf_prices_within_bounds", in_bounds, ""));
    let mc_ok = table.rows.iter().all(|r| r.mc_price.is_some());
    out.checks.push(Check::new("mc_rows_priced", mc_ok, ""));
    out.summary = format!(
        "price-compare: {} rows, max |z| = {}",
        table.rows.len(),
        table.max_abs_z().map_or("n/a".into(), |z| format!("{z:.2}"))
    );
    Ok(out)
}

#[derive(Serialize)]
struct MeanRow {
    t: f64,
    expected: f64,
    #[serde(flatten)]
    summary: MeanSummary,
    z: Option<f64>,
}

pub fn run_clock_mean(config: &ClockMeanConfig, seed: u64) -> Result<Outputs> {
    let root = Seed::new(seed);
    let mut rows = Vec::new();
    for (i, &t) in config.times.iter().enumerate() {
        let summary = unconditional_mean_with_step(&config.rate_model, t, config.n_paths, root.derive(i as u64), config.step)?;
        let expected = config.rate_model.expected_clock(t);
        rows.push(MeanRow {
            t,
            expected,
            z: summary.z_score(expected),
            summary,
        });
    }
    let mut out = Outputs::default();
    let col = |f: fn(&MeanRow) -> f64| rows.iter().map(f).collect::<Vec<f64>>();
    let z: Vec<f64> = rows.iter().map(|r| r.z.unwrap_or(0.0)).collect();
    let mut csv = Vec::new();
    write_columns(
        &mut csv,
        &["t", "mean", "std_error", "expected", "z"],
        &[&col(|r| r.t), &col(|r| r.summary.mean), &col(|r| r.summary.std_error), &col(|r| r.expected), &z],
    )?;
    out.files.push(("clock_mean.csv".into(), csv));
    #[derive(Serialize)]
    struct Report<'a> {
        #[serde(flatten)]
        echo: Echo<'a, ClockMeanConfig>,
        rows: &'a [MeanRow],
    }
    out.json(
        "clock_mean.json",
        &Report {
            echo: Echo {
                experiment: Experiment::ClockMean,
                seed,
                config,
            },
            rows: &rows,
        },
    )?;
    if config.rate_model.is_deterministic() {
        let exact = rows.iter().all(|r| (r.summary.mean - r.expected).abs() <= 1e-9 * r.expected.max(1.0));
        out.checks.push(Check::new("deterministic_mean_exact", exact, ""));
    }
    out.summary = format!(
        "clock-mean: {}",
        rows.iter()
            .map(|r| format!("E T_{} = {:.5} +- {:.5} (expected {:.5})", r.t, r.summary.mean, r.summary.std_error, r.expected))
            .collect::<Vec<_>>()
            .join("; ")
    );
    Ok(out)
}
