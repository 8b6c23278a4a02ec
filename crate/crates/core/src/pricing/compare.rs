use std::io::Write;

use serde::Serialize;

use crate::error::Result;
use crate::export::fmt_num;
use crate::seed::Seed;

use super::{fourier_price, mc_prices, OptionKind, OptionSpec, PricingConfig, PricingModel};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub strike: f64,
    pub maturity: f64,
    pub kind: OptionKind,
    pub cf_price: Option<f64>,
    pub mc_price: Option<f64>,
    pub mc_se: Option<f64>,
    /// `(mc - cf) / mc_se`.
    pub z: Option<f64>,
    pub errors: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonTable {
    pub model: PricingModel,
    pub config: PricingConfig,
    pub seed: Seed,
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonTable {
    pub fn max_abs_z(&self) -> Option<f64> {
        self.rows.iter().filter_map(|r| r.z).map(f64::abs).reduce(f64::max)
    }
}

/// Transform and Monte Carlo prices side by side. A failure in either arm is
/// recorded on the affected rows; the other rows are still priced.
pub fn compare_prices(
    model: &PricingModel,
    options: &[OptionSpec],
    config: &PricingConfig,
    seed: Seed,
) -> Result<ComparisonTable> {
    config.validate()?;
    let mut rows: Vec<ComparisonRow> = options
        .iter()
        .map(|o| ComparisonRow {
            strike: o.strike,
            maturity: o.maturity,
            kind: o.kind,
            cf_price: None,
            mc_price: None,
            mc_se: None,
            z: None,
            errors: Vec::new(),
        })
        .collect();

    for (row, o) in rows.iter_mut().zip(options) {
        match fourier_price(|u, t| model.cf(u, t), o, config) {
            Ok(r) => row.cf_price = Some(r.price),
            Err(e) => row.errors.push(format!("cf: {e}")),
        }
    }

    let valid: Vec<usize> = (0..options.len()).filter(|&i| options[i].validate().is_ok()).collect();
    let subset: Vec<OptionSpec> = valid.iter().map(|&i| options[i]).collect();
    match mc_prices(model, &subset, config.mc_paths, seed, config) {
        Ok(reports) => {
            for (&i, r) in valid.iter().zip(&reports) {
                rows[i].mc_price = Some(r.price);
                rows[i].mc_se = Some(r.std_error);
            }
        }
        Err(e) => {
            for &i in &valid {
                rows[i].errors.push(format!("mc: {e}"));
            }
        }
    }
    for (i, row) in rows.iter_mut().enumerate() {
        if !valid.contains(&i) {
            row.errors.push(format!("mc: {}", options[i].validate().unwrap_err()));
        }
        if let (Some(cf), Some(mc), Some(se)) = (row.cf_price, row.mc_price, row.mc_se) {
            row.z = (se > 0.0).then(|| (mc - cf) / se);
        }
    }
    Ok(ComparisonTable {
        model: *model,
        config: *config,
        seed,
        rows,
    })
}

/// CSV with header `strike,maturity,kind,cf_price,mc_price,mc_se,z`; missing
/// values are left empty.
pub fn write_comparison_csv<W: Write>(mut out: W, table: &ComparisonTable) -> Result<()> {
    writeln!(out, "strike,maturity,kind,cf_price,mc_price,mc_se,z")?;
    let opt = |x: Option<f64>| x.map(fmt_num).unwrap_or_default();
    for r in &table.rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt_num(r.strike),
            fmt_num(r.maturity),
            r.kind.as_str(),
            opt(r.cf_price),
            opt(r.mc_price),
            opt(r.mc_se),
            opt(r.z)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::LevyParams;
    use crate::time_change::{CirParams, RateModel};

    fn cfg(paths: usize) -> PricingConfig {
        PricingConfig {
            mc_paths: paths,
            ..Default::default()
        }
    }

    #[test]
    fn empty_table() {
        let model = PricingModel::new(LevyParams::martingale(0.2, 0.0).unwrap(), RateModel::Constant { rate: 1.0 });
        let t = compare_prices(&model, &[], &cfg(1000), Seed::new(0)).unwrap();
        assert!(t.rows.is_empty());
        let mut out = Vec::new();
        write_comparison_csv(&mut out, &t).unwrap();
        assert_eq!(out, b"strike,maturity,kind,cf_price,mc_price,mc_se,z\n");
    }

    #[test]
    fn deterministic_clock_row() {
        let model = PricingModel::new(LevyParams::martingale(0.2, 0.0).unwrap(), RateModel::Constant { rate: 1.0 });
        let t = compare_prices(&model, &[OptionSpec::call(1.0, 1.0, 1.0)], &cfg(20_000), Seed::new(5)).unwrap();
        assert!(t.rows[0].z.unwrap().abs() < 3.0);
        assert!(t.rows[0].errors.is_empty());
    }

    #[test]
    fn row_errors_do_not_abort_the_table() {
        let model = PricingModel::new(LevyParams::martingale(0.3, 0.5).unwrap(), RateModel::Cir(CirParams::default()));
        let opts = [OptionSpec::call(1.0, 0.5, 1.0), OptionSpec::call(-1.0, 0.5, 1.0)];
        let t = compare_prices(&model, &opts, &cfg(500), Seed::new(5)).unwrap();
        // rho != 0: no transform price, but Monte Carlo still runs.
        assert!(t.rows[0].cf_price.is_none() && t.rows[0].mc_price.is_some());
        assert!(t.rows[0].errors[0].starts_with("cf:"));
        assert_eq!(t.rows[1].errors.len(), 2);
        let json = serde_json::to_value(&t).unwrap();
        assert_eq!(json["config"]["n_quad"], 4096);
    }
}
