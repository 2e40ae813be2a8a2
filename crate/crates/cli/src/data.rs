use std::path::Path;

use anyhow::anyhow;
use chrono::NaiveDate;
use epsdd_core::events::read_events_csv;
use epsdd_core::market_data::{aggregate_bars, parse_ticks, stitch_chain, ColumnMap, LabelledDay};
use epsdd_core::{BarSeries, Event};

use crate::config::ContractConfig;
use crate::output::{read_stage_file, OutDir};
use crate::{Classify, Failure, Outcome};

/// Where `clean` stores the cleaned copy of the `idx`-th file of a contract.
pub fn clean_rel(label: &str, idx: usize, source: &Path) -> String {
    let stem = source.file_stem().and_then(|s| s.to_str()).unwrap_or("ticks");
    format!("clean/{label}/{idx}-{stem}.csv")
}

/// Maturity name used to tag bar days: the source file stem.
pub fn maturity(source: &Path) -> String {
    source
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("ticks")
        .to_string()
}

pub struct ContractBars {
    pub days: Vec<LabelledDay>,
    pub omitted: Vec<NaiveDate>,
}

impl ContractBars {
    pub fn series(&self) -> Vec<BarSeries> {
        self.days.iter().map(|d| d.series.clone()).collect()
    }
}

/// Bars of one continuous contract, rebuilt from the cleaned tick files.
pub fn contract_bars(out: &OutDir, c: &ContractConfig, dt: u32) -> Outcome<ContractBars> {
    let columns = ColumnMap::default();
    let mut parts = Vec::with_capacity(c.files.len());
    let mut omitted = Vec::new();
    for (idx, source) in c.files.iter().enumerate() {
        let path = out.path(&clean_rel(&c.label, idx, source));
        let bytes = read_stage_file(&path, "clean").usage()?;
        let parsed = parse_ticks(bytes.as_slice(), &columns, 0).analysis()?;
        if let Some(e) = parsed.errors.first() {
            return Err(Failure::Analysis(anyhow!(
                "{} line {}: {}",
                path.display(),
                e.line,
                e.message
            )));
        }
        let agg = aggregate_bars(&parsed.records, dt, &c.session).analysis()?;
        omitted.extend(agg.omitted_days);
        parts.push((maturity(source), agg.days));
    }
    let days = stitch_chain(parts, &c.rolls)
        .map_err(|e| Failure::Analysis(anyhow!("contract `{}`: {e}", c.label)))?;
    Ok(ContractBars { days, omitted })
}

/// Events written by `detect`.
pub fn read_events(out: &OutDir, rel: &str) -> Outcome<Vec<Event>> {
    let path = out.path(rel);
    let bytes = read_stage_file(&path, "detect").usage()?;
    read_events_csv(bytes.as_slice())
        .map_err(|e| Failure::Usage(anyhow!("{}: {e}", path.display())))
}
