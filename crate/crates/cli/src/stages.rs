use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::anyhow;
use chrono::{NaiveDate, NaiveDateTime};
use epsdd_core::events::{analyze_days, descriptive_stats, pool_events, write_events_csv, Characteristic};
use epsdd_core::market_data::{clean_ticks, parse_ticks, write_bars_csv, write_ticks_csv, CleanReport, ColumnMap};
use epsdd_core::null_model::{
    inject_outliers, reshuffle_days, sample_exponential, sample_pareto, sample_spliced, sample_weibull,
    write_sample_csv, ExperimentManifest, SeededGenerator, SplicedParams,
};
use epsdd_core::outlier_tests::{
    largest, modified_dk_test, original_dk_test, tail_above, to_exponential, u_test, u_test_auto, OutlierReport,
};
use epsdd_core::powerlaw::{ccdf_points, scan_xmin, PowerLawFit};
use epsdd_core::tail_dependence::{lambda_curve, write_curve_csv, LambdaCurve};
use epsdd_core::{Event, EventKind, EventSeries, ExponentialTail};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ContractConfig, RunConfig};
use crate::data::{clean_rel, contract_bars, read_events};
use crate::output::{read_values, OutDir, Provenance};
use crate::{Classify, Failure, Outcome, SampleArgs, SynthArgs, SynthKind};

const KINDS: [EventKind; 2] = [EventKind::Drawdown, EventKind::Drawup];
const FIT_FIELDS: [Characteristic; 3] = [
    Characteristic::Duration,
    Characteristic::NormReturn,
    Characteristic::NormSpeed,
];
const TEST_FIELDS: [Characteristic; 2] = [Characteristic::NormReturn, Characteristic::NormSpeed];
const STAT_FIELDS: [Characteristic; 6] = [
    Characteristic::Duration,
    Characteristic::Size,
    Characteristic::Return,
    Characteristic::NormReturn,
    Characteristic::Speed,
    Characteristic::NormSpeed,
];
const DEPENDENCE_PAIRS: [(Characteristic, Characteristic); 2] = [
    (Characteristic::NormReturn, Characteristic::Duration),
    (Characteristic::NormReturn, Characteristic::NormSpeed),
];
const CCDF_POINTS: usize = 200;
const POOLED: &str = "pooled";
const DEFAULT_OUT: &str = "epsdd-out";

pub struct Context {
    cfg: RunConfig,
    out: OutDir,
    pool: rayon::ThreadPool,
}

/// Analysis failures collected while the remaining outputs are still written.
#[derive(Default)]
struct Failures(Vec<String>);

impl Failures {
    fn push(&mut self, what: &str, e: impl std::fmt::Display) {
        self.0.push(format!("{what}: {e}"));
    }

    fn finish(self) -> Outcome<()> {
        if self.0.is_empty() {
            Ok(())
        } else {
            Err(Failure::Analysis(anyhow!(self.0.join("\n"))))
        }
    }
}

/// One set of events analyzed together: a contract, or all of them.
struct Scope {
    name: String,
    events: Vec<Event>,
}

impl Scope {
    fn of_kind(&self, kind: EventKind) -> Vec<&Event> {
        self.events.iter().filter(|e| e.kind == kind).collect()
    }
}

fn values(events: &[&Event], field: Characteristic) -> Vec<f64> {
    events.iter().map(|e| field.of(e)).collect()
}

/// An event singled out by a test, located in its contract.
#[derive(Serialize)]
struct EventRef {
    rank: usize,
    contract: String,
    day: NaiveDate,
    start: NaiveDateTime,
    value: f64,
}

fn locate(report: &OutlierReport, events: &[&Event], field: Characteristic) -> Vec<EventRef> {
    report
        .outliers
        .iter()
        .filter_map(|o| {
            let e = events.get(o.provenance?)?;
            Some(EventRef {
                rank: o.rank,
                contract: e.contract.clone(),
                day: e.day,
                start: e.start,
                value: field.of(e),
            })
        })
        .collect()
}

#[derive(Serialize)]
struct FitEntry {
    scope: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    kind: Option<EventKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    characteristic: Option<Characteristic>,
    n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    fit: Option<PowerLawFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Serialize)]
struct DkEntry {
    scope: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    kind: Option<EventKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    characteristic: Option<Characteristic>,
    tail_size: usize,
    r_max: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    modified: Option<OutlierReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    original: Option<OutlierReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    dragon_kings: Vec<EventRef>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Serialize)]
struct UEntry {
    scope: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    kind: Option<EventKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    characteristic: Option<Characteristic>,
    rank_mode: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha_censored: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<OutlierReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    dragon_kings: Vec<EventRef>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Serialize)]
struct RowErrorOut {
    line: u64,
    message: String,
}

#[derive(Serialize)]
struct FileClean {
    file: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    cleaned: Option<String>,
    parse_errors: Vec<RowErrorOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<CleanReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Serialize)]
struct ContractSummary {
    label: String,
    days: usize,
    omitted_days: Vec<NaiveDate>,
    drawdowns: usize,
    drawups: usize,
    unnormalizable: usize,
}

struct StatRow {
    scope: String,
    kind: EventKind,
    field: Characteristic,
    stats: epsdd_core::events::DescriptiveStats,
}

fn stat_rows(scope: &str, events: &[Event]) -> Vec<StatRow> {
    let mut rows = Vec::new();
    for kind in KINDS {
        let of_kind: Vec<&Event> = events.iter().filter(|e| e.kind == kind).collect();
        for field in STAT_FIELDS {
            if let Ok(stats) = descriptive_stats(of_kind.iter().copied(), field) {
                rows.push(StatRow {
                    scope: scope.to_string(),
                    kind,
                    field,
                    stats,
                });
            }
        }
    }
    rows
}

fn write_stat_rows(buf: &mut Vec<u8>, prefix: &[&str], rows: &[(Vec<String>, StatRow)]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(buf);
    let mut header: Vec<&str> = prefix.to_vec();
    header.extend(["scope", "kind", "characteristic", "count", "median", "q90", "max"]);
    w.write_record(&header)?;
    for (pre, r) in rows {
        let mut rec = pre.clone();
        rec.extend([
            r.scope.clone(),
            r.kind.as_str().to_string(),
            r.field.as_str().to_string(),
            r.stats.count.to_string(),
            r.stats.median.to_string(),
            r.stats.q90.to_string(),
            r.stats.max.to_string(),
        ]);
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Empirical ccdf next to the fitted one; the fitted column is scaled by
/// the tail fraction and left empty below `x_m`.
fn write_ccdf(buf: &mut Vec<u8>, sample: &[f64], fit: &PowerLawFit) -> anyhow::Result<()> {
    let n = sample.len() as f64;
    let tail_frac = fit.n_tail as f64 / n;
    let mut w = csv::Writer::from_writer(buf);
    w.write_record(["x", "ccdf", "fitted"])?;
    for (x, c) in ccdf_points(sample, CCDF_POINTS) {
        let fitted = if x >= fit.x_m {
            (tail_frac * (fit.x_m / x).powf(fit.alpha)).to_string()
        } else {
            String::new()
        };
        w.write_record([x.to_string(), c.to_string(), fitted])?;
    }
    w.flush()?;
    Ok(())
}

impl Context {
    pub fn new(cfg: RunConfig) -> Outcome<Self> {
        let root = cfg.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
        let provenance = Provenance::new(cfg.hash(), cfg.seed);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .usage()?;
        Ok(Self {
            out: OutDir::new(root, provenance),
            cfg,
            pool,
        })
    }

    fn has_contracts(&self) -> bool {
        !self.cfg.contracts.is_empty()
    }

    /// Run `f` on every contract with the configured parallelism; results
    /// come back in label order whatever the worker count.
    fn per_contract<T, F>(&self, f: F) -> Vec<(&ContractConfig, Outcome<T>)>
    where
        T: Send,
        F: Fn(usize, &ContractConfig) -> Outcome<T> + Sync,
    {
        let contracts = self.cfg.sorted_contracts();
        let results: Vec<Outcome<T>> = self.pool.install(|| {
            contracts
                .par_iter()
                .enumerate()
                .map(|(i, c)| f(i, c))
                .collect()
        });
        contracts.into_iter().zip(results).collect()
    }

    fn par_map<I: Sync, T: Send, F: Fn(&I) -> T + Sync + Send>(&self, items: &[I], f: F) -> Vec<T> {
        self.pool.install(|| items.par_iter().map(f).collect())
    }

    fn write<T>(&self, r: anyhow::Result<T>) -> Outcome<T> {
        r.usage()
    }

    // ---- clean -------------------------------------------------------

    pub fn clean(&self) -> Outcome<()> {
        let mut failures = Failures::default();
        for (c, r) in self.per_contract(|_, c| self.clean_contract(c)) {
            match r {
                Ok(None) => {}
                Ok(Some(msg)) => failures.push(&c.label, msg),
                Err(Failure::Usage(e)) => return Err(Failure::Usage(e)),
                Err(Failure::Analysis(e)) => failures.push(&c.label, format!("{e:#}")),
            }
        }
        failures.finish()
    }

    /// Returns a message when some file of the contract could not be cleaned.
    fn clean_contract(&self, c: &ContractConfig) -> Outcome<Option<String>> {
        let mut files = Vec::with_capacity(c.files.len());
        let mut broken = Vec::new();
        for (idx, source) in c.files.iter().enumerate() {
            let name = source
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default();
            let bytes = std::fs::read(source)
                .map_err(|e| Failure::Usage(anyhow!("cannot read {}: {e}", source.display())))?;
            let outcome = parse_ticks(bytes.as_slice(), &c.columns, c.session.utc_offset_secs)
                .and_then(|parsed| clean_ticks(&parsed.records, &c.session).map(|k| (parsed, k)));
            match outcome {
                Ok((parsed, (kept, report))) => {
                    let rel = clean_rel(&c.label, idx, source);
                    self.write(self.out.csv(&rel, |buf| {
                        write_ticks_csv(&mut *buf, &kept, &ColumnMap::default(), parsed.has_quotes)?;
                        Ok(())
                    }))?;
                    files.push(FileClean {
                        file: name,
                        cleaned: Some(rel),
                        parse_errors: parsed
                            .errors
                            .into_iter()
                            .map(|e| RowErrorOut {
                                line: e.line,
                                message: e.message,
                            })
                            .collect(),
                        report: Some(report),
                        error: None,
                    });
                }
                Err(e) => {
                    broken.push(format!("{name}: {e}"));
                    files.push(FileClean {
                        file: name,
                        cleaned: None,
                        parse_errors: Vec::new(),
                        report: None,
                        error: Some(e.to_string()),
                    });
                }
            }
        }
        #[derive(Serialize)]
        struct Body<'a> {
            contract: &'a str,
            files: Vec<FileClean>,
        }
        self.write(self.out.json(
            &format!("clean/{}/report.json", c.label),
            &Body {
                contract: &c.label,
                files,
            },
        ))?;
        Ok((!broken.is_empty()).then(|| broken.join("; ")))
    }

    // ---- detect ------------------------------------------------------

    pub fn detect(&self) -> Outcome<()> {
        if !self.has_contracts() {
            return Ok(());
        }
        let eps = self.cfg.epsilon();
        let dt = self.cfg.bars.dt;
        let mut failures = Failures::default();
        let mut done: Vec<(EventSeries, ContractSummary)> = Vec::new();
        for (c, r) in self.per_contract(|_, c| {
            let bars = contract_bars(&self.out, c, dt)?;
            let series = bars.series();
            let events = analyze_days(&c.label, &series, &eps).analysis()?;
            self.write(self.out.csv(&format!("bars/{}.csv", c.label), |buf| {
                write_bars_csv(&mut *buf, &series)?;
                Ok(())
            }))?;
            self.write(self.out.csv(&format!("events/{}.csv", c.label), |buf| {
                write_events_csv(&mut *buf, &events.events)?;
                Ok(())
            }))?;
            let count = |k: EventKind| events.events.iter().filter(|e| e.kind == k).count();
            let summary = ContractSummary {
                label: c.label.clone(),
                days: series.len(),
                omitted_days: bars.omitted.clone(),
                drawdowns: count(EventKind::Drawdown),
                drawups: count(EventKind::Drawup),
                unnormalizable: events.unnormalizable,
            };
            Ok((events, summary))
        }) {
            match r {
                Ok(v) => done.push(v),
                Err(Failure::Usage(e)) => return Err(Failure::Usage(e)),
                Err(Failure::Analysis(e)) => failures.push(&c.label, format!("{e:#}")),
            }
        }
        if !failures.0.is_empty() {
            // A pooled file missing a contract would silently bias later stages.
            return failures.finish();
        }

        let series: Vec<EventSeries> = done.iter().map(|(s, _)| s.clone()).collect();
        let pooled = pool_events(&series).analysis()?;
        let all: Vec<Event> = series.iter().flat_map(|s| s.events.iter().cloned()).collect();
        self.write(self.out.csv("events/pooled.csv", |buf| {
            write_events_csv(&mut *buf, &all)?;
            Ok(())
        }))?;

        let mut rows: Vec<(Vec<String>, StatRow)> = Vec::new();
        for s in &series {
            rows.extend(stat_rows(&s.contract, &s.events).into_iter().map(|r| (vec![], r)));
        }
        rows.extend(stat_rows(POOLED, &all).into_iter().map(|r| (vec![], r)));
        self.write(self.out.csv("events/stats.csv", |buf| write_stat_rows(buf, &[], &rows)))?;

        #[derive(Serialize)]
        struct Body<'a> {
            config: epsdd_core::EpsilonConfig,
            pooled_drawdowns: usize,
            pooled_drawups: usize,
            contracts: Vec<&'a ContractSummary>,
        }
        self.write(self.out.json(
            "events/summary.json",
            &Body {
                config: eps,
                pooled_drawdowns: pooled.drawdowns.len(),
                pooled_drawups: pooled.drawups.len(),
                contracts: done.iter().map(|(_, s)| s).collect(),
            },
        ))?;
        Ok(())
    }

    /// Every contract's events plus the pooled set, as written by `detect`.
    fn scopes(&self, with_contracts: bool) -> Outcome<Vec<Scope>> {
        let mut out = Vec::new();
        if with_contracts {
            for c in self.cfg.sorted_contracts() {
                out.push(Scope {
                    name: c.label.clone(),
                    events: read_events(&self.out, &format!("events/{}.csv", c.label))?,
                });
            }
        }
        out.push(Scope {
            name: POOLED.into(),
            events: read_events(&self.out, "events/pooled.csv")?,
        });
        Ok(out)
    }

    fn sample(&self, args: &SampleArgs) -> Outcome<Option<Vec<f64>>> {
        match &args.sample {
            Some(p) => Ok(Some(read_values(p, args.column.as_deref()).usage()?)),
            None => Ok(None),
        }
    }

    // ---- fit ---------------------------------------------------------

    fn fit_one(&self, values: &[f64], ccdf_rel: &str) -> Outcome<Result<PowerLawFit, String>> {
        match scan_xmin(values, &self.cfg.scan_config(), self.cfg.scan.distance) {
            Ok(fit) => {
                self.write(self.out.csv(ccdf_rel, |buf| write_ccdf(buf, values, &fit)))?;
                Ok(Ok(fit))
            }
            Err(e) => Ok(Err(e.to_string())),
        }
    }

    pub fn fit(&self, args: &SampleArgs) -> Outcome<()> {
        let mut jobs: Vec<(String, Option<EventKind>, Option<Characteristic>, Vec<f64>)> = Vec::new();
        if let Some(sample) = self.sample(args)? {
            jobs.push(("sample".into(), None, None, sample));
        } else {
            if !self.has_contracts() {
                return Ok(());
            }
            for scope in self.scopes(true)? {
                for kind in KINDS {
                    let events = scope.of_kind(kind);
                    for field in FIT_FIELDS {
                        jobs.push((scope.name.clone(), Some(kind), Some(field), values(&events, field)));
                    }
                }
            }
        }
        let results = self.par_map(&jobs, |(scope, kind, field, v)| {
            let rel = match (kind, field) {
                (Some(k), Some(f)) => format!("fit/ccdf/{scope}_{}_{}.csv", k.as_str(), f.as_str()),
                _ => format!("fit/ccdf/{scope}.csv"),
            };
            self.fit_one(v, &rel)
        });
        let mut failures = Failures::default();
        let mut fits = Vec::with_capacity(jobs.len());
        for ((scope, kind, field, v), r) in jobs.into_iter().zip(results) {
            let r = r?;
            if let Err(e) = &r {
                failures.push(&describe(&scope, kind, field), e);
            }
            fits.push(FitEntry {
                scope,
                kind,
                characteristic: field,
                n: v.len(),
                fit: r.as_ref().ok().copied(),
                error: r.err(),
            });
        }
        #[derive(Serialize)]
        struct Body {
            fits: Vec<FitEntry>,
        }
        self.write(self.out.json("fit/fits.json", &Body { fits }))?;
        failures.finish()
    }

    // ---- dk ----------------------------------------------------------

    fn dk_one(&self, values: &[f64], x_m: Option<f64>) -> Result<(ExponentialTail, OutlierReport, OutlierReport, usize), String> {
        let tail = match x_m {
            Some(x) => tail_above(values, x),
            None => largest(values, self.cfg.tests.tail_size.min(values.len().saturating_sub(1))),
        }
        .map_err(|e| e.to_string())?;
        if tail.len() < 3 {
            return Err(format!("tail of {} points is too short for the DK tests", tail.len()));
        }
        let r_max = self.cfg.tests.r_max.min(tail.len() - 2);
        let p0 = self.cfg.tests.p0;
        let m = modified_dk_test(&tail, p0, r_max).map_err(|e| e.to_string())?;
        let o = original_dk_test(&tail, p0, r_max).map_err(|e| e.to_string())?;
        let (m, o) = (OutlierReport::from_dk(&m, &tail), OutlierReport::from_dk(&o, &tail));
        Ok((tail, m, o, r_max))
    }

    pub fn dk(&self, args: &SampleArgs) -> Outcome<()> {
        let mut entries = Vec::new();
        let mut failures = Failures::default();
        if let Some(sample) = self.sample(args)? {
            let r = self.dk_one(&sample, args.x_m);
            if let Err(e) = &r {
                failures.push("sample", e);
            }
            entries.push(dk_entry("sample".into(), None, None, r, &[]));
        } else {
            if !self.has_contracts() {
                return Ok(());
            }
            let mut jobs = Vec::new();
            for scope in self.scopes(true)? {
                for kind in KINDS {
                    for field in TEST_FIELDS {
                        jobs.push((scope.name.clone(), kind, field, scope.of_kind(kind).into_iter().cloned().collect::<Vec<_>>()));
                    }
                }
            }
            let results = self.par_map(&jobs, |(_, _, field, events)| {
                let refs: Vec<&Event> = events.iter().collect();
                self.dk_one(&values(&refs, *field), None)
            });
            for ((scope, kind, field, events), r) in jobs.into_iter().zip(results) {
                if let Err(e) = &r {
                    failures.push(&describe(&scope, Some(kind), Some(field)), e);
                }
                let refs: Vec<&Event> = events.iter().collect();
                entries.push(dk_entry(scope, Some(kind), Some(field), r, &refs));
            }
        }
        #[derive(Serialize)]
        struct Body {
            tests: Vec<DkEntry>,
        }
        self.write(self.out.json("dk/report.json", &Body { tests: entries }))?;
        failures.finish()
    }

    // ---- utest -------------------------------------------------------

    fn u_one(&self, values: &[f64], x_m: Option<f64>, rank: Option<usize>) -> Result<(f64, OutlierReport), String> {
        let x_m = match x_m {
            Some(x) => x,
            None => scan_xmin(values, &self.cfg.scan_config(), self.cfg.scan.distance)
                .map_err(|e| e.to_string())?
                .x_m,
        };
        let tail = tail_above(values, x_m).map_err(|e| e.to_string())?;
        let res = match rank {
            Some(r) => u_test(&tail, r),
            None => u_test_auto(&tail, self.cfg.tests.p0, self.cfg.tests.r_max),
        }
        .map_err(|e| e.to_string())?;
        Ok((res.alpha_censored, OutlierReport::from_u(&res, &tail, self.cfg.tests.p0)))
    }

    pub fn utest(&self, args: &SampleArgs, rank: Option<usize>) -> Outcome<()> {
        let rank = rank.or(self.cfg.tests.u_rank);
        let rank_mode = if rank.is_some() { "fixed" } else { "auto" };
        let mut entries = Vec::new();
        let mut failures = Failures::default();
        let mut push = |scope: String, kind, field: Option<Characteristic>, r: Result<(f64, OutlierReport), String>, events: &[&Event]| {
            if let Err(e) = &r {
                failures.push(&describe(&scope, kind, field), e);
            }
            let dragon_kings = match (&r, field) {
                (Ok((_, rep)), Some(f)) => locate(rep, events, f),
                _ => Vec::new(),
            };
            let (alpha, report, error) = match r {
                Ok((a, rep)) => (Some(a), Some(rep), None),
                Err(e) => (None, None, Some(e)),
            };
            entries.push(UEntry {
                scope,
                kind,
                characteristic: field,
                rank_mode,
                alpha_censored: alpha,
                report,
                dragon_kings,
                error,
            });
        };
        if let Some(sample) = self.sample(args)? {
            push("sample".into(), None, None, self.u_one(&sample, args.x_m, rank), &[]);
        } else {
            if !self.has_contracts() {
                return Ok(());
            }
            let pooled = self.scopes(false)?.pop().expect("pooled scope");
            for kind in KINDS {
                let events = pooled.of_kind(kind);
                for field in TEST_FIELDS {
                    let r = self.u_one(&values(&events, field), None, rank);
                    push(pooled.name.clone(), Some(kind), Some(field), r, &events);
                }
            }
        }
        #[derive(Serialize)]
        struct Body {
            tests: Vec<UEntry>,
        }
        self.write(self.out.json("utest/report.json", &Body { tests: entries }))?;
        failures.finish()
    }

    // ---- taildep -----------------------------------------------------

    fn write_curve(&self, rel: &str, curve: &LambdaCurve) -> Outcome<()> {
        self.write(self.out.csv(rel, |buf| {
            write_curve_csv(&mut *buf, curve)?;
            Ok(())
        }))?;
        Ok(())
    }

    pub fn taildep(&self, pairs: Option<&Path>) -> Outcome<()> {
        let grid = &self.cfg.taildep.grid;
        if let Some(path) = pairs {
            let x = read_values(path, Some("x")).usage()?;
            let y = read_values(path, Some("y")).usage()?;
            let curve = lambda_curve(&x, &y, grid).analysis()?;
            return self.write_curve("taildep/pairs.csv", &curve);
        }
        if !self.has_contracts() {
            return Ok(());
        }
        let pooled = self.scopes(false)?.pop().expect("pooled scope");
        let mut failures = Failures::default();
        for kind in KINDS {
            let events = pooled.of_kind(kind);
            for (fx, fy) in DEPENDENCE_PAIRS {
                let name = format!("{}_{}_{}", kind.as_str(), fx.as_str(), fy.as_str());
                match lambda_curve(&values(&events, fx), &values(&events, fy), grid) {
                    Ok(curve) => self.write_curve(&format!("taildep/{name}.csv"), &curve)?,
                    Err(e) => failures.push(&name, e),
                }
            }
        }
        failures.finish()
    }

    // ---- nullsim -----------------------------------------------------

    pub fn nullsim(&self) -> Outcome<()> {
        if !self.has_contracts() {
            return Ok(());
        }
        let eps = self.cfg.epsilon();
        let dt = self.cfg.bars.dt;
        let reps = self.cfg.nullsim.replications;
        let seed = self.cfg.seed;
        let mut per_contract: Vec<Vec<EventSeries>> = Vec::new();
        for (c, r) in self.per_contract(|idx, c| {
            let days = contract_bars(&self.out, c, dt)?.series();
            (0..reps)
                .map(|rep| {
                    let base = SeededGenerator::new(seed, ((idx as u64) << 40) | ((rep as u64) << 32));
                    analyze_days(&c.label, &reshuffle_days(&days, &base), &eps).analysis()
                })
                .collect::<Outcome<Vec<_>>>()
        }) {
            match r {
                Ok(v) => per_contract.push(v),
                Err(Failure::Usage(e)) => return Err(Failure::Usage(e)),
                Err(Failure::Analysis(e)) => {
                    return Err(Failure::Analysis(anyhow!("{}: {e:#}", c.label)));
                }
            }
        }

        let mut failures = Failures::default();
        let mut rows: Vec<(Vec<String>, StatRow)> = Vec::new();
        let mut fits = Vec::new();
        for rep in 0..reps as usize {
            let series: Vec<EventSeries> = per_contract.iter().map(|v| v[rep].clone()).collect();
            let all: Vec<Event> = series.iter().flat_map(|s| s.events.iter().cloned()).collect();
            self.write(self.out.csv(&format!("nullsim/rep{rep}/events.csv"), |buf| {
                write_events_csv(&mut *buf, &all)?;
                Ok(())
            }))?;
            rows.extend(stat_rows(POOLED, &all).into_iter().map(|r| (vec![rep.to_string()], r)));
            for kind in KINDS {
                let events: Vec<&Event> = all.iter().filter(|e| e.kind == kind).collect();
                for field in TEST_FIELDS {
                    let v = values(&events, field);
                    let r = scan_xmin(&v, &self.cfg.scan_config(), self.cfg.scan.distance).map_err(|e| e.to_string());
                    if let Err(e) = &r {
                        failures.push(&format!("replication {rep} {}", describe(POOLED, Some(kind), Some(field))), e);
                    }
                    fits.push((
                        rep,
                        FitEntry {
                            scope: POOLED.into(),
                            kind: Some(kind),
                            characteristic: Some(field),
                            n: v.len(),
                            fit: r.as_ref().ok().copied(),
                            error: r.err(),
                        },
                    ));
                }
            }
        }
        self.write(self.out.csv("nullsim/stats.csv", |buf| write_stat_rows(buf, &["replication"], &rows)))?;

        #[derive(Serialize)]
        struct RepFit {
            replication: usize,
            #[serde(flatten)]
            entry: FitEntry,
        }
        #[derive(Serialize)]
        struct Body {
            fits: Vec<RepFit>,
        }
        let fits = fits
            .into_iter()
            .map(|(replication, entry)| RepFit { replication, entry })
            .collect();
        self.write(self.out.json("nullsim/fits.json", &Body { fits }))?;

        let mut params = BTreeMap::new();
        params.insert("dt".into(), dt.to_string());
        params.insert("eps0".into(), eps.epsilon0.to_string());
        params.insert("mode".into(), format!("{:?}", eps.mode).to_lowercase());
        params.insert("replications".into(), reps.to_string());
        params.insert(
            "contracts".into(),
            self.cfg
                .sorted_contracts()
                .iter()
                .map(|c| c.label.as_str())
                .collect::<Vec<_>>()
                .join(","),
        );
        params.insert(
            "stream_layout".into(),
            "(contract_index << 40) | (replication << 32), plus the day index".into(),
        );
        let manifest = ExperimentManifest::new(seed, (self.cfg.contracts.len() as u64) * reps as u64, params);
        self.write(self.out.json("nullsim/manifest.json", &manifest))?;
        failures.finish()
    }

    // ---- synth -------------------------------------------------------

    pub fn synth(&self, a: &SynthArgs) -> Outcome<()> {
        let gen = SeededGenerator::new(self.cfg.seed, a.stream);
        let mut params = BTreeMap::new();
        params.insert("n".into(), a.n.to_string());
        params.insert("stream".into(), a.stream.to_string());
        let mut sample = match a.kind {
            SynthKind::Pareto => {
                params.insert("kind".into(), "pareto".into());
                params.insert("alpha".into(), a.alpha.to_string());
                params.insert("x_m".into(), a.x_m.to_string());
                sample_pareto(a.n, a.alpha, a.x_m, &gen)
            }
            SynthKind::Exponential => {
                params.insert("kind".into(), "exponential".into());
                params.insert("rate".into(), a.rate.to_string());
                sample_exponential(a.n, a.rate, &gen)
            }
            SynthKind::Weibull => {
                params.insert("kind".into(), "weibull".into());
                params.insert("scale".into(), a.scale.to_string());
                params.insert("shape".into(), a.shape.to_string());
                sample_weibull(a.n, a.scale, a.shape, &gen)
            }
            SynthKind::Spliced => {
                params.insert("kind".into(), "spliced".into());
                for (k, v) in [("mu", a.mu), ("sigma", a.sigma), ("alpha", a.alpha), ("splice", a.splice)] {
                    params.insert(k.into(), v.to_string());
                }
                let p = SplicedParams {
                    mu: a.mu,
                    sigma: a.sigma,
                    alpha: a.alpha,
                    splice: a.splice,
                };
                sample_spliced(a.n, &p, &gen)
            }
        }
        .usage()?;

        if !a.inject.is_empty() {
            params.insert(
                "inject".into(),
                a.inject.iter().map(|f| f.to_string()).collect::<Vec<_>>().join(","),
            );
            let tail = match a.kind {
                SynthKind::Pareto => to_exponential(&sample, a.x_m).usage()?,
                SynthKind::Exponential => ExponentialTail::from_y(&sample),
                _ => {
                    return Err(Failure::Usage(anyhow!(
                        "--inject works with pareto and exponential samples only"
                    )))
                }
            };
            let injected = inject_outliers(&tail, &a.inject).usage()?;
            for k in (0..injected.len()).filter(|&k| injected.provenance[k].is_none()) {
                sample.push(match a.kind {
                    SynthKind::Pareto => injected.x(k),
                    _ => injected.y[k],
                });
            }
        }

        self.write(self.out.csv("synth/sample.csv", |buf| {
            write_sample_csv(&mut *buf, "x", &sample)?;
            Ok(())
        }))?;
        let manifest = ExperimentManifest::new(self.cfg.seed, 1, params);
        self.write(self.out.json("synth/manifest.json", &manifest))?;
        Ok(())
    }

    // ---- run-all -----------------------------------------------------

    pub fn run_all(&self) -> Outcome<()> {
        let none = SampleArgs::default();
        self.clean()?;
        self.detect()?;
        self.fit(&none)?;
        self.dk(&none)?;
        self.utest(&none, None)?;
        self.taildep(None)?;
        self.nullsim()
    }
}

fn describe(scope: &str, kind: Option<EventKind>, field: Option<Characteristic>) -> String {
    match (kind, field) {
        (Some(k), Some(f)) => format!("{scope} {} {}", k.as_str(), f.as_str()),
        _ => scope.to_string(),
    }
}

fn dk_entry(
    scope: String,
    kind: Option<EventKind>,
    field: Option<Characteristic>,
    r: Result<(ExponentialTail, OutlierReport, OutlierReport, usize), String>,
    events: &[&Event],
) -> DkEntry {
    match r {
        Ok((tail, modified, original, r_max)) => DkEntry {
            dragon_kings: field.map(|f| locate(&modified, events, f)).unwrap_or_default(),
            scope,
            kind,
            characteristic: field,
            tail_size: tail.len(),
            r_max,
            modified: Some(modified),
            original: Some(original),
            error: None,
        },
        Err(e) => DkEntry {
            scope,
            kind,
            characteristic: field,
            tail_size: 0,
            r_max: 0,
            modified: None,
            original: None,
            dragon_kings: Vec::new(),
            error: Some(e),
        },
    }
}
