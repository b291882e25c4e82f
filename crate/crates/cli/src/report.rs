//! Runs suites at the base configuration and its variants and assembles the
//! versioned report.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;
use u21_core::pseries::{CharacterSpec, Model, TorusCharacter};
use u21_core::scalar::rat;
use u21_core::{Error, Result};

use crate::config::RunConfig;
use crate::suites::{run_suite, uses_x, Ctx, SuiteOutput};

pub const SCHEMA: &str = "u21-report";
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct Agreement {
    /// Same outputs at level `m + 1` (`None` when that run is out of budget).
    pub level: Option<bool>,
    pub window: Option<bool>,
    pub specialization: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub id: String,
    pub pass: bool,
    pub summary: String,
    pub error: Option<String>,
    pub agreement: Agreement,
    pub notes: Vec<String>,
    pub discrete: Value,
    pub values: Value,
    pub info: Value,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub version: u32,
    pub config: RunConfig,
    pub character: String,
    pub pass: bool,
    pub suites: Vec<SuiteReport>,
}

struct Variant {
    offset: u32,
    extra_window: u32,
}

const BASE: Variant = Variant { offset: 0, extra_window: 0 };
const LEVEL: Variant = Variant { offset: 1, extra_window: 0 };
const WINDOW: Variant = Variant { offset: 0, extra_window: 2 };

fn build_model(run: &RunConfig, v: &Variant) -> Result<Model> {
    let cfg = run.field(v.extra_window);
    let spec = CharacterSpec::parse(&run.chi, cfg.q())?;
    let chi = TorusCharacter::new(&cfg, spec, run.x[0])?;
    Ok(Model::with_offset(&cfg, &chi, v.offset, run.budget).with_level(run.m))
}

fn same(a: &SuiteOutput, b: &SuiteOutput) -> bool {
    a.discrete == b.discrete && a.values == b.values && a.pass == b.pass
}

fn is_budget(e: &Error) -> bool {
    matches!(e, Error::Budget { .. })
}

pub fn run(config: &RunConfig) -> Result<Report> {
    let base = build_model(config, &BASE)?;
    let level = build_model(config, &LEVEL)?;
    let window = build_model(config, &WINDOW)?;
    let x1 = rat(config.x[0].0, config.x[0].1);
    let x2 = rat(config.x[1].0, config.x[1].1);
    let mut suites = Vec::new();
    for id in &config.suites {
        let c0 = Ctx { run: config, cfg: base.cfg, model: &base, offset: 0 };
        let mut notes = Vec::new();
        let first = run_suite(id, &c0, &x1);
        let out = match first {
            Ok(o) => o,
            Err(e) => {
                suites.push(SuiteReport {
                    id: id.clone(),
                    pass: false,
                    summary: format!("error: {e}"),
                    error: Some(e.to_string()),
                    agreement: Agreement { level: None, window: None, specialization: None },
                    notes,
                    discrete: Value::Null,
                    values: Value::Null,
                    info: Value::Null,
                });
                continue;
            }
        };
        let mut variants_pass = true;
        let mut compare = |m: &Model, offset: u32, x: &u21_core::scalar::BigRational, what: &str, values: bool| -> Option<bool> {
            let c = Ctx { run: config, cfg: m.cfg, model: m, offset };
            match run_suite(id, &c, x) {
                Ok(o) => {
                    let agree = if values { same(&out, &o) } else { out.discrete == o.discrete && out.pass == o.pass };
                    if !o.pass {
                        variants_pass = false;
                        notes.push(format!("{what}: {}", o.summary));
                    }
                    Some(agree)
                }
                Err(e) if is_budget(&e) => {
                    notes.push(format!("{what} run skipped: {e}"));
                    None
                }
                Err(e) => {
                    notes.push(format!("{what} run failed: {e}"));
                    Some(false)
                }
            }
        };
        let agreement = Agreement {
            level: compare(&level, 1, &x1, "level m+1", true),
            window: compare(&window, 0, &x1, "window+2", true),
            specialization: if uses_x(id) { compare(&base, 0, &x2, "second specialization", false) } else { None },
        };
        let pass = out.pass
            && variants_pass
            && agreement.level != Some(false) && agreement.window != Some(false) && agreement.specialization != Some(false);
        suites.push(SuiteReport {
            id: id.clone(),
            pass,
            summary: out.summary,
            error: None,
            agreement,
            notes,
            discrete: out.discrete,
            values: out.values,
            info: out.info,
        });
    }
    Ok(Report {
        schema: SCHEMA,
        version: SCHEMA_VERSION,
        config: config.clone(),
        character: base.chi.describe(),
        pass: suites.iter().all(|s| s.pass),
        suites,
    })
}

fn flag(a: Option<bool>) -> &'static str {
    match a {
        Some(true) => "ok",
        Some(false) => "DIFF",
        None => "-",
    }
}

pub fn text(report: &Report) -> String {
    let mut s = String::new();
    let c = &report.config;
    let _ = writeln!(s, "{} v{}  p={} n={}..{} chi={}", report.schema, report.version, c.p, c.n_min, c.n_max, report.character);
    let w = report.suites.iter().map(|r| r.id.len()).max().unwrap_or(0);
    for r in &report.suites {
        let _ = writeln!(
            s,
            "{:<w$}  {}  m+1:{:<4} w+2:{:<4} x2:{:<4} {}",
            r.id,
            if r.pass { "PASS" } else { "FAIL" },
            flag(r.agreement.level),
            flag(r.agreement.window),
            flag(r.agreement.specialization),
            r.summary,
        );
        for n in &r.notes {
            let _ = writeln!(s, "{:<w$}        note: {n}", "");
        }
    }
    let _ = writeln!(s, "overall: {}", if report.pass { "PASS" } else { "FAIL" });
    s
}
