//! The verification suites. Each returns discrete data (compared across
//! levels, windows and specializations), values (compared across levels
//! and windows only) and free-form info.

use serde_json::{json, Value};
use u21_core::flag::{self, generation_check, Frame};
use u21_core::group::{
    coset_reps_s, coset_reps_theta, eta, hu_generators, t_n, verify_diag_identity, verify_theta_cosets,
};
use u21_core::pseries::{
    commutation_check, conductor, dimension_table, eta_injective_check, partial_sum_check, preimage_check,
    s_eigenspace_check, theta_decomposition_check, Check, Model,
};
use u21_core::scalar::BigRational;
use u21_core::whittaker::{
    gated_basis_certificate, kernel_in_eta_image, newform_value, verify_equivariance, verify_kirillov_support,
    verify_phi_relations,
};
use u21_core::{EElement, Error, FieldConfig, GroupElement, Result, SubgroupSpec};

use crate::config::RunConfig;

#[derive(Clone, Debug, Default)]
pub struct SuiteOutput {
    pub pass: bool,
    pub summary: String,
    pub discrete: Value,
    pub values: Value,
    pub info: Value,
}

pub struct Ctx<'a> {
    pub run: &'a RunConfig,
    pub cfg: FieldConfig,
    pub model: &'a Model,
    pub offset: u32,
}

impl Ctx<'_> {
    fn range(&self) -> std::ops::RangeInclusive<u32> {
        self.run.n_min..=self.run.n_max
    }
}

/// Whether a suite's outputs depend on the specialization of `x`.
pub fn uses_x(id: &str) -> bool {
    !matches!(id, "unitarity" | "lemma-2.1" | "lemma-2.2" | "lemma-3.3" | "eq-d")
}

pub fn run_suite(id: &str, ctx: &Ctx, x: &BigRational) -> Result<SuiteOutput> {
    match id {
        "unitarity" => unitarity(ctx),
        "lemma-2.1" => transitivity(ctx),
        "lemma-2.2" => generation(ctx),
        "lemma-3.3" => cosets(ctx),
        "prop-3.4" => checks(ctx.range().map(|n| theta_decomposition_check(ctx.model, n, x)).collect()),
        "cor-3.5" => checks(
            ctx.range()
                .flat_map(|n| [commutation_check(ctx.model, n, x), eta_injective_check(ctx.model, n, x)])
                .collect(),
        ),
        "s-criterion" => checks(
            s_levels(ctx)
                .into_iter()
                .map(|n| s_eigenspace_check(ctx.model, n, x))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .flatten()
                .map(Ok)
                .collect(),
        ),
        "lemma-3.7" => checks(s_levels(ctx).into_iter().map(|n| preimage_check(ctx.model, n, x)).collect()),
        "lemma-3.8" => checks(
            ctx.range().flat_map(|n| (1..=2).map(move |k| (n, k))).map(|(n, k)| partial_sum_check(ctx.model, n, k, x)).collect(),
        ),
        "dimensions" => dimensions(ctx),
        "basis" => basis(ctx, x),
        "whittaker" => whittaker(ctx, x),
        "eq-d" => diag_identity(ctx),
        other => Err(Error::Config(format!("unknown suite `{other}`"))),
    }
}

fn s_levels(ctx: &Ctx) -> Vec<u32> {
    let lo = 2.max(ctx.model.chi.n_pi() + 1);
    ctx.range().filter(|n| *n >= lo).collect()
}

fn checks(list: Vec<Result<Check>>) -> Result<SuiteOutput> {
    let list: Vec<Check> = list.into_iter().collect::<Result<_>>()?;
    let pass = list.iter().all(|c| c.pass);
    let failed: Vec<String> = list.iter().filter(|c| !c.pass).map(|c| format!("{} n={} k={}: {}", c.name, c.n, c.k, c.detail)).collect();
    let summary = if list.is_empty() {
        "no applicable levels in range".to_string()
    } else if pass {
        format!("{} checks passed", list.len())
    } else {
        format!("{} of {} checks failed; first: {}", failed.len(), list.len(), failed[0])
    };
    let discrete: Vec<Value> = list.iter().map(|c| json!({"name": c.name, "n": c.n, "k": c.k, "pass": c.pass})).collect();
    let info: Vec<Value> = list.iter().map(|c| json!({"name": c.name, "n": c.n, "k": c.k, "detail": c.detail})).collect();
    Ok(SuiteOutput { pass, summary, discrete: Value::Array(discrete), values: Value::Null, info: Value::Array(info) })
}

fn standard_form(cfg: &FieldConfig, corrupt: bool) -> [[EElement; 3]; 3] {
    let (o, z) = (cfg.one(), cfg.zero());
    let c = if corrupt { o.neg() } else { o };
    [[z, z, c], [z, o, z], [o, z, z]]
}

fn unitarity(ctx: &Ctx) -> Result<SuiteOutput> {
    let cfg = &ctx.cfg;
    let form = standard_form(cfg, ctx.run.self_test);
    let mut elems: Vec<(String, GroupElement)> = vec![("eta".into(), eta(cfg))];
    for n in ctx.range() {
        elems.push((format!("t_{n}"), t_n(cfg, n as i64)));
        for (i, g) in SubgroupSpec::Kn(n).generators(cfg).into_iter().enumerate() {
            elems.push((format!("K{n}[{i}]"), g));
        }
        for (i, g) in coset_reps_theta(cfg, n).into_iter().enumerate() {
            elems.push((format!("theta-rep{n}[{i}]"), g));
        }
    }
    for (i, g) in coset_reps_s(cfg).into_iter().enumerate().take(8) {
        elems.push((format!("S-rep[{i}]"), g));
    }
    let failures: Vec<&String> = elems.iter().filter(|(_, g)| !g.is_unitary_for(&form)).map(|(n, _)| n).collect();
    let pass = failures.is_empty();
    Ok(SuiteOutput {
        pass,
        summary: format!("{} elements, {} not unitary{}", elems.len(), failures.len(), if ctx.run.self_test { " (corrupted form)" } else { "" }),
        discrete: json!({"checked": elems.len(), "failures": failures}),
        values: Value::Null,
        info: json!({"self_test": ctx.run.self_test}),
    })
}

fn transitivity(ctx: &Ctx) -> Result<SuiteOutput> {
    let cfg = &ctx.cfg;
    let gens = SubgroupSpec::Kn(1).generators(cfg);
    let mut levels = vec![1 + ctx.offset, 3];
    if ctx.run.p == 3 {
        levels.push(4);
    }
    levels.sort();
    levels.dedup();
    let mut counts = Vec::new();
    for &m in &levels {
        let part = flag::orbits(cfg, Frame::for_level(1), m, &gens, None, "K1", ctx.run.budget)?;
        counts.push(part.orbit_count());
    }
    let pass = counts.iter().all(|c| *c == 1);
    Ok(SuiteOutput {
        pass,
        summary: format!("K1 orbits {counts:?} at levels {levels:?}"),
        discrete: json!({"transitive": pass}),
        values: Value::Null,
        info: json!({"levels": levels, "orbit_counts": counts}),
    })
}

fn generation(ctx: &Ctx) -> Result<SuiteOutput> {
    let cfg = &ctx.cfg;
    let mut rows = Vec::new();
    let mut info = Vec::new();
    for n in ctx.range().filter(|n| *n <= 2) {
        let m = n.max(1) + ctx.offset;
        let r = generation_check(cfg, SubgroupSpec::Kn(n), &hu_generators(cfg, n), m, ctx.run.closure_budget)?;
        rows.push(json!({"n": n, "pass": r.pass}));
        info.push(json!({"n": n, "level": m, "closure": r.closure_full, "closure_given": r.closure_given}));
    }
    let pass = rows.iter().all(|r| r["pass"] == json!(true));
    Ok(SuiteOutput {
        pass,
        summary: format!("{} levels, generation {}", rows.len(), if pass { "verified" } else { "FAILED" }),
        discrete: Value::Array(rows),
        values: Value::Null,
        info: Value::Array(info),
    })
}

fn cosets(ctx: &Ctx) -> Result<SuiteOutput> {
    let reports: Vec<_> = ctx.range().map(|n| verify_theta_cosets(&ctx.cfg, n)).collect();
    let pass = reports.iter().all(|r| r.pass);
    let index = reports.first().map_or(0, |r| r.index);
    Ok(SuiteOutput {
        pass,
        summary: format!("index {index}, reps {}", if pass { "verified" } else { "FAILED" }),
        discrete: serde_json::to_value(&reports).unwrap(),
        values: Value::Null,
        info: Value::Null,
    })
}

fn dimensions(ctx: &Ctx) -> Result<SuiteOutput> {
    let t = dimension_table(ctx.model, ctx.range())?;
    let pass = t.pass();
    let failures: Vec<String> = t.checks.iter().filter(|c| !c.pass).map(|c| format!("{} n={}: {}", c.name, c.n, c.detail)).collect();
    Ok(SuiteOutput {
        pass,
        summary: format!(
            "dims {:?}, N = {}, n_pi = {}{}",
            t.dims(),
            t.conductor.map_or("none".into(), |c| c.to_string()),
            t.central_conductor,
            if pass { String::new() } else { format!("; discrepancies: {}", failures.join("; ")) }
        ),
        discrete: json!({
            "dims": t.dims(),
            "orbits": t.rows.iter().map(|r| r.orbits).collect::<Vec<_>>(),
            "conductor": t.conductor,
            "central_conductor": t.central_conductor,
            "checks": t.checks.iter().map(|c| json!({"name": c.name, "n": c.n, "pass": c.pass})).collect::<Vec<_>>(),
        }),
        values: Value::Null,
        info: json!({"levels": t.rows.iter().map(|r| r.m).collect::<Vec<_>>(), "character": t.character}),
    })
}

fn find_conductor(ctx: &Ctx) -> Result<u32> {
    match conductor(ctx.model, ctx.run.n_max.max(4))?.0 {
        Some(c) => Ok(c),
        None => Err(Error::Rejected(format!("no non-zero fixed space up to level {}", ctx.run.n_max.max(4)))),
    }
}

fn basis(ctx: &Ctx, x: &BigRational) -> Result<SuiteOutput> {
    let c = find_conductor(ctx)?;
    let mut certs = Vec::new();
    for n in c..=c + 3 {
        certs.push(gated_basis_certificate(ctx.model, c, n, x)?);
    }
    let pass = certs.iter().all(|b| b.certified);
    Ok(SuiteOutput {
        pass,
        summary: format!(
            "N = {c}; ranks {:?} of dims {:?}; gate {}",
            certs.iter().map(|b| b.rank).collect::<Vec<_>>(),
            certs.iter().map(|b| b.dim).collect::<Vec<_>>(),
            certs.first().and_then(|b| b.gate).map_or("unchecked", |g| if g { "W_v(1) != 0" } else { "W_v(1) = 0" })
        ),
        discrete: serde_json::to_value(&certs).unwrap(),
        values: Value::Null,
        info: Value::Null,
    })
}

fn whittaker(ctx: &Ctx, x: &BigRational) -> Result<SuiteOutput> {
    let model = ctx.model;
    let c = find_conductor(ctx)?;
    let n_pi = model.chi.n_pi();
    let w = newform_value(model, c, x)?;
    let mut list: Vec<Check> = vec![Check {
        name: "newform-nonvanishing".into(),
        n: c,
        k: 0,
        pass: w.stabilized && !w.value.is_zero(),
        detail: format!("W_v(1) = {} at M = {}", w.value, w.m),
    }];
    let hi = ctx.run.n_max.min(c + 1);
    for n in c.max(ctx.run.n_min)..=hi {
        list.extend(verify_phi_relations(model, n, x)?);
    }
    list.extend(verify_kirillov_support(model, c, x)?);
    list.push(verify_equivariance(model, c, x, &[(1, 0), (0, 1), (2, 1)])?);
    let k = 2.max(n_pi + 1).max(c);
    if k <= ctx.run.n_max.max(2) {
        list.push(kernel_in_eta_image(model, k, x)?);
    }
    let value = w.report("newform", "1");
    let mut out = checks(list.into_iter().map(Ok).collect())?;
    out.values = json!({"newform_w1": value.value, "m": value.m});
    Ok(out)
}

fn diag_identity(ctx: &Ctx) -> Result<SuiteOutput> {
    let cfg = &ctx.cfg;
    let mut reports = Vec::new();
    for n in ctx.range() {
        let z = if n == 0 { cfg.one().add(&cfg.sqrt_eps()) } else { cfg.one().add(&cfg.elem(-(n as i64), 0, 1)) };
        reports.push(verify_diag_identity(cfg, n, &z)?);
    }
    let pass = reports.iter().all(|r| r.displayed_holds);
    let others: usize = reports.iter().map(|r| r.variants.iter().filter(|(name, h)| *h && name != "1/zbar,1/zbar").count()).sum();
    Ok(SuiteOutput {
        pass,
        summary: format!(
            "displayed form {} for n in {:?}; {others} other argument choices hold",
            if pass { "holds" } else { "FAILS" },
            ctx.range()
        ),
        discrete: serde_json::to_value(&reports).unwrap(),
        values: Value::Null,
        info: Value::Null,
    })
}
