use std::path::Path;

use log::warn;
use serde::Serialize;
use serde_json::{json, Value};
use vortex_atlas::classify::{classify_at, ClassificationReport, ToleranceSet};
use vortex_atlas::dislocation::{scan_zeros_2d, sweep_parameter, trace_dislocation_3d, DislocationPoint, Region};
use vortex_atlas::fieldlang::{catalog, catalog_get, FieldDef, Params};
use vortex_atlas::helmholtz::{helmholtz_residual, wave_residual};
use vortex_atlas::phasefield::{equally_spaced_levels, render_panels, OutputFormat, PanelSpec};
use vortex_atlas::strata::{monte_carlo_genericity, stratum_vs_classifier_crosscheck, MonteCarloConfig};

use crate::args::*;
use crate::error::CliError;

/// What a command produced: its primary output and the exit status.
pub struct Outcome {
    pub text: String,
    pub status: u8,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Outcome { text, status: 0 }
    }
}

pub struct Ctx {
    pub config: Value,
    pub json: bool,
    pub out: Option<String>,
}

impl Ctx {
    fn json(&self, mut body: Value) -> Result<String, CliError> {
        if let Value::Object(m) = &mut body {
            m.insert("config".into(), self.config.clone());
        }
        serde_json::to_string_pretty(&body).map(|s| s + "\n").map_err(|e| CliError::Numeric(e.to_string()))
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn to_value<T: Serialize>(v: &T) -> Result<Value, CliError> {
    serde_json::to_value(v).map_err(|e| CliError::Numeric(e.to_string()))
}

pub fn parse_list(s: &str, what: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| usage(format!("{what}: '{t}' is not a number"))))
        .collect()
}

fn parse_pairs(items: &[String], what: &str) -> Result<Vec<(String, f64)>, CliError> {
    items
        .iter()
        .map(|s| {
            let (k, v) = s.split_once('=').ok_or_else(|| usage(format!("{what}: expected NAME=VALUE, got '{s}'")))?;
            let v = v.trim().parse::<f64>().map_err(|_| usage(format!("{what}: '{v}' is not a number")))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

fn tolerances(args: &TolArgs) -> Result<ToleranceSet, CliError> {
    let mut v = to_value(&ToleranceSet::default())?;
    for (k, x) in parse_pairs(&args.tol, "--tol")? {
        match v.get_mut(&k) {
            Some(slot) if x > 0.0 && x.is_finite() => *slot = json!(x),
            Some(_) => return Err(usage(format!("--tol {k}: must be positive"))),
            None => return Err(usage(format!("--tol: unknown tolerance '{k}'"))),
        }
    }
    serde_json::from_value(v).map_err(|e| usage(e.to_string()))
}

/// The field and its parameter overrides. `also_declare` names a parameter an
/// `--expr` field should accept even if `--set` does not give it.
fn load_field(a: &FieldArgs, also_declare: Option<&str>) -> Result<(FieldDef, Params), CliError> {
    let sets = parse_pairs(&a.set, "--set")?;
    let params: Params = sets.iter().cloned().collect();
    let def = if let Some(name) = &a.field {
        catalog_get(name)?
    } else if let Some(text) = &a.expr {
        let mut declared: Params = params.clone();
        if a.time {
            declared.remove("t");
        }
        if let Some(p) = also_declare {
            declared.entry(p.to_string()).or_insert(0.0);
        }
        let pairs: Vec<(&str, f64)> = declared.iter().map(|(k, v)| (k.as_str(), *v)).collect();
        FieldDef::parse("expr", a.dim, a.time, text, &pairs, "command line")?
    } else if let Some(path) = &a.field_file {
        FieldDef::read_file(Path::new(path))?
    } else {
        return Err(usage("one of --field, --expr, --field-file is required"));
    };
    Ok((def, params))
}

fn region(a: &RegionArgs, dim: usize, default_resolution: usize) -> Result<Region, CliError> {
    let n = a.resolution.unwrap_or(default_resolution);
    let r = match &a.region {
        None => Region::cube(dim, -1.0, 1.0, n)?,
        Some(s) => {
            let v = parse_list(s, "--region")?;
            if v.len() == 2 {
                Region::cube(dim, v[0], v[1], n)?
            } else if v.len() == 2 * dim {
                Region::new(v.iter().step_by(2).copied().collect(), v.iter().skip(1).step_by(2).copied().collect(), vec![n; dim])?
            } else {
                return Err(usage(format!("--region: expected 2 or {} numbers, got {}", 2 * dim, v.len())));
            }
        }
    };
    Ok(r)
}

/// Grid nodes per axis when `--resolution` is absent.
fn default_resolution(dim: usize) -> usize {
    if dim == 2 {
        101
    } else {
        41
    }
}

fn field_summary(def: &FieldDef) -> Value {
    json!({
        "name": def.name,
        "dim": def.dim,
        "time_dependent": def.time_dependent,
        "expression": def.expr.to_string(),
        "params": def.params,
        "provenance": def.provenance,
        "helmholtz_k": def.helmholtz_k,
        "wave_c": def.wave_c,
    })
}

pub fn catalog_cmd(action: &CatalogAction, ctx: &Ctx) -> Result<Outcome, CliError> {
    match action {
        CatalogAction::List => {
            let all = catalog();
            if ctx.json {
                return Ok(Outcome::ok(ctx.json(json!({ "fields": all.iter().map(field_summary).collect::<Vec<_>>() }))?));
            }
            let mut s = String::new();
            for d in &all {
                s += &format!("{:<30} {}D{}  {:<16} {}\n", d.name, d.dim, if d.time_dependent { "+t" } else { "  " }, d.provenance, d.expr);
            }
            Ok(Outcome::ok(s))
        }
        CatalogAction::Show { name } => {
            let d = catalog_get(name)?;
            if ctx.json {
                return Ok(Outcome::ok(ctx.json(json!({ "field": field_summary(&d) }))?));
            }
            let params: Vec<String> = d.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
            let mut s = format!("name:        {}\nexpression:  {}\ndimension:   {}\ntime:        {}\nparameters:  {}\nprovenance:  {}\n", d.name, d.expr, d.dim, d.time_dependent, params.join(", "), d.provenance);
            if let Some(k) = d.helmholtz_k {
                s += &format!("helmholtz k: {k}\n");
            }
            if let Some(c) = d.wave_c {
                s += &format!("wave c:      {c}\n");
            }
            Ok(Outcome::ok(s))
        }
    }
}

/// Zero locations of a field: scanned zeros (planar) or curve vertices (spatial).
fn auto_points(def: &FieldDef, region: &Region, params: &Params) -> Result<Vec<Vec<f64>>, CliError> {
    if def.dim == 2 {
        Ok(scan_zeros_2d(def, region, params)?.points.into_iter().map(|p| p.location).collect())
    } else {
        let tr = trace_dislocation_3d(def, region, params)?;
        Ok(tr
            .curves
            .iter()
            .flat_map(|c| {
                let n = if c.closed { c.points.len().saturating_sub(1) } else { c.points.len() };
                c.points[..n].iter().map(|p| p.to_vec())
            })
            .collect())
    }
}

fn point_arg(s: &str, dim: usize) -> Result<Vec<f64>, CliError> {
    let p = parse_list(s, "--point")?;
    if p.len() != dim {
        return Err(usage(format!("--point: field is {dim}D, got {} coordinates", p.len())));
    }
    Ok(p)
}

pub fn classify_cmd(a: &ClassifyArgs, ctx: &Ctx) -> Result<Outcome, CliError> {
    let (def, params) = load_field(&a.field, None)?;
    let tol = tolerances(&a.tol)?;
    let mut reports: Vec<ClassificationReport> = Vec::new();
    if let Some(p) = &a.point {
        reports.push(classify_at(&def, &point_arg(p, def.dim)?, &params, &tol)?);
    } else {
        let r = region(&a.region, def.dim, default_resolution(def.dim))?;
        for p in auto_points(&def, &r, &params)? {
            match classify_at(&def, &p, &params, &tol) {
                Ok(rep) => reports.push(rep),
                Err(e) => warn!("zero at {p:?} not classified: {e}"),
            }
        }
    }
    let degenerate = reports.iter().any(|r| r.class.is_degenerate());
    let body = json!({ "field": field_summary(&def), "params": params, "tolerances": tol, "reports": reports });
    let status = if a.strict && degenerate { 3 } else { 0 };
    Ok(Outcome { text: ctx.json(body)?, status })
}

pub fn scan_cmd(a: &ScanArgs, ctx: &Ctx) -> Result<Outcome, CliError> {
    let (def, params) = load_field(&a.field, None)?;
    if def.dim != 2 {
        return Err(CliError::Precondition(format!("scan needs a planar field; '{}' is {}D (use trace)", def.name, def.dim)));
    }
    let r = region(&a.region, 2, default_resolution(2))?;
    let s = scan_zeros_2d(&def, &r, &params)?;
    let body = json!({ "field": field_summary(&def), "params": params, "region": r, "points": s.points, "tau_zero": s.tau_zero, "tau_merge": s.tau_merge, "dropped": s.dropped });
    Ok(Outcome::ok(ctx.json(body)?))
}

pub fn trace_cmd(a: &ScanArgs, ctx: &Ctx) -> Result<Outcome, CliError> {
    let (def, params) = load_field(&a.field, None)?;
    if def.dim != 3 {
        return Err(CliError::Precondition(format!("trace needs a spatial field; '{}' is {}D (use scan)", def.name, def.dim)));
    }
    let r = region(&a.region, 3, default_resolution(3))?;
    let t = trace_dislocation_3d(&def, &r, &params)?;
    let body = json!({ "field": field_summary(&def), "params": params, "region": r, "curves": t.curves, "tau_zero": t.tau_zero });
    Ok(Outcome::ok(ctx.json(body)?))
}

pub fn sweep_cmd(a: &SweepArgs, ctx: &Ctx) -> Result<Outcome, CliError> {
    let (def, params) = load_field(&a.field, Some(&a.param))?;
    let values = parse_list(&a.values, "--values")?;
    let r = region(&a.region, def.dim, default_resolution(def.dim))?;
    let s = sweep_parameter(&def, &r, &params, &a.param, &values)?;
    let body = json!({
        "field": field_summary(&def),
        "params": params,
        "region": r,
        "param": s.param,
        "values": s.values,
        "counts": s.counts,
        "events": s.events,
        "points": s.points,
        "curves": s.curves,
    });
    Ok(Outcome::ok(ctx.json(body)?))
}

pub fn verify_cmd(a: &VerifyArgs, ctx: &Ctx) -> Result<Outcome, CliError> {
    let (def, params) = load_field(&a.field, None)?;
    let r = region(&a.region, def.dim, 101)?;
    let report = match (a.helmholtz, a.wave) {
        (Some(k), _) => helmholtz_residual(&def, &r, k, &params)?,
        (None, Some(c)) => wave_residual(&def, &r, &parse_list(&a.times, "--times")?, c, &params)?,
        (None, None) => return Err(usage("one of --helmholtz, --wave is required")),
    };
    let pass = report.sup_abs < a.threshold;
    let body = json!({ "field": field_summary(&def), "params": params, "residual": report, "threshold": a.threshold, "pass": pass });
    let text = ctx.json(body)?;
    if !pass {
        eprintln!("error: residual {:e} is not below {:e}", report.sup_abs, a.threshold);
        return Ok(Outcome { text, status: 5 });
    }
    Ok(Outcome::ok(text))
}

pub fn strata_cmd(a: &StrataArgs, ctx: &Ctx) -> Result<Outcome, CliError> {
    let (def, params) = load_field(&a.field, None)?;
    if def.dim != 2 {
        return Err(CliError::Precondition(format!("strata are defined for planar fields; '{}' is {}D", def.name, def.dim)));
    }
    let tol = tolerances(&a.tol)?;
    let k = a.k.or(def.helmholtz_k).unwrap_or(1.0);
    let zeros: Vec<DislocationPoint> = match &a.point {
        Some(p) => vec![DislocationPoint::at(&def, &point_arg(p, 2)?, &params)?],
        None => scan_zeros_2d(&def, &region(&a.region, 2, 101)?, &params)?.points,
    };
    let mut points = Vec::new();
    for z in &zeros {
        match stratum_vs_classifier_crosscheck(z, k, &tol) {
            Ok(rep) => points.push(rep),
            Err(e) if a.point.is_some() => return Err(e.into()),
            Err(e) => warn!("zero at {:?} skipped: {e}", z.location),
        }
    }
    let body = json!({ "field": field_summary(&def), "params": params, "k": k, "tolerances": tol, "points": points });
    Ok(Outcome::ok(ctx.json(body)?))
}

pub fn montecarlo_cmd(a: &MonteCarloArgs, ctx: &Ctx) -> Result<Outcome, CliError> {
    let mut cfg = MonteCarloConfig::standard(a.dim, a.seed, a.n)?;
    cfg.n_terms = a.terms;
    cfg.k = a.k;
    cfg.tolerances = tolerances(&a.tol)?;
    if a.region.region.is_some() {
        let n = a.region.resolution.unwrap_or(cfg.region.resolution[0]);
        cfg.region = region(&RegionArgs { region: a.region.region.clone(), resolution: Some(n) }, a.dim, n)?;
    } else if let Some(n) = a.region.resolution {
        cfg.region = cfg.region.with_resolution(n);
    }
    let table = monte_carlo_genericity(&cfg)?;
    let s = &table.summary;
    eprintln!(
        "# samples {} zeros {} skipped {} elliptic {} pencil-definite {} classes {:?} strata {:?} consistency {:?}",
        s.samples, s.zeros, s.skipped, s.elliptic, s.pencil_definite, s.classes, s.strata, s.consistency
    );
    if ctx.json {
        let body = json!({ "montecarlo": table.config, "summary": table.summary, "rows": table.rows });
        return Ok(Outcome::ok(ctx.json(body)?));
    }
    Ok(Outcome::ok(table.to_csv()?))
}

pub fn render_cmd(a: &RenderArgs, ctx: &Ctx) -> Result<Outcome, CliError> {
    let (def, base) = load_field(&a.field, a.param.as_deref())?;
    let n = a.region.resolution.unwrap_or(if def.dim == 2 { 201 } else { 41 });
    let r = region(&a.region, def.dim, n)?;
    let grid: Vec<Params> = match (&a.param, &a.values) {
        (Some(p), Some(v)) => parse_list(v, "--values")?.into_iter().map(|x| Params::from([(p.clone(), x)])).collect(),
        (None, None) => vec![Params::new()],
        _ => return Err(usage("--param and --values go together")),
    };
    let formats = a
        .format
        .iter()
        .map(|f| match f {
            PanelFormat::Csv => OutputFormat::Csv,
            PanelFormat::Svg => OutputFormat::Svg,
        })
        .collect();
    if a.levels == 0 {
        return Err(usage("--levels must be positive"));
    }
    let spec = PanelSpec { field: def, grid, base, levels: equally_spaced_levels(a.levels), region: r, formats };
    let dir = ctx.out.clone().unwrap_or_else(|| "panels".into());
    let manifest = render_panels(&spec, Path::new(&dir))?;
    Ok(Outcome::ok(ctx.json(json!({ "out_dir": dir, "manifest": manifest }))?))
}
