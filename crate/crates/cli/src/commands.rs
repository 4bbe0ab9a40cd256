//! Command pipelines. Each returns the `result` block of the report, CSV curves and,
//! when it has one, an assertion verdict.

use crate::config::{RunConfig, UsageError};
use crate::Command;
use hardy_amalgam::crsys::{harmonic_cr_residual, HalfDerivativeMode};
use hardy_amalgam::extension::{ExtensionStack, TimeGrid};
use hardy_amalgam::grid::io;
use hardy_amalgam::hardy::{
    atom_band, build_family, check_atom, default_multipliers, equivalence_reports,
    freeze_constants, grid_key, maximal_many, multiplier_many, nontangential_many, riesz_many,
    Comparison, FamilySpec, FreezeGrids, FrozenKey, FrozenStore, Method,
};
use hardy_amalgam::spectral::{apply_multiplier, riesz_compose, SphereSymbol};
use hardy_amalgam::{
    amalgam_norm, caloric_cr_residual, caloric_lift, extend, harmonic_lift, lp_norm, make_atom,
    sample, AtomSpec, Error, Exponents, GridFunction, GridSpec, KernelTag, Window,
};
use num_complex::Complex64;
use serde_json::{json, Value};
use std::path::Path;

/// A named CSV table written next to the report.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub name: String,
    pub csv: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assertion {
    pub passed: bool,
    pub failures: Vec<String>,
}

impl Assertion {
    fn from_failures(failures: Vec<String>) -> Self {
        Self {
            passed: failures.is_empty(),
            failures,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub result: Value,
    pub curves: Vec<Curve>,
    pub assertion: Assertion,
    pub grid_id: String,
    pub time_grid_id: Option<String>,
}

#[derive(Debug)]
pub enum Failure {
    Usage(UsageError),
    Numerical { kind: &'static str, message: String },
}

impl From<UsageError> for Failure {
    fn from(e: UsageError) -> Self {
        Failure::Usage(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parameter { name, reason } => Failure::Usage(UsageError::new(name, reason)),
            Error::Grid(m) => Failure::Usage(UsageError::new("grid", m)),
            Error::Unsupported(m) => Failure::Usage(UsageError::new("options", m)),
            Error::Mismatch(m) => Failure::Numerical { kind: "mismatch", message: m },
            Error::Numerical(m) => Failure::Numerical { kind: "numerical", message: m },
            Error::Format(m) => Failure::Numerical { kind: "format", message: m },
            Error::Frozen(m) => Failure::Numerical { kind: "frozen", message: m },
            Error::Io(e) => Failure::Numerical { kind: "io", message: e.to_string() },
            Error::Json(e) => Failure::Numerical { kind: "json", message: e.to_string() },
        }
    }
}

type Run = Result<Outcome, Failure>;

pub fn parse_family(s: &str) -> Result<FamilySpec, UsageError> {
    match s {
        "reference" => Ok(FamilySpec::Reference),
        "atoms" => Ok(FamilySpec::Atoms),
        other => Err(UsageError::new(
            "family",
            format!("expected `reference` or `atoms`, got `{other}` (explicit families go in the config file)"),
        )),
    }
}

pub fn execute(cfg: &RunConfig, cmd: &Command) -> Run {
    let spec = cfg.grid()?;
    match cmd {
        Command::Norm { .. } => norm(cfg, spec),
        Command::Transform { .. } => transform(cfg, spec),
        Command::Extend { .. } => extend_cmd(cfg, spec),
        Command::CrCheck { .. } => cr_check(cfg, spec),
        Command::Hardy { .. } => hardy(cfg, spec),
        Command::Atoms { .. } => atoms(cfg, spec),
        Command::Report { .. } => report(cfg, spec),
        Command::Freeze => freeze(cfg, spec),
    }
}

fn outcome(spec: GridSpec, tg: Option<&TimeGrid>, result: Value, curves: Vec<Curve>, failures: Vec<String>) -> Outcome {
    Outcome {
        result,
        curves,
        assertion: Assertion::from_failures(failures),
        grid_id: spec.grid_id(),
        time_grid_id: tg.map(TimeGrid::id),
    }
}

fn finite_check(label: &str, v: f64, failures: &mut Vec<String>) {
    if !v.is_finite() {
        failures.push(format!("{label} is not finite ({v})"));
    }
}

fn function(cfg: &RunConfig, spec: GridSpec) -> Result<GridFunction, Failure> {
    Ok(sample(&cfg.function, spec)?)
}

fn dump_function(path: &Path, f: &GridFunction) -> Result<(), Failure> {
    if path.extension().is_some_and(|e| e == "csv") {
        std::fs::write(path, io::to_csv(f)).map_err(Error::from)?;
    } else {
        io::write_binary(path, f)?;
    }
    Ok(())
}

fn norm(cfg: &RunConfig, spec: GridSpec) -> Run {
    let f = function(cfg, spec)?;
    let window = cfg.options.window.as_deref().unwrap_or("both");
    let (discrete, ball) = match window {
        "discrete" => (true, false),
        "ball" => (false, true),
        "both" => (true, true),
        other => {
            return Err(UsageError::new("window", format!("expected discrete, ball or both, got `{other}`")).into())
        }
    };
    let tol = cfg.options.tol.unwrap_or(1e-9);
    let mut failures = Vec::new();
    let mut rows = Vec::new();
    for e in cfg.exponent_pairs()? {
        let mut row = serde_json::Map::new();
        row.insert("p".into(), json!(e.p()));
        row.insert("q".into(), json!(e.q()));
        row.insert("lp".into(), json!(lp_norm(&f, e.p())?));
        let mut primary = None;
        if discrete {
            let v = amalgam_norm(&f, e, Window::Discrete)?;
            row.insert("discrete".into(), json!(v));
            primary = Some(v);
        }
        if ball {
            let v = amalgam_norm(&f, e, Window::Ball)?;
            row.insert("ball".into(), json!(v));
            primary = primary.or(Some(v));
        }
        let v = primary.unwrap_or(f64::NAN);
        finite_check(&format!("norm at ({}, {})", e.p(), e.q()), v, &mut failures);
        if let Some(x) = cfg.options.expect {
            if !((v - x).abs() <= tol) {
                failures.push(format!("norm at ({}, {}) = {v} differs from {x} by more than {tol:e}", e.p(), e.q()));
            }
        }
        rows.push(Value::Object(row));
    }
    Ok(outcome(spec, None, json!({ "window": window, "norms": rows }), vec![], failures))
}

fn parse_symbol(name: &str, dim: usize) -> Result<SphereSymbol, Failure> {
    let one = Complex64::new(1.0, 0.0);
    Ok(match name {
        "identity" => SphereSymbol::constant(dim, one),
        "sign" if dim == 1 => SphereSymbol::sign(),
        "riesz1" => SphereSymbol::riesz(dim, 1),
        "riesz2" if dim == 2 => SphereSymbol::riesz(dim, 2),
        path => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                UsageError::new("symbol", format!("`{path}` is neither a known symbol nor a readable file: {e}"))
            })?;
            symbol_from_json(&text, dim)?
        }
    })
}

/// `{"plus": [re, im], "minus": [re, im]}` in d=1, `{"samples": [[re, im], ...]}` in d=2.
pub fn symbol_from_json(text: &str, dim: usize) -> Result<SphereSymbol, Failure> {
    #[derive(serde::Deserialize)]
    #[serde(deny_unknown_fields)]
    struct File {
        plus: Option<[f64; 2]>,
        minus: Option<[f64; 2]>,
        samples: Option<Vec<[f64; 2]>>,
        dc: Option<[f64; 2]>,
    }
    let bad = |m: String| Failure::Usage(UsageError::new("symbol", m));
    let f: File = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
    let c = |v: [f64; 2]| Complex64::new(v[0], v[1]);
    let sym = match (dim, f.plus, f.minus, f.samples) {
        (1, Some(p), Some(m), None) => SphereSymbol::line(c(p), c(m)),
        (2, None, None, Some(s)) => SphereSymbol::sampled(s.into_iter().map(c).collect())?,
        _ => return Err(bad(format!("d={dim} needs {}", if dim == 1 { "`plus` and `minus`" } else { "`samples`" }))),
    };
    Ok(match f.dc {
        Some(v) => sym.with_dc(c(v)),
        None => sym,
    })
}

fn transform(cfg: &RunConfig, spec: GridSpec) -> Run {
    let f = function(cfg, spec)?;
    let op = cfg.options.op.as_deref().unwrap_or("riesz");
    let (g, label) = match op {
        "riesz" => {
            let idx = cfg.options.indices.clone().unwrap_or_else(|| vec![1]);
            let g = riesz_compose(&f, &idx)?;
            (g, json!({ "op": "riesz", "indices": idx }))
        }
        "multiplier" => {
            let name = cfg.options.symbol.as_deref().unwrap_or(if spec.dim() == 1 { "sign" } else { "riesz1" });
            let g = apply_multiplier(&f, &parse_symbol(name, spec.dim())?)?;
            (g, json!({ "op": "multiplier", "symbol": name }))
        }
        other => return Err(UsageError::new("op", format!("expected riesz or multiplier, got `{other}`")).into()),
    };
    let mut failures = Vec::new();
    let mut norms = Vec::new();
    for e in cfg.exponent_pairs()? {
        let v = amalgam_norm(&g, e, Window::Discrete)?;
        finite_check("output norm", v, &mut failures);
        norms.push(json!({ "p": e.p(), "q": e.q(), "discrete": v }));
    }
    if let Some(path) = &cfg.options.dump {
        dump_function(path, &g)?;
    }
    let curves = if spec.dim() == 1 {
        vec![Curve { name: "output".into(), csv: io::to_csv(&g) }]
    } else {
        vec![]
    };
    let result = json!({
        "transform": label,
        "input_l2": f.l2_norm(),
        "output_l2": g.l2_norm(),
        "output_max_imag": g.max_imag(),
        "output_norms": norms,
    });
    Ok(outcome(spec, None, result, curves, failures))
}

fn kernel_tag(name: &str) -> Result<KernelTag, Failure> {
    match name {
        "poisson" => Ok(KernelTag::Poisson),
        "heat" => Ok(KernelTag::Heat),
        other => Err(UsageError::new("kernel", format!("expected poisson or heat, got `{other}`")).into()),
    }
}

fn stack_curve(stack: &ExtensionStack, es: &[Exponents]) -> (Curve, Vec<Value>) {
    let mut csv = String::from("t,sup");
    for e in es {
        csv.push_str(&format!(",norm_{}_{}", e.p(), e.q()));
    }
    csv.push('\n');
    let mut rows = Vec::new();
    for (s, &t) in stack.slices().iter().zip(stack.times().values()) {
        let norms: Vec<f64> = es
            .iter()
            .map(|&e| amalgam_norm(s, e, Window::Discrete).unwrap_or(f64::NAN))
            .collect();
        csv.push_str(&format!("{t:e},{:e}", s.max_abs()));
        for v in &norms {
            csv.push_str(&format!(",{v:e}"));
        }
        csv.push('\n');
        rows.push(json!({ "t": t, "sup": s.max_abs(), "norms": norms }));
    }
    (Curve { name: "slices".into(), csv }, rows)
}

fn extend_cmd(cfg: &RunConfig, spec: GridSpec) -> Run {
    let f = function(cfg, spec)?;
    let tg = cfg.time_grid()?;
    let name = cfg.options.kernel.as_deref().unwrap_or("poisson");
    let stack = extend(&f, kernel_tag(name)?, &tg)?;
    let es = cfg.exponent_pairs()?;
    let (curve, rows) = stack_curve(&stack, &es);
    let tent: Vec<Value> = es
        .iter()
        .map(|&e| json!({ "p": e.p(), "q": e.q(), "sup_t_norm": stack.tent_norm(e) }))
        .collect();
    let mut failures = Vec::new();
    for r in &rows {
        finite_check("slice sup", r["sup"].as_f64().unwrap_or(f64::NAN), &mut failures);
    }
    if let Some(path) = &cfg.options.dump {
        std::fs::write(path, stack.encode()).map_err(Error::from)?;
    }
    let result = json!({ "kernel": name, "slices": rows, "sup_t_norms": tent });
    Ok(outcome(spec, Some(&tg), result, vec![curve], failures))
}

fn residual_curve(times: &[f64], cols: &[(&str, &[f64])]) -> Curve {
    let mut csv = String::from("t");
    for (name, _) in cols {
        csv.push(',');
        csv.push_str(name);
    }
    csv.push('\n');
    for (k, t) in times.iter().enumerate() {
        csv.push_str(&format!("{t:e}"));
        for (_, v) in cols {
            csv.push_str(&format!(",{:e}", v[k]));
        }
        csv.push('\n');
    }
    Curve { name: "residuals".into(), csv }
}

fn cr_check(cfg: &RunConfig, spec: GridSpec) -> Run {
    let f = function(cfg, spec)?;
    let tg = cfg.time_grid()?;
    let lift = cfg.options.lift.as_deref().unwrap_or("harmonic");
    let mode = match cfg.options.mode.as_deref().unwrap_or("spectral") {
        "spectral" => HalfDerivativeMode::Spectral,
        "quadrature" => HalfDerivativeMode::Quadrature,
        other => return Err(UsageError::new("mode", format!("expected spectral or quadrature, got `{other}`")).into()),
    };
    let tol = cfg.options.tol.unwrap_or(match mode {
        HalfDerivativeMode::Spectral => 1e-6,
        HalfDerivativeMode::Quadrature => 1e-2,
    });
    let mut failures = Vec::new();
    let mut check = |name: &str, v: f64| {
        if !(v <= tol) {
            failures.push(format!("{name} residual {v:e} exceeds {tol:e}"));
        }
    };
    let (result, curve) = match lift {
        "harmonic" => {
            if mode == HalfDerivativeMode::Quadrature {
                return Err(UsageError::new("mode", "the harmonic system has no half-derivative; use spectral").into());
            }
            let r = harmonic_cr_residual(&harmonic_lift(&f, &tg)?)?;
            check("symmetry", r.sym_res);
            check("divergence", r.div_res);
            let curve = residual_curve(tg.values(), &[("symmetry", &r.sym_per_slice), ("divergence", &r.div_per_slice)]);
            (serde_json::to_value(&r).map_err(Error::from)?, curve)
        }
        "caloric" => {
            let r = caloric_cr_residual(&caloric_lift(&f, &tg)?, mode)?;
            check("divergence", r.a_res);
            check("symmetry", r.b_res);
            check("gradient", r.c_res);
            let curve = residual_curve(
                tg.values(),
                &[("divergence", &r.a_per_slice), ("symmetry", &r.b_per_slice), ("gradient", &r.c_per_slice)],
            );
            (serde_json::to_value(&r).map_err(Error::from)?, curve)
        }
        other => return Err(UsageError::new("lift", format!("expected harmonic or caloric, got `{other}`")).into()),
    };
    let result = json!({ "lift": lift, "tolerance": tol, "residual": result });
    Ok(outcome(spec, Some(&tg), result, vec![curve], failures))
}

fn hardy(cfg: &RunConfig, spec: GridSpec) -> Run {
    let f = function(cfg, spec)?;
    let tg = cfg.time_grid()?;
    let es = cfg.exponent_pairs()?;
    let order = cfg.options.order.unwrap_or(1);
    let aperture = cfg.options.aperture.unwrap_or(1.0);
    let maximal = maximal_many(&f, &es, &tg)?;
    let riesz = riesz_many(&f, &es, &tg, order)?;
    let multiplier = multiplier_many(&f, &default_multipliers(spec.dim()), &es)?;
    let nontangential = nontangential_many(&f, &es, &tg, aperture)?;
    let mut failures = Vec::new();
    let mut rows = Vec::new();
    for (i, e) in es.iter().enumerate() {
        for (name, v) in [
            ("maximal", maximal[i]),
            ("riesz", riesz[i].value),
            ("multiplier", multiplier[i].value),
            ("nontangential", nontangential[i]),
        ] {
            if !(v.is_finite() && v > 0.0) {
                failures.push(format!("{name} quantity at ({}, {}) is {v}", e.p(), e.q()));
            }
        }
        rows.push(json!({
            "p": e.p(),
            "q": e.q(),
            "maximal": maximal[i],
            "riesz": riesz[i],
            "multiplier": multiplier[i],
            "nontangential": nontangential[i],
        }));
    }
    let result = json!({ "riesz_order": order, "aperture": aperture, "quantities": rows });
    Ok(outcome(spec, Some(&tg), result, vec![], failures))
}

fn load_store(cfg: &RunConfig) -> Result<Option<FrozenStore>, Failure> {
    if cfg.frozen.exists() {
        Ok(Some(FrozenStore::load(&cfg.frozen)?))
    } else {
        Ok(None)
    }
}

fn comparison_failures(cs: &[Comparison]) -> Vec<String> {
    cs.iter()
        .filter_map(|c| match (c.pass, &c.note) {
            (Some(true), _) => None,
            (Some(false), _) => Some(format!("{}: observed {} above limit {:?}", c.key, c.observed, c.limit)),
            (None, note) => Some(format!("{}: {}", c.key, note.as_deref().unwrap_or("no frozen constant"))),
        })
        .collect()
}

fn atoms(cfg: &RunConfig, spec: GridSpec) -> Run {
    let tg = cfg.time_grid()?;
    let es = cfg.exponent_pairs()?;
    let e = es[0];
    match cfg.options.side {
        Some(side) => {
            let a = AtomSpec {
                corner: cfg.options.corner.clone().unwrap_or_else(|| vec![0.0; spec.dim()]),
                side,
                order: cfg.options.order.unwrap_or(0),
                exponents: e,
            };
            let f = make_atom(&a, spec)?;
            let check = check_atom(&f, &a, 1e-10)?;
            let norms = maximal_many(&f, &es, &tg)?;
            if let Some(path) = &cfg.options.dump {
                dump_function(path, &f)?;
            }
            let mut failures = Vec::new();
            if !check.ok {
                failures.push(format!("atom conditions fail: {check:?}"));
            }
            let rows: Vec<Value> = es
                .iter()
                .zip(&norms)
                .map(|(e, v)| json!({ "p": e.p(), "q": e.q(), "maximal": v }))
                .collect();
            let result = json!({ "atom": a, "check": check, "maximal_norms": rows });
            Ok(outcome(spec, Some(&tg), result, vec![], failures))
        }
        None => {
            let (values, band) = atom_band(spec, e, &tg)?;
            let store = load_store(cfg)?;
            let key = FrozenKey::new("atoms", "maximal_band", e, &grid_key(&spec, &tg));
            let cmp = Comparison::against(store.as_ref(), &key, band);
            let mut csv = String::from("atom,maximal\n");
            for (name, v) in &values {
                csv.push_str(&format!("{name},{v:e}\n"));
            }
            let failures = comparison_failures(std::slice::from_ref(&cmp));
            let members: Vec<Value> = values.iter().map(|(n, v)| json!({ "name": n, "maximal": v })).collect();
            let result = json!({ "members": members, "band": band, "comparison": cmp });
            Ok(outcome(spec, Some(&tg), result, vec![Curve { name: "band".into(), csv }], failures))
        }
    }
}

fn report(cfg: &RunConfig, spec: GridSpec) -> Run {
    let tg = cfg.time_grid()?;
    let es = cfg.exponent_pairs()?;
    let fs = cfg.family.clone().unwrap_or(FamilySpec::Reference);
    let family = build_family(&fs, spec, es[0])?;
    let methods: Vec<Method> = match &cfg.options.methods {
        Some(names) => names.iter().map(|m| m.parse()).collect::<hardy_amalgam::Result<_>>()?,
        None => Method::ALL.to_vec(),
    };
    let store = load_store(cfg)?;
    let reports = equivalence_reports(&family, &es, &methods, &tg, store.as_ref())?;
    let mut failures = Vec::new();
    let mut curves = Vec::new();
    for r in &reports {
        failures.extend(comparison_failures(&r.comparisons));
        failures.extend(r.flagged.iter().map(|f| format!("{} ({}): {f}", r.family, r.exponents)));
        let tag = r.exponents.replace(',', "_");
        let mut values = String::from("member");
        for m in &r.methods {
            values.push(',');
            values.push_str(m);
        }
        values.push('\n');
        for m in &r.members {
            values.push_str(&m.name);
            for k in &r.methods {
                values.push_str(&format!(",{:e}", m.values[k]));
            }
            values.push('\n');
        }
        curves.push(Curve { name: format!("values_{tag}"), csv: values });
        let mut pairs = String::from("pair,count,min,max,spread\n");
        let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        for p in &r.pairs {
            pairs.push_str(&format!("{},{},{},{},{}\n", p.pair, p.count, opt(p.min), opt(p.max), opt(p.spread)));
        }
        curves.push(Curve { name: format!("pairs_{tag}"), csv: pairs });
    }
    let result = json!({
        "frozen_store": if store.is_some() { json!(cfg.frozen) } else { Value::Null },
        "reports": reports,
    });
    Ok(outcome(spec, Some(&tg), result, curves, failures))
}

fn freeze(cfg: &RunConfig, spec: GridSpec) -> Run {
    let tg = cfg.time_grid()?;
    let fresh = freeze_constants(&FreezeGrids { spec, times: tg.clone() })?;
    let entries: Vec<Value> = fresh
        .entries()
        .map(|(k, v)| json!({ "family": k.family, "pair": k.pair, "p": k.p, "q": k.q, "grid": k.grid_id, "value": v }))
        .collect();
    let mut store = load_store(cfg)?.unwrap_or_default();
    store.merge(fresh);
    store.save(&cfg.frozen)?;
    let result = json!({ "path": cfg.frozen, "written": entries, "store_size": store.len() });
    Ok(outcome(spec, Some(&tg), result, vec![], vec![]))
}
