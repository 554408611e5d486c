//! Dispatch from a validated config to the library and assembly of the report.

use std::path::{Path, PathBuf};
use std::time::Instant;

use cohatlas_core::atlas::{classify_atlas, coherence_report, duality_filter, Atlas, DualityCandidateSet};
use cohatlas_core::coherent::{resolve_unity, CoherentLabel, StateFamily};
use cohatlas_core::fock::ModeSpec;
use cohatlas_core::phase_space::{
    canonicity_check, dbar_classify, default_samples, DbarClassification, PolyMap, SymplecticForm,
};
use cohatlas_core::quadrature::QuadratureGrid;
use cohatlas_core::quantize::{
    coherence_map_test, commutator_diagnostic, normal_order_quantize, primed_vacuum_joint, realize_map,
    vacuum_residual_joint,
};
use cohatlas_core::{Error, C64};
use serde_json::{json, Map, Value};

use crate::config::{dim_cap, ConfigError, ExperimentConfig, Kind};
use crate::formats::{parse_atlas, parse_polymap};
use crate::report::{cell, complex, emit, num, Format, Report};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Validation(String),
    #[error("cannot write {path}: {source}")]
    Output { path: String, source: std::io::Error },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Validation(_) => EXIT_VALIDATION,
            RunError::Output { .. } => EXIT_NUMERICAL,
        }
    }
}

fn validation(msg: impl Into<String>) -> RunError {
    RunError::Validation(msg.into())
}

/// A finished run: the report and whether any item failed numerically.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Report,
    pub failures: usize,
    /// The config's `output`, resolved against the config directory.
    pub output: Option<PathBuf>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.failures == 0 {
            EXIT_OK
        } else {
            EXIT_NUMERICAL
        }
    }
}

/// Loads `config_path`, checks it describes `kind`, runs it and returns the
/// report. Validation problems come back as errors; numerical failures of
/// single items are recorded in the report.
pub fn run_config(kind: Kind, config_path: &Path) -> Result<Outcome, RunError> {
    let cfg = ExperimentConfig::load(config_path)?;
    if cfg.kind != kind {
        return Err(validation(format!("config describes {}, not {kind}", cfg.kind)));
    }
    let base = config_path.parent().map(Path::to_path_buf).unwrap_or_default();
    let start = Instant::now();
    let mut outcome = execute(&cfg, &base)?;
    outcome.report.duration_seconds = start.elapsed().as_secs_f64();
    outcome.output = cfg.output.as_ref().map(|o| base.join(o));
    Ok(outcome)
}

/// Runs and writes the report; returns the process exit status.
pub fn run_and_emit(kind: Kind, config_path: &Path, out: Option<&Path>, format: Format) -> i32 {
    let outcome = match run_config(kind, config_path) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let out_path: Option<PathBuf> = out.map(Path::to_path_buf).or_else(|| outcome.output.clone());
    if let Err(source) = emit(&outcome.report, format, out_path.as_deref()) {
        let path = out_path.map(|p| p.display().to_string()).unwrap_or_else(|| "stdout".into());
        let e = RunError::Output { path, source };
        eprintln!("error: {e}");
        return e.exit_code();
    }
    for item in outcome.report.body["items"].as_array().into_iter().flatten() {
        if let Some(err) = item.get("error").and_then(Value::as_str) {
            let name = item.get("name").and_then(Value::as_str).unwrap_or("?");
            eprintln!("warning: {name}: {err}");
        }
    }
    outcome.exit_code()
}

fn read(base: &Path, rel: &str) -> Result<String, RunError> {
    let p = base.join(rel);
    std::fs::read_to_string(&p).map_err(|e| validation(format!("cannot read {}: {e}", p.display())))
}

fn load_map(base: &Path, rel: &str) -> Result<PolyMap, RunError> {
    parse_polymap(&read(base, rel)?).map_err(|e| validation(format!("{rel}: {e}")))
}

fn load_atlas(base: &Path, rel: &str) -> Result<Atlas, RunError> {
    parse_atlas(&read(base, rel)?).map_err(|e| validation(format!("{rel}: {e}")))
}

fn mode_spec(cfg: &ExperimentConfig) -> Result<ModeSpec, RunError> {
    let m = cfg.modes.ok_or_else(|| validation(format!("kind {} requires `modes`", cfg.kind)))?;
    let cap = dim_cap()?;
    ModeSpec::with_cap(m.n_modes, m.cutoff, cap).map_err(|e| validation(e.to_string()))
}

fn probes(cfg: &ExperimentConfig, n_modes: usize) -> Result<Vec<CoherentLabel>, RunError> {
    cfg.probes
        .iter()
        .map(|p| {
            if p.len() != n_modes {
                return Err(validation(format!("probe has {} component(s) for {n_modes} mode(s)", p.len())));
            }
            CoherentLabel::new(p.iter().map(|[re, im]| C64::new(*re, *im)).collect())
                .map_err(|e| validation(format!("probe: {e}")))
        })
        .collect()
}

fn check_modes(name: &str, got: usize, spec: &ModeSpec) -> Result<(), RunError> {
    if got != spec.n_modes() {
        return Err(validation(format!("{name} acts on {got} mode(s), config has {}", spec.n_modes())));
    }
    Ok(())
}

fn is_numerical(e: &Error) -> bool {
    !matches!(e, Error::InvalidModeSpec(_) | Error::InvalidPolyMap(_) | Error::InvalidAtlas(_))
}

struct Items {
    items: Vec<Value>,
    rows: Vec<Vec<String>>,
    extra: Map<String, Value>,
    failures: usize,
}

impl Items {
    fn new() -> Self {
        Self { items: Vec::new(), rows: Vec::new(), extra: Map::new(), failures: 0 }
    }

    fn fail(&mut self, name: &str, e: &Error, blank_cols: usize) -> Result<(), RunError> {
        if !is_numerical(e) {
            return Err(validation(format!("{name}: {e}")));
        }
        self.failures += 1;
        self.items.push(json!({ "name": name, "error": e.to_string() }));
        let mut row = vec![name.to_string()];
        row.resize(blank_cols, String::new());
        self.rows.push(row);
        Ok(())
    }
}

fn execute(cfg: &ExperimentConfig, base: &Path) -> Result<Outcome, RunError> {
    let config_echo = serde_json::to_value(cfg).expect("config serializes");
    let items = match cfg.kind {
        Kind::ClassifyMap => classify_maps(cfg, base)?,
        Kind::VacuumTest => vacuum_tests(cfg, base)?,
        Kind::CoherenceTest => coherence_tests(cfg, base)?,
        Kind::ResolveUnity => unity_tests(cfg, base)?,
        Kind::AtlasCheck => atlas_checks(cfg, base)?,
        Kind::DualityFilter => duality(cfg, base)?,
    };
    let report = Report::new(cfg.kind, config_echo, items.items, items.extra, items.rows);
    Ok(Outcome { report, failures: items.failures, output: None })
}

fn witness_json(c: &DbarClassification) -> Value {
    match &c.witness {
        Some(w) => json!({
            "component": w.component,
            "monomial": w.monomial.to_string(),
            "coefficient": complex(w.coefficient),
        }),
        None => Value::Null,
    }
}

fn witness_cell(c: &DbarClassification) -> String {
    c.witness.as_ref().map(|w| w.monomial.to_string()).unwrap_or_default()
}

fn offsets(map: &PolyMap) -> Value {
    Value::Array(map.offset().into_iter().map(complex).collect())
}

fn classify_maps(cfg: &ExperimentConfig, base: &Path) -> Result<Items, RunError> {
    let mut out = Items::new();
    let maps: Vec<(String, PolyMap)> =
        cfg.maps.iter().map(|m| Ok((m.name.clone(), load_map(base, &m.path)?))).collect::<Result<_, RunError>>()?;
    for (name, map) in &maps {
        let cls = dbar_classify(map);
        let omega = SymplecticForm::canonical(map.n_modes());
        let can = match canonicity_check(map, &omega, &default_samples(map.n_modes()), cfg.tolerances.canonicity) {
            Ok(c) => c,
            Err(e) => {
                out.fail(name, &e, 7)?;
                continue;
            }
        };
        let anti = can.anti_canonical(cfg.tolerances.canonicity);
        out.items.push(json!({
            "name": name,
            "classification": cls.class.as_str(),
            "degenerate": cls.degenerate,
            "witness": witness_json(&cls),
            "degree": map.degree(),
            "origin_preserving": map.preserves_origin(),
            "offset": offsets(map),
            "canonical": can.canonical,
            "anti_canonical": anti,
            "canonicity_defect": num(can.max_defect),
        }));
        out.rows.push(vec![
            name.clone(),
            cls.class.as_str().into(),
            witness_cell(&cls),
            can.canonical.to_string(),
            anti.to_string(),
            cell(can.max_defect),
            map.preserves_origin().to_string(),
        ]);
    }
    Ok(out)
}

/// `shared`, `displaced` (vacuum mapped to a multiple of itself by an offset)
/// or `observer-dependent`.
fn vacuum_verdict(residual: f64, map: &PolyMap) -> &'static str {
    let offset = map.offset().iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if residual > offset + 1e-12 * (1.0 + offset) {
        "observer-dependent"
    } else if offset > 0.0 {
        "displaced"
    } else {
        "shared"
    }
}

fn vacuum_tests(cfg: &ExperimentConfig, base: &Path) -> Result<Items, RunError> {
    let spec = mode_spec(cfg)?;
    let mut out = Items::new();
    for m in &cfg.maps {
        let map = load_map(base, &m.path)?;
        check_modes(&m.name, map.n_modes(), &spec)?;
        let computed = (|| -> Result<_, Error> {
            let gs = realize_map(&normal_order_quantize(&map), spec)?;
            let residual = vacuum_residual_joint(&gs);
            let primed = primed_vacuum_joint(&gs)?;
            let commutator = commutator_diagnostic(&map, spec)?;
            Ok((residual, primed, commutator))
        })();
        let (residual, primed, commutator) = match computed {
            Ok(v) => v,
            Err(e) => {
                out.fail(&m.name, &e, 5)?;
                continue;
            }
        };
        let cls = dbar_classify(&map);
        let verdict = vacuum_verdict(residual, &map);
        out.items.push(json!({
            "name": m.name,
            "classification": cls.class.as_str(),
            "vacuum_residual": num(residual),
            "overlap": num(primed.vacuum_overlap()),
            "primed_defect": num(primed.defect),
            "primed_degenerate": primed.degenerate,
            "excluded_artifacts": primed.excluded_artifacts,
            "commutator_defect": num(commutator),
            "offset": offsets(&map),
            "verdict": verdict,
        }));
        out.rows.push(vec![
            m.name.clone(),
            cls.class.as_str().into(),
            cell(residual),
            cell(primed.vacuum_overlap()),
            verdict.into(),
        ]);
    }
    Ok(out)
}

fn label_json(label: &CoherentLabel) -> Value {
    Value::Array(label.components().iter().map(|&z| complex(z)).collect())
}

fn coherence_tests(cfg: &ExperimentConfig, base: &Path) -> Result<Items, RunError> {
    let spec = mode_spec(cfg)?;
    let labels = probes(cfg, spec.n_modes())?;
    let mut out = Items::new();
    for m in &cfg.maps {
        let map = load_map(base, &m.path)?;
        check_modes(&m.name, map.n_modes(), &spec)?;
        let reports: Result<Vec<_>, Error> = labels.iter().map(|l| coherence_map_test(&map, l, spec)).collect();
        let reports = match reports {
            Ok(r) => r,
            Err(e) => {
                out.fail(&m.name, &e, 6)?;
                continue;
            }
        };
        let mut probe_items = Vec::new();
        for (i, (label, rep)) in labels.iter().zip(&reports).enumerate() {
            probe_items.push(json!({
                "z": label_json(label),
                "classical_image": Value::Array(rep.classical_image.iter().map(|&z| complex(z)).collect()),
                "residual": num(rep.residual),
                "per_mode": rep.per_mode.iter().map(|&r| num(r)).collect::<Vec<_>>(),
                "bound": num(rep.bound),
                "within_bound": rep.within_bound(),
                "primed_defect": num(rep.primed_defect),
            }));
            out.rows.push(vec![
                m.name.clone(),
                i.to_string(),
                cell(rep.residual),
                cell(rep.bound),
                rep.within_bound().to_string(),
                cell(rep.primed_defect),
            ]);
        }
        out.items.push(json!({
            "name": m.name,
            "classification": dbar_classify(&map).class.as_str(),
            "probes": probe_items,
        }));
    }
    Ok(out)
}

fn unity_tests(cfg: &ExperimentConfig, base: &Path) -> Result<Items, RunError> {
    let spec = mode_spec(cfg)?;
    let g = cfg.grid.unwrap_or_default();
    let grid =
        QuadratureGrid::new(g.radial_order, g.angular_count, g.radius_cut).map_err(|e| validation(e.to_string()))?;
    let tol = cfg.tolerances.unity;
    let mut out = Items::new();
    for f in &cfg.families {
        let family = match &f.map {
            Some(path) => {
                let map = load_map(base, path)?;
                check_modes(&f.name, map.n_modes(), &spec)?;
                StateFamily::Transported(map)
            }
            None => StateFamily::Coherent,
        };
        let family_name = match family {
            StateFamily::Coherent => "coherent",
            StateFamily::Transported(_) => "transported",
        };
        match resolve_unity(spec, &grid, &family, Some(tol)) {
            Ok(rep) => {
                let converged = rep.max_residual <= tol;
                out.items.push(json!({
                    "name": f.name,
                    "family": family_name,
                    "nodes": rep.nodes,
                    "reliable_cutoff": spec.reliable().cutoff(),
                    "max_residual": num(rep.max_residual),
                    "vacuum_entry": num(rep.vacuum_entry),
                    "converged": converged,
                }));
                out.rows.push(vec![
                    f.name.clone(),
                    family_name.into(),
                    rep.nodes.to_string(),
                    cell(rep.max_residual),
                    cell(rep.vacuum_entry),
                    converged.to_string(),
                ]);
            }
            Err(Error::QuadratureNotConverged { defect, tolerance }) => {
                out.failures += 1;
                let e = Error::QuadratureNotConverged { defect, tolerance };
                out.items.push(json!({
                    "name": f.name,
                    "family": family_name,
                    "max_residual": num(defect),
                    "converged": false,
                    "error": e.to_string(),
                }));
                out.rows.push(vec![
                    f.name.clone(),
                    family_name.into(),
                    String::new(),
                    cell(defect),
                    String::new(),
                    "false".into(),
                ]);
            }
            Err(e) => out.fail(&f.name, &e, 6)?,
        }
    }
    Ok(out)
}

fn atlas_checks(cfg: &ExperimentConfig, base: &Path) -> Result<Items, RunError> {
    let spec = mode_spec(cfg)?;
    let labels = probes(cfg, spec.n_modes())?;
    let mut out = Items::new();
    for a in &cfg.atlases {
        let atlas = load_atlas(base, &a.path)?;
        check_modes(&a.name, atlas.n_modes(), &spec)?;
        let cls = classify_atlas(&atlas);
        let coh = match coherence_report(&atlas, spec, &labels) {
            Ok(c) => c,
            Err(e) => {
                out.fail(&a.name, &e, 9)?;
                continue;
            }
        };
        let structure = cls.verdict.as_str();
        let coherence = coh.verdict.as_str();
        let mut transitions = Vec::new();
        for (tc, tq) in cls.transitions.iter().zip(&coh.transitions) {
            let class = tc.classification.class.as_str();
            transitions.push(json!({
                "from": tq.from,
                "to": tq.to,
                "classification": class,
                "witness": witness_json(&tc.classification),
                "vacuum_residual": num(tq.vacuum_residual),
                "overlap": num(tq.vacuum_overlap),
                "primed_defect": num(tq.primed_defect),
                "primed_degenerate": tq.primed_degenerate,
                "offset": Value::Array(tq.offset.iter().map(|&z| complex(z)).collect()),
                "agrees": tq.agrees,
                "probes": tq.probes.iter().map(|p| json!({
                    "residual": num(p.residual),
                    "bound": num(p.bound),
                    "primed_defect": num(p.primed_defect),
                })).collect::<Vec<_>>(),
            }));
            out.rows.push(vec![
                a.name.clone(),
                structure.into(),
                coherence.into(),
                tq.from.clone(),
                tq.to.clone(),
                class.into(),
                cell(tq.vacuum_residual),
                cell(tq.vacuum_overlap),
                tq.agrees.to_string(),
            ]);
        }
        if cls.transitions.is_empty() {
            let mut row = vec![a.name.clone(), structure.into(), coherence.into()];
            row.resize(9, String::new());
            out.rows.push(row);
        }
        let pairs = |v: &[(String, String)]| v.iter().map(|(f, t)| json!([f, t])).collect::<Vec<_>>();
        out.items.push(json!({
            "name": a.name,
            "structure": structure,
            "structure_witnesses": pairs(&cls.witnesses),
            "coherence": coherence,
            "disagreeing": pairs(&coh.disagreeing),
            "transitions": transitions,
        }));
    }
    Ok(out)
}

fn duality(cfg: &ExperimentConfig, base: &Path) -> Result<Items, RunError> {
    let gens = cfg
        .maps
        .iter()
        .map(|m| Ok((m.name.clone(), load_map(base, &m.path)?)))
        .collect::<Result<Vec<_>, RunError>>()?;
    let n = gens[0].1.n_modes();
    let depth = cfg.composition_depth.unwrap_or(1);
    let set = DualityCandidateSet::new(gens, depth).map_err(|e| validation(e.to_string()))?;
    let mut out = Items::new();
    let rep = match duality_filter(&set, &SymplecticForm::canonical(n)) {
        Ok(r) => r,
        Err(e @ Error::InvalidCandidates(_)) => return Err(validation(e.to_string())),
        Err(e) => {
            out.fail("duality-filter", &e, 5)?;
            return Ok(out);
        }
    };
    for g in &rep.generators {
        out.items.push(json!({
            "name": g.name,
            "category": g.category.as_str(),
            "classification": g.class.as_str(),
            "canonicity_defect": num(g.canonicity_defect),
            "anti_canonical": g.anti_canonical,
        }));
        out.rows.push(vec![
            g.name.clone(),
            g.category.as_str().into(),
            g.class.as_str().into(),
            cell(g.canonicity_defect),
            g.anti_canonical.to_string(),
        ]);
    }
    out.extra.insert("closed".into(), Value::Bool(rep.closed));
    out.extra.insert(
        "products".into(),
        Value::Array(
            rep.products
                .iter()
                .map(|p| json!({ "word": p.word, "matches": p.matches, "inexact": p.inexact }))
                .collect(),
        ),
    );
    Ok(out)
}
