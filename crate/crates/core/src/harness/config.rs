use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::PathBuf;

use serde::Serialize;
use thiserror::Error;
use toml::de::DeTable;
use toml::{Table, Value};

use crate::model::{ModelSpec, OrientationLaw, PairStep, ParticleLaw, Potential};

use super::{ExperimentConfig, ExperimentKind, KernelChoice, OutputFormat, SamplerChoice, UStatConfig};

/// One problem found in a configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigIssue {
    /// 1-based line of the offending key, when it came from text.
    pub line: Option<usize>,
    /// Dotted `section.key` path.
    pub field: String,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(l) = self.line {
            write!(f, "line {l}: ")?;
        }
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Every problem found in a configuration, in source order where known.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{}", .0.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("\n"))]
pub struct ConfigErrors(pub Vec<ConfigIssue>);

pub(crate) fn issue(field: &str, message: impl Into<String>) -> ConfigIssue {
    ConfigIssue { line: None, field: field.into(), message: message.into() }
}

const MODEL_KEYS: &[&str] = &[
    "dim",
    "lambda",
    "radius",
    "law",
    "orientation",
    "angles",
    "weights",
    "potential",
    "a2",
    "steps_up_to",
    "steps_value",
    "range",
];
const USTAT_KEYS: &[&str] = &["kernel", "order", "value", "radius"];
const EXPERIMENT_KEYS: &[&str] = &[
    "kind",
    "windows",
    "replicates",
    "seed",
    "sampler",
    "distances",
    "lambdas",
    "edges",
    "region_centers",
    "region_side",
    "margin",
    "boundary_offset",
];
const OUTPUT_KEYS: &[&str] = &["path", "format"];
const SECTIONS: &[(&str, &[&str])] =
    &[("model", MODEL_KEYS), ("ustat", USTAT_KEYS), ("experiment", EXPERIMENT_KEYS), ("output", OUTPUT_KEYS)];

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn suggestion(word: &str, candidates: &[&str]) -> Option<String> {
    candidates
        .iter()
        .map(|c| (strsim::levenshtein(word, c), *c))
        .filter(|(d, c)| *d <= 2 || strsim::jaro_winkler(word, c) > 0.9)
        .min()
        .map(|(_, c)| c.to_string())
}

/// Typed access to the parsed tables, collecting every problem instead of stopping at the first.
struct Reader {
    table: Table,
    lines: BTreeMap<String, usize>,
    issues: Vec<ConfigIssue>,
}

impl Reader {
    fn line(&self, field: &str) -> Option<usize> {
        self.lines.get(field).copied().or_else(|| self.lines.get(field.split('.').next().unwrap_or("")).copied())
    }

    fn bad(&mut self, field: &str, message: impl Into<String>) {
        let line = self.line(field);
        self.issues.push(ConfigIssue { line, field: field.into(), message: message.into() });
    }

    fn has_section(&self, section: &str) -> bool {
        self.table.contains_key(section)
    }

    fn raw(&self, section: &str, key: &str) -> Option<Value> {
        self.table.get(section)?.as_table()?.get(key).cloned()
    }

    fn float(&mut self, section: &str, key: &str) -> Option<f64> {
        let field = format!("{section}.{key}");
        match self.raw(section, key)? {
            Value::Float(x) => Some(x),
            Value::Integer(i) => Some(i as f64),
            v => {
                self.bad(&field, format!("expected a number, found {}", v.type_str()));
                None
            }
        }
    }

    fn uint(&mut self, section: &str, key: &str) -> Option<u64> {
        let field = format!("{section}.{key}");
        match self.raw(section, key)? {
            Value::Integer(i) if i >= 0 => Some(i as u64),
            Value::Integer(i) => {
                self.bad(&field, format!("must be non-negative, got {i}"));
                None
            }
            v => {
                self.bad(&field, format!("expected an integer, found {}", v.type_str()));
                None
            }
        }
    }

    fn string(&mut self, section: &str, key: &str) -> Option<String> {
        let field = format!("{section}.{key}");
        match self.raw(section, key)? {
            Value::String(s) => Some(s),
            v => {
                self.bad(&field, format!("expected a string, found {}", v.type_str()));
                None
            }
        }
    }

    fn floats(&mut self, section: &str, key: &str) -> Option<Vec<f64>> {
        let field = format!("{section}.{key}");
        let v = self.raw(section, key)?;
        match to_floats(&v) {
            Some(xs) => Some(xs),
            None => {
                self.bad(&field, "expected an array of numbers");
                None
            }
        }
    }

    fn float_rows(&mut self, section: &str, key: &str) -> Option<Vec<Vec<f64>>> {
        let field = format!("{section}.{key}");
        let rows = match self.raw(section, key)? {
            Value::Array(items) => items.iter().map(to_floats).collect::<Option<Vec<_>>>(),
            _ => None,
        };
        if rows.is_none() {
            self.bad(&field, "expected an array of number arrays");
        }
        rows
    }

    fn choice(&mut self, section: &str, key: &str, allowed: &[&str]) -> Option<String> {
        let s = self.string(section, key)?;
        if allowed.contains(&s.as_str()) {
            return Some(s);
        }
        let hint = suggestion(&s, allowed).map(|c| format!("; did you mean \"{c}\"?")).unwrap_or_default();
        self.bad(
            &format!("{section}.{key}"),
            format!("unknown value \"{s}\", expected one of {}{hint}", allowed.join(", ")),
        );
        None
    }
}

fn to_floats(v: &Value) -> Option<Vec<f64>> {
    v.as_array()?
        .iter()
        .map(|x| match x {
            Value::Float(f) => Some(*f),
            Value::Integer(i) => Some(*i as f64),
            _ => None,
        })
        .collect()
}

/// Parses the sectioned key-value configuration format.
///
/// Unknown sections and keys are errors. All problems, including the checks of
/// [`ExperimentConfig::validate`], are returned together with their line numbers.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigErrors> {
    let spanned = DeTable::parse(text).map_err(|e| {
        ConfigErrors(vec![ConfigIssue {
            line: e.span().map(|s| line_of(text, s.start)),
            field: "syntax".into(),
            message: e.message().trim().to_string(),
        }])
    })?;
    let mut lines = BTreeMap::new();
    let mut issues = Vec::new();
    for (section, value) in spanned.get_ref() {
        let name = section.get_ref().to_string();
        let line = line_of(text, section.span().start);
        let Some(&(_, keys)) = SECTIONS.iter().find(|(s, _)| *s == name) else {
            let known: Vec<&str> = SECTIONS.iter().map(|(s, _)| *s).collect();
            let hint = suggestion(&name, &known).map(|c| format!("; did you mean [{c}]?")).unwrap_or_default();
            let message = if value.get_ref().is_table() {
                format!("unknown section{hint}")
            } else {
                format!("keys must be inside a section ({})", known.join(", "))
            };
            issues.push(ConfigIssue { line: Some(line), field: name, message });
            continue;
        };
        lines.insert(name.clone(), line);
        let Some(inner) = value.get_ref().as_table() else {
            issues.push(ConfigIssue { line: Some(line), field: name, message: "expected a section".into() });
            continue;
        };
        for (key, _) in inner {
            let k = key.get_ref().to_string();
            let line = line_of(text, key.span().start);
            let field = format!("{name}.{k}");
            if keys.contains(&k.as_str()) {
                lines.insert(field, line);
            } else {
                let hint = suggestion(&k, keys).map(|c| format!("; did you mean \"{c}\"?")).unwrap_or_default();
                issues.push(ConfigIssue { line: Some(line), field, message: format!("unknown key{hint}") });
            }
        }
    }
    let table: Table = text
        .parse()
        .map_err(|e: toml::de::Error| ConfigErrors(vec![issue("syntax", e.message().trim().to_string())]))?;
    let mut r = Reader { table, lines, issues };
    let config = read_config(&mut r);
    if let Some(c) = &config {
        for mut i in c.validate_issues() {
            i.line = r.line(&i.field);
            r.issues.push(i);
        }
    }
    let mut issues = r.issues;
    if issues.is_empty() {
        return Ok(config.expect("no issues means a config was built"));
    }
    issues.sort_by_key(|i| i.line.unwrap_or(usize::MAX));
    issues.dedup();
    Err(ConfigErrors(issues))
}

fn read_config(r: &mut Reader) -> Option<ExperimentConfig> {
    let model = read_model(r);
    let ustat = if r.has_section("ustat") { read_ustat(r) } else { Some(None) };
    let e = "experiment";
    if !r.has_section(e) {
        r.bad(e, "missing section");
    }
    let kind = match r.raw(e, "kind") {
        Some(_) => {
            let names: Vec<&str> = ExperimentKind::ALL.iter().map(|k| k.name()).collect();
            r.choice(e, "kind", &names).and_then(|s| ExperimentKind::from_name(&s))
        }
        None => {
            if r.has_section(e) {
                r.bad("experiment.kind", "required");
            }
            None
        }
    };
    let sampler = match r.raw(e, "sampler") {
        Some(_) => r.choice(e, "sampler", &["cftp", "rejection"]).map(|s| {
            if s == "cftp" {
                SamplerChoice::Cftp
            } else {
                SamplerChoice::Rejection
            }
        }),
        None => Some(SamplerChoice::Cftp),
    };
    let format = match r.raw("output", "format") {
        Some(_) => r.choice("output", "format", &["json", "csv"]).map(|s| {
            if s == "json" {
                OutputFormat::Json
            } else {
                OutputFormat::Csv
            }
        }),
        None => Some(OutputFormat::Json),
    };
    let d = ExperimentConfig::defaults();
    let windows = r.floats(e, "windows").unwrap_or_default();
    let replicates = r.uint(e, "replicates").unwrap_or(d.replicates);
    let seed = r.uint(e, "seed").unwrap_or(d.seed);
    if seed > i64::MAX as u64 {
        r.bad("experiment.seed", "must fit in a signed 64-bit integer");
    }
    let distances = r.floats(e, "distances").unwrap_or_default();
    let lambdas = r.floats(e, "lambdas").unwrap_or_default();
    let edges = r.floats(e, "edges").unwrap_or_default();
    let region_centers = r.float_rows(e, "region_centers").unwrap_or_default();
    let region_side = r.float(e, "region_side").unwrap_or(d.region_side);
    let margin = r.float(e, "margin").unwrap_or(d.margin);
    let boundary_offset = r.float(e, "boundary_offset").unwrap_or(d.boundary_offset);
    let output = r.string("output", "path").map(PathBuf::from);
    Some(ExperimentConfig {
        model: model?,
        ustat: ustat?,
        experiment: kind?,
        windows,
        replicates,
        seed,
        sampler: sampler?,
        distances,
        lambdas,
        edges,
        region_centers,
        region_side,
        margin,
        boundary_offset,
        output,
        format: format?,
    })
}

fn read_model(r: &mut Reader) -> Option<ModelSpec> {
    let m = "model";
    if !r.has_section(m) {
        r.bad(m, "missing section");
        return None;
    }
    let dim = r.uint(m, "dim").unwrap_or(2) as usize;
    let lambda = r.float(m, "lambda");
    if lambda.is_none() && r.raw(m, "lambda").is_none() {
        r.bad("model.lambda", "required");
    }
    let radius = r.float(m, "radius").unwrap_or(0.5);
    let law_name = match r.raw(m, "law") {
        Some(_) => r.choice(m, "law", &["ball", "segment"])?,
        None => "ball".into(),
    };
    let law = if law_name == "ball" {
        for k in ["orientation", "angles", "weights"] {
            if r.raw(m, k).is_some() {
                r.bad(&format!("model.{k}"), "only applies to segment laws");
            }
        }
        ParticleLaw::Ball
    } else {
        let orientation = match r.raw(m, "orientation") {
            Some(_) => r.choice(m, "orientation", &["uniform", "axis", "discrete"])?,
            None => "uniform".into(),
        };
        let law = match orientation.as_str() {
            "uniform" => OrientationLaw::Uniform,
            "axis" => match ParticleLaw::axis_segments() {
                ParticleLaw::Segment { orientation } => orientation,
                ParticleLaw::Ball => unreachable!(),
            },
            _ => {
                let angles = r.floats(m, "angles");
                let weights = r.floats(m, "weights");
                if angles.is_none() && r.raw(m, "angles").is_none() {
                    r.bad("model.angles", "required for a discrete orientation law");
                }
                let weights = match (&angles, weights) {
                    (Some(a), None) if r.raw(m, "weights").is_none() => Some(vec![1.0; a.len()]),
                    (_, w) => w,
                };
                OrientationLaw::Discrete { angles: angles?, weights: weights? }
            }
        };
        if orientation != "discrete" {
            for k in ["angles", "weights"] {
                if r.raw(m, k).is_some() {
                    r.bad(&format!("model.{k}"), "only applies to orientation = \"discrete\"");
                }
            }
        }
        ParticleLaw::Segment { orientation: law }
    };
    let pot_name = match r.raw(m, "potential") {
        Some(_) => r.choice(m, "potential", &["free", "hardcore", "facet", "pair_table"])?,
        None => "free".into(),
    };
    if pot_name != "facet" && r.raw(m, "a2").is_some() {
        r.bad("model.a2", "only applies to potential = \"facet\"");
    }
    if pot_name != "pair_table" {
        for k in ["steps_up_to", "steps_value"] {
            if r.raw(m, k).is_some() {
                r.bad(&format!("model.{k}"), "only applies to potential = \"pair_table\"");
            }
        }
    }
    let potential = match pot_name.as_str() {
        "free" => Potential::Free,
        "hardcore" => Potential::Hardcore,
        "facet" => {
            let a2 = r.float(m, "a2");
            if a2.is_none() && r.raw(m, "a2").is_none() {
                r.bad("model.a2", "required for the facet potential");
            }
            Potential::Facet { a2: a2? }
        }
        _ => {
            let up = r.floats(m, "steps_up_to");
            let val = r.floats(m, "steps_value");
            for (k, v) in [("steps_up_to", &up), ("steps_value", &val)] {
                if v.is_none() && r.raw(m, k).is_none() {
                    r.bad(&format!("model.{k}"), "required for the pair_table potential");
                }
            }
            let (up, val) = (up?, val?);
            if up.len() != val.len() {
                r.bad("model.steps_value", format!("has {} entries, steps_up_to has {}", val.len(), up.len()));
                return None;
            }
            Potential::PairTable {
                steps: up.into_iter().zip(val).map(|(up_to, value)| PairStep { up_to, value }).collect(),
            }
        }
    };
    let mut model = ModelSpec::new(dim, lambda?, radius, law, potential);
    if let Some(range) = r.float(m, "range") {
        model.range = range;
    }
    Some(model)
}

fn read_ustat(r: &mut Reader) -> Option<Option<UStatConfig>> {
    let u = "ustat";
    let kernel = match r.raw(u, "kernel") {
        Some(_) => r.choice(u, "kernel", &["facet", "zero", "constant"])?,
        None => {
            r.bad("ustat.kernel", "required");
            return None;
        }
    };
    let order = r.uint(u, "order").unwrap_or(2) as usize;
    if kernel != "constant" {
        for k in ["value", "radius"] {
            if r.raw(u, k).is_some() {
                r.bad(&format!("ustat.{k}"), "only applies to kernel = \"constant\"");
            }
        }
    }
    let kernel = match kernel.as_str() {
        "facet" => KernelChoice::Facet,
        "zero" => KernelChoice::Zero,
        _ => {
            let value = r.float(u, "value");
            let radius = r.float(u, "radius");
            for (k, v) in [("value", value), ("radius", radius)] {
                if v.is_none() && r.raw(u, k).is_none() {
                    r.bad(&format!("ustat.{k}"), "required for the constant kernel");
                }
            }
            KernelChoice::Constant { value: value?, radius: radius? }
        }
    };
    Some(Some(UStatConfig { kernel, order }))
}

fn floats_text(xs: &[f64]) -> String {
    format!("[{}]", xs.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", "))
}

fn quoted(s: &str) -> String {
    Value::String(s.to_string()).to_string()
}

/// Canonical text form; [`parse_config`] reads it back to an equal configuration.
///
/// Models with a custom potential have no text form and are written as
/// `potential = "custom"`, which the parser rejects.
pub fn config_to_text(c: &ExperimentConfig) -> String {
    let mut s = String::new();
    let m = &c.model;
    let _ = writeln!(s, "[model]\ndim = {}\nlambda = {:?}\nradius = {:?}", m.dim, m.lambda, m.radius);
    match &m.law {
        ParticleLaw::Ball => s.push_str("law = \"ball\"\n"),
        ParticleLaw::Segment { orientation: OrientationLaw::Uniform } => {
            s.push_str("law = \"segment\"\norientation = \"uniform\"\n")
        }
        ParticleLaw::Segment { orientation: OrientationLaw::Discrete { angles, weights } } => {
            let _ = writeln!(
                s,
                "law = \"segment\"\norientation = \"discrete\"\nangles = {}\nweights = {}",
                floats_text(angles),
                floats_text(weights)
            );
        }
    }
    let _ = writeln!(s, "potential = {}", quoted(m.potential.name()));
    match &m.potential {
        Potential::Facet { a2 } => {
            let _ = writeln!(s, "a2 = {a2:?}");
        }
        Potential::PairTable { steps } => {
            let up: Vec<f64> = steps.iter().map(|p| p.up_to).collect();
            let val: Vec<f64> = steps.iter().map(|p| p.value).collect();
            let _ = writeln!(s, "steps_up_to = {}\nsteps_value = {}", floats_text(&up), floats_text(&val));
        }
        _ => {}
    }
    let _ = writeln!(s, "range = {:?}", m.range);
    if let Some(u) = &c.ustat {
        s.push_str("\n[ustat]\n");
        match u.kernel {
            KernelChoice::Facet => s.push_str("kernel = \"facet\"\n"),
            KernelChoice::Zero => s.push_str("kernel = \"zero\"\n"),
            KernelChoice::Constant { value, radius } => {
                let _ = writeln!(s, "kernel = \"constant\"\nvalue = {value:?}\nradius = {radius:?}");
            }
        }
        let _ = writeln!(s, "order = {}", u.order);
    }
    let _ = writeln!(
        s,
        "\n[experiment]\nkind = {}\nwindows = {}\nreplicates = {}\nseed = {}\nsampler = {}",
        quoted(c.experiment.name()),
        floats_text(&c.windows),
        c.replicates,
        c.seed,
        quoted(c.sampler.name()),
    );
    let rows: Vec<String> = c.region_centers.iter().map(|r| floats_text(r)).collect();
    let _ = writeln!(
        s,
        "distances = {}\nlambdas = {}\nedges = {}\nregion_centers = [{}]\nregion_side = {:?}\nmargin = {:?}\nboundary_offset = {:?}",
        floats_text(&c.distances),
        floats_text(&c.lambdas),
        floats_text(&c.edges),
        rows.join(", "),
        c.region_side,
        c.margin,
        c.boundary_offset,
    );
    s.push_str("\n[output]\n");
    if let Some(p) = &c.output {
        let _ = writeln!(s, "path = {}", quoted(&p.to_string_lossy()));
    }
    let _ = writeln!(s, "format = {}", quoted(c.format.name()));
    s
}
