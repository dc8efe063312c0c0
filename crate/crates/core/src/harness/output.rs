use super::{HarnessError, Payload, RunRecord};

/// One CSV field.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Bool(bool),
    /// A missing estimate.
    Empty,
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::Num(x) => x.to_string(),
            Cell::Int(i) => i.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as u64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

macro_rules! row {
    ($($x:expr),* $(,)?) => { vec![$(Cell::from($x)),*] };
}

/// The main result table of a payload, as written to CSV.
pub fn payload_table(payload: &Payload) -> Table {
    let (headers, rows): (Vec<&'static str>, Vec<Vec<Cell>>) = match payload {
        Payload::Sample(s) => (
            vec!["n", "replicate", "count"],
            s.windows.iter().flat_map(|w| w.counts.iter().enumerate().map(move |(r, &k)| row![w.n, r, k])).collect(),
        ),
        Payload::Couple(c) => (
            vec!["n", "replicate", "horizon", "dominating", "sample_a", "sample_b", "disagreement"],
            c.runs
                .iter()
                .map(|r| row![r.n, r.replicate, r.horizon, r.dominating, r.sample_a, r.sample_b, r.disagreement])
                .collect(),
        ),
        Payload::Percolate { rows } => (
            vec!["lambda", "n", "estimate", "ci_lo", "ci_hi", "successes", "replicates"],
            rows.iter().map(|r| row![r.lambda, r.n, r.estimate, r.ci_lo, r.ci_hi, r.successes, r.replicates]).collect(),
        ),
        Payload::Decay { series, .. } => (
            vec!["distance", "estimate", "ci_lo", "ci_hi", "successes", "replicates"],
            series
                .points
                .iter()
                .map(|p| row![p.distance, p.estimate, p.ci_lo, p.ci_hi, p.successes, p.replicates])
                .collect(),
        ),
        Payload::Decorrelate(d) => (
            vec!["lo", "hi", "mass", "eroded_volume", "rho2", "se", "diff", "diff_se"],
            d.estimate
                .bins
                .iter()
                .map(|b| row![b.lo, b.hi, b.mass, b.eroded_volume, b.rho2, b.se, b.diff, b.diff_se])
                .collect(),
        ),
        Payload::UstatClt(r) => (
            vec!["n", "replicates", "mean_over_n", "mean_over_n_se", "var_over_n", "var_ci_lo", "var_ci_hi"],
            r.windows
                .iter()
                .map(|w| {
                    row![
                        w.n,
                        w.replicates,
                        w.mean_over_n,
                        w.mean_over_n_se,
                        w.var_over_n,
                        w.var_over_n_ci.0,
                        w.var_over_n_ci.1
                    ]
                })
                .collect(),
        ),
        Payload::MomentCheck(m) => (
            vec!["empirical", "se", "replicates", "bound", "holds"],
            vec![row![
                m.report.empirical.value,
                m.report.empirical.se,
                m.report.empirical.replicates,
                m.report.bound,
                m.report.holds
            ]],
        ),
        Payload::FmeCheck(f) => (
            vec![
                "trials",
                "max_vanishing_residual",
                "vanishing_failures",
                "max_locality_residual",
                "locality_failures",
                "nonzero_below_order",
                "passes",
            ],
            vec![row![
                f.trials,
                f.max_vanishing_residual,
                f.vanishing_failures,
                f.max_locality_residual,
                f.locality_failures,
                f.nonzero_below_order,
                f.passes
            ]],
        ),
        Payload::DominationCheck(d) => (
            vec!["k", "gibbs_cdf", "poisson_cdf"],
            d.gibbs_cdf.iter().zip(&d.poisson_cdf).enumerate().map(|(k, (g, p))| row![k, *g, *p]).collect(),
        ),
    };
    Table { headers, rows }
}

/// Pretty JSON of the full record.
pub fn record_json(record: &RunRecord) -> String {
    serde_json::to_string_pretty(record).expect("records serialize")
}

/// CSV of the payload table, preceded by `#` comment lines echoing the version, seed,
/// replicate count and model.
pub fn record_csv(record: &RunRecord) -> Result<String, HarnessError> {
    let table = payload_table(&record.payload);
    let model = serde_json::to_string(&record.config.model).map_err(|e| HarnessError::Encode(e.to_string()))?;
    let mut out = format!(
        "# dapsim {} experiment={} seed={} replicates={}\n# model: {model}\n",
        record.version,
        record.config.experiment.name(),
        record.config.seed,
        record.config.replicates
    );
    let mut w = csv::Writer::from_writer(Vec::new());
    let enc = |e: csv::Error| HarnessError::Encode(e.to_string());
    w.write_record(&table.headers).map_err(enc)?;
    for row in &table.rows {
        w.write_record(row.iter().map(Cell::text)).map_err(enc)?;
    }
    let bytes = w.into_inner().map_err(|e| HarnessError::Encode(e.to_string()))?;
    out.push_str(&String::from_utf8(bytes).expect("csv output is utf-8"));
    Ok(out)
}
