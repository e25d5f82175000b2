use std::io::{Read, Write};

use crate::grid::Grid;
use crate::objective::ObjectiveKind;
use crate::representation::RepresentationKind;

use super::config::{Algorithm, RunConfig};
use super::Outcome;

pub const RESULTS_HEADER: [&str; 17] = [
    "run_id",
    "algorithm",
    "representation",
    "objective",
    "init_pct",
    "seed",
    "solved",
    "wall_ms",
    "evaluations",
    "iterations",
    "max_depth",
    "solution_depth",
    "final_score",
    "empty_count",
    "path_length",
    "region_count",
    "map",
];

/// One row of the results file.
///
/// Failed runs keep their identifying columns and leave the outcome columns
/// empty; `error` carries the message in memory but is not persisted.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub run_id: u64,
    pub algorithm: Algorithm,
    pub representation: Option<RepresentationKind>,
    pub objective: ObjectiveKind,
    pub init_pct: f64,
    pub seed: u64,
    pub solved: bool,
    pub wall_ms: f64,
    pub evaluations: u64,
    pub iterations: u64,
    pub max_depth: Option<usize>,
    pub solution_depth: Option<usize>,
    pub final_score: Option<f64>,
    pub empty_count: Option<usize>,
    pub path_length: Option<usize>,
    pub region_count: Option<usize>,
    pub map: Option<Grid>,
    pub error: Option<String>,
}

impl RunRecord {
    pub(super) fn from_outcome(cfg: &RunConfig, out: Outcome, wall_ms: f64) -> Self {
        let m = out.map.metrics();
        Self {
            run_id: cfg.run_id,
            algorithm: cfg.algorithm,
            representation: cfg.representation,
            objective: cfg.objective.kind(),
            init_pct: cfg.init_empty_pct,
            seed: cfg.seed,
            solved: out.solved,
            wall_ms,
            evaluations: out.evaluations,
            iterations: out.iterations,
            max_depth: out.max_depth,
            solution_depth: out.solution_depth,
            final_score: Some(out.best_score),
            empty_count: Some(m.empty_count),
            path_length: Some(m.longest_shortest_path),
            region_count: Some(m.region_count),
            map: Some(out.map),
            error: None,
        }
    }

    pub(super) fn from_error(cfg: &RunConfig, error: String, wall_ms: f64) -> Self {
        Self {
            run_id: cfg.run_id,
            algorithm: cfg.algorithm,
            representation: cfg.representation,
            objective: cfg.objective.kind(),
            init_pct: cfg.init_empty_pct,
            seed: cfg.seed,
            solved: false,
            wall_ms,
            evaluations: 0,
            iterations: 0,
            max_depth: None,
            solution_depth: None,
            final_score: None,
            empty_count: None,
            path_length: None,
            region_count: None,
            map: None,
            error: Some(error),
        }
    }

    /// Tree-search solution depth, or one level past the deepest node for
    /// unsolved runs. `None` for optimizers.
    pub fn depth_with_fallback(&self) -> Option<usize> {
        if self.solved {
            self.solution_depth
        } else {
            self.max_depth.map(|d| d + 1)
        }
    }

    fn fields(&self) -> [String; 17] {
        fn opt<T: ToString>(v: &Option<T>) -> String {
            v.as_ref().map(T::to_string).unwrap_or_default()
        }
        [
            self.run_id.to_string(),
            self.algorithm.to_string(),
            self.representation
                .map(|r| r.as_str().to_string())
                .unwrap_or_default(),
            self.objective.as_str().to_string(),
            self.init_pct.to_string(),
            self.seed.to_string(),
            self.solved.to_string(),
            format!("{:.3}", self.wall_ms),
            self.evaluations.to_string(),
            self.iterations.to_string(),
            opt(&self.max_depth),
            opt(&self.solution_depth),
            opt(&self.final_score),
            opt(&self.empty_count),
            opt(&self.path_length),
            opt(&self.region_count),
            self.map.as_ref().map(Grid::to_flat).unwrap_or_default(),
        ]
    }
}

/// Streams records to CSV, header first.
pub struct ResultsWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> ResultsWriter<W> {
    pub fn new(out: W) -> csv::Result<Self> {
        let mut inner = csv::Writer::from_writer(out);
        inner.write_record(RESULTS_HEADER)?;
        Ok(Self { inner })
    }

    pub fn write(&mut self, record: &RunRecord) -> csv::Result<()> {
        self.inner.write_record(record.fields())
    }

    pub fn finish(mut self) -> std::io::Result<W> {
        self.inner.flush()?;
        self.inner.into_inner().map_err(|e| e.into_error())
    }
}

pub fn write_results<W: Write>(records: &[RunRecord], out: W) -> csv::Result<W> {
    let mut w = ResultsWriter::new(out)?;
    for r in records {
        w.write(r)?;
    }
    Ok(w.finish()?)
}

/// A results row that could not be used.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowWarning {
    pub line: u64,
    pub message: String,
}

impl std::fmt::Display for RowWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

/// Reads a results file. Bad rows are skipped and reported; only an
/// unreadable header is fatal.
///
/// The file does not store map dimensions. Pass them in `dims`, or leave it
/// `None` for square maps.
pub fn read_results<R: Read>(
    input: R,
    dims: Option<(usize, usize)>,
) -> Result<(Vec<RunRecord>, Vec<RowWarning>), String> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(input);
    let header = rdr
        .headers()
        .map_err(|e| format!("cannot read header: {e}"))?;
    if header.iter().ne(RESULTS_HEADER.iter().copied()) && !header.is_empty() {
        return Err(format!(
            "unexpected header: {}",
            header.iter().collect::<Vec<_>>().join(",")
        ));
    }
    let mut records = Vec::new();
    let mut warnings = Vec::new();
    for row in rdr.records() {
        match row {
            Ok(row) => {
                let line = row.position().map_or(0, |p| p.line());
                match parse_row(&row, dims) {
                    Ok(r) => records.push(r),
                    Err(message) => warnings.push(RowWarning { line, message }),
                }
            }
            Err(e) => warnings.push(RowWarning {
                line: e.position().map_or(0, |p| p.line()),
                message: e.to_string(),
            }),
        }
    }
    Ok((records, warnings))
}

fn parse_row(row: &csv::StringRecord, dims: Option<(usize, usize)>) -> Result<RunRecord, String> {
    if row.len() != RESULTS_HEADER.len() {
        return Err(format!(
            "expected {} fields, found {}",
            RESULTS_HEADER.len(),
            row.len()
        ));
    }
    let col = |i: usize| row.get(i).unwrap_or("");
    fn req<T: std::str::FromStr>(name: &str, s: &str) -> Result<T, String> {
        s.parse().map_err(|_| format!("bad {name} {s:?}"))
    }
    fn opt<T: std::str::FromStr>(name: &str, s: &str) -> Result<Option<T>, String> {
        if s.is_empty() {
            Ok(None)
        } else {
            req(name, s).map(Some)
        }
    }
    let representation = match col(2) {
        "" => None,
        s => Some(s.parse::<RepresentationKind>().map_err(|e| e.to_string())?),
    };
    let mut rec = RunRecord {
        run_id: req("run_id", col(0))?,
        algorithm: col(1).parse()?,
        representation,
        objective: col(3).parse::<ObjectiveKind>().map_err(|e| e.to_string())?,
        init_pct: req("init_pct", col(4))?,
        seed: req("seed", col(5))?,
        solved: req("solved", col(6))?,
        wall_ms: req("wall_ms", col(7))?,
        evaluations: req("evaluations", col(8))?,
        iterations: req("iterations", col(9))?,
        max_depth: opt("max_depth", col(10))?,
        solution_depth: opt("solution_depth", col(11))?,
        final_score: opt("final_score", col(12))?,
        empty_count: opt("empty_count", col(13))?,
        path_length: opt("path_length", col(14))?,
        region_count: opt("region_count", col(15))?,
        map: None,
        error: None,
    };
    let flat = col(16);
    if flat.is_empty() {
        rec.error = Some("run failed".to_string());
        return Ok(rec);
    }
    let (w, h) = match dims {
        Some(d) => d,
        None => {
            let side = (flat.len() as f64).sqrt().round() as usize;
            if side * side != flat.len() {
                return Err(format!(
                    "map of length {} is not square; pass the map size",
                    flat.len()
                ));
            }
            (side, side)
        }
    };
    let grid = Grid::from_flat(w, h, flat).map_err(|e| format!("corrupt map: {e}"))?;
    let m = grid.metrics();
    let stored = (rec.empty_count, rec.path_length, rec.region_count);
    let actual = (
        Some(m.empty_count),
        Some(m.longest_shortest_path),
        Some(m.region_count),
    );
    if stored != actual {
        return Err(format!(
            "metric columns {stored:?} do not match the map {actual:?}"
        ));
    }
    rec.map = Some(grid);
    Ok(rec)
}
