//! Experiment orchestration, results files, summary tables, learning-effect
//! tests and SVG reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use statrs::statistics::{Data, OrderStatistics};
use thiserror::Error;

use crate::engine::{run_trial, EngineError, StrategyLibrary};
use crate::objectgen::{ComplexityClass, ObjectLibrary};
use crate::percept::NoiseModel;
use crate::rng;
use crate::scenario::{sample_session, GroundTruth, StartPosition, TRIALS_PER_SESSION};
use crate::tracefmt::{trace_metrics, trace_to_string, TraceError};

pub const RESULTS_HEADER: &str =
    "session,trial,complexity,start,orientation,ground_truth,answer,correct,fixations,head_movement_m,response_time_s";
pub const PERMUTATION_RESAMPLES: usize = 1000;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("plan line {line}: {msg}")]
    Plan { line: usize, msg: String },
    #[error("results line {line}: {msg}")]
    Results { line: usize, msg: String },
    #[error("unknown dimension `{0}`")]
    UnknownDimension(String),
    #[error("unknown metric `{0}`")]
    UnknownMetric(String),
    #[error("no rows")]
    Empty,
    #[error("{0} has fewer than 2 trials per class")]
    TooFewTrials(ComplexityClass),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Trace(#[from] TraceError),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Human means shown next to simulated results, never compared against.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReferenceConstants {
    pub accuracy: f64,
    pub accuracy_sd: f64,
    pub fixations: f64,
    pub response_time_s: f64,
    pub response_time_sd: f64,
    pub head_movement_m: f64,
    pub min_fixations: usize,
    pub easy_aligned_accuracy: f64,
    pub response_time_range_s: (f64, f64),
}

pub const HUMAN_REFERENCE: ReferenceConstants = ReferenceConstants {
    accuracy: 0.9382,
    accuracy_sd: 0.039,
    fixations: 92.38,
    response_time_s: 47.52,
    response_time_sd: 30.39,
    head_movement_m: 16.62,
    min_fixations: 6,
    easy_aligned_accuracy: 1.0,
    response_time_range_s: (4.2, 298.0),
};

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentPlan {
    pub library_seed: u64,
    pub sessions: usize,
    pub noise: bool,
    pub master_seed: u64,
}

impl Default for ExperimentPlan {
    fn default() -> Self {
        ExperimentPlan {
            library_seed: 1,
            sessions: 1,
            noise: true,
            master_seed: 0,
        }
    }
}

impl ExperimentPlan {
    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let mut plan = ExperimentPlan::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: String| HarnessError::Plan { line: i + 1, msg };
            let (k, v) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| bad(format!("expected key = value, got {line:?}")))?;
            let num = |v: &str| v.parse::<u64>().map_err(|_| bad(format!("{k}: bad number {v:?}")));
            match k {
                "library_seed" => plan.library_seed = num(v)?,
                "sessions" => plan.sessions = num(v)? as usize,
                "master_seed" | "seed" => plan.master_seed = num(v)?,
                "noise" => {
                    plan.noise = match v {
                        "on" | "true" => true,
                        "off" | "false" => false,
                        _ => return Err(bad(format!("noise: expected on|off, got {v:?}"))),
                    }
                }
                "trials_per_session" if num(v)? == TRIALS_PER_SESSION as u64 => {}
                "trials_per_session" => return Err(bad(format!("trials_per_session is fixed at {TRIALS_PER_SESSION}"))),
                _ => return Err(bad(format!("unknown key {k:?}"))),
            }
        }
        if plan.sessions == 0 {
            return Err(HarnessError::Plan {
                line: 0,
                msg: "sessions must be positive".into(),
            });
        }
        Ok(plan)
    }

    pub fn to_text(&self) -> String {
        format!(
            "library_seed = {}\nsessions = {}\ntrials_per_session = {}\nnoise = {}\nmaster_seed = {}\n",
            self.library_seed,
            self.sessions,
            TRIALS_PER_SESSION,
            if self.noise { "on" } else { "off" },
            self.master_seed
        )
    }

    pub fn trial_count(&self) -> usize {
        self.sessions * TRIALS_PER_SESSION
    }

    pub fn noise_model(&self) -> NoiseModel {
        if self.noise {
            NoiseModel::pesao()
        } else {
            NoiseModel::disabled()
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResultsRow {
    pub session: usize,
    pub trial: usize,
    pub complexity: ComplexityClass,
    pub start: StartPosition,
    pub orientation: u16,
    pub ground_truth: GroundTruth,
    pub answer: GroundTruth,
    pub correct: bool,
    pub fixations: usize,
    pub head_movement_m: f64,
    pub response_time_s: f64,
}

impl ResultsRow {
    pub fn to_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{:.6},{:.6}",
            self.session,
            self.trial,
            self.complexity,
            self.start,
            self.orientation,
            self.ground_truth,
            self.answer,
            u8::from(self.correct),
            self.fixations,
            self.head_movement_m,
            self.response_time_s
        )
    }

    fn parse_line(line: &str, lineno: usize) -> Result<Self, HarnessError> {
        let bad = |msg: String| HarnessError::Results { line: lineno, msg };
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 11 {
            return Err(bad(format!("expected 11 fields, got {}", f.len())));
        }
        fn p<T: FromStr>(s: &str, what: &str, lineno: usize) -> Result<T, HarnessError> {
            s.parse().map_err(|_| HarnessError::Results {
                line: lineno,
                msg: format!("bad {what} {s:?}"),
            })
        }
        let correct = match f[7] {
            "1" => true,
            "0" => false,
            o => return Err(bad(format!("bad correct flag {o:?}"))),
        };
        let row = ResultsRow {
            session: p(f[0], "session", lineno)?,
            trial: p(f[1], "trial", lineno)?,
            complexity: p(f[2], "complexity", lineno)?,
            start: p(f[3], "start", lineno)?,
            orientation: p(f[4], "orientation", lineno)?,
            ground_truth: p(f[5], "ground truth", lineno)?,
            answer: p(f[6], "answer", lineno)?,
            correct,
            fixations: p(f[8], "fixations", lineno)?,
            head_movement_m: p(f[9], "head movement", lineno)?,
            response_time_s: p(f[10], "response time", lineno)?,
        };
        if row.correct != (row.answer == row.ground_truth) {
            return Err(bad("correct flag disagrees with answer".into()));
        }
        Ok(row)
    }
}

pub fn write_results(rows: &[ResultsRow]) -> String {
    let mut out = String::from(RESULTS_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.to_line());
        out.push('\n');
    }
    out
}

pub fn parse_results(text: &str) -> Result<Vec<ResultsRow>, HarnessError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == RESULTS_HEADER => {}
        _ => {
            return Err(HarnessError::Results {
                line: 1,
                msg: "missing header".into(),
            })
        }
    }
    lines.map(|(i, l)| ResultsRow::parse_line(l.trim(), i + 1)).collect()
}

pub fn read_results(path: &Path) -> Result<Vec<ResultsRow>, HarnessError> {
    parse_results(&fs::read_to_string(path).map_err(io_err(path))?)
}

/// Writes via a sibling temporary file so readers never see partial output.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), HarnessError> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents).map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

#[derive(Clone, Debug)]
pub struct TrialFailure {
    pub session: usize,
    pub trial: usize,
    pub message: String,
}

#[derive(Clone, Debug, Default)]
pub struct ExperimentRun {
    /// Ordered by (session, trial).
    pub rows: Vec<ResultsRow>,
    pub failures: Vec<TrialFailure>,
}

pub fn trace_file_name(session: usize, trial: usize) -> String {
    format!("s{session:03}_t{trial:02}.trace")
}

/// Runs every trial of the plan. With `out` set, writes `traces/*.trace`,
/// `results.csv` and `plan.txt` under it. A failing trial is reported in
/// `failures` and the batch continues.
pub fn run_experiment(
    plan: &ExperimentPlan,
    library: &StrategyLibrary,
    out: Option<&Path>,
) -> Result<ExperimentRun, HarnessError> {
    let objects = ObjectLibrary::generate(plan.library_seed);
    let trace_dir = out.map(|d| d.join("traces"));
    if let Some(d) = &trace_dir {
        fs::create_dir_all(d).map_err(io_err(d))?;
    }
    let jobs: Vec<(usize, crate::scenario::TrialConfig)> = (0..plan.sessions)
        .flat_map(|s| {
            sample_session(&objects, rng::derive(plan.master_seed, s as u64))
                .into_iter()
                .map(move |c| (s, c))
        })
        .collect();
    let noise = plan.noise_model();
    let results: Vec<Result<ResultsRow, TrialFailure>> = jobs
        .par_iter()
        .map(|(s, cfg)| {
            let fail = |message: String| TrialFailure {
                session: *s,
                trial: cfg.trial_index,
                message,
            };
            let seed = rng::derive(plan.master_seed ^ 0x7419_A1E5, (*s as u64) << 8 | cfg.trial_index as u64);
            let o = run_trial(cfg, &objects, library, noise, seed).map_err(|e| fail(e.to_string()))?;
            let m = trace_metrics(&o.trace).map_err(|e| fail(e.to_string()))?;
            if let Some(d) = &trace_dir {
                write_atomic(&d.join(trace_file_name(*s, cfg.trial_index)), &trace_to_string(&o.trace))
                    .map_err(|e| fail(e.to_string()))?;
            }
            Ok(ResultsRow {
                session: *s,
                trial: cfg.trial_index,
                complexity: cfg.complexity,
                start: cfg.start,
                orientation: cfg.orientation_diff,
                ground_truth: cfg.ground_truth,
                answer: o.answer,
                correct: o.correct,
                fixations: m.fixations,
                head_movement_m: m.head_path_m,
                response_time_s: m.response_time_s,
            })
        })
        .collect();
    let mut run = ExperimentRun::default();
    for r in results {
        match r {
            Ok(row) => run.rows.push(row),
            Err(f) => run.failures.push(f),
        }
    }
    if let Some(d) = out {
        write_atomic(&d.join("results.csv"), &write_results(&run.rows))?;
        write_atomic(&d.join("plan.txt"), &plan.to_text())?;
    }
    Ok(run)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Dimension {
    Complexity,
    Start,
    Orientation,
    Sameness,
    /// 1-based position among the session's trials of the same class.
    TrialIndex,
}

impl FromStr for Dimension {
    type Err = HarnessError;
    fn from_str(s: &str) -> Result<Self, HarnessError> {
        Ok(match s {
            "complexity" => Dimension::Complexity,
            "start" => Dimension::Start,
            "orientation" => Dimension::Orientation,
            "sameness" | "ground_truth" => Dimension::Sameness,
            "trial_index" => Dimension::TrialIndex,
            o => return Err(HarnessError::UnknownDimension(o.to_string())),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Metric {
    Accuracy,
    Fixations,
    ResponseTime,
    HeadMovement,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::Accuracy, Metric::Fixations, Metric::ResponseTime, Metric::HeadMovement];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Accuracy => "accuracy",
            Metric::Fixations => "fixations",
            Metric::ResponseTime => "response_time_s",
            Metric::HeadMovement => "head_movement_m",
        }
    }

    pub fn of(self, r: &ResultsRow) -> f64 {
        match self {
            Metric::Accuracy => f64::from(u8::from(r.correct)),
            Metric::Fixations => r.fixations as f64,
            Metric::ResponseTime => r.response_time_s,
            Metric::HeadMovement => r.head_movement_m,
        }
    }

    /// Matching human mean, when one was reported.
    pub fn reference(self, c: &ReferenceConstants) -> f64 {
        match self {
            Metric::Accuracy => c.accuracy,
            Metric::Fixations => c.fixations,
            Metric::ResponseTime => c.response_time_s,
            Metric::HeadMovement => c.head_movement_m,
        }
    }
}

impl FromStr for Metric {
    type Err = HarnessError;
    fn from_str(s: &str) -> Result<Self, HarnessError> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s || m.name().split('_').next() == Some(s))
            .ok_or_else(|| HarnessError::UnknownMetric(s.to_string()))
    }
}

/// Within-class trial index for every row, aligned with `rows`.
pub fn class_indices(rows: &[ResultsRow]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.sort_by_key(|&i| (rows[i].session, rows[i].trial));
    let mut count: BTreeMap<(usize, ComplexityClass), usize> = BTreeMap::new();
    let mut out = vec![0; rows.len()];
    for i in order {
        let c = count.entry((rows[i].session, rows[i].complexity)).or_default();
        *c += 1;
        out[i] = *c;
    }
    out
}

fn key_of(d: Dimension, r: &ResultsRow, class_index: usize) -> String {
    match d {
        Dimension::Complexity => r.complexity.to_string(),
        Dimension::Start => r.start.to_string(),
        Dimension::Orientation => r.orientation.to_string(),
        Dimension::Sameness => r.ground_truth.to_string(),
        Dimension::TrialIndex => class_index.to_string(),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryCell {
    pub key: Vec<String>,
    pub n: usize,
    pub mean: f64,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryTable {
    pub metric: Metric,
    pub dimensions: Vec<Dimension>,
    pub cells: Vec<SummaryCell>,
}

impl SummaryTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for d in &self.dimensions {
            let _ = write!(s, "{},", format!("{d:?}").to_lowercase());
        }
        let _ = writeln!(s, "n,mean,median,q1,q3,min,max");
        for c in &self.cells {
            for k in &c.key {
                let _ = write!(s, "{k},");
            }
            let _ = writeln!(
                s,
                "{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
                c.n, c.mean, c.median, c.q1, c.q3, c.min, c.max
            );
        }
        s
    }
}

/// Grouped statistics of `metric` over the given dimensions.
pub fn summarize(rows: &[ResultsRow], dimensions: &[Dimension], metric: Metric) -> Result<SummaryTable, HarnessError> {
    if rows.is_empty() {
        return Err(HarnessError::Empty);
    }
    let idx = class_indices(rows);
    let mut groups: BTreeMap<Vec<String>, Vec<f64>> = BTreeMap::new();
    for (r, &ci) in rows.iter().zip(&idx) {
        let key = dimensions.iter().map(|&d| key_of(d, r, ci)).collect();
        groups.entry(key).or_default().push(metric.of(r));
    }
    let cells = groups
        .into_iter()
        .map(|(key, mut v)| {
            v.sort_by(f64::total_cmp);
            let n = v.len();
            let mean = v.iter().sum::<f64>() / n as f64;
            let (min, max) = (v[0], v[n - 1]);
            let mut data = Data::new(v);
            SummaryCell {
                key,
                n,
                mean,
                median: data.median(),
                q1: data.lower_quartile(),
                q3: data.upper_quartile(),
                min,
                max,
            }
        })
        .collect();
    Ok(SummaryTable {
        metric,
        dimensions: dimensions.to_vec(),
        cells,
    })
}

/// The standard report panels: (file stem, metric, dimensions).
pub const PANELS: [(&str, Metric, &[Dimension]); 8] = [
    ("accuracy_by_complexity_start", Metric::Accuracy, &[Dimension::Complexity, Dimension::Start]),
    ("fixations_by_complexity_sameness", Metric::Fixations, &[Dimension::Complexity, Dimension::Sameness]),
    ("response_time_by_complexity_start", Metric::ResponseTime, &[Dimension::Complexity, Dimension::Start]),
    ("accuracy_by_trial_index_complexity", Metric::Accuracy, &[Dimension::TrialIndex, Dimension::Complexity]),
    ("fixations_by_trial_index_complexity", Metric::Fixations, &[Dimension::TrialIndex, Dimension::Complexity]),
    ("head_movement_by_complexity_orientation", Metric::HeadMovement, &[Dimension::Complexity, Dimension::Orientation]),
    ("accuracy_by_complexity_orientation", Metric::Accuracy, &[Dimension::Complexity, Dimension::Orientation]),
    ("fixations_by_complexity", Metric::Fixations, &[Dimension::Complexity]),
];

#[derive(Clone, Debug, PartialEq)]
pub struct Trend {
    pub complexity: ComplexityClass,
    pub metric: Metric,
    pub n: usize,
    pub slope: f64,
    pub spearman: f64,
    /// Two-sided permutation p-value of the rank correlation.
    pub p_value: f64,
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && v[order[j + 1]] == v[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            out[k] = avg;
        }
        i = j + 1;
    }
    out
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        0.0
    } else {
        sxy / (sxx * syy).sqrt()
    }
}

pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    pearson(&ranks(x), &ranks(y))
}

pub fn ols_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return 0.0;
    }
    x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / sxx
}

/// Per-class trend of `metric` over the within-class trial index, with a
/// seeded permutation test of the rank correlation.
pub fn learning_effect(rows: &[ResultsRow], metric: Metric, seed: u64) -> Result<Vec<Trend>, HarnessError> {
    if rows.is_empty() {
        return Err(HarnessError::Empty);
    }
    let idx = class_indices(rows);
    let mut out = Vec::new();
    for class in ComplexityClass::ALL {
        let (x, y): (Vec<f64>, Vec<f64>) = rows
            .iter()
            .zip(&idx)
            .filter(|(r, _)| r.complexity == class)
            .map(|(r, &i)| (i as f64, metric.of(r)))
            .unzip();
        let distinct = x.iter().map(|v| *v as usize).collect::<std::collections::BTreeSet<_>>().len();
        if distinct < 2 {
            return Err(HarnessError::TooFewTrials(class));
        }
        let rho = spearman(&x, &y);
        let (rx, mut ry) = (ranks(&x), ranks(&y));
        let mut rng = rng::stream(seed, 0x1EA4 + class.index() as u64);
        let mut extreme = 0;
        for _ in 0..PERMUTATION_RESAMPLES {
            ry.shuffle(&mut rng);
            if pearson(&rx, &ry).abs() >= rho.abs() - 1e-12 {
                extreme += 1;
            }
        }
        out.push(Trend {
            complexity: class,
            metric,
            n: x.len(),
            slope: ols_slope(&x, &y),
            spearman: rho,
            p_value: (extreme + 1) as f64 / (PERMUTATION_RESAMPLES + 1) as f64,
        });
    }
    Ok(out)
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Box-and-whisker plot of a summary table, one box per cell, labelled
/// with n and annotated with the human reference mean.
pub fn box_plot_svg(table: &SummaryTable, title: &str, reference: Option<f64>) -> String {
    let (w, h, left, bottom, top) = (80.0 + 70.0 * table.cells.len() as f64, 360.0, 60.0, 70.0, 40.0);
    let hi = table
        .cells
        .iter()
        .map(|c| c.max)
        .chain(reference)
        .fold(f64::MIN, f64::max)
        .max(1e-9);
    let lo = table.cells.iter().map(|c| c.min).fold(0.0, f64::min);
    let y = |v: f64| top + (h - top - bottom) * (1.0 - (v - lo) / (hi - lo) * 0.95);
    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" font-family=\"sans-serif\" font-size=\"11\">"
    );
    let _ = writeln!(s, "<text x=\"{left}\" y=\"20\" font-size=\"14\">{}</text>", esc(title));
    let _ = writeln!(
        s,
        "<line x1=\"{left}\" y1=\"{top}\" x2=\"{left}\" y2=\"{:.1}\" stroke=\"black\"/>",
        h - bottom
    );
    for k in 0..=4 {
        let v = lo + (hi - lo) * k as f64 / 4.0;
        let _ = writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{v:.3}</text>",
            left - 4.0,
            y(v) + 4.0
        );
    }
    for (i, c) in table.cells.iter().enumerate() {
        let cx = left + 45.0 + 70.0 * i as f64;
        let _ = writeln!(
            s,
            "<line x1=\"{cx:.1}\" y1=\"{:.1}\" x2=\"{cx:.1}\" y2=\"{:.1}\" stroke=\"black\"/>",
            y(c.max),
            y(c.min)
        );
        let _ = writeln!(
            s,
            "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"40\" height=\"{:.1}\" fill=\"#cde\" stroke=\"black\"/>",
            cx - 20.0,
            y(c.q3),
            (y(c.q1) - y(c.q3)).max(0.5)
        );
        let _ = writeln!(
            s,
            "<line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"black\" stroke-width=\"2\"/>",
            cx - 20.0,
            y(c.median),
            cx + 20.0,
            y(c.median)
        );
        let _ = writeln!(s, "<circle cx=\"{cx:.1}\" cy=\"{:.1}\" r=\"2.5\"/>", y(c.mean));
        let label = esc(&c.key.join(" "));
        let _ = writeln!(
            s,
            "<text x=\"{cx:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{label}</text>",
            h - bottom + 16.0
        );
        let _ = writeln!(
            s,
            "<text x=\"{cx:.1}\" y=\"{:.1}\" text-anchor=\"middle\">n={}</text>",
            h - bottom + 32.0,
            c.n
        );
    }
    if let Some(r) = reference {
        let _ = writeln!(
            s,
            "<line x1=\"{left}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"#c33\" stroke-dasharray=\"5,3\"/>",
            y(r),
            w - 10.0,
            y(r)
        );
        let _ = writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\" fill=\"#c33\">human mean {r}</text>",
            w - 10.0,
            y(r) - 4.0
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Writes one CSV table and one SVG plot per panel, the learning-effect
/// table, and a reference-constant file into `out`. Returns written paths.
pub fn write_report(rows: &[ResultsRow], out: &Path, seed: u64) -> Result<Vec<PathBuf>, HarnessError> {
    if rows.is_empty() {
        return Err(HarnessError::Empty);
    }
    fs::create_dir_all(out).map_err(io_err(out))?;
    let mut written = Vec::new();
    for (stem, metric, dims) in PANELS {
        let t = summarize(rows, dims, metric)?;
        let csv = out.join(format!("{stem}.csv"));
        write_atomic(&csv, &t.to_csv())?;
        let svg = out.join(format!("{stem}.svg"));
        write_atomic(
            &svg,
            &box_plot_svg(&t, &stem.replace('_', " "), Some(metric.reference(&HUMAN_REFERENCE))),
        )?;
        written.extend([csv, svg]);
    }
    let mut le = String::from("metric,complexity,n,slope,spearman,p_value\n");
    if class_indices(rows).iter().any(|&i| i >= 2) {
        for metric in [Metric::Accuracy, Metric::Fixations, Metric::HeadMovement] {
            for t in learning_effect(rows, metric, seed)? {
                let _ = writeln!(
                    le,
                    "{},{},{},{:.6},{:.6},{:.4}",
                    metric.name(),
                    t.complexity,
                    t.n,
                    t.slope,
                    t.spearman,
                    t.p_value
                );
            }
        }
    }
    let le_path = out.join("learning_effect.csv");
    write_atomic(&le_path, &le)?;
    written.push(le_path);
    let r = HUMAN_REFERENCE;
    let overall = |m: Metric| rows.iter().map(|x| m.of(x)).sum::<f64>() / rows.len() as f64;
    let mut refs = String::from("quantity,simulated,human_reference\n");
    let _ = writeln!(refs, "accuracy,{:.6},{}", overall(Metric::Accuracy), r.accuracy);
    let _ = writeln!(refs, "fixations,{:.6},{}", overall(Metric::Fixations), r.fixations);
    let _ = writeln!(refs, "response_time_s,{:.6},{}", overall(Metric::ResponseTime), r.response_time_s);
    let _ = writeln!(refs, "head_movement_m,{:.6},{}", overall(Metric::HeadMovement), r.head_movement_m);
    let min_fix = rows.iter().map(|x| x.fixations).min().unwrap_or(0);
    let _ = writeln!(refs, "min_fixations,{min_fix},{}", r.min_fixations);
    let ref_path = out.join("reference.csv");
    write_atomic(&ref_path, &refs)?;
    written.push(ref_path);
    Ok(written)
}

