//! Monte-Carlo key-recovery experiments over `(M, s)` grids.
//!
//! Every trial is fully determined by `hash64(grid_seed, M, s, trial)`, so
//! results do not depend on worker count, scheduling or resumption. Records
//! stream to CSV as they complete; on completion the file is rewritten in
//! `(M, s, trial)` order.

use std::collections::{BTreeMap, HashSet};
use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use rayon::prelude::*;

use crate::attack::{make_instance, recover_key, RecoverOptions, SUCCESS_THRESHOLD};
use crate::certs::certify_instance;
use crate::complexcore::{hash64, Rng};
use crate::error::{arg_err, Error, Result};
use crate::scheme::{keygen, sample_plaintext, SparseVector};

pub const CSV_HEADER: [&str; 11] =
    ["n", "m", "M", "s", "trial", "seed", "final_loss", "rel_error", "success", "iters", "wall_s"];

/// Success rate above which a certified cell trips the sentinel.
pub const SENTINEL_RATE: f64 = 0.05;

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentGrid {
    pub n: usize,
    pub m: usize,
    pub m_values: Vec<usize>,
    pub s_values: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub restarts: usize,
    pub success_threshold: f64,
}

impl ExperimentGrid {
    pub fn new(n: usize, m: usize, m_values: Vec<usize>, s_values: Vec<usize>) -> Self {
        Self {
            n,
            m,
            m_values,
            s_values,
            trials: 100,
            seed: 0,
            restarts: 3,
            success_threshold: SUCCESS_THRESHOLD,
        }
    }

    pub fn with_trials(mut self, trials: usize) -> Self {
        self.trials = trials;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    /// Named grids. `small*` are desk-scale (25 trials); `paper*` use the
    /// full ranges with 100 trials.
    pub fn preset(name: &str) -> Result<Self> {
        let grid = match name {
            "small50" => Self::new(
                50,
                5,
                vec![10, 25, 50, 100, 200, 350, 500],
                vec![1, 2, 3, 4, 6, 8, 12, 20, 32, 48],
            )
            .with_trials(25),
            "small100" => Self::new(
                100,
                3,
                vec![50, 100, 200, 400, 700, 1000, 1500, 2000, 3000, 5000],
                vec![1, 2, 3, 4, 6, 8, 12, 24],
            )
            .with_trials(25),
            "paper50" => Self::new(
                50,
                5,
                vec![10, 20, 30, 40, 50, 75, 100, 150, 200, 300, 400, 500],
                vec![1, 2, 3, 4, 5, 6, 7, 8, 10, 12, 16, 20, 24, 32, 40, 48],
            ),
            "paper100" => Self::new(
                100,
                3,
                vec![50, 75, 100, 150, 200, 300, 400, 500, 750, 1000, 1500, 2000],
                vec![1, 2, 3, 4, 5, 6, 7, 8, 10, 12, 16, 24, 32, 48, 64, 98],
            ),
            other => return arg_err(format!("unknown preset {other:?}")),
        };
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 {
            return arg_err("grid dimensions must be positive");
        }
        if self.trials == 0 {
            return arg_err("trials must be at least 1");
        }
        if self.restarts == 0 {
            return arg_err("restarts must be at least 1");
        }
        if self.m_values.is_empty() || self.s_values.is_empty() {
            return arg_err("M and s lists must be non-empty");
        }
        if self.m_values.contains(&0) {
            return arg_err("every M must be at least 1");
        }
        if let Some(s) = self.s_values.iter().find(|&&s| s == 0 || s > self.n) {
            return arg_err(format!("sparsity {s} outside 1..={}", self.n));
        }
        Ok(())
    }

    fn trial_config(&self) -> TrialConfig {
        TrialConfig {
            recover: RecoverOptions { restarts: self.restarts, ..Default::default() },
            success_threshold: self.success_threshold,
        }
    }

    /// All `(M, s, trial)` keys in canonical order.
    fn keys(&self) -> Vec<TrialKey> {
        let mut keys = Vec::with_capacity(self.m_values.len() * self.s_values.len() * self.trials);
        for &big_m in &self.m_values {
            for &s in &self.s_values {
                for trial in 0..self.trials {
                    keys.push(TrialKey { big_m, s, trial });
                }
            }
        }
        keys
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct TrialKey {
    big_m: usize,
    s: usize,
    trial: usize,
}

/// Stable under grid re-ordering and resumption.
pub fn trial_seed(grid_seed: u64, big_m: usize, s: usize, trial: usize) -> u64 {
    hash64(&[grid_seed, big_m as u64, s as u64, trial as u64])
}

#[derive(Clone, Debug)]
pub struct TrialConfig {
    pub recover: RecoverOptions,
    pub success_threshold: f64,
}

impl Default for TrialConfig {
    fn default() -> Self {
        Self { recover: RecoverOptions::default(), success_threshold: SUCCESS_THRESHOLD }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub n: usize,
    pub m: usize,
    pub big_m: usize,
    pub s: usize,
    pub trial: usize,
    pub seed: u64,
    pub final_loss: f64,
    pub rel_error: f64,
    pub success: bool,
    pub iters: usize,
    pub wall_s: f64,
}

impl TrialRecord {
    fn key(&self) -> TrialKey {
        TrialKey { big_m: self.big_m, s: self.s, trial: self.trial }
    }
}

/// The plaintexts a trial with this seed uses.
pub fn trial_plaintexts(n: usize, big_m: usize, s: usize, seed: u64) -> Result<Vec<SparseVector>> {
    let mut rng = Rng::new(seed).child(1);
    (0..big_m).map(|_| sample_plaintext(n, s, &mut rng)).collect()
}

/// keygen → M plaintexts → projective observations → key recovery.
pub fn run_trial(
    n: usize,
    m: usize,
    big_m: usize,
    s: usize,
    trial: usize,
    seed: u64,
    config: &TrialConfig,
) -> Result<TrialRecord> {
    let start = Instant::now();
    let root = Rng::new(seed);
    let key = keygen(m, n, &mut root.child(0))?;
    let plaintexts = trial_plaintexts(n, big_m, s, seed)?;
    let inst = make_instance(&key, plaintexts, &mut root.child(2))?;
    let result = recover_key(&inst, &config.recover, &mut root.child(3), Some(&key))?;
    let rel_error = result.rel_error_mod_phase.expect("truth supplied");
    Ok(TrialRecord {
        n,
        m,
        big_m,
        s,
        trial,
        seed,
        final_loss: result.final_loss,
        rel_error,
        success: rel_error < config.success_threshold,
        iters: result.iterations,
        wall_s: start.elapsed().as_secs_f64(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellSummary {
    pub big_m: usize,
    pub s: usize,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub mean_rel_error: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct GridSummary {
    /// `(n, m)` shared by all records; `None` for an empty summary.
    pub dims: Option<(usize, usize)>,
    /// Cells in `(M, s)` order.
    pub cells: Vec<CellSummary>,
}

impl GridSummary {
    pub fn cell(&self, big_m: usize, s: usize) -> Option<&CellSummary> {
        self.cells.iter().find(|c| c.big_m == big_m && c.s == s)
    }

    /// Smallest `M` whose success rate at sparsity `s` reaches `rate`.
    pub fn threshold_m(&self, s: usize, rate: f64) -> Option<usize> {
        self.cells
            .iter()
            .filter(|c| c.s == s && c.success_rate >= rate)
            .map(|c| c.big_m)
            .min()
    }
}

pub fn summarize(records: &[TrialRecord]) -> Result<GridSummary> {
    let Some(first) = records.first() else {
        return Ok(GridSummary::default());
    };
    let dims = (first.n, first.m);
    if records.iter().any(|r| (r.n, r.m) != dims) {
        return arg_err("records from different (n, m) cannot be summarized together");
    }
    let mut cells: BTreeMap<(usize, usize), (usize, usize, f64)> = BTreeMap::new();
    for r in records {
        let e = cells.entry((r.big_m, r.s)).or_default();
        e.0 += 1;
        e.1 += usize::from(r.success);
        e.2 += r.rel_error;
    }
    let cells = cells
        .into_iter()
        .map(|((big_m, s), (trials, successes, err))| CellSummary {
            big_m,
            s,
            trials,
            successes,
            success_rate: successes as f64 / trials as f64,
            mean_rel_error: err / trials as f64,
        })
        .collect();
    Ok(GridSummary { dims: Some(dims), cells })
}

/// A cell whose certified-non-retrievable trials nevertheless succeeded.
#[derive(Clone, Debug, PartialEq)]
pub struct SentinelViolation {
    pub big_m: usize,
    pub s: usize,
    pub certified_trials: usize,
    pub certified_successes: usize,
    pub rate: f64,
}

/// Result of a completed grid.
#[derive(Clone, Debug)]
pub struct GridRun {
    pub summary: GridSummary,
    /// Records in `(M, s, trial)` order.
    pub records: Vec<TrialRecord>,
    /// Per record: whether its plaintext set carries a validated
    /// non-retrievability certificate.
    pub certified: Vec<bool>,
    pub violations: Vec<SentinelViolation>,
}

/// Cross-checks every cell against the certificates: among the trials whose
/// plaintext sets are certified non-retrievable, the success rate must not
/// exceed [`SENTINEL_RATE`].
pub fn sentinel_check(records: &[TrialRecord], certified: &[bool]) -> Vec<SentinelViolation> {
    let mut cells: BTreeMap<(usize, usize), (usize, usize)> = BTreeMap::new();
    for (r, &c) in records.iter().zip(certified) {
        if c {
            let e = cells.entry((r.big_m, r.s)).or_default();
            e.0 += 1;
            e.1 += usize::from(r.success);
        }
    }
    cells
        .into_iter()
        .filter_map(|((big_m, s), (trials, successes))| {
            let rate = successes as f64 / trials as f64;
            (rate > SENTINEL_RATE).then_some(SentinelViolation {
                big_m,
                s,
                certified_trials: trials,
                certified_successes: successes,
                rate,
            })
        })
        .collect()
}

pub fn is_certified(record: &TrialRecord) -> Result<bool> {
    let xs = trial_plaintexts(record.n, record.big_m, record.s, record.seed)?;
    Ok(certify_instance(&xs, record.n, record.s)?.non_retrievable())
}

fn fmt_f64(v: f64) -> String {
    crate::complexcore::textfmt::format_real(v)
}

fn record_fields(r: &TrialRecord) -> [String; 11] {
    [
        r.n.to_string(),
        r.m.to_string(),
        r.big_m.to_string(),
        r.s.to_string(),
        r.trial.to_string(),
        r.seed.to_string(),
        fmt_f64(r.final_loss),
        fmt_f64(r.rel_error),
        u8::from(r.success).to_string(),
        r.iters.to_string(),
        fmt_f64(r.wall_s),
    ]
}

pub fn write_csv<W: Write>(w: W, records: &[TrialRecord]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(CSV_HEADER)?;
    for r in records {
        wr.write_record(record_fields(r))?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Vec<TrialRecord>> {
    let mut rd = csv::Reader::from_path(path)?;
    let header: Vec<String> = rd.headers()?.iter().map(str::to_owned).collect();
    if header != CSV_HEADER {
        return Err(Error::Parse { line: 1, msg: format!("unexpected CSV header {header:?}") });
    }
    let mut out = Vec::new();
    for (k, row) in rd.records().enumerate() {
        let row = row?;
        let line = k + 2;
        let field = |i: usize| row.get(i).unwrap_or("");
        let bad = |i: usize| Error::Parse { line, msg: format!("bad value {:?} in column {}", field(i), CSV_HEADER[i]) };
        let int = |i: usize| field(i).parse::<usize>().map_err(|_| bad(i));
        let real = |i: usize| field(i).parse::<f64>().map_err(|_| bad(i));
        out.push(TrialRecord {
            n: int(0)?,
            m: int(1)?,
            big_m: int(2)?,
            s: int(3)?,
            trial: int(4)?,
            seed: field(5).parse::<u64>().map_err(|_| bad(5))?,
            final_loss: real(6)?,
            rel_error: real(7)?,
            success: match field(8) {
                "0" => false,
                "1" => true,
                _ => return Err(bad(8)),
            },
            iters: int(9)?,
            wall_s: real(10)?,
        });
    }
    Ok(out)
}

/// Appends records to an open CSV, one flush per record.
struct CsvSink {
    writer: csv::Writer<BufWriter<File>>,
}

impl CsvSink {
    fn open(path: &Path, fresh: bool) -> Result<Self> {
        let file = OpenOptions::new().create(true).append(true).truncate(false).open(path)?;
        let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(BufWriter::new(file));
        if fresh {
            writer.write_record(CSV_HEADER)?;
            writer.flush()?;
        }
        Ok(Self { writer })
    }

    fn push(&mut self, r: &TrialRecord) -> Result<()> {
        self.writer.write_record(record_fields(r))?;
        self.writer.flush()?;
        Ok(())
    }
}

/// An interrupted writer can leave a final line without its newline;
/// that record is discarded and rerun.
fn drop_partial_line(path: &Path) -> Result<()> {
    let bytes = std::fs::read(path)?;
    if bytes.last() != Some(&b'\n') {
        let keep = bytes.iter().rposition(|&b| b == b'\n').map_or(0, |k| k + 1);
        OpenOptions::new().write(true).open(path)?.set_len(keep as u64)?;
    }
    Ok(())
}

fn finalize_csv(path: &Path, records: &[TrialRecord]) -> Result<()> {
    let mut tmp = PathBuf::from(path);
    tmp.as_mut_os_string().push(".tmp");
    write_csv(BufWriter::new(File::create(&tmp)?), records)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Runs every `(M, s, trial)` of the grid on `jobs` worker threads.
///
/// With `out` set, records are appended to that CSV as they finish and
/// trials already present in it are skipped. Returns
/// [`Error::Sentinel`] (carrying the full run) when a certified cell shows
/// success.
pub fn run_grid(grid: &ExperimentGrid, jobs: usize, out: Option<&Path>) -> Result<GridRun> {
    grid.validate()?;
    let keys = grid.keys();
    let wanted: HashSet<TrialKey> = keys.iter().copied().collect();

    let mut done: Vec<TrialRecord> = Vec::new();
    let mut fresh = true;
    if let Some(path) = out {
        if path.exists() && std::fs::metadata(path)?.len() > 0 {
            fresh = false;
            drop_partial_line(path)?;
            for r in read_csv(path)? {
                if (r.n, r.m) != (grid.n, grid.m) {
                    return arg_err(format!("{} holds records for a different (n, m)", path.display()));
                }
                if r.seed != trial_seed(grid.seed, r.big_m, r.s, r.trial) {
                    return arg_err(format!("{} was produced with a different grid seed", path.display()));
                }
                if wanted.contains(&r.key()) {
                    done.push(r);
                }
            }
        }
    }
    let done_keys: HashSet<TrialKey> = done.iter().map(TrialRecord::key).collect();
    let todo: Vec<TrialKey> = keys.into_iter().filter(|k| !done_keys.contains(k)).collect();

    let sink = match out {
        Some(path) => Some(Mutex::new(CsvSink::open(path, fresh)?)),
        None => None,
    };
    let config = grid.trial_config();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;

    let new_records: Vec<TrialRecord> = pool.install(|| {
        todo.par_iter()
            .map(|k| {
                let seed = trial_seed(grid.seed, k.big_m, k.s, k.trial);
                let rec = run_trial(grid.n, grid.m, k.big_m, k.s, k.trial, seed, &config)?;
                if let Some(sink) = &sink {
                    sink.lock().expect("csv sink poisoned").push(&rec)?;
                }
                Ok(rec)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    drop(sink);

    let mut records = done;
    records.extend(new_records);
    records.sort_by_key(TrialRecord::key);
    if let Some(path) = out {
        finalize_csv(path, &records)?;
    }

    let certified: Vec<bool> =
        pool.install(|| records.par_iter().map(is_certified).collect::<Result<Vec<_>>>())?;
    let violations = sentinel_check(&records, &certified);
    let run = GridRun { summary: summarize(&records)?, records, certified, violations };
    if !run.violations.is_empty() {
        return Err(Error::Sentinel(Box::new(run)));
    }
    Ok(run)
}
