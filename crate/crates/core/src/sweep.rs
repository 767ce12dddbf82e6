//! Convergence sweep over an integer range, with checkpoint and resume.
//!
//! Chunks are processed in waves. Within a wave the chunks run concurrently,
//! and each value `n` is only followed until it first lands on a value in
//! `[lo, n)` or on 1. Because everything below `n` in the range is verified
//! by the time the wave is merged, the landing value closes the argument for
//! `n`. The merge walks the wave in ascending order, so a chunk is recorded as
//! verified only after every chunk below it, and the total step count of `n`
//! is the local count plus the already-known total of its landing value.
//!
//! The statistics do not depend on the worker count or the wave size:
//! maximum total steps and maximum peak, each attributed to the smallest `n`
//! attaining it. The peak of `n` before landing is enough for the maximum
//! peak, since anything after landing is the orbit of a smaller value in the
//! range.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Block, Executor};
use crate::facts::{RangeReport, Violation};
use crate::map;
use crate::nat::Nat;

pub const CHECKPOINT_SCHEMA_VERSION: u32 = 1;
pub const TASK: &str = "verify-range";
pub const DEFAULT_CHUNK: u64 = 1 << 16;
pub const DEFAULT_BUDGET: u64 = 1_000_000;

/// Total step counts are tabulated for at most this many values per run;
/// landing values outside the table are recomputed directly.
const TABLE_CAP: u64 = 1 << 25;
const CHUNKS_PER_WORKER: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepStats {
    pub max_steps: u64,
    pub max_steps_at: u64,
    pub max_peak: Nat,
    pub max_peak_at: u64,
}

impl SweepStats {
    fn first(n: u64) -> Self {
        SweepStats {
            max_steps: 0,
            max_steps_at: n,
            max_peak: Nat::new(n),
            max_peak_at: n,
        }
    }

    fn record_steps(&mut self, n: u64, steps: u64) {
        if steps > self.max_steps {
            self.max_steps = steps;
            self.max_steps_at = n;
        }
    }

    fn record_peak(&mut self, n: u64, peak: &Nat) {
        if *peak > self.max_peak {
            self.max_peak = peak.clone();
            self.max_peak_at = n;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub schema_version: u32,
    pub task: String,
    pub range: [u64; 2],
    pub budget: u64,
    pub verified_up_to: u64,
    pub checked: u64,
    pub stats: SweepStats,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

impl Checkpoint {
    pub fn load(path: &Path) -> Result<Checkpoint> {
        let text = fs::read_to_string(path)?;
        let cp: Checkpoint = serde_json::from_str(&text)?;
        if cp.schema_version != CHECKPOINT_SCHEMA_VERSION {
            return Err(Error::Checkpoint(format!(
                "schema version {} (expected {CHECKPOINT_SCHEMA_VERSION})",
                cp.schema_version
            )));
        }
        if cp.task != TASK {
            return Err(Error::Checkpoint(format!("task {:?} (expected {TASK:?})", cp.task)));
        }
        let [lo, hi] = cp.range;
        if !(lo <= cp.verified_up_to && cp.verified_up_to <= hi) {
            return Err(Error::Checkpoint(format!(
                "verified_up_to {} outside [{lo}, {hi}]",
                cp.verified_up_to
            )));
        }
        Ok(cp)
    }

    /// Writes a sibling temporary file and renames it over `path`, so readers
    /// see either the old or the new snapshot.
    pub fn save_atomic(&self, path: &Path) -> Result<()> {
        let mut tmp = path.as_os_str().to_owned();
        tmp.push(".tmp");
        let tmp = PathBuf::from(tmp);
        {
            let mut f = fs::File::create(&tmp)?;
            serde_json::to_writer_pretty(&mut f, self)?;
            f.write_all(b"\n")?;
            f.sync_all()?;
        }
        fs::rename(&tmp, path)?;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub lo: u64,
    pub hi: u64,
    pub budget: u64,
    pub chunk: u64,
    pub executor: Executor,
    pub checkpoint: Option<PathBuf>,
    pub resume: bool,
    /// Stop after this many chunks in this invocation, leaving the checkpoint
    /// behind as if the process had been killed.
    pub max_chunks: Option<u64>,
}

impl SweepConfig {
    pub fn new(lo: u64, hi: u64) -> Self {
        SweepConfig {
            lo,
            hi,
            budget: DEFAULT_BUDGET,
            chunk: DEFAULT_CHUNK,
            executor: Executor::sequential(),
            checkpoint: None,
            resume: false,
            max_chunks: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOutcome {
    pub report: RangeReport,
    pub stats: Option<SweepStats>,
    pub verified_up_to: Option<u64>,
    pub complete: bool,
}

impl SweepOutcome {
    /// The smallest value whose orbit ran out of budget.
    pub fn witness(&self) -> Option<&Nat> {
        self.report.inconclusive.first().map(|v| &v.x)
    }
}

struct Descent {
    steps: u64,
    landing: u64,
    peak: Nat,
}

fn now_secs() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Follows `T` from `n` until it reaches 1 or a value in `[lo, n)`.
fn descend(n: u64, lo: u64, budget: u64) -> Option<Descent> {
    let lands = |v: u64| v == 1 || (v < n && v >= lo);
    if n == 1 {
        return Some(Descent { steps: 0, landing: 1, peak: Nat::ONE });
    }
    let mut v = n;
    let mut peak = n;
    let mut steps = 0u64;
    while steps < budget {
        let next = if v.is_multiple_of(2) {
            Some(v / 2)
        } else {
            v.checked_mul(3).and_then(|t| t.checked_add(1)).map(|t| t / 2)
        };
        let Some(next) = next else {
            return descend_wide(n, lo, Nat::new(v), Nat::new(peak), steps, budget);
        };
        v = next;
        steps += 1;
        peak = peak.max(v);
        if lands(v) {
            return Some(Descent { steps, landing: v, peak: Nat::new(peak) });
        }
    }
    None
}

fn descend_wide(n: u64, lo: u64, mut v: Nat, mut peak: Nat, mut steps: u64, budget: u64) -> Option<Descent> {
    while steps < budget {
        v = map::step(&v).expect("orbit values are positive").0;
        steps += 1;
        if v > peak {
            peak = v.clone();
        }
        if let Some(small) = v.to_u64() {
            if small == 1 || (small < n && small >= lo) {
                return Some(Descent { steps, landing: small, peak });
            }
        }
    }
    None
}

/// Number of `T` steps from `n` to 1, or `None` past `budget`.
pub fn total_steps(n: u64, budget: u64) -> Option<u64> {
    // With the landing window empty, only 1 ends the descent.
    descend(n, u64::MAX, budget).map(|d| d.steps)
}

struct ChunkResult {
    block: Block,
    /// Local steps and landing value per `n`, until the first failure.
    descents: Vec<(u32, u64)>,
    best_peak: Option<(u64, Nat)>,
    failed_at: Option<u64>,
}

fn run_chunk(block: Block, lo: u64, budget: u64) -> ChunkResult {
    let (a, b) = block;
    let mut out = ChunkResult {
        block,
        descents: Vec::with_capacity((b - a + 1) as usize),
        best_peak: None,
        failed_at: None,
    };
    for n in a..=b {
        let Some(d) = descend(n, lo, budget) else {
            out.failed_at = Some(n);
            break;
        };
        let steps = u32::try_from(d.steps).expect("budget fits in u32 steps");
        out.descents.push((steps, d.landing));
        if out.best_peak.as_ref().is_none_or(|(_, p)| d.peak > *p) {
            out.best_peak = Some((n, d.peak));
        }
    }
    out
}

struct StepTable {
    base: u64,
    totals: Vec<u32>,
}

impl StepTable {
    fn get(&self, v: u64) -> Option<u64> {
        let i = v.checked_sub(self.base)?;
        self.totals.get(usize::try_from(i).ok()?).map(|&t| u64::from(t))
    }
}

pub fn run(config: &SweepConfig) -> Result<SweepOutcome> {
    let SweepConfig { lo, hi, budget, .. } = *config;
    if lo == 0 || lo > hi {
        return Err(Error::InvalidRange { lo, hi });
    }
    if budget > u64::from(u32::MAX) {
        return Err(Error::InvalidBudget(budget));
    }
    let started = Instant::now();

    let mut stats: Option<SweepStats> = None;
    let mut verified_up_to: Option<u64> = None;
    let mut checked = 0u64;
    if config.resume {
        let path = config
            .checkpoint
            .as_deref()
            .ok_or_else(|| Error::Checkpoint("resume requested without a checkpoint path".into()))?;
        let cp = Checkpoint::load(path)?;
        if cp.range != [lo, hi] {
            return Err(Error::Checkpoint(format!(
                "checkpoint covers [{}, {}], requested [{lo}, {hi}]",
                cp.range[0], cp.range[1]
            )));
        }
        if cp.budget != budget {
            return Err(Error::Checkpoint(format!(
                "checkpoint budget {} differs from requested {budget}",
                cp.budget
            )));
        }
        stats = Some(cp.stats);
        verified_up_to = Some(cp.verified_up_to);
        checked = cp.checked;
    }

    let start = verified_up_to.map_or(lo, |v| v + 1);
    let mut report = crate::facts::RangeReport::new("convergence", lo, hi);
    let mut table = StepTable {
        base: start,
        totals: Vec::new(),
    };
    let table_len = if start > hi { 0 } else { (hi - start + 1).min(TABLE_CAP) };
    table.totals.reserve(table_len as usize);

    let chunks = if start > hi {
        Vec::new()
    } else {
        exec::blocks(start, hi, config.chunk.max(1))
    };
    let allowed = config
        .max_chunks
        .map_or(chunks.len(), |m| chunks.len().min(usize::try_from(m).unwrap_or(usize::MAX)));
    let wave = (config.executor.workers() * CHUNKS_PER_WORKER).max(1);

    let mut failed = false;
    for wave_blocks in chunks[..allowed].chunks(wave) {
        let results = config.executor.map(wave_blocks, |&b| run_chunk(b, lo, budget));
        for res in results {
            let mut st = stats.take().unwrap_or_else(|| SweepStats::first(res.block.0));
            for (offset, &(local, landing)) in res.descents.iter().enumerate() {
                let n = res.block.0 + offset as u64;
                let rest = if landing == 1 {
                    Some(0)
                } else {
                    table.get(landing).or_else(|| total_steps(landing, budget))
                };
                let Some(rest) = rest else {
                    // A landing value was verified earlier, so this only happens if the
                    // budget changed between runs; treat it like any budget overrun.
                    report.inconclusive.push(Violation {
                        x: Nat::new(n),
                        detail: format!("total step count exceeds budget {budget}"),
                    });
                    failed = true;
                    break;
                };
                let total = u64::from(local) + rest;
                if (table.totals.len() as u64) < table_len && n == table.base + table.totals.len() as u64 {
                    table.totals.push(u32::try_from(total).unwrap_or(u32::MAX));
                }
                st.record_steps(n, total);
            }
            if let Some((n, peak)) = &res.best_peak {
                st.record_peak(*n, peak);
            }
            stats = Some(st);
            if failed {
                break;
            }
            if let Some(n) = res.failed_at {
                report.inconclusive.push(Violation {
                    x: Nat::new(n),
                    detail: format!("orbit did not reach 1 or a smaller verified value within {budget} steps"),
                });
                // Values before the failure in this chunk are sound, but the chunk is not.
                checked += res.descents.len() as u64;
                failed = true;
                break;
            }
            checked += res.block.1 - res.block.0 + 1;
            verified_up_to = Some(res.block.1);
        }
        if let (Some(path), Some(v), Some(st)) = (&config.checkpoint, verified_up_to, &stats) {
            Checkpoint {
                schema_version: CHECKPOINT_SCHEMA_VERSION,
                task: TASK.to_owned(),
                range: [lo, hi],
                budget,
                verified_up_to: v,
                checked,
                stats: st.clone(),
                timestamp: now_secs(),
            }
            .save_atomic(path)?;
        }
        if failed {
            break;
        }
    }

    report.checked = checked;
    report.elapsed = started.elapsed();
    let complete = !failed && verified_up_to == Some(hi);
    Ok(SweepOutcome {
        report,
        stats,
        verified_up_to,
        complete,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trajectory;

    #[test]
    fn single_value_27() {
        let out = run(&SweepConfig::new(27, 27)).unwrap();
        assert!(out.complete);
        let st = out.stats.unwrap();
        assert_eq!((st.max_steps, st.max_steps_at), (70, 27));
        assert_eq!((st.max_peak.clone(), st.max_peak_at), (Nat::new(4616), 27));
        assert_eq!(out.report.checked, 1);
    }

    #[test]
    fn stats_match_full_orbits() {
        // Oracle: full trajectories for every n in the range.
        for (lo, hi) in [(1u64, 3000u64), (500, 2500), (27, 27), (1, 1)] {
            let mut best_steps = (0u64, lo);
            let mut best_peak = (Nat::new(lo), lo);
            for n in lo..=hi {
                let t = trajectory::orbit(&Nat::new(n), 100_000, &Nat::ONE).unwrap();
                if t.steps > best_steps.0 {
                    best_steps = (t.steps, n);
                }
                if t.peak > best_peak.0 {
                    best_peak = (t.peak.clone(), n);
                }
            }
            let mut cfg = SweepConfig::new(lo, hi);
            cfg.chunk = 97;
            let st = run(&cfg).unwrap().stats.unwrap();
            assert_eq!((st.max_steps, st.max_steps_at), best_steps, "[{lo}, {hi}]");
            assert_eq!((st.max_peak, st.max_peak_at), best_peak, "[{lo}, {hi}]");
        }
    }

    #[test]
    fn total_steps_matches_orbit() {
        for n in 1..2000u64 {
            let t = trajectory::orbit(&Nat::new(n), 100_000, &Nat::ONE).unwrap();
            assert_eq!(total_steps(n, 100_000), Some(t.steps));
        }
        assert_eq!(total_steps(27, 10), None);
    }

    #[test]
    fn budget_overrun_reports_witness() {
        let mut cfg = SweepConfig::new(1, 100);
        cfg.budget = 20;
        cfg.chunk = 10;
        let out = run(&cfg).unwrap();
        assert!(!out.complete);
        assert!(out.report.violations.is_empty());
        // 27 is the first n <= 100 that needs more than 20 steps to drop below itself.
        assert_eq!(out.witness(), Some(&Nat::new(27)));
        assert_eq!(out.verified_up_to, Some(20));
    }

    #[test]
    fn invalid_ranges() {
        assert!(run(&SweepConfig::new(0, 5)).is_err());
        assert!(run(&SweepConfig::new(6, 5)).is_err());
        let mut cfg = SweepConfig::new(1, 5);
        cfg.resume = true;
        assert!(matches!(run(&cfg), Err(Error::Checkpoint(_))));
    }

    #[test]
    fn descend_escalates_past_u64() {
        let n = u64::MAX;
        let d = descend(n, 1, 100_000).unwrap();
        assert!(d.peak.to_u64().is_none());
        assert!(d.landing < n);
    }
}
