//! Wall-clock benchmark harness: per-query with/without-index timing over
//! one warehouse, and size sweeps that regenerate the warehouse per cell
//! count.
//!
//! Before anything is timed, both paths are evaluated once and their
//! tables compared; a mismatch aborts the benchmark. That check run also
//! serves as the warm-up. Each reported time is the median of `runs`
//! samples on a monotonic clock; a sample repeats the evaluation until at
//! least five milliseconds elapsed and reports the per-evaluation mean, so
//! short queries are still measured stably.
//!
//! Alongside the literal baseline the harness times a memoized join
//! evaluation (member lookup through hash tables instead of per-cell
//! document re-scans). The closed-form costs do not model it; it is
//! reported separately as an engineering reference.

use std::time::{Duration, Instant};

use thiserror::Error;

use xcube_core::exec::{eval_no_index, eval_no_index_memoized, eval_with_index, ExecError};
use xcube_core::gen::{generate, GenProfile, ProfileError};
use xcube_core::index::{build_index, DanglingRef, JoinIndex};
use xcube_core::model::Warehouse;
use xcube_core::query::{
    bind, rewrite_for_index, AggOp, Aggregation, BindError, GroupKey, Plan, Predicate, Query,
};

#[derive(Debug, Clone)]
pub struct Workload {
    pub id: String,
    pub query: Query,
}

impl Workload {
    pub fn new(id: impl Into<String>, query: Query) -> Self {
        Workload {
            id: id.into(),
            query,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchEntry {
    pub cells: u64,
    pub query_id: String,
    pub t_noindex_ms: f64,
    pub t_index_ms: f64,
    /// Memoized join baseline; not part of the cost model.
    pub t_noindex_memo_ms: f64,
    pub speedup: f64,
    pub visits_noindex: u64,
    pub visits_index: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnvInfo {
    pub os: &'static str,
    pub arch: &'static str,
    pub runs: usize,
}

impl EnvInfo {
    fn current(runs: usize) -> Self {
        EnvInfo {
            os: std::env::consts::OS,
            arch: std::env::consts::ARCH,
            runs,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub cells: u64,
    pub entries: Vec<BenchEntry>,
    pub env: EnvInfo,
    /// Non-fatal timing-environment notes (e.g. measurements close to the
    /// clock resolution).
    pub warnings: Vec<String>,
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("results differ between join and index paths for query {query_id:?}")]
    ResultMismatch { query_id: String },
    #[error("at least 3 runs required, got {0}")]
    TooFewRuns(usize),
    #[error("size sweep needs at least one cell count")]
    EmptySweep,
    #[error("size sweep cell counts must be strictly ascending")]
    UnsortedSweep,
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error("query {query_id:?}: {source}")]
    Bind {
        query_id: String,
        source: BindError,
    },
    #[error(transparent)]
    Exec(#[from] ExecError),
    #[error(transparent)]
    Index(#[from] DanglingRef),
}

const MIN_SAMPLE: Duration = Duration::from_millis(5);

/// One timing sample: mean per-evaluation milliseconds over enough
/// repetitions to fill [`MIN_SAMPLE`].
fn sample_ms(mut eval: impl FnMut()) -> f64 {
    let start = Instant::now();
    eval();
    let first = start.elapsed();
    if first >= MIN_SAMPLE {
        return first.as_secs_f64() * 1e3;
    }
    let reps = (MIN_SAMPLE.as_secs_f64() / first.as_secs_f64().max(1e-9)).ceil() as u64;
    let reps = reps.clamp(1, 100_000);
    let start = Instant::now();
    for _ in 0..reps {
        eval();
    }
    start.elapsed().as_secs_f64() * 1e3 / reps as f64
}

fn median_of(runs: usize, mut eval: impl FnMut()) -> f64 {
    let mut samples: Vec<f64> = (0..runs).map(|_| sample_ms(&mut eval)).collect();
    samples.sort_by(|a, b| a.total_cmp(b));
    let mid = samples.len() / 2;
    if samples.len() % 2 == 1 {
        samples[mid]
    } else {
        (samples[mid - 1] + samples[mid]) / 2.0
    }
}

/// Times every workload query over both paths. The index must have been
/// built from the warehouse; result equality between the paths is checked
/// before timing and a mismatch aborts with [`BenchError::ResultMismatch`].
pub fn run_bench(
    warehouse: &Warehouse,
    index: &JoinIndex,
    workload: &[Workload],
    runs: usize,
) -> Result<BenchReport, BenchError> {
    if runs < 3 {
        return Err(BenchError::TooFewRuns(runs));
    }
    let cells = warehouse.facts().len() as u64;
    let mut entries = Vec::with_capacity(workload.len());
    let mut warnings = Vec::new();

    for item in workload {
        let bound = bind(&item.query, warehouse.schema()).map_err(|source| BenchError::Bind {
            query_id: item.id.clone(),
            source,
        })?;
        let plan: Plan = rewrite_for_index(bound.clone());

        // Correctness gate doubling as warm-up.
        let (join_table, join_counter) = eval_no_index(&bound, warehouse)?;
        let (index_table, index_counter) = eval_with_index(&plan, index)?;
        let (memo_table, _) = eval_no_index_memoized(&bound, warehouse)?;
        if join_table != index_table || join_table != memo_table {
            return Err(BenchError::ResultMismatch {
                query_id: item.id.clone(),
            });
        }

        let t_noindex_ms = median_of(runs, || {
            let _ = eval_no_index(&bound, warehouse).unwrap();
        });
        let t_index_ms = median_of(runs, || {
            let _ = eval_with_index(&plan, index).unwrap();
        });
        let t_noindex_memo_ms = median_of(runs, || {
            let _ = eval_no_index_memoized(&bound, warehouse).unwrap();
        });

        if t_index_ms < 1e-4 || t_noindex_ms < 1e-4 {
            warnings.push(format!(
                "query {:?}: measurements are close to the clock resolution; \
                 treat the speedup as indicative only",
                item.id
            ));
        }

        entries.push(BenchEntry {
            cells,
            query_id: item.id.clone(),
            t_noindex_ms,
            t_index_ms,
            t_noindex_memo_ms,
            speedup: t_noindex_ms / t_index_ms,
            visits_noindex: join_counter.join_traversal_visits(),
            visits_index: index_counter.index_scan_visits(),
        });
    }

    Ok(BenchReport {
        cells,
        entries,
        env: EnvInfo::current(runs),
        warnings,
    })
}

/// The default workload: one aggregation over the first measure with an
/// equality predicate on the first dimension, grouped by that dimension's
/// second attribute when it has one. The predicate value is read from the
/// first member so it selects a non-empty slice of the data.
pub fn default_workload(warehouse: &Warehouse) -> Vec<Workload> {
    let schema = warehouse.schema();
    let Some(measure) = schema.measures.first() else {
        return Vec::new();
    };
    let aggregations = vec![Aggregation {
        op: AggOp::Sum,
        measure: measure.clone(),
    }];

    let probed = schema.dimensions.iter().find_map(|def| {
        let attr = def.attribute_names.first()?;
        let members = warehouse.members(&def.name)?;
        let value = members.first()?.attribute(attr)?;
        Some((def, attr.clone(), value.to_string()))
    });

    let (predicates, group_by) = match probed {
        Some((def, attr, value)) => {
            let predicates = vec![Predicate {
                dimension: def.name.clone(),
                attribute: attr,
                value,
            }];
            let group_by = def
                .attribute_names
                .get(1)
                .map(|a| {
                    vec![GroupKey {
                        dimension: def.name.clone(),
                        attribute: a.clone(),
                    }]
                })
                .unwrap_or_default();
            (predicates, group_by)
        }
        None => (Vec::new(), Vec::new()),
    };

    vec![Workload::new(
        "q1",
        Query {
            aggregations,
            predicates,
            group_by,
        },
    )]
}

/// Generates, indexes and benchmarks one warehouse per cell count,
/// rescaling the profile's dimensions with the cell count (the whole
/// warehouse grows, as a size sweep implies). With no explicit workload
/// the [`default_workload`] of each generated warehouse is used.
pub fn size_sweep(
    profile: &GenProfile,
    cell_counts: &[u64],
    workload: Option<&[Workload]>,
    runs: usize,
) -> Result<Vec<BenchReport>, BenchError> {
    if cell_counts.is_empty() {
        return Err(BenchError::EmptySweep);
    }
    if cell_counts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(BenchError::UnsortedSweep);
    }
    let mut reports = Vec::with_capacity(cell_counts.len());
    for &cells in cell_counts {
        let scaled = profile.scaled_to_cells(cells);
        let warehouse = generate(&scaled)?;
        let index = build_index(&warehouse)?;
        let derived;
        let work = match workload {
            Some(w) => w,
            None => {
                derived = default_workload(&warehouse);
                &derived
            }
        };
        reports.push(run_bench(&warehouse, &index, work, runs)?);
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use xcube_core::query::parse_query;

    fn small_warehouse() -> Warehouse {
        generate(&GenProfile::uniform(3, 10, 2, 200)).unwrap()
    }

    #[test]
    fn bench_reports_positive_speedup_and_counters() {
        let wh = small_warehouse();
        let index = build_index(&wh).unwrap();
        let workload = default_workload(&wh);
        let report = run_bench(&wh, &index, &workload, 3).unwrap();
        assert_eq!(report.entries.len(), 1);
        let e = &report.entries[0];
        assert!(e.speedup > 0.0);
        assert!(e.t_noindex_ms > 0.0 && e.t_index_ms > 0.0);
        assert_eq!(e.cells, 200);
        // Counter cross-check: uniform D=3, d=10, a=2, one query dimension.
        assert_eq!(e.visits_noindex, 200 * 3 * (3 + 10 * 2));
        assert_eq!(e.visits_index, 200 * (3 + 2));
    }

    #[test]
    fn empty_workload_is_empty_report() {
        let wh = small_warehouse();
        let index = build_index(&wh).unwrap();
        let report = run_bench(&wh, &index, &[], 3).unwrap();
        assert!(report.entries.is_empty());
    }

    #[test]
    fn too_few_runs_is_rejected() {
        let wh = small_warehouse();
        let index = build_index(&wh).unwrap();
        assert!(matches!(
            run_bench(&wh, &index, &[], 2),
            Err(BenchError::TooFewRuns(2))
        ));
    }

    #[test]
    fn mismatched_index_aborts() {
        let wh = small_warehouse();
        // Index built from a warehouse with different data.
        let other = generate(&GenProfile::uniform(3, 10, 2, 200).with_seed(9)).unwrap();
        let index = build_index(&other).unwrap();
        let workload = default_workload(&wh);
        assert!(matches!(
            run_bench(&wh, &index, &workload, 3),
            Err(BenchError::ResultMismatch { .. })
        ));
    }

    #[test]
    fn sweep_validates_arguments() {
        let p = GenProfile::uniform(2, 5, 2, 100);
        assert!(matches!(
            size_sweep(&p, &[], None, 3),
            Err(BenchError::EmptySweep)
        ));
        assert!(matches!(
            size_sweep(&p, &[100, 100], None, 3),
            Err(BenchError::UnsortedSweep)
        ));
        let reports = size_sweep(&p, &[50], None, 3).unwrap();
        assert_eq!(reports.len(), 1);
    }

    #[test]
    fn user_workload_binds_per_size() {
        let p = GenProfile::uniform(2, 5, 2, 100);
        let q = parse_query("select count(quantity) from facts").unwrap();
        let w = vec![Workload::new("count", q)];
        let reports = size_sweep(&p, &[20, 40], Some(&w), 3).unwrap();
        assert_eq!(reports.len(), 2);
        assert_eq!(reports[0].entries[0].query_id, "count");
    }
}
