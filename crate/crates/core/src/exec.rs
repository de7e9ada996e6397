//! Plan evaluation with instrumented visit counters.
//!
//! Two prescribed paths evaluate the same query class:
//!
//! * [`eval_no_index`] — the literal multi-document traversal. For every
//!   cell and every dimension child of that cell, the dimension data is
//!   searched from scratch: all `Level` entries are inspected, then every
//!   member of the matching dimension together with all of its attributes.
//!   No memoization, no early exit; this is deliberately the naive
//!   baseline so that its counters equal the closed-form cost exactly.
//! * [`eval_with_index`] — a single pass over the join index. Per cell,
//!   the dimension children are scanned once and only the embedded
//!   attributes of dimensions the query references are read. The
//!   dimension data is never touched (the function does not receive it).
//!
//! # Counting convention
//!
//! A "visit" is the inspection of one conceptual document element, counted
//! per element kind in [`StepCounter`]:
//!
//! * `cell_visits` — `Cell` elements entered (both paths).
//! * `dimension_child_visits` — `dimension` elements inspected inside
//!   cells (both paths; the index path scans all of them per cell).
//! * `level_visits` — `Level` entries inspected in the dimension data
//!   (join path only; all `D` per search, no early exit).
//! * `member_visits` — members whose attribute lists were entered
//!   (join path only).
//! * `attribute_visits` — attribute elements inspected: member attributes
//!   on the join path, cell-embedded attributes on the index path.
//!   Attribute lists are always scanned to the end.
//!
//! The closed-form costs count the work specific to each traversal:
//! [`StepCounter::join_traversal_visits`] (`level + attribute`) for the
//! join path and [`StepCounter::index_scan_visits`]
//! (`dimension_child + attribute`) for the index path. On a uniform
//! warehouse (D dimensions, d members each, a attributes each) and a query
//! constraining a single dimension these equal
//! `cells * D * (D + d*a)` and `cells * (D + a)` exactly.
//!
//! Group keys are attribute value strings; rows are canonically ordered by
//! key. Aggregates are computed in `f64`, accumulating in cell order, so
//! the two paths produce bit-identical tables.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use hashbrown::HashMap;

use crate::index::JoinIndex;
use crate::model::Warehouse;
use crate::query::{AggOp, BoundQuery, Plan, Query};

/// Element-visit counters for one evaluation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepCounter {
    pub level_visits: u64,
    pub member_visits: u64,
    pub attribute_visits: u64,
    pub cell_visits: u64,
    pub dimension_child_visits: u64,
}

impl StepCounter {
    /// Visits the join-path cost formula counts: dimension-side work
    /// (`Level` scans plus member attribute scans), re-done per cell and
    /// per dimension child.
    pub fn join_traversal_visits(&self) -> u64 {
        self.level_visits + self.attribute_visits
    }

    /// Visits the index-path cost formula counts: per-cell scan work below
    /// the `Cell` level (dimension children plus embedded attributes).
    pub fn index_scan_visits(&self) -> u64 {
        self.dimension_child_visits + self.attribute_visits
    }

    /// Every counter summed.
    pub fn total(&self) -> u64 {
        self.level_visits
            + self.member_visits
            + self.attribute_visits
            + self.cell_visits
            + self.dimension_child_visits
    }
}

/// Aggregation results for one query: group-key columns followed by one
/// column per aggregation, rows sorted by key.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub columns: Vec<String>,
    pub rows: Vec<ResultRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub key: Vec<String>,
    pub values: Vec<f64>,
}

impl ResultTable {
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

impl fmt::Display for ResultTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.columns.join(","))?;
        for row in &self.rows {
            for (i, k) in row.key.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                f.write_str(k)?;
            }
            for (i, v) in row.values.iter().enumerate() {
                if i > 0 || !row.key.is_empty() {
                    f.write_str(",")?;
                }
                write!(f, "{v}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExecError {
    /// The bound query does not match the evaluated schema.
    SchemaMismatch { detail: String },
    /// [`eval_with_index`] was handed a join plan.
    NotAnIndexPlan,
}

impl fmt::Display for ExecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExecError::SchemaMismatch { detail } => write!(f, "schema mismatch: {detail}"),
            ExecError::NotAnIndexPlan => write!(f, "plan is not an index plan"),
        }
    }
}

impl core::error::Error for ExecError {}

/// Applies one aggregation over the collected values of a group.
///
/// `count` reports the number of values (one per qualifying cell); `avg`
/// is `sum / count` in `f64`. Empty inputs yield 0 for every operation —
/// executor groups always carry at least one value, so this case only
/// arises when calling the function directly.
pub fn aggregate(op: AggOp, values: &[f64]) -> f64 {
    match op {
        AggOp::Count => values.len() as f64,
        AggOp::Sum => values.iter().sum(),
        AggOp::Avg => {
            if values.is_empty() {
                0.0
            } else {
                values.iter().sum::<f64>() / values.len() as f64
            }
        }
        AggOp::Min => fold_extreme(values, |a, b| b < a),
        AggOp::Max => fold_extreme(values, |a, b| b > a),
    }
}

fn fold_extreme(values: &[f64], replace: impl Fn(f64, f64) -> bool) -> f64 {
    let mut iter = values.iter().copied();
    let Some(first) = iter.next() else { return 0.0 };
    let mut acc = first;
    for v in iter {
        if replace(acc, v) {
            acc = v;
        }
    }
    acc
}

/// Shared grouping machinery: collects per-group value vectors in cell
/// order, then finishes through [`aggregate`] with rows in canonical
/// (lexicographic key) order.
struct Grouper<'q> {
    query: &'q Query,
    groups: BTreeMap<Vec<String>, Vec<Vec<f64>>>,
}

impl<'q> Grouper<'q> {
    fn new(query: &'q Query) -> Self {
        Grouper {
            query,
            groups: BTreeMap::new(),
        }
    }

    /// Records one qualifying cell: its group key and its measure list.
    fn push(&mut self, key: Vec<String>, measures: &[(String, f64)]) {
        let aggs = &self.query.aggregations;
        let slot = self
            .groups
            .entry(key)
            .or_insert_with(|| alloc::vec![Vec::new(); aggs.len()]);
        for (i, agg) in aggs.iter().enumerate() {
            match agg.op {
                // One marker per cell; count must see cell multiplicity
                // even if the measure is absent from this cell.
                AggOp::Count => slot[i].push(1.0),
                _ => {
                    if let Some(&(_, v)) = measures.iter().find(|(m, _)| *m == agg.measure) {
                        slot[i].push(v);
                    }
                }
            }
        }
    }

    fn finish(self) -> ResultTable {
        let mut columns: Vec<String> = self
            .query
            .group_by
            .iter()
            .map(|g| alloc::format!("{}.{}", g.dimension, g.attribute))
            .collect();
        columns.extend(self.query.aggregations.iter().map(|a| a.label()));
        let rows = self
            .groups
            .into_iter()
            .map(|(key, values)| ResultRow {
                key,
                values: self
                    .query
                    .aggregations
                    .iter()
                    .zip(&values)
                    .map(|(agg, vals)| aggregate(agg.op, vals))
                    .collect(),
            })
            .collect();
        ResultTable { columns, rows }
    }
}

fn check_bound_against(bound: &BoundQuery, schema: &crate::model::SchemaMeta) -> Result<(), ExecError> {
    let q = bound.query();
    for (agg, &pos) in q.aggregations.iter().zip(bound.measure_positions()) {
        if schema.measures.get(pos).map(String::as_str) != Some(agg.measure.as_str()) {
            return Err(ExecError::SchemaMismatch {
                detail: alloc::format!("measure {:?} not at bound position", agg.measure),
            });
        }
    }
    let check_pair = |dimension: &str, attribute: &str, pos: (usize, usize)| {
        let dim = schema.dimensions.get(pos.0);
        match dim {
            Some(d) if d.name == dimension => {
                if d.attribute_names.get(pos.1).map(String::as_str) == Some(attribute) {
                    Ok(())
                } else {
                    Err(ExecError::SchemaMismatch {
                        detail: alloc::format!("attribute {dimension:?}.{attribute:?} not at bound position"),
                    })
                }
            }
            _ => Err(ExecError::SchemaMismatch {
                detail: alloc::format!("dimension {dimension:?} not at bound position"),
            }),
        }
    };
    for (p, &pos) in q.predicates.iter().zip(bound.predicate_positions()) {
        check_pair(&p.dimension, &p.attribute, pos)?;
    }
    for (g, &pos) in q.group_by.iter().zip(bound.group_positions()) {
        check_pair(&g.dimension, &g.attribute, pos)?;
    }
    Ok(())
}

/// What a query needs from one dimension: predicate checks (by predicate
/// ordinal) and group-key reads (by key slot). Resolved once per
/// evaluation so the scan loops carry no per-cell lookup structures.
#[derive(Default)]
struct DimInterest<'q> {
    preds: Vec<(usize, &'q str, &'q str)>,
    groups: Vec<(usize, &'q str)>,
}

fn interests_by_name<'q>(query: &'q Query, names: &mut Vec<&'q str>) -> Vec<DimInterest<'q>> {
    let mut interests: Vec<DimInterest<'q>> = Vec::new();
    let slot = |names: &mut Vec<&'q str>, interests: &mut Vec<DimInterest<'q>>, name| {
        match names.iter().position(|n| *n == name) {
            Some(i) => i,
            None => {
                names.push(name);
                interests.push(DimInterest::default());
                names.len() - 1
            }
        }
    };
    for (i, p) in query.predicates.iter().enumerate() {
        let at = slot(names, &mut interests, p.dimension.as_str());
        interests[at]
            .preds
            .push((i, p.attribute.as_str(), p.value.as_str()));
    }
    for (i, g) in query.group_by.iter().enumerate() {
        let at = slot(names, &mut interests, g.dimension.as_str());
        interests[at].groups.push((i, g.attribute.as_str()));
    }
    interests
}

/// Evaluates the query against the source documents with the literal
/// per-cell join traversal (see module docs for the procedure and its
/// counters). The warehouse must validate cleanly; cells whose references
/// cannot be resolved are skipped.
pub fn eval_no_index(
    bound: &BoundQuery,
    warehouse: &Warehouse,
) -> Result<(ResultTable, StepCounter), ExecError> {
    check_bound_against(bound, warehouse.schema())?;
    let query = bound.query();
    let dims = warehouse.dimensions();
    let mut counter = StepCounter::default();
    let mut grouper = Grouper::new(query);

    // Predicate and group-key interest per warehouse dimension position.
    let mut interests: Vec<DimInterest<'_>> = (0..dims.len()).map(|_| DimInterest::default()).collect();
    // A predicate on a dimension with no Level in the data can never match.
    let mut unsatisfiable = false;
    for (i, p) in query.predicates.iter().enumerate() {
        match dims.iter().position(|(n, _)| *n == p.dimension) {
            Some(at) => interests[at]
                .preds
                .push((i, p.attribute.as_str(), p.value.as_str())),
            None => unsatisfiable = true,
        }
    }
    for (i, g) in query.group_by.iter().enumerate() {
        if let Some(at) = dims.iter().position(|(n, _)| *n == g.dimension) {
            interests[at].groups.push((i, g.attribute.as_str()));
        }
    }

    let mut pred_sat = vec![false; query.predicates.len()];
    let mut group_parts: Vec<&str> = vec![""; query.group_by.len()];

    for cell in warehouse.facts() {
        counter.cell_visits += 1;
        let mut cell_ok = true;
        pred_sat.fill(false);
        group_parts.fill("");

        for (dim_name, member_id) in &cell.dim_refs {
            counter.dimension_child_visits += 1;

            // The naive engine re-derives the member for this child by
            // searching the dimension document: every Level entry is
            // inspected, then the matching dimension's members and all of
            // their attributes.
            let mut dim_pos = None;
            for (i, (name, _)) in dims.iter().enumerate() {
                counter.level_visits += 1;
                if name == dim_name {
                    dim_pos = Some(i);
                }
            }
            let Some(dim_pos) = dim_pos else { continue };
            let interest = &interests[dim_pos];
            let mut target_found = false;
            for member in &dims[dim_pos].1 {
                counter.member_visits += 1;
                counter.attribute_visits += member.attributes.len() as u64;
                if member.member_id == *member_id {
                    target_found = true;
                    for &(pi, attr, value) in &interest.preds {
                        pred_sat[pi] = member.attribute(attr) == Some(value);
                    }
                    for &(slot, attr) in &interest.groups {
                        group_parts[slot] = member.attribute(attr).unwrap_or("");
                    }
                }
            }
            if !target_found {
                cell_ok = false;
            }
        }

        if !cell_ok || unsatisfiable || !pred_sat.iter().all(|&s| s) {
            continue;
        }
        let key = group_parts.iter().map(|p| p.to_string()).collect();
        grouper.push(key, &cell.measures);
    }

    Ok((grouper.finish(), counter))
}

/// Evaluates an index plan with one pass over the join index. Per cell all
/// dimension children are scanned; embedded attribute lists are read only
/// for dimensions the query references. The source dimension data is never
/// consulted.
pub fn eval_with_index(
    plan: &Plan,
    index: &JoinIndex,
) -> Result<(ResultTable, StepCounter), ExecError> {
    let Plan::Index(bound) = plan else {
        return Err(ExecError::NotAnIndexPlan);
    };
    check_bound_against(bound, &index.schema)?;
    let query = bound.query();
    let mut counter = StepCounter::default();
    let mut grouper = Grouper::new(query);

    // Dimensions the query references, with their predicate checks and
    // group-key reads.
    let mut needed_names: Vec<&str> = Vec::new();
    let needs = interests_by_name(query, &mut needed_names);

    let mut pred_sat = vec![false; query.predicates.len()];
    let mut group_parts: Vec<&str> = vec![""; query.group_by.len()];

    for cell in &index.cells {
        counter.cell_visits += 1;
        pred_sat.fill(false);
        group_parts.fill("");

        for dim in &cell.dims {
            counter.dimension_child_visits += 1;
            let Some(at) = needed_names.iter().position(|n| *n == dim.dimension) else {
                continue;
            };
            // Full scan of the embedded attribute list; predicates and
            // group keys read the cell's own data, never the dimension
            // documents.
            counter.attribute_visits += dim.attributes.len() as u64;
            let need = &needs[at];
            for &(pi, attr, value) in &need.preds {
                pred_sat[pi] = dim
                    .attributes
                    .iter()
                    .find(|(n, _)| n == attr)
                    .map(|(_, v)| v.as_str())
                    == Some(value);
            }
            for &(slot, attr) in &need.groups {
                group_parts[slot] = dim
                    .attributes
                    .iter()
                    .find(|(n, _)| n == attr)
                    .map(|(_, v)| v.as_str())
                    .unwrap_or("");
            }
        }

        if !pred_sat.iter().all(|&s| s) {
            continue;
        }
        let key = group_parts.iter().map(|p| p.to_string()).collect();
        grouper.push(key, &cell.measures);
    }

    Ok((grouper.finish(), counter))
}

/// Join-path evaluation with memoized dimension matching: each referenced
/// dimension is resolved once through the warehouse's member tables
/// instead of being re-searched per cell. Not the procedure the cost
/// formulas model — provided as an engineering baseline for wall-clock
/// comparisons. Results are identical to [`eval_no_index`].
pub fn eval_no_index_memoized(
    bound: &BoundQuery,
    warehouse: &Warehouse,
) -> Result<(ResultTable, StepCounter), ExecError> {
    check_bound_against(bound, warehouse.schema())?;
    let query = bound.query();
    let mut counter = StepCounter::default();
    let mut grouper = Grouper::new(query);

    // One pass over each referenced dimension builds member_id ->
    // (predicate outcomes, group values); the cell scan then only does
    // hash lookups. Counters here are informational (build work is counted
    // once), not modelled by the closed-form costs.
    let mut needed_names: Vec<&str> = Vec::new();
    let needs = interests_by_name(query, &mut needed_names);
    struct Memo<'w> {
        by_id: HashMap<&'w str, (Vec<(usize, bool)>, Vec<(usize, &'w str)>)>,
    }
    let memos: Vec<Memo<'_>> = needed_names
        .iter()
        .zip(&needs)
        .map(|(name, need)| {
            let mut by_id = HashMap::new();
            if let Some(members) = warehouse.members(name) {
                counter.level_visits += 1;
                for member in members {
                    counter.member_visits += 1;
                    counter.attribute_visits += member.attributes.len() as u64;
                    let preds = need
                        .preds
                        .iter()
                        .map(|&(pi, attr, value)| (pi, member.attribute(attr) == Some(value)))
                        .collect();
                    let groups = need
                        .groups
                        .iter()
                        .map(|&(slot, attr)| (slot, member.attribute(attr).unwrap_or("")))
                        .collect();
                    by_id.insert(member.member_id.as_str(), (preds, groups));
                }
            }
            Memo { by_id }
        })
        .collect();

    let mut pred_sat = vec![false; query.predicates.len()];
    let mut group_parts: Vec<&str> = vec![""; query.group_by.len()];

    for cell in warehouse.facts() {
        counter.cell_visits += 1;
        pred_sat.fill(false);
        group_parts.fill("");

        for (dim_name, member_id) in &cell.dim_refs {
            let Some(at) = needed_names.iter().position(|n| *n == dim_name.as_str()) else {
                continue;
            };
            counter.dimension_child_visits += 1;
            if let Some((preds, groups)) = memos[at].by_id.get(member_id.as_str()) {
                for &(pi, ok) in preds {
                    pred_sat[pi] = ok;
                }
                for &(slot, value) in groups {
                    group_parts[slot] = value;
                }
            }
        }

        if !pred_sat.iter().all(|&s| s) {
            continue;
        }
        let key = group_parts.iter().map(|p| p.to_string()).collect();
        grouper.push(key, &cell.measures);
    }

    Ok((grouper.finish(), counter))
}
