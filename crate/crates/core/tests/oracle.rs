//! Independent brute-force join oracle, and the information-preservation
//! property: for every valid warehouse and every query in the grammar,
//! the join path, the index path and the memoized baseline all agree with
//! the oracle.
//!
//! The oracle shares no traversal or grouping code with the evaluators:
//! it resolves members by linear search over the public dimension data and
//! aggregates through its own arithmetic (same value order, so results
//! must match bit for bit).

mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;

use xcube_core::exec::{eval_no_index, eval_no_index_memoized, eval_with_index, ResultTable};
use xcube_core::gen::{generate, DimProfile, GenProfile};
use xcube_core::index::build_index;
use xcube_core::model::{validate, DimensionMember, Warehouse};
use xcube_core::query::{bind, parse_query, rewrite_for_index, AggOp, Aggregation, GroupKey, Predicate, Query};

fn find_member<'a>(wh: &'a Warehouse, dimension: &str, id: &str) -> Option<&'a DimensionMember> {
    wh.dimensions()
        .iter()
        .find(|(n, _)| n == dimension)
        .and_then(|(_, members)| members.iter().find(|m| m.member_id == id))
}

/// Nested-loop reference evaluation; returns canonical (key, values) rows.
fn oracle_eval(query: &Query, wh: &Warehouse) -> Vec<(Vec<String>, Vec<f64>)> {
    let mut groups: BTreeMap<Vec<String>, Vec<Vec<f64>>> = BTreeMap::new();
    'cells: for cell in wh.facts() {
        for p in &query.predicates {
            let matched = cell
                .dim_ref(&p.dimension)
                .and_then(|id| find_member(wh, &p.dimension, id))
                .and_then(|m| m.attribute(&p.attribute))
                == Some(p.value.as_str());
            if !matched {
                continue 'cells;
            }
        }
        let key: Vec<String> = query
            .group_by
            .iter()
            .map(|g| {
                cell.dim_ref(&g.dimension)
                    .and_then(|id| find_member(wh, &g.dimension, id))
                    .and_then(|m| m.attribute(&g.attribute))
                    .unwrap_or("")
                    .to_string()
            })
            .collect();
        let slot = groups
            .entry(key)
            .or_insert_with(|| vec![Vec::new(); query.aggregations.len()]);
        for (i, agg) in query.aggregations.iter().enumerate() {
            match agg.op {
                AggOp::Count => slot[i].push(1.0),
                _ => {
                    if let Some(v) = cell.measure(&agg.measure) {
                        slot[i].push(v);
                    }
                }
            }
        }
    }

    groups
        .into_iter()
        .map(|(key, per_agg)| {
            let values = query
                .aggregations
                .iter()
                .zip(&per_agg)
                .map(|(agg, vals)| match agg.op {
                    AggOp::Count => vals.len() as f64,
                    AggOp::Sum => vals.iter().sum(),
                    AggOp::Avg => {
                        if vals.is_empty() {
                            0.0
                        } else {
                            vals.iter().sum::<f64>() / vals.len() as f64
                        }
                    }
                    AggOp::Min => vals.iter().copied().fold(f64::INFINITY, f64::min),
                    AggOp::Max => vals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                })
                .map(|v| if v.is_finite() { v } else { 0.0 })
                .collect();
            (key, values)
        })
        .collect()
}

fn assert_table_matches(table: &ResultTable, expected: &[(Vec<String>, Vec<f64>)]) {
    let got: Vec<(Vec<String>, Vec<f64>)> = table
        .rows
        .iter()
        .map(|r| (r.key.clone(), r.values.clone()))
        .collect();
    assert_eq!(got, expected);
}

fn eval_three_ways(query: &Query, wh: &Warehouse) -> (ResultTable, ResultTable, ResultTable) {
    let bound = bind(query, wh.schema()).expect("query must bind");
    let (join_table, _) = eval_no_index(&bound, wh).unwrap();
    let (memo_table, _) = eval_no_index_memoized(&bound, wh).unwrap();
    let index = build_index(wh).unwrap();
    let (index_table, _) = eval_with_index(&rewrite_for_index(bound), &index).unwrap();
    (join_table, memo_table, index_table)
}

#[test]
fn q1_on_w3_matches_frozen_oracle_result() {
    let wh = common::w3();
    let q = parse_query(
        "select sum(quantity) from facts where customers.cust_city = \"Lyon\" group by customers.cust_name",
    )
    .unwrap();

    // Frozen from the oracle: cells 1 and 3 match Lyon, 3 + 7 = 10.
    let expected = vec![(vec!["Ada".to_string()], vec![10.0])];
    assert_eq!(oracle_eval(&q, &wh), expected);

    let (join_table, memo_table, index_table) = eval_three_ways(&q, &wh);
    assert_table_matches(&join_table, &expected);
    assert_table_matches(&memo_table, &expected);
    assert_table_matches(&index_table, &expected);
}

#[test]
fn unmatched_predicate_is_empty_everywhere() {
    let wh = common::w3();
    let q = parse_query("select sum(quantity) from facts where customers.cust_city = \"Oslo\"")
        .unwrap();
    assert!(oracle_eval(&q, &wh).is_empty());
    let (join_table, memo_table, index_table) = eval_three_ways(&q, &wh);
    assert!(join_table.is_empty() && memo_table.is_empty() && index_table.is_empty());
}

#[test]
fn global_count_is_three() {
    let wh = common::w3();
    let q = parse_query("select count(quantity) from facts").unwrap();
    let expected = vec![(vec![], vec![3.0])];
    assert_eq!(oracle_eval(&q, &wh), expected);
    let (join_table, memo_table, index_table) = eval_three_ways(&q, &wh);
    assert_table_matches(&join_table, &expected);
    assert_table_matches(&memo_table, &expected);
    assert_table_matches(&index_table, &expected);
}

fn arb_profile() -> impl Strategy<Value = GenProfile> {
    (
        2usize..=5,
        proptest::collection::vec((1u64..=10, 1u32..=4), 5),
        0u64..=60,
        2u32..=6,
        any::<u64>(),
    )
        .prop_map(|(dims, shapes, cells, pool, seed)| GenProfile {
            fact_name: "sales".into(),
            measures: vec!["amount".into(), "quantity".into()],
            dimensions: shapes
                .into_iter()
                .take(dims)
                .enumerate()
                .map(|(i, (members, attributes))| DimProfile {
                    name: format!("d{i}"),
                    members,
                    attributes,
                })
                .collect(),
            cells,
            seed,
            measure_range: (1, 50),
            value_pool: pool,
        })
}

/// A query that binds against the profile's schema. Predicate values come
/// from the generator's value pool plus one token that never matches.
fn arb_query(profile: &GenProfile) -> impl Strategy<Value = Query> {
    let dims: Vec<(String, u32)> = profile
        .dimensions
        .iter()
        .map(|d| (d.name.clone(), d.attributes))
        .collect();
    let measures = profile.measures.clone();
    let pool = profile.value_pool;

    let agg = (0usize..5, 0..measures.len()).prop_map(move |(op, m)| Aggregation {
        op: [AggOp::Sum, AggOp::Avg, AggOp::Min, AggOp::Max, AggOp::Count][op],
        measure: measures[m].clone(),
    });
    let dims_for_pred = dims.clone();
    let pred = (0..dims.len(), 0u32..4, 0u32..=pool).prop_map(move |(d, a, v)| {
        let (name, attrs) = &dims_for_pred[d];
        Predicate {
            dimension: name.clone(),
            attribute: format!("a{}", a % attrs),
            value: if v == pool {
                "never".to_string()
            } else {
                format!("v{v}")
            },
        }
    });
    let group = (0..dims.len(), 0u32..4).prop_map(move |(d, a)| {
        let (name, attrs) = &dims[d];
        GroupKey {
            dimension: name.clone(),
            attribute: format!("a{}", a % attrs),
        }
    });

    (
        proptest::collection::vec(agg, 1..=3),
        proptest::collection::vec(pred, 0..=2),
        proptest::collection::vec(group, 0..=2),
    )
        .prop_map(|(aggregations, predicates, group_by)| Query {
            aggregations,
            predicates,
            group_by,
        })
}

proptest! {
    /// Information preservation: all three evaluation routes agree with
    /// the oracle on randomized warehouses and queries.
    #[test]
    fn all_paths_agree_with_oracle(
        (profile, query) in arb_profile().prop_flat_map(|p| {
            let q = arb_query(&p);
            (Just(p), q)
        })
    ) {
        let wh = generate(&profile).unwrap();
        prop_assert!(validate(&wh).is_empty());
        let expected = oracle_eval(&query, &wh);
        let (join_table, memo_table, index_table) = eval_three_ways(&query, &wh);

        let as_rows = |t: &ResultTable| -> Vec<(Vec<String>, Vec<f64>)> {
            t.rows.iter().map(|r| (r.key.clone(), r.values.clone())).collect()
        };
        prop_assert_eq!(as_rows(&join_table), expected.clone());
        prop_assert_eq!(as_rows(&memo_table), expected.clone());
        prop_assert_eq!(as_rows(&index_table), expected);
        prop_assert_eq!(join_table.columns, index_table.columns);
    }

    /// The index never loses or duplicates cells, and rebuilding gives the
    /// same index.
    #[test]
    fn index_preserves_cells(profile in arb_profile()) {
        let wh = generate(&profile).unwrap();
        let index = build_index(&wh).unwrap();
        prop_assert_eq!(index.cells.len(), wh.facts().len());
        for (cell, fact) in index.cells.iter().zip(wh.facts()) {
            prop_assert_eq!(&cell.measures, &fact.measures);
        }
        prop_assert_eq!(build_index(&wh).unwrap(), index);
    }

    /// Round trip of the query pretty-printer.
    #[test]
    fn printed_queries_reparse(
        (_profile, query) in arb_profile().prop_flat_map(|p| {
            let q = arb_query(&p);
            (Just(p), q)
        })
    ) {
        prop_assert_eq!(parse_query(&query.print()).unwrap(), query);
    }
}
