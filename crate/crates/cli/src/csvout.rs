//! CSV rendering for result tables, cost sweeps and benchmark reports.
//! RFC-style quoting via the `csv` writer; floats print in Rust's shortest
//! round-trip form so integral values come out bare (`225`, not `225.0`).

use xcube_core::cost::SweepRow;
use xcube_core::exec::ResultTable;

use crate::bench::BenchEntry;

fn finish(wtr: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(wtr.into_inner().expect("csv writer never fails on Vec"))
        .expect("csv output is UTF-8")
}

pub fn result_table_csv(table: &ResultTable) -> String {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(&table.columns).expect("write to Vec");
    for row in &table.rows {
        let mut record: Vec<String> = row.key.clone();
        record.extend(row.values.iter().map(|v| format!("{v}")));
        wtr.write_record(&record).expect("write to Vec");
    }
    finish(wtr)
}

/// Header `cells,e_noindex,e_index,gain`.
pub fn cost_sweep_csv(rows: &[SweepRow]) -> String {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(["cells", "e_noindex", "e_index", "gain"])
        .expect("write to Vec");
    for row in rows {
        wtr.write_record([
            row.cells.to_string(),
            row.e_noindex.to_string(),
            row.e_index.to_string(),
            format!("{}", row.gain),
        ])
        .expect("write to Vec");
    }
    finish(wtr)
}

/// Header `cells,query_id,t_noindex_ms,t_index_ms,speedup,visits_noindex,visits_index`.
pub fn bench_csv(entries: &[BenchEntry]) -> String {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record([
        "cells",
        "query_id",
        "t_noindex_ms",
        "t_index_ms",
        "speedup",
        "visits_noindex",
        "visits_index",
    ])
    .expect("write to Vec");
    for e in entries {
        wtr.write_record([
            e.cells.to_string(),
            e.query_id.clone(),
            format!("{:.3}", e.t_noindex_ms),
            format!("{:.3}", e.t_index_ms),
            format!("{:.2}", e.speedup),
            e.visits_noindex.to_string(),
            e.visits_index.to_string(),
        ])
        .expect("write to Vec");
    }
    finish(wtr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use xcube_core::cost::sweep;
    use xcube_core::exec::ResultRow;

    #[test]
    fn table_csv_has_header_and_quotes_when_needed() {
        let table = ResultTable {
            columns: vec!["customers.cust_name".into(), "sum(quantity)".into()],
            rows: vec![
                ResultRow {
                    key: vec!["Ada".into()],
                    values: vec![10.0],
                },
                ResultRow {
                    key: vec!["a,b".into()],
                    values: vec![2.5],
                },
            ],
        };
        let csv = result_table_csv(&table);
        assert_eq!(
            csv,
            "customers.cust_name,sum(quantity)\nAda,10\n\"a,b\",2.5\n"
        );
    }

    #[test]
    fn cost_csv_row_matches_hand_arithmetic() {
        let rows = sweep(&[10], 5, 100, 4).unwrap();
        assert_eq!(
            cost_sweep_csv(&rows),
            "cells,e_noindex,e_index,gain\n10,20250,90,225\n"
        );
    }
}
