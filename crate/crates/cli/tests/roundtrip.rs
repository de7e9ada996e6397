//! Round-trip properties for the four document formats: parse ∘ serialize
//! is the identity on in-memory values, serialization is deterministic,
//! and document order survives.

use proptest::prelude::*;

use xcube_cli::xml::{
    parse_dimensions, parse_facts, parse_index_with_schema, parse_schema, serialize_dimensions,
    serialize_facts, serialize_index, serialize_schema,
};
use xcube_core::index::{IndexedCell, IndexedDim, JoinIndex};
use xcube_core::model::{DimensionDef, DimensionMember, FactCell, SchemaMeta, Warehouse};

/// Attribute-safe text: printable, no control characters (the serializer
/// stores values verbatim apart from the five standard escapes).
fn arb_text() -> impl Strategy<Value = String> {
    proptest::string::string_regex("[ -~àéß☃]{0,12}").unwrap()
}

fn arb_measure_value() -> impl Strategy<Value = f64> {
    prop_oneof![
        (-1_000_000i64..=1_000_000).prop_map(|v| v as f64),
        (-1.0e12f64..1.0e12).prop_filter("finite", |v| v.is_finite()),
    ]
}

fn arb_member() -> impl Strategy<Value = DimensionMember> {
    (
        arb_text(),
        proptest::collection::vec((arb_text(), arb_text()), 0..4),
    )
        .prop_map(|(member_id, attributes)| DimensionMember {
            member_id,
            attributes,
        })
}

fn arb_schema() -> impl Strategy<Value = SchemaMeta> {
    (
        arb_text(),
        proptest::collection::vec(arb_text(), 1..4),
        proptest::collection::vec(
            (arb_text(), proptest::collection::vec(arb_text(), 0..4)),
            0..4,
        ),
    )
        .prop_map(|(fact_name, measures, dims)| SchemaMeta {
            fact_name,
            measures,
            dimensions: dims
                .into_iter()
                .map(|(name, attribute_names)| DimensionDef {
                    name,
                    attribute_names,
                })
                .collect(),
        })
}

fn arb_cell() -> impl Strategy<Value = FactCell> {
    (
        proptest::collection::vec((arb_text(), arb_measure_value()), 0..3),
        proptest::collection::vec((arb_text(), arb_text()), 0..4),
    )
        .prop_map(|(measures, dim_refs)| FactCell { measures, dim_refs })
}

fn arb_warehouse() -> impl Strategy<Value = Warehouse> {
    (
        arb_schema(),
        proptest::collection::vec(
            (arb_text(), proptest::collection::vec(arb_member(), 0..4)),
            0..4,
        ),
        proptest::collection::vec(arb_cell(), 0..6),
    )
        .prop_map(|(schema, dimensions, facts)| Warehouse::new(schema, dimensions, facts))
}

fn arb_index() -> impl Strategy<Value = JoinIndex> {
    let dim = (arb_text(), arb_text(), proptest::collection::vec((arb_text(), arb_text()), 0..3))
        .prop_map(|(dimension, member_id, attributes)| IndexedDim {
            dimension,
            member_id,
            attributes,
        });
    let cell = (
        proptest::collection::vec((arb_text(), arb_measure_value()), 0..3),
        proptest::collection::vec(dim, 0..3),
    )
        .prop_map(|(measures, dims)| IndexedCell { measures, dims });
    (arb_schema(), proptest::collection::vec(cell, 0..6))
        .prop_map(|(schema, cells)| JoinIndex { schema, cells })
}

proptest! {
    #[test]
    fn schema_parse_serialize_identity(schema in arb_schema()) {
        let text = serialize_schema(&schema);
        prop_assert_eq!(parse_schema(text.as_bytes()).unwrap(), schema);
        prop_assert_eq!(serialize_schema(&parse_schema(text.as_bytes()).unwrap()), text);
    }

    #[test]
    fn dimensions_parse_serialize_identity(wh in arb_warehouse()) {
        let text = serialize_dimensions(&wh);
        let parsed = parse_dimensions(text.as_bytes()).unwrap();
        let as_data: Vec<(String, Vec<DimensionMember>)> = parsed
            .into_iter()
            .map(|(def, members)| (def.name, members))
            .collect();
        prop_assert_eq!(as_data, wh.dimensions().to_vec());
    }

    #[test]
    fn facts_parse_serialize_identity(wh in arb_warehouse()) {
        let text = serialize_facts(&wh);
        prop_assert_eq!(parse_facts(text.as_bytes()).unwrap(), wh.facts());
        // Determinism fixed point.
        let reparsed = Warehouse::new(
            wh.schema().clone(),
            wh.dimensions().to_vec(),
            parse_facts(text.as_bytes()).unwrap(),
        );
        prop_assert_eq!(serialize_facts(&reparsed), text);
    }

    #[test]
    fn index_parse_serialize_identity(index in arb_index()) {
        let text = serialize_index(&index);
        let parsed = parse_index_with_schema(text.as_bytes(), &index.schema).unwrap();
        prop_assert_eq!(&parsed, &index);
        prop_assert_eq!(serialize_index(&parsed), text);
    }
}
