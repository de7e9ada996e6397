//! Shared unit-test fixtures.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::model::{DimensionDef, DimensionMember, FactCell, SchemaMeta, Warehouse};

pub fn w3_schema() -> SchemaMeta {
    SchemaMeta {
        fact_name: "sales".into(),
        measures: vec!["quantity".into()],
        dimensions: vec![
            DimensionDef {
                name: "customers".into(),
                attribute_names: vec!["cust_name".into(), "cust_city".into()],
            },
            DimensionDef {
                name: "products".into(),
                attribute_names: vec!["prod_name".into()],
            },
        ],
    }
}

pub fn w3_dimensions() -> Vec<(String, Vec<DimensionMember>)> {
    vec![
        (
            "customers".into(),
            vec![
                DimensionMember {
                    member_id: "c1".into(),
                    attributes: vec![
                        ("cust_name".into(), "Ada".into()),
                        ("cust_city".into(), "Lyon".into()),
                    ],
                },
                DimensionMember {
                    member_id: "c2".into(),
                    attributes: vec![
                        ("cust_name".into(), "Bob".into()),
                        ("cust_city".into(), "Paris".into()),
                    ],
                },
            ],
        ),
        (
            "products".into(),
            vec![DimensionMember {
                member_id: "p1".into(),
                attributes: vec![("prod_name".into(), "Tea".into())],
            }],
        ),
    ]
}

pub fn w3_facts() -> Vec<FactCell> {
    let cell = |quantity: f64, customer: &str| FactCell {
        measures: vec![("quantity".into(), quantity)],
        dim_refs: vec![
            ("customers".into(), customer.into()),
            ("products".into(), "p1".into()),
        ],
    };
    vec![cell(3.0, "c1"), cell(5.0, "c2"), cell(7.0, "c1")]
}

pub fn w3_with_facts(facts: Vec<FactCell>) -> Warehouse {
    Warehouse::new(w3_schema(), w3_dimensions(), facts)
}

/// The canonical three-cell test warehouse.
pub fn w3() -> Warehouse {
    w3_with_facts(w3_facts())
}
