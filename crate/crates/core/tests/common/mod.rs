//! Fixtures shared by the integration tests.

use xcube_core::model::{
    DimensionDef, DimensionMember, FactCell, SchemaMeta, Warehouse,
};

pub fn w3() -> Warehouse {
    let schema = SchemaMeta {
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
    };
    let member = |id: &str, attrs: &[(&str, &str)]| DimensionMember {
        member_id: id.into(),
        attributes: attrs
            .iter()
            .map(|(n, v)| (n.to_string(), v.to_string()))
            .collect(),
    };
    let dimensions = vec![
        (
            "customers".to_string(),
            vec![
                member("c1", &[("cust_name", "Ada"), ("cust_city", "Lyon")]),
                member("c2", &[("cust_name", "Bob"), ("cust_city", "Paris")]),
            ],
        ),
        (
            "products".to_string(),
            vec![member("p1", &[("prod_name", "Tea")])],
        ),
    ];
    let cell = |quantity: f64, customer: &str| FactCell {
        measures: vec![("quantity".into(), quantity)],
        dim_refs: vec![
            ("customers".into(), customer.into()),
            ("products".into(), "p1".into()),
        ],
    };
    let facts = vec![cell(3.0, "c1"), cell(5.0, "c2"), cell(7.0, "c1")];
    Warehouse::new(schema, dimensions, facts)
}
