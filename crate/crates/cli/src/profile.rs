//! Generation profile files: a small TOML format mapping onto
//! [`GenProfile`].
//!
//! ```toml
//! fact = "sales"
//! measures = ["amount", "quantity"]
//! cells = 16260
//! seed = 42            # optional; falls back to the given default
//! value_pool = 10      # optional: distinct values per attribute
//! measure_min = 1      # optional inclusive measure range
//! measure_max = 100
//!
//! [[dimension]]
//! name = "customers"
//! members = 50
//! attributes = 4       # optional, default 2
//! ```

use serde::Deserialize;
use thiserror::Error;

use xcube_core::gen::{DimProfile, GenProfile};

#[derive(Debug, Error)]
pub enum ProfileFileError {
    #[error("profile: {0}")]
    Toml(#[from] toml::de::Error),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileFile {
    fact: Option<String>,
    measures: Vec<String>,
    cells: u64,
    seed: Option<u64>,
    value_pool: Option<u32>,
    measure_min: Option<i64>,
    measure_max: Option<i64>,
    #[serde(default, rename = "dimension")]
    dimensions: Vec<DimensionFile>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DimensionFile {
    name: String,
    members: u64,
    attributes: Option<u32>,
}

/// Parses a profile file. `default_seed` applies when the file has no
/// `seed` key; semantic checks (empty dimension list and the like) happen
/// in the generator.
pub fn parse_profile(text: &str, default_seed: u64) -> Result<GenProfile, ProfileFileError> {
    let file: ProfileFile = toml::from_str(text)?;
    Ok(GenProfile {
        fact_name: file.fact.unwrap_or_else(|| "sales".into()),
        measures: file.measures,
        dimensions: file
            .dimensions
            .into_iter()
            .map(|d| DimProfile {
                name: d.name,
                members: d.members,
                attributes: d.attributes.unwrap_or(2),
            })
            .collect(),
        cells: file.cells,
        seed: file.seed.unwrap_or(default_seed),
        measure_range: (
            file.measure_min.unwrap_or(1),
            file.measure_max.unwrap_or(100),
        ),
        value_pool: file.value_pool.unwrap_or(10),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_profile() {
        let text = r#"
fact = "sales"
measures = ["amount", "quantity"]
cells = 16260
seed = 7
value_pool = 5

[[dimension]]
name = "customers"
members = 50
attributes = 4

[[dimension]]
name = "products"
members = 10
"#;
        let p = parse_profile(text, 42).unwrap();
        assert_eq!(p.seed, 7);
        assert_eq!(p.cells, 16_260);
        assert_eq!(p.value_pool, 5);
        assert_eq!(p.dimensions.len(), 2);
        assert_eq!(p.dimensions[0].attributes, 4);
        assert_eq!(p.dimensions[1].attributes, 2);
    }

    #[test]
    fn default_seed_applies() {
        let p = parse_profile("measures = [\"q\"]\ncells = 0", 99).unwrap();
        assert_eq!(p.seed, 99);
        assert_eq!(p.fact_name, "sales");
        assert!(p.dimensions.is_empty());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(parse_profile("measures = [\"q\"]\ncells = 0\nbogus = 1", 0).is_err());
    }
}
