//! Deterministic synthetic warehouse generation.
//!
//! A [`GenProfile`] fully determines the output: dimension sizes,
//! attribute fanout, cell count, value domains and the RNG seed. Member
//! ids are `m0..`, attribute names `a0..` per dimension, and attribute
//! values are drawn from a pool `v0..v{value_pool-1}` — the pool size is
//! the selectivity knob for equality predicates. Measure values are
//! integers (as doubles) drawn from `measure_range`.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{DimensionDef, DimensionMember, FactCell, SchemaMeta, Warehouse};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimProfile {
    pub name: String,
    pub members: u64,
    pub attributes: u32,
}

/// Everything needed to generate one warehouse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenProfile {
    pub fact_name: String,
    pub measures: Vec<String>,
    pub dimensions: Vec<DimProfile>,
    pub cells: u64,
    pub seed: u64,
    /// Inclusive integer range measure values are drawn from.
    pub measure_range: (i64, i64),
    /// Distinct values per attribute; an equality predicate matches about
    /// `members / value_pool` members of a dimension.
    pub value_pool: u32,
}

impl GenProfile {
    /// The five-dimension test warehouse at full scale: 16 260 336 cells;
    /// channels 5, promotions 501, customers 50 000, products 10 000,
    /// times 1 461 members. Large dimensions carry 4 attributes, small
    /// ones 2.
    pub fn table1() -> GenProfile {
        let dim = |name: &str, members: u64| DimProfile {
            name: name.to_string(),
            members,
            attributes: if members >= 1000 { 4 } else { 2 },
        };
        GenProfile {
            fact_name: "sales".into(),
            measures: alloc::vec!["amount".into(), "quantity".into()],
            dimensions: alloc::vec![
                dim("channels", 5),
                dim("promotions", 501),
                dim("customers", 50_000),
                dim("products", 10_000),
                dim("times", 1_461),
            ],
            cells: 16_260_336,
            seed: 42,
            measure_range: (1, 100),
            value_pool: 10,
        }
    }

    /// A warehouse where every dimension has the same member and attribute
    /// counts; used to check the closed-form costs exactly.
    pub fn uniform(dimensions: u64, members: u64, attributes: u32, cells: u64) -> GenProfile {
        GenProfile {
            fact_name: "sales".into(),
            measures: alloc::vec!["quantity".into()],
            dimensions: (0..dimensions)
                .map(|i| DimProfile {
                    name: format!("d{i}"),
                    members,
                    attributes,
                })
                .collect(),
            cells,
            seed: 42,
            measure_range: (1, 100),
            value_pool: 10,
        }
    }

    /// Rescales the profile to `cells` cells, scaling every dimension
    /// proportionally (ceiling, minimum one member). A profile with zero
    /// cells only has its cell count replaced.
    pub fn scaled_to_cells(&self, cells: u64) -> GenProfile {
        let mut out = self.clone();
        if self.cells > 0 {
            for dim in &mut out.dimensions {
                let scaled = ((dim.members as u128 * cells as u128) + self.cells as u128 - 1)
                    / self.cells as u128;
                dim.members = (scaled as u64).max(1);
            }
        }
        out.cells = cells;
        out
    }

    /// Divides the cell count by `divisor` (floor) and rescales the
    /// dimensions to match.
    pub fn scaled_down(&self, divisor: u64) -> GenProfile {
        self.scaled_to_cells(self.cells / divisor)
    }

    pub fn with_seed(mut self, seed: u64) -> GenProfile {
        self.seed = seed;
        self
    }

    pub fn with_cells(mut self, cells: u64) -> GenProfile {
        self.cells = cells;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProfileError {
    NoDimensions,
    NoMeasures,
    /// A dimension has zero members while cells reference it.
    EmptyDimension { dimension: String },
    EmptyValuePool,
    BadMeasureRange,
}

impl fmt::Display for ProfileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProfileError::NoDimensions => write!(f, "invalid profile: no dimensions"),
            ProfileError::NoMeasures => write!(f, "invalid profile: no measures"),
            ProfileError::EmptyDimension { dimension } => {
                write!(f, "invalid profile: dimension {dimension:?} has no members")
            }
            ProfileError::EmptyValuePool => write!(f, "invalid profile: value pool is empty"),
            ProfileError::BadMeasureRange => write!(f, "invalid profile: measure range is empty"),
        }
    }
}

impl core::error::Error for ProfileError {}

/// Generates a warehouse from the profile. Deterministic for a given
/// profile (the seed drives a fixed-stream RNG) and referentially intact
/// by construction: every dimension reference targets a generated member.
pub fn generate(profile: &GenProfile) -> Result<Warehouse, ProfileError> {
    if profile.dimensions.is_empty() {
        return Err(ProfileError::NoDimensions);
    }
    if profile.measures.is_empty() {
        return Err(ProfileError::NoMeasures);
    }
    if profile.value_pool == 0 {
        return Err(ProfileError::EmptyValuePool);
    }
    if profile.measure_range.0 > profile.measure_range.1 {
        return Err(ProfileError::BadMeasureRange);
    }
    if profile.cells > 0 {
        if let Some(dim) = profile.dimensions.iter().find(|d| d.members == 0) {
            return Err(ProfileError::EmptyDimension {
                dimension: dim.name.clone(),
            });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(profile.seed);

    let schema = SchemaMeta {
        fact_name: profile.fact_name.clone(),
        measures: profile.measures.clone(),
        dimensions: profile
            .dimensions
            .iter()
            .map(|d| DimensionDef {
                name: d.name.clone(),
                attribute_names: (0..d.attributes).map(|j| format!("a{j}")).collect(),
            })
            .collect(),
    };

    let mut dimensions = Vec::with_capacity(profile.dimensions.len());
    for dim in &profile.dimensions {
        let mut members = Vec::with_capacity(dim.members as usize);
        for i in 0..dim.members {
            let attributes = (0..dim.attributes)
                .map(|j| {
                    let v = rng.random_range(0..profile.value_pool);
                    (format!("a{j}"), format!("v{v}"))
                })
                .collect();
            members.push(DimensionMember {
                member_id: format!("m{i}"),
                attributes,
            });
        }
        dimensions.push((dim.name.clone(), members));
    }

    let (lo, hi) = profile.measure_range;
    let mut facts = Vec::with_capacity(profile.cells as usize);
    for _ in 0..profile.cells {
        let measures = profile
            .measures
            .iter()
            .map(|m| (m.clone(), rng.random_range(lo..=hi) as f64))
            .collect();
        let dim_refs = profile
            .dimensions
            .iter()
            .map(|d| (d.name.clone(), format!("m{}", rng.random_range(0..d.members))))
            .collect();
        facts.push(FactCell { measures, dim_refs });
    }

    Ok(Warehouse::new(schema, dimensions, facts))
}
