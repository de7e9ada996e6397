//! In-memory star-schema warehouse: schema metadata, dimension members,
//! fact cells and the integrity rules tying them together.
//!
//! A warehouse mirrors the three on-disk documents (schema, dimensions,
//! facts). It is immutable after construction; [`Warehouse::new`] builds
//! per-dimension member lookup tables so that [`Warehouse::lookup_member`]
//! runs in expected constant time.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use hashbrown::HashMap;

/// Warehouse metadata: fact name, measure list and dimension definitions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaMeta {
    pub fact_name: String,
    pub measures: Vec<String>,
    pub dimensions: Vec<DimensionDef>,
}

impl SchemaMeta {
    pub fn dimension(&self, name: &str) -> Option<&DimensionDef> {
        self.dimensions.iter().find(|d| d.name == name)
    }

    pub fn measure_position(&self, id: &str) -> Option<usize> {
        self.measures.iter().position(|m| m == id)
    }
}

/// One dimension declaration: its name and the attribute names every
/// member of the dimension carries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimensionDef {
    pub name: String,
    pub attribute_names: Vec<String>,
}

/// One dimension instance: member id plus (attribute name, value) pairs
/// in document order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimensionMember {
    pub member_id: String,
    pub attributes: Vec<(String, String)>,
}

impl DimensionMember {
    pub fn attribute(&self, name: &str) -> Option<&str> {
        self.attributes
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_str())
    }
}

/// One fact: measures and one member reference per dimension,
/// both in document order.
#[derive(Debug, Clone, PartialEq)]
pub struct FactCell {
    /// (measure id, value) pairs.
    pub measures: Vec<(String, f64)>,
    /// (dimension name, member id) pairs.
    pub dim_refs: Vec<(String, String)>,
}

impl FactCell {
    pub fn measure(&self, id: &str) -> Option<f64> {
        self.measures.iter().find(|(m, _)| m == id).map(|(_, v)| *v)
    }

    pub fn dim_ref(&self, dimension: &str) -> Option<&str> {
        self.dim_refs
            .iter()
            .find(|(d, _)| d == dimension)
            .map(|(_, id)| id.as_str())
    }
}

/// The assembled star schema: schema metadata, dimension data in document
/// order and the fact list.
///
/// Construction never fails; integrity problems are surfaced by
/// [`validate`] as data, not errors.
#[derive(Debug, Clone)]
pub struct Warehouse {
    schema: SchemaMeta,
    dimensions: Vec<(String, Vec<DimensionMember>)>,
    facts: Vec<FactCell>,
    dim_positions: HashMap<String, usize>,
    member_positions: Vec<HashMap<String, usize>>,
}

impl PartialEq for Warehouse {
    fn eq(&self, other: &Self) -> bool {
        self.schema == other.schema
            && self.dimensions == other.dimensions
            && self.facts == other.facts
    }
}

impl Warehouse {
    pub fn new(
        schema: SchemaMeta,
        dimensions: Vec<(String, Vec<DimensionMember>)>,
        facts: Vec<FactCell>,
    ) -> Self {
        let mut dim_positions = HashMap::new();
        let mut member_positions = Vec::with_capacity(dimensions.len());
        for (pos, (name, members)) in dimensions.iter().enumerate() {
            // First occurrence wins; duplicates are validation violations.
            dim_positions.entry(name.clone()).or_insert(pos);
            let mut by_id = HashMap::with_capacity(members.len());
            for (i, m) in members.iter().enumerate() {
                by_id.entry(m.member_id.clone()).or_insert(i);
            }
            member_positions.push(by_id);
        }
        Warehouse {
            schema,
            dimensions,
            facts,
            dim_positions,
            member_positions,
        }
    }

    pub fn schema(&self) -> &SchemaMeta {
        &self.schema
    }

    /// Dimension data in document order.
    pub fn dimensions(&self) -> &[(String, Vec<DimensionMember>)] {
        &self.dimensions
    }

    pub fn facts(&self) -> &[FactCell] {
        &self.facts
    }

    pub fn members(&self, dimension: &str) -> Option<&[DimensionMember]> {
        self.dim_positions
            .get(dimension)
            .map(|&i| self.dimensions[i].1.as_slice())
    }

    /// Looks up a member by id inside one dimension. Expected O(1): the
    /// per-dimension id tables are built at construction.
    ///
    /// Returns `Ok(None)` when the dimension exists but has no such member,
    /// and an error when the dimension is not declared in the schema.
    pub fn lookup_member(
        &self,
        dimension: &str,
        member_id: &str,
    ) -> Result<Option<&DimensionMember>, UnknownDimension> {
        if self.schema.dimension(dimension).is_none() {
            return Err(UnknownDimension {
                dimension: dimension.to_string(),
            });
        }
        let Some(&pos) = self.dim_positions.get(dimension) else {
            return Ok(None);
        };
        Ok(self.member_positions[pos]
            .get(member_id)
            .map(|&i| &self.dimensions[pos].1[i]))
    }
}

/// Error returned by [`Warehouse::lookup_member`] for a dimension name
/// absent from the schema.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownDimension {
    pub dimension: String,
}

impl fmt::Display for UnknownDimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown dimension {:?}", self.dimension)
    }
}

impl core::error::Error for UnknownDimension {}

/// One integrity violation found by [`validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// Schema declares the same measure name twice, or an empty one.
    BadMeasureDecl { measure: String },
    /// Schema declares the same dimension name twice, or an empty one.
    BadDimensionDecl { dimension: String },
    /// Two members of one dimension share an id.
    DuplicateMemberId { dimension: String, member_id: String },
    /// A member's attribute names differ from its dimension's declaration.
    MemberAttributeMismatch {
        dimension: String,
        member_id: String,
    },
    /// Dimension data present for a dimension the schema does not declare.
    UndeclaredDimensionData { dimension: String },
    /// A cell references a member that does not exist (1-based cell ordinal).
    DanglingDimRef {
        cell: usize,
        dimension: String,
        member_id: String,
    },
    /// A cell carries a measure the schema does not declare.
    UnknownMeasure { cell: usize, measure: String },
    /// A cell has no measures at all.
    NoMeasures { cell: usize },
    /// A cell lacks a reference for a declared dimension.
    MissingDimRef { cell: usize, dimension: String },
    /// A cell references one dimension more than once.
    DuplicateDimRef { cell: usize, dimension: String },
    /// A cell references a dimension the schema does not declare.
    UnknownDimRef { cell: usize, dimension: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::BadMeasureDecl { measure } => {
                write!(f, "schema: duplicate or empty measure name {measure:?}")
            }
            Violation::BadDimensionDecl { dimension } => {
                write!(f, "schema: duplicate or empty dimension name {dimension:?}")
            }
            Violation::DuplicateMemberId {
                dimension,
                member_id,
            } => write!(
                f,
                "dimension {dimension:?}: duplicate member id {member_id:?}"
            ),
            Violation::MemberAttributeMismatch {
                dimension,
                member_id,
            } => write!(
                f,
                "dimension {dimension:?}, member {member_id:?}: attributes do not match declaration"
            ),
            Violation::UndeclaredDimensionData { dimension } => {
                write!(f, "dimension data for undeclared dimension {dimension:?}")
            }
            Violation::DanglingDimRef {
                cell,
                dimension,
                member_id,
            } => write!(
                f,
                "cell {cell}: dangling reference {dimension:?} -> {member_id:?}"
            ),
            Violation::UnknownMeasure { cell, measure } => {
                write!(f, "cell {cell}: measure {measure:?} not declared in schema")
            }
            Violation::NoMeasures { cell } => write!(f, "cell {cell}: no measures"),
            Violation::MissingDimRef { cell, dimension } => {
                write!(f, "cell {cell}: missing reference for dimension {dimension:?}")
            }
            Violation::DuplicateDimRef { cell, dimension } => {
                write!(f, "cell {cell}: duplicate reference for dimension {dimension:?}")
            }
            Violation::UnknownDimRef { cell, dimension } => {
                write!(f, "cell {cell}: reference to undeclared dimension {dimension:?}")
            }
        }
    }
}

/// Every violation found, in deterministic order (schema first, then
/// dimension data, then cells in document order). Empty iff the warehouse
/// satisfies all invariants.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "0 violations");
        }
        writeln!(f, "{} violations", self.violations.len())?;
        for v in &self.violations {
            writeln!(f, "  {v}")?;
        }
        Ok(())
    }
}

/// Checks every warehouse invariant and reports each breach.
///
/// Violations are data, not failures: the function itself never errors,
/// is pure, and yields an identical report on every call.
pub fn validate(warehouse: &Warehouse) -> ValidationReport {
    let mut out = Vec::new();
    let schema = warehouse.schema();

    let mut seen = hashbrown::HashSet::new();
    for m in &schema.measures {
        if m.is_empty() || !seen.insert(m.as_str()) {
            out.push(Violation::BadMeasureDecl { measure: m.clone() });
        }
    }
    let mut seen = hashbrown::HashSet::new();
    for d in &schema.dimensions {
        if d.name.is_empty() || !seen.insert(d.name.as_str()) {
            out.push(Violation::BadDimensionDecl {
                dimension: d.name.clone(),
            });
        }
    }

    for (name, members) in warehouse.dimensions() {
        let Some(def) = schema.dimension(name) else {
            out.push(Violation::UndeclaredDimensionData {
                dimension: name.clone(),
            });
            continue;
        };
        let mut ids = hashbrown::HashSet::new();
        for member in members {
            if !ids.insert(member.member_id.as_str()) {
                out.push(Violation::DuplicateMemberId {
                    dimension: name.clone(),
                    member_id: member.member_id.clone(),
                });
            }
            let names: Vec<&str> = member.attributes.iter().map(|(n, _)| n.as_str()).collect();
            let declared: Vec<&str> = def.attribute_names.iter().map(String::as_str).collect();
            let mut sorted_names = names.clone();
            sorted_names.sort_unstable();
            let mut sorted_decl = declared.clone();
            sorted_decl.sort_unstable();
            if sorted_names != sorted_decl {
                out.push(Violation::MemberAttributeMismatch {
                    dimension: name.clone(),
                    member_id: member.member_id.clone(),
                });
            }
        }
    }

    for (i, cell) in warehouse.facts().iter().enumerate() {
        let ordinal = i + 1;
        if cell.measures.is_empty() {
            out.push(Violation::NoMeasures { cell: ordinal });
        }
        for (measure, _) in &cell.measures {
            if schema.measure_position(measure).is_none() {
                out.push(Violation::UnknownMeasure {
                    cell: ordinal,
                    measure: measure.clone(),
                });
            }
        }
        let mut seen = hashbrown::HashSet::new();
        for (dimension, member_id) in &cell.dim_refs {
            if !seen.insert(dimension.as_str()) {
                out.push(Violation::DuplicateDimRef {
                    cell: ordinal,
                    dimension: dimension.clone(),
                });
                continue;
            }
            match warehouse.lookup_member(dimension, member_id) {
                Err(_) => out.push(Violation::UnknownDimRef {
                    cell: ordinal,
                    dimension: dimension.clone(),
                }),
                Ok(None) => out.push(Violation::DanglingDimRef {
                    cell: ordinal,
                    dimension: dimension.clone(),
                    member_id: member_id.clone(),
                }),
                Ok(Some(_)) => {}
            }
        }
        for def in &schema.dimensions {
            if !cell.dim_refs.iter().any(|(d, _)| *d == def.name) {
                out.push(Violation::MissingDimRef {
                    cell: ordinal,
                    dimension: def.name.clone(),
                });
            }
        }
    }

    ValidationReport { violations: out }
}
