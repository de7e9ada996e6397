//! Reading and writing the four warehouse documents.
//!
//! * `Facts.xml` — `CubeFact/cube/Cell` with `fact[@id,@value]` measures
//!   and `dimension[@id,@value]` references.
//! * `Dimensions.xml` — `dimensionData/classification/Level[@node]` with
//!   `node[@id]/attribute[@name,@value]` members.
//! * `Index.xml` — like `Facts.xml`, but `dimension[@id,@node]` carries
//!   `attribute[@name,@value]` children embedding the member data.
//! * `Schema.xml` — this tool's metadata format:
//!   `schema[@fact]/measure[@id]` and `dimension[@name]/attribute[@name]`.
//!
//! Parsing is event-based (bounded memory per cell), ignores whitespace,
//! comments and processing instructions, and rejects the first unexpected
//! element, attribute or text node. Serialization emits UTF-8 with an XML
//! declaration, two-space indentation, standard attribute escaping and a
//! trailing newline; equal inputs produce byte-identical documents.

use std::fmt::Write as _;
use std::io::BufRead;

use quick_xml::escape::escape;
use quick_xml::events::Event;
use quick_xml::Reader;
use thiserror::Error;

use xcube_core::index::{IndexedCell, IndexedDim, JoinIndex};
use xcube_core::model::{DimensionDef, DimensionMember, FactCell, SchemaMeta, Warehouse};

/// The four document kinds making up a warehouse on disk.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DocumentKind {
    Schema,
    Dimensions,
    Facts,
    Index,
}

impl DocumentKind {
    /// Conventional file name inside a warehouse directory.
    pub fn file_name(self) -> &'static str {
        match self {
            DocumentKind::Schema => "Schema.xml",
            DocumentKind::Dimensions => "Dimensions.xml",
            DocumentKind::Facts => "Facts.xml",
            DocumentKind::Index => "Index.xml",
        }
    }
}

#[derive(Debug, Error)]
pub enum XmlError {
    #[error("malformed XML at byte {position}: {message}")]
    Malformed { position: u64, message: String },
    #[error("structural error at byte {position}: expected {expected}, found {found}")]
    Structural {
        position: u64,
        expected: String,
        found: String,
    },
    #[error("cell {cell}, measure {measure:?}: value {value:?} is not a finite number")]
    NumericValue {
        cell: usize,
        measure: String,
        value: String,
    },
}

fn structural(position: u64, expected: impl Into<String>, found: impl Into<String>) -> XmlError {
    XmlError::Structural {
        position,
        expected: expected.into(),
        found: found.into(),
    }
}

#[derive(Debug)]
struct Element {
    name: String,
    attrs: Vec<(String, String)>,
    /// Self-closing tag: the element has no children to descend into.
    empty: bool,
}

#[derive(Debug)]
enum Node {
    Element(Element),
    End,
    Eof,
}

struct ElementReader<R: BufRead> {
    reader: Reader<R>,
    buf: Vec<u8>,
}

impl<R: BufRead> ElementReader<R> {
    fn new(input: R) -> Self {
        ElementReader {
            reader: Reader::from_reader(input),
            buf: Vec::new(),
        }
    }

    fn pos(&self) -> u64 {
        self.reader.buffer_position()
    }

    fn attrs(
        e: &quick_xml::events::BytesStart<'_>,
        pos: u64,
    ) -> Result<Vec<(String, String)>, XmlError> {
        let mut out = Vec::new();
        for attr in e.attributes() {
            let attr = attr.map_err(|err| XmlError::Malformed {
                position: pos,
                message: err.to_string(),
            })?;
            let key = String::from_utf8_lossy(attr.key.as_ref()).into_owned();
            let value = attr
                .unescape_value()
                .map_err(|err| XmlError::Malformed {
                    position: pos,
                    message: err.to_string(),
                })?
                .into_owned();
            out.push((key, value));
        }
        Ok(out)
    }

    /// Next element boundary, skipping declarations, comments, PIs,
    /// doctypes and whitespace. Non-whitespace character data is a
    /// structural error (the documents carry data in attributes only).
    fn next_node(&mut self) -> Result<Node, XmlError> {
        loop {
            self.buf.clear();
            let pos = self.pos();
            match self.reader.read_event_into(&mut self.buf) {
                Ok(Event::Start(e)) => {
                    return Ok(Node::Element(Element {
                        name: String::from_utf8_lossy(e.name().as_ref()).into_owned(),
                        attrs: Self::attrs(&e, pos)?,
                        empty: false,
                    }))
                }
                Ok(Event::Empty(e)) => {
                    return Ok(Node::Element(Element {
                        name: String::from_utf8_lossy(e.name().as_ref()).into_owned(),
                        attrs: Self::attrs(&e, pos)?,
                        empty: true,
                    }))
                }
                Ok(Event::End(_)) => return Ok(Node::End),
                Ok(Event::Text(t)) => {
                    if t.iter().any(|b| !b.is_ascii_whitespace()) {
                        return Err(structural(pos, "element", "text content"));
                    }
                }
                Ok(Event::CData(_)) => return Err(structural(pos, "element", "CDATA section")),
                Ok(Event::GeneralRef(_)) => {
                    return Err(structural(pos, "element", "entity reference"))
                }
                Ok(Event::Decl(_) | Event::Comment(_) | Event::PI(_) | Event::DocType(_)) => {}
                Ok(Event::Eof) => return Ok(Node::Eof),
                Err(e) => {
                    return Err(XmlError::Malformed {
                        position: self.reader.error_position(),
                        message: e.to_string(),
                    })
                }
            }
        }
    }

    /// The root element, which must carry the given name.
    fn expect_root(&mut self, name: &str) -> Result<Element, XmlError> {
        match self.next_node()? {
            Node::Element(el) => {
                if el.name == name {
                    Ok(el)
                } else {
                    Err(structural(self.pos(), name, format!("<{}>", el.name)))
                }
            }
            Node::End => Err(structural(self.pos(), name, "end tag")),
            Node::Eof => Err(structural(self.pos(), name, "end of document")),
        }
    }

    /// Consumes the end tag of a start-tag element that must have no
    /// element children.
    fn expect_leaf_end(&mut self, element: &str) -> Result<(), XmlError> {
        match self.next_node()? {
            Node::End => Ok(()),
            Node::Element(el) => Err(structural(
                self.pos(),
                format!("</{element}>"),
                format!("<{}>", el.name),
            )),
            Node::Eof => Err(structural(
                self.pos(),
                format!("</{element}>"),
                "end of document",
            )),
        }
    }

    fn leaf(&mut self, el: Element) -> Result<Element, XmlError> {
        if !el.empty {
            self.expect_leaf_end(&el.name)?;
        }
        Ok(el)
    }
}

/// Pulls the named attributes out of `attrs`, in the order given,
/// rejecting missing and unexpected ones.
fn take_attrs(
    pos: u64,
    element: &str,
    attrs: Vec<(String, String)>,
    names: &[&str],
) -> Result<Vec<String>, XmlError> {
    for name in names {
        if !attrs.iter().any(|(k, _)| k == name) {
            return Err(structural(
                pos,
                format!("attribute @{name} on <{element}>"),
                format!("<{element}> without @{name}"),
            ));
        }
    }
    if let Some((extra, _)) = attrs.iter().find(|(k, _)| !names.contains(&k.as_str())) {
        return Err(structural(
            pos,
            format!("attributes {names:?} on <{element}>"),
            format!("@{extra}"),
        ));
    }
    let mut out = Vec::with_capacity(names.len());
    for name in names {
        let (_, v) = attrs.iter().find(|(k, _)| k == name).unwrap();
        out.push(v.clone());
    }
    Ok(out)
}

fn no_attrs(pos: u64, element: &str, attrs: &[(String, String)]) -> Result<(), XmlError> {
    match attrs.first() {
        Some((k, _)) => Err(structural(
            pos,
            format!("no attributes on <{element}>"),
            format!("@{k}"),
        )),
        None => Ok(()),
    }
}

fn unexpected(pos: u64, expected: &str, el: &Element) -> XmlError {
    structural(pos, expected, format!("<{}>", el.name))
}

// ---------------------------------------------------------------------------
// Schema.xml

pub fn parse_schema<R: BufRead>(input: R) -> Result<SchemaMeta, XmlError> {
    let mut r = ElementReader::new(input);
    let root = r.expect_root("schema")?;
    let fact_name = take_attrs(r.pos(), "schema", root.attrs, &["fact"])?.remove(0);
    let mut measures = Vec::new();
    let mut dimensions = Vec::new();

    if !root.empty {
        loop {
            match r.next_node()? {
                Node::Element(el) if el.name == "measure" => {
                    let el = r.leaf(el)?;
                    measures.push(take_attrs(r.pos(), "measure", el.attrs, &["id"])?.remove(0));
                }
                Node::Element(el) if el.name == "dimension" => {
                    let name =
                        take_attrs(r.pos(), "dimension", el.attrs, &["name"])?.remove(0);
                    let mut attribute_names = Vec::new();
                    if !el.empty {
                        loop {
                            match r.next_node()? {
                                Node::Element(child) if child.name == "attribute" => {
                                    let child = r.leaf(child)?;
                                    attribute_names.push(
                                        take_attrs(r.pos(), "attribute", child.attrs, &["name"])?
                                            .remove(0),
                                    );
                                }
                                Node::Element(other) => {
                                    return Err(unexpected(r.pos(), "attribute", &other))
                                }
                                Node::End => break,
                                Node::Eof => {
                                    return Err(structural(r.pos(), "</dimension>", "end of document"))
                                }
                            }
                        }
                    }
                    dimensions.push(DimensionDef {
                        name,
                        attribute_names,
                    });
                }
                Node::Element(other) => {
                    return Err(unexpected(r.pos(), "measure or dimension", &other))
                }
                Node::End => break,
                Node::Eof => return Err(structural(r.pos(), "</schema>", "end of document")),
            }
        }
    }

    if measures.is_empty() {
        return Err(structural(r.pos(), "at least one measure", "none"));
    }
    Ok(SchemaMeta {
        fact_name,
        measures,
        dimensions,
    })
}

pub fn serialize_schema(schema: &SchemaMeta) -> String {
    let mut s = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    if schema.measures.is_empty() && schema.dimensions.is_empty() {
        let _ = writeln!(s, "<schema fact=\"{}\"/>", escape(&*schema.fact_name));
        return s;
    }
    let _ = writeln!(s, "<schema fact=\"{}\">", escape(&*schema.fact_name));
    for m in &schema.measures {
        let _ = writeln!(s, "  <measure id=\"{}\"/>", escape(&**m));
    }
    for d in &schema.dimensions {
        if d.attribute_names.is_empty() {
            let _ = writeln!(s, "  <dimension name=\"{}\"/>", escape(&*d.name));
        } else {
            let _ = writeln!(s, "  <dimension name=\"{}\">", escape(&*d.name));
            for a in &d.attribute_names {
                let _ = writeln!(s, "    <attribute name=\"{}\"/>", escape(&**a));
            }
            let _ = writeln!(s, "  </dimension>");
        }
    }
    s.push_str("</schema>\n");
    s
}

// ---------------------------------------------------------------------------
// Dimensions.xml

/// Parses `Dimensions.xml` into one definition plus member list per
/// `Level`. The definition's attribute names are observed from the first
/// member (the schema remains authoritative).
pub fn parse_dimensions<R: BufRead>(
    input: R,
) -> Result<Vec<(DimensionDef, Vec<DimensionMember>)>, XmlError> {
    let mut r = ElementReader::new(input);
    let root = r.expect_root("dimensionData")?;
    no_attrs(r.pos(), "dimensionData", &root.attrs)?;
    let mut out = Vec::new();

    if !root.empty {
        match r.next_node()? {
            Node::Element(cls) if cls.name == "classification" => {
                no_attrs(r.pos(), "classification", &cls.attrs)?;
                if !cls.empty {
                    loop {
                        match r.next_node()? {
                            Node::Element(level) if level.name == "Level" => {
                                out.push(parse_level(&mut r, level)?);
                            }
                            Node::Element(other) => {
                                return Err(unexpected(r.pos(), "Level", &other))
                            }
                            Node::End => break,
                            Node::Eof => {
                                return Err(structural(
                                    r.pos(),
                                    "</classification>",
                                    "end of document",
                                ))
                            }
                        }
                    }
                }
            }
            Node::Element(other) => return Err(unexpected(r.pos(), "classification", &other)),
            Node::End => {}
            Node::Eof => return Err(structural(r.pos(), "</dimensionData>", "end of document")),
        }
        // Consume the root end tag unless an empty classification already
        // closed the document level for us.
        loop {
            match r.next_node()? {
                Node::End => break,
                Node::Eof => break,
                Node::Element(other) => {
                    return Err(unexpected(r.pos(), "</dimensionData>", &other))
                }
            }
        }
    }
    Ok(out)
}

fn parse_level<R: BufRead>(
    r: &mut ElementReader<R>,
    level: Element,
) -> Result<(DimensionDef, Vec<DimensionMember>), XmlError> {
    let name = take_attrs(r.pos(), "Level", level.attrs, &["node"])?.remove(0);
    let mut members = Vec::new();
    if !level.empty {
        loop {
            match r.next_node()? {
                Node::Element(node) if node.name == "node" => {
                    let member_id = take_attrs(r.pos(), "node", node.attrs, &["id"])?.remove(0);
                    let mut attributes = Vec::new();
                    if !node.empty {
                        loop {
                            match r.next_node()? {
                                Node::Element(attr) if attr.name == "attribute" => {
                                    let attr = r.leaf(attr)?;
                                    let mut vals = take_attrs(
                                        r.pos(),
                                        "attribute",
                                        attr.attrs,
                                        &["name", "value"],
                                    )?;
                                    let value = vals.remove(1);
                                    let name = vals.remove(0);
                                    attributes.push((name, value));
                                }
                                Node::Element(other) => {
                                    return Err(unexpected(r.pos(), "attribute", &other))
                                }
                                Node::End => break,
                                Node::Eof => {
                                    return Err(structural(r.pos(), "</node>", "end of document"))
                                }
                            }
                        }
                    }
                    members.push(DimensionMember {
                        member_id,
                        attributes,
                    });
                }
                Node::Element(other) => return Err(unexpected(r.pos(), "node", &other)),
                Node::End => break,
                Node::Eof => return Err(structural(r.pos(), "</Level>", "end of document")),
            }
        }
    }
    let attribute_names = members
        .first()
        .map(|m| m.attributes.iter().map(|(n, _)| n.clone()).collect())
        .unwrap_or_default();
    Ok((
        DimensionDef {
            name,
            attribute_names,
        },
        members,
    ))
}

pub fn serialize_dimensions(warehouse: &Warehouse) -> String {
    let mut s = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    s.push_str("<dimensionData>\n");
    if warehouse.dimensions().is_empty() {
        s.push_str("  <classification/>\n");
    } else {
        s.push_str("  <classification>\n");
        for (name, members) in warehouse.dimensions() {
            if members.is_empty() {
                let _ = writeln!(s, "    <Level node=\"{}\"/>", escape(&**name));
                continue;
            }
            let _ = writeln!(s, "    <Level node=\"{}\">", escape(&**name));
            for member in members {
                if member.attributes.is_empty() {
                    let _ = writeln!(s, "      <node id=\"{}\"/>", escape(&*member.member_id));
                    continue;
                }
                let _ = writeln!(s, "      <node id=\"{}\">", escape(&*member.member_id));
                for (attr_name, value) in &member.attributes {
                    let _ = writeln!(
                        s,
                        "        <attribute name=\"{}\" value=\"{}\"/>",
                        escape(&**attr_name),
                        escape(&**value)
                    );
                }
                s.push_str("      </node>\n");
            }
            s.push_str("    </Level>\n");
        }
        s.push_str("  </classification>\n");
    }
    s.push_str("</dimensionData>\n");
    s
}

// ---------------------------------------------------------------------------
// Facts.xml

pub fn parse_facts<R: BufRead>(input: R) -> Result<Vec<FactCell>, XmlError> {
    let mut r = ElementReader::new(input);
    let root = r.expect_root("CubeFact")?;
    no_attrs(r.pos(), "CubeFact", &root.attrs)?;
    let mut cells = Vec::new();

    if !root.empty {
        match r.next_node()? {
            Node::Element(cube) if cube.name == "cube" => {
                no_attrs(r.pos(), "cube", &cube.attrs)?;
                if !cube.empty {
                    loop {
                        match r.next_node()? {
                            Node::Element(cell) if cell.name == "Cell" => {
                                no_attrs(r.pos(), "Cell", &cell.attrs)?;
                                cells.push(parse_fact_cell(&mut r, cell.empty, cells.len() + 1)?);
                            }
                            Node::Element(other) => {
                                return Err(unexpected(r.pos(), "Cell", &other))
                            }
                            Node::End => break,
                            Node::Eof => {
                                return Err(structural(r.pos(), "</cube>", "end of document"))
                            }
                        }
                    }
                }
            }
            Node::Element(other) => return Err(unexpected(r.pos(), "cube", &other)),
            Node::End => {}
            Node::Eof => return Err(structural(r.pos(), "</CubeFact>", "end of document")),
        }
        loop {
            match r.next_node()? {
                Node::End | Node::Eof => break,
                Node::Element(other) => return Err(unexpected(r.pos(), "</CubeFact>", &other)),
            }
        }
    }
    Ok(cells)
}

fn parse_measure_value(cell: usize, measure: &str, value: &str) -> Result<f64, XmlError> {
    match value.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(XmlError::NumericValue {
            cell,
            measure: measure.to_string(),
            value: value.to_string(),
        }),
    }
}

fn parse_fact_cell<R: BufRead>(
    r: &mut ElementReader<R>,
    empty: bool,
    ordinal: usize,
) -> Result<FactCell, XmlError> {
    let mut measures = Vec::new();
    let mut dim_refs = Vec::new();
    if !empty {
        loop {
            match r.next_node()? {
                Node::Element(el) if el.name == "fact" => {
                    let el = r.leaf(el)?;
                    let mut vals = take_attrs(r.pos(), "fact", el.attrs, &["id", "value"])?;
                    let value = vals.remove(1);
                    let id = vals.remove(0);
                    let value = parse_measure_value(ordinal, &id, &value)?;
                    measures.push((id, value));
                }
                Node::Element(el) if el.name == "dimension" => {
                    let el = r.leaf(el)?;
                    let mut vals = take_attrs(r.pos(), "dimension", el.attrs, &["id", "value"])?;
                    let member = vals.remove(1);
                    let id = vals.remove(0);
                    dim_refs.push((id, member));
                }
                Node::Element(other) => {
                    return Err(unexpected(r.pos(), "fact or dimension", &other))
                }
                Node::End => break,
                Node::Eof => return Err(structural(r.pos(), "</Cell>", "end of document")),
            }
        }
    }
    Ok(FactCell { measures, dim_refs })
}

pub fn serialize_facts(warehouse: &Warehouse) -> String {
    let mut s = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    s.push_str("<CubeFact>\n");
    if warehouse.facts().is_empty() {
        s.push_str("  <cube/>\n");
    } else {
        s.push_str("  <cube>\n");
        for cell in warehouse.facts() {
            if cell.measures.is_empty() && cell.dim_refs.is_empty() {
                s.push_str("    <Cell/>\n");
                continue;
            }
            s.push_str("    <Cell>\n");
            for (id, value) in &cell.measures {
                let _ = writeln!(
                    s,
                    "      <fact id=\"{}\" value=\"{}\"/>",
                    escape(&**id),
                    value
                );
            }
            for (dimension, member) in &cell.dim_refs {
                let _ = writeln!(
                    s,
                    "      <dimension id=\"{}\" value=\"{}\"/>",
                    escape(&**dimension),
                    escape(&**member)
                );
            }
            s.push_str("    </Cell>\n");
        }
        s.push_str("  </cube>\n");
    }
    s.push_str("</CubeFact>\n");
    s
}

// ---------------------------------------------------------------------------
// Index.xml

/// Parses the index document content. The schema is not part of the
/// document; see [`parse_index`] and [`parse_index_with_schema`].
pub fn parse_index_cells<R: BufRead>(input: R) -> Result<Vec<IndexedCell>, XmlError> {
    let mut r = ElementReader::new(input);
    let root = r.expect_root("CubeFact")?;
    no_attrs(r.pos(), "CubeFact", &root.attrs)?;
    let mut cells = Vec::new();

    if !root.empty {
        match r.next_node()? {
            Node::Element(cube) if cube.name == "cube" => {
                no_attrs(r.pos(), "cube", &cube.attrs)?;
                if !cube.empty {
                    loop {
                        match r.next_node()? {
                            Node::Element(cell) if cell.name == "Cell" => {
                                no_attrs(r.pos(), "Cell", &cell.attrs)?;
                                cells.push(parse_index_cell(&mut r, cell.empty, cells.len() + 1)?);
                            }
                            Node::Element(other) => {
                                return Err(unexpected(r.pos(), "Cell", &other))
                            }
                            Node::End => break,
                            Node::Eof => {
                                return Err(structural(r.pos(), "</cube>", "end of document"))
                            }
                        }
                    }
                }
            }
            Node::Element(other) => return Err(unexpected(r.pos(), "cube", &other)),
            Node::End => {}
            Node::Eof => return Err(structural(r.pos(), "</CubeFact>", "end of document")),
        }
        loop {
            match r.next_node()? {
                Node::End | Node::Eof => break,
                Node::Element(other) => return Err(unexpected(r.pos(), "</CubeFact>", &other)),
            }
        }
    }
    Ok(cells)
}

fn parse_index_cell<R: BufRead>(
    r: &mut ElementReader<R>,
    empty: bool,
    ordinal: usize,
) -> Result<IndexedCell, XmlError> {
    let mut measures = Vec::new();
    let mut dims = Vec::new();
    if !empty {
        loop {
            match r.next_node()? {
                Node::Element(el) if el.name == "fact" => {
                    let el = r.leaf(el)?;
                    let mut vals = take_attrs(r.pos(), "fact", el.attrs, &["id", "value"])?;
                    let value = vals.remove(1);
                    let id = vals.remove(0);
                    let value = parse_measure_value(ordinal, &id, &value)?;
                    measures.push((id, value));
                }
                Node::Element(el) if el.name == "dimension" => {
                    let el_empty = el.empty;
                    let mut vals = take_attrs(r.pos(), "dimension", el.attrs, &["id", "node"])?;
                    let member_id = vals.remove(1);
                    let dimension = vals.remove(0);
                    let mut attributes = Vec::new();
                    if !el_empty {
                        loop {
                            match r.next_node()? {
                                Node::Element(attr) if attr.name == "attribute" => {
                                    let attr = r.leaf(attr)?;
                                    let mut vals = take_attrs(
                                        r.pos(),
                                        "attribute",
                                        attr.attrs,
                                        &["name", "value"],
                                    )?;
                                    let value = vals.remove(1);
                                    let name = vals.remove(0);
                                    attributes.push((name, value));
                                }
                                Node::Element(other) => {
                                    return Err(unexpected(r.pos(), "attribute", &other))
                                }
                                Node::End => break,
                                Node::Eof => {
                                    return Err(structural(
                                        r.pos(),
                                        "</dimension>",
                                        "end of document",
                                    ))
                                }
                            }
                        }
                    }
                    dims.push(IndexedDim {
                        dimension,
                        member_id,
                        attributes,
                    });
                }
                Node::Element(other) => {
                    return Err(unexpected(r.pos(), "fact or dimension", &other))
                }
                Node::End => break,
                Node::Eof => return Err(structural(r.pos(), "</Cell>", "end of document")),
            }
        }
    }
    Ok(IndexedCell { measures, dims })
}

/// Schema reconstructed from index content: measure and dimension layout
/// from the first cell, fact name defaulting to "facts". Empty indices
/// yield an empty schema.
pub fn derive_index_schema(cells: &[IndexedCell]) -> SchemaMeta {
    match cells.first() {
        None => SchemaMeta {
            fact_name: "facts".into(),
            measures: Vec::new(),
            dimensions: Vec::new(),
        },
        Some(cell) => SchemaMeta {
            fact_name: "facts".into(),
            measures: cell.measures.iter().map(|(m, _)| m.clone()).collect(),
            dimensions: cell
                .dims
                .iter()
                .map(|d| DimensionDef {
                    name: d.dimension.clone(),
                    attribute_names: d.attributes.iter().map(|(n, _)| n.clone()).collect(),
                })
                .collect(),
        },
    }
}

/// Parses `Index.xml` standalone; the schema is derived from the document
/// content (see [`derive_index_schema`]).
pub fn parse_index<R: BufRead>(input: R) -> Result<JoinIndex, XmlError> {
    let cells = parse_index_cells(input)?;
    let schema = derive_index_schema(&cells);
    Ok(JoinIndex { schema, cells })
}

/// Parses `Index.xml` and attaches the authoritative schema, giving exact
/// round-trip identity with [`serialize_index`].
pub fn parse_index_with_schema<R: BufRead>(
    input: R,
    schema: &SchemaMeta,
) -> Result<JoinIndex, XmlError> {
    let cells = parse_index_cells(input)?;
    Ok(JoinIndex {
        schema: schema.clone(),
        cells,
    })
}

pub fn serialize_index(index: &JoinIndex) -> String {
    let mut s = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    s.push_str("<CubeFact>\n");
    if index.cells.is_empty() {
        s.push_str("  <cube/>\n");
    } else {
        s.push_str("  <cube>\n");
        for cell in &index.cells {
            if cell.measures.is_empty() && cell.dims.is_empty() {
                s.push_str("    <Cell/>\n");
                continue;
            }
            s.push_str("    <Cell>\n");
            for (id, value) in &cell.measures {
                let _ = writeln!(
                    s,
                    "      <fact id=\"{}\" value=\"{}\"/>",
                    escape(&**id),
                    value
                );
            }
            for dim in &cell.dims {
                if dim.attributes.is_empty() {
                    let _ = writeln!(
                        s,
                        "      <dimension id=\"{}\" node=\"{}\"/>",
                        escape(&*dim.dimension),
                        escape(&*dim.member_id)
                    );
                    continue;
                }
                let _ = writeln!(
                    s,
                    "      <dimension id=\"{}\" node=\"{}\">",
                    escape(&*dim.dimension),
                    escape(&*dim.member_id)
                );
                for (name, value) in &dim.attributes {
                    let _ = writeln!(
                        s,
                        "        <attribute name=\"{}\" value=\"{}\"/>",
                        escape(&**name),
                        escape(&**value)
                    );
                }
                s.push_str("      </dimension>\n");
            }
            s.push_str("    </Cell>\n");
        }
        s.push_str("  </cube>\n");
    }
    s.push_str("</CubeFact>\n");
    s
}

// ---------------------------------------------------------------------------

/// Assembles a warehouse from the three parsed documents. The schema is
/// authoritative; dimension definitions observed in the dimension document
/// are dropped in favour of their member lists.
pub fn assemble_warehouse(
    schema: SchemaMeta,
    dimensions: Vec<(DimensionDef, Vec<DimensionMember>)>,
    facts: Vec<FactCell>,
) -> Warehouse {
    let dims = dimensions
        .into_iter()
        .map(|(def, members)| (def.name, members))
        .collect();
    Warehouse::new(schema, dims, facts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use xcube_core::index::build_index;
    use xcube_core::model::validate;

    fn w3() -> Warehouse {
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
        Warehouse::new(
            schema,
            dimensions,
            vec![cell(3.0, "c1"), cell(5.0, "c2"), cell(7.0, "c1")],
        )
    }

    #[test]
    fn parses_single_level_dimension_document() {
        let doc = br#"<?xml version="1.0" encoding="UTF-8"?>
<dimensionData>
  <classification>
    <Level node="customers">
      <node id="c1">
        <attribute name="cust_name" value="Ada"/>
      </node>
    </Level>
  </classification>
</dimensionData>"#;
        let dims = parse_dimensions(&doc[..]).unwrap();
        assert_eq!(dims.len(), 1);
        let (def, members) = &dims[0];
        assert_eq!(def.name, "customers");
        assert_eq!(def.attribute_names, vec!["cust_name".to_string()]);
        assert_eq!(members.len(), 1);
        assert_eq!(members[0].member_id, "c1");
        assert_eq!(members[0].attributes, vec![("cust_name".into(), "Ada".into())]);
    }

    #[test]
    fn empty_classification_is_zero_dimensions() {
        let dims =
            parse_dimensions(&b"<dimensionData><classification/></dimensionData>"[..]).unwrap();
        assert!(dims.is_empty());
    }

    #[test]
    fn wrong_root_is_structural_error() {
        let err = parse_dimensions(&b"<foo/>"[..]).unwrap_err();
        assert!(err.to_string().contains("expected dimensionData"), "{err}");
    }

    #[test]
    fn parses_one_fact_cell() {
        let doc = br#"<CubeFact><cube><Cell>
            <fact id="quantity" value="3"/>
            <dimension id="customers" value="c1"/>
        </Cell></cube></CubeFact>"#;
        let facts = parse_facts(&doc[..]).unwrap();
        assert_eq!(facts.len(), 1);
        assert_eq!(facts[0].measures, vec![("quantity".into(), 3.0)]);
        assert_eq!(facts[0].dim_refs, vec![("customers".into(), "c1".into())]);
    }

    #[test]
    fn empty_cube_is_zero_cells() {
        assert!(parse_facts(&b"<CubeFact><cube/></CubeFact>"[..])
            .unwrap()
            .is_empty());
    }

    #[test]
    fn non_numeric_measure_names_cell_and_measure() {
        let doc = br#"<CubeFact><cube><Cell><fact id="quantity" value="abc"/></Cell></cube></CubeFact>"#;
        let err = parse_facts(&doc[..]).unwrap_err();
        match err {
            XmlError::NumericValue { cell, ref measure, ref value } => {
                assert_eq!(cell, 1);
                assert_eq!(measure, "quantity");
                assert_eq!(value, "abc");
            }
            other => panic!("expected numeric error, got {other}"),
        }
    }

    #[test]
    fn schema_round_trips() {
        let schema = w3().schema().clone();
        let bytes = serialize_schema(&schema);
        assert_eq!(parse_schema(bytes.as_bytes()).unwrap(), schema);
    }

    #[test]
    fn schema_without_measures_is_rejected() {
        let err = parse_schema(&b"<schema fact=\"sales\"><dimension name=\"d\"/></schema>"[..])
            .unwrap_err();
        assert!(err.to_string().contains("at least one measure"), "{err}");
    }

    #[test]
    fn table1_schema_parses_to_five_dimensions() {
        let doc = br#"<schema fact="sales">
  <measure id="amount"/>
  <measure id="quantity"/>
  <dimension name="channels"><attribute name="a0"/></dimension>
  <dimension name="promotions"><attribute name="a0"/></dimension>
  <dimension name="customers"><attribute name="a0"/></dimension>
  <dimension name="products"><attribute name="a0"/></dimension>
  <dimension name="times"><attribute name="a0"/></dimension>
</schema>"#;
        let schema = parse_schema(&doc[..]).unwrap();
        assert_eq!(schema.measures, vec!["amount".to_string(), "quantity".into()]);
        assert_eq!(schema.dimensions.len(), 5);
    }

    #[test]
    fn facts_serialization_has_three_cells_and_round_trips() {
        let wh = w3();
        let bytes = serialize_facts(&wh);
        assert_eq!(bytes.matches("<Cell>").count(), 3);
        assert_eq!(parse_facts(bytes.as_bytes()).unwrap(), wh.facts());
    }

    #[test]
    fn dimensions_round_trip_preserves_order() {
        let wh = w3();
        let bytes = serialize_dimensions(&wh);
        let parsed = parse_dimensions(bytes.as_bytes()).unwrap();
        let names: Vec<&str> = parsed.iter().map(|(d, _)| d.name.as_str()).collect();
        assert_eq!(names, vec!["customers", "products"]);
        for ((_, members), (name, expected)) in parsed.iter().zip(wh.dimensions()) {
            assert_eq!(members, expected, "dimension {name}");
        }
    }

    #[test]
    fn empty_warehouse_dimensions_serialize_minimal() {
        let wh = Warehouse::new(
            SchemaMeta {
                fact_name: "sales".into(),
                measures: vec!["quantity".into()],
                dimensions: vec![],
            },
            vec![],
            vec![],
        );
        let flat: String = serialize_dimensions(&wh)
            .lines()
            .skip(1)
            .map(str::trim)
            .collect();
        assert_eq!(flat, "<dimensionData><classification/></dimensionData>");
    }

    #[test]
    fn index_serialization_embeds_attributes_and_round_trips() {
        let wh = w3();
        let index = build_index(&wh).unwrap();
        let bytes = serialize_index(&index);
        assert_eq!(bytes.matches("<Cell>").count(), 3);
        // Every customers entry carries its two embedded attributes.
        assert_eq!(bytes.matches("<dimension id=\"customers\"").count(), 3);
        assert_eq!(bytes.matches("cust_name").count(), 3);
        assert_eq!(bytes.matches("cust_city").count(), 3);

        let parsed = parse_index_with_schema(bytes.as_bytes(), wh.schema()).unwrap();
        assert_eq!(parsed, index);
    }

    #[test]
    fn index_dimension_with_value_attribute_is_rejected() {
        let doc = br#"<CubeFact><cube><Cell>
            <fact id="q" value="1"/>
            <dimension id="customers" value="c1"/>
        </Cell></cube></CubeFact>"#;
        let err = parse_index_cells(&doc[..]).unwrap_err();
        assert!(err.to_string().contains("@node"), "{err}");
    }

    #[test]
    fn derived_index_schema_supports_standalone_queries() {
        let wh = w3();
        let bytes = serialize_index(&build_index(&wh).unwrap());
        let index = parse_index(bytes.as_bytes()).unwrap();
        assert_eq!(index.schema.measures, vec!["quantity".to_string()]);
        assert_eq!(index.schema.dimensions.len(), 2);
        assert_eq!(index.schema.dimensions[0].name, "customers");
        assert_eq!(
            index.schema.dimensions[0].attribute_names,
            vec!["cust_name".to_string(), "cust_city".into()]
        );
    }

    #[test]
    fn assembled_warehouse_validates() {
        let wh = w3();
        let schema = parse_schema(serialize_schema(wh.schema()).as_bytes()).unwrap();
        let dims = parse_dimensions(serialize_dimensions(&wh).as_bytes()).unwrap();
        let facts = parse_facts(serialize_facts(&wh).as_bytes()).unwrap();
        let rebuilt = assemble_warehouse(schema, dims, facts);
        assert_eq!(rebuilt, wh);
        assert!(validate(&rebuilt).is_empty());
    }

    #[test]
    fn serialization_is_deterministic() {
        let wh = w3();
        assert_eq!(serialize_facts(&wh), serialize_facts(&wh));
        assert_eq!(serialize_dimensions(&wh), serialize_dimensions(&wh));
        let index = build_index(&wh).unwrap();
        assert_eq!(serialize_index(&index), serialize_index(&index));
    }

    #[test]
    fn attribute_values_are_escaped() {
        let mut wh = w3();
        let schema = wh.schema().clone();
        let mut dims = wh.dimensions().to_vec();
        dims[0].1[0].attributes[0].1 = "A<&>\"'z".into();
        wh = Warehouse::new(schema, dims, wh.facts().to_vec());
        let bytes = serialize_dimensions(&wh);
        let parsed = parse_dimensions(bytes.as_bytes()).unwrap();
        assert_eq!(parsed[0].1[0].attributes[0].1, "A<&>\"'z");
    }
}
