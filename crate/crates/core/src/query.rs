//! The decision-support query language: aggregations over measures,
//! conjunctive equality predicates on dimension attributes and a
//! multi-attribute group-by.
//!
//! Grammar (keywords case-insensitive, identifiers case-sensitive):
//!
//! ```text
//! query      := "select" agg ("," agg)* "from" "facts" where? groupby?
//! agg        := ("sum"|"avg"|"min"|"max"|"count") "(" IDENT ")"
//! where      := "where" pred ("and" pred)*
//! pred       := IDENT "." IDENT "=" STRING
//! groupby    := "group" "by" IDENT "." IDENT ("," IDENT "." IDENT)*
//! IDENT      := [A-Za-z_][A-Za-z0-9_]*
//! STRING     := double-quoted, backslash escapes (\" \\ \n \t \r)
//! ```

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use alloc::{format, vec};
use core::fmt;

use crate::model::SchemaMeta;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AggOp {
    Sum,
    Avg,
    Min,
    Max,
    Count,
}

impl AggOp {
    pub fn name(self) -> &'static str {
        match self {
            AggOp::Sum => "sum",
            AggOp::Avg => "avg",
            AggOp::Min => "min",
            AggOp::Max => "max",
            AggOp::Count => "count",
        }
    }
}

impl fmt::Display for AggOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Aggregation {
    pub op: AggOp,
    pub measure: String,
}

impl Aggregation {
    /// Column label used in result tables, e.g. `sum(quantity)`.
    pub fn label(&self) -> String {
        format!("{}({})", self.op, self.measure)
    }
}

/// One equality predicate on a dimension attribute.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Predicate {
    pub dimension: String,
    pub attribute: String,
    pub value: String,
}

/// One group-by key part.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupKey {
    pub dimension: String,
    pub attribute: String,
}

/// A parsed decision-support query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub aggregations: Vec<Aggregation>,
    pub predicates: Vec<Predicate>,
    pub group_by: Vec<GroupKey>,
}

impl Query {
    /// Deterministic textual form; `parse_query(q.print())` yields `q` back.
    pub fn print(&self) -> String {
        let mut out = String::from("select ");
        for (i, agg) in self.aggregations.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            out.push_str(&agg.label());
        }
        out.push_str(" from facts");
        for (i, p) in self.predicates.iter().enumerate() {
            out.push_str(if i == 0 { " where " } else { " and " });
            out.push_str(&format!(
                "{}.{} = \"{}\"",
                p.dimension,
                p.attribute,
                escape_string(&p.value)
            ));
        }
        for (i, g) in self.group_by.iter().enumerate() {
            out.push_str(if i == 0 { " group by " } else { ", " });
            out.push_str(&format!("{}.{}", g.dimension, g.attribute));
        }
        out
    }
}

fn escape_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            _ => out.push(c),
        }
    }
    out
}

/// Syntax error with 1-based line/column and the token set that was
/// expected at that position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntaxError {
    pub line: u32,
    pub col: u32,
    pub expected: Vec<String>,
    pub found: String,
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: expected ", self.line, self.col)?;
        for (i, e) in self.expected.iter().enumerate() {
            if i > 0 {
                f.write_str(if i + 1 == self.expected.len() { " or " } else { ", " })?;
            }
            f.write_str(e)?;
        }
        write!(f, ", found {}", self.found)
    }
}

impl core::error::Error for SyntaxError {}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Str(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Eq,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("{s:?}"),
            Tok::Str(s) => format!("string {s:?}"),
            Tok::LParen => "\"(\"".into(),
            Tok::RParen => "\")\"".into(),
            Tok::Comma => "\",\"".into(),
            Tok::Dot => "\".\"".into(),
            Tok::Eq => "\"=\"".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

struct Lexer<'a> {
    chars: core::iter::Peekable<core::str::Chars<'a>>,
    line: u32,
    col: u32,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer {
            chars: text.chars().peekable(),
            line: 1,
            col: 1,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn err(&self, expected: Vec<String>, found: String) -> SyntaxError {
        SyntaxError {
            line: self.line,
            col: self.col,
            expected,
            found,
        }
    }

    fn next_token(&mut self) -> Result<(Tok, u32, u32), SyntaxError> {
        while matches!(self.chars.peek(), Some(c) if c.is_whitespace()) {
            self.bump();
        }
        let (line, col) = (self.line, self.col);
        let Some(&c) = self.chars.peek() else {
            return Ok((Tok::Eof, line, col));
        };
        let tok = match c {
            '(' => {
                self.bump();
                Tok::LParen
            }
            ')' => {
                self.bump();
                Tok::RParen
            }
            ',' => {
                self.bump();
                Tok::Comma
            }
            '.' => {
                self.bump();
                Tok::Dot
            }
            '=' => {
                self.bump();
                Tok::Eq
            }
            '"' => {
                self.bump();
                let mut s = String::new();
                loop {
                    match self.bump() {
                        None => {
                            return Err(self.err(
                                vec!["\"\\\"\"".into()],
                                "end of input in string literal".into(),
                            ))
                        }
                        Some('"') => break,
                        Some('\\') => match self.bump() {
                            Some('"') => s.push('"'),
                            Some('\\') => s.push('\\'),
                            Some('n') => s.push('\n'),
                            Some('t') => s.push('\t'),
                            Some('r') => s.push('\r'),
                            other => {
                                return Err(self.err(
                                    vec!["escape sequence".into()],
                                    match other {
                                        Some(c) => format!("\"\\{c}\""),
                                        None => "end of input".into(),
                                    },
                                ))
                            }
                        },
                        Some(c) => s.push(c),
                    }
                }
                Tok::Str(s)
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while matches!(self.chars.peek(), Some(&c) if c.is_ascii_alphanumeric() || c == '_')
                {
                    s.push(self.bump().unwrap());
                }
                Tok::Ident(s)
            }
            other => {
                return Err(self.err(vec!["token".into()], format!("{other:?}")));
            }
        };
        Ok((tok, line, col))
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    tok: Tok,
    line: u32,
    col: u32,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Result<Self, SyntaxError> {
        let mut lexer = Lexer::new(text);
        let (tok, line, col) = lexer.next_token()?;
        Ok(Parser {
            lexer,
            tok,
            line,
            col,
        })
    }

    fn advance(&mut self) -> Result<(), SyntaxError> {
        let (tok, line, col) = self.lexer.next_token()?;
        self.tok = tok;
        self.line = line;
        self.col = col;
        Ok(())
    }

    fn err(&self, expected: &[&str]) -> SyntaxError {
        SyntaxError {
            line: self.line,
            col: self.col,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.tok.describe(),
        }
    }

    /// Case-insensitive keyword match.
    fn at_keyword(&self, kw: &str) -> bool {
        matches!(&self.tok, Tok::Ident(s) if s.eq_ignore_ascii_case(kw))
    }

    fn expect_keyword(&mut self, kw: &'static str) -> Result<(), SyntaxError> {
        if self.at_keyword(kw) {
            self.advance()
        } else {
            Err(self.err(&[kw]))
        }
    }

    fn expect_ident(&mut self) -> Result<String, SyntaxError> {
        match &self.tok {
            Tok::Ident(s) => {
                let s = s.clone();
                self.advance()?;
                Ok(s)
            }
            _ => Err(self.err(&["identifier"])),
        }
    }

    fn expect_tok(&mut self, want: Tok, desc: &'static str) -> Result<(), SyntaxError> {
        if self.tok == want {
            self.advance()
        } else {
            Err(self.err(&[desc]))
        }
    }

    fn aggregation(&mut self) -> Result<Aggregation, SyntaxError> {
        let op = match &self.tok {
            Tok::Ident(s) => match s.to_ascii_lowercase().as_str() {
                "sum" => AggOp::Sum,
                "avg" => AggOp::Avg,
                "min" => AggOp::Min,
                "max" => AggOp::Max,
                "count" => AggOp::Count,
                _ => return Err(self.err(&["sum", "avg", "min", "max", "count"])),
            },
            _ => return Err(self.err(&["sum", "avg", "min", "max", "count"])),
        };
        self.advance()?;
        self.expect_tok(Tok::LParen, "\"(\"")?;
        let measure = self.expect_ident()?;
        self.expect_tok(Tok::RParen, "\")\"")?;
        Ok(Aggregation { op, measure })
    }

    fn dotted_pair(&mut self) -> Result<(String, String), SyntaxError> {
        let dimension = self.expect_ident()?;
        self.expect_tok(Tok::Dot, "\".\"")?;
        let attribute = self.expect_ident()?;
        Ok((dimension, attribute))
    }

    fn query(&mut self) -> Result<Query, SyntaxError> {
        self.expect_keyword("select")?;
        let mut aggregations = vec![self.aggregation()?];
        while self.tok == Tok::Comma {
            self.advance()?;
            aggregations.push(self.aggregation()?);
        }
        self.expect_keyword("from")?;
        self.expect_keyword("facts")?;

        let mut predicates = Vec::new();
        if self.at_keyword("where") {
            self.advance()?;
            loop {
                let (dimension, attribute) = self.dotted_pair()?;
                self.expect_tok(Tok::Eq, "\"=\"")?;
                let value = match &self.tok {
                    Tok::Str(s) => {
                        let s = s.clone();
                        self.advance()?;
                        s
                    }
                    _ => return Err(self.err(&["string literal"])),
                };
                predicates.push(Predicate {
                    dimension,
                    attribute,
                    value,
                });
                if self.at_keyword("and") {
                    self.advance()?;
                } else {
                    break;
                }
            }
        }

        let mut group_by = Vec::new();
        if self.at_keyword("group") {
            self.advance()?;
            self.expect_keyword("by")?;
            loop {
                let (dimension, attribute) = self.dotted_pair()?;
                group_by.push(GroupKey {
                    dimension,
                    attribute,
                });
                if self.tok == Tok::Comma {
                    self.advance()?;
                } else {
                    break;
                }
            }
        }

        if self.tok != Tok::Eof {
            return Err(self.err(&["end of query"]));
        }
        Ok(Query {
            aggregations,
            predicates,
            group_by,
        })
    }
}

/// Parses a query string; every input either yields a query or exactly one
/// positioned syntax error.
pub fn parse_query(text: &str) -> Result<Query, SyntaxError> {
    Parser::new(text)?.query()
}

/// Name-resolution error raised by [`bind`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BindError {
    UnknownMeasure(String),
    UnknownDimension(String),
    UnknownAttribute { dimension: String, attribute: String },
}

impl fmt::Display for BindError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BindError::UnknownMeasure(m) => write!(f, "unknown measure {m:?}"),
            BindError::UnknownDimension(d) => write!(f, "unknown dimension {d:?}"),
            BindError::UnknownAttribute {
                dimension,
                attribute,
            } => write!(f, "unknown attribute {attribute:?} in dimension {dimension:?}"),
        }
    }
}

impl core::error::Error for BindError {}

/// A query whose names have been resolved against a schema.
///
/// The resolved positions index into the schema's measure and dimension
/// lists; the underlying query is unchanged.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundQuery {
    query: Query,
    measure_pos: Vec<usize>,
    pred_pos: Vec<(usize, usize)>,
    group_pos: Vec<(usize, usize)>,
}

impl BoundQuery {
    pub fn query(&self) -> &Query {
        &self.query
    }

    /// Per aggregation: position of the measure in the schema measure list.
    pub fn measure_positions(&self) -> &[usize] {
        &self.measure_pos
    }

    /// Per predicate: (dimension position, attribute position).
    pub fn predicate_positions(&self) -> &[(usize, usize)] {
        &self.pred_pos
    }

    /// Per group-by key: (dimension position, attribute position).
    pub fn group_positions(&self) -> &[(usize, usize)] {
        &self.group_pos
    }
}

fn resolve_dim_attr(
    schema: &SchemaMeta,
    dimension: &str,
    attribute: &str,
) -> Result<(usize, usize), BindError> {
    let dim_pos = schema
        .dimensions
        .iter()
        .position(|d| d.name == dimension)
        .ok_or_else(|| BindError::UnknownDimension(dimension.to_string()))?;
    let attr_pos = schema.dimensions[dim_pos]
        .attribute_names
        .iter()
        .position(|a| a == attribute)
        .ok_or_else(|| BindError::UnknownAttribute {
            dimension: dimension.to_string(),
            attribute: attribute.to_string(),
        })?;
    Ok((dim_pos, attr_pos))
}

/// Resolves every measure, dimension and attribute name in `query`
/// against `schema`.
pub fn bind(query: &Query, schema: &SchemaMeta) -> Result<BoundQuery, BindError> {
    let mut measure_pos = Vec::with_capacity(query.aggregations.len());
    for agg in &query.aggregations {
        let pos = schema
            .measure_position(&agg.measure)
            .ok_or_else(|| BindError::UnknownMeasure(agg.measure.clone()))?;
        measure_pos.push(pos);
    }
    let mut pred_pos = Vec::with_capacity(query.predicates.len());
    for p in &query.predicates {
        pred_pos.push(resolve_dim_attr(schema, &p.dimension, &p.attribute)?);
    }
    let mut group_pos = Vec::with_capacity(query.group_by.len());
    for g in &query.group_by {
        group_pos.push(resolve_dim_attr(schema, &g.dimension, &g.attribute)?);
    }
    Ok(BoundQuery {
        query: query.clone(),
        measure_pos,
        pred_pos,
        group_pos,
    })
}

/// An executable plan. Both kinds carry the same bound query; the kind
/// selects which document the executor traverses.
#[derive(Debug, Clone, PartialEq)]
pub enum Plan {
    /// Traverse dimension data and facts, joining per cell.
    Join(BoundQuery),
    /// Scan the join index only; predicates and group keys read the
    /// cell-embedded attributes.
    Index(BoundQuery),
}

impl Plan {
    pub fn bound(&self) -> &BoundQuery {
        match self {
            Plan::Join(b) | Plan::Index(b) => b,
        }
    }

    pub fn is_index_plan(&self) -> bool {
        matches!(self, Plan::Index(_))
    }
}

/// Retargets a bound query at the join index. Aggregations, predicates and
/// group-by entries are carried over unchanged; only the traversal target
/// differs.
pub fn rewrite_for_index(bound: BoundQuery) -> Plan {
    Plan::Index(bound)
}

/// Plans the multi-document join path without rewriting.
pub fn plan_for_join(bound: BoundQuery) -> Plan {
    Plan::Join(bound)
}
