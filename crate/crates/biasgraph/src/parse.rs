use std::collections::BTreeMap;
use std::fmt;

use biasgraph_core::{attach_predictor, Dag, EdgeDecl, Error, NodeDecl, PredictorSpec};

use crate::model::ModelSpec;

/// A syntax or semantic error in a model file. Lines and columns are 1-based.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParseErrorKind {
    Syntax(String),
    /// The text is well formed but the graph it describes is not valid.
    Semantic(Error),
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: ", self.line, self.column)?;
        match &self.kind {
            ParseErrorKind::Syntax(msg) => f.write_str(msg),
            ParseErrorKind::Semantic(err) => write!(f, "{err}"),
        }
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Tok<'a> {
    Ident(&'a str),
    Arrow,
    Comma,
}

impl fmt::Display for Tok<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::Comma => f.write_str("`,`"),
        }
    }
}

fn syntax(line: usize, column: usize, msg: impl Into<String>) -> ParseError {
    ParseError {
        line,
        column,
        kind: ParseErrorKind::Syntax(msg.into()),
    }
}

fn semantic(line: usize, column: usize, err: Error) -> ParseError {
    ParseError {
        line,
        column,
        kind: ParseErrorKind::Semantic(err),
    }
}

fn lex(text: &str, line: usize) -> Result<Vec<(Tok<'_>, usize)>, ParseError> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    let mut column = 0;
    while let Some((i, c)) = chars.next() {
        column += 1;
        if c == '#' {
            break;
        }
        if c.is_whitespace() {
            continue;
        }
        let start = column;
        if c.is_ascii_alphabetic() {
            let mut end = i + c.len_utf8();
            while let Some(&(j, d)) = chars.peek() {
                if d.is_ascii_alphanumeric() || d == '_' {
                    end = j + d.len_utf8();
                    column += 1;
                    chars.next();
                } else {
                    break;
                }
            }
            out.push((Tok::Ident(&text[i..end]), start));
        } else if c == ',' {
            out.push((Tok::Comma, start));
        } else if c == '-' && chars.peek().map(|p| p.1) == Some('>') {
            chars.next();
            column += 1;
            out.push((Tok::Arrow, start));
        } else if c.is_ascii_digit() || c == '_' {
            return Err(syntax(line, start, "identifiers must start with a letter"));
        } else {
            return Err(syntax(line, start, format!("unexpected character {c:?}")));
        }
    }
    Ok(out)
}

/// Token cursor over one statement.
struct Line<'a> {
    number: usize,
    toks: Vec<(Tok<'a>, usize)>,
    pos: usize,
    end_column: usize,
}

impl<'a> Line<'a> {
    fn column(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_column, |t| t.1)
    }

    fn ident(&mut self, what: &str) -> Result<(&'a str, usize), ParseError> {
        match self.toks.get(self.pos) {
            Some(&(Tok::Ident(s), col)) => {
                self.pos += 1;
                Ok((s, col))
            }
            Some(&(tok, col)) => Err(syntax(self.number, col, format!("expected {what}, found {tok}"))),
            None => Err(syntax(self.number, self.end_column, format!("expected {what}"))),
        }
    }

    fn expect(&mut self, want: Tok<'_>, what: &str) -> Result<(), ParseError> {
        match self.toks.get(self.pos) {
            Some(&(tok, _)) if tok == want => {
                self.pos += 1;
                Ok(())
            }
            Some(&(tok, col)) => Err(syntax(self.number, col, format!("expected {what}, found {tok}"))),
            None => Err(syntax(self.number, self.end_column, format!("expected {what}"))),
        }
    }

    fn peek_is(&self, want: Tok<'_>) -> bool {
        self.toks.get(self.pos).map(|t| t.0) == Some(want)
    }

    fn rest(&self) -> &[(Tok<'a>, usize)] {
        &self.toks[self.pos..]
    }
}

#[derive(Default)]
struct Builder {
    name: Option<String>,
    header_line: usize,
    nodes: Vec<NodeDecl>,
    node_lines: BTreeMap<String, usize>,
    edges: Vec<EdgeDecl>,
    edge_lines: Vec<(usize, usize)>,
    predictor: Option<(PredictorSpec, usize, usize)>,
    interest: Option<String>,
    outcome: Option<String>,
}

impl Builder {
    fn declared(&self, name: &str) -> bool {
        self.node_lines.contains_key(name)
    }

    fn node_line(&self, name: &str) -> usize {
        self.node_lines.get(name).copied().unwrap_or(self.header_line)
    }

    fn edge_line(&self, from: &str, to: &str, nth: usize) -> (usize, usize) {
        self.edges
            .iter()
            .zip(&self.edge_lines)
            .filter(|(e, _)| e.source == from && e.target == to)
            .map(|(_, at)| *at)
            .nth(nth)
            .unwrap_or((self.header_line, 1))
    }

    fn statement(&mut self, line: &mut Line<'_>) -> Result<(), ParseError> {
        let (keyword, col) = line.ident("a statement keyword")?;
        if self.name.is_none() && keyword != "model" {
            return Err(syntax(
                line.number,
                col,
                "expected `model` header before any other statement",
            ));
        }
        match keyword {
            "model" => {
                if self.name.is_some() {
                    return Err(syntax(line.number, col, "duplicate `model` header"));
                }
                let (name, _) = line.ident("model name")?;
                self.name = Some(name.to_string());
                self.header_line = line.number;
            }
            "node" => {
                let (name, name_col) = line.ident("node name")?;
                if self.declared(name) {
                    return Err(semantic(line.number, name_col, Error::DuplicateNode(name.into())));
                }
                let mut decl = NodeDecl::new(name);
                while let Some(&(tok, flag_col)) = line.rest().first() {
                    let flag = match tok {
                        Tok::Ident(f @ ("unobserved" | "conditioned" | "force")) => f,
                        other => {
                            return Err(syntax(
                                line.number,
                                flag_col,
                                format!("expected `unobserved`, `conditioned` or `force`, found {other}"),
                            ))
                        }
                    };
                    let slot = match flag {
                        "unobserved" => &mut decl.unobserved,
                        "conditioned" => &mut decl.conditioned,
                        _ => &mut decl.force,
                    };
                    if *slot {
                        return Err(syntax(line.number, flag_col, format!("repeated flag `{flag}`")));
                    }
                    *slot = true;
                    line.pos += 1;
                }
                self.node_lines.insert(name.to_string(), line.number);
                self.nodes.push(decl);
            }
            "edge" => {
                let start = col;
                let (from, from_col) = line.ident("edge source")?;
                line.expect(Tok::Arrow, "`->`")?;
                let (to, to_col) = line.ident("edge target")?;
                for (missing, at) in [(from, from_col), (to, to_col)] {
                    if !self.declared(missing) {
                        let err = Error::DanglingEdge {
                            from: from.into(),
                            to: to.into(),
                            missing: missing.into(),
                        };
                        return Err(semantic(line.number, at, err));
                    }
                }
                let unjustified = if line.peek_is(Tok::Ident("unjustified")) {
                    line.pos += 1;
                    true
                } else {
                    false
                };
                self.edges.push(EdgeDecl {
                    source: from.into(),
                    target: to.into(),
                    unjustified,
                });
                self.edge_lines.push((line.number, start));
            }
            "predictor" => {
                if self.predictor.is_some() {
                    return Err(syntax(line.number, col, "only one `predictor` line is allowed"));
                }
                let (name, name_col) = line.ident("predictor name")?;
                line.expect(Tok::Ident("from"), "`from`")?;
                let mut features = Vec::new();
                loop {
                    let (feature, at) = line.ident("feature name")?;
                    if !self.declared(feature) {
                        return Err(semantic(line.number, at, Error::UnknownPredictor(feature.into())));
                    }
                    features.push(feature);
                    if line.peek_is(Tok::Comma) {
                        line.pos += 1;
                    } else {
                        break;
                    }
                }
                let mut spec = PredictorSpec::new(name, features);
                if line.peek_is(Tok::Ident("deterministic")) {
                    line.pos += 1;
                    spec = spec.deterministic();
                }
                self.predictor = Some((spec, line.number, name_col));
            }
            "interest" | "outcome" => {
                let slot_taken = if keyword == "interest" {
                    self.interest.is_some()
                } else {
                    self.outcome.is_some()
                };
                if slot_taken {
                    return Err(syntax(line.number, col, format!("duplicate `{keyword}` line")));
                }
                let (name, at) = line.ident("node name")?;
                if !self.declared(name) {
                    return Err(semantic(line.number, at, Error::UnknownNode(name.into())));
                }
                let slot = if keyword == "interest" {
                    &mut self.interest
                } else {
                    &mut self.outcome
                };
                *slot = Some(name.into());
            }
            other => {
                return Err(syntax(line.number, col, format!("unknown statement `{other}`")));
            }
        }
        if let Some(&(tok, at)) = line.rest().first() {
            return Err(syntax(line.number, at, format!("unexpected {tok} at end of line")));
        }
        Ok(())
    }

    fn locate(&self, err: &Error) -> (usize, usize) {
        match err {
            Error::DuplicateNode(name) | Error::ConditionedUnobserved(name) => (self.node_line(name), 1),
            Error::SelfLoop(name) => self.edge_line(name, name, 0),
            Error::DanglingEdge { from, to, .. } => self.edge_line(from, to, 0),
            Error::DuplicateEdge { from, to } => self.edge_line(from, to, 1),
            Error::Cycle(names) => {
                // the edge closing the cycle is the one declared last
                let mut worst = (self.header_line, 1);
                for i in 0..names.len() {
                    let at = self.edge_line(&names[i], &names[(i + 1) % names.len()], 0);
                    worst = worst.max(at);
                }
                worst
            }
            _ => (self.header_line, 1),
        }
    }

    fn finish(self) -> Result<ModelSpec, ParseError> {
        let Some(name) = self.name.clone() else {
            return Err(syntax(1, 1, "missing `model` header"));
        };
        let dag = Dag::build(self.nodes.clone(), self.edges.clone()).map_err(|err| {
            let (line, column) = self.locate(&err);
            semantic(line, column, err)
        })?;
        let predictor = match self.predictor {
            Some((spec, line, column)) => {
                attach_predictor(&dag, &spec).map_err(|err| semantic(line, column, err))?;
                Some(spec)
            }
            None => None,
        };
        Ok(ModelSpec {
            name,
            dag,
            interest: self.interest,
            outcome: self.outcome,
            predictor,
        })
    }
}

/// Parses a model file. LF and CRLF line endings are both accepted.
pub fn parse_model(text: &str) -> Result<ModelSpec, ParseError> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut builder = Builder::default();
    for (i, raw) in text.split('\n').enumerate() {
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        let number = i + 1;
        let toks = lex(raw, number)?;
        if toks.is_empty() {
            continue;
        }
        let mut line = Line {
            number,
            toks,
            pos: 0,
            end_column: raw.chars().count() + 1,
        };
        builder.statement(&mut line)?;
        debug_assert_eq!(line.column(), line.end_column);
    }
    builder.finish()
}
