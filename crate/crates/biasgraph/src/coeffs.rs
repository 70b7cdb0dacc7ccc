use std::collections::BTreeMap;

use biasgraph_core::sim::CoefficientSource;

use crate::parse::{ParseError, ParseErrorKind};

/// Contents of a coefficient file.
///
/// ```text
/// # SOURCE TARGET VALUE
/// X A 0.5
/// # NODE noise_sd VALUE
/// A noise_sd 2.0
/// ```
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CoefficientFile {
    pub coefficients: BTreeMap<(String, String), f64>,
    pub noise_sd: BTreeMap<String, f64>,
}

impl CoefficientFile {
    pub fn into_source(self) -> CoefficientSource {
        CoefficientSource::Explicit {
            coefficients: self.coefficients,
            noise_sd: self.noise_sd,
        }
    }
}

fn error(line: usize, column: usize, msg: impl Into<String>) -> ParseError {
    ParseError {
        line,
        column,
        kind: ParseErrorKind::Syntax(msg.into()),
    }
}

/// Parses a coefficient file. Names are checked against the graph later, by
/// `build_scm`.
pub fn parse_coefficients(text: &str) -> Result<CoefficientFile, ParseError> {
    let mut out = CoefficientFile::default();
    for (i, raw) in text.split('\n').enumerate() {
        let number = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim_end_matches('\r');
        let mut fields = Vec::new();
        let mut column = 1;
        for piece in content.split(|c: char| c.is_whitespace()) {
            if !piece.is_empty() {
                fields.push((piece, column));
            }
            column += piece.chars().count() + 1;
        }
        if fields.is_empty() {
            continue;
        }
        if fields.len() != 3 {
            return Err(error(
                number,
                fields[0].1,
                format!("expected 3 fields, found {}", fields.len()),
            ));
        }
        let (value, value_col) = fields[2];
        let value: f64 = value
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| error(number, value_col, format!("`{value}` is not a finite number")))?;
        let (first, second) = (fields[0].0.to_string(), fields[1].0.to_string());
        if second.eq_ignore_ascii_case("noise_sd") {
            if out.noise_sd.insert(first.clone(), value).is_some() {
                return Err(error(number, 1, format!("noise for `{first}` given twice")));
            }
        } else if out
            .coefficients
            .insert((first.clone(), second.clone()), value)
            .is_some()
        {
            return Err(error(
                number,
                1,
                format!("coefficient for {first} -> {second} given twice"),
            ));
        }
    }
    Ok(out)
}
