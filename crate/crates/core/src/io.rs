//! Instance files.
//!
//! JSON form: `{"tiers": P, "columns": C, "stacks": [[bottom, ..., top], ...]}`.
//! Stacks are listed in column order, so the first stack is column 1.
//!
//! Plain-text form, handy for hand-written bays: a header line `P C`, then
//! one line per column with labels bottom to top separated by spaces. Blank
//! lines are empty columns only when they fall inside the `C` column lines;
//! lines starting with `#` are comments.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bay::{Bay, BayError, Label};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{}{field}: {message}", line.map(|l| format!("line {l}, ")).unwrap_or_default())]
pub struct ParseError {
    pub line: Option<usize>,
    pub field: String,
    pub message: String,
}

impl ParseError {
    fn new(line: Option<usize>, field: impl Into<String>, message: impl ToString) -> ParseError {
        ParseError {
            line,
            field: field.into(),
            message: message.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BayFile {
    pub tiers: usize,
    pub columns: usize,
    pub stacks: Vec<Vec<Label>>,
}

impl From<&Bay> for BayFile {
    fn from(bay: &Bay) -> BayFile {
        BayFile {
            tiers: bay.tiers(),
            columns: bay.columns(),
            stacks: bay.to_stacks(),
        }
    }
}

impl BayFile {
    pub fn into_bay(self) -> Result<Bay, ParseError> {
        Bay::with_columns(self.tiers, self.columns, &self.stacks).map_err(bay_error)
    }
}

fn bay_error(e: BayError) -> ParseError {
    let field = match &e {
        BayError::Dimensions { .. } => "tiers/columns".to_string(),
        BayError::StackCount { .. } => "stacks".to_string(),
        BayError::StackTooHigh { column, .. } | BayError::ZeroLabel { column } => {
            format!("stacks[{column}]")
        }
        BayError::DuplicateLabel { .. } => "stacks".to_string(),
    };
    ParseError::new(None, field, e)
}

pub fn to_json(bay: &Bay) -> String {
    serde_json::to_string(&BayFile::from(bay)).expect("bay serializes")
}

pub fn parse_json(input: &str) -> Result<Bay, ParseError> {
    let file: BayFile = serde_json::from_str(input)
        .map_err(|e| ParseError::new(Some(e.line()), "json", e))?;
    file.into_bay()
}

pub fn to_text(bay: &Bay) -> String {
    let mut out = format!("{} {}\n", bay.tiers(), bay.columns());
    for stack in bay.stacks() {
        let line: Vec<String> = stack.iter().map(Label::to_string).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn parse_text(input: &str) -> Result<Bay, ParseError> {
    let mut lines = input
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.starts_with('#'));
    let (hline, header) = lines
        .by_ref()
        .find(|(_, l)| !l.is_empty())
        .ok_or_else(|| ParseError::new(None, "header", "missing `P C` header"))?;
    let dims: Vec<&str> = header.split_whitespace().collect();
    if dims.len() != 2 {
        return Err(ParseError::new(Some(hline), "header", "expected `P C`"));
    }
    let tiers: usize = dims[0]
        .parse()
        .map_err(|e| ParseError::new(Some(hline), "tiers", e))?;
    let columns: usize = dims[1]
        .parse()
        .map_err(|e| ParseError::new(Some(hline), "columns", e))?;

    let mut stacks = Vec::with_capacity(columns);
    for (lineno, line) in lines.by_ref() {
        if stacks.len() == columns {
            if line.is_empty() {
                continue;
            }
            return Err(ParseError::new(
                Some(lineno),
                "stacks",
                format!("more than {columns} column lines"),
            ));
        }
        let stack = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<Label>().map_err(|e| {
                    ParseError::new(Some(lineno), format!("column {}", stacks.len() + 1), e)
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        if stack.len() > tiers {
            return Err(ParseError::new(
                Some(lineno),
                format!("column {}", stacks.len() + 1),
                format!("{} containers exceed {tiers} tiers", stack.len()),
            ));
        }
        stacks.push(stack);
    }
    // Trailing empty columns may be omitted.
    stacks.resize(columns, Vec::new());
    Bay::with_columns(tiers, columns, &stacks).map_err(bay_error)
}

/// Parses either form, choosing by the first non-blank character.
pub fn parse_instance(input: &str) -> Result<Bay, ParseError> {
    if input.trim_start().starts_with('{') {
        parse_json(input)
    } else {
        parse_text(input)
    }
}

/// Two-stage instance file: the bay plus the information parameters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoStageFile {
    pub tiers: usize,
    pub columns: usize,
    pub stacks: Vec<Vec<Label>>,
    pub known: usize,
    pub t_star: usize,
    #[serde(default)]
    pub seed: u64,
}

pub fn parse_two_stage_json(input: &str) -> Result<TwoStageFile, ParseError> {
    serde_json::from_str(input).map_err(|e| ParseError::new(Some(e.line()), "json", e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig2() -> Bay {
        Bay::new(3, &[vec![4, 1, 6], vec![2, 5], vec![3]]).unwrap()
    }

    #[test]
    fn json_round_trip() {
        let json = to_json(&fig2());
        assert_eq!(json, r#"{"tiers":3,"columns":3,"stacks":[[4,1,6],[2,5],[3]]}"#);
        assert_eq!(parse_json(&json).unwrap(), fig2());
    }

    #[test]
    fn text_round_trip() {
        let text = to_text(&fig2());
        assert_eq!(parse_text(&text).unwrap(), fig2());
        assert_eq!(parse_instance("# fig 2\n3 3\n4 1 6\n2 5\n3\n").unwrap(), fig2());
        assert_eq!(
            parse_text("3 4\n4 1 6\n\n2 5\n").unwrap().to_stacks(),
            vec![vec![4, 1, 6], vec![], vec![2, 5], vec![]]
        );
    }

    #[test]
    fn stack_exceeding_tiers_is_rejected() {
        let err = parse_json(r#"{"tiers":2,"columns":1,"stacks":[[1,2,3]]}"#).unwrap_err();
        assert_eq!(err.field, "stacks[0]");
        let err = parse_text("2 2\n1 2 3\n4\n").unwrap_err();
        assert_eq!(err.line, Some(2));
        assert_eq!(err.field, "column 1");
    }

    #[test]
    fn duplicate_label_is_rejected() {
        let err = parse_json(r#"{"tiers":3,"columns":2,"stacks":[[1,2],[2]]}"#).unwrap_err();
        assert!(err.message.contains("more than once"), "{err}");
        assert!(parse_text("3 2\n1 2\n2\n").is_err());
    }

    #[test]
    fn malformed_input_reports_context() {
        let err = parse_text("3 2\n1 x\n").unwrap_err();
        assert_eq!(err.line, Some(2));
        assert!(parse_json("{\"tiers\": 3,\n \"columns\": }").unwrap_err().line.is_some());
        assert!(parse_text("3\n1\n").is_err());
        assert!(parse_json(r#"{"tiers":3,"columns":3,"stacks":[[1]]}"#).is_err());
    }

    #[test]
    fn two_stage_file() {
        let f = parse_two_stage_json(
            r#"{"tiers":3,"columns":3,"stacks":[[4,1,6],[2,5],[3]],"known":4,"t_star":3}"#,
        )
        .unwrap();
        assert_eq!(f.known, 4);
        assert_eq!(f.seed, 0);
    }
}
