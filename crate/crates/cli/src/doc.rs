//! A line-oriented text format for complexes of free modules.
//!
//! One declaration per line; `#` starts a comment. Declarations:
//!
//! ```text
//! field Q              # or: field GF:7
//! n 3
//! term 0: (-1,1) (-1,1)
//! entry -1 0 0: e[0,2] + e[1,3]
//! ```
//!
//! A `term` line lists the summands of the free module at one position as
//! `(twist,strand)` pairs without inner spaces; the strand must equal the
//! position minus the twist. An `entry` line gives one matrix entry of the
//! differential out of a position: the row indexes a summand at position
//! p+1, the column a summand at position p, and the value uses the
//! exterior-element grammar (signed sums of `c*e[i,...]`). Omitted entries
//! are zero. A parsed document is verified: d^2 = 0 must hold.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use strand_core::exactla::Field;
use strand_core::exterior::{parse_element, ExtElement, Variance};
use strand_core::lamcomplex::{verify_complex, FreeComplex};
use strand_core::lammod::{FreeModule, ModMorphism};
use strand_core::{Error, Result};

/// Parses a field descriptor: `Q` or `GF:p` with p prime.
pub fn parse_field(s: &str) -> Result<Field> {
    if s == "Q" {
        return Ok(Field::Q);
    }
    if let Some(p) = s.strip_prefix("GF:") {
        let p: u64 = p
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad prime in field '{}'", s)))?;
        let field = Field::Fp(p);
        field.validate()?;
        return Ok(field);
    }
    Err(Error::InvalidArgument(format!(
        "unknown field '{}', expected Q or GF:p",
        s
    )))
}

/// The descriptor accepted back by `parse_field`.
pub fn field_name(field: Field) -> String {
    match field {
        Field::Q => "Q".to_string(),
        Field::Fp(p) => format!("GF:{}", p),
    }
}

struct RawEntry {
    line: usize,
    position: i64,
    row: usize,
    col: usize,
    expr: String,
}

/// Parses a complex document into a verified complex. Errors carry the line
/// number of the offending declaration; a document whose differentials do
/// not square to zero is rejected with the failing composite as witness.
pub fn parse_complex_document(text: &str) -> Result<FreeComplex> {
    let mut field: Option<Field> = None;
    let mut n: Option<usize> = None;
    let mut twists: BTreeMap<i64, Vec<i64>> = BTreeMap::new();
    let mut entries: Vec<RawEntry> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let fail = |msg: String| Error::Parse { line, msg };
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix("field ") {
            if field.is_some() {
                return Err(fail("duplicate 'field' declaration".into()));
            }
            field = Some(parse_field(rest.trim()).map_err(|e| Error::Parse {
                line,
                msg: e.to_string(),
            })?);
        } else if let Some(rest) = content.strip_prefix("n ") {
            if n.is_some() {
                return Err(fail("duplicate 'n' declaration".into()));
            }
            let v: usize = rest
                .trim()
                .parse()
                .map_err(|_| fail(format!("bad ambient dimension '{}'", rest.trim())))?;
            if v == 0 {
                return Err(fail("n must be positive".into()));
            }
            n = Some(v);
        } else if let Some(rest) = content.strip_prefix("term ") {
            let (head, tail) = rest
                .split_once(':')
                .ok_or_else(|| fail("expected ':' after the term position".into()))?;
            let p: i64 = head
                .trim()
                .parse()
                .map_err(|_| fail(format!("bad term position '{}'", head.trim())))?;
            if twists.contains_key(&p) {
                return Err(fail(format!("duplicate term at position {}", p)));
            }
            let mut list = Vec::new();
            for token in tail.split_whitespace() {
                let inner = token
                    .strip_prefix('(')
                    .and_then(|t| t.strip_suffix(')'))
                    .ok_or_else(|| fail(format!("expected (twist,strand), got '{}'", token)))?;
                let (a, s) = inner
                    .split_once(',')
                    .ok_or_else(|| fail(format!("expected (twist,strand), got '{}'", token)))?;
                let twist: i64 = a
                    .parse()
                    .map_err(|_| fail(format!("bad twist '{}'", a)))?;
                let strand: i64 = s
                    .parse()
                    .map_err(|_| fail(format!("bad strand '{}'", s)))?;
                if strand != p - twist {
                    return Err(fail(format!(
                        "strand {} contradicts position {} minus twist {}",
                        strand, p, twist
                    )));
                }
                list.push(twist);
            }
            if list.is_empty() {
                return Err(fail(format!("term at position {} has no summands", p)));
            }
            twists.insert(p, list);
        } else if let Some(rest) = content.strip_prefix("entry ") {
            let (head, expr) = rest
                .split_once(':')
                .ok_or_else(|| fail("expected ':' after the entry indices".into()))?;
            let parts: Vec<&str> = head.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(fail("expected 'entry <position> <row> <col>:'".into()));
            }
            let position: i64 = parts[0]
                .parse()
                .map_err(|_| fail(format!("bad entry position '{}'", parts[0])))?;
            let row: usize = parts[1]
                .parse()
                .map_err(|_| fail(format!("bad entry row '{}'", parts[1])))?;
            let col: usize = parts[2]
                .parse()
                .map_err(|_| fail(format!("bad entry column '{}'", parts[2])))?;
            entries.push(RawEntry {
                line,
                position,
                row,
                col,
                expr: expr.trim().to_string(),
            });
        } else {
            return Err(fail(format!(
                "unrecognised declaration '{}'",
                content.split_whitespace().next().unwrap_or("")
            )));
        }
    }

    let field = field.ok_or(Error::Parse {
        line: 0,
        msg: "missing 'field' declaration".into(),
    })?;
    let n = n.ok_or(Error::Parse {
        line: 0,
        msg: "missing 'n' declaration".into(),
    })?;
    let modules: BTreeMap<i64, FreeModule> = twists
        .iter()
        .map(|(&p, list)| (p, FreeModule::new(n, field, list.clone())))
        .collect();

    let mut matrices: BTreeMap<i64, Vec<Vec<ExtElement>>> = BTreeMap::new();
    for raw in entries {
        let fail = |msg: String| Error::Parse {
            line: raw.line,
            msg,
        };
        let src = modules
            .get(&raw.position)
            .ok_or_else(|| fail(format!("entry at position {} without a term", raw.position)))?;
        let tgt = modules.get(&(raw.position + 1)).ok_or_else(|| {
            fail(format!(
                "entry at position {} without a term at position {}",
                raw.position,
                raw.position + 1
            ))
        })?;
        if raw.row >= tgt.rank() || raw.col >= src.rank() {
            return Err(fail(format!(
                "entry index ({}, {}) outside a {}x{} matrix",
                raw.row,
                raw.col,
                tgt.rank(),
                src.rank()
            )));
        }
        let mut element = parse_element(&raw.expr, n, field).map_err(|e| Error::Parse {
            line: raw.line,
            msg: e.to_string(),
        })?;
        if element.degree == 0 {
            // Bare constants carry no variance information.
            element.variance = Variance::V;
        }
        let gap = tgt.twists[raw.row] - src.twists[raw.col];
        if !element.is_zero() {
            if element.variance != Variance::V {
                return Err(fail("entries must lie in ΛV".into()));
            }
            if gap < 0 || element.degree as i64 != gap {
                return Err(fail(format!(
                    "entry degree {} does not match twist gap {}",
                    element.degree, gap
                )));
            }
        }
        let mat = matrices.entry(raw.position).or_insert_with(|| {
            vec![vec![ExtElement::zero(n, field, Variance::V, 0); src.rank()]; tgt.rank()]
        });
        if !mat[raw.row][raw.col].is_zero() {
            return Err(fail(format!(
                "duplicate entry ({}, {}) at position {}",
                raw.row, raw.col, raw.position
            )));
        }
        mat[raw.row][raw.col] = element;
    }

    let mut diffs: BTreeMap<i64, ModMorphism> = BTreeMap::new();
    for (p, mat) in matrices {
        let src = modules[&p].clone();
        let tgt = modules[&(p + 1)].clone();
        diffs.insert(p, ModMorphism::new(src, tgt, mat)?);
    }
    let complex = FreeComplex::new(n, field, modules, diffs)?;
    let report = verify_complex(&complex);
    if !report.passed {
        return Err(Error::InvalidArgument(format!(
            "document is not a complex: {}",
            report.failures.join("; ")
        )));
    }
    Ok(complex)
}

/// Emits a document that parses back to an equal complex.
pub fn emit_complex_document(complex: &FreeComplex) -> String {
    let mut out = String::new();
    writeln!(out, "# complex document").unwrap();
    writeln!(out, "field {}", field_name(complex.field)).unwrap();
    writeln!(out, "n {}", complex.n).unwrap();
    let positions = complex.positions();
    for &p in &positions {
        let term = complex.term(p);
        let summands: Vec<String> = term
            .twists
            .iter()
            .map(|&a| format!("({},{})", a, p - a))
            .collect();
        writeln!(out, "term {}: {}", p, summands.join(" ")).unwrap();
    }
    for &p in &positions {
        let d = complex.diff(p);
        for row in 0..d.target.rank() {
            for col in 0..d.source.rank() {
                let e = d.entry(row, col);
                if !e.is_zero() {
                    writeln!(out, "entry {} {} {}: {}", p, row, col, e).unwrap();
                }
            }
        }
    }
    out
}
