//! Plain-text formats.
//!
//! A subspace block is a header line `k n q` followed by `k` rows of `n`
//! element indices. `q` is a field name such as `5` or `2^3`. Any basis is
//! accepted on input; output is always canonical.
//!
//! Sequence files start with `GRAY n k q P cyclic` or `PROJ n q P cyclic`
//! and hold `P` subspace blocks separated by blank lines. `cyclic` is
//! written as `true`/`false`; `1`/`0` are accepted as well.

use std::io::{self, Write};

use thiserror::Error;

use crate::field::{Field, FieldError};
use crate::grassmann::GraySequence;
use crate::linalg::{LinalgError, Matrix, Subspace};
use crate::projective::SubspaceSequence;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: {source}")]
    Field { line: usize, source: FieldError },
    #[error("line {line}: {source}")]
    Linalg { line: usize, source: LinalgError },
}

fn syntax(line: usize, msg: impl Into<String>) -> ParseError {
    ParseError::Syntax { line, msg: msg.into() }
}

/// A matrix as read, before canonicalization.
#[derive(Debug, Clone)]
pub struct MatrixBlock {
    pub field: Field,
    pub k: usize,
    pub n: usize,
    pub basis: Matrix,
    /// 1-based line number of the block header.
    pub line: usize,
}

impl MatrixBlock {
    /// Row space of the block; fails if the rows are dependent.
    pub fn subspace(&self) -> Result<Subspace, ParseError> {
        let s = Subspace::from_basis(&self.field, &self.basis)
            .map_err(|source| ParseError::Linalg { line: self.line, source })?;
        if s.dim() != self.k {
            return Err(ParseError::Linalg { line: self.line, source: LinalgError::RankDeficient });
        }
        Ok(s)
    }

    /// Whether the rows differ from the canonical form of their span.
    pub fn is_canonical(&self) -> bool {
        self.subspace().map(|s| s.matrix() == &self.basis).unwrap_or(false)
    }
}

pub fn format_subspace(s: &Subspace) -> String {
    let mut out = format!("{} {} {}\n", s.dim(), s.ambient(), s.field().name());
    for i in 0..s.dim() {
        let row: Vec<String> = s.row(i).iter().map(u32::to_string).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn write_gray_header<W: Write>(w: &mut W, n: usize, k: usize, field: &Field, len: &str, cyclic: bool) -> io::Result<()> {
    writeln!(w, "GRAY {n} {k} {} {len} {cyclic}", field.name())
}

pub fn write_proj_header<W: Write>(w: &mut W, n: usize, field: &Field, len: usize, cyclic: bool) -> io::Result<()> {
    writeln!(w, "PROJ {n} {} {len} {cyclic}", field.name())
}

/// Writes one block, preceded by a blank line unless it is the first.
pub fn write_block<W: Write>(w: &mut W, s: &Subspace, first: bool) -> io::Result<()> {
    if !first {
        writeln!(w)?;
    }
    w.write_all(format_subspace(s).as_bytes())
}

pub fn write_gray<W: Write>(w: &mut W, s: &GraySequence) -> io::Result<()> {
    write_gray_header(w, s.n, s.k, &s.field, &s.items.len().to_string(), s.cyclic)?;
    for (i, item) in s.items.iter().enumerate() {
        write_block(w, item, i == 0)?;
    }
    Ok(())
}

pub fn write_proj<W: Write>(w: &mut W, s: &SubspaceSequence) -> io::Result<()> {
    write_proj_header(w, s.n, &s.field, s.items.len(), s.cyclic)?;
    for (i, item) in s.items.iter().enumerate() {
        write_block(w, item, i == 0)?;
    }
    Ok(())
}

pub fn format_gray(s: &GraySequence) -> String {
    let mut out = Vec::new();
    write_gray(&mut out, s).expect("writing to memory");
    String::from_utf8(out).unwrap()
}

pub fn format_proj(s: &SubspaceSequence) -> String {
    let mut out = Vec::new();
    write_proj(&mut out, s).expect("writing to memory");
    String::from_utf8(out).unwrap()
}

struct Lines<'a> {
    inner: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines { inner: text.lines().enumerate().peekable() }
    }

    fn skip_blank(&mut self) {
        while self.inner.peek().is_some_and(|(_, l)| l.trim().is_empty()) {
            self.inner.next();
        }
    }

    fn next_line(&mut self) -> Option<(usize, &'a str)> {
        self.inner.next().map(|(i, l)| (i + 1, l.trim()))
    }

    fn last_line(&mut self) -> usize {
        self.inner.peek().map(|(i, _)| *i + 1).unwrap_or(0)
    }
}

fn parse_usize(tok: &str, line: usize, what: &str) -> Result<usize, ParseError> {
    tok.parse().map_err(|_| syntax(line, format!("{what}: expected a natural number, got {tok:?}")))
}

fn parse_field(tok: &str, line: usize) -> Result<Field, ParseError> {
    Field::parse(tok).map_err(|source| ParseError::Field { line, source })
}

fn parse_cyclic(tok: &str, line: usize) -> Result<bool, ParseError> {
    match tok {
        "true" | "1" => Ok(true),
        "false" | "0" => Ok(false),
        _ => Err(syntax(line, format!("cyclic flag must be true/false/1/0, got {tok:?}"))),
    }
}

fn read_block(lines: &mut Lines<'_>, cached: Option<&Field>) -> Result<MatrixBlock, ParseError> {
    lines.skip_blank();
    let (line, header) = lines.next_line().ok_or_else(|| syntax(0, "expected a subspace block"))?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.len() != 3 {
        return Err(syntax(line, "block header must be `k n q`"));
    }
    let k = parse_usize(toks[0], line, "k")?;
    let n = parse_usize(toks[1], line, "n")?;
    let field = match cached {
        Some(f) if Field::parse(toks[2]).is_ok_and(|g| g.same_as(f)) => f.clone(),
        _ => parse_field(toks[2], line)?,
    };
    if k > n {
        return Err(syntax(line, format!("k = {k} exceeds n = {n}")));
    }
    let mut data = Vec::with_capacity(k * n);
    for _ in 0..k {
        let (l, text) = lines.next_line().ok_or_else(|| syntax(line, "matrix ends early"))?;
        if text.is_empty() {
            return Err(syntax(l, "matrix ends early"));
        }
        let row: Vec<&str> = text.split_whitespace().collect();
        if row.len() != n {
            return Err(syntax(l, format!("expected {n} entries, got {}", row.len())));
        }
        for tok in row {
            let v: u32 = tok.parse().map_err(|_| syntax(l, format!("bad entry {tok:?}")))?;
            if v >= field.q() {
                return Err(syntax(l, format!("entry {v} is not an element of GF({})", field.name())));
            }
            data.push(v);
        }
    }
    Ok(MatrixBlock { field, k, n, basis: Matrix::new(k, n, data), line })
}

/// All subspace blocks in `text` (no sequence header).
pub fn parse_blocks(text: &str) -> Result<Vec<MatrixBlock>, ParseError> {
    let mut lines = Lines::new(text);
    let mut out = Vec::new();
    let mut cached: Option<Field> = None;
    loop {
        lines.skip_blank();
        if lines.inner.peek().is_none() {
            return Ok(out);
        }
        let b = read_block(&mut lines, cached.as_ref())?;
        cached = Some(b.field.clone());
        out.push(b);
    }
}

pub fn parse_subspace(text: &str) -> Result<Subspace, ParseError> {
    let blocks = parse_blocks(text)?;
    match blocks.as_slice() {
        [b] => b.subspace(),
        _ => Err(syntax(0, format!("expected one subspace block, found {}", blocks.len()))),
    }
}

/// A parsed sequence file of either kind.
#[derive(Debug, Clone)]
pub enum SequenceFile {
    Gray(GraySequence),
    Proj(SubspaceSequence),
}

pub fn parse_sequence(text: &str) -> Result<SequenceFile, ParseError> {
    let mut lines = Lines::new(text);
    lines.skip_blank();
    let (line, header) = lines.next_line().ok_or_else(|| syntax(0, "empty input"))?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    let (n, k, field, count, cyclic) = match toks.as_slice() {
        ["GRAY", n, k, q, p, c] => (
            parse_usize(n, line, "n")?,
            Some(parse_usize(k, line, "k")?),
            parse_field(q, line)?,
            parse_usize(p, line, "P")?,
            parse_cyclic(c, line)?,
        ),
        ["PROJ", n, q, p, c] => (
            parse_usize(n, line, "n")?,
            None,
            parse_field(q, line)?,
            parse_usize(p, line, "P")?,
            parse_cyclic(c, line)?,
        ),
        _ => return Err(syntax(line, "expected `GRAY n k q P cyclic` or `PROJ n q P cyclic`")),
    };
    let mut items = Vec::with_capacity(count.min(1 << 20));
    for _ in 0..count {
        let b = read_block(&mut lines, Some(&field))?;
        if !b.field.same_as(&field) {
            return Err(syntax(b.line, "block field differs from the header"));
        }
        if b.n != n || k.is_some_and(|k| k != b.k) {
            return Err(syntax(b.line, format!("block is {} x {}, header says n = {n}", b.k, b.n)));
        }
        items.push(b.subspace()?);
    }
    lines.skip_blank();
    if lines.inner.peek().is_some() {
        let l = lines.last_line();
        return Err(syntax(l, format!("more than the {count} declared blocks")));
    }
    Ok(match k {
        Some(k) => SequenceFile::Gray(GraySequence { n, k, field, items, cyclic }),
        None => SequenceFile::Proj(SubspaceSequence { n, field, items, cyclic }),
    })
}
