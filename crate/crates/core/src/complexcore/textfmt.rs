//! Plain-text serialization of complex vectors and matrices.
//!
//! ```text
//! cvec 3
//! 1+0i -0.5+2i 3e-7-1i
//! cmat 2 2
//! 1+0i 0+0i
//! 0+0i 1+0i
//! ```
//!
//! One complex entry per whitespace-separated token, written `re+imi` (or
//! `re-imi`). Matrices are row-major, one row per line. Entries may wrap
//! across lines arbitrarily when reading. Blank lines and lines starting with
//! `#` are ignored. Floats use the shortest representation that round-trips.

use std::io::{BufRead, Write};

use super::linalg::{CMat, CVec, C64};
use crate::error::{Error, Result};

pub fn format_real(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub fn format_complex(z: C64) -> String {
    let im = format_real(z.im);
    let sign = if im.starts_with('-') { "" } else { "+" };
    format!("{}{sign}{im}i", format_real(z.re))
}

/// Accepts `re+imi`, `re-imi`, a bare real `re`, or a bare imaginary `imi`.
pub fn parse_complex(tok: &str) -> std::result::Result<C64, String> {
    let bad = || format!("malformed complex token {tok:?}");
    let real = |t: &str| t.parse::<f64>().map_err(|_| bad());
    let z = match tok.strip_suffix('i') {
        None => C64::new(real(tok)?, 0.0),
        Some(body) => {
            let bytes = body.as_bytes();
            let split = (1..bytes.len())
                .rev()
                .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
            match split {
                Some(k) => C64::new(real(&body[..k])?, real(&body[k..])?),
                None => C64::new(0.0, real(body)?),
            }
        }
    };
    if !z.is_finite() {
        return Err(format!("non-finite entry {tok:?}"));
    }
    Ok(z)
}

pub fn write_cvec<W: Write + ?Sized>(w: &mut W, v: &CVec) -> std::io::Result<()> {
    writeln!(w, "cvec {}", v.len())?;
    let line: Vec<String> = v.iter().map(|z| format_complex(*z)).collect();
    writeln!(w, "{}", line.join(" "))
}

pub fn write_cmat<W: Write + ?Sized>(w: &mut W, q: &CMat) -> std::io::Result<()> {
    writeln!(w, "cmat {} {}", q.rows(), q.cols())?;
    for i in 0..q.rows() {
        let line: Vec<String> = q.row(i).iter().map(|z| format_complex(*z)).collect();
        writeln!(w, "{}", line.join(" "))?;
    }
    Ok(())
}

/// An object read from a text stream.
#[derive(Clone, Debug, PartialEq)]
pub enum TextObject {
    Vec(CVec),
    Mat(CMat),
}

/// Pull-style reader over a stream of headers and entries.
pub struct TextReader<R> {
    lines: std::io::Lines<R>,
    line_no: usize,
    pending: std::collections::VecDeque<String>,
}

impl<R: BufRead> TextReader<R> {
    pub fn new(reader: R) -> Self {
        Self { lines: reader.lines(), line_no: 0, pending: Default::default() }
    }

    pub fn line_no(&self) -> usize {
        self.line_no
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse { line: self.line_no, msg: msg.into() })
    }

    /// Next meaningful line, split into tokens. `None` at end of input.
    pub fn next_line(&mut self) -> Result<Option<Vec<String>>> {
        for line in self.lines.by_ref() {
            self.line_no += 1;
            let line = line?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            return Ok(Some(t.split_whitespace().map(str::to_owned).collect()));
        }
        Ok(None)
    }

    fn take_entries(&mut self, count: usize) -> Result<Vec<C64>> {
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            if let Some(tok) = self.pending.pop_front() {
                match parse_complex(&tok) {
                    Ok(z) => out.push(z),
                    Err(msg) => return self.err(msg),
                }
                continue;
            }
            match self.next_line()? {
                Some(toks) => self.pending.extend(toks),
                None => return self.err(format!("expected {count} entries, found {}", out.len())),
            }
        }
        if !self.pending.is_empty() {
            return self.err("trailing tokens after object");
        }
        Ok(out)
    }

    fn parse_dim(&self, tok: Option<&String>) -> Result<usize> {
        match tok.and_then(|t| t.parse::<usize>().ok()) {
            Some(d) if d > 0 => Ok(d),
            _ => self.err("expected a positive dimension in header"),
        }
    }

    /// Reads the body of an object whose header tokens are given.
    pub fn read_object_with_header(&mut self, header: &[String]) -> Result<TextObject> {
        match header.first().map(String::as_str) {
            Some("cvec") if header.len() == 2 => {
                let m = self.parse_dim(header.get(1))?;
                let entries = self.take_entries(m)?;
                Ok(TextObject::Vec(CVec::new(entries)?))
            }
            Some("cmat") if header.len() == 3 => {
                let m = self.parse_dim(header.get(1))?;
                let n = self.parse_dim(header.get(2))?;
                let entries = self.take_entries(m * n)?;
                Ok(TextObject::Mat(CMat::new(m, n, entries)?))
            }
            _ => self.err(format!("unrecognized header {:?}", header.join(" "))),
        }
    }

    pub fn read_object(&mut self) -> Result<Option<TextObject>> {
        match self.next_line()? {
            Some(h) => self.read_object_with_header(&h).map(Some),
            None => Ok(None),
        }
    }

    pub fn read_cvec(&mut self) -> Result<CVec> {
        match self.read_object()? {
            Some(TextObject::Vec(v)) => Ok(v),
            Some(TextObject::Mat(_)) => self.err("expected cvec, found cmat"),
            None => self.err("expected cvec, found end of input"),
        }
    }

    pub fn read_cmat(&mut self) -> Result<CMat> {
        match self.read_object()? {
            Some(TextObject::Mat(q)) => Ok(q),
            Some(TextObject::Vec(_)) => self.err("expected cmat, found cvec"),
            None => self.err("expected cmat, found end of input"),
        }
    }

    /// Reads vectors until end of input.
    pub fn read_all_cvecs(&mut self) -> Result<Vec<CVec>> {
        let mut out = Vec::new();
        while let Some(obj) = self.read_object()? {
            match obj {
                TextObject::Vec(v) => out.push(v),
                TextObject::Mat(_) => return self.err("expected only cvec objects"),
            }
        }
        Ok(out)
    }
}

pub fn read_cvec_str(s: &str) -> Result<CVec> {
    TextReader::new(s.as_bytes()).read_cvec()
}

pub fn read_cmat_str(s: &str) -> Result<CMat> {
    TextReader::new(s.as_bytes()).read_cmat()
}
