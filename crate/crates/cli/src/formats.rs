//! Text formats for polynomial maps and atlases.
//!
//! A map file lists one block per output mode; each term line is
//! `re im : j_1 … j_n : k_1 … k_n` for the coefficient of `Π w^j w̄^k`.
//!
//! ```text
//! polymap 1
//! out 0
//! 1.0000000000000000e0 0.0000000000000000e0 : 1 : 0
//! 1.0000000000000000e0 0.0000000000000000e0 : 0 : 1
//! end
//! ```
//!
//! An atlas file lists charts and then transitions, each followed by an
//! embedded map block:
//!
//! ```text
//! atlas 1
//! chart U
//! chart V box -2.0000000000000000e0 2.0000000000000000e0
//! transition U -> V
//! polymap 1
//! …
//! end
//! end
//! ```
//!
//! Blank lines and `#` comments are ignored. Writers emit every float as
//! `{:.16e}`, which round-trips `f64` exactly.

use std::fmt::Write as _;

use cohatlas_core::atlas::{Atlas, Chart, DomainBox, Transition};
use cohatlas_core::phase_space::{Monomial, PolyMap, Term};
use cohatlas_core::C64;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error(transparent)]
    Core(#[from] cohatlas_core::Error),
}

fn syntax(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Syntax { line, message: message.into() }
}

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

struct Lines<'a> {
    inner: std::iter::Peekable<Box<dyn Iterator<Item = (usize, &'a str)> + 'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let it: Box<dyn Iterator<Item = (usize, &'a str)> + 'a> = Box::new(
            text.lines()
                .enumerate()
                .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
                .filter(|(_, l)| !l.is_empty()),
        );
        Self { inner: it.peekable(), last: 0 }
    }

    fn next(&mut self) -> Result<(usize, &'a str), FormatError> {
        match self.inner.next() {
            Some((n, l)) => {
                self.last = n;
                Ok((n, l))
            }
            None => Err(syntax(self.last + 1, "unexpected end of input")),
        }
    }

    fn peek(&mut self) -> Option<&'a str> {
        self.inner.peek().map(|(_, l)| *l)
    }

    fn finish(&mut self) -> Result<(), FormatError> {
        match self.inner.next() {
            Some((n, l)) => Err(syntax(n, format!("trailing content `{l}`"))),
            None => Ok(()),
        }
    }
}

fn parse_f64(line: usize, s: &str) -> Result<f64, FormatError> {
    let v: f64 = s.parse().map_err(|_| syntax(line, format!("`{s}` is not a number")))?;
    if !v.is_finite() {
        return Err(syntax(line, format!("`{s}` is not finite")));
    }
    Ok(v)
}

fn parse_exponents(line: usize, s: &str, n: usize) -> Result<Vec<u32>, FormatError> {
    let out: Vec<u32> = s
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| syntax(line, format!("`{t}` is not an exponent"))))
        .collect::<Result<_, _>>()?;
    if out.len() != n {
        return Err(syntax(line, format!("expected {n} exponent(s), found {}", out.len())));
    }
    Ok(out)
}

fn header(line: usize, text: &str, keyword: &str) -> Result<usize, FormatError> {
    let mut parts = text.split_whitespace();
    if parts.next() != Some(keyword) {
        return Err(syntax(line, format!("expected `{keyword} <modes>`")));
    }
    let n = parts
        .next()
        .and_then(|t| t.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .ok_or_else(|| syntax(line, "mode count must be a positive integer"))?;
    if parts.next().is_some() {
        return Err(syntax(line, "unexpected tokens after the mode count"));
    }
    Ok(n)
}

fn read_polymap(lines: &mut Lines<'_>) -> Result<PolyMap, FormatError> {
    let (n0, head) = lines.next()?;
    let n = header(n0, head, "polymap")?;
    let mut components: Vec<Vec<Term>> = Vec::with_capacity(n);
    for l in 0..n {
        let (ln, text) = lines.next()?;
        if text != format!("out {l}") {
            return Err(syntax(ln, format!("expected `out {l}`")));
        }
        let mut terms = Vec::new();
        while let Some(next) = lines.peek() {
            if next.starts_with("out") || next == "end" {
                break;
            }
            let (ln, text) = lines.next()?;
            let fields: Vec<&str> = text.split(':').collect();
            if fields.len() != 3 {
                return Err(syntax(ln, "term lines read `re im : holo exponents : anti exponents`"));
            }
            let coeff: Vec<&str> = fields[0].split_whitespace().collect();
            if coeff.len() != 2 {
                return Err(syntax(ln, "coefficient needs a real and an imaginary part"));
            }
            let c = C64::new(parse_f64(ln, coeff[0])?, parse_f64(ln, coeff[1])?);
            let holo = parse_exponents(ln, fields[1], n)?;
            let anti = parse_exponents(ln, fields[2], n)?;
            terms.push(Term { coeff: c, monomial: Monomial::new(holo, anti)? });
        }
        components.push(terms);
    }
    let (ln, text) = lines.next()?;
    if text != "end" {
        return Err(syntax(ln, "expected `end` after the last output block"));
    }
    Ok(PolyMap::from_terms(n, components)?)
}

pub fn parse_polymap(text: &str) -> Result<PolyMap, FormatError> {
    let mut lines = Lines::new(text);
    let map = read_polymap(&mut lines)?;
    lines.finish()?;
    Ok(map)
}

fn write_exponents(out: &mut String, e: &[u32]) {
    let parts: Vec<String> = e.iter().map(u32::to_string).collect();
    out.push_str(&parts.join(" "));
}

pub fn write_polymap(map: &PolyMap) -> String {
    let mut out = String::new();
    writeln!(out, "polymap {}", map.n_modes()).unwrap();
    for (l, terms) in map.to_terms().iter().enumerate() {
        writeln!(out, "out {l}").unwrap();
        for t in terms {
            write!(out, "{} {} : ", fmt_f64(t.coeff.re), fmt_f64(t.coeff.im)).unwrap();
            write_exponents(&mut out, &t.monomial.holo);
            out.push_str(" : ");
            write_exponents(&mut out, &t.monomial.anti);
            out.push('\n');
        }
    }
    out.push_str("end\n");
    out
}

pub fn parse_atlas(text: &str) -> Result<Atlas, FormatError> {
    let mut lines = Lines::new(text);
    let (n0, head) = lines.next()?;
    let n = header(n0, head, "atlas")?;
    let mut charts = Vec::new();
    let mut transitions = Vec::new();
    loop {
        let (ln, text) = lines.next()?;
        let tokens: Vec<&str> = text.split_whitespace().collect();
        match tokens.as_slice() {
            ["end"] => break,
            ["chart", name] => charts.push(Chart::new(*name)),
            ["chart", name, "box", lo, hi] => charts.push(Chart {
                name: (*name).into(),
                domain: Some(DomainBox { lo: parse_f64(ln, lo)?, hi: parse_f64(ln, hi)? }),
            }),
            ["transition", from, "->", to] => {
                let map = read_polymap(&mut lines)?;
                transitions.push(Transition { from: (*from).into(), to: (*to).into(), map });
            }
            _ => return Err(syntax(ln, format!("unrecognized atlas line `{text}`"))),
        }
    }
    lines.finish()?;
    Ok(Atlas::new(n, charts, transitions)?)
}

pub fn write_atlas(atlas: &Atlas) -> String {
    let mut out = String::new();
    writeln!(out, "atlas {}", atlas.n_modes()).unwrap();
    for c in atlas.charts() {
        match c.domain {
            Some(b) => writeln!(out, "chart {} box {} {}", c.name, fmt_f64(b.lo), fmt_f64(b.hi)).unwrap(),
            None => writeln!(out, "chart {}", c.name).unwrap(),
        }
    }
    for (from, to, map) in atlas.transitions() {
        writeln!(out, "transition {from} -> {to}").unwrap();
        out.push_str(&write_polymap(map));
    }
    out.push_str("end\n");
    out
}
