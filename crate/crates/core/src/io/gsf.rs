//! GSF, the line-oriented graph structure format.
//!
//! ```text
//! # comment
//! piece <id> [orientable|nonorientable] genus=<n> boundary=<b> ends=<e> cones=<q1,q2,...|none>
//! solidtorus <id> meridian=<ms>,<mf>
//! k2xi <id> [fibration=moebius|disk22]
//! edge <id> <pieceA>:<slot> <pieceB>:<slot> matrix=<a>,<b>,<c>,<d> [reversing]
//! ray <id> attach=<piece>:<slot> period=<k>
//!   piece [orientable|nonorientable] genus=<n> boundary=2 ends=0 cones=... matrix=<a>,<b>,<c>,<d>
//! ```
//!
//! A ray record is followed by exactly `k` indented period lines. Slots are
//! 0-based. Matrices have rows `(a, b), (c, d)`, act on column vectors
//! `(section, fiber)` and must have determinant −1.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::graph::{Endpoint, GraphError, GraphStructure, PeriodicRay, TorusEdge};
use crate::lattice::{GluingMatrix, LatticeError, Slope};
use crate::orbifold::BaseOrbifold;
use crate::seifert::{FiberedPiece, K2Fibration, K2IPiece, Piece, SolidTorusPiece};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        message: message.into(),
    }
}

/// Attributes `key=value` plus bare flags of one record.
struct Attrs<'a> {
    line: usize,
    values: HashMap<&'a str, &'a str>,
    flags: Vec<&'a str>,
}

impl<'a> Attrs<'a> {
    fn new(line: usize, tokens: &[&'a str]) -> Result<Self, ParseError> {
        let mut values = HashMap::new();
        let mut flags = Vec::new();
        for tok in tokens {
            match tok.split_once('=') {
                Some((k, v)) => {
                    if values.insert(k, v).is_some() {
                        return Err(err(line, format!("attribute `{k}` given twice")));
                    }
                }
                None => flags.push(*tok),
            }
        }
        Ok(Attrs {
            line,
            values,
            flags,
        })
    }

    fn take(&mut self, key: &str) -> Result<&'a str, ParseError> {
        self.values
            .remove(key)
            .ok_or_else(|| err(self.line, format!("missing attribute `{key}=`")))
    }

    fn take_flag(&mut self, flag: &str) -> bool {
        match self.flags.iter().position(|f| *f == flag) {
            Some(i) => {
                self.flags.remove(i);
                true
            }
            None => false,
        }
    }

    fn finish(self) -> Result<(), ParseError> {
        if let Some(f) = self.flags.first() {
            return Err(err(self.line, format!("bad token `{f}`")));
        }
        if let Some(k) = self.values.keys().next() {
            return Err(err(self.line, format!("unknown attribute `{k}=`")));
        }
        Ok(())
    }
}

fn int<T: std::str::FromStr>(line: usize, what: &str, s: &str) -> Result<T, ParseError> {
    s.parse()
        .map_err(|_| err(line, format!("bad token `{s}` for {what}")))
}

fn int_list(line: usize, what: &str, s: &str, n: usize) -> Result<Vec<i64>, ParseError> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != n {
        return Err(err(
            line,
            format!("{what} needs {n} comma-separated integers, got `{s}`"),
        ));
    }
    parts.iter().map(|p| int(line, what, p)).collect()
}

fn matrix(line: usize, s: &str) -> Result<GluingMatrix, ParseError> {
    let v = int_list(line, "matrix", s, 4)?;
    GluingMatrix::new(v[0], v[1], v[2], v[3]).map_err(|e| match e {
        LatticeError::Determinant(d) => err(
            line,
            format!("determinant must be −1 (matrix {s} has determinant {d})"),
        ),
        other => err(line, other.to_string()),
    })
}

fn base(attrs: &mut Attrs<'_>) -> Result<BaseOrbifold, ParseError> {
    let line = attrs.line;
    let orientable = match (
        attrs.take_flag("orientable"),
        attrs.take_flag("nonorientable"),
    ) {
        (true, true) => return Err(err(line, "both orientable and nonorientable given")),
        (_, true) => false,
        _ => true,
    };
    let genus = int(line, "genus", attrs.take("genus")?)?;
    let boundary = int(line, "boundary", attrs.take("boundary")?)?;
    let ends = int(line, "ends", attrs.take("ends")?)?;
    let cones_text = attrs.take("cones")?;
    let cones: Vec<u32> = if cones_text == "none" {
        Vec::new()
    } else {
        cones_text
            .split(',')
            .map(|c| int(line, "cone order", c))
            .collect::<Result<_, _>>()?
    };
    BaseOrbifold::new(orientable, genus, boundary, ends, cones)
        .map_err(|e| err(line, e.to_string()))
}

fn endpoint(line: usize, s: &str) -> Result<(Endpoint, usize), ParseError> {
    let (piece, slot) = s
        .split_once(':')
        .ok_or_else(|| err(line, format!("bad token `{s}` (expected <piece>:<slot>)")))?;
    if piece.is_empty() {
        return Err(err(line, format!("bad token `{s}`")));
    }
    Ok((Endpoint::new(piece, int(line, "slot", slot)?), line))
}

fn check_id(line: usize, id: Option<&&str>) -> Result<String, ParseError> {
    match id {
        Some(id) if !id.contains(['=', ':', ',']) && !id.starts_with('#') => Ok(id.to_string()),
        Some(id) => Err(err(line, format!("bad id `{id}`"))),
        None => Err(err(line, "missing id")),
    }
}

/// Parses a GSF document. Slot references are checked against the declared
/// pieces; full structural validation is left to
/// [`validate`](crate::graph::validate).
pub fn parse(text: &str) -> Result<GraphStructure, ParseError> {
    let mut g = GraphStructure::new();
    let mut endpoints: Vec<(Endpoint, usize)> = Vec::new();
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l)).peekable();

    while let Some((line, raw)) = lines.next() {
        let content = raw.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = content.split_whitespace().collect();
        let Some(&kind) = tokens.first() else {
            continue;
        };
        if raw.starts_with(char::is_whitespace) {
            return Err(err(line, "indented line outside a ray period"));
        }
        let dup = |e: GraphError| err(line, e.to_string());
        match kind {
            "piece" => {
                let id = check_id(line, tokens.get(1))?;
                let mut attrs = Attrs::new(line, &tokens[2..])?;
                let b = base(&mut attrs)?;
                attrs.finish()?;
                g.add_piece(id, Piece::Fibered(FiberedPiece::new(b)))
                    .map_err(dup)?;
            }
            "solidtorus" => {
                let id = check_id(line, tokens.get(1))?;
                let mut attrs = Attrs::new(line, &tokens[2..])?;
                let m = int_list(line, "meridian", attrs.take("meridian")?, 2)?;
                attrs.finish()?;
                let v = SolidTorusPiece::new(Slope::new(m[0], m[1]))
                    .map_err(|e| err(line, e.to_string()))?;
                g.add_piece(id, Piece::SolidTorus(v)).map_err(dup)?;
            }
            "k2xi" => {
                let id = check_id(line, tokens.get(1))?;
                let mut attrs = Attrs::new(line, &tokens[2..])?;
                let fibration = match attrs.values.remove("fibration") {
                    None => None,
                    Some("moebius") => Some(K2Fibration::Moebius),
                    Some("disk22") => Some(K2Fibration::DiskTwoCones),
                    Some(other) => {
                        return Err(err(line, format!("bad token `{other}` for fibration")))
                    }
                };
                attrs.finish()?;
                g.add_piece(id, Piece::K2I(K2IPiece { fibration }))
                    .map_err(dup)?;
            }
            "edge" => {
                let id = check_id(line, tokens.get(1))?;
                if tokens.len() < 4 {
                    return Err(err(line, "edge needs two endpoints"));
                }
                let a = endpoint(line, tokens[2])?;
                let b = endpoint(line, tokens[3])?;
                let mut attrs = Attrs::new(line, &tokens[4..])?;
                let m = matrix(line, attrs.take("matrix")?)?;
                let reversing = attrs.take_flag("reversing");
                attrs.finish()?;
                endpoints.push(a.clone());
                endpoints.push(b.clone());
                g.add_edge(TorusEdge {
                    id,
                    a: a.0,
                    b: b.0,
                    matrix: m,
                    base_reversing: reversing,
                })
                .map_err(dup)?;
            }
            "ray" => {
                let id = check_id(line, tokens.get(1))?;
                let mut attrs = Attrs::new(line, &tokens[2..])?;
                let attach = endpoint(line, attrs.take("attach")?)?;
                let k: usize = int(line, "period", attrs.take("period")?)?;
                attrs.finish()?;
                if k == 0 {
                    return Err(err(line, "ray period must be at least 1"));
                }
                let mut period = Vec::with_capacity(k);
                for _ in 0..k {
                    let Some((pl, praw)) = lines.next() else {
                        return Err(err(line, format!("ray `{id}` expects {k} period line(s)")));
                    };
                    let ptoks: Vec<&str> = praw
                        .split('#')
                        .next()
                        .unwrap_or("")
                        .split_whitespace()
                        .collect();
                    if !praw.starts_with(char::is_whitespace) || ptoks.first() != Some(&"piece") {
                        return Err(err(
                            pl,
                            "expected an indented `piece ... matrix=...` period line",
                        ));
                    }
                    let mut pattrs = Attrs::new(pl, &ptoks[1..])?;
                    let pb = base(&mut pattrs)?;
                    let pm = matrix(pl, pattrs.take("matrix")?)?;
                    pattrs.finish()?;
                    period.push((FiberedPiece::new(pb), pm));
                }
                endpoints.push(attach.clone());
                g.add_ray(PeriodicRay {
                    id,
                    attach: attach.0,
                    period,
                })
                .map_err(dup)?;
            }
            other => return Err(err(line, format!("bad token `{other}`"))),
        }
    }

    for (ep, line) in endpoints {
        match g.piece(&ep.piece) {
            None => {
                return Err(err(
                    line,
                    format!("dangling slot {ep}: no piece `{}`", ep.piece),
                ))
            }
            Some(p) if ep.slot >= p.slot_count() => {
                return Err(err(
                    line,
                    format!(
                        "dangling slot {ep}: piece has {} boundary slot(s)",
                        p.slot_count()
                    ),
                ))
            }
            _ => {}
        }
    }
    Ok(g)
}

/// Writes `g` as GSF: pieces, then edges, then rays, each in id order.
pub fn serialize(g: &GraphStructure) -> String {
    let mut out = String::new();
    write_gsf(&mut out, g).expect("writing to a String cannot fail");
    out
}

fn write_gsf(out: &mut impl fmt::Write, g: &GraphStructure) -> fmt::Result {
    for (id, piece) in g.pieces() {
        match piece {
            Piece::Fibered(p) => writeln!(out, "piece {id} {}", p.base)?,
            Piece::SolidTorus(v) => writeln!(
                out,
                "solidtorus {id} meridian={},{}",
                v.meridian.section, v.meridian.fiber
            )?,
            Piece::K2I(k) => match k.fibration {
                Some(f) => writeln!(out, "k2xi {id} fibration={}", f.token())?,
                None => writeln!(out, "k2xi {id}")?,
            },
        }
    }
    for e in g.edges().values() {
        write!(out, "edge {} {} {} matrix={}", e.id, e.a, e.b, e.matrix)?;
        if e.base_reversing {
            out.write_str(" reversing")?;
        }
        out.write_char('\n')?;
    }
    for r in g.rays().values() {
        writeln!(
            out,
            "ray {} attach={} period={}",
            r.id,
            r.attach,
            r.period.len()
        )?;
        for (p, m) in &r.period {
            writeln!(out, "  piece {} matrix={m}", p.base)?;
        }
    }
    Ok(())
}
