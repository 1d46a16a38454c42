//! Text stream format: a `V <count>` header, then one op per line.
//!
//! ```text
//! V 4
//! i 0 1
//! q 0 1
//! d 0 1
//! c
//! ```

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::edge::{Edge, VertexId};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Op {
    Insert(Edge),
    Delete(Edge),
    Query(VertexId, VertexId),
    Checkpoint,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stream {
    pub vertices: u32,
    pub ops: Vec<Op>,
}

impl Stream {
    pub fn new(vertices: u32) -> Self {
        Stream { vertices, ops: Vec::new() }
    }

    pub fn updates(&self) -> usize {
        self.ops.iter().filter(|op| matches!(op, Op::Insert(_) | Op::Delete(_))).count()
    }

    pub fn queries(&self) -> usize {
        self.ops.iter().filter(|op| matches!(op, Op::Query(..))).count()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| Error::Decode("missing header".into()))?;
        let vertices = match header.split_whitespace().collect::<Vec<_>>()[..] {
            ["V", n] => n.parse().map_err(|_| Error::Decode(format!("bad vertex count {n:?}")))?,
            _ => return Err(Error::Decode(format!("bad header {header:?}"))),
        };
        let mut ops = Vec::new();
        for (no, line) in lines {
            let bad = || Error::Decode(format!("line {}: {line:?}", no + 1));
            let fields: Vec<&str> = line.split_whitespace().collect();
            let ids = |f: &[&str]| -> Result<(u32, u32)> {
                match f {
                    [a, b] => {
                        let a: u32 = a.parse().map_err(|_| bad())?;
                        let b: u32 = b.parse().map_err(|_| bad())?;
                        if a >= vertices || b >= vertices {
                            return Err(bad());
                        }
                        Ok((a, b))
                    }
                    _ => Err(bad()),
                }
            };
            let op = match fields.first() {
                Some(&"i") => {
                    let (a, b) = ids(&fields[1..])?;
                    Op::Insert(Edge::new(a, b).map_err(|_| bad())?)
                }
                Some(&"d") => {
                    let (a, b) = ids(&fields[1..])?;
                    Op::Delete(Edge::new(a, b).map_err(|_| bad())?)
                }
                Some(&"q") => {
                    let (a, b) = ids(&fields[1..])?;
                    Op::Query(a, b)
                }
                Some(&"c") if fields.len() == 1 => Op::Checkpoint,
                _ => return Err(bad()),
            };
            ops.push(op);
        }
        Ok(Stream { vertices, ops })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(12 * self.ops.len() + 16);
        writeln!(out, "V {}", self.vertices).unwrap();
        for op in &self.ops {
            match op {
                Op::Insert(e) => writeln!(out, "i {} {}", e.u(), e.v()),
                Op::Delete(e) => writeln!(out, "d {} {}", e.u(), e.v()),
                Op::Query(a, b) => writeln!(out, "q {a} {b}"),
                Op::Checkpoint => writeln!(out, "c"),
            }
            .unwrap();
        }
        out
    }

    /// No duplicate inserts and no deletes of absent edges.
    pub fn validate(&self) -> Result<()> {
        let mut present = BTreeSet::new();
        for (i, op) in self.ops.iter().enumerate() {
            match *op {
                Op::Insert(e) if !present.insert(e) => {
                    return Err(Error::MalformedUpdate(format!("op {i}: duplicate insert of {e}")));
                }
                Op::Delete(e) if !present.remove(&e) => {
                    return Err(Error::MalformedUpdate(format!("op {i}: delete of absent {e}")));
                }
                _ => {}
            }
        }
        Ok(())
    }
}
