//! The `.pbn` plain-text model format.
//!
//! Line-oriented, UTF-8, `#` starts a comment, blank lines ignored:
//!
//! ```text
//! pbn 1
//! nodes <n>
//! perturbation <p>
//! node <index> [<name>]
//! func <prob> : <parent,parent,...> : <truthbits>
//! ...
//! end
//! ```
//!
//! An empty parent list is written `-` (the truth string then has length 1).
//! Truth bits are listed in parent-assignment order with the FIRST listed
//! parent as the most significant bit. Probabilities are serialized with 17
//! significant decimal digits so a round-trip is bit-exact for 64-bit floats.

use std::fmt::Write as _;

use super::{NodeSpec, PbnModel, PredictorFunction};
use crate::{Error, Result};

fn err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

struct PendingNode {
    declared_index: usize,
    name: Option<String>,
    functions: Vec<PredictorFunction>,
    line: usize,
}

impl PbnModel {
    /// Parses `.pbn` text into a validated model.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, raw)| {
                let content = raw.split('#').next().unwrap_or("").trim();
                (i + 1, content)
            })
            .filter(|(_, content)| !content.is_empty());

        let mut expect = |keyword: &str| -> Result<(usize, String)> {
            let (no, content) = lines
                .next()
                .ok_or_else(|| err(0, format!("unexpected end of input, expected `{keyword}`")))?;
            let rest = content
                .strip_prefix(keyword)
                .filter(|r| r.is_empty() || r.starts_with(char::is_whitespace))
                .ok_or_else(|| err(no, format!("expected `{keyword}`, found `{content}`")))?;
            Ok((no, rest.trim().to_string()))
        };

        let (no, version) = expect("pbn")?;
        if version != "1" {
            return Err(err(no, format!("unsupported format version `{version}`")));
        }
        let (no, n_text) = expect("nodes")?;
        let n: usize = n_text
            .parse()
            .map_err(|_| err(no, format!("bad node count `{n_text}`")))?;
        if n == 0 {
            return Err(err(no, "node count must be positive"));
        }
        let (no, p_text) = expect("perturbation")?;
        let p: f64 = p_text
            .parse()
            .map_err(|_| err(no, format!("bad perturbation value `{p_text}`")))?;

        let mut nodes: Vec<NodeSpec> = Vec::with_capacity(n);
        let mut current: Option<PendingNode> = None;
        let mut finished = false;

        let finish_node = |pending: PendingNode, nodes: &mut Vec<NodeSpec>| -> Result<()> {
            if pending.declared_index != nodes.len() {
                return Err(err(
                    pending.line,
                    format!(
                        "node index {} out of order, expected {}",
                        pending.declared_index,
                        nodes.len()
                    ),
                ));
            }
            if pending.functions.is_empty() {
                return Err(err(pending.line, "node has no `func` lines"));
            }
            nodes.push(NodeSpec::new(pending.name, pending.functions)?);
            Ok(())
        };

        for (no, content) in lines {
            if finished {
                return Err(err(no, "content after `end`"));
            }
            if content == "end" {
                if let Some(pending) = current.take() {
                    finish_node(pending, &mut nodes)?;
                }
                finished = true;
            } else if let Some(rest) = content.strip_prefix("node ") {
                if let Some(pending) = current.take() {
                    finish_node(pending, &mut nodes)?;
                }
                let mut parts = rest.split_whitespace();
                let idx_text = parts.next().ok_or_else(|| err(no, "missing node index"))?;
                let declared_index: usize = idx_text
                    .parse()
                    .map_err(|_| err(no, format!("bad node index `{idx_text}`")))?;
                let name = parts.next().map(str::to_string);
                if let Some(extra) = parts.next() {
                    return Err(err(no, format!("unexpected token `{extra}` after node name")));
                }
                if let Some(name) = &name {
                    if name.chars().all(|c| c.is_ascii_digit()) {
                        return Err(err(no, "node names must not be pure digits"));
                    }
                    if name.contains(['=', '&', ':', ',']) {
                        return Err(err(no, "node names must not contain `=`, `&`, `:`, or `,`"));
                    }
                }
                current = Some(PendingNode { declared_index, name, functions: Vec::new(), line: no });
            } else if let Some(rest) = content.strip_prefix("func ") {
                let node = current
                    .as_mut()
                    .ok_or_else(|| err(no, "`func` before any `node` line"))?;
                node.functions.push(parse_func(no, rest)?);
            } else {
                return Err(err(no, format!("unrecognized line `{content}`")));
            }
        }
        if !finished {
            return Err(err(0, "missing `end`"));
        }
        if nodes.len() != n {
            return Err(Error::Parse {
                line: 0,
                message: format!("header declares {n} nodes, found {}", nodes.len()),
            });
        }
        PbnModel::new(nodes, p)
    }

    /// Serializes the model to `.pbn` text; `parse` of the output returns a
    /// field-by-field equal model.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        out.push_str("pbn 1\n");
        let _ = writeln!(out, "nodes {}", self.n());
        let _ = writeln!(out, "perturbation {}", fmt_prob(self.perturbation_p()));
        for (i, node) in self.nodes().iter().enumerate() {
            match node.name() {
                Some(name) => {
                    let _ = writeln!(out, "node {i} {name}");
                }
                None => {
                    let _ = writeln!(out, "node {i}");
                }
            }
            for f in node.functions() {
                let parents = if f.parents().is_empty() {
                    "-".to_string()
                } else {
                    f.parents()
                        .iter()
                        .map(|p| p.to_string())
                        .collect::<Vec<_>>()
                        .join(",")
                };
                let bits: String = (0..1usize << f.parent_count())
                    .map(|j| if f.output(j) { '1' } else { '0' })
                    .collect();
                let _ = writeln!(out, "func {} : {} : {}", fmt_prob(f.selection_prob()), parents, bits);
            }
        }
        out.push_str("end\n");
        out
    }
}

/// 17 significant decimal digits: enough to reproduce any f64 bit-exactly.
fn fmt_prob(p: f64) -> String {
    format!("{p:.16e}")
}

fn parse_func(no: usize, rest: &str) -> Result<PredictorFunction> {
    let parts: Vec<&str> = rest.split(':').map(str::trim).collect();
    let [prob_text, parents_text, bits_text] = parts.as_slice() else {
        return Err(err(no, "expected `func <prob> : <parents> : <truthbits>`"));
    };
    let prob: f64 = prob_text
        .parse()
        .map_err(|_| err(no, format!("bad selection probability `{prob_text}`")))?;
    let parents: Vec<u32> = if *parents_text == "-" {
        Vec::new()
    } else {
        parents_text
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<u32>()
                    .map_err(|_| err(no, format!("bad parent index `{}`", t.trim())))
            })
            .collect::<Result<_>>()?
    };
    let bits: Vec<bool> = bits_text
        .chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(err(no, format!("bad truth-table character `{other}`"))),
        })
        .collect::<Result<_>>()?;
    if bits.len() != 1usize << parents.len() {
        return Err(err(
            no,
            format!(
                "truth string has {} bits, expected {} for {} parents",
                bits.len(),
                1usize << parents.len(),
                parents.len()
            ),
        ));
    }
    PredictorFunction::new(prob, parents, &bits)
}
