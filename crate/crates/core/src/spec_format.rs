//! Line-oriented protocol description files.
//!
//! ```text
//! # Two relays; the second decodes only the first relay's message.
//!
//! network:
//! relays = 2
//! names = source, relay1, relay2, destination
//!
//! tree:
//! m[0] -> m[1,1]
//! m[1,1] -> m[2,1]
//!
//! message-sets:
//! 0 = m[0]
//! 1 = m[1,1]
//! 2 = m[2,1]
//!
//! decoding-sets:
//! 1 = m[0]
//! 2 = m[1,1]
//! 3 = m[0]
//!
//! assumptions:
//! markov {X[0]} - {X[1,1],X[2,1],Y[1]} - {Y[2],Y[3]}
//! deterministic Y[2] = f(X[1,2],X[2,1])
//! substitute X[1,1] = Y[2]
//!
//! gaussian:
//! noise = 0.01, 1, 1
//! power = 1, 1, 1
//!
//! sizes:
//! m[0] = 16
//! m[1,1] = 4
//! m[2,1] = 2
//! ```
//!
//! `network`, `tree`, `message-sets` and `decoding-sets` are required.
//! Comments start with `#`; those before the first section are kept as the
//! document header and written back by [`SpecDocument::to_text`], all others
//! are dropped.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::expr::{Cursor, ParseError, Var};
use crate::gaussian::GaussianNet;
use crate::message_tree::{MessageId, MessageTree, ProtocolSpec};
use crate::rewrite::MarkovAssumptionSet;

/// Error with a 1-based location. Errors that concern the document as a
/// whole point at line 1, column 1.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct DocError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl DocError {
    fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        DocError {
            line,
            column,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpecDocument {
    /// Comment lines before the first section, including the `#`.
    pub header: Vec<String>,
    pub relays: usize,
    /// Optional display names for terminals `0..=relays+1`.
    pub names: Option<Vec<String>>,
    pub edges: Vec<(MessageId, MessageId)>,
    /// Indexed by terminal `0..=relays`.
    pub message_sets: Vec<BTreeSet<MessageId>>,
    /// Indexed by terminal minus one, for terminals `1..=relays+1`.
    pub decoding_sets: Vec<BTreeSet<MessageId>>,
    pub assumptions: MarkovAssumptionSet,
    pub gaussian: Option<GaussianNet>,
    pub sizes: Option<BTreeMap<MessageId, u64>>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Section {
    Network,
    Tree,
    MessageSets,
    DecodingSets,
    Assumptions,
    Gaussian,
    Sizes,
}

impl Section {
    const ALL: [Section; 7] = [
        Section::Network,
        Section::Tree,
        Section::MessageSets,
        Section::DecodingSets,
        Section::Assumptions,
        Section::Gaussian,
        Section::Sizes,
    ];

    fn name(self) -> &'static str {
        match self {
            Section::Network => "network",
            Section::Tree => "tree",
            Section::MessageSets => "message-sets",
            Section::DecodingSets => "decoding-sets",
            Section::Assumptions => "assumptions",
            Section::Gaussian => "gaussian",
            Section::Sizes => "sizes",
        }
    }
}

/// One non-blank line with its comment removed.
struct Line<'a> {
    number: usize,
    /// Characters of indentation before `text`.
    indent: usize,
    text: &'a str,
}

impl Line<'_> {
    fn error(&self, column: usize, message: impl Into<String>) -> DocError {
        DocError::new(self.number, self.indent + column, message)
    }

    fn lift(&self, offset: usize, e: ParseError) -> DocError {
        self.error(offset + e.column, e.message)
    }

    /// Splits `key = value`, returning the value's character offset.
    fn key_value(&self) -> Result<(&str, &str, usize), DocError> {
        let (key, value) = self
            .text
            .split_once('=')
            .ok_or_else(|| self.error(1, "expected `key = value`"))?;
        let key_chars = key.chars().count() + 1;
        let lead = value.len() - value.trim_start().len();
        Ok((key.trim(), value.trim(), key_chars + lead))
    }
}

fn parse_with<T>(
    line: &Line<'_>,
    offset: usize,
    src: &str,
    f: impl FnOnce(&mut Cursor<'_>) -> Result<T, ParseError>,
) -> Result<T, DocError> {
    let mut c = Cursor::new(src);
    f(&mut c)
        .and_then(|v| c.finish().map(|_| v))
        .map_err(|e| line.lift(offset, e))
}

fn message_list(c: &mut Cursor<'_>) -> Result<BTreeSet<MessageId>, ParseError> {
    let mut out = BTreeSet::new();
    loop {
        let col = c.column();
        let m = c.message()?;
        if !out.insert(m) {
            return Err(ParseError {
                column: col,
                message: format!("{m} listed twice"),
            });
        }
        if !c.eat(",") {
            return Ok(out);
        }
    }
}

fn braced(c: &mut Cursor<'_>) -> Result<BTreeSet<Var>, ParseError> {
    c.expect("{")?;
    let s = c.var_list()?;
    c.expect("}")?;
    Ok(s)
}

fn assumption(c: &mut Cursor<'_>, set: MarkovAssumptionSet) -> Result<MarkovAssumptionSet, ParseError> {
    if c.eat("markov") {
        let a = braced(c)?;
        c.expect("-")?;
        let b = braced(c)?;
        c.expect("-")?;
        let d = braced(c)?;
        Ok(set.chain(a, b, d))
    } else if c.eat("deterministic") {
        let z = c.var()?;
        c.expect("=")?;
        c.expect("f(")?;
        let inputs = c.var_list()?;
        c.expect(")")?;
        Ok(set.deterministic(z, inputs))
    } else if c.eat("substitute") {
        let from = c.var()?;
        c.expect("=")?;
        let to = c.var()?;
        Ok(set.substitute(from, to))
    } else {
        c.error("expected `markov`, `deterministic` or `substitute`")
    }
}

fn numbers(line: &Line<'_>, offset: usize, value: &str) -> Result<[f64; 3], DocError> {
    let parts: Vec<&str> = value.split(',').map(str::trim).collect();
    let parsed: Vec<f64> = parts
        .iter()
        .map(|p| p.parse::<f64>().map_err(|_| line.error(offset + 1, format!("`{p}` is not a number"))))
        .collect::<Result<_, _>>()?;
    parsed
        .try_into()
        .map_err(|_| line.error(offset + 1, "expected three comma-separated numbers"))
}

/// Terminal-indexed entries `k = m[..], ...`, checked for duplicates.
fn terminal_entry(
    line: &Line<'_>,
    map: &mut BTreeMap<usize, (BTreeSet<MessageId>, usize)>,
) -> Result<usize, DocError> {
    let (k, set) = parse_with(line, 0, line.text, |c| {
        let k = c.number()?;
        c.expect("=")?;
        Ok((k as usize, message_list(c)?))
    })?;
    if map.insert(k, (set, line.number)).is_some() {
        return Err(line.error(1, format!("terminal {k} is listed twice")));
    }
    Ok(k)
}

/// Terminal-indexed sets must cover exactly `range`.
fn dense(
    section: Section,
    section_line: usize,
    map: BTreeMap<usize, (BTreeSet<MessageId>, usize)>,
    range: std::ops::RangeInclusive<usize>,
) -> Result<Vec<(BTreeSet<MessageId>, usize)>, DocError> {
    if let Some((&k, &(_, line))) = map.iter().find(|(k, _)| !range.contains(k)) {
        return Err(DocError::new(
            line,
            1,
            format!("terminal {k} is out of range {}..={}", range.start(), range.end()),
        ));
    }
    if let Some(k) = range.clone().find(|k| !map.contains_key(k)) {
        return Err(DocError::new(
            section_line,
            1,
            format!("{} has no entry for terminal {k}", section.name()),
        ));
    }
    Ok(map.into_values().collect())
}

impl FromStr for SpecDocument {
    type Err = DocError;

    fn from_str(text: &str) -> Result<Self, DocError> {
        let mut header = Vec::new();
        let mut seen_content = false;
        let mut lines: Vec<(Section, usize, Vec<Line<'_>>)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let trimmed = raw.trim();
            if !seen_content && trimmed.starts_with('#') {
                header.push(trimmed.to_string());
                continue;
            }
            let content = raw.split('#').next().unwrap_or("");
            let text = content.trim();
            if text.is_empty() {
                continue;
            }
            seen_content = true;
            let line = Line {
                number: i + 1,
                indent: content[..content.len() - content.trim_start().len()].chars().count(),
                text,
            };
            if let Some(name) = text.strip_suffix(':') {
                let name = name.trim();
                let section = Section::ALL
                    .into_iter()
                    .find(|s| s.name() == name)
                    .ok_or_else(|| line.error(1, format!("unknown section `{name}`")))?;
                if lines.iter().any(|(s, _, _)| *s == section) {
                    return Err(line.error(1, format!("section `{name}` appears twice")));
                }
                lines.push((section, line.number, Vec::new()));
            } else {
                let (_, _, body) = lines
                    .last_mut()
                    .ok_or_else(|| line.error(1, "entry before the first section"))?;
                body.push(line);
            }
        }
        let section = |s: Section| lines.iter().find(|(x, _, _)| *x == s);
        let required = |s: Section| {
            section(s).ok_or_else(|| DocError::new(1, 1, format!("missing {} section", s.name())))
        };

        // network
        let (_, network_line, body) = required(Section::Network)?;
        let mut relays = None;
        let mut names = None;
        for line in body {
            let (key, value, offset) = line.key_value()?;
            match key {
                "relays" => {
                    let k: usize = value
                        .parse()
                        .map_err(|_| line.error(offset + 1, "relay count must be a number"))?;
                    if k == 0 {
                        return Err(line.error(offset + 1, "at least one relay is required"));
                    }
                    relays = Some(k);
                }
                "names" => {
                    names = Some(value.split(',').map(|s| s.trim().to_string()).collect::<Vec<_>>());
                }
                other => return Err(line.error(1, format!("unknown network key `{other}`"))),
            }
        }
        let relays = relays.ok_or_else(|| DocError::new(*network_line, 1, "network needs `relays`"))?;
        if let Some(n) = &names {
            if n.len() != relays + 2 {
                return Err(DocError::new(
                    *network_line,
                    1,
                    format!("expected {} terminal names, found {}", relays + 2, n.len()),
                ));
            }
        }

        // tree
        let (_, tree_line, body) = required(Section::Tree)?;
        let mut edges = Vec::new();
        let mut nodes = BTreeSet::from([MessageId::ROOT]);
        for line in body {
            let edge = parse_with(line, 0, line.text, |c| {
                let p = c.message()?;
                c.expect("->")?;
                Ok((p, c.message()?))
            })?;
            if edges.contains(&edge) {
                return Err(line.error(1, format!("duplicate edge {} -> {}", edge.0, edge.1)));
            }
            edges.push(edge);
            nodes.extend([edge.0, edge.1]);
        }
        MessageTree::from_edges(&edges).map_err(|e| DocError::new(*tree_line, 1, e.to_string()))?;
        let known = |line: &Line<'_>, set: &BTreeSet<MessageId>| -> Result<(), DocError> {
            match set.iter().find(|m| !nodes.contains(m)) {
                Some(m) => Err(line.error(1, format!("unknown message {m}"))),
                None => Ok(()),
            }
        };

        // message and decoding sets
        let mut sets = Vec::new();
        for (s, range) in [
            (Section::MessageSets, 0..=relays),
            (Section::DecodingSets, 1..=relays + 1),
        ] {
            let (_, section_line, body) = required(s)?;
            let mut map = BTreeMap::new();
            for line in body {
                let k = terminal_entry(line, &mut map)?;
                known(line, &map[&k].0)?;
            }
            sets.push(dense(s, *section_line, map, range)?);
        }
        let decoding_sets: Vec<_> = sets.pop().expect("two").into_iter().map(|(s, _)| s).collect();
        let message_sets: Vec<_> = sets.pop().expect("two").into_iter().map(|(s, _)| s).collect();

        // assumptions
        let mut assumptions = MarkovAssumptionSet::new();
        if let Some((_, _, body)) = section(Section::Assumptions) {
            for line in body {
                let before = assumptions.clone();
                assumptions = parse_with(line, 0, line.text, |c| assumption(c, before))?;
                assumptions.validate().map_err(|e| line.error(1, e.to_string()))?;
            }
        }

        // gaussian
        let gaussian = match section(Section::Gaussian) {
            None => None,
            Some((_, section_line, body)) => {
                let (mut noise, mut power) = (None, None);
                for line in body {
                    let (key, value, offset) = line.key_value()?;
                    let slot = match key {
                        "noise" => &mut noise,
                        "power" => &mut power,
                        other => return Err(line.error(1, format!("unknown gaussian key `{other}`"))),
                    };
                    *slot = Some(numbers(line, offset, value)?);
                }
                let (Some(noise), Some(power)) = (noise, power) else {
                    return Err(DocError::new(*section_line, 1, "gaussian needs `noise` and `power`"));
                };
                Some(GaussianNet::new(noise, power).map_err(|e| DocError::new(*section_line, 1, e.to_string()))?)
            }
        };

        // sizes
        let sizes = match section(Section::Sizes) {
            None => None,
            Some((_, _, body)) => {
                let mut sizes = BTreeMap::new();
                for line in body {
                    let (key, value, offset) = line.key_value()?;
                    let m = parse_with(line, 0, key, |c| c.message())?;
                    if !nodes.contains(&m) {
                        return Err(line.error(1, format!("unknown message {m}")));
                    }
                    let n: u64 = value
                        .parse()
                        .map_err(|_| line.error(offset + 1, format!("`{value}` is not a size")))?;
                    if sizes.insert(m, n).is_some() {
                        return Err(line.error(1, format!("size of {m} given twice")));
                    }
                }
                Some(sizes)
            }
        };

        Ok(SpecDocument {
            header,
            relays,
            names,
            edges,
            message_sets,
            decoding_sets,
            assumptions,
            gaussian,
            sizes,
        })
    }
}

fn join<T: fmt::Display>(items: impl IntoIterator<Item = T>) -> String {
    items.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

impl SpecDocument {
    pub fn parse(text: &str) -> Result<Self, DocError> {
        text.parse()
    }

    /// Canonical text form. Parsing it gives back an equal document.
    pub fn to_text(&self) -> String {
        let mut sections: Vec<String> = Vec::new();
        if !self.header.is_empty() {
            sections.push(self.header.join("\n"));
        }
        let mut network = format!("network:\nrelays = {}", self.relays);
        if let Some(names) = &self.names {
            network.push_str(&format!("\nnames = {}", names.join(", ")));
        }
        sections.push(network);
        let mut tree = String::from("tree:");
        for (p, c) in &self.edges {
            tree.push_str(&format!("\n{p} -> {c}"));
        }
        sections.push(tree);
        let mut a = String::from("message-sets:");
        for (k, set) in self.message_sets.iter().enumerate() {
            a.push_str(&format!("\n{k} = {}", join(set)));
        }
        sections.push(a);
        let mut d = String::from("decoding-sets:");
        for (k, set) in self.decoding_sets.iter().enumerate() {
            d.push_str(&format!("\n{} = {}", k + 1, join(set)));
        }
        sections.push(d);
        if !self.assumptions.is_empty() {
            sections.push(format!("assumptions:\n{}", self.assumptions.to_string().trim_end()));
        }
        if let Some(g) = &self.gaussian {
            sections.push(format!(
                "gaussian:\nnoise = {}\npower = {}",
                join(g.noise),
                join(g.power)
            ));
        }
        if let Some(sizes) = &self.sizes {
            let mut s = String::from("sizes:");
            for (m, n) in sizes {
                s.push_str(&format!("\n{m} = {n}"));
            }
            sections.push(s);
        }
        let mut out = sections.join("\n\n");
        out.push('\n');
        out
    }

    /// Builds and structurally checks the protocol. Decoding-set properties
    /// are checked separately by [`ProtocolSpec::validate_decoding_sets`].
    pub fn to_spec(&self) -> Result<ProtocolSpec, DocError> {
        let tree = MessageTree::from_edges(&self.edges).map_err(|e| DocError::new(1, 1, e.to_string()))?;
        ProtocolSpec::new(tree, self.message_sets.clone(), self.decoding_sets.clone())
            .map_err(|e| DocError::new(1, 1, e.to_string()))
    }

    /// Name of terminal `k`, falling back to its number.
    pub fn terminal_name(&self, k: usize) -> String {
        self.names
            .as_ref()
            .and_then(|n| n.get(k).cloned())
            .unwrap_or_else(|| k.to_string())
    }
}

impl fmt::Display for SpecDocument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}
