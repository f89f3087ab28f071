//! Versioned text model files.
//!
//! ```text
//! axo-forest 1
//! task classifier
//! features 6
//! outputs 8
//! params trees=128 depth=16 min_leaf=1 subset=sqrt bootstrap=true seed=1
//! tree 0 nodes 3
//! s 2 1 2
//! l 5 0 5 5 0 1 5 0 5
//! l 3 3 0 0 3 1 0 3 0
//! ...
//! sha256 <hex digest of every preceding byte>
//! ```
//!
//! Classifier leaves hold the in-bag weight and per-bit one counts as
//! integers. Regressor models replace `outputs` with `target <metric>` and
//! hold one mean per leaf.

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use super::{BitClassifier, DecisionTree, FeatureSubset, ForestParams, ForestRegressor, Node, LEAF};
use crate::error::{Error, Result};
use crate::table::{fmt_real, write_text};

pub const MODEL_MAGIC: &str = "axo-forest";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum ForestModel {
    Classifier(BitClassifier),
    Regressor(ForestRegressor),
}

fn render_params(p: &ForestParams) -> String {
    format!(
        "params trees={} depth={} min_leaf={} subset={} bootstrap={} seed={}\n",
        p.n_trees, p.max_depth, p.min_samples_leaf, p.features_per_split, p.bootstrap, p.seed
    )
}

fn render_trees(out: &mut String, trees: &[DecisionTree], classifier: bool) {
    for (i, t) in trees.iter().enumerate() {
        writeln!(out, "tree {i} nodes {}", t.nodes.len()).unwrap();
        for n in &t.nodes {
            if n.feature != LEAF {
                writeln!(out, "s {} {} {}", n.feature, n.left, n.right).unwrap();
                continue;
            }
            let leaf = &t.leaves[n.left as usize * t.stride..(n.left as usize + 1) * t.stride];
            out.push('l');
            for v in leaf {
                out.push(' ');
                if classifier {
                    write!(out, "{}", *v as u64).unwrap();
                } else {
                    out.push_str(&fmt_real(*v));
                }
            }
            out.push('\n');
        }
    }
}

pub fn render_model(model: &ForestModel) -> String {
    let mut out = format!("{MODEL_MAGIC} {MODEL_VERSION}\n");
    match model {
        ForestModel::Classifier(m) => {
            out.push_str("task classifier\n");
            writeln!(out, "features {}\noutputs {}", m.n_features, m.n_outputs).unwrap();
            out.push_str(&render_params(&m.params));
            render_trees(&mut out, &m.trees, true);
        }
        ForestModel::Regressor(m) => {
            out.push_str("task regressor\n");
            writeln!(out, "features {}\ntarget {}", m.n_features, m.target).unwrap();
            out.push_str(&render_params(&m.params));
            render_trees(&mut out, &m.trees, false);
        }
    }
    let digest = Sha256::digest(out.as_bytes());
    writeln!(out, "sha256 {}", hex(&digest)).unwrap();
    out
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

struct Lines<'a> {
    iter: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<(usize, &'a str)> {
        self.iter.next().map(|(i, l)| (i + 1, l)).ok_or_else(|| Error::parse(0, "unexpected end of model file"))
    }

    /// Next line, which must start with `key `; returns the remainder.
    fn field(&mut self, key: &str) -> Result<(usize, &'a str)> {
        let (n, line) = self.next()?;
        line.strip_prefix(key)
            .and_then(|r| r.strip_prefix(' '))
            .map(|r| (n, r))
            .ok_or_else(|| Error::parse(n, format!("expected '{key}'")))
    }
}

fn num<T: std::str::FromStr>(s: &str, line: usize) -> Result<T> {
    s.parse().map_err(|_| Error::parse(line, format!("'{s}' is not a valid number")))
}

fn parse_params(s: &str, line: usize) -> Result<ForestParams> {
    let mut p = ForestParams::default();
    let mut seen = 0;
    for tok in s.split_whitespace() {
        let (k, v) = tok.split_once('=').ok_or_else(|| Error::parse(line, format!("bad param '{tok}'")))?;
        match k {
            "trees" => p.n_trees = num(v, line)?,
            "depth" => p.max_depth = num(v, line)?,
            "min_leaf" => p.min_samples_leaf = num(v, line)?,
            "subset" => {
                p.features_per_split = v.parse::<FeatureSubset>().map_err(|e| Error::parse(line, e.to_string()))?
            }
            "bootstrap" => p.bootstrap = num(v, line)?,
            "seed" => p.seed = num(v, line)?,
            _ => return Err(Error::parse(line, format!("unknown param '{k}'"))),
        }
        seen += 1;
    }
    if seen != 6 {
        return Err(Error::parse(line, "params line must list all six parameters"));
    }
    p.validate().map_err(|e| Error::parse(line, e.to_string()))?;
    Ok(p)
}

fn parse_trees(lines: &mut Lines<'_>, p: &ForestParams, n_features: usize, stride: usize) -> Result<Vec<DecisionTree>> {
    let mut trees = Vec::with_capacity(p.n_trees);
    for t in 0..p.n_trees {
        let (ln, rest) = lines.field("tree")?;
        let mut parts = rest.split_whitespace();
        let idx: usize = num(parts.next().unwrap_or(""), ln)?;
        if idx != t || parts.next() != Some("nodes") {
            return Err(Error::parse(ln, format!("expected 'tree {t} nodes <n>'")));
        }
        let n_nodes: usize = num(parts.next().unwrap_or(""), ln)?;
        if n_nodes == 0 {
            return Err(Error::parse(ln, "tree has no nodes"));
        }
        let mut nodes = Vec::with_capacity(n_nodes);
        let mut leaves = Vec::new();
        for _ in 0..n_nodes {
            let (ln, line) = lines.next()?;
            let mut f = line.split_whitespace();
            match f.next() {
                Some("s") => {
                    let v: Vec<u32> = f.map(|x| num(x, ln)).collect::<Result<_>>()?;
                    // Children follow their parent in pre-order.
                    let here = nodes.len() as u32;
                    let child_ok = |c: u32| c > here && (c as usize) < n_nodes;
                    if v.len() != 3 || v[0] as usize >= n_features || !child_ok(v[1]) || !child_ok(v[2]) {
                        return Err(Error::parse(ln, "malformed split node"));
                    }
                    nodes.push(Node { feature: v[0], left: v[1], right: v[2] });
                }
                Some("l") => {
                    let v: Vec<f64> = f.map(|x| num(x, ln)).collect::<Result<_>>()?;
                    if v.len() != stride {
                        return Err(Error::parse(ln, format!("leaf has {} values, expected {stride}", v.len())));
                    }
                    nodes.push(Node { feature: LEAF, left: (leaves.len() / stride) as u32, right: 0 });
                    leaves.extend(v);
                }
                _ => return Err(Error::parse(ln, "expected a node line")),
            }
        }
        trees.push(DecisionTree { nodes, leaves, stride });
    }
    Ok(trees)
}

pub fn parse_model(text: &str) -> Result<ForestModel> {
    let first = text.lines().next().unwrap_or("");
    let mut head = first.split_whitespace();
    if head.next() != Some(MODEL_MAGIC) {
        return Err(Error::Schema(format!("not a forest model file (first line '{first}')")));
    }
    let version = head.next().unwrap_or("");
    if version != MODEL_VERSION.to_string() {
        return Err(Error::Version { found: version.to_string(), expected: MODEL_VERSION.to_string() });
    }

    let body_end = text.trim_end_matches('\n').rfind('\n').map(|i| i + 1).unwrap_or(0);
    let (body, last) = text.split_at(body_end);
    let digest = last
        .trim_end()
        .strip_prefix("sha256 ")
        .ok_or_else(|| Error::Checksum("model file (missing checksum line, possibly truncated)".into()))?;
    if digest != hex(&Sha256::digest(body.as_bytes())) {
        return Err(Error::Checksum("model file".into()));
    }

    let mut lines = Lines { iter: body.lines().enumerate() };
    lines.next()?;
    let (ln, task) = lines.field("task")?;
    let (fl, features) = lines.field("features")?;
    let n_features: usize = num(features, fl)?;
    let model = match task {
        "classifier" => {
            let (ol, outputs) = lines.field("outputs")?;
            let n_outputs: usize = num(outputs, ol)?;
            let (pl, params) = lines.field("params")?;
            let params = parse_params(params, pl)?;
            let trees = parse_trees(&mut lines, &params, n_features, 1 + n_outputs)?;
            ForestModel::Classifier(BitClassifier { params, n_features, n_outputs, trees })
        }
        "regressor" => {
            let (tl, target) = lines.field("target")?;
            let target = target.parse().map_err(|e: Error| Error::parse(tl, e.to_string()))?;
            let (pl, params) = lines.field("params")?;
            let params = parse_params(params, pl)?;
            let trees = parse_trees(&mut lines, &params, n_features, 1)?;
            ForestModel::Regressor(ForestRegressor { params, n_features, target, trees })
        }
        other => return Err(Error::parse(ln, format!("unknown task '{other}'"))),
    };
    if let Ok((ln, _)) = lines.next() {
        return Err(Error::parse(ln, "trailing content after the last tree"));
    }
    Ok(model)
}

pub fn save_model(model: &ForestModel, path: &Path) -> Result<()> {
    write_text(path, &render_model(model))
}

pub fn load_model(path: &Path) -> Result<ForestModel> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_model(&text)
}
