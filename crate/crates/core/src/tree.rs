//! Backward expansion of the Collatz graph from a root, for `T` (the full
//! tree) or for `T'` on residue class 2 (the reduced tree).
//!
//! Expansion is breadth-first; each new level is sorted ascending before it is
//! expanded, so node and edge enumeration is deterministic. A predecessor that
//! is already in the tree would close a cycle; those edges are left out and
//! listed in [`Tree::suppressed`]. With the canonical roots this removes
//! exactly the limit cycle: `1 -> 2` for the full tree and the self-loop at 2
//! for the reduced one.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::{self, ReducedRule, Rule};
use crate::nat::Nat;

pub const TREE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    Full,
    Reduced,
}

impl Flavor {
    pub fn canonical_root(self) -> Nat {
        match self {
            Flavor::Full => Nat::ONE,
            Flavor::Reduced => Nat::TWO,
        }
    }
}

/// Rule that carries a child onto its parent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EdgeRule {
    R1,
    R2,
    Q1,
    Q2,
    Q3,
}

impl From<Rule> for EdgeRule {
    fn from(r: Rule) -> Self {
        match r {
            Rule::R1 => EdgeRule::R1,
            Rule::R2 => EdgeRule::R2,
        }
    }
}

impl From<ReducedRule> for EdgeRule {
    fn from(r: ReducedRule) -> Self {
        match r {
            ReducedRule::Q1 => EdgeRule::Q1,
            ReducedRule::Q2 => EdgeRule::Q2,
            ReducedRule::Q3 => EdgeRule::Q3,
        }
    }
}

impl std::fmt::Display for EdgeRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        std::fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub child: Nat,
    pub parent: Nat,
    pub rule: EdgeRule,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    pub max_depth: Option<u32>,
    pub max_value: Option<Nat>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tree {
    pub flavor: Flavor,
    pub root: Nat,
    pub schema_version: u32,
    pub limits: Limits,
    pub suppressed: Vec<Edge>,
    pub nodes: BTreeSet<Nat>,
    /// Sorted by child.
    pub edges: Vec<Edge>,
}

fn predecessors(flavor: Flavor, x: &Nat) -> Result<Vec<(Nat, EdgeRule)>> {
    Ok(match flavor {
        Flavor::Full => map::predecessors(x)?
            .into_iter()
            .map(|(y, r)| (y, r.into()))
            .collect(),
        Flavor::Reduced => map::reduced_predecessors(x)?
            .into_iter()
            .map(|(y, r)| (y, r.into()))
            .collect(),
    })
}

pub fn build_tree(flavor: Flavor, root: &Nat, limits: Limits) -> Result<Tree> {
    match flavor {
        Flavor::Full => {
            map::residue_class(root)?;
        }
        Flavor::Reduced => {
            map::reduced_step(root)?;
        }
    }
    if limits.max_depth.is_none() && limits.max_value.is_none() {
        return Err(Error::Unbounded);
    }

    let mut tree = Tree {
        flavor,
        root: root.clone(),
        schema_version: TREE_SCHEMA_VERSION,
        limits,
        suppressed: Vec::new(),
        nodes: BTreeSet::from([root.clone()]),
        edges: Vec::new(),
    };
    let within_value = |v: &Nat| tree.limits.max_value.as_ref().is_none_or(|cap| v <= cap);
    if !within_value(root) {
        return Ok(tree);
    }

    let mut frontier = vec![root.clone()];
    let mut depth = 0u32;
    let mut edges = Vec::new();
    let mut suppressed = Vec::new();
    let mut nodes = tree.nodes.clone();
    while !frontier.is_empty() && tree.limits.max_depth.is_none_or(|d| depth < d) {
        let mut next = Vec::new();
        for parent in &frontier {
            for (child, rule) in predecessors(flavor, parent)? {
                if !within_value(&child) {
                    continue;
                }
                let edge = Edge { child: child.clone(), parent: parent.clone(), rule };
                if nodes.contains(&child) {
                    suppressed.push(edge);
                    continue;
                }
                nodes.insert(child.clone());
                edges.push(edge);
                next.push(child);
            }
        }
        next.sort();
        frontier = next;
        depth += 1;
    }
    edges.sort();
    suppressed.sort();
    tree.nodes = nodes;
    tree.edges = edges;
    tree.suppressed = suppressed;
    Ok(tree)
}

impl Tree {
    pub fn edge_of(&self, child: &Nat) -> Option<&Edge> {
        self.edges
            .binary_search_by(|e| e.child.cmp(child))
            .ok()
            .map(|i| &self.edges[i])
    }

    /// DOT digraph with edges pointing from child to parent.
    pub fn to_dot(&self) -> String {
        let flavor = match self.flavor {
            Flavor::Full => "full",
            Flavor::Reduced => "reduced",
        };
        let mut out = String::new();
        writeln!(out, "digraph collatz_{flavor} {{").unwrap();
        writeln!(out, "  rankdir=BT;").unwrap();
        for node in &self.nodes {
            writeln!(out, "  {node} [label=\"{node}\"];").unwrap();
        }
        for e in &self.edges {
            writeln!(out, "  {} -> {} [label=\"{}\"];", e.child, e.parent, e.rule).unwrap();
        }
        out.push_str("}\n");
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("tree serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Tree> {
        Ok(serde_json::from_str(text)?)
    }
}

pub fn export_dot(tree: &Tree) -> String {
    tree.to_dot()
}

pub fn export_json(tree: &Tree) -> String {
    tree.to_json()
}
