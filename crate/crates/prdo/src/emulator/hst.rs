//! Labelled trees over a point set, their edge-weighted form, and removal
//! of Steiner nodes by contraction onto representative terminals.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hierarchy::NONE;
use crate::util::le_tol;

/// Largest tolerated distortion of a contraction.
pub const CONTRACTION_BOUND: f64 = 8.0;

/// A Steiner node joins the terminal below it only when that terminal is at
/// most this fraction of the distance to its parent's terminal.
const PULL_UP: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HstError {
    #[error("node {0} has a larger label than its parent")]
    LabelIncrease(u32),
    #[error("parent pointers do not form a tree")]
    NotATree,
    #[error("no terminals")]
    NoTerminals,
    #[error("terminal {0} is not a tree node")]
    BadTerminal(u32),
    #[error("contraction distorts ({u},{v}) by {ratio}")]
    Distortion { u: u32, v: u32, ratio: f64 },
}

/// Rooted tree with non-increasing labels from root to leaves; every leaf
/// holds one point and has label 0. Node 0 is the root.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hst {
    pub parent: Vec<u32>,
    pub label: Vec<f64>,
    /// Point held by each node, `NONE` for internal nodes.
    pub point: Vec<u32>,
}

impl Hst {
    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn depth(&self, mut x: u32) -> u32 {
        let mut d = 0;
        while self.parent[x as usize] != NONE {
            x = self.parent[x as usize];
            d += 1;
        }
        d
    }

    /// Label of the lowest common ancestor of two nodes.
    pub fn lca_label(&self, a: u32, b: u32) -> f64 {
        let (mut a, mut b) = (a, b);
        let (mut da, mut db) = (self.depth(a), self.depth(b));
        while da > db {
            a = self.parent[a as usize];
            da -= 1;
        }
        while db > da {
            b = self.parent[b as usize];
            db -= 1;
        }
        while a != b {
            a = self.parent[a as usize];
            b = self.parent[b as usize];
        }
        self.label[a as usize]
    }

    /// Leaf nodes in node order.
    pub fn leaves(&self) -> Vec<u32> {
        (0..self.len() as u32).filter(|&x| self.point[x as usize] != NONE).collect()
    }
}

/// Tree given by parent pointers and the weight of each parent edge.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedTree {
    pub parent: Vec<u32>,
    pub weight: Vec<f64>,
}

impl WeightedTree {
    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    fn adjacency(&self) -> Result<Vec<Vec<(u32, f64)>>, HstError> {
        let n = self.len();
        let mut adj = vec![Vec::new(); n];
        let mut roots = 0;
        for (x, &p) in self.parent.iter().enumerate() {
            if p == NONE {
                roots += 1;
            } else if (p as usize) < n && p as usize != x {
                adj[x].push((p, self.weight[x]));
                adj[p as usize].push((x as u32, self.weight[x]));
            } else {
                return Err(HstError::NotATree);
            }
        }
        if roots != 1 && n > 0 {
            return Err(HstError::NotATree);
        }
        Ok(adj)
    }

    /// Distances from `s` to every node.
    pub fn distances(&self, s: u32) -> Vec<f64> {
        let adj = self.adjacency().expect("tree");
        dists_from(&adj, s)
    }
}

fn dists_from(adj: &[Vec<(u32, f64)>], s: u32) -> Vec<f64> {
    let mut d = vec![f64::INFINITY; adj.len()];
    d[s as usize] = 0.0;
    let mut stack = vec![s];
    while let Some(x) = stack.pop() {
        for &(y, w) in &adj[x as usize] {
            if d[y as usize].is_infinite() {
                d[y as usize] = d[x as usize] + w;
                stack.push(y);
            }
        }
    }
    d
}

/// Weights each edge by half the label drop, so leaf distances equal the
/// label of their lowest common ancestor.
pub fn hst_edge_weights(t: &Hst) -> Result<WeightedTree, HstError> {
    let mut weight = vec![0.0; t.len()];
    for x in 0..t.len() {
        let p = t.parent[x];
        if p != NONE {
            let drop = t.label[p as usize] - t.label[x];
            if drop < 0.0 {
                return Err(HstError::LabelIncrease(x as u32));
            }
            weight[x] = drop / 2.0;
        }
    }
    Ok(WeightedTree { parent: t.parent.clone(), weight })
}

/// A tree on terminals only, rooted at `terminals[0]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContractedTree {
    /// Node id in the input tree of each terminal index.
    pub terminals: Vec<u32>,
    /// Parent terminal index, `NONE` at the root.
    pub parent: Vec<u32>,
    /// Weight of the parent edge: the input distance between the two.
    pub weight: Vec<f64>,
    pub depth: Vec<u32>,
    /// Largest ratio of contracted to input distance over terminal pairs.
    pub distortion: f64,
}

impl ContractedTree {
    /// Edges `(child, parent, w)` in terminal indices.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32, f64)> + '_ {
        (0..self.parent.len() as u32)
            .filter(|&x| self.parent[x as usize] != NONE)
            .map(|x| (x, self.parent[x as usize], self.weight[x as usize]))
    }
}

/// Removes the Steiner nodes of `t`. Rooted at the smallest terminal, each
/// Steiner node joins either the class of its parent or the nearest terminal
/// below it (see `PULL_UP`); classes are connected, and the
/// quotient tree with input distances as weights is checked against
/// `[1, CONTRACTION_BOUND]` on every terminal pair.
pub fn gupta_contract(t: &WeightedTree, terminals: &[u32]) -> Result<ContractedTree, HstError> {
    let n = t.len();
    let adj = t.adjacency()?;
    let mut term: Vec<u32> = terminals.to_vec();
    term.sort_unstable();
    term.dedup();
    if term.is_empty() {
        return Err(HstError::NoTerminals);
    }
    if let Some(&bad) = term.iter().find(|&&x| x as usize >= n) {
        return Err(HstError::BadTerminal(bad));
    }
    let mut index = vec![NONE; n];
    for (i, &x) in term.iter().enumerate() {
        index[x as usize] = i as u32;
    }

    // Reroot at the smallest terminal.
    let root = term[0];
    let mut par = vec![NONE; n];
    let mut pw = vec![0.0; n];
    let mut depth = vec![0u32; n];
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([root]);
    seen[root as usize] = true;
    while let Some(x) = queue.pop_front() {
        order.push(x);
        for &(y, w) in &adj[x as usize] {
            if !seen[y as usize] {
                seen[y as usize] = true;
                par[y as usize] = x;
                pw[y as usize] = w;
                depth[y as usize] = depth[x as usize] + 1;
                queue.push_back(y);
            }
        }
    }
    if order.len() != n {
        return Err(HstError::NotATree);
    }
    // Summed along the path, since root-distance differences cancel badly.
    let dist = |a: u32, b: u32| -> f64 {
        let (mut x, mut y) = (a, b);
        let (mut sx, mut sy) = (0.0, 0.0);
        while depth[x as usize] > depth[y as usize] {
            sx += pw[x as usize];
            x = par[x as usize];
        }
        while depth[y as usize] > depth[x as usize] {
            sy += pw[y as usize];
            y = par[y as usize];
        }
        while x != y {
            sx += pw[x as usize];
            sy += pw[y as usize];
            x = par[x as usize];
            y = par[y as usize];
        }
        sx + sy
    };

    // Nearest terminal inside each subtree, ties to the smaller id.
    let mut near: Vec<(f64, u32)> = vec![(f64::INFINITY, NONE); n];
    for &x in order.iter().rev() {
        if index[x as usize] != NONE {
            near[x as usize] = (0.0, x);
        }
        let p = par[x as usize];
        if p != NONE && near[x as usize].1 != NONE {
            let cand = (near[x as usize].0 + pw[x as usize], near[x as usize].1);
            if cand.0 < near[p as usize].0 || (cand.0 == near[p as usize].0 && cand.1 < near[p as usize].1) {
                near[p as usize] = cand;
            }
        }
    }

    let mut class = vec![NONE; n];
    class[root as usize] = root;
    for &x in &order[1..] {
        class[x as usize] = if index[x as usize] != NONE {
            x
        } else {
            let up = class[par[x as usize] as usize];
            let (d_down, down) = near[x as usize];
            if down == up || (down != NONE && d_down <= PULL_UP * dist(x, up)) {
                down
            } else {
                up
            }
        };
    }

    let k = term.len();
    let mut tadj: Vec<Vec<(u32, f64)>> = vec![Vec::new(); k];
    for &x in &order[1..] {
        let (a, b) = (class[x as usize], class[par[x as usize] as usize]);
        if a != b {
            let w = dist(a, b);
            let (ia, ib) = (index[a as usize], index[b as usize]);
            tadj[ia as usize].push((ib, w));
            tadj[ib as usize].push((ia, w));
        }
    }
    let mut parent = vec![NONE; k];
    let mut weight = vec![0.0; k];
    let mut tdepth = vec![0u32; k];
    let mut seen = vec![false; k];
    seen[0] = true;
    let mut queue = VecDeque::from([0u32]);
    while let Some(x) = queue.pop_front() {
        for &(y, w) in &tadj[x as usize] {
            if !seen[y as usize] {
                seen[y as usize] = true;
                parent[y as usize] = x;
                weight[y as usize] = w;
                tdepth[y as usize] = tdepth[x as usize] + 1;
                queue.push_back(y);
            }
        }
    }

    let mut out = ContractedTree { terminals: term, parent, weight, depth: tdepth, distortion: 1.0 };
    out.distortion = check_contraction(&adj, &tadj, &out.terminals)?;
    Ok(out)
}

fn check_contraction(adj: &[Vec<(u32, f64)>], tadj: &[Vec<(u32, f64)>], term: &[u32]) -> Result<f64, HstError> {
    let mut worst: f64 = 1.0;
    for (i, &a) in term.iter().enumerate() {
        let dt = dists_from(adj, a);
        let dc = dists_from(tadj, i as u32);
        for (j, &b) in term.iter().enumerate().skip(i + 1) {
            let (d, c) = (dt[b as usize], dc[j]);
            if !le_tol(d, c) || !le_tol(c, CONTRACTION_BOUND * d) {
                return Err(HstError::Distortion { u: a, v: b, ratio: c / d });
            }
            if d > 0.0 {
                worst = worst.max(c / d);
            }
        }
    }
    Ok(worst)
}
