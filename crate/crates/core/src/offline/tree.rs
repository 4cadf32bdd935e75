//! Edge-disjoint partition of a tree into node-covering subtrees of
//! bounded size.
//!
//! Repeatedly carve off the subtree under the deepest node whose weight
//! reaches `s`. A carved subtree either leaves as one piece (weight at most
//! `2s`) or is split into child groups packed so each group plus the hub
//! weighs in `[s, 2s]`; an undersized leftover group merges into its
//! predecessor, which caps pieces at under `4s`. The hub stays behind as a
//! leaf so the edge toward its parent is covered later, and it is the only
//! node two pieces may share. When the part outside the carved subtree
//! would drop below `s`, it joins the grouping as one more child instead of
//! remaining as an undersized remainder.

use crate::error::{Error, Result};
use crate::graph::RoundGraph;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subtree {
    pub nodes: Vec<usize>,
    pub edges: Vec<(usize, usize)>,
}

impl Subtree {
    pub fn size(&self) -> usize {
        self.nodes.len()
    }
}

struct Rooted {
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    size: Vec<usize>,
    order: Vec<usize>,
}

fn root_at(adj: &[Vec<usize>], alive: &[bool], root: usize) -> Rooted {
    let n = adj.len();
    let mut parent = vec![None; n];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut size = vec![0usize; n];
    let mut order = Vec::new();
    let mut stack = vec![root];
    let mut seen = vec![false; n];
    seen[root] = true;
    while let Some(u) = stack.pop() {
        order.push(u);
        for &w in &adj[u] {
            if alive[w] && !seen[w] {
                seen[w] = true;
                parent[w] = Some(u);
                children[u].push(w);
                stack.push(w);
            }
        }
    }
    for c in children.iter_mut() {
        c.sort_unstable();
    }
    for &u in order.iter().rev() {
        size[u] = 1 + children[u].iter().map(|&w| size[w]).sum::<usize>();
    }
    Rooted {
        parent,
        children,
        size,
        order,
    }
}

fn collect_subtree(rooted: &Rooted, v: usize) -> Vec<usize> {
    let mut nodes = Vec::with_capacity(rooted.size[v]);
    let mut stack = vec![v];
    while let Some(u) = stack.pop() {
        nodes.push(u);
        stack.extend(rooted.children[u].iter().copied());
    }
    nodes
}

fn induced_subtree(tree: &RoundGraph, nodes: Vec<usize>) -> Subtree {
    let mut member = vec![false; tree.n()];
    for &v in &nodes {
        member[v] = true;
    }
    let edges = tree
        .edges()
        .iter()
        .copied()
        .filter(|&(u, v)| member[u] && member[v])
        .collect();
    let mut nodes = nodes;
    nodes.sort_unstable();
    Subtree { nodes, edges }
}

/// Packs child subtrees of hub `v` into pieces of weight `1 + sum` in
/// `[s, 2s]`, merging an undersized tail into the last piece.
fn hub_groups(
    tree: &RoundGraph,
    v: usize,
    items: Vec<Vec<usize>>,
    s: usize,
    out: &mut Vec<Subtree>,
) {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    for item in items {
        current.extend(item);
        if 1 + current.len() >= s {
            groups.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        match groups.last_mut() {
            Some(last) => last.extend(current),
            None => groups.push(current),
        }
    }
    for mut g in groups {
        g.push(v);
        out.push(induced_subtree(tree, g));
    }
}

/// Splits a tree into edge-disjoint subtrees covering every node, each of
/// size in `[s, 4s]` (a tree of at most `2s` nodes stays whole), any two
/// sharing at most one node.
pub fn tree_decompose(tree: &RoundGraph, s: usize) -> Result<Vec<Subtree>> {
    let n = tree.n();
    if tree.edge_count() != n.saturating_sub(1) {
        return Err(Error::NotATree {
            nodes: n,
            edges: tree.edge_count(),
        });
    }
    if s < 1 || s > n {
        return Err(Error::BadSizeParameter(s, n));
    }
    if s == 1 {
        // every edge on its own already satisfies the size window
        if n == 1 {
            return Ok(vec![Subtree {
                nodes: vec![0],
                edges: vec![],
            }]);
        }
        return Ok(tree
            .edges()
            .iter()
            .map(|&(u, v)| Subtree {
                nodes: vec![u, v],
                edges: vec![(u, v)],
            })
            .collect());
    }

    let adj: Vec<Vec<usize>> = (0..n).map(|v| tree.neighbors(v).to_vec()).collect();
    let mut alive = vec![true; n];
    let mut alive_count = n;
    let root = 0usize;
    let mut out = Vec::new();

    loop {
        if alive_count <= 2 * s {
            let nodes: Vec<usize> = (0..n).filter(|&v| alive[v]).collect();
            out.push(induced_subtree(tree, nodes));
            break;
        }
        let rooted = root_at(&adj, &alive, root);
        debug_assert_eq!(rooted.order.len(), alive_count);

        // deepest node whose subtree still weighs at least s
        let mut v = root;
        while let Some(&w) = rooted.children[v].iter().find(|&&w| rooted.size[w] >= s) {
            v = w;
        }

        if v == root {
            let items: Vec<Vec<usize>> = rooted.children[v]
                .iter()
                .map(|&w| collect_subtree(&rooted, w))
                .collect();
            hub_groups(tree, v, items, s, &mut out);
            break;
        }

        let rest = alive_count - rooted.size[v];
        if rest < s {
            // fold the outside part in as one more child of v
            let in_subtree: Vec<usize> = collect_subtree(&rooted, v);
            let mut inside = vec![false; n];
            for &u in &in_subtree {
                inside[u] = true;
            }
            let outside: Vec<usize> = (0..n).filter(|&u| alive[u] && !inside[u]).collect();
            let mut items: Vec<Vec<usize>> = rooted.children[v]
                .iter()
                .map(|&w| collect_subtree(&rooted, w))
                .collect();
            items.push(outside);
            hub_groups(tree, v, items, s, &mut out);
            break;
        }

        if rooted.size[v] <= 2 * s {
            out.push(induced_subtree(tree, collect_subtree(&rooted, v)));
        } else {
            let items: Vec<Vec<usize>> = rooted.children[v]
                .iter()
                .map(|&w| collect_subtree(&rooted, w))
                .collect();
            hub_groups(tree, v, items, s, &mut out);
        }
        // v stays behind as a leaf so the edge to its parent is covered later
        for u in collect_subtree(&rooted, v) {
            if u != v {
                alive[u] = false;
            }
        }
        alive_count = rest + 1;
        debug_assert!(rooted.parent[v].is_some());
    }
    Ok(out)
}
