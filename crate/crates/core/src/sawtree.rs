//! Self-avoiding-walk trees that preserve single-site marginals.
//!
//! For independent sets on any finite graph, the occupation ratio at a vertex
//! equals the ratio at the root of the tree of self-avoiding walks from that
//! vertex, provided walks that close a cycle are capped by a fixed leaf: the
//! leaf is occupied when the closing neighbor outranks the walk's exit at the
//! revisited vertex, unoccupied otherwise.  Fixing a copy unoccupied is the
//! same as removing it, and fixing it occupied is the same as removing its
//! parent and that whole branch, so an equivalent "deletion-only" form prunes
//! outranked branches instead of adding capped leaves.

use std::collections::HashMap;

use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::exactcount::count_independent_sets;
use crate::lattice::{FiniteRegion, NeighborOrder, Point};
use crate::{Error, Result};

/// A finite graph with ranked adjacency: the position of a neighbor in a
/// vertex's list is its rank at that vertex.
#[derive(Clone, Debug)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
}

impl Graph {
    /// Build from an edge list; neighbors are ranked in ascending id order.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Graph> {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidParameter(format!(
                    "edge ({u},{v}) out of range for {n} vertices"
                )));
            }
            if u == v {
                return Err(Error::InvalidParameter(format!("self-loop at {u}")));
            }
            if !adj[u].contains(&v) {
                adj[u].push(v);
                adj[v].push(u);
            }
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Ok(Graph { adj })
    }

    /// Build with explicit per-vertex neighbor orderings.
    pub fn from_adjacency(adj: Vec<Vec<usize>>) -> Result<Graph> {
        let n = adj.len();
        for (u, list) in adj.iter().enumerate() {
            for &v in list {
                if v >= n || v == u {
                    return Err(Error::InvalidParameter(format!(
                        "bad neighbor {v} of vertex {u}"
                    )));
                }
                if !adj[v].contains(&u) {
                    return Err(Error::InvalidParameter(format!(
                        "edge ({u},{v}) is not symmetric"
                    )));
                }
            }
            let mut dedup = list.clone();
            dedup.sort_unstable();
            dedup.dedup();
            if dedup.len() != list.len() {
                return Err(Error::InvalidParameter(format!(
                    "duplicate neighbor at vertex {u}"
                )));
            }
        }
        Ok(Graph { adj })
    }

    /// Region graph, neighbors ranked by the given direction order.
    /// Returns the graph and the site of each vertex id.
    pub fn from_region(region: &FiniteRegion, order: &NeighborOrder) -> (Graph, Vec<Point>) {
        let pts: Vec<Point> = region.iter().collect();
        let index: HashMap<Point, usize> =
            pts.iter().enumerate().map(|(k, &p)| (p, k)).collect();
        let adj = pts
            .iter()
            .map(|&p| {
                order
                    .dirs()
                    .iter()
                    .filter_map(|d| index.get(&d.offset(p)).copied())
                    .collect()
            })
            .collect();
        (Graph { adj }, pts)
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    fn rank(&self, at: usize, of: usize) -> usize {
        self.adj[at]
            .iter()
            .position(|&w| w == of)
            .expect("rank of a non-neighbor")
    }
}

/// One node of a walk tree.
#[derive(Clone, Debug)]
pub struct SawNode {
    /// the graph vertex this node copies
    pub origin: usize,
    /// forced state for cycle-closing copies
    pub fix: Option<bool>,
    pub depth: usize,
    pub children: Vec<usize>,
}

/// The tree of self-avoiding walks from a root vertex.
#[derive(Clone, Debug)]
pub struct SawTree {
    pub nodes: Vec<SawNode>,
    pub root: usize,
}

/// Grow the walk tree from `root` down to `depth_cap` levels.
///
/// With `deletion_only` the cycle-closing copies are not materialized;
/// instead a branch whose tip loses a closing comparison is dropped.  Both
/// forms evaluate to the same root ratio.
pub fn build_saw_tree(
    g: &Graph,
    root: usize,
    depth_cap: usize,
    deletion_only: bool,
) -> Result<SawTree> {
    if root >= g.len() {
        return Err(Error::InvalidParameter(format!(
            "root {root} out of range for {} vertices",
            g.len()
        )));
    }
    let mut nodes = vec![SawNode {
        origin: root,
        fix: None,
        depth: 0,
        children: Vec::new(),
    }];
    let mut walk = vec![root];
    let mut pos: Vec<Option<usize>> = vec![None; g.len()];
    pos[root] = Some(0);
    expand(g, 0, &mut nodes, &mut walk, &mut pos, depth_cap, deletion_only);
    Ok(SawTree { nodes, root: 0 })
}

fn expand(
    g: &Graph,
    node: usize,
    nodes: &mut Vec<SawNode>,
    walk: &mut Vec<usize>,
    pos: &mut Vec<Option<usize>>,
    depth_cap: usize,
    deletion_only: bool,
) {
    let depth = nodes[node].depth;
    if depth >= depth_cap {
        return;
    }
    let v = nodes[node].origin;
    let k = walk.len() - 1;
    for idx in 0..g.adj[v].len() {
        let w = g.adj[v][idx];
        if k > 0 && w == walk[k - 1] {
            continue; // the parent in the tree, not a cycle
        }
        if let Some(p) = pos[w] {
            // the walk closes a cycle at w; compare the closing neighbor v
            // with the exit the walk took from w
            let exit = walk[p + 1];
            let occupied = g.rank(w, v) > g.rank(w, exit);
            if !deletion_only {
                let leaf = nodes.len();
                nodes.push(SawNode {
                    origin: w,
                    fix: Some(occupied),
                    depth: depth + 1,
                    children: Vec::new(),
                });
                nodes[node].children.push(leaf);
            }
            continue;
        }
        if deletion_only {
            // drop the branch if its tip loses any closing comparison
            let mut dead = false;
            for p in 0..k {
                let back = walk[p];
                if g.adj[back].contains(&w) && back != v {
                    let exit = walk[p + 1];
                    if g.rank(back, w) > g.rank(back, exit) {
                        dead = true;
                        break;
                    }
                }
            }
            if dead {
                continue;
            }
        }
        let child = nodes.len();
        nodes.push(SawNode {
            origin: w,
            fix: None,
            depth: depth + 1,
            children: Vec::new(),
        });
        nodes[node].children.push(child);
        walk.push(w);
        pos[w] = Some(walk.len() - 1);
        expand(g, child, nodes, walk, pos, depth_cap, deletion_only);
        pos[w] = None;
        walk.pop();
    }
}

/// Occupied/unoccupied ratio at every node, bottom-up.
///
/// `fixed` pins graph vertices (every copy of a pinned vertex takes its
/// state); `boundary` pins individual tree nodes and wins over everything,
/// which is how truncated frontiers get their boundary condition.  A node's
/// own closing fix applies after both.  The ratio is `inf` for a node forced
/// occupied; free leaves carry ratio 1.
pub fn evaluate_ratios(
    tree: &SawTree,
    fixed: &HashMap<usize, bool>,
    boundary: &HashMap<usize, bool>,
) -> Vec<f64> {
    let n = tree.nodes.len();
    let mut r = vec![0.0f64; n];
    // children always have larger ids than their parent
    for id in (0..n).rev() {
        let node = &tree.nodes[id];
        let forced = boundary
            .get(&id)
            .or_else(|| fixed.get(&node.origin))
            .copied()
            .or(node.fix);
        r[id] = match forced {
            Some(true) => f64::INFINITY,
            Some(false) => 0.0,
            None => node
                .children
                .iter()
                .map(|&c| 1.0 / (1.0 + r[c]))
                .product(),
        };
    }
    r
}

/// Probability that the root vertex is unoccupied, given the tree's ratios.
pub fn root_probability(tree: &SawTree, ratios: &[f64]) -> f64 {
    1.0 / (1.0 + ratios[tree.root])
}

/// Compare the exact graph marginal at `root` with the walk-tree marginal.
/// The two agree exactly; the returned pair is (graph, tree).
pub fn check_theorem_saw(
    g: &Graph,
    root: usize,
    fixed: &HashMap<usize, bool>,
) -> Result<(f64, f64)> {
    if fixed.contains_key(&root) {
        return Err(Error::InvalidParameter("root must be free".into()));
    }
    let n = g.len();
    let mut fix_vec: Vec<Option<bool>> = vec![None; n];
    for (&v, &b) in fixed {
        if v >= n {
            return Err(Error::InvalidParameter(format!("fixed vertex {v} out of range")));
        }
        fix_vec[v] = Some(b);
    }
    let adj: Vec<Vec<usize>> = (0..n).map(|v| g.neighbors(v).to_vec()).collect();
    let all = count_independent_sets(&adj, &fix_vec)?;
    let mut with_root_empty = fix_vec.clone();
    with_root_empty[root] = Some(false);
    let unocc = count_independent_sets(&adj, &with_root_empty)?;
    let p_graph = BigRational::new(unocc.into(), all.into())
        .to_f64()
        .expect("ratio fits f64");

    let tree = build_saw_tree(g, root, n, false)?;
    let ratios = evaluate_ratios(&tree, fixed, &HashMap::new());
    let p_tree = root_probability(&tree, &ratios);
    Ok((p_graph, p_tree))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Constraint;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn no_fix() -> HashMap<usize, bool> {
        HashMap::new()
    }

    #[test]
    fn single_edge_marginal() {
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let (pg, pt) = check_theorem_saw(&g, 0, &no_fix()).unwrap();
        assert!((pg - 2.0 / 3.0).abs() < 1e-15);
        assert!((pt - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn triangle_marginal_through_closing_fixes() {
        let g = Graph::from_edges(3, &[(0, 1), (0, 2), (1, 2)]).unwrap();
        let (pg, pt) = check_theorem_saw(&g, 0, &no_fix()).unwrap();
        assert!((pg - 0.75).abs() < 1e-15);
        assert!((pt - 0.75).abs() < 1e-14);
    }

    #[test]
    fn four_cycle_marginal() {
        let order = NeighborOrder::default_for(Constraint::Hs);
        let region = FiniteRegion::rect(Constraint::Hs, 2, 2).unwrap();
        let (g, pts) = Graph::from_region(&region, &order);
        let root = pts.iter().position(|&p| p == (0, 0)).unwrap();
        let (pg, pt) = check_theorem_saw(&g, root, &no_fix()).unwrap();
        assert!((pg - 5.0 / 7.0).abs() < 1e-15);
        assert!((pt - 5.0 / 7.0).abs() < 1e-14);
    }

    #[test]
    fn depth_zero_tree_is_a_free_leaf() {
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let tree = build_saw_tree(&g, 0, 0, false).unwrap();
        assert_eq!(tree.nodes.len(), 1);
        let ratios = evaluate_ratios(&tree, &no_fix(), &no_fix());
        assert_eq!(root_probability(&tree, &ratios), 0.5);
    }

    #[test]
    fn boundary_pins_override_everything() {
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let tree = build_saw_tree(&g, 0, 2, false).unwrap();
        // pin the single child occupied: root ratio 0, p = 1
        let child = tree.nodes[0].children[0];
        let boundary: HashMap<usize, bool> = [(child, true)].into();
        let ratios = evaluate_ratios(&tree, &no_fix(), &boundary);
        assert_eq!(root_probability(&tree, &ratios), 1.0);
    }

    fn random_connected_graph(rng: &mut ChaCha8Rng, n: usize) -> Graph {
        let mut edges = Vec::new();
        for v in 1..n {
            let u = rng.gen_range(0..v);
            edges.push((u, v));
        }
        for u in 0..n {
            for v in u + 1..n {
                if rng.gen_bool(0.3) {
                    edges.push((u, v));
                }
            }
        }
        Graph::from_edges(n, &edges).unwrap()
    }

    #[test]
    fn tree_marginal_equals_graph_marginal_on_random_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0010);
        for _ in 0..40 {
            let n = rng.gen_range(2..=9);
            let g = random_connected_graph(&mut rng, n);
            // fix a few non-root vertices, rejecting infeasible draws
            let mut fixed = HashMap::new();
            for v in 1..n {
                if rng.gen_bool(0.25) {
                    fixed.insert(v, rng.gen_bool(0.5));
                }
            }
            let feasible = fixed.iter().all(|(&v, &b)| {
                !b || g
                    .neighbors(v)
                    .iter()
                    .all(|w| fixed.get(w) != Some(&true))
            });
            if !feasible {
                continue;
            }
            let (pg, pt) = check_theorem_saw(&g, 0, &fixed).unwrap();
            assert!(
                (pg - pt).abs() < 1e-12,
                "graph {pg} vs tree {pt} on n={n}"
            );
        }
    }

    #[test]
    fn deletion_only_form_matches_the_capped_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0011);
        for _ in 0..25 {
            let n = rng.gen_range(2..=8);
            let g = random_connected_graph(&mut rng, n);
            let full = build_saw_tree(&g, 0, n, false).unwrap();
            let pruned = build_saw_tree(&g, 0, n, true).unwrap();
            let rf = evaluate_ratios(&full, &no_fix(), &no_fix());
            let rp = evaluate_ratios(&pruned, &no_fix(), &no_fix());
            let pf = root_probability(&full, &rf);
            let pp = root_probability(&pruned, &rp);
            assert!((pf - pp).abs() < 1e-12, "{pf} vs {pp}");
            assert!(pruned.nodes.len() <= full.nodes.len());
        }
    }

    #[test]
    fn ratios_stay_in_the_unit_interval_or_infinity() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0012);
        for _ in 0..10 {
            let n = rng.gen_range(2..=8);
            let g = random_connected_graph(&mut rng, n);
            let tree = build_saw_tree(&g, 0, n, false).unwrap();
            let ratios = evaluate_ratios(&tree, &no_fix(), &no_fix());
            for (&r, node) in ratios.iter().zip(&tree.nodes) {
                if node.fix == Some(true) {
                    assert!(r.is_infinite());
                } else {
                    assert!((0.0..=1.0).contains(&r), "ratio {r} out of range");
                }
            }
            let p = root_probability(&tree, &ratios);
            assert!((0.5..=1.0).contains(&p));
        }
    }
}
