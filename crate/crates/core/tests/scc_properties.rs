use proptest::prelude::*;
use scclab_core::scc::{component_to_mdm, count_bound, tree_with_back_edges};
use scclab_core::{forward_dfs, star_reduction, tarjan_scc, DirectedGraph, PlaneTree};

fn digraph(max_n: usize) -> impl Strategy<Value = DirectedGraph> {
    (1..max_n).prop_flat_map(|n| {
        proptest::collection::vec((1..=n, 1..=n), 0..3 * n).prop_map(move |pairs| {
            let mut pairs: Vec<_> = pairs.into_iter().filter(|(a, b)| a != b).collect();
            pairs.sort_unstable();
            pairs.dedup();
            DirectedGraph::from_edges(n, pairs).unwrap()
        })
    })
}

/// Mutual reachability by transitive closure.
fn closure_blocks(g: &DirectedGraph) -> Vec<Vec<usize>> {
    let n = g.n();
    let mut reach = vec![vec![false; n + 1]; n + 1];
    for v in 1..=n {
        reach[v][v] = true;
    }
    for (a, b) in g.edges() {
        reach[a][b] = true;
    }
    for k in 1..=n {
        for i in 1..=n {
            if reach[i][k] {
                for j in 1..=n {
                    if reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    let mut seen = vec![false; n + 1];
    let mut blocks = Vec::new();
    for v in 1..=n {
        if !seen[v] {
            let b: Vec<usize> = (v..=n).filter(|&w| reach[v][w] && reach[w][v]).collect();
            b.iter().for_each(|&w| seen[w] = true);
            blocks.push(b);
        }
    }
    blocks
}

/// A plane tree from exploring `g` plus a back-edge set chosen by `mask`.
fn instance(g: &DirectedGraph, mask: &[bool]) -> (PlaneTree, Vec<(usize, usize)>) {
    let tree = PlaneTree::from_exploration(&forward_dfs(g));
    let order = tree.order().to_vec();
    let mut back = Vec::new();
    let mut k = 0;
    for i in 0..order.len() {
        for j in 0..i {
            if mask[k % mask.len()] {
                back.push((order[i], order[j]));
            }
            k += 1;
        }
    }
    (tree, back)
}

proptest! {
    #[test]
    fn tarjan_matches_closure(g in digraph(14)) {
        prop_assert_eq!(tarjan_scc(&g).blocks().to_vec(), closure_blocks(&g));
    }

    #[test]
    fn star_reduction_keeps_components(g in digraph(40), mask in proptest::collection::vec(prop::bool::weighted(0.04), 1..400)) {
        let (tree, back) = instance(&g, &mask);
        let x = tree_with_back_edges(&tree, &back).unwrap();
        let star = star_reduction(&tree, &back).unwrap();
        prop_assert_eq!(tarjan_scc(&x), tarjan_scc(&star));
    }

    #[test]
    fn nontrivial_blocks_are_bounded(g in digraph(40)) {
        let (blocks, bound) = count_bound(&g);
        prop_assert!(blocks <= bound);
    }

    #[test]
    fn component_mdms_keep_length_and_smooth_idempotently(g in digraph(30)) {
        let part = tarjan_scc(&g);
        for block in part.blocks() {
            let m = component_to_mdm(&g, block).unwrap();
            let id = part.block_of(block[0]);
            let inside = block
                .iter()
                .map(|&v| g.out_neighbours(v).iter().filter(|&&w| part.block_of(w) == id).count())
                .sum::<usize>();
            prop_assert!((m.total_length() - inside as f64).abs() < 1e-9);
            prop_assert_eq!(m.smoothed(), m.clone());
        }
    }
}
