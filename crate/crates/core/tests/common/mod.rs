#![allow(dead_code)]

use demand_core::gbt::{Ensemble, Node, Tree};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("f{i}")).collect()
}

fn grow(
    rng: &mut ChaCha8Rng,
    nodes: &mut Vec<Node>,
    depth: usize,
    max_depth: usize,
    n_features: usize,
) -> usize {
    let id = nodes.len();
    nodes.push(Node::leaf(0.0, 1.0));
    let make_leaf = depth == max_depth || (depth > 0 && rng.gen_bool(0.25));
    if make_leaf {
        let cover = rng.gen_range(1..=20) as f64;
        nodes[id] = Node::leaf(rng.gen_range(-5.0..5.0), cover);
    } else {
        let feature = rng.gen_range(0..n_features);
        let threshold = rng.gen_range(0.0..1.0);
        let left = grow(rng, nodes, depth + 1, max_depth, n_features);
        let right = grow(rng, nodes, depth + 1, max_depth, n_features);
        let cover = nodes[left].cover + nodes[right].cover;
        nodes[id] = Node::split(
            feature,
            threshold,
            left,
            right,
            rng.gen_range(0.1..10.0),
            cover,
        );
    }
    id
}

/// Random tree with integer covers that add up at every split.
pub fn random_tree(rng: &mut ChaCha8Rng, max_depth: usize, n_features: usize) -> Tree {
    let mut nodes = Vec::new();
    grow(rng, &mut nodes, 0, max_depth, n_features);
    Tree::new(nodes).expect("generated tree is well formed")
}

pub fn random_ensemble(
    rng: &mut ChaCha8Rng,
    n_trees: usize,
    max_depth: usize,
    n_features: usize,
) -> Ensemble {
    let trees = (0..n_trees)
        .map(|_| random_tree(rng, max_depth, n_features))
        .collect();
    Ensemble::new(trees, rng.gen_range(-2.0..2.0), names(n_features)).unwrap()
}

pub fn random_row(rng: &mut ChaCha8Rng, n_features: usize) -> Vec<f64> {
    (0..n_features).map(|_| rng.gen_range(0.0..1.0)).collect()
}

/// Rows of uniform features in [0, 1).
pub fn random_rows(rng: &mut ChaCha8Rng, n: usize, n_features: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| random_row(rng, n_features)).collect()
}
