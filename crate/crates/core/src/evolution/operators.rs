use rand::seq::{index, IndexedRandom};
use rand::Rng;

use super::config::EvolutionConfig;
use crate::policy::{Feature, Func, Node, PolicyTree};

/// Attempts before a depth-violating crossover or mutation falls back to copies.
pub const MAX_RETRIES: usize = 10;

const TERMINALS: usize = Feature::COUNT + 1;
// chance that a Grow node below the root is a terminal: terminals over all primitives
const GROW_TERMINAL_PROB: f64 = TERMINALS as f64 / (TERMINALS + Func::ALL.len()) as f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitMethod {
    Grow,
    Full,
}

pub fn random_terminal<R: Rng + ?Sized>(rng: &mut R) -> Node {
    let i = rng.random_range(0..TERMINALS);
    match Feature::ALL.get(i) {
        Some(&f) => Node::Feature(f),
        None => Node::Const(rng.random_range(-1.0..=1.0)),
    }
}

fn random_func<R: Rng + ?Sized>(rng: &mut R) -> Func {
    *Func::ALL.choose(rng).expect("function set is non-empty")
}

fn with_children<R: Rng + ?Sized>(rng: &mut R, mut child: impl FnMut(&mut R) -> Node) -> Node {
    let op = random_func(rng);
    let children = (0..op.arity()).map(|_| child(rng)).collect();
    Node::Func(op, children)
}

/// Every leaf sits at exactly `depth`.
pub fn full<R: Rng + ?Sized>(depth: usize, rng: &mut R) -> Node {
    if depth == 0 {
        random_terminal(rng)
    } else {
        with_children(rng, |r| full(depth - 1, r))
    }
}

/// Function root, then functions or terminals freely down to `depth`.
pub fn grow<R: Rng + ?Sized>(depth: usize, rng: &mut R) -> Node {
    fn below<R: Rng + ?Sized>(depth: usize, rng: &mut R) -> Node {
        if depth == 0 || rng.random_bool(GROW_TERMINAL_PROB) {
            random_terminal(rng)
        } else {
            with_children(rng, |r| below(depth - 1, r))
        }
    }
    if depth == 0 {
        random_terminal(rng)
    } else {
        with_children(rng, |r| below(depth - 1, r))
    }
}

/// Depth uniform in `[min_depth, max_depth]`, then Grow or Full with equal probability.
pub fn half_and_half<R: Rng + ?Sized>(min_depth: usize, max_depth: usize, rng: &mut R) -> (Node, InitMethod) {
    let depth = rng.random_range(min_depth..=max_depth);
    if rng.random_bool(0.5) {
        (grow(depth, rng), InitMethod::Grow)
    } else {
        (full(depth, rng), InitMethod::Full)
    }
}

pub fn random_tree<R: Rng + ?Sized>(config: &EvolutionConfig, rng: &mut R) -> PolicyTree {
    PolicyTree::from_valid(half_and_half(config.init_min_depth, config.init_max_depth, rng).0)
}

/// Index of the fittest of `size` members drawn without replacement; ties are broken
/// uniformly at random.
pub fn tournament_select<R: Rng + ?Sized>(fitness: &[f64], size: usize, rng: &mut R) -> usize {
    let sample = index::sample(rng, fitness.len(), size.min(fitness.len()));
    let best = sample
        .iter()
        .map(|i| fitness[i])
        .fold(f64::NEG_INFINITY, f64::max);
    let tied: Vec<usize> = sample.iter().filter(|&i| fitness[i] == best).collect();
    match tied.as_slice() {
        [] => sample.index(0),
        [only] => *only,
        _ => *tied.choose(rng).expect("non-empty"),
    }
}

fn swap_subtrees(a: &Node, i: usize, b: &Node, j: usize) -> (Node, Node) {
    let (mut ca, mut cb) = (a.clone(), b.clone());
    let sa = a.get(i).expect("position in range").clone();
    let sb = b.get(j).expect("position in range").clone();
    *ca.get_mut(i).expect("position in range") = sb;
    *cb.get_mut(j).expect("position in range") = sa;
    (ca, cb)
}

/// Swaps subtrees rooted at uniformly chosen function nodes. Offspring deeper than
/// `max_depth` are rejected and the swap redrawn; after [`MAX_RETRIES`] the parents
/// are returned unchanged, as they are when either parent is a lone terminal.
pub fn crossover_single_point<R: Rng + ?Sized>(
    a: &PolicyTree,
    b: &PolicyTree,
    max_depth: usize,
    rng: &mut R,
) -> (PolicyTree, PolicyTree) {
    let (pa, pb) = (a.root().non_leaf_positions(), b.root().non_leaf_positions());
    if pa.is_empty() || pb.is_empty() {
        return (a.clone(), b.clone());
    }
    for _ in 0..MAX_RETRIES {
        let i = *pa.choose(rng).expect("non-empty");
        let j = *pb.choose(rng).expect("non-empty");
        let (ca, cb) = swap_subtrees(a.root(), i, b.root(), j);
        if ca.depth() <= max_depth && cb.depth() <= max_depth {
            return (PolicyTree::from_valid(ca), PolicyTree::from_valid(cb));
        }
    }
    (a.clone(), b.clone())
}

/// With probability `mutation_prob`, replaces a uniformly chosen node by a fresh
/// Half-and-Half subtree.
pub fn mutate_uniform<R: Rng + ?Sized>(tree: &PolicyTree, config: &EvolutionConfig, rng: &mut R) -> PolicyTree {
    if !rng.random_bool(config.mutation_prob) {
        return tree.clone();
    }
    let n = tree.size();
    for _ in 0..MAX_RETRIES {
        let pos = rng.random_range(0..n);
        let (sub, _) = half_and_half(
            config.mutation_subtree_min_depth,
            config.mutation_subtree_max_depth,
            rng,
        );
        let mut root = tree.root().clone();
        *root.get_mut(pos).expect("position in range") = sub;
        if root.depth() <= config.overall_max_depth {
            return PolicyTree::from_valid(root);
        }
    }
    tree.clone()
}

/// Offspring pool: tournament selection, pairwise crossover, then the mutation gate.
pub fn vary<R: Rng + ?Sized>(
    parents: &[PolicyTree],
    fitness: &[f64],
    config: &EvolutionConfig,
    rng: &mut R,
) -> Vec<PolicyTree> {
    let mut pool: Vec<PolicyTree> = (0..parents.len())
        .map(|_| parents[tournament_select(fitness, config.tournament_size, rng)].clone())
        .collect();
    for pair in pool.chunks_mut(2) {
        if let [a, b] = pair {
            if rng.random_bool(config.crossover_prob) {
                let (ca, cb) = crossover_single_point(a, b, config.overall_max_depth, rng);
                *a = ca;
                *b = cb;
            }
        }
    }
    pool.iter().map(|t| mutate_uniform(t, config, rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn leaf_depths(node: &Node, d: usize, out: &mut Vec<usize>) {
        match node {
            Node::Func(_, ch) => ch.iter().for_each(|c| leaf_depths(c, d + 1, out)),
            _ => out.push(d),
        }
    }

    #[test]
    fn full_trees_have_uniform_leaf_depth() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for depth in 0..6 {
            for _ in 0..50 {
                let t = full(depth, &mut rng);
                let mut d = Vec::new();
                leaf_depths(&t, 0, &mut d);
                assert!(d.iter().all(|&x| x == depth));
            }
        }
    }

    #[test]
    fn grow_respects_depth_and_has_function_root() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..500 {
            let t = grow(4, &mut rng);
            assert!(t.depth() <= 4 && t.depth() >= 1);
            assert!(!t.is_leaf());
        }
    }

    #[test]
    fn half_and_half_splits_evenly() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 10_000;
        let grown = (0..n)
            .filter(|_| half_and_half(2, 6, &mut rng).1 == InitMethod::Grow)
            .count();
        let frac = grown as f64 / n as f64;
        assert!((frac - 0.5).abs() <= 0.02, "{frac}");
    }

    #[test]
    fn initial_trees_within_bounds() {
        let cfg = EvolutionConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..1000 {
            let t = random_tree(&cfg, &mut rng);
            assert!(t.depth() <= cfg.init_max_depth && t.depth() >= 1);
            assert!(t.is_valid());
        }
    }

    #[test]
    fn constants_lie_in_unit_interval() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut seen = 0;
        for _ in 0..2000 {
            if let Node::Const(c) = random_terminal(&mut rng) {
                assert!((-1.0..=1.0).contains(&c));
                seen += 1;
            }
        }
        // one in eleven terminals is a constant
        assert!((seen as f64 / 2000.0 - 1.0 / 11.0).abs() < 0.03);
    }

    #[test]
    fn whole_population_tournament_returns_best() {
        let fit = [3.0, 9.0, 1.0, 4.0];
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..100 {
            assert_eq!(tournament_select(&fit, 4, &mut rng), 1);
        }
    }

    #[test]
    fn equal_fitness_tournament_is_uniform() {
        let fit = [2.0; 10];
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let trials = 50_000;
        let mut counts = [0usize; 10];
        for _ in 0..trials {
            counts[tournament_select(&fit, 4, &mut rng)] += 1;
        }
        for c in counts {
            let p = c as f64 / trials as f64;
            assert!((p - 0.1).abs() < 0.01, "{p}");
        }
    }

    #[test]
    fn unit_tournament_is_uniform_selection() {
        let fit = [1.0, 2.0, 3.0, 4.0, 5.0];
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let trials = 25_000;
        let mut counts = [0usize; 5];
        for _ in 0..trials {
            counts[tournament_select(&fit, 1, &mut rng)] += 1;
        }
        for c in counts {
            assert!((c as f64 / trials as f64 - 0.2).abs() < 0.015);
        }
    }

    #[test]
    fn root_swap_exchanges_parents() {
        let a = crate::policy::parse_tree("(+ RP CT)").unwrap();
        let b = crate::policy::parse_tree("(sin FR)").unwrap();
        let (ca, cb) = swap_subtrees(a.root(), 0, b.root(), 0);
        assert_eq!(&ca, b.root());
        assert_eq!(&cb, a.root());
    }

    #[test]
    fn terminal_parents_pass_through() {
        let a = crate::policy::parse_tree("RP").unwrap();
        let b = crate::policy::parse_tree("(+ RP CT)").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (ca, cb) = crossover_single_point(&a, &b, 8, &mut rng);
        assert_eq!((ca, cb), (a, b));
    }

    #[test]
    fn mutation_disabled_is_identity() {
        let cfg = EvolutionConfig { mutation_prob: 0.0, ..Default::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let t = random_tree(&cfg, &mut rng);
        for _ in 0..100 {
            assert_eq!(mutate_uniform(&t, &cfg, &mut rng), t);
        }
    }

    #[test]
    fn forced_mutation_of_terminal_is_shallow() {
        let cfg = EvolutionConfig { mutation_prob: 1.0, ..Default::default() };
        let t = crate::policy::parse_tree("CT").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut changed = 0;
        for _ in 0..500 {
            let m = mutate_uniform(&t, &cfg, &mut rng);
            assert!(m.depth() <= 4);
            changed += usize::from(m != t);
        }
        assert!(changed > 400);
    }

    #[test]
    fn vary_keeps_population_size() {
        let cfg = EvolutionConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let pop: Vec<_> = (0..cfg.population_size).map(|_| random_tree(&cfg, &mut rng)).collect();
        let fit: Vec<f64> = (0..pop.len()).map(|i| i as f64).collect();
        let next = vary(&pop, &fit, &cfg, &mut rng);
        assert_eq!(next.len(), pop.len());
        assert!(next.iter().all(|t| t.is_valid() && t.depth() <= cfg.overall_max_depth));
    }
}
