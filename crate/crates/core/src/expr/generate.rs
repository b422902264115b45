//! Random tree generation: ramped half-and-half over the primitive set.

use rand::Rng;

use super::{Expr, Primitive, MAX_ARITY};

/// Depth range for freshly generated population members.
pub const MODEL_MIN_DEPTH: usize = 2;
pub const MODEL_MAX_DEPTH: usize = 6;

/// Bounded attempts before falling back to a minimal tree.
const GENERATION_RETRIES: usize = 8;

/// Generates a random subtree with depth ramped uniformly in
/// `1..=depth_limit`, choosing the full or grow method per call, and
/// re-sampling (up to a bounded retry count) when the result exceeds
/// `max_complexity`. The fallback is a single leaf.
pub fn random_tree(
    rng: &mut impl Rng,
    n_vars: usize,
    depth_limit: usize,
    max_complexity: u64,
) -> Expr {
    assert!(depth_limit >= 1, "depth_limit must be at least 1");
    for _ in 0..GENERATION_RETRIES {
        let depth = rng.gen_range(1..=depth_limit);
        let tree = if rng.gen_bool(0.5) {
            full(rng, n_vars, depth)
        } else {
            grow(rng, n_vars, depth)
        };
        if tree.complexity() <= max_complexity {
            return tree;
        }
    }
    leaf(rng, n_vars)
}

/// Generates a fresh population member: a `Plus` root with 2..=5 children
/// and overall depth ramped in `MODEL_MIN_DEPTH..=MODEL_MAX_DEPTH`.
pub fn random_model_tree(rng: &mut impl Rng, n_vars: usize, max_complexity: u64) -> Expr {
    for _ in 0..GENERATION_RETRIES {
        let depth = rng.gen_range(MODEL_MIN_DEPTH..=MODEL_MAX_DEPTH);
        let full_method = rng.gen_bool(0.5);
        let arity = rng.gen_range(2..=MAX_ARITY);
        let children: Vec<Expr> = (0..arity)
            .map(|_| {
                if full_method {
                    full(rng, n_vars, depth - 1)
                } else {
                    grow(rng, n_vars, depth - 1)
                }
            })
            .collect();
        let tree = Expr::Op(Primitive::Plus, children);
        if tree.complexity() <= max_complexity {
            return tree;
        }
    }
    Expr::Op(Primitive::Plus, vec![leaf(rng, n_vars), leaf(rng, n_vars)])
}

/// Full method: operators at every level until the depth budget is 1.
/// Every branch bottoms out at exactly the budget, so depth is exact.
pub(super) fn full(rng: &mut impl Rng, n_vars: usize, depth: usize) -> Expr {
    if depth <= 1 {
        return leaf(rng, n_vars);
    }
    let (p, arity) = random_operator(rng);
    let children = (0..arity).map(|_| full(rng, n_vars, depth - 1)).collect();
    Expr::Op(p, children)
}

/// Grow method: each position may stop early at a leaf.
fn grow(rng: &mut impl Rng, n_vars: usize, depth: usize) -> Expr {
    if depth <= 1 || rng.gen_bool(0.25) {
        return leaf(rng, n_vars);
    }
    let (p, arity) = random_operator(rng);
    let children = (0..arity).map(|_| grow(rng, n_vars, depth - 1)).collect();
    Expr::Op(p, children)
}

fn random_operator(rng: &mut impl Rng) -> (Primitive, usize) {
    let p = Primitive::ALL[rng.gen_range(0..Primitive::ALL.len())];
    let (lo, hi) = p.arity_bounds();
    (p, rng.gen_range(lo..=hi))
}

fn leaf(rng: &mut impl Rng, n_vars: usize) -> Expr {
    if n_vars > 0 && rng.gen_bool(0.5) {
        Expr::Var(rng.gen_range(0..n_vars))
    } else {
        Expr::Const(random_const(rng))
    }
}

/// Constants are a 50/50 mix of integers in [-10, 10] and reals in
/// [-10, 10] rounded to 4 decimal digits.
fn random_const(rng: &mut impl Rng) -> f64 {
    if rng.gen_bool(0.5) {
        rng.gen_range(-10i32..=10) as f64
    } else {
        (rng.gen_range(-10.0f64..=10.0) * 1e4).round() / 1e4
    }
}

#[cfg(test)]
mod tests {
    use super::super::MAX_COMPLEXITY;
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn depth_limit_one_yields_a_single_leaf() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let t = random_tree(&mut rng, 3, 1, MAX_COMPLEXITY);
            assert_eq!(t.size(), 1);
        }
    }

    #[test]
    fn generated_trees_respect_arity_and_complexity_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..500 {
            let t = random_tree(&mut rng, 4, 6, MAX_COMPLEXITY);
            t.validate().unwrap();
            assert!(t.complexity() <= MAX_COMPLEXITY);
        }
    }

    #[test]
    fn model_trees_have_plus_root_and_ramped_depth() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let t = random_model_tree(&mut rng, 4, MAX_COMPLEXITY);
            t.validate().unwrap();
            assert!(matches!(t, Expr::Op(Primitive::Plus, _)));
            assert!((MODEL_MIN_DEPTH..=MODEL_MAX_DEPTH).contains(&t.depth()));
            assert!(t.complexity() <= MAX_COMPLEXITY);
        }
    }

    #[test]
    fn zero_variable_generation_produces_constant_trees() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let t = random_tree(&mut rng, 0, 4, MAX_COMPLEXITY);
            assert!(t.variables_used().is_empty());
        }
    }

    #[test]
    fn fixed_seed_reproduces_identical_tree_sequence() {
        let mut a = ChaCha8Rng::seed_from_u64(99);
        let mut b = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..1000 {
            let ta = random_tree(&mut a, 5, 6, MAX_COMPLEXITY);
            let tb = random_tree(&mut b, 5, 6, MAX_COMPLEXITY);
            assert_eq!(ta, tb);
        }
    }

    #[test]
    fn full_method_hits_exact_depth() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let t = full(&mut rng, 3, 4);
            assert_eq!(t.depth(), 4);
        }
    }
}
