//! Expression trees: the genotype of the regression engine.
//!
//! Trees are built from eight arithmetic primitives over dataset-column
//! references and numeric constants. They are immutable after construction;
//! variation operators produce new trees. Structural complexity is the sum
//! of node counts over every subtree, which penalises both size and nesting
//! depth.

mod eval;
mod generate;
mod interval;
mod text;
mod variation;

pub use generate::{random_model_tree, random_tree, MODEL_MAX_DEPTH, MODEL_MIN_DEPTH};
pub use interval::Interval;
pub use text::parse_expr;
pub use variation::{crossover, depth_preserving_mutation, subtree_mutation};

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum arity of the variadic operators `Plus` and `Times`.
pub const MAX_ARITY: usize = 5;

/// Maximum expressional complexity admitted to a population.
pub const MAX_COMPLEXITY: u64 = 1000;

/// The eight operators available to regression models.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Primitive {
    /// Variadic addition (arity 2..=5).
    Plus,
    /// Unary negation.
    Minus,
    /// Binary subtraction `a - b`.
    Subtract,
    /// Binary division `a / b`.
    Divide,
    /// Variadic multiplication (arity 2..=5).
    Times,
    /// Unary square root.
    Sqrt,
    /// Unary square `x^2`.
    Square,
    /// Unary reciprocal `1/x`.
    Inverse,
}

impl Primitive {
    /// Every primitive, in a fixed sampling order.
    pub const ALL: [Primitive; 8] = [
        Primitive::Plus,
        Primitive::Minus,
        Primitive::Subtract,
        Primitive::Divide,
        Primitive::Times,
        Primitive::Sqrt,
        Primitive::Square,
        Primitive::Inverse,
    ];

    /// Inclusive (min, max) child counts.
    pub fn arity_bounds(self) -> (usize, usize) {
        match self {
            Primitive::Plus | Primitive::Times => (2, MAX_ARITY),
            Primitive::Subtract | Primitive::Divide => (2, 2),
            Primitive::Minus | Primitive::Sqrt | Primitive::Square | Primitive::Inverse => (1, 1),
        }
    }

    /// Whether `n` children is a legal arity for this primitive.
    pub fn accepts_arity(self, n: usize) -> bool {
        let (lo, hi) = self.arity_bounds();
        (lo..=hi).contains(&n)
    }
}

/// An expression tree node. Leaves are constants or variable references;
/// internal nodes apply a [`Primitive`] to an ordered child list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Expr {
    /// A finite numeric literal.
    Const(f64),
    /// A reference to a dataset input column, by index.
    Var(usize),
    /// A primitive applied to children.
    Op(Primitive, Vec<Expr>),
}

impl Expr {
    /// Total node count.
    pub fn size(&self) -> usize {
        match self {
            Expr::Op(_, kids) => 1 + kids.iter().map(Expr::size).sum::<usize>(),
            _ => 1,
        }
    }

    /// Tree depth; a single leaf has depth 1.
    pub fn depth(&self) -> usize {
        match self {
            Expr::Op(_, kids) => 1 + kids.iter().map(Expr::depth).max().unwrap_or(0),
            _ => 1,
        }
    }

    /// Expressional complexity: the sum over all nodes of the size of the
    /// subtree rooted there. A leaf scores 1; nesting is penalised because
    /// deep nodes are counted once per enclosing subtree.
    pub fn complexity(&self) -> u64 {
        fn walk(e: &Expr) -> (u64, u64) {
            // (subtree size, summed complexity)
            match e {
                Expr::Op(_, kids) => {
                    let mut size = 1u64;
                    let mut comp = 0u64;
                    for k in kids {
                        let (s, c) = walk(k);
                        size += s;
                        comp += c;
                    }
                    (size, comp + size)
                }
                _ => (1, 1),
            }
        }
        walk(self).1
    }

    /// The exact set of variable indices appearing in the tree.
    pub fn variables_used(&self) -> BTreeSet<usize> {
        let mut set = BTreeSet::new();
        self.collect_vars(&mut set);
        set
    }

    fn collect_vars(&self, set: &mut BTreeSet<usize>) {
        match self {
            Expr::Var(i) => {
                set.insert(*i);
            }
            Expr::Op(_, kids) => {
                for k in kids {
                    k.collect_vars(set);
                }
            }
            Expr::Const(_) => {}
        }
    }

    /// Largest variable index referenced, if any variable appears.
    pub fn max_var_index(&self) -> Option<usize> {
        match self {
            Expr::Var(i) => Some(*i),
            Expr::Op(_, kids) => kids.iter().filter_map(Expr::max_var_index).max(),
            Expr::Const(_) => None,
        }
    }

    /// Checks arity bounds and constant finiteness throughout the tree.
    pub fn validate(&self) -> Result<()> {
        match self {
            Expr::Const(c) if !c.is_finite() => {
                Err(Error::input(format!("non-finite constant {c} in tree")))
            }
            Expr::Const(_) | Expr::Var(_) => Ok(()),
            Expr::Op(p, kids) => {
                if !p.accepts_arity(kids.len()) {
                    return Err(Error::input(format!(
                        "{p:?} applied to {} children (allowed {:?})",
                        kids.len(),
                        p.arity_bounds()
                    )));
                }
                kids.iter().try_for_each(Expr::validate)
            }
        }
    }

    /// The subtree rooted at preorder position `index` (0 = the root).
    pub fn subtree(&self, index: usize) -> Option<&Expr> {
        fn walk<'a>(e: &'a Expr, remaining: &mut usize) -> Option<&'a Expr> {
            if *remaining == 0 {
                return Some(e);
            }
            *remaining -= 1;
            if let Expr::Op(_, kids) = e {
                for k in kids {
                    if let Some(hit) = walk(k, remaining) {
                        return Some(hit);
                    }
                }
            }
            None
        }
        let mut remaining = index;
        walk(self, &mut remaining)
    }

    /// A copy of this tree with the subtree at preorder position `index`
    /// replaced. Returns `None` when the index is out of range.
    pub fn with_replaced(&self, index: usize, replacement: Expr) -> Option<Expr> {
        fn walk(e: &Expr, remaining: &mut usize, repl: &mut Option<Expr>) -> Expr {
            if repl.is_some() && *remaining == 0 {
                return repl.take().expect("replacement consumed once");
            }
            *remaining -= 1;
            match e {
                Expr::Op(p, kids) => {
                    let kids = kids
                        .iter()
                        .map(|k| {
                            if repl.is_some() {
                                walk(k, remaining, repl)
                            } else {
                                k.clone()
                            }
                        })
                        .collect();
                    Expr::Op(*p, kids)
                }
                leaf => leaf.clone(),
            }
        }
        if index >= self.size() {
            return None;
        }
        let mut remaining = index;
        let mut repl = Some(replacement);
        Some(walk(self, &mut remaining, &mut repl))
    }

    /// Renders the tree in the infix text grammar using `names` for variable
    /// display; indices beyond `names` fall back to `x{index}`.
    pub fn to_text(&self, names: &[String]) -> String {
        text::format_expr(self, names)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent brute-force oracle: enumerate every subtree by walking
    /// from each node, count nodes per subtree, and sum.
    fn complexity_oracle(e: &Expr) -> u64 {
        fn all_nodes<'a>(e: &'a Expr, out: &mut Vec<&'a Expr>) {
            out.push(e);
            if let Expr::Op(_, kids) = e {
                for k in kids {
                    all_nodes(k, out);
                }
            }
        }
        let mut nodes = Vec::new();
        all_nodes(e, &mut nodes);
        nodes.iter().map(|n| n.size() as u64).sum()
    }

    fn table1_tree() -> Expr {
        Expr::Op(
            Primitive::Plus,
            vec![
                Expr::Const(-25.2334),
                Expr::Op(
                    Primitive::Times,
                    vec![Expr::Const(3.21666), Expr::Var(0)],
                ),
            ],
        )
    }

    #[test]
    fn complexity_of_affine_two_term_model_is_11() {
        assert_eq!(table1_tree().complexity(), 11);
    }

    #[test]
    fn complexity_of_leaf_is_1() {
        assert_eq!(Expr::Var(0).complexity(), 1);
        assert_eq!(Expr::Const(4.0).complexity(), 1);
    }

    #[test]
    fn complexity_of_two_leaf_sum_is_5() {
        let t = Expr::Op(Primitive::Plus, vec![Expr::Var(0), Expr::Var(1)]);
        assert_eq!(t.complexity(), 5);
    }

    #[test]
    fn complexity_matches_brute_force_oracle_on_random_trees() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let t = random_tree(&mut rng, 6, 6, MAX_COMPLEXITY);
            assert_eq!(t.complexity(), complexity_oracle(&t), "tree {t:?}");
        }
    }

    #[test]
    fn replacing_a_leaf_with_a_deeper_subtree_strictly_increases_complexity() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let t = random_tree(&mut rng, 4, 5, MAX_COMPLEXITY);
            let leaf_positions: Vec<usize> = (0..t.size())
                .filter(|&i| !matches!(t.subtree(i), Some(Expr::Op(..))))
                .collect();
            let deeper = Expr::Op(
                Primitive::Plus,
                vec![Expr::Var(0), Expr::Op(Primitive::Sqrt, vec![Expr::Var(1)])],
            );
            for &pos in &leaf_positions {
                let grown = t.with_replaced(pos, deeper.clone()).unwrap();
                assert!(grown.complexity() > t.complexity());
            }
        }
    }

    #[test]
    fn subtree_indexing_is_preorder() {
        let t = table1_tree();
        assert_eq!(t.subtree(0), Some(&t));
        assert_eq!(t.subtree(1), Some(&Expr::Const(-25.2334)));
        assert!(matches!(t.subtree(2), Some(Expr::Op(Primitive::Times, _))));
        assert_eq!(t.subtree(3), Some(&Expr::Const(3.21666)));
        assert_eq!(t.subtree(4), Some(&Expr::Var(0)));
        assert_eq!(t.subtree(5), None);
    }

    #[test]
    fn with_replaced_swaps_exactly_the_indexed_subtree() {
        let t = table1_tree();
        let swapped = t.with_replaced(4, Expr::Var(9)).unwrap();
        assert_eq!(swapped.subtree(4), Some(&Expr::Var(9)));
        assert_eq!(swapped.subtree(1), Some(&Expr::Const(-25.2334)));
        assert_eq!(t.subtree(4), Some(&Expr::Var(0)), "original untouched");
        assert!(t.with_replaced(99, Expr::Var(0)).is_none());
    }

    #[test]
    fn variables_used_reports_exact_set() {
        let t = table1_tree();
        assert_eq!(t.variables_used().into_iter().collect::<Vec<_>>(), vec![0]);
        assert!(Expr::Const(2.0).variables_used().is_empty());
    }

    #[test]
    fn validate_rejects_bad_arity() {
        let bad = Expr::Op(Primitive::Plus, vec![Expr::Var(0)]);
        assert!(bad.validate().is_err());
        let too_many = Expr::Op(Primitive::Plus, vec![Expr::Var(0); 6]);
        assert!(too_many.validate().is_err());
        assert!(table1_tree().validate().is_ok());
    }
}
