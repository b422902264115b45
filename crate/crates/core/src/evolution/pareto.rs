//! Nondominated sorting, Pareto tournaments, and layer-wise selection.
//!
//! All objectives are minimized. Dominance is weak: `a` dominates `b` when
//! `a` is no worse in every objective and strictly better in at least one.

use rand::Rng;

/// True when `a` dominates `b` under minimization.
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    debug_assert_eq!(a.len(), b.len());
    let mut strictly_better = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strictly_better = true;
        }
    }
    strictly_better
}

/// Fast nondominated sort: returns successive Pareto layers as index lists,
/// each in ascending input order. Layer 0 is the nondominated set; layer k
/// is nondominated once layers `< k` are removed.
pub fn nondominated_sort(points: &[Vec<f64>]) -> Vec<Vec<usize>> {
    let n = points.len();
    if n == 0 {
        return Vec::new();
    }
    let mut dominated_by_me: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut dominators = vec![0usize; n];
    for i in 0..n {
        for j in (i + 1)..n {
            if dominates(&points[i], &points[j]) {
                dominated_by_me[i].push(j);
                dominators[j] += 1;
            } else if dominates(&points[j], &points[i]) {
                dominated_by_me[j].push(i);
                dominators[i] += 1;
            }
        }
    }
    let mut layers = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| dominators[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominated_by_me[i] {
                dominators[j] -= 1;
                if dominators[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        layers.push(std::mem::replace(&mut current, next));
    }
    layers
}

/// Samples `tournament_size` distinct entrants and returns the indices of
/// the nondominated ones, in sampled order.
pub fn pareto_tournament(
    objectives: &[Vec<f64>],
    rng: &mut impl Rng,
    tournament_size: usize,
) -> Vec<usize> {
    debug_assert!(tournament_size <= objectives.len());
    let entrants = rand::seq::index::sample(rng, objectives.len(), tournament_size);
    let entrants: Vec<usize> = entrants.into_iter().collect();
    entrants
        .iter()
        .filter(|&&i| {
            !entrants
                .iter()
                .any(|&j| j != i && dominates(&objectives[j], &objectives[i]))
        })
        .copied()
        .collect()
}

/// Admits whole Pareto layers until `capacity` would be exceeded, then
/// fills the remainder from the next layer ordered by error ascending, then
/// complexity, then age (ties keep input order). `objectives` rows are
/// `[complexity, error, age]` or `[complexity, error]`; truncation reads
/// error from index 1, complexity from 0, age from 2 when present.
pub fn select_by_layers(objectives: &[Vec<f64>], capacity: usize) -> Vec<usize> {
    let mut selected = Vec::with_capacity(capacity.min(objectives.len()));
    for layer in nondominated_sort(objectives) {
        let remaining = capacity - selected.len();
        if layer.len() <= remaining {
            selected.extend(layer);
            if selected.len() == capacity {
                break;
            }
        } else {
            let mut by_error = layer;
            by_error.sort_by(|&a, &b| truncation_key(&objectives[a], &objectives[b]));
            selected.extend(by_error.into_iter().take(remaining));
            break;
        }
    }
    selected
}

fn truncation_key(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    let age = |v: &[f64]| v.get(2).copied().unwrap_or(0.0);
    a[1].total_cmp(&b[1])
        .then_with(|| a[0].total_cmp(&b[0]))
        .then_with(|| age(a).total_cmp(&age(b)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Independent oracle: peel nondominated sets by direct O(n²) scans.
    pub(crate) fn layers_oracle(points: &[Vec<f64>]) -> Vec<Vec<usize>> {
        let mut remaining: Vec<usize> = (0..points.len()).collect();
        let mut layers = Vec::new();
        while !remaining.is_empty() {
            let layer: Vec<usize> = remaining
                .iter()
                .filter(|&&i| {
                    !remaining
                        .iter()
                        .any(|&j| j != i && dominates(&points[j], &points[i]))
                })
                .copied()
                .collect();
            remaining.retain(|i| !layer.contains(i));
            layers.push(layer);
        }
        layers
    }

    fn pts(raw: &[&[f64]]) -> Vec<Vec<f64>> {
        raw.iter().map(|r| r.to_vec()).collect()
    }

    #[test]
    fn dominated_point_lands_in_second_layer() {
        let points = pts(&[&[1.0, 1.0], &[2.0, 2.0]]);
        assert_eq!(nondominated_sort(&points), vec![vec![0], vec![1]]);
    }

    #[test]
    fn mutually_nondominated_points_share_one_layer() {
        let points = pts(&[&[1.0, 3.0], &[3.0, 1.0], &[2.0, 2.0]]);
        assert_eq!(nondominated_sort(&points), vec![vec![0, 1, 2]]);
    }

    #[test]
    fn weak_dominance_requires_a_strict_improvement() {
        assert!(!dominates(&[1.0, 2.0], &[1.0, 2.0]));
        assert!(dominates(&[1.0, 2.0], &[1.0, 3.0]));
        assert!(!dominates(&[1.0, 3.0], &[2.0, 2.0]));
    }

    #[test]
    fn sort_matches_brute_force_oracle_on_random_3d_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let points: Vec<Vec<f64>> = (0..200)
                .map(|_| {
                    vec![
                        rng.gen_range(0.0..10.0f64).floor(),
                        rng.gen_range(0.0..1.0),
                        rng.gen_range(0.0..5.0f64).floor(),
                    ]
                })
                .collect();
            assert_eq!(nondominated_sort(&points), layers_oracle(&points));
        }
    }

    #[test]
    fn tournament_returns_single_dominant_winner() {
        // Index 0 dominates everything; sample the whole population.
        let mut objectives = vec![vec![0.0, 0.0, 0.0]];
        for i in 1..30 {
            objectives.push(vec![i as f64, 0.5, 1.0]);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let winners = pareto_tournament(&objectives, &mut rng, objectives.len());
        assert_eq!(winners, vec![0]);
    }

    #[test]
    fn tournament_with_mutually_nondominated_sample_returns_everyone() {
        let objectives: Vec<Vec<f64>> = (0..30)
            .map(|i| vec![i as f64, 1.0 - i as f64 / 30.0, 0.0])
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let winners = pareto_tournament(&objectives, &mut rng, 30);
        assert_eq!(winners.len(), 30);
    }

    #[test]
    fn tournament_winners_equal_brute_force_nondominated_subset() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let objectives: Vec<Vec<f64>> = (0..100)
            .map(|_| {
                vec![
                    rng.gen_range(1.0..50.0f64).floor(),
                    rng.gen_range(0.0..1.0),
                    rng.gen_range(0.0..10.0f64).floor(),
                ]
            })
            .collect();
        for _ in 0..50 {
            let mut probe = rng.clone();
            let winners = pareto_tournament(&objectives, &mut rng, 30);
            let entrants: Vec<usize> =
                rand::seq::index::sample(&mut probe, objectives.len(), 30)
                    .into_iter()
                    .collect();
            let oracle: Vec<usize> = entrants
                .iter()
                .filter(|&&i| {
                    !entrants
                        .iter()
                        .any(|&j| j != i && dominates(&objectives[j], &objectives[i]))
                })
                .copied()
                .collect();
            assert_eq!(winners, oracle);
        }
    }

    #[test]
    fn layer_selection_truncates_by_error_then_complexity_then_age() {
        // Layer 0: two points; layer 1: three mutually nondominated points,
        // capacity forces truncation to two of the three. The 0.5-error tie
        // falls to the lower complexity.
        let objectives = pts(&[
            &[1.0, 0.1, 0.0],  // layer 0
            &[2.0, 0.05, 0.0], // layer 0
            &[3.0, 0.5, 0.0],  // layer 1, error 0.5, complexity 3
            &[2.0, 0.5, 1.0],  // layer 1, error 0.5, complexity 2 (preferred)
            &[4.0, 0.2, 1.0],  // layer 1, error 0.2 (best of layer 1)
        ]);
        assert_eq!(
            nondominated_sort(&objectives),
            vec![vec![0, 1], vec![2, 3, 4]]
        );
        let picked = select_by_layers(&objectives, 4);
        assert_eq!(picked, vec![0, 1, 4, 3]);
    }

    #[test]
    fn layer_selection_caps_exactly_at_capacity() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let objectives: Vec<Vec<f64>> = (0..120)
            .map(|_| {
                vec![
                    rng.gen_range(1.0..40.0f64).floor(),
                    rng.gen_range(0.0..1.0),
                    rng.gen_range(0.0..4.0f64).floor(),
                ]
            })
            .collect();
        for cap in [1usize, 7, 50, 119, 120] {
            let picked = select_by_layers(&objectives, cap);
            assert_eq!(picked.len(), cap);
            let mut unique = picked.clone();
            unique.sort_unstable();
            unique.dedup();
            assert_eq!(unique.len(), cap, "selection must not repeat indices");
        }
    }
}
