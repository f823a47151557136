//! Formation-to-formation transitions under the evader's shortest-move budget.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formation::Formation;
use crate::game::{BlockSet, Game};

/// Bijection search by brute force is used up to this many pursuers.
pub const EXHAUSTIVE_SLOT_LIMIT: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransitionError {
    #[error("slot count mismatch: {0} vs {1}")]
    SlotMismatch(usize, usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionPlan {
    pub from: BlockSet,
    pub to: BlockSet,
    /// `assignment[a]` is the slot of the target formation taken by slot `a`.
    pub assignment: Vec<usize>,
    pub legs: Vec<f64>,
    pub max_leg: f64,
    pub budget: f64,
}

/// Pursuer travel allowance while the evader makes its shortest move inside `bs`.
pub fn transition_budget(game: &Game, bs: &BlockSet) -> f64 {
    let c = game.config();
    let m = bs.members();
    let shortest = if m.len() == 1 {
        game.min_outgoing(m[0])
    } else {
        let mut best = f64::INFINITY;
        for &a in m {
            for &b in m {
                if a != b {
                    best = best.min(game.lane(a, b).length);
                }
            }
        }
        best
    };
    let moves = if c.multi_move_budget && m.len() >= 2 { 2.0 } else { 1.0 };
    c.v_p * (moves * shortest / c.v_e - c.observation_delay).max(0.0)
}

/// Pairwise slot min-distances `d[a][b]`.
pub fn distance_matrix(from: &Formation, to: &Formation) -> Vec<Vec<f64>> {
    from.slots
        .iter()
        .map(|a| to.slots.iter().map(|b| a.min_distance(b).expect("slots are non-empty")).collect())
        .collect()
}

/// Greedy matching: repeatedly commit the unassigned source with the
/// fewest admissible targets to its nearest admissible target.
pub fn greedy_assignment(d: &[Vec<f64>], budget: f64) -> Option<Vec<usize>> {
    let m = d.len();
    let mut assign = vec![usize::MAX; m];
    let mut taken = vec![false; m];
    for _ in 0..m {
        let mut pick: Option<(usize, usize)> = None;
        for a in (0..m).filter(|&a| assign[a] == usize::MAX) {
            let options = (0..m).filter(|&b| !taken[b] && d[a][b] <= budget).count();
            if pick.map_or(true, |(_, c)| options < c) {
                pick = Some((a, options));
            }
        }
        let (a, options) = pick?;
        if options == 0 {
            return None;
        }
        let b = (0..m)
            .filter(|&b| !taken[b] && d[a][b] <= budget)
            .min_by(|&x, &y| d[a][x].total_cmp(&d[a][y]).then(x.cmp(&y)))?;
        assign[a] = b;
        taken[b] = true;
    }
    Some(assign)
}

/// Complete search over bijections with every leg within budget; among them
/// the one with the smallest longest leg.
pub fn exhaustive_assignment(d: &[Vec<f64>], budget: f64) -> Option<Vec<usize>> {
    let m = d.len();
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut cur = Vec::with_capacity(m);
    let mut used = vec![false; m];
    fn rec(
        d: &[Vec<f64>],
        budget: f64,
        worst: f64,
        cur: &mut Vec<usize>,
        used: &mut [bool],
        best: &mut Option<(f64, Vec<usize>)>,
    ) {
        let a = cur.len();
        if a == d.len() {
            if best.as_ref().map_or(true, |(w, _)| worst < *w) {
                *best = Some((worst, cur.clone()));
            }
            return;
        }
        for b in 0..d.len() {
            let w = worst.max(d[a][b]);
            if used[b] || d[a][b] > budget || best.as_ref().is_some_and(|(bw, _)| w >= *bw) {
                continue;
            }
            used[b] = true;
            cur.push(b);
            rec(d, budget, w, cur, used, best);
            cur.pop();
            used[b] = false;
        }
    }
    rec(d, budget, 0.0, &mut cur, &mut used, &mut best);
    best.map(|(_, a)| a)
}

fn plan(from: &Formation, to: &Formation, d: &[Vec<f64>], assignment: Vec<usize>, budget: f64) -> TransitionPlan {
    let legs: Vec<f64> = assignment.iter().enumerate().map(|(a, &b)| d[a][b]).collect();
    let max_leg = legs.iter().copied().fold(0.0, f64::max);
    TransitionPlan {
        from: from.block_set.clone(),
        to: to.block_set.clone(),
        assignment,
        legs,
        max_leg,
        budget,
    }
}

/// Greedy first, exhaustive fallback for up to [`EXHAUSTIVE_SLOT_LIMIT`] slots.
pub fn transition_feasible(
    from: &Formation,
    to: &Formation,
    budget: f64,
) -> Result<Option<TransitionPlan>, TransitionError> {
    if from.m() != to.m() {
        return Err(TransitionError::SlotMismatch(from.m(), to.m()));
    }
    let d = distance_matrix(from, to);
    if let Some(a) = greedy_assignment(&d, budget) {
        return Ok(Some(plan(from, to, &d, a, budget)));
    }
    if from.m() <= EXHAUSTIVE_SLOT_LIMIT {
        if let Some(a) = exhaustive_assignment(&d, budget) {
            return Ok(Some(plan(from, to, &d, a, budget)));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formation::find_formation;
    use crate::game::GameConfig;
    use approx::assert_abs_diff_eq;

    #[test]
    fn pentagon_budgets() {
        let g = Game::new(GameConfig::regular(5, 2, 0.32)).unwrap();
        let b = transition_budget(&g, &BlockSet::new(vec![2, 3]));
        assert_abs_diff_eq!(b, 0.32 * 2.0 * (std::f64::consts::PI / 5.0).sin(), epsilon = 1e-12);
        assert_abs_diff_eq!(b, 0.37618, epsilon = 1e-5);
        let b2 = transition_budget(&g, &BlockSet::new(vec![2, 4]));
        assert_abs_diff_eq!(b2, 0.60868, epsilon = 1e-5);
        let fast = Game::new(GameConfig::regular(5, 2, 1.0)).unwrap();
        assert_abs_diff_eq!(
            transition_budget(&fast, &BlockSet::new(vec![2, 3])),
            fast.lane(2, 3).length,
            epsilon = 1e-12
        );
        let single = transition_budget(&g, &BlockSet::new(vec![0]));
        assert_abs_diff_eq!(single, 0.32 * g.lane(0, 1).length, epsilon = 1e-12);
    }

    #[test]
    fn identity_transition() {
        let g = Game::new(GameConfig::regular(5, 2, 0.32)).unwrap();
        let f = find_formation(&g, &BlockSet::new(vec![1, 2])).formation().unwrap();
        let p = transition_feasible(&f, &f, 0.0).unwrap().unwrap();
        assert_eq!(p.max_leg, 0.0);
    }

    #[test]
    fn crossing_assignment() {
        let d = vec![vec![0.1, 0.5], vec![0.5, 0.1]];
        assert_eq!(greedy_assignment(&d, 0.2), Some(vec![0, 1]));
        let d = vec![vec![0.5, 0.1], vec![0.1, 0.5]];
        assert_eq!(greedy_assignment(&d, 0.2), Some(vec![1, 0]));
        assert_eq!(exhaustive_assignment(&d, 0.2), Some(vec![1, 0]));
        assert_eq!(greedy_assignment(&d, 0.05), None);
        assert_eq!(exhaustive_assignment(&d, 0.05), None);
    }

    #[test]
    fn greedy_can_miss_what_exhaustive_finds() {
        // source 0 has two options and grabs the nearest, which source 1 needs
        let d = vec![vec![0.1, 0.2, 9.0], vec![0.1, 9.0, 9.0], vec![9.0, 9.0, 0.1]];
        let e = exhaustive_assignment(&d, 0.3).unwrap();
        assert_eq!(e, vec![1, 0, 2]);
        // most-constrained-first still gets this one right
        assert_eq!(greedy_assignment(&d, 0.3), Some(vec![1, 0, 2]));
    }

    #[test]
    fn mismatch_is_an_error() {
        let g2 = Game::new(GameConfig::regular(5, 2, 0.32)).unwrap();
        let g3 = Game::new(GameConfig::regular(5, 3, 0.32)).unwrap();
        let a = find_formation(&g2, &BlockSet::new(vec![0])).formation().unwrap();
        let b = find_formation(&g3, &BlockSet::new(vec![0])).formation().unwrap();
        assert_eq!(transition_feasible(&a, &b, 1.0), Err(TransitionError::SlotMismatch(2, 3)));
    }
}
