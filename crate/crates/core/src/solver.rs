//! Verdicts: guards, the evader-win band, the formation chain, and the
//! playbook certificate that backs every pursuer win.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formation::{enumerate_block_sets, find_formation, formation_variants, Formation, LaneSlot};
use crate::game::{BlockSet, Game, GameConfig};
use crate::geometry::ConvexPolygon;
use crate::playbook::{Playbook, PlaybookParams, PlaybookSummary};
use crate::thresholds::{bisect, corollary_evader_threshold, ThresholdError};
use crate::transition::{transition_budget, transition_feasible, TransitionPlan};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("guard strategy needs m >= n - 1 (n = {n}, m = {m})")]
    TooFewGuards { n: usize, m: usize },
    #[error(transparent)]
    Threshold(#[from] ThresholdError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    Guards,
    Formations,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub formation: Formation,
    pub transition: Option<TransitionPlan>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Strategy {
    pub kind: StrategyKind,
    pub stages: Vec<Stage>,
}

impl Strategy {
    pub fn initial_formation(&self) -> &Formation {
        &self.stages[0].formation
    }

    /// Block-set sizes shrink by one per stage and every leg fits its budget.
    pub fn is_consistent(&self) -> bool {
        let chained = self.stages.windows(2).all(|w| {
            let (a, b) = (&w[0].formation.block_set, &w[1].formation.block_set);
            self.kind == StrategyKind::Guards || (b.len() + 1 == a.len() && b.is_subset(a))
        });
        let legs = self
            .stages
            .iter()
            .filter_map(|s| s.transition.as_ref())
            .all(|t| t.max_leg <= t.budget);
        chained && legs
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    PursuerWin,
    EvaderWin,
    Undetermined,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UndeterminedReason {
    /// No formation chain reaches a single anchor.
    ChainBroken,
    /// A chain exists but the playbook found no winning entry.
    Uncertified,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Certificate {
    Strategy {
        strategy: Strategy,
        playbook: Option<PlaybookSummary>,
    },
    Threshold {
        n: usize,
        m: usize,
        k: f64,
        threshold: f64,
    },
    Failure {
        reason: UndeterminedReason,
        /// Block-set size at which the chain could not continue.
        stage_size: Option<usize>,
        strategy: Option<Strategy>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub outcome: Decision,
    pub certificate: Certificate,
}

impl Verdict {
    pub fn strategy(&self) -> Option<&Strategy> {
        match &self.certificate {
            Certificate::Strategy { strategy, .. } => Some(strategy),
            Certificate::Failure { strategy, .. } => strategy.as_ref(),
            Certificate::Threshold { .. } => None,
        }
    }
}

/// Verdict plus the playbook that certifies a formation-based win.
#[derive(Clone, Debug)]
pub struct Solution {
    pub verdict: Verdict,
    pub playbook: Option<Playbook>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SolverParams {
    pub playbook: PlaybookParams,
}

/// Guards on every anchor but the last, which becomes the trap.
pub fn guard_strategy(game: &Game) -> Result<Strategy, SolverError> {
    let (n, m) = (game.n(), game.m());
    if m + 1 < n {
        return Err(SolverError::TooFewGuards { n, m });
    }
    let trap = n - 1;
    let guard = |s: usize| ConvexPolygon::point(game.anchor(s.min(n - 1)));
    let slots: Vec<ConvexPolygon> = (0..m).map(guard).collect();
    let lane_assignment = (0..n - 1).map(|j| LaneSlot { from: trap, to: j, slot: j }).collect();
    let bs = BlockSet::new(vec![trap]);
    let hold = Formation { block_set: bs.clone(), slots, lane_assignment };
    let close = Formation {
        block_set: bs.clone(),
        slots: vec![ConvexPolygon::point(game.anchor(trap)); m],
        lane_assignment: (0..n - 1).map(|j| LaneSlot { from: trap, to: j, slot: 0 }).collect(),
    };
    let legs: Vec<f64> = (0..m).map(|s| game.anchor(s.min(n - 1)).dist(game.anchor(trap))).collect();
    let max_leg = legs.iter().copied().fold(0.0, f64::max);
    // the trapped evader has no unblocked move, so the closing leg is unhurried
    let plan = TransitionPlan {
        from: bs.clone(),
        to: bs,
        assignment: (0..m).collect(),
        legs,
        max_leg,
        budget: max_leg,
    };
    Ok(Strategy {
        kind: StrategyKind::Guards,
        stages: vec![
            Stage { formation: hold, transition: Some(plan) },
            Stage { formation: close, transition: None },
        ],
    })
}

struct ChainSearch<'a> {
    game: &'a Game,
    variants: usize,
    formations: HashMap<BlockSet, Vec<Formation>>,
    dead: HashMap<(BlockSet, usize), ()>,
    deepest: usize,
}

impl ChainSearch<'_> {
    fn formations(&mut self, bs: &BlockSet) -> Vec<Formation> {
        let (game, limit) = (self.game, self.variants);
        self.formations
            .entry(bs.clone())
            .or_insert_with(|| match find_formation(game, bs).formation() {
                None => Vec::new(),
                Some(first) => {
                    let mut out = vec![first];
                    for f in formation_variants(game, bs, limit) {
                        if out.len() >= limit {
                            break;
                        }
                        if !out.contains(&f) {
                            out.push(f);
                        }
                    }
                    out
                }
            })
            .clone()
    }

    fn from(&mut self, f: Formation, variant: usize) -> Option<Vec<Stage>> {
        let bs = f.block_set.clone();
        self.deepest = self.deepest.min(bs.len());
        if bs.len() == 1 {
            return Some(vec![Stage { formation: f, transition: None }]);
        }
        if self.dead.contains_key(&(bs.clone(), variant)) {
            return None;
        }
        let budget = transition_budget(self.game, &bs);
        let subs: Vec<BlockSet> = enumerate_block_sets(self.game.config(), bs.len() - 1)
            .into_iter()
            .filter(|s| s.is_subset(&bs))
            .collect();
        for sub in subs {
            for (vi, next) in self.formations(&sub).into_iter().enumerate() {
                let Ok(Some(plan)) = transition_feasible(&f, &next, budget) else { continue };
                if let Some(rest) = self.from(next, vi) {
                    let mut out = vec![Stage { formation: f, transition: Some(plan) }];
                    out.extend(rest);
                    return Some(out);
                }
            }
        }
        self.dead.insert((bs, variant), ());
        None
    }
}

/// Formation chain from block sets of size `ceil(n/2)` down to one anchor.
/// Each block set offers up to `variants` formations, the greedy one first.
/// On failure returns the smallest block-set size the search reached.
pub fn formation_chain(game: &Game, variants: usize) -> Result<Strategy, usize> {
    let n = game.n();
    let top = n.div_ceil(2).min(n - 1).max(1);
    let mut search = ChainSearch {
        game,
        variants: variants.max(1),
        formations: HashMap::new(),
        dead: HashMap::new(),
        deepest: top,
    };
    for bs in enumerate_block_sets(game.config(), top) {
        for (vi, f) in search.formations(&bs).into_iter().enumerate() {
            if let Some(stages) = search.from(f, vi) {
                return Ok(Strategy { kind: StrategyKind::Formations, stages });
            }
        }
    }
    Err(search.deepest)
}

pub fn decide(game: &Game) -> Verdict {
    solve(game, &SolverParams::default()).verdict
}

pub fn solve(game: &Game, params: &SolverParams) -> Solution {
    let (n, m, k) = (game.n(), game.m(), game.k());
    if m + 1 >= n {
        let strategy = guard_strategy(game).expect("m >= n - 1");
        return Solution {
            verdict: Verdict {
                outcome: Decision::PursuerWin,
                certificate: Certificate::Strategy { strategy, playbook: None },
            },
            playbook: None,
        };
    }
    if game.config().is_regular() {
        let threshold = corollary_evader_threshold(n, m);
        if k < threshold {
            return Solution {
                verdict: Verdict {
                    outcome: Decision::EvaderWin,
                    certificate: Certificate::Threshold { n, m, k, threshold },
                },
                playbook: None,
            };
        }
    }
    let strategy = match formation_chain(game, params.playbook.variants) {
        Ok(s) => s,
        Err(size) => {
            return Solution {
                verdict: Verdict {
                    outcome: Decision::Undetermined,
                    certificate: Certificate::Failure {
                        reason: UndeterminedReason::ChainBroken,
                        stage_size: Some(size),
                        strategy: None,
                    },
                },
                playbook: None,
            }
        }
    };
    let playbook = Playbook::build(game, &params.playbook);
    if playbook.proven() {
        let summary = playbook.summary(game);
        Solution {
            verdict: Verdict {
                outcome: Decision::PursuerWin,
                certificate: Certificate::Strategy { strategy, playbook: Some(summary) },
            },
            playbook: Some(playbook),
        }
    } else {
        Solution {
            verdict: Verdict {
                outcome: Decision::Undetermined,
                certificate: Certificate::Failure {
                    reason: UndeterminedReason::Uncertified,
                    stage_size: None,
                    strategy: Some(strategy),
                },
            },
            playbook: None,
        }
    }
}

/// Bisection on `k` for the solver's own pursuer-win threshold.
pub fn empirical_threshold(
    template: &GameConfig,
    k_lo: f64,
    k_hi: f64,
    tol: f64,
) -> Result<f64, SolverError> {
    let wins = |k: f64| {
        let g = Game::new(template.with_k(k)).expect("template is valid");
        decide(&g).outcome == Decision::PursuerWin
    };
    if wins(k_lo) || !wins(k_hi) {
        return Err(ThresholdError::BadBracket { lo: k_lo, hi: k_hi }.into());
    }
    Ok(bisect(k_lo, k_hi, tol, wins))
}
