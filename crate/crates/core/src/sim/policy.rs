use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Action, EvaderPolicy, PursuerPolicy, SimError, View};
use crate::game::{interception_time, Game};
use crate::geometry::{closest_on_segment, Point};
use crate::playbook::{Playbook, PlaybookParams};

fn lane_threatened(game: &Game, pursuers: &[Point], from: usize, to: usize) -> bool {
    let lane = game.lane(from, to);
    pursuers.iter().any(|&p| interception_time(p, lane, game.config()).is_some())
}

/// Always departs along a lane no pursuer can intercept, preferring the lane
/// whose blocking region is farthest from every pursuer. Never waits.
#[derive(Clone, Debug, Default)]
pub struct GreedyEvader;

impl GreedyEvader {
    pub fn pick(view: &View, rng: &mut ChaCha8Rng) -> usize {
        let (g, s) = (view.game, view.at);
        let mut best: Vec<usize> = Vec::new();
        let mut best_score = f64::NEG_INFINITY;
        for j in (0..g.n()).filter(|&j| j != s) {
            if lane_threatened(g, view.pursuers, s, j) {
                continue;
            }
            let region = g.region(s, j);
            let score = view.pursuers.iter().map(|&p| region.distance_to(p)).fold(f64::INFINITY, f64::min);
            if score > best_score + 1e-12 {
                best_score = score;
                best.clear();
                best.push(j);
            } else if (score - best_score).abs() <= 1e-12 {
                best.push(j);
            }
        }
        if best.is_empty() {
            // nothing is safe; any lane will do
            let mut j = rng.gen_range(0..g.n() - 1);
            if j >= s {
                j += 1;
            }
            return j;
        }
        best[rng.gen_range(0..best.len())]
    }
}

impl EvaderPolicy for GreedyEvader {
    fn choose(&mut self, view: &View, rng: &mut ChaCha8Rng) -> Action {
        Action::Move(GreedyEvader::pick(view, rng))
    }
}

/// Uniform over the other anchors, waiting with probability `wait_prob` when
/// the game allows it.
#[derive(Clone, Debug, Default)]
pub struct RandomEvader {
    pub wait_prob: f64,
}

impl EvaderPolicy for RandomEvader {
    fn choose(&mut self, view: &View, rng: &mut ChaCha8Rng) -> Action {
        if view.game.config().evader_may_wait && self.wait_prob > 0.0 && rng.gen_bool(self.wait_prob.min(1.0)) {
            return Action::Wait;
        }
        let mut j = rng.gen_range(0..view.game.n() - 1);
        if j >= view.at {
            j += 1;
        }
        Action::Move(j)
    }
}

/// Plays `script` (cycling if asked), substituting a greedy move whenever the
/// scripted action is not legal at the current anchor.
#[derive(Clone, Debug)]
pub struct ScriptedEvader {
    script: Vec<Action>,
    cycle: bool,
    next: usize,
}

impl ScriptedEvader {
    pub fn new(script: Vec<Action>, cycle: bool) -> Self {
        ScriptedEvader { script, cycle, next: 0 }
    }
}

impl EvaderPolicy for ScriptedEvader {
    fn choose(&mut self, view: &View, rng: &mut ChaCha8Rng) -> Action {
        if self.cycle && !self.script.is_empty() && self.next >= self.script.len() {
            self.next = 0;
        }
        let Some(&a) = self.script.get(self.next) else {
            return Action::Move(GreedyEvader::pick(view, rng));
        };
        self.next += 1;
        let legal = match a {
            Action::Move(j) => j < view.game.n() && j != view.at,
            Action::Wait => view.game.config().evader_may_wait,
        };
        if legal {
            a
        } else {
            Action::Move(GreedyEvader::pick(view, rng))
        }
    }
}

/// Plays a [`Playbook`]: starts at its entry configuration (the centroid when
/// there is none) and answers each
/// commitment with the reachable configuration of lowest rank at the target.
/// During waits it creeps toward a configuration that blocks the current
/// anchor, accepting only steps that keep a finite online rank.
#[derive(Clone, Debug)]
pub struct FormationPolicy {
    playbook: Arc<Playbook>,
}

impl FormationPolicy {
    pub fn new(playbook: Arc<Playbook>) -> Self {
        FormationPolicy { playbook }
    }

    fn place(&self, q: &[Point], c: usize, assign: &[usize]) -> Vec<Point> {
        let cfg = &self.playbook.configs()[c];
        (0..q.len()).map(|i| cfg[assign[i]]).collect()
    }
}

impl PursuerPolicy for FormationPolicy {
    fn initial(&mut self, game: &Game, _: &mut ChaCha8Rng) -> Vec<Point> {
        match self.playbook.entry() {
            Some(e) => e.to_vec(),
            None => vec![game.config().centroid(); game.m()],
        }
    }

    fn on_commit(&mut self, view: &View, to: usize, _: &mut ChaCha8Rng) -> Vec<Point> {
        let q = view.pursuers;
        if let Some((c, a)) = self.playbook.response(view.game, q, view.at, to) {
            return self.place(q, c, &a);
        }
        match self.playbook.trap(q, to) {
            Some((c, a)) => self.place(q, c, &a),
            None => q.to_vec(),
        }
    }

    fn on_wait(&mut self, view: &View, dwell: f64, _: &mut ChaCha8Rng) -> Vec<Point> {
        let (q, s) = (view.pursuers, view.at);
        let Some((c, a)) = self.playbook.trap(q, s) else { return q.to_vec() };
        let step = view.game.config().v_p * dwell;
        let next: Vec<Point> = self.place(q, c, &a).iter().zip(q).map(|(&t, &p)| p.toward(t, step)).collect();
        let safe = self.playbook.online_rank(view.game, &next, s).is_some()
            || self.playbook.online_rank(view.game, q, s).is_none();
        if safe {
            next
        } else {
            q.to_vec()
        }
    }
}

/// Guards anchors `0..n-1`, extra pursuers head for the last anchor.
#[derive(Clone, Debug, Default)]
pub struct GuardPolicy;

impl GuardPolicy {
    fn posts(game: &Game) -> Vec<Point> {
        let n = game.n();
        (0..game.m()).map(|i| game.anchor(i.min(n - 1))).collect()
    }
}

impl PursuerPolicy for GuardPolicy {
    fn initial(&mut self, game: &Game, _: &mut ChaCha8Rng) -> Vec<Point> {
        vec![game.config().centroid(); game.m()]
    }

    fn on_commit(&mut self, view: &View, _: usize, _: &mut ChaCha8Rng) -> Vec<Point> {
        GuardPolicy::posts(view.game)
    }

    fn on_wait(&mut self, view: &View, _: f64, _: &mut ChaCha8Rng) -> Vec<Point> {
        GuardPolicy::posts(view.game)
    }
}

/// Radial tracking around the anchor centroid: on each commitment move to the
/// point of the segment centroid -> target that lies closest to the target and
/// is reachable in time, else toward that segment; on waits advance on the
/// evader's anchor.
#[derive(Clone, Debug, Default)]
pub struct LionPolicy;

impl LionPolicy {
    fn track(o: Point, x: Point, p: Point, budget: f64) -> Point {
        // largest t with |o + t (x - o) - p| <= budget
        let d = x - o;
        let w = o - p;
        let a = d.norm2();
        let b = 2.0 * w.dot(d);
        let c = w.norm2() - budget * budget;
        let disc = b * b - 4.0 * a * c;
        if a > 0.0 && disc >= 0.0 {
            let hi = (-b + disc.sqrt()) / (2.0 * a);
            let lo = (-b - disc.sqrt()) / (2.0 * a);
            if hi >= 0.0 && lo <= 1.0 {
                return o + d * hi.min(1.0);
            }
        }
        closest_on_segment(p, o, x)
    }
}

impl PursuerPolicy for LionPolicy {
    fn initial(&mut self, game: &Game, _: &mut ChaCha8Rng) -> Vec<Point> {
        vec![game.config().centroid(); game.m()]
    }

    fn on_commit(&mut self, view: &View, to: usize, _: &mut ChaCha8Rng) -> Vec<Point> {
        let g = view.game;
        let o = g.config().centroid();
        let x = g.anchor(to);
        let budget = g.lane_budget(view.at, to);
        view.pursuers.iter().map(|&p| LionPolicy::track(o, x, p, budget)).collect()
    }

    fn on_wait(&mut self, view: &View, _: f64, _: &mut ChaCha8Rng) -> Vec<Point> {
        vec![view.game.anchor(view.at); view.pursuers.len()]
    }
}

/// Picks fresh uniform targets in the anchors' bounding box every turn.
#[derive(Clone, Debug, Default)]
pub struct RandomPursuer;

fn random_points(game: &Game, rng: &mut ChaCha8Rng) -> Vec<Point> {
    let a = &game.config().anchors;
    let (mut lo, mut hi) = (a[0], a[0]);
    for p in a {
        lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    (0..game.m())
        .map(|_| Point::new(rng.gen_range(lo.x..=hi.x), rng.gen_range(lo.y..=hi.y)))
        .collect()
}

impl PursuerPolicy for RandomPursuer {
    fn initial(&mut self, game: &Game, rng: &mut ChaCha8Rng) -> Vec<Point> {
        random_points(game, rng)
    }

    fn on_commit(&mut self, view: &View, _: usize, rng: &mut ChaCha8Rng) -> Vec<Point> {
        random_points(view.game, rng)
    }

    fn on_wait(&mut self, view: &View, _: f64, rng: &mut ChaCha8Rng) -> Vec<Point> {
        random_points(view.game, rng)
    }
}

/// Recipe for a pursuer policy, cheap to clone across episodes.
#[derive(Clone, Debug)]
pub enum PursuerSpec {
    Formation(Arc<Playbook>),
    Guards,
    Lion,
    Random,
}

impl PursuerSpec {
    /// Formation policy with a freshly built playbook (proven or not).
    pub fn formation(game: &Game, params: &PlaybookParams) -> Self {
        PursuerSpec::Formation(Arc::new(Playbook::build(game, params)))
    }

    pub fn build(&self, game: &Game) -> Result<Box<dyn PursuerPolicy>, SimError> {
        Ok(match self {
            PursuerSpec::Formation(pb) => Box::new(FormationPolicy::new(pb.clone())),
            PursuerSpec::Guards => {
                if game.m() + 1 < game.n() {
                    return Err(SimError::PolicyFault(format!(
                        "guard policy needs m >= n - 1 (n = {}, m = {})",
                        game.n(),
                        game.m()
                    )));
                }
                Box::new(GuardPolicy)
            }
            PursuerSpec::Lion => Box::new(LionPolicy),
            PursuerSpec::Random => Box::new(RandomPursuer),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum EvaderSpec {
    Greedy,
    Random { wait_prob: f64 },
    Script { actions: Vec<Action>, cycle: bool },
}

impl EvaderSpec {
    pub fn build(&self) -> Box<dyn EvaderPolicy> {
        match self {
            EvaderSpec::Greedy => Box::new(GreedyEvader),
            EvaderSpec::Random { wait_prob } => Box::new(RandomEvader { wait_prob: *wait_prob }),
            EvaderSpec::Script { actions, cycle } => Box::new(ScriptedEvader::new(actions.clone(), *cycle)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::GameConfig;
    use crate::par::Execution;
    use crate::sim::{audit_log, run_batch, run_episode, EpisodeOptions, Winner};
    use rand::SeedableRng;

    fn regular(n: usize, m: usize, k: f64) -> Arc<Game> {
        Arc::new(Game::new(GameConfig::regular(n, m, k)).unwrap())
    }

    #[test]
    fn lion_track_reaches_target_when_close() {
        let o = Point::ORIGIN;
        let x = Point::new(1.0, 0.0);
        assert_eq!(LionPolicy::track(o, x, Point::new(0.9, 0.0), 0.5), x);
        let p = LionPolicy::track(o, x, Point::new(0.0, 0.0), 0.3);
        assert!((p.x - 0.3).abs() < 1e-12 && p.y.abs() < 1e-12);
        // segment out of reach: head for the nearest point of it
        let p = LionPolicy::track(o, x, Point::new(0.5, 2.0), 0.1);
        assert!((p.x - 0.5).abs() < 1e-12 && p.y.abs() < 1e-12);
    }

    #[test]
    fn pentagon_formation_beats_greedy() {
        let g = regular(5, 2, 0.32);
        let spec = PursuerSpec::formation(&g, &PlaybookParams::default());
        let horizon = 100.0 * g.max_lane_time();
        let out = run_batch(&g, &spec, &EvaderSpec::Greedy, 0..20, horizon, None, Execution::default()).unwrap();
        assert!(out.iter().all(|o| o.pursuers_win()));
    }

    #[test]
    fn pentagon_025_greedy_survives_lion_and_random() {
        let g = regular(5, 2, 0.25);
        for spec in [PursuerSpec::Lion, PursuerSpec::Random] {
            let out = run_batch(&g, &spec, &EvaderSpec::Greedy, 0..10, 100.0, None, Execution::default()).unwrap();
            assert!(out.iter().all(|o| o.winner == Winner::Evader), "{spec:?}");
        }
    }

    #[test]
    fn guards_win_quickly() {
        let g = regular(5, 4, 0.3);
        let bound = 2.0 * (g.config().diameter() / g.config().v_p + g.max_lane_time());
        for ev in [EvaderSpec::Greedy, EvaderSpec::Random { wait_prob: 0.3 }] {
            let out = run_batch(&g, &PursuerSpec::Guards, &ev, 0..20, 1000.0, None, Execution::Sequential).unwrap();
            for o in out {
                assert!(o.pursuers_win());
                assert!(o.capture_time.unwrap() <= bound);
            }
        }
        assert!(PursuerSpec::Guards.build(&regular(5, 2, 0.3)).is_err());
    }

    #[test]
    fn lion_square() {
        let g = regular(4, 1, 0.72);
        let mut e = GreedyEvader;
        let r = run_episode(g.clone(), Box::new(LionPolicy), &mut e, EpisodeOptions { horizon: 200.0, seed: 3, start: None })
            .unwrap();
        assert!(r.outcome.pursuers_win());
        assert!(audit_log(&g, &r.events).is_empty());
    }

    #[test]
    fn replay_is_deterministic() {
        let g = regular(5, 2, 0.32);
        let run = |seed| {
            let mut e = RandomEvader { wait_prob: 0.2 };
            run_episode(g.clone(), Box::new(RandomPursuer), &mut e, EpisodeOptions { horizon: 30.0, seed, start: None })
                .unwrap()
                .events
        };
        assert_eq!(run(5), run(5));
        assert_ne!(run(5), run(6));
    }

    #[test]
    fn scripted_falls_back_on_illegal() {
        let g = regular(5, 2, 0.32);
        let mut ev = ScriptedEvader::new(vec![Action::Move(2), Action::Move(3)], false);
        let q = [Point::new(9.0, 9.0), Point::new(9.0, 9.0)];
        let view = View { game: &g, clock: 0.0, at: 2, pursuers: &q };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(ev.choose(&view, &mut rng), Action::Move(j) if j != 2));
        assert_eq!(ev.choose(&view, &mut rng), Action::Move(3));
    }
}
