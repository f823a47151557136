//! Continuous-time episode engine with turn-committed evader moves.
//!
//! Each turn the evader either commits to a lane or waits. Pursuers learn the
//! commitment after the observation delay and then move in straight legs at
//! full speed. Interceptions are solved analytically per leg. The event log is
//! JSON-lines friendly (`{"event": "...", ...}`), see [`Event`].

mod policy;

use std::ops::Range;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{earliest_nonpositive, interception_time, Game};
use crate::geometry::{Point, EPS};
use crate::par::Execution;

pub use policy::*;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("illegal move {from} -> {to}")]
    IllegalMove { from: usize, to: usize },
    #[error("waiting is disabled for this game")]
    WaitForbidden,
    #[error("the evader is not at an anchor")]
    NotAtAnchor,
    #[error("policy fault: {0}")]
    PolicyFault(String),
    #[error("episode already finished")]
    Finished,
    #[error("horizon must be positive, got {0}")]
    BadHorizon(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "target")]
pub enum Action {
    Move(usize),
    Wait,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum EvaderLocation {
    AtAnchor { index: usize, waiting: bool },
    InTransit { from: usize, to: usize, progress: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameState {
    pub clock: f64,
    pub evader: EvaderLocation,
    pub pursuers: Vec<Point>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Winner {
    Pursuers,
    Evader,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaptureKind {
    OnLane,
    AllLanesBlocked,
    /// A pursuer reached the evader while it waited at an anchor.
    Contact,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub winner: Winner,
    pub capture_time: Option<f64>,
    pub capture_kind: Option<CaptureKind>,
}

impl Outcome {
    pub fn pursuers_win(&self) -> bool {
        self.winner == Winner::Pursuers
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    Start { t: f64, evader: usize, pursuers: Vec<Point> },
    MoveCommit { t: f64, from: usize, to: usize, arrive: f64 },
    Wait { t: f64, at: usize, dwell: f64 },
    LegStart { t: f64, pursuer: usize, from: Point, to: Point, depart: f64, arrive: f64 },
    Arrive { t: f64, at: usize },
    Interception { t: f64, pursuer: Option<usize>, point: Point, kind: CaptureKind },
    Verdict { t: f64, outcome: Outcome },
}

impl Event {
    pub fn time(&self) -> f64 {
        match *self {
            Event::Start { t, .. }
            | Event::MoveCommit { t, .. }
            | Event::Wait { t, .. }
            | Event::LegStart { t, .. }
            | Event::Arrive { t, .. }
            | Event::Interception { t, .. }
            | Event::Verdict { t, .. } => t,
        }
    }
}

pub fn events_to_jsonl(events: &[Event]) -> String {
    let mut s = String::new();
    for e in events {
        s.push_str(&serde_json::to_string(e).expect("events serialize"));
        s.push('\n');
    }
    s
}

/// What a policy sees at decision time.
#[derive(Clone, Copy, Debug)]
pub struct View<'a> {
    pub game: &'a Game,
    pub clock: f64,
    pub at: usize,
    pub pursuers: &'a [Point],
}

pub trait PursuerPolicy: Send {
    /// Starting positions, chosen before the evader's start is known.
    fn initial(&mut self, game: &Game, rng: &mut ChaCha8Rng) -> Vec<Point>;
    /// Leg targets once the evader has committed to `view.at -> to`.
    fn on_commit(&mut self, view: &View, to: usize, rng: &mut ChaCha8Rng) -> Vec<Point>;
    /// Leg targets while the evader waits for `dwell`.
    fn on_wait(&mut self, view: &View, dwell: f64, rng: &mut ChaCha8Rng) -> Vec<Point>;
}

pub trait EvaderPolicy: Send {
    fn choose(&mut self, view: &View, rng: &mut ChaCha8Rng) -> Action;
}

/// Earliest `s` in `[0, span]` with `|r0 + w s| <= eps`.
fn first_contact(r0: Point, w: Point, eps: f64, span: f64) -> Option<f64> {
    earliest_nonpositive(w.norm2(), 2.0 * r0.dot(w), r0.norm2() - eps * eps, 0.0, span.max(0.0))
}

pub struct Episode {
    game: Arc<Game>,
    pursuer: Box<dyn PursuerPolicy>,
    rng: ChaCha8Rng,
    state: GameState,
    log: Vec<Event>,
    outcome: Option<Outcome>,
}

impl Episode {
    /// `start = None` draws the evader's first anchor from the seed.
    pub fn new(
        game: Arc<Game>,
        mut pursuer: Box<dyn PursuerPolicy>,
        start: Option<usize>,
        seed: u64,
    ) -> Result<Episode, SimError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let start = match start {
            Some(s) if s < game.n() => s,
            Some(s) => return Err(SimError::IllegalMove { from: s, to: s }),
            None => rng.gen_range(0..game.n()),
        };
        let pursuers = pursuer.initial(&game, &mut rng);
        check_targets(&game, &pursuers)?;
        let state = GameState {
            clock: 0.0,
            evader: EvaderLocation::AtAnchor { index: start, waiting: false },
            pursuers: pursuers.clone(),
        };
        let mut ep = Episode { game, pursuer, rng, state, log: Vec::new(), outcome: None };
        ep.log.push(Event::Start { t: 0.0, evader: start, pursuers });
        ep.check_anchor();
        Ok(ep)
    }

    pub fn game(&self) -> &Game {
        &self.game
    }

    pub fn state(&self) -> &GameState {
        &self.state
    }

    pub fn events(&self) -> &[Event] {
        &self.log
    }

    pub fn outcome(&self) -> Option<Outcome> {
        self.outcome
    }

    pub fn evader_anchor(&self) -> Option<usize> {
        match self.state.evader {
            EvaderLocation::AtAnchor { index, .. } => Some(index),
            EvaderLocation::InTransit { .. } => None,
        }
    }

    pub fn view(&self) -> Option<View<'_>> {
        Some(View {
            game: &self.game,
            clock: self.state.clock,
            at: self.evader_anchor()?,
            pursuers: &self.state.pursuers,
        })
    }

    /// Ends the episode with the evader surviving.
    pub fn expire(&mut self) {
        if self.outcome.is_none() {
            self.finish(Outcome { winner: Winner::Evader, capture_time: None, capture_kind: None });
        }
    }

    fn finish(&mut self, outcome: Outcome) {
        self.outcome = Some(outcome);
        self.log.push(Event::Verdict { t: self.state.clock, outcome });
    }

    fn capture(&mut self, t: f64, pursuer: Option<usize>, point: Point, kind: CaptureKind) {
        self.state.clock = t;
        self.log.push(Event::Interception { t, pursuer, point, kind });
        self.finish(Outcome { winner: Winner::Pursuers, capture_time: Some(t), capture_kind: Some(kind) });
    }

    fn threatened(&self, from: usize, to: usize) -> bool {
        let lane = self.game.lane(from, to);
        self.state.pursuers.iter().any(|&p| interception_time(p, lane, self.game.config()).is_some())
    }

    fn check_anchor(&mut self) {
        let Some(s) = self.evader_anchor() else { return };
        if (0..self.game.n()).filter(|&j| j != s).all(|j| self.threatened(s, j)) {
            let t = self.state.clock;
            self.capture(t, None, self.game.anchor(s), CaptureKind::AllLanesBlocked);
        }
    }

    /// Applies one evader action and returns the events it produced.
    pub fn step(&mut self, action: Action) -> Result<&[Event], SimError> {
        if self.outcome.is_some() {
            return Err(SimError::Finished);
        }
        let s = self.evader_anchor().ok_or(SimError::NotAtAnchor)?;
        let mark = self.log.len();
        match action {
            Action::Move(j) => {
                if j >= self.game.n() || j == s {
                    return Err(SimError::IllegalMove { from: s, to: j });
                }
                self.run_lane(s, j)?;
            }
            Action::Wait => {
                if !self.game.config().evader_may_wait {
                    return Err(SimError::WaitForbidden);
                }
                self.run_wait(s)?;
            }
        }
        if self.outcome.is_none() {
            self.check_anchor();
        }
        Ok(&self.log[mark..])
    }

    fn targets(&mut self, s: usize, action: Action, dwell: f64) -> Result<Vec<Point>, SimError> {
        let view = View { game: &self.game, clock: self.state.clock, at: s, pursuers: &self.state.pursuers };
        let targets = match action {
            Action::Move(j) => self.pursuer.on_commit(&view, j, &mut self.rng),
            Action::Wait => self.pursuer.on_wait(&view, dwell, &mut self.rng),
        };
        check_targets(&self.game, &targets)?;
        Ok(targets)
    }

    fn run_lane(&mut self, s: usize, j: usize) -> Result<(), SimError> {
        let game = self.game.clone();
        let cfg = game.config();
        let lane = *game.lane(s, j);
        let (t0, delay, v_p, v_e, eps) =
            (self.state.clock, cfg.observation_delay, cfg.v_p, cfg.v_e, cfg.capture_eps);
        let (src, dst) = (game.anchor(s), game.anchor(j));
        let u = (dst - src).unit();
        let evader_at = |t: f64| src + u * (v_e * (t - t0)).clamp(0.0, lane.length);
        self.log.push(Event::MoveCommit { t: t0, from: s, to: j, arrive: t0 + lane.travel_time });
        let targets = self.targets(s, Action::Move(j), 0.0)?;

        // earliest analytic interception from the committed positions
        let hit = self
            .state
            .pursuers
            .iter()
            .enumerate()
            .filter_map(|(i, &p)| interception_time(p, &lane, cfg).map(|t| (t, i)))
            .min_by(|a, b| a.0.total_cmp(&b.0));
        let mut end = t0 + lane.travel_time;
        let mut chaser = None;
        if let Some((dt, i)) = hit {
            end = t0 + dt;
            chaser = Some(i);
        }

        let depart = t0 + delay;
        let mut legs = Vec::with_capacity(targets.len());
        for (i, &p) in self.state.pursuers.iter().enumerate() {
            let goal = if chaser == Some(i) { evader_at(end) } else { targets[i] };
            let reach = v_p * (end - depart).max(0.0);
            let d = p.dist(goal);
            let (to, arrive) = if d <= reach + 1e-12 {
                (goal, depart + d / v_p)
            } else {
                (p.toward(goal, reach), end)
            };
            legs.push((p, to, arrive.min(end).max(depart.min(end))));
        }

        // meeting check on each linear piece, in case a leg runs into the evader
        let mut meet: Option<(f64, usize)> = None;
        for (i, &(from, to, arrive)) in legs.iter().enumerate() {
            let vel = if arrive > depart { (to - from) * (1.0 / (arrive - depart)) } else { Point::ORIGIN };
            let pieces = [
                (t0, depart.min(end), from, Point::ORIGIN),
                (depart.min(end), arrive, from, vel),
                (arrive, end, to, Point::ORIGIN),
            ];
            for (a, b, p0, w) in pieces {
                if b < a {
                    continue;
                }
                let r0 = evader_at(a) - p0;
                if let Some(ds) = first_contact(r0, u * v_e - w, eps, b - a) {
                    if meet.map_or(true, |(tm, _)| a + ds < tm) {
                        meet = Some((a + ds, i));
                    }
                    break;
                }
            }
        }
        if let Some((tm, i)) = meet {
            if chaser.is_none() || tm < end - 1e-12 {
                end = tm;
                chaser = Some(i);
            }
        }

        for (i, &(from, to, arrive)) in legs.iter().enumerate() {
            let (to, arrive) = if arrive > end {
                (from.lerp(to, (end - depart) / (arrive - depart)), end)
            } else {
                (to, arrive)
            };
            if arrive > depart && from.dist(to) > 0.0 {
                self.log.push(Event::LegStart { t: depart, pursuer: i, from, to, depart, arrive });
            }
            self.state.pursuers[i] = to;
        }
        if let Some(i) = chaser {
            let progress = ((end - t0) / lane.travel_time).clamp(0.0, 1.0);
            self.state.evader = EvaderLocation::InTransit { from: s, to: j, progress };
            self.capture(end, Some(i), evader_at(end), CaptureKind::OnLane);
        } else {
            self.state.clock = end;
            self.state.evader = EvaderLocation::AtAnchor { index: j, waiting: false };
            self.log.push(Event::Arrive { t: end, at: j });
        }
        Ok(())
    }

    fn run_wait(&mut self, s: usize) -> Result<(), SimError> {
        let game = self.game.clone();
        let cfg = game.config();
        let (t0, v_p, eps) = (self.state.clock, cfg.v_p, cfg.capture_eps);
        let dwell = game.min_lane_time() / 2.0;
        let end = t0 + dwell;
        let here = game.anchor(s);
        self.log.push(Event::Wait { t: t0, at: s, dwell });
        let targets = self.targets(s, Action::Wait, dwell)?;
        let mut contact: Option<(f64, usize)> = None;
        let mut moves = Vec::with_capacity(targets.len());
        for (i, &p) in self.state.pursuers.iter().enumerate() {
            let to = p.toward(targets[i], v_p * dwell);
            let arrive = t0 + p.dist(to) / v_p;
            let w = if arrive > t0 { (to - p) * (1.0 / (arrive - t0)) } else { Point::ORIGIN };
            let first = first_contact(p - here, w, eps, arrive - t0)
                .map(|ds| t0 + ds)
                .or_else(|| (to.dist(here) <= eps).then_some(arrive));
            if let Some(tc) = first {
                if contact.map_or(true, |(c, _)| tc < c) {
                    contact = Some((tc, i));
                }
            }
            moves.push((p, to, arrive));
        }
        let stop = contact.map_or(end, |(tc, _)| tc);
        for (i, &(from, to, arrive)) in moves.iter().enumerate() {
            let (to, arrive) = if arrive > stop {
                (from.lerp(to, (stop - t0) / (arrive - t0)), stop)
            } else {
                (to, arrive)
            };
            if arrive > t0 && from.dist(to) > 0.0 {
                self.log.push(Event::LegStart { t: t0, pursuer: i, from, to, depart: t0, arrive });
            }
            self.state.pursuers[i] = to;
        }
        self.state.evader = EvaderLocation::AtAnchor { index: s, waiting: true };
        if let Some((tc, i)) = contact {
            self.capture(tc, Some(i), here, CaptureKind::Contact);
        } else {
            self.state.clock = end;
        }
        Ok(())
    }
}

fn check_targets(game: &Game, pts: &[Point]) -> Result<(), SimError> {
    if pts.len() != game.m() {
        return Err(SimError::PolicyFault(format!("{} positions for {} pursuers", pts.len(), game.m())));
    }
    if pts.iter().any(|p| !p.is_finite()) {
        return Err(SimError::PolicyFault("non-finite position".into()));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpisodeOptions {
    pub horizon: f64,
    pub seed: u64,
    pub start: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct EpisodeReport {
    pub outcome: Outcome,
    pub events: Vec<Event>,
}

pub fn run_episode(
    game: Arc<Game>,
    pursuer: Box<dyn PursuerPolicy>,
    evader: &mut dyn EvaderPolicy,
    opts: EpisodeOptions,
) -> Result<EpisodeReport, SimError> {
    if !(opts.horizon > 0.0) {
        return Err(SimError::BadHorizon(opts.horizon));
    }
    let mut ep = Episode::new(game, pursuer, opts.start, opts.seed)?;
    let mut erng = ChaCha8Rng::seed_from_u64(opts.seed);
    erng.set_stream(1);
    while ep.outcome().is_none() {
        if ep.state().clock >= opts.horizon {
            ep.expire();
            break;
        }
        let action = evader.choose(&ep.view().expect("evader at anchor between turns"), &mut erng);
        ep.step(action)?;
    }
    Ok(EpisodeReport { outcome: ep.outcome().expect("loop ends with an outcome"), events: ep.log })
}

/// Outcomes for `seeds`, one fresh pair of policies per episode.
pub fn run_batch(
    game: &Arc<Game>,
    pursuer: &PursuerSpec,
    evader: &EvaderSpec,
    seeds: Range<u64>,
    horizon: f64,
    start: Option<usize>,
    exec: Execution,
) -> Result<Vec<Outcome>, SimError> {
    let seeds: Vec<u64> = seeds.collect();
    exec.map(&seeds, |&seed| {
        let p = pursuer.build(game)?;
        let mut e = evader.build();
        run_episode(game.clone(), p, e.as_mut(), EpisodeOptions { horizon, seed, start }).map(|r| r.outcome)
    })
    .into_iter()
    .collect()
}

/// A kinematic violation found by [`audit_log`].
#[derive(Clone, Debug, PartialEq)]
pub struct AuditIssue {
    pub index: usize,
    pub message: String,
}

/// Post-hoc physics check: clock monotone, legs chained per pursuer, no leg
/// faster than `v_p`, evader transits at `v_e`.
pub fn audit_log(game: &Game, events: &[Event]) -> Vec<AuditIssue> {
    let cfg = game.config();
    let mut issues = Vec::new();
    let mut last_t = f64::NEG_INFINITY;
    let mut pos: Vec<Point> = Vec::new();
    let mut busy_until = vec![f64::NEG_INFINITY; cfg.m];
    let mut transit: Option<(usize, usize, f64)> = None;
    let mut bad = |i: usize, m: String| issues.push(AuditIssue { index: i, message: m });
    for (i, e) in events.iter().enumerate() {
        let t = e.time();
        if t < last_t - 1e-12 {
            bad(i, format!("clock went back from {last_t} to {t}"));
        }
        last_t = last_t.max(t);
        match e {
            Event::Start { pursuers, .. } => pos = pursuers.clone(),
            Event::LegStart { pursuer, from, to, depart, arrive, .. } => {
                let p = *pursuer;
                if p >= pos.len() {
                    bad(i, format!("unknown pursuer {p}"));
                    continue;
                }
                if from.dist(pos[p]) > 1e-9 {
                    bad(i, format!("pursuer {p} leg starts away from its position"));
                }
                if *depart < busy_until[p] - 1e-12 {
                    bad(i, format!("pursuer {p} legs overlap"));
                }
                if from.dist(*to) > cfg.v_p * (arrive - depart) + EPS {
                    bad(i, format!("pursuer {p} exceeds v_p"));
                }
                busy_until[p] = *arrive;
                pos[p] = *to;
            }
            Event::MoveCommit { from, to, arrive, t } => {
                let want = game.lane(*from, *to).travel_time;
                if ((arrive - t) - want).abs() > 1e-9 {
                    bad(i, "transit time does not match v_e".into());
                }
                transit = Some((*from, *to, *t));
            }
            Event::Arrive { at, t } => {
                match transit.take() {
                    Some((f, to, t0)) if to == *at => {
                        if ((t - t0) - game.lane(f, to).travel_time).abs() > 1e-9 {
                            bad(i, "arrival time does not match the lane".into());
                        }
                    }
                    _ => bad(i, "arrival without a matching commit".into()),
                }
            }
            Event::Interception { point, t, kind: CaptureKind::OnLane, .. } => {
                if let Some((f, to, t0)) = transit {
                    let (a, b) = (game.anchor(f), game.anchor(to));
                    let want = a + (b - a).unit() * (cfg.v_e * (t - t0));
                    if want.dist(*point) > 1e-9 {
                        bad(i, "interception point off the evader's path".into());
                    }
                }
            }
            _ => {}
        }
    }
    issues
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::GameConfig;
    use approx::assert_abs_diff_eq;

    struct Fixed(Vec<Point>);

    impl PursuerPolicy for Fixed {
        fn initial(&mut self, _: &Game, _: &mut ChaCha8Rng) -> Vec<Point> {
            self.0.clone()
        }
        fn on_commit(&mut self, v: &View, _: usize, _: &mut ChaCha8Rng) -> Vec<Point> {
            v.pursuers.to_vec()
        }
        fn on_wait(&mut self, v: &View, _: f64, _: &mut ChaCha8Rng) -> Vec<Point> {
            v.pursuers.to_vec()
        }
    }

    fn line_game(k: f64) -> Arc<Game> {
        let a = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.5, 5.0)];
        Arc::new(Game::new(GameConfig::new(a, 1, 1.0, k)).unwrap())
    }

    #[test]
    fn interception_matches_oracle() {
        let g = line_game(0.5);
        let mut ep = Episode::new(g, Box::new(Fixed(vec![Point::new(0.5, 0.2)])), Some(0), 1).unwrap();
        assert!(ep.outcome().is_none());
        ep.step(Action::Move(1)).unwrap();
        let o = ep.outcome().unwrap();
        assert_eq!(o.capture_kind, Some(CaptureKind::OnLane));
        assert_abs_diff_eq!(o.capture_time.unwrap(), 0.42630, epsilon = 1e-4);
        assert!(audit_log(ep.game(), ep.events()).is_empty());
    }

    #[test]
    fn unthreatened_move_arrives() {
        let g = line_game(0.5);
        let mut ep = Episode::new(g, Box::new(Fixed(vec![Point::new(0.5, -3.0)])), Some(0), 1).unwrap();
        ep.step(Action::Move(1)).unwrap();
        assert!(ep.outcome().is_none());
        assert_eq!(ep.evader_anchor(), Some(1));
        assert_abs_diff_eq!(ep.state().clock, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn illegal_moves_rejected() {
        let g = line_game(0.5);
        let mut ep = Episode::new(g, Box::new(Fixed(vec![Point::new(9.0, 9.0)])), Some(0), 1).unwrap();
        assert_eq!(ep.step(Action::Move(0)).unwrap_err(), SimError::IllegalMove { from: 0, to: 0 });
        assert_eq!(ep.step(Action::Move(7)).unwrap_err(), SimError::IllegalMove { from: 0, to: 7 });
        let mut cfg = ep.game().config().clone();
        cfg.evader_may_wait = false;
        let g2 = Arc::new(Game::new(cfg).unwrap());
        let mut ep2 = Episode::new(g2, Box::new(Fixed(vec![Point::new(9.0, 9.0)])), Some(0), 1).unwrap();
        assert_eq!(ep2.step(Action::Wait).unwrap_err(), SimError::WaitForbidden);
    }

    #[test]
    fn pursuer_on_anchor_wins_immediately() {
        let g = line_game(0.5);
        let ep = Episode::new(g, Box::new(Fixed(vec![Point::new(0.0, 0.0)])), Some(0), 1).unwrap();
        let o = ep.outcome().unwrap();
        assert_eq!(o.capture_kind, Some(CaptureKind::AllLanesBlocked));
        assert_eq!(o.capture_time, Some(0.0));
    }

    #[test]
    fn wrong_count_is_policy_fault() {
        let g = line_game(0.5);
        let r = Episode::new(g, Box::new(Fixed(vec![])), Some(0), 1);
        assert!(matches!(r, Err(SimError::PolicyFault(_))));
    }

    #[test]
    fn wait_contact() {
        struct Rush;
        impl PursuerPolicy for Rush {
            fn initial(&mut self, _: &Game, _: &mut ChaCha8Rng) -> Vec<Point> {
                vec![Point::new(0.0, -0.1)]
            }
            fn on_commit(&mut self, v: &View, _: usize, _: &mut ChaCha8Rng) -> Vec<Point> {
                v.pursuers.to_vec()
            }
            fn on_wait(&mut self, v: &View, _: f64, _: &mut ChaCha8Rng) -> Vec<Point> {
                vec![v.game.anchor(v.at)]
            }
        }
        let a = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)];
        let g = Arc::new(Game::new(GameConfig::new(a, 1, 1.0, 0.3)).unwrap());
        let mut ep = Episode::new(g, Box::new(Rush), Some(0), 1).unwrap();
        // (0, -0.1) is outside every region out of anchor 0 at this speed
        assert!(ep.outcome().is_none());
        ep.step(Action::Wait).unwrap();
        let o = ep.outcome().unwrap();
        assert_eq!(o.capture_kind, Some(CaptureKind::Contact));
        assert_abs_diff_eq!(o.capture_time.unwrap(), (0.1 - 1e-6) / 0.3, epsilon = 1e-9);
    }

    #[test]
    fn events_serialize_as_tagged_lines() {
        let g = line_game(0.5);
        let mut ep = Episode::new(g, Box::new(Fixed(vec![Point::new(0.5, 0.2)])), Some(0), 1).unwrap();
        ep.step(Action::Move(1)).unwrap();
        let s = events_to_jsonl(ep.events());
        assert!(s.lines().next().unwrap().starts_with("{\"event\":\"start\""));
        assert!(s.contains("\"event\":\"move_commit\""));
        assert!(s.contains("\"event\":\"interception\""));
        assert!(s.contains("\"event\":\"verdict\""));
        for line in s.lines() {
            let _: Event = serde_json::from_str(line).unwrap();
        }
    }

    #[test]
    fn audit_flags_speeding() {
        let g = line_game(0.5);
        let ev = vec![
            Event::Start { t: 0.0, evader: 0, pursuers: vec![Point::new(0.0, 0.0)] },
            Event::LegStart {
                t: 0.0,
                pursuer: 0,
                from: Point::new(0.0, 0.0),
                to: Point::new(1.0, 0.0),
                depart: 0.0,
                arrive: 1.0,
            },
        ];
        assert_eq!(audit_log(&g, &ev).len(), 1);
    }
}
