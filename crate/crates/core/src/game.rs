//! Problem instance: anchors, lanes, speeds, the blocking predicate and the
//! exact blocking regions.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{cone_hull, convex_hull, disk_polygon, ConvexPolygon, Point, EPS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("need at least 2 anchors, got {0}")]
    TooFewAnchors(usize),
    #[error("need at least one pursuer")]
    NoPursuers,
    #[error("anchors {0} and {1} coincide")]
    DuplicateAnchors(usize, usize),
    #[error("speeds must be positive and finite (v_e={v_e}, v_p={v_p})")]
    BadSpeed { v_e: f64, v_p: f64 },
    #[error("capture_eps must be positive, got {0}")]
    BadCaptureEps(f64),
    #[error("observation_delay must be finite and non-negative, got {0}")]
    BadDelay(f64),
    #[error("arc_segments must be at least 2, got {0}")]
    BadArcSegments(usize),
    #[error("anchor {0} is not finite")]
    NonFinite(usize),
    #[error("give exactly one of \"anchors\" or \"regular\"")]
    AnchorSource,
}

/// How candidate block sets are enumerated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockSetMode {
    #[default]
    Auto,
    Contiguous,
    Exhaustive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawConfig")]
pub struct GameConfig {
    pub anchors: Vec<Point>,
    pub m: usize,
    pub v_e: f64,
    pub v_p: f64,
    pub evader_may_wait: bool,
    pub observation_delay: f64,
    pub capture_eps: f64,
    pub arc_segments: usize,
    pub block_sets: BlockSetMode,
    pub multi_move_budget: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularSpec {
    pub n: usize,
    #[serde(default = "one")]
    pub radius: f64,
    #[serde(default)]
    pub phase_deg: f64,
}

fn one() -> f64 {
    1.0
}
fn yes() -> bool {
    true
}
fn default_capture_eps() -> f64 {
    1e-6
}
fn default_arc_segments() -> usize {
    64
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    anchors: Option<Vec<Point>>,
    regular: Option<RegularSpec>,
    m: usize,
    #[serde(default = "one")]
    v_e: f64,
    v_p: f64,
    #[serde(default = "yes")]
    evader_may_wait: bool,
    #[serde(default)]
    observation_delay: f64,
    #[serde(default = "default_capture_eps")]
    capture_eps: f64,
    #[serde(default = "default_arc_segments")]
    arc_segments: usize,
    #[serde(default)]
    block_sets: BlockSetMode,
    #[serde(default)]
    multi_move_budget: bool,
}

impl TryFrom<RawConfig> for GameConfig {
    type Error = ConfigError;

    fn try_from(r: RawConfig) -> Result<Self, ConfigError> {
        let anchors = match (r.anchors, r.regular) {
            (Some(a), None) => a,
            (None, Some(s)) => regular_polygon(s.n, s.radius, s.phase_deg),
            _ => return Err(ConfigError::AnchorSource),
        };
        let c = GameConfig {
            anchors,
            m: r.m,
            v_e: r.v_e,
            v_p: r.v_p,
            evader_may_wait: r.evader_may_wait,
            observation_delay: r.observation_delay,
            capture_eps: r.capture_eps,
            arc_segments: r.arc_segments,
            block_sets: r.block_sets,
            multi_move_budget: r.multi_move_budget,
        };
        c.validate()?;
        Ok(c)
    }
}

/// Regular n-gon with `s_0` on the positive y axis, indices counter-clockwise.
pub fn regular_polygon(n: usize, radius: f64, phase_deg: f64) -> Vec<Point> {
    let phase = phase_deg.to_radians();
    (0..n)
        .map(|i| Point::polar(radius, PI / 2.0 + phase + 2.0 * PI * i as f64 / n as f64))
        .collect()
}

impl GameConfig {
    pub fn new(anchors: Vec<Point>, m: usize, v_e: f64, v_p: f64) -> Self {
        GameConfig {
            anchors,
            m,
            v_e,
            v_p,
            evader_may_wait: true,
            observation_delay: 0.0,
            capture_eps: default_capture_eps(),
            arc_segments: default_arc_segments(),
            block_sets: BlockSetMode::Auto,
            multi_move_budget: false,
        }
    }

    /// Unit-circumradius regular n-gon with `v_e = 1`.
    pub fn regular(n: usize, m: usize, v_p: f64) -> Self {
        Self::new(regular_polygon(n, 1.0, 0.0), m, 1.0, v_p)
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let n = self.anchors.len();
        if n < 2 {
            return Err(ConfigError::TooFewAnchors(n));
        }
        if self.m == 0 {
            return Err(ConfigError::NoPursuers);
        }
        for (i, p) in self.anchors.iter().enumerate() {
            if !p.is_finite() {
                return Err(ConfigError::NonFinite(i));
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                if self.anchors[i].dist(self.anchors[j]) <= EPS {
                    return Err(ConfigError::DuplicateAnchors(i, j));
                }
            }
        }
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !ok(self.v_e) || !ok(self.v_p) {
            return Err(ConfigError::BadSpeed { v_e: self.v_e, v_p: self.v_p });
        }
        if !ok(self.capture_eps) {
            return Err(ConfigError::BadCaptureEps(self.capture_eps));
        }
        if !self.observation_delay.is_finite() || self.observation_delay < 0.0 {
            return Err(ConfigError::BadDelay(self.observation_delay));
        }
        if self.arc_segments < 2 {
            return Err(ConfigError::BadArcSegments(self.arc_segments));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.anchors.len()
    }

    /// Speed ratio `v_p / v_e`.
    pub fn k(&self) -> f64 {
        self.v_p / self.v_e
    }

    pub fn with_k(&self, k: f64) -> Self {
        GameConfig { v_p: k * self.v_e, ..self.clone() }
    }

    pub fn lane(&self, from: usize, to: usize) -> Lane {
        let length = self.anchors[from].dist(self.anchors[to]);
        Lane { from, to, length, travel_time: length / self.v_e }
    }

    /// Distance the evader covers before pursuers see its choice.
    pub fn lead(&self) -> f64 {
        self.v_e * self.observation_delay
    }

    pub fn centroid(&self) -> Point {
        let s = self.anchors.iter().fold(Point::ORIGIN, |a, &p| a + p);
        s * (1.0 / self.n() as f64)
    }

    pub fn diameter(&self) -> f64 {
        let a = &self.anchors;
        let mut d: f64 = 0.0;
        for i in 0..a.len() {
            for j in i + 1..a.len() {
                d = d.max(a[i].dist(a[j]));
            }
        }
        d
    }

    /// Anchors equidistant from their centroid with equal angular gaps.
    pub fn is_regular(&self) -> bool {
        let c = self.centroid();
        let r0 = self.anchors[0].dist(c);
        if r0 <= EPS || self.anchors.iter().any(|p| (p.dist(c) - r0).abs() > 1e-6 * r0) {
            return false;
        }
        let order = self.angular_order();
        let n = self.n();
        let ang = |i: usize| {
            let d = self.anchors[i] - c;
            d.y.atan2(d.x)
        };
        (0..n).all(|t| {
            let (a, b) = (order[t], order[(t + 1) % n]);
            let gap = (ang(b) - ang(a)).rem_euclid(2.0 * PI);
            (gap - 2.0 * PI / n as f64).abs() < 1e-6
        })
    }

    /// Every anchor is a strict vertex of the anchors' convex hull.
    pub fn in_convex_position(&self) -> bool {
        self.n() <= 3 || convex_hull(&self.anchors).len() == self.n()
    }

    /// Anchor indices counter-clockwise around the centroid, starting at the smallest index.
    pub fn angular_order(&self) -> Vec<usize> {
        let c = self.centroid();
        let mut idx: Vec<usize> = (0..self.n()).collect();
        idx.sort_by(|&a, &b| {
            let (da, db) = (self.anchors[a] - c, self.anchors[b] - c);
            da.y.atan2(da.x).total_cmp(&db.y.atan2(db.x)).then(a.cmp(&b))
        });
        let start = idx.iter().position(|&i| i == 0).unwrap_or(0);
        idx.rotate_left(start);
        idx
    }
}

/// Directed straight lane between two anchors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lane {
    pub from: usize,
    pub to: usize,
    pub length: f64,
    pub travel_time: f64,
}

/// Non-empty proper subset of anchors, kept sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BlockSet(Vec<usize>);

impl BlockSet {
    pub fn new(mut members: Vec<usize>) -> Self {
        members.sort_unstable();
        members.dedup();
        BlockSet(members)
    }

    pub fn members(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn is_subset(&self, other: &BlockSet) -> bool {
        self.0.iter().all(|&i| other.contains(i))
    }

    /// Non-empty and strictly smaller than `n`, with in-range members.
    pub fn is_valid_for(&self, n: usize) -> bool {
        !self.0.is_empty() && self.0.len() < n && self.0.iter().all(|&i| i < n)
    }
}

impl fmt::Display for BlockSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// All `n(n-1)` ordered lanes, source-major.
pub fn all_lanes(config: &GameConfig) -> Vec<Lane> {
    let n = config.n();
    let mut out = Vec::with_capacity(n * (n - 1));
    for i in 0..n {
        for j in 0..n {
            if i != j {
                out.push(config.lane(i, j));
            }
        }
    }
    out
}

pub fn escape_lanes(bs: &BlockSet, config: &GameConfig) -> Vec<Lane> {
    let n = config.n();
    let mut out = Vec::new();
    for &i in bs.members() {
        for j in 0..n {
            if !bs.contains(j) {
                out.push(config.lane(i, j));
            }
        }
    }
    out
}

/// Smallest `s` in `[lo, hi]` with `a s^2 + b s + c <= 0`.
pub(crate) fn earliest_nonpositive(a: f64, b: f64, c: f64, lo: f64, hi: f64) -> Option<f64> {
    if lo > hi {
        return None;
    }
    let q = |s: f64| (a * s + b) * s + c;
    if q(lo) <= 0.0 {
        return Some(lo);
    }
    let scale = b.abs().max(c.abs()).max(1.0);
    let mut roots = [f64::NAN, f64::NAN];
    if a.abs() <= 1e-14 * scale {
        if b != 0.0 {
            roots[0] = -c / b;
        }
    } else {
        let disc = b * b - 4.0 * a * c;
        if disc < 0.0 {
            return None;
        }
        let qq = -0.5 * (b + b.signum() * disc.sqrt());
        roots[0] = qq / a;
        roots[1] = if qq != 0.0 { c / qq } else { roots[0] };
    }
    roots
        .into_iter()
        .filter(|r| r.is_finite() && *r >= lo && *r <= hi)
        .min_by(f64::total_cmp)
}

/// Earliest distance `s` along the lane `src -> dst` at which a pursuer starting
/// at `p` can stand on the evader: `|x(s) - p| <= k * max(0, s - lead) + slack`.
pub fn interception_distance(
    p: Point,
    src: Point,
    dst: Point,
    k: f64,
    lead: f64,
    slack: f64,
) -> Option<f64> {
    let axis = dst - src;
    let l = axis.norm();
    let u = axis.unit();
    let w = p - src;
    let proj = w.dot(u);
    // computed directly; d^2 - proj^2 cancels badly near the lane
    let perp = (w - u * proj).norm();
    if lead > 0.0 && perp <= slack {
        // before the pursuers react only standing on the path catches the evader
        let h = (slack * slack - perp * perp).sqrt();
        let end = lead.min(l);
        if proj + h >= 0.0 && proj - h <= end {
            return Some((proj - h).max(0.0));
        }
    }
    if lead >= l {
        return None;
    }
    // t = s - lead: (t + a0)^2 + perp^2 <= (k t + slack)^2
    let a0 = lead.max(0.0) - proj;
    let c = a0 * a0 + perp * perp - slack * slack;
    earliest_nonpositive(1.0 - k * k, 2.0 * (a0 - k * slack), c, 0.0, l - lead.max(0.0))
        .map(|t| t + lead.max(0.0))
}

/// A pursuer standing at `p` can intercept an evader that departs along `lane`.
pub fn blocks(p: Point, lane: &Lane, config: &GameConfig) -> bool {
    let (src, dst) = (config.anchors[lane.from], config.anchors[lane.to]);
    interception_distance(p, src, dst, config.k(), config.lead(), EPS).is_some()
}

/// Earliest interception time along the lane, with `capture_eps` slack.
pub fn interception_time(pursuer: Point, lane: &Lane, config: &GameConfig) -> Option<f64> {
    let (src, dst) = (config.anchors[lane.from], config.anchors[lane.to]);
    let slack = config.capture_eps.max(EPS);
    interception_distance(pursuer, src, dst, config.k(), config.lead(), slack)
        .map(|s| s / config.v_e)
}

/// Set of pursuer positions that block `lane`, as a convex polygon (a subset of
/// the true region when the arc is discretized).
pub fn blocking_region(lane: &Lane, config: &GameConfig) -> ConvexPolygon {
    let (src, dst) = (config.anchors[lane.from], config.anchors[lane.to]);
    let k = config.k();
    let lead = config.lead();
    if lead >= lane.length {
        return ConvexPolygon::segment(src, dst);
    }
    let apex = src.lerp(dst, lead / lane.length);
    let radius = k * (lane.length - lead);
    if k < 1.0 {
        cone_hull(apex, dst, radius, config.arc_segments)
            .expect("k < 1 keeps the cap inside the cone")
    } else {
        let mut pts = disk_polygon(dst, radius, 2 * config.arc_segments).vertices().to_vec();
        pts.push(apex);
        let hull = ConvexPolygon::from_points(&pts);
        let c = config.centroid();
        let h = 1.5 * config.diameter();
        hull.intersect(&ConvexPolygon::rect(c.x - h, c.y - h, c.x + h, c.y + h))
    }
}

/// Instance with lanes and blocking regions precomputed.
#[derive(Clone, Debug)]
pub struct Game {
    config: GameConfig,
    lanes: Vec<Lane>,
    regions: Vec<ConvexPolygon>,
}

impl Game {
    pub fn new(config: GameConfig) -> Result<Self, ConfigError> {
        config.validate()?;
        let lanes = all_lanes(&config);
        let regions = lanes.iter().map(|l| blocking_region(l, &config)).collect();
        Ok(Game { config, lanes, regions })
    }

    pub fn config(&self) -> &GameConfig {
        &self.config
    }

    pub fn n(&self) -> usize {
        self.config.n()
    }

    pub fn m(&self) -> usize {
        self.config.m
    }

    pub fn k(&self) -> f64 {
        self.config.k()
    }

    pub fn anchor(&self, i: usize) -> Point {
        self.config.anchors[i]
    }

    pub fn lanes(&self) -> &[Lane] {
        &self.lanes
    }

    /// Position of lane `from -> to` in [`Game::lanes`].
    pub fn lane_index(&self, from: usize, to: usize) -> usize {
        debug_assert!(from != to);
        from * (self.n() - 1) + if to > from { to - 1 } else { to }
    }

    pub fn lane(&self, from: usize, to: usize) -> &Lane {
        &self.lanes[self.lane_index(from, to)]
    }

    pub fn region(&self, from: usize, to: usize) -> &ConvexPolygon {
        &self.regions[self.lane_index(from, to)]
    }

    pub fn blocks(&self, p: Point, from: usize, to: usize) -> bool {
        blocks(p, self.lane(from, to), &self.config)
    }

    /// Some pursuer in `ps` blocks the lane.
    pub fn any_blocks(&self, ps: &[Point], from: usize, to: usize) -> bool {
        ps.iter().any(|&p| self.blocks(p, from, to))
    }

    /// Every lane out of `anchor` is blocked by some pursuer.
    pub fn all_blocked(&self, ps: &[Point], anchor: usize) -> bool {
        (0..self.n()).filter(|&j| j != anchor).all(|j| self.any_blocks(ps, anchor, j))
    }

    /// Shortest lane length out of `anchor`.
    pub fn min_outgoing(&self, anchor: usize) -> f64 {
        (0..self.n())
            .filter(|&j| j != anchor)
            .map(|j| self.lane(anchor, j).length)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn min_lane_time(&self) -> f64 {
        self.lanes.iter().map(|l| l.travel_time).fold(f64::INFINITY, f64::min)
    }

    pub fn max_lane_time(&self) -> f64 {
        self.lanes.iter().map(|l| l.travel_time).fold(0.0, f64::max)
    }

    /// Pursuer travel budget while the evader runs `from -> to`.
    pub fn lane_budget(&self, from: usize, to: usize) -> f64 {
        let l = self.lane(from, to);
        self.config.v_p * (l.travel_time - self.config.observation_delay).max(0.0)
    }

    pub fn escape_lane_indices(&self, bs: &BlockSet) -> Vec<usize> {
        let mut out = Vec::new();
        for &i in bs.members() {
            for j in 0..self.n() {
                if !bs.contains(j) {
                    out.push(self.lane_index(i, j));
                }
            }
        }
        out
    }

    pub fn region_by_index(&self, idx: usize) -> &ConvexPolygon {
        &self.regions[idx]
    }
}
