//! Formations: per-pursuer convex slots that jointly block every escape lane
//! of a block set.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::game::{BlockSet, BlockSetMode, Game, GameConfig};
use crate::geometry::{ConvexPolygon, Point};

/// Escape-lane counts up to this size get a complete partition search.
pub const EXHAUSTIVE_LANE_LIMIT: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LaneSlot {
    pub from: usize,
    pub to: usize,
    pub slot: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Formation {
    pub block_set: BlockSet,
    pub slots: Vec<ConvexPolygon>,
    pub lane_assignment: Vec<LaneSlot>,
}

impl Formation {
    pub fn m(&self) -> usize {
        self.slots.len()
    }

    /// Lanes assigned to `slot`.
    pub fn lanes_of(&self, slot: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.lane_assignment.iter().filter(move |a| a.slot == slot).map(|a| (a.from, a.to))
    }

    /// Number of slots that carry at least one lane.
    pub fn groups(&self) -> usize {
        (0..self.m()).filter(|&s| self.lanes_of(s).next().is_some()).count()
    }

    pub fn centroids(&self) -> Vec<Point> {
        self.slots.iter().map(|s| s.centroid().expect("slots are non-empty")).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FormationSearch {
    Feasible(Formation),
    /// Greedy failed and the lane count is beyond the exhaustive fallback.
    GreedyInfeasible,
    /// Exhaustive search proved no partition into at most m groups exists.
    Infeasible,
}

impl FormationSearch {
    pub fn formation(self) -> Option<Formation> {
        match self {
            FormationSearch::Feasible(f) => Some(f),
            _ => None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self, FormationSearch::Feasible(_))
    }
}

fn combinations(n: usize, i: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(i);
    fn rec(start: usize, n: usize, i: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == i {
            out.push(cur.clone());
            return;
        }
        for a in start..n {
            if n - a < i - cur.len() {
                break;
            }
            cur.push(a);
            rec(a + 1, n, i, cur, out);
            cur.pop();
        }
    }
    rec(0, n, i, &mut cur, &mut out);
    out
}

fn windows(config: &GameConfig, i: usize) -> Vec<BlockSet> {
    let order = config.angular_order();
    let n = order.len();
    (0..n).map(|s| BlockSet::new((0..i).map(|t| order[(s + t) % n]).collect())).collect()
}

/// Candidate block sets of size `i` in deterministic order.
pub fn enumerate_block_sets(config: &GameConfig, i: usize) -> Vec<BlockSet> {
    let n = config.n();
    assert!(i >= 1 && i < n, "block set size must be in 1..n");
    let exhaustive = match config.block_sets {
        BlockSetMode::Contiguous => false,
        BlockSetMode::Exhaustive => true,
        BlockSetMode::Auto => !config.in_convex_position() && n <= 12,
    };
    if exhaustive {
        combinations(n, i).into_iter().map(BlockSet::new).collect()
    } else {
        windows(config, i)
    }
}

/// Escape lanes of `bs` ordered by descending length, ties broken by angular
/// position relative to the block set so rotated sets get rotated formations.
fn ordered_escape_lanes(game: &Game, bs: &BlockSet) -> Vec<usize> {
    let n = game.n();
    let order = game.config().angular_order();
    let mut pos = vec![0; n];
    for (p, &a) in order.iter().enumerate() {
        pos[a] = p;
    }
    let base = bs
        .members()
        .iter()
        .copied()
        .find(|&a| !bs.contains(order[(pos[a] + n - 1) % n]))
        .or_else(|| bs.members().iter().copied().min_by_key(|&a| pos[a]))
        .unwrap_or(0);
    let rel = |a: usize| (pos[a] + n - pos[base]) % n;
    let mut lanes = game.escape_lane_indices(bs);
    lanes.sort_by_key(|&li| {
        let l = game.lanes()[li];
        (-((l.length * 1e8).round() as i64), rel(l.from), rel(l.to))
    });
    lanes
}

struct Group {
    lanes: Vec<usize>,
    region: ConvexPolygon,
}

fn tier(game: &Game, g: &Group, li: usize) -> u8 {
    let l = game.lanes()[li];
    let mut best = 2;
    for &o in &g.lanes {
        let ol = game.lanes()[o];
        if ol.from == l.from {
            return 0;
        }
        if ol.to == l.to || ol.from == l.to || ol.to == l.from {
            best = 1;
        }
    }
    best
}

fn greedy_groups(game: &Game, lanes: &[usize]) -> Option<Vec<Group>> {
    let m = game.m();
    let mut groups: Vec<Group> = Vec::new();
    for &li in lanes {
        let region = game.region_by_index(li);
        let mut cand: Vec<(u8, usize)> =
            groups.iter().enumerate().map(|(gi, g)| (tier(game, g, li), gi)).collect();
        cand.sort();
        let mut placed = false;
        for (_, gi) in cand {
            let inter = groups[gi].region.intersect(region);
            if !inter.is_empty() {
                groups[gi].lanes.push(li);
                groups[gi].region = inter;
                placed = true;
                break;
            }
        }
        if !placed {
            if groups.len() == m {
                return None;
            }
            groups.push(Group { lanes: vec![li], region: region.clone() });
        }
    }
    Some(groups)
}

/// Backtracking over set partitions of `lanes` into at most m groups with
/// non-empty intersections. Calls `visit` on each complete partition until it
/// returns false or `node_cap` search nodes are spent.
fn partitions(
    game: &Game,
    lanes: &[usize],
    node_cap: usize,
    visit: &mut dyn FnMut(&[Group]) -> bool,
) -> bool {
    fn rec(
        game: &Game,
        lanes: &[usize],
        t: usize,
        groups: &mut Vec<Group>,
        nodes: &mut usize,
        cap: usize,
        visit: &mut dyn FnMut(&[Group]) -> bool,
    ) -> bool {
        *nodes += 1;
        if *nodes > cap {
            return false;
        }
        if t == lanes.len() {
            return visit(groups);
        }
        let li = lanes[t];
        let region = game.region_by_index(li);
        for gi in 0..groups.len() {
            let inter = groups[gi].region.intersect(region);
            if inter.is_empty() {
                continue;
            }
            let saved = std::mem::replace(&mut groups[gi].region, inter);
            groups[gi].lanes.push(li);
            let go = rec(game, lanes, t + 1, groups, nodes, cap, visit);
            groups[gi].lanes.pop();
            groups[gi].region = saved;
            if !go {
                return false;
            }
        }
        if groups.len() < game.m() {
            groups.push(Group { lanes: vec![li], region: region.clone() });
            let go = rec(game, lanes, t + 1, groups, nodes, cap, visit);
            groups.pop();
            if !go {
                return false;
            }
        }
        true
    }
    let mut groups = Vec::new();
    let mut nodes = 0;
    rec(game, lanes, 0, &mut groups, &mut nodes, node_cap, visit)
}

fn build(game: &Game, bs: &BlockSet, groups: &[Group]) -> Formation {
    let m = game.m();
    let g = groups.len().max(1);
    let mut slots = Vec::with_capacity(m);
    let mut lane_assignment = Vec::new();
    for (gi, grp) in groups.iter().enumerate() {
        for &li in &grp.lanes {
            let l = game.lanes()[li];
            lane_assignment.push(LaneSlot { from: l.from, to: l.to, slot: gi });
        }
    }
    lane_assignment.sort_by_key(|a| (a.from, a.to));
    for s in 0..m {
        slots.push(groups[s % g].region.clone());
    }
    Formation { block_set: bs.clone(), slots, lane_assignment }
}

/// Greedy grouping first, then a complete partition search
/// when the escape-lane count allows it.
pub fn find_formation(game: &Game, bs: &BlockSet) -> FormationSearch {
    assert!(bs.is_valid_for(game.n()), "invalid block set {bs}");
    let lanes = ordered_escape_lanes(game, bs);
    if let Some(groups) = greedy_groups(game, &lanes) {
        return FormationSearch::Feasible(build(game, bs, &groups));
    }
    if lanes.len() > EXHAUSTIVE_LANE_LIMIT {
        return FormationSearch::GreedyInfeasible;
    }
    exhaustive_formation(game, bs).map_or(FormationSearch::Infeasible, FormationSearch::Feasible)
}

/// Complete partition search only (no greedy step).
pub fn exhaustive_formation(game: &Game, bs: &BlockSet) -> Option<Formation> {
    let lanes = ordered_escape_lanes(game, bs);
    let mut found = None;
    partitions(game, &lanes, usize::MAX, &mut |groups| {
        found = Some(build(game, bs, groups));
        false
    });
    found
}

fn grouping_key(groups: &[Group]) -> Vec<Vec<usize>> {
    let mut key: Vec<Vec<usize>> = groups
        .iter()
        .map(|g| {
            let mut l = g.lanes.clone();
            l.sort_unstable();
            l
        })
        .collect();
    key.sort();
    key
}

/// Up to `limit` distinct feasible formations for `bs`: the greedy one first,
/// then partitions in search order.
pub fn formation_variants(game: &Game, bs: &BlockSet, limit: usize) -> Vec<Formation> {
    let lanes = ordered_escape_lanes(game, bs);
    let mut out = Vec::new();
    let mut seen = Vec::new();
    if let Some(groups) = greedy_groups(game, &lanes) {
        seen.push(grouping_key(&groups));
        out.push(build(game, bs, &groups));
    }
    if out.len() >= limit {
        return out;
    }
    let cap = if lanes.len() <= EXHAUSTIVE_LANE_LIMIT { 200_000 } else { 2_000 };
    partitions(game, &lanes, cap, &mut |groups| {
        let key = grouping_key(groups);
        if !seen.contains(&key) {
            seen.push(key);
            out.push(build(game, bs, groups));
        }
        out.len() < limit
    });
    out
}

/// Uniform random point of a non-empty convex region.
pub fn sample_in<R: Rng + ?Sized>(poly: &ConvexPolygon, rng: &mut R) -> Point {
    let v = poly.vertices();
    match v.len() {
        0 => panic!("cannot sample the empty region"),
        1 => v[0],
        2 => v[0].lerp(v[1], rng.gen::<f64>()),
        _ => {
            let areas: Vec<f64> =
                (1..v.len() - 1).map(|i| 0.5 * (v[i] - v[0]).cross(v[i + 1] - v[0])).collect();
            let total: f64 = areas.iter().sum();
            let mut pick = rng.gen::<f64>() * total;
            let mut t = areas.len() - 1;
            for (i, a) in areas.iter().enumerate() {
                if pick <= *a {
                    t = i;
                    break;
                }
                pick -= a;
            }
            let (a, b, c) = (v[0], v[t + 1], v[t + 2]);
            let (r1, r2) = (rng.gen::<f64>().sqrt(), rng.gen::<f64>());
            a * (1.0 - r1) + b * (r1 * (1.0 - r2)) + c * (r1 * r2)
        }
    }
}

/// Structural checks plus `samples` random points and every vertex of each
/// slot tested against the slot's lanes.
pub fn verify_formation<R: Rng + ?Sized>(
    game: &Game,
    f: &Formation,
    samples: usize,
    rng: &mut R,
) -> bool {
    if f.slots.len() != game.m() || f.slots.iter().any(|s| s.is_empty()) {
        return false;
    }
    let mut expected: Vec<(usize, usize)> = game
        .escape_lane_indices(&f.block_set)
        .into_iter()
        .map(|li| (game.lanes()[li].from, game.lanes()[li].to))
        .collect();
    let mut got: Vec<(usize, usize)> = f.lane_assignment.iter().map(|a| (a.from, a.to)).collect();
    expected.sort_unstable();
    got.sort_unstable();
    if expected != got || f.lane_assignment.iter().any(|a| a.slot >= f.m()) {
        return false;
    }
    for (si, slot) in f.slots.iter().enumerate() {
        let lanes: Vec<(usize, usize)> = f.lanes_of(si).collect();
        let mut pts: Vec<Point> = slot.vertices().to_vec();
        pts.extend((0..samples).map(|_| sample_in(slot, rng)));
        for p in pts {
            if lanes.iter().any(|&(a, b)| !game.blocks(p, a, b)) {
                return false;
            }
        }
    }
    true
}
