//! Finite pursuer playbook: a rank function over sampled pursuer configurations
//! proving that every evader move can be answered until all lanes are blocked.
//!
//! Configurations come from formation slots (centroids and the slot points
//! closest to each anchor) and from guard placements. Rank 0 at anchor `s`
//! means every lane out of `s` is blocked. Rank `r` means each unblocked lane
//! `s -> x` has a configuration of rank `< r` at `x` reachable by a pursuer
//! matching whose longest leg fits in the pursuers' travel budget for that lane.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::formation::{enumerate_block_sets, formation_variants};
use crate::game::Game;
use crate::geometry::Point;
use crate::par::Execution;

pub const UNRANKED: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlaybookParams {
    /// Distinct formations sampled per block set.
    pub variants: usize,
    /// Guard placements sampled at most.
    pub max_guard_configs: usize,
    pub execution: Execution,
}

impl Default for PlaybookParams {
    fn default() -> Self {
        PlaybookParams { variants: 6, max_guard_configs: 2000, execution: Execution::default() }
    }
}

/// Minimal bottleneck matching between equal-size point lists: the smallest
/// possible longest leg, and `assign[i]` = index in `b` for `a[i]`.
pub fn bottleneck_assignment(a: &[Point], b: &[Point]) -> (f64, Vec<usize>) {
    let m = a.len();
    assert_eq!(m, b.len());
    if m == 0 {
        return (0.0, Vec::new());
    }
    let d: Vec<f64> = (0..m * m).map(|i| a[i / m].dist(b[i % m])).collect();
    let mut vals = d.clone();
    vals.sort_by(f64::total_cmp);
    vals.dedup();
    let (mut lo, mut hi) = (0, vals.len() - 1);
    let mut best = perfect_matching(m, |i, j| d[i * m + j] <= vals[hi]).expect("complete graph");
    while lo < hi {
        let mid = (lo + hi) / 2;
        match perfect_matching(m, |i, j| d[i * m + j] <= vals[mid]) {
            Some(mt) => {
                best = mt;
                hi = mid;
            }
            None => lo = mid + 1,
        }
    }
    (vals[hi], best)
}

/// Smallest achievable longest leg, without the matching.
pub fn bottleneck(a: &[Point], b: &[Point]) -> f64 {
    match a.len() {
        0 => 0.0,
        1 => a[0].dist(b[0]),
        2 => {
            let s = a[0].dist(b[0]).max(a[1].dist(b[1]));
            let x = a[0].dist(b[1]).max(a[1].dist(b[0]));
            s.min(x)
        }
        3 => {
            const P: [[usize; 3]; 6] =
                [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
            let mut d = [[0.0; 3]; 3];
            for (i, row) in d.iter_mut().enumerate() {
                for (j, v) in row.iter_mut().enumerate() {
                    *v = a[i].dist(b[j]);
                }
            }
            P.iter()
                .map(|p| d[0][p[0]].max(d[1][p[1]]).max(d[2][p[2]]))
                .fold(f64::INFINITY, f64::min)
        }
        _ => bottleneck_assignment(a, b).0,
    }
}

/// Every point must travel at least to its nearest counterpart, on both sides.
fn nearest_lower_bound(a: &[Point], b: &[Point]) -> f64 {
    let side = |a: &[Point], b: &[Point]| {
        a.iter().map(|&p| b.iter().map(|&q| p.dist(q)).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max)
    };
    side(a, b).max(side(b, a))
}

fn perfect_matching(m: usize, ok: impl Fn(usize, usize) -> bool) -> Option<Vec<usize>> {
    let mut match_b = vec![usize::MAX; m];
    fn augment(
        i: usize,
        m: usize,
        ok: &dyn Fn(usize, usize) -> bool,
        seen: &mut [bool],
        match_b: &mut [usize],
    ) -> bool {
        for j in 0..m {
            if ok(i, j) && !seen[j] {
                seen[j] = true;
                if match_b[j] == usize::MAX || augment(match_b[j], m, ok, seen, match_b) {
                    match_b[j] = i;
                    return true;
                }
            }
        }
        false
    }
    for i in 0..m {
        let mut seen = vec![false; m];
        if !augment(i, m, &ok, &mut seen, &mut match_b) {
            return None;
        }
    }
    let mut assign = vec![0; m];
    for (j, &i) in match_b.iter().enumerate() {
        assign[i] = j;
    }
    Some(assign)
}

fn key(c: &[Point]) -> Vec<(i64, i64)> {
    c.iter().map(|p| ((p.x * 1e9).round() as i64, (p.y * 1e9).round() as i64)).collect()
}

fn canonical(mut c: Vec<Point>) -> Vec<Point> {
    c.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    c
}

fn guard_configs(game: &Game, cap: usize) -> Vec<Vec<Point>> {
    let (n, m) = (game.n(), game.m());
    let k = m.min(n);
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>, cap: usize) {
        if out.len() >= cap {
            return;
        }
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for a in start..n {
            cur.push(a);
            rec(a + 1, n, k, cur, out, cap);
            cur.pop();
        }
    }
    let mut combos = Vec::new();
    rec(0, n, k, &mut cur, &mut combos, cap);
    for combo in combos {
        let mut pts: Vec<Point> = combo.iter().map(|&i| game.anchor(i)).collect();
        let first = pts[0];
        pts.resize(m, first);
        out.push(pts);
    }
    out
}

/// Candidate pursuer configurations, canonically ordered and deduplicated.
pub fn candidate_configs(game: &Game, params: &PlaybookParams) -> Vec<Vec<Point>> {
    let n = game.n();
    let mut block_sets = Vec::new();
    for i in 1..n {
        block_sets.extend(enumerate_block_sets(game.config(), i));
    }
    let per_bs: Vec<Vec<Vec<Point>>> = params.execution.map(&block_sets, |bs| {
        let mut local = Vec::new();
        let mut probes: Vec<Point> = game.config().anchors.clone();
        probes.push(game.config().centroid());
        for f in formation_variants(game, bs, params.variants) {
            local.push(canonical(f.centroids()));
            for &a in &probes {
                let pts = f.slots.iter().map(|s| s.closest_point(a).expect("non-empty")).collect();
                local.push(canonical(pts));
            }
        }
        local
    });
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for c in per_bs.into_iter().flatten().chain(guard_configs(game, params.max_guard_configs)) {
        let c = canonical(c);
        if seen.insert(key(&c)) {
            out.push(c);
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlaybookSummary {
    pub configs: usize,
    pub proven: bool,
    pub entry: Option<Vec<Point>>,
    pub entry_rank: Option<u32>,
    /// Distinct configurations reachable from the entry under the playbook.
    pub closure_configs: usize,
}

#[derive(Clone, Debug)]
pub struct Playbook {
    n: usize,
    configs: Vec<Vec<Point>>,
    /// `configs x lanes`, lane order of [`Game::lanes`].
    blocked: Vec<bool>,
    /// `configs x anchors`.
    rank: Vec<u32>,
    entry: Option<usize>,
}

fn round_up_f32(x: f64) -> f32 {
    let f = x as f32;
    if (f as f64) < x {
        f.next_up()
    } else {
        f
    }
}

impl Playbook {
    pub fn build(game: &Game, params: &PlaybookParams) -> Playbook {
        let configs = candidate_configs(game, params);
        Self::from_configs(game, configs, params.execution)
    }

    pub fn from_configs(game: &Game, configs: Vec<Vec<Point>>, exec: Execution) -> Playbook {
        let n = game.n();
        let lanes = game.lanes().len();
        let nc = configs.len();
        let blocked: Vec<bool> = exec
            .map(&configs, |c| {
                game.lanes().iter().map(|l| game.any_blocks(c, l.from, l.to)).collect::<Vec<_>>()
            })
            .into_iter()
            .flatten()
            .collect();
        let budgets: Vec<f64> =
            game.lanes().iter().map(|l| game.lane_budget(l.from, l.to)).collect();
        let max_budget = budgets.iter().copied().fold(0.0, f64::max);
        let means: Vec<Point> = configs
            .iter()
            .map(|c| c.iter().fold(Point::ORIGIN, |a, &p| a + p) * (1.0 / c.len() as f64))
            .collect();
        // the mean moves no further than the longest leg, so far means prune pairs
        let dist: Vec<Vec<f32>> = exec.map_range(nc, |a| {
            (0..nc)
                .map(|b| {
                    if means[a].dist(means[b]) > max_budget + 1e-9
                        || nearest_lower_bound(&configs[a], &configs[b]) > max_budget + 1e-9
                    {
                        f32::INFINITY
                    } else {
                        round_up_f32(bottleneck(&configs[a], &configs[b]))
                    }
                })
                .collect()
        });

        let mut rank = vec![UNRANKED; nc * n];
        let mut fresh: Vec<(usize, usize)> = Vec::new();
        for c in 0..nc {
            for s in 0..n {
                let all = (0..n)
                    .filter(|&j| j != s)
                    .all(|j| blocked[c * lanes + game.lane_index(s, j)]);
                if all {
                    rank[c * n + s] = 0;
                    fresh.push((c, s));
                }
            }
        }
        // dmin[c * n + j]: distance from c to the nearest ranked config at anchor j
        let mut dmin = vec![f32::INFINITY; nc * n];
        let mut r = 0u32;
        while !fresh.is_empty() {
            r += 1;
            let updates: Vec<Vec<f32>> = exec.map_range(nc, |c| {
                let mut row = dmin[c * n..(c + 1) * n].to_vec();
                for &(c2, j) in &fresh {
                    row[j] = row[j].min(dist[c][c2]);
                }
                row
            });
            for (c, row) in updates.into_iter().enumerate() {
                dmin[c * n..(c + 1) * n].copy_from_slice(&row);
            }
            let newly: Vec<Vec<usize>> = exec.map_range(nc, |c| {
                (0..n)
                    .filter(|&s| rank[c * n + s] == UNRANKED)
                    .filter(|&s| {
                        (0..n).filter(|&j| j != s).all(|j| {
                            let li = game.lane_index(s, j);
                            blocked[c * lanes + li] || (dmin[c * n + j] as f64) <= budgets[li]
                        })
                    })
                    .collect()
            });
            fresh.clear();
            for (c, ss) in newly.into_iter().enumerate() {
                for s in ss {
                    rank[c * n + s] = r;
                    fresh.push((c, s));
                }
            }
        }
        let entry = (0..nc)
            .filter(|&c| (0..n).all(|s| rank[c * n + s] != UNRANKED))
            .min_by_key(|&c| ((0..n).map(|s| rank[c * n + s]).max().unwrap(), c));
        log::debug!("playbook: {nc} configs, {r} rounds, entry {entry:?}");
        Playbook { n, configs, blocked, rank, entry }
    }

    pub fn proven(&self) -> bool {
        self.entry.is_some()
    }

    pub fn configs(&self) -> &[Vec<Point>] {
        &self.configs
    }

    pub fn rank(&self, config: usize, anchor: usize) -> u32 {
        self.rank[config * self.n + anchor]
    }

    pub fn entry(&self) -> Option<&[Point]> {
        self.entry.map(|e| self.configs[e].as_slice())
    }

    pub fn entry_rank(&self) -> Option<u32> {
        self.entry.map(|e| (0..self.n).map(|s| self.rank(e, s)).max().unwrap())
    }

    fn blocked(&self, game: &Game, c: usize, from: usize, to: usize) -> bool {
        self.blocked[c * game.lanes().len() + game.lane_index(from, to)]
    }

    /// Best answer to the evader running `s -> j` with pursuers at `q`: the
    /// reachable configuration of lowest rank at `j` and the pursuer matching.
    pub fn response(&self, game: &Game, q: &[Point], s: usize, j: usize) -> Option<(usize, Vec<usize>)> {
        let budget = game.lane_budget(s, j);
        let mut best: Option<(u32, f64, usize)> = None;
        for (c, pts) in self.configs.iter().enumerate() {
            let r = self.rank(c, j);
            if r == UNRANKED || best.is_some_and(|(br, _, _)| r > br) {
                continue;
            }
            let b = bottleneck(q, pts);
            if b <= budget && best.map_or(true, |(br, bb, _)| (r, b) < (br, bb)) {
                best = Some((r, b, c));
            }
        }
        best.map(|(_, _, c)| (c, bottleneck_assignment(q, &self.configs[c]).1))
    }

    /// Rank of an arbitrary configuration `q` with the evader at `s`.
    pub fn online_rank(&self, game: &Game, q: &[Point], s: usize) -> Option<u32> {
        let mut worst = 0;
        for j in (0..self.n).filter(|&j| j != s) {
            if game.any_blocks(q, s, j) {
                continue;
            }
            let (c, _) = self.response(game, q, s, j)?;
            worst = worst.max(self.rank(c, j) + 1);
        }
        Some(worst)
    }

    /// Nearest configuration that blocks every lane out of `s`.
    pub fn trap(&self, q: &[Point], s: usize) -> Option<(usize, Vec<usize>)> {
        let c = (0..self.configs.len())
            .filter(|&c| self.rank(c, s) == 0)
            .min_by(|&a, &b| {
                bottleneck(q, &self.configs[a]).total_cmp(&bottleneck(q, &self.configs[b]))
            })?;
        Some((c, bottleneck_assignment(q, &self.configs[c]).1))
    }

    /// Configurations visited when following best responses from the entry.
    pub fn closure(&self, game: &Game) -> usize {
        let Some(e) = self.entry else { return 0 };
        let mut seen = HashSet::new();
        let mut stack: Vec<(usize, usize)> = (0..self.n).map(|s| (s, e)).collect();
        while let Some((s, c)) = stack.pop() {
            if !seen.insert((s, c)) || self.rank(c, s) == 0 {
                continue;
            }
            for j in (0..self.n).filter(|&j| j != s) {
                if self.blocked(game, c, s, j) {
                    continue;
                }
                if let Some((c2, _)) = self.response(game, &self.configs[c], s, j) {
                    stack.push((j, c2));
                }
            }
        }
        seen.iter().map(|&(_, c)| c).collect::<HashSet<_>>().len()
    }

    pub fn summary(&self, game: &Game) -> PlaybookSummary {
        PlaybookSummary {
            configs: self.configs.len(),
            proven: self.proven(),
            entry: self.entry().map(|e| e.to_vec()),
            entry_rank: self.entry_rank(),
            closure_configs: self.closure(game),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::GameConfig;

    #[test]
    fn bottleneck_matches_brute_force() {
        let a = [Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 2.0), Point::new(3.0, 1.0)];
        let b = [Point::new(1.1, 0.0), Point::new(0.0, 2.5), Point::new(0.1, 0.1), Point::new(2.0, 2.0)];
        let mut best = f64::INFINITY;
        let mut perm = [0usize, 1, 2, 3];
        // brute force over all 24 orderings
        fn next_perm(p: &mut [usize]) -> bool {
            let Some(i) = (0..p.len() - 1).rev().find(|&i| p[i] < p[i + 1]) else { return false };
            let j = (i + 1..p.len()).rev().find(|&j| p[j] > p[i]).unwrap();
            p.swap(i, j);
            p[i + 1..].reverse();
            true
        }
        loop {
            let w = (0..4).map(|i| a[i].dist(b[perm[i]])).fold(0.0, f64::max);
            best = best.min(w);
            if !next_perm(&mut perm) {
                break;
            }
        }
        let (v, assign) = bottleneck_assignment(&a, &b);
        assert!((v - best).abs() < 1e-12);
        let w = (0..4).map(|i| a[i].dist(b[assign[i]])).fold(0.0, f64::max);
        assert!((w - best).abs() < 1e-12);
        assert!((bottleneck(&a[..3], &b[..3]) - bottleneck_assignment(&a[..3], &b[..3]).0).abs() < 1e-12);
        assert!((bottleneck(&a[..2], &b[..2]) - bottleneck_assignment(&a[..2], &b[..2]).0).abs() < 1e-12);
    }

    #[test]
    fn pentagon_proven_at_032() {
        let g = Game::new(GameConfig::regular(5, 2, 0.32)).unwrap();
        let pb = Playbook::build(&g, &PlaybookParams::default());
        assert!(pb.proven(), "{} configs", pb.configs().len());
        let entry = pb.entry().unwrap().to_vec();
        for s in 0..5 {
            assert!(pb.online_rank(&g, &entry, s).is_some());
        }
    }

    #[test]
    fn guard_configs_rank_zero_at_their_anchors() {
        let g = Game::new(GameConfig::regular(6, 2, 0.3)).unwrap();
        let pb = Playbook::build(&g, &PlaybookParams::default());
        for (c, pts) in pb.configs().iter().enumerate() {
            for s in 0..6 {
                if pts.iter().any(|p| p.dist(g.anchor(s)) < 1e-12) {
                    assert_eq!(pb.rank(c, s), 0);
                }
            }
        }
    }
}
