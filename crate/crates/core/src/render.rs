//! Deterministic SVG drawings of formations, transitions and episodes.
//!
//! Layers, bottom to top: lanes (dotted), slots (translucent polygons),
//! arrows, anchors (labelled circles). All numbers print with three decimals
//! so identical inputs give byte-identical files.

use std::fmt::Write;

use crate::formation::Formation;
use crate::game::Game;
use crate::geometry::Point;
use crate::sim::Event;
use crate::solver::Strategy;

const SIZE: f64 = 480.0;
const MARGIN: f64 = 40.0;
const PALETTE: [&str; 8] =
    ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

struct Frame {
    lo: Point,
    scale: f64,
}

impl Frame {
    fn new(game: &Game) -> Frame {
        let a = &game.config().anchors;
        let (mut lo, mut hi) = (a[0], a[0]);
        for p in a {
            lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        let span = (hi.x - lo.x).max(hi.y - lo.y).max(1e-9);
        // leave room for slots that bulge past the anchors
        let pad = 0.25 * span;
        let lo = Point::new(lo.x - pad, lo.y - pad);
        Frame { lo, scale: (SIZE - 2.0 * MARGIN) / (span + 2.0 * pad) }
    }

    fn map(&self, p: Point) -> (f64, f64) {
        let x = MARGIN + (p.x - self.lo.x) * self.scale;
        let y = SIZE - MARGIN - (p.y - self.lo.y) * self.scale;
        (x, y)
    }

    fn pt(&self, p: Point) -> String {
        let (x, y) = self.map(p);
        format!("{x:.3},{y:.3}")
    }
}

fn header(out: &mut String, title: &str) {
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    )
    .unwrap();
    writeln!(out, "<title>{title}</title>").unwrap();
    out.push_str(
        "<defs><marker id=\"arrow\" viewBox=\"0 0 10 10\" refX=\"9\" refY=\"5\" markerWidth=\"6\" \
         markerHeight=\"6\" orient=\"auto\"><path d=\"M0,0 L10,5 L0,10 z\" fill=\"#333\"/></marker></defs>\n",
    );
    writeln!(out, r##"<rect width="{SIZE}" height="{SIZE}" fill="#ffffff"/>"##).unwrap();
}

fn lanes(out: &mut String, game: &Game, f: &Frame) {
    out.push_str("<g id=\"lanes\" stroke=\"#999\" stroke-width=\"1\" stroke-dasharray=\"3,3\">\n");
    let n = game.n();
    for a in 0..n {
        for b in a + 1..n {
            let (x1, y1) = f.map(game.anchor(a));
            let (x2, y2) = f.map(game.anchor(b));
            writeln!(out, r#"<line class="lane" x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}"/>"#).unwrap();
        }
    }
    out.push_str("</g>\n");
}

fn slots(out: &mut String, formation: &Formation, f: &Frame) {
    out.push_str("<g id=\"slots\">\n");
    for (i, slot) in formation.slots.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let v = slot.vertices();
        match v.len() {
            0 => {}
            1 => {
                let (x, y) = f.map(v[0]);
                writeln!(
                    out,
                    r#"<circle class="slot" data-slot="{i}" cx="{x:.3}" cy="{y:.3}" r="5" fill="{color}" fill-opacity="0.35" stroke="{color}"/>"#
                )
                .unwrap();
            }
            _ => {
                let pts: Vec<String> = v.iter().map(|&p| f.pt(p)).collect();
                writeln!(
                    out,
                    r#"<polygon class="slot" data-slot="{i}" points="{}" fill="{color}" fill-opacity="0.35" stroke="{color}"/>"#,
                    pts.join(" ")
                )
                .unwrap();
            }
        }
    }
    out.push_str("</g>\n");
}

fn anchors(out: &mut String, game: &Game, f: &Frame, marked: &dyn Fn(usize) -> bool) {
    out.push_str("<g id=\"anchors\" font-family=\"sans-serif\" font-size=\"12\">\n");
    for i in 0..game.n() {
        let (x, y) = f.map(game.anchor(i));
        let (class, fill) = if marked(i) { ("anchor blocked", "#333") } else { ("anchor", "#fff") };
        writeln!(
            out,
            r##"<circle class="{class}" cx="{x:.3}" cy="{y:.3}" r="7" fill="{fill}" stroke="#333"/><text x="{:.3}" y="{:.3}">s{i}</text>"##,
            x + 9.0,
            y - 9.0
        )
        .unwrap();
    }
    out.push_str("</g>\n");
}

fn arrow(out: &mut String, f: &Frame, a: Point, b: Point, class: &str) {
    let (x1, y1) = f.map(a);
    let (x2, y2) = f.map(b);
    writeln!(
        out,
        r##"<line class="{class}" x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}" stroke="#333" stroke-width="1.5" marker-end="url(#arrow)"/>"##
    )
    .unwrap();
}

pub fn formation_svg(game: &Game, formation: &Formation, title: &str) -> String {
    let f = Frame::new(game);
    let mut out = String::new();
    header(&mut out, title);
    lanes(&mut out, game, &f);
    slots(&mut out, formation, &f);
    anchors(&mut out, game, &f, &|i| formation.block_set.contains(i));
    out.push_str("</svg>\n");
    out
}

/// Every stage's slots, with an arrow from each slot's centroid to the
/// centroid of the slot it is assigned to in the next stage.
pub fn transitions_svg(game: &Game, strategy: &Strategy, title: &str) -> String {
    let f = Frame::new(game);
    let mut out = String::new();
    header(&mut out, title);
    lanes(&mut out, game, &f);
    for (k, stage) in strategy.stages.iter().enumerate() {
        writeln!(out, "<g class=\"stage\" data-stage=\"{k}\" opacity=\"0.8\">").unwrap();
        slots(&mut out, &stage.formation, &f);
        out.push_str("</g>\n");
    }
    out.push_str("<g id=\"arrows\">\n");
    for w in strategy.stages.windows(2) {
        let Some(plan) = &w[0].transition else { continue };
        let (a, b) = (w[0].formation.centroids(), w[1].formation.centroids());
        for (i, &j) in plan.assignment.iter().enumerate() {
            if a[i].dist(b[j]) > 1e-9 {
                arrow(&mut out, &f, a[i], b[j], "transition");
            }
        }
    }
    out.push_str("</g>\n");
    let last = &strategy.stages[strategy.stages.len() - 1].formation.block_set;
    anchors(&mut out, game, &f, &|i| last.contains(i));
    out.push_str("</svg>\n");
    out
}

/// One file per stage plus the transitions overview, as `(file name, svg)`.
pub fn strategy_svgs(game: &Game, strategy: &Strategy) -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = strategy
        .stages
        .iter()
        .enumerate()
        .map(|(i, st)| {
            let title = format!("stage {i}: block set {}", st.formation.block_set);
            (format!("formation_{i}.svg"), formation_svg(game, &st.formation, &title))
        })
        .collect();
    out.push(("transitions.svg".into(), transitions_svg(game, strategy, "transitions")));
    out
}

/// Evader path and pursuer legs from an event log.
pub fn episode_svg(game: &Game, events: &[Event], title: &str) -> String {
    let f = Frame::new(game);
    let mut out = String::new();
    header(&mut out, title);
    lanes(&mut out, game, &f);
    out.push_str("<g id=\"legs\">\n");
    for e in events {
        if let Event::LegStart { pursuer, from, to, .. } = e {
            let (x1, y1) = f.map(*from);
            let (x2, y2) = f.map(*to);
            let color = PALETTE[pursuer % PALETTE.len()];
            writeln!(
                out,
                r#"<line class="leg" data-pursuer="{pursuer}" x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}" stroke="{color}" stroke-width="1.5"/>"#
            )
            .unwrap();
        }
    }
    out.push_str("</g>\n<g id=\"evader\">\n");
    let mut capture = None;
    for e in events {
        match e {
            Event::MoveCommit { from, to, .. } => arrow(&mut out, &f, game.anchor(*from), game.anchor(*to), "move"),
            Event::Interception { point, .. } => capture = Some(*point),
            _ => {}
        }
    }
    if let Some(p) = capture {
        let (x, y) = f.map(p);
        writeln!(out, r##"<circle class="capture" cx="{x:.3}" cy="{y:.3}" r="6" fill="none" stroke="#d62728" stroke-width="2"/>"##)
            .unwrap();
    }
    out.push_str("</g>\n");
    let start = events.iter().find_map(|e| match e {
        Event::Start { evader, .. } => Some(*evader),
        _ => None,
    });
    anchors(&mut out, game, &f, &|i| Some(i) == start);
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::GameConfig;
    use crate::solver::decide;

    #[test]
    fn pentagon_panels() {
        let g = Game::new(GameConfig::regular(5, 2, 0.32)).unwrap();
        let v = decide(&g);
        let s = v.strategy().unwrap();
        let files = strategy_svgs(&g, s);
        assert_eq!(files.len(), 4);
        for (name, svg) in &files[..3] {
            assert!(name.starts_with("formation_"));
            assert_eq!(svg.matches("class=\"slot\"").count(), 2);
            assert_eq!(svg.matches("class=\"lane\"").count(), 10);
            assert_eq!(svg.matches("<text").count(), 5);
        }
        assert!(files[3].1.contains("class=\"transition\""));
        assert_eq!(files, strategy_svgs(&g, s));
    }
}
