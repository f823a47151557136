//! Closed-form speed-ratio thresholds for regular layouts and the CSV table.

use std::f64::consts::PI;
use std::fmt::Write;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ThresholdError {
    #[error("n = {0} is outside the supported range")]
    BadN(usize),
    #[error("no k in ({lo}, {hi}) satisfies the inequality")]
    NoRoot { lo: f64, hi: f64 },
    #[error("bisection bracket [{lo}, {hi}] does not straddle a change")]
    BadBracket { lo: f64, hi: f64 },
}

/// Evader wins strictly below `sin((ceil((n-1)/m) - 1) * pi / (2n))`.
pub fn corollary_evader_threshold(n: usize, m: usize) -> f64 {
    let q = (n - 1).div_ceil(m);
    ((q as f64 - 1.0) * PI / (2.0 * n as f64)).sin()
}

/// One pursuer wins at or above `sin(pi/2 - pi/n)`.
pub fn single_pursuer_threshold(n: usize) -> f64 {
    (PI / 2.0 - PI / n as f64).sin()
}

/// Limiting ratio `sin(pi / 2n)` for a single-anchor region with interior.
pub fn min_block_ratio(n: usize) -> f64 {
    (PI / (2.0 * n as f64)).sin()
}

/// Both sides of the inequality pair on `sin(gamma)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LemmaBounds {
    pub lower: f64,
    pub upper: f64,
}

pub fn lemma_bounds(n: usize) -> LemmaBounds {
    let s = min_block_ratio(n);
    let lower = 1.0 / (2.0 * s) - s;
    let upper = (PI / 2.0 + 3.0 * PI / (2.0 * n as f64)).sin().min(1.0);
    LemmaBounds { lower, upper }
}

/// Whether some `gamma` fits between the bounds (with `sin(gamma) <= 1`).
pub fn lemma_limit_feasible(n: usize) -> bool {
    let b = lemma_bounds(n);
    b.lower <= b.upper && b.lower <= 1.0
}

/// Bisection for the first point where `pred` turns true on `[lo, hi]`,
/// assuming `pred(lo)` is false and `pred(hi)` is true.
pub fn bisect<F: FnMut(f64) -> bool>(mut lo: f64, mut hi: f64, tol: f64, mut pred: F) -> f64 {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Slack of the win inequality: non-negative where it holds.
pub fn win_inequality_slack(n: usize, k: f64) -> f64 {
    let nf = n as f64;
    let gamma = PI / nf - k.asin();
    (2.0 * PI / nf).tan() + 1.0 / gamma.tan() - 1.0 / (2.0 * k * min_block_ratio(n))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WinRatio {
    pub value: f64,
    /// The inequality already holds at the lower interval end.
    pub at_lower_bound: bool,
}

/// Smallest `k` in `(sin(pi/2n), sin(pi/n))` where the literal win inequality holds.
pub fn min_win_ratio(n: usize) -> Result<WinRatio, ThresholdError> {
    if n < 5 {
        return Err(ThresholdError::BadN(n));
    }
    let lo = min_block_ratio(n);
    let hi = (PI / n as f64).sin();
    let holds = |k: f64| win_inequality_slack(n, k) >= 0.0;
    if holds(lo) {
        return Ok(WinRatio { value: lo, at_lower_bound: true });
    }
    let top = hi - 1e-12;
    if !holds(top) {
        return Err(ThresholdError::NoRoot { lo, hi });
    }
    Ok(WinRatio { value: bisect(lo, top, 1e-6, holds), at_lower_bound: false })
}

/// Published reference values for the win ratio.
pub fn reference_win_ratio(n: usize) -> Option<f64> {
    match n {
        7 => Some(0.323),
        9 => Some(0.262),
        11 => Some(0.223),
        _ => None,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThresholdRow {
    pub n: usize,
    pub m: usize,
    pub min_block: f64,
    pub min_win_literal: Option<f64>,
    pub at_lower_bound: bool,
    pub reference_min_win: Option<f64>,
    pub corollary: f64,
    pub single_pursuer: f64,
    pub lemma_feasible: bool,
}

/// One row per n; `m` is the smallest count covering a single anchor's lanes
/// in pairs, `ceil((n-1)/2)`.
pub fn threshold_table(n_from: usize, n_to: usize) -> Vec<ThresholdRow> {
    (n_from.max(2)..=n_to)
        .map(|n| {
            let m = (n - 1).div_ceil(2).max(1);
            let w = min_win_ratio(n).ok();
            ThresholdRow {
                n,
                m,
                min_block: min_block_ratio(n),
                min_win_literal: w.map(|w| w.value),
                at_lower_bound: w.is_some_and(|w| w.at_lower_bound),
                reference_min_win: reference_win_ratio(n),
                corollary: corollary_evader_threshold(n, m),
                single_pursuer: single_pursuer_threshold(n),
                lemma_feasible: lemma_limit_feasible(n),
            }
        })
        .collect()
}

pub const TABLE_NOTE: &str = "# min_win_literal is the bisection root of the win inequality taken literally; \
reference_min_win is the published reference value. The two differ because the inequality as stated \
does not fully determine the published numbers. A trailing * marks a root at the interval's lower end.";

pub fn threshold_csv(rows: &[ThresholdRow]) -> String {
    let mut s = String::new();
    s.push_str(TABLE_NOTE);
    s.push('\n');
    s.push_str("n,m,min_block,min_win_literal,reference_min_win,corollary,single_pursuer,lemma_feasible\n");
    let opt = |v: Option<f64>| v.map_or(String::new(), |v| format!("{v:.6}"));
    for r in rows {
        let lit = match r.min_win_literal {
            Some(v) if r.at_lower_bound => format!("{v:.6}*"),
            v => opt(v),
        };
        let reference = r.reference_min_win.map_or(String::new(), |v| format!("{v}"));
        writeln!(
            s,
            "{},{},{:.6},{},{},{:.6},{:.6},{}",
            r.n, r.m, r.min_block, lit, reference, r.corollary, r.single_pursuer, r.lemma_feasible
        )
        .unwrap();
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn corollary_values() {
        assert_abs_diff_eq!(corollary_evader_threshold(5, 2), (PI / 10.0).sin(), epsilon = 1e-12);
        assert_abs_diff_eq!(corollary_evader_threshold(5, 2), 0.30902, epsilon = 1e-5);
        assert_abs_diff_eq!(corollary_evader_threshold(7, 3), 0.22252, epsilon = 1e-5);
        assert_eq!(corollary_evader_threshold(6, 5), 0.0);
        assert_eq!(corollary_evader_threshold(6, 9), 0.0);
    }

    #[test]
    fn single_values() {
        assert_abs_diff_eq!(single_pursuer_threshold(3), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(single_pursuer_threshold(4), 0.70711, epsilon = 1e-5);
        assert!(single_pursuer_threshold(10_000) > 0.9999);
    }

    #[test]
    fn min_block_values() {
        assert_abs_diff_eq!(min_block_ratio(5), 0.30902, epsilon = 1e-5);
        assert_abs_diff_eq!(min_block_ratio(7), 0.22252, epsilon = 1e-5);
        assert_abs_diff_eq!(min_block_ratio(9), 0.17365, epsilon = 1e-5);
    }

    #[test]
    fn lemma_values() {
        assert_abs_diff_eq!(lemma_bounds(7).lower, 2.02446, epsilon = 1e-5);
        assert_abs_diff_eq!(lemma_bounds(9).lower, 2.70574, epsilon = 1e-5);
        assert!(!lemma_limit_feasible(7));
        assert!(!lemma_limit_feasible(9));
        assert!(!lemma_limit_feasible(20));
    }

    #[test]
    fn win_ratio_against_grid_scan() {
        // independent oracle: first grid point where the slack turns non-negative
        for n in [6, 7, 8, 9, 10, 11, 13, 15] {
            let lo = min_block_ratio(n);
            let hi = (PI / n as f64).sin();
            let steps = 200_000;
            let first = (0..=steps)
                .map(|i| lo + (hi - lo) * i as f64 / steps as f64)
                .find(|&k| k < hi && win_inequality_slack(n, k) >= 0.0)
                .unwrap();
            let w = min_win_ratio(n).unwrap();
            assert!(!w.at_lower_bound);
            assert!((w.value - first).abs() <= (hi - lo) / steps as f64 + 2e-6, "n={n}");
        }
    }

    #[test]
    fn win_ratio_frozen() {
        assert_abs_diff_eq!(min_win_ratio(7).unwrap().value, 0.29108, epsilon = 1e-5);
        assert_abs_diff_eq!(min_win_ratio(9).unwrap().value, 0.25210, epsilon = 1e-5);
        assert_abs_diff_eq!(min_win_ratio(11).unwrap().value, 0.21897, epsilon = 1e-5);
        let five = min_win_ratio(5).unwrap();
        assert!(five.at_lower_bound);
        assert_abs_diff_eq!(five.value, min_block_ratio(5), epsilon = 1e-15);
        assert_eq!(min_win_ratio(4), Err(ThresholdError::BadN(4)));
    }

    #[test]
    fn csv_shape() {
        let csv = threshold_csv(&threshold_table(5, 15));
        let lines: Vec<&str> = csv.lines().collect();
        assert!(lines[0].starts_with('#'));
        assert_eq!(lines.len(), 2 + 11);
        assert!(csv.contains(",0.323,"));
        assert!(csv.contains(",0.262,"));
        assert!(csv.contains(",0.223,"));
    }
}
