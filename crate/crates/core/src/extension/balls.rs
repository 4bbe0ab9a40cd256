//! Sums and maxima over open balls `|y - x| < rho` on the periodic grid.
//!
//! A ball is described row by row: for each row offset the half-width of its chord.
//! Offsets are taken in the minimum-image range so each node is counted once.

use crate::grid::GridSpec;
use std::collections::VecDeque;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Ball {
    /// Every node of the box.
    Global,
    /// `(row offset, chord half-width)`; a half-width `>= n/2` covers the whole row.
    Rows(Vec<(i64, usize)>),
}

impl Ball {
    /// Nodes `y` with minimum-image distance `|y - x| < rho`.
    pub fn open(spec: &GridSpec, rho: f64) -> Ball {
        let n = spec.n() as i64;
        let r = rho / spec.h();
        // Largest integer j with j < r.
        let reach = |r2: f64| -> Option<i64> {
            if r2 <= 0.0 {
                return None;
            }
            let s = r2.sqrt();
            let mut j = s.ceil() as i64 - 1;
            while (((j + 1) * (j + 1)) as f64) < r2 {
                j += 1;
            }
            while j >= 0 && (j * j) as f64 >= r2 {
                j -= 1;
            }
            (j >= 0).then_some(j)
        };
        let r2 = r * r;
        let jmax = reach(r2).unwrap_or(0);
        if spec.dim() == 1 {
            if 2 * jmax + 1 >= n {
                return Ball::Global;
            }
            return Ball::Rows(vec![(0, jmax as usize)]);
        }
        let lo = (-jmax).max(-n / 2);
        let hi = jmax.min(n / 2 - 1);
        let mut rows = Vec::new();
        let mut all_full = hi - lo + 1 == n;
        for di in lo..=hi {
            if let Some(w) = reach(r2 - (di * di) as f64) {
                if 2 * w + 1 < n {
                    all_full = false;
                }
                rows.push((di, w as usize));
            } else {
                all_full = false;
            }
        }
        if all_full {
            Ball::Global
        } else {
            Ball::Rows(rows)
        }
    }

    /// Number of nodes in the ball.
    pub fn count(&self, spec: &GridSpec) -> usize {
        let n = spec.n();
        match self {
            Ball::Global => spec.len(),
            Ball::Rows(rows) => rows.iter().map(|&(_, w)| (2 * w + 1).min(n)).sum(),
        }
    }
}

fn row_window_sums(row: &[f64], w: usize, out: &mut [f64]) {
    let n = row.len();
    if 2 * w + 1 >= n {
        let total: f64 = row.iter().sum();
        out.iter_mut().for_each(|o| *o = total);
        return;
    }
    // Periodic prefix sums over the tripled index range.
    let mut prefix = vec![0.0; 3 * n + 1];
    for i in 0..3 * n {
        prefix[i + 1] = prefix[i] + row[i % n];
    }
    for (j, o) in out.iter_mut().enumerate() {
        let a = n + j - w;
        let b = n + j + w + 1;
        *o = prefix[b] - prefix[a];
    }
}

fn row_window_max(row: &[f64], w: usize, out: &mut [f64]) {
    let n = row.len();
    if 2 * w + 1 >= n {
        let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        out.iter_mut().for_each(|o| *o = m);
        return;
    }
    let len = n + 2 * w;
    let at = |k: usize| row[(k + n - w) % n];
    let mut dq: VecDeque<usize> = VecDeque::new();
    for k in 0..len {
        while let Some(&b) = dq.back() {
            if at(b) <= at(k) {
                dq.pop_back();
            } else {
                break;
            }
        }
        dq.push_back(k);
        if k >= 2 * w {
            let start = k - 2 * w;
            while *dq.front().unwrap() < start {
                dq.pop_front();
            }
            out[start] = at(*dq.front().unwrap());
        }
    }
}

fn combine(
    spec: &GridSpec,
    vals: &[f64],
    ball: &Ball,
    row_op: fn(&[f64], usize, &mut [f64]),
    init: f64,
    merge: fn(f64, f64) -> f64,
) -> Vec<f64> {
    let n = spec.n();
    let rows = if spec.dim() == 1 { 1 } else { n };
    let Ball::Rows(chords) = ball else {
        unreachable!()
    };
    let mut widths: Vec<usize> = chords.iter().map(|&(_, w)| w).collect();
    widths.sort_unstable();
    widths.dedup();
    // Row-windowed tables, one per distinct chord width.
    let tables: Vec<Vec<f64>> = widths
        .iter()
        .map(|&w| {
            let mut t = vec![0.0; vals.len()];
            for i in 0..rows {
                row_op(&vals[i * n..(i + 1) * n], w, &mut t[i * n..(i + 1) * n]);
            }
            t
        })
        .collect();
    let mut out = vec![init; vals.len()];
    for &(di, w) in chords {
        let t = &tables[widths.binary_search(&w).unwrap()];
        for i in 0..rows {
            let src = (i as i64 + di).rem_euclid(rows as i64) as usize;
            let dst = &mut out[i * n..(i + 1) * n];
            let s = &t[src * n..(src + 1) * n];
            for (d, &v) in dst.iter_mut().zip(s) {
                *d = merge(*d, v);
            }
        }
    }
    out
}

/// `sum_{y in B(x)} vals(y)` at every node.
pub fn ball_sum(spec: &GridSpec, vals: &[f64], ball: &Ball) -> Vec<f64> {
    match ball {
        Ball::Global => vec![vals.iter().sum(); vals.len()],
        _ => combine(spec, vals, ball, row_window_sums, 0.0, |a, b| a + b),
    }
}

/// `max_{y in B(x)} vals(y)` at every node.
pub fn ball_max(spec: &GridSpec, vals: &[f64], ball: &Ball) -> Vec<f64> {
    match ball {
        Ball::Global => {
            let m = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            vec![m; vals.len()]
        }
        _ => combine(spec, vals, ball, row_window_max, f64::NEG_INFINITY, f64::max),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    fn brute(spec: &GridSpec, vals: &[f64], rho: f64, max: bool) -> Vec<f64> {
        let n = spec.n() as i64;
        let h = spec.h();
        (0..spec.len())
            .map(|x| {
                let ix = spec.unflatten(x);
                let mut acc = if max { f64::NEG_INFINITY } else { 0.0 };
                for y in 0..spec.len() {
                    let iy = spec.unflatten(y);
                    let mut d2 = 0.0;
                    for a in 0..spec.dim() {
                        let mut k = (iy[a] as i64 - ix[a] as i64).rem_euclid(n);
                        if k >= n / 2 {
                            k -= n;
                        }
                        d2 += (k as f64 * h).powi(2);
                    }
                    if d2.sqrt() < rho {
                        acc = if max { acc.max(vals[y]) } else { acc + vals[y] };
                    }
                }
                acc
            })
            .collect()
    }

    #[test]
    fn matches_brute_force() {
        for spec in [make_grid(1, 2.0, 16).unwrap(), make_grid(2, 2.0, 16).unwrap()] {
            let vals: Vec<f64> = (0..spec.len()).map(|i| ((i * 37) % 11) as f64 - 3.0).collect();
            for rho in [0.1, 0.25, 0.3, 0.9, 1.7, 2.5, 3.0, 10.0] {
                let ball = Ball::open(&spec, rho);
                let s = ball_sum(&spec, &vals, &ball);
                let m = ball_max(&spec, &vals, &ball);
                let bs = brute(&spec, &vals, rho, false);
                let bm = brute(&spec, &vals, rho, true);
                for i in 0..spec.len() {
                    assert!((s[i] - bs[i]).abs() < 1e-12, "sum d={} rho={rho}", spec.dim());
                    assert_eq!(m[i], bm[i], "max d={} rho={rho}", spec.dim());
                }
                let ones = vec![1.0; spec.len()];
                assert_eq!(ball_sum(&spec, &ones, &ball)[0] as usize, ball.count(&spec));
            }
        }
    }
}
