//! Reference implementations used to check the library. None of them call
//! into the library's own geometry code.

#![allow(dead_code)]

use std::f64::consts::{FRAC_PI_2, PI};

use geonorm::{Rng, RotatedBox};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Corners of a box from its parameters, computed directly.
pub fn corners(cx: f64, cy: f64, h: f64, w: f64, theta: f64) -> [(f64, f64); 4] {
    let (s, c) = theta.sin_cos();
    [(-0.5, -0.5), (0.5, -0.5), (0.5, 0.5), (-0.5, 0.5)].map(|(u, v)| {
        let (dx, dy) = (u * w, v * h);
        (cx + dx * c - dy * s, cy + dx * s + dy * c)
    })
}

/// Rectangle parameters `(cx, cy, h, w, theta)` from four corners in
/// cyclic order: longer edge gives `w` and `theta`, in `[-pi/2, pi/2)`.
pub fn refit(p: [(f64, f64); 4]) -> (f64, f64, f64, f64, f64) {
    let cx = p.iter().map(|q| q.0).sum::<f64>() / 4.0;
    let cy = p.iter().map(|q| q.1).sum::<f64>() / 4.0;
    let e0 = (p[1].0 - p[0].0, p[1].1 - p[0].1);
    let e1 = (p[2].0 - p[1].0, p[2].1 - p[1].1);
    let (l0, l1) = (e0.0.hypot(e0.1), e1.0.hypot(e1.1));
    let (long, h, w) = if l0 >= l1 { (e0, l1, l0) } else { (e1, l0, l1) };
    let mut t = long.1.atan2(long.0);
    while t >= FRAC_PI_2 {
        t -= PI;
    }
    while t < -FRAC_PI_2 {
        t += PI;
    }
    (cx, cy, h, w, t)
}

/// Angle difference modulo pi.
pub fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(PI);
    d.min(PI - d)
}

pub fn inside(b: &RotatedBox, x: f64, y: f64) -> bool {
    let (s, c) = b.theta().sin_cos();
    let (dx, dy) = (x - b.cx(), y - b.cy());
    let u = dx * c + dy * s;
    let v = -dx * s + dy * c;
    u.abs() <= 0.5 * b.w() && v.abs() <= 0.5 * b.h()
}

/// Monte-Carlo IoU over the joint bounding rectangle.
pub fn mc_iou(a: &RotatedBox, b: &RotatedBox, n: usize, rng: &mut Rng) -> f64 {
    let pts: Vec<(f64, f64)> = [a, b].iter().flat_map(|r| corners(r.cx(), r.cy(), r.h(), r.w(), r.theta())).collect();
    let x0 = pts.iter().map(|p| p.0).fold(f64::MAX, f64::min);
    let x1 = pts.iter().map(|p| p.0).fold(f64::MIN, f64::max);
    let y0 = pts.iter().map(|p| p.1).fold(f64::MAX, f64::min);
    let y1 = pts.iter().map(|p| p.1).fold(f64::MIN, f64::max);
    let (mut both, mut either) = (0usize, 0usize);
    for _ in 0..n {
        let (x, y) = (rng.uniform(x0, x1), rng.uniform(y0, y1));
        let (ia, ib) = (inside(a, x, y), inside(b, x, y));
        both += (ia && ib) as usize;
        either += (ia || ib) as usize;
    }
    if either == 0 {
        0.0
    } else {
        both as f64 / either as f64
    }
}

/// IoU of two axis-aligned boxes given as `(x0, y0, x1, y1)`.
pub fn aabb_iou(a: (f64, f64, f64, f64), b: (f64, f64, f64, f64)) -> f64 {
    let ix = (a.2.min(b.2) - a.0.max(b.0)).max(0.0);
    let iy = (a.3.min(b.3) - a.1.max(b.1)).max(0.0);
    let inter = ix * iy;
    let area = |r: (f64, f64, f64, f64)| (r.2 - r.0) * (r.3 - r.1);
    inter / (area(a) + area(b) - inter)
}

/// Smallest rectangle area enclosing `pts`, by sweeping the orientation
/// over a quarter turn and refining around the best step.
pub fn min_rect_area_sweep(pts: &[(f64, f64)]) -> f64 {
    let area_at = |t: f64| {
        let (s, c) = t.sin_cos();
        let us = pts.iter().map(|p| p.0 * c + p.1 * s);
        let vs = pts.iter().map(|p| -p.0 * s + p.1 * c);
        let (u0, u1) = us.fold((f64::MAX, f64::MIN), |(lo, hi), u| (lo.min(u), hi.max(u)));
        let (v0, v1) = vs.fold((f64::MAX, f64::MIN), |(lo, hi), v| (lo.min(v), hi.max(v)));
        (u1 - u0) * (v1 - v0)
    };
    let steps = 20_000;
    let step = FRAC_PI_2 / steps as f64;
    let best = (0..steps).map(|k| k as f64 * step).min_by(|a, b| area_at(*a).total_cmp(&area_at(*b))).unwrap();
    // golden-section refinement inside the bracketing steps
    let (mut lo, mut hi) = (best - step, best + step);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..100 {
        let m1 = hi - g * (hi - lo);
        let m2 = lo + g * (hi - lo);
        if area_at(m1) < area_at(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    area_at(0.5 * (lo + hi)).min(area_at(best))
}

/// Size of a maximum bipartite matching over `edges[i]` (allowed right
/// vertices of left vertex `i`), by exhaustive search.
pub fn max_matching(edges: &[Vec<usize>], n_right: usize) -> usize {
    fn go(i: usize, edges: &[Vec<usize>], used: &mut Vec<bool>) -> usize {
        if i == edges.len() {
            return 0;
        }
        let mut best = go(i + 1, edges, used);
        for &j in &edges[i] {
            if !used[j] {
                used[j] = true;
                best = best.max(1 + go(i + 1, edges, used));
                used[j] = false;
            }
        }
        best
    }
    go(0, edges, &mut vec![false; n_right])
}

/// Pearson chi-square p-value of `counts` against a uniform distribution.
pub fn chi_square_uniform_p(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    let e = n as f64 / counts.len() as f64;
    let stat: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
    1.0 - ChiSquared::new((counts.len() - 1) as f64).unwrap().cdf(stat)
}

/// Maps a point through a scale unit and orientation unit as pixel
/// positions move on the feature map (canvas `height` x `width`).
pub fn branch_point(snu_factor: f64, onu: &str, height: f64, width: f64, x: f64, y: f64) -> (f64, f64) {
    let (x, y) = (x * snu_factor, y * snu_factor);
    let (hs, ws) = (height * snu_factor, width * snu_factor);
    match onu {
        "o" => (x, y),
        // clockwise quarter turn: column index becomes Hs - row
        "o_r" => (hs - y, x),
        // rows reversed
        "o_f" => (x, hs - y),
        // quarter turn followed by reversing the new rows
        "o_rf" => (hs - y, ws - x),
        _ => unreachable!(),
    }
}
