//! Built-in multipatch domains.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::bspline::KnotVector;
use crate::geometry::{bilinear_patch, PatchGeometry, Point, TensorSpace2D};
#[allow(unused_imports)]
use num_traits::Float;

pub const BUILTIN_NAMES: [&str; 4] = ["square2", "square4", "square12", "quartercircle3"];

pub fn builtin(name: &str) -> Option<Vec<PatchGeometry>> {
    match name {
        "square2" => Some(square2()),
        "square4" => Some(square4()),
        "square12" => Some(square12()),
        "quartercircle3" => Some(quartercircle3()),
        _ => None,
    }
}

fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> PatchGeometry {
    bilinear_patch([x0, y0], [x1, y0], [x0, y1], [x1, y1])
}

/// `[0,1]²` and `[1,2]×[0,1]`.
pub fn square2() -> Vec<PatchGeometry> {
    vec![rect(0.0, 0.0, 1.0, 1.0), rect(1.0, 0.0, 2.0, 1.0)]
}

/// `[0,2]²` split into four unit squares.
pub fn square4() -> Vec<PatchGeometry> {
    vec![
        rect(0.0, 0.0, 1.0, 1.0),
        rect(1.0, 0.0, 2.0, 1.0),
        rect(0.0, 1.0, 1.0, 2.0),
        rect(1.0, 1.0, 2.0, 2.0),
    ]
}

/// `[0,1]²` split into 4×3 bilinear quadrilaterals whose interior vertices
/// are shifted off the uniform grid by up to 0.02.
pub fn square12() -> Vec<PatchGeometry> {
    let vertex = |i: usize, j: usize| -> Point {
        let (mut x, mut y) = (i as f64 / 4.0, j as f64 / 3.0);
        if (1..4).contains(&i) && (1..3).contains(&j) {
            x += 0.02 * (((i + 2 * j) % 3) as f64 - 1.0);
            y += 0.02 * (((2 * i + j) % 3) as f64 - 1.0);
        }
        [x, y]
    };
    let mut patches = Vec::with_capacity(12);
    for j in 0..3 {
        for i in 0..4 {
            patches.push(bilinear_patch(
                vertex(i, j),
                vertex(i + 1, j),
                vertex(i, j + 1),
                vertex(i + 1, j + 1),
            ));
        }
    }
    patches
}

/// Biquadratic rational patch from its four sides. Each side is given by
/// its middle control point and weight; corners have weight 1. The interior
/// control point is the bilinearly blended (Coons) combination.
fn quadratic_patch(corners: [Point; 4], mids: [(Point, f64); 4]) -> PatchGeometry {
    // corners: sw, se, nw, ne; mids: south, north, west, east
    let [sw, se, nw, ne] = corners;
    let [s, n, w, e] = mids;
    let mut h = [[[0.0f64; 3]; 3]; 3];
    let put = |h: &mut [[[f64; 3]; 3]; 3], i: usize, j: usize, p: Point, wt: f64| {
        h[i][j] = [p[0] * wt, p[1] * wt, wt];
    };
    put(&mut h, 0, 0, sw, 1.0);
    put(&mut h, 2, 0, se, 1.0);
    put(&mut h, 0, 2, nw, 1.0);
    put(&mut h, 2, 2, ne, 1.0);
    put(&mut h, 1, 0, s.0, s.1);
    put(&mut h, 1, 2, n.0, n.1);
    put(&mut h, 0, 1, w.0, w.1);
    put(&mut h, 2, 1, e.0, e.1);
    for c in 0..3 {
        h[1][1][c] = 0.5 * (h[1][0][c] + h[1][2][c] + h[0][1][c] + h[2][1][c])
            - 0.25 * (h[0][0][c] + h[2][0][c] + h[0][2][c] + h[2][2][c]);
    }
    let mut cps = Vec::with_capacity(9);
    let mut ws = Vec::with_capacity(9);
    for j in 0..3 {
        for (i, _) in h.iter().enumerate() {
            let q = h[i][j];
            cps.push([q[0] / q[2], q[1] / q[2]]);
            ws.push(q[2]);
        }
    }
    let kv = KnotVector::uniform(2, 1).expect("Bernstein vector");
    PatchGeometry::new(TensorSpace2D::new(kv.clone(), kv), cps, Some(ws)).expect("3x3 net")
}

fn mid(a: Point, b: Point) -> (Point, f64) {
    ([0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])], 1.0)
}

/// Unit quarter disk in three biquadratic NURBS patches meeting at the
/// interior vertex `(0.4, 0.4)`. The circular arc is split at 45°.
pub fn quartercircle3() -> Vec<PatchGeometry> {
    let o = [0.0, 0.0];
    let m1 = [0.5, 0.0];
    let m2 = [0.0, 0.5];
    let a = [1.0, 0.0];
    let b = [FRAC_1_SQRT_2, FRAC_1_SQRT_2];
    let c = [0.0, 1.0];
    let v = [0.4, 0.4];
    let half = PI / 8.0;
    let w = half.cos();
    let arc = |theta: f64| ([theta.cos() / w, theta.sin() / w], w);
    vec![
        quadratic_patch([o, m1, m2, v], [mid(o, m1), mid(m2, v), mid(o, m2), mid(m1, v)]),
        quadratic_patch([m1, a, v, b], [mid(m1, a), mid(v, b), mid(m1, v), arc(half)]),
        quadratic_patch([v, b, m2, c], [mid(v, b), mid(m2, c), mid(v, m2), arc(3.0 * half)]),
    ]
}
