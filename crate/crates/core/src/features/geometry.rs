use serde::{Deserialize, Serialize};

/// Below this norm of `v_r × v_s` two lines are treated as parallel.
const PARALLEL_EPS: f64 = 1e-12;

/// A line in `(t, ratio_x, ratio_y)` space through `point` with direction
/// `(1, m_x, m_y)`; lines are graphs over time and never vertical.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Line3D {
    pub point: [f64; 3],
    pub slopes: [f64; 2],
}

impl Line3D {
    pub fn new(point: [f64; 3], m_x: f64, m_y: f64) -> Self {
        Line3D {
            point,
            slopes: [m_x, m_y],
        }
    }

    pub fn direction(&self) -> [f64; 3] {
        [1.0, self.slopes[0], self.slopes[1]]
    }

    pub fn at(&self, s: f64) -> [f64; 3] {
        let d = self.direction();
        [
            self.point[0] + s * d[0],
            self.point[1] + s * d[1],
            self.point[2] + s * d[2],
        ]
    }
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

/// Shortest distance between two lines: `|[v_r, v_s, P_rP_s]| / |v_r × v_s|`
/// for non-parallel lines, otherwise the distance from `P_s` to line `r`.
pub fn skew_distance(r: &Line3D, s: &Line3D) -> f64 {
    let (vr, vs) = (r.direction(), s.direction());
    let rs = sub(s.point, r.point);
    let n = cross(vr, vs);
    let n_norm = norm(n);
    if n_norm > PARALLEL_EPS {
        dot(n, rs).abs() / n_norm
    } else {
        norm(cross(rs, vr)) / norm(vr)
    }
}
