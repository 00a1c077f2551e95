//! Heatmaps of nodal fields as binary PPM images.
//!
//! Each pixel of a square canvas takes the value of the nearest node. Values
//! are mapped linearly onto a piecewise-linear colormap through the stops
//! dark blue `(0,0,130)`, blue `(0,90,255)`, white `(255,255,255)`,
//! orange `(255,150,0)` and dark red `(150,0,0)` at 0, ¼, ½, ¾ and 1.

use std::path::Path;

use crate::error::Result;
use crate::format::write_atomic;

pub const CANVAS: usize = 256;

const STOPS: [[f64; 3]; 5] =
    [[0.0, 0.0, 130.0], [0.0, 90.0, 255.0], [255.0, 255.0, 255.0], [255.0, 150.0, 0.0], [150.0, 0.0, 0.0]];

/// Colormap value for `s` in `[0, 1]` (clamped).
pub fn colormap(s: f64) -> [u8; 3] {
    let s = if s.is_finite() { s.clamp(0.0, 1.0) } else { 0.0 };
    let x = s * (STOPS.len() - 1) as f64;
    let i = (x.floor() as usize).min(STOPS.len() - 2);
    let f = x - i as f64;
    let mut out = [0u8; 3];
    for c in 0..3 {
        out[c] = (STOPS[i][c] + f * (STOPS[i + 1][c] - STOPS[i][c])).round() as u8;
    }
    out
}

/// Index of the nearest node for every pixel, row-major from the top-left
/// corner (`y` at its maximum).
pub fn nearest_node_map(coords: &[[f64; 2]], lo: [f64; 2], hi: [f64; 2], size: usize) -> Vec<usize> {
    let mut map = Vec::with_capacity(size * size);
    for row in 0..size {
        let y = hi[1] - (row as f64 + 0.5) / size as f64 * (hi[1] - lo[1]);
        for col in 0..size {
            let x = lo[0] + (col as f64 + 0.5) / size as f64 * (hi[0] - lo[0]);
            let mut best = (f64::INFINITY, 0);
            for (i, p) in coords.iter().enumerate() {
                let d = (p[0] - x) * (p[0] - x) + (p[1] - y) * (p[1] - y);
                if d < best.0 {
                    best = (d, i);
                }
            }
            map.push(best.1);
        }
    }
    map
}

/// Encodes per-node `values` as a P6 image using a pixel→node `map`.
pub fn render_ppm(map: &[usize], size: usize, values: &[f64], range: (f64, f64)) -> Vec<u8> {
    let mut out = format!("P6\n{size} {size}\n255\n").into_bytes();
    let span = range.1 - range.0;
    for &node in map {
        let s = if span > 0.0 { (values[node] - range.0) / span } else { 0.5 };
        out.extend_from_slice(&colormap(s));
    }
    out
}

pub fn write_ppm(path: &Path, map: &[usize], size: usize, values: &[f64], range: (f64, f64)) -> Result<()> {
    write_atomic(path, &render_ppm(map, size, values, range))
}

/// Per-node scalar for plotting: the value itself for scalar fields, the
/// Euclidean magnitude otherwise.
pub fn nodal_scalar(state: &[f64], state_dim: usize) -> Vec<f64> {
    if state_dim == 1 {
        return state.to_vec();
    }
    state.chunks_exact(state_dim).map(|u| u.iter().map(|v| v * v).sum::<f64>().sqrt()).collect()
}

pub fn value_range<'a>(fields: impl IntoIterator<Item = &'a [f64]>) -> (f64, f64) {
    fields
        .into_iter()
        .flatten()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}
