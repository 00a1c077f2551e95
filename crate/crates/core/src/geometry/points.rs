use alloc::format;
use alloc::vec::Vec;

use crate::{Error, Result};

pub type Point = [f64; 2];

/// Points closer than this (absolute distance) are rejected as duplicates.
pub const DUPLICATE_DISTANCE: f64 = 1e-12;

/// Measurement positions inside an axis-aligned domain.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    coords: Vec<Point>,
    lo: Point,
    hi: Point,
}

impl PointSet {
    pub fn new(coords: Vec<Point>, lo: Point, hi: Point) -> Result<Self> {
        if coords.len() < 3 {
            return Err(Error::DegenerateInput(format!("need at least 3 points, got {}", coords.len())));
        }
        if !(lo.iter().chain(&hi).all(|v| v.is_finite()) && lo[0] <= hi[0] && lo[1] <= hi[1]) {
            return Err(Error::InvalidPoints(format!("invalid domain {lo:?}..{hi:?}")));
        }
        for (i, p) in coords.iter().enumerate() {
            if !(p[0].is_finite() && p[1].is_finite()) {
                return Err(Error::InvalidPoints(format!("point {i} is not finite")));
            }
            if p[0] < lo[0] || p[0] > hi[0] || p[1] < lo[1] || p[1] > hi[1] {
                return Err(Error::InvalidPoints(format!("point {i} = {p:?} lies outside the domain")));
            }
        }
        if let Some((a, b)) = find_duplicate(&coords) {
            return Err(Error::InvalidPoints(format!("points {a} and {b} coincide")));
        }
        Ok(Self { coords, lo, hi })
    }

    /// Uses the bounding box of the points as the domain.
    pub fn from_coords(coords: Vec<Point>) -> Result<Self> {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in &coords {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        Self::new(coords, lo, hi)
    }

    pub fn coords(&self) -> &[Point] {
        &self.coords
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn domain(&self) -> (Point, Point) {
        (self.lo, self.hi)
    }

    /// Largest side of the domain box; used to scale predicate tolerances.
    pub fn extent(&self) -> f64 {
        (self.hi[0] - self.lo[0]).max(self.hi[1] - self.lo[1])
    }

    pub fn into_coords(self) -> Vec<Point> {
        self.coords
    }
}

fn find_duplicate(coords: &[Point]) -> Option<(usize, usize)> {
    let mut order: Vec<usize> = (0..coords.len()).collect();
    order.sort_by(|&a, &b| coords[a][0].total_cmp(&coords[b][0]).then(a.cmp(&b)));
    for (pos, &a) in order.iter().enumerate() {
        for &b in &order[pos + 1..] {
            if coords[b][0] - coords[a][0] >= DUPLICATE_DISTANCE {
                break;
            }
            let dx = coords[b][0] - coords[a][0];
            let dy = coords[b][1] - coords[a][1];
            if libm::sqrt(dx * dx + dy * dy) < DUPLICATE_DISTANCE {
                return Some((a.min(b), a.max(b)));
            }
        }
    }
    None
}
