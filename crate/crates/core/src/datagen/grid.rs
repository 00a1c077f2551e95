use crate::geometry::Point;

use super::Boundary;

/// Regular `n × n` grid, node `j * n + i` at `(lo + i·h, lo + j·h)`.
///
/// Periodic grids omit the duplicate node at the upper end (`h = L / n`);
/// Dirichlet grids include both boundary lines (`h = L / (n − 1)`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FineGrid {
    pub n: usize,
    pub lo: Point,
    pub h: f64,
    pub boundary: Boundary,
}

impl FineGrid {
    pub fn new(n: usize, lo: Point, hi: Point, boundary: Boundary) -> Self {
        let side = hi[0] - lo[0];
        let h = match boundary {
            Boundary::Periodic => side / n as f64,
            Boundary::Dirichlet => side / (n - 1) as f64,
        };
        Self { n, lo, h, boundary }
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn coord(&self, idx: usize) -> Point {
        let (i, j) = (idx % self.n, idx / self.n);
        [self.lo[0] + i as f64 * self.h, self.lo[1] + j as f64 * self.h]
    }

    pub fn is_boundary(&self, idx: usize) -> bool {
        if self.boundary == Boundary::Periodic {
            return false;
        }
        let (i, j) = (idx % self.n, idx / self.n);
        i == 0 || j == 0 || i == self.n - 1 || j == self.n - 1
    }

    /// Node indices eligible for observation: all of them on periodic grids,
    /// the interior on Dirichlet grids.
    pub fn observable(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&k| !self.is_boundary(k))
    }
}
