//! Bowyer–Watson incremental Delaunay triangulation.
//!
//! The convex hull is closed off with "ghost" triangles that share a single
//! vertex at infinity, so no finite super-triangle (and none of its
//! precision trouble) is needed. Points are inserted in ascending index
//! order; afterwards, cocircular quadrilaterals are flipped so that the kept
//! diagonal is the one whose lower endpoint index is smallest.

use alloc::vec::Vec;

use super::predicates::{cocircular, in_circle_strict, orient2d};
use super::{Point, PointSet};
use crate::{Error, Result};

/// Counterclockwise triangles as index triples into the source point set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Triangulation {
    pub triangles: Vec<[usize; 3]>,
}

impl Triangulation {
    pub fn len(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }
}

const GHOST: usize = usize::MAX;
const NONE: usize = usize::MAX;

#[derive(Debug, Clone, Copy)]
struct Tri {
    /// Vertices in counterclockwise order; a ghost triangle stores the
    /// vertex at infinity last, so `v[0] → v[1]` is a hull edge with the
    /// exterior on its left.
    v: [usize; 3],
    /// `adj[k]` is the triangle across the edge opposite `v[k]`,
    /// i.e. across `v[k+1] → v[k+2]`.
    adj: [usize; 3],
    alive: bool,
}

impl Tri {
    fn is_ghost(&self) -> bool {
        self.v[2] == GHOST
    }

    fn edge(&self, k: usize) -> (usize, usize) {
        (self.v[(k + 1) % 3], self.v[(k + 2) % 3])
    }

    fn slot_of(&self, neighbor: usize) -> usize {
        self.adj.iter().position(|&a| a == neighbor).expect("broken adjacency")
    }

    fn slot_of_edge(&self, e0: usize, e1: usize) -> usize {
        (0..3).find(|&k| self.edge(k) == (e0, e1)).expect("broken adjacency")
    }
}

struct Mesh<'a> {
    pts: &'a [Point],
    tris: Vec<Tri>,
    free: Vec<usize>,
    // scratch
    in_cavity: Vec<bool>,
    cavity: Vec<usize>,
}

impl<'a> Mesh<'a> {
    fn point(&self, v: usize) -> Point {
        self.pts[v]
    }

    fn alloc(&mut self, tri: Tri) -> usize {
        if let Some(i) = self.free.pop() {
            self.tris[i] = tri;
            i
        } else {
            self.tris.push(tri);
            self.in_cavity.push(false);
            self.tris.len() - 1
        }
    }

    fn conflicts(&self, t: usize, p: Point) -> bool {
        let tri = &self.tris[t];
        if tri.is_ghost() {
            let (a, b) = (self.point(tri.v[0]), self.point(tri.v[1]));
            let o = orient2d(a, b, p);
            if o > 0.0 {
                return true;
            }
            if o == 0.0 {
                // On the hull line: conflicts only when strictly inside the segment.
                let d = (p[0] - a[0]) * (b[0] - a[0]) + (p[1] - a[1]) * (b[1] - a[1]);
                let len2 = (b[0] - a[0]) * (b[0] - a[0]) + (b[1] - a[1]) * (b[1] - a[1]);
                return d > 0.0 && d < len2;
            }
            false
        } else {
            let [a, b, c] = tri.v.map(|v| self.point(v));
            in_circle_strict(a, b, c, p) || self.contains(t, p)
        }
    }

    /// Closed containment test for a finite triangle.
    fn contains(&self, t: usize, p: Point) -> bool {
        let [a, b, c] = self.tris[t].v.map(|v| self.point(v));
        orient2d(a, b, p) >= 0.0 && orient2d(b, c, p) >= 0.0 && orient2d(c, a, p) >= 0.0
    }

    fn locate(&self, p: Point) -> usize {
        let alive = || self.tris.iter().enumerate().filter(|(_, t)| t.alive);
        alive()
            .find(|(i, t)| !t.is_ghost() && self.contains(*i, p))
            .or_else(|| alive().find(|(i, t)| t.is_ghost() && self.conflicts(*i, p)))
            .map(|(i, _)| i)
            .expect("point outside every triangle and every ghost")
    }

    fn add_to_cavity(&mut self, t: usize) {
        self.in_cavity[t] = true;
        self.cavity.push(t);
    }

    fn insert(&mut self, pi: usize) {
        let p = self.point(pi);
        let seed = self.locate(p);
        self.cavity.clear();
        self.add_to_cavity(seed);
        let mut head = 0;
        while head < self.cavity.len() {
            let t = self.cavity[head];
            head += 1;
            for k in 0..3 {
                let n = self.tris[t].adj[k];
                if !self.in_cavity[n] && self.conflicts(n, p) {
                    self.add_to_cavity(n);
                }
            }
        }

        // Grow the cavity until every boundary edge is strictly visible from p.
        let boundary = loop {
            let mut boundary = Vec::new();
            let mut grow = None;
            'scan: for &t in &self.cavity {
                let tri = self.tris[t];
                for k in 0..3 {
                    let n = tri.adj[k];
                    if self.in_cavity[n] {
                        continue;
                    }
                    let (e0, e1) = tri.edge(k);
                    if e0 != GHOST && e1 != GHOST && orient2d(self.point(e0), self.point(e1), p) <= 0.0 {
                        grow = Some(n);
                        break 'scan;
                    }
                    boundary.push((e0, e1, n));
                }
            }
            match grow {
                Some(n) => self.add_to_cavity(n),
                None => break boundary,
            }
        };

        for &t in &self.cavity {
            self.tris[t].alive = false;
            self.in_cavity[t] = false;
        }
        self.free.extend_from_slice(&self.cavity);

        // Fan the cavity boundary to p.
        let mut created: Vec<(usize, usize, usize)> = Vec::with_capacity(boundary.len());
        for &(e0, e1, outside) in &boundary {
            let tri = Tri { v: [e0, e1, pi], adj: [NONE, NONE, outside], alive: true };
            let id = self.alloc(tri);
            // Cavity slots are being recycled, so match the shared edge by its vertices.
            let slot = self.tris[outside].slot_of_edge(e1, e0);
            self.tris[outside].adj[slot] = id;
            created.push((e0, e1, id));
        }
        for &(e0, e1, id) in &created {
            // Across (e1, p): the new triangle whose boundary edge starts at e1.
            let next = created.iter().find(|c| c.0 == e1).expect("open cavity boundary").2;
            // Across (p, e0): the new triangle whose boundary edge ends at e0.
            let prev = created.iter().find(|c| c.1 == e0).expect("open cavity boundary").2;
            self.tris[id].adj[0] = next;
            self.tris[id].adj[1] = prev;
        }
        for &(_, _, id) in &created {
            let tri = &mut self.tris[id];
            if let Some(g) = tri.v.iter().position(|&v| v == GHOST) {
                let r = (g + 1) % 3;
                tri.v.rotate_left(r);
                tri.adj.rotate_left(r);
            }
        }
    }

    /// Flips cocircular quadrilaterals towards the diagonal with the smallest
    /// lower endpoint. Each flip strictly lowers the sum over edges of their
    /// lower endpoints, so the loop terminates.
    fn break_ties(&mut self) {
        loop {
            let mut flipped = false;
            for t in 0..self.tris.len() {
                if !self.tris[t].alive || self.tris[t].is_ghost() {
                    continue;
                }
                for k in 0..3 {
                    if self.try_flip(t, k) {
                        flipped = true;
                        break;
                    }
                }
            }
            if !flipped {
                break;
            }
        }
    }

    fn try_flip(&mut self, t: usize, k: usize) -> bool {
        let tri = self.tris[t];
        let n = tri.adj[k];
        let nb = self.tris[n];
        if nb.is_ghost() {
            return false;
        }
        let c = tri.v[k];
        let (a, b) = tri.edge(k);
        let j = nb.slot_of(t);
        let d = nb.v[j];
        if c.min(d) >= a.min(b) {
            return false;
        }
        let [pa, pb, pc, pd] = [a, b, c, d].map(|v| self.point(v));
        if !cocircular(pa, pb, pc, pd) {
            return false;
        }
        if orient2d(pc, pa, pd) <= 0.0 || orient2d(pd, pb, pc) <= 0.0 {
            return false;
        }
        // Outer neighbors: t across (b, c) and (c, a); n across (a, d) and (d, b).
        let t_bc = tri.adj[(k + 1) % 3];
        let t_ca = tri.adj[(k + 2) % 3];
        let n_ad = nb.adj[(j + 1) % 3];
        let n_db = nb.adj[(j + 2) % 3];
        debug_assert_eq!(nb.edge((j + 1) % 3), (a, d));
        self.tris[t] = Tri { v: [c, a, d], adj: [n_ad, n, t_ca], alive: true };
        self.tris[n] = Tri { v: [d, b, c], adj: [t_bc, t, n_db], alive: true };
        let s = self.tris[n_ad].slot_of(n);
        self.tris[n_ad].adj[s] = t;
        let s = self.tris[t_bc].slot_of(t);
        self.tris[t_bc].adj[s] = n;
        true
    }
}

/// Delaunay triangulation of a point set.
///
/// Fails with [`Error::DegenerateInput`] when all points are collinear.
pub fn delaunay(points: &PointSet) -> Result<Triangulation> {
    let pts = points.coords();
    let n = pts.len();
    if n < 3 {
        return Err(Error::DegenerateInput(alloc::format!("need at least 3 points, got {n}")));
    }
    let (i0, i1) = (0, 1);
    let third = (2..n)
        .find(|&k| orient2d(pts[i0], pts[i1], pts[k]) != 0.0)
        .ok_or_else(|| Error::DegenerateInput("all points are collinear".into()))?;
    let (a, b) = if orient2d(pts[i0], pts[i1], pts[third]) > 0.0 { (i0, i1) } else { (i1, i0) };
    let c = third;

    let mut mesh = Mesh {
        pts,
        tris: Vec::with_capacity(4 * n),
        free: Vec::new(),
        in_cavity: Vec::with_capacity(4 * n),
        cavity: Vec::new(),
    };
    // One finite triangle (0) and one ghost per edge: ghost k lies across the
    // edge opposite vertex k of the finite triangle.
    let v = [a, b, c];
    mesh.alloc(Tri { v, adj: [1, 2, 3], alive: true });
    for k in 0..3 {
        let (x, y) = (v[(k + 1) % 3], v[(k + 2) % 3]);
        // Ghost (y, x, ∞): edge opposite y is (x, ∞), shared with the ghost
        // whose hull edge starts at x; edge opposite x is (∞, y).
        let after = 1 + (k + 2) % 3; // ghost on edge (z, x) i.e. starting at x
        let before = 1 + (k + 1) % 3;
        mesh.alloc(Tri { v: [y, x, GHOST], adj: [after, before, 0], alive: true });
    }

    for p in (0..n).filter(|&p| p != a && p != b && p != c) {
        mesh.insert(p);
    }
    mesh.break_ties();

    let triangles = mesh
        .tris
        .iter()
        .filter(|t| t.alive && !t.is_ghost())
        .map(|t| t.v)
        .collect();
    Ok(Triangulation { triangles })
}

/// Number of (triangle, point) pairs where the point lies strictly inside the
/// triangle's circumcircle beyond the in-circle tolerance. Brute force.
#[cfg(test)]
pub(crate) fn empty_circumcircle_violations(points: &PointSet, tri: &Triangulation) -> usize {
    let pts = points.coords();
    let mut count = 0;
    for t in &tri.triangles {
        let [a, b, c] = t.map(|v| pts[v]);
        for (i, &p) in pts.iter().enumerate() {
            if t.contains(&i) {
                continue;
            }
            if in_circle_strict(a, b, c, p) {
                count += 1;
            }
        }
    }
    count
}
