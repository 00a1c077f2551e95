use alloc::format;
use alloc::vec::Vec;

use super::{Point, PointSet, Triangulation};
use crate::{Error, Result};

/// Undirected neighbor graph over measurement positions, stored as
/// compressed sparse rows of directed edges.
///
/// Each neighbor list is ordered by displacement `x_j − x_i`
/// (lexicographically on `(dx, dy)`). The order depends only on geometry,
/// not on node labels, so anything accumulated along it is unchanged by
/// relabeling or translation.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    coords: Vec<Point>,
    offsets: Vec<usize>,
    targets: Vec<usize>,
    features: Vec<Point>,
}

impl Graph {
    /// Builds a graph from an undirected edge list. Duplicates are merged and
    /// both directions are inserted; self-loops are rejected.
    pub fn from_edges(coords: Vec<Point>, edges: &[(usize, usize)]) -> Result<Self> {
        let n = coords.len();
        let mut lists: Vec<Vec<usize>> = alloc::vec![Vec::new(); n];
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::ShapeMismatch(format!("edge ({a}, {b}) out of range for {n} nodes")));
            }
            if a == b {
                return Err(Error::ShapeMismatch(format!("self-loop at node {a}")));
            }
            lists[a].push(b);
            lists[b].push(a);
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::new();
        let mut features = Vec::new();
        offsets.push(0);
        for (i, list) in lists.iter_mut().enumerate() {
            list.sort_unstable();
            list.dedup();
            let disp = |j: usize| [coords[j][0] - coords[i][0], coords[j][1] - coords[i][1]];
            list.sort_by(|&a, &b| {
                let (da, db) = (disp(a), disp(b));
                da[0].total_cmp(&db[0]).then(da[1].total_cmp(&db[1]))
            });
            for &j in list.iter() {
                targets.push(j);
                features.push([coords[j][0] - coords[i][0], coords[j][1] - coords[i][1]]);
            }
            offsets.push(targets.len());
        }
        Ok(Self { coords, offsets, targets, features })
    }

    pub fn n_nodes(&self) -> usize {
        self.coords.len()
    }

    /// Number of directed edges (twice the undirected count).
    pub fn n_directed_edges(&self) -> usize {
        self.targets.len()
    }

    pub fn coords(&self) -> &[Point] {
        &self.coords
    }

    /// Neighbor indices of node `i`, in displacement order.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.targets[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    /// Displacements `x_j − x_i`, aligned with [`Graph::neighbors`].
    pub fn neighbor_features(&self, i: usize) -> &[Point] {
        &self.features[self.offsets[i]..self.offsets[i + 1]]
    }

    /// `x_j − x_i` when `j` is a neighbor of `i`.
    pub fn edge_feature(&self, i: usize, j: usize) -> Option<Point> {
        let start = self.offsets[i];
        self.neighbors(i).iter().position(|&k| k == j).map(|k| self.features[start + k])
    }

    /// Row offsets into the directed edge arrays (length `n_nodes + 1`).
    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    /// Directed edge targets, grouped by source node.
    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    /// Directed edge features, grouped by source node.
    pub fn features(&self) -> &[Point] {
        &self.features
    }

    /// Undirected edges `(i, j)` with `i < j`, grouped by `i`.
    pub fn undirected_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n_nodes()).flat_map(move |i| self.neighbors(i).iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
    }

    pub fn is_connected(&self) -> bool {
        let n = self.n_nodes();
        if n == 0 {
            return true;
        }
        let mut seen = alloc::vec![false; n];
        let mut stack = alloc::vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(i) = stack.pop() {
            for &j in self.neighbors(i) {
                if !seen[j] {
                    seen[j] = true;
                    count += 1;
                    stack.push(j);
                }
            }
        }
        count == n
    }
}

/// Neighbor graph of a triangulation: two points are neighbors when they
/// share a triangle edge.
pub fn build_graph(tri: &Triangulation, points: &PointSet) -> Result<Graph> {
    let n = points.len();
    let mut edges = Vec::with_capacity(3 * tri.triangles.len());
    for t in &tri.triangles {
        if t.iter().any(|&v| v >= n) {
            return Err(Error::ShapeMismatch(format!("triangle {t:?} references a missing point")));
        }
        edges.extend([(t[0], t[1]), (t[1], t[2]), (t[2], t[0])]);
    }
    Graph::from_edges(points.coords().to_vec(), &edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::delaunay;
    use alloc::vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_triangle_graph() {
        let ps = PointSet::from_coords(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        let g = build_graph(&delaunay(&ps).unwrap(), &ps).unwrap();
        for i in 0..3 {
            assert_eq!(g.degree(i), 2);
        }
        assert_eq!(g.edge_feature(0, 1), Some([1.0, 0.0]));
        assert_eq!(g.edge_feature(2, 1), Some([1.0, -1.0]));
    }

    #[test]
    fn unit_square_degrees() {
        let ps = PointSet::from_coords(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap();
        let g = build_graph(&delaunay(&ps).unwrap(), &ps).unwrap();
        // Diagonal {0, 2}; lists in displacement order.
        assert_eq!(g.neighbors(0), &[3, 1, 2]);
        assert_eq!(g.neighbors(1), &[0, 2]);
        assert_eq!(g.neighbors(2), &[0, 3, 1]);
        assert_eq!(g.neighbors(3), &[0, 2]);
    }

    #[test]
    fn random_graph_is_symmetric_and_antisymmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let coords: Vec<Point> = (0..100).map(|_| [rng.random_range(0.0..6.0), rng.random_range(0.0..6.0)]).collect();
        let ps = PointSet::from_coords(coords).unwrap();
        let tri = delaunay(&ps).unwrap();
        let g = build_graph(&tri, &ps).unwrap();
        assert!(g.is_connected());
        for i in 0..g.n_nodes() {
            assert!(g.neighbor_features(i).windows(2).all(|w| (w[0][0], w[0][1]) < (w[1][0], w[1][1])));
            for &j in g.neighbors(i) {
                assert_ne!(i, j);
                let fij = g.edge_feature(i, j).unwrap();
                let fji = g.edge_feature(j, i).unwrap();
                assert_eq!([fij[0] + fji[0], fij[1] + fji[1]], [0.0, 0.0]);
                let shared = tri.triangles.iter().any(|t| t.contains(&i) && t.contains(&j));
                assert!(shared);
            }
        }
    }

    #[test]
    fn from_edges_rejects_self_loops() {
        let coords = vec![[0.0, 0.0], [1.0, 0.0]];
        assert!(Graph::from_edges(coords.clone(), &[(0, 0)]).is_err());
        assert!(Graph::from_edges(coords, &[(0, 2)]).is_err());
    }
}
