//! Interface-aligned grids. Every interface point inside the domain is a
//! node; each patch segment between breakpoints is meshed uniformly.

use crate::error::{Error, Result};
use crate::landscape::{InterfaceKind, Landscape, NodeTag, PatchType};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Boundary,
    Patch(PatchType),
    Interface(InterfaceKind),
}

impl NodeKind {
    pub fn tag(self) -> Option<NodeTag> {
        match self {
            NodeKind::Boundary => None,
            NodeKind::Patch(p) => Some(NodeTag::Patch(p)),
            NodeKind::Interface(k) => Some(NodeTag::Interface(k)),
        }
    }

    /// 1 or 2 inside a patch, 0 at interfaces and boundary nodes.
    pub fn patch_code(self) -> u8 {
        match self {
            NodeKind::Patch(p) => p.index(),
            _ => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    /// Truncation index `n` of `[-n l, n l]`; 0 for other windows.
    pub n_tiles: usize,
    pub nodes_per_patch: usize,
    pub x: Vec<f64>,
    pub kinds: Vec<NodeKind>,
    /// Patch type of cell `[x_i, x_{i+1}]`; on a periodic grid the last cell wraps.
    pub cell_patch: Vec<PatchType>,
    pub interface_nodes: Vec<(usize, InterfaceKind)>,
    pub h1: f64,
    pub h2: f64,
    pub periodic: bool,
    pub period: f64,
}

/// Interfaces closer than this to a window end are absorbed into the boundary.
const MERGE_TOL: f64 = 1e-9;

impl Grid {
    /// Window `[-n l, n l]` with `4n` full patches and Dirichlet ends.
    pub fn truncated(landscape: &Landscape, n_tiles: usize, nodes_per_patch: usize) -> Result<Self> {
        if n_tiles < 1 {
            return Err(Error::ResolutionTooCoarse("n_tiles must be at least 1".into()));
        }
        if nodes_per_patch < 4 {
            return Err(Error::ResolutionTooCoarse(format!(
                "nodes_per_patch = {nodes_per_patch} < 4"
            )));
        }
        let half = n_tiles as f64 * landscape.period;
        let mut g = Self::interval(landscape, -half, half, nodes_per_patch)?;
        g.n_tiles = n_tiles;
        Ok(g)
    }

    /// Arbitrary window `[a, b]` with Dirichlet ends. Full patches get
    /// `nodes_per_patch` interior nodes; partial patches at the ends get a
    /// comparable spacing and at least two cells.
    pub fn interval(landscape: &Landscape, a: f64, b: f64, nodes_per_patch: usize) -> Result<Self> {
        if !(b > a) {
            return Err(Error::ResolutionTooCoarse(format!("empty window [{a}, {b}]")));
        }
        if nodes_per_patch < 2 {
            return Err(Error::ResolutionTooCoarse(format!("nodes_per_patch = {nodes_per_patch} < 2")));
        }
        let scale = MERGE_TOL * (1.0 + a.abs().max(b.abs()));
        let inner: Vec<(f64, InterfaceKind)> = landscape
            .interfaces_between(a, b)
            .into_iter()
            .filter(|&(x, _)| x - a > scale && b - x > scale)
            .collect();
        let mut breaks: Vec<(f64, NodeKind)> = vec![(a, NodeKind::Boundary)];
        breaks.extend(inner.iter().map(|&(x, k)| (x, NodeKind::Interface(k))));
        breaks.push((b, NodeKind::Boundary));
        Ok(Self::from_breaks(landscape, &breaks, nodes_per_patch, false))
    }

    /// One period `[-l1, l2)` with periodic closure. Node 0 is the `S2`
    /// point `-l1`, the `S1` point `0` sits at index `nodes_per_patch + 1`.
    pub fn periodic(landscape: &Landscape, nodes_per_patch: usize) -> Result<Self> {
        if nodes_per_patch < 2 {
            return Err(Error::ResolutionTooCoarse(format!("nodes_per_patch = {nodes_per_patch} < 2")));
        }
        let breaks = [
            (-landscape.l1, NodeKind::Interface(InterfaceKind::S2)),
            (0.0, NodeKind::Interface(InterfaceKind::S1)),
            (landscape.l2, NodeKind::Interface(InterfaceKind::S2)),
        ];
        let mut g = Self::from_breaks(landscape, &breaks, nodes_per_patch, true);
        // Drop the duplicated end node; the last cell wraps to node 0.
        g.x.pop();
        g.kinds.pop();
        g.interface_nodes.retain(|&(i, _)| i < g.x.len());
        g.periodic = true;
        Ok(g)
    }

    fn from_breaks(landscape: &Landscape, breaks: &[(f64, NodeKind)], npp: usize, periodic: bool) -> Self {
        let h1 = landscape.l1 / (npp + 1) as f64;
        let h2 = landscape.l2 / (npp + 1) as f64;
        let mut x = vec![breaks[0].0];
        let mut kinds = vec![breaks[0].1];
        let mut cell_patch = Vec::new();
        for w in breaks.windows(2) {
            let (xa, xb) = (w[0].0, w[1].0);
            let patch = landscape.patch_at(0.5 * (xa + xb));
            let full = landscape.length(patch);
            let len = xb - xa;
            let cells = if (len - full).abs() <= 1e-12 * full {
                npp + 1
            } else {
                let h = full / (npp + 1) as f64;
                ((len / h).round() as usize).max(2)
            };
            let h = len / cells as f64;
            for j in 1..cells {
                x.push(xa + j as f64 * h);
                kinds.push(NodeKind::Patch(patch));
            }
            x.push(xb);
            kinds.push(w[1].1);
            cell_patch.extend(std::iter::repeat_n(patch, cells));
        }
        let interface_nodes = kinds
            .iter()
            .enumerate()
            .filter_map(|(i, k)| match k {
                NodeKind::Interface(kind) => Some((i, *kind)),
                _ => None,
            })
            .collect();
        Self {
            n_tiles: 0,
            nodes_per_patch: npp,
            x,
            kinds,
            cell_patch,
            interface_nodes,
            h1,
            h2,
            periodic,
            period: landscape.period,
        }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn left(&self, i: usize) -> usize {
        if i == 0 {
            debug_assert!(self.periodic);
            self.len() - 1
        } else {
            i - 1
        }
    }

    pub fn right(&self, i: usize) -> usize {
        if i + 1 == self.len() {
            debug_assert!(self.periodic);
            0
        } else {
            i + 1
        }
    }

    /// Spacing of the cell to the left of node `i`.
    pub fn h_left(&self, i: usize) -> f64 {
        if i == 0 {
            self.x[0] + self.period - self.x[self.len() - 1]
        } else {
            self.x[i] - self.x[i - 1]
        }
    }

    pub fn h_right(&self, i: usize) -> f64 {
        if i + 1 == self.len() {
            self.x[0] + self.period - self.x[i]
        } else {
            self.x[i + 1] - self.x[i]
        }
    }

    pub fn is_boundary(&self, i: usize) -> bool {
        self.kinds[i] == NodeKind::Boundary
    }

    /// Indices of all non-boundary nodes.
    pub fn interior(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&i| !self.is_boundary(i))
    }

    /// Patch type used for reaction terms at node `i`; interfaces and
    /// boundaries report the patch on their right.
    pub fn patch_of(&self, i: usize) -> PatchType {
        match self.kinds[i] {
            NodeKind::Patch(p) => p,
            _ => {
                if i < self.cell_patch.len() {
                    self.cell_patch[i]
                } else {
                    self.cell_patch[i - 1]
                }
            }
        }
    }

    /// Index of the node at `x` (within `tol`).
    pub fn find(&self, x: f64, tol: f64) -> Option<usize> {
        let i = self.x.partition_point(|&v| v < x - tol);
        (i < self.len() && (self.x[i] - x).abs() <= tol).then_some(i)
    }

    /// Number of nodes spanned by one tile, on grids built from full tiles.
    pub fn nodes_per_tile(&self) -> usize {
        2 * (self.nodes_per_patch + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> Landscape {
        Landscape::new(1.0, 1.0, 1.0, 1.0, 0.5).unwrap()
    }

    #[test]
    fn truncated_window_geometry() {
        let g = Grid::truncated(&unit(), 1, 4).unwrap();
        assert_eq!(g.x[0], -2.0);
        assert_eq!(*g.x.last().unwrap(), 2.0);
        let ifaces: Vec<f64> = g.interface_nodes.iter().map(|&(i, _)| g.x[i]).collect();
        assert_eq!(ifaces, vec![-1.0, 0.0, 1.0]);
        assert_eq!(g.len(), 4 * 4 + 3 + 2);
        assert_eq!(g.kinds[1], NodeKind::Patch(PatchType::Two));
        assert_eq!(*g.kinds.last().unwrap(), NodeKind::Boundary);
        assert_eq!(g.kinds[g.len() - 2], NodeKind::Patch(PatchType::One));
    }

    #[test]
    fn interfaces_reproduce_s1_s2() {
        let ls = Landscape::new(2.0, 1.0, 1.0, 1.0, 0.3).unwrap();
        let g = Grid::truncated(&ls, 3, 6).unwrap();
        for &(i, kind) in &g.interface_nodes {
            let x = g.x[i];
            let r = x.rem_euclid(3.0);
            match kind {
                InterfaceKind::S1 => assert!(r.min(3.0 - r) < 1e-12),
                InterfaceKind::S2 => assert!((r - 1.0).abs() < 1e-12),
            }
        }
        assert_eq!(g.interface_nodes.len(), 4 * 3 - 1);
        assert_eq!(g.len(), 12 * 6 + 11 + 2);
    }

    #[test]
    fn uniform_spacing_inside_patches() {
        let ls = Landscape::new(2.0, 0.7, 1.0, 1.0, 0.3).unwrap();
        let g = Grid::truncated(&ls, 2, 9).unwrap();
        for i in 1..g.len() - 1 {
            if let NodeKind::Patch(p) = g.kinds[i] {
                let h = if p == PatchType::One { g.h1 } else { g.h2 };
                assert!((g.h_left(i) - h).abs() < 1e-14);
                assert!((g.h_right(i) - h).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn periodic_layout() {
        let ls = Landscape::new(2.0, 1.0, 1.0, 1.0, 0.3).unwrap();
        let g = Grid::periodic(&ls, 5).unwrap();
        assert_eq!(g.len(), 12);
        assert_eq!(g.kinds[0], NodeKind::Interface(InterfaceKind::S2));
        assert_eq!(g.kinds[6], NodeKind::Interface(InterfaceKind::S1));
        assert_eq!(g.x[6], 0.0);
        assert!((g.h_left(0) - 1.0 / 6.0).abs() < 1e-14);
        assert_eq!(g.left(0), 11);
        assert_eq!(g.right(11), 0);
        assert_eq!(g.cell_patch.len(), 12);
    }

    #[test]
    fn partial_window_keeps_two_cells() {
        let g = Grid::interval(&unit(), -0.05, 2.3, 8).unwrap();
        assert_eq!(g.kinds[0], NodeKind::Boundary);
        // First interface at 0 has at least two cells to its left.
        let (i0, _) = g.interface_nodes[0];
        assert!(i0 >= 2);
        let ifaces: Vec<f64> = g.interface_nodes.iter().map(|&(i, _)| g.x[i]).collect();
        assert_eq!(ifaces, vec![0.0, 1.0, 2.0]);
    }

    #[test]
    fn rejects_coarse() {
        assert!(matches!(Grid::truncated(&unit(), 1, 3), Err(Error::ResolutionTooCoarse(_))));
        assert!(matches!(Grid::truncated(&unit(), 0, 8), Err(Error::ResolutionTooCoarse(_))));
    }
}
