//! Uniform Q1 mesh of a square domain.
//!
//! Nodes are numbered row-major with `y` as the slow index:
//! `index = iy * n + ix`, coordinate `(ix * h, iy * h)`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Interior,
    Edge,
    Corner,
}

#[derive(Debug, Clone)]
pub struct Grid {
    n: usize,
    extent: f64,
    h: f64,
}

impl Grid {
    pub fn new(extent: f64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid("nodes_per_side", "nodes_per_side must be >= 2"));
        }
        if !(extent > 0.0) {
            return Err(Error::invalid("domain_extent", "domain_extent must be positive"));
        }
        Ok(Grid {
            n,
            extent,
            h: extent / (n - 1) as f64,
        })
    }

    pub fn from_config(cfg: &crate::SimConfig) -> Result<Self> {
        Grid::new(cfg.domain_extent, cfg.nodes_per_side)
    }

    /// Nodes per side.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn node_count(&self) -> usize {
        self.n * self.n
    }

    #[inline]
    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.n + ix
    }

    #[inline]
    pub fn ij(&self, node: usize) -> (usize, usize) {
        (node % self.n, node / self.n)
    }

    pub fn coord(&self, node: usize) -> (f64, f64) {
        let (ix, iy) = self.ij(node);
        (ix as f64 * self.h, iy as f64 * self.h)
    }

    pub fn coords(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        (0..self.node_count()).map(|k| self.coord(k))
    }

    pub fn kind(&self, node: usize) -> NodeKind {
        let (ix, iy) = self.ij(node);
        let last = self.n - 1;
        let on_x = ix == 0 || ix == last;
        let on_y = iy == 0 || iy == last;
        match (on_x, on_y) {
            (true, true) => NodeKind::Corner,
            (false, false) => NodeKind::Interior,
            _ => NodeKind::Edge,
        }
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        self.kind(node) != NodeKind::Interior
    }

    pub fn boundary_mask(&self) -> Vec<bool> {
        (0..self.node_count()).map(|k| self.is_boundary(k)).collect()
    }

    /// Boundary node indices in increasing order.
    pub fn boundary_nodes(&self) -> Vec<usize> {
        (0..self.node_count()).filter(|&k| self.is_boundary(k)).collect()
    }

    /// Number of Q1 elements touching the node (1, 2 or 4).
    pub fn adjacent_elements(&self, node: usize) -> usize {
        let (ix, iy) = self.ij(node);
        let last = self.n - 1;
        let cx = if ix == 0 || ix == last { 1 } else { 2 };
        let cy = if iy == 0 || iy == last { 1 } else { 2 };
        cx * cy
    }

    /// Lumped volume weight: `h²/4` per adjacent element.
    pub fn volume_weights(&self) -> Vec<f64> {
        let q = 0.25 * self.h * self.h;
        (0..self.node_count())
            .map(|k| q * self.adjacent_elements(k) as f64)
            .collect()
    }

    /// Lumped boundary length weight: half an edge per adjacent boundary
    /// edge, so `h` on every boundary node, corners included.
    pub fn boundary_weights(&self) -> Vec<f64> {
        (0..self.node_count())
            .map(|k| if self.is_boundary(k) { self.h } else { 0.0 })
            .collect()
    }

    /// Nearest node to a point, and the snap offset `(dx, dy)` from the
    /// requested point to the node. Points outside the domain are clamped.
    pub fn nearest_node(&self, x: f64, y: f64) -> (usize, (f64, f64)) {
        let snap = |v: f64| -> usize {
            let k = (v / self.h).round();
            k.clamp(0.0, (self.n - 1) as f64) as usize
        };
        let (ix, iy) = (snap(x), snap(y));
        let node = self.index(ix, iy);
        (node, (ix as f64 * self.h - x, iy as f64 * self.h - y))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_and_counts() {
        let g = Grid::new(50.0, 201).unwrap();
        assert_eq!(g.spacing(), 0.25);
        assert_eq!(g.node_count(), 201 * 201);
        assert_eq!(g.boundary_nodes().len(), 4 * 201 - 4);
    }

    #[test]
    fn classification() {
        let g = Grid::new(1.0, 4).unwrap();
        assert_eq!(g.kind(0), NodeKind::Corner);
        assert_eq!(g.kind(15), NodeKind::Corner);
        assert_eq!(g.kind(1), NodeKind::Edge);
        assert_eq!(g.kind(5), NodeKind::Interior);
        assert_eq!(g.adjacent_elements(0), 1);
        assert_eq!(g.adjacent_elements(1), 2);
        assert_eq!(g.adjacent_elements(5), 4);
    }

    #[test]
    fn volume_weights_sum_to_area() {
        let g = Grid::new(3.0, 7).unwrap();
        let total: f64 = g.volume_weights().iter().sum();
        assert!((total - 9.0).abs() < 1e-12);
        let perimeter: f64 = g.boundary_weights().iter().sum();
        assert!((perimeter - 12.0).abs() < 1e-12);
    }

    #[test]
    fn source_node_of_reference_setup() {
        let g = Grid::new(50.0, 201).unwrap();
        let (node, off) = g.nearest_node(25.0, 5.0);
        assert_eq!(g.ij(node), (100, 20));
        assert_eq!(node, 20 * 201 + 100);
        assert_eq!(off, (0.0, 0.0));
    }

    #[test]
    fn minimal_grid() {
        let g = Grid::new(1.0, 2).unwrap();
        assert_eq!(g.node_count(), 4);
        assert!(g.boundary_mask().iter().all(|&b| b));
        assert!(Grid::new(1.0, 1).is_err());
    }
}
