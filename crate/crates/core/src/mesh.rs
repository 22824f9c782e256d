//! Partitions of the extended domain `(-δ, 1 + δ)`.
//!
//! The first and last elements are the interaction collars `(-δ, 0)` and
//! `(1, 1 + δ)`. They carry prescribed data only and are never refined.

use std::io::Write;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh1d {
    delta: f64,
    nodes: Vec<f64>,
}

impl Mesh1d {
    /// Five equal elements on `(0, 1)` plus the two collars.
    pub fn initial(delta: f64) -> Result<Self> {
        Self::uniform(delta, 5)
    }

    /// `n_interior` equal elements on `(0, 1)` plus the two collars.
    pub fn uniform(delta: f64, n_interior: usize) -> Result<Self> {
        if n_interior == 0 {
            return Err(Error::ElementOutOfRange { index: 0, len: 0 });
        }
        let interior: Vec<f64> = (0..=n_interior)
            .map(|k| k as f64 / n_interior as f64)
            .collect();
        Self::from_interior_nodes(delta, &interior)
    }

    /// `interior` must start at 0, end at 1 and be strictly increasing.
    pub fn from_interior_nodes(delta: f64, interior: &[f64]) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidHorizon(delta));
        }
        let valid = interior.len() >= 2
            && interior[0] == 0.0
            && *interior.last().unwrap() == 1.0
            && interior.windows(2).all(|w| w[0] < w[1]);
        if !valid {
            return Err(Error::ElementOutOfRange {
                index: 0,
                len: interior.len().saturating_sub(1),
            });
        }
        let mut nodes = Vec::with_capacity(interior.len() + 2);
        nodes.push(-delta);
        nodes.extend_from_slice(interior);
        nodes.push(1.0 + delta);
        Ok(Self { delta, nodes })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn num_elements(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Indices of the elements tiling `(0, 1)`.
    pub fn interior_elements(&self) -> std::ops::Range<usize> {
        1..self.num_elements() - 1
    }

    pub fn is_exterior(&self, i: usize) -> bool {
        i == 0 || i + 1 == self.num_elements()
    }

    pub fn element(&self, i: usize) -> (f64, f64) {
        (self.nodes[i], self.nodes[i + 1])
    }

    pub fn width(&self, i: usize) -> f64 {
        self.nodes[i + 1] - self.nodes[i]
    }

    pub fn h_min(&self) -> f64 {
        self.interior_elements()
            .map(|i| self.width(i))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn h_max(&self) -> f64 {
        self.interior_elements().map(|i| self.width(i)).fold(0.0, f64::max)
    }

    /// Element containing `x`; shared nodes resolve to the right element
    /// except at the right end of the domain.
    pub fn locate(&self, x: f64) -> Option<usize> {
        let (lo, hi) = (self.nodes[0], *self.nodes.last().unwrap());
        if !(x >= lo && x <= hi) {
            return None;
        }
        let k = self.nodes.partition_point(|&n| n <= x);
        Some(k.saturating_sub(1).min(self.num_elements() - 1))
    }

    /// Bisects every interior element.
    pub fn refine_uniform(&self) -> Self {
        let marked: Vec<usize> = self.interior_elements().collect();
        self.bisect(&marked)
    }

    /// Bisects the marked interior elements at their midpoints.
    pub fn refine_marked(&self, marked: &[usize]) -> Result<Self> {
        for &i in marked {
            if i >= self.num_elements() {
                return Err(Error::ElementOutOfRange {
                    index: i,
                    len: self.num_elements(),
                });
            }
            if self.is_exterior(i) {
                return Err(Error::ExteriorElementMarked(i));
            }
        }
        Ok(self.bisect(marked))
    }

    fn bisect(&self, marked: &[usize]) -> Self {
        let mut flag = vec![false; self.num_elements()];
        for &i in marked {
            flag[i] = true;
        }
        let mut nodes = Vec::with_capacity(self.nodes.len() + marked.len());
        for i in 0..self.num_elements() {
            nodes.push(self.nodes[i]);
            if flag[i] {
                nodes.push(0.5 * (self.nodes[i] + self.nodes[i + 1]));
            }
        }
        nodes.push(*self.nodes.last().unwrap());
        Self {
            delta: self.delta,
            nodes,
        }
    }

    /// Elements `j` with `dist(K_i, K_j) ≤ δ`, including `i`, in index order.
    pub fn horizon_neighbors(&self, i: usize) -> Vec<usize> {
        let (a, b) = self.element(i);
        let n = self.num_elements();
        // first j whose right end x_{j+1} ≥ a - δ
        let first = self.nodes[1..].partition_point(|&r| r < a - self.delta);
        // elements whose left end x_j ≤ b + δ
        let last = self.nodes[..n].partition_point(|&l| l <= b + self.delta);
        (first..last).collect()
    }

    /// Node coordinates, one per line.
    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        for x in &self.nodes {
            writeln!(out, "{x:.17e}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-14)
    }

    #[test]
    fn initial_mesh_layout() {
        let m = Mesh1d::initial(0.1).unwrap();
        assert!(close(m.nodes(), &[-0.1, 0.0, 0.2, 0.4, 0.6, 0.8, 1.0, 1.1]));
        assert_eq!(m.num_elements(), 7);
        let m = Mesh1d::initial(1e-4).unwrap();
        assert!(close(m.nodes(), &[-1e-4, 0.0, 0.2, 0.4, 0.6, 0.8, 1.0, 1.0001]));
        assert_eq!(m.num_elements(), 7);
        assert!(Mesh1d::initial(0.0).is_err());
        assert!(Mesh1d::initial(-0.1).is_err());
    }

    #[test]
    fn uniform_refinement_keeps_collars() {
        let m = Mesh1d::initial(0.1).unwrap().refine_uniform();
        assert_eq!(m.num_elements(), 12);
        for i in m.interior_elements() {
            assert!((m.width(i) - 0.1).abs() < 1e-14);
        }
        assert_eq!(m.element(0), (-0.1, 0.0));
        assert_eq!(m.element(11), (1.0, 1.1));
        let mut m = Mesh1d::initial(0.1).unwrap();
        for _ in 0..4 {
            m = m.refine_uniform();
        }
        assert!((m.h_max() - 0.2 / 16.0).abs() < 1e-15);
        assert!((m.h_min() - 0.2 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn marked_refinement() {
        let m = Mesh1d::initial(0.1).unwrap();
        let r = m.refine_marked(&[1]).unwrap();
        assert!(close(&r.nodes()[..4], &[-0.1, 0.0, 0.1, 0.2]));
        assert_eq!(r.num_elements(), 8);
        assert_eq!(m.refine_marked(&[]).unwrap(), m);
        let all: Vec<usize> = m.interior_elements().collect();
        assert_eq!(m.refine_marked(&all).unwrap(), m.refine_uniform());
        assert!(matches!(m.refine_marked(&[0]), Err(Error::ExteriorElementMarked(0))));
        assert!(matches!(m.refine_marked(&[6]), Err(Error::ExteriorElementMarked(6))));
        assert!(m.refine_marked(&[7]).is_err());
    }

    #[test]
    fn neighbor_queries() {
        let m = Mesh1d::initial(0.1).unwrap();
        assert_eq!(m.horizon_neighbors(3), vec![2, 3, 4]);
        let m = Mesh1d::initial(1e-4).unwrap();
        for i in m.interior_elements() {
            assert_eq!(m.horizon_neighbors(i), vec![i - 1, i, i + 1]);
        }
        let m = Mesh1d::initial(1.0).unwrap();
        for i in 0..m.num_elements() {
            assert_eq!(m.horizon_neighbors(i), (0..7).collect::<Vec<_>>());
        }
    }

    #[test]
    fn locate_points() {
        let m = Mesh1d::initial(0.1).unwrap();
        assert_eq!(m.locate(-0.1), Some(0));
        assert_eq!(m.locate(0.0), Some(1));
        assert_eq!(m.locate(0.3), Some(2));
        assert_eq!(m.locate(1.1), Some(6));
        assert_eq!(m.locate(1.2), None);
    }

    #[test]
    fn csv_dump_has_one_node_per_line() {
        let m = Mesh1d::initial(0.1).unwrap();
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let parsed: Vec<f64> = text.lines().map(|l| l.parse().unwrap()).collect();
        assert_eq!(parsed, m.nodes());
    }
}
