//! Uniform one-dimensional grids in the logarithmic variable `t = log r`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform nodes on `[lo, hi]`, endpoints included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid {
    pub lo: f64,
    pub hi: f64,
    pub m: usize,
}

impl UniformGrid {
    pub fn new(lo: f64, hi: f64, m: usize) -> Result<Self> {
        if m < 3 || !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "grid needs m >= 3 and lo < hi (got m = {m}, [{lo}, {hi}])"
            )));
        }
        Ok(Self { lo, hi, m })
    }

    /// `[-half_width, half_width]` with `m` nodes.
    pub fn symmetric(half_width: f64, m: usize) -> Result<Self> {
        Self::new(-half_width, half_width, m)
    }

    pub fn h(&self) -> f64 {
        (self.hi - self.lo) / (self.m - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        // Computed from both ends so that mirrored nodes are exact negatives.
        let h = self.h();
        if 2 * i < self.m {
            self.lo + h * i as f64
        } else {
            self.hi - h * (self.m - 1 - i) as f64
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.m).map(|i| self.node(i)).collect()
    }

    /// True when the node set is invariant under `t -> -t`.
    pub fn is_symmetric(&self) -> bool {
        (self.lo + self.hi).abs() <= 1e-14 * self.hi.abs().max(1.0)
    }

    /// Same interval, step halved.
    pub fn refined(&self) -> Self {
        Self {
            lo: self.lo,
            hi: self.hi,
            m: 2 * self.m - 1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_nodes_mirror_exactly() {
        let g = UniformGrid::symmetric(7.3, 101).unwrap();
        let t = g.nodes();
        for i in 0..t.len() {
            assert_eq!(t[i], -t[t.len() - 1 - i]);
        }
        assert_eq!(t[50], 0.0);
        assert!(g.is_symmetric());
    }

    #[test]
    fn refinement_keeps_old_nodes() {
        let g = UniformGrid::new(-1.0, 3.0, 11).unwrap();
        let r = g.refined();
        assert!((r.h() - g.h() / 2.0).abs() < 1e-15);
        for i in 0..g.m {
            assert!((r.node(2 * i) - g.node(i)).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_degenerate() {
        assert!(UniformGrid::new(0.0, 0.0, 10).is_err());
        assert!(UniformGrid::new(0.0, 1.0, 2).is_err());
    }
}
