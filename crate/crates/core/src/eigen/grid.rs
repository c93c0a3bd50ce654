use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Uniform rectangular Dirichlet grid in one or two dimensions.
///
/// `nodes[a]` counts interior nodes along axis `a`; the two boundary layers
/// carry the value zero. Spacing is `extent[a] / (nodes[a] + 1)` and must be
/// the same on every axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    lower: Vec<f64>,
    extent: Vec<f64>,
    nodes: Vec<usize>,
    h: f64,
}

impl Grid {
    /// The cube `[0, extent]^dim` with `nodes` interior nodes per axis.
    pub fn cube(dim: usize, extent: f64, nodes: usize) -> Result<Self> {
        Self::new(vec![0.0; dim], vec![extent; dim], vec![nodes; dim])
    }

    /// The unit cube `[0, 1]^dim`.
    pub fn unit(dim: usize, nodes: usize) -> Result<Self> {
        Self::cube(dim, 1.0, nodes)
    }

    /// The cube `[−extent/2, extent/2]^dim`.
    pub fn centered(dim: usize, extent: f64, nodes: usize) -> Result<Self> {
        Self::new(
            vec![-0.5 * extent; dim],
            vec![extent; dim],
            vec![nodes; dim],
        )
    }

    pub fn new(lower: Vec<f64>, extent: Vec<f64>, nodes: Vec<usize>) -> Result<Self> {
        let dim = nodes.len();
        if !(1..=2).contains(&dim) {
            return Err(Error::Unsupported(format!(
                "grids are 1D or 2D, got dimension {dim}"
            )));
        }
        if lower.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: lower.len(),
            });
        }
        if extent.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: extent.len(),
            });
        }
        if nodes.iter().any(|n| *n < 3) {
            return Err(invalid(format!(
                "need at least 3 interior nodes per axis, got {nodes:?}"
            )));
        }
        if extent.iter().any(|e| !(e.is_finite() && *e > 0.0))
            || lower.iter().any(|x| !x.is_finite())
        {
            return Err(invalid("extents must be positive and corners finite"));
        }
        let h = extent[0] / (nodes[0] + 1) as f64;
        for a in 1..dim {
            let ha = extent[a] / (nodes[a] + 1) as f64;
            if (ha - h).abs() > 1e-12 * h {
                return Err(invalid(format!(
                    "spacing differs between axes: {h} vs {ha}"
                )));
            }
        }
        Ok(Self {
            lower,
            extent,
            nodes,
            h,
        })
    }

    pub fn dim(&self) -> usize {
        self.nodes.len()
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// `h^d`, the volume attached to one node.
    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dim() as i32)
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn extent(&self) -> &[f64] {
        &self.extent
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    /// Total number of interior nodes.
    pub fn len(&self) -> usize {
        self.nodes.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat index of the interior node with 0-based axis indices `idx`
    /// (axis 0 varies fastest).
    pub fn flat(&self, idx: &[usize]) -> usize {
        match idx.len() {
            1 => idx[0],
            _ => idx[0] + self.nodes[0] * idx[1],
        }
    }

    /// Axis indices of a flat interior index.
    pub fn multi(&self, i: usize) -> [usize; 2] {
        [i % self.nodes[0], i / self.nodes[0]]
    }

    /// Coordinates of interior node `i`.
    pub fn coords(&self, i: usize) -> Vec<f64> {
        let m = self.multi(i);
        (0..self.dim())
            .map(|a| self.lower[a] + (m[a] + 1) as f64 * self.h)
            .collect()
    }

    /// Flat index of the node mirrored through the centre of every axis.
    pub fn reflect(&self, i: usize) -> usize {
        let m = self.multi(i);
        let r: Vec<usize> = (0..self.dim()).map(|a| self.nodes[a] - 1 - m[a]).collect();
        self.flat(&r)
    }
}

/// Nodal values on the interior of a [`Grid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self {
            values: vec![0.0; grid.len()],
        }
    }

    /// Samples `f` at the interior nodes.
    pub fn from_fn(grid: &Grid, f: impl Fn(&[f64]) -> f64) -> Self {
        Self {
            values: (0..grid.len()).map(|i| f(&grid.coords(i))).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub(crate) fn check(&self, grid: &Grid) -> Result<()> {
        if self.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                got: self.len(),
            });
        }
        Ok(())
    }
}

/// `(Σ|u_i|^q h^d)^{1/q}`.
pub fn lq_norm(grid: &Grid, u: &GridFunction, q: f64) -> f64 {
    let s: f64 = u.values.iter().map(|v| v.abs().powf(q)).sum();
    (s * grid.cell_volume()).powf(1.0 / q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn construction() {
        let g = Grid::unit(1, 3).unwrap();
        assert_eq!(g.h(), 0.25);
        assert_eq!(g.coords(1), vec![0.5]);
        assert!(Grid::unit(1, 2).is_err());
        assert!(Grid::unit(3, 5).is_err());
        assert!(Grid::new(vec![0.0, 0.0], vec![1.0, 2.0], vec![4, 4]).is_err());
        let g = Grid::new(vec![0.0, 0.0], vec![1.0, 2.0], vec![4, 9]).unwrap();
        assert_eq!(g.len(), 36);
        assert_eq!(g.multi(g.flat(&[3, 7])), [3, 7]);
        assert_relative_eq!(g.coords(g.flat(&[3, 7]))[1], 1.6);
        assert_eq!(g.reflect(g.flat(&[0, 0])), g.flat(&[3, 8]));
    }

    #[test]
    fn norm_examples() {
        let g = Grid::unit(1, 9).unwrap();
        assert_eq!(lq_norm(&g, &GridFunction::zeros(&g), 2.0), 0.0);
        let one = GridFunction::new(vec![1.0; 9]);
        for q in [1.0, 1.5, 2.0, 3.0] {
            assert_relative_eq!(
                lq_norm(&g, &one, q),
                0.9f64.powf(1.0 / q),
                max_relative = 1e-14
            );
            assert_relative_eq!(
                lq_norm(&g, &one.scaled(2.5), q),
                2.5 * lq_norm(&g, &one, q),
                max_relative = 1e-14
            );
        }
    }
}
