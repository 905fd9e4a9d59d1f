use nalgebra::DMatrix;
use num_complex::Complex64;

use super::grid::HarmonicGrid;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MatrixKind {
    Scattering,
    Admittance,
}

impl MatrixKind {
    fn name(self) -> &'static str {
        match self {
            MatrixKind::Scattering => "scattering",
            MatrixKind::Admittance => "admittance",
        }
    }
}

/// Square complex matrix over `(port, harmonic)` pairs.
///
/// Rows and columns are port-major: entry `(p, n)` lives at
/// `p * (2N + 1) + (n + N)`. Block `(i, j)` maps harmonics incident on port
/// `j` to harmonics leaving port `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct FloquetMatrix {
    grid: HarmonicGrid,
    ports: usize,
    kind: MatrixKind,
    data: CMatrix,
}

impl FloquetMatrix {
    pub fn new(grid: HarmonicGrid, ports: usize, kind: MatrixKind, data: CMatrix) -> Result<Self> {
        let dim = ports * grid.len();
        if data.nrows() != dim || data.ncols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "{} ports x {} harmonics needs {dim}x{dim}, got {}x{}",
                ports,
                grid.len(),
                data.nrows(),
                data.ncols()
            )));
        }
        Ok(Self {
            grid,
            ports,
            kind,
            data,
        })
    }

    pub(crate) fn from_parts(
        grid: HarmonicGrid,
        ports: usize,
        kind: MatrixKind,
        data: CMatrix,
    ) -> Self {
        debug_assert_eq!(data.nrows(), ports * grid.len());
        Self {
            grid,
            ports,
            kind,
            data,
        }
    }

    pub fn zeros(grid: HarmonicGrid, ports: usize, kind: MatrixKind) -> Self {
        let dim = ports * grid.len();
        Self::from_parts(grid, ports, kind, CMatrix::zeros(dim, dim))
    }

    pub fn identity(grid: HarmonicGrid, ports: usize, kind: MatrixKind) -> Self {
        let dim = ports * grid.len();
        Self::from_parts(grid, ports, kind, CMatrix::identity(dim, dim))
    }

    /// Harmonic-diagonal matrix whose `(i, j)` port entry at harmonic `n` is
    /// `entry(i, j, n)`.
    pub fn harmonic_diagonal(
        grid: HarmonicGrid,
        ports: usize,
        kind: MatrixKind,
        mut entry: impl FnMut(usize, usize, i64) -> Complex64,
    ) -> Self {
        let h = grid.len();
        let mut data = CMatrix::zeros(ports * h, ports * h);
        for i in 0..ports {
            for j in 0..ports {
                for (k, n) in grid.harmonics().enumerate() {
                    data[(i * h + k, j * h + k)] = entry(i, j, n);
                }
            }
        }
        Self::from_parts(grid, ports, kind, data)
    }

    pub fn grid(&self) -> &HarmonicGrid {
        &self.grid
    }

    pub fn ports(&self) -> usize {
        self.ports
    }

    pub fn kind(&self) -> MatrixKind {
        self.kind
    }

    pub fn harmonics(&self) -> usize {
        self.grid.len()
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn data(&self) -> &CMatrix {
        &self.data
    }

    pub fn into_data(self) -> CMatrix {
        self.data
    }

    pub fn index(&self, port: usize, harmonic: i64) -> Option<usize> {
        (port < self.ports)
            .then(|| self.grid.index_of(harmonic))
            .flatten()
            .map(|k| port * self.grid.len() + k)
    }

    /// Entry mapping harmonic `n_in` at port `p_in` to harmonic `n_out` at
    /// port `p_out`.
    pub fn entry(&self, p_out: usize, n_out: i64, p_in: usize, n_in: i64) -> Complex64 {
        let r = self.index(p_out, n_out).expect("row out of range");
        let c = self.index(p_in, n_in).expect("column out of range");
        self.data[(r, c)]
    }

    pub fn block(&self, i: usize, j: usize) -> CMatrix {
        let h = self.grid.len();
        self.data.view((i * h, j * h), (h, h)).into_owned()
    }

    /// Ports x ports matrix of the harmonic-0 to harmonic-0 entries.
    pub fn fundamental(&self) -> DMatrix<Complex64> {
        let h = self.grid.len();
        let k = self.grid.order();
        DMatrix::from_fn(self.ports, self.ports, |i, j| {
            self.data[(i * h + k, j * h + k)]
        })
    }

    pub fn require(&self, kind: MatrixKind) -> Result<()> {
        if self.kind == kind {
            Ok(())
        } else {
            Err(Error::WrongKind {
                expected: kind.name(),
            })
        }
    }

    pub fn spectral_norm(&self) -> f64 {
        linalg::spectral_norm(&self.data)
    }

    pub fn transpose(&self) -> Self {
        Self::from_parts(self.grid, self.ports, self.kind, self.data.transpose())
    }

    /// Port-block transpose: swaps blocks `(i, j)` and `(j, i)` without
    /// transposing inside a block.
    pub fn port_transpose(&self) -> Self {
        let h = self.grid.len();
        let mut data = CMatrix::zeros(self.dim(), self.dim());
        for i in 0..self.ports {
            for j in 0..self.ports {
                data.view_mut((j * h, i * h), (h, h))
                    .copy_from(&self.data.view((i * h, j * h), (h, h)));
            }
        }
        Self::from_parts(self.grid, self.ports, self.kind, data)
    }

    /// Reorders ports so that new port `k` is old port `order[k]`.
    pub fn select_ports(&self, order: &[usize]) -> Result<Self> {
        if order.iter().any(|&p| p >= self.ports) {
            return Err(Error::DimensionMismatch("port index out of range".into()));
        }
        let h = self.grid.len();
        let m = order.len();
        let mut data = CMatrix::zeros(m * h, m * h);
        for (a, &i) in order.iter().enumerate() {
            for (b, &j) in order.iter().enumerate() {
                data.view_mut((a * h, b * h), (h, h))
                    .copy_from(&self.data.view((i * h, j * h), (h, h)));
            }
        }
        Ok(Self::from_parts(self.grid, m, self.kind, data))
    }

    /// Largest magnitude among entries that couple different harmonics.
    pub fn off_harmonic_magnitude(&self) -> f64 {
        let h = self.grid.len();
        let mut worst: f64 = 0.0;
        for r in 0..self.dim() {
            for c in 0..self.dim() {
                if r % h != c % h {
                    worst = worst.max(self.data[(r, c)].norm());
                }
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if self.dim() != other.dim() || !self.grid.same_as(&other.grid) {
            return Err(Error::GridMismatch);
        }
        Ok(linalg::max_abs_diff(&self.data, &other.data))
    }

    /// Every entry multiplied by `factor`.
    pub fn scaled(mut self, factor: Complex64) -> Self {
        self.data *= factor;
        self
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.ports != other.ports || !self.grid.same_as(&other.grid) {
            return Err(Error::GridMismatch);
        }
        if self.kind != other.kind {
            return Err(Error::WrongKind {
                expected: self.kind.name(),
            });
        }
        Ok(Self::from_parts(
            self.grid,
            self.ports,
            self.kind,
            &self.data + &other.data,
        ))
    }
}
