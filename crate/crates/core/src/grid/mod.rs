//! Brute-force finite-difference oracle: grids, Hamiltonians, eigenpairs and
//! Crank–Nicolson propagation.
//!
//! Wavefunctions vanish one spacing beyond each end of every axis (hard walls).
//! Points are stored row-major with the last axis fastest.

mod eigen;
mod propagate;
mod sparse;

pub use eigen::{dense_complex, dense_real, lowest_eigenpairs, Eigenpairs, DENSE_LIMIT};
pub use propagate::{
    bicgstab, propagate, MatrixFn, Propagation, SolverStats, TermSum, TimeDependentOperator,
};
pub use sparse::{sum, CsrMatrix, Entry};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Uniform axis with `n` points from `lo` to `hi` inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Axis {
    pub fn span(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if n < 16 {
            return Err(Error::invalid("grid", format!("need at least 16 points per axis, got {n}")));
        }
        if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::invalid("grid", format!("empty or non-finite axis [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi, n })
    }

    /// `[−L, L]` with spacing `2L/(N−1)`.
    pub fn centered(half_width: f64, n: usize) -> Result<Self> {
        if !(half_width > 0.0) {
            return Err(Error::invalid("grid", format!("half-width must be positive, got {half_width}")));
        }
        Self::span(-half_width, half_width, n)
    }

    /// Axis whose outer wall sits at `r = 0`: points `h, 2h, …, R` with `h = R/n`.
    pub fn radial(r_max: f64, n: usize) -> Result<Self> {
        let h = r_max / n as f64;
        Self::span(h, r_max, n)
    }

    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / (self.n - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        self.lo + self.spacing() * i as f64
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|i| self.point(i))
    }

    fn trapezoid_weight(&self, i: usize) -> f64 {
        if i == 0 || i + 1 == self.n {
            0.5 * self.spacing()
        } else {
            self.spacing()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    axes: Vec<Axis>,
}

impl Grid {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() || axes.len() > 2 {
            return Err(Error::invalid("grid", format!("1 or 2 axes supported, got {}", axes.len())));
        }
        Ok(Self { axes })
    }

    pub fn line(axis: Axis) -> Self {
        Self { axes: vec![axis] }
    }

    pub fn plane(x: Axis, y: Axis) -> Self {
        Self { axes: vec![x, y] }
    }

    pub fn dims(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.n).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn stride(&self, axis: usize) -> usize {
        self.axes[axis + 1..].iter().map(|a| a.n).product()
    }

    /// Per-axis indices of flat index `k`.
    pub fn multi_index(&self, k: usize) -> [usize; 2] {
        match self.axes.len() {
            1 => [k, 0],
            _ => [k / self.axes[1].n, k % self.axes[1].n],
        }
    }

    pub fn coords(&self, k: usize) -> [f64; 2] {
        let idx = self.multi_index(k);
        let mut c = [0.0; 2];
        for (d, a) in self.axes.iter().enumerate() {
            c[d] = a.point(idx[d]);
        }
        c
    }

    pub fn weight(&self, k: usize) -> f64 {
        let idx = self.multi_index(k);
        self.axes.iter().enumerate().map(|(d, a)| a.trapezoid_weight(idx[d])).product()
    }

    /// Number of cells between point `k` and the nearest wall.
    pub fn wall_distance(&self, k: usize) -> usize {
        let idx = self.multi_index(k);
        self.axes
            .iter()
            .enumerate()
            .map(|(d, a)| idx[d].min(a.n - 1 - idx[d]))
            .min()
            .unwrap_or(0)
    }

    /// Diagonal operator `f(x)`.
    pub fn diagonal(&self, f: impl Fn(&[f64]) -> f64) -> Result<CsrMatrix<f64>> {
        let d = self.dims();
        let values = (0..self.len())
            .map(|k| {
                let c = self.coords(k);
                let v = f(&c[..d]);
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::NonFinitePotential { point: c[..d].to_vec(), value: v })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CsrMatrix::diagonal(values))
    }

    /// `−ħ²/(2mᵢ) ∂ᵢ²` with the three-point stencil, summed over axes.
    pub fn kinetic(&self, masses: &[f64], hbar: f64) -> Result<CsrMatrix<f64>> {
        if masses.len() != self.dims() {
            return Err(Error::DimensionMismatch { expected: self.dims(), got: masses.len() });
        }
        if let Some(m) = masses.iter().find(|m| !(**m > 0.0)) {
            return Err(Error::invalid("mass", format!("must be positive, got {m}")));
        }
        let coeff: Vec<f64> = self
            .axes
            .iter()
            .zip(masses)
            .map(|(a, m)| hbar * hbar / (2.0 * m * a.spacing() * a.spacing()))
            .collect();
        Ok(CsrMatrix::from_rows(self.len(), |k, out| {
            let idx = self.multi_index(k);
            for (d, a) in self.axes.iter().enumerate() {
                let s = self.stride(d);
                out.push((k, 2.0 * coeff[d]));
                if idx[d] > 0 {
                    out.push((k - s, -coeff[d]));
                }
                if idx[d] + 1 < a.n {
                    out.push((k + s, -coeff[d]));
                }
            }
        }))
    }

    /// `{x_d, p_d} = −iħ(x_d ∂_d + ∂_d x_d)` with central differences; Hermitian.
    pub fn squeeze(&self, axis: usize, hbar: f64) -> CsrMatrix<C64> {
        let a = self.axes[axis];
        let s = self.stride(axis);
        let h = a.spacing();
        CsrMatrix::from_rows(self.len(), |k, out| {
            let i = self.multi_index(k)[axis];
            let x = a.point(i);
            if i + 1 < a.n {
                out.push((k + s, C64::new(0.0, -hbar * (x + a.point(i + 1)) / (2.0 * h))));
            }
            if i > 0 {
                out.push((k - s, C64::new(0.0, hbar * (x + a.point(i - 1)) / (2.0 * h))));
            }
        })
    }

    /// Central-difference momentum `−iħ∂_d`.
    pub fn momentum(&self, axis: usize, hbar: f64) -> CsrMatrix<C64> {
        let a = self.axes[axis];
        let s = self.stride(axis);
        let h = a.spacing();
        CsrMatrix::from_rows(self.len(), |k, out| {
            let i = self.multi_index(k)[axis];
            if i + 1 < a.n {
                out.push((k + s, C64::new(0.0, -hbar / (2.0 * h))));
            }
            if i > 0 {
                out.push((k - s, C64::new(0.0, hbar / (2.0 * h))));
            }
        })
    }
}

/// `−Σ ħ²/(2mᵢ)∂ᵢ² + V(x)`.
pub fn build_hamiltonian(
    grid: &Grid,
    masses: &[f64],
    hbar: f64,
    potential: impl Fn(&[f64]) -> f64,
) -> Result<CsrMatrix<f64>> {
    let t = grid.kinetic(masses, hbar)?;
    let v = grid.diagonal(potential)?;
    Ok(sum(&[(1.0, &t), (1.0, &v)]))
}

/// Amplitudes on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridState {
    pub grid: Grid,
    pub amplitudes: Vec<C64>,
}

impl GridState {
    pub fn new(grid: Grid, amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != grid.len() {
            return Err(Error::DimensionMismatch { expected: grid.len(), got: amplitudes.len() });
        }
        Ok(Self { grid, amplitudes })
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(&[f64]) -> C64) -> Self {
        let d = grid.dims();
        let amplitudes = (0..grid.len()).map(|k| f(&grid.coords(k)[..d])).collect();
        Self { grid: grid.clone(), amplitudes }
    }

    /// Eigenvector `i` of `pairs`, rescaled to unit trapezoid norm.
    pub fn from_eigenvector(grid: &Grid, pairs: &Eigenpairs, i: usize) -> Result<Self> {
        Ok(Self::new(grid.clone(), pairs.vectors[i].clone())?.normalized())
    }

    pub fn norm_sq(&self) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(k, a)| self.grid.weight(k) * a.norm_sqr())
            .sum()
    }

    pub fn normalized(mut self) -> Self {
        let n = self.norm_sq().sqrt();
        self.amplitudes.iter_mut().for_each(|a| *a /= n);
        self
    }

    /// Probability within `cells` spacings of any wall.
    pub fn boundary_probability(&self, cells: usize) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(k, _)| self.grid.wall_distance(*k) < cells)
            .map(|(k, a)| self.grid.weight(k) * a.norm_sqr())
            .sum()
    }
}

/// Trapezoid inner product `⟨a|b⟩`.
pub fn overlap(a: &GridState, b: &GridState) -> Result<C64> {
    if a.grid != b.grid {
        return Err(Error::GridMismatch);
    }
    Ok(a
        .amplitudes
        .iter()
        .zip(&b.amplitudes)
        .enumerate()
        .map(|(k, (x, y))| x.conj() * y * a.grid.weight(k))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn harmonic_1d(n: usize, half_width: f64) -> (Grid, CsrMatrix<f64>) {
        let grid = Grid::line(Axis::centered(half_width, n).unwrap());
        let h = build_hamiltonian(&grid, &[1.0], 1.0, |x| 50.0 * x[0] * x[0]).unwrap();
        (grid, h)
    }

    #[test]
    fn harmonic_ground_energy() {
        let (_, h) = harmonic_1d(512, 4.0);
        let e = lowest_eigenpairs(&h, 4).unwrap();
        assert!((e.values[0] - 5.0).abs() < 5e-3);
        for w in e.values.windows(2) {
            assert!((w[1] - w[0] - 10.0).abs() < 1e-2);
        }
    }

    #[test]
    fn second_order_convergence() {
        let err = |n: usize| {
            let (_, h) = harmonic_1d(n, 3.0);
            (lowest_eigenpairs(&h, 1).unwrap().values[0] - 5.0).abs()
        };
        let (coarse, fine) = (err(128), err(255));
        let ratio = coarse / fine;
        assert!((ratio - 4.0).abs() < 0.3, "ratio {ratio}");
    }

    #[test]
    fn coupled_oscillator_levels() {
        use crate::oscillators::exact_energy;
        use crate::params::OscillatorParams;
        let p = OscillatorParams::new(10.0, 1.0, 100.0, 100.0, 50.0).unwrap();
        // Six ground-state widths per axis.
        let width = |m: f64, k: f64| (1.0 / (m * k).sqrt()).sqrt();
        let grid = Grid::plane(
            Axis::centered(6.0 * width(10.0, 50.0), 128).unwrap(),
            Axis::centered(6.0 * width(1.0, 50.0), 128).unwrap(),
        );
        let h = build_hamiltonian(&grid, &[10.0, 1.0], 1.0, |x| {
            0.5 * 100.0 * (x[0] * x[0] + x[1] * x[1]) - 50.0 * x[0] * x[1]
        })
        .unwrap();
        let e = lowest_eigenpairs(&h, 2).unwrap();
        let e00 = exact_energy(&p, 0.0, 0, 0).unwrap();
        let first = exact_energy(&p, 0.0, 1, 0).unwrap().min(exact_energy(&p, 0.0, 0, 1).unwrap());
        assert!((e.values[0] - e00).abs() < 1e-3 * e00, "{} vs {e00}", e.values[0]);
        assert!((e.values[1] - first).abs() < 1e-3 * first, "{} vs {first}", e.values[1]);
    }

    #[test]
    fn free_particle_is_nonnegative_and_symmetric() {
        let grid = Grid::plane(Axis::centered(1.0, 16).unwrap(), Axis::centered(2.0, 20).unwrap());
        let h = build_hamiltonian(&grid, &[1.0, 2.0], 1.0, |_| 0.0).unwrap();
        assert_eq!(h.hermiticity_error(), 0.0);
        let e = lowest_eigenpairs(&h, 320).unwrap();
        assert!(e.values.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn squeeze_operator_is_hermitian() {
        let grid = Grid::plane(Axis::centered(1.0, 16).unwrap(), Axis::centered(2.0, 17).unwrap());
        for axis in 0..2 {
            assert!(grid.squeeze(axis, 1.0).hermiticity_error() < 1e-15);
        }
    }

    #[test]
    fn non_finite_potential_is_reported() {
        let grid = Grid::line(Axis::span(0.0, 1.0, 16).unwrap());
        let e = build_hamiltonian(&grid, &[1.0], 1.0, |x| 1.0 / x[0]).unwrap_err();
        assert!(matches!(e, Error::NonFinitePotential { .. }));
    }

    #[test]
    fn overlaps() {
        let (grid, h) = harmonic_1d(256, 3.0);
        let e = lowest_eigenpairs(&h, 2).unwrap();
        let a = GridState::from_eigenvector(&grid, &e, 0).unwrap();
        let b = GridState::from_eigenvector(&grid, &e, 1).unwrap();
        assert!((overlap(&a, &a).unwrap().re - 1.0).abs() < 1e-12);
        assert!(overlap(&a, &b).unwrap().norm() < 1e-10);
        let other = GridState::from_fn(&Grid::line(Axis::centered(2.0, 256).unwrap()), |_| C64::new(1.0, 0.0));
        assert!(matches!(overlap(&a, &other), Err(Error::GridMismatch)));
        assert!(Axis::centered(1.0, 8).is_err());
    }
}
