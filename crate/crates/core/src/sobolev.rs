//! Fractional Sobolev norms on circles and spheres through surface-eigenbasis
//! expansions, and projection of sampled boundary data onto that basis.
//!
//! A 2D density is `Σ c_n e^{inθ}`; the orthonormal basis of `L²(∂B_r)` is
//! `e^{inθ}/√(2πr)`. A 3D density is `Σ c_n^m Y_n^m` with orthonormal
//! Condon–Shortley harmonics; the orthonormal basis of `L²(∂B_r)` is `Y_n^m/r`.

use crate::error::{Error, Result};
use crate::Dimension;
use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;
use std::num::NonZeroUsize;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SobolevIndex(pub f64);

impl SobolevIndex {
    pub const MINUS_THREE_HALVES: Self = Self(-1.5);
    pub const MINUS_HALF: Self = Self(-0.5);
    pub const ZERO: Self = Self(0.0);
    pub const HALF: Self = Self(0.5);
}

/// Boundary data on `∂B_r` in the surface eigenbasis.
///
/// Row `n` holds `[c_{-n}, c_{+n}]` in 2D (row 0 is `[c_0]`) and
/// `c_n^m` for `m = -n..=n` in 3D.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalDensity {
    dim: Dimension,
    radius: f64,
    rows: Vec<Vec<Complex64>>,
}

fn row_len(dim: Dimension, n: usize) -> usize {
    match dim {
        Dimension::Two => {
            if n == 0 {
                1
            } else {
                2
            }
        }
        Dimension::Three => 2 * n + 1,
    }
}

fn check_radius(radius: f64) -> Result<()> {
    if radius.is_finite() && radius > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "radius must be positive, got {radius}"
        )))
    }
}

impl ModalDensity {
    pub fn new(dim: Dimension, radius: f64, rows: Vec<Vec<Complex64>>) -> Result<Self> {
        check_radius(radius)?;
        for (n, row) in rows.iter().enumerate() {
            if row.len() != row_len(dim, n) {
                return Err(Error::InvalidInput(format!(
                    "row {n} has {} coefficients, expected {}",
                    row.len(),
                    row_len(dim, n)
                )));
            }
            if row.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "non-finite coefficient in row {n}"
                )));
            }
        }
        Ok(Self { dim, radius, rows })
    }

    pub fn zeros(dim: Dimension, radius: f64, n_max: usize) -> Result<Self> {
        let rows = (0..=n_max)
            .map(|n| vec![Complex64::new(0.0, 0.0); row_len(dim, n)])
            .collect();
        Self::new(dim, radius, rows)
    }

    /// Every coefficient of order `n` set to `per_order[n]`.
    pub fn from_orders(dim: Dimension, radius: f64, per_order: &[Complex64]) -> Result<Self> {
        let rows = per_order
            .iter()
            .enumerate()
            .map(|(n, &c)| vec![c; row_len(dim, n)])
            .collect();
        Self::new(dim, radius, rows)
    }

    /// A single basis function `e^{inθ}` (2D, signed `n`) or `Y_n^m` (3D).
    pub fn single_mode(
        dim: Dimension,
        radius: f64,
        n: i64,
        m: i64,
        value: Complex64,
    ) -> Result<Self> {
        let mut d = Self::zeros(dim, radius, n.unsigned_abs() as usize)?;
        match dim {
            Dimension::Two => d.set_2d(n, value),
            Dimension::Three => d.set_3d(n as usize, m, value)?,
        }
        Ok(d)
    }

    pub fn dimension(&self) -> Dimension {
        self.dim
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Highest stored order (0 for an empty density).
    pub fn n_max(&self) -> usize {
        self.rows.len().saturating_sub(1)
    }

    pub fn rows(&self) -> &[Vec<Complex64>] {
        &self.rows
    }

    pub fn row(&self, n: usize) -> &[Complex64] {
        self.rows.get(n).map(|r| r.as_slice()).unwrap_or(&[])
    }

    fn grow(&mut self, n: usize) {
        while self.rows.len() <= n {
            let k = self.rows.len();
            self.rows
                .push(vec![Complex64::new(0.0, 0.0); row_len(self.dim, k)]);
        }
    }

    /// `c_n` for signed `n` (2D only; 3D returns 0).
    pub fn get_2d(&self, n: i64) -> Complex64 {
        let k = n.unsigned_abs() as usize;
        match (self.dim, self.rows.get(k)) {
            (Dimension::Two, Some(row)) => row[if n >= 0 { row.len() - 1 } else { 0 }],
            _ => Complex64::new(0.0, 0.0),
        }
    }

    pub fn set_2d(&mut self, n: i64, value: Complex64) {
        let k = n.unsigned_abs() as usize;
        self.grow(k);
        let row = &mut self.rows[k];
        let idx = if n >= 0 { row.len() - 1 } else { 0 };
        row[idx] = value;
    }

    pub fn get_3d(&self, n: usize, m: i64) -> Complex64 {
        match (self.dim, self.rows.get(n)) {
            (Dimension::Three, Some(row)) if m.unsigned_abs() as usize <= n => {
                row[(m + n as i64) as usize]
            }
            _ => Complex64::new(0.0, 0.0),
        }
    }

    pub fn set_3d(&mut self, n: usize, m: i64, value: Complex64) -> Result<()> {
        if m.unsigned_abs() as usize > n {
            return Err(Error::InvalidInput(format!(
                "|m| = {} exceeds n = {n}",
                m.abs()
            )));
        }
        self.grow(n);
        self.rows[n][(m + n as i64) as usize] = value;
        Ok(())
    }

    /// Multiplies every coefficient of order `n` by `f(n)`.
    pub fn scale_orders(&self, mut f: impl FnMut(usize) -> Complex64) -> Self {
        let rows = self
            .rows
            .iter()
            .enumerate()
            .map(|(n, row)| {
                let k = f(n);
                row.iter().map(|c| c * k).collect()
            })
            .collect();
        Self {
            dim: self.dim,
            radius: self.radius,
            rows,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().flatten().all(|c| c.norm() == 0.0)
    }

    /// Value of the density at polar angle `theta` (and azimuth `phi` in 3D).
    pub fn eval(&self, theta: f64, phi: f64) -> Complex64 {
        match self.dim {
            Dimension::Two => (0..self.rows.len() as i64)
                .flat_map(|n| if n == 0 { vec![0] } else { vec![-n, n] })
                .map(|n| self.get_2d(n) * Complex64::from_polar(1.0, n as f64 * theta))
                .sum(),
            Dimension::Three => {
                let y = spherical_harmonics(self.n_max(), theta, phi);
                self.rows
                    .iter()
                    .zip(&y)
                    .flat_map(|(c, y)| c.iter().zip(y).map(|(c, y)| c * y))
                    .sum()
            }
        }
    }
}

/// `H^s(∂B_r)` norm from the modal weights.
pub fn hs_norm(d: &ModalDensity, s: SobolevIndex) -> f64 {
    let r = d.radius;
    let norm2 = match d.dim {
        Dimension::Two => 2.0 * PI * r,
        Dimension::Three => r * r,
    };
    let total: f64 = d
        .rows
        .iter()
        .enumerate()
        .map(|(n, row)| {
            let w = (1.0 + d.dim.eigenvalue(n) / (r * r)).powf(s.0);
            w * norm2 * row.iter().map(|c| c.norm_sqr()).sum::<f64>()
        })
        .sum();
    total.sqrt()
}

/// The same angular function placed on a sphere of radius `new_radius`.
pub fn rescale_density(d: &ModalDensity, new_radius: f64) -> Result<ModalDensity> {
    check_radius(new_radius)?;
    Ok(ModalDensity {
        radius: new_radius,
        ..d.clone()
    })
}

/// Gauss–Legendre nodes in `cos θ` times a uniform azimuth grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereGrid {
    cos_theta: Vec<f64>,
    weights: Vec<f64>,
    n_phi: usize,
}

impl SphereGrid {
    /// Grid exact for products of harmonics up to degree `n_max`.
    pub fn for_order(n_max: usize) -> Self {
        Self::new(n_max + 1, 2 * n_max + 1)
    }

    pub fn new(n_theta: usize, n_phi: usize) -> Self {
        let rule = GaussLegendre::new(NonZeroUsize::new(n_theta.max(1)).unwrap());
        let (cos_theta, weights) = rule.as_node_weight_pairs().iter().copied().unzip();
        Self {
            cos_theta,
            weights,
            n_phi: n_phi.max(1),
        }
    }

    pub fn n_theta(&self) -> usize {
        self.cos_theta.len()
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    /// `(θ, φ)` in row-major order: all azimuths of the first polar node first.
    pub fn points(&self) -> Vec<(f64, f64)> {
        self.cos_theta
            .iter()
            .flat_map(|&x| {
                (0..self.n_phi).map(move |k| (x.acos(), 2.0 * PI * k as f64 / self.n_phi as f64))
            })
            .collect()
    }
}

/// Sampled boundary values to be projected.
#[derive(Debug, Clone, Copy)]
pub enum Samples<'a> {
    /// Uniformly spaced angles on a circle.
    Circle {
        angles: &'a [f64],
        values: &'a [Complex64],
    },
    /// Values at [`SphereGrid::points`].
    Sphere {
        grid: &'a SphereGrid,
        values: &'a [Complex64],
    },
}

/// Coefficients of the band-limited interpolant of the samples.
pub fn modal_project(samples: Samples<'_>, radius: f64, n_max: usize) -> Result<ModalDensity> {
    match samples {
        Samples::Circle { angles, values } => project_circle(angles, values, radius, n_max),
        Samples::Sphere { grid, values } => project_sphere(grid, values, radius, n_max),
    }
}

fn project_circle(
    angles: &[f64],
    values: &[Complex64],
    radius: f64,
    n_max: usize,
) -> Result<ModalDensity> {
    let m = angles.len();
    if values.len() != m {
        return Err(Error::InvalidInput(format!(
            "{m} angles but {} values",
            values.len()
        )));
    }
    if m < 2 * n_max + 1 {
        return Err(Error::InvalidInput(format!(
            "{m} samples cannot resolve orders up to {n_max} (need {})",
            2 * n_max + 1
        )));
    }
    let step = 2.0 * PI / m as f64;
    for (k, &a) in angles.iter().enumerate() {
        if (a - angles[0] - step * k as f64).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "angle {k} is not on a uniform grid"
            )));
        }
    }
    let mut buf = values.to_vec();
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let mut d = ModalDensity::zeros(Dimension::Two, radius, n_max)?;
    for n in -(n_max as i64)..=(n_max as i64) {
        let idx = n.rem_euclid(m as i64) as usize;
        let phase = Complex64::from_polar(1.0, -(n as f64) * angles[0]);
        d.set_2d(n, buf[idx] * phase / m as f64);
    }
    Ok(d)
}

fn project_sphere(
    grid: &SphereGrid,
    values: &[Complex64],
    radius: f64,
    n_max: usize,
) -> Result<ModalDensity> {
    if values.len() != grid.n_theta() * grid.n_phi() {
        return Err(Error::InvalidInput(format!(
            "{} values for a {}x{} grid",
            values.len(),
            grid.n_theta(),
            grid.n_phi()
        )));
    }
    if grid.n_theta() < n_max + 1 || grid.n_phi() < 2 * n_max + 1 {
        return Err(Error::InvalidInput(format!(
            "{}x{} grid is not exact for degree {}",
            grid.n_theta(),
            grid.n_phi(),
            2 * n_max
        )));
    }
    let mut d = ModalDensity::zeros(Dimension::Three, radius, n_max)?;
    let dphi = 2.0 * PI / grid.n_phi as f64;
    for (i, (&x, &w)) in grid.cos_theta.iter().zip(&grid.weights).enumerate() {
        let theta = x.acos();
        for k in 0..grid.n_phi {
            let phi = dphi * k as f64;
            let f = values[i * grid.n_phi + k] * (w * dphi);
            let y = spherical_harmonics(n_max, theta, phi);
            for (row, yr) in d.rows.iter_mut().zip(&y) {
                for (c, y) in row.iter_mut().zip(yr) {
                    *c += f * y.conj();
                }
            }
        }
    }
    Ok(d)
}

/// Orthonormal `Y_n^m(θ, φ)` with Condon–Shortley phase; row `n` lists `m = -n..=n`.
pub fn spherical_harmonics(n_max: usize, theta: f64, phi: f64) -> Vec<Vec<Complex64>> {
    let (x, sin) = (theta.cos(), theta.sin());
    let mut out: Vec<Vec<Complex64>> = (0..=n_max)
        .map(|n| vec![Complex64::new(0.0, 0.0); 2 * n + 1])
        .collect();
    let mut pmm = (0.25 / PI).sqrt();
    for m in 0..=n_max {
        if m > 0 {
            pmm *= -((2 * m + 1) as f64 / (2 * m) as f64).sqrt() * sin;
        }
        let mf = m as f64;
        let mut p_prev = 0.0;
        let mut p = pmm;
        let mut a_prev = 1.0;
        for n in m..=n_max {
            if n == m + 1 {
                p_prev = p;
                p = x * (2.0 * mf + 3.0).sqrt() * pmm;
                a_prev = (2.0 * mf + 3.0).sqrt();
            } else if n > m + 1 {
                let nf = n as f64;
                let a = ((4.0 * nf * nf - 1.0) / (nf * nf - mf * mf)).sqrt();
                let next = a * (x * p - p_prev / a_prev);
                p_prev = p;
                p = next;
                a_prev = a;
            }
            let e = Complex64::from_polar(1.0, mf * phi);
            out[n][n + m] = e * p;
            if m > 0 {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                out[n][n - m] = (e * p).conj() * sign;
            }
        }
    }
    out
}
