//! Independent checks of the ladder: a dense solve of the five interface
//! equations and a direct integration of the radial ODE.

use super::{Layer, RadialCoefficients};
use crate::error::{Error, Result};
use crate::material::CloakConfig;
use crate::specfun::{h1_quad, j_quad, Family};
use crate::Dimension;
use nalgebra::{DMatrix, DVector, Vector4};
use num_complex::Complex64;
use ode_solvers::{Dopri5, OutputType, System};

/// Condition estimate above which the dense solve is not trusted.
pub const ORACLE_CONDITION_LIMIT: f64 = 1e12;

/// Coefficients `u_a = e f`, `u_l = c f + d g`, `u_R = a f + b g` from the dense solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CloakCoefficients {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
    pub e: Complex64,
    /// 1-norm condition estimate of the equilibrated system.
    pub condition: f64,
    /// Largest relative residual over the five equations.
    pub residual: f64,
}

fn plain(family: Family, n: usize, z: Complex64) -> Result<[Complex64; 4]> {
    let j = j_quad(family, n, z)?;
    let h = h1_quad(family, n, z)?;
    let v = [
        j.value.to_complex(),
        j.deriv.to_complex(),
        h.value.to_complex(),
        h.deriv.to_complex(),
    ];
    if v.iter().all(|x| x.is_finite()) {
        Ok(v)
    } else {
        Err(Error::OracleUnreliable(f64::INFINITY))
    }
}

/// Solves the five transmission and boundary equations of order `n` as a dense
/// system by LU with partial pivoting, after row and column equilibration.
pub fn direct_mode_solve(c: &CloakConfig, n: usize, psi_n: Complex64) -> Result<CloakCoefficients> {
    c.validate()?;
    let layers = RadialProblem::cloak(c).layers;
    let family = c.dim.family();
    let omega = c.omega;
    let zero = Complex64::new(0.0, 0.0);
    let (core, lossy, ext) = (layers[0], layers[1], layers[2]);
    let k_a = core.wavenumber(omega);
    let k_l = lossy.wavenumber(omega);
    let [ja, jpa, _, _] = plain(family, n, k_a * (c.rho / 2.0))?;
    let [j2, jp2, h2, hp2] = plain(family, n, k_l * (c.rho / 2.0))?;
    let [j1, jp1, h1, hp1] = plain(family, n, k_l * c.rho)?;
    let [je, jpe, he, hpe] = plain(family, n, Complex64::from(omega * c.rho))?;
    let [_, jpr, _, hpr] = plain(family, n, Complex64::from(omega * c.radius))?;
    let (za, zl, ze) = (core.impedance(), lossy.impedance(), ext.impedance());

    // Unknowns (e, c, d, a, b).
    #[rustfmt::skip]
    let rows = [
        [ja, -j2, -h2, zero, zero],
        [za * jpa, -zl * jp2, -zl * hp2, zero, zero],
        [zero, j1, h1, -je, -he],
        [zero, zl * jp1, zl * hp1, -ze * jpe, -ze * hpe],
        [zero, zero, zero, omega * jpr, omega * hpr],
    ];
    let rhs = [zero, zero, zero, zero, psi_n];
    let mut m = DMatrix::from_fn(5, 5, |i, j| rows[i][j]);
    let mut b = DVector::from_iterator(5, rhs);

    // Ruiz equilibration: alternate square-root row and column scalings until
    // every row and column has unit max-norm.
    let mut row_scale = [1.0f64; 5];
    let mut col_scale = [1.0f64; 5];
    for _ in 0..60 {
        let r: Vec<f64> = (0..5)
            .map(|i| m.row(i).iter().map(|v| v.norm()).fold(0.0, f64::max))
            .collect();
        let c: Vec<f64> = (0..5)
            .map(|j| m.column(j).iter().map(|v| v.norm()).fold(0.0, f64::max))
            .collect();
        if r.iter().chain(&c).any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::OracleUnreliable(f64::INFINITY));
        }
        if r.iter().chain(&c).all(|v| (v - 1.0).abs() < 1e-3) {
            break;
        }
        for i in 0..5 {
            let f = 1.0 / r[i].sqrt();
            m.row_mut(i).scale_mut(f);
            row_scale[i] *= f;
        }
        for j in 0..5 {
            let f = 1.0 / c[j].sqrt();
            m.column_mut(j).scale_mut(f);
            col_scale[j] *= f;
        }
    }
    for i in 0..5 {
        b[i] *= row_scale[i];
    }

    let lu = m.clone().lu();
    let inverse = lu
        .try_inverse()
        .ok_or(Error::OracleUnreliable(f64::INFINITY))?;
    let norm1 = |a: &DMatrix<Complex64>| {
        (0..a.ncols())
            .map(|j| a.column(j).iter().map(|v| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    };
    let condition = norm1(&m) * norm1(&inverse);
    if condition.is_nan() || condition > ORACLE_CONDITION_LIMIT {
        return Err(Error::OracleUnreliable(condition));
    }
    let y = m
        .clone()
        .lu()
        .solve(&b)
        .ok_or(Error::OracleUnreliable(condition))?;
    let x: Vec<Complex64> = (0..5).map(|j| y[j] * col_scale[j]).collect();

    let residual = (0..5)
        .map(|i| {
            let terms: Vec<Complex64> = (0..5).map(|j| rows[i][j] * x[j]).collect();
            let size = terms.iter().map(|t| t.norm()).fold(rhs[i].norm(), f64::max);
            let r: Complex64 = terms.iter().sum::<Complex64>() - rhs[i];
            if size == 0.0 {
                0.0
            } else {
                r.norm() / size
            }
        })
        .fold(0.0, f64::max);

    Ok(CloakCoefficients {
        e: x[0],
        c: x[1],
        d: x[2],
        a: x[3],
        b: x[4],
        condition,
        residual,
    })
}

/// Condition imposed at the innermost radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnerCondition {
    /// Regular at the origin.
    Regular,
    /// Vanishing flux at the inner radius.
    Neumann,
}

/// A stack of homogeneous shells for direct radial integration.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProblem {
    pub dim: Dimension,
    pub omega: f64,
    pub layers: Vec<Layer>,
    pub inner: InnerCondition,
}

impl RadialProblem {
    pub fn cloak(c: &CloakConfig) -> Self {
        let layers = super::CloakLadder::new(c).layers().to_vec();
        Self {
            dim: c.dim,
            omega: c.omega,
            layers,
            inner: InnerCondition::Regular,
        }
    }

    pub fn free(dim: Dimension, omega: f64, radius: f64) -> Self {
        Self {
            dim,
            omega,
            layers: vec![super::background(0.0, radius)],
            inner: InnerCondition::Regular,
        }
    }

    pub fn sound_hard(dim: Dimension, omega: f64, radius: f64, rho: f64) -> Self {
        Self {
            dim,
            omega,
            layers: vec![super::background(rho, radius)],
            inner: InnerCondition::Neumann,
        }
    }

    /// `u(R)` for outer Neumann datum `psi_n` in order `n`, integrating
    /// `(σ r^{N−1} u')' + (ω² q − σλ/r²) r^{N−1} u = 0` outward.
    pub fn boundary_value(&self, n: usize, psi_n: Complex64) -> Result<Complex64> {
        let first = self.layers[0];
        let lambda = self.dim.eigenvalue(n);
        let dims = self.dim.as_usize() as f64;
        let (start, mut state) = match self.inner {
            InnerCondition::Neumann => (
                first.inner,
                [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            ),
            InnerCondition::Regular => {
                let r0 = first.outer / 4.0;
                let k = first.wavenumber(self.omega);
                let (u, du) = regular_series(n, dims, lambda, k * r0);
                (r0, [u, first.sigma * du / r0])
            }
        };
        for layer in &self.layers {
            let from = start.max(layer.inner);
            let sys = RadialSystem {
                sigma: layer.sigma,
                q: layer.q,
                omega2: self.omega * self.omega,
                lambda,
                dims,
            };
            let size = state[0].norm().max(state[1].norm() / layer.sigma);
            let y0 = Vector4::new(state[0].re, state[0].im, state[1].re, state[1].im) / size;
            let mut solver = Dopri5::from_param(
                sys,
                from,
                layer.outer,
                layer.outer - from,
                y0,
                1e-12,
                1e-16,
                0.9,
                0.04,
                0.2,
                10.0,
                layer.outer - from,
                (layer.outer - from) * 1e-4,
                2_000_000,
                1000,
                OutputType::Sparse,
            );
            solver
                .integrate()
                .map_err(|e| Error::OracleFailure(format!("order {n}: {e}")))?;
            let y = solver
                .y_out()
                .last()
                .ok_or_else(|| Error::OracleFailure("integrator produced no output".into()))?;
            state = [Complex64::new(y[0], y[1]), Complex64::new(y[2], y[3])];
        }
        if state[1].norm() == 0.0 {
            return Err(Error::OracleFailure(format!("order {n}: zero outer flux")));
        }
        Ok(psi_n * state[0] / state[1])
    }
}

/// `(u, r u')` of the regular solution `Σ t_j (r/r₀)^{n+2j}` at `r₀`, with the
/// common factor `r₀^n` dropped. `x = k r₀`.
fn regular_series(n: usize, dims: f64, lambda: f64, x: Complex64) -> (Complex64, Complex64) {
    let x2 = x * x;
    let mut term = Complex64::new(1.0, 0.0);
    let mut u = term;
    let mut du = term * n as f64;
    for j in 1..500 {
        let m = (n + 2 * j) as f64;
        term *= -x2 / (m * (m + dims - 2.0) - lambda);
        u += term;
        du += term * m;
        if term.norm() * m < 1e-18 * u.norm() {
            break;
        }
    }
    (u, du)
}

struct RadialSystem {
    sigma: f64,
    q: Complex64,
    omega2: f64,
    lambda: f64,
    dims: f64,
}

impl System<f64, Vector4<f64>> for RadialSystem {
    fn system(&self, r: f64, y: &Vector4<f64>, dy: &mut Vector4<f64>) {
        let u = Complex64::new(y[0], y[1]);
        let p = Complex64::new(y[2], y[3]);
        let du = p / self.sigma;
        let dp = -(self.dims - 1.0) / r * p
            - (self.omega2 * self.q - self.sigma * self.lambda / (r * r)) * u;
        dy[0] = du.re;
        dy[1] = du.im;
        dy[2] = dp.re;
        dy[3] = dp.im;
    }
}

/// Boundary trace of the cloak problem of order `n` by direct radial integration.
pub fn radial_ode_oracle(c: &CloakConfig, n: usize, psi_n: Complex64) -> Result<Complex64> {
    c.validate()?;
    RadialProblem::cloak(c).boundary_value(n, psi_n)
}

impl CloakCoefficients {
    /// The same coefficients in per-layer form.
    pub fn layers(&self) -> [RadialCoefficients; 3] {
        let x = crate::specfun::ExpComplex::from_complex;
        [
            RadialCoefficients {
                regular: x(self.e),
                outgoing: crate::specfun::ExpComplex::ZERO,
            },
            RadialCoefficients {
                regular: x(self.c),
                outgoing: x(self.d),
            },
            RadialCoefficients {
                regular: x(self.a),
                outgoing: x(self.b),
            },
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sobolev::ModalDensity;
    use crate::solver::{cloak_mode_transfer, solve_cloak};

    #[test]
    fn dense_solve_matches_ladder() {
        for dim in [Dimension::Two, Dimension::Three] {
            let c = CloakConfig::reference(dim, 0.05);
            let psi = ModalDensity::zeros(dim, 2.0, 6)
                .unwrap()
                .scale_orders(|_| Complex64::new(1.0, 0.0));
            let mut psi = psi;
            for n in 0..=6 {
                match dim {
                    Dimension::Two => psi.set_2d(n as i64, Complex64::new(1.0, 0.0)),
                    Dimension::Three => psi.set_3d(n, 0, Complex64::new(1.0, 0.0)).unwrap(),
                }
            }
            let sol = solve_cloak(&c, &psi).unwrap();
            for n in 0..=6 {
                let o = direct_mode_solve(&c, n, Complex64::new(1.0, 0.0)).unwrap();
                assert!(o.residual < 1e-10, "residual {}", o.residual);
                let k = sol.unit_coefficients(n);
                let pairs = [
                    (o.e, k[0].regular),
                    (o.c, k[1].regular),
                    (o.d, k[1].outgoing),
                    (o.a, k[2].regular),
                    (o.b, k[2].outgoing),
                ];
                for (i, (x, y)) in pairs.iter().enumerate() {
                    let y = y.to_complex();
                    assert!(
                        (x - y).norm() <= 1e-8 * x.norm(),
                        "{dim:?} n={n} #{i}: {x} vs {y}"
                    );
                }
                let t = cloak_mode_transfer(&c, n).unwrap();
                let g = t.gamma.to_complex();
                assert!((o.b / o.a - g).norm() <= 1e-8 * g.norm());
            }
        }
    }

    #[test]
    fn ode_reproduces_free_diagonal() {
        for dim in [Dimension::Two, Dimension::Three] {
            let p = RadialProblem::free(dim, 1.0, 2.0);
            for n in 0..4 {
                let u = p.boundary_value(n, Complex64::new(1.0, 0.0)).unwrap();
                let j = j_quad(dim.family(), n, Complex64::new(2.0, 0.0)).unwrap();
                let d0 = (j.value / j.deriv).to_complex();
                assert!(
                    (u - d0).norm() <= 1e-8 * d0.norm(),
                    "{dim:?} n={n}: {u} vs {d0}"
                );
            }
        }
    }

    #[test]
    fn no_cloak_dense_solve_has_no_reflection() {
        let mut c = CloakConfig::reference(Dimension::Two, 0.1);
        c.no_cloak = true;
        let o = direct_mode_solve(&c, 2, Complex64::new(1.0, 0.0)).unwrap();
        assert!(o.b.norm() < 1e-12 * o.a.norm());
        assert!((o.e - o.a).norm() < 1e-10 * o.a.norm());
    }
}
