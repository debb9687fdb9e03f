//! Transformation acoustics: the radial blow-up map, push-forward of media, and
//! assembly of the physical cloak together with its virtual-domain counterpart.

use crate::error::{Error, Result};
use crate::specfun::{j_quad, Family};
use crate::Dimension;
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::fmt::Write as _;

/// Minimum Newton distance of `ωR` from a zero of the derivative of the radial function.
pub const EIGENVALUE_GAP: f64 = 1e-6;

/// Physical and regularization parameters of the construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CloakConfig {
    pub dim: Dimension,
    pub rho: f64,
    pub delta: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub omega: f64,
    /// Outer radius of `Ω = B_R`.
    pub radius: f64,
    pub sigma_a: f64,
    pub q_a: f64,
    /// Use `q_a = q'_a/ρ²` instead of `q'_a/ρ³` in 3D.
    pub paper_literal_3d: bool,
    /// Replace every region by the background medium `(I, 1)`.
    pub no_cloak: bool,
}

impl CloakConfig {
    /// `ω = 1, R = 2, δ = 1, α = β = γ = 1, σ'_a = 2, q'_a = 3`.
    pub fn reference(dim: Dimension, rho: f64) -> Self {
        Self {
            dim,
            rho,
            delta: 1.0,
            alpha: 1.0,
            beta: 1.0,
            gamma: 1.0,
            omega: 1.0,
            radius: 2.0,
            sigma_a: 2.0,
            q_a: 3.0,
            paper_literal_3d: false,
            no_cloak: false,
        }
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = rho;
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("rho", self.rho),
            ("delta", self.delta),
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("omega", self.omega),
            ("R", self.radius),
            ("sigma_a", self.sigma_a),
            ("q_a", self.q_a),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if self.rho >= 0.5 {
            return Err(Error::InvalidInput(format!(
                "rho = {} must be below 1/2",
                self.rho
            )));
        }
        if self.rho >= self.radius / 4.0 {
            return Err(Error::InvalidInput(format!(
                "rho = {} must be below R/4 = {}",
                self.rho,
                self.radius / 4.0
            )));
        }
        check_neumann_eigenvalue(self.dim, self.omega * self.radius)
    }

    pub fn derived(&self) -> DerivedParams {
        DerivedParams::new(self)
    }
}

/// Rejects `x = ωR` within [`EIGENVALUE_GAP`] of a zero of `J_n'` (or `j_n'`).
///
/// Zeros of the derivative of order `n` lie above `n`, so orders up to `x + 2` suffice.
pub fn check_neumann_eigenvalue(dim: Dimension, x: f64) -> Result<()> {
    let family = dim.family();
    let top = x.ceil() as usize + 2;
    for n in 0..=top {
        let q = j_quad(family, n, Complex64::new(x, 0.0))?;
        let (f, fp) = (q.value.to_complex().re, q.deriv.to_complex().re);
        let lambda = dim.eigenvalue(n);
        let fpp = match family {
            Family::Cylindrical => -fp / x - (1.0 - lambda / (x * x)) * f,
            Family::Spherical => -2.0 * fp / x - (1.0 - lambda / (x * x)) * f,
        };
        let distance = (fp / fpp).abs();
        if distance < EIGENVALUE_GAP {
            return Err(Error::EigenvalueProximity { mode: n, distance });
        }
    }
    Ok(())
}

/// Virtual-domain constants derived from a [`CloakConfig`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedParams {
    pub sigma_l: f64,
    pub q_l: Complex64,
    pub sigma_a: f64,
    pub q_a: f64,
    pub omega_a: f64,
    pub omega_l: Complex64,
    /// `√(σ_a q_a) / √(σ_l q_l)`.
    pub contrast: Complex64,
    /// `√σ_l · √q_l`.
    pub impedance_l: Complex64,
    /// `√(σ_a q_a)`.
    pub impedance_a: f64,
}

/// `√(1+i) = 2^{1/4} e^{iπ/8}`.
pub fn sqrt_one_plus_i() -> Complex64 {
    Complex64::from_polar(2f64.powf(0.25), std::f64::consts::PI / 8.0)
}

impl DerivedParams {
    pub fn new(c: &CloakConfig) -> Self {
        let rho = c.rho;
        let sigma_l = c.gamma * rho.powf(2.0 + c.delta);
        let q_l = Complex64::new(c.alpha, c.beta);
        let (sigma_a, q_a) = match c.dim {
            Dimension::Two => (c.sigma_a, c.q_a / (rho * rho)),
            Dimension::Three if c.paper_literal_3d => (c.sigma_a / rho, c.q_a / (rho * rho)),
            Dimension::Three => (c.sigma_a / rho, c.q_a / rho.powi(3)),
        };
        let omega_a = c.omega * (q_a / sigma_a).sqrt();
        let omega_l = c.omega * (q_l / sigma_l).sqrt();
        let impedance_l = sigma_l.sqrt() * q_l.sqrt();
        let impedance_a = (sigma_a * q_a).sqrt();
        Self {
            sigma_l,
            q_l,
            sigma_a,
            q_a,
            omega_a,
            omega_l,
            contrast: impedance_a / impedance_l,
            impedance_l,
            impedance_a,
        }
    }
}

/// Which branch of the blow-up map a point falls in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Core,
    Annulus,
    Exterior,
}

/// Radial blow-up map: `B_ρ` is dilated onto `B_{R₁}` and `B_{R₂} \ B_ρ` is mapped
/// affinely in `|x|` onto `B_{R₂} \ B_{R₁}`; the identity outside `B_{R₂}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlowupMap {
    pub rho: f64,
    pub r1: f64,
    pub r2: f64,
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

impl BlowupMap {
    pub fn new(rho: f64, r1: f64, r2: f64) -> Result<Self> {
        if !(rho > 0.0 && rho < r1 && r1 < r2 && r2.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "blow-up radii must satisfy 0 < rho < R1 < R2, got {rho}, {r1}, {r2}"
            )));
        }
        Ok(Self { rho, r1, r2 })
    }

    fn offset(&self) -> f64 {
        (self.r1 - self.rho) * self.r2 / (self.r2 - self.rho)
    }

    /// Radial slope `(R₂ − R₁)/(R₂ − ρ)` of the annulus branch.
    pub fn slope(&self) -> f64 {
        (self.r2 - self.r1) / (self.r2 - self.rho)
    }

    pub fn branch(&self, r: f64) -> Branch {
        if r < self.rho {
            Branch::Core
        } else if r <= self.r2 {
            Branch::Annulus
        } else {
            Branch::Exterior
        }
    }

    /// `|F(x)|` as a function of `|x|`.
    pub fn radial(&self, r: f64) -> f64 {
        match self.branch(r) {
            Branch::Core => r * self.r1 / self.rho,
            Branch::Annulus => self.offset() + self.slope() * r,
            Branch::Exterior => r,
        }
    }

    /// `|F⁻¹(y)|` as a function of `|y|`.
    pub fn radial_inverse(&self, s: f64) -> f64 {
        if s < self.r1 {
            s * self.rho / self.r1
        } else if s <= self.r2 {
            (s - self.offset()) / self.slope()
        } else {
            s
        }
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_point(x)?;
        let r = norm(x);
        if r == 0.0 {
            return Ok(x.to_vec());
        }
        let k = self.radial(r) / r;
        Ok(x.iter().map(|v| v * k).collect())
    }

    pub fn inverse(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_point(y)?;
        let s = norm(y);
        if s == 0.0 {
            return Ok(y.to_vec());
        }
        let k = self.radial_inverse(s) / s;
        Ok(y.iter().map(|v| v * k).collect())
    }

    /// Radial and tangential stretch of the map at radius `r`.
    pub fn stretches(&self, r: f64) -> (f64, f64) {
        match self.branch(r) {
            Branch::Core => (self.r1 / self.rho, self.r1 / self.rho),
            Branch::Annulus => (self.slope(), self.radial(r) / r),
            Branch::Exterior => (1.0, 1.0),
        }
    }

    /// Jacobian matrix `M = ∂F/∂x` and determinant.
    pub fn jacobian(&self, x: &[f64]) -> Result<(DMatrix<f64>, f64)> {
        check_point(x)?;
        let r = norm(x);
        for edge in [self.rho, self.r2] {
            let gap = (r - edge).abs();
            if gap < 1e-12 {
                return Err(Error::Ambiguity(gap));
            }
        }
        let n = x.len();
        let (radial, tangential) = self.stretches(r);
        let mut m = DMatrix::<f64>::identity(n, n) * tangential;
        if r > 0.0 && radial != tangential {
            let unit = nalgebra::DVector::from_iterator(n, x.iter().map(|v| v / r));
            m += (&unit * unit.transpose()) * (radial - tangential);
        }
        let det = radial * tangential.powi(n as i32 - 1);
        Ok((m, det))
    }
}

fn check_point(x: &[f64]) -> Result<()> {
    if !(x.len() == 2 || x.len() == 3) || x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "point must be a finite 2- or 3-vector, got {x:?}"
        )));
    }
    Ok(())
}

/// `F_*(σ, q) = (MσMᵀ/J, q/J)`.
pub fn push_forward(
    sigma: &DMatrix<f64>,
    q: Complex64,
    m: &DMatrix<f64>,
    det: f64,
) -> Result<(DMatrix<f64>, Complex64)> {
    if det.is_nan() || det <= 0.0 {
        return Err(Error::Orientation(det));
    }
    if !sigma.is_square() || sigma.nrows() != m.nrows() || !m.is_square() {
        return Err(Error::InvalidInput(
            "dimension mismatch in push-forward".into(),
        ));
    }
    let scale = sigma.amax().max(1.0);
    if (sigma - sigma.transpose()).amax() > 1e-14 * scale {
        return Err(Error::InvalidInput("sigma must be symmetric".into()));
    }
    let mut out = m * sigma * m.transpose() / det;
    // Symmetrize away rounding.
    out = (&out + out.transpose()) * 0.5;
    Ok((out, q / det))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Content,
    Lining,
    Cloak,
    Background,
}

impl Region {
    pub fn label(self) -> &'static str {
        match self {
            Region::Content => "content",
            Region::Lining => "lining",
            Region::Cloak => "cloak",
            Region::Background => "background",
        }
    }
}

/// Isotropic medium of the virtual domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VirtualLayer {
    pub sigma: f64,
    pub q: Complex64,
}

/// Virtual description `{I, 1 | σ_l, q_l | σ_a, q_a}` from the outside in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VirtualMedium {
    pub exterior: VirtualLayer,
    pub lossy: VirtualLayer,
    pub core: VirtualLayer,
}

/// Radial material sample of the physical device.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialSample {
    pub r: f64,
    pub sigma_radial: f64,
    pub sigma_tangential: f64,
    pub q: Complex64,
    pub region: Region,
}

/// Physical device occupying `B_R` together with its virtual counterpart.
#[derive(Debug, Clone, PartialEq)]
pub struct CloakAssembly {
    pub config: CloakConfig,
    pub map: BlowupMap,
    pub virtual_medium: VirtualMedium,
    pub derived: DerivedParams,
}

/// Builds the device for `D = B_{R₁}` with the blow-up fixing `∂B_{R₂}`, `R₂ = R`.
pub fn cloak_assembly(c: &CloakConfig, r1: f64) -> Result<CloakAssembly> {
    cloak_assembly_with_outer(c, r1, c.radius)
}

pub fn cloak_assembly_with_outer(c: &CloakConfig, r1: f64, r2: f64) -> Result<CloakAssembly> {
    c.validate()?;
    if r2 > c.radius {
        return Err(Error::InvalidInput(format!(
            "R2 = {r2} exceeds R = {}",
            c.radius
        )));
    }
    let map = BlowupMap::new(c.rho, r1, r2)?;
    let derived = c.derived();
    let background = VirtualLayer {
        sigma: 1.0,
        q: Complex64::new(1.0, 0.0),
    };
    let virtual_medium = if c.no_cloak {
        VirtualMedium {
            exterior: background,
            lossy: background,
            core: background,
        }
    } else {
        VirtualMedium {
            exterior: background,
            lossy: VirtualLayer {
                sigma: derived.sigma_l,
                q: derived.q_l,
            },
            core: VirtualLayer {
                sigma: derived.sigma_a,
                q: Complex64::new(derived.q_a, 0.0),
            },
        }
    };
    Ok(CloakAssembly {
        config: *c,
        map,
        virtual_medium,
        derived,
    })
}

impl CloakAssembly {
    /// Physical medium at radius `r` of the device.
    pub fn physical_at(&self, r: f64) -> MaterialSample {
        let n = self.config.dim.as_usize() as i32;
        let map = &self.map;
        let (region, layer) = if r < map.r1 / 2.0 {
            (Region::Content, self.virtual_medium.core)
        } else if r < map.r1 {
            (Region::Lining, self.virtual_medium.lossy)
        } else if r <= map.r2 {
            (Region::Cloak, self.virtual_medium.exterior)
        } else {
            (Region::Background, self.virtual_medium.exterior)
        };
        let x = map.radial_inverse(r);
        let (a, t) = map.stretches(x);
        let det = a * t.powi(n - 1);
        MaterialSample {
            r,
            sigma_radial: layer.sigma * a * a / det,
            sigma_tangential: layer.sigma * t * t / det,
            q: layer.q / det,
            region,
        }
    }
}

/// Samples the physical device on a radial grid.
pub fn material_map_export(assembly: &CloakAssembly, grid: &[f64]) -> Vec<MaterialSample> {
    grid.iter().map(|&r| assembly.physical_at(r)).collect()
}

/// CSV text with header `r,sigma_rad,sigma_tan,q_re,q_im,region`.
pub fn material_map_csv(rows: &[MaterialSample]) -> String {
    let mut out = String::from("r,sigma_rad,sigma_tan,q_re,q_im,region\n");
    for s in rows {
        let _ = writeln!(
            out,
            "{:e},{:e},{:e},{:e},{:e},{}",
            s.r,
            s.sigma_radial,
            s.sigma_tangential,
            s.q.re,
            s.q.im,
            s.region.label()
        );
    }
    out
}
