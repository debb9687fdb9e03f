//! Modal solver and convergence metrics for a regularized acoustic near-cloak
//! with a lossy lining, in two and three dimensions.

pub mod error;
pub mod material;
pub mod metrics;
pub mod sobolev;
pub mod solver;
pub mod specfun;

pub use error::{Error, Result};

/// Spatial dimension of the problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dimension {
    Two,
    Three,
}

impl Dimension {
    pub fn as_usize(self) -> usize {
        match self {
            Dimension::Two => 2,
            Dimension::Three => 3,
        }
    }

    pub fn from_usize(n: usize) -> Result<Self> {
        match n {
            2 => Ok(Dimension::Two),
            3 => Ok(Dimension::Three),
            _ => Err(Error::InvalidInput(format!(
                "dimension must be 2 or 3, got {n}"
            ))),
        }
    }

    /// Laplace–Beltrami eigenvalue of order `n` on the unit circle/sphere.
    pub fn eigenvalue(self, n: usize) -> f64 {
        let n = n as f64;
        match self {
            Dimension::Two => n * n,
            Dimension::Three => n * (n + 1.0),
        }
    }

    pub(crate) fn family(self) -> specfun::Family {
        match self {
            Dimension::Two => specfun::Family::Cylindrical,
            Dimension::Three => specfun::Family::Spherical,
        }
    }
}
