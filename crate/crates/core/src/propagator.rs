//! Single-particle propagator `U(t) = exp(-i M t)`.
//!
//! `U[(k, q)]` is the amplitude for a particle injected at site `q` to be
//! found at site `k`. Two routes are provided: diagonalization of the
//! coefficient matrix (any lattice) and the Bessel closed form for the
//! uniform ring, `U[(q, r)] = exp(-i 2Ct) i^(q-r) J_(q-r)(2Ct)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::bessel::BesselRow;
use crate::eigen::symmetric_eigen;
use crate::error::{Error, Result};
use crate::lattice::SingleParticleMatrix;

/// Orders kept between the light cone and the ring's antipode before the
/// infinite-lattice closed form is considered invalid.
pub const WRAP_MARGIN: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropagatorMethod {
    Spectral,
    Bessel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Propagator {
    time: f64,
    matrix: DMatrix<Complex64>,
    method: PropagatorMethod,
}

impl Propagator {
    pub fn identity(num_sites: usize, method: PropagatorMethod) -> Self {
        Propagator {
            time: 0.0,
            matrix: DMatrix::identity(num_sites, num_sites),
            method,
        }
    }

    /// Wraps an arbitrary matrix, e.g. a product of propagators.
    pub fn from_matrix(time: f64, matrix: DMatrix<Complex64>, method: PropagatorMethod) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Dimension(format!(
                "propagator must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Propagator { time, matrix, method })
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn method(&self) -> PropagatorMethod {
        self.method
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn num_sites(&self) -> usize {
        self.matrix.nrows()
    }

    /// Amplitude from site `from` to site `to`.
    #[inline]
    pub fn amp(&self, to: usize, from: usize) -> Complex64 {
        self.matrix[(to, from)]
    }

    /// Largest elementwise deviation of `U U^dagger` from the identity.
    pub fn unitarity_error(&self) -> f64 {
        let n = self.num_sites();
        let product = &self.matrix * self.matrix.adjoint();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((product[(i, j)] - target).norm());
            }
        }
        worst
    }

    /// Largest elementwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Propagator) -> f64 {
        self.matrix
            .iter()
            .zip(other.matrix.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidTime(t))
    }
}

/// Eigendecomposition of the coefficient matrix, reused across a time grid.
#[derive(Debug, Clone)]
pub struct SpectralPropagator {
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<Complex64>,
}

impl SpectralPropagator {
    pub fn new(m: &SingleParticleMatrix) -> Self {
        let (eigenvalues, vectors) = symmetric_eigen(m.matrix());
        SpectralPropagator {
            eigenvalues,
            eigenvectors: vectors.map(|v| Complex64::new(v, 0.0)),
        }
    }

    pub fn num_sites(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn at(&self, t: f64) -> Result<Propagator> {
        check_time(t)?;
        let n = self.num_sites();
        if t == 0.0 {
            return Ok(Propagator::identity(n, PropagatorMethod::Spectral));
        }
        let mut scaled = self.eigenvectors.clone();
        for (k, &lambda) in self.eigenvalues.iter().enumerate() {
            let phase = Complex64::from_polar(1.0, -lambda * t);
            for q in 0..n {
                scaled[(q, k)] *= phase;
            }
        }
        let matrix = scaled * self.eigenvectors.transpose();
        Ok(Propagator {
            time: t,
            matrix,
            method: PropagatorMethod::Spectral,
        })
    }
}

pub fn propagate_spectral(m: &SingleParticleMatrix, t: f64) -> Result<Propagator> {
    check_time(t)?;
    if t == 0.0 {
        return Ok(Propagator::identity(m.num_sites(), PropagatorMethod::Spectral));
    }
    SpectralPropagator::new(m).at(t)
}

/// Smallest ring size for which the closed form at `tau` stays inside the
/// wrap-around margin.
pub fn required_ring_sites(tau: f64) -> usize {
    (2.0 * (tau + WRAP_MARGIN)).floor() as usize + 1
}

/// Fails when the light cone at `tau = 2Ct` comes within [`WRAP_MARGIN`]
/// orders of the ring's antipode.
pub fn check_wrap_margin(tau: f64, num_sites: usize) -> Result<()> {
    if tau < num_sites as f64 / 2.0 - WRAP_MARGIN {
        Ok(())
    } else {
        Err(Error::WrapAround {
            tau,
            num_sites,
            required: required_ring_sites(tau),
        })
    }
}

/// Signed displacement `d` in `(-L/2, L/2]` with `d = delta (mod L)`.
pub fn ring_displacement(delta: i64, num_sites: usize) -> i64 {
    let l = num_sites as i64;
    let mut d = delta.rem_euclid(l);
    if 2 * d > l {
        d -= l;
    }
    d
}

/// `i^n` without rounding.
pub fn i_pow(n: i64) -> Complex64 {
    match n.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Closed-form propagator on a uniform ring of `num_sites` sites with
/// coupling `coupling` and on-site energy `2C`.
pub fn propagate_bessel(coupling: f64, num_sites: usize, t: f64) -> Result<Propagator> {
    check_time(t)?;
    if num_sites < 2 {
        return Err(Error::TooFewSites(num_sites));
    }
    if !(coupling.is_finite() && coupling > 0.0) {
        return Err(Error::NotUniformRing("coupling must be positive and finite"));
    }
    let tau = 2.0 * coupling * t;
    check_wrap_margin(tau, num_sites)?;
    if t == 0.0 {
        return Ok(Propagator::identity(num_sites, PropagatorMethod::Bessel));
    }

    let row = BesselRow::new(num_sites / 2, tau);
    let global = Complex64::from_polar(1.0, -tau);
    let matrix = DMatrix::from_fn(num_sites, num_sites, |q, r| {
        let n = ring_displacement(q as i64 - r as i64, num_sites);
        global * i_pow(n) * row.j(n)
    });
    Ok(Propagator {
        time: t,
        matrix,
        method: PropagatorMethod::Bessel,
    })
}
