//! Two-boson pure states and density matrices over the canonical Fock basis,
//! plus the two-beam and coherence-family constructions.
//!
//! The family and beam states live on two "injection" sites: `origin`
//! (label 0 on a centered lattice) and `origin + 1` (labelled 1).

use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::eigen::hermitian_eigenvalues;
use crate::error::{Error, Result};
use crate::fock::FockBasis;

pub const HERMITICITY_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = 1e-10;
pub const PURITY_TOL: f64 = 1e-12;
/// Slack on the family's lower coherence bound, absorbing rounding in
/// `1 - 4 alpha (1 - alpha)`.
pub const PHYSICALITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct TwoBosonPureState {
    basis: FockBasis,
    amplitudes: DVector<Complex64>,
}

impl TwoBosonPureState {
    pub fn num_sites(&self) -> usize {
        self.basis.num_sites()
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn amplitude(&self, q: usize, r: usize) -> Result<Complex64> {
        Ok(self.amplitudes[self.basis.index_of(q, r)?])
    }
}

/// Builds a normalized pure state from `(q, r, c_qr)` terms. Terms for
/// `(q, r)` and `(r, q)` name the same basis vector and are added.
pub fn pure_state(num_sites: usize, coeffs: &[(usize, usize, Complex64)]) -> Result<TwoBosonPureState> {
    let basis = FockBasis::new(num_sites);
    let mut amplitudes = DVector::<Complex64>::zeros(basis.dim());
    for &(q, r, c) in coeffs {
        if !(c.re.is_finite() && c.im.is_finite()) {
            return Err(Error::NonFinite("pure-state amplitude"));
        }
        amplitudes[basis.index_of(q, r)?] += c;
    }
    let norm = amplitudes.norm();
    if norm == 0.0 {
        return Err(Error::ZeroNorm);
    }
    amplitudes.unscale_mut(norm);
    Ok(TwoBosonPureState { basis, amplitudes })
}

/// A validated `D x D` density matrix over the canonical two-boson basis.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoBosonDensityMatrix {
    num_sites: usize,
    matrix: DMatrix<Complex64>,
}

impl TwoBosonDensityMatrix {
    /// Validates `matrix` and wraps it. Rejects anything [`validate`] rejects.
    pub fn new(num_sites: usize, matrix: DMatrix<Complex64>) -> Result<Self> {
        let report = validate(num_sites, &matrix);
        if report.accepted() {
            Ok(TwoBosonDensityMatrix { num_sites, matrix })
        } else {
            Err(Error::InvalidDensity(report))
        }
    }

    /// For matrices that are valid by construction (outer products, convex
    /// combinations, unitary conjugation). Only the shape is checked.
    pub(crate) fn from_trusted(num_sites: usize, matrix: DMatrix<Complex64>) -> Self {
        let d = FockBasis::new(num_sites).dim();
        debug_assert_eq!((matrix.nrows(), matrix.ncols()), (d, d));
        TwoBosonDensityMatrix { num_sites, matrix }
    }

    pub fn num_sites(&self) -> usize {
        self.num_sites
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    /// `rho_{qr, q'r'}` for unordered pairs.
    pub fn entry(&self, q: usize, r: usize, q2: usize, r2: usize) -> Result<Complex64> {
        let basis = FockBasis::new(self.num_sites);
        Ok(self.matrix[(basis.index_of(q, r)?, basis.index_of(q2, r2)?)])
    }

    /// `Tr(rho^2)`.
    pub fn purity(&self) -> f64 {
        purity(&self.matrix)
    }

    /// Nonzero entries `(i, j, rho_ij)` in row-major order.
    pub fn nonzero_entries(&self) -> Vec<(usize, usize, Complex64)> {
        let d = self.dim();
        let mut out = Vec::new();
        for i in 0..d {
            for j in 0..d {
                let v = self.matrix[(i, j)];
                if v != Complex64::new(0.0, 0.0) {
                    out.push((i, j, v));
                }
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &TwoBosonDensityMatrix) -> f64 {
        self.matrix
            .iter()
            .zip(other.matrix.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

fn purity(m: &DMatrix<Complex64>) -> f64 {
    let d = m.nrows();
    let mut total = 0.0;
    for i in 0..d {
        for j in 0..d {
            total += (m[(i, j)] * m[(j, i)]).re;
        }
    }
    total
}

/// Degree of coherence `eta = 2 Tr(rho^2) - 1`.
pub fn coherence_eta(rho: &TwoBosonDensityMatrix) -> f64 {
    2.0 * rho.purity() - 1.0
}

pub fn density_from_pure(psi: &TwoBosonPureState) -> TwoBosonDensityMatrix {
    let a = &psi.amplitudes;
    TwoBosonDensityMatrix::from_trusted(psi.num_sites(), a * a.adjoint())
}

/// Parameters `(alpha, eta, phi)` of the two-site coherence family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherenceFamily {
    alpha: f64,
    eta: f64,
    phi: f64,
}

/// Smallest admissible `eta` for population `alpha`.
pub fn eta_lower_bound(alpha: f64) -> f64 {
    1.0 - 4.0 * alpha * (1.0 - alpha)
}

impl CoherenceFamily {
    pub fn new(alpha: f64, eta: f64, phi: f64) -> Result<Self> {
        if !(alpha.is_finite() && eta.is_finite() && phi.is_finite()) {
            return Err(Error::NonFinite("coherence family parameters"));
        }
        let lower = eta_lower_bound(alpha);
        let alpha_ok = (0.0..=1.0).contains(&alpha);
        if !alpha_ok || eta > 1.0 || eta < lower - PHYSICALITY_TOL {
            return Err(Error::Unphysical { alpha, eta, lower });
        }
        Ok(CoherenceFamily { alpha, eta, phi })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn with_eta(&self, eta: f64) -> Result<Self> {
        Self::new(self.alpha, eta, self.phi)
    }

    pub fn with_phi(&self, phi: f64) -> Result<Self> {
        Self::new(self.alpha, self.eta, phi)
    }

    /// `gamma = sqrt(eta - 1 + 4 alpha (1 - alpha))`, the weight of the
    /// interference term.
    pub fn gamma(&self) -> f64 {
        (self.eta - eta_lower_bound(self.alpha)).max(0.0).sqrt()
    }

    /// `rho_{00,11} = e^{i phi} gamma / 2`.
    pub fn coherence(&self) -> Complex64 {
        Complex64::from_polar(0.5 * self.gamma(), self.phi)
    }

    /// Eigenvalues `(1 +- sqrt((2 alpha - 1)^2 + gamma^2)) / 2` of the
    /// populated 2x2 block, larger first.
    pub fn block_eigenvalues(&self) -> (f64, f64) {
        let g = self.gamma();
        let s = ((2.0 * self.alpha - 1.0).powi(2) + g * g).sqrt();
        (0.5 * (1.0 + s), 0.5 * (1.0 - s))
    }
}

fn injection_sites(basis: &FockBasis, origin: usize) -> Result<(usize, usize)> {
    let n = basis.num_sites();
    if origin + 1 >= n {
        return Err(Error::SiteOutOfRange {
            site: origin + 1,
            num_sites: n,
        });
    }
    Ok((
        basis.index_of_unchecked(origin, origin),
        basis.index_of_unchecked(origin + 1, origin + 1),
    ))
}

/// `rho_{00,00} = alpha`, `rho_{11,11} = 1 - alpha`,
/// `rho_{00,11} = conj(rho_{11,00}) = e^{i phi} gamma / 2`, all else zero.
pub fn density_from_family(p: &CoherenceFamily, num_sites: usize, origin: usize) -> Result<TwoBosonDensityMatrix> {
    let basis = FockBasis::new(num_sites);
    let (i0, i1) = injection_sites(&basis, origin)?;
    let d = basis.dim();
    let mut m = DMatrix::<Complex64>::zeros(d, d);
    let c = p.coherence();
    m[(i0, i0)] = Complex64::new(p.alpha, 0.0);
    m[(i1, i1)] = Complex64::new(1.0 - p.alpha, 0.0);
    m[(i0, i1)] = c;
    m[(i1, i0)] = c.conj();
    Ok(TwoBosonDensityMatrix::from_trusted(num_sites, m))
}

/// Incoherent mixture of two beams with intensities `cos^2 delta : sin^2 delta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamParams {
    pub delta: f64,
    pub theta: f64,
    pub phi: f64,
}

/// `rho = cos^2(delta) |psi_1><psi_1| + sin^2(delta) |psi_2><psi_2|` with
/// `psi_1 = cos(theta/2) |2>_1 + sin(theta/2) e^{i phi} |2>_0` and
/// `psi_2 = |2>_1`.
pub fn density_from_beams(p: &BeamParams, num_sites: usize, origin: usize) -> Result<TwoBosonDensityMatrix> {
    if !(p.delta.is_finite() && p.theta.is_finite() && p.phi.is_finite()) {
        return Err(Error::NonFinite("beam parameters"));
    }
    injection_sites(&FockBasis::new(num_sites), origin)?;
    let (s0, s1) = (origin, origin + 1);
    let half = 0.5 * p.theta;
    let psi1 = pure_state(
        num_sites,
        &[
            (s1, s1, Complex64::new(half.cos(), 0.0)),
            (s0, s0, Complex64::from_polar(half.sin(), p.phi)),
        ],
    )?;
    let psi2 = pure_state(num_sites, &[(s1, s1, Complex64::new(1.0, 0.0))])?;
    let w1 = p.delta.cos().powi(2);
    let w2 = p.delta.sin().powi(2);
    let m = density_from_pure(&psi1).matrix * Complex64::new(w1, 0.0)
        + density_from_pure(&psi2).matrix * Complex64::new(w2, 0.0);
    Ok(TwoBosonDensityMatrix::from_trusted(num_sites, m))
}

/// Reads `(alpha, eta, phi)` back from a state supported on the two doubly
/// occupied injection states. `None` if anything else is populated.
pub fn family_params_of(rho: &TwoBosonDensityMatrix, origin: usize) -> Option<CoherenceFamily> {
    let basis = FockBasis::new(rho.num_sites());
    let (i0, i1) = injection_sites(&basis, origin).ok()?;
    let supported = rho
        .nonzero_entries()
        .iter()
        .all(|&(i, j, _)| (i == i0 || i == i1) && (j == i0 || j == i1));
    if !supported {
        return None;
    }
    let m = rho.matrix();
    let alpha = m[(i0, i0)].re;
    let phi = m[(i0, i1)].arg();
    CoherenceFamily::new(alpha, coherence_eta(rho).min(1.0), phi).ok()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ValidationFailure {
    Shape,
    NonFinite,
    NotHermitian,
    Trace,
    NotPositive,
    Purity,
}

/// Outcome of [`validate`]. Deviations are always measured; the eigenvalue
/// is taken on the Hermitian part when the input is not Hermitian.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub hermiticity_deviation: f64,
    pub trace_deviation: f64,
    pub min_eigenvalue: f64,
    pub purity: f64,
    pub failures: Vec<ValidationFailure>,
}

impl ValidationReport {
    pub fn accepted(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "failures {:?} (hermiticity deviation {:.3e}, trace deviation {:.3e}, min eigenvalue {:.3e}, purity {:.6})",
            self.failures, self.hermiticity_deviation, self.trace_deviation, self.min_eigenvalue, self.purity
        )
    }
}

/// Checks Hermiticity, unit trace, positivity and the purity bound of an
/// arbitrary matrix meant as a two-boson density matrix on `num_sites` sites.
pub fn validate(num_sites: usize, m: &DMatrix<Complex64>) -> ValidationReport {
    let d = FockBasis::new(num_sites).dim();
    let mut failures = Vec::new();
    if m.nrows() != d || m.ncols() != d {
        return ValidationReport {
            hermiticity_deviation: f64::NAN,
            trace_deviation: f64::NAN,
            min_eigenvalue: f64::NAN,
            purity: f64::NAN,
            failures: vec![ValidationFailure::Shape],
        };
    }
    if m.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return ValidationReport {
            hermiticity_deviation: f64::NAN,
            trace_deviation: f64::NAN,
            min_eigenvalue: f64::NAN,
            purity: f64::NAN,
            failures: vec![ValidationFailure::NonFinite],
        };
    }

    let adjoint = m.adjoint();
    let hermiticity_deviation = m
        .iter()
        .zip(adjoint.iter())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    if hermiticity_deviation > HERMITICITY_TOL {
        failures.push(ValidationFailure::NotHermitian);
    }

    let trace = m.trace();
    let trace_deviation = (trace - Complex64::new(1.0, 0.0)).norm();
    if trace_deviation > TRACE_TOL {
        failures.push(ValidationFailure::Trace);
    }

    let hermitian_part = (m + &adjoint) * Complex64::new(0.5, 0.0);
    let min_eigenvalue = hermitian_eigenvalues(&hermitian_part)
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    if min_eigenvalue < -PSD_TOL {
        failures.push(ValidationFailure::NotPositive);
    }

    let purity = purity(m);
    if purity > 1.0 + PURITY_TOL {
        failures.push(ValidationFailure::Purity);
    }

    ValidationReport {
        hermiticity_deviation,
        trace_deviation,
        min_eigenvalue,
        purity,
        failures,
    }
}
