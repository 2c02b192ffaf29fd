//! Two-particle correlation `Gamma_{k,l}(t) = <a+_k a+_l a_l a_k>(t)`.
//!
//! Everything is expressed through the single-particle propagator. For a
//! canonical pair `i = (q, r)` the amplitude of finding the bosons on
//! `(k, l)` is
//!
//! ```text
//! A_kl(i) = (U_kq U_lr + U_kr U_lq) / sqrt(1 + delta_qr)
//! ```
//!
//! and `Gamma_kl = sum_ij rho_ij A_kl(i) conj(A_kl(j))`. Expanding the
//! products gives the four-term sum over singly occupied pairs, the two
//! `sqrt(2)` cross sums between doubly and singly occupied pairs, and the
//! `2 rho_{qq,q'q'}` sum over doubly occupied pairs.
//!
//! Two evaluation routes share that definition:
//! * sparse: accumulate over the nonzero entries of `rho`, `O(nnz)` per
//!   `(k, l)`; the natural fit for the family and beam states;
//! * dense: contract `U (x) U` into `rho` one site index at a time, `O(L^5)`
//!   in total instead of `O(L^6)`.
//!
//! Only `k <= l` is evaluated; the lower triangle is mirrored, so outputs
//! are exactly symmetric.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::bessel::BesselRow;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::fock::{normalization, FockBasis};
use crate::propagator::{check_wrap_margin, ring_displacement, Propagator};
use crate::states::{CoherenceFamily, TwoBosonDensityMatrix};

pub const SUM_RULE_TOL: f64 = 1e-10;
pub const NEGATIVITY_FLOOR: f64 = -1e-10;
pub const IMAG_RESIDUE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    time: f64,
    entries: DMatrix<f64>,
    imag_residue: f64,
}

/// Invariant measurements of a [`CorrelationMatrix`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationCheck {
    /// `|sum_kl Gamma_kl - 2|`.
    pub sum_rule_error: f64,
    pub symmetry_error: f64,
    pub min_entry: f64,
    pub imag_residue: f64,
}

impl CorrelationCheck {
    pub fn passes(&self) -> bool {
        self.sum_rule_error <= SUM_RULE_TOL
            && self.symmetry_error <= 1e-12
            && self.min_entry >= NEGATIVITY_FLOOR
            && self.imag_residue <= IMAG_RESIDUE_TOL
    }
}

impl CorrelationMatrix {
    pub fn from_entries(time: f64, entries: DMatrix<f64>) -> Self {
        CorrelationMatrix {
            time,
            entries,
            imag_residue: 0.0,
        }
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn num_sites(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    #[inline]
    pub fn get(&self, k: usize, l: usize) -> f64 {
        self.entries[(k, l)]
    }

    /// Largest imaginary part discarded when the entries were formed.
    pub fn imag_residue(&self) -> f64 {
        self.imag_residue
    }

    pub fn total(&self) -> f64 {
        // Row by row in index order, for reproducible rounding.
        let n = self.num_sites();
        (0..n)
            .map(|k| (0..n).map(|l| self.entries[(k, l)]).sum::<f64>())
            .sum()
    }

    pub fn check(&self) -> CorrelationCheck {
        let n = self.num_sites();
        let mut symmetry_error = 0.0f64;
        for k in 0..n {
            for l in 0..k {
                symmetry_error = symmetry_error.max((self.entries[(k, l)] - self.entries[(l, k)]).abs());
            }
        }
        CorrelationCheck {
            sum_rule_error: (self.total() - 2.0).abs(),
            symmetry_error,
            min_entry: self.entries.iter().copied().fold(f64::INFINITY, f64::min),
            imag_residue: self.imag_residue,
        }
    }

    pub fn max_abs_diff(&self, other: &CorrelationMatrix) -> f64 {
        self.entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Assembles a symmetric matrix from upper-triangle rows: `rows[k]` holds
/// `Gamma_{k,l}` for `l = k..L`.
fn assemble(time: f64, n: usize, rows: Vec<Vec<Complex64>>) -> CorrelationMatrix {
    let mut entries = DMatrix::<f64>::zeros(n, n);
    let mut imag_residue = 0.0f64;
    for (k, row) in rows.into_iter().enumerate() {
        for (offset, value) in row.into_iter().enumerate() {
            let l = k + offset;
            imag_residue = imag_residue.max(value.im.abs());
            entries[(k, l)] = value.re;
            entries[(l, k)] = value.re;
        }
    }
    CorrelationMatrix {
        time,
        entries,
        imag_residue,
    }
}

/// How [`gamma_general_with`] evaluates the sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GammaStrategy {
    /// Sparse when `rho` has at most `L^3` nonzero entries, dense otherwise.
    #[default]
    Auto,
    Sparse,
    Dense,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GammaOptions {
    pub strategy: GammaStrategy,
    pub exec: Exec,
}

/// `A_kl(q, r)` for a canonical pair.
#[inline]
fn pair_amplitude(u: &DMatrix<Complex64>, k: usize, l: usize, q: usize, r: usize) -> Complex64 {
    (u[(k, q)] * u[(l, r)] + u[(k, r)] * u[(l, q)]) * normalization(q, r)
}

/// Correlation for an arbitrary two-boson density matrix.
pub fn gamma_general(rho: &TwoBosonDensityMatrix, u: &Propagator) -> Result<CorrelationMatrix> {
    gamma_general_with(rho, u, GammaOptions::default())
}

pub fn gamma_general_with(rho: &TwoBosonDensityMatrix, u: &Propagator, options: GammaOptions) -> Result<CorrelationMatrix> {
    let n = rho.num_sites();
    if u.num_sites() != n {
        return Err(Error::Dimension(format!(
            "propagator has {} sites, density matrix {}",
            u.num_sites(),
            n
        )));
    }
    let dense = match options.strategy {
        GammaStrategy::Dense => true,
        GammaStrategy::Sparse => false,
        GammaStrategy::Auto => {
            let nnz = rho.matrix().iter().filter(|z| **z != Complex64::new(0.0, 0.0)).count();
            nnz > n * n * n
        }
    };
    let rows = if dense {
        dense_rows(rho, u, options.exec)
    } else {
        sparse_rows(rho, u, options.exec)
    };
    Ok(assemble(u.time(), n, rows))
}

fn sparse_rows(rho: &TwoBosonDensityMatrix, u: &Propagator, exec: Exec) -> Vec<Vec<Complex64>> {
    let n = rho.num_sites();
    let basis = FockBasis::new(n);
    let entries = rho.nonzero_entries();

    // Distinct basis states touched by rho, and each entry's slots into them.
    let mut slot_of = vec![usize::MAX; basis.dim()];
    let mut touched = Vec::new();
    for &(i, j, _) in &entries {
        for s in [i, j] {
            if slot_of[s] == usize::MAX {
                slot_of[s] = touched.len();
                touched.push(basis.pairs()[s]);
            }
        }
    }
    let terms: Vec<(usize, usize, Complex64)> = entries
        .iter()
        .map(|&(i, j, v)| (slot_of[i], slot_of[j], v))
        .collect();

    let um = u.matrix();
    exec.map_indexed(n, |k| {
        let mut amps = vec![Complex64::new(0.0, 0.0); touched.len()];
        (k..n)
            .map(|l| {
                for (a, &(q, r)) in amps.iter_mut().zip(&touched) {
                    *a = pair_amplitude(um, k, l, q, r);
                }
                terms
                    .iter()
                    .map(|&(si, sj, v)| v * amps[si] * amps[sj].conj())
                    .sum()
            })
            .collect()
    })
}

/// `Gamma_kl = sum_j y_kl(j) conj(A_kl(j))` with
/// `y_kl(j) = sum_{q,r ordered} U_kq U_lr m_qr rho_{(qr), j}` and
/// `m_qr = sqrt(1 + delta_qr)`. For fixed `k` the `q` contraction is shared
/// by every `l`.
fn dense_rows(rho: &TwoBosonDensityMatrix, u: &Propagator, exec: Exec) -> Vec<Vec<Complex64>> {
    let n = rho.num_sites();
    let basis = FockBasis::new(n);
    let d = basis.dim();
    let um = u.matrix();
    let zero = Complex64::new(0.0, 0.0);

    // Row-major copy of rho with the ordered-pair weight folded in:
    // weighted[(q * n + r) * d + j] = m_qr rho_{(qr), j}.
    let mut weighted = vec![zero; n * n * d];
    for q in 0..n {
        for r in 0..n {
            let i = basis.index_of_unchecked(q, r);
            let m = if q == r { std::f64::consts::SQRT_2 } else { 1.0 };
            let dst = &mut weighted[(q * n + r) * d..(q * n + r + 1) * d];
            for (j, slot) in dst.iter_mut().enumerate() {
                *slot = rho.matrix()[(i, j)] * m;
            }
        }
    }

    exec.map_indexed(n, |k| {
        // x[r * d + j] = sum_q U_kq weighted[(q, r), j]
        let mut x = vec![zero; n * d];
        for q in 0..n {
            let ukq = um[(k, q)];
            if ukq == zero {
                continue;
            }
            let src = &weighted[q * n * d..(q + 1) * n * d];
            for (xv, wv) in x.iter_mut().zip(src) {
                *xv += ukq * wv;
            }
        }
        let mut y = vec![zero; d];
        (k..n)
            .map(|l| {
                y.fill(zero);
                for r in 0..n {
                    let ulr = um[(l, r)];
                    if ulr == zero {
                        continue;
                    }
                    for (yv, xv) in y.iter_mut().zip(&x[r * d..(r + 1) * d]) {
                        *yv += ulr * xv;
                    }
                }
                basis
                    .pairs()
                    .iter()
                    .zip(&y)
                    .map(|(&(q, r), yv)| yv * pair_amplitude(um, k, l, q, r).conj())
                    .sum()
            })
            .collect()
    })
}

/// Checks that the two injection sites `origin`, `origin + 1` exist.
fn check_origin(num_sites: usize, origin: usize) -> Result<()> {
    if origin + 1 >= num_sites {
        Err(Error::SiteOutOfRange {
            site: origin + 1,
            num_sites,
        })
    } else {
        Ok(())
    }
}

/// Specialization to the coherence family injected at `origin`, `origin + 1`:
///
/// `Gamma_qr = 2 gamma Re(e^{i phi} U_q0 U_r0 U*_r1 U*_q1)
///           + 2 alpha |U_r0 U_q0|^2 + 2 (1 - alpha) |U_r1 U_q1|^2`.
pub fn gamma_family(p: &CoherenceFamily, u: &Propagator, origin: usize) -> Result<CorrelationMatrix> {
    let n = u.num_sites();
    check_origin(n, origin)?;
    let um = u.matrix();
    let (alpha, gamma) = (p.alpha(), p.gamma());
    let phase = Complex64::from_polar(1.0, p.phi());
    let rows = (0..n)
        .map(|q| {
            (q..n)
                .map(|r| {
                    let from0 = um[(q, origin)] * um[(r, origin)];
                    let from1 = um[(q, origin + 1)] * um[(r, origin + 1)];
                    let coherent = 2.0 * gamma * (phase * from0 * from1.conj()).re;
                    let value = coherent + 2.0 * alpha * from0.norm_sqr() + 2.0 * (1.0 - alpha) * from1.norm_sqr();
                    Complex64::new(value, 0.0)
                })
                .collect()
        })
        .collect();
    Ok(assemble(u.time(), n, rows))
}

/// The three pieces of the Bessel-form correlation on a uniform ring, kept
/// apart so the interference term can be inspected on its own.
#[derive(Debug, Clone, PartialEq)]
pub struct BesselCorrelationTerms {
    time: f64,
    /// `-J_q J_r J_{r-1} J_{q-1}`
    pub interference: DMatrix<f64>,
    /// `(J_q J_r)^2`
    pub from_first: DMatrix<f64>,
    /// `(J_{r-1} J_{q-1})^2`
    pub from_second: DMatrix<f64>,
}

impl BesselCorrelationTerms {
    /// Positions are measured from `origin` along the shorter arc of the
    /// ring; `J` is evaluated at `tau = 2Ct`.
    pub fn new(coupling: f64, t: f64, num_sites: usize, origin: usize) -> Result<Self> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::InvalidTime(t));
        }
        check_origin(num_sites, origin)?;
        let tau = 2.0 * coupling * t;
        check_wrap_margin(tau, num_sites)?;
        let row = BesselRow::new(num_sites / 2 + 1, tau);
        let pos: Vec<i64> = (0..num_sites)
            .map(|q| ring_displacement(q as i64 - origin as i64, num_sites))
            .collect();
        let first: Vec<f64> = pos.iter().map(|&n| row.j(n)).collect();
        let second: Vec<f64> = pos.iter().map(|&n| row.j(n - 1)).collect();
        // Pair the factors per site so every entry is exactly symmetric.
        let mixed: Vec<f64> = first.iter().zip(&second).map(|(f, s)| f * s).collect();
        let interference = DMatrix::from_fn(num_sites, num_sites, |q, r| -(mixed[q] * mixed[r]));
        let from_first = DMatrix::from_fn(num_sites, num_sites, |q, r| (first[q] * first[r]).powi(2));
        let from_second = DMatrix::from_fn(num_sites, num_sites, |q, r| (second[r] * second[q]).powi(2));
        Ok(BesselCorrelationTerms {
            time: t,
            interference,
            from_first,
            from_second,
        })
    }

    /// `2 gamma cos(phi) I + 2 alpha F + 2 (1 - alpha) S` for explicit weights.
    pub fn combine(&self, alpha: f64, gamma: f64, phi: f64) -> CorrelationMatrix {
        let w = 2.0 * gamma * phi.cos();
        let n = self.interference.nrows();
        let entries = DMatrix::from_fn(n, n, |q, r| {
            w * self.interference[(q, r)] + 2.0 * alpha * self.from_first[(q, r)] + 2.0 * (1.0 - alpha) * self.from_second[(q, r)]
        });
        CorrelationMatrix::from_entries(self.time, entries)
    }

    pub fn correlation(&self, p: &CoherenceFamily) -> CorrelationMatrix {
        self.combine(p.alpha(), p.gamma(), p.phi())
    }
}

/// Closed form on the uniform ring:
///
/// `Gamma_qr = -2 gamma cos(phi) J_q J_r J_{r-1} J_{q-1}
///             + 2 alpha (J_q J_r)^2 + 2 (1 - alpha) (J_{r-1} J_{q-1})^2`.
pub fn gamma_bessel(p: &CoherenceFamily, coupling: f64, t: f64, num_sites: usize, origin: usize) -> Result<CorrelationMatrix> {
    Ok(BesselCorrelationTerms::new(coupling, t, num_sites, origin)?.correlation(p))
}

/// Two-particle representation of `U` on the canonical basis:
/// `W[(kl), (qr)] = (U_kq U_lr + U_kr U_lq) / (sqrt(1 + delta_kl) sqrt(1 + delta_qr))`.
pub fn two_particle_unitary(u: &Propagator) -> DMatrix<Complex64> {
    let basis = FockBasis::new(u.num_sites());
    let um = u.matrix();
    let pairs = basis.pairs();
    DMatrix::from_fn(basis.dim(), basis.dim(), |a, b| {
        let (k, l) = pairs[a];
        let (q, r) = pairs[b];
        pair_amplitude(um, k, l, q, r) * normalization(k, l)
    })
}
