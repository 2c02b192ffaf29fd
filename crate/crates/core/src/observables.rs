//! Average separation of the two bosons and the entanglement entropy of a
//! block of sites.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::correlation::{two_particle_unitary, BesselCorrelationTerms, CorrelationMatrix};
use crate::eigen::hermitian_eigenvalues;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::fock::FockBasis;
use crate::lattice::SingleParticleMatrix;
use crate::propagator::{check_wrap_margin, Propagator, SpectralPropagator};
use crate::states::{CoherenceFamily, TwoBosonDensityMatrix};

/// Eigenvalues at or below this are dropped from the entropy sum.
pub const ENTROPY_CUTOFF: f64 = 1e-14;

/// `d = sum_{q > r} (q - r) Gamma_qr`, unnormalized. Site separations are
/// taken in internal index order.
pub fn avg_distance(gamma: &CorrelationMatrix) -> f64 {
    let n = gamma.num_sites();
    (1..n)
        .map(|q| (0..q).map(|r| (q - r) as f64 * gamma.get(q, r)).sum::<f64>())
        .sum()
}

/// `d` divided by the coincidence weight on distinct sites,
/// `sum_{q > r} Gamma_qr`. Zero when that weight vanishes.
pub fn avg_distance_normalized(gamma: &CorrelationMatrix) -> f64 {
    let n = gamma.num_sites();
    let weight: f64 = (1..n).map(|q| (0..q).map(|r| gamma.get(q, r)).sum::<f64>()).sum();
    if weight == 0.0 {
        0.0
    } else {
        avg_distance(gamma) / weight
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

/// `d(t)` for the coherence family on a uniform ring via the Bessel form.
pub fn distance_series(
    p: &CoherenceFamily,
    coupling: f64,
    times: &[f64],
    num_sites: usize,
    origin: usize,
    exec: Exec,
) -> Result<DistanceSeries> {
    if let Some(&last) = times.iter().max_by(|a, b| a.total_cmp(b)) {
        check_wrap_margin(2.0 * coupling * last, num_sites)?;
    }
    let values = exec
        .map_slice(times, |&t| {
            BesselCorrelationTerms::new(coupling, t, num_sites, origin).map(|terms| avg_distance(&terms.correlation(p)))
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(DistanceSeries {
        times: times.to_vec(),
        values,
    })
}

/// Which side of the cut a reduced state describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Sites with index `< cut`.
    Left,
    /// Sites with index `>= cut`.
    Right,
}

/// Reduced density matrix of a block of sites. The block's Fock space with
/// at most two bosons is ordered as vacuum, then one boson on each block
/// site, then the canonical pairs of block sites. Particle number in the
/// block is conserved by the partial trace, so the matrix is block diagonal
/// in that grading.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedDensity {
    sites: Vec<usize>,
    matrix: DMatrix<Complex64>,
}

impl ReducedDensity {
    /// Sites of the block, increasing.
    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Occupation of each block site for every basis state, in basis order.
    pub fn basis_occupations(&self) -> Vec<Vec<u8>> {
        let a = self.sites.len();
        let mut out = vec![vec![0u8; a]];
        for s in 0..a {
            let mut occ = vec![0u8; a];
            occ[s] = 1;
            out.push(occ);
        }
        for &(s, t) in FockBasis::new(a).pairs() {
            let mut occ = vec![0u8; a];
            occ[s] += 1;
            occ[t] += 1;
            out.push(occ);
        }
        out
    }

    /// Eigenvalues, largest first.
    pub fn spectrum(&self) -> Vec<f64> {
        let sizes = block_sizes(self.sites.len());
        let mut spectrum = Vec::with_capacity(self.dim());
        let mut start = 0;
        for size in sizes {
            let block = self.matrix.view((start, start), (size, size)).into_owned();
            spectrum.extend(hermitian_eigenvalues(&block));
            start += size;
        }
        spectrum.sort_by(|a, b| b.total_cmp(a));
        spectrum
    }
}

fn block_sizes(a: usize) -> [usize; 3] {
    [1, a, a * (a + 1) / 2]
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyReport {
    pub time: f64,
    pub cut: usize,
    /// Eigenvalues of the reduced density matrix, largest first.
    pub spectrum: Vec<f64>,
    /// Von Neumann entropy in bits.
    pub entropy: f64,
}

/// `S = -sum_i lambda_i log2 lambda_i` over eigenvalues above [`ENTROPY_CUTOFF`].
pub fn von_neumann_entropy(spectrum: &[f64]) -> f64 {
    let s: f64 = spectrum
        .iter()
        .filter(|&&l| l > ENTROPY_CUTOFF)
        .map(|&l| -l * l.log2())
        .sum();
    s.max(0.0)
}

/// `rho(t) = W rho W^dagger` with `W` the two-particle representation of `u`.
pub fn evolve_density(rho: &TwoBosonDensityMatrix, u: &Propagator) -> Result<TwoBosonDensityMatrix> {
    if u.num_sites() != rho.num_sites() {
        return Err(Error::Dimension(format!(
            "propagator has {} sites, density matrix {}",
            u.num_sites(),
            rho.num_sites()
        )));
    }
    if u.time() == 0.0 && *u.matrix() == DMatrix::identity(u.num_sites(), u.num_sites()) {
        return Ok(rho.clone());
    }
    let w = two_particle_unitary(u);
    let evolved = &w * rho.matrix() * w.adjoint();
    Ok(TwoBosonDensityMatrix::from_trusted(rho.num_sites(), evolved))
}

fn check_cut(num_sites: usize, cut: usize) -> Result<()> {
    if cut == 0 || cut >= num_sites {
        Err(Error::InvalidCut { cut, num_sites })
    } else {
        Ok(())
    }
}

/// Partial trace of a (possibly already evolved) state over everything
/// outside the chosen side of `cut`.
pub fn partial_trace(rho: &TwoBosonDensityMatrix, cut: usize, side: Side) -> Result<ReducedDensity> {
    let n = rho.num_sites();
    check_cut(n, cut)?;
    let inside = |q: usize| match side {
        Side::Left => q < cut,
        Side::Right => q >= cut,
    };
    let sites: Vec<usize> = (0..n).filter(|&q| inside(q)).collect();
    let outside: Vec<usize> = (0..n).filter(|&q| !inside(q)).collect();
    let a = sites.len();

    let basis = FockBasis::new(n);
    let block_basis = FockBasis::new(a);
    let [_, singles, doubles] = block_sizes(a);
    let dim = 1 + singles + doubles;
    let m = rho.matrix();
    let mut out = DMatrix::<Complex64>::zeros(dim, dim);

    // No boson inside: trace over both-outside pairs.
    for (x, &p) in outside.iter().enumerate() {
        for &q in &outside[x..] {
            let i = basis.index_of_unchecked(p, q);
            out[(0, 0)] += m[(i, i)];
        }
    }
    // One boson inside at `s`, the other outside at `b`.
    for (x, &s) in sites.iter().enumerate() {
        for (y, &s2) in sites.iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for &b in &outside {
                acc += m[(basis.index_of_unchecked(s, b), basis.index_of_unchecked(s2, b))];
            }
            out[(1 + x, 1 + y)] = acc;
        }
    }
    // Both inside: copy the block.
    for (x, &(s, t)) in block_basis.pairs().iter().enumerate() {
        let i = basis.index_of_unchecked(sites[s], sites[t]);
        for (y, &(s2, t2)) in block_basis.pairs().iter().enumerate() {
            let j = basis.index_of_unchecked(sites[s2], sites[t2]);
            out[(1 + a + x, 1 + a + y)] = m[(i, j)];
        }
    }
    Ok(ReducedDensity { sites, matrix: out })
}

fn report(time: f64, cut: usize, reduced: &ReducedDensity) -> EntropyReport {
    let spectrum = reduced.spectrum();
    EntropyReport {
        time,
        cut,
        entropy: von_neumann_entropy(&spectrum),
        spectrum,
    }
}

/// Evolves `rho` with `u` and returns the spectrum and entropy of the sites
/// left of `cut`.
pub fn reduced_density_left(rho: &TwoBosonDensityMatrix, u: &Propagator, cut: usize) -> Result<EntropyReport> {
    reduced_density_side(rho, u, cut, Side::Left)
}

pub fn reduced_density_side(rho: &TwoBosonDensityMatrix, u: &Propagator, cut: usize, side: Side) -> Result<EntropyReport> {
    check_cut(rho.num_sites(), cut)?;
    let evolved = evolve_density(rho, u)?;
    Ok(report(u.time(), cut, &partial_trace(&evolved, cut, side)?))
}

/// Left-block entropy along a time grid, using the finite-lattice spectral
/// propagator. The eigendecomposition is shared by all time points.
pub fn entropy_series(
    rho: &TwoBosonDensityMatrix,
    m: &SingleParticleMatrix,
    times: &[f64],
    cut: usize,
    exec: Exec,
) -> Result<Vec<EntropyReport>> {
    if m.num_sites() != rho.num_sites() {
        return Err(Error::Dimension(format!(
            "lattice has {} sites, density matrix {}",
            m.num_sites(),
            rho.num_sites()
        )));
    }
    check_cut(rho.num_sites(), cut)?;
    let spectral = SpectralPropagator::new(m);
    exec.map_slice(times, |&t| {
        let u = spectral.at(t)?;
        reduced_density_left(rho, &u, cut)
    })
    .into_iter()
    .collect()
}

/// Upper bound `log2(dim)` of the entropy of a block of `block_sites` sites.
pub fn max_block_entropy(block_sites: usize) -> f64 {
    (block_sizes(block_sites).iter().sum::<usize>() as f64).log2()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlation::{gamma_bessel, gamma_general};
    use crate::lattice::LatticeSpec;
    use crate::propagator::{propagate_spectral, PropagatorMethod};
    use crate::states::{density_from_family, density_from_pure, pure_state};
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn distance_zero_at_start() {
        let p = CoherenceFamily::new(0.5, 1.0, 0.0).unwrap();
        let g = gamma_bessel(&p, 1.0, 0.0, 41, 20).unwrap();
        assert_eq!(avg_distance(&g), 0.0);
        assert_eq!(avg_distance_normalized(&g), 0.0);
    }

    #[test]
    fn distance_by_hand() {
        let mut e = DMatrix::zeros(3, 3);
        e[(2, 0)] = 0.5;
        e[(0, 2)] = 0.5;
        e[(1, 0)] = 0.25;
        e[(0, 1)] = 0.25;
        e[(1, 1)] = 0.5;
        let g = CorrelationMatrix::from_entries(0.0, e);
        assert!((avg_distance(&g) - 1.25).abs() < 1e-15);
        assert!((avg_distance_normalized(&g) - 1.25 / 0.75).abs() < 1e-15);
    }

    #[test]
    fn distance_is_linear() {
        let p = CoherenceFamily::new(0.3, 0.9, 0.4).unwrap();
        let a = gamma_bessel(&p, 1.0, 1.5, 41, 20).unwrap();
        let b = gamma_bessel(&p, 1.0, 3.0, 41, 20).unwrap();
        let sum = CorrelationMatrix::from_entries(0.0, a.entries() + b.entries());
        assert!((avg_distance(&sum) - avg_distance(&a) - avg_distance(&b)).abs() < 1e-12);
    }

    #[test]
    fn distance_series_checks_margin_and_zero_times() {
        let p = CoherenceFamily::new(0.5, 1.0, 0.0).unwrap();
        let s = distance_series(&p, 1.0, &[0.0, 0.0], 41, 20, Exec::Sequential).unwrap();
        assert_eq!(s.values, vec![0.0, 0.0]);
        assert!(matches!(
            distance_series(&p, 1.0, &[1.0, 6.0], 41, 20, Exec::Sequential).unwrap_err(),
            Error::WrapAround { .. }
        ));
    }

    #[test]
    fn quarter_phase_series_ignore_eta() {
        let times: Vec<f64> = (0..=8).map(|i| 0.5 * i as f64).collect();
        let a = distance_series(&CoherenceFamily::new(0.5, 0.5, FRAC_PI_2).unwrap(), 1.0, &times, 41, 20, Exec::Parallel).unwrap();
        let b = distance_series(&CoherenceFamily::new(0.5, 1.0, FRAC_PI_2).unwrap(), 1.0, &times, 41, 20, Exec::Parallel).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn in_phase_series_dominates_out_of_phase() {
        let times: Vec<f64> = (1..=16).map(|i| 0.25 * i as f64).collect();
        let zero = distance_series(&CoherenceFamily::new(0.5, 1.0, 0.0).unwrap(), 1.0, &times, 61, 30, Exec::Sequential).unwrap();
        let pi = distance_series(&CoherenceFamily::new(0.5, 1.0, PI).unwrap(), 1.0, &times, 61, 30, Exec::Sequential).unwrap();
        for ((t, a), b) in times.iter().zip(&zero.values).zip(&pi.values) {
            assert!(a > b, "t = {t}: {a} <= {b}");
        }
    }

    #[test]
    fn product_state_has_no_entropy() {
        let rho = density_from_pure(&pure_state(6, &[(1, 1, one())]).unwrap());
        let r = reduced_density_left(&rho, &Propagator::identity(6, PropagatorMethod::Spectral), 3).unwrap();
        assert!(r.entropy.abs() < 1e-12);
        assert!((r.spectrum.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_term_schmidt_state_has_one_bit() {
        let rho = density_from_pure(&pure_state(6, &[(1, 1, one()), (4, 4, one())]).unwrap());
        let r = reduced_density_left(&rho, &Propagator::identity(6, PropagatorMethod::Spectral), 3).unwrap();
        assert!((r.entropy - 1.0).abs() < 1e-10);
        assert!((r.spectrum[0] - 0.5).abs() < 1e-12 && (r.spectrum[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn pure_states_have_equal_sides() {
        let m = LatticeSpec::uniform_ring(7, 1.0).build().unwrap().single_particle_matrix();
        let psi = pure_state(7, &[(0, 1, one()), (2, 2, Complex64::new(0.3, -0.4)), (1, 5, Complex64::new(0.0, 0.7))]).unwrap();
        let rho = density_from_pure(&psi);
        for &t in &[0.0, 0.4, 1.7, 3.3] {
            let u = propagate_spectral(&m, t).unwrap();
            for cut in 1..7 {
                let l = reduced_density_side(&rho, &u, cut, Side::Left).unwrap();
                let r = reduced_density_side(&rho, &u, cut, Side::Right).unwrap();
                assert!((l.entropy - r.entropy).abs() < 1e-10, "t={t} cut={cut}");
            }
        }
    }

    #[test]
    fn reduced_trace_is_one_and_bounded() {
        let m = LatticeSpec::uniform_ring(8, 1.0).build().unwrap().single_particle_matrix();
        let rho = density_from_family(&CoherenceFamily::new(0.4, 0.7, 0.3).unwrap(), 8, 3).unwrap();
        let reports = entropy_series(&rho, &m, &[0.0, 0.5, 1.0, 2.0, 4.0], 4, Exec::Parallel).unwrap();
        for r in &reports {
            assert!((r.spectrum.iter().sum::<f64>() - 1.0).abs() < 1e-10);
            assert!(r.spectrum.iter().all(|&l| l >= -1e-10));
            assert!(r.entropy >= 0.0 && r.entropy <= max_block_entropy(4) + 1e-12);
        }
    }

    #[test]
    fn mixed_initial_state_entropy() {
        // Diagonal family state with both injection sites left of the cut:
        // the block inherits the binary mixture.
        let alpha: f64 = 0.3;
        let rho = density_from_family(&CoherenceFamily::new(alpha, 1.0 - 4.0 * alpha * (1.0 - alpha), 0.0).unwrap(), 6, 0).unwrap();
        let r = reduced_density_left(&rho, &Propagator::identity(6, PropagatorMethod::Spectral), 3).unwrap();
        let expected = -alpha * alpha.log2() - (1.0 - alpha) * (1.0 - alpha).log2();
        assert!((r.entropy - expected).abs() < 1e-12);
    }

    #[test]
    fn cut_validation() {
        let rho = density_from_pure(&pure_state(4, &[(0, 0, one())]).unwrap());
        let u = Propagator::identity(4, PropagatorMethod::Spectral);
        assert_eq!(reduced_density_left(&rho, &u, 0).unwrap_err(), Error::InvalidCut { cut: 0, num_sites: 4 });
        assert!(reduced_density_left(&rho, &u, 4).is_err());
    }

    #[test]
    fn block_occupations_order() {
        let rho = density_from_pure(&pure_state(4, &[(0, 0, one())]).unwrap());
        let reduced = partial_trace(&rho, 2, Side::Left).unwrap();
        assert_eq!(
            reduced.basis_occupations(),
            vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![2, 0], vec![1, 1], vec![0, 2]]
        );
        assert_eq!(reduced.matrix()[(3, 3)], one());
    }

    #[test]
    fn evolution_preserves_correlation_route() {
        // Gamma from the evolved state's diagonal equals gamma_general.
        let m = LatticeSpec::uniform_ring(5, 1.0).build().unwrap().single_particle_matrix();
        let u = propagate_spectral(&m, 1.2).unwrap();
        let rho = density_from_pure(&pure_state(5, &[(0, 0, one()), (1, 3, Complex64::new(0.0, FRAC_1_SQRT_2))]).unwrap());
        let evolved = evolve_density(&rho, &u).unwrap();
        let g = gamma_general(&rho, &u).unwrap();
        let basis = FockBasis::new(5);
        for (i, &(q, r)) in basis.pairs().iter().enumerate() {
            let pop = evolved.matrix()[(i, i)].re;
            let expected = if q == r { 2.0 * pop } else { pop };
            assert!((g.get(q, r) - expected).abs() < 1e-12);
        }
    }
}
