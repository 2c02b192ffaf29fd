//! Brute-force reference built directly on the `D`-dimensional two-boson
//! Fock space. Nothing here goes through the single-particle propagator:
//! the Hamiltonian is assembled by applying creation and annihilation
//! operators to occupation vectors, states are evolved with a Taylor-series
//! exponential of it, and observables are read off by operator action.
//! Dense and unoptimized on purpose; meant for `L` up to about 10.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::correlation::{gamma_general, CorrelationMatrix};
use crate::error::Result;
use crate::fock::FockBasis;
use crate::lattice::{Boundary, Couplings, Lattice, LatticeSpec, OnsiteRule};
use crate::propagator::propagate_spectral;
use crate::states::TwoBosonDensityMatrix;

/// Occupation numbers of every site.
pub type Occupation = Vec<u8>;

/// `(amplitude, new occupation)` of `a_q |n>`, `None` when `n_q = 0`.
fn annihilate(q: usize, occ: &Occupation) -> Option<(f64, Occupation)> {
    if occ[q] == 0 {
        return None;
    }
    let mut out = occ.clone();
    out[q] -= 1;
    Some(((occ[q] as f64).sqrt(), out))
}

/// `(amplitude, new occupation)` of `a+_q |n>`.
fn create(q: usize, occ: &Occupation) -> (f64, Occupation) {
    let mut out = occ.clone();
    out[q] += 1;
    (((occ[q] + 1) as f64).sqrt(), out)
}

/// Occupation vector of each canonical basis state.
pub fn basis_occupations(num_sites: usize) -> Vec<Occupation> {
    FockBasis::new(num_sites)
        .pairs()
        .iter()
        .map(|&(q, r)| {
            let mut occ = vec![0u8; num_sites];
            occ[q] += 1;
            occ[r] += 1;
            occ
        })
        .collect()
}

fn index_of_occupation(basis: &FockBasis, occ: &Occupation) -> usize {
    let mut sites = occ
        .iter()
        .enumerate()
        .flat_map(|(q, &n)| std::iter::repeat_n(q, n as usize));
    let q = sites.next().expect("two bosons");
    let r = sites.next().expect("two bosons");
    basis.index_of(q, r).expect("sites in range")
}

/// `D x D` real symmetric Hamiltonian of two bosons on the lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoParticleHamiltonian {
    num_sites: usize,
    matrix: DMatrix<f64>,
}

impl TwoParticleHamiltonian {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn num_sites(&self) -> usize {
        self.num_sites
    }
}

/// `H = -sum_bonds T (a+_a a_b + a+_b a_a) + sum_q beta_q a+_q a_q`, applied
/// term by term to every basis state.
pub fn build_h2(lattice: &Lattice) -> TwoParticleHamiltonian {
    let n = lattice.num_sites();
    let basis = FockBasis::new(n);
    let occs = basis_occupations(n);
    let d = basis.dim();
    let mut h = DMatrix::<f64>::zeros(d, d);

    for (col, occ) in occs.iter().enumerate() {
        for (q, &beta) in lattice.onsite().iter().enumerate() {
            if let Some((a1, mid)) = annihilate(q, occ) {
                let (a2, out) = create(q, &mid);
                h[(index_of_occupation(&basis, &out), col)] += beta * a1 * a2;
            }
        }
        for (bond, &t) in lattice.bonds().iter().enumerate() {
            let (a, b) = lattice.bond_sites(bond);
            for (to, from) in [(a, b), (b, a)] {
                if let Some((a1, mid)) = annihilate(from, occ) {
                    let (a2, out) = create(to, &mid);
                    h[(index_of_occupation(&basis, &out), col)] -= t * a1 * a2;
                }
            }
        }
    }
    TwoParticleHamiltonian { num_sites: n, matrix: h }
}

/// `exp(-i H t)` by Taylor series with scaling and squaring: the exponent is
/// halved until its norm is below `1/16`, summed to 30 terms, then squared
/// back. No eigensolver involved.
pub fn two_particle_evolution(h2: &TwoParticleHamiltonian, t: f64) -> DMatrix<Complex64> {
    let d = h2.matrix.nrows();
    let a = h2.matrix.map(|x| Complex64::new(0.0, -x * t));
    let norm = a.row_iter().map(|r| r.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max);
    let mut squarings = 0;
    while norm / 2f64.powi(squarings) > 1.0 / 16.0 {
        squarings += 1;
    }
    let a = a / Complex64::new(2f64.powi(squarings), 0.0);
    let mut term = DMatrix::<Complex64>::identity(d, d);
    let mut sum = term.clone();
    for k in 1..=30 {
        term = &term * &a / Complex64::new(k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// `rho(t) = exp(-i H t) rho exp(i H t)`.
pub fn evolve_oracle(rho: &TwoBosonDensityMatrix, h2: &TwoParticleHamiltonian, t: f64) -> TwoBosonDensityMatrix {
    let w = two_particle_evolution(h2, t);
    TwoBosonDensityMatrix::from_trusted(rho.num_sites(), &w * rho.matrix() * w.adjoint())
}

/// `Gamma_kl = Tr(rho a+_k a+_l a_l a_k)`, applying the four operators to
/// each basis state.
pub fn gamma_oracle(rho: &TwoBosonDensityMatrix) -> CorrelationMatrix {
    let n = rho.num_sites();
    let basis = FockBasis::new(n);
    let occs = basis_occupations(n);
    let mut g = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        for l in 0..n {
            let mut total = Complex64::new(0.0, 0.0);
            for (col, occ) in occs.iter().enumerate() {
                let Some((a1, s1)) = annihilate(k, occ) else { continue };
                let Some((a2, s2)) = annihilate(l, &s1) else { continue };
                let (c1, s3) = create(l, &s2);
                let (c2, s4) = create(k, &s3);
                let row = index_of_occupation(&basis, &s4);
                // Tr(rho O) = sum_{row, col} rho[col, row] O[row, col]
                total += rho.matrix()[(col, row)] * (a1 * a2 * c1 * c2);
            }
            g[(k, l)] = total.re;
        }
    }
    CorrelationMatrix::from_entries(0.0, g)
}

/// Reduced density matrix of the sites with index `< cut`, keyed by the
/// block occupations of bra and ket. Built from occupation vectors alone:
/// two basis states contribute when their occupations outside the block
/// agree.
pub fn reduced_density_oracle(rho: &TwoBosonDensityMatrix, cut: usize) -> BTreeMap<(Occupation, Occupation), Complex64> {
    let occs = basis_occupations(rho.num_sites());
    let mut out = BTreeMap::new();
    for (i, oi) in occs.iter().enumerate() {
        for (j, oj) in occs.iter().enumerate() {
            if oi[cut..] != oj[cut..] {
                continue;
            }
            *out.entry((oi[..cut].to_vec(), oj[..cut].to_vec()))
                .or_insert(Complex64::new(0.0, 0.0)) += rho.matrix()[(i, j)];
        }
    }
    out
}

/// `rho = G G^dagger / Tr(G G^dagger)` with `G` uniform in the unit square.
pub fn random_density<R: Rng>(num_sites: usize, rng: &mut R) -> TwoBosonDensityMatrix {
    let d = FockBasis::new(num_sites).dim();
    let g = DMatrix::from_fn(d, d, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let m = &g * g.adjoint();
    let tr = m.trace();
    TwoBosonDensityMatrix::from_trusted(num_sites, m / tr)
}

/// Random pure state, as a rank-one density matrix.
pub fn random_pure_density<R: Rng>(num_sites: usize, rng: &mut R) -> TwoBosonDensityMatrix {
    let d = FockBasis::new(num_sites).dim();
    let v = nalgebra::DVector::from_fn(d, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let v = &v / Complex64::new(v.norm(), 0.0);
    TwoBosonDensityMatrix::from_trusted(num_sites, &v * v.adjoint())
}

/// Random lattice: either boundary, per-bond couplings in `[0.2, 2)`, and
/// one of the three on-site rules.
pub fn random_lattice<R: Rng>(num_sites: usize, rng: &mut R) -> Lattice {
    let boundary = if rng.gen_bool(0.5) { Boundary::Periodic } else { Boundary::Open };
    let bonds = match boundary {
        Boundary::Periodic => num_sites,
        Boundary::Open => num_sites - 1,
    };
    let couplings = Couplings::PerBond((0..bonds).map(|_| rng.gen_range(0.2..2.0)).collect());
    let onsite_rule = match rng.gen_range(0..3) {
        0 => OnsiteRule::DecisionTree,
        1 => OnsiteRule::Constant(rng.gen_range(-1.0..1.0)),
        _ => OnsiteRule::Custom((0..num_sites).map(|_| rng.gen_range(-1.0..1.0)).collect()),
    };
    LatticeSpec {
        num_sites,
        site_offset: 0,
        boundary,
        couplings,
        onsite_rule,
    }
    .build()
    .expect("random lattice is valid")
}

/// Summary of [`verify_equivalence`].
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub num_sites: usize,
    pub samples: usize,
    pub seed: u64,
    /// Largest elementwise gap between the propagator route and the oracle.
    pub max_deviation: f64,
    /// Largest `|sum Gamma - 2|` over both routes.
    pub max_sum_rule_error: f64,
}

/// Draws `samples` random `(lattice, rho, t)` triples with `t` in `[0, 3)`
/// and compares the propagator route against the oracle. With `lattice`
/// given, only `rho` and `t` are random.
pub fn verify_equivalence(num_sites: usize, lattice: Option<&Lattice>, samples: usize, seed: u64) -> Result<VerificationReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_deviation = 0.0f64;
    let mut max_sum_rule_error = 0.0f64;
    for _ in 0..samples {
        let drawn;
        let lat = match lattice {
            Some(l) => l,
            None => {
                drawn = random_lattice(num_sites, &mut rng);
                &drawn
            }
        };
        let rho = random_density(lat.num_sites(), &mut rng);
        let t = rng.gen_range(0.0..3.0);
        let fast = gamma_general(&rho, &propagate_spectral(&lat.single_particle_matrix(), t)?)?;
        let slow = gamma_oracle(&evolve_oracle(&rho, &build_h2(lat), t));
        max_deviation = max_deviation.max(fast.max_abs_diff(&slow));
        max_sum_rule_error = max_sum_rule_error
            .max(fast.check().sum_rule_error)
            .max(slow.check().sum_rule_error);
    }
    Ok(VerificationReport {
        num_sites: lattice.map_or(num_sites, |l| l.num_sites()),
        samples,
        seed,
        max_deviation,
        max_sum_rule_error,
    })
}
