//! One-dimensional tight-binding lattices and their single-particle
//! coefficient matrix.
//!
//! Bond `q` joins site `q` and site `q + 1` (wrapping to site 0 on a ring),
//! so a periodic lattice has `L` bonds and an open chain `L - 1`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Periodic,
    Open,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Couplings {
    /// Every bond carries the same tunneling strength `C > 0`.
    Uniform(f64),
    /// One tunneling strength per bond.
    PerBond(Vec<f64>),
}

/// How the on-site energies are assigned.
#[derive(Debug, Clone, PartialEq)]
pub enum OnsiteRule {
    /// Each site gets the sum of the couplings on its incident bonds.
    /// On an open chain the end sites have a single bond, which produces
    /// the two boundary defects.
    DecisionTree,
    Constant(f64),
    Custom(Vec<f64>),
}

/// Raw, unvalidated description of a lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSpec {
    pub num_sites: usize,
    /// Label of internal site 0. Labels run `site_offset .. site_offset + L`.
    pub site_offset: i64,
    pub boundary: Boundary,
    pub couplings: Couplings,
    pub onsite_rule: OnsiteRule,
}

impl LatticeSpec {
    /// Uniform ring with the decision-tree on-site rule, labels starting at 0.
    pub fn uniform_ring(num_sites: usize, coupling: f64) -> Self {
        LatticeSpec {
            num_sites,
            site_offset: 0,
            boundary: Boundary::Periodic,
            couplings: Couplings::Uniform(coupling),
            onsite_rule: OnsiteRule::DecisionTree,
        }
    }

    /// Uniform ring labeled `-l ..= l`; `num_sites` must be odd for the
    /// labels to be symmetric.
    pub fn centered_ring(num_sites: usize, coupling: f64) -> Self {
        LatticeSpec {
            site_offset: -((num_sites as i64 - 1) / 2),
            ..Self::uniform_ring(num_sites, coupling)
        }
    }

    pub fn build(&self) -> Result<Lattice> {
        build_lattice(self)
    }
}

/// A validated lattice with the on-site energies resolved to explicit values.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    num_sites: usize,
    site_offset: i64,
    boundary: Boundary,
    bonds: Vec<f64>,
    onsite: Vec<f64>,
    uniform_coupling: Option<f64>,
}

pub fn build_lattice(spec: &LatticeSpec) -> Result<Lattice> {
    let n = spec.num_sites;
    if n < 2 {
        return Err(Error::TooFewSites(n));
    }
    let num_bonds = match spec.boundary {
        Boundary::Periodic => n,
        Boundary::Open => n - 1,
    };

    let (bonds, uniform_coupling) = match &spec.couplings {
        Couplings::Uniform(c) => {
            if !c.is_finite() {
                return Err(Error::NonFinite("uniform coupling"));
            }
            if *c <= 0.0 {
                return Err(Error::Dimension(format!(
                    "uniform coupling must be positive, got {c}"
                )));
            }
            (vec![*c; num_bonds], Some(*c))
        }
        Couplings::PerBond(list) => {
            if list.len() != num_bonds {
                return Err(Error::LengthMismatch {
                    what: "per-bond couplings",
                    expected: num_bonds,
                    got: list.len(),
                });
            }
            if list.iter().any(|c| !c.is_finite()) {
                return Err(Error::NonFinite("per-bond couplings"));
            }
            (list.clone(), None)
        }
    };

    let onsite = match &spec.onsite_rule {
        OnsiteRule::DecisionTree => {
            let mut beta = vec![0.0; n];
            for (bond, &t) in bonds.iter().enumerate() {
                let (a, b) = (bond, (bond + 1) % n);
                beta[a] += t;
                beta[b] += t;
            }
            beta
        }
        OnsiteRule::Constant(value) => {
            if !value.is_finite() {
                return Err(Error::NonFinite("on-site constant"));
            }
            vec![*value; n]
        }
        OnsiteRule::Custom(list) => {
            if list.len() != n {
                return Err(Error::LengthMismatch {
                    what: "custom on-site energies",
                    expected: n,
                    got: list.len(),
                });
            }
            if list.iter().any(|b| !b.is_finite()) {
                return Err(Error::NonFinite("custom on-site energies"));
            }
            list.clone()
        }
    };

    Ok(Lattice {
        num_sites: n,
        site_offset: spec.site_offset,
        boundary: spec.boundary,
        bonds,
        onsite,
        uniform_coupling,
    })
}

impl Lattice {
    pub fn num_sites(&self) -> usize {
        self.num_sites
    }

    pub fn site_offset(&self) -> i64 {
        self.site_offset
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    /// Tunneling strength of each bond, bond `q` joining `q` and `q + 1`.
    pub fn bonds(&self) -> &[f64] {
        &self.bonds
    }

    /// Resolved on-site energies.
    pub fn onsite(&self) -> &[f64] {
        &self.onsite
    }

    /// Endpoints of bond `q`.
    pub fn bond_sites(&self, bond: usize) -> (usize, usize) {
        (bond, (bond + 1) % self.num_sites)
    }

    pub fn label_of(&self, index: usize) -> i64 {
        index as i64 + self.site_offset
    }

    pub fn index_of_label(&self, label: i64) -> Option<usize> {
        let index = label - self.site_offset;
        (0..self.num_sites as i64)
            .contains(&index)
            .then_some(index as usize)
    }

    pub fn labels(&self) -> Vec<i64> {
        (0..self.num_sites).map(|i| self.label_of(i)).collect()
    }

    /// `Some(C)` for a periodic ring with uniform coupling `C` and a constant
    /// on-site energy, the case covered by the Bessel closed form.
    pub fn uniform_ring_coupling(&self) -> Option<f64> {
        let c = self.uniform_coupling?;
        let constant_onsite = self.onsite.iter().all(|&b| b == self.onsite[0]);
        (self.boundary == Boundary::Periodic && constant_onsite).then_some(c)
    }

    pub fn single_particle_matrix(&self) -> SingleParticleMatrix {
        single_particle_matrix(self)
    }
}

/// Real symmetric `L x L` matrix with the on-site energies on the diagonal
/// and `-T` on each bond. Evolution is `exp(-i M t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleParticleMatrix {
    matrix: DMatrix<f64>,
}

impl SingleParticleMatrix {
    pub fn from_matrix(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Dimension(format!(
                "single-particle matrix must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("single-particle matrix"));
        }
        if matrix != matrix.transpose() {
            return Err(Error::Dimension(
                "single-particle matrix must be symmetric".into(),
            ));
        }
        Ok(SingleParticleMatrix { matrix })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn num_sites(&self) -> usize {
        self.matrix.nrows()
    }
}

pub fn single_particle_matrix(lattice: &Lattice) -> SingleParticleMatrix {
    let n = lattice.num_sites;
    let mut m = DMatrix::<f64>::zeros(n, n);
    for (q, &beta) in lattice.onsite.iter().enumerate() {
        m[(q, q)] = beta;
    }
    for (bond, &t) in lattice.bonds.iter().enumerate() {
        let (a, b) = lattice.bond_sites(bond);
        m[(a, b)] -= t;
        m[(b, a)] -= t;
    }
    SingleParticleMatrix { matrix: m }
}
