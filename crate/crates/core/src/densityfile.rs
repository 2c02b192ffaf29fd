//! Plain-text density matrix files.
//!
//! ```text
//! L=3
//! 0 1 0 1 0.5 0
//! 0 1 1 2 0.25 -0.125
//! ...
//! ```
//!
//! The header gives the number of sites. Each following line is one entry
//! `rho[(q,r),(q',r')]` as `q r q' r' re im` with `q <= r` and `q' <= r'`.
//! Missing entries are zero. Blank lines and lines starting with `#` are
//! skipped. Every nonzero entry must be listed, including both members of
//! each Hermitian pair.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::FockBasis;
use crate::states::TwoBosonDensityMatrix;

fn err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::DensityFile(format!("line {line}: {msg}"))
}

/// Parses and validates a density matrix file.
pub fn parse_density(text: &str) -> Result<TwoBosonDensityMatrix> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (hline, header) = lines.next().ok_or_else(|| Error::DensityFile("empty file".into()))?;
    let num_sites: usize = header
        .strip_prefix("L=")
        .and_then(|n| n.trim().parse().ok())
        .ok_or_else(|| err(hline, format!("expected header `L=<n>`, found `{header}`")))?;
    if num_sites < 2 {
        return Err(Error::TooFewSites(num_sites));
    }

    let basis = FockBasis::new(num_sites);
    let d = basis.dim();
    let mut m = DMatrix::<Complex64>::zeros(d, d);
    let mut seen = BTreeSet::new();
    for (no, line) in lines {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 6 {
            return Err(err(no, format!("expected 6 fields, found {}", fields.len())));
        }
        let mut sites = [0usize; 4];
        for (slot, f) in sites.iter_mut().zip(&fields[..4]) {
            *slot = f.parse().map_err(|_| err(no, format!("bad site index `{f}`")))?;
            if *slot >= num_sites {
                return Err(err(no, format!("site {slot} out of range for L={num_sites}")));
            }
        }
        let [q, r, q2, r2] = sites;
        if q > r || q2 > r2 {
            return Err(err(no, "pairs must be canonical (q <= r)"));
        }
        let mut parts = [0.0f64; 2];
        for (slot, f) in parts.iter_mut().zip(&fields[4..]) {
            *slot = f.parse().map_err(|_| err(no, format!("bad number `{f}`")))?;
            if !slot.is_finite() {
                return Err(err(no, format!("non-finite value `{f}`")));
            }
        }
        let (i, j) = (basis.index_of_unchecked(q, r), basis.index_of_unchecked(q2, r2));
        if !seen.insert((i, j)) {
            return Err(err(no, format!("duplicate entry ({q},{r}),({q2},{r2})")));
        }
        m[(i, j)] = Complex64::new(parts[0], parts[1]);
    }
    TwoBosonDensityMatrix::new(num_sites, m)
}

/// Writes `rho` in the file format, entries in row-major order, zeros
/// omitted. Round-trips exactly through [`parse_density`].
pub fn format_density(rho: &TwoBosonDensityMatrix) -> String {
    let basis = FockBasis::new(rho.num_sites());
    let mut out = format!("L={}\n", rho.num_sites());
    for (i, j, z) in rho.nonzero_entries() {
        let (q, r) = basis.pairs()[i];
        let (q2, r2) = basis.pairs()[j];
        writeln!(out, "{q} {r} {q2} {r2} {:.16e} {:.16e}", z.re, z.im).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{density_from_family, CoherenceFamily};

    #[test]
    fn round_trip_family() {
        let p = CoherenceFamily::new(0.3, 0.9, 1.1).unwrap();
        let rho = density_from_family(&p, 5, 2).unwrap();
        let text = format_density(&rho);
        assert!(text.starts_with("L=5\n"));
        assert_eq!(text.lines().count(), 5);
        let back = parse_density(&text).unwrap();
        assert_eq!(back.matrix(), rho.matrix());
    }

    #[test]
    fn comments_and_blank_lines() {
        let rho = parse_density("# two sites\nL=2\n\n0 1 0 1 1 0\n").unwrap();
        assert_eq!(rho.entry(0, 1, 0, 1).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn rejects_bad_input() {
        for text in [
            "",
            "N=2\n0 0 0 0 1 0",
            "L=2\n1 0 1 0 1 0",
            "L=2\n0 0 0 0 1 0\n0 0 0 0 1 0",
            "L=2\n0 0 0 2 1 0",
            "L=2\n0 0 0 0 1",
            "L=2\n0 0 0 0 x 0",
            "L=2\n0 0 0 0 inf 0",
        ] {
            assert!(matches!(parse_density(text), Err(Error::DensityFile(_))), "{text:?}");
        }
    }

    #[test]
    fn rejects_unphysical_matrix() {
        // Trace two.
        let e = parse_density("L=2\n0 0 0 0 1 0\n1 1 1 1 1 0\n").unwrap_err();
        assert!(matches!(e, Error::InvalidDensity(_)));
        // Missing Hermitian partner.
        let e = parse_density("L=2\n0 0 0 0 0.5 0\n1 1 1 1 0.5 0\n0 0 1 1 0.5 0\n").unwrap_err();
        assert!(matches!(e, Error::InvalidDensity(_)));
    }
}
