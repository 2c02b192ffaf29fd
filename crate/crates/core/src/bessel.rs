//! Integer-order Bessel functions of the first kind, `J_n(x)` for a whole
//! row of orders at once.
//!
//! Values come from Miller's downward recurrence
//! `J_{n-1} = (2n / x) J_n - J_{n+1}`, normalized with
//! `J_0 + 2 * sum_k J_{2k} = 1`. Upward recurrence is unstable for `n > x`.

use std::ops::RangeInclusive;

const RESCALE_ABOVE: f64 = 1e200;
const RESCALE_BY: f64 = 1e-200;

/// `J_0(x) ..= J_N(x)`, with negative orders through `J_{-n} = (-1)^n J_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct BesselRow {
    x: f64,
    values: Vec<f64>,
}

impl BesselRow {
    pub fn new(max_order: usize, x: f64) -> Self {
        assert!(x.is_finite() && x >= 0.0, "bessel argument must be finite and >= 0, got {x}");
        BesselRow {
            x,
            values: miller_row(max_order, x),
        }
    }

    pub fn argument(&self) -> f64 {
        self.x
    }

    pub fn max_order(&self) -> usize {
        self.values.len() - 1
    }

    /// `J_n(x)` for `|n| <= max_order`.
    pub fn j(&self, n: i64) -> f64 {
        let v = self.values[n.unsigned_abs() as usize];
        if n < 0 && n % 2 != 0 {
            -v
        } else {
            v
        }
    }

    /// Non-negative orders `0..=max_order`.
    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }
}

/// `J_n(x)` for every `n` in `orders`.
pub fn bessel_row(orders: RangeInclusive<i64>, x: f64) -> Vec<f64> {
    let reach = orders
        .start()
        .unsigned_abs()
        .max(orders.end().unsigned_abs()) as usize;
    let row = BesselRow::new(reach, x);
    orders.map(|n| row.j(n)).collect()
}

/// Starting order for the downward recurrence. The `sqrt(40 n)` term tracks
/// the width of the turning-point region, which a fixed offset misses at
/// large `x`.
fn start_order(max_order: usize, x: f64) -> usize {
    let reach = (max_order as f64).max(x.ceil());
    let start = reach + 20.0 + (40.0 * reach).sqrt().ceil();
    let start = start as usize;
    start + start % 2
}

fn miller_row(max_order: usize, x: f64) -> Vec<f64> {
    if x == 0.0 {
        let mut v = vec![0.0; max_order + 1];
        v[0] = 1.0;
        return v;
    }
    if x < 1e-8 {
        return tiny_argument_row(max_order, x);
    }

    let start = start_order(max_order, x);
    let mut row = vec![0.0; start + 1];
    let two_over_x = 2.0 / x;
    let mut above = 0.0;
    let mut current = 1e-30;
    row[start] = current;
    for n in (1..=start).rev() {
        let below = n as f64 * two_over_x * current - above;
        above = current;
        current = below;
        row[n - 1] = current;
        if current.abs() > RESCALE_ABOVE {
            for v in &mut row[n - 1..] {
                *v *= RESCALE_BY;
            }
            above *= RESCALE_BY;
            current *= RESCALE_BY;
        }
    }

    // J_0 + 2 (J_2 + J_4 + ...) = 1, summed from the small end upward in a
    // fixed order.
    let norm = row[0] + 2.0 * row.iter().skip(2).step_by(2).sum::<f64>();
    row.truncate(max_order + 1);
    for v in &mut row {
        *v /= norm;
    }
    row
}

/// Leading two series terms; exact to double precision for `x < 1e-8`.
fn tiny_argument_row(max_order: usize, x: f64) -> Vec<f64> {
    let half = 0.5 * x;
    let mut term = 1.0;
    let mut out = Vec::with_capacity(max_order + 1);
    for n in 0..=max_order {
        if n > 0 {
            term *= half / n as f64;
        }
        out.push(term * (1.0 - half * half / (n as f64 + 1.0)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Trapezoid rule on `J_n(x) = (1/2pi) int_0^{2pi} cos(n t - x sin t) dt`.
    /// The integrand is periodic and entire, so the rule converges
    /// geometrically; 512 nodes are exact to rounding for `x <= 60`.
    fn quadrature_j(n: i64, x: f64) -> f64 {
        let nodes = 512;
        let h = std::f64::consts::TAU / nodes as f64;
        (0..nodes)
            .map(|k| {
                let t = k as f64 * h;
                (n as f64 * t - x * t.sin()).cos()
            })
            .sum::<f64>()
            / nodes as f64
    }

    #[test]
    fn zero_argument_is_delta() {
        let row = BesselRow::new(6, 0.0);
        assert_eq!(row.as_slice(), &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(row.j(-3), 0.0);
    }

    #[test]
    fn reference_values_at_one() {
        // Squares used for the propagator checks at tau = 1.
        let row = BesselRow::new(2, 1.0);
        assert!((row.j(0) - 0.765_197_686_557_966_6).abs() < 1e-15);
        assert!((row.j(1) - 0.440_050_585_744_933_5).abs() < 1e-15);
        assert!((row.j(0).powi(2) - 0.58552).abs() < 1e-5);
        assert!((row.j(1).powi(2) - 0.193645).abs() < 1e-5);
    }

    #[test]
    fn matches_quadrature_oracle() {
        for &x in &[1e-3, 0.3, 1.0, 2.5, 4.0, 8.0, 13.7, 20.0, 35.0, 60.0] {
            let max = (x as usize) + 40;
            let row = BesselRow::new(max, x);
            for n in 0..=max as i64 {
                let expected = quadrature_j(n, x);
                let got = row.j(n);
                assert!((got - expected).abs() <= 1e-13, "J_{n}({x}): {got} vs {expected}");
            }
        }
    }

    #[test]
    fn small_row_at_large_argument() {
        // Requesting few orders must not shortchange the recurrence start.
        for &x in &[30.0, 80.0, 150.0] {
            let row = BesselRow::new(3, x);
            for n in 0..=3 {
                assert!((row.j(n) - quadrature_j(n, x)).abs() <= 1e-12, "J_{n}({x})");
            }
        }
    }

    #[test]
    fn tiny_argument_matches_recurrence_regime() {
        let x = 2e-9;
        let row = BesselRow::new(4, x);
        assert!((row.j(0) - 1.0).abs() < 1e-17);
        assert!((row.j(1) - 1e-9).abs() < 1e-25);
    }

    #[test]
    fn reflection_identity() {
        let row = BesselRow::new(30, 7.3);
        for n in 1..=30i64 {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert_eq!(row.j(-n), sign * row.j(n));
        }
        let listed = bessel_row(-3..=3, 7.3);
        assert_eq!(listed[0], -row.j(3));
        assert_eq!(listed[6], row.j(3));
    }

    #[test]
    fn squares_sum_to_one() {
        for &x in &[0.5, 1.0, 4.0, 8.0, 17.0, 40.0] {
            let n = (x as usize) + 20;
            let row = BesselRow::new(n, x);
            let total: f64 = (-(n as i64)..=n as i64).map(|k| row.j(k).powi(2)).sum();
            assert!((total - 1.0).abs() <= 1e-12, "x = {x}: {total}");
        }
    }

    #[test]
    fn large_order_small_argument_does_not_overflow() {
        let row = BesselRow::new(300, 0.01);
        assert!(row.as_slice().iter().all(|v| v.is_finite()));
        assert!((row.j(0) - quadrature_j(0, 0.01)).abs() < 1e-15);
        assert!((row.j(2) - quadrature_j(2, 0.01)).abs() < 1e-15);
    }
}
