//! Truncated power-series arithmetic on f64 coefficients.
//!
//! Generating functions in this crate (return-time pgfs, Green kernels,
//! canonical functions) are manipulated as coefficient vectors indexed from
//! z^0. Division is coefficient-recursive; composition is supported for
//! affine arguments only, which is all the thinning decomposition needs.

/// A truncated power series `sum_k coeffs[k] z^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSeries {
    pub coeffs: Vec<f64>,
    /// Free-text note on the convergence radius / meaning of coefficients.
    pub radius_note: String,
    pub truncation_order: usize,
}

impl PowerSeries {
    pub fn new(coeffs: Vec<f64>, radius_note: impl Into<String>) -> Self {
        let truncation_order = coeffs.len().saturating_sub(1);
        PowerSeries { coeffs, radius_note: radius_note.into(), truncation_order }
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    /// Horner evaluation of the truncated series.
    pub fn eval(&self, z: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * z + c)
    }

    /// Product truncated at `order`.
    pub fn mul(&self, rhs: &PowerSeries, order: usize) -> PowerSeries {
        let mut out = vec![0.0; order + 1];
        for (i, &a) in self.coeffs.iter().enumerate().take(order + 1) {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in rhs.coeffs.iter().enumerate().take(order + 1 - i) {
                out[i + j] += a * b;
            }
        }
        PowerSeries::new(out, self.radius_note.clone())
    }

    /// Quotient `self / rhs` truncated at `order`; requires a nonzero
    /// constant term in the divisor.
    pub fn div(&self, rhs: &PowerSeries, order: usize) -> PowerSeries {
        let b0 = rhs.coeff(0);
        assert!(b0 != 0.0, "series division needs a nonzero constant term");
        let mut out = vec![0.0; order + 1];
        for n in 0..=order {
            let mut acc = self.coeff(n);
            let kmax = n.min(rhs.coeffs.len().saturating_sub(1));
            for k in 1..=kmax {
                acc -= rhs.coeffs[k] * out[n - k];
            }
            out[n] = acc / b0;
        }
        PowerSeries::new(out, self.radius_note.clone())
    }

    /// Composition with an affine argument: coefficients of `f(a + b z)`,
    /// truncated at `order`. All source coefficients participate, so the
    /// source must be truncated where its own tail is negligible.
    pub fn affine_compose(&self, a: f64, b: f64, order: usize) -> PowerSeries {
        let mut out = vec![0.0; order + 1];
        let mut pw = vec![0.0; order + 1]; // (a + b z)^n, degree capped
        pw[0] = 1.0;
        let mut deg = 0usize;
        out[0] = self.coeff(0);
        for n in 1..self.coeffs.len() {
            let newdeg = (deg + 1).min(order);
            for k in (0..=newdeg).rev() {
                let lower = if k >= 1 { pw[k - 1] } else { 0.0 };
                pw[k] = a * pw[k] + b * lower;
            }
            deg = newdeg;
            let cn = self.coeffs[n];
            if cn != 0.0 {
                for k in 0..=deg {
                    out[k] += cn * pw[k];
                }
            }
        }
        PowerSeries::new(out, self.radius_note.clone())
    }

    /// Multiply by `z^k` (shift coefficients up).
    pub fn shift_up(&self, k: usize) -> PowerSeries {
        let mut out = vec![0.0; self.coeffs.len() + k];
        out[k..].copy_from_slice(&self.coeffs);
        PowerSeries::new(out, self.radius_note.clone())
    }

    /// Divide by `z^k`, dropping the first `k` coefficients (they must be
    /// negligible for this to be meaningful).
    pub fn shift_down(&self, k: usize) -> PowerSeries {
        PowerSeries::new(self.coeffs[k.min(self.coeffs.len())..].to_vec(), self.radius_note.clone())
    }

    /// Scale every coefficient.
    pub fn scale(&self, c: f64) -> PowerSeries {
        PowerSeries::new(self.coeffs.iter().map(|&v| c * v).collect(), self.radius_note.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geometric(order: usize) -> PowerSeries {
        PowerSeries::new(vec![1.0; order + 1], "1/(1-z), radius 1")
    }

    #[test]
    fn division_inverts_multiplication() {
        let a = PowerSeries::new(vec![1.0, -0.3, 0.2, 0.05], "test");
        let b = PowerSeries::new(vec![0.5, 0.1, -0.7], "test");
        let prod = a.mul(&b, 8);
        let back = prod.div(&b, 3);
        for k in 0..=3 {
            assert!((back.coeff(k) - a.coeff(k)).abs() < 1e-14);
        }
    }

    #[test]
    fn geometric_series_division() {
        // 1 / (1 - z) = 1 + z + z^2 + ...
        let one = PowerSeries::new(vec![1.0], "test");
        let denom = PowerSeries::new(vec![1.0, -1.0], "test");
        let g = one.div(&denom, 10);
        for k in 0..=10 {
            assert_eq!(g.coeff(k), 1.0);
        }
    }

    #[test]
    fn affine_compose_geometric() {
        // f(z) = sum z^k (k <= N); f(a + b z) ~ 1/(1 - a - b z) when the
        // truncation tail is negligible.
        let f = geometric(400);
        let (a, b) = (0.3, 0.4);
        let comp = f.affine_compose(a, b, 10);
        let target = |k: u32| b.powi(k as i32) / (1.0f64 - a).powi(k as i32 + 1);
        for k in 0..=10u32 {
            assert!(
                (comp.coeff(k as usize) - target(k)).abs() < 1e-12,
                "k={k}: {} vs {}",
                comp.coeff(k as usize),
                target(k)
            );
        }
    }

    #[test]
    fn shifts_are_inverse() {
        let a = PowerSeries::new(vec![0.0, 0.0, 1.5, 2.5], "test");
        let down = a.shift_down(2);
        assert_eq!(down.coeffs, vec![1.5, 2.5]);
        assert_eq!(down.shift_up(2).coeffs, vec![0.0, 0.0, 1.5, 2.5]);
    }
}
