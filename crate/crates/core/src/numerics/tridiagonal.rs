//! Symmetric tridiagonal eigenvalues by Sturm-sequence bisection.

use crate::error::{Error, Result};

/// Symmetric tridiagonal matrix; only one off-diagonal is stored.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalSystem {
    diagonal: Vec<f64>,
    off_diagonal: Vec<f64>,
}

impl TridiagonalSystem {
    pub fn new(diagonal: Vec<f64>, off_diagonal: Vec<f64>) -> Result<Self> {
        if diagonal.is_empty() {
            return Err(Error::domain("tridiagonal system needs N >= 1"));
        }
        if off_diagonal.len() + 1 != diagonal.len() {
            return Err(Error::domain(format!(
                "off-diagonal has length {} but N = {}",
                off_diagonal.len(),
                diagonal.len()
            )));
        }
        if diagonal.iter().chain(&off_diagonal).any(|v| !v.is_finite()) {
            return Err(Error::domain("tridiagonal entries must be finite"));
        }
        Ok(TridiagonalSystem {
            diagonal,
            off_diagonal,
        })
    }

    pub fn len(&self) -> usize {
        self.diagonal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diagonal.is_empty()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    pub fn off_diagonal(&self) -> &[f64] {
        &self.off_diagonal
    }

    /// Number of eigenvalues strictly below `sigma` (negative LDLᵀ pivots).
    pub fn sturm_count(&self, sigma: f64) -> usize {
        let guard = f64::MIN_POSITIVE.sqrt() * (1.0 + sigma.abs());
        let mut count = 0;
        let mut q = self.diagonal[0] - sigma;
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.diagonal.len() {
            let prev = if q.abs() < guard {
                if q < 0.0 {
                    -guard
                } else {
                    guard
                }
            } else {
                q
            };
            let e = self.off_diagonal[i - 1];
            q = (self.diagonal[i] - sigma) - e * e / prev;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Gershgorin enclosure of the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.diagonal.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.off_diagonal[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { self.off_diagonal[i].abs() } else { 0.0 };
            lo = lo.min(self.diagonal[i] - left - right);
            hi = hi.max(self.diagonal[i] + left + right);
        }
        let pad = 1e-12 * (lo.abs().max(hi.abs()).max(1.0));
        (lo - pad, hi + pad)
    }

    /// The `index`-th eigenvalue (0-based, ascending) bracketed in `[lo, hi]`.
    fn bisect(&self, index: usize, mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.sturm_count(mid) > index {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Inverse iteration for the eigenvector belonging to `lambda`.
    pub fn eigenvector(&self, lambda: f64) -> Vec<f64> {
        let n = self.len();
        let scale = lambda.abs().max(1.0);
        let shift = lambda + 1e-10 * scale;
        let mut x = vec![1.0; n];
        for _ in 0..4 {
            x = self.solve_shifted(shift, &x);
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 && norm.is_finite() {
                x.iter_mut().for_each(|v| *v /= norm);
            }
        }
        x
    }

    /// Thomas algorithm for `(T - shift I) x = rhs`.
    fn solve_shifted(&self, shift: f64, rhs: &[f64]) -> Vec<f64> {
        let n = self.len();
        let tiny = f64::EPSILON * 1e-3;
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        let mut pivot = self.diagonal[0] - shift;
        if pivot.abs() < tiny {
            pivot = tiny;
        }
        if n > 1 {
            c[0] = self.off_diagonal[0] / pivot;
        }
        d[0] = rhs[0] / pivot;
        for i in 1..n {
            let e = self.off_diagonal[i - 1];
            let mut p = (self.diagonal[i] - shift) - e * c[i - 1];
            if p.abs() < tiny {
                p = tiny;
            }
            if i + 1 < n {
                c[i] = self.off_diagonal[i] / p;
            }
            d[i] = (rhs[i] - e * d[i - 1]) / p;
        }
        let mut x = vec![0.0; n];
        x[n - 1] = d[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = d[i] - c[i] * x[i + 1];
        }
        x
    }
}

/// The `k` smallest eigenvalues in ascending order.
pub fn eigen_smallest_k(sys: &TridiagonalSystem, k: usize) -> Result<Vec<f64>> {
    if k == 0 || k > sys.len() {
        return Err(Error::InvalidK { k, n: sys.len() });
    }
    if sys.len() == 1 {
        return Ok(vec![sys.diagonal[0]]);
    }
    let (lo, hi) = sys.gershgorin();
    let mut out = Vec::with_capacity(k);
    let mut floor = lo;
    for index in 0..k {
        let value = sys.bisect(index, floor, hi);
        out.push(value);
        floor = value.min(hi);
        // repeated eigenvalues would otherwise start above the bracket
        floor = floor - 4.0 * f64::EPSILON * floor.abs().max(1.0);
        floor = floor.max(lo);
    }
    Ok(out)
}

/// All eigenvalues strictly below `cutoff`, capped at `cap` values.
pub fn eigen_below(sys: &TridiagonalSystem, cutoff: f64, cap: usize) -> Result<Vec<f64>> {
    let count = sys.sturm_count(cutoff).min(cap);
    if count == 0 {
        return Ok(Vec::new());
    }
    eigen_smallest_k(sys, count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Characteristic polynomial by the three-term recurrence.
    fn char_poly(d: &[f64], e: &[f64], x: f64) -> f64 {
        let mut p_prev = 1.0;
        let mut p = d[0] - x;
        for i in 1..d.len() {
            let next = (d[i] - x) * p - e[i - 1] * e[i - 1] * p_prev;
            p_prev = p;
            p = next;
        }
        p
    }

    /// Independent oracle: sign changes of the characteristic polynomial on a
    /// fine scan, then plain bisection of each bracketed root.
    fn oracle_eigs(d: &[f64], e: &[f64]) -> Vec<f64> {
        let bound = d.iter().map(|v| v.abs()).sum::<f64>()
            + 2.0 * e.iter().map(|v| v.abs()).sum::<f64>()
            + 1.0;
        let steps = 200_000;
        let mut roots = Vec::new();
        let mut x0 = -bound;
        let mut f0 = char_poly(d, e, x0);
        for s in 1..=steps {
            let x1 = -bound + 2.0 * bound * s as f64 / steps as f64;
            let f1 = char_poly(d, e, x1);
            if f0 == 0.0 {
                roots.push(x0);
            } else if f0 * f1 < 0.0 {
                let (mut a, mut b, mut fa) = (x0, x1, f0);
                for _ in 0..200 {
                    let m = 0.5 * (a + b);
                    let fm = char_poly(d, e, m);
                    if fm == 0.0 {
                        a = m;
                        b = m;
                        break;
                    }
                    if fa * fm < 0.0 {
                        b = m;
                    } else {
                        a = m;
                        fa = fm;
                    }
                }
                roots.push(0.5 * (a + b));
            }
            x0 = x1;
            f0 = f1;
        }
        roots
    }

    #[test]
    fn three_by_three_laplacian() {
        let sys = TridiagonalSystem::new(vec![2.0; 3], vec![-1.0; 2]).unwrap();
        let got = eigen_smallest_k(&sys, 3).unwrap();
        let oracle = oracle_eigs(&[2.0; 3], &[-1.0; 2]);
        let exact = [2.0 - 2f64.sqrt(), 2.0, 2.0 + 2f64.sqrt()];
        for i in 0..3 {
            assert!((got[i] - exact[i]).abs() < 1e-10);
            assert!((got[i] - oracle[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn one_by_one() {
        let sys = TridiagonalSystem::new(vec![5.0], vec![]).unwrap();
        assert_eq!(eigen_smallest_k(&sys, 1).unwrap(), vec![5.0]);
    }

    #[test]
    fn two_by_two_zero_diagonal() {
        let sys = TridiagonalSystem::new(vec![0.0, 0.0], vec![1.0]).unwrap();
        let got = eigen_smallest_k(&sys, 2).unwrap();
        assert!((got[0] + 1.0).abs() < 1e-12 && (got[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_k() {
        let sys = TridiagonalSystem::new(vec![1.0, 2.0], vec![0.5]).unwrap();
        assert_eq!(
            eigen_smallest_k(&sys, 3).unwrap_err(),
            Error::InvalidK { k: 3, n: 2 }
        );
        assert!(eigen_smallest_k(&sys, 0).is_err());
    }

    #[test]
    fn shape_is_validated() {
        assert!(TridiagonalSystem::new(vec![], vec![]).is_err());
        assert!(TridiagonalSystem::new(vec![1.0, 2.0], vec![]).is_err());
    }

    #[test]
    fn repeated_eigenvalues_from_decoupled_blocks() {
        let sys = TridiagonalSystem::new(vec![3.0, 3.0, 3.0], vec![0.0, 0.0]).unwrap();
        let got = eigen_smallest_k(&sys, 3).unwrap();
        assert!(got.iter().all(|v| (v - 3.0).abs() < 1e-12));
    }

    #[test]
    fn eigenvector_of_path_laplacian_is_positive() {
        let n = 50;
        let sys = TridiagonalSystem::new(vec![2.0; n], vec![-1.0; n - 1]).unwrap();
        let lam = eigen_smallest_k(&sys, 1).unwrap()[0];
        let v = sys.eigenvector(lam);
        let sign = v[0].signum();
        assert!(v.iter().all(|x| x * sign > 0.0));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn agrees_with_characteristic_polynomial_oracle(
            d in prop::collection::vec(-3.0f64..3.0, 1..=8),
            seed in prop::collection::vec(0.05f64..2.0, 8),
        ) {
            let n = d.len();
            let e: Vec<f64> = seed.iter().take(n - 1).copied().collect();
            let sys = TridiagonalSystem::new(d.clone(), e.clone()).unwrap();
            let got = eigen_smallest_k(&sys, n).unwrap();
            let oracle = oracle_eigs(&d, &e);
            prop_assert_eq!(oracle.len(), n);
            for i in 0..n {
                prop_assert!((got[i] - oracle[i]).abs() < 1e-10, "{} vs {}", got[i], oracle[i]);
            }
            prop_assert!(got.windows(2).all(|w| w[0] <= w[1]));
        }

        #[test]
        fn sturm_count_matches_returned_spectrum(
            d in prop::collection::vec(-3.0f64..3.0, 2..=12),
            seed in prop::collection::vec(0.05f64..2.0, 12),
            sigma in -6.0f64..6.0,
        ) {
            let n = d.len();
            let e: Vec<f64> = seed.iter().take(n - 1).copied().collect();
            let sys = TridiagonalSystem::new(d, e).unwrap();
            let all = eigen_smallest_k(&sys, n).unwrap();
            let below = all.iter().filter(|&&v| v < sigma).count();
            let near = all.iter().any(|v| (v - sigma).abs() < 1e-9);
            prop_assume!(!near);
            prop_assert_eq!(sys.sturm_count(sigma), below);
        }
    }
}
