//! Small dense real matrices in row-major storage, with the operations the
//! transfer-matrix computations need, and a cyclic Jacobi eigensolver for
//! symmetric matrices.
//!
//! Dimensions stay tiny: blocks of the transfer matrix are at most
//! (S+1) x (S+1), the full transfer matrix (S+1)^2, and the dense Hamiltonian
//! probe a few hundred. Jacobi is used instead of a tridiagonalizing solver
//! because it keeps high relative accuracy on graded matrices, whose
//! eigenvalues here span ~10 orders of magnitude at the extreme ends of the
//! supported q range.

use alloc::vec;
use alloc::vec::Vec;

/// Dense row-major matrix of f64.
#[derive(Debug, Clone, PartialEq)]
pub struct DMat {
    nrows: usize,
    ncols: usize,
    data: Vec<f64>,
}

impl DMat {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        DMat {
            nrows,
            ncols,
            data: vec![0.0; nrows * ncols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = DMat::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_fn(nrows: usize, ncols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = DMat::zeros(nrows, ncols);
        for r in 0..nrows {
            for c in 0..ncols {
                m.data[r * ncols + c] = f(r, c);
            }
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.ncols + c]
    }

    #[inline]
    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut f64 {
        &mut self.data[r * self.ncols + c]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> DMat {
        DMat::from_fn(self.ncols, self.nrows, |r, c| self.at(c, r))
    }

    pub fn mul(&self, rhs: &DMat) -> DMat {
        assert_eq!(self.ncols, rhs.nrows, "dimension mismatch in mul");
        let mut out = DMat::zeros(self.nrows, rhs.ncols);
        for r in 0..self.nrows {
            for k in 0..self.ncols {
                let a = self.at(r, k);
                if a == 0.0 {
                    continue;
                }
                for c in 0..rhs.ncols {
                    out.data[r * rhs.ncols + c] += a * rhs.at(k, c);
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.ncols, v.len(), "dimension mismatch in matvec");
        let mut out = vec![0.0; self.nrows];
        for r in 0..self.nrows {
            let mut acc = 0.0;
            for c in 0..self.ncols {
                acc += self.at(r, c) * v[c];
            }
            out[r] = acc;
        }
        out
    }

    /// Matrix power by binary exponentiation; requires a square matrix.
    pub fn pow(&self, mut n: u64) -> DMat {
        assert_eq!(self.nrows, self.ncols, "pow needs a square matrix");
        let mut result = DMat::identity(self.nrows);
        let mut base = self.clone();
        while n > 0 {
            if n & 1 == 1 {
                result = result.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    pub fn trace(&self) -> f64 {
        assert_eq!(self.nrows, self.ncols, "trace needs a square matrix");
        let mut acc = 0.0;
        for i in 0..self.nrows {
            acc += self.at(i, i);
        }
        acc
    }

    pub fn scaled(&self, s: f64) -> DMat {
        let mut out = self.clone();
        for x in &mut out.data {
            *x *= s;
        }
        out
    }

    pub fn add(&self, rhs: &DMat) -> DMat {
        assert_eq!((self.nrows, self.ncols), (rhs.nrows, rhs.ncols));
        let data = self
            .data
            .iter()
            .zip(rhs.data.iter())
            .map(|(a, b)| a + b)
            .collect();
        DMat {
            nrows: self.nrows,
            ncols: self.ncols,
            data,
        }
    }

    pub fn sub(&self, rhs: &DMat) -> DMat {
        assert_eq!((self.nrows, self.ncols), (rhs.nrows, rhs.ncols));
        let mut out = self.clone();
        for (x, y) in out.data.iter_mut().zip(&rhs.data) {
            *x -= y;
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        let mut acc = 0.0;
        for x in &self.data {
            acc += x * x;
        }
        libm::sqrt(acc)
    }

    pub fn max_abs(&self) -> f64 {
        let mut m = 0.0f64;
        for x in &self.data {
            m = m.max(x.abs());
        }
        m
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}

pub fn vec_norm(v: &[f64]) -> f64 {
    libm::sqrt(dot(v, v))
}

/// Eigenvalues of a symmetric matrix by the cyclic Jacobi method, returned
/// in ascending order. Only the lower/upper symmetric content matters; the
/// input is copied and annihilated sweep by sweep until the off-diagonal
/// Frobenius norm falls below 1e-14 of the matrix norm.
pub fn sym_eigenvalues(m: &DMat) -> Vec<f64> {
    assert_eq!(m.nrows, m.ncols, "eigensolver needs a square matrix");
    let n = m.nrows;
    let mut a = m.clone();
    let scale = a.frobenius_norm();
    if n > 1 && scale > 0.0 {
        for _sweep in 0..50 {
            let mut off = 0.0;
            for r in 0..n {
                for c in 0..n {
                    if r != c {
                        off += a.at(r, c) * a.at(r, c);
                    }
                }
            }
            if libm::sqrt(off) <= 1e-14 * scale {
                break;
            }
            for p in 0..n - 1 {
                for q in p + 1..n {
                    jacobi_rotate(&mut a, p, q);
                }
            }
        }
    }
    let mut eigs: Vec<f64> = (0..n).map(|i| a.at(i, i)).collect();
    eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    eigs
}

fn jacobi_rotate(a: &mut DMat, p: usize, q: usize) {
    let apq = a.at(p, q);
    if apq == 0.0 {
        return;
    }
    let theta = (a.at(q, q) - a.at(p, p)) / (2.0 * apq);
    let t = if theta >= 0.0 {
        1.0 / (theta + libm::sqrt(theta * theta + 1.0))
    } else {
        -1.0 / (-theta + libm::sqrt(theta * theta + 1.0))
    };
    let c = 1.0 / libm::sqrt(t * t + 1.0);
    let s = t * c;
    let tau = s / (1.0 + c);

    let app = a.at(p, p);
    let aqq = a.at(q, q);
    *a.at_mut(p, p) = app - t * apq;
    *a.at_mut(q, q) = aqq + t * apq;
    *a.at_mut(p, q) = 0.0;
    *a.at_mut(q, p) = 0.0;
    let n = a.nrows();
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = a.at(k, p);
        let akq = a.at(k, q);
        let new_kp = akp - s * (akq + tau * akp);
        let new_kq = akq + s * (akp - tau * akq);
        *a.at_mut(k, p) = new_kp;
        *a.at_mut(p, k) = new_kp;
        *a.at_mut(k, q) = new_kq;
        *a.at_mut(q, k) = new_kq;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn mul_and_trace() {
        let a = DMat::from_fn(2, 2, |r, c| (r * 2 + c) as f64 + 1.0);
        let b = a.mul(&DMat::identity(2));
        assert_eq!(a, b);
        assert_eq!(a.trace(), 5.0);
    }

    #[test]
    fn pow_matches_repeated_mul() {
        let a = DMat::from_fn(3, 3, |r, c| 1.0 / (1.0 + r as f64 + c as f64));
        let mut expect = DMat::identity(3);
        for _ in 0..7 {
            expect = expect.mul(&a);
        }
        let got = a.pow(7);
        assert!(got.sub(&expect).max_abs() < 1e-14 * expect.max_abs());
    }

    #[test]
    fn jacobi_two_by_two() {
        let a = DMat::from_fn(2, 2, |r, c| if r == c { 2.0 } else { 1.0 });
        let e = sym_eigenvalues(&a);
        assert!((e[0] - 1.0).abs() < 1e-13);
        assert!((e[1] - 3.0).abs() < 1e-13);
    }

    #[test]
    fn jacobi_diagonal_passthrough() {
        let mut a = DMat::zeros(3, 3);
        *a.at_mut(0, 0) = -5.0;
        *a.at_mut(1, 1) = 0.25;
        *a.at_mut(2, 2) = 7.0;
        let e = sym_eigenvalues(&a);
        assert_eq!(e, vec![-5.0, 0.25, 7.0]);
    }

    proptest! {
        #[test]
        fn jacobi_preserves_trace_and_frobenius(vals in proptest::collection::vec(-3.0f64..3.0, 15)) {
            // Symmetric 5x5 from 15 free entries.
            let mut a = DMat::zeros(5, 5);
            let mut it = vals.into_iter();
            for r in 0..5 {
                for c in r..5 {
                    let v = it.next().unwrap();
                    *a.at_mut(r, c) = v;
                    *a.at_mut(c, r) = v;
                }
            }
            let e = sym_eigenvalues(&a);
            let tr: f64 = e.iter().sum();
            let fr: f64 = e.iter().map(|x| x * x).sum();
            prop_assert!((tr - a.trace()).abs() <= 1e-12 * a.max_abs().max(1.0));
            let fr_a = a.frobenius_norm();
            prop_assert!((libm::sqrt(fr) - fr_a).abs() <= 1e-12 * fr_a.max(1.0));
            for w in e.windows(2) {
                prop_assert!(w[0] <= w[1]);
            }
        }
    }
}
