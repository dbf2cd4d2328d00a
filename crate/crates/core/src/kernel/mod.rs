//! Self-contained complex linear algebra for small dense matrices.
//!
//! Everything here operates on heap-allocated row-major matrices of
//! `Complex64` entries. Sizes of interest are tiny (n <= 8), so the
//! implementations favor robustness and determinism over asymptotics.
//!
//! Left eigenvectors are stored as plain coefficient vectors and pair with
//! right vectors through the *bilinear* form `sum_i l[i] r[i]` (no complex
//! conjugation): a left covector already carries the row entries of
//! `<l|`. In the Hermitian limit the left entries are the conjugates of
//! the right entries and the pairing reduces to the usual inner product.

mod eig;
mod expm;

pub use expm::expm_apply;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Default tolerance for biorthogonality/completeness invariant checks.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Principal square root: `w*w = z` with `Re(w) >= 0`, and `Im(w) >= 0`
/// on the branch cut `Re(w) = 0`.
///
/// Real inputs are handled exactly so that purely real or purely
/// imaginary results carry no rounding dust in the other component.
pub fn principal_sqrt(z: C64) -> C64 {
    if z.im == 0.0 {
        return if z.re >= 0.0 {
            C64::new(z.re.sqrt(), 0.0)
        } else {
            C64::new(0.0, (-z.re).sqrt())
        };
    }
    let w = z.sqrt();
    if w.re < 0.0 || (w.re == 0.0 && w.im < 0.0) {
        -w
    } else {
        w
    }
}

/// Bilinear pairing of a left covector with a right vector: `sum_i l[i] r[i]`.
pub fn pair(left: &[C64], right: &[C64]) -> C64 {
    debug_assert_eq!(left.len(), right.len());
    left.iter().zip(right).map(|(l, r)| l * r).sum()
}

/// Euclidean norm of a complex vector.
pub fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn vec_finite(v: &[C64]) -> bool {
    v.iter().all(|x| x.re.is_finite() && x.im.is_finite())
}

/// Rescale a left/right pair by `1/sqrt(<l|r>)` so the bilinear pairing
/// becomes one. Both members are scaled by the same factor; the branch of
/// the square root is [`principal_sqrt`], fixed repo-wide so eigenvector
/// phases stay deterministic.
pub fn biorth_normalize(right: &[C64], left: &[C64], tol: f64) -> Result<(Vec<C64>, Vec<C64>)> {
    if left.len() != right.len() {
        return Err(Error::DimensionMismatch {
            expected: right.len(),
            got: left.len(),
        });
    }
    let s = pair(left, right);
    let scale = vec_norm(left) * vec_norm(right);
    if s.norm() <= tol * scale.max(1e-300) {
        return Err(Error::SelfOrthogonal { overlap: s.norm() });
    }
    let inv = C64::new(1.0, 0.0) / principal_sqrt(s);
    Ok((
        right.iter().map(|x| x * inv).collect(),
        left.iter().map(|x| x * inv).collect(),
    ))
}

/// Dense square matrix of complex doubles, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "matrix dimension must be positive");
        CMatrix {
            n,
            data: vec![C64::new(0.0, 0.0); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    /// Build from row-major entries; rejects non-finite values.
    pub fn from_rows(n: usize, entries: &[C64]) -> Result<Self> {
        assert_eq!(entries.len(), n * n, "entry count must be n*n");
        if !vec_finite(entries) {
            return Err(Error::NonFinite);
        }
        Ok(CMatrix {
            n,
            data: entries.to_vec(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        debug_assert_eq!(v.len(), self.n);
        (0..self.n)
            .map(|i| {
                (0..self.n)
                    .map(|j| self[(i, j)] * v[j])
                    .sum()
            })
            .collect()
    }

    /// Row covector times matrix: `(l A)_j = sum_i l_i A_ij`.
    pub fn vecmat(&self, l: &[C64]) -> Vec<C64> {
        debug_assert_eq!(l.len(), self.n);
        (0..self.n)
            .map(|j| (0..self.n).map(|i| l[i] * self[(i, j)]).sum())
            .collect()
    }

    pub fn transpose(&self) -> CMatrix {
        let mut t = CMatrix::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn conj_transpose(&self) -> CMatrix {
        let mut t = CMatrix::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t[(j, i)] = self[(i, j)].conj();
            }
        }
        t
    }

    pub fn mul(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.n, rhs.n);
        let mut out = CMatrix::zeros(self.n);
        for i in 0..self.n {
            for k in 0..self.n {
                let a = self[(i, k)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..self.n {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }

    pub fn add(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.n, rhs.n);
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| a + b)
            .collect();
        CMatrix { n: self.n, data }
    }

    pub fn sub(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.n, rhs.n);
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| a - b)
            .collect();
        CMatrix { n: self.n, data }
    }

    pub fn scale(&self, s: C64) -> CMatrix {
        CMatrix {
            n: self.n,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    /// Largest entry magnitude.
    pub fn max_norm(&self) -> f64 {
        self.data.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        vec_finite(&self.data)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        for i in 0..self.n {
            for j in 0..self.n {
                if (self[(i, j)] - self[(j, i)].conj()).norm() > tol {
                    return false;
                }
            }
        }
        true
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.n + j]
    }
}

/// A complete biorthogonal eigensystem: energies with paired right
/// eigenvectors and left eigencovectors, bilinearly normalized so that
/// `<l_m|r_n> = delta_mn` and `sum_n |r_n><l_n| = I` within `tolerance`.
#[derive(Debug, Clone)]
pub struct BiorthEigensystem {
    energies: Vec<C64>,
    rights: Vec<Vec<C64>>,
    lefts: Vec<Vec<C64>>,
    tolerance: f64,
}

impl BiorthEigensystem {
    /// Assemble and verify a system from already-normalized pairs.
    ///
    /// Fails with [`Error::NearDefective`] when biorthonormality or
    /// completeness is violated beyond `tolerance`.
    pub fn new(
        energies: Vec<C64>,
        rights: Vec<Vec<C64>>,
        lefts: Vec<Vec<C64>>,
        tolerance: f64,
    ) -> Result<Self> {
        let n = energies.len();
        assert!(n >= 1);
        assert_eq!(rights.len(), n);
        assert_eq!(lefts.len(), n);
        for v in rights.iter().chain(lefts.iter()) {
            if v.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: v.len(),
                });
            }
            if !vec_finite(v) {
                return Err(Error::NonFinite);
            }
        }
        let sys = BiorthEigensystem {
            energies,
            rights,
            lefts,
            tolerance,
        };
        let worst = sys.biorthonormality_defect().max(sys.completeness_defect());
        if worst > tolerance {
            return Err(Error::NearDefective { gap: worst });
        }
        Ok(sys)
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &[C64] {
        &self.energies
    }

    pub fn right(&self, n: usize) -> &[C64] {
        &self.rights[n]
    }

    pub fn left(&self, n: usize) -> &[C64] {
        &self.lefts[n]
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// Largest deviation of `<l_m|r_n>` from the identity pattern.
    pub fn biorthonormality_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for m in 0..n {
            for j in 0..n {
                let p = pair(&self.lefts[m], &self.rights[j]);
                let target = if m == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
                worst = worst.max((p - target).norm());
            }
        }
        worst
    }

    /// Max-norm of `sum_n |r_n><l_n| - I`.
    pub fn completeness_defect(&self) -> f64 {
        let n = self.dim();
        let mut acc = CMatrix::zeros(n);
        for m in 0..n {
            for i in 0..n {
                for j in 0..n {
                    acc[(i, j)] += self.rights[m][i] * self.lefts[m][j];
                }
            }
        }
        acc.sub(&CMatrix::identity(n)).max_norm()
    }

    /// `sum_n E_n |r_n><l_n|` -- the spectral reconstruction of the operator.
    pub fn assemble(&self) -> CMatrix {
        let n = self.dim();
        let mut acc = CMatrix::zeros(n);
        for m in 0..n {
            for i in 0..n {
                for j in 0..n {
                    acc[(i, j)] += self.energies[m] * self.rights[m][i] * self.lefts[m][j];
                }
            }
        }
        acc
    }
}

/// Full biorthogonal eigendecomposition of a general complex matrix.
///
/// Right eigenvectors come from `H`, left covectors from right
/// eigenvectors of `H^T` at the same eigenvalues; every pair is normalized
/// with [`biorth_normalize`] and gauge-fixed so its largest right
/// component is real positive. Eigenvalues are sorted by real part, then
/// imaginary part.
///
/// Inputs whose eigenvalue gaps fall at or below `tol` are rejected with
/// [`Error::NearDefective`]: exceptional points are errors, never
/// approximated.
pub fn eig_dense(h: &CMatrix, tol: f64) -> Result<BiorthEigensystem> {
    if !h.is_finite() {
        return Err(Error::NonFinite);
    }
    eig::eig_dense_impl(h, tol)
}

/// Fix the overall complex scale of a pair so the largest-magnitude right
/// component is real positive. Preserves `<l|r>`.
pub(crate) fn gauge_fix(right: &mut [C64], left: &mut [C64]) {
    let mut idx = 0;
    let mut best = 0.0;
    for (i, x) in right.iter().enumerate() {
        let m = x.norm();
        if m > best * (1.0 + 1e-12) {
            best = m;
            idx = i;
        }
    }
    if best == 0.0 {
        return;
    }
    let alpha = right[idx] / best;
    for x in right.iter_mut() {
        *x /= alpha;
    }
    for x in left.iter_mut() {
        *x *= alpha;
    }
}
