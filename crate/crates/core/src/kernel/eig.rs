//! General complex eigendecomposition for small dense matrices.
//!
//! Eigenvalues come from Hessenberg reduction followed by shifted QR
//! iteration (closed-form quadratic for n = 2); eigenvectors from inverse
//! iteration on the original matrix, with one Rayleigh-quotient refinement
//! pass. No defect handling: close eigenvalues are an error.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::kernel::{
    biorth_normalize, gauge_fix, pair, principal_sqrt, vec_norm, BiorthEigensystem, CMatrix,
};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

pub(crate) fn eig_dense_impl(h: &CMatrix, tol: f64) -> Result<BiorthEigensystem> {
    let n = h.n();
    let mut energies = match n {
        1 => vec![h[(0, 0)]],
        2 => eig2_values(h),
        _ => qr_eigenvalues(h)?,
    };
    energies.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap()
            .then(a.im.partial_cmp(&b.im).unwrap())
    });

    // Reject near-degenerate spectra up front: eigenvectors coalesce and
    // the biorthogonal normalization loses meaning.
    let scale = h.max_norm().max(1.0);
    for i in 0..n {
        for j in (i + 1)..n {
            let gap = (energies[i] - energies[j]).norm();
            if gap <= tol * scale {
                return Err(Error::NearDefective { gap });
            }
        }
    }

    let ht = h.transpose();
    let mut rights = Vec::with_capacity(n);
    let mut lefts = Vec::with_capacity(n);
    for m in 0..n {
        let mut lambda = energies[m];
        let mut right = eigenvector_at(h, lambda, m);
        let mut left = eigenvector_at(&ht, lambda, m);
        // One Rayleigh refinement: quadratic in the eigenvalue error.
        let s = pair(&left, &right);
        if s.norm() > 1e-14 * vec_norm(&left) * vec_norm(&right) {
            lambda = pair(&left, &h.matvec(&right)) / s;
            right = eigenvector_at(h, lambda, m);
            left = eigenvector_at(&ht, lambda, m);
            energies[m] = lambda;
        }
        let (mut r, mut l) = biorth_normalize(&right, &left, tol).map_err(|e| match e {
            Error::SelfOrthogonal { overlap } => Error::NearDefective { gap: overlap },
            other => other,
        })?;
        gauge_fix(&mut r, &mut l);
        rights.push(r);
        lefts.push(l);
    }

    let sys = BiorthEigensystem::new(energies, rights, lefts, tol)?;
    let recon = sys.assemble().sub(h).max_norm();
    if recon > 10.0 * tol * scale {
        return Err(Error::NearDefective { gap: recon });
    }
    Ok(sys)
}

/// Closed-form eigenvalues of a 2x2 matrix.
fn eig2_values(h: &CMatrix) -> Vec<C64> {
    let (a, b, c, d) = (h[(0, 0)], h[(0, 1)], h[(1, 0)], h[(1, 1)]);
    let half_tr = (a + d) * 0.5;
    let det = a * d - b * c;
    let disc = principal_sqrt(half_tr * half_tr - det);
    vec![half_tr - disc, half_tr + disc]
}

/// Eigenvector by inverse iteration at `lambda`. `seed` decorrelates the
/// start vector between eigenvalues so repeated calls stay deterministic.
fn eigenvector_at(a: &CMatrix, lambda: C64, seed: usize) -> Vec<C64> {
    let n = a.n();
    if n == 2 {
        // Closed form from the rows of A - lambda I; pick the better
        // conditioned of the two null-vector expressions.
        let v1 = [a[(0, 1)], lambda - a[(0, 0)]];
        let v2 = [lambda - a[(1, 1)], a[(1, 0)]];
        let (n1, n2) = (vec_norm(&v1), vec_norm(&v2));
        let v = if n1 >= n2 { v1 } else { v2 };
        let nv = vec_norm(&v);
        if nv > 1e-300 {
            return v.iter().map(|x| x / nv).collect();
        }
        // A - lambda I vanished entirely (scalar matrix): basis vector.
        let mut e = vec![ZERO; 2];
        e[seed.min(1)] = ONE;
        return e;
    }

    let scale = a.max_norm().max(1.0);
    let mut m = a.clone();
    for i in 0..n {
        m[(i, i)] -= lambda;
    }
    let lu = LuFactors::new(m, 1e-15 * scale);
    // Deterministic, mildly index-dependent start vector.
    let mut v: Vec<C64> = (0..n)
        .map(|i| C64::new(1.0, 0.3 * ((i + seed) as f64 + 1.0).recip()))
        .collect();
    for _ in 0..3 {
        v = lu.solve(&v);
        let nv = vec_norm(&v);
        if nv < 1e-300 || !nv.is_finite() {
            // fall back to a fresh start
            v = (0..n).map(|i| C64::new((i + 1) as f64, 1.0)).collect();
            continue;
        }
        for x in v.iter_mut() {
            *x /= nv;
        }
    }
    v
}

/// LU with partial pivoting; near-zero pivots are replaced by a tiny
/// regularizer so inverse iteration can run on singular shifts.
struct LuFactors {
    lu: CMatrix,
    perm: Vec<usize>,
}

impl LuFactors {
    fn new(mut m: CMatrix, pivot_floor: f64) -> Self {
        let n = m.n();
        let mut perm: Vec<usize> = (0..n).collect();
        for col in 0..n {
            let mut p = col;
            let mut best = m[(col, col)].norm();
            for r in (col + 1)..n {
                let mag = m[(r, col)].norm();
                if mag > best {
                    best = mag;
                    p = r;
                }
            }
            if p != col {
                for j in 0..n {
                    let tmp = m[(col, j)];
                    m[(col, j)] = m[(p, j)];
                    m[(p, j)] = tmp;
                }
                perm.swap(col, p);
            }
            if m[(col, col)].norm() < pivot_floor {
                m[(col, col)] = C64::new(pivot_floor, 0.0);
            }
            let inv_piv = ONE / m[(col, col)];
            for r in (col + 1)..n {
                let factor = m[(r, col)] * inv_piv;
                m[(r, col)] = factor;
                for j in (col + 1)..n {
                    let sub = factor * m[(col, j)];
                    m[(r, j)] -= sub;
                }
            }
        }
        LuFactors { lu: m, perm }
    }

    fn solve(&self, b: &[C64]) -> Vec<C64> {
        let n = self.lu.n();
        let mut x: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            for j in 0..i {
                let sub = self.lu[(i, j)] * x[j];
                x[i] -= sub;
            }
        }
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                let sub = self.lu[(i, j)] * x[j];
                x[i] -= sub;
            }
        }
        for i in (0..n).rev() {
            x[i] /= self.lu[(i, i)];
            for j in 0..i {
                let sub = self.lu[(j, i)] * x[i];
                x[j] -= sub;
            }
        }
        x
    }
}

/// Reduce to upper Hessenberg form in place by Householder similarity.
fn hessenberg_in_place(a: &mut CMatrix) {
    let n = a.n();
    for k in 0..n.saturating_sub(2) {
        // Householder vector for column k, rows k+1..n.
        let mut x: Vec<C64> = (k + 1..n).map(|i| a[(i, k)]).collect();
        let xnorm = vec_norm(&x);
        if xnorm < 1e-300 {
            continue;
        }
        let phase = if x[0].norm() > 0.0 {
            x[0] / x[0].norm()
        } else {
            ONE
        };
        let alpha = -phase * xnorm;
        x[0] -= alpha;
        let vnorm2: f64 = x.iter().map(|v| v.norm_sqr()).sum();
        if vnorm2 < 1e-300 {
            continue;
        }
        let beta = 2.0 / vnorm2;
        // Left: A <- A - beta v (v^H A) on rows k+1..n.
        for j in 0..n {
            let mut dot = ZERO;
            for (idx, i) in (k + 1..n).enumerate() {
                dot += x[idx].conj() * a[(i, j)];
            }
            dot *= beta;
            for (idx, i) in (k + 1..n).enumerate() {
                let sub = x[idx] * dot;
                a[(i, j)] -= sub;
            }
        }
        // Right: A <- A - beta (A v) v^H on cols k+1..n.
        for i in 0..n {
            let mut dot = ZERO;
            for (idx, j) in (k + 1..n).enumerate() {
                dot += a[(i, j)] * x[idx];
            }
            dot *= beta;
            for (idx, j) in (k + 1..n).enumerate() {
                let sub = dot * x[idx].conj();
                a[(i, j)] -= sub;
            }
        }
    }
}

/// Eigenvalues of a general complex matrix via shifted QR on the
/// Hessenberg form. Explicit single-shift steps with Givens rotations.
fn qr_eigenvalues(h: &CMatrix) -> Result<Vec<C64>> {
    let n = h.n();
    let mut a = h.clone();
    hessenberg_in_place(&mut a);
    let scale = a.max_norm().max(1e-300);
    let eps = f64::EPSILON;

    let mut hi = n - 1;
    let mut iter_at_hi = 0usize;
    let mut total_iters = 0usize;
    let max_total = 200 * n;

    while total_iters < max_total {
        // Deflate converged subdiagonals.
        while hi > 0 {
            let off = a[(hi, hi - 1)].norm();
            let local = a[(hi, hi)].norm() + a[(hi - 1, hi - 1)].norm();
            if off <= eps * (local + scale) {
                a[(hi, hi - 1)] = ZERO;
                hi -= 1;
                iter_at_hi = 0;
            } else {
                break;
            }
        }
        if hi == 0 {
            return Ok((0..n).map(|i| a[(i, i)]).collect());
        }
        // Active window [lo, hi].
        let mut lo = hi;
        while lo > 0 {
            let off = a[(lo, lo - 1)].norm();
            let local = a[(lo, lo)].norm() + a[(lo - 1, lo - 1)].norm();
            if off <= eps * (local + scale) {
                a[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }

        total_iters += 1;
        iter_at_hi += 1;
        let sigma = if iter_at_hi % 12 == 0 {
            // Exceptional shift to break symmetry stalls.
            a[(hi, hi)] + C64::new(1.5, 0.5) * a[(hi, hi - 1)].norm()
        } else {
            wilkinson_shift(&a, hi)
        };

        // H - sigma I = QR on the window, then H <- R Q + sigma I.
        for i in lo..=hi {
            a[(i, i)] -= sigma;
        }
        let mut rots: Vec<(C64, C64)> = Vec::with_capacity(hi - lo);
        for j in lo..hi {
            let (c, s) = givens(a[(j, j)], a[(j + 1, j)]);
            // rows j, j+1, columns j..n
            for col in j..n {
                let t1 = a[(j, col)];
                let t2 = a[(j + 1, col)];
                a[(j, col)] = c.conj() * t1 + s.conj() * t2;
                a[(j + 1, col)] = -s * t1 + c * t2;
            }
            rots.push((c, s));
        }
        for (idx, j) in (lo..hi).enumerate() {
            let (c, s) = rots[idx];
            // columns j, j+1, rows 0..=min(j+1, hi)
            for row in 0..=(j + 1).min(hi) {
                let t1 = a[(row, j)];
                let t2 = a[(row, j + 1)];
                a[(row, j)] = t1 * c + t2 * s;
                a[(row, j + 1)] = -t1 * s.conj() + t2 * c.conj();
            }
        }
        for i in lo..=hi {
            a[(i, i)] += sigma;
        }
    }
    Err(Error::NearDefective { gap: a[(hi, hi - 1)].norm() })
}

/// Eigenvalue of the trailing 2x2 block closest to the corner entry.
fn wilkinson_shift(a: &CMatrix, hi: usize) -> C64 {
    let p = a[(hi - 1, hi - 1)];
    let q = a[(hi - 1, hi)];
    let r = a[(hi, hi - 1)];
    let s = a[(hi, hi)];
    let half_tr = (p + s) * 0.5;
    let det = p * s - q * r;
    let disc = principal_sqrt(half_tr * half_tr - det);
    let e1 = half_tr + disc;
    let e2 = half_tr - disc;
    if (e1 - s).norm() < (e2 - s).norm() {
        e1
    } else {
        e2
    }
}

/// Complex Givens rotation with |c|^2 + |s|^2 = 1 zeroing the second entry:
/// [c* s*; -s c] [f; g] = [r; 0].
fn givens(f: C64, g: C64) -> (C64, C64) {
    let gn = g.norm();
    if gn == 0.0 {
        return (ONE, ZERO);
    }
    let fn_ = f.norm();
    let denom = (fn_ * fn_ + gn * gn).sqrt();
    if fn_ == 0.0 {
        return (ZERO, g / gn);
    }
    let c = C64::new(fn_ / denom, 0.0);
    let s = (f / fn_) * (g.conj() / denom);
    (c, s.conj())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::eig_dense;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn residuals(h: &CMatrix, sys: &BiorthEigensystem) -> f64 {
        let mut worst: f64 = 0.0;
        for m in 0..sys.dim() {
            let hr = h.matvec(sys.right(m));
            let lr: Vec<C64> = sys
                .right(m)
                .iter()
                .map(|x| x * sys.energies()[m])
                .collect();
            let res: f64 = hr
                .iter()
                .zip(&lr)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            worst = worst.max(res);
            let lh = h.vecmat(sys.left(m));
            let ll: Vec<C64> = sys.left(m).iter().map(|x| x * sys.energies()[m]).collect();
            let res: f64 = lh
                .iter()
                .zip(&ll)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            worst = worst.max(res);
        }
        worst
    }

    #[test]
    fn diagonal_matrix() {
        let h = CMatrix::from_rows(2, &[c(1.0, 2.0), c(0.0, 0.0), c(0.0, 0.0), c(3.0, 0.0)])
            .unwrap();
        let sys = eig_dense(&h, 1e-10).unwrap();
        assert!((sys.energies()[0] - c(1.0, 2.0)).norm() < 1e-12);
        assert!((sys.energies()[1] - c(3.0, 0.0)).norm() < 1e-12);
        assert!((sys.right(0)[0].norm() - 1.0).abs() < 1e-12);
        assert!(sys.right(0)[1].norm() < 1e-12);
        assert!(sys.right(1)[0].norm() < 1e-12);
    }

    #[test]
    fn hermitian_input_lefts_are_conjugates() {
        let h = CMatrix::from_rows(
            3,
            &[
                c(1.0, 0.0), c(0.5, 0.2), c(0.1, -0.3),
                c(0.5, -0.2), c(-0.7, 0.0), c(0.4, 0.1),
                c(0.1, 0.3), c(0.4, -0.1), c(2.0, 0.0),
            ],
        )
        .unwrap();
        let sys = eig_dense(&h, 1e-10).unwrap();
        for m in 0..3 {
            assert!(sys.energies()[m].im.abs() < 1e-10);
            for i in 0..3 {
                assert!((sys.left(m)[i] - sys.right(m)[i].conj()).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn generic_nonhermitian_residuals() {
        let h = CMatrix::from_rows(
            4,
            &[
                c(0.3, 0.8), c(-1.1, 0.2), c(0.6, -0.4), c(0.0, 0.9),
                c(0.7, 0.0), c(0.2, -0.5), c(-0.3, 0.3), c(1.2, 0.1),
                c(-0.4, 0.6), c(0.9, -0.2), c(0.5, 0.7), c(-0.8, 0.0),
                c(0.1, -0.9), c(0.3, 0.4), c(-0.6, 0.1), c(-0.2, -0.3),
            ],
        )
        .unwrap();
        let sys = eig_dense(&h, 1e-10).unwrap();
        assert!(residuals(&h, &sys) < 1e-9);
        assert!(sys.biorthonormality_defect() < 1e-10);
        assert!(sys.completeness_defect() < 1e-10);
        assert!(sys.assemble().sub(&h).max_norm() < 1e-9);
    }

    #[test]
    fn repeated_eigenvalue_is_near_defective() {
        // Jordan block: defective, must error.
        let h = CMatrix::from_rows(2, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)])
            .unwrap();
        assert!(matches!(
            eig_dense(&h, 1e-10),
            Err(Error::NearDefective { .. })
        ));
    }

    #[test]
    fn upper_triangular_5x5() {
        let mut h = CMatrix::zeros(5);
        for i in 0..5 {
            h[(i, i)] = c(i as f64 + 0.5, 0.3 * i as f64);
            for j in (i + 1)..5 {
                h[(i, j)] = c(0.3 * (i + j) as f64, -0.1);
            }
        }
        let sys = eig_dense(&h, 1e-10).unwrap();
        for m in 0..5 {
            let found = sys
                .energies()
                .iter()
                .any(|e| (e - h[(m, m)]).norm() < 1e-9);
            assert!(found, "missing eigenvalue {:?}", h[(m, m)]);
        }
        assert!(residuals(&h, &sys) < 1e-8);
    }
}
