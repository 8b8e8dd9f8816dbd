//! Dense Hermitian eigensolvers: Householder reduction to tridiagonal form
//! followed by implicit-shift QL.
//!
//! Only the lower triangle of the input is read. Real skew-symmetric input
//! has its own reduction that keeps everything real.

use nalgebra::{ComplexField, DMatrix};
use num_complex::Complex64;

use crate::error::{LsdError, Result};

/// Eigenvalues in ascending order with optional eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct Eigen<T: ComplexField> {
    pub values: Vec<f64>,
    pub vectors: Option<DMatrix<T>>,
}

/// Short FNV-1a digest of the matrix contents, used in error reports.
pub fn fingerprint<T: ComplexField<RealField = f64> + Copy>(a: &DMatrix<T>) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |x: f64| {
        for b in x.to_bits().to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    };
    eat(a.nrows() as f64);
    eat(a.ncols() as f64);
    for v in a.iter() {
        eat(v.real());
        eat(v.imaginary());
    }
    format!("{}x{}:{h:016x}", a.nrows(), a.ncols())
}

/// Reflector `P = I − u u*/h` stored for back-transformation.
struct Reflector<T> {
    start: usize,
    u: Vec<T>,
    h: f64,
}

/// Reduces the Hermitian matrix (lower triangle of `a`, overwritten) to a
/// real symmetric tridiagonal `(d, e)` with `e[k]` coupling `k` and `k + 1`.
/// Also returns the reflectors and the diagonal phases that make `e` real.
fn tridiagonalize<T: ComplexField<RealField = f64> + Copy>(
    a: &mut DMatrix<T>,
) -> (Vec<f64>, Vec<f64>, Vec<Reflector<T>>, Vec<T>) {
    let n = a.nrows();
    let zero = T::from_real(0.0);
    let mut off = vec![zero; n.saturating_sub(1)];
    let mut reflectors = Vec::new();
    let mut p = vec![zero; n];

    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1;
        let col = k;
        let norm2: f64 = (k + 1..n).map(|i| a[(i, col)].modulus_squared()).sum();
        let x0 = a[(k + 1, col)];
        if norm2 == 0.0 {
            off[k] = zero;
            continue;
        }
        let norm = norm2.sqrt();
        let x0_abs = x0.modulus();
        let phase = if x0_abs > 0.0 { x0.scale(1.0 / x0_abs) } else { T::from_real(1.0) };
        // u = x + e^{iθ}‖x‖ e₁, so P x = −e^{iθ}‖x‖ e₁.
        let mut u: Vec<T> = (k + 1..n).map(|i| a[(i, col)]).collect();
        u[0] += phase.scale(norm);
        let h = norm2 + x0_abs * norm;
        off[k] = -phase.scale(norm);

        // p = A₂₂ u / h using the lower triangle.
        let p = &mut p[..m];
        p.iter_mut().for_each(|v| *v = zero);
        for j in 0..m {
            let cj = k + 1 + j;
            let uj = u[j];
            let mut acc = a[(cj, cj)] * uj;
            let column = a.column(cj);
            for i in j + 1..m {
                let aij = column[k + 1 + i];
                p[i] += aij * uj;
                acc += aij.conjugate() * u[i];
            }
            p[j] += acc;
        }
        let inv_h = 1.0 / h;
        p.iter_mut().for_each(|v| *v = v.scale(inv_h));
        // q = p − K u with K = u*p / 2h (real for Hermitian A).
        let kk = u.iter().zip(p.iter()).map(|(ui, pi)| (ui.conjugate() * *pi).real()).sum::<f64>() * 0.5 * inv_h;
        for i in 0..m {
            p[i] -= u[i].scale(kk);
        }
        // A₂₂ ← A₂₂ − q u* − u q*, lower triangle only.
        for j in 0..m {
            let cj = k + 1 + j;
            let uj = u[j].conjugate();
            let qj = p[j].conjugate();
            let mut column = a.column_mut(cj);
            for i in j..m {
                column[k + 1 + i] -= p[i] * uj + u[i] * qj;
            }
        }
        reflectors.push(Reflector { start: k + 1, u, h });
    }
    if n >= 2 {
        off[n - 2] = a[(n - 1, n - 2)];
    }
    let d: Vec<f64> = (0..n).map(|i| a[(i, i)].real()).collect();

    // D* T D is real with off-diagonals |e_k|.
    let mut phases = vec![T::from_real(1.0); n];
    let mut e = vec![0.0; n.saturating_sub(1)];
    for k in 0..n.saturating_sub(1) {
        let m = off[k].modulus();
        e[k] = m;
        phases[k + 1] = if m > 0.0 { phases[k] * off[k].scale(1.0 / m) } else { phases[k] };
    }
    (d, e, reflectors, phases)
}

/// Implicit QL on a real symmetric tridiagonal matrix. `e[k]` couples `k`
/// and `k + 1`. Rotations are applied to the columns of `z` when given.
pub fn tridiagonal_ql(d: &mut [f64], e: &[f64], mut z: Option<&mut DMatrix<f64>>) -> std::result::Result<(), usize> {
    let n = d.len();
    if n <= 1 {
        return Ok(());
    }
    let mut e: Vec<f64> = e.to_vec();
    e.push(0.0);
    // Couplings below ε‖T‖ are negligible even when the adjacent diagonal
    // entries vanish, as they do for rank-deficient skew input.
    let norm = (0..n).map(|i| d[i].abs() + e[i].abs() + if i > 0 { e[i - 1].abs() } else { 0.0 }).fold(0.0, f64::max);
    let floor = f64::EPSILON * norm;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd || e[m].abs() <= floor {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(l);
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut early = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    early = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    for k in 0..z.nrows() {
                        let f = z[(k, i + 1)];
                        z[(k, i + 1)] = s * z[(k, i)] + c * f;
                        z[(k, i)] = c * z[(k, i)] - s * f;
                    }
                }
            }
            if early {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

fn sort_pairs<T: ComplexField + Copy>(values: Vec<f64>, vectors: Option<DMatrix<T>>) -> Eigen<T> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let sorted = idx.iter().map(|&i| values[i]).collect();
    let vectors = vectors.map(|v| DMatrix::from_fn(v.nrows(), v.ncols(), |r, c| v[(r, idx[c])]));
    Eigen { values: sorted, vectors }
}

/// Eigen-decomposition of a Hermitian (or real symmetric) matrix given by its
/// lower triangle.
pub fn hermitian_eigen<T: ComplexField<RealField = f64> + Copy>(a: &DMatrix<T>, want_vectors: bool) -> Result<Eigen<T>> {
    if a.nrows() != a.ncols() {
        return Err(LsdError::Shape(format!("matrix must be square, got {}x{}", a.nrows(), a.ncols())));
    }
    if a.iter().any(|v| !v.real().is_finite() || !v.imaginary().is_finite()) {
        return Err(LsdError::Domain("matrix has non-finite entries".into()));
    }
    let n = a.nrows();
    let mut work = a.clone();
    let (mut d, e, reflectors, phases) = tridiagonalize(&mut work);
    let mut z = want_vectors.then(|| DMatrix::<f64>::identity(n, n));
    tridiagonal_ql(&mut d, &e, z.as_mut()).map_err(|_| LsdError::EigenNoConvergence { fingerprint: fingerprint(a) })?;

    let vectors = z.map(|z| {
        // V = P₀ ⋯ P_{n−3} · D · W
        let mut v = DMatrix::from_fn(n, n, |r, c| phases[r].scale(z[(r, c)]));
        for refl in reflectors.iter().rev() {
            let inv_h = 1.0 / refl.h;
            for c in 0..n {
                let mut col = v.column_mut(c);
                let mut dot = T::from_real(0.0);
                for (i, ui) in refl.u.iter().enumerate() {
                    dot += ui.conjugate() * col[refl.start + i];
                }
                let dot = dot.scale(inv_h);
                for (i, ui) in refl.u.iter().enumerate() {
                    col[refl.start + i] -= *ui * dot;
                }
            }
        }
        v
    });
    Ok(sort_pairs(d, vectors))
}

/// Spectrum of the Hermitian matrix `−iA` for real skew-symmetric `A`
/// (strictly lower triangle read), without leaving real arithmetic.
///
/// Orthogonal reflectors keep `A` skew, so the reduction ends in a
/// tridiagonal skew matrix with off-diagonals `e_k`. Then `−iT` is unitarily
/// similar to the real symmetric tridiagonal with zero diagonal and
/// off-diagonals `|e_k|`.
pub fn skew_spectrum(a: &DMatrix<f64>) -> Result<Vec<f64>> {
    if a.nrows() != a.ncols() {
        return Err(LsdError::Shape(format!("matrix must be square, got {}x{}", a.nrows(), a.ncols())));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(LsdError::Domain("matrix has non-finite entries".into()));
    }
    let n = a.nrows();
    let mut w = a.clone();
    let mut e = vec![0.0; n.saturating_sub(1)];
    let mut p = vec![0.0; n];
    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1;
        let norm2: f64 = w.column(k).rows(k + 1, m).iter().map(|v| v * v).sum();
        if norm2 == 0.0 {
            continue;
        }
        let norm = norm2.sqrt();
        let x0 = w[(k + 1, k)];
        let sign = if x0 >= 0.0 { 1.0 } else { -1.0 };
        let mut u: Vec<f64> = w.column(k).rows(k + 1, m).iter().copied().collect();
        u[0] += sign * norm;
        let h = norm2 + x0.abs() * norm;
        e[k] = -sign * norm;

        // p = A₂₂ u / h with A₂₂ skew, strictly lower triangle stored.
        let p = &mut p[..m];
        p.iter_mut().for_each(|v| *v = 0.0);
        for j in 0..m {
            let cj = k + 1 + j;
            let uj = u[j];
            let column = w.column(cj);
            let mut acc = 0.0;
            for i in j + 1..m {
                let aij = column[k + 1 + i];
                p[i] += aij * uj;
                acc -= aij * u[i];
            }
            p[j] += acc;
        }
        let inv_h = 1.0 / h;
        p.iter_mut().for_each(|v| *v *= inv_h);
        // A₂₂ ← A₂₂ + u pᵀ − p uᵀ
        for j in 0..m {
            let cj = k + 1 + j;
            let (uj, pj) = (u[j], p[j]);
            let mut column = w.column_mut(cj);
            for i in j + 1..m {
                column[k + 1 + i] += u[i] * pj - p[i] * uj;
            }
        }
    }
    if n >= 2 {
        e[n - 2] = w[(n - 1, n - 2)];
    }
    let mut d = vec![0.0; n];
    let e: Vec<f64> = e.iter().map(|v| v.abs()).collect();
    tridiagonal_ql(&mut d, &e, None).map_err(|_| LsdError::EigenNoConvergence { fingerprint: fingerprint(a) })?;
    d.sort_by(|x, y| x.total_cmp(y));
    Ok(d)
}

/// `−iA` as a complex Hermitian matrix.
pub fn skew_to_hermitian(a: &DMatrix<f64>) -> DMatrix<Complex64> {
    a.map(|v| Complex64::new(0.0, -v))
}

/// Frobenius norm of `A`.
pub fn frobenius<T: ComplexField<RealField = f64> + Copy>(a: &DMatrix<T>) -> f64 {
    a.iter().map(|v| v.modulus_squared()).sum::<f64>().sqrt()
}

/// Largest `‖A v − λ v‖₂` over the returned pairs, `A` taken in full.
pub fn max_residual<T: ComplexField<RealField = f64> + Copy>(a: &DMatrix<T>, eig: &Eigen<T>) -> Option<f64> {
    let v = eig.vectors.as_ref()?;
    let av = a * v;
    Some(
        (0..v.ncols())
            .map(|c| {
                let lambda = T::from_real(eig.values[c]);
                (0..v.nrows()).map(|r| (av[(r, c)] - lambda * v[(r, c)]).modulus_squared()).sum::<f64>().sqrt()
            })
            .fold(0.0, f64::max),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two() {
        let s = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let sk = skew_spectrum(&s).unwrap();
        assert!((sk[0] + 1.0).abs() < 1e-15 && (sk[1] - 1.0).abs() < 1e-15);
        let h = hermitian_eigen(&skew_to_hermitian(&s), false).unwrap();
        assert!((h.values[0] + 1.0).abs() < 1e-15 && (h.values[1] - 1.0).abs() < 1e-15);
        let sym = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let r = hermitian_eigen(&sym, true).unwrap();
        assert!((r.values[0] + 1.0).abs() < 1e-15 && (r.values[1] - 1.0).abs() < 1e-15);
        assert!(max_residual(&sym, &r).unwrap() < 1e-15);
    }

    #[test]
    fn diagonal_and_trivial_sizes() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, -1.0, 2.0]));
        assert_eq!(hermitian_eigen(&a, false).unwrap().values, vec![-1.0, 2.0, 3.0]);
        let one = DMatrix::from_element(1, 1, 5.0);
        assert_eq!(hermitian_eigen(&one, true).unwrap().values, vec![5.0]);
        assert_eq!(skew_spectrum(&DMatrix::<f64>::zeros(1, 1)).unwrap(), vec![0.0]);
        assert!(hermitian_eigen(&DMatrix::<f64>::zeros(0, 0), false).unwrap().values.is_empty());
    }

    #[test]
    fn known_tridiagonal_spectrum() {
        // Path-graph Laplacian-like matrix: eigenvalues 2cos(kπ/(n+1)).
        let n = 12;
        let a = DMatrix::from_fn(n, n, |i, j| if i.abs_diff(j) == 1 { 1.0 } else { 0.0 });
        let vals = hermitian_eigen(&a, false).unwrap().values;
        let mut want: Vec<f64> =
            (1..=n).map(|k| 2.0 * (k as f64 * std::f64::consts::PI / (n + 1) as f64).cos()).collect();
        want.sort_by(|x, y| x.total_cmp(y));
        for (v, w) in vals.iter().zip(&want) {
            assert!((v - w).abs() < 1e-13);
        }
    }

    #[test]
    fn rank_deficient_skew_input() {
        // Rank 2 in dimension 40: 38 zero eigenvalues around a ±pair.
        let n = 40;
        let u: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        let v: Vec<f64> = (0..n).map(|i| (i as f64 * 0.11 + 1.0).cos()).collect();
        let a = DMatrix::from_fn(n, n, |i, j| u[i] * v[j] - v[i] * u[j]);
        let vals = skew_spectrum(&a).unwrap();
        assert!(vals[1..n - 1].iter().all(|x| x.abs() < 1e-12));
        let canonical = hermitian_eigen(&skew_to_hermitian(&a), false).unwrap().values;
        assert!((vals[n - 1] - canonical[n - 1]).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(hermitian_eigen(&DMatrix::<f64>::zeros(2, 3), false), Err(LsdError::Shape(_))));
        let mut a = DMatrix::<f64>::zeros(2, 2);
        a[(1, 0)] = f64::NAN;
        assert!(hermitian_eigen(&a, false).is_err());
        assert!(skew_spectrum(&a).is_err());
    }

    #[test]
    fn fingerprint_is_stable_and_sensitive() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let mut b = a.clone();
        assert_eq!(fingerprint(&a), fingerprint(&b));
        b[(0, 0)] = 1.0 + f64::EPSILON;
        assert_ne!(fingerprint(&a), fingerprint(&b));
    }
}
