//! Small dense eigensolvers used by the entanglement module.
//!
//! Two deliberately separate routes: a QL-with-implicit-shifts solver for the
//! real symmetric tridiagonal chains produced by the partial-transpose band
//! structure, and a cyclic Jacobi solver for full complex Hermitian matrices
//! used only by the dense validation oracle.

use crate::error::{Error, Result};
use crate::C64;

const MAX_QL_ITERS: usize = 60;
const MAX_JACOBI_SWEEPS: usize = 100;

/// Eigenvalues of a real symmetric tridiagonal matrix, ascending.
///
/// `diag` has length n, `offdiag` length n - 1.
pub fn symmetric_tridiagonal_eigenvalues(diag: &[f64], offdiag: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    assert!(
        offdiag.len() + 1 == n || (n == 0 && offdiag.is_empty()),
        "offdiag length must be diag length - 1"
    );
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut d = diag.to_vec();
    let mut e = offdiag.to_vec();
    e.push(0.0);

    for l in 0..n {
        let mut iter = 0;
        'deflate: loop {
            // Locate the first negligible off-diagonal at or after l.
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_QL_ITERS {
                return Err(Error::EigenFailure(format!(
                    "tridiagonal QL did not converge within {MAX_QL_ITERS} iterations (n = {n})"
                )));
            }
            // Implicit shift from the 2x2 at the deflation point.
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    continue 'deflate;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                f = (d[i] - g) * s + 2.0 * c * b;
                p = s * f;
                d[i + 1] = g + p;
                g = c * f - b;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(d)
}

/// Eigenvalues of a complex Hermitian tridiagonal matrix.
///
/// The off-diagonal phases are absorbed by a diagonal unitary, which leaves
/// the spectrum untouched, so this reduces to the real symmetric case with
/// `|offdiag|`.
pub fn hermitian_tridiagonal_eigenvalues(diag: &[f64], offdiag: &[C64]) -> Result<Vec<f64>> {
    let moduli: Vec<f64> = offdiag.iter().map(|c| c.norm()).collect();
    symmetric_tridiagonal_eigenvalues(diag, &moduli)
}

/// Eigenvalues of an n x n complex Hermitian matrix, ascending, by cyclic
/// Jacobi rotations. Only the oracle path uses this; `a` is row-major and is
/// consumed.
pub fn hermitian_eigenvalues(a: &mut [C64], n: usize) -> Result<Vec<f64>> {
    assert_eq!(a.len(), n * n, "matrix storage must be n*n");
    if n == 0 {
        return Ok(Vec::new());
    }
    let scale: f64 = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if scale == 0.0 {
        return Ok(vec![0.0; n]);
    }

    for _sweep in 0..MAX_JACOBI_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| a[p * n + q].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            let mut eigs: Vec<f64> = (0..n).map(|i| a[i * n + i].re).collect();
            eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
            return Ok(eigs);
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                let b = apq.norm();
                if b <= 1e-300 {
                    continue;
                }
                let ph = apq / b;
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                let theta = 0.5 * (2.0 * b).atan2(app - aqq);
                let (s, c) = theta.sin_cos();
                let ph_conj = ph.conj();
                // Columns: A <- A U with U = diag(1, conj(ph)) . G(theta).
                for r in 0..n {
                    let arp = a[r * n + p];
                    let arq = a[r * n + q];
                    a[r * n + p] = c * arp + s * ph_conj * arq;
                    a[r * n + q] = -s * arp + c * ph_conj * arq;
                }
                // Rows: A <- U^dag A.
                for r in 0..n {
                    let apr = a[p * n + r];
                    let aqr = a[q * n + r];
                    a[p * n + r] = c * apr + s * ph * aqr;
                    a[q * n + r] = -s * apr + c * ph * aqr;
                }
                a[p * n + q] = C64::new(0.0, 0.0);
                a[q * n + p] = C64::new(0.0, 0.0);
                a[p * n + p] = C64::new(a[p * n + p].re, 0.0);
                a[q * n + q] = C64::new(a[q * n + q].re, 0.0);
            }
        }
    }
    Err(Error::EigenFailure(format!(
        "Jacobi did not converge within {MAX_JACOBI_SWEEPS} sweeps (n = {n})"
    )))
}
