//! Dense complex Hermitian eigensolver.
//!
//! Householder reduction to a complex tridiagonal matrix, a diagonal phase
//! transform to a real symmetric tridiagonal, then implicit QL with Wilkinson
//! shifts. Eigenvalues come back ascending; eigenvectors are the columns of
//! `vectors`.

use super::matrix::{ComplexMatrix, C64, ONE, ZERO};
use super::tolerances::Tolerances;
use crate::error::{Error, Result};

const MAX_QL_SWEEPS: usize = 60;

#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector of `values[k]`.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k)
    }

    /// `V f(Lambda) V^dagger` for a complex function of the eigenvalues.
    pub fn map(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let n = self.dim();
        let fl: Vec<C64> = self.values.iter().map(|&x| f(x)).collect();
        let v = &self.vectors;
        let mut out = ComplexMatrix::zeros(n, n);
        // rows of V scaled by f(lambda) then times V^dagger
        for i in 0..n {
            let vi = v.row(i);
            let scaled: Vec<C64> = vi.iter().zip(&fl).map(|(&a, &b)| a * b).collect();
            let out_row = out.row_mut(i);
            for j in 0..n {
                let vj = v.row(j);
                out_row[j] = scaled.iter().zip(vj).map(|(&a, &b)| a * b.conj()).sum();
            }
        }
        out
    }

    /// `exp(-i H t)`
    pub fn propagator(&self, t: f64) -> ComplexMatrix {
        self.map(|x| C64::from_polar(1.0, -x * t))
    }

    /// `exp(-i H t) psi` without building the propagator.
    pub fn evolve(&self, psi: &[C64], t: f64) -> Vec<C64> {
        let n = self.dim();
        assert_eq!(psi.len(), n);
        let v = &self.vectors;
        let mut coeff = vec![ZERO; n];
        for i in 0..n {
            let p = psi[i];
            if p == ZERO {
                continue;
            }
            for (c, &vik) in coeff.iter_mut().zip(v.row(i)) {
                *c += vik.conj() * p;
            }
        }
        for (k, c) in coeff.iter_mut().enumerate() {
            *c *= C64::from_polar(1.0, -self.values[k] * t);
        }
        (0..n).map(|i| v.row(i).iter().zip(&coeff).map(|(&a, &b)| a * b).sum()).collect()
    }

    /// Relative residual `max|H V - V Lambda| / max|H|`.
    pub fn residual(&self, h: &ComplexMatrix) -> f64 {
        let hv = h.matmul(&self.vectors);
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for k in 0..n {
                let d = hv[(i, k)] - self.vectors[(i, k)] * self.values[k];
                worst = worst.max(d.norm());
            }
        }
        worst / h.max_abs().max(f64::MIN_POSITIVE)
    }
}

struct Reflector {
    /// Acts on indices `offset..n`.
    offset: usize,
    u: Vec<C64>,
    h: f64,
}

/// Reduces `a` (full Hermitian storage, overwritten) to tridiagonal form.
/// Returns `(diagonal, subdiagonal, reflectors)` with `A = Q T Q^dagger`,
/// `Q = P_0 P_1 ...`.
fn tridiagonalize(a: &mut [C64], n: usize, keep: bool) -> (Vec<f64>, Vec<C64>, Vec<Reflector>) {
    let mut sub = vec![ZERO; n.saturating_sub(1)];
    let mut refl = Vec::new();
    let mut p = vec![ZERO; n];
    for k in 0..n.saturating_sub(1) {
        let off = k + 1;
        let m = n - off;
        let x0 = a[off * n + k];
        let tail: f64 = (off + 1..n).map(|i| a[i * n + k].norm_sqr()).sum();
        if tail == 0.0 {
            sub[k] = x0;
            continue;
        }
        let x0_abs = x0.norm();
        let sigma = (tail + x0_abs * x0_abs).sqrt();
        let phase = if x0_abs > 0.0 { x0 / x0_abs } else { ONE };
        let mut u: Vec<C64> = (off..n).map(|i| a[i * n + k]).collect();
        u[0] += phase * sigma;
        let h = sigma * (sigma + x0_abs);
        sub[k] = -phase * sigma;

        // p = A22 u / h
        for i in 0..m {
            let row = &a[(off + i) * n + off..(off + i) * n + n];
            p[i] = row.iter().zip(&u).map(|(&aij, &uj)| aij * uj).sum::<C64>() / h;
        }
        let kk: f64 = u.iter().zip(&p[..m]).map(|(ui, &pi)| (ui.conj() * pi).re).sum::<f64>() / (2.0 * h);
        for i in 0..m {
            p[i] -= u[i] * kk;
        }
        // A22 -= u q^dagger + q u^dagger
        for i in 0..m {
            let ui = u[i];
            let qi = p[i];
            let row = &mut a[(off + i) * n + off..(off + i) * n + n];
            for (j, aij) in row.iter_mut().enumerate() {
                *aij -= ui * p[j].conj() + qi * u[j].conj();
            }
        }
        if keep {
            refl.push(Reflector { offset: off, u, h });
        }
    }
    let diag = (0..n).map(|i| a[i * n + i].re).collect();
    (diag, sub, refl)
}

/// Implicit QL on a real symmetric tridiagonal. `e[i]` couples `i` and `i+1`
/// and `e.len() == d.len()`. If `zt` is given its rows are rotated alongside,
/// so on exit row `k` holds the eigenvector of `d[k]`.
fn tql(d: &mut [f64], e: &mut [f64], mut zt: Option<&mut [f64]>) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    // deflation is also accepted relative to the matrix norm, otherwise a
    // cluster of near-zero eigenvalues never splits off
    let anorm = d.iter().zip(e.iter()).map(|(a, b)| a.abs() + b.abs()).fold(0.0, f64::max);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd || e[m].abs() <= f64::EPSILON * anorm {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_QL_SWEEPS {
                return Err(Error::NoConvergence { index: l, iterations: iter });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0f64, 1.0f64, 0.0f64);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = zt.as_deref_mut() {
                    let (lo, hi) = z.split_at_mut((i + 1) * n);
                    let zi = &mut lo[i * n..];
                    let zi1 = &mut hi[..n];
                    for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                        let f = *b;
                        *b = s * *a + c * f;
                        *a = c * *a - s * f;
                    }
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

fn ascending_order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    idx
}

/// Full eigendecomposition with the default tolerances.
pub fn hermitian_eig(m: &ComplexMatrix) -> Result<HermitianEigen> {
    hermitian_eig_with(m, &Tolerances::DEFAULT)
}

pub fn hermitian_eig_with(m: &ComplexMatrix, tol: &Tolerances) -> Result<HermitianEigen> {
    m.check_hermitian(tol.hermitian)?;
    let n = m.rows();
    let mut a = m.as_slice().to_vec();
    let (mut d, sub, refl) = tridiagonalize(&mut a, n, true);

    // phases that make the subdiagonal real and non-negative
    let mut phase = vec![ONE; n];
    let mut e = vec![0.0; n];
    for k in 0..n.saturating_sub(1) {
        let r = sub[k].norm();
        e[k] = r;
        phase[k + 1] = if r > 0.0 { phase[k] * sub[k] / r } else { phase[k] };
    }

    let mut zt = vec![0.0; n * n];
    for i in 0..n {
        zt[i * n + i] = 1.0;
    }
    tql(&mut d, &mut e, Some(&mut zt))?;

    let order = ascending_order(&d);
    let values: Vec<f64> = order.iter().map(|&k| d[k]).collect();
    let mut w = ComplexMatrix::zeros(n, n);
    for r in 0..n {
        let row = w.row_mut(r);
        for (col, &k) in order.iter().enumerate() {
            row[col] = phase[r] * zt[k * n + r];
        }
    }
    for rf in refl.iter().rev() {
        let off = rf.offset;
        let mut s = vec![ZERO; n];
        for (i, &ui) in rf.u.iter().enumerate() {
            let uc = ui.conj();
            for (sj, &wij) in s.iter_mut().zip(w.row(off + i)) {
                *sj += uc * wij;
            }
        }
        s.iter_mut().for_each(|z| *z /= rf.h);
        for (i, &ui) in rf.u.iter().enumerate() {
            for (wij, &sj) in w.row_mut(off + i).iter_mut().zip(&s) {
                *wij -= ui * sj;
            }
        }
    }
    Ok(HermitianEigen { values, vectors: w })
}

/// Ascending eigenvalues only.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    hermitian_eigenvalues_with(m, &Tolerances::DEFAULT)
}

pub fn hermitian_eigenvalues_with(m: &ComplexMatrix, tol: &Tolerances) -> Result<Vec<f64>> {
    m.check_hermitian(tol.hermitian)?;
    let n = m.rows();
    let mut a = m.as_slice().to_vec();
    let (mut d, sub, _) = tridiagonalize(&mut a, n, false);
    let mut e: Vec<f64> = sub.iter().map(|z| z.norm()).collect();
    e.push(0.0);
    tql(&mut d, &mut e, None)?;
    d.sort_by(|a, b| a.total_cmp(b));
    Ok(d)
}
