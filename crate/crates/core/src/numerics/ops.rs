use super::eig::{hermitian_eig_with, hermitian_eigenvalues_with};
use super::matrix::{ComplexMatrix, C64, ZERO};
use super::tolerances::Tolerances;
use crate::error::{Error, Result};

/// `||M||_1 = sum |lambda_i|` for Hermitian `M`.
pub fn trace_norm(m: &ComplexMatrix) -> Result<f64> {
    trace_norm_with(m, &Tolerances::DEFAULT)
}

pub fn trace_norm_with(m: &ComplexMatrix, tol: &Tolerances) -> Result<f64> {
    Ok(hermitian_eigenvalues_with(m, tol)?.iter().map(|x| x.abs()).sum())
}

/// `exp(-i H t)` via the eigendecomposition of `H`.
pub fn unitary_exp(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    Ok(hermitian_eig_with(h, &Tolerances::DEFAULT)?.propagator(t))
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (br, bc) = (b.rows(), b.cols());
    ComplexMatrix::from_fn(a.rows() * br, a.cols() * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

pub fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().flat_map(|&x| b.iter().map(move |&y| x * y)).collect()
}

/// Partial trace of an operator on `dims[0] (x) dims[1] (x) ...`, keeping the
/// listed subsystems (in their original order).
pub fn partial_trace(m: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    let total: usize = dims.iter().product();
    if !m.is_square() || m.rows() != total {
        return Err(Error::DimensionMismatch(format!("operator is {}x{}, subsystem dims {:?} give {total}", m.rows(), m.cols(), dims)));
    }
    if dims.iter().any(|&d| d == 0) {
        return Err(Error::DimensionMismatch("zero-dimensional subsystem".into()));
    }
    let mut sorted = keep.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != keep.len() || sorted.iter().any(|&k| k >= dims.len()) || sorted != keep {
        return Err(Error::DimensionMismatch(format!("keep list {keep:?} must be strictly increasing indices below {}", dims.len())));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep.contains(k)).collect();
    let kdims: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
    let tdims: Vec<usize> = traced.iter().map(|&k| dims[k]).collect();
    let kd: usize = kdims.iter().product();
    let td: usize = tdims.iter().product();

    // strides of each subsystem in the full index
    let mut stride = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        stride[k] = stride[k + 1] * dims[k + 1];
    }
    let offsets = |sub: &[usize], sdims: &[usize], mut idx: usize| -> usize {
        let mut off = 0;
        for (pos, &k) in sub.iter().enumerate().rev() {
            off += (idx % sdims[pos]) * stride[k];
            idx /= sdims[pos];
        }
        off
    };
    let keep_off: Vec<usize> = (0..kd).map(|i| offsets(keep, &kdims, i)).collect();
    let trace_off: Vec<usize> = (0..td).map(|i| offsets(&traced, &tdims, i)).collect();

    let mut out = ComplexMatrix::zeros(kd, kd);
    for (i, &oi) in keep_off.iter().enumerate() {
        for (j, &oj) in keep_off.iter().enumerate() {
            let mut acc = ZERO;
            for &t in &trace_off {
                acc += m[(oi + t, oj + t)];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

/// Smallest eigenvalue check for a density-like operator. Returns the
/// eigenvalues (ascending).
pub fn check_positive(m: &ComplexMatrix, which: &'static str, tol: &Tolerances) -> Result<Vec<f64>> {
    let vals = hermitian_eigenvalues_with(m, tol)?;
    if let Some(&min) = vals.first() {
        if min < -tol.psd_fail {
            return Err(Error::NotPositive { which, min });
        }
    }
    Ok(vals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::matrix::ONE;

    #[test]
    fn kron_dimensions() {
        let a = ComplexMatrix::identity(2);
        let b = ComplexMatrix::from_fn(3, 3, |i, j| C64::new((i + j) as f64, 0.0));
        let k = kron(&a, &b);
        assert_eq!(k.rows(), 6);
        assert_eq!(k[(4, 5)], b[(1, 2)]);
        assert_eq!(k[(1, 4)], ZERO);
    }

    #[test]
    fn partial_trace_of_product() {
        let a = ComplexMatrix::from_fn(2, 2, |i, j| {
            if i == j {
                C64::new(0.25 + 0.5 * i as f64, 0.0)
            } else {
                C64::new(0.1, 0.2 * (i as f64 - j as f64))
            }
        });
        let b = ComplexMatrix::from_real_diagonal(&[0.2, 0.3, 0.5]);
        let ab = kron(&a, &b);
        let ra = partial_trace(&ab, &[2, 3], &[0]).unwrap();
        let rb = partial_trace(&ab, &[2, 3], &[1]).unwrap();
        assert!(ra.max_abs_diff(&a) < 1e-15);
        assert!(rb.max_abs_diff(&b) < 1e-15);
        let full = partial_trace(&ab, &[2, 3], &[0, 1]).unwrap();
        assert!(full.max_abs_diff(&ab) < 1e-15);
        let none = partial_trace(&ab, &[2, 3], &[]).unwrap();
        assert!((none[(0, 0)] - ab.trace()).norm() < 1e-15);
    }

    #[test]
    fn partial_trace_rejects_bad_dims() {
        let m = ComplexMatrix::identity(6);
        assert!(partial_trace(&m, &[2, 2], &[0]).is_err());
        assert!(partial_trace(&m, &[2, 3], &[1, 0]).is_err());
        assert!(partial_trace(&m, &[2, 3], &[2]).is_err());
    }

    #[test]
    fn trace_norm_of_difference() {
        let m = ComplexMatrix::from_real_diagonal(&[0.5, -0.25, 0.0]);
        assert!((trace_norm(&m).unwrap() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn exp_of_sigma_x() {
        let sx = ComplexMatrix::from_vec(2, 2, vec![ZERO, ONE, ONE, ZERO]).unwrap();
        let u = unitary_exp(&sx, std::f64::consts::FRAC_PI_2).unwrap();
        // exp(-i pi/2 sigma_x) = -i sigma_x
        assert!(u[(0, 0)].norm() < 1e-14);
        assert!((u[(0, 1)] - C64::new(0.0, -1.0)).norm() < 1e-14);
    }
}
