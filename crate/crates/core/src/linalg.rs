//! Dense helpers shared by the solvers: rank-revealing pseudo-inversion and
//! unit-balanced rank estimates for mixed-unit 6×6 matrices.

use nalgebra::{DMatrix, Matrix3, Matrix6, Vector6};

/// Relative singular-value cutoff used when pseudo-inverting the block system.
pub const BLOCK_RANK_TOL: f64 = 1e-10;

/// Relative cutoff for the rank of a unit-balanced 6×6 stiffness matrix.
pub const STIFFNESS_RANK_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct PseudoInverse {
    pub inverse: DMatrix<f64>,
    pub rank: usize,
}

/// Moore–Penrose inverse by SVD, dropping singular values below
/// `rel_tol · σ_max`.
pub fn pseudo_inverse(m: &DMatrix<f64>, rel_tol: f64) -> PseudoInverse {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return PseudoInverse {
            inverse: DMatrix::zeros(c, r),
            rank: 0,
        };
    }
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let cut = rel_tol * smax;
    let u = svd.u.as_ref().unwrap();
    let v_t = svd.v_t.as_ref().unwrap();
    let mut inverse = DMatrix::zeros(c, r);
    let mut rank = 0;
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > cut && s > 0.0 {
            rank += 1;
            inverse += v_t.row(k).transpose() * u.column(k).transpose() / s;
        }
    }
    PseudoInverse { inverse, rank }
}

/// Pseudo-inverse of a symmetric (possibly indefinite) matrix through its
/// eigendecomposition, dropping eigenvalues with `|λ| ≤ rel_tol · max|λ|`.
/// The result is exactly symmetric.
pub fn symmetric_pseudo_inverse(m: &DMatrix<f64>, rel_tol: f64) -> PseudoInverse {
    let n = m.nrows();
    if n == 0 {
        return PseudoInverse {
            inverse: DMatrix::zeros(0, 0),
            rank: 0,
        };
    }
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let cut = rel_tol * eig.eigenvalues.amax();
    let mut inverse = DMatrix::zeros(n, n);
    let mut rank = 0;
    for (k, &l) in eig.eigenvalues.iter().enumerate() {
        if l.abs() > cut && l != 0.0 {
            rank += 1;
            let v = eig.eigenvectors.column(k);
            inverse += v * v.transpose() / l;
        }
    }
    let inverse = (&inverse + inverse.transpose()) * 0.5;
    PseudoInverse { inverse, rank }
}

pub fn numerical_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().singular_values();
    let smax = sv.max();
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * smax).count()
}

/// Length that balances the translational and rotational blocks of a
/// stiffness matrix: `ℓ² = tr(K_rr) / tr(K_tt)`.
pub fn balancing_length(k: &Matrix6<f64>) -> f64 {
    let tt = k.fixed_view::<3, 3>(0, 0).trace().abs();
    let rr = k.fixed_view::<3, 3>(3, 3).trace().abs();
    if tt > 0.0 && rr > 0.0 {
        (rr / tt).sqrt()
    } else {
        1.0
    }
}

/// `W K W` with `W = diag(1,1,1,1/ℓ,1/ℓ,1/ℓ)`, making all entries N/mm.
pub fn balanced(k: &Matrix6<f64>) -> Matrix6<f64> {
    let l = balancing_length(k);
    let w = Vector6::new(1.0, 1.0, 1.0, 1.0 / l, 1.0 / l, 1.0 / l);
    Matrix6::from_fn(|i, j| k[(i, j)] * w[i] * w[j])
}

/// Rank of a mixed-unit stiffness matrix after unit balancing.
pub fn stiffness_rank(k: &Matrix6<f64>) -> usize {
    let b = balanced(k);
    let sv = b.singular_values();
    let smax = sv.max();
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > STIFFNESS_RANK_TOL * smax).count()
}

/// Null-space basis of a stiffness matrix in original units, one unit-norm
/// 6-vector per dropped balanced singular value.
pub fn stiffness_null_space(k: &Matrix6<f64>) -> Vec<[f64; 6]> {
    let l = balancing_length(k);
    let b = balanced(k);
    let svd = b.svd(false, true);
    let smax = svd.singular_values.max();
    let v_t = svd.v_t.unwrap();
    let mut out = Vec::new();
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s <= STIFFNESS_RANK_TOL * smax {
            // balanced coordinates map back through W
            let mut v = v_t.row(i).transpose();
            for r in 3..6 {
                v[r] /= l;
            }
            let v = v.normalize();
            out.push([v[0], v[1], v[2], v[3], v[4], v[5]]);
        }
    }
    out
}

pub fn symmetric_part6(k: &Matrix6<f64>) -> Matrix6<f64> {
    (k + k.transpose()) * 0.5
}

pub fn min_eigenvalue3(m: &Matrix3<f64>) -> f64 {
    let s = (m + m.transpose()) * 0.5;
    s.symmetric_eigenvalues().min()
}

pub fn max_eigenvalue3(m: &Matrix3<f64>) -> f64 {
    let s = (m + m.transpose()) * 0.5;
    s.symmetric_eigenvalues().max()
}

pub fn to_matrix6(m: &DMatrix<f64>) -> Matrix6<f64> {
    assert_eq!(m.shape(), (6, 6));
    Matrix6::from_fn(|i, j| m[(i, j)])
}

pub fn to_dmatrix(m: &Matrix6<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(6, 6, |i, j| m[(i, j)])
}

pub fn rows6(m: &Matrix6<f64>) -> [[f64; 6]; 6] {
    let mut out = [[0.0; 6]; 6];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = m[(i, j)];
        }
    }
    out
}

pub fn from_rows6(rows: &[[f64; 6]; 6]) -> Matrix6<f64> {
    Matrix6::from_fn(|i, j| rows[i][j])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_pseudo_inverse_of_saddle_point() {
        // [[2, 1], [1, 0]] is indefinite and invertible
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 0.0]);
        let p = symmetric_pseudo_inverse(&m, 1e-12);
        assert_eq!(p.rank, 2);
        let expected = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, -2.0]);
        assert!((p.inverse - expected).amax() < 1e-14);
        // rank one: pinv(v vᵀ) = v vᵀ / |v|⁴
        let v = nalgebra::DVector::from_row_slice(&[1.0, 2.0, 2.0]);
        let p = symmetric_pseudo_inverse(&(&v * v.transpose()), 1e-12);
        assert_eq!(p.rank, 1);
        assert!((p.inverse - &v * v.transpose() / 81.0).amax() < 1e-15);
    }

    #[test]
    fn pinv_of_rank_deficient() {
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0, 1.0, 0.0, 1.0]);
        let p = pseudo_inverse(&m, 1e-12);
        assert_eq!(p.rank, 2);
        // Penrose condition A A⁺ A = A
        let back = &m * &p.inverse * &m;
        assert!((back - &m).amax() < 1e-12);
    }

    #[test]
    fn balanced_rank_and_null_space() {
        let k = Matrix6::from_diagonal(&Vector6::new(0.0, 2e4, 3e4, 1e8, 2e8, 3e8));
        assert_eq!(stiffness_rank(&k), 5);
        let ns = stiffness_null_space(&k);
        assert_eq!(ns.len(), 1);
        assert!((ns[0][0].abs() - 1.0).abs() < 1e-12);
        let full = Matrix6::from_diagonal(&Vector6::new(1e3, 2e4, 3e4, 1e8, 2e8, 3e8));
        assert_eq!(stiffness_rank(&full), 6);
        assert!(stiffness_null_space(&full).is_empty());
    }
}
