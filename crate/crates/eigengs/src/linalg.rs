//! Dense symmetric eigendecomposition via cyclic Jacobi rotations.
//!
//! Deterministic: sweeps visit (p, q) pairs in row order and the rotation
//! sequence depends only on the input matrix, so repeated runs on identical
//! data produce identical bits. Adequate for the Gram matrices this crate
//! builds (a few hundred rows); quadratic convergence lands well under the
//! sweep cap.

/// Eigenpairs of a symmetric matrix, sorted by descending eigenvalue.
/// `vectors` is row-major: row `i` is the unit eigenvector for `values[i]`.
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<f64>,
}

const MAX_SWEEPS: usize = 64;

/// Decomposes the row-major symmetric `n × n` matrix `a`.
pub fn sym_eigen(a: &[f64], n: usize) -> SymEigen {
    assert_eq!(a.len(), n * n, "matrix must be n*n");
    if n == 0 {
        return SymEigen { values: vec![], vectors: vec![] };
    }
    let mut m = a.to_vec();
    // v starts as identity; columns accumulate the eigenvectors.
    let mut v = vec![0.0f64; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    let scale: f64 = m.iter().fold(0.0f64, |acc, &x| acc.max(x.abs())).max(1e-300);
    let stop = scale * 1e-14 * (n as f64);

    for _ in 0..MAX_SWEEPS {
        let off: f64 = {
            let mut s = 0.0;
            for p in 0..n {
                for q in (p + 1)..n {
                    s += m[p * n + q].abs();
                }
            }
            s
        };
        if off <= stop {
            break;
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq.abs() <= scale * 1e-300 {
                    continue;
                }
                let theta = (m[q * n + q] - m[p * n + p]) / (2.0 * apq);
                // tan of the rotation angle, smaller root for stability
                let t = if theta.abs() > 1e150 {
                    1.0 / (2.0 * theta)
                } else {
                    let s = 1.0 / (theta.abs() + (1.0 + theta * theta).sqrt());
                    if theta < 0.0 {
                        -s
                    } else {
                        s
                    }
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);
                let h = t * apq;
                m[p * n + p] -= h;
                m[q * n + q] += h;
                m[p * n + q] = 0.0;
                m[q * n + p] = 0.0;
                for j in 0..n {
                    if j != p && j != q {
                        let ajp = m[j * n + p];
                        let ajq = m[j * n + q];
                        let np = ajp - s * (ajq + tau * ajp);
                        let nq = ajq + s * (ajp - tau * ajq);
                        m[j * n + p] = np;
                        m[p * n + j] = np;
                        m[j * n + q] = nq;
                        m[q * n + j] = nq;
                    }
                }
                for j in 0..n {
                    let vjp = v[j * n + p];
                    let vjq = v[j * n + q];
                    v[j * n + p] = vjp - s * (vjq + tau * vjp);
                    v[j * n + q] = vjq + s * (vjp - tau * vjq);
                }
            }
        }
    }

    // Sort eigenpairs by descending value; ties keep original column order.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        m[j * n + j].partial_cmp(&m[i * n + i]).unwrap_or(std::cmp::Ordering::Equal).then(i.cmp(&j))
    });
    let mut values = Vec::with_capacity(n);
    let mut vectors = vec![0.0f64; n * n];
    for (row, &col) in order.iter().enumerate() {
        values.push(m[col * n + col]);
        for j in 0..n {
            vectors[row * n + j] = v[j * n + col];
        }
    }
    SymEigen { values, vectors }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat_vec(a: &[f64], x: &[f64], n: usize) -> Vec<f64> {
        (0..n).map(|i| (0..n).map(|j| a[i * n + j] * x[j]).sum()).collect()
    }

    #[test]
    fn diagonal_matrix_is_already_solved() {
        let a = [3.0, 0.0, 0.0, 0.0, 7.0, 0.0, 0.0, 0.0, 1.0];
        let eig = sym_eigen(&a, 3);
        assert_eq!(eig.values, vec![7.0, 3.0, 1.0]);
    }

    #[test]
    fn known_2x2() {
        // [[2,1],[1,2]] has eigenvalues 3 and 1.
        let eig = sym_eigen(&[2.0, 1.0, 1.0, 2.0], 2);
        assert!((eig.values[0] - 3.0).abs() < 1e-12);
        assert!((eig.values[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn satisfies_eigen_equation_and_orthonormality() {
        // Deterministic pseudo-random symmetric matrix.
        let n = 8;
        let mut a = vec![0.0f64; n * n];
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        for i in 0..n {
            for j in i..n {
                let x = next();
                a[i * n + j] = x;
                a[j * n + i] = x;
            }
        }
        let eig = sym_eigen(&a, n);
        for i in 0..n {
            let vi: Vec<f64> = eig.vectors[i * n..(i + 1) * n].to_vec();
            let av = mat_vec(&a, &vi, n);
            for j in 0..n {
                assert!(
                    (av[j] - eig.values[i] * vi[j]).abs() < 1e-10,
                    "A v != lambda v at pair {i}, row {j}"
                );
            }
            for k in 0..n {
                let dot: f64 =
                    (0..n).map(|j| eig.vectors[i * n + j] * eig.vectors[k * n + j]).sum();
                let expect = if i == k { 1.0 } else { 0.0 };
                assert!((dot - expect).abs() < 1e-10);
            }
        }
        // Values sorted non-increasing.
        for w in eig.values.windows(2) {
            assert!(w[0] >= w[1]);
        }
    }

    #[test]
    fn deterministic_across_runs() {
        let a = [4.0, 1.0, 0.5, 1.0, 3.0, 0.25, 0.5, 0.25, 2.0];
        let e1 = sym_eigen(&a, 3);
        let e2 = sym_eigen(&a, 3);
        assert_eq!(e1.values, e2.values);
        assert_eq!(e1.vectors, e2.vectors);
    }
}
