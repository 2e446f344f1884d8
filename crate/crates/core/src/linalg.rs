//! Small dense complex linear algebra used by the state layer: Hermitian
//! eigendecomposition (cyclic Jacobi) and PSD matrix square roots. Dimensions
//! never exceed a few hundred, so plain dense kernels are sufficient.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi sweeps with
/// complex Givens rotations. Returns (eigenvalues ascending, eigenvectors as
/// columns in matching order).
pub fn hermitian_eigen(a: &Array2<C64>) -> (Array1<f64>, Array2<C64>) {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "hermitian_eigen: square matrix required");
    let mut m = a.clone();
    let mut v: Array2<C64> = Array2::eye(n);
    if n <= 1 {
        let vals = Array1::from(vec![m.get((0, 0)).map(|z| z.re).unwrap_or(0.0); n.min(1)]);
        return (vals, v);
    }

    let scale: f64 = m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(1e-300);
    let tol = 1e-30 * scale * scale;
    for _sweep in 0..100 {
        let mut off: f64 = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[(p, q)].norm_sqr();
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq.norm_sqr() <= tol / (n * n) as f64 {
                    continue;
                }
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let mag = apq.norm();
                let phase = apq / mag; // e^{i arg(apq)}
                // Zeroing A'[p][q] solves t^2 - 2 tau t - 1 = 0; take the
                // small-magnitude root for stability.
                let tau = (aqq - app) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    -1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // Unitary J: J[pp]=c, J[pq]=-s*conj(phase)... applied as M <- J^H M J
                // with J[pp]=c, J[qp]=s*phase^*, J[pq]=-s*phase, J[qq]=c.
                let jpq = -s * phase;
                let jqp = s * phase.conj();
                // Column update M <- M J
                for r in 0..n {
                    let mrp = m[(r, p)];
                    let mrq = m[(r, q)];
                    m[(r, p)] = mrp * c + mrq * jqp;
                    m[(r, q)] = mrp * jpq + mrq * c;
                }
                // Row update M <- J^H M
                for r in 0..n {
                    let mpr = m[(p, r)];
                    let mqr = m[(q, r)];
                    m[(p, r)] = mpr * c + mqr * jqp.conj();
                    m[(q, r)] = mpr * jpq.conj() + mqr * c;
                }
                // Accumulate eigenvectors V <- V J
                for r in 0..n {
                    let vrp = v[(r, p)];
                    let vrq = v[(r, q)];
                    v[(r, p)] = vrp * c + vrq * jqp;
                    v[(r, q)] = vrp * jpq + vrq * c;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let vals: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
    order.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]));
    let sorted_vals = Array1::from(order.iter().map(|&i| vals[i]).collect::<Vec<_>>());
    let mut sorted_vecs = Array2::zeros((n, n));
    for (new, &old) in order.iter().enumerate() {
        for r in 0..n {
            sorted_vecs[(r, new)] = v[(r, old)];
        }
    }
    (sorted_vals, sorted_vecs)
}

/// Square root of a Hermitian PSD matrix; eigenvalues below zero (numerical
/// noise) are clamped to zero.
pub fn sqrtm_psd(a: &Array2<C64>) -> Array2<C64> {
    let (vals, vecs) = hermitian_eigen(a);
    let n = a.nrows();
    let mut out = Array2::zeros((n, n));
    for k in 0..n {
        let lam = vals[k].max(0.0).sqrt();
        if lam == 0.0 {
            continue;
        }
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] += vecs[(i, k)] * lam * vecs[(j, k)].conj();
            }
        }
    }
    out
}

/// 2x2 complex matrix as a fixed array, row major.
pub type Mat2 = [[C64; 2]; 2];

pub fn mat2_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[C64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

#[cfg_attr(not(test), allow(dead_code))]
pub fn mat2_apply(a: &Mat2, v: &[C64; 2]) -> [C64; 2] {
    [a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]]
}

/// exp(-i (x σx + y σy + z σz) τ) in closed form.
pub fn su2_exp(x: f64, y: f64, z: f64, tau: f64) -> Mat2 {
    let omega = (x * x + y * y + z * z).sqrt();
    let half = omega * tau;
    let (c, sinc) = if omega < 1e-300 {
        (1.0, tau)
    } else {
        (half.cos(), half.sin() / omega)
    };
    let i = C64::new(0.0, 1.0);
    [
        [C64::new(c, 0.0) - i * z * sinc, (-i * x - y) * sinc],
        [(-i * x + y) * sinc, C64::new(c, 0.0) + i * z * sinc],
    ]
}

/// Unitarity defect max|U^H U - I|.
#[cfg_attr(not(test), allow(dead_code))]
pub fn mat2_unitarity_defect(u: &Mat2) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..2 {
                acc += u[k][i].conj() * u[k][j];
            }
            let target = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            worst = worst.max((acc - target).norm());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn jacobi_recovers_known_spectrum() {
        // Pauli-y has eigenvalues ±1.
        let a = array![[c(0.0, 0.0), c(0.0, -1.0)], [c(0.0, 1.0), c(0.0, 0.0)]];
        let (vals, vecs) = hermitian_eigen(&a);
        assert!((vals[0] + 1.0).abs() < 1e-12);
        assert!((vals[1] - 1.0).abs() < 1e-12);
        // Reconstruct.
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = c(0.0, 0.0);
                for k in 0..2 {
                    acc += vecs[(i, k)] * vals[k] * vecs[(j, k)].conj();
                }
                assert!((acc - a[(i, j)]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn jacobi_reconstructs_random_hermitian() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for n in [3usize, 5, 8, 16] {
            let mut a: Array2<C64> = Array2::zeros((n, n));
            for i in 0..n {
                a[(i, i)] = c(rng.random::<f64>() - 0.5, 0.0);
                for j in (i + 1)..n {
                    let z = c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
                    a[(i, j)] = z;
                    a[(j, i)] = z.conj();
                }
            }
            let (vals, vecs) = hermitian_eigen(&a);
            for i in 0..n {
                for j in 0..n {
                    let mut acc = c(0.0, 0.0);
                    for k in 0..n {
                        acc += vecs[(i, k)] * vals[k] * vecs[(j, k)].conj();
                    }
                    assert!(
                        (acc - a[(i, j)]).norm() < 1e-10,
                        "reconstruction defect at ({i},{j})"
                    );
                }
            }
            // Eigenvalues ascending.
            for k in 1..n {
                assert!(vals[k] >= vals[k - 1]);
            }
        }
    }

    #[test]
    fn sqrtm_squares_back() {
        let a = array![[c(2.0, 0.0), c(0.5, 0.5)], [c(0.5, -0.5), c(1.0, 0.0)]];
        let r = sqrtm_psd(&a);
        let sq = r.dot(&r);
        for i in 0..2 {
            for j in 0..2 {
                assert!((sq[(i, j)] - a[(i, j)]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn su2_exp_is_unitary_and_matches_axis_rotations() {
        // Pure x rotation by pi flips populations.
        let u = su2_exp(std::f64::consts::PI / 2.0, 0.0, 0.0, 1.0);
        assert!(mat2_unitarity_defect(&u) < 1e-14);
        let flipped = mat2_apply(&u, &[c(1.0, 0.0), c(0.0, 0.0)]);
        assert!(flipped[0].norm() < 1e-14);
        assert!((flipped[1].norm() - 1.0).abs() < 1e-14);
        // Zero generator is the identity.
        let id = su2_exp(0.0, 0.0, 0.0, 2.5);
        assert!((id[0][0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!(id[0][1].norm() < 1e-15);
    }
}
