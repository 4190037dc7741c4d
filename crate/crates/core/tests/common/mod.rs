//! Dense brute-force oracles, independent of the library's assembly and
//! solve paths: full 81-component tensor contraction, dense LU, and a
//! Jacobi eigensolver for the generalized symmetric problem.

use visco_contact::fem::DofMap;
use visco_contact::geometry::Mesh;
use visco_contact::material::MaterialParams;
use visco_contact::sparse::SparseSym;

/// All 81 contravariant components `A[i][j][k][l] = lam d_ij d_kl +
/// mu (d_ik d_jl + d_il d_jk)`.
pub fn full_tensor(lam: f64, mu: f64) -> [[[[f64; 3]; 3]; 3]; 3] {
    let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    let mut t = [[[[0.0; 3]; 3]; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    t[i][j][k][l] = lam * d(i, j) * d(k, l) + mu * (d(i, k) * d(j, l) + d(i, l) * d(j, k));
                }
            }
        }
    }
    t
}

/// Basis-function gradients of a P1 tet, recomputed by solving the 4x4
/// interpolation system `phi_a(x_b) = delta_ab` with dense elimination
/// (a route independent of the library's cofactor formulas).
pub fn tet_gradients(verts: &[[f64; 3]; 4]) -> [[f64; 3]; 4] {
    // phi_a(x) = c_a0 + c_a1 x + c_a2 y + c_a3 z; rows of V c = I
    let mut m = [[0.0f64; 8]; 4]; // [V | I] augmented
    for r in 0..4 {
        m[r][0] = 1.0;
        m[r][1] = verts[r][0];
        m[r][2] = verts[r][1];
        m[r][3] = verts[r][2];
        m[r][4 + r] = 1.0;
    }
    // Gauss-Jordan with partial pivoting
    for col in 0..4 {
        let piv = (col..4)
            .max_by(|&a, &b| m[a][col].abs().partial_cmp(&m[b][col].abs()).unwrap())
            .unwrap();
        m.swap(col, piv);
        let p = m[col][col];
        for c in 0..8 {
            m[col][c] /= p;
        }
        for r in 0..4 {
            if r != col {
                let f = m[r][col];
                for c in 0..8 {
                    m[r][c] -= f * m[col][c];
                }
            }
        }
    }
    // inverse columns hold the coefficients of each phi_a
    let mut grads = [[0.0; 3]; 4];
    for a in 0..4 {
        for c in 0..3 {
            grads[a][c] = m[1 + c][4 + a];
        }
    }
    grads
}

pub fn tet_volume(verts: &[[f64; 3]; 4]) -> f64 {
    let e = |k: usize, a: usize| verts[k + 1][a] - verts[0][a];
    let det = e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1))
        - e(0, 1) * (e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0))
        + e(0, 2) * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0));
    det / 6.0
}

/// Dense 12x12 element stiffness by brute-force contraction of the full
/// tensor with full 3x3 strain matrices.
pub fn dense_element_stiffness(lam: f64, mu: f64, verts: &[[f64; 3]; 4]) -> [[f64; 12]; 12] {
    let tensor = full_tensor(lam, mu);
    let grads = tet_gradients(verts);
    let vol = tet_volume(verts);
    let strain = |node: usize, comp: usize| -> [[f64; 3]; 3] {
        let mut e = [[0.0; 3]; 3];
        for j in 0..3 {
            e[comp][j] += 0.5 * grads[node][j];
            e[j][comp] += 0.5 * grads[node][j];
        }
        e
    };
    let mut out = [[0.0; 12]; 12];
    for a in 0..4 {
        for i in 0..3 {
            let ea = strain(a, i);
            for b in 0..4 {
                for j in 0..3 {
                    let eb = strain(b, j);
                    let mut acc = 0.0;
                    for p in 0..3 {
                        for q in 0..3 {
                            for r in 0..3 {
                                for s in 0..3 {
                                    acc += tensor[p][q][r][s] * eb[r][s] * ea[p][q];
                                }
                            }
                        }
                    }
                    out[3 * a + i][3 * b + j] = vol * acc;
                }
            }
        }
    }
    out
}

/// Dense matrix image of a sparse symmetric matrix.
pub fn to_dense(a: &SparseSym<f64>) -> Vec<Vec<f64>> {
    let n = a.dim();
    let mut out = vec![vec![0.0; n]; n];
    for r in 0..n {
        let (cols, vals) = a.row(r);
        for (c, v) in cols.iter().zip(vals) {
            out[r][*c] = *v;
        }
    }
    out
}

/// Dense LU solve with partial pivoting.
pub fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.iter().map(|row| row.clone()).collect();
    let mut x = b.to_vec();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())
            .unwrap();
        m.swap(col, piv);
        x.swap(col, piv);
        let p = m[col][col];
        for r in (col + 1)..n {
            let f = m[r][col] / p;
            if f == 0.0 {
                continue;
            }
            for c in col..n {
                m[r][c] -= f * m[col][c];
            }
            x[r] -= f * x[col];
        }
    }
    for col in (0..n).rev() {
        x[col] /= m[col][col];
        for r in 0..col {
            x[r] -= m[r][col] * x[col];
        }
    }
    x
}

/// Dense Cholesky factor (lower), for symmetric positive definite input.
pub fn dense_cholesky(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for j in 0..n {
        let mut d = a[j][j];
        for k in 0..j {
            d -= l[j][k] * l[j][k];
        }
        assert!(d > 0.0, "not positive definite at {j}");
        l[j][j] = d.sqrt();
        for i in (j + 1)..n {
            let mut s = a[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            l[i][j] = s / l[j][j];
        }
    }
    l
}

/// Full spectrum of the generalized symmetric pencil `A x = s B x` via
/// `B = L L^T` reduction and cyclic Jacobi on `L^-1 A L^-T`.
pub fn dense_generalized_eigenvalues(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let l = dense_cholesky(b);
    // S = L^-1 A L^-T: solve L Y = A, then L Z = Y^T
    let solve_lower = |m: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
        let mut y = m.clone();
        for col in 0..n {
            for r in 0..n {
                let mut s = y[r][col];
                for k in 0..r {
                    s -= l[r][k] * y[k][col];
                }
                y[r][col] = s / l[r][r];
            }
        }
        y
    };
    let y = solve_lower(&a.to_vec());
    let yt: Vec<Vec<f64>> = (0..n).map(|r| (0..n).map(|c| y[c][r]).collect()).collect();
    let mut s = solve_lower(&yt);
    // cyclic Jacobi
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += s[p][q] * s[p][q];
            }
        }
        if off < 1e-24 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if s[p][q].abs() < 1e-30 {
                    continue;
                }
                let theta = (s[q][q] - s[p][p]) / (2.0 * s[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let (skp, skq) = (s[k][p], s[k][q]);
                    s[k][p] = c * skp - sn * skq;
                    s[k][q] = sn * skp + c * skq;
                }
                for k in 0..n {
                    let (spk, sqk) = (s[p][k], s[q][k]);
                    s[p][k] = c * spk - sn * sqk;
                    s[q][k] = sn * spk + c * sqk;
                }
            }
        }
    }
    let mut eigs: Vec<f64> = (0..n).map(|i| s[i][i]).collect();
    eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    eigs
}

/// Dense full-system Newmark step with its own Newton loop: assembles the
/// dense Jacobian, evaluates the penalty by direct per-vertex arithmetic,
/// and solves with dense LU. Mirrors only the mathematical definition.
#[allow(clippy::too_many_arguments)]
pub fn dense_newmark_step(
    mesh: &Mesh<f64>,
    dofs: &DofMap,
    m: &[Vec<f64>],
    c: &[Vec<f64>],
    k: &[Vec<f64>],
    contact: &[(usize, f64)],
    q: [f64; 3],
    kappa: f64,
    dt: f64,
    u_n: &[f64],
    v_n: &[f64],
    a_n: &[f64],
    f_next: &[f64],
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = u_n.len();
    let matvec = |mat: &[Vec<f64>], x: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|r| (0..n).map(|cc| mat[r][cc] * x[cc]).sum())
            .collect()
    };
    let gap_of = |x: &[f64], vtx: usize| -> f64 {
        let pos = mesh.vertices[vtx];
        let mut g = 0.0;
        for comp in 0..3 {
            let disp = dofs.dof(vtx, comp).map(|d| x[d]).unwrap_or(0.0);
            g += (pos[comp] + disp) * q[comp];
        }
        g
    };
    let mut x = u_n.to_vec();
    for _ in 0..100 {
        let a_next: Vec<f64> = (0..n)
            .map(|i| 4.0 / (dt * dt) * (x[i] - u_n[i] - dt * v_n[i]) - a_n[i])
            .collect();
        let v_next: Vec<f64> = (0..n)
            .map(|i| v_n[i] + dt / 2.0 * (a_n[i] + a_next[i]))
            .collect();
        let ma = matvec(m, &a_next);
        let cv = matvec(c, &v_next);
        let kx = matvec(k, &x);
        let mut r: Vec<f64> = (0..n)
            .map(|i| ma[i] + cv[i] + kx[i] - f_next[i])
            .collect();
        let mut jac: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| 4.0 / (dt * dt) * m[i][j] + 2.0 / dt * c[i][j] + k[i][j])
                    .collect()
            })
            .collect();
        for &(vtx, w) in contact {
            let g = gap_of(&x, vtx);
            if g < 0.0 {
                for comp in 0..3 {
                    if let Some(d) = dofs.dof(vtx, comp) {
                        r[d] -= w / kappa * (-g) * q[comp];
                        for comp2 in 0..3 {
                            if let Some(d2) = dofs.dof(vtx, comp2) {
                                jac[d][d2] += w / kappa * q[comp] * q[comp2];
                            }
                        }
                    }
                }
            }
        }
        let rn: f64 = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if rn <= 1e-12 * (1.0 + f_next.iter().map(|v| v * v).sum::<f64>().sqrt()) {
            return (x, v_next, a_next);
        }
        let delta = dense_solve(&jac, &r);
        for i in 0..n {
            x[i] -= delta[i];
        }
    }
    let a_next: Vec<f64> = (0..n)
        .map(|i| 4.0 / (dt * dt) * (x[i] - u_n[i] - dt * v_n[i]) - a_n[i])
        .collect();
    let v_next: Vec<f64> = (0..n)
        .map(|i| v_n[i] + dt / 2.0 * (a_n[i] + a_next[i]))
        .collect();
    (x, v_next, a_next)
}

/// least-squares slope of y against x
pub fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    sxy / sxx
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}
