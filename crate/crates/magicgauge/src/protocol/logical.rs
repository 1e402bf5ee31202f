//! Logical Pauli frames, reduced logical density matrices and a small GF(2)
//! solver used for Pauli-frame corrections.

use crate::engine::{c, cr, gates, LinearOp, MixedRadixState, OpSum, C64};
use crate::error::Result;

pub type Matrix = Vec<Vec<C64>>;

/// Logical `X` and `Z` operators of a set of encoded qubits.
#[derive(Debug, Clone)]
pub struct LogicalFrame {
    pub xs: Vec<OpSum>,
    pub zs: Vec<OpSum>,
}

impl LogicalFrame {
    pub fn single(x: OpSum, z: OpSum) -> Self {
        Self { xs: vec![x], zs: vec![z] }
    }

    pub fn num_qubits(&self) -> usize {
        self.xs.len()
    }

    pub fn y(&self, k: usize) -> OpSum {
        self.xs[k].then(&self.zs[k]).scale(c(0.0, 1.0))
    }

    fn pauli(&self, k: usize, p: usize) -> OpSum {
        match p {
            0 => OpSum::identity(),
            1 => self.xs[k].clone(),
            2 => self.y(k),
            _ => self.zs[k].clone(),
        }
    }

    /// `rho = 2^-k sum_P <P> P`, qubit 0 most significant, `|0>` the `Z = +1`
    /// eigenstate.
    pub fn density(&self, state: &MixedRadixState) -> Result<Matrix> {
        let k = self.num_qubits();
        let d = 1 << k;
        let mut rho = vec![vec![C64::default(); d]; d];
        for code in 0..4usize.pow(k as u32) {
            let ps: Vec<usize> = (0..k).map(|q| (code / 4usize.pow((k - 1 - q) as u32)) % 4).collect();
            let mut op = OpSum::identity();
            for (q, &p) in ps.iter().enumerate() {
                op = op.then(&self.pauli(q, p));
            }
            let ev = if code == 0 { cr(1.0) } else { state.expectation(&op)? };
            let m = kron_all(&ps.iter().map(|&p| pauli_matrix(p)).collect::<Vec<_>>());
            for i in 0..d {
                for j in 0..d {
                    rho[i][j] += ev * m[i][j] / d as f64;
                }
            }
        }
        Ok(rho)
    }
}

/// Single-qubit logical operator with matrix `u` on qubit `k` of `frame`,
/// expanded as `sum_P tr(P u) / 2 P`.
pub fn logical_unitary(frame: &LogicalFrame, k: usize, u: &Matrix) -> OpSum {
    let mut out = OpSum::zero();
    for p in 0..4 {
        let m = pauli_matrix(p);
        let coef: C64 = (0..2).flat_map(|i| (0..2).map(move |j| (i, j))).map(|(i, j)| m[i][j] * u[j][i]).sum::<C64>() * 0.5;
        if coef.norm() > 1e-15 {
            out = out.plus(&frame.pauli(k, p).scale(coef));
        }
    }
    out
}

pub fn phase_matrix(angle: f64) -> Matrix {
    vec![vec![cr(1.0), cr(0.0)], vec![cr(0.0), C64::from_polar(1.0, angle)]]
}

/// Unitary taking `|0>` to the Bloch-sphere point `(theta, phi)`.
pub fn state_unitary(theta: f64, phi: f64) -> Matrix {
    let a = cr((theta / 2.0).cos());
    let b = C64::from_polar((theta / 2.0).sin(), phi);
    vec![vec![a, -b.conj()], vec![b, a.conj()]]
}

pub fn pauli_matrix(p: usize) -> Matrix {
    let (o, z, i) = (cr(1.0), cr(0.0), c(0.0, 1.0));
    match p {
        0 => vec![vec![o, z], vec![z, o]],
        1 => vec![vec![z, o], vec![o, z]],
        2 => vec![vec![z, -i], vec![i, z]],
        _ => vec![vec![o, z], vec![z, -o]],
    }
}

pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let (n, m) = (a.len(), b.len());
    let mut out = vec![vec![C64::default(); n * m]; n * m];
    for i in 0..n {
        for j in 0..n {
            for k in 0..m {
                for l in 0..m {
                    out[i * m + k][j * m + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

fn kron_all(ms: &[Matrix]) -> Matrix {
    ms.iter().fold(vec![vec![cr(1.0)]], |acc, m| kron(&acc, m))
}

pub fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
}

/// `<v|rho|v> / <v|v>`.
pub fn fidelity(rho: &Matrix, v: &[C64]) -> f64 {
    let mut acc = C64::default();
    for i in 0..v.len() {
        for j in 0..v.len() {
            acc += v[i].conj() * rho[i][j] * v[j];
        }
    }
    acc.re / v.iter().map(|z| z.norm_sqr()).sum::<f64>()
}

pub fn purity(rho: &Matrix) -> f64 {
    let n = rho.len();
    (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| (rho[i][j] * rho[j][i]).re).sum()
}

/// Reduced state of one qubit of a two-qubit density matrix.
pub fn partial_trace2(rho: &Matrix, keep: usize) -> Matrix {
    let mut out = vec![vec![C64::default(); 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            for t in 0..2 {
                let (i, j) = if keep == 0 { (a * 2 + t, b * 2 + t) } else { (t * 2 + a, t * 2 + b) };
                out[a][b] += rho[i][j];
            }
        }
    }
    out
}

/// `|+>` for `false`, `|->` for `true`.
pub fn x_basis(minus: bool) -> Vec<C64> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    vec![cr(h), cr(if minus { -h } else { h })]
}

/// `(|0> + e^{i pi/4}|1>) / sqrt 2`.
pub fn t_state() -> Vec<C64> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    vec![cr(h), C64::from_polar(h, std::f64::consts::FRAC_PI_4)]
}

/// `(|+> + e^{i pi/4}|->) / sqrt 2`.
pub fn t_x_state() -> Vec<C64> {
    let w = C64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
    let (p, m) = (x_basis(false), x_basis(true));
    (0..2).map(|i| (p[i] + w * m[i]) * std::f64::consts::FRAC_1_SQRT_2).collect()
}

pub fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    (0..a.len()).map(|i| (0..b[0].len()).map(|j| (0..b.len()).map(|k| a[i][k] * b[k][j]).sum()).collect()).collect()
}

pub fn apply_matrix(u: &Matrix, v: &[C64]) -> Vec<C64> {
    u.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

/// Pauli product on qubit sites; `Z` factors act first.
pub fn pauli_op(xs: &[usize], zs: &[usize]) -> OpSum {
    gates::pauli_string(xs, zs)
}

/// Single operator for a product of qubit Paulis, `X Z` order.
pub fn pauli_linear(xs: &[usize], zs: &[usize]) -> Result<LinearOp> {
    let mut support: Vec<usize> = xs.iter().chain(zs).copied().collect();
    support.sort_unstable();
    support.dedup();
    let dims = vec![2; support.len()];
    let xm: Vec<bool> = support.iter().map(|s| xs.contains(s)).collect();
    let zm: Vec<bool> = support.iter().map(|s| zs.contains(s)).collect();
    LinearOp::monomial(&support, &dims, |d| {
        let sign = d.iter().zip(&zm).filter(|(&b, &z)| z && b == 1).count();
        let out = d.iter().zip(&xm).map(|(&b, &x)| if x { 1 - b } else { b }).collect();
        Some((out, cr(if sign % 2 == 1 { -1.0 } else { 1.0 })))
    })
}

/// Solves `sum_i x_i g_i = target` over GF(2); each generator lists the
/// equations it flips.
pub fn solve_gf2(generators: &[Vec<bool>], target: &[bool]) -> Option<Vec<bool>> {
    let n = target.len();
    let m = generators.len();
    let mut rows: Vec<(Vec<bool>, bool)> =
        (0..n).map(|i| ((0..m).map(|j| generators[j][i]).collect(), target[i])).collect();
    let mut pivots = vec![];
    let mut r = 0;
    for col in 0..m {
        let Some(p) = (r..n).find(|&i| rows[i].0[col]) else { continue };
        rows.swap(r, p);
        for i in 0..n {
            if i != r && rows[i].0[col] {
                let (src, b) = rows[r].clone();
                for (x, y) in rows[i].0.iter_mut().zip(&src) {
                    *x ^= *y;
                }
                rows[i].1 ^= b;
            }
        }
        pivots.push(col);
        r += 1;
    }
    if rows[r..].iter().any(|row| row.1) {
        return None;
    }
    let mut x = vec![false; m];
    for (i, &col) in pivots.iter().enumerate() {
        x[col] = rows[i].1;
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::Backend;
    use proptest::prelude::*;

    #[test]
    fn single_qubit_density_of_plus() {
        let mut s = MixedRadixState::new(&[2], Backend::Dense).unwrap();
        s.apply(&gates::hadamard(0)).unwrap();
        let f = LogicalFrame::single(gates::x(0).into(), gates::z(0).into());
        let rho = f.density(&s).unwrap();
        assert!((fidelity(&rho, &x_basis(false)) - 1.0).abs() < 1e-12);
        assert!((purity(&rho) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn y_is_i_x_z() {
        let f = LogicalFrame::single(gates::x(0).into(), gates::z(0).into());
        let mut s = MixedRadixState::new(&[2], Backend::Dense).unwrap();
        s.apply(&LinearOp::from_matrix(&[0], &[2], &[vec![cr(0.5f64.sqrt()), cr(0.0)], vec![c(0.0, 0.5f64.sqrt()), cr(1.0)]]).unwrap()).unwrap();
        let ev = s.expectation(&f.y(0)).unwrap();
        assert!((ev - cr(1.0)).norm() < 1e-12);
    }

    #[test]
    fn partial_trace_of_product() {
        let v = kron_vec(&t_state(), &x_basis(true));
        let rho: Matrix = v.iter().map(|a| v.iter().map(|b| a * b.conj()).collect()).collect();
        assert!((fidelity(&partial_trace2(&rho, 0), &t_state()) - 1.0).abs() < 1e-12);
        assert!((fidelity(&partial_trace2(&rho, 1), &x_basis(true)) - 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn gf2_solutions_reproduce_target(gens in proptest::collection::vec(proptest::collection::vec(any::<bool>(), 6), 1..8), pick in proptest::collection::vec(any::<bool>(), 8)) {
            let mut target = vec![false; 6];
            for (g, &p) in gens.iter().zip(&pick) {
                if p {
                    for (t, &b) in target.iter_mut().zip(g) { *t ^= b; }
                }
            }
            let x = solve_gf2(&gens, &target).unwrap();
            let mut got = vec![false; 6];
            for (g, &p) in gens.iter().zip(&x) {
                if p {
                    for (t, &b) in got.iter_mut().zip(g) { *t ^= b; }
                }
            }
            prop_assert_eq!(got, target);
        }
    }
}
