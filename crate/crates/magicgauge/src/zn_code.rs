//! Z_n surface code on a patch with rough top/bottom and smooth left/right
//! boundaries: stabilizers, string operators, logicals and logical states.

use serde::Serialize;

use crate::engine::{cr, gates, Backend, LinearOp, MixedRadixState, OpSum, C64};
use crate::error::{Error, Result};
use crate::geometry::{EdgeLabel, Incidence, Lattice, Plaquette, PlaquetteKind, Point, VertexFamily};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum StabFamily {
    Vertex,
    VertexLeft,
    VertexRight,
    Plaquette,
    PlaquetteTop,
    PlaquetteBottom,
}

#[derive(Debug, Clone)]
pub struct Stabilizer {
    pub family: StabFamily,
    pub anchor: Point,
    pub generator: LinearOp,
    pub projector: LinearOp,
}

impl Stabilizer {
    pub fn name(&self) -> String {
        format!("{:?}{:?}", self.family, self.anchor)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StringKind {
    E,
    M,
}

#[derive(Debug, Clone)]
pub struct StringOperator {
    pub kind: StringKind,
    pub power: usize,
    pub path: Vec<(EdgeLabel, bool)>,
    pub factors: Vec<LinearOp>,
}

impl StringOperator {
    pub fn op(&self) -> OpSum {
        OpSum::product(self.factors.clone())
    }

    pub fn linear_op(&self) -> Result<LinearOp> {
        let mut it = self.factors.iter();
        let first = it.next().ok_or_else(|| Error::InvalidPath("empty string".into()))?.clone();
        it.try_fold(first, |acc, f| f.compose(&acc))
    }
}

/// `(1/n) sum_k g^k` for an order-`n` generator.
pub fn average_projector(g: &LinearOp, n: usize) -> Result<LinearOp> {
    let mut acc = LinearOp::identity(&g.support, &g.dims)?;
    let mut p = acc.clone();
    for _ in 1..n {
        p = g.compose(&p)?;
        acc = acc.add(&p)?;
    }
    Ok(acc.scale(cr(1.0 / n as f64)))
}

#[derive(Debug, Clone)]
pub struct ZnCode {
    pub n: usize,
    pub lattice: Lattice,
    pub stabilizers: Vec<Stabilizer>,
}

impl ZnCode {
    /// Qudits live on the `E_A` edges, site `i` on edge `i`.
    pub fn new(lattice: &Lattice, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::BadRadix(n));
        }
        let mut code = Self { n, lattice: lattice.clone(), stabilizers: vec![] };
        let mut stabs = vec![];
        for p in lattice.vertices() {
            let g = code.vertex_generator(p)?;
            let family = match lattice.vertex_family(p) {
                VertexFamily::Bulk => StabFamily::Vertex,
                VertexFamily::Left => StabFamily::VertexLeft,
                VertexFamily::Right => StabFamily::VertexRight,
            };
            stabs.push(Stabilizer { family, anchor: p, projector: average_projector(&g, n)?, generator: g });
        }
        for pl in lattice.a_plaquettes() {
            let g = code.plaquette_generator(&pl)?;
            let family = match pl.kind {
                PlaquetteKind::Top => StabFamily::PlaquetteTop,
                PlaquetteKind::Bottom => StabFamily::PlaquetteBottom,
                _ => StabFamily::Plaquette,
            };
            stabs.push(Stabilizer { family, anchor: pl.anchor, projector: average_projector(&g, n)?, generator: g });
        }
        code.stabilizers = stabs;
        Ok(code)
    }

    pub fn num_sites(&self) -> usize {
        self.lattice.a_edges().len()
    }

    pub fn radices(&self) -> Vec<usize> {
        vec![self.n; self.num_sites()]
    }

    pub fn site(&self, l: EdgeLabel) -> Result<usize> {
        self.lattice.a_index(l).ok_or_else(|| Error::InvalidPath(format!("{l} is not a code edge")))
    }

    /// `X~` on outgoing edges and `X~^-1` on incoming edges.
    pub fn vertex_generator(&self, p: Point) -> Result<LinearOp> {
        let n = self.n;
        let mut support = vec![];
        let mut shifts = vec![];
        for (l, inc) in self.lattice.incident(p) {
            if let Some(s) = self.lattice.a_index(l) {
                support.push(s);
                shifts.push(if inc == Incidence::Outgoing { 1 } else { n - 1 });
            }
        }
        let dims = vec![n; support.len()];
        Ok(LinearOp::monomial(&support, &dims, |d| {
            Some((d.iter().zip(&shifts).map(|(x, s)| (x + s) % n).collect(), cr(1.0)))
        })?
        .with_tag(format!("A{p:?}")))
    }

    /// `Z~` holonomy around the face.
    pub fn plaquette_generator(&self, pl: &Plaquette) -> Result<LinearOp> {
        let n = self.n;
        let support: Vec<usize> = pl.boundary.iter().map(|(l, _)| self.site(*l)).collect::<Result<_>>()?;
        let signs: Vec<i64> = pl.boundary.iter().map(|(_, s)| *s as i64).collect();
        let dims = vec![n; support.len()];
        Ok(LinearOp::diagonal(&support, &dims, |d| {
            gates::root(n, d.iter().zip(&signs).map(|(&x, s)| x as i64 * s).sum())
        })?
        .with_tag(format!("B{:?}{:?}", pl.kind, pl.anchor)))
    }

    /// Product of short strings along a path. E-paths follow lattice edges,
    /// m-paths cross them.
    pub fn string_op(&self, kind: StringKind, power: usize, path: &[(EdgeLabel, bool)]) -> Result<StringOperator> {
        if path.is_empty() {
            return Err(Error::InvalidPath("empty path".into()));
        }
        if kind == StringKind::E {
            for w in path.windows(2) {
                let a = self.lattice.edge(w[0].0)?;
                let b = self.lattice.edge(w[1].0)?;
                let end = if w[0].1 { a.head } else { a.tail };
                let start = if w[1].1 { b.tail } else { b.head };
                if end != start {
                    return Err(Error::InvalidPath(format!("{} and {} do not meet", w[0].0, w[1].0)));
                }
            }
        }
        let n = self.n;
        let k = power % n;
        let mut factors = vec![];
        for &(l, fwd) in path {
            let s = self.site(l)?;
            let e = if fwd { k } else { (n - k) % n };
            factors.push(match kind {
                StringKind::E => gates::clock(s, n, e),
                StringKind::M => gates::shift(s, n, e),
            });
        }
        Ok(StringOperator { kind, power: k, path: path.to_vec(), factors })
    }

    /// E-string from the bottom to the top boundary along column 0.
    pub fn logical_z(&self) -> Result<StringOperator> {
        self.string_op(StringKind::E, 1, &self.lattice.vertical_path(0)?)
    }

    /// M-string from the left to the right boundary across row 0.
    pub fn logical_x(&self) -> Result<StringOperator> {
        self.string_op(StringKind::M, 1, &self.lattice.row_crossing(0)?)
    }

    pub fn project_code_space(&self, state: &mut MixedRadixState) -> Result<f64> {
        let mut p = 1.0;
        for s in &self.stabilizers {
            p *= state.project(&s.projector.clone().into())?;
        }
        Ok(p)
    }

    /// Uniform product state projected onto the code space (`X = +1`).
    pub fn prepare_omega0(&self, backend: Backend) -> Result<MixedRadixState> {
        let mut s = MixedRadixState::uniform(&self.radices(), backend)?;
        self.project_code_space(&mut s)?;
        Ok(s)
    }

    /// `|omega_k> = Z^k |omega_0>` for `k = 0..n`.
    pub fn omega_basis(&self, backend: Backend) -> Result<Vec<MixedRadixState>> {
        let z = self.logical_z()?.op();
        let mut cur = self.prepare_omega0(backend)?;
        let mut out = vec![];
        for _ in 0..self.n {
            out.push(cur.clone());
            cur.apply_sum(&z)?;
        }
        Ok(out)
    }

    /// `(|w0> + e^{i pi/4}|w1> - |w2> + e^{i pi/4}|w3>) / 2`.
    pub fn prepare_s_x(&self, backend: Backend) -> Result<MixedRadixState> {
        if self.n != 4 {
            return Err(Error::Unsupported("S_X needs n = 4".into()));
        }
        let basis = self.omega_basis(backend)?;
        let mut out = MixedRadixState::from_entries(&self.radices(), backend, vec![])?;
        for (j, w) in basis.iter().enumerate() {
            out.axpy(s_phase(j) * 0.5, w)?;
        }
        Ok(out)
    }

    /// Logical operator with matrix `u` in the `|omega_k>` basis, written as
    /// `sum_jk u_jk Z^j P0 Z^-k` with `P0 = (1/n) sum_m X^m`.
    pub fn logical_operator(&self, u: &[Vec<C64>]) -> Result<OpSum> {
        let n = self.n;
        let z = self.logical_z()?;
        let x = self.logical_x()?;
        let zp = |k: usize| -> Result<OpSum> { Ok(self.string_op(StringKind::E, k, &z.path)?.op()) };
        let xp = |k: usize| -> Result<OpSum> { Ok(self.string_op(StringKind::M, k, &x.path)?.op()) };
        let mut p0 = OpSum::zero();
        for m in 0..n {
            p0 = p0.plus(&xp(m)?.scale(cr(1.0 / n as f64)));
        }
        let mut out = OpSum::zero();
        for (j, row) in u.iter().enumerate() {
            for (k, &ujk) in row.iter().enumerate() {
                if ujk.norm() < 1e-15 {
                    continue;
                }
                let t = zp(j)?.then(&p0).then(&zp((n - k) % n)?);
                out = out.plus(&t.scale(ujk));
            }
        }
        Ok(out)
    }

    /// Stabilizer expectations.
    pub fn check(&self, state: &MixedRadixState) -> Result<Vec<(String, f64)>> {
        self.stabilizers
            .iter()
            .map(|s| Ok((s.name(), state.expectation_op(&s.projector)?.re)))
            .collect()
    }

    /// Number of code states, by counting gauge orbits of flat configurations.
    pub fn code_dimension(&self) -> Result<usize> {
        let plaqs: Vec<LinearOp> = self.stabilizers.iter().filter(|s| is_plaquette(s.family)).map(|s| s.generator.clone()).collect();
        let verts: Vec<LinearOp> = self.stabilizers.iter().filter(|s| !is_plaquette(s.family)).map(|s| s.generator.clone()).collect();
        crate::engine::orbit_count(&self.radices(), &plaqs, &verts)
    }
}

fn is_plaquette(f: StabFamily) -> bool {
    matches!(f, StabFamily::Plaquette | StabFamily::PlaquetteTop | StabFamily::PlaquetteBottom)
}

/// `exp(i pi j^2 / 4)`, the diagonal of the Z_4 phase gate.
pub fn s_phase(j: usize) -> C64 {
    C64::from_polar(1.0, std::f64::consts::PI * (j * j) as f64 / 4.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::c as cx;

    fn code(n: usize) -> ZnCode {
        ZnCode::new(&Lattice::new(1, 1).unwrap(), n).unwrap()
    }

    #[test]
    fn stabilizer_count() {
        let c = code(4);
        assert_eq!(c.stabilizers.len(), 4 + 3);
    }

    #[test]
    fn stabilizers_commute_and_project() {
        let c = code(4);
        for a in &c.stabilizers {
            assert!(a.projector.is_projector(1e-12).unwrap());
            for b in &c.stabilizers {
                assert!(a.generator.commutes_with(&b.generator, 1e-12).unwrap());
            }
        }
    }

    #[test]
    fn code_dimension_equals_n() {
        assert_eq!(code(4).code_dimension().unwrap(), 4);
        assert_eq!(code(2).code_dimension().unwrap(), 2);
    }

    #[test]
    fn omega0_expectations() {
        let c = code(4);
        let w = c.prepare_omega0(Backend::Dense).unwrap();
        assert!((w.expectation(&c.logical_x().unwrap().op()).unwrap() - cr(1.0)).norm() < 1e-12);
        assert!(w.expectation(&c.logical_z().unwrap().op()).unwrap().norm() < 1e-12);
        assert!(c.check(&w).unwrap().iter().all(|(_, v)| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn logical_commutation() {
        let c = code(4);
        let z = c.logical_z().unwrap().linear_op().unwrap();
        let x = c.logical_x().unwrap().linear_op().unwrap();
        let zx = z.compose(&x).unwrap();
        let xz = x.compose(&z).unwrap().scale(cx(0.0, 1.0));
        assert!(zx.approx_eq(&xz, 1e-12).unwrap());
    }

    #[test]
    fn logical_strings_commute_with_stabilizers() {
        let c = code(4);
        for l in [c.logical_z().unwrap(), c.logical_x().unwrap()] {
            let op = l.linear_op().unwrap();
            for s in &c.stabilizers {
                assert!(op.commutes_with(&s.generator, 1e-12).unwrap(), "{}", s.name());
            }
        }
    }

    #[test]
    fn open_e_string_endpoint_phases() {
        let c = code(4);
        let path = c.lattice.vertex_path((0, 0), (1, 1)).unwrap();
        let w = c.string_op(StringKind::E, 1, &path).unwrap().linear_op().unwrap();
        for s in c.stabilizers.iter().filter(|s| !is_plaquette(s.family)) {
            let aw = s.generator.compose(&w).unwrap();
            let wa = w.compose(&s.generator).unwrap();
            let phase = if s.anchor == (0, 0) {
                cx(0.0, -1.0)
            } else if s.anchor == (1, 1) {
                cx(0.0, 1.0)
            } else {
                cr(1.0)
            };
            assert!(aw.approx_eq(&wa.scale(phase), 1e-12).unwrap(), "{:?}", s.anchor);
        }
    }

    #[test]
    fn s_x_overlaps() {
        let c = code(4);
        let basis = c.omega_basis(Backend::Sparse).unwrap();
        let sx = c.prepare_s_x(Backend::Sparse).unwrap();
        assert!((sx.norm_sqr() - 1.0).abs() < 1e-12);
        for (j, w) in basis.iter().enumerate() {
            let ov = w.inner(&sx).unwrap();
            assert!((ov - s_phase(j) * 0.5).norm() < 1e-12);
        }
    }

    #[test]
    fn n2_code_is_pauli() {
        let c = code(2);
        for s in &c.stabilizers {
            let m = s.generator.to_matrix();
            for row in m {
                for x in row {
                    assert!(x.norm() < 1e-12 || (x.norm() - 1.0).abs() < 1e-12);
                    assert!(x.im.abs() < 1e-12);
                }
            }
        }
    }
}
