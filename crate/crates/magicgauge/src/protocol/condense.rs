//! Condensation stages: `e_G` takes the D4 double to two qubit surface codes,
//! after which the second step either disentangles them with logical gates or
//! condenses `m1 e2` into a single code.

use crate::anyon_algebra::{theory, LogicalAnyonState};
use crate::engine::{cr, gates, LinearOp, MixedRadixState, OpSum, C64};
use crate::error::{Error, Result};
use crate::geometry::{EdgeLabel, Lattice, Point};
use crate::quantum_double::{d4, Dof};
use crate::zn_code::ZnCode;

use super::gauge::Patch;
use super::logical::{kron_vec, pauli_linear, pauli_op, solve_gf2, x_basis, LogicalFrame};
use super::record::Recorder;

/// Measures the `e_G` parity of every edge carrying a qudit, corrects odd
/// outcomes with vertex operators, disentangles the qudit from the gauge
/// qubit and truncates each qudit to its even sector.
///
/// On return sites `0..na` hold the code-2 qubits and sites `na..na+nb` the
/// code-1 qubits. Returns `(state, truncation probability)`.
pub fn condense_eg(p: &Patch, input: &MixedRadixState, rec: &mut Recorder) -> Result<(MixedRadixState, f64)> {
    let mut s = input.clone();
    let mut measured: Vec<usize> = vec![];
    let mut odd: Vec<bool> = vec![];
    for (e, edge) in p.d4.edges.iter().enumerate() {
        let obs = match edge.dof {
            Dof::Full { qudit, qubit } => OpSum::product(vec![gates::clock(qudit, 4, 2), gates::z(qubit)]),
            Dof::Qudit { site } => gates::clock(site, 4, 2).into(),
            Dof::Qubit { .. } => continue,
        };
        let out = rec.measure(&mut s, &obs)?;
        measured.push(e);
        odd.push(out.value < 0);
    }
    if odd.iter().any(|&b| b) {
        let verts = p.lattice.vertices();
        let mut gens: Vec<Vec<bool>> = verts
            .iter()
            .map(|&v| measured.iter().map(|&e| p.d4.edges[e].tail == v || p.d4.edges[e].head == v).collect())
            .collect();
        let strings = side_strings(&p.lattice);
        for st in &strings {
            gens.push(measured.iter().map(|&e| st.contains(&p.d4.edges[e].label)).collect());
        }
        let sol = solve_gf2(&gens, &odd).ok_or_else(|| Error::CheckFailed("e_G syndrome has no correction".into()))?;
        for (v, _) in verts.iter().zip(&sol).filter(|x| *x.1) {
            s.apply(&p.d4.vertex_action(*v, d4(1, 0))?)?;
        }
        for (st, _) in strings.iter().zip(&sol[verts.len()..]).filter(|x| *x.1) {
            for &l in st {
                s.apply(&gates::x(p.b_qubit(l)?))?;
            }
        }
        rec.note(format!("corrected {} odd e_G outcomes", odd.iter().filter(|&&b| b).count()));
    }
    for edge in &p.d4.edges {
        if let Dof::Full { qudit, qubit } = edge.dof {
            s.apply(&LinearOp::monomial(&[qudit, qubit], &[4, 2], |d| Some((vec![(d[0] + 4 - d[1]) % 4, d[1]], cr(1.0))))?)?;
        }
    }
    let mut prob = 1.0;
    for q in 0..p.na {
        prob *= rec.project(&mut s, &OpSum::from(gates::clock(q, 4, 2)).eigen_projector(1))?;
    }
    for q in 0..p.na {
        s.remap_site(q, 2, &[Some(0), None, Some(1), None])?;
    }
    rec.observe(&s);
    Ok((s, prob))
}

/// Gauge-qubit strings from the top row to the right boundary.
fn side_strings(lat: &Lattice) -> Vec<Vec<EdgeLabel>> {
    let (w, h) = (lat.width as i32, lat.height as i32);
    (0..w)
        .map(|x| {
            let mut st = vec![EdgeLabel::H(x, h)];
            st.extend((x + 1..=w).map(|xx| EdgeLabel::V(xx, h - 1)));
            st.push(EdgeLabel::Dr(h));
            st
        })
        .collect()
}

/// Two qubit surface codes: code 1 on the `E_B` edges (sites `na..`), code 2
/// on the `E_A` edges (sites `0..na`).
#[derive(Debug, Clone)]
pub struct Z22Code {
    pub lattice: Lattice,
    pub na: usize,
    pub nb: usize,
}

impl Z22Code {
    pub fn new(p: &Patch) -> Self {
        Self { lattice: p.lattice.clone(), na: p.na, nb: p.nb }
    }

    pub fn num_sites(&self) -> usize {
        self.na + self.nb
    }

    pub fn b_site(&self, l: EdgeLabel) -> Result<usize> {
        self.lattice.a_index(l).ok_or_else(|| Error::InvalidPath(format!("{l} is not an E_A edge")))
    }

    pub fn a_site(&self, l: EdgeLabel) -> Result<usize> {
        self.lattice
            .b_index(l)
            .map(|i| self.na + i)
            .ok_or_else(|| Error::InvalidPath(format!("{l} is not an E_B edge")))
    }

    fn a_sites(&self, ls: &[EdgeLabel]) -> Result<Vec<usize>> {
        ls.iter().map(|&l| self.a_site(l)).collect()
    }

    fn b_sites(&self, ls: &[EdgeLabel]) -> Result<Vec<usize>> {
        ls.iter().map(|&l| self.b_site(l)).collect()
    }

    /// `E_A` edges touching `v`, dangling ones included.
    pub fn b_star(&self, v: Point) -> Vec<EdgeLabel> {
        self.lattice.incident(v).into_iter().map(|x| x.0).filter(|l| self.lattice.a_index(*l).is_some()).collect()
    }

    /// Stabilizer generators of both codes as `(name, X sites, Z sites)`.
    pub fn pauli_generators(&self) -> Result<Vec<(String, Vec<usize>, Vec<usize>)>> {
        let lat = &self.lattice;
        let h = lat.height as i32;
        let mut out = vec![];
        for pl in lat.b_plaquettes() {
            let sites = self.a_sites(&pl.boundary.iter().map(|x| x.0).collect::<Vec<_>>())?;
            out.push((format!("Z1 {:?}{:?}", pl.kind, pl.anchor), vec![], sites));
        }
        for x in 0..lat.width as i32 {
            for y in [0, h] {
                out.push((format!("Z1 frozen h({x},{y})"), vec![], vec![self.a_site(EdgeLabel::H(x, y))?]));
            }
        }
        for v in lat.vertices() {
            if v.1 > 0 && v.1 < h {
                out.push((format!("X1 star{v:?}"), self.a_sites(&lat.b_incident(v))?, vec![]));
            }
        }
        for v in lat.vertices() {
            out.push((format!("X2 star{v:?}"), self.b_sites(&self.b_star(v))?, vec![]));
        }
        for pl in lat.a_plaquettes() {
            let sites = self.b_sites(&pl.boundary.iter().map(|x| x.0).collect::<Vec<_>>())?;
            out.push((format!("Z2 {:?}{:?}", pl.kind, pl.anchor), vec![], sites));
        }
        Ok(out)
    }

    pub fn stabilizers(&self) -> Result<Vec<(String, OpSum)>> {
        Ok(self.pauli_generators()?.into_iter().map(|(n, xs, zs)| (n, pauli_op(&xs, &zs))).collect())
    }

    /// Logical operators, qubit 0 for code 1 and qubit 1 for code 2.
    pub fn frame(&self) -> Result<LogicalFrame> {
        let lat = &self.lattice;
        let (w, h) = (lat.width as i32, lat.height as i32);
        let mut x1 = vec![EdgeLabel::Dl(h), EdgeLabel::Dr(h)];
        x1.extend((0..=w).map(|x| EdgeLabel::V(x, h - 1)));
        let z1: Vec<EdgeLabel> = (0..h).map(|y| EdgeLabel::V(0, y)).collect();
        let x2: Vec<EdgeLabel> = (0..=w).map(|x| EdgeLabel::V(x, 0)).collect();
        let z2: Vec<EdgeLabel> = lat.vertical_path(0)?.into_iter().map(|x| x.0).collect();
        Ok(LogicalFrame {
            xs: vec![pauli_op(&self.a_sites(&x1)?, &[]), pauli_op(&self.b_sites(&x2)?, &[])],
            zs: vec![pauli_op(&[], &self.a_sites(&z1)?), pauli_op(&[], &self.b_sites(&z2)?)],
        })
    }
}

/// `(1 + <S>) / 2` for each generator.
pub fn stabilizer_checks(state: &MixedRadixState, stabs: &[(String, OpSum)]) -> Result<Vec<(String, f64)>> {
    stabs.iter().map(|(n, s)| Ok((n.clone(), (1.0 + state.expectation(s)?.re) / 2.0))).collect()
}

/// Logical Hadamard on both codes followed by a logical `CZ`.
pub fn option1_disentangle(code: &Z22Code, input: &MixedRadixState) -> Result<MixedRadixState> {
    let f = code.frame()?;
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut s = input.clone();
    for k in 0..2 {
        let h = f.xs[k].clone().scale(cr(r)).plus(&f.zs[k].clone().scale(cr(r)));
        s.apply_sum(&h)?;
    }
    let cz = OpSum::identity()
        .plus(&f.zs[0])
        .plus(&f.zs[1])
        .plus(&f.zs[0].then(&f.zs[1]).scale(cr(-1.0)))
        .scale(cr(0.5));
    s.apply_sum(&cz)?;
    Ok(s)
}

/// Code-2 edges whose `Z` accompanies the code-1 `X` on `l` in the `m1 e2`
/// condensation operator.
pub fn partner(lat: &Lattice, l: EdgeLabel) -> Vec<EdgeLabel> {
    let (w, h) = (lat.width as i32, lat.height as i32);
    let side = |x: i32, y: i32| -> Vec<EdgeLabel> {
        if y == 0 {
            vec![EdgeLabel::Db(x)]
        } else if y < h {
            vec![EdgeLabel::V(x, y - 1)]
        } else {
            let mut out: Vec<EdgeLabel> = (0..h - 1).rev().map(|yy| EdgeLabel::V(x, yy)).collect();
            out.push(EdgeLabel::Db(x));
            out
        }
    };
    match l {
        EdgeLabel::H(x, 0) => vec![EdgeLabel::Db(x)],
        EdgeLabel::H(x, y) => vec![EdgeLabel::V(x, y - 1)],
        EdgeLabel::V(0, _) => vec![],
        EdgeLabel::V(x, y) => vec![EdgeLabel::H(x - 1, y)],
        EdgeLabel::Dl(y) => side(0, y),
        EdgeLabel::Dr(y) => side(w, y),
        EdgeLabel::Db(_) | EdgeLabel::Dt(_) => vec![],
    }
}

/// Single qubit code left after condensing `m1 e2`, on the full two-code
/// register.
#[derive(Debug, Clone)]
pub struct CondensedZ2Code {
    pub z22: Z22Code,
}

impl CondensedZ2Code {
    pub fn new(z22: &Z22Code) -> Self {
        Self { z22: z22.clone() }
    }

    /// `(label, a site, partner b sites)` for every code-1 edge.
    pub fn condensers(&self) -> Result<Vec<(EdgeLabel, usize, Vec<usize>)>> {
        let c = &self.z22;
        c.lattice
            .b_edges()
            .iter()
            .map(|e| Ok((e.label, c.a_site(e.label)?, c.b_sites(&partner(&c.lattice, e.label))?)))
            .collect()
    }

    pub fn condenser_ops(&self) -> Result<Vec<(String, OpSum)>> {
        Ok(self
            .condensers()?
            .into_iter()
            .map(|(l, a, bs)| (format!("C {l}"), pauli_op(&[a], &bs)))
            .collect())
    }

    pub fn stabilizers(&self) -> Result<Vec<(String, OpSum)>> {
        let c = &self.z22;
        let lat = &c.lattice;
        let conds = self.condensers()?;
        let mut out = vec![];
        for v in lat.vertices() {
            let star = c.b_sites(&c.b_star(v))?;
            let zs: Vec<usize> = conds
                .iter()
                .filter(|(_, _, bs)| bs.iter().filter(|b| star.contains(b)).count() % 2 == 1)
                .map(|x| x.1)
                .collect();
            let family = match lat.vertex_family(v) {
                crate::geometry::VertexFamily::Bulk => "Vertex",
                crate::geometry::VertexFamily::Left => "VertexLeft",
                crate::geometry::VertexFamily::Right => "VertexRight",
            };
            out.push((format!("{family}{v:?}"), pauli_op(&star, &zs)));
        }
        for pl in lat.a_plaquettes() {
            let sites = c.b_sites(&pl.boundary.iter().map(|x| x.0).collect::<Vec<_>>())?;
            let family = match pl.kind {
                crate::geometry::PlaquetteKind::Top => "PlaquetteTop",
                crate::geometry::PlaquetteKind::Bottom => "PlaquetteBottom",
                _ => "Plaquette",
            };
            out.push((format!("{family}{:?}", pl.anchor), pauli_op(&[], &sites)));
        }
        out.extend(self.condenser_ops()?);
        Ok(out)
    }

    /// `L_e` along column 0 and `L_m` across the top row.
    pub fn frame(&self) -> Result<LogicalFrame> {
        let c = &self.z22;
        let lat = &c.lattice;
        let (w, h) = (lat.width as i32, lat.height as i32);
        let ze: Vec<EdgeLabel> = lat.vertical_path(0)?.into_iter().map(|x| x.0).collect();
        let xb: Vec<EdgeLabel> = (0..=w).map(|x| EdgeLabel::V(x, h - 1)).collect();
        let za: Vec<EdgeLabel> = (0..w).map(|x| EdgeLabel::H(x, h)).collect();
        Ok(LogicalFrame::single(pauli_op(&c.b_sites(&xb)?, &c.a_sites(&za)?), pauli_op(&[], &c.b_sites(&ze)?)))
    }

    /// Sites of the `Z`-type logical.
    pub fn z_sites(&self) -> Result<Vec<usize>> {
        let c = &self.z22;
        c.b_sites(&c.lattice.vertical_path(0)?.into_iter().map(|x| x.0).collect::<Vec<_>>())
    }

    /// Measures every condenser. Odd outcomes are undone by the product of
    /// `Z2^2` stabilizers anticommuting with exactly those condensers.
    pub fn condense(&self, input: &MixedRadixState, rec: &mut Recorder) -> Result<MixedRadixState> {
        let conds = self.condensers()?;
        for (i, (_, a, bs)) in conds.iter().enumerate() {
            for (_, a2, bs2) in &conds[i + 1..] {
                let anti = usize::from(bs2.contains(a)) + usize::from(bs.contains(a2));
                if anti % 2 == 1 {
                    return Err(Error::CheckFailed("condensers do not commute".into()));
                }
            }
        }
        let mut s = input.clone();
        let mut odd = vec![];
        for (_, a, bs) in &conds {
            odd.push(rec.measure(&mut s, &pauli_op(&[*a], bs))?.value < 0);
        }
        if odd.iter().any(|&b| b) {
            let stabs = self.z22.pauli_generators()?;
            let gens: Vec<Vec<bool>> = stabs
                .iter()
                .map(|(_, xs, zs)| {
                    conds
                        .iter()
                        .map(|(_, a, bs)| (xs.iter().filter(|x| bs.contains(x)).count() + usize::from(zs.contains(a))) % 2 == 1)
                        .collect()
                })
                .collect();
            let sol = solve_gf2(&gens, &odd).ok_or_else(|| Error::CheckFailed("m1e2 syndrome has no correction".into()))?;
            for ((_, xs, zs), _) in stabs.iter().zip(&sol).filter(|x| *x.1) {
                s.apply(&pauli_linear(xs, zs)?)?;
            }
            rec.note(format!("corrected {} odd m1e2 outcomes", odd.iter().filter(|&&b| b).count()));
        }
        rec.observe(&s);
        Ok(s)
    }

    /// `CZ` network mapping every condenser to a bare code-1 `X`.
    pub fn standardizer(&self) -> Result<Vec<LinearOp>> {
        Ok(self
            .condensers()?
            .into_iter()
            .flat_map(|(_, a, bs)| bs.into_iter().map(move |b| gates::cz(a, b)))
            .collect())
    }

    /// Applies the standardizer, checks the code-1 qubits are `|+>` and
    /// removes them. The result is a register of the plain qubit code.
    /// Returns `(state, <X> per removed qubit)`.
    pub fn standardize(&self, input: &MixedRadixState) -> Result<(MixedRadixState, Vec<(String, f64)>)> {
        let mut s = input.clone();
        s.apply_circuit(&self.standardizer()?)?;
        let mut xs = vec![];
        let c = &self.z22;
        for e in c.lattice.b_edges() {
            let a = c.a_site(e.label)?;
            xs.push((format!("X {}", e.label), s.expectation_op(&gates::x(a))?.re));
        }
        for a in (c.na..c.num_sites()).rev() {
            s.drop_site(a)?;
        }
        Ok((s, xs))
    }
}

/// Logical frame of a qubit surface code register.
pub fn zn_frame(code: &ZnCode) -> Result<LogicalFrame> {
    Ok(LogicalFrame::single(code.logical_x()?.op(), code.logical_z()?.op()))
}

/// Logical vector of an abelian anyon state: `e` parts flip the
/// corresponding qubit to `|->`, `m` parts act trivially.
pub fn oracle_vector(state: &LogicalAnyonState, qubits: usize) -> Result<Vec<C64>> {
    let t = theory(&state.theory)?;
    let mut out = vec![C64::default(); 1 << qubits];
    for (label, z) in state.nonzero(1e-15) {
        let a = t.get(&label.anyon)?;
        let ch = a.charge.as_ref().ok_or_else(|| Error::Unsupported(format!("{} is not abelian", label.anyon)))?;
        let v = (0..qubits).fold(vec![cr(1.0)], |acc, q| kron_vec(&acc, &x_basis(ch.get(2 * q).copied().unwrap_or(0) % 2 == 1)));
        for (o, x) in out.iter_mut().zip(v) {
            *o += z * x;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::logical::{fidelity, partial_trace2, purity, t_state, t_x_state};
    use super::super::record::Mode;
    use super::*;
    use crate::anyon_algebra::{condense_transform, gauge_transform, interface, named_algebra};
    use crate::engine::Backend;

    fn z22_state(mode: Mode, seed: u64) -> (Patch, MixedRadixState, Recorder) {
        let p = Patch::new(1, 1).unwrap();
        let sx = p.z4.prepare_s_x(Backend::Sparse).unwrap();
        let mut rec = Recorder::new(mode, seed, false);
        rec.begin("t");
        let g = super::super::gauge::gauge_map(&p, &sx, &mut rec).unwrap();
        let (s, prob) = condense_eg(&p, &g, &mut rec).unwrap();
        assert!((prob - 1.0).abs() < 1e-12);
        (p, s, rec)
    }

    fn oracle_z22() -> LogicalAnyonState {
        let (_, l1) = named_algebra("L1").unwrap();
        let d4 = gauge_transform(&LogicalAnyonState::s_x(), &interface("A").unwrap(), &l1).unwrap();
        condense_transform(&d4, &interface("A1p").unwrap()).unwrap()
    }

    #[test]
    fn eg_condensation_gives_two_codes() {
        let (p, s, _) = z22_state(Mode::PostSelect, 0);
        let code = Z22Code::new(&p);
        for (n, v) in stabilizer_checks(&s, &code.stabilizers().unwrap()).unwrap() {
            assert!((v - 1.0).abs() < 1e-9, "{n} {v}");
        }
        let rho = code.frame().unwrap().density(&s).unwrap();
        assert!((purity(&rho) - 1.0).abs() < 1e-9);
        let v = oracle_vector(&oracle_z22(), 2).unwrap();
        assert!((fidelity(&rho, &v) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn sampled_eg_outcomes_are_corrected() {
        let p = Patch::new(1, 1).unwrap();
        let sx = p.z4.prepare_s_x(Backend::Sparse).unwrap();
        let code = Z22Code::new(&p);
        let v = oracle_vector(&oracle_z22(), 2).unwrap();
        let (mut corrected, mut refused) = (0, 0);
        for seed in 0..16 {
            let mut rec = Recorder::new(Mode::Sample, seed, false);
            rec.begin("t");
            let g = super::super::gauge::gauge_map(&p, &sx, &mut rec).unwrap();
            match condense_eg(&p, &g, &mut rec) {
                Ok((s, _)) => {
                    let rho = code.frame().unwrap().density(&s).unwrap();
                    assert!((fidelity(&rho, &v) - 1.0).abs() < 1e-9, "seed {seed}");
                    corrected += 1;
                }
                Err(Error::CheckFailed(_)) => refused += 1,
                Err(e) => panic!("{e}"),
            }
        }
        assert!(corrected >= 3 && refused >= 1, "{corrected} {refused}");
    }

    #[test]
    fn sampled_condenser_outcomes_are_corrected() {
        let (p, s, _) = z22_state(Mode::PostSelect, 0);
        let c = CondensedZ2Code::new(&Z22Code::new(&p));
        let (mut corrected, mut refused) = (0, 0);
        for seed in 0..24 {
            let mut rec = Recorder::new(Mode::Sample, seed, false);
            rec.begin("t");
            match c.condense(&s, &mut rec) {
                Ok(out) => {
                    for (n, v) in stabilizer_checks(&out, &c.stabilizers().unwrap()).unwrap() {
                        assert!((v - 1.0).abs() < 1e-9, "{n} {v}");
                    }
                    let rho = c.frame().unwrap().density(&out).unwrap();
                    assert!((fidelity(&rho, &t_x_state()) - 1.0).abs() < 1e-9, "seed {seed}");
                    corrected += 1;
                }
                Err(Error::CheckFailed(_)) => refused += 1,
                Err(e) => panic!("{e}"),
            }
        }
        assert!(corrected >= 3 && refused >= 1, "{corrected} {refused}");
    }

    #[test]
    fn option1_factors() {
        let (p, s, _) = z22_state(Mode::PostSelect, 0);
        let code = Z22Code::new(&p);
        let out = option1_disentangle(&code, &s).unwrap();
        let rho = code.frame().unwrap().density(&out).unwrap();
        let (r1, r2) = (partial_trace2(&rho, 0), partial_trace2(&rho, 1));
        assert!((purity(&r1) - 1.0).abs() < 1e-10);
        assert!((purity(&r2) - 1.0).abs() < 1e-10);
        assert!((fidelity(&r1, &x_basis(true)) - 1.0).abs() < 1e-9);
        assert!((fidelity(&r2, &t_state()) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn option2_and_standardize() {
        let (p, s, mut rec) = z22_state(Mode::PostSelect, 0);
        let c = CondensedZ2Code::new(&Z22Code::new(&p));
        let out = c.condense(&s, &mut rec).unwrap();
        for (n, v) in stabilizer_checks(&out, &c.stabilizers().unwrap()).unwrap() {
            assert!((v - 1.0).abs() < 1e-9, "{n} {v}");
        }
        let rho = c.frame().unwrap().density(&out).unwrap();
        assert!((fidelity(&rho, &t_x_state()) - 1.0).abs() < 1e-9);
        let (std, xs) = c.standardize(&out).unwrap();
        for (n, x) in xs {
            assert!((x - 1.0).abs() < 1e-9, "{n} {x}");
        }
        let zc = ZnCode::new(&p.lattice, 2).unwrap();
        for (n, v) in zc.check(&std).unwrap() {
            assert!((v - 1.0).abs() < 1e-9, "{n} {v}");
        }
        let rho = zn_frame(&zc).unwrap().density(&std).unwrap();
        assert!((fidelity(&rho, &t_x_state()) - 1.0).abs() < 1e-9);
    }
}
