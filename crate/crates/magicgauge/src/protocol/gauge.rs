//! Gauging charge conjugation: the Z4 code is coupled to one matter qubit per
//! vertex and one gauge qubit per shifted edge, giving the D4 quantum double.

use crate::anyon_algebra::LogicalAnyonState;
use crate::engine::{cr, gates, Backend, LinearOp, MixedRadixState, OpSum};
use crate::error::{Error, Result};
use crate::geometry::{EdgeLabel, Lattice, Point, Ribbon};
use crate::quantum_double::D4Code;
use crate::zn_code::ZnCode;

use super::record::{Mode, Recorder};

/// Largest estimated support the protocol will attempt.
pub const SUPPORT_LIMIT: u128 = 1 << 18;

/// Registers and codes shared by the stages on one patch.
#[derive(Debug, Clone)]
pub struct Patch {
    pub lattice: Lattice,
    pub z4: ZnCode,
    pub d4: D4Code,
    /// Number of `E_A` edges.
    pub na: usize,
    /// Number of `E_B` edges.
    pub nb: usize,
}

impl Patch {
    pub fn new(width: usize, height: usize) -> Result<Self> {
        let lattice = Lattice::new(width, height)?;
        let est = estimated_support(&lattice);
        if est > SUPPORT_LIMIT {
            return Err(Error::TooLarge(est));
        }
        Ok(Self {
            z4: ZnCode::new(&lattice, 4)?,
            d4: D4Code::new(&lattice)?,
            na: lattice.a_edges().len(),
            nb: lattice.b_edges().len(),
            lattice,
        })
    }

    /// Register site of the `E_B` qubit on `l` in the D4 register.
    pub fn b_qubit(&self, l: EdgeLabel) -> Result<usize> {
        self.lattice
            .b_index(l)
            .map(|i| self.na + i)
            .ok_or_else(|| Error::InvalidPath(format!("{l} is not an E_B edge")))
    }

    pub fn a_qudit(&self, l: EdgeLabel) -> Result<usize> {
        self.lattice.a_index(l).ok_or_else(|| Error::InvalidPath(format!("{l} is not an E_A edge")))
    }
}

/// Support of the gauged state: code configurations times matter
/// configurations.
pub fn estimated_support(lat: &Lattice) -> u128 {
    let free = lat.a_edges().len().saturating_sub(lat.a_plaquettes().len()) as u32;
    let v = lat.vertices().len() as u32;
    4u128.saturating_pow(free).saturating_mul(2u128.saturating_pow(v))
}

/// `E_B` edges of the row string from `p` to the left boundary.
fn left_string(p: Point) -> Vec<EdgeLabel> {
    let mut out: Vec<EdgeLabel> = (0..p.0).map(|x| EdgeLabel::H(x, p.1)).collect();
    out.push(EdgeLabel::Dl(p.1));
    out
}

/// Couples each vertex to a `|+>` matter qubit through controlled charge
/// conjugation and `CZ` with the `|+>` gauge qubits, measures the matter
/// qubit in the `X` basis and removes it, then rotates the gauge qubits with
/// `H`. Conjugating by the final `H` turns each `CZ` into a `CNOT` onto a
/// `|0>` gauge qubit, which is what is applied.
pub fn gauge_map(p: &Patch, input: &MixedRadixState, rec: &mut Recorder) -> Result<MixedRadixState> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let plus = [cr(h), cr(h)];
    let mut s = input.clone();
    for _ in 0..p.nb {
        s.add_site(2, &[cr(1.0), cr(0.0)])?;
    }
    let mut flipped = vec![];
    for v in p.lattice.vertices() {
        let sigma = s.add_site(2, &plus)?;
        for l in p.lattice.controlled_edges(v) {
            s.apply(&gates::controlled(sigma, 2, 1, &gates::charge_conj(p.a_qudit(l)?, 4))?)?;
        }
        for l in p.lattice.b_incident(v) {
            s.apply(&gates::controlled(sigma, 2, 1, &gates::x(p.b_qubit(l)?))?)?;
        }
        rec.observe(&s);
        let out = rec.measure(&mut s, &gates::x(sigma).into())?;
        if out.value < 0 {
            flipped.push(v);
        }
        s.drop_site(sigma)?;
    }
    let mut fix: Vec<EdgeLabel> = vec![];
    for v in flipped {
        for l in left_string(v) {
            match fix.iter().position(|&x| x == l) {
                Some(i) => {
                    fix.remove(i);
                }
                None => fix.push(l),
            }
        }
    }
    for l in fix {
        s.apply(&gates::z(p.b_qubit(l)?))?;
    }
    rec.observe(&s);
    Ok(s)
}

/// Projects every gauge qubit onto `|0>` and removes it, returning a Z4
/// register.
pub fn ungauge(p: &Patch, gauged: &MixedRadixState) -> Result<MixedRadixState> {
    let mut s = gauged.clone();
    for b in (0..p.nb).rev() {
        let site = p.na + b;
        let z: OpSum = gates::z(site).into();
        s.project(&z.eigen_projector(1))?;
        s.drop_site(site)?;
    }
    Ok(s)
}

/// Round-trip fidelities `|<w_k| ungauge(gauge(w_k))>|^2`.
pub fn ungauge_fidelities(p: &Patch, backend: Backend) -> Result<Vec<f64>> {
    let mut rec = Recorder::new(Mode::PostSelect, 0, false);
    rec.begin("ungauge");
    let out = p
        .z4
        .omega_basis(backend)?
        .iter()
        .map(|w| {
            let g = gauge_map(p, w, &mut rec)?;
            ungauge(p, &g)?.fidelity(w)
        })
        .collect();
    rec.abort();
    out
}

/// Direct ribbon along the bottom row joining the two side boundaries.
pub fn horizontal_ribbon(lat: &Lattice) -> Result<Ribbon> {
    let mut path = vec![(EdgeLabel::Dl(0), true)];
    path.extend((0..lat.width as i32).map(|x| (EdgeLabel::H(x, 0), true)));
    path.push((EdgeLabel::Dr(0), true));
    Ribbon::from_direct(&path)
}

/// Ground state of the D4 patch with trivial top-to-bottom charge and
/// trivial `e_RG` flux across: flat configurations, projected by the side
/// `e_RG` ribbon and every vertex term.
pub fn d4_vacuum(p: &Patch, backend: Backend) -> Result<MixedRadixState> {
    let mut s = p.d4.flat_superposition(backend, SUPPORT_LIMIT as usize)?;
    let l = p.d4.anyon_ribbon_unit(&horizontal_ribbon(&p.lattice)?, 0, 1, (0, 0), (0, 0))?;
    s.project(&OpSum::from(l).eigen_projector(1))?;
    for t in &p.d4.vertex_terms {
        s.project(&t.projector.clone().into())?;
    }
    Ok(s)
}

/// Lattice realization of a logical anyon state of `Z(D4)`: each label's
/// ribbon between the rough boundaries acts on the vacuum.
pub fn realize_d4(p: &Patch, vacuum: &MixedRadixState, state: &LogicalAnyonState) -> Result<MixedRadixState> {
    let mut out = MixedRadixState::from_entries(vacuum.radices(), vacuum.backend(), vec![])?;
    for (label, z) in state.nonzero(1e-15) {
        let op: LinearOp = p.d4.logical_ribbon(&label.anyon)?;
        let mut t = vacuum.clone();
        t.apply(&op)?;
        out.axpy(z, &t)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anyon_algebra::{gauge_transform, interface, named_algebra};

    fn patch() -> Patch {
        Patch::new(1, 1).unwrap()
    }

    #[test]
    fn size_guard() {
        assert_eq!(estimated_support(&Lattice::new(1, 1).unwrap()), 16384);
        assert!(matches!(Patch::new(3, 3), Err(Error::TooLarge(_))));
    }

    #[test]
    fn flat_count_and_vacuum() {
        let p = patch();
        let flat = p.d4.flat_superposition(Backend::Sparse, 1 << 22).unwrap();
        assert_eq!(flat.support_size(), 32768);
        let omega = d4_vacuum(&p, Backend::Sparse).unwrap();
        let w0 = p.z4.prepare_omega0(Backend::Sparse).unwrap();
        let mut rec = Recorder::new(Mode::PostSelect, 0, false);
        rec.begin("g");
        let g = gauge_map(&p, &w0, &mut rec).unwrap();
        assert_eq!(g.support_size(), 16384);
        assert!((g.fidelity(&omega).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn gauged_s_x_matches_oracle() {
        let p = patch();
        let sx = p.z4.prepare_s_x(Backend::Sparse).unwrap();
        let mut rec = Recorder::new(Mode::PostSelect, 0, false);
        rec.begin("g");
        let g = gauge_map(&p, &sx, &mut rec).unwrap();
        for (name, v) in p.d4.check(&g).unwrap() {
            assert!((v - 1.0).abs() < 1e-10, "{name} {v}");
        }
        let (_, l1) = named_algebra("L1").unwrap();
        let oracle = gauge_transform(&LogicalAnyonState::s_x(), &interface("A").unwrap(), &l1).unwrap();
        let omega = d4_vacuum(&p, Backend::Sparse).unwrap();
        let target = realize_d4(&p, &omega, &oracle).unwrap();
        assert!((g.fidelity(&target).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn round_trip() {
        for f in ungauge_fidelities(&patch(), Backend::Sparse).unwrap() {
            assert!((f - 1.0).abs() < 1e-9);
        }
    }
}
