//! T-gate teleportation into a standard qubit surface code block.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{cr, gates, Backend, MixedRadixState, C64};
use crate::error::Result;
use crate::zn_code::ZnCode;

use super::condense::zn_frame;
use super::logical::{apply_matrix, fidelity, logical_unitary, phase_matrix, state_unitary, LogicalFrame, Matrix};
use super::record::Recorder;

/// Which magic state the block holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MagicKind {
    /// `(|+> + e^{i pi/4}|->) / sqrt 2`, consumed through `CZ` and an `X`
    /// measurement.
    TX,
    /// `(|0> + e^{i pi/4}|1>) / sqrt 2`, consumed through `CNOT` and a `Z`
    /// measurement.
    T,
}

/// Register holding the magic state and the logical operators addressing it.
#[derive(Debug, Clone)]
pub struct MagicBlock {
    pub state: MixedRadixState,
    pub frame: LogicalFrame,
    /// Sites of the `Z` string, used for the transversal `CZ`.
    pub z_sites: Vec<usize>,
    pub kind: MagicKind,
}

/// Input logical state of the target block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PsiSpec {
    Zero,
    Plus,
    Random,
}

/// Target block: a qubit surface code on the same patch.
pub struct PsiBlock {
    pub code: ZnCode,
    pub state: MixedRadixState,
    pub frame: LogicalFrame,
    /// Logical preparation unitary applied to `|0>`.
    pub u: Matrix,
}

impl PsiBlock {
    /// Projects `|0...0>` onto the code space and applies the logical `u`.
    pub fn new(code: &ZnCode, u: Matrix, backend: Backend) -> Result<Self> {
        let mut state = MixedRadixState::new(&code.radices(), backend)?;
        code.project_code_space(&mut state)?;
        let frame = zn_frame(code)?;
        state.apply_sum(&logical_unitary(&frame, 0, &u))?;
        Ok(Self { code: code.clone(), state, frame, u })
    }

    pub fn unitary(spec: PsiSpec, rng: &mut impl Rng) -> Matrix {
        match spec {
            PsiSpec::Zero => state_unitary(0.0, 0.0),
            PsiSpec::Plus => state_unitary(FRAC_PI_2, 0.0),
            PsiSpec::Random => {
                let (u, v): (f64, f64) = (rng.gen(), rng.gen());
                state_unitary((1.0 - 2.0 * u).acos(), 2.0 * PI * v)
            }
        }
    }

    /// `T u |0>`.
    pub fn target(&self) -> Vec<C64> {
        apply_matrix(&phase_matrix(FRAC_PI_4), &apply_matrix(&self.u, &[cr(1.0), cr(0.0)]))
    }

    fn z_sites(&self) -> Result<Vec<usize>> {
        let z = self.code.logical_z()?;
        z.path.iter().map(|(l, _)| self.code.site(*l)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TeleportResult {
    pub outcome: i8,
    pub prob: f64,
    /// True when the `S` correction was applied.
    pub corrected: bool,
    pub fidelity: f64,
    /// Smallest `(1 + <S>) / 2` over the target block's stabilizers.
    pub min_stabilizer: f64,
}

/// Runs the teleportation circuit on `psi (x) magic`. `outcome` forces the
/// magic-block measurement; `None` samples it.
pub fn teleport_t(psi: &PsiBlock, magic: &MagicBlock, outcome: Option<i8>, rec: &mut Recorder) -> Result<TeleportResult> {
    let n = psi.state.num_sites();
    let mut s = psi.state.tensor(&magic.state)?;
    let zp = &psi.frame.zs[0];
    let obs = match magic.kind {
        MagicKind::TX => {
            for i in psi.z_sites()? {
                for &j in &magic.z_sites {
                    s.apply(&gates::cz(i, j + n))?;
                }
            }
            magic.frame.xs[0].shifted(n)
        }
        MagicKind::T => {
            let cnot = zp
                .eigen_projector(1)
                .plus(&zp.eigen_projector(-1).then(&magic.frame.xs[0].shifted(n)));
            s.apply_sum(&cnot)?;
            magic.frame.zs[0].shifted(n)
        }
    };
    rec.observe(&s);
    let out = rec.branch(&mut s, &obs, outcome)?;
    let corrected = out.value < 0;
    if corrected {
        s.apply_sum(&logical_unitary(&psi.frame, 0, &phase_matrix(FRAC_PI_2)))?;
    }
    let rho = psi.frame.density(&s)?;
    let min_stabilizer = psi.code.check(&s)?.into_iter().map(|x| x.1).fold(1.0, f64::min);
    Ok(TeleportResult { outcome: out.value, prob: out.prob, corrected, fidelity: fidelity(&rho, &psi.target()), min_stabilizer })
}
