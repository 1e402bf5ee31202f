//! Direct `e^2` and `m^2` condensation of `|S_X>` in the Z4 code. Neither
//! yields `|T_X>`.

use crate::anyon_algebra::{run_sequence, LogicalAnyonState, Step};
use crate::engine::{gates, Backend, OpSum};
use crate::error::Result;
use crate::zn_code::StringKind;

use super::condense::oracle_vector;
use super::gauge::Patch;
use super::logical::{fidelity, t_x_state, LogicalFrame};

#[derive(Debug, Clone)]
pub struct ControlResult {
    /// Product of the per-edge projection probabilities.
    pub prob: f64,
    pub fidelity_t_x: f64,
    pub fidelity_oracle: f64,
    pub oracle: LogicalAnyonState,
}

/// Projects `(1 + O_l)/2` on every edge, then reads the logical qubit with
/// `X = M^mx` across and `Z = E^ez` up.
fn control(p: &Patch, backend: Backend, short: fn(usize) -> OpSum, mx: usize, ez: usize, iface: &str) -> Result<ControlResult> {
    let z4 = &p.z4;
    let mut s = z4.prepare_s_x(backend)?;
    let mut prob = 1.0;
    for q in 0..z4.num_sites() {
        prob *= s.project(&short(q).eigen_projector(1))?;
    }
    let frame = LogicalFrame::single(
        z4.string_op(StringKind::M, mx, &p.lattice.row_crossing(0)?)?.op(),
        z4.string_op(StringKind::E, ez, &p.lattice.vertical_path(0)?)?.op(),
    );
    let rho = frame.density(&s)?;
    let oracle = run_sequence(&LogicalAnyonState::s_x(), &[Step::Condense(iface.into())])?;
    Ok(ControlResult {
        prob,
        fidelity_t_x: fidelity(&rho, &t_x_state()),
        fidelity_oracle: fidelity(&rho, &oracle_vector(&oracle, 1)?),
        oracle,
    })
}

/// `e^2` condensation: `Z^2` on every edge.
pub fn e2_control(p: &Patch, backend: Backend) -> Result<ControlResult> {
    control(p, backend, |q| gates::clock(q, 4, 2).into(), 2, 1, "e2")
}

/// `m^2` condensation: `X^2` on every edge.
pub fn m2_control(p: &Patch, backend: Backend) -> Result<ControlResult> {
    control(p, backend, |q| gates::shift(q, 4, 2).into(), 1, 2, "m2")
}
