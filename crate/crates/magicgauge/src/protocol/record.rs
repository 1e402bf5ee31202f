//! Stage records, the run report, and the measurement recorder that applies
//! post-selection or seeded sampling.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{MeasureMode, MixedRadixState, OpSum, Outcome};
use crate::error::Result;

pub const TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Mode {
    #[default]
    #[serde(rename = "post-select")]
    PostSelect,
    #[serde(rename = "sample")]
    Sample,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `value` is within `tol` of `expected`.
    pub fn near(name: impl Into<String>, value: f64, expected: f64, tol: f64) -> Self {
        Self { name: name.into(), value, pass: (value - expected).abs() <= tol }
    }

    pub fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self { name: name.into(), value, pass: value >= bound }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
pub struct Memory {
    pub peak_support: usize,
    pub peak_bytes: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct StageRecord {
    pub stage: String,
    pub checks: Vec<Check>,
    pub branch_probs: Vec<f64>,
    pub cumulative_prob: f64,
    pub fidelity_oracle: Option<f64>,
    pub fidelity_target: Option<f64>,
    pub timing: Option<f64>,
    pub memory: Memory,
    pub notes: Vec<String>,
}

impl StageRecord {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
            && self.fidelity_oracle.map_or(true, |f| f >= 1.0 - TOL)
            && self.fidelity_target.map_or(true, |f| f >= 1.0 - TOL)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

pub struct Recorder {
    pub mode: Mode,
    rng: ChaCha8Rng,
    pub cumulative_prob: f64,
    pub stages: Vec<StageRecord>,
    pub record_timing: bool,
    forced: bool,
    current: Option<(StageRecord, Instant)>,
}

impl Recorder {
    pub fn new(mode: Mode, seed: u64, record_timing: bool) -> Self {
        Self {
            mode,
            rng: ChaCha8Rng::seed_from_u64(seed),
            cumulative_prob: 1.0,
            stages: vec![],
            record_timing,
            forced: false,
            current: None,
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// True when outcomes are forced to `+1`.
    pub fn post_selecting(&self) -> bool {
        self.mode == Mode::PostSelect || self.forced
    }

    pub fn set_forced(&mut self, forced: bool) {
        self.forced = forced;
    }

    pub fn begin(&mut self, stage: &str) {
        let rec = StageRecord {
            stage: stage.into(),
            checks: vec![],
            branch_probs: vec![],
            cumulative_prob: self.cumulative_prob,
            fidelity_oracle: None,
            fidelity_target: None,
            timing: None,
            memory: Memory::default(),
            notes: vec![],
        };
        self.current = Some((rec, Instant::now()));
    }

    fn cur(&mut self) -> &mut StageRecord {
        &mut self.current.as_mut().expect("no open stage").0
    }

    /// Measures a `±1` observable, forcing `+1` when post-selecting. Only
    /// forced outcomes enter the cumulative probability.
    pub fn measure(&mut self, state: &mut MixedRadixState, obs: &OpSum) -> Result<Outcome> {
        let out = if self.post_selecting() {
            state.measure(obs, MeasureMode::Force(1))?
        } else {
            state.measure(obs, MeasureMode::Sample(&mut self.rng))?
        };
        if self.post_selecting() {
            self.cumulative_prob *= out.prob;
        }
        log::debug!("outcome {} with probability {:.6e}", out.value, out.prob);
        self.cur().branch_probs.push(out.prob);
        Ok(out)
    }

    /// Measurement whose both outcomes are kept: forces `outcome` or samples
    /// when it is `None`. The probability is recorded but does not enter the
    /// cumulative post-selection probability.
    pub fn branch(&mut self, state: &mut MixedRadixState, obs: &OpSum, outcome: Option<i8>) -> Result<Outcome> {
        let out = match outcome {
            Some(v) => state.measure(obs, MeasureMode::Force(v))?,
            None => state.measure(obs, MeasureMode::Sample(&mut self.rng))?,
        };
        self.cur().branch_probs.push(out.prob);
        Ok(out)
    }

    /// Deterministic projection whose probability enters the record.
    pub fn project(&mut self, state: &mut MixedRadixState, p: &OpSum) -> Result<f64> {
        let prob = state.project(p)?;
        self.cumulative_prob *= prob;
        self.cur().branch_probs.push(prob);
        Ok(prob)
    }

    pub fn observe(&mut self, state: &MixedRadixState) {
        let m = &mut self.cur().memory;
        m.peak_support = m.peak_support.max(state.support_size());
        m.peak_bytes = m.peak_bytes.max(state.memory_bytes());
    }

    pub fn check(&mut self, c: Check) {
        self.cur().checks.push(c);
    }

    pub fn note(&mut self, s: impl Into<String>) {
        let s = s.into();
        log::info!("{s}");
        self.cur().notes.push(s);
    }

    pub fn set_oracle(&mut self, f: f64) {
        self.cur().fidelity_oracle = Some(f);
    }

    pub fn set_target(&mut self, f: f64) {
        self.cur().fidelity_target = Some(f);
    }

    pub fn end(&mut self) -> &StageRecord {
        let (mut rec, t0) = self.current.take().expect("no open stage");
        rec.cumulative_prob = self.cumulative_prob;
        if self.record_timing {
            rec.timing = Some(t0.elapsed().as_secs_f64());
        }
        log::info!(
            "stage {}: cumulative probability {:.6e}, oracle {:?}, target {:?}",
            rec.stage,
            rec.cumulative_prob,
            rec.fidelity_oracle,
            rec.fidelity_target
        );
        self.stages.push(rec);
        self.stages.last().unwrap()
    }

    /// Discards the open stage and restores the probability it started from.
    pub fn abort(&mut self) {
        if let Some((rec, _)) = self.current.take() {
            self.cumulative_prob = rec.cumulative_prob;
        }
    }

    pub fn last(&self) -> Option<&StageRecord> {
        self.stages.last()
    }
}
