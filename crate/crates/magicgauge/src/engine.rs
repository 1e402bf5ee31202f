//! Mixed-radix state vectors with dense and sparse backends, local linear
//! operators, projections, measurements and site surgery.
//!
//! Basis states are addressed by a mixed-radix `u128` key with site 0 as the
//! fastest digit. Operators act on an ordered support of sites; their local
//! index uses the same convention (first support site fastest).

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap as StdMap;
use std::hash::BuildHasherDefault;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Fixed-key hasher so that iteration order, and with it floating-point
/// summation order, is reproducible across runs.
type HashMap<K, V> = StdMap<K, V, BuildHasherDefault<DefaultHasher>>;

/// Amplitudes below this magnitude are dropped by the sparse backend.
pub const PRUNE: f64 = 1e-14;
/// Largest register dimension the dense backend will allocate.
pub const DENSE_LIMIT: u128 = 1 << 26;
/// Smallest branch weight accepted by projections and forced measurements.
pub const MIN_BRANCH: f64 = 1e-24;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Dense,
    #[default]
    Sparse,
}

#[derive(Debug, Clone)]
enum Amps {
    Dense(Vec<C64>),
    Sparse(HashMap<u128, C64>),
}

#[derive(Debug, Clone)]
pub struct MixedRadixState {
    radices: Vec<usize>,
    strides: Vec<u128>,
    amps: Amps,
}

fn strides_of(radices: &[usize]) -> Result<(Vec<u128>, u128)> {
    let mut strides = Vec::with_capacity(radices.len());
    let mut acc: u128 = 1;
    for &r in radices {
        if r < 2 {
            return Err(Error::BadRadix(r));
        }
        strides.push(acc);
        acc = acc.checked_mul(r as u128).ok_or(Error::Overflow)?;
    }
    Ok((strides, acc))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    pub value: i8,
    pub prob: f64,
}

pub enum MeasureMode<'a> {
    Force(i8),
    Sample(&'a mut ChaCha8Rng),
}

impl MixedRadixState {
    /// All-zero basis state.
    pub fn new(radices: &[usize], backend: Backend) -> Result<Self> {
        let digits = vec![0; radices.len()];
        Self::basis(radices, &digits, backend)
    }

    pub fn basis(radices: &[usize], digits: &[usize], backend: Backend) -> Result<Self> {
        Self::from_entries(radices, backend, vec![(digits.to_vec(), cr(1.0))])
    }

    pub fn from_entries(
        radices: &[usize],
        backend: Backend,
        entries: Vec<(Vec<usize>, C64)>,
    ) -> Result<Self> {
        if radices.is_empty() {
            return Err(Error::EmptyRegister);
        }
        let (strides, total) = strides_of(radices)?;
        let amps = match backend {
            Backend::Dense => {
                if total > DENSE_LIMIT {
                    return Err(Error::TooLarge(total));
                }
                Amps::Dense(vec![C64::default(); total as usize])
            }
            Backend::Sparse => Amps::Sparse(HashMap::default()),
        };
        let mut s = Self { radices: radices.to_vec(), strides, amps };
        for (digits, a) in entries {
            if digits.len() != s.radices.len() {
                return Err(Error::ShapeMismatch);
            }
            for (i, (&d, &r)) in digits.iter().zip(&s.radices).enumerate() {
                if d >= r {
                    return Err(Error::Unmapped { site: i, digit: d });
                }
            }
            let k = s.key_of(&digits);
            s.add_amp(k, a);
        }
        s.prune();
        Ok(s)
    }

    /// Uniform superposition over every basis state of the register.
    pub fn uniform(radices: &[usize], backend: Backend) -> Result<Self> {
        let mut s = Self::new(radices, backend)?;
        for site in 0..radices.len() {
            let r = radices[site];
            let amp = cr(1.0 / (r as f64).sqrt());
            let op = LinearOp::from_fn(&[site], &[r], |_| (0..r).map(|o| (vec![o], amp)).collect())?;
            s.apply(&op)?;
        }
        Ok(s)
    }

    pub fn radices(&self) -> &[usize] {
        &self.radices
    }

    pub fn num_sites(&self) -> usize {
        self.radices.len()
    }

    pub fn backend(&self) -> Backend {
        match self.amps {
            Amps::Dense(_) => Backend::Dense,
            Amps::Sparse(_) => Backend::Sparse,
        }
    }

    pub fn dimension(&self) -> u128 {
        self.strides.last().copied().unwrap_or(1) * *self.radices.last().unwrap_or(&1) as u128
    }

    /// Number of stored nonzero amplitudes.
    pub fn support_size(&self) -> usize {
        match &self.amps {
            Amps::Dense(v) => v.iter().filter(|a| a.norm_sqr() > 0.0).count(),
            Amps::Sparse(m) => m.len(),
        }
    }

    /// Rough byte count of the amplitude storage.
    pub fn memory_bytes(&self) -> usize {
        match &self.amps {
            Amps::Dense(v) => v.len() * 16,
            Amps::Sparse(m) => m.capacity() * 40,
        }
    }

    pub fn key_of(&self, digits: &[usize]) -> u128 {
        digits.iter().zip(&self.strides).map(|(&d, &s)| d as u128 * s).sum()
    }

    pub fn digits_of(&self, key: u128) -> Vec<usize> {
        self.radices
            .iter()
            .zip(&self.strides)
            .map(|(&r, &s)| ((key / s) % r as u128) as usize)
            .collect()
    }

    #[inline]
    fn digit(&self, key: u128, site: usize) -> usize {
        ((key / self.strides[site]) % self.radices[site] as u128) as usize
    }

    fn add_amp(&mut self, key: u128, a: C64) {
        match &mut self.amps {
            Amps::Dense(v) => v[key as usize] += a,
            Amps::Sparse(m) => *m.entry(key).or_default() += a,
        }
    }

    fn prune(&mut self) {
        if let Amps::Sparse(m) = &mut self.amps {
            m.retain(|_, a| a.norm() >= PRUNE);
        }
    }

    /// Nonzero entries in ascending key order.
    pub fn entries(&self) -> Vec<(u128, C64)> {
        let mut out: Vec<(u128, C64)> = match &self.amps {
            Amps::Dense(v) => v
                .iter()
                .enumerate()
                .filter(|(_, a)| a.norm_sqr() > 0.0)
                .map(|(i, a)| (i as u128, *a))
                .collect(),
            Amps::Sparse(m) => m.iter().map(|(k, a)| (*k, *a)).collect(),
        };
        out.sort_unstable_by_key(|e| e.0);
        out
    }

    fn for_each(&self, mut f: impl FnMut(u128, C64)) {
        match &self.amps {
            Amps::Dense(v) => {
                for (i, a) in v.iter().enumerate() {
                    if a.re != 0.0 || a.im != 0.0 {
                        f(i as u128, *a)
                    }
                }
            }
            Amps::Sparse(m) => {
                for (k, a) in m {
                    f(*k, *a)
                }
            }
        }
    }

    fn empty_like(&self) -> Self {
        let amps = match &self.amps {
            Amps::Dense(v) => Amps::Dense(vec![C64::default(); v.len()]),
            Amps::Sparse(m) => Amps::Sparse(HashMap::with_capacity_and_hasher(m.len(), Default::default())),
        };
        Self { radices: self.radices.clone(), strides: self.strides.clone(), amps }
    }

    pub fn amplitude(&self, digits: &[usize]) -> C64 {
        let k = self.key_of(digits);
        match &self.amps {
            Amps::Dense(v) => v[k as usize],
            Amps::Sparse(m) => m.get(&k).copied().unwrap_or_default(),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        let mut n = 0.0;
        self.for_each(|_, a| n += a.norm_sqr());
        n
    }

    pub fn scale(&mut self, z: C64) {
        match &mut self.amps {
            Amps::Dense(v) => v.iter_mut().for_each(|a| *a *= z),
            Amps::Sparse(m) => m.values_mut().for_each(|a| *a *= z),
        }
        self.prune();
    }

    /// Normalizes in place and returns the previous squared norm.
    pub fn normalize(&mut self) -> Result<f64> {
        let n = self.norm_sqr();
        if n < MIN_BRANCH {
            return Err(Error::Annihilated(n));
        }
        self.scale(cr(1.0 / n.sqrt()));
        Ok(n)
    }

    /// `self += z * other`.
    pub fn axpy(&mut self, z: C64, other: &Self) -> Result<()> {
        if self.radices != other.radices {
            return Err(Error::ShapeMismatch);
        }
        other.for_each(|k, a| self.add_amp(k, z * a));
        self.prune();
        Ok(())
    }

    pub fn to_backend(&self, backend: Backend) -> Result<Self> {
        let mut out = match backend {
            Backend::Dense => {
                let total = self.dimension();
                if total > DENSE_LIMIT {
                    return Err(Error::TooLarge(total));
                }
                Self {
                    radices: self.radices.clone(),
                    strides: self.strides.clone(),
                    amps: Amps::Dense(vec![C64::default(); total as usize]),
                }
            }
            Backend::Sparse => Self {
                radices: self.radices.clone(),
                strides: self.strides.clone(),
                amps: Amps::Sparse(HashMap::default()),
            },
        };
        self.for_each(|k, a| out.add_amp(k, a));
        out.prune();
        Ok(out)
    }

    fn check_op(&self, op: &LinearOp) -> Result<()> {
        for (&s, &d) in op.support.iter().zip(&op.dims) {
            if s >= self.radices.len() {
                return Err(Error::SiteOutOfRange(s));
            }
            if self.radices[s] != d {
                return Err(Error::RadixMismatch { site: s, register: self.radices[s], op: d });
            }
        }
        Ok(())
    }

    /// Applies a local operator in place.
    pub fn apply(&mut self, op: &LinearOp) -> Result<()> {
        self.check_op(op)?;
        let offsets: Vec<u128> = (0..op.dim())
            .map(|l| {
                op.local_digits(l)
                    .iter()
                    .zip(&op.support)
                    .map(|(&d, &s)| d as u128 * self.strides[s])
                    .sum()
            })
            .collect();
        let lstrides = op.local_strides();
        let mut out = self.empty_like();
        self.for_each(|k, a| {
            let mut l = 0usize;
            for (i, &s) in op.support.iter().enumerate() {
                l += self.digit(k, s) * lstrides[i];
            }
            let base = k - offsets[l];
            for &(o, v) in &op.cols[l] {
                out.add_amp(base + offsets[o as usize], a * v);
            }
        });
        out.prune();
        *self = out;
        Ok(())
    }

    /// Applies the factors in order (first factor acts first).
    pub fn apply_circuit(&mut self, ops: &[LinearOp]) -> Result<()> {
        ops.iter().try_for_each(|op| self.apply(op))
    }

    pub fn apply_sum(&mut self, op: &OpSum) -> Result<()> {
        let mut out = self.empty_like();
        for (z, factors) in &op.terms {
            let mut t = self.clone();
            t.apply_circuit(factors)?;
            out.axpy(*z, &t)?;
        }
        *self = out;
        Ok(())
    }

    /// Projects with `p`, renormalizes and returns the branch probability.
    pub fn project(&mut self, p: &OpSum) -> Result<f64> {
        let before = self.norm_sqr();
        self.apply_sum(p)?;
        let after = self.norm_sqr();
        let prob = after / before;
        if prob < MIN_BRANCH {
            return Err(Error::Annihilated(prob));
        }
        self.normalize()?;
        Ok(prob)
    }

    /// Measures a ±1-valued observable, collapsing onto the chosen branch.
    pub fn measure(&mut self, obs: &OpSum, mode: MeasureMode<'_>) -> Result<Outcome> {
        let (plus, p_plus, minus, p_minus) = self.branches(obs)?;
        let value = match mode {
            MeasureMode::Force(v) => v,
            MeasureMode::Sample(rng) => {
                let u: f64 = rng.gen();
                if u < p_plus / (p_plus + p_minus) {
                    1
                } else {
                    -1
                }
            }
        };
        let (mut st, prob) = if value >= 0 { (plus, p_plus) } else { (minus, p_minus) };
        if prob < MIN_BRANCH {
            return Err(Error::ForcedBranch { outcome: value, prob });
        }
        st.normalize()?;
        *self = st;
        Ok(Outcome { value: if value >= 0 { 1 } else { -1 }, prob })
    }

    /// Unnormalized ±1 branches of `obs` and their probabilities.
    pub fn branches(&self, obs: &OpSum) -> Result<(Self, f64, Self, f64)> {
        let n = self.norm_sqr();
        let mut o = self.clone();
        o.apply_sum(obs)?;
        let mut plus = self.clone();
        plus.axpy(cr(1.0), &o)?;
        plus.scale(cr(0.5));
        let mut minus = self.clone();
        minus.axpy(cr(-1.0), &o)?;
        minus.scale(cr(0.5));
        let pp = plus.norm_sqr() / n;
        let pm = minus.norm_sqr() / n;
        Ok((plus, pp, minus, pm))
    }

    pub fn inner(&self, other: &Self) -> Result<C64> {
        if self.radices != other.radices {
            return Err(Error::ShapeMismatch);
        }
        let (small, big, flip) = if self.support_size() <= other.support_size() {
            (self, other, false)
        } else {
            (other, self, true)
        };
        let mut acc = C64::default();
        small.for_each(|k, a| {
            let b = match &big.amps {
                Amps::Dense(v) => v[k as usize],
                Amps::Sparse(m) => m.get(&k).copied().unwrap_or_default(),
            };
            acc += if flip { b.conj() * a } else { a.conj() * b };
        });
        Ok(acc)
    }

    pub fn fidelity(&self, other: &Self) -> Result<f64> {
        let ip = self.inner(other)?;
        Ok(ip.norm_sqr() / (self.norm_sqr() * other.norm_sqr()))
    }

    pub fn expectation(&self, op: &OpSum) -> Result<C64> {
        let mut t = self.clone();
        t.apply_sum(op)?;
        Ok(self.inner(&t)? / self.norm_sqr())
    }

    pub fn expectation_op(&self, op: &LinearOp) -> Result<C64> {
        let mut t = self.clone();
        t.apply(op)?;
        Ok(self.inner(&t)? / self.norm_sqr())
    }

    /// Reduced density matrix of one site.
    pub fn site_density(&self, site: usize) -> Result<Vec<Vec<C64>>> {
        if site >= self.radices.len() {
            return Err(Error::SiteOutOfRange(site));
        }
        let r = self.radices[site];
        let stride = self.strides[site];
        let mut groups: HashMap<u128, Vec<C64>> = HashMap::default();
        self.for_each(|k, a| {
            let d = self.digit(k, site);
            let rest = k - d as u128 * stride;
            groups.entry(rest).or_insert_with(|| vec![C64::default(); r])[d] = a;
        });
        let n = self.norm_sqr();
        let mut rho = vec![vec![C64::default(); r]; r];
        for v in groups.values() {
            for i in 0..r {
                for j in 0..r {
                    rho[i][j] += v[i] * v[j].conj();
                }
            }
        }
        for row in rho.iter_mut() {
            for x in row.iter_mut() {
                *x /= n;
            }
        }
        Ok(rho)
    }

    /// Removes a site that is in a product state with the rest. Returns the
    /// local state that was split off.
    pub fn drop_site(&mut self, site: usize) -> Result<Vec<C64>> {
        if self.radices.len() < 2 {
            return Err(Error::EmptyRegister);
        }
        let rho = self.site_density(site)?;
        let r = rho.len();
        let purity: f64 = (0..r)
            .flat_map(|i| (0..r).map(move |j| (i, j)))
            .map(|(i, j)| (rho[i][j] * rho[j][i]).re)
            .sum();
        if purity < 1.0 - 1e-9 {
            return Err(Error::Entangled { site, purity });
        }
        let k = (0..r)
            .max_by(|&a, &b| rho[a][a].re.partial_cmp(&rho[b][b].re).unwrap())
            .unwrap();
        let mut chi: Vec<C64> = (0..r).map(|i| rho[i][k]).collect();
        let nn: f64 = chi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        chi.iter_mut().for_each(|z| *z /= nn);

        let mut radices = self.radices.clone();
        radices.remove(site);
        let (strides, total) = strides_of(&radices)?;
        let stride = self.strides[site];
        let high = stride * self.radices[site] as u128;
        let amps = match &self.amps {
            Amps::Dense(_) => Amps::Dense(vec![C64::default(); total as usize]),
            Amps::Sparse(_) => Amps::Sparse(HashMap::default()),
        };
        let mut out = Self { radices, strides, amps };
        self.for_each(|key, a| {
            let d = self.digit(key, site);
            let low = key % stride;
            let hi = key / high;
            out.add_amp(low + hi * stride, chi[d].conj() * a);
        });
        out.prune();
        *self = out;
        Ok(chi)
    }

    /// Appends a new last site holding `local`.
    pub fn add_site(&mut self, radix: usize, local: &[C64]) -> Result<usize> {
        if local.len() != radix {
            return Err(Error::BadOperator("local state length differs from radix".into()));
        }
        let mut radices = self.radices.clone();
        radices.push(radix);
        let (strides, total) = strides_of(&radices)?;
        let amps = match &self.amps {
            Amps::Dense(_) => {
                if total > DENSE_LIMIT {
                    return Err(Error::TooLarge(total));
                }
                Amps::Dense(vec![C64::default(); total as usize])
            }
            Amps::Sparse(_) => Amps::Sparse(HashMap::default()),
        };
        let s = *strides.last().unwrap();
        let mut out = Self { radices, strides, amps };
        self.for_each(|k, a| {
            for (d, &b) in local.iter().enumerate() {
                if b.norm() > 0.0 {
                    out.add_amp(k + d as u128 * s, a * b);
                }
            }
        });
        out.prune();
        *self = out;
        Ok(self.radices.len() - 1)
    }

    /// Relabels the digits of one site and changes its radix. Digits mapped to
    /// `None` must carry no amplitude.
    pub fn remap_site(&mut self, site: usize, new_radix: usize, map: &[Option<usize>]) -> Result<()> {
        if site >= self.radices.len() {
            return Err(Error::SiteOutOfRange(site));
        }
        if map.len() != self.radices[site] {
            return Err(Error::BadOperator("remap table length differs from radix".into()));
        }
        if map.iter().flatten().any(|&d| d >= new_radix) {
            return Err(Error::BadOperator("remap image out of range".into()));
        }
        let mut radices = self.radices.clone();
        radices[site] = new_radix;
        let (strides, total) = strides_of(&radices)?;
        let amps = match &self.amps {
            Amps::Dense(_) => {
                if total > DENSE_LIMIT {
                    return Err(Error::TooLarge(total));
                }
                Amps::Dense(vec![C64::default(); total as usize])
            }
            Amps::Sparse(_) => Amps::Sparse(HashMap::default()),
        };
        let mut out = Self { radices, strides, amps };
        let mut err = None;
        let old_stride = self.strides[site];
        let new_stride = out.strides[site];
        let old_high = old_stride * self.radices[site] as u128;
        let new_high = new_stride * new_radix as u128;
        self.for_each(|k, a| {
            let d = self.digit(k, site);
            match map[d] {
                Some(nd) => {
                    let low = k % old_stride;
                    let hi = k / old_high;
                    out.add_amp(low + nd as u128 * new_stride + hi * new_high, a);
                }
                None => err = Some(Error::Unmapped { site, digit: d }),
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        *self = out;
        Ok(())
    }

    /// Tensor product with `other`; the sites of `other` are appended.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let mut radices = self.radices.clone();
        radices.extend_from_slice(&other.radices);
        let backend = if self.backend() == Backend::Dense && other.backend() == Backend::Dense {
            Backend::Dense
        } else {
            Backend::Sparse
        };
        let mut out = Self::from_entries(&radices, backend, vec![])?;
        let shift = self.dimension();
        self.for_each(|k1, a| {
            other.for_each(|k2, b| out.add_amp(k1 + k2 * shift, a * b));
        });
        out.prune();
        Ok(out)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let entries: Vec<(Vec<usize>, [f64; 2])> =
            self.entries().into_iter().map(|(k, a)| (self.digits_of(k), [a.re, a.im])).collect();
        serde_json::json!({
            "radices": self.radices,
            "backend": self.backend(),
            "entries": entries,
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        #[derive(Deserialize)]
        struct Raw {
            radices: Vec<usize>,
            backend: Backend,
            entries: Vec<(Vec<usize>, [f64; 2])>,
        }
        let raw: Raw = serde_json::from_value(v.clone()).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_entries(
            &raw.radices,
            raw.backend,
            raw.entries.into_iter().map(|(d, [re, im])| (d, c(re, im))).collect(),
        )
    }
}

/// Counts orbits of the valid basis configurations under a set of monomial
/// moves. A configuration is valid when every diagonal `constraint` has
/// eigenvalue 1 on it. For permutation-type vertex terms this is the
/// dimension of the joint +1 eigenspace.
pub fn orbit_count(radices: &[usize], constraints: &[LinearOp], moves: &[LinearOp]) -> Result<usize> {
    let (strides, total) = strides_of(radices)?;
    if total > DENSE_LIMIT {
        return Err(Error::TooLarge(total));
    }
    let n = total as usize;
    let local = |op: &LinearOp, k: usize| -> usize {
        let ls = op.local_strides();
        op.support
            .iter()
            .zip(&ls)
            .map(|(&s, &st)| ((k as u128 / strides[s]) % radices[s] as u128) as usize * st)
            .sum()
    };
    let offsets = |op: &LinearOp| -> Vec<usize> {
        (0..op.dim())
            .map(|l| op.local_digits(l).iter().zip(&op.support).map(|(&d, &s)| d * strides[s] as usize).sum())
            .collect()
    };
    let valid: Vec<bool> = (0..n)
        .map(|k| {
            constraints.iter().all(|c| {
                let l = local(c, k);
                (c.element(l, l) - cr(1.0)).norm() < 1e-9
            })
        })
        .collect();
    let mut parent: Vec<u32> = (0..n as u32).collect();
    fn find(p: &mut [u32], mut x: u32) -> u32 {
        while p[x as usize] != x {
            p[x as usize] = p[p[x as usize] as usize];
            x = p[x as usize];
        }
        x
    }
    for m in moves {
        let off = offsets(m);
        for k in 0..n {
            if !valid[k] {
                continue;
            }
            let l = local(m, k);
            let col = &m.cols[l];
            if col.len() != 1 {
                return Err(Error::BadOperator("orbit moves must be monomial".into()));
            }
            let k2 = k - off[l] + off[col[0].0 as usize];
            if !valid[k2] {
                return Err(Error::BadOperator("move leaves the valid set".into()));
            }
            let (a, b) = (find(&mut parent, k as u32), find(&mut parent, k2 as u32));
            if a != b {
                parent[a as usize] = b;
            }
        }
    }
    Ok((0..n).filter(|&k| valid[k] && find(&mut parent, k as u32) == k as u32).count())
}

/// Sparse matrix on an ordered set of sites, stored by input column.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct LinearOp {
    pub support: Vec<usize>,
    pub dims: Vec<usize>,
    cols: Vec<Vec<(u32, C64)>>,
    pub tag: String,
}

fn merge(col: &mut Vec<(u32, C64)>) {
    col.sort_unstable_by_key(|e| e.0);
    let mut out: Vec<(u32, C64)> = Vec::with_capacity(col.len());
    for &(o, v) in col.iter() {
        match out.last_mut() {
            Some(last) if last.0 == o => last.1 += v,
            _ => out.push((o, v)),
        }
    }
    out.retain(|e| e.1.norm() >= PRUNE);
    *col = out;
}

const OP_DIM_LIMIT: usize = 1 << 22;

impl LinearOp {
    fn validate(support: &[usize], dims: &[usize]) -> Result<usize> {
        if support.len() != dims.len() || support.is_empty() {
            return Err(Error::BadOperator("support and dims disagree".into()));
        }
        for (i, s) in support.iter().enumerate() {
            if support[..i].contains(s) {
                return Err(Error::DuplicateSite(*s));
            }
        }
        let mut dim = 1usize;
        for &d in dims {
            if d < 2 {
                return Err(Error::BadRadix(d));
            }
            dim = dim.checked_mul(d).ok_or(Error::Overflow)?;
        }
        if dim > OP_DIM_LIMIT {
            return Err(Error::BadOperator(format!("local dimension {dim} too large")));
        }
        Ok(dim)
    }

    /// Builds an operator from its action on each local basis input.
    pub fn from_fn<F>(support: &[usize], dims: &[usize], f: F) -> Result<Self>
    where
        F: Fn(&[usize]) -> Vec<(Vec<usize>, C64)>,
    {
        let dim = Self::validate(support, dims)?;
        let mut op = Self { support: support.to_vec(), dims: dims.to_vec(), cols: vec![], tag: String::new() };
        let mut cols = Vec::with_capacity(dim);
        for l in 0..dim {
            let digits = op.local_digits(l);
            let mut col: Vec<(u32, C64)> = f(&digits)
                .into_iter()
                .map(|(o, v)| (op.local_index(&o) as u32, v))
                .collect();
            merge(&mut col);
            cols.push(col);
        }
        op.cols = cols;
        Ok(op)
    }

    pub fn monomial<F>(support: &[usize], dims: &[usize], f: F) -> Result<Self>
    where
        F: Fn(&[usize]) -> Option<(Vec<usize>, C64)>,
    {
        Self::from_fn(support, dims, |d| f(d).into_iter().collect())
    }

    pub fn diagonal<F>(support: &[usize], dims: &[usize], f: F) -> Result<Self>
    where
        F: Fn(&[usize]) -> C64,
    {
        Self::from_fn(support, dims, |d| vec![(d.to_vec(), f(d))])
    }

    pub fn identity(support: &[usize], dims: &[usize]) -> Result<Self> {
        Self::diagonal(support, dims, |_| cr(1.0))
    }

    /// Dense matrix with `m[out][in]`.
    pub fn from_matrix(support: &[usize], dims: &[usize], m: &[Vec<C64>]) -> Result<Self> {
        let dim = Self::validate(support, dims)?;
        if m.len() != dim || m.iter().any(|r| r.len() != dim) {
            return Err(Error::BadOperator("matrix shape".into()));
        }
        let mut op = Self { support: support.to_vec(), dims: dims.to_vec(), cols: vec![], tag: String::new() };
        op.cols = (0..dim)
            .map(|i| {
                let mut col: Vec<(u32, C64)> = (0..dim).map(|o| (o as u32, m[o][i])).collect();
                merge(&mut col);
                col
            })
            .collect();
        Ok(op)
    }

    pub fn with_tag(mut self, tag: impl Into<String>) -> Self {
        self.tag = tag.into();
        self
    }

    /// Same operator with every site moved up by `offset`.
    pub fn shifted(&self, offset: usize) -> Self {
        let mut out = self.clone();
        out.support.iter_mut().for_each(|s| *s += offset);
        out
    }

    pub fn dim(&self) -> usize {
        self.dims.iter().product()
    }

    fn local_strides(&self) -> Vec<usize> {
        let mut acc = 1;
        self.dims
            .iter()
            .map(|&d| {
                let s = acc;
                acc *= d;
                s
            })
            .collect()
    }

    pub fn local_digits(&self, mut l: usize) -> Vec<usize> {
        self.dims
            .iter()
            .map(|&d| {
                let x = l % d;
                l /= d;
                x
            })
            .collect()
    }

    pub fn local_index(&self, digits: &[usize]) -> usize {
        digits.iter().zip(self.local_strides()).map(|(&d, s)| d * s).sum()
    }

    pub fn element(&self, out: usize, inp: usize) -> C64 {
        self.cols[inp]
            .iter()
            .find(|e| e.0 as usize == out)
            .map(|e| e.1)
            .unwrap_or_default()
    }

    pub fn to_matrix(&self) -> Vec<Vec<C64>> {
        let d = self.dim();
        let mut m = vec![vec![C64::default(); d]; d];
        for (i, col) in self.cols.iter().enumerate() {
            for &(o, v) in col {
                m[o as usize][i] = v;
            }
        }
        m
    }

    /// Same operator on a larger ordered support.
    pub fn embed(&self, support: &[usize], dims: &[usize]) -> Result<Self> {
        let dim = Self::validate(support, dims)?;
        let mut pos = Vec::with_capacity(self.support.len());
        for (&s, &d) in self.support.iter().zip(&self.dims) {
            let p = support
                .iter()
                .position(|&t| t == s)
                .ok_or_else(|| Error::BadOperator(format!("site {s} missing from embedding")))?;
            if dims[p] != d {
                return Err(Error::RadixMismatch { site: s, register: dims[p], op: d });
            }
            pos.push(p);
        }
        let mut big = Self { support: support.to_vec(), dims: dims.to_vec(), cols: vec![], tag: self.tag.clone() };
        let bstr = big.local_strides();
        let off: Vec<usize> = (0..self.dim())
            .map(|l| self.local_digits(l).iter().zip(&pos).map(|(&d, &p)| d * bstr[p]).sum())
            .collect();
        let mut cols = Vec::with_capacity(dim);
        for u in 0..dim {
            let bd = big.local_digits(u);
            let l: usize = pos.iter().zip(self.local_strides()).map(|(&p, s)| bd[p] * s).sum();
            let base = u - off[l];
            cols.push(self.cols[l].iter().map(|&(o, v)| ((base + off[o as usize]) as u32, v)).collect());
        }
        big.cols = cols;
        Ok(big)
    }

    fn union(&self, other: &Self) -> Result<(Vec<usize>, Vec<usize>)> {
        let mut support = self.support.clone();
        let mut dims = self.dims.clone();
        for (&s, &d) in other.support.iter().zip(&other.dims) {
            match support.iter().position(|&t| t == s) {
                Some(p) if dims[p] != d => {
                    return Err(Error::RadixMismatch { site: s, register: dims[p], op: d })
                }
                Some(_) => {}
                None => {
                    support.push(s);
                    dims.push(d);
                }
            }
        }
        Ok((support, dims))
    }

    /// `self * other` (other acts first).
    pub fn compose(&self, other: &Self) -> Result<Self> {
        let (support, dims) = self.union(other)?;
        let a = self.embed(&support, &dims)?;
        let b = other.embed(&support, &dims)?;
        let cols = b
            .cols
            .iter()
            .map(|col| {
                let mut out = vec![];
                for &(m, v) in col {
                    for &(o, w) in &a.cols[m as usize] {
                        out.push((o, w * v));
                    }
                }
                merge(&mut out);
                out
            })
            .collect();
        Ok(Self { support, dims, cols, tag: format!("{}*{}", self.tag, other.tag) })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let (support, dims) = self.union(other)?;
        let a = self.embed(&support, &dims)?;
        let b = other.embed(&support, &dims)?;
        let cols = a
            .cols
            .iter()
            .zip(&b.cols)
            .map(|(x, y)| {
                let mut col: Vec<(u32, C64)> = x.iter().chain(y.iter()).copied().collect();
                merge(&mut col);
                col
            })
            .collect();
        Ok(Self { support, dims, cols, tag: format!("{}+{}", self.tag, other.tag) })
    }

    pub fn scale(&self, z: C64) -> Self {
        let mut out = self.clone();
        for col in out.cols.iter_mut() {
            col.iter_mut().for_each(|e| e.1 *= z);
            merge(col);
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        let mut cols = vec![vec![]; self.dim()];
        for (i, col) in self.cols.iter().enumerate() {
            for &(o, v) in col {
                cols[o as usize].push((i as u32, v.conj()));
            }
        }
        cols.iter_mut().for_each(merge);
        Self { support: self.support.clone(), dims: self.dims.clone(), cols, tag: format!("{}^dag", self.tag) }
    }

    pub fn pow(&self, k: u32) -> Result<Self> {
        let mut out = Self::identity(&self.support, &self.dims)?;
        for _ in 0..k {
            out = self.compose(&out)?;
        }
        out.tag = format!("{}^{k}", self.tag);
        Ok(out)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> Result<bool> {
        let (support, dims) = self.union(other)?;
        let a = self.embed(&support, &dims)?;
        let b = other.embed(&support, &dims)?;
        let diff = a.add(&b.scale(cr(-1.0)))?;
        Ok(diff.cols.iter().flatten().all(|e| e.1.norm() <= tol))
    }

    pub fn commutes_with(&self, other: &Self, tol: f64) -> Result<bool> {
        self.compose(other)?.approx_eq(&other.compose(self)?, tol)
    }

    pub fn is_projector(&self, tol: f64) -> Result<bool> {
        Ok(self.compose(self)?.approx_eq(self, tol)? && self.adjoint().approx_eq(self, tol)?)
    }

    pub fn is_unitary(&self, tol: f64) -> Result<bool> {
        let id = Self::identity(&self.support, &self.dims)?;
        self.adjoint().compose(self)?.approx_eq(&id, tol)
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.element(i, i)).sum()
    }
}

/// Linear combination of operator products. Each product lists its factors in
/// application order.
#[derive(Debug, Clone, Default)]
pub struct OpSum {
    pub terms: Vec<(C64, Vec<LinearOp>)>,
}

impl From<LinearOp> for OpSum {
    fn from(op: LinearOp) -> Self {
        Self { terms: vec![(cr(1.0), vec![op])] }
    }
}

impl OpSum {
    pub fn identity() -> Self {
        Self { terms: vec![(cr(1.0), vec![])] }
    }

    pub fn zero() -> Self {
        Self { terms: vec![] }
    }

    pub fn product(factors: Vec<LinearOp>) -> Self {
        Self { terms: vec![(cr(1.0), factors)] }
    }

    pub fn scale(mut self, z: C64) -> Self {
        self.terms.iter_mut().for_each(|t| t.0 *= z);
        self
    }

    pub fn plus(mut self, other: &Self) -> Self {
        self.terms.extend(other.terms.iter().cloned());
        self
    }

    /// `self * other` (other acts first).
    pub fn then(&self, other: &Self) -> Self {
        let mut terms = vec![];
        for (a, fa) in &self.terms {
            for (b, fb) in &other.terms {
                let mut f = fb.clone();
                f.extend(fa.iter().cloned());
                terms.push((a * b, f));
            }
        }
        Self { terms }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|(z, f)| (z.conj(), f.iter().rev().map(|o| o.adjoint()).collect()))
                .collect(),
        }
    }

    pub fn shifted(&self, offset: usize) -> Self {
        Self { terms: self.terms.iter().map(|(z, f)| (*z, f.iter().map(|o| o.shifted(offset)).collect())).collect() }
    }

    /// `(1 + sign * self) / 2` for an involution.
    pub fn eigen_projector(&self, sign: i8) -> Self {
        Self::identity().scale(cr(0.5)).plus(&self.clone().scale(cr(0.5 * sign as f64)))
    }
}

pub mod gates {
    //! Common single- and two-site operators.
    use super::*;

    pub fn shift(site: usize, n: usize, k: usize) -> LinearOp {
        LinearOp::monomial(&[site], &[n], |d| Some((vec![(d[0] + k) % n], cr(1.0))))
            .unwrap()
            .with_tag(format!("X{site}^{k}"))
    }

    pub fn clock(site: usize, n: usize, k: usize) -> LinearOp {
        LinearOp::diagonal(&[site], &[n], |d| root(n, (d[0] * k) as i64))
            .unwrap()
            .with_tag(format!("Z{site}^{k}"))
    }

    pub fn charge_conj(site: usize, n: usize) -> LinearOp {
        LinearOp::monomial(&[site], &[n], |d| Some((vec![(n - d[0]) % n], cr(1.0))))
            .unwrap()
            .with_tag(format!("C{site}"))
    }

    pub fn x(site: usize) -> LinearOp {
        shift(site, 2, 1)
    }

    pub fn z(site: usize) -> LinearOp {
        clock(site, 2, 1)
    }

    pub fn hadamard(site: usize) -> LinearOp {
        let h = cr(std::f64::consts::FRAC_1_SQRT_2);
        LinearOp::from_matrix(&[site], &[2], &[vec![h, h], vec![h, -h]]).unwrap().with_tag(format!("H{site}"))
    }

    pub fn cz(a: usize, b: usize) -> LinearOp {
        LinearOp::diagonal(&[a, b], &[2, 2], |d| cr(if d[0] & d[1] == 1 { -1.0 } else { 1.0 }))
            .unwrap()
            .with_tag(format!("CZ{a},{b}"))
    }

    /// `|value><value|_control (x) target + (1 - |value><value|) (x) 1`.
    pub fn controlled(control: usize, control_dim: usize, value: usize, target: &LinearOp) -> Result<LinearOp> {
        let mut support = vec![control];
        support.extend_from_slice(&target.support);
        let mut dims = vec![control_dim];
        dims.extend_from_slice(&target.dims);
        LinearOp::from_fn(&support, &dims, |d| {
            if d[0] == value {
                let l = target.local_index(&d[1..]);
                (0..target.dim())
                    .map(|o| (o, target.element(o, l)))
                    .filter(|e| e.1.norm() > 0.0)
                    .map(|(o, v)| {
                        let mut out = vec![d[0]];
                        out.extend(target.local_digits(o));
                        (out, v)
                    })
                    .collect()
            } else {
                vec![(d.to_vec(), cr(1.0))]
            }
        })
        .map(|op| op.with_tag(format!("C[{}]{}", control, target.tag)))
    }

    /// `exp(2 pi i k / n)`.
    pub fn root(n: usize, k: i64) -> C64 {
        let k = k.rem_euclid(n as i64);
        match (n, k) {
            (_, 0) => cr(1.0),
            (4, 1) => c(0.0, 1.0),
            (4, 2) | (2, 1) => cr(-1.0),
            (4, 3) => c(0.0, -1.0),
            _ => C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / n as f64),
        }
    }

    /// Product of single-qubit Paulis as a factor list.
    pub fn pauli_string(xs: &[usize], zs: &[usize]) -> OpSum {
        let mut f: Vec<LinearOp> = zs.iter().map(|&s| z(s)).collect();
        f.extend(xs.iter().map(|&s| x(s)));
        OpSum::product(f)
    }
}

#[cfg(test)]
mod tests {
    use super::gates::*;
    use super::*;
    use rand::SeedableRng;

    fn close(a: C64, b: C64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn shift_and_clock_commute_up_to_root() {
        let x = shift(0, 4, 1);
        let z = clock(0, 4, 1);
        let zx = z.compose(&x).unwrap();
        let xz = x.compose(&z).unwrap().scale(c(0.0, 1.0));
        assert!(zx.approx_eq(&xz, 1e-12).unwrap());
    }

    #[test]
    fn dense_and_sparse_agree() {
        let r = [4, 2, 3];
        for backend in [Backend::Dense, Backend::Sparse] {
            let mut s = MixedRadixState::uniform(&r, backend).unwrap();
            s.apply(&clock(0, 4, 1)).unwrap();
            s.apply(&shift(2, 3, 2)).unwrap();
            assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
            assert!(close(s.amplitude(&[1, 0, 2]), c(0.0, 1.0 / 24f64.sqrt())));
        }
    }

    #[test]
    fn drop_site_recovers_product_factor() {
        let mut s = MixedRadixState::new(&[2, 3], Backend::Sparse).unwrap();
        s.apply(&hadamard(0)).unwrap();
        s.apply(&shift(1, 3, 1)).unwrap();
        let chi = s.drop_site(1).unwrap();
        assert!(close(chi[1], cr(1.0)));
        assert_eq!(s.radices(), &[2]);
        assert!(close(s.amplitude(&[1]), cr(std::f64::consts::FRAC_1_SQRT_2)));
    }

    #[test]
    fn drop_entangled_site_fails() {
        let mut s = MixedRadixState::new(&[2, 2], Backend::Dense).unwrap();
        s.apply(&hadamard(0)).unwrap();
        s.apply(&controlled(0, 2, 1, &x(1)).unwrap()).unwrap();
        assert!(matches!(s.drop_site(0), Err(Error::Entangled { .. })));
    }

    #[test]
    fn remap_qudit_to_qubit() {
        let mut s = MixedRadixState::basis(&[4, 2], &[2, 1], Backend::Sparse).unwrap();
        s.remap_site(0, 2, &[Some(0), None, Some(1), None]).unwrap();
        assert!(close(s.amplitude(&[1, 1]), cr(1.0)));
        let mut t = MixedRadixState::basis(&[4], &[1], Backend::Sparse).unwrap();
        assert!(t.remap_site(0, 2, &[Some(0), None, Some(1), None]).is_err());
    }

    #[test]
    fn forced_measurement_of_zero_branch_errors() {
        let mut s = MixedRadixState::new(&[2], Backend::Sparse).unwrap();
        let r = s.measure(&z(0).into(), MeasureMode::Force(-1));
        assert!(matches!(r, Err(Error::ForcedBranch { .. })));
    }

    #[test]
    fn sampling_is_reproducible() {
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..20)
                .map(|_| {
                    let mut s = MixedRadixState::new(&[2], Backend::Sparse).unwrap();
                    s.apply(&hadamard(0)).unwrap();
                    s.measure(&z(0).into(), MeasureMode::Sample(&mut rng)).unwrap().value
                })
                .collect::<Vec<_>>()
        };
        assert_eq!(run(3), run(3));
    }

    #[test]
    fn json_roundtrip() {
        let mut s = MixedRadixState::uniform(&[2, 4], Backend::Sparse).unwrap();
        s.apply(&clock(1, 4, 1)).unwrap();
        let t = MixedRadixState::from_json(&s.to_json()).unwrap();
        assert!((s.fidelity(&t).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn op_sum_projector() {
        let mut s = MixedRadixState::new(&[2], Backend::Dense).unwrap();
        s.apply(&hadamard(0)).unwrap();
        let p = s.project(&OpSum::from(z(0)).eigen_projector(-1)).unwrap();
        assert!((p - 0.5).abs() < 1e-12);
        assert!(close(s.amplitude(&[1]), cr(1.0)));
    }
}
