//! Anyon theories, condensable algebras, interface tables and the symbolic
//! transformer for logical states written as sums of logical-operator labels.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use serde::Serialize;

use crate::engine::{cr, gates, C64};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct Anyon {
    pub label: String,
    pub dim: usize,
    pub spin: C64,
    /// Conjugacy class and centralizer irrep for quantum-double anyons.
    pub group_label: Option<(String, String)>,
    /// Exponents `(e_1, m_1, e_2, m_2, ...)` for abelian gauge theories.
    pub charge: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnyonTheory {
    pub name: String,
    /// Modulus and number of copies for `Z(Z_N^k)`; `None` for `Z(D4)`.
    pub abelian: Option<(usize, usize)>,
    pub anyons: Vec<Anyon>,
}

fn canon(label: &str) -> String {
    label.replace(['_', ' ', '\''], "").replace('′', "")
}

impl AnyonTheory {
    pub fn total_dimension(&self) -> f64 {
        (self.anyons.iter().map(|a| (a.dim * a.dim) as f64).sum::<f64>()).sqrt()
    }

    pub fn get(&self, label: &str) -> Result<&Anyon> {
        let key = canon(label);
        if let Some(a) = self.anyons.iter().find(|a| canon(&a.label) == key) {
            return Ok(a);
        }
        if let Some((n, k)) = self.abelian {
            let ch = parse_abelian(&key, n, k)?;
            return self
                .anyons
                .iter()
                .find(|a| a.charge.as_ref() == Some(&ch))
                .ok_or_else(|| Error::UnknownAnyon(label.into()));
        }
        Err(Error::UnknownAnyon(label.into()))
    }

    /// Canonical label.
    pub fn resolve(&self, label: &str) -> Result<String> {
        Ok(self.get(label)?.label.clone())
    }

    /// Full monodromy phase for abelian anyons.
    pub fn braiding(&self, a: &str, b: &str) -> Result<Option<C64>> {
        let (x, y) = (self.get(a)?, self.get(b)?);
        if let (Some((n, _)), Some(ca), Some(cb)) = (self.abelian, &x.charge, &y.charge) {
            let mut k = 0i64;
            for i in (0..ca.len()).step_by(2) {
                k += (ca[i] * cb[i + 1] + ca[i + 1] * cb[i]) as i64;
            }
            return Ok(Some(gates::root(n, k)));
        }
        if self.abelian.is_none() && x.dim == 1 && y.dim == 1 {
            // one-dimensional D4 anyons: central fluxes carrying one-dimensional charges
            let g = crate::quantum_double::d4_group();
            let part = |an: &Anyon| {
                let (cl, ir) = an.group_label.clone().unwrap();
                let ci = g.class(&cl).unwrap();
                let ii = g.classes[ci].irreps.iter().position(|i| i.name == ir).unwrap();
                (g.classes[ci].elements[0], &g.classes[ci].irreps[ii])
            };
            let (ga, ia) = part(x);
            let (gb, ib) = part(y);
            return Ok(Some(ia.character(gb).unwrap().conj() * ib.character(ga).unwrap().conj()));
        }
        Ok(None)
    }

    /// Fusion product for abelian theories.
    pub fn fuse(&self, a: &str, b: &str) -> Result<Option<String>> {
        let (x, y) = (self.get(a)?, self.get(b)?);
        if let (Some((n, _)), Some(ca), Some(cb)) = (self.abelian, &x.charge, &y.charge) {
            let c: Vec<usize> = ca.iter().zip(cb).map(|(p, q)| (p + q) % n).collect();
            return Ok(self.anyons.iter().find(|z| z.charge.as_ref() == Some(&c)).map(|z| z.label.clone()));
        }
        Ok(None)
    }
}

fn parse_abelian(key: &str, n: usize, k: usize) -> Result<Vec<usize>> {
    let mut ch = vec![0; 2 * k];
    if key == "1" {
        return Ok(ch);
    }
    let bad = || Error::UnknownAnyon(key.into());
    let chars: Vec<char> = key.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let t = chars[i];
        i += 1;
        let mut num = String::new();
        while i < chars.len() && chars[i].is_ascii_digit() {
            num.push(chars[i]);
            i += 1;
        }
        let v: Option<usize> = if num.is_empty() { None } else { Some(num.parse().map_err(|_| bad())?) };
        let (copy, power) = if k == 1 {
            (0, v.unwrap_or(1))
        } else {
            (v.ok_or_else(bad)?.checked_sub(1).ok_or_else(bad)?, 1)
        };
        if copy >= k {
            return Err(bad());
        }
        match t {
            'e' => ch[2 * copy] = (ch[2 * copy] + power) % n,
            'm' => ch[2 * copy + 1] = (ch[2 * copy + 1] + power) % n,
            'f' => {
                ch[2 * copy] = (ch[2 * copy] + power) % n;
                ch[2 * copy + 1] = (ch[2 * copy + 1] + power) % n;
            }
            _ => return Err(bad()),
        }
    }
    Ok(ch)
}

fn abelian_label(ch: &[usize], n: usize, k: usize) -> String {
    let mut s = String::new();
    for c in 0..k {
        let (e, m) = (ch[2 * c], ch[2 * c + 1]);
        if k == 1 {
            let p = |t: &str, x: usize| match x {
                0 => String::new(),
                1 => t.to_string(),
                x => format!("{t}{x}"),
            };
            if n == 2 && e == 1 && m == 1 {
                s.push('f');
            } else {
                s.push_str(&p("e", e));
                s.push_str(&p("m", m));
            }
        } else {
            let i = c + 1;
            match (e, m) {
                (0, 0) => {}
                (1, 0) => s.push_str(&format!("e{i}")),
                (0, 1) => s.push_str(&format!("m{i}")),
                _ => s.push_str(&format!("f{i}")),
            }
        }
    }
    if s.is_empty() {
        "1".into()
    } else {
        s
    }
}

/// `Z(Z_n^k)` with anyons `e_i^a m_i^b`.
pub fn abelian_theory(name: &str, n: usize, k: usize) -> AnyonTheory {
    let mut anyons = vec![];
    let total = n.pow(2 * k as u32);
    for idx in 0..total {
        let ch: Vec<usize> = (0..2 * k).map(|i| (idx / n.pow(i as u32)) % n).collect();
        let mut kk = 0i64;
        for c in 0..k {
            kk += (ch[2 * c] * ch[2 * c + 1]) as i64;
        }
        anyons.push(Anyon { label: abelian_label(&ch, n, k), dim: 1, spin: gates::root(n, kk), group_label: None, charge: Some(ch) });
    }
    anyons.sort_by_key(|a| {
        let ch = a.charge.clone().unwrap();
        (ch.iter().filter(|&&x| x != 0).count(), ch.iter().rev().cloned().collect::<Vec<_>>())
    });
    AnyonTheory { name: name.into(), abelian: Some((n, k)), anyons }
}

/// The 22 anyons of the D4 quantum double with their twisted `Z2^3` labels.
pub fn d4_theory() -> AnyonTheory {
    let i = C64::new(0.0, 1.0);
    let rows: [(&str, &str, &str, usize, C64); 22] = [
        ("1", "J0", "1", 1, cr(1.0)),
        ("1", "J1", "e_RG", 1, cr(1.0)),
        ("1", "J2", "e_R", 1, cr(1.0)),
        ("1", "J3", "e_G", 1, cr(1.0)),
        ("1", "alpha", "m_B", 2, cr(1.0)),
        ("r2", "J0", "e_RGB", 1, cr(1.0)),
        ("r2", "J1", "e_B", 1, cr(1.0)),
        ("r2", "J2", "e_GB", 1, cr(1.0)),
        ("r2", "J3", "e_RB", 1, cr(1.0)),
        ("r2", "alpha", "f_B", 2, cr(-1.0)),
        ("r", "w0", "m_RG", 2, cr(1.0)),
        ("r", "w1", "s_RGB", 2, i),
        ("r", "w2", "f_RG", 2, cr(-1.0)),
        ("r", "w3", "sbar_RGB", 2, -i),
        ("s", "A0", "m_GB", 2, cr(1.0)),
        ("s", "A1", "f_G", 2, cr(-1.0)),
        ("s", "A2", "m_G", 2, cr(1.0)),
        ("s", "A3", "f_GB", 2, cr(-1.0)),
        ("rs", "A0", "m_RB", 2, cr(1.0)),
        ("rs", "A1", "f_R", 2, cr(-1.0)),
        ("rs", "A2", "m_R", 2, cr(1.0)),
        ("rs", "A3", "f_RB", 2, cr(-1.0)),
    ];
    AnyonTheory {
        name: "ZD4".into(),
        abelian: None,
        anyons: rows
            .iter()
            .map(|&(cl, ir, l, d, t)| Anyon { label: l.into(), dim: d, spin: t, group_label: Some((cl.into(), ir.into())), charge: None })
            .collect(),
    }
}

pub fn builtin_theories() -> Vec<AnyonTheory> {
    vec![abelian_theory("ZZ2", 2, 1), abelian_theory("ZZ4", 4, 1), abelian_theory("ZZ22", 2, 2), d4_theory()]
}

pub fn theory(name: &str) -> Result<AnyonTheory> {
    builtin_theories().into_iter().find(|t| t.name == name).ok_or_else(|| Error::UnknownTheory(name.into()))
}

#[derive(Debug, Clone, Serialize)]
pub struct CondensableAlgebra {
    pub theory: String,
    pub members: Vec<(String, usize)>,
}

impl CondensableAlgebra {
    pub fn new(theory: &AnyonTheory, members: &[(&str, usize)]) -> Result<Self> {
        let mut out: Vec<(String, usize)> = vec![];
        for &(l, n) in members {
            let l = theory.resolve(l)?;
            match out.iter_mut().find(|m| m.0 == l) {
                Some(m) => m.1 += n,
                None => out.push((l, n)),
            }
        }
        Ok(Self { theory: theory.name.clone(), members: out })
    }

    /// Parses `1+e_R+m_B+2m_RG`.
    pub fn parse(theory: &AnyonTheory, s: &str) -> Result<Self> {
        let mut members = vec![];
        for tok in s.split(['+', '⊕']).map(str::trim).filter(|t| !t.is_empty()) {
            let digits: String = tok.chars().take_while(|c| c.is_ascii_digit()).collect();
            let rest = &tok[digits.len()..];
            let (n, label) = if rest.is_empty() { (1, tok) } else { (digits.parse().unwrap_or(1), rest) };
            members.push((theory.resolve(label)?, n));
        }
        let refs: Vec<(&str, usize)> = members.iter().map(|(l, n)| (l.as_str(), *n)).collect();
        Self::new(theory, &refs)
    }

    pub fn contains(&self, label: &str) -> bool {
        self.members.iter().any(|m| m.0 == label)
    }

    pub fn dimension(&self, theory: &AnyonTheory) -> Result<f64> {
        self.members.iter().map(|(l, n)| Ok((n * theory.get(l)?.dim) as f64)).sum()
    }
}

impl fmt::Display for CondensableAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> =
            self.members.iter().map(|(l, n)| if *n == 1 { l.clone() } else { format!("{n}{l}") }).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CondensabilityReport {
    pub connected: bool,
    pub spin_violations: Vec<String>,
    pub braiding_violations: Vec<(String, String)>,
    pub closure_violations: Vec<String>,
    pub dimension: f64,
    pub total_dimension: f64,
    pub condensable: bool,
    pub lagrangian: bool,
}

impl fmt::Display for CondensabilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let yn = |b: bool| if b { "yes" } else { "no" };
        write!(f, "condensable: {}, lagrangian: {}", yn(self.condensable), yn(self.lagrangian))?;
        write!(f, " (D_A = {}, D = {})", self.dimension, self.total_dimension)?;
        if !self.connected {
            write!(f, "; vacuum multiplicity is not 1")?;
        }
        for s in &self.spin_violations {
            write!(f, "; spin violation: {s}")?;
        }
        for (a, b) in &self.braiding_violations {
            write!(f, "; braiding violation: {a}, {b}")?;
        }
        for s in &self.closure_violations {
            write!(f, "; not closed under fusion: {s}")?;
        }
        Ok(())
    }
}

/// Checks connectedness, trivial spins, trivial mutual braiding among abelian
/// members, closure under fusion for abelian theories, and compares `D_A`
/// against the total dimension.
pub fn check_condensable(theory: &AnyonTheory, alg: &CondensableAlgebra) -> Result<CondensabilityReport> {
    let vac = alg.members.iter().find(|m| m.0 == "1").map(|m| m.1).unwrap_or(0);
    let connected = vac == 1;
    let mut spin_violations = vec![];
    for (l, _) in &alg.members {
        let a = theory.get(l)?;
        if (a.spin - cr(1.0)).norm() > 1e-12 {
            spin_violations.push(format!("theta({l}) = {}", fmt_coef(a.spin, true)));
        }
    }
    let mut braiding_violations = vec![];
    for (i, (a, _)) in alg.members.iter().enumerate() {
        for (b, _) in &alg.members[i + 1..] {
            if let Some(z) = theory.braiding(a, b)? {
                if (z - cr(1.0)).norm() > 1e-12 {
                    braiding_violations.push((a.clone(), b.clone()));
                }
            }
        }
    }
    let mut closure_violations = vec![];
    if theory.abelian.is_some() {
        for (a, _) in &alg.members {
            for (b, _) in &alg.members {
                if let Some(c) = theory.fuse(a, b)? {
                    if !alg.contains(&c) && !closure_violations.contains(&c) {
                        closure_violations.push(c);
                    }
                }
            }
        }
    }
    let dimension = alg.dimension(theory)?;
    let total_dimension = theory.total_dimension();
    let condensable =
        connected && spin_violations.is_empty() && braiding_violations.is_empty() && closure_violations.is_empty();
    Ok(CondensabilityReport {
        connected,
        spin_violations,
        braiding_violations,
        closure_violations,
        dimension,
        total_dimension,
        condensable,
        lagrangian: condensable && (dimension - total_dimension).abs() < 1e-12,
    })
}

pub fn is_lagrangian(theory: &AnyonTheory, alg: &CondensableAlgebra) -> Result<bool> {
    Ok(check_condensable(theory, alg)?.lagrangian)
}

/// Named algebras: the two D4 boundary algebras and the algebras of every
/// builtin interface.
pub fn named_algebra(name: &str) -> Result<(AnyonTheory, CondensableAlgebra)> {
    match name {
        "L1" => {
            let t = d4_theory();
            let a = CondensableAlgebra::parse(&t, "1+e_R+m_B+m_G+m_GB")?;
            Ok((t, a))
        }
        "L2" => {
            let t = d4_theory();
            let a = CondensableAlgebra::parse(&t, "1+e_B+e_RG+e_RGB+2m_RG")?;
            Ok((t, a))
        }
        other => {
            if let Ok(i) = interface(other) {
                let t = theory(&i.parent)?;
                let a = i.algebra(&t)?;
                return Ok((t, a));
            }
            Err(Error::UnknownInterface(other.into()))
        }
    }
}

/// Lagrangian algebra condensed on the top and bottom boundaries.
pub fn top_bottom_boundary(theory: &AnyonTheory) -> Result<CondensableAlgebra> {
    match theory.name.as_str() {
        "ZD4" => named_algebra("L1").map(|x| x.1),
        "ZZ2" => CondensableAlgebra::parse(theory, "1+e"),
        "ZZ4" => CondensableAlgebra::parse(theory, "1+e+e2+e3"),
        "ZZ22" => CondensableAlgebra::parse(theory, "1+e1+e2+e1e2"),
        other => Err(Error::UnknownTheory(other.into())),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Interface {
    pub name: String,
    pub parent: String,
    pub child: String,
    /// `child anyon -> [(parent anyon, multiplicity)]`.
    pub lift: Vec<(String, Vec<(String, usize)>)>,
}

impl Interface {
    fn build(name: &str, parent: &str, child: &str, rows: &[(&str, &[&str])]) -> Self {
        let pt = theory(parent).unwrap();
        let ct = theory(child).unwrap();
        let lift = rows
            .iter()
            .map(|(c, ps)| {
                let mut out: Vec<(String, usize)> = vec![];
                for p in ps.iter() {
                    let p = pt.resolve(p).unwrap();
                    match out.iter_mut().find(|x| x.0 == p) {
                        Some(x) => x.1 += 1,
                        None => out.push((p, 1)),
                    }
                }
                (ct.resolve(c).unwrap(), out)
            })
            .collect();
        Self { name: name.into(), parent: parent.into(), child: child.into(), lift }
    }

    /// Lift of the child vacuum.
    pub fn algebra(&self, parent: &AnyonTheory) -> Result<CondensableAlgebra> {
        let row = self.lift_of("1").ok_or_else(|| Error::UnknownAnyon("1".into()))?;
        let refs: Vec<(&str, usize)> = row.iter().map(|(l, n)| (l.as_str(), *n)).collect();
        CondensableAlgebra::new(parent, &refs)
    }

    pub fn lift_of(&self, child: &str) -> Option<&Vec<(String, usize)>> {
        self.lift.iter().find(|r| r.0 == child).map(|r| &r.1)
    }

    /// Child anyons whose lift contains `parent`, with multiplicities.
    pub fn restriction(&self, parent: &str) -> Vec<(String, usize)> {
        self.lift
            .iter()
            .filter_map(|(c, ps)| ps.iter().find(|p| p.0 == parent).map(|p| (c.clone(), p.1)))
            .collect()
    }

    /// Rows violating `sum_a n d_a = d_child D_parent / D_child`.
    pub fn dimension_violations(&self) -> Result<Vec<String>> {
        let pt = theory(&self.parent)?;
        let ct = theory(&self.child)?;
        let ratio = pt.total_dimension() / ct.total_dimension();
        let mut bad = vec![];
        for (c, ps) in &self.lift {
            let lhs: f64 = ps.iter().map(|(p, n)| Ok((n * pt.get(p)?.dim) as f64)).sum::<Result<f64>>()?;
            let rhs = ct.get(c)?.dim as f64 * ratio;
            if (lhs - rhs).abs() > 1e-12 {
                bad.push(c.clone());
            }
        }
        Ok(bad)
    }
}

/// Lift through `outer` (grandparent to parent) after `inner` (parent to
/// child). Rows whose intermediate labels have no `outer` row are `None`.
pub fn compose_interfaces(outer: &Interface, inner: &Interface) -> Result<Vec<(String, Option<Vec<(String, usize)>>)>> {
    if outer.child != inner.parent {
        return Err(Error::Unsupported(format!("{} does not feed {}", outer.name, inner.name)));
    }
    let mid = theory(&inner.parent)?;
    Ok(inner
        .lift
        .iter()
        .map(|(c, ps)| {
            let mut out: Vec<(String, usize)> = vec![];
            for (p, n) in ps {
                let Some(row) = mid.resolve(p).ok().and_then(|p| outer.lift_of(&p)) else {
                    return (c.clone(), None);
                };
                for (g, m) in row {
                    match out.iter_mut().find(|x| &x.0 == g) {
                        Some(x) => x.1 += n * m,
                        None => out.push((g.clone(), n * m)),
                    }
                }
            }
            out.sort();
            (c.clone(), Some(out))
        })
        .collect())
}

pub fn builtin_interfaces() -> Vec<Interface> {
    vec![
        Interface::build(
            "A",
            "ZD4",
            "ZZ4",
            &[
                ("1", &["1", "e_RG"]),
                ("e", &["m_B"]),
                ("e2", &["e_R", "e_G"]),
                ("e3", &["m_B"]),
                ("m", &["m_RG"]),
                ("m2", &["e_RGB", "e_B"]),
                ("m3", &["m_RG"]),
                ("e2m2", &["e_GB", "e_RB"]),
                ("e2m", &["f_B"]),
                ("e2m3", &["f_B"]),
                ("em2", &["f_RG"]),
                ("e3m2", &["f_RG"]),
                ("em", &["s_RGB"]),
                ("e3m3", &["s_RGB"]),
                ("e3m", &["sbar_RGB"]),
                ("em3", &["sbar_RGB"]),
            ],
        ),
        Interface::build(
            "Ap",
            "ZD4",
            "ZZ2",
            &[
                ("1", &["1", "e_G", "m_R"]),
                ("e", &["m_B", "m_RB"]),
                ("m", &["e_B", "e_GB", "m_R"]),
                ("f", &["f_B", "f_RB"]),
            ],
        ),
        Interface::build(
            "A1p",
            "ZD4",
            "ZZ22",
            &[
                ("1", &["1", "e_G"]),
                ("m1", &["m_RB"]),
                ("m2", &["e_RGB", "e_RB"]),
                ("m1m2", &["m_RB"]),
                ("e1", &["e_RG", "e_R"]),
                ("e2", &["m_B"]),
                ("e1e2", &["m_B"]),
                ("e1m2", &["e_B", "e_GB"]),
                ("m1e2", &["m_R"]),
                ("e1m1e2m2", &["m_R"]),
            ],
        ),
        Interface::build(
            "A2p",
            "ZZ22",
            "ZZ2",
            &[
                ("1", &["1", "m1e2"]),
                ("e", &["m1", "e2"]),
                ("m", &["e1m2", "f1f2"]),
                ("f", &["e1f2", "f1m2"]),
            ],
        ),
        Interface::build("e2", "ZZ4", "ZZ2", &[("1", &["1", "e2"]), ("e", &["e", "e3"]), ("m", &["m2", "e2m2"])]),
        Interface::build("m2", "ZZ4", "ZZ2", &[("1", &["1", "m2"]), ("e", &["e2", "e2m2"]), ("m", &["m", "m3"])]),
    ]
}

pub fn interface(name: &str) -> Result<Interface> {
    builtin_interfaces().into_iter().find(|i| i.name == name).ok_or_else(|| Error::UnknownInterface(name.into()))
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct LogicalLabel {
    pub anyon: String,
    pub channel: (u8, u8),
}

impl LogicalLabel {
    pub fn new(anyon: impl Into<String>) -> Self {
        Self { anyon: anyon.into(), channel: (1, 1) }
    }
}

/// Formal sum of logical-operator labels applied to the vacuum.
#[derive(Debug, Clone, Serialize)]
pub struct LogicalAnyonState {
    pub theory: String,
    pub terms: BTreeMap<LogicalLabel, C64>,
    /// Display order of labels; first insertion wins.
    order: Vec<LogicalLabel>,
}

impl LogicalAnyonState {
    pub fn zero(theory: &str) -> Self {
        Self { theory: theory.into(), terms: BTreeMap::new(), order: vec![] }
    }

    pub fn from_terms(theory: &AnyonTheory, terms: &[(&str, C64)]) -> Result<Self> {
        let mut s = Self::zero(&theory.name);
        for &(l, z) in terms {
            s.add(LogicalLabel::new(theory.resolve(l)?), z);
        }
        Ok(s)
    }

    pub fn add(&mut self, label: LogicalLabel, z: C64) {
        if !self.order.contains(&label) {
            self.order.push(label.clone());
        }
        *self.terms.entry(label).or_default() += z;
    }

    pub fn coefficient(&self, anyon: &str) -> C64 {
        self.terms.iter().filter(|(l, _)| l.anyon == anyon).map(|(_, z)| *z).sum()
    }

    pub fn nonzero(&self, tol: f64) -> Vec<(LogicalLabel, C64)> {
        self.order
            .iter()
            .filter_map(|l| self.terms.get(l).filter(|z| z.norm() > tol).map(|z| (l.clone(), *z)))
            .collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|z| z.norm_sqr()).sum()
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.norm_sqr().sqrt() <= tol
    }

    /// Overlap fidelity treating distinct labels as orthonormal.
    pub fn fidelity(&self, other: &Self) -> f64 {
        let ip: C64 = self.terms.iter().map(|(l, z)| z.conj() * other.terms.get(l).copied().unwrap_or_default()).sum();
        let d = self.norm_sqr() * other.norm_sqr();
        if d == 0.0 {
            0.0
        } else {
            ip.norm_sqr() / d
        }
    }

    /// `|S_X> = |1> + e^{i pi/4}|e> - |e2> + e^{i pi/4}|e3>` in `Z(Z4)`.
    pub fn s_x() -> Self {
        let t = theory("ZZ4").unwrap();
        let w = C64::from_polar(1.0, PI / 4.0);
        Self::from_terms(&t, &[("1", cr(1.0)), ("e", w), ("e2", cr(-1.0)), ("e3", w)]).unwrap()
    }

    /// `|T_X> = |1> + e^{i pi/4}|e>` in `Z(Z2)`.
    pub fn t_x() -> Self {
        let t = theory("ZZ2").unwrap();
        Self::from_terms(&t, &[("1", cr(1.0)), ("e", C64::from_polar(1.0, PI / 4.0))]).unwrap()
    }
}

/// Formats a coefficient; unit-modulus multiples of `pi/4` use exponential form.
pub fn fmt_coef(z: C64, show_one: bool) -> String {
    let m = z.norm();
    let ang = z.arg() / (PI / 4.0);
    let k = ang.round();
    if (ang - k).abs() > 1e-9 {
        return format!("({:.6}{:+.6}i)", z.re, z.im);
    }
    let k = (k as i64).rem_euclid(8);
    let mag = if (m - 1.0).abs() < 1e-9 { String::new() } else { trim_float(m) };
    let phase = match k {
        0 => String::new(),
        2 => "i".into(),
        4 => "-".into(),
        6 => "-i".into(),
        1 => "e^{iπ/4}".into(),
        3 => "e^{3iπ/4}".into(),
        5 => "e^{-3iπ/4}".into(),
        _ => "e^{-iπ/4}".into(),
    };
    let s = match (k, mag.is_empty()) {
        (4, _) => format!("-{mag}"),
        (6, false) => format!("-{mag}i"),
        (2, false) => format!("{mag}i"),
        _ => format!("{mag}{phase}"),
    };
    if s.is_empty() && show_one {
        "1".into()
    } else if s == "-" && show_one {
        "-1".into()
    } else {
        s
    }
}

fn trim_float(x: f64) -> String {
    let s = format!("{x:.6}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

impl fmt::Display for LogicalAnyonState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.nonzero(1e-12);
        if terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (l, z)) in terms.iter().enumerate() {
            let mut c = fmt_coef(*z, false);
            let neg = c.starts_with('-');
            if neg {
                c.remove(0);
            }
            match (i, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let ch = if l.channel == (1, 1) { String::new() } else { format!(",{:?}", l.channel) };
            write!(f, "{c}|{}{ch}>", l.anyon)?;
        }
        Ok(())
    }
}

/// Child-to-parent map: each label goes along its lift, lifted components
/// outside `target` are dropped, and labels sharing a parent are averaged.
pub fn gauge_transform(
    state: &LogicalAnyonState,
    iface: &Interface,
    target: &CondensableAlgebra,
) -> Result<LogicalAnyonState> {
    if state.theory != iface.child {
        return Err(Error::Unsupported(format!("state lives in {}, interface child is {}", state.theory, iface.child)));
    }
    let mut out = LogicalAnyonState::zero(&iface.parent);
    for (label, z) in state.nonzero(0.0) {
        let lift = iface.lift_of(&label.anyon).ok_or_else(|| Error::UnknownAnyon(label.anyon.clone()))?;
        let kept: Vec<&(String, usize)> = lift.iter().filter(|(p, _)| target.contains(p)).collect();
        if kept.is_empty() {
            return Err(Error::NotCondensable(label.anyon.clone()));
        }
        for (p, n) in kept {
            let share = iface.restriction(p).len() as f64;
            out.add(LogicalLabel { anyon: p.clone(), channel: label.channel }, z * (*n as f64) / share);
        }
    }
    Ok(out)
}

/// Parent-to-child map: labels are restricted through the transposed lift
/// and confined labels vanish.
pub fn condense_transform(state: &LogicalAnyonState, iface: &Interface) -> Result<LogicalAnyonState> {
    if state.theory != iface.parent {
        return Err(Error::Unsupported(format!("state lives in {}, interface parent is {}", state.theory, iface.parent)));
    }
    let mut out = LogicalAnyonState::zero(&iface.child);
    for (label, z) in state.nonzero(0.0) {
        for (c, n) in iface.restriction(&label.anyon) {
            out.add(LogicalLabel { anyon: c, channel: label.channel }, z * n as f64);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Step {
    Gauge(String),
    Condense(String),
}

/// Parses `gauge:A,condense:Ap`.
pub fn parse_sequence(s: &str) -> Result<Vec<Step>> {
    s.split([',', ';'])
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| match t.split_once(':') {
            Some(("gauge", n)) => Ok(Step::Gauge(n.trim().into())),
            Some(("condense", n)) => Ok(Step::Condense(n.trim().into())),
            _ => Err(Error::Parse(format!("bad step `{t}`"))),
        })
        .collect()
}

pub fn run_sequence(state: &LogicalAnyonState, steps: &[Step]) -> Result<LogicalAnyonState> {
    let mut cur = state.clone();
    for st in steps {
        cur = match st {
            Step::Gauge(n) => {
                let i = interface(n)?;
                let target = top_bottom_boundary(&theory(&i.parent)?)?;
                gauge_transform(&cur, &i, &target)?
            }
            Step::Condense(n) => condense_transform(&cur, &interface(n)?)?,
        };
    }
    Ok(cur)
}

/// Parses `SX`, `TX`, or `theory:label=coef;label=coef` with coefficients
/// written as `a`, `a+bi`, `w` (for `e^{i pi/4}`) or `-w`.
pub fn parse_state(s: &str) -> Result<LogicalAnyonState> {
    match s.trim() {
        "SX" | "S_X" => return Ok(LogicalAnyonState::s_x()),
        "TX" | "T_X" => return Ok(LogicalAnyonState::t_x()),
        _ => {}
    }
    let (th, rest) = s.split_once(':').ok_or_else(|| Error::Parse(format!("expected theory:terms in `{s}`")))?;
    let t = theory(th.trim())?;
    let mut st = LogicalAnyonState::zero(&t.name);
    for tok in rest.split(';').map(str::trim).filter(|x| !x.is_empty()) {
        let (l, c) = tok.split_once('=').unwrap_or((tok, "1"));
        st.add(LogicalLabel::new(t.resolve(l.trim())?), parse_coef(c.trim())?);
    }
    Ok(st)
}

fn parse_coef(s: &str) -> Result<C64> {
    let w = C64::from_polar(1.0, PI / 4.0);
    match s {
        "w" => return Ok(w),
        "-w" => return Ok(-w),
        "i" => return Ok(C64::new(0.0, 1.0)),
        "-i" => return Ok(C64::new(0.0, -1.0)),
        _ => {}
    }
    if let Some(body) = s.strip_suffix('i') {
        let split = body.char_indices().skip(1).filter(|(_, c)| *c == '+' || *c == '-').last().map(|x| x.0);
        if let Some(p) = split {
            let re: f64 = body[..p].parse().map_err(|_| Error::Parse(s.into()))?;
            let im: f64 = body[p..].parse().map_err(|_| Error::Parse(s.into()))?;
            return Ok(C64::new(re, im));
        }
        let im: f64 = body.parse().map_err(|_| Error::Parse(s.into()))?;
        return Ok(C64::new(0.0, im));
    }
    s.parse::<f64>().map(cr).map_err(|_| Error::Parse(s.into()))
}
