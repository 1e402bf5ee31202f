//! Finite-group data, the D4 quantum double on the union lattice, and ribbon
//! operators in the `(h, g)` and anyon bases.
//!
//! Each bulk edge carries a qubit-qudit pair `(a, j)` encoding `r^j s^a`.
//! Top and bottom dangling edges hold only the qudit and represent cosets of
//! `<s>` by `r^j`; left and right dangling edges hold only the qubit and
//! represent cosets of `<r>` by `s^a`.

use serde::Serialize;

use crate::engine::{c, cr, LinearOp, MixedRadixState, C64};
use crate::error::{Error, Result};
use crate::geometry::{EdgeLabel, Lattice, Plaquette, PlaquetteKind, Point, Ribbon, Triangle, VertexFamily};

pub type Matrix = Vec<Vec<C64>>;

#[derive(Debug, Clone, Serialize)]
pub struct Irrep {
    pub name: String,
    pub dim: usize,
    /// `(element, Gamma(element))` for every centralizer element.
    pub matrices: Vec<(usize, Matrix)>,
}

impl Irrep {
    pub fn gamma(&self, k: usize) -> Option<&Matrix> {
        self.matrices.iter().find(|m| m.0 == k).map(|m| &m.1)
    }

    pub fn character(&self, k: usize) -> Option<C64> {
        self.gamma(k).map(|m| (0..self.dim).map(|i| m[i][i]).sum())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConjClass {
    pub name: String,
    /// `c_1, c_2, ...` with `c_1` the representative.
    pub elements: Vec<usize>,
    /// `p_i` with `c_i = p_i c_1 p_i^-1`, `p_1 = 1`.
    pub reps: Vec<usize>,
    pub centralizer: Vec<usize>,
    pub irreps: Vec<Irrep>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FiniteGroup {
    pub name: String,
    pub labels: Vec<String>,
    pub mul: Vec<Vec<usize>>,
    pub inv: Vec<usize>,
    pub identity: usize,
    pub classes: Vec<ConjClass>,
}

impl FiniteGroup {
    pub fn order(&self) -> usize {
        self.labels.len()
    }

    pub fn m(&self, a: usize, b: usize) -> usize {
        self.mul[a][b]
    }

    pub fn conj(&self, p: usize, g: usize) -> usize {
        self.m(self.m(p, g), self.inv[p])
    }

    pub fn element(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn class(&self, name: &str) -> Option<usize> {
        self.classes.iter().position(|c| c.name == name)
    }

    /// Checks closure, associativity, identity and inverses.
    pub fn check_axioms(&self) -> bool {
        let n = self.order();
        let closed = self.mul.iter().all(|r| r.len() == n && r.iter().all(|&x| x < n));
        let assoc = (0..n).all(|a| (0..n).all(|b| (0..n).all(|c| self.m(self.m(a, b), c) == self.m(a, self.m(b, c)))));
        let id = (0..n).all(|a| self.m(self.identity, a) == a && self.m(a, self.identity) == a);
        let inv = (0..n).all(|a| self.m(a, self.inv[a]) == self.identity);
        closed && assoc && id && inv
    }
}

fn d4_mul(x: usize, y: usize) -> usize {
    let (j1, a1) = (x % 4, x / 4);
    let (j2, a2) = (y % 4, y / 4);
    let j = if a1 == 0 { j1 + j2 } else { j1 + 4 - j2 } % 4;
    ((a1 + a2) % 2) * 4 + j
}

/// `r^j s^a` as an index.
pub fn d4(j: usize, a: usize) -> usize {
    (a % 2) * 4 + j % 4
}

/// `(j, a)` of an index.
pub fn d4_parts(g: usize) -> (usize, usize) {
    (g % 4, g / 4)
}

fn mat2(a: C64, b: C64, cc: C64, d: C64) -> Matrix {
    vec![vec![a, b], vec![cc, d]]
}

fn mmul(x: &Matrix, y: &Matrix) -> Matrix {
    let n = x.len();
    (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| x[i][k] * y[k][j]).sum()).collect()).collect()
}

/// The dihedral group of order 8. Classes are ordered `[1], [r2], [r], [s],
/// [rs]`; representative sets are chosen lexicographically by index.
pub fn d4_group() -> FiniteGroup {
    let labels: Vec<String> = ["1", "r", "r2", "r3", "s", "rs", "r2s", "r3s"].iter().map(|s| s.to_string()).collect();
    let mul: Vec<Vec<usize>> = (0..8).map(|x| (0..8).map(|y| d4_mul(x, y)).collect()).collect();
    let inv: Vec<usize> = (0..8).map(|x| (0..8).find(|&y| d4_mul(x, y) == 0).unwrap()).collect();
    let all: Vec<usize> = (0..8).collect();

    let gamma_r = mat2(c(0.0, 1.0), cr(0.0), cr(0.0), c(0.0, -1.0));
    let gamma_s = mat2(cr(0.0), cr(1.0), cr(1.0), cr(0.0));
    let alpha = |g: usize| {
        let (j, a) = d4_parts(g);
        let mut m = mat2(cr(1.0), cr(0.0), cr(0.0), cr(1.0));
        for _ in 0..j {
            m = mmul(&m, &gamma_r);
        }
        if a == 1 {
            m = mmul(&m, &gamma_s);
        }
        m
    };
    let one_dim = |name: &str, f: &dyn Fn(usize) -> f64, els: &[usize]| Irrep {
        name: name.into(),
        dim: 1,
        matrices: els.iter().map(|&g| (g, vec![vec![cr(f(g))]])).collect(),
    };
    let sign = |b: bool| if b { -1.0 } else { 1.0 };
    let full_irreps = || {
        vec![
            one_dim("J0", &|_| 1.0, &all),
            one_dim("J1", &|g| sign(d4_parts(g).1 == 1), &all),
            one_dim("J2", &|g| sign(d4_parts(g).0 % 2 == 1), &all),
            one_dim("J3", &|g| sign((d4_parts(g).0 + d4_parts(g).1) % 2 == 1), &all),
            Irrep { name: "alpha".into(), dim: 2, matrices: all.iter().map(|&g| (g, alpha(g))).collect() },
        ]
    };
    let rot = vec![0, 1, 2, 3];
    let omega: Vec<Irrep> = (0..4)
        .map(|l| Irrep {
            name: format!("w{l}"),
            dim: 1,
            matrices: rot.iter().map(|&g| (g, vec![vec![crate::engine::gates::root(4, (l * g) as i64)]])).collect(),
        })
        .collect();
    // Klein centralizers {1, r2, t, r2 t}: coordinates (p, q) with r2 = (1, 0), t = (0, 1).
    let klein = |t: usize| -> (Vec<usize>, Vec<Irrep>) {
        let els = vec![0, 2, t, d4_mul(2, t)];
        let coord = |g: usize| -> (usize, usize) {
            let i = els.iter().position(|&e| e == g).unwrap();
            (i % 2, i / 2)
        };
        let irreps = (0..4)
            .map(|m| {
                let f = |g: usize| {
                    let (p, q) = coord(g);
                    let e = match m {
                        0 => 0,
                        1 => q,
                        2 => p,
                        _ => p + q,
                    };
                    sign(e % 2 == 1)
                };
                one_dim(&format!("A{m}"), &f, &els)
            })
            .collect();
        (els, irreps)
    };
    let (cs, is) = klein(4);
    let (crs, irs) = klein(5);
    let mut classes = vec![
        ConjClass { name: "1".into(), elements: vec![0], reps: vec![], centralizer: all.clone(), irreps: full_irreps() },
        ConjClass { name: "r2".into(), elements: vec![2], reps: vec![], centralizer: all.clone(), irreps: full_irreps() },
        ConjClass { name: "r".into(), elements: vec![1, 3], reps: vec![], centralizer: rot, irreps: omega },
        ConjClass { name: "s".into(), elements: vec![4, 6], reps: vec![], centralizer: cs, irreps: is },
        ConjClass { name: "rs".into(), elements: vec![5, 7], reps: vec![], centralizer: crs, irreps: irs },
    ];
    for cl in classes.iter_mut() {
        let g = cl.elements[0];
        cl.reps = cl
            .elements
            .iter()
            .map(|&ci| (0..8).find(|&p| d4_mul(d4_mul(p, g), inv[p]) == ci).unwrap())
            .collect();
    }
    FiniteGroup { name: "D4".into(), labels, mul, inv, identity: 0, classes }
}

/// Spin `chi(g) / dim` and quantum dimension `|class| dim` of `([g], pi)`.
pub fn anyon_data(g: &FiniteGroup, class: usize, irrep: usize) -> (C64, usize) {
    let cl = &g.classes[class];
    let ir = &cl.irreps[irrep];
    (ir.character(cl.elements[0]).unwrap() / ir.dim as f64, cl.elements.len() * ir.dim)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Dof {
    Full { qudit: usize, qubit: usize },
    Qudit { site: usize },
    Qubit { site: usize },
}

#[derive(Debug, Clone, Serialize)]
pub struct D4Edge {
    pub label: EdgeLabel,
    pub tail: Point,
    pub head: Point,
    pub dof: Dof,
    /// True when the coset is taken from the right (`g<K>`): the lattice
    /// vertex is the tail.
    pub right_coset: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum TermKind {
    Vertex,
    VertexLeft,
    VertexRight,
    Plaquette,
    PlaquetteTop,
    PlaquetteBottom,
    PlaquetteLeft,
    PlaquetteRight,
}

#[derive(Debug, Clone)]
pub struct D4Term {
    pub kind: TermKind,
    pub anchor: Point,
    pub projector: LinearOp,
    /// Vertex terms: `A^(r), A^(s)`. Plaquette terms: `B^(r), B^(s)`.
    pub generators: Vec<LinearOp>,
}

impl D4Term {
    pub fn name(&self) -> String {
        format!("{:?}{:?}", self.kind, self.anchor)
    }
}

#[derive(Debug, Clone)]
pub struct D4Code {
    pub lattice: Lattice,
    pub group: FiniteGroup,
    pub edges: Vec<D4Edge>,
    pub vertex_terms: Vec<D4Term>,
    pub plaquette_terms: Vec<D4Term>,
}

impl D4Code {
    /// Register: qudits on the `E_A` edges followed by qubits on the `E_B` edges.
    pub fn new(lattice: &Lattice) -> Result<Self> {
        let na = lattice.a_edges().len();
        let edges = lattice
            .all_edges()
            .into_iter()
            .map(|e| {
                let qa = lattice.a_index(e.label);
                let qb = lattice.b_index(e.label).map(|b| b + na);
                let dof = match (qa, qb) {
                    (Some(qudit), Some(qubit)) => Dof::Full { qudit, qubit },
                    (Some(site), None) => Dof::Qudit { site },
                    (None, Some(site)) => Dof::Qubit { site },
                    _ => unreachable!(),
                };
                let right_coset = matches!(e.label, EdgeLabel::Dt(_) | EdgeLabel::Dr(_));
                D4Edge { label: e.label, tail: e.tail, head: e.head, dof, right_coset }
            })
            .collect();
        let mut code = Self {
            lattice: lattice.clone(),
            group: d4_group(),
            edges,
            vertex_terms: vec![],
            plaquette_terms: vec![],
        };
        let mut vt = vec![];
        for p in lattice.vertices() {
            let ar = code.vertex_action(p, d4(1, 0))?;
            let as_ = code.vertex_action(p, d4(0, 1))?;
            let mut proj = code.vertex_action(p, 0)?;
            for k in 1..8 {
                proj = proj.add(&code.vertex_action(p, k)?)?;
            }
            let kind = match lattice.vertex_family(p) {
                VertexFamily::Bulk => TermKind::Vertex,
                VertexFamily::Left => TermKind::VertexLeft,
                VertexFamily::Right => TermKind::VertexRight,
            };
            vt.push(D4Term { kind, anchor: p, projector: proj.scale(cr(0.125)), generators: vec![ar, as_] });
        }
        let mut pt = vec![];
        for pl in lattice.all_plaquettes() {
            pt.push(code.plaquette_term(&pl)?);
        }
        code.vertex_terms = vt;
        code.plaquette_terms = pt;
        Ok(code)
    }

    pub fn num_qudits(&self) -> usize {
        self.lattice.a_edges().len()
    }

    pub fn radices(&self) -> Vec<usize> {
        let mut r = vec![4; self.lattice.a_edges().len()];
        r.extend(vec![2; self.lattice.b_edges().len()]);
        r
    }

    pub fn edge_index(&self, l: EdgeLabel) -> Result<usize> {
        self.edges.iter().position(|e| e.label == l).ok_or_else(|| Error::InvalidPath(format!("{l} not in patch")))
    }

    pub fn terms(&self) -> impl Iterator<Item = &D4Term> {
        self.vertex_terms.iter().chain(&self.plaquette_terms)
    }

    fn sites_of(&self, e: usize) -> (Vec<usize>, Vec<usize>) {
        match self.edges[e].dof {
            Dof::Full { qudit, qubit } => (vec![qudit, qubit], vec![4, 2]),
            Dof::Qudit { site } => (vec![site], vec![4]),
            Dof::Qubit { site } => (vec![site], vec![2]),
        }
    }

    /// Group element (or coset representative) from the edge's digits.
    fn element(&self, e: usize, d: &[usize]) -> usize {
        match self.edges[e].dof {
            Dof::Full { .. } => d4(d[0], d[1]),
            Dof::Qudit { .. } => d4(d[0], 0),
            Dof::Qubit { .. } => d4(0, d[0]),
        }
    }

    /// Digits of the coset of `g` stored on the edge.
    fn digits(&self, e: usize, g: usize) -> Vec<usize> {
        let (j, a) = d4_parts(g);
        match self.edges[e].dof {
            Dof::Full { .. } => vec![j, a],
            Dof::Qudit { .. } => {
                if self.edges[e].right_coset || a == 0 {
                    vec![j]
                } else {
                    vec![(4 - j) % 4]
                }
            }
            Dof::Qubit { .. } => vec![a],
        }
    }

    /// Operator over the listed edges from a map on group elements.
    pub fn edge_op<F>(&self, edges: &[usize], f: F) -> Result<LinearOp>
    where
        F: Fn(&[usize]) -> Vec<(Vec<usize>, C64)>,
    {
        let mut support = vec![];
        let mut dims = vec![];
        let mut spans = vec![];
        for &e in edges {
            let (s, d) = self.sites_of(e);
            spans.push((support.len(), s.len()));
            support.extend(s);
            dims.extend(d);
        }
        LinearOp::from_fn(&support, &dims, |digits| {
            let els: Vec<usize> = edges
                .iter()
                .zip(&spans)
                .map(|(&e, &(o, n))| self.element(e, &digits[o..o + n]))
                .collect();
            f(&els)
                .into_iter()
                .map(|(out, amp)| {
                    let d: Vec<usize> = edges.iter().zip(&out).flat_map(|(&e, &g)| self.digits(e, g)).collect();
                    (d, amp)
                })
                .collect()
        })
    }

    /// `A_v^k`: left multiplication on outgoing edges, right multiplication by
    /// `k^-1` on incoming edges.
    pub fn vertex_action(&self, p: Point, k: usize) -> Result<LinearOp> {
        let g = &self.group;
        let inc: Vec<(usize, bool)> = self
            .edges
            .iter()
            .enumerate()
            .filter(|(_, e)| e.tail == p || e.head == p)
            .map(|(i, e)| (i, e.tail == p))
            .collect();
        let idx: Vec<usize> = inc.iter().map(|x| x.0).collect();
        Ok(self
            .edge_op(&idx, |els| {
                let out = els
                    .iter()
                    .zip(&inc)
                    .map(|(&x, &(_, out))| if out { g.m(k, x) } else { g.m(x, g.inv[k]) })
                    .collect();
                vec![(out, cr(1.0))]
            })?
            .with_tag(format!("A{p:?}^{}", g.labels[k])))
    }

    /// Ordered holonomy of the face boundary.
    pub fn holonomy(&self, pl: &Plaquette, els: &[usize]) -> usize {
        let g = &self.group;
        pl.boundary
            .iter()
            .zip(els)
            .fold(g.identity, |acc, (&(_, s), &x)| g.m(acc, if s > 0 { x } else { g.inv[x] }))
    }

    fn plaquette_term(&self, pl: &Plaquette) -> Result<D4Term> {
        let idx: Vec<usize> = pl.boundary.iter().map(|(l, _)| self.edge_index(*l)).collect::<Result<_>>()?;
        let kind = match pl.kind {
            PlaquetteKind::Interior => TermKind::Plaquette,
            PlaquetteKind::Top => TermKind::PlaquetteTop,
            PlaquetteKind::Bottom => TermKind::PlaquetteBottom,
            PlaquetteKind::Left => TermKind::PlaquetteLeft,
            PlaquetteKind::Right => TermKind::PlaquetteRight,
        };
        let allowed = |h: usize| {
            let (j, a) = d4_parts(h);
            match kind {
                TermKind::PlaquetteTop | TermKind::PlaquetteBottom => j == 0,
                TermKind::PlaquetteLeft | TermKind::PlaquetteRight => a == 0,
                _ => j == 0 && a == 0,
            }
        };
        let proj = self.edge_op(&idx, |els| {
            let ok = allowed(self.holonomy(pl, els));
            if ok {
                vec![(els.to_vec(), cr(1.0))]
            } else {
                vec![]
            }
        })?;
        let br = self.edge_op(&idx, |els| {
            let (j, _) = d4_parts(self.holonomy(pl, els));
            vec![(els.to_vec(), crate::engine::gates::root(4, j as i64))]
        })?;
        let bs = self.edge_op(&idx, |els| {
            let (_, a) = d4_parts(self.holonomy(pl, els));
            vec![(els.to_vec(), cr(if a == 1 { -1.0 } else { 1.0 }))]
        })?;
        Ok(D4Term { kind, anchor: pl.anchor, projector: proj.with_tag(format!("B{kind:?}{:?}", pl.anchor)), generators: vec![br, bs] })
    }

    pub fn check(&self, state: &MixedRadixState) -> Result<Vec<(String, f64)>> {
        self.terms().map(|t| Ok((t.name(), state.expectation_op(&t.projector)?.re))).collect()
    }

    /// Projects onto the joint +1 space of every term.
    pub fn project_ground(&self, state: &mut MixedRadixState) -> Result<f64> {
        let mut p = 1.0;
        for t in self.terms() {
            p *= state.project(&t.projector.clone().into())?;
        }
        Ok(p)
    }

    /// Equal-weight superposition of every configuration satisfying all
    /// plaquette terms, built edge by edge with pruning.
    pub fn flat_superposition(&self, backend: crate::engine::Backend, limit: usize) -> Result<MixedRadixState> {
        let plaqs: Vec<(Vec<usize>, &D4Term, Plaquette)> = self
            .lattice
            .all_plaquettes()
            .into_iter()
            .zip(&self.plaquette_terms)
            .map(|(pl, t)| {
                let idx = pl.boundary.iter().map(|(l, _)| self.edge_index(*l)).collect::<Result<Vec<_>>>()?;
                Ok((idx, t, pl))
            })
            .collect::<Result<_>>()?;
        // plaquettes closing at each edge
        let mut closing: Vec<Vec<usize>> = vec![vec![]; self.edges.len()];
        for (i, (idx, _, _)) in plaqs.iter().enumerate() {
            closing[*idx.iter().max().unwrap()].push(i);
        }
        let choices: Vec<Vec<usize>> = self
            .edges
            .iter()
            .map(|e| match e.dof {
                Dof::Full { .. } => (0..8).collect(),
                Dof::Qudit { .. } => (0..4).map(|j| d4(j, 0)).collect(),
                Dof::Qubit { .. } => (0..2).map(|a| d4(0, a)).collect(),
            })
            .collect();
        let ok = |pi: usize, els: &[usize]| {
            let (idx, t, pl) = &plaqs[pi];
            let local: Vec<usize> = idx.iter().map(|&e| els[e]).collect();
            let (j, a) = d4_parts(self.holonomy(pl, &local));
            match t.kind {
                TermKind::PlaquetteTop | TermKind::PlaquetteBottom => j == 0,
                TermKind::PlaquetteLeft | TermKind::PlaquetteRight => a == 0,
                _ => j == 0 && a == 0,
            }
        };
        let mut found: Vec<Vec<usize>> = vec![];
        let mut els = vec![0usize; self.edges.len()];
        fn dfs(
            e: usize,
            els: &mut Vec<usize>,
            choices: &[Vec<usize>],
            closing: &[Vec<usize>],
            ok: &dyn Fn(usize, &[usize]) -> bool,
            found: &mut Vec<Vec<usize>>,
            limit: usize,
        ) -> Result<()> {
            if e == els.len() {
                if found.len() >= limit {
                    return Err(Error::TooLarge(found.len() as u128 + 1));
                }
                found.push(els.clone());
                return Ok(());
            }
            for &g in &choices[e] {
                els[e] = g;
                if closing[e].iter().all(|&p| ok(p, els)) {
                    dfs(e + 1, els, choices, closing, ok, found, limit)?;
                }
            }
            Ok(())
        }
        dfs(0, &mut els, &choices, &closing, &ok, &mut found, limit)?;
        let radices = self.radices();
        let amp = cr(1.0 / (found.len() as f64).sqrt());
        let entries = found
            .iter()
            .map(|els| {
                let mut digits = vec![0; radices.len()];
                for (e, &g) in els.iter().enumerate() {
                    let d = self.digits(e, g);
                    match self.edges[e].dof {
                        Dof::Full { qudit, qubit } => {
                            digits[qudit] = d[0];
                            digits[qubit] = d[1];
                        }
                        Dof::Qudit { site } | Dof::Qubit { site } => digits[site] = d[0],
                    }
                }
                (digits, amp)
            })
            .collect();
        MixedRadixState::from_entries(&radices, backend, entries)
    }

    /// Ground-space dimension by orbit counting of flat configurations.
    pub fn ground_dimension(&self) -> Result<usize> {
        let cons: Vec<LinearOp> = self.plaquette_terms.iter().map(|t| t.projector.clone()).collect();
        let moves: Vec<LinearOp> = self.vertex_terms.iter().flat_map(|t| t.generators.clone()).collect();
        crate::engine::orbit_count(&self.radices(), &cons, &moves)
    }

    fn ribbon_edges(&self, ribbon: &Ribbon) -> Result<Vec<usize>> {
        ribbon
            .triangles
            .iter()
            .map(|t| match t {
                Triangle::Direct { edge, .. } | Triangle::Dual { edge, .. } => self.edge_index(*edge),
            })
            .collect()
    }

    /// `F^{h,g}`: projects the ordered product of direct-triangle elements
    /// onto `g` and multiplies each dual-triangle edge by `x^-1 h x`, where
    /// `x` is the product of the direct elements before it.
    pub fn raw_ribbon(&self, ribbon: &Ribbon, h: usize, g: usize) -> Result<LinearOp> {
        let grp = &self.group;
        let idx = self.ribbon_edges(ribbon)?;
        if idx.is_empty() {
            return Err(Error::InvalidPath("empty ribbon".into()));
        }
        Ok(self
            .edge_op(&idx, |els| {
                let mut x = grp.identity;
                let mut out = els.to_vec();
                for (i, t) in ribbon.triangles.iter().enumerate() {
                    match *t {
                        Triangle::Direct { forward, .. } => {
                            x = grp.m(x, if forward { els[i] } else { grp.inv[els[i]] });
                        }
                        Triangle::Dual { left, .. } => {
                            let k = grp.m(grp.m(grp.inv[x], h), x);
                            out[i] = if left { grp.m(k, els[i]) } else { grp.m(els[i], grp.inv[k]) };
                        }
                    }
                }
                if x == g {
                    vec![(out, cr(1.0))]
                } else {
                    vec![]
                }
            })?
            .with_tag(format!("F^({},{})", grp.labels[h], grp.labels[g])))
    }

    /// `(dim pi / |C|) sum_k Gamma(k^-1)_{j j'} F^{(c_i^-1, p_i k p_i'^-1)}`
    /// with `u = (i, j)`, `v = (i', j')`, zero-based.
    pub fn anyon_ribbon(
        &self,
        ribbon: &Ribbon,
        class: usize,
        irrep: usize,
        u: (usize, usize),
        v: (usize, usize),
    ) -> Result<LinearOp> {
        let grp = &self.group;
        let cl = grp.classes.get(class).ok_or_else(|| Error::UnknownAnyon(format!("class {class}")))?;
        let ir = cl.irreps.get(irrep).ok_or_else(|| Error::UnknownAnyon(format!("irrep {irrep}")))?;
        if u.0 >= cl.elements.len() || v.0 >= cl.elements.len() || u.1 >= ir.dim || v.1 >= ir.dim {
            return Err(Error::UnknownAnyon(format!("internal index {u:?} {v:?}")));
        }
        let ci = cl.elements[u.0];
        let pi = cl.reps[u.0];
        let pj = cl.reps[v.0];
        let mut acc: Option<LinearOp> = None;
        for &k in &cl.centralizer {
            let coef = ir.gamma(grp.inv[k]).unwrap()[u.1][v.1];
            if coef.norm() < 1e-15 {
                continue;
            }
            let g = grp.m(grp.m(pi, k), grp.inv[pj]);
            let f = self.raw_ribbon(ribbon, grp.inv[ci], g)?.scale(coef);
            acc = Some(match acc {
                None => f,
                Some(a) => a.add(&f)?,
            });
        }
        let norm = ir.dim as f64 / cl.centralizer.len() as f64;
        let op = match acc {
            Some(a) => a.scale(cr(norm)),
            None => self.raw_ribbon(ribbon, 0, 0)?.scale(cr(0.0)),
        };
        Ok(op.with_tag(format!("F^({},{};{u:?},{v:?})", cl.name, ir.name)))
    }

    /// Anyon-basis ribbon rescaled by `|C| / dim pi`, so that a charge
    /// ribbon of a one-dimensional irrep is the character of the holonomy.
    pub fn anyon_ribbon_unit(
        &self,
        ribbon: &Ribbon,
        class: usize,
        irrep: usize,
        u: (usize, usize),
        v: (usize, usize),
    ) -> Result<LinearOp> {
        let cl = &self.group.classes[class];
        let f = cl.centralizer.len() as f64 / cl.irreps[irrep].dim as f64;
        Ok(self.anyon_ribbon(ribbon, class, irrep, u, v)?.scale(cr(f)))
    }

    /// Trace plus anti-trace over the internal indices of a charge ribbon,
    /// in the unit normalization.
    pub fn trace_antitrace(&self, ribbon: &Ribbon, class: usize, irrep: usize) -> Result<LinearOp> {
        let n = self.group.classes[class].irreps[irrep].dim;
        let mut acc = self.anyon_ribbon_unit(ribbon, class, irrep, (0, 0), (0, 0))?;
        for j in 0..n {
            for jp in [j, n - 1 - j] {
                if (j, jp) != (0, 0) || n == 1 {
                    acc = acc.add(&self.anyon_ribbon_unit(ribbon, class, irrep, (0, j), (0, jp))?)?;
                }
            }
        }
        if n == 1 {
            acc = acc.scale(cr(0.5));
        }
        Ok(acc.with_tag("TrATr"))
    }

    /// Direct ribbon from the bottom to the top boundary along column 0.
    pub fn vertical_ribbon(&self) -> Result<Ribbon> {
        Ribbon::from_direct(&self.lattice.vertical_path(0)?)
    }

    /// Charge ribbon `([1], irrep)` from bottom to top along column 0, unit
    /// normalized. One-dimensional irreps only.
    pub fn vertical_charge(&self, irrep: usize) -> Result<LinearOp> {
        let r = self.vertical_ribbon()?;
        if self.group.classes[0].irreps[irrep].dim != 1 {
            return self.trace_antitrace(&r, 0, irrep);
        }
        self.anyon_ribbon_unit(&r, 0, irrep, (0, 0), (0, 0))
    }

    /// Logical ribbon between the top and bottom boundaries for an anyon of
    /// the top/bottom Lagrangian algebra. Charges only.
    pub fn logical_ribbon(&self, anyon: &str) -> Result<LinearOp> {
        match anyon.replace('_', "").as_str() {
            "1" => LinearOp::identity(&[0], &[4]),
            "eR" => self.vertical_charge(2),
            "mB" => self.vertical_charge(4),
            "mG" | "mGB" => Err(Error::Unsupported(format!("flux ribbon {anyon} between rough boundaries"))),
            other => Err(Error::NotCondensable(other.into())),
        }
    }
}
