//! Patch geometry: vertices, oriented edges, plaquettes, dangling boundary
//! edges, the shifted lattice used for gauging, and ribbons.
//!
//! Vertices are `(x, y)` with `0 <= x <= W`, `0 <= y <= H`. Vertical edges
//! point up, horizontal edges point right. The primary lattice `E_A` carries
//! dangling vertical edges below the bottom row and above the top row; the
//! shifted lattice `E_B` carries dangling horizontal edges left of `x = 0` and
//! right of `x = W`. Both share the bulk edges.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = (i32, i32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EdgeLabel {
    /// `(x, y) -> (x, y + 1)`
    V(i32, i32),
    /// `(x, y) -> (x + 1, y)`
    H(i32, i32),
    /// `(x, -1) -> (x, 0)`
    Db(i32),
    /// `(x, H) -> (x, H + 1)`
    Dt(i32),
    /// `(-1, y) -> (0, y)`
    Dl(i32),
    /// `(W, y) -> (W + 1, y)`
    Dr(i32),
}

impl fmt::Display for EdgeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeLabel::V(x, y) => write!(f, "v({x},{y})"),
            EdgeLabel::H(x, y) => write!(f, "h({x},{y})"),
            EdgeLabel::Db(x) => write!(f, "db({x})"),
            EdgeLabel::Dt(x) => write!(f, "dt({x})"),
            EdgeLabel::Dl(y) => write!(f, "dl({y})"),
            EdgeLabel::Dr(y) => write!(f, "dr({y})"),
        }
    }
}

impl EdgeLabel {
    pub fn is_dangling(&self) -> bool {
        !matches!(self, EdgeLabel::V(..) | EdgeLabel::H(..))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub label: EdgeLabel,
    pub tail: Point,
    pub head: Point,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VertexFamily {
    Bulk,
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PlaquetteKind {
    Interior,
    Top,
    Bottom,
    Left,
    Right,
}

/// A face with its boundary listed counterclockwise. Each entry carries `+1`
/// when the edge is traversed along its orientation. Boundary triangles start
/// at their vertex outside the patch.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Plaquette {
    pub kind: PlaquetteKind,
    pub anchor: Point,
    pub boundary: Vec<(EdgeLabel, i8)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Incidence {
    Outgoing,
    Incoming,
}

#[derive(Debug, Clone)]
pub struct Lattice {
    pub width: usize,
    pub height: usize,
    a_edges: Vec<Edge>,
    b_edges: Vec<Edge>,
    a_index: HashMap<EdgeLabel, usize>,
    b_index: HashMap<EdgeLabel, usize>,
}

fn edge(label: EdgeLabel, h: i32, w: i32) -> Edge {
    let (tail, head) = match label {
        EdgeLabel::V(x, y) => ((x, y), (x, y + 1)),
        EdgeLabel::H(x, y) => ((x, y), (x + 1, y)),
        EdgeLabel::Db(x) => ((x, -1), (x, 0)),
        EdgeLabel::Dt(x) => ((x, h), (x, h + 1)),
        EdgeLabel::Dl(y) => ((-1, y), (0, y)),
        EdgeLabel::Dr(y) => ((w, y), (w + 1, y)),
    };
    Edge { label, tail, head }
}

impl Lattice {
    pub fn new(width: usize, height: usize) -> Result<Self> {
        if width == 0 || height == 0 || width > 64 || height > 64 {
            return Err(Error::InvalidPatch { width, height });
        }
        let (w, h) = (width as i32, height as i32);
        let mut a = vec![];
        a.extend((0..=w).map(EdgeLabel::Db));
        for y in 0..h {
            a.extend((0..=w).map(|x| EdgeLabel::V(x, y)));
        }
        a.extend((0..=w).map(EdgeLabel::Dt));
        for y in 0..=h {
            a.extend((0..w).map(|x| EdgeLabel::H(x, y)));
        }
        let mut b = vec![];
        for y in 0..h {
            b.extend((0..=w).map(|x| EdgeLabel::V(x, y)));
        }
        for y in 0..=h {
            b.push(EdgeLabel::Dl(y));
            b.extend((0..w).map(|x| EdgeLabel::H(x, y)));
            b.push(EdgeLabel::Dr(y));
        }
        let a_edges: Vec<Edge> = a.iter().map(|&l| edge(l, h, w)).collect();
        let b_edges: Vec<Edge> = b.iter().map(|&l| edge(l, h, w)).collect();
        let a_index = a.iter().enumerate().map(|(i, &l)| (l, i)).collect();
        let b_index = b.iter().enumerate().map(|(i, &l)| (l, i)).collect();
        Ok(Self { width, height, a_edges, b_edges, a_index, b_index })
    }

    fn w(&self) -> i32 {
        self.width as i32
    }

    fn h(&self) -> i32 {
        self.height as i32
    }

    pub fn a_edges(&self) -> &[Edge] {
        &self.a_edges
    }

    pub fn b_edges(&self) -> &[Edge] {
        &self.b_edges
    }

    pub fn a_index(&self, label: EdgeLabel) -> Option<usize> {
        self.a_index.get(&label).copied()
    }

    pub fn b_index(&self, label: EdgeLabel) -> Option<usize> {
        self.b_index.get(&label).copied()
    }

    pub fn edge(&self, label: EdgeLabel) -> Result<Edge> {
        if self.a_index.contains_key(&label) || self.b_index.contains_key(&label) {
            Ok(edge(label, self.h(), self.w()))
        } else {
            Err(Error::InvalidPath(format!("edge {label} is not in the patch")))
        }
    }

    /// Union of both edge sets: `E_A` order followed by the side dangling edges.
    pub fn all_edges(&self) -> Vec<Edge> {
        let mut out = self.a_edges.clone();
        out.extend(self.b_edges.iter().filter(|e| !self.a_index.contains_key(&e.label)));
        out
    }

    /// Grid vertices in row-major order.
    pub fn vertices(&self) -> Vec<Point> {
        (0..=self.h()).flat_map(|y| (0..=self.w()).map(move |x| (x, y))).collect()
    }

    pub fn contains_vertex(&self, p: Point) -> bool {
        (0..=self.w()).contains(&p.0) && (0..=self.h()).contains(&p.1)
    }

    pub fn vertex_family(&self, p: Point) -> VertexFamily {
        if p.0 == 0 {
            VertexFamily::Left
        } else if p.0 == self.w() {
            VertexFamily::Right
        } else {
            VertexFamily::Bulk
        }
    }

    /// Every edge of the union lattice touching a grid vertex.
    pub fn incident(&self, p: Point) -> Vec<(EdgeLabel, Incidence)> {
        self.all_edges()
            .into_iter()
            .filter_map(|e| {
                if e.tail == p {
                    Some((e.label, Incidence::Outgoing))
                } else if e.head == p {
                    Some((e.label, Incidence::Incoming))
                } else {
                    None
                }
            })
            .collect()
    }

    fn interior(&self) -> Vec<Plaquette> {
        let mut out = vec![];
        for y in 0..self.h() {
            for x in 0..self.w() {
                out.push(Plaquette {
                    kind: PlaquetteKind::Interior,
                    anchor: (x, y),
                    boundary: vec![
                        (EdgeLabel::H(x, y), 1),
                        (EdgeLabel::V(x + 1, y), 1),
                        (EdgeLabel::H(x, y + 1), -1),
                        (EdgeLabel::V(x, y), -1),
                    ],
                });
            }
        }
        out
    }

    fn bottom(&self) -> Vec<Plaquette> {
        (0..self.w())
            .map(|x| Plaquette {
                kind: PlaquetteKind::Bottom,
                anchor: (x, -1),
                boundary: vec![(EdgeLabel::Db(x + 1), 1), (EdgeLabel::H(x, 0), -1), (EdgeLabel::Db(x), -1)],
            })
            .collect()
    }

    fn top(&self) -> Vec<Plaquette> {
        let h = self.h();
        (0..self.w())
            .map(|x| Plaquette {
                kind: PlaquetteKind::Top,
                anchor: (x, h),
                boundary: vec![(EdgeLabel::Dt(x), -1), (EdgeLabel::H(x, h), 1), (EdgeLabel::Dt(x + 1), 1)],
            })
            .collect()
    }

    fn left(&self) -> Vec<Plaquette> {
        (0..self.h())
            .map(|y| Plaquette {
                kind: PlaquetteKind::Left,
                anchor: (-1, y),
                boundary: vec![(EdgeLabel::Dl(y), 1), (EdgeLabel::V(0, y), 1), (EdgeLabel::Dl(y + 1), -1)],
            })
            .collect()
    }

    fn right(&self) -> Vec<Plaquette> {
        let w = self.w();
        (0..self.h())
            .map(|y| Plaquette {
                kind: PlaquetteKind::Right,
                anchor: (w, y),
                boundary: vec![(EdgeLabel::Dr(y + 1), -1), (EdgeLabel::V(w, y), -1), (EdgeLabel::Dr(y), 1)],
            })
            .collect()
    }

    /// Faces of `E_A`: bottom triangles, interior squares, top triangles.
    pub fn a_plaquettes(&self) -> Vec<Plaquette> {
        let mut out = self.bottom();
        out.extend(self.interior());
        out.extend(self.top());
        out
    }

    /// Faces of `E_B`: interior squares, left and right triangles.
    pub fn b_plaquettes(&self) -> Vec<Plaquette> {
        let mut out = self.interior();
        out.extend(self.left());
        out.extend(self.right());
        out
    }

    /// Faces of the union lattice.
    pub fn all_plaquettes(&self) -> Vec<Plaquette> {
        let mut out = self.a_plaquettes();
        out.extend(self.left());
        out.extend(self.right());
        out
    }

    /// `E_A` edges whose qudit is conjugated by the gauge qubit at `p`: the
    /// edges whose tail is `p`, plus the bottom dangling edge ending at `p`.
    pub fn controlled_edges(&self, p: Point) -> Vec<EdgeLabel> {
        self.a_edges
            .iter()
            .filter(|e| {
                if matches!(e.label, EdgeLabel::Db(_)) {
                    e.head == p
                } else {
                    e.tail == p
                }
            })
            .map(|e| e.label)
            .collect()
    }

    /// `E_B` edges touching `p`.
    pub fn b_incident(&self, p: Point) -> Vec<EdgeLabel> {
        self.b_edges.iter().filter(|e| e.tail == p || e.head == p).map(|e| e.label).collect()
    }

    /// Upward direct path `db(x), v(x, 0..H), dt(x)` joining the bottom and
    /// top boundaries.
    pub fn vertical_path(&self, x: i32) -> Result<Vec<(EdgeLabel, bool)>> {
        if !(0..=self.w()).contains(&x) {
            return Err(Error::InvalidPath(format!("column {x} outside patch")));
        }
        let mut p = vec![(EdgeLabel::Db(x), true)];
        p.extend((0..self.h()).map(|y| (EdgeLabel::V(x, y), true)));
        p.push((EdgeLabel::Dt(x), true));
        Ok(p)
    }

    /// Dual path crossing every vertical edge of row `y` from left to right.
    pub fn row_crossing(&self, y: i32) -> Result<Vec<(EdgeLabel, bool)>> {
        if !(0..self.h()).contains(&y) {
            return Err(Error::InvalidPath(format!("row {y} outside patch")));
        }
        Ok((0..=self.w()).map(|x| (EdgeLabel::V(x, y), true)).collect())
    }

    /// Shortest path between two grid vertices over bulk edges, breadth-first
    /// with a fixed neighbour order.
    pub fn vertex_path(&self, from: Point, to: Point) -> Result<Vec<(EdgeLabel, bool)>> {
        for p in [from, to] {
            if !self.contains_vertex(p) {
                return Err(Error::InvalidSite(format!("vertex {p:?} outside patch")));
            }
        }
        let mut prev: HashMap<Point, (Point, EdgeLabel, bool)> = HashMap::new();
        let mut queue = VecDeque::from([from]);
        let mut seen = vec![from];
        while let Some(p) = queue.pop_front() {
            if p == to {
                break;
            }
            let (x, y) = p;
            let steps = [
                ((x + 1, y), EdgeLabel::H(x, y), true),
                ((x - 1, y), EdgeLabel::H(x - 1, y), false),
                ((x, y + 1), EdgeLabel::V(x, y), true),
                ((x, y - 1), EdgeLabel::V(x, y - 1), false),
            ];
            for (q, l, fwd) in steps {
                if self.contains_vertex(q) && !seen.contains(&q) {
                    seen.push(q);
                    prev.insert(q, (p, l, fwd));
                    queue.push_back(q);
                }
            }
        }
        let mut path = vec![];
        let mut cur = to;
        while cur != from {
            let (p, l, f) = prev[&cur];
            path.push((l, f));
            cur = p;
        }
        path.reverse();
        Ok(path)
    }

    /// Index of a face in [`Lattice::all_plaquettes`].
    pub fn plaquette_index(&self, kind: PlaquetteKind, anchor: Point) -> Option<usize> {
        self.all_plaquettes().iter().position(|p| p.kind == kind && p.anchor == anchor)
    }

    /// Shortest dual path between two interior faces, crossing bulk edges.
    /// Each entry is `(edge, forward)` with forward meaning a rightward or
    /// upward crossing.
    pub fn dual_path(&self, from: Point, to: Point) -> Result<Vec<(EdgeLabel, bool)>> {
        let inside = |p: Point| (0..self.w()).contains(&p.0) && (0..self.h()).contains(&p.1);
        for p in [from, to] {
            if !inside(p) {
                return Err(Error::InvalidSite(format!("face {p:?} is not interior")));
            }
        }
        let mut prev: HashMap<Point, (Point, EdgeLabel, bool)> = HashMap::new();
        let mut queue = VecDeque::from([from]);
        let mut seen = vec![from];
        while let Some(p) = queue.pop_front() {
            if p == to {
                break;
            }
            let (x, y) = p;
            let steps = [
                ((x + 1, y), EdgeLabel::V(x + 1, y), true),
                ((x - 1, y), EdgeLabel::V(x, y), false),
                ((x, y + 1), EdgeLabel::H(x, y + 1), true),
                ((x, y - 1), EdgeLabel::H(x, y), false),
            ];
            for (q, l, fwd) in steps {
                if inside(q) && !seen.contains(&q) {
                    seen.push(q);
                    prev.insert(q, (p, l, fwd));
                    queue.push_back(q);
                }
            }
        }
        let mut path = vec![];
        let mut cur = to;
        while cur != from {
            let (p, l, f) = prev[&cur];
            path.push((l, f));
            cur = p;
        }
        path.reverse();
        Ok(path)
    }
}

/// A vertex together with an adjacent interior face, given by its anchor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Site {
    pub vertex: Point,
    pub face: Point,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Triangle {
    /// Runs along `edge`, forward if in the edge's direction.
    Direct { edge: EdgeLabel, forward: bool },
    /// Crosses `edge`; `left` selects left multiplication on that edge.
    Dual { edge: EdgeLabel, left: bool },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ribbon {
    pub triangles: Vec<Triangle>,
}

impl Ribbon {
    pub fn new(triangles: Vec<Triangle>) -> Result<Self> {
        let mut seen = vec![];
        for t in &triangles {
            let e = match t {
                Triangle::Direct { edge, .. } | Triangle::Dual { edge, .. } => *edge,
            };
            if seen.contains(&e) {
                return Err(Error::InvalidPath(format!("edge {e} used twice")));
            }
            seen.push(e);
        }
        Ok(Self { triangles })
    }

    pub fn concat(&self, other: &Ribbon) -> Result<Ribbon> {
        let mut t = self.triangles.clone();
        t.extend(other.triangles.iter().copied());
        Ribbon::new(t)
    }

    /// Edges of the direct triangles, in order.
    pub fn direct_edges(&self) -> Vec<(EdgeLabel, bool)> {
        self.triangles
            .iter()
            .filter_map(|t| match t {
                Triangle::Direct { edge, forward } => Some((*edge, *forward)),
                _ => None,
            })
            .collect()
    }

    pub fn dual_edges(&self) -> Vec<(EdgeLabel, bool)> {
        self.triangles
            .iter()
            .filter_map(|t| match t {
                Triangle::Dual { edge, left } => Some((*edge, *left)),
                _ => None,
            })
            .collect()
    }

    /// Direct triangles along a path of `(edge, forward)` steps.
    pub fn from_direct(path: &[(EdgeLabel, bool)]) -> Result<Self> {
        Ribbon::new(path.iter().map(|&(edge, forward)| Triangle::Direct { edge, forward }).collect())
    }

    /// Row ribbon along `y` from vertex `x0` to `x1 > x0`: crossings of
    /// `v(x, y)` alternate with direct steps along `h(x, y)`.
    pub fn row(lat: &Lattice, y: i32, x0: i32, x1: i32) -> Result<Self> {
        if !(0..lat.height as i32).contains(&y) || x0 < 0 || x1 > lat.width as i32 || x0 >= x1 {
            return Err(Error::InvalidPath(format!("row ribbon y={y} x={x0}..{x1}")));
        }
        let mut t = vec![];
        for x in x0..x1 {
            t.push(Triangle::Dual { edge: EdgeLabel::V(x, y), left: true });
            t.push(Triangle::Direct { edge: EdgeLabel::H(x, y), forward: true });
        }
        t.push(Triangle::Dual { edge: EdgeLabel::V(x1, y), left: true });
        Ribbon::new(t)
    }
}

/// Ribbon between two sites: the direct segment along the shortest vertex
/// path, followed by the dual segment along the shortest face path.
pub fn ribbon_between(lat: &Lattice, from: Site, to: Site) -> Result<Ribbon> {
    for s in [from, to] {
        let (vx, vy) = s.vertex;
        let (fx, fy) = s.face;
        if !lat.contains_vertex(s.vertex) || !(fx == vx || fx == vx - 1) || !(fy == vy || fy == vy - 1) {
            return Err(Error::InvalidSite(format!("{s:?}")));
        }
    }
    let mut t: Vec<Triangle> = lat
        .vertex_path(from.vertex, to.vertex)?
        .into_iter()
        .map(|(edge, forward)| Triangle::Direct { edge, forward })
        .collect();
    let direct: Vec<EdgeLabel> = t
        .iter()
        .map(|x| match x {
            Triangle::Direct { edge, .. } | Triangle::Dual { edge, .. } => *edge,
        })
        .collect();
    for (edge, fwd) in lat.dual_path(from.face, to.face)? {
        if direct.contains(&edge) {
            return Err(Error::InvalidPath(format!("dual segment reuses {edge}")));
        }
        t.push(Triangle::Dual { edge, left: fwd });
    }
    Ribbon::new(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_patch_counts() {
        let l = Lattice::new(1, 1).unwrap();
        assert_eq!(l.a_edges().len(), 8);
        assert_eq!(l.b_edges().len(), 8);
        assert_eq!(l.vertices().len(), 4);
        assert_eq!(l.a_plaquettes().len(), 3);
        assert_eq!(l.b_plaquettes().len(), 3);
    }

    #[test]
    fn two_by_two_counts() {
        let l = Lattice::new(2, 2).unwrap();
        assert_eq!(l.a_edges().len(), 18);
        assert_eq!(l.b_edges().len(), 18);
        assert_eq!(l.all_edges().len(), 24);
    }

    #[test]
    fn invalid_patch() {
        assert!(matches!(Lattice::new(0, 1), Err(Error::InvalidPatch { .. })));
    }

    #[test]
    fn bulk_vertex_controls_two_edges() {
        let l = Lattice::new(2, 2).unwrap();
        assert_eq!(l.controlled_edges((1, 1)).len(), 2);
        assert_eq!(l.controlled_edges((1, 0)).len(), 3);
        assert_eq!(l.controlled_edges((2, 2)).len(), 1);
    }

    #[test]
    fn every_a_edge_has_one_controller() {
        let l = Lattice::new(3, 2).unwrap();
        let mut count = vec![0; l.a_edges().len()];
        for p in l.vertices() {
            for e in l.controlled_edges(p) {
                count[l.a_index(e).unwrap()] += 1;
            }
        }
        assert!(count.iter().all(|&c| c == 1));
    }

    #[test]
    fn plaquette_boundaries_close() {
        let l = Lattice::new(2, 3).unwrap();
        for p in l.all_plaquettes() {
            let mut pos: Option<Point> = None;
            let mut start = None;
            for &(lab, s) in &p.boundary {
                let e = l.edge(lab).unwrap();
                let (a, b) = if s > 0 { (e.tail, e.head) } else { (e.head, e.tail) };
                if let Some(q) = pos {
                    if q != a {
                        // boundary triangles pass through the outside region
                        assert!(!l.contains_vertex(q) && !l.contains_vertex(a), "{p:?}");
                    }
                } else {
                    start = Some(a);
                }
                pos = Some(b);
            }
            if pos != start {
                assert!(!l.contains_vertex(pos.unwrap()) && !l.contains_vertex(start.unwrap()));
            }
        }
    }

    #[test]
    fn ribbon_between_uses_vertex_path() {
        let l = Lattice::new(2, 2).unwrap();
        let r = ribbon_between(&l, Site { vertex: (0, 0), face: (0, 0) }, Site { vertex: (2, 2), face: (1, 1) })
            .unwrap();
        assert_eq!(r.direct_edges().len(), 4);
        assert_eq!(r.dual_edges().len(), 2);
    }
}
