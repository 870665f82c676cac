//! Quadratic spaces of types B3 and D4 over GF(q), their maximal totally
//! isotropic subspaces, the dual polar graphs on them, the subgraphs far from
//! a vertex or an edge, and the reflection relating D4 to B3.
//!
//! Coordinates are 0-based in code: `x[0]` is the first coordinate.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;

use crate::certify::{Check, CheckList};
use crate::error::{Error, Result};
use crate::exactlin::{self, GfMatrix};
use crate::gf::{Elem, Field};
use crate::graph::{self, Graph};

/// Which of the two fixed quadratic spaces this is.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceKind {
    /// `x1 x5 + x2 x6 + x3 x7 + x4^2` on GF(q)^7.
    B3,
    /// `x1 x5 + x2 x6 + x3 x7 + x4 x8` on GF(q)^8.
    D4,
}

#[derive(Debug, Clone)]
pub struct QuadraticSpace {
    field: Field,
    kind: SpaceKind,
    dim: usize,
    /// Upper triangular: `Q(x) = sum_{i <= j} form[i][j] x_i x_j`.
    form: Vec<Vec<Elem>>,
    witt: usize,
}

impl QuadraticSpace {
    pub fn b3(q: u64) -> Result<Self> {
        Ok(Self::b3_over(&Field::new(q)?))
    }

    pub fn d4(q: u64) -> Result<Self> {
        Ok(Self::d4_over(&Field::new(q)?))
    }

    pub fn b3_over(field: &Field) -> Self {
        let mut form = vec![vec![Elem::ZERO; 7]; 7];
        for i in 0..3 {
            form[i][i + 4] = Elem::ONE;
        }
        form[3][3] = Elem::ONE;
        QuadraticSpace {
            field: field.clone(),
            kind: SpaceKind::B3,
            dim: 7,
            form,
            witt: 3,
        }
    }

    pub fn d4_over(field: &Field) -> Self {
        let mut form = vec![vec![Elem::ZERO; 8]; 8];
        for i in 0..4 {
            form[i][i + 4] = Elem::ONE;
        }
        QuadraticSpace {
            field: field.clone(),
            kind: SpaceKind::D4,
            dim: 8,
            form,
            witt: 4,
        }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn witt_index(&self) -> usize {
        self.witt
    }

    pub fn form(&self) -> &[Vec<Elem>] {
        &self.form
    }

    pub fn eval(&self, x: &[Elem]) -> Elem {
        let f = &self.field;
        let mut acc = Elem::ZERO;
        for i in 0..self.dim {
            if x[i].is_zero() {
                continue;
            }
            for j in i..self.dim {
                let c = self.form[i][j];
                if !c.is_zero() && !x[j].is_zero() {
                    acc = f.add(acc, f.mul(c, f.mul(x[i], x[j])));
                }
            }
        }
        acc
    }

    /// Polar form `B(x, y) = Q(x + y) - Q(x) - Q(y)`.
    pub fn polar(&self, x: &[Elem], y: &[Elem]) -> Elem {
        let f = &self.field;
        let s: Vec<Elem> = x.iter().zip(y).map(|(&a, &b)| f.add(a, b)).collect();
        f.sub(f.sub(self.eval(&s), self.eval(x)), self.eval(y))
    }

    /// Gram matrix of the polar form.
    pub fn gram(&self) -> GfMatrix {
        let n = self.dim;
        let mut g = GfMatrix::zeros(&self.field, n, n);
        let unit = |i: usize| {
            let mut v = vec![Elem::ZERO; n];
            v[i] = Elem::ONE;
            v
        };
        for i in 0..n {
            for j in 0..n {
                g.set(i, j, self.polar(&unit(i), &unit(j)));
            }
        }
        g
    }

    /// Dimension of the radical of the polar form.
    pub fn polar_radical(&self) -> GfMatrix {
        exactlin::kernel(&self.gram())
    }

    /// Every vector of the span of `basis` is singular. Checks `Q` on each
    /// basis vector and on each pairwise sum, which covers characteristic 2.
    pub fn is_totally_singular(&self, basis: &GfMatrix) -> bool {
        let f = &self.field;
        let rows: Vec<&[Elem]> = basis.row_iter().collect();
        for (i, a) in rows.iter().enumerate() {
            if !self.eval(a).is_zero() {
                return false;
            }
            for b in &rows[i + 1..] {
                let s: Vec<Elem> = a.iter().zip(b.iter()).map(|(&x, &y)| f.add(x, y)).collect();
                if !self.eval(&s).is_zero() {
                    return false;
                }
            }
        }
        true
    }

    fn unit(&self, i: usize) -> Vec<Elem> {
        let mut v = vec![Elem::ZERO; self.dim];
        v[i] = Elem::ONE;
        v
    }

    /// Span of the given coordinate vectors (0-based indices).
    pub fn coordinate_subspace(&self, coords: &[usize]) -> Subspace {
        let rows: Vec<Vec<Elem>> = coords.iter().map(|&i| self.unit(i)).collect();
        Subspace::from_rows(&self.field, self.dim, &rows)
    }
}

/// A subspace held as its canonical RREF basis.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Subspace {
    basis: GfMatrix,
}

impl PartialOrd for Subspace {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Subspace {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.basis.entries().cmp(other.basis.entries())
    }
}

impl Subspace {
    pub fn from_rows<R: AsRef<[Elem]>>(field: &Field, dim: usize, rows: &[R]) -> Self {
        Self::span(&GfMatrix::from_rows(field, dim, rows))
    }

    /// Row space of `m`.
    pub fn span(m: &GfMatrix) -> Self {
        Subspace {
            basis: exactlin::row_space(m),
        }
    }

    pub fn basis(&self) -> &GfMatrix {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.cols()
    }

    /// Flattened RREF entries; the lexicographic sort key.
    pub fn encoding(&self) -> Vec<u32> {
        self.basis.entries().iter().map(|e| e.0).collect()
    }

    /// Vertex label: the flattened RREF basis as comma-separated integers.
    pub fn label(&self) -> String {
        let parts: Vec<String> = self.encoding().iter().map(u32::to_string).collect();
        parts.join(",")
    }

    pub fn contains(&self, v: &[Elem]) -> bool {
        let m = self.basis.vstack(&GfMatrix::from_rows(self.basis.field(), v.len(), &[v]));
        exactlin::rank(&m) == self.dim()
    }

    pub fn intersection_dim(&self, other: &Subspace) -> usize {
        let r = exactlin::rank(&self.basis.vstack(&other.basis));
        self.dim() + other.dim() - r
    }

    /// `self ∩ other` via the left kernel of the stacked bases.
    pub fn intersection(&self, other: &Subspace) -> Subspace {
        let f = self.basis.field();
        let stacked = self.basis.vstack(&other.basis);
        let coeffs = exactlin::kernel(&stacked.transpose());
        let k = self.dim();
        let rows: Vec<Vec<Elem>> = coeffs
            .row_iter()
            .map(|lambda| combine(f, &lambda[..k], &self.basis))
            .collect();
        Subspace::from_rows(f, self.ambient_dim(), &rows)
    }

    /// Intersection with the hyperplane `{x : sum functional_i x_i = 0}`.
    pub fn meet_hyperplane(&self, functional: &[Elem]) -> Subspace {
        let f = self.basis.field();
        let values: Vec<Elem> = self
            .basis
            .row_iter()
            .map(|r| dot(f, r, functional))
            .collect();
        let coeffs = exactlin::kernel(&GfMatrix::from_rows(f, values.len(), &[values]));
        let rows: Vec<Vec<Elem>> = coeffs
            .row_iter()
            .map(|lambda| combine(f, lambda, &self.basis))
            .collect();
        Subspace::from_rows(f, self.ambient_dim(), &rows)
    }

    /// All hyperplanes of this subspace.
    pub fn hyperplanes(&self) -> Vec<Subspace> {
        let f = self.basis.field();
        let k = self.dim();
        projective_points(f, k)
            .into_iter()
            .map(|c| self.meet_in_coordinates(&c))
            .collect()
    }

    fn meet_in_coordinates(&self, c: &[Elem]) -> Subspace {
        let f = self.basis.field();
        let coeffs = exactlin::kernel(&GfMatrix::from_rows(f, c.len(), &[c]));
        let rows: Vec<Vec<Elem>> = coeffs
            .row_iter()
            .map(|lambda| combine(f, lambda, &self.basis))
            .collect();
        Subspace::from_rows(f, self.ambient_dim(), &rows)
    }

    /// Image under a linear map given by a function on vectors.
    pub fn map(&self, phi: impl Fn(&[Elem]) -> Vec<Elem>) -> Subspace {
        let rows: Vec<Vec<Elem>> = self.basis.row_iter().map(phi).collect();
        let dim = rows.first().map_or(self.ambient_dim(), Vec::len);
        Subspace::from_rows(self.basis.field(), dim, &rows)
    }
}

fn dot(f: &Field, a: &[Elem], b: &[Elem]) -> Elem {
    a.iter()
        .zip(b)
        .fold(Elem::ZERO, |acc, (&x, &y)| f.add(acc, f.mul(x, y)))
}

fn combine(f: &Field, lambda: &[Elem], basis: &GfMatrix) -> Vec<Elem> {
    let mut out = vec![Elem::ZERO; basis.cols()];
    for (i, &l) in lambda.iter().enumerate() {
        if l.is_zero() {
            continue;
        }
        for (o, &b) in out.iter_mut().zip(basis.row(i)) {
            *o = f.add(*o, f.mul(l, b));
        }
    }
    out
}

/// Nonzero vectors of GF(q)^n with first nonzero coordinate 1, in
/// ascending encoding order.
pub fn projective_points(f: &Field, n: usize) -> Vec<Vec<Elem>> {
    let q = f.order() as u64;
    let total = q.pow(n as u32);
    let mut out = Vec::new();
    for mut idx in 1..total {
        let mut v = vec![Elem::ZERO; n];
        for i in (0..n).rev() {
            v[i] = Elem((idx % q) as u32);
            idx /= q;
        }
        if v.iter().find(|x| !x.is_zero()) == Some(&Elem::ONE) {
            out.push(v);
        }
    }
    out
}

fn vector_key(v: &[Elem], q: u64) -> u64 {
    v.iter().fold(0u64, |acc, x| acc * q + x.0 as u64)
}

/// Lookup from vectors to projective point ids; vectors are normalized to a
/// leading 1 on the fly.
struct PointIndex {
    q: u64,
    dense: Vec<u32>,
    sparse: HashMap<u64, u32>,
}

impl PointIndex {
    const DENSE_LIMIT: u64 = 1 << 24;

    fn new(q: u64, n: usize, points: &[Vec<Elem>]) -> Self {
        let total = q.checked_pow(n as u32).unwrap_or(u64::MAX);
        let mut idx = PointIndex {
            q,
            dense: Vec::new(),
            sparse: HashMap::new(),
        };
        if total <= Self::DENSE_LIMIT {
            idx.dense = vec![u32::MAX; total as usize];
            for (i, p) in points.iter().enumerate() {
                idx.dense[vector_key(p, q) as usize] = i as u32;
            }
        } else {
            idx.sparse = points
                .iter()
                .enumerate()
                .map(|(i, p)| (vector_key(p, q), i as u32))
                .collect();
        }
        idx
    }

    fn get(&self, f: &Field, v: &[Elem]) -> Option<usize> {
        let lead = *v.iter().find(|x| !x.is_zero())?;
        let inv = f.inv(lead).ok()?;
        let key = v
            .iter()
            .fold(0u64, |acc, &x| acc * self.q + f.mul(x, inv).0 as u64);
        let i = if self.dense.is_empty() {
            *self.sparse.get(&key)?
        } else {
            self.dense[key as usize]
        };
        (i != u32::MAX).then_some(i as usize)
    }
}

/// Every vector in the row space of `m`, zero included.
fn all_vectors(m: &GfMatrix) -> Vec<Vec<Elem>> {
    let f = m.field();
    let mut out = vec![vec![Elem::ZERO; m.cols()]];
    for row in m.row_iter() {
        let mut next = Vec::with_capacity(out.len() * f.order() as usize);
        for c in f.elements() {
            for v in &out {
                next.push(v.iter().zip(row).map(|(&a, &b)| f.add(a, f.mul(c, b))).collect());
            }
        }
        out = next;
    }
    out
}

/// All maximal totally singular subspaces, sorted by RREF encoding.
///
/// Built one dimension at a time: each singular subspace is extended by every
/// singular point orthogonal to it and outside it, and the results are
/// deduplicated by canonical RREF.
pub fn max_isotropic(space: &QuadraticSpace) -> Vec<Subspace> {
    let f = space.field();
    let q = f.order() as u64;
    let n = space.dim();
    let points: Vec<Vec<Elem>> = projective_points(f, n)
        .into_iter()
        .filter(|v| space.eval(v).is_zero())
        .collect();
    let index = PointIndex::new(q, n, &points);
    let words = points.len().div_ceil(64);
    // perp[i] = bitset of singular points orthogonal to point i (including i).
    let perp: Vec<Vec<u64>> = points
        .par_iter()
        .map(|p| {
            let mut bits = vec![0u64; words];
            for (j, r) in points.iter().enumerate() {
                if space.polar(p, r).is_zero() {
                    bits[j / 64] |= 1 << (j % 64);
                }
            }
            bits
        })
        .collect();

    let mut level: Vec<Subspace> = points
        .iter()
        .map(|p| Subspace::from_rows(f, n, &[p]))
        .collect();
    for _ in 1..space.witt_index() {
        let next: HashSet<Subspace> = level
            .par_iter()
            .flat_map_iter(|s| {
                let mut mask = vec![!0u64; words];
                for row in s.basis.row_iter() {
                    let i = index.get(f, row).expect("basis rows are singular points");
                    for (m, b) in mask.iter_mut().zip(&perp[i]) {
                        *m &= b;
                    }
                }
                // Every point of S + p other than those of S yields the same
                // extension, so clear them from the mask once it is produced.
                let svecs = all_vectors(s.basis());
                let clear = |mask: &mut [u64], v: &[Elem]| {
                    if let Some(i) = index.get(f, v) {
                        mask[i / 64] &= !(1 << (i % 64));
                    }
                };
                for v in &svecs {
                    clear(&mut mask, v);
                }
                let mut out = Vec::new();
                let mut sum = vec![Elem::ZERO; n];
                for w in 0..words {
                    while mask[w] != 0 {
                        let j = w * 64 + mask[w].trailing_zeros() as usize;
                        let m = s
                            .basis
                            .vstack(&GfMatrix::from_rows(f, n, &[&points[j]]));
                        out.push(Subspace::span(&m));
                        for v in &svecs {
                            for ((o, &a), &b) in sum.iter_mut().zip(v).zip(&points[j]) {
                                *o = f.add(a, b);
                            }
                            clear(&mut mask, &sum);
                        }
                    }
                }
                out
            })
            .collect();
        level = next.into_iter().collect();
    }
    level.sort();
    level
}

/// Exhaustive search over every k-dimensional subspace of GF(q)^n, enumerated
/// as RREF matrices. Independent of [`max_isotropic`]; only practical for q = 2.
pub fn brute_force_isotropic(space: &QuadraticSpace, k: usize) -> Vec<Subspace> {
    let f = space.field();
    let n = space.dim();
    let q = f.order() as u64;
    let mut out = Vec::new();
    for pivots in combinations(n, k) {
        // Free positions: row r, column c > pivots[r], c not a pivot.
        let free: Vec<(usize, usize)> = (0..k)
            .flat_map(|r| {
                let pv = &pivots;
                (pv[r] + 1..n)
                    .filter(move |c| !pv.contains(c))
                    .map(move |c| (r, c))
            })
            .collect();
        let total = q.pow(free.len() as u32);
        for mut idx in 0..total {
            let mut m = GfMatrix::zeros(f, k, n);
            for (r, &p) in pivots.iter().enumerate() {
                m.set(r, p, Elem::ONE);
            }
            for &(r, c) in &free {
                m.set(r, c, Elem((idx % q) as u32));
                idx /= q;
            }
            if space.is_totally_singular(&m) {
                out.push(Subspace { basis: m });
            }
        }
    }
    out.sort();
    out
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Partition of the maximal subspaces of a D4 space into its two families.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilySplit {
    /// Indices into the subspace list; `f1` contains `<e1, e2, e3, e4>` when present.
    pub f1: Vec<usize>,
    pub f2: Vec<usize>,
    /// `true` for members of `f2`, indexed like the subspace list.
    pub in_f2: Vec<bool>,
}

/// Lists up to this long have the parity law checked on every pair.
const PARITY_EXHAUSTIVE_LIMIT: usize = 512;
const PARITY_SAMPLE: usize = 10_000;

/// Splits by parity of the intersection with the first subspace, then checks
/// the parity law: exhaustively for short lists, on a fixed pseudorandom
/// sample of pairs otherwise.
pub fn split_families(subspaces: &[Subspace], witt: usize) -> Result<FamilySplit> {
    let Some(first) = subspaces.first() else {
        return Ok(FamilySplit {
            f1: Vec::new(),
            f2: Vec::new(),
            in_f2: Vec::new(),
        });
    };
    let mut in_f2: Vec<bool> = subspaces
        .par_iter()
        .map(|x| (x.intersection_dim(first) + witt) % 2 == 1)
        .collect();
    let e = first.basis.field();
    let e_space = Subspace::from_rows(
        e,
        first.ambient_dim(),
        &(0..witt)
            .map(|i| {
                let mut v = vec![Elem::ZERO; first.ambient_dim()];
                v[i] = Elem::ONE;
                v
            })
            .collect::<Vec<_>>(),
    );
    if let Ok(pos) = subspaces.binary_search(&e_space) {
        if in_f2[pos] {
            in_f2.iter_mut().for_each(|b| *b = !*b);
        }
    }
    let violates = |i: usize, j: usize| {
        let same = in_f2[i] == in_f2[j];
        let even = (subspaces[i].intersection_dim(&subspaces[j]) + witt) % 2 == 0;
        same != even
    };
    let n = subspaces.len();
    let bad = if n <= PARITY_EXHAUSTIVE_LIMIT {
        (0..n)
            .into_par_iter()
            .flat_map_iter(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|&(i, j)| violates(i, j))
            .min()
    } else {
        let mut state = 0x9e37_79b9_7f4a_7c15u64;
        let mut pairs = Vec::with_capacity(PARITY_SAMPLE);
        for _ in 0..PARITY_SAMPLE {
            let a = splitmix(&mut state) as usize % n;
            let b = splitmix(&mut state) as usize % n;
            pairs.push((a.min(b), a.max(b)));
        }
        pairs.into_par_iter().filter(|&(i, j)| violates(i, j)).min()
    };
    if let Some((i, j)) = bad {
        return Err(Error::ParityViolation(i, j));
    }
    let f1 = (0..n).filter(|&i| !in_f2[i]).collect();
    let f2 = (0..n).filter(|&i| in_f2[i]).collect();
    Ok(FamilySplit { f1, f2, in_f2 })
}

fn splitmix(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Graph on `subspaces` with `X ~ Y` iff they share a hyperplane, found by
/// bucketing every hyperplane of every subspace.
pub fn hyperplane_graph(subspaces: &[Subspace]) -> Graph {
    let hyper: Vec<Vec<Subspace>> = subspaces.par_iter().map(Subspace::hyperplanes).collect();
    let mut buckets: HashMap<&Subspace, Vec<u32>> = HashMap::new();
    for (i, hs) in hyper.iter().enumerate() {
        for h in hs {
            buckets.entry(h).or_default().push(i as u32);
        }
    }
    let mut lists = vec![Vec::new(); subspaces.len()];
    for members in buckets.values() {
        for &a in members {
            for &b in members {
                if a != b {
                    lists[a as usize].push(b);
                }
            }
        }
    }
    Graph::from_adjacency(lists)
        .expect("shared-hyperplane relation is symmetric")
        .with_labels(subspaces.iter().map(Subspace::label).collect())
}

/// Dual polar graph of type B3(q): maximal singular 3-spaces of the B3 space,
/// adjacent when they meet in a 2-space.
pub fn dual_polar_b3(q: u64) -> Result<Graph> {
    Ok(B3Geometry::new(q)?.graph)
}

/// Dual polar graph of type D4(q): both families, adjacent across families
/// when they meet in a 3-space. Bipartition recorded (`f2` = minus).
pub fn dual_polar_d4(q: u64) -> Result<Graph> {
    Ok(D4Geometry::new(q)?.graph)
}

/// Subgraph of the B3 dual polar graph on vertices disjoint from `<e1, e2, e3>`.
pub fn far_from_vertex_b3(q: u64) -> Result<Graph> {
    let geo = B3Geometry::new(q)?;
    Ok(geo.far_from_vertex().0)
}

/// Subgraph of the D4 dual polar graph on the members of `f1` disjoint from
/// `A0 = <e1, e2, e3, e4>` and the members of `f2` disjoint from `B0 = phi(A0)`.
pub fn far_from_edge_d4(q: u64) -> Result<Graph> {
    let geo = D4Geometry::new(q)?;
    Ok(geo.far_from_edge()?.0)
}

/// The B3 space with its vertices and dual polar graph.
#[derive(Debug, Clone)]
pub struct B3Geometry {
    pub space: QuadraticSpace,
    pub vertices: Vec<Subspace>,
    pub graph: Graph,
}

impl B3Geometry {
    pub fn new(q: u64) -> Result<Self> {
        Ok(Self::over(&Field::new(q)?))
    }

    pub fn over(field: &Field) -> Self {
        let space = QuadraticSpace::b3_over(field);
        let vertices = max_isotropic(&space);
        let graph = hyperplane_graph(&vertices);
        B3Geometry {
            space,
            vertices,
            graph,
        }
    }

    /// `pi0 = <e1, e2, e3>`
    pub fn base_vertex(&self) -> Subspace {
        self.space.coordinate_subspace(&[0, 1, 2])
    }

    /// Induced subgraph far from `pi0`, with the kept vertex ids.
    pub fn far_from_vertex(&self) -> (Graph, Vec<usize>) {
        let pi0 = self.base_vertex();
        let keep: Vec<usize> = (0..self.vertices.len())
            .filter(|&i| self.vertices[i].intersection_dim(&pi0) == 0)
            .collect();
        (self.graph.induced(&keep), keep)
    }

    pub fn index_of(&self, s: &Subspace) -> Option<usize> {
        self.vertices.binary_search(s).ok()
    }
}

/// The D4 space with both families, the dual polar graph and the reflection
/// in the hyperplane `x4 = x8`.
#[derive(Debug, Clone)]
pub struct D4Geometry {
    pub space: QuadraticSpace,
    pub vertices: Vec<Subspace>,
    pub families: FamilySplit,
    pub graph: Graph,
}

impl D4Geometry {
    pub fn new(q: u64) -> Result<Self> {
        Self::over(&Field::new(q)?)
    }

    pub fn over(field: &Field) -> Result<Self> {
        let space = QuadraticSpace::d4_over(field);
        let vertices = max_isotropic(&space);
        let families = split_families(&vertices, space.witt_index())?;
        let shared = hyperplane_graph(&vertices);
        // Two maximal subspaces sharing a 3-space always lie in different families.
        let graph = shared.with_bipartition(families.in_f2.clone())?;
        Ok(D4Geometry {
            space,
            vertices,
            families,
            graph,
        })
    }

    pub fn field(&self) -> &Field {
        self.space.field()
    }

    /// The nonsingular point `P = (0,0,0,1,0,0,0,-1)`.
    pub fn reflection_point(&self) -> Vec<Elem> {
        let f = self.field();
        let mut p = vec![Elem::ZERO; 8];
        p[3] = Elem::ONE;
        p[7] = f.neg(Elem::ONE);
        p
    }

    /// `phi(v) = v - B(v, P) / Q(P) * P`, fixing `H = P^perp` pointwise.
    pub fn reflect(&self, v: &[Elem]) -> Vec<Elem> {
        let f = self.field();
        let p = self.reflection_point();
        let qp = self.space.eval(&p);
        let c = f
            .div(self.space.polar(v, &p), qp)
            .expect("reflection point is nonsingular");
        v.iter()
            .zip(&p)
            .map(|(&x, &y)| f.sub(x, f.mul(c, y)))
            .collect()
    }

    pub fn reflect_subspace(&self, s: &Subspace) -> Subspace {
        s.map(|v| self.reflect(v))
    }

    /// The functional cutting out `H = {x4 = x8}`.
    pub fn hyperplane_functional(&self) -> Vec<Elem> {
        let f = self.field();
        let mut h = vec![Elem::ZERO; 8];
        h[3] = Elem::ONE;
        h[7] = f.neg(Elem::ONE);
        h
    }

    /// `A ∩ H` written in the seven coordinates of the B3 space.
    pub fn restrict_to_h(&self, a: &Subspace) -> Subspace {
        let meet = a.meet_hyperplane(&self.hyperplane_functional());
        meet.map(|v| v[..7].to_vec())
    }

    pub fn index_of(&self, s: &Subspace) -> Option<usize> {
        self.vertices.binary_search(s).ok()
    }

    /// `E = <e1, e2, e3, e4>`
    pub fn base_a0(&self) -> Subspace {
        self.space.coordinate_subspace(&[0, 1, 2, 3])
    }

    /// `B0 = phi(E)`; errors if it is not an `f2` neighbor of `E`.
    pub fn base_b0(&self) -> Result<Subspace> {
        let a0 = self.base_a0();
        let b0 = self.reflect_subspace(&a0);
        let ia = self.index_of(&a0).ok_or(Error::NoAdjacentMate)?;
        let ib = self.index_of(&b0).ok_or(Error::NoAdjacentMate)?;
        if !self.families.in_f2[ib] || !self.graph.has_edge(ia, ib) {
            return Err(Error::NoAdjacentMate);
        }
        Ok(b0)
    }

    /// Induced subgraph far from the edge `(A0, B0)`, with the kept vertex ids.
    pub fn far_from_edge(&self) -> Result<(Graph, Vec<usize>)> {
        let a0 = self.base_a0();
        let b0 = self.base_b0()?;
        let keep: Vec<usize> = (0..self.vertices.len())
            .into_par_iter()
            .filter(|&i| {
                let base = if self.families.in_f2[i] { &b0 } else { &a0 };
                self.vertices[i].intersection_dim(base) == 0
            })
            .collect();
        let mut g = self.graph.induced(&keep);
        let minus: Vec<bool> = keep.iter().map(|&i| self.families.in_f2[i]).collect();
        g = g.with_bipartition(minus)?;
        Ok((g, keep))
    }
}

/// Checks that the reflection swaps the families, that `phi(A) ~ A` for all
/// `A` in `f1`, and that `A -> A ∩ H` identifies the quotient by `phi` with
/// the B3 dual polar graph.
pub fn reflection_quotient_check(q: u64) -> Result<CheckList> {
    let field = Field::new(q)?;
    let d4 = D4Geometry::over(&field)?;
    let b3 = B3Geometry::over(&field);
    Ok(reflection_quotient_check_with(&d4, &b3))
}

pub fn reflection_quotient_check_with(d4: &D4Geometry, b3: &B3Geometry) -> CheckList {
    let mut report = CheckList::default();
    let fam = &d4.families;

    // phi on every subspace, as vertex ids.
    let phi: Vec<Option<usize>> = d4
        .vertices
        .par_iter()
        .map(|s| d4.index_of(&d4.reflect_subspace(s)))
        .collect();

    let involution = (0..d4.vertices.len()).find(|&i| match phi[i] {
        Some(j) => d4.reflect_subspace(&d4.reflect_subspace(&d4.vertices[i])) != d4.vertices[i]
            || phi[j] != Some(i),
        None => true,
    });
    report.push(Check::from_witness(
        "reflection is an involution on maximal subspaces",
        involution.map(|i| format!("subspace {}", d4.vertices[i].label())),
    ));

    let swap = (0..d4.vertices.len())
        .find(|&i| phi[i].is_none_or(|j| fam.in_f2[i] == fam.in_f2[j]));
    report.push(Check::from_witness(
        "reflection interchanges the two families",
        swap.map(|i| format!("subspace {}", d4.vertices[i].label())),
    ));

    let not_adjacent = fam
        .f1
        .iter()
        .copied()
        .find(|&i| phi[i].is_none_or(|j| !d4.graph.has_edge(i, j)));
    report.push(Check::from_witness(
        "phi(A) is adjacent to A for every A in f1",
        not_adjacent.map(|i| format!("subspace {}", d4.vertices[i].label())),
    ));

    // A -> A ∩ H, as B3 vertex ids.
    let image: Vec<Option<usize>> = fam
        .f1
        .par_iter()
        .map(|&i| {
            let r = d4.restrict_to_h(&d4.vertices[i]);
            (r.dim() == 3 && b3.space.is_totally_singular(r.basis()))
                .then(|| b3.index_of(&r))
                .flatten()
        })
        .collect();
    let mut hit = vec![false; b3.vertices.len()];
    let mut bijection_witness = None;
    for (k, img) in image.iter().enumerate() {
        match img {
            Some(j) if !hit[*j] => hit[*j] = true,
            _ => {
                bijection_witness.get_or_insert(format!(
                    "f1 member {} has no fresh image",
                    d4.vertices[fam.f1[k]].label()
                ));
            }
        }
    }
    if bijection_witness.is_none() && fam.f1.len() != b3.vertices.len() {
        bijection_witness = Some(format!(
            "|f1| = {} but B3 has {} vertices",
            fam.f1.len(),
            b3.vertices.len()
        ));
    }
    let bijective = bijection_witness.is_none();
    report.push(
        Check::from_witness("A -> A ∩ H is a bijection from f1 onto B3 vertices", bijection_witness)
            .with_value("f1", fam.f1.len() as i64)
            .with_value("b3_vertices", b3.vertices.len() as i64),
    );

    if bijective {
        // Quotient neighbors of A: phi(B) for B ~ A in the D4 graph, other than A itself.
        let pos_in_f1: HashMap<usize, usize> =
            fam.f1.iter().enumerate().map(|(k, &i)| (i, k)).collect();
        let bad = fam
            .f1
            .par_iter()
            .enumerate()
            .filter_map(|(k, &i)| {
                let mut quotient: Vec<usize> = d4
                    .graph
                    .neighbors(i)
                    .iter()
                    .filter_map(|&b| phi[b as usize])
                    .filter(|&a| a != i)
                    .map(|a| image[pos_in_f1[&a]].unwrap())
                    .collect();
                quotient.sort_unstable();
                let src = image[k].unwrap();
                let expected: Vec<usize> =
                    b3.graph.neighbors(src).iter().map(|&x| x as usize).collect();
                (quotient != expected).then_some(i)
            })
            .min();
        report.push(Check::from_witness(
            "quotient adjacency matches the B3 dual polar graph",
            bad.map(|i| format!("f1 member {}", d4.vertices[i].label())),
        ));
    }
    report
}

/// Identifies the far-from-edge D4 graph with the extended bipartite double of
/// the far-from-vertex B3 graph: `x+ -> A`, `x- -> phi(A)`, where `A` is the
/// `f1` member with `A ∩ H = x`.
pub fn ebd_correspondence_check(d4: &D4Geometry, b3: &B3Geometry) -> Result<Check> {
    let (delta, delta_ids) = d4.far_from_edge()?;
    let (far_b3, far_ids) = b3.far_from_vertex();
    let ebd = graph::extended_bipartite_double(&far_b3);

    let mut lift: HashMap<usize, usize> = HashMap::new();
    for &i in &d4.families.f1 {
        if let Some(j) = b3.index_of(&d4.restrict_to_h(&d4.vertices[i])) {
            lift.insert(j, i);
        }
    }
    let delta_pos: HashMap<usize, usize> =
        delta_ids.iter().enumerate().map(|(k, &i)| (i, k)).collect();
    let n = far_ids.len();
    let mut map = vec![usize::MAX; 2 * n];
    for (x, &b3_id) in far_ids.iter().enumerate() {
        let Some(&a) = lift.get(&b3_id) else {
            return Ok(Check::fail(
                "far-from-edge D4 graph is the extended double of the far-from-vertex B3 graph",
                format!("B3 vertex {} has no lift", b3.vertices[b3_id].label()),
            ));
        };
        let phi_a = d4
            .index_of(&d4.reflect_subspace(&d4.vertices[a]))
            .expect("reflection preserves maximal subspaces");
        match (delta_pos.get(&a), delta_pos.get(&phi_a)) {
            (Some(&p), Some(&m)) => {
                map[x] = p;
                map[x + n] = m;
            }
            _ => {
                return Ok(Check::fail(
                    "far-from-edge D4 graph is the extended double of the far-from-vertex B3 graph",
                    format!("lift of {} leaves the far-from-edge set", b3.vertices[b3_id].label()),
                ))
            }
        }
    }
    let name = "far-from-edge D4 graph is the extended double of the far-from-vertex B3 graph";
    Ok(match ebd.maps_onto(&delta, &map) {
        Ok(()) => Check::pass(name)
            .with_value("vertices", delta.n() as i64)
            .with_value("edges", delta.edge_count() as i64),
        Err((u, v)) => Check::fail(name, format!("pair ({u}, {v}) of the double breaks the map")),
    })
}

/// For nonadjacent `A` in `f1` and `B` in `f2` of the far-from-edge graph, the
/// points `A0 ∩ B` and `A ∩ B0` are nonorthogonal.
pub fn nonorthogonality_check(d4: &D4Geometry) -> Result<Check> {
    let (delta, ids) = d4.far_from_edge()?;
    let a0 = d4.base_a0();
    let b0 = d4.base_b0()?;
    let minus = delta.bipartition().expect("bipartition recorded");
    let name = "A0 ∩ B and A ∩ B0 are nonorthogonal for nonadjacent A, B";
    let bad = (0..delta.n())
        .into_par_iter()
        .filter(|&a| !minus[a])
        .flat_map_iter(|a| {
            let delta = &delta;
            (0..delta.n())
                .filter(move |&b| minus[b] && !delta.has_edge(a, b))
                .map(move |b| (a, b))
        })
        .filter(|&(a, b)| {
            let sa = &d4.vertices[ids[a]];
            let sb = &d4.vertices[ids[b]];
            let p1 = a0.intersection(sb);
            let p2 = sa.intersection(&b0);
            p1.dim() != 1
                || p2.dim() != 1
                || d4.space.polar(p1.basis().row(0), p2.basis().row(0)).is_zero()
        })
        .min();
    Ok(match bad {
        None => Check::pass(name),
        Some((a, b)) => Check::fail(name, format!("vertices {a} and {b}")),
    })
}
