//! Certification: distance-regularity with witnesses, intersection arrays,
//! exact spectra, strong regularity, and closed-form expected parameters.

use std::collections::BTreeMap;
use std::fmt;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::exactlin::{self, IntMatrix};
use crate::graph::Graph;

/// One named pass/fail outcome, with an optional witness on failure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub values: BTreeMap<String, Value>,
}

impl Check {
    pub fn pass(name: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            pass: true,
            witness: None,
            values: BTreeMap::new(),
        }
    }

    pub fn fail(name: impl Into<String>, witness: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            pass: false,
            witness: Some(witness.into()),
            values: BTreeMap::new(),
        }
    }

    /// Passes when there is no witness.
    pub fn from_witness(name: impl Into<String>, witness: Option<String>) -> Self {
        match witness {
            None => Check::pass(name),
            Some(w) => Check::fail(name, w),
        }
    }

    pub fn with_value(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.values.insert(key.to_string(), value.into());
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CheckList {
    pub checks: Vec<Check>,
}

impl CheckList {
    pub fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn extend(&mut self, other: CheckList) {
        self.checks.extend(other.checks);
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.pass)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter()
    }
}

/// `{b_0, .., b_{d-1}; c_1, .., c_d}`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntersectionArray {
    pub b: Vec<u64>,
    pub c: Vec<u64>,
}

impl IntersectionArray {
    pub fn new(b: Vec<u64>, c: Vec<u64>) -> Result<Self> {
        if b.len() != c.len() {
            return Err(Error::InvalidArray(format!(
                "{} b-values but {} c-values",
                b.len(),
                c.len()
            )));
        }
        let ia = IntersectionArray { b, c };
        if ia.diameter() > 0 {
            if ia.c[0] != 1 {
                return Err(Error::InvalidArray("c_1 must be 1".into()));
            }
            let k = ia.b[0];
            for i in 0..ia.diameter() {
                if ia.b[i] == 0 || ia.c[i] == 0 || ia.c[i] > k || ia.b[i] > k {
                    return Err(Error::InvalidArray(format!("entry {i} out of range")));
                }
                let bi = ia.b_at(i + 1);
                if ia.c[i] + bi > k {
                    return Err(Error::InvalidArray(format!("a_{} would be negative", i + 1)));
                }
            }
            // k_i must be integral.
            let mut ki = 1u128;
            for i in 0..ia.diameter() {
                let num = ki * ia.b[i] as u128;
                if num % ia.c[i] as u128 != 0 {
                    return Err(Error::InvalidArray(format!("k_{} is not integral", i + 1)));
                }
                ki = num / ia.c[i] as u128;
            }
        }
        Ok(ia)
    }

    pub fn diameter(&self) -> usize {
        self.b.len()
    }

    pub fn valency(&self) -> u64 {
        self.b.first().copied().unwrap_or(0)
    }

    /// `b_i` with `b_d = 0`.
    pub fn b_at(&self, i: usize) -> u64 {
        self.b.get(i).copied().unwrap_or(0)
    }

    /// `c_i` with `c_0 = 0`.
    pub fn c_at(&self, i: usize) -> u64 {
        if i == 0 {
            0
        } else {
            self.c[i - 1]
        }
    }

    /// `a_i = k - b_i - c_i`, for `i = 0..=d`.
    pub fn a(&self) -> Vec<u64> {
        let k = self.valency();
        (0..=self.diameter())
            .map(|i| k - self.b_at(i) - self.c_at(i))
            .collect()
    }

    /// `k_0 = 1`, `k_i = k_{i-1} b_{i-1} / c_i`.
    pub fn class_sizes(&self) -> Vec<u64> {
        let mut k = vec![1u64];
        for i in 1..=self.diameter() {
            k.push(k[i - 1] * self.b[i - 1] / self.c[i - 1]);
        }
        k
    }

    pub fn vertex_count(&self) -> u64 {
        self.class_sizes().iter().sum()
    }
}

impl fmt::Display for IntersectionArray {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[u64]| v.iter().map(u64::to_string).collect::<Vec<_>>().join(",");
        write!(f, "{{{};{}}}", join(&self.b), join(&self.c))
    }
}

/// Eigenvalues with multiplicities, eigenvalues strictly decreasing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Spectrum {
    pub pairs: Vec<(i64, u64)>,
}

impl Spectrum {
    pub fn new(mut pairs: Vec<(i64, u64)>) -> Self {
        pairs.sort_by(|a, b| b.0.cmp(&a.0));
        Spectrum { pairs }
    }

    pub fn total_multiplicity(&self) -> u64 {
        self.pairs.iter().map(|p| p.1).sum()
    }

    /// `sum m theta^j` for `j = 1, 2`.
    pub fn moments(&self) -> (i128, i128) {
        let m1 = self.pairs.iter().map(|&(t, m)| t as i128 * m as i128).sum();
        let m2 = self
            .pairs
            .iter()
            .map(|&(t, m)| (t as i128) * (t as i128) * m as i128)
            .sum();
        (m1, m2)
    }

    /// Trace conditions for a k-regular graph on n vertices.
    pub fn satisfies_trace_identities(&self, n: u64, k: u64) -> bool {
        let (m1, m2) = self.moments();
        self.total_multiplicity() == n && m1 == 0 && m2 == n as i128 * k as i128
    }

    pub fn multiplicity(&self, theta: i64) -> u64 {
        self.pairs
            .iter()
            .find(|p| p.0 == theta)
            .map_or(0, |p| p.1)
    }
}

impl fmt::Display for Spectrum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.pairs.iter().map(|(t, m)| format!("{t}^{m}")).collect();
        write!(f, "{}", parts.join(" "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SrgParams {
    pub v: u64,
    pub k: u64,
    pub lambda: u64,
    pub mu: u64,
}

impl SrgParams {
    /// `k (k - lambda - 1) = (v - k - 1) mu`
    pub fn is_feasible(&self) -> bool {
        self.k as i128 * (self.k as i128 - self.lambda as i128 - 1)
            == (self.v as i128 - self.k as i128 - 1) * self.mu as i128
    }
}

impl fmt::Display for SrgParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}, {})", self.v, self.k, self.lambda, self.mu)
    }
}

/// First failure of the distance-regularity sweep: vertex `vertex` at
/// distance `distance` from `base` has `found` = (c, b) instead of `expected`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DrgWitness {
    pub base: usize,
    pub vertex: usize,
    pub distance: usize,
    pub expected: Option<(u64, u64)>,
    pub found: (u64, u64),
}

impl fmt::Display for DrgWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let exp = match self.expected {
            Some((c, b)) => format!("(c, b) = ({c}, {b})"),
            None => "no vertices at this distance".to_string(),
        };
        write!(
            f,
            "base {} vertex {} at distance {}: (c, b) = ({}, {}), expected {}",
            self.base, self.vertex, self.distance, self.found.0, self.found.1, exp
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DrgOutcome {
    Regular {
        array: IntersectionArray,
        bases_checked: usize,
    },
    Refuted(DrgWitness),
}

/// Which base vertices to sweep from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Bases {
    #[default]
    All,
    /// This many base vertices, evenly spaced over the vertex range.
    Sample(usize),
}

impl Bases {
    fn select(self, n: usize) -> Vec<usize> {
        match self {
            Bases::All => (0..n).collect(),
            Bases::Sample(s) if s >= n => (0..n).collect(),
            Bases::Sample(s) => {
                let s = s.max(1);
                (0..s).map(|i| i * n / s).collect()
            }
        }
    }
}

/// Distance cell for the sweep; `u16` keeps the array cache-resident on
/// graphs of the sizes built here.
trait Cell: Copy + Eq + Send {
    const FAR: Self;
    fn from_usize(x: usize) -> Self;
    fn get(self) -> usize;
}

impl Cell for u16 {
    const FAR: Self = u16::MAX;
    fn from_usize(x: usize) -> Self {
        x as u16
    }
    fn get(self) -> usize {
        self as usize
    }
}

impl Cell for u32 {
    const FAR: Self = u32::MAX;
    fn from_usize(x: usize) -> Self {
        x as u32
    }
    fn get(self) -> usize {
        self as usize
    }
}

struct Sweep<D> {
    dist: Vec<D>,
    queue: Vec<u32>,
}

impl<D: Cell> Sweep<D> {
    fn new(n: usize) -> Self {
        Sweep {
            dist: vec![D::FAR; n],
            queue: Vec::with_capacity(n),
        }
    }

    /// BFS from `base`, calling `visit(u, i, c, b)` once per vertex in BFS
    /// order with its distance and its counts of neighbors at distance
    /// `i - 1` and `i + 1`.
    fn run(&mut self, g: &Graph, base: usize, mut visit: impl FnMut(usize, usize, u64, u64)) {
        self.dist.fill(D::FAR);
        self.queue.clear();
        self.dist[base] = D::from_usize(0);
        self.queue.push(base as u32);
        let mut head = 0;
        while head < self.queue.len() {
            let u = self.queue[head] as usize;
            head += 1;
            let du = self.dist[u].get();
            let (up, down) = (D::from_usize(du + 1), D::from_usize(du.wrapping_sub(1)));
            let (mut c, mut b) = (0u64, 0u64);
            for &w in g.neighbors(u) {
                let dw = &mut self.dist[w as usize];
                if *dw == D::FAR {
                    *dw = up;
                    self.queue.push(w);
                }
                b += (*dw == up) as u64;
                c += (*dw == down) as u64;
            }
            visit(u, du, c, b);
        }
    }
}

/// Checks that `c_i` and `b_i` are constant over all base vertices and all
/// vertices at distance i. The reference values are read from base 0 at the
/// smallest vertex of each distance class; the reported witness is the
/// lexicographically least failing `(base, vertex)`.
pub fn check_distance_regular(g: &Graph, bases: Bases) -> Result<DrgOutcome> {
    // Distances stay below n, so u16 cells suffice while FAR is out of reach.
    if g.n() < u16::MAX as usize {
        check_distance_regular_with::<u16>(g, bases)
    } else {
        check_distance_regular_with::<u32>(g, bases)
    }
}

fn check_distance_regular_with<D: Cell>(g: &Graph, bases: Bases) -> Result<DrgOutcome> {
    let n = g.n();
    if n == 0 || !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let mut reference: Vec<Option<(usize, u64, u64)>> = Vec::new();
    Sweep::<D>::new(n).run(g, 0, |u, i, c, b| {
        if reference.len() <= i {
            reference.resize(i + 1, None);
        }
        match reference[i] {
            Some((v, _, _)) if v < u => {}
            _ => reference[i] = Some((u, c, b)),
        }
    });
    let reference: Vec<(u64, u64)> = reference
        .into_iter()
        .map(|r| r.map(|(_, c, b)| (c, b)).expect("every level is populated"))
        .collect();

    let selected = bases.select(n);
    let witness = selected
        .par_iter()
        .map_init(
            || Sweep::<D>::new(n),
            |sweep, &base| {
                let mut best: Option<DrgWitness> = None;
                sweep.run(g, base, |u, i, c, b| {
                    let expected = reference.get(i).copied();
                    if expected != Some((c, b)) && best.as_ref().is_none_or(|w| u < w.vertex) {
                        best = Some(DrgWitness {
                            base,
                            vertex: u,
                            distance: i,
                            expected,
                            found: (c, b),
                        });
                    }
                });
                best
            },
        )
        .flatten()
        .min_by_key(|w| (w.base, w.vertex));
    if let Some(w) = witness {
        return Ok(DrgOutcome::Refuted(w));
    }
    let d = reference.len() - 1;
    let b = (0..d).map(|i| reference[i].1).collect();
    let c = (1..=d).map(|i| reference[i].0).collect();
    Ok(DrgOutcome::Regular {
        array: IntersectionArray::new(b, c)?,
        bases_checked: selected.len(),
    })
}

/// Tridiagonal matrix with column i holding `c_i` above, `a_i` on and `b_i`
/// below the diagonal.
pub fn intersection_matrix(ia: &IntersectionArray) -> IntMatrix {
    let d = ia.diameter();
    let a = ia.a();
    let mut m = vec![vec![BigInt::zero(); d + 1]; d + 1];
    for i in 0..=d {
        m[i][i] = BigInt::from(a[i]);
        if i > 0 {
            m[i - 1][i] = BigInt::from(ia.c_at(i));
        }
        if i < d {
            m[i + 1][i] = BigInt::from(ia.b_at(i));
        }
    }
    m
}

/// Distinct eigenvalues of the intersection matrix.
pub fn array_eigenvalues(ia: &IntersectionArray) -> Result<Vec<i64>> {
    let cp = exactlin::charpoly_int(&intersection_matrix(ia));
    let roots = exactlin::integer_roots(&cp);
    if roots.remainder.degree() > 0 {
        return Err(Error::NonIntegralEigenvalue(roots.remainder.to_string()));
    }
    Ok(roots.roots.iter().map(|r| r.0).collect())
}

/// Multiplicity of `theta` from the standard sequence:
/// `m = n / sum_i k_i u_i^2`, with `u_0 = 1`, `u_1 = theta / k` and
/// `c_i u_{i-1} + a_i u_i + b_i u_{i+1} = theta u_i`.
pub fn standard_multiplicity(ia: &IntersectionArray, n: u64, theta: i64) -> Result<u64> {
    let d = ia.diameter();
    let a = ia.a();
    let ks = ia.class_sizes();
    let th = BigRational::from_integer(BigInt::from(theta));
    let mut u: Vec<BigRational> = vec![BigRational::one()];
    if d >= 1 {
        u.push(&th / BigRational::from_integer(BigInt::from(ia.valency())));
    }
    for i in 1..d {
        let next = (&th * &u[i]
            - BigRational::from_integer(BigInt::from(ia.c_at(i))) * &u[i - 1]
            - BigRational::from_integer(BigInt::from(a[i])) * &u[i])
            / BigRational::from_integer(BigInt::from(ia.b_at(i)));
        u.push(next);
    }
    let norm: BigRational = (0..=d)
        .map(|i| BigRational::from_integer(BigInt::from(ks[i])) * &u[i] * &u[i])
        .sum();
    let m = BigRational::from_integer(BigInt::from(n)) / norm;
    if !m.is_integer() {
        return Err(Error::NonIntegralMultiplicity {
            theta,
            value: m.to_string(),
        });
    }
    m.to_integer()
        .to_u64()
        .filter(|&m| m > 0)
        .ok_or(Error::NonIntegralMultiplicity {
            theta,
            value: m.to_string(),
        })
}

/// Spectrum of a distance-regular graph with array `ia` on `n` vertices.
pub fn drg_spectrum(ia: &IntersectionArray, n: u64) -> Result<Spectrum> {
    let pairs = array_eigenvalues(ia)?
        .into_iter()
        .map(|t| standard_multiplicity(ia, n, t).map(|m| (t, m)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Spectrum::new(pairs))
}

pub const DEFAULT_RANK_LIMIT: usize = 1024;

/// `n - rank(A - theta I)` over the rationals.
pub fn multiplicity_by_rank(g: &Graph, theta: i64, limit: usize) -> Result<u64> {
    if g.n() > limit {
        return Err(Error::GraphTooLarge { n: g.n(), bound: limit });
    }
    let r = exactlin::rank_rational(&g.adjacency_matrix(), theta);
    Ok((g.n() - r) as u64)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SrgOutcome {
    Strong(SrgParams),
    /// A non-regular vertex (`pair.1 == None`), or a pair whose common
    /// neighbor count differs from the first pair of the same kind.
    Refuted {
        pair: (usize, Option<usize>),
        adjacent: bool,
        expected: u64,
        found: u64,
    },
}

struct BitRows {
    words: usize,
    bits: Vec<u64>,
}

impl BitRows {
    fn new(g: &Graph) -> Self {
        let words = g.n().div_ceil(64);
        let mut bits = vec![0u64; words * g.n()];
        for v in 0..g.n() {
            for &w in g.neighbors(v) {
                bits[v * words + w as usize / 64] |= 1 << (w % 64);
            }
        }
        BitRows { words, bits }
    }

    fn common(&self, u: usize, v: usize) -> u64 {
        let a = &self.bits[u * self.words..(u + 1) * self.words];
        let b = &self.bits[v * self.words..(v + 1) * self.words];
        a.iter().zip(b).map(|(x, y)| (x & y).count_ones() as u64).sum()
    }
}

/// Exhaustive strong-regularity check over all vertex pairs.
pub fn check_srg(g: &Graph) -> SrgOutcome {
    let n = g.n();
    assert!(n >= 2, "strong regularity needs at least two vertices");
    let k = g.degree(0) as u64;
    if let Some(v) = (0..n).find(|&v| g.degree(v) as u64 != k) {
        return SrgOutcome::Refuted {
            pair: (v, None),
            adjacent: false,
            expected: k,
            found: g.degree(v) as u64,
        };
    }
    let rows = BitRows::new(g);
    let first_adjacent = g.edges().next();
    let first_non = (1..n).find(|&v| !g.has_edge(0, v)).map(|v| (0, v)).or_else(|| {
        (0..n).find_map(|u| (u + 1..n).find(|&v| !g.has_edge(u, v)).map(|v| (u, v)))
    });
    let lambda = first_adjacent.map(|(u, v)| rows.common(u, v));
    let mu = first_non.map(|(u, v)| rows.common(u, v));
    let bad = (0..n)
        .into_par_iter()
        .filter_map(|u| {
            (u + 1..n).find_map(|v| {
                let adjacent = g.has_edge(u, v);
                let expected = if adjacent { lambda } else { mu }.unwrap();
                let found = rows.common(u, v);
                (found != expected).then_some(SrgOutcome::Refuted {
                    pair: (u, Some(v)),
                    adjacent,
                    expected,
                    found,
                })
            })
        })
        .min_by_key(|o| match o {
            SrgOutcome::Refuted { pair, .. } => *pair,
            SrgOutcome::Strong(_) => (usize::MAX, None),
        });
    match bad {
        Some(o) => o,
        None => SrgOutcome::Strong(SrgParams {
            v: n as u64,
            k,
            lambda: lambda.unwrap_or(0),
            mu: mu.unwrap_or(0),
        }),
    }
}

/// Graph families with closed-form parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// The explicit graph Z on `W x W`, and the B3 graph far from a vertex.
    Z,
    /// The extended bipartite double of Z.
    EbdZ,
    /// The D4 dual polar graph far from an edge.
    D4Far,
    /// The dual polar graph of type B3(q).
    B3DualPolar,
    /// The distance-1-or-2 graph of Z.
    SrgHalf,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::Z,
        Family::EbdZ,
        Family::D4Far,
        Family::B3DualPolar,
        Family::SrgHalf,
    ];

    pub fn parse(s: &str) -> Option<Family> {
        Some(match s.to_ascii_lowercase().as_str() {
            "z" | "b3far" => Family::Z,
            "ebdz" | "ebd_z" | "zhat" => Family::EbdZ,
            "d4far" | "d4_far" => Family::D4Far,
            "b3" | "b3_dualpolar" | "b3dualpolar" => Family::B3DualPolar,
            "srg" | "srg_half" | "dist12" => Family::SrgHalf,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Z => "z",
            Family::EbdZ => "ebd_z",
            Family::D4Far => "d4far",
            Family::B3DualPolar => "b3",
            Family::SrgHalf => "srg_half",
        }
    }
}

/// Parameters predicted by the closed formulas for a family at a given q.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Expected {
    pub family: Family,
    pub q: u64,
    pub vertices: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub array: Option<IntersectionArray>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub class_sizes: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<Spectrum>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub srg: Option<SrgParams>,
}

/// Direct substitution into the closed formulas; no graph is built.
pub fn expected_params(family: Family, q: u64) -> Expected {
    let q2 = q * q;
    let q3 = q2 * q;
    let q6 = q3 * q3;
    let ebd_array = IntersectionArray {
        b: vec![q3, q3 - 1, q3 - q, q3 - q2 + 1],
        c: vec![1, q, q2 - 1, q3],
    };
    let ebd_spectrum = {
        let t = q2 as i64;
        let u = q3 as i64;
        Spectrum::new(vec![
            (u, 1),
            (t, q2 * (q3 - 1)),
            (0, 2 * (q3 - q2 + 1) * (q3 - 1)),
            (-t, q2 * (q3 - 1)),
            (-u, 1),
        ])
    };
    let ebd_classes = vec![1, q3, q2 * (q3 - 1), q3 * (q3 - 1), (q3 - q2 + 1) * (q3 - 1)];
    let base = Expected {
        family,
        q,
        vertices: 0,
        array: None,
        class_sizes: None,
        spectrum: None,
        srg: None,
    };
    match family {
        Family::Z => Expected {
            vertices: q6,
            array: Some(IntersectionArray {
                b: vec![q3 - 1, q3 - q, q3 - q2 + 1],
                c: vec![1, q, q2 - 1],
            }),
            class_sizes: Some(vec![1, q3 - 1, (q2 - 1) * (q3 - 1), (q3 - q2 + 1) * (q3 - 1)]),
            spectrum: Some(Spectrum::new(vec![
                (q3 as i64 - 1, 1),
                (q2 as i64 - 1, q * (q + 1) * (q3 - 1) / 2),
                (-1, (q3 - q2 + 1) * (q3 - 1)),
                (-(q2 as i64) - 1, q * (q - 1) * (q3 - 1) / 2),
            ])),
            ..base
        },
        Family::EbdZ | Family::D4Far => Expected {
            vertices: 2 * q6,
            array: Some(ebd_array),
            class_sizes: Some(ebd_classes),
            spectrum: Some(ebd_spectrum),
            ..base
        },
        Family::B3DualPolar => {
            let array = IntersectionArray {
                b: vec![q * (q2 + q + 1), q2 * (q + 1), q3],
                c: vec![1, q + 1, q2 + q + 1],
            };
            Expected {
                vertices: (q + 1) * (q2 + 1) * (q3 + 1),
                class_sizes: Some(array.class_sizes()),
                array: Some(array),
                ..base
            }
        }
        Family::SrgHalf => Expected {
            vertices: q6,
            srg: Some(SrgParams {
                v: q6,
                k: q2 * (q3 - 1),
                lambda: q2 * (q2 + q - 3),
                mu: q2 * (q2 - 1),
            }),
            ..base
        },
    }
}

/// Options for [`certify_graph`].
#[derive(Debug, Clone, Copy)]
pub struct CertifyOptions {
    pub bases: Bases,
    /// Cross-check spectrum multiplicities by exact rank up to this many vertices.
    pub rank_check_limit: usize,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            bases: Bases::All,
            rank_check_limit: 160,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphInfo {
    pub n: usize,
    pub edges: usize,
    pub source: String,
}

/// Certification report; serializes to the stable JSON schema
/// `{graph, checks, array?, spectrum?, srg?}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertReport {
    pub graph: GraphInfo,
    pub checks: CheckList,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub array: Option<IntersectionArray>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<Spectrum>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub srg: Option<SrgParams>,
    /// Wall-clock seconds per stage; not serialized, so reports stay reproducible.
    #[serde(skip)]
    pub timings: Vec<(String, f64)>,
}

impl CertReport {
    pub fn all_pass(&self) -> bool {
        self.checks.all_pass()
    }
}

/// Runs the distance-regularity sweep, then the spectrum (with a rank
/// cross-check on small graphs) and, for diameter 2, the strong-regularity check.
pub fn certify_graph(g: &Graph, source: &str, opts: CertifyOptions) -> CertReport {
    let mut report = CertReport {
        graph: GraphInfo {
            n: g.n(),
            edges: g.edge_count(),
            source: source.to_string(),
        },
        checks: CheckList::default(),
        array: None,
        spectrum: None,
        srg: None,
        timings: Vec::new(),
    };
    let t = Instant::now();
    let drg = check_distance_regular(g, opts.bases);
    report.timings.push(("distance_regular".into(), t.elapsed().as_secs_f64()));
    let array = match drg {
        Err(e) => {
            report.checks.push(Check::fail("distance_regular", e.to_string()));
            return report;
        }
        Ok(DrgOutcome::Refuted(w)) => {
            report.checks.push(
                Check::fail("distance_regular", w.to_string())
                    .with_value("base", w.base)
                    .with_value("vertex", w.vertex)
                    .with_value("distance", w.distance)
                    .with_value("found", vec![w.found.0, w.found.1]),
            );
            return report;
        }
        Ok(DrgOutcome::Regular { array, bases_checked }) => {
            report.checks.push(
                Check::pass("distance_regular")
                    .with_value("array", array.to_string())
                    .with_value("bases_checked", bases_checked),
            );
            array
        }
    };
    report.array = Some(array.clone());
    let counts_ok = array.vertex_count() == g.n() as u64;
    report.checks.push(Check::from_witness(
        "class_sizes_sum_to_n",
        (!counts_ok).then(|| format!("sum k_i = {} but n = {}", array.vertex_count(), g.n())),
    ));

    let t = Instant::now();
    match drg_spectrum(&array, g.n() as u64) {
        Err(e) => report.checks.push(Check::fail("spectrum", e.to_string())),
        Ok(spec) => {
            let k = array.valency();
            let trace = spec.satisfies_trace_identities(g.n() as u64, k);
            report.checks.push(
                Check::from_witness(
                    "spectrum_trace_identities",
                    (!trace).then(|| format!("spectrum {spec} fails the trace identities")),
                )
                .with_value("spectrum", spec.to_string()),
            );
            if g.n() <= opts.rank_check_limit {
                let mismatch = spec.pairs.iter().find_map(|&(theta, m)| {
                    let r = multiplicity_by_rank(g, theta, opts.rank_check_limit).ok()?;
                    (r != m).then(|| format!("eigenvalue {theta}: formula {m}, rank {r}"))
                });
                report
                    .checks
                    .push(Check::from_witness("multiplicities_match_rank", mismatch));
            }
            report.spectrum = Some(spec);
        }
    }
    report.timings.push(("spectrum".into(), t.elapsed().as_secs_f64()));

    if array.diameter() == 2 {
        let t = Instant::now();
        match check_srg(g) {
            SrgOutcome::Strong(p) => {
                report.checks.push(
                    Check::from_witness(
                        "strongly_regular",
                        (!p.is_feasible()).then(|| format!("{p} fails k(k-l-1) = (v-k-1)mu")),
                    )
                    .with_value("params", p.to_string()),
                );
                report.srg = Some(p);
            }
            SrgOutcome::Refuted {
                pair,
                adjacent,
                expected,
                found,
            } => report.checks.push(Check::fail(
                "strongly_regular",
                format!(
                    "pair {pair:?} (adjacent: {adjacent}) has {found} common neighbors, expected {expected}"
                ),
            )),
        }
        report.timings.push(("srg".into(), t.elapsed().as_secs_f64()));
    }
    report
}

/// Compares a report with the closed-form parameters of a family.
pub fn compare_expected(report: &CertReport, exp: &Expected) -> CheckList {
    let mut out = CheckList::default();
    let tag = format!("{}:{}", exp.family.name(), exp.q);
    let n = report.graph.n as u64;
    out.push(Check::from_witness(
        format!("expected vertex count ({tag})"),
        (n != exp.vertices).then(|| format!("n = {n}, expected {}", exp.vertices)),
    ));
    if let Some(a) = &exp.array {
        let got = report.array.as_ref();
        out.push(Check::from_witness(
            format!("expected intersection array ({tag})"),
            (got != Some(a)).then(|| {
                format!(
                    "certified {}, expected {a}",
                    got.map_or("nothing".into(), ToString::to_string)
                )
            }),
        ));
    }
    if let Some(s) = &exp.spectrum {
        let got = report.spectrum.as_ref();
        out.push(Check::from_witness(
            format!("expected spectrum ({tag})"),
            (got != Some(s)).then(|| {
                format!(
                    "certified {}, expected {s}",
                    got.map_or("nothing".into(), ToString::to_string)
                )
            }),
        ));
    }
    if let Some(p) = &exp.srg {
        let got = report.srg.as_ref();
        out.push(Check::from_witness(
            format!("expected strongly regular parameters ({tag})"),
            (got != Some(p)).then(|| {
                format!(
                    "certified {}, expected {p}",
                    got.map_or("nothing".into(), ToString::to_string)
                )
            }),
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    fn cycle(n: usize) -> Graph {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Graph::new(n, &edges).unwrap()
    }

    fn ia(b: &[u64], c: &[u64]) -> IntersectionArray {
        IntersectionArray::new(b.to_vec(), c.to_vec()).unwrap()
    }

    #[test]
    fn hexagon_array_and_spectrum() {
        let DrgOutcome::Regular { array, bases_checked } =
            check_distance_regular(&cycle(6), Bases::All).unwrap()
        else {
            panic!("6-cycle is distance-regular");
        };
        assert_eq!(array, ia(&[2, 1, 1], &[1, 1, 2]));
        assert_eq!(bases_checked, 6);
        assert_eq!(array.a(), vec![0, 0, 0, 0]);
        assert_eq!(array.class_sizes(), vec![1, 2, 2, 1]);
        assert_eq!(array_eigenvalues(&array).unwrap(), vec![2, 1, -1, -2]);
        let spec = drg_spectrum(&array, 6).unwrap();
        assert_eq!(spec.pairs, vec![(2, 1), (1, 2), (-1, 2), (-2, 1)]);
        assert!(spec.satisfies_trace_identities(6, 2));
        assert_eq!(multiplicity_by_rank(&cycle(6), 2, 1024).unwrap(), 1);
    }

    #[test]
    fn refutation_has_witness() {
        // K4 minus the edge {2, 3}.
        let g = Graph::new(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)]).unwrap();
        let DrgOutcome::Refuted(w) = check_distance_regular(&g, Bases::All).unwrap() else {
            panic!("not regular, so not distance-regular");
        };
        // From base 0 everything is at distance 1 with (c, b) = (1, 0); from
        // base 2, vertex 0 has the far vertex 3 as a neighbor.
        assert_eq!((w.base, w.vertex, w.distance), (2, 0, 1));
        assert_eq!((w.expected, w.found), (Some((1, 0)), (1, 1)));
        let disconnected = Graph::new(3, &[(0, 1)]).unwrap();
        assert_eq!(
            check_distance_regular(&disconnected, Bases::All),
            Err(Error::Disconnected)
        );
    }

    #[test]
    fn refutation_is_recheckable() {
        // Path on 4 vertices: base 0 reference is (c, b) = (1, 1) at distance 1.
        let g = Graph::new(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let DrgOutcome::Refuted(w) = check_distance_regular(&g, Bases::All).unwrap() else {
            panic!();
        };
        let p = crate::graph::bfs_partition(&g, w.base);
        let count = |d: u32| {
            g.neighbors(w.vertex)
                .iter()
                .filter(|&&x| p.dist[x as usize] == d)
                .count() as u64
        };
        let i = w.distance as u32;
        let c = if i == 0 { 0 } else { count(i - 1) };
        assert_eq!((c, count(i + 1)), w.found);
    }

    #[test]
    fn intersection_matrix_shapes() {
        assert_eq!(
            intersection_matrix(&ia(&[], &[])),
            vec![vec![BigInt::zero()]]
        );
        let m = intersection_matrix(&ia(&[2, 1, 1], &[1, 1, 2]));
        let expect = crate::exactlin::int_matrix(&[
            vec![0, 1, 0, 0],
            vec![2, 0, 1, 0],
            vec![0, 1, 0, 2],
            vec![0, 0, 1, 0],
        ]);
        assert_eq!(m, expect);
        assert_eq!(
            array_eigenvalues(&ia(&[7, 6, 5], &[1, 2, 3])).unwrap(),
            vec![7, 3, -1, -5]
        );
    }

    #[test]
    fn invalid_arrays() {
        assert!(IntersectionArray::new(vec![3], vec![]).is_err());
        assert!(IntersectionArray::new(vec![3, 2], vec![2, 1]).is_err());
        assert!(IntersectionArray::new(vec![3, 2], vec![1, 4]).is_err());
        assert!(IntersectionArray::new(vec![3, 2], vec![1, 4]).is_err());
        // k_2 = 3 * 2 / 4 is not integral.
        assert!(IntersectionArray::new(vec![3, 2], vec![1, 3]).is_ok());
        assert!(IntersectionArray::new(vec![3, 1], vec![1, 2]).is_err());
    }

    #[test]
    fn pentagon_srg() {
        assert_eq!(
            check_srg(&cycle(5)),
            SrgOutcome::Strong(SrgParams { v: 5, k: 2, lambda: 0, mu: 1 })
        );
        assert!(matches!(check_srg(&cycle(6)), SrgOutcome::Refuted { .. }));
        let star = Graph::new(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        assert!(matches!(
            check_srg(&star),
            SrgOutcome::Refuted { pair: (1, None), .. }
        ));
    }

    #[test]
    fn expected_values() {
        let z2 = expected_params(Family::Z, 2);
        assert_eq!(z2.array, Some(ia(&[7, 6, 5], &[1, 2, 3])));
        assert_eq!(z2.vertices, 64);
        assert_eq!(z2.spectrum.unwrap().pairs, vec![(7, 1), (3, 21), (-1, 35), (-5, 7)]);
        let z3 = expected_params(Family::Z, 3);
        assert_eq!(
            z3.spectrum.unwrap().pairs,
            vec![(26, 1), (8, 156), (-1, 494), (-10, 78)]
        );
        assert_eq!(
            expected_params(Family::D4Far, 3).array,
            Some(ia(&[27, 26, 24, 19], &[1, 3, 8, 27]))
        );
        assert_eq!(
            expected_params(Family::B3DualPolar, 2).array,
            Some(ia(&[14, 12, 8], &[1, 3, 7]))
        );
        assert_eq!(
            expected_params(Family::EbdZ, 2).spectrum.unwrap().pairs,
            vec![(8, 1), (4, 28), (0, 70), (-4, 28), (-8, 1)]
        );
        assert_eq!(
            expected_params(Family::SrgHalf, 3).srg,
            Some(SrgParams { v: 729, k: 234, lambda: 81, mu: 72 })
        );
        for q in [2, 3, 4, 5, 7, 8, 9] {
            for fam in Family::ALL {
                let e = expected_params(fam, q);
                if let Some(a) = &e.array {
                    assert_eq!(a.vertex_count(), e.vertices, "{fam:?} q={q}");
                    assert_eq!(IntersectionArray::new(a.b.clone(), a.c.clone()).as_ref(), Ok(a));
                    // Closed-form spectrum agrees with the standard-sequence spectrum.
                    if let Some(s) = &e.spectrum {
                        assert_eq!(&drg_spectrum(a, e.vertices).unwrap(), s, "{fam:?} q={q}");
                    }
                }
                if let Some(p) = e.srg {
                    assert!(p.is_feasible());
                }
            }
        }
    }

    #[test]
    fn family_names_round_trip() {
        for fam in Family::ALL {
            assert_eq!(Family::parse(fam.name()), Some(fam));
        }
        assert_eq!(Family::parse("b3far"), Some(Family::Z));
        assert_eq!(Family::parse("nope"), None);
    }

    #[test]
    fn sampled_bases() {
        assert_eq!(Bases::Sample(3).select(10), vec![0, 3, 6]);
        assert_eq!(Bases::Sample(20).select(4), vec![0, 1, 2, 3]);
    }

    #[test]
    fn report_serializes_to_schema() {
        let r = certify_graph(&cycle(6), "hexagon", CertifyOptions::default());
        assert!(r.all_pass(), "{r:?}");
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["graph"]["n"], 6);
        assert_eq!(v["graph"]["source"], "hexagon");
        assert!(v["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true));
        assert_eq!(v["array"]["b"], serde_json::json!([2, 1, 1]));
        assert!(v.get("srg").is_none());
        assert!(v.get("timings").is_none());
        let back: CertReport = serde_json::from_value(v).unwrap();
        assert_eq!(back.array, r.array);
    }
}
