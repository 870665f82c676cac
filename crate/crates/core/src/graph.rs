//! Undirected simple graphs on dense vertex ids, BFS distance partitions,
//! double-cover transforms and graph6 interchange.

use std::collections::VecDeque;

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::exactlin::IntMatrix;

/// Marker for unreachable vertices in a [`DistancePartition`].
pub const UNREACHABLE: u32 = u32::MAX;

/// Immutable simple graph in compressed adjacency form. Neighbor lists are
/// sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<u32>,
    labels: Option<Vec<String>>,
    /// `true` for vertices on the minus side.
    bipartition: Option<Vec<bool>>,
}

/// Color class of a bipartite graph. Plus holds vertex 0 for the double
/// covers built here.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

impl Graph {
    /// Builds a graph from an edge list. Duplicate edges collapse.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut lists = vec![Vec::new(); n];
        for &(u, v) in edges {
            for x in [u, v] {
                if x >= n {
                    return Err(Error::VertexOutOfRange { vertex: x, n });
                }
            }
            if u == v {
                return Err(Error::LoopEdge(u));
            }
            lists[u].push(v as u32);
            lists[v].push(u as u32);
        }
        Ok(Self::from_lists_unchecked(lists))
    }

    /// Builds a graph from per-vertex neighbor lists, which must describe a
    /// symmetric loop-free relation. Lists are sorted and deduplicated.
    pub fn from_adjacency(lists: Vec<Vec<u32>>) -> Result<Self> {
        let n = lists.len();
        let g = Self::from_lists_unchecked(lists);
        for v in 0..n {
            for &w in g.neighbors(v) {
                let w = w as usize;
                if w >= n {
                    return Err(Error::VertexOutOfRange { vertex: w, n });
                }
                if w == v {
                    return Err(Error::LoopEdge(v));
                }
                if !g.has_edge(w, v) {
                    return Err(Error::AsymmetricAdjacency(v, w));
                }
            }
        }
        Ok(g)
    }

    fn from_lists_unchecked(mut lists: Vec<Vec<u32>>) -> Self {
        let mut offsets = Vec::with_capacity(lists.len() + 1);
        let total: usize = lists.iter().map(Vec::len).sum();
        let mut targets = Vec::with_capacity(total);
        offsets.push(0);
        for l in lists.iter_mut() {
            l.sort_unstable();
            l.dedup();
            targets.extend_from_slice(l);
            offsets.push(targets.len());
        }
        Graph {
            offsets,
            targets,
            labels: None,
            bipartition: None,
        }
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Self {
        assert_eq!(labels.len(), self.n(), "one label per vertex");
        self.labels = Some(labels);
        self
    }

    /// Attaches a known two-coloring (`true` = minus side).
    pub fn with_bipartition(mut self, minus: Vec<bool>) -> Result<Self> {
        assert_eq!(minus.len(), self.n());
        for (u, v) in self.edges() {
            if minus[u] == minus[v] {
                return Err(Error::NotBipartite);
            }
        }
        self.bipartition = Some(minus);
        Ok(self)
    }

    /// Detects a two-coloring by BFS, coloring the smallest vertex of each
    /// component plus.
    pub fn with_detected_bipartition(self) -> Result<Self> {
        let n = self.n();
        let mut color: Vec<Option<bool>> = vec![None; n];
        for s in 0..n {
            if color[s].is_some() {
                continue;
            }
            color[s] = Some(false);
            let mut queue = VecDeque::from([s]);
            while let Some(v) = queue.pop_front() {
                let c = color[v].unwrap();
                for &w in self.neighbors(v) {
                    match color[w as usize] {
                        None => {
                            color[w as usize] = Some(!c);
                            queue.push_back(w as usize);
                        }
                        Some(cw) if cw == c => return Err(Error::NotBipartite),
                        _ => {}
                    }
                }
            }
        }
        let minus = color.into_iter().map(|c| c.unwrap()).collect();
        self.with_bipartition(minus)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&(v as u32)).is_ok()
    }

    /// Edges `(u, v)` with `u < v`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n()).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .map(|&v| v as usize)
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn bipartition(&self) -> Option<&[bool]> {
        self.bipartition.as_deref()
    }

    /// Common degree, if the graph is regular (and nonempty).
    pub fn regular_degree(&self) -> Option<usize> {
        let k = self.degree(0.min(self.n().saturating_sub(1)));
        (self.n() > 0 && (0..self.n()).all(|v| self.degree(v) == k)).then_some(k)
    }

    pub fn is_connected(&self) -> bool {
        self.n() == 0 || bfs_partition(self, 0).reached() == self.n()
    }

    /// Subgraph induced on `vertices` (kept in the given order, which becomes
    /// the new numbering). Labels carry over.
    pub fn induced(&self, vertices: &[usize]) -> Graph {
        let mut index = vec![u32::MAX; self.n()];
        for (i, &v) in vertices.iter().enumerate() {
            index[v] = i as u32;
        }
        let lists = vertices
            .iter()
            .map(|&v| {
                self.neighbors(v)
                    .iter()
                    .map(|&w| index[w as usize])
                    .filter(|&w| w != u32::MAX)
                    .collect()
            })
            .collect();
        let mut g = Self::from_lists_unchecked(lists);
        if let Some(labels) = &self.labels {
            g.labels = Some(vertices.iter().map(|&v| labels[v].clone()).collect());
        }
        g
    }

    /// Checks that `map` sends this graph onto `other` edge for edge. On
    /// failure returns the first offending pair in this graph's numbering.
    pub fn maps_onto(&self, other: &Graph, map: &[usize]) -> std::result::Result<(), (usize, usize)> {
        assert_eq!(map.len(), self.n());
        if self.n() != other.n() {
            return Err((self.n(), other.n()));
        }
        let mut seen = vec![false; other.n()];
        for &m in map {
            if m >= other.n() || std::mem::replace(&mut seen[m], true) {
                return Err((m, m));
            }
        }
        for (u, v) in self.edges() {
            if !other.has_edge(map[u], map[v]) {
                return Err((u, v));
            }
        }
        if self.edge_count() != other.edge_count() {
            // Injective on edges, so a count difference means `other` has extra edges.
            let mut inverse = vec![0; other.n()];
            for (i, &m) in map.iter().enumerate() {
                inverse[m] = i;
            }
            for (a, b) in other.edges() {
                if !self.has_edge(inverse[a], inverse[b]) {
                    return Err((inverse[a], inverse[b]));
                }
            }
        }
        Ok(())
    }

    /// Dense 0/1 adjacency matrix.
    pub fn adjacency_matrix(&self) -> IntMatrix {
        let n = self.n();
        let mut m = vec![vec![BigInt::from(0); n]; n];
        for (u, v) in self.edges() {
            m[u][v] = BigInt::from(1);
            m[v][u] = BigInt::from(1);
        }
        m
    }
}

/// BFS distances from one base vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistancePartition {
    pub base: usize,
    /// Distance per vertex, [`UNREACHABLE`] when not reachable.
    pub dist: Vec<u32>,
    /// `class_sizes[i]` = number of vertices at distance i.
    pub class_sizes: Vec<usize>,
}

impl DistancePartition {
    /// Eccentricity of the base within its component.
    pub fn diameter(&self) -> usize {
        self.class_sizes.len() - 1
    }

    pub fn reached(&self) -> usize {
        self.class_sizes.iter().sum()
    }
}

pub fn bfs_partition(g: &Graph, base: usize) -> DistancePartition {
    let n = g.n();
    assert!(base < n, "base vertex out of range");
    let mut dist = vec![UNREACHABLE; n];
    let mut class_sizes = vec![1usize];
    dist[base] = 0;
    let mut queue = VecDeque::from([base]);
    while let Some(v) = queue.pop_front() {
        let d = dist[v] + 1;
        for &w in g.neighbors(v) {
            let w = w as usize;
            if dist[w] == UNREACHABLE {
                dist[w] = d;
                if class_sizes.len() <= d as usize {
                    class_sizes.push(0);
                }
                class_sizes[d as usize] += 1;
                queue.push_back(w);
            }
        }
    }
    DistancePartition {
        base,
        dist,
        class_sizes,
    }
}

fn signed_labels(g: &Graph) -> Option<Vec<String>> {
    g.labels.as_ref().map(|labels| {
        let plus = labels.iter().map(|l| format!("{l}+"));
        let minus = labels.iter().map(|l| format!("{l}-"));
        plus.chain(minus).collect()
    })
}

fn double_cover(g: &Graph, with_matching: bool) -> Graph {
    let n = g.n();
    let mut lists = Vec::with_capacity(2 * n);
    for side in 0..2u32 {
        let other = if side == 0 { n as u32 } else { 0 };
        for x in 0..n {
            let mut l: Vec<u32> = g.neighbors(x).iter().map(|&y| y + other).collect();
            if with_matching {
                l.push(x as u32 + other);
            }
            lists.push(l);
        }
    }
    let mut h = Graph::from_lists_unchecked(lists);
    h.labels = signed_labels(g);
    h.bipartition = Some((0..2 * n).map(|v| v >= n).collect());
    h
}

/// Vertices `x+ = x`, `x- = x + n`; `x+ ~ y-` iff `x ~ y`.
pub fn bipartite_double(g: &Graph) -> Graph {
    double_cover(g, false)
}

/// The bipartite double plus the matching `x+ ~ x-`.
pub fn extended_bipartite_double(g: &Graph) -> Graph {
    double_cover(g, true)
}

/// Distance-2 graph on one color class of a connected bipartite graph,
/// vertices renumbered in ascending order of their ids in `g`.
pub fn halved_graph(g: &Graph, side: Side) -> Result<Graph> {
    let minus = g.bipartition().ok_or(Error::NotBipartite)?;
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let want = side == Side::Minus;
    let vertices: Vec<usize> = (0..g.n()).filter(|&v| minus[v] == want).collect();
    let mut index = vec![u32::MAX; g.n()];
    for (i, &v) in vertices.iter().enumerate() {
        index[v] = i as u32;
    }
    let mut mark = vec![usize::MAX; g.n()];
    let lists = vertices
        .iter()
        .map(|&v| {
            mark[v] = v;
            let mut l = Vec::new();
            for &w in g.neighbors(v) {
                for &x in g.neighbors(w as usize) {
                    let x = x as usize;
                    if mark[x] != v {
                        mark[x] = v;
                        l.push(index[x]);
                    }
                }
            }
            l
        })
        .collect();
    let mut h = Graph::from_lists_unchecked(lists);
    if let Some(labels) = &g.labels {
        h.labels = Some(vertices.iter().map(|&v| labels[v].clone()).collect());
    }
    Ok(h)
}

/// Same vertex set; `u ~ v` iff their distance in `g` is 1 or 2.
pub fn distance_1_or_2(g: &Graph) -> Graph {
    let mut mark = vec![usize::MAX; g.n()];
    let lists = (0..g.n())
        .map(|v| {
            mark[v] = v;
            let mut l = Vec::new();
            for &w in g.neighbors(v) {
                if mark[w as usize] != v {
                    mark[w as usize] = v;
                    l.push(w);
                }
                for &x in g.neighbors(w as usize) {
                    if mark[x as usize] != v {
                        mark[x as usize] = v;
                        l.push(x);
                    }
                }
            }
            l
        })
        .collect();
    let mut h = Graph::from_lists_unchecked(lists);
    h.labels = g.labels.clone();
    h
}

/// Same vertex set, complementary edge set.
pub fn complement(g: &Graph) -> Graph {
    let n = g.n();
    let lists = (0..n)
        .map(|v| {
            let mut nb = g.neighbors(v).iter().peekable();
            (0..n as u32)
                .filter(|&w| {
                    while nb.next_if(|&&x| x < w).is_some() {}
                    w as usize != v && nb.peek() != Some(&&w)
                })
                .collect()
        })
        .collect();
    let mut h = Graph::from_lists_unchecked(lists);
    h.labels = g.labels.clone();
    h
}

const GRAPH6_HEADER: &[u8] = b">>graph6<<";
const GRAPH6_MAX_N: u64 = 68_719_476_735;

/// Standard graph6 encoding, without header or trailing newline.
pub fn graph6_encode(g: &Graph) -> Vec<u8> {
    let n = g.n() as u64;
    assert!(n <= GRAPH6_MAX_N, "graph too large for graph6");
    let mut out = Vec::new();
    if n <= 62 {
        out.push(n as u8 + 63);
    } else if n <= 258_047 {
        out.push(126);
        for shift in [12, 6, 0] {
            out.push(((n >> shift) & 63) as u8 + 63);
        }
    } else {
        out.push(126);
        out.push(126);
        for shift in [30, 24, 18, 12, 6, 0] {
            out.push(((n >> shift) & 63) as u8 + 63);
        }
    }
    let mut acc = 0u8;
    let mut nbits = 0;
    let n = g.n();
    for j in 1..n {
        let nb = g.neighbors(j);
        // Neighbors below j, ascending, walked in step with i.
        let mut it = nb.iter().take_while(|&&x| (x as usize) < j).peekable();
        for i in 0..j {
            let bit = if it.peek().is_some_and(|&&x| x as usize == i) {
                it.next();
                1
            } else {
                0
            };
            acc = (acc << 1) | bit;
            nbits += 1;
            if nbits == 6 {
                out.push(acc + 63);
                acc = 0;
                nbits = 0;
            }
        }
    }
    if nbits > 0 {
        out.push((acc << (6 - nbits)) + 63);
    }
    out
}

fn malformed(msg: &str) -> Error {
    Error::MalformedGraph6(msg.to_string())
}

/// Decodes one graph6 record. Accepts an optional `>>graph6<<` header and
/// surrounding whitespace.
pub fn graph6_decode(input: &[u8]) -> Result<Graph> {
    let mut s = input;
    while let Some((last, rest)) = s.split_last() {
        if last.is_ascii_whitespace() {
            s = rest;
        } else {
            break;
        }
    }
    while let Some((first, rest)) = s.split_first() {
        if first.is_ascii_whitespace() {
            s = rest;
        } else {
            break;
        }
    }
    if let Some(rest) = s.strip_prefix(GRAPH6_HEADER) {
        s = rest;
    }
    if s.is_empty() {
        return Err(malformed("empty input"));
    }
    if let Some(&b) = s.iter().find(|&&b| !(63..=126).contains(&b)) {
        return Err(malformed(&format!("byte {b} outside the printable range 63..=126")));
    }
    let (n, body) = if s[0] != 126 {
        ((s[0] - 63) as u64, &s[1..])
    } else if s.len() >= 2 && s[1] == 126 {
        if s.len() < 8 {
            return Err(malformed("truncated size field"));
        }
        let n = s[2..8].iter().fold(0u64, |acc, &b| (acc << 6) | (b - 63) as u64);
        (n, &s[8..])
    } else {
        if s.len() < 4 {
            return Err(malformed("truncated size field"));
        }
        let n = s[1..4].iter().fold(0u64, |acc, &b| (acc << 6) | (b - 63) as u64);
        (n, &s[4..])
    };
    let n = usize::try_from(n).map_err(|_| malformed("vertex count too large"))?;
    let bits = n.saturating_sub(1) as u128 * n as u128 / 2;
    let expected = bits.div_ceil(6);
    if body.len() as u128 != expected {
        return Err(malformed(&format!(
            "expected {expected} adjacency bytes for n = {n}, found {}",
            body.len()
        )));
    }
    let mut lists = vec![Vec::new(); n];
    let mut k = 0usize;
    'outer: for j in 1..n {
        for i in 0..j {
            let byte = body[k / 6] - 63;
            if (byte >> (5 - k % 6)) & 1 == 1 {
                lists[i].push(j as u32);
                lists[j].push(i as u32);
            }
            k += 1;
            if k as u128 == bits {
                break 'outer;
            }
        }
    }
    Ok(Graph::from_lists_unchecked(lists))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: usize) -> Graph {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Graph::new(n, &edges).unwrap()
    }

    fn complete(n: usize) -> Graph {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                edges.push((i, j));
            }
        }
        Graph::new(n, &edges).unwrap()
    }

    #[test]
    fn construction() {
        let k2 = Graph::new(2, &[(0, 1)]).unwrap();
        assert_eq!(k2.edge_count(), 1);
        let tri = complete(3);
        assert_eq!(tri.regular_degree(), Some(2));
        let g = Graph::new(4, &[(0, 1), (0, 1), (1, 0)]).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.neighbors(0), &[1]);
        assert_eq!(Graph::new(3, &[(1, 1)]), Err(Error::LoopEdge(1)));
        assert_eq!(
            Graph::new(3, &[(0, 3)]),
            Err(Error::VertexOutOfRange { vertex: 3, n: 3 })
        );
        assert!(Graph::from_adjacency(vec![vec![1], vec![]]).is_err());
    }

    #[test]
    fn bfs_examples() {
        let p = bfs_partition(&complete(3), 1);
        assert_eq!(p.class_sizes, vec![1, 2]);
        assert_eq!(p.diameter(), 1);
        for v in 0..6 {
            assert_eq!(bfs_partition(&cycle(6), v).class_sizes, vec![1, 2, 2, 1]);
        }
        let g = Graph::new(3, &[(0, 1)]).unwrap();
        let p = bfs_partition(&g, 0);
        assert_eq!(p.dist[2], UNREACHABLE);
        assert_eq!(p.reached(), 2);
    }

    #[test]
    fn double_examples() {
        let k2 = complete(2);
        let bd = bipartite_double(&k2);
        assert_eq!(bd.n(), 4);
        assert_eq!(bd.edges().collect::<Vec<_>>(), vec![(0, 3), (1, 2)]);
        assert!(!bd.is_connected());

        // Double of the triangle is a 6-cycle: connected, 2-regular, 6 vertices.
        let bd = bipartite_double(&complete(3));
        assert_eq!(bd.regular_degree(), Some(2));
        assert!(bd.is_connected());
        assert_eq!(bfs_partition(&bd, 0).class_sizes, vec![1, 2, 2, 1]);

        let single = Graph::new(1, &[]).unwrap();
        assert_eq!(bipartite_double(&single).edge_count(), 0);
        assert_eq!(extended_bipartite_double(&single), {
            let mut k2 = complete(2);
            k2.bipartition = Some(vec![false, true]);
            k2
        });

        let ebd = extended_bipartite_double(&k2);
        assert_eq!(
            ebd.edges().collect::<Vec<_>>(),
            vec![(0, 2), (0, 3), (1, 2), (1, 3)]
        );
        assert_eq!(ebd.regular_degree(), Some(2));
        assert!(ebd.is_connected());
    }

    #[test]
    fn halving() {
        let c4 = cycle(4).with_detected_bipartition().unwrap();
        assert_eq!(halved_graph(&c4, Side::Plus).unwrap(), complete(2));
        let c6 = cycle(6).with_detected_bipartition().unwrap();
        assert_eq!(halved_graph(&c6, Side::Minus).unwrap(), complete(3));
        assert_eq!(halved_graph(&cycle(4), Side::Plus), Err(Error::NotBipartite));
        assert_eq!(
            cycle(5).with_detected_bipartition().map(|_| ()),
            Err(Error::NotBipartite)
        );
    }

    #[test]
    fn distance_one_or_two() {
        assert_eq!(distance_1_or_2(&cycle(5)), complete(5));
        assert_eq!(distance_1_or_2(&complete(2)), complete(2));
        assert_eq!(distance_1_or_2(&cycle(6)).regular_degree(), Some(4));
    }

    #[test]
    fn graph6_examples() {
        assert_eq!(graph6_encode(&complete(2)), b"A_");
        assert_eq!(graph6_encode(&Graph::new(5, &[]).unwrap()), b"D??");
        assert_eq!(graph6_encode(&Graph::new(0, &[]).unwrap()), b"?");
        // Reference value from the petgraph test-suite.
        let g = Graph::new(5, &[(0, 2), (0, 4), (1, 3), (3, 4)]).unwrap();
        assert_eq!(graph6_encode(&g), b"DQc");
        assert_eq!(graph6_decode(b">>graph6<<DQc\n").unwrap(), g);
        // 63 vertices switches to the four-byte size field.
        let big = cycle(63);
        let enc = graph6_encode(&big);
        assert_eq!(&enc[..4], &[126, 63, 63, 63 + 63]);
        assert_eq!(graph6_decode(&enc).unwrap(), big);
    }

    #[test]
    fn graph6_rejects_garbage() {
        for bad in [&b""[..], b"A", b"A__", b":Fa@x^", b"A\x20"] {
            assert!(matches!(graph6_decode(bad), Err(Error::MalformedGraph6(_))), "{bad:?}");
        }
    }

    #[test]
    fn explicit_map_check() {
        let c = cycle(5);
        let rot: Vec<usize> = (0..5).map(|i| (i + 2) % 5).collect();
        assert!(c.maps_onto(&c, &rot).is_ok());
        let path = Graph::new(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
        assert!(path.maps_onto(&c, &[0, 1, 2, 3, 4]).is_err());
        assert!(c.maps_onto(&path, &[0, 1, 2, 3, 4]).is_err());
    }

    #[test]
    fn complement_of_pentagon_is_pentagon() {
        let c = complement(&cycle(5));
        assert_eq!(c.edge_count(), 5);
        assert!(c.has_edge(0, 2) && c.has_edge(0, 3) && !c.has_edge(0, 1));
        let k = complement(&Graph::new(4, &[]).unwrap());
        assert_eq!(k.edge_count(), 6);
        assert_eq!(complement(&k), Graph::new(4, &[]).unwrap());
    }
}
