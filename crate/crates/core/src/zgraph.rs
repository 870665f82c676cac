//! The graph Z on `W x W`, `W = GF(q)^3`: `(u,u') ~ (v,v')` iff they differ
//! and `u x v + u' - v' = 0`. Also its translation automorphisms, the
//! closed-form distance classes, and the alternating-matrix labelling of the
//! B3 vertices far from a fixed vertex.

use rayon::prelude::*;

use crate::certify::{Check, CheckList};
use crate::error::{Error, Result};
use crate::exactlin::{self, GfMatrix};
use crate::gf::{Elem, Field, FieldElement};
use crate::graph::Graph;
use crate::quadgeom::{B3Geometry, Subspace};

pub type Vec3 = [Elem; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ZVertex {
    pub u: Vec3,
    pub up: Vec3,
}

impl ZVertex {
    pub const ORIGIN: ZVertex = ZVertex {
        u: [Elem::ZERO; 3],
        up: [Elem::ZERO; 3],
    };

    pub fn new(u: Vec3, up: Vec3) -> Self {
        ZVertex { u, up }
    }

    /// Base-q number with digits `(u1, u2, u3, u1', u2', u3')`, `u1` most significant.
    pub fn id(&self, q: usize) -> usize {
        self.u
            .iter()
            .chain(&self.up)
            .fold(0, |acc, x| acc * q + x.index())
    }

    pub fn from_id(mut id: usize, q: usize) -> Self {
        let mut digits = [Elem::ZERO; 6];
        for d in digits.iter_mut().rev() {
            *d = Elem((id % q) as u32);
            id /= q;
        }
        ZVertex {
            u: [digits[0], digits[1], digits[2]],
            up: [digits[3], digits[4], digits[5]],
        }
    }

    pub fn label(&self) -> String {
        self.u
            .iter()
            .chain(&self.up)
            .map(|x| x.index().to_string())
            .collect::<Vec<_>>()
            .join(",")
    }
}

pub fn add3(f: &Field, a: &Vec3, b: &Vec3) -> Vec3 {
    [f.add(a[0], b[0]), f.add(a[1], b[1]), f.add(a[2], b[2])]
}

pub fn cross(f: &Field, u: &Vec3, v: &Vec3) -> Vec3 {
    let m = |a: Elem, b: Elem, c: Elem, d: Elem| f.sub(f.mul(a, b), f.mul(c, d));
    [
        m(u[1], v[2], u[2], v[1]),
        m(u[2], v[0], u[0], v[2]),
        m(u[0], v[1], u[1], v[0]),
    ]
}

pub fn dot(f: &Field, u: &Vec3, v: &Vec3) -> Elem {
    (0..3).fold(Elem::ZERO, |acc, i| f.add(acc, f.mul(u[i], v[i])))
}

/// Cross product on field-tagged elements; rejects mixed fields.
pub fn cross_checked(u: &[FieldElement; 3], v: &[FieldElement; 3]) -> Result<[FieldElement; 3]> {
    let f = u[0].field().clone();
    if u.iter().chain(v).any(|x| x.field() != &f) {
        return Err(Error::FieldMismatch);
    }
    let r = cross(&f, &u.each_ref().map(|x| x.value()), &v.each_ref().map(|x| x.value()));
    Ok(r.map(|x| f.element(x)))
}

fn all_vec3(f: &Field) -> Vec<Vec3> {
    let els: Vec<Elem> = f.elements().collect();
    let mut out = Vec::with_capacity(els.len().pow(3));
    for &a in &els {
        for &b in &els {
            for &c in &els {
                out.push([a, b, c]);
            }
        }
    }
    out
}

/// Z over `GF(q)` in the canonical vertex order, labelled by coordinates.
pub fn build_z(q: u64) -> Result<Graph> {
    Ok(build_z_over(&Field::new(q)?))
}

pub fn build_z_over(f: &Field) -> Graph {
    let q = f.order() as usize;
    let n = q.pow(6);
    let ws = all_vec3(f);
    let lists: Vec<Vec<u32>> = (0..n)
        .into_par_iter()
        .map(|id| {
            let x = ZVertex::from_id(id, q);
            let mut l: Vec<u32> = ws
                .iter()
                .filter(|v| **v != x.u)
                .map(|v| ZVertex::new(*v, add3(f, &x.up, &cross(f, &x.u, v))).id(q) as u32)
                .collect();
            l.sort_unstable();
            l
        })
        .collect();
    let labels = (0..n).map(|id| ZVertex::from_id(id, q).label()).collect();
    Graph::from_adjacency(lists)
        .expect("the defining relation is symmetric")
        .with_labels(labels)
}

/// `(u, u') -> (u + a, u' + a x u + b)` as a permutation of vertex ids.
pub fn z_automorphism(f: &Field, a: &Vec3, b: &Vec3) -> Vec<usize> {
    let q = f.order() as usize;
    (0..q.pow(6))
        .into_par_iter()
        .map(|id| {
            let x = ZVertex::from_id(id, q);
            let u = add3(f, &x.u, a);
            let up = add3(f, &add3(f, &x.up, &cross(f, a, &x.u)), b);
            ZVertex::new(u, up).id(q)
        })
        .collect()
}

/// Vertices reachable from `start` under the given permutations.
pub fn orbit(perms: &[Vec<usize>], start: usize) -> Vec<usize> {
    let n = perms.first().map_or(0, Vec::len);
    let mut seen = vec![false; n.max(start + 1)];
    seen[start] = true;
    let mut stack = vec![start];
    let mut out = vec![start];
    while let Some(x) = stack.pop() {
        for p in perms {
            let y = p[x];
            if !seen[y] {
                seen[y] = true;
                stack.push(y);
                out.push(y);
            }
        }
    }
    out.sort_unstable();
    out
}

/// Distance from the origin, read off the coordinates.
pub fn z_distance_class(f: &Field, x: &ZVertex) -> u8 {
    let zero = [Elem::ZERO; 3];
    match (x.u == zero, x.up == zero) {
        (true, true) => 0,
        (false, true) => 1,
        (true, false) => 3,
        (false, false) if dot(f, &x.u, &x.up).is_zero() => 2,
        _ => 3,
    }
}

/// The 4x4 alternating matrix
/// ```text
///  0  a  b  c
/// -a  0  d  e
/// -b -d  0  f
/// -c -e -f  0
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AltMatrix {
    pub a: Elem,
    pub b: Elem,
    pub c: Elem,
    pub d: Elem,
    pub e: Elem,
    pub f: Elem,
}

impl AltMatrix {
    pub const ZERO: AltMatrix = AltMatrix {
        a: Elem::ZERO,
        b: Elem::ZERO,
        c: Elem::ZERO,
        d: Elem::ZERO,
        e: Elem::ZERO,
        f: Elem::ZERO,
    };

    pub fn from_array(x: [Elem; 6]) -> Self {
        AltMatrix {
            a: x[0],
            b: x[1],
            c: x[2],
            d: x[3],
            e: x[4],
            f: x[5],
        }
    }

    pub fn to_array(self) -> [Elem; 6] {
        [self.a, self.b, self.c, self.d, self.e, self.f]
    }

    /// All `q^6` matrices, `a` most significant.
    pub fn all(field: &Field) -> impl Iterator<Item = AltMatrix> + '_ {
        let q = field.order() as usize;
        (0..q.pow(6)).map(move |mut t| {
            let mut x = [Elem::ZERO; 6];
            for slot in x.iter_mut().rev() {
                *slot = Elem((t % q) as u32);
                t /= q;
            }
            AltMatrix::from_array(x)
        })
    }

    pub fn rows(&self, fl: &Field) -> [[Elem; 4]; 4] {
        let n = |x| fl.neg(x);
        let z = Elem::ZERO;
        let AltMatrix { a, b, c, d, e, f } = *self;
        [
            [z, a, b, c],
            [n(a), z, d, e],
            [n(b), n(d), z, f],
            [n(c), n(e), n(f), z],
        ]
    }

    pub fn matrix(&self, fl: &Field) -> GfMatrix {
        GfMatrix::from_rows(fl, 4, &self.rows(fl))
    }

    /// `af - be + cd`
    pub fn pfaffian(&self, fl: &Field) -> Elem {
        let t = fl.sub(fl.mul(self.a, self.f), fl.mul(self.b, self.e));
        fl.add(t, fl.mul(self.c, self.d))
    }

    /// `(0,f,-e,d)`, `(-f,0,c,-b)`, `(e,-c,0,a)`, `(-d,b,-a,0)`
    pub fn kernel_vectors(&self, fl: &Field) -> [[Elem; 4]; 4] {
        let n = |x| fl.neg(x);
        let z = Elem::ZERO;
        let AltMatrix { a, b, c, d, e, f } = *self;
        [
            [z, f, n(e), d],
            [n(f), z, c, n(b)],
            [e, n(c), z, a],
            [n(d), b, n(a), z],
        ]
    }

    /// `F_A`: the image of `<e5..e8>` under `(I A; 0 I)`, spanned by the
    /// vectors `(A e_j, e_j)`.
    pub fn f_a(&self, fl: &Field) -> Subspace {
        let m = self.rows(fl);
        let rows: Vec<Vec<Elem>> = (0..4)
            .map(|j| {
                let mut r = vec![Elem::ZERO; 8];
                for i in 0..4 {
                    r[i] = m[i][j];
                }
                r[4 + j] = Elem::ONE;
                r
            })
            .collect();
        Subspace::from_rows(fl, 8, &rows)
    }
}

/// `u = (c, e, f)`, `u' = (-d, b, -a)`
pub fn alt_label(fl: &Field, m: &AltMatrix) -> ZVertex {
    ZVertex::new([m.c, m.e, m.f], [fl.neg(m.d), m.b, fl.neg(m.a)])
}

/// `F_A ∩ H` in the seven B3 coordinates, `H = {x4 = x8}`.
pub fn f_a_meet_h(fl: &Field, m: &AltMatrix) -> Subspace {
    let mut h = vec![Elem::ZERO; 8];
    h[3] = Elem::ONE;
    h[7] = fl.neg(Elem::ONE);
    m.f_a(fl).meet_hyperplane(&h).map(|v| v[..7].to_vec())
}

/// Checks `det A = (af - be + cd)^2` over the field for every `A`.
pub fn det_check(fl: &Field) -> Check {
    let bad = AltMatrix::all(fl).find(|m| {
        let p = m.pfaffian(fl);
        exactlin::det(&m.matrix(fl)) != fl.mul(p, p)
    });
    Check::from_witness(
        "det A = (af-be+cd)^2",
        bad.map(|m| format!("A = {:?}", m.to_array().map(Elem::index))),
    )
    .with_value("matrices", fl.order().pow(6))
}

/// For every nonzero singular `A`, the kernel has dimension 2 and is spanned
/// by the four listed vectors.
pub fn kernel_check(fl: &Field) -> Check {
    let mut checked = 0u64;
    let mut bad = None;
    for m in AltMatrix::all(fl) {
        if m == AltMatrix::ZERO || !exactlin::det(&m.matrix(fl)).is_zero() {
            continue;
        }
        checked += 1;
        let ker = exactlin::kernel(&m.matrix(fl));
        let vs = GfMatrix::from_rows(fl, 4, &m.kernel_vectors(fl));
        let inside = vs.row_iter().all(|v| m.matrix(fl).apply(v).iter().all(|x| x.is_zero()));
        if ker.rows() != 2 || !inside || exactlin::rank(&vs) != 2 {
            bad = Some(m);
            break;
        }
    }
    Check::from_witness(
        "ker A spanned by the four listed vectors",
        bad.map(|m| format!("A = {:?}", m.to_array().map(Elem::index))),
    )
    .with_value("singular_nonzero", checked)
}

/// Labels the B3 vertices far from `<e1,e2,e3>` by alternating matrices
/// and checks the result is an isomorphism onto Z under `alt_label`.
pub fn verify_prop32_iso(q: u64) -> Result<CheckList> {
    let field = Field::new(q)?;
    let b3 = B3Geometry::over(&field);
    let z = build_z_over(&field);
    Ok(verify_prop32_iso_with(&b3, &z))
}

pub fn verify_prop32_iso_with(b3: &B3Geometry, z: &Graph) -> CheckList {
    let fl = b3.space.field();
    let q = fl.order() as usize;
    let mut out = CheckList::default();
    let (far, kept) = b3.far_from_vertex();
    let mut far_index = vec![usize::MAX; b3.vertices.len()];
    for (i, &v) in kept.iter().enumerate() {
        far_index[v] = i;
    }
    let pi0 = b3.base_vertex();

    let mats: Vec<AltMatrix> = AltMatrix::all(fl).collect();
    let images: Vec<std::result::Result<usize, String>> = mats
        .par_iter()
        .map(|m| {
            let s = f_a_meet_h(fl, m);
            let tag = || format!("A = {:?}", m.to_array().map(Elem::index));
            if s.dim() != 3 || !b3.space.is_totally_singular(s.basis()) {
                return Err(format!("{}: F_A ∩ H = {} is not a B3 vertex", tag(), s.label()));
            }
            if s.intersection_dim(&pi0) != 0 {
                return Err(format!("{}: F_A ∩ H meets the base vertex", tag()));
            }
            let id = b3
                .index_of(&s)
                .ok_or_else(|| format!("{}: {} missing from the enumeration", tag(), s.label()))?;
            Ok(far_index[id])
        })
        .collect();
    let first_bad = images.iter().find_map(|r| r.as_ref().err().cloned());
    out.push(Check::from_witness("F_A ∩ H is a vertex far from the base", first_bad.clone()));
    if first_bad.is_some() {
        return out;
    }

    // map[z id] = far id
    let mut map = vec![usize::MAX; z.n()];
    for (m, r) in mats.iter().zip(&images) {
        map[alt_label(fl, m).id(q)] = *r.as_ref().unwrap();
    }
    let mut hit = vec![false; far.n()];
    let mut dup = None;
    for (zid, &f) in map.iter().enumerate() {
        if f == usize::MAX || std::mem::replace(&mut hit[f], true) {
            dup = Some(format!("Z vertex {} has no or a repeated image", ZVertex::from_id(zid, q).label()));
            break;
        }
    }
    if dup.is_none() && far.n() != z.n() {
        dup = Some(format!("{} far vertices but {} matrices", far.n(), z.n()));
    }
    out.push(
        Check::from_witness("A -> F_A ∩ H is a bijection", dup.clone())
            .with_value("vertices", far.n()),
    );
    if dup.is_some() {
        return out;
    }

    let adj = z.maps_onto(&far, &map).err().map(|(a, b)| {
        format!(
            "Z pair ({}) ({}) disagrees with the geometric graph",
            ZVertex::from_id(a, q).label(),
            ZVertex::from_id(b, q).label()
        )
    });
    out.push(
        Check::from_witness("adjacency preserved under alt_label", adj)
            .with_value("edges", z.edge_count()),
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::bfs_partition;

    fn gf(q: u64) -> Field {
        Field::new(q).unwrap()
    }

    #[test]
    fn cross_identities() {
        let f = gf(2);
        assert_eq!(
            cross(&f, &[Elem(1), Elem(0), Elem(0)], &[Elem(0), Elem(1), Elem(0)]),
            [Elem(0), Elem(0), Elem(1)]
        );
        for q in [2, 3] {
            let f = gf(q);
            let ws = all_vec3(&f);
            for u in &ws {
                assert_eq!(cross(&f, u, u), [Elem::ZERO; 3]);
                for v in &ws {
                    let c = cross(&f, u, v);
                    assert!(dot(&f, &c, u).is_zero());
                    assert!(dot(&f, &c, v).is_zero());
                }
            }
        }
        let f3 = gf(3);
        let u = [f3.element(Elem(1)), f3.element(Elem(0)), f3.element(Elem(0))];
        let v = [gf(2).element(Elem(1)), f3.element(Elem(1)), f3.element(Elem(0))];
        assert_eq!(cross_checked(&u, &v).unwrap_err(), Error::FieldMismatch);
    }

    #[test]
    fn ids_round_trip() {
        for id in 0..729 {
            assert_eq!(ZVertex::from_id(id, 3).id(3), id);
        }
        assert_eq!(ZVertex::from_id(1, 2).label(), "0,0,0,0,0,1");
        assert_eq!(ZVertex::from_id(32, 2).label(), "1,0,0,0,0,0");
    }

    #[test]
    fn z2_shape() {
        let z = build_z(2).unwrap();
        assert_eq!(z.n(), 64);
        assert_eq!(z.regular_degree(), Some(7));
        let nbrs: Vec<usize> = z.neighbors(0).iter().map(|&x| x as usize).collect();
        let expect: Vec<usize> = (1..8).map(|u| u * 8).collect();
        assert_eq!(nbrs, expect);
        assert_eq!(z.labels().unwrap()[9], "0,0,1,0,0,1");
    }

    #[test]
    fn automorphisms() {
        let f = gf(2);
        let z = build_z_over(&f);
        let ws = all_vec3(&f);
        let zero = [Elem::ZERO; 3];
        assert_eq!(z_automorphism(&f, &zero, &zero), (0..64).collect::<Vec<_>>());
        let mut perms = Vec::new();
        for a in &ws {
            for b in &ws {
                let p = z_automorphism(&f, a, b);
                assert_eq!(z.maps_onto(&z, &p), Ok(()));
                perms.push(p);
            }
        }
        assert_eq!(orbit(&perms, 0).len(), 64);
        let f3 = gf(3);
        let z3 = build_z_over(&f3);
        let e = |i: usize| {
            let mut v = [Elem::ZERO; 3];
            v[i] = Elem::ONE;
            v
        };
        let gens: Vec<Vec<usize>> = (0..3)
            .flat_map(|i| [z_automorphism(&f3, &e(i), &zero), z_automorphism(&f3, &zero, &e(i))])
            .collect();
        for p in &gens {
            assert_eq!(z3.maps_onto(&z3, p), Ok(()));
        }
        assert_eq!(orbit(&gens, 0).len(), 729);
    }

    #[test]
    fn distance_classes_match_bfs() {
        let f = gf(2);
        let o = |u: [u32; 3], up: [u32; 3]| ZVertex::new(u.map(Elem), up.map(Elem));
        assert_eq!(z_distance_class(&f, &o([1, 0, 0], [0, 0, 0])), 1);
        assert_eq!(z_distance_class(&f, &o([1, 0, 0], [0, 1, 0])), 2);
        assert_eq!(z_distance_class(&f, &o([0, 0, 0], [1, 0, 0])), 3);
        for q in [2, 3, 4] {
            let f = gf(q);
            let z = build_z_over(&f);
            let p = bfs_partition(&z, 0);
            for id in 0..z.n() {
                let x = ZVertex::from_id(id, q as usize);
                assert_eq!(z_distance_class(&f, &x) as u32, p.dist[id], "q={q} {}", x.label());
            }
        }
    }

    #[test]
    fn local_parameters() {
        for q in [2u64, 3, 4] {
            let z = build_z(q).unwrap();
            let p = bfs_partition(&z, 0);
            let count = |v: usize, d: u32| {
                z.neighbors(v).iter().filter(|&&w| p.dist[w as usize] == d).count() as u64
            };
            let first = |d: u32| (0..z.n()).find(|&v| p.dist[v] == d).unwrap();
            let (v1, v2, v3) = (first(1), first(2), first(3));
            assert_eq!(count(v1, 1), q - 2, "a1");
            assert_eq!(count(v2, 1), q, "c2");
            assert_eq!(count(v2, 2), q * q - q - 2, "a2");
            assert_eq!(count(v3, 2), q * q - 1, "c3");
            let (q2, q3) = (q * q, q * q * q);
            let sizes: Vec<u64> = p.class_sizes.iter().map(|&s| s as u64).collect();
            assert_eq!(sizes, vec![1, q3 - 1, (q2 - 1) * (q3 - 1), (q3 - q2 + 1) * (q3 - 1)]);
        }
    }

    #[test]
    fn alt_labels() {
        let f = gf(3);
        assert_eq!(alt_label(&f, &AltMatrix::ZERO), ZVertex::ORIGIN);
        let m = AltMatrix { c: Elem::ONE, ..AltMatrix::ZERO };
        assert_eq!(
            alt_label(&f, &m),
            ZVertex::new([Elem(1), Elem(0), Elem(0)], [Elem::ZERO; 3])
        );
        let mut seen = vec![false; 729];
        for m in AltMatrix::all(&f) {
            let id = alt_label(&f, &m).id(3);
            assert!(!std::mem::replace(&mut seen[id], true));
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn matrix_checks_q2() {
        let f = gf(2);
        assert!(det_check(&f).pass);
        let k = kernel_check(&f);
        assert!(k.pass, "{k:?}");
        // Rank-2 nonzero alternating 4x4 matrices over GF(2): 35.
        assert_eq!(k.values["singular_nonzero"], 35);
    }

    #[test]
    fn f_a_is_totally_singular_and_disjoint_from_e() {
        let f = gf(2);
        let space = crate::quadgeom::QuadraticSpace::d4_over(&f);
        let e = space.coordinate_subspace(&[0, 1, 2, 3]);
        for m in AltMatrix::all(&f) {
            let fa = m.f_a(&f);
            assert!(space.is_totally_singular(fa.basis()));
            assert_eq!(fa.dim(), 4);
            assert_eq!(fa.intersection_dim(&e), 0);
        }
    }

    #[test]
    fn prop32_q2() {
        let checks = verify_prop32_iso(2).unwrap();
        assert!(checks.all_pass(), "{checks:?}");
        let last = checks.checks.last().unwrap();
        assert_eq!(last.values["edges"], 224);
    }
}
