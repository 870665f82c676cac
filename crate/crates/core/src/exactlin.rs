//! Exact linear algebra: row reduction over GF(q), and characteristic
//! polynomials, integer roots and ranks over the integers.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::gf::{Elem, Field};

/// Dense row-major matrix over a finite field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GfMatrix {
    field: Field,
    rows: usize,
    cols: usize,
    entries: Vec<Elem>,
}

impl GfMatrix {
    pub fn zeros(field: &Field, rows: usize, cols: usize) -> Self {
        GfMatrix {
            field: field.clone(),
            rows,
            cols,
            entries: vec![Elem::ZERO; rows * cols],
        }
    }

    pub fn identity(field: &Field, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, Elem::ONE);
        }
        m
    }

    /// Builds a matrix from row slices; all rows must have length `cols`.
    pub fn from_rows<R: AsRef<[Elem]>>(field: &Field, cols: usize, rows: &[R]) -> Self {
        let mut entries = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            assert_eq!(r.len(), cols, "row length mismatch");
            entries.extend_from_slice(r);
        }
        GfMatrix {
            field: field.clone(),
            rows: rows.len(),
            cols,
            entries,
        }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Elem {
        self.entries[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Elem) {
        self.entries[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Elem] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[Elem]> {
        self.entries.chunks(self.cols.max(1)).take(self.rows)
    }

    pub fn entries(&self) -> &[Elem] {
        &self.entries
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(&self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    /// Matrix-vector product `M x`.
    pub fn apply(&self, x: &[Elem]) -> Vec<Elem> {
        assert_eq!(x.len(), self.cols);
        let f = &self.field;
        self.row_iter()
            .map(|row| {
                row.iter()
                    .zip(x)
                    .fold(Elem::ZERO, |acc, (&a, &b)| f.add(acc, f.mul(a, b)))
            })
            .collect()
    }

    /// Stacks `other` below `self`.
    pub fn vstack(&self, other: &GfMatrix) -> GfMatrix {
        assert_eq!(self.cols, other.cols);
        let mut entries = self.entries.clone();
        entries.extend_from_slice(&other.entries);
        GfMatrix {
            field: self.field.clone(),
            rows: self.rows + other.rows,
            cols: self.cols,
            entries,
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for c in 0..self.cols {
                self.entries.swap(a * self.cols + c, b * self.cols + c);
            }
        }
    }

    /// Drops all-zero rows.
    fn compact(mut self) -> Self {
        let cols = self.cols;
        let keep: Vec<Elem> = self
            .entries
            .chunks(cols.max(1))
            .take(self.rows)
            .filter(|r| r.iter().any(|x| !x.is_zero()))
            .flatten()
            .copied()
            .collect();
        self.rows = if cols == 0 { 0 } else { keep.len() / cols };
        self.entries = keep;
        self
    }
}

impl std::hash::Hash for GfMatrix {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.rows.hash(state);
        self.cols.hash(state);
        self.entries.hash(state);
    }
}

/// Result of [`rref`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rref {
    pub rank: usize,
    pub reduced: GfMatrix,
    pub pivot_cols: Vec<usize>,
}

/// Gauss-Jordan elimination. Zero rows are kept at the bottom, so
/// `reduced` has the shape of the input.
pub fn rref(m: &GfMatrix) -> Rref {
    let f = m.field.clone();
    let mut a = m.clone();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..a.cols {
        if r == a.rows {
            break;
        }
        let Some(p) = (r..a.rows).find(|&i| !a.get(i, c).is_zero()) else {
            continue;
        };
        a.swap_rows(r, p);
        let inv = f.inv(a.get(r, c)).expect("pivot is nonzero");
        for j in c..a.cols {
            let v = f.mul(a.get(r, j), inv);
            a.set(r, j, v);
        }
        for i in 0..a.rows {
            if i == r {
                continue;
            }
            let factor = a.get(i, c);
            if factor.is_zero() {
                continue;
            }
            for j in c..a.cols {
                let v = f.sub(a.get(i, j), f.mul(factor, a.get(r, j)));
                a.set(i, j, v);
            }
        }
        pivots.push(c);
        r += 1;
    }
    Rref {
        rank: r,
        reduced: a,
        pivot_cols: pivots,
    }
}

pub fn rank(m: &GfMatrix) -> usize {
    rref(m).rank
}

/// Nonzero rows of the RREF: the canonical basis of the row space.
pub fn row_space(m: &GfMatrix) -> GfMatrix {
    rref(m).reduced.compact()
}

/// Basis of the right null space `{x : M x = 0}`, as rows in RREF.
pub fn kernel(m: &GfMatrix) -> GfMatrix {
    let f = &m.field;
    let Rref {
        reduced,
        pivot_cols,
        ..
    } = rref(m);
    let free: Vec<usize> = (0..m.cols).filter(|c| !pivot_cols.contains(c)).collect();
    let mut basis = GfMatrix::zeros(f, free.len(), m.cols);
    for (k, &fc) in free.iter().enumerate() {
        basis.set(k, fc, Elem::ONE);
        for (i, &pc) in pivot_cols.iter().enumerate() {
            basis.set(k, pc, f.neg(reduced.get(i, fc)));
        }
    }
    row_space(&basis)
}

/// Determinant of a square matrix over the field.
pub fn det(m: &GfMatrix) -> Elem {
    assert_eq!(m.rows, m.cols, "determinant of a non-square matrix");
    let f = m.field.clone();
    let mut a = m.clone();
    let n = a.rows;
    let mut acc = Elem::ONE;
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a.get(i, c).is_zero()) else {
            return Elem::ZERO;
        };
        if p != c {
            a.swap_rows(p, c);
            acc = f.neg(acc);
        }
        let pivot = a.get(c, c);
        acc = f.mul(acc, pivot);
        let inv = f.inv(pivot).expect("pivot is nonzero");
        for i in c + 1..n {
            let factor = f.mul(a.get(i, c), inv);
            if factor.is_zero() {
                continue;
            }
            for j in c..n {
                let v = f.sub(a.get(i, j), f.mul(factor, a.get(c, j)));
                a.set(i, j, v);
            }
        }
    }
    acc
}

/// Polynomial with arbitrary-precision integer coefficients, constant term first.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IntPolynomial {
    coeffs: Vec<BigInt>,
}

impl IntPolynomial {
    pub fn new(coeffs: Vec<BigInt>) -> Self {
        let mut p = IntPolynomial { coeffs };
        p.trim();
        p
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn one() -> Self {
        Self::from_i64(&[1])
    }

    /// `x - r`
    pub fn linear(r: i64) -> Self {
        Self::from_i64(&[-r, 1])
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with the zero polynomial reported as degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, x: &BigInt) -> BigInt {
        self.coeffs
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, c| acc * x + c)
    }

    pub fn mul(&self, other: &IntPolynomial) -> IntPolynomial {
        if self.is_zero() || other.is_zero() {
            return IntPolynomial::default();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        IntPolynomial::new(out)
    }

    pub fn scale(&self, k: &BigInt) -> IntPolynomial {
        IntPolynomial::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    /// `p(a x + b)` for integers a, b.
    pub fn compose_linear(&self, a: i64, b: i64) -> IntPolynomial {
        let inner = IntPolynomial::from_i64(&[b, a]);
        let mut acc = IntPolynomial::default();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(&inner);
            let mut cs = acc.coeffs.clone();
            if cs.is_empty() {
                cs.push(BigInt::zero());
            }
            cs[0] += c;
            acc = IntPolynomial::new(cs);
        }
        acc
    }

    /// Divides by `x - r` if it is a root, returning the quotient.
    fn deflate(&self, r: &BigInt) -> Option<IntPolynomial> {
        let n = self.coeffs.len();
        if n < 2 {
            return None;
        }
        // Synthetic division from the top coefficient down.
        let mut quot = vec![BigInt::zero(); n - 1];
        let mut carry = BigInt::zero();
        for i in (1..n).rev() {
            carry = &carry * r + &self.coeffs[i];
            quot[i - 1] = carry.clone();
        }
        let rem = carry * r + &self.coeffs[0];
        rem.is_zero().then(|| IntPolynomial::new(quot))
    }
}

impl fmt::Display for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            let show_coeff = i == 0 || !mag.is_one();
            if show_coeff {
                write!(f, "{mag}")?;
            }
            match i {
                0 => {}
                1 => write!(f, "x")?,
                _ => write!(f, "x^{i}")?,
            }
        }
        Ok(())
    }
}

/// Square integer matrix used by the spectral routines.
pub type IntMatrix = Vec<Vec<BigInt>>;

pub fn int_matrix(rows: &[Vec<i64>]) -> IntMatrix {
    rows.iter()
        .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
        .collect()
}

/// `det(xI - M)` by the division-free Berkowitz recurrence.
pub fn charpoly_int(m: &IntMatrix) -> IntPolynomial {
    let n = m.len();
    assert!(m.iter().all(|r| r.len() == n), "matrix must be square");
    // Coefficients, highest degree first.
    let mut v: Vec<BigInt> = vec![BigInt::one()];
    for r in 0..n {
        // Toeplitz column: 1, -a_rr, -R C, -R A C, ..., -R A^{r-1} C
        let mut col = Vec::with_capacity(r + 2);
        col.push(BigInt::one());
        col.push(-m[r][r].clone());
        let mut w: Vec<BigInt> = (0..r).map(|i| m[i][r].clone()).collect();
        for _ in 0..r {
            let dot: BigInt = (0..r).map(|j| &m[r][j] * &w[j]).sum();
            col.push(-dot);
            w = (0..r)
                .map(|i| (0..r).map(|j| &m[i][j] * &w[j]).sum())
                .collect();
        }
        let next: Vec<BigInt> = (0..r + 2)
            .map(|i| {
                (0..=i.min(r))
                    .filter(|&j| i - j < col.len())
                    .map(|j| &col[i - j] * &v[j])
                    .sum()
            })
            .collect();
        v = next;
    }
    v.reverse();
    IntPolynomial::new(v)
}

/// Integer roots found by [`integer_roots`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegerRoots {
    /// `(root, multiplicity)`, roots strictly decreasing.
    pub roots: Vec<(i64, usize)>,
    /// Cofactor with no integer roots.
    pub remainder: IntPolynomial,
}

fn ceil_root(x: &BigInt, k: u32) -> BigInt {
    let r = x.nth_root(k);
    if r.pow(k) == *x {
        r
    } else {
        r + 1
    }
}

/// Integer roots with multiplicities. Candidates are divisors of the
/// constant term of the deflated polynomial inside the Fujiwara bound.
pub fn integer_roots(p: &IntPolynomial) -> IntegerRoots {
    assert!(!p.is_zero(), "integer_roots of the zero polynomial");
    let mut rest = p.clone();
    let mut roots = Vec::new();
    let zeros = rest.coeffs.iter().take_while(|c| c.is_zero()).count();
    if zeros > 0 {
        rest = IntPolynomial::new(rest.coeffs[zeros..].to_vec());
        roots.push((0i64, zeros));
    }
    let n = rest.degree();
    if n > 0 {
        let lead = rest.coeffs[n].abs();
        // |z| <= 2 max_i |a_{n-i} / a_n|^{1/i}
        let mut bound = BigInt::zero();
        for i in 1..=n {
            let ratio = rest.coeffs[n - i].abs().div_ceil(&lead);
            let b = ceil_root(&ratio, i as u32) * 2;
            if b > bound {
                bound = b;
            }
        }
        let bound = bound.to_i64().unwrap_or(i64::MAX);
        let c0 = rest.coeffs[0].abs();
        let mut r: i64 = 1;
        while r <= bound && BigInt::from(r) <= c0 {
            if (&c0 % BigInt::from(r)).is_zero() {
                for cand in [r, -r] {
                    let big = BigInt::from(cand);
                    let mut mult = 0;
                    while let Some(q) = rest.deflate(&big) {
                        rest = q;
                        mult += 1;
                    }
                    if mult > 0 {
                        roots.push((cand, mult));
                    }
                }
            }
            r += 1;
        }
    }
    roots.sort_by(|a, b| b.0.cmp(&a.0));
    IntegerRoots {
        roots,
        remainder: rest,
    }
}

/// Exact rank of `M - shift I` over the rationals (fraction-free Bareiss elimination).
pub fn rank_rational(m: &IntMatrix, shift: i64) -> usize {
    let n = m.len();
    let mut a: IntMatrix = m.clone();
    let s = BigInt::from(shift);
    for (i, row) in a.iter_mut().enumerate() {
        assert_eq!(row.len(), n, "matrix must be square");
        row[i] -= &s;
    }
    let cols = n;
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..cols {
        if r == n {
            break;
        }
        let Some(p) = (r..n).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let (top, bottom) = a.split_at_mut(r + 1);
        let pivot_row = &top[r];
        let pivot = pivot_row[c].clone();
        for row in bottom.iter_mut() {
            let factor = row[c].clone();
            for j in c + 1..cols {
                let v = &pivot * &row[j] - &factor * &pivot_row[j];
                row[j] = v / &prev;
            }
            row[c] = BigInt::zero();
        }
        prev = pivot;
        r += 1;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::Field;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gf(q: u64) -> Field {
        Field::new(q).unwrap()
    }

    fn mat(f: &Field, rows: &[&[u32]]) -> GfMatrix {
        let rows: Vec<Vec<Elem>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Elem(x)).collect())
            .collect();
        GfMatrix::from_rows(f, rows[0].len(), &rows)
    }

    fn cycle4() -> IntMatrix {
        int_matrix(&[
            vec![0, 1, 0, 1],
            vec![1, 0, 1, 0],
            vec![0, 1, 0, 1],
            vec![1, 0, 1, 0],
        ])
    }

    #[test]
    fn rref_examples() {
        let f2 = gf(2);
        let id = GfMatrix::identity(&f2, 3);
        let r = rref(&id);
        assert_eq!(r.rank, 3);
        assert_eq!(r.reduced, id);
        assert_eq!(rank(&GfMatrix::zeros(&f2, 2, 4)), 0);

        // 1*1 - 2*2 = -3 = 0 mod 3, so the rows are dependent.
        let f3 = gf(3);
        let r = rref(&mat(&f3, &[&[1, 2], &[2, 1]]));
        assert_eq!(r.rank, 1);
        assert_eq!(r.reduced, mat(&f3, &[&[1, 2], &[0, 0]]));
        assert_eq!(r.pivot_cols, vec![0]);
    }

    #[test]
    fn kernel_examples() {
        let f2 = gf(2);
        assert_eq!(kernel(&GfMatrix::identity(&f2, 3)).rows(), 0);
        let k = kernel(&GfMatrix::zeros(&f2, 4, 4));
        assert_eq!(k, GfMatrix::identity(&f2, 4));
        // Alternating matrix with only c = 1: rows (0,0,0,1),(0,0,0,0),(0,0,0,0),(1,0,0,0).
        let a = mat(&f2, &[&[0, 0, 0, 1], &[0, 0, 0, 0], &[0, 0, 0, 0], &[1, 0, 0, 0]]);
        let k = kernel(&a);
        assert_eq!(k.rows(), 2);
        assert_eq!(k, mat(&f2, &[&[0, 1, 0, 0], &[0, 0, 1, 0]]));
    }

    fn random_matrix(f: &Field, rng: &mut ChaCha8Rng) -> GfMatrix {
        let rows = rng.gen_range(1..6);
        let cols = rng.gen_range(1..7);
        let q = f.order();
        let entries: Vec<Vec<Elem>> = (0..rows)
            .map(|_| {
                (0..cols)
                    .map(|_| {
                        // Bias towards zero to get rank-deficient matrices.
                        if rng.gen_bool(0.4) {
                            Elem::ZERO
                        } else {
                            Elem(rng.gen_range(0..q))
                        }
                    })
                    .collect()
            })
            .collect();
        GfMatrix::from_rows(f, cols, &entries)
    }

    #[test]
    fn rank_nullity_and_idempotence() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for q in [2, 3, 4] {
            let f = gf(q);
            for _ in 0..300 {
                let m = random_matrix(&f, &mut rng);
                let r = rref(&m);
                assert_eq!(rref(&r.reduced).reduced, r.reduced);
                let k = kernel(&m);
                assert_eq!(r.rank + k.rows(), m.cols());
                for row in k.row_iter() {
                    assert!(m.apply(row).iter().all(|x| x.is_zero()));
                }
            }
        }
    }

    #[test]
    fn gf_det_matches_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = gf(5);
        for _ in 0..200 {
            let n = rng.gen_range(1..5);
            let rows: Vec<Vec<Elem>> = (0..n)
                .map(|_| (0..n).map(|_| Elem(rng.gen_range(0..2) * rng.gen_range(0..5))).collect())
                .collect();
            let m = GfMatrix::from_rows(&f, n, &rows);
            assert_eq!(det(&m).is_zero(), rank(&m) < n);
        }
        let m = mat(&f, &[&[2, 1], &[1, 1]]);
        assert_eq!(det(&m), Elem(1));
    }

    #[test]
    fn charpoly_examples() {
        assert_eq!(
            charpoly_int(&int_matrix(&[vec![0, 1], vec![1, 0]])),
            IntPolynomial::from_i64(&[-1, 0, 1])
        );
        assert_eq!(charpoly_int(&int_matrix(&[vec![5]])), IntPolynomial::linear(5));
        assert_eq!(charpoly_int(&cycle4()), IntPolynomial::from_i64(&[0, 0, -4, 0, 1]));
        assert_eq!(charpoly_int(&Vec::new()), IntPolynomial::one());
    }

    fn det_cofactor(m: &[Vec<i64>]) -> i64 {
        let n = m.len();
        if n == 0 {
            return 1;
        }
        (0..n)
            .map(|j| {
                let minor: Vec<Vec<i64>> = m[1..]
                    .iter()
                    .map(|r| r.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, &x)| x).collect())
                    .collect();
                let sign = if j % 2 == 0 { 1 } else { -1 };
                sign * m[0][j] * det_cofactor(&minor)
            })
            .sum()
    }

    #[test]
    fn charpoly_matches_cofactor_expansion() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let m: Vec<Vec<i64>> = (0..4)
                .map(|_| (0..4).map(|_| rng.gen_range(-3..=3)).collect())
                .collect();
            let cp = charpoly_int(&int_matrix(&m));
            for t in -4i64..=4 {
                let shifted: Vec<Vec<i64>> = (0..4)
                    .map(|i| (0..4).map(|j| if i == j { t - m[i][j] } else { -m[i][j] }).collect())
                    .collect();
                assert_eq!(cp.eval(&BigInt::from(t)), BigInt::from(det_cofactor(&shifted)));
            }
        }
    }

    #[test]
    fn integer_root_examples() {
        let r = integer_roots(&IntPolynomial::from_i64(&[-1, 0, 1]));
        assert_eq!(r.roots, vec![(1, 1), (-1, 1)]);
        assert_eq!(r.remainder, IntPolynomial::one());

        let r = integer_roots(&IntPolynomial::from_i64(&[0, 0, -4, 0, 1]));
        assert_eq!(r.roots, vec![(2, 1), (0, 2), (-2, 1)]);

        let r = integer_roots(&IntPolynomial::from_i64(&[1, 0, 1]));
        assert!(r.roots.is_empty());
        assert_eq!(r.remainder, IntPolynomial::from_i64(&[1, 0, 1]));

        // (x - 7)(x + 5)^7 (x^2 - 2)
        let mut p = IntPolynomial::linear(7).mul(&IntPolynomial::from_i64(&[-2, 0, 1]));
        for _ in 0..7 {
            p = p.mul(&IntPolynomial::linear(-5));
        }
        let r = integer_roots(&p);
        assert_eq!(r.roots, vec![(7, 1), (-5, 7)]);
        assert_eq!(r.remainder, IntPolynomial::from_i64(&[-2, 0, 1]));
    }

    #[test]
    fn rank_examples() {
        let id = int_matrix(&[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]);
        assert_eq!(rank_rational(&id, 1), 0);
        assert_eq!(rank_rational(&id, 0), 3);
        assert_eq!(rank_rational(&cycle4(), 0), 2);
        assert_eq!(rank_rational(&cycle4(), 2), 3);
        assert_eq!(rank_rational(&cycle4(), 1), 4);
    }

    #[test]
    fn polynomial_helpers() {
        let p = IntPolynomial::from_i64(&[-1, 0, 1]);
        // p(x - 1) = x^2 - 2x
        assert_eq!(p.compose_linear(1, -1), IntPolynomial::from_i64(&[0, -2, 1]));
        assert_eq!(p.to_string(), "x^2 - 1");
        assert_eq!(IntPolynomial::from_i64(&[3, -2, 0, -1]).to_string(), "-x^3 - 2x + 3");
    }
}
