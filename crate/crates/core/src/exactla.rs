//! Exact scalars and dense exact linear algebra.
//!
//! Two fields are supported: the rationals (arbitrary precision, always in
//! lowest terms with positive denominator) and prime fields GF(p) with
//! elements stored as canonical representatives in `[0, p)`. Every operation
//! is exact; recomputing any result yields identical values.
//!
//! Matrices are dense. The elimination used everywhere picks pivots greedily
//! in leftmost-column order, so echelon forms, kernel bases and the
//! complements chosen by [`split_off_iso`] are deterministic.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::{Error, Result};

/// Field descriptor: the rationals or a prime field.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Field {
    Q,
    Fp(u64),
}

impl Field {
    /// Validates the descriptor (primality of p for GF(p)).
    pub fn validate(self) -> Result<()> {
        match self {
            Field::Q => Ok(()),
            Field::Fp(p) => {
                if is_prime_u64(p) {
                    Ok(())
                } else {
                    Err(Error::NotPrime(p))
                }
            }
        }
    }

    pub fn zero(self) -> Scalar {
        match self {
            Field::Q => Scalar::Q(BigRational::zero()),
            Field::Fp(p) => Scalar::Fp { p, v: 0 },
        }
    }

    pub fn one(self) -> Scalar {
        match self {
            Field::Q => Scalar::Q(BigRational::one()),
            Field::Fp(p) => Scalar::Fp { p, v: 1 % p },
        }
    }

    /// The image of an integer in this field.
    pub fn from_i64(self, k: i64) -> Scalar {
        match self {
            Field::Q => Scalar::Q(BigRational::from_integer(BigInt::from(k))),
            Field::Fp(p) => {
                let r = k.rem_euclid(p as i64) as u64;
                Scalar::Fp { p, v: r }
            }
        }
    }

    /// The characteristic (0 for the rationals).
    pub fn characteristic(self) -> u64 {
        match self {
            Field::Q => 0,
            Field::Fp(p) => p,
        }
    }
}

impl std::fmt::Display for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Field::Q => write!(f, "Q"),
            Field::Fp(p) => write!(f, "GF:{}", p),
        }
    }
}

/// Deterministic Miller–Rabin for u64 (the listed bases decide every u64).
fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    acc
}

/// An exact field element, tagged with its field.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Scalar {
    Q(BigRational),
    Fp { p: u64, v: u64 },
}

impl Scalar {
    pub fn field(&self) -> Field {
        match self {
            Scalar::Q(_) => Field::Q,
            Scalar::Fp { p, .. } => Field::Fp(*p),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Q(r) => r.is_zero(),
            Scalar::Fp { v, .. } => *v == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Q(r) => r.is_one(),
            Scalar::Fp { p, v } => *v == 1 % *p,
        }
    }

    fn same_field(&self, other: &Scalar) -> Field {
        let f = self.field();
        assert!(
            f == other.field(),
            "mixed fields in scalar arithmetic: {} vs {}",
            f,
            other.field()
        );
        f
    }

    pub fn add(&self, other: &Scalar) -> Scalar {
        self.same_field(other);
        match (self, other) {
            (Scalar::Q(a), Scalar::Q(b)) => Scalar::Q(a + b),
            (Scalar::Fp { p, v: a }, Scalar::Fp { v: b, .. }) => {
                Scalar::Fp { p: *p, v: (a + b) % p }
            }
            _ => unreachable!(),
        }
    }

    pub fn sub(&self, other: &Scalar) -> Scalar {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Scalar) -> Scalar {
        self.same_field(other);
        match (self, other) {
            (Scalar::Q(a), Scalar::Q(b)) => Scalar::Q(a * b),
            (Scalar::Fp { p, v: a }, Scalar::Fp { v: b, .. }) => {
                Scalar::Fp { p: *p, v: mul_mod(*a, *b, *p) }
            }
            _ => unreachable!(),
        }
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Q(a) => Scalar::Q(-a),
            Scalar::Fp { p, v } => Scalar::Fp { p: *p, v: if *v == 0 { 0 } else { p - v } },
        }
    }

    /// Multiplicative inverse. Panics on zero (callers check).
    pub fn inv(&self) -> Scalar {
        assert!(!self.is_zero(), "inverse of zero");
        match self {
            Scalar::Q(a) => Scalar::Q(a.recip()),
            Scalar::Fp { p, v } => Scalar::Fp { p: *p, v: pow_mod(*v, p - 2, *p) },
        }
    }

    pub fn div(&self, other: &Scalar) -> Scalar {
        self.mul(&other.inv())
    }

    /// Exact rational from a numerator/denominator pair (Q only).
    pub fn ratio(field: Field, num: i64, den: i64) -> Result<Scalar> {
        match field {
            Field::Q => {
                if den == 0 {
                    return Err(Error::InvalidArgument("zero denominator".into()));
                }
                Ok(Scalar::Q(BigRational::new(BigInt::from(num), BigInt::from(den))))
            }
            Field::Fp(_) => {
                let d = field.from_i64(den);
                if d.is_zero() {
                    return Err(Error::InvalidArgument(
                        "denominator vanishes in this field".into(),
                    ));
                }
                Ok(field.from_i64(num).div(&d))
            }
        }
    }
}

impl std::fmt::Display for Scalar {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Scalar::Q(r) => {
                if r.denom().is_one() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            Scalar::Fp { v, .. } => write!(f, "{}", v),
        }
    }
}

/// Dense matrix over one exact field, row-major.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Mat {
    pub field: Field,
    pub rows: usize,
    pub cols: usize,
    entries: Vec<Scalar>,
}

impl Mat {
    pub fn zero(field: Field, rows: usize, cols: usize) -> Mat {
        Mat { field, rows, cols, entries: vec![field.zero(); rows * cols] }
    }

    pub fn identity(field: Field, size: usize) -> Mat {
        let mut m = Mat::zero(field, size, size);
        for i in 0..size {
            m.set(i, i, field.one());
        }
        m
    }

    /// Builds a matrix from rows; all rows must have equal length and all
    /// entries one field.
    pub fn from_rows(field: Field, rows: Vec<Vec<Scalar>>) -> Result<Mat> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.len());
        let mut entries = Vec::with_capacity(height * width);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != width {
                return Err(Error::DimensionMismatch(format!(
                    "row {} has length {}, expected {}",
                    i,
                    row.len(),
                    width
                )));
            }
            for s in row {
                if s.field() != field {
                    return Err(Error::FieldMismatch(format!(
                        "entry of field {} in a {} matrix",
                        s.field(),
                        field
                    )));
                }
                entries.push(s);
            }
        }
        Ok(Mat { field, rows: height, cols: width, entries })
    }

    /// Integer convenience constructor.
    pub fn from_i64(field: Field, rows: &[&[i64]]) -> Mat {
        let data = rows
            .iter()
            .map(|r| r.iter().map(|&k| field.from_i64(k)).collect())
            .collect();
        Mat::from_rows(field, data).expect("uniform integer rows")
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.entries[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Scalar) {
        debug_assert_eq!(v.field(), self.field);
        self.entries[i * self.cols + j] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Scalar::is_zero)
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zero(self.field, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn col(&self, j: usize) -> Vec<Scalar> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    /// Matrix product self · rhs.
    pub fn mul(&self, rhs: &Mat) -> Result<Mat> {
        if self.field != rhs.field {
            return Err(Error::FieldMismatch(format!("{} vs {}", self.field, rhs.field)));
        }
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Mat::zero(self.field, self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = rhs.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let v = out.get(i, j).add(&a.mul(b));
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, rhs: &Mat) -> Result<Mat> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::DimensionMismatch("matrix addition".into()));
        }
        let mut out = self.clone();
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j).add(rhs.get(i, j)));
            }
        }
        Ok(out)
    }

    pub fn sub(&self, rhs: &Mat) -> Result<Mat> {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> Mat {
        let mut out = self.clone();
        for e in &mut out.entries {
            *e = e.neg();
        }
        out
    }

    pub fn scale(&self, c: &Scalar) -> Mat {
        let mut out = self.clone();
        for e in &mut out.entries {
            *e = e.mul(c);
        }
        out
    }

    /// Horizontal concatenation `[self | rhs]`.
    pub fn hstack(&self, rhs: &Mat) -> Result<Mat> {
        if self.rows != rhs.rows {
            return Err(Error::DimensionMismatch("hstack".into()));
        }
        let mut out = Mat::zero(self.field, self.rows, self.cols + rhs.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j).clone());
            }
            for j in 0..rhs.cols {
                out.set(i, self.cols + j, rhs.get(i, j).clone());
            }
        }
        Ok(out)
    }

    /// Vertical concatenation.
    pub fn vstack(&self, rhs: &Mat) -> Result<Mat> {
        if self.cols != rhs.cols {
            return Err(Error::DimensionMismatch("vstack".into()));
        }
        let mut out = Mat::zero(self.field, self.rows + rhs.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j).clone());
            }
        }
        for i in 0..rhs.rows {
            for j in 0..self.cols {
                out.set(self.rows + i, j, rhs.get(i, j).clone());
            }
        }
        Ok(out)
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_cols(field: Field, rows: usize, cols: &[Vec<Scalar>]) -> Mat {
        let mut m = Mat::zero(field, rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), rows, "column length");
            for (i, v) in c.iter().enumerate() {
                m.set(i, j, v.clone());
            }
        }
        m
    }

    /// Submatrix by explicit row/column index lists.
    pub fn submatrix(&self, row_idx: &[usize], col_idx: &[usize]) -> Mat {
        let mut out = Mat::zero(self.field, row_idx.len(), col_idx.len());
        for (i, &r) in row_idx.iter().enumerate() {
            for (j, &c) in col_idx.iter().enumerate() {
                out.set(i, j, self.get(r, c).clone());
            }
        }
        out
    }

    /// Row-reduces in place and returns the pivot columns in leftmost order.
    /// The result is the reduced row echelon form.
    pub fn rref_in_place(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(pr) = (r..self.rows).find(|&i| !self.get(i, c).is_zero()) else {
                continue;
            };
            self.swap_rows(r, pr);
            let inv = self.get(r, c).inv();
            for j in c..self.cols {
                let v = self.get(r, j).mul(&inv);
                self.set(r, j, v);
            }
            for i in 0..self.rows {
                if i != r && !self.get(i, c).is_zero() {
                    let f = self.get(i, c).clone();
                    for j in c..self.cols {
                        let v = self.get(i, j).sub(&f.mul(self.get(r, j)));
                        self.set(i, j, v);
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.entries.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Row rank over the exact field.
    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.rref_in_place().len()
    }

    /// Exact basis of the right null space, as column vectors. Empty iff the
    /// matrix is injective. The basis is the canonical RREF kernel basis (one
    /// vector per free column, unit at the free position), so it is
    /// deterministic.
    pub fn kernel_basis(&self) -> Vec<Vec<Scalar>> {
        let mut m = self.clone();
        let pivots = m.rref_in_place();
        let pivot_set: std::collections::BTreeSet<usize> = pivots.iter().copied().collect();
        let mut basis = Vec::new();
        for fc in 0..self.cols {
            if pivot_set.contains(&fc) {
                continue;
            }
            let mut v = vec![self.field.zero(); self.cols];
            v[fc] = self.field.one();
            for (pi, &pc) in pivots.iter().enumerate() {
                v[pc] = m.get(pi, fc).neg();
            }
            basis.push(v);
        }
        basis
    }

    /// Some exact solution of `self · x = b`, or `None` if inconsistent.
    pub fn solve_linear(&self, b: &[Scalar]) -> Result<Option<Vec<Scalar>>> {
        if b.len() != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "rhs length {} for {} rows",
                b.len(),
                self.rows
            )));
        }
        let rhs = Mat::from_cols(self.field, self.rows, &[b.to_vec()]);
        Ok(self.solve_mat(&rhs)?.map(|m| m.col(0)))
    }

    /// Simultaneous solve: a matrix `X` with `self · X = B`, or `None`.
    pub fn solve_mat(&self, b: &Mat) -> Result<Option<Mat>> {
        if b.rows != self.rows {
            return Err(Error::DimensionMismatch("solve_mat shapes".into()));
        }
        if self.field != b.field {
            return Err(Error::FieldMismatch("solve_mat fields".into()));
        }
        let mut aug = self.hstack(b)?;
        let pivots = aug.rref_in_place();
        // A pivot in the augmented block means inconsistency.
        if pivots.iter().any(|&c| c >= self.cols) {
            return Ok(None);
        }
        let mut x = Mat::zero(self.field, self.cols, b.cols);
        for (pi, &pc) in pivots.iter().enumerate() {
            for j in 0..b.cols {
                x.set(pc, j, aug.get(pi, self.cols + j).clone());
            }
        }
        Ok(Some(x))
    }

    /// Inverse of a square invertible matrix; `None` when singular.
    pub fn inverse(&self) -> Option<Mat> {
        if self.rows != self.cols {
            return None;
        }
        let id = Mat::identity(self.field, self.rows);
        match self.solve_mat(&id) {
            Ok(Some(x)) => {
                // solve_mat guarantees self·x = id only when rank is full.
                if x.rank() == self.rows {
                    Some(x)
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    /// Indices of a maximal independent column set, greedy leftmost.
    pub fn pivot_columns(&self) -> Vec<usize> {
        let mut m = self.clone();
        m.rref_in_place()
    }
}

impl std::fmt::Display for Mat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for i in 0..self.rows {
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}

/// The four bases produced by [`split_off_iso`], each as columns of a matrix.
#[derive(Clone, Debug)]
pub struct SplitIso {
    /// Complement of the kernel in the source; `f` restricted to Y is
    /// injective onto B.
    pub y: Mat,
    /// Kernel basis of `f`.
    pub z: Mat,
    /// Image basis `f(Y)`.
    pub b: Mat,
    /// Complement of the image in the target.
    pub c: Mat,
}

/// Splits `f` into an isomorphism `Y → B` plus kernel `Z` and cokernel
/// complement `C`. Complements are chosen by greedy leftmost pivots: `Y`
/// consists of standard basis vectors at the pivot columns of `f`, and `C`
/// of standard basis vectors extending `B` greedily.
pub fn split_off_iso(f: &Mat) -> SplitIso {
    let field = f.field;
    let pivots = f.pivot_columns();
    let r = pivots.len();

    let mut y = Mat::zero(field, f.cols, r);
    for (k, &c) in pivots.iter().enumerate() {
        y.set(c, k, field.one());
    }

    let z_cols = f.kernel_basis();
    let z = Mat::from_cols(field, f.cols, &z_cols);

    let b = f.submatrix(&(0..f.rows).collect::<Vec<_>>(), &pivots);

    // Extend B by standard vectors, greedily leftmost.
    let ext = b.hstack(&Mat::identity(field, f.rows)).expect("same height");
    let ext_pivots = ext.pivot_columns();
    let c_idx: Vec<usize> = ext_pivots.iter().filter(|&&c| c >= r).map(|&c| c - r).collect();
    let mut c = Mat::zero(field, f.rows, c_idx.len());
    for (k, &i) in c_idx.iter().enumerate() {
        c.set(i, k, field.one());
    }

    SplitIso { y, z, b, c }
}

/// Euler characteristic χ(O(t)) on P^n as an exact integer-valued polynomial,
/// χ(t) = (t+1)(t+2)···(t+n)/n!, valid for every integer t (negative values
/// included).
pub fn chi_line_bundle(n: usize, t: i64) -> i64 {
    let mut num: i128 = 1;
    for k in 1..=n as i64 {
        num *= (t + k) as i128;
    }
    let mut den: i128 = 1;
    for k in 1..=n as i128 {
        den *= k;
    }
    debug_assert_eq!(num % den, 0);
    (num / den) as i64
}

/// binom(a, b) with the convention 0 outside 0 ≤ b ≤ a.
pub fn binomial(a: i64, b: i64) -> u64 {
    if b < 0 || b > a || a < 0 {
        return 0;
    }
    let b = b.min(a - b);
    let mut acc: u128 = 1;
    for k in 0..b {
        acc = acc * (a - k) as u128 / (k + 1) as u128;
    }
    acc as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> Field {
        Field::Q
    }

    #[test]
    fn primality() {
        assert!(Field::Fp(2).validate().is_ok());
        assert!(Field::Fp(7).validate().is_ok());
        assert!(Field::Fp(31991).validate().is_ok());
        assert!(Field::Fp(1).validate().is_err());
        assert!(Field::Fp(91).validate().is_err());
        assert!(Field::Fp(6700417).validate().is_ok());
    }

    #[test]
    fn scalar_canonical_forms() {
        // Rationals in lowest terms with positive denominator.
        let a = Scalar::ratio(q(), 2, -4).unwrap();
        assert_eq!(a, Scalar::ratio(q(), -1, 2).unwrap());
        assert_eq!(format!("{}", a), "-1/2");
        // GF(p) canonical representative.
        let b = Field::Fp(7).from_i64(-1);
        assert_eq!(format!("{}", b), "6");
        assert_eq!(b.add(&Field::Fp(7).one()), Field::Fp(7).zero());
    }

    #[test]
    fn rank_zero_and_identity() {
        assert_eq!(Mat::zero(q(), 3, 3).rank(), 0);
        assert_eq!(Mat::identity(q(), 4).rank(), 4);
    }

    #[test]
    fn rank_vandermonde() {
        // Vandermonde on {1,2,3}: nonzero determinant, so full rank 3.
        let m = Mat::from_i64(q(), &[&[1, 1, 1], &[1, 2, 3], &[1, 4, 9]]);
        assert_eq!(m.rank(), 3);
    }

    #[test]
    fn kernel_identity_empty() {
        assert!(Mat::identity(q(), 3).kernel_basis().is_empty());
    }

    #[test]
    fn kernel_gf2_sum() {
        let f2 = Field::Fp(2);
        let m = Mat::from_i64(f2, &[&[1, 1]]);
        let k = m.kernel_basis();
        assert_eq!(k.len(), 1);
        assert_eq!(k[0], vec![f2.one(), f2.one()]);
    }

    #[test]
    fn kernel_contraction_by_two_form() {
        // Pairing against e0^e2 + e1^e3 as a map from 2-forms (n = 3):
        // a 1x6 matrix over the basis {01,02,03,12,13,23} hitting 02 and 13.
        // Signs irrelevant for the dimension; kernel has dimension 5.
        let m = Mat::from_i64(q(), &[&[0, 1, 0, 0, -1, 0]]);
        assert_eq!(m.kernel_basis().len(), 5);
        assert_eq!(m.rank(), 1);
    }

    #[test]
    fn solve_examples() {
        let id = Mat::identity(q(), 2);
        let b = vec![q().from_i64(5), q().from_i64(-3)];
        assert_eq!(id.solve_linear(&b).unwrap().unwrap(), b);

        let z = Mat::zero(q(), 2, 2);
        assert!(z.solve_linear(&b).unwrap().is_none());

        let m = Mat::from_i64(q(), &[&[1, 1], &[0, 1]]);
        let rhs = vec![q().from_i64(3), q().from_i64(1)];
        let x = m.solve_linear(&rhs).unwrap().unwrap();
        assert_eq!(x, vec![q().from_i64(2), q().from_i64(1)]);
    }

    #[test]
    fn split_identity() {
        let s = split_off_iso(&Mat::identity(q(), 2));
        assert_eq!(s.y.cols, 2);
        assert_eq!(s.z.cols, 0);
        assert_eq!(s.b.cols, 2);
        assert_eq!(s.c.cols, 0);
    }

    #[test]
    fn split_zero() {
        let s = split_off_iso(&Mat::zero(q(), 2, 3));
        assert_eq!(s.y.cols, 0);
        assert_eq!(s.z.cols, 3);
        assert_eq!(s.b.cols, 0);
        assert_eq!(s.c.cols, 2);
    }

    #[test]
    fn split_rank_one() {
        let f = Mat::from_i64(q(), &[&[1, 0], &[0, 0]]);
        let s = split_off_iso(&f);
        assert_eq!(s.y.cols, 1);
        assert_eq!(s.b.cols, 1);
        assert_eq!(s.z.cols, 1);
        assert_eq!(s.c.cols, 1);
    }

    #[test]
    fn split_reassembly_invertible() {
        let f = Mat::from_i64(
            q(),
            &[&[1, 2, 3, 1], &[2, 4, 6, 2], &[0, 1, 1, 0]],
        );
        let s = split_off_iso(&f);
        let src = s.y.hstack(&s.z).unwrap();
        let tgt = s.b.hstack(&s.c).unwrap();
        assert_eq!(src.rank(), f.cols);
        assert_eq!(tgt.rank(), f.rows);
        // f(Y) = B exactly.
        assert_eq!(f.mul(&s.y).unwrap(), s.b);
        // alpha = identity in these bases, i.e. T_tgt^{-1} (f·Y) has the
        // identity in its upper block.
        let alpha = tgt.inverse().unwrap().mul(&f.mul(&s.y).unwrap()).unwrap();
        for i in 0..s.y.cols {
            for j in 0..s.y.cols {
                assert_eq!(alpha.get(i, j).is_one(), i == j);
            }
        }
    }

    #[test]
    fn chi_polynomial_values() {
        // chi(O(t)) on P^2: (t+1)(t+2)/2.
        assert_eq!(chi_line_bundle(2, 0), 1);
        assert_eq!(chi_line_bundle(2, 1), 3);
        assert_eq!(chi_line_bundle(2, -1), 0);
        assert_eq!(chi_line_bundle(2, -2), 0);
        assert_eq!(chi_line_bundle(2, -3), 1);
        assert_eq!(chi_line_bundle(2, -4), 3);
        // h^0 values are chi for t >= 0.
        assert_eq!(chi_line_bundle(3, 2), 10);
        assert_eq!(chi_line_bundle(4, 6), 210);
    }

    #[test]
    fn binomial_conventions() {
        assert_eq!(binomial(4, 2), 6);
        assert_eq!(binomial(4, 0), 1);
        assert_eq!(binomial(4, 5), 0);
        assert_eq!(binomial(4, -1), 0);
        assert_eq!(binomial(-2, 0), 0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_field() -> impl Strategy<Value = Field> {
            prop_oneof![Just(Field::Q), Just(Field::Fp(7)), Just(Field::Fp(2))]
        }

        fn arb_mat(max_dim: usize) -> impl Strategy<Value = Mat> {
            (arb_field(), 1..=max_dim, 1..=max_dim).prop_flat_map(|(f, r, c)| {
                proptest::collection::vec(-4i64..=4, r * c).prop_map(move |vals| {
                    let rows: Vec<Vec<Scalar>> = vals
                        .chunks(c)
                        .map(|ch| ch.iter().map(|&k| f.from_i64(k)).collect())
                        .collect();
                    Mat::from_rows(f, rows).unwrap()
                })
            })
        }

        proptest! {
            #[test]
            fn rank_nullity(m in arb_mat(5)) {
                prop_assert_eq!(m.rank() + m.kernel_basis().len(), m.cols);
            }

            #[test]
            fn rank_transpose(m in arb_mat(5)) {
                prop_assert_eq!(m.rank(), m.transpose().rank());
            }

            #[test]
            fn split_dims(m in arb_mat(5)) {
                let s = split_off_iso(&m);
                let r = m.rank();
                prop_assert_eq!(s.y.cols, r);
                prop_assert_eq!(s.b.cols, r);
                prop_assert_eq!(s.z.cols, m.cols - r);
                prop_assert_eq!(s.c.cols, m.rows - r);
                // Reassembled change-of-basis matrices are invertible.
                prop_assert_eq!(s.y.hstack(&s.z).unwrap().rank(), m.cols);
                prop_assert_eq!(s.b.hstack(&s.c).unwrap().rank(), m.rows);
                // f·Y = B and f·Z = 0, verified by exact multiplication.
                prop_assert_eq!(m.mul(&s.y).unwrap(), s.b);
                prop_assert!(m.mul(&s.z).unwrap().is_zero());
            }

            #[test]
            fn kernel_vectors_annihilate(m in arb_mat(5)) {
                for v in m.kernel_basis() {
                    let col = Mat::from_cols(m.field, m.cols, &[v]);
                    prop_assert!(m.mul(&col).unwrap().is_zero());
                }
            }

            #[test]
            fn solve_consistency(m in arb_mat(4), xs in proptest::collection::vec(-3i64..=3, 1..=4)) {
                // Build b = m·x for a known x, then solve and re-check.
                let x: Vec<Scalar> = (0..m.cols)
                    .map(|j| m.field.from_i64(*xs.get(j % xs.len()).unwrap()))
                    .collect();
                let xm = Mat::from_cols(m.field, m.cols, &[x]);
                let b = m.mul(&xm).unwrap().col(0);
                let sol = m.solve_linear(&b).unwrap().expect("consistent system");
                let sm = Mat::from_cols(m.field, m.cols, &[sol]);
                prop_assert_eq!(m.mul(&sm).unwrap().col(0), b);
            }
        }
    }
}
