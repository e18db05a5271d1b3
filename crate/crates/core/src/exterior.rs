//! Exterior algebra arithmetic over an exact field.
//!
//! Elements of Λ^dV and Λ^dV* where dim V = n+1 with fixed basis e_0..e_n
//! and dual basis x_0..x_n. Monomials e_S (resp. X_S) are encoded as
//! bitmasks over {0..n}; products compute shuffle signs by counting
//! inversions with popcounts.
//!
//! Sign conventions fixed here and used consistently everywhere:
//! * wedge: e_S ∧ e_T = sign(S,T) e_{S∪T}, sign(S,T) = (−1)^{#{(s,t) ∈ S×T : s > t}}.
//! * contraction of Λ•V* by V (the right Λ-module structure): X_S · e_j is
//!   the adjoint of left wedge, ⟨X_S·e_j, e_T⟩ = ⟨X_S, e_j ∧ e_T⟩, giving
//!   X_S · e_j = (−1)^{#{t ∈ S : t < j}} X_{S∖{j}} when j ∈ S, else 0;
//!   contraction by e_T applies the elements of T in ascending order, which
//!   is the unique extension satisfying (η·ω)·ω′ = η·(ω∧ω′).
//! * duality: dual_iso(e_S) = (−1)^{|S|} sign(S∁, S) X_{S∁} under the
//!   trivialization e_{0..n} ↦ 1, so that ⟨dual_iso(ω), ω′⟩ equals
//!   (−1)^{deg ω} times the e_{0..n}-coefficient of ω′ ∧ ω.

use std::collections::BTreeMap;

use num_traits::Signed;

use crate::exactla::{binomial, Field, Mat, Scalar};
use crate::{Error, Result};

/// Which space an element lives in: Λ•V (basis `e`) or Λ•V* (basis `x`).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Variance {
    V,
    VStar,
}

impl Variance {
    pub fn flip(self) -> Variance {
        match self {
            Variance::V => Variance::VStar,
            Variance::VStar => Variance::V,
        }
    }

    fn letter(self) -> char {
        match self {
            Variance::V => 'e',
            Variance::VStar => 'x',
        }
    }
}

/// All d-subsets of {0..n} as bitmasks, in ascending numeric order. This is
/// the canonical basis ordering for Λ^dV and Λ^dV* used by every matrix.
pub fn basis_masks(n: usize, d: usize) -> Vec<u32> {
    let full: u32 = (1u32 << (n + 1)) - 1;
    (0..=full)
        .filter(|m| m.count_ones() as usize == d)
        .collect()
}

/// Shuffle sign of e_S ∧ e_T: 0 when S∩T ≠ ∅, else (−1)^{inversions}.
pub fn shuffle_sign(s: u32, t: u32) -> i32 {
    if s & t != 0 {
        return 0;
    }
    let mut inv = 0u32;
    let mut tt = t;
    while tt != 0 {
        let j = tt.trailing_zeros();
        // Elements of S strictly above j each contribute one inversion.
        inv += (s >> (j + 1)).count_ones();
        tt &= tt - 1;
    }
    if inv % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Homogeneous element of Λ^dV or Λ^dV*, sparse over the monomial basis.
///
/// The degree is tracked even for the zero element; degrees outside
/// [0, n+1] can only carry the zero element.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ExtElement {
    pub n: usize,
    pub field: Field,
    pub variance: Variance,
    pub degree: usize,
    coeffs: BTreeMap<u32, Scalar>,
}

impl ExtElement {
    pub fn zero(n: usize, field: Field, variance: Variance, degree: usize) -> ExtElement {
        ExtElement { n, field, variance, degree, coeffs: BTreeMap::new() }
    }

    /// A scalar as a degree-0 element.
    pub fn scalar(n: usize, field: Field, variance: Variance, c: Scalar) -> ExtElement {
        let mut e = ExtElement::zero(n, field, variance, 0);
        if !c.is_zero() {
            e.coeffs.insert(0, c);
        }
        e
    }

    pub fn one(n: usize, field: Field, variance: Variance) -> ExtElement {
        ExtElement::scalar(n, field, variance, field.one())
    }

    /// The basis monomial for a subset mask, with unit coefficient.
    pub fn monomial(n: usize, field: Field, variance: Variance, mask: u32) -> ExtElement {
        assert!(mask < (1u32 << (n + 1)), "mask out of range for n = {}", n);
        let mut e = ExtElement::zero(n, field, variance, mask.count_ones() as usize);
        e.coeffs.insert(mask, field.one());
        e
    }

    /// Builds an element from (mask, coefficient) terms of one degree.
    pub fn from_terms(
        n: usize,
        field: Field,
        variance: Variance,
        degree: usize,
        terms: impl IntoIterator<Item = (u32, Scalar)>,
    ) -> Result<ExtElement> {
        let mut e = ExtElement::zero(n, field, variance, degree);
        for (mask, c) in terms {
            if mask.count_ones() as usize != degree || mask >= (1u32 << (n + 1)) {
                return Err(Error::InvalidArgument(format!(
                    "mask {:b} is not a {}-subset of 0..={}",
                    mask, degree, n
                )));
            }
            if c.field() != field {
                return Err(Error::FieldMismatch("element coefficient".into()));
            }
            e.accumulate(mask, c);
        }
        Ok(e)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// The coefficient of a monomial (zero when absent).
    pub fn coeff(&self, mask: u32) -> Scalar {
        self.coeffs.get(&mask).cloned().unwrap_or_else(|| self.field.zero())
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, &Scalar)> {
        self.coeffs.iter().map(|(&m, c)| (m, c))
    }

    fn accumulate(&mut self, mask: u32, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match self.coeffs.remove(&mask) {
            None => {
                self.coeffs.insert(mask, c);
            }
            Some(old) => {
                let s = old.add(&c);
                if !s.is_zero() {
                    self.coeffs.insert(mask, s);
                }
            }
        }
    }

    fn check_compatible(&self, rhs: &ExtElement) -> Result<()> {
        if self.variance != rhs.variance {
            return Err(Error::VarianceMismatch("mixed V and V* operands".into()));
        }
        if self.n != rhs.n {
            return Err(Error::DimensionMismatch(format!(
                "ambient n = {} vs {}",
                self.n, rhs.n
            )));
        }
        if self.field != rhs.field {
            return Err(Error::FieldMismatch(format!("{} vs {}", self.field, rhs.field)));
        }
        Ok(())
    }

    pub fn add(&self, rhs: &ExtElement) -> Result<ExtElement> {
        self.check_compatible(rhs)?;
        if self.degree != rhs.degree && !self.is_zero() && !rhs.is_zero() {
            return Err(Error::DimensionMismatch(format!(
                "adding degrees {} and {}",
                self.degree, rhs.degree
            )));
        }
        let mut out = if self.is_zero() && !rhs.is_zero() { rhs.clone() } else { self.clone() };
        if !(self.is_zero() && !rhs.is_zero()) {
            for (m, c) in rhs.terms() {
                out.accumulate(m, c.clone());
            }
        }
        Ok(out)
    }

    pub fn neg(&self) -> ExtElement {
        let mut out = self.clone();
        for c in out.coeffs.values_mut() {
            *c = c.neg();
        }
        out
    }

    pub fn sub(&self, rhs: &ExtElement) -> Result<ExtElement> {
        self.add(&rhs.neg())
    }

    pub fn scale(&self, c: &Scalar) -> ExtElement {
        let mut out = ExtElement::zero(self.n, self.field, self.variance, self.degree);
        if c.is_zero() {
            return out;
        }
        for (m, v) in self.terms() {
            out.accumulate(m, v.mul(c));
        }
        out
    }

    /// Exterior product within one variance.
    pub fn wedge(&self, rhs: &ExtElement) -> Result<ExtElement> {
        self.check_compatible(rhs)?;
        let degree = self.degree + rhs.degree;
        let mut out = ExtElement::zero(self.n, self.field, self.variance, degree);
        for (s, a) in self.terms() {
            for (t, b) in rhs.terms() {
                let sign = shuffle_sign(s, t);
                if sign == 0 {
                    continue;
                }
                let mut c = a.mul(b);
                if sign < 0 {
                    c = c.neg();
                }
                out.accumulate(s | t, c);
            }
        }
        Ok(out)
    }

    /// Contraction of η ∈ Λ^pV* by ω ∈ Λ^qV, the right Λ-module structure
    /// on Λ•V*. Returns an element of Λ^{p−q}V* (zero when q > p).
    pub fn contract(&self, omega: &ExtElement) -> Result<ExtElement> {
        if self.variance != Variance::VStar || omega.variance != Variance::V {
            return Err(Error::VarianceMismatch(
                "contract expects a V* element acted on by a V element".into(),
            ));
        }
        if self.n != omega.n {
            return Err(Error::DimensionMismatch("contract ambient n".into()));
        }
        if self.field != omega.field {
            return Err(Error::FieldMismatch("contract fields".into()));
        }
        let degree = self.degree.saturating_sub(omega.degree);
        let mut out = ExtElement::zero(self.n, self.field, Variance::VStar, degree);
        if omega.degree > self.degree {
            return Ok(out);
        }
        for (t, b) in omega.terms() {
            for (s, a) in self.terms() {
                if t & !s != 0 {
                    continue;
                }
                // Contract the elements of t out of s in ascending order.
                let mut mask = s;
                let mut sign = 1i32;
                let mut tt = t;
                while tt != 0 {
                    let j = tt.trailing_zeros();
                    if (mask >> j) & 1 == 0 {
                        sign = 0;
                        break;
                    }
                    if (mask & ((1u32 << j) - 1)).count_ones() % 2 == 1 {
                        sign = -sign;
                    }
                    mask &= !(1u32 << j);
                    tt &= tt - 1;
                }
                if sign == 0 {
                    continue;
                }
                let mut c = a.mul(b);
                if sign < 0 {
                    c = c.neg();
                }
                out.accumulate(mask, c);
            }
        }
        Ok(out)
    }

    /// The perfect pairing ⟨η, ω⟩ for η ∈ Λ^pV*, ω ∈ Λ^pV (⟨X_S, e_T⟩ = δ).
    pub fn pairing(&self, omega: &ExtElement) -> Result<Scalar> {
        let c = self.contract(omega)?;
        if self.degree != omega.degree {
            return Ok(self.field.zero());
        }
        Ok(c.coeff(0))
    }

    /// Duality Λ^pV ≅ Λ^{n+1−p}V* (and symmetrically Λ^pV* ≅ Λ^{n+1−p}V)
    /// under the trivializations e_{0..n} ↦ 1 and X_{0..n} ↦ 1:
    /// e_S ↦ (−1)^{|S|} sign(S∁, S) X_{S∁}.
    pub fn dual_iso(&self) -> ExtElement {
        let full: u32 = (1u32 << (self.n + 1)) - 1;
        let degree = self.n + 1 - self.degree.min(self.n + 1);
        let mut out = ExtElement::zero(self.n, self.field, self.variance.flip(), degree);
        for (s, a) in self.terms() {
            let comp = full & !s;
            let mut sign = shuffle_sign(comp, s);
            if s.count_ones() % 2 == 1 {
                sign = -sign;
            }
            let c = if sign < 0 { a.neg() } else { a.clone() };
            out.accumulate(comp, c);
        }
        out
    }

    /// The i-th divided power of a 2-form: the sum over unordered i-subsets
    /// of the stored terms of their wedge. Integral, so valid in every
    /// characteristic; over ℚ it equals α^{∧i}/i!.
    pub fn divided_power(&self, i: usize) -> Result<ExtElement> {
        if self.degree != 2 {
            return Err(Error::InvalidArgument(format!(
                "divided power of a degree-{} element",
                self.degree
            )));
        }
        let terms: Vec<(u32, Scalar)> =
            self.terms().map(|(m, c)| (m, c.clone())).collect();
        let mut out = ExtElement::zero(self.n, self.field, self.variance, 2 * i);
        // Depth-first enumeration of i-subsets of terms; 2-form factors
        // commute, so each subset contributes once, with the product of the
        // pairwise shuffle signs picked up while the monomial is assembled.
        fn walk(
            terms: &[(u32, Scalar)],
            start: usize,
            left: usize,
            mask: u32,
            coeff: Scalar,
            out: &mut ExtElement,
        ) {
            if left == 0 {
                out.accumulate(mask, coeff);
                return;
            }
            for k in start..terms.len() {
                let (m, c) = &terms[k];
                let sign = shuffle_sign(mask, *m);
                if sign == 0 {
                    continue;
                }
                let mut next = coeff.mul(c);
                if sign < 0 {
                    next = next.neg();
                }
                walk(terms, k + 1, left - 1, mask | m, next, out);
            }
        }
        walk(&terms, 0, i, 0, self.field.one(), &mut out);
        Ok(out)
    }

    /// Coordinates in the canonical monomial basis of (variance, degree).
    pub fn to_vec(&self) -> Vec<Scalar> {
        basis_masks(self.n, self.degree)
            .into_iter()
            .map(|m| self.coeff(m))
            .collect()
    }

    /// Element from canonical-basis coordinates.
    pub fn from_vec(
        n: usize,
        field: Field,
        variance: Variance,
        degree: usize,
        v: &[Scalar],
    ) -> ExtElement {
        let masks = basis_masks(n, degree);
        assert_eq!(masks.len(), v.len(), "coordinate length");
        let mut e = ExtElement::zero(n, field, variance, degree);
        for (m, c) in masks.into_iter().zip(v.iter()) {
            e.accumulate(m, c.clone());
        }
        e
    }
}

/// The matrix of a linear map given on monomials of one degree, columns are
/// images of the canonical source basis in the canonical target basis.
pub fn map_matrix(
    n: usize,
    field: Field,
    source: (Variance, usize),
    target: (Variance, usize),
    f: impl Fn(&ExtElement) -> Result<ExtElement>,
) -> Result<Mat> {
    let src = basis_masks(n, source.1);
    let tgt_dim = binomial((n + 1) as i64, target.1 as i64) as usize;
    let mut cols = Vec::with_capacity(src.len());
    for m in src {
        let img = f(&ExtElement::monomial(n, field, source.0, m))?;
        if img.degree != target.1 && !img.is_zero() {
            return Err(Error::DimensionMismatch(format!(
                "image degree {} expected {}",
                img.degree, target.1
            )));
        }
        let v = if img.is_zero() {
            vec![field.zero(); tgt_dim]
        } else {
            img.to_vec()
        };
        cols.push(v);
    }
    Ok(Mat::from_cols(field, tgt_dim, &cols))
}

/// α = Σ_{i<m} e_i ∧ e_{m+i} ∈ Λ²V for n = 2m−1.
pub fn standard_alpha(m: usize, field: Field) -> ExtElement {
    let n = 2 * m - 1;
    let mut a = ExtElement::zero(n, field, Variance::V, 2);
    for i in 0..m {
        let mask = (1u32 << i) | (1u32 << (m + i));
        a.accumulate(mask, field.one());
    }
    a
}

/// β = Σ_{i<m} x_i ∧ x_{m+i} ∈ Λ²V* for n = 2m−1.
pub fn standard_beta(m: usize, field: Field) -> ExtElement {
    let mut b = standard_alpha(m, field);
    b.variance = Variance::VStar;
    b
}

/// The operators A = −·α, B = β∧− and C = AB − BA on Λ•V*, stored as one
/// matrix per exterior degree p = 0..n+1 in the canonical monomial bases.
#[derive(Clone, Debug)]
pub struct Sl2Triple {
    pub m: usize,
    pub n: usize,
    pub field: Field,
    /// a[p]: Λ^pV* → Λ^{p−2}V* (contraction by α).
    pub a: Vec<Mat>,
    /// b[p]: Λ^pV* → Λ^{p+2}V* (wedge by β).
    pub b: Vec<Mat>,
    /// c[p]: Λ^pV* → Λ^pV*.
    pub c: Vec<Mat>,
}

impl Sl2Triple {
    pub fn new(m: usize, alpha: &ExtElement, beta: &ExtElement) -> Result<Sl2Triple> {
        if m == 0 {
            return Err(Error::InvalidArgument("m must be positive".into()));
        }
        let n = 2 * m - 1;
        if alpha.n != n || beta.n != n {
            return Err(Error::InvalidArgument(format!(
                "operators need ambient n = 2m−1 = {}, got {} and {}",
                n, alpha.n, beta.n
            )));
        }
        if alpha.variance != Variance::V || beta.variance != Variance::VStar {
            return Err(Error::VarianceMismatch("need α ∈ Λ²V and β ∈ Λ²V*".into()));
        }
        if alpha.degree != 2 || beta.degree != 2 {
            return Err(Error::InvalidArgument("α and β must be 2-forms".into()));
        }
        let field = alpha.field;
        let dim = |p: i64| binomial((n + 1) as i64, p) as usize;
        let mut a = Vec::new();
        let mut b = Vec::new();
        for p in 0..=(n + 1) as i64 {
            let ap = if p >= 2 {
                map_matrix(
                    n,
                    field,
                    (Variance::VStar, p as usize),
                    (Variance::VStar, (p - 2) as usize),
                    |eta| eta.contract(alpha),
                )?
            } else {
                Mat::zero(field, dim(p - 2), dim(p))
            };
            a.push(ap);
            let bp = if p + 2 <= (n + 1) as i64 {
                map_matrix(
                    n,
                    field,
                    (Variance::VStar, p as usize),
                    (Variance::VStar, (p + 2) as usize),
                    |eta| beta.wedge(eta),
                )?
            } else {
                Mat::zero(field, 0, dim(p))
            };
            b.push(bp);
        }
        let mut c = Vec::new();
        for p in 0..=n + 1 {
            // C_p = A_{p+2}·B_p − B_{p−2}·A_p, with out-of-range factors zero.
            let ab = if p + 2 <= n + 1 {
                a[p + 2].mul(&b[p])?
            } else {
                Mat::zero(field, dim(p as i64), dim(p as i64))
            };
            let ba = if p >= 2 {
                b[p - 2].mul(&a[p])?
            } else {
                Mat::zero(field, dim(p as i64), dim(p as i64))
            };
            c.push(ab.sub(&ba)?);
        }
        Ok(Sl2Triple { m, n, field, a, b, c })
    }
}

/// Outcome of the sl₂ identity checks; a report, not an assertion.
#[derive(Clone, Debug)]
pub struct Sl2Report {
    pub passed: bool,
    pub identities_checked: usize,
    pub failures: Vec<String>,
}

/// Verifies Cη = (m−p)η on every monomial of Λ^pV* for all p, the
/// commutation rules [C,A] = 2A and [C,B] = −2B, and in characteristic 0
/// that A^i: Λ^{m+i}V* → Λ^{m−i}V* is an isomorphism for 0 ≤ i ≤ m.
pub fn sl2_check(m: usize, alpha: &ExtElement, beta: &ExtElement) -> Result<Sl2Report> {
    let triple = Sl2Triple::new(m, alpha, beta)?;
    let n = triple.n;
    let field = triple.field;
    let mut failures = Vec::new();
    let mut checked = 0usize;

    for p in 0..=n + 1 {
        let want = Mat::identity(field, triple.c[p].rows)
            .scale(&field.from_i64(m as i64 - p as i64));
        checked += 1;
        if triple.c[p] != want {
            failures.push(format!("C ≠ (m−p)·id on Λ^{}V*", p));
        }
    }

    let dim = |p: i64| binomial((n + 1) as i64, p) as usize;
    for p in 0..=n + 1 {
        // [C,A] on Λ^p lands in Λ^{p−2}; compare with 2A there.
        let ca = if p >= 2 {
            triple.c[p - 2].mul(&triple.a[p])?
        } else {
            Mat::zero(field, dim(p as i64 - 2), dim(p as i64))
        };
        let ac = triple.a[p].mul(&triple.c[p])?;
        checked += 1;
        if ca.sub(&ac)? != triple.a[p].scale(&field.from_i64(2)) {
            failures.push(format!("[C,A] ≠ 2A on Λ^{}V*", p));
        }
        let cb = if p + 2 <= n + 1 {
            triple.c[p + 2].mul(&triple.b[p])?
        } else {
            Mat::zero(field, 0, dim(p as i64))
        };
        let bc = triple.b[p].mul(&triple.c[p])?;
        checked += 1;
        if cb.sub(&bc)? != triple.b[p].scale(&field.from_i64(-2)) {
            failures.push(format!("[C,B] ≠ −2B on Λ^{}V*", p));
        }
    }

    if field == Field::Q {
        for i in 0..=m {
            // A^i from Λ^{m+i} down to Λ^{m−i}.
            let mut acc = Mat::identity(field, dim((m + i) as i64));
            let mut p = m + i;
            for _ in 0..i {
                acc = triple.a[p].mul(&acc)?;
                p -= 2;
            }
            checked += 1;
            if acc.rows != acc.cols || acc.rank() != acc.rows {
                failures.push(format!(
                    "A^{} : Λ^{}V* → Λ^{}V* is not an isomorphism",
                    i,
                    m + i,
                    m - i
                ));
            }
        }
    }

    Ok(Sl2Report { passed: failures.is_empty(), identities_checked: checked, failures })
}

impl std::fmt::Display for ExtElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (mask, c) in self.terms() {
            let neg = match c {
                Scalar::Q(r) => r.is_negative(),
                _ => false,
            };
            let mag = if neg { c.neg() } else { c.clone() };
            if first {
                if neg {
                    write!(f, "-")?;
                }
                first = false;
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let indices: Vec<String> = (0..=self.n as u32)
                .filter(|i| (mask >> i) & 1 == 1)
                .map(|i| i.to_string())
                .collect();
            if mask == 0 {
                write!(f, "{}", mag)?;
            } else if mag.is_one() {
                write!(f, "{}[{}]", self.variance.letter(), indices.join(","))?;
            } else {
                write!(f, "{}*{}[{}]", mag, self.variance.letter(), indices.join(","))?;
            }
        }
        Ok(())
    }
}

/// Parses the element grammar: signed sums of `c*e[i,...]` (Λ•V) or
/// `c*x[i,...]` (Λ•V*), with `c` an integer or `a/b` ratio; a bare constant
/// is a degree-0 element and `e[]` is the unit. All terms must share one
/// variance and one degree.
pub fn parse_element(src: &str, n: usize, field: Field) -> Result<ExtElement> {
    let mut p = Parser { chars: src.chars().collect(), pos: 0 };
    let e = p.element(n, field)?;
    p.skip_ws();
    if p.pos != p.chars.len() {
        return Err(p.err("trailing input"));
    }
    Ok(e)
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn err(&self, msg: &str) -> Error {
        Error::InvalidArgument(format!("element syntax at column {}: {}", self.pos + 1, msg))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        self.skip_ws();
        let c = self.chars.get(self.pos).copied();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn integer(&mut self) -> Result<i64> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err("expected a number"));
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        s.parse::<i64>().map_err(|_| self.err("number out of range"))
    }

    fn element(&mut self, n: usize, field: Field) -> Result<ExtElement> {
        let mut terms: Vec<(Scalar, Option<(Variance, u32)>)> = Vec::new();
        loop {
            let mut sign = 1i64;
            while let Some(c) = self.peek() {
                match c {
                    '+' => {
                        self.bump();
                    }
                    '-' => {
                        self.bump();
                        sign = -sign;
                    }
                    _ => break,
                }
            }
            let (coeff, basis) = self.term(n, field)?;
            let coeff = if sign < 0 { coeff.neg() } else { coeff };
            terms.push((coeff, basis));
            match self.peek() {
                Some('+') | Some('-') => continue,
                None => break,
                Some(_) => return Err(self.err("expected '+', '-' or end")),
            }
        }

        let variance = terms
            .iter()
            .filter_map(|(_, b)| b.map(|(v, _)| v))
            .next()
            .unwrap_or(Variance::V);
        if terms
            .iter()
            .filter_map(|(_, b)| b.map(|(v, _)| v))
            .any(|v| v != variance)
        {
            return Err(Error::VarianceMismatch("mixed e[...] and x[...] terms".into()));
        }

        let mut degree: Option<usize> = None;
        let mut pairs: Vec<(u32, Scalar)> = Vec::new();
        for (c, b) in terms {
            let mask = b.map(|(_, m)| m).unwrap_or(0);
            let d = mask.count_ones() as usize;
            if c.is_zero() {
                continue;
            }
            match degree {
                None => degree = Some(d),
                Some(d0) if d0 != d => {
                    return Err(Error::InvalidArgument(format!(
                        "mixed degrees {} and {} in one element",
                        d0, d
                    )))
                }
                _ => {}
            }
            pairs.push((mask, c));
        }
        ExtElement::from_terms(n, field, variance, degree.unwrap_or(0), pairs)
    }

    fn term(&mut self, n: usize, field: Field) -> Result<(Scalar, Option<(Variance, u32)>)> {
        let c = self.peek().ok_or_else(|| self.err("empty term"))?;
        if c.is_ascii_digit() {
            let num = self.integer()?;
            let mut coeff = field.from_i64(num);
            if self.peek() == Some('/') {
                self.bump();
                let den = self.integer()?;
                coeff = Scalar::ratio(field, num, den)?;
            }
            if self.peek() == Some('*') {
                self.bump();
                let basis = self.basis(n)?;
                return Ok((coeff, Some(basis)));
            }
            return Ok((coeff, None));
        }
        if c == 'e' || c == 'x' {
            let basis = self.basis(n)?;
            return Ok((field.one(), Some(basis)));
        }
        Err(self.err("expected a coefficient or e[...]/x[...]"))
    }

    fn basis(&mut self, n: usize) -> Result<(Variance, u32)> {
        let variance = match self.bump() {
            Some('e') => Variance::V,
            Some('x') => Variance::VStar,
            _ => return Err(self.err("expected e or x")),
        };
        if self.bump() != Some('[') {
            return Err(self.err("expected '['"));
        }
        let mut mask = 0u32;
        if self.peek() == Some(']') {
            self.bump();
            return Ok((variance, mask));
        }
        loop {
            let idx = self.integer()?;
            if idx < 0 || idx as usize > n {
                return Err(self.err(&format!("index {} out of range 0..={}", idx, n)));
            }
            let bit = 1u32 << idx;
            if mask & bit != 0 {
                return Err(self.err(&format!("repeated index {}", idx)));
            }
            mask |= bit;
            match self.bump() {
                Some(',') => continue,
                Some(']') => break,
                _ => return Err(self.err("expected ',' or ']'")),
            }
        }
        Ok((variance, mask))
    }
}
