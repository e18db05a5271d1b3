//! The adjoint functors between Λ-modules and complexes of line-bundle
//! sums, and the cohomology bookkeeping built on them.
//!
//! L sends a graded Λ-module N to the complex with terms N_p ⊗ O(p) and
//! differential x⊗f ↦ Σ_v (x·e_v)⊗(x_v f); applied to a complex it yields
//! the total complex with vertical blocks (the degree-wise evaluations of
//! the Λ-differential) multiplied by (−1)^q in module degree q. R sends a
//! finite graded S-module M to the free complex with terms M_p ⊗ Λ∨(p)
//! and entries Σ_v μ_v[i,j]·e_v.
//!
//! Global sections are taken degree-wise: O(m) contributes the space of
//! degree-(d+m) polynomials, differentials become multiplication matrices.

use std::collections::BTreeMap;

use crate::exactla::{binomial, chi_line_bundle, Field, Mat, Scalar};
use crate::exterior::ExtElement;
use crate::lamcomplex::{is_ht, ComplexReport, DegComplex, FreeComplex};
use crate::lammod::{free_to_graded, FreeModule, GradedLambdaModule, ModMorphism};
use crate::{Error, Result};

/// A homogeneous polynomial in n+1 variables, stored sparsely by exponent
/// vector. Zero polynomials keep a nominal degree for shape checks.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SPoly {
    pub n: usize,
    pub field: Field,
    pub degree: usize,
    terms: BTreeMap<Vec<u32>, Scalar>,
}

/// All exponent vectors of total degree d in nvars variables, in a fixed
/// lexicographic order (first exponent descending).
pub fn monomials(nvars: usize, d: usize) -> Vec<Vec<u32>> {
    fn walk(nvars: usize, d: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if nvars == 1 {
            prefix.push(d);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for e in (0..=d).rev() {
            prefix.push(e);
            walk(nvars - 1, d - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    walk(nvars, d as u32, &mut Vec::new(), &mut out);
    out
}

impl SPoly {
    pub fn zero(n: usize, field: Field, degree: usize) -> SPoly {
        SPoly { n, field, degree, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, field: Field, c: Scalar) -> SPoly {
        let mut p = SPoly::zero(n, field, 0);
        if !c.is_zero() {
            p.terms.insert(vec![0; n + 1], c);
        }
        p
    }

    pub fn variable(n: usize, field: Field, v: usize) -> SPoly {
        let mut expo = vec![0u32; n + 1];
        expo[v] = 1;
        let mut p = SPoly::zero(n, field, 1);
        p.terms.insert(expo, field.one());
        p
    }

    /// Σ coeffs[v]·x_v.
    pub fn from_linear(n: usize, field: Field, coeffs: &[Scalar]) -> SPoly {
        let mut p = SPoly::zero(n, field, 1);
        for (v, c) in coeffs.iter().enumerate() {
            if !c.is_zero() {
                let mut expo = vec![0u32; n + 1];
                expo[v] = 1;
                p.terms.insert(expo, c.clone());
            }
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, expo: &[u32]) -> Scalar {
        self.terms.get(expo).cloned().unwrap_or_else(|| self.field.zero())
    }

    /// The constant value for degree-0 polynomials.
    pub fn constant_value(&self) -> Option<Scalar> {
        if self.degree != 0 {
            return None;
        }
        Some(self.coeff(&vec![0; self.n + 1]))
    }

    pub fn add(&self, rhs: &SPoly) -> Result<SPoly> {
        if self.degree != rhs.degree && !self.is_zero() && !rhs.is_zero() {
            return Err(Error::DimensionMismatch(
                "adding polynomials of different degrees".into(),
            ));
        }
        let mut out = self.clone();
        if out.is_zero() {
            out.degree = rhs.degree.max(out.degree);
        }
        for (e, c) in &rhs.terms {
            let v = out.coeff(e).add(c);
            if v.is_zero() {
                out.terms.remove(e);
            } else {
                out.terms.insert(e.clone(), v);
            }
        }
        Ok(out)
    }

    pub fn neg(&self) -> SPoly {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = c.neg();
        }
        out
    }

    pub fn sub(&self, rhs: &SPoly) -> Result<SPoly> {
        self.add(&rhs.neg())
    }

    pub fn scale(&self, c: &Scalar) -> SPoly {
        if c.is_zero() {
            return SPoly::zero(self.n, self.field, self.degree);
        }
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v = v.mul(c);
        }
        out
    }

    pub fn mul(&self, rhs: &SPoly) -> SPoly {
        let mut out = SPoly::zero(self.n, self.field, self.degree + rhs.degree);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                let expo: Vec<u32> =
                    e1.iter().zip(e2.iter()).map(|(a, b)| a + b).collect();
                let v = out.coeff(&expo).add(&c1.mul(c2));
                if v.is_zero() {
                    out.terms.remove(&expo);
                } else {
                    out.terms.insert(expo, v);
                }
            }
        }
        out
    }

    /// The matrix of multiplication by self from degree-e forms to
    /// degree-(e + self.degree) forms, in the [`monomials`] bases.
    pub fn mult_matrix(&self, e: usize) -> Mat {
        let src = monomials(self.n + 1, e);
        let tgt = monomials(self.n + 1, e + self.degree);
        let index: BTreeMap<&Vec<u32>, usize> =
            tgt.iter().enumerate().map(|(i, m)| (m, i)).collect();
        let mut out = Mat::zero(self.field, tgt.len(), src.len());
        for (j, m) in src.iter().enumerate() {
            for (expo, c) in &self.terms {
                let prod: Vec<u32> =
                    m.iter().zip(expo.iter()).map(|(a, b)| a + b).collect();
                let i = index[&prod];
                let v = out.get(i, j).add(c);
                out.set(i, j, v);
            }
        }
        out
    }
}

impl std::fmt::Display for SPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (expo, c) in &self.terms {
            let s = format!("{}", c);
            if first {
                write!(f, "{}", s)?;
                first = false;
            } else if let Some(rest) = s.strip_prefix('-') {
                write!(f, " - {}", rest)?;
            } else {
                write!(f, " + {}", s)?;
            }
            for (v, &e) in expo.iter().enumerate() {
                if e == 1 {
                    write!(f, "*x{}", v)?;
                } else if e > 1 {
                    write!(f, "*x{}^{}", v, e)?;
                }
            }
        }
        Ok(())
    }
}

/// One line-bundle summand O(twist) with the position of the Λ-side term
/// it came from.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct STwist {
    pub twist: i64,
    pub origin: i64,
}

/// A bounded complex of line-bundle sums with polynomial differentials.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SComplex {
    pub n: usize,
    pub field: Field,
    terms: BTreeMap<i64, Vec<STwist>>,
    diffs: BTreeMap<i64, Vec<Vec<SPoly>>>,
}

impl SComplex {
    /// Builds a complex, validating entry degrees against twist gaps and
    /// normalizing zero entries; d∘d = 0 is checked by
    /// [`verify_s_complex`].
    pub fn new(
        n: usize,
        field: Field,
        terms: BTreeMap<i64, Vec<STwist>>,
        diffs: BTreeMap<i64, Vec<Vec<SPoly>>>,
    ) -> Result<SComplex> {
        let terms: BTreeMap<i64, Vec<STwist>> =
            terms.into_iter().filter(|(_, t)| !t.is_empty()).collect();
        let mut kept = BTreeMap::new();
        for (s, mut m) in diffs {
            let (Some(src), Some(tgt)) = (terms.get(&s), terms.get(&(s + 1))) else {
                if m.iter().flatten().all(SPoly::is_zero) {
                    continue;
                }
                return Err(Error::DimensionMismatch(format!(
                    "differential at position {} without matching terms",
                    s
                )));
            };
            if m.len() != tgt.len() || m.iter().any(|row| row.len() != src.len()) {
                return Err(Error::DimensionMismatch(format!(
                    "differential at position {} has wrong shape",
                    s
                )));
            }
            let mut any = false;
            for (i, row) in m.iter_mut().enumerate() {
                for (j, e) in row.iter_mut().enumerate() {
                    let gap = tgt[i].twist - src[j].twist;
                    if e.is_zero() {
                        *e = SPoly::zero(n, field, gap.max(0) as usize);
                        continue;
                    }
                    any = true;
                    if gap < 0 || e.degree as i64 != gap {
                        return Err(Error::DimensionMismatch(format!(
                            "entry ({}, {}) at position {} has degree {}, twist gap {}",
                            i, j, s, e.degree, gap
                        )));
                    }
                }
            }
            if any {
                kept.insert(s, m);
            }
        }
        Ok(SComplex { n, field, terms, diffs: kept })
    }

    pub fn positions(&self) -> Vec<i64> {
        self.terms.keys().copied().collect()
    }

    pub fn term(&self, s: i64) -> &[STwist] {
        self.terms.get(&s).map_or(&[], |v| v.as_slice())
    }

    pub fn rank(&self, s: i64) -> usize {
        self.term(s).len()
    }

    /// The differential matrix at position s, materialized with zero
    /// entries when absent.
    pub fn diff(&self, s: i64) -> Vec<Vec<SPoly>> {
        if let Some(m) = self.diffs.get(&s) {
            return m.clone();
        }
        let src = self.term(s);
        let tgt = self.term(s + 1);
        tgt.iter()
            .map(|r| {
                src.iter()
                    .map(|c| {
                        SPoly::zero(self.n, self.field, (r.twist - c.twist).max(0) as usize)
                    })
                    .collect()
            })
            .collect()
    }

    pub fn min_twist(&self) -> Option<i64> {
        self.terms.values().flatten().map(|t| t.twist).min()
    }

    /// The brutal truncation keeping positions s ≥ 0.
    pub fn sigma_geq0(&self) -> SComplex {
        let terms: BTreeMap<i64, Vec<STwist>> = self
            .terms
            .iter()
            .filter(|(&s, _)| s >= 0)
            .map(|(&s, t)| (s, t.clone()))
            .collect();
        let diffs: BTreeMap<i64, Vec<Vec<SPoly>>> = self
            .diffs
            .iter()
            .filter(|(&s, _)| s >= 0)
            .map(|(&s, m)| (s, m.clone()))
            .collect();
        SComplex { n: self.n, field: self.field, terms, diffs }
    }
}

/// Checks d∘d = 0 as exact polynomial matrices.
pub fn verify_s_complex(complex: &SComplex) -> ComplexReport {
    let mut failures = Vec::new();
    for &s in complex.terms.keys() {
        if !complex.terms.contains_key(&(s + 1)) || !complex.terms.contains_key(&(s + 2))
        {
            continue;
        }
        let first = complex.diff(s);
        let second = complex.diff(s + 1);
        for i in 0..complex.rank(s + 2) {
            for j in 0..complex.rank(s) {
                let mut acc = SPoly::zero(
                    complex.n,
                    complex.field,
                    (complex.term(s + 2)[i].twist - complex.term(s)[j].twist).max(0)
                        as usize,
                );
                for t in 0..complex.rank(s + 1) {
                    let prod = second[i][t].mul(&first[t][j]);
                    if !prod.is_zero() {
                        acc = acc.add(&prod).expect("typed entries compose");
                    }
                }
                if !acc.is_zero() {
                    failures.push(format!(
                        "d² ≠ 0 at position {}: entry ({}, {}) is {}",
                        s, i, j, acc
                    ));
                }
            }
        }
    }
    ComplexReport { passed: failures.is_empty(), failures }
}

/// A degree-wise complex wrapper around a free complex (no truncation).
fn full_deg_complex(complex: &FreeComplex) -> DegComplex {
    let n = complex.n;
    let field = complex.field;
    let mut terms = BTreeMap::new();
    let mut diffs: BTreeMap<i64, BTreeMap<i64, Mat>> = BTreeMap::new();
    for &p in &complex.positions() {
        let graded = free_to_graded(&complex.term(p));
        if graded.total_dimension() > 0 {
            terms.insert(p, graded);
        }
    }
    for &p in &complex.positions() {
        let f = complex.diff(p);
        if f.is_zero() {
            continue;
        }
        let mut per = BTreeMap::new();
        if let Some(src) = terms.get(&p) {
            for &d in &src.support() {
                let block = f.evaluate_degree(d);
                if block.rows > 0 && block.cols > 0 {
                    per.insert(d, block);
                }
            }
        }
        if !per.is_empty() {
            diffs.insert(p, per);
        }
    }
    DegComplex::new(n, field, terms, diffs).expect("free complex shapes are consistent")
}

/// L of a degree-wise complex: the total complex with terms
/// ⊕_p K^p_{s−p} ⊗ O(s−p), horizontal entries Σ ρ_v[i,j]·x_v and vertical
/// blocks (−1)^q · (degree-q block of d_K).
pub fn l_of_deg_complex(complex: &DegComplex) -> SComplex {
    let n = complex.n;
    let field = complex.field;
    // Offsets of the (p, q) block inside term s = p + q.
    let mut terms: BTreeMap<i64, Vec<STwist>> = BTreeMap::new();
    let mut offsets: BTreeMap<(i64, i64), usize> = BTreeMap::new();
    for &p in &complex.positions() {
        let module = complex.term(p).expect("listed position");
        for &q in &module.support() {
            let s = p + q;
            let entry = terms.entry(s).or_default();
            offsets.insert((p, q), entry.len());
            entry.extend(std::iter::repeat(STwist { twist: q, origin: p }).take(
                module.dim(q),
            ));
        }
    }
    let mut diffs: BTreeMap<i64, Vec<Vec<SPoly>>> = BTreeMap::new();
    let zero_matrix = |s: i64, terms: &BTreeMap<i64, Vec<STwist>>| -> Vec<Vec<SPoly>> {
        let src = &terms[&s];
        let tgt = &terms[&(s + 1)];
        tgt.iter()
            .map(|r| {
                src.iter()
                    .map(|c| SPoly::zero(n, field, (r.twist - c.twist).max(0) as usize))
                    .collect()
            })
            .collect()
    };
    for &p in &complex.positions() {
        let module = complex.term(p).expect("listed position");
        for &q in &module.support() {
            let s = p + q;
            if !terms.contains_key(&(s + 1)) {
                continue;
            }
            let src_off = offsets[&(p, q)];
            let dim_q = module.dim(q);

            // Horizontal block into (p, q+1): linear forms from the action.
            if module.dim(q + 1) > 0 {
                let tgt_off = offsets[&(p, q + 1)];
                let rho: Vec<Mat> = (0..=n).map(|v| module.rho(q, v)).collect();
                let m = diffs.entry(s).or_insert_with(|| zero_matrix(s, &terms));
                for i in 0..module.dim(q + 1) {
                    for j in 0..dim_q {
                        let coeffs: Vec<Scalar> =
                            (0..=n).map(|v| rho[v].get(i, j).clone()).collect();
                        let lin = SPoly::from_linear(n, field, &coeffs);
                        if !lin.is_zero() {
                            m[tgt_off + i][src_off + j] = lin;
                        }
                    }
                }
            }

            // Vertical block into (p+1, q): scalars, with the sign (−1)^q.
            if let Some(next) = complex.term(p + 1) {
                if next.dim(q) > 0 {
                    let tgt_off = offsets[&(p + 1, q)];
                    let block = complex.diff_block(p, q);
                    if !block.is_zero() {
                        let m = diffs.entry(s).or_insert_with(|| zero_matrix(s, &terms));
                        let negate = q.rem_euclid(2) == 1;
                        for i in 0..block.rows {
                            for j in 0..block.cols {
                                let mut v = block.get(i, j).clone();
                                if v.is_zero() {
                                    continue;
                                }
                                if negate {
                                    v = v.neg();
                                }
                                m[tgt_off + i][src_off + j] =
                                    SPoly::constant(n, field, v);
                            }
                        }
                    }
                }
            }
        }
    }
    SComplex::new(n, field, terms, diffs).expect("total complex is well typed")
}

/// L of a graded module, as the single-column total complex at position 0.
pub fn l_of_module(module: &GradedLambdaModule) -> SComplex {
    let deg = DegComplex::new(
        module.n,
        module.field,
        BTreeMap::from([(0, module.clone())]),
        BTreeMap::new(),
    )
    .expect("single term");
    l_of_deg_complex(&deg)
}

/// L of a free module.
pub fn l_of_free_module(module: &FreeModule) -> SComplex {
    l_of_module(&free_to_graded(module))
}

/// L of a free complex (untruncated).
pub fn l_of_complex(complex: &FreeComplex) -> SComplex {
    l_of_deg_complex(&full_deg_complex(complex))
}

/// A finite-dimensional graded S-module: pieces M_d and one multiplication
/// map per variable, μ_v: M_d → M_{d+1}, commuting pairwise.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SModule {
    pub n: usize,
    pub field: Field,
    pieces: BTreeMap<i64, usize>,
    mult: BTreeMap<i64, Vec<Mat>>,
}

impl SModule {
    pub fn new(
        n: usize,
        field: Field,
        pieces: BTreeMap<i64, usize>,
        mult: BTreeMap<i64, Vec<Mat>>,
    ) -> Result<SModule> {
        let pieces: BTreeMap<i64, usize> =
            pieces.into_iter().filter(|&(_, dim)| dim > 0).collect();
        for (&d, mats) in &mult {
            if mats.len() != n + 1 {
                return Err(Error::DimensionMismatch(format!(
                    "degree {} needs one multiplication matrix per variable",
                    d
                )));
            }
            let dim_d = pieces.get(&d).copied().unwrap_or(0);
            let dim_d1 = pieces.get(&(d + 1)).copied().unwrap_or(0);
            for (v, m) in mats.iter().enumerate() {
                if m.rows != dim_d1 || m.cols != dim_d {
                    return Err(Error::DimensionMismatch(format!(
                        "multiplication by x_{} at degree {} is {}x{}, expected {}x{}",
                        v, d, m.rows, m.cols, dim_d1, dim_d
                    )));
                }
            }
        }
        Ok(SModule { n, field, pieces, mult })
    }

    /// The module k concentrated in degree 0.
    pub fn ground_field(n: usize, field: Field) -> SModule {
        SModule::new(n, field, BTreeMap::from([(0, 1)]), BTreeMap::new()).unwrap()
    }

    /// S/(x_0..x_n)^length: polynomial degrees 0..length−1 with the honest
    /// multiplication matrices.
    pub fn truncated_polynomials(n: usize, field: Field, length: usize) -> SModule {
        let mut pieces = BTreeMap::new();
        let mut mult = BTreeMap::new();
        for d in 0..length {
            pieces.insert(d as i64, monomials(n + 1, d).len());
        }
        for d in 0..length.saturating_sub(1) {
            let mats: Vec<Mat> = (0..=n)
                .map(|v| SPoly::variable(n, field, v).mult_matrix(d))
                .collect();
            mult.insert(d as i64, mats);
        }
        SModule::new(n, field, pieces, mult).unwrap()
    }

    pub fn dim(&self, d: i64) -> usize {
        self.pieces.get(&d).copied().unwrap_or(0)
    }

    pub fn support(&self) -> Vec<i64> {
        self.pieces.keys().copied().collect()
    }

    pub fn mu(&self, d: i64, v: usize) -> Mat {
        if let Some(mats) = self.mult.get(&d) {
            return mats[v].clone();
        }
        Mat::zero(self.field, self.dim(d + 1), self.dim(d))
    }

    /// Verifies μ_w∘μ_v = μ_v∘μ_w at every degree.
    pub fn check_commutative(&self) -> Result<()> {
        for &d in self.pieces.keys() {
            for v in 0..=self.n {
                for w in (v + 1)..=self.n {
                    let vw = self.mu(d + 1, w).mul(&self.mu(d, v))?;
                    let wv = self.mu(d + 1, v).mul(&self.mu(d, w))?;
                    if vw != wv {
                        return Err(Error::InvalidArgument(format!(
                            "multiplication maps x_{} and x_{} do not commute at degree {}",
                            v, w, d
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// R(M): the free complex with term M_p ⊗ Λ∨(p) at position p and entries
/// Σ_v μ_v[i,j]·e_v. All summands have strand 0; twisting by −j for
/// 0 < j < n yields an HT-complex.
pub fn r_of_module(module: &SModule) -> Result<FreeComplex> {
    module.check_commutative()?;
    let n = module.n;
    let field = module.field;
    let mut terms = BTreeMap::new();
    for &p in &module.support() {
        terms.insert(p, FreeModule::new(n, field, vec![p; module.dim(p)]));
    }
    let mut diffs = BTreeMap::new();
    for &p in &module.support() {
        if module.dim(p + 1) == 0 {
            continue;
        }
        let src: FreeModule = terms[&p].clone();
        let tgt: FreeModule = terms[&(p + 1)].clone();
        let mus: Vec<Mat> = (0..=n).map(|v| module.mu(p, v)).collect();
        let mut entries = Vec::with_capacity(tgt.rank());
        for i in 0..tgt.rank() {
            let mut row = Vec::with_capacity(src.rank());
            for j in 0..src.rank() {
                let mut e = ExtElement::zero(n, field, crate::exterior::Variance::V, 1);
                for (v, mu) in mus.iter().enumerate() {
                    let c = mu.get(i, j);
                    if !c.is_zero() {
                        let mono = ExtElement::monomial(
                            n,
                            field,
                            crate::exterior::Variance::V,
                            1u32 << v,
                        );
                        e = e.add(&mono.scale(c)).expect("same degree");
                    }
                }
                row.push(e);
            }
            entries.push(row);
        }
        let f = ModMorphism::new(src, tgt, entries)?;
        if !f.is_zero() {
            diffs.insert(p, f);
        }
    }
    FreeComplex::new(n, field, terms, diffs)
}

/// The degree-d global-section complex of an SComplex: dims and
/// multiplication matrices.
#[derive(Clone, Debug)]
pub struct SectionComplex {
    pub dims: BTreeMap<i64, usize>,
    pub diffs: BTreeMap<i64, Mat>,
}

/// Dimension of the space of degree-t forms in n+1 variables.
pub fn sections_dim(n: usize, t: i64) -> usize {
    if t < 0 {
        0
    } else {
        binomial(n as i64 + t, n as i64) as usize
    }
}

/// Degree-d global sections: O(m) contributes the degree-(d+m) forms,
/// entries act by polynomial multiplication.
pub fn gamma_sections(complex: &SComplex, d: i64) -> SectionComplex {
    let n = complex.n;
    let field = complex.field;
    let mut dims = BTreeMap::new();
    for &s in &complex.positions() {
        let dim: usize =
            complex.term(s).iter().map(|t| sections_dim(n, d + t.twist)).sum();
        if dim > 0 {
            dims.insert(s, dim);
        }
    }
    let mut diffs = BTreeMap::new();
    for &s in &complex.positions() {
        let (Some(&rows), Some(&cols)) = (dims.get(&(s + 1)), dims.get(&s)) else {
            continue;
        };
        let src = complex.term(s);
        let tgt = complex.term(s + 1);
        let matrix = complex.diff(s);
        let mut out = Mat::zero(field, rows, cols);
        let mut col_off = 0usize;
        for (j, cm) in src.iter().enumerate() {
            let cdim = sections_dim(n, d + cm.twist);
            if cdim == 0 {
                continue;
            }
            let mut row_off = 0usize;
            for (i, rm) in tgt.iter().enumerate() {
                let rdim = sections_dim(n, d + rm.twist);
                if rdim == 0 {
                    continue;
                }
                let e = &matrix[i][j];
                if !e.is_zero() {
                    let block = e.mult_matrix((d + cm.twist) as usize);
                    debug_assert_eq!(block.rows, rdim);
                    debug_assert_eq!(block.cols, cdim);
                    for bi in 0..rdim {
                        for bj in 0..cdim {
                            let v = block.get(bi, bj);
                            if !v.is_zero() {
                                out.set(row_off + bi, col_off + bj, v.clone());
                            }
                        }
                    }
                }
                row_off += rdim;
            }
            col_off += cdim;
        }
        diffs.insert(s, out);
    }
    SectionComplex { dims, diffs }
}

/// Result of the acyclicity check.
#[derive(Clone, Debug)]
pub struct AcyclicReport {
    pub passed: bool,
    /// Smallest degree at which full section-level exactness is verified
    /// (all line-bundle cohomology vanishes from here on).
    pub d_min: i64,
    pub failures: Vec<String>,
}

/// Verifies acyclicity evidence over a degree window: the signed Euler
/// characteristic Σ_s (−1)^s Σ χ(O(m+d)) vanishes for every d, and the
/// section-level complex is exact at every position for d ≥ d_min, where
/// d_min = −n − (minimum twist) guarantees no term has higher cohomology.
pub fn check_acyclic(complex: &SComplex, d_lo: i64, d_hi: i64) -> AcyclicReport {
    let n = complex.n;
    let Some(min_twist) = complex.min_twist() else {
        return AcyclicReport { passed: true, d_min: d_lo, failures: Vec::new() };
    };
    let d_min = -(n as i64) - min_twist;
    let mut failures = Vec::new();
    for d in d_lo..=d_hi {
        let mut chi = 0i64;
        for &s in &complex.positions() {
            let sign = if s.rem_euclid(2) == 0 { 1 } else { -1 };
            for t in complex.term(s) {
                chi += sign * chi_line_bundle(n, t.twist + d);
            }
        }
        if chi != 0 {
            failures.push(format!(
                "signed Euler characteristic at twist {} is {}",
                d, chi
            ));
        }
        if d >= d_min {
            let sections = gamma_sections(complex, d);
            let rank_at = |s: i64| -> usize {
                sections.diffs.get(&s).map_or(0, Mat::rank)
            };
            for (&s, &dim) in &sections.dims {
                let expected = rank_at(s - 1) + rank_at(s);
                if expected != dim {
                    failures.push(format!(
                        "sections not exact at position {}, twist {}: dim {}, ranks {} + {}",
                        s,
                        d,
                        dim,
                        rank_at(s - 1),
                        rank_at(s)
                    ));
                }
            }
        }
    }
    AcyclicReport { passed: failures.is_empty(), d_min, failures }
}

/// rank Z⁰L(G) = Σ_i binom(n, i) Σ_d dim H^i_d for an HT-complex.
pub fn z0_rank(complex: &FreeComplex) -> Result<u64> {
    if !is_ht(complex) {
        return Err(Error::NotHt("rank formula needs an HT-complex".into()));
    }
    let n = complex.n as i64;
    let mut total = 0u64;
    for (i, _, mult) in complex.strand_table().support() {
        total += binomial(n, i) * mult as u64;
    }
    Ok(total)
}

/// The table (i, d) ↦ h^i(E(d)) over a degree window, rows 0..=n.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CohomologyTable {
    pub n: usize,
    pub d_lo: i64,
    pub d_hi: i64,
    entries: BTreeMap<(i64, i64), usize>,
}

impl CohomologyTable {
    pub fn get(&self, i: i64, d: i64) -> Option<usize> {
        if i < 0 || i > self.n as i64 || d < self.d_lo || d > self.d_hi {
            return None;
        }
        Some(self.entries.get(&(i, d)).copied().unwrap_or(0))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("i");
        for d in self.d_lo..=self.d_hi {
            out.push_str(&format!(",{}", d));
        }
        out.push('\n');
        for i in 0..=self.n as i64 {
            out.push_str(&format!("{}", i));
            for d in self.d_lo..=self.d_hi {
                out.push_str(&format!(",{}", self.get(i, d).unwrap_or(0)));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::from("| i \\ d |");
        for d in self.d_lo..=self.d_hi {
            out.push_str(&format!(" {} |", d));
        }
        out.push_str("\n|---|");
        for _ in self.d_lo..=self.d_hi {
            out.push_str("---|");
        }
        out.push('\n');
        for i in 0..=self.n as i64 {
            out.push_str(&format!("| {} |", i));
            for d in self.d_lo..=self.d_hi {
                out.push_str(&format!(" {} |", self.get(i, d).unwrap_or(0)));
            }
            out.push('\n');
        }
        out
    }
}

/// Cohomology of the bundle E = Z⁰L(G) of an HT-complex over a twist
/// window. Middle rows come from the strand table; row 0 is the section
/// kernel of the right resolution σ^{≥0}L(G); row n applies the row-0
/// computation to the dualized left tail via h^n(E(d)) = h⁰(E∨(−d−n−1)).
pub fn cohomology_table(
    complex: &FreeComplex,
    d_lo: i64,
    d_hi: i64,
) -> Result<CohomologyTable> {
    if !is_ht(complex) {
        return Err(Error::NotHt("cohomology table needs an HT-complex".into()));
    }
    let n = complex.n;
    let mut entries = BTreeMap::new();
    for (i, d, mult) in complex.strand_table().support() {
        if d >= d_lo && d <= d_hi && mult > 0 {
            entries.insert((i, d), mult);
        }
    }
    let l = l_of_complex(complex);

    // Row 0: h⁰(E(d)) = ker(Γ(L⁰(d)) → Γ(L¹(d))), exact for every d by
    // left exactness of global sections.
    for d in d_lo..=d_hi {
        let h0 = section_kernel_dim(&l, 0, d);
        if h0 > 0 {
            entries.insert((0, d), h0);
        }
    }

    // Row n: dualize the left tail. The dual of ... → L^{−2} → L^{−1}
    // (→ E → 0) is a right resolution of E∨ starting with (L^{−1})∨, with
    // transposed matrices and negated twists.
    let dual = dual_left_tail(&l);
    for d in d_lo..=d_hi {
        let t = -d - n as i64 - 1;
        let hn = section_kernel_dim(&dual, 0, t);
        if hn > 0 {
            entries.insert((n as i64, d), hn);
        }
    }

    Ok(CohomologyTable { n, d_lo, d_hi, entries })
}

/// dim ker of the section-level map at position s, twist d.
fn section_kernel_dim(complex: &SComplex, s: i64, d: i64) -> usize {
    let sections = gamma_sections(complex, d);
    let dim = sections.dims.get(&s).copied().unwrap_or(0);
    let rank = sections.diffs.get(&s).map_or(0, Mat::rank);
    dim - rank
}

/// The dual of the strictly negative positions, reindexed so that
/// (L^{−1−r})∨ sits at position r with transposed differentials.
fn dual_left_tail(complex: &SComplex) -> SComplex {
    let n = complex.n;
    let field = complex.field;
    let mut terms: BTreeMap<i64, Vec<STwist>> = BTreeMap::new();
    let mut diffs: BTreeMap<i64, Vec<Vec<SPoly>>> = BTreeMap::new();
    for &s in &complex.positions() {
        if s >= 0 {
            continue;
        }
        let r = -1 - s;
        terms.insert(
            r,
            complex
                .term(s)
                .iter()
                .map(|t| STwist { twist: -t.twist, origin: t.origin })
                .collect(),
        );
    }
    for &s in &complex.positions() {
        if s >= -1 {
            continue;
        }
        // d^s: L^s → L^{s+1} dualizes to position r = −2 − s.
        let r = -2 - s;
        if !terms.contains_key(&r) || !terms.contains_key(&(r + 1)) {
            continue;
        }
        let m = complex.diff(s);
        let rows = complex.rank(s);
        let cols = complex.rank(s + 1);
        let mut out = vec![vec![SPoly::zero(n, field, 0); cols]; rows];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = m[j][i].clone();
            }
        }
        diffs.insert(r, out);
    }
    SComplex::new(n, field, terms, diffs).expect("dual tail is well typed")
}
