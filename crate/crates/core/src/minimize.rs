//! Cancellation of constant differential entries in complexes of
//! line-bundle sums.
//!
//! Constant entries connect summands of equal twist. For one twist class at
//! one position, a basis change splits the constant block into an identity
//! of size r plus zero; the paired summands are contractible and can be
//! removed, replacing the remaining block by δ′ = δ − γ∘α⁻¹∘β while the
//! adjacent differentials only lose the corresponding rows and columns.
//! Since the cancelled pairs share a twist, α is exactly the identity.
//! Iterating to a fixpoint yields a minimal complex homotopy equivalent to
//! the input; its terms recover the degree-wise homology of the Λ-side.

use std::collections::BTreeMap;

use crate::bgg::{gamma_sections, l_of_complex, SComplex, SPoly, STwist};
use crate::exactla::{split_off_iso, Mat};
use crate::lamcomplex::{is_ht, FreeComplex};
use crate::{bgg, Error, Result};

/// The scalar matrix of degree-0 entries of d^s (entries between summands
/// of equal twist; all other slots are zero).
pub fn constant_part(complex: &SComplex, s: i64) -> Mat {
    let src = complex.term(s);
    let tgt = complex.term(s + 1);
    let mut out = Mat::zero(complex.field, tgt.len(), src.len());
    if src.is_empty() || tgt.is_empty() {
        return out;
    }
    let matrix = complex.diff(s);
    for (i, r) in tgt.iter().enumerate() {
        for (j, c) in src.iter().enumerate() {
            if r.twist == c.twist {
                if let Some(v) = matrix[i][j].constant_value() {
                    out.set(i, j, v);
                }
            }
        }
    }
    out
}

/// Replaces rows `idx` of a polynomial matrix by t · (those rows).
fn mix_rows(m: &mut [Vec<SPoly>], idx: &[usize], t: &Mat) {
    if m.is_empty() {
        return;
    }
    let cols = m[0].len();
    let old: Vec<Vec<SPoly>> = idx.iter().map(|&i| m[i].clone()).collect();
    for (a, &i) in idx.iter().enumerate() {
        for j in 0..cols {
            let mut acc = SPoly::zero(
                old[0][j].n,
                old[0][j].field,
                old.iter().map(|r| r[j].degree).max().unwrap_or(0),
            );
            for (b, row) in old.iter().enumerate() {
                let c = t.get(a, b);
                if !c.is_zero() {
                    acc = acc.add(&row[j].scale(c)).expect("same twist class");
                }
            }
            m[i][j] = acc;
        }
    }
}

/// Replaces columns `idx` of a polynomial matrix by (those columns) · t.
fn mix_cols(m: &mut [Vec<SPoly>], idx: &[usize], t: &Mat) {
    for row in m.iter_mut() {
        let old: Vec<SPoly> = idx.iter().map(|&j| row[j].clone()).collect();
        for (a, &j) in idx.iter().enumerate() {
            let mut acc = SPoly::zero(
                old[0].n,
                old[0].field,
                old.iter().map(|e| e.degree).max().unwrap_or(0),
            );
            for (b, e) in old.iter().enumerate() {
                let c = t.get(b, a);
                if !c.is_zero() {
                    acc = acc.add(&e.scale(c)).expect("same twist class");
                }
            }
            row[j] = acc;
        }
    }
}

fn drop_indices<T: Clone>(items: &[T], dropped: &[usize]) -> Vec<T> {
    items
        .iter()
        .enumerate()
        .filter(|(i, _)| !dropped.contains(i))
        .map(|(_, v)| v.clone())
        .collect()
}

/// Cancels the constant block of one twist class at position s.
fn cancel_twist_class(complex: &SComplex, s: i64, twist: i64) -> SComplex {
    let n = complex.n;
    let field = complex.field;
    let src = complex.term(s).to_vec();
    let tgt = complex.term(s + 1).to_vec();
    let cols_t: Vec<usize> =
        (0..src.len()).filter(|&j| src[j].twist == twist).collect();
    let rows_t: Vec<usize> =
        (0..tgt.len()).filter(|&i| tgt[i].twist == twist).collect();
    let mut matrix = complex.diff(s);
    let mut a = Mat::zero(field, rows_t.len(), cols_t.len());
    for (bi, &i) in rows_t.iter().enumerate() {
        for (bj, &j) in cols_t.iter().enumerate() {
            if let Some(v) = matrix[i][j].constant_value() {
                a.set(bi, bj, v);
            }
        }
    }
    let split = split_off_iso(&a);
    let r = split.y.cols;
    if r == 0 {
        return complex.clone();
    }
    let q_change = split.y.hstack(&split.z).expect("same rows");
    let p_change = split.b.hstack(&split.c).expect("same rows");
    let q_inv = q_change.inverse().expect("basis change");
    let p_inv = p_change.inverse().expect("basis change");

    // New bases: source twist-t columns become [Y|Z], target twist-t rows
    // are rewritten in the [B|C] coordinates.
    mix_cols(&mut matrix, &cols_t, &q_change);
    mix_rows(&mut matrix, &rows_t, &p_inv);

    let cancelled_cols: Vec<usize> = cols_t[..r].to_vec();
    let cancelled_rows: Vec<usize> = rows_t[..r].to_vec();

    // Gaussian correction on the kept block: δ′ = δ − γ·β (α = identity,
    // because the cancelled pairs share the twist).
    let correction: Vec<(usize, usize, SPoly)> = {
        let mut out = Vec::new();
        for i in 0..tgt.len() {
            if cancelled_rows.contains(&i) {
                continue;
            }
            for j in 0..src.len() {
                if cancelled_cols.contains(&j) {
                    continue;
                }
                let mut acc = SPoly::zero(n, field, matrix[i][j].degree);
                for k in 0..r {
                    let gamma = &matrix[i][cancelled_cols[k]];
                    let beta = &matrix[cancelled_rows[k]][j];
                    if !gamma.is_zero() && !beta.is_zero() {
                        acc = acc.add(&gamma.mul(beta)).expect("typed entries");
                    }
                }
                if !acc.is_zero() {
                    out.push((i, j, acc));
                }
            }
        }
        out
    };
    for (i, j, c) in correction {
        matrix[i][j] = matrix[i][j].sub(&c).expect("typed entries");
    }

    // Provenance of the kept twist-t summands: kernel columns are labelled
    // by their free column, complement rows by their unit row.
    let pivots = a.pivot_columns();
    let free: Vec<usize> =
        (0..a.cols).filter(|j| !pivots.contains(j)).collect();
    let mut new_src = src.clone();
    for (k, &f) in free.iter().enumerate() {
        new_src[cols_t[r + k]] = STwist { twist, origin: src[cols_t[f]].origin };
    }
    let mut new_tgt = tgt.clone();
    for k in 0..(rows_t.len() - r) {
        let col = split.c.col(k);
        let unit = col.iter().position(|v| !v.is_zero()).unwrap_or(k);
        new_tgt[rows_t[r + k]] = STwist { twist, origin: tgt[rows_t[unit]].origin };
    }

    // Rebuild the complex: drop the cancelled summands everywhere.
    let mut terms: BTreeMap<i64, Vec<STwist>> = BTreeMap::new();
    for &pos in &complex.positions() {
        let t = if pos == s {
            drop_indices(&new_src, &cancelled_cols)
        } else if pos == s + 1 {
            drop_indices(&new_tgt, &cancelled_rows)
        } else {
            complex.term(pos).to_vec()
        };
        if !t.is_empty() {
            terms.insert(pos, t);
        }
    }
    let mut diffs: BTreeMap<i64, Vec<Vec<SPoly>>> = BTreeMap::new();
    for &pos in &complex.positions() {
        if !terms.contains_key(&pos) || !terms.contains_key(&(pos + 1)) {
            continue;
        }
        let m = if pos == s {
            matrix
                .iter()
                .enumerate()
                .filter(|(i, _)| !cancelled_rows.contains(i))
                .map(|(_, row)| drop_indices(row, &cancelled_cols))
                .collect()
        } else if pos == s - 1 {
            let mut prev = complex.diff(pos);
            mix_rows(&mut prev, &cols_t, &q_inv);
            prev.into_iter()
                .enumerate()
                .filter(|(i, _)| !cancelled_cols.contains(i))
                .map(|(_, row)| row)
                .collect()
        } else if pos == s + 1 {
            let mut next = complex.diff(pos);
            mix_cols(&mut next, &rows_t, &p_change);
            next.into_iter()
                .map(|row| drop_indices(&row, &cancelled_rows))
                .collect()
        } else {
            complex.diff(pos)
        };
        diffs.insert(pos, m);
    }
    SComplex::new(n, field, terms, diffs).expect("cancellation keeps typing")
}

/// Cancels constant entries at position s until none remain there.
pub fn cancel_step(complex: &SComplex, s: i64) -> SComplex {
    let mut current = complex.clone();
    loop {
        let constants = constant_part(&current, s);
        if constants.is_zero() {
            return current;
        }
        // Pick any twist with a nonzero constant block.
        let src = current.term(s).to_vec();
        let mut twist = None;
        'outer: for i in 0..constants.rows {
            for j in 0..constants.cols {
                if !constants.get(i, j).is_zero() {
                    twist = Some(src[j].twist);
                    break 'outer;
                }
            }
        }
        current = cancel_twist_class(&current, s, twist.expect("nonzero constant"));
    }
}

/// True iff some differential has a nonzero constant entry.
pub fn has_constants(complex: &SComplex) -> bool {
    complex.positions().iter().any(|&s| !constant_part(complex, s).is_zero())
}

/// Iterates [`cancel_step`] over all positions to a fixpoint. The result is
/// minimal, homotopy equivalent to the input.
pub fn minimize_complex(complex: &SComplex) -> SComplex {
    minimize_complex_with(complex, false)
}

/// Minimization with a configurable sweep direction, used to confirm that
/// the final term multisets do not depend on processing order.
pub fn minimize_complex_with(complex: &SComplex, reverse: bool) -> SComplex {
    let mut current = complex.clone();
    loop {
        let mut positions = current.positions();
        if reverse {
            positions.reverse();
        }
        let before: usize = positions.iter().map(|&s| current.rank(s)).sum();
        for &s in &positions {
            current = cancel_step(&current, s);
        }
        let after: usize =
            current.positions().iter().map(|&s| current.rank(s)).sum();
        if after == before && !has_constants(&current) {
            return current;
        }
    }
}

/// Per internal degree q, the homology dimensions of the k-linear complex
/// of degree-q evaluations: (p, q) ↦ dim H^p(G•)_q.
pub fn complex_cohomology_dims(complex: &FreeComplex) -> BTreeMap<(i64, i64), usize> {
    let mut out = BTreeMap::new();
    let positions = complex.positions();
    if positions.is_empty() {
        return out;
    }
    let mut degrees = Vec::new();
    for &p in &positions {
        if let Some((lo, hi)) = complex.term(p).degree_range() {
            degrees.push((lo, hi));
        }
    }
    let lo = degrees.iter().map(|&(l, _)| l).min().unwrap();
    let hi = degrees.iter().map(|&(_, h)| h).max().unwrap();
    for q in lo..=hi {
        for &p in &positions {
            let dim = complex.term(p).graded_dimension(q);
            if dim == 0 {
                continue;
            }
            let rank_out = complex.diff(p).evaluate_degree(q).rank();
            let rank_in = complex.diff(p - 1).evaluate_degree(q).rank();
            let h = dim - rank_out - rank_in;
            if h > 0 {
                out.insert((p, q), h);
            }
        }
    }
    out
}

/// Homology dimensions of the degree-d section complex, by position.
pub fn section_homology_dims(complex: &SComplex, d: i64) -> BTreeMap<i64, usize> {
    let sections = gamma_sections(complex, d);
    let mut out = BTreeMap::new();
    for (&s, &dim) in &sections.dims {
        let rank_out = sections.diffs.get(&s).map_or(0, Mat::rank);
        let rank_in = sections.diffs.get(&(s - 1)).map_or(0, Mat::rank);
        let h = dim - rank_out - rank_in;
        if h > 0 {
            out.insert(s, h);
        }
    }
    out
}

/// The signed count of line bundles in the right resolution σ^{≥0} of an
/// SComplex: Σ_{s≥0} (−1)^s rank(L^s). For L(G) of an HT-complex this is
/// the rank of the kernel bundle at position 0, independently of the
/// strand-table formula.
pub fn resolution_rank(complex: &SComplex) -> i64 {
    let mut total = 0i64;
    for &s in &complex.positions() {
        if s < 0 {
            continue;
        }
        let sign = if s % 2 == 0 { 1 } else { -1 };
        total += sign * complex.rank(s) as i64;
    }
    total
}

/// The decomposition Z⁰L(G) ≅ E ⊕ ⊕_p O(−p)^{r(p)}.
#[derive(Clone, Debug)]
pub struct DecompositionReport {
    /// p ↦ r(p) = rank of the degree-(−p) evaluation of d^{p−1}.
    pub r: BTreeMap<i64, usize>,
    pub z0: u64,
    pub bundle_rank: u64,
    pub minimal_complex: SComplex,
    /// Twist multiset per position of the minimal complex.
    pub bundle_twist_profile: BTreeMap<i64, BTreeMap<i64, usize>>,
}

/// Splits off the trivial line-bundle summands of Z⁰L(G) for an HT-complex:
/// r(p) is the rank of G^{p−1}_{−p} → G^p_{−p}, and the remaining summand
/// has rank z0_rank − Σ r(p) and no rank-1 summand.
pub fn decompose_bundle(complex: &FreeComplex) -> Result<DecompositionReport> {
    if !is_ht(complex) {
        return Err(Error::NotHt("decomposition needs an HT-complex".into()));
    }
    let z0 = bgg::z0_rank(complex)?;
    let mut r = BTreeMap::new();
    for &p in &complex.positions() {
        let rank = complex.diff(p - 1).evaluate_degree(-p).rank();
        if rank > 0 {
            r.insert(p, rank);
        }
    }
    let cancelled: usize = r.values().sum();
    let bundle_rank = z0
        .checked_sub(cancelled as u64)
        .ok_or_else(|| Error::Hypothesis("cancelled rank exceeds bundle rank".into()))?;
    let minimal_complex = minimize_complex(&l_of_complex(complex));
    let mut profile: BTreeMap<i64, BTreeMap<i64, usize>> = BTreeMap::new();
    for &s in &minimal_complex.positions() {
        let entry = profile.entry(s).or_default();
        for t in minimal_complex.term(s) {
            *entry.entry(t.twist).or_insert(0) += 1;
        }
    }
    Ok(DecompositionReport {
        r,
        z0,
        bundle_rank,
        minimal_complex,
        bundle_twist_profile: profile,
    })
}
