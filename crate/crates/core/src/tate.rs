//! Minimal free resolutions over Λ, Tate-resolution windows for the bundle
//! of an HT-complex, isomorphism testing of minimal complexes, and
//! Beilinson-monad term extraction.
//!
//! A Tate window is built in three moves: the truncated section module
//! Γ_{≥r}E with its variable-multiplication maps is computed from the right
//! resolution σ^{≥0}L(G) by lifting multiplication through kernels, the
//! functor R turns it into the linear right tail, and the tail's kernel is
//! resolved leftward by minimal free covers. The window terms then exhibit
//! the cohomology of E in their strands, which the construction verifies
//! against the independently computed cohomology table.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bgg::{
    cohomology_table, gamma_sections, l_of_complex, r_of_module, sections_dim,
    SModule, SPoly,
};
use crate::exactla::{Field, Mat, Scalar};
use crate::exterior::{basis_masks, ExtElement, Variance};
use crate::lamcomplex::{
    is_ht, is_minimal, morphism_coords, quotient_f, FreeComplex, StrandTable,
};
use crate::lammod::{
    free_to_graded, hom_space_basis, induced_submodule, morphism_from_degreewise,
    FreeModule, GradedLambdaModule, ModMorphism,
};
use crate::minimize::complex_cohomology_dims;
use crate::{Error, Result};

/// A minimal free resolution ⋯ → F₁ → F₀ ↠ M with F_k at position −k.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Resolution {
    pub complex: FreeComplex,
    /// Degree-wise matrices of the augmentation F₀ → M.
    pub augmentation: BTreeMap<i64, Mat>,
    /// True when the final kernel vanished before the step budget ran out.
    pub complete: bool,
}

/// One minimal free cover F ↠ M: the free module, its degree-wise cover
/// matrices, and the degree-wise inclusions of the kernel.
struct Cover {
    module: FreeModule,
    maps: BTreeMap<i64, Mat>,
    kernel: BTreeMap<i64, Mat>,
}

/// Builds the minimal free cover of a nonzero module: one generator per
/// basis vector of M/MΛ₊, each covering summand Λ∨(−d−n−1) attached at its
/// bottom degree d.
fn free_cover(m: &GradedLambdaModule) -> Result<Option<Cover>> {
    let n = m.n;
    let field = m.field;
    if m.total_dimension() == 0 {
        return Ok(None);
    }
    // Generators: unit-vector complements of the image of the action.
    let mut twists = Vec::new();
    let mut generators: Vec<(i64, Vec<Scalar>)> = Vec::new();
    for &d in &m.support() {
        let dim = m.dim(d);
        let mut image = Mat::zero(field, dim, 0);
        if m.dim(d - 1) > 0 {
            for v in 0..=n {
                image = image.hstack(&m.rho(d - 1, v))?;
            }
        }
        let probe = image.hstack(&Mat::identity(field, dim))?;
        for &p in &probe.pivot_columns() {
            if p >= image.cols {
                let unit = p - image.cols;
                let mut col = vec![field.from_i64(0); dim];
                col[unit] = field.one();
                twists.push(-d - n as i64 - 1);
                generators.push((d, col));
            }
        }
    }
    let module = FreeModule::new(n, field, twists);
    let fg = free_to_graded(&module);

    // Cover matrices, bottom degree upward. Non-generator basis vectors are
    // reached by a single variable action from one degree below, so each
    // column is determined by commutation with the action.
    let mut maps: BTreeMap<i64, Mat> = BTreeMap::new();
    for &d in &fg.support() {
        let cols = fg.dim(d);
        let mut mat = Mat::zero(field, m.dim(d), cols);
        let offsets = module.piece_offsets(d);
        let mut is_generator = vec![false; cols];
        for (t, &(off, od)) in offsets.iter().enumerate() {
            let bottom = -module.twists[t] - n as i64 - 1;
            if bottom == d {
                debug_assert_eq!(od, 1);
                is_generator[off] = true;
                // Generators were pushed in summand order.
                let (gd, col) = generators[t].clone();
                debug_assert_eq!(gd, d);
                for (i, v) in col.iter().enumerate() {
                    mat.set(i, off, v.clone());
                }
            }
        }
        let prev = maps.get(&(d - 1));
        for c in 0..cols {
            if is_generator[c] {
                continue;
            }
            let mut found = false;
            'search: for v in 0..=n {
                let rho_f = fg.rho(d - 1, v);
                for c2 in 0..rho_f.cols {
                    let coeff = rho_f.get(c, c2);
                    if coeff.is_zero() {
                        continue;
                    }
                    let prev_map =
                        prev.ok_or_else(|| Error::Hypothesis("cover misses a degree".into()))?;
                    let lifted = m.rho(d - 1, v).mul(prev_map)?;
                    let inv = coeff.inv();
                    for i in 0..mat.rows {
                        mat.set(i, c, lifted.get(i, c2).mul(&inv));
                    }
                    found = true;
                    break 'search;
                }
            }
            if !found {
                return Err(Error::Hypothesis(
                    "free basis vector unreachable from below".into(),
                ));
            }
        }
        maps.insert(d, mat);
    }

    // The cover must be a surjective module map.
    for &d in &fg.support() {
        for v in 0..=n {
            let lhs = maps
                .get(&(d + 1))
                .map(|m1| m1.mul(&fg.rho(d, v)))
                .transpose()?
                .unwrap_or_else(|| Mat::zero(field, m.dim(d + 1), fg.dim(d)));
            let rhs = m.rho(d, v).mul(&maps[&d])?;
            if lhs != rhs {
                return Err(Error::Hypothesis(format!(
                    "cover does not commute with e_{} at degree {}",
                    v, d
                )));
            }
        }
        if maps[&d].rank() != m.dim(d) {
            return Err(Error::Hypothesis(format!(
                "cover not surjective at degree {}",
                d
            )));
        }
    }

    let mut kernel = BTreeMap::new();
    for (&d, map) in &maps {
        let basis = map.kernel_basis();
        if !basis.is_empty() {
            kernel.insert(d, Mat::from_cols(field, map.cols, &basis));
        }
    }
    Ok(Some(Cover { module, maps, kernel }))
}

/// Resolves M leftward by minimal free covers: F_k sits at position −k,
/// `steps` bounds the number of syzygy steps beyond F₀.
pub fn minimal_free_resolution(
    module: &GradedLambdaModule,
    steps: i64,
) -> Result<Resolution> {
    if steps < 0 {
        return Err(Error::InvalidArgument("steps must be nonnegative".into()));
    }
    let n = module.n;
    let field = module.field;
    let mut terms: BTreeMap<i64, FreeModule> = BTreeMap::new();
    let mut diffs: BTreeMap<i64, ModMorphism> = BTreeMap::new();
    let mut augmentation = BTreeMap::new();
    let mut complete = false;
    let mut current = module.clone();
    // Kernel inclusion into the previous free term, in its graded basis.
    let mut prev: Option<(FreeModule, BTreeMap<i64, Mat>)> = None;
    for k in 0..=steps {
        let Some(cover) = free_cover(&current)? else {
            complete = true;
            break;
        };
        terms.insert(-k, cover.module.clone());
        match &prev {
            None => augmentation = cover.maps.clone(),
            Some((f_prev, incl)) => {
                let mut maps = BTreeMap::new();
                for &d in &free_to_graded(&cover.module).support() {
                    let rows = f_prev.graded_dimension(d);
                    let cols = cover.module.graded_dimension(d);
                    let inc = incl
                        .get(&d)
                        .cloned()
                        .unwrap_or_else(|| Mat::zero(field, rows, 0));
                    let phi = cover
                        .maps
                        .get(&d)
                        .cloned()
                        .unwrap_or_else(|| Mat::zero(field, 0, cols));
                    maps.insert(d, inc.mul(&phi)?);
                }
                let f = morphism_from_degreewise(&cover.module, f_prev, &maps)?;
                diffs.insert(-k, f);
            }
        }
        if cover.kernel.is_empty() {
            complete = true;
            break;
        }
        let ambient = free_to_graded(&cover.module);
        current = induced_submodule(&ambient, &cover.kernel)?;
        prev = Some((cover.module, cover.kernel));
    }
    // Rekey diffs by source position convention of FreeComplex.
    let complex = FreeComplex::new(n, field, terms, diffs)?;
    Ok(Resolution { complex, augmentation, complete })
}

/// The matrix of degree-0 entry coefficients of a morphism (the induced map
/// on generators); invertibility of this matrix is invertibility of the
/// morphism.
pub fn scalar_part(f: &ModMorphism) -> Mat {
    let mut out = Mat::zero(f.source.field, f.target.rank(), f.source.rank());
    for s in 0..f.target.rank() {
        for t in 0..f.source.rank() {
            if f.target.twists[s] == f.source.twists[t] {
                out.set(s, t, f.entry(s, t).coeff(0));
            }
        }
    }
    out
}

fn zero_entries(source: &FreeModule, target: &FreeModule) -> Vec<Vec<ExtElement>> {
    let n = source.n;
    let field = source.field;
    (0..target.rank())
        .map(|s| {
            (0..source.rank())
                .map(|t| {
                    let q = (target.twists[s] - source.twists[t]).max(0) as usize;
                    ExtElement::zero(n, field, Variance::V, q)
                })
                .collect()
        })
        .collect()
}

/// Inverts a morphism whose scalar part is invertible, via the finite
/// Neumann series of the positive-degree remainder.
pub fn morphism_inverse(u: &ModMorphism) -> Option<ModMorphism> {
    if u.source.rank() != u.target.rank() {
        return None;
    }
    let n = u.source.n;
    let field = u.source.field;
    let s = scalar_part(u);
    let s_inv = s.inverse()?;
    let mut entries = zero_entries(&u.target, &u.source);
    for t in 0..u.source.rank() {
        for s_idx in 0..u.target.rank() {
            let c = s_inv.get(t, s_idx);
            if c.is_zero() {
                continue;
            }
            if u.source.twists[t] != u.target.twists[s_idx] {
                return None;
            }
            entries[t][s_idx] =
                ExtElement::from_terms(n, field, Variance::V, 0, [(0u32, c.clone())])
                    .ok()?;
        }
    }
    let s_inv_mor = ModMorphism::new(u.target.clone(), u.source.clone(), entries).ok()?;
    // u = S + N with N of positive degree: u⁻¹ = Σ (−S⁻¹N)^k S⁻¹.
    let mut s_entries = zero_entries(&u.source, &u.target);
    for s_idx in 0..u.target.rank() {
        for t in 0..u.source.rank() {
            let c = s.get(s_idx, t);
            if !c.is_zero() {
                s_entries[s_idx][t] =
                    ExtElement::from_terms(n, field, Variance::V, 0, [(0u32, c.clone())])
                        .ok()?;
            }
        }
    }
    let s_mor = ModMorphism::new(u.source.clone(), u.target.clone(), s_entries).ok()?;
    let n_mor = u.add(&s_mor.neg()).ok()?;
    let neg_t = s_inv_mor.compose(&n_mor).ok()?.neg();
    let mut result = s_inv_mor.clone();
    let mut power = neg_t.clone();
    while !power.is_zero() {
        result = result.add(&power.compose(&s_inv_mor).ok()?).ok()?;
        power = power.compose(&neg_t).ok()?;
    }
    let id_src = ModMorphism::identity(&u.source);
    let id_tgt = ModMorphism::identity(&u.target);
    if u.compose(&result).ok()? != id_tgt || result.compose(u).ok()? != id_src {
        return None;
    }
    Some(result)
}

fn random_scalar(field: Field, rng: &mut impl Rng) -> Scalar {
    match field {
        Field::Q => field.from_i64(rng.gen_range(-4..=4)),
        Field::Fp(p) => field.from_i64(rng.gen_range(0..p as i64)),
    }
}

fn random_nonzero(field: Field, rng: &mut impl Rng) -> Scalar {
    loop {
        let c = random_scalar(field, rng);
        if !c.is_zero() {
            return c;
        }
    }
}

/// One triangular factor: nonzero diagonal, scalar mixing on one side of
/// the diagonal within twist classes, random positive-degree entries.
fn triangular_automorphism(
    module: &FreeModule,
    upper: bool,
    rng: &mut impl Rng,
) -> ModMorphism {
    let n = module.n;
    let field = module.field;
    let r = module.rank();
    let mut entries = zero_entries(module, module);
    for s in 0..r {
        for t in 0..r {
            let gap = module.twists[s] - module.twists[t];
            if s == t {
                entries[s][t] = ExtElement::from_terms(
                    n,
                    field,
                    Variance::V,
                    0,
                    [(0u32, random_nonzero(field, rng))],
                )
                .expect("scalar entry");
            } else if gap == 0 && ((s < t) == upper) && rng.gen_bool(0.5) {
                entries[s][t] = ExtElement::from_terms(
                    n,
                    field,
                    Variance::V,
                    0,
                    [(0u32, random_scalar(field, rng))],
                )
                .expect("scalar entry");
            } else if gap >= 1 && gap <= n as i64 + 1 && rng.gen_bool(0.5) {
                let masks = basis_masks(n, gap as usize);
                let pick = masks[rng.gen_range(0..masks.len())];
                entries[s][t] = ExtElement::from_terms(
                    n,
                    field,
                    Variance::V,
                    gap as usize,
                    [(pick, random_scalar(field, rng))],
                )
                .expect("typed entry");
            }
        }
    }
    ModMorphism::new(module.clone(), module.clone(), entries).expect("typed")
}

/// A random invertible endomorphism: the product of an upper and a lower
/// triangular factor, each with nonzero diagonal scalar part.
pub fn random_automorphism(module: &FreeModule, rng: &mut impl Rng) -> ModMorphism {
    let upper = triangular_automorphism(module, true, rng);
    let lower = triangular_automorphism(module, false, rng);
    upper.compose(&lower).expect("endomorphisms compose")
}

/// Conjugates a complex by random automorphisms of its terms, producing an
/// isomorphic but differently presented complex on the same terms.
pub fn conjugate_complex(complex: &FreeComplex, rng: &mut impl Rng) -> FreeComplex {
    let mut autos: BTreeMap<i64, (ModMorphism, ModMorphism)> = BTreeMap::new();
    for &p in &complex.positions() {
        let u = random_automorphism(&complex.term(p), rng);
        let u_inv = morphism_inverse(&u).expect("automorphism inverts");
        autos.insert(p, (u, u_inv));
    }
    let mut terms = BTreeMap::new();
    let mut diffs = BTreeMap::new();
    for &p in &complex.positions() {
        terms.insert(p, complex.term(p));
        if autos.contains_key(&(p + 1)) {
            let d = complex.diff(p);
            if !d.is_zero() {
                let (u_next, _) = &autos[&(p + 1)];
                let (_, u_inv) = &autos[&p];
                let new_d = u_next
                    .compose(&d)
                    .and_then(|m| m.compose(u_inv))
                    .expect("conjugation is typed");
                diffs.insert(p, new_d);
            }
        }
    }
    FreeComplex::new(complex.n, complex.field, terms, diffs)
        .expect("conjugation preserves typing")
}

/// Outcome of the minimal-isomorphism decision.
#[derive(Clone, Debug)]
pub enum IsoOutcome {
    /// An explicit chain isomorphism, verified exactly.
    Isomorphic(BTreeMap<i64, ModMorphism>),
    /// Certified absence (invariant mismatch, or singular scalar parts on a
    /// spanning set plus random samples over ℚ).
    NotIsomorphic(String),
    /// Sampling found nothing but cannot certify absence (finite fields).
    Undetermined,
}

/// Decides chain isomorphism of two minimal bounded complexes. Positive
/// answers return the isomorphism; negatives are certified by invariant
/// mismatch or by sampling the chain-map solution space over ℚ.
pub fn is_isomorphic_minimal(
    g: &FreeComplex,
    h: &FreeComplex,
    samples: usize,
    seed: u64,
) -> Result<IsoOutcome> {
    if g.n != h.n || g.field != h.field {
        return Err(Error::InvalidArgument(
            "complexes live over different rings".into(),
        ));
    }
    if !is_minimal(g) || !is_minimal(h) {
        return Err(Error::NotMinimal(
            "isomorphism testing needs minimal complexes".into(),
        ));
    }
    let field = g.field;
    let mut positions = g.positions();
    for p in h.positions() {
        if !positions.contains(&p) {
            positions.push(p);
        }
    }
    positions.sort_unstable();
    if positions.is_empty() {
        return Ok(IsoOutcome::Isomorphic(BTreeMap::new()));
    }
    for &p in &positions {
        let mut a = g.term(p).twists.clone();
        let mut b = h.term(p).twists.clone();
        a.sort_unstable();
        b.sort_unstable();
        if a != b {
            return Ok(IsoOutcome::NotIsomorphic(format!(
                "term twist multisets differ at position {}",
                p
            )));
        }
    }

    // Unknowns: coordinates of f_p in hom_space_basis(G^p, H^p).
    let mut blocks: Vec<(i64, Vec<ModMorphism>, usize)> = Vec::new();
    let mut total = 0usize;
    for &p in &positions {
        let basis = hom_space_basis(&g.term(p), &h.term(p));
        let len = basis.len();
        blocks.push((p, basis, total));
        total += len;
    }
    // Equations: f_{p+1}∘d_G^p − d_H^p∘f_p = 0 in Hom(G^p, H^{p+1}).
    let mut rows_layout: Vec<(i64, usize)> = Vec::new();
    let mut row_total = 0usize;
    for &p in &positions {
        if !positions.contains(&(p + 1)) {
            continue;
        }
        let len = hom_space_basis(&g.term(p), &h.term(p + 1)).len();
        rows_layout.push((p, row_total));
        row_total += len;
    }
    let mut constraint = Mat::zero(field, row_total, total);
    for (p, basis, off) in &blocks {
        for (j, b) in basis.iter().enumerate() {
            // −d_H^p ∘ b at equation p.
            if let Some(&(_, roff)) = rows_layout.iter().find(|(q, _)| q == p) {
                let term = h.diff(*p).compose(b)?.neg();
                for (i, c) in morphism_coords(&term).into_iter().enumerate() {
                    if !c.is_zero() {
                        constraint.set(roff + i, off + j, c);
                    }
                }
            }
            // b ∘ d_G^{p−1} at equation p−1.
            if let Some(&(_, roff)) = rows_layout.iter().find(|(q, _)| *q == p - 1) {
                let term = b.compose(&g.diff(p - 1))?;
                for (i, c) in morphism_coords(&term).into_iter().enumerate() {
                    if !c.is_zero() {
                        constraint.set(roff + i, off + j, c);
                    }
                }
            }
        }
    }
    let kernel = constraint.kernel_basis();
    if kernel.is_empty() {
        return Ok(IsoOutcome::NotIsomorphic(
            "the only chain map is zero".into(),
        ));
    }

    let assemble = |coeffs: &[Scalar]| -> BTreeMap<i64, ModMorphism> {
        let mut out = BTreeMap::new();
        for (p, basis, off) in &blocks {
            let mut f = ModMorphism::zero(g.term(*p), h.term(*p));
            for (j, b) in basis.iter().enumerate() {
                let c = &coeffs[off + j];
                if !c.is_zero() {
                    f = f.add(&b.scale(c)).expect("typed sum");
                }
            }
            out.insert(*p, f);
        }
        out
    };
    let verify = |f: &BTreeMap<i64, ModMorphism>| -> Result<bool> {
        for (_, fp) in f {
            if scalar_part(fp).inverse().is_none() {
                return Ok(false);
            }
        }
        for &p in &positions {
            if !positions.contains(&(p + 1)) {
                continue;
            }
            let lhs = f[&(p + 1)].compose(&g.diff(p))?;
            let rhs = h.diff(p).compose(&f[&p])?;
            if lhs != rhs {
                return Ok(false);
            }
        }
        for (_, fp) in f {
            if morphism_inverse(fp).is_none() {
                return Ok(false);
            }
        }
        Ok(true)
    };

    let mut candidates: Vec<Vec<Scalar>> = Vec::new();
    for v in &kernel {
        candidates.push(v.clone());
    }
    let mut sum = vec![field.from_i64(0); total];
    for v in &kernel {
        for (i, c) in v.iter().enumerate() {
            sum[i] = sum[i].add(c);
        }
    }
    candidates.push(sum);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let mut combo = vec![field.from_i64(0); total];
        for v in &kernel {
            let c = random_scalar(field, &mut rng);
            if c.is_zero() {
                continue;
            }
            for (i, x) in v.iter().enumerate() {
                combo[i] = combo[i].add(&x.mul(&c));
            }
        }
        candidates.push(combo);
    }
    for coeffs in &candidates {
        let f = assemble(coeffs);
        if verify(&f)? {
            return Ok(IsoOutcome::Isomorphic(f));
        }
    }
    match field {
        Field::Q => Ok(IsoOutcome::NotIsomorphic(format!(
            "scalar parts singular on a spanning set and {} random samples",
            samples
        ))),
        Field::Fp(_) => Ok(IsoOutcome::Undetermined),
    }
}

/// The truncated section module Γ_{≥r}E over degrees r..=d_hi, with
/// multiplication maps lifted through the section kernels of σ^{≥0}L(G).
fn gamma_module(complex: &FreeComplex, r: i64, d_hi: i64) -> Result<SModule> {
    let n = complex.n;
    let field = complex.field;
    let l = l_of_complex(complex);
    let summands = l.term(0).to_vec();
    let mut kernels: BTreeMap<i64, Mat> = BTreeMap::new();
    for d in r..=d_hi {
        let sections = gamma_sections(&l, d);
        let dim = sections.dims.get(&0).copied().unwrap_or(0);
        let k = match sections.diffs.get(&0) {
            Some(m) => Mat::from_cols(field, dim, &m.kernel_basis()),
            None => Mat::identity(field, dim),
        };
        kernels.insert(d, k);
    }
    let mut pieces = BTreeMap::new();
    for (&d, k) in &kernels {
        pieces.insert(d, k.cols);
    }
    let mut mult = BTreeMap::new();
    for d in r..d_hi {
        let k_now = &kernels[&d];
        let k_next = &kernels[&(d + 1)];
        if k_now.cols == 0 {
            mult.insert(d, (0..=n).map(|_| Mat::zero(field, k_next.cols, 0)).collect());
            continue;
        }
        let rows: usize =
            summands.iter().map(|t| sections_dim(n, d + 1 + t.twist)).sum();
        let mut mats = Vec::with_capacity(n + 1);
        for v in 0..=n {
            // Section-level multiplication by x_v, block diagonal over the
            // summands of L⁰.
            let mut big = Mat::zero(field, rows, k_now.rows);
            let mut ro = 0usize;
            let mut co = 0usize;
            for t in &summands {
                let cdim = sections_dim(n, d + t.twist);
                let rdim = sections_dim(n, d + 1 + t.twist);
                if cdim > 0 {
                    let block =
                        SPoly::variable(n, field, v).mult_matrix((d + t.twist) as usize);
                    for bi in 0..rdim {
                        for bj in 0..cdim {
                            let c = block.get(bi, bj);
                            if !c.is_zero() {
                                big.set(ro + bi, co + bj, c.clone());
                            }
                        }
                    }
                }
                ro += rdim;
                co += cdim;
            }
            let img = big.mul(k_now)?;
            let sol = k_next
                .solve_mat(&img)?
                .ok_or_else(|| Error::Hypothesis("multiplication leaves the kernel".into()))?;
            if k_next.mul(&sol)? != img {
                return Err(Error::Hypothesis("multiplication leaves the kernel".into()));
            }
            mats.push(sol);
        }
        mult.insert(d, mats);
    }
    SModule::new(n, field, pieces, mult)
}

/// The truncation degree: one past the largest twist at which E has higher
/// cohomology, plus n.
pub fn regularity_bound(complex: &FreeComplex) -> Result<i64> {
    if !is_ht(complex) {
        return Err(Error::NotHt("regularity bound needs an HT-complex".into()));
    }
    let n = complex.n as i64;
    let strands = complex.strand_table();
    if strands.is_empty() {
        return Ok(0);
    }
    let mut top = strands.max_twist_in_strands(1, n - 1).unwrap();
    // Row n is monotone: h^n(E(d)) ≠ 0 exactly for d up to its own top.
    let l = l_of_complex(complex);
    let min_twist = l
        .positions()
        .iter()
        .filter(|&&s| s >= 0)
        .flat_map(|&s| l.term(s).iter().map(|t| t.twist))
        .min()
        .unwrap_or(0);
    let d_min = -n - min_twist;
    let floor = top - 8 * (n + 2);
    let mut d = d_min - 1;
    while d >= floor {
        let table = cohomology_table(complex, d, d)?;
        if table.get(n, d).unwrap_or(0) > 0 {
            top = top.max(d);
            break;
        }
        d -= 1;
    }
    Ok(top + n + 1)
}

/// A window of the Tate resolution of E = Z⁰L(G).
#[derive(Clone, Debug)]
pub struct TateWindow {
    pub complex: FreeComplex,
    pub p_lo: i64,
    pub p_hi: i64,
    /// Truncation degree of the section module the window grew from.
    pub r: i64,
    /// Middle cohomology (strand, twist) ↦ h^i(E(d)) of the source bundle.
    pub middle: StrandTable,
}

/// Builds the Tate window on positions [p_lo, p_hi] with the default
/// truncation degree.
pub fn tate_window(complex: &FreeComplex, p_lo: i64, p_hi: i64) -> Result<TateWindow> {
    tate_window_with(complex, p_lo, p_hi, None)
}

/// [`tate_window`] with an explicit truncation degree override.
pub fn tate_window_with(
    complex: &FreeComplex,
    p_lo: i64,
    p_hi: i64,
    r_override: Option<i64>,
) -> Result<TateWindow> {
    if !is_ht(complex) {
        return Err(Error::NotHt("Tate windows need an HT-complex".into()));
    }
    if p_lo > p_hi {
        return Err(Error::InvalidArgument("empty window".into()));
    }
    let n = complex.n;
    let field = complex.field;
    if complex.is_zero_complex() {
        return Ok(TateWindow {
            complex: FreeComplex::zero_complex(n, field),
            p_lo,
            p_hi,
            r: 0,
            middle: StrandTable::default(),
        });
    }
    let r = match r_override {
        Some(r) => r,
        None => regularity_bound(complex)?,
    };
    if p_hi > r + 48 {
        return Err(Error::InvalidArgument(format!(
            "window reaches into the unresolved right tail beyond degree {}",
            r + 48
        )));
    }
    let d_hi = (p_hi + 1).max(r + 1);
    let module = gamma_module(complex, r, d_hi)?;
    let tail = r_of_module(&module)?;

    // Kernel of the first tail differential, resolved leftward.
    let term_r = tail.term(r);
    let d_r = tail.diff(r);
    let ambient = free_to_graded(&term_r);
    let mut inclusions = BTreeMap::new();
    for &d in &ambient.support() {
        let basis = d_r.evaluate_degree(d).kernel_basis();
        if !basis.is_empty() {
            inclusions.insert(d, Mat::from_cols(field, ambient.dim(d), &basis));
        }
    }
    let kernel_module = induced_submodule(&ambient, &inclusions)?;
    let steps = (r - 1 - p_lo).max(0);
    let res = minimal_free_resolution(&kernel_module, steps)?;

    let mut terms: BTreeMap<i64, FreeModule> = BTreeMap::new();
    let mut diffs: BTreeMap<i64, ModMorphism> = BTreeMap::new();
    for p in p_lo..=p_hi {
        let t = if p >= r { tail.term(p) } else { res.complex.term(p - r + 1) };
        if t.rank() > 0 {
            terms.insert(p, t);
        }
    }
    for p in p_lo..p_hi {
        if !terms.contains_key(&p) || !terms.contains_key(&(p + 1)) {
            continue;
        }
        let d = if p >= r {
            tail.diff(p)
        } else if p == r - 1 {
            // Splice: F₀ ↠ ker(d^r) ↪ T^r, degree-wise.
            let f0 = res.complex.term(0);
            let mut maps = BTreeMap::new();
            for &d in &free_to_graded(&f0).support() {
                let inc = inclusions
                    .get(&d)
                    .cloned()
                    .unwrap_or_else(|| Mat::zero(field, ambient.dim(d), 0));
                let phi = res
                    .augmentation
                    .get(&d)
                    .cloned()
                    .unwrap_or_else(|| Mat::zero(field, 0, f0.graded_dimension(d)));
                maps.insert(d, inc.mul(&phi)?);
            }
            morphism_from_degreewise(&f0, &term_r, &maps)?
        } else {
            res.complex.diff(p - r + 1)
        };
        if !d.is_zero() {
            diffs.insert(p, d);
        }
    }
    let window = FreeComplex::new(n, field, terms, diffs)?;

    // Window invariants: minimal, interior-exact, and strands equal to the
    // independently computed cohomology table.
    if !crate::lamcomplex::verify_complex(&window).passed {
        return Err(Error::Hypothesis("window differentials do not compose to zero".into()));
    }
    if !is_minimal(&window) {
        return Err(Error::Hypothesis("window is not minimal".into()));
    }
    for (&(p, q), &dim) in &complex_cohomology_dims(&window) {
        if p > p_lo && p < p_hi && dim > 0 {
            return Err(Error::Hypothesis(format!(
                "window not exact at interior position {} degree {}",
                p, q
            )));
        }
    }
    let table = cohomology_table(complex, p_lo - n as i64, p_hi)?;
    let mut expected: BTreeMap<(i64, i64), usize> = BTreeMap::new();
    for i in 0..=n as i64 {
        for d in (p_lo - n as i64)..=p_hi {
            let p = i + d;
            if p < p_lo || p > p_hi {
                continue;
            }
            let h = table.get(i, d).unwrap_or(0);
            if h > 0 {
                expected.insert((i, d), h);
            }
        }
    }
    let mut actual: BTreeMap<(i64, i64), usize> = BTreeMap::new();
    for (i, d, m) in window.strand_table().support() {
        if m > 0 {
            actual.insert((i, d), m);
        }
    }
    if actual != expected {
        return Err(Error::Hypothesis(format!(
            "window strands disagree with the cohomology table: {:?} vs {:?}",
            actual, expected
        )));
    }

    Ok(TateWindow { complex: window, p_lo, p_hi, r, middle: complex.strand_table() })
}

/// Extracts the HT-complex F_{n−1}/F₀ from a window, after checking that no
/// middle strand is truncated by the window bounds.
pub fn extract_ht(window: &TateWindow) -> Result<FreeComplex> {
    let mut truncated = Vec::new();
    for (i, d, m) in window.middle.support() {
        if m == 0 {
            continue;
        }
        let p = i + d;
        if p < window.p_lo || p > window.p_hi {
            truncated.push(format!("strand {} at twist {} (position {})", i, d, p));
        }
    }
    if !truncated.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "window [{}, {}] truncates: {}",
            window.p_lo,
            window.p_hi,
            truncated.join(", ")
        )));
    }
    let g = quotient_f(&window.complex)?;
    if !is_ht(&g) {
        return Err(Error::Hypothesis("extracted quotient is not an HT-complex".into()));
    }
    Ok(g)
}

/// The Beilinson-monad terms of an HT-complex: per position p, pairs
/// (i, mult) meaning H^i_{p−i} ⊗ Ω^{i−p}(i−p).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BeilinsonReport {
    pub terms: BTreeMap<i64, Vec<(i64, usize)>>,
    /// Σ_p (−1)^p Σ mult·rank Ω^{i−p}(i−p).
    pub monad_rank: i64,
    /// Rank of the cohomology bundle, from the split-off computation.
    pub bundle_rank: u64,
}

/// Reads off the monad terms C^p = Z⁰L(G^p), after checking the vanishing
/// hypothesis H^p(G•)_{−1−p} = 0 for p < 0 and H^p(G•)_{−p} = 0 for p > 0.
pub fn beilinson_terms(complex: &FreeComplex) -> Result<BeilinsonReport> {
    if !is_ht(complex) {
        return Err(Error::NotHt("Beilinson terms need an HT-complex".into()));
    }
    for (&(p, q), &dim) in &complex_cohomology_dims(complex) {
        if dim == 0 {
            continue;
        }
        if (p < 0 && q == -1 - p) || (p > 0 && q == -p) {
            return Err(Error::Hypothesis(format!(
                "vanishing hypothesis fails: H^{}(G) has dimension {} in degree {}",
                p, dim, q
            )));
        }
    }
    let n = complex.n as i64;
    let mut terms: BTreeMap<i64, Vec<(i64, usize)>> = BTreeMap::new();
    let mut monad_rank = 0i64;
    for &p in &complex.positions() {
        let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
        for &a in &complex.term(p).twists {
            *counts.entry(p - a).or_insert(0) += 1;
        }
        let sign = if p.rem_euclid(2) == 0 { 1 } else { -1 };
        let mut list = Vec::new();
        for (&i, &m) in &counts {
            monad_rank += sign * m as i64 * crate::exactla::binomial(n, i - p) as i64;
            list.push((i, m));
        }
        terms.insert(p, list);
    }
    let z0 = crate::bgg::z0_rank(complex)?;
    let mut cancelled = 0usize;
    for &p in &complex.positions() {
        cancelled += complex.diff(p - 1).evaluate_degree(-p).rank();
    }
    let bundle_rank = z0
        .checked_sub(cancelled as u64)
        .ok_or_else(|| Error::Hypothesis("split rank exceeds kernel rank".into()))?;
    if monad_rank != bundle_rank as i64 {
        return Err(Error::Hypothesis(format!(
            "monad rank bookkeeping {} disagrees with bundle rank {}",
            monad_rank, bundle_rank
        )));
    }
    Ok(BeilinsonReport { terms, monad_rank, bundle_rank })
}

/// Connected components of the summand graph (nodes = summands, edges =
/// nonzero differential entries), each reported as (positions, size).
pub fn summand_components(complex: &FreeComplex) -> Vec<(Vec<i64>, usize)> {
    let positions = complex.positions();
    let mut nodes: Vec<(i64, usize)> = Vec::new();
    for &p in &positions {
        for t in 0..complex.term(p).rank() {
            nodes.push((p, t));
        }
    }
    let index = |p: i64, t: usize| nodes.iter().position(|&x| x == (p, t)).unwrap();
    let mut parent: Vec<usize> = (0..nodes.len()).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let root = find(parent, parent[i]);
            parent[i] = root;
        }
        parent[i]
    }
    for &p in &positions {
        if !positions.contains(&(p + 1)) {
            continue;
        }
        let d = complex.diff(p);
        for s in 0..d.target.rank() {
            for t in 0..d.source.rank() {
                if !d.entry(s, t).is_zero() {
                    let a = find(&mut parent, index(p, t));
                    let b = find(&mut parent, index(p + 1, s));
                    parent[a] = b;
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<(i64, usize)>> = BTreeMap::new();
    for (i, &(p, t)) in nodes.iter().enumerate() {
        groups.entry(find(&mut parent, i)).or_default().push((p, t));
    }
    groups
        .into_values()
        .map(|members| {
            let mut ps: Vec<i64> = members.iter().map(|&(p, _)| p).collect();
            ps.sort_unstable();
            ps.dedup();
            let size = members.len();
            (ps, size)
        })
        .collect()
}

/// True iff every connected component of the summand graph occupies a
/// contiguous interval of positions.
pub fn components_interval_supported(complex: &FreeComplex) -> bool {
    summand_components(complex).into_iter().all(|(ps, _)| {
        if ps.is_empty() {
            return true;
        }
        let lo = ps[0];
        let hi = ps[ps.len() - 1];
        (lo..=hi).all(|p| ps.contains(&p))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bgg::z0_rank;
    use crate::exterior::parse_element;
    use crate::lamcomplex::{
        random_ht_complex, random_minimal_complex, verify_complex, RandomHtParams,
    };
    use crate::minimize::{resolution_rank, section_homology_dims};

    fn q() -> Field {
        Field::Q
    }

    fn lam(n: usize, twists: &[i64]) -> FreeModule {
        FreeModule::new(n, q(), twists.to_vec())
    }

    fn single_term(n: usize, j: i64) -> FreeComplex {
        FreeComplex::new(
            n,
            q(),
            BTreeMap::from([(0, lam(n, &[-j]))]),
            BTreeMap::new(),
        )
        .unwrap()
    }

    fn null_correlation_seed() -> FreeComplex {
        let n = 3;
        let alpha = parse_element("e[0,1] + e[2,3]", n, q()).unwrap();
        let d = ModMorphism::new(lam(n, &[-3]), lam(n, &[-1]), vec![vec![alpha]])
            .unwrap();
        FreeComplex::new(
            n,
            q(),
            BTreeMap::from([(-1, lam(n, &[-3])), (0, lam(n, &[-1]))]),
            BTreeMap::from([(-1, d)]),
        )
        .unwrap()
    }

    #[test]
    fn resolution_of_free_module_is_itself() {
        let m = free_to_graded(&lam(2, &[0, -1]));
        let res = minimal_free_resolution(&m, 5).unwrap();
        assert!(res.complete);
        assert_eq!(res.complex.positions(), vec![0]);
        let f0 = res.complex.term(0);
        let mut twists = f0.twists.clone();
        twists.sort_unstable();
        assert_eq!(twists, vec![-1, 0]);
        for (&d, m_aug) in &res.augmentation {
            assert_eq!(m_aug.rank(), m.dim(d));
        }
    }

    #[test]
    fn resolution_of_ground_field_has_cartan_ranks() {
        // Over Λ on three variables the minimal resolution of k has free
        // ranks 1, 3, 6, 10.
        let n = 2;
        let m = GradedLambdaModule::new(
            n,
            q(),
            BTreeMap::from([(0, 1)]),
            BTreeMap::new(),
        )
        .unwrap();
        let res = minimal_free_resolution(&m, 3).unwrap();
        assert!(!res.complete);
        let ranks: Vec<usize> =
            (0..=3).map(|k| res.complex.term(-k).rank()).collect();
        assert_eq!(ranks, vec![1, 3, 6, 10]);
        assert!(verify_complex(&res.complex).passed);
        assert!(is_minimal(&res.complex));
        for steps in [0, 1] {
            let shorter = minimal_free_resolution(&m, steps).unwrap();
            assert_eq!(shorter.complex.positions().len() as i64, steps + 1);
        }
        assert!(minimal_free_resolution(&m, -1).is_err());
    }

    #[test]
    fn resolution_is_deterministic() {
        // Top two degrees of Λ∨(0): a non-free module with generators in
        // one degree.
        let n = 2;
        let ambient = free_to_graded(&lam(n, &[0]));
        let inclusions = BTreeMap::from([
            (-1, Mat::identity(q(), ambient.dim(-1))),
            (0, Mat::identity(q(), ambient.dim(0))),
        ]);
        let m = induced_submodule(&ambient, &inclusions).unwrap();
        let a = minimal_free_resolution(&m, 2).unwrap();
        let b = minimal_free_resolution(&m, 2).unwrap();
        assert_eq!(a.complex, b.complex);
        assert_eq!(a.augmentation, b.augmentation);
        assert_eq!(a.complex.term(0).rank(), n + 1);
        assert!(is_minimal(&a.complex));
        assert!(verify_complex(&a.complex).passed);
    }

    #[test]
    fn morphism_inverse_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for field in [Field::Q, Field::Fp(5)] {
            let module = FreeModule::new(3, field, vec![-2, -1, -1, 0]);
            for _ in 0..3 {
                let u = random_automorphism(&module, &mut rng);
                let inv = morphism_inverse(&u).expect("automorphism inverts");
                assert_eq!(u.compose(&inv).unwrap(), ModMorphism::identity(&module));
                assert_eq!(inv.compose(&u).unwrap(), ModMorphism::identity(&module));
            }
        }
    }

    #[test]
    fn iso_of_itself_and_permutation() {
        let g = null_correlation_seed();
        match is_isomorphic_minimal(&g, &g, 8, 1).unwrap() {
            IsoOutcome::Isomorphic(f) => {
                assert!(f.values().all(|m| morphism_inverse(m).is_some()));
            }
            other => panic!("expected isomorphism, got {:?}", other),
        }
        // Permuted summand order.
        let a = FreeComplex::new(
            3,
            q(),
            BTreeMap::from([(0, lam(3, &[-1, -2]))]),
            BTreeMap::new(),
        )
        .unwrap();
        let b = FreeComplex::new(
            3,
            q(),
            BTreeMap::from([(0, lam(3, &[-2, -1]))]),
            BTreeMap::new(),
        )
        .unwrap();
        assert!(matches!(
            is_isomorphic_minimal(&a, &b, 8, 1).unwrap(),
            IsoOutcome::Isomorphic(_)
        ));
    }

    #[test]
    fn iso_rejects_different_strands() {
        let a = single_term(3, 1);
        let b = single_term(3, 2);
        assert!(matches!(
            is_isomorphic_minimal(&a, &b, 4, 1).unwrap(),
            IsoOutcome::NotIsomorphic(_)
        ));
    }

    #[test]
    fn iso_recovers_conjugated_complexes() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [2usize, 3] {
            for _ in 0..3 {
                let g = random_ht_complex(n, q(), &mut rng, RandomHtParams::default());
                let h = conjugate_complex(&g, &mut rng);
                assert!(verify_complex(&h).passed);
                assert!(is_minimal(&h));
                match is_isomorphic_minimal(&g, &h, 16, 23).unwrap() {
                    IsoOutcome::Isomorphic(f) => {
                        for &p in &g.positions() {
                            if g.positions().contains(&(p + 1)) {
                                let lhs = f[&(p + 1)].compose(&g.diff(p)).unwrap();
                                let rhs = h.diff(p).compose(&f[&p]).unwrap();
                                assert_eq!(lhs, rhs);
                            }
                        }
                    }
                    other => panic!("expected isomorphism, got {:?}", other),
                }
            }
        }
    }

    #[test]
    fn tate_window_koszul_n2_matches_bott() {
        // G = Λ∨(−1) on n = 2: E = Ω¹(1).
        let g = single_term(2, 1);
        let w = tate_window(&g, -3, 3).unwrap();
        let strands = w.complex.strand_table();
        assert_eq!(strands.dim(1, -1), 1);
        assert_eq!(strands.dim(0, 1), 3);
        assert_eq!(strands.dim(0, 2), 8);
        assert_eq!(strands.dim(0, 3), 15);
        assert_eq!(strands.dim(2, -3), 3);
        assert_eq!(strands.dim(2, -4), 8);
        assert_eq!(strands.dim(2, -5), 15);
        assert_eq!(strands.dim(0, 0), 0);
        assert_eq!(strands.dim(2, -2), 0);
        // Roundtrip.
        let back = extract_ht(&w).unwrap();
        assert!(matches!(
            is_isomorphic_minimal(&back, &g, 8, 3).unwrap(),
            IsoOutcome::Isomorphic(_)
        ));
    }

    #[test]
    fn tate_roundtrip_null_correlation() {
        let g = null_correlation_seed();
        let w = tate_window(&g, -2, 2).unwrap();
        let back = extract_ht(&w).unwrap();
        assert!(matches!(
            is_isomorphic_minimal(&back, &g, 8, 5).unwrap(),
            IsoOutcome::Isomorphic(_)
        ));
    }

    #[test]
    fn extract_rejects_truncated_strands() {
        let g = null_correlation_seed();
        // Middle content sits at positions −1 and 0; a window missing −1
        // must refuse extraction.
        let w = tate_window(&g, 0, 2).unwrap();
        let err = extract_ht(&w).unwrap_err();
        let msg = format!("{}", err);
        assert!(msg.contains("position -1"), "{}", msg);
    }

    #[test]
    fn window_without_middle_extracts_zero() {
        // A window carrying only strand-0 content (here: the tail of the
        // truncated polynomial module placed by hand) extracts to zero.
        let m = SModule::truncated_polynomials(2, q(), 3);
        let tail = r_of_module(&m).unwrap();
        let w = TateWindow {
            complex: tail,
            p_lo: 0,
            p_hi: 2,
            r: 0,
            middle: StrandTable::default(),
        };
        let g = extract_ht(&w).unwrap();
        assert!(g.is_zero_complex());
    }

    #[test]
    fn beilinson_null_correlation() {
        let g = null_correlation_seed();
        let report = beilinson_terms(&g).unwrap();
        assert_eq!(report.terms.get(&-1), Some(&vec![(2, 1)]));
        assert_eq!(report.terms.get(&0), Some(&vec![(1, 1)]));
        // Rank bookkeeping: C(3,3) at p = −1 (sign −1) and C(3,1) at p = 0.
        assert_eq!(report.monad_rank, 2);
        assert_eq!(report.bundle_rank, 2);
    }

    #[test]
    fn beilinson_single_term() {
        let n = 3;
        for j in 1..n as i64 {
            let report = beilinson_terms(&single_term(n, j)).unwrap();
            assert_eq!(report.terms.get(&0), Some(&vec![(j, 1)]));
            assert_eq!(
                report.monad_rank,
                crate::exactla::binomial(n as i64, j) as i64
            );
        }
    }

    #[test]
    fn beilinson_rejects_hypothesis_violations() {
        let n = 3;
        // H^1(G)_{−1} ≠ 0: a lone summand at position 1.
        let g = FreeComplex::new(
            n,
            q(),
            BTreeMap::from([(1, lam(n, &[-1]))]),
            BTreeMap::new(),
        )
        .unwrap();
        let msg = format!("{}", beilinson_terms(&g).unwrap_err());
        assert!(msg.contains("H^1"), "{}", msg);
        // H^{−1}(G)_0 ≠ 0.
        let g = FreeComplex::new(
            n,
            q(),
            BTreeMap::from([(-1, lam(n, &[-2]))]),
            BTreeMap::new(),
        )
        .unwrap();
        let msg = format!("{}", beilinson_terms(&g).unwrap_err());
        assert!(msg.contains("H^-1"), "{}", msg);
    }

    #[test]
    fn quotient_preserves_stable_invariants() {
        // For a minimal bounded complex I with middle-strand quotient G,
        // the bundles Z⁰L(I) and Z⁰L(G) agree up to line bundles: the rank
        // difference is exactly the number of strand-0 and strand-n
        // summands dropped, and middle cohomology is unchanged.
        let n = 2usize;
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let mut done = 0;
        while done < 4 {
            let i = random_minimal_complex(n, q(), &mut rng, 2, 2, 2);
            if i.positions().is_empty() {
                continue;
            }
            let Ok(quot) = quotient_f(&i) else { continue };
            let rank_of = |c: &FreeComplex| -> i64 {
                c.strand_table()
                    .support()
                    .iter()
                    .map(|&(s, _, m)| {
                        crate::exactla::binomial(n as i64, s) as i64 * m as i64
                    })
                    .sum()
            };
            // Euler route agrees with the strand count on both complexes.
            assert_eq!(resolution_rank(&l_of_complex(&i)), rank_of(&i));
            assert_eq!(resolution_rank(&l_of_complex(&quot)), rank_of(&quot));
            let lines: i64 = i
                .strand_table()
                .support()
                .iter()
                .filter(|&&(s, _, _)| s == 0 || s == n as i64)
                .map(|&(_, _, m)| m as i64)
                .sum();
            assert_eq!(
                resolution_rank(&l_of_complex(&i)),
                resolution_rank(&l_of_complex(&quot)) + lines
            );
            let li = l_of_complex(&i);
            let lq = l_of_complex(&quot);
            for d in -3..=3 {
                let hi = section_homology_dims(&li, d);
                let hq = section_homology_dims(&lq, d);
                for pos in 1..n as i64 {
                    assert_eq!(
                        hi.get(&pos).copied().unwrap_or(0),
                        hq.get(&pos).copied().unwrap_or(0),
                        "d={} position={}",
                        d,
                        pos
                    );
                }
            }
            done += 1;
        }
    }

    #[test]
    fn components_are_interval_supported() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        assert!(components_interval_supported(&null_correlation_seed()));
        for _ in 0..4 {
            let g = random_ht_complex(3, q(), &mut rng, RandomHtParams::default());
            assert!(components_interval_supported(&g));
        }
        // Disconnected complex: components still occupy intervals, and the
        // zero position between them separates the supports.
        let g = FreeComplex::new(
            3,
            q(),
            BTreeMap::from([(0, lam(3, &[-1])), (3, lam(3, &[-2]))]),
            BTreeMap::new(),
        )
        .unwrap();
        let comps = summand_components(&g);
        assert_eq!(comps.len(), 2);
        assert!(components_interval_supported(&g));
    }

    #[test]
    fn window_respects_z0_rank() {
        let g = null_correlation_seed();
        let w = tate_window(&g, -2, 2).unwrap();
        let back = extract_ht(&w).unwrap();
        assert_eq!(z0_rank(&back).unwrap(), z0_rank(&g).unwrap());
    }
}
