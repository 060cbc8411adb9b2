//! Invariant bilinear and sesquilinear forms, opposite fields, antilinear
//! involutions, radicals and unitarity, and the extension of an invariant form
//! to vectors built from smeared fields.
//!
//! Gram matrices are built by the generator adjunction
//! `(g_n u₁, u₂) = (−1)^d (u₁, g_{−n} u₂)` for quasiprimary generators `g`,
//! with `(θg)_{−n}` in place of `g_{−n}` for the sesquilinear kind.

use num_complex::Complex64;
use num_traits::Signed;
use serde::Serialize;
use serde_json::{json, Value};

use crate::circle::{MoebiusElement, Reflection, TestFunction};
use crate::error::{Error, Result};
use crate::graded::{matrix_to_json, BlockOperator, GradedVector, WindowDiff};
use crate::linalg::{inertia, kernel, leading_minors, real_part, Mat};
use crate::scalar::{format_rational, rat, sign, Qc, Rational, Scalar};
use crate::vertex::{field_of_state, AxiomReport, Field, ModeTower, Model, ModelScalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FormKind {
    Bilinear,
    Sesquilinear,
}

/// Per-weight Gram matrices `G_w[i,j] = (e_i, e_j)` of a form on the
/// truncation; distinct weights pair to zero. The sesquilinear kind is linear
/// in the first argument.
#[derive(Clone, Debug, PartialEq)]
pub struct GramTower {
    kind: FormKind,
    normalization: Qc,
    matrices: Vec<Mat<Qc>>,
}

impl GramTower {
    pub fn from_matrices(kind: FormKind, matrices: Vec<Mat<Qc>>) -> Result<Self> {
        if matrices.is_empty() || matrices[0].shape() != (1, 1) {
            return Err(Error::Shape("Gram tower needs a 1×1 block at weight 0".into()));
        }
        if matrices.iter().any(|m| m.rows() != m.cols()) {
            return Err(Error::Shape("Gram blocks must be square".into()));
        }
        let normalization = matrices[0].get(0, 0).clone();
        Ok(GramTower { kind, normalization, matrices })
    }

    pub fn kind(&self) -> FormKind {
        self.kind
    }

    pub fn normalization(&self) -> &Qc {
        &self.normalization
    }

    pub fn matrices(&self) -> &[Mat<Qc>] {
        &self.matrices
    }

    pub fn matrix(&self, w: usize) -> &Mat<Qc> {
        &self.matrices[w]
    }

    pub fn max_weight(&self) -> usize {
        self.matrices.len() - 1
    }

    /// `(x, y)`, or `⟨x, y⟩ = Σ x^T G conj(y)` for the sesquilinear kind.
    pub fn pair<S: Scalar>(&self, x: &GradedVector<S>, y: &GradedVector<S>) -> S {
        let mut acc = S::zero();
        for (w, g) in self.matrices.iter().enumerate() {
            if x.weight_is_zero(w) || y.weight_is_zero(w) {
                continue;
            }
            let g: Mat<S> = g.map(S::from_qc);
            let yw: Vec<S> = match self.kind {
                FormKind::Bilinear => y.component(w).to_vec(),
                FormKind::Sesquilinear => y.component(w).iter().map(Scalar::conj).collect(),
            };
            let gy = g.mat_vec(&yw);
            for (a, b) in x.component(w).iter().zip(&gy) {
                acc = acc.add_ref(&a.mul_ref(b));
            }
        }
        acc
    }

    /// Exact symmetry (bilinear) or Hermitian symmetry (sesquilinear) of every block.
    pub fn is_symmetric(&self) -> bool {
        self.matrices.iter().all(|g| match self.kind {
            FormKind::Bilinear => g == &g.transpose(),
            FormKind::Sesquilinear => g == &g.adjoint(),
        })
    }

    pub fn to_json(&self, model: &Model) -> Value {
        let weights: Vec<Value> = self
            .matrices
            .iter()
            .enumerate()
            .map(|(w, g)| {
                json!({
                    "weight": w,
                    "dim": g.rows(),
                    "basis": model.space().labels(w),
                    "matrix": matrix_to_json(g),
                    "kernel_dim": kernel(g, 0.0).len(),
                })
            })
            .collect();
        json!({
            "kind": self.kind,
            "normalization": self.normalization.to_string(),
            "weights": weights,
        })
    }
}

/// Antilinear map `θ(x) = T_w conj(x)` on each weight space, fixed by the
/// images of the generators.
#[derive(Clone, Debug, PartialEq)]
pub struct Involution {
    /// Column `g` holds the coordinates of `θ(g)` over the generators.
    images: Mat<Qc>,
    blocks: Vec<Mat<Qc>>,
}

impl Involution {
    /// Extends `θ(g) = Σ_h images[h][g] h` to the whole truncation by
    /// `θ(g_n R) = (θg)_n θ(R)` along the basis words. Images may only mix
    /// generators of equal dimension.
    pub fn new(model: &Model, images: Mat<Qc>) -> Result<Self> {
        let gens = model.generators();
        if images.shape() != (gens.len(), gens.len()) {
            return Err(Error::Shape(format!("θ needs a {0}×{0} generator matrix", gens.len())));
        }
        for g in 0..gens.len() {
            for h in 0..gens.len() {
                if !images.get(h, g).is_zero() && gens[h].dim() != gens[g].dim() {
                    return Err(Error::Structural(format!(
                        "θ({}) involves {} of a different dimension",
                        gens[g].name(),
                        gens[h].name()
                    )));
                }
            }
        }
        let mut blocks: Vec<Mat<Qc>> = Vec::with_capacity(model.dims().len());
        for (w, &dw) in model.dims().iter().enumerate() {
            if w == 0 {
                blocks.push(Mat::identity(dw));
                continue;
            }
            let mut cols = Vec::with_capacity(dw);
            for i in 0..dw {
                let word = model.word(w, i);
                let (&(g, n), rest) = word.split_first().expect("positive weight words are nonempty");
                let r = model.word_vector(rest);
                let wr = (w as i64 + n) as usize;
                let theta_r: Vec<Qc> = blocks[wr].mat_vec(&r.component(wr).iter().map(Scalar::conj).collect::<Vec<_>>());
                let mut col = vec![Qc::zero(); dw];
                for (h, gen) in gens.iter().enumerate() {
                    let t = images.get(h, g);
                    if t.is_zero() {
                        continue;
                    }
                    let y = gen.mode(n).block_or_zero(wr, w).mat_vec(&theta_r);
                    for (c, yk) in col.iter_mut().zip(&y) {
                        *c = &*c + &(t * yk);
                    }
                }
                cols.push(col);
            }
            blocks.push(Mat::from_columns(dw, &cols));
        }
        Ok(Involution { images, blocks })
    }

    /// Identity on generators: `θg = g`.
    pub fn trivial(model: &Model) -> Self {
        Involution::new(model, Mat::identity(model.generators().len())).expect("identity is admissible")
    }

    /// `θg = −g` on every generator.
    pub fn negation(model: &Model) -> Self {
        let n = model.generators().len();
        Involution::new(model, Mat::identity(n).scale(&Qc::int(-1))).expect("negation is admissible")
    }

    pub fn images(&self) -> &Mat<Qc> {
        &self.images
    }

    pub fn block(&self, w: usize) -> &Mat<Qc> {
        &self.blocks[w]
    }

    pub fn apply(&self, v: &GradedVector<Qc>) -> GradedVector<Qc> {
        let comps = (0..self.blocks.len())
            .map(|w| self.blocks[w].mat_vec(&v.component(w).iter().map(Scalar::conj).collect::<Vec<_>>()))
            .collect();
        GradedVector::from_components(&v.dims(), comps).expect("dims").with_tail(v.tail())
    }

    /// `θ² = id`: `T conj(T) = I` on every weight.
    pub fn is_involutive(&self) -> bool {
        self.blocks.iter().all(|t| t.matmul(&t.conj()) == Mat::identity(t.rows()))
    }

    /// `θ ∘ g_n = (θg)_n ∘ θ` on weights ≤ `window`, for every generator and mode.
    pub fn automorphism_check(&self, model: &Model, window: usize) -> WindowDiff {
        let mut d = WindowDiff::empty();
        let gens = model.generators();
        let dims = model.dims();
        for (g, gen) in gens.iter().enumerate() {
            for n in gen.tower().range() {
                let lhs = BlockOperator::homogeneous(dims, -n, |src, dst| {
                    Some(self.blocks[dst].matmul(&gen.mode(n).block_or_zero(src, dst).conj()))
                });
                let rhs = BlockOperator::homogeneous(dims, -n, |src, dst| {
                    let mut acc = Mat::zeros(dims[dst], dims[src]);
                    for (h, hgen) in gens.iter().enumerate() {
                        let t = self.images.get(h, g);
                        if !t.is_zero() {
                            acc = acc.add(&hgen.mode(n).block_or_zero(src, dst).matmul(&self.blocks[src]).scale(t));
                        }
                    }
                    Some(acc)
                });
                d = d.merge(lhs.window_diff(&rhs, window));
            }
        }
        d
    }
}

/// Modes of `Y^o(v, z) = Y(e^{zL₁}(−z^{−2})^{L₀} v, z^{−1})`:
/// `v^o_n = (−1)^d Σ_k (L₁^k v)_{−n} / k!`, which is `(−1)^d v_{−n}` for
/// quasiprimary `v`. Non-quasiprimary terms use fields of states.
pub fn opposite_tower(model: &Model, field: &Field) -> Result<ModeTower<Qc>> {
    let d = field.dim() as i64;
    let dims = model.dims();
    let s = Qc::int(sign(d));
    let mut terms: Vec<(Field, Qc)> = vec![(field.clone(), s.clone())];
    let mut v = field.state().clone();
    let mut fact = Rational::from_integer(1.into());
    for k in 1..=d {
        v = model.l(1).apply(&v)?;
        if v.is_zero() {
            break;
        }
        fact *= Rational::from_integer(k.into());
        let f = field_of_state(model, &v, None)?;
        terms.push((f, &s * &Qc::real(fact.recip())));
    }
    Ok(ModeTower::from_fn(field.dim(), dims, |n| {
        let mut op = BlockOperator::zero_with_shift(dims, -n);
        for (f, c) in &terms {
            op = op.add_scaled(&f.mode(-n), c);
        }
        op
    }))
}

fn generator_sign(gen: &Field) -> Qc {
    Qc::int(sign(gen.dim() as i64))
}

/// Builds the Gram tower of the invariant form with `(Ω, Ω) = norm`. The
/// sesquilinear kind needs `θ` and checks that it is an involutive
/// automorphism first.
pub fn build_invariant_form(model: &Model, kind: FormKind, norm: Qc, theta: Option<&Involution>) -> Result<GramTower> {
    let gens = model.generators();
    let owned;
    let theta = match (kind, theta) {
        (FormKind::Bilinear, _) => None,
        (FormKind::Sesquilinear, Some(t)) => Some(t),
        (FormKind::Sesquilinear, None) => {
            owned = Involution::trivial(model);
            Some(&owned)
        }
    };
    if let Some(t) = theta {
        if !t.is_involutive() {
            return Err(Error::Structural("θ is not an involution".into()));
        }
        if !t.automorphism_check(model, model.max_weight()).exact {
            return Err(Error::Structural("θ does not intertwine the generator modes".into()));
        }
    }
    let mut mats: Vec<Mat<Qc>> = vec![Mat::from_rows(vec![vec![norm.clone()]])];
    for w in 1..model.dims().len() {
        let dw = model.dims()[w];
        let mut rows = Vec::with_capacity(dw);
        for i in 0..dw {
            let word = model.word(w, i);
            let (&(g, n), rest) = word.split_first().expect("nonempty word");
            let wr = (w as i64 + n) as usize;
            let r = model.word_vector(rest);
            let rg: Vec<Qc> = mats[wr].vec_mat(r.component(wr));
            let s = generator_sign(&gens[g]);
            let mut row = vec![Qc::zero(); dw];
            match theta {
                None => {
                    let m = gens[g].mode(-n).block_or_zero(w, wr);
                    for (o, x) in row.iter_mut().zip(m.vec_mat(&rg)) {
                        *o = &*o + &(&s * &x);
                    }
                }
                Some(t) => {
                    for (h, hgen) in gens.iter().enumerate() {
                        let c = t.images().get(h, g);
                        if c.is_zero() {
                            continue;
                        }
                        let m = hgen.mode(-n).block_or_zero(w, wr).conj();
                        let f = &s * &c.conj();
                        for (o, x) in row.iter_mut().zip(m.vec_mat(&rg)) {
                            *o = &*o + &(&f * &x);
                        }
                    }
                }
            }
            rows.push(row);
        }
        mats.push(if dw == 0 { Mat::zeros(0, 0) } else { Mat::from_rows(rows) });
    }
    GramTower::from_matrices(kind, mats)
}

/// Compares `A^T G` with `G B` (bilinear) or `G conj(B)` (sesquilinear)
/// block by block: the adjunction `(a x, y) = (x, b y)`.
fn adjunction_diff(gram: &GramTower, a: &BlockOperator<Qc>, b: &BlockOperator<Qc>, window: usize) -> WindowDiff {
    let mut d = WindowDiff::empty();
    let top = window.min(gram.max_weight());
    for src in 0..=top {
        for dst in 0..=top {
            let ab = a.block(src, dst);
            let bb = b.block(dst, src);
            if ab.is_none() && bb.is_none() {
                continue;
            }
            if a.is_broken(src, dst) || b.is_broken(dst, src) {
                d.skipped += 1;
                continue;
            }
            let lhs = a.block_or_zero(src, dst).transpose().matmul(gram.matrix(dst));
            let bm = b.block_or_zero(dst, src);
            let bm = if gram.kind() == FormKind::Sesquilinear { bm.conj() } else { bm };
            let rhs = gram.matrix(src).matmul(&bm);
            let diff = lhs.sub(&rhs);
            d.compared += 1;
            d.exact &= diff.is_zero();
            d.max = d.max.max(diff.max_abs());
        }
    }
    d
}

/// Invariance of a Gram tower on the trusted window: mode adjunction for every
/// generator, `L_n`-adjunction for `n ∈ {−1,0,1}`, and the opposite-field
/// adjunction `(v_n x, y) = (x, v^o_n y)` for each field in `extra`.
pub fn invariance_check(model: &Model, gram: &GramTower, theta: Option<&Involution>, extra: &[Field]) -> Result<AxiomReport> {
    let window = model.window();
    let mut r = AxiomReport::new("invariance", window);
    if gram.kind() == FormKind::Sesquilinear && theta.is_none() {
        return Err(Error::KindMismatch { expected: "bilinear" });
    }
    let gens = model.generators();
    for (g, gen) in gens.iter().enumerate() {
        for n in gen.tower().range() {
            let rhs = match theta {
                None => gen.mode(-n).scale(&generator_sign(gen)),
                Some(t) => {
                    let mut acc = BlockOperator::zero_with_shift(model.dims(), n);
                    for (h, hgen) in gens.iter().enumerate() {
                        let c = t.images().get(h, g);
                        if !c.is_zero() {
                            // adjunction_diff conjugates the whole right side for this kind
                            acc = acc.add_scaled(&hgen.mode(-n), c);
                        }
                    }
                    acc.scale(&generator_sign(gen))
                }
            };
            r.record_ops(|| format!("({}_{n} x, y) adjunction", gen.name()), adjunction_diff(gram, &gen.mode(n), &rhs, window));
        }
    }
    for m in -1..=1 {
        r.record_ops(|| format!("(L_{m} x, y) = (x, L_{} y)", -m), adjunction_diff(gram, model.l(m), model.l(-m), window));
    }
    if gram.kind() == FormKind::Bilinear {
        for f in extra {
            let opp = opposite_tower(model, f)?;
            for n in f.tower().range() {
                r.record_ops(|| format!("({}_{n} x, y) = (x, {}^o_{n} y)", f.name(), f.name()), adjunction_diff(gram, &f.mode(n), &opp.mode(n), window));
            }
        }
    }
    Ok(r)
}

/// `(U(γ)x, U(α(γ))y) = (x, y)` on the trusted window: largest entry of
/// `U(γ)^T G U(αγ) − G`.
pub fn group_invariance_deviation(model: &Model, gram: &GramTower, gamma: &MoebiusElement) -> Result<f64> {
    if gram.kind() != FormKind::Bilinear {
        return Err(Error::KindMismatch { expected: "bilinear" });
    }
    let u = crate::wightman::u_of_gamma(model, gamma)?;
    let ua = crate::wightman::u_of_gamma(model, &gamma.alpha())?;
    let window = model.window();
    let mut dev: f64 = 0.0;
    for src in 0..=window {
        for dst in 0..=window {
            let mut acc = Mat::<Complex64>::zeros(model.dims()[src], model.dims()[dst]);
            for w in 0..=model.max_weight() {
                let (Some(a), Some(b)) = (u.operator().block(src, w), ua.operator().block(dst, w)) else { continue };
                acc = acc.add(&a.transpose().matmul(&gram.matrix(w).to_c64()).matmul(b));
            }
            if src == dst {
                acc = acc.sub(&gram.matrix(src).to_c64());
            }
            dev = dev.max(acc.max_abs());
        }
    }
    Ok(dev)
}

pub fn radical(gram: &GramTower) -> Vec<Vec<Vec<Qc>>> {
    gram.matrices().iter().map(|g| kernel(g, 0.0)).collect()
}

pub fn radical_dims(gram: &GramTower) -> Vec<usize> {
    radical(gram).iter().map(Vec::len).collect()
}

/// Verdict of [`involutive_structure_check`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvolutiveReport {
    pub involutive: bool,
    pub automorphism: bool,
    pub preserves_form: bool,
    pub hermitian: bool,
    /// The bilinear form `(x, y) = ⟨x, θy⟩` passes the invariance check.
    pub composite_invariant: bool,
    pub vacuum_normalized: bool,
    /// Exact leading principal minors per weight (real for Hermitian blocks).
    #[serde(serialize_with = "ser_minors")]
    pub minors: Vec<Vec<Rational>>,
    /// `(positive, negative, zero)` eigenvalue counts per weight.
    pub inertia: Vec<(usize, usize, usize)>,
    /// First `(weight, k)` whose k-th leading minor is not positive.
    pub first_failing_minor: Option<(usize, usize)>,
    pub positive_semidefinite: bool,
    pub unitary: bool,
}

fn ser_minors<S: serde::Serializer>(m: &[Vec<Rational>], s: S) -> std::result::Result<S::Ok, S::Error> {
    let v: Vec<Vec<String>> = m.iter().map(|r| r.iter().map(format_rational).collect()).collect();
    v.serialize(s)
}

impl InvolutiveReport {
    pub fn pass(&self) -> bool {
        self.involutive && self.automorphism && self.preserves_form && self.hermitian && self.composite_invariant
    }
}

/// Checks the involutive structure `(θ, ⟨·,·⟩)` and decides unitarity exactly:
/// positive definite iff every leading principal minor is positive, with the
/// inertia recorded so null directions of a semidefinite form show up.
pub fn involutive_structure_check(model: &Model, theta: &Involution, gram: &GramTower) -> Result<InvolutiveReport> {
    if gram.kind() != FormKind::Sesquilinear {
        return Err(Error::KindMismatch { expected: "sesquilinear" });
    }
    let window = model.window();
    let preserves_form = gram.matrices().iter().enumerate().all(|(w, h)| {
        let t = theta.block(w);
        t.transpose().matmul(h).matmul(&t.conj()) == h.conj()
    });
    let composite = GramTower::from_matrices(
        FormKind::Bilinear,
        gram.matrices().iter().enumerate().map(|(w, h)| h.matmul(&theta.block(w).conj())).collect(),
    )?;
    let composite_invariant = composite.is_symmetric() && invariance_check(model, &composite, None, &[])?.pass();
    let mut minors = Vec::new();
    let mut inertias = Vec::new();
    let mut first_failing_minor = None;
    for (w, h) in gram.matrices().iter().enumerate() {
        let ms: Vec<Rational> = leading_minors(h).iter().map(|m| real_part(m).clone()).collect();
        if first_failing_minor.is_none() {
            if let Some(k) = ms.iter().position(|m| !m.is_positive()) {
                first_failing_minor = Some((w, k + 1));
            }
        }
        minors.push(ms);
        inertias.push(inertia(h));
    }
    let positive_semidefinite = inertias.iter().all(|&(_, neg, _)| neg == 0);
    let vacuum_normalized = gram.normalization() == &Qc::int(1);
    Ok(InvolutiveReport {
        involutive: theta.is_involutive(),
        automorphism: theta.automorphism_check(model, window).exact,
        preserves_form,
        hermitian: gram.is_symmetric(),
        composite_invariant,
        vacuum_normalized,
        minors,
        inertia: inertias,
        first_failing_minor,
        positive_semidefinite,
        unitary: first_failing_minor.is_none() && vacuum_normalized,
    })
}

/// One letter `φ(f)` of a smeared word.
pub type SmearedLetter<'a> = (&'a Field, &'a TestFunction);

/// The three evaluations of `(φ₁(f₁)⋯φ_k(f_k)Ω, ψ₁(g₁)⋯ψ_ℓ(g_ℓ)Ω)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SmearedPairing<S> {
    /// Gram pairing of the two vectors.
    pub direct: S,
    /// `(ψ^o(g_ℓ)⋯ψ^o(g₁)φ₁(f₁)⋯φ_k(f_k)Ω, Ω)`.
    pub left: S,
    /// `(Ω, φ^o(f_k)⋯φ^o(f₁)ψ₁(g₁)⋯ψ_ℓ(g_ℓ)Ω)`.
    pub right: S,
}

impl SmearedPairing<Complex64> {
    pub fn max_deviation(&self) -> f64 {
        (self.left - self.direct).norm().max((self.right - self.direct).norm())
    }
}

fn smear_tower<S: ModelScalar>(tower: &ModeTower<S>, f: &TestFunction) -> BlockOperator<S> {
    let coeffs: Vec<(i64, S)> = f.coeffs().map(|(n, c)| (n, S::from_c64(c))).collect();
    tower.smear(&coeffs)
}

/// `ψ^o(g) = (−1)^d ψ(g ∘ 1/z) = Σ ĝ(m) ψ^o_m`.
fn opposite_smeared<S: ModelScalar>(f: &Field, g: &TestFunction) -> BlockOperator<S> {
    let op = smear_tower(S::tower(f), &g.reflect(Reflection::Invert));
    op.scale(&S::from_i64(sign(f.dim() as i64)))
}

fn apply_word<S: ModelScalar>(model: &Model, word: &[SmearedLetter], opposite: bool, start: GradedVector<S>) -> Result<GradedVector<S>> {
    let mut v = start;
    let iter: Box<dyn Iterator<Item = &SmearedLetter>> = if opposite { Box::new(word.iter()) } else { Box::new(word.iter().rev()) };
    for (f, g) in iter {
        let op = if opposite { opposite_smeared::<S>(f, g) } else { smear_tower(S::tower(f), g) };
        v = op.apply(&v)?;
        if v.tail() {
            return Err(Error::Inconclusive(format!(
                "smeared word reaches weights above {} before pairing",
                model.max_weight()
            )));
        }
    }
    Ok(v)
}

/// Extends a bilinear invariant form to vectors built from smeared fields and
/// evaluates it three ways. Quasiprimary fields only: the opposite of a
/// smeared field is taken as `(−1)^d φ(f ∘ 1/z)`.
pub fn extend_form_to_smeared<S: ModelScalar>(
    model: &Model,
    gram: &GramTower,
    phis: &[SmearedLetter],
    psis: &[SmearedLetter],
) -> Result<SmearedPairing<S>> {
    if gram.kind() != FormKind::Bilinear {
        return Err(Error::KindMismatch { expected: "bilinear" });
    }
    let vac = S::vacuum(model);
    let a = apply_word(model, phis, false, vac.clone())?;
    let b = apply_word(model, psis, false, vac.clone())?;
    let direct = gram.pair(&a, &b);
    // ψ^o(g₁) acts first on the φ-vector, ψ^o(g_ℓ) last.
    let x = apply_word(model, psis, true, a)?;
    let left = gram.pair(&x, &vac);
    let y = apply_word(model, phis, true, b)?;
    let right = gram.pair(&vac, &y);
    Ok(SmearedPairing { direct, left, right })
}

/// `(φ(f)x, y) = (x, φ^o(f) y)` for a quasiprimary generator and a test
/// function, as the largest deviation of `A^T G − G B` on the window.
pub fn smeared_adjunction_deviation(model: &Model, gram: &GramTower, field: &Field, f: &TestFunction) -> f64 {
    let a = smear_tower(field.float_tower(), f);
    let b = opposite_smeared::<Complex64>(field, f);
    let window = model.window();
    let mut dev: f64 = 0.0;
    for src in 0..=window {
        for dst in 0..=window {
            if a.is_broken(src, dst) || b.is_broken(dst, src) {
                continue;
            }
            let lhs = a.block_or_zero(src, dst).transpose().matmul(&gram.matrix(dst).to_c64());
            let rhs = gram.matrix(src).to_c64().matmul(&b.block_or_zero(dst, src));
            dev = dev.max(lhs.max_abs_diff(&rhs));
        }
    }
    dev
}

/// Level-2 Virasoro oracle value `(L₋₂Ω, L₋₂Ω) = c/2`.
pub fn virasoro_level_two(c: &Rational) -> Rational {
    c * rat(1, 2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heisenberg_level_one() {
        let m = Model::heisenberg(4);
        let b = build_invariant_form(&m, FormKind::Bilinear, Qc::int(1), None).unwrap();
        assert_eq!(b.matrix(1).get(0, 0), &Qc::int(-1));
        let t = Involution::negation(&m);
        let h = build_invariant_form(&m, FormKind::Sesquilinear, Qc::int(1), Some(&t)).unwrap();
        assert_eq!(h.matrix(1).get(0, 0), &Qc::int(1));
        assert!(b.is_symmetric() && h.is_symmetric());
    }

    #[test]
    fn virasoro_level_two_and_kernel() {
        let c = rat(-22, 5);
        let m = Model::virasoro(&c, 4, false);
        let b = build_invariant_form(&m, FormKind::Bilinear, Qc::int(1), None).unwrap();
        assert_eq!(b.matrix(2).get(0, 0), &Qc::real(rat(-11, 5)));
        assert_eq!(radical_dims(&b), vec![0, 0, 0, 0, 1]);
    }

    #[test]
    fn invariance_holds() {
        let m = Model::virasoro(&rat(1, 2), 8, false);
        let b = build_invariant_form(&m, FormKind::Bilinear, Qc::int(1), None).unwrap();
        let r = invariance_check(&m, &b, None, &[]).unwrap();
        assert!(r.pass(), "{:?}", r.violations);
    }

    #[test]
    fn opposite_of_quasiprimary() {
        let m = Model::heisenberg(5);
        let j = &m.generators()[0];
        let o = opposite_tower(&m, j).unwrap();
        for n in -3..=3 {
            let d = o.mode(n).window_diff(&j.mode(-n).scale(&Qc::int(-1)), 5);
            assert!(d.exact && d.skipped == 0, "n = {n}");
        }
    }

    #[test]
    fn kind_mismatch() {
        let m = Model::heisenberg(3);
        let b = build_invariant_form(&m, FormKind::Bilinear, Qc::int(1), None).unwrap();
        assert!(matches!(involutive_structure_check(&m, &Involution::negation(&m), &b), Err(Error::KindMismatch { .. })));
    }
}
