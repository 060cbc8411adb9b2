//! Truncated Möbius vertex algebras: the built-in models, their generator
//! fields, and the mode-level identities (Borcherds product and commutator
//! formulas, locality, covariance under L₋₁, L₀, L₁).
//!
//! Modes are degree-shifted throughout, `v_n = v_(n+d−1)`, so `v_n` maps
//! `V(m)` to `V(m−n)`. The Borcherds formulas are stated for the unshifted
//! modes `v_(m)`; [`ModeTower::mode_unshifted`] converts.

mod borcherds;
mod checks;
pub mod seed;

use std::borrow::Cow;
use std::collections::HashMap;
use std::sync::OnceLock;

use num_complex::Complex64;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::forms::{self, FormKind};
use crate::graded::{BlockOperator, GradedSpace, GradedVector, JsonScalar};
use crate::linalg::{rref, solve, Mat};
use crate::scalar::{format_rational, Qc, Rational, Scalar};

pub use borcherds::{borcherds_commutator, borcherds_product, field_of_state, locality_order_check, LocalityReport};
pub use checks::{creation_check, mobius_axiom_check, sl2_relations_check, AxiomReport, Violation};
use seed::{heisenberg_seed, monomial_basis, virasoro_seed, Letter, Mono, Seed, Straightener};

/// Creation word `[(generator, shifted mode), …]`, leftmost applied last.
pub type Word = Vec<Letter>;

/// One field's degree-shifted modes `v_n`, `|n| ≤ N`. Modes outside that range
/// are zero on the truncation (lowering) or leave it entirely (raising).
#[derive(Clone, Debug, PartialEq)]
pub struct ModeTower<S> {
    dim: usize,
    dims: Vec<usize>,
    modes: Vec<BlockOperator<S>>,
}

impl<S: Scalar> ModeTower<S> {
    /// `modes[i]` is the mode `n = i − N`.
    pub fn new(dim: usize, dims: &[usize], modes: Vec<BlockOperator<S>>) -> Result<Self> {
        let n = dims.len() - 1;
        if modes.len() != 2 * n + 1 {
            return Err(Error::Shape(format!("tower needs {} modes, got {}", 2 * n + 1, modes.len())));
        }
        for (i, m) in modes.iter().enumerate() {
            if m.dims() != dims {
                return Err(Error::Shape("tower mode has wrong dims".into()));
            }
            if let Some(s) = m.shift() {
                if !m.is_zero() && s != n as i64 - i as i64 {
                    return Err(Error::Shape(format!("mode {} shifts weight by {s}", i as i64 - n as i64)));
                }
            }
        }
        Ok(ModeTower { dim, dims: dims.to_vec(), modes })
    }

    pub fn from_fn(dim: usize, dims: &[usize], mut f: impl FnMut(i64) -> BlockOperator<S>) -> Self {
        let n = dims.len() as i64 - 1;
        ModeTower { dim, dims: dims.to_vec(), modes: (-n..=n).map(&mut f).collect() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn max_weight(&self) -> usize {
        self.dims.len() - 1
    }

    /// Degree-shifted mode `v_n`.
    pub fn mode(&self, n: i64) -> Cow<'_, BlockOperator<S>> {
        let top = self.max_weight() as i64;
        if n.abs() <= top {
            Cow::Borrowed(&self.modes[(n + top) as usize])
        } else {
            Cow::Owned(BlockOperator::zero_with_shift(&self.dims, -n))
        }
    }

    /// Unshifted mode `v_(m) = v_{m−d+1}`.
    pub fn mode_unshifted(&self, m: i64) -> Cow<'_, BlockOperator<S>> {
        self.mode(m - self.dim as i64 + 1)
    }

    pub fn range(&self) -> std::ops::RangeInclusive<i64> {
        let top = self.max_weight() as i64;
        -top..=top
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T + Copy) -> ModeTower<T> {
        ModeTower { dim: self.dim, dims: self.dims.clone(), modes: self.modes.iter().map(|m| m.map(f)).collect() }
    }

    /// `Σ coeffs[n] v_n`.
    pub fn smear(&self, coeffs: &[(i64, S)]) -> BlockOperator<S> {
        let mut op = BlockOperator::zero(&self.dims);
        for (n, c) in coeffs {
            if c.is_zero() {
                continue;
            }
            op = op.add_scaled(&self.mode(*n), c);
        }
        op
    }
}

/// A named field with its state (for fields built from states) and tower.
#[derive(Clone, Debug)]
pub struct Field {
    name: String,
    state: GradedVector<Qc>,
    tower: ModeTower<Qc>,
    float_tower: OnceLock<ModeTower<Complex64>>,
}

impl Field {
    pub fn new(name: impl Into<String>, state: GradedVector<Qc>, tower: ModeTower<Qc>) -> Self {
        Field { name: name.into(), state, tower, float_tower: OnceLock::new() }
    }

    /// `Y(Ω, z) = id`.
    pub fn identity(model: &Model) -> Self {
        Self::identity_on(model.dims(), model.vacuum().clone())
    }

    /// Identity field on a bare graded space with the given vacuum.
    pub fn identity_on(dims: &[usize], vacuum: GradedVector<Qc>) -> Self {
        let tower = ModeTower::from_fn(0, dims, |n| {
            if n == 0 {
                BlockOperator::identity(dims)
            } else {
                BlockOperator::zero_with_shift(dims, -n)
            }
        });
        Field::new("1", vacuum, tower)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.tower.dim
    }

    pub fn state(&self) -> &GradedVector<Qc> {
        &self.state
    }

    pub fn tower(&self) -> &ModeTower<Qc> {
        &self.tower
    }

    pub fn mode(&self, n: i64) -> Cow<'_, BlockOperator<Qc>> {
        self.tower.mode(n)
    }

    pub fn mode_unshifted(&self, m: i64) -> Cow<'_, BlockOperator<Qc>> {
        self.tower.mode_unshifted(m)
    }

    pub fn float_tower(&self) -> &ModeTower<Complex64> {
        self.float_tower.get_or_init(|| self.tower.map(|x| x.to_c64()))
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

impl PartialEq for Field {
    fn eq(&self, o: &Self) -> bool {
        self.name == o.name && self.state == o.state && self.tower == o.tower
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    pub central_charge: Option<Rational>,
    pub simple: bool,
}

#[derive(Debug)]
pub struct Model {
    name: String,
    params: ModelParams,
    space: GradedSpace,
    vacuum: GradedVector<Qc>,
    sl2: [BlockOperator<Qc>; 3],
    generators: Vec<Field>,
    words: Vec<Vec<Word>>,
    margin: usize,
    float_sl2: OnceLock<[BlockOperator<Complex64>; 3]>,
}

impl Model {
    /// Heisenberg vertex algebra generated by `J` (dimension 1, `J₍₁₎J = Ω`).
    pub fn heisenberg(max_weight: usize) -> Model {
        from_seed("heisenberg", ModelParams { central_charge: None, simple: false }, &heisenberg_seed(), max_weight)
    }

    /// Virasoro vacuum module of central charge `c`; with `simple`, quotiented
    /// level by level by the radical of the invariant bilinear form.
    pub fn virasoro(c: &Rational, max_weight: usize, simple: bool) -> Model {
        let params = ModelParams { central_charge: Some(c.clone()), simple: false };
        let universal = from_seed("virasoro", params, &virasoro_seed(c), max_weight);
        if !simple {
            return universal;
        }
        simple_quotient(&universal)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// Name plus parameters, e.g. `virasoro(c=-22/5, simple)`.
    pub fn label(&self) -> String {
        match &self.params.central_charge {
            None => self.name.clone(),
            Some(c) => format!(
                "{}(c={}{})",
                self.name,
                format_rational(c),
                if self.params.simple { ", simple" } else { "" }
            ),
        }
    }

    pub fn space(&self) -> &GradedSpace {
        &self.space
    }

    pub fn dims(&self) -> &[usize] {
        self.space.dims()
    }

    pub fn max_weight(&self) -> usize {
        self.space.max_weight()
    }

    pub fn margin(&self) -> usize {
        self.margin
    }

    /// Largest weight on which identities are asserted: `N − margin`.
    pub fn window(&self) -> usize {
        self.max_weight().saturating_sub(self.margin)
    }

    pub fn with_margin(mut self, margin: usize) -> Model {
        self.margin = margin;
        self
    }

    pub fn vacuum(&self) -> &GradedVector<Qc> {
        &self.vacuum
    }

    /// `L_m` for `m ∈ {−1, 0, 1}`.
    pub fn l(&self, m: i64) -> &BlockOperator<Qc> {
        &self.sl2[(m + 1) as usize]
    }

    pub fn l_float(&self, m: i64) -> &BlockOperator<Complex64> {
        &self.float_sl2.get_or_init(|| self.sl2.clone().map(|op| op.to_c64()))[(m + 1) as usize]
    }

    pub fn generators(&self) -> &[Field] {
        &self.generators
    }

    pub fn generator(&self, name: &str) -> Option<&Field> {
        self.generators.iter().find(|g| g.name == name)
    }

    /// Creation word of basis vector `index` of weight `weight`.
    pub fn word(&self, weight: usize, index: usize) -> &Word {
        &self.words[weight][index]
    }

    pub fn basis_vector(&self, weight: usize, index: usize) -> GradedVector<Qc> {
        GradedVector::basis(self.dims(), weight, index)
    }

    /// Applies the letters of `word` (right to left) to the vacuum.
    pub fn word_vector(&self, word: &[Letter]) -> GradedVector<Qc> {
        let mut v = self.vacuum.clone();
        for &(g, n) in word.iter().rev() {
            v = self.generators[g].mode(n).apply(&v).expect("model dims");
        }
        v
    }

    pub fn to_json(&self, with_operators: bool) -> Value {
        let gens: Vec<Value> = self
            .generators
            .iter()
            .map(|g| {
                let w = g.state.homogeneous_weight().unwrap_or(0);
                let mut v = json!({
                    "name": g.name,
                    "dim": g.dim(),
                    "state": {"weight": w, "coeffs": g.state.component(w).iter().map(|x| x.to_json()).collect::<Vec<_>>()},
                });
                if with_operators {
                    let modes: Vec<Value> = g
                        .tower
                        .range()
                        .map(|n| json!({"n": n, "operator": g.tower.mode(n).to_json()}))
                        .collect();
                    v["modes"] = Value::Array(modes);
                }
                v
            })
            .collect();
        let mut out = json!({
            "name": self.name,
            "central_charge": self.params.central_charge.as_ref().map(format_rational),
            "simple": self.params.simple,
            "max_weight": self.max_weight(),
            "margin": self.margin,
            "dims": self.dims(),
            "basis": (0..=self.max_weight()).map(|n| self.space.labels(n).to_vec()).collect::<Vec<_>>(),
            "generators": gens,
        });
        if with_operators {
            out["sl2"] = json!({
                "L_-1": self.l(-1).to_json(),
                "L_0": self.l(0).to_json(),
                "L_1": self.l(1).to_json(),
            });
        }
        out
    }
}

fn label(seed: &Seed, m: &Mono) -> String {
    if m.is_empty() {
        return "Ω".into();
    }
    let prefix = if seed.names[0] == "ω" { "L" } else { seed.names[0].as_str() };
    let mut s = String::new();
    for &(g, n) in m {
        let name = if seed.names.len() == 1 { prefix } else { seed.names[g].as_str() };
        s.push_str(&format!("{name}_{{{n}}}"));
    }
    s.push('Ω');
    s
}

fn from_seed(name: &str, params: ModelParams, seed: &Seed, max_weight: usize) -> Model {
    let basis = monomial_basis(seed, max_weight);
    let dims: Vec<usize> = basis.iter().map(Vec::len).collect();
    let index: Vec<HashMap<Mono, usize>> =
        basis.iter().map(|b| b.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect()).collect();
    let labels: Vec<Vec<String>> = basis.iter().map(|b| b.iter().map(|m| label(seed, m)).collect()).collect();
    let space = GradedSpace::new(dims.clone(), labels).expect("vacuum at weight 0");
    let mut st = Straightener::new(seed);

    let matrix = |st: &mut Straightener, src: usize, dst: usize, act: &mut dyn FnMut(&mut Straightener, &Mono) -> seed::State| {
        let cols: Vec<Vec<Qc>> = basis[src]
            .iter()
            .map(|m| {
                let mut col = vec![Qc::zero(); dims[dst]];
                for (mm, c) in act(st, m) {
                    let i = index[dst][&mm];
                    col[i] = Qc::real(c);
                }
                col
            })
            .collect();
        Mat::from_columns(dims[dst], &cols)
    };

    let top = max_weight as i64;
    let mut generators = Vec::new();
    for g in 0..seed.dims.len() {
        let modes = (-top..=top)
            .map(|n| {
                BlockOperator::homogeneous(&dims, -n, |src, dst| {
                    Some(matrix(&mut st, src, dst, &mut |st, m| st.apply((g, n), m)))
                })
            })
            .collect();
        let tower = ModeTower::new(seed.dims[g], &dims, modes).expect("tower shape");
        let d = seed.dims[g];
        let state = if d <= max_weight {
            GradedVector::basis(&dims, d, index[d][&vec![(g, -(d as i64))]])
        } else {
            GradedVector::zeros(&dims)
        };
        generators.push(Field::new(seed.names[g].clone(), state, tower));
    }
    let sl2 = [-1i64, 0, 1].map(|m| {
        BlockOperator::homogeneous(&dims, -m, |src, dst| Some(matrix(&mut st, src, dst, &mut |st, mm| st.sl2(m, mm))))
    });
    let margin = seed.dims.iter().max().copied().unwrap_or(0) + 2;
    Model {
        name: name.into(),
        params,
        vacuum: GradedVector::basis(&dims, 0, 0),
        space,
        sl2,
        generators,
        words: basis,
        margin,
        float_sl2: OnceLock::new(),
    }
}

/// Quotient by the radical of the invariant bilinear form with `(Ω,Ω) = 1`.
/// Each weight keeps a maximal set of basis monomials independent modulo the
/// radical; a universal vector `u` maps to `G[S,S]⁻¹ G[S,:] u`.
fn simple_quotient(u: &Model) -> Model {
    let gram = forms::build_invariant_form(u, FormKind::Bilinear, Qc::one(), None).expect("bilinear form on universal model");
    let mut keep: Vec<Vec<usize>> = Vec::new();
    let mut proj: Vec<Mat<Qc>> = Vec::new();
    for g in gram.matrices() {
        let (_, pivots) = rref(g, 0.0);
        let all: Vec<usize> = (0..g.cols()).collect();
        let p = if pivots.is_empty() {
            Mat::zeros(0, g.cols())
        } else {
            solve(&g.submatrix(&pivots, &pivots), &g.submatrix(&pivots, &all), 0.0).expect("independent rows")
        };
        keep.push(pivots);
        proj.push(p);
    }
    let dims: Vec<usize> = keep.iter().map(Vec::len).collect();
    let labels: Vec<Vec<String>> =
        keep.iter().enumerate().map(|(w, k)| k.iter().map(|&i| u.space.labels(w)[i].clone()).collect()).collect();
    let words: Vec<Vec<Word>> =
        keep.iter().enumerate().map(|(w, k)| k.iter().map(|&i| u.words[w][i].clone()).collect()).collect();
    let reduce = |op: &BlockOperator<Qc>| -> BlockOperator<Qc> {
        let shift = op.shift().expect("homogeneous");
        BlockOperator::homogeneous(&dims, shift, |src, dst| {
            let m = op.block_or_zero(src, dst);
            let e = Mat::from_fn(m.cols(), dims[src], |i, j| if keep[src][j] == i { Qc::one() } else { Qc::zero() });
            Some(proj[dst].matmul(&m).matmul(&e))
        })
    };
    let generators = u
        .generators
        .iter()
        .map(|g| {
            let tower = ModeTower::from_fn(g.dim(), &dims, |n| reduce(&g.mode(n)));
            let state = GradedVector::from_components(
                &dims,
                (0..dims.len()).map(|w| proj[w].mat_vec(g.state.component(w))).collect(),
            )
            .expect("dims");
            Field::new(g.name.clone(), state, tower)
        })
        .collect();
    let sl2 = [-1i64, 0, 1].map(|m| reduce(u.l(m)));
    Model {
        name: u.name.clone(),
        params: ModelParams { simple: true, ..u.params.clone() },
        space: GradedSpace::new(dims.clone(), labels).expect("vacuum survives"),
        vacuum: GradedVector::basis(&dims, 0, 0),
        sl2,
        generators,
        words,
        margin: u.margin,
        float_sl2: OnceLock::new(),
    }
}

/// Scalars for which a model can hand out its operators directly.
pub trait ModelScalar: JsonScalar {
    fn tower(field: &Field) -> &ModeTower<Self>;
    fn sl2(model: &Model, m: i64) -> &BlockOperator<Self>;
    fn vacuum(model: &Model) -> GradedVector<Self>;
    /// Float inputs enter the exact path as the dyadic rationals they are.
    fn from_c64(z: Complex64) -> Self;
}

impl ModelScalar for Qc {
    fn tower(field: &Field) -> &ModeTower<Self> {
        field.tower()
    }
    fn sl2(model: &Model, m: i64) -> &BlockOperator<Self> {
        model.l(m)
    }
    fn vacuum(model: &Model) -> GradedVector<Self> {
        model.vacuum.clone()
    }
    fn from_c64(z: Complex64) -> Self {
        Qc::from_c64(z)
    }
}

impl ModelScalar for Complex64 {
    fn tower(field: &Field) -> &ModeTower<Self> {
        field.float_tower()
    }
    fn sl2(model: &Model, m: i64) -> &BlockOperator<Self> {
        model.l_float(m)
    }
    fn vacuum(model: &Model) -> GradedVector<Self> {
        model.vacuum.to_c64()
    }
    fn from_c64(z: Complex64) -> Self {
        z
    }
}
