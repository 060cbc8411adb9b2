//! Rebuilding the vertex algebra from smeared fields alone.
//!
//! Input is, for each field, a map `f ↦ φ(f)` on a graded space with a
//! vacuum. Only the values on `f = e_n` are used. The conformal dimension is
//! the least `d ≥ 0` with `φ(e_{−d})Ω ≠ 0`, the state is `φ(e_{−d})Ω`, the
//! space is spanned by `φ_j` (`j < 0`) applied repeatedly to `Ω`, and `L_m`
//! acts on that span by `L_m φ_j u = ((d−1)m − j) φ_{j+m} u + φ_j L_m u`.

use std::collections::HashMap;

use serde::Serialize;

use crate::circle::TestFunction;
use crate::error::{Error, Result};
use crate::graded::{BlockOperator, GradedVector};
use crate::linalg::{rref, solve, Mat};
use crate::scalar::{Qc, Scalar};
use crate::vertex::{borcherds_product, Field, ModeTower, Model};

use super::smear_exact;

type SmearFn<'a> = Box<dyn Fn(&TestFunction) -> BlockOperator<Qc> + 'a>;

/// Access to one field through its smeared operators only.
pub struct SmearedAccess<'a> {
    pub name: String,
    pub smear: SmearFn<'a>,
}

impl<'a> SmearedAccess<'a> {
    pub fn new(name: impl Into<String>, smear: impl Fn(&TestFunction) -> BlockOperator<Qc> + 'a) -> Self {
        SmearedAccess { name: name.into(), smear: Box::new(smear) }
    }

    /// Exact smearing of a model's field.
    pub fn of_field(field: &'a Field) -> Self {
        SmearedAccess::new(field.name(), move |f| smear_exact(field, f))
    }
}

/// One spanning vector `φ_j u` with `u` an earlier spanning vector (`None` for Ω).
#[derive(Clone, Debug)]
struct SpanEntry {
    field: usize,
    mode: i64,
    parent: Option<(usize, usize)>,
    vector: GradedVector<Qc>,
}

/// Everything recovered from the smeared fields.
#[derive(Clone, Debug)]
pub struct Reconstruction {
    pub names: Vec<String>,
    pub dims: Vec<usize>,
    pub states: Vec<GradedVector<Qc>>,
    /// Mode operators read off from `φ(e_n)`.
    pub input_towers: Vec<ModeTower<Qc>>,
    /// Fields of the recovered states, rebuilt by the Borcherds product formula.
    pub fields: Vec<Field>,
    pub sl2: [BlockOperator<Qc>; 3],
    /// Dimension of the span at each weight.
    pub span_dims: Vec<usize>,
}

fn mode_ops(access: &SmearedAccess, top: i64) -> Vec<BlockOperator<Qc>> {
    (-top..=top).map(|n| (access.smear)(&TestFunction::basis(n))).collect()
}

fn independent(basis: &[GradedVector<Qc>], w: usize, v: &GradedVector<Qc>) -> bool {
    let mut cols: Vec<Vec<Qc>> = basis.iter().map(|b| b.component(w).to_vec()).collect();
    cols.push(v.component(w).to_vec());
    let m = Mat::from_columns(v.component(w).len(), &cols);
    rref(&m, 0.0).1.len() == cols.len()
}

/// Recovers dimensions, states, the sl₂ action and the state fields.
pub fn reconstruct_model(dims: &[usize], vacuum: &GradedVector<Qc>, access: &[SmearedAccess]) -> Result<Reconstruction> {
    let top = dims.len() as i64 - 1;
    let modes: Vec<Vec<BlockOperator<Qc>>> = access.iter().map(|a| mode_ops(a, top)).collect();
    let mode = |i: usize, n: i64| -> Option<&BlockOperator<Qc>> {
        if n.abs() > top {
            None
        } else {
            Some(&modes[i][(n + top) as usize])
        }
    };
    let mut fdims = Vec::new();
    let mut states = Vec::new();
    for i in 0..access.len() {
        let found = (0..=top).find_map(|n| {
            let v = mode(i, -n).expect("in range").apply(vacuum).expect("dims");
            (!v.is_zero()).then_some((n as usize, v))
        });
        let (d, v) = found.ok_or(Error::DegenerateField(top as usize))?;
        fdims.push(d);
        states.push(v);
    }

    // Creation span, weight by weight.
    let mut span: Vec<Vec<SpanEntry>> = vec![Vec::new(); dims.len()];
    span[0].push(SpanEntry { field: usize::MAX, mode: 0, parent: None, vector: vacuum.clone() });
    for w in 1..dims.len() {
        for i in 0..access.len() {
            for j in (-(w as i64))..=-1 {
                let src = (w as i64 + j) as usize;
                for p in 0..span[src].len() {
                    let v = mode(i, j).expect("in range").apply(&span[src][p].vector)?;
                    let basis: Vec<GradedVector<Qc>> = span[w].iter().map(|e| e.vector.clone()).collect();
                    if !v.weight_is_zero(w) && independent(&basis, w, &v) {
                        span[w].push(SpanEntry { field: i, mode: j, parent: Some((src, p)), vector: v });
                    }
                }
            }
        }
    }
    // Closure under every mode the truncation holds.
    loop {
        let mut added = false;
        for w in 0..dims.len() {
            for src in 0..dims.len() {
                let j = w as i64 - src as i64;
                let j = -j;
                for i in 0..access.len() {
                    let Some(op) = mode(i, j) else { continue };
                    for p in 0..span[src].len() {
                        let v = op.apply(&span[src][p].vector)?;
                        if v.weight_is_zero(w) {
                            continue;
                        }
                        let basis: Vec<GradedVector<Qc>> = span[w].iter().map(|e| e.vector.clone()).collect();
                        if independent(&basis, w, &v) {
                            span[w].push(SpanEntry { field: i, mode: j, parent: Some((src, p)), vector: v });
                            added = true;
                        }
                    }
                }
            }
        }
        if !added {
            break;
        }
    }
    let span_dims: Vec<usize> = span.iter().map(Vec::len).collect();
    if span_dims != dims {
        return Err(Error::Structural(format!("vacuum is not cyclic: span dims {span_dims:?} vs {dims:?}")));
    }

    // L_m on the spanning vectors, then as block matrices.
    let mut sl2_ops = Vec::new();
    for m in -1..=1i64 {
        let mut images: HashMap<(usize, usize), GradedVector<Qc>> = HashMap::new();
        let mut order: Vec<(usize, usize)> = Vec::new();
        for (w, entries) in span.iter().enumerate() {
            for p in 0..entries.len() {
                order.push((w, p));
            }
        }
        // Parents may sit at higher weight for closure entries; iterate until all are resolved.
        while images.len() < order.len() {
            let before = images.len();
            for &(w, p) in &order {
                if images.contains_key(&(w, p)) {
                    continue;
                }
                let e = &span[w][p];
                let Some(parent) = e.parent else {
                    images.insert((w, p), GradedVector::zeros(dims));
                    continue;
                };
                let Some(lu) = images.get(&parent) else { continue };
                let u = &span[parent.0][parent.1].vector;
                let d = fdims[e.field] as i64;
                let k = (d - 1) * m - e.mode;
                let mut out = match mode(e.field, e.mode) {
                    Some(op) => op.apply(lu)?,
                    None => GradedVector::zeros(dims),
                };
                if k != 0 {
                    match mode(e.field, e.mode + m) {
                        Some(op) => out = out.add(&op.apply(u)?.scale(&Qc::int(k))),
                        None => out = out.with_tail(true),
                    }
                }
                images.insert((w, p), out);
            }
            if images.len() == before {
                return Err(Error::Structural("spanning words do not resolve".into()));
            }
        }
        let op = BlockOperator::homogeneous(dims, -m, |src, dst| {
            let b = Mat::from_columns(dims[src], &span[src].iter().map(|e| e.vector.component(src).to_vec()).collect::<Vec<_>>());
            let c = Mat::from_columns(dims[dst], &(0..dims[src]).map(|p| images[&(src, p)].component(dst).to_vec()).collect::<Vec<_>>());
            // L B = C  ⇒  L = C B⁻¹, via Bᵀ Lᵀ = Cᵀ.
            let lt = solve(&b.transpose(), &c.transpose(), 0.0).expect("span basis is invertible");
            Some(lt.transpose())
        });
        sl2_ops.push(op);
    }
    let sl2: [BlockOperator<Qc>; 3] = sl2_ops.try_into().expect("three operators");

    // Fields of the recovered states by the Borcherds product formula.
    let mut towers = Vec::new();
    for (i, a) in access.iter().enumerate() {
        let tower = ModeTower::new(fdims[i], dims, modes[i].clone())?;
        towers.push(Field::new(a.name.clone(), states[i].clone(), tower));
    }
    let identity = Field::identity_on(dims, vacuum.clone());
    let mut memo: HashMap<(usize, usize), Field> = HashMap::new();
    let mut fields = Vec::new();
    for (i, a) in access.iter().enumerate() {
        let d = fdims[i];
        let b = Mat::from_columns(dims[d], &span[d].iter().map(|e| e.vector.component(d).to_vec()).collect::<Vec<_>>());
        let rhs = Mat::from_columns(dims[d], &[states[i].component(d).to_vec()]);
        let coeffs = solve(&b, &rhs, 0.0).expect("span basis is invertible");
        let mut acc: Option<Field> = None;
        for p in 0..dims[d] {
            let c = coeffs.get(p, 0);
            if c.is_zero() {
                continue;
            }
            let f = span_field(&span, &towers, &identity, (d, p), &mut memo)?;
            let scaled = ModeTower::from_fn(f.dim(), dims, |n| f.mode(n).scale(c));
            acc = Some(match acc {
                None => Field::new(a.name.clone(), states[i].clone(), scaled),
                Some(prev) => {
                    let sum = ModeTower::from_fn(d, dims, |n| prev.mode(n).add(&scaled.mode(n)));
                    Field::new(a.name.clone(), states[i].clone(), sum)
                }
            });
        }
        fields.push(acc.expect("nonzero state"));
    }

    Ok(Reconstruction {
        names: access.iter().map(|a| a.name.clone()).collect(),
        dims: fdims,
        states,
        input_towers: towers.iter().map(|f| f.tower().clone()).collect(),
        fields,
        sl2,
        span_dims,
    })
}

fn span_field(
    span: &[Vec<SpanEntry>],
    towers: &[Field],
    identity: &Field,
    key: (usize, usize),
    memo: &mut HashMap<(usize, usize), Field>,
) -> Result<Field> {
    if let Some(f) = memo.get(&key) {
        return Ok(f.clone());
    }
    let e = &span[key.0][key.1];
    let f = match e.parent {
        None => identity.clone(),
        Some(parent) => {
            let inner = span_field(span, towers, identity, parent, memo)?;
            let g = &towers[e.field];
            borcherds_product(g, e.mode + g.dim() as i64 - 1, &inner, None)?
        }
    };
    memo.insert(key, f.clone());
    Ok(f)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoundtripReport {
    pub model: String,
    pub dims: Vec<(String, usize)>,
    pub expected_dims: Vec<usize>,
    pub states_equal: bool,
    pub towers_equal: bool,
    pub sl2_equal: bool,
    pub vacuum_preserved: bool,
    pub span_dims: Vec<usize>,
    pub compared_blocks: usize,
    pub skipped_blocks: usize,
}

impl RoundtripReport {
    pub fn pass(&self) -> bool {
        self.states_equal
            && self.towers_equal
            && self.sl2_equal
            && self.vacuum_preserved
            && self.dims.iter().map(|(_, d)| *d).eq(self.expected_dims.iter().copied())
    }
}

/// Smears the model's generators, reconstructs from the smeared fields, and
/// checks that the identity map is an isomorphism: same dimensions and states,
/// the same `L₋₁, L₀, L₁`, and state fields equal to the original towers on
/// the trusted window.
pub fn roundtrip_check(model: &Model) -> Result<RoundtripReport> {
    let access: Vec<SmearedAccess> = model.generators().iter().map(SmearedAccess::of_field).collect();
    let rec = reconstruct_model(model.dims(), model.vacuum(), &access)?;
    let window = model.window();
    let mut compared = 0;
    let mut skipped = 0;
    let mut towers_equal = true;
    for (g, f) in model.generators().iter().zip(&rec.fields) {
        for n in g.tower().range() {
            let d = f.mode(n).window_diff(&g.mode(n), window);
            compared += d.compared;
            skipped += d.skipped;
            towers_equal &= d.exact;
        }
        // The towers read off from the smeared fields must equal the originals everywhere.
        towers_equal &= rec.input_towers.iter().any(|t| t == g.tower());
    }
    let mut sl2_equal = true;
    for m in -1..=1i64 {
        let d = rec.sl2[(m + 1) as usize].window_diff(model.l(m), window);
        compared += d.compared;
        skipped += d.skipped;
        sl2_equal &= d.exact;
    }
    let vacuum_preserved = rec.sl2.iter().all(|l| l.apply(model.vacuum()).map(|v| v.is_zero()).unwrap_or(false));
    Ok(RoundtripReport {
        model: model.label(),
        dims: rec.names.iter().cloned().zip(rec.dims.iter().copied()).collect(),
        expected_dims: model.generators().iter().map(Field::dim).collect(),
        states_equal: rec.states.iter().zip(model.generators()).all(|(s, g)| s == g.state()),
        towers_equal,
        sl2_equal,
        vacuum_preserved,
        span_dims: rec.span_dims,
        compared_blocks: compared,
        skipped_blocks: skipped,
    })
}
