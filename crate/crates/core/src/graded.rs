//! Truncated graded spaces `⊕_{n≤N} V(n)`, block operators between weight spaces,
//! and covectors of the restricted dual.
//!
//! Nothing here fails on overflow past `N`. An operator records which source
//! weights have (part of) their image above the cutoff (`spill`) and which of
//! its blocks are incomplete because an intermediate step passed through the
//! discarded region (`broken`). Applying an operator to a vector that touches
//! either kind of source sets the vector's tail flag.

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::scalar::{format_rational, parse_rational, Qc, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct GradedSpace {
    dims: Vec<usize>,
    labels: Vec<Vec<String>>,
}

impl GradedSpace {
    pub fn new(dims: Vec<usize>, labels: Vec<Vec<String>>) -> Result<Self> {
        if dims.is_empty() || dims[0] == 0 {
            return Err(Error::Structural("weight 0 must contain the vacuum".into()));
        }
        if labels.len() != dims.len() || labels.iter().zip(&dims).any(|(l, &d)| l.len() != d) {
            return Err(Error::Shape("basis labels do not match dimensions".into()));
        }
        Ok(GradedSpace { dims, labels })
    }

    pub fn max_weight(&self) -> usize {
        self.dims.len() - 1
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self, n: usize) -> usize {
        self.dims[n]
    }

    pub fn labels(&self, n: usize) -> &[String] {
        &self.labels[n]
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    /// Position of the first basis vector of weight `n` in the flattened basis.
    pub fn offset(&self, n: usize) -> usize {
        self.dims[..n].iter().sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradedVector<S> {
    comps: Vec<Vec<S>>,
    tail: bool,
}

impl<S: Scalar> GradedVector<S> {
    pub fn zeros(dims: &[usize]) -> Self {
        GradedVector { comps: dims.iter().map(|&d| vec![S::zero(); d]).collect(), tail: false }
    }

    pub fn basis(dims: &[usize], weight: usize, index: usize) -> Self {
        let mut v = Self::zeros(dims);
        v.comps[weight][index] = S::one();
        v
    }

    pub fn from_components(dims: &[usize], comps: Vec<Vec<S>>) -> Result<Self> {
        if comps.len() != dims.len() || comps.iter().zip(dims).any(|(c, &d)| c.len() != d) {
            return Err(Error::Shape("vector components do not match dimensions".into()));
        }
        Ok(GradedVector { comps, tail: false })
    }

    /// Homogeneous vector with the given weight-`n` component.
    pub fn homogeneous(dims: &[usize], n: usize, comp: Vec<S>) -> Result<Self> {
        if n >= dims.len() {
            return Err(Error::WeightRange { weight: n as i64, max: dims.len() - 1 });
        }
        if comp.len() != dims[n] {
            return Err(Error::Shape(format!("weight {n} component has length {}", comp.len())));
        }
        let mut v = Self::zeros(dims);
        v.comps[n] = comp;
        Ok(v)
    }

    pub fn dims(&self) -> Vec<usize> {
        self.comps.iter().map(|c| c.len()).collect()
    }

    pub fn max_weight(&self) -> usize {
        self.comps.len() - 1
    }

    pub fn component(&self, n: usize) -> &[S] {
        &self.comps[n]
    }

    pub fn components(&self) -> &[Vec<S>] {
        &self.comps
    }

    pub fn tail(&self) -> bool {
        self.tail
    }

    pub fn with_tail(mut self, tail: bool) -> Self {
        self.tail = tail;
        self
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().flatten().all(|x| x.is_zero())
    }

    pub fn weight_is_zero(&self, n: usize) -> bool {
        self.comps[n].iter().all(|x| x.is_zero())
    }

    /// The unique weight carrying nonzero components, if there is exactly one.
    pub fn homogeneous_weight(&self) -> Option<usize> {
        let mut ws = (0..self.comps.len()).filter(|&n| !self.weight_is_zero(n));
        let w = ws.next()?;
        ws.next().is_none().then_some(w)
    }

    pub fn project_weight(&self, n: i64) -> Result<Self> {
        let max = self.max_weight();
        if n < 0 || n as usize > max {
            return Err(Error::WeightRange { weight: n, max });
        }
        let mut out = Self::zeros(&self.dims());
        out.comps[n as usize] = self.comps[n as usize].clone();
        out.tail = self.tail;
        Ok(out)
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!(self.dims(), o.dims(), "vector dims");
        GradedVector {
            comps: self
                .comps
                .iter()
                .zip(&o.comps)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x.add_ref(y)).collect())
                .collect(),
            tail: self.tail || o.tail,
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&-S::one()))
    }

    pub fn scale(&self, s: &S) -> Self {
        GradedVector {
            comps: self.comps.iter().map(|c| c.iter().map(|x| x.mul_ref(s)).collect()).collect(),
            tail: self.tail,
        }
    }

    pub fn conj(&self) -> Self {
        GradedVector {
            comps: self.comps.iter().map(|c| c.iter().map(|x| x.conj()).collect()).collect(),
            tail: self.tail,
        }
    }

    pub fn to_c64(&self) -> GradedVector<Complex64> {
        GradedVector {
            comps: self.comps.iter().map(|c| c.iter().map(|x| x.to_c64()).collect()).collect(),
            tail: self.tail,
        }
    }

    pub fn flatten(&self) -> Vec<S> {
        self.comps.iter().flatten().cloned().collect()
    }

    pub fn from_flat(dims: &[usize], flat: &[S]) -> Self {
        let mut comps = Vec::with_capacity(dims.len());
        let mut at = 0;
        for &d in dims {
            comps.push(flat[at..at + d].to_vec());
            at += d;
        }
        GradedVector { comps, tail: false }
    }

    /// Largest entry-wise difference over weights ≤ `window`.
    pub fn max_abs_diff(&self, o: &Self, window: usize) -> f64 {
        let top = window.min(self.max_weight());
        (0..=top)
            .flat_map(|n| self.comps[n].iter().zip(&o.comps[n]))
            .map(|(a, b)| (a.clone() - b.clone()).modulus())
            .fold(0.0, f64::max)
    }

    pub fn norm(&self) -> f64 {
        self.comps.iter().flatten().map(|x| x.modulus().powi(2)).sum::<f64>().sqrt()
    }
}

/// Element of the restricted dual, supported in a single weight.
#[derive(Clone, Debug, PartialEq)]
pub struct Covector<S> {
    pub weight: usize,
    pub row: Vec<S>,
}

impl<S: Scalar> Covector<S> {
    pub fn dual_basis(dims: &[usize], weight: usize, index: usize) -> Self {
        let mut row = vec![S::zero(); dims[weight]];
        row[index] = S::one();
        Covector { weight, row }
    }

    pub fn pair(&self, v: &GradedVector<S>) -> Result<S> {
        if self.weight > v.max_weight() || v.component(self.weight).len() != self.row.len() {
            return Err(Error::Shape("covector does not match vector".into()));
        }
        let mut acc = S::zero();
        for (a, b) in self.row.iter().zip(v.component(self.weight)) {
            acc = acc.add_ref(&a.mul_ref(b));
        }
        Ok(acc)
    }
}

/// Result of comparing two operators block by block on a weight window.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct WindowDiff {
    /// Largest entry of the difference (as a float, also on the exact path).
    pub max: f64,
    /// Whether every compared block agrees exactly.
    pub exact: bool,
    pub compared: usize,
    /// Blocks left out because one side is marked broken.
    pub skipped: usize,
}

impl WindowDiff {
    pub fn merge(self, o: WindowDiff) -> WindowDiff {
        WindowDiff {
            max: self.max.max(o.max),
            exact: self.exact && o.exact,
            compared: self.compared + o.compared,
            skipped: self.skipped + o.skipped,
        }
    }

    pub fn empty() -> Self {
        WindowDiff { max: 0.0, exact: true, compared: 0, skipped: 0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlockOperator<S> {
    dims: Vec<usize>,
    /// Keyed by (source weight, target weight).
    blocks: BTreeMap<(usize, usize), Mat<S>>,
    spill: BTreeSet<usize>,
    broken: BTreeSet<(usize, usize)>,
    /// Weight change `target − source`, when the operator is homogeneous.
    shift: Option<i64>,
}

impl<S: Scalar> BlockOperator<S> {
    pub fn zero(dims: &[usize]) -> Self {
        BlockOperator {
            dims: dims.to_vec(),
            blocks: BTreeMap::new(),
            spill: BTreeSet::new(),
            broken: BTreeSet::new(),
            shift: None,
        }
    }

    pub fn identity(dims: &[usize]) -> Self {
        let mut op = Self::zero(dims);
        op.shift = Some(0);
        for (n, &d) in dims.iter().enumerate() {
            if d > 0 {
                op.blocks.insert((n, n), Mat::identity(d));
            }
        }
        op
    }

    /// Homogeneous operator raising weight by `shift`; `block(src)` gives the
    /// `dims[src+shift] × dims[src]` matrix, or `None` for a zero block. Sources
    /// whose image would land above the cutoff are recorded as spilling.
    pub fn homogeneous(dims: &[usize], shift: i64, mut block: impl FnMut(usize, usize) -> Option<Mat<S>>) -> Self {
        let mut op = Self::zero(dims);
        op.shift = Some(shift);
        let top = dims.len() as i64 - 1;
        for (src, &d) in dims.iter().enumerate() {
            let dst = src as i64 + shift;
            if dst < 0 || d == 0 {
                continue;
            }
            if dst > top {
                op.spill.insert(src);
                continue;
            }
            let dst = dst as usize;
            if dims[dst] == 0 {
                continue;
            }
            if let Some(m) = block(src, dst) {
                assert_eq!(m.shape(), (dims[dst], d), "homogeneous block shape");
                if !m.is_zero() {
                    op.blocks.insert((src, dst), m);
                }
            }
        }
        op
    }

    /// Zero operator with the spill profile of a homogeneous shift: every
    /// source whose image would land above the cutoff is marked.
    pub fn zero_with_shift(dims: &[usize], shift: i64) -> Self {
        Self::homogeneous(dims, shift, |_, _| None)
    }

    pub fn insert_block(&mut self, src: usize, dst: usize, m: Mat<S>) -> Result<()> {
        if src >= self.dims.len() || dst >= self.dims.len() {
            return Err(Error::Shape(format!("block ({src},{dst}) outside the truncation")));
        }
        if m.shape() != (self.dims[dst], self.dims[src]) {
            return Err(Error::Shape(format!(
                "block ({src},{dst}) has shape {:?}, expected {:?}",
                m.shape(),
                (self.dims[dst], self.dims[src])
            )));
        }
        let s = dst as i64 - src as i64;
        if self.blocks.is_empty() && self.shift.is_none() {
            self.shift = Some(s);
        } else if self.shift != Some(s) {
            self.shift = None;
        }
        self.blocks.insert((src, dst), m);
        Ok(())
    }

    pub fn mark_spill(&mut self, src: usize) {
        self.spill.insert(src);
    }

    pub fn mark_broken(&mut self, src: usize, dst: usize) {
        self.broken.insert((src, dst));
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn max_weight(&self) -> usize {
        self.dims.len() - 1
    }

    pub fn shift(&self) -> Option<i64> {
        self.shift
    }

    pub fn block(&self, src: usize, dst: usize) -> Option<&Mat<S>> {
        self.blocks.get(&(src, dst))
    }

    /// Block or an explicit zero matrix of the right shape.
    pub fn block_or_zero(&self, src: usize, dst: usize) -> Mat<S> {
        self.blocks.get(&(src, dst)).cloned().unwrap_or_else(|| Mat::zeros(self.dims[dst], self.dims[src]))
    }

    pub fn blocks(&self) -> impl Iterator<Item = (&(usize, usize), &Mat<S>)> {
        self.blocks.iter()
    }

    pub fn spill(&self) -> &BTreeSet<usize> {
        &self.spill
    }

    pub fn broken(&self) -> &BTreeSet<(usize, usize)> {
        &self.broken
    }

    pub fn is_broken(&self, src: usize, dst: usize) -> bool {
        self.broken.contains(&(src, dst))
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.values().all(|m| m.is_zero())
    }

    fn check_dims(&self, dims: &[usize]) -> Result<()> {
        if self.dims != dims {
            return Err(Error::Shape(format!("operator dims {:?} vs {:?}", self.dims, dims)));
        }
        Ok(())
    }

    pub fn apply(&self, v: &GradedVector<S>) -> Result<GradedVector<S>> {
        self.check_dims(&v.dims())?;
        let mut out: GradedVector<S> = GradedVector::zeros(&self.dims);
        let mut tail = v.tail();
        for (&(src, dst), m) in &self.blocks {
            if v.weight_is_zero(src) {
                continue;
            }
            let y = m.mat_vec(v.component(src));
            for (o, x) in out.comps[dst].iter_mut().zip(y) {
                *o = o.add_ref(&x);
            }
        }
        for &src in &self.spill {
            tail |= !v.weight_is_zero(src);
        }
        for &(src, _) in &self.broken {
            tail |= !v.weight_is_zero(src);
        }
        out.tail = tail;
        Ok(out)
    }

    /// `self ∘ t`.
    pub fn compose(&self, t: &BlockOperator<S>) -> BlockOperator<S> {
        assert_eq!(self.dims, t.dims, "compose dims");
        let top = self.max_weight() as i64;
        let mut out = Self::zero(&self.dims);
        out.shift = match (self.shift, t.shift) {
            (Some(a), Some(b)) => Some(a + b),
            _ => None,
        };
        for (&(src, mid), tm) in &t.blocks {
            for (&(_, dst), sm) in self.blocks.range((mid, 0)..=(mid, usize::MAX)) {
                let p = sm.matmul(tm);
                match out.blocks.get_mut(&(src, dst)) {
                    Some(acc) => *acc = acc.add(&p),
                    None => {
                        out.blocks.insert((src, dst), p);
                    }
                }
                if t.broken.contains(&(src, mid)) || self.broken.contains(&(mid, dst)) {
                    out.broken.insert((src, dst));
                }
            }
            if self.spill.contains(&mid) && !tm.is_zero() {
                out.spill.insert(src);
            }
            for &(_, dst) in self.broken.range((mid, 0)..=(mid, usize::MAX)) {
                out.broken.insert((src, dst));
            }
        }
        for &(src, mid) in &t.broken {
            for (&(_, dst), _) in self.blocks.range((mid, 0)..=(mid, usize::MAX)) {
                out.broken.insert((src, dst));
            }
        }
        // Image of `t` above the cutoff: with both operators homogeneous we know
        // exactly where `self` would have taken it.
        for &src in &t.spill {
            match (t.shift, self.shift) {
                (Some(a), Some(b)) => {
                    let dst = src as i64 + a + b;
                    if dst > top {
                        out.spill.insert(src);
                    } else if dst >= 0 {
                        out.broken.insert((src, dst as usize));
                    }
                }
                _ => {
                    out.spill.insert(src);
                    for dst in 0..self.dims.len() {
                        out.broken.insert((src, dst));
                    }
                }
            }
        }
        out.blocks.retain(|_, m| !m.is_zero());
        out
    }

    fn combine(&self, o: &BlockOperator<S>, sign: &S) -> BlockOperator<S> {
        assert_eq!(self.dims, o.dims, "sum dims");
        let mut out = self.clone();
        for (k, m) in &o.blocks {
            let m = m.scale(sign);
            match out.blocks.get_mut(k) {
                Some(acc) => *acc = acc.add(&m),
                None => {
                    out.blocks.insert(*k, m);
                }
            }
        }
        out.spill.extend(o.spill.iter().copied());
        out.broken.extend(o.broken.iter().copied());
        out.shift = match (self.shift, o.shift) {
            (Some(a), Some(b)) if a == b => Some(a),
            (Some(a), _) if o.blocks.is_empty() && o.spill.is_empty() => Some(a),
            (_, Some(b)) if self.blocks.is_empty() && self.spill.is_empty() => Some(b),
            _ => None,
        };
        out.blocks.retain(|_, m| !m.is_zero());
        out
    }

    pub fn add(&self, o: &BlockOperator<S>) -> BlockOperator<S> {
        self.combine(o, &S::one())
    }

    pub fn sub(&self, o: &BlockOperator<S>) -> BlockOperator<S> {
        self.combine(o, &-S::one())
    }

    /// `self + s·o`.
    pub fn add_scaled(&self, o: &BlockOperator<S>, s: &S) -> BlockOperator<S> {
        if s.is_zero() {
            let mut out = self.clone();
            out.spill.extend(o.spill.iter().copied());
            out.broken.extend(o.broken.iter().copied());
            return out;
        }
        self.combine(o, s)
    }

    pub fn scale(&self, s: &S) -> BlockOperator<S> {
        let mut out = self.clone();
        for m in out.blocks.values_mut() {
            *m = m.scale(s);
        }
        out.blocks.retain(|_, m| !m.is_zero());
        out
    }

    pub fn commutator(&self, o: &BlockOperator<S>) -> BlockOperator<S> {
        self.compose(o).sub(&o.compose(self))
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> BlockOperator<T> {
        BlockOperator {
            dims: self.dims.clone(),
            blocks: self.blocks.iter().map(|(k, m)| (*k, m.map(&f))).collect(),
            spill: self.spill.clone(),
            broken: self.broken.clone(),
            shift: self.shift,
        }
    }

    pub fn to_c64(&self) -> BlockOperator<Complex64> {
        self.map(|x| x.to_c64())
    }

    /// Entry-wise complex conjugate (same blocks).
    pub fn conj(&self) -> BlockOperator<S> {
        self.map(|x| x.conj())
    }

    /// Compares block by block on sources and targets ≤ `window`, leaving out
    /// blocks either side marks as broken.
    pub fn window_diff(&self, o: &BlockOperator<S>, window: usize) -> WindowDiff {
        assert_eq!(self.dims, o.dims, "diff dims");
        let top = window.min(self.max_weight());
        let mut d = WindowDiff::empty();
        for src in 0..=top {
            for dst in 0..=top {
                let a = self.blocks.get(&(src, dst));
                let b = o.blocks.get(&(src, dst));
                if a.is_none() && b.is_none() {
                    continue;
                }
                if self.is_broken(src, dst) || o.is_broken(src, dst) {
                    d.skipped += 1;
                    continue;
                }
                let diff = match (a, b) {
                    (Some(a), Some(b)) => a.sub(b),
                    (Some(a), None) => a.clone(),
                    (None, Some(b)) => b.scale(&-S::one()),
                    (None, None) => unreachable!(),
                };
                d.compared += 1;
                d.exact &= diff.is_zero();
                d.max = d.max.max(diff.max_abs());
            }
        }
        d
    }

    /// Largest entry over blocks with source and target ≤ `window`.
    pub fn window_max_abs(&self, window: usize) -> f64 {
        self.blocks
            .iter()
            .filter(|((s, t), _)| *s <= window && *t <= window)
            .map(|(_, m)| m.max_abs())
            .fold(0.0, f64::max)
    }

    /// Flattened matrix on the full truncated space (basis ordered by weight).
    pub fn dense(&self) -> Mat<S> {
        let offs: Vec<usize> = (0..self.dims.len()).map(|n| self.dims[..n].iter().sum()).collect();
        let total: usize = self.dims.iter().sum();
        let mut out = Mat::zeros(total, total);
        for (&(src, dst), m) in &self.blocks {
            for i in 0..m.rows() {
                for j in 0..m.cols() {
                    out.set(offs[dst] + i, offs[src] + j, m.get(i, j).clone());
                }
            }
        }
        out
    }

    /// Inverse of [`dense`](Self::dense); zero blocks are dropped and nothing
    /// is marked as spilling.
    pub fn from_dense(dims: &[usize], m: &Mat<S>) -> Self {
        let offs: Vec<usize> = (0..dims.len()).map(|n| dims[..n].iter().sum()).collect();
        let mut op = Self::zero(dims);
        for (src, &ds) in dims.iter().enumerate() {
            for (dst, &dt) in dims.iter().enumerate() {
                if ds == 0 || dt == 0 {
                    continue;
                }
                let b = Mat::from_fn(dt, ds, |i, j| m.get(offs[dst] + i, offs[src] + j).clone());
                if !b.is_zero() {
                    op.blocks.insert((src, dst), b);
                }
            }
        }
        op
    }
}

/// JSON encoding of scalars: exact entries as a pair of `"p/q"` strings,
/// float entries as a pair of numbers.
pub trait JsonScalar: Scalar {
    const KIND: &'static str;
    fn to_json(&self) -> Value;
    fn from_json(v: &Value) -> Option<Self>;
}

impl JsonScalar for Qc {
    const KIND: &'static str = "exact";
    fn to_json(&self) -> Value {
        json!([format_rational(&self.re), format_rational(&self.im)])
    }
    fn from_json(v: &Value) -> Option<Self> {
        let a = v.as_array()?;
        if a.len() != 2 {
            return None;
        }
        Some(Qc::new(parse_rational(a[0].as_str()?)?, parse_rational(a[1].as_str()?)?))
    }
}

impl JsonScalar for Complex64 {
    const KIND: &'static str = "float";
    fn to_json(&self) -> Value {
        json!([self.re, self.im])
    }
    fn from_json(v: &Value) -> Option<Self> {
        let a = v.as_array()?;
        if a.len() != 2 {
            return None;
        }
        Some(Complex64::new(a[0].as_f64()?, a[1].as_f64()?))
    }
}

pub fn matrix_to_json<S: JsonScalar>(m: &Mat<S>) -> Value {
    Value::Array((0..m.rows()).map(|i| Value::Array(m.row(i).iter().map(|x| x.to_json()).collect())).collect())
}

pub fn matrix_from_json<S: JsonScalar>(v: &Value, rows: usize, cols: usize) -> Option<Mat<S>> {
    let rs = v.as_array()?;
    if rs.len() != rows {
        return None;
    }
    let mut out = Vec::with_capacity(rows);
    for r in rs {
        let r = r.as_array()?;
        if r.len() != cols {
            return None;
        }
        out.push(r.iter().map(S::from_json).collect::<Option<Vec<S>>>()?);
    }
    if rows == 0 {
        return Some(Mat::zeros(0, cols));
    }
    Some(Mat::from_rows(out))
}

impl<S: JsonScalar> BlockOperator<S> {
    pub fn to_json(&self) -> Value {
        let blocks: Vec<Value> = self
            .blocks
            .iter()
            .map(|(&(src, dst), m)| {
                json!({"src": src, "dst": dst, "rows": m.rows(), "cols": m.cols(), "entries": matrix_to_json(m)})
            })
            .collect();
        json!({
            "kind": S::KIND,
            "dims": self.dims,
            "blocks": blocks,
            "spill": self.spill.iter().collect::<Vec<_>>(),
            "broken": self.broken.iter().map(|(s, t)| [s, t]).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |what: &str| Error::Shape(format!("operator JSON: {what}"));
        if v.get("kind").and_then(Value::as_str) != Some(S::KIND) {
            return Err(bad("scalar kind"));
        }
        let dims: Vec<usize> = v
            .get("dims")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("dims"))?
            .iter()
            .map(|d| d.as_u64().map(|d| d as usize))
            .collect::<Option<_>>()
            .ok_or_else(|| bad("dims"))?;
        let mut op = Self::zero(&dims);
        for b in v.get("blocks").and_then(Value::as_array).ok_or_else(|| bad("blocks"))? {
            let get = |k: &str| b.get(k).and_then(Value::as_u64).map(|x| x as usize).ok_or_else(|| bad(k));
            let (src, dst, rows, cols) = (get("src")?, get("dst")?, get("rows")?, get("cols")?);
            let m = matrix_from_json(b.get("entries").ok_or_else(|| bad("entries"))?, rows, cols)
                .ok_or_else(|| bad("entries"))?;
            op.insert_block(src, dst, m)?;
        }
        if let Some(s) = v.get("spill").and_then(Value::as_array) {
            for x in s {
                op.spill.insert(x.as_u64().ok_or_else(|| bad("spill"))? as usize);
            }
        }
        if let Some(s) = v.get("broken").and_then(Value::as_array) {
            for x in s {
                let p = x.as_array().ok_or_else(|| bad("broken"))?;
                let g = |i: usize| p.get(i).and_then(Value::as_u64).map(|x| x as usize).ok_or_else(|| bad("broken"));
                op.broken.insert((g(0)?, g(1)?));
            }
        }
        Ok(op)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Qc {
        Qc::int(n)
    }

    #[test]
    fn project_weight_range_and_idempotence() {
        let dims = [1, 2, 1];
        let v = GradedVector::from_components(&dims, vec![vec![q(1)], vec![q(2), q(3)], vec![q(4)]]).unwrap();
        let p = v.project_weight(1).unwrap();
        assert_eq!(p.project_weight(1).unwrap(), p);
        assert!(v.project_weight(3).is_err());
        assert!(v.project_weight(-1).is_err());
        let sum = (0..3).map(|n| v.project_weight(n).unwrap()).reduce(|a, b| a.add(&b)).unwrap();
        assert_eq!(sum, v);
    }

    #[test]
    fn raising_past_cutoff_sets_tail() {
        let dims = [1, 1, 1];
        let op = BlockOperator::<Qc>::homogeneous(&dims, 3, |_, _| Some(Mat::identity(1)));
        let v = GradedVector::basis(&dims, 0, 0);
        let out = op.apply(&v).unwrap();
        assert!(out.is_zero());
        assert!(out.tail());
        let z = BlockOperator::<Qc>::zero(&dims).apply(&v).unwrap();
        assert!(z.is_zero() && !z.tail());
    }

    #[test]
    fn apply_rejects_wrong_dims() {
        let op = BlockOperator::<Qc>::identity(&[1, 2]);
        assert!(op.apply(&GradedVector::zeros(&[1, 1])).is_err());
    }

    #[test]
    fn composing_through_discarded_region_marks_block_broken() {
        let dims = [1, 1, 1];
        let up = BlockOperator::<Qc>::homogeneous(&dims, 1, |_, _| Some(Mat::identity(1)));
        let down = BlockOperator::<Qc>::homogeneous(&dims, -1, |_, _| Some(Mat::identity(1)));
        let p = down.compose(&up);
        // weight 2 → 3 (discarded) → 2: the (2,2) block is incomplete.
        assert!(p.is_broken(2, 2));
        assert!(!p.is_broken(1, 1));
        assert_eq!(p.block(1, 1), Some(&Mat::identity(1)));
    }

    #[test]
    fn json_round_trip_exact() {
        let mut op = BlockOperator::<Qc>::zero(&[1, 2]);
        op.insert_block(0, 1, Mat::from_rows(vec![vec![Qc::real(crate::scalar::rat(-11, 5))], vec![q(0)]])).unwrap();
        let back = BlockOperator::<Qc>::from_json(&op.to_json()).unwrap();
        assert_eq!(back, op);
    }
}
