//! Correlators, the Reeh-Schlieder rank experiment, polynomial growth of
//! matrix elements, smeared locality leakage, and the spectrum and
//! cyclicity checks.

use std::ops::RangeInclusive;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::circle::{raised_cosine, TestFunction};
use crate::error::{Error, Result};
use crate::graded::{BlockOperator, Covector, GradedVector};
use crate::linalg::{rank, Mat};
use crate::scalar::{Qc, Scalar};
use crate::vertex::{Field, Model, ModelScalar};

use super::{smear, smear_tower};

/// `λ(φ₁(f₁)⋯φ_k(f_k)Ω)`. If some intermediate vector loses components above
/// the truncation that the remaining operators could lower back to `λ`'s
/// weight, the value is not determined by the truncation and the result is
/// an inconclusive error.
pub fn correlator<S: ModelScalar>(model: &Model, lambda: &Covector<S>, letters: &[(&Field, &TestFunction)]) -> Result<S> {
    let top = model.max_weight() as i64;
    let mut v = S::vacuum(model);
    for (idx, (field, f)) in letters.iter().enumerate().rev() {
        let op = smear_tower(S::tower(field), f, S::from_c64);
        let had_tail = v.tail();
        v = op.apply(&v)?;
        if v.tail() && !had_tail {
            let lowering: i64 = letters[..idx].iter().map(|(_, g)| g.coeffs().map(|(n, _)| n).max().unwrap_or(0).max(0)).sum();
            if top + 1 - lowering <= lambda.weight as i64 {
                return Err(Error::Inconclusive(format!(
                    "letter {} pushes the vector above weight {top}, and the remaining letters can lower it by {lowering}",
                    idx + 1
                )));
            }
        }
    }
    lambda.pair(&v)
}

/// One row of a correlator table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorrelatorRow {
    pub k: usize,
    pub fields: String,
    pub functions: String,
    pub re: f64,
    pub im: f64,
}

impl CorrelatorRow {
    pub fn new(letters: &[(&Field, &TestFunction)], value: Complex64) -> Self {
        CorrelatorRow {
            k: letters.len(),
            fields: letters.iter().map(|(f, _)| f.name()).collect::<Vec<_>>().join(" "),
            functions: letters.iter().map(|(_, g)| g.describe()).collect::<Vec<_>>().join(" "),
            re: value.re,
            im: value.im,
        }
    }
}

/// CSV with columns `k, fields, functions, re, im`.
pub fn correlator_csv(rows: &[CorrelatorRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Structural(format!("csv: {e}")))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Structural(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Raised-cosine bumps of widths `L/4` and `L/2` (with `L` the arc length of
/// `(θ₁, θ₂)`), each at 8 centers spaced so the whole bump lies inside the
/// arc, projected to `band`.
pub fn bump_dictionary(interval: (f64, f64), band: usize) -> Vec<TestFunction> {
    let (a, b) = interval;
    let len = b - a;
    let mut out = Vec::with_capacity(16);
    for width in [len / 4.0, len / 2.0] {
        for i in 0..8 {
            let center = a + width / 2.0 + (len - width) * i as f64 / 7.0;
            out.push(raised_cosine(center, width, band));
        }
    }
    out
}

/// Outcome of the Reeh-Schlieder rank experiment.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankReport {
    pub rank: usize,
    pub full_dim: usize,
    pub vectors: usize,
    /// Singular values of the column-normalized matrix, largest first.
    pub singular_values: Vec<f64>,
    /// `σ_{full_dim} / σ_max`, zero when there are fewer singular values.
    pub sigma_ratio: f64,
}

impl RankReport {
    pub fn full_rank(&self) -> bool {
        self.rank == self.full_dim && self.sigma_ratio > 1e-8
    }
}

/// Numerical rank of `{φ₁(f₁)⋯φ_k(f_k)Ω : k ≤ K}` projected to weights
/// `≤ weight_cutoff`, with each `fᵢ` from [`bump_dictionary`]. Rank counts
/// singular values above `1e-8·σ_max` after normalizing every column.
pub fn reeh_schlieder_rank(
    model: &Model,
    interval: (f64, f64),
    band: usize,
    max_len: usize,
    weight_cutoff: usize,
) -> Result<RankReport> {
    if weight_cutoff > model.window() {
        return Err(Error::WeightRange { weight: weight_cutoff as i64, max: model.window() });
    }
    let dict = bump_dictionary(interval, band);
    let ops: Vec<BlockOperator<Complex64>> =
        model.generators().iter().flat_map(|g| dict.iter().map(move |f| smear(g, f).operator)).collect();
    let mut level = vec![model.vacuum().to_c64()];
    let mut all = level.clone();
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(level.len() * ops.len());
        for v in &level {
            for op in &ops {
                next.push(op.apply(v)?);
            }
        }
        all.extend(next.iter().cloned());
        level = next;
    }
    let full_dim: usize = model.dims()[..=weight_cutoff].iter().sum();
    let cols: Vec<Vec<Complex64>> = all
        .iter()
        .map(|v| (0..=weight_cutoff).flat_map(|w| v.component(w).iter().copied()).collect::<Vec<_>>())
        .filter_map(|c| {
            let norm = c.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            (norm > 1e-300).then(|| c.into_iter().map(|x| x / norm).collect())
        })
        .collect();
    let vectors = all.len();
    if cols.is_empty() {
        return Ok(RankReport { rank: 0, full_dim, vectors, singular_values: vec![], sigma_ratio: 0.0 });
    }
    // Tall matrix: one row per vector.
    let m = DMatrix::from_fn(cols.len(), full_dim, |i, j| cols[i][j]);
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let smax = sv[0];
    let rank = sv.iter().filter(|&&s| s > 1e-8 * smax).count();
    let sigma_ratio = if sv.len() >= full_dim && full_dim > 0 { sv[full_dim - 1] / smax } else { 0.0 };
    Ok(RankReport { rank, full_dim, vectors, singular_values: sv, sigma_ratio })
}

/// Growth of `⟨u′, v¹_m ⋯ u⟩` in the mode index.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum OrderEstimate {
    /// Least-squares slope of `log|pairing|` against `log|m|`.
    Fit { degree: f64, max_residual: f64, points: usize },
    /// Only `m = 0` contributes: a constant.
    Constant,
    /// Fewer than two nonzero points away from `m = 0`.
    Degenerate { points: usize },
}

impl OrderEstimate {
    pub fn degree(&self) -> Option<f64> {
        match self {
            OrderEstimate::Fit { degree, .. } => Some(*degree),
            OrderEstimate::Constant => Some(0.0),
            OrderEstimate::Degenerate { .. } => None,
        }
    }
}

/// Pairings `⟨u′, v_m u⟩` for one field, or `⟨u′, v¹_m v²_{−m} u⟩` for two,
/// over `modes`, fitted on a log-log scale. A diagnostic for the polynomial
/// bound on matrix elements.
pub fn order_estimate(
    model: &Model,
    fields: &[&Field],
    u: &GradedVector<Qc>,
    dual: &Covector<Qc>,
    modes: RangeInclusive<i64>,
) -> Result<OrderEstimate> {
    if fields.is_empty() || fields.len() > 2 {
        return Err(Error::Shape("order estimate takes one or two fields".into()));
    }
    let _ = model;
    let mut points = Vec::new();
    let mut zero_mode = false;
    for m in modes {
        let mut v = u.clone();
        if let Some(second) = fields.get(1) {
            v = second.mode(-m).apply(&v)?;
        }
        v = fields[0].mode(m).apply(&v)?;
        let p = dual.pair(&v)?;
        if p.is_zero() {
            continue;
        }
        if m == 0 {
            zero_mode = true;
        } else {
            points.push(((m.unsigned_abs() as f64).ln(), p.modulus().ln()));
        }
    }
    if points.is_empty() && !zero_mode {
        return Err(Error::UndefinedFit);
    }
    if points.is_empty() {
        return Ok(OrderEstimate::Constant);
    }
    let xs: std::collections::BTreeSet<u64> = points.iter().map(|(x, _)| x.to_bits()).collect();
    if xs.len() < 2 {
        return Ok(OrderEstimate::Degenerate { points: points.len() });
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let max_residual = points.iter().map(|p| (p.1 - icpt - slope * p.0).abs()).fold(0.0, f64::max);
    Ok(OrderEstimate::Fit { degree: slope, max_residual, points: points.len() })
}

/// `‖[φ(f), ψ(g)]Ω‖` restricted to the trusted window. Small but not zero
/// for band-limited bumps with disjoint supports.
pub fn smeared_locality_leakage(model: &Model, phi: &Field, f: &TestFunction, psi: &Field, g: &TestFunction) -> Result<f64> {
    let a = smear(phi, f).operator;
    let b = smear(psi, g).operator;
    let v = a.commutator(&b).apply(&model.vacuum().to_c64())?;
    Ok((0..=model.window()).flat_map(|w| v.component(w).iter().map(|x| x.norm_sqr())).sum::<f64>().sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumReport {
    /// Weights carrying states, each an exact `L₀` eigenvalue.
    pub eigenvalues: Vec<usize>,
    /// `L₀` is exactly `w·id` on each `V(w)` with no other blocks.
    pub exact: bool,
}

pub fn spectrum_check(model: &Model) -> SpectrumReport {
    let l0 = model.l(0);
    let dims = model.dims();
    let mut exact = l0.blocks().all(|(&(s, t), _)| s == t);
    let mut eigenvalues = Vec::new();
    for (w, &d) in dims.iter().enumerate() {
        if d == 0 {
            continue;
        }
        exact &= l0.block_or_zero(w, w) == Mat::identity(d).scale(&Qc::int(w as i64));
        eigenvalues.push(w);
    }
    SpectrumReport { eigenvalues, exact }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CyclicityReport {
    pub span_dims: Vec<usize>,
    pub dims: Vec<usize>,
}

impl CyclicityReport {
    pub fn full(&self) -> bool {
        self.span_dims == self.dims
    }
}

/// Exact rank, weight by weight, of the span of creation-mode monomials of
/// the generators applied to `Ω`.
pub fn vacuum_cyclicity(model: &Model) -> CyclicityReport {
    let dims = model.dims();
    let mut span: Vec<Vec<GradedVector<Qc>>> = vec![Vec::new(); dims.len()];
    span[0].push(model.vacuum().clone());
    for w in 1..dims.len() {
        let mut cands = Vec::new();
        for g in model.generators() {
            for j in (-(w as i64))..=-1 {
                let src = (w as i64 + j) as usize;
                for v in &span[src] {
                    cands.push(g.mode(j).apply(v).expect("dims"));
                }
            }
        }
        // Keep an independent subset.
        let mut kept: Vec<GradedVector<Qc>> = Vec::new();
        for c in cands {
            let mut cols: Vec<Vec<Qc>> = kept.iter().map(|k| k.component(w).to_vec()).collect();
            cols.push(c.component(w).to_vec());
            if rank(&Mat::from_columns(dims[w], &cols), 0.0) == cols.len() {
                kept.push(c);
            }
        }
        span[w] = kept;
    }
    CyclicityReport { span_dims: span.iter().map(Vec::len).collect(), dims: dims.to_vec() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn two_point_function() {
        let m = Model::heisenberg(4);
        let j = &m.generators()[0];
        let vac = Covector::<Complex64>::dual_basis(m.dims(), 0, 0);
        let (e1, em1, e2) = (TestFunction::basis(1), TestFunction::basis(-1), TestFunction::basis(2));
        let v = correlator(&m, &vac, &[(j, &e1), (j, &em1)]).unwrap();
        assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        let v = correlator(&m, &vac, &[(j, &e2), (j, &em1)]).unwrap();
        assert_eq!(v, Complex64::new(0.0, 0.0));
        let v: Complex64 = correlator(&m, &vac, &[]).unwrap();
        assert_eq!(v, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn correlator_flags_lost_components() {
        let m = Model::heisenberg(3);
        let j = &m.generators()[0];
        let vac = Covector::<Qc>::dual_basis(m.dims(), 0, 0);
        let (up, down) = (TestFunction::basis(-4), TestFunction::basis(4));
        assert!(matches!(correlator(&m, &vac, &[(j, &down), (j, &up)]), Err(Error::Inconclusive(_))));
    }

    #[test]
    fn spectrum_and_cyclicity() {
        let m = Model::virasoro(&rat(1, 2), 6, false);
        let s = spectrum_check(&m);
        assert!(s.exact);
        assert_eq!(s.eigenvalues, vec![0, 2, 3, 4, 5, 6]);
        assert!(vacuum_cyclicity(&m).full());
    }

    #[test]
    fn order_estimate_cases() {
        let m = Model::heisenberg(4);
        let j = &m.generators()[0];
        let dual = Covector::dual_basis(m.dims(), 1, 0);
        assert_eq!(order_estimate(&m, &[j], m.vacuum(), &dual, -3..=3).unwrap(), OrderEstimate::Degenerate { points: 1 });
        let id = Field::identity(&m);
        let vac = Covector::dual_basis(m.dims(), 0, 0);
        assert_eq!(order_estimate(&m, &[&id], m.vacuum(), &vac, -3..=3).unwrap(), OrderEstimate::Constant);
        let far = Covector::dual_basis(m.dims(), 4, 0);
        assert_eq!(order_estimate(&m, &[&id], m.vacuum(), &far, -3..=3).unwrap_err(), Error::UndefinedFit);
    }
}
