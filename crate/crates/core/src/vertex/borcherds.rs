//! Borcherds product and commutator formulas, locality, and fields of
//! arbitrary states.

use std::collections::HashMap;
use std::ops::RangeInclusive;

use num_traits::Zero;

use super::seed::Letter;
use super::{Field, Model, ModeTower};
use crate::error::{Error, Result};
use crate::graded::{BlockOperator, GradedVector, WindowDiff};
use crate::scalar::{binomial, sign, Qc, Scalar};

fn compose_if(a: &BlockOperator<Qc>, b: &BlockOperator<Qc>) -> Option<BlockOperator<Qc>> {
    let empty = |o: &BlockOperator<Qc>| o.blocks().next().is_none() && o.spill().is_empty() && o.broken().is_empty();
    if empty(a) || empty(b) {
        return None;
    }
    Some(a.compose(b))
}

/// Unshifted mode `(u₍ₙ₎v)₍ₖ₎` by the Borcherds product formula
/// `Σ_{j≥0} (−1)ʲ C(n,j) (u₍ₙ₋ⱼ₎v₍ₖ₊ⱼ₎ − (−1)ⁿ v₍ₙ₊ₖ₋ⱼ₎u₍ⱼ₎)`.
/// For `n < 0` the sum is infinite, but on `V(w)` the first term vanishes for
/// `j > w + d_v − 1 − k` and the second for `j > w + d_u − 1`.
pub(crate) fn product_mode(u: &Field, n: i64, v: &Field, k: i64) -> BlockOperator<Qc> {
    let dims = u.tower().dims().to_vec();
    let top = dims.len() as i64 - 1;
    let (du, dv) = (u.dim() as i64, v.dim() as i64);
    let jmax = if n >= 0 { n } else { (top + dv - 1 - k).max(top + du - 1).max(0) };
    let dres = du + dv - n - 1;
    let mut acc = BlockOperator::zero_with_shift(&dims, dres - 1 - k);
    for j in 0..=jmax {
        let c = binomial(n, j as u32);
        if c.is_zero() {
            continue;
        }
        let c = Qc::real(c * crate::scalar::rat(sign(j), 1));
        if let Some(t) = compose_if(&u.mode_unshifted(n - j), &v.mode_unshifted(k + j)) {
            acc = acc.add_scaled(&t, &c);
        }
        if let Some(t) = compose_if(&v.mode_unshifted(n + k - j), &u.mode_unshifted(j)) {
            acc = acc.add_scaled(&t, &(-c * Qc::int(sign(n))));
        }
    }
    acc
}

fn check_window(op: &BlockOperator<Qc>, mode: i64, window: Option<usize>) -> Result<()> {
    if let Some(w) = window {
        if let Some(&(src, _)) = op.broken().iter().find(|(s, t)| *s <= w && *t <= w) {
            return Err(Error::Truncation { mode, weight: src });
        }
    }
    Ok(())
}

/// The field of `u₍ₙ₎v`, with every mode from the Borcherds product formula.
/// With `window = Some(w)`, any block with source and target ≤ `w` that would
/// need discarded components is reported as a truncation error.
pub fn borcherds_product(u: &Field, n: i64, v: &Field, window: Option<usize>) -> Result<Field> {
    let d = u.dim() as i64 + v.dim() as i64 - n - 1;
    if d < 0 {
        return Err(Error::Structural(format!("{}_({n}){} has negative weight {d}", u.name(), v.name())));
    }
    let state = u.mode_unshifted(n).apply(v.state())?;
    let dims = u.tower().dims().to_vec();
    let top = dims.len() as i64 - 1;
    let mut modes = Vec::with_capacity(2 * top as usize + 1);
    for ks in -top..=top {
        let op = product_mode(u, n, v, ks + d - 1);
        check_window(&op, ks, window)?;
        modes.push(op);
    }
    let tower = ModeTower::new(d as usize, &dims, modes)?;
    Ok(Field::new(format!("{}_({n}){}", u.name(), v.name()), state, tower))
}

/// `[u₍ₘ₎, v₍ₖ₎] = Σⱼ C(m,j) (u₍ⱼ₎v)₍ₘ₊ₖ₋ⱼ₎` (unshifted indices). Only
/// `j < d_u + d_v` contribute, since `u₍ⱼ₎v` has weight `d_u + d_v − j − 1`.
pub fn borcherds_commutator(u: &Field, v: &Field, m: i64, k: i64) -> BlockOperator<Qc> {
    let dims = u.tower().dims().to_vec();
    let (du, dv) = (u.dim() as i64, v.dim() as i64);
    let mut acc = BlockOperator::zero_with_shift(&dims, -(k - dv + 1) - (m - du + 1));
    for j in 0..du + dv {
        let c = binomial(m, j as u32);
        if c.is_zero() {
            continue;
        }
        acc = acc.add_scaled(&product_mode(u, j, v, m + k - j), &Qc::real(c));
    }
    acc
}

/// Minimal locality order found on a window of mode pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalityReport {
    /// Least order for which every tested combination vanishes.
    pub minimal_order: Option<usize>,
    /// `(order, all combinations vanish exactly)` for each trial order.
    pub per_order: Vec<(usize, bool)>,
    pub compared_blocks: usize,
    pub skipped_blocks: usize,
}

impl LocalityReport {
    /// Some tested block depended on discarded components.
    pub fn inconclusive(&self) -> bool {
        self.skipped_blocks > 0
    }

    pub fn vanishes_at(&self, order: usize) -> Option<bool> {
        self.per_order.iter().find(|(o, _)| *o == order).map(|(_, v)| *v)
    }
}

/// Checks `Σᵢ (−1)ⁱ C(N,i) [u₍ₚ₊N₋ᵢ₎, v₍q+ᵢ₎] = 0` exactly on weights ≤ `window`
/// for all `p ∈ ps`, `q ∈ qs` and `N = 0..=max_order`.
pub fn locality_order_check(
    u: &Field,
    v: &Field,
    max_order: usize,
    ps: RangeInclusive<i64>,
    qs: RangeInclusive<i64>,
    window: usize,
) -> LocalityReport {
    let dims = u.tower().dims().to_vec();
    let zero = BlockOperator::<Qc>::zero(&dims);
    let mut report = LocalityReport { minimal_order: None, per_order: Vec::new(), compared_blocks: 0, skipped_blocks: 0 };
    for order in 0..=max_order {
        let mut diff = WindowDiff::empty();
        for p in ps.clone() {
            for q in qs.clone() {
                let mut acc = BlockOperator::zero(&dims);
                for i in 0..=order as i64 {
                    let c = binomial(order as i64, i as u32) * crate::scalar::rat(sign(i), 1);
                    let a = u.mode_unshifted(p + order as i64 - i);
                    let b = v.mode_unshifted(q + i);
                    acc = acc.add_scaled(&a.commutator(&b), &Qc::real(c));
                }
                diff = diff.merge(acc.window_diff(&zero, window));
            }
        }
        report.compared_blocks += diff.compared;
        report.skipped_blocks += diff.skipped;
        report.per_order.push((order, diff.exact));
        if diff.exact && report.minimal_order.is_none() {
            report.minimal_order = Some(order);
        }
    }
    report
}

/// `Y(state, z)` for a homogeneous state, built word by word with the
/// Borcherds product formula: `Y(a_n R) = Y(a)₍ₙ₊d₋₁₎ Y(R)`.
pub fn field_of_state(model: &Model, state: &GradedVector<Qc>, window: Option<usize>) -> Result<Field> {
    let Some(d) = state.homogeneous_weight() else {
        if state.is_zero() {
            return Err(Error::Structural("zero state has no field".into()));
        }
        return Err(Error::Structural("state is not homogeneous".into()));
    };
    let mut memo: HashMap<Vec<Letter>, Field> = HashMap::new();
    let dims = model.dims().to_vec();
    let top = model.max_weight() as i64;
    let mut modes: Vec<BlockOperator<Qc>> = (-top..=top).map(|n| BlockOperator::zero_with_shift(&dims, -n)).collect();
    for (i, c) in state.component(d).iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let f = word_field(model, model.word(d, i), &mut memo, window)?;
        for (slot, n) in modes.iter_mut().zip(f.tower().range()) {
            *slot = slot.add_scaled(&f.mode(n), c);
        }
    }
    let tower = ModeTower::new(d, &dims, modes)?;
    Ok(Field::new(format!("Y[{}]", describe(model, state, d)), state.clone(), tower))
}

fn describe(model: &Model, state: &GradedVector<Qc>, d: usize) -> String {
    let terms: Vec<String> = state
        .component(d)
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(i, c)| {
            let l = &model.space().labels(d)[i];
            if *c == Qc::int(1) {
                l.clone()
            } else {
                format!("({c}){l}")
            }
        })
        .collect();
    terms.join("+")
}

fn word_field(model: &Model, word: &[Letter], memo: &mut HashMap<Vec<Letter>, Field>, window: Option<usize>) -> Result<Field> {
    if let Some(f) = memo.get(word) {
        return Ok(f.clone());
    }
    let f = match word.split_first() {
        None => Field::identity(model),
        Some((&(g, n), rest)) => {
            let inner = word_field(model, rest, memo, window)?;
            let gen = &model.generators()[g];
            let m = n + gen.dim() as i64 - 1;
            borcherds_product(gen, m, &inner, window)?
        }
    };
    memo.insert(word.to_vec(), f.clone());
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn heisenberg_commutator_from_ope() {
        let m = Model::heisenberg(6);
        let j = &m.generators()[0];
        let c = borcherds_commutator(j, j, 2, -2);
        let id = BlockOperator::identity(m.dims()).scale(&Qc::int(2));
        assert!(c.window_diff(&id, m.window()).exact);
        assert!(borcherds_commutator(j, j, 2, -1).window_diff(&BlockOperator::zero(m.dims()), m.window()).exact);
    }

    #[test]
    fn virasoro_product_one_is_twice_omega() {
        let m = Model::virasoro(&rat(1, 2), 6, false);
        let w = &m.generators()[0];
        let p = borcherds_product(w, 1, w, None).unwrap();
        assert_eq!(p.dim(), 2);
        for n in p.tower().range() {
            let d = p.mode(n).window_diff(&w.mode(n).scale(&Qc::int(2)), m.window());
            assert!(d.exact, "mode {n}");
        }
    }

    #[test]
    fn field_of_generator_state_is_generator() {
        let m = Model::heisenberg(6);
        let j = &m.generators()[0];
        let f = field_of_state(&m, j.state(), Some(m.window())).unwrap();
        for n in f.tower().range() {
            assert!(f.mode(n).window_diff(&j.mode(n), m.window()).exact);
        }
    }
}
