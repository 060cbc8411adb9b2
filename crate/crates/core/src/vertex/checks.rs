//! Exact checks of the vertex algebra axioms on the truncation window.

use serde::Serialize;

use super::borcherds::borcherds_product;
use super::{Field, Model};
use crate::graded::{BlockOperator, WindowDiff};
use crate::scalar::{Qc, Scalar};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub what: String,
    pub deviation: f64,
}

/// Outcome of one family of exact identities.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AxiomReport {
    pub check: String,
    pub window: usize,
    pub max_deviation: f64,
    pub compared_blocks: usize,
    pub skipped_blocks: usize,
    pub violations: Vec<Violation>,
}

impl AxiomReport {
    pub(crate) fn new(check: impl Into<String>, window: usize) -> Self {
        AxiomReport {
            check: check.into(),
            window,
            max_deviation: 0.0,
            compared_blocks: 0,
            skipped_blocks: 0,
            violations: Vec::new(),
        }
    }

    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }

    pub(crate) fn record_ops(&mut self, what: impl FnOnce() -> String, d: WindowDiff) {
        self.compared_blocks += d.compared;
        self.skipped_blocks += d.skipped;
        self.max_deviation = self.max_deviation.max(d.max);
        if !d.exact {
            self.violations.push(Violation { what: what(), deviation: d.max });
        }
    }

    pub(crate) fn record_value(&mut self, what: impl FnOnce() -> String, exact: bool, deviation: f64) {
        self.max_deviation = self.max_deviation.max(deviation);
        if !exact {
            self.violations.push(Violation { what: what(), deviation });
        }
    }

    pub fn merge(mut self, o: AxiomReport) -> AxiomReport {
        self.max_deviation = self.max_deviation.max(o.max_deviation);
        self.compared_blocks += o.compared_blocks;
        self.skipped_blocks += o.skipped_blocks;
        self.violations.extend(o.violations);
        self
    }
}

/// Möbius covariance of a quasiprimary field:
/// `[L_m, v_n] = ((d−1)m − n) v_{m+n}` for `m ∈ {−1,0,1}` and every mode,
/// `L₀v = dv`, `L₁v = 0`, and translation `Y(L₋₁v) = ∂Y(v)`, the last one
/// through the Borcherds product `v₍₋₂₎Ω`.
pub fn mobius_axiom_check(model: &Model, field: &Field) -> AxiomReport {
    let window = model.window();
    let mut r = AxiomReport::new(format!("mobius[{}]", field.name()), window);
    let d = field.dim() as i64;
    for m in -1..=1 {
        let l = model.l(m);
        for n in field.tower().range() {
            let lhs = l.commutator(&field.mode(n));
            let rhs = field.mode(m + n).scale(&Qc::int((d - 1) * m - n));
            r.record_ops(|| format!("[L_{m}, {}_{n}]", field.name()), lhs.window_diff(&rhs, window));
        }
    }
    let v = field.state();
    let l0v = model.l(0).apply(v).expect("dims");
    let dev = l0v.sub(&v.scale(&Qc::int(d))).max_abs_diff(&v.scale(&Qc::zero()), window);
    r.record_value(|| format!("L_0 {} = {d} {}", field.name(), field.name()), l0v == v.scale(&Qc::int(d)), dev);
    let l1v = model.l(1).apply(v).expect("dims");
    r.record_value(|| format!("L_1 {} = 0", field.name()), l1v.is_zero(), l1v.norm());

    let identity = Field::identity(model);
    match borcherds_product(field, -2, &identity, None) {
        Ok(dv) => {
            let lm1v = model.l(-1).apply(v).expect("dims");
            r.record_value(
                || format!("{}_(-2)Ω = L_-1 {}", field.name(), field.name()),
                dv.state() == &lm1v,
                dv.state().max_abs_diff(&lm1v, model.max_weight()),
            );
            // (∂v)_(k) = −k v_(k−1)
            for ks in dv.tower().range() {
                let k = ks + dv.dim() as i64 - 1;
                let rhs = field.mode_unshifted(k - 1).scale(&Qc::int(-k));
                r.record_ops(|| format!("(∂{})_({k})", field.name()), dv.mode(ks).window_diff(&rhs, window));
            }
        }
        Err(e) => r.violations.push(Violation { what: format!("translation field: {e}"), deviation: f64::INFINITY }),
    }
    r
}

/// Creation: `v_n Ω = 0` for `n > −d` and `v_{−d} Ω` is the field's state.
pub fn creation_check(model: &Model, field: &Field) -> AxiomReport {
    let mut r = AxiomReport::new(format!("creation[{}]", field.name()), model.max_weight());
    let d = field.dim() as i64;
    let vac = model.vacuum();
    for n in (-d + 1)..=(model.max_weight() as i64) {
        let x = field.mode(n).apply(vac).expect("dims");
        r.record_value(|| format!("{}_{n} Ω = 0", field.name()), x.is_zero(), x.norm());
    }
    if d <= model.max_weight() as i64 {
        let x = field.mode(-d).apply(vac).expect("dims");
        let dev = x.max_abs_diff(field.state(), model.max_weight());
        r.record_value(|| format!("{}_{} Ω = state", field.name(), -d), &x == field.state(), dev);
    }
    r
}

/// `[L_m, L_n] = (m − n) L_{m+n}` on `m, n ∈ {−1,0,1}` and `L_m Ω = 0`.
pub fn sl2_relations_check(model: &Model) -> AxiomReport {
    let window = model.window();
    let mut r = AxiomReport::new("sl2", window);
    for m in -1..=1i64 {
        for n in -1..=1i64 {
            if m >= n {
                continue;
            }
            let lhs = model.l(m).commutator(model.l(n));
            let rhs = if (m + n).abs() <= 1 {
                model.l(m + n).scale(&Qc::int(m - n))
            } else {
                BlockOperator::zero(model.dims())
            };
            r.record_ops(|| format!("[L_{m}, L_{n}]"), lhs.window_diff(&rhs, window));
        }
        let x = model.l(m).apply(model.vacuum()).expect("dims");
        r.record_value(|| format!("L_{m} Ω = 0"), x.is_zero(), x.norm());
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn heisenberg_axioms() {
        let m = Model::heisenberg(8);
        let j = &m.generators()[0];
        let r = mobius_axiom_check(&m, j);
        assert!(r.pass(), "{:?}", r.violations);
        assert!(creation_check(&m, j).pass());
        assert!(sl2_relations_check(&m).pass());
    }

    #[test]
    fn virasoro_axioms() {
        let m = Model::virasoro(&rat(1, 2), 8, false);
        let w = &m.generators()[0];
        let r = mobius_axiom_check(&m, w);
        assert!(r.pass(), "{:?}", r.violations);
        assert!(r.compared_blocks > 0);
    }

    #[test]
    fn wrong_dimension_is_caught() {
        let m = Model::heisenberg(6);
        let j = &m.generators()[0];
        let fake = Field::new("J'", j.state().clone(), super::super::ModeTower::new(2, m.dims(), j.tower().range().map(|n| j.mode(n).into_owned()).collect()).unwrap());
        assert!(!mobius_axiom_check(&m, &fake).pass());
    }
}
