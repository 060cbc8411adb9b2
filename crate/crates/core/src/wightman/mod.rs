//! The Wightman side: smeared fields `φ(f) = Σ f̂(n) φ_n`, the Möbius
//! representation `U(γ)`, covariance checks, reconstruction of the vertex
//! algebra from smeared fields, correlators and the Reeh-Schlieder rank.
//!
//! `U(γ)` is built from the factorization `γ = e^{xL₋₁} e^{yL₀} e^{zL₁}` with
//! `x = b/ā`, `e^{y} = ā^{−2}`, `z = −b̄/ā`. Each factor is a finite sum on
//! the truncation (L₋₁ and L₁ move weight by one step), and in this order no
//! intermediate vector leaves the truncation, so the blocks of `U(γ)` with
//! source and target ≤ N are exact up to round-off.

mod probes;
mod reconstruct;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::circle::{beta_action_with_tail, default_band_out, LieElement, MoebiusElement, TestFunction, DEFAULT_TAIL_TOLERANCE};
use crate::error::Result;
use crate::graded::{BlockOperator, GradedVector};
use crate::linalg::Mat;
use crate::scalar::{Qc, Scalar};
use crate::vertex::{Field, ModeTower, Model};

pub use probes::{
    bump_dictionary, correlator, correlator_csv, order_estimate, reeh_schlieder_rank, smeared_locality_leakage,
    spectrum_check, vacuum_cyclicity, CorrelatorRow, CyclicityReport, OrderEstimate, RankReport, SpectrumReport,
};
pub use reconstruct::{reconstruct_model, roundtrip_check, Reconstruction, RoundtripReport, SmearedAccess};

/// `Σ f̂(n) v_n` over the modes the truncation holds.
pub fn smear_tower<S: Scalar>(tower: &ModeTower<S>, f: &TestFunction, coeff: impl Fn(Complex64) -> S) -> BlockOperator<S> {
    let coeffs: Vec<(i64, S)> = f.coeffs().map(|(n, c)| (n, coeff(c))).collect();
    tower.smear(&coeffs)
}

/// A field smeared against a test function, realized on the truncation.
#[derive(Clone, Debug)]
pub struct SmearedField {
    pub field: String,
    pub dim: usize,
    pub function: TestFunction,
    pub operator: BlockOperator<Complex64>,
    /// Some coefficient sits at `|n| > N`; those modes act as zero (lowering)
    /// or leave the truncation (raising).
    pub clipped: bool,
}

pub fn smear(field: &Field, f: &TestFunction) -> SmearedField {
    SmearedField {
        field: field.name().to_string(),
        dim: field.dim(),
        function: f.clone(),
        operator: smear_tower(field.float_tower(), f, |c| c),
        clipped: f.support_band() > field.tower().max_weight(),
    }
}

/// Exact smearing; float coefficients enter as the dyadic rationals they are.
pub fn smear_exact(field: &Field, f: &TestFunction) -> BlockOperator<Qc> {
    smear_tower(field.tower(), f, Qc::from_c64)
}

/// `U(γ)` on the truncation together with the inverse of the truncated matrix.
#[derive(Clone, Debug)]
pub struct MoebiusRep {
    gamma: MoebiusElement,
    op: BlockOperator<Complex64>,
    inverse: BlockOperator<Complex64>,
    window: usize,
}

impl MoebiusRep {
    pub fn gamma(&self) -> &MoebiusElement {
        &self.gamma
    }

    pub fn operator(&self) -> &BlockOperator<Complex64> {
        &self.op
    }

    /// Inverse of the truncated operator (not `U(γ⁻¹)` truncated).
    pub fn inverse(&self) -> &BlockOperator<Complex64> {
        &self.inverse
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn apply(&self, v: &GradedVector<Complex64>) -> Result<GradedVector<Complex64>> {
        self.op.apply(v)
    }
}

/// `Σ_k (s^k/k!) L^k`, a finite sum since `L` moves weight by one step.
fn nilpotent_exp(l: &BlockOperator<Complex64>, s: Complex64) -> BlockOperator<Complex64> {
    let dims = l.dims().to_vec();
    let mut acc = BlockOperator::identity(&dims);
    let mut term = BlockOperator::identity(&dims);
    for k in 1..=dims.len() {
        term = l.compose(&term).scale(&(s / k as f64));
        if term.is_zero() && term.spill().is_empty() {
            break;
        }
        acc = acc.add(&term);
    }
    acc
}

fn diagonal_power(dims: &[usize], base: Complex64) -> BlockOperator<Complex64> {
    BlockOperator::homogeneous(dims, 0, |w, _| Some(Mat::identity(dims[w]).scale(&base.powi(w as i32))))
}

/// `U(γ) = e^{xL₋₁} ā^{−2L₀} e^{zL₁}`.
pub fn u_of_gamma(model: &Model, gamma: &MoebiusElement) -> Result<MoebiusRep> {
    let (a, b) = (gamma.a(), gamma.b());
    let x = b / a.conj();
    let z = -b.conj() / a.conj();
    let d = a.conj().powi(-2);
    let dims = model.dims();
    let raise = nilpotent_exp(model.l_float(-1), x);
    let lower = nilpotent_exp(model.l_float(1), z);
    let op = raise.compose(&diagonal_power(dims, d)).compose(&lower);
    let inverse = nilpotent_exp(model.l_float(1), -z)
        .compose(&diagonal_power(dims, d.inv()))
        .compose(&nilpotent_exp(model.l_float(-1), -x));
    Ok(MoebiusRep { gamma: *gamma, op, inverse, window: model.window() })
}

/// `π(X) = Σ c_m L_m` as a float operator.
pub fn lie_operator(model: &Model, x: &LieElement) -> BlockOperator<Complex64> {
    let mut op = BlockOperator::zero(model.dims());
    for m in -1..=1 {
        op = op.add_scaled(model.l_float(m), &x.coeff(m));
    }
    op
}

/// `U(γ) = exp(π(log γ))` with one dense matrix exponential of the truncated
/// generator. The truncated generator misses the part of `L₋₁` leaving the
/// truncation, so this differs from [`u_of_gamma`] by a truncation effect
/// that grows with `|b|`.
pub fn u_of_gamma_exp(model: &Model, gamma: &MoebiusElement) -> Result<MoebiusRep> {
    let x = gamma.log()?;
    let dims = model.dims();
    let dense = |x: &LieElement| {
        let m = lie_operator(model, x).dense();
        let n = m.rows();
        let e = DMatrix::from_fn(n, n, |i, j| *m.get(i, j)).exp();
        BlockOperator::from_dense(dims, &Mat::from_fn(n, n, |i, j| e[(i, j)]))
    };
    let op = dense(&x);
    let inverse = dense(&x.scale(Complex64::new(-1.0, 0.0)));
    Ok(MoebiusRep { gamma: *gamma, op, inverse, window: model.window() })
}

/// Deviations for `U(γ) φ(f) U(γ)⁻¹ = φ(β_d(γ) f)` on the trusted window.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CovarianceReport {
    /// Largest entry of `U φ(f) U⁻¹ − φ(β f)` on blocks within the window.
    pub conjugated: f64,
    /// Largest entry of `U φ(f) − φ(β f) U` on blocks within the window.
    pub intertwined: f64,
    pub tail_mass: f64,
    pub band_out: usize,
    pub window: usize,
}

/// Compares both sides of the covariance identity block by block on the
/// trusted window. `band_out` defaults to [`default_band_out`].
pub fn covariance_check(
    model: &Model,
    field: &Field,
    gamma: &MoebiusElement,
    f: &TestFunction,
    band_out: Option<usize>,
) -> Result<CovarianceReport> {
    let band_out = band_out.unwrap_or_else(|| default_band_out(f.band(), gamma));
    let beta = beta_action_with_tail(field.dim() as u32, gamma, f, band_out, DEFAULT_TAIL_TOLERANCE)?;
    let u = u_of_gamma(model, gamma)?;
    let phi = smear(field, f).operator;
    let phi_beta = smear(field, &beta.function).operator;
    let window = model.window();
    let lhs = u.op.compose(&phi);
    let conjugated = lhs.compose(&u.inverse).sub(&phi_beta).window_max_abs(window);
    let intertwined = lhs.sub(&phi_beta.compose(&u.op)).window_max_abs(window);
    Ok(CovarianceReport { conjugated, intertwined, tail_mass: beta.tail_mass, band_out, window })
}

/// Outcome of `[π(X), φ(f)] = φ((d−1) g′ f − g f′)` with `X = g d/dθ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InfinitesimalReport {
    pub exact: bool,
    pub max_deviation: f64,
    pub compared_blocks: usize,
    pub skipped_blocks: usize,
}

/// Checks the infinitesimal covariance identity exactly. Float coefficients
/// of `X` and `f` are converted to the dyadic rationals they represent, so the
/// check is a rational identity for every input. In Fourier terms the right
/// side is `Σ c_m f̂(n) ((d−1)m − n) e_{m+n}`.
pub fn infinitesimal_covariance_check(model: &Model, field: &Field, x: &LieElement, f: &TestFunction) -> InfinitesimalReport {
    let d = field.dim() as i64;
    let mut pi = BlockOperator::zero(model.dims());
    for m in -1..=1 {
        let c = Qc::from_c64(x.coeff(m));
        if !c.is_zero() {
            pi = pi.add_scaled(model.l(m), &c);
        }
    }
    let phi = smear_exact(field, f);
    let lhs = pi.commutator(&phi);
    let mut rhs = BlockOperator::zero(model.dims());
    for m in -1..=1i64 {
        let c = Qc::from_c64(x.coeff(m));
        if c.is_zero() {
            continue;
        }
        for (n, fc) in f.coeffs() {
            let k = (d - 1) * m - n;
            if k == 0 {
                continue;
            }
            let coef = &(&c * &Qc::from_c64(fc)) * &Qc::int(k);
            rhs = rhs.add_scaled(&field.mode(m + n), &coef);
        }
    }
    let diff = lhs.window_diff(&rhs, model.window());
    InfinitesimalReport { exact: diff.exact, max_deviation: diff.max, compared_blocks: diff.compared, skipped_blocks: diff.skipped }
}

/// Largest deviation of `U(γ₁)U(γ₂)` from `U(γ₁γ₂)` on the trusted window.
pub fn group_law_deviation(model: &Model, g1: &MoebiusElement, g2: &MoebiusElement) -> Result<f64> {
    let a = u_of_gamma(model, g1)?;
    let b = u_of_gamma(model, g2)?;
    let ab = u_of_gamma(model, &g1.compose(g2))?;
    Ok(a.op.compose(&b.op).sub(&ab.op).window_max_abs(model.window()))
}

/// Largest deviation of `U(γ)Ω` from `Ω`.
pub fn vacuum_invariance_deviation(model: &Model, gamma: &MoebiusElement) -> Result<f64> {
    let u = u_of_gamma(model, gamma)?;
    let vac = model.vacuum().to_c64();
    Ok(u.apply(&vac)?.max_abs_diff(&vac, model.max_weight()))
}

/// Machine-readable outcome of one check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub model: String,
    pub params: Value,
    pub max_deviation: f64,
    pub window: usize,
    pub pass: bool,
}

impl CheckReport {
    pub fn new(check: impl Into<String>, model: &Model, max_deviation: f64, pass: bool) -> Self {
        let p = model.params();
        CheckReport {
            check: check.into(),
            model: model.name().to_string(),
            params: json!({
                "c": p.central_charge.as_ref().map(crate::scalar::format_rational),
                "simple": p.simple,
                "max_weight": model.max_weight(),
                "margin": model.margin(),
            }),
            max_deviation,
            window: model.window(),
            pass,
        }
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("plain data")
    }
}
