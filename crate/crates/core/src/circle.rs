//! Band-limited functions on S¹, the group PSU(1,1) acting on them, and its
//! Lie algebra spanned by L₋₁, L₀, L₁.
//!
//! Conventions: `e_n(z) = zⁿ`; a test function is `f = Σ f̂(n) e_n`;
//! `γ(z) = (az+b)/(b̄z+ā)` with `|a|² − |b|² = 1`, sign fixed by `Re a > 0`
//! (or `Im a > 0` when `Re a = 0`). The Lie element `Σ c_m L_m` is the vector
//! field `−i Σ c_m e^{imθ} d/dθ` and `exp(tX)` is its time-`t` flow.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde_json::{json, Value};

use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Default bound on the Fourier tail discarded by [`beta_action`].
pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct TestFunction {
    band: usize,
    coeffs: BTreeMap<i64, Complex64>,
}

impl TestFunction {
    pub fn new(band: usize, coeffs: impl IntoIterator<Item = (i64, Complex64)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (n, c) in coeffs {
            if n.unsigned_abs() as usize > band {
                return Err(Error::Shape(format!("coefficient index {n} exceeds band {band}")));
            }
            if c != Complex64::new(0.0, 0.0) {
                *map.entry(n).or_insert(Complex64::new(0.0, 0.0)) += c;
            }
        }
        Ok(TestFunction { band, coeffs: map })
    }

    pub fn zero(band: usize) -> Self {
        TestFunction { band, coeffs: BTreeMap::new() }
    }

    /// The basis function `e_n(z) = zⁿ`.
    pub fn basis(n: i64) -> Self {
        TestFunction { band: n.unsigned_abs() as usize, coeffs: BTreeMap::from([(n, Complex64::new(1.0, 0.0))]) }
    }

    pub fn band(&self) -> usize {
        self.band
    }

    pub fn coeff(&self, n: i64) -> Complex64 {
        self.coeffs.get(&n).copied().unwrap_or_default()
    }

    /// Nonzero coefficients in increasing index order.
    pub fn coeffs(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.coeffs.iter().map(|(&n, &c)| (n, c))
    }

    /// Largest |n| with a nonzero coefficient.
    pub fn support_band(&self) -> usize {
        self.coeffs.keys().map(|n| n.unsigned_abs() as usize).max().unwrap_or(0)
    }

    pub fn eval_z(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().map(|(&n, &c)| c * z.powi(n as i32)).sum()
    }

    pub fn eval(&self, theta: f64) -> Complex64 {
        self.eval_z(Complex64::from_polar(1.0, theta))
    }

    /// Coefficients of the discrete Fourier transform of `values` (taken at
    /// equispaced points `e^{2πik/K}`) restricted to `|n| ≤ band`.
    pub fn from_samples(values: &[Complex64], band: usize) -> Result<Self> {
        let k = values.len();
        let needed = 2 * band + 1;
        if k < needed {
            return Err(Error::TooFewSamples { samples: k, band, needed });
        }
        let spectrum = forward_fft(values);
        let b = band as i64;
        let coeffs = (-b..=b).map(|n| (n, spectrum[n.rem_euclid(k as i64) as usize]));
        TestFunction::new(band, coeffs)
    }

    /// Samples `f` on the smallest power-of-two grid with at least `4(band+1)` points.
    pub fn from_fn(band: usize, f: impl Fn(f64) -> Complex64) -> Self {
        let k = sample_count(band);
        let values: Vec<Complex64> = (0..k).map(|j| f(2.0 * PI * j as f64 / k as f64)).collect();
        Self::from_samples(&values, band).expect("sample grid covers the band")
    }

    pub fn sobolev_norm(&self, order: f64) -> f64 {
        self.coeffs
            .iter()
            .map(|(&n, c)| c.norm_sqr() * (1.0 + (n * n) as f64).powf(order))
            .sum::<f64>()
            .sqrt()
    }

    pub fn add(&self, o: &TestFunction) -> TestFunction {
        self.add_scaled(o, Complex64::new(1.0, 0.0))
    }

    /// `self + s·o`.
    pub fn add_scaled(&self, o: &TestFunction, s: Complex64) -> TestFunction {
        let band = self.band.max(o.band);
        TestFunction::new(band, self.coeffs().chain(o.coeffs().map(|(n, c)| (n, c * s)))).expect("band covers both")
    }

    pub fn scale(&self, s: Complex64) -> TestFunction {
        TestFunction::new(self.band, self.coeffs().map(|(n, c)| (n, c * s))).expect("same band")
    }

    /// Derivative with respect to θ.
    pub fn derivative(&self) -> TestFunction {
        TestFunction::new(self.band, self.coeffs().map(|(n, c)| (n, c * I * n as f64))).expect("same band")
    }

    /// Band-limited product (the band grows to the sum of the two bands).
    pub fn mul(&self, o: &TestFunction) -> TestFunction {
        let terms = self.coeffs().flat_map(|(n, a)| o.coeffs().map(move |(m, b)| (n + m, a * b)));
        TestFunction::new(self.band + o.band, terms).expect("product band")
    }

    pub fn reflect(&self, mode: Reflection) -> TestFunction {
        let terms: Vec<(i64, Complex64)> = match mode {
            Reflection::Invert => self.coeffs().map(|(n, c)| (-n, c)).collect(),
            Reflection::Conjugate => self.coeffs().map(|(n, c)| (-n, c.conj())).collect(),
            Reflection::ConjugateInvert => self.coeffs().map(|(n, c)| (n, c.conj())).collect(),
        };
        TestFunction::new(self.band, terms).expect("same band")
    }

    pub fn max_coeff_diff(&self, o: &TestFunction) -> f64 {
        let keys: std::collections::BTreeSet<i64> = self.coeffs.keys().chain(o.coeffs.keys()).copied().collect();
        keys.into_iter().map(|n| (self.coeff(n) - o.coeff(n)).norm()).fold(0.0, f64::max)
    }

    /// Restriction to `|n| ≤ band`.
    pub fn truncate(&self, band: usize) -> TestFunction {
        TestFunction::new(band, self.coeffs().filter(|(n, _)| n.unsigned_abs() as usize <= band)).expect("filtered")
    }

    /// Short human-readable descriptor, e.g. `e_1` or `band4[3 terms]`.
    pub fn describe(&self) -> String {
        let one = Complex64::new(1.0, 0.0);
        match self.coeffs.len() {
            0 => "0".to_string(),
            1 => {
                let (&n, &c) = self.coeffs.iter().next().unwrap();
                if c == one {
                    format!("e_{n}")
                } else {
                    format!("({}{:+}i)e_{n}", c.re, c.im)
                }
            }
            k => format!("band{}[{k} terms]", self.band),
        }
    }

    pub fn to_json(&self) -> Value {
        let coeffs: Vec<Value> = self.coeffs().map(|(n, c)| json!([n, c.re, c.im])).collect();
        json!({"band": self.band, "coeffs": coeffs})
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |w: &str| Error::Shape(format!("test function JSON: {w}"));
        let band = v.get("band").and_then(Value::as_u64).ok_or_else(|| bad("band"))? as usize;
        let mut terms = Vec::new();
        for t in v.get("coeffs").and_then(Value::as_array).ok_or_else(|| bad("coeffs"))? {
            let t = t.as_array().filter(|t| t.len() == 3).ok_or_else(|| bad("coefficient triple"))?;
            let n = t[0].as_i64().ok_or_else(|| bad("index"))?;
            let re = t[1].as_f64().ok_or_else(|| bad("re"))?;
            let im = t[2].as_f64().ok_or_else(|| bad("im"))?;
            terms.push((n, Complex64::new(re, im)));
        }
        TestFunction::new(band, terms)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reflection {
    /// `f ↦ f∘(1/z)`: `f̂(n) ↦ f̂(−n)`.
    Invert,
    /// `f ↦ f̄`: `f̂(n) ↦ conj f̂(−n)`.
    Conjugate,
    /// `f ↦ f̄∘(1/z)`: `f̂(n) ↦ conj f̂(n)`.
    ConjugateInvert,
}

/// Smallest power of two that is at least `4(band+1)`.
pub fn sample_count(band: usize) -> usize {
    (4 * (band + 1)).next_power_of_two()
}

/// Normalised forward DFT: `c_n = (1/K) Σ_k x_k e^{−2πink/K}`.
fn forward_fft(values: &[Complex64]) -> Vec<Complex64> {
    let k = values.len();
    let mut buf = values.to_vec();
    FftPlanner::<f64>::new().plan_fft_forward(k).process(&mut buf);
    let scale = 1.0 / k as f64;
    buf.iter_mut().for_each(|x| *x *= scale);
    buf
}

/// Raised-cosine bump `½(1 + cos(2π(θ−c)/w))` on `|θ−c| < w/2`, projected to `band`.
pub fn raised_cosine(center: f64, width: f64, band: usize) -> TestFunction {
    TestFunction::from_fn(band, |theta| {
        let d = (theta - center + PI).rem_euclid(2.0 * PI) - PI;
        if d.abs() < width / 2.0 {
            Complex64::new(0.5 * (1.0 + (2.0 * PI * d / width).cos()), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MoebiusElement {
    a: Complex64,
    b: Complex64,
}

impl MoebiusElement {
    /// Builds `(a, b)` after checking `|a|² − |b|² = 1` to 1e-12 (relative).
    pub fn new(a: Complex64, b: Complex64) -> Result<Self> {
        let det = a.norm_sqr() - b.norm_sqr();
        if (det - 1.0).abs() > 1e-12 * a.norm_sqr().max(1.0) {
            return Err(Error::Structural(format!("|a|²−|b|² = {det}, expected 1")));
        }
        Ok(Self::normalized(a, b))
    }

    fn normalized(a: Complex64, b: Complex64) -> Self {
        let flip = a.re < 0.0 || (a.re == 0.0 && a.im < 0.0);
        if flip {
            MoebiusElement { a: -a, b: -b }
        } else {
            MoebiusElement { a, b }
        }
    }

    pub fn identity() -> Self {
        MoebiusElement { a: Complex64::new(1.0, 0.0), b: Complex64::new(0.0, 0.0) }
    }

    /// `z ↦ e^{iφ} z`.
    pub fn rotation(phi: f64) -> Self {
        Self::normalized(Complex64::from_polar(1.0, phi / 2.0), Complex64::new(0.0, 0.0))
    }

    pub fn a(&self) -> Complex64 {
        self.a
    }

    pub fn b(&self) -> Complex64 {
        self.b
    }

    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        [[self.a, self.b], [self.b.conj(), self.a.conj()]]
    }

    pub fn inverse(&self) -> Self {
        Self::normalized(self.a.conj(), -self.b)
    }

    /// `self ∘ o`.
    pub fn compose(&self, o: &MoebiusElement) -> Self {
        let a = self.a * o.a + self.b * o.b.conj();
        let b = self.a * o.b + self.b * o.a.conj();
        Self::normalized(a, b)
    }

    pub fn apply(&self, z: Complex64) -> Complex64 {
        (self.a * z + self.b) / (self.b.conj() * z + self.a.conj())
    }

    /// `X_γ(z) = zγ'(z)/γ(z)`, real and positive on the circle.
    pub fn x_factor(&self, z: Complex64) -> Complex64 {
        z / ((self.b.conj() * z + self.a.conj()) * (self.a * z + self.b))
    }

    /// `(αγ)(z) = 1/γ(1/z)`: conjugated matrix entries.
    pub fn alpha(&self) -> Self {
        Self::normalized(self.a.conj(), self.b.conj())
    }

    /// Largest entry difference between the sign-normalised representatives.
    pub fn max_entry_diff(&self, o: &MoebiusElement) -> f64 {
        (self.a - o.a).norm().max((self.b - o.b).norm())
    }

    /// Decay ratio `|b|/|a|` of the Fourier coefficients of pulled-back functions.
    pub fn contraction(&self) -> f64 {
        self.b.norm() / self.a.norm()
    }

    /// Exponential of `t·X` for `X` in the real form Lie(Möb).
    pub fn exp(x: &LieElement, t: f64) -> Result<Self> {
        if !x.is_real(1e-12) {
            return Err(Error::Structural("exp needs an element of the real form Lie(Möb)".into()));
        }
        let m = x.scale(Complex64::new(t, 0.0)).matrix();
        let s2 = m[0][0] * m[0][0] + m[0][1] * m[1][0];
        let s = s2.sqrt();
        let (ch, sh_over_s) = if s.norm() < 1e-4 {
            // Taylor series; the odd function sinh(s)/s depends on s² only.
            (
                1.0 + s2 / 2.0 + s2 * s2 / 24.0 + s2 * s2 * s2 / 720.0,
                1.0 + s2 / 6.0 + s2 * s2 / 120.0 + s2 * s2 * s2 / 5040.0,
            )
        } else {
            (s.cosh(), s.sinh() / s)
        };
        let a = ch + sh_over_s * m[0][0];
        let b = sh_over_s * m[0][1];
        // Re-impose the determinant condition lost to round-off.
        let det = (a.norm_sqr() - b.norm_sqr()).sqrt();
        Ok(Self::normalized(a / det, b / det))
    }

    /// Principal logarithm; errors on elements with `Re a = 0` (rotation angle π),
    /// where the two square roots of the class are equally close.
    pub fn log(&self) -> Result<LieElement> {
        let c = self.a.re;
        if c.abs() < 1e-14 {
            return Err(Error::BranchCut);
        }
        let s = if c >= 1.0 { Complex64::new(c.acosh(), 0.0) } else { Complex64::new(0.0, c.acos()) };
        let factor = if s.norm() < 1e-8 { Complex64::new(1.0, 0.0) + s * s / 6.0 } else { s / s.sinh() };
        let a = [[Complex64::new(0.0, self.a.im) * factor, self.b * factor], [self.b.conj() * factor, Complex64::new(0.0, -self.a.im) * factor]];
        Ok(LieElement::from_matrix(a))
    }
}

/// `c₋₁L₋₁ + c₀L₀ + c₁L₁`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LieElement {
    pub c: [Complex64; 3],
}

impl LieElement {
    pub fn new(c_minus: Complex64, c_zero: Complex64, c_plus: Complex64) -> Self {
        LieElement { c: [c_minus, c_zero, c_plus] }
    }

    pub fn zero() -> Self {
        Self::new(Complex64::default(), Complex64::default(), Complex64::default())
    }

    /// `L_m` for `m ∈ {−1, 0, 1}`.
    pub fn l(m: i64) -> Self {
        let mut x = Self::zero();
        x.c[(m + 1) as usize] = Complex64::new(1.0, 0.0);
        x
    }

    /// `d/dθ = iL₀`, generating `R_t`.
    pub fn rotation() -> Self {
        Self::new(Complex64::default(), I, Complex64::default())
    }

    /// `sin θ d/dθ = (L₁ − L₋₁)/2`.
    pub fn sin_direction() -> Self {
        Self::new(Complex64::new(-0.5, 0.0), Complex64::default(), Complex64::new(0.5, 0.0))
    }

    /// `cos θ d/dθ = i(L₁ + L₋₁)/2`.
    pub fn cos_direction() -> Self {
        Self::new(I * 0.5, Complex64::default(), I * 0.5)
    }

    /// The three real directions above, with short names.
    pub fn basis_directions() -> [(&'static str, LieElement); 3] {
        [("rotation", Self::rotation()), ("sin", Self::sin_direction()), ("cos", Self::cos_direction())]
    }

    pub fn coeff(&self, m: i64) -> Complex64 {
        self.c[(m + 1) as usize]
    }

    /// Membership in Lie(Möb): `c₀ ∈ iℝ` and `c₋₁ = −conj(c₁)`.
    pub fn is_real(&self, tol: f64) -> bool {
        self.c[1].re.abs() <= tol && (self.c[0] + self.c[2].conj()).norm() <= tol
    }

    pub fn scale(&self, s: Complex64) -> Self {
        LieElement { c: self.c.map(|x| x * s) }
    }

    pub fn add(&self, o: &LieElement) -> Self {
        LieElement { c: [self.c[0] + o.c[0], self.c[1] + o.c[1], self.c[2] + o.c[2]] }
    }

    /// Bracket from `[L_m, L_n] = (m−n) L_{m+n}`.
    pub fn bracket(&self, o: &LieElement) -> Self {
        let mut out = Self::zero();
        for m in -1..=1i64 {
            for n in -1..=1i64 {
                let k = m + n;
                if k.abs() > 1 || m == n {
                    continue;
                }
                out.c[(k + 1) as usize] += self.coeff(m) * o.coeff(n) * (m - n) as f64;
            }
        }
        out
    }

    /// su(1,1) representative `[[c₀/2, c₋₁], [−c₁, −c₀/2]]`.
    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        [[self.c[1] / 2.0, self.c[0]], [-self.c[2], -self.c[1] / 2.0]]
    }

    pub fn from_matrix(m: [[Complex64; 2]; 2]) -> Self {
        Self::new(m[0][1], m[0][0] * 2.0, -m[1][0])
    }

    /// The vector field coefficient `g` with `X = g(θ) d/dθ`.
    pub fn vector_field(&self) -> TestFunction {
        TestFunction::new(1, (-1..=1).map(|m| (m, -I * self.coeff(m)))).expect("band 1")
    }

    pub fn max_abs_diff(&self, o: &LieElement) -> f64 {
        (0..3).map(|i| (self.c[i] - o.c[i]).norm()).fold(0.0, f64::max)
    }
}

/// Output band used by [`beta_action`] when the caller has no preference:
/// `2M` plus the decay length of the pulled-back coefficients, rounded up to
/// whole blocks of 8 modes.
pub fn default_band_out(band: usize, gamma: &MoebiusElement) -> usize {
    let r = gamma.contraction();
    let decay = if r < 1e-300 { 0.0 } else { (f64::EPSILON / 8.0).ln() / r.ln() };
    2 * band + 8 * (decay / 8.0).ceil() as usize
}

/// β_d(γ)f together with the discarded tail mass.
#[derive(Clone, Debug)]
pub struct BetaImage {
    pub function: TestFunction,
    pub tail_mass: f64,
}

/// `β_d(γ)f (z) = X_γ(γ⁻¹z)^{d−1} f(γ⁻¹z)`, projected to `|n| ≤ band_out`.
pub fn beta_action(d: u32, gamma: &MoebiusElement, f: &TestFunction, band_out: usize) -> Result<TestFunction> {
    beta_action_with_tail(d, gamma, f, band_out, DEFAULT_TAIL_TOLERANCE).map(|b| b.function)
}

pub fn beta_action_with_tail(
    d: u32,
    gamma: &MoebiusElement,
    f: &TestFunction,
    band_out: usize,
    tolerance: f64,
) -> Result<BetaImage> {
    let k = sample_count(band_out.max(f.support_band()));
    let inv = gamma.inverse();
    let values: Vec<Complex64> = (0..k)
        .map(|j| {
            let z = Complex64::from_polar(1.0, 2.0 * PI * j as f64 / k as f64);
            let w = inv.apply(z);
            let x = gamma.x_factor(w).re;
            f.eval_z(w) * x.powi(d as i32 - 1)
        })
        .collect();
    let spectrum = forward_fft(&values);
    let ki = k as i64;
    let mut tail = 0.0;
    let mut kept = Vec::new();
    for (idx, c) in spectrum.iter().enumerate() {
        let n = if (idx as i64) < ki / 2 { idx as i64 } else { idx as i64 - ki };
        if n.unsigned_abs() as usize <= band_out {
            kept.push((n, *c));
        } else {
            tail += c.norm_sqr();
        }
    }
    let tail_mass = tail.sqrt();
    if tail_mass > tolerance {
        return Err(Error::TailMass { mass: tail_mass, tolerance });
    }
    Ok(BetaImage { function: TestFunction::new(band_out, kept)?, tail_mass })
}
