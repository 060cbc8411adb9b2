//! Independent oracles shared by the integration tests. Nothing here calls
//! into the library's algebra; the Virasoro pairing is computed by brute-force
//! commutation on partitions.

#![allow(dead_code)]

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use va_wightman::Rational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

/// Partitions of `n`, by the usual coin-change recursion.
pub fn partition_count(n: usize) -> usize {
    partitions_with_min_part(n, 1)
}

/// Partitions of `n` into parts `≥ min`.
pub fn partitions_with_min_part(n: usize, min: usize) -> usize {
    let mut p = vec![0usize; n + 1];
    p[0] = 1;
    for part in min..=n {
        for k in part..=n {
            p[k] += p[k - part];
        }
    }
    p[n]
}

/// Nonincreasing lists of parts `≥ min` summing to `n`.
pub fn partitions(n: usize, min: usize) -> Vec<Vec<i64>> {
    fn go(n: usize, max: usize, min: usize, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if n == 0 {
            out.push(cur.clone());
            return;
        }
        for p in (min..=max.min(n)).rev() {
            cur.push(p as i64);
            go(n - p, p, min, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(n, n, min, &mut Vec::new(), &mut out);
    out
}

/// State of the Virasoro vacuum module: `L_{−p₁}⋯L_{−p_k}Ω` with
/// `p₁ ≥ ⋯ ≥ p_k ≥ 2`, keyed by the parts.
pub type VirState = BTreeMap<Vec<i64>, Rational>;

pub struct VirasoroOracle {
    pub c: Rational,
}

impl VirasoroOracle {
    fn add(out: &mut VirState, k: Vec<i64>, v: Rational) {
        let e = out.entry(k).or_insert_with(Rational::zero);
        *e += v;
    }

    /// `L_{−p}` on an ordered monomial, reordering with `[L_{−p}, L_{−q}] = (q−p)L_{−p−q}`.
    fn create(&self, p: i64, mono: &[i64]) -> VirState {
        let mut out = VirState::new();
        match mono.first() {
            None if p <= 1 => {}
            Some(&q) if q > p => {
                for (k, v) in self.create(p, &mono[1..]) {
                    for (k2, v2) in self.create(q, &k) {
                        Self::add(&mut out, k2, &v * &v2);
                    }
                }
                if q != p {
                    for (k, v) in self.apply(-(p + q), &mono[1..]) {
                        Self::add(&mut out, k, v * Rational::from_integer((q - p).into()));
                    }
                }
            }
            _ => {
                let mut k = vec![p];
                k.extend_from_slice(mono);
                out.insert(k, Rational::one());
            }
        }
        out
    }

    /// `L_m` on an ordered monomial.
    pub fn apply(&self, m: i64, mono: &[i64]) -> VirState {
        let mut out = VirState::new();
        if m < 0 {
            return self.create(-m, mono);
        }
        let Some((&p, rest)) = mono.split_first() else {
            return out;
        };
        // L_m L_{−p} R = L_{−p} L_m R + (m+p) L_{m−p} R + (c/12)(m³−m) δ_{m,p} R
        for (k, v) in self.apply(m, rest) {
            for (k2, v2) in self.create(p, &k) {
                Self::add(&mut out, k2, &v * &v2);
            }
        }
        for (k, v) in self.apply(m - p, rest) {
            Self::add(&mut out, k, v * Rational::from_integer((m + p).into()));
        }
        if m == p {
            let central = &self.c * rat(m * m * m - m, 12);
            Self::add(&mut out, rest.to_vec(), central);
        }
        out.retain(|_, v| !v.is_zero());
        out
    }

    /// `(L_{−λ}Ω, L_{−μ}Ω)` with `L_n` adjoint to `L_{−n}`.
    pub fn pairing(&self, lambda: &[i64], mu: &[i64]) -> Rational {
        let mut state = VirState::new();
        state.insert(mu.to_vec(), Rational::one());
        for &p in lambda {
            let mut next = VirState::new();
            for (k, v) in &state {
                for (k2, v2) in self.apply(p, k) {
                    Self::add(&mut next, k2, v * &v2);
                }
            }
            state = next;
        }
        state.get(&Vec::new()).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn gram(&self, level: usize) -> Vec<Vec<Rational>> {
        let basis = partitions(level, 2);
        basis.iter().map(|l| basis.iter().map(|m| self.pairing(l, m)).collect()).collect()
    }
}

/// Determinant by fraction-exact Gaussian elimination.
pub fn det(mut m: Vec<Vec<Rational>>) -> Rational {
    let n = m.len();
    let mut d = Rational::one();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !m[r][col].is_zero()) else {
            return Rational::zero();
        };
        if piv != col {
            m.swap(piv, col);
            d = -d;
        }
        let p = m[col][col].clone();
        d *= &p;
        let pivot_row = m[col].clone();
        for row in &mut m[col + 1..] {
            let f = &row[col] / &p;
            for (x, y) in row.iter_mut().zip(&pivot_row).skip(col) {
                *x -= &f * y;
            }
        }
    }
    d
}

/// Rank by the same elimination.
pub fn rank(mut m: Vec<Vec<Rational>>) -> usize {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut r = 0;
    for col in 0..cols {
        let Some(piv) = (r..rows).find(|&i| !m[i][col].is_zero()) else { continue };
        m.swap(piv, r);
        let pivot_row = m[r].clone();
        let p = &pivot_row[col];
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && !row[col].is_zero() {
                let f = &row[col] / p;
                for (x, y) in row.iter_mut().zip(&pivot_row).skip(col) {
                    *x -= &f * y;
                }
            }
        }
        r += 1;
    }
    r
}
