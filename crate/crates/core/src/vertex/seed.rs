//! Vacuum modules from OPE seed data.
//!
//! A model is fixed by its generators, their dimensions, and the products
//! `a₍ⱼ₎b` for `j ≥ 0`, each written as a combination of derivatives of
//! generators and of the vacuum. The commutator of two modes then follows from
//! the Borcherds commutator formula, and states are normal-ordered monomials
//! `a¹_{n₁}⋯aᵏ_{nₖ}Ω` (creation modes only, ordered by non-increasing weight,
//! ties broken by generator index).

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};

use crate::scalar::{binomial, falling, sign, Rational};

/// `(generator, degree-shifted mode index)`.
pub type Letter = (usize, i64);
/// Creation letters, leftmost applied last.
pub type Mono = Vec<Letter>;
pub type State = BTreeMap<Mono, Rational>;

/// One term `coeff · ∂^derivative(target)` of an OPE product; `target` is a
/// generator index, or `None` for the vacuum.
#[derive(Clone, Debug)]
pub struct OpeTerm {
    pub coeff: Rational,
    pub target: Option<usize>,
    pub derivative: u32,
}

#[derive(Clone, Debug)]
pub struct Seed {
    pub names: Vec<String>,
    pub dims: Vec<usize>,
    /// `ope[a][b][j]` lists the terms of `a₍ⱼ₎b`; missing `j` means zero.
    pub ope: Vec<Vec<Vec<Vec<OpeTerm>>>>,
}

impl Seed {
    pub fn unshifted(&self, g: usize, n: i64) -> i64 {
        n + self.dims[g] as i64 - 1
    }

    pub fn shifted(&self, g: usize, m: i64) -> i64 {
        m - self.dims[g] as i64 + 1
    }

    pub fn is_creation(&self, l: Letter) -> bool {
        l.1 <= -(self.dims[l.0] as i64)
    }

    /// `[a_n, b_k]` in shifted indices, as modes plus a multiple of the identity.
    pub fn bracket(&self, a: Letter, b: Letter) -> (Vec<(Letter, Rational)>, Rational) {
        let m = self.unshifted(a.0, a.1);
        let k = self.unshifted(b.0, b.1);
        let mut modes: BTreeMap<Letter, Rational> = BTreeMap::new();
        let mut central = Rational::zero();
        for (j, terms) in self.ope[a.0][b.0].iter().enumerate() {
            let cj = binomial(m, j as u32);
            if cj.is_zero() {
                continue;
            }
            let r = m + k - j as i64;
            for t in terms {
                match t.target {
                    None => {
                        if t.derivative == 0 && r == -1 {
                            central += &cj * &t.coeff;
                        }
                    }
                    Some(c) => {
                        // (∂^p w)_(r) = (−1)^p r(r−1)⋯(r−p+1) w_(r−p)
                        let p = t.derivative;
                        let f = falling(r, p);
                        if f.is_zero() {
                            continue;
                        }
                        let coef = &cj * &t.coeff * Rational::from_integer(f) * Rational::from_integer(sign(p as i64).into());
                        let letter = (c, self.shifted(c, r - p as i64));
                        *modes.entry(letter).or_insert_with(Rational::zero) += coef;
                    }
                }
            }
        }
        (modes.into_iter().filter(|(_, c)| !c.is_zero()).collect(), central)
    }
}

/// Whether `x` may stand directly left of `y` in a normal-ordered monomial.
fn precedes(x: Letter, y: Letter) -> bool {
    (-x.1, std::cmp::Reverse(x.0)) >= (-y.1, std::cmp::Reverse(y.0))
}

pub fn mono_weight(m: &[Letter]) -> i64 {
    m.iter().map(|l| -l.1).sum()
}

fn add_into(out: &mut State, m: Mono, c: Rational) {
    if c.is_zero() {
        return;
    }
    let e = out.entry(m).or_insert_with(Rational::zero);
    *e += c;
}

fn prune(mut s: State) -> State {
    s.retain(|_, c| !c.is_zero());
    s
}

/// Memoised normal ordering of `letter · monomial`.
pub struct Straightener<'a> {
    seed: &'a Seed,
    memo: HashMap<(Letter, Mono), State>,
    sl2_memo: HashMap<(i64, Mono), State>,
}

impl<'a> Straightener<'a> {
    pub fn new(seed: &'a Seed) -> Self {
        Straightener { seed, memo: HashMap::new(), sl2_memo: HashMap::new() }
    }

    pub fn apply(&mut self, x: Letter, mono: &[Letter]) -> State {
        let key = (x, mono.to_vec());
        if let Some(s) = self.memo.get(&key) {
            return s.clone();
        }
        let s = self.compute(x, mono);
        self.memo.insert(key, s.clone());
        s
    }

    fn compute(&mut self, x: Letter, mono: &[Letter]) -> State {
        let creation = self.seed.is_creation(x);
        let Some((&y, rest)) = mono.split_first() else {
            return if creation { State::from([(vec![x], Rational::one())]) } else { State::new() };
        };
        if creation && precedes(x, y) {
            let mut m = Vec::with_capacity(mono.len() + 1);
            m.push(x);
            m.extend_from_slice(mono);
            return State::from([(m, Rational::one())]);
        }
        // x y R = y (x R) + [x, y] R
        let mut out = State::new();
        for (m, c) in self.apply(x, rest) {
            for (m2, c2) in self.apply(y, &m) {
                add_into(&mut out, m2, &c * &c2);
            }
        }
        let (modes, central) = self.seed.bracket(x, y);
        for (z, c) in modes {
            for (m, c2) in self.apply(z, rest) {
                add_into(&mut out, m, &c * &c2);
            }
        }
        add_into(&mut out, rest.to_vec(), central);
        prune(out)
    }

    pub fn apply_state(&mut self, x: Letter, s: &State) -> State {
        let mut out = State::new();
        for (m, c) in s {
            for (m2, c2) in self.apply(x, m) {
                add_into(&mut out, m2, c * &c2);
            }
        }
        prune(out)
    }

    /// `L_m · monomial` for `m ∈ {−1,0,1}`, using `[L_m, a_n] = ((d−1)m − n) a_{m+n}`
    /// on quasiprimary generators and `L_m Ω = 0`.
    pub fn sl2(&mut self, m: i64, mono: &[Letter]) -> State {
        let key = (m, mono.to_vec());
        if let Some(s) = self.sl2_memo.get(&key) {
            return s.clone();
        }
        let mut out = State::new();
        if let Some((&y, rest)) = mono.split_first() {
            let d = self.seed.dims[y.0] as i64;
            let c = (d - 1) * m - y.1;
            if c != 0 {
                for (mm, cc) in self.apply((y.0, y.1 + m), rest) {
                    add_into(&mut out, mm, cc * Rational::from_integer(c.into()));
                }
            }
            let inner = self.sl2(m, rest);
            for (mm, cc) in inner {
                for (m2, c2) in self.apply(y, &mm) {
                    add_into(&mut out, m2, &cc * &c2);
                }
            }
        }
        let out = prune(out);
        self.sl2_memo.insert(key, out.clone());
        out
    }
}

/// Normal-ordered monomials of each weight `0..=max_weight`, in the fixed basis order
/// (first letter of largest weight first, recursively).
pub fn monomial_basis(seed: &Seed, max_weight: usize) -> Vec<Vec<Mono>> {
    fn rec(seed: &Seed, remaining: i64, bound: Option<Letter>, prefix: &mut Mono, out: &mut Vec<Mono>) {
        if remaining == 0 {
            out.push(prefix.clone());
            return;
        }
        // Candidate letters in decreasing order of weight, then increasing generator index.
        for w in (1..=remaining).rev() {
            for g in 0..seed.dims.len() {
                let l = (g, -w);
                if !seed.is_creation(l) {
                    continue;
                }
                if let Some(b) = bound {
                    if !precedes(b, l) {
                        continue;
                    }
                }
                prefix.push(l);
                rec(seed, remaining - w, Some(l), prefix, out);
                prefix.pop();
            }
        }
    }
    (0..=max_weight as i64)
        .map(|w| {
            let mut out = Vec::new();
            rec(seed, w, None, &mut Vec::new(), &mut out);
            out
        })
        .collect()
}

pub fn heisenberg_seed() -> Seed {
    let vac = |c: i64| OpeTerm { coeff: Rational::from_integer(c.into()), target: None, derivative: 0 };
    Seed {
        names: vec!["J".into()],
        dims: vec![1],
        // J₍₀₎J = 0, J₍₁₎J = Ω
        ope: vec![vec![vec![vec![], vec![vac(1)]]]],
    }
}

pub fn virasoro_seed(c: &Rational) -> Seed {
    let w = |coeff: i64, derivative: u32| OpeTerm { coeff: Rational::from_integer(coeff.into()), target: Some(0), derivative };
    let central = OpeTerm { coeff: c / Rational::from_integer(2.into()), target: None, derivative: 0 };
    Seed {
        names: vec!["ω".into()],
        dims: vec![2],
        // ω₍₀₎ω = ∂ω, ω₍₁₎ω = 2ω, ω₍₂₎ω = 0, ω₍₃₎ω = (c/2)Ω
        ope: vec![vec![vec![vec![w(1, 1)], vec![w(2, 0)], vec![], vec![central]]]],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn heisenberg_bracket() {
        let s = heisenberg_seed();
        let (modes, central) = s.bracket((0, 2), (0, -2));
        assert!(modes.is_empty());
        assert_eq!(central, rat(2, 1));
        let (_, c) = s.bracket((0, 2), (0, -1));
        assert!(c.is_zero());
    }

    #[test]
    fn virasoro_bracket_has_central_term() {
        let c = rat(1, 2);
        let s = virasoro_seed(&c);
        // [L_2, L_-2] = 4 L_0 + c/2
        let (modes, central) = s.bracket((0, 2), (0, -2));
        assert_eq!(modes, vec![((0, 0), rat(4, 1))]);
        assert_eq!(central, rat(1, 4));
        let (modes, central) = s.bracket((0, 1), (0, -3));
        assert_eq!(modes, vec![((0, -2), rat(4, 1))]);
        assert!(central.is_zero());
    }

    #[test]
    fn monomial_counts() {
        let h = monomial_basis(&heisenberg_seed(), 5);
        assert_eq!(h.iter().map(Vec::len).collect::<Vec<_>>(), vec![1, 1, 2, 3, 5, 7]);
        let v = monomial_basis(&virasoro_seed(&rat(1, 2)), 6);
        assert_eq!(v.iter().map(Vec::len).collect::<Vec<_>>(), vec![1, 0, 1, 1, 2, 2, 4]);
        assert_eq!(h[3][0], vec![(0, -3)]);
        assert_eq!(h[3][2], vec![(0, -1), (0, -1), (0, -1)]);
    }

    #[test]
    fn straightening_heisenberg() {
        let s = heisenberg_seed();
        let mut st = Straightener::new(&s);
        // J_1 J_-1 Ω = Ω
        assert_eq!(st.apply((0, 1), &[(0, -1)]), State::from([(vec![], rat(1, 1))]));
        // J_-1 J_-2 Ω is reordered to J_-2 J_-1 Ω
        assert_eq!(st.apply((0, -1), &[(0, -2)]), State::from([(vec![(0, -2), (0, -1)], rat(1, 1))]));
        // J_2 J_-2 J_-2 Ω = 4 J_-2 Ω
        assert_eq!(st.apply((0, 2), &[(0, -2), (0, -2)]), State::from([(vec![(0, -2)], rat(4, 1))]));
    }

    #[test]
    fn l1_on_l_minus_two() {
        let s = virasoro_seed(&rat(-22, 5));
        let mut st = Straightener::new(&s);
        // L_1 L_-2 Ω = 3 L_-1 Ω = 0
        assert!(st.apply((0, 1), &[(0, -2)]).is_empty());
        assert!(st.sl2(1, &[(0, -2)]).is_empty());
        // L_-1 L_-2 Ω = L_-3 Ω
        assert_eq!(st.sl2(-1, &[(0, -2)]), State::from([(vec![(0, -3)], rat(1, 1))]));
    }
}
