//! Graded dimensions and Gram matrices against closed-form counts and the
//! brute-force Virasoro pairing.

mod common;

use std::collections::BTreeMap;

use common::{partition_count, partitions_with_min_part, rat, VirasoroOracle};
use num_traits::One;
use va_wightman::forms::{build_invariant_form, radical_dims, FormKind, Involution};
use va_wightman::linalg::{determinant, rank};
use va_wightman::scalar::Scalar;
use va_wightman::{Model, Qc, Rational};

/// Partitions of `n` into parts congruent to ±2 mod 5.
fn lee_yang_count(n: usize) -> usize {
    let mut p = vec![0usize; n + 1];
    p[0] = 1;
    for part in (1..=n).filter(|k| matches!(k % 5, 2 | 3)) {
        for k in part..=n {
            p[k] += p[k - part];
        }
    }
    p[n]
}

/// Even-size sets of distinct half-odd parts `j + ½` summing to `n`.
fn ising_count(n: usize) -> usize {
    // Work in units of ½: parts are odd numbers, total 2n, tracked by parity of size.
    let total = 2 * n;
    let mut ways = vec![[0usize; 2]; total + 1];
    ways[0][0] = 1;
    for part in (1..=total).step_by(2) {
        for k in (part..=total).rev() {
            for parity in 0..2 {
                ways[k][parity] += ways[k - part][1 - parity];
            }
        }
    }
    ways[total][0]
}

#[test]
fn heisenberg_dims_are_partition_numbers() {
    let m = Model::heisenberg(12);
    let want: Vec<usize> = (0..=12).map(partition_count).collect();
    assert_eq!(m.dims(), want.as_slice());
}

#[test]
fn universal_virasoro_dims_count_parts_at_least_two() {
    for c in [rat(1, 2), rat(-22, 5), rat(3, 1)] {
        let m = Model::virasoro(&c, 10, false);
        let want: Vec<usize> = (0..=10).map(|n| partitions_with_min_part(n, 2)).collect();
        assert_eq!(m.dims(), want.as_slice(), "c = {c}");
    }
}

#[test]
fn lee_yang_quotient_dims() {
    let m = Model::virasoro(&rat(-22, 5), 10, true);
    let want: Vec<usize> = (0..=10).map(lee_yang_count).collect();
    assert_eq!(m.dims(), want.as_slice());
}

#[test]
fn ising_quotient_dims() {
    let m = Model::virasoro(&rat(1, 2), 10, true);
    let want: Vec<usize> = (0..=10).map(ising_count).collect();
    assert_eq!(want[..6], [1, 0, 1, 1, 2, 2]);
    assert_eq!(m.dims(), want.as_slice());
}

#[test]
fn generic_central_charge_has_no_quotient() {
    let u = Model::virasoro(&rat(3, 1), 8, false);
    let s = Model::virasoro(&rat(3, 1), 8, true);
    assert_eq!(u.dims(), s.dims());
}

#[test]
fn virasoro_gram_matches_brute_force() {
    for c in [rat(1, 2), rat(-22, 5), rat(7, 10), rat(1, 1), rat(25, 1), rat(-2, 1)] {
        let m = Model::virasoro(&c, 6, false);
        let gram = build_invariant_form(&m, FormKind::Bilinear, Qc::int(1), None).unwrap();
        let oracle = VirasoroOracle { c: c.clone() };
        let kernels = radical_dims(&gram);
        for (level, &kernel) in kernels.iter().enumerate().skip(2) {
            let g = oracle.gram(level);
            assert_eq!(determinant(gram.matrix(level)), Qc::real(common::det(g.clone())), "c = {c}, level {level}");
            assert_eq!(kernel, g.len() - common::rank(g), "c = {c}, level {level}");
        }
    }
}

#[test]
fn level_two_entry_is_half_the_central_charge() {
    for c in [rat(1, 2), rat(-22, 5), rat(13, 3)] {
        let m = Model::virasoro(&c, 2, false);
        let gram = build_invariant_form(&m, FormKind::Bilinear, Qc::int(1), None).unwrap();
        assert_eq!(gram.matrix(2).get(0, 0), &Qc::real(&c / rat(2, 1)));
    }
}

#[test]
fn simple_quotient_has_nondegenerate_form() {
    for c in [rat(1, 2), rat(-22, 5)] {
        let m = Model::virasoro(&c, 8, true);
        let gram = build_invariant_form(&m, FormKind::Bilinear, Qc::int(1), None).unwrap();
        assert!(radical_dims(&gram).iter().all(|&k| k == 0), "c = {c}");
        for w in 0..=8 {
            let g = gram.matrix(w);
            assert_eq!(rank(g, 0.0), g.rows());
        }
    }
}

/// `(∏ J_{−n}^{m_n} Ω, same)` for the given sign: `∏ (sign·n)^{m_n} m_n!`.
fn heisenberg_norm(parts: &BTreeMap<i64, u32>, sign: i64) -> Rational {
    let mut out = Rational::one();
    for (&n, &mult) in parts {
        for k in 1..=mult as i64 {
            out *= rat(sign * n * k, 1);
        }
    }
    out
}

fn parts_of(m: &Model, w: usize, i: usize) -> BTreeMap<i64, u32> {
    let mut parts = BTreeMap::new();
    for &(_, n) in m.word(w, i) {
        *parts.entry(-n).or_insert(0) += 1;
    }
    parts
}

#[test]
fn heisenberg_gram_is_diagonal_with_factorial_entries() {
    let m = Model::heisenberg(7);
    let bil = build_invariant_form(&m, FormKind::Bilinear, Qc::int(1), None).unwrap();
    let theta = Involution::negation(&m);
    let ses = build_invariant_form(&m, FormKind::Sesquilinear, Qc::int(1), Some(&theta)).unwrap();
    for w in 0..=7 {
        for i in 0..m.dims()[w] {
            let pi = parts_of(&m, w, i);
            for j in 0..m.dims()[w] {
                let (b, s) = (bil.matrix(w).get(i, j), ses.matrix(w).get(i, j));
                if i == j {
                    assert_eq!(b, &Qc::real(heisenberg_norm(&pi, -1)), "weight {w} word {i}");
                    assert_eq!(s, &Qc::real(heisenberg_norm(&pi, 1)), "weight {w} word {i}");
                } else {
                    assert_ne!(pi, parts_of(&m, w, j));
                    assert!(b.is_zero() && s.is_zero(), "weight {w} entry ({i},{j})");
                }
            }
        }
    }
}
