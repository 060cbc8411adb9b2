//! Smeared fields and the Möbius representation: vacuum correlators against
//! their mode sums, convergence of finite covariance under a growing
//! truncation, and the span of smeared words.

mod common;

use std::f64::consts::PI;

use num_complex::Complex64;
use va_wightman::circle::{beta_action_with_tail, raised_cosine, LieElement, MoebiusElement, TestFunction};
use va_wightman::scalar::rat;
use va_wightman::wightman::{
    correlator, covariance_check, group_law_deviation, order_estimate, reeh_schlieder_rank, u_of_gamma, u_of_gamma_exp,
    OrderEstimate,
};
use va_wightman::{Covector, Model};

fn vacuum_dual<S: va_wightman::scalar::Scalar>(m: &Model) -> Covector<S> {
    Covector::dual_basis(m.dims(), 0, 0)
}

/// `Σ_{n>0} k(n) f̂(n) ĝ(−n)`: the two-point function of a field with
/// `⟨Ω, v_n v_{−n} Ω⟩ = k(n)`.
fn two_point(f: &TestFunction, g: &TestFunction, k: impl Fn(i64) -> f64) -> Complex64 {
    f.coeffs().filter(|(n, _)| *n > 0).map(|(n, c)| c * g.coeff(-n) * k(n)).sum()
}

#[test]
fn two_point_functions_are_mode_sums() {
    let f = raised_cosine(0.5, 2.0, 5);
    let g = raised_cosine(-1.0, 2.5, 5);
    let h = Model::heisenberg(8);
    let j = &h.generators()[0];
    let w = correlator::<Complex64>(&h, &vacuum_dual(&h), &[(j, &f), (j, &g)]).unwrap();
    assert!((w - two_point(&f, &g, |n| n as f64)).norm() < 1e-13);

    let c = 0.5;
    let v = Model::virasoro(&rat(1, 2), 8, false);
    let t = &v.generators()[0];
    let w = correlator::<Complex64>(&v, &vacuum_dual(&v), &[(t, &f), (t, &g)]).unwrap();
    let want = two_point(&f, &g, |n| c / 12.0 * (n * n * n - n) as f64);
    assert!((w - want).norm() < 1e-13);
}

#[test]
fn three_point_heisenberg_vanishes() {
    let h = Model::heisenberg(9);
    let j = &h.generators()[0];
    let fs = [raised_cosine(0.0, 2.0, 3), raised_cosine(2.0, 2.0, 3), raised_cosine(4.0, 2.0, 3)];
    let w = correlator::<Complex64>(&h, &vacuum_dual(&h), &[(j, &fs[0]), (j, &fs[1]), (j, &fs[2])]).unwrap();
    assert!(w.norm() < 1e-14);
}

#[test]
fn vacuum_correlators_are_moebius_invariant() {
    let h = Model::heisenberg(12);
    let j = &h.generators()[0];
    let g = MoebiusElement::exp(&LieElement::sin_direction(), 0.2).unwrap();
    let f1 = raised_cosine(0.3, 2.0, 2);
    let f2 = raised_cosine(2.5, 2.0, 2);
    let beta = |f: &TestFunction| beta_action_with_tail(1, &g, f, 10, 1.0).unwrap().function;
    let dual = vacuum_dual(&h);
    let lhs = correlator::<Complex64>(&h, &dual, &[(j, &f1), (j, &f2)]).unwrap();
    let (b1, b2) = (beta(&f1), beta(&f2));
    let rhs = correlator::<Complex64>(&h, &dual, &[(j, &b1), (j, &b2)]).unwrap();
    // βf is cut at band 10, so the comparison is limited by the discarded tail.
    assert!((lhs - rhs).norm() < 1e-6 * lhs.norm().max(1.0), "{lhs} vs {rhs}");
}

#[test]
fn covariance_converges_as_the_truncation_grows() {
    // Same window, larger N: only the truncation changes.
    let f = raised_cosine(0.7, 2.0, 16);
    let g = MoebiusElement::exp(&LieElement::sin_direction(), 0.1).unwrap();
    let mut devs = Vec::new();
    for n in [12, 14, 16] {
        let m = Model::heisenberg(n).with_margin(n - 8);
        let r = covariance_check(&m, &m.generators()[0], &g, &f, None).unwrap();
        devs.push(r.conjugated);
    }
    assert!(devs.windows(2).all(|p| p[1] < p[0] / 10.0), "{devs:?}");
    assert!(devs[2] < 1e-9, "{devs:?}");
}

#[test]
fn rotations_are_exact_at_any_truncation() {
    let m = Model::virasoro(&rat(-22, 5), 8, false);
    let g = MoebiusElement::rotation(1.3);
    let f = raised_cosine(0.0, 3.0, 12);
    let r = covariance_check(&m, &m.generators()[0], &g, &f, Some(12)).unwrap();
    assert!(r.conjugated < 1e-12 && r.intertwined < 1e-12, "{r:?}");
}

#[test]
fn factorized_and_exponential_representations_agree_near_identity() {
    let m = Model::heisenberg(10);
    for (_, x) in LieElement::basis_directions() {
        let g = MoebiusElement::exp(&x, 0.02).unwrap();
        let a = u_of_gamma(&m, &g).unwrap();
        let b = u_of_gamma_exp(&m, &g).unwrap();
        assert!(a.operator().sub(b.operator()).window_max_abs(m.window()) < 1e-9);
    }
}

#[test]
fn group_law_holds_for_small_elements() {
    let m = Model::virasoro(&rat(1, 2), 10, false).with_margin(4);
    let g1 = MoebiusElement::exp(&LieElement::sin_direction(), 0.03).unwrap();
    let g2 = MoebiusElement::exp(&LieElement::cos_direction(), -0.02).unwrap().compose(&MoebiusElement::rotation(0.4));
    assert!(group_law_deviation(&m, &g1, &g2).unwrap() < 1e-8);
}

#[test]
fn reeh_schlieder_four_letters_reach_full_rank() {
    let m = Model::heisenberg(8).with_margin(4);
    let r = reeh_schlieder_rank(&m, (0.3, 0.3 + PI / 2.0), 32, 4, 4).unwrap();
    let oracle: usize = (0..=4).map(common::partition_count).sum();
    assert_eq!(r.full_dim, oracle);
    assert!(r.full_rank(), "rank {} of {}, ratio {:e}", r.rank, r.full_dim, r.sigma_ratio);
}

#[test]
fn three_letters_miss_the_four_mode_vector() {
    // Three modes reach every partition of 4 except 1+1+1+1.
    let m = Model::heisenberg(8).with_margin(4);
    let r = reeh_schlieder_rank(&m, (0.3, 0.3 + PI / 2.0), 32, 3, 4).unwrap();
    assert_eq!(r.rank, r.full_dim - 1);
}

#[test]
fn heisenberg_two_mode_growth_is_linear() {
    let h = Model::heisenberg(10);
    let j = &h.generators()[0];
    let est = order_estimate(&h, &[j, j], h.vacuum(), &vacuum_dual(&h), 1..=9).unwrap();
    let OrderEstimate::Fit { degree, max_residual, points } = est else { panic!("{est:?}") };
    assert_eq!(points, 9);
    assert!((degree - 1.0).abs() < 1e-12 && max_residual < 1e-12);
}

#[test]
fn virasoro_two_mode_growth_is_cubic() {
    // ⟨Ω, L_m L_{−m} Ω⟩ = c(m³ − m)/12, whose log-log slope tends to 3 from above.
    let v = Model::virasoro(&rat(-22, 5), 10, false);
    let t = &v.generators()[0];
    let est = order_estimate(&v, &[t, t], v.vacuum(), &vacuum_dual(&v), 2..=10).unwrap();
    let degree = est.degree().unwrap();
    assert!(degree > 3.0 && degree < 3.5, "{est:?}");
}
