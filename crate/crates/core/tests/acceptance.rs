//! Acceptance suite. Runs every criterion at its stated parameters and
//! tolerance, prints one PASS/FAIL line each, and exits nonzero if any fails.

mod common;

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use va_wightman::circle::{raised_cosine, LieElement, MoebiusElement, TestFunction};
use va_wightman::forms::{
    build_invariant_form, extend_form_to_smeared, involutive_structure_check, radical_dims, FormKind, Involution,
};
use va_wightman::linalg::determinant;
use va_wightman::scalar::{rat, Qc};
use va_wightman::vertex::{borcherds_commutator, locality_order_check, mobius_axiom_check};
use va_wightman::wightman::{
    covariance_check, infinitesimal_covariance_check, reeh_schlieder_rank, roundtrip_check, smear, spectrum_check,
    u_of_gamma, vacuum_cyclicity,
};
use va_wightman::Model;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn models_n8() -> Vec<Model> {
    vec![Model::heisenberg(8), Model::virasoro(&rat(1, 2), 8, false), Model::virasoro(&rat(-22, 5), 8, false)]
}

fn borcherds_consistency() -> Outcome {
    let mut compared = 0;
    let mut skipped = 0;
    let mut bad = Vec::new();
    for m in models_n8() {
        let w = m.window() as i64;
        for u in m.generators() {
            for v in m.generators() {
                let (du, dv) = (u.dim() as i64, v.dim() as i64);
                for a in du - 1 - w..=du - 1 + w {
                    for b in dv - 1 - w..=dv - 1 + w {
                        let direct = u.mode_unshifted(a).commutator(&v.mode_unshifted(b));
                        let d = borcherds_commutator(u, v, a, b).window_diff(&direct, m.window());
                        compared += d.compared;
                        skipped += d.skipped;
                        if !d.exact {
                            bad.push(format!("{} ({a},{b})", m.label()));
                        }
                    }
                }
            }
        }
    }
    outcome(bad.is_empty(), format!("{compared} blocks equal exactly, {skipped} skipped as truncated, mismatches {bad:?}"))
}

fn locality_order() -> Outcome {
    let h = Model::heisenberg(8);
    let j = &h.generators()[0];
    let rj = locality_order_check(j, j, 4, -3..=3, -3..=3, h.window());
    let mut ok = rj.minimal_order == Some(2) && rj.vanishes_at(2) == Some(true);
    let mut detail = format!("(J,J) minimal order {:?}", rj.minimal_order);
    for c in [rat(1, 2), rat(-22, 5)] {
        let v = Model::virasoro(&c, 8, false);
        let w = &v.generators()[0];
        let r = locality_order_check(w, w, 6, -2..=4, -2..=4, v.window());
        ok &= r.minimal_order.is_some_and(|o| o <= 4) && r.vanishes_at(4) == Some(true);
        detail += &format!(", (ω,ω) at {} minimal order {:?}", v.label(), r.minimal_order);
    }
    outcome(ok, detail)
}

fn mobius_axiom() -> Outcome {
    let mut ok = true;
    let mut checks = 0;
    let mut fs: Vec<TestFunction> = (-3..=3).map(TestFunction::basis).collect();
    fs.push(raised_cosine(1.0, 2.5, 6));
    let mut xs: Vec<LieElement> = (-1..=1).map(LieElement::l).collect();
    xs.extend(LieElement::basis_directions().map(|(_, x)| x));
    let mut worst: f64 = 0.0;
    for m in models_n8() {
        for g in m.generators() {
            let r = mobius_axiom_check(&m, g);
            ok &= r.pass() && r.max_deviation == 0.0;
            worst = worst.max(r.max_deviation);
            for x in &xs {
                for f in &fs {
                    let r = infinitesimal_covariance_check(&m, g, x, f);
                    ok &= r.exact;
                    worst = worst.max(r.max_deviation);
                    checks += 1;
                }
            }
        }
    }
    outcome(ok, format!("3 models, {checks} infinitesimal identities, max deviation {worst:e}"))
}

fn rotation_covariance() -> Outcome {
    let mut worst: f64 = 0.0;
    for m in [Model::heisenberg(10), Model::virasoro(&rat(1, 2), 10, false)] {
        let g = &m.generators()[0];
        for phi in [0.3, 1.1, 2.5, -2.9] {
            let u = u_of_gamma(&m, &MoebiusElement::rotation(phi)).unwrap();
            for n in -6..=6i64 {
                let op = smear(g, &TestFunction::basis(n)).operator;
                let lhs = u.operator().compose(&op).compose(u.inverse());
                let rhs = op.scale(&Complex64::from_polar(1.0, -(n as f64) * phi));
                worst = worst.max(lhs.sub(&rhs).window_max_abs(m.window()));
            }
        }
    }
    outcome(worst < 1e-10, format!("max deviation {worst:.2e} (tolerance 1e-10)"))
}

fn general_covariance() -> Outcome {
    let m = Model::heisenberg(12).with_margin(4);
    let j = &m.generators()[0];
    let fs = [("e_1", TestFunction::basis(1)), ("bump", raised_cosine(0.7, 2.0, 16))];
    let mut worst: f64 = 0.0;
    let mut rows = Vec::new();
    for (dname, x) in LieElement::basis_directions() {
        for t in [0.1, 0.3] {
            let g = MoebiusElement::exp(&x, t).unwrap();
            for (fname, f) in &fs {
                let r = covariance_check(&m, j, &g, f, None).unwrap();
                worst = worst.max(r.conjugated);
                if r.conjugated >= 1e-6 {
                    rows.push(format!("{dname} t={t} {fname}: {:.1e}", r.conjugated));
                }
            }
        }
    }
    outcome(worst < 1e-6, format!("max deviation {worst:.2e} (tolerance 1e-6); over tolerance: {}", rows.join(", ")))
}

fn round_trip() -> Outcome {
    let models =
        [Model::heisenberg(8), Model::virasoro(&rat(1, 2), 8, false), Model::virasoro(&rat(-22, 5), 8, true)];
    let mut ok = true;
    let mut detail = Vec::new();
    for m in &models {
        let r = roundtrip_check(m).unwrap();
        ok &= r.pass();
        let dims: Vec<usize> = r.dims.iter().map(|(_, d)| *d).collect();
        detail.push(format!("{} dims {:?} {}", r.model, dims, if r.pass() { "equal" } else { "differs" }));
    }
    outcome(ok, detail.join("; "))
}

fn forms() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();

    let h = Model::heisenberg(6);
    let theta = Involution::negation(&h);
    let hs = build_invariant_form(&h, FormKind::Sesquilinear, Qc::int(1), Some(&theta)).unwrap();
    let rep = involutive_structure_check(&h, &theta, &hs).unwrap();
    ok &= rep.unitary && rep.pass();
    detail.push(format!("Heisenberg positive through level 6: {}", rep.unitary));

    let c = rat(-22, 5);
    let v = Model::virasoro(&c, 4, false);
    let b = build_invariant_form(&v, FormKind::Bilinear, Qc::int(1), None).unwrap();
    let oracle = common::VirasoroOracle { c: c.clone() };
    let level2 = b.matrix(2).get(0, 0).clone();
    let want2 = Qc::real(oracle.pairing(&[2], &[2]));
    ok &= level2 == want2 && level2 == Qc::real(rat(-11, 5));
    detail.push(format!("level 2 = {level2}"));
    let g4 = oracle.gram(4);
    let kernel = radical_dims(&b)[4];
    let oracle_kernel = g4.len() - common::rank(g4.clone());
    let det_ok = determinant(b.matrix(4)) == Qc::real(common::det(g4));
    ok &= kernel == 1 && oracle_kernel == 1 && det_ok;
    detail.push(format!("level-4 kernel {kernel} (oracle {oracle_kernel})"));

    let mut symmetric = true;
    for m in models_n8() {
        symmetric &= build_invariant_form(&m, FormKind::Bilinear, Qc::int(1), None).unwrap().is_symmetric();
    }
    ok &= symmetric;
    detail.push(format!("bilinear Grams symmetric: {symmetric}"));
    outcome(ok, detail.join(", "))
}

fn form_correspondence() -> Outcome {
    let mut ok = true;
    let mut exact_words = 0;
    let (mut smeared_dev, mut lr_dev): (f64, f64) = (0.0, 0.0);
    for m in [Model::heisenberg(10), Model::virasoro(&rat(1, 2), 10, false)] {
        let g = &m.generators()[0];
        let gram = build_invariant_form(&m, FormKind::Bilinear, Qc::int(1), None).unwrap();
        let basis: Vec<TestFunction> = (-3..=3).map(TestFunction::basis).collect();
        for a in &basis {
            for b in &basis {
                for c in &basis {
                    let phis = [(g, a), (g, b)];
                    let psis = [(g, c)];
                    let p = extend_form_to_smeared::<Qc>(&m, &gram, &phis, &psis).unwrap();
                    // The Gram pairing of the mode words themselves.
                    let x = g.mode(a.coeffs().next().unwrap().0).apply(
                        &g.mode(b.coeffs().next().unwrap().0).apply(m.vacuum()).unwrap(),
                    );
                    let y = g.mode(c.coeffs().next().unwrap().0).apply(m.vacuum()).unwrap();
                    let direct = gram.pair(&x.unwrap(), &y);
                    ok &= p.direct == direct && p.left == direct && p.right == direct;
                    exact_words += 1;
                }
            }
        }
        let bumps = [raised_cosine(0.4, 1.5, 3), raised_cosine(2.0, 2.5, 3), raised_cosine(-1.8, 1.2, 3)];
        for a in &bumps {
            for b in &bumps {
                for c in &bumps {
                    let p = extend_form_to_smeared::<Complex64>(&m, &gram, &[(g, a), (g, b)], &[(g, c)]).unwrap();
                    smeared_dev = smeared_dev.max(p.max_deviation());
                    lr_dev = lr_dev.max((p.left - p.right).norm());
                }
            }
        }
    }
    ok &= smeared_dev < 1e-10 && lr_dev < 1e-12;
    outcome(
        ok,
        format!("{exact_words} e_n words exact; smeared deviation {smeared_dev:.1e} (1e-10), left/right {lr_dev:.1e} (1e-12)"),
    )
}

fn reeh_schlieder() -> Outcome {
    let m = Model::heisenberg(12).with_margin(4);
    let r = reeh_schlieder_rank(&m, (0.3, 0.3 + PI / 2.0), 32, 3, 4).unwrap();
    let oracle: usize = (0..=4).map(common::partition_count).sum();
    let ok = r.full_rank() && r.full_dim == oracle;
    outcome(
        ok,
        format!(
            "rank {} of {} (partition oracle {oracle}), σ ratio {:.1e}, {} vectors",
            r.rank, r.full_dim, r.sigma_ratio, r.vectors
        ),
    )
}

fn cyclicity_and_spectrum() -> Outcome {
    let h = Model::heisenberg(10);
    let s = spectrum_check(&h);
    let mut ok = s.exact && s.eigenvalues == (0..=10).collect::<Vec<_>>() && vacuum_cyclicity(&h).full();
    for m in [Model::virasoro(&rat(1, 2), 10, false), Model::virasoro(&rat(-22, 5), 10, true)] {
        let s = spectrum_check(&m);
        ok &= s.exact && s.eigenvalues.iter().all(|&w| w <= 10) && vacuum_cyclicity(&m).full();
    }
    outcome(ok, "Heisenberg spectrum {0..10}; full monomial span for Heisenberg and both Virasoro models")
}

/// Name, check, and runtime limit.
type Criterion = (&'static str, fn() -> Outcome, Option<Duration>);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("Borcherds consistency", borcherds_consistency, Some(Duration::from_secs(60))),
        ("locality order", locality_order, None),
        ("Möbius axiom", mobius_axiom, None),
        ("rotation covariance", rotation_covariance, None),
        ("general covariance", general_covariance, Some(Duration::from_secs(120))),
        ("round trip", round_trip, None),
        ("forms", forms, None),
        ("form correspondence", form_correspondence, None),
        ("Reeh-Schlieder rank", reeh_schlieder, Some(Duration::from_secs(60))),
        ("cyclicity and spectrum", cyclicity_and_spectrum, None),
    ];
    let mut failures = 0;
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = run();
        let took = start.elapsed();
        let in_time = limit.is_none_or(|l| took <= l);
        let pass = out.pass && in_time;
        if !pass {
            failures += 1;
        }
        let time_note = match limit {
            Some(l) => format!("{:.1}s, limit {}s", took.as_secs_f64(), l.as_secs()),
            None => format!("{:.1}s", took.as_secs_f64()),
        };
        println!("{} {:>2} {name}: {} [{time_note}]", if pass { "PASS" } else { "FAIL" }, i + 1, out.detail);
    }
    println!("{} of {} criteria pass", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
