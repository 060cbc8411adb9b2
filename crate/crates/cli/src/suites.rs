//! The verification suites. Each returns its entries in a fixed order, so a
//! run's report depends only on the config and seed.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use va_wightman::circle::{beta_action, default_band_out, raised_cosine, LieElement, MoebiusElement, TestFunction};
use va_wightman::forms::{
    build_invariant_form, extend_form_to_smeared, invariance_check, involutive_structure_check, radical_dims,
    smeared_adjunction_deviation, virasoro_level_two, FormKind, GramTower, Involution,
};
use va_wightman::graded::Covector;
use va_wightman::scalar::{format_rational, Qc};
use va_wightman::vertex::{
    borcherds_commutator, creation_check, locality_order_check, mobius_axiom_check, sl2_relations_check, AxiomReport,
};
use va_wightman::wightman::{
    correlator, correlator_csv, covariance_check, group_law_deviation, infinitesimal_covariance_check,
    reeh_schlieder_rank, roundtrip_check, smear, smeared_locality_leakage, spectrum_check, u_of_gamma,
    vacuum_cyclicity, vacuum_invariance_deviation, CorrelatorRow,
};
use va_wightman::{Error, Field, Model};

use crate::config::{RunConfig, Suite};
use crate::report::{run_check, Entry, Outcome};

/// Everything a suite needs: the model, the config, and its own RNG stream.
pub struct Context<'a> {
    pub model: &'a Model,
    pub config: &'a RunConfig,
}

impl Context<'_> {
    fn rng(&self, suite: Suite) -> ChaCha8Rng {
        // One stream per suite, so running a suite alone reproduces its part of `all`.
        ChaCha8Rng::seed_from_u64(self.config.seed ^ (suite as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15))
    }
}

pub fn run_suite(ctx: &Context, suite: Suite) -> Vec<Entry> {
    match suite {
        Suite::Axioms => axioms(ctx),
        Suite::Gram => gram(ctx),
        Suite::Roundtrip => roundtrip(ctx),
        Suite::Correlators => correlators(ctx),
        Suite::ReehSchlieder => reeh_schlieder(ctx),
        Suite::All => unreachable!("expanded before dispatch"),
    }
}

fn axiom_outcome(r: AxiomReport) -> Outcome {
    let details = json!({
        "window": r.window,
        "compared_blocks": r.compared_blocks,
        "skipped_blocks": r.skipped_blocks,
        "violations": r.violations.iter().take(8).map(|v| &v.what).collect::<Vec<_>>(),
    });
    Outcome { pass: r.pass(), deviation: Some(r.max_deviation), details }
}

/// Random test function of the given band with coefficients in the unit square.
fn random_function(rng: &mut ChaCha8Rng, band: usize) -> TestFunction {
    let b = band as i64;
    TestFunction::new(band, (-b..=b).map(|n| (n, Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))))
        .expect("band matches")
}

/// `exp(tX)` for a random unit direction `X` of Lie(Möb) and `t` in `range`.
fn random_moebius(rng: &mut ChaCha8Rng, range: std::ops::Range<f64>) -> MoebiusElement {
    let dirs = LieElement::basis_directions();
    let mut x = LieElement::zero();
    for (_, d) in &dirs {
        x = x.add(&d.scale(Complex64::new(rng.random_range(-1.0..1.0), 0.0)));
    }
    let norm = x.c.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt().max(1e-12);
    let t = rng.random_range(range);
    MoebiusElement::exp(&x.scale(Complex64::new(1.0 / norm, 0.0)), t).expect("real direction")
}

fn pairs(model: &Model) -> Vec<(&Field, &Field)> {
    let g = model.generators();
    g.iter().flat_map(|u| g.iter().map(move |v| (u, v))).collect()
}

fn axioms(ctx: &Context) -> Vec<Entry> {
    const S: &str = "axioms";
    let m = ctx.model;
    let tol = &ctx.config.tolerances;
    let window = m.window();
    let mut rng = ctx.rng(Suite::Axioms);
    let mut out = Vec::new();

    out.push(run_check(S, "sl2_relations", "L₋₁, L₀, L₁ span sl₂ and kill the vacuum", || {
        Ok(axiom_outcome(sl2_relations_check(m)))
    }));
    for g in m.generators() {
        out.push(run_check(S, format!("mobius[{}]", g.name()), "Möbius covariance of vertex modes", || {
            Ok(axiom_outcome(mobius_axiom_check(m, g)))
        }));
        out.push(run_check(S, format!("creation[{}]", g.name()), "creation property", || {
            Ok(axiom_outcome(creation_check(m, g)))
        }));
    }
    for (u, v) in pairs(m) {
        let order = u.dim() + v.dim();
        out.push(run_check(S, format!("locality[{},{}]", u.name(), v.name()), "locality of vertex algebra fields", || {
            let r = locality_order_check(u, v, order, -2..=2, -2..=2, window);
            if r.compared_blocks == 0 {
                return Err(Error::Inconclusive("no block inside the window".into()));
            }
            Ok(Outcome::exact(
                r.vanishes_at(order) == Some(true),
                json!({ "minimal_order": r.minimal_order, "bound": order, "skipped_blocks": r.skipped_blocks }),
            ))
        }));
    }
    out.push(run_check(S, "borcherds_commutator", "commutator formula from the Borcherds identity", || {
        let w = window as i64;
        let (mut compared, mut skipped, mut exact) = (0, 0, true);
        for (u, v) in pairs(m) {
            let (du, dv) = (u.dim() as i64, v.dim() as i64);
            for a in du - 1 - w..=du - 1 + w {
                for b in dv - 1 - w..=dv - 1 + w {
                    let direct = u.mode_unshifted(a).commutator(&v.mode_unshifted(b));
                    let d = borcherds_commutator(u, v, a, b).window_diff(&direct, window);
                    compared += d.compared;
                    skipped += d.skipped;
                    exact &= d.exact;
                }
            }
        }
        Ok(Outcome::exact(exact, json!({ "compared_blocks": compared, "skipped_blocks": skipped })))
    }));
    let fs: Vec<TestFunction> = (0..3).map(|_| random_function(&mut rng, ctx.config.band)).collect();
    for g in m.generators() {
        out.push(run_check(S, format!("infinitesimal_covariance[{}]", g.name()), "infinitesimal Möbius covariance of smeared fields", || {
            let mut exact = true;
            let mut dev: f64 = 0.0;
            let mut xs: Vec<LieElement> = (-1..=1).map(LieElement::l).collect();
            xs.extend(LieElement::basis_directions().map(|(_, x)| x));
            for x in &xs {
                for f in &fs {
                    let r = infinitesimal_covariance_check(m, g, x, f);
                    exact &= r.exact;
                    dev = dev.max(r.max_deviation);
                }
            }
            Ok(Outcome { pass: exact, deviation: Some(dev), details: json!({ "functions": fs.len(), "directions": xs.len() }) })
        }));
    }
    let angles: Vec<f64> = (0..3).map(|_| rng.random_range(-PI..PI)).collect();
    for g in m.generators() {
        out.push(run_check(S, format!("rotation_covariance[{}]", g.name()), "covariance under rotations", || {
            let mut dev: f64 = 0.0;
            let top = ctx.config.band.min(window) as i64;
            for &phi in &angles {
                let u = u_of_gamma(m, &MoebiusElement::rotation(phi))?;
                for n in -top..=top {
                    let op = smear(g, &TestFunction::basis(n)).operator;
                    let lhs = u.operator().compose(&op).compose(u.inverse());
                    let rhs = op.scale(&Complex64::from_polar(1.0, -(n as f64) * phi));
                    dev = dev.max(lhs.sub(&rhs).window_max_abs(window));
                }
            }
            Ok(Outcome::within(dev, tol.float, json!({ "angles": angles })))
        }));
    }
    out.push(run_check(S, "spectrum", "energy spectrum is the grading", || {
        let s = spectrum_check(m);
        let inside = s.eigenvalues.iter().all(|&w| w <= m.max_weight());
        Ok(Outcome::exact(s.exact && inside, json!({ "eigenvalues": s.eigenvalues })))
    }));
    out.push(run_check(S, "vacuum_cyclicity", "the vacuum is cyclic for the field modes", || {
        let r = vacuum_cyclicity(m);
        Ok(Outcome::exact(r.full(), json!({ "span_dims": r.span_dims, "dims": r.dims })))
    }));
    let gammas: Vec<MoebiusElement> = (0..3).map(|_| random_moebius(&mut rng, 0.1..1.0)).collect();
    out.push(run_check(S, "vacuum_invariance", "U(γ) fixes the vacuum", || {
        let mut dev: f64 = 0.0;
        for g in &gammas {
            dev = dev.max(vacuum_invariance_deviation(m, g)?);
        }
        Ok(Outcome::within(dev, tol.float, json!({ "elements": gammas.len() })))
    }));
    out
}

fn form_details(m: &Model, gram: &GramTower) -> serde_json::Value {
    let mut v = gram.to_json(m);
    if let Some(obj) = v.as_object_mut() {
        obj.insert("kernel_dims".into(), json!(radical_dims(gram)));
    }
    v
}

fn gram(ctx: &Context) -> Vec<Entry> {
    const S: &str = "gram";
    let m = ctx.model;
    let tol = &ctx.config.tolerances;
    let mut rng = ctx.rng(Suite::Gram);
    let mut out = Vec::new();
    let bilinear = build_invariant_form(m, FormKind::Bilinear, Qc::int(1), None);

    out.push(run_check(S, "bilinear_gram", "invariant bilinear forms are symmetric", || {
        let b = bilinear.clone()?;
        Ok(Outcome::exact(b.is_symmetric(), form_details(m, &b)))
    }));
    out.push(run_check(S, "bilinear_invariance", "invariance of the bilinear form", || {
        Ok(axiom_outcome(invariance_check(m, bilinear.as_ref().map_err(Clone::clone)?, None, &[])?))
    }));
    if let Some(c) = m.params().central_charge.clone() {
        out.push(run_check(S, "level_two", "(L₋₂Ω, L₋₂Ω) = c/2", || {
            let b = bilinear.clone()?;
            if m.dims().len() <= 2 || m.dims()[2] == 0 {
                return Err(Error::Inconclusive("weight 2 is empty or truncated away".into()));
            }
            let want = virasoro_level_two(&c);
            let got = b.matrix(2).get(0, 0).clone();
            Ok(Outcome::exact(
                got == Qc::real(want.clone()),
                json!({ "value": got.to_string(), "expected": format_rational(&want) }),
            ))
        }));
    }
    out.push(run_check(S, "radical", "the radical is the maximal proper ideal", || {
        let b = bilinear.clone()?;
        let dims = radical_dims(&b);
        // A simple quotient must have a nondegenerate form.
        let pass = !m.params().simple || dims.iter().all(|&d| d == 0);
        Ok(Outcome::exact(pass, json!({ "kernel_dims": dims })))
    }));
    out.push(run_check(S, "involutive_structure", "unitarity from an antilinear involution", || {
        let theta = if m.name() == "heisenberg" { Involution::negation(m) } else { Involution::trivial(m) };
        let h = build_invariant_form(m, FormKind::Sesquilinear, Qc::int(1), Some(&theta))?;
        let r = involutive_structure_check(m, &theta, &h)?;
        let details = json!({
            "unitary": r.unitary,
            "positive_semidefinite": r.positive_semidefinite,
            "first_failing_minor": r.first_failing_minor,
            "inertia": r.inertia,
        });
        Ok(Outcome::exact(r.pass(), details))
    }));
    let f = random_function(&mut rng, ctx.config.band);
    for g in m.generators() {
        out.push(run_check(S, format!("smeared_adjunction[{}]", g.name()), "adjoint of a smeared field", || {
            let b = bilinear.clone()?;
            Ok(Outcome::within(smeared_adjunction_deviation(m, &b, g, &f), tol.float, json!({})))
        }));
    }
    out.push(run_check(S, "smeared_extension", "the bilinear form on smeared vectors", || {
        let b = bilinear.clone()?;
        let g = &m.generators()[0];
        let top = (m.window() / 2).max(1) as i64;
        let basis: Vec<TestFunction> = (-top..=top).map(TestFunction::basis).collect();
        let mut exact = true;
        let mut words = 0;
        for x in &basis {
            for y in &basis {
                let p = extend_form_to_smeared::<Qc>(m, &b, &[(g, x)], &[(g, y)])?;
                exact &= p.left == p.direct && p.right == p.direct;
                words += 1;
            }
        }
        Ok(Outcome::exact(exact, json!({ "word_pairs": words })))
    }));
    out
}

fn roundtrip(ctx: &Context) -> Vec<Entry> {
    let m = ctx.model;
    vec![run_check("roundtrip", "roundtrip", "vertex algebra ↔ Wightman fields round trip", || {
        let r = roundtrip_check(m)?;
        Ok(Outcome::exact(r.pass(), serde_json::to_value(&r).expect("serializable")))
    })]
}

fn correlators(ctx: &Context) -> Vec<Entry> {
    const S: &str = "correlators";
    let m = ctx.model;
    let tol = &ctx.config.tolerances;
    let n = m.max_weight();
    let mut rng = ctx.rng(Suite::Correlators);
    let mut out = Vec::new();
    let g = &m.generators()[0];
    let vac = Covector::<Complex64>::dual_basis(m.dims(), 0, 0);

    // A k-point word stays inside the truncation when β f is cut at band
    // 2N/k. The functions themselves use a quarter of that, so the cut only
    // drops modes of relative size |b/a|^(3N/2k).
    let two_cut = n;
    let four_cut = n / 2;
    let bump = |rng: &mut ChaCha8Rng, band: usize| {
        raised_cosine(rng.random_range(-PI..PI), rng.random_range(0.8..2.5), band.min(ctx.config.band).max(1))
    };
    let f2: Vec<TestFunction> = (0..2).map(|_| bump(&mut rng, two_cut / 4)).collect();
    let f4: Vec<TestFunction> = (0..4).map(|_| bump(&mut rng, four_cut / 4)).collect();
    let gammas: Vec<MoebiusElement> = (0..2).map(|_| random_moebius(&mut rng, 0.01..0.03)).collect();

    out.push(run_check(S, "correlator_covariance", "Möbius invariance of vacuum correlators", || {
        let mut rows = Vec::new();
        let mut dev: f64 = 0.0;
        let mut dropped: f64 = 0.0;
        for (fs, band) in [(&f2, two_cut), (&f4, four_cut)] {
            if fs.len() == 4 && n < 8 {
                continue;
            }
            let letters: Vec<(&Field, &TestFunction)> = fs.iter().map(|f| (g, f)).collect();
            let w = correlator(m, &vac, &letters)?;
            rows.push(CorrelatorRow::new(&letters, w));
            for gamma in &gammas {
                let mut moved = Vec::with_capacity(fs.len());
                for f in fs.iter() {
                    let full = beta_action(g.dim() as u32, gamma, f, default_band_out(f.band(), gamma))?;
                    let cut = full.truncate(band);
                    dropped = dropped.max(full.max_coeff_diff(&cut));
                    moved.push(cut);
                }
                let letters: Vec<(&Field, &TestFunction)> = moved.iter().map(|f| (g, f)).collect();
                let wm = correlator(m, &vac, &letters)?;
                rows.push(CorrelatorRow::new(&letters, wm));
                dev = dev.max((wm - w).norm() / w.norm().max(1.0));
            }
        }
        if let Some(path) = &ctx.config.csv_out {
            std::fs::write(path, correlator_csv(&rows)?).map_err(|e| Error::Structural(format!("writing csv: {e}")))?;
        }
        Ok(Outcome::within(dev, tol.covariance, json!({ "rows": rows.len(), "largest_dropped_coefficient": dropped })))
    }));
    out.push(run_check(S, "operator_covariance", "covariance of smeared fields under U(γ)", || {
        let mut dev: f64 = 0.0;
        for gamma in &gammas {
            for k in -1..=1 {
                for gen in m.generators() {
                    dev = dev.max(covariance_check(m, gen, gamma, &TestFunction::basis(k), None)?.conjugated);
                }
            }
        }
        Ok(Outcome::within(dev, tol.covariance, json!({ "elements": gammas.len() })))
    }));
    out.push(run_check(S, "group_law", "U is a representation", || {
        let dev = group_law_deviation(m, &gammas[0], &gammas[1])?;
        Ok(Outcome::within(dev, tol.covariance, json!({})))
    }));
    out.push(run_check(S, "locality_leakage", "locality of smeared fields (band-limited, reported only)", || {
        // Bumps on opposite halves of the circle; band-limiting leaks across.
        let a = raised_cosine(0.0, 2.0, ctx.config.band);
        let b = raised_cosine(PI, 2.0, ctx.config.band);
        let leak = smeared_locality_leakage(m, g, &a, g, &b)?;
        Ok(Outcome { pass: true, deviation: Some(leak), details: json!({ "asserted": false }) })
    }));
    out
}

fn reeh_schlieder(ctx: &Context) -> Vec<Entry> {
    let m = ctx.model;
    let mut rng = ctx.rng(Suite::ReehSchlieder);
    let start = rng.random_range(-PI..PI);
    let cfg = ctx.config;
    vec![run_check("reeh_schlieder", "reeh_schlieder_rank", "the vacuum is cyclic for fields smeared in an interval", || {
        let r = reeh_schlieder_rank(m, (start, start + PI / 2.0), cfg.band, cfg.word_length, cfg.weight_cutoff())?;
        let pass = r.rank == r.full_dim && r.sigma_ratio > cfg.tolerances.rank;
        let details = json!({
            "rank": r.rank,
            "full_dim": r.full_dim,
            "vectors": r.vectors,
            "sigma_ratio": r.sigma_ratio,
            "interval": [start, start + PI / 2.0],
            "word_length": cfg.word_length,
            "weight_cutoff": cfg.weight_cutoff(),
        });
        Ok(Outcome::exact(pass, details))
    })]
}

