//! Acceptance criteria 1-11. One line per criterion; exits non-zero when any fails.
//! Every numeric comparison is exact (rational arithmetic, zero tolerance) except the Sommese
//! runtime bound of 60 s.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num::BigRational;
use rand::Rng;

use common::discrepancy::{brute_force_verdict, resolution_verdict};
use toricmmp::cohomology::{ideal_vanishing_check, inclusion_kernel, line_bundle_cohomology};
use toricmmp::divisor::{classify_pair, is_cartier, log_canonical_divisor, InvariantDivisor};
use toricmmp::examples::*;
use toricmmp::fan::Fan;
use toricmmp::lattice::rat;
use toricmmp::mmp::{run_mmp, ContractionKind, MmpOptions, MmpTrace};
use toricmmp::mori::{extremal_length, is_ample, is_nef, is_nef_over, is_projective, negative_extremal_rays};
use toricmmp::verify::{verify_example, ExampleReport};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn report(id: &str, n: Option<usize>) -> Result<ExampleReport, String> {
    verify_example(id, n).map_err(|e| format!("{id}: {e}"))
}

/// Each named assertion must exist, pass, and carry exactly the pinned value.
fn pinned(r: &ExampleReport, expected: &[(&str, &str)]) -> Result<Vec<String>, String> {
    let mut seen = Vec::new();
    for (name, value) in expected {
        let a = r.find(name).ok_or_else(|| format!("{}: no assertion `{name}`", r.id))?;
        ensure(a.pass && a.expected == *value && a.actual == *value, || {
            format!("{name}: expected {value}, got {} (pass={})", a.actual, a.pass)
        })?;
        seen.push(format!("{name} = {value}"));
    }
    Ok(seen)
}

fn all_pass(r: &ExampleReport) -> Result<usize, String> {
    match r.failures().next() {
        None => Ok(r.assertions.len()),
        Some(a) => Err(format!("{}: `{}` expected {}, got {}", r.id, a.name, a.expected, a.actual)),
    }
}

fn c1_calibration() -> Check {
    let r = report("logflip-5.2", None)?;
    let seen = pinned(
        &r,
        &[("D2.C", "1"), ("C.D4", "-2/3"), ("-(K+D1+D3).C", "1/3"), ("C.D1", "1/3"), ("D3.C", "-2")],
    )?;
    Ok(seen.join(", "))
}

fn c2_structure() -> Check {
    let r = report("logflip-5.2", None)?;
    let seen = pinned(
        &r,
        &[
            ("verdict", "lc"),
            ("P on D3", "1/3(1,1)"),
            ("Q on D3+", "1/2(1,1)"),
            ("(K_D3 + B)|_B = K_B + 2/3 P", "2/3"),
            ("(K_D3+ + B+)|_B+ = K_B+ + 1/2 Q", "1/2"),
            ("crepancy term", "F: -1/6, others 0"),
        ],
    )?;
    Ok(seen.join("; "))
}

fn c3_francia() -> Check {
    let r = report("francia-5.1", None)?;
    pinned(
        &r,
        &[
            ("relation e1 + e2 + e4 + 2e5 = 0", "true"),
            ("relation detected on P(1,1,1,2)", "true"),
            ("singular cones of X2", "[1/2(1,1,1)]"),
            ("rho(X2)", "2"),
            ("flips", "1"),
            ("flip output is P_{P^1}(O + O(1) + O(2))", "true"),
        ],
    )?;
    Ok("relation detected, one 1/2(1,1,1) cone, rho 2, one flip to the bundle fan".into())
}

fn c4_nonqfact() -> Check {
    let mut parts = Vec::new();
    for n in [2usize, 3] {
        let r = report("nonqfact-5.3", Some(n))?;
        let rho_plus = n.to_string();
        pinned(
            &r,
            &[
                (&format!("n={n}: verdict"), "canonical"),
                (&format!("n={n}: Cartier index of K"), "1"),
                (&format!("n={n}: X projective over W"), "true"),
                (&format!("n={n}: X+ projective over W"), "true"),
                (&format!("n={n}: rho(X/W)"), "1"),
                (&format!("n={n}: rho(X+/W)"), &rho_plus),
                (&format!("n={n}: flip output is {{<e0,ei,ei+1>}}"), "true"),
            ],
        )?;
        let relations = r.assertions.iter().filter(|a| a.name.contains(" = 2e")).count();
        ensure(relations == n, || format!("n={n}: {relations} relations checked"))?;
        all_pass(&r)?;
        parts.push(format!("n={n}: rho 1 -> {n}, {relations} relations"));
    }
    Ok(parts.join("; "))
}

fn c5_kleiman() -> Check {
    let r = report("kleiman-nonprojective", None)?;
    pinned(
        &r,
        &[
            ("rho", "1"),
            ("NE is a half line", "true"),
            ("Cartier divisor positive on NE minus 0", "true"),
            ("projective", "false"),
            ("designated curve numerically trivial", "true"),
        ],
    )?;
    Ok("rho 1, half-line NE, positive Cartier D, not projective, C = 0 in N_1".into())
}

fn c6_flop() -> Check {
    let r = report("flop-destroys-projectivity", None)?;
    pinned(
        &r,
        &[
            ("rho(Y)", "5"),
            ("Y projective", "true"),
            ("X complete", "true"),
            ("X projective", "false"),
            ("NE(X) = N_1(X)", "true"),
            ("dim NE(X)", "5"),
        ],
    )?;
    Ok("Y projective with rho 5; X complete, not projective, NE(X) = N_1(X) of dimension 5".into())
}

fn c7_cohomology() -> Check {
    let p1 = projective_line();
    let h = line_bundle_cohomology(&p1, &divisor(&p1, &[(&[1], rat(-2, 1))])).map_err(|e| e.to_string())?;
    ensure(h.dims[..2] == [0, 1], || format!("P^1, O(-2): {:?}", h.dims))?;

    let s = sommese();
    let start = Instant::now();
    let t = line_bundle_cohomology(&s.fan, &s.pinned_sheaf()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(t.h(3) == 1, || format!("Sommese h^3 = {}", t.h(3)))?;
    ensure(elapsed < Duration::from_secs(60), || format!("Sommese took {elapsed:?}"))?;

    let inj = injectivity_f1();
    let k = inclusion_kernel(&inj.fan, &inj.a(), &inj.a().add(&inj.f), 1).map_err(|e| e.to_string())?;
    ensure(k == 1, || format!("injectivity kernel {k}"))?;

    let mut rng = common::rng(7);
    let (mut surfaces, mut threefolds) = (0, 0);
    for i in 0..200 {
        let f = common::random_smooth_fan(&mut rng);
        let d = common::random_nef_cartier(&mut rng, &f);
        ensure(is_cartier(&f, &d) && is_nef(&f, &d).unwrap(), || format!("sample {i} is not nef Cartier"))?;
        let t = line_bundle_cohomology(&f, &d).map_err(|e| e.to_string())?;
        ensure(t.dims[1..].iter().all(|&x| x == 0), || format!("sample {i}: {f} D = {:?}: h = {:?}", d.coeffs(), t.dims))?;
        if f.dim() == 2 {
            surfaces += 1;
        } else {
            threefolds += 1;
        }
    }
    Ok(format!(
        "h^1(P^1, O(-2)) = 1; Sommese h^3 = 1 in {:.2} s; kernel 1; Demazure vanishing on 200 nef Cartier divisors ({surfaces} surfaces, {threefolds} threefolds)",
        elapsed.as_secs_f64()
    ))
}

fn c8_oracle() -> Check {
    let mut pairs = common::builtin_pairs();
    let builtin = pairs.len();
    let mut rng = common::rng(8);
    for i in 0..100 {
        let f = common::random_simplicial_fan(&mut rng, 2 + i % 2);
        let d = common::random_boundary(&mut rng, &f, true);
        pairs.push((format!("random {i}"), f, d));
    }
    let mut verdicts = std::collections::BTreeMap::new();
    for (name, f, d) in &pairs {
        let engine = classify_pair(f, d).verdict.to_string();
        let res = resolution_verdict(f, d);
        ensure(engine == res.verdict, || format!("{name}: engine {engine}, resolution {}", res.verdict))?;
        let boxed = brute_force_verdict(f, d).verdict;
        ensure(engine == boxed, || format!("{name}: engine {engine}, box enumeration {boxed}"))?;
        *verdicts.entry(engine).or_insert(0) += 1;
    }
    Ok(format!("{builtin} built-in pairs and 100 random fans agree exactly; verdicts {verdicts:?}"))
}

fn c9_cone_theorem() -> Check {
    let mut rays = 0;
    let mut longest = BigRational::from_integer(0.into());
    for (i, (f, d)) in common::mmp_corpus(9, 100).iter().enumerate() {
        let (_, neg) = negative_extremal_rays(f, None, d).map_err(|e| format!("pair {i}: {e}"))?;
        for r in &neg {
            let l = extremal_length(f, None, d, r).map_err(|e| format!("pair {i}: {e}"))?;
            ensure(l.within_two_n, || format!("pair {i}: length {} > 2n", l.length))?;
            ensure(l.within_n_plus_one, || format!("pair {i}: length {} > n + 1", l.length))?;
            let scaled = &l.length / rat(f.dim() as i64 + 1, 1);
            if scaled > longest {
                longest = scaled;
            }
            rays += 1;
        }
    }
    Ok(format!("{rays} negative extremal rays on 100 lc pairs; max length / (n+1) = {longest}"))
}

#[derive(Default)]
struct Tally {
    runs: usize,
    divisorial: usize,
    flips: usize,
    fibrations: usize,
}

fn audit(name: &str, t: &MmpTrace, base: Option<&Fan>, tally: &mut Tally) -> Result<(), String> {
    tally.runs += 1;
    for (i, s) in t.steps.iter().enumerate() {
        let at = || format!("{name}, step {}", i + 1);
        match s.kind {
            ContractionKind::Divisorial => {
                tally.divisorial += 1;
                if s.q_factorial_before {
                    ensure(s.rho_after == Some(s.rho_before - 1), || format!("{}: rho {} -> {:?}", at(), s.rho_before, s.rho_after))?;
                }
            }
            ContractionKind::Flipping => {
                tally.flips += 1;
                if s.q_factorial_before {
                    ensure(s.rho_after == Some(s.rho_before), || format!("{}: rho {} -> {:?}", at(), s.rho_before, s.rho_after))?;
                }
                ensure(s.certificates_hold(), || format!("{}: discrepancy certificate fails", at()))?;
                ensure(s.certificates.iter().any(|c| c.strict && c.before < c.after), || format!("{}: no strict increase", at()))?;
            }
            ContractionKind::Fibration => tally.fibrations += 1,
        }
    }
    if t.steps.last().is_none_or(|s| s.kind != ContractionKind::Fibration) {
        let kd = log_canonical_divisor(&t.fan, &t.boundary);
        ensure(is_nef_over(&t.fan, base, &kd).unwrap_or(false), || format!("{name}: final K + B not nef"))?;
    }
    Ok(())
}

fn c10_mmp() -> Check {
    let mut tally = Tally::default();
    for (i, (f, d)) in common::mmp_corpus(10, 120).iter().enumerate() {
        let t = run_mmp(f, d, None, MmpOptions::default()).map_err(|e| format!("run {i}: {e}"))?;
        audit(&format!("run {i}"), &t, None, &mut tally)?;
    }
    let x2 = francia_x2();
    let t = run_mmp(&x2, &InvariantDivisor::zero(x2.rays().len()), None, MmpOptions::default()).map_err(|e| e.to_string())?;
    audit("francia", &t, None, &mut tally)?;
    let (x, y) = (logflip_x(), logflip_y());
    let t = run_mmp(&x, &logflip_boundary(&x), Some(&y), MmpOptions::default()).map_err(|e| e.to_string())?;
    audit("logflip", &t, Some(&y), &mut tally)?;
    for n in [2, 3] {
        let (x, w) = (nonqfact_x(n).unwrap(), nonqfact_w(n).unwrap());
        let t = run_mmp(&x, &InvariantDivisor::zero(x.rays().len()), Some(&w), MmpOptions::default()).map_err(|e| e.to_string())?;
        audit(&format!("nonqfact {n}"), &t, Some(&w), &mut tally)?;
        let s = &t.steps[0];
        ensure(s.rho_before == 1 && s.rho_after == Some(n), || format!("nonqfact {n}: rho {} -> {:?}", s.rho_before, s.rho_after))?;
    }
    ensure(tally.flips > 0 && tally.divisorial > 0, || "corpus has no flips or no divisorial steps".into())?;
    Ok(format!(
        "{} runs terminate: {} divisorial, {} flips, {} fibrations; rho and discrepancy invariants hold",
        tally.runs, tally.divisorial, tally.flips, tally.fibrations
    ))
}

fn c11_polyhedra() -> Check {
    let r = report("toric-polyhedron", None)?;
    all_pass(&r)?;
    let cone = report("cone-ex-bpf", None)?;
    all_pass(&cone)?;
    let mv = r.assertions.iter().chain(&cone.assertions).filter(|a| a.name.contains("Mayer-Vietoris") || a.name.starts_with("MV")).count();

    let mut rng = common::rng(11);
    let mut triples = 0;
    while triples < 20 {
        let f = common::random_smooth_fan(&mut rng);
        let Some(l) = is_projective(&f).map_err(|e| e.to_string())?.certificate else { continue };
        let chosen: Vec<usize> = (0..f.rays().len()).filter(|_| rng.gen_bool(0.35)).collect();
        if chosen.is_empty() {
            continue;
        }
        let phi: Vec<Vec<usize>> = f.cones().iter().filter(|c| chosen.iter().any(|r| c.contains(r))).cloned().collect();
        ensure(f.is_star_closed(&phi), || format!("{f}: star closure of {chosen:?} rejected"))?;
        let centres = f.qlc_centers(&phi).map_err(|e| e.to_string())?;
        ensure(centres.len() == phi.len(), || format!("{f}: {} qlc centres for {} cones", centres.len(), phi.len()))?;
        ensure(is_ample(&f, &l).unwrap(), || "projectivity certificate is not ample".into())?;
        let iv = ideal_vanishing_check(&f, &phi, &l).map_err(|e| e.to_string())?;
        ensure(iv.holds() && iv.telescopes, || format!("{f} {phi:?}: ideal {:?}", iv.ideal.dims))?;
        ensure(iv.ideal.dims[1..].iter().all(|&h| h == 0), || format!("{f}: h^i(I_Y (x) L) = {:?}", iv.ideal.dims))?;
        triples += 1;
    }
    Ok(format!(
        "star closure and qlc centres validated; ideal vanishing on 20 random triples; Mayer-Vietoris agreement on {mv} built-in cases"
    ))
}

type Criterion = (&'static str, fn() -> Check);

fn main() {
    let criteria: [Criterion; 11] = [
        ("calibration constants", c1_calibration),
        ("log flip structure", c2_structure),
        ("Francia flip", c3_francia),
        ("non-Q-factorial flip, n = 2, 3", c4_nonqfact),
        ("Kleiman counterexample", c5_kleiman),
        ("flop destroys projectivity", c6_flop),
        ("cohomology", c7_cohomology),
        ("discrepancy oracle equivalence", c8_oracle),
        ("cone theorem lengths", c9_cone_theorem),
        ("MMP invariants", c10_mmp),
        ("toric polyhedra", c11_polyhedra),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (title, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panic: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {title} ({secs:.1} s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {title} ({secs:.1} s): {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
