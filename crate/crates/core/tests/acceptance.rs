//! Acceptance gate: one line per criterion, non-zero exit if any fails.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use selfdual::curvature::{kulkarni, r0, random_act, random_sym, weyl, CurvTensor, WeylTensor};
use selfdual::duality::{classify, lambda2, sd_blocks, DualityClass};
use selfdual::fixtures::normal_form;
use selfdual::lintensor::random_orthonormal;
use selfdual::metriclab::{
    chart_by_name, classify_point, conformal_check, riemann_at, sample_point, ConformalFactor,
};
use selfdual::osserman::{osserman_exact, osserman_sampled};
use selfdual::quaternion::{recover, standard_structure, synthesize, Phi2Table};
use selfdual::verify::{run_battery, BatteryConfig};

const TOL: f64 = 1e-8;
const INSTANCES: usize = 200;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn rng(criterion: u64, i: usize) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(0xACCE_0000 + criterion);
    r.set_stream(i as u64);
    r
}

fn sorted3(mut v: [f64; 3]) -> [f64; 3] {
    v.sort_by(f64::total_cmp);
    v
}

fn dist3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn traceless<R: Rng>(r: &mut R) -> [f64; 3] {
    let a = r.random_range(-3.0..3.0);
    let b = r.random_range(-3.0..3.0);
    [a, b, -a - b]
}

/// Tensors from criteria 2–5, tagged with whether they should be half-flat.
#[derive(Default)]
struct Pool {
    tensors: Vec<(String, CurvTensor, bool)>,
}

fn criterion_1() -> Outcome {
    let mut worst = 0.0_f64;
    for i in 0..100 {
        let mut g = rng(1, i);
        let c = g.random_range(-3.0..3.0);
        let h = random_sym(&mut g, 2.0);
        let r = &(&r0() * c) + &kulkarni(&h);
        worst = worst.max(weyl(&r).norm() / (1.0 + r.norm()));
    }
    outcome(worst <= 1e-10, format!("max |W|/(1+|R|) = {worst:.3e} over 100 instances (limit 1e-10)"))
}

fn criterion_2(pool: &mut Pool) -> Outcome {
    let mut failures = 0;
    let mut worst_ratio = 0.0_f64;
    for i in 0..INSTANCES {
        let mut g = rng(2, i);
        let basis = random_orthonormal(&mut g, 1);
        let l = traceless(&mut g);
        let s = synthesize(&standard_structure(&basis).unwrap(), l);
        let exact = osserman_exact(&s, true, TOL).unwrap().osserman;
        let rep = classify(&s, TOL).unwrap();
        let ratio = rep.norm_minus / (rep.norm_plus + rep.norm_minus);
        worst_ratio = worst_ratio.max(ratio);
        if !(exact && rep.class == DualityClass::SelfDual && ratio <= 1e-9) {
            failures += 1;
        }
        pool.tensors.push((format!("c2[{i}]"), s, true));
    }
    outcome(
        failures == 0,
        format!("{failures}/{INSTANCES} failures; max |W-|/(|W+|+|W-|) = {worst_ratio:.3e} (limit 1e-9)"),
    )
}

fn criterion_3(pool: &mut Pool) -> Outcome {
    let mut failures = 0;
    let mut worst = 0.0_f64;
    let mut classes = BTreeMap::new();
    for i in 0..INSTANCES {
        let mut g = rng(3, i);
        let abc = traceless(&mut g);
        // odd instances use an orientation-reversing frame
        let orientation = if i % 2 == 0 { 1 } else { -1 };
        let basis = random_orthonormal(&mut g, orientation);
        let t = normal_form(abc).unwrap().in_basis(basis.matrix());
        let rep = classify(&t, TOL).unwrap();
        *classes.entry(rep.class.to_string()).or_insert(0) += 1;
        let expected = sorted3(abc.map(|v| -2.0 * v));
        let eigs = match rep.class {
            DualityClass::SelfDual => Some(rep.plus_eigenvalues),
            DualityClass::AntiSelfDual => Some(rep.minus_eigenvalues),
            _ => None,
        };
        match eigs {
            Some(e) => {
                let d = dist3(e, expected);
                worst = worst.max(d);
                if d > 1e-9 {
                    failures += 1;
                }
            }
            None => failures += 1,
        }
        pool.tensors.push((format!("c3[{i}]"), t, true));
    }
    outcome(
        failures == 0,
        format!("{failures}/{INSTANCES} failures; classes {classes:?}; max eigenvalue error {worst:.3e} (limit 1e-9)"),
    )
}

fn criterion_4(pool: &mut Pool) -> Outcome {
    let mut failures = 0;
    let mut worst_l = 0.0_f64;
    let mut worst_res = 0.0_f64;
    let mut flipped = 0;
    for i in 0..INSTANCES {
        let mut g = rng(4, i);
        let orientation = if i % 2 == 0 { 1 } else { -1 };
        let basis = random_orthonormal(&mut g, orientation);
        let l = traceless(&mut g);
        let s = synthesize(&standard_structure(&basis).unwrap(), l);
        let w = WeylTensor::new(s.clone()).unwrap();
        match recover(&w, TOL) {
            Ok(d) => {
                let dl = dist3(sorted3(d.lambdas), sorted3(l));
                let rel = d.residual / (1.0 + w.norm());
                worst_l = worst_l.max(dl);
                worst_res = worst_res.max(rel);
                flipped += d.orientation_flipped as usize;
                if dl > 1e-8 || rel > 1e-8 {
                    failures += 1;
                }
            }
            Err(_) => failures += 1,
        }
        pool.tensors.push((format!("c4[{i}]"), s, true));
    }
    outcome(
        failures == 0,
        format!(
            "{failures}/{INSTANCES} failures; {flipped} anti-self-dual; max lambda error {worst_l:.3e}, max residual/(1+|W|) {worst_res:.3e} (limits 1e-8)"
        ),
    )
}

fn criterion_5(pool: &mut Pool) -> Outcome {
    let mut failures = 0;
    for i in 0..INSTANCES {
        let r = random_act(5_000 + i as u64);
        let exact = osserman_exact(&r, true, TOL).unwrap().osserman;
        let sampled = osserman_sampled(&r, true, 200, TOL).unwrap().osserman;
        let class = classify(&r, TOL).unwrap().class;
        if exact || sampled || class != DualityClass::Neither {
            failures += 1;
        }
        pool.tensors.push((format!("c5[{i}]"), r, false));
    }
    // biconditional over every instance of criteria 2-5
    let mut violations = Vec::new();
    for (name, t, _) in &pool.tensors {
        let co = osserman_exact(t, true, TOL).unwrap().osserman;
        let half_flat = classify(t, TOL).unwrap().class.is_half_flat();
        if co != half_flat {
            violations.push(name.clone());
        }
    }
    outcome(
        failures == 0 && violations.is_empty(),
        format!(
            "{failures}/{INSTANCES} generic failures; {} biconditional violations across {} instances of criteria 2-5",
            violations.len(),
            pool.tensors.len()
        ),
    )
}

fn criterion_6(pool: &Pool) -> Outcome {
    let mut disagreements = Vec::new();
    let mut expected_mismatch = 0;
    for (name, t, half_flat) in &pool.tensors {
        for use_weyl in [false, true] {
            let e = osserman_exact(t, use_weyl, TOL).unwrap().osserman;
            let s = osserman_sampled(t, use_weyl, 200, TOL).unwrap().osserman;
            if e != s {
                disagreements.push(format!("{name}/{use_weyl}"));
            }
            if use_weyl && e != *half_flat {
                expected_mismatch += 1;
            }
        }
    }
    outcome(
        disagreements.is_empty() && expected_mismatch == 0,
        format!(
            "{} disagreements over {} tensors x (R, W); {expected_mismatch} decisions differ from the family label",
            disagreements.len(),
            pool.tensors.len()
        ),
    )
}

fn criterion_7() -> Outcome {
    let h = 1e-3;
    let mut problems = Vec::new();
    let mut notes = Vec::new();
    let none = BTreeMap::new();
    for (name, k) in [("sphere", 0), ("sphere", 1), ("sphere", 2)] {
        let c = chart_by_name(name, &none).unwrap();
        let p = sample_point(&c, k);
        let r = riemann_at(&c, &p, h).unwrap().curvature;
        let rel = weyl(&r).norm() / r.norm();
        let rep = classify_point(&c, &p, h).unwrap();
        if rep.duality.class != DualityClass::ConformallyFlat || rel > 1e-5 || !rep.consistent {
            problems.push(format!("{name}[{k}]"));
        }
        notes.push(format!("S4 |W|/|R| {rel:.1e}"));
    }
    for k in 0..3 {
        let c = chart_by_name("fubini-study", &none).unwrap();
        let rep = classify_point(&c, &sample_point(&c, k), h).unwrap();
        let d = &rep.duality;
        let ratio = match d.class {
            DualityClass::SelfDual => d.norm_minus / d.norm_plus,
            DualityClass::AntiSelfDual => d.norm_plus / d.norm_minus,
            _ => f64::INFINITY,
        };
        if ratio > 1e-4 || !rep.consistent || !rep.osserman.conformally_osserman {
            problems.push(format!("fubini-study[{k}]"));
        }
        notes.push(format!("FS {} off-side {ratio:.1e}", d.class));
    }
    for k in 0..3 {
        let c = chart_by_name("product-spheres", &none).unwrap();
        let p = sample_point(&c, k);
        let r = riemann_at(&c, &p, h).unwrap().curvature;
        let w = weyl(&r);
        let b = sd_blocks(&lambda2(w.tensor()));
        let rep = classify_point(&c, &p, h).unwrap();
        let min_block = b.plus.norm().min(b.minus.norm()) / w.norm();
        if rep.duality.class != DualityClass::Neither
            || min_block < 0.1
            || !rep.consistent
            || rep.osserman.conformally_osserman
        {
            problems.push(format!("product-spheres[{k}]"));
        }
        notes.push(format!("S2xS2 min block/|W| {min_block:.3}"));
    }
    outcome(problems.is_empty(), format!("failing: {problems:?}; {}", notes.join(", ")))
}

fn criterion_8() -> Outcome {
    let alphas = [
        ConformalFactor::Sin,
        ConformalFactor::Linear([0.3, -0.2, 0.1, 0.4]),
        ConformalFactor::Quadratic(0.2),
    ];
    let none = BTreeMap::new();
    let mut problems = Vec::new();
    let mut worst = 0.0_f64;
    let mut runs = 0;
    for name in ["sphere", "fubini-study", "product-spheres"] {
        let c = chart_by_name(name, &none).unwrap();
        for a in alphas {
            for k in 0..3 {
                let cmp = conformal_check(&c, a, &sample_point(&c, k), 1e-3).unwrap();
                worst = worst.max(cmp.max_relative_deviation);
                runs += 1;
                if !cmp.labels_agree || cmp.max_relative_deviation > 1e-4 {
                    problems.push(format!("{name}/{a}/{k}"));
                }
            }
        }
    }
    outcome(
        problems.is_empty(),
        format!("{runs} comparisons, failing {problems:?}; max relative spectral deviation {worst:.3e} (limit 1e-4)"),
    )
}

fn criterion_9() -> Outcome {
    let c = chart_by_name("sphere", &BTreeMap::new()).unwrap();
    let p = sample_point(&c, 0);
    let err = |h: f64| riemann_at(&c, &p, h).unwrap().curvature.max_abs_diff(&r0());
    let (e1, e2) = (err(1e-2), err(5e-3));
    let ratio = e1 / e2;
    outcome(
        (3.2..=4.8).contains(&ratio),
        format!("error(1e-2) = {e1:.3e}, error(5e-3) = {e2:.3e}, ratio {ratio:.3} (window [3.2, 4.8])"),
    )
}

fn criterion_10() -> Outcome {
    let cfg = |table| BatteryConfig {
        seed: 1,
        count: 50,
        table,
    };
    let good = run_battery(&cfg(Phi2Table::Corrected)).unwrap();
    let bad = run_battery(&cfg(Phi2Table::Uncorrected)).unwrap();
    let mut failed_checks: BTreeMap<String, usize> = BTreeMap::new();
    for f in &bad.families {
        for (k, v) in &f.failed_checks {
            *failed_checks.entry(k.clone()).or_insert(0) += v;
        }
    }
    outcome(
        good.passed() && !bad.passed(),
        format!(
            "corrected table: {} violations; uncorrected table: {} violations, failed checks {failed_checks:?}",
            good.violations, bad.violations
        ),
    )
}

fn main() {
    let mut pool = Pool::default();
    let results = [
        ("Weyl kernel", criterion_1()),
        ("synthesis is self-dual and conformally Osserman", criterion_2(&mut pool)),
        ("normal form block eigenvalues", criterion_3(&mut pool)),
        ("recover/synthesize round trip", criterion_4(&mut pool)),
        ("generic tensors and the biconditional", criterion_5(&mut pool)),
        ("exact and sampled deciders agree", criterion_6(&pool)),
        ("metric-level classification", criterion_7()),
        ("conformal invariance", criterion_8()),
        ("finite-difference convergence", criterion_9()),
        ("negative control", criterion_10()),
    ];
    let mut failed = 0;
    for (n, (name, o)) in results.iter().enumerate() {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {tag} {name}: {}", n + 1, o.detail);
        failed += !o.pass as usize;
    }
    println!("acceptance: {}/{} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
