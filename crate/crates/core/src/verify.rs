//! Seeded battery checking the equivalence of half-flatness, the conformal
//! Osserman property, and the quaternionic representation.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::curvature::{kulkarni, r0, random_act_with, random_sym, validate, weyl, CurvTensor, WeylTensor};
use crate::duality::{classify, DualityClass, DualityReport};
use crate::fixtures::normal_form;
use crate::lintensor::random_orthonormal;
use crate::osserman::{osserman_exact, osserman_sampled, DEFAULT_SAMPLES};
use crate::quaternion::{recover, standard_triple, structure_defects, synthesize_triple, Phi2Table};
use crate::error::{Error, Result};

/// Tolerance for classification and both deciders.
pub const BATTERY_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    ConformallyFlat,
    SelfDual,
    AntiSelfDual,
    NormalForm,
    Generic,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::ConformallyFlat,
        Family::SelfDual,
        Family::AntiSelfDual,
        Family::NormalForm,
        Family::Generic,
    ];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BatteryConfig {
    pub seed: u64,
    pub count: usize,
    pub table: Phi2Table,
}

/// The first failure seen for a family.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FailureNote {
    pub instance: usize,
    pub check: String,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilySummary {
    pub family: Family,
    pub instances: usize,
    pub failed_instances: usize,
    /// Failure count per check.
    pub failed_checks: BTreeMap<String, usize>,
    /// Largest value seen per residual check.
    pub max_residuals: BTreeMap<String, f64>,
    pub first_failure: Option<FailureNote>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BatteryReport {
    pub seed: u64,
    pub count: usize,
    pub phi2_table: Phi2Table,
    pub families: Vec<FamilySummary>,
    pub violations: usize,
}

impl BatteryReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    pub fn family(&self, f: Family) -> &FamilySummary {
        self.families.iter().find(|s| s.family == f).expect("every family runs")
    }
}

/// Outcome of one battery instance.
#[derive(Default)]
struct Checks {
    residuals: Vec<(&'static str, f64)>,
    failures: Vec<(&'static str, String)>,
}

impl Checks {
    fn residual(&mut self, name: &'static str, value: f64, limit: f64) {
        self.residuals.push((name, value));
        if !(value <= limit) {
            self.failures.push((name, format!("{value:e} > {limit:e}")));
        }
    }

    fn flag(&mut self, name: &'static str, ok: bool, detail: impl FnOnce() -> String) {
        if !ok {
            self.failures.push((name, detail()));
        }
    }

    fn error(&mut self, name: &'static str, e: Error) {
        self.failures.push((name, e.to_string()));
    }
}

fn instance_rng(seed: u64, family: Family, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((family as u64) << 32) | index as u64);
    rng
}

fn sorted3(mut v: [f64; 3]) -> [f64; 3] {
    v.sort_by(f64::total_cmp);
    v
}

fn dist3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn traceless_triple<R: Rng>(rng: &mut R) -> [f64; 3] {
    let a = rng.random_range(-3.0..3.0);
    let b = rng.random_range(-3.0..3.0);
    [a, b, -a - b]
}

/// Classification plus both deciders, and the biconditional between them.
fn decide(c: &mut Checks, r: &CurvTensor) -> Option<(DualityReport, bool)> {
    let report = match classify(r, BATTERY_TOL) {
        Ok(rep) => rep,
        Err(e) => {
            c.error("classify", e);
            return None;
        }
    };
    let exact = match osserman_exact(r, true, BATTERY_TOL) {
        Ok(d) => d.osserman,
        Err(e) => {
            c.error("osserman_exact", e);
            return None;
        }
    };
    match osserman_sampled(r, true, DEFAULT_SAMPLES, BATTERY_TOL) {
        Ok(s) => c.flag("deciders_agree", s.osserman == exact, || {
            format!("exact {exact}, sampled {}", s.osserman)
        }),
        Err(e) => c.error("osserman_sampled", e),
    }
    c.flag("biconditional", exact == report.class.is_half_flat(), || {
        format!("class {}, conformally Osserman {exact}", report.class)
    });
    Some((report, exact))
}

fn expect_class(c: &mut Checks, report: &DualityReport, want: DualityClass) {
    c.flag("class", report.class == want, || format!("expected {want}, got {}", report.class));
}

fn conformally_flat(c: &mut Checks, rng: &mut ChaCha8Rng) {
    let s = rng.random_range(-2.0..2.0);
    let h = random_sym(rng, 1.0);
    let r = &(&r0() * s) + &kulkarni(&h);
    c.residual("weyl_norm", weyl(&r).norm(), 1e-10 * (1.0 + r.norm()));
    if let Some((report, _)) = decide(c, &r) {
        expect_class(c, &report, DualityClass::ConformallyFlat);
    }
}

fn half_flat(c: &mut Checks, rng: &mut ChaCha8Rng, table: Phi2Table, orientation: i8) {
    let basis = random_orthonormal(rng, orientation);
    let lambdas = traceless_triple(rng);
    let triple = standard_triple(&basis, table);
    c.residual("structure_defect", structure_defects(&triple).max(), 1e-10);
    let s = synthesize_triple(&triple, lambdas);
    if let Err(e) = validate(s.raw()) {
        c.error("curvature_symmetries", e);
        return;
    }
    let Some((report, _)) = decide(c, &s) else { return };
    let n = report.norm_plus + report.norm_minus;
    let (want, off, on_eigs) = if orientation > 0 {
        (DualityClass::SelfDual, report.norm_minus, report.plus_eigenvalues)
    } else {
        (DualityClass::AntiSelfDual, report.norm_plus, report.minus_eigenvalues)
    };
    expect_class(c, &report, want);
    c.residual("off_side_ratio", off / n.max(f64::MIN_POSITIVE), 1e-9);
    let predicted = sorted3(lambdas.map(|l| -6.0 * l));
    c.residual("predicted_eigenvalues", dist3(on_eigs, predicted), 1e-9 * (1.0 + s.norm()));
    let w = match WeylTensor::new(s.clone()) {
        Ok(w) => w,
        Err(e) => {
            c.error("trace_free", e);
            return;
        }
    };
    match recover(&w, BATTERY_TOL) {
        Ok(d) => {
            c.residual("lambda_multiset", dist3(sorted3(d.lambdas), sorted3(lambdas)), 1e-8);
            c.residual("reconstruction", d.residual, 1e-8 * (1.0 + w.norm()));
            c.flag("orientation_routing", d.orientation_flipped == (orientation < 0), || {
                format!("flipped = {}", d.orientation_flipped)
            });
        }
        Err(e) => c.error("recover", e),
    }
}

fn normal_form_family(c: &mut Checks, rng: &mut ChaCha8Rng, index: usize) {
    let abc = traceless_triple(rng);
    let orientation = if index.is_multiple_of(2) { 1 } else { -1 };
    let basis = random_orthonormal(rng, orientation);
    let t = match normal_form(abc) {
        Ok(t) => t.in_basis(basis.matrix()),
        Err(e) => {
            c.error("normal_form", e);
            return;
        }
    };
    let Some((report, _)) = decide(c, &t) else { return };
    let expected = sorted3(abc.map(|v| -2.0 * v));
    let eigs = match report.class {
        DualityClass::SelfDual => report.plus_eigenvalues,
        DualityClass::AntiSelfDual => report.minus_eigenvalues,
        other => {
            c.flag("class", false, || format!("expected a half-flat class, got {other}"));
            return;
        }
    };
    c.residual("block_eigenvalues", dist3(eigs, expected), 1e-9);
}

fn generic(c: &mut Checks, rng: &mut ChaCha8Rng) {
    let r = random_act_with(rng);
    if let Some((report, exact)) = decide(c, &r) {
        expect_class(c, &report, DualityClass::Neither);
        c.flag("not_conformally_osserman", !exact, || "decider returned true".into());
    }
}

fn run_family(cfg: &BatteryConfig, family: Family) -> FamilySummary {
    let mut summary = FamilySummary {
        family,
        instances: cfg.count,
        failed_instances: 0,
        failed_checks: BTreeMap::new(),
        max_residuals: BTreeMap::new(),
        first_failure: None,
    };
    for index in 0..cfg.count {
        let mut rng = instance_rng(cfg.seed, family, index);
        let mut c = Checks::default();
        match family {
            Family::ConformallyFlat => conformally_flat(&mut c, &mut rng),
            Family::SelfDual => half_flat(&mut c, &mut rng, cfg.table, 1),
            Family::AntiSelfDual => half_flat(&mut c, &mut rng, cfg.table, -1),
            Family::NormalForm => normal_form_family(&mut c, &mut rng, index),
            Family::Generic => generic(&mut c, &mut rng),
        }
        for (name, v) in c.residuals {
            let e = summary.max_residuals.entry(name.to_string()).or_insert(0.0);
            *e = e.max(v);
        }
        if !c.failures.is_empty() {
            summary.failed_instances += 1;
            for (name, _) in &c.failures {
                *summary.failed_checks.entry(name.to_string()).or_insert(0) += 1;
            }
            if summary.first_failure.is_none() {
                let (check, detail) = c.failures.swap_remove(0);
                summary.first_failure = Some(FailureNote {
                    instance: index,
                    check: check.to_string(),
                    detail,
                });
            }
        }
    }
    summary
}

/// Runs `count` instances of every family; instance `i` of a family draws
/// from its own seeded stream, so results do not depend on `count`.
pub fn run_battery(cfg: &BatteryConfig) -> Result<BatteryReport> {
    if cfg.count == 0 {
        return Err(Error::BadParameters("count must be at least 1".into()));
    }
    let families: Vec<_> = Family::ALL.iter().map(|&f| run_family(cfg, f)).collect();
    let violations = families.iter().map(|f| f.failed_instances).sum();
    Ok(BatteryReport {
        seed: cfg.seed,
        count: cfg.count,
        phi2_table: cfg.table,
        families,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(count: usize, table: Phi2Table) -> BatteryConfig {
        BatteryConfig {
            seed: 1,
            count,
            table,
        }
    }

    #[test]
    fn small_battery_passes() {
        let rep = run_battery(&cfg(10, Phi2Table::Corrected)).unwrap();
        assert!(rep.passed(), "{rep:#?}");
        assert_eq!(rep.families.len(), 5);
    }

    #[test]
    fn zero_count_rejected() {
        assert!(matches!(run_battery(&cfg(0, Phi2Table::Corrected)), Err(Error::BadParameters(_))));
    }

    #[test]
    fn negative_control_fails() {
        let rep = run_battery(&cfg(5, Phi2Table::Uncorrected)).unwrap();
        assert!(!rep.passed());
        assert_eq!(rep.family(Family::SelfDual).failed_instances, 5);
        assert!(rep.family(Family::SelfDual).failed_checks.contains_key("structure_defect"));
        assert_eq!(rep.family(Family::Generic).failed_instances, 0);
    }

    #[test]
    fn deterministic() {
        let a = run_battery(&cfg(4, Phi2Table::Corrected)).unwrap();
        assert_eq!(run_battery(&cfg(4, Phi2Table::Corrected)).unwrap(), a);
    }
}
