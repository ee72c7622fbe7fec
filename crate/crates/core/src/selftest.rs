//! The ten-point verification suite: numbered, self-contained checks
//! with one outcome line each, runnable from the test harness or the
//! command line. Randomized checks use a fixed-seed generator so every
//! run sees the same instances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::applications::{k3_twistor_count, nodal_cp2, universal_poly};
use crate::blowup::{
    expand_formula, family_dimension_drop, grr_crosscheck, obstruction_smooth, sw_dimension,
    DimensionData, DimensionKind, FamilyBlowupScenario, Variant,
};
use crate::bundles::BundleClass;
use crate::kuranishi::{asw_evaluate, canonical_obstruction, KuranishiData};
use crate::rational::Rat;
use crate::ring::GradedClass;
use crate::schema::{Catalog, ModelEntry};
use crate::surfaces::{point_model, projective_bundle};

/// One line of the suite: which check, whether it passed, and either a
/// short summary of what was covered or the first failure found.
#[derive(Clone, Debug)]
pub struct CriterionOutcome {
    pub index: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

const NAMES: [&str; 10] = [
    "nodal-counts",
    "k3-twistor",
    "obstruction-ranks",
    "grr-identification",
    "point-riemann-roch",
    "asw-normalization",
    "dimension-formulas",
    "canonical-ranks",
    "universal-polynomial",
    "property-suites",
];

pub fn criteria_count() -> u32 {
    NAMES.len() as u32
}

/// Runs one check by its 1-based index. Engine errors count as failures
/// and are reported in the detail line, never panicked on.
pub fn run_criterion(index: u32) -> CriterionOutcome {
    let checks: [fn() -> Result<String, String>; 10] = [
        c1_nodal_counts,
        c2_k3_twistor,
        c3_obstruction_ranks,
        c4_grr_identification,
        c5_point_riemann_roch,
        c6_asw_normalization,
        c7_dimension_formulas,
        c8_canonical_ranks,
        c9_universal_polynomial,
        c10_property_suites,
    ];
    let name = NAMES[(index as usize).saturating_sub(1)];
    match checks[(index as usize) - 1]() {
        Ok(detail) => CriterionOutcome {
            index,
            name,
            passed: true,
            detail,
        },
        Err(detail) => CriterionOutcome {
            index,
            name,
            passed: false,
            detail,
        },
    }
}

pub fn run_all() -> Vec<CriterionOutcome> {
    (1..=criteria_count()).map(run_criterion).collect()
}

fn es(e: crate::error::Error) -> String {
    e.to_string()
}

fn rat(n: i64) -> Rat {
    Rat::from_int(n)
}

fn c1_nodal_counts() -> Result<String, String> {
    for d in 1..=20i64 {
        let got = nodal_cp2(d);
        let want = rat(3 * (d - 1) * (d - 1));
        if got != want {
            return Err(format!("degree {d}: got {got}, expected {want}"));
        }
    }
    Ok("plane counts match 3(d-1)^2 for d = 1..20".into())
}

fn c2_k3_twistor() -> Result<String, String> {
    for (square, want) in [(0i64, 24i64), (2, 30), (-2, 18)] {
        let got = k3_twistor_count(square);
        if got != rat(want) {
            return Err(format!("square {square}: got {got}, expected {want}"));
        }
    }
    Ok("square-zero count is 24 (18 and 30 at squares -2, 2)".into())
}

fn cp2_scenario(m: i64, catalog: &Catalog) -> Result<FamilyBlowupScenario, String> {
    let cp2 = catalog.model("cp2").map_err(es)?;
    let h = GradedClass::generator(&cp2.space, "h").map_err(es)?;
    FamilyBlowupScenario::new(
        Variant::Smooth,
        &cp2.space,
        h.scale(&rat(2)),
        cp2.tangent.clone(),
        m,
        h,
        None,
    )
    .map_err(es)
}

fn c3_obstruction_ranks() -> Result<String, String> {
    let catalog = Catalog::new();
    for m in (-15..=15i64).filter(|m| m.rem_euclid(2) == 1) {
        let sc = cp2_scenario(m, &catalog)?;
        let w = obstruction_smooth(&sc).map_err(es)?;
        if w.rank() != (m * m - 1) / 8 {
            return Err(format!(
                "m = {m}: rank {} instead of {}",
                w.rank(),
                (m * m - 1) / 8
            ));
        }
        if m.abs() == 1 {
            let terms = expand_formula(&sc).map_err(es)?;
            if terms.len() != 1 || terms[0].index != 0 {
                return Err(format!(
                    "m = {m}: expansion has {} terms, expected the bare insertion",
                    terms.len()
                ));
            }
        }
    }
    Ok("ranks (m^2-1)/8 for odd |m| <= 15; |m| = 1 collapses to the insertion".into())
}

/// The rank-2 bundles a check sweeps over a base: a trivial pair, the
/// tangent bundle when it has rank 2, and split sums of opposite twists.
fn normal_bundle_menu(entry: &ModelEntry) -> Vec<BundleClass> {
    let mut menu = vec![BundleClass::trivial(&entry.space, 2)];
    if entry.tangent.rank() == 2 {
        menu.push(entry.tangent.clone());
    }
    if let Some(pol) = &entry.polarization {
        for a in -2..=2i64 {
            for b in a..=2i64 {
                let oa = BundleClass::line(pol.scale(&rat(a))).expect("degree 2");
                let ob = BundleClass::line(pol.scale(&rat(b))).expect("degree 2");
                menu.push(oa.whitney(&ob).expect("same space"));
            }
        }
    }
    menu
}

fn c4_grr_identification() -> Result<String, String> {
    let catalog = Catalog::new();
    let mut checked = 0usize;
    for base in ["point", "cp2", "k3", "torus1"] {
        let entry = catalog.model(base).map_err(es)?;
        for ns in normal_bundle_menu(entry) {
            for am in [3i64, 5, 7, 9] {
                for m in [am, -am] {
                    let sc = FamilyBlowupScenario::new(
                        Variant::Smooth,
                        &entry.space,
                        GradedClass::zero(&entry.space),
                        ns.clone(),
                        m,
                        GradedClass::one(&entry.space),
                        None,
                    )
                    .map_err(es)?;
                    let report = grr_crosscheck(&sc).map_err(es)?;
                    if !report.equal {
                        return Err(format!("base {base}, m = {m}: character mismatch"));
                    }
                    checked += 1;
                }
            }
        }
    }
    Ok(format!(
        "character identity holds in {checked} base/bundle/multiplicity combinations"
    ))
}

fn c5_point_riemann_roch() -> Result<String, String> {
    let point = point_model();
    for am in (3..=15i64).step_by(2) {
        for m in [am, -am] {
            let sc = FamilyBlowupScenario::new(
                Variant::Smooth,
                &point,
                GradedClass::zero(&point),
                BundleClass::trivial(&point, 2),
                m,
                GradedClass::one(&point),
                None,
            )
            .map_err(es)?;
            let report = grr_crosscheck(&sc).map_err(es)?;
            let p = (am - 3) / 2;
            let want = rat((p + 1) * (p + 2) / 2);
            if report.rank != want {
                return Err(format!("m = {m}: rank {}, expected {want}", report.rank));
            }
        }
    }
    Ok("point-base rank equals (p+1)(p+2)/2 for odd 3 <= |m| <= 15".into())
}

/// A random honest bundle over `entry` whose Chern classes are small
/// multiples of the polarization and its square.
fn random_bundle(
    rng: &mut ChaCha8Rng,
    entry: &ModelEntry,
    min_rank: u32,
    max_rank: u32,
) -> BundleClass {
    let rank = rng.gen_range(min_rank..=max_rank);
    let dim = entry.space.complex_dim();
    let mut parts = Vec::new();
    if let Some(pol) = &entry.polarization {
        if rank >= 1 && dim >= 1 {
            parts.push(pol.scale(&rat(rng.gen_range(-2..=2))));
        }
        if rank >= 2 && dim >= 2 {
            let sq = pol.pow(2).expect("squaring the polarization");
            parts.push(sq.scale(&rat(rng.gen_range(-2..=2))));
        }
    }
    BundleClass::from_chern(&entry.space, rank as i64, &parts)
        .expect("homogeneous parts by construction")
}

fn random_insertion(rng: &mut ChaCha8Rng, entry: &ModelEntry) -> GradedClass {
    match (&entry.polarization, rng.gen_range(0..3u32)) {
        (Some(pol), 1) => pol.clone(),
        (Some(pol), 2) => pol.scale(&rat(rng.gen_range(1..=3))),
        _ => GradedClass::one(&entry.space),
    }
}

fn c6_asw_normalization() -> Result<String, String> {
    let point = point_model();
    for v in 2..=12u32 {
        for w in 1..v {
            let k = KuranishiData::balanced(
                BundleClass::trivial(&point, v),
                BundleClass::trivial(&point, w),
                GradedClass::one(&point),
            )
            .map_err(es)?;
            let report = asw_evaluate(&k).map_err(es)?;
            if report.value != rat(1) || !report.top_degree_checked {
                return Err(format!(
                    "v = {v}, w = {w}: value {} (degree check {})",
                    report.value, report.top_degree_checked
                ));
            }
        }
    }

    let catalog = Catalog::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_a5ce);
    for i in 0..50 {
        let base = ["point", "cp2", "torus1"][i % 3];
        let entry = catalog.model(base).map_err(es)?;
        let v = random_bundle(&mut rng, entry, 2, 4);
        let w = random_bundle(&mut rng, entry, 1, v.rank() as u32 - 1);
        let u = random_bundle(&mut rng, entry, 1, 3);
        let d = rng.gen_range(0..=3u32);
        let eta = random_insertion(&mut rng, entry);
        let plain =
            asw_evaluate(&KuranishiData::new(v.clone(), w.clone(), d, eta.clone()).map_err(es)?)
                .map_err(es)?;
        let stabilized = asw_evaluate(
            &KuranishiData::new(
                v.whitney(&u).map_err(es)?,
                w.whitney(&u).map_err(es)?,
                d,
                eta,
            )
            .map_err(es)?,
        )
        .map_err(es)?;
        if plain.value != stabilized.value {
            return Err(format!(
                "instance {i} over {base}: {} became {} after stabilizing",
                plain.value, stabilized.value
            ));
        }
    }
    Ok("66 point normalizations are 1; 50 stabilized instances agree".into())
}

fn c7_dimension_formulas() -> Result<String, String> {
    for m in (-15..=15i64).filter(|m| m.rem_euclid(2) == 1) {
        let drop = family_dimension_drop(m).map_err(es)?;
        if drop != -(m * m - 1) / 4 {
            return Err(format!("m = {m}: drop {drop}"));
        }
    }
    let cp2 = crate::surfaces::SurfaceData::cp2();
    for d in 1..=10i64 {
        let dims = DimensionData::from_surface(&cp2, &[rat(d)], 0, 0).map_err(es)?;
        let gt = sw_dimension(DimensionKind::GromovTaubes, &dims).map_err(es)?;
        if gt != rat((d * d + 3 * d) / 2) {
            return Err(format!("degree {d}: embedded count {gt}"));
        }
    }
    Ok("drops -(m^2-1)/4 for odd |m| <= 15; plane counts (d^2+3d)/2".into())
}

fn c8_canonical_ranks() -> Result<String, String> {
    let catalog = Catalog::new();
    let cp2 = catalog.model("cp2").map_err(es)?;
    let h = GradedClass::generator(&cp2.space, "h").map_err(es)?;
    let menu = normal_bundle_menu(cp2);
    let mut rng = ChaCha8Rng::seed_from_u64(0xca40_0b57);
    for i in 0..20 {
        let e = BundleClass::line(h.scale(&rat(rng.gen_range(-2..=2)))).map_err(es)?;
        let levels: Vec<(i64, BundleClass)> = (0..rng.gen_range(1..=4usize))
            .map(|_| {
                (
                    rng.gen_range(1..=5i64),
                    menu[rng.gen_range(0..menu.len())].clone(),
                )
            })
            .collect();
        let want: i64 = levels.iter().map(|(m, _)| m * (m + 1) / 2).sum();
        let ob = canonical_obstruction(&e, &levels).map_err(es)?;
        if ob.rank() != want {
            return Err(format!("tuple {i}: rank {} instead of {want}", ob.rank()));
        }
    }
    for p in 1..=4i64 {
        let e = BundleClass::line(h.scale(&rat(2))).map_err(es)?;
        let single = canonical_obstruction(&e, &[(p, cp2.tangent.clone())]).map_err(es)?;
        let sc = FamilyBlowupScenario::new(
            Variant::Algebraic,
            &cp2.space,
            GradedClass::zero(&cp2.space),
            cp2.tangent.clone(),
            -p,
            GradedClass::one(&cp2.space),
            Some(e),
        )
        .map_err(es)?;
        let alg = crate::blowup::obstruction_algebraic(&sc).map_err(es)?;
        if !single.factors()[0].equals(&alg) {
            return Err(format!("multiplicity {p}: single-level factor differs"));
        }
    }
    Ok("20 random tuples have rank sum m(m+1)/2; single level matches the blowup bundle".into())
}

fn c9_universal_polynomial() -> Result<String, String> {
    let u2 = universal_poly(2).map_err(es)?;
    let mut want = std::collections::BTreeMap::new();
    want.insert("C2".to_string(), rat(3));
    want.insert("CK".to_string(), rat(2));
    want.insert("c2".to_string(), rat(1));
    if u2.named_coefficients() != want {
        return Err(format!("p = 2 solved to {:?}", u2.named_coefficients()));
    }
    for d in 1..=6i64 {
        let via_poly = u2.eval(&[rat(d * d), rat(-3 * d), rat(9), rat(3)]);
        if via_poly != nodal_cp2(d) {
            return Err(format!("degree {d}: substitution gives {via_poly}"));
        }
    }
    if u2.eval(&[rat(0), rat(0), rat(0), rat(24)]) != rat(24) {
        return Err("K3 substitution is off".into());
    }
    for p in 1..=5i64 {
        let u = universal_poly(p).map_err(es)?;
        if !u.verified() {
            return Err(format!("p = {p}: off-grid verification failed"));
        }
    }
    Ok("p = 2 solves to 3C^2 + 2CK + c2; off-grid checks pass for p <= 5".into())
}

fn c10_property_suites() -> Result<String, String> {
    let catalog = Catalog::new();
    let bases = ["cp2", "torus1", "point"];
    let mut rng = ChaCha8Rng::seed_from_u64(0x9e0b_57a7);
    let entry_at = |i: usize| catalog.model(bases[i % bases.len()]).map_err(es);

    // additivity of the character under direct sum
    for i in 0..200 {
        let entry = entry_at(i)?;
        let a = random_bundle(&mut rng, entry, 1, 3);
        let b = random_bundle(&mut rng, entry, 1, 3);
        let sum = a.whitney(&b).map_err(es)?;
        let want = a.chern_character().add(&b.chern_character()).map_err(es)?;
        if sum.chern_character() != want {
            return Err(format!("character additivity fails at instance {i}"));
        }
    }

    // dual acts on the character by alternating signs
    for i in 0..200 {
        let entry = entry_at(i)?;
        let a = random_bundle(&mut rng, entry, 1, 4);
        let ch = a.chern_character();
        let dual_ch = a.dual().chern_character();
        for k in 0..=entry.space.complex_dim() {
            let sign = if k % 2 == 0 { rat(1) } else { rat(-1) };
            if dual_ch.degree_part(2 * k) != ch.degree_part(2 * k).scale(&sign) {
                return Err(format!("dual character fails at instance {i}, degree {k}"));
            }
        }
    }

    // Newton recursion recovers the Chern classes from the power sums
    for i in 0..200 {
        let entry = entry_at(i)?;
        let a = random_bundle(&mut rng, entry, 1, 4);
        let dim = entry.space.complex_dim();
        let p = a.power_sums(dim);
        let mut e: Vec<GradedClass> = vec![GradedClass::one(&entry.space)];
        for k in 1..=dim as usize {
            // k e_k = sum_{i=1..k} (-1)^{i-1} e_{k-i} p_i
            let mut acc = GradedClass::zero(&entry.space);
            for j in 1..=k {
                let term = e[k - j].mul(&p[j - 1]).map_err(es)?;
                acc = if j % 2 == 1 {
                    acc.add(&term).map_err(es)?
                } else {
                    acc.sub(&term).map_err(es)?
                };
            }
            e.push(acc.scale(&Rat::frac(1, k as i64).expect("k >= 1")));
        }
        for k in 1..=dim {
            if e[k as usize] != a.chern(k) {
                return Err(format!("Newton roundtrip fails at instance {i}, c_{k}"));
            }
        }
    }

    // projection formula over a projective bundle
    for i in 0..200 {
        let entry = entry_at(i)?;
        let v = random_bundle(&mut rng, entry, 2, 3);
        let pb = projective_bundle(&v, "xi_check").map_err(es)?;
        let alpha = random_insertion(&mut rng, entry);
        let gamma = random_insertion(&mut rng, entry);
        let beta = pb
            .xi()
            .pow(rng.gen_range(0..=2u32))
            .map_err(es)?
            .mul(&pb.lift(&gamma).map_err(es)?)
            .map_err(es)?;
        let lhs = pb
            .pushforward(&pb.lift(&alpha).map_err(es)?.mul(&beta).map_err(es)?)
            .map_err(es)?;
        let rhs = alpha.mul(&pb.pushforward(&beta).map_err(es)?).map_err(es)?;
        if lhs != rhs {
            return Err(format!("projection formula fails at instance {i}"));
        }
    }

    // the defining relation of the projectivization holds
    for i in 0..200 {
        let entry = entry_at(i)?;
        let v = random_bundle(&mut rng, entry, 2, 4);
        let pb = projective_bundle(&v, "xi_check").map_err(es)?;
        let r = v.rank() as u32;
        let mut acc = pb.xi().pow(r).map_err(es)?;
        for j in 1..=r {
            let term = pb
                .lift(&v.chern(j))
                .map_err(es)?
                .mul(&pb.xi().pow(r - j).map_err(es)?)
                .map_err(es)?;
            acc = acc.add(&term).map_err(es)?;
        }
        if !acc.is_zero() {
            return Err(format!("defining relation fails at instance {i}"));
        }
    }

    Ok("5 suites x 200 seeded instances hold exactly".into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::time::Instant;

    #[test]
    fn every_criterion_passes_quickly() {
        let start = Instant::now();
        for outcome in run_all() {
            assert!(
                outcome.passed,
                "criterion {} ({}) failed: {}",
                outcome.index, outcome.name, outcome.detail
            );
        }
        assert!(
            start.elapsed().as_secs() < 30,
            "suite took {:?}",
            start.elapsed()
        );
    }
}
