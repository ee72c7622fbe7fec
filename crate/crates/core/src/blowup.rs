//! Blowup correction data: the obstruction bundles attached to a
//! multiplicity along an exceptional family, the finite expansion of the
//! invariant correction they induce, an independent index-theoretic
//! crosscheck of those bundles, and the dimension bookkeeping around
//! them.
//!
//! Two variants are covered. The `Smooth` one indexes levels by an odd
//! integer `m` and builds a twisted symmetric power of the normal bundle
//! of the blown-up family; the `Algebraic` one indexes by any integer and
//! twists by a supplied restricted line bundle instead of the half-line.
//! The two agree under the index dictionary `m_smooth = 2 m_alg - 1`, a
//! fact the tests pin down exactly.

use serde::{Deserialize, Serialize};

use crate::bundles::BundleClass;
use crate::error::Error;
use crate::rational::Rat;
use crate::ring::{GradedClass, Space};
use crate::surfaces::{projective_bundle, SurfaceData};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Smooth,
    Algebraic,
}

/// One blowup level over a family base: the normal bundle `Ns` of the
/// exceptional family, the degree-2 reference class `l0`, the
/// multiplicity `m`, and the insertion class paired against the
/// correction. `e_restr` is only consumed by the algebraic variant.
#[derive(Clone, Debug)]
pub struct FamilyBlowupScenario {
    pub variant: Variant,
    pub base: Space,
    pub l0: GradedClass,
    pub ns: BundleClass,
    pub m: i64,
    pub insertion: GradedClass,
    pub e_restr: Option<BundleClass>,
}

impl FamilyBlowupScenario {
    pub fn new(
        variant: Variant,
        base: &Space,
        l0: GradedClass,
        ns: BundleClass,
        m: i64,
        insertion: GradedClass,
        e_restr: Option<BundleClass>,
    ) -> Result<Self, Error> {
        if l0.space().id() != base.id()
            || ns.space().id() != base.id()
            || insertion.space().id() != base.id()
            || e_restr
                .as_ref()
                .is_some_and(|e| e.space().id() != base.id())
        {
            return Err(Error::AmbientMismatch);
        }
        if !(l0.is_zero() || l0.is_homogeneous(2)) {
            return Err(Error::WrongDegree {
                context: "l0 must be homogeneous of degree 2".into(),
            });
        }
        if ns.rank() != 2 || !ns.is_honest() {
            return Err(Error::VirtualRank { rank: ns.rank() });
        }
        if variant == Variant::Smooth && m.rem_euclid(2) == 0 {
            return Err(Error::EvenM { m });
        }
        if let Some(e) = &e_restr {
            if e.rank() != 1 {
                return Err(Error::NotALine { rank: e.rank() });
            }
        }
        if !insertion.is_zero() {
            let d = insertion.max_degree().expect("nonzero class has a degree");
            if !insertion.is_homogeneous(d) {
                return Err(Error::WrongDegree {
                    context: "insertion must be homogeneous".into(),
                });
            }
        }
        Ok(FamilyBlowupScenario {
            variant,
            base: base.clone(),
            l0,
            ns,
            m,
            insertion,
            e_restr,
        })
    }

    /// The half-line twist `A` with `c_1(A) = (l0 - c_1(Ns)) / 2`.
    fn half_twist(&self) -> Result<BundleClass, Error> {
        BundleClass::half_line(self.l0.sub(&self.ns.chern(1))?)
    }
}

/// Obstruction bundle of the smooth variant at odd multiplicity `m`:
/// rank `(m^2 - 1)/8`, equal to `A ⊗ S^{(|m|-3)/2}(N ⊕ C)` where `N` is
/// `Ns` for `m ≥ 3` and its dual for `m ≤ -3`, and `A` is the half-line
/// twist of the scenario. `m = ±1` gives the empty bundle.
pub fn obstruction_smooth(sc: &FamilyBlowupScenario) -> Result<BundleClass, Error> {
    if sc.m.rem_euclid(2) == 0 {
        return Err(Error::EvenM { m: sc.m });
    }
    if sc.m.abs() == 1 {
        return Ok(BundleClass::trivial(&sc.base, 0));
    }
    let p = ((sc.m.abs() - 3) / 2) as u32;
    let n = if sc.m > 0 {
        sc.ns.clone()
    } else {
        sc.ns.dual()
    };
    let sym = n
        .whitney(&BundleClass::trivial(&sc.base, 1))?
        .sym_power(p)?;
    sym.tensor_line(&sc.half_twist()?)
}

/// Obstruction bundle of the algebraic variant at multiplicity `m`: rank
/// `m(m-1)/2`, equal to `E ⊗ S^{m-2}(C ⊕ Ns)` for `m ≥ 2` and
/// `E ⊗ S^{-m-1}(C ⊕ Ns*)` for `m ≤ -1`, where `E` is the scenario's
/// restricted line bundle. `m ∈ {0, 1}` gives the empty bundle.
pub fn obstruction_algebraic(sc: &FamilyBlowupScenario) -> Result<BundleClass, Error> {
    let e = sc.e_restr.as_ref().ok_or_else(|| {
        Error::invalid("algebraic variant needs the restricted line bundle eRestr")
    })?;
    if e.rank() != 1 {
        return Err(Error::NotALine { rank: e.rank() });
    }
    if sc.m == 0 || sc.m == 1 {
        return Ok(BundleClass::trivial(&sc.base, 0));
    }
    let (p, n) = if sc.m >= 2 {
        ((sc.m - 2) as u32, sc.ns.clone())
    } else {
        ((-sc.m - 1) as u32, sc.ns.dual())
    };
    let sym = BundleClass::trivial(&sc.base, 1)
        .whitney(&n)?
        .sym_power(p)?;
    sym.tensor_line(e)
}

/// The obstruction bundle the scenario's variant calls for.
pub fn obstruction_bundle(sc: &FamilyBlowupScenario) -> Result<BundleClass, Error> {
    match sc.variant {
        Variant::Smooth => obstruction_smooth(sc),
        Variant::Algebraic => obstruction_algebraic(sc),
    }
}

/// One term of the expanded correction: the insertion cupped with
/// `c_i(W)`, recorded with its index and total degree.
#[derive(Clone, Debug)]
pub struct ExpansionTerm {
    pub index: u32,
    pub class: GradedClass,
    pub degree: u32,
}

/// Expands the correction induced by the scenario's obstruction bundle
/// `W` into its finite list of terms `η ∪ c_i(W)`. The `i = 0` term is
/// always present (it is the uncorrected insertion); higher terms are
/// listed only when nonzero. Multiplicities of absolute value 1 (smooth)
/// or in `{0, 1}` (algebraic) therefore produce exactly one term.
pub fn expand_formula(sc: &FamilyBlowupScenario) -> Result<Vec<ExpansionTerm>, Error> {
    let w = obstruction_bundle(sc)?;
    let eta_degree = sc.insertion.max_degree().unwrap_or(0);
    let mut terms = vec![ExpansionTerm {
        index: 0,
        class: sc.insertion.clone(),
        degree: eta_degree,
    }];
    for i in 1..=w.rank().max(0) as u32 {
        let class = sc.insertion.mul(&w.chern(i))?;
        if class.is_zero() {
            continue;
        }
        terms.push(ExpansionTerm {
            index: i,
            class,
            degree: eta_degree + 2 * i,
        });
    }
    Ok(terms)
}

/// Outcome of the index-theoretic crosscheck: `lhs` is the Chern
/// character of the claimed obstruction bundle (dualized for positive
/// multiplicity), `rhs` the fiber integral of Todd times Chern character
/// over the projectivized normal family, `rank` the degree-0 part of the
/// rhs.
#[derive(Clone, Debug)]
pub struct GrrReport {
    pub lhs: GradedClass,
    pub rhs: GradedClass,
    pub rank: Rat,
    pub equal: bool,
}

/// Checks the smooth obstruction bundle against an independent fiber
/// integral over `P(Ns ⊕ C)`. For `m ≤ -3` the bundle itself is the
/// direct image of `π*A ⊗ O(p)` with `p = (-m-3)/2`, so its Chern
/// character must equal `π_*(td(T_π) · ch(π*A ⊗ O(p)))`. For `m ≥ 3`
/// the comparison runs through the dual: `W*` is the direct image of
/// `π*A* ⊗ O(p)` with `p = (m-3)/2`. Requires odd `|m| ≥ 3`.
pub fn grr_crosscheck(sc: &FamilyBlowupScenario) -> Result<GrrReport, Error> {
    if sc.m.rem_euclid(2) == 0 {
        return Err(Error::EvenM { m: sc.m });
    }
    if sc.m.abs() < 3 {
        return Err(Error::RankBound { m: sc.m });
    }
    let v = sc.ns.whitney(&BundleClass::trivial(&sc.base, 1))?;
    let pb = projective_bundle(&v, &fresh_name(&sc.base, "xi"))?;
    let todd = pb.relative_tangent()?.todd();

    let p = ((sc.m.abs() - 3) / 2) as u32;
    let a = sc.half_twist()?;
    let (twist, w_side) = if sc.m < 0 {
        (a, obstruction_smooth(sc)?)
    } else {
        (a.dual(), obstruction_smooth(sc)?.dual())
    };
    let integrand_bundle = pb
        .lift_bundle(&twist)?
        .tensor_line(&pb.hyperplane_power(p as i64))?;
    let rhs = pb.pushforward(&todd.mul(&integrand_bundle.chern_character())?)?;
    let lhs = w_side.chern_character();
    let rank = rhs.scalar_part();
    let equal = lhs == rhs;
    Ok(GrrReport {
        lhs,
        rhs,
        rank,
        equal,
    })
}

fn fresh_name(space: &Space, stem: &str) -> String {
    let mut name = stem.to_string();
    while space.gen_index(&name).is_some() {
        name.push('_');
    }
    name
}

/// Numerical inputs for the dimension formulas: Chern numbers of the
/// fiber, the divisor class pairings, Hodge data, the family base
/// dimension, and the fiberwise deformation count used by the algebraic
/// family count.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DimensionData {
    pub c_sq: Rat,
    pub ck: Rat,
    pub k_sq: Rat,
    pub c2: Rat,
    pub pg: u32,
    pub q: u32,
    pub dim_b: i64,
    pub fbd: i64,
}

impl DimensionData {
    /// Pairs a divisor class (coordinates in the surface basis) with the
    /// surface's intersection data.
    #[allow(clippy::needless_range_loop)]
    pub fn from_surface(
        data: &SurfaceData,
        coords: &[Rat],
        dim_b: i64,
        fbd: i64,
    ) -> Result<Self, Error> {
        data.validate()?;
        let n = data.basis.len();
        if coords.len() != n {
            return Err(Error::ShapeMismatch {
                context: format!("expected {n} class coordinates, got {}", coords.len()),
            });
        }
        let pair = |a: &[Rat], b: &[Rat]| -> Rat {
            let mut acc = Rat::zero();
            for i in 0..n {
                for j in 0..n {
                    acc += a[i].clone() * data.intersection[i][j].clone() * b[j].clone();
                }
            }
            acc
        };
        Ok(DimensionData {
            c_sq: pair(coords, coords),
            ck: pair(coords, &data.canonical),
            k_sq: pair(&data.canonical, &data.canonical),
            c2: data.c2.clone(),
            pg: data.pg,
            q: data.q,
            dim_b,
            fbd,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DimensionKind {
    SpinC,
    GromovTaubes,
    Family,
    AlgebraicFamily,
}

/// Expected dimension of the moduli problem selected by `kind`.
///
/// The spin-c count is `(c_1(s)^2 - 2χ - 3σ)/4` for the structure with
/// `c_1(s) = 2C - K`, with `χ = c_2` and the signature recovered from
/// `σ = (K^2 - 2 c_2)/3`. The embedded-curve count is `(C^2 - C·K)/2`.
/// Family counts add the base dimension; the algebraic family count also
/// adds the fiberwise deformation number `fbd`, which must lie in
/// `[0, pg]`.
pub fn sw_dimension(kind: DimensionKind, d: &DimensionData) -> Result<Rat, Error> {
    let spin_c = || -> Rat {
        let c1s_sq =
            Rat::from_int(4) * d.c_sq.clone() - Rat::from_int(4) * d.ck.clone() + d.k_sq.clone();
        let sigma = (d.k_sq.clone() - Rat::from_int(2) * d.c2.clone()) / Rat::from_int(3);
        (c1s_sq - Rat::from_int(2) * d.c2.clone() - Rat::from_int(3) * sigma) / Rat::from_int(4)
    };
    let gt = || (d.c_sq.clone() - d.ck.clone()) / Rat::from_int(2);
    match kind {
        DimensionKind::SpinC => Ok(spin_c()),
        DimensionKind::GromovTaubes => Ok(gt()),
        DimensionKind::Family => Ok(Rat::from_int(d.dim_b) + spin_c()),
        DimensionKind::AlgebraicFamily => {
            if d.fbd < 0 || d.fbd > d.pg as i64 {
                return Err(Error::RangeError {
                    context: format!("fbd = {} must lie in [0, {}]", d.fbd, d.pg),
                });
            }
            Ok(gt() + Rat::from_int(d.fbd) + Rat::from_int(d.dim_b))
        }
    }
}

/// How much the expected family dimension drops at an odd multiplicity:
/// `-(m^2 - 1)/4`.
pub fn family_dimension_drop(m: i64) -> Result<i64, Error> {
    if m.rem_euclid(2) == 0 {
        return Err(Error::EvenM { m });
    }
    Ok(-(m * m - 1) / 4)
}

/// Whether the multiplicity list fits inside the embedded-curve count.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExistenceReport {
    pub satisfied: bool,
    pub slack: Rat,
}

/// Checks `(C^2 - C·K)/2 - Σ m_i(m_i - 1)/2 ≥ 0`. Multiplicities must be
/// at least 1.
pub fn existence_check(
    d: &DimensionData,
    multiplicities: &[i64],
) -> Result<ExistenceReport, Error> {
    let mut budget = sw_dimension(DimensionKind::GromovTaubes, d)?;
    for &m in multiplicities {
        if m < 1 {
            return Err(Error::BadMultiplicity {
                context: format!("multiplicity {m} is below 1"),
            });
        }
        budget -= Rat::from_int(m * (m - 1) / 2);
    }
    Ok(ExistenceReport {
        satisfied: !budget.is_negative(),
        slack: budget,
    })
}

/// Smooth-variant multiplicity attached to an algebraic one.
pub fn spin_c_from_algebraic(m_alg: i64) -> i64 {
    2 * m_alg - 1
}

/// Algebraic multiplicity attached to an odd smooth-variant one.
pub fn algebraic_from_spin_c(m_spin: i64) -> Result<i64, Error> {
    if m_spin.rem_euclid(2) == 0 {
        return Err(Error::EvenM { m: m_spin });
    }
    Ok((m_spin + 1) / 2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surfaces::{point_model, surface_model, torus_model};

    fn rat(n: i64) -> Rat {
        Rat::from_int(n)
    }

    fn point_scenario(m: i64) -> FamilyBlowupScenario {
        let p = point_model();
        FamilyBlowupScenario::new(
            Variant::Smooth,
            &p,
            GradedClass::zero(&p),
            BundleClass::trivial(&p, 2),
            m,
            GradedClass::one(&p),
            None,
        )
        .unwrap()
    }

    fn cp2_scenario(m: i64, d: i64) -> FamilyBlowupScenario {
        let s = surface_model(&SurfaceData::cp2()).unwrap();
        let h = GradedClass::generator(&s.space, "h").unwrap();
        // l0 = 2C - K with C = d h and K = -3h
        let l0 = h.scale(&rat(2 * d + 3));
        FamilyBlowupScenario::new(
            Variant::Smooth,
            &s.space,
            l0,
            s.tangent.clone(),
            m,
            GradedClass::one(&s.space),
            None,
        )
        .unwrap()
    }

    #[test]
    fn smooth_ranks_follow_the_square_law() {
        for m in (-15..=15).filter(|m| m % 2 != 0) {
            let sc = point_scenario(m);
            let w = obstruction_smooth(&sc).unwrap();
            assert_eq!(w.rank(), (m * m - 1) / 8, "m = {m}");
            assert!(w.is_honest());
        }
    }

    #[test]
    fn even_multiplicity_rejected_for_smooth() {
        let p = point_model();
        let err = FamilyBlowupScenario::new(
            Variant::Smooth,
            &p,
            GradedClass::zero(&p),
            BundleClass::trivial(&p, 2),
            4,
            GradedClass::one(&p),
            None,
        )
        .unwrap_err();
        assert!(matches!(err, Error::EvenM { m: 4 }));
    }

    #[test]
    fn unit_multiplicity_gives_single_expansion_term() {
        for m in [1, -1] {
            let sc = point_scenario(m);
            let terms = expand_formula(&sc).unwrap();
            assert_eq!(terms.len(), 1);
            assert_eq!(terms[0].index, 0);
            assert_eq!(terms[0].class, sc.insertion);
        }
    }

    #[test]
    fn algebraic_ranks_follow_the_triangular_law() {
        let s = surface_model(&SurfaceData::cp2()).unwrap();
        let h = GradedClass::generator(&s.space, "h").unwrap();
        let e = BundleClass::line(h.scale(&rat(2))).unwrap();
        for m in -5..=5 {
            let sc = FamilyBlowupScenario::new(
                Variant::Algebraic,
                &s.space,
                GradedClass::zero(&s.space),
                s.tangent.clone(),
                m,
                GradedClass::one(&s.space),
                Some(e.clone()),
            )
            .unwrap();
            let w = obstruction_algebraic(&sc).unwrap();
            assert_eq!(w.rank(), m * (m - 1) / 2, "m = {m}");
        }
    }

    #[test]
    fn smooth_and_algebraic_variants_agree_under_the_dictionary() {
        // With l0 = 2C - K and Ns the tangent bundle, the smooth bundle at
        // m = -(2p+1) must equal the algebraic one at -p twisted by O(C).
        let s = surface_model(&SurfaceData::cp2()).unwrap();
        let h = GradedClass::generator(&s.space, "h").unwrap();
        for d in 1..=3i64 {
            for p in 1..=3i64 {
                let m_spin = -(2 * p + 1);
                assert_eq!(spin_c_from_algebraic(-p), m_spin);
                assert_eq!(algebraic_from_spin_c(m_spin).unwrap(), -p);
                let smooth = FamilyBlowupScenario::new(
                    Variant::Smooth,
                    &s.space,
                    h.scale(&rat(2 * d + 3)),
                    s.tangent.clone(),
                    m_spin,
                    GradedClass::one(&s.space),
                    None,
                )
                .unwrap();
                let alg = FamilyBlowupScenario::new(
                    Variant::Algebraic,
                    &s.space,
                    GradedClass::zero(&s.space),
                    s.tangent.clone(),
                    -p,
                    GradedClass::one(&s.space),
                    Some(BundleClass::line(h.scale(&rat(d))).unwrap()),
                )
                .unwrap();
                let w_s = obstruction_smooth(&smooth).unwrap();
                let w_a = obstruction_algebraic(&alg).unwrap();
                assert!(w_s.equals(&w_a), "d = {d}, p = {p}");
            }
        }
    }

    #[test]
    fn degree_four_term_recovers_the_node_count() {
        // At m = -5 over the plane with C = d h, the i = 2 term integrates
        // to 3(d-1)^2.
        for d in 1..=6i64 {
            let sc = cp2_scenario(-5, d);
            let terms = expand_formula(&sc).unwrap();
            let t2 = terms.iter().find(|t| t.index == 2);
            let value = t2.map(|t| t.class.integrate()).unwrap_or_else(Rat::zero);
            assert_eq!(value, rat(3 * (d - 1) * (d - 1)), "d = {d}");
            if let Some(t) = t2 {
                assert_eq!(t.degree, 4);
            }
        }
    }

    #[test]
    fn grr_crosscheck_over_the_point_is_riemann_roch() {
        for m in [-9, -7, -5, -3, 3, 5, 7, 9] {
            let sc = point_scenario(m);
            let report = grr_crosscheck(&sc).unwrap();
            let p = (m.abs() - 3) / 2;
            assert!(report.equal, "m = {m}");
            assert_eq!(report.rank, rat((p + 1) * (p + 2) / 2), "m = {m}");
        }
    }

    #[test]
    fn grr_crosscheck_over_surfaces_and_tori() {
        let s = surface_model(&SurfaceData::cp2()).unwrap();
        let h = GradedClass::generator(&s.space, "h").unwrap();
        for m in [-5, -3, 3, 5] {
            let sc = FamilyBlowupScenario::new(
                Variant::Smooth,
                &s.space,
                h.clone(),
                s.tangent.clone(),
                m,
                GradedClass::one(&s.space),
                None,
            )
            .unwrap();
            let report = grr_crosscheck(&sc).unwrap();
            assert!(report.equal, "tangent Ns, m = {m}");
        }
        let t = torus_model(1);
        let t1 = GradedClass::generator(&t, "t1").unwrap();
        let t2 = GradedClass::generator(&t, "t2").unwrap();
        let ns = BundleClass::from_chern(&t, 2, &[t1.mul(&t2).unwrap().scale(&rat(2))]).unwrap();
        let sc = FamilyBlowupScenario::new(
            Variant::Smooth,
            &t,
            GradedClass::zero(&t),
            ns,
            -5,
            GradedClass::one(&t),
            None,
        )
        .unwrap();
        assert!(grr_crosscheck(&sc).unwrap().equal);
    }

    #[test]
    fn grr_crosscheck_guards() {
        assert!(matches!(
            grr_crosscheck(&point_scenario(1)),
            Err(Error::RankBound { m: 1 })
        ));
        assert!(matches!(
            grr_crosscheck(&point_scenario(-1)),
            Err(Error::RankBound { m: -1 })
        ));
    }

    #[test]
    fn dimension_formulas_on_the_plane() {
        for d in 1..=10i64 {
            let data = DimensionData::from_surface(&SurfaceData::cp2(), &[rat(d)], 2, 0).unwrap();
            let gt = sw_dimension(DimensionKind::GromovTaubes, &data).unwrap();
            assert_eq!(gt, rat((d * d + 3 * d) / 2));
            let sc = sw_dimension(DimensionKind::SpinC, &data).unwrap();
            assert_eq!(sc, rat(d * d + 3 * d));
            let fam = sw_dimension(DimensionKind::Family, &data).unwrap();
            assert_eq!(fam, rat(d * d + 3 * d + 2));
            let alg = sw_dimension(DimensionKind::AlgebraicFamily, &data).unwrap();
            assert_eq!(alg, rat((d * d + 3 * d) / 2 + 2));
        }
    }

    #[test]
    fn fbd_must_stay_within_hodge_bound() {
        let mut data =
            DimensionData::from_surface(&SurfaceData::k3(rat(2)), &[rat(1)], 0, 2).unwrap();
        assert!(matches!(
            sw_dimension(DimensionKind::AlgebraicFamily, &data),
            Err(Error::RangeError { .. })
        ));
        data.fbd = 1;
        assert!(sw_dimension(DimensionKind::AlgebraicFamily, &data).is_ok());
    }

    #[test]
    fn dimension_drop_is_quarter_square() {
        for m in (-15..=15i64).filter(|m| m % 2 != 0) {
            assert_eq!(family_dimension_drop(m).unwrap(), -(m * m - 1) / 4);
        }
        assert!(matches!(
            family_dimension_drop(2),
            Err(Error::EvenM { m: 2 })
        ));
    }

    #[test]
    fn existence_budget_on_the_quartic() {
        let data = DimensionData::from_surface(&SurfaceData::cp2(), &[rat(4)], 0, 0).unwrap();
        let rep = existence_check(&data, &[2, 2, 2]).unwrap();
        assert!(rep.satisfied);
        assert_eq!(rep.slack, rat(11));
        let rep = existence_check(&data, &[5, 4]).unwrap();
        assert!(!rep.satisfied);
        assert_eq!(rep.slack, rat(14 - 10 - 6));
        assert!(matches!(
            existence_check(&data, &[0]),
            Err(Error::BadMultiplicity { .. })
        ));
    }
}
