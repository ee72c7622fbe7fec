//! Graded-commutative cohomology models with exact rational coefficients.
//!
//! A [`SpaceModel`] is a finite presentation: generators with cohomological
//! degrees and parities, degree-preserving rewriting rules whose left-hand
//! sides are single monomials, and an integration table against the
//! fundamental class. Construction normalizes every monomial up to the top
//! degree, so termination and confluence of the rules are checked once and
//! all later arithmetic can rely on them.
//!
//! Degrees are cohomological throughout: a divisor class on a surface has
//! degree 2, the point class degree 4. Monomials above `2 * complex_dim`
//! are dropped eagerly during multiplication.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::error::Error;
use crate::rational::Rat;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Clone, Debug)]
pub struct Generator {
    pub name: String,
    pub degree: u32,
    pub parity: Parity,
}

/// Monomial in normal-ordered form: factor list sorted by generator index,
/// exponents positive. The empty list is the unit.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial {
    factors: Vec<(u32, u32)>,
}

impl Monomial {
    pub fn unit() -> Self {
        Monomial::default()
    }

    pub fn is_unit(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn factors(&self) -> &[(u32, u32)] {
        &self.factors
    }

    pub fn exponent_of(&self, gen: u32) -> u32 {
        self.factors
            .iter()
            .find(|(g, _)| *g == gen)
            .map(|(_, e)| *e)
            .unwrap_or(0)
    }

    fn from_sorted(factors: Vec<(u32, u32)>) -> Self {
        debug_assert!(factors.windows(2).all(|w| w[0].0 < w[1].0));
        debug_assert!(factors.iter().all(|&(_, e)| e > 0));
        Monomial { factors }
    }

    /// Builds a monomial from arbitrary (generator, exponent) pairs,
    /// merging repeats and dropping zero exponents. Carries no sign
    /// bookkeeping: intended for even generators or already-ordered data.
    pub fn from_factors(factors: &[(u32, u32)]) -> Self {
        let mut merged: Vec<(u32, u32)> = Vec::with_capacity(factors.len());
        let mut sorted = factors.to_vec();
        sorted.sort_by_key(|&(g, _)| g);
        for (g, e) in sorted {
            if e == 0 {
                continue;
            }
            match merged.last_mut() {
                Some((lg, le)) if *lg == g => *le += e,
                _ => merged.push((g, e)),
            }
        }
        Monomial::from_sorted(merged)
    }

    /// Strips the `gen` factor entirely, returning its exponent and the rest.
    pub fn without(&self, gen: u32) -> (u32, Monomial) {
        let mut exp = 0;
        let mut rest = Vec::with_capacity(self.factors.len());
        for &(g, e) in &self.factors {
            if g == gen {
                exp = e;
            } else {
                rest.push((g, e));
            }
        }
        (exp, Monomial::from_sorted(rest))
    }
}

#[derive(Clone, Debug)]
pub struct Rule {
    lhs: Monomial,
    rhs: Vec<(Monomial, Rat)>,
}

impl Rule {
    pub fn lhs(&self) -> &Monomial {
        &self.lhs
    }

    pub fn rhs(&self) -> &[(Monomial, Rat)] {
        &self.rhs
    }
}

/// Immutable space presentation. Constructed through [`SpaceBuilder`];
/// shared by reference-counted handle ([`Space`]) so classes can carry
/// their ambient space cheaply.
pub struct SpaceModel {
    id: u64,
    name: String,
    generators: Vec<Generator>,
    rules: Vec<Rule>,
    complex_dim: u32,
    integrals: BTreeMap<Monomial, Rat>,
}

pub type Space = Arc<SpaceModel>;

static NEXT_SPACE_ID: AtomicU64 = AtomicU64::new(1);

const REWRITE_STEP_LIMIT: usize = 200_000;

impl SpaceModel {
    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn complex_dim(&self) -> u32 {
        self.complex_dim
    }

    /// Top cohomological degree, `2 * complex_dim`.
    pub fn top_degree(&self) -> u32 {
        2 * self.complex_dim
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn integrals(&self) -> &BTreeMap<Monomial, Rat> {
        &self.integrals
    }

    pub fn gen_index(&self, name: &str) -> Option<u32> {
        self.generators
            .iter()
            .position(|g| g.name == name)
            .map(|i| i as u32)
    }

    pub fn degree_of(&self, m: &Monomial) -> u32 {
        m.factors
            .iter()
            .map(|&(g, e)| self.generators[g as usize].degree * e)
            .sum()
    }

    fn is_odd(&self, gen: u32) -> bool {
        self.generators[gen as usize].parity == Parity::Odd
    }

    /// Koszul sign of writing `a * b` in normal order, together with the
    /// merged monomial. `None` when an odd generator occurs in both (its
    /// square vanishes) or the degree exceeds the truncation bound.
    pub fn mul_monomials(&self, a: &Monomial, b: &Monomial) -> Option<(Monomial, i32)> {
        let mut inversions = 0u64;
        for &(ga, _) in &a.factors {
            if !self.is_odd(ga) {
                continue;
            }
            for &(gb, _) in &b.factors {
                if self.is_odd(gb) {
                    if ga == gb {
                        return None;
                    }
                    if ga > gb {
                        inversions += 1;
                    }
                }
            }
        }
        let mut merged = Vec::with_capacity(a.factors.len() + b.factors.len());
        let (mut i, mut j) = (0, 0);
        while i < a.factors.len() || j < b.factors.len() {
            let take_a = match (a.factors.get(i), b.factors.get(j)) {
                (Some(&(ga, _)), Some(&(gb, _))) => {
                    if ga == gb {
                        merged.push((ga, a.factors[i].1 + b.factors[j].1));
                        i += 1;
                        j += 1;
                        continue;
                    }
                    ga < gb
                }
                (Some(_), None) => true,
                (None, Some(_)) => false,
                (None, None) => unreachable!(),
            };
            if take_a {
                merged.push(a.factors[i]);
                i += 1;
            } else {
                merged.push(b.factors[j]);
                j += 1;
            }
        }
        let m = Monomial::from_sorted(merged);
        if self.degree_of(&m) > self.top_degree() {
            return None;
        }
        Some((m, if inversions.is_multiple_of(2) { 1 } else { -1 }))
    }

    /// Splits `m = sign * (lhs * rest)` when `lhs` divides `m`.
    fn divide(&self, m: &Monomial, lhs: &Monomial) -> Option<(Monomial, i32)> {
        let mut rest = Vec::with_capacity(m.factors.len());
        let mut j = 0;
        for &(g, e) in &m.factors {
            let mut keep = e;
            if j < lhs.factors.len() && lhs.factors[j].0 < g {
                return None; // lhs needs a generator m lacks
            }
            if j < lhs.factors.len() && lhs.factors[j].0 == g {
                let need = lhs.factors[j].1;
                if need > e {
                    return None;
                }
                keep = e - need;
                j += 1;
            }
            if keep > 0 {
                rest.push((g, keep));
            }
        }
        if j < lhs.factors.len() {
            return None;
        }
        let rest = Monomial::from_sorted(rest);
        // m equals lhs * rest up to the Koszul sign of that very product.
        let (_, sign) = self.mul_monomials(lhs, &rest)?;
        Some((rest, sign))
    }

    fn first_applicable_rule(&self, m: &Monomial) -> Option<(usize, Monomial, i32)> {
        for (ri, rule) in self.rules.iter().enumerate() {
            if let Some((rest, sign)) = self.divide(m, &rule.lhs) {
                return Some((ri, rest, sign));
            }
        }
        None
    }

    /// Fully normalizes `coeff * m`, accumulating into `out`. Bounded by a
    /// step counter so that a looping rule set is reported instead of
    /// hanging; models that passed construction never hit the bound.
    fn normalize_into(
        &self,
        m: Monomial,
        coeff: Rat,
        out: &mut BTreeMap<Monomial, Rat>,
    ) -> Result<(), Error> {
        let mut work = vec![(m, coeff)];
        let mut steps = 0usize;
        while let Some((mono, c)) = work.pop() {
            if c.is_zero() {
                continue;
            }
            steps += 1;
            if steps > REWRITE_STEP_LIMIT {
                return Err(Error::NonConfluent {
                    context: format!(
                        "normalization exceeded {REWRITE_STEP_LIMIT} steps in space {:?}",
                        self.name
                    ),
                });
            }
            match self.first_applicable_rule(&mono) {
                None => {
                    let entry = out.entry(mono).or_insert_with(Rat::zero);
                    *entry += c;
                }
                Some((ri, rest, split_sign)) => {
                    let rule = &self.rules[ri];
                    for (rm, rc) in &rule.rhs {
                        if let Some((merged, s)) = self.mul_monomials(rm, &rest) {
                            let sign = Rat::from_int((split_sign * s) as i64);
                            work.push((merged, &c * rc * sign));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn normalize_monomial(&self, m: Monomial, coeff: Rat) -> BTreeMap<Monomial, Rat> {
        let mut out = BTreeMap::new();
        self.normalize_into(m, coeff, &mut out)
            .expect("model validated at construction");
        out.retain(|_, v| !v.is_zero());
        out
    }

    /// Enumerates every monomial (normal or not) of degree at most
    /// `2 * complex_dim`. Feasible because truncation bounds the set.
    fn all_monomials(&self) -> Vec<Monomial> {
        let mut acc = vec![Vec::new()];
        for (gi, g) in self.generators.iter().enumerate() {
            let max_exp = match g.parity {
                Parity::Odd => 1,
                Parity::Even => self.top_degree() / g.degree,
            };
            let mut next = Vec::new();
            for stem in &acc {
                let used: u32 = stem
                    .iter()
                    .map(|&(gj, e): &(u32, u32)| self.generators[gj as usize].degree * e)
                    .sum();
                next.push(stem.clone());
                for e in 1..=max_exp {
                    if used + g.degree * e > self.top_degree() {
                        break;
                    }
                    let mut m = stem.clone();
                    m.push((gi as u32, e));
                    next.push(m);
                }
            }
            acc = next;
        }
        acc.into_iter().map(Monomial::from_sorted).collect()
    }

    /// Normal-form monomials of degree at most the top degree, sorted.
    pub fn normal_basis(&self) -> Vec<Monomial> {
        let mut basis: Vec<Monomial> = self
            .all_monomials()
            .into_iter()
            .filter(|m| self.first_applicable_rule(m).is_none())
            .collect();
        basis.sort();
        basis
    }

    /// Count of normal-form monomials in each cohomological degree
    /// `0..=top`. For an exterior algebra these are binomial coefficients.
    pub fn normal_count_by_degree(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.top_degree() as usize + 1];
        for m in self.normal_basis() {
            counts[self.degree_of(&m) as usize] += 1;
        }
        counts
    }

    pub fn format_monomial(&self, m: &Monomial) -> String {
        if m.is_unit() {
            return "1".into();
        }
        m.factors
            .iter()
            .map(|&(g, e)| {
                let name = &self.generators[g as usize].name;
                if e == 1 {
                    name.clone()
                } else {
                    format!("{name}^{e}")
                }
            })
            .collect::<Vec<_>>()
            .join("*")
    }

    fn validate(&self) -> Result<(), Error> {
        // generator sanity
        for (i, g) in self.generators.iter().enumerate() {
            if g.degree == 0 {
                return Err(Error::invalid(format!(
                    "generator {:?} has degree 0; degree must be positive",
                    g.name
                )));
            }
            let expected = if g.degree % 2 == 0 {
                Parity::Even
            } else {
                Parity::Odd
            };
            if g.parity != expected {
                return Err(Error::invalid(format!(
                    "generator {:?} has degree {} but parity {:?}; parity must match degree mod 2",
                    g.name, g.degree, g.parity
                )));
            }
            for other in &self.generators[..i] {
                if other.name == g.name {
                    return Err(Error::DuplicateGenerator {
                        name: g.name.clone(),
                    });
                }
            }
        }
        // rule sanity: single-monomial lhs, degree preserved term by term
        for rule in &self.rules {
            if rule.lhs.is_unit() {
                return Err(Error::invalid("rule left-hand side must not be the unit"));
            }
            self.check_monomial(&rule.lhs)?;
            let d = self.degree_of(&rule.lhs);
            for (rm, _) in &rule.rhs {
                self.check_monomial(rm)?;
                if self.degree_of(rm) != d {
                    return Err(Error::DegreeMismatch {
                        context: format!(
                            "rule {} -> ... must preserve degree: lhs degree {}, rhs term {} has degree {}",
                            self.format_monomial(&rule.lhs),
                            d,
                            self.format_monomial(rm),
                            self.degree_of(rm)
                        ),
                    });
                }
            }
        }
        // integration table keys: top degree, in normal form
        for m in self.integrals.keys() {
            self.check_monomial(m)?;
            if self.degree_of(m) != self.top_degree() {
                return Err(Error::DegreeMismatch {
                    context: format!(
                        "integral entry {} has degree {}, expected top degree {}",
                        self.format_monomial(m),
                        self.degree_of(m),
                        self.top_degree()
                    ),
                });
            }
            if self.first_applicable_rule(m).is_some() {
                return Err(Error::invalid(format!(
                    "integral entry {} is not in normal form",
                    self.format_monomial(m)
                )));
            }
        }
        // termination + local confluence on the full truncated monomial set;
        // Newman's lemma then gives global confluence.
        let mut scratch = BTreeMap::new();
        for m in self.all_monomials() {
            scratch.clear();
            self.normalize_into(m.clone(), Rat::one(), &mut scratch)?;
            scratch.retain(|_, v| !v.is_zero());
            let reference = scratch.clone();
            for rule in &self.rules {
                if let Some((rest, split_sign)) = self.divide(&m, &rule.lhs) {
                    let mut via = BTreeMap::new();
                    for (rm, rc) in &rule.rhs {
                        if let Some((merged, s)) = self.mul_monomials(rm, &rest) {
                            self.normalize_into(
                                merged,
                                rc * &Rat::from_int((split_sign * s) as i64),
                                &mut via,
                            )?;
                        }
                    }
                    via.retain(|_, v| !v.is_zero());
                    if via != reference {
                        return Err(Error::NonConfluent {
                            context: format!(
                                "monomial {} reduces differently through rule {} -> ...",
                                self.format_monomial(&m),
                                self.format_monomial(&rule.lhs)
                            ),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    fn check_monomial(&self, m: &Monomial) -> Result<(), Error> {
        for &(g, e) in &m.factors {
            if g as usize >= self.generators.len() {
                return Err(Error::invalid("monomial references unknown generator"));
            }
            if e >= 2 && self.is_odd(g) {
                return Err(Error::invalid(format!(
                    "odd generator {:?} cannot carry exponent {e}",
                    self.generators[g as usize].name
                )));
            }
        }
        Ok(())
    }
}

impl PartialEq for SpaceModel {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}

impl fmt::Debug for SpaceModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SpaceModel({:?}, dim {})", self.name, self.complex_dim)
    }
}

/// Incremental construction of a [`SpaceModel`]; `build` runs the full
/// validation pass (degrees, duplicate names, termination, confluence).
pub struct SpaceBuilder {
    name: String,
    complex_dim: u32,
    generators: Vec<Generator>,
    #[allow(clippy::type_complexity)]
    rules: Vec<(Vec<(String, u32)>, Vec<(Vec<(String, u32)>, Rat)>)>,
    integrals: Vec<(Vec<(String, u32)>, Rat)>,
}

impl SpaceBuilder {
    pub fn new(name: impl Into<String>, complex_dim: u32) -> Self {
        SpaceBuilder {
            name: name.into(),
            complex_dim,
            generators: Vec::new(),
            rules: Vec::new(),
            integrals: Vec::new(),
        }
    }

    pub fn generator(mut self, name: impl Into<String>, degree: u32, parity: Parity) -> Self {
        self.generators.push(Generator {
            name: name.into(),
            degree,
            parity,
        });
        self
    }

    /// `lhs` and the rhs monomials are `(generator name, exponent)` lists.
    pub fn rule(mut self, lhs: &[(&str, u32)], rhs: &[(&[(&str, u32)], Rat)]) -> Self {
        let conv = |xs: &[(&str, u32)]| {
            xs.iter()
                .map(|(n, e)| (n.to_string(), *e))
                .collect::<Vec<_>>()
        };
        self.rules.push((
            conv(lhs),
            rhs.iter().map(|(m, c)| (conv(m), c.clone())).collect(),
        ));
        self
    }

    pub fn rule_to_zero(self, lhs: &[(&str, u32)]) -> Self {
        self.rule(lhs, &[])
    }

    pub fn integral(mut self, monomial: &[(&str, u32)], value: Rat) -> Self {
        self.integrals.push((
            monomial.iter().map(|(n, e)| (n.to_string(), *e)).collect(),
            value,
        ));
        self
    }

    pub fn build(self) -> Result<Space, Error> {
        let generators = self.generators;
        let resolve = |xs: &[(String, u32)]| -> Result<Monomial, Error> {
            let mut factors: Vec<(u32, u32)> = Vec::new();
            for (name, exp) in xs {
                if *exp == 0 {
                    continue;
                }
                let idx = generators
                    .iter()
                    .position(|g| &g.name == name)
                    .ok_or_else(|| Error::UnknownName { name: name.clone() })?
                    as u32;
                match factors.iter_mut().find(|(g, _)| *g == idx) {
                    Some((_, e)) => *e += exp,
                    None => factors.push((idx, *exp)),
                }
            }
            factors.sort_by_key(|&(g, _)| g);
            Ok(Monomial::from_sorted(factors))
        };
        let mut rules = Vec::new();
        for (lhs, rhs) in &self.rules {
            let lhs = resolve(lhs)?;
            let mut terms = Vec::new();
            for (m, c) in rhs {
                if !c.is_zero() {
                    terms.push((resolve(m)?, c.clone()));
                }
            }
            rules.push(Rule { lhs, rhs: terms });
        }
        let mut integrals = BTreeMap::new();
        for (m, v) in &self.integrals {
            integrals.insert(resolve(m)?, v.clone());
        }
        let model = SpaceModel {
            id: NEXT_SPACE_ID.fetch_add(1, Ordering::Relaxed),
            name: self.name,
            generators,
            rules,
            complex_dim: self.complex_dim,
            integrals,
        };
        model.validate()?;
        Ok(Arc::new(model))
    }
}

/// Finite sum of normal-form monomials with rational coefficients, tied to
/// its ambient space. All arithmetic renormalizes and truncates eagerly.
#[derive(Clone)]
pub struct GradedClass {
    space: Space,
    terms: BTreeMap<Monomial, Rat>,
}

impl GradedClass {
    pub fn zero(space: &Space) -> Self {
        GradedClass {
            space: space.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn one(space: &Space) -> Self {
        GradedClass::constant(space, Rat::one())
    }

    pub fn constant(space: &Space, c: Rat) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial::unit(), c);
        }
        GradedClass {
            space: space.clone(),
            terms,
        }
    }

    pub fn generator(space: &Space, name: &str) -> Result<Self, Error> {
        let idx = space
            .gen_index(name)
            .ok_or_else(|| Error::UnknownName { name: name.into() })?;
        Ok(GradedClass::from_raw_terms(
            space,
            vec![(Monomial::from_sorted(vec![(idx, 1)]), Rat::one())],
        ))
    }

    /// Builds a class from arbitrary (not necessarily normal) monomials.
    pub fn from_raw_terms(space: &Space, raw: Vec<(Monomial, Rat)>) -> Self {
        let mut terms = BTreeMap::new();
        for (m, c) in raw {
            if c.is_zero() || space.degree_of(&m) > space.top_degree() {
                continue;
            }
            for (nm, nc) in space.normalize_monomial(m, c) {
                let e = terms.entry(nm).or_insert_with(Rat::zero);
                *e += nc;
            }
        }
        terms.retain(|_, v| !v.is_zero());
        GradedClass {
            space: space.clone(),
            terms,
        }
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rat)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rat {
        self.terms.get(m).cloned().unwrap_or_else(Rat::zero)
    }

    /// Degree-0 coefficient (the scalar part).
    pub fn scalar_part(&self) -> Rat {
        self.coefficient(&Monomial::unit())
    }

    fn check_ambient(&self, other: &Self) -> Result<(), Error> {
        if self.space.id() != other.space.id() {
            return Err(Error::AmbientMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, Error> {
        self.check_ambient(other)?;
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            let e = terms.entry(m.clone()).or_insert_with(Rat::zero);
            *e += c.clone();
        }
        terms.retain(|_, v| !v.is_zero());
        Ok(GradedClass {
            space: self.space.clone(),
            terms,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, Error> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&Rat::from_int(-1))
    }

    pub fn scale(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return GradedClass::zero(&self.space);
        }
        GradedClass {
            space: self.space.clone(),
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self, Error> {
        self.check_ambient(other)?;
        let mut terms: BTreeMap<Monomial, Rat> = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let Some((merged, sign)) = self.space.mul_monomials(ma, mb) else {
                    continue;
                };
                let coeff = ca * cb * Rat::from_int(sign as i64);
                for (nm, nc) in self.space.normalize_monomial(merged, coeff) {
                    let e = terms.entry(nm).or_insert_with(Rat::zero);
                    *e += nc;
                }
            }
        }
        terms.retain(|_, v| !v.is_zero());
        Ok(GradedClass {
            space: self.space.clone(),
            terms,
        })
    }

    pub fn pow(&self, e: u32) -> Result<Self, Error> {
        let mut acc = GradedClass::one(&self.space);
        for _ in 0..e {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Homogeneous part of cohomological degree `d`.
    pub fn degree_part(&self, d: u32) -> Self {
        GradedClass {
            space: self.space.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| self.space.degree_of(m) == d)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Largest degree carrying a nonzero term.
    pub fn max_degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| self.space.degree_of(m)).max()
    }

    /// True when every term has degree `d` (vacuously true for zero).
    pub fn is_homogeneous(&self, d: u32) -> bool {
        self.terms.keys().all(|m| self.space.degree_of(m) == d)
    }

    /// Multiplicative inverse of a class with nonzero scalar part, by the
    /// geometric series on its positive-degree tail (nilpotent, so the
    /// series is finite after truncation).
    pub fn invert_unit(&self) -> Result<Self, Error> {
        let s = self.scalar_part();
        if s.is_zero() {
            return Err(Error::invalid(
                "cannot invert a class with zero scalar part",
            ));
        }
        let tail = self
            .sub(&GradedClass::constant(&self.space, s.clone()))
            .expect("same ambient")
            .scale(&(Rat::one() / s.clone()));
        let mut acc = GradedClass::one(&self.space);
        let mut pw = GradedClass::one(&self.space);
        loop {
            pw = pw.mul(&tail)?.neg();
            if pw.is_zero() {
                break;
            }
            acc = acc.add(&pw)?;
        }
        Ok(acc.scale(&(Rat::one() / s)))
    }

    /// `u^n` for any integer `n`; negative powers go through
    /// [`GradedClass::invert_unit`].
    pub fn unit_power(&self, n: i64) -> Result<Self, Error> {
        if n >= 0 {
            self.pow(n as u32)
        } else {
            self.invert_unit()?.pow((-n) as u32)
        }
    }

    /// Pairing against the fundamental class: top-degree terms are looked
    /// up in the integration table (absent entries integrate to zero);
    /// lower-degree terms contribute nothing.
    pub fn integrate(&self) -> Rat {
        let top = self.space.top_degree();
        let mut acc = Rat::zero();
        for (m, c) in &self.terms {
            if self.space.degree_of(m) == top {
                if let Some(v) = self.space.integrals().get(m) {
                    acc += c * v;
                }
            }
        }
        acc
    }
}

impl PartialEq for GradedClass {
    fn eq(&self, other: &Self) -> bool {
        self.space.id() == other.space.id() && self.terms == other.terms
    }
}

impl fmt::Display for GradedClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            let mono = self.space.format_monomial(m);
            let (sign, mag) = if c.is_negative() {
                ("-", -c)
            } else {
                ("+", c.clone())
            };
            if first {
                if sign == "-" {
                    write!(f, "-")?;
                }
                first = false;
            } else {
                write!(f, " {sign} ")?;
            }
            if m.is_unit() {
                write!(f, "{mag}")?;
            } else if mag == Rat::one() {
                write!(f, "{mono}")?;
            } else {
                write!(f, "{mag}*{mono}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for GradedClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64) -> Rat {
        Rat::from_int(n)
    }

    pub fn cp2_plain() -> Space {
        SpaceBuilder::new("cp2", 2)
            .generator("h", 2, Parity::Even)
            .rule_to_zero(&[("h", 3)])
            .integral(&[("h", 2)], Rat::one())
            .build()
            .unwrap()
    }

    fn exterior(q: u32) -> Space {
        let names: Vec<String> = (1..=2 * q).map(|i| format!("t{i}")).collect();
        let mut b = SpaceBuilder::new(format!("torus{q}"), q);
        for n in &names {
            b = b.generator(n, 1, Parity::Odd);
        }
        let top: Vec<(&str, u32)> = names.iter().map(|n| (n.as_str(), 1)).collect();
        b.integral(&top, Rat::one()).build().unwrap()
    }

    #[test]
    fn cp2_products_truncate() {
        let s = cp2_plain();
        let h = GradedClass::generator(&s, "h").unwrap();
        let h2 = h.mul(&h).unwrap();
        assert_eq!(h2.integrate(), rat(1));
        let h3 = h2.mul(&h).unwrap();
        assert!(h3.is_zero());
    }

    #[test]
    fn koszul_sign_on_odd_generators() {
        let s = exterior(1);
        let t1 = GradedClass::generator(&s, "t1").unwrap();
        let t2 = GradedClass::generator(&s, "t2").unwrap();
        let a = t1.mul(&t2).unwrap();
        let b = t2.mul(&t1).unwrap();
        assert!(a.add(&b).unwrap().is_zero()); // t1 t2 = -t2 t1
        assert!(t1.mul(&t1).unwrap().is_zero());
        assert_eq!(a.integrate(), rat(1));
        assert_eq!(b.integrate(), rat(-1));
    }

    #[test]
    fn exterior_betti_counts_match_binomials() {
        let s = exterior(2);
        assert_eq!(s.normal_count_by_degree(), vec![1, 4, 6, 4, 1]);
    }

    #[test]
    fn degree_mismatch_rule_rejected() {
        let err = SpaceBuilder::new("bad", 2)
            .generator("h", 2, Parity::Even)
            .rule(&[("h", 3)], &[(&[("h", 1)], Rat::one())])
            .build()
            .unwrap_err();
        assert!(matches!(err, Error::DegreeMismatch { .. }));
    }

    #[test]
    fn duplicate_generator_rejected() {
        let err = SpaceBuilder::new("bad", 1)
            .generator("x", 2, Parity::Even)
            .generator("x", 2, Parity::Even)
            .build()
            .unwrap_err();
        assert!(matches!(err, Error::DuplicateGenerator { .. }));
    }

    #[test]
    fn parity_must_match_degree() {
        let err = SpaceBuilder::new("bad", 1)
            .generator("x", 2, Parity::Odd)
            .build()
            .unwrap_err();
        assert!(matches!(err, Error::InvalidInput { .. }));
    }

    #[test]
    fn non_confluent_rules_rejected() {
        // x*y rewrites two ways that disagree
        let err = SpaceBuilder::new("bad", 2)
            .generator("x", 2, Parity::Even)
            .generator("y", 2, Parity::Even)
            .generator("p", 4, Parity::Even)
            .rule(&[("x", 1), ("y", 1)], &[(&[("p", 1)], Rat::one())])
            .rule(&[("y", 1)], &[(&[("x", 1)], Rat::one())])
            .rule(&[("x", 2)], &[])
            .build()
            .unwrap_err();
        assert!(matches!(err, Error::NonConfluent { .. }));
    }

    #[test]
    fn looping_rules_rejected() {
        let err = SpaceBuilder::new("bad", 2)
            .generator("x", 2, Parity::Even)
            .generator("y", 2, Parity::Even)
            .rule(&[("x", 1)], &[(&[("y", 1)], Rat::one())])
            .rule(&[("y", 1)], &[(&[("x", 1)], Rat::one())])
            .build()
            .unwrap_err();
        assert!(matches!(err, Error::NonConfluent { .. }));
    }

    #[test]
    fn ambient_mismatch_detected() {
        let a = cp2_plain();
        let b = cp2_plain();
        let ha = GradedClass::generator(&a, "h").unwrap();
        let hb = GradedClass::generator(&b, "h").unwrap();
        assert!(matches!(ha.add(&hb), Err(Error::AmbientMismatch)));
        assert!(matches!(ha.mul(&hb), Err(Error::AmbientMismatch)));
    }

    #[test]
    fn integrate_ignores_lower_degrees() {
        let s = cp2_plain();
        let h = GradedClass::generator(&s, "h").unwrap();
        let mixed = GradedClass::one(&s)
            .add(&h)
            .unwrap()
            .add(&h.mul(&h).unwrap().scale(&rat(5)))
            .unwrap();
        assert_eq!(mixed.integrate(), rat(5));
        assert_eq!(h.integrate(), rat(0));
    }

    #[test]
    fn degree_part_splits() {
        let s = cp2_plain();
        let h = GradedClass::generator(&s, "h").unwrap();
        let a = GradedClass::one(&s).add(&h.scale(&rat(3))).unwrap();
        assert_eq!(a.degree_part(0).scalar_part(), rat(1));
        assert_eq!(
            a.degree_part(2)
                .coefficient(&h.terms.keys().next().unwrap().clone()),
            rat(3)
        );
        assert!(a.degree_part(4).is_zero());
        assert!(!a.is_homogeneous(0));
    }

    #[test]
    fn surface_style_rules_are_confluent() {
        // two divisor classes with an off-diagonal intersection form
        let s = SpaceBuilder::new("two-gen", 2)
            .generator("x", 2, Parity::Even)
            .generator("y", 2, Parity::Even)
            .generator("pt", 4, Parity::Even)
            .rule(&[("x", 2)], &[])
            .rule(&[("x", 1), ("y", 1)], &[(&[("pt", 1)], Rat::one())])
            .rule(&[("y", 2)], &[])
            .rule_to_zero(&[("pt", 1), ("x", 1)])
            .rule_to_zero(&[("pt", 1), ("y", 1)])
            .rule_to_zero(&[("pt", 2)])
            .integral(&[("pt", 1)], Rat::one())
            .build()
            .unwrap();
        let x = GradedClass::generator(&s, "x").unwrap();
        let y = GradedClass::generator(&s, "y").unwrap();
        assert_eq!(x.mul(&y).unwrap().integrate(), rat(1));
        assert_eq!(x.add(&y).unwrap().pow(2).unwrap().integrate(), rat(2));
    }
}
