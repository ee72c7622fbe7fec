//! Wire formats: JSON descriptions of spaces, bundles, and blowup
//! scenarios, batch job records with sweep ranges, and the conversions
//! between those descriptions and the engine types.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::blowup::{FamilyBlowupScenario, Variant};
use crate::bundles::BundleClass;
use crate::error::Error;
use crate::expr::parse_expression;
use crate::rational::Rat;
use crate::ring::{GradedClass, Parity, Space, SpaceBuilder};
use crate::surfaces::{point_model, surface_model, torus_model, SurfaceData};

/// One ring generator as it appears on the wire.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorDto {
    pub name: String,
    pub degree: u32,
    pub parity: Parity,
}

/// One rewriting rule: a monomial string and a linear-combination string
/// ("0" for a vanishing product).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleDto {
    pub lhs: String,
    pub rhs: String,
}

/// A presented ring: generators, rules, complex dimension, and the
/// integration table keyed by monomial strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceDto {
    pub generators: Vec<GeneratorDto>,
    #[serde(default)]
    pub rules: Vec<RuleDto>,
    pub dim: u32,
    #[serde(default)]
    pub integrals: BTreeMap<String, Rat>,
}

/// Renders a class as an expression string that `parse_expression`
/// accepts back: terms in normal-monomial order, rational coefficients.
pub fn class_string(c: &GradedClass) -> String {
    if c.is_zero() {
        return "0".into();
    }
    let space = c.space();
    let mut out = String::new();
    for (m, coeff) in c.terms() {
        let mag = coeff.abs();
        let piece = if m.is_unit() {
            mag.to_string()
        } else if mag == Rat::one() {
            space.format_monomial(m)
        } else {
            format!("{mag}*{}", space.format_monomial(m))
        };
        if out.is_empty() {
            if coeff.is_negative() {
                out.push('-');
            }
        } else {
            out.push_str(if coeff.is_negative() { " - " } else { " + " });
        }
        out.push_str(&piece);
    }
    out
}

fn monic_monomial(src: &str, space: &Space, what: &str) -> Result<Vec<(String, u32)>, Error> {
    let class = parse_expression(src, space, &BTreeMap::new())?;
    let terms: Vec<_> = class.terms().collect();
    if terms.len() != 1 || *terms[0].1 != Rat::one() {
        return Err(Error::invalid(format!(
            "{what} {src:?} must be a single monic monomial"
        )));
    }
    Ok(terms[0]
        .0
        .factors()
        .iter()
        .map(|&(g, e)| (space.generators()[g as usize].name.clone(), e))
        .collect())
}

/// Builds a space from its wire description. Rule and integral strings
/// are parsed against a rule-free shell with the same generators, so
/// they may use any expression syntax that normalizes to monomials. The
/// shell's degree cap is generously inflated: rule monomials may exceed
/// the space's top degree (that is how vanishing products are written),
/// up to 128 above it.
pub fn build_space(name: &str, dto: &SpaceDto) -> Result<Space, Error> {
    let mut shell = SpaceBuilder::new(name, dto.dim + 64);
    for g in &dto.generators {
        shell = shell.generator(&g.name, g.degree, g.parity);
    }
    let shell = shell.build()?;

    struct ParsedRule {
        lhs: Vec<(String, u32)>,
        rhs: Vec<(Vec<(String, u32)>, Rat)>,
    }
    let mut rules = Vec::with_capacity(dto.rules.len());
    for r in &dto.rules {
        let lhs = monic_monomial(&r.lhs, &shell, "rule left-hand side")?;
        let rhs_class = parse_expression(&r.rhs, &shell, &BTreeMap::new())?;
        let rhs = rhs_class
            .terms()
            .map(|(m, c)| {
                let pairs = m
                    .factors()
                    .iter()
                    .map(|&(g, e)| (shell.generators()[g as usize].name.clone(), e))
                    .collect();
                (pairs, c.clone())
            })
            .collect();
        rules.push(ParsedRule { lhs, rhs });
    }
    let mut table = Vec::with_capacity(dto.integrals.len());
    for (mono, value) in &dto.integrals {
        table.push((
            monic_monomial(mono, &shell, "integral monomial")?,
            value.clone(),
        ));
    }

    let mut b = SpaceBuilder::new(name, dto.dim);
    for g in &dto.generators {
        b = b.generator(&g.name, g.degree, g.parity);
    }
    for pr in &rules {
        let lhs: Vec<(&str, u32)> = pr.lhs.iter().map(|(n, e)| (n.as_str(), *e)).collect();
        let rhs_pairs: Vec<(Vec<(&str, u32)>, Rat)> = pr
            .rhs
            .iter()
            .map(|(m, c)| (m.iter().map(|(n, e)| (n.as_str(), *e)).collect(), c.clone()))
            .collect();
        let rhs: Vec<(&[(&str, u32)], Rat)> = rhs_pairs
            .iter()
            .map(|(v, c)| (v.as_slice(), c.clone()))
            .collect();
        b = b.rule(&lhs, &rhs);
    }
    for (pairs, value) in &table {
        let mono: Vec<(&str, u32)> = pairs.iter().map(|(n, e)| (n.as_str(), *e)).collect();
        b = b.integral(&mono, value.clone());
    }
    b.build()
}

/// Inverse of [`build_space`]: the wire description of a space.
pub fn space_dto(space: &Space) -> SpaceDto {
    SpaceDto {
        generators: space
            .generators()
            .iter()
            .map(|g| GeneratorDto {
                name: g.name.clone(),
                degree: g.degree,
                parity: g.parity,
            })
            .collect(),
        rules: space
            .rules()
            .iter()
            .map(|r| {
                let rhs_class = GradedClass::from_raw_terms(space, r.rhs().to_vec());
                RuleDto {
                    lhs: space.format_monomial(r.lhs()),
                    rhs: class_string(&rhs_class),
                }
            })
            .collect(),
        dim: space.complex_dim(),
        integrals: space
            .integrals()
            .iter()
            .map(|(m, v)| (space.format_monomial(m), v.clone()))
            .collect(),
    }
}

/// A bundle on the wire: rank plus Chern classes as expression strings
/// keyed by index (string-encoded, so the type survives inside untagged
/// positions). File-level declarations also name their base space.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BundleDto {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<String>,
    pub rank: i64,
    #[serde(default)]
    pub chern: BTreeMap<String, String>,
}

/// Builds the bundle described by `dto` over `space`, with `params`
/// available to the Chern-class expressions.
pub fn build_bundle(
    dto: &BundleDto,
    space: &Space,
    params: &BTreeMap<String, Rat>,
) -> Result<BundleClass, Error> {
    let mut by_index = BTreeMap::new();
    for (key, src) in &dto.chern {
        let i: u32 = key
            .parse()
            .map_err(|_| Error::invalid(format!("chern key {key:?} is not a class index")))?;
        if i == 0 {
            return Err(Error::invalid("chern indices start at 1"));
        }
        by_index.insert(i, src);
    }
    let max = by_index.keys().copied().max().unwrap_or(0);
    let mut parts = Vec::with_capacity(max as usize);
    for i in 1..=max {
        parts.push(match by_index.get(&i) {
            Some(src) => parse_expression(src, space, params)?,
            None => GradedClass::zero(space),
        });
    }
    BundleClass::from_chern(space, dto.rank, &parts)
}

/// Inverse of [`build_bundle`]: rank and nonzero Chern classes.
pub fn bundle_dto(b: &BundleClass) -> BundleDto {
    let mut chern = BTreeMap::new();
    for i in 1..=b.space().complex_dim() {
        let c = b.chern(i);
        if !c.is_zero() {
            chern.insert(i.to_string(), class_string(&c));
        }
    }
    BundleDto {
        space: None,
        rank: b.rank(),
        chern,
    }
}

///// A bundle position in a scenario: either the name of a declared or
/// shorthand bundle, or an inline description.
///
/// Deserialization dispatches on the JSON shape by hand instead of via
/// an untagged enum, so a mistake inside an inline description surfaces
/// as the inner field error rather than a variant mismatch.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum BundleRef {
    Name(String),
    Inline(BundleDto),
}

impl<'de> Deserialize<'de> for BundleRef {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct RefVisitor;
        impl<'de> serde::de::Visitor<'de> for RefVisitor {
            type Value = BundleRef;

            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a bundle name or an inline bundle description")
            }

            fn visit_str<E: serde::de::Error>(self, s: &str) -> Result<BundleRef, E> {
                Ok(BundleRef::Name(s.to_string()))
            }

            fn visit_map<A: serde::de::MapAccess<'de>>(
                self,
                map: A,
            ) -> Result<BundleRef, A::Error> {
                BundleDto::deserialize(serde::de::value::MapAccessDeserializer::new(map))
                    .map(BundleRef::Inline)
            }
        }
        d.deserialize_any(RefVisitor)
    }
}

/// A blowup scenario on the wire. Expression strings may reference
/// integer parameters supplied at build time.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDto {
    pub variant: Variant,
    pub base: String,
    pub l0: String,
    #[serde(rename = "Ns")]
    pub ns: BundleRef,
    pub m: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub insertion: Option<String>,
    #[serde(rename = "eRestr", default, skip_serializing_if = "Option::is_none")]
    pub e_restr: Option<BundleRef>,
}

/// A named model together with the structural classes that bundle
/// shorthands refer to: its tangent bundle and the degree-2 class `O(a)`
/// multiples are taken of.
#[derive(Clone)]
pub struct ModelEntry {
    pub space: Space,
    pub tangent: BundleClass,
    pub polarization: Option<GradedClass>,
    pub data: Option<SurfaceData>,
}

fn torus_entry(q: u32) -> ModelEntry {
    let space = torus_model(q);
    let mut pol = GradedClass::zero(&space);
    for i in 0..q {
        let a = GradedClass::generator(&space, &format!("t{}", 2 * i + 1)).unwrap();
        let b = GradedClass::generator(&space, &format!("t{}", 2 * i + 2)).unwrap();
        pol = pol.add(&a.mul(&b).unwrap()).unwrap();
    }
    ModelEntry {
        tangent: BundleClass::trivial(&space, q),
        polarization: if q > 0 { Some(pol) } else { None },
        space,
        data: None,
    }
}

fn surface_entry(data: &SurfaceData) -> Result<ModelEntry, Error> {
    let s = surface_model(data)?;
    let pol = GradedClass::generator(&s.space, &data.basis[0])?;
    Ok(ModelEntry {
        space: s.space,
        tangent: s.tangent,
        polarization: Some(pol),
        data: Some(s.data),
    })
}

/// The names [`Catalog::new`] preloads: a point, the projective plane,
/// the K3 model with a square-zero divisor, and one- and two-dimensional
/// torus models.
pub const BUILTIN_MODELS: [&str; 5] = ["point", "cp2", "k3", "torus1", "torus2"];

fn builtin_model(name: &str) -> Result<Option<ModelEntry>, Error> {
    Ok(Some(match name {
        "point" => {
            let space = point_model();
            ModelEntry {
                tangent: BundleClass::trivial(&space, 0),
                polarization: None,
                space,
                data: None,
            }
        }
        "cp2" => surface_entry(&SurfaceData::cp2())?,
        "k3" => surface_entry(&SurfaceData::k3(Rat::zero()))?,
        "torus1" => torus_entry(1),
        "torus2" => torus_entry(2),
        _ => return Ok(None),
    }))
}

/// A named space declaration in a scenario file.
///
/// Deserialized by hand so that errors inside the declaration report
/// the offending field instead of an untagged variant mismatch.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum SpaceDecl {
    Surface { surface: SurfaceData },
    Torus { torus: u32 },
}

impl<'de> Deserialize<'de> for SpaceDecl {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Repr {
            #[serde(default)]
            surface: Option<SurfaceData>,
            #[serde(default)]
            torus: Option<u32>,
        }
        let repr = Repr::deserialize(d)?;
        match (repr.surface, repr.torus) {
            (Some(surface), None) => Ok(SpaceDecl::Surface { surface }),
            (None, Some(torus)) => Ok(SpaceDecl::Torus { torus }),
            _ => Err(serde::de::Error::custom(
                "expected exactly one of \"surface\" or \"torus\"",
            )),
        }
    }
}

impl SpaceDecl {
    fn to_model(&self) -> Result<ModelEntry, Error> {
        match self {
            SpaceDecl::Surface { surface } => surface_entry(surface),
            SpaceDecl::Torus { torus } => Ok(torus_entry(*torus)),
        }
    }
}

/// One batch job: a command name plus free-form parameters, among them
/// an optional `sweep` object of integer ranges.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JobDto {
    pub cmd: String,
    #[serde(flatten)]
    pub params: Map<String, Value>,
}

/// Expands a range value: `[lo, hi]` inclusive, with an optional third
/// element `"odd"`, `"even"`, or a positive integer step.
pub fn parse_range(v: &Value) -> Result<Vec<i64>, Error> {
    let bad = || {
        Error::invalid(format!(
            "bad range {v}: expected [lo, hi] or [lo, hi, filter]"
        ))
    };
    let arr = v.as_array().ok_or_else(bad)?;
    if arr.len() < 2 || arr.len() > 3 {
        return Err(bad());
    }
    let lo = arr[0].as_i64().ok_or_else(bad)?;
    let hi = arr[1].as_i64().ok_or_else(bad)?;
    let all = || (lo..=hi).collect::<Vec<_>>();
    match arr.get(2) {
        None => Ok(all()),
        Some(Value::String(s)) if s == "odd" => {
            Ok(all().into_iter().filter(|n| n.rem_euclid(2) == 1).collect())
        }
        Some(Value::String(s)) if s == "even" => {
            Ok(all().into_iter().filter(|n| n.rem_euclid(2) == 0).collect())
        }
        Some(step) => {
            let step = step.as_i64().filter(|s| *s > 0).ok_or_else(bad)?;
            Ok((lo..=hi).step_by(step as usize).collect())
        }
    }
}

/// Every combination of the sweep dimensions, first dimension varying
/// slowest; a single empty combination when there are no dimensions.
pub fn cartesian(dims: &[(String, Vec<i64>)]) -> Vec<Vec<(String, i64)>> {
    let mut combos = vec![Vec::new()];
    for (name, values) in dims {
        let mut next = Vec::with_capacity(combos.len() * values.len());
        for combo in &combos {
            for v in values {
                let mut c = combo.clone();
                c.push((name.clone(), *v));
                next.push(c);
            }
        }
        combos = next;
    }
    combos
}

impl JobDto {
    fn get(&self, key: &str) -> Option<&Value> {
        self.params.get(key)
    }

    fn wrong_type(&self, key: &str, expected: &str) -> Error {
        Error::invalid(format!(
            "job {:?}: parameter {key:?} must be {expected}",
            self.cmd
        ))
    }

    pub fn str_arg(&self, key: &str) -> Result<Option<&str>, Error> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s)),
            Some(_) => Err(self.wrong_type(key, "a string")),
        }
    }

    pub fn int_arg(&self, key: &str) -> Result<Option<i64>, Error> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .as_i64()
                .map(Some)
                .ok_or_else(|| self.wrong_type(key, "an integer")),
        }
    }

    pub fn rat_arg(&self, key: &str) -> Result<Option<Rat>, Error> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => {
                if let Some(n) = v.as_i64() {
                    return Ok(Some(Rat::from_int(n)));
                }
                match v {
                    Value::String(s) => s.parse().map(Some),
                    _ => Err(self.wrong_type(key, "an integer or rational string")),
                }
            }
        }
    }

    /// An integer parameter that may also be given as a sweep range.
    pub fn range_arg(&self, key: &str) -> Result<Option<Vec<i64>>, Error> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => {
                if let Some(n) = v.as_i64() {
                    return Ok(Some(vec![n]));
                }
                parse_range(v).map(Some)
            }
        }
    }

    pub fn int_list_arg(&self, key: &str) -> Result<Option<Vec<i64>>, Error> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Array(items)) => items
                .iter()
                .map(|v| {
                    v.as_i64()
                        .ok_or_else(|| self.wrong_type(key, "a list of integers"))
                })
                .collect::<Result<Vec<_>, _>>()
                .map(Some),
            Some(_) => Err(self.wrong_type(key, "a list of integers")),
        }
    }

    pub fn bundle_arg(&self, key: &str) -> Result<Option<BundleRef>, Error> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => serde_json::from_value(v.clone())
                .map(Some)
                .map_err(|_| self.wrong_type(key, "a bundle name or description")),
        }
    }

    /// The declared sweep dimensions, in declaration order.
    pub fn sweep(&self) -> Result<Vec<(String, Vec<i64>)>, Error> {
        match self.get("sweep") {
            None => Ok(Vec::new()),
            Some(Value::Object(dims)) => {
                let mut out = Vec::with_capacity(dims.len());
                for (name, range) in dims {
                    out.push((name.clone(), parse_range(range)?));
                }
                Ok(out)
            }
            Some(_) => Err(self.wrong_type("sweep", "an object of ranges")),
        }
    }

    /// The job parameters without the sweep declaration, for handing to
    /// a typed deserializer.
    pub fn object_without_sweep(&self) -> Map<String, Value> {
        let mut obj = self.params.clone();
        obj.remove("sweep");
        obj
    }
}

/// A batch input: named spaces and bundles plus the jobs that use them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub version: String,
    #[serde(default)]
    pub spaces: BTreeMap<String, SpaceDecl>,
    #[serde(default)]
    pub bundles: BTreeMap<String, BundleDto>,
    #[serde(default)]
    pub jobs: Vec<JobDto>,
}

/// Name resolution for models and bundles: builtins plus any file-level
/// declarations, each constructed once so that classes built against the
/// same name share a space.
pub struct Catalog {
    models: BTreeMap<String, ModelEntry>,
    bundles: BTreeMap<String, BundleClass>,
}

impl Catalog {
    /// Just the builtin models.
    pub fn new() -> Self {
        Self::with_file(None).expect("builtin catalog construction cannot fail")
    }

    /// Builtins plus the declarations of `file`, whose version must be
    /// `"1"`. Declared names may not shadow builtins; declared bundles
    /// must name a declared or builtin space.
    pub fn with_file(file: Option<&ScenarioFile>) -> Result<Self, Error> {
        let mut models = BTreeMap::new();
        for name in BUILTIN_MODELS {
            models.insert(name.to_string(), builtin_model(name)?.unwrap());
        }
        let mut bundles = BTreeMap::new();
        if let Some(f) = file {
            if f.version != "1" {
                return Err(Error::invalid(format!(
                    "unsupported scenario file version {:?} (expected \"1\")",
                    f.version
                )));
            }
            for (name, decl) in &f.spaces {
                if models.contains_key(name) {
                    return Err(Error::invalid(format!(
                        "space {name:?} shadows a builtin model"
                    )));
                }
                models.insert(name.clone(), decl.to_model()?);
            }
            for (name, dto) in &f.bundles {
                let space_name = dto.space.as_deref().ok_or_else(|| {
                    Error::invalid(format!("bundle {name:?} must name its space"))
                })?;
                let entry = models.get(space_name).ok_or_else(|| Error::UnknownName {
                    name: space_name.to_string(),
                })?;
                bundles.insert(
                    name.clone(),
                    build_bundle(dto, &entry.space, &BTreeMap::new())?,
                );
            }
        }
        Ok(Catalog { models, bundles })
    }

    pub fn model(&self, name: &str) -> Result<&ModelEntry, Error> {
        self.models.get(name).ok_or_else(|| Error::UnknownName {
            name: name.to_string(),
        })
    }

    pub fn model_names(&self) -> impl Iterator<Item = &str> {
        self.models.keys().map(|s| s.as_str())
    }

    /// Resolves a bundle position over `entry`'s space. Names try the
    /// file-level declarations first, then the shorthands: `tangent`,
    /// `trivialN`, and sums of `O(a)` twists of the model's polarization
    /// joined by `+`.
    pub fn bundle(
        &self,
        spec: &BundleRef,
        entry: &ModelEntry,
        params: &BTreeMap<String, Rat>,
    ) -> Result<BundleClass, Error> {
        match spec {
            BundleRef::Inline(dto) => build_bundle(dto, &entry.space, params),
            BundleRef::Name(name) => {
                if let Some(b) = self.bundles.get(name) {
                    if b.space().id() != entry.space.id() {
                        return Err(Error::AmbientMismatch);
                    }
                    return Ok(b.clone());
                }
                shorthand_bundle(name, entry)
            }
        }
    }

    /// Assembles a scenario: resolves the base by name, parses the
    /// expression strings with `params` in scope, resolves the bundles.
    pub fn scenario(
        &self,
        dto: &ScenarioDto,
        params: &BTreeMap<String, Rat>,
    ) -> Result<FamilyBlowupScenario, Error> {
        let entry = self.model(&dto.base)?;
        let l0 = parse_expression(&dto.l0, &entry.space, params)?;
        let ns = self.bundle(&dto.ns, entry, params)?;
        let insertion = match &dto.insertion {
            Some(src) => parse_expression(src, &entry.space, params)?,
            None => GradedClass::one(&entry.space),
        };
        let e_restr = dto
            .e_restr
            .as_ref()
            .map(|r| self.bundle(r, entry, params))
            .transpose()?;
        FamilyBlowupScenario::new(dto.variant, &entry.space, l0, ns, dto.m, insertion, e_restr)
    }
}

impl Default for Catalog {
    fn default() -> Self {
        Self::new()
    }
}

fn shorthand_bundle(name: &str, entry: &ModelEntry) -> Result<BundleClass, Error> {
    let mut sum: Option<BundleClass> = None;
    for piece in name.split('+') {
        let piece = piece.trim();
        let b = if piece == "tangent" {
            entry.tangent.clone()
        } else if let Some(rest) = piece.strip_prefix("trivial") {
            let rank = if rest.is_empty() {
                1
            } else {
                rest.parse::<u32>().map_err(|_| Error::UnknownName {
                    name: piece.to_string(),
                })?
            };
            BundleClass::trivial(&entry.space, rank)
        } else if let Some(body) = piece.strip_prefix("O(").and_then(|r| r.strip_suffix(')')) {
            let a = body.trim().parse::<i64>().map_err(|_| Error::UnknownName {
                name: piece.to_string(),
            })?;
            match (&entry.polarization, a) {
                (_, 0) => BundleClass::trivial(&entry.space, 1),
                (Some(pol), a) => BundleClass::line(pol.scale(&Rat::from_int(a)))?,
                (None, _) => {
                    return Err(Error::invalid(format!(
                        "model has no polarization for {piece}"
                    )))
                }
            }
        } else {
            return Err(Error::UnknownName {
                name: piece.to_string(),
            });
        };
        sum = Some(match sum {
            None => b,
            Some(acc) => acc.whitney(&b)?,
        });
    }
    sum.ok_or_else(|| Error::UnknownName {
        name: name.to_string(),
    })
}

/// Polynomial report: multiplicity, nonzero coefficients by monomial
/// name, and whether the off-grid verification pass succeeded.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniversalPolyDto {
    pub p: i64,
    pub polynomial: BTreeMap<String, Rat>,
    pub verified: bool,
}

impl UniversalPolyDto {
    pub fn from_poly(u: &crate::applications::UniversalPolynomial) -> Self {
        UniversalPolyDto {
            p: u.multiplicity(),
            polynomial: u.named_coefficients(),
            verified: u.verified(),
        }
    }

    pub fn to_poly(&self) -> Result<crate::applications::UniversalPolynomial, Error> {
        crate::applications::UniversalPolynomial::from_named(
            self.p,
            &self.polynomial,
            self.verified,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64) -> Rat {
        Rat::from_int(n)
    }

    #[test]
    fn pinned_space_json_builds_the_plane() {
        let src = r#"{"generators":[{"name":"h","degree":2,"parity":"even"}],
            "rules":[{"lhs":"h^3","rhs":"0"}],"dim":2,"integrals":{"h^2":"1"}}"#;
        let dto: SpaceDto = serde_json::from_str(src).unwrap();
        let space = build_space("cp2", &dto).unwrap();
        let h = GradedClass::generator(&space, "h").unwrap();
        assert_eq!(h.pow(2).unwrap().integrate(), rat(1));
        assert!(h.pow(3).unwrap().is_zero());
    }

    #[test]
    fn space_round_trip() {
        let s = surface_model(&SurfaceData::cp2()).unwrap();
        let dto = space_dto(&s.space);
        let rebuilt = build_space(s.space.name(), &dto).unwrap();
        assert_eq!(dto, space_dto(&rebuilt));
        let h = GradedClass::generator(&rebuilt, "h").unwrap();
        assert_eq!(h.pow(2).unwrap().integrate(), rat(1));
    }

    #[test]
    fn class_strings_parse_back() {
        let s = surface_model(&SurfaceData::cp2()).unwrap();
        let h = GradedClass::generator(&s.space, "h").unwrap();
        let c = GradedClass::one(&s.space)
            .add(&h.scale(&Rat::frac(-3, 2).unwrap()))
            .unwrap()
            .add(&h.pow(2).unwrap().scale(&rat(5)))
            .unwrap();
        let src = class_string(&c);
        let back = parse_expression(&src, &s.space, &BTreeMap::new()).unwrap();
        assert_eq!(back, c);
        assert_eq!(class_string(&GradedClass::zero(&s.space)), "0");
    }

    #[test]
    fn bundle_round_trip() {
        let s = surface_model(&SurfaceData::cp2()).unwrap();
        let dto = bundle_dto(&s.tangent);
        assert_eq!(dto.rank, 2);
        let rebuilt = build_bundle(&dto, &s.space, &BTreeMap::new()).unwrap();
        assert!(rebuilt.equals(&s.tangent));
    }

    #[test]
    fn pinned_scenario_json_with_parameter() {
        let src = r#"{"variant":"smooth","base":"cp2","l0":"2*d*h+3*h",
            "Ns":{"rank":2,"chern":{"1":"3*h","2":"3*h^2"}},"m":-5,"insertion":"1"}"#;
        let dto: ScenarioDto = serde_json::from_str(src).unwrap();
        let catalog = Catalog::new();
        let mut params = BTreeMap::new();
        params.insert("d".to_string(), rat(2));
        let sc = catalog.scenario(&dto, &params).unwrap();
        assert_eq!(sc.m, -5);
        let entry = catalog.model("cp2").unwrap();
        let h = GradedClass::generator(&entry.space, "h").unwrap();
        assert_eq!(sc.l0, h.scale(&rat(7)));
        assert!(sc.ns.equals(&entry.tangent));
    }

    #[test]
    fn shorthand_bundles() {
        let catalog = Catalog::new();
        let cp2 = catalog.model("cp2").unwrap();
        let t = catalog
            .bundle(&BundleRef::Name("tangent".into()), cp2, &BTreeMap::new())
            .unwrap();
        assert!(t.equals(&cp2.tangent));
        let s = catalog
            .bundle(&BundleRef::Name("O(-2)+O(2)".into()), cp2, &BTreeMap::new())
            .unwrap();
        assert_eq!(s.rank(), 2);
        assert!(s.chern(1).is_zero());
        let h = GradedClass::generator(&cp2.space, "h").unwrap();
        assert_eq!(s.chern(2), h.pow(2).unwrap().scale(&rat(-4)));
        let tr = catalog
            .bundle(&BundleRef::Name("trivial2".into()), cp2, &BTreeMap::new())
            .unwrap();
        assert_eq!(tr.rank(), 2);
        assert!(tr.is_honest());

        let point = catalog.model("point").unwrap();
        assert!(catalog
            .bundle(&BundleRef::Name("O(0)".into()), point, &BTreeMap::new())
            .is_ok());
        assert!(catalog
            .bundle(&BundleRef::Name("O(1)".into()), point, &BTreeMap::new())
            .is_err());
    }

    #[test]
    fn scenario_file_with_declarations_and_jobs() {
        let src = r#"{
            "version": "1",
            "spaces": {
                "bidegree": {"surface": {"basis": ["a", "b"],
                    "Q": [["0", "1"], ["1", "0"]],
                    "K": ["-2", "-2"], "c2": "4", "pg": 0, "q": 0}},
                "t1": {"torus": 1}
            },
            "bundles": {
                "N": {"space": "bidegree", "rank": 2,
                      "chern": {"1": "a + b", "2": "2*a*b"}}
            },
            "jobs": [
                {"cmd": "nodal-cp2", "sweep": {"d": [1, 10]}},
                {"cmd": "grr-check", "base": "cp2", "Ns": "tangent",
                 "m": [-7, 7, "odd"]}
            ]
        }"#;
        let file: ScenarioFile = serde_json::from_str(src).unwrap();
        let catalog = Catalog::with_file(Some(&file)).unwrap();
        let entry = catalog.model("bidegree").unwrap();
        assert_eq!(entry.space.complex_dim(), 2);
        let n = catalog
            .bundle(&BundleRef::Name("N".into()), entry, &BTreeMap::new())
            .unwrap();
        assert_eq!(n.rank(), 2);
        catalog.model("t1").unwrap();

        assert_eq!(file.jobs.len(), 2);
        let sweep = file.jobs[0].sweep().unwrap();
        assert_eq!(sweep, vec![("d".to_string(), (1..=10).collect())]);
        let m = file.jobs[1].range_arg("m").unwrap().unwrap();
        assert_eq!(m, vec![-7, -5, -3, -1, 1, 3, 5, 7]);
        assert_eq!(file.jobs[1].str_arg("Ns").unwrap(), Some("tangent"));

        // declared names share one space instance across lookups
        let again = catalog.model("bidegree").unwrap();
        assert_eq!(entry.space.id(), again.space.id());
    }

    #[test]
    fn version_and_shadowing_guards() {
        let mut file = ScenarioFile {
            version: "2".into(),
            spaces: BTreeMap::new(),
            bundles: BTreeMap::new(),
            jobs: Vec::new(),
        };
        assert!(Catalog::with_file(Some(&file)).is_err());
        file.version = "1".into();
        file.spaces
            .insert("cp2".into(), SpaceDecl::Torus { torus: 1 });
        assert!(Catalog::with_file(Some(&file)).is_err());
    }

    #[test]
    fn range_forms_and_cartesian_order() {
        use serde_json::json;
        assert_eq!(parse_range(&json!([1, 4])).unwrap(), vec![1, 2, 3, 4]);
        assert_eq!(
            parse_range(&json!([-3, 3, "odd"])).unwrap(),
            vec![-3, -1, 1, 3]
        );
        assert_eq!(
            parse_range(&json!([0, 8, "even"])).unwrap(),
            vec![0, 2, 4, 6, 8]
        );
        assert_eq!(parse_range(&json!([0, 9, 3])).unwrap(), vec![0, 3, 6, 9]);
        assert!(parse_range(&json!([1])).is_err());
        assert!(parse_range(&json!("x")).is_err());

        let dims = vec![
            ("a".to_string(), vec![1, 2]),
            ("b".to_string(), vec![10, 11]),
        ];
        let combos = cartesian(&dims);
        let flat: Vec<(i64, i64)> = combos.iter().map(|c| (c[0].1, c[1].1)).collect();
        assert_eq!(flat, vec![(1, 10), (1, 11), (2, 10), (2, 11)]);
        assert_eq!(cartesian(&[]), vec![Vec::new()]);
    }

    #[test]
    fn universal_poly_wire_format_is_pinned() {
        let u = crate::applications::universal_poly(2).unwrap();
        let dto = UniversalPolyDto::from_poly(&u);
        let json = serde_json::to_string(&dto).unwrap();
        assert_eq!(
            json,
            r#"{"p":2,"polynomial":{"C2":"3","CK":"2","c2":"1"},"verified":true}"#
        );
        let back: UniversalPolyDto = serde_json::from_str(&json).unwrap();
        let poly = back.to_poly().unwrap();
        assert_eq!(
            poly.eval(&[rat(16), rat(-12), rat(9), rat(3)]),
            u.eval(&[rat(16), rat(-12), rat(9), rat(3)])
        );
    }

    #[test]
    fn kuranishi_report_wire_format_is_pinned() {
        let report = crate::kuranishi::AswReport {
            value: Rat::frac(3, 2).unwrap(),
            top_degree_checked: true,
        };
        assert_eq!(
            serde_json::to_string(&report).unwrap(),
            r#"{"value":"3/2","topDegreeChecked":true}"#
        );
    }
}
