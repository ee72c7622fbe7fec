//! Wire-format pins, exercised through the public API only. These
//! strings are contracts: a serialization change that breaks one of
//! them breaks saved scenario files and downstream parsers.

use std::collections::BTreeMap;

use fbf_core::applications::universal_poly;
use fbf_core::blowup::Variant;
use fbf_core::kuranishi::AswReport;
use fbf_core::schema::{
    build_space, class_string, space_dto, BundleRef, Catalog, ScenarioDto, ScenarioFile, SpaceDto,
    UniversalPolyDto,
};
use fbf_core::Rat;

#[test]
fn space_description_round_trips_byte_for_byte() {
    let src = r#"{"generators":[{"name":"h","degree":2,"parity":"even"}],"rules":[{"lhs":"h^3","rhs":"0"}],"dim":2,"integrals":{"h^2":"1"}}"#;
    let dto: SpaceDto = serde_json::from_str(src).unwrap();
    let space = build_space("plane", &dto).unwrap();
    let back = serde_json::to_string(&space_dto(&space)).unwrap();
    assert_eq!(back, src);
}

#[test]
fn scenario_description_resolves_with_parameters() {
    let src = r#"{
        "variant": "smooth",
        "base": "cp2",
        "l0": "2*d*h + 3*h",
        "Ns": {"rank": 2, "chern": {"1": "3*h", "2": "3*h^2"}},
        "m": -5,
        "insertion": "1"
    }"#;
    let dto: ScenarioDto = serde_json::from_str(src).unwrap();
    assert_eq!(dto.variant, Variant::Smooth);
    let catalog = Catalog::new();
    let mut params = BTreeMap::new();
    params.insert("d".to_string(), Rat::from_int(2));
    let sc = catalog.scenario(&dto, &params).unwrap();
    assert_eq!(class_string(&sc.l0), "7*h");
    assert_eq!(sc.m, -5);
    assert_eq!(sc.ns.rank(), 2);
}

#[test]
fn bundle_positions_accept_names_and_inline_descriptions() {
    let by_name: BundleRef = serde_json::from_str(r#""tangent""#).unwrap();
    assert_eq!(by_name, BundleRef::Name("tangent".into()));

    let inline: BundleRef = serde_json::from_str(r#"{"rank": 2, "chern": {"1": "3*h"}}"#).unwrap();
    match inline {
        BundleRef::Inline(dto) => assert_eq!(dto.rank, 2),
        other => panic!("expected inline description, got {other:?}"),
    }

    let err = serde_json::from_str::<BundleRef>(r#"{"rank": 2, "chern": {"one": "3*h"}}"#);
    assert!(
        err.is_ok(),
        "string keys are validated at build time, not parse time"
    );
}

#[test]
fn malformed_rationals_name_the_problem() {
    let err = serde_json::from_str::<Rat>(r#""1/0""#).unwrap_err();
    assert!(err.to_string().contains("zero denominator"), "{err}");
}

#[test]
fn evaluation_report_serializes_in_camel_case() {
    let report = AswReport {
        value: Rat::frac(3, 2).unwrap(),
        top_degree_checked: true,
    };
    assert_eq!(
        serde_json::to_string(&report).unwrap(),
        r#"{"value":"3/2","topDegreeChecked":true}"#
    );
}

#[test]
fn universal_polynomial_wire_format_is_stable() {
    let poly = universal_poly(2).unwrap();
    let dto = UniversalPolyDto::from_poly(&poly);
    assert_eq!(
        serde_json::to_string(&dto).unwrap(),
        r#"{"p":2,"polynomial":{"C2":"3","CK":"2","c2":"1"},"verified":true}"#
    );
    let back = dto.to_poly().unwrap();
    assert!(back.verified());
}

#[test]
fn scenario_files_round_trip_with_declarations() {
    let src = r#"{
        "version": "1",
        "spaces": {
            "E": {"surface": {"basis": ["C", "K"],
                "Q": [["2", "1"], ["1", "0"]],
                "K": ["0", "1"], "c2": "23", "pg": 0, "q": 0}},
            "T": {"torus": 1}
        },
        "bundles": {
            "N": {"space": "E", "rank": 2, "chern": {"1": "C + K"}}
        },
        "jobs": [
            {"cmd": "nodal-cp2", "sweep": {"d": [1, 10]}}
        ]
    }"#;
    let file: ScenarioFile = serde_json::from_str(src).unwrap();
    assert_eq!(file.version, "1");
    assert_eq!(file.spaces.len(), 2);
    assert_eq!(file.jobs.len(), 1);

    let reserialized = serde_json::to_string(&file).unwrap();
    let reparsed: ScenarioFile = serde_json::from_str(&reserialized).unwrap();
    assert_eq!(file, reparsed);

    let catalog = Catalog::with_file(Some(&file)).unwrap();
    assert!(catalog.model("E").is_ok());
    assert!(catalog.model("T").is_ok());
    assert!(catalog.model("cp2").is_ok(), "builtins stay visible");
}

#[test]
fn version_and_shadowing_are_rejected() {
    let wrong_version: ScenarioFile =
        serde_json::from_str(r#"{"version": "2", "jobs": []}"#).unwrap();
    assert!(Catalog::with_file(Some(&wrong_version)).is_err());

    let shadowing: ScenarioFile =
        serde_json::from_str(r#"{"version": "1", "spaces": {"cp2": {"torus": 1}}, "jobs": []}"#)
            .unwrap();
    assert!(Catalog::with_file(Some(&shadowing)).is_err());
}

#[test]
fn variants_use_lowercase_tags() {
    assert_eq!(
        serde_json::to_string(&Variant::Smooth).unwrap(),
        r#""smooth""#
    );
    assert_eq!(
        serde_json::from_str::<Variant>(r#""algebraic""#).unwrap(),
        Variant::Algebraic
    );
}
