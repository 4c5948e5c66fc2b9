use serde_json::{json, Value};

use coarse_entropy::entropy::{classify, ClassificationReport, ClassifyConfig, Rule, Verdict};
use coarse_entropy::spaces::catalog::{make_example, CatalogTag};
use coarse_entropy::Error;

fn default_params(tag: CatalogTag) -> Value {
    match tag {
        CatalogTag::CoarseUnion => json!({ "pieces": [[[0, 1], [1, 0]], [[0, 2, 2], [2, 0, 2], [2, 2, 0]]] }),
        _ => Value::Null,
    }
}

#[test]
fn every_tag_builds_and_classifies() {
    let cfg = ClassifyConfig::default();
    let expected = [
        (CatalogTag::IntegerLine, Verdict::Zero, Rule::VertexTransitiveGrowth),
        (CatalogTag::UltrametricProduct, Verdict::Zero, Rule::Ultrametric),
        (CatalogTag::LogLine, Verdict::Zero, Rule::BoundedGeometryGrowthZero),
        (CatalogTag::PrimeCycle, Verdict::Zero, Rule::CodingMap),
        (CatalogTag::TreeLine, Verdict::Infinite, Rule::BoundedGeometryGrowthPositive),
        (CatalogTag::BranchTree, Verdict::Infinite, Rule::NotCoarselyBoundedGeometry),
        (CatalogTag::RegularTree, Verdict::Infinite, Rule::VertexTransitiveGrowth),
    ];
    for (tag, verdict, rule) in expected {
        let space = make_example(tag.as_str(), &default_params(tag)).unwrap();
        let rep = classify(space.as_ref(), &cfg).unwrap();
        assert_eq!((rep.verdict, rep.rule, rep.certified), (verdict, Some(rule), true), "{tag}");
        let text = serde_json::to_string(&rep).unwrap();
        let back: ClassificationReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back.verdict, rep.verdict);
        assert_eq!(back.schema, "v1");
    }
    let u = make_example("coarse_union", &default_params(CatalogTag::CoarseUnion)).unwrap();
    assert_eq!(classify(u.as_ref(), &cfg).unwrap().verdict, Verdict::Zero);
}

#[test]
fn bad_parameters_are_rejected() {
    assert!(matches!(make_example("integer_line", &json!({ "window": 0 })), Err(Error::InvalidParams(_))));
    assert!(matches!(make_example("integer_line", &json!({ "widow": 5 })), Err(Error::InvalidParams(_))));
    assert!(matches!(make_example("branch_tree", &json!({ "max_depth": 40 })), Err(Error::InvalidParams(_))));
    assert!(matches!(make_example("moebius_strip", &Value::Null), Err(Error::UnknownTag(_))));
}

#[test]
fn classification_is_deterministic() {
    let cfg = ClassifyConfig::default();
    let space = make_example("branch_tree", &Value::Null).unwrap();
    let a = serde_json::to_string(&classify(space.as_ref(), &cfg).unwrap()).unwrap();
    let seq = ClassifyConfig { caps: coarse_entropy::entropy::Caps { exec: coarse_entropy::Exec::Sequential, ..cfg.caps }, ..cfg.clone() };
    let b = serde_json::to_string(&classify(space.as_ref(), &seq).unwrap()).unwrap();
    assert_eq!(a, b);
}
