//! Reader and writer for the de-facto standard boosted-cascade XML format:
//! a storage root holding a cascade node with `stageType` BOOST,
//! `featureType` HAAR, base window dims, boosted stages of decision stumps
//! (`internalNodes` = [left leaf, right leaf, feature index, threshold] with
//! two `leafValues`) and a list of weighted-rect Haar features.

use somiap_core::facedetect::{
    CascadeModel, HaarFeature, Stage, WeakClassifier, WeightedRect,
};
use somiap_core::Rect;

use crate::error::{Result, ToolError};

fn parse_err(path: &str, msg: impl AsRef<str>) -> ToolError {
    ToolError::Parse(format!("{path}: {}", msg.as_ref()))
}

fn child<'a>(
    node: roxmltree::Node<'a, 'a>,
    name: &str,
    path: &str,
) -> Result<roxmltree::Node<'a, 'a>> {
    node.children()
        .find(|c| c.is_element() && c.tag_name().name() == name)
        .ok_or_else(|| parse_err(path, format!("missing <{name}>")))
}

fn text_of(node: roxmltree::Node, path: &str) -> Result<String> {
    Ok(node
        .text()
        .ok_or_else(|| parse_err(path, "empty element"))?
        .trim()
        .to_string())
}

fn parse_f64(s: &str, path: &str) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|_| parse_err(path, format!("malformed number `{s}`")))
}

fn parse_u32(s: &str, path: &str) -> Result<u32> {
    s.parse::<u32>()
        .map_err(|_| parse_err(path, format!("malformed integer `{s}`")))
}

/// Parses a cascade XML document into a validated model.
pub fn parse_cascade(text: &str) -> Result<CascadeModel> {
    let doc = roxmltree::Document::parse(text)
        .map_err(|e| ToolError::Parse(format!("document: {e}")))?;
    let storage = doc.root_element();
    if storage.tag_name().name() != "opencv_storage" {
        return Err(parse_err(
            storage.tag_name().name(),
            "expected an <opencv_storage> root",
        ));
    }
    let cascade = storage
        .children()
        .find(|c| c.is_element())
        .ok_or_else(|| parse_err("opencv_storage", "missing cascade node"))?;
    let path = "cascade";

    let stage_type = text_of(child(cascade, "stageType", path)?, "cascade/stageType")?;
    if stage_type != "BOOST" {
        return Err(ToolError::UnsupportedModel(format!(
            "stageType {stage_type} (only BOOST is supported)"
        )));
    }
    let feature_type = text_of(child(cascade, "featureType", path)?, "cascade/featureType")?;
    if feature_type != "HAAR" {
        return Err(ToolError::UnsupportedModel(format!(
            "featureType {feature_type} (only HAAR is supported)"
        )));
    }
    let window_w = parse_u32(
        &text_of(child(cascade, "width", path)?, "cascade/width")?,
        "cascade/width",
    )?;
    let window_h = parse_u32(
        &text_of(child(cascade, "height", path)?, "cascade/height")?,
        "cascade/height",
    )?;

    let declared_stages = cascade
        .children()
        .find(|c| c.is_element() && c.tag_name().name() == "stageNum")
        .map(|n| {
            let t = text_of(n, "cascade/stageNum")?;
            parse_u32(&t, "cascade/stageNum")
        })
        .transpose()?;

    let stages_node = child(cascade, "stages", path)?;
    let mut stages = Vec::new();
    for (si, stage_node) in stages_node
        .children()
        .filter(|c| c.is_element())
        .enumerate()
    {
        let spath = format!("cascade/stages/_[{si}]");
        let threshold = parse_f64(
            &text_of(
                child(stage_node, "stageThreshold", &spath)?,
                &format!("{spath}/stageThreshold"),
            )?,
            &format!("{spath}/stageThreshold"),
        )?;
        let weak_node = child(stage_node, "weakClassifiers", &spath)?;
        let mut weak = Vec::new();
        for (wi, wc_node) in weak_node.children().filter(|c| c.is_element()).enumerate() {
            let wpath = format!("{spath}/weakClassifiers/_[{wi}]");
            weak.push(parse_stump(wc_node, &wpath)?);
        }
        if weak.is_empty() {
            return Err(parse_err(&spath, "stage has no weak classifiers"));
        }
        if let Some(count_node) = stage_node
            .children()
            .find(|c| c.is_element() && c.tag_name().name() == "maxWeakCount")
        {
            let declared = parse_u32(
                &text_of(count_node, &format!("{spath}/maxWeakCount"))?,
                &format!("{spath}/maxWeakCount"),
            )?;
            if declared as usize != weak.len() {
                return Err(parse_err(
                    &format!("{spath}/maxWeakCount"),
                    format!("declares {declared} but {} stumps present", weak.len()),
                ));
            }
        }
        stages.push(Stage {
            weak,
            stage_threshold: threshold,
        });
    }
    if let Some(declared) = declared_stages {
        if declared as usize != stages.len() {
            return Err(parse_err(
                "cascade/stageNum",
                format!("declares {declared} but {} stages present", stages.len()),
            ));
        }
    }

    let features_node = child(cascade, "features", path)?;
    let mut features = Vec::new();
    for (fi, feature_node) in features_node
        .children()
        .filter(|c| c.is_element())
        .enumerate()
    {
        let fpath = format!("cascade/features/_[{fi}]");
        if let Some(tilted) = feature_node
            .children()
            .find(|c| c.is_element() && c.tag_name().name() == "tilted")
        {
            let v = text_of(tilted, &format!("{fpath}/tilted"))?;
            if v != "0" {
                return Err(ToolError::UnsupportedModel(format!(
                    "{fpath}: tilted (45-degree) features are not supported"
                )));
            }
        }
        let rects_node = child(feature_node, "rects", &fpath)?;
        let mut rects = Vec::new();
        for (ri, rect_node) in rects_node.children().filter(|c| c.is_element()).enumerate() {
            let rpath = format!("{fpath}/rects/_[{ri}]");
            let text = text_of(rect_node, &rpath)?;
            let tokens: Vec<&str> = text.split_ascii_whitespace().collect();
            if tokens.len() != 5 {
                return Err(parse_err(&rpath, "expected `x y w h weight`"));
            }
            let x = parse_u32(tokens[0], &rpath)? as i64;
            let y = parse_u32(tokens[1], &rpath)? as i64;
            let w = parse_u32(tokens[2], &rpath)?;
            let h = parse_u32(tokens[3], &rpath)?;
            let weight = parse_f64(tokens[4], &rpath)?;
            rects.push(WeightedRect {
                rect: Rect::new(x, y, w, h),
                weight,
            });
        }
        if rects.len() < 2 || rects.len() > 3 {
            return Err(parse_err(&fpath, "features must have 2 or 3 rects"));
        }
        features.push(HaarFeature { rects });
    }

    let model = CascadeModel {
        window_w,
        window_h,
        stages,
        features,
    };
    model
        .validate()
        .map_err(|e| ToolError::Parse(format!("cascade: {e}")))?;
    Ok(model)
}

/// `internalNodes` must describe a depth-1 tree: exactly one node whose left
/// and right children are both leaves into the two `leafValues`.
fn parse_stump(node: roxmltree::Node, path: &str) -> Result<WeakClassifier> {
    let internal_path = format!("{path}/internalNodes");
    let internal = text_of(child(node, "internalNodes", path)?, &internal_path)?;
    let tokens: Vec<&str> = internal.split_ascii_whitespace().collect();
    if tokens.len() != 4 {
        return Err(parse_err(
            &internal_path,
            format!(
                "expected 4 values (stump), found {} (deeper trees are not supported)",
                tokens.len()
            ),
        ));
    }
    let left: i64 = tokens[0]
        .parse()
        .map_err(|_| parse_err(&internal_path, format!("malformed leaf ref `{}`", tokens[0])))?;
    let right: i64 = tokens[1]
        .parse()
        .map_err(|_| parse_err(&internal_path, format!("malformed leaf ref `{}`", tokens[1])))?;
    let feature: usize = tokens[2]
        .parse()
        .map_err(|_| parse_err(&internal_path, format!("malformed feature index `{}`", tokens[2])))?;
    let threshold = parse_f64(tokens[3], &internal_path)?;

    let leaves_path = format!("{path}/leafValues");
    let leaves_text = text_of(child(node, "leafValues", path)?, &leaves_path)?;
    let leaves: Vec<f64> = leaves_text
        .split_ascii_whitespace()
        .map(|t| parse_f64(t, &leaves_path))
        .collect::<Result<_>>()?;
    if leaves.len() != 2 {
        return Err(parse_err(&leaves_path, "expected exactly 2 leaf values"));
    }
    // child refs <= 0 are leaf indices (-v); positive refs point at further
    // tree nodes, which a stump cannot have
    if left > 0 || right > 0 || left == right {
        return Err(parse_err(
            &internal_path,
            format!("child refs {left} {right} do not form a stump"),
        ));
    }
    let left_idx = (-left) as usize;
    let right_idx = (-right) as usize;
    if left_idx > 1 || right_idx > 1 {
        return Err(parse_err(&internal_path, "leaf reference out of range"));
    }
    Ok(WeakClassifier {
        feature,
        threshold,
        left_value: leaves[left_idx],
        right_value: leaves[right_idx],
    })
}

/// Writes a model back in the same schema; floats use the shortest
/// round-trip representation, so parse(serialize(m)) == m field-exact.
pub fn serialize_cascade(model: &CascadeModel) -> String {
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\"?>\n<opencv_storage>\n<cascade>\n");
    out.push_str("  <stageType>BOOST</stageType>\n");
    out.push_str("  <featureType>HAAR</featureType>\n");
    out.push_str(&format!("  <height>{}</height>\n", model.window_h));
    out.push_str(&format!("  <width>{}</width>\n", model.window_w));
    out.push_str(&format!("  <stageNum>{}</stageNum>\n", model.stages.len()));
    out.push_str("  <stages>\n");
    for stage in &model.stages {
        out.push_str("    <_>\n");
        out.push_str(&format!(
            "      <maxWeakCount>{}</maxWeakCount>\n",
            stage.weak.len()
        ));
        out.push_str(&format!(
            "      <stageThreshold>{}</stageThreshold>\n",
            stage.stage_threshold
        ));
        out.push_str("      <weakClassifiers>\n");
        for wc in &stage.weak {
            out.push_str("        <_>\n");
            out.push_str(&format!(
                "          <internalNodes>0 -1 {} {}</internalNodes>\n",
                wc.feature, wc.threshold
            ));
            out.push_str(&format!(
                "          <leafValues>{} {}</leafValues>\n",
                wc.left_value, wc.right_value
            ));
            out.push_str("        </_>\n");
        }
        out.push_str("      </weakClassifiers>\n");
        out.push_str("    </_>\n");
    }
    out.push_str("  </stages>\n  <features>\n");
    for feature in &model.features {
        out.push_str("    <_>\n      <rects>\n");
        for wr in &feature.rects {
            out.push_str(&format!(
                "        <_>{} {} {} {} {}</_>\n",
                wr.rect.x, wr.rect.y, wr.rect.w, wr.rect.h, wr.weight
            ));
        }
        out.push_str("      </rects>\n      <tilted>0</tilted>\n    </_>\n");
    }
    out.push_str("  </features>\n</cascade>\n</opencv_storage>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"<?xml version="1.0"?>
<opencv_storage>
<cascade>
  <stageType>BOOST</stageType>
  <featureType>HAAR</featureType>
  <height>8</height>
  <width>8</width>
  <stages>
    <_>
      <maxWeakCount>1</maxWeakCount>
      <stageThreshold>-0.5</stageThreshold>
      <weakClassifiers>
        <_>
          <internalNodes>0 -1 0 1.25e-01</internalNodes>
          <leafValues>-1. 1.</leafValues>
        </_>
      </weakClassifiers>
    </_>
  </stages>
  <features>
    <_>
      <rects>
        <_>0 0 8 4 1.</_>
        <_>0 4 8 4 -1.</_>
      </rects>
      <tilted>0</tilted>
    </_>
  </features>
</cascade>
</opencv_storage>
"#;

    #[test]
    fn parses_minimal_document() {
        let model = parse_cascade(MINIMAL).unwrap();
        assert_eq!((model.window_w, model.window_h), (8, 8));
        assert_eq!(model.stages.len(), 1);
        assert_eq!(model.features.len(), 1);
        let wc = &model.stages[0].weak[0];
        assert_eq!(wc.feature, 0);
        assert_eq!(wc.threshold, 0.125);
        assert_eq!((wc.left_value, wc.right_value), (-1.0, 1.0));
        assert_eq!(model.features[0].rects[1].weight, -1.0);
    }

    #[test]
    fn round_trips_field_exact() {
        let model = parse_cascade(MINIMAL).unwrap();
        let text = serialize_cascade(&model);
        let again = parse_cascade(&text).unwrap();
        assert_eq!(model, again);

        // a second trip is byte-identical
        assert_eq!(text, serialize_cascade(&again));
    }

    #[test]
    fn lbp_feature_type_is_unsupported() {
        let doc = MINIMAL.replace("HAAR", "LBP");
        match parse_cascade(&doc) {
            Err(ToolError::UnsupportedModel(msg)) => assert!(msg.contains("LBP")),
            other => panic!("expected unsupported-model, got {other:?}"),
        }
    }

    #[test]
    fn non_boost_stage_type_is_unsupported() {
        let doc = MINIMAL.replace("BOOST", "GAB");
        assert!(matches!(
            parse_cascade(&doc),
            Err(ToolError::UnsupportedModel(_))
        ));
    }

    #[test]
    fn tilted_features_are_unsupported() {
        let doc = MINIMAL.replace("<tilted>0</tilted>", "<tilted>1</tilted>");
        assert!(matches!(
            parse_cascade(&doc),
            Err(ToolError::UnsupportedModel(_))
        ));
    }

    #[test]
    fn deep_trees_are_a_parse_error_naming_the_node() {
        let doc = MINIMAL.replace(
            "<internalNodes>0 -1 0 1.25e-01</internalNodes>",
            "<internalNodes>1 2 0 1.25e-01 0 -1 0 0.5</internalNodes>",
        );
        match parse_cascade(&doc) {
            Err(ToolError::Parse(msg)) => {
                assert!(msg.contains("cascade/stages/_[0]/weakClassifiers/_[0]"), "{msg}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn dangling_feature_index_is_a_parse_error() {
        let doc = MINIMAL.replace(
            "<internalNodes>0 -1 0 1.25e-01</internalNodes>",
            "<internalNodes>0 -1 7 1.25e-01</internalNodes>",
        );
        assert!(matches!(parse_cascade(&doc), Err(ToolError::Parse(_))));
    }

    #[test]
    fn malformed_number_is_a_parse_error_naming_the_node() {
        let doc = MINIMAL.replace("-0.5", "minus-half");
        match parse_cascade(&doc) {
            Err(ToolError::Parse(msg)) => assert!(msg.contains("stageThreshold"), "{msg}"),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn vendored_fixture_cascade_parses() {
        let text = include_str!("../fixtures/cascade_fixture.xml");
        let model = parse_cascade(text).unwrap();
        assert_eq!((model.window_w, model.window_h), (24, 24));
        assert!(model.stages.len() >= 2);
        assert!(model.features.iter().any(|f| f.rects.len() == 3));
        let again = parse_cascade(&serialize_cascade(&model)).unwrap();
        assert_eq!(model, again);
    }
}
