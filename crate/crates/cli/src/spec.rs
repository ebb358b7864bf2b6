//! JSON system specifications.
//!
//! A system spec lists similarities with a ratio string (`"0.25"`, `"1/3"` or
//! `"2^-1.618"`), a row-major rotation matrix and a translation vector whose
//! entries are numbers or `"p/q"` strings. A string spec (`"kind": "string"`)
//! gives the first-generation gaps and the scaling ratios instead.

use std::path::Path;

use complexdim::geometry::{SelfSimilarSystem, Similarity};
use complexdim::scale::Ratio;
use complexdim::strings::StringGenerator;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::error::CliError;

const BUILTINS: [(&str, &str); 6] = [
    ("cantor", include_str!("../data/cantor.json")),
    ("golden", include_str!("../data/golden.json")),
    ("sierpinski", include_str!("../data/sierpinski.json")),
    ("f1", include_str!("../data/f1.json")),
    ("interval", include_str!("../data/interval.json")),
    ("fat-cantor-string", include_str!("../data/fat-cantor-string.json")),
];

pub fn builtin_names() -> impl Iterator<Item = &'static str> {
    BUILTINS.iter().map(|(n, _)| *n)
}

pub fn builtin_text(name: &str) -> Option<&'static str> {
    BUILTINS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

#[derive(Debug, Clone)]
pub enum Model {
    System(SelfSimilarSystem),
    String(StringGenerator),
}

#[derive(Debug, Clone)]
pub struct SystemSpec {
    pub name: Option<String>,
    pub model: Model,
}

impl SystemSpec {
    pub fn ratios(&self) -> Vec<Ratio> {
        match &self.model {
            Model::System(s) => s.ratios(),
            Model::String(g) => g.ratios.clone(),
        }
    }

    /// The same spec with its ratios replaced.
    pub fn with_ratios(&self, ratios: &[Ratio], name: Option<String>) -> Result<Self, CliError> {
        let model = match &self.model {
            Model::System(s) => Model::System(s.with_ratios(ratios)?),
            Model::String(g) => Model::String(StringGenerator::new(g.gaps.clone(), ratios.to_vec())?),
        };
        Ok(Self { name, model })
    }

    pub fn to_json(&self) -> Value {
        let mut v = match &self.model {
            Model::System(s) => json!({
                "ambient_dim": s.dim(),
                "maps": s.maps().iter().map(|m| {
                    let d = m.dim();
                    json!({
                        "ratio": m.ratio().to_string(),
                        "rotation": m.rotation().chunks(d).collect::<Vec<_>>(),
                        "translation": m.translation(),
                    })
                }).collect::<Vec<_>>(),
            }),
            Model::String(g) => json!({
                "kind": "string",
                "gaps": g.gaps.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
                "ratios": g.ratios.iter().map(|r| r.to_string()).collect::<Vec<_>>(),
            }),
        };
        if let Some(n) = &self.name {
            v["name"] = json!(n);
        }
        v
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Real {
    Number(f64),
    Text(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMap {
    ratio: String,
    rotation: Option<Vec<Vec<f64>>>,
    translation: Vec<Real>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    name: Option<String>,
    kind: Option<String>,
    ambient_dim: Option<usize>,
    maps: Option<Vec<RawMap>>,
    gaps: Option<Vec<Real>>,
    ratios: Option<Vec<String>>,
}

/// Loads a spec from a file, or a builtin by name when no such file exists.
pub fn load(arg: &str) -> Result<SystemSpec, CliError> {
    let path = Path::new(arg);
    if !path.exists() {
        if let Some(text) = builtin_text(arg) {
            return parse_spec(text);
        }
    }
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::parse(
            format!("cannot read spec {arg:?}: {e} (builtins: {})", builtin_names().collect::<Vec<_>>().join(", ")),
            None,
        )
    })?;
    parse_spec(&text)
}

pub fn parse_spec(text: &str) -> Result<SystemSpec, CliError> {
    let raw: RawSpec = serde_json::from_str(text).map_err(|e| CliError::parse(e.to_string(), Some(e.line())))?;
    match raw.kind.as_deref().unwrap_or("system") {
        "system" => parse_system(text, raw),
        "string" => parse_string(text, raw),
        other => Err(CliError::parse(
            format!("unknown kind {other:?}, expected \"system\" or \"string\""),
            line_of(text, "kind", 0),
        )),
    }
}

fn parse_system(text: &str, raw: RawSpec) -> Result<SystemSpec, CliError> {
    let maps = raw
        .maps
        .ok_or_else(|| CliError::parse("system spec needs \"maps\"".into(), None))?;
    if maps.len() < 2 {
        return Err(CliError::parse(
            format!("a system needs at least 2 maps, got {}", maps.len()),
            line_of(text, "maps", 0),
        ));
    }
    let dim = raw.ambient_dim.unwrap_or(maps[0].translation.len());
    let mut out = Vec::with_capacity(maps.len());
    for (i, m) in maps.into_iter().enumerate() {
        let at = |key: &str| line_of(text, key, i);
        let ratio = Ratio::parse(&m.ratio).map_err(|e| CliError::parse(format!("map {i}: {e}"), at("ratio")))?;
        if m.translation.len() != dim {
            return Err(CliError::parse(
                format!("map {i}: translation has {} entries, ambient_dim is {dim}", m.translation.len()),
                at("translation"),
            ));
        }
        let translation = m
            .translation
            .iter()
            .map(real)
            .collect::<Result<Vec<f64>, String>>()
            .map_err(|e| CliError::parse(format!("map {i}: {e}"), at("translation")))?;
        let rotation = match m.rotation {
            Some(rows) => {
                if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                    return Err(CliError::parse(format!("map {i}: rotation must be {dim}×{dim}"), at("rotation")));
                }
                rows.concat()
            }
            None => (0..dim * dim).map(|k| if k % (dim + 1) == 0 { 1.0 } else { 0.0 }).collect(),
        };
        let map = Similarity::new(ratio, rotation, translation)
            .map_err(|e| CliError::parse(format!("map {i}: {e}"), at("rotation")))?;
        out.push(map);
    }
    let system = SelfSimilarSystem::new(out).map_err(|e| CliError::parse(e.to_string(), line_of(text, "maps", 0)))?;
    Ok(SystemSpec {
        name: raw.name,
        model: Model::System(system),
    })
}

fn parse_string(text: &str, raw: RawSpec) -> Result<SystemSpec, CliError> {
    let gaps = raw
        .gaps
        .ok_or_else(|| CliError::parse("string spec needs \"gaps\"".into(), None))?
        .iter()
        .map(real)
        .collect::<Result<Vec<f64>, String>>()
        .map_err(|e| CliError::parse(e, line_of(text, "gaps", 0)))?;
    let ratios = raw
        .ratios
        .ok_or_else(|| CliError::parse("string spec needs \"ratios\"".into(), None))?
        .iter()
        .map(|r| Ratio::parse(r))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::parse(e.to_string(), line_of(text, "ratios", 0)))?;
    let generator = StringGenerator::new(gaps, ratios).map_err(|e| CliError::parse(e.to_string(), line_of(text, "ratios", 0)))?;
    Ok(SystemSpec {
        name: raw.name,
        model: Model::String(generator),
    })
}

fn real(v: &Real) -> Result<f64, String> {
    match v {
        Real::Number(x) => Ok(*x),
        Real::Text(t) => {
            let t = t.trim();
            let parsed = match t.split_once('/') {
                Some((p, q)) => p.trim().parse::<f64>().ok().zip(q.trim().parse::<f64>().ok()).map(|(p, q)| p / q),
                None => t.parse().ok(),
            };
            parsed.filter(|x| x.is_finite()).ok_or_else(|| format!("cannot parse number {t:?}"))
        }
    }
}

/// 1-based line of the `nth` occurrence of `"key"` in the document.
fn line_of(text: &str, key: &str, nth: usize) -> Option<usize> {
    let needle = format!("\"{key}\"");
    let offset = text.match_indices(&needle).nth(nth)?.0;
    Some(text[..offset].matches('\n').count() + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use complexdim::scale::RatioForm;

    #[test]
    fn builtins_parse() {
        for name in builtin_names() {
            let spec = parse_spec(builtin_text(name).unwrap()).unwrap();
            assert_eq!(spec.name.as_deref(), Some(name));
        }
    }

    #[test]
    fn golden_keeps_power_form() {
        let spec = parse_spec(builtin_text("golden").unwrap()).unwrap();
        let r = &spec.ratios()[1];
        assert_eq!(
            r.form(),
            &RatioForm::Power {
                base: 2.0,
                exponent: -1.6180339887498949
            }
        );
    }

    #[test]
    fn rejects_unit_ratio_with_line() {
        let text = "{\n  \"maps\": [\n    {\"ratio\": \"1/3\", \"translation\": [0]},\n    {\"ratio\": \"1.0\", \"translation\": [1]}\n  ]\n}";
        let err = parse_spec(text).unwrap_err();
        assert_eq!(err.line, Some(4));
        assert!(err.message.contains("not in (0, 1)"), "{}", err.message);
    }

    #[test]
    fn rejects_bad_rotation_and_single_map() {
        let rot = r#"{"maps": [{"ratio": "1/2", "rotation": [[1, 1], [0, 1]], "translation": [0, 0]},
                                {"ratio": "1/2", "translation": [1, 0]}]}"#;
        assert!(parse_spec(rot).unwrap_err().message.contains("orthonormal"));
        let one = r#"{"maps": [{"ratio": "1/2", "translation": [0]}]}"#;
        assert!(parse_spec(one).is_err());
        let broken = "{\n \"maps\": [\n";
        assert!(parse_spec(broken).unwrap_err().line.is_some());
    }

    #[test]
    fn round_trip() {
        let spec = parse_spec(builtin_text("sierpinski").unwrap()).unwrap();
        let again = parse_spec(&spec.to_json().to_string()).unwrap();
        match (spec.model, again.model) {
            (Model::System(a), Model::System(b)) => assert_eq!(a, b),
            _ => panic!("kind changed"),
        }
    }
}
