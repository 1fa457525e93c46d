//! Canonical JSON instance format and deterministic real formatting.
//!
//! Instances are stored as
//! `{"groups": {"<id>": {"prior": p, "atoms": [[score, mass], ...]}, ...}}`.
//! Reading accepts any JSON number formatting; writing always emits 17
//! significant digits so outputs are byte-stable and round-trip exactly.

use crate::error::{Error, Result};
use crate::problem::{Group, GroupedProblem, ScoreDistribution};
use serde::Deserialize;
use std::collections::BTreeMap;

#[derive(Debug, Deserialize)]
struct InstanceFile {
    groups: BTreeMap<String, GroupFile>,
}

#[derive(Debug, Deserialize)]
struct GroupFile {
    prior: f64,
    atoms: Vec<(f64, f64)>,
}

/// Parse an instance document.
pub fn parse_instance(text: &str) -> Result<GroupedProblem<f64>> {
    let file: InstanceFile =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    build(file.groups)
}

/// Build a problem from an already-parsed `groups` JSON object.
pub fn groups_to_problem(groups: &serde_json::Value) -> Result<GroupedProblem<f64>> {
    let parsed: BTreeMap<String, GroupFile> =
        serde_json::from_value(groups.clone()).map_err(|e| Error::Parse(e.to_string()))?;
    build(parsed)
}

fn build(parsed: BTreeMap<String, GroupFile>) -> Result<GroupedProblem<f64>> {
    let mut groups = BTreeMap::new();
    for (id, g) in parsed {
        groups.insert(
            id,
            Group {
                prior: g.prior,
                dist: ScoreDistribution::new(g.atoms)?,
            },
        );
    }
    GroupedProblem::new(groups)
}

/// Seventeen-significant-digit decimal form of a real; parses back to the
/// identical `f64`.
pub fn real17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Minimal JSON string escaping for ids and labels.
pub fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 2);
    for ch in text.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out
}

/// The `{"<id>": {"prior": ..., "atoms": [...]}}` object of an instance,
/// with `indent` spaces of leading indentation per line.
pub fn write_groups(problem: &GroupedProblem<f64>, indent: usize) -> String {
    let pad = " ".repeat(indent);
    let mut out = String::from("{\n");
    let total = problem.group_count();
    for (idx, (id, group)) in problem.groups().enumerate() {
        out.push_str(&format!(
            "{pad}  \"{}\": {{\"prior\": {}, \"atoms\": [",
            escape(id),
            real17(group.prior)
        ));
        for (k, atom) in group.dist.atoms().iter().enumerate() {
            if k > 0 {
                out.push_str(", ");
            }
            out.push_str(&format!("[{}, {}]", real17(atom.score), real17(atom.mass)));
        }
        out.push_str("]}");
        if idx + 1 < total {
            out.push(',');
        }
        out.push('\n');
    }
    out.push_str(&format!("{pad}}}"));
    out
}

/// Serialize an instance in the canonical format (groups in id order,
/// reals at 17 significant digits, one group per line).
pub fn write_instance(problem: &GroupedProblem<f64>) -> String {
    format!("{{\n  \"groups\": {}\n}}\n", write_groups(problem, 2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_is_exact() {
        let text = r#"{"groups": {"a": {"prior": 0.25, "atoms": [[0.2, 1.0]]},
                                   "b": {"prior": 0.75, "atoms": [[0.8, 2.0], [0.3, 1.0]]}}}"#;
        let p = parse_instance(text).unwrap();
        let emitted = write_instance(&p);
        let p2 = parse_instance(&emitted).unwrap();
        assert_eq!(p, p2);
        assert_eq!(write_instance(&p2), emitted);
    }

    #[test]
    fn real17_roundtrips_f64() {
        for &x in &[0.1, 1.0 / 3.0, 0.35, 1e-12, 123456.789, 0.0] {
            let s = real17(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
    }

    #[test]
    fn rejects_bad_documents() {
        assert!(parse_instance("{}").is_err());
        assert!(parse_instance(r#"{"groups": {}}"#).is_err());
        assert!(
            parse_instance(r#"{"groups": {"g": {"prior": 1.0, "atoms": [[1.5, 1.0]]}}}"#)
                .is_err()
        );
    }
}
