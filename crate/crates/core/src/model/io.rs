//! Framework file format.
//!
//! ```json
//! { "dimension": 2,
//!   "vertices": [[0, 0], [1, 0], ["1/2", "3/4"]],
//!   "members": [{"i": 1, "j": 2, "kind": "bar"}] }
//! ```
//!
//! Vertex ids are 1-based. Coordinates are JSON numbers or strings holding a
//! fraction `a/b` or a decimal.

use serde::Deserialize;
use serde_json::Value;

use super::coordinate::Literal;
use super::{Coordinate, Framework, Member, MemberKind};
use crate::error::{Error, Result};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFramework {
    dimension: usize,
    vertices: Vec<Vec<Value>>,
    members: Vec<RawMember>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMember {
    i: usize,
    j: usize,
    kind: MemberKind,
}

pub fn parse_framework(text: &str) -> Result<Framework> {
    let raw: RawFramework = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if raw.dimension == 0 {
        return Err(Error::Field {
            field: "dimension".into(),
            message: "must be at least 1".into(),
        });
    }
    let mut vertices = Vec::with_capacity(raw.vertices.len());
    for (v, point) in raw.vertices.into_iter().enumerate() {
        let mut coords = Vec::with_capacity(point.len());
        for (k, value) in point.into_iter().enumerate() {
            let field = || format!("vertices[{v}][{k}]");
            let c = match value {
                Value::Number(n) => Coordinate::from_json_number(n),
                Value::String(s) => Coordinate::from_text(&s),
                _ => None,
            }
            .ok_or_else(|| Error::Field {
                field: field(),
                message: "expected a number or a string of the form \"a/b\"".into(),
            })?;
            coords.push(c);
        }
        vertices.push(coords);
    }
    let mut members = Vec::with_capacity(raw.members.len());
    for (k, m) in raw.members.into_iter().enumerate() {
        if m.i == 0 || m.j == 0 {
            return Err(Error::Field {
                field: format!("members[{k}]"),
                message: "vertex ids are 1-based".into(),
            });
        }
        members.push(Member::new(m.i - 1, m.j - 1, m.kind));
    }
    Framework::new(raw.dimension, vertices, members)
}

/// Canonical text form: members sorted, coordinates emitted as given.
pub fn to_canonical_json(f: &Framework) -> String {
    let mut out = String::new();
    out.push_str(&format!("{{\n  \"dimension\": {},\n  \"vertices\": [", f.dimension()));
    for (v, point) in f.vertices().iter().enumerate() {
        out.push_str(if v == 0 { "\n    [" } else { ",\n    [" });
        let coords: Vec<String> = point.iter().map(coordinate_literal).collect();
        out.push_str(&coords.join(", "));
        out.push(']');
    }
    out.push_str(if f.vertex_count() == 0 { "],\n" } else { "\n  ],\n" });
    out.push_str("  \"members\": [");
    for (k, m) in f.members().iter().enumerate() {
        out.push_str(if k == 0 { "\n    " } else { ",\n    " });
        out.push_str(&format!(
            "{{\"i\": {}, \"j\": {}, \"kind\": \"{}\"}}",
            m.i + 1,
            m.j + 1,
            m.kind
        ));
    }
    out.push_str(if f.member_count() == 0 { "]\n}\n" } else { "\n  ]\n}\n" });
    out
}

fn coordinate_literal(c: &Coordinate) -> String {
    match c.literal() {
        Literal::Number(n) => n.to_string(),
        Literal::Text(s) => serde_json::to_string(s).expect("strings serialize"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn minimal_file() {
        let f = parse_framework(
            r#"{"dimension": 1, "vertices": [[0], [1]], "members": [{"i": 1, "j": 2, "kind": "bar"}]}"#,
        )
        .unwrap();
        assert_eq!((f.vertex_count(), f.member_count()), (2, 1));
    }

    #[test]
    fn duplicate_member_is_rejected() {
        let err = parse_framework(
            r#"{"dimension": 1, "vertices": [[0], [1]],
                "members": [{"i": 1, "j": 2, "kind": "bar"}, {"i": 2, "j": 1, "kind": "bar"}]}"#,
        )
        .unwrap_err();
        match err {
            Error::Invalid(d) => assert!(d[0].to_string().contains("1-2:bar")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn syntax_error_carries_position() {
        let err = parse_framework("{\n  \"dimension\": 2,\n  \"vertices\": [[0, 0],\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }), "{err:?}");
    }

    #[test]
    fn bad_coordinate_names_field() {
        let err = parse_framework(r#"{"dimension": 1, "vertices": [[true]], "members": []}"#).unwrap_err();
        assert!(matches!(err, Error::Field { ref field, .. } if field == "vertices[0][0]"));
    }

    #[test]
    fn canonical_form_round_trips() {
        let text = r#"{"dimension": 2, "vertices": [[0, 0.5], ["-1/2", "3"], [2, 1e-1]],
            "members": [{"i": 3, "j": 1, "kind": "strut"}, {"i": 1, "j": 2, "kind": "cable"}]}"#;
        let f = parse_framework(text).unwrap();
        let canonical = to_canonical_json(&f);
        let g = parse_framework(&canonical).unwrap();
        assert_eq!(f, g);
        assert_eq!(to_canonical_json(&g), canonical);
        assert!(canonical.contains("\"-1/2\""));
        assert_eq!(f.members()[0], Member::cable(0, 1));
    }
}
