//! JSON body-definition files.
//!
//! ```json
//! {"type": "polygon", "vertices": [[1.5, -0.5], [1.0, 1.0], [-0.5, 1.2]]}
//! {"type": "disk", "radius": 2.0}
//! {"type": "strip", "normal_angle": 0.3, "half_width": 1.0}
//! {"type": "intersection", "bodies": [ ... ]}
//! {"type": "whole_plane"}
//! ```
//!
//! Polygons list one half of their vertices, counterclockwise; the loader
//! appends the negated partners and validates the completed polygon.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::{ConvexBody2D, Point, Polygon};
use crate::error::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum BodySpec {
    Polygon { vertices: Vec<Point> },
    Disk { radius: f64 },
    Strip { normal_angle: f64, half_width: f64 },
    Intersection { bodies: Vec<BodySpec> },
    WholePlane,
}

/// Where a semantic error sits inside a body document.
#[derive(Debug, Clone, PartialEq)]
enum Location {
    /// `ordinal`-th occurrence of `key` in document order.
    Key { key: &'static str, ordinal: usize },
    /// `vertex`-th entry of the `ordinal`-th vertex list.
    Vertex { ordinal: usize, vertex: usize },
}

#[derive(Default)]
struct Counters {
    polygons: usize,
    disks: usize,
    strips: usize,
    intersections: usize,
}

impl BodySpec {
    pub fn build(&self) -> Result<ConvexBody2D, Error> {
        self.build_located(&mut Counters::default())
            .map_err(|(e, _)| e)
    }

    fn build_located(&self, counters: &mut Counters) -> Result<ConvexBody2D, (Error, Location)> {
        match self {
            BodySpec::Polygon { vertices } => {
                let ordinal = counters.polygons;
                counters.polygons += 1;
                Polygon::from_half(vertices)
                    .map(ConvexBody2D::Polygon)
                    .map_err(|e| {
                        let loc = match &e {
                            Error::InvalidVertex { index, .. } if !vertices.is_empty() => Location::Vertex {
                                ordinal,
                                vertex: index % vertices.len(),
                            },
                            _ => Location::Key {
                                key: "vertices",
                                ordinal,
                            },
                        };
                        let e = match e {
                            Error::InvalidVertex { index, reason } if !vertices.is_empty() => {
                                let half = vertices.len();
                                let reason = if index >= half {
                                    format!("mirrored partner of listed vertex {} {reason}", index - half)
                                } else {
                                    reason
                                };
                                Error::InvalidVertex {
                                    index: index % half,
                                    reason,
                                }
                            }
                            other => other,
                        };
                        (e, loc)
                    })
            }
            BodySpec::Disk { radius } => {
                let ordinal = counters.disks;
                counters.disks += 1;
                ConvexBody2D::disk(*radius).map_err(|e| (e, Location::Key { key: "radius", ordinal }))
            }
            BodySpec::Strip {
                normal_angle,
                half_width,
            } => {
                let ordinal = counters.strips;
                counters.strips += 1;
                ConvexBody2D::strip(*normal_angle, *half_width)
                    .map_err(|e| (e, Location::Key { key: "half_width", ordinal }))
            }
            BodySpec::Intersection { bodies } => {
                let ordinal = counters.intersections;
                counters.intersections += 1;
                if bodies.is_empty() {
                    return Err((
                        Error::InvalidBody("intersection needs at least one body".into()),
                        Location::Key { key: "bodies", ordinal },
                    ));
                }
                let built = bodies
                    .iter()
                    .map(|b| b.build_located(counters))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(ConvexBody2D::intersection_of(built))
            }
            BodySpec::WholePlane => Ok(ConvexBody2D::WholePlane),
        }
    }

    pub fn from_body(body: &ConvexBody2D) -> Self {
        match body {
            ConvexBody2D::Polygon(p) => BodySpec::Polygon {
                vertices: p.half_vertices().to_vec(),
            },
            ConvexBody2D::Disk(d) => BodySpec::Disk { radius: d.radius() },
            ConvexBody2D::Strip(s) => BodySpec::Strip {
                normal_angle: s.normal_angle(),
                half_width: s.half_width(),
            },
            ConvexBody2D::Intersection(bodies) => BodySpec::Intersection {
                bodies: bodies.iter().map(BodySpec::from_body).collect(),
            },
            ConvexBody2D::WholePlane => BodySpec::WholePlane,
        }
    }
}

/// A body-file problem with its 1-based source position.
#[derive(Debug, Clone, PartialEq)]
pub struct BodyFileError {
    pub line: usize,
    pub column: usize,
    pub message: String,
    /// The underlying geometric error, when the document parsed but did not validate.
    pub source: Option<Error>,
}

impl fmt::Display for BodyFileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for BodyFileError {}

/// Parses and validates a body document.
pub fn parse_body(text: &str) -> Result<ConvexBody2D, BodyFileError> {
    let spec: BodySpec = serde_json::from_str(text).map_err(|e| BodyFileError {
        line: e.line().max(1),
        column: e.column().max(1),
        message: e.to_string(),
        source: None,
    })?;
    spec.build_located(&mut Counters::default())
        .map_err(|(err, loc)| {
            let (line, column) = locate(text, &loc).unwrap_or((1, 1));
            BodyFileError {
                line,
                column,
                message: err.to_string(),
                source: Some(err),
            }
        })
}

fn locate(text: &str, loc: &Location) -> Option<(usize, usize)> {
    let (key, ordinal) = match loc {
        Location::Key { key, ordinal } => (*key, *ordinal),
        Location::Vertex { ordinal, .. } => ("vertices", *ordinal),
    };
    let needle = format!("\"{key}\"");
    let start = text.match_indices(&needle).nth(ordinal)?.0;
    let Location::Vertex { vertex, .. } = loc else {
        return Some(position(text, start));
    };
    let mut depth = 0usize;
    let mut seen = 0usize;
    for (offset, ch) in text[start..].char_indices() {
        match ch {
            '[' => {
                depth += 1;
                if depth == 2 {
                    if seen == *vertex {
                        return Some(position(text, start + offset));
                    }
                    seen += 1;
                }
            }
            ']' => {
                depth = depth.saturating_sub(1);
                if depth == 0 {
                    break;
                }
            }
            _ => {}
        }
    }
    Some(position(text, start))
}

fn position(text: &str, byte: usize) -> (usize, usize) {
    let before = &text[..byte];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(byte, |i| byte - i - 1) + 1;
    (line, column)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_each_variant() {
        let p = parse_body(r#"{"type":"polygon","vertices":[[1,-1],[1,1]]}"#).unwrap();
        assert_eq!(p, Polygon::square(1.0).unwrap().into());
        assert_eq!(
            parse_body(r#"{"type":"disk","radius":2}"#).unwrap(),
            ConvexBody2D::disk(2.0).unwrap()
        );
        assert_eq!(
            parse_body(r#"{"type":"strip","normal_angle":0.5,"half_width":1}"#).unwrap(),
            ConvexBody2D::strip(0.5, 1.0).unwrap()
        );
        assert_eq!(parse_body(r#"{"type":"whole_plane"}"#).unwrap(), ConvexBody2D::WholePlane);
        let i = parse_body(
            r#"{"type":"intersection","bodies":[{"type":"disk","radius":2},{"type":"strip","normal_angle":0,"half_width":1}]}"#,
        )
        .unwrap();
        assert!(matches!(i, ConvexBody2D::Intersection(ref b) if b.len() == 2));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = parse_body("{\n  \"type\": \"disk\",\n  \"radius\": ,\n}").unwrap_err();
        assert_eq!(err.line, 3);
        assert!(err.source.is_none());
        let err = parse_body(r#"{"type":"disk","radius":1,"extra":2}"#).unwrap_err();
        assert!(err.message.contains("extra"), "{}", err.message);
    }

    #[test]
    fn vertex_errors_point_at_the_offending_line() {
        let text = "{\n  \"type\": \"polygon\",\n  \"vertices\": [\n    [1.0, -1.0],\n    [1.0, 0.0],\n    [1.0, 1.0],\n    [-1.0, 1.0]\n  ]\n}\n";
        let err = parse_body(text).unwrap_err();
        assert_eq!(err.line, 5, "{err}");
        assert!(matches!(err.source, Some(Error::InvalidVertex { index: 1, .. })));
    }

    #[test]
    fn negative_radius_points_at_key() {
        let text = "{\"type\": \"intersection\", \"bodies\": [\n {\"type\": \"disk\", \"radius\": 1},\n {\"type\": \"disk\", \"radius\": -1}\n]}";
        let err = parse_body(text).unwrap_err();
        assert_eq!(err.line, 3, "{err}");
    }

    #[test]
    fn spec_roundtrip() {
        let body = ConvexBody2D::intersection_of([
            Polygon::regular(8, 1.7, 0.1).unwrap().into(),
            ConvexBody2D::strip(0.4, 1.2).unwrap(),
        ]);
        let json = serde_json::to_string(&BodySpec::from_body(&body)).unwrap();
        let back = parse_body(&json).unwrap();
        for i in 0..64 {
            let t = 0.1 * i as f64;
            let (a, b) = (body.radial_function(t), back.radial_function(t));
            assert!((a - b).abs() <= 1e-12 * a, "t={t}");
        }
    }
}
