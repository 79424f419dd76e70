//! JSON documents for grids, borders, puzzles and certificates.
//!
//! Grid arguments are either inline (`three_side:3`, `parallelogram:2,2`,
//! `hexagon:1,1,1,1,1,1`), a JSON document, or a path to one. JSON grids
//! take one of the shapes `{"three_side": n}`, `{"parallelogram": [p, q]}`,
//! `{"polygon": [s1, …, s6]}` or `{"triangles": ["N(0,0)", …]}`.

use std::collections::BTreeSet;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::cocirc::BoundaryData;
use crate::dualflow;
use crate::feasibility::VConfiguration;
use crate::grid::{self, ConvexGrid, GridError, LittleTriangle};
use crate::puzzle::{self, Puzzle};
use crate::rational::{self, Rational};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {message}")]
    Json { path: String, message: String },
    #[error("cannot read {path}: {message}")]
    Read { path: String, message: String },
    #[error("bad grid spec {0:?}")]
    Spec(String),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("{0}")]
    Domain(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum GridDoc {
    ThreeSide(i64),
    Parallelogram([i64; 2]),
    Polygon([i64; 6]),
    Triangles(#[serde(with = "triangle_strings")] BTreeSet<LittleTriangle>),
}

mod triangle_strings {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(ts: &BTreeSet<LittleTriangle>, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(ts.iter().map(ToString::to_string))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeSet<LittleTriangle>, D::Error> {
        Vec::<String>::deserialize(d)?.iter().map(|s| s.parse().map_err(serde::de::Error::custom)).collect()
    }
}

impl GridDoc {
    pub fn build(&self) -> Result<ConvexGrid, GridError> {
        match self {
            GridDoc::ThreeSide(n) => grid::build_three_side_grid(*n),
            GridDoc::Parallelogram([p, q]) => grid::build_parallelogram(*p, *q),
            GridDoc::Polygon(s) => grid::build_polygon(*s),
            GridDoc::Triangles(ts) => grid::build_from_triangles(ts.iter().copied()),
        }
    }

    /// Canonical form: the triangle list.
    pub fn of(grid: &ConvexGrid) -> Self {
        GridDoc::Triangles(grid.triangles().iter().copied().collect())
    }
}

/// Deserializes with JSON-pointer-like error paths.
pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T, IoError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        IoError::Json { path: if path == "." { "/".into() } else { path }, message: e.into_inner().to_string() }
    })
}

/// Inline JSON when the argument looks like JSON, file contents otherwise.
pub fn read_arg(arg: &str) -> Result<String, IoError> {
    let t = arg.trim_start();
    if t.starts_with('{') || t.starts_with('[') {
        return Ok(arg.to_string());
    }
    std::fs::read_to_string(Path::new(arg)).map_err(|e| IoError::Read { path: arg.into(), message: e.to_string() })
}

fn ints(s: &str) -> Option<Vec<i64>> {
    s.split(',').map(|x| x.trim().parse().ok()).collect()
}

pub fn parse_grid_spec(arg: &str) -> Result<GridDoc, IoError> {
    let inline = arg.split_once(':').filter(|(k, _)| k.chars().all(|c| c.is_ascii_lowercase() || c == '_'));
    if let Some((kind, rest)) = inline {
        let v = ints(rest).ok_or_else(|| IoError::Spec(arg.into()))?;
        return match (kind.trim(), v.as_slice()) {
            ("three_side", &[n]) => Ok(GridDoc::ThreeSide(n)),
            ("parallelogram", &[p, q]) => Ok(GridDoc::Parallelogram([p, q])),
            ("hexagon" | "polygon", s) if s.len() == 6 => Ok(GridDoc::Polygon(s.try_into().expect("six sides"))),
            _ => Err(IoError::Spec(arg.into())),
        };
    }
    from_json(&read_arg(arg)?)
}

pub fn parse_grid(arg: &str) -> Result<ConvexGrid, IoError> {
    Ok(parse_grid_spec(arg)?.build()?)
}

/// A border document, checked to cover exactly the outer edges.
pub fn parse_border(grid: &ConvexGrid, text: &str) -> Result<BoundaryData, IoError> {
    let sigma: BoundaryData = from_json(text)?;
    sigma.to_vec(grid).map_err(|e| IoError::Domain(e.to_string()))?;
    Ok(sigma)
}

pub fn parse_rational(text: &str) -> Result<Rational, IoError> {
    rational::parse(text).map_err(IoError::Domain)
}

/// A puzzle document, checked against the validator.
pub fn parse_puzzle(grid: &ConvexGrid, text: &str) -> Result<Puzzle, IoError> {
    let p: Puzzle = from_json(text)?;
    puzzle::validate_puzzle(grid, &p).map_err(|v| IoError::Domain(format!("{:?}: {}", v.clause, v.detail)))?;
    Ok(p)
}

pub fn to_json<T: Serialize>(value: &T) -> Value {
    serde_json::to_value(value).expect("documents serialize")
}

/// Certificate document with its path decomposition.
pub fn certificate_doc(grid: &ConvexGrid, k: &VConfiguration, violation: &Rational) -> Value {
    let paths = match dualflow::decompose_paths(grid, k) {
        Ok(ps) => Value::Array(
            ps.iter().map(|(p, w)| json!({"path": p.to_string(), "from": p.from, "to": p.to, "weight": w.to_string()})).collect(),
        ),
        Err(e) => json!({"error": e.to_string()}),
    };
    json!({
        "status": "infeasible",
        "certificate": to_json(k),
        "sigma_dot_d": rational::format(violation),
        "paths": paths,
    })
}

pub fn puzzle_doc(grid: &ConvexGrid, index: usize, p: &Puzzle) -> Value {
    let (plus, minus) = puzzle::boundary(grid, p);
    json!({
        "index": index,
        "triangles": p.triangles.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "paths": p.paths.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "b_plus": plus,
        "b_minus": minus,
        "puzzle": to_json(p),
    })
}

pub fn error_doc(message: impl std::fmt::Display) -> Value {
    json!({ "error": message.to_string() })
}
