//! Built-in curves and Johnson tables, plus small graph families used by tests.

use crate::arith::format_rational;
use crate::error::{Error, Result};
use crate::graph::{EdgeSpec, TropicalCurve, Vertex};
use crate::johnson::{JohnsonTable, Provenance};
use num_rational::BigRational;

/// Names accepted by [`builtin_graph`].
pub const BUILTIN_GRAPHS: &[&str] = &["k4", "tl3", "theta-w1", "theta0", "3-balloon"];

/// Names accepted by [`builtin_table`].
pub const BUILTIN_TABLES: &[&str] = &["k4", "tl3", "theta-w1", "3-balloon"];

fn graph_source(name: &str) -> Option<&'static str> {
    Some(match name {
        "k4" => include_str!("../data/k4.json"),
        "tl3" => include_str!("../data/tl3.json"),
        "theta-w1" => include_str!("../data/theta-w1.json"),
        "theta0" => include_str!("../data/theta0.json"),
        "3-balloon" => include_str!("../data/3-balloon.json"),
        _ => return None,
    })
}

fn table_source(name: &str) -> Option<&'static str> {
    Some(match name {
        "k4" => include_str!("../data/k4.table.json"),
        "tl3" => include_str!("../data/tl3.table.json"),
        "theta-w1" => include_str!("../data/theta-w1.table.json"),
        "3-balloon" => include_str!("../data/3-balloon.table.json"),
        _ => return None,
    })
}

/// A built-in curve with all edge lengths 1.
pub fn builtin_graph(name: &str) -> Result<TropicalCurve> {
    TropicalCurve::from_json(graph_source(name).ok_or_else(|| Error::UnknownBuiltin(name.into()))?)
}

/// The Johnson table shipped for a built-in curve.
pub fn builtin_table(name: &str) -> Result<JohnsonTable> {
    let mut t = JohnsonTable::from_json(table_source(name).ok_or_else(|| Error::UnknownBuiltin(name.into()))?)?;
    t.provenance = Provenance::Builtin;
    Ok(t)
}

/// Built-in curve with lengths given in edge order.
pub fn builtin_with_lengths(name: &str, lengths: &[i64]) -> Result<TropicalCurve> {
    let c = builtin_graph(name)?;
    let l: Vec<BigRational> = lengths.iter().map(|&x| BigRational::from_integer(x.into())).collect();
    c.with_lengths(&l)
}

fn curve(vertices: Vec<(String, u64)>, edges: Vec<(String, String, String, BigRational)>) -> Result<TropicalCurve> {
    TropicalCurve::new(
        vertices.into_iter().map(|(id, weight)| Vertex { id, weight }).collect(),
        edges.into_iter().map(|(id, a, b, length)| EdgeSpec { id, ends: [a, b], length }).collect(),
    )
}

/// Two vertices of the given weights joined by `lengths.len()` parallel edges.
pub fn banana(lengths: &[BigRational], weights: [u64; 2]) -> Result<TropicalCurve> {
    curve(
        vec![("u".into(), weights[0]), ("v".into(), weights[1])],
        lengths.iter().enumerate().map(|(i, l)| (format!("e{}", i + 1), "u".into(), "v".into(), l.clone())).collect(),
    )
}

/// Weight-0 theta graph.
pub fn theta0(lengths: [i64; 3]) -> Result<TropicalCurve> {
    banana(&lengths.map(|x| BigRational::from_integer(x.into())), [0, 0])
}

/// Chain of `pairs.len()` bananas: consecutive vertices `w0, w1, ...` joined by two edges.
pub fn chain_of_loops(pairs: &[(i64, i64)]) -> Result<TropicalCurve> {
    let vs = (0..=pairs.len()).map(|i| (format!("w{i}"), 0)).collect();
    let mut es = Vec::new();
    for (i, (a, b)) in pairs.iter().enumerate() {
        for (k, l) in [a, b].into_iter().enumerate() {
            es.push((
                format!("e{}", 2 * i + k + 1),
                format!("w{i}"),
                format!("w{}", i + 1),
                BigRational::from_integer((*l).into()),
            ));
        }
    }
    curve(vs, es)
}

/// Textual lengths in edge order, for CLI-style round trips.
pub fn lengths_arg(curve: &TropicalCurve) -> String {
    curve.lengths().iter().map(format_rational).collect::<Vec<_>>().join(",")
}
