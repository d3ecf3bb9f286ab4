//! Finite metric trees: geodesic segments glued at vertices.

use std::collections::{HashMap, VecDeque};
use std::path::Path;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::Geometry;
use crate::error::{Error, Result};

/// Offsets within this distance of an endpoint are treated as the vertex.
const VERTEX_SNAP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeEdge {
    pub from: usize,
    pub to: usize,
    pub length: f64,
}

/// A point at distance `offset` from `edges[edge].from` along `edge`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreePoint {
    pub edge: usize,
    pub offset: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum VertexRef {
    Index(usize),
    Name(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum VertexName {
    Number(u64),
    Name(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeFile {
    from: VertexRef,
    to: VertexRef,
    length: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct TreeFile {
    vertices: Vec<VertexName>,
    edges: Vec<EdgeFile>,
}

/// A finite metric tree with precomputed vertex distances and paths.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricTree {
    names: Vec<String>,
    edges: Vec<TreeEdge>,
    incident: Vec<Vec<usize>>,
    vdist: Vec<Vec<f64>>,
    // parent[src][v]: (previous vertex, edge) on the path src -> v
    parent: Vec<Vec<Option<(usize, usize)>>>,
}

impl Serialize for MetricTree {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Out<'a> {
            vertices: &'a [String],
            edges: &'a [TreeEdge],
        }
        Out {
            vertices: &self.names,
            edges: &self.edges,
        }
        .serialize(s)
    }
}

impl MetricTree {
    /// Builds a tree, checking that the graph is connected and acyclic and
    /// that all lengths are positive.
    pub fn new(names: Vec<String>, edges: Vec<TreeEdge>) -> Result<Self> {
        let n = names.len();
        if n == 0 {
            return Err(Error::domain("tree needs at least one vertex"));
        }
        if edges.len() + 1 != n {
            return Err(Error::domain(format!(
                "a tree on {n} vertices has {} edges, got {}",
                n - 1,
                edges.len()
            )));
        }
        let mut incident = vec![Vec::new(); n];
        for (k, e) in edges.iter().enumerate() {
            if e.from >= n || e.to >= n {
                return Err(Error::domain(format!(
                    "edge {k} references a missing vertex"
                )));
            }
            if e.from == e.to {
                return Err(Error::domain(format!("edge {k} is a loop")));
            }
            if !(e.length > 0.0 && e.length.is_finite()) {
                return Err(Error::domain(format!("edge {k} has non-positive length")));
            }
            incident[e.from].push(k);
            incident[e.to].push(k);
        }
        let mut vdist = vec![vec![f64::INFINITY; n]; n];
        let mut parent = vec![vec![None; n]; n];
        for src in 0..n {
            vdist[src][src] = 0.0;
            let mut queue = VecDeque::from([src]);
            let mut seen = vec![false; n];
            seen[src] = true;
            while let Some(u) = queue.pop_front() {
                for &k in &incident[u] {
                    let e = edges[k];
                    let v = if e.from == u { e.to } else { e.from };
                    if !seen[v] {
                        seen[v] = true;
                        vdist[src][v] = vdist[src][u] + e.length;
                        parent[src][v] = Some((u, k));
                        queue.push_back(v);
                    }
                }
            }
            if seen.iter().any(|s| !s) {
                return Err(Error::domain("tree is not connected"));
            }
        }
        Ok(Self {
            names,
            edges,
            incident,
            vdist,
            parent,
        })
    }

    /// Parses `{"vertices": [...], "edges": [{"from", "to", "length"}]}`;
    /// endpoints may be vertex names or indices.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: TreeFile = serde_json::from_str(text)?;
        let names: Vec<String> = file
            .vertices
            .iter()
            .map(|v| match v {
                VertexName::Number(k) => k.to_string(),
                VertexName::Name(s) => s.clone(),
            })
            .collect();
        let lookup: HashMap<&str, usize> = names
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();
        if lookup.len() != names.len() {
            return Err(Error::domain("duplicate vertex names"));
        }
        let resolve = |r: &VertexRef| -> Result<usize> {
            match r {
                VertexRef::Index(i) => match lookup.get(i.to_string().as_str()) {
                    Some(&k) => Ok(k),
                    None if *i < names.len() => Ok(*i),
                    None => Err(Error::domain(format!("unknown vertex {i}"))),
                },
                VertexRef::Name(s) => lookup
                    .get(s.as_str())
                    .copied()
                    .ok_or_else(|| Error::domain(format!("unknown vertex {s:?}"))),
            }
        };
        let mut edges = Vec::with_capacity(file.edges.len());
        for e in &file.edges {
            edges.push(TreeEdge {
                from: resolve(&e.from)?,
                to: resolve(&e.to)?,
                length: e.length,
            });
        }
        Self::new(names, edges)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// A star with `arms` edges of the given length around vertex `0`.
    pub fn star(arms: usize, length: f64) -> Result<Self> {
        let names = (0..=arms).map(|k| k.to_string()).collect();
        let edges = (1..=arms)
            .map(|k| TreeEdge {
                from: 0,
                to: k,
                length,
            })
            .collect();
        Self::new(names, edges)
    }

    pub fn vertex_count(&self) -> usize {
        self.names.len()
    }

    pub fn edges(&self) -> &[TreeEdge] {
        &self.edges
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn degree(&self, v: usize) -> usize {
        self.incident[v].len()
    }

    pub fn vertex_distance(&self, u: usize, v: usize) -> f64 {
        self.vdist[u][v]
    }

    /// Canonical representative of a vertex: the lowest incident edge.
    pub fn vertex_point(&self, v: usize) -> Option<TreePoint> {
        let &k = self.incident[v].iter().min()?;
        let e = self.edges[k];
        Some(TreePoint {
            edge: k,
            offset: if e.from == v { 0.0 } else { e.length },
        })
    }

    /// The vertex a point sits on, if any.
    pub fn as_vertex(&self, p: &TreePoint) -> Option<usize> {
        let e = self.edges[p.edge];
        if p.offset <= VERTEX_SNAP {
            Some(e.from)
        } else if p.offset >= e.length - VERTEX_SNAP {
            Some(e.to)
        } else {
            None
        }
    }

    pub fn canonical(&self, p: TreePoint) -> TreePoint {
        match self.as_vertex(&p) {
            Some(v) => self.vertex_point(v).unwrap_or(p),
            None => p,
        }
    }

    fn point_vertex_distance(&self, p: &TreePoint, v: usize) -> f64 {
        let e = self.edges[p.edge];
        (p.offset + self.vdist[e.from][v]).min(e.length - p.offset + self.vdist[e.to][v])
    }

    /// Exit vertex of `p`'s edge, entry vertex of `q`'s edge and the length.
    fn route(&self, p: &TreePoint, q: &TreePoint) -> (usize, usize, f64) {
        let e = self.edges[p.edge];
        let f = self.edges[q.edge];
        let mut best = (e.from, f.from, f64::INFINITY);
        for (a, da) in [(e.from, p.offset), (e.to, e.length - p.offset)] {
            for (b, db) in [(f.from, q.offset), (f.to, f.length - q.offset)] {
                let total = da + self.vdist[a][b] + db;
                if total < best.2 {
                    best = (a, b, total);
                }
            }
        }
        best
    }

    /// Edge-by-edge segments `(edge, start offset, end offset)` from `p` to `q`.
    fn segments(&self, p: &TreePoint, q: &TreePoint) -> Vec<(usize, f64, f64)> {
        if p.edge == q.edge {
            return vec![(p.edge, p.offset, q.offset)];
        }
        let (a, b, _) = self.route(p, q);
        let end_offset = |k: usize, v: usize| {
            if self.edges[k].from == v {
                0.0
            } else {
                self.edges[k].length
            }
        };
        let mut out = vec![(p.edge, p.offset, end_offset(p.edge, a))];
        let mut path = Vec::new();
        let mut v = b;
        while v != a {
            let (u, k) = self.parent[a][v].expect("connected tree");
            path.push((u, v, k));
            v = u;
        }
        for &(u, v, k) in path.iter().rev() {
            out.push((k, end_offset(k, u), end_offset(k, v)));
        }
        out.push((q.edge, end_offset(q.edge, b), q.offset));
        out
    }

    /// Exact weighted barycenter: minimise `Σ w_i d²(x, p_i)` edge by edge.
    fn exact_barycenter(&self, points: &[TreePoint], weights: &[f64]) -> TreePoint {
        let total: f64 = weights.iter().sum();
        let mut best = (f64::INFINITY, points[0]);
        for (k, e) in self.edges.iter().enumerate() {
            // on edge k, d(x, p_i) = |s - m_i| for a signed position m_i
            let mut sum = 0.0;
            let positions: Vec<f64> = points
                .iter()
                .map(|p| {
                    if p.edge == k {
                        p.offset
                    } else {
                        let df = self.point_vertex_distance(p, e.from);
                        let dt = self.point_vertex_distance(p, e.to);
                        if df <= dt {
                            -df
                        } else {
                            e.length + dt
                        }
                    }
                })
                .collect();
            for (m, w) in positions.iter().zip(weights) {
                sum += w * m;
            }
            let s = (sum / total).clamp(0.0, e.length);
            let cost: f64 = positions
                .iter()
                .zip(weights)
                .map(|(m, w)| w * (s - m).powi(2))
                .sum();
            if cost < best.0 - 1e-15 {
                best = (cost, TreePoint { edge: k, offset: s });
            }
        }
        self.canonical(best.1)
    }
}

impl Geometry for MetricTree {
    type Point = TreePoint;

    fn name(&self) -> &'static str {
        "tree"
    }

    fn distance(&self, p: &TreePoint, q: &TreePoint) -> f64 {
        if p.edge == q.edge {
            return (p.offset - q.offset).abs();
        }
        self.route(p, q).2
    }

    fn geodesic(&self, p: &TreePoint, q: &TreePoint, t: f64) -> TreePoint {
        let t = t.clamp(0.0, 1.0);
        let segments = self.segments(p, q);
        let total: f64 = segments.iter().map(|(_, a, b)| (b - a).abs()).sum();
        let mut remaining = t * total;
        for &(k, a, b) in &segments {
            let len = (b - a).abs();
            if remaining <= len {
                let offset = if len > 0.0 {
                    a + (b - a) * (remaining / len)
                } else {
                    a
                };
                return self.canonical(TreePoint { edge: k, offset });
            }
            remaining -= len;
        }
        self.canonical(*q)
    }

    fn barycenter(&self, points: &[TreePoint], weights: &[f64]) -> TreePoint {
        self.exact_barycenter(points, weights)
    }

    fn relax_update(
        &self,
        _x: &TreePoint,
        neighbors: &[TreePoint],
        weights: &[f64],
        _omega: f64,
    ) -> TreePoint {
        self.exact_barycenter(neighbors, weights)
    }

    fn validate(&self, p: &TreePoint) -> Result<()> {
        let e = self
            .edges
            .get(p.edge)
            .ok_or_else(|| Error::invalid(format!("edge {} does not exist", p.edge)))?;
        if !(p.offset >= 0.0 && p.offset <= e.length) {
            return Err(Error::invalid(format!(
                "offset {} outside edge {} of length {}",
                p.offset, p.edge, e.length
            )));
        }
        Ok(())
    }

    fn coords(&self, p: &TreePoint) -> Vec<f64> {
        vec![p.edge as f64, p.offset]
    }

    fn base_point(&self) -> TreePoint {
        TreePoint {
            edge: 0,
            offset: 0.0,
        }
    }

    fn sample_point(&self, rng: &mut dyn RngCore, _radius: f64) -> TreePoint {
        let k = rng.gen_range(0..self.edges.len());
        let offset = rng.gen_range(0.0..=self.edges[k].length);
        TreePoint { edge: k, offset }
    }

    fn cat_kappa_supported(&self) -> bool {
        true
    }

    fn is_singleton(&self) -> bool {
        self.edges.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn tripod() -> MetricTree {
        MetricTree::from_json(
            r#"{"vertices":["c","a","b","d"],
                "edges":[{"from":"c","to":"a","length":1.0},
                         {"from":"c","to":"b","length":2.0},
                         {"from":"d","to":"c","length":1.5}]}"#,
        )
        .unwrap()
    }

    #[test]
    fn distances_through_center() {
        let t = tripod();
        let p = TreePoint {
            edge: 0,
            offset: 0.5,
        };
        let q = TreePoint {
            edge: 2,
            offset: 0.5,
        };
        // p is 0.5 from c; q is 1.0 from c
        assert_abs_diff_eq!(t.distance(&p, &q), 1.5, epsilon = 1e-15);
        let m = t.geodesic(&p, &q, 1.0 / 3.0);
        assert_eq!(t.as_vertex(&m), Some(0));
    }

    #[test]
    fn rejects_cycles_and_bad_lengths() {
        let bad = r#"{"vertices":[0,1,2],"edges":[{"from":0,"to":1,"length":1},{"from":1,"to":0,"length":1}]}"#;
        assert!(MetricTree::from_json(bad).is_err());
        let neg = r#"{"vertices":[0,1],"edges":[{"from":0,"to":1,"length":-1}]}"#;
        assert!(MetricTree::from_json(neg).is_err());
        let extra = r#"{"vertices":[0,1],"edges":[{"from":0,"to":1,"length":1}],"color":1}"#;
        assert!(MetricTree::from_json(extra).is_err());
    }

    #[test]
    fn barycenter_of_three_arms_is_center() {
        let t = MetricTree::star(3, 1.0).unwrap();
        let pts: Vec<TreePoint> = (0..3)
            .map(|k| TreePoint {
                edge: k,
                offset: 1.0,
            })
            .collect();
        let b = t.barycenter(&pts, &[1.0, 1.0, 1.0]);
        assert_eq!(t.as_vertex(&b), Some(0));
    }

    #[test]
    fn barycenter_pulled_along_heavy_arm() {
        let t = MetricTree::star(3, 1.0).unwrap();
        let pts: Vec<TreePoint> = (0..3)
            .map(|k| TreePoint {
                edge: k,
                offset: 1.0,
            })
            .collect();
        // weight 4 on arm 0: on that arm s* = (4 - 1 - 1) / 6
        let b = t.barycenter(&pts, &[4.0, 1.0, 1.0]);
        assert_eq!(b.edge, 0);
        assert_abs_diff_eq!(b.offset, 1.0 / 3.0, epsilon = 1e-14);
    }
}
