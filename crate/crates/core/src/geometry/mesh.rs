//! Triangle meshes of planar polygons with tagged boundary edges.
//!
//! Text format, one entity per line, whitespace separated, `#` starts a
//! comment:
//!
//! ```text
//! v <x> <y>            vertex (indices count from 0 in file order)
//! t <i> <j> <k>        triangle, counter-clockwise
//! e <i> <j> <tag>      boundary edge with a tag
//! ```

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryEdge {
    pub vertices: [usize; 2],
    pub tag: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Mesh2D {
    pub vertices: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary_edges: Vec<BoundaryEdge>,
}

impl Mesh2D {
    pub fn triangle_vertices(&self, t: usize) -> [[f64; 2]; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    /// Signed area, positive for counter-clockwise orientation.
    pub fn triangle_area(&self, t: usize) -> f64 {
        let [p0, p1, p2] = self.triangle_vertices(t);
        0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]))
    }

    pub fn triangle_centroid(&self, t: usize) -> [f64; 2] {
        let [p0, p1, p2] = self.triangle_vertices(t);
        [(p0[0] + p1[0] + p2[0]) / 3.0, (p0[1] + p1[1] + p2[1]) / 3.0]
    }

    pub fn tags(&self) -> Vec<&str> {
        let mut tags: Vec<&str> = Vec::new();
        for e in &self.boundary_edges {
            if !tags.contains(&e.tag.as_str()) {
                tags.push(&e.tag);
            }
        }
        tags
    }

    /// Checks orientation, connectivity and that the tagged edges are
    /// exactly the topological boundary.
    pub fn validate(&self) -> Result<()> {
        if self.triangles.is_empty() {
            return Err(Error::InvalidMesh("mesh has no triangles".into()));
        }
        let nv = self.vertices.len();
        for (t, tri) in self.triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= nv) {
                return Err(Error::InvalidMesh(format!("triangle {t} references a missing vertex")));
            }
            if !(self.triangle_area(t) > 0.0) {
                return Err(Error::InvalidMesh(format!("triangle {t} has non-positive signed area")));
            }
        }

        let key = |a: usize, b: usize| if a < b { (a, b) } else { (b, a) };
        let mut edge_uses: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (t, &[a, b, c]) in self.triangles.iter().enumerate() {
            for (p, q) in [(a, b), (b, c), (c, a)] {
                edge_uses.entry(key(p, q)).or_default().push(t);
            }
        }
        if let Some((e, _)) = edge_uses.iter().find(|(_, ts)| ts.len() > 2) {
            return Err(Error::InvalidMesh(format!("edge {e:?} is shared by more than two triangles")));
        }

        // Connectivity through shared edges.
        let mut adjacency = vec![Vec::new(); self.triangles.len()];
        for ts in edge_uses.values() {
            if let [a, b] = ts[..] {
                adjacency[a].push(b);
                adjacency[b].push(a);
            }
        }
        let mut seen = vec![false; self.triangles.len()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(t) = stack.pop() {
            for &u in &adjacency[t] {
                if !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidMesh("mesh is not connected".into()));
        }

        let topological: HashSet<(usize, usize)> = edge_uses
            .iter()
            .filter(|(_, ts)| ts.len() == 1)
            .map(|(e, _)| *e)
            .collect();
        let mut tagged = HashSet::new();
        for e in &self.boundary_edges {
            let [a, b] = e.vertices;
            let k = key(a, b);
            if !topological.contains(&k) {
                return Err(Error::InvalidMesh(format!(
                    "tagged edge ({a}, {b}) is not a boundary edge"
                )));
            }
            if !tagged.insert(k) {
                return Err(Error::InvalidMesh(format!("boundary edge ({a}, {b}) is tagged twice")));
            }
        }
        if tagged.len() != topological.len() {
            return Err(Error::InvalidMesh(format!(
                "{} boundary edges are untagged",
                topological.len() - tagged.len()
            )));
        }
        Ok(())
    }
}

pub fn parse_mesh(text: &str) -> Result<Mesh2D> {
    let mut mesh = Mesh2D::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| Error::MeshParse {
            line: lineno + 1,
            message,
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        let num = |s: &str| s.parse::<f64>().map_err(|e| err(format!("bad number '{s}': {e}")));
        let idx = |s: &str| s.parse::<usize>().map_err(|e| err(format!("bad index '{s}': {e}")));
        match fields[0] {
            "v" if fields.len() == 3 => mesh.vertices.push([num(fields[1])?, num(fields[2])?]),
            "t" if fields.len() == 4 => {
                mesh.triangles
                    .push([idx(fields[1])?, idx(fields[2])?, idx(fields[3])?])
            }
            "e" if fields.len() == 4 => mesh.boundary_edges.push(BoundaryEdge {
                vertices: [idx(fields[1])?, idx(fields[2])?],
                tag: fields[3].to_string(),
            }),
            "v" | "t" | "e" => return Err(err(format!("wrong number of fields for '{}'", fields[0]))),
            other => return Err(err(format!("unknown record '{other}'"))),
        }
    }
    Ok(mesh)
}

pub fn write_mesh(mesh: &Mesh2D) -> String {
    let mut out = String::new();
    for v in &mesh.vertices {
        let _ = writeln!(out, "v {:?} {:?}", v[0], v[1]);
    }
    for t in &mesh.triangles {
        let _ = writeln!(out, "t {} {} {}", t[0], t[1], t[2]);
    }
    for e in &mesh.boundary_edges {
        let _ = writeln!(out, "e {} {} {}", e.vertices[0], e.vertices[1], e.tag);
    }
    out
}
