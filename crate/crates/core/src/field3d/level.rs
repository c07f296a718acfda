// Copyright 2026 The capacitary Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Iso-surfaces by marching tetrahedra.
//!
//! Each cell is split into the six Freudenthal tetrahedra around its main
//! diagonal. The split is the same in every cell, so neighboring cells agree
//! on face diagonals and the extracted mesh is conforming. Vertices live on
//! lattice edges and are shared through the edge key.

use std::collections::HashMap;

use super::ScalarField3D;
use crate::error::{Error, Result};

/// `|Du|` below this multiple of the median flags a near-critical level.
pub const NEAR_CRITICAL_RATIO: f64 = 0.05;

/// Triangulated level set `{u = t}`.
#[derive(Debug, Clone)]
pub struct LevelSurface {
    pub t: f64,
    pub vertices: Vec<[f64; 3]>,
    pub triangles: Vec<[u32; 3]>,
    /// `|Du|_{g₀}` at each vertex.
    pub vertex_du: Vec<f64>,
    /// `g₀`-area of each triangle.
    pub triangle_area: Vec<f64>,
    /// Component index of each triangle.
    pub triangle_component: Vec<u32>,
    /// Euler characteristic of each connected component.
    pub euler: Vec<i64>,
    /// Smallest vertex `|Du|` over the median; below
    /// [`NEAR_CRITICAL_RATIO`] the level is treated as near-critical.
    pub du_margin: f64,
}

impl LevelSurface {
    pub fn component_count(&self) -> usize {
        self.euler.len()
    }

    pub fn area(&self) -> f64 {
        self.triangle_area.iter().sum()
    }

    pub fn near_critical(&self) -> bool {
        self.du_margin < NEAR_CRITICAL_RATIO
    }

    /// Mean of the vertex values of `|Du|` on each triangle.
    pub fn triangle_du(&self) -> Vec<f64> {
        self.triangles
            .iter()
            .map(|tri| tri.iter().map(|&v| self.vertex_du[v as usize]).sum::<f64>() / 3.0)
            .collect()
    }

    /// `∫ g(|Du|) dσ_{g₀}`, averaging `g` over triangle vertices.
    pub fn integrate<G: Fn(f64) -> f64>(&self, g: G) -> f64 {
        self.triangles
            .iter()
            .zip(&self.triangle_area)
            .map(|(tri, a)| a * tri.iter().map(|&v| g(self.vertex_du[v as usize])).sum::<f64>() / 3.0)
            .sum()
    }

    /// Largest over smallest distance of the vertices to their centroid.
    pub fn roundness(&self) -> f64 {
        let n = self.vertices.len() as f64;
        let mut c = [0.0; 3];
        for v in &self.vertices {
            for d in 0..3 {
                c[d] += v[d] / n;
            }
        }
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for v in &self.vertices {
            let r = super::dist(*v, c);
            lo = lo.min(r);
            hi = hi.max(r);
        }
        hi / lo
    }
}

/// Corner offsets of the six tetrahedra, as bit masks `x | y<<1 | z<<2`.
const TETS: [[usize; 4]; 6] = [
    [0, 1, 3, 7],
    [0, 1, 5, 7],
    [0, 2, 3, 7],
    [0, 2, 6, 7],
    [0, 4, 5, 7],
    [0, 4, 6, 7],
];

struct Builder<'a> {
    field: &'a ScalarField3D,
    t: f64,
    grads: HashMap<usize, Option<[f64; 3]>>,
    edge_vertex: HashMap<(usize, usize), u32>,
    vertices: Vec<[f64; 3]>,
    vertex_grad: Vec<[f64; 3]>,
    triangles: Vec<[u32; 3]>,
}

impl Builder<'_> {
    fn grad(&mut self, p: usize) -> Option<[f64; 3]> {
        let field = self.field;
        *self.grads.entry(p).or_insert_with(|| field.node_gradient(p))
    }

    fn vertex(&mut self, a: usize, b: usize) -> u32 {
        let key = (a.min(b), a.max(b));
        if let Some(&v) = self.edge_vertex.get(&key) {
            return v;
        }
        let (a, b) = key;
        let (ua, ub) = (self.field.values[a], self.field.values[b]);
        let s = ((self.t - ua) / (ub - ua)).clamp(0.0, 1.0);
        let (xa, xb) = (self.field.grid.point_of(a), self.field.grid.point_of(b));
        let x = std::array::from_fn(|d| xa[d] + s * (xb[d] - xa[d]));
        let g = match (self.grad(a), self.grad(b)) {
            (Some(ga), Some(gb)) => std::array::from_fn(|d| ga[d] + s * (gb[d] - ga[d])),
            (Some(g), None) | (None, Some(g)) => g,
            // Secant slope along the edge only; both ends touch inactive nodes.
            (None, None) => {
                let h = self.field.grid.h();
                let mut g = [0.0; 3];
                for d in 0..3 {
                    if (xb[d] - xa[d]).abs() > 0.5 * h {
                        g[d] = (ub - ua) / (xb[d] - xa[d]);
                    }
                }
                g
            }
        };
        let v = self.vertices.len() as u32;
        self.vertices.push(x);
        self.vertex_grad.push(g);
        self.edge_vertex.insert(key, v);
        v
    }
}

struct UnionFind(Vec<u32>);

impl UnionFind {
    fn find(&mut self, mut a: u32) -> u32 {
        while self.0[a as usize] != a {
            let p = self.0[self.0[a as usize] as usize];
            self.0[a as usize] = p;
            a = p;
        }
        a
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb) as usize] = ra.min(rb);
        }
    }
}

/// Extracts `{u = t}`. Fails with a truncation error when the surface
/// reaches the outer face of the grid, where it would be open.
pub fn extract_level(field: &ScalarField3D, t: f64) -> Result<LevelSurface> {
    let g = field.grid;
    let max_u = field.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(t > 0.0 && t < max_u) {
        return Err(Error::OutOfDomain { what: "level on the grid", value: t, lo: 0.0, hi: max_u });
    }
    let n = g.n;
    let offsets: [usize; 8] = std::array::from_fn(|c| (c & 1) + ((c >> 1) & 1) * n + ((c >> 2) & 1) * n * n);
    let mut b = Builder {
        field,
        t,
        grads: HashMap::new(),
        edge_vertex: HashMap::new(),
        vertices: Vec::new(),
        vertex_grad: Vec::new(),
        triangles: Vec::new(),
    };
    let mut touches_boundary = false;
    for k in 0..n - 1 {
        for j in 0..n - 1 {
            for i in 0..n - 1 {
                let base = g.index(i, j, k);
                let corners: [usize; 8] = std::array::from_fn(|c| base + offsets[c]);
                let below = corners.iter().filter(|&&p| field.values[p] < t).count();
                if below == 0 || below == 8 {
                    continue;
                }
                if i == 0 || j == 0 || k == 0 || i + 2 == n || j + 2 == n || k + 2 == n {
                    touches_boundary = true;
                }
                for tet in TETS {
                    let v = tet.map(|c| corners[c]);
                    let (ins, outs): (Vec<usize>, Vec<usize>) = v.iter().partition(|&&p| field.values[p] < t);
                    match (ins.len(), outs.len()) {
                        (1, 3) | (3, 1) => {
                            let (lone, rest) = if ins.len() == 1 { (ins[0], outs) } else { (outs[0], ins) };
                            let tri = [b.vertex(lone, rest[0]), b.vertex(lone, rest[1]), b.vertex(lone, rest[2])];
                            b.triangles.push(tri);
                        }
                        (2, 2) => {
                            let (a0, a1, c0, c1) = (ins[0], ins[1], outs[0], outs[1]);
                            let p00 = b.vertex(a0, c0);
                            let p01 = b.vertex(a0, c1);
                            let p11 = b.vertex(a1, c1);
                            let p10 = b.vertex(a1, c0);
                            b.triangles.push([p00, p01, p11]);
                            b.triangles.push([p00, p11, p10]);
                        }
                        _ => {}
                    }
                }
            }
        }
    }
    if touches_boundary {
        return Err(Error::Truncation(format!("level {t} reaches the grid boundary")));
    }
    let Builder { vertices, vertex_grad, triangles, .. } = b;
    let spec = &field.spec;
    let vertex_du: Vec<f64> = vertices
        .iter()
        .zip(&vertex_grad)
        .map(|(x, gr)| (gr[0] * gr[0] + gr[1] * gr[1] + gr[2] * gr[2]).sqrt() / spec.w(*x).powi(2))
        .collect();
    let triangle_area: Vec<f64> = triangles
        .iter()
        .map(|tri| {
            let [a, b, c] = tri.map(|v| vertices[v as usize]);
            let e1 = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
            let e2 = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
            let cr = [e1[1] * e2[2] - e1[2] * e2[1], e1[2] * e2[0] - e1[0] * e2[2], e1[0] * e2[1] - e1[1] * e2[0]];
            let centroid = std::array::from_fn(|d| (a[d] + b[d] + c[d]) / 3.0);
            0.5 * (cr[0] * cr[0] + cr[1] * cr[1] + cr[2] * cr[2]).sqrt() * spec.w(centroid).powi(4)
        })
        .collect();

    // Every edge of a closed surface borders exactly two triangles.
    let mut edges: HashMap<(u32, u32), u32> = HashMap::new();
    let mut uf = UnionFind((0..vertices.len() as u32).collect());
    for tri in &triangles {
        for e in 0..3 {
            let (a, c) = (tri[e], tri[(e + 1) % 3]);
            *edges.entry((a.min(c), a.max(c))).or_insert(0) += 1;
            uf.union(a, c);
        }
    }
    if let Some(((a, c), count)) = edges.iter().find(|(_, c)| **c != 2) {
        return Err(Error::Truncation(format!(
            "level {t} mesh is not closed: edge ({a}, {c}) borders {count} triangles"
        )));
    }
    let mut roots: Vec<u32> = (0..vertices.len() as u32).map(|v| uf.find(v)).collect();
    let mut labels: HashMap<u32, u32> = HashMap::new();
    let mut order: Vec<u32> = roots.clone();
    order.sort_unstable();
    order.dedup();
    for (i, r) in order.iter().enumerate() {
        labels.insert(*r, i as u32);
    }
    for r in roots.iter_mut() {
        *r = labels[r];
    }
    let mut euler = vec![0i64; order.len()];
    for r in &roots {
        euler[*r as usize] += 1;
    }
    for (a, _) in edges.keys() {
        euler[roots[*a as usize] as usize] -= 1;
    }
    let triangle_component: Vec<u32> = triangles.iter().map(|tri| roots[tri[0] as usize]).collect();
    for c in &triangle_component {
        euler[*c as usize] += 1;
    }

    let mut sorted = vertex_du.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    let du_margin = sorted[0] / median;
    Ok(LevelSurface { t, vertices, vertex_du, triangles, triangle_area, triangle_component, euler, du_margin })
}
