//! Computational domains and structured, nested triangulations.
//!
//! Three equivalent descriptions of the broken guide are supported:
//!
//! * [`Formulation::ModelGuide`]: the half-guide of opening `pi/4` in `(u, v)`
//!   coordinates, with a Neumann condition on the symmetry axis `v = 0`.
//! * [`Formulation::ReferenceStrip`]: the fixed set `{-pi < x, 0 < y < pi, y < x + pi if x < 0}`
//!   carrying the anisotropic form `tan^2(theta) |d_x|^2 + |d_y|^2`.
//! * [`Formulation::FullGuide`]: the even reflection of the model half-guide across `v = 0`.
//!
//! All three meshes are produced from a single structured template (a triangle of
//! `n^2` cells glued to `m` periods of a sheared strip, each period holding `2 n^2`
//! cells) so they are exact images of each other and nest under [`refine`].

use std::collections::HashMap;
use std::f64::consts::{PI, SQRT_2};
use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Strip period `pi * sqrt(2)` of the model half-guide along `u`.
pub const MODEL_PERIOD: f64 = PI * SQRT_2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Formulation {
    ModelGuide,
    ReferenceStrip,
    FullGuide,
}

impl Formulation {
    /// Natural strip period along the guide axis.
    pub fn period(self) -> f64 {
        match self {
            Formulation::ReferenceStrip => PI,
            Formulation::ModelGuide | Formulation::FullGuide => MODEL_PERIOD,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Formulation::ModelGuide => "model",
            Formulation::ReferenceStrip => "reference",
            Formulation::FullGuide => "full",
        }
    }

    /// Coefficients `(c_x, c_y)` of the gradient form for the given half-opening.
    pub fn coefficients(self, theta: f64) -> (f64, f64) {
        match self {
            Formulation::ModelGuide | Formulation::FullGuide => {
                let (s, c) = theta.sin_cos();
                (2.0 * s * s, 2.0 * c * c)
            }
            Formulation::ReferenceStrip => {
                let t = theta.tan();
                (t * t, 1.0)
            }
        }
    }
}

impl FromStr for Formulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "model" | "modelguide" | "model-guide" | "half" => Ok(Formulation::ModelGuide),
            "reference" | "referencestrip" | "reference-strip" | "strip" => {
                Ok(Formulation::ReferenceStrip)
            }
            "full" | "fullguide" | "full-guide" => Ok(Formulation::FullGuide),
            other => Err(Error::Parse(format!("unknown formulation '{other}'"))),
        }
    }
}

/// Rejects half-openings outside the open interval `(0, pi/2)`.
pub fn check_angle(theta: f64) -> Result<()> {
    if theta.is_finite() && theta > 0.0 && theta < PI / 2.0 {
        Ok(())
    } else {
        Err(Error::InvalidAngle(theta))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DomainSpec {
    pub formulation: Formulation,
    pub theta: f64,
    /// Number of strip periods between the corner and the artificial boundary.
    pub length: usize,
}

impl DomainSpec {
    pub fn new(formulation: Formulation, theta: f64, length: usize) -> Result<Self> {
        let spec = DomainSpec { formulation, theta, length };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        check_angle(self.theta)?;
        if self.length < 1 {
            return Err(Error::InvalidLength(self.length));
        }
        Ok(())
    }

    /// Abscissa of the artificial boundary in the formulation's own coordinates.
    pub fn artificial_abscissa(&self) -> f64 {
        self.length as f64 * self.formulation.period()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundaryTag {
    Dirichlet,
    Neumann,
    Artificial,
}

impl BoundaryTag {
    pub fn code(self) -> char {
        match self {
            BoundaryTag::Dirichlet => 'D',
            BoundaryTag::Neumann => 'N',
            BoundaryTag::Artificial => 'A',
        }
    }

    pub fn from_code(c: &str) -> Result<Self> {
        match c {
            "D" => Ok(BoundaryTag::Dirichlet),
            "N" => Ok(BoundaryTag::Neumann),
            "A" => Ok(BoundaryTag::Artificial),
            other => Err(Error::Parse(format!("unknown boundary tag '{other}'"))),
        }
    }

    /// Essential (eliminated) boundary condition.
    pub fn is_essential(self) -> bool {
        !matches!(self, BoundaryTag::Neumann)
    }
}

/// Counterclockwise polygon; side `i` joins vertex `i` to vertex `i + 1`.
#[derive(Clone, Debug)]
pub struct Polygon {
    pub spec: DomainSpec,
    pub vertices: Vec<[f64; 2]>,
    pub side_tags: Vec<BoundaryTag>,
}

impl Polygon {
    pub fn signed_area(&self) -> f64 {
        let n = self.vertices.len();
        (0..n)
            .map(|i| {
                let a = self.vertices[i];
                let b = self.vertices[(i + 1) % n];
                a[0] * b[1] - b[0] * a[1]
            })
            .sum::<f64>()
            / 2.0
    }

    pub fn side(&self, i: usize) -> ([f64; 2], [f64; 2]) {
        (self.vertices[i], self.vertices[(i + 1) % self.vertices.len()])
    }
}

/// Assembles the boundary polygon of the requested domain.
pub fn build_domain(spec: &DomainSpec) -> Result<Polygon> {
    use BoundaryTag::*;
    spec.validate()?;
    let big_l = spec.artificial_abscissa();
    let (vertices, side_tags) = match spec.formulation {
        Formulation::ModelGuide => (
            vec![
                [-MODEL_PERIOD, 0.0],
                [0.0, 0.0],
                [big_l, big_l],
                [big_l, big_l + MODEL_PERIOD],
                [0.0, MODEL_PERIOD],
            ],
            vec![Neumann, Dirichlet, Artificial, Dirichlet, Dirichlet],
        ),
        Formulation::ReferenceStrip => (
            vec![[-PI, 0.0], [0.0, 0.0], [big_l, 0.0], [big_l, PI], [0.0, PI]],
            vec![Dirichlet, Dirichlet, Artificial, Dirichlet, Neumann],
        ),
        Formulation::FullGuide => (
            vec![
                [-MODEL_PERIOD, 0.0],
                [0.0, -MODEL_PERIOD],
                [big_l, -big_l - MODEL_PERIOD],
                [big_l, -big_l],
                [0.0, 0.0],
                [big_l, big_l],
                [big_l, big_l + MODEL_PERIOD],
                [0.0, MODEL_PERIOD],
            ],
            vec![
                Dirichlet, Dirichlet, Artificial, Dirichlet, Dirichlet, Artificial, Dirichlet,
                Dirichlet,
            ],
        ),
    };
    Ok(Polygon { spec: *spec, vertices, side_tags })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<[f64; 2]>,
    /// Counterclockwise vertex triples.
    pub triangles: Vec<[usize; 3]>,
    /// Boundary edges oriented with the domain on their left.
    pub boundary_edges: Vec<([usize; 2], BoundaryTag)>,
    /// Number of cells across one strip period.
    pub level: usize,
}

pub fn signed_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl Mesh {
    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        signed_area(self.vertices[a], self.vertices[b], self.vertices[c])
    }

    /// Unique undirected edges in first-seen order, with the number of adjacent triangles.
    pub fn edges(&self) -> Vec<((usize, usize), usize)> {
        let mut index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut out: Vec<((usize, usize), usize)> = Vec::new();
        for tri in &self.triangles {
            for k in 0..3 {
                let key = edge_key(tri[k], tri[(k + 1) % 3]);
                match index.get(&key) {
                    Some(&i) => out[i].1 += 1,
                    None => {
                        index.insert(key, out.len());
                        out.push((key, 1));
                    }
                }
            }
        }
        out
    }

    pub fn max_diameter(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                (0..3)
                    .map(|k| {
                        let a = self.vertices[t[k]];
                        let b = self.vertices[t[(k + 1) % 3]];
                        (a[0] - b[0]).hypot(a[1] - b[1])
                    })
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    /// Checks orientation, disk topology and the boundary tagging.
    pub fn validate(&self, polygon: Option<&Polygon>) -> Result<()> {
        for (t, _) in self.triangles.iter().enumerate() {
            let area = self.triangle_area(t);
            if !(area > 0.0) {
                return Err(Error::DegenerateElement { element: t, det: 2.0 * area });
            }
        }
        let edges = self.edges();
        let euler = self.vertices.len() as i64 - edges.len() as i64 + self.triangles.len() as i64;
        if euler != 1 {
            return Err(Error::InvalidParameter(format!(
                "mesh is not a topological disk (V - E + F = {euler})"
            )));
        }
        let mut boundary: HashMap<(usize, usize), usize> = edges
            .iter()
            .filter(|(_, count)| *count == 1)
            .map(|(key, _)| (*key, 0))
            .collect();
        for (e, _) in &self.boundary_edges {
            match boundary.get_mut(&edge_key(e[0], e[1])) {
                Some(seen) => *seen += 1,
                None => {
                    return Err(Error::InvalidParameter(format!(
                        "tagged edge {e:?} is not on the mesh boundary"
                    )))
                }
            }
        }
        if let Some((key, _)) = boundary.iter().find(|(_, seen)| **seen != 1) {
            return Err(Error::InvalidParameter(format!(
                "boundary edge {key:?} is not tagged exactly once"
            )));
        }
        if let Some(poly) = polygon {
            let mut covered = vec![0.0; poly.vertices.len()];
            for (e, tag) in &self.boundary_edges {
                let a = self.vertices[e[0]];
                let b = self.vertices[e[1]];
                let side = (0..poly.vertices.len()).find(|&s| {
                    let (p, q) = poly.side(s);
                    let scale = (q[0] - p[0]).hypot(q[1] - p[1]);
                    let on = |x: [f64; 2]| signed_area(p, q, x).abs() <= 1e-9 * scale * scale;
                    let along = |x: [f64; 2]| {
                        let s = ((x[0] - p[0]) * (q[0] - p[0]) + (x[1] - p[1]) * (q[1] - p[1]))
                            / (scale * scale);
                        (-1e-12..=1.0 + 1e-12).contains(&s)
                    };
                    on(a) && on(b) && along(a) && along(b)
                });
                match side {
                    Some(s) if poly.side_tags[s] == *tag => {
                        covered[s] += (b[0] - a[0]).hypot(b[1] - a[1]);
                    }
                    _ => {
                        return Err(Error::InvalidParameter(format!(
                            "boundary edge {e:?} does not lie on a polygon side tagged {tag:?}"
                        )))
                    }
                }
            }
            for (s, len) in covered.iter().enumerate() {
                let (p, q) = poly.side(s);
                let expected = (q[0] - p[0]).hypot(q[1] - p[1]);
                if (len - expected).abs() > 1e-9 * expected {
                    return Err(Error::InvalidParameter(format!(
                        "polygon side {s} covered by length {len}, expected {expected}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Plain-text export: `nv nt ne`, vertex lines, triangle lines, tagged edges.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{} {} {}",
            self.vertices.len(),
            self.triangles.len(),
            self.boundary_edges.len()
        );
        for v in &self.vertices {
            let _ = writeln!(s, "{:.16e} {:.16e}", v[0], v[1]);
        }
        for t in &self.triangles {
            let _ = writeln!(s, "{} {} {}", t[0], t[1], t[2]);
        }
        for (e, tag) in &self.boundary_edges {
            let _ = writeln!(s, "{} {} {}", e[0], e[1], tag.code());
        }
        s
    }

    /// Parses the format written by [`Mesh::to_text`]. The level is not stored and must be supplied.
    pub fn from_text(text: &str, level: usize) -> Result<Mesh> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let bad = |what: &str| Error::Parse(format!("mesh file: {what}"));
        let header: Vec<usize> = lines
            .next()
            .ok_or_else(|| bad("missing header"))?
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| bad("bad header")))
            .collect::<Result<_>>()?;
        let [nv, nt, ne] = header[..] else { return Err(bad("header must hold three counts")) };
        let mut mesh = Mesh { vertices: Vec::with_capacity(nv), triangles: Vec::with_capacity(nt), boundary_edges: Vec::with_capacity(ne), level };
        for _ in 0..nv {
            let line = lines.next().ok_or_else(|| bad("truncated vertices"))?;
            let xs: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| bad("bad coordinate")))
                .collect::<Result<_>>()?;
            let [x, y] = xs[..] else { return Err(bad("vertex line needs two values")) };
            mesh.vertices.push([x, y]);
        }
        for _ in 0..nt {
            let line = lines.next().ok_or_else(|| bad("truncated triangles"))?;
            let ids: Vec<usize> = line
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| bad("bad index")))
                .collect::<Result<_>>()?;
            let [a, b, c] = ids[..] else { return Err(bad("triangle line needs three indices")) };
            if a.max(b).max(c) >= nv {
                return Err(bad("triangle index out of range"));
            }
            mesh.triangles.push([a, b, c]);
        }
        for _ in 0..ne {
            let line = lines.next().ok_or_else(|| bad("truncated edges"))?;
            let toks: Vec<&str> = line.split_whitespace().collect();
            let [a, b, tag] = toks[..] else { return Err(bad("edge line needs i j tag")) };
            let a: usize = a.parse().map_err(|_| bad("bad index"))?;
            let b: usize = b.parse().map_err(|_| bad("bad index"))?;
            if a.max(b) >= nv {
                return Err(bad("edge index out of range"));
            }
            mesh.boundary_edges.push(([a, b], BoundaryTag::from_code(tag)?));
        }
        Ok(mesh)
    }
}

/// Structured model half-guide mesh with `n` cells per period and `m` periods.
fn model_half_mesh(n: usize, m: usize) -> Mesh {
    use BoundaryTag::*;
    let h = MODEL_PERIOD / n as f64;
    let mut vertices = Vec::new();
    // triangle part: index (i, j) with i + j <= n, point A + i (h, 0) + j (h, h)
    let mut tri_id = vec![vec![usize::MAX; n + 1]; n + 1];
    for j in 0..=n {
        for i in 0..=(n - j) {
            tri_id[i][j] = vertices.len();
            vertices.push([-MODEL_PERIOD + (i + j) as f64 * h, j as f64 * h]);
        }
    }
    // strip part: column c at u = c h, row r at v = u + r h; column 0 is the line u = 0
    let cols = m * n;
    let mut strip_id = vec![vec![usize::MAX; n + 1]; cols + 1];
    for r in 0..=n {
        strip_id[0][r] = tri_id[n - r][r];
    }
    for (c, column) in strip_id.iter_mut().enumerate().skip(1) {
        let u = c as f64 * h;
        for (r, id) in column.iter_mut().enumerate() {
            *id = vertices.len();
            vertices.push([u, u + r as f64 * h]);
        }
    }

    let mut triangles = Vec::with_capacity(n * n * (1 + 2 * m));
    for j in 0..n {
        for i in 0..(n - j) {
            triangles.push([tri_id[i][j], tri_id[i + 1][j], tri_id[i][j + 1]]);
            if i + j + 1 < n {
                triangles.push([tri_id[i + 1][j], tri_id[i + 1][j + 1], tri_id[i][j + 1]]);
            }
        }
    }
    for c in 0..cols {
        for r in 0..n {
            let p00 = strip_id[c][r];
            let p10 = strip_id[c + 1][r];
            let p11 = strip_id[c + 1][r + 1];
            let p01 = strip_id[c][r + 1];
            triangles.push([p00, p10, p11]);
            triangles.push([p00, p11, p01]);
        }
    }

    let mut boundary_edges = Vec::new();
    for i in 0..n {
        boundary_edges.push(([tri_id[i][0], tri_id[i + 1][0]], Neumann));
    }
    for c in 0..cols {
        boundary_edges.push(([strip_id[c][0], strip_id[c + 1][0]], Dirichlet));
    }
    for r in 0..n {
        boundary_edges.push(([strip_id[cols][r], strip_id[cols][r + 1]], Artificial));
    }
    for c in (0..cols).rev() {
        boundary_edges.push(([strip_id[c + 1][n], strip_id[c][n]], Dirichlet));
    }
    for j in (0..n).rev() {
        boundary_edges.push(([tri_id[0][j + 1], tri_id[0][j]], Dirichlet));
    }
    Mesh { vertices, triangles, boundary_edges, level: n }
}

/// Linear image of a mesh; orientation is restored when the map reverses it.
fn map_mesh(mesh: &Mesh, f: impl Fn([f64; 2]) -> [f64; 2], reverses: bool) -> Mesh {
    let vertices = mesh.vertices.iter().map(|&p| f(p)).collect();
    let (triangles, boundary_edges) = if reverses {
        (
            mesh.triangles.iter().map(|t| [t[0], t[2], t[1]]).collect(),
            mesh.boundary_edges.iter().map(|(e, tag)| ([e[1], e[0]], *tag)).collect(),
        )
    } else {
        (mesh.triangles.clone(), mesh.boundary_edges.clone())
    };
    Mesh { vertices, triangles, boundary_edges, level: mesh.level }
}

/// Even reflection across `v = 0`; vertices on the axis are shared and the Neumann edges disappear.
fn reflect_mesh(half: &Mesh) -> Mesh {
    let mut vertices = half.vertices.clone();
    let mut mirror = vec![usize::MAX; half.vertices.len()];
    for (i, p) in half.vertices.iter().enumerate() {
        if p[1] == 0.0 {
            mirror[i] = i;
        } else {
            mirror[i] = vertices.len();
            vertices.push([p[0], -p[1]]);
        }
    }
    let mut triangles = half.triangles.clone();
    triangles.extend(half.triangles.iter().map(|t| [mirror[t[0]], mirror[t[2]], mirror[t[1]]]));
    let mut boundary_edges: Vec<_> = half
        .boundary_edges
        .iter()
        .filter(|(_, tag)| *tag != BoundaryTag::Neumann)
        .cloned()
        .collect();
    let lower: Vec<_> = half
        .boundary_edges
        .iter()
        .filter(|(_, tag)| *tag != BoundaryTag::Neumann)
        .map(|(e, tag)| ([mirror[e[1]], mirror[e[0]]], *tag))
        .collect();
    boundary_edges.extend(lower);
    Mesh { vertices, triangles, boundary_edges, level: half.level }
}

/// Model half-guide coordinates to reference-strip coordinates.
pub fn model_to_reference(p: [f64; 2]) -> [f64; 2] {
    [p[0] / SQRT_2, PI + (p[0] - p[1]) / SQRT_2]
}

/// Structured triangulation of the polygon with `n` cells across each period.
///
/// The triangular corner region holds `n^2` cells and every strip period `2 n^2`,
/// so the half-guide meshes have `n^2 (1 + 2 m)` triangles.
pub fn generate_mesh(polygon: &Polygon, n: usize) -> Result<Mesh> {
    if n < 1 {
        return Err(Error::InvalidLevel(n));
    }
    let spec = polygon.spec;
    spec.validate()?;
    let half = model_half_mesh(n, spec.length);
    let mesh = match spec.formulation {
        Formulation::ModelGuide => half,
        Formulation::ReferenceStrip => map_mesh(&half, model_to_reference, true),
        Formulation::FullGuide => reflect_mesh(&half),
    };
    debug_assert!(mesh.validate(Some(polygon)).is_ok());
    Ok(mesh)
}

/// Convenience wrapper: polygon and mesh in one call.
pub fn mesh_for(spec: &DomainSpec, n: usize) -> Result<Mesh> {
    let polygon = build_domain(spec)?;
    generate_mesh(&polygon, n)
}

/// Uniform red refinement: every triangle is split into four through its edge midpoints.
pub fn refine(mesh: &Mesh) -> Mesh {
    let mut vertices = mesh.vertices.clone();
    let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
    let mut midpoint = |a: usize, b: usize, vertices: &mut Vec<[f64; 2]>| -> usize {
        *midpoints.entry(edge_key(a, b)).or_insert_with(|| {
            let (p, q) = (vertices[a], vertices[b]);
            vertices.push([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]);
            vertices.len() - 1
        })
    };
    let mut triangles = Vec::with_capacity(4 * mesh.triangles.len());
    for &[a, b, c] in &mesh.triangles {
        let ab = midpoint(a, b, &mut vertices);
        let bc = midpoint(b, c, &mut vertices);
        let ca = midpoint(c, a, &mut vertices);
        triangles.push([a, ab, ca]);
        triangles.push([ab, b, bc]);
        triangles.push([ca, bc, c]);
        triangles.push([ab, bc, ca]);
    }
    let mut boundary_edges = Vec::with_capacity(2 * mesh.boundary_edges.len());
    for &([a, b], tag) in &mesh.boundary_edges {
        let mid = midpoint(a, b, &mut vertices);
        boundary_edges.push(([a, mid], tag));
        boundary_edges.push(([mid, b], tag));
    }
    Mesh { vertices, triangles, boundary_edges, level: 2 * mesh.level }
}

/// `(u, v) -> (u, t)` with `t = v pi sqrt(2) / (u + pi sqrt(2))`, flattening the corner triangle.
pub fn map_triangle_coords(u: f64, v: f64) -> Result<(f64, f64)> {
    let w = u + MODEL_PERIOD;
    if !(w > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "triangle map undefined for u = {u} (requires u > -pi*sqrt(2))"
        )));
    }
    Ok((u, v * MODEL_PERIOD / w))
}

pub fn unmap_triangle_coords(u: f64, t: f64) -> (f64, f64) {
    (u, t * (u + MODEL_PERIOD) / MODEL_PERIOD)
}

/// `(u, v) -> (u, tau)` with `tau = v - u`, straightening the strip.
pub fn map_strip_coords(u: f64, v: f64) -> (f64, f64) {
    (u, v - u)
}

pub fn unmap_strip_coords(u: f64, tau: f64) -> (f64, f64) {
    (u, tau + u)
}

/// Physical half-guide frame `(x~, y~)`: `x~` runs along the straight arm from the
/// segment through the reentrant corner, `y~ in (0, pi)` is measured from the outer wall.
pub fn to_arm_frame(formulation: Formulation, theta: f64, p: [f64; 2]) -> [f64; 2] {
    match formulation {
        Formulation::ReferenceStrip => [p[0] / theta.tan(), p[1]],
        Formulation::ModelGuide | Formulation::FullGuide => {
            let (u, v) = (p[0], p[1].abs());
            let t = theta.tan();
            [(u / t + v * t) / SQRT_2, PI - (v - u) / SQRT_2]
        }
    }
}

/// Inverse of [`to_arm_frame`], landing in the upper half for the full guide.
pub fn from_arm_frame(formulation: Formulation, theta: f64, q: [f64; 2]) -> [f64; 2] {
    match formulation {
        Formulation::ReferenceStrip => [q[0] * theta.tan(), q[1]],
        Formulation::ModelGuide | Formulation::FullGuide => {
            let (s, c) = theta.sin_cos();
            let inner = PI - q[1];
            let u = SQRT_2 * (q[0] - inner * s / c) * s * c;
            [u, u + SQRT_2 * inner]
        }
    }
}

/// Arm-frame abscissa of the artificial boundary measured along the inner wall.
pub fn arm_length(spec: &DomainSpec) -> f64 {
    let l = spec.artificial_abscissa();
    match spec.formulation {
        Formulation::ReferenceStrip => l / spec.theta.tan(),
        Formulation::ModelGuide | Formulation::FullGuide => {
            let (s, c) = spec.theta.sin_cos();
            l / (SQRT_2 * s * c)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn spec(f: Formulation, m: usize) -> DomainSpec {
        DomainSpec::new(f, PI / 4.0, m).unwrap()
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(matches!(DomainSpec::new(Formulation::ModelGuide, 0.0, 1), Err(Error::InvalidAngle(_))));
        assert!(DomainSpec::new(Formulation::ModelGuide, PI / 2.0, 1).is_err());
        assert!(DomainSpec::new(Formulation::ModelGuide, -0.1, 1).is_err());
        assert!(matches!(DomainSpec::new(Formulation::ModelGuide, 0.3, 0), Err(Error::InvalidLength(0))));
    }

    #[test]
    fn model_polygon_is_a_pentagon_with_corner_at_origin() {
        let poly = build_domain(&spec(Formulation::ModelGuide, 1)).unwrap();
        assert_eq!(poly.vertices.len(), 5);
        assert_eq!(poly.vertices[1], [0.0, 0.0]);
        assert!((poly.vertices[2][0] - MODEL_PERIOD).abs() < 1e-15);
        assert_eq!(poly.side_tags[0], BoundaryTag::Neumann);
        assert_eq!(poly.side_tags[2], BoundaryTag::Artificial);
        assert!(poly.signed_area() > 0.0);
        // triangle pi^2 plus one parallelogram of area (pi sqrt 2)^2
        assert!((poly.signed_area() - (PI * PI + 2.0 * PI * PI)).abs() < 1e-12);
    }

    #[test]
    fn reference_polygon_has_horizontal_dirichlet_sides() {
        let poly = build_domain(&spec(Formulation::ReferenceStrip, 5)).unwrap();
        for (s, tag) in poly.side_tags.iter().enumerate() {
            let (p, q) = poly.side(s);
            let horizontal = (p[1] - q[1]).abs() < 1e-15;
            match tag {
                BoundaryTag::Dirichlet => assert!(horizontal),
                BoundaryTag::Neumann => assert!(!horizontal && (q[0] - p[0]).abs() > 0.0),
                BoundaryTag::Artificial => assert!((p[0] - 5.0 * PI).abs() < 1e-12),
            }
        }
    }

    #[test]
    fn full_polygon_is_symmetric_without_neumann() {
        let poly = build_domain(&spec(Formulation::FullGuide, 1)).unwrap();
        assert!(poly.side_tags.iter().all(|t| *t != BoundaryTag::Neumann));
        let set: HashSet<(i64, i64)> = poly
            .vertices
            .iter()
            .map(|p| ((p[0] * 1e9).round() as i64, (p[1] * 1e9).round() as i64))
            .collect();
        for p in &poly.vertices {
            assert!(set.contains(&((p[0] * 1e9).round() as i64, (-p[1] * 1e9).round() as i64)));
        }
    }

    #[test]
    fn triangle_counts_follow_formula() {
        for (n, m, expected) in [(4, 1, 48), (4, 5, 176), (1, 1, 3), (3, 2, 45)] {
            let mesh = mesh_for(&spec(Formulation::ModelGuide, m), n).unwrap();
            assert_eq!(mesh.n_triangles(), expected);
            assert_eq!(mesh.n_triangles(), n * n * (1 + 2 * m));
        }
    }

    #[test]
    fn meshes_validate_for_all_formulations() {
        for f in [Formulation::ModelGuide, Formulation::ReferenceStrip, Formulation::FullGuide] {
            for (n, m) in [(1, 1), (2, 3), (4, 2)] {
                let s = spec(f, m);
                let poly = build_domain(&s).unwrap();
                let mesh = generate_mesh(&poly, n).unwrap();
                mesh.validate(Some(&poly)).unwrap();
                let refined = refine(&mesh);
                refined.validate(Some(&poly)).unwrap();
            }
        }
    }

    #[test]
    fn refinement_nests_and_inherits_tags() {
        let s = spec(Formulation::ModelGuide, 1);
        let poly = build_domain(&s).unwrap();
        let coarse = generate_mesh(&poly, 4).unwrap();
        assert_eq!(coarse.n_triangles(), 48);
        let fine = refine(&coarse);
        assert_eq!(fine.n_triangles(), 192);
        assert_eq!(fine.level, 8);
        assert_eq!(refine(&fine).n_triangles(), 16 * 48);
        assert_eq!(&fine.vertices[..coarse.n_vertices()], &coarse.vertices[..]);
        for tag in [BoundaryTag::Dirichlet, BoundaryTag::Neumann, BoundaryTag::Artificial] {
            let count = |m: &Mesh| m.boundary_edges.iter().filter(|(_, t)| *t == tag).count();
            assert_eq!(count(&fine), 2 * count(&coarse));
        }
        // the refined mesh and the directly generated one cover the same vertex set
        let direct = generate_mesh(&poly, 8).unwrap();
        let key = |p: &[f64; 2]| ((p[0] * 1e9).round() as i64, (p[1] * 1e9).round() as i64);
        let a: HashSet<_> = fine.vertices.iter().map(key).collect();
        let b: HashSet<_> = direct.vertices.iter().map(key).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn corner_is_a_vertex() {
        for f in [Formulation::ModelGuide, Formulation::FullGuide] {
            let mesh = mesh_for(&spec(f, 1), 3).unwrap();
            assert!(mesh.vertices.contains(&[0.0, 0.0]));
        }
        let mesh = mesh_for(&spec(Formulation::ReferenceStrip, 1), 3).unwrap();
        assert!(mesh.vertices.iter().any(|p| (p[0]).abs() < 1e-14 && (p[1] - PI).abs() < 1e-14));
    }

    #[test]
    fn full_mesh_is_mirror_symmetric() {
        let mesh = mesh_for(&spec(Formulation::FullGuide, 2), 4).unwrap();
        let key = |p: [f64; 2]| ((p[0] * 1e9).round() as i64, (p[1] * 1e9).round() as i64);
        let set: HashSet<_> = mesh.vertices.iter().map(|p| key(*p)).collect();
        assert!(mesh.vertices.iter().all(|p| set.contains(&key([p[0], -p[1]]))));
        let half = mesh_for(&spec(Formulation::ModelGuide, 2), 4).unwrap();
        assert_eq!(mesh.n_triangles(), 2 * half.n_triangles());
    }

    #[test]
    fn coordinate_maps() {
        let (u, t) = map_triangle_coords(0.0, 1.3).unwrap();
        assert_eq!((u, t), (0.0, 1.3));
        let (_, t) = map_triangle_coords(-1.0, 0.0).unwrap();
        assert_eq!(t, 0.0);
        assert_eq!(map_strip_coords(2.0, 0.0), (2.0, -2.0));
        let (_, t) = map_triangle_coords(-MODEL_PERIOD / 2.0, MODEL_PERIOD / 4.0).unwrap();
        assert!((t - MODEL_PERIOD / 2.0).abs() < 1e-15);
        assert!(map_triangle_coords(-MODEL_PERIOD, 0.3).is_err());
        let (u, v) = unmap_triangle_coords(-1.2, 2.0);
        let (u2, t2) = map_triangle_coords(u, v).unwrap();
        assert!((u2 + 1.2).abs() < 1e-15 && (t2 - 2.0).abs() < 1e-14);
        assert_eq!(unmap_strip_coords(1.0, 0.5), (1.0, 1.5));
    }

    #[test]
    fn arm_frame_round_trips_and_fixes_corner() {
        for theta in [0.1, 0.7, 1.3] {
            for f in [Formulation::ModelGuide, Formulation::ReferenceStrip] {
                let q = [2.5, 1.1];
                let p = from_arm_frame(f, theta, q);
                let back = to_arm_frame(f, theta, p);
                assert!((back[0] - q[0]).abs() < 1e-12 && (back[1] - q[1]).abs() < 1e-12);
            }
            let o = to_arm_frame(Formulation::ModelGuide, theta, [0.0, 0.0]);
            assert!(o[0].abs() < 1e-15 && (o[1] - PI).abs() < 1e-15);
            // the artificial boundary along the inner wall
            let s = DomainSpec::new(Formulation::ModelGuide, theta, 3).unwrap();
            let l = s.artificial_abscissa();
            let end = to_arm_frame(Formulation::ModelGuide, theta, [l, l]);
            assert!((end[0] - arm_length(&s)).abs() < 1e-9 * end[0]);
        }
    }

    #[test]
    fn text_round_trip() {
        let mesh = mesh_for(&spec(Formulation::FullGuide, 1), 2).unwrap();
        let text = mesh.to_text();
        assert!(text.starts_with(&format!(
            "{} {} {}\n",
            mesh.n_vertices(),
            mesh.n_triangles(),
            mesh.boundary_edges.len()
        )));
        let back = Mesh::from_text(&text, mesh.level).unwrap();
        assert_eq!(back, mesh);
        assert!(Mesh::from_text("1 0 0\n0.0\n", 1).is_err());
    }
}
