//! Conforming tetrahedral meshes: the structured Kuhn-split cube family,
//! an ASCII import path, face connectivity, and the geometric data (frames,
//! normals, affine maps) that face integrals and trace evaluations need.
//!
//! Design choices: face keys are sorted vertex-id triples; the owner of an
//! interior face is the incident element with the lower id; the face normal
//! is the unit outward normal of the owner; `h_F` is the longest edge of
//! the face and `h_K` the longest edge of the element; boundary faces are
//! detected purely topologically (exactly one incident element).

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};

/// A face of the mesh with its adjacency and geometry.
#[derive(Debug, Clone)]
pub struct Face {
    /// Sorted global vertex ids; also the chart used for face-local
    /// polynomial bases and quadrature (identical from both sides).
    pub verts: [usize; 3],
    /// Incident element with the lower id.
    pub owner: usize,
    /// Local face index of this face in the owner (face ℓ is opposite the
    /// owner's vertex ℓ).
    pub owner_local: usize,
    /// Second incident element, if the face is interior.
    pub neighbor: Option<usize>,
    /// Local face index in the neighbor.
    pub neighbor_local: Option<usize>,
    /// Unit outward normal of the owner element.
    pub normal: [f64; 3],
    /// Face area.
    pub area: f64,
    /// Face diameter: longest edge of the triangle.
    pub h_f: f64,
}

impl Face {
    /// `true` when the face lies on the domain boundary.
    pub fn is_boundary(&self) -> bool {
        self.neighbor.is_none()
    }
}

/// Per-element affine geometry: `x = v₀ + B ξ` maps the reference
/// tetrahedron onto the element.
#[derive(Debug, Clone)]
pub struct ElemGeom {
    /// Image of the reference origin.
    pub v0: [f64; 3],
    /// Columns `v₁−v₀, v₂−v₀, v₃−v₀`.
    pub b: [[f64; 3]; 3],
    /// Inverse of `B`.
    pub inv_b: [[f64; 3]; 3],
    /// `det B = 6|K| > 0`.
    pub det: f64,
}

impl ElemGeom {
    /// Map reference coordinates to physical coordinates.
    pub fn to_phys(&self, xi: [f64; 3]) -> [f64; 3] {
        let mut x = self.v0;
        for i in 0..3 {
            for j in 0..3 {
                x[i] += self.b[i][j] * xi[j];
            }
        }
        x
    }

    /// Map physical coordinates to reference coordinates.
    pub fn to_ref(&self, x: [f64; 3]) -> [f64; 3] {
        let d = [x[0] - self.v0[0], x[1] - self.v0[1], x[2] - self.v0[2]];
        let mut xi = [0.0; 3];
        for i in 0..3 {
            for j in 0..3 {
                xi[i] += self.inv_b[i][j] * d[j];
            }
        }
        xi
    }

    /// Push a reference gradient to a physical gradient: `∇ₓφ = B^{-T}∇_ξφ`.
    pub fn grad_to_phys(&self, g: [f64; 3]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i] += self.inv_b[j][i] * g[j];
            }
        }
        out
    }

    /// Element volume.
    pub fn volume(&self) -> f64 {
        self.det / 6.0
    }
}

/// Orthonormal frame and chart of a face, shared by both incident elements.
#[derive(Debug, Clone)]
pub struct FaceFrame {
    /// The face normal (owner-outward), completing `t1 × t2 = n`.
    pub n: [f64; 3],
    /// First unit tangent.
    pub t1: [f64; 3],
    /// Second unit tangent, `n × t1`.
    pub t2: [f64; 3],
    /// Chart origin: the first (lowest-id) face vertex.
    pub origin: [f64; 3],
    /// Chart edges: second resp. third face vertex minus the origin. The
    /// chart maps the reference triangle `(ξ, η)` to `origin + ξ·e1 + η·e2`.
    pub e1: [f64; 3],
    /// See `e1`.
    pub e2: [f64; 3],
}

impl FaceFrame {
    /// Map reference-triangle coordinates to physical coordinates. Both
    /// incident elements use this same chart, so matched quadrature points
    /// coincide exactly.
    pub fn to_phys(&self, xi: [f64; 3]) -> [f64; 3] {
        [
            self.origin[0] + xi[0] * self.e1[0] + xi[1] * self.e2[0],
            self.origin[1] + xi[0] * self.e1[1] + xi[1] * self.e2[1],
            self.origin[2] + xi[0] * self.e1[2] + xi[1] * self.e2[2],
        ]
    }
}

/// A conforming tetrahedral mesh of a polyhedral domain.
#[derive(Debug, Clone)]
pub struct TetMesh {
    /// Vertex coordinates.
    pub vertices: Vec<[f64; 3]>,
    /// Element connectivity (positively oriented 4-tuples).
    pub tets: Vec<[usize; 4]>,
    /// Unique faces with adjacency and geometry.
    pub faces: Vec<Face>,
    /// Per element, the face ids of its 4 local faces (entry ℓ is the face
    /// opposite vertex ℓ).
    pub tet_faces: Vec<[usize; 4]>,
    /// Per-element affine geometry.
    pub geom: Vec<ElemGeom>,
    /// Per-element diameter (longest edge).
    pub h_k: Vec<f64>,
}

/// Local faces of the reference tetrahedron: face ℓ is opposite vertex ℓ.
pub const LOCAL_FACES: [[usize; 3]; 4] = [[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]];

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

fn scale(a: [f64; 3], s: f64) -> [f64; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

impl TetMesh {
    /// Number of elements.
    pub fn n_elems(&self) -> usize {
        self.tets.len()
    }

    /// Mesh size `h = max_K h_K`.
    pub fn h(&self) -> f64 {
        self.h_k.iter().cloned().fold(0.0, f64::max)
    }

    /// Total mesh volume `Σ_K |K|`.
    pub fn total_volume(&self) -> f64 {
        self.geom.iter().map(|g| g.volume()).sum()
    }

    /// Outward unit normal of local face ℓ of element `e`, computed from
    /// the element geometry alone (used to cross-check stored face normals).
    pub fn outward_normal(&self, e: usize, local: usize) -> [f64; 3] {
        let t = &self.tets[e];
        let fv = LOCAL_FACES[local];
        let a = self.vertices[t[fv[0]]];
        let b = self.vertices[t[fv[1]]];
        let c = self.vertices[t[fv[2]]];
        let mut n = cross(sub(b, a), sub(c, a));
        n = scale(n, 1.0 / norm(n));
        let opp = self.vertices[t[local]];
        let centroid = scale([a[0] + b[0] + c[0], a[1] + b[1] + c[1], a[2] + b[2] + c[2]], 1.0 / 3.0);
        if dot(n, sub(centroid, opp)) < 0.0 {
            n = scale(n, -1.0);
        }
        n
    }

    /// Construct derived data (faces, geometry) from `vertices` + `tets`,
    /// validating all mesh invariants.
    fn from_cells(vertices: Vec<[f64; 3]>, tets: Vec<[usize; 4]>) -> Result<TetMesh> {
        if tets.is_empty() {
            return Err(Error::Mesh("mesh has no elements".into()));
        }
        // Validate ids and orientation; build geometry.
        let mut geom = Vec::with_capacity(tets.len());
        let mut h_k = Vec::with_capacity(tets.len());
        let mut seen = BTreeMap::new();
        for (e, t) in tets.iter().enumerate() {
            for &v in t {
                if v >= vertices.len() {
                    return Err(Error::Mesh(format!(
                        "element {e} references vertex {v} but the mesh has {} vertices",
                        vertices.len()
                    )));
                }
            }
            let mut key = *t;
            key.sort_unstable();
            if key[0] == key[1] || key[1] == key[2] || key[2] == key[3] {
                return Err(Error::Mesh(format!("element {e} repeats a vertex")));
            }
            if let Some(prev) = seen.insert(key, e) {
                return Err(Error::Mesh(format!("duplicate element: {e} repeats {prev}")));
            }
            let v0 = vertices[t[0]];
            let cols = [sub(vertices[t[1]], v0), sub(vertices[t[2]], v0), sub(vertices[t[3]], v0)];
            // Column-major storage: b[i][j] = (v_{j+1} − v₀)_i.
            let mut b = [[0.0; 3]; 3];
            for (j, col) in cols.iter().enumerate() {
                for i in 0..3 {
                    b[i][j] = col[i];
                }
            }
            let det = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1])
                - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0])
                + b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
            if det <= 0.0 {
                return Err(Error::Mesh(format!(
                    "element {e} has non-positive orientation (signed volume {})",
                    det / 6.0
                )));
            }
            let inv_b = invert3(&b, det);
            geom.push(ElemGeom { v0, b, inv_b, det });
            let mut hk = 0.0f64;
            for i in 0..4 {
                for j in (i + 1)..4 {
                    hk = hk.max(norm(sub(vertices[t[i]], vertices[t[j]])));
                }
            }
            h_k.push(hk);
        }

        // Face dedup keyed by sorted vertex triples.
        let mut face_map: BTreeMap<[usize; 3], Vec<(usize, usize)>> = BTreeMap::new();
        for (e, t) in tets.iter().enumerate() {
            for (l, fv) in LOCAL_FACES.iter().enumerate() {
                let mut key = [t[fv[0]], t[fv[1]], t[fv[2]]];
                key.sort_unstable();
                face_map.entry(key).or_default().push((e, l));
            }
        }
        let mut faces = Vec::with_capacity(face_map.len());
        let mut tet_faces = vec![[usize::MAX; 4]; tets.len()];
        for (key, incident) in face_map {
            if incident.len() > 2 {
                return Err(Error::Mesh(format!(
                    "non-conforming mesh: face {key:?} is shared by {} elements",
                    incident.len()
                )));
            }
            let (owner, owner_local, neighbor, neighbor_local) = if incident.len() == 1 {
                (incident[0].0, incident[0].1, None, None)
            } else {
                let (a, b) = (incident[0], incident[1]);
                let (own, nb) = if a.0 < b.0 { (a, b) } else { (b, a) };
                (own.0, own.1, Some(nb.0), Some(nb.1))
            };
            let pa = vertices[key[0]];
            let pb = vertices[key[1]];
            let pc = vertices[key[2]];
            let cr = cross(sub(pb, pa), sub(pc, pa));
            let area = 0.5 * norm(cr);
            if area < 1e-300 {
                return Err(Error::Mesh(format!("face {key:?} is degenerate")));
            }
            let h_f = norm(sub(pb, pa)).max(norm(sub(pc, pa))).max(norm(sub(pc, pb)));
            let face_id = faces.len();
            faces.push(Face {
                verts: key,
                owner,
                owner_local,
                neighbor,
                neighbor_local,
                normal: [0.0; 3], // set below from owner geometry
                area,
                h_f,
            });
            tet_faces[owner][owner_local] = face_id;
            if let (Some(nb), Some(nl)) = (neighbor, neighbor_local) {
                tet_faces[nb][nl] = face_id;
            }
        }
        let mut mesh = TetMesh { vertices, tets, faces, tet_faces, geom, h_k };
        for f in 0..mesh.faces.len() {
            let n = mesh.outward_normal(mesh.faces[f].owner, mesh.faces[f].owner_local);
            mesh.faces[f].normal = n;
        }
        Ok(mesh)
    }
}

fn invert3(b: &[[f64; 3]; 3], det: f64) -> [[f64; 3]; 3] {
    let mut inv = [[0.0; 3]; 3];
    inv[0][0] = (b[1][1] * b[2][2] - b[1][2] * b[2][1]) / det;
    inv[0][1] = (b[0][2] * b[2][1] - b[0][1] * b[2][2]) / det;
    inv[0][2] = (b[0][1] * b[1][2] - b[0][2] * b[1][1]) / det;
    inv[1][0] = (b[1][2] * b[2][0] - b[1][0] * b[2][2]) / det;
    inv[1][1] = (b[0][0] * b[2][2] - b[0][2] * b[2][0]) / det;
    inv[1][2] = (b[0][2] * b[1][0] - b[0][0] * b[1][2]) / det;
    inv[2][0] = (b[1][0] * b[2][1] - b[1][1] * b[2][0]) / det;
    inv[2][1] = (b[0][1] * b[2][0] - b[0][0] * b[2][1]) / det;
    inv[2][2] = (b[0][0] * b[1][1] - b[0][1] * b[1][0]) / det;
    inv
}

/// Build the structured mesh of the unit cube: `n³` congruent subcubes,
/// each split into 6 tetrahedra by the Kuhn split (one tet per permutation
/// of the axes, walking from the low corner to the high corner). All
/// elements are congruent, `h = √3/n`.
pub fn build_structured_tet_mesh(n: usize) -> Result<TetMesh> {
    if n == 0 {
        return Err(Error::Mesh("subdivision count must be at least 1".into()));
    }
    let nv = n + 1;
    let vid = |i: usize, j: usize, l: usize| -> usize { (i * nv + j) * nv + l };
    let mut vertices = Vec::with_capacity(nv * nv * nv);
    for i in 0..nv {
        for j in 0..nv {
            for l in 0..nv {
                vertices.push([i as f64 / n as f64, j as f64 / n as f64, l as f64 / n as f64]);
            }
        }
    }
    const PERMS: [[usize; 3]; 6] =
        [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut tets = Vec::with_capacity(6 * n * n * n);
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                for perm in PERMS {
                    // Walk the cube diagonal: corner, then +e_{σ(0)}, +e_{σ(1)}, +e_{σ(2)}.
                    let mut idx = [i, j, l];
                    let mut tet = [vid(idx[0], idx[1], idx[2]), 0, 0, 0];
                    for (step, &axis) in perm.iter().enumerate() {
                        idx[axis] += 1;
                        tet[step + 1] = vid(idx[0], idx[1], idx[2]);
                    }
                    // Half of the permutations give negative orientation; swap
                    // the middle vertices to make every signed volume positive.
                    let d = signed_volume(&vertices, &tet);
                    if d < 0.0 {
                        tet.swap(1, 2);
                    }
                    tets.push(tet);
                }
            }
        }
    }
    TetMesh::from_cells(vertices, tets)
}

fn signed_volume(vertices: &[[f64; 3]], t: &[usize; 4]) -> f64 {
    let v0 = vertices[t[0]];
    let a = sub(vertices[t[1]], v0);
    let b = sub(vertices[t[2]], v0);
    let c = sub(vertices[t[3]], v0);
    dot(a, cross(b, c))
}

/// Load a mesh from the documented ASCII format: first non-comment line
/// `nv nt`, then `nv` vertex lines `x y z`, then `nt` element lines
/// `v0 v1 v2 v3` (0-based ids). `#` starts a comment. Connectivity is
/// recomputed and validated; nothing is trusted from the file.
pub fn load_ascii_mesh<P: AsRef<Path>>(path: P) -> Result<TetMesh> {
    let text = std::fs::read_to_string(&path)?;
    parse_ascii_mesh(&text)
}

/// Parse the ASCII mesh format from a string (see [`load_ascii_mesh`]).
pub fn parse_ascii_mesh(text: &str) -> Result<TetMesh> {
    // Pair each meaningful line with its 1-based line number for errors.
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (ln, header) = lines
        .next()
        .ok_or_else(|| Error::Mesh("empty mesh file: expected a `nv nt` header line".into()))?;
    let mut it = header.split_whitespace();
    let parse_count = |tok: Option<&str>, what: &str, ln: usize| -> Result<usize> {
        tok.ok_or_else(|| Error::Mesh(format!("line {ln}: missing {what}")))?
            .parse::<usize>()
            .map_err(|_| Error::Mesh(format!("line {ln}: {what} is not a non-negative integer")))
    };
    let nv = parse_count(it.next(), "vertex count", ln)?;
    let nt = parse_count(it.next(), "element count", ln)?;

    let mut vertices = Vec::with_capacity(nv);
    for k in 0..nv {
        let (ln, line) = lines
            .next()
            .ok_or_else(|| Error::Mesh(format!("expected {nv} vertex lines, found {k}")))?;
        let coords: Vec<f64> = line
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| Error::Mesh(format!("line {ln}: bad vertex coordinate {t:?}")))
            })
            .collect::<Result<_>>()?;
        if coords.len() != 3 {
            return Err(Error::Mesh(format!(
                "line {ln}: expected 3 coordinates, found {}",
                coords.len()
            )));
        }
        vertices.push([coords[0], coords[1], coords[2]]);
    }
    let mut tets = Vec::with_capacity(nt);
    for k in 0..nt {
        let (ln, line) = lines
            .next()
            .ok_or_else(|| Error::Mesh(format!("expected {nt} element lines, found {k}")))?;
        let ids: Vec<usize> = line
            .split_whitespace()
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| Error::Mesh(format!("line {ln}: bad vertex id {t:?}")))
            })
            .collect::<Result<_>>()?;
        if ids.len() != 4 {
            return Err(Error::Mesh(format!(
                "line {ln}: expected 4 vertex ids, found {}",
                ids.len()
            )));
        }
        tets.push([ids[0], ids[1], ids[2], ids[3]]);
    }
    if let Some((ln, _)) = lines.next() {
        return Err(Error::Mesh(format!("line {ln}: trailing content after {nt} elements")));
    }
    TetMesh::from_cells(vertices, tets)
}

/// Write a mesh in the ASCII format accepted by [`load_ascii_mesh`].
pub fn write_ascii_mesh(mesh: &TetMesh) -> String {
    let mut out = String::new();
    out.push_str(&format!("{} {}\n", mesh.vertices.len(), mesh.tets.len()));
    for v in &mesh.vertices {
        out.push_str(&format!("{:.17e} {:.17e} {:.17e}\n", v[0], v[1], v[2]));
    }
    for t in &mesh.tets {
        out.push_str(&format!("{} {} {} {}\n", t[0], t[1], t[2], t[3]));
    }
    out
}

/// Build the orthonormal frame and chart of every face.
///
/// The chart (origin at the lowest-id vertex, edges toward the other two in
/// sorted order) is shared verbatim by both incident elements, so the
/// correspondence between owner-side and neighbor-side quadrature points is
/// the identity on physical coordinates.
pub fn face_trace_frames(mesh: &TetMesh) -> Vec<FaceFrame> {
    mesh.faces
        .iter()
        .map(|f| {
            let a = mesh.vertices[f.verts[0]];
            let b = mesh.vertices[f.verts[1]];
            let c = mesh.vertices[f.verts[2]];
            let e1 = sub(b, a);
            let e2 = sub(c, a);
            let n = f.normal;
            let t1 = scale(e1, 1.0 / norm(e1));
            let t2 = cross(n, t1);
            FaceFrame { n, t1, t2, origin: a, e1, e2 }
        })
        .collect()
}
