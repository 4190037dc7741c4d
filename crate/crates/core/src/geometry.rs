//! Box reference configurations meshed into tetrahedra, boundary facet
//! classification (clamped vs. potential contact), and half-space gap
//! evaluation.

use crate::error::{Error, Result};
use crate::real::{as_f64, real, Real};

/// Obstacle half-space `{x : x . q >= 0}` through the origin, described by
/// its unit normal `q`.
#[derive(Debug, Clone, Copy)]
pub struct HalfSpace<T: Real> {
    q: [T; 3],
}

impl<T: Real> HalfSpace<T> {
    /// Normalizes the given direction; rejects near-zero vectors.
    pub fn new(q: [T; 3]) -> Result<Self> {
        let norm = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2]).sqrt();
        if norm < real(1e-14) || !norm.is_finite() {
            return Err(Error::InvalidGeometry(format!(
                "half-space normal has norm {}",
                as_f64(norm)
            )));
        }
        Ok(Self {
            q: [q[0] / norm, q[1] / norm, q[2] / norm],
        })
    }

    pub fn normal(&self) -> [T; 3] {
        self.q
    }
}

/// Boundary facet label: clamped portion or potential contact remainder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FacetClass {
    Dirichlet,
    Contact,
}

/// Oriented boundary triangle with its owning tetrahedron.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryFacet {
    /// Vertex indices, ordered so the right-handed normal points outward.
    pub verts: [usize; 3],
    /// Index of the unique tetrahedron owning this facet.
    pub tet: usize,
    /// True once the outward orientation has been established.
    pub outward: bool,
    pub class: FacetClass,
}

/// Axis-aligned box face selector for the clamped boundary portion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Face {
    XNeg,
    XPos,
    YNeg,
    YPos,
    ZNeg,
    ZPos,
}

impl Face {
    pub fn axis(self) -> usize {
        match self {
            Face::XNeg | Face::XPos => 0,
            Face::YNeg | Face::YPos => 1,
            Face::ZNeg | Face::ZPos => 2,
        }
    }

    pub fn is_positive_side(self) -> bool {
        matches!(self, Face::XPos | Face::YPos | Face::ZPos)
    }
}

impl std::str::FromStr for Face {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "-x" => Ok(Face::XNeg),
            "+x" | "x" => Ok(Face::XPos),
            "-y" => Ok(Face::YNeg),
            "+y" | "y" => Ok(Face::YPos),
            "-z" => Ok(Face::ZNeg),
            "+z" | "z" => Ok(Face::ZPos),
            other => Err(format!("unknown face '{other}', expected one of ±x/±y/±z")),
        }
    }
}

/// Tetrahedral mesh of a box with classified boundary facets.
#[derive(Debug, Clone)]
pub struct Mesh<T: Real> {
    pub vertices: Vec<[T; 3]>,
    pub tets: Vec<[usize; 4]>,
    pub boundary_facets: Vec<BoundaryFacet>,
    /// Sorted indices of vertices incident to at least one Contact facet.
    contact_vertices: Vec<usize>,
}

/// Per-contact-vertex gap values, aligned with `Mesh::contact_vertices`.
#[derive(Debug, Clone)]
pub struct GapField<T: Real> {
    pub values: Vec<T>,
    pub min: T,
}

impl<T: Real> GapField<T> {
    /// The rest condition requires a nonnegative gap everywhere on the
    /// contact boundary.
    pub fn rest_condition_holds(&self) -> bool {
        self.min >= T::zero()
    }
}

fn sub<T: Real>(a: [T; 3], b: [T; 3]) -> [T; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross<T: Real>(a: [T; 3], b: [T; 3]) -> [T; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn dot<T: Real>(a: [T; 3], b: [T; 3]) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

impl<T: Real> Mesh<T> {
    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn contact_vertices(&self) -> &[usize] {
        &self.contact_vertices
    }

    /// Signed volume of tet `t` (positive by construction).
    pub fn tet_volume(&self, t: usize) -> T {
        let [a, b, c, d] = self.tets[t];
        let u = sub(self.vertices[b], self.vertices[a]);
        let v = sub(self.vertices[c], self.vertices[a]);
        let w = sub(self.vertices[d], self.vertices[a]);
        dot(cross(u, v), w) / real(6.0)
    }

    pub fn volume(&self) -> T {
        (0..self.tets.len()).map(|t| self.tet_volume(t)).sum()
    }

    pub fn facet_area(&self, f: &BoundaryFacet) -> T {
        let [a, b, c] = f.verts;
        let u = sub(self.vertices[b], self.vertices[a]);
        let v = sub(self.vertices[c], self.vertices[a]);
        let n = cross(u, v);
        dot(n, n).sqrt() / real(2.0)
    }

    pub fn boundary_area(&self) -> T {
        self.boundary_facets.iter().map(|f| self.facet_area(f)).sum()
    }

    pub fn dirichlet_area(&self) -> T {
        self.boundary_facets
            .iter()
            .filter(|f| f.class == FacetClass::Dirichlet)
            .map(|f| self.facet_area(f))
            .sum()
    }
}

const KUHN_PERMS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

/// Structured tetrahedral mesh of the box `[min, max]`, each grid cube split
/// into six tetrahedra sharing the main diagonal. Facets on `dirichlet_face`
/// are labeled Dirichlet, all other boundary facets Contact.
pub fn make_box_mesh<T: Real>(
    min: [T; 3],
    max: [T; 3],
    subdivisions: [usize; 3],
    dirichlet_face: Face,
) -> Result<Mesh<T>> {
    for a in 0..3 {
        if !(max[a] > min[a]) {
            return Err(Error::InvalidGeometry(format!(
                "degenerate box: axis {a} has extent {}",
                as_f64(max[a] - min[a])
            )));
        }
        if subdivisions[a] == 0 {
            return Err(Error::InvalidGeometry(format!(
                "subdivision count along axis {a} must be >= 1"
            )));
        }
    }
    let [nx, ny, nz] = subdivisions;
    let coord = |a: usize, i: usize, n: usize| {
        let s = real::<T>(i as f64 / n as f64);
        min[a] * (T::one() - s) + max[a] * s
    };
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1) * (nz + 1));
    for k in 0..=nz {
        for j in 0..=ny {
            for i in 0..=nx {
                vertices.push([coord(0, i, nx), coord(1, j, ny), coord(2, k, nz)]);
            }
        }
    }
    let vid = |i: usize, j: usize, k: usize| (k * (ny + 1) + j) * (nx + 1) + i;

    let mut tets = Vec::with_capacity(6 * nx * ny * nz);
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let base = [i, j, k];
                for perm in KUHN_PERMS {
                    // Walk from the cell's min corner to its max corner,
                    // adding one axis at a time.
                    let mut path = [base; 4];
                    for (step, &axis) in perm.iter().enumerate() {
                        path[step + 1] = path[step];
                        path[step + 1][axis] += 1;
                    }
                    let mut tet = path.map(|[a, b, c]| vid(a, b, c));
                    let vol = signed_volume(&vertices, tet);
                    if vol < T::zero() {
                        tet.swap(2, 3);
                    }
                    let vol = signed_volume(&vertices, tet);
                    if !(vol > T::zero()) {
                        return Err(Error::InvalidGeometry(format!(
                            "non-positive tet volume {}",
                            as_f64(vol)
                        )));
                    }
                    tets.push(tet);
                }
            }
        }
    }

    let boundary_facets = classify_boundary(&vertices, &tets, min, max, dirichlet_face)?;

    let mut contact_vertices: Vec<usize> = boundary_facets
        .iter()
        .filter(|f| f.class == FacetClass::Contact)
        .flat_map(|f| f.verts)
        .collect();
    contact_vertices.sort_unstable();
    contact_vertices.dedup();

    Ok(Mesh {
        vertices,
        tets,
        boundary_facets,
        contact_vertices,
    })
}

fn signed_volume<T: Real>(vertices: &[[T; 3]], tet: [usize; 4]) -> T {
    let u = sub(vertices[tet[1]], vertices[tet[0]]);
    let v = sub(vertices[tet[2]], vertices[tet[0]]);
    let w = sub(vertices[tet[3]], vertices[tet[0]]);
    dot(cross(u, v), w) / real(6.0)
}

fn classify_boundary<T: Real>(
    vertices: &[[T; 3]],
    tets: &[[usize; 4]],
    min: [T; 3],
    max: [T; 3],
    dirichlet_face: Face,
) -> Result<Vec<BoundaryFacet>> {
    use std::collections::HashMap;
    const TET_FACES: [[usize; 3]; 4] = [[1, 2, 3], [0, 3, 2], [0, 1, 3], [0, 2, 1]];

    // Faces appearing in exactly one tet tile the topological boundary.
    let mut seen: HashMap<[usize; 3], (usize, [usize; 3], usize)> = HashMap::new();
    for (t, tet) in tets.iter().enumerate() {
        for face in TET_FACES {
            let tri = face.map(|l| tet[l]);
            let mut key = tri;
            key.sort_unstable();
            seen.entry(key)
                .and_modify(|e| e.2 += 1)
                .or_insert((t, tri, 1));
        }
    }
    let mut boundary: Vec<(usize, [usize; 3])> = seen
        .into_values()
        .filter(|&(_, _, count)| count == 1)
        .map(|(t, tri, _)| (t, tri))
        .collect();
    // Deterministic facet ordering regardless of hash-map iteration.
    boundary.sort_unstable_by_key(|&(t, tri)| (t, tri));

    let axis = dirichlet_face.axis();
    let plane = if dirichlet_face.is_positive_side() {
        max[axis]
    } else {
        min[axis]
    };
    let tol = real::<T>(1e-12) * (T::one() + plane.abs() + (max[axis] - min[axis]).abs());

    let mut facets = Vec::with_capacity(boundary.len());
    let mut dirichlet_count = 0usize;
    for (t, mut tri) in boundary {
        let tet = tets[t];
        let centroid_tet = centroid4(vertices, tet);
        let centroid_tri = centroid3(vertices, tri);
        let n = cross(
            sub(vertices[tri[1]], vertices[tri[0]]),
            sub(vertices[tri[2]], vertices[tri[0]]),
        );
        if dot(n, sub(centroid_tri, centroid_tet)) < T::zero() {
            tri.swap(1, 2);
        }
        let on_plane = tri
            .iter()
            .all(|&v| (vertices[v][axis] - plane).abs() <= tol);
        let class = if on_plane {
            dirichlet_count += 1;
            FacetClass::Dirichlet
        } else {
            FacetClass::Contact
        };
        facets.push(BoundaryFacet {
            verts: tri,
            tet: t,
            outward: true,
            class,
        });
    }
    if dirichlet_count == 0 {
        return Err(Error::InvalidGeometry(
            "clamped boundary portion has zero area".into(),
        ));
    }
    Ok(facets)
}

fn centroid4<T: Real>(vertices: &[[T; 3]], tet: [usize; 4]) -> [T; 3] {
    let quarter = real::<T>(0.25);
    let mut c = [T::zero(); 3];
    for v in tet {
        for a in 0..3 {
            c[a] = c[a] + vertices[v][a] * quarter;
        }
    }
    c
}

fn centroid3<T: Real>(vertices: &[[T; 3]], tri: [usize; 3]) -> [T; 3] {
    let third = T::one() / real::<T>(3.0);
    let mut c = [T::zero(); 3];
    for v in tri {
        for a in 0..3 {
            c[a] = c[a] + vertices[v][a] * third;
        }
    }
    c
}

/// Gap of the undeformed configuration, `g(x) = x . q`, per contact vertex.
pub fn rest_gap<T: Real>(mesh: &Mesh<T>, hs: &HalfSpace<T>) -> GapField<T> {
    let q = hs.normal();
    let mut min = T::infinity();
    let values: Vec<T> = mesh
        .contact_vertices
        .iter()
        .map(|&v| {
            let g = dot(mesh.vertices[v], q);
            if g < min {
                min = g;
            }
            g
        })
        .collect();
    if values.is_empty() {
        min = T::zero();
    }
    GapField { values, min }
}

/// Gap of the deformed configuration, `g(x) = (x + u(x)) . q`, for a
/// per-vertex displacement field.
pub fn deformed_gap<T: Real>(
    mesh: &Mesh<T>,
    hs: &HalfSpace<T>,
    u: &[[T; 3]],
) -> Result<GapField<T>> {
    if u.len() != mesh.n_vertices() {
        return Err(Error::DimensionMismatch {
            expected: mesh.n_vertices(),
            got: u.len(),
        });
    }
    let q = hs.normal();
    let mut min = T::infinity();
    let values: Vec<T> = mesh
        .contact_vertices
        .iter()
        .map(|&v| {
            let x = mesh.vertices[v];
            let g = dot([x[0] + u[v][0], x[1] + u[v][1], x[2] + u[v][2]], q);
            if g < min {
                min = g;
            }
            g
        })
        .collect();
    if values.is_empty() {
        min = T::zero();
    }
    Ok(GapField { values, min })
}
