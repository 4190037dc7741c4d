//! Legacy ASCII VTK unstructured-grid export: tetrahedra plus boundary
//! triangles as cells, with the facet classification as cell data and
//! optional nodal fields as point data.

use crate::geometry::{FacetClass, Mesh};
use crate::real::Real;
use std::io::{self, Write};

/// Optional nodal fields attached to the export.
pub struct PointData<'a, T: Real> {
    pub displacement: Option<&'a [[T; 3]]>,
    /// Per-vertex gap, NaN-free only on contact vertices; others get 0.
    pub gap: Option<&'a [T]>,
}

impl<'a, T: Real> Default for PointData<'a, T> {
    fn default() -> Self {
        Self {
            displacement: None,
            gap: None,
        }
    }
}

/// Writes the mesh (and optional fields) in legacy ASCII VTK format.
/// Cell data `facet_class` is 0 for tetrahedra, 1 for Dirichlet facets and
/// 2 for Contact facets.
pub fn write_vtk<T: Real, W: Write>(
    out: &mut W,
    mesh: &Mesh<T>,
    title: &str,
    point_data: &PointData<'_, T>,
) -> io::Result<()> {
    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(out, "{title}")?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET UNSTRUCTURED_GRID")?;

    let nv = mesh.n_vertices();
    writeln!(out, "POINTS {nv} double")?;
    for v in &mesh.vertices {
        writeln!(out, "{} {} {}", v[0], v[1], v[2])?;
    }

    let n_tets = mesh.tets.len();
    let n_facets = mesh.boundary_facets.len();
    let n_cells = n_tets + n_facets;
    let list_len = 5 * n_tets + 4 * n_facets;
    writeln!(out, "CELLS {n_cells} {list_len}")?;
    for tet in &mesh.tets {
        writeln!(out, "4 {} {} {} {}", tet[0], tet[1], tet[2], tet[3])?;
    }
    for f in &mesh.boundary_facets {
        writeln!(out, "3 {} {} {}", f.verts[0], f.verts[1], f.verts[2])?;
    }
    writeln!(out, "CELL_TYPES {n_cells}")?;
    for _ in 0..n_tets {
        writeln!(out, "10")?;
    }
    for _ in 0..n_facets {
        writeln!(out, "5")?;
    }

    writeln!(out, "CELL_DATA {n_cells}")?;
    writeln!(out, "SCALARS facet_class int 1")?;
    writeln!(out, "LOOKUP_TABLE default")?;
    for _ in 0..n_tets {
        writeln!(out, "0")?;
    }
    for f in &mesh.boundary_facets {
        let label = match f.class {
            FacetClass::Dirichlet => 1,
            FacetClass::Contact => 2,
        };
        writeln!(out, "{label}")?;
    }

    if point_data.displacement.is_some() || point_data.gap.is_some() {
        writeln!(out, "POINT_DATA {nv}")?;
    }
    if let Some(disp) = point_data.displacement {
        writeln!(out, "VECTORS displacement double")?;
        for d in disp {
            writeln!(out, "{} {} {}", d[0], d[1], d[2])?;
        }
    }
    if let Some(gap) = point_data.gap {
        writeln!(out, "SCALARS gap double 1")?;
        writeln!(out, "LOOKUP_TABLE default")?;
        for g in gap {
            writeln!(out, "{g}")?;
        }
    }
    Ok(())
}
