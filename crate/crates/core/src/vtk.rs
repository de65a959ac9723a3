//! Legacy ASCII VTK output of nodal P1 fields.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::scalar::Scalar;

/// Writes `mesh` and the nodal values `u` as an unstructured grid with the
/// point scalar field `u`.
pub fn write_vtk<T: Scalar, W: Write>(mesh: &Mesh<T>, u: &[T], mut out: W) -> Result<()> {
    if u.len() != mesh.n_total() {
        return Err(Error::InvalidArgument(format!(
            "field has {} values for {} vertices",
            u.len(),
            mesh.n_total()
        )));
    }
    let n = mesh.n_total();
    let t = mesh.triangles().len();
    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(out, "P1 solution")?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(out, "POINTS {n} double")?;
    for v in mesh.vertices() {
        writeln!(out, "{} {} 0", v[0].to_f64_lossy(), v[1].to_f64_lossy())?;
    }
    writeln!(out, "CELLS {t} {}", 4 * t)?;
    for tri in mesh.triangles() {
        writeln!(out, "3 {} {} {}", tri[0], tri[1], tri[2])?;
    }
    writeln!(out, "CELL_TYPES {t}")?;
    for _ in 0..t {
        writeln!(out, "5")?;
    }
    writeln!(out, "POINT_DATA {n}")?;
    writeln!(out, "SCALARS u double 1")?;
    writeln!(out, "LOOKUP_TABLE default")?;
    for &x in u {
        writeln!(out, "{}", x.to_f64_lossy())?;
    }
    Ok(())
}

pub fn emit_vtk<T: Scalar>(mesh: &Mesh<T>, u: &[T], path: impl AsRef<Path>) -> Result<()> {
    let mut buf = Vec::new();
    write_vtk(mesh, u, &mut buf)?;
    std::fs::write(path, buf)?;
    Ok(())
}
