//! Structured triangulations of the unit square and their edge neighborhoods.
//!
//! Vertices are numbered interior-first: indices `0..n_interior` lie strictly
//! inside the square, `n_interior..n_total` on its boundary. Indices are
//! 0-based in memory and 1-based in the text file format.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum MeshKind {
    /// Each grid cell is cut by the diagonal from bottom-left to top-right.
    LeftDiag,
    /// Each grid cell is cut by the diagonal from top-left to bottom-right.
    RightDiag,
    /// Rows of cells alternate between the two diagonals and the interior
    /// nodes of every second horizontal grid line are moved to the right.
    /// Each row is cut by the diagonal that leans towards its shifted line,
    /// so after the shift every row carries the long diagonal.
    Shifted,
}

/// Selects one of the structured triangulation families.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct MeshFamily {
    pub kind: MeshKind,
    /// Shift as a fraction of the horizontal mesh width; zero unless `Shifted`.
    pub shift_fraction: f64,
    /// Which grid lines `y = j/ne` are shifted: odd `j` (default, the even
    /// lines when the bottom boundary is counted as line 1) or even `j`.
    pub shift_odd_grid_lines: bool,
}

impl MeshFamily {
    pub fn left() -> Self {
        Self {
            kind: MeshKind::LeftDiag,
            shift_fraction: 0.0,
            shift_odd_grid_lines: true,
        }
    }

    pub fn right() -> Self {
        Self {
            kind: MeshKind::RightDiag,
            shift_fraction: 0.0,
            shift_odd_grid_lines: true,
        }
    }

    pub fn shifted(shift_fraction: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&shift_fraction) {
            return Err(Error::InvalidArgument(format!(
                "shift fraction must lie in [0, 1), got {shift_fraction}"
            )));
        }
        Ok(Self {
            kind: MeshKind::Shifted,
            shift_fraction,
            shift_odd_grid_lines: true,
        })
    }

    /// Shifts the grid lines `y = 2k/ne` instead of `y = (2k+1)/ne`.
    pub fn with_even_grid_lines(mut self) -> Self {
        self.shift_odd_grid_lines = false;
        self
    }
}

/// A 2D simplicial triangulation with interior-first vertex numbering.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh<T> {
    vertices: Vec<[T; 2]>,
    triangles: Vec<[usize; 3]>,
    n_interior: usize,
    /// Sorted edge neighbors of every vertex (interior and boundary).
    adjacency: Vec<Vec<usize>>,
}

impl<T: Scalar> Mesh<T> {
    /// Builds a mesh from raw data, validating indices and orientation.
    pub fn new(vertices: Vec<[T; 2]>, triangles: Vec<[usize; 3]>, n_interior: usize) -> Result<Self> {
        let n = vertices.len();
        if n_interior > n {
            return Err(Error::InvalidArgument(format!(
                "interior count {n_interior} exceeds vertex count {n}"
            )));
        }
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= n) {
                return Err(Error::InvalidArgument(format!(
                    "triangle {t} references a vertex outside 0..{n}"
                )));
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::InvalidArgument(format!("triangle {t} is degenerate")));
            }
        }
        let mut mesh = Self {
            vertices,
            triangles,
            n_interior,
            adjacency: Vec::new(),
        };
        for t in 0..mesh.triangles.len() {
            if mesh.signed_area(t) <= T::zero() {
                return Err(Error::InvalidArgument(format!(
                    "triangle {t} has non-positive signed area"
                )));
            }
        }
        mesh.adjacency = build_adjacency(n, &mesh.triangles);
        Ok(mesh)
    }

    pub fn n_total(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_interior(&self) -> usize {
        self.n_interior
    }

    pub fn vertices(&self) -> &[[T; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn is_interior(&self, i: usize) -> bool {
        i < self.n_interior
    }

    /// Edge neighborhood `S_i` of an interior vertex; `None` for boundary vertices.
    pub fn neighborhood(&self, i: usize) -> Option<&[usize]> {
        if i < self.n_interior {
            Some(&self.adjacency[i])
        } else {
            None
        }
    }

    /// The sets `S_i` for all interior vertices, in index order.
    pub fn neighborhoods(&self) -> &[Vec<usize>] {
        &self.adjacency[..self.n_interior]
    }

    /// Edge neighbors of any vertex, boundary vertices included.
    pub fn adjacency(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn triangle_coords(&self, t: usize) -> [[T; 2]; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn signed_area(&self, t: usize) -> T {
        let [p, q, r] = self.triangle_coords(t);
        ((q[0] - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (q[1] - p[1])) / T::lit(2.0)
    }

    pub fn total_area(&self) -> T {
        (0..self.triangles.len()).fold(T::zero(), |s, t| s + self.signed_area(t))
    }

    /// Interior edges whose two opposite angles sum to more than `pi + tol`.
    pub fn non_delaunay_edges(&self, tol: T) -> Vec<(usize, usize)> {
        let mut opposite: std::collections::BTreeMap<(usize, usize), Vec<T>> = Default::default();
        for t in 0..self.triangles.len() {
            let tri = self.triangles[t];
            let xy = self.triangle_coords(t);
            for k in 0..3 {
                let (a, b) = (tri[(k + 1) % 3], tri[(k + 2) % 3]);
                let key = (a.min(b), a.max(b));
                let p = xy[k];
                let u = [xy[(k + 1) % 3][0] - p[0], xy[(k + 1) % 3][1] - p[1]];
                let v = [xy[(k + 2) % 3][0] - p[0], xy[(k + 2) % 3][1] - p[1]];
                let cross = u[0] * v[1] - u[1] * v[0];
                let dot = u[0] * v[0] + u[1] * v[1];
                opposite.entry(key).or_default().push(cross.atan2(dot));
            }
        }
        opposite
            .into_iter()
            .filter(|(_, angles)| angles.len() == 2 && angles[0] + angles[1] > T::PI() + tol)
            .map(|(e, _)| e)
            .collect()
    }

    /// Writes the plain-text mesh format: `N M T`, then `N` coordinate lines,
    /// then `T` lines of 1-based vertex indices.
    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        let mut s = String::new();
        let _ = writeln!(s, "{} {} {}", self.n_total(), self.n_interior, self.triangles.len());
        for v in &self.vertices {
            let _ = writeln!(s, "{} {}", v[0], v[1]);
        }
        for t in &self.triangles {
            let _ = writeln!(s, "{} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
        }
        out.write_all(s.as_bytes())?;
        Ok(())
    }

    pub fn write_file(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write(std::io::BufWriter::new(f))
    }

    pub fn read<R: Read>(input: R) -> Result<Self> {
        let mut lines = BufReader::new(input).lines().enumerate().filter_map(|(k, l)| match l {
            Ok(l) if l.trim().is_empty() => None,
            Ok(l) => Some(Ok((k + 1, l))),
            Err(e) => Some(Err(e)),
        });
        let mut next = |what: &str| -> Result<(usize, String)> {
            match lines.next() {
                Some(r) => Ok(r?),
                None => Err(Error::Parse {
                    line: 0,
                    msg: format!("unexpected end of file, expected {what}"),
                }),
            }
        };
        let (line, header) = next("header `N M T`")?;
        let counts = parse_fields::<usize>(&header, 3, line)?;
        let (n, m, nt) = (counts[0], counts[1], counts[2]);
        if m > n {
            return Err(Error::Parse {
                line,
                msg: format!("interior count {m} exceeds vertex count {n}"),
            });
        }
        let mut vertices = Vec::with_capacity(n);
        for _ in 0..n {
            let (line, l) = next("vertex coordinates")?;
            let xy = parse_fields::<T>(&l, 2, line)?;
            vertices.push([xy[0], xy[1]]);
        }
        let mut triangles = Vec::with_capacity(nt);
        for _ in 0..nt {
            let (line, l) = next("triangle")?;
            let ijk = parse_fields::<usize>(&l, 3, line)?;
            if ijk.iter().any(|&v| v == 0 || v > n) {
                return Err(Error::Parse {
                    line,
                    msg: format!("vertex index out of range 1..={n}"),
                });
            }
            triangles.push([ijk[0] - 1, ijk[1] - 1, ijk[2] - 1]);
        }
        if let Some(Ok((line, _))) = lines.next() {
            return Err(Error::Parse {
                line,
                msg: "trailing data after last triangle".into(),
            });
        }
        Mesh::new(vertices, triangles, m).map_err(|e| Error::Parse {
            line: 0,
            msg: e.to_string(),
        })
    }

    pub fn read_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::read(std::fs::File::open(path)?)
    }
}

fn parse_fields<F: std::str::FromStr>(line_text: &str, count: usize, line: usize) -> Result<Vec<F>> {
    let fields: Vec<&str> = line_text.split_whitespace().collect();
    if fields.len() != count {
        return Err(Error::Parse {
            line,
            msg: format!("expected {count} fields, found {}", fields.len()),
        });
    }
    fields
        .iter()
        .map(|f| {
            f.parse::<F>().map_err(|_| Error::Parse {
                line,
                msg: format!("cannot parse `{f}`"),
            })
        })
        .collect()
}

fn build_adjacency(n: usize, triangles: &[[usize; 3]]) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for tri in triangles {
        for a in 0..3 {
            for b in 0..3 {
                if a != b {
                    adj[tri[a]].push(tri[b]);
                }
            }
        }
    }
    for row in &mut adj {
        row.sort_unstable();
        row.dedup();
    }
    adj
}

/// Generates a triangulation of the unit square on an `(ne+1) x (ne+1)` grid.
pub fn generate_mesh<T: Scalar>(family: MeshFamily, ne: usize) -> Result<Mesh<T>> {
    if ne < 2 {
        return Err(Error::InvalidArgument(format!("ne must be at least 2, got {ne}")));
    }
    let n1 = ne + 1;
    let ne_t = T::of_usize(ne);
    let shift = match family.kind {
        MeshKind::Shifted => T::lit(family.shift_fraction) / ne_t,
        _ => T::zero(),
    };
    let is_interior = |i: usize, j: usize| i > 0 && i < ne && j > 0 && j < ne;

    // grid (i, j) -> vertex number, interior nodes first, row by row
    let mut number = vec![usize::MAX; n1 * n1];
    let mut vertices = Vec::with_capacity(n1 * n1);
    let mut place = |i: usize, j: usize, vertices: &mut Vec<[T; 2]>| {
        let mut x = T::of_usize(i) / ne_t;
        let y = T::of_usize(j) / ne_t;
        if is_interior(i, j) && (j % 2 == 1) == family.shift_odd_grid_lines {
            x += shift;
        }
        number[j * n1 + i] = vertices.len();
        vertices.push([x, y]);
    };
    for j in 1..ne {
        for i in 1..ne {
            place(i, j, &mut vertices);
        }
    }
    let n_interior = vertices.len();
    for j in 0..n1 {
        for i in 0..n1 {
            if !is_interior(i, j) {
                place(i, j, &mut vertices);
            }
        }
    }

    let id = |i: usize, j: usize| number[j * n1 + i];
    let mut triangles = Vec::with_capacity(2 * ne * ne);
    for j in 0..ne {
        for i in 0..ne {
            let (p00, p10, p01, p11) = (id(i, j), id(i + 1, j), id(i, j + 1), id(i + 1, j + 1));
            let rising = match family.kind {
                MeshKind::LeftDiag => true,
                MeshKind::RightDiag => false,
                // the row leans towards its upper line if that line is shifted
                MeshKind::Shifted => ((j + 1) % 2 == 1) == family.shift_odd_grid_lines,
            };
            if rising {
                triangles.push([p00, p10, p11]);
                triangles.push([p00, p11, p01]);
            } else {
                triangles.push([p00, p10, p01]);
                triangles.push([p10, p11, p01]);
            }
        }
    }
    Mesh::new(vertices, triangles, n_interior)
}
