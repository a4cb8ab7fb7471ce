//! Visualization export as a legacy ASCII VTK unstructured grid.
//!
//! Curved elements are sampled on a lattice of `density` subdivisions per
//! edge and written as linear cells: `density²` triangles per triangle,
//! `2 density²` per quadrilateral, `density³` tetrahedra per tetrahedron and
//! `3 density³` per prism. Vertices are not shared between pieces.

use std::fmt::Write as _;
use std::path::Path;

use cutmesh::decomposition::{DecompositionResult, ElementDecomposition, ElementInterfaces};
use cutmesh::mesh::BackgroundMesh;
use cutmesh::reference_elements::{map_point, ElementFamily, ReferenceElement};

use crate::results::write_file;
use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellKind {
    Line,
    Triangle,
    Tetrahedron,
}

impl CellKind {
    fn vtk_type(self) -> u8 {
        match self {
            CellKind::Line => 3,
            CellKind::Triangle => 5,
            CellKind::Tetrahedron => 10,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub kind: CellKind,
    pub vertices: Vec<usize>,
    pub sign_code: u32,
    /// Level set whose interface the cell lies on, `-1` for volume cells.
    pub level_set: i32,
    pub parent: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExportMesh {
    pub points: Vec<[f64; 3]>,
    pub cells: Vec<Cell>,
}

/// Reference lattice points of `family` and the linear cells between them.
pub fn subdivide(family: ElementFamily, density: usize) -> (Vec<[f64; 3]>, Vec<(CellKind, Vec<usize>)>) {
    let d = density;
    let s = |i: usize| i as f64 / d as f64;
    let sym = |i: usize| -1.0 + 2.0 * i as f64 / d as f64;
    let mut points = Vec::new();
    let mut cells = Vec::new();
    match family {
        ElementFamily::Line => {
            points.extend((0..=d).map(|i| [sym(i), 0.0, 0.0]));
            cells.extend((0..d).map(|i| (CellKind::Line, vec![i, i + 1])));
        }
        ElementFamily::Triangle => {
            let (pts, tris) = triangle_lattice(d);
            points.extend(pts.iter().map(|&(i, j)| [s(i), s(j), 0.0]));
            cells.extend(tris.into_iter().map(|t| (CellKind::Triangle, t.to_vec())));
        }
        ElementFamily::Quadrilateral => {
            let id = |i: usize, j: usize| j * (d + 1) + i;
            for j in 0..=d {
                for i in 0..=d {
                    points.push([sym(i), sym(j), 0.0]);
                }
            }
            for j in 0..d {
                for i in 0..d {
                    cells.push((CellKind::Triangle, vec![id(i, j), id(i + 1, j), id(i + 1, j + 1)]));
                    cells.push((CellKind::Triangle, vec![id(i, j), id(i + 1, j + 1), id(i, j + 1)]));
                }
            }
        }
        ElementFamily::Tetrahedron => {
            let mut index = std::collections::HashMap::new();
            for k in 0..=d {
                for j in 0..=d - k {
                    for i in 0..=d - k - j {
                        index.insert([i, j, k], points.len());
                        points.push([s(i), s(j), s(k)]);
                    }
                }
            }
            // Freudenthal subdivision of the cube, kept where a >= b >= c;
            // (a, b, c) -> (a - b, b - c, c) maps that wedge onto the simplex.
            let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
            for a in 0..d {
                for b in 0..d {
                    for c in 0..d {
                        for perm in &perms {
                            let mut v = [a, b, c];
                            let mut verts = vec![v];
                            for &axis in perm {
                                v[axis] += 1;
                                verts.push(v);
                            }
                            if verts.iter().all(|v| v[0] <= d && v[0] >= v[1] && v[1] >= v[2]) {
                                let ids = verts.iter().map(|v| index[&[v[0] - v[1], v[1] - v[2], v[2]]]).collect();
                                cells.push((CellKind::Tetrahedron, ids));
                            }
                        }
                    }
                }
            }
        }
        ElementFamily::Prism => {
            let (pts, tris) = triangle_lattice(d);
            let layer = pts.len();
            for l in 0..=d {
                points.extend(pts.iter().map(|&(i, j)| [s(i), s(j), sym(l)]));
            }
            for l in 0..d {
                for t in &tris {
                    let v: Vec<usize> = t
                        .iter()
                        .map(|&i| i + l * layer)
                        .chain(t.iter().map(|&i| i + (l + 1) * layer))
                        .collect();
                    for split in [[0, 1, 2, 5], [0, 1, 5, 4], [0, 4, 5, 3]] {
                        cells.push((CellKind::Tetrahedron, split.iter().map(|&k| v[k]).collect()));
                    }
                }
            }
        }
    }
    (points, cells)
}

fn triangle_lattice(d: usize) -> (Vec<(usize, usize)>, Vec<[usize; 3]>) {
    let mut pts = Vec::new();
    let mut index = std::collections::HashMap::new();
    for j in 0..=d {
        for i in 0..=d - j {
            index.insert((i, j), pts.len());
            pts.push((i, j));
        }
    }
    let mut tris = Vec::new();
    for j in 0..d {
        for i in 0..d - j {
            tris.push([index[&(i, j)], index[&(i + 1, j)], index[&(i, j + 1)]]);
            if i + j + 1 < d {
                tris.push([index[&(i + 1, j)], index[&(i + 1, j + 1)], index[&(i, j + 1)]]);
            }
        }
    }
    (pts, tris)
}

impl ExportMesh {
    /// Samples `map` (reference to physical) on the lattice of `family`.
    pub fn push_piece(
        &mut self,
        family: ElementFamily,
        density: usize,
        map: impl Fn(&[f64]) -> [f64; 3],
        sign_code: u32,
        level_set: i32,
        parent: usize,
    ) {
        let (pts, cells) = subdivide(family, density);
        let base = self.points.len();
        let dim = family.dim();
        self.points.extend(pts.iter().map(|r| map(&r[..dim])));
        self.cells.extend(cells.into_iter().map(|(kind, v)| Cell {
            kind,
            vertices: v.into_iter().map(|i| i + base).collect(),
            sign_code,
            level_set,
            parent,
        }));
    }

    pub fn to_vtk(&self, title: &str) -> String {
        let mut out = String::new();
        writeln!(out, "# vtk DataFile Version 3.0\n{title}\nASCII\nDATASET UNSTRUCTURED_GRID").unwrap();
        writeln!(out, "POINTS {} double", self.points.len()).unwrap();
        for p in &self.points {
            writeln!(out, "{} {} {}", p[0], p[1], p[2]).unwrap();
        }
        let size: usize = self.cells.iter().map(|c| c.vertices.len() + 1).sum();
        writeln!(out, "CELLS {} {size}", self.cells.len()).unwrap();
        for c in &self.cells {
            out.push_str(&c.vertices.len().to_string());
            for v in &c.vertices {
                write!(out, " {v}").unwrap();
            }
            out.push('\n');
        }
        writeln!(out, "CELL_TYPES {}", self.cells.len()).unwrap();
        for c in &self.cells {
            writeln!(out, "{}", c.kind.vtk_type()).unwrap();
        }
        writeln!(out, "CELL_DATA {}", self.cells.len()).unwrap();
        let scalars: [(&str, fn(&Cell) -> i64); 3] = [
            ("sign_code", |c| c.sign_code as i64),
            ("level_set", |c| c.level_set as i64),
            ("parent_element", |c| c.parent as i64),
        ];
        for (name, get) in scalars {
            writeln!(out, "SCALARS {name} int 1\nLOOKUP_TABLE default").unwrap();
            for c in &self.cells {
                writeln!(out, "{}", get(c)).unwrap();
            }
        }
        out
    }

    pub fn write_vtk(&self, path: &Path, title: &str) -> Result<(), CliError> {
        write_file(path, &self.to_vtk(title))
    }
}

fn pad<const D: usize>(x: &[f64]) -> [f64; 3] {
    let mut p = [0.0; 3];
    p[..D].copy_from_slice(&x[..D]);
    p
}

/// Sub-elements and tagged interfaces of a decomposition, composed with the
/// background element maps.
pub fn decomposition_mesh<const D: usize>(
    result: &DecompositionResult<D>,
    mesh: &BackgroundMesh<D>,
    density: usize,
) -> Result<ExportMesh, CliError> {
    let bg = mesh.reference();
    let mut out = ExportMesh::default();
    for (e, dec) in result.elements.iter().enumerate() {
        let xe = mesh.element_nodes(e);
        match dec {
            ElementDecomposition::Uncut { signs } => {
                out.push_piece(
                    bg.family(),
                    density,
                    |r| pad::<D>(map_point(bg, &xe, r).as_slice()),
                    signs.code(),
                    -1,
                    e,
                );
            }
            ElementDecomposition::Cut {
                sub_elements,
                interfaces,
                ..
            } => {
                for s in sub_elements {
                    let elem = ReferenceElement::cached(s.family, s.order)?;
                    out.push_piece(
                        s.family,
                        density,
                        |r| pad::<D>(map_point(bg, &xe, map_point(elem, &s.nodes, r).as_slice()).as_slice()),
                        s.signs.code(),
                        -1,
                        e,
                    );
                }
                for i in interfaces {
                    let elem = ReferenceElement::cached(i.element.family, i.element.order)?;
                    out.push_piece(
                        i.element.family,
                        density,
                        |r| pad::<D>(map_point(bg, &xe, map_point(elem, &i.element.nodes, r).as_slice()).as_slice()),
                        i.signs.code(),
                        i.level_set as i32,
                        e,
                    );
                }
            }
        }
    }
    Ok(out)
}

/// Interface elements of a single level set, without sign information.
pub fn interface_mesh<const D: usize>(
    interfaces: &[ElementInterfaces<D>],
    mesh: &BackgroundMesh<D>,
    density: usize,
) -> Result<ExportMesh, CliError> {
    let bg = mesh.reference();
    let mut out = ExportMesh::default();
    for (e, ei) in interfaces.iter().enumerate() {
        let xe = mesh.element_nodes(e);
        for i in &ei.interfaces {
            let elem = ReferenceElement::cached(i.family, i.order)?;
            out.push_piece(
                i.family,
                density,
                |r| pad::<D>(map_point(bg, &xe, map_point(elem, &i.nodes, r).as_slice()).as_slice()),
                0,
                0,
                e,
            );
        }
    }
    Ok(out)
}

/// Writes the decomposition of `mesh` to `path`.
pub fn export_visualization<const D: usize>(
    result: &DecompositionResult<D>,
    mesh: &BackgroundMesh<D>,
    path: &Path,
    density: usize,
) -> Result<(), CliError> {
    if density == 0 {
        return Err(crate::ConfigError::new("export_density", "must be at least 1").into());
    }
    decomposition_mesh(result, mesh, density)?.write_vtk(path, "cutmesh decomposition")
}
