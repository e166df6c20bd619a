//! STL (binary and ASCII) and OBJ readers and writers.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CleanReport, TriangleMesh};
use crate::error::{Error, Result};
use crate::geom::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeshFormat {
    StlBinary,
    StlAscii,
    Obj,
}

impl MeshFormat {
    /// Guesses the format from the extension and, for STL, the size check of
    /// the binary layout.
    pub fn detect(path: &Path, bytes: &[u8]) -> Result<Self> {
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase);
        match ext.as_deref() {
            Some("obj") => Ok(MeshFormat::Obj),
            Some("stl") => {
                if bytes.len() >= 84 {
                    let n = u32::from_le_bytes(bytes[80..84].try_into().unwrap()) as usize;
                    if bytes.len() == 84 + 50 * n {
                        return Ok(MeshFormat::StlBinary);
                    }
                }
                Ok(MeshFormat::StlAscii)
            }
            _ => Err(Error::Format {
                path: path.display().to_string(),
                location: "file name".into(),
                message: "unknown mesh extension (expected .stl or .obj)".into(),
            }),
        }
    }
}

/// A loaded mesh plus what cleaning did to it.
#[derive(Debug, Clone)]
pub struct LoadedMesh {
    pub mesh: TriangleMesh,
    pub report: CleanReport,
}

type Raw = (Vec<Vec3>, Vec<[usize; 3]>);

fn format_err(path: &str, location: String, message: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_string(),
        location,
        message: message.into(),
    }
}

/// Reads, welds and cleans a mesh. `format = None` detects it from the file.
pub fn load_mesh(path: impl AsRef<Path>, format: Option<MeshFormat>) -> Result<LoadedMesh> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let format = match format {
        Some(f) => f,
        None => MeshFormat::detect(path, &bytes)?,
    };
    let name = path.display().to_string();
    let raw = parse_bytes(&bytes, format, &name)?;
    finish(raw, &name)
}

pub fn parse_bytes(bytes: &[u8], format: MeshFormat, name: &str) -> Result<Raw> {
    match format {
        MeshFormat::StlBinary => parse_stl_binary(bytes, name),
        MeshFormat::StlAscii => parse_stl_ascii(as_text(bytes, name)?, name),
        MeshFormat::Obj => parse_obj(as_text(bytes, name)?, name),
    }
}

fn as_text<'a>(bytes: &'a [u8], name: &str) -> Result<&'a str> {
    std::str::from_utf8(bytes)
        .map_err(|e| format_err(name, format!("byte {}", e.valid_up_to()), "invalid UTF-8"))
}

/// Welds, validates and cleans raw geometry.
pub fn finish(raw: Raw, name: &str) -> Result<LoadedMesh> {
    let (vertices, faces) = raw;
    if faces.is_empty() {
        return Err(Error::EmptyInput(format!("{name}: no faces")));
    }
    let mesh = TriangleMesh::new(vertices, faces)?;
    let (welded, welded_count) = mesh.weld();
    let (clean, mut report) = welded.clean();
    report.welded_vertices = welded_count;
    if clean.is_empty() {
        return Err(Error::EmptyInput(format!("{name}: all faces degenerate")));
    }
    Ok(LoadedMesh {
        mesh: clean,
        report,
    })
}

pub fn parse_stl_binary(bytes: &[u8], name: &str) -> Result<Raw> {
    if bytes.len() < 84 {
        return Err(format_err(name, format!("byte {}", bytes.len()), "truncated STL header"));
    }
    let n = u32::from_le_bytes(bytes[80..84].try_into().unwrap()) as usize;
    let need = 84 + 50 * n;
    if bytes.len() < need {
        let rec = (bytes.len() - 84) / 50;
        return Err(format_err(
            name,
            format!("byte {}", 84 + 50 * rec),
            format!("truncated at facet {rec} of {n}"),
        ));
    }
    let mut vertices = Vec::with_capacity(3 * n);
    let mut faces = Vec::with_capacity(n);
    for i in 0..n {
        let rec = &bytes[84 + 50 * i..84 + 50 * (i + 1)];
        let f = |k: usize| f32::from_le_bytes(rec[4 * k..4 * k + 4].try_into().unwrap()) as f64;
        let base = vertices.len();
        for v in 0..3 {
            let p = Vec3::new(f(3 + 3 * v), f(4 + 3 * v), f(5 + 3 * v));
            if !p.iter().all(|c| c.is_finite()) {
                return Err(format_err(name, format!("byte {}", 84 + 50 * i), "non-finite vertex"));
            }
            vertices.push(p);
        }
        faces.push([base, base + 1, base + 2]);
    }
    Ok((vertices, faces))
}

pub fn parse_stl_ascii(text: &str, name: &str) -> Result<Raw> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    let mut pending: Vec<usize> = Vec::new();
    let mut saw_solid = false;
    for (ln, line) in text.lines().enumerate() {
        let loc = || format!("line {}", ln + 1);
        let mut tok = line.split_whitespace();
        match tok.next() {
            None => {}
            Some("solid") => saw_solid = true,
            Some("vertex") => {
                let mut c = [0.0; 3];
                for slot in &mut c {
                    let t = tok
                        .next()
                        .ok_or_else(|| format_err(name, loc(), "vertex needs 3 coordinates"))?;
                    *slot = t
                        .parse::<f64>()
                        .map_err(|_| format_err(name, loc(), format!("bad number {t:?}")))?;
                }
                if !c.iter().all(|v| v.is_finite()) {
                    return Err(format_err(name, loc(), "non-finite vertex"));
                }
                pending.push(vertices.len());
                vertices.push(Vec3::new(c[0], c[1], c[2]));
            }
            Some("endfacet") => {
                if pending.len() != 3 {
                    return Err(format_err(
                        name,
                        loc(),
                        format!("facet has {} vertices, expected 3", pending.len()),
                    ));
                }
                faces.push([pending[0], pending[1], pending[2]]);
                pending.clear();
            }
            Some("facet" | "outer" | "endloop" | "endsolid") => {}
            Some(other) => {
                return Err(format_err(name, loc(), format!("unexpected keyword {other:?}")))
            }
        }
    }
    if !saw_solid {
        return Err(format_err(name, "line 1".into(), "missing 'solid' header"));
    }
    if !pending.is_empty() {
        return Err(format_err(name, "end of file".into(), "unterminated facet"));
    }
    Ok((vertices, faces))
}

pub fn parse_obj(text: &str, name: &str) -> Result<Raw> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let loc = || format!("line {}", ln + 1);
        let mut tok = line.split_whitespace();
        match tok.next() {
            Some("v") => {
                let mut c = [0.0; 3];
                for slot in &mut c {
                    let t = tok
                        .next()
                        .ok_or_else(|| format_err(name, loc(), "v needs 3 coordinates"))?;
                    *slot = t
                        .parse::<f64>()
                        .map_err(|_| format_err(name, loc(), format!("bad number {t:?}")))?;
                }
                if !c.iter().all(|v| v.is_finite()) {
                    return Err(format_err(name, loc(), "non-finite vertex"));
                }
                vertices.push(Vec3::new(c[0], c[1], c[2]));
            }
            Some("f") => {
                let mut idx = Vec::new();
                for t in tok {
                    let head = t.split('/').next().unwrap_or("");
                    let i: i64 = head
                        .parse()
                        .map_err(|_| format_err(name, loc(), format!("bad face index {t:?}")))?;
                    let n = vertices.len() as i64;
                    let resolved = if i > 0 { i - 1 } else { n + i };
                    if i == 0 || resolved < 0 || resolved >= n {
                        return Err(format_err(name, loc(), format!("face index {i} out of range")));
                    }
                    idx.push(resolved as usize);
                }
                if idx.len() < 3 {
                    return Err(format_err(name, loc(), "face needs at least 3 vertices"));
                }
                for k in 1..idx.len() - 1 {
                    faces.push([idx[0], idx[k], idx[k + 1]]);
                }
            }
            _ => {}
        }
    }
    Ok((vertices, faces))
}

pub fn stl_binary_bytes(mesh: &TriangleMesh) -> Vec<u8> {
    let mut out = Vec::with_capacity(84 + 50 * mesh.face_count());
    let mut header = [0u8; 80];
    header[..14].copy_from_slice(b"featrec binary");
    out.extend_from_slice(&header);
    out.extend_from_slice(&(mesh.face_count() as u32).to_le_bytes());
    for (f, (n, _)) in mesh.faces().iter().zip(mesh.face_normals()) {
        for c in n.iter() {
            out.extend_from_slice(&(*c as f32).to_le_bytes());
        }
        for &v in f {
            for c in mesh.vertices()[v].iter() {
                out.extend_from_slice(&(*c as f32).to_le_bytes());
            }
        }
        out.extend_from_slice(&0u16.to_le_bytes());
    }
    out
}

pub fn stl_ascii_string(mesh: &TriangleMesh) -> String {
    let mut s = String::from("solid featrec\n");
    for (f, (n, _)) in mesh.faces().iter().zip(mesh.face_normals()) {
        let _ = writeln!(s, "  facet normal {} {} {}", n.x, n.y, n.z);
        s.push_str("    outer loop\n");
        for &v in f {
            let p = mesh.vertices()[v];
            let _ = writeln!(s, "      vertex {} {} {}", p.x, p.y, p.z);
        }
        s.push_str("    endloop\n  endfacet\n");
    }
    s.push_str("endsolid featrec\n");
    s
}

/// A named face group for OBJ output.
#[derive(Debug, Clone)]
pub struct ObjGroup {
    pub name: String,
    pub faces: Vec<usize>,
}

/// OBJ text. Faces not in any group come first, ungrouped; then each group
/// under a `g` line.
pub fn obj_string(mesh: &TriangleMesh, groups: &[ObjGroup]) -> String {
    let mut s = String::new();
    for p in mesh.vertices() {
        let _ = writeln!(s, "v {} {} {}", p.x, p.y, p.z);
    }
    let mut grouped = vec![false; mesh.face_count()];
    for g in groups {
        for &f in &g.faces {
            grouped[f] = true;
        }
    }
    let face_line = |s: &mut String, f: &[usize; 3]| {
        let _ = writeln!(s, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
    };
    for (i, f) in mesh.faces().iter().enumerate() {
        if !grouped[i] {
            face_line(&mut s, f);
        }
    }
    for g in groups {
        let _ = writeln!(s, "g {}", g.name);
        for &f in &g.faces {
            face_line(&mut s, &mesh.faces()[f]);
        }
    }
    s
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn save_mesh(mesh: &TriangleMesh, path: impl AsRef<Path>, format: MeshFormat) -> Result<()> {
    let path = path.as_ref();
    match format {
        MeshFormat::StlBinary => write_bytes(path, &stl_binary_bytes(mesh)),
        MeshFormat::StlAscii => write_bytes(path, stl_ascii_string(mesh).as_bytes()),
        MeshFormat::Obj => write_bytes(path, obj_string(mesh, &[]).as_bytes()),
    }
}

pub fn save_obj_groups(mesh: &TriangleMesh, groups: &[ObjGroup], path: impl AsRef<Path>) -> Result<()> {
    write_bytes(path.as_ref(), obj_string(mesh, groups).as_bytes())
}

/// Sidecar entry mapping an OBJ group to a class label and display color.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupLabel {
    pub group: String,
    pub label: String,
    pub color: [u8; 3],
}

pub fn save_obj_sidecar(labels: &[GroupLabel], path: impl AsRef<Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(labels)
        .map_err(|e| Error::Persistence(e.to_string()))?;
    write_bytes(path.as_ref(), text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::test_shapes::unit_cube;

    fn tmp(name: &str) -> (tempfile::TempDir, std::path::PathBuf) {
        let d = tempfile::tempdir().unwrap();
        let p = d.path().join(name);
        (d, p)
    }

    /// Cube as an unwelded triangle soup, as STL stores it.
    fn soup(m: &TriangleMesh) -> TriangleMesh {
        let mut v = Vec::new();
        let mut f = Vec::new();
        for t in 0..m.face_count() {
            let b = v.len();
            v.extend_from_slice(&m.triangle(t));
            f.push([b, b + 1, b + 2]);
        }
        TriangleMesh::new(v, f).unwrap()
    }

    #[test]
    fn cube_stl_welds_to_eight_vertices() {
        let cube = soup(&unit_cube());
        assert_eq!(cube.vertex_count(), 36);
        for fmt in [MeshFormat::StlBinary, MeshFormat::StlAscii] {
            let (_d, p) = tmp("cube.stl");
            save_mesh(&cube, &p, fmt).unwrap();
            let loaded = load_mesh(&p, None).unwrap();
            assert_eq!(loaded.mesh.vertex_count(), 8);
            assert_eq!(loaded.mesh.face_count(), 12);
            assert_eq!(loaded.report.welded_vertices, 28);
        }
    }

    #[test]
    fn zero_area_ascii_facet_is_dropped() {
        let mut text = stl_ascii_string(&unit_cube());
        text = text.replace(
            "endsolid featrec\n",
            "facet normal 0 0 0\nouter loop\nvertex 0 0 0\nvertex 1 0 0\nvertex 0.5 0 0\nendloop\nendfacet\nendsolid featrec\n",
        );
        let raw = parse_stl_ascii(&text, "t").unwrap();
        let loaded = finish(raw, "t").unwrap();
        assert_eq!(loaded.report.dropped_degenerate, 1);
        assert_eq!(loaded.mesh.face_count(), 12);
    }

    #[test]
    fn obj_ignores_suffixes_and_handles_negative_indices() {
        let text = "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\nf 1/1/1 2//2 3\nf -4 -2 -3\n";
        let (v, f) = parse_obj(text, "t").unwrap();
        assert_eq!(v.len(), 4);
        assert_eq!(f, vec![[0, 1, 2], [0, 2, 1]]);
    }

    #[test]
    fn errors_carry_locations() {
        let err = parse_obj("v 0 0 0\nv 1 x 0\n", "m.obj").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        let err = parse_stl_binary(&[0u8; 90], "m.stl");
        assert!(err.is_ok(), "zero facets is a valid (empty) binary STL");
        let mut bytes = stl_binary_bytes(&unit_cube());
        bytes.truncate(84 + 50 * 3 + 10);
        let err = parse_stl_binary(&bytes, "m.stl").unwrap_err();
        assert!(err.to_string().contains("byte 234"), "{err}");
    }

    #[test]
    fn empty_mesh_is_an_error() {
        let (_d, p) = tmp("empty.obj");
        std::fs::write(&p, "v 0 0 0\n").unwrap();
        assert!(matches!(load_mesh(&p, None), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn obj_roundtrip_is_exact() {
        let m = unit_cube().transformed(
            &crate::geom::axis_angle(&Vec3::new(1.0, 2.0, 3.0).normalize(), 0.7),
            &Vec3::new(0.1, 0.2, 0.3),
        );
        let groups = [ObjGroup {
            name: "top".into(),
            faces: vec![2, 3],
        }];
        let text = obj_string(&m, &groups);
        assert!(text.contains("g top\n"));
        let (v, f) = parse_obj(&text, "t").unwrap();
        assert_eq!(v, m.vertices());
        assert_eq!(f.len(), 12);
    }
}
