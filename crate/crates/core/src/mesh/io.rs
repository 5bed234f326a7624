//! ASCII OFF / OBJ reading and OFF writing.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::Point3;

use super::{MeshError, TriMesh};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Off,
    Obj,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Option<MeshFormat> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "off" => Some(MeshFormat::Off),
            "obj" => Some(MeshFormat::Obj),
            _ => None,
        }
    }
}

pub fn load_mesh(path: &Path, format: MeshFormat) -> Result<TriMesh, MeshError> {
    let reader = BufReader::new(File::open(path)?);
    match format {
        MeshFormat::Off => read_off(reader),
        MeshFormat::Obj => read_obj(reader),
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> MeshError {
    MeshError::Parse { line, msg: msg.into() }
}

fn parse_f64(tok: &str, line: usize) -> Result<f64, MeshError> {
    let x: f64 = tok.parse().map_err(|_| parse_err(line, format!("invalid number '{tok}'")))?;
    if !x.is_finite() {
        return Err(parse_err(line, format!("non-finite coordinate '{tok}'")));
    }
    Ok(x)
}

fn parse_usize(tok: &str, line: usize) -> Result<usize, MeshError> {
    tok.parse().map_err(|_| parse_err(line, format!("invalid index '{tok}'")))
}

/// Reads an ASCII OFF file. Only triangle faces are accepted.
pub fn read_off<R: BufRead>(reader: R) -> Result<TriMesh, MeshError> {
    // (1-based line number, content without comments), blank lines dropped
    let mut lines = Vec::new();
    for (i, l) in reader.lines().enumerate() {
        let l = l?;
        let content = l.split('#').next().unwrap_or("").trim().to_string();
        if !content.is_empty() {
            lines.push((i + 1, content));
        }
    }
    let mut it = lines.into_iter();
    let (hline, header) = it.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let mut htoks = header.split_whitespace();
    if htoks.next() != Some("OFF") {
        return Err(parse_err(hline, "missing OFF header"));
    }
    let rest: Vec<&str> = htoks.collect();
    let (cline, counts) = if rest.is_empty() {
        let (n, c) = it.next().ok_or_else(|| parse_err(hline, "missing counts line"))?;
        (n, c.split_whitespace().map(str::to_string).collect::<Vec<_>>())
    } else {
        (hline, rest.iter().map(|s| s.to_string()).collect())
    };
    if counts.len() < 2 {
        return Err(parse_err(cline, "counts line needs vertex and face counts"));
    }
    let nv = parse_usize(&counts[0], cline)?;
    let nf = parse_usize(&counts[1], cline)?;

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, l) = it.next().ok_or_else(|| parse_err(cline, "unexpected end of vertex list"))?;
        let t: Vec<&str> = l.split_whitespace().collect();
        if t.len() < 3 {
            return Err(parse_err(ln, "vertex line needs three coordinates"));
        }
        vertices.push(Point3::new(parse_f64(t[0], ln)?, parse_f64(t[1], ln)?, parse_f64(t[2], ln)?));
    }
    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (ln, l) = it.next().ok_or_else(|| parse_err(cline, "unexpected end of face list"))?;
        let t: Vec<&str> = l.split_whitespace().collect();
        let count = parse_usize(t[0], ln)?;
        if count != 3 {
            return Err(MeshError::NonTriangular { line: ln, count });
        }
        if t.len() < 4 {
            return Err(parse_err(ln, "face line has fewer indices than declared"));
        }
        faces.push([parse_usize(t[1], ln)?, parse_usize(t[2], ln)?, parse_usize(t[3], ln)?]);
    }
    TriMesh::new(vertices, faces)
}

/// Reads an ASCII OBJ file (`v` and `f` records; 1-based or negative indices).
pub fn read_obj<R: BufRead>(reader: R) -> Result<TriMesh, MeshError> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (i, l) in reader.lines().enumerate() {
        let ln = i + 1;
        let l = l?;
        let content = l.split('#').next().unwrap_or("");
        let mut t = content.split_whitespace();
        match t.next() {
            Some("v") => {
                let c: Vec<&str> = t.collect();
                if c.len() < 3 {
                    return Err(parse_err(ln, "vertex record needs three coordinates"));
                }
                vertices.push(Point3::new(parse_f64(c[0], ln)?, parse_f64(c[1], ln)?, parse_f64(c[2], ln)?));
            }
            Some("f") => {
                let refs: Vec<&str> = t.collect();
                if refs.len() != 3 {
                    return Err(MeshError::NonTriangular { line: ln, count: refs.len() });
                }
                let mut face = [0usize; 3];
                for (k, r) in refs.iter().enumerate() {
                    let idx = r.split('/').next().unwrap_or("");
                    let raw: i64 = idx.parse().map_err(|_| parse_err(ln, format!("invalid index '{r}'")))?;
                    let resolved = match raw {
                        0 => return Err(parse_err(ln, "OBJ indices are 1-based")),
                        r if r > 0 => r - 1,
                        r => vertices.len() as i64 + r,
                    };
                    if resolved < 0 {
                        return Err(parse_err(ln, format!("index '{r}' out of range")));
                    }
                    face[k] = resolved as usize;
                }
                faces.push(face);
            }
            _ => {}
        }
    }
    TriMesh::new(vertices, faces)
}

/// Writes ASCII OFF with 17 significant digits per coordinate.
pub fn write_off<W: Write>(mesh: &TriMesh, mut w: W) -> std::io::Result<()> {
    writeln!(w, "OFF")?;
    writeln!(w, "{} {} {}", mesh.num_vertices(), mesh.num_faces(), mesh.num_edges())?;
    for p in mesh.vertices() {
        writeln!(w, "{:.16e} {:.16e} {:.16e}", p.x, p.y, p.z)?;
    }
    for f in mesh.faces() {
        writeln!(w, "3 {} {} {}", f[0], f[1], f[2])?;
    }
    w.flush()
}

pub fn write_off_file(mesh: &TriMesh, path: &Path) -> std::io::Result<()> {
    write_off(mesh, BufWriter::new(File::create(path)?))
}
