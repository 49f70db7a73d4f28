//! Minimal ASCII PLY read/write for clouds and triangle meshes.

use crate::cloud::PointCloud;
use crate::error::GeomError;
use crate::mesh::TriMesh;
use graspgen_core::{real, Real};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

pub fn write_cloud<T: Real>(cloud: &PointCloud<T>, path: &Path) -> Result<(), GeomError> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "ply")?;
    writeln!(w, "format ascii 1.0")?;
    writeln!(w, "element vertex {}", cloud.len())?;
    writeln!(w, "property float x")?;
    writeln!(w, "property float y")?;
    writeln!(w, "property float z")?;
    writeln!(w, "end_header")?;
    for p in &cloud.points {
        writeln!(
            w,
            "{} {} {}",
            p[0].to_f64().unwrap() as f32,
            p[1].to_f64().unwrap() as f32,
            p[2].to_f64().unwrap() as f32
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_mesh<T: Real>(mesh: &TriMesh<T>, path: &Path) -> Result<(), GeomError> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "ply")?;
    writeln!(w, "format ascii 1.0")?;
    writeln!(w, "element vertex {}", mesh.vertices.len())?;
    writeln!(w, "property float x")?;
    writeln!(w, "property float y")?;
    writeln!(w, "property float z")?;
    writeln!(w, "element face {}", mesh.faces.len())?;
    writeln!(w, "property list uchar int vertex_indices")?;
    writeln!(w, "end_header")?;
    for p in &mesh.vertices {
        writeln!(
            w,
            "{} {} {}",
            p[0].to_f64().unwrap() as f32,
            p[1].to_f64().unwrap() as f32,
            p[2].to_f64().unwrap() as f32
        )?;
    }
    for f in &mesh.faces {
        writeln!(w, "3 {} {} {}", f[0], f[1], f[2])?;
    }
    w.flush()?;
    Ok(())
}

/// Either a cloud (no faces) or a mesh, depending on the file.
pub enum PlyContent<T> {
    Cloud(PointCloud<T>),
    Mesh(TriMesh<T>),
}

pub fn read<T: Real>(path: &Path) -> Result<PlyContent<T>, GeomError> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines();
    let magic = lines.next().ok_or_else(|| GeomError::Ply("empty file".into()))??;
    if magic.trim() != "ply" {
        return Err(GeomError::Ply("missing ply magic".into()));
    }
    let mut n_vertices = 0usize;
    let mut n_faces = 0usize;
    let mut vertex_props = 0usize;
    let mut current = String::new();
    loop {
        let line = lines.next().ok_or_else(|| GeomError::Ply("truncated header".into()))??;
        let line = line.trim().to_string();
        if line == "end_header" {
            break;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        match parts.as_slice() {
            ["format", fmt, _] if *fmt == "ascii" => {}
            ["format", fmt, _] => return Err(GeomError::Ply(format!("unsupported format {fmt}"))),
            ["comment", ..] => {}
            ["element", name, count] => {
                current = name.to_string();
                let count: usize =
                    count.parse().map_err(|_| GeomError::Ply(format!("bad count in {line:?}")))?;
                match current.as_str() {
                    "vertex" => n_vertices = count,
                    "face" => n_faces = count,
                    _ => {}
                }
            }
            ["property", "list", ..] => {}
            ["property", ..] if current == "vertex" => vertex_props += 1,
            ["property", ..] => {}
            _ => return Err(GeomError::Ply(format!("unrecognized header line {line:?}"))),
        }
    }
    if vertex_props < 3 {
        return Err(GeomError::Ply("vertex element needs x y z properties".into()));
    }
    let mut vertices = Vec::with_capacity(n_vertices);
    for _ in 0..n_vertices {
        let line = lines.next().ok_or_else(|| GeomError::Ply("truncated vertices".into()))??;
        let mut it = line.split_whitespace();
        let mut p = [T::zero(); 3];
        for v in &mut p {
            let tok = it.next().ok_or_else(|| GeomError::Ply(format!("short vertex line {line:?}")))?;
            let x: f64 = tok.parse().map_err(|_| GeomError::Ply(format!("bad float {tok:?}")))?;
            *v = real(x);
        }
        vertices.push(p);
    }
    if n_faces == 0 {
        return Ok(PlyContent::Cloud(PointCloud::new(vertices)));
    }
    let mut faces = Vec::with_capacity(n_faces);
    for _ in 0..n_faces {
        let line = lines.next().ok_or_else(|| GeomError::Ply("truncated faces".into()))??;
        let nums: Vec<usize> = line
            .split_whitespace()
            .map(|t| t.parse::<usize>().map_err(|_| GeomError::Ply(format!("bad index {t:?}"))))
            .collect::<Result<_, _>>()?;
        if nums.is_empty() {
            return Err(GeomError::Ply("empty face line".into()));
        }
        if nums[0] != 3 || nums.len() != 4 {
            return Err(GeomError::Ply(format!("only triangle faces supported, got {line:?}")));
        }
        faces.push([nums[1], nums[2], nums[3]]);
    }
    Ok(PlyContent::Mesh(TriMesh::new(vertices, faces)))
}
