//! Test-surface generators. All meshes are outward oriented.

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::{Point3, Vector3};

use super::{MeshError, TriMesh};

/// Resource guard on icosphere subdivision.
pub const MAX_ICOSPHERE_LEVEL: u32 = 8;

fn unit_icosphere(level: u32) -> (Vec<Vector3<f64>>, Vec<[usize; 3]>) {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<Vector3<f64>> = [
        (-1.0, t, 0.0),
        (1.0, t, 0.0),
        (-1.0, -t, 0.0),
        (1.0, -t, 0.0),
        (0.0, -1.0, t),
        (0.0, 1.0, t),
        (0.0, -1.0, -t),
        (0.0, 1.0, -t),
        (t, 0.0, -1.0),
        (t, 0.0, 1.0),
        (-t, 0.0, -1.0),
        (-t, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Vector3::new(x, y, z).normalize())
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..level {
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |a: usize, b: usize, verts: &mut Vec<Vector3<f64>>| -> usize {
            let key = (a.min(b), a.max(b));
            *midpoint.entry(key).or_insert_with(|| {
                verts.push(((verts[a] + verts[b]) * 0.5).normalize());
                verts.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for &[a, b, c] in &faces {
            let ab = mid(a, b, &mut verts);
            let bc = mid(b, c, &mut verts);
            let ca = mid(c, a, &mut verts);
            next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    (verts, faces)
}

/// Round sphere of the given radius centred at the origin;
/// `10·4^level + 2` vertices, each exactly on the sphere up to rounding.
pub fn gen_icosphere(radius: f64, level: u32) -> Result<TriMesh, MeshError> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(MeshError::InvalidParameter(format!("radius must be positive, got {radius}")));
    }
    if level > MAX_ICOSPHERE_LEVEL {
        return Err(MeshError::InvalidParameter(format!(
            "level out of range: {level} > {MAX_ICOSPHERE_LEVEL}"
        )));
    }
    let (unit, faces) = unit_icosphere(level);
    TriMesh::new(unit.into_iter().map(|u| Point3::from(u * radius)).collect(), faces)
}

/// Icosphere vertices scaled by `(a, b, c)` along the coordinate axes.
pub fn gen_ellipsoid(a: f64, b: f64, c: f64, level: u32) -> Result<TriMesh, MeshError> {
    for (name, v) in [("a", a), ("b", b), ("c", c)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(MeshError::InvalidParameter(format!("semi-axis {name} must be positive, got {v}")));
        }
    }
    let sphere = gen_icosphere(1.0, level)?;
    sphere.map_positions(|p| Point3::new(a * p.x, b * p.y, c * p.z))
}

/// Torus of revolution about the z axis with `2·nu·nv` triangles.
pub fn gen_torus(major: f64, minor: f64, nu: usize, nv: usize) -> Result<TriMesh, MeshError> {
    if !(minor > 0.0 && major > minor && major.is_finite()) {
        return Err(MeshError::InvalidParameter(format!(
            "torus needs R > r > 0, got R = {major}, r = {minor}"
        )));
    }
    if nu < 3 || nv < 3 {
        return Err(MeshError::InvalidParameter(format!("torus needs nu, nv >= 3, got {nu}, {nv}")));
    }
    let idx = |i: usize, j: usize| (i % nu) * nv + (j % nv);
    let mut verts = Vec::with_capacity(nu * nv);
    for i in 0..nu {
        let u = 2.0 * PI * i as f64 / nu as f64;
        for j in 0..nv {
            let v = 2.0 * PI * j as f64 / nv as f64;
            let rho = major + minor * v.cos();
            verts.push(Point3::new(rho * u.cos(), rho * u.sin(), minor * v.sin()));
        }
    }
    let mut faces = Vec::with_capacity(2 * nu * nv);
    for i in 0..nu {
        for j in 0..nv {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            faces.push([a, b, c]);
            faces.push([a, c, d]);
        }
    }
    TriMesh::new(verts, faces)
}

/// Boundary of a one-voxel-thick slab of `(2·holes + 1) × 3` unit cubes with
/// `holes` square holes punched through it: a closed surface of genus `holes`.
/// The result is centred at the origin.
pub fn gen_punctured_slab(holes: usize) -> Result<TriMesh, MeshError> {
    if holes == 0 {
        return Err(MeshError::InvalidParameter("slab needs at least one hole".into()));
    }
    let nx = 2 * holes + 1;
    let ny = 3usize;
    let solid = |x: i64, y: i64, z: i64| -> bool {
        if x < 0 || y < 0 || z != 0 || x >= nx as i64 || y >= ny as i64 {
            return false;
        }
        !(y == 1 && x % 2 == 1)
    };
    let mut index: HashMap<[i64; 3], usize> = HashMap::new();
    let mut verts = Vec::new();
    let mut vid = |p: [i64; 3], verts: &mut Vec<Point3<f64>>| -> usize {
        *index.entry(p).or_insert_with(|| {
            verts.push(Point3::new(
                p[0] as f64 - nx as f64 / 2.0,
                p[1] as f64 - ny as f64 / 2.0,
                p[2] as f64 - 0.5,
            ));
            verts.len() - 1
        })
    };
    let mut faces = Vec::new();
    for x in 0..nx as i64 {
        for y in 0..ny as i64 {
            if !solid(x, y, 0) {
                continue;
            }
            let cell = [x, y, 0i64];
            for axis in 0..3 {
                for positive in [true, false] {
                    let mut nb = cell;
                    nb[axis] += if positive { 1 } else { -1 };
                    if solid(nb[0], nb[1], nb[2]) {
                        continue;
                    }
                    let (b, c) = ((axis + 1) % 3, (axis + 2) % 3);
                    let mut base = cell;
                    if positive {
                        base[axis] += 1;
                    }
                    let corner = |db: i64, dc: i64| {
                        let mut p = base;
                        p[b] += db;
                        p[c] += dc;
                        p
                    };
                    // (b, c) counter-clockwise gives normal +e_axis
                    let mut quad = [corner(0, 0), corner(1, 0), corner(1, 1), corner(0, 1)];
                    if !positive {
                        quad.reverse();
                    }
                    let q: Vec<usize> = quad.iter().map(|&p| vid(p, &mut verts)).collect();
                    faces.push([q[0], q[1], q[2]]);
                    faces.push([q[0], q[2], q[3]]);
                }
            }
        }
    }
    TriMesh::new(verts, faces)
}
