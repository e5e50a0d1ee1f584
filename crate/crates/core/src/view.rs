//! Icosphere viewpoints and the rotations that bring each view normal onto
//! the +z axis.
//!
//! Vectors are rows and rotate as `v' = v · R`, so `normal · R == (0, 0, 1)`.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub type Mat3 = [[f64; 3]; 3];

pub const MAX_LEVEL: u32 = 4;
const UNIT_TOLERANCE: f64 = 1e-9;
const PARALLEL_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Viewpoint {
    pub normal: [f64; 3],
    pub rotation: Mat3,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViewpointSet {
    pub level: u32,
    pub viewpoints: Vec<Viewpoint>,
}

impl ViewpointSet {
    pub fn len(&self) -> usize {
        self.viewpoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.viewpoints.is_empty()
    }
}

/// Number of icosphere vertices at subdivision level `level`.
pub const fn viewpoint_count(level: u32) -> usize {
    12 + 10 * (4usize.pow(level) - 1)
}

const ICOSAHEDRON_FACES: [[u32; 3]; 20] = [
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

fn icosahedron_vertices() -> Vec<[f64; 3]> {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    [
        [-1.0, phi, 0.0],
        [1.0, phi, 0.0],
        [-1.0, -phi, 0.0],
        [1.0, -phi, 0.0],
        [0.0, -1.0, phi],
        [0.0, 1.0, phi],
        [0.0, -1.0, -phi],
        [0.0, 1.0, -phi],
        [phi, 0.0, -1.0],
        [phi, 0.0, 1.0],
        [-phi, 0.0, -1.0],
        [-phi, 0.0, 1.0],
    ]
    .iter()
    .map(normalize)
    .collect()
}

/// Unit vertex normals of an icosahedron subdivided `level` times, with
/// shared edge midpoints created once.
pub fn icosphere_normals(level: u32) -> Result<Vec<[f64; 3]>> {
    if level > MAX_LEVEL {
        return Err(Error::LevelOutOfRange(level));
    }
    let mut vertices = icosahedron_vertices();
    let mut faces: Vec<[u32; 3]> = ICOSAHEDRON_FACES.to_vec();
    for _ in 0..level {
        let mut midpoints: BTreeMap<(u32, u32), u32> = BTreeMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        for &[a, b, c] in &faces {
            let ab = midpoint(&mut vertices, &mut midpoints, a, b);
            let bc = midpoint(&mut vertices, &mut midpoints, b, c);
            let ca = midpoint(&mut vertices, &mut midpoints, c, a);
            next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    Ok(vertices)
}

fn midpoint(vertices: &mut Vec<[f64; 3]>, cache: &mut BTreeMap<(u32, u32), u32>, a: u32, b: u32) -> u32 {
    let key = (a.min(b), a.max(b));
    *cache.entry(key).or_insert_with(|| {
        let (p, q) = (vertices[key.0 as usize], vertices[key.1 as usize]);
        vertices.push(normalize(&[p[0] + q[0], p[1] + q[1], p[2] + q[2]]));
        (vertices.len() - 1) as u32
    })
}

pub fn viewpoints(level: u32) -> Result<ViewpointSet> {
    let viewpoints = icosphere_normals(level)?
        .into_iter()
        .map(|normal| {
            Ok(Viewpoint {
                normal,
                rotation: rotation_for(normal)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ViewpointSet { level, viewpoints })
}

/// Rotation taking `normal` to `(0, 0, 1)` under the row-vector convention.
///
/// The axis is `normal × z` and the angle `acos(normal · z)`. When the
/// normal is (anti)parallel to z the axis is undefined: `+z` yields the
/// identity and `-z` a half turn about x.
pub fn rotation_for(normal: [f64; 3]) -> Result<Mat3> {
    let norm = dot(&normal, &normal).sqrt();
    if !norm.is_finite() || (norm - 1.0).abs() > UNIT_TOLERANCE {
        return Err(Error::NonUnitNormal(norm));
    }
    let z = [0.0, 0.0, 1.0];
    let axis = cross(&normal, &z);
    let axis_norm = dot(&axis, &axis).sqrt();
    if axis_norm < PARALLEL_TOLERANCE {
        return Ok(if normal[2] > 0.0 {
            [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
        } else {
            [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]]
        });
    }
    let r = [axis[0] / axis_norm, axis[1] / axis_norm, axis[2] / axis_norm];
    let theta = dot(&normal, &z).clamp(-1.0, 1.0).acos();
    let (s, c) = theta.sin_cos();
    let t = 1.0 - c;
    // column-vector Rodrigues matrix, stored transposed for row vectors
    let column = [
        [
            c + r[0] * r[0] * t,
            r[0] * r[1] * t - r[2] * s,
            r[0] * r[2] * t + r[1] * s,
        ],
        [
            r[1] * r[0] * t + r[2] * s,
            c + r[1] * r[1] * t,
            r[1] * r[2] * t - r[0] * s,
        ],
        [
            r[2] * r[0] * t - r[1] * s,
            r[2] * r[1] * t + r[0] * s,
            c + r[2] * r[2] * t,
        ],
    ];
    Ok(transpose(&column))
}

/// `v · m` for a row vector `v`.
#[inline]
pub fn apply_row(v: &[f64; 3], m: &Mat3) -> [f64; 3] {
    [
        v[0] * m[0][0] + v[1] * m[1][0] + v[2] * m[2][0],
        v[0] * m[0][1] + v[1] * m[1][1] + v[2] * m[2][1],
        v[0] * m[0][2] + v[1] * m[1][2] + v[2] * m[2][2],
    ]
}

pub fn transpose(m: &Mat3) -> Mat3 {
    let mut t = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            t[i][j] = m[j][i];
        }
    }
    t
}

pub fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub fn determinant(m: &Mat3) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

#[inline]
fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn normalize(v: &[f64; 3]) -> [f64; 3] {
    let n = dot(v, v).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::FRAC_PI_2;

    fn orthonormality_error(m: &Mat3) -> f64 {
        let p = mat_mul(&transpose(m), m);
        let mut err = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                let target = if i == j { 1.0 } else { 0.0 };
                err += (p[i][j] - target).powi(2);
            }
        }
        err.sqrt()
    }

    #[test]
    fn counts_follow_subdivision_formula() {
        for (level, expected) in [(0, 12), (1, 42), (2, 162), (3, 642), (4, 2562)] {
            assert_eq!(viewpoint_count(level), expected);
            assert_eq!(icosphere_normals(level).unwrap().len(), expected);
        }
        assert_eq!(icosphere_normals(5), Err(Error::LevelOutOfRange(5)));
    }

    #[test]
    fn normals_are_unit_distinct_and_closed_under_negation() {
        for level in 0..=3 {
            let normals = icosphere_normals(level).unwrap();
            for n in &normals {
                assert!((dot(n, n).sqrt() - 1.0).abs() < 1e-12);
                let neg = [-n[0], -n[1], -n[2]];
                assert!(normals.iter().any(|m| {
                    (m[0] - neg[0]).abs() < 1e-9 && (m[1] - neg[1]).abs() < 1e-9 && (m[2] - neg[2]).abs() < 1e-9
                }));
            }
            for i in 0..normals.len() {
                for j in i + 1..normals.len() {
                    let d = [
                        normals[i][0] - normals[j][0],
                        normals[i][1] - normals[j][1],
                        normals[i][2] - normals[j][2],
                    ];
                    assert!(dot(&d, &d) > 1e-6);
                }
            }
        }
    }

    #[test]
    fn identity_for_plus_z() {
        assert_eq!(
            rotation_for([0.0, 0.0, 1.0]).unwrap(),
            [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
        );
    }

    #[test]
    fn x_axis_rotates_a_quarter_turn_about_minus_y() {
        let n = [1.0, 0.0, 0.0];
        let axis = cross(&n, &[0.0, 0.0, 1.0]);
        assert_eq!(axis, [0.0, -1.0, 0.0]);
        assert!((dot(&n, &[0.0, 0.0, 1.0]).acos() - FRAC_PI_2).abs() < 1e-15);
        let r = rotation_for(n).unwrap();
        let out = apply_row(&n, &r);
        assert!((out[0]).abs() < 1e-12 && out[1].abs() < 1e-12 && (out[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn antipode_uses_half_turn_about_x() {
        let r = rotation_for([0.0, 0.0, -1.0]).unwrap();
        let out = apply_row(&[0.0, 0.0, -1.0], &r);
        assert_eq!(out, [0.0, 0.0, 1.0]);
        assert!((determinant(&r) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_unit_normals() {
        assert!(matches!(rotation_for([0.0, 0.0, 2.0]), Err(Error::NonUnitNormal(_))));
        assert!(matches!(
            rotation_for([f64::NAN, 0.0, 0.0]),
            Err(Error::NonUnitNormal(_))
        ));
    }

    #[test]
    fn every_viewpoint_maps_its_normal_to_z() {
        for level in 0..=3 {
            for v in viewpoints(level).unwrap().viewpoints {
                let out = apply_row(&v.normal, &v.rotation);
                assert!((out[0].powi(2) + out[1].powi(2) + (out[2] - 1.0).powi(2)).sqrt() < 1e-9);
                assert!(orthonormality_error(&v.rotation) < 1e-9);
                assert!((determinant(&v.rotation) - 1.0).abs() < 1e-9);
            }
        }
    }
}
