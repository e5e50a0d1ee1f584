//! Synthetic textured clouds shared by the integration tests.

#![allow(dead_code)]

use pcqa_core::cloud::{Point, PointCloud};

/// Smooth color field with detail at several spatial frequencies.
pub fn texture(p: [i32; 3]) -> [u8; 3] {
    let (x, y, z) = (f64::from(p[0]), f64::from(p[1]), f64::from(p[2]));
    let channel = |a: f64, b: f64, c: f64, phase: f64| {
        let v = 128.0 + 55.0 * (a / 5.0 + phase).sin() * (b / 7.0).cos() + 35.0 * ((a + b + c) / 13.0 + phase).sin();
        v.round().clamp(0.0, 255.0) as u8
    };
    [channel(x, y, z, 0.0), channel(y, z, x, 1.3), channel(z, x, y, 2.6)]
}

fn collect(name: &str, mut keep: impl FnMut(i32, i32, i32) -> bool, extent: i32) -> PointCloud {
    let mut points = Vec::new();
    for x in -extent..=extent {
        for y in -extent..=extent {
            for z in -extent..=extent {
                if keep(x, y, z) {
                    points.push(Point::new([x, y, z], texture([x, y, z])));
                }
            }
        }
    }
    PointCloud::new(name, points)
}

/// One-voxel-thick spherical shell.
pub fn sphere(radius: i32) -> PointCloud {
    let r = f64::from(radius);
    collect(
        "sphere",
        |x, y, z| (f64::from(x * x + y * y + z * z).sqrt() - r).abs() <= 0.5,
        radius + 1,
    )
}

/// Surface of an axis-aligned cube.
pub fn cube(half: i32) -> PointCloud {
    collect("cube", |x, y, z| x.abs().max(y.abs()).max(z.abs()) == half, half)
}

/// Torus around the z axis.
pub fn torus(major: i32, minor: i32) -> PointCloud {
    let (big, small) = (f64::from(major), f64::from(minor));
    collect(
        "torus",
        |x, y, z| {
            let ring = f64::from(x * x + y * y).sqrt() - big;
            ((ring * ring + f64::from(z * z)).sqrt() - small).abs() <= 0.5
        },
        major + minor + 1,
    )
}

/// Capped cylinder along the y axis.
pub fn cylinder(radius: i32, half_height: i32) -> PointCloud {
    let r = f64::from(radius);
    collect(
        "cylinder",
        |x, y, z| {
            let d = f64::from(x * x + z * z).sqrt();
            (y.abs() <= half_height && (d - r).abs() <= 0.5) || (y.abs() == half_height && d <= r)
        },
        radius.max(half_height) + 1,
    )
}

/// Wavy height field, one point per (x, z) column.
pub fn terrain(half: i32) -> PointCloud {
    let mut points = Vec::new();
    for x in -half..=half {
        for z in -half..=half {
            let y = (12.0 * (f64::from(x) / 9.0).sin() * (f64::from(z) / 11.0).cos()).round() as i32;
            points.push(Point::new([x, y, z], texture([x, y, z])));
        }
    }
    PointCloud::new("terrain", points)
}

pub fn shapes() -> Vec<PointCloud> {
    vec![sphere(40), cube(30), torus(36, 14), cylinder(30, 40), terrain(70)]
}
