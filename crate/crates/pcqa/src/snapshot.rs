//! PNG export of snapshots, occupancy masks and IW-SSIM inspection maps,
//! and CSV export of viewpoint sets.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use pcqa_core::cloud::PointCloud;
use pcqa_core::iqa2d::{IwSsimDetail, Plane};
use pcqa_core::project::{ProjectedImage, Projector};
use pcqa_core::view::ViewpointSet;
use rayon::prelude::*;

use crate::error::{io_error, Error, Result};

fn encode_png(
    path: &Path,
    width: usize,
    height: usize,
    color: png::ColorType,
    depth: png::BitDepth,
    data: &[u8],
) -> Result<()> {
    let png_err = |e: png::EncodingError| Error::Png {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let file = File::create(path).map_err(io_error(path))?;
    let mut encoder = png::Encoder::new(BufWriter::new(file), width as u32, height as u32);
    encoder.set_color(color);
    encoder.set_depth(depth);
    let mut writer = encoder.write_header().map_err(png_err)?;
    writer.write_image_data(data).map_err(png_err)?;
    writer.finish().map_err(png_err)
}

/// 8-bit RGB PNG of a snapshot.
pub fn write_rgb_png(path: &Path, image: &ProjectedImage) -> Result<()> {
    let data: Vec<u8> = image.pixels.iter().flatten().copied().collect();
    encode_png(
        path,
        image.width,
        image.height,
        png::ColorType::Rgb,
        png::BitDepth::Eight,
        &data,
    )
}

/// 1-bit grayscale PNG: white where a point was projected.
pub fn write_mask_png(path: &Path, image: &ProjectedImage) -> Result<()> {
    let stride = image.width.div_ceil(8);
    let mut data = vec![0u8; stride * image.height];
    for y in 0..image.height {
        for x in 0..image.width {
            if image.occupancy[y * image.width + x] {
                data[y * stride + x / 8] |= 0x80 >> (x % 8);
            }
        }
    }
    encode_png(
        path,
        image.width,
        image.height,
        png::ColorType::Grayscale,
        png::BitDepth::One,
        &data,
    )
}

/// 8-bit grayscale PNG of a real-valued map, mapping `[lo, hi]` to
/// `[0, 255]` and clamping outside values.
pub fn write_plane_png(path: &Path, plane: &Plane, lo: f64, hi: f64) -> Result<()> {
    let span = if hi > lo { hi - lo } else { 1.0 };
    let data: Vec<u8> = plane
        .data
        .iter()
        .map(|v| (((v - lo) / span).clamp(0.0, 1.0) * 255.0).round() as u8)
        .collect();
    encode_png(
        path,
        plane.width,
        plane.height,
        png::ColorType::Grayscale,
        png::BitDepth::Eight,
        &data,
    )
}

/// Viewpoint table with columns `index,nx,ny,nz`.
pub fn write_viewpoints_csv(path: &Path, views: &ViewpointSet) -> Result<()> {
    let file = File::create(path).map_err(io_error(path))?;
    let mut out = BufWriter::new(file);
    let mut write = || -> std::io::Result<()> {
        writeln!(out, "index,nx,ny,nz")?;
        for (i, v) in views.viewpoints.iter().enumerate() {
            writeln!(out, "{i},{},{},{}", v.normal[0], v.normal[1], v.normal[2])?;
        }
        out.flush()
    };
    write().map_err(io_error(path))
}

/// File name of the snapshot of `cloud` from view `index`.
pub fn snapshot_name(cloud: &str, index: usize) -> String {
    format!("{cloud}_{index}.png")
}

/// Renders `cloud` from every view and writes `<cloud>_<view>.png` plus
/// `<cloud>_<view>_mask.png`. Returns the written paths.
pub fn export_snapshots(
    cloud: &PointCloud,
    projector: &Projector,
    views: &ViewpointSet,
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(io_error(dir))?;
    let written: Vec<Vec<PathBuf>> = views
        .viewpoints
        .par_iter()
        .enumerate()
        .map(|(i, v)| {
            let image = projector.project(cloud, v)?;
            let rgb = dir.join(snapshot_name(&cloud.name, i));
            let mask = dir.join(format!("{}_{i}_mask.png", cloud.name));
            write_rgb_png(&rgb, &image)?;
            write_mask_png(&mask, &image)?;
            Ok(vec![rgb, mask])
        })
        .collect::<Result<_>>()?;
    Ok(written.into_iter().flatten().collect())
}

/// Writes per-scale IW-SSIM weight maps (normalized by their maximum) and
/// similarity maps (`[-1, 1]` to gray) as `<stem>_w<scale>.png` and
/// `<stem>_s<scale>.png`.
pub fn export_iw_maps(dir: &Path, stem: &str, detail: &IwSsimDetail) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(io_error(dir))?;
    let mut written = Vec::new();
    for (s, w) in detail.weight_maps.iter().enumerate() {
        let max = w.data.iter().copied().fold(0.0, f64::max);
        let path = dir.join(format!("{stem}_w{s}.png"));
        write_plane_png(&path, w, 0.0, max)?;
        written.push(path);
    }
    for (s, m) in detail.similarity_maps.iter().enumerate() {
        let path = dir.join(format!("{stem}_s{s}.png"));
        write_plane_png(&path, m, -1.0, 1.0)?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use pcqa_core::cloud::Point;
    use pcqa_core::project::ProjectionConfig;

    fn decode(path: &Path) -> (png::OutputInfo, Vec<u8>) {
        let decoder = png::Decoder::new(File::open(path).unwrap());
        let mut reader = decoder.read_info().unwrap();
        let mut buf = vec![0; reader.output_buffer_size()];
        let info = reader.next_frame(&mut buf).unwrap();
        buf.truncate(info.buffer_size());
        (info, buf)
    }

    #[test]
    fn snapshots_and_masks_decode_to_the_rendered_image() {
        let mut pts = Vec::new();
        for x in 0..30 {
            for y in 0..20 {
                pts.push(Point::new([x * 4, y * 4, 0], [x as u8 * 8, y as u8 * 12, 200]));
            }
        }
        let cloud = PointCloud::new("plate", pts);
        let cfg = ProjectionConfig::default();
        let projector = Projector::for_pair(&cloud, &cloud, &cfg, 0).unwrap();
        let views = cfg.viewpoints().unwrap();
        let dir = tempfile::tempdir().unwrap();
        let files = export_snapshots(&cloud, &projector, &views, dir.path()).unwrap();
        assert_eq!(files.len(), 24);
        let image = projector.project(&cloud, &views.viewpoints[3]).unwrap();
        let (info, rgb) = decode(&dir.path().join("plate_3.png"));
        assert_eq!((info.width as usize, info.height as usize), (image.width, image.height));
        assert_eq!(rgb, image.pixels.iter().flatten().copied().collect::<Vec<u8>>());
        let (info, mask) = decode(&dir.path().join("plate_3_mask.png"));
        assert_eq!(info.bit_depth, png::BitDepth::One);
        let stride = image.width.div_ceil(8);
        for y in 0..image.height {
            for x in 0..image.width {
                let bit = mask[y * stride + x / 8] & (0x80 >> (x % 8)) != 0;
                assert_eq!(bit, image.occupancy[y * image.width + x]);
            }
        }
    }

    #[test]
    fn viewpoint_csv_has_one_row_per_view() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.csv");
        let views = pcqa_core::view::viewpoints(1).unwrap();
        write_viewpoints_csv(&path, &views).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let rows: Vec<&str> = text.lines().collect();
        assert_eq!(rows[0], "index,nx,ny,nz");
        assert_eq!(rows.len(), 43);
        let parsed: Vec<f64> = rows[5].split(',').skip(1).map(|v| v.parse().unwrap()).collect();
        for (a, b) in parsed.iter().zip(views.viewpoints[4].normal) {
            assert_eq!(*a, b);
        }
    }
}
