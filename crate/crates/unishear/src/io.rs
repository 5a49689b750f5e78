//! File formats: raw double-precision images with a text header, 8-bit
//! graymaps for eyeballing, the binary coefficient dump, and the sweep
//! summary plot.  Every format round-trips bit-exactly; floats in text
//! headers use Rust's shortest-round-trip formatting.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::transform::CoefficientSet;
use crate::{Error, Result};

/// Version tag of the coefficient dump layout.
pub const DUMP_VERSION: u32 = 1;

/// Text header of a raw image: five `key value` lines, then row-major
/// little-endian f64 samples.  `j` doubles as the scale index of a model
/// image or the scale count J of a system-level export; `h` is 0 when no
/// mask is attached.
#[derive(Debug, Clone, PartialEq)]
pub struct RawHeader {
    pub n: usize,
    pub j: usize,
    pub t: f64,
    pub rho: f64,
    pub h: f64,
}

pub fn write_raw(path: &Path, header: &RawHeader, data: &[f64]) -> Result<()> {
    if data.len() != header.n * header.n {
        return Err(Error::DimensionMismatch {
            expected: header.n * header.n,
            got: data.len(),
        });
    }
    let mut w = BufWriter::new(File::create(path)?);
    write!(
        w,
        "N {}\nJ {}\nT {}\nrho {}\nh {}\n",
        header.n, header.j, header.t, header.rho, header.h
    )?;
    for v in data {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_raw(path: &Path) -> Result<(RawHeader, Vec<f64>)> {
    let mut r = BufReader::new(File::open(path)?);
    let mut head = Vec::new();
    let mut byte = [0u8; 1];
    let mut lines = 0;
    while lines < 5 {
        r.read_exact(&mut byte)?;
        if byte[0] == b'\n' {
            lines += 1;
        }
        head.push(byte[0]);
    }
    let text = std::str::from_utf8(&head).map_err(|_| bad("header is not UTF-8"))?;
    let mut fields = [None::<&str>; 5];
    for (i, (line, key)) in text.lines().zip(["N", "J", "T", "rho", "h"]).enumerate() {
        fields[i] = line.strip_prefix(key).and_then(|v| v.strip_prefix(' '));
        if fields[i].is_none() {
            return Err(bad(&format!("header line {} must start with `{key} `", i + 1)));
        }
    }
    let n: usize = parse(fields[0].unwrap(), "N")?;
    let header = RawHeader {
        n,
        j: parse(fields[1].unwrap(), "J")?,
        t: parse(fields[2].unwrap(), "T")?,
        rho: parse(fields[3].unwrap(), "rho")?,
        h: parse(fields[4].unwrap(), "h")?,
    };
    let mut buf = vec![0u8; n * n * 8];
    r.read_exact(&mut buf)?;
    let data = buf
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((header, data))
}

/// Min-max scaled 8-bit binary graymap (P5).  A constant image maps to 0.
pub fn write_pgm(path: &Path, n: usize, data: &[f64]) -> Result<()> {
    if data.len() != n * n {
        return Err(Error::DimensionMismatch {
            expected: n * n,
            got: data.len(),
        });
    }
    let lo = data.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = data.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let scale = if hi > lo { 255.0 / (hi - lo) } else { 0.0 };
    let mut w = BufWriter::new(File::create(path)?);
    write!(w, "P5\n{n} {n}\n255\n")?;
    let bytes: Vec<u8> = data.iter().map(|v| ((v - lo) * scale).round() as u8).collect();
    w.write_all(&bytes)?;
    w.flush()?;
    Ok(())
}

pub fn read_pgm(path: &Path) -> Result<(usize, usize, Vec<u8>)> {
    let mut r = BufReader::new(File::open(path)?);
    let mut head = Vec::new();
    let mut byte = [0u8; 1];
    let mut lines = 0;
    while lines < 3 {
        r.read_exact(&mut byte)?;
        if byte[0] == b'\n' {
            lines += 1;
        }
        head.push(byte[0]);
    }
    let text = std::str::from_utf8(&head).map_err(|_| bad("graymap header is not UTF-8"))?;
    let mut it = text.lines();
    if it.next() != Some("P5") {
        return Err(bad("not a binary graymap (P5)"));
    }
    let dims = it.next().ok_or_else(|| bad("missing dimensions"))?;
    let mut dims = dims.split_whitespace();
    let w: usize = parse(dims.next().unwrap_or(""), "width")?;
    let h: usize = parse(dims.next().unwrap_or(""), "height")?;
    let maxval = it.next().ok_or_else(|| bad("missing maxval"))?;
    if maxval != "255" {
        return Err(bad("only maxval 255 supported"));
    }
    let mut data = vec![0u8; w * h];
    r.read_exact(&mut data)?;
    Ok((w, h, data))
}

/// Binary coefficient dump: magic `UNSH`, version, N, J, band count (all
/// little-endian u32), then per-band row-major complex samples as
/// interleaved (re, im) little-endian f64 pairs.
pub fn write_coefficients(path: &Path, scales: usize, coeffs: &CoefficientSet) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(b"UNSH")?;
    for v in [DUMP_VERSION, coeffs.n as u32, scales as u32, coeffs.bands.len() as u32] {
        w.write_all(&v.to_le_bytes())?;
    }
    for band in &coeffs.bands {
        for c in band {
            w.write_all(&c.re.to_le_bytes())?;
            w.write_all(&c.im.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_coefficients(path: &Path) -> Result<(usize, CoefficientSet)> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != b"UNSH" {
        return Err(bad("bad magic, not a coefficient dump"));
    }
    let mut word = [0u8; 4];
    let mut next = || -> Result<u32> {
        r.read_exact(&mut word)?;
        Ok(u32::from_le_bytes(word))
    };
    let version = next()?;
    if version != DUMP_VERSION {
        return Err(bad(&format!("unsupported dump version {version}")));
    }
    let n = next()? as usize;
    let scales = next()? as usize;
    let nb = next()? as usize;
    let mut bands = Vec::with_capacity(nb);
    let mut buf = vec![0u8; n * n * 16];
    for _ in 0..nb {
        r.read_exact(&mut buf)?;
        bands.push(
            buf.chunks_exact(16)
                .map(|c| {
                    Complex64::new(
                        f64::from_le_bytes(c[..8].try_into().unwrap()),
                        f64::from_le_bytes(c[8..].try_into().unwrap()),
                    )
                })
                .collect(),
        );
    }
    Ok((scales, CoefficientSet { n, bands }))
}

/// Grayscale summary plot of log2(error) against j, written as PNG.
/// Points are joined by vertical-step bars; one curve per series.
pub fn write_error_plot(path: &Path, series: &[(String, Vec<(usize, f64)>)]) -> Result<()> {
    const W: u32 = 480;
    const H: u32 = 320;
    const MARGIN: u32 = 24;
    let mut img = image::GrayImage::from_pixel(W, H, image::Luma([255u8]));
    let pts: Vec<f64> = series
        .iter()
        .flat_map(|(_, v)| v.iter().map(|&(_, e)| e.max(1e-300).log2()))
        .collect();
    let js: Vec<usize> = series
        .iter()
        .flat_map(|(_, v)| v.iter().map(|&(j, _)| j))
        .collect();
    if pts.is_empty() {
        img.save(path).map_err(|e| bad(&format!("plot: {e}")))?;
        return Ok(());
    }
    let (ylo, yhi) = pts
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let (jlo, jhi) = js
        .iter()
        .fold((usize::MAX, 0), |(a, b), &v| (a.min(v), b.max(v)));
    let xmap = |j: usize| -> f64 {
        let span = (jhi - jlo).max(1) as f64;
        MARGIN as f64 + (j - jlo) as f64 / span * (W - 2 * MARGIN) as f64
    };
    let ymap = |e: f64| -> f64 {
        let span = (yhi - ylo).max(1e-12);
        (H - MARGIN) as f64 - (e - ylo) / span * (H - 2 * MARGIN) as f64
    };
    // axes
    for x in MARGIN..W - MARGIN {
        img.put_pixel(x, H - MARGIN, image::Luma([0]));
    }
    for y in MARGIN..H - MARGIN {
        img.put_pixel(MARGIN, y, image::Luma([0]));
    }
    for (si, (_, curve)) in series.iter().enumerate() {
        let shade = (64 * si).min(192) as u8;
        let mut prev: Option<(f64, f64)> = None;
        for &(j, e) in curve {
            let p = (xmap(j), ymap(e.max(1e-300).log2()));
            if let Some(q) = prev {
                draw_line(&mut img, q, p, shade);
            }
            prev = Some(p);
        }
    }
    img.save(path).map_err(|e| bad(&format!("plot: {e}")))?;
    Ok(())
}

fn draw_line(img: &mut image::GrayImage, a: (f64, f64), b: (f64, f64), shade: u8) {
    let steps = ((b.0 - a.0).abs().max((b.1 - a.1).abs()).ceil() as usize).max(1);
    for i in 0..=steps {
        let t = i as f64 / steps as f64;
        let x = (a.0 + t * (b.0 - a.0)).round() as i64;
        let y = (a.1 + t * (b.1 - a.1)).round() as i64;
        if x >= 0 && y >= 0 && (x as u32) < img.width() && (y as u32) < img.height() {
            img.put_pixel(x as u32, y as u32, image::Luma([shade]));
        }
    }
}

fn bad(msg: &str) -> Error {
    Error::Config(msg.to_string())
}

fn parse<T: std::str::FromStr>(s: &str, key: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| bad(&format!("cannot parse {key} value `{s}`")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::DOMAIN_HALFWIDTH;

    fn tmp(name: &str) -> std::path::PathBuf {
        let d = std::env::temp_dir().join("unishear-io-tests");
        std::fs::create_dir_all(&d).unwrap();
        d.join(name)
    }

    #[test]
    fn raw_round_trip_bit_exact() {
        let n = 16;
        let data: Vec<f64> = (0..n * n)
            .map(|i| (i as f64 * 0.371).sin() * 1e-3 + f64::MIN_POSITIVE)
            .collect();
        let header = RawHeader {
            n,
            j: 3,
            t: DOMAIN_HALFWIDTH,
            rho: 0.125,
            h: 0.0071913,
        };
        let p = tmp("img.raw");
        write_raw(&p, &header, &data).unwrap();
        let (h2, d2) = read_raw(&p).unwrap();
        assert_eq!(h2, header);
        assert_eq!(
            d2.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            data.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
        // second write of the read-back bytes is identical on disk
        let p2 = tmp("img2.raw");
        write_raw(&p2, &h2, &d2).unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), std::fs::read(&p2).unwrap());
    }

    #[test]
    fn raw_rejects_bad_header() {
        let p = tmp("broken.raw");
        std::fs::write(&p, b"X 4\nJ 1\nT 0.5\nrho 0.1\nh 0\n").unwrap();
        assert!(read_raw(&p).is_err());
    }

    #[test]
    fn pgm_round_trip() {
        let n = 8;
        let data: Vec<f64> = (0..n * n).map(|i| (i % 7) as f64 - 3.0).collect();
        let p = tmp("img.pgm");
        write_pgm(&p, n, &data).unwrap();
        let (w, h, bytes) = read_pgm(&p).unwrap();
        assert_eq!((w, h), (n, n));
        // min-max scaling puts extremes at 0 and 255
        assert_eq!(*bytes.iter().min().unwrap(), 0);
        assert_eq!(*bytes.iter().max().unwrap(), 255);
        // byte array round-trips exactly through a second header+payload
        let p2 = tmp("img2.pgm");
        let rescaled: Vec<f64> = bytes.iter().map(|&b| b as f64).collect();
        write_pgm(&p2, n, &rescaled).unwrap();
        let (_, _, bytes2) = read_pgm(&p2).unwrap();
        assert_eq!(bytes, bytes2);
    }

    #[test]
    fn coefficient_dump_round_trip() {
        let n = 4;
        let bands: Vec<Vec<Complex64>> = (0..3)
            .map(|b| {
                (0..n * n)
                    .map(|i| Complex64::new(i as f64 + b as f64 * 0.5, -(i as f64) * 1e-7))
                    .collect()
            })
            .collect();
        let set = CoefficientSet { n, bands };
        let p = tmp("coef.unsh");
        write_coefficients(&p, 2, &set).unwrap();
        let (scales, back) = read_coefficients(&p).unwrap();
        assert_eq!(scales, 2);
        assert_eq!(back.n, set.n);
        assert_eq!(back.bands.len(), set.bands.len());
        for (a, b) in back.bands.iter().zip(&set.bands) {
            for (x, y) in a.iter().zip(b) {
                assert_eq!(x.re.to_bits(), y.re.to_bits());
                assert_eq!(x.im.to_bits(), y.im.to_bits());
            }
        }
        // write-back is byte-identical
        let p2 = tmp("coef2.unsh");
        write_coefficients(&p2, scales, &back).unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), std::fs::read(&p2).unwrap());
    }

    #[test]
    fn dump_rejects_wrong_magic() {
        let p = tmp("bad.unsh");
        std::fs::write(&p, b"NOPE\x01\x00\x00\x00").unwrap();
        assert!(read_coefficients(&p).is_err());
    }

    #[test]
    fn plot_writes_png() {
        let p = tmp("plot.png");
        write_error_plot(
            &p,
            &[("a".into(), vec![(1, 0.5), (2, 0.1), (3, 0.01)])],
        )
        .unwrap();
        let bytes = std::fs::read(&p).unwrap();
        assert_eq!(&bytes[1..4], b"PNG");
    }
}
