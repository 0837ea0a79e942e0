//! Single-channel PNG reading and writing.
//!
//! Images are quantized with `round(s * (2^depth - 1))`, rounding half away
//! from zero. Masks are written 8-bit `{0, 255}`; label rasters 16-bit with
//! raw ids.

use std::io::Cursor;
use std::path::Path;

use png::{BitDepth, ColorType, Compression, Decoder, Encoder, Transformations};

use crate::error::{Error, Result};
use crate::raster::{BinaryMask, GrayImage, LabelMap};

/// Bit depth of an encoded raster.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Depth {
    Eight,
    Sixteen,
}

impl Depth {
    pub fn max_level(self) -> u32 {
        match self {
            Depth::Eight => 255,
            Depth::Sixteen => 65535,
        }
    }

    pub fn bits(self) -> u8 {
        match self {
            Depth::Eight => 8,
            Depth::Sixteen => 16,
        }
    }
}

impl TryFrom<u8> for Depth {
    type Error = Error;

    fn try_from(bits: u8) -> Result<Self> {
        match bits {
            8 => Ok(Depth::Eight),
            16 => Ok(Depth::Sixteen),
            other => Err(Error::UnsupportedFormat(format!("bit depth {other}"))),
        }
    }
}

/// Bit depth of a grayscale PNG, read from its header only.
pub fn probe_depth(bytes: &[u8]) -> Result<Depth> {
    let reader = Decoder::new(Cursor::new(bytes))
        .read_info()
        .map_err(|e| Error::Decode(e.to_string()))?;
    let info = reader.info();
    if info.color_type != ColorType::Grayscale {
        return Err(Error::UnsupportedFormat(format!(
            "expected single-channel grayscale, found {:?}",
            info.color_type
        )));
    }
    Depth::try_from(info.bit_depth as u8)
}

/// Decoded stored levels of a grayscale PNG.
struct RawGray {
    width: usize,
    height: usize,
    depth: Depth,
    levels: Vec<u16>,
}

fn decode_raw(bytes: &[u8]) -> Result<RawGray> {
    let mut decoder = Decoder::new(Cursor::new(bytes));
    decoder.set_transformations(Transformations::IDENTITY);
    let mut reader = decoder
        .read_info()
        .map_err(|e| Error::Decode(e.to_string()))?;
    let info = reader.info();
    let (width, height) = (info.width as usize, info.height as usize);
    match info.color_type {
        ColorType::Grayscale => {}
        other => {
            return Err(Error::UnsupportedFormat(format!(
                "expected single-channel grayscale, found {other:?}"
            )))
        }
    }
    let depth = match info.bit_depth {
        BitDepth::Eight => Depth::Eight,
        BitDepth::Sixteen => Depth::Sixteen,
        other => {
            return Err(Error::UnsupportedFormat(format!(
                "expected 8- or 16-bit samples, found {other:?}"
            )))
        }
    };
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::Decode("image too large".into()))?;
    let mut buf = vec![0u8; size];
    let frame = reader
        .next_frame(&mut buf)
        .map_err(|e| Error::Decode(e.to_string()))?;
    let line = frame.line_size;
    let mut levels = Vec::with_capacity(width * height);
    for row in buf[..frame.buffer_size()].chunks_exact(line) {
        match depth {
            Depth::Eight => levels.extend(row[..width].iter().map(|&b| u16::from(b))),
            Depth::Sixteen => levels.extend(
                row[..2 * width]
                    .chunks_exact(2)
                    .map(|p| u16::from_be_bytes([p[0], p[1]])),
            ),
        }
    }
    if levels.len() != width * height || width == 0 || height == 0 {
        return Err(Error::Decode("truncated image data".into()));
    }
    Ok(RawGray {
        width,
        height,
        depth,
        levels,
    })
}

fn encode_raw(width: usize, height: usize, depth: Depth, levels: &[u16]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    {
        let mut encoder = Encoder::new(&mut out, width as u32, height as u32);
        encoder.set_color(ColorType::Grayscale);
        encoder.set_depth(match depth {
            Depth::Eight => BitDepth::Eight,
            Depth::Sixteen => BitDepth::Sixteen,
        });
        encoder.set_compression(Compression::Fast);
        let mut writer = encoder
            .write_header()
            .map_err(|e| Error::Encode(e.to_string()))?;
        let data: Vec<u8> = match depth {
            Depth::Eight => levels.iter().map(|&v| v as u8).collect(),
            Depth::Sixteen => levels.iter().flat_map(|v| v.to_be_bytes()).collect(),
        };
        writer
            .write_image_data(&data)
            .map_err(|e| Error::Encode(e.to_string()))?;
        writer.finish().map_err(|e| Error::Encode(e.to_string()))?;
    }
    Ok(out)
}

/// Quantizes a sample in `[0, 1]` to a stored level.
#[inline]
pub fn quantize(sample: f64, depth: Depth) -> u16 {
    // f64::round rounds half away from zero.
    (sample * f64::from(depth.max_level())).round() as u16
}

/// Decodes an 8- or 16-bit grayscale PNG into normalized samples.
pub fn decode_image(bytes: &[u8]) -> Result<GrayImage> {
    let raw = decode_raw(bytes)?;
    let scale = f64::from(raw.depth.max_level());
    let samples = raw.levels.iter().map(|&v| f64::from(v) / scale).collect();
    GrayImage::new(raw.width, raw.height, samples)
}

/// Encodes a single-channel, non-interlaced PNG at the given depth.
pub fn encode_image(img: &GrayImage, depth: Depth) -> Result<Vec<u8>> {
    let levels: Vec<u16> = img.samples().iter().map(|&s| quantize(s, depth)).collect();
    encode_raw(img.width(), img.height(), depth, &levels)
}

/// Encodes a mask as 8-bit `{0, 255}`.
pub fn encode_mask(mask: &BinaryMask) -> Result<Vec<u8>> {
    let levels: Vec<u16> = mask.bits().iter().map(|&b| if b { 255 } else { 0 }).collect();
    encode_raw(mask.width(), mask.height(), Depth::Eight, &levels)
}

/// Decodes a mask; any nonzero level is foreground.
pub fn decode_mask(bytes: &[u8]) -> Result<BinaryMask> {
    let raw = decode_raw(bytes)?;
    BinaryMask::new(
        raw.width,
        raw.height,
        raw.levels.iter().map(|&v| v != 0).collect(),
    )
}

/// Encodes label ids as raw 16-bit levels.
pub fn encode_labels(labels: &LabelMap) -> Result<Vec<u8>> {
    if labels.count() > u32::from(u16::MAX) {
        return Err(Error::TooManyLabels(labels.count()));
    }
    let levels: Vec<u16> = labels.ids().iter().map(|&id| id as u16).collect();
    encode_raw(labels.width(), labels.height(), Depth::Sixteen, &levels)
}

/// Decodes raw label ids (8- or 16-bit); `count` is the largest id present.
pub fn decode_labels(bytes: &[u8]) -> Result<LabelMap> {
    let raw = decode_raw(bytes)?;
    LabelMap::from_ids(
        raw.width,
        raw.height,
        raw.levels.iter().map(|&v| u32::from(v)).collect(),
    )
}

pub fn read_image(path: impl AsRef<Path>) -> Result<GrayImage> {
    decode_image(&std::fs::read(path)?)
}

pub fn write_image(path: impl AsRef<Path>, img: &GrayImage, depth: Depth) -> Result<()> {
    std::fs::write(path, encode_image(img, depth)?)?;
    Ok(())
}

pub fn read_mask(path: impl AsRef<Path>) -> Result<BinaryMask> {
    decode_mask(&std::fs::read(path)?)
}

pub fn write_mask(path: impl AsRef<Path>, mask: &BinaryMask) -> Result<()> {
    std::fs::write(path, encode_mask(mask)?)?;
    Ok(())
}

pub fn read_labels(path: impl AsRef<Path>) -> Result<LabelMap> {
    decode_labels(&std::fs::read(path)?)
}

pub fn write_labels(path: impl AsRef<Path>, labels: &LabelMap) -> Result<()> {
    std::fs::write(path, encode_labels(labels)?)?;
    Ok(())
}

/// Encodes interleaved 8-bit RGB, used only for report overlays.
pub fn encode_rgb8(width: usize, height: usize, rgb: &[u8]) -> Result<Vec<u8>> {
    if rgb.len() != width * height * 3 {
        return Err(Error::InvalidRaster("rgb buffer size mismatch".into()));
    }
    let mut out = Vec::new();
    {
        let mut encoder = Encoder::new(&mut out, width as u32, height as u32);
        encoder.set_color(ColorType::Rgb);
        encoder.set_depth(BitDepth::Eight);
        encoder.set_compression(Compression::Fast);
        let mut writer = encoder
            .write_header()
            .map_err(|e| Error::Encode(e.to_string()))?;
        writer
            .write_image_data(rgb)
            .map_err(|e| Error::Encode(e.to_string()))?;
        writer.finish().map_err(|e| Error::Encode(e.to_string()))?;
    }
    Ok(out)
}
