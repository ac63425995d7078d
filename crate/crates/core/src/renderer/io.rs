//! Image files: 8-bit PGM (P5), 8-bit grayscale PNG, and a raw
//! little-endian f64 dump (`u64` width, `u64` height, then row-major pixels).

use std::fs;
use std::io::{self, Cursor};
use std::path::Path;

use thiserror::Error;

use super::Image;
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum ImageIoError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("malformed PGM: {0}")]
    Pgm(String),
    #[error("PNG decode: {0}")]
    PngDecode(#[from] png::DecodingError),
    #[error("PNG encode: {0}")]
    PngEncode(#[from] png::EncodingError),
    #[error("unsupported PNG layout: {0}")]
    PngLayout(String),
    #[error("malformed raw dump: {0}")]
    Raw(String),
    #[error("unknown image extension for {0}")]
    Extension(String),
}

/// `round_half_even(255·clamp(v, 0, 1))`.
pub fn quantize<T: Scalar>(v: T) -> u8 {
    let x = v.to_f64_lossy().clamp(0.0, 1.0) * 255.0;
    x.round_ties_even() as u8
}

pub fn to_bytes<T: Scalar>(img: &Image<T>) -> Vec<u8> {
    img.data.iter().map(|&v| quantize(v)).collect()
}

pub fn from_bytes<T: Scalar>(width: usize, height: usize, bytes: &[u8]) -> Image<T> {
    Image {
        width,
        height,
        data: bytes.iter().map(|&b| T::lit(b as f64 / 255.0)).collect(),
    }
}

pub fn encode_pgm<T: Scalar>(img: &Image<T>) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend(to_bytes(img));
    out
}

pub fn decode_pgm<T: Scalar>(bytes: &[u8]) -> Result<Image<T>, ImageIoError> {
    let bad = |m: &str| ImageIoError::Pgm(m.to_string());
    let mut pos = 0;
    let mut fields = Vec::with_capacity(4);
    while fields.len() < 4 {
        while pos < bytes.len() && (bytes[pos].is_ascii_whitespace() || bytes[pos] == b'#') {
            if bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                pos += 1;
            }
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad("truncated header"));
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| bad("non-ASCII header"))?);
    }
    if fields[0] != "P5" {
        return Err(bad("magic is not P5"));
    }
    let num = |s: &str| s.parse::<usize>().map_err(|_| bad("bad number in header"));
    let (w, h, maxval) = (num(fields[1])?, num(fields[2])?, num(fields[3])?);
    if maxval != 255 {
        return Err(bad("only maxval 255 is supported"));
    }
    pos += 1;
    let body = bytes.get(pos..pos + w * h).ok_or_else(|| bad("pixel data truncated"))?;
    Ok(from_bytes(w, h, body))
}

pub fn encode_png<T: Scalar>(img: &Image<T>) -> Result<Vec<u8>, ImageIoError> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, img.width as u32, img.height as u32);
        enc.set_color(png::ColorType::Grayscale);
        enc.set_depth(png::BitDepth::Eight);
        let mut writer = enc.write_header()?;
        writer.write_image_data(&to_bytes(img))?;
    }
    Ok(out)
}

pub fn decode_png<T: Scalar>(bytes: &[u8]) -> Result<Image<T>, ImageIoError> {
    let mut decoder = png::Decoder::new(Cursor::new(bytes));
    decoder.set_transformations(png::Transformations::STRIP_16 | png::Transformations::EXPAND);
    let mut reader = decoder.read_info()?;
    let mut buf = vec![0; reader.output_buffer_size()];
    let info = reader.next_frame(&mut buf)?;
    let (w, h) = (info.width as usize, info.height as usize);
    let gray: Vec<u8> = match info.color_type {
        png::ColorType::Grayscale => buf[..w * h].to_vec(),
        png::ColorType::GrayscaleAlpha => buf[..2 * w * h].chunks_exact(2).map(|c| c[0]).collect(),
        other => return Err(ImageIoError::PngLayout(format!("{other:?}; expected grayscale"))),
    };
    Ok(from_bytes(w, h, &gray))
}

pub fn encode_raw<T: Scalar>(img: &Image<T>) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + 8 * img.data.len());
    out.extend((img.width as u64).to_le_bytes());
    out.extend((img.height as u64).to_le_bytes());
    for &v in &img.data {
        out.extend(v.to_f64_lossy().to_le_bytes());
    }
    out
}

pub fn decode_raw<T: Scalar>(bytes: &[u8]) -> Result<Image<T>, ImageIoError> {
    let word = |i: usize| -> Result<[u8; 8], ImageIoError> {
        bytes
            .get(8 * i..8 * i + 8)
            .map(|b| b.try_into().unwrap())
            .ok_or_else(|| ImageIoError::Raw("truncated".into()))
    };
    let w = u64::from_le_bytes(word(0)?) as usize;
    let h = u64::from_le_bytes(word(1)?) as usize;
    if bytes.len() != 16 + 8 * w * h {
        return Err(ImageIoError::Raw(format!("expected {} bytes for {w}×{h}, got {}", 16 + 8 * w * h, bytes.len())));
    }
    let data = (0..w * h)
        .map(|k| word(2 + k).map(|b| T::lit(f64::from_le_bytes(b))))
        .collect::<Result<_, _>>()?;
    Ok(Image { width: w, height: h, data })
}

fn extension(path: &Path) -> String {
    path.extension()
        .and_then(|e| e.to_str())
        .unwrap_or("")
        .to_ascii_lowercase()
}

/// Encodes by extension: `.pgm`, `.png` or `.raw`.
pub fn encode_for_path<T: Scalar>(img: &Image<T>, path: &Path) -> Result<Vec<u8>, ImageIoError> {
    match extension(path).as_str() {
        "pgm" => Ok(encode_pgm(img)),
        "png" => encode_png(img),
        "raw" => Ok(encode_raw(img)),
        _ => Err(ImageIoError::Extension(path.display().to_string())),
    }
}

pub fn save_image<T: Scalar>(img: &Image<T>, path: impl AsRef<Path>) -> Result<(), ImageIoError> {
    let path = path.as_ref();
    let bytes = encode_for_path(img, path)?;
    fs::write(path, bytes)?;
    Ok(())
}

pub fn load_image<T: Scalar>(path: impl AsRef<Path>) -> Result<Image<T>, ImageIoError> {
    let path = path.as_ref();
    let bytes = fs::read(path)?;
    match extension(path).as_str() {
        "pgm" => decode_pgm(&bytes),
        "png" => decode_png(&bytes),
        "raw" => decode_raw(&bytes),
        _ => Err(ImageIoError::Extension(path.display().to_string())),
    }
}
