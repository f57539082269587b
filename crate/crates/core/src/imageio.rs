//! Binary PGM/PPM (P5/P6) export of `[H, W, C]` images in `[0, 1]`.

use std::path::Path;

use crate::nn::Tensor;

/// Encode as P5 (one channel) or P6 (three channels), 8-bit, values rounded.
pub fn to_pnm(img: &Tensor) -> std::io::Result<Vec<u8>> {
    let (h, w, c) = img
        .dims3()
        .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidInput, e.to_string()))?;
    let magic = match c {
        1 => "P5",
        3 => "P6",
        _ => {
            return Err(std::io::Error::new(
                std::io::ErrorKind::InvalidInput,
                format!("PNM needs 1 or 3 channels, got {c}"),
            ))
        }
    };
    let mut out = format!("{magic}\n{w} {h}\n255\n").into_bytes();
    out.extend(img.data().iter().map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8));
    Ok(out)
}

pub fn write_pnm(path: impl AsRef<Path>, img: &Tensor) -> std::io::Result<()> {
    std::fs::write(path, to_pnm(img)?)
}

/// Place equally tall images side by side.
pub fn hconcat(images: &[&Tensor]) -> Option<Tensor> {
    let (h, _, c) = images.first()?.dims3().ok()?;
    let widths: Vec<usize> = images
        .iter()
        .map(|t| t.dims3().ok().filter(|d| d.0 == h && d.2 == c).map(|d| d.1))
        .collect::<Option<_>>()?;
    let total: usize = widths.iter().sum();
    let mut data = Vec::with_capacity(h * total * c);
    for y in 0..h {
        for (img, &w) in images.iter().zip(&widths) {
            data.extend_from_slice(&img.data()[y * w * c..(y + 1) * w * c]);
        }
    }
    Tensor::from_vec(&[h, total, c], data).ok()
}
