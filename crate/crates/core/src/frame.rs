//! Heat-map frames as netpbm images, for eyeballing what an agent sees.
//!
//! Images are `W` pixels wide and `H` tall; pixel `(x, y)` is board cell
//! `(column x, row y)` from the chosen seat.

use std::io::{self, Write};
use std::path::{Path, PathBuf};

use ndarray::{Array2, Array3};

use crate::encoders::{encode_gray_heatmap, encode_rgb_heatmap};
use crate::game::{GameState, PlayerId};

fn to_byte(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Binary PPM (`P6`, max value 255) of a `W × H × 3` heat-map.
pub fn write_ppm(out: &mut impl Write, rgb: &Array3<f64>) -> io::Result<()> {
    let (w, h, _) = rgb.dim();
    write!(out, "P6\n{w} {h}\n255\n")?;
    let mut bytes = Vec::with_capacity(w * h * 3);
    for y in 0..h {
        for x in 0..w {
            for c in 0..3 {
                bytes.push(to_byte(rgb[(x, y, c)]));
            }
        }
    }
    out.write_all(&bytes)
}

/// Binary PGM (`P5`, max value 255) of a `W × H` heat-map.
pub fn write_pgm(out: &mut impl Write, gray: &Array2<f64>) -> io::Result<()> {
    let (w, h) = gray.dim();
    write!(out, "P5\n{w} {h}\n255\n")?;
    let mut bytes = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            bytes.push(to_byte(gray[(x, y)]));
        }
    }
    out.write_all(&bytes)
}

/// Writes `{episode}_{tick}.ppm` and `{episode}_{tick}.pgm` into `dir`.
pub fn export_frame(
    dir: &Path,
    episode: u64,
    state: &GameState,
    perspective: PlayerId,
) -> io::Result<[PathBuf; 2]> {
    let stem = format!("{episode}_{}", state.tick);
    let ppm = dir.join(format!("{stem}.ppm"));
    let pgm = dir.join(format!("{stem}.pgm"));
    let mut f = io::BufWriter::new(std::fs::File::create(&ppm)?);
    write_ppm(&mut f, &encode_rgb_heatmap(state, perspective))?;
    f.flush()?;
    let mut f = io::BufWriter::new(std::fs::File::create(&pgm)?);
    write_pgm(&mut f, &encode_gray_heatmap(state, perspective))?;
    f.flush()?;
    Ok([ppm, pgm])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::SimConfig;

    #[test]
    fn ppm_layout() {
        let g = GameState::new(SimConfig::default(), 1).unwrap();
        let mut buf = Vec::new();
        write_ppm(&mut buf, &encode_rgb_heatmap(&g, 0)).unwrap();
        let header = b"P6\n30 11\n255\n";
        assert_eq!(&buf[..header.len()], header);
        assert_eq!(buf.len(), header.len() + 30 * 11 * 3);
        // cursor at column 7, row 5 is teal
        let at = header.len() + (5 * 30 + 7) * 3;
        assert_eq!(&buf[at..at + 3], &[0, 255, 255]);
    }

    #[test]
    fn pgm_layout() {
        let g = GameState::new(SimConfig::default(), 1).unwrap();
        let mut buf = Vec::new();
        write_pgm(&mut buf, &encode_gray_heatmap(&g, 0)).unwrap();
        let header = b"P5\n30 11\n255\n";
        assert_eq!(&buf[..header.len()], header);
        assert_eq!(buf.len(), header.len() + 330);
        assert_eq!(buf[header.len() + 5 * 30 + 7], 255);
        assert_eq!(buf.iter().skip(header.len()).filter(|&&b| b != 0).count(), 1);
    }

    #[test]
    fn export_writes_both_files() {
        let dir = tempfile::tempdir().unwrap();
        let g = GameState::new(SimConfig::default(), 1).unwrap();
        let [ppm, pgm] = export_frame(dir.path(), 3, &g, 0).unwrap();
        assert_eq!(ppm.file_name().unwrap(), "3_0.ppm");
        assert_eq!(pgm.file_name().unwrap(), "3_0.pgm");
        assert!(ppm.exists() && pgm.exists());
    }
}
