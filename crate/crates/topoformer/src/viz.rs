//! Deterministic heatmap rendering for grid-shaped statistics.
//!
//! Rendering is a pure function of (values, colormap, range): the same inputs
//! always produce byte-identical PGM and SVG output. PGM exists so tests and
//! pipelines can byte-compare images without an XML parser.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Colormap {
    /// Symmetric about zero; meant for signed statistics such as s-values.
    Diverging,
    /// Low-to-high ramp; meant for PC weights and other unsigned maps.
    Sequential,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Range {
    /// Clamp to [-limit, limit].
    Symmetric(f64),
    /// Clamp to [lo, hi].
    Fixed(f64, f64),
    /// Use the grid's own min and max.
    MinMax,
}

#[derive(Debug, Clone)]
pub enum VizError {
    NonFiniteValue(usize),
    NotSquare(usize),
    EmptyGrid,
    BadRange(String),
}

impl fmt::Display for VizError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VizError::NonFiniteValue(i) => write!(f, "non-finite value at index {i}"),
            VizError::NotSquare(n) => write!(f, "{n} values do not form a square grid"),
            VizError::EmptyGrid => write!(f, "empty grid"),
            VizError::BadRange(s) => write!(f, "bad range: {s}"),
        }
    }
}

impl std::error::Error for VizError {}

#[derive(Debug, Clone)]
pub struct Heatmap {
    pub side: usize,
    pub values: Vec<f64>,
    pub colormap: Colormap,
    pub range: Range,
}

const SVG_CELL: usize = 20;

impl Heatmap {
    pub fn new(values: Vec<f64>, colormap: Colormap, range: Range) -> Result<Self, VizError> {
        if values.is_empty() {
            return Err(VizError::EmptyGrid);
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(VizError::NonFiniteValue(i));
        }
        let side = (values.len() as f64).sqrt().round() as usize;
        if side * side != values.len() {
            return Err(VizError::NotSquare(values.len()));
        }
        match range {
            Range::Symmetric(l) if !(l > 0.0) => {
                return Err(VizError::BadRange(format!("symmetric limit {l}")))
            }
            Range::Fixed(lo, hi) if !(hi > lo) => {
                return Err(VizError::BadRange(format!("[{lo}, {hi}]")))
            }
            _ => {}
        }
        Ok(Self {
            side,
            values,
            colormap,
            range,
        })
    }

    fn bounds(&self) -> (f64, f64) {
        match self.range {
            Range::Symmetric(l) => (-l, l),
            Range::Fixed(lo, hi) => (lo, hi),
            Range::MinMax => {
                let lo = self.values.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                (lo, hi)
            }
        }
    }

    /// Clamped values mapped to [0, 1]. A constant grid maps to 0.5
    /// everywhere so the diverging midpoint convention still holds.
    pub fn normalized(&self) -> Vec<f64> {
        let (lo, hi) = self.bounds();
        if hi <= lo {
            return vec![0.5; self.values.len()];
        }
        self.values
            .iter()
            .map(|&v| (v.clamp(lo, hi) - lo) / (hi - lo))
            .collect()
    }

    /// Binary PGM (P5): one byte per cell, exact quantization
    /// `round(norm * 255)`.
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.side, self.side).into_bytes();
        out.extend(self.normalized().iter().map(|&t| (t * 255.0).round() as u8));
        out
    }

    /// SVG with one rect per cell, filled with a hex color.
    pub fn to_svg(&self) -> String {
        let px = self.side * SVG_CELL;
        let mut out = format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{px}\" height=\"{px}\" \
             viewBox=\"0 0 {px} {px}\">\n"
        );
        for (i, &t) in self.normalized().iter().enumerate() {
            let row = i / self.side;
            let col = i % self.side;
            let (r, g, b) = self.color(t);
            out.push_str(&format!(
                "<rect x=\"{}\" y=\"{}\" width=\"{SVG_CELL}\" height=\"{SVG_CELL}\" \
                 fill=\"#{r:02x}{g:02x}{b:02x}\"/>\n",
                col * SVG_CELL,
                row * SVG_CELL,
            ));
        }
        out.push_str("</svg>\n");
        out
    }

    fn color(&self, t: f64) -> (u8, u8, u8) {
        let lerp = |a: u8, b: u8, u: f64| -> u8 {
            (a as f64 + (b as f64 - a as f64) * u).round() as u8
        };
        match self.colormap {
            Colormap::Diverging => {
                // blue -> white -> red
                if t < 0.5 {
                    let u = t * 2.0;
                    (lerp(33, 255, u), lerp(102, 255, u), lerp(172, 255, u))
                } else {
                    let u = (t - 0.5) * 2.0;
                    (lerp(255, 178, u), lerp(255, 24, u), lerp(255, 43, u))
                }
            }
            Colormap::Sequential => {
                // white -> dark blue
                (lerp(255, 8, t), lerp(255, 48, t), lerp(255, 107, t))
            }
        }
    }
}
