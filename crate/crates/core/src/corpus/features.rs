use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Stroke, StrokeSequence};
use crate::error::{read_to_string, Error, Result};

/// Raster-occupancy plus direction-histogram features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub grid_side: usize,
    pub dilation_radius: usize,
    pub direction_bins: usize,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            grid_side: 16,
            dilation_radius: 1,
            direction_bins: 8,
        }
    }
}

impl FeatureConfig {
    pub fn feature_dim(&self) -> usize {
        self.grid_side * self.grid_side + self.direction_bins
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_side == 0 || self.direction_bins == 0 {
            return Err(Error::invalid("grid_side and direction_bins must be positive"));
        }
        Ok(())
    }
}

/// Accumulates ink and segment directions stroke by stroke.
struct Canvas<'a> {
    cfg: &'a FeatureConfig,
    ink: Vec<bool>,
    directions: Vec<f64>,
}

impl<'a> Canvas<'a> {
    fn new(cfg: &'a FeatureConfig) -> Self {
        Canvas {
            cfg,
            ink: vec![false; cfg.grid_side * cfg.grid_side],
            directions: vec![0.0; cfg.direction_bins],
        }
    }

    fn cell(&self, v: f64) -> usize {
        let g = self.cfg.grid_side;
        ((v.clamp(0.0, 1.0) * g as f64).floor() as usize).min(g - 1)
    }

    fn mark(&mut self, [x, y]: [f64; 2]) {
        let (cx, cy) = (self.cell(x), self.cell(y));
        self.ink[cy * self.cfg.grid_side + cx] = true;
    }

    fn add_stroke(&mut self, stroke: &Stroke) {
        let pts = &stroke.points;
        if let Some(&p) = pts.first() {
            self.mark(p);
        }
        let g = self.cfg.grid_side as f64;
        for w in pts.windows(2) {
            let ([x0, y0], [x1, y1]) = (w[0], w[1]);
            let (dx, dy) = (x1 - x0, y1 - y0);
            // half-cell sampling never skips a cell the segment crosses
            let steps = ((dx.abs().max(dy.abs()) * g * 2.0).ceil() as usize).max(1);
            for s in 1..=steps {
                let t = s as f64 / steps as f64;
                self.mark([x0 + t * dx, y0 + t * dy]);
            }
            let len = dx.hypot(dy);
            if len > 0.0 {
                let bins = self.cfg.direction_bins;
                let width = PI / bins as f64;
                let theta = dy.atan2(dx).rem_euclid(PI);
                let bin = (((theta + width / 2.0) / width).floor() as usize) % bins;
                self.directions[bin] += len;
            }
        }
    }

    fn features(&self) -> Vec<f64> {
        let g = self.cfg.grid_side as isize;
        let r = self.cfg.dilation_radius as isize;
        let mut out = vec![0.0; self.cfg.feature_dim()];
        for y in 0..g {
            for x in 0..g {
                if !self.ink[(y * g + x) as usize] {
                    continue;
                }
                for ny in (y - r).max(0)..=(y + r).min(g - 1) {
                    for nx in (x - r).max(0)..=(x + r).min(g - 1) {
                        out[(ny * g + nx) as usize] = 1.0;
                    }
                }
            }
        }
        let total: f64 = self.directions.iter().sum();
        if total > 0.0 {
            let base = (g * g) as usize;
            for (o, d) in out[base..].iter_mut().zip(&self.directions) {
                *o = d / total;
            }
        }
        out
    }
}

/// Features of one cumulative stroke prefix. The occupancy grid is dilated
/// with a square element of `dilation_radius`; the direction histogram is
/// length-weighted over undirected segment orientations and sums to one.
pub fn extract_features(prefix: &[Stroke], cfg: &FeatureConfig) -> Vec<f64> {
    let mut canvas = Canvas::new(cfg);
    for s in prefix {
        canvas.add_stroke(s);
    }
    canvas.features()
}

/// Features of every prefix `S_1 .. S_N`, built incrementally.
pub fn prefix_features(seq: &StrokeSequence, cfg: &FeatureConfig) -> Vec<Vec<f64>> {
    let mut canvas = Canvas::new(cfg);
    seq.strokes
        .iter()
        .map(|s| {
            canvas.add_stroke(s);
            canvas.features()
        })
        .collect()
}

/// Source of per-step feature vectors for a sketch.
pub trait FeatureExtractor: Send + Sync {
    fn dim(&self) -> usize;

    /// One vector per cumulative prefix.
    fn sequence_features(&self, seq: &StrokeSequence) -> Result<Vec<Vec<f64>>>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct RasterExtractor(pub FeatureConfig);

impl FeatureExtractor for RasterExtractor {
    fn dim(&self) -> usize {
        self.0.feature_dim()
    }

    fn sequence_features(&self, seq: &StrokeSequence) -> Result<Vec<Vec<f64>>> {
        self.0.validate()?;
        Ok(prefix_features(seq, &self.0))
    }
}

/// Externally computed features keyed by sketch id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PrecomputedFeatures {
    dim: usize,
    by_id: HashMap<String, Vec<Vec<f64>>>,
}

impl PrecomputedFeatures {
    pub fn load(path: &Path) -> Result<Self> {
        parse_feature_file(&read_to_string(path)?)
    }

    pub fn insert(&mut self, id: impl Into<String>, rows: Vec<Vec<f64>>) -> Result<()> {
        if self.by_id.is_empty() {
            self.dim = rows.first().map_or(0, Vec::len);
        }
        if let Some(r) = rows.iter().find(|r| r.len() != self.dim) {
            return Err(Error::Dimension {
                expected: self.dim,
                got: r.len(),
            });
        }
        self.by_id.insert(id.into(), rows);
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<&[Vec<f64>]> {
        self.by_id.get(id).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.by_id.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_id.is_empty()
    }
}

impl FeatureExtractor for PrecomputedFeatures {
    fn dim(&self) -> usize {
        self.dim
    }

    fn sequence_features(&self, seq: &StrokeSequence) -> Result<Vec<Vec<f64>>> {
        let rows = self
            .get(&seq.sketch_id)
            .ok_or_else(|| Error::NotFound(format!("features for sketch {:?}", seq.sketch_id)))?;
        if rows.len() != seq.len() {
            return Err(Error::LengthMismatch {
                what: format!("{} feature rows for {} strokes of {:?}", rows.len(), seq.len(), seq.sketch_id),
            });
        }
        Ok(rows.to_vec())
    }
}

/// Parses blocks of `<id> <N> <D>` followed by N rows of D floats.
pub fn parse_feature_file(text: &str) -> Result<PrecomputedFeatures> {
    let mut out = PrecomputedFeatures::default();
    let mut lines = text.lines().enumerate().peekable();
    while let Some((i, header)) = lines.next() {
        if header.trim().is_empty() {
            continue;
        }
        let bad = |line: usize, message: &str| Error::Malformed {
            line: line + 1,
            message: message.to_string(),
        };
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 3 {
            return Err(bad(i, "expected block header `<id> <N> <D>`"));
        }
        let n: usize = h[1].parse().map_err(|_| bad(i, "bad N"))?;
        let d: usize = h[2].parse().map_err(|_| bad(i, "bad D"))?;
        let mut rows = Vec::with_capacity(n);
        for _ in 0..n {
            let (j, row) = lines.next().ok_or_else(|| bad(i, "block ends early"))?;
            let vals = row
                .split_whitespace()
                .map(str::parse::<f64>)
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| bad(j, "bad float"))?;
            if vals.len() != d {
                return Err(bad(j, "row width differs from D"));
            }
            if vals.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("feature row"));
            }
            rows.push(vals);
        }
        if out.by_id.contains_key(h[0]) {
            return Err(bad(i, "duplicate sketch id"));
        }
        if !out.is_empty() && d != out.dim {
            return Err(Error::Dimension {
                expected: out.dim,
                got: d,
            });
        }
        out.dim = d;
        out.by_id.insert(h[0].to_string(), rows);
    }
    Ok(out)
}

/// Writes blocks in the given id order.
pub fn write_feature_file<'a>(blocks: impl IntoIterator<Item = (&'a str, &'a [Vec<f64>])>) -> String {
    let mut out = String::new();
    for (n, (id, rows)) in blocks.into_iter().enumerate() {
        if n > 0 {
            out.push('\n');
        }
        let d = rows.first().map_or(0, Vec::len);
        let _ = writeln!(out, "{id} {} {d}", rows.len());
        for r in rows {
            let line: Vec<String> = r.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
    }
    out
}

/// Per-dimension min-max scaling fitted on training features only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureNormalizer {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl FeatureNormalizer {
    pub fn identity(dim: usize) -> Self {
        FeatureNormalizer {
            min: vec![0.0; dim],
            max: vec![1.0; dim],
        }
    }

    pub fn fit<'a>(rows: impl IntoIterator<Item = &'a [f64]>) -> Result<Self> {
        let mut it = rows.into_iter();
        let first = it.next().ok_or_else(|| Error::invalid("no feature rows to fit"))?;
        let mut min = first.to_vec();
        let mut max = first.to_vec();
        for r in it {
            if r.len() != min.len() {
                return Err(Error::Dimension {
                    expected: min.len(),
                    got: r.len(),
                });
            }
            for ((lo, hi), &v) in min.iter_mut().zip(max.iter_mut()).zip(r) {
                *lo = lo.min(v);
                *hi = hi.max(v);
            }
        }
        Ok(FeatureNormalizer { min, max })
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }

    /// Maps into `[0, 1]` on the training range; constant dimensions map to 0.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(x.iter()
            .zip(self.min.iter().zip(&self.max))
            .map(|(&v, (&lo, &hi))| if hi > lo { (v - lo) / (hi - lo) } else { 0.0 })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(bins: usize) -> FeatureConfig {
        FeatureConfig {
            grid_side: 8,
            dilation_radius: 1,
            direction_bins: bins,
        }
    }

    #[test]
    fn empty_prefix_is_zero() {
        let f = extract_features(&[], &cfg(4));
        assert_eq!(f.len(), 68);
        assert!(f.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn horizontal_stroke_histogram() {
        for pts in [vec![[0.1, 0.5], [0.9, 0.5]], vec![[0.9, 0.5], [0.5, 0.5], [0.1, 0.5]]] {
            let f = extract_features(&[Stroke::new(pts)], &cfg(4));
            assert_eq!(&f[64..], &[1.0, 0.0, 0.0, 0.0]);
        }
        let vertical = extract_features(&[Stroke::new(vec![[0.5, 0.1], [0.5, 0.9]])], &cfg(4));
        assert_eq!(&vertical[64..], &[0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn dilation_thickens_a_dot() {
        let dot = [Stroke::new(vec![[0.5, 0.5]])];
        let thin = FeatureConfig {
            dilation_radius: 0,
            ..cfg(4)
        };
        assert_eq!(extract_features(&dot, &thin)[..64].iter().sum::<f64>(), 1.0);
        assert_eq!(extract_features(&dot, &cfg(4))[..64].iter().sum::<f64>(), 9.0);
        // corner dot is clipped by the canvas border
        let corner = [Stroke::new(vec![[0.0, 0.0]])];
        assert_eq!(extract_features(&corner, &cfg(4))[..64].iter().sum::<f64>(), 4.0);
    }

    #[test]
    fn prefixes_match_direct_extraction() {
        let seq = StrokeSequence {
            sketch_id: "s".into(),
            category: "c".into(),
            strokes: vec![
                Stroke::new(vec![[0.1, 0.1], [0.4, 0.7]]),
                Stroke::new(vec![[0.9, 0.2]]),
                Stroke::new(vec![[0.2, 0.9], [0.8, 0.9], [0.8, 0.3]]),
            ],
        };
        let inc = prefix_features(&seq, &cfg(6));
        for (t, f) in inc.iter().enumerate() {
            assert_eq!(f, &extract_features(seq.prefix(t + 1), &cfg(6)));
        }
    }

    #[test]
    fn feature_file_round_trip() {
        let rows_a = vec![vec![0.5, 1.0, -2.25], vec![0.0, 0.125, 3.0]];
        let rows_b = vec![vec![1.0, 2.0, 3.0]];
        let text = write_feature_file([("a", rows_a.as_slice()), ("b", rows_b.as_slice())]);
        let parsed = parse_feature_file(&text).unwrap();
        assert_eq!(parsed.dim(), 3);
        assert_eq!(parsed.get("a").unwrap(), rows_a.as_slice());
        assert_eq!(parsed.get("b").unwrap(), rows_b.as_slice());
        assert!(parse_feature_file("a 2 3\n1 2 3\n").is_err());
        assert!(parse_feature_file("a 1 3\n1 2\n").is_err());
    }

    #[test]
    fn normalizer_uses_training_range() {
        let rows = [vec![0.0, 5.0, 1.0], vec![2.0, 5.0, 3.0]];
        let n = FeatureNormalizer::fit(rows.iter().map(Vec::as_slice)).unwrap();
        assert_eq!(n.apply(&[1.0, 5.0, 3.0]).unwrap(), vec![0.5, 0.0, 1.0]);
        assert_eq!(n.apply(&[4.0, 9.0, 0.0]).unwrap(), vec![2.0, 0.0, -0.5]);
    }
}
