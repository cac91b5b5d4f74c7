use serde::{Deserialize, Serialize};

use super::geometry::{Apartment, Point};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub x: f64,
    pub y: f64,
    pub label: String,
}

/// Nearest-neighbour region classifier with a rejection radius: points
/// farther than `tau` from every sample stay unclassified.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionLearner {
    pub samples: Vec<Sample>,
    pub tau: f64,
}

impl RegionLearner {
    /// Neighbour count. One sample per taught region makes larger k mix labels.
    pub const K: usize = 1;

    pub fn new(tau: f64) -> Self {
        assert!(tau > 0.0, "classification radius must be positive");
        RegionLearner { samples: Vec::new(), tau }
    }

    pub fn add(&mut self, x: f64, y: f64, label: &str) -> &Sample {
        self.samples.push(Sample { x, y, label: label.to_string() });
        self.samples.last().unwrap()
    }

    pub fn classify(&self, p: Point) -> Option<&str> {
        let mut best: Option<(f64, &Sample)> = None;
        for s in &self.samples {
            let d = p.distance_sq(Point::new(s.x, s.y));
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, s));
            }
        }
        best.filter(|(d, _)| d.sqrt() <= self.tau).map(|(_, s)| s.label.as_str())
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.samples.iter().map(|s| s.label.as_str())
    }

    pub fn floor_grid(&self, apartment: &Apartment, resolution: f64) -> FloorGrid {
        assert!(resolution > 0.0);
        let cols = (apartment.width / resolution).ceil().max(1.0) as usize;
        let rows = (apartment.height / resolution).ceil().max(1.0) as usize;
        let mut labels: Vec<String> = Vec::new();
        let mut cells = Vec::with_capacity(cols * rows);
        for r in 0..rows {
            for c in 0..cols {
                let center = Point::new((c as f64 + 0.5) * resolution, (r as f64 + 0.5) * resolution);
                let cell = self.classify(center).map(|label| {
                    labels.iter().position(|l| l == label).unwrap_or_else(|| {
                        labels.push(label.to_string());
                        labels.len() - 1
                    })
                });
                cells.push(cell);
            }
        }
        FloorGrid { resolution, cols, rows, labels, cells }
    }
}

/// Row-major classification of cell centers; row 0 is at y = 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FloorGrid {
    pub resolution: f64,
    pub cols: usize,
    pub rows: usize,
    pub labels: Vec<String>,
    pub cells: Vec<Option<usize>>,
}

impl FloorGrid {
    pub fn get(&self, col: usize, row: usize) -> Option<&str> {
        self.cells[row * self.cols + col].map(|i| self.labels[i].as_str())
    }

    pub fn center(&self, col: usize, row: usize) -> Point {
        Point::new((col as f64 + 0.5) * self.resolution, (row as f64 + 0.5) * self.resolution)
    }
}
