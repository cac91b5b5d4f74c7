//! Occupancy grid and A* over it.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::geometry::{Apartment, Point};

const STRAIGHT: i64 = 10;
const DIAGONAL: i64 = 14;

/// Grid of free/blocked cells over the apartment bounds. A cell is blocked
/// when its center lies within `clearance` of a wall.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    resolution: f64,
    clearance: f64,
    cols: usize,
    rows: usize,
    blocked: Vec<bool>,
    apartment: Apartment,
}

impl OccupancyGrid {
    pub fn build(apartment: &Apartment, resolution: f64, clearance: f64) -> Self {
        assert!(resolution > 0.0);
        let cols = (apartment.width / resolution).ceil().max(1.0) as usize;
        let rows = (apartment.height / resolution).ceil().max(1.0) as usize;
        let mut grid = OccupancyGrid {
            resolution,
            clearance,
            cols,
            rows,
            blocked: vec![false; cols * rows],
            apartment: apartment.clone(),
        };
        for r in 0..rows {
            for c in 0..cols {
                let center = grid.center(c, r);
                grid.blocked[r * cols + c] = !grid.is_free(center);
            }
        }
        grid
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.cols, self.rows)
    }

    pub fn center(&self, col: usize, row: usize) -> Point {
        Point::new((col as f64 + 0.5) * self.resolution, (row as f64 + 0.5) * self.resolution)
    }

    pub fn cell_of(&self, p: Point) -> Option<(usize, usize)> {
        if !self.apartment.in_bounds(p) {
            return None;
        }
        let c = ((p.x / self.resolution) as usize).min(self.cols - 1);
        let r = ((p.y / self.resolution) as usize).min(self.rows - 1);
        Some((c, r))
    }

    pub fn is_blocked(&self, col: usize, row: usize) -> bool {
        self.blocked[row * self.cols + col]
    }

    /// Exact geometric check, independent of the cell discretization.
    pub fn is_free(&self, p: Point) -> bool {
        self.apartment.in_bounds(p) && !self.apartment.hits_wall(p, self.clearance)
    }

    pub fn segment_clear(&self, a: Point, b: Point) -> bool {
        let samples = (a.distance(b) / (self.resolution * 0.25)).ceil().max(1.0) as usize;
        (0..=samples).all(|i| self.is_free(a.lerp(b, i as f64 / samples as f64)))
    }

    /// Shortest collision-free polyline from `start` to `goal`, or `None`
    /// if the goal is blocked or unreachable. The first point is `start` and
    /// the last is `goal`. A start grazing the clearance margin is tolerated.
    pub fn plan(&self, start: Point, goal: Point) -> Option<Vec<Point>> {
        if !self.is_free(goal) {
            return None;
        }
        if self.segment_clear(start, goal) {
            return Some(vec![start, goal]);
        }
        let s = self.cell_of(start)?;
        let g = self.cell_of(goal)?;
        if self.is_blocked(g.0, g.1) {
            return None;
        }
        let cells = self.astar(s, g)?;
        let mut raw = Vec::with_capacity(cells.len() + 1);
        raw.push(start);
        raw.extend(cells.iter().skip(1).map(|&(c, r)| self.center(c, r)));
        raw.push(goal);
        Some(self.shortcut(&raw))
    }

    /// Greedy line-of-sight shortcutting over a raw cell path.
    fn shortcut(&self, raw: &[Point]) -> Vec<Point> {
        let mut out = vec![raw[0]];
        let mut anchor = 0;
        while anchor < raw.len() - 1 {
            let mut next = anchor + 1;
            for j in (anchor + 2..raw.len()).rev() {
                if self.segment_clear(raw[anchor], raw[j]) {
                    next = j;
                    break;
                }
            }
            out.push(raw[next]);
            anchor = next;
        }
        out
    }

    fn astar(&self, start: (usize, usize), goal: (usize, usize)) -> Option<Vec<(usize, usize)>> {
        let n = self.cols * self.rows;
        let idx = |(c, r): (usize, usize)| r * self.cols + c;
        let heuristic = |(c, r): (usize, usize)| {
            let dx = (c as i64 - goal.0 as i64).abs();
            let dy = (r as i64 - goal.1 as i64).abs();
            STRAIGHT * (dx + dy) + (DIAGONAL - 2 * STRAIGHT) * dx.min(dy)
        };

        let mut g_cost = vec![i64::MAX; n];
        let mut parent = vec![usize::MAX; n];
        let mut closed = vec![false; n];
        let mut open = BinaryHeap::new();
        g_cost[idx(start)] = 0;
        open.push(Reverse((heuristic(start), 0i64, idx(start))));

        while let Some(Reverse((_, g, cur))) = open.pop() {
            if closed[cur] {
                continue;
            }
            closed[cur] = true;
            if cur == idx(goal) {
                let mut path = vec![goal];
                let mut at = cur;
                while parent[at] != usize::MAX {
                    at = parent[at];
                    path.push((at % self.cols, at / self.cols));
                }
                path.reverse();
                return Some(path);
            }
            let (c, r) = ((cur % self.cols) as i64, (cur / self.cols) as i64);
            for (dc, dr) in [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)] {
                let (nc, nr) = (c + dc, r + dr);
                if nc < 0 || nr < 0 || nc >= self.cols as i64 || nr >= self.rows as i64 {
                    continue;
                }
                let (nc, nr) = (nc as usize, nr as usize);
                if self.is_blocked(nc, nr) {
                    continue;
                }
                let diagonal = dc != 0 && dr != 0;
                if diagonal && (self.is_blocked(c as usize, nr) || self.is_blocked(nc, r as usize)) {
                    continue;
                }
                let ni = idx((nc, nr));
                let ng = g + if diagonal { DIAGONAL } else { STRAIGHT };
                if ng < g_cost[ni] {
                    g_cost[ni] = ng;
                    parent[ni] = cur;
                    open.push(Reverse((ng + heuristic((nc, nr)), ng, ni)));
                }
            }
        }
        None
    }
}

pub fn polyline_length(path: &[Point]) -> f64 {
    path.windows(2).map(|w| w[0].distance(w[1])).sum()
}

/// Point reached after travelling `distance` along the polyline, and the
/// heading of the segment it lies on.
pub fn advance(path: &[Point], distance: f64) -> (Point, f64) {
    let mut left = distance.max(0.0);
    let mut heading = 0.0;
    for w in path.windows(2) {
        let seg = w[0].distance(w[1]);
        heading = (w[1].y - w[0].y).atan2(w[1].x - w[0].x);
        if left <= seg {
            let t = if seg > 0.0 { left / seg } else { 0.0 };
            return (w[0].lerp(w[1], t), heading);
        }
        left -= seg;
    }
    (*path.last().expect("non-empty path"), heading)
}

#[cfg(test)]
mod tests {
    use super::super::geometry::Rect;
    use super::*;

    fn room_with_divider() -> Apartment {
        // 6x4 room, wall across x=3 leaving a gap at the top.
        Apartment { width: 6.0, height: 4.0, walls: vec![Rect::new(2.9, 0.0, 0.2, 3.0)], rooms: vec![] }
    }

    #[test]
    fn straight_line_when_clear() {
        let grid = OccupancyGrid::build(&room_with_divider(), 0.1, 0.15);
        let path = grid.plan(Point::new(0.5, 3.5), Point::new(5.5, 3.5)).unwrap();
        assert_eq!(path.len(), 2);
    }

    #[test]
    fn detours_around_wall() {
        let grid = OccupancyGrid::build(&room_with_divider(), 0.1, 0.15);
        let (a, b) = (Point::new(1.0, 1.0), Point::new(5.0, 1.0));
        let path = grid.plan(a, b).unwrap();
        assert!(path.len() > 2);
        assert!(path.windows(2).all(|w| grid.segment_clear(w[0], w[1])));
        // has to climb over the wall top at y=3 plus clearance
        let len = polyline_length(&path);
        let lower = a.distance(Point::new(3.0, 3.15)) + Point::new(3.0, 3.15).distance(b);
        assert!(len >= lower - 1e-9, "{len} < {lower}");
        assert!(len < lower + 0.5, "path too long: {len}");
    }

    #[test]
    fn blocked_goal_has_no_path() {
        let grid = OccupancyGrid::build(&room_with_divider(), 0.1, 0.15);
        assert!(grid.plan(Point::new(1.0, 1.0), Point::new(3.0, 1.0)).is_none());
    }

    #[test]
    fn advance_along_polyline() {
        let path = [Point::new(0.0, 0.0), Point::new(3.0, 0.0), Point::new(3.0, 4.0)];
        assert_eq!(polyline_length(&path), 7.0);
        let (p, h) = advance(&path, 5.0);
        assert!((p.x - 3.0).abs() < 1e-12 && (p.y - 2.0).abs() < 1e-12);
        assert!((h - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        assert_eq!(advance(&path, 100.0).0, Point::new(3.0, 4.0));
    }
}
