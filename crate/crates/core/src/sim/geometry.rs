use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn distance_sq(self, other: Point) -> f64 {
        let (dx, dy) = (self.x - other.x, self.y - other.y);
        dx * dx + dy * dy
    }

    pub fn lerp(self, other: Point, t: f64) -> Point {
        Point::new(self.x + (other.x - self.x) * t, self.y + (other.y - self.y) * t)
    }
}

/// Axis-aligned rectangle anchored at its lower-left corner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl Rect {
    pub const fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        Rect { x, y, w, h }
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x && p.x <= self.x + self.w && p.y >= self.y && p.y <= self.y + self.h
    }

    /// Euclidean distance from `p` to the closest point of the rectangle.
    pub fn distance_to(&self, p: Point) -> f64 {
        let dx = (self.x - p.x).max(0.0).max(p.x - (self.x + self.w));
        let dy = (self.y - p.y).max(0.0).max(p.y - (self.y + self.h));
        dx.hypot(dy)
    }

    /// Whether a disc of `radius` around `p` touches the rectangle.
    pub fn touches_disc(&self, p: Point, radius: f64) -> bool {
        self.distance_to(p) <= radius
    }

    pub fn within(&self, outer: &Rect) -> bool {
        self.x >= outer.x && self.y >= outer.y && self.x + self.w <= outer.x + outer.w && self.y + self.h <= outer.y + outer.h
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

impl Pose {
    pub fn at(p: Point) -> Self {
        Pose { x: p.x, y: p.y, heading: 0.0 }
    }

    pub fn point(&self) -> Point {
        Point::new(self.x, self.y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Room {
    pub name: String,
    pub rect: Rect,
}

/// Floor plan. Bounds start at the origin; rooms are display-only.
#[derive(Debug, Clone, PartialEq)]
pub struct Apartment {
    pub width: f64,
    pub height: f64,
    pub walls: Vec<Rect>,
    pub rooms: Vec<Room>,
}

impl Apartment {
    pub fn bounds(&self) -> Rect {
        Rect::new(0.0, 0.0, self.width, self.height)
    }

    pub fn in_bounds(&self, p: Point) -> bool {
        self.bounds().contains(p)
    }

    /// Whether a disc of `radius` at `p` overlaps any wall.
    pub fn hits_wall(&self, p: Point, radius: f64) -> bool {
        self.walls.iter().any(|w| w.touches_disc(p, radius))
    }

    pub fn room_at(&self, p: Point) -> Option<&str> {
        self.rooms.iter().find(|r| r.rect.contains(p)).map(|r| r.name.as_str())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rect_distance() {
        let r = Rect::new(1.0, 1.0, 2.0, 1.0);
        assert_eq!(r.distance_to(Point::new(2.0, 1.5)), 0.0);
        assert!((r.distance_to(Point::new(0.0, 1.5)) - 1.0).abs() < 1e-12);
        assert!((r.distance_to(Point::new(6.0, 6.0)) - 5.0).abs() < 1e-12);
        assert!(r.touches_disc(Point::new(0.8, 1.5), 0.25));
        assert!(!r.touches_disc(Point::new(0.7, 1.5), 0.25));
    }
}
