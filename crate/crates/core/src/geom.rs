use std::ops::{Add, Mul, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Moves at most `step` toward `target`, stopping on it.
    pub fn step_toward(self, target: Vec2, step: f64) -> Vec2 {
        let d = distance(self, target);
        if d <= step || d == 0.0 {
            target
        } else {
            self + (target - self) * (step / d)
        }
    }

    /// Moves exactly `step` directly away from `threat`. A coincident threat
    /// gives no direction, so the move falls back to +x.
    pub fn step_away(self, threat: Vec2, step: f64) -> Vec2 {
        let d = distance(self, threat);
        if d == 0.0 {
            self + Vec2::new(step, 0.0)
        } else {
            self + (self - threat) * (step / d)
        }
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

/// Euclidean distance.
pub fn distance(a: Vec2, b: Vec2) -> f64 {
    (a - b).norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distances() {
        assert_eq!(distance(Vec2::new(0.0, 0.0), Vec2::new(3.0, 4.0)), 5.0);
        let a = Vec2::new(88.0, 105.0);
        assert_eq!(distance(a, a), 0.0);
        assert_eq!(distance(a, Vec2::new(100.0, 100.0)), 13.0);
        assert_eq!(distance(Vec2::new(100.0, 100.0), a), 13.0);
    }

    #[test]
    fn steps() {
        let a = Vec2::new(0.0, 0.0);
        let b = Vec2::new(3.0, 4.0);
        let s = a.step_toward(b, 1.0);
        assert!((distance(s, b) - 4.0).abs() < 1e-12);
        assert_eq!(a.step_toward(b, 7.0), b);
        let f = a.step_away(b, 2.0);
        assert!((distance(f, b) - 7.0).abs() < 1e-12);
    }
}
