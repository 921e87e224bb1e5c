//! Minimal 3-vector helpers. Positions are in meters, wave vectors in rad/m.

pub type Vec3 = [f64; 3];

pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn neg(a: Vec3) -> Vec3 {
    [-a[0], -a[1], -a[2]]
}

pub fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_algebra() {
        let a = [1.0, 2.0, 3.0];
        let b = [-1.0, 0.5, 2.0];
        assert_eq!(dot(a, b), -1.0 + 1.0 + 6.0);
        assert_eq!(add(a, neg(a)), [0.0, 0.0, 0.0]);
        assert_eq!(sub(a, a), [0.0, 0.0, 0.0]);
        assert_eq!(scale(b, 2.0), [-2.0, 1.0, 4.0]);
        assert_eq!(norm([3.0, 4.0, 0.0]), 5.0);
    }
}
