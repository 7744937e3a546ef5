//! Small fixed-size vector helpers used by the plane geometry code.

use crate::scalar::Real;

pub type Vec3<S> = [S; 3];

pub fn add<S: Real>(a: Vec3<S>, b: Vec3<S>) -> Vec3<S> {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn sub<S: Real>(a: Vec3<S>, b: Vec3<S>) -> Vec3<S> {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn scale<S: Real>(a: Vec3<S>, s: S) -> Vec3<S> {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn dot<S: Real>(a: Vec3<S>, b: Vec3<S>) -> S {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross<S: Real>(a: Vec3<S>, b: Vec3<S>) -> Vec3<S> {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn norm<S: Real>(a: Vec3<S>) -> S {
    dot(a, a).sqrt()
}

pub fn normalize<S: Real>(a: Vec3<S>) -> Vec3<S> {
    let n = norm(a);
    scale(a, S::one() / n)
}

/// Flip the vector so its largest-magnitude component is positive.
pub fn orient_largest_positive<S: Real>(a: Vec3<S>) -> Vec3<S> {
    let mut k = 0;
    for i in 1..3 {
        if a[i].abs() > a[k].abs() {
            k = i;
        }
    }
    if a[k] < S::zero() {
        scale(a, -S::one())
    } else {
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cross_of_axes() {
        let x = [1.0f64, 0.0, 0.0];
        let y = [0.0, 1.0, 0.0];
        assert_eq!(cross(x, y), [0.0, 0.0, 1.0]);
    }

    #[test]
    fn orientation_fixes_sign() {
        assert_eq!(
            orient_largest_positive([0.1f64, -0.9, 0.2]),
            [-0.1, 0.9, -0.2]
        );
    }
}
