//! Exact orientation predicates and spherical triangle measures.

use robust::{orient3d, Coord3D};

use crate::Vec3;

#[inline]
fn c(p: &Vec3) -> Coord3D<f64> {
    Coord3D {
        x: p.x,
        y: p.y,
        z: p.z,
    }
}

/// Positive when `d` lies on the side of plane `(a, b, c)` that its
/// counter-clockwise normal `(b - a) x (c - a)` points to; zero when coplanar.
/// The sign is exact.
#[inline]
pub fn orient_above(a: &Vec3, b: &Vec3, c: &Vec3, d: &Vec3) -> f64 {
    -orient3d(self::c(a), self::c(b), self::c(c), self::c(d))
}

/// Sign-exact triple product `det[a, b, c] = a . (b x c)`.
///
/// The magnitude is only approximate; callers should rely on the sign.
#[inline]
pub fn triple_sign(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    let fast = a.dot(&b.cross(c));
    // Error bound for the plain floating-point triple product of unit-scale vectors.
    let bound = 1e-14 * a.norm() * b.norm() * c.norm();
    if fast.abs() > bound {
        fast
    } else {
        -orient_above(a, b, c, &Vec3::zeros())
    }
}

/// Solid angle of the spherical triangle `(a, b, c)` on the unit sphere,
/// non-negative, from `tan(omega / 2) = |det| / (1 + a.b + b.c + c.a)`.
#[inline]
pub fn solid_angle(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    let det = a.dot(&b.cross(c)).abs();
    let denom = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
    2.0 * det.atan2(denom)
}

/// Angle between two unit vectors, stable for small and large angles.
#[inline]
pub fn arc_length(a: &Vec3, b: &Vec3) -> f64 {
    a.cross(b).norm().atan2(a.dot(b))
}
