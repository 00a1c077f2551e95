//! Floating-point geometric predicates.
//!
//! All determinants are formed from coordinate differences, so translating
//! every input by an exactly representable offset does not change them.

use super::Point;

/// Twice the signed area of `abc`; positive when counterclockwise.
#[inline]
pub fn orient2d(a: Point, b: Point, c: Point) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

/// In-circle determinant for a counterclockwise triangle `abc`: positive
/// when `d` lies strictly inside the circumcircle, negative outside.
#[inline]
pub fn incircle(a: Point, b: Point, c: Point, d: Point) -> f64 {
    incircle_with_scale(a, b, c, d).0
}

/// Relative tolerance on the in-circle determinant.
pub const INCIRCLE_RTOL: f64 = 1e-9;

/// In-circle determinant together with its permanent (the same expansion
/// with every product taken in absolute value), which bounds the magnitude
/// of the terms that cancel in it.
#[inline]
pub fn incircle_with_scale(a: Point, b: Point, c: Point, d: Point) -> (f64, f64) {
    let (adx, ady) = (a[0] - d[0], a[1] - d[1]);
    let (bdx, bdy) = (b[0] - d[0], b[1] - d[1]);
    let (cdx, cdy) = (c[0] - d[0], c[1] - d[1]);
    let alift = adx * adx + ady * ady;
    let blift = bdx * bdx + bdy * bdy;
    let clift = cdx * cdx + cdy * cdy;
    let det = alift * (bdx * cdy - cdx * bdy) + blift * (cdx * ady - adx * cdy) + clift * (adx * bdy - bdx * ady);
    let scale = alift * ((bdx * cdy).abs() + (cdx * bdy).abs())
        + blift * ((cdx * ady).abs() + (adx * cdy).abs())
        + clift * ((adx * bdy).abs() + (bdx * ady).abs());
    (det, scale)
}

/// `d` lies inside the circumcircle of counterclockwise `abc` beyond the
/// relative tolerance.
#[inline]
pub fn in_circle_strict(a: Point, b: Point, c: Point, d: Point) -> bool {
    let (det, scale) = incircle_with_scale(a, b, c, d);
    det > INCIRCLE_RTOL * scale
}

/// The four points are cocircular within the relative tolerance.
#[inline]
pub fn cocircular(a: Point, b: Point, c: Point, d: Point) -> bool {
    let (det, scale) = incircle_with_scale(a, b, c, d);
    det.abs() <= INCIRCLE_RTOL * scale
}
