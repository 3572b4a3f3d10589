use std::fmt;

use crate::mesh::Point;

/// Region primitives, described by signed distance (negative inside).
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Empty,
    /// `{x : normal · x ≤ offset}`.
    HalfPlane { normal: [f64; 2], offset: f64 },
    Disk { center: Point, radius: f64 },
    Annulus { center: Point, r_inner: f64, r_outer: f64 },
    Triangle { vertices: [Point; 3] },
    /// Points of the first shape not in the second.
    Difference(Box<Shape>, Box<Shape>),
}

fn dist_to_segment(p: Point, a: Point, b: Point) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let ap = [p[0] - a[0], p[1] - a[1]];
    let t = ((ap[0] * ab[0] + ap[1] * ab[1]) / (ab[0] * ab[0] + ab[1] * ab[1])).clamp(0.0, 1.0);
    let d = [ap[0] - t * ab[0], ap[1] - t * ab[1]];
    d[0].hypot(d[1])
}

impl Shape {
    pub fn signed_distance(&self, p: Point) -> f64 {
        match self {
            Shape::Empty => f64::INFINITY,
            Shape::HalfPlane { normal, offset } => {
                (normal[0] * p[0] + normal[1] * p[1] - offset) / normal[0].hypot(normal[1])
            }
            Shape::Disk { center, radius } => (p[0] - center[0]).hypot(p[1] - center[1]) - radius,
            Shape::Annulus {
                center,
                r_inner,
                r_outer,
            } => {
                let r = (p[0] - center[0]).hypot(p[1] - center[1]);
                (r - r_outer).max(r_inner - r)
            }
            Shape::Triangle { vertices: [a, b, c] } => {
                let d = dist_to_segment(p, *a, *b)
                    .min(dist_to_segment(p, *b, *c))
                    .min(dist_to_segment(p, *c, *a));
                let side = |u: Point, v: Point| (v[0] - u[0]) * (p[1] - u[1]) - (v[1] - u[1]) * (p[0] - u[0]);
                let (s1, s2, s3) = (side(*a, *b), side(*b, *c), side(*c, *a));
                let inside = (s1 >= 0.0 && s2 >= 0.0 && s3 >= 0.0) || (s1 <= 0.0 && s2 <= 0.0 && s3 <= 0.0);
                if inside {
                    -d
                } else {
                    d
                }
            }
            Shape::Difference(a, b) => a.signed_distance(p).max(-b.signed_distance(p)),
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        self.signed_distance(p) < 0.0
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Empty => write!(f, "empty()"),
            Shape::HalfPlane { normal, offset } => {
                write!(f, "halfplane({:?}, {:?}, {:?})", normal[0], normal[1], offset)
            }
            Shape::Disk { center, radius } => write!(f, "disk({:?}, {:?}, {:?})", center[0], center[1], radius),
            Shape::Annulus {
                center,
                r_inner,
                r_outer,
            } => write!(
                f,
                "annulus({:?}, {:?}, {:?}, {:?})",
                center[0], center[1], r_inner, r_outer
            ),
            Shape::Triangle { vertices: [a, b, c] } => write!(
                f,
                "triangle({:?}, {:?}, {:?}, {:?}, {:?}, {:?})",
                a[0], a[1], b[0], b[1], c[0], c[1]
            ),
            Shape::Difference(a, b) => write!(f, "difference({a}, {b})"),
        }
    }
}

/// `3t² − 2t³` on `[0, 1]`, clamped outside.
#[inline]
pub fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

/// One region `D_l` per non-reference component, with a common regularization
/// width. The regularized indicator of `D_l` ramps from 1 to 0 across a band of
/// width `w_reg` centered on the region boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainLayout {
    pub regions: Vec<Shape>,
    pub w_reg: f64,
}

impl DomainLayout {
    pub fn new(regions: Vec<Shape>, w_reg: f64) -> Self {
        DomainLayout { regions, w_reg }
    }

    pub fn num_components(&self) -> usize {
        self.regions.len()
    }

    /// Regularized indicator of region `l` (0-based over the regions).
    pub fn indicator(&self, l: usize, p: Point) -> f64 {
        let d = self.regions[l].signed_distance(p);
        if self.w_reg > 0.0 {
            smoothstep(0.5 - d / self.w_reg)
        } else if d < 0.0 {
            1.0
        } else {
            0.0
        }
    }

    /// Index (1-based component) of the region containing `p`, or 0.
    pub fn region_of(&self, p: Point) -> usize {
        self.regions
            .iter()
            .position(|s| s.contains(p))
            .map_or(0, |l| l + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn annulus_distance() {
        let a = Shape::Annulus {
            center: [0.0, 0.0],
            r_inner: 1.0,
            r_outer: 2.0,
        };
        assert_abs_diff_eq!(a.signed_distance([1.5, 0.0]), -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(a.signed_distance([0.0, 0.25]), 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(a.signed_distance([0.0, -3.0]), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn triangle_distance_either_orientation() {
        let ccw = Shape::Triangle {
            vertices: [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
        };
        let cw = Shape::Triangle {
            vertices: [[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]],
        };
        for t in [&ccw, &cw] {
            assert_abs_diff_eq!(t.signed_distance([0.1, 0.2]), -0.1, epsilon = 1e-15);
            assert_abs_diff_eq!(t.signed_distance([-1.0, -1.0]), 2f64.sqrt(), epsilon = 1e-15);
            assert_abs_diff_eq!(t.signed_distance([1.0, 1.0]), 0.5f64.sqrt(), epsilon = 1e-15);
        }
    }

    #[test]
    fn difference_and_halfplane() {
        let d = Shape::Difference(
            Box::new(Shape::Disk {
                center: [0.0, 0.0],
                radius: 1.0,
            }),
            Box::new(Shape::HalfPlane {
                normal: [2.0, 0.0],
                offset: 0.0,
            }),
        );
        assert!(d.contains([0.5, 0.0]));
        assert!(!d.contains([-0.5, 0.0]));
        assert_abs_diff_eq!(d.signed_distance([0.5, 0.0]), -0.5, epsilon = 1e-15);
    }

    #[test]
    fn indicator_saturates_and_ramps() {
        let l = DomainLayout::new(
            vec![Shape::Disk {
                center: [0.0, 0.0],
                radius: 1.0,
            }],
            0.2,
        );
        assert_eq!(l.indicator(0, [0.0, 0.0]), 1.0);
        assert_eq!(l.indicator(0, [1.2, 0.0]), 0.0);
        assert_abs_diff_eq!(l.indicator(0, [1.0, 0.0]), 0.5, epsilon = 1e-15);
        assert_eq!(l.region_of([0.0, 0.0]), 1);
        assert_eq!(l.region_of([3.0, 0.0]), 0);
    }

    #[test]
    fn complementary_ramps_sum_to_one() {
        assert_abs_diff_eq!(smoothstep(0.3) + smoothstep(0.7), 1.0, epsilon = 1e-15);
    }
}
