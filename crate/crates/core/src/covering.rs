//! Covering maps of the complexified zone torus: the square torus double-
//! covers the rhombus torus, triples of tori eight-cover the reduced 4D
//! zone through a hyperplane projection.
//!
//! Coordinates are complexified as `z = eps (E + i p) / (2 pi)`, so the
//! square torus is `C / (Z + iZ)` with fundamental domain `[-1/2, 1/2)^2`,
//! and the rhombus torus is the quotient by the denser lattice generated by
//! `j = e^{-i pi/4}/sqrt(2)` and `1/(2j)`.

use num_complex::Complex64;

use crate::fourier::closed_form_det;
use crate::schemes::SchemeSpec;
use crate::Result;

/// `j = (1 - i)/2`, the generator mapping the square lattice onto the
/// rhombus lattice.
pub const COVER_SHIFT: Complex64 = Complex64::new(0.5, -0.5);

/// A point of a complexified zone torus, stored as one representative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusPoint {
    pub z: Complex64,
}

impl TorusPoint {
    pub fn new(z: Complex64) -> Self {
        Self { z }
    }

    /// Complexifies physical `(E, p)` at spacing `eps`.
    pub fn from_energy_momentum(energy: f64, momentum: f64, eps: f64) -> Self {
        Self {
            z: Complex64::new(energy, momentum) * eps / (2.0 * std::f64::consts::PI),
        }
    }

    /// Physical `(E, p)` of the stored representative.
    pub fn to_energy_momentum(&self, eps: f64) -> (f64, f64) {
        let s = 2.0 * std::f64::consts::PI / eps;
        (self.z.re * s, self.z.im * s)
    }
}

fn round_half_up(x: f64) -> f64 {
    (x + 0.5).floor()
}

/// Canonical representative on the square torus, both coordinates in
/// `[-1/2, 1/2)`.
pub fn reduce_square(z: Complex64) -> Complex64 {
    Complex64::new(z.re - round_half_up(z.re), z.im - round_half_up(z.im))
}

/// Rhombus-lattice coordinates of `z` in the basis `{j, 1/(2j)}`.
fn rhombus_coords(z: Complex64) -> (f64, f64) {
    (z.re - z.im, z.re + z.im)
}

/// Canonical representative on the rhombus torus: both lattice coefficients
/// in `[-1/2, 1/2)` (a half-open fundamental rhombus).
pub fn reduce_rhombus(z: Complex64) -> Complex64 {
    let (a, b) = rhombus_coords(z);
    let (na, nb) = (round_half_up(a), round_half_up(b));
    // gamma = na * j + nb / (2 j)
    let gamma = COVER_SHIFT * na + Complex64::new(0.5, 0.5) * nb;
    z - gamma
}

/// Distance of two points as square-torus classes.
pub fn square_class_distance(a: Complex64, b: Complex64) -> f64 {
    reduce_square(a - b).norm()
}

/// Distance of two points as rhombus-torus classes.
pub fn rhombus_class_distance(a: Complex64, b: Complex64) -> f64 {
    reduce_rhombus(a - b).norm()
}

/// The covering map: the rhombus-canonical representative of a square-torus
/// point. Restricted to the rhombus it is the identity.
pub fn phi(z: TorusPoint) -> TorusPoint {
    TorusPoint::new(reduce_rhombus(z.z))
}

/// Both square-torus preimages of a rhombus-torus point; they differ by the
/// half-diagonal shift `j`.
pub fn fiber(z_rhombus: TorusPoint) -> [TorusPoint; 2] {
    [
        TorusPoint::new(reduce_square(z_rhombus.z)),
        TorusPoint::new(reduce_square(z_rhombus.z + COVER_SHIFT)),
    ]
}

/// Preimages found by brute-force enumeration of rhombus-lattice shifts,
/// deduplicated as square-torus classes.
pub fn fiber_by_enumeration(z_rhombus: TorusPoint) -> Vec<TorusPoint> {
    let mut found: Vec<Complex64> = Vec::new();
    for a in -2i32..=2 {
        for b in -2i32..=2 {
            let shift = COVER_SHIFT * a as f64 + Complex64::new(0.5, 0.5) * b as f64;
            let cand = reduce_square(z_rhombus.z + shift);
            if rhombus_class_distance(cand, z_rhombus.z) > 1e-12 {
                continue; // not a preimage
            }
            if found.iter().all(|&f| square_class_distance(f, cand) > 1e-9) {
                found.push(cand);
            }
        }
    }
    found.into_iter().map(TorusPoint::new).collect()
}

/// Componentwise double cover of a torus triple; an eight-cover in total.
pub fn phi3(z: TorusPoint, w: TorusPoint, x: TorusPoint) -> (TorusPoint, TorusPoint, TorusPoint) {
    (phi(z), phi(w), phi(x))
}

/// All eight preimage triples of a rhombus-torus triple.
pub fn fiber3(
    z: TorusPoint,
    w: TorusPoint,
    x: TorusPoint,
) -> Vec<(TorusPoint, TorusPoint, TorusPoint)> {
    let (fz, fw, fx) = (fiber(z), fiber(w), fiber(x));
    let mut out = Vec::with_capacity(8);
    for a in fz {
        for b in fw {
            for c in fx {
                out.push((a, b, c));
            }
        }
    }
    out
}

/// Projection of a torus triple onto the hyperplane where all three real
/// parts agree: keeps the first coordinate whole and the imaginary parts of
/// the other two.
pub fn pi(z: TorusPoint, w: TorusPoint, x: TorusPoint) -> (Complex64, Complex64) {
    (z.z, Complex64::new(w.z.im, x.z.im))
}

/// The section of the projection with `Re z = Re w = Re x`.
pub fn pi_section(u: Complex64, v: Complex64) -> (TorusPoint, TorusPoint, TorusPoint) {
    (
        TorusPoint::new(u),
        TorusPoint::new(Complex64::new(u.re, v.re)),
        TorusPoint::new(Complex64::new(u.re, v.im)),
    )
}

/// The composite reduced-zone cover `pi . phi3 . section`.
pub fn phi2(u: Complex64, v: Complex64) -> (Complex64, Complex64) {
    let (z, w, x) = pi_section(u, v);
    let (fz, fw, fx) = phi3(z, w, x);
    pi(fz, fw, fx)
}

/// Max deviation of the composite cover across different torus lifts of the
/// same input point.
pub fn phi2_well_defined_check(samples: usize, seed: u64) -> f64 {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let u = Complex64::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
        let v = Complex64::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
        let base = phi2(u, v);
        for _ in 0..3 {
            let lift_u = u + Complex64::new(
                rng.gen_range(-2i32..=2) as f64,
                rng.gen_range(-2i32..=2) as f64,
            );
            let lift_v = v + Complex64::new(
                rng.gen_range(-2i32..=2) as f64,
                rng.gen_range(-2i32..=2) as f64,
            );
            let other = phi2(lift_u, lift_v);
            worst = worst
                .max((other.0 - base.0).norm())
                .max((other.1 - base.1).norm());
        }
    }
    worst
}

/// Max deviation of |det| across the two sheets of the cover: the base
/// walk's dispersion magnitude must agree at both fiber preimages of random
/// rhombus points.
pub fn det_sheet_consistency(spec: &SchemeSpec, samples: usize, seed: u64) -> Result<f64> {
    use rand::Rng;
    use rand::SeedableRng;
    let base = spec.unflavored();
    let expr = closed_form_det(&base);
    let eps = spec.epsilon;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let z = TorusPoint::new(Complex64::new(
            rng.gen_range(-0.5..0.5),
            rng.gen_range(-0.5..0.5),
        ));
        let down = phi(z);
        let [p1, p2] = fiber(down);
        let (e1, m1) = p1.to_energy_momentum(eps);
        let (e2, m2) = p2.to_energy_momentum(eps);
        let d1 = expr.det(e1, &[m1]).norm();
        let d2 = expr.det(e2, &[m2]).norm();
        worst = worst.max((d1 - d2).abs());
    }
    Ok(worst)
}

/// Which cover a report refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoveringKind {
    Phi1d,
    Phi3d,
    PiProjection,
}

/// Descriptive metadata for reports.
#[derive(Debug, Clone, Copy)]
pub struct CoveringMap {
    pub kind: CoveringKind,
    pub multiplicity: usize,
}

impl CoveringMap {
    pub fn phi_1d() -> Self {
        Self {
            kind: CoveringKind::Phi1d,
            multiplicity: 2,
        }
    }

    pub fn phi_3d() -> Self {
        Self {
            kind: CoveringKind::Phi3d,
            multiplicity: 8,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;

    fn pt(re: f64, im: f64) -> TorusPoint {
        TorusPoint::new(Complex64::new(re, im))
    }

    #[test]
    fn phi_identifies_zero_and_the_half_diagonal() {
        assert_eq!(phi(pt(0.0, 0.0)).z, Complex64::default());
        assert!(phi(TorusPoint::new(COVER_SHIFT)).z.norm() < 1e-15);
        // the half-diagonal pair from the quarter-turn direction
        let z1 = TorusPoint::new(Complex64::from_polar(
            1.0 / 2.0f64.sqrt(),
            -std::f64::consts::FRAC_PI_4,
        ));
        let z2 = TorusPoint::new(Complex64::from_polar(
            1.0 / 2.0f64.sqrt(),
            5.0 * std::f64::consts::FRAC_PI_4,
        ));
        assert!(rhombus_class_distance(phi(z1).z, phi(z2).z) < 1e-12);
        assert!(rhombus_class_distance(phi(z1).z, z1.z) < 1e-12);
    }

    #[test]
    fn phi_is_the_identity_on_the_open_rhombus() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let a = rng.gen_range(-0.49..0.49);
            let b = rng.gen_range(-0.49..0.49);
            // interior point from rhombus coordinates
            let z = COVER_SHIFT * a + Complex64::new(0.5, 0.5) * b;
            assert!((phi(TorusPoint::new(z)).z - z).norm() < 1e-12);
        }
    }

    #[test]
    fn phi_is_idempotent() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let z = pt(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
            let once = phi(z);
            let twice = phi(once);
            assert!((once.z - twice.z).norm() < 1e-12);
        }
    }

    #[test]
    fn fiber_of_origin_is_zero_and_the_half_diagonal() {
        let f = fiber(pt(0.0, 0.0));
        assert!(f[0].z.norm() < 1e-15);
        assert!(square_class_distance(f[1].z, COVER_SHIFT) < 1e-15);
    }

    #[test]
    fn fiber_cardinality_is_two_everywhere() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let z = phi(pt(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)));
            let quick = fiber(z);
            assert!(square_class_distance(quick[0].z, quick[1].z) > 1e-9);
            for p in quick {
                assert!(rhombus_class_distance(phi(p).z, z.z) < 1e-12);
            }
            let exhaustive = fiber_by_enumeration(z);
            assert_eq!(exhaustive.len(), 2);
        }
    }

    #[test]
    fn generic_fiber_has_one_point_inside_the_rhombus() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        for _ in 0..100 {
            let z = phi(pt(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)));
            let inside = fiber(z)
                .iter()
                .filter(|p| {
                    let (a, b) = rhombus_coords(p.z);
                    a.abs() < 0.5 - 1e-9 && b.abs() < 0.5 - 1e-9
                })
                .count();
            assert_eq!(inside, 1);
        }
    }

    #[test]
    fn eight_cover_fiber() {
        let f = fiber3(pt(0.0, 0.0), pt(0.0, 0.0), pt(0.0, 0.0));
        assert_eq!(f.len(), 8);
        for (a, b, c) in &f {
            for p in [a, b, c] {
                let to_zero = square_class_distance(p.z, Complex64::default());
                let to_shift = square_class_distance(p.z, COVER_SHIFT);
                assert!(to_zero < 1e-15 || to_shift < 1e-15);
            }
        }
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let (z, w, x) = (
                phi(pt(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5))),
                phi(pt(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5))),
                phi(pt(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5))),
            );
            let triple = fiber3(z, w, x);
            assert_eq!(triple.len(), 8);
            for (i, t1) in triple.iter().enumerate() {
                for t2 in &triple[i + 1..] {
                    let dist = square_class_distance(t1.0.z, t2.0.z)
                        + square_class_distance(t1.1.z, t2.1.z)
                        + square_class_distance(t1.2.z, t2.2.z);
                    assert!(dist > 1e-9, "fiber points collide");
                }
            }
        }
    }

    #[test]
    fn projection_degenerates_on_real_triples() {
        let (u, v) = pi(pt(0.3, 0.0), pt(0.3, 0.0), pt(0.3, 0.0));
        assert_eq!(u, Complex64::new(0.3, 0.0));
        assert_eq!(v, Complex64::default());
    }

    #[test]
    fn composite_cover_is_well_defined() {
        let dev = phi2_well_defined_check(300, 8);
        assert!(dev <= 1e-12, "deviation {dev:.3e}");
    }

    #[test]
    fn sheets_carry_the_same_dispersion_magnitude() {
        let spec = SchemeSpec::new(crate::schemes::SchemeKind::FlavoredQW1D, 0.5, 0.1).unwrap();
        let dev = det_sheet_consistency(&spec, 500, 9).unwrap();
        assert!(dev <= 1e-10, "deviation {dev:.3e}");

        // fiber over the origin: both points carry the rest gap
        let expr = closed_form_det(&spec.unflavored());
        let [p1, p2] = fiber(pt(0.0, 0.0));
        let (e1, m1) = p1.to_energy_momentum(0.1);
        let (e2, m2) = p2.to_energy_momentum(0.1);
        let gap = 2.0 * (1.0 - 0.05f64.cos());
        assert!((expr.det(e1, &[m1]).norm() - gap).abs() < 1e-12);
        assert!((expr.det(e2, &[m2]).norm() - gap).abs() < 1e-12);

        // massless: both fiber points ride the on-shell line together
        let massless = SchemeSpec::new(crate::schemes::SchemeKind::FlavoredQW1D, 0.0, 0.1).unwrap();
        let expr0 = closed_form_det(&massless.unflavored());
        let on_shell = TorusPoint::new(Complex64::new(0.17, 0.17));
        for p in fiber(phi(on_shell)) {
            let (e, m) = p.to_energy_momentum(0.1);
            assert!(expr0.det(e, &[m]).norm() < 1e-12);
        }
    }

    #[test]
    fn covering_metadata() {
        assert_eq!(CoveringMap::phi_1d().multiplicity, 2);
        assert_eq!(CoveringMap::phi_3d().multiplicity, 8);
    }
}
