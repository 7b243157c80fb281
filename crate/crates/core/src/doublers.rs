//! Detection and classification of spurious zone copies: half-period shift
//! scans of |det|, the exact-symmetry phase table, and the flavored schemes'
//! no-doubling gap on the reduced zone.

use num_complex::Complex64;
use serde::Serialize;

use crate::fourier::{sample_zone, symbol_of, FourierSymbol};
use crate::lattice::{bragg_bz, ratio_to_f64, DirectLattice};
use crate::schemes::{SchemeKind, SchemeSpec};
use crate::{Error, Result};

/// How a half-period shift touches the axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ShiftKind {
    Temporal,
    Spatial,
    Spatiotemporal,
}

/// A nonzero shift in `{0, pi/eps}^d`, component order energy then momenta.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShiftClass {
    pub axes: Vec<bool>,
}

impl ShiftClass {
    pub fn classification(&self) -> ShiftKind {
        let time = self.axes[0];
        let space = self.axes[1..].iter().any(|&b| b);
        match (time, space) {
            (true, false) => ShiftKind::Temporal,
            (false, true) => ShiftKind::Spatial,
            (true, true) => ShiftKind::Spatiotemporal,
            (false, false) => unreachable!("zero shift excluded"),
        }
    }

    pub fn as_ints(&self) -> Vec<u8> {
        self.axes.iter().map(|&b| b as u8).collect()
    }

    fn apply(&self, point: &[f64], half_period: f64) -> Vec<f64> {
        point
            .iter()
            .zip(&self.axes)
            .map(|(&x, &on)| if on { x + half_period } else { x })
            .collect()
    }
}

fn all_shifts(dim: usize) -> Vec<ShiftClass> {
    (1..(1usize << dim))
        .map(|mask| ShiftClass {
            axes: (0..dim).map(|a| mask >> a & 1 == 1).collect(),
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct InvariantClass {
    pub shift: Vec<u8>,
    pub class: ShiftKind,
    pub max_deviation: f64,
}

/// Scan result over all `2^d - 1` candidate shifts.
#[derive(Debug, Clone)]
pub struct DoublerReport {
    pub spec: SchemeSpec,
    pub invariant_classes: Vec<(ShiftClass, f64)>,
    pub candidate_count: usize,
    pub tolerance: f64,
    pub seed: u64,
}

impl DoublerReport {
    pub fn count(&self) -> usize {
        self.invariant_classes.len()
    }

    pub fn classifications(&self) -> Vec<ShiftKind> {
        self.invariant_classes
            .iter()
            .map(|(s, _)| s.classification())
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "scheme": self.spec,
            "seed": self.seed,
            "tolerance": self.tolerance,
            "candidate_count": self.candidate_count,
            "invariant_classes": self.invariant_classes.iter().map(|(s, dev)| {
                serde_json::to_value(InvariantClass {
                    shift: s.as_ints(),
                    class: s.classification(),
                    max_deviation: *dev,
                }).expect("serializable")
            }).collect::<Vec<_>>(),
        })
    }
}

/// Declares a shift invariant iff `||det(q+s)| - |det(q)||` stays below
/// `tol * (1 + |det(q)|)` over seeded random zone points.
pub fn scan_doublers(spec: &SchemeSpec, samples: usize, tol: f64, seed: u64) -> DoublerReport {
    assert!(samples >= 100, "need at least 100 samples");
    let symbol = symbol_of(spec);
    let points = sample_zone(spec, samples, seed);
    let dets: Vec<f64> = crate::exec::map_collect(&points, |q| symbol.det(q[0], &q[1..]).norm());
    let half = std::f64::consts::PI / spec.epsilon;
    let candidates = all_shifts(spec.kind.spacetime_dim());
    let mut invariant = Vec::new();
    for shift in &candidates {
        let devs = crate::exec::map_collect(&points, |q| {
            let shifted = shift.apply(q, half);
            symbol.det(shifted[0], &shifted[1..]).norm()
        });
        let rel = devs
            .iter()
            .zip(&dets)
            .map(|(s, d)| (s - d).abs() / (1.0 + d))
            .fold(0.0, f64::max);
        if rel <= tol {
            invariant.push((shift.clone(), rel));
        }
    }
    DoublerReport {
        spec: *spec,
        invariant_classes: invariant,
        candidate_count: candidates.len(),
        tolerance: tol,
        seed,
    }
}

/// One row of the exact-symmetry table: the constant phase `det(q+s)/det(q)`
/// fits over samples, with the residual of the fit.
#[derive(Debug, Clone)]
pub struct ShiftIdentity {
    pub shift: ShiftClass,
    pub phase: Complex64,
    pub residual: f64,
}

/// Fits the determinant ratio under each invariant shift to a constant phase.
pub fn symmetry_identities(spec: &SchemeSpec, samples: usize, seed: u64) -> Vec<ShiftIdentity> {
    assert!(samples >= 100, "need at least 100 samples");
    let report = scan_doublers(spec, samples, 1e-9, seed);
    let symbol = symbol_of(spec);
    let points = sample_zone(spec, samples, seed.wrapping_add(1));
    let half = std::f64::consts::PI / spec.epsilon;
    report
        .invariant_classes
        .iter()
        .map(|(shift, _)| {
            let ratios: Vec<Complex64> = points
                .iter()
                .filter_map(|q| {
                    let d = symbol.det(q[0], &q[1..]);
                    if d.norm() < 1e-6 {
                        return None; // stay clear of on-shell zeros
                    }
                    let sq = shift.apply(q, half);
                    Some(symbol.det(sq[0], &sq[1..]) / d)
                })
                .collect();
            let sum: Complex64 = ratios.iter().sum();
            let phase = sum / crate::linalg::cr(sum.norm().max(1e-300));
            let residual = ratios
                .iter()
                .map(|r| (r - phase).norm())
                .fold(0.0, f64::max);
            ShiftIdentity {
                shift: shift.clone(),
                phase,
                residual,
            }
        })
        .collect()
}

/// Minimum |det| of a scheme over a seeded sample of a ball in the zone.
/// The center itself is always included in the grid.
pub fn disk_min(spec: &SchemeSpec, center: &[f64], radius: f64, grid: usize, seed: u64) -> f64 {
    use rand::Rng;
    use rand::SeedableRng;
    let symbol: FourierSymbol = symbol_of(spec);
    let dim = spec.kind.spacetime_dim();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut points: Vec<Vec<f64>> = vec![center.to_vec()];
    while points.len() < grid {
        // uniform direction, radius by the d-th root for uniform ball mass
        let dir: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0f64)).collect();
        let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-9 {
            continue;
        }
        let r = radius * rng.gen_range(0.0..1.0f64).powf(1.0 / dim as f64);
        points.push(
            center
                .iter()
                .zip(&dir)
                .map(|(c, d)| c + r * d / norm)
                .collect(),
        );
    }
    crate::exec::map_collect(&points, |q| symbol.det(q[0], &q[1..]).norm())
        .into_iter()
        .fold(f64::INFINITY, f64::min)
}

/// Vertices of the reduced (flavored) zone in physical coordinates, energy
/// axis first.
pub fn reduced_zone_vertices(spec: &SchemeSpec) -> Result<Vec<Vec<f64>>> {
    let half = std::f64::consts::PI / spec.epsilon;
    match spec.kind {
        SchemeKind::FlavoredQW1D => Ok(vec![
            vec![half, 0.0],
            vec![-half, 0.0],
            vec![0.0, half],
            vec![0.0, -half],
        ]),
        SchemeKind::FlavoredQW3D => {
            let rec = DirectLattice::oblique_4d(spec.epsilon).reciprocal()?;
            let bz = bragg_bz(&rec, 2)?;
            let scale = 2.0 * std::f64::consts::PI / spec.epsilon;
            Ok(bz
                .vertices()
                .into_iter()
                .map(|v| v.into_iter().map(|r| scale * ratio_to_f64(r)).collect())
                .collect())
        }
        _ => Err(Error::NotFlavored),
    }
}

#[derive(Debug, Clone)]
pub struct CornerGapReport {
    /// Minimum |det| over all vertex disks.
    pub vertex_min: f64,
    /// Minimum |det| over the same-size disk at the origin (rest-gap
    /// baseline; the on-shell set enters this disk).
    pub origin_min: f64,
    /// The rest gap |det(0)| of the flavored scheme.
    pub rest_gap: f64,
}

/// Evaluates |det| on disks around the reduced-zone vertices and at the
/// origin. The flavored determinant must stay gapped at the vertices for
/// massive schemes; massless schemes have on-shell lines through the zone
/// and the test does not apply.
pub fn rhombus_corner_gap(
    spec: &SchemeSpec,
    disk_radius: f64,
    grid: usize,
    seed: u64,
) -> Result<CornerGapReport> {
    if !spec.kind.is_flavored() {
        return Err(Error::NotFlavored);
    }
    if spec.mass == 0.0 {
        return Err(Error::NotApplicable(
            "massless on-shell lines cross the reduced zone".into(),
        ));
    }
    let vertices = reduced_zone_vertices(spec)?;
    let vertex_min = vertices
        .iter()
        .enumerate()
        .map(|(i, v)| disk_min(spec, v, disk_radius, grid, seed.wrapping_add(i as u64)))
        .fold(f64::INFINITY, f64::min);
    let origin = vec![0.0; spec.kind.spacetime_dim()];
    let origin_min = disk_min(spec, &origin, disk_radius, grid, seed.wrapping_add(101));
    let rest_gap = symbol_of(spec).det(0.0, &origin[1..]).norm();
    Ok(CornerGapReport {
        vertex_min,
        origin_min,
        rest_gap,
    })
}
