//! Chiral projectors, commutator diagnostics for every scheme, and the
//! gauged sector-stability run for the massless staggered walk.

use num_complex::Complex64;

use crate::evolve::{StateVector, Stepper};
use crate::fourier::{sample_zone, symbol_of};
use crate::linalg::{commutator, cr, identity, kron, max_norm, sigma_z, CMat};
use crate::schemes::{SchemeKind, SchemeSpec};
use crate::{Error, Result};

/// Right- and left-handed projectors sized to a scheme's full internal space
/// (chirality/spinor times flavor; they act as the identity on flavor).
#[derive(Debug, Clone)]
pub struct ChiralProjectors {
    pub right: CMat,
    pub left: CMat,
}

/// Projectors of the scheme's representation, `(I +/- gamma5)/2` tensored
/// with the flavor identity.
pub fn chiral_projectors(kind: SchemeKind) -> ChiralProjectors {
    let gamma5 = match kind.internal_dim() {
        2 => sigma_z(),
        4 => kron(&sigma_z(), &identity(2)),
        _ => unreachable!(),
    };
    let dim = kind.internal_dim();
    let right = (identity(dim) + &gamma5) * cr(0.5);
    let left = (identity(dim) - &gamma5) * cr(0.5);
    let flavor = identity(kind.flavor_dim());
    ChiralProjectors {
        right: kron(&right, &flavor),
        left: kron(&left, &flavor),
    }
}

impl ChiralProjectors {
    /// Max deviation from the projector algebra `P^2 = P`, `P_R + P_L = I`,
    /// `P_R P_L = 0`.
    pub fn algebra_defect(&self) -> f64 {
        let n = self.right.nrows();
        let idempotent_r = max_norm(&(&self.right * &self.right - &self.right));
        let idempotent_l = max_norm(&(&self.left * &self.left - &self.left));
        let complete = max_norm(&(&self.right + &self.left - identity(n)));
        let orthogonal = max_norm(&(&self.right * &self.left));
        idempotent_r.max(idempotent_l).max(complete).max(orthogonal)
    }
}

/// Max commutator norm of the symbol with both projectors over seeded zone
/// samples. Vanishes for massless schemes; grows like `sin(m eps)` with mass.
pub fn chiral_commutator(spec: &SchemeSpec, samples: usize, seed: u64) -> f64 {
    let projectors = chiral_projectors(spec.kind);
    let symbol = symbol_of(spec);
    let pts = sample_zone(spec, samples, seed);
    crate::exec::map_max(&pts, |q| {
        let m = symbol.eval(q[0], &q[1..]);
        max_norm(&commutator(&m, &projectors.right))
            .max(max_norm(&commutator(&m, &projectors.left)))
    })
}

/// Least-squares slope of `log ||[M, P]||` against `log(m eps)` over the
/// given mass-angle values, holding the sample set fixed.
pub fn commutator_mass_power_fit(
    kind: SchemeKind,
    mass_angles: &[f64],
    epsilon: f64,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let mut pts = Vec::with_capacity(mass_angles.len());
    for &me in mass_angles {
        let spec = SchemeSpec::new(kind, me / epsilon, epsilon)?;
        let norm = chiral_commutator(&spec, samples, seed);
        pts.push((me.ln(), norm.max(1e-300).ln()));
    }
    Ok(crate::fourier::least_squares_slope(&pts))
}

/// Deterministic per-site gauge phases for each chirality.
#[derive(Debug, Clone, Copy)]
pub enum ThetaField {
    Zero,
    /// Hash-seeded uniform phases in `[0, 2 pi)`.
    Random {
        seed: u64,
    },
}

impl ThetaField {
    pub fn theta(&self, chirality: usize, n: i64, k: i64) -> f64 {
        match self {
            ThetaField::Zero => 0.0,
            ThetaField::Random { seed } => {
                let mut h = seed
                    ^ (chirality as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)
                    ^ (n as u64).wrapping_mul(0xbf58_476d_1ce4_e5b9)
                    ^ (k as u64).wrapping_mul(0x94d0_49bb_1331_11eb);
                // splitmix64 finalizer
                h = h.wrapping_add(0x9e37_79b9_7f4a_7c15);
                h = (h ^ (h >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
                h = (h ^ (h >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
                h ^= h >> 31;
                (h as f64 / u64::MAX as f64) * 2.0 * std::f64::consts::PI
            }
        }
    }
}

/// Local chirality phases with their coupling constants, applied as a
/// diagonal unitary after each free step.
#[derive(Debug, Clone, Copy)]
pub struct GaugePhaseField {
    pub g_left: f64,
    pub g_right: f64,
    pub theta_left: ThetaField,
    pub theta_right: ThetaField,
}

impl GaugePhaseField {
    pub fn neutrino_like(seed: u64) -> Self {
        Self {
            g_left: -1.0,
            g_right: 0.0,
            theta_left: ThetaField::Random { seed },
            theta_right: ThetaField::Random {
                seed: seed.wrapping_add(1),
            },
        }
    }
}

/// Result of the gauged massless run: leakage out of the left-handed
/// flavor-0 sector and the conserved right-handed mass.
#[derive(Debug, Clone)]
pub struct SectorRun {
    pub leakage: f64,
    pub right_mass: f64,
    pub per_step_leakage: Vec<f64>,
}

fn sector_masses(state: &StateVector) -> (f64, f64) {
    // (mass outside the left-handed flavor-0 sector, right-handed mass)
    let flavor_dim = state.kind.flavor_dim();
    let mut outside = 0.0;
    let mut right = 0.0;
    for site in 0..state.site_count() {
        for internal in 0..state.kind.internal_dim() {
            for f in 0..flavor_dim {
                let mass = state.amp(site, internal * flavor_dim + f).norm_sqr();
                if internal == 0 {
                    right += mass;
                }
                if !(internal == 1 && f == 0) {
                    outside += mass;
                }
            }
        }
    }
    (outside, right)
}

/// Evolves a massless staggered-walk state under per-site chirality phases
/// and reports the amplitude that leaks out of the left-handed flavor-0
/// sector. The right-handed coupling must vanish.
pub fn neutrino_sector_run(
    spec: &SchemeSpec,
    phases: &GaugePhaseField,
    initial: &StateVector,
    steps: usize,
) -> Result<SectorRun> {
    if spec.kind != SchemeKind::FlavoredQW1D {
        return Err(Error::NotApplicable(
            "sector run is for the 1D staggered walk".into(),
        ));
    }
    if spec.mass != 0.0 {
        return Err(Error::MassNotZero);
    }
    if phases.g_right != 0.0 {
        return Err(Error::InvalidSpec(
            "right-handed coupling must be zero".into(),
        ));
    }
    let stepper = Stepper::new(spec)?;
    let flavor_dim = spec.kind.flavor_dim();
    let mut state = initial.clone();
    let mut per_step = Vec::with_capacity(steps);
    for _ in 0..steps {
        state = stepper.step(&state)?;
        let n = state.time_index;
        for k in 0..state.site_count() {
            let tl = phases.theta_left.theta(1, n, k as i64);
            let tr = phases.theta_right.theta(0, n, k as i64);
            let phase_l = Complex64::from_polar(1.0, phases.g_left * tl);
            let phase_r = Complex64::from_polar(1.0, phases.g_right * tr);
            for f in 0..flavor_dim {
                *state.amp_mut(k, f) *= phase_r; // internal 0 = right
                *state.amp_mut(k, flavor_dim + f) *= phase_l; // internal 1 = left
            }
        }
        per_step.push(sector_masses(&state).0);
    }
    let (leakage, right_mass) = sector_masses(&state);
    Ok(SectorRun {
        leakage,
        right_mass,
        per_step_leakage: per_step,
    })
}

/// A left-handed flavor-0 packet in the staggered parity form.
pub fn left_red_initial(spec: &SchemeSpec, n_sites: usize) -> Result<StateVector> {
    let mut state = StateVector::zeros(spec, vec![n_sites], 0)?;
    for k in 0..n_sites {
        if crate::evolve::conforming_flavor(spec.kind, 0, &[k as i64]) == 0 {
            let x = (k as f64 / n_sites as f64 - 0.5) * 6.0;
            *state.amp_mut(k, state.comp(1, 0)) = cr((-x * x).exp());
        }
    }
    let n = state.norm();
    state.scale(1.0 / n);
    Ok(state)
}
