//! Direct-space evolution on finite periodic lattices, the staggered-form
//! checks, and continuum-limit convergence against the exact Dirac solution.

use num_complex::Complex64;

use crate::error::Error;
use crate::linalg::{cr, CMat, ONE};
use crate::schemes::{build_scheme, SchemeKind, SchemeSpec};
use crate::Result;

/// Complex amplitudes over a periodic spatial lattice times internal
/// (chirality/spinor) times flavor components.
#[derive(Debug, Clone)]
pub struct StateVector {
    pub kind: SchemeKind,
    pub sizes: Vec<usize>,
    pub time_index: i64,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn zeros(spec: &SchemeSpec, sizes: Vec<usize>, time_index: i64) -> Result<Self> {
        if sizes.len() != spec.kind.spatial_dim() {
            return Err(Error::ShapeMismatch(format!(
                "scheme needs {} spatial axes, got {}",
                spec.kind.spatial_dim(),
                sizes.len()
            )));
        }
        if spec.kind.is_flavored() && sizes.iter().any(|s| s % 2 != 0) {
            return Err(Error::ShapeMismatch(
                "flavored parity needs even lattice sizes".into(),
            ));
        }
        let n: usize = sizes.iter().product();
        Ok(Self {
            kind: spec.kind,
            sizes,
            time_index,
            amps: vec![Complex64::default(); n * spec.matrix_dim()],
        })
    }

    pub fn from_amplitudes(
        spec: &SchemeSpec,
        sizes: Vec<usize>,
        amps: Vec<Complex64>,
        time_index: i64,
    ) -> Result<Self> {
        let mut s = Self::zeros(spec, sizes, time_index)?;
        if amps.len() != s.amps.len() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} amplitudes, got {}",
                s.amps.len(),
                amps.len()
            )));
        }
        s.amps = amps;
        Ok(s)
    }

    pub fn component_dim(&self) -> usize {
        self.kind.internal_dim() * self.kind.flavor_dim()
    }

    pub fn site_count(&self) -> usize {
        self.sizes.iter().product()
    }

    pub fn amp(&self, site: usize, comp: usize) -> Complex64 {
        self.amps[site * self.component_dim() + comp]
    }

    pub fn amp_mut(&mut self, site: usize, comp: usize) -> &mut Complex64 {
        let d = self.component_dim();
        &mut self.amps[site * d + comp]
    }

    /// Component index from internal and flavor indices.
    pub fn comp(&self, internal: usize, flavor: usize) -> usize {
        internal * self.kind.flavor_dim() + flavor
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&mut self, factor: f64) {
        for a in &mut self.amps {
            *a *= cr(factor);
        }
    }

    pub fn site_coords(&self, mut flat: usize) -> Vec<i64> {
        let mut coords = vec![0i64; self.sizes.len()];
        for axis in (0..self.sizes.len()).rev() {
            coords[axis] = (flat % self.sizes[axis]) as i64;
            flat /= self.sizes[axis];
        }
        coords
    }

    fn flat_index(&self, coords: &[i64]) -> usize {
        let mut flat = 0usize;
        for (axis, &c) in coords.iter().enumerate() {
            let size = self.sizes[axis] as i64;
            flat = flat * self.sizes[axis] + c.rem_euclid(size) as usize;
        }
        flat
    }

    /// Max-norm distance to another state of identical shape.
    pub fn max_diff(&self, other: &StateVector) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Reusable one-step applier for the first-order schemes.
pub struct Stepper {
    pub spec: SchemeSpec,
    /// Time-0 taps premultiplied by the time-tap normalizer.
    taps: Vec<(Vec<i64>, CMat)>,
}

impl Stepper {
    pub fn new(spec: &SchemeSpec) -> Result<Self> {
        if !spec.kind.is_first_order() {
            return Err(Error::OrderTwoUnsupported);
        }
        let stencil = build_scheme(spec);
        let normalizer = stencil.time_tap_normalizer()?;
        let taps = stencil
            .taps
            .iter()
            .filter(|t| t.dt == 0)
            .map(|t| (t.offset.clone(), &normalizer * &t.matrix))
            .collect();
        Ok(Self { spec: *spec, taps })
    }

    /// One periodic-boundary time step.
    pub fn step(&self, state: &StateVector) -> Result<StateVector> {
        if state.kind != self.spec.kind {
            return Err(Error::ShapeMismatch(
                "state built for a different scheme".into(),
            ));
        }
        let dim = state.component_dim();
        let sites: Vec<usize> = (0..state.site_count()).collect();
        let rows = crate::exec::map_collect(&sites, |&site| {
            let coords = state.site_coords(site);
            let mut out = vec![Complex64::default(); dim];
            for (offset, matrix) in &self.taps {
                let mut src = coords.clone();
                for (c, o) in src.iter_mut().zip(offset) {
                    *c += o;
                }
                let src_flat = state.flat_index(&src);
                for row in 0..dim {
                    let mut acc = Complex64::default();
                    for col in 0..dim {
                        let m = matrix[(row, col)];
                        if m != Complex64::default() {
                            acc += m * state.amp(src_flat, col);
                        }
                    }
                    out[row] += acc;
                }
            }
            out
        });
        let mut amps = Vec::with_capacity(state.amps.len());
        for row in rows {
            amps.extend(row);
        }
        Ok(StateVector {
            kind: state.kind,
            sizes: state.sizes.clone(),
            time_index: state.time_index + 1,
            amps,
        })
    }

    pub fn step_n(&self, state: &StateVector, steps: usize) -> Result<StateVector> {
        let mut s = state.clone();
        for _ in 0..steps {
            s = self.step(&s)?;
        }
        Ok(s)
    }
}

/// One time step of a first-order scheme.
pub fn step(spec: &SchemeSpec, state: &StateVector) -> Result<StateVector> {
    Stepper::new(spec)?.step(state)
}

/// Squared-amplitude mass sitting on (site, flavor) pairs that violate the
/// staggered parity rule.
pub fn flavor_form_defect(state: &StateVector) -> Result<f64> {
    if !state.kind.is_flavored() {
        return Err(Error::NotFlavored);
    }
    let internal = state.kind.internal_dim();
    let flavor_dim = state.kind.flavor_dim();
    let n = state.time_index;
    let mut defect = 0.0;
    for site in 0..state.site_count() {
        let coords = state.site_coords(site);
        let allowed: usize = coords.iter().fold(0usize, |acc, &x| {
            (acc << 1) | ((n + x).rem_euclid(2) as usize)
        });
        for i in 0..internal {
            for f in 0..flavor_dim {
                if f != allowed {
                    defect += state.amp(site, i * flavor_dim + f).norm_sqr();
                }
            }
        }
    }
    Ok(defect)
}

/// Flavor index carried by a conforming state at `site` and time `n`.
pub fn conforming_flavor(kind: SchemeKind, time_index: i64, coords: &[i64]) -> usize {
    debug_assert!(kind.is_flavored());
    coords.iter().fold(0usize, |acc, &x| {
        (acc << 1) | ((time_index + x).rem_euclid(2) as usize)
    })
}

/// Advances the second-order symmetric scheme from two consistent slices:
/// `psi(n+1) = psi(n-1) - sigma_3 [psi(n,k+1) - psi(n,k-1)] - 2 i eps m sigma_1 psi(n)`.
pub fn naive_two_step_evolve(
    spec: &SchemeSpec,
    slice_prev: &StateVector,
    slice_curr: &StateVector,
    steps: usize,
) -> Result<StateVector> {
    if spec.kind != SchemeKind::NaiveSymmetric1D {
        return Err(Error::NotApplicable(
            "two-step update is the symmetric scheme's".into(),
        ));
    }
    if slice_prev.sizes != slice_curr.sizes {
        return Err(Error::ShapeMismatch("slices of different sizes".into()));
    }
    let n_sites = slice_curr.site_count();
    let m2eps = 2.0 * spec.mass * spec.epsilon;
    let mut prev = slice_prev.clone();
    let mut curr = slice_curr.clone();
    for _ in 0..steps {
        let mut next = curr.clone();
        next.time_index = curr.time_index + 1;
        for k in 0..n_sites {
            let kp = (k + 1) % n_sites;
            let km = (k + n_sites - 1) % n_sites;
            // sigma_3 diag(+1, -1); sigma_1 swaps components.
            let grad_plus = curr.amp(kp, 0) - curr.amp(km, 0);
            let grad_minus = curr.amp(kp, 1) - curr.amp(km, 1);
            *next.amp_mut(k, 0) =
                prev.amp(k, 0) - grad_plus - Complex64::new(0.0, m2eps) * curr.amp(k, 1);
            *next.amp_mut(k, 1) =
                prev.amp(k, 1) + grad_minus - Complex64::new(0.0, m2eps) * curr.amp(k, 0);
        }
        prev = curr;
        curr = next;
    }
    Ok(curr)
}

// ---------------------------------------------------------------------------
// Wave packets and the exact continuum propagator
// ---------------------------------------------------------------------------

/// Gaussian packet in physical units with a positive-energy polarization.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct WavePacket {
    pub center: f64,
    pub width: f64,
    pub momentum: f64,
}

impl WavePacket {
    /// Positive-energy eigenvector of `H(p) = p sigma_3 + m sigma_1`.
    pub fn polarization(&self, mass: f64) -> [Complex64; 2] {
        let p = self.momentum;
        let omega = (p * p + mass * mass).sqrt();
        if omega == 0.0 {
            return [ONE, Complex64::default()];
        }
        let v = [cr(p + omega), cr(mass)];
        let norm = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
        if norm < 1e-300 {
            // p = -omega, mass = 0: the lower component carries the mode.
            return [Complex64::default(), ONE];
        }
        [v[0] / cr(norm), v[1] / cr(norm)]
    }

    /// Two-component samples on a grid of `n` sites with spacing `h`,
    /// normalized to unit l2 norm.
    pub fn sample(&self, mass: f64, n: usize, h: f64) -> Vec<[Complex64; 2]> {
        let pol = self.polarization(mass);
        let mut data: Vec<[Complex64; 2]> = (0..n)
            .map(|k| {
                let x = k as f64 * h;
                let envelope = (-((x - self.center) * (x - self.center))
                    / (2.0 * self.width * self.width))
                    .exp();
                let carrier = Complex64::from_polar(envelope, self.momentum * x);
                [carrier * pol[0], carrier * pol[1]]
            })
            .collect();
        let norm: f64 = data
            .iter()
            .map(|v| v[0].norm_sqr() + v[1].norm_sqr())
            .sum::<f64>()
            .sqrt();
        for v in &mut data {
            v[0] /= cr(norm);
            v[1] /= cr(norm);
        }
        data
    }
}

/// Exact free-Dirac propagator in the representation
/// `i d_t psi = (p sigma_3 + m sigma_1) psi`, acting mode-wise on periodic
/// grid data.
#[derive(Debug, Clone, Copy)]
pub struct ContinuumOracle {
    pub mass: f64,
}

impl ContinuumOracle {
    /// Signed momentum of DFT mode `l` on `n` points with spacing `h`.
    fn mode_momentum(l: usize, n: usize, h: f64) -> f64 {
        let signed = if l <= n / 2 {
            l as i64
        } else {
            l as i64 - n as i64
        };
        2.0 * std::f64::consts::PI * signed as f64 / (n as f64 * h)
    }

    /// `exp(-i H(p) t)` applied to a spinor.
    pub fn mode_propagator(&self, p: f64, t: f64) -> [[Complex64; 2]; 2] {
        let omega = (p * p + self.mass * self.mass).sqrt();
        if omega == 0.0 {
            return [[ONE, Complex64::default()], [Complex64::default(), ONE]];
        }
        let (cos_t, sin_t) = ((omega * t).cos(), (omega * t).sin());
        let a = Complex64::new(cos_t, -sin_t * p / omega);
        let d = Complex64::new(cos_t, sin_t * p / omega);
        let b = Complex64::new(0.0, -sin_t * self.mass / omega);
        [[a, b], [b, d]]
    }

    /// Evolves grid samples for physical time `t` and evaluates the result at
    /// positions `x_offset + j h` (band-limited off-grid evaluation).
    pub fn evolve(
        &self,
        data: &[[Complex64; 2]],
        h: f64,
        t: f64,
        x_offset: f64,
    ) -> Vec<[Complex64; 2]> {
        let n = data.len();
        let modes: Vec<usize> = (0..n).collect();
        let spectrum: Vec<[Complex64; 2]> = crate::exec::map_collect(&modes, |&l| {
            let mut acc = [Complex64::default(); 2];
            for (k, v) in data.iter().enumerate() {
                let phase = Complex64::from_polar(
                    1.0,
                    -2.0 * std::f64::consts::PI * (l * k) as f64 / n as f64,
                );
                acc[0] += phase * v[0];
                acc[1] += phase * v[1];
            }
            let u = self.mode_propagator(Self::mode_momentum(l, n, h), t);
            [
                u[0][0] * acc[0] + u[0][1] * acc[1],
                u[1][0] * acc[0] + u[1][1] * acc[1],
            ]
        });
        let sites: Vec<usize> = (0..n).collect();
        crate::exec::map_collect(&sites, |&j| {
            let mut out = [Complex64::default(); 2];
            for (l, s) in spectrum.iter().enumerate() {
                let p = Self::mode_momentum(l, n, h);
                let x = x_offset + j as f64 * h;
                let phase = Complex64::from_polar(1.0 / n as f64, p * x);
                out[0] += phase * s[0];
                out[1] += phase * s[1];
            }
            out
        })
    }
}

/// Spectral mass of two-component grid data outside `|p| <= band`.
pub fn spectral_mass_outside(data: &[[Complex64; 2]], h: f64, band: f64) -> f64 {
    let n = data.len();
    let mut outside = 0.0;
    let mut total = 0.0;
    for l in 0..n {
        let p = ContinuumOracle::mode_momentum(l, n, h);
        let mut acc = [Complex64::default(); 2];
        for (k, v) in data.iter().enumerate() {
            let phase =
                Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * (l * k) as f64 / n as f64);
            acc[0] += phase * v[0];
            acc[1] += phase * v[1];
        }
        let mass = acc[0].norm_sqr() + acc[1].norm_sqr();
        total += mass;
        if p.abs() > band {
            outside += mass;
        }
    }
    outside / total
}

// ---------------------------------------------------------------------------
// Continuum convergence
// ---------------------------------------------------------------------------

/// Flavor-decoupling rotation applied to the gathered staggered pair
/// `[psi^0_+, psi^1_+, psi^0_-, psi^1_-]`: block-diagonal in chirality, the
/// flavor rotation `M = exp(-i pi/4 sigma_x)` on the `+` block and `M sigma_x`
/// on the `-` block. Each output flavor `(phi_i_right, phi_i_left)` then obeys
/// the same free Dirac equation in the continuum limit.
pub fn flavor_rotation() -> CMat {
    let s = cr(1.0 / 2.0f64.sqrt());
    let mi = Complex64::new(0.0, -1.0);
    let mut r = CMat::zeros(4, 4);
    // + block: M rows (1, -i), (-i, 1)
    r[(0, 0)] = s;
    r[(0, 1)] = s * mi;
    r[(1, 0)] = s * mi;
    r[(1, 1)] = s;
    // - block: M sigma_x rows (-i, 1), (1, -i)
    r[(2, 2)] = s * mi;
    r[(2, 3)] = s;
    r[(3, 2)] = s;
    r[(3, 3)] = s * mi;
    r
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    /// (epsilon, max-norm error at final time).
    pub errors: Vec<(f64, f64)>,
    pub fitted_order: f64,
}

/// Evolves a band-limited packet at each epsilon, compares with the exact
/// continuum solution of the same initial data, and fits the error order.
///
/// Physical time is matched as `steps = round(T / eps)` with the residual
/// mismatch absorbed into the oracle's evolution time.
pub fn continuum_convergence(
    kind: SchemeKind,
    mass: f64,
    packet: &WavePacket,
    time: f64,
    eps_sequence: &[f64],
) -> Result<ConvergenceReport> {
    let mut errors = Vec::with_capacity(eps_sequence.len());
    for &eps in eps_sequence {
        let spec = SchemeSpec::new(kind, mass, eps)?;
        let err = match kind {
            SchemeKind::DiracQW1D => walk_error(&spec, packet, time)?,
            SchemeKind::FlavoredQW1D => flavored_walk_error(&spec, packet, time)?,
            _ => {
                return Err(Error::NotApplicable(
                    "convergence harness covers the 1D walks".into(),
                ))
            }
        };
        errors.push((eps, err));
    }
    let pts: Vec<(f64, f64)> = errors
        .iter()
        .map(|&(e, r)| (e.ln(), r.max(1e-300).ln()))
        .collect();
    let fitted_order = crate::fourier::least_squares_slope(&pts);
    Ok(ConvergenceReport {
        errors,
        fitted_order,
    })
}

fn lattice_size_for(packet: &WavePacket, time: f64, eps: f64) -> usize {
    let span = 2.0 * time + 16.0 * packet.width + 2.0 * packet.center.abs();
    let mut n = (span / eps).ceil() as usize;
    if n % 2 == 1 {
        n += 1;
    }
    n
}

fn check_bandwidth(data: &[[Complex64; 2]], h: f64) -> Result<()> {
    let band = std::f64::consts::PI / (4.0 * h);
    let outside = spectral_mass_outside(data, h, band);
    if outside > 1e-6 {
        return Err(Error::BandwidthViolation {
            outside_mass: outside,
        });
    }
    Ok(())
}

fn walk_error(spec: &SchemeSpec, packet: &WavePacket, time: f64) -> Result<f64> {
    let eps = spec.epsilon;
    let n = lattice_size_for(packet, time, eps);
    let centered = WavePacket {
        center: n as f64 * eps / 2.0,
        ..*packet
    };
    let data = centered.sample(spec.mass, n, eps);
    check_bandwidth(&data, eps)?;

    let mut state = StateVector::zeros(spec, vec![n], 0)?;
    for (k, v) in data.iter().enumerate() {
        *state.amp_mut(k, 0) = v[0];
        *state.amp_mut(k, 1) = v[1];
    }
    let steps = (time / eps).round() as usize;
    let evolved = Stepper::new(spec)?.step_n(&state, steps)?;

    let oracle = ContinuumOracle { mass: spec.mass };
    let exact = oracle.evolve(&data, eps, steps as f64 * eps, 0.0);
    let mut err: f64 = 0.0;
    for k in 0..n {
        err = err
            .max((evolved.amp(k, 0) - exact[k][0]).norm())
            .max((evolved.amp(k, 1) - exact[k][1]).norm());
    }
    Ok(err)
}

/// Staggered-walk convergence through the rotated-pair comparison: flavor 0
/// carries the packet, flavor 1 starts empty, and both are compared against
/// the same continuum solution after the flavor rotation.
fn flavored_walk_error(spec: &SchemeSpec, packet: &WavePacket, time: f64) -> Result<f64> {
    let eps = spec.epsilon;
    let n = lattice_size_for(packet, time, eps); // even
    let half = n / 2;
    let centered = WavePacket {
        center: n as f64 * eps / 2.0,
        ..*packet
    };
    // Continuum data on the even-site subgrid, spacing 2 eps.
    let data0 = centered.sample(spec.mass, half, 2.0 * eps);
    check_bandwidth(&data0, 2.0 * eps)?;

    let rot = flavor_rotation();
    let rot_dag = crate::linalg::dagger(&rot);
    let mut state = StateVector::zeros(spec, vec![n], 0)?;
    for j in 0..half {
        // [phi0_right, phi1_right, phi0_left, phi1_left] at x = 2 j eps
        let d = [
            data0[j][0],
            Complex64::default(),
            data0[j][1],
            Complex64::default(),
        ];
        let mut pair = [Complex64::default(); 4]; // psi0_+, psi1_+, psi0_-, psi1_-
        for row in 0..4 {
            for col in 0..4 {
                pair[row] += rot_dag[(row, col)] * d[col];
            }
        }
        let k = 2 * j;
        let k1 = (k + 1) % n;
        // flavor 0 lives on even n+k sites at n = 0; flavor 1 next door
        *state.amp_mut(k, state.comp(0, 0)) = pair[0];
        *state.amp_mut(k1, state.comp(0, 1)) = pair[1];
        *state.amp_mut(k, state.comp(1, 0)) = pair[2];
        *state.amp_mut(k1, state.comp(1, 1)) = pair[3];
    }

    let steps = (time / eps).round() as usize;
    let evolved = Stepper::new(spec)?.step_n(&state, steps)?;
    let t_final = steps as f64 * eps;

    let oracle = ContinuumOracle { mass: spec.mass };
    let parity = (steps % 2) as f64;
    let exact0 = oracle.evolve(&data0, 2.0 * eps, t_final, parity * eps);
    // flavor 1 starts empty and must stay empty in the continuum
    let mut err: f64 = 0.0;
    for j in 0..half {
        let k = (2 * j + steps % 2) % n; // flavor-0 site at the final parity
        let k1 = (k + 1) % n;
        let pair = [
            evolved.amp(k, evolved.comp(0, 0)),
            evolved.amp(k1, evolved.comp(0, 1)),
            evolved.amp(k, evolved.comp(1, 0)),
            evolved.amp(k1, evolved.comp(1, 1)),
        ];
        let mut d = [Complex64::default(); 4];
        for row in 0..4 {
            for col in 0..4 {
                d[row] += rot[(row, col)] * pair[col];
            }
        }
        err = err
            .max((d[0] - exact0[j][0]).norm())
            .max((d[2] - exact0[j][1]).norm())
            .max(d[1].norm())
            .max(d[3].norm());
    }
    Ok(err)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn delta_state(spec: &SchemeSpec, n: usize, comp: usize) -> StateVector {
        let mut s = StateVector::zeros(spec, vec![n], 0).unwrap();
        *s.amp_mut(n / 2, comp) = ONE;
        s
    }

    #[test]
    fn massless_walk_is_exact_transport() {
        let spec = SchemeSpec::new(SchemeKind::DiracQW1D, 0.0, 0.1).unwrap();
        let stepper = Stepper::new(&spec).unwrap();
        let s0 = delta_state(&spec, 16, 0);
        let s5 = stepper.step_n(&s0, 5).unwrap();
        assert!((s5.amp(8 + 5, 0) - ONE).norm() < 1e-14);
        assert!((s5.norm() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn norm_preserved_per_step() {
        for kind in [SchemeKind::DiracQW1D, SchemeKind::FlavoredQW1D] {
            let spec = SchemeSpec::new(kind, 0.5, 0.1).unwrap();
            let stepper = Stepper::new(&spec).unwrap();
            let mut state = StateVector::zeros(&spec, vec![64], 0).unwrap();
            // deterministic pseudo-random fill
            let dim = state.component_dim();
            for site in 0..64 {
                for c in 0..dim {
                    let x = ((site * 31 + c * 17 + 7) % 101) as f64 / 101.0;
                    *state.amp_mut(site, c) = Complex64::new(x, 1.0 - x);
                }
            }
            let norm0 = state.norm();
            state.scale(1.0 / norm0);
            let mut prev = 1.0;
            for _ in 0..50 {
                state = stepper.step(&state).unwrap();
                let n = state.norm();
                assert!((n - prev).abs() <= 1e-12, "{kind:?} norm drift");
                prev = n;
            }
        }
    }

    #[test]
    fn causality_support_radius() {
        let spec3 = SchemeSpec::new(SchemeKind::DiracQW3D, 1.0, 0.05).unwrap();
        let stepper = Stepper::new(&spec3).unwrap();
        let mut s = StateVector::zeros(&spec3, vec![8, 8, 8], 0).unwrap();
        *s.amp_mut(s.flat_index(&[4, 4, 4]), 0) = ONE;
        let s1 = stepper.step(&s).unwrap();
        for site in 0..s1.site_count() {
            let coords = s1.site_coords(site);
            let r = coords.iter().map(|&c| (c - 4).abs()).max().unwrap();
            let mass: f64 = (0..4).map(|c| s1.amp(site, c).norm_sqr()).sum();
            if r > 1 {
                assert!(mass < 1e-28, "leak to radius {r}");
            }
        }
    }

    #[test]
    fn flavored_form_preserved_and_detects_corruption() {
        let spec = SchemeSpec::new(SchemeKind::FlavoredQW1D, 0.5, 0.1).unwrap();
        let stepper = Stepper::new(&spec).unwrap();
        let mut state = StateVector::zeros(&spec, vec![32], 0).unwrap();
        for k in 0..32usize {
            let flavor = conforming_flavor(spec.kind, 0, &[k as i64]);
            let x = (k as f64 / 32.0 - 0.5) * 3.0;
            let env = (-x * x).exp();
            *state.amp_mut(k, state.comp(0, flavor)) = cr(env);
            *state.amp_mut(k, state.comp(1, flavor)) = cr(0.3 * env);
        }
        let n0 = state.norm();
        state.scale(1.0 / n0);
        assert!(flavor_form_defect(&state).unwrap() <= 1e-12);
        let evolved = stepper.step_n(&state, 50).unwrap();
        assert!(flavor_form_defect(&evolved).unwrap() <= 1e-12);

        let mut corrupted = StateVector::zeros(&spec, vec![32], 0).unwrap();
        *corrupted.amp_mut(0, corrupted.comp(0, 1)) = ONE; // wrong parity at n=0,k=0
        assert!((flavor_form_defect(&corrupted).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn flavored_3d_form_preserved() {
        let spec = SchemeSpec::new(SchemeKind::FlavoredQW3D, 1.0, 0.1).unwrap();
        let stepper = Stepper::new(&spec).unwrap();
        let mut state = StateVector::zeros(&spec, vec![4, 4, 4], 0).unwrap();
        for site in 0..state.site_count() {
            let coords = state.site_coords(site);
            let flavor = conforming_flavor(spec.kind, 0, &coords);
            for internal in 0..4 {
                let x = ((site * 13 + internal * 5) % 17) as f64 / 17.0;
                *state.amp_mut(site, state.comp(internal, flavor)) = Complex64::new(x, -x * 0.5);
            }
        }
        let n0 = state.norm();
        state.scale(1.0 / n0);
        let evolved = stepper.step_n(&state, 20).unwrap();
        assert!(flavor_form_defect(&evolved).unwrap() <= 1e-12);
        assert!((evolved.norm() - 1.0).abs() < 1e-12);
    }

    /// Staggered stencil restricted to conforming states reproduces the plain
    /// walk amplitudes exactly.
    #[test]
    fn flavored_walk_restricts_to_plain_walk() {
        let flavored = SchemeSpec::new(SchemeKind::FlavoredQW1D, 0.5, 0.1).unwrap();
        let plain = flavored.unflavored();
        let n = 32usize;
        let mut base = StateVector::zeros(&plain, vec![n], 0).unwrap();
        let mut stag = StateVector::zeros(&flavored, vec![n], 0).unwrap();
        for k in 0..n {
            let x = (k as f64 / n as f64 - 0.5) * 4.0;
            let v = [
                Complex64::new((-x * x).exp(), 0.1 * x),
                cr(0.4 * (-x * x).exp()),
            ];
            *base.amp_mut(k, 0) = v[0];
            *base.amp_mut(k, 1) = v[1];
            let f = conforming_flavor(flavored.kind, 0, &[k as i64]);
            *stag.amp_mut(k, stag.comp(0, f)) = v[0];
            *stag.amp_mut(k, stag.comp(1, f)) = v[1];
        }
        let base_out = Stepper::new(&plain).unwrap().step_n(&base, 7).unwrap();
        let stag_out = Stepper::new(&flavored).unwrap().step_n(&stag, 7).unwrap();
        for k in 0..n {
            let f = conforming_flavor(flavored.kind, 7, &[k as i64]);
            for i in 0..2 {
                let d = (base_out.amp(k, i) - stag_out.amp(k, stag_out.comp(i, f))).norm();
                assert!(d < 1e-13);
            }
        }
    }

    #[test]
    fn naive_plane_wave_advances_with_its_dispersion() {
        let eps = 0.2;
        let spec = SchemeSpec::new(SchemeKind::NaiveSymmetric1D, 0.0, eps).unwrap();
        let n = 16usize;
        let p = 2.0 * std::f64::consts::PI * 2.0 / (n as f64 * eps);
        // massless branch sin(E eps) = sin(p eps) for the sigma_3 = +1 component
        let e = p;
        let mk = |time_phase: f64| {
            let mut s = StateVector::zeros(&spec, vec![n], 0).unwrap();
            for k in 0..n {
                *s.amp_mut(k, 0) = Complex64::from_polar(1.0, p * k as f64 * eps - time_phase);
            }
            s
        };
        let s0 = mk(0.0);
        let s1 = mk(e * eps);
        let s2 = naive_two_step_evolve(&spec, &s0, &s1, 1).unwrap();
        let want = mk(2.0 * e * eps);
        assert!(s2.max_diff(&want) < 1e-12);
        // zero state stays zero
        let z0 = StateVector::zeros(&spec, vec![n], 0).unwrap();
        let z = naive_two_step_evolve(&spec, &z0, &z0, 4).unwrap();
        assert!(z.norm() < 1e-15);
    }

    /// A mode near the zone edge propagates like its low-frequency mirror.
    #[test]
    fn naive_high_frequency_mode_is_a_doubler() {
        let eps = 0.2;
        let spec = SchemeSpec::new(SchemeKind::NaiveSymmetric1D, 0.0, eps).unwrap();
        let n = 16usize;
        let p_low = 2.0 * std::f64::consts::PI / (n as f64 * eps);
        let p_high = std::f64::consts::PI / eps - p_low; // pi/eps - p
                                                         // sin(p_high eps) = sin(p_low eps): same dispersion branch
        let e = (p_low * eps).sin().asin() / eps;
        for p in [p_low, p_high] {
            let mk = |phase: f64| {
                let mut s = StateVector::zeros(&spec, vec![n], 0).unwrap();
                for k in 0..n {
                    *s.amp_mut(k, 0) = Complex64::from_polar(1.0, p * k as f64 * eps - phase);
                }
                s
            };
            let s2 = naive_two_step_evolve(&spec, &mk(0.0), &mk(e * eps), 1).unwrap();
            assert!(s2.max_diff(&mk(2.0 * e * eps)) < 1e-12, "p = {p}");
        }
    }

    #[test]
    fn walk_converges_to_continuum() {
        let packet = WavePacket {
            center: 0.0,
            width: 1.0,
            momentum: 0.5,
        };
        let report = continuum_convergence(
            SchemeKind::DiracQW1D,
            0.5,
            &packet,
            2.0,
            &[0.1, 0.05, 0.025],
        )
        .unwrap();
        assert!(report.fitted_order >= 0.9, "order {}", report.fitted_order);
        assert!(report.errors.windows(2).all(|w| w[1].1 < w[0].1));
    }

    #[test]
    fn flavored_walk_converges_after_rotation() {
        let packet = WavePacket {
            center: 0.0,
            width: 1.0,
            momentum: 0.5,
        };
        let report = continuum_convergence(
            SchemeKind::FlavoredQW1D,
            0.5,
            &packet,
            2.0,
            &[0.1, 0.05, 0.025],
        )
        .unwrap();
        assert!(report.fitted_order >= 0.9, "order {}", report.fitted_order);
    }

    #[test]
    fn massless_walk_matches_continuum_exactly() {
        let spec = SchemeSpec::new(SchemeKind::DiracQW1D, 0.0, 0.1).unwrap();
        let packet = WavePacket {
            center: 0.0,
            width: 0.8,
            momentum: 1.0,
        };
        let err = walk_error(&spec, &packet, 1.0).unwrap();
        assert!(err < 1e-10, "massless transport error {err}");
    }

    #[test]
    fn bandwidth_violation_detected() {
        let spec = SchemeSpec::new(SchemeKind::DiracQW1D, 0.5, 0.1).unwrap();
        let packet = WavePacket {
            center: 0.0,
            width: 0.05,
            momentum: 25.0,
        };
        match walk_error(&spec, &packet, 0.5) {
            Err(Error::BandwidthViolation { outside_mass }) => assert!(outside_mass > 1e-6),
            other => panic!("expected bandwidth violation, got {other:?}"),
        }
    }

    #[test]
    fn step_rejects_mismatched_schemes() {
        let spec = SchemeSpec::new(SchemeKind::DiracQW1D, 0.5, 0.1).unwrap();
        let other = SchemeSpec::new(SchemeKind::FlavoredQW1D, 0.5, 0.1).unwrap();
        let state = StateVector::zeros(&other, vec![8], 0).unwrap();
        assert!(matches!(step(&spec, &state), Err(Error::ShapeMismatch(_))));
        let naive = SchemeSpec::new(SchemeKind::NaiveSymmetric1D, 0.5, 0.1).unwrap();
        assert!(matches!(
            Stepper::new(&naive),
            Err(Error::OrderTwoUnsupported)
        ));
    }
}
