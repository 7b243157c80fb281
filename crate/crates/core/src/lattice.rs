//! Direct and reciprocal lattices, Bragg-equation Brillouin zones, and the
//! staggered sublattice flavor partitions.
//!
//! Site coordinates are integers; the spacing `epsilon` enters only when
//! converting to physical units, so partition and duality tests stay exact.
//! Reciprocal vectors are stored as rationals in units of `2*pi/epsilon`,
//! which makes every basis in this crate exactly representable.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use num_rational::Ratio;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub type Rational = Ratio<i64>;

pub fn rat(n: i64, d: i64) -> Rational {
    Ratio::new(n, d)
}

/// Exact rational value of an `f64` (always possible for finite doubles with
/// a small enough exponent; lattice inputs are integers and halves).
pub fn rational_from_f64(x: f64) -> Result<Rational> {
    if !x.is_finite() {
        return Err(Error::ShapeMismatch(format!(
            "non-finite lattice coordinate {x}"
        )));
    }
    let mut den: i64 = 1;
    let mut y = x;
    for _ in 0..60 {
        if y.fract() == 0.0 && y.abs() < 9e15 {
            return Ok(rat(y as i64, den));
        }
        y *= 2.0;
        den = den.checked_mul(2).ok_or(Error::ShapeMismatch(format!(
            "lattice coordinate {x} is not exactly representable"
        )))?;
    }
    Err(Error::ShapeMismatch(format!(
        "lattice coordinate {x} is not exactly representable"
    )))
}

fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Gaussian-elimination inverse of a square rational matrix (rows).
fn rat_inverse(m: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m.to_vec();
    let mut inv: Vec<Vec<Rational>> = (0..n)
        .map(|i| (0..n).map(|j| rat((i == j) as i64, 1)).collect())
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col];
        for j in 0..n {
            a[col][j] /= p;
            inv[col][j] /= p;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col];
                for j in 0..n {
                    let (ac, ic) = (a[col][j], inv[col][j]);
                    a[r][j] -= f * ac;
                    inv[r][j] -= f * ic;
                }
            }
        }
    }
    Some(inv)
}

fn rat_rank(rows: &[Vec<i64>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let n = rows[0].len();
    let mut a: Vec<Vec<Rational>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| rat(x, 1)).collect())
        .collect();
    let mut rank = 0;
    for col in 0..n {
        if let Some(p) = (rank..a.len()).find(|&r| !a[r][col].is_zero()) {
            a.swap(rank, p);
            let piv = a[rank][col];
            for r in 0..a.len() {
                if r != rank && !a[r][col].is_zero() {
                    let f = a[r][col] / piv;
                    for j in 0..n {
                        let v = a[rank][j];
                        a[r][j] -= f * v;
                    }
                }
            }
            rank += 1;
        }
    }
    rank
}

/// Solves `A q = b` for square rational `A` (rows); `None` when singular.
fn rat_solve(a_rows: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let inv = rat_inverse(a_rows)?;
    Some((0..b.len()).map(|i| dot(&inv[i], b)).collect())
}

// ---------------------------------------------------------------------------
// Direct lattice
// ---------------------------------------------------------------------------

/// A direct spacetime lattice: basis vectors with rational components in
/// units of the spacing `epsilon`.
#[derive(Debug, Clone)]
pub struct DirectLattice {
    pub dim: usize,
    pub basis: Vec<Vec<Rational>>,
    pub epsilon: f64,
}

impl DirectLattice {
    pub fn new(basis: Vec<Vec<Rational>>, epsilon: f64) -> Result<Self> {
        let dim = basis.len();
        if dim == 0 || basis.iter().any(|v| v.len() != dim) {
            return Err(Error::ShapeMismatch("basis must be square".into()));
        }
        if !(epsilon > 0.0) {
            return Err(Error::InvalidSpec("epsilon must be positive".into()));
        }
        if rat_inverse(&basis).is_none() {
            return Err(Error::DegenerateBasis);
        }
        Ok(Self {
            dim,
            basis,
            epsilon,
        })
    }

    pub fn square(dim: usize, epsilon: f64) -> Self {
        let basis = (0..dim)
            .map(|i| (0..dim).map(|j| rat((i == j) as i64, 1)).collect())
            .collect();
        Self {
            dim,
            basis,
            epsilon,
        }
    }

    /// 2D oblique (checkerboard) lattice: eps*(y-x), eps*(x+y) in x,y coords.
    pub fn oblique_2d(epsilon: f64) -> Self {
        let basis = vec![vec![rat(-1, 1), rat(1, 1)], vec![rat(1, 1), rat(1, 1)]];
        Self {
            dim: 2,
            basis,
            epsilon,
        }
    }

    /// The 2D oblique lattice embedded in 3D with a third axis eps*z.
    pub fn oblique_2d_embedded(epsilon: f64) -> Self {
        let basis = vec![
            vec![rat(-1, 1), rat(1, 1), rat(0, 1)],
            vec![rat(1, 1), rat(1, 1), rat(0, 1)],
            vec![rat(0, 1), rat(0, 1), rat(1, 1)],
        ];
        Self {
            dim: 3,
            basis,
            epsilon,
        }
    }

    /// Body-centered cubic lattice.
    pub fn body_centered_cubic(epsilon: f64) -> Self {
        let basis = vec![
            vec![rat(-1, 1), rat(1, 1), rat(1, 1)],
            vec![rat(1, 1), rat(-1, 1), rat(1, 1)],
            vec![rat(1, 1), rat(1, 1), rat(-1, 1)],
        ];
        Self {
            dim: 3,
            basis,
            epsilon,
        }
    }

    /// 4D oblique lattice in coordinates (t, x, y, z).
    pub fn oblique_4d(epsilon: f64) -> Self {
        let basis = vec![
            vec![rat(1, 1), rat(1, 1), rat(1, 1), rat(1, 1)],
            vec![rat(1, 1), rat(-1, 1), rat(1, 1), rat(1, 1)],
            vec![rat(1, 1), rat(1, 1), rat(-1, 1), rat(1, 1)],
            vec![rat(1, 1), rat(1, 1), rat(1, 1), rat(-1, 1)],
        ];
        Self {
            dim: 4,
            basis,
            epsilon,
        }
    }

    /// Dual basis: vectors `k_j` with `a_i . k_j = 2 pi delta_ij`, stored in
    /// units of `2*pi/epsilon`.
    pub fn reciprocal(&self) -> Result<ReciprocalBasis> {
        let inv = rat_inverse(&self.basis).ok_or(Error::DegenerateBasis)?;
        // k_j is the j-th column of B^{-1}.
        let vectors: Vec<Vec<Rational>> = (0..self.dim)
            .map(|j| (0..self.dim).map(|i| inv[i][j]).collect())
            .collect();
        Ok(ReciprocalBasis {
            dim: self.dim,
            vectors,
            epsilon: self.epsilon,
        })
    }
}

/// See [`DirectLattice::reciprocal`].
pub fn reciprocal_basis(lat: &DirectLattice) -> Result<ReciprocalBasis> {
    lat.reciprocal()
}

/// Reciprocal basis vectors, rational components in units of `2*pi/epsilon`.
#[derive(Debug, Clone)]
pub struct ReciprocalBasis {
    pub dim: usize,
    pub vectors: Vec<Vec<Rational>>,
    pub epsilon: f64,
}

impl ReciprocalBasis {
    /// Components in physical units of 1/epsilon.
    pub fn physical(&self) -> Vec<Vec<f64>> {
        let scale = 2.0 * PI / self.epsilon;
        self.vectors
            .iter()
            .map(|v| v.iter().map(|r| scale * ratio_to_f64(*r)).collect())
            .collect()
    }

    /// Max deviation of `a_i . k_j - 2 pi delta_ij` over all pairs, in units
    /// of 2 pi (exact rational arithmetic, returned as f64 for reporting).
    pub fn duality_defect(&self, lat: &DirectLattice) -> f64 {
        let mut worst = rat(0, 1);
        for (i, a) in lat.basis.iter().enumerate() {
            for (j, k) in self.vectors.iter().enumerate() {
                let d = dot(a, k) - rat((i == j) as i64, 1);
                if d.abs() > worst {
                    worst = d.abs();
                }
            }
        }
        ratio_to_f64(worst)
    }
}

pub fn ratio_to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

// ---------------------------------------------------------------------------
// Brillouin zone from the Bragg equation
// ---------------------------------------------------------------------------

/// One half-space `normal . q <= offset` in dimensionless momentum
/// `q = p * epsilon / (2 pi)`. The normal is a primitive integer vector.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct HalfSpace {
    pub normal: Vec<i64>,
    pub offset: Rational,
}

impl HalfSpace {
    /// Key identifying the `{+normal, -normal}` pair: the representative with
    /// positive leading nonzero component.
    pub fn family_key(&self) -> (Vec<i64>, Rational) {
        let flip = self
            .normal
            .iter()
            .find(|&&x| x != 0)
            .map(|&x| x < 0)
            .unwrap_or(false);
        let n = if flip {
            self.normal.iter().map(|x| -x).collect()
        } else {
            self.normal.clone()
        };
        (n, self.offset)
    }

    pub fn offset_physical(&self, epsilon: f64) -> f64 {
        ratio_to_f64(self.offset) * 2.0 * PI / epsilon
    }

    pub fn satisfied_by(&self, q: &[Rational]) -> bool {
        let lhs: Rational = self.normal.iter().zip(q).map(|(&n, x)| rat(n, 1) * x).sum();
        lhs <= self.offset
    }
}

/// Bounded first zone: facet half-spaces plus torus metadata.
#[derive(Debug, Clone)]
pub struct BrillouinZone {
    pub dim: usize,
    pub epsilon: f64,
    pub constraints: Vec<HalfSpace>,
    /// Lattice translations identifying points of the torus (reciprocal basis
    /// vectors, units of 2*pi/epsilon).
    pub torus_identification: Vec<Vec<Rational>>,
    pub sheet_count: usize,
}

impl BrillouinZone {
    pub fn family_set(&self) -> BTreeSet<(Vec<i64>, Rational)> {
        self.constraints.iter().map(|h| h.family_key()).collect()
    }

    pub fn contains_q(&self, q: &[Rational]) -> bool {
        self.constraints.iter().all(|h| h.satisfied_by(q))
    }

    /// All polytope vertices in dimensionless q coordinates.
    pub fn vertices(&self) -> Vec<Vec<Rational>> {
        let d = self.dim;
        let cs = &self.constraints;
        let mut out: BTreeSet<Vec<Rational>> = BTreeSet::new();
        let mut idx: Vec<usize> = (0..d).collect();
        loop {
            let rows: Vec<Vec<Rational>> = idx
                .iter()
                .map(|&i| cs[i].normal.iter().map(|&x| rat(x, 1)).collect())
                .collect();
            let rhs: Vec<Rational> = idx.iter().map(|&i| cs[i].offset).collect();
            if let Some(q) = rat_solve(&rows, &rhs) {
                if self.contains_q(&q) {
                    out.insert(q);
                }
            }
            // next combination of d constraint indices
            let mut k = d;
            loop {
                if k == 0 {
                    return out.into_iter().collect();
                }
                k -= 1;
                if idx[k] + 1 <= cs.len() - (d - k) {
                    idx[k] += 1;
                    for j in k + 1..d {
                        idx[j] = idx[j - 1] + 1;
                    }
                    break;
                }
            }
        }
    }

    /// Exact area of a 2D zone in dimensionless q units.
    pub fn volume_q_2d(&self) -> Result<Rational> {
        if self.dim != 2 {
            return Err(Error::UnsupportedDimension(self.dim));
        }
        let verts = self.vertices();
        let mut pts: Vec<(f64, Vec<Rational>)> = verts
            .into_iter()
            .map(|v| (ratio_to_f64(v[1]).atan2(ratio_to_f64(v[0])), v))
            .collect();
        pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let n = pts.len();
        let mut twice_area = rat(0, 1);
        for i in 0..n {
            let (a, b) = (&pts[i].1, &pts[(i + 1) % n].1);
            twice_area += a[0] * b[1] - b[0] * a[1];
        }
        Ok(twice_area.abs() / rat(2, 1))
    }

    /// Physical volume, units (1/epsilon)^dim.
    pub fn volume_physical_2d(&self) -> Result<f64> {
        let vq = self.volume_q_2d()?;
        Ok(ratio_to_f64(vq) * (2.0 * PI / self.epsilon).powi(2))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "dim": self.dim,
            "epsilon": self.epsilon,
            "sheet_count": self.sheet_count,
            "constraints": self.constraints.iter().map(|h| serde_json::json!({
                "normal": h.normal,
                "offset": h.offset_physical(self.epsilon),
            })).collect::<Vec<_>>(),
            "torus": self.torus_identification.iter().map(|v| {
                v.iter().map(|r| ratio_to_f64(*r) * 2.0 * PI / self.epsilon).collect::<Vec<f64>>()
            }).collect::<Vec<_>>(),
        })
    }
}

/// Integer-scaled copy of a rational vector family: returns (scaled vectors,
/// common denominator).
fn scale_to_integers(vectors: &[Vec<Rational>]) -> (Vec<Vec<i64>>, i64) {
    let mut den: i64 = 1;
    for v in vectors {
        for r in v {
            den = lcm(den, *r.denom());
        }
    }
    let scaled = vectors
        .iter()
        .map(|v| v.iter().map(|r| r.numer() * (den / r.denom())).collect())
        .collect();
    (scaled, den)
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn lcm(a: i64, b: i64) -> i64 {
    a / gcd(a, b) * b
}

fn norm2(v: &[i64]) -> i128 {
    v.iter().map(|&x| (x as i128) * (x as i128)).sum()
}

/// Enumerates all integer combinations of `gens` with coefficients in
/// [-bound, bound], skipping the zero combination.
fn integer_combinations(gens: &[Vec<i64>], bound: i64) -> Vec<Vec<i64>> {
    let m = gens.len();
    let d = gens[0].len();
    let mut out = Vec::new();
    let mut coeffs = vec![-bound; m];
    'outer: loop {
        if coeffs.iter().any(|&c| c != 0) {
            let mut v = vec![0i64; d];
            for (c, g) in coeffs.iter().zip(gens) {
                for (vi, gi) in v.iter_mut().zip(g) {
                    *vi += c * gi;
                }
            }
            if v.iter().any(|&x| x != 0) {
                out.push(v);
            }
        }
        for i in 0..m {
            if coeffs[i] < bound {
                coeffs[i] += 1;
                continue 'outer;
            }
            coeffs[i] = -bound;
        }
        return out;
    }
}

/// Keeps only lattice vectors whose Bragg plane is a facet of the zone:
/// `k` stays iff `+/-k` are the unique minimal-norm members of `k + 2L`.
fn voronoi_relevant(candidates: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let dedup: BTreeSet<Vec<i64>> = candidates.iter().cloned().collect();
    let lattice: Vec<&Vec<i64>> = dedup.iter().collect();
    let mut out = Vec::new();
    'cand: for k in &dedup {
        let nk = norm2(k);
        for v in &lattice {
            // u = k - 2v must have larger norm unless u = +/-k (v = 0 or k).
            let u: Vec<i64> = k.iter().zip(v.iter()).map(|(&a, &b)| a - 2 * b).collect();
            let minus_k: Vec<i64> = k.iter().map(|&a| -a).collect();
            if u == *k || u == minus_k {
                continue;
            }
            if norm2(&u) <= nk {
                continue 'cand;
            }
        }
        out.push(k.clone());
    }
    out
}

fn constraints_from_relevant(relevant: &[Vec<i64>], den: i64) -> Vec<HalfSpace> {
    let mut set: BTreeSet<HalfSpace> = BTreeSet::new();
    for k in relevant {
        let g = k.iter().fold(0i64, |acc, &x| gcd(acc, x));
        let normal: Vec<i64> = k.iter().map(|&x| x / g).collect();
        // q . (k/den) <= (k.k) / (2 den^2)  =>  q . (k/g) <= (k.k)/(2 den g)
        let n2 = norm2(k);
        let offset = Rational::new(i64::try_from(n2).expect("norm overflow"), 2 * den * g);
        set.insert(HalfSpace { normal, offset });
    }
    set.into_iter().collect()
}

/// Bragg constraint list for an arbitrary (possibly redundant) family of
/// reciprocal vectors, minimal up to facet filtering.
pub fn degenerate_bz_constraints(
    vectors: &[Vec<Rational>],
    coefficient_bound: i64,
) -> Vec<HalfSpace> {
    let nonzero: Vec<Vec<Rational>> = vectors
        .iter()
        .filter(|v| v.iter().any(|r| !r.is_zero()))
        .cloned()
        .collect();
    if nonzero.is_empty() {
        return Vec::new();
    }
    let (gens, den) = scale_to_integers(&nonzero);
    let candidates = integer_combinations(&gens, coefficient_bound);
    let relevant = voronoi_relevant(&candidates);
    constraints_from_relevant(&relevant, den)
}

/// First Brillouin zone of a reciprocal basis via the Bragg equation,
/// redundant constraints removed.
pub fn bragg_bz(recip: &ReciprocalBasis, coefficient_bound: i64) -> Result<BrillouinZone> {
    assert!(coefficient_bound >= 1, "coefficient bound must be >= 1");
    let constraints = degenerate_bz_constraints(&recip.vectors, coefficient_bound);
    let normals: Vec<Vec<i64>> = constraints.iter().map(|h| h.normal.clone()).collect();
    if rat_rank(&normals) < recip.dim {
        return Err(Error::UnboundedRegion);
    }
    Ok(BrillouinZone {
        dim: recip.dim,
        epsilon: recip.epsilon,
        constraints,
        torus_identification: recip.vectors.clone(),
        sheet_count: 1,
    })
}

// ---------------------------------------------------------------------------
// Sublattice flavor partition
// ---------------------------------------------------------------------------

/// Parity-based flavor assignment of lattice sites for the staggered schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SublatticePartition {
    pub spacetime_dim: usize,
    pub flavor_count: usize,
}

/// Flavor partition for spacetime dimension 2 or 4.
pub fn sublattice_partition(scheme_dim: usize) -> Result<SublatticePartition> {
    match scheme_dim {
        2 => Ok(SublatticePartition {
            spacetime_dim: 2,
            flavor_count: 2,
        }),
        4 => Ok(SublatticePartition {
            spacetime_dim: 4,
            flavor_count: 8,
        }),
        d => Err(Error::UnsupportedDimension(d)),
    }
}

impl SublatticePartition {
    /// Parity bits of a site `(n, k)` or `(n, k, l, m)`, one per spatial axis.
    pub fn flavor_bits(&self, site: &[i64]) -> Vec<u8> {
        assert_eq!(site.len(), self.spacetime_dim, "site has wrong dimension");
        let n = site[0];
        site[1..]
            .iter()
            .map(|&x| ((n + x).rem_euclid(2)) as u8)
            .collect()
    }

    /// Flavor index with the first spatial axis on the most significant bit.
    pub fn flavor_of(&self, site: &[i64]) -> usize {
        self.flavor_bits(site)
            .iter()
            .fold(0usize, |acc, &b| (acc << 1) | b as usize)
    }
}

// ---------------------------------------------------------------------------
// JSON forms
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct DirectLatticeJson {
    dim: usize,
    basis: Vec<Vec<f64>>,
    epsilon: f64,
}

impl DirectLattice {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "dim": self.dim,
            "basis": self.basis.iter()
                .map(|v| v.iter().map(|r| ratio_to_f64(*r)).collect::<Vec<f64>>())
                .collect::<Vec<_>>(),
            "epsilon": self.epsilon,
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let j: DirectLatticeJson = serde_json::from_value(v.clone())?;
        let basis = j
            .basis
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&x| rational_from_f64(x))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        if basis.len() != j.dim {
            return Err(Error::ShapeMismatch("basis size disagrees with dim".into()));
        }
        Self::new(basis, j.epsilon)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn families(cs: &[HalfSpace]) -> BTreeSet<(Vec<i64>, Rational)> {
        cs.iter().map(|h| h.family_key()).collect()
    }

    #[test]
    fn square_reciprocal_is_identity_scaled() {
        let lat = DirectLattice::square(2, 0.1);
        let rec = lat.reciprocal().unwrap();
        assert_eq!(
            rec.vectors,
            vec![vec![rat(1, 1), rat(0, 1)], vec![rat(0, 1), rat(1, 1)]]
        );
        assert_eq!(rec.duality_defect(&lat), 0.0);
        let phys = rec.physical();
        assert!((phys[0][0] - 2.0 * PI / 0.1).abs() < 1e-9);
    }

    #[test]
    fn embedded_oblique_reciprocal_matches_reference_up_to_sign() {
        let lat = DirectLattice::oblique_2d_embedded(0.2);
        let rec = lat.reciprocal().unwrap();
        assert_eq!(rec.duality_defect(&lat), 0.0);
        // Reference vectors (pi/eps)(x-y), -(pi/eps)(x+y), (2pi/eps)z in
        // units of 2pi/eps; the duality-normalized dual flips the first two.
        let reference = [
            vec![rat(1, 2), rat(-1, 2), rat(0, 1)],
            vec![rat(-1, 2), rat(-1, 2), rat(0, 1)],
            vec![rat(0, 1), rat(0, 1), rat(1, 1)],
        ];
        for (got, want) in rec.vectors.iter().zip(reference.iter()) {
            let neg: Vec<Rational> = want.iter().map(|r| -*r).collect();
            assert!(got == want || got == &neg, "got {got:?}, want +/-{want:?}");
        }
    }

    #[test]
    fn oblique_4d_reciprocal_matches_reference_exactly() {
        let lat = DirectLattice::oblique_4d(0.05);
        let rec = lat.reciprocal().unwrap();
        assert_eq!(rec.duality_defect(&lat), 0.0);
        let reference = vec![
            vec![rat(-1, 2), rat(1, 2), rat(1, 2), rat(1, 2)],
            vec![rat(1, 2), rat(-1, 2), rat(0, 1), rat(0, 1)],
            vec![rat(1, 2), rat(0, 1), rat(-1, 2), rat(0, 1)],
            vec![rat(1, 2), rat(0, 1), rat(0, 1), rat(-1, 2)],
        ];
        assert_eq!(rec.vectors, reference);
    }

    #[test]
    fn square_bz_has_four_faces() {
        let rec = DirectLattice::square(2, 0.1).reciprocal().unwrap();
        let bz = bragg_bz(&rec, 2).unwrap();
        assert_eq!(bz.constraints.len(), 4);
        let expect: BTreeSet<_> = [(vec![1, 0], rat(1, 2)), (vec![0, 1], rat(1, 2))]
            .into_iter()
            .collect();
        assert_eq!(bz.family_set(), expect);
        assert_eq!(bz.volume_q_2d().unwrap(), rat(1, 1));
        let phys = bz.volume_physical_2d().unwrap();
        assert!((phys - (2.0 * PI / 0.1).powi(2)).abs() < 1e-9 * phys);
    }

    #[test]
    fn oblique_bz_is_the_rhombus_with_half_volume() {
        let rec = DirectLattice::oblique_2d(0.1).reciprocal().unwrap();
        let bz = bragg_bz(&rec, 2).unwrap();
        assert_eq!(bz.constraints.len(), 4);
        let expect: BTreeSet<_> = [(vec![1, 1], rat(1, 2)), (vec![1, -1], rat(1, 2))]
            .into_iter()
            .collect();
        assert_eq!(bz.family_set(), expect);
        assert_eq!(bz.volume_q_2d().unwrap(), rat(1, 2));
        // Vertices (+-1/2, 0), (0, +-1/2).
        let verts = bz.vertices();
        assert_eq!(verts.len(), 4);
        assert!(verts.contains(&vec![rat(1, 2), rat(0, 1)]));
        assert!(verts.contains(&vec![rat(0, 1), rat(-1, 2)]));
    }

    #[test]
    fn bcc_bz_is_the_rhombic_dodecahedron() {
        let rec = DirectLattice::body_centered_cubic(0.1)
            .reciprocal()
            .unwrap();
        let bz = bragg_bz(&rec, 2).unwrap();
        assert_eq!(bz.constraints.len(), 12);
        let mut expect = BTreeSet::new();
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            for s in [1i64, -1] {
                let mut n = vec![0i64; 3];
                n[i] = 1;
                n[j] = s;
                expect.insert((n, rat(1, 2)));
            }
        }
        assert_eq!(bz.family_set(), expect);
    }

    #[test]
    fn oblique_4d_bz_has_24_faces_and_24_vertices() {
        let rec = DirectLattice::oblique_4d(0.1).reciprocal().unwrap();
        let bz = bragg_bz(&rec, 2).unwrap();
        assert_eq!(bz.constraints.len(), 24);
        assert_eq!(bz.vertices().len(), 24);
    }

    /// The six two-plane reciprocal vectors produce the same constraint set
    /// as the 4D oblique basis.
    #[test]
    fn degenerate_4d_representation_agrees() {
        let mut six = Vec::new();
        for axis in 1..=3usize {
            for s in [1i64, -1] {
                let mut v = vec![rat(1, 2), rat(0, 1), rat(0, 1), rat(0, 1)];
                v[axis] = rat(s, 2);
                six.push(v);
            }
        }
        let from_six = families(&degenerate_bz_constraints(&six, 2));
        let rec = DirectLattice::oblique_4d(0.1).reciprocal().unwrap();
        let from_basis = bragg_bz(&rec, 2).unwrap().family_set();
        assert_eq!(from_six, from_basis);
        // App. F table: E +/- p_i and p_i +/- p_j families, all at pi/eps.
        assert_eq!(from_six.len(), 12);
        for (n, c) in &from_six {
            assert_eq!(*c, rat(1, 2));
            assert_eq!(n.iter().filter(|&&x| x != 0).count(), 2);
        }
    }

    /// Four two-plane vectors reproduce the BCC zone without seeing the
    /// difference in generating sets.
    #[test]
    fn degenerate_bcc_representation_agrees() {
        let four = vec![
            vec![rat(1, 2), rat(1, 2), rat(0, 1)],
            vec![rat(1, 2), rat(-1, 2), rat(0, 1)],
            vec![rat(1, 2), rat(0, 1), rat(1, 2)],
            vec![rat(1, 2), rat(0, 1), rat(-1, 2)],
        ];
        let got = families(&degenerate_bz_constraints(&four, 2));
        let rec = DirectLattice::body_centered_cubic(0.1)
            .reciprocal()
            .unwrap();
        let want = bragg_bz(&rec, 2).unwrap().family_set();
        assert_eq!(got, want);
        assert!(got.contains(&(vec![0, 1, 1], rat(1, 2))));
        assert!(got.contains(&(vec![0, 1, -1], rat(1, 2))));
    }

    #[test]
    fn one_dimensional_single_vector() {
        let cs = degenerate_bz_constraints(&[vec![rat(1, 1)]], 2);
        assert_eq!(cs.len(), 2);
        assert_eq!(families(&cs), [(vec![1], rat(1, 2))].into_iter().collect());
    }

    #[test]
    fn unbounded_region_detected() {
        let rec = ReciprocalBasis {
            dim: 2,
            vectors: vec![vec![rat(1, 1), rat(0, 1)]],
            epsilon: 0.1,
        };
        assert!(matches!(bragg_bz(&rec, 2), Err(Error::UnboundedRegion)));
    }

    #[test]
    fn degenerate_basis_rejected() {
        let bad = DirectLattice::new(
            vec![vec![rat(1, 1), rat(1, 1)], vec![rat(2, 1), rat(2, 1)]],
            0.1,
        );
        assert!(matches!(bad, Err(Error::DegenerateBasis)));
    }

    #[test]
    fn partition_examples() {
        let p2 = sublattice_partition(2).unwrap();
        assert_eq!(p2.flavor_of(&[0, 0]), 0);
        assert_eq!(p2.flavor_of(&[1, 0]), 1);
        assert_eq!(p2.flavor_of(&[-1, 0]), 1);
        let p4 = sublattice_partition(4).unwrap();
        assert_eq!(p4.flavor_bits(&[0, 1, 1, 0]), vec![1, 1, 0]);
        assert_eq!(p4.flavor_of(&[0, 1, 1, 0]), 0b110);
        assert!(matches!(
            sublattice_partition(3),
            Err(Error::UnsupportedDimension(3))
        ));
    }

    /// Union of flavors covers the lattice and flavors are disjoint.
    #[test]
    fn partition_covers_and_is_disjoint() {
        let p4 = sublattice_partition(4).unwrap();
        let mut counts = [0usize; 8];
        for n in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    for m in 0..2 {
                        counts[p4.flavor_of(&[n, k, l, m])] += 1;
                    }
                }
            }
        }
        assert_eq!(counts, [2; 8]);
    }

    #[test]
    fn json_round_trip() {
        let lat = DirectLattice::oblique_2d(0.25);
        let j = lat.to_json();
        let back = DirectLattice::from_json(&j).unwrap();
        assert_eq!(back.basis, lat.basis);
        assert_eq!(back.epsilon, lat.epsilon);
    }

    proptest! {
        /// Duality holds exactly for any non-degenerate small integer basis.
        #[test]
        fn duality_exact_for_random_bases(entries in proptest::collection::vec(-3i64..=3, 9)) {
            let basis: Vec<Vec<Rational>> = (0..3)
                .map(|i| (0..3).map(|j| rat(entries[3*i + j], 1)).collect())
                .collect();
            if let Ok(lat) = DirectLattice::new(basis, 0.1) {
                let rec = lat.reciprocal().unwrap();
                prop_assert_eq!(rec.duality_defect(&lat), 0.0);
            }
        }
    }
}
