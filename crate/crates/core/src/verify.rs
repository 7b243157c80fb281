//! The acceptance gate: one callable check per headline claim, shared by the
//! `acceptance` test target and the `verify-all` CLI subcommand. Tolerances
//! are pinned here.

use std::time::Instant;

use crate::doublers::{rhombus_corner_gap, scan_doublers, ShiftKind};
use crate::evolve::{continuum_convergence, flavor_form_defect, StateVector, Stepper, WavePacket};
use crate::fourier::{
    closed_form_det, flavored_power_identity, taylor_continuum_check, u3_identity_check,
};
use crate::greens::{cramer_mode_check, green_function, green_function_with, ModeOffsets};
use crate::lattice::{bragg_bz, degenerate_bz_constraints, rat, DirectLattice, Rational};
use crate::schemes::{
    evolution_unitary_check, hermiticity_test, DerivativeAxis, DerivativeKind, SchemeKind,
    SchemeSpec,
};
use crate::symmetry::{
    chiral_commutator, chiral_projectors, commutator_mass_power_fit, left_red_initial,
    neutrino_sector_run, GaugePhaseField,
};

#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyConfig {
    /// Smaller sample counts and shorter sweeps; tolerances are unchanged.
    pub quick: bool,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            quick: false,
            seed: 2024,
        }
    }
}

fn spec(kind: SchemeKind, m: f64, eps: f64) -> SchemeSpec {
    SchemeSpec::new(kind, m, eps).expect("valid spec")
}

struct Check {
    passed: bool,
    detail: Vec<String>,
}

impl Check {
    fn new() -> Self {
        Self {
            passed: true,
            detail: Vec::new(),
        }
    }

    fn le(&mut self, label: &str, value: f64, bound: f64) {
        let ok = value <= bound;
        self.passed &= ok;
        self.detail.push(format!(
            "{label}={value:.3e}{}{bound:.1e}",
            if ok { "<=" } else { ">" }
        ));
    }

    fn ge(&mut self, label: &str, value: f64, bound: f64) {
        let ok = value >= bound;
        self.passed &= ok;
        self.detail.push(format!(
            "{label}={value:.3}{}{bound:.3}",
            if ok { ">=" } else { "<" }
        ));
    }

    fn eq_usize(&mut self, label: &str, value: usize, want: usize) {
        let ok = value == want;
        self.passed &= ok;
        self.detail.push(format!(
            "{label}={value}{}{want}",
            if ok { "==" } else { "!=" }
        ));
    }

    fn truth(&mut self, label: &str, ok: bool) {
        self.passed &= ok;
        self.detail
            .push(format!("{label}={}", if ok { "ok" } else { "FAIL" }));
    }
}

fn run<F: FnOnce(&mut Check)>(id: usize, name: &'static str, f: F) -> CriterionResult {
    let start = Instant::now();
    let mut c = Check::new();
    f(&mut c);
    CriterionResult {
        id,
        name,
        passed: c.passed,
        detail: c.detail.join(", "),
        seconds: start.elapsed().as_secs_f64(),
    }
}

pub fn run_all(cfg: &VerifyConfig) -> Vec<CriterionResult> {
    vec![
        criterion_01_closed_form_dets(cfg),
        criterion_02_u3_identity(cfg),
        criterion_03_doubler_counts(cfg),
        criterion_04_flavored_powers(cfg),
        criterion_05_flavored_gap(cfg),
        criterion_06_continuum_taylor(cfg),
        criterion_07_green_identity(cfg),
        criterion_08_evolution_contracts(cfg),
        criterion_09_chiral_symmetry(cfg),
        criterion_10_neutrino_sector(cfg),
        criterion_11_covering_multiplicities(cfg),
        criterion_12_bz_geometry(cfg),
        criterion_13_hermiticity(cfg),
    ]
}

fn criterion_01_closed_form_dets(cfg: &VerifyConfig) -> CriterionResult {
    let samples = if cfg.quick { 300 } else { 1000 };
    run(1, "closed-form determinants match assembled symbols", |c| {
        for (kind, m, eps) in [
            (SchemeKind::NaiveSymmetric1D, 0.7, 0.2),
            (SchemeKind::DiracQW1D, 0.5, 0.1),
            (SchemeKind::DiracQW3D, 1.0, 0.05),
            (SchemeKind::FlavoredQW1D, 0.5, 0.1),
            (SchemeKind::FlavoredQW3D, 1.0, 0.05),
        ] {
            let dev = closed_form_det(&spec(kind, m, eps)).validate(samples, cfg.seed);
            c.le(&format!("{kind:?}"), dev, 1e-10);
        }
    })
}

fn criterion_02_u3_identity(cfg: &VerifyConfig) -> CriterionResult {
    let samples = if cfg.quick { 50 } else { 200 };
    run(
        2,
        "substep product equals the explicit 3D one-step matrix",
        |c| {
            let dev = u3_identity_check(&spec(SchemeKind::DiracQW3D, 1.0, 0.05), samples, cfg.seed)
                .expect("3D walk");
            c.le("entrywise", dev, 1e-12);
            let dev2 = u3_identity_check(&spec(SchemeKind::DiracQW3D, 0.3, 0.2), samples, cfg.seed)
                .expect("3D walk");
            c.le("entrywise2", dev2, 1e-12);
        },
    )
}

fn criterion_03_doubler_counts(cfg: &VerifyConfig) -> CriterionResult {
    let samples = if cfg.quick { 100 } else { 150 };
    run(3, "doubler counts 3 / 1 / 7 with the right classes", |c| {
        for &m in &[0.0, 0.5, 1.5] {
            for &eps in &[0.05, 0.2] {
                let naive = scan_doublers(
                    &spec(SchemeKind::NaiveSymmetric1D, m, eps),
                    samples,
                    1e-9,
                    cfg.seed,
                );
                c.eq_usize(&format!("naive(m={m},eps={eps})"), naive.count(), 3);
                let mut kinds = naive.classifications();
                kinds.sort_by_key(|k| format!("{k:?}"));
                c.truth(
                    "naive-classes",
                    kinds
                        == vec![
                            ShiftKind::Spatial,
                            ShiftKind::Spatiotemporal,
                            ShiftKind::Temporal,
                        ],
                );
                let walk = scan_doublers(
                    &spec(SchemeKind::DiracQW1D, m, eps),
                    samples,
                    1e-9,
                    cfg.seed,
                );
                c.eq_usize(&format!("walk1d(m={m},eps={eps})"), walk.count(), 1);
                c.truth(
                    "walk1d-class",
                    walk.classifications() == vec![ShiftKind::Spatiotemporal],
                );
                let walk3 = scan_doublers(
                    &spec(SchemeKind::DiracQW3D, m, eps),
                    samples,
                    1e-9,
                    cfg.seed,
                );
                c.eq_usize(&format!("walk3d(m={m},eps={eps})"), walk3.count(), 7);
                let expected: Vec<Vec<u8>> = vec![
                    vec![1, 1, 0, 0],
                    vec![1, 0, 1, 0],
                    vec![1, 0, 0, 1],
                    vec![0, 1, 1, 0],
                    vec![0, 1, 0, 1],
                    vec![0, 0, 1, 1],
                    vec![1, 1, 1, 1],
                ];
                let got: Vec<Vec<u8>> = walk3
                    .invariant_classes
                    .iter()
                    .map(|(s, _)| s.as_ints())
                    .collect();
                c.truth("walk3d-classes", expected.iter().all(|e| got.contains(e)));
            }
        }
    })
}

fn criterion_04_flavored_powers(cfg: &VerifyConfig) -> CriterionResult {
    run(4, "flavored determinants are the 2nd / 8th powers", |c| {
        let dev1 = flavored_power_identity(
            &spec(SchemeKind::DiracQW1D, 0.5, 0.1),
            &spec(SchemeKind::FlavoredQW1D, 0.5, 0.1),
            if cfg.quick { 200 } else { 500 },
            cfg.seed,
        )
        .expect("pair");
        c.le("square", dev1, 1e-8);
        let dev3 = flavored_power_identity(
            &spec(SchemeKind::DiracQW3D, 1.0, 0.05),
            &spec(SchemeKind::FlavoredQW3D, 1.0, 0.05),
            if cfg.quick { 80 } else { 200 },
            cfg.seed,
        )
        .expect("pair");
        c.le("eighth", dev3, 1e-8);
    })
}

fn criterion_05_flavored_gap(cfg: &VerifyConfig) -> CriterionResult {
    let grid = if cfg.quick { 300 } else { 1000 };
    run(5, "flavored zone is gapped at its vertices", |c| {
        let eps = 0.1;
        for &m in &[0.3, 1.0] {
            let s = spec(SchemeKind::FlavoredQW1D, m, eps);
            let radius = 0.1 * std::f64::consts::PI / eps;
            let report = rhombus_corner_gap(&s, radius, grid, cfg.seed).expect("massive flavored");
            let gap2 = (2.0 * (1.0 - (m * eps).cos())).powi(2);
            c.ge(&format!("vertex-min(m={m})"), report.vertex_min, 0.5 * gap2);
            c.le(&format!("origin-min(m={m})"), report.origin_min, gap2);
            c.truth("origin<vertex", report.origin_min < report.vertex_min);
        }
    })
}

fn criterion_06_continuum_taylor(cfg: &VerifyConfig) -> CriterionResult {
    use rand::Rng;
    use rand::SeedableRng;
    run(
        6,
        "normalized determinants reach the continuum polynomial",
        |c| {
            let eps_seq = [0.1, 0.05, 0.025, 0.0125];
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cfg.seed);
            let points = if cfg.quick { 4 } else { 10 };
            for kind in [
                SchemeKind::NaiveSymmetric1D,
                SchemeKind::DiracQW1D,
                SchemeKind::DiracQW3D,
            ] {
                let d = kind.spacetime_dim() - 1;
                let mut done = 0;
                while done < points {
                    let energy =
                        rng.gen_range(0.3..1.2) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                    let momentum: Vec<f64> = (0..d)
                        .map(|_| {
                            rng.gen_range(0.3..1.2) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 }
                        })
                        .collect();
                    let p2: f64 = momentum.iter().map(|p| p * p).sum();
                    if (energy * energy - p2 - 0.25).abs() < 0.05 {
                        continue; // too close to the continuum zero set
                    }
                    let fit = taylor_continuum_check(kind, 0.5, (energy, momentum), &eps_seq)
                        .expect("unflavored kind");
                    match fit.fitted_order {
                        Some(order) => c.ge(&format!("{kind:?}#{done}"), order, 0.9),
                        None => c.truth(&format!("{kind:?}#{done}-converged"), true),
                    }
                    done += 1;
                }
            }
        },
    )
}

fn criterion_07_green_identity(cfg: &VerifyConfig) -> CriterionResult {
    run(
        7,
        "Green tables satisfy the defining identity; 2x2 closed form",
        |c| {
            let naive = spec(SchemeKind::NaiveSymmetric1D, 0.7, 0.2);
            let table = green_function(&naive, 16, 16).expect("nonsingular");
            c.le("naive-identity", table.defining_identity_defect(), 1e-10);
            let walk = spec(SchemeKind::DiracQW1D, 0.7, 0.2);
            let offsets = ModeOffsets {
                time_antiperiodic: true,
                space_antiperiodic: false,
            };
            let table2 = green_function_with(&walk, &[16, 16], offsets).expect("nonsingular");
            c.le("walk-identity", table2.defining_identity_defect(), 1e-10);
            let cramer = cramer_mode_check(&naive, if cfg.quick { 200 } else { 500 }, cfg.seed)
                .expect("symmetric scheme");
            c.le("cramer", cramer, 1e-12);
        },
    )
}

fn criterion_08_evolution_contracts(cfg: &VerifyConfig) -> CriterionResult {
    run(8, "unitary drift, staggered form, continuum order", |c| {
        let steps = 200;
        for kind in [SchemeKind::DiracQW1D, SchemeKind::FlavoredQW1D] {
            let s = spec(kind, 0.5, 0.1);
            let stepper = Stepper::new(&s).expect("first order");
            let mut state = StateVector::zeros(&s, vec![64], 0).expect("shape");
            let dim = state.component_dim();
            for site in 0..64usize {
                for comp in 0..dim {
                    let x = ((site * 37 + comp * 11 + 3) % 97) as f64 / 97.0;
                    *state.amp_mut(site, comp) = num_complex::Complex64::new(x, 0.5 - x);
                }
            }
            let n0 = state.norm();
            state.scale(1.0 / n0);
            let mut worst_drift: f64 = 0.0;
            let mut prev = 1.0;
            for _ in 0..steps {
                state = stepper.step(&state).expect("step");
                let n = state.norm();
                worst_drift = worst_drift.max((n - prev).abs());
                prev = n;
            }
            c.le(&format!("{kind:?}-drift"), worst_drift, 1e-12);
        }

        let s = spec(SchemeKind::FlavoredQW1D, 0.5, 0.1);
        let stepper = Stepper::new(&s).expect("first order");
        let mut state = StateVector::zeros(&s, vec![64], 0).expect("shape");
        for k in 0..64usize {
            let f = crate::evolve::conforming_flavor(s.kind, 0, &[k as i64]);
            let x = (k as f64 / 64.0 - 0.5) * 5.0;
            *state.amp_mut(k, state.comp(0, f)) = num_complex::Complex64::new((-x * x).exp(), 0.0);
            *state.amp_mut(k, state.comp(1, f)) =
                num_complex::Complex64::new(0.0, 0.4 * (-x * x).exp());
        }
        let n0 = state.norm();
        state.scale(1.0 / n0);
        let evolved = stepper.step_n(&state, steps).expect("steps");
        c.le(
            "staggered-form",
            flavor_form_defect(&evolved).expect("flavored"),
            1e-12,
        );

        let packet = WavePacket {
            center: 0.0,
            width: 1.0,
            momentum: 0.5,
        };
        let sweep: &[f64] = if cfg.quick {
            &[0.1, 0.05, 0.025]
        } else {
            &[0.1, 0.05, 0.025, 0.0125]
        };
        for kind in [SchemeKind::DiracQW1D, SchemeKind::FlavoredQW1D] {
            let report =
                continuum_convergence(kind, 0.5, &packet, 2.0, sweep).expect("convergence");
            c.ge(&format!("{kind:?}-order"), report.fitted_order, 0.9);
        }

        // one-step unitarity over random zone points, every first-order kind
        for kind in [
            SchemeKind::DiracQW1D,
            SchemeKind::DiracQW3D,
            SchemeKind::FlavoredQW1D,
            SchemeKind::FlavoredQW3D,
        ] {
            let dev = evolution_unitary_check(&spec(kind, 0.5, 0.1), 100, cfg.seed).expect("walk");
            c.le(&format!("{kind:?}-unitary"), dev, 1e-12);
        }
    })
}

fn criterion_09_chiral_symmetry(cfg: &VerifyConfig) -> CriterionResult {
    run(
        9,
        "massless chiral commutators vanish; mass breaks at power one",
        |c| {
            let all = [
                SchemeKind::NaiveSymmetric1D,
                SchemeKind::DiracQW1D,
                SchemeKind::DiracQW3D,
                SchemeKind::FlavoredQW1D,
                SchemeKind::FlavoredQW3D,
            ];
            for kind in all {
                c.le(
                    &format!("{kind:?}-projectors"),
                    chiral_projectors(kind).algebra_defect(),
                    1e-14,
                );
                let dev = chiral_commutator(
                    &spec(kind, 0.0, 0.1),
                    if cfg.quick { 40 } else { 80 },
                    cfg.seed,
                );
                c.le(&format!("{kind:?}-massless"), dev, 1e-12);
            }
            let angles = [0.01, 0.02, 0.05, 0.1, 0.2, 0.3];
            for kind in all {
                let slope = commutator_mass_power_fit(
                    kind,
                    &angles,
                    0.1,
                    if cfg.quick { 24 } else { 48 },
                    cfg.seed,
                )
                .expect("fit");
                c.truth(
                    &format!("{kind:?}-power({slope:.3})"),
                    (slope - 1.0).abs() <= 0.1,
                );
            }
        },
    )
}

fn criterion_10_neutrino_sector(cfg: &VerifyConfig) -> CriterionResult {
    run(
        10,
        "gauged massless sector stays left-handed flavor-0",
        |c| {
            let s = spec(SchemeKind::FlavoredQW1D, 0.0, 0.1);
            let initial = left_red_initial(&s, 64).expect("shape");
            let phases = GaugePhaseField::neutrino_like(cfg.seed);
            let run_result = neutrino_sector_run(&s, &phases, &initial, 100).expect("massless");
            c.le("leakage", run_result.leakage, 1e-12);
            c.truth(
                "per-step",
                run_result.per_step_leakage.iter().all(|&l| l <= 1e-12),
            );
        },
    )
}

fn criterion_11_covering_multiplicities(cfg: &VerifyConfig) -> CriterionResult {
    use rand::Rng;
    use rand::SeedableRng;
    run(
        11,
        "two- and eight-fold covers, projection well-defined, sheets agree",
        |c| {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cfg.seed);
            let n1 = if cfg.quick { 300 } else { 1000 };
            let mut card_ok = true;
            for _ in 0..n1 {
                let z = crate::covering::phi(crate::covering::TorusPoint::new(
                    num_complex::Complex64::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)),
                ));
                card_ok &= crate::covering::fiber_by_enumeration(z).len() == 2;
            }
            c.truth("fiber-2", card_ok);
            let n3 = if cfg.quick { 60 } else { 200 };
            let mut card3_ok = true;
            for _ in 0..n3 {
                let mut pts = Vec::new();
                for _ in 0..3 {
                    pts.push(crate::covering::phi(crate::covering::TorusPoint::new(
                        num_complex::Complex64::new(
                            rng.gen_range(-0.5..0.5),
                            rng.gen_range(-0.5..0.5),
                        ),
                    )));
                }
                card3_ok &= crate::covering::fiber3(pts[0], pts[1], pts[2]).len() == 8;
            }
            c.truth("fiber-8", card3_ok);
            c.le(
                "projection",
                crate::covering::phi2_well_defined_check(
                    if cfg.quick { 100 } else { 300 },
                    cfg.seed,
                ),
                1e-12,
            );
            let sheets = crate::covering::det_sheet_consistency(
                &spec(SchemeKind::FlavoredQW1D, 0.5, 0.1),
                if cfg.quick { 200 } else { 500 },
                cfg.seed,
            )
            .expect("flavored");
            c.le("sheet-|det|", sheets, 1e-10);
        },
    )
}

fn criterion_12_bz_geometry(_cfg: &VerifyConfig) -> CriterionResult {
    run(
        12,
        "reciprocal bases and Bragg constraint sets are exact",
        |c| {
            // square: identity dual
            let sq = DirectLattice::square(2, 0.1);
            let rec = sq.reciprocal().expect("square");
            c.truth(
                "square-dual",
                rec.vectors == vec![vec![rat(1, 1), rat(0, 1)], vec![rat(0, 1), rat(1, 1)]],
            );
            c.truth("square-duality", rec.duality_defect(&sq) == 0.0);

            // embedded 2D oblique: the reference vectors up to per-vector sign
            let emb = DirectLattice::oblique_2d_embedded(0.1);
            let rec3 = emb.reciprocal().expect("oblique");
            c.truth("oblique-duality", rec3.duality_defect(&emb) == 0.0);
            let reference: [Vec<Rational>; 3] = [
                vec![rat(1, 2), rat(-1, 2), rat(0, 1)],
                vec![rat(-1, 2), rat(-1, 2), rat(0, 1)],
                vec![rat(0, 1), rat(0, 1), rat(1, 1)],
            ];
            let up_to_sign = rec3
                .vectors
                .iter()
                .zip(reference.iter())
                .all(|(got, want)| {
                    let neg: Vec<Rational> = want.iter().map(|r| -*r).collect();
                    got == want || got == &neg
                });
            c.truth("oblique-reference", up_to_sign);

            // 4D oblique: exact reference list
            let four = DirectLattice::oblique_4d(0.05);
            let rec4 = four.reciprocal().expect("4d");
            let want4 = vec![
                vec![rat(-1, 2), rat(1, 2), rat(1, 2), rat(1, 2)],
                vec![rat(1, 2), rat(-1, 2), rat(0, 1), rat(0, 1)],
                vec![rat(1, 2), rat(0, 1), rat(-1, 2), rat(0, 1)],
                vec![rat(1, 2), rat(0, 1), rat(0, 1), rat(-1, 2)],
            ];
            c.truth("4d-reference", rec4.vectors == want4);

            // rhombus zone
            let bz = bragg_bz(&DirectLattice::oblique_2d(0.1).reciprocal().expect("2d"), 2)
                .expect("bounded");
            let rhombus: std::collections::BTreeSet<_> =
                [(vec![1i64, 1], rat(1, 2)), (vec![1, -1], rat(1, 2))]
                    .into_iter()
                    .collect();
            c.truth("rhombus-faces", bz.family_set() == rhombus);

            // body-centered cubic: 12 faces
            let bcc = bragg_bz(
                &DirectLattice::body_centered_cubic(0.1)
                    .reciprocal()
                    .expect("bcc"),
                2,
            )
            .expect("bounded");
            let mut want_bcc = std::collections::BTreeSet::new();
            for (i, j) in [(0usize, 1usize), (0, 2), (1, 2)] {
                for s in [1i64, -1] {
                    let mut n = vec![0i64; 3];
                    n[i] = 1;
                    n[j] = s;
                    want_bcc.insert((n, rat(1, 2)));
                }
            }
            c.truth("bcc-faces", bcc.family_set() == want_bcc);
            c.eq_usize("bcc-halfspaces", bcc.constraints.len(), 12);

            // degenerate 4D representation reproduces the oblique-basis zone
            let mut six = Vec::new();
            for axis in 1..=3usize {
                for s in [1i64, -1] {
                    let mut v = vec![rat(1, 2), rat(0, 1), rat(0, 1), rat(0, 1)];
                    v[axis] = rat(s, 2);
                    six.push(v);
                }
            }
            let from_six: std::collections::BTreeSet<_> = degenerate_bz_constraints(&six, 2)
                .iter()
                .map(|h| h.family_key())
                .collect();
            let from_basis = bragg_bz(&four.reciprocal().expect("4d"), 2)
                .expect("bounded")
                .family_set();
            c.truth("degenerate-4d", from_six == from_basis);
            c.eq_usize("4d-families", from_six.len(), 12);
        },
    )
}

fn criterion_13_hermiticity(_cfg: &VerifyConfig) -> CriterionResult {
    run(
        13,
        "symmetric difference Hermitian, one-sided difference broken",
        |c| {
            let eps = 0.1;
            for (axis, name) in [
                (DerivativeAxis::Space, "space"),
                (DerivativeAxis::Time, "time"),
            ] {
                let sym = hermiticity_test(DerivativeKind::Symmetric, axis, 16, eps);
                c.le(&format!("symmetric-{name}"), sym, 1e-15);
                let fwd = hermiticity_test(DerivativeKind::Forward, axis, 16, eps);
                c.ge(&format!("forward-{name}"), fwd, 1.0 / eps);
            }
        },
    )
}
