//! Batch front end: reproducible sweeps and reports for the lattice Dirac
//! schemes. Numeric grids go to CSV, reports to JSON; every output directory
//! gets a sidecar with the fully resolved configuration and seed.
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 contract violation from
//! `verify-all`.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use latticefd::covering;
use latticefd::doublers;
use latticefd::evolve::{
    conforming_flavor, naive_two_step_evolve, ContinuumOracle, StateVector, Stepper, WavePacket,
};
use latticefd::fourier::symbol_of;
use latticefd::greens::{green_function_with, ModeOffsets};
use latticefd::lattice::{bragg_bz, DirectLattice};
use latticefd::schemes::{SchemeKind, SchemeSpec};
use latticefd::symmetry::{
    chiral_commutator, chiral_projectors, left_red_initial, neutrino_sector_run, GaugePhaseField,
};
use latticefd::verify::{run_all, VerifyConfig};

#[derive(Parser)]
#[command(name = "latticefd", version, about = "lattice Dirac scheme analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum LatticeName {
    Square2d,
    Oblique2d,
    Oblique2dEmbedded,
    Bcc,
    Oblique4d,
}

#[derive(Args)]
struct SchemeArgs {
    /// Scheme JSON file, e.g. {"kind":"DiracQW1D","mass":0.5,"epsilon":0.1}
    #[arg(long)]
    scheme: Option<PathBuf>,
    /// Scheme kind, as an alternative to --scheme
    #[arg(long)]
    kind: Option<String>,
    #[arg(long)]
    mass: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
}

impl SchemeArgs {
    fn resolve(&self) -> Result<SchemeSpec> {
        if let Some(path) = &self.scheme {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let spec: SchemeSpec = serde_json::from_str(&text)?;
            return SchemeSpec::new(spec.kind, spec.mass, spec.epsilon).map_err(|e| anyhow!("{e}"));
        }
        let kind_name = self
            .kind
            .as_deref()
            .ok_or_else(|| anyhow!("pass --scheme FILE or --kind NAME"))?;
        let kind: SchemeKind = serde_json::from_value(serde_json::json!(kind_name))
            .map_err(|_| anyhow!("unknown scheme kind {kind_name}"))?;
        SchemeSpec::new(kind, self.mass.unwrap_or(0.5), self.epsilon.unwrap_or(0.1))
            .map_err(|e| anyhow!("{e}"))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Brillouin-zone geometry of a named lattice
    Bz {
        #[arg(long, value_enum)]
        lattice: LatticeName,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        /// Bragg enumeration coefficient bound
        #[arg(long, default_value_t = 2)]
        bound: i64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Determinant sweep over the zone as CSV
    Dispersion {
        #[command(flatten)]
        scheme: SchemeArgs,
        #[arg(long, default_value_t = 64)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Half-period shift scan
    Doublers {
        #[command(flatten)]
        scheme: SchemeArgs,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Green function table on a periodic grid
    Green {
        #[command(flatten)]
        scheme: SchemeArgs,
        #[arg(long, default_value_t = 16)]
        nt: usize,
        #[arg(long, default_value_t = 16)]
        nx: usize,
        /// Half-integer-shifted (anti-periodic) time modes
        #[arg(long)]
        time_antiperiodic: bool,
        /// Print the defining-identity deviation instead of writing the table
        #[arg(long)]
        verify: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Wave-packet evolution and continuum-convergence sweeps
    Evolve {
        #[command(flatten)]
        scheme: SchemeArgs,
        /// Packet JSON file {"center":..,"width":..,"momentum":..}
        #[arg(long)]
        packet: Option<PathBuf>,
        #[arg(long, default_value_t = 50)]
        steps: usize,
        #[arg(long, default_value_t = 256)]
        sites: usize,
        /// Comma-separated spacings; runs the convergence sweep instead
        #[arg(long)]
        eps_sweep: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Chiral commutator norms for every scheme kind
    Chiral {
        #[arg(long, default_value_t = 0.0)]
        mass: f64,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Gauged massless sector-stability run
    Neutrino {
        #[arg(long, default_value_t = 100)]
        steps: usize,
        #[arg(long, default_value_t = 64)]
        sites: usize,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, default_value_t = 1)]
        theta_seed: u64,
        #[arg(long, default_value_t = -1.0)]
        g_left: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fiber cardinalities and sheet consistency of the zone covers
    Covering {
        #[arg(long, default_value_t = 500)]
        samples: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 0.5)]
        mass: f64,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
    },
    /// Run the acceptance suite; exit 2 on any failed criterion
    VerifyAll {
        /// Smaller sample counts, identical tolerances
        #[arg(long)]
        quick: bool,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
}

/// Dies quietly when a downstream pipe closes, like standard stream tools.
#[cfg(unix)]
fn reset_sigpipe() {
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
}

#[cfg(not(unix))]
fn reset_sigpipe() {}

fn main() -> ExitCode {
    reset_sigpipe();
    latticefd::exec::init_thread_cap_from_env();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version are not usage errors
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cmd: Command) -> Result<ExitCode> {
    match cmd {
        Command::Bz {
            lattice,
            epsilon,
            bound,
            out,
        } => cmd_bz(lattice, epsilon, bound, out),
        Command::Dispersion { scheme, grid, out } => cmd_dispersion(&scheme.resolve()?, grid, out),
        Command::Doublers {
            scheme,
            samples,
            tol,
            seed,
            out,
        } => cmd_doublers(&scheme.resolve()?, samples, tol, seed, out),
        Command::Green {
            scheme,
            nt,
            nx,
            time_antiperiodic,
            verify,
            out,
        } => cmd_green(&scheme.resolve()?, nt, nx, time_antiperiodic, verify, out),
        Command::Evolve {
            scheme,
            packet,
            steps,
            sites,
            eps_sweep,
            out,
        } => cmd_evolve(&scheme.resolve()?, packet, steps, sites, eps_sweep, out),
        Command::Chiral {
            mass,
            epsilon,
            samples,
            seed,
        } => cmd_chiral(mass, epsilon, samples, seed),
        Command::Neutrino {
            steps,
            sites,
            epsilon,
            theta_seed,
            g_left,
            out,
        } => cmd_neutrino(steps, sites, epsilon, theta_seed, g_left, out),
        Command::Covering {
            samples,
            seed,
            mass,
            epsilon,
        } => cmd_covering(samples, seed, mass, epsilon),
        Command::VerifyAll { quick, seed } => cmd_verify_all(quick, seed),
    }
}

fn write_output(out: &Option<PathBuf>, name: &str, contents: &str) -> Result<()> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            let path = dir.join(name);
            fs::write(&path, contents)?;
            println!("wrote {}", path.display());
        }
        None => print!("{contents}"),
    }
    Ok(())
}

fn write_meta(out: &Option<PathBuf>, name: &str, meta: serde_json::Value) -> Result<()> {
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        let path: &Path = &dir.join(name);
        fs::write(path, serde_json::to_string_pretty(&meta)?)?;
    }
    Ok(())
}

fn cmd_bz(
    lattice: LatticeName,
    epsilon: f64,
    bound: i64,
    out: Option<PathBuf>,
) -> Result<ExitCode> {
    let lat = match lattice {
        LatticeName::Square2d => DirectLattice::square(2, epsilon),
        LatticeName::Oblique2d => DirectLattice::oblique_2d(epsilon),
        LatticeName::Oblique2dEmbedded => DirectLattice::oblique_2d_embedded(epsilon),
        LatticeName::Bcc => DirectLattice::body_centered_cubic(epsilon),
        LatticeName::Oblique4d => DirectLattice::oblique_4d(epsilon),
    };
    let rec = lat.reciprocal().map_err(|e| anyhow!("{e}"))?;
    let bz = bragg_bz(&rec, bound).map_err(|e| anyhow!("{e}"))?;
    let doc = serde_json::json!({
        "lattice": lat.to_json(),
        "reciprocal_physical": rec.physical(),
        "brillouin_zone": bz.to_json(),
        "bound": bound,
    });
    write_output(
        &out,
        "bz.json",
        &format!("{}\n", serde_json::to_string_pretty(&doc)?),
    )?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_dispersion(spec: &SchemeSpec, grid: usize, out: Option<PathBuf>) -> Result<ExitCode> {
    if grid == 0 {
        bail!("grid must be positive");
    }
    let symbol = symbol_of(spec);
    let hw = std::f64::consts::PI / spec.epsilon;
    let step = 2.0 * hw / grid as f64;
    let spatial = spec.kind.spatial_dim();
    let mut csv = String::from("E,p,re_det,im_det,abs_det\n");
    for i in 0..grid {
        let e = -hw + (i as f64 + 0.5) * step;
        for j in 0..grid {
            let p = -hw + (j as f64 + 0.5) * step;
            let mut momentum = vec![0.0; spatial];
            momentum[0] = p;
            let d = symbol.det(e, &momentum);
            csv.push_str(&format!("{e},{p},{},{},{}\n", d.re, d.im, d.norm()));
        }
    }
    write_meta(
        &out,
        "dispersion.meta.json",
        serde_json::json!({
            "scheme": spec, "grid": grid,
            "axes": "E and p_x at cell centers; other momenta zero",
        }),
    )?;
    write_output(&out, "dispersion.csv", &csv)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_doublers(
    spec: &SchemeSpec,
    samples: usize,
    tol: f64,
    seed: u64,
    out: Option<PathBuf>,
) -> Result<ExitCode> {
    let report = doublers::scan_doublers(spec, samples, tol, seed);
    println!("{:<14} {:<16} {}", "shift", "class", "max deviation");
    for (shift, dev) in &report.invariant_classes {
        println!(
            "{:<14} {:<16} {:.3e}",
            format!("{:?}", shift.as_ints()),
            format!("{:?}", shift.classification()),
            dev
        );
    }
    println!(
        "{} invariant classes out of {} candidates",
        report.count(),
        report.candidate_count
    );
    let doc = report.to_json();
    write_output(
        &out,
        "doublers.json",
        &format!("{}\n", serde_json::to_string_pretty(&doc)?),
    )?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_green(
    spec: &SchemeSpec,
    nt: usize,
    nx: usize,
    time_antiperiodic: bool,
    verify: bool,
    out: Option<PathBuf>,
) -> Result<ExitCode> {
    let offsets = ModeOffsets {
        time_antiperiodic,
        space_antiperiodic: false,
    };
    let table = green_function_with(spec, &[nt, nx], offsets).map_err(|e| anyhow!("{e}"))?;
    if verify {
        println!(
            "defining-identity deviation: {:.3e}",
            table.defining_identity_defect()
        );
        return Ok(ExitCode::SUCCESS);
    }
    let dim = spec.matrix_dim();
    let mut csv = String::from("dn,dk,row,col,re,im\n");
    for dn in 0..nt {
        for dk in 0..nx {
            let (_, g) = table.value(&[dn as i64, dk as i64]);
            for row in 0..dim {
                for col in 0..dim {
                    let v = g[(row, col)];
                    csv.push_str(&format!("{dn},{dk},{row},{col},{},{}\n", v.re, v.im));
                }
            }
        }
    }
    write_meta(
        &out,
        "green.meta.json",
        serde_json::json!({
            "scheme": spec, "nt": nt, "nx": nx,
            "time_antiperiodic": time_antiperiodic,
        }),
    )?;
    write_output(&out, "green.csv", &csv)?;
    Ok(ExitCode::SUCCESS)
}

fn load_packet(path: &Option<PathBuf>) -> Result<WavePacket> {
    match path {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Ok(serde_json::from_str(&text)?)
        }
        None => Ok(WavePacket {
            center: 0.0,
            width: 1.0,
            momentum: 0.5,
        }),
    }
}

/// Packet state with amplitudes on the staggered-conforming flavor slots.
fn packet_state(spec: &SchemeSpec, packet: &WavePacket, sites: usize) -> Result<StateVector> {
    if spec.kind.spatial_dim() != 1 {
        bail!("packet evolution drives the 1D kinds; use the library for 3D states");
    }
    let centered = WavePacket {
        center: sites as f64 * spec.epsilon / 2.0,
        ..*packet
    };
    let data = centered.sample(spec.mass, sites, spec.epsilon);
    let mut state = StateVector::zeros(spec, vec![sites], 0).map_err(|e| anyhow!("{e}"))?;
    for (k, v) in data.iter().enumerate() {
        let flavor = if spec.kind.is_flavored() {
            conforming_flavor(spec.kind, 0, &[k as i64])
        } else {
            0
        };
        *state.amp_mut(k, state.comp(0, flavor)) = v[0];
        *state.amp_mut(k, state.comp(1, flavor)) = v[1];
    }
    Ok(state)
}

fn cmd_evolve(
    spec: &SchemeSpec,
    packet_path: Option<PathBuf>,
    steps: usize,
    sites: usize,
    eps_sweep: Option<String>,
    out: Option<PathBuf>,
) -> Result<ExitCode> {
    let packet = load_packet(&packet_path)?;

    if let Some(sweep) = eps_sweep {
        let eps_values: Vec<f64> = sweep
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| anyhow!("bad epsilon {s}: {e}"))
            })
            .collect::<Result<_>>()?;
        let report = latticefd::evolve::continuum_convergence(
            spec.kind,
            spec.mass,
            &packet,
            2.0,
            &eps_values,
        )
        .map_err(|e| anyhow!("{e}"))?;
        let mut csv = String::from("epsilon,max_error\n");
        for (eps, err) in &report.errors {
            csv.push_str(&format!("{eps},{err}\n"));
        }
        println!("fitted order: {:.3}", report.fitted_order);
        write_meta(
            &out,
            "convergence.meta.json",
            serde_json::json!({
                "scheme_kind": spec.kind, "mass": spec.mass, "packet": packet,
                "fitted_order": report.fitted_order,
            }),
        )?;
        write_output(&out, "convergence.csv", &csv)?;
        return Ok(ExitCode::SUCCESS);
    }

    let sites = if sites % 2 == 1 { sites + 1 } else { sites };
    let mut norms = String::from("step,norm,flavor_defect\n");
    let final_state = if spec.kind.is_first_order() {
        let stepper = Stepper::new(spec).map_err(|e| anyhow!("{e}"))?;
        let mut state = packet_state(spec, &packet, sites)?;
        for step_idx in 0..steps {
            state = stepper.step(&state).map_err(|e| anyhow!("{e}"))?;
            let defect = if spec.kind.is_flavored() {
                latticefd::evolve::flavor_form_defect(&state).map_err(|e| anyhow!("{e}"))?
            } else {
                0.0
            };
            norms.push_str(&format!("{},{},{}\n", step_idx + 1, state.norm(), defect));
        }
        state
    } else {
        // second-order scheme: seed the second slice with the exact
        // continuum propagator over one step
        let slice0 = packet_state(spec, &packet, sites)?;
        let oracle = ContinuumOracle { mass: spec.mass };
        let data: Vec<[latticefd::Complex64; 2]> = (0..sites)
            .map(|k| [slice0.amp(k, 0), slice0.amp(k, 1)])
            .collect();
        let next = oracle.evolve(&data, spec.epsilon, spec.epsilon, 0.0);
        let mut slice1 = StateVector::zeros(spec, vec![sites], 1).map_err(|e| anyhow!("{e}"))?;
        for (k, v) in next.iter().enumerate() {
            *slice1.amp_mut(k, 0) = v[0];
            *slice1.amp_mut(k, 1) = v[1];
        }
        let mut prev = slice0;
        let mut curr = slice1;
        for step_idx in 0..steps {
            let nxt = naive_two_step_evolve(spec, &prev, &curr, 1).map_err(|e| anyhow!("{e}"))?;
            prev = curr;
            curr = nxt;
            norms.push_str(&format!("{},{},0\n", step_idx + 1, curr.norm()));
        }
        curr
    };

    let mut final_csv = String::from("site,x,comp,re,im\n");
    for k in 0..final_state.site_count() {
        for comp in 0..final_state.component_dim() {
            let a = final_state.amp(k, comp);
            final_csv.push_str(&format!(
                "{k},{},{comp},{},{}\n",
                k as f64 * spec.epsilon,
                a.re,
                a.im
            ));
        }
    }
    write_meta(
        &out,
        "evolve.meta.json",
        serde_json::json!({
            "scheme": spec, "packet": packet, "steps": steps, "sites": sites,
        }),
    )?;
    write_output(&out, "norms.csv", &norms)?;
    write_output(&out, "final_state.csv", &final_csv)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_chiral(mass: f64, epsilon: f64, samples: usize, seed: u64) -> Result<ExitCode> {
    println!("{:<18} {:<14} {}", "kind", "projector-alg", "max |[M, P]|");
    for kind in [
        SchemeKind::NaiveSymmetric1D,
        SchemeKind::DiracQW1D,
        SchemeKind::DiracQW3D,
        SchemeKind::FlavoredQW1D,
        SchemeKind::FlavoredQW3D,
    ] {
        let spec = SchemeSpec::new(kind, mass, epsilon).map_err(|e| anyhow!("{e}"))?;
        let alg = chiral_projectors(kind).algebra_defect();
        let norm = chiral_commutator(&spec, samples, seed);
        println!("{:<18} {:<14.3e} {:.6e}", format!("{kind:?}"), alg, norm);
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_neutrino(
    steps: usize,
    sites: usize,
    epsilon: f64,
    theta_seed: u64,
    g_left: f64,
    out: Option<PathBuf>,
) -> Result<ExitCode> {
    let spec =
        SchemeSpec::new(SchemeKind::FlavoredQW1D, 0.0, epsilon).map_err(|e| anyhow!("{e}"))?;
    let sites = if sites % 2 == 1 { sites + 1 } else { sites };
    let initial = left_red_initial(&spec, sites).map_err(|e| anyhow!("{e}"))?;
    let phases = GaugePhaseField {
        g_left,
        ..GaugePhaseField::neutrino_like(theta_seed)
    };
    let result =
        neutrino_sector_run(&spec, &phases, &initial, steps).map_err(|e| anyhow!("{e}"))?;
    let mut csv = String::from("step,leakage\n");
    for (i, l) in result.per_step_leakage.iter().enumerate() {
        csv.push_str(&format!("{},{}\n", i + 1, l));
    }
    println!(
        "final leakage out of the left-handed flavor-0 sector: {:.3e}",
        result.leakage
    );
    write_meta(
        &out,
        "neutrino.meta.json",
        serde_json::json!({
            "epsilon": epsilon, "steps": steps, "sites": sites,
            "theta_seed": theta_seed, "g_left": g_left, "g_right": 0.0,
        }),
    )?;
    write_output(&out, "neutrino.csv", &csv)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_covering(samples: usize, seed: u64, mass: f64, epsilon: f64) -> Result<ExitCode> {
    use std::collections::BTreeMap;
    let mut rng_state = seed;
    let mut next = || {
        // xorshift for the sample points; covering functions are pure
        rng_state ^= rng_state << 13;
        rng_state ^= rng_state >> 7;
        rng_state ^= rng_state << 17;
        (rng_state as f64 / u64::MAX as f64) - 0.5
    };
    let mut histogram: BTreeMap<usize, usize> = BTreeMap::new();
    for _ in 0..samples {
        let z = covering::phi(covering::TorusPoint::new(latticefd::Complex64::new(
            next(),
            next(),
        )));
        *histogram
            .entry(covering::fiber_by_enumeration(z).len())
            .or_default() += 1;
    }
    println!("two-cover fiber cardinality histogram: {histogram:?}");
    let mut histogram3: BTreeMap<usize, usize> = BTreeMap::new();
    for _ in 0..samples.min(200) {
        let mut pts = Vec::new();
        for _ in 0..3 {
            pts.push(covering::phi(covering::TorusPoint::new(
                latticefd::Complex64::new(next(), next()),
            )));
        }
        *histogram3
            .entry(covering::fiber3(pts[0], pts[1], pts[2]).len())
            .or_default() += 1;
    }
    println!("eight-cover fiber cardinality histogram: {histogram3:?}");
    println!(
        "projection well-definedness deviation: {:.3e}",
        covering::phi2_well_defined_check(samples.min(300), seed)
    );
    let spec =
        SchemeSpec::new(SchemeKind::FlavoredQW1D, mass, epsilon).map_err(|e| anyhow!("{e}"))?;
    let sheets =
        covering::det_sheet_consistency(&spec, samples, seed).map_err(|e| anyhow!("{e}"))?;
    println!("sheet |det| consistency deviation: {sheets:.3e}");
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify_all(quick: bool, seed: u64) -> Result<ExitCode> {
    let results = run_all(&VerifyConfig { quick, seed });
    let mut all_ok = true;
    for r in &results {
        println!(
            "[{}] criterion {:02} ({:.2}s) {} -- {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.id,
            r.seconds,
            r.name,
            r.detail
        );
        all_ok &= r.passed;
    }
    if all_ok {
        println!("all criteria passed");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("contract violation");
        Ok(ExitCode::from(2))
    }
}
