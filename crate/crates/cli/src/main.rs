//! Command-line front end: run verification suites, trace geodesics,
//! certify properness and lattices, and emit machine-readable reports.

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use nalgebra::Matrix2;
use ppwave::discrete::{
    build_osc_lattice, commutator_center_test, proper_criterion_exact, properness_sampler,
    HolonomySpec,
};
use ppwave::groups::IsomElement;
use ppwave::json::{
    load_algebra, load_generators, load_geodesic_spec, load_properness_input, PropernessInput,
};
use ppwave::lie::{
    analyze_symmetric_triple, check_jacobi, derivation_block, derivation_block_f64, eigen_spectrum,
    heis, invariant_planes, is_ad_invariant, omega_heis, osc_s, osc_triple, plane_to_subalgebra,
    preserves_symplectic, transvection_triple, Flavor, PlaneClass,
};
use ppwave::model::{ModelPoint, ModelSpace, TangentVector};
use ppwave::rational::{rat, rat_i, Rat};
use ppwave::report::{Check, VerificationReport};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(name = "ppwave", about = "Verification toolkit for rank-1 pp-wave model spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Model preset (X_H | X_E) or a path to an algebra JSON file.
    #[arg(long, default_value = "X_H")]
    model: String,
    /// Path to a generator / config JSON file (command-dependent).
    #[arg(long)]
    generators: Option<PathBuf>,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// RNG seed for sampled checks.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Tolerance overrides, name=value (repeatable).
    #[arg(long = "tol", value_name = "NAME=VAL")]
    tol: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a named verification suite and emit a JSON report.
    Verify {
        #[command(flatten)]
        common: Common,
        /// algebra | metric | derivations | appendix | geodesics | leaves
        #[arg(long)]
        suite: String,
    },
    /// Trace a geodesic as CSV: t, chart coordinates, speed.
    Geodesic {
        #[command(flatten)]
        common: Common,
    },
    /// Certify a discrete action proper (exact criterion or sampler).
    Properness {
        #[command(flatten)]
        common: Common,
    },
    /// Build and certify an oscillator-group lattice from an SL(2,Z) matrix.
    Lattice {
        #[command(flatten)]
        common: Common,
    },
    /// Test the parallel-flow periodicity criterion [Γ,Γ] ∩ Z ≠ {1}.
    Flow {
        #[command(flatten)]
        common: Common,
    },
    /// Print the eigenvalue spectrum of the derivation family at (s, t).
    Spectrum {
        #[command(flatten)]
        common: Common,
    },
}

fn tol_map(tols: &[String]) -> anyhow::Result<BTreeMap<String, f64>> {
    let mut map = BTreeMap::new();
    for entry in tols {
        let (name, val) = entry
            .split_once('=')
            .with_context(|| format!("--tol expects name=value, got {:?}", entry))?;
        let v: f64 = val.parse().with_context(|| format!("bad tolerance value {:?}", val))?;
        if !(v > 0.0) && name.starts_with("tol") {
            bail!("tolerances must be positive");
        }
        map.insert(name.to_string(), v);
    }
    Ok(map)
}

fn parse_flavor(model: &str) -> Option<Flavor> {
    match model {
        "X_H" | "H" | "x_h" => Some(Flavor::H),
        "X_E" | "E" | "x_e" => Some(Flavor::E),
        _ => None,
    }
}

fn emit<T: Serialize>(value: &T, out: &Option<PathBuf>) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{}", text),
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse(); // clap exits with code 2 on usage errors
    let code = match run(cli) {
        Ok(passed) => {
            if passed {
                0
            } else {
                1
            }
        }
        Err(err) => {
            eprintln!("error: {:#}", err);
            2
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Verify { common, suite } => cmd_verify(&common, &suite),
        Command::Geodesic { common } => cmd_geodesic(&common),
        Command::Properness { common } => cmd_properness(&common),
        Command::Lattice { common } => cmd_lattice(&common),
        Command::Flow { common } => cmd_flow(&common),
        Command::Spectrum { common } => cmd_spectrum(&common),
    }
}

// ---------------------------------------------------------------------------
// verify

fn cmd_verify(common: &Common, suite: &str) -> anyhow::Result<bool> {
    let tols = tol_map(&common.tol)?;
    let float_tol = tols.get("float").copied().unwrap_or(1e-8);
    let report = match suite {
        "algebra" => suite_algebra(common)?,
        "metric" => suite_metric(),
        "derivations" => suite_derivations(common, float_tol)?,
        "appendix" => suite_appendix(),
        "geodesics" => suite_geodesics(common, float_tol)?,
        "leaves" => suite_leaves(common, float_tol),
        other => bail!("unknown suite {:?} (expected algebra | metric | derivations | appendix | geodesics | leaves)", other),
    };
    emit(&report, &common.out)?;
    Ok(report.passed())
}

fn suite_algebra(common: &Common) -> anyhow::Result<VerificationReport> {
    let mut report = VerificationReport::new("algebra");
    if parse_flavor(&common.model).is_some() || common.model == "osc" {
        for (name, alg) in [
            ("heis5", heis(2)),
            ("osc_s", osc_s()),
            ("transvection_H", transvection_triple(Flavor::H).algebra),
            ("transvection_E", transvection_triple(Flavor::E).algebra),
        ] {
            let sub = check_jacobi(&alg);
            for mut c in sub.checks {
                c.name = format!("{}::{}", name, c.name);
                report.checks.push(c);
            }
        }
    } else {
        let alg = load_algebra(Path::new(&common.model))
            .with_context(|| format!("loading algebra file {:?}", common.model))?;
        report.merge(check_jacobi(&alg));
    }
    Ok(report)
}

fn suite_metric() -> VerificationReport {
    let mut report = VerificationReport::new("metric");
    for flavor in [Flavor::H, Flavor::E] {
        let t = transvection_triple(flavor);
        let (ok, witness) = is_ad_invariant(&t.algebra, &t.form);
        report.push(if ok {
            Check::pass(&format!("{:?}::form_ad_invariant", flavor), 0.0)
        } else {
            Check::fail(&format!("{:?}::form_ad_invariant", flavor), 1.0, format!("residual {}", witness))
        });
        let sig = t.form.signature;
        report.push(if sig == (3, 3) {
            Check::pass(&format!("{:?}::signature_3_3", flavor), 0.0)
        } else {
            Check::fail(&format!("{:?}::signature_3_3", flavor), 1.0, &format!("got {:?}", sig))
        });
        // metric at the base point: V lightlike, ⟨L, V⟩ = 1
        let x = ModelSpace::new(flavor);
        let g = x.metric_at(&ModelPoint::base());
        report.push(Check::from_residual(
            &format!("{:?}::parallel_field_lightlike", flavor),
            g[(3, 3)].abs(),
            0.0,
            "g(V,V) != 0",
        ));
        report.push(Check::from_residual(
            &format!("{:?}::lightlike_pairing_normalized", flavor),
            (g[(0, 3)] - 1.0).abs(),
            0.0,
            "g(L,V) != 1",
        ));
    }
    let osc = osc_triple();
    let (ok, witness) = is_ad_invariant(&osc.algebra, &osc.form);
    report.push(if ok {
        Check::pass("osc::form_ad_invariant", 0.0)
    } else {
        Check::fail("osc::form_ad_invariant", 1.0, format!("residual {}", witness))
    });
    report
}

fn suite_derivations(common: &Common, tol: f64) -> anyhow::Result<VerificationReport> {
    let flavor = parse_flavor(&common.model)
        .with_context(|| format!("derivations suite needs a model preset, got {:?}", common.model))?;
    let mut report = VerificationReport::new("derivations");
    let mut rng = ChaCha8Rng::seed_from_u64(common.seed);

    // spectrum over sampled parameters
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let s: f64 = rng.random_range(-2.0..2.0);
        let t: f64 = rng.random_range(-2.0..2.0);
        let eigs = eigen_spectrum(&derivation_block_f64(flavor, s, t));
        let mut expect: Vec<nalgebra::Complex<f64>> = match flavor {
            Flavor::H => [s + t, s - t, -s + t, -s - t]
                .iter()
                .map(|&x| nalgebra::Complex::new(x, 0.0))
                .collect(),
            Flavor::E => vec![
                nalgebra::Complex::new(t, s),
                nalgebra::Complex::new(t, -s),
                nalgebra::Complex::new(-t, s),
                nalgebra::Complex::new(-t, -s),
            ],
        };
        expect.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        for (a, b) in eigs.iter().zip(&expect) {
            worst = worst.max((a - b).norm());
        }
    }
    report.push(Check::from_residual("spectrum_matches_family", worst, tol.max(1e-10), "eigenvalues off"));

    // symplectic identity, exact
    let om = omega_heis(2);
    let d = derivation_block(flavor, &rat(7, 5), &rat(-4, 3));
    let (holds, residual) = preserves_symplectic(&d, &om);
    report.push(if holds {
        Check::pass("symplectic_identity_exact", 0.0)
    } else {
        Check::fail("symplectic_identity_exact", 1.0, &format!("residual {}", residual))
    });

    // invariant-plane dichotomy at a sampled generic parameter
    let (s, t) = loop {
        let s: f64 = rng.random_range(0.2..2.0);
        let t: f64 = rng.random_range(0.2..2.0);
        if (s - t).abs() > 0.1 {
            break (s, t);
        }
    };
    let planes = invariant_planes(&derivation_block_f64(flavor, s, t), true)
        .context("invariant-plane scan")?;
    let check = match flavor {
        Flavor::E => {
            if planes.is_empty() {
                Check::pass("no_unimodular_invariant_plane", 0.0)
            } else {
                Check::fail("no_unimodular_invariant_plane", planes.len() as f64, "planes found")
            }
        }
        Flavor::H => {
            let both_heis = planes.len() == 2
                && planes
                    .iter()
                    .all(|p| plane_to_subalgebra(&p.span[0], &p.span[1]) == PlaneClass::Heisenberg);
            if both_heis {
                Check::pass("two_heisenberg_invariant_planes", 0.0)
            } else {
                Check::fail(
                    "two_heisenberg_invariant_planes",
                    planes.len() as f64,
                    "expected exactly two Heisenberg planes",
                )
            }
        }
    };
    report.push(check);
    Ok(report)
}

fn suite_appendix() -> VerificationReport {
    let mut report = VerificationReport::new("appendix");
    let rep = analyze_symmetric_triple(
        &osc_triple(),
        &[Rat::from_integer(0.into()), Rat::from_integer(0.into()), Rat::from_integer(0.into()), rat_i(1)],
    )
    .expect("osc triple well-formed");
    for mut c in rep.verdicts.checks {
        c.name = format!("osc::{}", c.name);
        report.checks.push(c);
    }
    for flavor in [Flavor::H, Flavor::E] {
        let t = transvection_triple(flavor);
        let mut v = vec![Rat::from_integer(0.into()); 6];
        v[5] = rat_i(1);
        let rep = analyze_symmetric_triple(&t, &v).expect("transvection triple well-formed");
        for mut c in rep.verdicts.checks {
            c.name = format!("{:?}::{}", flavor, c.name);
            report.checks.push(c);
        }
    }
    report
}

fn suite_geodesics(common: &Common, tol: f64) -> anyhow::Result<VerificationReport> {
    let flavor = parse_flavor(&common.model)
        .with_context(|| format!("geodesics suite needs a model preset, got {:?}", common.model))?;
    let x = ModelSpace::new(flavor);
    let mut rng = ChaCha8Rng::seed_from_u64(common.seed);
    let mut report = VerificationReport::new("geodesics");
    let mut worst_speed: f64 = 0.0;
    let mut worst_start: f64 = 0.0;
    for _ in 0..20 {
        let p = ModelPoint {
            l: rng.random_range(-0.5..0.5),
            alpha: [rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)],
            v: rng.random_range(-0.5..0.5),
        };
        let u = TangentVector { base: p, comp: std::array::from_fn(|_| rng.random_range(-0.5..0.5)) };
        let s0 = x.geodesic_speed(&p, &u, 0.0);
        for k in 1..=20 {
            let t = k as f64 - 10.0;
            worst_speed = worst_speed.max((x.geodesic_speed(&p, &u, t) - s0).abs());
        }
        let back = x.geodesic(&p, &u, 0.0);
        for (a, b) in back.coords().iter().zip(p.coords()) {
            worst_start = worst_start.max((a - b).abs());
        }
    }
    report.push(Check::from_residual("speed_constant", worst_speed, tol, "speed drifts"));
    report.push(Check::from_residual("starts_at_base", worst_start, 1e-12, "γ(0) != p"));
    Ok(report)
}

fn suite_leaves(common: &Common, tol: f64) -> VerificationReport {
    use ppwave::leaves::{preserves_leaf_structure, quad_form_orbit, LeafAffineMap};
    let mut rng = ChaCha8Rng::seed_from_u64(common.seed);
    let mut report = VerificationReport::new("leaves");

    // leaf translation property on both model flavors
    let mut worst: f64 = 0.0;
    for flavor in [Flavor::H, Flavor::E] {
        let x = ModelSpace::new(flavor);
        for _ in 0..10 {
            let g = IsomElement {
                s: rng.random_range(-1.0..1.0),
                t: rng.random_range(-1.0..1.0),
                xi: std::array::from_fn(|_| rng.random_range(-1.0..1.0)),
                z: rng.random_range(-1.0..1.0),
                flavor,
            };
            let c = x.leaf_function(&x.act(&g, &ModelPoint::base()).unwrap());
            for _ in 0..50 {
                let p = ModelPoint {
                    l: rng.random_range(-2.0..2.0),
                    alpha: [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)],
                    v: rng.random_range(-2.0..2.0),
                };
                let lhs = x.leaf_function(&x.act(&g, &p).unwrap());
                worst = worst.max((lhs - (x.leaf_function(&p) + c)).abs());
            }
        }
    }
    report.push(Check::from_residual("leaf_function_translates", worst, tol.max(1e-10), "f∘k ≠ f + c"));

    // structural group closure
    let mut g = LeafAffineMap::identity(2);
    let mut worst = 0.0f64;
    for _ in 0..30 {
        let factor = match rng.random_range(0..2u8) {
            0 => LeafAffineMap::boost(rng.random_range(-1.0..1.0), 2),
            _ => LeafAffineMap::unipotent(&[rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]),
        };
        g = g.compose(&factor);
        let chk = preserves_leaf_structure(&g);
        worst = worst.max(chk.metric_residual).max(chk.v_axis_residual);
    }
    report.push(Check::from_residual("structural_group_closed", worst, 1e-9, "composite leaves the group"));

    // boost-invariant quadratic
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let theta = rng.random_range(-2.0..2.0);
        let pt = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
        let before = pt[0] * pt[0] - pt[1] * pt[1];
        worst = worst.max((quad_form_orbit(&[theta], pt) - before).abs());
    }
    report.push(Check::from_residual("lorentz_quadratic_invariant", worst, 1e-11, "x²−y² moves"));
    report
}

// ---------------------------------------------------------------------------
// geodesic trace

fn cmd_geodesic(common: &Common) -> anyhow::Result<bool> {
    let flavor = parse_flavor(&common.model)
        .with_context(|| format!("geodesic needs a model preset, got {:?}", common.model))?;
    let path = common
        .generators
        .as_ref()
        .context("geodesic needs --generators pointing to a run-config JSON file")?;
    let spec = load_geodesic_spec(path).context("loading geodesic config")?;
    let tols = tol_map(&common.tol)?;
    let speed_tol = tols.get("speed").copied().unwrap_or(1e-8);

    let x = ModelSpace::new(flavor);
    let p = ModelPoint { l: spec.start[0], alpha: [spec.start[1], spec.start[2]], v: spec.start[3] };
    let u = TangentVector { base: p, comp: spec.velocity };
    let mut csv = String::from("t,l,a3,a4,v,speed\n");
    let n = ((spec.t1 - spec.t0) / spec.step).round() as usize;
    let s0 = x.geodesic_speed(&p, &u, spec.t0);
    let mut max_dev: f64 = 0.0;
    for k in 0..=n {
        let t = spec.t0 + k as f64 * spec.step;
        let q = x.geodesic(&p, &u, t);
        let s = x.geodesic_speed(&p, &u, t);
        max_dev = max_dev.max((s - s0).abs());
        csv.push_str(&format!("{},{},{},{},{},{}\n", t, q.l, q.alpha[0], q.alpha[1], q.v, s));
    }
    match &common.out {
        Some(path) => std::fs::write(path, csv)?,
        None => print!("{}", csv),
    }
    if max_dev > speed_tol {
        eprintln!("speed deviation {} exceeds tolerance {}", max_dev, speed_tol);
        return Ok(false);
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// properness / lattice / flow / spectrum

fn cmd_properness(common: &Common) -> anyhow::Result<bool> {
    let path = common.generators.as_ref().context("properness needs --generators")?;
    let input = load_properness_input(path).context("loading generators")?;
    let flavor = parse_flavor(&common.model).unwrap_or(Flavor::E);
    let model = ModelSpace::new(flavor);
    let tols = tol_map(&common.tol)?;
    let report = match input {
        PropernessInput::S0Family { s0_basis } => proper_criterion_exact(&s0_basis, &model)?,
        PropernessInput::Group(spec) => {
            if spec.generators.is_empty() {
                bail!("empty generator list");
            }
            let box_radius = tols.get("box").copied().unwrap_or(1.0);
            let word_radius = tols.get("word").copied().unwrap_or(8.0) as usize;
            properness_sampler(&spec, &model, box_radius, word_radius)?
        }
    };
    emit(&report, &common.out)?;
    Ok(report.proper != Some(false))
}

#[derive(serde::Deserialize)]
struct MatrixFile {
    matrix: [[i64; 2]; 2],
}

#[derive(Serialize)]
struct LatticeOutput {
    spec: HolonomySpec,
    certificate: ppwave::discrete::LatticeCertificate,
}

fn cmd_lattice(common: &Common) -> anyhow::Result<bool> {
    let path = common.generators.as_ref().context("lattice needs --generators with {\"matrix\": [[a,b],[c,d]]}")?;
    let text = std::fs::read_to_string(path)?;
    let mf: MatrixFile = serde_json::from_str(&text).context("parsing matrix file")?;
    let a = Matrix2::new(mf.matrix[0][0], mf.matrix[0][1], mf.matrix[1][0], mf.matrix[1][1]);
    let (spec, cert) = build_osc_lattice(&a)?;
    let passed = cert.verdicts.passed();
    emit(&LatticeOutput { spec, certificate: cert }, &common.out)?;
    Ok(passed)
}

fn cmd_flow(common: &Common) -> anyhow::Result<bool> {
    let path = common.generators.as_ref().context("flow needs --generators")?;
    let spec: HolonomySpec = load_generators(path).context("loading generators")?;
    let mut report = VerificationReport::new("parallel-flow");
    match commutator_center_test(&spec) {
        Some(central) => {
            report.push(Check::pass(
                "central_commutator",
                0.0,
            ));
            report.checks.last_mut().unwrap().witness =
                Some(format!("central element {:?}", central));
        }
        None => {
            report.push(Check::pass("central_commutator", 0.0));
            report.checks.last_mut().unwrap().witness = Some("none".into());
        }
    }
    emit(&report, &common.out)?;
    Ok(true)
}

#[derive(Serialize)]
struct SpectrumOutput {
    flavor: String,
    s: f64,
    t: f64,
    eigenvalues: Vec<(f64, f64)>,
}

fn cmd_spectrum(common: &Common) -> anyhow::Result<bool> {
    let flavor = parse_flavor(&common.model)
        .with_context(|| format!("spectrum needs a model preset, got {:?}", common.model))?;
    let tols = tol_map(&common.tol)?;
    let s = tols.get("s").copied().unwrap_or(1.0);
    let t = tols.get("t").copied().unwrap_or(0.0);
    let eigs = eigen_spectrum(&derivation_block_f64(flavor, s, t));
    let out = SpectrumOutput {
        flavor: format!("{:?}", flavor),
        s,
        t,
        eigenvalues: eigs.iter().map(|c| (c.re, c.im)).collect(),
    };
    emit(&out, &common.out)?;
    Ok(true)
}
