use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;

use npch_core::acceptance::{results_json, Suite, CRITERIA};
use npch_core::bochner::{
    check_commutation, check_form4, siu_residual_flat, standard_generators, Generator,
    ResidualReport, SiuReport, TestMap,
};
use npch_core::cylinder::{
    bump_loop, calculus_weight_check, clipped_oscillation, energy_growth_profile, fermi_loop,
    helix_loop, singular_set_flags, solve_punctured_disk, theta_energy_function,
    uniqueness_probe, CalculusReport, CylinderSection, Curve, LevelReport, Prototype,
    RelaxParams, Seed, SolveOutcome, SolveParams,
};
use npch_core::isometry::{
    analyze, decay_ray, fit_exponential_decay, DecayAnalysis, DecayFit, IsometryAnalysis,
};
use npch_core::npc::{check_cat_kappa, check_npc_inequality, InequalityReport};
use npch_core::report::{
    csv, section_to_bin, summary_line, to_json, ArtifactWriter, CheckOutcome, RunManifest,
};
use npch_core::rng::{task_rng, task_seed};
use npch_core::{
    Classification, Error, Geometry, Isometry, IsometryDescriptor, Result, SpaceDescriptor,
};

use crate::config::{json_arg, resolve};
use crate::{AcceptArgs, BochnerArgs, CalculusArgs, CylinderArgs, IsometryArgs, SpaceArgs};

/// Worker count: available parallelism, capped by `NPCH_THREADS`.
fn workers() -> usize {
    let avail = std::thread::available_parallelism().map_or(1, |n| n.get());
    match std::env::var("NPCH_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        Some(cap) if cap >= 1 => avail.min(cap),
        _ => avail,
    }
}

fn check(name: &str, passed: bool, detail: String) -> CheckOutcome {
    CheckOutcome {
        name: name.to_string(),
        passed,
        detail,
    }
}

fn print_checks(checks: &[CheckOutcome]) -> bool {
    for c in checks {
        println!("{}", summary_line(&c.name, c.passed, &c.detail));
    }
    checks.iter().all(|c| c.passed)
}

/// Writes a single JSON report to `path`, creating parent directories.
fn write_report<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, to_json(value)?).map_err(|e| Error::io(path, e))
}

fn finish_dir(
    writer: ArtifactWriter,
    command: &str,
    config: &impl Serialize,
    seed: u64,
    checks: Vec<CheckOutcome>,
    start: Instant,
) -> Result<()> {
    let mut manifest = RunManifest::new(command, serde_json::to_value(config)?, seed);
    manifest.checks = checks;
    manifest.wall_seconds = start.elapsed().as_secs_f64();
    writer.finish(manifest)?;
    Ok(())
}

/// Parses a space string, taking a missing `spd` or `euclidean` dimension
/// from the size of the isometry.
fn parse_space(name: &str, iso: &serde_json::Value) -> Result<SpaceDescriptor> {
    let dim = match name {
        "spd" => iso.as_array().map(|rows| rows.len()),
        "euclidean" | "r" => iso
            .get("translation")
            .and_then(|t| t.as_array())
            .map(|t| t.len()),
        _ => None,
    };
    match dim {
        Some(n) => SpaceDescriptor::parse(&format!("{name}:{n}")),
        None => SpaceDescriptor::parse(name),
    }
}

fn required<T>(v: Option<T>, flag: &str) -> Result<T> {
    v.ok_or_else(|| Error::Usage(format!("missing --{flag}")))
}

// ---------------------------------------------------------------- space check

#[derive(Serialize)]
struct SpaceConfig {
    space: String,
    samples: usize,
    kappa: Option<f64>,
    tol: f64,
    seed: u64,
}

#[derive(Serialize)]
struct SpaceReport<'a> {
    space: &'a SpaceDescriptor,
    npc: InequalityReport,
    cat_kappa: Option<InequalityReport>,
}

pub fn space_check(flags: SpaceArgs) -> Result<bool> {
    let start = Instant::now();
    let a = resolve(&flags, flags.config.as_deref())?;
    let cfg = SpaceConfig {
        space: required(a.space, "space")?,
        samples: a.samples.unwrap_or(1000),
        kappa: a.kappa,
        tol: a.tol.unwrap_or(1e-9),
        seed: a.seed.unwrap_or(0),
    };
    let space = SpaceDescriptor::parse(&cfg.space)?;
    let npc = check_npc_inequality(&space, cfg.samples, task_seed(cfg.seed, 0));
    let mut checks = vec![check(
        "npc-inequality",
        npc.holds(cfg.tol),
        format!("min residual {:e} over {} samples", npc.min_residual, npc.samples),
    )];
    let cat_kappa = match cfg.kappa {
        Some(k) => {
            let rep = check_cat_kappa(&space, k, cfg.samples, task_seed(cfg.seed, 1))?;
            checks.push(check(
                "cat-kappa",
                rep.holds(cfg.tol),
                format!("kappa {k}, min residual {:e}", rep.min_residual),
            ));
            Some(rep)
        }
        None => None,
    };
    let report = SpaceReport {
        space: &space,
        npc,
        cat_kappa,
    };
    if let Some(dir) = &a.out {
        let mut w = ArtifactWriter::new(dir)?;
        w.write_json("report.json", &report)?;
        finish_dir(w, "space-check", &cfg, cfg.seed, checks.clone(), start)?;
    }
    Ok(print_checks(&checks))
}

// ----------------------------------------------------------- isometry analyze

#[derive(Serialize)]
struct IsometryReport {
    isometry: IsometryDescriptor,
    analysis: IsometryAnalysis,
    /// Present for matrix isometries of `P(n)`.
    decay: Option<DecayAnalysis>,
    /// `(t, d(c(t), I c(t)))` along the decay ray for the other spaces.
    series: Vec<(f64, f64)>,
    fit: Option<DecayFit>,
}

fn generic_series<G: Geometry, I: Isometry<G>>(
    g: &G,
    iso: &I,
    tmax: f64,
    steps: usize,
) -> Result<Vec<(f64, f64)>> {
    (0..=steps)
        .map(|k| {
            let t = tmax * k as f64 / steps as f64;
            Ok((t, iso.ray_displacement(g, t)?))
        })
        .collect()
}

pub fn isometry_analyze(flags: IsometryArgs) -> Result<bool> {
    let a = resolve(&flags, flags.config.as_deref())?;
    let value = json_arg(a.matrix.as_deref(), a.matrix_file.as_deref(), "matrix")?;
    let space = parse_space(&required(a.space.clone(), "space")?, &value)?;
    let iso = IsometryDescriptor::from_json(&space, &value)?;
    let tmax = a.tmax.unwrap_or(40.0);
    let steps = a.steps.unwrap_or(400);
    if !(tmax > 0.0) || steps < 16 {
        return Err(Error::Usage("need --tmax > 0 and --steps >= 16".into()));
    }
    let analysis = iso.analyze(&space)?;
    let (decay, series) = match (&space, &iso) {
        (SpaceDescriptor::Spd(_), IsometryDescriptor::Spd { matrix }) => {
            let d = decay_ray(matrix, tmax, steps)?;
            let s = d.series.clone();
            (Some(d), s)
        }
        (SpaceDescriptor::Hyperbolic2(g), IsometryDescriptor::Mobius { matrix }) => {
            (None, generic_series(g, matrix, tmax, steps)?)
        }
        (SpaceDescriptor::Euclidean(g), IsometryDescriptor::Rigid(m)) => {
            (None, generic_series(g, m, tmax, steps)?)
        }
        (SpaceDescriptor::Tree(g), IsometryDescriptor::Tree(m)) => {
            (None, generic_series(g, m, tmax, steps)?)
        }
        _ => return Err(Error::Usage("isometry does not match the space".into())),
    };
    let fit = match &decay {
        Some(d) => Some(d.fit.clone()),
        None => Some(fit_exponential_decay(&series)?),
    };
    let mut checks = vec![check(
        "classification",
        true,
        format!(
            "{:?}, translation length {}",
            analysis.classification, analysis.translation_length
        ),
    )];
    if let Some(f) = &fit {
        if analysis.classification == Classification::Parabolic {
            checks.push(check(
                "decay-fit",
                f.a > 0.0 && f.r_squared >= 0.99,
                format!("Delta {:e}, a {}, b {}, R^2 {}", f.delta, f.a, f.b, f.r_squared),
            ));
        }
    }
    let report = IsometryReport {
        isometry: iso,
        analysis,
        decay,
        series,
        fit,
    };
    match &a.out {
        Some(path) => write_report(path, &report)?,
        None => print!("{}", to_json(&report)?),
    }
    Ok(print_checks(&checks))
}

// ------------------------------------------------------ solve and uniqueness

#[derive(Debug, Clone, Serialize)]
struct CylinderConfig {
    target: String,
    twist: serde_json::Value,
    boundary: String,
    amplitude: f64,
    #[serde(rename = "T0")]
    t0: f64,
    doublings: u32,
    ntheta: usize,
    aspect: f64,
    tol: f64,
    max_sweeps: usize,
    omega: Option<f64>,
    cauchy_tol: f64,
    init: String,
    init_amplitude: f64,
    sup_tol: f64,
    seed: u64,
}

impl CylinderConfig {
    fn from_args(a: CylinderArgs) -> Result<Self> {
        let target = a.target.unwrap_or_else(|| "h2".into());
        let twist = match (&a.twist, &a.twist_file) {
            (None, None) if target == "h2" || target == "hyperbolic2" => {
                serde_json::json!([[std::f64::consts::E.sqrt(), 0.0], [0.0, 1.0 / std::f64::consts::E.sqrt()]])
            }
            _ => json_arg(a.twist.as_deref(), a.twist_file.as_deref(), "twist")?,
        };
        Ok(Self {
            boundary: a.boundary.unwrap_or_else(|| "auto".into()),
            target,
            twist,
            amplitude: a.amplitude.unwrap_or(0.1),
            t0: a.t0.unwrap_or(10.0),
            doublings: a.doublings.unwrap_or(2),
            ntheta: a.ntheta.unwrap_or(64),
            aspect: a.aspect.unwrap_or(1.0),
            tol: a.tol.unwrap_or(1e-10),
            max_sweeps: a.max_sweeps.unwrap_or(200_000),
            omega: a.omega,
            cauchy_tol: a.cauchy_tol.unwrap_or(1e-6),
            init: a.init.unwrap_or_else(|| "prototype".into()),
            init_amplitude: a.init_amplitude.unwrap_or(0.5),
            sup_tol: a.sup_tol.unwrap_or(1e-5),
            seed: a.seed.unwrap_or(0),
        })
    }

    fn params(&self) -> SolveParams {
        SolveParams {
            t0: self.t0,
            doublings: self.doublings,
            n_theta: self.ntheta,
            aspect: self.aspect,
            relax: RelaxParams {
                tol: self.tol,
                max_sweeps: self.max_sweeps,
                omega: self.omega,
            },
            cauchy_tol: self.cauchy_tol,
        }
    }

    fn init_seed(&self) -> Result<Seed> {
        match self.init.as_str() {
            "prototype" => Ok(Seed::Prototype),
            "perturbed" => Ok(Seed::Perturbed {
                seed: task_seed(self.seed, 1),
                amplitude: self.init_amplitude,
            }),
            "bridge" => Ok(Seed::ConstantBridge),
            other => Err(Error::Usage(format!(
                "unknown --init {other:?}; expected prototype, perturbed or bridge"
            ))),
        }
    }
}

/// Boundary loop: a helix through the base point, optionally bumped towards
/// a seeded random anchor.
fn generic_boundary<G, I>(g: &Arc<G>, twist: &I, cfg: &CylinderConfig) -> Result<Curve<G::Point>>
where
    G: Geometry + 'static,
    I: Isometry<G> + Clone + 'static,
{
    let base = helix_loop(g.clone(), twist.clone(), g.base_point());
    match cfg.boundary.as_str() {
        "helix" => Ok(base),
        "bump" | "auto" => {
            let anchor = g.sample_point(&mut task_rng(cfg.seed, 0), 1.0);
            Ok(bump_loop(g.clone(), twist.clone(), base, anchor, cfg.amplitude))
        }
        "fermi" => Err(Error::Usage(
            "--boundary fermi needs the h2 target with a hyperbolic twist".into(),
        )),
        other => Err(Error::Usage(format!("unknown --boundary {other:?}"))),
    }
}

#[derive(Serialize)]
struct ProfileSummary {
    e_rho: f64,
    slope: f64,
    slope_ratio: f64,
    intercept: f64,
    bounded_defect: f64,
    total_energy: f64,
    modified_energy: f64,
}

#[derive(Serialize)]
struct ThetaSummary {
    delta_f: f64,
    max_increase: f64,
    monotone_from: f64,
    min_f: f64,
}

#[derive(Serialize)]
struct SolveReport {
    config: CylinderConfig,
    analysis: IsometryAnalysis,
    levels: Vec<LevelReport>,
    cauchy: Vec<f64>,
    lower_bound_margins: Vec<f64>,
    profile: ProfileSummary,
    theta_energy: ThetaSummary,
    extra: Option<serde_json::Value>,
    checks: Vec<CheckOutcome>,
}

/// Diagnostics, checks and artifacts of one solve.
fn report_solve<G, I>(
    g: &G,
    twist: &I,
    cfg: &CylinderConfig,
    out: &SolveOutcome<G, I>,
    extra: Option<serde_json::Value>,
    writer: Option<&mut ArtifactWriter>,
) -> Result<Vec<CheckOutcome>>
where
    G: Geometry,
    I: Isometry<G>,
{
    let s = &out.section;
    let e_rho = out.e_rho;
    let profile = energy_growth_profile(g, s, e_rho);
    let theta = theta_energy_function(g, s, e_rho, 2.0);
    let h = s.grid.h_theta();
    let margin = out.lower_bound_margins.iter().copied().fold(f64::INFINITY, f64::min);
    let mut checks = vec![
        check(
            "lower-bound",
            margin >= -10.0 * h * h,
            format!("smallest per-length defect {margin:e} (allowed {:e})", -10.0 * h * h),
        ),
        check(
            "theta-energy",
            theta.nonincreasing(),
            format!(
                "max increase beyond t=2 {:e}, slack {:e}",
                theta.max_increase, theta.delta_f
            ),
        ),
    ];
    if e_rho > 0.0 {
        checks.push(check(
            "energy-slope",
            (0.98..=1.02).contains(&profile.slope_ratio()),
            format!(
                "slope / E_rho = {}, bounded defect {}",
                profile.slope_ratio(),
                profile.bounded_defect
            ),
        ));
    }
    if let Some(w) = writer {
        w.write(
            "profile.csv",
            csv(
                &["t1", "t2", "energy", "slope_residual"],
                profile
                    .windows
                    .iter()
                    .map(|w| vec![w.t_start, w.t_end, w.energy, w.defect]),
            )
            .as_bytes(),
        )?;
        w.write(
            "F_of_t.csv",
            csv(
                &["t", "F"],
                theta.t.iter().zip(&theta.f).map(|(t, f)| vec![*t, *f]),
            )
            .as_bytes(),
        )?;
        let report = SolveReport {
            config: cfg.clone(),
            analysis: analyze(g, twist),
            levels: out.levels.clone(),
            cauchy: out.cauchy.clone(),
            lower_bound_margins: out.lower_bound_margins.clone(),
            profile: ProfileSummary {
                e_rho,
                slope: profile.slope,
                slope_ratio: profile.slope_ratio(),
                intercept: profile.intercept,
                bounded_defect: profile.bounded_defect,
                total_energy: profile.total_energy,
                modified_energy: profile.modified_energy,
            },
            theta_energy: ThetaSummary {
                delta_f: theta.delta_f,
                max_increase: theta.max_increase,
                monotone_from: theta.monotone_from,
                min_f: theta.min_f,
            },
            extra,
            checks: checks.clone(),
        };
        w.write_json("report.json", &report)?;
        w.write("section.bin", &section_to_bin(g, s))?;
    }
    Ok(checks)
}

#[derive(Clone, Copy)]
enum Job {
    Solve,
    Uniqueness,
}

impl Job {
    fn command(self) -> &'static str {
        match self {
            Job::Solve => "solve-cylinder",
            Job::Uniqueness => "uniqueness",
        }
    }
}

fn run_cylinder<G, I>(
    g: Arc<G>,
    twist: I,
    boundary: Option<Curve<G::Point>>,
    cfg: &CylinderConfig,
    out_dir: Option<&Path>,
    job: Job,
    start: Instant,
    extra: impl Fn(&CylinderSection<G, I>) -> Option<serde_json::Value>,
) -> Result<Vec<CheckOutcome>>
where
    G: Geometry + 'static,
    I: Isometry<G> + Clone + 'static,
{
    let boundary = match boundary {
        Some(b) => b,
        None => generic_boundary(&g, &twist, cfg)?,
    };
    let proto = Prototype::new(g.clone(), twist.clone(), boundary)?;
    let params = cfg.params();
    let mut writer = out_dir.map(ArtifactWriter::new).transpose()?;
    let checks = match job {
        Job::Solve => {
            let out = solve_punctured_disk(&proto, &cfg.init_seed()?, &params)?;
            let x = extra(&out.section);
            report_solve(&*g, &twist, cfg, &out, x, writer.as_mut())?
        }
        Job::Uniqueness => {
            let seeds = [
                Seed::Prototype,
                Seed::Perturbed {
                    seed: task_seed(cfg.seed, 1),
                    amplitude: cfg.init_amplitude,
                },
                Seed::ConstantBridge,
            ];
            let (report, outcomes) = uniqueness_probe(&proto, &seeds, &params, workers())?;
            let checks = vec![
                check(
                    "sup-distance",
                    report.sup_distance <= cfg.sup_tol,
                    format!("{:e} (allowed {:e})", report.sup_distance, cfg.sup_tol),
                ),
                check(
                    "subharmonicity",
                    report.subharmonic_defect >= -report.slack,
                    format!(
                        "min discrete Laplacian {:e}, slack {:e}",
                        report.subharmonic_defect, report.slack
                    ),
                ),
            ];
            if let Some(w) = writer.as_mut() {
                #[derive(Serialize)]
                struct Report<'a, R: Serialize> {
                    config: &'a CylinderConfig,
                    uniqueness: R,
                    levels: Vec<&'a Vec<LevelReport>>,
                    checks: &'a [CheckOutcome],
                }
                w.write_json(
                    "report.json",
                    &Report {
                        config: cfg,
                        uniqueness: &report,
                        levels: outcomes.iter().map(|o| &o.levels).collect(),
                        checks: &checks,
                    },
                )?;
                for (k, o) in outcomes.iter().enumerate() {
                    w.write(&format!("section_seed{k}.bin"), &section_to_bin(&*g, &o.section))?;
                }
            }
            checks
        }
    };
    if let Some(w) = writer {
        finish_dir(w, job.command(), cfg, cfg.seed, checks.clone(), start)?;
    }
    Ok(checks)
}

fn no_extra<T>(_: &T) -> Option<serde_json::Value> {
    None
}

fn cylinder(flags: CylinderArgs, job: Job) -> Result<bool> {
    let start = Instant::now();
    let a = resolve(&flags, flags.config.as_deref())?;
    let out_dir = a.out.clone();
    let cfg = CylinderConfig::from_args(a)?;
    let space = parse_space(&cfg.target, &cfg.twist)?;
    let iso = IsometryDescriptor::from_json(&space, &cfg.twist)?;
    let dir = out_dir.as_deref();
    let checks = match (space, iso) {
        (SpaceDescriptor::Hyperbolic2(h), IsometryDescriptor::Mobius { matrix }) => {
            let fermi = match cfg.boundary.as_str() {
                "fermi" => true,
                "auto" => matrix.classification() == Classification::Hyperbolic,
                _ => false,
            };
            let boundary = if fermi {
                Some(fermi_loop(matrix, cfg.amplitude)?)
            } else {
                None
            };
            run_cylinder(Arc::new(h), matrix, boundary, &cfg, dir, job, start, no_extra)?
        }
        (SpaceDescriptor::Spd(s), IsometryDescriptor::Spd { matrix }) => {
            run_cylinder(Arc::new(s), matrix, None, &cfg, dir, job, start, no_extra)?
        }
        (SpaceDescriptor::Euclidean(e), IsometryDescriptor::Rigid(m)) => {
            run_cylinder(Arc::new(e), m, None, &cfg, dir, job, start, no_extra)?
        }
        (SpaceDescriptor::Tree(t), IsometryDescriptor::Tree(m)) => {
            let tree = Arc::new(t);
            let t2 = tree.clone();
            run_cylinder(tree, m, None, &cfg, dir, job, start, move |s| {
                serde_json::to_value(singular_set_flags(&t2, s)).ok()
            })?
        }
        _ => return Err(Error::Usage("twist does not match the target".into())),
    };
    Ok(print_checks(&checks))
}

pub fn solve_cylinder(flags: CylinderArgs) -> Result<bool> {
    cylinder(flags, Job::Solve)
}

pub fn uniqueness(flags: CylinderArgs) -> Result<bool> {
    cylinder(flags, Job::Uniqueness)
}

// ------------------------------------------------------------ bochner verify

#[derive(Serialize)]
struct GeneratorReport {
    name: String,
    generator: Generator,
    harmonic: bool,
    form4: ResidualReport,
    commutation: ResidualReport,
    siu: Option<SiuReport>,
}

pub fn bochner_verify(flags: BochnerArgs) -> Result<bool> {
    let a = resolve(&flags, flags.config.as_deref())?;
    let mesh = a.mesh.unwrap_or(32);
    let mut gens: Vec<(String, Generator)> = Vec::new();
    if let Some(path) = &a.generator {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        gens.push((path.display().to_string(), Generator::from_json(&text)?));
    }
    let wanted = a
        .standard
        .clone()
        .or_else(|| a.generator.is_none().then(|| "all".to_string()));
    if let Some(w) = wanted {
        let found: Vec<_> = standard_generators()
            .into_iter()
            .filter(|(n, _)| w == "all" || *n == w)
            .map(|(n, g)| (n.to_string(), g))
            .collect();
        if found.is_empty() {
            return Err(Error::Usage(format!("no built-in generator {w:?}")));
        }
        gens.extend(found);
    }
    let mut reports = Vec::new();
    let mut checks = Vec::new();
    for (name, generator) in gens {
        let m = TestMap::new(generator.clone(), mesh)?;
        let form4 = check_form4(&m);
        let commutation = check_commutation(&m);
        let harmonic = generator.is_harmonic();
        let siu = if harmonic {
            Some(siu_residual_flat(&m)?)
        } else {
            None
        };
        let mut order = |what: &str, r: &ResidualReport| {
            checks.push(check(
                &format!("{name}/{what}"),
                // below the noise floor the differences are exact for this
                // generator and the identity holds to rounding
                r.order_in(1.8, 2.2) || r.residual_h <= r.noise_floor,
                match r.observed_order {
                    Some(o) => format!("observed order {o:.4} (residual {:e})", r.residual_h),
                    None => format!(
                        "residual {:e} at or below the noise floor {:e}",
                        r.residual_h, r.noise_floor
                    ),
                },
            ));
        };
        order("form4", &form4);
        order("commutation", &commutation);
        if let Some(s) = &siu {
            order("siu", &s.siu);
            order("modified", &s.modified);
            checks.push(check(
                &format!("{name}/factor-two"),
                s.factor_two_holds(),
                format!("modified - 2 siu = {:e} at h/2", s.factor_two.residual_half_h),
            ));
        }
        reports.push(GeneratorReport {
            name,
            generator,
            harmonic,
            form4,
            commutation,
            siu,
        });
    }
    #[derive(Serialize)]
    struct Report {
        mesh: usize,
        generators: Vec<GeneratorReport>,
        checks: Vec<CheckOutcome>,
    }
    let report = Report {
        mesh,
        generators: reports,
        checks: checks.clone(),
    };
    if let Some(path) = &a.out {
        write_report(path, &report)?;
    }
    Ok(print_checks(&checks))
}

// ------------------------------------------------------------ calculus check

pub fn calculus_check(flags: CalculusArgs) -> Result<bool> {
    let a = resolve(&flags, flags.config.as_deref())?;
    let c = a.c.unwrap_or(1.0);
    let tol = a.tol.unwrap_or(1e-6);
    let which = a.psi.clone().unwrap_or_else(|| "all".into());
    let clipped = clipped_oscillation(c);
    let all: [(&str, &dyn Fn(f64) -> f64); 3] = [
        ("constant", &move |_| c),
        ("linear", &move |r| c + r),
        ("oscillating", &clipped),
    ];
    let chosen: Vec<_> = all.iter().filter(|(n, _)| which == "all" || *n == which).collect();
    if chosen.is_empty() {
        return Err(Error::Usage(format!("unknown --psi {which:?}")));
    }
    let mut reports: Vec<(String, CalculusReport)> = Vec::new();
    let mut checks = Vec::new();
    for (name, psi) in chosen {
        let r = calculus_weight_check(psi, c)?;
        checks.push(check(
            name,
            r.holds(tol),
            format!("lhs {} rhs {} residual {:e}", r.lhs, r.rhs, r.residual),
        ));
        reports.push((name.to_string(), r));
    }
    if let Some(path) = &a.out {
        write_report(path, &reports)?;
    }
    Ok(print_checks(&checks))
}

// -------------------------------------------------------------------- accept

pub fn accept(a: AcceptArgs) -> Result<bool> {
    let start = Instant::now();
    let ids: Vec<u8> = if a.which == "all" {
        CRITERIA.iter().map(|c| c.0).collect()
    } else {
        let id: u8 = a
            .which
            .parse()
            .ok()
            .filter(|n| (1..=12).contains(n))
            .ok_or_else(|| Error::Usage(format!("criterion must be 1-12 or all, got {:?}", a.which)))?;
        vec![id]
    };
    let suite = Suite::new(a.seed, workers())?;
    let mut results = Vec::new();
    for id in ids {
        let r = suite.run(id)?;
        println!("{}", r.line());
        results.push(r);
    }
    let checks: Vec<CheckOutcome> = results
        .iter()
        .map(|r| check(&format!("criterion-{}", r.id), r.passed, r.name.to_string()))
        .collect();
    if let Some(dir) = &a.out {
        let mut w = ArtifactWriter::new(dir)?;
        w.write("report.json", results_json(&results)?.as_bytes())?;
        #[derive(Serialize)]
        struct Config<'a> {
            which: &'a str,
            seed: u64,
        }
        let cfg = Config {
            which: &a.which,
            seed: a.seed,
        };
        finish_dir(w, "accept", &cfg, a.seed, checks.clone(), start)?;
    }
    Ok(checks.iter().all(|c| c.passed))
}
