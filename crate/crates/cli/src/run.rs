use std::path::PathBuf;
use std::time::Instant;

use kvn_core::boundary::{fold_billiard, qparity_check};
use kvn_core::evolution::{box_gaussian_state, evolve_box, evolve_free_spectral, evolve_gravity, BoxBackend, ImageSumPolicy, PotentialSpec};
use kvn_core::kappa::{contraction_experiment, two_slit_compare, ContractionRow, ContractionSetup, PhaseSpaceGaussian, TwoSlitSetup};
use kvn_core::observables::{expectation_hamiltonian, expectation_momentum, expectation_position};
use kvn_core::oracle::{
    compare_densities, density_estimate, integrate_hamilton, monte_carlo_budget, sample_ensemble, ClassicalEnsemble, DensityField, Sample,
    ScenarioKind,
};
use kvn_core::spectral::{band_energy, quantum_box_levels};
use kvn_core::{Axis, GaussianSpec, GridSpec, KvnError, KvnState, Representation, UnitSystem};

use crate::config::{Scenario, ScenarioConfig};
use crate::error::{CliResult, Context};
use crate::output;

pub const WALL_TOL: f64 = 1e-8;
pub const NORM_TOL: f64 = 1e-8;
pub const CROSS_TERM_TOL: f64 = 1e-12;
pub const VISIBILITY_MIN: f64 = 0.5;
pub const RESIDUAL_TOL: f64 = 1e-5;

/// A pass/fail physics check; `value <= limit` passes unless `at_least`.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub at_least: bool,
}

impl Check {
    fn at_most(name: String, value: f64, limit: f64) -> Self {
        Self { name, value, limit, at_least: false }
    }

    pub fn passed(&self) -> bool {
        if self.at_least {
            self.value >= self.limit
        } else {
            self.value <= self.limit
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObservableRow {
    pub time: f64,
    pub norm: f64,
    pub mean_q: f64,
    pub mean_p: f64,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WallRow {
    pub time: f64,
    pub wall: String,
    pub relative_current: f64,
    pub parity_asymmetry: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleRow {
    pub time: f64,
    pub l1: f64,
    pub budget: f64,
    pub out_of_range: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoSlitSummary {
    pub probe_times: Vec<f64>,
    pub cross_terms: Vec<f64>,
    pub kvn_cross_term_max: f64,
    pub quantum_fringe_visibility: f64,
    pub quantum_q: Axis,
    pub quantum_density: Vec<f64>,
}

/// Everything a run computed. Densities are kept so the writer can emit them.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub scenario: Scenario,
    pub version: &'static str,
    pub config_echo: String,
    pub observables: Vec<ObservableRow>,
    pub densities: Vec<(f64, KvnState)>,
    pub walls: Vec<WallRow>,
    pub oracle: Vec<OracleRow>,
    pub bands: Vec<(u32, f64, f64)>,
    pub quantum_levels: Vec<(u32, f64)>,
    pub contraction: Vec<ContractionRow>,
    pub contraction_error: Option<String>,
    pub two_slit: Option<TwoSlitSummary>,
    pub checks: Vec<Check>,
    pub files: Vec<PathBuf>,
    pub duration_seconds: f64,
}

impl RunReport {
    fn new(config: &ScenarioConfig) -> Self {
        Self {
            scenario: config.scenario,
            version: env!("CARGO_PKG_VERSION"),
            config_echo: config.echo(),
            observables: Vec::new(),
            densities: Vec::new(),
            walls: Vec::new(),
            oracle: Vec::new(),
            bands: Vec::new(),
            quantum_levels: Vec::new(),
            contraction: Vec::new(),
            contraction_error: None,
            two_slit: None,
            checks: Vec::new(),
            files: Vec::new(),
            duration_seconds: 0.0,
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed) && self.contraction_error.is_none()
    }

    /// 0 when every check passed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    pub fn max_wall_current(&self) -> f64 {
        self.walls.iter().map(|w| w.relative_current).fold(0.0, f64::max)
    }
}

fn units(c: &ScenarioConfig) -> CliResult<UnitSystem> {
    UnitSystem::new(c.f64("hbar"), c.f64("mass")).context("units")
}

fn flow_grid(c: &ScenarioConfig) -> CliResult<GridSpec> {
    let q = Axis::new(c.f64("q_min"), c.f64("q_max"), c.usize("q_points")).context("position axis")?;
    let p = Axis::centered(c.usize("p_points"), c.f64("p_spacing")).context("momentum axis")?;
    Ok(GridSpec::new(q, p, units(c)?))
}

fn gaussian(c: &ScenarioConfig) -> GaussianSpec {
    GaussianSpec::new(c.f64("q0"), c.f64("p0"), c.f64("sigma_q"), c.f64("sigma_p"))
}

fn observe(state: &KvnState, potential: &PotentialSpec) -> CliResult<ObservableRow> {
    let v = potential.sample(&state.grid().q.points());
    Ok(ObservableRow {
        time: state.time(),
        norm: state.norm(),
        mean_q: expectation_position(state).value,
        mean_p: expectation_momentum(state).value,
        energy: expectation_hamiltonian(state, &v).context("energy")?.value,
    })
}

/// `<q>` and `<p>` of a mirror-symmetric box state over the physical half
/// `[0, L]`; the wall rows carry half weight.
fn box_means(state: &KvnState, length: f64) -> (f64, f64) {
    let g = state.grid();
    let (mut mq, mut mp) = (0.0, 0.0);
    for ((i, j), z) in state.amplitudes().indexed_iter() {
        let q = g.q.point(i);
        let w = if i == 0 || (q.abs() < 0.5 * g.dq()) { 1.0 } else if q > 0.0 { 2.0 } else { 0.0 };
        let (q, d) = (if i == 0 { length } else { q }, z.norm_sqr() * w);
        mq += q * d;
        mp += g.dual.point(j) * d;
    }
    (mq * g.cell(), mp * g.cell())
}

/// Maps samples of the mirror-symmetric doubled domain into `[0, L]`.
fn fold_into_box(ens: &ClassicalEnsemble, length: f64) -> ClassicalEnsemble {
    let samples = ens
        .samples
        .iter()
        .map(|s| {
            let (q, sign) = fold_billiard(s.q, length);
            Sample { q, p: sign * s.p, weight: s.weight }
        })
        .collect();
    ClassicalEnsemble { samples, ..ens.clone() }
}

enum Flow {
    Free,
    Box(f64, BoxBackend),
    Gravity(f64),
}

fn run_flow(c: &ScenarioConfig, report: &mut RunReport) -> CliResult<()> {
    let u = units(c)?;
    let (flow, grid, s0) = match c.scenario {
        Scenario::Box => {
            let l = c.f64("length");
            let q = Axis::new(-l, l, c.usize("q_points")).context("position axis")?;
            let p = Axis::centered(c.usize("p_points"), c.f64("p_spacing")).context("momentum axis")?;
            let grid = GridSpec::new(q, p, u);
            let backend = match c.text("backend") {
                "image-kernel" => BoxBackend::ImageKernel(ImageSumPolicy { n_images: c.usize("n_images"), ..Default::default() }),
                _ => BoxBackend::Characteristics,
            };
            let s0 = box_gaussian_state(&grid, l, &gaussian(c)).context("initial box state")?;
            (Flow::Box(l, backend), grid, s0)
        }
        Scenario::Gravity => {
            let grid = flow_grid(c)?;
            let s0 = kvn_core::make_gaussian_state(&grid, Representation::PositionMomentum, &gaussian(c), true).context("initial state")?;
            (Flow::Gravity(c.f64("g")), grid, s0)
        }
        _ => {
            let grid = flow_grid(c)?;
            let s0 = kvn_core::make_gaussian_state(&grid, Representation::PositionMomentum, &gaussian(c), true).context("initial state")?;
            (Flow::Free, grid, s0)
        }
    };
    let potential = match flow {
        Flow::Gravity(g) => PotentialSpec::linear(u.mass * g),
        _ => PotentialSpec::free(),
    };
    let field0 = DensityField::from_state(&s0).context("initial density")?;
    let e0 = sample_ensemble(&field0, c.usize("n_samples"), c.u64("seed")).context("oracle sampling")?;
    let e0 = match flow {
        Flow::Box(l, _) => fold_into_box(&e0, l),
        _ => e0,
    };
    let norm0 = s0.norm();
    for &t in c.list("times") {
        let st = match flow {
            _ if t == 0.0 => s0.clone(),
            Flow::Free => evolve_free_spectral(&s0, t).context(&format!("free evolution to t = {t}"))?,
            Flow::Box(l, backend) => evolve_box(&s0, t, l, backend).context(&format!("box evolution to t = {t}"))?,
            Flow::Gravity(g) => evolve_gravity(&s0, t, g).context(&format!("gravity evolution to t = {t}"))?,
        };
        let mut row = observe(&st, &potential)?;
        if let Flow::Box(l, _) = flow {
            (row.mean_q, row.mean_p) = box_means(&st, l);
        }
        report.checks.push(Check::at_most(format!("norm drift at t = {t}"), (row.norm - norm0).abs(), NORM_TOL));
        report.observables.push(row);

        if let Flow::Box(l, _) = flow {
            let dual = kvn_core::to_dual(&st).context("box wall check")?;
            for w in qparity_check(&dual, l).context("box wall check")? {
                let wall = format!("{:?}", w.wall);
                report.checks.push(Check::at_most(format!("relative wall current at {wall}, t = {t}"), w.relative_wall_current, WALL_TOL));
                report.checks.push(Check::at_most(format!("Q-parity asymmetry at {wall}, t = {t}"), w.max_parity_asymmetry, WALL_TOL));
                report.walls.push(WallRow { time: t, wall, relative_current: w.relative_wall_current, parity_asymmetry: w.max_parity_asymmetry });
            }
        }

        let (kind, wrap) = match flow {
            Flow::Free => (ScenarioKind::Free, false),
            Flow::Box(l, _) => (ScenarioKind::Box(l), true),
            Flow::Gravity(g) => (ScenarioKind::Gravity(g), false),
        };
        let moved = integrate_hamilton(&e0, t, &kind, u.mass, None).context("oracle trajectories")?;
        let moved = if wrap { moved.mirrored() } else { moved };
        let est = density_estimate(&moved, &grid.q, &grid.dual, wrap);
        let kvn = DensityField::from_state(&st).context("evolved density")?;
        let cmp = compare_densities(&est.field, &kvn).context("oracle comparison")?;
        let budget = monte_carlo_budget(&est);
        report.checks.push(Check::at_most(format!("oracle L1 at t = {t}"), cmp.l1, budget));
        report.oracle.push(OracleRow { time: t, l1: cmp.l1, budget, out_of_range: est.out_of_range });
        report.densities.push((t, st));
    }
    Ok(())
}

fn run_two_slit(c: &ScenarioConfig, report: &mut RunReport) -> CliResult<()> {
    let setup = TwoSlitSetup { units: units(c)?, ..Default::default() };
    let sep = c.f64("separation");
    let r = two_slit_compare(sep, c.f64("slit_width"), c.f64("momentum_spread"), c.f64("t_final"), &setup).context("two-slit comparison")?;
    report.checks.push(Check::at_most("KvN marginal cross term".into(), r.kvn_cross_term_max, CROSS_TERM_TOL));
    if sep != 0.0 {
        report.checks.push(Check {
            name: "quantum fringe visibility".into(),
            value: r.quantum_fringe_visibility,
            limit: VISIBILITY_MIN,
            at_least: true,
        });
    }
    report.two_slit = Some(TwoSlitSummary {
        probe_times: r.probe_times,
        cross_terms: r.kvn_cross_terms,
        kvn_cross_term_max: r.kvn_cross_term_max,
        quantum_fringe_visibility: r.quantum_fringe_visibility,
        quantum_q: setup.quantum_q,
        quantum_density: r.quantum_density,
    });
    Ok(())
}

fn run_kappa_dial(c: &ScenarioConfig, report: &mut RunReport) -> CliResult<()> {
    let u = units(c)?;
    let potential = match c.text("potential") {
        "harmonic" => PotentialSpec::harmonic(u.mass, c.f64("coupling")),
        _ => PotentialSpec::quartic(c.f64("coupling")),
    };
    let setup = ContractionSetup { hbar: u.hbar, mass: u.mass, dt: c.f64("dt"), ..Default::default() };
    let initial = PhaseSpaceGaussian { q0: c.f64("q0"), p0: c.f64("p0"), sigma_q: c.f64("sigma_q"), sigma_p: c.f64("sigma_p") };
    match contraction_experiment(&potential, c.list("kappas"), c.f64("t_final"), &initial, &setup) {
        Ok(rows) => {
            for r in &rows {
                report.checks.push(Check::at_most(format!("two-point residual at kappa = {}", r.kappa), r.two_point_residual, RESIDUAL_TOL));
                report.checks.push(Check::at_most(
                    format!("convergence flags at kappa = {}", r.kappa),
                    if r.converged() { 0.0 } else { 1.0 },
                    0.0,
                ));
            }
            report.contraction = rows;
        }
        Err(KvnError::Experiment(msg)) => report.contraction_error = Some(msg),
        Err(e) => return Err(e).context("contraction experiment"),
    }
    Ok(())
}

fn run_spectrum(c: &ScenarioConfig, report: &mut RunReport) -> CliResult<()> {
    let u = units(c)?;
    let l = c.f64("length");
    let (k0, k1, nk) = (c.f64("kappa_min"), c.f64("kappa_max"), c.usize("kappa_points"));
    let kappas: Vec<f64> = (0..nk)
        .map(|i| if nk == 1 { k0 } else { k0 + (k1 - k0) * i as f64 / (nk - 1) as f64 })
        .collect();
    let n_max = c.u64("n_max") as u32;
    for n in 1..=n_max {
        for &k in &kappas {
            report.bands.push((n, k, band_energy(n, k, l, &u).context("band energy")?));
        }
    }
    report.quantum_levels = quantum_box_levels(n_max, l, &u)
        .context("quantum levels")?
        .into_iter()
        .map(|lv| (lv.n, lv.energy))
        .collect();
    Ok(())
}

/// Runs the configured scenario and writes its files into `output_dir`.
pub fn run_scenario(config: &ScenarioConfig) -> CliResult<RunReport> {
    let start = Instant::now();
    let mut report = RunReport::new(config);
    match config.scenario {
        Scenario::Free | Scenario::Box | Scenario::Gravity => run_flow(config, &mut report)?,
        Scenario::TwoSlit => run_two_slit(config, &mut report)?,
        Scenario::KappaDial => run_kappa_dial(config, &mut report)?,
        Scenario::Spectrum => run_spectrum(config, &mut report)?,
    }
    report.duration_seconds = start.elapsed().as_secs_f64();
    output::write_all(&mut report, config.text("output_dir").as_ref())?;
    Ok(report)
}
