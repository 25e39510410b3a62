use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::config::Scenario;
use crate::error::{CliError, CliResult};
use crate::run::RunReport;

/// Marker on the one report line that differs between identical runs.
pub const VOLATILE_MARKER: &str = "# volatile";

/// Round-trip float formatting: 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

struct Csv {
    name: String,
    columns: &'static str,
    body: String,
}

impl Csv {
    fn new(name: impl Into<String>, columns: &'static str) -> Self {
        Self { name: name.into(), columns, body: format!("{columns}\n") }
    }

    fn row(&mut self, fields: &[String]) {
        self.body.push_str(&fields.join(","));
        self.body.push('\n');
    }
}

fn f(x: f64) -> String {
    fmt_f64(x)
}

fn csv_files(report: &RunReport) -> Vec<(Csv, &'static str)> {
    let mut out = Vec::new();
    match report.scenario {
        Scenario::Free | Scenario::Box | Scenario::Gravity => {
            let mut obs = Csv::new("observables.csv", "time,norm,mean_q,mean_p,energy,oracle_l1,oracle_budget");
            for (o, m) in report.observables.iter().zip(&report.oracle) {
                obs.row(&[f(o.time), f(o.norm), f(o.mean_q), f(o.mean_p), f(o.energy), f(m.l1), f(m.budget)]);
            }
            out.push((obs, "per output time: KvN norm, <q>, <p> (over [0, L] for the box), <H>, oracle L1 distance and Monte Carlo budget"));
            for (k, (_, st)) in report.densities.iter().enumerate() {
                let g = st.grid();
                let mut d = Csv::new(format!("density_t{k}.csv"), "q,p,density");
                for ((i, j), z) in st.amplitudes().indexed_iter() {
                    d.row(&[f(g.q.point(i)), f(g.dual.point(j)), f(z.norm_sqr())]);
                }
                out.push((d, "phase-space density |psi(q, p)|^2 at the k-th entry of times (0-based), long format"));
            }
        }
        Scenario::TwoSlit => {
            let ts = report.two_slit.as_ref().expect("two-slit summary");
            let mut obs = Csv::new("observables.csv", "time,kvn_cross_term");
            for (t, x) in ts.probe_times.iter().zip(&ts.cross_terms) {
                obs.row(&[f(*t), f(*x)]);
            }
            out.push((obs, "per probe time: max_q |rho_12 - rho_1 - rho_2| of the KvN position marginals"));
            let mut d = Csv::new("density_t0.csv", "q,density");
            for (i, v) in ts.quantum_density.iter().enumerate() {
                d.row(&[f(ts.quantum_q.point(i)), f(*v)]);
            }
            out.push((d, "quantum position density of the two-slit superposition at t_final"));
        }
        Scenario::KappaDial => {
            let mut obs = Csv::new(
                "observables.csv",
                "kappa,l1,dt_change,spectral_tail,edge_amplitude,two_point_residual,classical_loss",
            );
            for r in &report.contraction {
                obs.row(&[
                    f(r.kappa),
                    f(r.l1),
                    f(r.dt_change),
                    f(r.spectral_tail),
                    f(r.edge_amplitude),
                    f(r.two_point_residual),
                    f(r.classical_loss),
                ]);
            }
            out.push((obs, "per kappa: L1 distance of the kappa-Wigner function to Liouville flow and convergence diagnostics"));
        }
        Scenario::Spectrum => {
            let mut b = Csv::new("spectrum_bands.csv", "n,kappa,energy");
            for (n, k, e) in &report.bands {
                b.row(&[n.to_string(), f(*k), f(*e)]);
            }
            out.push((b, "KvN box band energies E(n, kappa)"));
            let mut q = Csv::new("spectrum_quantum.csv", "n,energy");
            for (n, e) in &report.quantum_levels {
                q.row(&[n.to_string(), f(*e)]);
            }
            out.push((q, "quantum box levels n^2 pi^2 hbar^2 / (2 m L^2)"));
        }
    }
    out
}

fn report_text(report: &RunReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "kvn {} scenario {}", report.version, report.scenario.name());
    let _ = writeln!(s, "result: {}", if report.passed() { "PASS" } else { "FAIL" });
    let _ = writeln!(s, "\n== configuration ==\n{}", report.config_echo);
    if !report.observables.is_empty() {
        let _ = writeln!(s, "== observables ==");
        for o in &report.observables {
            let _ = writeln!(s, "t = {}  norm = {}  <q> = {}  <p> = {}  <H> = {}", f(o.time), f(o.norm), f(o.mean_q), f(o.mean_p), f(o.energy));
        }
    }
    if !report.walls.is_empty() {
        let _ = writeln!(s, "\n== walls ==");
        for w in &report.walls {
            let _ = writeln!(s, "t = {}  {}  relative current = {}  parity asymmetry = {}", f(w.time), w.wall, f(w.relative_current), f(w.parity_asymmetry));
        }
        let _ = writeln!(s, "max_wall_current = {}", f(report.max_wall_current()));
    }
    if !report.oracle.is_empty() {
        let _ = writeln!(s, "\n== oracle ==");
        for m in &report.oracle {
            let _ = writeln!(s, "t = {}  L1 = {}  budget = {}  out of range = {}", f(m.time), f(m.l1), f(m.budget), f(m.out_of_range));
        }
    }
    if let Some(ts) = &report.two_slit {
        let _ = writeln!(s, "\n== two-slit ==");
        let _ = writeln!(s, "kvn_cross_term_max = {}", f(ts.kvn_cross_term_max));
        let _ = writeln!(s, "quantum_fringe_visibility = {}", f(ts.quantum_fringe_visibility));
    }
    if !report.contraction.is_empty() || report.contraction_error.is_some() {
        let _ = writeln!(s, "\n== contraction ==");
        for r in &report.contraction {
            let _ = writeln!(s, "kappa = {}  L1 = {}  converged = {}", f(r.kappa), f(r.l1), r.converged());
        }
        if let Some(e) = &report.contraction_error {
            let _ = writeln!(s, "experiment failure: {e}");
        }
    }
    if !report.bands.is_empty() {
        let _ = writeln!(s, "\n== spectrum ==");
        let _ = writeln!(s, "{} band rows, {} quantum levels", report.bands.len(), report.quantum_levels.len());
        for (n, e) in &report.quantum_levels {
            let _ = writeln!(s, "E_{n} = {}", f(*e));
        }
    }
    let _ = writeln!(s, "\n== checks ==");
    for c in &report.checks {
        let rel = if c.at_least { ">=" } else { "<=" };
        let _ = writeln!(s, "{} {}: {} {rel} {}", if c.passed() { "PASS" } else { "FAIL" }, c.name, f(c.value), f(c.limit));
    }
    let _ = writeln!(s, "\nwall_clock_seconds = {:.3}  {VOLATILE_MARKER}", report.duration_seconds);
    s
}

fn write(dir: &Path, name: &str, body: &str) -> CliResult<()> {
    let path = dir.join(name);
    fs::write(&path, body).map_err(|source| CliError::Io { path, source })
}

/// Writes every output file of `report` into `dir`, creating it if needed.
pub fn write_all(report: &mut RunReport, dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
    let csvs = csv_files(report);
    let mut manifest = String::from("file: columns: description\n");
    manifest.push_str("report.txt: -: human-readable summary, configuration echo and checks; the line marked '# volatile' holds the wall-clock time\n");
    for (csv, what) in &csvs {
        write(dir, &csv.name, &csv.body)?;
        let _ = writeln!(manifest, "{}: {}: {}", csv.name, csv.columns, what);
    }
    let mut files: Vec<_> = vec![dir.join("report.txt")];
    files.extend(csvs.iter().map(|(c, _)| dir.join(&c.name)));
    files.push(dir.join("manifest.txt"));
    report.files = files;
    write(dir, "manifest.txt", &manifest)?;
    write(dir, "report.txt", &report_text(report))
}
