//! Scenario execution.

use std::fs;
use std::path::PathBuf;

use duowalk_core::correlation::GammaOptions;
use duowalk_core::num_complex::Complex64;
use duowalk_core::observables::{reduced_density_left, EntropyReport};
use duowalk_core::oracle::{verify_equivalence, VerificationReport};
use duowalk_core::propagator::{required_ring_sites, SpectralPropagator};
use duowalk_core::states::family_params_of;
use duowalk_core::{
    avg_distance, check_wrap_margin, coherence_eta, density_from_beams, density_from_family, density_from_pure,
    gamma_bessel, gamma_general_with, propagate_bessel, pure_state, BeamParams, CoherenceFamily, CorrelationMatrix,
    Error, Exec, Lattice, Propagator, TwoBosonDensityMatrix,
};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::{Method, RunConfig, Scenario, StateSource};
use crate::output::{self, DistanceRow};

/// Largest oracle deviation accepted by the verification run.
pub const VERIFY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum RunError {
    Io(String),
    Config(String),
    Physical(String),
    Margin(String),
    Numerical(String),
}

impl RunError {
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Io(_) => 1,
            RunError::Config(_) => 2,
            RunError::Physical(_) => 3,
            RunError::Margin(_) | RunError::Numerical(_) => 4,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Io(m) => write!(f, "i/o error: {m}"),
            RunError::Config(m) => write!(f, "config error: {m}"),
            RunError::Physical(m) => write!(f, "physicality error: {m}"),
            RunError::Margin(m) => write!(f, "numerical margin error: {m}"),
            RunError::Numerical(m) => write!(f, "numerical check failed: {m}"),
        }
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::Unphysical { .. } | Error::InvalidDensity(_) | Error::ZeroNorm => RunError::Physical(msg),
            Error::WrapAround { .. } => RunError::Margin(msg),
            _ => RunError::Config(msg),
        }
    }
}

fn emit(path: PathBuf, text: String, files: &mut Vec<PathBuf>) -> Result<(), RunError> {
    output::write(&path, &text).map_err(|e| io_err(&path, e))?;
    files.push(path);
    Ok(())
}

fn io_err(path: &std::path::Path, e: std::io::Error) -> RunError {
    RunError::Io(format!("{}: {e}", path.display()))
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub exec: Exec,
    /// Also run the oracle comparison and record it in the metadata.
    pub verify: bool,
}

/// Files written by a run, metadata last.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    pub verification: Option<VerificationReport>,
}

/// Which propagator a run uses.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Engine {
    Bessel(f64),
    Spectral,
}

struct Prepared<'a> {
    lattice: &'a Lattice,
    rho: TwoBosonDensityMatrix,
    family: Option<CoherenceFamily>,
    origin: Option<usize>,
}

pub fn run(cfg: &RunConfig, config_text: &str, opts: RunOptions) -> Result<RunSummary, RunError> {
    let mut meta = json!({
        "tool": "duowalk",
        "version": env!("CARGO_PKG_VERSION"),
        "config_hash": format!("sha256:{:x}", Sha256::digest(config_text.as_bytes())),
        "config": serde_json::to_value(cfg).expect("serializable config"),
    });
    let mut files = Vec::new();

    let mut verification = None;
    if cfg.scenario == Scenario::Verify || opts.verify {
        let v = cfg.verify;
        let report = verify_equivalence(v.sites, None, v.samples, v.seed)?;
        meta["verify"] = json!({
            "sites": report.num_sites,
            "samples": report.samples,
            "seed": report.seed,
            "max_deviation": report.max_deviation,
            "max_sum_rule_error": report.max_sum_rule_error,
            "tolerance": VERIFY_TOL,
            "passed": report.max_deviation <= VERIFY_TOL,
        });
        verification = Some(report);
    }

    if cfg.scenario != Scenario::Verify {
        run_scenario(cfg, opts, &mut meta, &mut files)?;
    }

    let names: Vec<Value> = files
        .iter()
        .map(|p: &PathBuf| Value::from(p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()))
        .collect();
    meta["outputs"] = Value::Array(names);
    let meta_path = output::path_for(&cfg.output_prefix, "_meta", "json");
    output::write(&meta_path, &output::pretty(&meta)).map_err(|e| io_err(&meta_path, e))?;
    files.push(meta_path);

    if let Some(r) = &verification {
        if r.max_deviation > VERIFY_TOL {
            return Err(RunError::Numerical(format!(
                "oracle deviation {:e} exceeds {VERIFY_TOL:e}",
                r.max_deviation
            )));
        }
    }
    Ok(RunSummary { files, verification })
}

fn prepare<'a>(cfg: &'a RunConfig) -> Result<Prepared<'a>, RunError> {
    let lattice = &cfg.lattice.as_ref().expect("validated config has a lattice").lattice;
    let n = lattice.num_sites();
    let origin = match (lattice.index_of_label(0), lattice.index_of_label(1)) {
        (Some(a), Some(b)) if b == a + 1 => Some(a),
        _ => None,
    };
    let need_origin = || {
        origin.ok_or_else(|| RunError::Config("sites labeled 0 and 1 must both exist for the injected state".into()))
    };
    let state = cfg.state.as_ref().expect("validated config has a state");
    let (rho, family) = match state {
        StateSource::Family(f) => {
            let p = CoherenceFamily::new(f.alpha, f.eta, f.phi)?;
            (density_from_family(&p, n, need_origin()?)?, Some(p))
        }
        StateSource::Beams(b) => {
            let params = BeamParams {
                delta: b.delta,
                theta: b.theta,
                phi: b.phi,
            };
            let o = need_origin()?;
            let rho = density_from_beams(&params, n, o)?;
            let p = family_params_of(&rho, o);
            (rho, p)
        }
        StateSource::Pure(terms) => {
            let mut coeffs = Vec::with_capacity(terms.len());
            for t in terms {
                let site = |label: i64| {
                    lattice
                        .index_of_label(label)
                        .ok_or_else(|| RunError::Config(format!("site label {label} is not on the lattice")))
                };
                coeffs.push((site(t.q)?, site(t.r)?, Complex64::new(t.re, t.im)));
            }
            (density_from_pure(&pure_state(n, &coeffs)?), None)
        }
        StateSource::DensityFile(path) => {
            let text = fs::read_to_string(path).map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?;
            let rho = duowalk_core::densityfile::parse_density(&text)?;
            if rho.num_sites() != n {
                return Err(RunError::Config(format!(
                    "density file has L={}, lattice has {n} sites",
                    rho.num_sites()
                )));
            }
            (rho, None)
        }
    };
    Ok(Prepared {
        lattice,
        rho,
        family,
        origin,
    })
}

fn choose_engine(cfg: &RunConfig, lattice: &Lattice, meta: &mut Value) -> Result<Engine, RunError> {
    let n = lattice.num_sites();
    let t_max = cfg.times.last().copied().unwrap_or(0.0);
    let ring = lattice.uniform_ring_coupling();
    let tau = ring.map(|c| 2.0 * c * t_max);
    let margin_ok = tau.map(|tau| check_wrap_margin(tau, n).is_ok());

    let engine = match cfg.method {
        Method::Spectral => Engine::Spectral,
        Method::Bessel => {
            let c = ring.ok_or_else(|| {
                RunError::Config("method `bessel` needs a periodic lattice with uniform couplings and on-site energies".into())
            })?;
            Engine::Bessel(c)
        }
        Method::Auto => match (ring, margin_ok) {
            (Some(c), Some(true)) if cfg.scenario != Scenario::Entropy => Engine::Bessel(c),
            _ => Engine::Spectral,
        },
    };
    meta["method_used"] = Value::from(match engine {
        Engine::Bessel(_) => "bessel",
        Engine::Spectral => "spectral",
    });
    meta["wrap_margin"] = json!({
        "applies": matches!(engine, Engine::Bessel(_)),
        "tau_max": tau,
        "required_sites": tau.map(required_ring_sites),
        "num_sites": n,
        "satisfied": margin_ok,
    });
    if let (Engine::Bessel(_), Some(tau)) = (engine, tau) {
        check_wrap_margin(tau, n)?;
    }
    Ok(engine)
}

/// Propagators along the time grid, built once and shared by every sweep point.
fn propagators(engine: Engine, lattice: &Lattice, times: &[f64], exec: Exec) -> Result<Vec<Propagator>, RunError> {
    let n = lattice.num_sites();
    let spectral = match engine {
        Engine::Spectral => Some(SpectralPropagator::new(&lattice.single_particle_matrix())),
        Engine::Bessel(_) => None,
    };
    exec.map_slice(times, |&t| match engine {
        Engine::Bessel(c) => propagate_bessel(c, n, t),
        Engine::Spectral => spectral.as_ref().expect("built above").at(t),
    })
    .into_iter()
    .map(|r| r.map_err(RunError::from))
    .collect()
}

#[derive(Default)]
struct CheckTally {
    count: usize,
    sum_rule: f64,
    symmetry: f64,
    min_entry: f64,
    imag: f64,
}

impl CheckTally {
    fn add(&mut self, g: &CorrelationMatrix) {
        let c = g.check();
        self.min_entry = if self.count == 0 { c.min_entry } else { self.min_entry.min(c.min_entry) };
        self.count += 1;
        self.sum_rule = self.sum_rule.max(c.sum_rule_error);
        self.symmetry = self.symmetry.max(c.symmetry_error);
        self.imag = self.imag.max(c.imag_residue);
    }

    fn to_json(&self) -> Value {
        json!({
            "gamma_maps": self.count,
            "max_sum_rule_error": self.sum_rule,
            "max_symmetry_error": self.symmetry,
            "min_entry": self.min_entry,
            "max_imag_residue": self.imag,
        })
    }
}

fn run_scenario(cfg: &RunConfig, opts: RunOptions, meta: &mut Value, files: &mut Vec<PathBuf>) -> Result<(), RunError> {
    let prep = prepare(cfg)?;
    let lattice = prep.lattice;
    let labels = lattice.labels();
    let exec = opts.exec;

    let eta_computed = coherence_eta(&prep.rho);
    let mut state = json!({
        "purity": prep.rho.purity(),
        "eta_computed": eta_computed,
        "injection_site_index": prep.origin,
    });
    if let Some(p) = &prep.family {
        state["alpha"] = Value::from(p.alpha());
        state["eta"] = Value::from(p.eta());
        state["phi"] = Value::from(p.phi());
        state["gamma"] = Value::from(p.gamma());
        state["eta_check_error"] = Value::from((p.eta() - eta_computed).abs());
    }
    meta["state"] = state;

    let engine = choose_engine(cfg, lattice, meta)?;
    let us = propagators(engine, lattice, &cfg.times, exec)?;
    let gamma_opts = GammaOptions {
        exec,
        ..GammaOptions::default()
    };
    let n = lattice.num_sites();
    let correlate = |p: Option<&CoherenceFamily>, rho: &TwoBosonDensityMatrix, u: &Propagator| -> Result<CorrelationMatrix, RunError> {
        match (engine, p, prep.origin) {
            (Engine::Bessel(c), Some(p), Some(o)) => Ok(gamma_bessel(p, c, u.time(), n, o)?),
            _ => Ok(gamma_general_with(rho, u, gamma_opts)?),
        }
    };
    let fmt = cfg.format;
    let ext = output::ext(fmt);
    let mut tally = CheckTally::default();

    match cfg.scenario {
        Scenario::Correlate => {
            let gammas: Vec<CorrelationMatrix> = exec
                .map_slice(&us, |u| correlate(prep.family.as_ref(), &prep.rho, u))
                .into_iter()
                .collect::<Result<_, _>>()?;
            for g in &gammas {
                tally.add(g);
                let path = output::path_for(&cfg.output_prefix, &format!("_gamma_t{}", output::time_tag(g.time())), ext);
                emit(path, output::gamma_text(g, &labels, fmt), files)?;
            }
        }
        Scenario::Distance | Scenario::Sweep => {
            let points = sweep_points(cfg, prep.family.as_ref())?;
            let per_point: Vec<Vec<CorrelationMatrix>> = exec
                .map_slice(&points, |point| {
                    let (p, rho) = match point {
                        Some(p) => (Some(p), density_from_family(p, n, prep.origin.expect("family has an origin"))?),
                        None => (prep.family.as_ref(), prep.rho.clone()),
                    };
                    us.iter().map(|u| correlate(p, &rho, u)).collect::<Result<Vec<_>, RunError>>()
                })
                .into_iter()
                .collect::<Result<_, _>>()?;
            let swept = cfg.sweep.is_some();
            let mut rows = Vec::new();
            for (point, gammas) in points.iter().zip(&per_point) {
                for g in gammas {
                    tally.add(g);
                    rows.push(DistanceRow {
                        t: g.time(),
                        d: avg_distance(g),
                        eta: point.as_ref().filter(|_| swept).map(|p| p.eta()),
                        phi: point.as_ref().filter(|_| swept).map(|p| p.phi()),
                    });
                    if cfg.scenario == Scenario::Sweep {
                        let p = point.as_ref().expect("sweep points carry parameters");
                        let suffix = format!(
                            "_gamma_t{}_eta{}_phi{}",
                            output::time_tag(g.time()),
                            output::time_tag(p.eta()),
                            output::time_tag(p.phi())
                        );
                        emit(output::path_for(&cfg.output_prefix, &suffix, ext), output::gamma_text(g, &labels, fmt), files)?;
                    }
                }
            }
            emit(output::path_for(&cfg.output_prefix, "_distance", ext), output::distance_text(&rows, fmt), files)?;
        }
        Scenario::Entropy => {
            let cut = cfg.cut.expect("entropy config resolves a cut");
            let reports: Vec<EntropyReport> = exec
                .map_slice(&us, |u| reduced_density_left(&prep.rho, u, cut))
                .into_iter()
                .collect::<Result<_, _>>()?;
            meta["entropy"] = json!({
                "cut": cut,
                "left_sites": labels[..cut].len(),
                "max_entropy": reports.iter().map(|r| r.entropy).fold(0.0, f64::max),
            });
            emit(output::path_for(&cfg.output_prefix, "_entropy", ext), output::entropy_text(&reports, fmt), files)?;
        }
        Scenario::Verify => unreachable!("handled by the caller"),
    }
    if tally.count > 0 {
        meta["checks"] = tally.to_json();
    }
    Ok(())
}

/// Grid points in `eta`-major order. Without a sweep there is one point,
/// `None`, meaning the configured state itself.
fn sweep_points(cfg: &RunConfig, family: Option<&CoherenceFamily>) -> Result<Vec<Option<CoherenceFamily>>, RunError> {
    let Some(sweep) = &cfg.sweep else {
        return Ok(vec![family.copied()]);
    };
    let base = family.expect("sweeps are restricted to family states");
    let etas = if sweep.eta.is_empty() { vec![base.eta()] } else { sweep.eta.clone() };
    let phis = if sweep.phi.is_empty() { vec![base.phi()] } else { sweep.phi.clone() };
    let mut points = Vec::with_capacity(etas.len() * phis.len());
    for &eta in &etas {
        for &phi in &phis {
            points.push(Some(CoherenceFamily::new(base.alpha(), eta, phi)?));
        }
    }
    Ok(points)
}
