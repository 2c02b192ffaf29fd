//! TOML run configuration.
//!
//! ```toml
//! scenario = "correlate"        # correlate | distance | entropy | verify | sweep
//! method = "auto"               # auto | bessel | spectral
//! cut = 7                       # entropy only; default floor(L / 2)
//!
//! [lattice]
//! sites = 41
//! boundary = "periodic"         # periodic | open
//! coupling = 1.0                # or couplings = [..] per bond
//! onsite = "decision-tree"      # or a constant, or one value per site
//! offset = "centered"           # or an integer label for site 0
//!
//! [state.family]                # exactly one of family | beams | pure | densityfile
//! alpha = 0.5
//! eta = 1.0
//! phi = 0.0
//!
//! [times]
//! list = [4.0]                  # or start / stop / count
//!
//! [output]
//! prefix = "out/pair"
//! format = "csv"                # csv | json
//! ```
//!
//! Unknown keys are rejected. Relative paths are taken from the directory
//! holding the config file.

use std::path::{Path, PathBuf};

use duowalk_core::{Boundary, Couplings, Lattice, LatticeSpec, OnsiteRule};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Correlate,
    Distance,
    Entropy,
    Verify,
    Sweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[default]
    Auto,
    Bessel,
    Spectral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: Scenario,
    #[serde(default)]
    method: Method,
    cut: Option<usize>,
    lattice: Option<RawLattice>,
    state: Option<RawState>,
    times: Option<RawTimes>,
    sweep: Option<RawSweep>,
    output: RawOutput,
    verify: Option<RawVerify>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLattice {
    sites: usize,
    #[serde(default)]
    boundary: RawBoundary,
    coupling: Option<f64>,
    couplings: Option<Vec<f64>>,
    onsite: Option<RawOnsite>,
    offset: Option<RawOffset>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
enum RawBoundary {
    #[default]
    Periodic,
    Open,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawOnsite {
    Constant(f64),
    Custom(Vec<f64>),
    Rule(String),
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawOffset {
    Label(i64),
    Named(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawState {
    family: Option<FamilyParams>,
    beams: Option<BeamsParams>,
    pure: Option<PureParams>,
    densityfile: Option<DensityFileParams>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyParams {
    pub alpha: f64,
    pub eta: f64,
    #[serde(default)]
    pub phi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct BeamsParams {
    pub delta: f64,
    pub theta: f64,
    #[serde(default)]
    pub phi: f64,
}

/// One term `c |q, r>` of a pure state, sites given as labels.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PureTerm {
    pub q: i64,
    pub r: i64,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PureParams {
    terms: Vec<PureTerm>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DensityFileParams {
    path: PathBuf,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTimes {
    list: Option<Vec<f64>>,
    start: Option<f64>,
    stop: Option<f64>,
    count: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    eta: Option<Vec<f64>>,
    phi: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    prefix: PathBuf,
    #[serde(default)]
    format: Format,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVerify {
    sites: Option<usize>,
    samples: Option<usize>,
    seed: Option<u64>,
}

pub const DEFAULT_VERIFY_SITES: usize = 6;
pub const DEFAULT_VERIFY_SAMPLES: usize = 100;
pub const DEFAULT_VERIFY_SEED: u64 = 20_110_317;

/// Source of the initial two-boson state.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StateSource {
    Family(FamilyParams),
    Beams(BeamsParams),
    Pure(Vec<PureTerm>),
    DensityFile(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sweep {
    pub eta: Vec<f64>,
    pub phi: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerifySettings {
    pub sites: usize,
    pub samples: usize,
    pub seed: u64,
}

/// Fully resolved configuration. Serialized into the metadata file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub method: Method,
    pub lattice: Option<LatticeSettings>,
    pub state: Option<StateSource>,
    pub times: Vec<f64>,
    pub sweep: Option<Sweep>,
    pub cut: Option<usize>,
    /// Output prefix as written in the config.
    pub prefix: PathBuf,
    /// `prefix` resolved against the config directory.
    #[serde(skip)]
    pub output_prefix: PathBuf,
    pub format: Format,
    pub verify: VerifySettings,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatticeSettings {
    pub sites: usize,
    pub boundary: String,
    pub couplings: Vec<f64>,
    pub onsite: Vec<f64>,
    pub offset: i64,
    #[serde(skip)]
    pub lattice: Lattice,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn bad<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

/// Parses and validates `text`. `base` is the directory relative paths
/// are resolved against.
pub fn parse_config(text: &str, base: &Path) -> Result<RunConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError(e.message().to_string()))?;

    let lattice = raw.lattice.map(resolve_lattice).transpose()?;
    let needs_lattice = raw.scenario != Scenario::Verify;
    if needs_lattice && lattice.is_none() {
        return bad("missing [lattice] table");
    }

    let state = raw.state.map(|s| resolve_state(s, base)).transpose()?;
    if needs_lattice && state.is_none() {
        return bad("missing [state] table");
    }

    let times = match raw.times {
        Some(t) => resolve_times(t)?,
        None if needs_lattice => return bad("missing [times] table"),
        None => Vec::new(),
    };

    let sweep = raw.sweep.map(|s| Sweep {
        eta: s.eta.unwrap_or_default(),
        phi: s.phi.unwrap_or_default(),
    });
    if let Some(sw) = &sweep {
        if sw.eta.is_empty() && sw.phi.is_empty() {
            return bad("[sweep] needs an `eta` or `phi` grid");
        }
        if sw.eta.iter().chain(&sw.phi).any(|v| !v.is_finite()) {
            return bad("sweep values must be finite");
        }
        if !matches!(state, Some(StateSource::Family(_))) {
            return bad("[sweep] needs a `family` state");
        }
    }
    if raw.scenario == Scenario::Sweep && sweep.is_none() {
        return bad("scenario `sweep` needs a [sweep] table");
    }

    let cut = match (raw.scenario, &lattice) {
        (Scenario::Entropy, Some(l)) => {
            let cut = raw.cut.unwrap_or(l.sites / 2);
            if cut == 0 || cut >= l.sites {
                return bad(format!("cut {cut} must satisfy 0 < cut < {}", l.sites));
            }
            Some(cut)
        }
        _ => raw.cut,
    };

    let verify = raw.verify.map_or(
        VerifySettings {
            sites: DEFAULT_VERIFY_SITES,
            samples: DEFAULT_VERIFY_SAMPLES,
            seed: DEFAULT_VERIFY_SEED,
        },
        |v| VerifySettings {
            sites: v.sites.unwrap_or(DEFAULT_VERIFY_SITES),
            samples: v.samples.unwrap_or(DEFAULT_VERIFY_SAMPLES),
            seed: v.seed.unwrap_or(DEFAULT_VERIFY_SEED),
        },
    );
    if !(2..=10).contains(&verify.sites) {
        return bad("verify.sites must lie in 2..=10");
    }
    if verify.samples == 0 {
        return bad("verify.samples must be positive");
    }

    if raw.output.prefix.as_os_str().is_empty() {
        return bad("output.prefix must not be empty");
    }
    let output_prefix = base.join(&raw.output.prefix);

    Ok(RunConfig {
        scenario: raw.scenario,
        method: raw.method,
        lattice,
        state,
        times,
        sweep,
        cut,
        prefix: raw.output.prefix,
        output_prefix,
        format: raw.output.format,
        verify,
    })
}

fn resolve_lattice(raw: RawLattice) -> Result<LatticeSettings, ConfigError> {
    let n = raw.sites;
    let boundary = match raw.boundary {
        RawBoundary::Periodic => Boundary::Periodic,
        RawBoundary::Open => Boundary::Open,
    };
    let couplings = match (raw.coupling, raw.couplings) {
        (Some(_), Some(_)) => return bad("give either `coupling` or `couplings`, not both"),
        (Some(c), None) => Couplings::Uniform(c),
        (None, Some(v)) => Couplings::PerBond(v),
        (None, None) => Couplings::Uniform(1.0),
    };
    let onsite_rule = match raw.onsite {
        None => OnsiteRule::DecisionTree,
        Some(RawOnsite::Rule(s)) if s == "decision-tree" => OnsiteRule::DecisionTree,
        Some(RawOnsite::Rule(s)) => return bad(format!("unknown on-site rule `{s}`")),
        Some(RawOnsite::Constant(b)) => OnsiteRule::Constant(b),
        Some(RawOnsite::Custom(v)) => OnsiteRule::Custom(v),
    };
    let site_offset = match raw.offset {
        None => -((n as i64 - 1) / 2),
        Some(RawOffset::Named(s)) if s == "centered" => -((n as i64 - 1) / 2),
        Some(RawOffset::Named(s)) => return bad(format!("unknown offset `{s}`")),
        Some(RawOffset::Label(o)) => o,
    };
    let spec = LatticeSpec {
        num_sites: n,
        site_offset,
        boundary,
        couplings,
        onsite_rule,
    };
    let lattice = spec.build().map_err(|e| ConfigError(format!("lattice: {e}")))?;
    Ok(LatticeSettings {
        sites: n,
        boundary: match boundary {
            Boundary::Periodic => "periodic".into(),
            Boundary::Open => "open".into(),
        },
        couplings: lattice.bonds().to_vec(),
        onsite: lattice.onsite().to_vec(),
        offset: site_offset,
        lattice,
    })
}

fn resolve_state(raw: RawState, base: &Path) -> Result<StateSource, ConfigError> {
    let given = [
        raw.family.is_some(),
        raw.beams.is_some(),
        raw.pure.is_some(),
        raw.densityfile.is_some(),
    ]
    .iter()
    .filter(|&&b| b)
    .count();
    if given != 1 {
        return bad(format!(
            "[state] needs exactly one of family, beams, pure, densityfile; found {given}"
        ));
    }
    let finite = |vals: &[f64]| vals.iter().all(|v| v.is_finite());
    if let Some(f) = raw.family {
        if !finite(&[f.alpha, f.eta, f.phi]) {
            return bad("family parameters must be finite");
        }
        return Ok(StateSource::Family(f));
    }
    if let Some(b) = raw.beams {
        if !finite(&[b.delta, b.theta, b.phi]) {
            return bad("beam parameters must be finite");
        }
        return Ok(StateSource::Beams(b));
    }
    if let Some(p) = raw.pure {
        if p.terms.is_empty() {
            return bad("pure state needs at least one term");
        }
        if p.terms.iter().any(|t| !finite(&[t.re, t.im])) {
            return bad("pure state amplitudes must be finite");
        }
        return Ok(StateSource::Pure(p.terms));
    }
    let d = raw.densityfile.expect("one source present");
    Ok(StateSource::DensityFile(base.join(d.path)))
}

fn resolve_times(raw: RawTimes) -> Result<Vec<f64>, ConfigError> {
    let times = match (raw.list, raw.start, raw.stop, raw.count) {
        (Some(list), None, None, None) => list,
        (None, Some(start), Some(stop), Some(count)) => {
            if count == 0 {
                return bad("times.count must be positive");
            }
            if count == 1 {
                vec![start]
            } else {
                let step = (stop - start) / (count - 1) as f64;
                (0..count)
                    .map(|i| if i + 1 == count { stop } else { start + step * i as f64 })
                    .collect()
            }
        }
        _ => return bad("[times] needs either `list` or all of `start`, `stop`, `count`"),
    };
    if times.is_empty() {
        return bad("time grid is empty");
    }
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return bad("times must be finite and non-negative");
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return bad("times must be strictly increasing");
    }
    Ok(times)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG1D: &str = r#"
scenario = "correlate"

[lattice]
sites = 41

[state.family]
alpha = 0.5
eta = 1
phi = 0

[times]
list = [4.0]

[output]
prefix = "out/pair"
"#;

    fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        parse_config(text, Path::new("/base"))
    }

    #[test]
    fn coherent_pair_resolves_defaults() {
        let c = parse(FIG1D).unwrap();
        assert_eq!(c.scenario, Scenario::Correlate);
        assert_eq!(c.method, Method::Auto);
        assert_eq!(c.times, vec![4.0]);
        assert_eq!(c.format, Format::Csv);
        assert_eq!(c.prefix, PathBuf::from("out/pair"));
        assert_eq!(c.output_prefix, PathBuf::from("/base/out/pair"));
        let l = c.lattice.unwrap();
        assert_eq!(l.offset, -20);
        assert_eq!(l.couplings, vec![1.0; 41]);
        assert_eq!(l.onsite, vec![2.0; 41]);
        assert_eq!(
            c.state,
            Some(StateSource::Family(FamilyParams {
                alpha: 0.5,
                eta: 1.0,
                phi: 0.0
            }))
        );
    }

    #[test]
    fn empty_times_rejected() {
        let text = FIG1D.replace("list = [4.0]", "list = []");
        assert!(parse(&text).unwrap_err().0.contains("empty"));
    }

    #[test]
    fn conflicting_state_sources_rejected() {
        let text = FIG1D.replace("[times]", "[state.densityfile]\npath = \"rho.txt\"\n\n[times]");
        assert!(parse(&text).unwrap_err().0.contains("exactly one"));
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = FIG1D.replace("sites = 41", "sites = 41\ncolour = 3");
        assert!(parse(&text).unwrap_err().0.contains("unknown field"));
        let text = FIG1D.replace("scenario = \"correlate\"", "scenario = \"correlate\"\nseed = 1");
        assert!(parse(&text).is_err());
    }

    #[test]
    fn malformed_numbers_rejected() {
        let text = FIG1D.replace("alpha = 0.5", "alpha = \"half\"");
        assert!(parse(&text).is_err());
        let text = FIG1D.replace("alpha = 0.5", "alpha = 0.5.1");
        assert!(parse(&text).is_err());
    }

    #[test]
    fn time_grid() {
        let text = FIG1D.replace("list = [4.0]", "start = 0\nstop = 2\ncount = 5");
        assert_eq!(parse(&text).unwrap().times, vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        let text = FIG1D.replace("list = [4.0]", "list = [1.0, 1.0]");
        assert!(parse(&text).is_err());
        let text = FIG1D.replace("list = [4.0]", "list = [-1.0]");
        assert!(parse(&text).is_err());
        let text = FIG1D.replace("list = [4.0]", "list = [1.0]\ncount = 3");
        assert!(parse(&text).is_err());
    }

    #[test]
    fn entropy_cut_default_and_range() {
        let text = FIG1D.replace("\"correlate\"", "\"entropy\"").replace("sites = 41", "sites = 15");
        assert_eq!(parse(&text).unwrap().cut, Some(7));
        let text = text.replace("scenario = \"entropy\"", "scenario = \"entropy\"\ncut = 15");
        assert!(parse(&text).is_err());
    }

    #[test]
    fn lattice_variants() {
        let text = FIG1D.replace(
            "sites = 41",
            "sites = 4\nboundary = \"open\"\ncouplings = [1.0, 2.0, 1.0]\nonsite = 0.5\noffset = 3",
        );
        let l = parse(&text).unwrap().lattice.unwrap();
        assert_eq!(l.onsite, vec![0.5; 4]);
        assert_eq!(l.offset, 3);
        let text = FIG1D.replace("sites = 41", "sites = 4\nonsite = \"flat\"");
        assert!(parse(&text).is_err());
        let text = FIG1D.replace("sites = 41", "sites = 4\ncoupling = 1.0\ncouplings = [1.0]");
        assert!(parse(&text).is_err());
        let text = FIG1D.replace("sites = 41", "sites = 1");
        assert!(parse(&text).is_err());
    }

    #[test]
    fn sweep_needs_family() {
        let text = FIG1D.replace("\"correlate\"", "\"sweep\"");
        assert!(parse(&text).unwrap_err().0.contains("[sweep]"));
        let ok = format!("{}\n[sweep]\neta = [0.0, 1.0]\n", FIG1D.replace("\"correlate\"", "\"sweep\""));
        assert_eq!(parse(&ok).unwrap().sweep.unwrap().eta, vec![0.0, 1.0]);
        let pure = ok.replace(
            "[state.family]\nalpha = 0.5\neta = 1\nphi = 0",
            "[state.pure]\nterms = [{ q = 0, r = 1, re = 1.0 }]",
        );
        assert!(parse(&pure).unwrap_err().0.contains("family"));
    }

    #[test]
    fn verify_needs_no_lattice() {
        let c = parse("scenario = \"verify\"\n[output]\nprefix = \"v\"\n[verify]\nsites = 5\n").unwrap();
        assert_eq!(c.verify.sites, 5);
        assert_eq!(c.verify.samples, DEFAULT_VERIFY_SAMPLES);
        assert!(c.times.is_empty());
    }
}
