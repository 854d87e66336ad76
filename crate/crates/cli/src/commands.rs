//! One function per subcommand, each producing a [`Report`].

use std::fs;
use std::path::Path;

use qedcc_core::cc::{self, CcError, CcOptions, Method, PairMode};
use qedcc_core::fock::{self, FockError, GenerationRule};
use qedcc_core::model::{replicate, ModelError, ModelSystem, PhysicalConstants, ValidationOptions};
use qedcc_core::mrcc::{self, ModelSpaceFile, MrccError, MrccOptions};
use qedcc_core::oracle_h2::{self, H2UnitParams, OracleError};
use qedcc_core::photon::{self, PhotonError, ThermalFile};
use qedcc_core::qed::{assemble_channels, ChannelSet, PairDenominator, QedError};
use thiserror::Error;

use crate::report::Report;

/// Doubles-CI spaces above this size are skipped by `extensivity`.
pub const DCI_SPACE_LIMIT: usize = 2000;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Numerical(String),
    /// The report was produced but flags a problem with the input.
    #[error("{message}")]
    Rejected {
        report: Box<Report>,
        message: String,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(_) => 1,
            CliError::Input(_) | CliError::Rejected { .. } => 2,
        }
    }

    pub fn class(&self) -> &'static str {
        match self {
            CliError::Numerical(_) => "numerical",
            CliError::Input(_) => "input",
            CliError::Rejected { .. } => "invalid",
        }
    }
}

impl From<CcError> for CliError {
    fn from(e: CcError) -> Self {
        match e {
            CcError::Divergence { .. } | CcError::Numerical(_) => {
                CliError::Numerical(e.to_string())
            }
            CcError::Configuration(_) | CcError::Qed(_) | CcError::Fock(_) => {
                CliError::Input(e.to_string())
            }
        }
    }
}

impl From<MrccError> for CliError {
    fn from(e: MrccError) -> Self {
        match e {
            MrccError::Divergence { .. }
            | MrccError::Numerical(_)
            | MrccError::Normalization { .. }
            | MrccError::Degenerate => CliError::Numerical(e.to_string()),
            MrccError::Configuration(_) | MrccError::Fock(_) | MrccError::Photon(_) => {
                CliError::Input(e.to_string())
            }
        }
    }
}

macro_rules! input_error {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Input(e.to_string())
            }
        }
    )*};
}

input_error!(ModelError, QedError, OracleError, PhotonError, FockError);

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load_model(path: &Path) -> Result<ModelSystem, CliError> {
    let system = ModelSystem::from_json_str(&read(path)?)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let report = system.validate();
    if let Some(first) = report.violations.first() {
        return Err(CliError::Input(format!(
            "{}: {} invariant violation(s), first: {first}",
            path.display(),
            report.violations.len()
        )));
    }
    Ok(system)
}

pub fn load_fixture(path: &Path) -> Result<H2UnitParams, CliError> {
    serde_json::from_str(&read(path)?)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, Copy)]
pub struct SolverSettings {
    pub max_iterations: usize,
    pub damping: f64,
    pub residual_tol: f64,
    pub energy_tol: f64,
    pub level_shift: f64,
}

impl SolverSettings {
    pub fn cc(&self, pair_mode: PairMode, pair_denominator: PairDenominator) -> CcOptions {
        CcOptions {
            max_iterations: self.max_iterations,
            damping: self.damping,
            residual_tol: self.residual_tol,
            energy_tol: self.energy_tol,
            level_shift: self.level_shift,
            pair_mode,
            pair_denominator,
        }
    }
}

pub struct RunArgs<'a> {
    pub model: &'a Path,
    pub method: Method,
    pub channels: ChannelSet,
    pub pair_mode: PairMode,
    pub pair_denominator: PairDenominator,
    pub solver: SolverSettings,
}

pub fn run(args: &RunArgs) -> Result<Report, CliError> {
    let system = load_model(args.model)?;
    let h = assemble_channels(&system, args.channels)?;
    let options = args.solver.cc(args.pair_mode, args.pair_denominator);
    let (amps, rep) = cc::solve(&h, args.method, &options)?;

    let mut r = Report::new("correlation", &["quantity", "hartree"]);
    for (name, value) in [
        ("e_reference", rep.e_reference),
        ("e_breit0", rep.e_breit0),
        ("e_lamb0", rep.e_lamb0),
        ("e_hf0", rep.e_hf0),
        ("e_correl", rep.e_correl),
        ("e_1pair", rep.e_1pair),
        ("e_2pair", rep.e_2pair),
        ("e_total", rep.e_total),
    ] {
        r.push(vec![name.into(), value.into()]);
    }
    r.note("method", label(args.method));
    r.note("channels", args.channels.to_string());
    r.note("pair_mode", label(args.pair_mode));
    r.note("pair_denominator", label(args.pair_denominator));
    r.note("converged", rep.converged);
    r.note("iterations", amps.iterations);
    r.note("residual_norm", amps.residual_norm);
    Ok(r)
}

/// snake_case name of a serializable unit enum.
fn label<T: serde::Serialize>(v: T) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        other => format!("{other:?}"),
    }
}

pub fn oracle_h2(fixture: &Path, dci_units: usize) -> Result<Report, CliError> {
    let p = load_fixture(fixture)?;
    if dci_units == 0 {
        return Err(CliError::Input("--dci-units must be at least 1".into()));
    }
    let dc = oracle_h2::correl_dc(&p);
    let dcb = oracle_h2::correl_dcb(&p);
    let mut r = Report::new("oracle_h2", &["quantity", "hartree"]);
    let rows: [(String, f64); 7] = [
        ("delta_dc".into(), oracle_h2::delta_dc(&p)),
        ("delta_dcb".into(), oracle_h2::delta_dcb(&p)),
        ("correl_dc_per_unit".into(), dc.energy),
        ("correl_dcb_per_unit".into(), dcb.energy),
        (
            "breit_correction_leading".into(),
            oracle_h2::breit_correction_leading(&p)?,
        ),
        (
            format!("dci_per_unit_n{dci_units}"),
            oracle_h2::dci_per_unit(&p, dci_units),
        ),
        ("mp2_per_unit".into(), oracle_h2::mp2_per_unit(&p)?),
    ];
    for (name, value) in rows {
        r.push(vec![name.into(), value.into()]);
    }
    r.note("coefficient_dc", dc.coefficient);
    r.note("coefficient_dcb", dcb.coefficient);
    Ok(r)
}

pub fn extensivity(
    fixture: &Path,
    units: &[usize],
    channels: ChannelSet,
    solver: &SolverSettings,
) -> Result<Report, CliError> {
    let p = load_fixture(fixture)?;
    if units.is_empty() || units.contains(&0) {
        return Err(CliError::Input(
            "--units needs positive replica counts".into(),
        ));
    }
    let unit = oracle_h2::build_unit(&p, false, PhysicalConstants::default());
    let options = solver.cc(PairMode::Decoupled, PairDenominator::Exact);
    let mut r = Report::new(
        "extensivity",
        &[
            "units",
            "ccd_per_unit",
            "dci_formula_per_unit",
            "dci_per_unit",
        ],
    );
    for &n in units {
        let system = replicate(&unit, n)?;
        let (_, rep) = cc::ccd_solve(&system, channels, &options)?;
        let brute = dci_if_small(&system, channels)?;
        r.push(vec![
            n.into(),
            (rep.e_correl / n as f64).into(),
            oracle_h2::dci_per_unit(&p, n).into(),
            brute.map(|e| e / n as f64).into(),
        ]);
    }
    r.note("channels", channels.to_string());
    r.note("dci_space_limit", DCI_SPACE_LIMIT);
    Ok(r)
}

fn dci_if_small(system: &ModelSystem, channels: ChannelSet) -> Result<Option<f64>, CliError> {
    match fock::enumerate_capped(&system.levels, GenerationRule::DoublesOnly, DCI_SPACE_LIMIT) {
        Ok(_) => Ok(Some(cc::dci_energy(system, channels)?)),
        Err(FockError::Capacity { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

pub fn photon(path: &Path) -> Result<Report, CliError> {
    let file = ThermalFile::from_json_str(&read(path)?)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let state = file.state()?;
    let mut r = Report::new(
        "photon",
        &[
            "mode",
            "k_norm",
            "omega",
            "x",
            "weight",
            "mean_occupation",
            "ladder_sum",
            "tail_bound",
        ],
    );
    for (i, m) in state.modes.iter().enumerate() {
        let x = state.reduced_energy(m);
        r.push(vec![
            i.into(),
            m.k_norm().into(),
            m.omega(&state.constants).into(),
            x.into(),
            m.weight.into(),
            photon::mean_occupation(m, &state).into(),
            photon::ladder_sum(x, state.n_max).into(),
            state.tail_bound(m).into(),
        ]);
    }
    let a = photon::vector_potential_average(&state, [0.0; 3], 0.0);
    let a_norm = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    r.note("tau", state.tau);
    r.note("volume", state.volume);
    r.note("n_max", state.n_max);
    r.note("energy_density", photon::radiation_energy_density(&state));
    r.note("vector_potential_norm", a_norm);
    if let Some(currents) = file.currents() {
        let c = photon::radiative_coupling(&currents, &state)?;
        r.note("coupling_re", c.value.re);
        r.note("coupling_im", c.value.im);
        r.note("coupling_magnitude", c.magnitude);
        r.note("coupling_order_estimate", c.order_estimate);
        r.note("coupling_tail_bound", c.tail_bound);
    }
    Ok(r)
}

pub struct MrccArgs<'a> {
    pub model: &'a Path,
    pub space: &'a Path,
    pub channels: ChannelSet,
    pub target_root: Option<usize>,
    pub solver: SolverSettings,
}

pub fn mrcc(args: &MrccArgs) -> Result<Report, CliError> {
    let system = load_model(args.model)?;
    let file = ModelSpaceFile::from_json_str(&read(args.space)?)
        .map_err(|e| CliError::Input(format!("{}: {e}", args.space.display())))?;
    let space = file.space()?;
    let target_root = args.target_root.unwrap_or(file.target_root);
    let h = assemble_channels(&system, args.channels)?;
    let options = MrccOptions {
        target_root,
        max_iterations: args.solver.max_iterations,
        damping: args.solver.damping,
        residual_tol: args.solver.residual_tol,
        energy_tol: args.solver.energy_tol,
        ..MrccOptions::default()
    };
    let sol = mrcc::mrcc_residual_solve(&space, &h, &options)?;

    let mut r = Report::new("mrcc", &["root", "hartree", "imaginary", "target"]);
    for (k, pair) in sol.eigenpairs.iter().enumerate() {
        r.push(vec![
            k.into(),
            pair.energy.re.into(),
            pair.energy.im.into(),
            (if k == sol.target { "*" } else { "" }).into(),
        ]);
    }
    r.note("channels", args.channels.to_string());
    r.note("references", file.references.join(","));
    r.note("iterations", sol.iterations);
    r.note("residual_norm", sol.residual_norm);
    r.note("lamb_scalar", h.lamb_scalar);
    if !sol.warnings.is_empty() {
        r.note("warnings", sol.warnings.join("; "));
    }
    Ok(r)
}

pub fn validate(model: &Path, tolerance: f64) -> Result<Report, CliError> {
    let system = ModelSystem::from_json_str(&read(model)?)
        .map_err(|e| CliError::Input(format!("{}: {e}", model.display())))?;
    let options = ValidationOptions {
        tolerance,
        ..ValidationOptions::default()
    };
    let found = system.validate_with(&options);
    let mut r = Report::new("validation", &["kind", "location", "magnitude"]);
    for v in &found.violations {
        r.push(vec![
            label(v.kind).into(),
            v.location.clone().into(),
            v.magnitude.into(),
        ]);
    }
    r.note("violations", found.violations.len());
    match found.violations.first() {
        None => Ok(r),
        Some(first) => Err(CliError::Rejected {
            message: format!(
                "{}: {} invariant violation(s), first: {first}",
                model.display(),
                found.violations.len()
            ),
            report: Box::new(r),
        }),
    }
}
