//! Forward solver for `u_t = Δu^γ` on the unit square with `u = 0` on the
//! boundary: P1 elements with lumped mass in space, semi-implicit Euler in time.
//!
//! Each step lags the nonlinear coefficient, `u^γ ≈ (u^n)^{γ-1} u^{n+1}`, and
//! solves the linear system
//!
//! ```text
//! (M/dt + K·D_n) u^{n+1} = (M/dt) u^n,   D_n = diag((u^n)^{γ-1})
//! ```
//!
//! on the interior nodes. `K·D_n` is not symmetric.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fem::{
    assemble_lumped_mass, assemble_stiffness, field_norm, solve_dirichlet_system, LumpedMass, Norm, ScalarField,
    SparseMatrix,
};
use crate::mesh::Mesh;
use crate::profile::{self, solve_profile};

/// Relative slack allowed between `T` and `steps·dt`.
const STEP_SLACK: f64 = 1e-9;

/// Initial data descriptor.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    /// `c·xy(1-x)(1-y)`.
    PolyBump { c: f64 },
    /// `τ^{-1/(γ-1)} f` with `f` the stationary profile. `gamma` defaults to
    /// the forward exponent.
    ScaledProfile { tau: f64, gamma: Option<f64> },
    /// Nodal values read from a field file.
    File(PathBuf),
}

impl fmt::Display for InitialData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialData::PolyBump { c } => write!(f, "poly_bump({c})"),
            InitialData::ScaledProfile { tau, gamma: None } => write!(f, "scaled_profile({tau})"),
            InitialData::ScaledProfile { tau, gamma: Some(g) } => write!(f, "scaled_profile({tau},{g})"),
            InitialData::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

fn parse_args(s: &str, name: &str) -> Option<Result<Vec<f64>>> {
    let inner = s.strip_prefix(name)?.trim().strip_prefix('(')?.strip_suffix(')')?;
    Some(
        inner
            .split(',')
            .map(|a| a.trim().parse::<f64>().map_err(|e| Error::UnknownInitialData(format!("{s}: {e}"))))
            .collect(),
    )
}

impl FromStr for InitialData {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(path) = s.strip_prefix("file:") {
            return Ok(InitialData::File(PathBuf::from(path)));
        }
        if let Some(args) = parse_args(s, "poly_bump") {
            return match args?.as_slice() {
                [c] if c.is_finite() && *c >= 0.0 => Ok(InitialData::PolyBump { c: *c }),
                _ => Err(Error::UnknownInitialData(format!("{s}: expected poly_bump(c) with c >= 0"))),
            };
        }
        if let Some(args) = parse_args(s, "scaled_profile") {
            return match args?.as_slice() {
                [tau] if *tau > 0.0 => Ok(InitialData::ScaledProfile { tau: *tau, gamma: None }),
                [tau, g] if *tau > 0.0 && *g > 1.0 => Ok(InitialData::ScaledProfile { tau: *tau, gamma: Some(*g) }),
                _ => Err(Error::UnknownInitialData(format!(
                    "{s}: expected scaled_profile(tau) or scaled_profile(tau, gamma) with tau > 0, gamma > 1"
                ))),
            };
        }
        Err(Error::UnknownInitialData(s.to_string()))
    }
}

/// Nodal interpolant of the initial data; zero on the boundary, nonnegative.
pub fn initial_field(mesh: &Arc<Mesh>, spec: &InitialData, gamma: f64) -> Result<ScalarField> {
    let field = match spec {
        InitialData::PolyBump { c } => {
            let c = *c;
            ScalarField::from_fn(mesh.clone(), move |x, y| c * x * y * (1.0 - x) * (1.0 - y))
        }
        InitialData::ScaledProfile { tau, gamma: g } => {
            let g = g.unwrap_or(gamma);
            let p = solve_profile(mesh, g, profile::DEFAULT_TOL, profile::DEFAULT_MAX_ITER)?;
            p.f.scaled(profile::time_factor(g, *tau))
        }
        InitialData::File(path) => {
            let file = crate::io::read_field(path)?;
            if file.field.mesh().n() != mesh.n() {
                return Err(Error::InvalidConfig(format!(
                    "initial data file {} has N = {}, expected {}",
                    path.display(),
                    file.field.mesh().n(),
                    mesh.n()
                )));
            }
            if let Some(node) = file.field.values().iter().position(|&v| v < 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "initial data file {} is negative at node {node}",
                    path.display()
                )));
            }
            ScalarField::new(mesh.clone(), file.field.into_values())?
        }
    };
    let mut values = field.into_values();
    for k in mesh.boundary_nodes() {
        values[k] = 0.0;
    }
    ScalarField::new(mesh.clone(), values)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForwardConfig {
    pub gamma: f64,
    pub n: usize,
    pub dt: f64,
    pub t_final: f64,
    pub initial: InitialData,
    /// Times at which to keep a copy of `u`; each is rounded to the nearest step.
    pub snapshot_times: Vec<f64>,
}

impl ForwardConfig {
    /// Configuration with the default time step `dt = h = 1/n`.
    pub fn new(gamma: f64, n: usize, t_final: f64, initial: InitialData) -> Self {
        Self { gamma, n, dt: 1.0 / n as f64, t_final, initial, snapshot_times: Vec::new() }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn with_snapshots(mut self, times: Vec<f64>) -> Self {
        self.snapshot_times = times;
        self
    }

    /// Validates the configuration and returns the step count `T/dt`.
    pub fn step_count(&self) -> Result<usize> {
        if !(self.gamma > 1.0) || !self.gamma.is_finite() {
            return Err(Error::InvalidConfig(format!("gamma must exceed 1, got {}", self.gamma)));
        }
        if self.n == 0 {
            return Err(Error::InvalidConfig("N must be at least 1".into()));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidConfig(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_final > 0.0) || !self.t_final.is_finite() {
            return Err(Error::InvalidConfig(format!("T must be positive, got {}", self.t_final)));
        }
        let ratio = self.t_final / self.dt;
        let steps = ratio.round();
        if steps < 1.0 || (steps - ratio).abs() > STEP_SLACK * ratio {
            return Err(Error::InvalidConfig(format!(
                "T = {} is not an integer multiple of dt = {}",
                self.t_final, self.dt
            )));
        }
        Ok(steps as usize)
    }
}

#[derive(Debug, Clone)]
pub struct ForwardResult {
    pub u_t: ScalarField,
    pub step_count: usize,
    /// `max u` at `t = k·dt` for `k = 0..=step_count` (entry 0 is the initial data).
    /// Bounded by `max u0`; for large `γ` and coarse `dt` it may rise transiently.
    pub max_history: Vec<f64>,
    /// Lumped L¹ norm of `u` at the same times.
    pub mass_history: Vec<f64>,
    /// `(t, u(t))` for each requested snapshot time.
    pub snapshots: Vec<(f64, ScalarField)>,
}

/// Reusable operators for repeated steps on one mesh.
#[derive(Debug, Clone)]
pub struct Stepper {
    mesh: Arc<Mesh>,
    stiffness: SparseMatrix,
    mass: LumpedMass,
    boundary: Vec<usize>,
}

impl Stepper {
    pub fn new(mesh: Arc<Mesh>) -> Self {
        let stiffness = assemble_stiffness(&mesh);
        let mass = assemble_lumped_mass(&mesh);
        let boundary = mesh.boundary_nodes();
        Self { mesh, stiffness, mass, boundary }
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn mass(&self) -> &LumpedMass {
        &self.mass
    }

    pub fn step(&self, u_n: &ScalarField, dt: f64, gamma: f64) -> Result<ScalarField> {
        let values = step_values(&self.stiffness, &self.mass, &self.boundary, u_n.values(), dt, gamma)?;
        ScalarField::new(self.mesh.clone(), values)
    }
}

fn step_values(
    stiffness: &SparseMatrix,
    mass: &LumpedMass,
    boundary: &[usize],
    u_n: &[f64],
    dt: f64,
    gamma: f64,
) -> Result<Vec<f64>> {
    let lag: Vec<f64> = u_n.iter().map(|&u| u.max(0.0).powf(gamma - 1.0)).collect();
    let m_dt: Vec<f64> = mass.weights().iter().map(|w| w / dt).collect();
    let system = stiffness.scale_columns(&lag).add_diagonal(&m_dt);
    let rhs: Vec<f64> = m_dt.iter().zip(u_n).map(|(m, u)| m * u).collect();
    let mut next = solve_dirichlet_system(&system, &rhs, boundary, &vec![0.0; u_n.len()])?;
    for (node, v) in next.iter_mut().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFinite { node });
        }
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    Ok(next)
}

/// One semi-implicit Euler step from `u_n`.
pub fn advance_step(
    u_n: &ScalarField,
    dt: f64,
    gamma: f64,
    stiffness: &SparseMatrix,
    mass: &LumpedMass,
) -> Result<ScalarField> {
    let mesh = u_n.mesh();
    let values = step_values(stiffness, mass, &mesh.boundary_nodes(), u_n.values(), dt, gamma)?;
    ScalarField::new(mesh.clone(), values)
}

/// Integrates from the configured initial data to `T`.
pub fn solve_forward(config: &ForwardConfig) -> Result<ForwardResult> {
    let steps = config.step_count()?;
    let mesh = Arc::new(Mesh::unit_square(config.n)?);
    let u0 = initial_field(&mesh, &config.initial, config.gamma)?;
    solve_forward_from(config, u0, steps)
}

fn solve_forward_from(config: &ForwardConfig, u0: ScalarField, steps: usize) -> Result<ForwardResult> {
    let stepper = Stepper::new(u0.mesh().clone());
    let dt = config.dt;

    let mut snapshot_steps: Vec<(usize, usize)> = config
        .snapshot_times
        .iter()
        .enumerate()
        .map(|(k, &t)| (((t / dt).round().max(0.0) as usize).min(steps), k))
        .collect();
    snapshot_steps.sort_unstable();
    let mut snapshots: Vec<Option<(f64, ScalarField)>> = vec![None; config.snapshot_times.len()];
    let record = |step: usize, u: &ScalarField, snapshots: &mut Vec<Option<(f64, ScalarField)>>| {
        for &(s, k) in snapshot_steps.iter().filter(|(s, _)| *s == step) {
            snapshots[k] = Some((s as f64 * dt, u.clone()));
        }
    };

    let mut max_history = Vec::with_capacity(steps + 1);
    let mut mass_history = Vec::with_capacity(steps + 1);
    max_history.push(u0.max());
    mass_history.push(field_norm(&u0, stepper.mass(), Norm::L1));
    record(0, &u0, &mut snapshots);

    let mut u = u0;
    for step in 1..=steps {
        u = stepper.step(&u, dt, config.gamma).map_err(|e| Error::StepFailure {
            step,
            time: step as f64 * dt,
            source: Box::new(e),
        })?;
        max_history.push(u.max());
        mass_history.push(field_norm(&u, stepper.mass(), Norm::L1));
        record(step, &u, &mut snapshots);
    }

    Ok(ForwardResult {
        u_t: u,
        step_count: steps,
        max_history,
        mass_history,
        snapshots: snapshots.into_iter().map(|s| s.expect("every snapshot step visited")).collect(),
    })
}
