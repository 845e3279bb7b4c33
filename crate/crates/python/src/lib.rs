//! Python bindings: kernels and front profiles, growth laws, the minimal
//! speed and wave profiles, and simulation runs. Results come back as plain
//! lists and dicts.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use satfront::{
    build_kernel_with, find_c_star, front_profile, run, shoot_profile, ConvolutionStencil, FrontKernelProfile, Grid,
    GridField, GrowthLaw, Kernel, KernelKind, Model, ModelParams, RadialProfile, RunOptions, SnapshotRecorder,
    StencilQuadrature,
};

fn value_error(e: impl ToString) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_quadrature(name: &str) -> Result<StencilQuadrature, String> {
    match name {
        "midpoint" => Ok(StencilQuadrature::Midpoint),
        "cell_average" => Ok(StencilQuadrature::CellAverage),
        other => Err(format!("unknown quadrature `{other}` (expected midpoint or cell_average)")),
    }
}

fn parse_model(name: &str, gamma: Option<f64>) -> Result<Model, String> {
    match (name, gamma) {
        ("gamma", Some(gamma)) => Ok(Model::Gamma { gamma }),
        ("gamma", None) => Err("model `gamma` needs a gamma value".into()),
        ("singular", None) => Ok(Model::Singular),
        ("generalized_singular", None) => Ok(Model::GeneralizedSingular),
        (_, Some(_)) => Err("gamma is only used by model `gamma`".into()),
        (other, None) => Err(format!("unknown model `{other}`")),
    }
}

/// Radial kernel `K` on a grid of spacing `dx`, with its stencil and the
/// front profile `h`.
#[pyclass(name = "Kernel", module = "satfront_py", frozen)]
struct PyKernel {
    kernel: Kernel,
    stencil: ConvolutionStencil,
    front: FrontKernelProfile,
}

#[pymethods]
impl PyKernel {
    /// `profile`: optional `(rho, K(rho))` knots; the indicator of `B_ell` otherwise.
    #[new]
    #[pyo3(signature = (ell, dim, dx, profile = None, quadrature = "midpoint", front_spacing = None))]
    fn new(
        ell: f64,
        dim: usize,
        dx: f64,
        profile: Option<Vec<(f64, f64)>>,
        quadrature: &str,
        front_spacing: Option<f64>,
    ) -> PyResult<Self> {
        let kind = match profile {
            None => KernelKind::IndicatorBall,
            Some(points) => KernelKind::CustomRadial(RadialProfile::new(&points).map_err(value_error)?),
        };
        let q = parse_quadrature(quadrature).map_err(value_error)?;
        let (kernel, stencil) = build_kernel_with(kind, ell, dim, dx, q).map_err(value_error)?;
        let front = front_profile(&kernel, front_spacing.unwrap_or(ell / 1000.0)).map_err(value_error)?;
        Ok(Self { kernel, stencil, front })
    }

    #[getter]
    fn ell(&self) -> f64 {
        self.kernel.radius
    }

    #[getter]
    fn dim(&self) -> usize {
        self.kernel.dim
    }

    #[getter]
    fn dx(&self) -> f64 {
        self.stencil.grid_spacing
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.stencil.weights.clone()
    }

    #[getter]
    fn offsets(&self) -> Vec<(i64, i64)> {
        self.stencil.offsets.iter().map(|o| (o[0] as i64, o[1] as i64)).collect()
    }

    /// `h(s)` by interpolation of the tabulated profile.
    fn h(&self, s: f64) -> f64 {
        self.front.eval(s)
    }

    /// Samples `(s, h(s))` of the front profile on `[-ell, ell]`.
    fn front_profile(&self) -> (Vec<f64>, Vec<f64>) {
        self.front.samples().unzip()
    }

    fn __repr__(&self) -> String {
        format!(
            "Kernel(ell={}, dim={}, dx={}, weights={})",
            self.kernel.radius,
            self.kernel.dim,
            self.stencil.grid_spacing,
            self.stencil.weights.len()
        )
    }
}

#[pyclass(name = "GrowthLaw", module = "satfront_py", frozen)]
struct PyGrowthLaw {
    law: GrowthLaw,
}

#[pymethods]
impl PyGrowthLaw {
    /// `g(u) = rate * u`.
    #[staticmethod]
    fn linear(rate: f64) -> PyResult<Self> {
        Ok(Self { law: GrowthLaw::linear(rate).map_err(value_error)? })
    }

    /// `g(u) = rate * u * (1 - u / capacity)`.
    #[staticmethod]
    fn logistic(rate: f64, capacity: f64) -> PyResult<Self> {
        Ok(Self { law: GrowthLaw::logistic(rate, capacity).map_err(value_error)? })
    }

    fn g(&self, u: f64) -> f64 {
        self.law.g(u)
    }

    #[getter]
    fn r(&self) -> f64 {
        self.law.r
    }

    #[getter]
    fn lipschitz(&self) -> f64 {
        self.law.lipschitz
    }

    #[getter]
    fn sup(&self) -> f64 {
        self.law.sup
    }

    #[getter]
    fn g_one(&self) -> f64 {
        self.law.g_one
    }

    #[getter]
    fn monotone_cap(&self) -> bool {
        self.law.monotone_cap
    }

    fn __repr__(&self) -> String {
        format!("GrowthLaw({:?})", self.law.rate)
    }
}

/// Minimal wave speed as a dict with `c_star`, `bracket`, `analytic_bounds`
/// and diagnostics.
#[pyfunction]
#[pyo3(signature = (growth, kernel, tol = satfront::waves::DEFAULT_TOLERANCE))]
fn c_star<'py>(
    py: Python<'py>,
    growth: &PyGrowthLaw,
    kernel: &PyKernel,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let r = find_c_star(&growth.law, &kernel.front, tol).map_err(value_error)?;
    let d = PyDict::new(py);
    d.set_item("c_star", r.c_star)?;
    d.set_item("bracket", r.bracket)?;
    d.set_item("analytic_bounds", r.analytic_bounds)?;
    d.set_item("phi_at_bracket", r.phi_at_bracket)?;
    d.set_item("iterations", r.iterations)?;
    d.set_item("positive_on_support", r.positive_on_support)?;
    d.set_item("ode_step", r.ode_step)?;
    Ok(d)
}

/// Wave profile `phi_c` on `[0, s_max]` as `(s, phi)` lists.
#[pyfunction]
#[pyo3(signature = (c, growth, kernel, s_max, ode_step = None))]
fn shoot(
    c: f64,
    growth: &PyGrowthLaw,
    kernel: &PyKernel,
    s_max: f64,
    ode_step: Option<f64>,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let step = ode_step.unwrap_or(kernel.front.ell / satfront::waves::DEFAULT_STEPS_PER_ELL);
    let p = shoot_profile(c, &growth.law, &kernel.front, s_max, step).map_err(value_error)?;
    Ok(p.samples().unzip())
}

/// Node coordinates of the centred box grid used by `simulate`.
#[pyfunction]
fn grid_coords(dim: usize, box_radius: f64, dx: f64) -> PyResult<Vec<(f64, f64)>> {
    let grid = Grid::centered_box(dim, box_radius, dx).map_err(value_error)?;
    Ok((0..grid.len()).map(|k| grid.coords(k)).map(|p| (p[0], p[1])).collect())
}

struct SimOutput {
    values: Vec<f64>,
    saturation_times: Vec<f64>,
    times: Vec<f64>,
    snapshots: Vec<Vec<f64>>,
    steps: u64,
    hard_invariants_hold: bool,
    min_value: f64,
    max_value: f64,
}

#[allow(clippy::too_many_arguments)]
fn simulate_impl(
    kernel: &PyKernel,
    growth: &GrowthLaw,
    u0: Vec<f64>,
    box_radius: f64,
    t_end: f64,
    dt: Option<f64>,
    model: Model,
    saturation_eps: f64,
    observe_every: u64,
) -> Result<SimOutput, String> {
    let grid = Grid::centered_box(kernel.kernel.dim, box_radius, kernel.stencil.grid_spacing).map_err(|e| e.to_string())?;
    let field = GridField::new(grid, u0, 0.0).map_err(|e| e.to_string())?;
    let dt = dt.unwrap_or_else(|| satfront::stability_cap(&model, growth));
    let params = ModelParams { model, saturation_eps, dt, t_end };
    let mut recorder = SnapshotRecorder::default();
    let summary = {
        let mut obs: [&mut dyn satfront::Observer; 1] = [&mut recorder];
        run(&field, params, &kernel.stencil, growth, &mut obs, RunOptions { observe_every })
            .map_err(|e| e.to_string())?
    };
    let inv = &summary.invariants;
    Ok(SimOutput {
        hard_invariants_hold: inv.hard_invariants_hold(),
        min_value: inv.min_value,
        max_value: inv.max_value,
        steps: summary.steps,
        values: summary.final_field.values,
        saturation_times: summary.saturation_times,
        times: recorder.times,
        snapshots: recorder.values,
    })
}

/// Runs the dynamics from `u0` (values at `grid_coords(kernel.dim, box_radius,
/// kernel.dx)`). Returns a dict with the final field, saturation times
/// (`inf` for cells never saturated), snapshot times and values, and
/// invariant diagnostics.
#[pyfunction]
#[pyo3(signature = (kernel, growth, u0, box_radius, t_end, dt = None, model = "singular", gamma = None, saturation_eps = 0.0, observe_every = 1))]
#[allow(clippy::too_many_arguments)]
fn simulate<'py>(
    py: Python<'py>,
    kernel: &PyKernel,
    growth: &PyGrowthLaw,
    u0: Vec<f64>,
    box_radius: f64,
    t_end: f64,
    dt: Option<f64>,
    model: &str,
    gamma: Option<f64>,
    saturation_eps: f64,
    observe_every: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let model = parse_model(model, gamma).map_err(value_error)?;
    let out = simulate_impl(kernel, &growth.law, u0, box_radius, t_end, dt, model, saturation_eps, observe_every)
        .map_err(value_error)?;
    let d = PyDict::new(py);
    d.set_item("u", out.values)?;
    d.set_item("saturation_times", out.saturation_times)?;
    d.set_item("times", out.times)?;
    d.set_item("snapshots", out.snapshots)?;
    d.set_item("steps", out.steps)?;
    d.set_item("hard_invariants_hold", out.hard_invariants_hold)?;
    d.set_item("min_value", out.min_value)?;
    d.set_item("max_value", out.max_value)?;
    Ok(d)
}

#[pymodule]
fn satfront_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyKernel>()?;
    m.add_class::<PyGrowthLaw>()?;
    m.add_function(wrap_pyfunction!(c_star, m)?)?;
    m.add_function(wrap_pyfunction!(shoot, m)?)?;
    m.add_function(wrap_pyfunction!(grid_coords, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add("SCHEMA_VERSION", satfront::io::SCHEMA_VERSION)?;
    Ok(())
}
