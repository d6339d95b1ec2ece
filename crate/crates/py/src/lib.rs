//! Python bindings for `bilayer_core`.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use bilayer_core::code_sampler::{sample_instance, CodeInstance};
use bilayer_core::density_evolution::{self as de, DeConfig, DeParams};
use bilayer_core::ensemble::{presets, BilayerEnsemble, CheckCount, Degrees};
use bilayer_core::rate_design::{design_correlated, fit_degrees, DesignSpec};
use bilayer_core::simulator::ber_sweep;
use bilayer_core::theory::{self, RateBundle, TieBreak};
use bilayer_core::DeError;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn de_err(e: DeError) -> PyErr {
    match e {
        DeError::NonConvergence { .. } => PyRuntimeError::new_err(e.to_string()),
        other => value_err(other),
    }
}

fn tie_break(name: &str) -> PyResult<TieBreak> {
    match name {
        "conditional" => Ok(TieBreak::ConditionalEntropy),
        "symmetric" => Ok(TieBreak::Symmetric),
        _ => Err(PyValueError::new_err(format!(
            "tie_break must be 'conditional' or 'symmetric', got {name:?}"
        ))),
    }
}

/// Erasure probabilities of the five links.
#[pyclass(name = "ChannelSet", frozen, from_py_object)]
#[derive(Clone, Copy)]
struct PyChannelSet(theory::ChannelSet);

#[pymethods]
impl PyChannelSet {
    #[new]
    fn new(eps_s1r: f64, eps_s2r: f64, eps_s1d: f64, eps_s2d: f64, eps_rd: f64) -> PyResult<Self> {
        theory::ChannelSet::new(eps_s1r, eps_s2r, eps_s1d, eps_s2d, eps_rd)
            .map(Self)
            .map_err(value_err)
    }

    #[getter]
    fn eps_s1r(&self) -> f64 {
        self.0.eps_s1r
    }
    #[getter]
    fn eps_s2r(&self) -> f64 {
        self.0.eps_s2r
    }
    #[getter]
    fn eps_s1d(&self) -> f64 {
        self.0.eps_s1d
    }
    #[getter]
    fn eps_s2d(&self) -> f64 {
        self.0.eps_s2d
    }
    #[getter]
    fn eps_rd(&self) -> f64 {
        self.0.eps_rd
    }

    fn __repr__(&self) -> String {
        let c = self.0;
        format!(
            "ChannelSet(eps_s1r={}, eps_s2r={}, eps_s1d={}, eps_s2d={}, eps_rd={})",
            c.eps_s1r, c.eps_s2r, c.eps_s1d, c.eps_s2d, c.eps_rd
        )
    }
}

#[pyclass(name = "Allocation", frozen, get_all)]
struct PyAllocation {
    theta1: f64,
    theta2: f64,
    theta_r: f64,
    rs1: f64,
    rs2: f64,
    rmax: f64,
    case: String,
}

/// Optimal time allocation and source-coding rates.
#[pyfunction]
#[pyo3(signature = (channels, p, tie_break="conditional"))]
fn optimal_allocation(channels: PyChannelSet, p: f64, tie_break: &str) -> PyResult<PyAllocation> {
    let o = theory::optimal_allocation_with(&channels.0, p, self::tie_break(tie_break)?)
        .map_err(value_err)?;
    Ok(PyAllocation {
        theta1: o.alloc.theta1,
        theta2: o.alloc.theta2,
        theta_r: o.alloc.theta_r,
        rs1: o.rs1,
        rs2: o.rs2,
        rmax: o.rmax,
        case: format!("{:?}", o.case),
    })
}

#[pyclass(name = "Rates", frozen, get_all)]
struct PyRates {
    rs1: f64,
    rs2: f64,
    r1: f64,
    r2: f64,
    rtilde1: f64,
    rtilde2: f64,
    rsynd1: f64,
    rsynd2: f64,
    mu1: f64,
    mu2: f64,
}

impl From<RateBundle> for PyRates {
    fn from(r: RateBundle) -> Self {
        Self {
            rs1: r.rs1,
            rs2: r.rs2,
            r1: r.r1,
            r2: r.r2,
            rtilde1: r.rtilde1(),
            rtilde2: r.rtilde2(),
            rsynd1: r.rsynd1,
            rsynd2: r.rsynd2,
            mu1: r.mu1,
            mu2: r.mu2,
        }
    }
}

/// Two-user bilayer ensemble.
#[pyclass(name = "Ensemble", frozen, from_py_object)]
#[derive(Clone, Copy)]
struct PyEnsemble(BilayerEnsemble);

#[pymethods]
impl PyEnsemble {
    /// `first` and `synd` are `[(l1, r1), (l2, r2)]`; `(0, 0)` drops a
    /// syndrome layer.
    #[new]
    fn new(
        first: [(u32, u32); 2],
        synd: [(u32, u32); 2],
        m: [usize; 2],
        chain_length: usize,
        window: usize,
    ) -> PyResult<Self> {
        let deg = |(l, r): (u32, u32)| if l == 0 { Degrees::NONE } else { Degrees::new(l, r) };
        BilayerEnsemble::new(
            [deg(first[0]), deg(first[1])],
            [deg(synd[0]), deg(synd[1])],
            m,
            chain_length,
            window,
        )
        .map(Self)
        .map_err(value_err)
    }

    #[staticmethod]
    fn code_a() -> Self {
        Self(presets::code_a())
    }

    #[staticmethod]
    fn code_b() -> Self {
        Self(presets::code_b())
    }

    fn with_chain_length(&self, chain_length: usize) -> Self {
        Self(self.0.with_chain_length(chain_length))
    }

    fn with_window(&self, window: usize) -> Self {
        Self(self.0.with_window(window))
    }

    #[getter]
    fn chain_length(&self) -> usize {
        self.0.chain_length
    }

    #[getter]
    fn window(&self) -> usize {
        self.0.window
    }

    #[getter]
    fn m(&self) -> [usize; 2] {
        self.0.m
    }

    /// Finite-length rates; `count` is `"padded"` or `"occupied"`.
    #[pyo3(signature = (count="padded"))]
    fn rates(&self, count: &str) -> PyResult<PyRates> {
        let count = match count {
            "padded" => CheckCount::Padded,
            "occupied" => CheckCount::Occupied,
            _ => return Err(PyValueError::new_err(format!("unknown check count {count:?}"))),
        };
        self.0.rates(count).map(Into::into).map_err(value_err)
    }

    fn __repr__(&self) -> String {
        let e = &self.0;
        format!(
            "Ensemble(first=[({}, {}), ({}, {})], synd=[({}, {}), ({}, {})], m={:?}, L={}, w={})",
            e.first[0].l, e.first[0].r, e.first[1].l, e.first[1].r, e.synd[0].l, e.synd[0].r,
            e.synd[1].l, e.synd[1].r, e.m, e.chain_length, e.window
        )
    }
}

#[pyclass(name = "Design", frozen, get_all)]
struct PyDesign {
    target: Py<PyRates>,
    achieved: Py<PyRates>,
    ensemble: PyEnsemble,
}

/// Rate design for the channels plus an integer degree fit.
#[pyfunction]
#[pyo3(signature = (channels, p=0.0, punctured=true, tie_break="conditional", r_max=20, m_base=100, chain_length=600, window=10))]
#[allow(clippy::too_many_arguments)]
fn design(
    py: Python<'_>,
    channels: PyChannelSet,
    p: f64,
    punctured: bool,
    tie_break: &str,
    r_max: u32,
    m_base: usize,
    chain_length: usize,
    window: usize,
) -> PyResult<PyDesign> {
    let spec = DesignSpec::new(channels.0, p)
        .with_tie_break(self::tie_break(tie_break)?)
        .punctured(punctured);
    let target = design_correlated(&spec).map_err(value_err)?;
    let fit = fit_degrees(&target, r_max, m_base).map_err(value_err)?;
    Ok(PyDesign {
        target: Py::new(py, PyRates::from(target))?,
        achieved: Py::new(py, PyRates::from(fit.achieved))?,
        ensemble: PyEnsemble(fit.ensemble(chain_length, window).map_err(value_err)?),
    })
}

fn params(ens: &PyEnsemble, p: f64, punctured: bool, relay: bool, max_iters: usize) -> PyResult<DeParams> {
    let params = if punctured {
        DeParams::correlated(ens.0, p)
    } else if p > 0.0 {
        return Err(PyValueError::new_err("correlated sources need punctured=True"));
    } else {
        DeParams::uncorrelated(ens.0)
    };
    let params = params.with_config(DeConfig {
        max_iters,
        ..DeConfig::default()
    });
    Ok(if relay { params.relay() } else { params })
}

#[pyclass(name = "DeResult", frozen, get_all)]
struct PyDeResult {
    converged: bool,
    iterations: usize,
    h: [f64; 2],
}

/// One density-evolution run at `(eps1, eps2)`.
#[pyfunction]
#[pyo3(signature = (ensemble, eps1, eps2, p=0.0, punctured=true, relay=false, max_iters=50_000))]
#[allow(clippy::too_many_arguments)]
fn run_de(
    py: Python<'_>,
    ensemble: PyEnsemble,
    eps1: f64,
    eps2: f64,
    p: f64,
    punctured: bool,
    relay: bool,
    max_iters: usize,
) -> PyResult<PyDeResult> {
    let params = params(&ensemble, p, punctured, relay, max_iters)?;
    let r = py
        .detach(|| de::run_de(&params, [eps1, eps2]))
        .map_err(de_err)?;
    Ok(PyDeResult {
        converged: r.converged,
        iterations: r.iterations,
        h: r.h,
    })
}

/// Largest `t` with `origin + t * direction` decodable.
#[pyfunction]
#[pyo3(signature = (ensemble, direction, p=0.0, origin=(0.0, 0.0), tol=1e-4, punctured=true, relay=false, max_iters=50_000))]
#[allow(clippy::too_many_arguments)]
fn threshold_on_ray(
    py: Python<'_>,
    ensemble: PyEnsemble,
    direction: (f64, f64),
    p: f64,
    origin: (f64, f64),
    tol: f64,
    punctured: bool,
    relay: bool,
    max_iters: usize,
) -> PyResult<f64> {
    let params = params(&ensemble, p, punctured, relay, max_iters)?;
    py.detach(|| de::threshold_on_ray(origin, direction, &params, tol))
        .map(|r| r.t)
        .map_err(de_err)
}

/// Boundary `(eps1, eps2_max)` of the decodable grid region.
#[pyfunction]
#[pyo3(signature = (ensemble, step=0.02, p=0.0, punctured=true, relay=false))]
fn region_boundary(
    py: Python<'_>,
    ensemble: PyEnsemble,
    step: f64,
    p: f64,
    punctured: bool,
    relay: bool,
) -> PyResult<Vec<(f64, f64)>> {
    let params = params(&ensemble, p, punctured, relay, DeConfig::default().max_iters)?;
    py.detach(|| de::region_scan(step, &params))
        .map(|m| m.boundary())
        .map_err(de_err)
}

/// A sampled code.
#[pyclass(name = "CodeInstance", frozen)]
struct PyCodeInstance(CodeInstance);

#[pymethods]
impl PyCodeInstance {
    #[staticmethod]
    fn sample(ensemble: PyEnsemble, seed: u64) -> PyResult<Self> {
        sample_instance(&ensemble.0, seed).map(Self).map_err(value_err)
    }

    /// Source bits per user.
    #[getter]
    fn k(&self) -> usize {
        self.0.k()
    }

    fn n(&self, user: usize) -> PyResult<usize> {
        if user > 1 {
            return Err(PyValueError::new_err("user must be 0 or 1"));
        }
        Ok(self.0.n(user))
    }

    /// First-layer matrix of `user` in the `rows cols` text format.
    fn dump_matrix(&self, user: usize) -> PyResult<String> {
        if user > 1 {
            return Err(PyValueError::new_err("user must be 0 or 1"));
        }
        Ok(self.0.h[user].dump_to_string())
    }

    /// `(ber_u1, ber_u2, relay_fail)` at each `(eps_s1d, eps_s2d)` point.
    #[pyo3(signature = (points, eps_sr=(0.0, 0.0), p=0.0, trials=100, seed=1, punctured=true))]
    fn ber_sweep(
        &self,
        py: Python<'_>,
        points: Vec<(f64, f64)>,
        eps_sr: (f64, f64),
        p: f64,
        trials: usize,
        seed: u64,
        punctured: bool,
    ) -> PyResult<Vec<(f64, f64, f64)>> {
        let chans = points
            .iter()
            .map(|&(a, b)| theory::ChannelSet::new(eps_sr.0, eps_sr.1, a, b, 0.0))
            .collect::<Result<Vec<_>, _>>()
            .map_err(value_err)?;
        let inst = &self.0;
        let rows = py
            .detach(|| ber_sweep(inst, &chans, p, trials, seed, punctured))
            .map_err(value_err)?;
        Ok(rows.iter().map(|r| (r.ber_u1, r.ber_u2, r.relay_fail)).collect())
    }
}

#[pymodule]
fn bilayer(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyChannelSet>()?;
    m.add_class::<PyAllocation>()?;
    m.add_class::<PyRates>()?;
    m.add_class::<PyEnsemble>()?;
    m.add_class::<PyDesign>()?;
    m.add_class::<PyDeResult>()?;
    m.add_class::<PyCodeInstance>()?;
    m.add_function(wrap_pyfunction!(optimal_allocation, m)?)?;
    m.add_function(wrap_pyfunction!(design, m)?)?;
    m.add_function(wrap_pyfunction!(run_de, m)?)?;
    m.add_function(wrap_pyfunction!(threshold_on_ray, m)?)?;
    m.add_function(wrap_pyfunction!(region_boundary, m)?)?;
    Ok(())
}
