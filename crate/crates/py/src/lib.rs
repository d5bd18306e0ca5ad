//! Python bindings for the `replan` planners, simulator and benchmark harness.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use replan::bench::{self, BatchSummary, TrialConfig, TrialMetrics};
use replan::multistage::{self, Feasibility};
use replan::{Algorithm, BenchError, Point2, Rect, ScenarioError, Segment, TrialCounters};

type Pt = (f64, f64);
type Rc4 = (f64, f64, f64, f64);

fn pt(p: Point2) -> Pt {
    (p.x, p.y)
}

fn rect(r: &Rect) -> Rc4 {
    (r.min.x, r.min.y, r.max.x, r.max.y)
}

fn scenario_err(e: ScenarioError) -> PyErr {
    match e {
        ScenarioError::Io { .. } => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn bench_err(e: BenchError) -> PyErr {
    match e {
        BenchError::Io { .. } | BenchError::Csv(_) => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn algorithm(name: &str) -> PyResult<Algorithm> {
    name.parse().map_err(bench_err)
}

fn path_from(points: Vec<Pt>) -> PyResult<replan::Path> {
    replan::Path::new(points.into_iter().map(Point2::from).collect()).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn config(iterations: u32) -> TrialConfig {
    TrialConfig {
        iterations_per_tick: iterations,
        ..TrialConfig::default()
    }
}

fn metrics_dict<'py>(py: Python<'py>, m: &TrialMetrics) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("algorithm", m.algorithm.name())?;
    d.set_item("scenario", &m.scenario)?;
    d.set_item("seed", m.seed)?;
    d.set_item("success", m.success)?;
    d.set_item("coll_checks", m.collision_checks)?;
    d.set_item("nn_lookups", m.nn_lookups)?;
    d.set_item("sim_time_s", m.sim_time_s)?;
    d.set_item("wall_time_s", m.wall_time_s)?;
    Ok(d)
}

fn summary_dict<'py>(py: Python<'py>, s: &BatchSummary) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("algorithm", s.algorithm.name())?;
    d.set_item("scenario", &s.scenario)?;
    d.set_item("runs", s.runs)?;
    d.set_item("success_pct", s.success_pct)?;
    d.set_item("coll_checks", s.collision_checks)?;
    d.set_item("nn_lookups", s.nn_lookups)?;
    d.set_item("sim_time_s", s.sim_time_s)?;
    d.set_item("wall_time_s", s.wall_time_s)?;
    Ok(d)
}

/// A validated scenario document.
#[pyclass(name = "Scenario", module = "replan", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyScenario {
    inner: replan::Scenario,
}

#[pymethods]
impl PyScenario {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        replan::Scenario::from_json(text)
            .map(|inner| Self { inner })
            .map_err(scenario_err)
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        replan::Scenario::load(path)
            .map(|inner| Self { inner })
            .map_err(scenario_err)
    }

    /// One of the scenarios shipped with the library: "dynamic" or "partial".
    #[staticmethod]
    fn bundled(name: &str) -> PyResult<Self> {
        replan::Scenario::bundled(name)
            .map(|inner| Self { inner })
            .map_err(scenario_err)
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn name(&self) -> &str {
        &self.inner.name
    }

    #[getter]
    fn bounds(&self) -> Rc4 {
        rect(&self.inner.bounds)
    }

    #[getter]
    fn walls(&self) -> Vec<Rc4> {
        self.inner.walls.iter().map(rect).collect()
    }

    #[getter]
    fn start(&self) -> Pt {
        pt(self.inner.start)
    }

    #[getter]
    fn goal(&self) -> Pt {
        pt(self.inner.goal)
    }

    #[getter]
    fn obstacle_count(&self) -> usize {
        self.inner.obstacles.len()
    }

    #[getter]
    fn cutoff_s(&self) -> f64 {
        self.inner.cutoff_s
    }

    #[getter]
    fn max_ticks(&self) -> u64 {
        self.inner.max_ticks()
    }

    fn __repr__(&self) -> String {
        format!(
            "Scenario(name={:?}, walls={}, obstacles={})",
            self.inner.name,
            self.inner.walls.len(),
            self.inner.obstacles.len()
        )
    }
}

/// Simulated world: obstacles and the robot, advanced tick by tick.
#[pyclass(name = "World", module = "replan")]
struct PyWorld {
    inner: replan::WorldState,
    counters: TrialCounters,
}

#[pymethods]
impl PyWorld {
    #[new]
    #[pyo3(signature = (scenario, seed=0))]
    fn new(scenario: &PyScenario, seed: u64) -> Self {
        Self {
            inner: replan::WorldState::new(&scenario.inner, seed),
            counters: TrialCounters::new(),
        }
    }

    /// Advances obstacles by one tick.
    fn update(&mut self) {
        self.inner.update_world();
    }

    /// Moves the robot along `path` for one tick; returns the rest of the path.
    fn advance_robot(&mut self, path: Vec<Pt>) -> PyResult<Vec<Pt>> {
        let p = path_from(path)?;
        if p.first().distance(&self.inner.robot) > 1e-6 {
            return Err(PyValueError::new_err("path must start at the robot"));
        }
        Ok(self.inner.advance_robot(&p).points().iter().copied().map(pt).collect())
    }

    #[getter]
    fn tick(&self) -> u64 {
        self.inner.tick
    }

    #[getter]
    fn robot(&self) -> Pt {
        pt(self.inner.robot)
    }

    /// Footprints of the obstacles that exist at the current tick.
    fn active_obstacles(&self) -> Vec<Rc4> {
        self.inner.active_obstacles().map(|o| rect(&o.rect)).collect()
    }

    /// Counted check of one segment against walls and active obstacles,
    /// all inflated by the robot's half extent.
    fn segment_blocked(&self, a: Pt, b: Pt) -> bool {
        self.inner
            .segment_blocked(&Segment::new(a.into(), b.into()), &self.counters)
    }

    /// Index of the first blocked segment, or None if the path is free.
    fn feas(&self, path: Vec<Pt>) -> PyResult<Option<usize>> {
        Ok(match multistage::feas(&path_from(path)?, &self.inner, &self.counters) {
            Feasibility::Free => None,
            Feasibility::Blocked(i) => Some(i),
        })
    }

    /// Greedy shortcutting of a path on the current snapshot.
    fn post_process(&self, path: Vec<Pt>) -> PyResult<Vec<Pt>> {
        let out = multistage::post_process(&path_from(path)?, &self.inner, &self.counters);
        Ok(out.points().iter().copied().map(pt).collect())
    }

    #[getter]
    fn collision_checks(&self) -> u64 {
        self.counters.collision_checks()
    }
}

/// Closed segment/rectangle intersection test.
#[pyfunction]
fn segment_intersects_rect(a: Pt, b: Pt, r: Rc4) -> PyResult<bool> {
    let r = Rect::from_array([r.0, r.1, r.2, r.3]);
    if !r.is_valid() {
        return Err(PyValueError::new_err("rectangle needs min <= max on both axes"));
    }
    Ok(replan::geom2d::segment_intersects_rect(
        &Segment::new(a.into(), b.into()),
        &r,
        &TrialCounters::new(),
    ))
}

/// Number of vertices of a path, the planner's cost measure.
#[pyfunction]
fn eval(path: Vec<Pt>) -> PyResult<usize> {
    Ok(multistage::eval(&path_from(path)?))
}

/// Runs one trial and returns its metrics as a dict.
#[pyfunction]
#[pyo3(signature = (scenario, algorithm, seed=0, iterations=100))]
fn run_trial<'py>(
    py: Python<'py>,
    scenario: &PyScenario,
    algorithm: &str,
    seed: u64,
    iterations: u32,
) -> PyResult<Bound<'py, PyDict>> {
    let a = self::algorithm(algorithm)?;
    let sc = scenario.inner.clone();
    let m = py.detach(move || bench::run_trial(&sc, a, seed, &config(iterations)));
    metrics_dict(py, &m)
}

/// Runs paired trials; returns (per-trial dicts, per-algorithm summary dicts).
#[pyfunction]
#[pyo3(signature = (scenario, algorithms, runs, seed=0, workers=1, iterations=100))]
#[allow(clippy::type_complexity)]
fn run_batch<'py>(
    py: Python<'py>,
    scenario: &PyScenario,
    algorithms: Vec<String>,
    runs: usize,
    seed: u64,
    workers: usize,
    iterations: u32,
) -> PyResult<(Vec<Bound<'py, PyDict>>, Vec<Bound<'py, PyDict>>)> {
    if runs == 0 {
        return Err(PyValueError::new_err("runs must be at least 1"));
    }
    let algs = algorithms.iter().map(|a| algorithm(a)).collect::<PyResult<Vec<_>>>()?;
    let sc = scenario.inner.clone();
    let r = py.detach(move || bench::run_batch(&sc, &algs, runs, seed, workers, &config(iterations)));
    let trials = r.trials.iter().map(|m| metrics_dict(py, m)).collect::<PyResult<_>>()?;
    let summaries = r
        .summaries
        .iter()
        .map(|s| summary_dict(py, s))
        .collect::<PyResult<_>>()?;
    Ok((trials, summaries))
}

/// Runs one trial with tracing and returns the SVG document.
#[pyfunction]
#[pyo3(signature = (scenario, algorithm, seed=0, iterations=100))]
fn trace_svg(py: Python<'_>, scenario: &PyScenario, algorithm: &str, seed: u64, iterations: u32) -> PyResult<String> {
    let a = self::algorithm(algorithm)?;
    let sc = scenario.inner.clone();
    Ok(py.detach(move || bench::render_svg(&bench::run_trial_traced(&sc, a, seed, &config(iterations)).1)))
}

#[pymodule]
#[pyo3(name = "replan")]
fn replan_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyScenario>()?;
    m.add_class::<PyWorld>()?;
    m.add_function(wrap_pyfunction!(segment_intersects_rect, m)?)?;
    m.add_function(wrap_pyfunction!(eval, m)?)?;
    m.add_function(wrap_pyfunction!(run_trial, m)?)?;
    m.add_function(wrap_pyfunction!(run_batch, m)?)?;
    m.add_function(wrap_pyfunction!(trace_svg, m)?)?;
    m.add(
        "ALGORITHMS",
        Algorithm::ALL.iter().map(|a| a.name()).collect::<Vec<_>>(),
    )?;
    Ok(())
}
