//! Benchmark dynamical systems, a fixed-step RK4 integrator, an echo state
//! network baseline and unit-interval normalization.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::rng::seeded;
use crate::{Error, Result};

/// Integration step used for every continuous benchmark.
pub const DEFAULT_DT: f64 = 0.02;

/// Rounding allowance when deciding whether a normalized value was clamped.
const RANGE_SLACK: f64 = 1e-12;

/// Escape bound for the Hénon map.
pub const HENON_ESCAPE: f64 = 10.0;

/// An autonomous or time-dependent ODE `dx/dt = f(x, t)`.
pub trait OdeSystem {
    fn dim(&self) -> usize;
    fn derivative(&self, state: &[f64], t: f64, out: &mut [f64]);
}

fn derivative_checked<S: OdeSystem + ?Sized>(sys: &S, state: &[f64], t: f64, out: &mut [f64]) -> Result<()> {
    sys.derivative(state, t, out);
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("ode derivative".into()));
    }
    Ok(())
}

/// One classical fourth-order Runge–Kutta step.
pub fn rk4_step<S: OdeSystem + ?Sized>(sys: &S, state: &[f64], t: f64, dt: f64) -> Result<Vec<f64>> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid("step size must be positive and finite"));
    }
    let d = sys.dim();
    if state.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: state.len() });
    }
    let mut k1 = alloc::vec![0.0; d];
    let mut k2 = alloc::vec![0.0; d];
    let mut k3 = alloc::vec![0.0; d];
    let mut k4 = alloc::vec![0.0; d];
    let mut tmp = alloc::vec![0.0; d];
    derivative_checked(sys, state, t, &mut k1)?;
    for i in 0..d {
        tmp[i] = state[i] + 0.5 * dt * k1[i];
    }
    derivative_checked(sys, &tmp, t + 0.5 * dt, &mut k2)?;
    for i in 0..d {
        tmp[i] = state[i] + 0.5 * dt * k2[i];
    }
    derivative_checked(sys, &tmp, t + 0.5 * dt, &mut k3)?;
    for i in 0..d {
        tmp[i] = state[i] + dt * k3[i];
    }
    derivative_checked(sys, &tmp, t + dt, &mut k4)?;
    Ok((0..d)
        .map(|i| state[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}

/// `dx = a(y − x)`, `dy = x(b − z) − y`, `dz = xy − cz`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lorenz {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Default for Lorenz {
    fn default() -> Self {
        Lorenz { a: 10.0, b: 28.0, c: 8.0 / 3.0 }
    }
}

impl OdeSystem for Lorenz {
    fn dim(&self) -> usize {
        3
    }

    fn derivative(&self, s: &[f64], _t: f64, out: &mut [f64]) {
        out[0] = self.a * (s[1] - s[0]);
        out[1] = s[0] * (self.b - s[2]) - s[1];
        out[2] = s[0] * s[1] - self.c * s[2];
    }
}

/// `dx = −y − z`, `dy = x + ay`, `dz = b + z(x − c)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rossler {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Default for Rossler {
    fn default() -> Self {
        Rossler { a: 0.2, b: 0.2, c: 5.7 }
    }
}

impl OdeSystem for Rossler {
    fn dim(&self) -> usize {
        3
    }

    fn derivative(&self, s: &[f64], _t: f64, out: &mut [f64]) {
        out[0] = -s[1] - s[2];
        out[1] = s[0] + self.a * s[1];
        out[2] = self.b + s[2] * (s[0] - self.c);
    }
}

/// `dx/dt = β x(t−τ) / (1 + x(t−τ)^n) − γ x(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MackeyGlass {
    pub beta: f64,
    pub gamma: f64,
    pub n: f64,
    pub delay: f64,
}

impl Default for MackeyGlass {
    fn default() -> Self {
        MackeyGlass { beta: 0.2, gamma: 0.1, n: 10.0, delay: 17.0 }
    }
}

impl MackeyGlass {
    pub fn derivative(&self, x: f64, delayed: f64) -> f64 {
        self.beta * delayed / (1.0 + libm::pow(delayed, self.n)) - self.gamma * x
    }
}

/// Step size, discarded transient and output stride for continuous systems.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationOptions {
    pub dt: f64,
    /// Integration steps discarded before the first output sample.
    pub transient: usize,
    /// Integration steps between consecutive output samples.
    pub sample_every: usize,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        IntegrationOptions { dt: DEFAULT_DT, transient: 5000, sample_every: 1 }
    }
}

impl IntegrationOptions {
    fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid("step size must be positive and finite"));
        }
        if self.sample_every == 0 {
            return Err(Error::invalid("sample stride must be at least 1"));
        }
        Ok(())
    }
}

/// A scalar series; `dt` is the time between samples for continuous systems.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub values: Vec<f64>,
    pub dt: Option<f64>,
    /// Set when generation stopped early because the orbit escaped.
    pub truncated: bool,
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Sample time of step `k`, when the series has one.
    pub fn time(&self, k: usize) -> Option<f64> {
        self.dt.map(|dt| k as f64 * dt)
    }
}

/// First component of an integrated trajectory.
pub fn ode_series<S: OdeSystem + ?Sized>(
    sys: &S,
    length: usize,
    initial: &[f64],
    opts: IntegrationOptions,
) -> Result<TimeSeries> {
    if length == 0 {
        return Err(Error::Empty("series length"));
    }
    opts.validate()?;
    let mut state = initial.to_vec();
    let mut t = 0.0;
    for _ in 0..opts.transient {
        state = rk4_step(sys, &state, t, opts.dt)?;
        t += opts.dt;
    }
    let mut values = Vec::with_capacity(length);
    values.push(state[0]);
    while values.len() < length {
        for _ in 0..opts.sample_every {
            state = rk4_step(sys, &state, t, opts.dt)?;
            t += opts.dt;
        }
        values.push(state[0]);
    }
    Ok(TimeSeries { values, dt: Some(opts.dt * opts.sample_every as f64), truncated: false })
}

pub fn lorenz_series(length: usize, params: Lorenz, initial: [f64; 3], opts: IntegrationOptions) -> Result<TimeSeries> {
    ode_series(&params, length, &initial, opts)
}

pub fn rossler_series(length: usize, params: Rossler, initial: [f64; 3], opts: IntegrationOptions) -> Result<TimeSeries> {
    ode_series(&params, length, &initial, opts)
}

/// Mackey–Glass by RK4 on a stored trajectory.
///
/// The history is the constant `history` on `[−τ, 0]`. Delayed values at
/// off-grid times (the RK4 half steps) are linearly interpolated between
/// stored grid points.
pub fn mackey_glass_series(
    length: usize,
    params: MackeyGlass,
    history: f64,
    opts: IntegrationOptions,
) -> Result<TimeSeries> {
    if length == 0 {
        return Err(Error::Empty("series length"));
    }
    opts.validate()?;
    if !(history > 0.0 && history.is_finite()) {
        return Err(Error::invalid("history must be positive"));
    }
    if params.delay.is_nan() || params.delay <= 0.0 {
        return Err(Error::invalid("delay must be positive"));
    }
    let dt = opts.dt;
    let lag = params.delay / dt;
    if lag < 1.0 {
        // the last RK4 stage would look past the present
        return Err(Error::InsufficientHistory { needed: 1, got: 0 });
    }
    // grid[i] holds x at time (i − pad)·dt; pad covers the whole delay window
    let pad = libm::ceil(lag) as usize + 1;
    let total_steps = opts.transient + (length - 1) * opts.sample_every;
    let mut grid = alloc::vec![history; pad + 1];
    grid.reserve(total_steps);
    // x at fractional grid position p (in units of dt, relative to index 0)
    let lookup = |grid: &[f64], p: f64| -> f64 {
        let i = libm::floor(p);
        let frac = p - i;
        let i = i as usize;
        if frac == 0.0 {
            grid[i]
        } else {
            grid[i] * (1.0 - frac) + grid[i + 1] * frac
        }
    };
    let mut values = Vec::with_capacity(length);
    for step in 0..=total_steps {
        if step >= opts.transient && (step - opts.transient).is_multiple_of(opts.sample_every) {
            values.push(grid[pad + step]);
        }
        if step == total_steps {
            break;
        }
        let now = (pad + step) as f64;
        let x = grid[pad + step];
        let d0 = lookup(&grid, now - lag);
        let dh = lookup(&grid, now + 0.5 - lag);
        let d1 = lookup(&grid, now + 1.0 - lag);
        let k1 = params.derivative(x, d0);
        let k2 = params.derivative(x + 0.5 * dt * k1, dh);
        let k3 = params.derivative(x + 0.5 * dt * k2, dh);
        let k4 = params.derivative(x + dt * k3, d1);
        let next = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if !next.is_finite() {
            return Err(Error::NonFiniteAt { step });
        }
        grid.push(next);
    }
    Ok(TimeSeries { values, dt: Some(dt * opts.sample_every as f64), truncated: false })
}

/// Quadratic Hénon map `x_{t+1} = 1 − 1.4 x_t² + 0.3 x_{t−1}`.
pub fn henon_next(x: f64, x_prev: f64) -> f64 {
    1.0 - 1.4 * x * x + 0.3 * x_prev
}

/// Iterates the Hénon map from `(x₀, x₋₁)`, discarding `transient` iterates.
///
/// The series starts at `x₀` when `transient` is zero. An orbit leaving
/// `|x| ≤ 10` stops the series early with `truncated` set.
pub fn henon_series(length: usize, initial: (f64, f64), transient: usize) -> Result<TimeSeries> {
    if length == 0 {
        return Err(Error::Empty("series length"));
    }
    let (mut x, mut prev) = initial;
    if !x.is_finite() || !prev.is_finite() {
        return Err(Error::NonFinite("initial condition".into()));
    }
    let mut values = Vec::with_capacity(length);
    let mut truncated = false;
    for i in 0..transient + length {
        if x.abs() > HENON_ESCAPE {
            truncated = true;
            break;
        }
        if i >= transient {
            values.push(x);
        }
        let next = henon_next(x, prev);
        prev = x;
        x = next;
    }
    Ok(TimeSeries { values, dt: None, truncated })
}

/// `y = scale·x + offset`, fitted so a training segment spans `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap {
    pub scale: f64,
    pub offset: f64,
}

impl AffineMap {
    /// Min–max fit over `segment`; a constant segment is an error.
    pub fn fit(segment: &[f64]) -> Result<Self> {
        if segment.is_empty() {
            return Err(Error::Empty("series"));
        }
        if segment.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("series".into()));
        }
        let lo = segment.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = segment.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if hi <= lo {
            return Err(Error::ConstantSeries);
        }
        let scale = 1.0 / (hi - lo);
        Ok(AffineMap { scale, offset: -lo * scale })
    }

    pub fn apply(&self, x: f64) -> f64 {
        self.scale * x + self.offset
    }

    pub fn invert(&self, y: f64) -> f64 {
        (y - self.offset) / self.scale
    }

    /// Maps into `[0, 1]`, clamping values outside the fitted range and
    /// returning how many were clamped.
    pub fn normalize_clamped(&self, series: &[f64]) -> (Vec<f64>, usize) {
        let mut clamped = 0;
        let out = series
            .iter()
            .map(|&x| {
                let y = self.apply(x);
                // endpoints of the fitted range may round a hair past 0 or 1
                if !(-RANGE_SLACK..=1.0 + RANGE_SLACK).contains(&y) {
                    clamped += 1;
                }
                y.clamp(0.0, 1.0)
            })
            .collect();
        (out, clamped)
    }

    pub fn denormalize(&self, series: &[f64]) -> Vec<f64> {
        series.iter().map(|&y| self.invert(y)).collect()
    }
}

/// Min–max normalization of a whole series onto `[0, 1]`.
pub fn normalize_unit_interval(series: &[f64]) -> Result<(Vec<f64>, AffineMap)> {
    let map = AffineMap::fit(series)?;
    Ok((series.iter().map(|&x| map.apply(x).clamp(0.0, 1.0)).collect(), map))
}

/// Echo state network settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EsnConfig {
    pub nodes: usize,
    pub spectral_radius: f64,
    pub input_scale: f64,
    pub seed: u64,
}

impl Default for EsnConfig {
    fn default() -> Self {
        EsnConfig { nodes: 100, spectral_radius: 0.95, input_scale: 1.0, seed: 0 }
    }
}

/// `r(k+1) = tanh(W r(k) + W_in x_k)` with dense uniform `W` rescaled to the
/// configured spectral radius.
#[derive(Debug, Clone, PartialEq)]
pub struct EchoStateNetwork {
    w: DMatrix<f64>,
    w_in: DVector<f64>,
}

/// Largest eigenvalue modulus of a square real matrix.
pub fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    m.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
}

impl EchoStateNetwork {
    pub fn new(cfg: EsnConfig) -> Result<Self> {
        if cfg.nodes == 0 {
            return Err(Error::Empty("esn nodes"));
        }
        if !(cfg.spectral_radius >= 0.0 && cfg.spectral_radius.is_finite() && cfg.input_scale.is_finite()) {
            return Err(Error::invalid("esn scales must be finite and the spectral radius non-negative"));
        }
        let mut rng = seeded(cfg.seed);
        let n = cfg.nodes;
        let raw = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let w_in = DVector::from_fn(n, |_, _| cfg.input_scale * rng.random_range(-1.0..1.0));
        let rho = spectral_radius(&raw);
        if rho <= 0.0 {
            return Err(Error::invalid("random recurrent matrix has zero spectral radius"));
        }
        Ok(EchoStateNetwork { w: raw * (cfg.spectral_radius / rho), w_in })
    }

    pub fn nodes(&self) -> usize {
        self.w_in.len()
    }

    pub fn recurrent(&self) -> &DMatrix<f64> {
        &self.w
    }

    /// Node states from a zero initial state; row `k` is the state after
    /// consuming `inputs[k]`.
    pub fn run(&self, inputs: &[f64]) -> Result<DMatrix<f64>> {
        if inputs.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("esn input".into()));
        }
        let n = self.nodes();
        let mut r = DVector::zeros(n);
        let mut out = DMatrix::zeros(inputs.len(), n);
        for (k, &x) in inputs.iter().enumerate() {
            r = (&self.w * &r + &self.w_in * x).map(libm::tanh);
            out.row_mut(k).copy_from(&r.transpose());
        }
        Ok(out)
    }
}
