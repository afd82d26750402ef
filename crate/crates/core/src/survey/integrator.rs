//! Explicit symplectic splitting for `H = ½|y|² + εf(x)`: kick from `εf`,
//! drift from `½|y|²`. Order 2 (kick-drift-kick leapfrog) or the order-4
//! Yoshida composition of it. Angles are kept unwrapped, so the winding is
//! `x / 2π`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{FourierPotential, Tail};

/// Dense mode table of a potential, built for repeated evaluation.
#[derive(Debug, Clone)]
pub struct ForceField {
    n: usize,
    ks: Vec<i32>,
    /// Offsets of `e^{i k_d x_d}` in the power table, `n` per mode.
    offs: Vec<usize>,
    cs: Vec<Complex64>,
    kmax: usize,
    /// Bound on what was dropped (floor tail beyond the cutoff plus modes
    /// below the amplitude floor), in sup norm of `f`.
    pub dropped: f64,
}

const AMPLITUDE_FLOOR: f64 = 1e-16;

impl ForceField {
    /// Keep every mode that matters to double precision in `f`, `∇f` and
    /// `∇²f`; floor tails are cut where their contribution falls below
    /// `1e−15`.
    pub fn new(f: &FourierPotential) -> Result<Self> {
        let mut k_eval = f.max_stored_norm().max(1);
        if let Tail::Floor { .. } = f.tail() {
            while f.tail_bound(k_eval) * ((k_eval + 1) as f64).powi(2) > 1e-15 {
                k_eval += 1;
                if k_eval > 4096 {
                    return Err(Error::numeric("floor tail decays too slowly to truncate"));
                }
            }
        }
        let dense = f.materialize(k_eval);
        let n = f.dim();
        let (mut ks, mut cs, mut dropped, mut kmax) = (Vec::new(), Vec::new(), f.tail_bound(k_eval), 0usize);
        for (k, c) in dense.modes() {
            let norm = k.l1() as f64;
            if 2.0 * c.norm() * norm.max(1.0).powi(2) < AMPLITUDE_FLOOR {
                dropped += 2.0 * c.norm();
                continue;
            }
            for &a in k.components() {
                ks.push(a as i32);
                kmax = kmax.max(a.unsigned_abs() as usize);
            }
            cs.push(*c);
        }
        let w = 2 * kmax + 1;
        let offs = ks.iter().enumerate().map(|(i, &a)| (i % n) * w + (kmax as i32 + a) as usize).collect();
        Ok(ForceField { n, ks, offs, cs, kmax, dropped })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn num_modes(&self) -> usize {
        self.cs.len()
    }

    /// `e^{i j x_d}` for `|j| ≤ kmax`, laid out per dimension.
    fn powers(&self, x: &[f64], buf: &mut Vec<Complex64>) {
        let w = 2 * self.kmax + 1;
        buf.clear();
        buf.resize(self.n * w, Complex64::new(1.0, 0.0));
        for d in 0..self.n {
            let base = d * w + self.kmax;
            let z = Complex64::from_polar(1.0, x[d]);
            for j in 1..=self.kmax {
                let p = buf[base + j - 1] * z;
                buf[base + j] = p;
                buf[base - j] = p.conj();
            }
        }
    }

    fn for_each_phase(&self, x: &[f64], buf: &mut Vec<Complex64>, mut g: impl FnMut(&[i32], Complex64)) {
        self.powers(x, buf);
        let n = self.n;
        for ((c, k), o) in self.cs.iter().zip(self.ks.chunks_exact(n)).zip(self.offs.chunks_exact(n)) {
            let mut e = *c;
            for &i in o {
                e *= buf[i];
            }
            g(k, e);
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let mut buf = Vec::new();
        let mut v = 0.0;
        self.for_each_phase(x, &mut buf, |_, e| v += 2.0 * e.re);
        v
    }

    /// `∇f(x)` into `out`.
    pub fn gradient(&self, x: &[f64], buf: &mut Vec<Complex64>, out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        self.for_each_phase(x, buf, |k, e| {
            let g = -2.0 * e.im;
            for (o, &a) in out.iter_mut().zip(k) {
                *o += a as f64 * g;
            }
        });
    }

    /// `∇²f(x)` row-major into `out` (length n²).
    pub fn hessian(&self, x: &[f64], buf: &mut Vec<Complex64>, out: &mut [f64]) {
        let n = self.n;
        out.iter_mut().for_each(|o| *o = 0.0);
        self.for_each_phase(x, buf, |k, e| {
            let h = -2.0 * e.re;
            for a in 0..n {
                for b in 0..n {
                    out[a * n + b] += (k[a] * k[b]) as f64 * h;
                }
            }
        });
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Leapfrog,
    Yoshida4,
}

impl Scheme {
    /// Substep weights of one step.
    fn weights(self) -> &'static [f64] {
        const W1: f64 = 1.351_207_191_959_657_8; // 1/(2 − 2^{1/3})
        const W0: f64 = -1.702_414_383_919_315_3; // −2^{1/3}/(2 − 2^{1/3})
        match self {
            Scheme::Leapfrog => &[1.0],
            Scheme::Yoshida4 => &[W1, W0, W1],
        }
    }
}

/// Phase point with optional tangent vector `(δy, δx)`.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub y: Vec<f64>,
    pub x: Vec<f64>,
}

/// Stepper for `H = ½|y|² + εf(x)`.
#[derive(Debug, Clone)]
pub struct Integrator<'a> {
    pub field: &'a ForceField,
    pub eps: f64,
    pub dt: f64,
    pub scheme: Scheme,
    buf: Vec<Complex64>,
    grad: Vec<f64>,
    /// `grad` is the gradient at the current position.
    fresh: bool,
    hess: Vec<f64>,
}

impl<'a> Integrator<'a> {
    pub fn new(field: &'a ForceField, eps: f64, dt: f64, scheme: Scheme) -> Result<Self> {
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(Error::invalid(format!("ε must be non-negative, got {eps}")));
        }
        if !(dt != 0.0 && dt.is_finite()) {
            return Err(Error::invalid(format!("time step must be finite and nonzero, got {dt}")));
        }
        let n = field.dim();
        Ok(Integrator { field, eps, dt, scheme, buf: Vec::new(), grad: vec![0.0; n], fresh: false, hess: vec![0.0; n * n] })
    }

    pub fn energy(&self, s: &State) -> f64 {
        0.5 * s.y.iter().map(|v| v * v).sum::<f64>() + self.eps * self.field.value(&s.x)
    }

    fn kick(&mut self, s: &mut State, h: f64) {
        if self.eps == 0.0 {
            return;
        }
        if !self.fresh {
            self.field.gradient(&s.x, &mut self.buf, &mut self.grad);
            self.fresh = true;
        }
        for (y, g) in s.y.iter_mut().zip(&self.grad) {
            *y -= h * self.eps * g;
        }
    }

    fn kick_tangent(&mut self, s: &mut State, t: &mut State, h: f64) {
        if self.eps == 0.0 {
            return;
        }
        let n = s.x.len();
        self.field.hessian(&s.x, &mut self.buf, &mut self.hess);
        for a in 0..n {
            let d: f64 = (0..n).map(|b| self.hess[a * n + b] * t.x[b]).sum();
            t.y[a] -= h * self.eps * d;
        }
        self.kick(s, h);
    }

    fn drift_state(&mut self, s: &mut State, h: f64) {
        Self::drift(s, h);
        self.fresh = false;
    }

    fn drift(s: &mut State, h: f64) {
        for (x, y) in s.x.iter_mut().zip(&s.y) {
            *x += h * y;
        }
    }

    /// One step; `dt < 0` integrates backward. The force at the end of a
    /// step is reused at the start of the next, so the state must not be
    /// modified between calls.
    pub fn step(&mut self, s: &mut State) {
        for &w in self.scheme.weights() {
            let h = w * self.dt;
            self.kick(s, 0.5 * h);
            self.drift_state(s, h);
            self.kick(s, 0.5 * h);
        }
    }

    /// One step of the state together with its tangent vector.
    pub fn step_tangent(&mut self, s: &mut State, t: &mut State) {
        for &w in self.scheme.weights() {
            let h = w * self.dt;
            self.kick_tangent(s, t, 0.5 * h);
            self.drift_state(s, h);
            Self::drift(t, h);
            self.kick_tangent(s, t, 0.5 * h);
        }
    }
}

/// Summary of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub y0: Vec<f64>,
    pub x0: Vec<f64>,
    pub dt: f64,
    pub steps: usize,
    pub y_end: Vec<f64>,
    /// Unwrapped angles; winding number `x_end / 2π`.
    pub x_end: Vec<f64>,
    /// `max |H(t) − H(0)| / ε` (absolute when ε = 0).
    pub energy_drift: f64,
    /// Angle increments per step, row-major `steps × n`.
    #[serde(skip)]
    pub increments: Vec<f64>,
}

/// Resumable integration that records angle increments.
#[derive(Debug, Clone)]
pub struct Propagator<'a> {
    it: Integrator<'a>,
    state: State,
    y0: Vec<f64>,
    x0: Vec<f64>,
    h0: f64,
    norm: f64,
    drift: f64,
    steps: usize,
    increments: Vec<f64>,
}

impl<'a> Propagator<'a> {
    pub fn new(field: &'a ForceField, eps: f64, y0: &[f64], x0: &[f64], dt: f64, scheme: Scheme) -> Result<Self> {
        let n = field.dim();
        if y0.len() != n || x0.len() != n {
            return Err(Error::Dimension { expected: n, got: if y0.len() != n { y0.len() } else { x0.len() } });
        }
        let it = Integrator::new(field, eps, dt, scheme)?;
        // stability guard on the kick size
        let gscale: f64 = 2.0
            * field.cs.iter().zip(field.ks.chunks_exact(n)).map(|(c, k)| c.norm() * k.iter().map(|a| a.abs() as f64).sum::<f64>()).sum::<f64>();
        let guard = dt.abs() * (eps * gscale).sqrt();
        if guard > 0.5 {
            return Err(Error::invalid(format!("time step {dt} too large for ε = {eps}: dt·√(ε‖∇f‖) = {guard:.3}")));
        }
        let state = State { y: y0.to_vec(), x: x0.to_vec() };
        let h0 = it.energy(&state);
        Ok(Propagator {
            it,
            state,
            y0: y0.to_vec(),
            x0: x0.to_vec(),
            h0,
            norm: if eps > 0.0 { eps } else { 1.0 },
            drift: 0.0,
            steps: 0,
            increments: Vec::new(),
        })
    }

    /// Advance until `total` steps have been taken.
    pub fn extend_to(&mut self, total: usize) {
        let n = self.state.x.len();
        self.increments.reserve(total.saturating_sub(self.steps) * n);
        let mut prev = self.state.x.clone();
        while self.steps < total {
            self.it.step(&mut self.state);
            for d in 0..n {
                self.increments.push(self.state.x[d] - prev[d]);
                prev[d] = self.state.x[d];
            }
            self.steps += 1;
            if self.steps % 64 == 0 || self.steps == total {
                self.drift = self.drift.max((self.it.energy(&self.state) - self.h0).abs() / self.norm);
            }
        }
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    pub fn energy_drift(&self) -> f64 {
        self.drift
    }

    pub fn state(&self) -> &State {
        &self.state
    }

    pub fn y0(&self) -> &[f64] {
        &self.y0
    }

    pub fn x0(&self) -> &[f64] {
        &self.x0
    }

    pub fn dt(&self) -> f64 {
        self.it.dt
    }

    pub fn into_trajectory(self) -> Trajectory {
        Trajectory {
            y0: self.y0,
            x0: self.x0,
            dt: self.it.dt,
            steps: self.steps,
            y_end: self.state.y,
            x_end: self.state.x,
            energy_drift: self.drift,
            increments: self.increments,
        }
    }
}

/// Integrate `steps` steps from `(y0, x0)`, recording angle increments.
pub fn integrate(field: &ForceField, eps: f64, y0: &[f64], x0: &[f64], dt: f64, steps: usize, scheme: Scheme) -> Result<Trajectory> {
    let mut p = Propagator::new(field, eps, y0, x0, dt, scheme)?;
    p.extend_to(steps);
    Ok(p.into_trajectory())
}

/// Fast Lyapunov indicator `max_t log ‖v(t)‖` for the tangent vector
/// started at `v₀ = (1, …, 1, 0, …, 0)/√n` in the `y` directions.
pub fn fli(field: &ForceField, eps: f64, y0: &[f64], x0: &[f64], dt: f64, steps: usize, scheme: Scheme) -> Result<f64> {
    let n = field.dim();
    let mut it = Integrator::new(field, eps, dt, scheme)?;
    let mut s = State { y: y0.to_vec(), x: x0.to_vec() };
    let v = 1.0 / (n as f64).sqrt();
    let mut t = State { y: vec![v; n], x: vec![0.0; n] };
    let mut best = f64::NEG_INFINITY;
    for _ in 0..steps {
        it.step_tangent(&mut s, &mut t);
        let norm = t.y.iter().chain(&t.x).map(|a| a * a).sum::<f64>().sqrt();
        best = best.max(norm.ln());
    }
    Ok(best)
}
