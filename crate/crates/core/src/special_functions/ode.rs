//! Explicit Runge–Kutta integration of first-order systems `y' = f(x, y)`.
//!
//! The scheme is the Dormand–Prince 5(4) pair with local extrapolation,
//! Gustafsson-style PI step-size control and the pair's native fourth-order
//! continuous extension for dense output. Integration may run in either
//! direction. Caller-supplied stop points are hit exactly: a step is clipped
//! to end on the next stop, so values there carry full step accuracy rather
//! than interpolation error.

use thiserror::Error;

use super::ToleranceSpec;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// Difference between the fifth- and fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// Continuous extension.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError {
    #[error("integration span is empty or not finite: [{start}, {end}]")]
    InvalidSpan { start: f64, end: f64 },
    #[error("initial state has dimension 0 or non-finite entries")]
    InvalidState,
    #[error("step size underflow at x = {last_good_x}")]
    StepUnderflow { last_good_x: f64 },
    #[error("step budget of {max_steps} exhausted at x = {last_good_x}")]
    MaxStepsExceeded { last_good_x: f64, max_steps: usize },
}

impl OdeError {
    /// The furthest point reached with an accepted step, if integration started.
    pub fn last_good_x(&self) -> Option<f64> {
        match self {
            OdeError::StepUnderflow { last_good_x }
            | OdeError::MaxStepsExceeded { last_good_x, .. } => Some(*last_good_x),
            _ => None,
        }
    }
}

/// One accepted step with its interpolation coefficients.
#[derive(Debug, Clone)]
struct Segment {
    x0: f64,
    h: f64,
    // Five blocks of `dim` coefficients.
    rcont: Vec<f64>,
}

/// Accepted steps of an integration, with dense output.
#[derive(Debug, Clone)]
pub struct OdeSolution {
    dim: usize,
    direction: f64,
    nodes: Vec<f64>,
    states: Vec<Vec<f64>>,
    /// Componentwise sum of local error estimates up to each node.
    accumulated_error: Vec<Vec<f64>>,
    segments: Vec<Segment>,
    rhs_evaluations: usize,
    rejected_steps: usize,
}

impl OdeSolution {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn x_start(&self) -> f64 {
        self.nodes[0]
    }

    pub fn x_end(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    /// Step end points in integration order (starts with `x_start`).
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn states(&self) -> &[Vec<f64>] {
        &self.states
    }

    pub fn accepted_steps(&self) -> usize {
        self.segments.len()
    }

    pub fn rejected_steps(&self) -> usize {
        self.rejected_steps
    }

    pub fn rhs_evaluations(&self) -> usize {
        self.rhs_evaluations
    }

    pub fn contains(&self, x: f64) -> bool {
        let (lo, hi) = self.span();
        x >= lo && x <= hi
    }

    /// `(min, max)` of the covered interval.
    pub fn span(&self) -> (f64, f64) {
        let (a, b) = (self.x_start(), self.x_end());
        (a.min(b), a.max(b))
    }

    /// Index of the segment containing `x`, or `None` outside the span.
    fn locate(&self, x: f64) -> Option<usize> {
        if !self.contains(x) || self.segments.is_empty() {
            return None;
        }
        // nodes are monotone along `direction`
        let d = self.direction;
        let idx = self.nodes.partition_point(|&n| d * (n - x) < 0.0);
        Some(idx.saturating_sub(1).min(self.segments.len() - 1))
    }

    /// State at `x`. Exact at step nodes, interpolated in between.
    pub fn eval(&self, x: f64) -> Option<Vec<f64>> {
        let mut out = vec![0.0; self.dim];
        self.eval_into(x, &mut out).then_some(out)
    }

    /// Like [`eval`](Self::eval) but writes into `out`; returns `false` outside the span.
    pub fn eval_into(&self, x: f64, out: &mut [f64]) -> bool {
        let Some(i) = self.locate(x) else {
            return false;
        };
        if x == self.nodes[i] {
            out.copy_from_slice(&self.states[i]);
            return true;
        }
        if x == self.nodes[i + 1] {
            out.copy_from_slice(&self.states[i + 1]);
            return true;
        }
        let seg = &self.segments[i];
        let n = self.dim;
        let theta = (x - seg.x0) / seg.h;
        let theta1 = 1.0 - theta;
        let r = &seg.rcont;
        for (k, o) in out.iter_mut().enumerate() {
            *o = r[k]
                + theta
                    * (r[n + k]
                        + theta1 * (r[2 * n + k] + theta * (r[3 * n + k] + theta1 * r[4 * n + k])));
        }
        true
    }

    /// Accumulated local-error bound at the end of the step containing `x`.
    pub fn error_estimate(&self, x: f64) -> Option<&[f64]> {
        let i = self.locate(x)?;
        if x == self.nodes[i] {
            return Some(&self.accumulated_error[i]);
        }
        Some(&self.accumulated_error[i + 1])
    }

    /// Dense output at each of `xs`.
    pub fn sample(&self, xs: &[f64]) -> Vec<Option<Vec<f64>>> {
        xs.iter().map(|&x| self.eval(x)).collect()
    }
}

/// Configured integrator. [`integrate_ode`] is the shorthand without stops.
#[derive(Debug, Clone)]
pub struct OdeIntegrator {
    tol: ToleranceSpec,
    stops: Vec<f64>,
    initial_step: Option<f64>,
    max_step: Option<f64>,
}

impl OdeIntegrator {
    pub fn new(tol: ToleranceSpec) -> Self {
        Self {
            tol,
            stops: Vec::new(),
            initial_step: None,
            max_step: None,
        }
    }

    /// Points the integrator must land on exactly. Points outside the span
    /// are ignored.
    pub fn stops(mut self, stops: &[f64]) -> Self {
        self.stops = stops.to_vec();
        self
    }

    pub fn initial_step(mut self, h: f64) -> Self {
        self.initial_step = Some(h.abs());
        self
    }

    pub fn max_step(mut self, h: f64) -> Self {
        self.max_step = Some(h.abs());
        self
    }

    pub fn integrate<F>(
        &self,
        rhs: F,
        x_start: f64,
        x_end: f64,
        y0: &[f64],
    ) -> Result<OdeSolution, OdeError>
    where
        F: Fn(f64, &[f64], &mut [f64]),
    {
        if !(x_start.is_finite() && x_end.is_finite()) || x_start == x_end {
            return Err(OdeError::InvalidSpan {
                start: x_start,
                end: x_end,
            });
        }
        if y0.is_empty() || y0.iter().any(|v| !v.is_finite()) {
            return Err(OdeError::InvalidState);
        }
        let n = y0.len();
        let dir = (x_end - x_start).signum();
        let span = (x_end - x_start).abs();
        let atol = self.tol.abs_tol();
        let rtol = self.tol.rel_tol();
        let max_step = self.max_step.unwrap_or(span).min(span);

        // Stops strictly inside the span, sorted along the direction, with
        // the end point appended.
        let mut stops: Vec<f64> = self
            .stops
            .iter()
            .copied()
            .filter(|&s| s.is_finite() && dir * (s - x_start) > 0.0 && dir * (x_end - s) > 0.0)
            .collect();
        stops.sort_by(|a, b| (dir * a).total_cmp(&(dir * b)));
        stops.dedup();
        stops.push(x_end);
        let mut next_stop = 0;

        let mut k1 = vec![0.0; n];
        let mut k2 = vec![0.0; n];
        let mut k3 = vec![0.0; n];
        let mut k4 = vec![0.0; n];
        let mut k5 = vec![0.0; n];
        let mut k6 = vec![0.0; n];
        let mut k7 = vec![0.0; n];
        let mut ytmp = vec![0.0; n];
        let mut y1 = vec![0.0; n];
        let mut err_vec = vec![0.0; n];

        let mut x = x_start;
        let mut y = y0.to_vec();
        rhs(x, &y, &mut k1);
        let mut evals = 1;
        if k1.iter().any(|v| !v.is_finite()) {
            return Err(OdeError::StepUnderflow { last_good_x: x });
        }

        let mut h = match self.initial_step {
            Some(h) => h.min(max_step),
            None => {
                evals += 1;
                initial_step(&rhs, x, &y, &k1, dir, atol, rtol, max_step)
            }
        };

        let mut sol = OdeSolution {
            dim: n,
            direction: dir,
            nodes: vec![x],
            states: vec![y.clone()],
            accumulated_error: vec![vec![0.0; n]],
            segments: Vec::new(),
            rhs_evaluations: 0,
            rejected_steps: 0,
        };

        let mut fac_old: f64 = 1e-4;
        let mut rejected_last = false;
        let mut attempts = 0usize;

        loop {
            if attempts >= self.tol.max_steps() {
                return Err(OdeError::MaxStepsExceeded {
                    last_good_x: x,
                    max_steps: self.tol.max_steps(),
                });
            }
            attempts += 1;

            let min_h = 16.0 * f64::EPSILON * x.abs().max(1.0);
            if h < min_h {
                return Err(OdeError::StepUnderflow { last_good_x: x });
            }

            // Clip to the next stop.
            let target = stops[next_stop];
            let mut hits_stop = false;
            let mut step = h;
            if step >= dir * (target - x) * (1.0 - 1e-13) {
                step = dir * (target - x);
                hits_stop = true;
            }
            let hs = dir * step;

            for i in 0..n {
                ytmp[i] = y[i] + hs * A21 * k1[i];
            }
            rhs(x + C2 * hs, &ytmp, &mut k2);
            for i in 0..n {
                ytmp[i] = y[i] + hs * (A31 * k1[i] + A32 * k2[i]);
            }
            rhs(x + C3 * hs, &ytmp, &mut k3);
            for i in 0..n {
                ytmp[i] = y[i] + hs * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
            }
            rhs(x + C4 * hs, &ytmp, &mut k4);
            for i in 0..n {
                ytmp[i] = y[i] + hs * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
            }
            rhs(x + C5 * hs, &ytmp, &mut k5);
            for i in 0..n {
                ytmp[i] = y[i]
                    + hs * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
            }
            let x_new = if hits_stop { target } else { x + hs };
            rhs(x_new, &ytmp, &mut k6);
            for i in 0..n {
                y1[i] = y[i]
                    + hs * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
            }
            rhs(x_new, &y1, &mut k7);
            evals += 6;

            let mut err_sq = 0.0;
            for i in 0..n {
                let e = hs
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                err_vec[i] = e;
                let sk = atol + rtol * y[i].abs().max(y1[i].abs());
                err_sq += (e / sk) * (e / sk);
            }
            let err = (err_sq / n as f64).sqrt();
            let finite = err.is_finite() && k7.iter().all(|v| v.is_finite());

            if !finite {
                // Treat as a failed step: shrink hard and retry.
                sol.rejected_steps += 1;
                rejected_last = true;
                h = step * 0.1;
                continue;
            }

            let fac11 = err.powf(0.2 - BETA * 0.75);
            let fac = (fac11 / fac_old.powf(BETA) / SAFETY).clamp(1.0 / MAX_FACTOR, 1.0 / MIN_FACTOR);
            let mut h_new = step / fac;

            if err <= 1.0 {
                fac_old = err.max(1e-4);
                if rejected_last {
                    h_new = h_new.min(step);
                }
                rejected_last = false;

                let mut rcont = vec![0.0; 5 * n];
                for i in 0..n {
                    let ydiff = y1[i] - y[i];
                    let bspl = hs * k1[i] - ydiff;
                    rcont[i] = y[i];
                    rcont[n + i] = ydiff;
                    rcont[2 * n + i] = bspl;
                    rcont[3 * n + i] = ydiff - hs * k7[i] - bspl;
                    rcont[4 * n + i] = hs
                        * (D1 * k1[i]
                            + D3 * k3[i]
                            + D4 * k4[i]
                            + D5 * k5[i]
                            + D6 * k6[i]
                            + D7 * k7[i]);
                }
                sol.segments.push(Segment { x0: x, h: hs, rcont });

                let prev = sol.accumulated_error.last().unwrap();
                let acc: Vec<f64> = prev.iter().zip(&err_vec).map(|(p, e)| p + e.abs()).collect();
                sol.accumulated_error.push(acc);

                x = x_new;
                std::mem::swap(&mut y, &mut y1);
                std::mem::swap(&mut k1, &mut k7);
                sol.nodes.push(x);
                sol.states.push(y.clone());

                if hits_stop {
                    if next_stop + 1 == stops.len() {
                        break;
                    }
                    next_stop += 1;
                    // A clipped step says nothing about the natural step size.
                    h = h.max(h_new).min(max_step);
                } else {
                    h = h_new.min(max_step);
                }
            } else {
                sol.rejected_steps += 1;
                rejected_last = true;
                h = step / (1.0 / MIN_FACTOR).min(fac11 / SAFETY);
            }
        }

        sol.rhs_evaluations = evals;
        Ok(sol)
    }
}

/// Integrate `y' = rhs(x, y)` from `x_start` to `x_end`.
pub fn integrate_ode<F>(
    rhs: F,
    x_start: f64,
    x_end: f64,
    y0: &[f64],
    tol: &ToleranceSpec,
) -> Result<OdeSolution, OdeError>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    OdeIntegrator::new(*tol).integrate(rhs, x_start, x_end, y0)
}

/// Starting step from the size of `y` and its first two derivatives.
#[allow(clippy::too_many_arguments)]
fn initial_step<F>(
    rhs: &F,
    x: f64,
    y: &[f64],
    f0: &[f64],
    dir: f64,
    atol: f64,
    rtol: f64,
    max_step: f64,
) -> f64
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    let n = y.len();
    let mut dnf = 0.0;
    let mut dny = 0.0;
    for i in 0..n {
        let sk = atol + rtol * y[i].abs();
        dnf += (f0[i] / sk).powi(2);
        dny += (y[i] / sk).powi(2);
    }
    let mut h = if dnf <= 1e-10 || dny <= 1e-10 {
        1e-6
    } else {
        (dny / dnf).sqrt() * 0.01
    };
    h = h.min(max_step);

    let y1: Vec<f64> = (0..n).map(|i| y[i] + dir * h * f0[i]).collect();
    let mut f1 = vec![0.0; n];
    rhs(x + dir * h, &y1, &mut f1);
    let mut der2 = 0.0;
    for i in 0..n {
        let sk = atol + rtol * y[i].abs();
        der2 += ((f1[i] - f0[i]) / sk).powi(2);
    }
    let der2 = der2.sqrt() / h;
    let der12 = der2.max(dnf.sqrt());
    let h1 = if der12 <= 1e-15 || !der12.is_finite() {
        (h * 1e-3).max(1e-6)
    } else {
        (0.01 / der12).powf(0.2)
    };
    (100.0 * h).min(h1).min(max_step)
}
