//! Dormand–Prince 5(4) with step-size control and stiffness detection.

use crate::error::{Error, Result};

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
// fifth minus fourth order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Hairer's bound on h·|λ| for the stability region of this pair.
const STIFF_THRESHOLD: f64 = 3.25;
const STIFF_PATIENCE: usize = 15;
/// Consecutive non-stiff steps that clear the stiffness counter.
const CALM_PATIENCE: usize = 6;

#[derive(Clone, Copy, Debug)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    pub initial_step: Option<f64>,
    pub max_step: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-10,
            max_steps: 5_000_000,
            initial_step: None,
            max_step: f64::INFINITY,
        }
    }
}

/// Counters and the accumulated local error of a run.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct IntegrationStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
    /// Sum over accepted steps of the max-norm local error estimate.
    pub error_estimate: f64,
}

/// Integrates y' = f(t, y), stopping exactly at each requested output time.
pub struct Dopri5<F> {
    rhs: F,
    ctl: StepControl,
    dim: usize,
    k: [Vec<f64>; 7],
    stage: Vec<f64>,
    y_new: Vec<f64>,
    /// Step proposed for the next call.
    h: Option<f64>,
    fsal_valid: bool,
    stiff_count: usize,
    calm_count: usize,
    pub stats: IntegrationStats,
}

impl<F> Dopri5<F>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    pub fn new(rhs: F, dim: usize, ctl: StepControl) -> Self {
        Self {
            rhs,
            ctl,
            dim,
            k: std::array::from_fn(|_| vec![0.0; dim]),
            stage: vec![0.0; dim],
            y_new: vec![0.0; dim],
            h: ctl.initial_step,
            fsal_valid: false,
            stiff_count: 0,
            calm_count: 0,
            stats: IntegrationStats::default(),
        }
    }

    fn eval(&mut self, t: f64, idx: usize) -> Result<()> {
        self.stats.evaluations += 1;
        (self.rhs)(t, &self.stage, &mut self.k[idx])
    }

    fn scaled_norm(&self, y: &[f64], err: impl Fn(usize) -> f64) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            let sc = self.ctl.atol + self.ctl.rtol * y[i].abs().max(self.y_new[i].abs());
            worst = worst.max(err(i).abs() / sc);
        }
        worst
    }

    fn initial_step(&mut self, t: f64, y: &[f64], span: f64) -> Result<f64> {
        // Hairer–Nørsett–Wanner starting-step heuristic
        let d0 = self.scaled_norm(y, |i| y[i]);
        let d1 = self.scaled_norm(y, |i| self.k[0][i]);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let h0 = h0.min(span.abs());
        for i in 0..self.dim {
            self.stage[i] = y[i] + h0 * self.k[0][i];
        }
        self.eval(t + h0, 1)?;
        let d2 = self.scaled_norm(y, |i| self.k[1][i] - self.k[0][i]) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        Ok((100.0 * h0).min(h1).min(span.abs()))
    }

    /// Advance `y` from `t` to `t_end`.
    pub fn integrate(&mut self, t: &mut f64, y: &mut [f64], t_end: f64) -> Result<()> {
        if t_end <= *t {
            return Ok(());
        }
        if !self.fsal_valid {
            self.stage.copy_from_slice(y);
            self.eval(*t, 0)?;
            self.fsal_valid = true;
        }
        let mut h = match self.h {
            Some(h) => h,
            None => self.initial_step(*t, y, t_end - *t)?,
        };
        loop {
            let remaining = t_end - *t;
            if remaining <= 1e-15 * t_end.abs().max(1.0) {
                *t = t_end;
                return Ok(());
            }
            h = h.min(self.ctl.max_step);
            let clipped = h >= remaining;
            let step = if clipped { remaining } else { h };
            if step < 1e-14 * t.abs().max(1.0) || step <= f64::MIN_POSITIVE {
                return Err(Error::Integration { s: *t, reason: format!("step size underflow (h = {step:e})") });
            }
            if self.stats.accepted + self.stats.rejected >= self.ctl.max_steps {
                return Err(Error::Integration { s: *t, reason: "maximum number of steps exceeded".into() });
            }
            let err = self.attempt(*t, y, step)?;
            if err <= 1.0 {
                self.stats.accepted += 1;
                // Lipschitz estimate from the last two stages, both at t + h
                let mut num = 0.0f64;
                let mut den = 0.0f64;
                for i in 0..self.dim {
                    num += (self.k[6][i] - self.k[5][i]).powi(2);
                    den += (self.y_new[i] - self.stage[i]).powi(2);
                }
                // den = 0 carries no information and leaves the counter alone
                if den > 0.0 {
                    if step * (num / den).sqrt() > STIFF_THRESHOLD {
                        self.calm_count = 0;
                        self.stiff_count += 1;
                        if self.stiff_count >= STIFF_PATIENCE {
                            return Err(Error::Integration {
                                s: *t,
                                reason: "problem became stiff; reduce t_f times the decay rates".into(),
                            });
                        }
                    } else {
                        self.calm_count += 1;
                        if self.calm_count >= CALM_PATIENCE {
                            self.stiff_count = 0;
                        }
                    }
                }
                *t = if clipped { t_end } else { *t + step };
                y.copy_from_slice(&self.y_new);
                self.k.swap(0, 6);
                let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                // keep a clipped step from shrinking the natural step size
                h = if clipped { h.max(step * factor) } else { step * factor };
                if clipped {
                    self.h = Some(h);
                    return Ok(());
                }
            } else {
                self.stats.rejected += 1;
                h = step * (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
            }
            self.h = Some(h);
        }
    }

    fn attempt(&mut self, t: f64, y: &[f64], h: f64) -> Result<f64> {
        let n = self.dim;
        for i in 0..n {
            self.stage[i] = y[i] + h * A21 * self.k[0][i];
        }
        self.eval(t + C2 * h, 1)?;
        for i in 0..n {
            self.stage[i] = y[i] + h * (A31 * self.k[0][i] + A32 * self.k[1][i]);
        }
        self.eval(t + C3 * h, 2)?;
        for i in 0..n {
            self.stage[i] = y[i] + h * (A41 * self.k[0][i] + A42 * self.k[1][i] + A43 * self.k[2][i]);
        }
        self.eval(t + C4 * h, 3)?;
        for i in 0..n {
            self.stage[i] =
                y[i] + h * (A51 * self.k[0][i] + A52 * self.k[1][i] + A53 * self.k[2][i] + A54 * self.k[3][i]);
        }
        self.eval(t + C5 * h, 4)?;
        for i in 0..n {
            self.stage[i] = y[i]
                + h * (A61 * self.k[0][i] + A62 * self.k[1][i] + A63 * self.k[2][i] + A64 * self.k[3][i]
                    + A65 * self.k[4][i]);
        }
        self.eval(t + h, 5)?;
        for i in 0..n {
            self.y_new[i] = y[i]
                + h * (A71 * self.k[0][i] + A73 * self.k[2][i] + A74 * self.k[3][i] + A75 * self.k[4][i]
                    + A76 * self.k[5][i]);
        }
        // keep stage 6's argument for the stiffness test, evaluate FSAL stage
        std::mem::swap(&mut self.stage, &mut self.y_new);
        self.eval(t + h, 6)?;
        std::mem::swap(&mut self.stage, &mut self.y_new);
        let mut local = 0.0f64;
        let err = {
            let k = &self.k;
            let e = |i: usize| {
                h * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i] + E7 * k[6][i])
            };
            for i in 0..n {
                local = local.max(e(i).abs());
            }
            self.scaled_norm(y, e)
        };
        if err <= 1.0 {
            self.stats.error_estimate += local;
        }
        Ok(err)
    }
}
