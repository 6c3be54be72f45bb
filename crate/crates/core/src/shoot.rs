//! Matrix shooting: propagate the folded initial-value problems
//! `−Φ″ + Q_j(x)Φ = λ_eff·Φ` on `[0, π/2]` with `Φ(0) = I`, `Φ′(0) = 0`.
//!
//! The caller supplies the effective spectral parameter per half — `λ` for
//! the left half, `λ·alpha²` for the right — and a step count. Integration is
//! classical fixed-step fourth-order Runge–Kutta on the stacked `(Φ, Φ′)`
//! state, with multiplicative renormalization so that entries stay inside
//! `[1e−2, 1e2]` even when `|Im √λ|` drives exponential growth; the divided-out
//! factor accumulates in `log_scale`.
//!
//! Real `λ_eff` runs on a real-arithmetic kernel (the returned frames then
//! have exactly zero imaginary parts); complex `λ_eff` runs the same kernel
//! instantiated over complex scalars.

use std::f64::consts::FRAC_PI_2;
use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::NumericError;
use crate::problem::Potential;

/// Renormalization window: whenever the largest entry magnitude of the
/// stacked state leaves `[RENORM_LO, RENORM_HI]`, the state is rescaled to
/// unit magnitude and the factor logged.
pub(crate) const RENORM_LO: f64 = 1e-2;
pub(crate) const RENORM_HI: f64 = 1e2;

/// Smallest admissible step count.
pub const MIN_STEPS: usize = 16;

/// Default step count for a half-interval: 2048 up to `|s| = 50`, growing
/// proportionally to `|s|` beyond that (keeps ≥ 20 steps per oscillation).
pub fn default_steps(s_abs: f64) -> usize {
    const BASE: usize = 2048;
    const S_CAP: f64 = 50.0;
    if s_abs > S_CAP {
        (BASE as f64 * (s_abs / S_CAP)).ceil() as usize
    } else {
        BASE
    }
}

/// Normalized fundamental solution at `x = π/2`. The true solution there is
/// `e^{log_scale} · (phi, dphi)`.
#[derive(Clone, Debug)]
pub struct ShootingFrame {
    pub phi: DMatrix<Complex64>,
    pub dphi: DMatrix<Complex64>,
    pub log_scale: f64,
    pub x: f64,
}

impl ShootingFrame {
    /// `true` when the frame was produced by the real-arithmetic kernel, in
    /// which case every imaginary part is exactly zero.
    pub fn is_real(&self) -> bool {
        self.phi.iter().chain(self.dphi.iter()).all(|z| z.im == 0.0)
    }
}

/// Propagates one folded half to `x = π/2`.
pub fn propagate(
    n: usize,
    q: &Potential,
    effective_lambda: Complex64,
    steps: usize,
) -> Result<ShootingFrame, NumericError> {
    if n == 0 {
        return Err(NumericError::InvalidArgument("dimension must be at least 1".into()));
    }
    if steps < MIN_STEPS {
        return Err(NumericError::InvalidArgument(format!(
            "steps = {steps} is below the minimum {MIN_STEPS}"
        )));
    }
    if effective_lambda.im == 0.0 {
        let raw = propagate_raw::<f64>(n, q, effective_lambda.re, steps, RENORM_LO, RENORM_HI)?;
        Ok(frame_from_raw(n, &raw.phi, &raw.dphi, raw.log_scale, |&v| Complex64::new(v, 0.0)))
    } else {
        let raw =
            propagate_raw::<Complex64>(n, q, effective_lambda, steps, RENORM_LO, RENORM_HI)?;
        Ok(frame_from_raw(n, &raw.phi, &raw.dphi, raw.log_scale, |&v| v))
    }
}

fn frame_from_raw<T>(
    n: usize,
    phi: &[T],
    dphi: &[T],
    log_scale: f64,
    lift: impl Fn(&T) -> Complex64,
) -> ShootingFrame {
    let phi = DMatrix::from_row_iterator(n, n, phi.iter().map(&lift));
    let dphi = DMatrix::from_row_iterator(n, n, dphi.iter().map(&lift));
    ShootingFrame { phi, dphi, log_scale, x: FRAC_PI_2 }
}

/// Residuals of the two interface equations at `x = π/2` for a candidate
/// solution `Y₁ = Φ₁C₁` (left) glued to `Y₂ = Φ₂C₂` (reflected right):
/// `value = a·Φ₁C₁ − Φ₂C₂` and `derivative = a⁻¹·Φ₁′C₁ + Φ₂′C₂` (the sign
/// flip on the derivative comes from the fold `x ↦ π−x`). The true residuals
/// are `e^{log_scale}` times the stored vectors.
#[derive(Clone, Debug)]
pub struct JumpResidual {
    pub value: DVector<Complex64>,
    pub derivative: DVector<Complex64>,
    pub log_scale: f64,
}

impl JumpResidual {
    /// Largest entry magnitude across both residual vectors (scaled frame).
    pub fn max_abs(&self) -> f64 {
        self.value
            .iter()
            .chain(self.derivative.iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// Evaluates how well coefficient vectors `c1`, `c2` satisfy the interface
/// conditions given frames for both halves at `π/2`.
pub fn apply_jump(
    left: &ShootingFrame,
    right: &ShootingFrame,
    a: f64,
    c1: &DVector<Complex64>,
    c2: &DVector<Complex64>,
) -> Result<JumpResidual, NumericError> {
    let n = left.phi.nrows();
    if right.phi.nrows() != n || c1.len() != n || c2.len() != n {
        return Err(NumericError::InvalidArgument(format!(
            "dimension mismatch: frames {}×{} and {}×{}, coefficients {} and {}",
            n,
            left.phi.ncols(),
            right.phi.nrows(),
            right.phi.ncols(),
            c1.len(),
            c2.len()
        )));
    }
    for (name, frame) in [("left", left), ("right", right)] {
        if (frame.x - FRAC_PI_2).abs() > 1e-9 {
            return Err(NumericError::InvalidArgument(format!(
                "{name} frame is at x = {}, expected the interface π/2",
                frame.x
            )));
        }
    }
    // Bring both frames to the larger of the two scales before combining.
    let g = left.log_scale.max(right.log_scale);
    let fl = Complex64::new((left.log_scale - g).exp(), 0.0);
    let fr = Complex64::new((right.log_scale - g).exp(), 0.0);
    let value = (&left.phi * c1) * (fl * a) - (&right.phi * c2) * fr;
    let derivative = (&left.dphi * c1) * (fl / a) + (&right.dphi * c2) * fr;
    Ok(JumpResidual { value, derivative, log_scale: g })
}

/// Size of `ΦᵀΦ′ − Φ′ᵀΦ` (plain transpose, no conjugation) relative to the
/// entry scales of the frame. Vanishes identically for symmetric `Q` — any
/// `λ` — so it measures integrator consistency.
pub fn wronskian_defect(frame: &ShootingFrame) -> f64 {
    let w = frame.phi.transpose() * &frame.dphi - frame.dphi.transpose() * &frame.phi;
    let num = w.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let phi_max = frame.phi.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let dphi_max = frame.dphi.iter().map(|z| z.norm()).fold(0.0, f64::max);
    num / (phi_max * dphi_max).max(f64::MIN_POSITIVE)
}

/// Scalar abstraction so the one Runge–Kutta kernel serves both the real and
/// the complex spectral parameter.
pub(crate) trait RkScalar:
    Copy + Send + Sync + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + 'static
{
    const ZERO: Self;
    const ONE: Self;
    fn scale(self, f: f64) -> Self;
    /// Cheap magnitude proxy `|re| + |im|` for renormalization decisions.
    fn mag1(self) -> f64;
}

impl RkScalar for f64 {
    const ZERO: Self = 0.0;
    const ONE: Self = 1.0;
    fn scale(self, f: f64) -> Self {
        self * f
    }
    fn mag1(self) -> f64 {
        self.abs()
    }
}

impl RkScalar for Complex64 {
    const ZERO: Self = Complex64::new(0.0, 0.0);
    const ONE: Self = Complex64::new(1.0, 0.0);
    fn scale(self, f: f64) -> Self {
        Complex64::new(self.re * f, self.im * f)
    }
    fn mag1(self) -> f64 {
        self.re.abs() + self.im.abs()
    }
}

pub(crate) struct RawFrame<T> {
    pub phi: Vec<T>,
    pub dphi: Vec<T>,
    pub log_scale: f64,
}

/// The fixed-step RK4 kernel over row-major `n×n` blocks. `window` bounds the
/// admissible entry magnitude before a renormalization is applied.
pub(crate) fn propagate_raw<T: RkScalar>(
    n: usize,
    q: &Potential,
    lambda_eff: T,
    steps: usize,
    window_lo: f64,
    window_hi: f64,
) -> Result<RawFrame<T>, NumericError> {
    let nn = n * n;
    let h = FRAC_PI_2 / steps as f64;

    let mut p = vec![T::ZERO; nn];
    let mut d = vec![T::ZERO; nn];
    for i in 0..n {
        p[i * n + i] = T::ONE;
    }
    let mut log_scale = 0.0f64;

    // Potential samples for the current step: start, midpoint, end. The end
    // sample of one step is reused as the start sample of the next.
    let mut qa = vec![0.0f64; nn];
    let mut qm = vec![0.0f64; nn];
    let mut qb = vec![0.0f64; nn];
    q.eval_into(n, 0.0, &mut qa);

    let mut k1p = vec![T::ZERO; nn];
    let mut k1d = vec![T::ZERO; nn];
    let mut k2p = vec![T::ZERO; nn];
    let mut k2d = vec![T::ZERO; nn];
    let mut k3p = vec![T::ZERO; nn];
    let mut k3d = vec![T::ZERO; nn];
    let mut k4p = vec![T::ZERO; nn];
    let mut k4d = vec![T::ZERO; nn];
    let mut tp = vec![T::ZERO; nn];
    let mut td = vec![T::ZERO; nn];

    for step in 0..steps {
        let x = step as f64 * h;
        q.eval_into(n, x + 0.5 * h, &mut qm);
        q.eval_into(n, x + h, &mut qb);

        derivative(n, &qa, lambda_eff, &p, &d, &mut k1p, &mut k1d);

        stage_state(&p, &d, &k1p, &k1d, 0.5 * h, &mut tp, &mut td);
        derivative(n, &qm, lambda_eff, &tp, &td, &mut k2p, &mut k2d);

        stage_state(&p, &d, &k2p, &k2d, 0.5 * h, &mut tp, &mut td);
        derivative(n, &qm, lambda_eff, &tp, &td, &mut k3p, &mut k3d);

        stage_state(&p, &d, &k3p, &k3d, h, &mut tp, &mut td);
        derivative(n, &qb, lambda_eff, &tp, &td, &mut k4p, &mut k4d);

        let w = h / 6.0;
        let mut mag = 0.0f64;
        for i in 0..nn {
            p[i] = p[i] + (k1p[i] + (k2p[i] + k3p[i]).scale(2.0) + k4p[i]).scale(w);
            d[i] = d[i] + (k1d[i] + (k2d[i] + k3d[i]).scale(2.0) + k4d[i]).scale(w);
            mag = mag.max(p[i].mag1()).max(d[i].mag1());
        }

        if !mag.is_finite() {
            return Err(NumericError::IntegrationBlowup { step });
        }
        if mag > window_hi || (mag < window_lo && mag > 0.0) {
            let f = 1.0 / mag;
            for i in 0..nn {
                p[i] = p[i].scale(f);
                d[i] = d[i].scale(f);
            }
            log_scale += mag.ln();
        }

        std::mem::swap(&mut qa, &mut qb);
    }

    Ok(RawFrame { phi: p, dphi: d, log_scale })
}

/// Right-hand side of the first-order system: `(Φ, Φ′)' = (Φ′, (Q − λ)Φ)`.
fn derivative<T: RkScalar>(
    n: usize,
    qx: &[f64],
    lambda: T,
    p: &[T],
    d: &[T],
    out_dp: &mut [T],
    out_dd: &mut [T],
) {
    out_dp.copy_from_slice(d);
    for i in 0..n {
        for j in 0..n {
            let mut acc = T::ZERO;
            for k in 0..n {
                acc = acc + p[k * n + j].scale(qx[i * n + k]);
            }
            out_dd[i * n + j] = acc - lambda * p[i * n + j];
        }
    }
}

fn stage_state<T: RkScalar>(
    p: &[T],
    d: &[T],
    kp: &[T],
    kd: &[T],
    f: f64,
    out_p: &mut [T],
    out_d: &mut [T],
) {
    for i in 0..p.len() {
        out_p[i] = p[i] + kp[i].scale(f);
        out_d[i] = d[i] + kd[i].scale(f);
    }
}
