//! Root localization on the real λ axis: scans, bracket refinement, and
//! argument-principle multiplicities.
//!
//! Scanning runs in the oscillation variable rather than λ itself: along the
//! positive axis in `s = √λ`, along the negative axis in `κ = √(−λ)`. Zeros
//! of `ω` are asymptotically equispaced in `s`, so a uniform `s`-grid keeps a
//! bounded number of zeros per cell where a uniform λ-grid would not.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::charfn::CharFn;
use crate::error::NumericError;
use crate::problem::{ProblemSpec, SpectralParameter};

/// A dip candidate survives refinement only if `|ω|` at the minimum falls
/// below this ratio times the geometric mean of `|ω|` at the bracket ends.
pub const DEFAULT_DIP_RATIO: f64 = 1e-6;

/// Bisection / golden-section width target in the scan variable.
pub const DEFAULT_REFINE_TOL: f64 = 1e-10;

/// A winding number further than this from an integer is refused rather
/// than rounded.
pub const WINDING_SNAP_TOL: f64 = 0.05;

/// Scan axis: λ = t² on the positive side, λ = −t² on the negative side.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    PositiveS,
    NegativeKappa,
}

impl Axis {
    pub fn lambda(self, t: f64) -> f64 {
        match self {
            Axis::PositiveS => t * t,
            Axis::NegativeKappa => -(t * t),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BracketKind {
    /// `ω` changes sign across the interval: odd total multiplicity inside.
    SignChange,
    /// Local minimum of `|ω|` without a sign change: even-multiplicity
    /// candidate, confirmed or discarded during refinement.
    DipCandidate,
    /// A scan sample where `ω` vanished exactly.
    ExactHit,
}

/// One bracketing interval `[t_lo, t_hi]` in the scan variable.
#[derive(Clone, Copy, Debug)]
pub struct Bracket {
    pub axis: Axis,
    pub t_lo: f64,
    pub t_hi: f64,
    pub kind: BracketKind,
    /// `ln |ω|` at the two ends as sampled by the scan; the dip gate
    /// compares the refined minimum against their mean.
    pub log_lo: f64,
    pub log_hi: f64,
}

impl Bracket {
    pub fn lambda_lo(&self) -> f64 {
        self.axis.lambda(self.t_lo)
    }

    pub fn lambda_hi(&self) -> f64 {
        self.axis.lambda(self.t_hi)
    }
}

/// Scans `ω(s²)` for `s ∈ [0, s_max]` and returns bracketing intervals with
/// parity flags. `s_step` must satisfy the one-zero-per-bracket guard
/// `s_step ≤ min(α, 1)·0.05`.
pub fn scan_zeros(
    spec: &ProblemSpec,
    s_max: f64,
    s_step: f64,
) -> Result<Vec<Bracket>, NumericError> {
    let guard = spec.alpha().min(1.0) * 0.05;
    if s_step.is_nan() || s_step <= 0.0 || s_step > guard * (1.0 + 1e-12) {
        return Err(NumericError::InvalidArgument(format!(
            "scan step {s_step} violates the bracket guard {guard:.6}"
        )));
    }
    if s_max.is_nan() || s_max <= 0.0 {
        return Err(NumericError::InvalidArgument("scan range must be positive".into()));
    }
    let cf = CharFn::new(spec);
    let ts = grid(0.0, s_max, s_step);
    scan_axis(&cf, Axis::PositiveS, &ts, None)
}

/// Builds the inclusive uniform grid `[lo, …, ≥hi]` with the given step.
pub(crate) fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let m = ((hi - lo) / step).ceil().max(2.0) as usize;
    (0..=m).map(|k| lo + k as f64 * step).collect()
}

/// Shared scan kernel over a prepared grid of the scan variable. `steps`
/// overrides the integrator step count (scans tolerate a coarser kernel than
/// refinement does; signs and dip shapes are O(1) features).
pub(crate) fn scan_axis(
    cf: &CharFn,
    axis: Axis,
    ts: &[f64],
    steps: Option<usize>,
) -> Result<Vec<Bracket>, NumericError> {
    let lambdas: Vec<f64> = ts.iter().map(|&t| axis.lambda(t)).collect();
    let vals = cf.eval_grid_real(&lambdas, steps)?;
    let mut out = Vec::new();
    for (k, v) in vals.iter().enumerate() {
        if v.sign() == 0.0 {
            out.push(Bracket {
                axis,
                t_lo: ts[k],
                t_hi: ts[k],
                kind: BracketKind::ExactHit,
                log_lo: f64::NEG_INFINITY,
                log_hi: f64::NEG_INFINITY,
            });
        }
    }
    for k in 0..ts.len().saturating_sub(1) {
        let (a, b) = (&vals[k], &vals[k + 1]);
        if a.sign() != 0.0 && b.sign() != 0.0 && a.sign() != b.sign() {
            out.push(Bracket {
                axis,
                t_lo: ts[k],
                t_hi: ts[k + 1],
                kind: BracketKind::SignChange,
                log_lo: a.log_mag,
                log_hi: b.log_mag,
            });
        }
    }
    for k in 1..ts.len().saturating_sub(1) {
        let (a, b, c) = (&vals[k - 1], &vals[k], &vals[k + 1]);
        if a.sign() == b.sign()
            && b.sign() == c.sign()
            && b.sign() != 0.0
            && b.log_mag < a.log_mag
            && b.log_mag < c.log_mag
        {
            out.push(Bracket {
                axis,
                t_lo: ts[k - 1],
                t_hi: ts[k + 1],
                kind: BracketKind::DipCandidate,
                log_lo: a.log_mag,
                log_hi: c.log_mag,
            });
        }
    }
    out.sort_by(|x, y| x.t_lo.total_cmp(&y.t_lo));
    Ok(out)
}

/// A refined zero position before multiplicity assignment.
#[derive(Clone, Copy, Debug)]
pub(crate) struct RefinedRoot {
    pub lambda: f64,
    pub kind: BracketKind,
    /// `|ω|` at the refined position.
    pub residual: f64,
}

/// Refines a bracket to a zero position. Sign-change brackets bisect on the
/// sign of `ω`; dip candidates minimize `ln |ω|` by golden section and must
/// then pass the depth gate, otherwise `None` (a near-miss, not a zero).
pub(crate) fn refine_bracket_position(
    cf: &CharFn,
    bracket: &Bracket,
    dip_ratio: f64,
    tol: f64,
) -> Result<Option<RefinedRoot>, NumericError> {
    let axis = bracket.axis;
    let value_at = |t: f64| cf.eval_real(axis.lambda(t));
    match bracket.kind {
        BracketKind::ExactHit => Ok(Some(RefinedRoot {
            lambda: axis.lambda(bracket.t_lo),
            kind: BracketKind::ExactHit,
            residual: 0.0,
        })),
        BracketKind::SignChange => {
            let (mut lo, mut hi) = (bracket.t_lo, bracket.t_hi);
            let mut sign_lo = value_at(lo)?.sign();
            if sign_lo == 0.0 {
                return Ok(Some(RefinedRoot {
                    lambda: axis.lambda(lo),
                    kind: BracketKind::SignChange,
                    residual: 0.0,
                }));
            }
            while hi - lo > tol {
                let mid = 0.5 * (lo + hi);
                let v = value_at(mid)?;
                let s = v.sign();
                if s == 0.0 {
                    return Ok(Some(RefinedRoot {
                        lambda: axis.lambda(mid),
                        kind: BracketKind::SignChange,
                        residual: 0.0,
                    }));
                }
                if s == sign_lo {
                    lo = mid;
                    sign_lo = s;
                } else {
                    hi = mid;
                }
            }
            let t = 0.5 * (lo + hi);
            let residual = value_at(t)?.log_mag.exp();
            Ok(Some(RefinedRoot { lambda: axis.lambda(t), kind: BracketKind::SignChange, residual }))
        }
        BracketKind::DipCandidate => {
            const INV_PHI: f64 = 0.618_033_988_749_894_9;
            let (mut lo, mut hi) = (bracket.t_lo, bracket.t_hi);
            let mut c = hi - INV_PHI * (hi - lo);
            let mut d = lo + INV_PHI * (hi - lo);
            let mut fc = value_at(c)?.log_mag;
            let mut fd = value_at(d)?.log_mag;
            let mut best = if fc < fd { (c, fc) } else { (d, fd) };
            for _ in 0..200 {
                if hi - lo <= tol || best.1 == f64::NEG_INFINITY {
                    break;
                }
                if fc < fd {
                    hi = d;
                    d = c;
                    fd = fc;
                    c = hi - INV_PHI * (hi - lo);
                    fc = value_at(c)?.log_mag;
                } else {
                    lo = c;
                    c = d;
                    fc = fd;
                    d = lo + INV_PHI * (hi - lo);
                    fd = value_at(d)?.log_mag;
                }
                let (t, f) = if fc < fd { (c, fc) } else { (d, fd) };
                if f < best.1 {
                    best = (t, f);
                }
            }
            let gate = 0.5 * (bracket.log_lo + bracket.log_hi) + dip_ratio.ln();
            if best.1 > gate {
                return Ok(None);
            }
            Ok(Some(RefinedRoot {
                lambda: axis.lambda(best.0),
                kind: BracketKind::DipCandidate,
                residual: best.1.exp(),
            }))
        }
    }
}

/// Zero count of `ω` (with multiplicity) inside the circle `|λ − center| =
/// radius` by the argument principle. The circle is sampled at 64 points,
/// doubling until two consecutive sample counts agree; the stabilized
/// winding must then sit within [`WINDING_SNAP_TOL`] of an integer.
pub fn winding_multiplicity(
    spec: &ProblemSpec,
    center: f64,
    radius: f64,
) -> Result<usize, NumericError> {
    winding_multiplicity_cf(&CharFn::new(spec), center, radius)
}

pub(crate) fn winding_multiplicity_cf(
    cf: &CharFn,
    center: f64,
    radius: f64,
) -> Result<usize, NumericError> {
    if !radius.is_finite() || radius <= 0.0 {
        return Err(NumericError::InvalidArgument(format!(
            "winding circle radius must be positive, got {radius}"
        )));
    }
    let mut radius = radius;
    let mut radius_attempts = 0;
    let mut pts = 64usize;
    let mut prev: Option<f64> = None;
    while pts <= 4096 {
        match winding_once(cf, center, radius, pts)? {
            Some(w) => {
                if let Some(p) = prev {
                    if (w - p).abs() <= 0.02 {
                        let snapped = w.round();
                        if (w - snapped).abs() <= WINDING_SNAP_TOL && snapped >= 0.0 {
                            return Ok(snapped as usize);
                        }
                        return Err(NumericError::MultiplicityUndetermined {
                            winding: w,
                            tol: WINDING_SNAP_TOL,
                        });
                    }
                }
                prev = Some(w);
                pts *= 2;
            }
            None => {
                // A sample hit a zero or the phase moved too fast: nudge the
                // circle and start over.
                radius_attempts += 1;
                if radius_attempts > 3 {
                    return Err(NumericError::MultiplicityUndetermined {
                        winding: prev.unwrap_or(f64::NAN),
                        tol: WINDING_SNAP_TOL,
                    });
                }
                radius *= 0.83;
                prev = None;
                pts = 128;
            }
        }
    }
    Err(NumericError::MultiplicityUndetermined {
        winding: prev.unwrap_or(f64::NAN),
        tol: WINDING_SNAP_TOL,
    })
}

/// One circle pass; `None` when the sampling is too coarse to trust (phase
/// step near π) or a sample lands on a zero.
fn winding_once(
    cf: &CharFn,
    center: f64,
    radius: f64,
    pts: usize,
) -> Result<Option<f64>, NumericError> {
    let vals: Vec<_> = (0..pts)
        .into_par_iter()
        .map(|k| {
            let theta = std::f64::consts::TAU * k as f64 / pts as f64;
            let lambda = Complex64::new(
                center + radius * theta.cos(),
                radius * theta.sin(),
            );
            cf.eval(SpectralParameter::from_lambda(lambda))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut total = 0.0f64;
    for k in 0..pts {
        let ph0 = vals[k].phase;
        let ph1 = vals[(k + 1) % pts].phase;
        if ph0.norm_sqr() == 0.0 || ph1.norm_sqr() == 0.0 {
            return Ok(None);
        }
        let d = (ph1 / ph0).arg();
        if d.abs() > 2.8 {
            return Ok(None);
        }
        total += d;
    }
    Ok(Some(total / std::f64::consts::TAU))
}

/// Refines one bracket to `(λ, multiplicity)`. Scalar problems take
/// multiplicity 1 on a sign change (zeros of a scalar characteristic
/// function are simple); every other case is settled by the argument
/// principle on a circle sized from the bracket geometry.
pub fn refine_root(spec: &ProblemSpec, bracket: &Bracket) -> Result<(f64, usize), NumericError> {
    let cf = CharFn::new(spec);
    let refined = refine_bracket_position(&cf, bracket, DEFAULT_DIP_RATIO, DEFAULT_REFINE_TOL)?
        .ok_or_else(|| {
            NumericError::InvalidArgument(
                "dip candidate did not pass the depth gate; no zero in this bracket".into(),
            )
        })?;
    if cf.n() == 1 && bracket.kind == BracketKind::SignChange {
        return Ok((refined.lambda, 1));
    }
    let span = (bracket.lambda_hi() - bracket.lambda_lo()).abs();
    let radius = if span > 0.0 {
        (span * 0.5).max(1e-6)
    } else {
        (0.005 * (1.0 + refined.lambda.abs())).max(1e-6)
    };
    let mult = winding_multiplicity_cf(&cf, refined.lambda, radius)?;
    Ok((refined.lambda, mult))
}
