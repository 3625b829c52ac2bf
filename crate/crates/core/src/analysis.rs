//! Post-processing of run series: blow-up time, rate witnesses and the
//! concentration quantities along a trajectory.
//!
//! Every check looks at the same tail, the last two decades of `T* - t`.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::diagnostics::{rho_seminorm, ObservableRecord};
use crate::evolver::StopReason;
use crate::grid::{grad_norm_sq, integrate_region, RadialField, RadialGrid};
use crate::{Error, PhysParams, Result};

/// Columns of a run series that the fits consume.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub stop_reason: StopReason,
    pub t: Vec<f64>,
    pub grad_sq: Vec<f64>,
    pub lsigmac: Vec<f64>,
    /// NaN entries mean the norm was not tracked.
    pub hsc: Vec<f64>,
}

impl Series {
    pub fn from_records(stop_reason: StopReason, records: &[ObservableRecord]) -> Self {
        Series {
            stop_reason,
            t: records.iter().map(|r| r.t).collect(),
            grad_sq: records.iter().map(|r| r.grad_sq).collect(),
            lsigmac: records.iter().map(|r| r.lsigmac).collect(),
            hsc: records.iter().map(|r| r.hsc).collect(),
        }
    }

    /// Series from `t` and `‖∇u‖²` alone; the other norms are NaN.
    pub fn from_gradient(stop_reason: StopReason, t: Vec<f64>, grad_sq: Vec<f64>) -> Self {
        let n = t.len();
        Series { stop_reason, t, grad_sq, lsigmac: alloc::vec![f64::NAN; n], hsc: alloc::vec![f64::NAN; n] }
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Every `k`-th sample, always keeping the last one.
    pub fn thinned(&self, k: usize) -> Series {
        let n = self.len();
        let keep: Vec<usize> = (0..n).filter(|i| i % k == 0 || *i == n - 1).collect();
        let pick = |v: &[f64]| keep.iter().map(|&i| v[i]).collect::<Vec<_>>();
        Series {
            stop_reason: self.stop_reason,
            t: pick(&self.t),
            grad_sq: pick(&self.grad_sq),
            lsigmac: pick(&self.lsigmac),
            hsc: pick(&self.hsc),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TStar {
    pub t_star: f64,
    pub uncertainty: f64,
}

/// Minimum of a witness over the tail, where it sits, and the log-log slope
/// of the witness against `T* - t`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Witness {
    pub value: f64,
    pub at_t: f64,
    pub trend: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct LogFit {
    pub gamma: f64,
    /// Exponent refitted at `T* ± uncertainty`.
    pub interval: (f64, f64),
    /// RMS residual of the log-log fit.
    pub residual: f64,
    pub lsigmac_increasing: bool,
    pub hsc_increasing: Option<bool>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct UpperFit {
    pub slope: f64,
    pub interval: (f64, f64),
    /// `2β/(1+β)`.
    pub threshold: f64,
    /// Estimate of `∫_{t_stop}^{T*} (T*-τ)‖∇u‖² dτ` added to every `g(t)`.
    pub truncation: f64,
}

/// Least-squares line `y = a + b x`; returns `(a, b, rms residual)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
    }
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let ss: f64 = x.iter().zip(y).map(|(a, b)| (b - icpt - slope * a) * (b - icpt - slope * a)).sum();
    (icpt, slope, libm::sqrt(ss / n))
}

/// Least-squares slope of a line forced through the last point.
fn anchored_slope(x: &[f64], y: &[f64]) -> f64 {
    let (x0, y0) = (x[x.len() - 1], y[y.len() - 1]);
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxx += (a - x0) * (a - x0);
        sxy += (a - x0) * (b - y0);
    }
    sxy / sxx
}

fn lambda_sq(s: &Series, p: &PhysParams) -> Vec<f64> {
    s.grad_sq.iter().map(|&g| libm::pow(g, -1.0 / (1.0 - p.s_c))).collect()
}

const MIN_TSTAR_SAMPLES: usize = 20;
const MIN_TAIL_SAMPLES: usize = 5;

/// Root of a linear fit of `λ_u²` against `t` over the last decade of `λ_u`
/// shrinkage. The line is pinned to the last sample, so the root always lies
/// past the end of the record. The uncertainty is the spread of the roots over the last
/// one, two and three half-decades.
pub fn estimate_tstar(s: &Series, p: &PhysParams) -> Result<TStar> {
    if !s.stop_reason.is_blowup() {
        return Err(Error::NoBlowup);
    }
    if s.len() < MIN_TSTAR_SAMPLES {
        return Err(Error::InsufficientTail(format!("{} samples", s.len())));
    }
    let l2 = lambda_sq(s, p);
    let last = *l2.last().unwrap();
    let first = l2[0];
    if !(last > 0.0) || first < 100.0 * last {
        return Err(Error::InsufficientTail(format!("lambda² shrank only by {:.3} (need 100)", first / last)));
    }
    let t_last = *s.t.last().unwrap();
    let root = |half_decades: i32| -> Option<f64> {
        // λ within 10^{k/2} of its last value, i.e. λ² within 10^k
        let cap = last * libm::pow(10.0, half_decades as f64);
        let start = l2.iter().rposition(|&v| v > cap).map_or(0, |i| i + 1);
        if s.len() - start < 3 {
            return None;
        }
        let b = anchored_slope(&s.t[start..], &l2[start..]);
        let r = t_last + last / -b;
        (b < 0.0 && r.is_finite()).then_some(r)
    };
    let start = l2.iter().rposition(|&v| v > 100.0 * last).map_or(0, |i| i + 1);
    if s.len() - start < MIN_TSTAR_SAMPLES {
        return Err(Error::InsufficientTail(format!("{} samples in the last decade of lambda", s.len() - start)));
    }
    let t_star = root(2).ok_or_else(|| Error::InsufficientTail("lambda² is not decreasing".to_string()))?;
    let roots: Vec<f64> = [1, 2, 3].iter().filter_map(|&k| root(k)).collect();
    let lo = roots.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = roots.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(TStar { t_star, uncertainty: hi - lo })
}

/// Indices with `T* - t` within two decades of its final value.
pub fn tail_indices(s: &Series, t_star: f64) -> Result<Vec<usize>> {
    let t_last = *s.t.last().ok_or_else(|| Error::InsufficientTail("empty series".to_string()))?;
    let d_last = t_star - t_last;
    if !(d_last > 0.0) {
        return Err(Error::InsufficientTail(format!("T* = {t_star} does not exceed the last sample")));
    }
    let idx: Vec<usize> = (0..s.len()).filter(|&i| t_star - s.t[i] <= 100.0 * d_last).collect();
    if idx.len() < MIN_TAIL_SAMPLES {
        return Err(Error::InsufficientTail(format!("{} tail samples", idx.len())));
    }
    Ok(idx)
}

fn witness(s: &Series, t_star: f64, exponent: f64) -> Result<Witness> {
    let idx = tail_indices(s, t_star)?;
    let mut best = (f64::INFINITY, 0.0);
    let mut xs = Vec::with_capacity(idx.len());
    let mut ys = Vec::with_capacity(idx.len());
    for &i in &idx {
        let d = t_star - s.t[i];
        let w = libm::sqrt(s.grad_sq[i]) * libm::pow(d, exponent);
        if w < best.0 {
            best = (w, s.t[i]);
        }
        if w > 0.0 {
            xs.push(libm::log(d));
            ys.push(libm::log(w));
        }
    }
    let trend = if xs.len() >= 2 { linear_fit(&xs, &ys).1 } else { f64::NAN };
    Ok(Witness { value: best.0, at_t: best.1, trend })
}

/// `min ‖∇u(t)‖ (T*-t)^{(1-s_c)/2}` over the tail.
pub fn check_lower_rate(s: &Series, t_star: f64, p: &PhysParams) -> Result<Witness> {
    witness(s, t_star, 0.5 * (1.0 - p.s_c))
}

/// `min (T*-t)^{1/(1+β)} ‖∇u(t)‖` over the tail.
pub fn check_liminf(s: &Series, t_star: f64, p: &PhysParams) -> Result<Witness> {
    witness(s, t_star, 1.0 / (1.0 + p.beta))
}

fn log_slope(s: &Series, t_star: f64) -> Result<(f64, f64, Vec<usize>)> {
    let idx = tail_indices(s, t_star)?;
    let l0 = s.lsigmac[0];
    let grown: Vec<usize> = idx.iter().copied().filter(|&i| s.lsigmac[i] > l0).collect();
    if grown.is_empty() {
        return Err(Error::NoGrowth);
    }
    let pts: Vec<(f64, f64)> = grown
        .iter()
        .filter_map(|&i| {
            let ll = libm::log(libm::log(t_star - s.t[i]).abs());
            ll.is_finite().then(|| (ll, libm::log(s.lsigmac[i])))
        })
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientTail(format!("{} tail samples above the initial norm", pts.len())));
    }
    let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    let (_, b, res) = linear_fit(&x, &y);
    Ok((b, res, idx))
}

fn interval(f: impl Fn(f64) -> Option<f64>, ts: TStar, t_last: f64, centre: f64) -> (f64, f64) {
    let mut lo = centre;
    let mut hi = centre;
    for t in [ts.t_star - ts.uncertainty, ts.t_star + ts.uncertainty] {
        if t > t_last {
            if let Some(v) = f(t) {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
    }
    (lo, hi)
}

/// Slope of `log ‖u‖_{L^{σ_c}}` against `log|log(T*-t)|` on the tail.
pub fn fit_log_lower(s: &Series, ts: TStar, p: &PhysParams) -> Result<LogFit> {
    let _ = p;
    let (gamma, residual, idx) = log_slope(s, ts.t_star)?;
    let t_last = *s.t.last().unwrap();
    let interval = interval(|t| log_slope(s, t).ok().map(|r| r.0), ts, t_last, gamma);
    let (a, b) = (idx[0], *idx.last().unwrap());
    let hsc_increasing = (s.hsc[a].is_finite() && s.hsc[b].is_finite()).then(|| s.hsc[b] > s.hsc[a]);
    Ok(LogFit { gamma, interval, residual, lsigmac_increasing: s.lsigmac[b] > s.lsigmac[a], hsc_increasing })
}

/// `(T* - t, g(t))` over the tail, and the truncation estimate included in `g`.
pub fn upper_integral_curve(s: &Series, t_star: f64) -> Result<(Vec<(f64, f64)>, f64)> {
    let idx = tail_indices(s, t_star)?;
    let n = s.len();
    let d_last = t_star - s.t[n - 1];
    if s.t.iter().filter(|&&t| t_star - t <= 10.0 * d_last).count() < 100 {
        return Err(Error::InsufficientTail("fewer than 100 samples in the last decade".to_string()));
    }
    // local exponent of ‖∇u‖² ~ (T*-t)^{-κ} near the end closes the integral
    let near: Vec<usize> = (0..n).filter(|&i| t_star - s.t[i] <= 10.0 * d_last).collect();
    let x: Vec<f64> = near.iter().map(|&i| libm::log(t_star - s.t[i])).collect();
    let y: Vec<f64> = near.iter().map(|&i| libm::log(s.grad_sq[i])).collect();
    let kappa = (-linear_fit(&x, &y).1).clamp(0.0, 1.9);
    let truncation = s.grad_sq[n - 1] * d_last * d_last / (2.0 - kappa);

    let mut g = alloc::vec![0.0; n];
    let mut acc = truncation;
    g[n - 1] = acc;
    for i in (0..n - 1).rev() {
        let f0 = (t_star - s.t[i]) * s.grad_sq[i];
        let f1 = (t_star - s.t[i + 1]) * s.grad_sq[i + 1];
        acc += 0.5 * (f0 + f1) * (s.t[i + 1] - s.t[i]);
        g[i] = acc;
    }
    Ok((idx.iter().map(|&i| (t_star - s.t[i], g[i])).collect(), truncation))
}

fn upper_slope(s: &Series, t_star: f64) -> Result<(f64, f64)> {
    let (curve, truncation) = upper_integral_curve(s, t_star)?;
    let x: Vec<f64> = curve.iter().map(|c| libm::log(c.0)).collect();
    let y: Vec<f64> = curve.iter().map(|c| libm::log(c.1)).collect();
    Ok((linear_fit(&x, &y).1, truncation))
}

/// Log-log slope of `g(t) = ∫_t^{T*} (T*-τ)‖∇u‖² dτ` against `T* - t`.
pub fn check_upper_integral(s: &Series, ts: TStar, p: &PhysParams) -> Result<UpperFit> {
    let (slope, truncation) = upper_slope(s, ts.t_star)?;
    let t_last = *s.t.last().unwrap();
    let interval = interval(|t| upper_slope(s, t).ok().map(|r| r.0), ts, t_last, slope);
    Ok(UpperFit { slope, interval, threshold: p.upper_exponent(), truncation })
}

/// `v(x) = λ^{(2-b)/(2σ)} u(λx)` with `λ = λ_u`, placed on the grid dilated
/// by `1/λ` so that no interpolation is needed; `‖∇v‖ = 1`.
pub fn renormalize_v(u: &RadialField, p: &PhysParams) -> Result<RadialField> {
    let gs = grad_norm_sq(u);
    if !(gs > 0.0) {
        return Err(Error::DegenerateField("zero gradient"));
    }
    let lam = p.lambda_from_grad_sq(gs);
    let g = u.grid().dilated(1.0 / lam);
    u.scaled(libm::pow(lam, p.alpha())).with_grid(g)
}

/// [`renormalize_v`] resampled onto `target`.
pub fn renormalize_v_onto(u: &RadialField, p: &PhysParams, target: &Arc<RadialGrid>) -> Result<RadialField> {
    let v = renormalize_v(u, p)?;
    if v.grid().rmax > target.rmax {
        let m = v.modulus_sq();
        let total = crate::grid::integrate(&m, v.grid())?;
        let lost = integrate_region(&m, v.grid(), target.rmax, v.grid().rmax)?;
        if total > 0.0 && lost / total > crate::params::RESAMPLE_LOSS_TOL {
            return Err(Error::ResampleOutOfRange { lost: lost / total });
        }
    }
    Ok(v.resample(target.clone()))
}

pub const DEFAULT_LADDER: [f64; 5] = [1.0, 2.0, 4.0, 8.0, 16.0];

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct PropositionRow {
    pub tau0: f64,
    pub lambda: f64,
    /// `∫_0^{τ₀} (τ₀-τ)‖∇u‖² dτ / τ₀^{1+s_c}`.
    pub dispersive_ratio: f64,
    /// `(D, λ^{-2s_c} ∫_{|x|<=Dλ} |u(τ₀)|²)`; NaN when `Dλ > rmax`.
    pub concentration: Vec<(f64, f64)>,
    /// `(A, ρ(u(τ₀), A √τ₀))`; NaN when the scale leaves the grid.
    pub rho: Vec<(f64, f64)>,
}

pub fn proposition_quantities(
    s: &Series,
    snapshots: &[(f64, RadialField)],
    p: &PhysParams,
    d_ladder: &[f64],
    a_ladder: &[f64],
) -> Result<Vec<PropositionRow>> {
    let usable: Vec<&(f64, RadialField)> = snapshots.iter().filter(|(t, _)| *t > 0.0).collect();
    if usable.is_empty() {
        return Err(Error::InsufficientSnapshots(format!("{} snapshots, none after t = 0", snapshots.len())));
    }
    let mut rows = Vec::with_capacity(usable.len());
    for (tau0, u) in usable {
        let tau0 = *tau0;
        if tau0 > *s.t.last().unwrap_or(&0.0) * (1.0 + 1e-12) {
            return Err(Error::InsufficientSnapshots(format!("snapshot at {tau0} lies beyond the series")));
        }
        let mut integral = 0.0;
        for i in 1..s.len() {
            let (a, b) = (s.t[i - 1], s.t[i].min(tau0));
            if a >= tau0 {
                break;
            }
            integral += 0.5 * ((tau0 - a) * s.grad_sq[i - 1] + (tau0 - b) * s.grad_sq[i]) * (b - a);
        }
        let dispersive_ratio = integral / libm::pow(tau0, 1.0 + p.s_c);
        let g = u.grid();
        let gs = grad_norm_sq(u);
        let lambda = if gs > 0.0 { p.lambda_from_grad_sq(gs) } else { f64::INFINITY };
        let m = u.modulus_sq();
        let concentration = d_ladder
            .iter()
            .map(|&d| {
                let v = if gs == 0.0 {
                    0.0
                } else if d * lambda > g.rmax {
                    f64::NAN
                } else {
                    integrate_region(&m, g, 0.0, d * lambda).unwrap_or(f64::NAN) * libm::pow(lambda, -2.0 * p.s_c)
                };
                (d, v)
            })
            .collect();
        let rho = a_ladder.iter().map(|&a| (a, rho_seminorm(u, p, a * libm::sqrt(tau0)).unwrap_or(f64::NAN))).collect();
        rows.push(PropositionRow { tau0, lambda, dispersive_ratio, concentration, rho });
    }
    Ok(rows)
}

/// Everything [`analyze`] could establish; failed sub-checks leave `None`
/// and a note.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct BlowupReport {
    pub t_star: TStar,
    pub rate_lower: Option<Witness>,
    pub log_lower: Option<LogFit>,
    pub lsigmac_grew: bool,
    pub upper: Option<UpperFit>,
    pub liminf: Option<Witness>,
    pub propositions: Vec<PropositionRow>,
    pub notes: Vec<String>,
}

impl BlowupReport {
    pub fn rate_lower_const(&self) -> Option<f64> {
        self.rate_lower.map(|w| w.value)
    }
    pub fn gamma_fit(&self) -> Option<f64> {
        self.log_lower.map(|f| f.gamma)
    }
    pub fn upper_slope(&self) -> Option<f64> {
        self.upper.map(|f| f.slope)
    }
    pub fn liminf_witness(&self) -> Option<f64> {
        self.liminf.map(|w| w.value)
    }
}

pub fn analyze(s: &Series, snapshots: &[(f64, RadialField)], p: &PhysParams) -> Result<BlowupReport> {
    let ts = estimate_tstar(s, p)?;
    let mut notes = Vec::new();
    fn keep<T>(notes: &mut Vec<String>, name: &str, r: Result<T>) -> Option<T> {
        r.map_err(|e| notes.push(format!("{name}: {e}"))).ok()
    }
    let rate_lower = keep(&mut notes, "rate_lower", check_lower_rate(s, ts.t_star, p));
    let log_lower = keep(&mut notes, "log_lower", fit_log_lower(s, ts, p));
    let upper = keep(&mut notes, "upper", check_upper_integral(s, ts, p));
    let liminf = keep(&mut notes, "liminf", check_liminf(s, ts.t_star, p));
    let propositions =
        keep(&mut notes, "propositions", proposition_quantities(s, snapshots, p, &DEFAULT_LADDER, &DEFAULT_LADDER))
            .unwrap_or_default();
    let lsigmac_grew = s.lsigmac.last().zip(s.lsigmac.first()).is_some_and(|(a, b)| a > b);
    Ok(BlowupReport { t_star: ts, rate_lower, log_lower, lsigmac_grew, upper, liminf, propositions, notes })
}
