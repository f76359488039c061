//! Trace-distance series and the non-Markovianity number of a trajectory pair.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::Trajectory;
use crate::quantum::{trace_distance_general, trace_distance_two_level, QuantumError};

/// Default increment threshold, per μs.
pub const DEFAULT_EPSILON: f64 = 1e-8;
/// Default revival prominence.
pub const DEFAULT_PROMINENCE: f64 = 1e-3;

const GRID_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error("trajectories have different time grids ({0})")]
    GridMismatch(String),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceSeries {
    pub times: Vec<f64>,
    /// Trace distance of the reduced dimer states.
    pub d_system: Vec<f64>,
    /// Trace distance of the full states.
    pub d_full: Vec<f64>,
    /// `d D_S / dt`, 1/μs.
    pub sigma_system: Vec<f64>,
}

/// Central differences, one-sided at the ends.
pub fn finite_difference(times: &[f64], values: &[f64]) -> Vec<f64> {
    let n = values.len();
    if n < 2 {
        return vec![0.0; n];
    }
    (0..n)
        .map(|k| {
            let (lo, hi) = match k {
                0 => (0, 1),
                k if k == n - 1 => (n - 2, n - 1),
                k => (k - 1, k + 1),
            };
            (values[hi] - values[lo]) / (times[hi] - times[lo])
        })
        .collect()
}

pub fn distance_series(a: &Trajectory, b: &Trajectory) -> Result<DistanceSeries, MeasureError> {
    if a.len() != b.len() {
        return Err(MeasureError::GridMismatch(format!("{} vs {} samples", a.len(), b.len())));
    }
    if let Some((ta, tb)) = a.times.iter().zip(&b.times).find(|(ta, tb)| (*ta - *tb).abs() > GRID_TOL) {
        return Err(MeasureError::GridMismatch(format!("t = {ta} vs {tb}")));
    }
    let d_system = a
        .reduced_states
        .iter()
        .zip(&b.reduced_states)
        .map(|(p, q)| trace_distance_two_level(p, q))
        .collect::<Result<Vec<_>, _>>()?;
    let d_full = a
        .full_states
        .iter()
        .zip(&b.full_states)
        .map(|(p, q)| trace_distance_general(p, q))
        .collect::<Result<Vec<_>, _>>()?;
    let sigma_system = finite_difference(&a.times, &d_system);
    Ok(DistanceSeries { times: a.times.clone(), d_system, d_full, sigma_system })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NmResult {
    /// Accumulated growth of `D_S`.
    pub n: f64,
    /// Maximal runs of qualifying increments, `(t_start, t_end)` in μs.
    pub positive_intervals: Vec<(f64, f64)>,
    pub grid_spacing: f64,
    pub epsilon: f64,
}

/// Sum of the positive grid increments of `D_S`.
///
/// An increment over `[t_k, t_{k+1}]` counts only if it exceeds
/// `epsilon · (t_{k+1} − t_k)`, which keeps integrator round-off out of `N`.
pub fn non_markovianity(ds: &DistanceSeries, epsilon: f64) -> NmResult {
    let t = &ds.times;
    let d = &ds.d_system;
    let grid_spacing = if t.len() > 1 { t[1] - t[0] } else { 0.0 };
    let mut n = 0.0;
    let mut positive_intervals: Vec<(f64, f64)> = Vec::new();
    let mut open = false;
    for k in 0..d.len().saturating_sub(1) {
        let inc = d[k + 1] - d[k];
        if inc > epsilon * (t[k + 1] - t[k]) {
            n += inc;
            match positive_intervals.last_mut() {
                Some(last) if open => last.1 = t[k + 1],
                _ => positive_intervals.push((t[k], t[k + 1])),
            }
            open = true;
        } else {
            open = false;
        }
    }
    NmResult { n, positive_intervals, grid_spacing, epsilon }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Revival {
    pub time: f64,
    pub value: f64,
    pub prominence: f64,
}

fn smooth3(series: &[f64]) -> Vec<f64> {
    let n = series.len();
    (0..n)
        .map(|k| {
            let lo = k.saturating_sub(1);
            let hi = (k + 1).min(n - 1);
            series[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect()
}

/// Topographic prominence of the maximum at `k`.
fn prominence(s: &[f64], k: usize) -> f64 {
    let peak = s[k];
    let mut left_min = peak;
    for &v in s[..k].iter().rev() {
        if v > peak {
            break;
        }
        left_min = left_min.min(v);
    }
    let mut right_min = peak;
    for &v in &s[k + 1..] {
        if v > peak {
            break;
        }
        right_min = right_min.min(v);
    }
    peak - left_min.max(right_min)
}

/// Interior strict local maxima of the 3-sample moving average of `series`,
/// keeping those with prominence at least `min_prominence`.
pub fn smoothed_maxima(times: &[f64], series: &[f64], min_prominence: f64) -> Vec<Revival> {
    if series.len() < 3 {
        return Vec::new();
    }
    let s = smooth3(series);
    (1..s.len() - 1)
        .filter(|&k| s[k] > s[k - 1] && s[k] > s[k + 1])
        .map(|k| Revival { time: times[k], value: s[k], prominence: prominence(&s, k) })
        .filter(|r| r.prominence >= min_prominence)
        .collect()
}

/// Peaks of an oscillating series, refined by a parabola through the three
/// samples around each discrete maximum.
pub fn oscillation_peaks(times: &[f64], series: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut pt = Vec::new();
    let mut pv = Vec::new();
    for k in 1..series.len().saturating_sub(1) {
        let (a, b, c) = (series[k - 1], series[k], series[k + 1]);
        if !(b > a && b >= c) {
            continue;
        }
        let curvature = a - 2.0 * b + c;
        let h = 0.5 * (times[k + 1] - times[k - 1]);
        let (offset, value) = if curvature < 0.0 {
            let x = 0.5 * (a - c) / curvature;
            (x * h, b - 0.25 * (a - c) * x)
        } else {
            (0.0, b)
        };
        pt.push(times[k] + offset);
        pv.push(value);
    }
    (pt, pv)
}

/// Revivals of a damped population oscillation: local maxima of the envelope
/// traced by successive oscillation peaks.
///
/// Every half-period of a coherent oscillation is a local maximum of the raw
/// series; a revival is the envelope itself turning back up, which is what
/// this reports.
pub fn detect_revivals(times: &[f64], series: &[f64], min_prominence: f64) -> Vec<Revival> {
    let (pt, pv) = oscillation_peaks(times, series);
    smoothed_maxima(&pt, &pv, min_prominence)
}

/// Mean over the last tenth of the window (at least one sample).
pub fn steady_value(series: &[f64]) -> f64 {
    if series.is_empty() {
        return f64::NAN;
    }
    let tail = (series.len() / 10).max(1);
    series[series.len() - tail..].iter().sum::<f64>() / tail as f64
}

/// First time after which `|x − steady|` stays within half its initial
/// value; `None` if that never happens inside the window.
pub fn dephasing_half_life(times: &[f64], series: &[f64]) -> Option<f64> {
    let steady = steady_value(series);
    let initial = (series.first()? - steady).abs();
    let half = 0.5 * initial;
    let mut answer = None;
    for (k, &v) in series.iter().enumerate().rev() {
        if (v - steady).abs() > half {
            return if k + 1 < series.len() { answer } else { None };
        }
        answer = Some(times[k]);
    }
    answer
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn series(d: Vec<f64>) -> DistanceSeries {
        let times: Vec<f64> = (0..d.len()).map(|k| 0.01 * k as f64).collect();
        let sigma = finite_difference(&times, &d);
        DistanceSeries { times, d_full: d.clone(), d_system: d, sigma_system: sigma }
    }

    #[test]
    fn decreasing_series_is_markovian() {
        let ds = series((0..100).map(|k| (-0.05 * k as f64).exp()).collect());
        let r = non_markovianity(&ds, DEFAULT_EPSILON);
        assert_eq!(r.n, 0.0);
        assert!(r.positive_intervals.is_empty());
    }

    #[test]
    fn increments_and_intervals() {
        let ds = series(vec![1.0, 0.5, 0.6, 0.8, 0.4, 0.45, 0.2]);
        let r = non_markovianity(&ds, DEFAULT_EPSILON);
        assert!((r.n - 0.35).abs() < 1e-12);
        assert_eq!(r.positive_intervals.len(), 2);
        assert!((r.positive_intervals[0].0 - 0.01).abs() < 1e-12);
        assert!((r.positive_intervals[0].1 - 0.03).abs() < 1e-12);
        assert!((r.positive_intervals[1].0 - 0.04).abs() < 1e-12);
        assert!((r.positive_intervals[1].1 - 0.05).abs() < 1e-12);
    }

    #[test]
    fn round_off_increments_ignored() {
        let ds = series(vec![1.0, 1.0 + 1e-12, 1.0, 1.0 + 2e-12]);
        assert_eq!(non_markovianity(&ds, DEFAULT_EPSILON).n, 0.0);
    }

    #[test]
    fn central_differences() {
        let t = [0.0, 1.0, 2.0, 3.0];
        let x = [0.0, 1.0, 4.0, 9.0];
        assert_eq!(finite_difference(&t, &x), vec![1.0, 2.0, 4.0, 5.0]);
        assert_eq!(finite_difference(&[0.0], &[3.0]), vec![0.0]);
    }

    #[test]
    fn single_maximum_of_cos_squared() {
        let n = 629;
        let t: Vec<f64> = (0..n).map(|k| k as f64 * 0.01).collect();
        let y: Vec<f64> = t.iter().map(|t| t.cos().powi(2)).collect();
        let r = smoothed_maxima(&t, &y, DEFAULT_PROMINENCE);
        assert_eq!(r.len(), 1);
        assert!((r[0].time - std::f64::consts::PI).abs() < 0.02);
        assert!(r[0].prominence > 0.9);
    }

    #[test]
    fn monotone_has_no_revival() {
        let t: Vec<f64> = (0..100).map(|k| k as f64).collect();
        let y: Vec<f64> = t.iter().map(|t| -t).collect();
        assert!(smoothed_maxima(&t, &y, DEFAULT_PROMINENCE).is_empty());
        assert!(smoothed_maxima(&t[..2], &y[..2], 0.0).is_empty());
    }

    #[test]
    fn small_bumps_filtered_by_prominence() {
        let t: Vec<f64> = (0..200).map(|k| k as f64 * 0.05).collect();
        let y: Vec<f64> = t.iter().map(|t| -0.1 * t + 1e-4 * (20.0 * t).sin()).collect();
        assert!(smoothed_maxima(&t, &y, DEFAULT_PROMINENCE).is_empty());
    }

    #[test]
    fn envelope_revival() {
        // Fast oscillation whose amplitude dips and recovers around t = 2.
        let t: Vec<f64> = (0..=500).map(|k| k as f64 * 0.01).collect();
        let amp = |t: f64| 0.5 * (-0.5 * t).exp() + 0.2 * (-(t - 2.0f64).powi(2) / 0.1).exp();
        let y: Vec<f64> = t.iter().map(|&t| 0.5 + amp(t) * (2.0 * std::f64::consts::PI * 5.0 * t).cos()).collect();
        let revivals = detect_revivals(&t, &y, DEFAULT_PROMINENCE);
        assert_eq!(revivals.len(), 1);
        assert!((revivals[0].time - 2.0).abs() < 0.25);

        let y: Vec<f64> =
            t.iter().map(|&t| 0.5 + 0.5 * (-0.5 * t).exp() * (2.0 * std::f64::consts::PI * 5.0 * t).cos()).collect();
        assert!(detect_revivals(&t, &y, DEFAULT_PROMINENCE).is_empty());
    }

    #[test]
    fn parabolic_peak_refinement() {
        let t: Vec<f64> = (0..50).map(|k| k as f64 * 0.1).collect();
        let y: Vec<f64> = t.iter().map(|t| -(t - 2.33f64).powi(2)).collect();
        let (pt, pv) = oscillation_peaks(&t, &y);
        assert_eq!(pt.len(), 1);
        assert!((pt[0] - 2.33).abs() < 1e-9);
        assert!(pv[0].abs() < 1e-9);
    }

    #[test]
    fn half_life_of_exponential() {
        let t: Vec<f64> = (0..=2000).map(|k| k as f64 * 0.01).collect();
        let y: Vec<f64> = t.iter().map(|t| 0.3 + 0.7 * (-t).exp()).collect();
        let h = dephasing_half_life(&t, &y).unwrap();
        assert!((h - std::f64::consts::LN_2).abs() < 0.02);
    }

    proptest! {
        #[test]
        fn increments_decompose_total_change(d in prop::collection::vec(0.0..1.0f64, 2..200)) {
            let ds = series(d.clone());
            let r = non_markovianity(&ds, 0.0);
            let neg: f64 = d.windows(2).map(|w| (w[0] - w[1]).max(0.0)).sum();
            prop_assert!(r.n >= 0.0);
            prop_assert!((r.n - neg - (d[d.len() - 1] - d[0])).abs() < 1e-12);
        }
    }
}
