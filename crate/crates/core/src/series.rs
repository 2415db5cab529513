//! Sampled observables: time series, sweep results and peak analysis.

use serde::{Deserialize, Serialize};

/// A named real-valued channel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    pub name: String,
    pub values: Vec<f64>,
}

/// Observables sampled on a strictly increasing time grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub time_unit: String,
    pub times: Vec<f64>,
    pub channels: Vec<Channel>,
    pub warnings: Vec<String>,
}

impl TimeSeries {
    pub fn new(time_unit: impl Into<String>, times: Vec<f64>) -> Self {
        Self { time_unit: time_unit.into(), times, channels: Vec::new(), warnings: Vec::new() }
    }

    pub fn push(&mut self, name: impl Into<String>, values: Vec<f64>) {
        assert_eq!(values.len(), self.times.len(), "channel length must match the time grid");
        self.channels.push(Channel { name: name.into(), values });
    }

    pub fn channel(&self, name: &str) -> Option<&[f64]> {
        self.channels.iter().find(|c| c.name == name).map(|c| c.values.as_slice())
    }

    /// Largest absolute difference between same-named channels.
    pub fn max_deviation(&self, other: &TimeSeries) -> f64 {
        self.channels
            .iter()
            .filter_map(|c| other.channel(&c.name).map(|o| (c, o)))
            .flat_map(|(c, o)| c.values.iter().zip(o).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max)
    }
}

/// Scalars over a one-dimensional parameter grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axis_name: String,
    pub axis: Vec<f64>,
    pub columns: Vec<Channel>,
    /// Notices about skipped or non-converged points.
    pub flags: Vec<String>,
}

impl SweepResult {
    pub fn new(axis_name: impl Into<String>) -> Self {
        Self { axis_name: axis_name.into(), axis: Vec::new(), columns: Vec::new(), flags: Vec::new() }
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns.iter().find(|c| c.name == name).map(|c| c.values.as_slice())
    }

    pub fn push_column(&mut self, name: impl Into<String>, values: Vec<f64>) {
        assert_eq!(values.len(), self.axis.len(), "column length must match the axis");
        self.columns.push(Channel { name: name.into(), values });
    }
}

/// Indices of local maxima with value above `threshold`. A plateau counts once,
/// at its first point.
pub fn local_maxima(values: &[f64], threshold: f64) -> Vec<usize> {
    let n = values.len();
    let mut out = Vec::new();
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[j + 1] == values[i] {
            j += 1;
        }
        let left_ok = i == 0 || values[i - 1] < values[i];
        let right_ok = j + 1 == n || values[j + 1] < values[i];
        if left_ok && right_ok && values[i] > threshold && n > 1 {
            out.push(i);
        }
        i = j + 1;
    }
    out
}

/// Full width at half maximum around `peak`, relative to a zero baseline, by
/// linear interpolation. `None` if the curve never drops below half height on
/// one side.
pub fn fwhm(axis: &[f64], values: &[f64], peak: usize) -> Option<f64> {
    let half = 0.5 * values[peak];
    let cross = |i: usize, j: usize| -> f64 {
        // between i (above half) and j (below half)
        let (xa, xb, ya, yb) = (axis[i], axis[j], values[i], values[j]);
        xa + (half - ya) * (xb - xa) / (yb - ya)
    };
    let mut left = None;
    for i in (0..peak).rev() {
        if values[i] < half {
            left = Some(cross(i + 1, i));
            break;
        }
    }
    let mut right = None;
    for i in (peak + 1)..values.len() {
        if values[i] < half {
            right = Some(cross(i - 1, i));
            break;
        }
    }
    Some(right? - left?)
}

/// Local grid spacing at index `i` (the larger of the two neighbouring gaps).
pub fn local_step(axis: &[f64], i: usize) -> f64 {
    let left = if i > 0 { axis[i] - axis[i - 1] } else { 0.0 };
    let right = if i + 1 < axis.len() { axis[i + 1] - axis[i] } else { 0.0 };
    left.max(right)
}

/// Uniform grid `lo, lo + step, …` up to `hi` (inclusive within round-off).
pub fn linspace_step(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=n).map(|k| lo + k as f64 * step).collect()
}

/// Coarse grid over `[lo, hi]` merged with fine grids centred on each of
/// `centers` (each extending `half_width` to either side).
pub fn refined_grid(lo: f64, hi: f64, coarse: f64, fine: f64, centers: &[(f64, f64)]) -> Vec<f64> {
    let mut pts = linspace_step(lo, hi, coarse);
    for &(c, half_width) in centers {
        let k = (half_width / fine).floor() as i64;
        for j in -k..=k {
            let x = c + j as f64 * fine;
            if x >= lo - 1e-12 && x <= hi + 1e-12 {
                pts.push(x);
            }
        }
    }
    pts.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(pts.len());
    for x in pts {
        match out.last() {
            // keep centre points (pushed exactly) over nearby coarse ones
            Some(&last) if x - last < 0.25 * fine => {
                let is_center = centers.iter().any(|&(c, _)| c == x);
                if is_center {
                    *out.last_mut().unwrap() = x;
                }
            }
            _ => out.push(x),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn maxima_detection() {
        let v = [0.0, 1.0, 0.5, 0.7, 0.7, 0.2, 0.9];
        assert_eq!(local_maxima(&v, 0.0), vec![1, 3, 6]);
        assert_eq!(local_maxima(&v, 0.8), vec![1, 6]);
        assert!(local_maxima(&[0.3], 0.0).is_empty());
    }

    #[test]
    fn lorentzian_fwhm() {
        let x = linspace_step(-5.0, 5.0, 0.001);
        let w: f64 = 0.8;
        let y: Vec<f64> = x.iter().map(|&x| 1.0 / (1.0 + (2.0 * x / w).powi(2))).collect();
        let peak = local_maxima(&y, 0.5)[0];
        assert!((fwhm(&x, &y, peak).unwrap() - w).abs() < 1e-5);
        assert!(fwhm(&x[..peak + 10], &y[..peak + 10], peak).is_none());
    }

    #[test]
    fn refined_grid_contains_centres() {
        let g = refined_grid(0.3, 2.5, 0.01, 0.002, &[(2.0 / 3.0, 0.02), (0.4, 0.02)]);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert!(g.contains(&(2.0 / 3.0)));
        assert!(g.contains(&0.4));
        assert!((g[0] - 0.3).abs() < 1e-15 && (g.last().unwrap() - 2.5).abs() < 1e-12);
        let i = g.iter().position(|&x| x == 0.4).unwrap();
        assert!(local_step(&g, i) <= 0.002 + 1e-12);
    }

    #[test]
    fn series_deviation() {
        let mut a = TimeSeries::new("1/omega0", vec![0.0, 1.0]);
        a.push("P", vec![0.1, 0.2]);
        let mut b = a.clone();
        b.channels[0].values[1] = 0.25;
        assert!((a.max_deviation(&b) - 0.05).abs() < 1e-15);
        assert!(a.channel("Q").is_none());
    }
}
