use serde::{Deserialize, Serialize};

use super::{MetricsError, PhaseSeries};

/// Which deviation a curve holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeviationKind {
    OverlappingAdev,
    Adev,
    Mdev,
    Tdev,
}

/// A τ that could not be evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmittedTau {
    pub tau: f64,
    pub reason: String,
}

/// Deviation versus averaging time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationCurve {
    pub kind: DeviationKind,
    pub taus: Vec<f64>,
    /// Dimensionless for ADEV/MDEV, seconds for TDEV.
    pub values: Vec<f64>,
    /// Number of squared terms averaged at each τ.
    pub n_terms: Vec<usize>,
    pub omitted: Vec<OmittedTau>,
    /// Measurement bandwidth of the input series, Hz, if known.
    pub bandwidth: Option<f64>,
}

impl DeviationCurve {
    fn empty(kind: DeviationKind, x: &PhaseSeries) -> Self {
        Self {
            kind,
            taus: Vec::new(),
            values: Vec::new(),
            n_terms: Vec::new(),
            omitted: Vec::new(),
            bandwidth: x.bandwidth(),
        }
    }

    /// Value at `tau` if it was evaluated.
    pub fn at(&self, tau: f64) -> Option<f64> {
        self.taus.iter().position(|&t| t == tau).map(|i| self.values[i])
    }
}

/// Octave-spaced averaging times `τ0·2^k` for which `span_factor·m < n`.
pub fn octave_taus(tau0: f64, n: usize, span_factor: usize) -> Vec<f64> {
    let mut out = Vec::new();
    let mut m = 1usize;
    while span_factor * m < n {
        out.push(m as f64 * tau0);
        m *= 2;
    }
    out
}

fn averaging_factor(x: &PhaseSeries, tau: f64) -> Result<usize, String> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(format!("tau must be positive, got {tau}"));
    }
    let r = tau / x.tau0();
    let m = r.round();
    if m < 1.0 || (r - m).abs() > 1e-9 * m {
        return Err(format!("tau {tau:e} is not a whole multiple of tau0 {:e}", x.tau0()));
    }
    Ok(m as usize)
}

/// Second differences `x[i+2m] − 2x[i+m] + x[i]` with their validity.
fn second_differences(x: &PhaseSeries, m: usize) -> (Vec<f64>, Vec<bool>) {
    let v = x.values();
    let gap = x.missing();
    let n = v.len() - 2 * m;
    let mut d = Vec::with_capacity(n);
    let mut ok = Vec::with_capacity(n);
    for i in 0..n {
        let good = !(gap[i] || gap[i + m] || gap[i + 2 * m]);
        ok.push(good);
        d.push(if good { v[i + 2 * m] - 2.0 * v[i + m] + v[i] } else { 0.0 });
    }
    (d, ok)
}

fn allan(x: &PhaseSeries, taus: &[f64], stride_is_m: bool) -> Result<DeviationCurve, MetricsError> {
    x.check_usable()?;
    let kind = if stride_is_m { DeviationKind::Adev } else { DeviationKind::OverlappingAdev };
    let mut curve = DeviationCurve::empty(kind, x);
    for &tau in taus {
        let m = match averaging_factor(x, tau) {
            Ok(m) => m,
            Err(reason) => {
                curve.omitted.push(OmittedTau { tau, reason });
                continue;
            }
        };
        if 2 * m >= x.len() {
            curve.omitted.push(OmittedTau { tau, reason: format!("needs more than {} samples", 2 * m) });
            continue;
        }
        let (d, ok) = second_differences(x, m);
        let stride = if stride_is_m { m } else { 1 };
        let (mut sum, mut count) = (0.0, 0usize);
        for i in (0..d.len()).step_by(stride) {
            if ok[i] {
                sum += d[i] * d[i];
                count += 1;
            }
        }
        if count == 0 {
            curve.omitted.push(OmittedTau { tau, reason: "no complete terms".into() });
            continue;
        }
        curve.taus.push(tau);
        curve.values.push((sum / (2.0 * tau * tau * count as f64)).sqrt());
        curve.n_terms.push(count);
    }
    Ok(curve)
}

/// Overlapping Allan deviation
/// `σ_y(τ) = √( Σ (x[i+2m] − 2x[i+m] + x[i])² / (2τ²(N−2m)) )`.
pub fn overlapping_adev(x: &PhaseSeries, taus: &[f64]) -> Result<DeviationCurve, MetricsError> {
    allan(x, taus, false)
}

/// Non-overlapping Allan deviation (second differences at stride `m`).
pub fn adev(x: &PhaseSeries, taus: &[f64]) -> Result<DeviationCurve, MetricsError> {
    allan(x, taus, true)
}

// The running window sum is rebuilt from scratch this often to stop rounding
// drift.
const RESUM_INTERVAL: usize = 1024;

/// Modified Allan deviation
/// `Mod σ_y(τ) = √( Σ_j (Σ_{i=j}^{j+m−1} (x[i+2m] − 2x[i+m] + x[i]))² / (2m²τ²(N−3m+1)) )`.
pub fn mdev(x: &PhaseSeries, taus: &[f64]) -> Result<DeviationCurve, MetricsError> {
    x.check_usable()?;
    let mut curve = DeviationCurve::empty(DeviationKind::Mdev, x);
    for &tau in taus {
        let m = match averaging_factor(x, tau) {
            Ok(m) => m,
            Err(reason) => {
                curve.omitted.push(OmittedTau { tau, reason });
                continue;
            }
        };
        if 3 * m >= x.len() {
            curve.omitted.push(OmittedTau { tau, reason: format!("needs more than {} samples", 3 * m) });
            continue;
        }
        let (d, ok) = second_differences(x, m);
        let windows = x.len() - 3 * m + 1;
        let (mut sum, mut count) = (0.0, 0usize);
        let mut window = 0.0;
        let mut bad = 0usize;
        for j in 0..windows {
            if j % RESUM_INTERVAL == 0 {
                window = d[j..j + m].iter().sum();
                bad = ok[j..j + m].iter().filter(|&&g| !g).count();
            } else {
                window += d[j + m - 1] - d[j - 1];
                bad += usize::from(!ok[j + m - 1]);
                bad -= usize::from(!ok[j - 1]);
            }
            if bad == 0 {
                sum += window * window;
                count += 1;
            }
        }
        if count == 0 {
            curve.omitted.push(OmittedTau { tau, reason: "no complete terms".into() });
            continue;
        }
        let mf = m as f64;
        curve.taus.push(tau);
        curve.values.push((sum / (2.0 * mf * mf * tau * tau * count as f64)).sqrt());
        curve.n_terms.push(count);
    }
    Ok(curve)
}

/// Time deviation `TDEV(τ) = τ·MDEV(τ)/√3`, seconds.
pub fn tdev(x: &PhaseSeries, taus: &[f64]) -> Result<DeviationCurve, MetricsError> {
    Ok(tdev_from_mdev(&mdev(x, taus)?))
}

/// Converts an MDEV curve to TDEV.
pub fn tdev_from_mdev(mdev: &DeviationCurve) -> DeviationCurve {
    let values = mdev.taus.iter().zip(&mdev.values).map(|(&t, &v)| t * v / 3f64.sqrt()).collect();
    DeviationCurve { kind: DeviationKind::Tdev, values, ..mdev.clone() }
}
