use super::SimPoint;

/// Two-sided 95% normal quantile.
const Z_95: f64 = 1.959_963_984_540_054;

/// Default BLER at which curves are compared.
pub const TARGET_BLER: f64 = 0.1;

/// Wilson score interval for `errors` failures out of `total` trials.
pub fn wilson_interval(errors: usize, total: usize) -> (f64, f64) {
    if total == 0 {
        return (0.0, 1.0);
    }
    let n = total as f64;
    let p = errors as f64 / n;
    let z2 = Z_95 * Z_95;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z_95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if errors == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if errors == total { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

/// Outcome of comparing two curves at a target BLER.
#[derive(Debug, Clone, PartialEq)]
pub enum SnrDifference {
    Defined(f64),
    Undefined(String),
}

impl SnrDifference {
    pub fn value(&self) -> Option<f64> {
        match self {
            SnrDifference::Defined(v) => Some(*v),
            SnrDifference::Undefined(_) => None,
        }
    }
}

impl std::fmt::Display for SnrDifference {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SnrDifference::Defined(v) => write!(f, "{v:+.2} dB"),
            SnrDifference::Undefined(why) => write!(f, "undefined ({why})"),
        }
    }
}

// zero observed errors still means "below 1/total", not zero
fn log_bler(p: &SimPoint) -> f64 {
    p.bler().max(0.5 / p.tb_total.max(1) as f64).log10()
}

/// TX-SNR where the curve falls through `target`, interpolated linearly in
/// dB against log10 BLER between the last point at or above the target and
/// the point after it.
pub fn snr_at_target(curve: &[SimPoint], target: f64) -> Result<f64, String> {
    let first = curve.first().ok_or("empty curve")?;
    if first.bler() < target {
        return Err(format!("already below {target} at {} dB", first.tx_snr_db));
    }
    let i = curve.iter().rposition(|p| p.bler() >= target).expect("first point qualifies");
    let Some(next) = curve.get(i + 1) else {
        return Err(format!("does not reach {target} by {} dB", curve[i].tx_snr_db));
    };
    let (a, b) = (&curve[i], next);
    let (la, lb, lt) = (log_bler(a), log_bler(b), target.log10());
    if la == lb {
        return Ok(a.tx_snr_db);
    }
    Ok(a.tx_snr_db + (b.tx_snr_db - a.tx_snr_db) * (la - lt) / (la - lb))
}

/// Extra TX-SNR `curve` needs over `baseline` to reach `target`.
pub fn snr_difference(curve: &[SimPoint], baseline: &[SimPoint], target: f64) -> SnrDifference {
    match (snr_at_target(curve, target), snr_at_target(baseline, target)) {
        (Ok(c), Ok(b)) => SnrDifference::Defined(c - b),
        (Err(e), _) => SnrDifference::Undefined(format!("curve {e}")),
        (_, Err(e)) => SnrDifference::Undefined(format!("baseline {e}")),
    }
}

/// A labelled BLER curve with its crossing and its distance to a baseline.
#[derive(Debug, Clone)]
pub struct CurveSummary {
    pub label: String,
    pub points: Vec<SimPoint>,
    pub target_bler: f64,
    pub snr_at_target: Result<f64, String>,
    pub snr_difference: Option<SnrDifference>,
}

impl CurveSummary {
    pub fn new(label: impl Into<String>, points: Vec<SimPoint>, baseline: Option<&[SimPoint]>, target: f64) -> Self {
        Self {
            label: label.into(),
            snr_at_target: snr_at_target(&points, target),
            snr_difference: baseline.map(|b| snr_difference(&points, b, target)),
            points,
            target_bler: target,
        }
    }
}
