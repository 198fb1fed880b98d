//! Losses, Monte-Carlo consistency estimates, run aggregation with Student-t
//! confidence intervals, prompt sensitivity and the negativity matrix.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

use crate::codec::{round_for_polarity, ScaledOpinion};
use crate::dynamics::Trajectory;
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("no valid updates to average")]
    NoValidUpdates,
    #[error("nothing to aggregate")]
    NoRuns,
    #[error("reports differ beyond the prompt variant: {0}")]
    ConfigMismatch(String),
    #[error("need at least two points to fit a line")]
    TooFewPoints,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    Distance,
    Polarity,
}

/// Loss between the reference value `f` and the candidate value `h`, both on
/// the `[-5, 5]` scale.
pub fn loss<T: Scalar>(kind: LossKind, f: T, h: i8) -> T {
    match kind {
        LossKind::Distance => (f - T::from_f64_lossy(f64::from(h))).abs(),
        LossKind::Polarity => {
            if round_for_polarity(f) != h.signum() {
                T::one()
            } else {
                T::zero()
            }
        }
    }
}

/// What the candidate produced for one update slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "status", content = "value")]
pub enum CandidateOutput {
    Valid(ScaledOpinion),
    Bypassed,
    Invalid,
}

/// One update slot: reference value `5 x_i(t+1)` and the candidate's answer
/// given `x(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoredUpdate {
    pub epoch: usize,
    pub agent: usize,
    pub reference: f64,
    pub output: CandidateOutput,
}

/// Pairs every transition of `trajectory` with a candidate answer. Slots the
/// reference bypassed are recorded as bypassed without consulting
/// `candidate`.
pub fn score_trajectory<T: Scalar>(
    trajectory: &Trajectory<T>,
    mut candidate: impl FnMut(usize, usize) -> CandidateOutput,
) -> Vec<ScoredUpdate> {
    let five = T::from_f64_lossy(5.0);
    let mut out = Vec::new();
    for t in 0..trajectory.epochs() {
        let next = &trajectory.states()[t + 1];
        for (i, &bypassed) in trajectory.bypassed(t).iter().enumerate() {
            let output = if bypassed {
                CandidateOutput::Bypassed
            } else {
                candidate(t, i)
            };
            out.push(ScoredUpdate {
                epoch: t,
                agent: i,
                reference: (next.values()[i] * five).as_f64(),
                output,
            });
        }
    }
    out
}

/// Per-run estimate. Rates are percentages of valid updates, except
/// `invalid_pct` which is a share of the non-bypassed slots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub distance: f64,
    pub polarity_pct: f64,
    pub zero_pct: f64,
    /// `None` when every valid update answered 0.
    pub filtered_polarity_pct: Option<f64>,
    pub invalid_pct: f64,
    pub updates: usize,
    pub valid: usize,
    pub bypassed: usize,
    pub invalid: usize,
}

impl RunMetrics {
    pub fn value(&self, kind: LossKind) -> f64 {
        match kind {
            LossKind::Distance => self.distance,
            LossKind::Polarity => self.polarity_pct,
        }
    }
}

/// Pools every valid update of a run into one estimate.
pub fn estimate_consistency(updates: &[ScoredUpdate]) -> Result<RunMetrics, EvalError> {
    let (mut valid, mut bypassed, mut invalid) = (0usize, 0usize, 0usize);
    let (mut distance, mut polarity, mut zeros, mut nonzero_polarity) = (0.0, 0.0, 0usize, 0.0);
    for u in updates {
        match u.output {
            CandidateOutput::Bypassed => bypassed += 1,
            CandidateOutput::Invalid => invalid += 1,
            CandidateOutput::Valid(h) => {
                let h = h.value();
                valid += 1;
                distance += loss(LossKind::Distance, u.reference, h);
                let p = loss(LossKind::Polarity, u.reference, h);
                polarity += p;
                if h == 0 {
                    zeros += 1;
                } else {
                    nonzero_polarity += p;
                }
            }
        }
    }
    if valid == 0 {
        return Err(EvalError::NoValidUpdates);
    }
    let v = valid as f64;
    let nonzero = valid - zeros;
    Ok(RunMetrics {
        distance: distance / v,
        polarity_pct: 100.0 * polarity / v,
        zero_pct: 100.0 * zeros as f64 / v,
        filtered_polarity_pct: (nonzero > 0).then(|| 100.0 * nonzero_polarity / nonzero as f64),
        invalid_pct: 100.0 * invalid as f64 / (valid + invalid) as f64,
        updates: updates.len(),
        valid,
        bypassed,
        invalid,
    })
}

/// Mean with a 95% Student-t half-width; `None` for a single observation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub ci_half_width: Option<f64>,
    pub n: usize,
}

/// `t(0.975, df)`.
pub fn t_quantile_975(df: usize) -> f64 {
    StudentsT::new(0.0, 1.0, df as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(0.975)
}

pub fn mean_with_ci(values: &[f64]) -> Result<Estimate, EvalError> {
    let n = values.len();
    if n == 0 {
        return Err(EvalError::NoRuns);
    }
    // Sorting makes the floating-point sum independent of run order.
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    // Shifting by the smallest value keeps identical runs exactly at width 0.
    let shift = sorted[0];
    let mean = shift + sorted.iter().map(|v| v - shift).sum::<f64>() / n as f64;
    let ci_half_width = (n >= 2).then(|| {
        let var = sorted.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        t_quantile_975(n - 1) * var.sqrt() / (n as f64).sqrt()
    });
    Ok(Estimate { mean, ci_half_width, n })
}

/// Aggregate over runs of one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyAggregate {
    pub runs: usize,
    pub distance: Estimate,
    pub polarity_pct: Estimate,
    pub zero_pct: Estimate,
    /// Over the runs that had at least one nonzero answer.
    pub filtered_polarity_pct: Option<Estimate>,
    pub invalid_pct: Estimate,
    pub updates: usize,
    pub valid: usize,
    pub bypassed: usize,
    pub invalid: usize,
}

impl ConsistencyAggregate {
    pub fn value(&self, kind: LossKind) -> f64 {
        match kind {
            LossKind::Distance => self.distance.mean,
            LossKind::Polarity => self.polarity_pct.mean,
        }
    }
}

pub fn aggregate_runs(runs: &[RunMetrics]) -> Result<ConsistencyAggregate, EvalError> {
    if runs.is_empty() {
        return Err(EvalError::NoRuns);
    }
    let collect = |f: fn(&RunMetrics) -> f64| runs.iter().map(f).collect::<Vec<_>>();
    let filtered: Vec<f64> = runs.iter().filter_map(|r| r.filtered_polarity_pct).collect();
    Ok(ConsistencyAggregate {
        runs: runs.len(),
        distance: mean_with_ci(&collect(|r| r.distance))?,
        polarity_pct: mean_with_ci(&collect(|r| r.polarity_pct))?,
        zero_pct: mean_with_ci(&collect(|r| r.zero_pct))?,
        filtered_polarity_pct: mean_with_ci(&filtered).ok(),
        invalid_pct: mean_with_ci(&collect(|r| r.invalid_pct))?,
        updates: runs.iter().map(|r| r.updates).sum(),
        valid: runs.iter().map(|r| r.valid).sum(),
        bypassed: runs.iter().map(|r| r.bypassed).sum(),
        invalid: runs.iter().map(|r| r.invalid).sum(),
    })
}

/// Everything about a consistency cell except the prompt variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellKey {
    pub n: usize,
    pub p: f64,
    pub epsilon: f64,
    pub epochs: usize,
    pub agent: String,
    pub model: String,
    pub seeds: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub key: CellKey,
    pub base_distance: f64,
    pub variant_distance: f64,
    pub distance: f64,
    pub base_polarity_pct: f64,
    pub variant_polarity_pct: f64,
    pub polarity_pct: f64,
}

impl SensitivityReport {
    pub fn value(&self, kind: LossKind) -> f64 {
        match kind {
            LossKind::Distance => self.distance,
            LossKind::Polarity => self.polarity_pct,
        }
    }
}

/// `|C_base - C_variant|` per loss kind.
pub fn sensitivity(
    base: (&CellKey, &ConsistencyAggregate),
    variant: (&CellKey, &ConsistencyAggregate),
) -> Result<SensitivityReport, EvalError> {
    if base.0 != variant.0 {
        return Err(EvalError::ConfigMismatch(format!("{:?} vs {:?}", base.0, variant.0)));
    }
    let (b, v) = (base.1, variant.1);
    Ok(SensitivityReport {
        key: base.0.clone(),
        base_distance: b.distance.mean,
        variant_distance: v.distance.mean,
        distance: (b.distance.mean - v.distance.mean).abs(),
        base_polarity_pct: b.polarity_pct.mean,
        variant_polarity_pct: v.polarity_pct.mean,
        polarity_pct: (b.polarity_pct.mean - v.polarity_pct.mean).abs(),
    })
}

/// Least-squares `y = slope x + intercept`.
pub fn fit_line(points: &[(f64, f64)]) -> Result<(f64, f64), EvalError> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return Err(EvalError::TooFewPoints);
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(EvalError::TooFewPoints);
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Stances of the framing experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Framing {
    ProA,
    ProB,
    ContraA,
}

impl Framing {
    pub const ALL: [Framing; 3] = [Framing::ProA, Framing::ProB, Framing::ContraA];

    pub fn as_str(self) -> &'static str {
        match self {
            Framing::ProA => "pro_a",
            Framing::ProB => "pro_b",
            Framing::ContraA => "contra_a",
        }
    }

    /// The pairing of the two "other side" stances is not measured.
    pub fn pair_measured(reader: Framing, author: Framing) -> bool {
        !matches!(
            (reader, author),
            (Framing::ProB, Framing::ContraA) | (Framing::ContraA, Framing::ProB)
        )
    }
}

/// Mean reader reaction (on `[-2, 2]`) per (reader, author) pairing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NegativityMatrix {
    /// `cells[reader][author]`, in [`Framing::ALL`] order.
    pub cells: [[Option<Estimate>; 3]; 3],
    /// Valid reactions per measured cell.
    pub trials: [[usize; 3]; 3],
}

impl NegativityMatrix {
    /// Builds the matrix from the valid reactions of each measured pairing.
    pub fn from_reactions(reactions: &[[Vec<i8>; 3]; 3]) -> Self {
        let mut cells = [[None; 3]; 3];
        let mut trials = [[0; 3]; 3];
        for (r, reader) in Framing::ALL.into_iter().enumerate() {
            for (a, author) in Framing::ALL.into_iter().enumerate() {
                if !Framing::pair_measured(reader, author) {
                    continue;
                }
                let values: Vec<f64> = reactions[r][a].iter().map(|&v| f64::from(v)).collect();
                trials[r][a] = values.len();
                cells[r][a] = mean_with_ci(&values).ok();
            }
        }
        Self { cells, trials }
    }
}
