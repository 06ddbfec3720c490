//! Time-indexed metric series shared by every experiment.

use alloc::vec::Vec;

use crate::{Error, Result};

/// Which quantity a [`MetricSeries`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MetricKind {
    /// Reconstruction fidelity `⟨ψ0|ρ̄'|ψ0⟩`, in `[0, 1]`.
    Fidelity,
    /// Operator Loschmidt echo, in `[-1, 1]`.
    Loschmidt,
    /// Relative entropy of regularized operators, `>= 0`, nats.
    RelEntropy,
    /// Operator incompatibility / error OTOC, `>= 0`.
    Otoc,
    /// `‖W - I‖_F` of a perturbing unitary `W`.
    FrobeniusDistance,
}

impl MetricKind {
    pub fn name(&self) -> &'static str {
        match self {
            MetricKind::Fidelity => "fidelity",
            MetricKind::Loschmidt => "loschmidt",
            MetricKind::RelEntropy => "rel_entropy",
            MetricKind::Otoc => "otoc",
            MetricKind::FrobeniusDistance => "frobenius_distance",
        }
    }

    pub fn units(&self) -> &'static str {
        match self {
            MetricKind::RelEntropy => "nats",
            _ => "dimensionless",
        }
    }
}

/// Parameters identifying one series within a sweep.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SeriesLabel {
    pub lambda: Option<f64>,
    pub delta_lambda: Option<f64>,
    pub eta: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricSeries {
    pub metric: MetricKind,
    pub times: Vec<usize>,
    pub values: Vec<f64>,
    /// Standard error of the mean, for ensemble-averaged series.
    pub stderr: Option<Vec<f64>>,
    pub label: SeriesLabel,
}

impl MetricSeries {
    pub fn new(metric: MetricKind, times: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: times.len(),
                found: values.len(),
            });
        }
        Ok(Self {
            metric,
            times,
            values,
            stderr: None,
            label: SeriesLabel::default(),
        })
    }

    /// Mean and standard error over equally long sample curves.
    ///
    /// A single curve yields itself with zero standard error.
    pub fn from_samples(
        metric: MetricKind,
        times: Vec<usize>,
        samples: &[Vec<f64>],
    ) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidParameter {
                name: "samples",
                reason: "at least one sample curve is required",
            });
        }
        let len = times.len();
        if let Some(bad) = samples.iter().find(|s| s.len() != len) {
            return Err(Error::DimensionMismatch {
                expected: len,
                found: bad.len(),
            });
        }
        let n = samples.len() as f64;
        let mut means = Vec::with_capacity(len);
        let mut errors = Vec::with_capacity(len);
        for t in 0..len {
            let mean = samples.iter().map(|s| s[t]).sum::<f64>() / n;
            let se = if samples.len() > 1 {
                let var = samples
                    .iter()
                    .map(|s| (s[t] - mean) * (s[t] - mean))
                    .sum::<f64>()
                    / (n - 1.0);
                libm::sqrt(var / n)
            } else {
                0.0
            };
            means.push(mean);
            errors.push(se);
        }
        Ok(Self {
            metric,
            times,
            values: means,
            stderr: Some(errors),
            label: SeriesLabel::default(),
        })
    }

    pub fn with_label(mut self, label: SeriesLabel) -> Self {
        self.label = label;
        self
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value recorded at time step `step`, if present.
    pub fn value_at(&self, step: usize) -> Option<f64> {
        self.times
            .iter()
            .position(|&t| t == step)
            .map(|k| self.values[k])
    }

    pub fn stderr_at(&self, step: usize) -> Option<f64> {
        let k = self.times.iter().position(|&t| t == step)?;
        self.stderr.as_ref().map(|s| s[k])
    }

    /// Drops every entry with `time < first`.
    pub fn starting_at(mut self, first: usize) -> Self {
        fn filter(v: Vec<f64>, keep: &[bool]) -> Vec<f64> {
            v.into_iter()
                .zip(keep)
                .filter(|(_, &k)| k)
                .map(|(x, _)| x)
                .collect()
        }
        let keep: Vec<bool> = self.times.iter().map(|&t| t >= first).collect();
        self.values = filter(self.values, &keep);
        self.stderr = self.stderr.map(|s| filter(s, &keep));
        self.times.retain(|&t| t >= first);
        self
    }
}
