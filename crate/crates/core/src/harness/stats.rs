use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use statrs::distribution::{ContinuousCDF, StudentsT};

use super::config::parse_config;
use crate::engine::SimulationResult;
use crate::error::{Error, Result};
use crate::net::NetworkConfig;

/// Per-run quantities summarized across seeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    FirstDeath,
    HalfDeath,
    AvgJoulesPerRound,
    AvgResidualPerRound,
    FinalAlive,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::FirstDeath,
        Metric::HalfDeath,
        Metric::AvgJoulesPerRound,
        Metric::AvgResidualPerRound,
        Metric::FinalAlive,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::FirstDeath => "first_death",
            Metric::HalfDeath => "half_death",
            Metric::AvgJoulesPerRound => "avg_joules_per_round",
            Metric::AvgResidualPerRound => "avg_residual_per_round",
            Metric::FinalAlive => "final_alive",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == name.trim())
            .ok_or_else(|| Error::UnknownMetric(name.to_string()))
    }

    /// Death milestones that never happened are censored at the number of
    /// rounds simulated.
    pub fn value(self, r: &SimulationResult) -> f64 {
        match self {
            Metric::FirstDeath => r.first_death_round.unwrap_or(r.rounds()) as f64,
            Metric::HalfDeath => r.half_death_round.unwrap_or(r.rounds()) as f64,
            Metric::AvgJoulesPerRound => r.avg_joules_per_round,
            Metric::AvgResidualPerRound => r.avg_residual_per_round,
            Metric::FinalAlive => r.final_alive() as f64,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricStats {
    pub mean: f64,
    /// Sample standard deviation; zero for a single sample.
    pub sd: f64,
}

impl MetricStats {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let sd = if xs.len() > 1 {
            (xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Self { mean, sd }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub protocol: String,
    pub samples: usize,
    /// Indexed like [`Metric::ALL`].
    pub stats: [MetricStats; 5],
}

impl SummaryRow {
    pub fn get(&self, metric: Metric) -> MetricStats {
        let i = Metric::ALL.iter().position(|m| *m == metric).expect("metric is listed");
        self.stats[i]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryTable {
    pub config: NetworkConfig,
    pub rows: Vec<SummaryRow>,
}

impl SummaryTable {
    /// Summarizes runs grouped by protocol name, keeping first-seen order.
    pub fn from_results<'a>(config: NetworkConfig, results: impl IntoIterator<Item = &'a SimulationResult>) -> Self {
        let mut groups: Vec<(String, Vec<&SimulationResult>)> = Vec::new();
        for r in results {
            match groups.iter_mut().find(|(p, _)| *p == r.protocol) {
                Some((_, v)) => v.push(r),
                None => groups.push((r.protocol.clone(), vec![r])),
            }
        }
        let rows = groups
            .into_iter()
            .map(|(protocol, runs)| {
                let stats = Metric::ALL.map(|m| {
                    let xs: Vec<f64> = runs.iter().map(|r| m.value(r)).collect();
                    MetricStats::from_samples(&xs)
                });
                SummaryRow {
                    protocol,
                    samples: runs.len(),
                    stats,
                }
            })
            .collect();
        Self { config, rows }
    }

    pub fn row(&self, protocol: &str) -> Result<&SummaryRow> {
        self.rows
            .iter()
            .find(|r| r.protocol == protocol)
            .ok_or_else(|| Error::UnknownProtocol(protocol.to_string()))
    }

    pub fn header() -> String {
        let mut cols = vec!["protocol".to_string(), "samples".to_string()];
        for m in Metric::ALL {
            cols.push(format!("{}_mean", m.name()));
            cols.push(format!("{}_sd", m.name()));
        }
        cols.join(",")
    }

    /// CSV body; the run parameters go in `#` comment lines above it.
    pub fn to_csv(&self, plan_text: &str) -> String {
        let mut out = String::new();
        for line in plan_text.lines() {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
        out.push_str(&Self::header());
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.protocol);
            out.push(',');
            out.push_str(&row.samples.to_string());
            for s in &row.stats {
                out.push_str(&format!(",{},{}", s.mean, s.sd));
            }
            out.push('\n');
        }
        out
    }
}

/// Reads a summary written by [`super::run_plan`].
pub fn read_summary(path: &Path) -> Result<SummaryTable> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut plan_text = String::new();
    let mut rows = Vec::new();
    let mut saw_header = false;
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let bad = |msg: String| Error::Parse { line: idx + 1, msg };
        if let Some(c) = line.strip_prefix('#') {
            plan_text.push_str(c.strip_prefix(' ').unwrap_or(c));
            plan_text.push('\n');
            continue;
        }
        if !saw_header {
            if line != SummaryTable::header() {
                return Err(bad("unexpected summary header".into()));
            }
            saw_header = true;
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 2 + 2 * Metric::ALL.len() {
            return Err(bad(format!("expected {} fields, got {}", 2 + 2 * Metric::ALL.len(), fields.len())));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad(format!("not a number: `{s}`")));
        let mut stats = [MetricStats { mean: 0.0, sd: 0.0 }; 5];
        for (i, s) in stats.iter_mut().enumerate() {
            *s = MetricStats {
                mean: num(fields[2 + 2 * i])?,
                sd: num(fields[3 + 2 * i])?,
            };
        }
        rows.push(SummaryRow {
            protocol: fields[0].to_string(),
            samples: fields[1].parse().map_err(|_| bad(format!("bad sample count `{}`", fields[1])))?,
            stats,
        });
    }
    let config = parse_config(&plan_text)?.config;
    Ok(SummaryTable { config, rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    AGreater,
    BGreater,
    Indistinguishable,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::AGreater => "a > b",
            Verdict::BGreater => "b > a",
            Verdict::Indistinguishable => "indistinguishable",
        })
    }
}

/// One-sided Welch test of `mean(a) > mean(b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Comparison {
    pub metric: Metric,
    pub mean_a: f64,
    pub mean_b: f64,
    pub difference: f64,
    pub t: f64,
    pub dof: f64,
    /// `P(T >= t)` under equal means.
    pub p_value: f64,
    /// `1 - p_value`: confidence that `mean(a) > mean(b)`.
    pub confidence: f64,
    pub verdict: Verdict,
}

pub const SIGNIFICANCE: f64 = 0.05;

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: a={} b={} diff={} t={:.3} dof={:.1} confidence(a>b)={:.4} verdict: {}",
            self.metric, self.mean_a, self.mean_b, self.difference, self.t, self.dof, self.confidence, self.verdict
        )
    }
}

pub fn welch(metric: Metric, a: (MetricStats, usize), b: (MetricStats, usize)) -> Comparison {
    let (sa, na) = a;
    let (sb, nb) = b;
    let difference = sa.mean - sb.mean;
    let va = sa.sd * sa.sd / na as f64;
    let vb = sb.sd * sb.sd / nb as f64;
    let se = (va + vb).sqrt();

    let (t, dof, p_value) = if se == 0.0 {
        let p = if difference > 0.0 {
            0.0
        } else if difference < 0.0 {
            1.0
        } else {
            0.5
        };
        (f64::NAN, f64::NAN, p)
    } else {
        let t = difference / se;
        let denom = va * va / (na as f64 - 1.0).max(1.0) + vb * vb / (nb as f64 - 1.0).max(1.0);
        let dof = ((va + vb) * (va + vb) / denom).max(1.0);
        let dist = StudentsT::new(0.0, 1.0, dof).expect("dof is positive");
        (t, dof, 1.0 - dist.cdf(t))
    };

    let verdict = if difference != 0.0 && p_value < SIGNIFICANCE {
        Verdict::AGreater
    } else if difference != 0.0 && 1.0 - p_value < SIGNIFICANCE {
        Verdict::BGreater
    } else {
        Verdict::Indistinguishable
    };
    Comparison {
        metric,
        mean_a: sa.mean,
        mean_b: sb.mean,
        difference,
        t,
        dof,
        p_value,
        confidence: 1.0 - p_value,
        verdict,
    }
}

/// Compares `metric` between two protocols in a summary.
pub fn compare(summary: &SummaryTable, metric: Metric, protocol_a: &str, protocol_b: &str) -> Result<Comparison> {
    let a = summary.row(protocol_a)?;
    let b = summary.row(protocol_b)?;
    Ok(welch(metric, (a.get(metric), a.samples), (b.get(metric), b.samples)))
}
