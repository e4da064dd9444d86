//! Direct Assessment aggregation and system clustering.
//!
//! Raw 0-100 adequacy scores are standardized per assessor (z-score against
//! the assessor's mean and population standard deviation over their complete
//! score set), averaged per translation, then averaged per system. Systems
//! are clustered greedily: a system opens a new, lower-ranked cluster when
//! every already-placed system beats it in a rank-sum test on the
//! per-translation z distributions.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Read;

use super::wilcoxon::wilcoxon_rank_sum;
use super::MetricsError;

pub const DEFAULT_CLUSTER_ALPHA: f64 = 0.05;

/// One human judgment of one translation.
#[derive(Debug, Clone, PartialEq)]
pub struct Assessment {
    pub system: String,
    pub translation: String,
    pub assessor: String,
    pub raw: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemDa {
    pub name: String,
    /// Mean of per-translation raw averages.
    pub ave_raw: f64,
    /// Mean of per-translation z averages; NaN when no assessor of this
    /// system had usable variance.
    pub ave_z: f64,
    /// Distinct translations assessed.
    pub n: usize,
    /// Total assessments, repeats included.
    pub assessments: usize,
    /// Per-translation z averages in translation-id order; the sample used
    /// for significance testing.
    pub translation_z: Vec<f64>,
    pub cluster_rank: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DaReport {
    /// Systems sorted by `ave_z` descending (ties by name).
    pub systems: Vec<SystemDa>,
    /// Assessors whose scores had zero variance: their z contributions are
    /// excluded.
    pub excluded_assessors: Vec<String>,
}

/// Reads `system,translation_id,assessor_id,score` records. A first line
/// whose fourth field is literally `score` is treated as a header.
pub fn parse_da_csv<R: Read>(reader: R) -> Result<Vec<Assessment>, MetricsError> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(reader);
    let mut out = Vec::new();
    for (idx, record) in csv_reader.records().enumerate() {
        let line = idx + 1;
        let record = record.map_err(|e| MetricsError::CsvParse {
            line,
            reason: e.to_string(),
        })?;
        if record.len() != 4 {
            return Err(MetricsError::CsvParse {
                line,
                reason: format!("expected 4 fields, found {}", record.len()),
            });
        }
        if idx == 0 && record[3].trim().eq_ignore_ascii_case("score") {
            continue;
        }
        let raw: f64 = record[3]
            .trim()
            .parse()
            .map_err(|_| MetricsError::CsvParse {
                line,
                reason: format!("unparseable score {:?}", &record[3]),
            })?;
        out.push(Assessment {
            system: record[0].trim().to_string(),
            translation: record[1].trim().to_string(),
            assessor: record[2].trim().to_string(),
            raw,
        });
    }
    Ok(out)
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Aggregates assessments into per-system averages.
pub fn da_aggregate(assessments: &[Assessment]) -> Result<DaReport, MetricsError> {
    if assessments.is_empty() {
        return Err(MetricsError::NoAssessments);
    }
    for (i, a) in assessments.iter().enumerate() {
        if !a.raw.is_finite() || !(0.0..=100.0).contains(&a.raw) {
            return Err(MetricsError::ScoreOutOfRange {
                line: i + 1,
                score: a.raw,
            });
        }
    }

    // Standardization statistics over each assessor's full score set,
    // across all systems.
    let mut by_assessor: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for a in assessments {
        by_assessor.entry(&a.assessor).or_default().push(a.raw);
    }
    let mut assessor_stats: BTreeMap<&str, (f64, f64)> = BTreeMap::new();
    let mut excluded_assessors = Vec::new();
    for (name, scores) in &by_assessor {
        let m = mean(scores);
        let variance = scores.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / scores.len() as f64;
        let stddev = variance.sqrt();
        if stddev == 0.0 {
            excluded_assessors.push((*name).to_string());
        } else {
            assessor_stats.insert(name, (m, stddev));
        }
    }

    // Average per translation first.
    type RawsAndZs = (Vec<f64>, Vec<f64>);
    let mut groups: BTreeMap<(&str, &str), RawsAndZs> = BTreeMap::new();
    for a in assessments {
        let entry = groups
            .entry((&a.system, &a.translation))
            .or_insert_with(|| (Vec::new(), Vec::new()));
        entry.0.push(a.raw);
        if let Some((m, sd)) = assessor_stats.get(a.assessor.as_str()) {
            entry.1.push((a.raw - m) / sd);
        }
    }

    // Then per system.
    struct Accum {
        translation_raw: Vec<f64>,
        translation_z: Vec<f64>,
        assessments: usize,
    }
    let mut by_system: BTreeMap<&str, Accum> = BTreeMap::new();
    for ((system, _translation), (raws, zs)) in &groups {
        let acc = by_system.entry(system).or_insert_with(|| Accum {
            translation_raw: Vec::new(),
            translation_z: Vec::new(),
            assessments: 0,
        });
        acc.assessments += raws.len();
        acc.translation_raw.push(mean(raws));
        if !zs.is_empty() {
            acc.translation_z.push(mean(zs));
        }
    }

    let mut systems: Vec<SystemDa> = by_system
        .into_iter()
        .map(|(name, acc)| SystemDa {
            name: name.to_string(),
            ave_raw: mean(&acc.translation_raw),
            ave_z: if acc.translation_z.is_empty() {
                f64::NAN
            } else {
                mean(&acc.translation_z)
            },
            n: acc.translation_raw.len(),
            assessments: acc.assessments,
            translation_z: acc.translation_z,
            cluster_rank: None,
        })
        .collect();
    systems.sort_by(|a, b| b.ave_z.total_cmp(&a.ave_z).then_with(|| a.name.cmp(&b.name)));

    Ok(DaReport {
        systems,
        excluded_assessors,
    })
}

/// True when `upper` significantly outperforms `lower` at `alpha`.
fn beats(upper: &SystemDa, lower: &SystemDa, alpha: f64) -> bool {
    match wilcoxon_rank_sum(&upper.translation_z, &lower.translation_z) {
        Ok(test) => test.p < alpha && test.z > 0.0,
        Err(_) => false,
    }
}

/// Greedy clustering of a report's systems (already ordered by `ave_z`):
/// a system starts a new cluster exactly when every system placed so far
/// beats it at `alpha`. Returns the clusters as lists of system names, best
/// cluster first.
pub fn cluster_systems(report: &DaReport, alpha: f64) -> Vec<Vec<String>> {
    let mut clusters: Vec<Vec<&SystemDa>> = Vec::new();
    for system in &report.systems {
        let all_placed_beat_it = !clusters.is_empty()
            && clusters
                .iter()
                .flatten()
                .all(|placed| beats(placed, system, alpha));
        if clusters.is_empty() || all_placed_beat_it {
            clusters.push(vec![system]);
        } else {
            clusters.last_mut().expect("non-empty").push(system);
        }
    }
    clusters
        .into_iter()
        .map(|cluster| cluster.into_iter().map(|s| s.name.clone()).collect())
        .collect()
}

impl DaReport {
    /// Records 1-based cluster ranks on the systems.
    pub fn apply_clusters(&mut self, clusters: &[Vec<String>]) {
        for (rank, cluster) in clusters.iter().enumerate() {
            for name in cluster {
                if let Some(system) = self.systems.iter_mut().find(|s| &s.name == name) {
                    system.cluster_rank = Some(rank + 1);
                }
            }
        }
    }

    /// Plain-text table with columns Ave. raw, Ave. z, n, N, system. With
    /// `clusters`, a horizontal rule separates consecutive clusters.
    pub fn format_table(&self, clusters: Option<&[Vec<String>]>) -> String {
        let mut out = String::new();
        let header = format!("{:>9} {:>8} {:>6} {:>6}  system", "Ave. raw", "Ave. z", "n", "N");
        let _ = writeln!(out, "{header}");
        let rule = "-".repeat(40);
        match clusters {
            None => {
                for system in &self.systems {
                    self.push_row(&mut out, system);
                }
            }
            Some(clusters) => {
                for (i, cluster) in clusters.iter().enumerate() {
                    if i > 0 {
                        let _ = writeln!(out, "{rule}");
                    }
                    for name in cluster {
                        if let Some(system) = self.systems.iter().find(|s| &s.name == name) {
                            self.push_row(&mut out, system);
                        }
                    }
                }
            }
        }
        if !self.excluded_assessors.is_empty() {
            let _ = writeln!(
                out,
                "excluded assessors (zero variance): {}",
                self.excluded_assessors.join(", ")
            );
        }
        out
    }

    fn push_row(&self, out: &mut String, system: &SystemDa) {
        let _ = writeln!(
            out,
            "{:>9.1} {:>8.3} {:>6} {:>6}  {}",
            system.ave_raw, system.ave_z, system.n, system.assessments, system.name
        );
    }
}
