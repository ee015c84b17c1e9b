use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::cv::{cross_validate_with_plan, CvOptions, EvalReport};
use super::folds::make_folds;
use super::EvalError;
use crate::corpus::ContextualizedDocument;
use crate::model::{ModelConfig, Orientation};

type Measure = fn(&ComparisonRow) -> f64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedConfig {
    pub name: String,
    #[serde(flatten)]
    pub config: ModelConfig,
}

impl NamedConfig {
    pub fn new(name: impl Into<String>, config: ModelConfig) -> Self {
        NamedConfig {
            name: name.into(),
            config,
        }
    }
}

/// NB, NBS′ and SCANB (as-printed coverage weights).
pub fn standard_configs() -> Vec<NamedConfig> {
    vec![
        NamedConfig::new("NB", ModelConfig::flat_nb()),
        NamedConfig::new("NBS'", ModelConfig::splitting_nb()),
        NamedConfig::new("SCANB", ModelConfig::scanb(Orientation::AsPrinted)),
    ]
}

/// [`standard_configs`] plus SCANB with inverted coverage weights.
pub fn configs_with_both_orientations() -> Vec<NamedConfig> {
    let mut v = standard_configs();
    v.push(NamedConfig::new("SCANB-inv", ModelConfig::scanb(Orientation::Inverted)));
    v
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub name: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub report: EvalReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub k: usize,
    pub seed: u64,
    pub rows: Vec<ComparisonRow>,
}

/// Cross-validates every config on one shared fold plan.
pub fn compare_models(
    docs: &[ContextualizedDocument],
    categories: &[String],
    configs: &[NamedConfig],
    options: &CvOptions,
) -> Result<ComparisonTable, EvalError> {
    let mut rows = Vec::with_capacity(configs.len());
    if !configs.is_empty() {
        let plan = make_folds(docs, options.k, options.seed)?;
        for named in configs {
            let report = cross_validate_with_plan(docs, categories, &named.config, &plan, options)?.report;
            rows.push(ComparisonRow {
                name: named.name.clone(),
                precision: report.micro.precision,
                recall: report.micro.recall,
                f1: report.micro.f1,
                report,
            });
        }
    }
    Ok(ComparisonTable {
        k: options.k,
        seed: options.seed,
        rows,
    })
}

impl ComparisonTable {
    pub fn row(&self, name: &str) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.name == name)
    }

    /// Measures as rows, models as columns.
    pub fn to_text(&self) -> String {
        let width = self.rows.iter().map(|r| r.name.chars().count()).max().unwrap_or(0).max(6);
        let mut out = format!("{:<9}", "Measure");
        for r in &self.rows {
            let _ = write!(out, "  {:>width$}", r.name);
        }
        out.push('\n');
        let measures: [(&str, Measure); 3] = [
            ("Recall", |r| r.recall),
            ("Precision", |r| r.precision),
            ("F1", |r| r.f1),
        ];
        for (label, get) in measures {
            let _ = write!(out, "{label:<9}");
            for r in &self.rows {
                let _ = write!(out, "  {:>width$.4}", get(r));
            }
            out.push('\n');
        }
        out
    }

    /// `model,measure,value` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("model,measure,value\n");
        for r in &self.rows {
            for (m, v) in [("recall", r.recall), ("precision", r.precision), ("f1", r.f1)] {
                let _ = writeln!(out, "{},{m},{v}", csv_field(&r.name));
            }
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}
