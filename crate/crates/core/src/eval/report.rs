use serde::{Deserialize, Serialize};

use crate::ingest::DocumentBundle;
use crate::qa::{Answer, Benefit};
use crate::tablemodel::MoneyValue;

use super::{run_eval, EvalError, GoldQuery, MethodConfig};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub qid: String,
    pub category: Benefit,
    pub expected: MoneyValue,
    pub produced: Answer,
    pub correct: bool,
    pub not_found: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryScore {
    pub category: Benefit,
    pub title: String,
    pub n: usize,
    pub correct: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub method: String,
    pub fingerprint: String,
    pub n: usize,
    pub correct: usize,
    pub not_found: usize,
    pub accuracy: f64,
    pub information_not_found: f64,
    /// One row per benefit category, always in the same order.
    pub categories: Vec<CategoryScore>,
    pub records: Vec<EvalRecord>,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn percent(x: f64) -> String {
    let p = x * 100.0;
    if (p - p.round()).abs() < 1e-9 {
        format!("{p:.0}%")
    } else {
        format!("{p:.1}%")
    }
}

impl EvalReport {
    pub fn from_records(method: &str, fingerprint: &str, records: Vec<EvalRecord>) -> EvalReport {
        let n = records.len();
        let correct = records.iter().filter(|r| r.correct).count();
        let not_found = records.iter().filter(|r| r.not_found).count();
        let categories = Benefit::ALL
            .into_iter()
            .map(|b| {
                let rows: Vec<&EvalRecord> = records.iter().filter(|r| r.category == b).collect();
                let ok = rows.iter().filter(|r| r.correct).count();
                CategoryScore { category: b, title: b.title().to_string(), n: rows.len(), correct: ok, accuracy: ratio(ok, rows.len()) }
            })
            .collect();
        EvalReport {
            method: method.to_string(),
            fingerprint: fingerprint.to_string(),
            n,
            correct,
            not_found,
            accuracy: ratio(correct, n),
            information_not_found: ratio(not_found, n),
            categories,
            records,
        }
    }

    /// Answered with a wrong value.
    pub fn incorrect_answered(&self) -> usize {
        self.n - self.correct - self.not_found
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn render_text(&self) -> String {
        let mut out = format!("method: {}  fingerprint: {}\n", self.method, self.fingerprint);
        out.push_str(&format!("{:<24} {:>5} {:>8} {:>9}\n", "Query category", "n", "correct", "accuracy"));
        for c in &self.categories {
            out.push_str(&format!("{:<24} {:>5} {:>8} {:>9}\n", c.title, c.n, c.correct, percent(c.accuracy)));
        }
        out.push_str(&format!("{:<24} {:>5} {:>8} {:>9}\n", "Accuracy", self.n, self.correct, percent(self.accuracy)));
        out.push_str(&format!("{:<24} {:>5} {:>8} {:>9}\n", "Information not found", "", self.not_found, percent(self.information_not_found)));
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodScore {
    pub method: String,
    pub correct: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub category: String,
    pub n: usize,
    pub scores: Vec<MethodScore>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: String,
    pub fingerprint: String,
    pub n: usize,
    pub accuracy: f64,
    pub information_not_found: f64,
}

/// Per-category accuracy of several methods side by side, with an overall row last.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub methods: Vec<MethodSummary>,
    pub rows: Vec<ComparisonRow>,
    #[serde(skip)]
    pub reports: Vec<EvalReport>,
}

impl Comparison {
    pub fn from_reports(reports: Vec<EvalReport>) -> Comparison {
        let methods = reports
            .iter()
            .map(|r| MethodSummary {
                method: r.method.clone(),
                fingerprint: r.fingerprint.clone(),
                n: r.n,
                accuracy: r.accuracy,
                information_not_found: r.information_not_found,
            })
            .collect();
        let mut rows: Vec<ComparisonRow> = Benefit::ALL
            .iter()
            .enumerate()
            .map(|(i, b)| ComparisonRow {
                category: b.title().to_string(),
                n: reports.first().map_or(0, |r| r.categories[i].n),
                scores: reports
                    .iter()
                    .map(|r| MethodScore { method: r.method.clone(), correct: r.categories[i].correct, accuracy: r.categories[i].accuracy })
                    .collect(),
            })
            .collect();
        rows.push(ComparisonRow {
            category: "Overall".into(),
            n: reports.first().map_or(0, |r| r.n),
            scores: reports.iter().map(|r| MethodScore { method: r.method.clone(), correct: r.correct, accuracy: r.accuracy }).collect(),
        });
        Comparison { methods, rows, reports }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("comparison serializes") + "\n"
    }

    pub fn render_text(&self) -> String {
        let mut out = format!("{:<24} {:>10}", "Query category", "Questions");
        for m in &self.methods {
            out.push_str(&format!(" {:>12}", m.method));
        }
        out.push('\n');
        for row in &self.rows {
            let label = if row.category == "Overall" { "Accuracy" } else { row.category.as_str() };
            out.push_str(&format!("{label:<24} {:>10}", row.n));
            for s in &row.scores {
                out.push_str(&format!(" {:>12}", percent(s.accuracy)));
            }
            out.push('\n');
        }
        out.push_str(&format!("{:<24} {:>10}", "Information not found", ""));
        for m in &self.methods {
            out.push_str(&format!(" {:>12}", percent(m.information_not_found)));
        }
        out.push('\n');
        out
    }
}

/// Runs every method on the same gold set and corpus.
pub fn compare_methods(methods: &[MethodConfig], gold: &[GoldQuery], docs: &[DocumentBundle]) -> Result<Comparison, EvalError> {
    if methods.is_empty() {
        return Err(EvalError::NoMethods);
    }
    let reports = methods.iter().map(|m| run_eval(m, gold, docs)).collect::<Result<Vec<_>, _>>()?;
    Ok(Comparison::from_reports(reports))
}
