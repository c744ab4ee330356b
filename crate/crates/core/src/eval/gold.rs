use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::qa::{oracle_answer, Benefit, Month, QueryFacets, Tier};
use crate::tablemodel::{MoneyValue, TableGrid};

use super::EvalError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldQuery {
    pub qid: String,
    pub question: String,
    pub facets: QueryFacets,
    pub expected: MoneyValue,
    pub category: Benefit,
}

/// Parses a gold file: one query per line,
/// `qid<TAB>question<TAB>month<TAB>tier<TAB>benefit<TAB>expected_cents`.
/// Blank lines and lines starting with `#` are skipped. When `corpus` is
/// given, every expected value is checked against the oracle.
pub fn parse_gold(text: &str, corpus: Option<&[TableGrid]>) -> Result<Vec<GoldQuery>, EvalError> {
    let mut out = Vec::new();
    let mut qids = HashSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| EvalError::Parse { line: line_no, message };
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 6 {
            return Err(err(format!("expected 6 tab-separated fields, found {}", fields.len())));
        }
        let qid = fields[0].trim();
        if qid.is_empty() {
            return Err(err("empty qid".into()));
        }
        if !qids.insert(qid.to_string()) {
            return Err(err(format!("duplicate qid {qid:?}")));
        }
        let question = fields[1].trim();
        if question.is_empty() {
            return Err(err("empty question".into()));
        }
        let month: Month = fields[2].parse().map_err(err)?;
        let tier: Tier = fields[3].parse().map_err(err)?;
        let benefit: Benefit = fields[4].parse().map_err(err)?;
        let cents: i64 = fields[5].trim().parse().map_err(|_| err(format!("bad expected_cents {:?}", fields[5])))?;
        out.push(GoldQuery {
            qid: qid.to_string(),
            question: question.to_string(),
            facets: QueryFacets::full(month, tier, benefit),
            expected: MoneyValue::usd(cents),
            category: benefit,
        });
    }
    if let Some(grids) = corpus {
        verify_gold(&out, grids)?;
    }
    Ok(out)
}

/// Checks each expected value against the oracle.
pub fn verify_gold(gold: &[GoldQuery], grids: &[TableGrid]) -> Result<(), EvalError> {
    for g in gold {
        let oracle = oracle_answer(grids, &g.facets)?;
        if oracle != Some(g.expected) {
            return Err(EvalError::OracleMismatch { qid: g.qid.clone(), expected: g.expected, oracle });
        }
    }
    Ok(())
}

pub fn load_gold(path: &Path, corpus: Option<&[TableGrid]>) -> Result<Vec<GoldQuery>, EvalError> {
    let text = std::fs::read_to_string(path).map_err(|source| EvalError::Io { path: path.to_path_buf(), source })?;
    parse_gold(&text, corpus)
}

pub fn write_gold(gold: &[GoldQuery]) -> String {
    let mut out = String::from("# qid\tquestion\tmonth\ttier\tbenefit\texpected_cents\n");
    for g in gold {
        let f = g.facets;
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\n",
            g.qid,
            g.question,
            f.month.map(Month::name).unwrap_or_default(),
            f.tier.map(Tier::label).unwrap_or_default(),
            f.benefit.map(Benefit::label).unwrap_or_default(),
            g.expected.amount_cents
        ));
    }
    out
}
