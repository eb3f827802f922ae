use std::fmt::Write as _;

use crate::corpus::Sentiment;
use crate::error::{Error, Result};

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassMetrics {
    pub class: Sentiment,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationReport {
    pub classes: [ClassMetrics; 3],
    pub accuracy: f64,
    /// `confusion[gold][predicted]`
    pub confusion: [[usize; 3]; 3],
}

/// One-vs-rest per-class metrics. A class that is never predicted gets
/// precision 0.
pub fn classification_metrics(gold: &[Sentiment], predicted: &[Sentiment]) -> Result<ClassificationReport> {
    if gold.len() != predicted.len() {
        return Err(Error::InvalidInput(format!(
            "gold has {} labels but predictions have {}",
            gold.len(),
            predicted.len()
        )));
    }
    if gold.is_empty() {
        return Err(Error::InvalidInput("no labels to evaluate".into()));
    }
    let mut confusion = [[0usize; 3]; 3];
    for (g, p) in gold.iter().zip(predicted) {
        confusion[g.index()][p.index()] += 1;
    }
    let classes = Sentiment::ALL.map(|s| {
        let i = s.index();
        let tp = confusion[i][i] as f64;
        let predicted_n: usize = (0..3).map(|g| confusion[g][i]).sum();
        let support: usize = confusion[i].iter().sum();
        let precision = if predicted_n > 0 { tp / predicted_n as f64 } else { 0.0 };
        let recall = if support > 0 { tp / support as f64 } else { 0.0 };
        ClassMetrics {
            class: s,
            precision,
            recall,
            f1: f1_score(precision, recall),
            support,
        }
    });
    let correct: usize = (0..3).map(|i| confusion[i][i]).sum();
    Ok(ClassificationReport {
        classes,
        accuracy: correct as f64 / gold.len() as f64,
        confusion,
    })
}

impl ClassificationReport {
    /// Fixed-width table: Sentiment, precision, recall, f1-score, support.
    pub fn to_table(&self) -> String {
        let mut out = format!(
            "{:<10}{:>11}{:>9}{:>10}{:>9}\n",
            "Sentiment", "precision", "recall", "f1-score", "support"
        );
        for c in &self.classes {
            writeln!(
                out,
                "{:<10}{:>11.2}{:>9.2}{:>10.2}{:>9}",
                c.class.as_str(),
                c.precision,
                c.recall,
                c.f1,
                c.support
            )
            .unwrap();
        }
        let total: usize = self.classes.iter().map(|c| c.support).sum();
        writeln!(out, "{:<10}{:>11}{:>9}{:>10.4}{:>9}", "accuracy", "", "", self.accuracy, total).unwrap();
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("sentiment,precision,recall,f1_score,support\n");
        for c in &self.classes {
            writeln!(out, "{},{:.6},{:.6},{:.6},{}", c.class, c.precision, c.recall, c.f1, c.support).unwrap();
        }
        out
    }
}
