use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::format_real;
use crate::synth::{Difficulty, EdgeDifficulty};

pub const TRACE_HEADER: &str =
    "iter,lambda,num_selected,frac_easy,frac_medium,frac_hard,train_loss,val_acc";

/// Selected fraction per difficulty class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionFractions {
    pub easy: f64,
    pub medium: f64,
    pub hard: f64,
}

impl SelectionFractions {
    /// Fraction of each class with `S > 0`. A class with no edges reports 0.
    pub fn measure(mask: &[f64], difficulty: &EdgeDifficulty) -> Self {
        let mut total = [0usize; 3];
        let mut picked = [0usize; 3];
        for (&s, d) in mask.iter().zip(&difficulty.0) {
            let k = match d {
                Difficulty::Easy => 0,
                Difficulty::Medium => 1,
                Difficulty::Hard => 2,
            };
            total[k] += 1;
            if s > 0.0 {
                picked[k] += 1;
            }
        }
        let frac = |k: usize| {
            if total[k] == 0 {
                0.0
            } else {
                picked[k] as f64 / total[k] as f64
            }
        };
        Self {
            easy: frac(0),
            medium: frac(1),
            hard: frac(2),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    /// 1-based iteration.
    pub iter: u32,
    pub lambda: f64,
    pub num_selected: usize,
    pub fractions: Option<SelectionFractions>,
    pub train_loss: f64,
    pub val_acc: f64,
}

/// One record per curriculum iteration.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CurriculumTrace {
    pub records: Vec<TraceRecord>,
}

impl CurriculumTrace {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(TRACE_HEADER);
        out.push('\n');
        for r in &self.records {
            let (e, m, h) = match r.fractions {
                Some(f) => (format_real(f.easy), format_real(f.medium), format_real(f.hard)),
                None => Default::default(),
            };
            let _ = writeln!(
                out,
                "{},{},{},{e},{m},{h},{},{}",
                r.iter,
                format_real(r.lambda),
                r.num_selected,
                format_real(r.train_loss),
                format_real(r.val_acc)
            );
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next() != Some(TRACE_HEADER) {
            return Err(Error::param("trace CSV header mismatch"));
        }
        let mut records = Vec::new();
        for (k, line) in lines.enumerate().filter(|(_, l)| !l.is_empty()) {
            let bad = || Error::param(format!("trace CSV row {} malformed", k + 1));
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 8 {
                return Err(bad());
            }
            let real = |s: &str| s.parse::<f64>().map_err(|_| bad());
            let fractions = if f[3].is_empty() {
                None
            } else {
                Some(SelectionFractions {
                    easy: real(f[3])?,
                    medium: real(f[4])?,
                    hard: real(f[5])?,
                })
            };
            records.push(TraceRecord {
                iter: f[0].parse().map_err(|_| bad())?,
                lambda: real(f[1])?,
                num_selected: f[2].parse().map_err(|_| bad())?,
                fractions,
                train_loss: real(f[6])?,
                val_acc: real(f[7])?,
            });
        }
        Ok(Self { records })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fractions_per_class() {
        let d = EdgeDifficulty(vec![
            Difficulty::Easy,
            Difficulty::Easy,
            Difficulty::Medium,
            Difficulty::Hard,
        ]);
        let f = SelectionFractions::measure(&[0.4, 0.0, 1.0, 0.0], &d);
        assert_eq!((f.easy, f.medium, f.hard), (0.5, 1.0, 0.0));
    }

    #[test]
    fn csv_round_trip_with_and_without_labels() {
        let trace = CurriculumTrace {
            records: vec![
                TraceRecord {
                    iter: 1,
                    lambda: 0.125,
                    num_selected: 10,
                    fractions: Some(SelectionFractions { easy: 0.5, medium: 0.25, hard: 0.0 }),
                    train_loss: 2.5,
                    val_acc: 0.75,
                },
                TraceRecord {
                    iter: 2,
                    lambda: 0.5,
                    num_selected: 12,
                    fractions: None,
                    train_loss: 2.25,
                    val_acc: 0.5,
                },
            ],
        };
        let csv = trace.to_csv();
        assert!(csv.contains("\n2,0.5,12,,,,2.25,0.5\n"));
        assert_eq!(CurriculumTrace::from_csv(&csv).unwrap(), trace);
    }
}
