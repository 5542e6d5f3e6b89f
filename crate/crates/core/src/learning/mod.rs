//! Training of the similarity weights (pairwise ranking), the merge
//! classifier and the join threshold.

mod merge;
mod ranking;
pub mod svm;
mod tau;

use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use merge::{merge_examples, train_merge, MergeModel, MergePool, MergeTrainingConfig};
pub use ranking::{
    generate_cross_ranking_data, generate_ranking_data, pairwise_accuracy, train_ranker, PoolMode, RankerConfig,
    RankingDataConfig, TrainedRanker,
};
pub use tau::{cluster_monolingual, tune_tau, TauResult, TauSearch};

/// One query of ranking data: the candidate clusters that should rank above
/// (`positives`) and below (`negatives`) the rest for this document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingExample {
    pub query_id: String,
    pub positives: Vec<Vec<f64>>,
    pub negatives: Vec<Vec<f64>>,
}

impl RankingExample {
    /// Feature arity shared by every candidate, or `None` for an empty query.
    pub fn arity(&self) -> Option<usize> {
        self.positives.iter().chain(&self.negatives).map(Vec::len).next()
    }

    pub fn pair_count(&self) -> usize {
        self.positives.len() * self.negatives.len()
    }
}

/// Writes examples as tab-separated records `query_id  label  f1 .. fn`,
/// label `+1` or `-1`, one candidate per line.
pub fn write_ranking_dump<W: std::io::Write>(examples: &[RankingExample], mut out: W) -> std::io::Result<()> {
    for ex in examples {
        for (label, set) in [("+1", &ex.positives), ("-1", &ex.negatives)] {
            for f in set {
                write!(out, "{}\t{}", ex.query_id, label)?;
                for v in f {
                    write!(out, "\t{v:?}")?;
                }
                writeln!(out)?;
            }
        }
    }
    Ok(())
}

/// Reads the dump format back, grouping consecutive lines by query id.
pub fn parse_ranking_dump<R: BufRead>(input: R) -> Result<Vec<RankingExample>> {
    let mut out: Vec<RankingExample> = Vec::new();
    let mut arity = None;
    for (n, line) in input.lines().enumerate() {
        let line_no = n + 1;
        let line = line.map_err(|e| Error::io("<ranking dump>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let malformed = |message: String| Error::Malformed { line: line_no, message };
        let mut fields = line.split('\t');
        let qid = fields.next().unwrap_or_default();
        if qid.is_empty() {
            return Err(malformed("empty query id".into()));
        }
        let positive = match fields.next() {
            Some("+1") => true,
            Some("-1") => false,
            other => return Err(malformed(format!("bad label {other:?}"))),
        };
        let features = fields
            .map(|f| match f.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(malformed(format!("bad feature {f:?}"))),
            })
            .collect::<Result<Vec<f64>>>()?;
        if features.is_empty() || *arity.get_or_insert(features.len()) != features.len() {
            return Err(malformed(format!("unexpected feature count {}", features.len())));
        }
        if out.last().is_none_or(|ex| ex.query_id != qid) {
            out.push(RankingExample {
                query_id: qid.to_string(),
                positives: Vec::new(),
                negatives: Vec::new(),
            });
        }
        let ex = out.last_mut().expect("pushed above");
        if positive {
            ex.positives.push(features);
        } else {
            ex.negatives.push(features);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dump_round_trip() {
        let ex = vec![
            RankingExample {
                query_id: "d1".into(),
                positives: vec![vec![0.1, 1.0 / 3.0]],
                negatives: vec![vec![0.0, 0.5], vec![1e-300, 2.0]],
            },
            RankingExample {
                query_id: "d2".into(),
                positives: vec![vec![0.7, 0.2]],
                negatives: vec![],
            },
        ];
        let mut buf = Vec::new();
        write_ranking_dump(&ex, &mut buf).unwrap();
        assert_eq!(parse_ranking_dump(&buf[..]).unwrap(), ex);
    }

    #[test]
    fn dump_rejects_mixed_arity() {
        let text = "q\t+1\t0.1\t0.2\nq\t-1\t0.3\n";
        assert!(matches!(
            parse_ranking_dump(text.as_bytes()),
            Err(Error::Malformed { line: 2, .. })
        ));
    }

    #[test]
    fn dump_rejects_bad_label() {
        assert!(parse_ranking_dump("q\t1\t0.1\n".as_bytes()).is_err());
        assert!(parse_ranking_dump("q\t+1\tNaN\n".as_bytes()).is_err());
    }
}
