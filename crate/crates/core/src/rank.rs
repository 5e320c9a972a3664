use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RankEntry {
    /// 1-based.
    pub rank: usize,
    pub country: String,
    pub score: f64,
}

pub type Ranking = Vec<RankEntry>;

/// Descending by score; equal scores ordered by country code.
pub fn rank<S: AsRef<str>>(scores: &[(S, f64)]) -> Result<Ranking> {
    if let Some(k) = scores.iter().position(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFinite {
            what: "scores",
            index: k,
            label: String::from(scores[k].0.as_ref()),
        });
    }
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| {
        scores[b]
            .1
            .total_cmp(&scores[a].1)
            .then_with(|| scores[a].0.as_ref().cmp(scores[b].0.as_ref()))
    });
    Ok(idx
        .into_iter()
        .enumerate()
        .map(|(r, i)| RankEntry {
            rank: r + 1,
            country: String::from(scores[i].0.as_ref()),
            score: scores[i].1,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn codes(r: &Ranking) -> Vec<&str> {
        r.iter().map(|e| e.country.as_str()).collect()
    }

    #[test]
    fn descending() {
        let r = rank(&[("A", 1.0), ("B", 2.0)]).unwrap();
        assert_eq!(codes(&r), ["B", "A"]);
        assert_eq!(r[0].rank, 1);
    }

    #[test]
    fn ties_lexicographic() {
        let r = rank(&[("B", 1.0), ("A", 1.0)]).unwrap();
        assert_eq!(codes(&r), ["A", "B"]);
    }

    #[test]
    fn non_finite_rejected() {
        assert!(rank(&[("A", f64::NAN)]).is_err());
    }
}
