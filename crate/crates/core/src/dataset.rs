use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};

/// Observed counts as `(value, frequency)` rows, distinct and ascending.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountDataset {
    rows: Vec<(u64, u64)>,
    n: u64,
}

impl CountDataset {
    /// Builds from `(value, frequency)` pairs in any order; repeated values
    /// are merged. Fails when the total frequency is zero.
    pub fn from_pairs<I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u64, u64)>,
    {
        let mut merged: BTreeMap<u64, u64> = BTreeMap::new();
        for (v, f) in pairs {
            let slot = merged.entry(v).or_insert(0);
            *slot = slot
                .checked_add(f)
                .ok_or_else(|| Error::InvalidData("frequency overflow".into()))?;
        }
        let rows: Vec<(u64, u64)> = merged.into_iter().collect();
        let n = rows
            .iter()
            .try_fold(0u64, |acc, &(_, f)| acc.checked_add(f))
            .ok_or_else(|| Error::InvalidData("frequency overflow".into()))?;
        if n == 0 {
            return Err(Error::InvalidData("dataset has no observations".into()));
        }
        Ok(Self { rows, n })
    }

    /// Builds from one raw count per observation.
    pub fn from_counts<I>(counts: I) -> Result<Self>
    where
        I: IntoIterator<Item = u64>,
    {
        Self::from_pairs(counts.into_iter().map(|c| (c, 1)))
    }

    /// Epileptic seizure counts, 351 patients.
    pub fn seizure() -> Self {
        Self::from_pairs([
            (0, 126),
            (1, 80),
            (2, 59),
            (3, 42),
            (4, 24),
            (5, 8),
            (6, 5),
            (7, 4),
            (8, 3),
        ])
        .expect("embedded data is valid")
    }

    pub fn rows(&self) -> &[(u64, u64)] {
        &self.rows
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn frequency(&self, value: u64) -> u64 {
        self.rows
            .binary_search_by_key(&value, |r| r.0)
            .map(|i| self.rows[i].1)
            .unwrap_or(0)
    }

    /// Number of distinct values with positive frequency.
    pub fn support_size(&self) -> usize {
        self.rows.iter().filter(|r| r.1 > 0).count()
    }

    pub fn max_value(&self) -> u64 {
        self.rows.iter().rev().find(|r| r.1 > 0).map(|r| r.0).unwrap_or(0)
    }

    /// Sample mean `m1`.
    pub fn mean(&self) -> f64 {
        self.raw_moment(1)
    }

    /// Sample raw second moment `m2`.
    pub fn second_moment(&self) -> f64 {
        self.raw_moment(2)
    }

    fn raw_moment(&self, r: i32) -> f64 {
        let s: f64 = self.rows.iter().map(|&(v, f)| (v as f64).powi(r) * f as f64).sum();
        s / self.n as f64
    }

    /// Observed proportion of zeros `p0`.
    pub fn zero_proportion(&self) -> f64 {
        self.frequency(0) as f64 / self.n as f64
    }

    /// Same data with every frequency multiplied by `k`.
    pub fn scaled(&self, k: u64) -> Result<Self> {
        Self::from_pairs(self.rows.iter().map(|&(v, f)| (v, f * k)))
    }

    /// Canonical text form `value,frequency\n` for every row with positive
    /// frequency, used for digests.
    pub fn canonical_text(&self) -> String {
        let mut s = String::new();
        for &(v, f) in self.rows.iter().filter(|r| r.1 > 0) {
            s.push_str(&format!("{v},{f}\n"));
        }
        s
    }
}
