//! Mergeable group aggregates.

/// A sampled point: subject index into the point set's subject table plus
/// the value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample {
    pub subject: u32,
    pub value: f64,
}

/// Count, extrema, sum and sum of squares of a group, plus the first
/// `sample_size` points in (value, subject) order.
///
/// Merging two adjacent groups (all of `self`'s points ordered before
/// `other`'s) gives exactly the aggregate of their union; mean and
/// population variance are derived from the sums.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupStats {
    pub count: u64,
    pub min: f64,
    pub max: f64,
    pub sum: f64,
    pub sum_squares: f64,
    pub samples: Vec<Sample>,
}

impl Default for GroupStats {
    fn default() -> Self {
        GroupStats {
            count: 0,
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
            sum: 0.0,
            sum_squares: 0.0,
            samples: Vec::new(),
        }
    }
}

impl GroupStats {
    /// Adds a point. Points must arrive in (value, subject) order for the
    /// samples to be the group's first ones.
    pub fn push(&mut self, subject: u32, value: f64, sample_size: usize) {
        self.count += 1;
        self.min = self.min.min(value);
        self.max = self.max.max(value);
        self.sum += value;
        self.sum_squares += value * value;
        if self.samples.len() < sample_size {
            self.samples.push(Sample { subject, value });
        }
    }

    /// Folds an adjacent, later group into this one.
    pub fn merge(&mut self, other: &GroupStats, sample_size: usize) {
        self.count += other.count;
        self.min = self.min.min(other.min);
        self.max = self.max.max(other.max);
        self.sum += other.sum;
        self.sum_squares += other.sum_squares;
        let room = sample_size.saturating_sub(self.samples.len());
        self.samples
            .extend(other.samples.iter().take(room).copied());
    }

    /// Merges groups left to right.
    pub fn merged<'a, I>(groups: I, sample_size: usize) -> GroupStats
    where
        I: IntoIterator<Item = &'a GroupStats>,
    {
        groups
            .into_iter()
            .fold(GroupStats::default(), |mut acc, g| {
                acc.merge(g, sample_size);
                acc
            })
    }

    pub fn mean(&self) -> Option<f64> {
        (self.count > 0).then(|| self.sum / self.count as f64)
    }

    /// Population variance `E[x²] − E[x]²`, with rounding negatives clamped
    /// to zero.
    pub fn variance(&self) -> Option<f64> {
        let mean = self.mean()?;
        Some((self.sum_squares / self.count as f64 - mean * mean).max(0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn of(values: &[f64], s: usize) -> GroupStats {
        let mut g = GroupStats::default();
        for (i, &v) in values.iter().enumerate() {
            g.push(i as u32, v, s);
        }
        g
    }

    #[test]
    fn one_to_ten() {
        let values: Vec<f64> = (1..=10).map(f64::from).collect();
        let g = of(&values, 5);
        assert_eq!(g.count, 10);
        assert_eq!(
            (g.min, g.max, g.sum, g.sum_squares),
            (1.0, 10.0, 55.0, 385.0)
        );
        assert_eq!(g.mean(), Some(5.5));
        assert_eq!(g.variance(), Some(8.25));
        assert_eq!(g.samples.len(), 5);
    }

    #[test]
    fn merge_matches_direct() {
        let left = of(&[1.0, 2.0, 3.0], 2);
        let mut right = of(&[4.0, 5.0], 2);
        for s in &mut right.samples {
            s.subject += 3;
        }
        let mut merged = left.clone();
        merged.merge(&right, 2);
        let direct = of(&[1.0, 2.0, 3.0, 4.0, 5.0], 2);
        assert_eq!(merged, direct);
    }

    #[test]
    fn empty_group() {
        let g = GroupStats::default();
        assert_eq!(g.mean(), None);
        assert_eq!(g.variance(), None);
        let mut h = of(&[3.0], 1);
        h.merge(&g, 1);
        assert_eq!(h, of(&[3.0], 1));
    }

    #[test]
    fn variance_is_never_negative() {
        let g = of(&[0.1, 0.1, 0.1], 0);
        assert!(g.variance().unwrap() >= 0.0);
    }
}
