//! Mergeable count/mean/M2 accumulator. Trials run in parallel and
//! merge associatively, so serial and parallel reductions agree.

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunningMoments {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl RunningMoments {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(self, other: Self) -> Self {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * other.count as f64 / count as f64;
        let m2 = self.m2
            + other.m2
            + delta * delta * (self.count as f64 * other.count as f64) / count as f64;
        RunningMoments { count, mean, m2 }
    }

    /// Population variance.
    pub fn variance(&self) -> f64 {
        if self.count == 0 {
            f64::NAN
        } else {
            self.m2 / self.count as f64
        }
    }

    pub fn sample_variance(&self) -> f64 {
        if self.count < 2 {
            f64::NAN
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(values: &[f64]) -> RunningMoments {
        let mut acc = RunningMoments::new();
        for &v in values {
            acc.push(v);
        }
        acc
    }

    #[test]
    fn merge_matches_sequential() {
        let a = series(&[1.0, 2.0, 3.0]);
        let b = series(&[4.0, -1.0]);
        let merged = a.merge(b);
        let all = series(&[1.0, 2.0, 3.0, 4.0, -1.0]);
        assert_eq!(merged.count, all.count);
        assert!((merged.mean - all.mean).abs() < 1e-12);
        assert!((merged.m2 - all.m2).abs() < 1e-12);
    }

    #[test]
    fn merge_is_associative_enough() {
        let chunks = [
            series(&[0.5, 0.25]),
            series(&[4.0]),
            series(&[-3.0, 7.0, 2.0]),
        ];
        let left = chunks[0].merge(chunks[1]).merge(chunks[2]);
        let right = chunks[0].merge(chunks[1].merge(chunks[2]));
        assert!((left.mean - right.mean).abs() < 1e-12);
        assert!((left.m2 - right.m2).abs() < 1e-12);
        assert_eq!(left.count, right.count);
    }

    #[test]
    fn empty_merges_are_identity() {
        let a = series(&[1.0, 2.0]);
        assert_eq!(a.merge(RunningMoments::new()), a);
        assert_eq!(RunningMoments::new().merge(a), a);
    }
}
