use std::iter::Sum;
use std::ops::AddAssign;

/// Compensated accumulator (Kahan summation with Neumaier's branch for
/// addends larger than the running total).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl AddAssign<f64> for NeumaierSum {
    #[inline]
    fn add_assign(&mut self, rhs: f64) {
        self.add(rhs);
    }
}

impl Sum<f64> for NeumaierSum {
    fn sum<I: Iterator<Item = f64>>(iter: I) -> Self {
        let mut acc = NeumaierSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Compensated sum of a slice.
pub fn compensated_sum(values: &[f64]) -> f64 {
    values.iter().copied().sum::<NeumaierSum>().value()
}

/// Running compensated partial sums: `out[k] = values[0] + ... + values[k]`.
pub fn prefix_sums(values: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut acc = NeumaierSum::new();
    values
        .into_iter()
        .map(|v| {
            acc.add(v);
            acc.value()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_small_addends_lost_by_naive_summation() {
        let mut values = vec![1.0e16];
        values.extend(std::iter::repeat_n(1.0, 10_000));
        values.push(-1.0e16);
        let naive: f64 = values.iter().sum();
        assert_ne!(naive, 10_000.0);
        assert_eq!(compensated_sum(&values), 10_000.0);
    }

    #[test]
    fn prefix_sums_are_running_totals() {
        let p = prefix_sums([1.0, -2.0, 3.0]);
        assert_eq!(p, vec![1.0, -1.0, 2.0]);
    }

    #[test]
    fn many_tenths() {
        let s = compensated_sum(&vec![0.1; 1_000_000]);
        assert!((s - 100_000.0).abs() < 1e-9);
    }
}
