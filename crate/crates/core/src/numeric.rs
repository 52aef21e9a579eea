//! Small numerical helpers shared by the rest of the crate.

/// Neumaier's variant of Kahan summation.
///
/// Curvature quantities are differences of large, nearly cancelling sums, so
/// every accumulation in the crate goes through this type in index order.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
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

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl std::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Compensated sum of an iterator of floats.
pub fn sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    values.into_iter().collect::<CompensatedSum>().value()
}

/// Relative comparison with an absolute floor:
/// `|a - b| <= max(rel * max(|a|, |b|), abs_floor)`.
pub fn close(a: f64, b: f64, rel: f64, abs_floor: f64) -> bool {
    let scale = a.abs().max(b.abs());
    (a - b).abs() <= (rel * scale).max(abs_floor)
}

/// Relative difference `|a - b| / max(|a|, |b|, floor)`.
pub fn rel_diff(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}
