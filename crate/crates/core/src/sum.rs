//! Compensated (Neumaier) accumulation.

#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    #[inline]
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub(crate) fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

pub(crate) fn sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = Neumaier::default();
    for v in values {
        acc.add(v);
    }
    acc.total()
}

/// Mean and sum of squared deviations, both anchored at the first element so
/// that constant input yields exactly that constant and exactly zero.
pub(crate) fn mean_and_ss(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let anchor = values[0];
    let n = values.len() as f64;
    let shift = sum(values.iter().map(|&v| v - anchor)) / n;
    let mean = anchor + shift;
    let ss = sum(values.iter().map(|&v| {
        let dev = (v - anchor) - shift;
        dev * dev
    }));
    (mean, ss)
}

/// Sample variance with denominator `n - 1`.
pub(crate) fn sample_variance(values: &[f64]) -> f64 {
    let (_, ss) = mean_and_ss(values);
    ss / (values.len() as f64 - 1.0)
}
