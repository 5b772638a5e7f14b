//! Streaming central moments up to order four, mergeable in a fixed order.

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub count: f64,
    pub mean: f64,
    m2: f64,
    m3: f64,
    m4: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        let n1 = self.count;
        self.count += 1.0;
        let n = self.count;
        let delta = x - self.mean;
        let dn = delta / n;
        let dn2 = dn * dn;
        let term1 = delta * dn * n1;
        self.mean += dn;
        self.m4 += term1 * dn2 * (n * n - 3.0 * n + 3.0) + 6.0 * dn2 * self.m2 - 4.0 * dn * self.m3;
        self.m3 += term1 * dn * (n - 2.0) - 3.0 * dn * self.m2;
        self.m2 += term1;
    }

    pub fn merge(&self, other: &Self) -> Self {
        if self.count == 0.0 {
            return *other;
        }
        if other.count == 0.0 {
            return *self;
        }
        let (na, nb) = (self.count, other.count);
        let n = na + nb;
        let d = other.mean - self.mean;
        let d2 = d * d;
        let d3 = d2 * d;
        let d4 = d2 * d2;
        let m2 = self.m2 + other.m2 + d2 * na * nb / n;
        let m3 = self.m3 + other.m3 + d3 * na * nb * (na - nb) / (n * n)
            + 3.0 * d * (na * other.m2 - nb * self.m2) / n;
        let m4 = self.m4 + other.m4
            + d4 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n)
            + 6.0 * d2 * (na * na * other.m2 + nb * nb * self.m2) / (n * n)
            + 4.0 * d * (na * other.m3 - nb * self.m3) / n;
        Self { count: n, mean: self.mean + d * nb / n, m2, m3, m4 }
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2.0 {
            f64::NAN
        } else {
            self.m2 / (self.count - 1.0)
        }
    }

    pub fn se_mean(&self) -> f64 {
        (self.variance() / self.count).sqrt()
    }

    /// Large-sample standard error of the sample variance,
    /// `sqrt((mu4 - mu2²) / N)`.
    pub fn se_variance(&self) -> f64 {
        let mu2 = self.m2 / self.count;
        let mu4 = self.m4 / self.count;
        ((mu4 - mu2 * mu2).max(0.0) / self.count).sqrt()
    }
}

/// Combines `items` by a balanced binary tree whose shape depends only on
/// `items.len()`.
pub(crate) fn pairwise<T: Clone>(items: &[T], merge: &impl Fn(&T, &T) -> T) -> Option<T> {
    match items.len() {
        0 => None,
        1 => Some(items[0].clone()),
        len => {
            let (l, r) = items.split_at(len / 2);
            Some(merge(&pairwise(l, merge)?, &pairwise(r, merge)?))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_pass(xs: &[f64]) -> (f64, f64, f64) {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let m2 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>();
        let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>();
        (mean, m2, m4)
    }

    #[test]
    fn streaming_and_merged_match_two_pass() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 7919) % 113) as f64 * 0.37 - 9.0).collect();
        let (mean, m2, m4) = two_pass(&xs);
        let mut whole = Moments::default();
        xs.iter().for_each(|&x| whole.push(x));
        let parts: Vec<Moments> = xs
            .chunks(37)
            .map(|c| {
                let mut m = Moments::default();
                c.iter().for_each(|&x| m.push(x));
                m
            })
            .collect();
        let merged = pairwise(&parts, &|a: &Moments, b: &Moments| a.merge(b)).unwrap();
        for acc in [whole, merged] {
            assert!((acc.mean - mean).abs() < 1e-12);
            assert!((acc.m2 - m2).abs() / m2 < 1e-12);
            assert!((acc.m4 - m4).abs() / m4 < 1e-11);
        }
    }
}
