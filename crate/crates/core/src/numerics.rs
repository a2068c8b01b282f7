//! Small numeric helpers shared across modules.

/// The golden rotation `(sqrt(5) - 1) / 2`, default forcing frequency.
pub const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl std::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.unsigned_abs(), b.unsigned_abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a as i64
}

/// Midpoints of `n` equal cells of `[a, b]`.
pub fn midpoints(a: f64, b: f64, n: usize) -> impl Iterator<Item = f64> {
    let h = (b - a) / n as f64;
    (0..n).map(move |i| a + (i as f64 + 0.5) * h)
}

/// Circular median of points on the unit circle: the sample point minimising
/// the summed circle distance to all others. `O(n log n)` via prefix sums over
/// the doubled sorted sample.
pub fn circular_median(points: &[f64]) -> Option<f64> {
    if points.is_empty() {
        return None;
    }
    let mut sorted: Vec<f64> = points.iter().map(|&p| crate::circle::wrap_f64(p)).collect();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let doubled: Vec<f64> = sorted.iter().copied().chain(sorted.iter().map(|p| p + 1.0)).collect();
    let mut prefix = vec![0.0; 2 * n + 1];
    for (i, q) in doubled.iter().enumerate() {
        prefix[i + 1] = prefix[i] + q;
    }
    let mut best = (f64::INFINITY, sorted[0]);
    let mut k = 0;
    for i in 0..n {
        let c = doubled[i];
        k = k.max(i);
        while k < i + n && doubled[k] - c <= 0.5 {
            k += 1;
        }
        // points i..k lie within half a turn above c, the rest are nearer from below
        let near = prefix[k] - prefix[i] - c * (k - i) as f64;
        let far = (i + n - k) as f64 * (1.0 + c) - (prefix[i + n] - prefix[k]);
        let cost = near + far;
        if cost < best.0 {
            best = (cost, sorted[i]);
        }
    }
    Some(best.1)
}
