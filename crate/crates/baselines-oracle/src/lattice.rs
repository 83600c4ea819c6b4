//! Regular lattice on the probability simplex with nearest-point snapping.

use core_bamdp::Belief;

/// Points `c / n` for nonnegative integer vectors `c` summing to `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexLattice {
    dim: usize,
    n: usize,
    /// `binom[i][j]` = C(i, j) for the ranking.
    binom: Vec<Vec<usize>>,
}

/// Worst-case L1 snapping error of largest-remainder rounding at resolution 1.
fn snap_constant(dim: usize) -> f64 {
    (0..=dim)
        .map(|m| 2.0 * (m * (dim - m)) as f64 / dim as f64)
        .fold(0.0, f64::max)
}

impl SimplexLattice {
    pub fn new(dim: usize, n: usize) -> Self {
        assert!(dim >= 1 && n >= 1);
        let rows = n + dim + 1;
        let mut binom = vec![vec![0usize; dim + 1]; rows];
        for i in 0..rows {
            binom[i][0] = 1;
            for j in 1..=dim {
                binom[i][j] = if i == 0 {
                    0
                } else {
                    binom[i - 1][j - 1] + binom[i - 1][j]
                };
            }
        }
        Self { dim, n, binom }
    }

    /// The coarsest lattice whose snapping error is at most `pitch` in L1.
    pub fn for_pitch(dim: usize, pitch: f64) -> Self {
        let n = (snap_constant(dim) / pitch).ceil().max(1.0) as usize;
        Self::new(dim, n)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn resolution(&self) -> usize {
        self.n
    }

    /// Guaranteed L1 bound on the snapping error.
    pub fn snap_bound(&self) -> f64 {
        snap_constant(self.dim) / self.n as f64
    }

    /// Number of lattice points, C(n + d - 1, d - 1).
    pub fn len(&self) -> usize {
        self.binom[self.n + self.dim - 1][self.dim - 1]
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Lexicographic rank of a count vector.
    pub fn rank(&self, counts: &[usize]) -> usize {
        let mut rank = 0;
        let mut left = self.n;
        for (i, &c) in counts.iter().enumerate().take(self.dim - 1) {
            let slots = self.dim - 1 - i;
            // Vectors whose i-th count is smaller than c come first.
            for smaller in 0..c {
                let rest = left - smaller;
                rank += self.binom[rest + slots - 1][slots - 1];
            }
            left -= c;
        }
        rank
    }

    pub fn counts(&self, mut rank: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.dim);
        let mut left = self.n;
        for i in 0..self.dim - 1 {
            let slots = self.dim - 1 - i;
            let mut c = 0;
            loop {
                let block = self.binom[left - c + slots - 1][slots - 1];
                if rank < block {
                    break;
                }
                rank -= block;
                c += 1;
            }
            out.push(c);
            left -= c;
        }
        out.push(left);
        out
    }

    pub fn belief(&self, rank: usize) -> Belief {
        let weights = self
            .counts(rank)
            .into_iter()
            .map(|c| c as f64 / self.n as f64)
            .collect();
        Belief::new(weights).expect("lattice points are on the simplex")
    }

    /// Largest-remainder rounding of `belief` onto the lattice; ties go to lower indices.
    pub fn snap_counts(&self, belief: &Belief) -> Vec<usize> {
        let scaled: Vec<f64> = belief.weights().iter().map(|w| w * self.n as f64).collect();
        let mut counts: Vec<usize> = scaled.iter().map(|v| v.floor() as usize).collect();
        let assigned: usize = counts.iter().sum();
        let mut order: Vec<usize> = (0..self.dim).collect();
        order.sort_by(|&a, &b| {
            let (fa, fb) = (scaled[a] - scaled[a].floor(), scaled[b] - scaled[b].floor());
            fb.total_cmp(&fa).then(a.cmp(&b))
        });
        for &i in order.iter().take(self.n.saturating_sub(assigned)) {
            counts[i] += 1;
        }
        counts
    }

    pub fn snap(&self, belief: &Belief) -> usize {
        self.rank(&self.snap_counts(belief))
    }
}
