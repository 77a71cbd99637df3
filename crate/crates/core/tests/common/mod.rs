//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use floorsyntax::generator::init_policy;
use floorsyntax::generator::{
    rollout, Condition, ConditionSampler, NoiseSchedule, Policy, PolicyConfig, SamplingSchedule,
};
use floorsyntax::grid::BinaryGrid;
use floorsyntax::post_training::{RewardClip, RolloutBatch};
use floorsyntax::rect_cover::{greedy_cover, Rect};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// All-pairs hop distances by Floyd-Warshall; `None` marks unreachable pairs.
pub fn floyd_warshall(adj: &[Vec<usize>]) -> Vec<Vec<Option<u64>>> {
    let n = adj.len();
    let mut d = vec![vec![None; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = Some(0);
        for &j in &adj[i] {
            row[j] = Some(1);
        }
    }
    for k in 0..n {
        for i in 0..n {
            let Some(ik) = d[i][k] else { continue };
            for j in 0..n {
                if let Some(kj) = d[k][j] {
                    if d[i][j].is_none_or(|ij| ik + kj < ij) {
                        d[i][j] = Some(ik + kj);
                    }
                }
            }
        }
    }
    d
}

/// Disjoint rectangles from the cover of a random blob raster, joined when
/// their Chebyshev gap is at most `touch`. At most `max_k` nodes.
pub fn random_rect_graph(rng: &mut ChaCha8Rng, max_k: usize, touch: usize) -> (Vec<Rect>, Vec<Vec<usize>>) {
    let (w, h) = (rng.random_range(4..28), rng.random_range(4..28));
    let mut g = BinaryGrid::new(w, h);
    for _ in 0..rng.random_range(1..12) {
        let (x0, y0) = (rng.random_range(0..w), rng.random_range(0..h));
        let (x1, y1) = (
            (x0 + rng.random_range(1..8)).min(w),
            (y0 + rng.random_range(1..8)).min(h),
        );
        for y in y0..y1 {
            for x in x0..x1 {
                g.set(x, y, true);
            }
        }
    }
    let mut rects = greedy_cover(&g, 1);
    rects.truncate(rng.random_range(1..=max_k));
    let k = rects.len();
    let mut adj = vec![Vec::new(); k];
    for i in 0..k {
        for j in i + 1..k {
            if rects[i].gap(&rects[j]) <= touch {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    (rects, adj)
}

/// Whether every cell of `[x0, x1) x [y0, y1)` is set, by direct scan.
pub fn all_true(g: &BinaryGrid, x0: usize, y0: usize, x1: usize, y1: usize) -> bool {
    (y0..y1).all(|y| (x0..x1).all(|x| *g.get(x, y)))
}

/// Largest all-true rectangle area by enumerating every corner pair.
pub fn brute_largest_area(g: &BinaryGrid) -> usize {
    let (w, h) = g.dims();
    // prefix[y][x] = set cells in [0, x) x [0, y)
    let mut prefix = vec![vec![0usize; w + 1]; h + 1];
    for y in 0..h {
        for x in 0..w {
            prefix[y + 1][x + 1] = prefix[y][x + 1] + prefix[y + 1][x] - prefix[y][x] + usize::from(*g.get(x, y));
        }
    }
    let mut best = 0;
    for y0 in 0..h {
        for y1 in y0 + 1..=h {
            for x0 in 0..w {
                for x1 in x0 + 1..=w {
                    let area = (x1 - x0) * (y1 - y0);
                    let set = prefix[y1][x1] + prefix[y0][x0] - prefix[y0][x1] - prefix[y1][x0];
                    if set == area && area > best {
                        best = area;
                    }
                }
            }
        }
    }
    best
}

pub fn random_grid(rng: &mut ChaCha8Rng, max_side: usize) -> BinaryGrid {
    let (w, h) = (rng.random_range(1..=max_side), rng.random_range(1..=max_side));
    let density = rng.random_range(0.3..0.95);
    let mut g = BinaryGrid::new(w, h);
    for y in 0..h {
        for x in 0..w {
            g.set(x, y, rng.random_bool(density));
        }
    }
    g
}

/// Double-double value `hi + lo`.
#[derive(Clone, Copy, Debug)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

impl Dd {
    pub fn new(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    fn two_sum(a: f64, b: f64) -> Dd {
        let s = a + b;
        let bb = s - a;
        Dd {
            hi: s,
            lo: (a - (s - bb)) + (b - bb),
        }
    }

    pub fn add(self, o: Dd) -> Dd {
        let s = Self::two_sum(self.hi, o.hi);
        let lo = s.lo + self.lo + o.lo;
        Self::two_sum(s.hi, lo)
    }

    pub fn sub(self, o: Dd) -> Dd {
        self.add(Dd { hi: -o.hi, lo: -o.lo })
    }

    pub fn mul(self, o: Dd) -> Dd {
        let p = self.hi * o.hi;
        let err = self.hi.mul_add(o.hi, -p);
        let lo = err + self.hi * o.lo + self.lo * o.hi;
        Self::two_sum(p, lo)
    }

    pub fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self.sub(o.mul(Dd::new(q1)));
        let q2 = r.hi / o.hi;
        let r = r.sub(o.mul(Dd::new(q2)));
        let q3 = r.hi / o.hi;
        Self::two_sum(q1, q2).add(Dd::new(q3))
    }

    /// Natural log by one Newton step on `exp` from the f64 estimate.
    pub fn ln(self) -> Dd {
        let y = self.hi.ln();
        // exp(y) in double-double: exp(y) = e0 * (1 + d) with d tiny
        let e0 = y.exp();
        let corr = Dd::new(e0).sub(self).div(self);
        // ln(x) = y - ln(exp(y)/x) ~ y - corr + corr^2/2
        Dd::new(y).sub(corr).add(corr.mul(corr).mul(Dd::new(0.5)))
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

/// ln(2*pi) to double-double precision.
pub const LN_2PI_DD: Dd = Dd {
    hi: 1.8378770664093453,
    lo: 1.7344894126516758e-17,
};

/// Diagonal-Gaussian log-density evaluated in double-double arithmetic.
pub fn logprob_dd(a: &[f64], mu: &[f64], var: &[f64]) -> f64 {
    let mut s = Dd::new(0.0);
    for ((x, m), v) in a.iter().zip(mu).zip(var) {
        let d = Dd::new(*x).sub(Dd::new(*m));
        let vv = Dd::new(*v);
        s = s.add(LN_2PI_DD).add(vv.ln()).add(d.mul(d).div(vv));
    }
    s.mul(Dd::new(-0.5)).to_f64()
}

/// A 2-dimensional policy and an `n`-index sampling schedule.
pub fn toy_policy(steps: usize, seed: u64) -> (Policy, SamplingSchedule) {
    let cfg = PolicyConfig {
        dim: 2,
        emb_dim: 2,
        cond_dim: 1,
        max_rooms: None,
        init_scale: 0.3,
    };
    let ts: Vec<usize> = (0..steps).map(|i| 150 + 300 * i).collect();
    (
        init_policy(cfg, seed).unwrap(),
        SamplingSchedule::new(&NoiseSchedule::default(), &ts),
    )
}

/// Rollouts of the toy policy with a quadratic reward.
pub fn toy_batch(pol: &Policy, sched: &SamplingSchedule, n: usize, seed: u64) -> RolloutBatch {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut conds: Vec<Condition> = Vec::new();
    let mut trajs = Vec::new();
    let mut raw = Vec::new();
    for k in 0..n {
        conds.push(ConditionSampler::exact(1).sample(format!("t{k}"), &mut rng));
        let c = vec![rng.random_range(-1.0..1.0)];
        let t = rollout(pol, &c, sched, &mut rng);
        raw.push(Some(-(t.x0[0] - 0.5).powi(2) - (t.x0[1] + 0.2).powi(2)));
        trajs.push(t);
    }
    RolloutBatch::new(conds, trajs, raw, RewardClip::None)
}

/// Central finite difference of `f` at every parameter.
pub fn central_fd(pol: &Policy, h: f64, f: impl Fn(&Policy) -> f64) -> Vec<f64> {
    (0..pol.params.len())
        .map(|k| {
            let mut a = pol.clone();
            let mut b = pol.clone();
            a.params[k] += h;
            b.params[k] -= h;
            (f(&a) - f(&b)) / (2.0 * h)
        })
        .collect()
}

/// Largest component-wise error relative to `max(|fd|, floor)`.
pub fn max_rel_err(analytic: &[f64], fd: &[f64], floor: f64) -> f64 {
    analytic
        .iter()
        .zip(fd)
        .map(|(a, f)| (a - f).abs() / f.abs().max(floor))
        .fold(0.0, f64::max)
}
