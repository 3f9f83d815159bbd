//! Average-case quantities for uniformly random bays with `h` containers in
//! each of `C` columns.
//!
//! The expected counting bound is linear in `C`, `E[S0] = alpha_h * C`, and
//! the optimum satisfies `1 <= E[z_opt] / E[S0] <= f(C) = 1 + K / C`. The
//! constant `K` involves `g(h+1)`, the excess `E[z_opt] - alpha_h (h+1)`,
//! which is only available numerically; [`estimate_g`] provides it.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::astar::{solve, SolverConfig};
use crate::bay::{instance_rng, Bay, InstanceSpec, Label};
use crate::bounds::s0;
use crate::heuristics::h_relocations;
use crate::stochastic::all_scenarios;

/// Distribution of the number of blocking containers in one uniformly
/// ordered column of height `h`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColumnBlockDist {
    pub height: usize,
    /// `probabilities[k]` for `k = 0..h` (entry `h` would be zero and is
    /// omitted; `h = 0` stores `[1]`).
    pub probabilities: Vec<f64>,
}

impl ColumnBlockDist {
    pub fn p(&self, k: usize) -> f64 {
        self.probabilities.get(k).copied().unwrap_or(0.0)
    }

    pub fn mean(&self) -> f64 {
        self.probabilities
            .iter()
            .enumerate()
            .map(|(k, p)| k as f64 * p)
            .sum()
    }
}

/// Conditions on the tier of the column minimum: with the minimum `j`-th
/// from the top, the `j - 1` containers above it block and the `h - j`
/// below form a smaller column.
pub fn block_dist(h: usize) -> ColumnBlockDist {
    // table[m][k] = p_{k,m}
    let mut table: Vec<Vec<f64>> = vec![vec![1.0]];
    for m in 1..=h {
        let mut row = vec![0.0; m];
        for (k, slot) in row.iter_mut().enumerate() {
            let mut sum = 0.0;
            for j in 1..=(k + 1).min(m) {
                sum += table[m - j].get(k + 1 - j).copied().unwrap_or(0.0);
            }
            *slot = sum / m as f64;
        }
        table.push(row);
    }
    ColumnBlockDist {
        height: h,
        probabilities: table.pop().unwrap(),
    }
}

/// Expected blocking containers per column of height `h`.
pub fn alpha(h: usize) -> f64 {
    block_dist(h).mean()
}

/// Exponent of the bound `P(no special column) <= exp(-theta (C+1))`.
pub fn theta(h: usize) -> f64 {
    let h = h as f64;
    (2.0 / (h * (h + 1.0))).powf(2.0 * h) / (8.0 * h)
}

/// `K' = g(h+1) + e^theta h (P-1) / (e^theta - 1)^2`.
pub fn k_prime(h: usize, tiers: usize, g_h_plus_1: f64) -> f64 {
    let e = theta(h).exp();
    g_h_plus_1 + e * (h * (tiers - 1)) as f64 / ((e - 1.0) * (e - 1.0))
}

/// `K = K' / alpha_h`.
pub fn k_constant(h: usize, tiers: usize, g_h_plus_1: f64) -> f64 {
    k_prime(h, tiers, g_h_plus_1) / alpha(h)
}

/// `f(C) = 1 + K / C`, the upper end of the ratio sandwich.
pub fn f_of_c(h: usize, tiers: usize, columns: usize, g_h_plus_1: f64) -> f64 {
    1.0 + k_constant(h, tiers, g_h_plus_1) / columns as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticConstants {
    pub h: usize,
    pub tiers: usize,
    pub alpha: f64,
    pub theta: f64,
    pub g_h_plus_1: f64,
    pub k_prime: f64,
    pub k: f64,
}

impl AsymptoticConstants {
    pub fn new(h: usize, tiers: usize, g_h_plus_1: f64) -> AsymptoticConstants {
        AsymptoticConstants {
            h,
            tiers,
            alpha: alpha(h),
            theta: theta(h),
            g_h_plus_1,
            k_prime: k_prime(h, tiers, g_h_plus_1),
            k: k_constant(h, tiers, g_h_plus_1),
        }
    }

    pub fn f(&self, columns: usize) -> f64 {
        1.0 + self.k / columns as f64
    }
}

/// Sample mean and 95% normal-approximation half width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanCi {
    pub mean: f64,
    pub ci95: f64,
    pub samples: usize,
}

impl MeanCi {
    pub fn of(values: &[f64]) -> MeanCi {
        let n = values.len();
        if n == 0 {
            return MeanCi {
                mean: f64::NAN,
                ci95: f64::NAN,
                samples: 0,
            };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let ci95 = if n < 2 {
            0.0
        } else {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            1.96 * (var / n as f64).sqrt()
        };
        MeanCi {
            mean,
            ci95,
            samples: n,
        }
    }

    pub fn lower(&self) -> f64 {
        self.mean - self.ci95
    }

    pub fn upper(&self) -> f64 {
        self.mean + self.ci95
    }
}

/// Which relocation count stands in for `z_opt`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GMode {
    /// A* with the given node budget; unsolved instances are excluded.
    Optimal { budget: usize },
    /// Heuristic H, an upper proxy.
    Heuristic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GEstimate {
    pub estimate: MeanCi,
    /// Every bay of the size was evaluated.
    pub exact: bool,
    /// Instances whose A* run hit the budget.
    pub unsolved: usize,
}

/// Largest bay count evaluated exhaustively by [`estimate_g`].
pub const EXACT_ENUMERATION_LIMIT: u64 = 1_000_000;

fn factorial(n: usize) -> Option<u64> {
    (1..=n as u64).try_fold(1u64, |a, k| a.checked_mul(k))
}

fn relocations(bay: &Bay, mode: GMode) -> Option<u32> {
    let mut bay = bay.clone();
    bay.pop_retrievable();
    match mode {
        GMode::Heuristic => h_relocations(&bay).ok(),
        GMode::Optimal { budget } => {
            let out = solve(&bay, &SolverConfig::default().with_budget(budget)).ok()?;
            out.is_optimal().then_some(out.relocations)
        }
    }
}

/// Estimate of `g(C) = E[z_opt] - alpha_h C` over `tiers x columns` bays
/// with `h` per column. Exact when `(hC)! <= 10^6`, otherwise a Monte
/// Carlo mean over `samples` bays drawn from `seed`.
pub fn estimate_g(h: usize, tiers: usize, columns: usize, samples: usize, seed: u64, mode: GMode) -> GEstimate {
    let n = h * columns;
    let spec = InstanceSpec::new(tiers, columns, h, seed);
    let shift = alpha(h) * columns as f64;
    let mut values = Vec::new();
    let mut unsolved = 0;
    let mut push = |bay: &Bay| match relocations(bay, mode) {
        Some(z) => values.push(z as f64 - shift),
        None => unsolved += 1,
    };
    let exact = factorial(n).is_some_and(|f| f <= EXACT_ENUMERATION_LIMIT);
    if exact {
        for perm in all_scenarios(n) {
            let stacks: Vec<Vec<Label>> = perm
                .0
                .chunks(h.max(1))
                .map(|c| c.iter().map(|&l| l + 1).collect())
                .collect();
            push(&Bay::with_columns(tiers, columns, &stacks).expect("valid layout"));
        }
    } else {
        for i in 0..samples {
            push(&spec.generate_nth(i as u64).expect("valid spec"));
        }
    }
    GEstimate {
        estimate: MeanCi::of(&values),
        exact,
        unsolved,
    }
}

/// Empirical frequency of bays without a special column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpecialColumnStats {
    pub h: usize,
    /// Columns of the bay (`C + 1`).
    pub columns: usize,
    pub samples: usize,
    pub frequency: f64,
    /// `exp(-theta (C+1))`.
    pub bound: f64,
    /// Binomial standard error at the bound.
    pub sigma: f64,
}

impl SpecialColumnStats {
    pub fn holds(&self) -> bool {
        self.frequency <= self.bound + 3.0 * self.sigma
    }
}

/// A column is special when all its labels are at least
/// `omega = (h-1)(C+1) + 1`. Samples uniformly random bays with `C + 1`
/// columns of `h` containers.
pub fn special_column_check(h: usize, c: usize, samples: usize, rng: &mut impl Rng) -> SpecialColumnStats {
    let columns = c + 1;
    let omega = ((h.saturating_sub(1)) * columns + 1) as Label;
    let mut perm: Vec<Label> = (1..=(h * columns) as Label).collect();
    let mut misses = 0usize;
    for _ in 0..samples {
        perm.shuffle(rng);
        let any_special = h == 0 || perm.chunks(h).any(|col| col.iter().all(|&l| l >= omega));
        if !any_special {
            misses += 1;
        }
    }
    let bound = (-theta(h) * columns as f64).exp().min(1.0);
    let frequency = misses as f64 / samples.max(1) as f64;
    SpecialColumnStats {
        h,
        columns,
        samples,
        frequency,
        bound,
        sigma: (bound * (1.0 - bound) / samples.max(1) as f64).sqrt(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub columns: usize,
    pub samples: usize,
    pub mean_s0: f64,
    pub mean_zh: f64,
    /// `None` unless optimal solves were requested.
    pub mean_zopt: Option<f64>,
    /// `E[z_H] / E[S0]`.
    pub ratio: f64,
    /// `E[z_H] - E[S0]`.
    pub diff: f64,
    /// Half width of the 95% interval of the per-instance difference.
    pub ci95: f64,
    /// Half width of the 95% interval of the ratio (delta method).
    pub ratio_ci95: f64,
    pub unsolved: usize,
}

/// Per-`C` Monte Carlo means of `S0`, `z_H` and optionally `z_opt` (A* with
/// `opt_budget`) over bays drawn independently for each `C` from `seed`.
pub fn convergence_experiment(
    h: usize,
    tiers: usize,
    column_list: &[usize],
    samples: usize,
    seed: u64,
    opt_budget: Option<usize>,
) -> Vec<ConvergenceRow> {
    column_list
        .iter()
        .map(|&c| convergence_row(h, tiers, c, samples, seed, opt_budget))
        .collect()
}

pub fn convergence_row(
    h: usize,
    tiers: usize,
    columns: usize,
    samples: usize,
    seed: u64,
    opt_budget: Option<usize>,
) -> ConvergenceRow {
    let master = seed ^ (columns as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    let spec = InstanceSpec::new(tiers, columns, h, master);
    let mut lbs = Vec::with_capacity(samples);
    let mut hs = Vec::with_capacity(samples);
    let mut opts = Vec::new();
    let mut unsolved = 0;
    for i in 0..samples {
        let mut bay = spec.generate_nth(i as u64).expect("valid spec");
        bay.pop_retrievable();
        lbs.push(s0(&bay) as f64);
        hs.push(h_relocations(&bay).expect("spare tier") as f64);
        if let Some(budget) = opt_budget {
            let out = solve(&bay, &SolverConfig::default().with_budget(budget)).expect("budget");
            if out.is_optimal() {
                opts.push(out.relocations as f64);
            } else {
                unsolved += 1;
            }
        }
    }
    row_from_samples(columns, &lbs, &hs, opt_budget.map(|_| opts.as_slice()), unsolved)
}

fn row_from_samples(
    columns: usize,
    lbs: &[f64],
    hs: &[f64],
    opts: Option<&[f64]>,
    unsolved: usize,
) -> ConvergenceRow {
    let n = lbs.len();
    let mean_s0 = MeanCi::of(lbs).mean;
    let mean_zh = MeanCi::of(hs).mean;
    let diffs: Vec<f64> = hs.iter().zip(lbs).map(|(a, b)| a - b).collect();
    let diff = MeanCi::of(&diffs);
    let ratio = mean_zh / mean_s0;
    // Linearized ratio: (zH - ratio * S0) / E[S0].
    let lin: Vec<f64> = hs
        .iter()
        .zip(lbs)
        .map(|(a, b)| (a - ratio * b) / mean_s0)
        .collect();
    ConvergenceRow {
        columns,
        samples: n,
        mean_s0,
        mean_zh,
        mean_zopt: opts.map(|o| MeanCi::of(o).mean),
        ratio,
        diff: diff.mean,
        ci95: diff.ci95,
        ratio_ci95: MeanCi::of(&lin).ci95,
        unsolved,
    }
}

pub const CONVERGENCE_CSV_HEADER: &str = "C,samples,mean_s0,mean_zH,mean_zopt,ratio,diff,ci95";

/// CSV with [`CONVERGENCE_CSV_HEADER`]; a missing `mean_zopt` is left blank.
pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let mut out = String::from(CONVERGENCE_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let zopt = r.mean_zopt.map(|z| format!("{z:.6}")).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{:.6},{:.6},{},{:.6},{:.6},{:.6}\n",
            r.columns, r.samples, r.mean_s0, r.mean_zh, zopt, r.ratio, r.diff, r.ci95
        ));
    }
    out
}

/// Least-squares fit of `ratio - 1 = c / C`; returns `(c, R^2)`.
pub fn fit_inverse_c(rows: &[ConvergenceRow]) -> Option<(f64, f64)> {
    if rows.len() < 2 {
        return None;
    }
    let xs: Vec<f64> = rows.iter().map(|r| 1.0 / r.columns as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.ratio - 1.0).collect();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let c = xs.iter().zip(&ys).map(|(x, y)| x * y).sum::<f64>() / sxx;
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - c * x).powi(2)).sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Some((c, r2))
}

/// Mean of `S0` over `samples` uniform bays, for checking `alpha_h C`.
pub fn mean_s0(h: usize, columns: usize, samples: usize, seed: u64) -> MeanCi {
    let spec = InstanceSpec::new(h + 1, columns, h, seed);
    let values: Vec<f64> = (0..samples)
        .map(|i| s0(&spec.generate_nth(i as u64).expect("valid spec")) as f64)
        .collect();
    MeanCi::of(&values)
}

/// Seeded RNG for the special-column experiment at a given `C`.
pub fn special_column_rng(seed: u64, c: usize) -> rand_chacha::ChaCha8Rng {
    instance_rng(seed, c as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Blocking counts of every ordering of `h` distinct labels.
    fn enumerate_column(h: usize) -> Vec<f64> {
        let mut counts = vec![0.0; h.max(1)];
        let perms = all_scenarios(h);
        let total = perms.len() as f64;
        for p in perms {
            let mut min = u32::MAX;
            let mut blocking = 0;
            for &l in &p.0 {
                if l > min {
                    blocking += 1;
                } else {
                    min = l;
                }
            }
            counts[blocking] += 1.0 / total;
        }
        counts
    }

    #[test]
    fn block_dist_matches_enumeration() {
        for h in 1..=6 {
            let d = block_dist(h);
            let e = enumerate_column(h);
            assert_eq!(d.probabilities.len(), e.len());
            for (a, b) in d.probabilities.iter().zip(&e) {
                assert!((a - b).abs() < 1e-12, "h={h}: {:?} vs {:?}", d.probabilities, e);
            }
            assert!((d.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            let fact: f64 = (1..=h).map(|k| k as f64).product();
            assert!((d.p(0) - 1.0 / fact).abs() < 1e-12);
        }
        assert_eq!(block_dist(1).probabilities, vec![1.0]);
        assert_eq!(block_dist(2).probabilities, vec![0.5, 0.5]);
    }

    #[test]
    fn alpha_values() {
        assert_eq!(alpha(1), 0.0);
        assert!((alpha(3) - 7.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn theta_values() {
        assert_eq!(theta(1), 0.125);
        assert!((theta(3) - (1.0 / 24.0) * (1.0f64 / 6.0).powi(6)).abs() < 1e-18);
    }

    #[test]
    fn f_decreases_to_one() {
        let k = AsymptoticConstants::new(2, 4, 0.3);
        assert!(k.f(10) > k.f(20));
        assert!(k.f(20) > 1.0);
        assert!((k.f(usize::MAX) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn trivial_special_column() {
        let mut rng = instance_rng(1, 0);
        let s = special_column_check(1, 5, 1000, &mut rng);
        assert_eq!(s.frequency, 0.0);
    }

    #[test]
    fn exact_g_for_small_bays() {
        let g = estimate_g(2, 3, 3, 0, 0, GMode::Optimal { budget: 1_000_000 });
        assert!(g.exact);
        assert_eq!(g.estimate.samples, 720);
        assert_eq!(g.unsolved, 0);
        let proxy = estimate_g(2, 3, 3, 0, 0, GMode::Heuristic);
        assert!(proxy.estimate.mean >= g.estimate.mean);
    }

    #[test]
    fn csv_layout() {
        let rows = convergence_experiment(2, 3, &[3], 20, 5, None);
        let csv = convergence_csv(&rows);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(CONVERGENCE_CSV_HEADER));
        assert_eq!(lines.next().unwrap().split(',').count(), 8);
        assert!(rows[0].ratio >= 1.0);
    }
}
