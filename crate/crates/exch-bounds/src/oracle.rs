//! Exact small-instance ground truth by enumerating ordered
//! without-replacement draws: the exact law of the weighted sum, exact MGFs
//! and tails, dominance scans against certificates, supermartingale
//! one-step checks, and a tightness search for the inflation factor.
//!
//! All routines here are deliberately brute force; they exist to certify
//! the closed-form bounds, not to scale.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::bounds::{BoundKind, MgfCertificate};
use crate::error::{Error, Result};
use crate::numerics::{Population, WeightVector};

/// Largest number of ordered draws `N!/(N-n)!` an enumeration may touch.
pub const ORDERING_BUDGET: u128 = 10_000_000;

/// Absolute tolerance for merging equal atoms of the exact law.
pub const ATOM_MERGE_TOL: f64 = 1e-12;

/// A dominance scan passes when every margin is at least this.
pub const DOMINANCE_TOL: f64 = -1e-10;

/// A supermartingale check passes when every one-step ratio is at most
/// `1 + MARTINGALE_TOL`.
pub const MARTINGALE_TOL: f64 = 1e-10;

/// Largest instance size for the supermartingale and suffix-variance
/// checks.
pub const MARTINGALE_CAP: usize = 7;

/// Grids over an infinite lambda domain default to `[-2, 2]`.
pub const DEFAULT_LAMBDA_RANGE: f64 = 2.0;

/// Grids over a finite lambda domain stop at this fraction of the half
/// width, away from the boundary where Bernstein exponents diverge.
pub const DOMAIN_CLIP: f64 = 0.995;

fn falling_factorial(big_n: usize, n: usize) -> Result<u128> {
    let mut acc: u128 = 1;
    for k in 0..n {
        acc = acc.saturating_mul((big_n - k) as u128);
        if acc > ORDERING_BUDGET {
            return Err(Error::BudgetExceeded {
                required: acc,
                budget: ORDERING_BUDGET,
            });
        }
    }
    Ok(acc)
}

/// The exact distribution of `S = sum_{k<=n} w_k (X_k - xbar)` under
/// uniformly random ordered draws of `n` of the `N` population values.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactLaw {
    atoms: Vec<(f64, f64)>,
    n: usize,
    big_n: usize,
    source_digest: String,
}

impl ExactLaw {
    /// Atoms as `(value, probability)`, sorted by value.
    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn big_n(&self) -> usize {
        self.big_n
    }

    /// Content hash of `(x, w, n)`, the cache key.
    pub fn source_digest(&self) -> &str {
        &self.source_digest
    }

    pub fn mean(&self) -> f64 {
        self.atoms.iter().map(|(s, p)| s * p).sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.atoms.iter().map(|(s, p)| p * (s - m) * (s - m)).sum()
    }

    /// Exact MGF `E[exp(lambda S)] = sum p_j exp(lambda s_j)`.
    pub fn mgf(&self, lambda: f64) -> f64 {
        self.atoms.iter().map(|(s, p)| p * (lambda * s).exp()).sum()
    }

    pub fn log_mgf(&self, lambda: f64) -> f64 {
        self.mgf(lambda).ln()
    }

    /// Exact right-closed tail `P(S >= t)`.
    pub fn tail(&self, t: f64) -> f64 {
        self.atoms.iter().filter(|(s, _)| *s >= t).map(|(_, p)| p).sum()
    }

    /// Serializes into the versioned cache format.
    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        let mut out = String::new();
        out.push_str("exact-law/v1\n");
        out.push_str(&format!("digest {}\n", self.source_digest));
        out.push_str(&format!("n {}\nN {}\natoms {}\n", self.n, self.big_n, self.atoms.len()));
        for (s, p) in &self.atoms {
            out.push_str(&format!("{:016x} {:016x}\n", s.to_bits(), p.to_bits()));
        }
        let mut f = fs::File::create(path)?;
        f.write_all(out.as_bytes())
    }

    /// Reads the cache format back; `None` on any mismatch (wrong schema
    /// tag, truncation, parse failure), so stale caches recompute.
    pub fn load(path: &Path) -> Option<Self> {
        let text = fs::read_to_string(path).ok()?;
        let mut lines = text.lines();
        if lines.next()? != "exact-law/v1" {
            return None;
        }
        let digest = lines.next()?.strip_prefix("digest ")?.to_string();
        let n: usize = lines.next()?.strip_prefix("n ")?.parse().ok()?;
        let big_n: usize = lines.next()?.strip_prefix("N ")?.parse().ok()?;
        let count: usize = lines.next()?.strip_prefix("atoms ")?.parse().ok()?;
        let mut atoms = Vec::with_capacity(count);
        for _ in 0..count {
            let line = lines.next()?;
            let (s, p) = line.split_once(' ')?;
            atoms.push((
                f64::from_bits(u64::from_str_radix(s, 16).ok()?),
                f64::from_bits(u64::from_str_radix(p, 16).ok()?),
            ));
        }
        Some(Self {
            atoms,
            n,
            big_n,
            source_digest: digest,
        })
    }
}

fn source_digest(pop: &Population, w: &WeightVector, n: usize) -> String {
    let mut hasher = Sha256::new();
    hasher.update(b"exact-law/v1");
    hasher.update((pop.len() as u64).to_le_bytes());
    hasher.update((w.len() as u64).to_le_bytes());
    hasher.update((n as u64).to_le_bytes());
    for x in pop.values() {
        hasher.update(x.to_bits().to_le_bytes());
    }
    for v in w.entries() {
        hasher.update(v.to_bits().to_le_bytes());
    }
    format!("{:x}", hasher.finalize())
}

fn enumerate_sums(centered: &[f64], weights: &[f64], count: usize) -> Vec<f64> {
    let big_n = centered.len();
    let n = weights.len();
    let mut sums = Vec::with_capacity(count);
    let mut used = vec![false; big_n];
    // Depth-first over ordered index selections; `partial` carries the
    // weighted sum of the chosen prefix.
    fn recurse(
        centered: &[f64],
        weights: &[f64],
        depth: usize,
        partial: f64,
        used: &mut [bool],
        sums: &mut Vec<f64>,
    ) {
        if depth == weights.len() {
            sums.push(partial);
            return;
        }
        for j in 0..centered.len() {
            if !used[j] {
                used[j] = true;
                recurse(
                    centered,
                    weights,
                    depth + 1,
                    partial + weights[depth] * centered[j],
                    used,
                    sums,
                );
                used[j] = false;
            }
        }
    }
    recurse(centered, weights, 0, 0.0, &mut used, &mut sums);
    debug_assert_eq!(sums.len(), n.min(usize::MAX) * 0 + count);
    sums
}

/// Enumerates every ordered selection of `n` of the `N` indices, computing
/// `S = sum w_k (x_{pi(k)} - xbar)` with equal probability each, and merges
/// atoms within [`ATOM_MERGE_TOL`].
pub fn exact_law(pop: &Population, w: &WeightVector, n: usize) -> Result<ExactLaw> {
    if n == 0 || n != w.len() {
        return Err(Error::Domain(format!(
            "draw size n = {n} must match the weight count {}",
            w.len()
        )));
    }
    if n > pop.len() {
        return Err(Error::Domain(format!(
            "cannot draw n = {n} from a population of {}",
            pop.len()
        )));
    }
    let count = falling_factorial(pop.len(), n)? as usize;
    let mean = pop.mean();
    let centered: Vec<f64> = pop.values().iter().map(|x| x - mean).collect();
    let mut sums = enumerate_sums(&centered, w.entries(), count);
    sums.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut atoms = Vec::new();
    let prob = 1.0 / count as f64;
    let mut i = 0;
    while i < sums.len() {
        let anchor = sums[i];
        let mut j = i;
        let mut total = 0.0;
        while j < sums.len() && sums[j] - anchor <= ATOM_MERGE_TOL {
            total += sums[j];
            j += 1;
        }
        let width = (j - i) as f64;
        atoms.push((total / width, width * prob));
        i = j;
    }
    Ok(ExactLaw {
        atoms,
        n,
        big_n: pop.len(),
        source_digest: source_digest(pop, w, n),
    })
}

/// [`exact_law`] with a file cache keyed by the source digest.
pub fn exact_law_cached(dir: &Path, pop: &Population, w: &WeightVector, n: usize) -> Result<ExactLaw> {
    let digest = source_digest(pop, w, n);
    let path: PathBuf = dir.join(format!("{digest}.law"));
    if let Some(law) = ExactLaw::load(&path) {
        if law.source_digest == digest && law.n == n {
            return Ok(law);
        }
    }
    let law = exact_law(pop, w, n)?;
    fs::create_dir_all(dir).map_err(|e| Error::Domain(format!("cache dir: {e}")))?;
    law.save(&path)
        .map_err(|e| Error::Domain(format!("cache write: {e}")))?;
    Ok(law)
}

/// Margin of a certificate over the exact log-MGF at one grid point.
#[derive(Debug, Clone, Copy)]
pub struct LambdaMargin {
    pub lambda: f64,
    /// `exponent(lambda) - log E[exp(lambda S)]`; nonnegative when the
    /// certificate holds.
    pub margin: f64,
    /// True when `lambda` lies past the certificate's conservative half
    /// width (the contested part of the Bernstein-exchangeable domain).
    pub contested: bool,
}

/// Result of scanning a certificate against the exact law on a lambda grid.
#[derive(Debug, Clone)]
pub struct DominanceScan {
    pub kind: BoundKind,
    pub margins: Vec<LambdaMargin>,
    pub min_margin: f64,
    pub min_lambda: f64,
    /// Minimum margin over the contested region only, when the grid
    /// touches one; informational, never part of `pass`.
    pub contested_min_margin: Option<f64>,
    pub pass: bool,
}

/// Symmetric verification grid for a certificate: `grid_size` evenly spaced
/// points over `[-L, L]` where `L` is [`DOMAIN_CLIP`] times the half width
/// (or [`DEFAULT_LAMBDA_RANGE`] when the domain is all of R).
pub fn verification_grid(cert: &MgfCertificate, grid_size: usize) -> Result<Vec<f64>> {
    if grid_size < 2 {
        return Err(Error::Domain(format!(
            "lambda grid needs at least 2 points, got {grid_size}"
        )));
    }
    let h = cert.lambda_half_width();
    let limit = if h.is_finite() {
        DOMAIN_CLIP * h
    } else {
        DEFAULT_LAMBDA_RANGE
    };
    let step = 2.0 * limit / (grid_size - 1) as f64;
    Ok((0..grid_size).map(|i| -limit + i as f64 * step).collect())
}

/// Scans a certificate against an already-computed exact law.
pub fn mgf_dominance_scan_law(
    law: &ExactLaw,
    cert: &MgfCertificate,
    grid_size: usize,
) -> Result<DominanceScan> {
    let grid = verification_grid(cert, grid_size)?;
    let conservative = cert.conservative_half_width();
    let mut margins = Vec::with_capacity(grid.len());
    let mut min_margin = f64::INFINITY;
    let mut min_lambda = 0.0;
    let mut contested_min = f64::INFINITY;
    let mut saw_contested = false;
    for lambda in grid {
        let margin = cert.exponent(lambda)? - law.log_mgf(lambda);
        let contested = lambda.abs() >= conservative;
        if contested {
            saw_contested = true;
            contested_min = contested_min.min(margin);
        }
        if margin < min_margin {
            min_margin = margin;
            min_lambda = lambda;
        }
        margins.push(LambdaMargin {
            lambda,
            margin,
            contested,
        });
    }
    Ok(DominanceScan {
        kind: cert.kind(),
        margins,
        min_margin,
        min_lambda,
        contested_min_margin: saw_contested.then_some(contested_min),
        pass: min_margin >= DOMINANCE_TOL,
    })
}

/// Enumerates the exact law of `(x, w, n)` and scans `cert` against it.
pub fn mgf_dominance_scan(
    pop: &Population,
    w: &WeightVector,
    n: usize,
    cert: &MgfCertificate,
    grid_size: usize,
) -> Result<DominanceScan> {
    let law = exact_law(pop, w, n)?;
    mgf_dominance_scan_law(&law, cert, grid_size)
}

/// Which supermartingale construction to check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MartingaleFamily {
    /// `M_k = exp(lambda sum v_i (X_i - suffix mean) - (lambda^2/2) sum v_i^2)`.
    Hoeffding,
    /// The variance-adaptive variant with per-step `v_i^2 sigma^2_{X>=i}`.
    Bernstein,
}

impl MartingaleFamily {
    pub fn as_str(&self) -> &'static str {
        match self {
            MartingaleFamily::Hoeffding => "hoeffding",
            MartingaleFamily::Bernstein => "bernstein",
        }
    }
}

/// Outcome of an exact one-step supermartingale check.
#[derive(Debug, Clone, Copy)]
pub struct MartingaleReport {
    pub family: MartingaleFamily,
    pub lambda: f64,
    /// Largest conditional ratio `E[M_k | prefix] / M_{k-1}` found.
    pub worst_ratio: f64,
    /// Number of distinct prefix index sets examined.
    pub states_checked: u64,
    /// For the Bernstein family, false when `lambda` lies between the two
    /// stated domain constants `2/(3 |v|_inf)` and `3/(2 |v|_inf)`; the
    /// ratio is then reported but carries no guarantee.
    pub asserted: bool,
    pub pass: bool,
}

/// Checks `E[M_k | prefix] <= M_{k-1} (1 + MARTINGALE_TOL)` for every
/// reachable prefix, exactly, by averaging over the remaining values.
///
/// The one-step ratio depends on a prefix only through its index set (the
/// remaining multiset fixes the conditional mean and variance, and in the
/// `n = N` setting the population mean and variance are deterministic), so
/// enumerating index subsets covers every ordering.
pub fn martingale_check(
    pop: &Population,
    v: &WeightVector,
    lambda: f64,
    family: MartingaleFamily,
) -> Result<MartingaleReport> {
    let n = pop.len();
    if n > MARTINGALE_CAP {
        return Err(Error::BudgetExceeded {
            required: falling_factorial(n, n).map(|c| c).unwrap_or(u128::MAX),
            budget: falling_factorial(MARTINGALE_CAP, MARTINGALE_CAP)?,
        });
    }
    if v.len() != n {
        return Err(Error::Domain(format!(
            "weight count {} must match the population size {n}",
            v.len()
        )));
    }
    if !lambda.is_finite() {
        return Err(Error::Domain(format!("lambda must be finite, got {lambda}")));
    }
    let norm_inf = v.norm_inf();
    let (bern_coeff, asserted) = match family {
        MartingaleFamily::Hoeffding => (0.0, true),
        MartingaleFamily::Bernstein => {
            let hard_limit = 3.0 / (2.0 * norm_inf);
            if lambda.abs() >= hard_limit {
                return Err(Error::Domain(format!(
                    "lambda = {lambda} outside |lambda| < 3/(2 |v|_inf) = {hard_limit}"
                )));
            }
            let coeff = lambda * lambda / (2.0 * (1.0 - 2.0 * lambda.abs() / 3.0 * norm_inf));
            (coeff, lambda.abs() < 2.0 / (3.0 * norm_inf))
        }
    };

    let x = pop.values();
    let weights = v.entries();
    let mut worst: f64 = f64::NEG_INFINITY;
    let mut states = 0u64;
    for mask in 0u32..(1u32 << n) {
        let k = mask.count_ones() as usize;
        if k >= n {
            continue; // no step n+1
        }
        let remaining: Vec<f64> = (0..n).filter(|j| mask & (1 << j) == 0).map(|j| x[j]).collect();
        let m = remaining.iter().sum::<f64>() / remaining.len() as f64;
        let step_weight = weights[k];
        let penalty = match family {
            MartingaleFamily::Hoeffding => lambda * lambda * step_weight * step_weight / 2.0,
            MartingaleFamily::Bernstein => {
                let var = remaining.iter().map(|z| (z - m) * (z - m)).sum::<f64>()
                    / remaining.len() as f64;
                bern_coeff * step_weight * step_weight * var
            }
        };
        let ratio = remaining
            .iter()
            .map(|z| (lambda * step_weight * (z - m) - penalty).exp())
            .sum::<f64>()
            / remaining.len() as f64;
        worst = worst.max(ratio);
        states += 1;
    }
    Ok(MartingaleReport {
        family,
        lambda,
        worst_ratio: worst,
        states_checked: states,
        asserted,
        pass: worst <= 1.0 + MARTINGALE_TOL,
    })
}

/// Outcome of the suffix-variance domination check.
#[derive(Debug, Clone, Copy)]
pub struct SuffixVarianceReport {
    /// Largest value of `suffix variance - suffix mean of squared
    /// deviations` over all permutations and positions; nonpositive (up to
    /// rounding) when the domination holds.
    pub max_gap: f64,
    pub permutations_checked: u64,
    pub pass: bool,
}

/// Verifies `sigma^2_{x>=i} <= (B_n xtilde)_i` for every permutation of the
/// population and every position `i`, with `xtilde_i = (x_i - xbar)^2`
/// built from the full-vector mean.
pub fn suffix_variance_domination_check(pop: &Population) -> Result<SuffixVarianceReport> {
    let n = pop.len();
    if n > MARTINGALE_CAP {
        return Err(Error::BudgetExceeded {
            required: falling_factorial(n, n).unwrap_or(u128::MAX),
            budget: falling_factorial(MARTINGALE_CAP, MARTINGALE_CAP)?,
        });
    }
    let xbar = pop.mean();
    let mut max_gap = f64::NEG_INFINITY;
    let mut perms = 0u64;
    for perm in (0..n).permutations(n) {
        let x: Vec<f64> = perm.iter().map(|&j| pop.values()[j]).collect();
        for i in 0..n {
            let tail = &x[i..];
            let m = tail.iter().sum::<f64>() / tail.len() as f64;
            let lhs = tail.iter().map(|z| (z - m) * (z - m)).sum::<f64>() / tail.len() as f64;
            let rhs = tail.iter().map(|z| (z - xbar) * (z - xbar)).sum::<f64>() / tail.len() as f64;
            max_gap = max_gap.max(lhs - rhs);
        }
        perms += 1;
    }
    Ok(SuffixVarianceReport {
        max_gap,
        permutations_checked: perms,
        pass: max_gap <= ATOM_MERGE_TOL,
    })
}

/// Best instance found by [`tightness_search`].
#[derive(Debug, Clone)]
pub struct TightnessWitness {
    /// `sup_lambda log E[exp(lambda S)] / (lambda^2 |w|_2^2 / 2)`; the
    /// uninflated Hoeffding exponent is tight iff this is at most 1.
    pub ratio: f64,
    pub lambda: f64,
    pub population: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Report of a random-restart search for the worst inflation ratio. Gathers
/// evidence only; asserts nothing.
#[derive(Debug, Clone)]
pub struct TightnessReport {
    pub trials: u64,
    pub best: Option<TightnessWitness>,
}

fn inflation_ratio(pop: &Population, w: &WeightVector) -> Result<(f64, f64)> {
    let norm_sq = w.norm2() * w.norm2();
    if norm_sq < 1e-12 {
        return Ok((f64::NEG_INFINITY, 0.0));
    }
    let law = exact_law(pop, w, w.len())?;
    // The lambda -> 0 limit of the ratio is Var(S) / |w|_2^2.
    let mut best = (law.variance() / norm_sq, 0.0);
    for i in 1..=8 {
        let lambda = 0.25 * i as f64;
        let ratio = law.log_mgf(lambda) / (lambda * lambda * norm_sq / 2.0);
        if ratio > best.0 {
            best = (ratio, lambda);
        }
    }
    Ok(best)
}

/// Coordinate-wise hill climbing with restarts seeded from sign-valued
/// populations, maximizing the MGF inflation ratio over `x` and `w`.
pub fn tightness_search(
    big_n: usize,
    n: usize,
    trials: u64,
    seed: u64,
    nonnegative_weights: bool,
) -> Result<TightnessReport> {
    if n == 0 || n > big_n {
        return Err(Error::Domain(format!(
            "search needs 1 <= n <= N, got n = {n}, N = {big_n}"
        )));
    }
    falling_factorial(big_n, n)?;
    let mut best: Option<TightnessWitness> = None;
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial);
        let mut x: Vec<f64> = (0..big_n)
            .map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 })
            .collect();
        let mut w: Vec<f64> = (0..n)
            .map(|_| {
                let u = rng.gen_range(-1.0..=1.0f64);
                if nonnegative_weights {
                    u.abs()
                } else {
                    u
                }
            })
            .collect();
        let eval = |x: &[f64], w: &[f64]| -> Result<(f64, f64)> {
            inflation_ratio(
                &Population::new(x.to_vec())?,
                &WeightVector::new(w.to_vec())?,
            )
        };
        let mut current = eval(&x, &w)?;
        for &step in &[0.5, 0.25, 0.1] {
            loop {
                let mut improved = false;
                for i in 0..big_n {
                    for dir in [-1.0, 1.0] {
                        let old = x[i];
                        x[i] = (old + dir * step).clamp(-1.0, 1.0);
                        let cand = eval(&x, &w)?;
                        if cand.0 > current.0 + 1e-12 {
                            current = cand;
                            improved = true;
                        } else {
                            x[i] = old;
                        }
                    }
                }
                let w_floor = if nonnegative_weights { 0.0 } else { -1.0 };
                for i in 0..n {
                    for dir in [-1.0, 1.0] {
                        let old = w[i];
                        w[i] = (old + dir * step).clamp(w_floor, 1.0);
                        let cand = eval(&x, &w)?;
                        if cand.0 > current.0 + 1e-12 {
                            current = cand;
                            improved = true;
                        } else {
                            w[i] = old;
                        }
                    }
                }
                if !improved {
                    break;
                }
            }
        }
        if best.as_ref().map_or(true, |b| current.0 > b.ratio) {
            best = Some(TightnessWitness {
                ratio: current.0,
                lambda: current.1,
                population: x,
                weights: w,
            });
        }
    }
    Ok(TightnessReport { trials, best })
}
