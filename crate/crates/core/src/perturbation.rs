//! Closed-form and semi-analytic predictions for `L_D⁰ + α L_U`.
//!
//! `L_D⁰` is diagonal in the Pauli basis with eigenvalue `λ₀(k)` on weight-`k`
//! strings, and a 2-local `L_U` only connects weights `k` and `k ± 1`. Shifts
//! of non-degenerate clusters start at second order; degenerate adjacent
//! weights split at first order.

use std::fmt::Write as _;

use faer::Mat;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::ensemble::HamiltonianSpec;
use crate::error::{Error, Result};
use crate::liouvillian::{lambda0, lambda0_numerator, unitary_pauli_matrix};
use crate::pauli::PauliBasis;

fn check_weight(k: usize, num_sites: usize) -> Result<()> {
    if num_sites < 2 || k > num_sites {
        return Err(Error::InvalidBounds(format!("weight {k} on {num_sites} sites")));
    }
    Ok(())
}

/// Number of non-zero `L_U` elements linking one weight-`k` string to
/// weight `k'` strings: `6k(ℓ−k)` upwards, `2k(k−1)` downwards.
pub fn h_count(k: usize, k_prime: usize, num_sites: usize) -> Result<u64> {
    check_weight(k, num_sites)?;
    check_weight(k_prime, num_sites)?;
    let (k64, l) = (k as u64, num_sites as u64);
    if k_prime == k + 1 {
        Ok(6 * k64 * (l - k64))
    } else if k_prime + 1 == k {
        Ok(2 * k64 * (k64 - 1))
    } else {
        Err(Error::NotAdjacent(k, k_prime))
    }
}

fn neighbours(k: usize, num_sites: usize) -> impl Iterator<Item = usize> {
    [k.checked_sub(1), (k < num_sites).then_some(k + 1)].into_iter().flatten()
}

fn degenerate(k: usize, m: usize, num_sites: usize) -> bool {
    lambda0_numerator(k, num_sites) == lambda0_numerator(m, num_sites)
}

/// Gaussian average `⟨λ₂(k)⟩ = 8/(9ℓ(ℓ−1)) Σ_{m=k±1} h(k,m)/(λ₀(m)−λ₀(k))`.
pub fn second_order_mean(k: usize, num_sites: usize) -> Result<f64> {
    check_weight(k, num_sites)?;
    let l = num_sites as f64;
    let l0 = lambda0(k, num_sites)?;
    let mut sum = 0.0;
    for m in neighbours(k, num_sites) {
        let h = h_count(k, m, num_sites)?;
        if h == 0 {
            continue;
        }
        if degenerate(k, m, num_sites) {
            return Err(Error::Degenerate { k, m });
        }
        sum += h as f64 / (lambda0(m, num_sites)? - l0);
    }
    Ok(8.0 / (9.0 * l * (l - 1.0)) * sum)
}

/// Mean second-order shift of the weight-`k` cluster for one Hamiltonian,
/// `(1/n_k) Σ_i Σ_j (L^U_{ji})² / (λ₀(m_j) − λ₀(k))`.
pub fn second_order_exact(k: usize, h: &HamiltonianSpec) -> Result<f64> {
    let l = h.num_sites;
    check_weight(k, l)?;
    let lo = k.saturating_sub(1);
    let hi = (k + 1).min(l);
    let basis = PauliBasis::with_weights(l, lo, hi)?;
    let lu = unitary_pauli_matrix(h, &basis)?;
    let l0 = lambda0(k, l)?;
    let mut denominators = [0.0f64; 2];
    for m in neighbours(k, l) {
        if h_count(k, m, l)? > 0 && degenerate(k, m, l) {
            return Err(Error::Degenerate { k, m });
        }
        denominators[usize::from(m > k)] = lambda0(m, l)? - l0;
    }
    let sector = basis.sector(k);
    let n_k = sector.len() as f64;
    let mut total = 0.0;
    for i in sector {
        for x in 0..basis.len() {
            let m = basis.weight_of(x);
            if m == k {
                continue;
            }
            let v = lu.get(x, i);
            if v != 0.0 {
                total += v * v / denominators[usize::from(m > k)];
            }
        }
    }
    Ok(total / n_k)
}

/// `λ₀(k) + ⟨λ₂(k)⟩ α²`.
pub fn predicted_center(k: usize, num_sites: usize, alpha: f64) -> Result<f64> {
    Ok(lambda0(k, num_sites)? + second_order_mean(k, num_sites)? * alpha * alpha)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegenerateGroup {
    pub weights: Vec<usize>,
    /// Whether two members differ by one, so `L_U` couples them at first order.
    pub consecutive: bool,
}

/// Partition of `0..=ℓ` by exact equality of `λ₀`.
pub fn degenerate_groups(num_sites: usize) -> Vec<DegenerateGroup> {
    let mut groups: Vec<(i128, Vec<usize>)> = Vec::new();
    for k in 0..=num_sites {
        let key = lambda0_numerator(k, num_sites);
        match groups.iter_mut().find(|(n, _)| *n == key) {
            Some((_, w)) => w.push(k),
            None => groups.push((key, vec![k])),
        }
    }
    groups
        .into_iter()
        .map(|(_, weights)| DegenerateGroup {
            consecutive: weights.windows(2).any(|w| w[1] == w[0] + 1),
            weights,
        })
        .collect()
}

/// `k± = 3ℓ/4 ± 1/2` when `ℓ ≡ 2 (mod 4)`.
pub fn consecutive_degenerate_pair(num_sites: usize) -> Option<(usize, usize)> {
    (num_sites % 4 == 2).then(|| ((3 * num_sites - 2) / 4, (3 * num_sites + 2) / 4))
}

#[derive(Clone, Debug)]
pub struct FirstOrderBlock {
    pub k_minus: usize,
    pub k_plus: usize,
    /// `[[0, V], [−Vᵀ, 0]]` over the union of both sectors.
    pub matrix: Mat<f64>,
    /// `±iμ` from the singular values of `V`, plus zeros.
    pub eigenvalues: Vec<C64>,
    /// `Tr(M†M)/dim`.
    pub mean_sq_modulus: f64,
}

/// `L_U` restricted to two adjacent degenerate sectors.
pub fn first_order_block(h: &HamiltonianSpec, k_minus: usize, k_plus: usize) -> Result<FirstOrderBlock> {
    let l = h.num_sites;
    check_weight(k_minus, l)?;
    check_weight(k_plus, l)?;
    if k_minus.abs_diff(k_plus) != 1 {
        return Err(Error::NotAdjacent(k_minus, k_plus));
    }
    let (lo, hi) = (k_minus.min(k_plus), k_minus.max(k_plus));
    let basis = PauliBasis::with_weights(l, lo, hi)?;
    let lu = unitary_pauli_matrix(h, &basis)?;
    let dim = basis.len();
    let matrix = lu.to_dense_real();
    let mean_sq_modulus = (0..dim)
        .map(|i| (0..dim).map(|j| matrix[(i, j)].powi(2)).sum::<f64>())
        .sum::<f64>()
        / dim as f64;

    let low = basis.sector(lo);
    let high = basis.sector(hi);
    let v = Mat::<f64>::from_fn(low.len(), high.len(), |i, j| matrix[(low.start + i, high.start + j)]);
    let sv = v.singular_values().map_err(|_| Error::Eigensolver {
        rows: v.nrows(),
        fingerprint: 0,
    })?;
    let mut eigenvalues = Vec::with_capacity(dim);
    for &s in &sv {
        eigenvalues.push(C64::new(0.0, s));
        eigenvalues.push(C64::new(0.0, -s));
    }
    eigenvalues.resize(dim, C64::new(0.0, 0.0));
    Ok(FirstOrderBlock {
        k_minus,
        k_plus,
        matrix,
        eigenvalues,
        mean_sq_modulus,
    })
}

/// `std(Im λ)` of `L_U` when `Tr H = 0` and `Tr H² = N`.
pub fn unitary_im_std_prediction() -> f64 {
    std::f64::consts::SQRT_2
}

/// Standard deviation of `E_n − E_m` over all ordered pairs of eigenvalues of `H`.
pub fn unitary_im_std(h: &HamiltonianSpec) -> Result<f64> {
    let dense = h.to_dense()?;
    let energies = dense
        .self_adjoint_eigenvalues(faer::Side::Lower)
        .map_err(|_| Error::Eigensolver {
            rows: dense.nrows(),
            fingerprint: 0,
        })?;
    let n = energies.len() as f64;
    let mean = energies.iter().sum::<f64>() / n;
    let var = energies.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / n;
    // Var(E_n − E_m) over independent uniform n, m is twice Var(E).
    Ok((2.0 * var).sqrt())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PredictionRow {
    pub sites: usize,
    pub k: usize,
    pub lambda0: f64,
    pub h_up: u64,
    pub h_down: u64,
    /// `None` where a neighbour is degenerate.
    pub lambda2_mean: Option<f64>,
    pub centers: Vec<(f64, Option<f64>)>,
}

pub fn prediction_table(num_sites: usize, alphas: &[f64]) -> Result<Vec<PredictionRow>> {
    (0..=num_sites)
        .map(|k| {
            let lambda2 = match second_order_mean(k, num_sites) {
                Ok(v) => Some(v),
                Err(Error::Degenerate { .. }) => None,
                Err(e) => return Err(e),
            };
            let l0 = lambda0(k, num_sites)?;
            Ok(PredictionRow {
                sites: num_sites,
                k,
                lambda0: l0,
                h_up: if k < num_sites { h_count(k, k + 1, num_sites)? } else { 0 },
                h_down: if k > 0 { h_count(k, k - 1, num_sites)? } else { 0 },
                lambda2_mean: lambda2,
                centers: alphas.iter().map(|&a| (a, lambda2.map(|c| l0 + c * a * a))).collect(),
            })
        })
        .collect()
}

/// CSV with 17 significant digits; degenerate predictions are left empty.
pub fn prediction_csv(rows: &[PredictionRow]) -> String {
    let mut out = String::from("sites,k,lambda0,h_up,h_down,lambda2_mean");
    if let Some(first) = rows.first() {
        for (a, _) in &first.centers {
            write!(out, ",center_alpha_{a}").unwrap();
        }
    }
    out.push('\n');
    let fmt = |v: Option<f64>| v.map(|x| format!("{x:.16e}")).unwrap_or_default();
    for r in rows {
        write!(
            out,
            "{},{},{:.16e},{},{},{}",
            r.sites,
            r.k,
            r.lambda0,
            r.h_up,
            r.h_down,
            fmt(r.lambda2_mean)
        )
        .unwrap();
        for (_, c) in &r.centers {
            write!(out, ",{}", fmt(*c)).unwrap();
        }
        out.push('\n');
    }
    out
}
