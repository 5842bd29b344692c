//! Superoperator assembly.
//!
//! Two representations are supported:
//!
//! * `ComputationalVec`: column-stacking vectorization, `vec(AρB) = (Bᵀ⊗A) vec(ρ)`,
//!   with `vec(ρ)[i + N·j] = ρ_ij`.
//! * `PauliBasis`: the orthonormal basis `S = P/√N` over all `4^ℓ` Pauli
//!   strings in [`PauliBasis::full`] order. Hermiticity-preserving maps are
//!   real matrices here.
//!
//! Jump operators are the Hermitian strings `L_n = P_n/√N`; the Kossakowski
//! matrix carries any rotation, so rotated operators are never materialized.

use std::io::{Read, Write};
use std::path::Path;

use faer::{Mat, Side};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::ensemble::{HamiltonianSpec, KossakowskiSample};
use crate::error::{Error, Result};
use crate::linalg;
use crate::pauli::{sector_size, Monomial, PauliBasis, PauliString};

/// Largest chain the dense `4^ℓ × 4^ℓ` assembly accepts without override.
pub const MAX_SUPEROPERATOR_SITES: usize = 6;
/// Hard ceiling regardless of override.
pub const HARD_SUPEROPERATOR_SITES: usize = 7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BasisTag {
    ComputationalVec,
    PauliBasis,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PartTag {
    Full,
    UnitaryOnly,
    DissipatorFull,
    DissipatorDiag,
    DissipatorOffdiag,
}

impl PartTag {
    fn is_dissipator(self) -> bool {
        matches!(
            self,
            PartTag::DissipatorFull | PartTag::DissipatorDiag | PartTag::DissipatorOffdiag
        )
    }
}

/// Relative strength recorded on an assembled Liouvillian.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Strength {
    None,
    /// `L_D + α L_U`
    Alpha(f64),
    /// `L_U + β L_D`
    Beta(f64),
}

#[derive(Clone, Debug)]
pub struct Superoperator {
    pub num_sites: usize,
    pub matrix: Mat<C64>,
    pub basis: BasisTag,
    pub part: PartTag,
    pub strength: Strength,
    /// Seeds of the samples this operator was built from.
    pub lineage: Vec<u64>,
}

impl Superoperator {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn identity(num_sites: usize, basis: BasisTag) -> Result<Self> {
        let dim = superoperator_dim(num_sites, false)?;
        let mut m = Mat::<C64>::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        Ok(Superoperator {
            num_sites,
            matrix: m,
            basis,
            part: PartTag::Full,
            strength: Strength::None,
            lineage: Vec::new(),
        })
    }

    /// Largest entry of `⟨1| M`, which vanishes for trace-preserving generators.
    pub fn trace_preservation_error(&self) -> f64 {
        let m = &self.matrix;
        let dim = m.nrows();
        match self.basis {
            BasisTag::PauliBasis => (0..dim).map(|j| m[(0, j)].norm()).fold(0.0, f64::max),
            BasisTag::ComputationalVec => {
                let n = 1usize << self.num_sites;
                (0..dim)
                    .map(|j| (0..n).map(|i| m[(i + n * i, j)]).sum::<C64>().norm())
                    .fold(0.0, f64::max)
            }
        }
    }

    /// Writes `<stem>.json` (header) and `<stem>.bin` (row-major little-endian
    /// `re, im` doubles).
    pub fn write_dump(&self, stem: &Path) -> Result<()> {
        let header = DumpHeader {
            sites: self.num_sites,
            dim: self.dim(),
            basis_tag: self.basis,
            part_tag: self.part,
            strength: self.strength,
            seed_lineage: self.lineage.clone(),
            layout: "row-major complex128 little-endian (re, im)".into(),
        };
        std::fs::write(stem.with_extension("json"), serde_json::to_vec_pretty(&header)?)?;
        let mut buf = Vec::with_capacity(self.dim() * self.dim() * 16);
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                let v = self.matrix[(i, j)];
                buf.extend_from_slice(&v.re.to_le_bytes());
                buf.extend_from_slice(&v.im.to_le_bytes());
            }
        }
        std::fs::File::create(stem.with_extension("bin"))?.write_all(&buf)?;
        Ok(())
    }

    pub fn read_dump(stem: &Path) -> Result<Self> {
        let header: DumpHeader = serde_json::from_slice(&std::fs::read(stem.with_extension("json"))?)?;
        let mut raw = Vec::new();
        std::fs::File::open(stem.with_extension("bin"))?.read_to_end(&mut raw)?;
        let dim = header.dim;
        if raw.len() != dim * dim * 16 {
            return Err(Error::DimensionMismatch(format!(
                "dump holds {} bytes, header says {dim}x{dim}",
                raw.len()
            )));
        }
        let word = |k: usize| f64::from_le_bytes(raw[8 * k..8 * k + 8].try_into().unwrap());
        let matrix = Mat::<C64>::from_fn(dim, dim, |i, j| {
            let k = 2 * (i * dim + j);
            C64::new(word(k), word(k + 1))
        });
        Ok(Superoperator {
            num_sites: header.sites,
            matrix,
            basis: header.basis_tag,
            part: header.part_tag,
            strength: header.strength,
            lineage: header.seed_lineage,
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DumpHeader {
    pub sites: usize,
    pub dim: usize,
    pub basis_tag: BasisTag,
    pub part_tag: PartTag,
    pub strength: Strength,
    pub seed_lineage: Vec<u64>,
    pub layout: String,
}

/// `4^ℓ`, refusing chains beyond the dense guardrail.
pub fn superoperator_dim(num_sites: usize, allow_large: bool) -> Result<usize> {
    let limit = if allow_large {
        HARD_SUPEROPERATOR_SITES
    } else {
        MAX_SUPEROPERATOR_SITES
    };
    if num_sites == 0 || num_sites > limit {
        return Err(Error::ResourceLimit {
            what: "dense superoperator",
            sites: num_sites,
            limit,
        });
    }
    Ok(1usize << (2 * num_sites))
}

/// The traceless jump operators `P_n/√N` with `1 ≤ weight ≤ k_max`.
#[derive(Clone, Debug)]
pub struct JumpOperatorSet {
    basis: PauliBasis,
    monomials: Vec<Monomial>,
}

impl JumpOperatorSet {
    pub fn new(num_sites: usize, k_max: usize) -> Result<Self> {
        if k_max == 0 {
            return Err(Error::InvalidBounds("jump operators need k_max >= 1".into()));
        }
        let basis = PauliBasis::with_weights(num_sites, 1, k_max)?;
        let monomials = basis.strings().iter().map(|s| s.monomial()).collect();
        Ok(JumpOperatorSet { basis, monomials })
    }

    pub fn basis(&self) -> &PauliBasis {
        &self.basis
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn num_sites(&self) -> usize {
        self.basis.num_sites()
    }

    /// The scalar `1/√N` applied to every string.
    pub fn normalization(&self) -> f64 {
        1.0 / ((1u64 << self.num_sites()) as f64).sqrt()
    }

    pub fn dense(&self, n: usize) -> Result<Mat<C64>> {
        let mut m = self.basis.string_at(n).to_dense()?;
        let s = self.normalization();
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                m[(i, j)] *= s;
            }
        }
        Ok(m)
    }
}

fn check_coefficients(coeffs: &Mat<C64>, jumps: &JumpOperatorSet) -> Result<()> {
    if coeffs.nrows() != jumps.len() || coeffs.ncols() != jumps.len() {
        return Err(Error::DimensionMismatch(format!(
            "coefficient matrix is {}x{}, jump set has {} operators",
            coeffs.nrows(),
            coeffs.ncols(),
            jumps.len()
        )));
    }
    Ok(())
}

fn check_sample(k: &KossakowskiSample, jumps: &JumpOperatorSet) -> Result<()> {
    if k.num_sites != jumps.num_sites() {
        return Err(Error::SiteMismatch {
            left: k.num_sites,
            right: jumps.num_sites(),
        });
    }
    check_coefficients(&k.k_matrix, jumps)?;
    let min = k
        .k_matrix
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| Error::Eigensolver {
            rows: k.k_matrix.nrows(),
            fingerprint: linalg::fingerprint(k.k_matrix.as_ref()),
        })?
        .first()
        .copied()
        .unwrap_or(0.0);
    if min < -1e-10 {
        return Err(Error::NotPositive { min_eigenvalue: min });
    }
    Ok(())
}

/// `Σ_nm C_nm L_m† L_n = Σ_q g_q P_q`, indexed by the full Pauli basis.
fn anticommutator_generator(coeffs: &Mat<C64>, jumps: &JumpOperatorSet, full: &PauliBasis) -> Vec<C64> {
    let inv_n = 1.0 / (1u64 << jumps.num_sites()) as f64;
    let mut g = vec![C64::new(0.0, 0.0); full.len()];
    let strings = jumps.basis.strings();
    for (n, pn) in strings.iter().enumerate() {
        for (m, pm) in strings.iter().enumerate() {
            let c = coeffs[(n, m)];
            if c == C64::new(0.0, 0.0) {
                continue;
            }
            let prod = pm.mul_unchecked(pn);
            let q = full.index_of(&prod.string).expect("full basis");
            g[q] += c * prod.phase.to_complex() * inv_n;
        }
    }
    g
}

/// Dissipator for an arbitrary Hermitian coefficient matrix in the vectorized
/// computational basis.
fn dissipator_computational(coeffs: &Mat<C64>, jumps: &JumpOperatorSet) -> Result<Mat<C64>> {
    let l = jumps.num_sites();
    let dim = superoperator_dim(l, true)?;
    let n = 1usize << l;
    let inv_n = 1.0 / n as f64;
    let full = PauliBasis::full(l)?;
    let mut out = Mat::<C64>::zeros(dim, dim);

    // Σ K_nm conj(L_m) ⊗ L_n; column index c·N + d maps to row a·N + b.
    for (nn, mn) in jumps.monomials.iter().enumerate() {
        for (mm, mm_mono) in jumps.monomials.iter().enumerate() {
            let k = coeffs[(nn, mm)] * inv_n;
            if k == C64::new(0.0, 0.0) {
                continue;
            }
            for c in 0..n {
                let (a, vm) = mm_mono.apply(c);
                let left = k * vm.conj();
                for d in 0..n {
                    let (b, vn) = mn.apply(d);
                    out[(a * n + b, c * n + d)] += left * vn;
                }
            }
        }
    }

    // −½ (1 ⊗ G + Gᵀ ⊗ 1) with G = Σ K_nm L_m† L_n.
    let g = anticommutator_generator(coeffs, jumps, &full);
    for (q, &gq) in g.iter().enumerate() {
        if gq == C64::new(0.0, 0.0) {
            continue;
        }
        let mono = full.string_at(q).monomial();
        let half = gq * 0.5;
        for col in 0..n {
            let (row, v) = mono.apply(col);
            // G[row, col]
            let val = half * v;
            for a in 0..n {
                // 1 ⊗ G: [(a N + row), (a N + col)]
                out[(a * n + row, a * n + col)] -= val;
                // Gᵀ ⊗ 1: [(col N + b), (row N + b)] carries G[row, col]
                out[(col * n + a, row * n + a)] -= val;
            }
        }
    }
    Ok(out)
}

/// Dissipator for an arbitrary Hermitian coefficient matrix directly in the
/// Pauli basis, using only string products.
fn dissipator_pauli(coeffs: &Mat<C64>, jumps: &JumpOperatorSet) -> Result<Mat<C64>> {
    let l = jumps.num_sites();
    let dim = superoperator_dim(l, true)?;
    let inv_n = 1.0 / (1u64 << l) as f64;
    let full = PauliBasis::full(l)?;
    let mut out = Mat::<C64>::zeros(dim, dim);
    let strings = jumps.basis.strings();
    let all = full.strings();

    // L_n S_b L_m† = (1/N) P_n P_b P_m / √N
    for (n, pn) in strings.iter().enumerate() {
        for (m, pm) in strings.iter().enumerate() {
            let k = coeffs[(n, m)] * inv_n;
            if k == C64::new(0.0, 0.0) {
                continue;
            }
            for (b, pb) in all.iter().enumerate() {
                let nb = pn.mul_unchecked(pb);
                let nbm = nb.string.mul_unchecked(pm);
                let c = full.index_of(&nbm.string).expect("full basis");
                out[(c, b)] += k * (nb.phase * nbm.phase).to_complex();
            }
        }
    }

    // −½ {G, S_b}: only strings of G commuting with P_b survive, each twice.
    let g = anticommutator_generator(coeffs, jumps, &full);
    for (q, &gq) in g.iter().enumerate() {
        if gq == C64::new(0.0, 0.0) {
            continue;
        }
        let pq = all[q];
        for (b, pb) in all.iter().enumerate() {
            if pq.commutes_unchecked(pb) {
                let prod = pq.mul_unchecked(pb);
                let c = full.index_of(&prod.string).expect("full basis");
                out[(c, b)] -= gq * prod.phase.to_complex();
            }
        }
    }
    Ok(out)
}

fn dissipator_with(coeffs: &Mat<C64>, jumps: &JumpOperatorSet, basis: BasisTag) -> Result<Mat<C64>> {
    check_coefficients(coeffs, jumps)?;
    match basis {
        BasisTag::ComputationalVec => dissipator_computational(coeffs, jumps),
        BasisTag::PauliBasis => dissipator_pauli(coeffs, jumps),
    }
}

/// `L_D(ρ) = Σ_nm K_nm [L_n ρ L_m† − ½{L_m† L_n, ρ}]` in the requested basis.
pub fn build_dissipator(k: &KossakowskiSample, jumps: &JumpOperatorSet, basis: BasisTag) -> Result<Superoperator> {
    check_sample(k, jumps)?;
    superoperator_dim(k.num_sites, false)?;
    Ok(Superoperator {
        num_sites: k.num_sites,
        matrix: dissipator_with(&k.k_matrix, jumps, basis)?,
        basis,
        part: PartTag::DissipatorFull,
        strength: Strength::None,
        lineage: vec![k.seed],
    })
}

/// `(L_D⁰, L_D¹)` built from `K₀ = d·1` and `K' = K − d·1`.
pub fn split_dissipator(
    k: &KossakowskiSample,
    jumps: &JumpOperatorSet,
    basis: BasisTag,
) -> Result<(Superoperator, Superoperator)> {
    check_sample(k, jumps)?;
    superoperator_dim(k.num_sites, false)?;
    let diag = KossakowskiSample::uniform(k.num_sites, k.k_max);
    let off = k.off_diagonal_part();
    let make = |coeffs: &Mat<C64>, part| -> Result<Superoperator> {
        Ok(Superoperator {
            num_sites: k.num_sites,
            matrix: dissipator_with(coeffs, jumps, basis)?,
            basis,
            part,
            strength: Strength::None,
            lineage: vec![k.seed],
        })
    };
    Ok((make(&diag.k_matrix, PartTag::DissipatorDiag)?, make(&off, PartTag::DissipatorOffdiag)?))
}

/// `L_U(ρ) = −i[H, ρ]` in the requested basis.
pub fn build_unitary_part(h: &HamiltonianSpec, basis: BasisTag) -> Result<Superoperator> {
    let l = h.num_sites;
    let dim = superoperator_dim(l, false)?;
    let matrix = match basis {
        BasisTag::ComputationalVec => {
            let n = 1usize << l;
            let hd = h.to_dense()?;
            let mut m = Mat::<C64>::zeros(dim, dim);
            let minus_i = C64::new(0.0, -1.0);
            for c in 0..n {
                for r in 0..n {
                    let v = hd[(r, c)];
                    if v == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for a in 0..n {
                        // 1 ⊗ H
                        m[(a * n + r, a * n + c)] += minus_i * v;
                        // −Hᵀ ⊗ 1 carries H[r, c] at [(c N + a), (r N + a)]
                        m[(c * n + a, r * n + a)] -= minus_i * v;
                    }
                }
            }
            m
        }
        BasisTag::PauliBasis => {
            let full = PauliBasis::full(l)?;
            unitary_pauli_matrix(h, &full)?.to_dense()
        }
    };
    Ok(Superoperator {
        num_sites: l,
        matrix,
        basis,
        part: PartTag::UnitaryOnly,
        strength: Strength::None,
        lineage: h.seed.into_iter().collect(),
    })
}

fn check_pair(l_u: &Superoperator, l_d: &Superoperator) -> Result<()> {
    if l_u.basis != l_d.basis || l_u.num_sites != l_d.num_sites {
        return Err(Error::TagMismatch(format!(
            "{:?}/{} sites vs {:?}/{} sites",
            l_u.basis, l_u.num_sites, l_d.basis, l_d.num_sites
        )));
    }
    if l_u.part != PartTag::UnitaryOnly || !l_d.part.is_dissipator() {
        return Err(Error::TagMismatch(format!(
            "expected unitary and dissipator parts, got {:?} and {:?}",
            l_u.part, l_d.part
        )));
    }
    Ok(())
}

fn combine(l_u: &Superoperator, l_d: &Superoperator, cu: f64, cd: f64, strength: Strength) -> Superoperator {
    let dim = l_u.dim();
    let matrix = Mat::<C64>::from_fn(dim, dim, |i, j| l_u.matrix[(i, j)] * cu + l_d.matrix[(i, j)] * cd);
    let mut lineage = l_d.lineage.clone();
    lineage.extend(&l_u.lineage);
    Superoperator {
        num_sites: l_u.num_sites,
        matrix,
        basis: l_u.basis,
        part: PartTag::Full,
        strength,
        lineage,
    }
}

/// `L_D + α L_U`.
pub fn assemble(alpha: f64, l_u: &Superoperator, l_d: &Superoperator) -> Result<Superoperator> {
    check_pair(l_u, l_d)?;
    Ok(combine(l_u, l_d, alpha, 1.0, Strength::Alpha(alpha)))
}

/// `L_U + β L_D`.
pub fn assemble_weak(beta: f64, l_u: &Superoperator, l_d: &Superoperator) -> Result<Superoperator> {
    check_pair(l_u, l_d)?;
    Ok(combine(l_u, l_d, 1.0, beta, Strength::Beta(beta)))
}

/// Sum of dissipator parts, e.g. `L_D⁰ + L_D¹`.
pub fn add_dissipators(a: &Superoperator, b: &Superoperator) -> Result<Superoperator> {
    if a.basis != b.basis || a.num_sites != b.num_sites || !a.part.is_dissipator() || !b.part.is_dissipator() {
        return Err(Error::TagMismatch("dissipator sum needs two dissipators in one basis".into()));
    }
    let dim = a.dim();
    Ok(Superoperator {
        num_sites: a.num_sites,
        matrix: Mat::<C64>::from_fn(dim, dim, |i, j| a.matrix[(i, j)] + b.matrix[(i, j)]),
        basis: a.basis,
        part: PartTag::DissipatorFull,
        strength: Strength::None,
        lineage: a.lineage.clone(),
    })
}

/// Columns are `vec(P)/√N` for every string of the full basis.
fn pauli_change_of_basis(full: &PauliBasis) -> Mat<C64> {
    let l = full.num_sites();
    let n = 1usize << l;
    let dim = n * n;
    let s = 1.0 / (n as f64).sqrt();
    let mut b = Mat::<C64>::zeros(dim, dim);
    for (k, p) in full.strings().iter().enumerate() {
        let mono = p.monomial();
        for col in 0..n {
            let (row, v) = mono.apply(col);
            b[(row + n * col, k)] = v * s;
        }
    }
    b
}

/// `B† M B`, the matrix of `s` in the orthonormal Pauli basis.
pub fn pauli_basis_form(s: &Superoperator) -> Result<Superoperator> {
    if s.basis != BasisTag::ComputationalVec {
        return Err(Error::TagMismatch("pauli_basis_form expects a ComputationalVec operator".into()));
    }
    let full = PauliBasis::full(s.num_sites)?;
    let b = pauli_change_of_basis(&full);
    let mb = &s.matrix * &b;
    let matrix = b.adjoint() * &mb;
    Ok(Superoperator {
        matrix,
        basis: BasisTag::PauliBasis,
        ..s.clone()
    })
}

/// `B M' B†`, back to the vectorized computational basis.
pub fn computational_form(s: &Superoperator) -> Result<Superoperator> {
    if s.basis != BasisTag::PauliBasis {
        return Err(Error::TagMismatch("computational_form expects a PauliBasis operator".into()));
    }
    let full = PauliBasis::full(s.num_sites)?;
    let b = pauli_change_of_basis(&full);
    let mb = &s.matrix * b.adjoint();
    let matrix = &b * &mb;
    Ok(Superoperator {
        matrix,
        basis: BasisTag::ComputationalVec,
        ..s.clone()
    })
}

/// Pauli coefficients `Tr(S_a X)` of an operator given in column-stacked form.
pub fn vec_to_pauli(v: &[C64], full: &PauliBasis) -> Vec<C64> {
    let l = full.num_sites();
    let n = 1usize << l;
    assert_eq!(v.len(), n * n);
    let s = 1.0 / (n as f64).sqrt();
    full.strings()
        .iter()
        .map(|p| {
            // Tr(P X) = Σ_col P[row, col] X[col, row]
            let mono = p.monomial();
            (0..n)
                .map(|col| {
                    let (row, val) = mono.apply(col);
                    val * v[col + n * row]
                })
                .sum::<C64>()
                * s
        })
        .collect()
}

/// Column-stacked form of `Σ_a c_a S_a`.
pub fn pauli_to_vec(c: &[C64], full: &PauliBasis) -> Vec<C64> {
    let l = full.num_sites();
    let n = 1usize << l;
    assert_eq!(c.len(), full.len());
    let s = 1.0 / (n as f64).sqrt();
    let mut out = vec![C64::new(0.0, 0.0); n * n];
    for (p, &ca) in full.strings().iter().zip(c) {
        if ca == C64::new(0.0, 0.0) {
            continue;
        }
        let mono = p.monomial();
        for col in 0..n {
            let (row, val) = mono.apply(col);
            out[row + n * col] += ca * val * s;
        }
    }
    out
}

/// `N_L = 3ℓ + 9ℓ(ℓ−1)/2`, the number of jump operators at `k_max = 2`.
pub fn jump_count_two_local(num_sites: usize) -> usize {
    3 * num_sites + 9 * num_sites * (num_sites - 1) / 2
}

/// Integer numerator `6kℓ − 4k²` of the cluster centre `λ₀(k) = −2(6kℓ−4k²)/N_L`.
pub fn lambda0_numerator(k: usize, num_sites: usize) -> i128 {
    let (k, l) = (k as i128, num_sites as i128);
    6 * k * l - 4 * k * k
}

/// Closed-form eigenvalue of `L_D⁰` on weight-`k` strings for `k_max = 2`.
pub fn lambda0(k: usize, num_sites: usize) -> Result<f64> {
    if num_sites == 0 || k > num_sites {
        return Err(Error::InvalidBounds(format!("weight {k} on {num_sites} sites")));
    }
    Ok(-2.0 * lambda0_numerator(k, num_sites) as f64 / jump_count_two_local(num_sites) as f64)
}

/// Number of strings with weight `1..=k_max` anticommuting with a fixed
/// weight-`k` string; `λ₀(k) = −2·count/N_L` for any `k_max`.
pub fn anticommuting_jump_count(k: usize, num_sites: usize, k_max: usize) -> u128 {
    let mut total = 0u128;
    for j in 1..=k_max {
        // a sites of the support carry an anticommuting letter (2 choices),
        // b carry the same letter, the rest of the jump sits outside.
        for a in (1..=k.min(j)).step_by(2) {
            for b in 0..=(k - a).min(j - a) {
                let outside = j - a - b;
                if outside > num_sites - k {
                    continue;
                }
                total += crate::pauli::binomial(k, a)
                    * 2u128.pow(a as u32)
                    * crate::pauli::binomial(k - a, b)
                    * crate::pauli::binomial(num_sites - k, outside)
                    * 3u128.pow(outside as u32);
            }
        }
    }
    total
}

/// `λ₀(k)` for arbitrary `k_max`.
pub fn lambda0_general(k: usize, num_sites: usize, k_max: usize) -> f64 {
    let n_l: u128 = (1..=k_max).map(|j| sector_size(num_sites, j)).sum();
    -2.0 * anticommuting_jump_count(k, num_sites, k_max) as f64 / n_l as f64
}

/// Pauli-basis matrix of `L_U` for a 2-local Hamiltonian, stored by rows.
#[derive(Clone, Debug)]
pub struct SparseReal {
    pub dim: usize,
    pub rows: Vec<Vec<(usize, f64)>>,
}

impl SparseReal {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i].iter().find(|(c, _)| *c == j).map_or(0.0, |(_, v)| *v)
    }

    pub fn row_nonzeros(&self, i: usize) -> usize {
        self.rows[i].iter().filter(|(_, v)| *v != 0.0).count()
    }

    pub fn nnz(&self) -> usize {
        (0..self.dim).map(|i| self.row_nonzeros(i)).sum()
    }

    pub fn to_dense(&self) -> Mat<C64> {
        let mut m = Mat::<C64>::zeros(self.dim, self.dim);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                m[(i, j)] += C64::new(v, 0.0);
            }
        }
        m
    }

    pub fn to_dense_real(&self) -> Mat<f64> {
        let mut m = Mat::<f64>::zeros(self.dim, self.dim);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                m[(i, j)] += v;
            }
        }
        m
    }
}

/// `L^U_{x,y} = i Tr([S_x, S_y] H)` over `basis`, from string commutators and
/// coefficient lookup only.
///
/// A nonzero needs `[P_x, P_y] ∝ T` for a Hamiltonian term `T`, so for every
/// column `y` we walk the terms, form `T·P_y` and read off the row. Entries
/// are `±2J`.
pub fn unitary_pauli_matrix(h: &HamiltonianSpec, basis: &PauliBasis) -> Result<SparseReal> {
    h.check_two_local()?;
    if h.num_sites != basis.num_sites() {
        return Err(Error::SiteMismatch {
            left: h.num_sites,
            right: basis.num_sites(),
        });
    }
    let dim = basis.len();
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); dim];
    for (y, py) in basis.strings().iter().enumerate() {
        for (t, j) in &h.coefficients {
            if *j == 0.0 {
                continue;
            }
            let Some(prod) = t.commutator(py)? else {
                continue;
            };
            let Some(x) = basis.index_of(&prod.string) else {
                continue;
            };
            // −i[H, S_y] = −2i J ω S_x with ω = ±i
            let val = (C64::new(0.0, -2.0) * prod.phase.to_complex() * *j).re;
            match rows[x].iter_mut().find(|(c, _)| *c == y) {
                Some(entry) => entry.1 += val,
                None => rows[x].push((y, val)),
            }
        }
    }
    for row in &mut rows {
        row.sort_by_key(|(c, _)| *c);
    }
    Ok(SparseReal { dim, rows })
}

/// Weight of every basis string, for block-structure checks.
pub fn weights_of(basis: &PauliBasis) -> Vec<usize> {
    basis.strings().iter().map(PauliString::weight).collect()
}
