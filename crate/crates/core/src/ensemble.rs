//! Random ensemble: Haar unitaries, Kossakowski matrices, 2-local Hamiltonians.

use faer::{Mat, Side};
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::pauli::{Letter, PauliBasis, PauliString, MAX_DENSE_SITES};
use crate::rng::{stream_rng, Stream};

/// Number of traceless jump operators with weight `1..=k_max`.
pub fn jump_count(num_sites: usize, k_max: usize) -> usize {
    (1..=k_max)
        .map(|k| crate::pauli::sector_size(num_sites, k) as usize)
        .sum()
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Haar-distributed `n × n` unitary: QR of a complex Ginibre matrix with the
/// phases of `R`'s diagonal moved into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Mat<C64> {
    assert!(n >= 1, "haar_unitary needs n >= 1");
    let g = Mat::<C64>::from_fn(n, n, |_, _| complex_gaussian(rng));
    let qr = g.qr();
    let mut q = qr.compute_Q();
    let r = qr.R();
    for j in 0..n {
        let d = r[(j, j)];
        let norm = d.norm();
        let ph = if norm > 0.0 { d / norm } else { C64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= ph;
        }
    }
    q
}

/// Positive semidefinite coupling matrix `K = U† D U` over the jump operators.
#[derive(Clone, Debug)]
pub struct KossakowskiSample {
    pub num_sites: usize,
    pub k_max: usize,
    pub seed: u64,
    pub d_diag: Vec<f64>,
    pub k_matrix: Mat<C64>,
    /// The Haar rotation `U`; absent for samples read back from disk.
    pub rotation: Option<Mat<C64>>,
}

#[derive(Clone, Copy, Debug)]
pub struct KossakowskiCheck {
    pub hermiticity_error: f64,
    pub min_eigenvalue: f64,
    pub trace_error: f64,
    pub mean_diagonal: f64,
}

impl KossakowskiCheck {
    pub fn holds(&self) -> bool {
        self.hermiticity_error < 1e-12 && self.min_eigenvalue >= -1e-12 && self.trace_error < 1e-10
    }
}

impl KossakowskiSample {
    /// Draws a sample from the Kossakowski stream of `seed`.
    pub fn sample(num_sites: usize, k_max: usize, seed: u64) -> Result<Self> {
        let mut rng = stream_rng(seed, Stream::Kossakowski);
        Self::sample_with(num_sites, k_max, seed, &mut rng)
    }

    pub fn sample_with<R: Rng + ?Sized>(num_sites: usize, k_max: usize, seed: u64, rng: &mut R) -> Result<Self> {
        if k_max < 1 || k_max > num_sites {
            return Err(Error::InvalidBounds(format!("k_max = {k_max} on {num_sites} sites")));
        }
        let n_l = jump_count(num_sites, k_max);
        let n = (1u64 << num_sites) as f64;
        let mut d: Vec<f64> = (0..n_l).map(|_| rng.random::<f64>()).collect();
        let total: f64 = d.iter().sum();
        for v in &mut d {
            *v *= n / total;
        }
        let u = haar_unitary(n_l, rng);
        // K = U† D U
        let du = Mat::<C64>::from_fn(n_l, n_l, |i, j| u[(i, j)] * d[i]);
        let mut k = u.adjoint() * &du;
        linalg::symmetrize_hermitian(&mut k);
        Ok(KossakowskiSample {
            num_sites,
            k_max,
            seed,
            d_diag: d,
            k_matrix: k,
            rotation: Some(u),
        })
    }

    /// `K = d·1` with `d = N/N_L`, the diagonal part of every sample.
    pub fn uniform(num_sites: usize, k_max: usize) -> Self {
        let n_l = jump_count(num_sites, k_max);
        let d = (1u64 << num_sites) as f64 / n_l as f64;
        let mut k = Mat::<C64>::zeros(n_l, n_l);
        for i in 0..n_l {
            k[(i, i)] = C64::new(d, 0.0);
        }
        KossakowskiSample {
            num_sites,
            k_max,
            seed: 0,
            d_diag: vec![d; n_l],
            k_matrix: k,
            rotation: None,
        }
    }

    pub fn jump_count(&self) -> usize {
        self.k_matrix.nrows()
    }

    /// Mean of the diagonal, `d = N / N_L`.
    pub fn mean_diagonal(&self) -> f64 {
        let n = self.k_matrix.nrows();
        (0..n).map(|i| self.k_matrix[(i, i)].re).sum::<f64>() / n as f64
    }

    /// `K − d·1`, the off-diagonal remainder.
    pub fn off_diagonal_part(&self) -> Mat<C64> {
        let d = (1u64 << self.num_sites) as f64 / self.jump_count() as f64;
        let mut k = self.k_matrix.clone();
        for i in 0..k.nrows() {
            k[(i, i)] -= C64::new(d, 0.0);
        }
        k
    }

    pub fn check(&self) -> KossakowskiCheck {
        let k = &self.k_matrix;
        let n = (1u64 << self.num_sites) as f64;
        let trace: f64 = (0..k.nrows()).map(|i| k[(i, i)].re).sum();
        let eigs = k
            .self_adjoint_eigenvalues(Side::Lower)
            .expect("Hermitian eigensolver failed on Kossakowski matrix");
        KossakowskiCheck {
            hermiticity_error: linalg::hermiticity_error(k.as_ref()),
            min_eigenvalue: eigs.first().copied().unwrap_or(0.0),
            trace_error: (trace - n).abs(),
            mean_diagonal: self.mean_diagonal(),
        }
    }

    pub fn to_record(&self) -> SampleRecord {
        let k = &self.k_matrix;
        let mut entries = Vec::with_capacity(k.nrows() * k.ncols());
        for i in 0..k.nrows() {
            for j in 0..k.ncols() {
                entries.push((i, j, k[(i, j)].re, k[(i, j)].im));
            }
        }
        SampleRecord {
            seed: self.seed,
            sites: self.num_sites,
            k_max: self.k_max,
            kind: "kossakowski".into(),
            d_diag: Some(self.d_diag.clone()),
            entries: Some(entries),
            coefficients: None,
        }
    }

    pub fn from_record(rec: &SampleRecord) -> Result<Self> {
        if rec.kind != "kossakowski" {
            return Err(Error::DimensionMismatch(format!("record kind {} is not kossakowski", rec.kind)));
        }
        let n_l = jump_count(rec.sites, rec.k_max);
        let mut k = Mat::<C64>::zeros(n_l, n_l);
        for &(i, j, re, im) in rec.entries.as_deref().unwrap_or_default() {
            if i >= n_l || j >= n_l {
                return Err(Error::DimensionMismatch(format!("entry ({i},{j}) outside {n_l}x{n_l}")));
            }
            k[(i, j)] = C64::new(re, im);
        }
        Ok(KossakowskiSample {
            num_sites: rec.sites,
            k_max: rec.k_max,
            seed: rec.seed,
            d_diag: rec.d_diag.clone().unwrap_or_default(),
            k_matrix: k,
            rotation: None,
        })
    }
}

/// JSON form shared by Kossakowski samples and Hamiltonians.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub seed: u64,
    pub sites: usize,
    pub k_max: usize,
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub d_diag: Option<Vec<f64>>,
    /// `(row, col, re, im)` triplets.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub entries: Option<Vec<(usize, usize, f64, f64)>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub coefficients: Option<Vec<(PauliString, f64)>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum HamiltonianKind {
    RandomAllToAll,
    HeisenbergPbc,
}

impl HamiltonianKind {
    fn tag(self) -> &'static str {
        match self {
            HamiltonianKind::RandomAllToAll => "random_all_to_all",
            HamiltonianKind::HeisenbergPbc => "heisenberg_pbc",
        }
    }
}

/// Real coefficients over weight-2 Pauli strings.
#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianSpec {
    pub num_sites: usize,
    pub kind: HamiltonianKind,
    pub coefficients: Vec<(PauliString, f64)>,
    pub seed: Option<u64>,
}

/// Standard deviation of each random coupling, `√(2 / (9ℓ(ℓ−1)))`.
pub fn coupling_std(num_sites: usize) -> f64 {
    let l = num_sites as f64;
    (2.0 / (9.0 * l * (l - 1.0))).sqrt()
}

impl HamiltonianSpec {
    pub fn empty(num_sites: usize) -> Self {
        HamiltonianSpec {
            num_sites,
            kind: HamiltonianKind::RandomAllToAll,
            coefficients: Vec::new(),
            seed: None,
        }
    }

    /// All-to-all random couplings drawn from the Hamiltonian stream of `seed`.
    ///
    /// With `exact_norm` the draw is rescaled so that `Tr H² = N` holds for
    /// this realization, not just on average.
    pub fn random(num_sites: usize, seed: u64, exact_norm: bool) -> Result<Self> {
        let mut rng = stream_rng(seed, Stream::Hamiltonian);
        let mut h = Self::random_with(num_sites, &mut rng, exact_norm)?;
        h.seed = Some(seed);
        Ok(h)
    }

    pub fn random_with<R: Rng + ?Sized>(num_sites: usize, rng: &mut R, exact_norm: bool) -> Result<Self> {
        if num_sites < 2 {
            return Err(Error::InvalidBounds("random Hamiltonian needs at least 2 sites".into()));
        }
        let sigma = coupling_std(num_sites);
        let basis = PauliBasis::with_weights(num_sites, 2, 2)?;
        let mut coefficients: Vec<(PauliString, f64)> = basis
            .strings()
            .iter()
            .map(|&s| {
                let g: f64 = StandardNormal.sample(rng);
                (s, sigma * g)
            })
            .collect();
        if exact_norm {
            let sum_sq: f64 = coefficients.iter().map(|(_, c)| c * c).sum();
            let scale = 1.0 / sum_sq.sqrt();
            for (_, c) in &mut coefficients {
                *c *= scale;
            }
        }
        Ok(HamiltonianSpec {
            num_sites,
            kind: HamiltonianKind::RandomAllToAll,
            coefficients,
            seed: None,
        })
    }

    /// XXX chain with periodic boundaries and `J = 1/√(3ℓ)`.
    pub fn heisenberg(num_sites: usize) -> Result<Self> {
        if num_sites < 3 {
            return Err(Error::InvalidBounds(
                "periodic Heisenberg chain needs at least 3 sites".into(),
            ));
        }
        let j = 1.0 / (3.0 * num_sites as f64).sqrt();
        let mut coefficients = Vec::with_capacity(3 * num_sites);
        for i in 0..num_sites {
            let next = (i + 1) % num_sites;
            for a in Letter::NON_IDENTITY {
                let s = PauliString::from_sites(num_sites, &[(i, a), (next, a)])?;
                coefficients.push((s, j));
            }
        }
        coefficients.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(HamiltonianSpec {
            num_sites,
            kind: HamiltonianKind::HeisenbergPbc,
            coefficients,
            seed: None,
        })
    }

    /// `Σ J²`, so that `Tr H² = N · Σ J²`.
    pub fn sum_sq(&self) -> f64 {
        self.coefficients.iter().map(|(_, c)| c * c).sum()
    }

    pub fn check_two_local(&self) -> Result<()> {
        for (s, _) in &self.coefficients {
            if s.weight() != 2 {
                return Err(Error::NonLocalTerm {
                    term: s.to_string(),
                    weight: s.weight(),
                });
            }
        }
        Ok(())
    }

    pub fn coefficient(&self, s: &PauliString) -> f64 {
        self.coefficients
            .iter()
            .filter(|(t, _)| t == s)
            .map(|(_, c)| *c)
            .sum()
    }

    pub fn to_dense(&self) -> Result<Mat<C64>> {
        if self.num_sites > MAX_DENSE_SITES {
            return Err(Error::ResourceLimit {
                what: "dense Hamiltonian",
                sites: self.num_sites,
                limit: MAX_DENSE_SITES,
            });
        }
        let dim = 1usize << self.num_sites;
        let mut h = Mat::<C64>::zeros(dim, dim);
        for (s, c) in &self.coefficients {
            let m = s.monomial();
            for col in 0..dim {
                let (row, v) = m.apply(col);
                h[(row, col)] += v * *c;
            }
        }
        Ok(h)
    }

    pub fn to_record(&self) -> SampleRecord {
        SampleRecord {
            seed: self.seed.unwrap_or(0),
            sites: self.num_sites,
            k_max: 2,
            kind: self.kind.tag().into(),
            d_diag: None,
            entries: None,
            coefficients: Some(self.coefficients.clone()),
        }
    }

    pub fn from_record(rec: &SampleRecord) -> Result<Self> {
        let kind = match rec.kind.as_str() {
            "random_all_to_all" => HamiltonianKind::RandomAllToAll,
            "heisenberg_pbc" => HamiltonianKind::HeisenbergPbc,
            other => return Err(Error::DimensionMismatch(format!("record kind {other} is not a Hamiltonian"))),
        };
        let coefficients = rec.coefficients.clone().unwrap_or_default();
        if let Some((s, _)) = coefficients.iter().find(|(s, _)| s.num_sites() != rec.sites) {
            return Err(Error::SiteMismatch {
                left: s.num_sites(),
                right: rec.sites,
            });
        }
        Ok(HamiltonianSpec {
            num_sites: rec.sites,
            kind,
            coefficients,
            seed: (kind == HamiltonianKind::RandomAllToAll).then_some(rec.seed),
        })
    }
}
