//! Non-Hermitian eigendecomposition and the quantities read off Liouvillian
//! spectra.

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::evd::{self, ComputeEigenvectors};
use faer::linalg::solvers::DenseSolveCore;
use faer::{Mat, MatRef, Par};
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::ensemble::HamiltonianSpec;
use crate::error::{Error, Result};
use crate::linalg;
use crate::liouvillian::{self, BasisTag, Superoperator};
use crate::pauli::{sector_size, PauliBasis};

/// Eigenvalues closer than this to zero count as steady states.
pub const ZERO_TOL: f64 = 1e-8;
/// Largest eigenvector condition number still treated as diagonalizable.
pub const MAX_MODE_CONDITION: f64 = 1e8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeRequest {
    EigenvaluesOnly,
    Right,
    RightAndLeft,
}

#[derive(Clone, Debug)]
pub struct Spectrum {
    pub num_sites: usize,
    pub basis: BasisTag,
    pub eigenvalues: Vec<C64>,
    /// Unit-norm right modes as columns.
    pub right_modes: Option<Mat<C64>>,
    /// Left modes as rows, `left · right = 1`.
    pub left_modes: Option<Mat<C64>>,
    pub biorth_residual: Option<f64>,
    /// `‖M R − R Λ‖_max / ‖M‖_max`.
    pub diag_residual: Option<f64>,
    pub max_condition: Option<f64>,
    pub diagonalizable: Option<bool>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn right_mode(&self, i: usize) -> Option<Vec<C64>> {
        self.right_modes
            .as_ref()
            .map(|r| (0..r.nrows()).map(|j| r[(j, i)]).collect())
    }

    pub fn left_mode(&self, i: usize) -> Option<Vec<C64>> {
        self.left_modes
            .as_ref()
            .map(|l| (0..l.ncols()).map(|j| l[(i, j)]).collect())
    }

    /// Multiplies every eigenvalue by `factor`, e.g. `1/β` to map
    /// `L_U + βL_D` onto `L_D + (1/β) L_U`. Modes are unchanged.
    pub fn scaled(&self, factor: f64) -> Spectrum {
        let mut out = self.clone();
        for l in &mut out.eigenvalues {
            *l *= factor;
        }
        out
    }

    pub fn mean(&self) -> C64 {
        self.eigenvalues.iter().sum::<C64>() / self.len() as f64
    }
}

fn fingerprint_error(m: MatRef<'_, C64>) -> Error {
    Error::Eigensolver {
        rows: m.nrows(),
        fingerprint: linalg::fingerprint(m),
    }
}

fn sort_key(a: &C64, b: &C64) -> std::cmp::Ordering {
    b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im))
}

/// Eigenvalues (and optionally right modes) of a general real matrix.
fn eig_real(a: MatRef<'_, f64>, vectors: bool) -> Option<(Vec<C64>, Option<Mat<f64>>, Vec<f64>, Vec<f64>)> {
    let n = a.nrows();
    let par = Par::Seq;
    let mut s_re = faer::diag::Diag::<f64>::zeros(n);
    let mut s_im = faer::diag::Diag::<f64>::zeros(n);
    let mut u = Mat::<f64>::zeros(if vectors { n } else { 0 }, if vectors { n } else { 0 });
    let cv = if vectors {
        ComputeEigenvectors::Yes
    } else {
        ComputeEigenvectors::No
    };
    let mut buf = MemBuffer::new(evd::evd_scratch::<f64>(n, ComputeEigenvectors::No, cv, par, Default::default()));
    evd::evd_real(
        a,
        s_re.as_mut(),
        s_im.as_mut(),
        None,
        if vectors { Some(u.as_mut()) } else { None },
        par,
        MemStack::new(&mut buf),
        Default::default(),
    )
    .ok()?;
    let re: Vec<f64> = (0..n).map(|i| s_re[i]).collect();
    let im: Vec<f64> = (0..n).map(|i| s_im[i]).collect();
    let vals = re.iter().zip(&im).map(|(&r, &i)| C64::new(r, i)).collect();
    Some((vals, vectors.then_some(u), re, im))
}

fn eig_cplx(a: MatRef<'_, C64>, vectors: bool) -> Option<(Vec<C64>, Option<Mat<C64>>)> {
    let n = a.nrows();
    let par = Par::Seq;
    let mut s = faer::diag::Diag::<C64>::zeros(n);
    let mut u = Mat::<C64>::zeros(if vectors { n } else { 0 }, if vectors { n } else { 0 });
    let cv = if vectors {
        ComputeEigenvectors::Yes
    } else {
        ComputeEigenvectors::No
    };
    let mut buf = MemBuffer::new(evd::evd_scratch::<C64>(n, ComputeEigenvectors::No, cv, par, Default::default()));
    evd::evd_cplx(
        a,
        s.as_mut(),
        None,
        if vectors { Some(u.as_mut()) } else { None },
        par,
        MemStack::new(&mut buf),
        Default::default(),
    )
    .ok()?;
    Some(((0..n).map(|i| s[i]).collect(), vectors.then_some(u)))
}

/// Whether `m` is real up to rounding, so the real eigensolver applies.
pub fn is_effectively_real(m: MatRef<'_, C64>) -> bool {
    let scale = linalg::max_abs(m);
    linalg::max_imag(m) <= 1e-12 * scale.max(f64::MIN_POSITIVE)
}

/// Eigendecomposition of `s`. Real matrices (every Pauli-basis Liouvillian)
/// go through the real solver; modes are returned unit-normalized and sorted
/// by decreasing real part.
pub fn diagonalize(s: &Superoperator, request: ModeRequest) -> Result<Spectrum> {
    diagonalize_matrix(s.matrix.as_ref(), s.num_sites, s.basis, request)
}

pub fn diagonalize_matrix(m: MatRef<'_, C64>, num_sites: usize, basis: BasisTag, request: ModeRequest) -> Result<Spectrum> {
    let n = m.nrows();
    let vectors = request != ModeRequest::EigenvaluesOnly;
    let m_max = linalg::max_abs(m);
    let (values, right, residual) = if is_effectively_real(m) {
        let real = Mat::<f64>::from_fn(n, n, |i, j| m[(i, j)].re);
        let (values, packed, re, im) = eig_real(real.as_ref(), vectors).ok_or_else(|| fingerprint_error(m))?;
        match packed {
            None => (values, None, None),
            Some(u) => {
                // Residual on the packed real form: M U = U D, D block diagonal.
                let mu = &real * &u;
                let mut worst = 0.0f64;
                let mut j = 0;
                while j < n {
                    if im[j] != 0.0 && j + 1 < n {
                        let (a, b) = (re[j], im[j]);
                        for i in 0..n {
                            let (x, y) = (u[(i, j)], u[(i, j + 1)]);
                            worst = worst.max((mu[(i, j)] - (a * x - b * y)).abs());
                            worst = worst.max((mu[(i, j + 1)] - (b * x + a * y)).abs());
                        }
                        j += 2;
                    } else {
                        for i in 0..n {
                            worst = worst.max((mu[(i, j)] - re[j] * u[(i, j)]).abs());
                        }
                        j += 1;
                    }
                }
                drop(mu);
                let mut r = Mat::<C64>::zeros(n, n);
                let mut j = 0;
                while j < n {
                    if im[j] != 0.0 && j + 1 < n {
                        for i in 0..n {
                            let v = C64::new(u[(i, j)], u[(i, j + 1)]);
                            r[(i, j)] = v;
                            r[(i, j + 1)] = v.conj();
                        }
                        j += 2;
                    } else {
                        for i in 0..n {
                            r[(i, j)] = C64::new(u[(i, j)], 0.0);
                        }
                        j += 1;
                    }
                }
                // Packed columns are not unit norm per complex mode, and the
                // residual scales with the column norm.
                let mut min_norm = f64::INFINITY;
                for jj in 0..n {
                    let norm = (0..n).map(|i| r[(i, jj)].norm_sqr()).sum::<f64>().sqrt();
                    min_norm = min_norm.min(norm);
                }
                let residual = worst / min_norm.max(f64::MIN_POSITIVE);
                (values, Some(r), Some(residual))
            }
        }
    } else {
        let (values, u) = eig_cplx(m, vectors).ok_or_else(|| fingerprint_error(m))?;
        match u {
            None => (values, None, None),
            Some(u) => {
                let mu = m * &u;
                let mut worst = 0.0f64;
                for j in 0..n {
                    for i in 0..n {
                        worst = worst.max((mu[(i, j)] - u[(i, j)] * values[j]).norm());
                    }
                }
                let mut min_norm = f64::INFINITY;
                for jj in 0..n {
                    let norm = (0..n).map(|i| u[(i, jj)].norm_sqr()).sum::<f64>().sqrt();
                    min_norm = min_norm.min(norm);
                }
                (values, Some(u), Some(worst / min_norm.max(f64::MIN_POSITIVE)))
            }
        }
    };

    if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(fingerprint_error(m));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| sort_key(&values[a], &values[b]).then(a.cmp(&b)));
    let eigenvalues: Vec<C64> = order.iter().map(|&i| values[i]).collect();
    let right_modes = right.map(|r| {
        Mat::<C64>::from_fn(n, n, |i, j| r[(i, order[j])]).to_owned()
    });
    let right_modes = right_modes.map(|mut r| {
        for j in 0..n {
            let norm = (0..n).map(|i| r[(i, j)].norm_sqr()).sum::<f64>().sqrt();
            if norm > 0.0 {
                for i in 0..n {
                    r[(i, j)] /= norm;
                }
            }
        }
        r
    });

    let mut spectrum = Spectrum {
        num_sites,
        basis,
        eigenvalues,
        right_modes,
        left_modes: None,
        biorth_residual: None,
        diag_residual: residual.map(|r| r / m_max.max(f64::MIN_POSITIVE)),
        max_condition: None,
        diagonalizable: None,
    };

    if request == ModeRequest::RightAndLeft {
        let r = spectrum.right_modes.as_ref().expect("requested");
        let left = r.partial_piv_lu().inverse();
        let finite = (0..n).all(|i| (0..n).all(|j| left[(i, j)].re.is_finite() && left[(i, j)].im.is_finite()));
        let (biorth, cond) = if finite {
            let prod = &left * r;
            let biorth = linalg::max_abs_diff_identity(prod.as_ref());
            let cond = (0..n)
                .map(|i| (0..n).map(|j| left[(i, j)].norm_sqr()).sum::<f64>().sqrt())
                .fold(0.0, f64::max);
            (biorth, cond)
        } else {
            (f64::INFINITY, f64::INFINITY)
        };
        spectrum.biorth_residual = Some(biorth);
        spectrum.max_condition = Some(cond);
        spectrum.diagonalizable = Some(biorth < 1e-6 && cond < MAX_MODE_CONDITION);
        spectrum.left_modes = Some(left);
    }
    Ok(spectrum)
}

/// Eigenvalues only.
pub fn eigenvalues(s: &Superoperator) -> Result<Vec<C64>> {
    Ok(diagonalize(s, ModeRequest::EigenvaluesOnly)?.eigenvalues)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CptpReport {
    pub max_re: f64,
    pub zero_modes: usize,
    pub min_abs: f64,
    pub pairing_distance: f64,
    /// Norm of the projection of the normalized identity onto the left null space.
    pub identity_left_overlap: Option<f64>,
    pub max_re_ok: bool,
    pub zero_mode_ok: bool,
    pub pairing_ok: bool,
    pub identity_ok: Option<bool>,
}

impl CptpReport {
    pub fn passed(&self) -> bool {
        self.max_re_ok && self.zero_mode_ok && self.pairing_ok && self.identity_ok.unwrap_or(true)
    }
}

/// Largest distance from any eigenvalue to the nearest conjugate in the set.
pub fn conjugation_pairing_distance(eigs: &[C64]) -> f64 {
    let mut worst = 0.0f64;
    for a in eigs {
        let target = a.conj();
        let best = eigs.iter().map(|b| (b - target).norm()).fold(f64::INFINITY, f64::min);
        worst = worst.max(best);
    }
    worst
}

fn identity_functional(num_sites: usize, basis: BasisTag, dim: usize) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); dim];
    match basis {
        BasisTag::PauliBasis => v[0] = C64::new(1.0, 0.0),
        BasisTag::ComputationalVec => {
            let n = 1usize << num_sites;
            let s = 1.0 / (n as f64).sqrt();
            for i in 0..n {
                v[i + n * i] = C64::new(s, 0.0);
            }
        }
    }
    v
}

/// Spectral consequences of complete positivity and trace preservation.
pub fn cptp_checks(spec: &Spectrum) -> CptpReport {
    let eigs = &spec.eigenvalues;
    let max_re = eigs.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
    let min_abs = eigs.iter().map(|l| l.norm()).fold(f64::INFINITY, f64::min);
    let zero: Vec<usize> = (0..eigs.len()).filter(|&i| eigs[i].norm() < ZERO_TOL).collect();
    let pairing = conjugation_pairing_distance(eigs);
    let identity_left_overlap = spec.left_modes.as_ref().filter(|_| !zero.is_empty()).map(|left| {
        let dim = left.ncols();
        let id = identity_functional(spec.num_sites, spec.basis, dim);
        // Orthonormalize the conjugated left rows at λ≈0 and project.
        let rows = Mat::<C64>::from_fn(dim, zero.len(), |j, c| left[(zero[c], j)].conj());
        let q = rows.qr().compute_thin_Q();
        let mut norm_sq = 0.0;
        for c in 0..q.ncols() {
            let dot: C64 = (0..dim).map(|j| q[(j, c)].conj() * id[j]).sum();
            norm_sq += dot.norm_sqr();
        }
        norm_sq.sqrt()
    });
    CptpReport {
        max_re,
        zero_modes: zero.len(),
        min_abs,
        pairing_distance: pairing,
        identity_left_overlap,
        max_re_ok: max_re < ZERO_TOL,
        zero_mode_ok: !zero.is_empty(),
        pairing_ok: pairing < 1e-8,
        identity_ok: identity_left_overlap.map(|o| o > 1.0 - 1e-8),
    }
}

/// Which eigenvalues enter the spacing-ratio statistics.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum HalfPlane {
    /// `Im λ > tol`: one member of each conjugate pair.
    #[serde(rename = "im-pos")]
    ImPositive,
    /// `Re λ > tol`, the literal reading of the figure caption.
    #[serde(rename = "re-pos")]
    RePositive,
    /// Everything, for spectra without conjugation symmetry.
    #[serde(rename = "all")]
    All,
}

impl HalfPlane {
    pub const TOLERANCE: f64 = 1e-8;

    pub fn keeps(self, l: &C64) -> bool {
        match self {
            HalfPlane::ImPositive => l.im > Self::TOLERANCE,
            HalfPlane::RePositive => l.re > Self::TOLERANCE,
            HalfPlane::All => true,
        }
    }
}

impl std::str::FromStr for HalfPlane {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "im-pos" => Ok(HalfPlane::ImPositive),
            "re-pos" => Ok(HalfPlane::RePositive),
            "all" => Ok(HalfPlane::All),
            _ => Err(Error::Parse {
                input: s.into(),
                reason: "expected im-pos, re-pos or all".into(),
            }),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CsrHistogram {
    pub ratios: Vec<f64>,
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub mean: f64,
}

impl CsrHistogram {
    pub const DEFAULT_BINS: usize = 20;

    pub fn from_ratios(ratios: Vec<f64>, bins: usize) -> Result<Self> {
        if ratios.is_empty() {
            return Err(Error::EmptyInput("spacing ratios"));
        }
        let bins = bins.max(1);
        let edges: Vec<f64> = (0..=bins).map(|i| i as f64 / bins as f64).collect();
        let mut counts = vec![0u64; bins];
        for &r in &ratios {
            let b = ((r * bins as f64) as usize).min(bins - 1);
            counts[b] += 1;
        }
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        Ok(CsrHistogram {
            ratios,
            edges,
            counts,
            mean,
        })
    }

    pub fn merge(parts: &[CsrHistogram], bins: usize) -> Result<Self> {
        Self::from_ratios(parts.iter().flat_map(|h| h.ratios.iter().copied()).collect(), bins)
    }

    /// Probability density per bin.
    pub fn density(&self) -> Vec<f64> {
        let total = self.ratios.len() as f64;
        self.counts
            .iter()
            .zip(self.edges.windows(2))
            .map(|(&c, e)| c as f64 / total / (e[1] - e[0]))
            .collect()
    }

    /// Kolmogorov–Smirnov distance to another sample.
    pub fn ks_distance(&self, other: &CsrHistogram) -> f64 {
        ks_two_sample(&self.ratios, &other.ratios)
    }

    /// Kolmogorov–Smirnov distance to a continuous CDF on [0, 1].
    pub fn ks_to_cdf(&self, cdf: impl Fn(f64) -> f64) -> f64 {
        let mut x = self.ratios.clone();
        x.sort_by(f64::total_cmp);
        let n = x.len() as f64;
        x.iter()
            .enumerate()
            .map(|(i, &v)| {
                let f = cdf(v);
                (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
            })
            .fold(0.0, f64::max)
    }
}

pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n, m) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < x.len() && j < y.len() {
        let v = x[i].min(y[j]);
        while i < x.len() && x[i] <= v {
            i += 1;
        }
        while j < y.len() && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// Cumulative distribution of the spacing ratio for uncorrelated points on a
/// line (`p(r) = 1`).
pub fn poisson_1d_cdf(r: f64) -> f64 {
    r.clamp(0.0, 1.0)
}

/// Cumulative distribution of the spacing ratio for uncorrelated points in
/// the plane (`p(r) = 2r`).
pub fn poisson_2d_cdf(r: f64) -> f64 {
    let r = r.clamp(0.0, 1.0);
    r * r
}

/// `r = |λ − λ_nn| / |λ − λ_nnn|` for every retained eigenvalue.
pub fn spacing_ratios(eigs: &[C64], filter: HalfPlane) -> Result<Vec<f64>> {
    let kept: Vec<C64> = eigs.iter().copied().filter(|l| filter.keeps(l)).collect();
    if kept.len() < 3 {
        return Err(Error::TooFewEigenvalues {
            found: kept.len(),
            needed: 3,
        });
    }
    let mut out = Vec::with_capacity(kept.len());
    for (i, a) in kept.iter().enumerate() {
        let (mut d1, mut d2) = (f64::INFINITY, f64::INFINITY);
        for (j, b) in kept.iter().enumerate() {
            if i == j {
                continue;
            }
            let d = (a - b).norm();
            if d < d1 {
                d2 = d1;
                d1 = d;
            } else if d < d2 {
                d2 = d;
            }
        }
        out.push(if d2 > 0.0 { d1 / d2 } else { 1.0 });
    }
    Ok(out)
}

pub fn complex_spacing_ratios(eigs: &[C64], filter: HalfPlane) -> Result<CsrHistogram> {
    CsrHistogram::from_ratios(spacing_ratios(eigs, filter)?, CsrHistogram::DEFAULT_BINS)
}

/// Spacing ratios of `samples` complex Ginibre matrices of size `n`.
pub fn csr_reference_ginibre<R: Rng + ?Sized>(n: usize, samples: usize, rng: &mut R) -> Result<CsrHistogram> {
    if n < 8 {
        return Err(Error::InvalidBounds(format!("Ginibre reference needs n >= 8, got {n}")));
    }
    let mut ratios = Vec::with_capacity(n * samples);
    for _ in 0..samples {
        let g = Mat::<C64>::from_fn(n, n, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(re, im)
        });
        let (vals, _) = eig_cplx(g.as_ref(), false).ok_or_else(|| fingerprint_error(g.as_ref()))?;
        ratios.extend(spacing_ratios(&vals, HalfPlane::All)?);
    }
    CsrHistogram::from_ratios(ratios, CsrHistogram::DEFAULT_BINS)
}

/// Spacing ratios of i.i.d. uniform points in the unit disk.
pub fn csr_reference_disk<R: Rng + ?Sized>(n: usize, samples: usize, rng: &mut R) -> Result<CsrHistogram> {
    let mut ratios = Vec::with_capacity(n * samples);
    for _ in 0..samples {
        let pts: Vec<C64> = (0..n)
            .map(|_| {
                let r = rng.random::<f64>().sqrt();
                let t = rng.random::<f64>() * std::f64::consts::TAU;
                C64::from_polar(r, t)
            })
            .collect();
        ratios.extend(spacing_ratios(&pts, HalfPlane::All)?);
    }
    CsrHistogram::from_ratios(ratios, CsrHistogram::DEFAULT_BINS)
}

/// A labelled predicted centre; degenerate weights share one label.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Center {
    pub weights: Vec<usize>,
    pub value: f64,
}

impl Center {
    pub fn label(&self) -> String {
        self.weights.iter().map(|k| k.to_string()).collect::<Vec<_>>().join("+")
    }
}

/// Centres `λ₀(k)` for `k = 1..=ℓ` at `k_max = 2`, merged where they
/// coincide exactly.
pub fn weight_centers(num_sites: usize) -> Vec<Center> {
    let mut out: Vec<(i128, Center)> = Vec::new();
    for k in 1..=num_sites {
        let num = liouvillian::lambda0_numerator(k, num_sites);
        match out.iter_mut().find(|(n, _)| *n == num) {
            Some((_, c)) => c.weights.push(k),
            None => out.push((
                num,
                Center {
                    weights: vec![k],
                    value: liouvillian::lambda0(k, num_sites).expect("valid weight"),
                },
            )),
        }
    }
    out.into_iter().map(|(_, c)| c).collect()
}

/// Size of the string set behind a centre, i.e. the expected population.
pub fn center_population(c: &Center, num_sites: usize) -> u128 {
    c.weights.iter().map(|&k| sector_size(num_sites, k)).sum()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Cluster {
    pub label: String,
    pub weights: Vec<usize>,
    pub predicted: f64,
    pub members: Vec<usize>,
    pub mean: C64,
    pub std_re: f64,
    pub std_im: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClusterReport {
    pub clusters: Vec<Cluster>,
    pub steady_state: Vec<usize>,
    /// `min inter-cluster Re gap / max intra-cluster Re spread`; `None` when
    /// fewer than two populated clusters or no spread.
    pub separation: Option<f64>,
    pub alpha: f64,
}

impl ClusterReport {
    pub fn by_weight(&self, k: usize) -> Option<&Cluster> {
        self.clusters.iter().find(|c| c.weights.contains(&k))
    }

    /// Label of the cluster each eigenvalue belongs to (`"ss"` for steady states).
    pub fn labels(&self, len: usize) -> Vec<String> {
        let mut out = vec![String::new(); len];
        for &i in &self.steady_state {
            out[i] = "ss".into();
        }
        for c in &self.clusters {
            for &i in &c.members {
                out[i] = c.label.clone();
            }
        }
        out
    }
}

fn moments(eigs: &[C64], members: &[usize]) -> (C64, f64, f64) {
    if members.is_empty() {
        return (C64::new(f64::NAN, f64::NAN), f64::NAN, f64::NAN);
    }
    let n = members.len() as f64;
    let mean = members.iter().map(|&i| eigs[i]).sum::<C64>() / n;
    let var_re = members.iter().map(|&i| (eigs[i].re - mean.re).powi(2)).sum::<f64>() / n;
    let var_im = members.iter().map(|&i| (eigs[i].im - mean.im).powi(2)).sum::<f64>() / n;
    (mean, var_re.sqrt(), var_im.sqrt())
}

/// Assigns each eigenvalue to the centre nearest in real part. Centres within
/// `1e-9` of each other are merged first.
pub fn cluster_by_centers(eigs: &[C64], centers: &[Center], alpha: f64) -> Result<ClusterReport> {
    if eigs.is_empty() || centers.is_empty() {
        return Err(Error::EmptyInput("cluster input"));
    }
    let mut merged: Vec<Center> = Vec::new();
    for c in centers {
        match merged.iter_mut().find(|m| (m.value - c.value).abs() < 1e-9) {
            Some(m) => {
                m.weights.extend(&c.weights);
                m.weights.sort_unstable();
            }
            None => merged.push(c.clone()),
        }
    }
    merged.sort_by(|a, b| b.value.total_cmp(&a.value));

    let mut steady = Vec::new();
    let mut members = vec![Vec::new(); merged.len()];
    for (i, l) in eigs.iter().enumerate() {
        if l.norm() < ZERO_TOL {
            steady.push(i);
            continue;
        }
        let best = (0..merged.len())
            .min_by(|&a, &b| {
                (l.re - merged[a].value)
                    .abs()
                    .total_cmp(&(l.re - merged[b].value).abs())
                    .then(a.cmp(&b))
            })
            .expect("non-empty");
        members[best].push(i);
    }
    let clusters: Vec<Cluster> = merged
        .into_iter()
        .zip(members)
        .map(|(c, m)| {
            let (mean, std_re, std_im) = moments(eigs, &m);
            Cluster {
                label: c.label(),
                weights: c.weights,
                predicted: c.value,
                members: m,
                mean,
                std_re,
                std_im,
            }
        })
        .collect();

    let populated: Vec<&Cluster> = clusters.iter().filter(|c| !c.members.is_empty()).collect();
    let separation = if populated.len() < 2 {
        None
    } else {
        let range = |c: &Cluster| {
            let lo = c.members.iter().map(|&i| eigs[i].re).fold(f64::INFINITY, f64::min);
            let hi = c.members.iter().map(|&i| eigs[i].re).fold(f64::NEG_INFINITY, f64::max);
            (lo, hi)
        };
        let spread = populated.iter().map(|c| { let (lo, hi) = range(c); hi - lo }).fold(0.0, f64::max);
        let gap = populated
            .windows(2)
            .map(|w| range(w[0]).0 - range(w[1]).1)
            .fold(f64::INFINITY, f64::min);
        (spread > 0.0).then(|| gap / spread)
    };
    Ok(ClusterReport {
        clusters,
        steady_state: steady,
        separation,
        alpha,
    })
}

/// Coordinates of a mode in the full Pauli basis, converting from the
/// vectorized computational basis when needed.
pub fn pauli_coordinates(mode: &[C64], basis: BasisTag, full: &PauliBasis) -> Vec<C64> {
    match basis {
        BasisTag::PauliBasis => mode.to_vec(),
        BasisTag::ComputationalVec => liouvillian::vec_to_pauli(mode, full),
    }
}

/// `w_k = Σ_{|S| = k} |⟨S|mode⟩|²` for the normalized mode, `k = 0..=ℓ`.
pub fn mode_weight_profile(mode: &[C64], full: &PauliBasis) -> Result<Vec<f64>> {
    if mode.len() != full.len() {
        return Err(Error::DimensionMismatch(format!(
            "mode has {} entries, basis {}",
            mode.len(),
            full.len()
        )));
    }
    let total: f64 = mode.iter().map(|c| c.norm_sqr()).sum();
    if total == 0.0 {
        return Err(Error::ZeroVector);
    }
    let mut w = vec![0.0; full.num_sites() + 1];
    for (i, c) in mode.iter().enumerate() {
        w[full.weight_of(i)] += c.norm_sqr() / total;
    }
    Ok(w)
}

/// Normalized Gaussian superposition of all weight-2 strings, as full-basis
/// coordinates.
pub fn random_weight2_operator<R: Rng + ?Sized>(full: &PauliBasis, rng: &mut R) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); full.len()];
    let range = full.sector(2);
    let mut norm = 0.0;
    for i in range {
        let x: f64 = rng.sample(StandardNormal);
        v[i] = C64::new(x, 0.0);
        norm += x * x;
    }
    let norm = norm.sqrt();
    for c in &mut v {
        *c /= norm;
    }
    v
}

/// `|Tr(ρ O)|` with `ρ` the mode scaled to unit operator 2-norm and `O`
/// given by Hermitian (real) full-basis coordinates.
pub fn overlap_with_operator(mode: &[C64], op: &[C64]) -> Result<f64> {
    let norm = mode.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::ZeroVector);
    }
    let dot: C64 = mode.iter().zip(op).map(|(a, b)| a * b).sum();
    Ok(dot.norm() / norm)
}

pub fn overlap_with_weight2<R: Rng + ?Sized>(mode: &[C64], full: &PauliBasis, rng: &mut R) -> Result<f64> {
    let op = random_weight2_operator(full, rng);
    overlap_with_operator(mode, &op)
}

/// Unit-norm full-basis coordinates of the Hamiltonian.
pub fn hamiltonian_coordinates(h: &HamiltonianSpec, full: &PauliBasis) -> Result<Vec<C64>> {
    let mut v = vec![C64::new(0.0, 0.0); full.len()];
    for (s, j) in &h.coefficients {
        let i = full.index_of(s).ok_or(Error::SiteMismatch {
            left: s.num_sites(),
            right: full.num_sites(),
        })?;
        v[i] += C64::new(*j, 0.0);
    }
    let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::ZeroVector);
    }
    for c in &mut v {
        *c /= norm;
    }
    Ok(v)
}

/// Operators of fixed weight commuting with `H`.
#[derive(Clone, Debug)]
pub struct Commutant {
    pub weight: usize,
    /// Orthonormal columns over the strings of the sector.
    pub vectors: Mat<f64>,
    pub singular_values: Vec<f64>,
}

impl Commutant {
    pub fn dim(&self) -> usize {
        self.vectors.ncols()
    }

    /// Column `c` as full-basis coordinates.
    pub fn full_coordinates(&self, c: usize, full: &PauliBasis) -> Vec<C64> {
        let range = full.sector(self.weight);
        let mut v = vec![C64::new(0.0, 0.0); full.len()];
        for (j, i) in range.enumerate() {
            v[i] = C64::new(self.vectors[(j, c)], 0.0);
        }
        v
    }

    /// Norm of the projection of a mode (full-basis coordinates) onto the span.
    pub fn projection_norm(&self, mode: &[C64], full: &PauliBasis) -> f64 {
        let norm = mode.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let range = full.sector(self.weight);
        let mut total = 0.0;
        for c in 0..self.dim() {
            let dot: C64 = range.clone().enumerate().map(|(j, i)| mode[i] * self.vectors[(j, c)]).sum();
            total += dot.norm_sqr();
        }
        total.sqrt() / norm
    }
}

/// Null space of `ad_H` restricted to the weight-`w` strings, where the image
/// lies in weights `w ± 1`.
pub fn commutant_basis(h: &HamiltonianSpec, w: usize) -> Result<Commutant> {
    let l = h.num_sites;
    if w > l {
        return Err(Error::InvalidBounds(format!("weight {w} on {l} sites")));
    }
    let lo = w.saturating_sub(1);
    let hi = (w + 1).min(l);
    let basis = PauliBasis::with_weights(l, lo, hi)?;
    let lu = liouvillian::unitary_pauli_matrix(h, &basis)?;
    let cols = basis.sector(w);
    let rows: Vec<usize> = (0..basis.len()).filter(|&i| basis.weight_of(i) != w).collect();
    let n = cols.len();
    if rows.is_empty() {
        return Ok(Commutant {
            weight: w,
            vectors: Mat::<f64>::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 }),
            singular_values: Vec::new(),
        });
    }
    let a = Mat::<f64>::from_fn(rows.len(), n, |i, j| lu.get(rows[i], cols.start + j));
    let svd = a.svd().map_err(|_| Error::Eigensolver {
        rows: rows.len(),
        fingerprint: 0,
    })?;
    let s = svd.S();
    let sv: Vec<f64> = (0..s.dim()).map(|i| s[i]).collect();
    let largest = sv.first().copied().unwrap_or(0.0);
    let rank = sv.iter().filter(|&&x| largest > 0.0 && x >= 1e-10 * largest).count();
    let v = svd.V();
    let vectors = Mat::<f64>::from_fn(n, n - rank, |i, j| v[(i, rank + j)]);
    Ok(Commutant {
        weight: w,
        vectors,
        singular_values: sv,
    })
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct PersistenceThresholds {
    /// Window radius as a fraction of `|λ₀(k)|`.
    pub delta: f64,
    /// Minimum weight-`k` content of a tracked mode.
    pub theta: f64,
    /// A centre counts as vacated when fewer than this fraction of its
    /// strings still have an eigenvalue inside the window.
    pub vacated_fraction: f64,
    /// The window must end at least this many standard deviations of the
    /// bulk real part away from the bulk mean.
    pub bulk_sigmas: f64,
}

impl Default for PersistenceThresholds {
    fn default() -> Self {
        PersistenceThresholds {
            delta: 0.05,
            theta: 0.8,
            vacated_fraction: 0.5,
            bulk_sigmas: 2.0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PersistentMode {
    pub weight: usize,
    pub center: f64,
    /// Eigenvalue at every α of the sweep, nearest to the centre.
    pub trajectory: Vec<(f64, C64)>,
    pub weight_profile: Vec<f64>,
    /// Norm of the projection onto the weight-`k` commutant, when supplied.
    pub commutant_overlap: Option<f64>,
    /// `|⟨mode|H⟩|`, when a Hamiltonian is supplied.
    pub hamiltonian_overlap: Option<f64>,
}

/// Modes that stay inside `λ₀(k) ± δ|λ₀(k)|` across the sweep while the rest
/// of the weight-`k` cluster leaves.
///
/// Only centres whose window lies clear of the bulk at the largest α are
/// searched: the bulk is every non-stationary eigenvalue there, and the
/// window edge must sit `bulk_sigmas` standard deviations from its mean.
///
/// Every spectrum must belong to `L_D + αL_U` (rescale weak-dissipation runs
/// first); the one with the largest α must carry right modes in the Pauli
/// basis.
pub fn persistent_modes(
    spectra: &[(f64, Spectrum)],
    thresholds: PersistenceThresholds,
    hamiltonian: Option<&HamiltonianSpec>,
    commutants: &[Commutant],
) -> Result<Vec<PersistentMode>> {
    let mut alphas: Vec<f64> = spectra.iter().map(|(a, _)| *a).collect();
    alphas.sort_by(f64::total_cmp);
    alphas.dedup();
    if alphas.len() < 2 || alphas.last().copied().unwrap_or(0.0) == 0.0 {
        return Err(Error::DegenerateSweep(
            "persistence needs at least two distinct α values, one of them non-zero".into(),
        ));
    }
    let (alpha_max, top) = spectra
        .iter()
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(a, s)| (*a, s))
        .expect("non-empty");
    let right = top
        .right_modes
        .as_ref()
        .ok_or_else(|| Error::DegenerateSweep("largest-α spectrum carries no right modes".into()))?;
    if top.basis != BasisTag::PauliBasis {
        return Err(Error::TagMismatch("persistence tracking expects Pauli-basis modes".into()));
    }
    let l = top.num_sites;
    let full = PauliBasis::full(l)?;
    let h_coords = hamiltonian.map(|h| hamiltonian_coordinates(h, &full)).transpose()?;

    let bulk: Vec<f64> = top.eigenvalues.iter().filter(|x| x.norm() >= ZERO_TOL).map(|x| x.re).collect();
    let bulk_mean = bulk.iter().sum::<f64>() / bulk.len().max(1) as f64;
    let bulk_std = (bulk.iter().map(|x| (x - bulk_mean).powi(2)).sum::<f64>() / bulk.len().max(1) as f64).sqrt();

    let mut out = Vec::new();
    for center in weight_centers(l) {
        let radius = thresholds.delta * center.value.abs();
        if (center.value - bulk_mean).abs() < radius + thresholds.bulk_sigmas * bulk_std {
            // Still inside the merged bulk; outliers cannot be told apart.
            continue;
        }
        let inside = |s: &Spectrum| -> Vec<usize> {
            (0..s.len())
                .filter(|&i| (s.eigenvalues[i] - C64::new(center.value, 0.0)).norm() < radius)
                .collect()
        };
        let near_top = inside(top);
        let population = center_population(&center, l) as f64;
        if near_top.len() as f64 >= thresholds.vacated_fraction * population {
            // The bulk has not left this centre, so nothing stands out.
            continue;
        }
        for &i in &near_top {
            let mode: Vec<C64> = (0..right.nrows()).map(|j| right[(j, i)]).collect();
            let profile = mode_weight_profile(&mode, &full)?;
            let Some(&k) = center.weights.iter().find(|&&k| profile[k] >= thresholds.theta) else {
                continue;
            };
            let mut trajectory = Vec::with_capacity(spectra.len());
            let mut stays = true;
            for (a, s) in spectra {
                let nearest = s
                    .eigenvalues
                    .iter()
                    .copied()
                    .min_by(|x, y| {
                        (x - top.eigenvalues[i]).norm().total_cmp(&(y - top.eigenvalues[i]).norm())
                    })
                    .expect("non-empty");
                let nearest = if *a == alpha_max { top.eigenvalues[i] } else { nearest };
                stays &= (nearest - C64::new(center.value, 0.0)).norm() < radius;
                trajectory.push((*a, nearest));
            }
            if !stays {
                continue;
            }
            let commutant_overlap = commutants
                .iter()
                .find(|c| c.weight == k)
                .map(|c| c.projection_norm(&mode, &full));
            let hamiltonian_overlap = h_coords
                .as_ref()
                .map(|hc| overlap_with_operator(&mode, hc))
                .transpose()?;
            out.push(PersistentMode {
                weight: k,
                center: center.value,
                trajectory,
                weight_profile: profile,
                commutant_overlap,
                hamiltonian_overlap,
            });
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub bins: usize,
}

impl Axis {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Result<Self> {
        if bins == 0 || !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidBounds(format!("histogram axis [{lo}, {hi}] with {bins} bins")));
        }
        Ok(Axis { lo, hi, bins })
    }

    /// Axis spanning `values`, padded so the extremes fall inside.
    pub fn covering(values: impl Iterator<Item = f64>, bins: usize) -> Result<Self> {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            return Err(Error::EmptyInput("histogram values"));
        }
        let pad = ((hi - lo) * 1e-9).max(1e-12);
        Axis::new(lo - pad, hi + pad, bins)
    }

    fn bin(&self, v: f64) -> Option<usize> {
        if v < self.lo || v > self.hi {
            return None;
        }
        Some((((v - self.lo) / (self.hi - self.lo)) * self.bins as f64).min(self.bins as f64 - 1.0) as usize)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectralDensity {
    pub re_axis: Axis,
    pub im_axis: Axis,
    /// Multipliers applied to Re and Im before binning.
    pub re_scale: f64,
    pub im_scale: f64,
    pub counts: Vec<u64>,
    pub total: u64,
    pub outside: u64,
}

impl SpectralDensity {
    /// Probability mass per bin, row-major over (re, im).
    pub fn probabilities(&self) -> Vec<f64> {
        let total = self.counts.iter().sum::<u64>().max(1) as f64;
        self.counts.iter().map(|&c| c as f64 / total).collect()
    }

    pub fn count(&self, re_bin: usize, im_bin: usize) -> u64 {
        self.counts[re_bin * self.im_axis.bins + im_bin]
    }

    pub fn occupied_bins(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    /// Total-variation distance `½ Σ |p − q|` between two densities on the same grid.
    pub fn tv_distance(&self, other: &SpectralDensity) -> Result<f64> {
        if self.re_axis != other.re_axis || self.im_axis != other.im_axis {
            return Err(Error::DimensionMismatch("densities on different grids".into()));
        }
        Ok(0.5
            * self
                .probabilities()
                .iter()
                .zip(other.probabilities())
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>())
    }
}

/// Normalized 2D histogram of `re_scale·Re λ`, `im_scale·Im λ`.
pub fn spectral_density(eigs: &[C64], re_axis: Axis, im_axis: Axis, re_scale: f64, im_scale: f64) -> Result<SpectralDensity> {
    if eigs.is_empty() {
        return Err(Error::EmptyInput("spectral density eigenvalues"));
    }
    let mut counts = vec![0u64; re_axis.bins * im_axis.bins];
    let mut outside = 0;
    for l in eigs {
        match (re_axis.bin(l.re * re_scale), im_axis.bin(l.im * im_scale)) {
            (Some(a), Some(b)) => counts[a * im_axis.bins + b] += 1,
            _ => outside += 1,
        }
    }
    Ok(SpectralDensity {
        re_axis,
        im_axis,
        re_scale,
        im_scale,
        counts,
        total: eigs.len() as u64,
        outside,
    })
}

/// Row vector `f` with `Tr(O X) = f · x` for `X` in the spectrum's basis.
pub fn trace_functional(obs: &[C64], num_sites: usize, basis: BasisTag) -> Vec<C64> {
    match basis {
        // Tr(S_a S_b) = δ_ab
        BasisTag::PauliBasis => obs.to_vec(),
        BasisTag::ComputationalVec => {
            // Tr(O X) = Σ_ij O_ji X_ij = vec(Oᵀ) · vec(X)
            let n = 1usize << num_sites;
            let mut f = vec![C64::new(0.0, 0.0); n * n];
            for i in 0..n {
                for j in 0..n {
                    f[i + n * j] = obs[j + n * i];
                }
            }
            f
        }
    }
}

/// `⟨O⟩(t) = Σᵢ Tr(O ρᴿᵢ) Tr(ρᴸᵢ ρ₀) e^{λᵢ t}` with `rho0` and `obs` given as
/// coordinates in the spectrum's basis.
pub fn evolve_expectation(spec: &Spectrum, rho0: &[C64], obs: &[C64], times: &[f64]) -> Result<Vec<C64>> {
    if spec.diagonalizable != Some(true) {
        return Err(Error::NotDiagonalizable {
            residual: spec.biorth_residual.unwrap_or(f64::NAN),
        });
    }
    let right = spec.right_modes.as_ref().expect("diagonalizable spectra carry modes");
    let left = spec.left_modes.as_ref().expect("diagonalizable spectra carry modes");
    let n = spec.len();
    if rho0.len() != n || obs.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "state/observable length {}/{} vs dimension {n}",
            rho0.len(),
            obs.len()
        )));
    }
    let f = trace_functional(obs, spec.num_sites, spec.basis);
    let weights: Vec<C64> = (0..n)
        .map(|i| {
            let o: C64 = (0..n).map(|j| f[j] * right[(j, i)]).sum();
            let c: C64 = (0..n).map(|j| left[(i, j)] * rho0[j]).sum();
            o * c
        })
        .collect();
    Ok(times
        .iter()
        .map(|&t| {
            weights
                .iter()
                .zip(&spec.eigenvalues)
                .map(|(w, l)| w * (l * t).exp())
                .sum()
        })
        .collect())
}
