#![allow(dead_code)]

use faer::Mat;
use lindhier::ensemble::{HamiltonianSpec, KossakowskiSample};
use lindhier::liouvillian::{assemble, build_dissipator, build_unitary_part, BasisTag, JumpOperatorSet};
use lindhier::pauli::{Letter, PauliBasis, PauliString};
use lindhier::spectral::{diagonalize, evolve_expectation, trace_functional, ModeRequest};
use lindhier::C64;
use rand::{Rng, SeedableRng};

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// 2×2 Pauli matrix written out by hand.
pub fn letter_matrix(l: Letter) -> Mat<C64> {
    let (o, z, i) = (c(1.0, 0.0), c(0.0, 0.0), c(0.0, 1.0));
    let m = match l {
        Letter::I => [[o, z], [z, o]],
        Letter::X => [[z, o], [o, z]],
        Letter::Y => [[z, -i], [i, z]],
        Letter::Z => [[o, z], [z, -o]],
    };
    Mat::from_fn(2, 2, |r, s| m[r][s])
}

pub fn kron(a: &Mat<C64>, b: &Mat<C64>) -> Mat<C64> {
    let (ar, ac, br, bc) = (a.nrows(), a.ncols(), b.nrows(), b.ncols());
    Mat::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

/// Dense matrix of a string from Kronecker products, site 0 leftmost.
pub fn oracle_dense(p: &PauliString) -> Mat<C64> {
    let mut m = Mat::from_fn(1, 1, |_, _| c(1.0, 0.0));
    for s in 0..p.num_sites() {
        m = kron(&m, &letter_matrix(p.letter(s)));
    }
    m
}

pub fn max_diff(a: &Mat<C64>, b: &Mat<C64>) -> f64 {
    assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()));
    let mut worst = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            worst = worst.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    worst
}

pub fn scale(m: &Mat<C64>, s: C64) -> Mat<C64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * s)
}

pub fn trace(m: &Mat<C64>) -> C64 {
    (0..m.nrows()).map(|i| m[(i, i)]).sum()
}

pub fn adjoint(m: &Mat<C64>) -> Mat<C64> {
    Mat::from_fn(m.ncols(), m.nrows(), |i, j| m[(j, i)].conj())
}

/// Every product, commutator and trace inner product of strings on `l`
/// sites against Kronecker-built matrices. Returns the number of pairs.
pub fn algebra_exhaustive(l: usize) -> Result<usize, String> {
    let basis = PauliBasis::full(l).map_err(|e| e.to_string())?;
    let n = 1usize << l;
    let dense: Vec<Mat<C64>> = basis.strings().iter().map(oracle_dense).collect();
    for (p, d) in basis.strings().iter().zip(&dense) {
        let lib = p.to_dense().map_err(|e| e.to_string())?;
        if max_diff(&lib, d) != 0.0 {
            return Err(format!("dense form of {p} differs"));
        }
        let herm = max_diff(&adjoint(d), d);
        let unit = max_diff(&(d * d), &Mat::from_fn(n, n, |i, j| c(f64::from(u8::from(i == j)), 0.0)));
        let tr = trace(d);
        if herm != 0.0 || unit != 0.0 || (!p.is_identity() && tr.norm() != 0.0) {
            return Err(format!("{p} is not a Hermitian traceless involution"));
        }
        let w = (0..l).filter(|&s| p.letter(s) != Letter::I).count();
        if p.weight() != w {
            return Err(format!("weight of {p}"));
        }
    }
    let mut pairs = 0;
    for (a, p) in basis.strings().iter().enumerate() {
        for (b, q) in basis.strings().iter().enumerate() {
            let (dp, dq) = (&dense[a], &dense[b]);
            let prod = dp * dq;
            let r = p.multiply(q).map_err(|e| e.to_string())?;
            let phase = r.phase.to_complex();
            if ![c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 1.0), c(0.0, -1.0)].contains(&phase) {
                return Err(format!("phase of {p}·{q} is {phase}"));
            }
            if max_diff(&prod, &scale(&oracle_dense(&r.string), phase)) != 0.0 {
                return Err(format!("{p}·{q} ≠ {phase}·{}", r.string));
            }
            let comm = &prod - &(dq * dp);
            let vanishes = max_diff(&comm, &Mat::zeros(n, n)) == 0.0;
            if p.commutes(q).map_err(|e| e.to_string())? != vanishes {
                return Err(format!("commutes({p}, {q}) wrong"));
            }
            match p.commutator(q).map_err(|e| e.to_string())? {
                None if !vanishes => return Err(format!("[{p}, {q}] reported zero")),
                Some(_) if vanishes => return Err(format!("[{p}, {q}] reported non-zero")),
                Some(r) => {
                    let want = scale(&oracle_dense(&r.string), r.phase.to_complex() * 2.0);
                    if max_diff(&comm, &want) != 0.0 {
                        return Err(format!("[{p}, {q}] ≠ 2·phase·string"));
                    }
                }
                None => {}
            }
            let ip = trace(&(&adjoint(dp) * dq)) / n as f64;
            let want = if a == b { c(1.0, 0.0) } else { c(0.0, 0.0) };
            if (ip - want).norm() != 0.0 {
                return Err(format!("Tr({p}†{q})/N = {ip}"));
            }
            pairs += 1;
        }
    }
    Ok(pairs)
}

pub fn identity(n: usize) -> Mat<C64> {
    Mat::from_fn(n, n, |i, j| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) })
}

/// `exp(M)` by scaling and squaring with a truncated Taylor series.
pub fn expm(m: &Mat<C64>) -> Mat<C64> {
    let n = m.nrows();
    let norm = (0..n)
        .map(|j| (0..n).map(|i| m[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut squarings = 0;
    let mut s = 1.0;
    while norm * s > 0.25 {
        s /= 2.0;
        squarings += 1;
    }
    let a = scale(m, c(s, 0.0));
    let mut term = identity(n);
    let mut sum = identity(n);
    for k in 1..=24 {
        term = scale(&(&term * &a), c(1.0 / k as f64, 0.0));
        sum = &sum + &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// Least-squares slope of `y = c·x²` through the origin.
pub fn quadratic_coefficient(xs: &[f64], ys: &[f64]) -> f64 {
    let num: f64 = xs.iter().zip(ys).map(|(x, y)| y * x * x).sum();
    let den: f64 = xs.iter().map(|x| x.powi(4)).sum();
    num / den
}

/// Ordinary least squares `y = a + b·x`; returns `(a, b, r²)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (a, b, r2)
}

fn random_state<R: Rng>(n: usize, rng: &mut R) -> Mat<C64> {
    let a = Mat::<C64>::from_fn(n, n, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    let rho = &a * &adjoint(&a);
    let t = trace(&rho);
    scale(&rho, C64::new(1.0, 0.0) / t)
}

fn random_observable<R: Rng>(n: usize, rng: &mut R) -> Mat<C64> {
    let a = Mat::<C64>::from_fn(n, n, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    &a + &adjoint(&a)
}

/// Column-stacked coordinates.
fn vec_of(m: &Mat<C64>) -> Vec<C64> {
    let n = m.nrows();
    (0..n * n).map(|k| m[(k % n, k / n)]).collect()
}

/// Largest deviation of the eigenmode expansion from `exp(tL)` propagation
/// over random states and observables.
pub fn check_against_expm(l: usize, seed: u64, states: usize, times: &[f64]) -> f64 {
    let k = KossakowskiSample::sample(l, 2, seed).unwrap();
    let jumps = JumpOperatorSet::new(l, 2).unwrap();
    let d = build_dissipator(&k, &jumps, BasisTag::ComputationalVec).unwrap();
    let h = HamiltonianSpec::random(l, seed, true).unwrap();
    let u = build_unitary_part(&h, BasisTag::ComputationalVec).unwrap();
    let lind = assemble(0.7, &u, &d).unwrap();
    let spec = diagonalize(&lind, ModeRequest::RightAndLeft).unwrap();
    let n = 1usize << l;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let props: Vec<Mat<C64>> = times
        .iter()
        .map(|&t| expm(&scale(&lind.matrix, C64::new(t, 0.0))))
        .collect();
    let mut worst = 0.0f64;
    for _ in 0..states {
        let rho = vec_of(&random_state(n, &mut rng));
        let obs = vec_of(&random_observable(n, &mut rng));
        let got = evolve_expectation(&spec, &rho, &obs, times).unwrap();
        let f = trace_functional(&obs, l, BasisTag::ComputationalVec);
        for (p, g) in props.iter().zip(&got) {
            let evolved: Vec<C64> = (0..n * n).map(|i| (0..n * n).map(|j| p[(i, j)] * rho[j]).sum()).collect();
            let want: C64 = f.iter().zip(&evolved).map(|(a, b)| a * b).sum();
            worst = worst.max((g - want).norm());
        }
    }
    worst
}
