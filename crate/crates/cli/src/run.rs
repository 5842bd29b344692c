use std::fmt::Write as _;

use lindhier::ensemble::{HamiltonianSpec, KossakowskiSample};
use lindhier::liouvillian::{
    assemble, assemble_weak, build_dissipator, build_unitary_part, lambda0, unitary_pauli_matrix,
    BasisTag, JumpOperatorSet, Superoperator,
};
use lindhier::pauli::PauliBasis;
use lindhier::perturbation::{prediction_csv, prediction_table};
use lindhier::rng::{stream_rng, SeedTree, Stream};
use lindhier::spectral::{
    self, cluster_by_centers, commutant_basis, complex_spacing_ratios, csr_reference_disk,
    csr_reference_ginibre, mode_weight_profile, overlap_with_operator, persistent_modes,
    random_weight2_operator, spectral_density, weight_centers, Axis, CsrHistogram, ModeRequest,
    Spectrum,
};
use lindhier::C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{HamiltonianChoice, Needs, Validated};
use crate::output::{num, OutputDir};
use crate::CliError;

pub struct Realization {
    pub index: usize,
    pub seed: u64,
    pub k: KossakowskiSample,
    pub h: HamiltonianSpec,
}

/// Samples depend only on the master seed and the realization index.
pub fn realize(cfg: &Validated, index: usize) -> Result<Realization, CliError> {
    let seed = SeedTree::new(cfg.seed).realization_seed(index);
    let mut krng = stream_rng(seed, Stream::Kossakowski);
    let k = KossakowskiSample::sample_with(cfg.sites, cfg.raw.k_max, seed, &mut krng)?;
    let h = match cfg.raw.hamiltonian {
        HamiltonianChoice::Random => {
            let mut hrng = stream_rng(seed, Stream::Hamiltonian);
            let mut h = HamiltonianSpec::random_with(cfg.sites, &mut hrng, cfg.raw.exact_h_norm)?;
            h.seed = Some(seed);
            h
        }
        HamiltonianChoice::Heisenberg => HamiltonianSpec::heisenberg(cfg.sites)?,
    };
    Ok(Realization { index, seed, k, h })
}

fn seeds(cfg: &Validated) -> Vec<u64> {
    let tree = SeedTree::new(cfg.seed);
    (0..cfg.raw.realizations).map(|i| tree.realization_seed(i)).collect()
}

/// Aggregation order is by realization seed, independent of scheduling.
fn by_seed<T>(results: Vec<Result<T, CliError>>, seed: impl Fn(&T) -> u64) -> Result<Vec<T>, CliError> {
    let mut v = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    v.sort_by_key(|t| seed(t));
    Ok(v)
}

struct Parts {
    l_d: Superoperator,
    l_u: Superoperator,
}

fn parts(cfg: &Validated, r: &Realization) -> Result<Parts, CliError> {
    if cfg.sites > 6 && !cfg.raw.allow_large {
        return Err(CliError::Guardrail(format!("{} sites", cfg.sites)));
    }
    let jumps = JumpOperatorSet::new(cfg.sites, cfg.raw.k_max)?;
    let l_d = build_dissipator(&r.k, &jumps, BasisTag::PauliBasis)?;
    let l_u = build_unitary_part(&r.h, BasisTag::PauliBasis)?;
    Ok(Parts { l_d, l_u })
}

fn write_samples(out: &mut OutputDir, r: &Realization) -> Result<(), CliError> {
    #[derive(Serialize)]
    struct Samples {
        index: usize,
        seed: u64,
        kossakowski: lindhier::ensemble::SampleRecord,
        hamiltonian: lindhier::ensemble::SampleRecord,
    }
    out.write_json(
        &format!("samples/realization_{:04}.json", r.index),
        &Samples {
            index: r.index,
            seed: r.seed,
            kossakowski: r.k.to_record(),
            hamiltonian: r.h.to_record(),
        },
    )
}

/// One row group of the eigenvalue CSV.
struct SpectrumRows {
    seed: u64,
    strength: f64,
    eigenvalues: Vec<C64>,
    labels: Vec<String>,
    profiles: Option<Vec<Vec<f64>>>,
    overlaps: Option<Vec<f64>>,
}

fn eigen_header(sites: usize) -> String {
    let mut h = String::from("seed,alpha_or_beta,mode_index,re,im,cluster_label");
    for k in 0..=sites {
        write!(h, ",w{k}").unwrap();
    }
    h.push_str(",overlap_w2\n");
    h
}

fn eigen_rows(rows: &SpectrumRows, sites: usize, out: &mut String) {
    for (i, l) in rows.eigenvalues.iter().enumerate() {
        write!(out, "{},{},{},{},{},{}", rows.seed, num(rows.strength), i, num(l.re), num(l.im), rows.labels[i]).unwrap();
        match &rows.profiles {
            Some(p) => {
                for w in &p[i] {
                    write!(out, ",{}", num(*w)).unwrap();
                }
            }
            None => {
                for _ in 0..=sites {
                    out.push(',');
                }
            }
        }
        match &rows.overlaps {
            Some(o) => writeln!(out, ",{}", num(o[i])).unwrap(),
            None => out.push_str(",\n"),
        }
    }
}

fn analyse(
    spec: &Spectrum,
    seed: u64,
    strength: f64,
    labels: Vec<String>,
    full: &PauliBasis,
    probe: &[C64],
) -> Result<SpectrumRows, CliError> {
    let (profiles, overlaps) = match &spec.right_modes {
        Some(_) => {
            let mut p = Vec::with_capacity(spec.len());
            let mut o = Vec::with_capacity(spec.len());
            for i in 0..spec.len() {
                let mode = spec.right_mode(i).expect("modes present");
                p.push(mode_weight_profile(&mode, full)?);
                o.push(overlap_with_operator(&mode, probe)?);
            }
            (Some(p), Some(o))
        }
        None => (None, None),
    };
    Ok(SpectrumRows {
        seed,
        strength,
        eigenvalues: spec.eigenvalues.clone(),
        labels,
        profiles,
        overlaps,
    })
}

fn mode_request(cfg: &Validated) -> ModeRequest {
    if cfg.raw.eigenvalues_only {
        ModeRequest::EigenvaluesOnly
    } else {
        ModeRequest::Right
    }
}

fn weight2_probe(cfg: &Validated, full: &PauliBasis) -> Vec<C64> {
    let mut rng = SeedTree::new(cfg.seed).rng(0, Stream::Analysis);
    random_weight2_operator(full, &mut rng)
}

#[derive(Serialize)]
struct ClusterEntry {
    seed: u64,
    alpha: f64,
    report: spectral::ClusterReport,
}

#[derive(Serialize)]
struct AxisMetadata {
    strength: f64,
    re_scale: f64,
    im_scale: f64,
    note: &'static str,
}

pub fn cmd_spectrum(cfg: Validated) -> Result<(), CliError> {
    let alphas = cfg.raw.alpha.clone().expect("validated");
    let mut out = OutputDir::create(&cfg.out)?;
    let full = PauliBasis::full(cfg.sites)?;
    let probe = weight2_probe(&cfg, &full);
    let centers = weight_centers(cfg.sites);

    let results: Vec<Result<(Realization, Vec<(SpectrumRows, ClusterEntry)>), CliError>> = (0..cfg.raw.realizations)
        .into_par_iter()
        .map(|index| {
            let r = realize(&cfg, index)?;
            let p = parts(&cfg, &r)?;
            let mut per_alpha = Vec::new();
            for &a in &alphas {
                let l = assemble(a, &p.l_u, &p.l_d)?;
                let spec = spectral::diagonalize(&l, mode_request(&cfg))?;
                let report = cluster_by_centers(&spec.eigenvalues, &centers, a)?;
                let labels = report.labels(spec.len());
                let rows = analyse(&spec, r.seed, a, labels, &full, &probe)?;
                per_alpha.push((rows, ClusterEntry { seed: r.seed, alpha: a, report }));
            }
            if cfg.raw.dump_superoperators {
                p.l_d.write_dump(&cfg.out.join(format!("dumps/ld_{:04}", index)))?;
                p.l_u.write_dump(&cfg.out.join(format!("dumps/lu_{:04}", index)))?;
            }
            Ok((r, per_alpha))
        })
        .collect();

    let mut csv = eigen_header(cfg.sites);
    let mut clusters = Vec::new();
    for (r, per_alpha) in by_seed(results, |t| t.0.seed)? {
        write_samples(&mut out, &r)?;
        for (rows, entry) in per_alpha {
            eigen_rows(&rows, cfg.sites, &mut csv);
            clusters.push(entry);
        }
        if cfg.raw.dump_superoperators {
            for stem in [format!("dumps/ld_{:04}", r.index), format!("dumps/lu_{:04}", r.index)] {
                out.register(&format!("{stem}.json"))?;
                out.register(&format!("{stem}.bin"))?;
            }
        }
    }
    out.write("eigenvalues.csv", csv.as_bytes())?;
    out.write_json("clusters.json", &clusters)?;
    out.write(
        "predictions.csv",
        prediction_csv(&prediction_table(cfg.sites, &alphas)?).as_bytes(),
    )?;
    let axes: Vec<AxisMetadata> = alphas
        .iter()
        .map(|&a| AxisMetadata {
            strength: a,
            re_scale: 1.0,
            im_scale: if a > 0.0 { 1.0 / a } else { 1.0 },
            note: "imaginary part rescaled by 1/alpha for display",
        })
        .collect();
    out.write_json("axes.json", &axes)?;
    if cfg.raw.gnuplot {
        out.write("plot.gp", gnuplot_stub().as_bytes())?;
    }
    let s = seeds(&cfg);
    out.finish("spectrum", &cfg.raw, s)
}

fn gnuplot_stub() -> String {
    "set datafile separator ','\n\
     set xlabel 'Re(lambda)'\n\
     set ylabel 'Im(lambda)'\n\
     plot 'eigenvalues.csv' every ::1 using 4:5 with points pt 7 ps 0.3 notitle\n"
        .to_string()
}

pub fn cmd_sweep_beta(cfg: Validated) -> Result<(), CliError> {
    let betas = cfg.raw.beta.clone().expect("validated");
    let mut out = OutputDir::create(&cfg.out)?;
    let full = PauliBasis::full(cfg.sites)?;
    let probe = weight2_probe(&cfg, &full);
    let centers = weight_centers(cfg.sites);

    let results: Vec<Result<(Realization, Vec<(SpectrumRows, f64)>), CliError>> = (0..cfg.raw.realizations)
        .into_par_iter()
        .map(|index| {
            let r = realize(&cfg, index)?;
            let p = parts(&cfg, &r)?;
            let mut per_beta = Vec::new();
            for &b in &betas {
                let l = assemble_weak(b, &p.l_u, &p.l_d)?;
                let spec = spectral::diagonalize(&l, mode_request(&cfg))?;
                let labels = if b > 0.0 {
                    cluster_by_centers(&spec.scaled(1.0 / b).eigenvalues, &centers, 1.0 / b)?.labels(spec.len())
                } else {
                    vec![String::new(); spec.len()]
                };
                let mean_re = spec.mean().re;
                per_beta.push((analyse(&spec, r.seed, b, labels, &full, &probe)?, mean_re));
            }
            Ok((r, per_beta))
        })
        .collect();

    let mut csv = eigen_header(cfg.sites);
    let mut means = String::from("seed,beta,mean_re,mean_re_over_beta\n");
    for (r, per_beta) in by_seed(results, |t| t.0.seed)? {
        write_samples(&mut out, &r)?;
        for (rows, mean_re) in per_beta {
            eigen_rows(&rows, cfg.sites, &mut csv);
            let ratio = if rows.strength > 0.0 { num(mean_re / rows.strength) } else { String::new() };
            writeln!(means, "{},{},{},{}", r.seed, num(rows.strength), num(mean_re), ratio).unwrap();
        }
    }
    out.write("eigenvalues.csv", csv.as_bytes())?;
    out.write("mean_re.csv", means.as_bytes())?;
    let axes: Vec<AxisMetadata> = betas
        .iter()
        .map(|&b| AxisMetadata {
            strength: b,
            re_scale: if b > 0.0 { 1.0 / b } else { 1.0 },
            im_scale: 1.0,
            note: "real part rescaled by 1/beta for display",
        })
        .collect();
    out.write_json("axes.json", &axes)?;
    let s = seeds(&cfg);
    out.finish("sweep-beta", &cfg.raw, s)
}

fn histogram_csv(h: &CsrHistogram) -> String {
    let mut s = String::from("bin_lo,bin_hi,count,density\n");
    for ((e, c), d) in h.edges.windows(2).zip(&h.counts).zip(h.density()) {
        writeln!(s, "{},{},{},{}", num(e[0]), num(e[1]), c, num(d)).unwrap();
    }
    s
}

fn analytic_csv(bins: usize, cdf: fn(f64) -> f64) -> String {
    let mut s = String::from("bin_lo,bin_hi,count,density\n");
    for i in 0..bins {
        let (lo, hi) = (i as f64 / bins as f64, (i + 1) as f64 / bins as f64);
        writeln!(s, "{},{},,{}", num(lo), num(hi), num((cdf(hi) - cdf(lo)) / (hi - lo))).unwrap();
    }
    s
}

#[derive(Serialize)]
struct CsrSummary {
    label: String,
    ratios: usize,
    mean_r: f64,
    ks_ginibre: f64,
    ks_poisson_1d: f64,
    ks_poisson_2d: f64,
}

pub fn cmd_csr(cfg: Validated) -> Result<(), CliError> {
    let mut out = OutputDir::create(&cfg.out)?;
    let filter = cfg.raw.csr_filter;
    let bins = cfg.raw.csr_bins;
    let mut runs: Vec<(String, Option<f64>)> = Vec::new();
    if cfg.raw.unitary_only {
        runs.push(("unitary".into(), None));
    }
    for &a in cfg.raw.alpha.iter().flatten() {
        runs.push((format!("alpha_{a}"), Some(a)));
    }
    if runs.is_empty() {
        return Err(CliError::Config("csr needs --alpha values or --unitary-only".into()));
    }

    let per_realization: Vec<Result<(Realization, Vec<Vec<f64>>), CliError>> = (0..cfg.raw.realizations)
        .into_par_iter()
        .map(|index| {
            let r = realize(&cfg, index)?;
            let p = parts(&cfg, &r)?;
            let mut ratios = Vec::new();
            for (label, a) in &runs {
                let eigs = match a {
                    Some(a) => spectral::eigenvalues(&assemble(*a, &p.l_u, &p.l_d)?)?,
                    None => spectral::eigenvalues(&p.l_u)?,
                };
                let h = complex_spacing_ratios(&eigs, filter).map_err(|e| CliError::Analysis {
                    context: format!("realization {index}, {label}"),
                    source: e,
                })?;
                ratios.push(h.ratios);
            }
            Ok((r, ratios))
        })
        .collect();

    let mut pooled: Vec<Vec<f64>> = vec![Vec::new(); runs.len()];
    for (r, ratios) in by_seed(per_realization, |t| t.0.seed)? {
        write_samples(&mut out, &r)?;
        for (p, rs) in pooled.iter_mut().zip(ratios) {
            p.extend(rs);
        }
    }
    let mut rng = SeedTree::new(cfg.seed).rng(0, Stream::Reference);
    let ginibre = csr_reference_ginibre(cfg.raw.ginibre_size, cfg.raw.ginibre_samples, &mut rng)?;
    let ginibre = CsrHistogram::from_ratios(ginibre.ratios, bins)?;
    let disk = csr_reference_disk(cfg.raw.ginibre_size, cfg.raw.ginibre_samples, &mut rng)?;
    out.write("csr_ginibre.csv", histogram_csv(&ginibre).as_bytes())?;
    out.write("csr_disk.csv", histogram_csv(&CsrHistogram::from_ratios(disk.ratios, bins)?).as_bytes())?;
    out.write("csr_poisson_1d.csv", analytic_csv(bins, spectral::poisson_1d_cdf).as_bytes())?;
    out.write("csr_poisson_2d.csv", analytic_csv(bins, spectral::poisson_2d_cdf).as_bytes())?;

    let mut summary = Vec::new();
    for ((label, _), ratios) in runs.iter().zip(pooled) {
        let h = CsrHistogram::from_ratios(ratios, bins)?;
        out.write(&format!("csr_{label}.csv"), histogram_csv(&h).as_bytes())?;
        summary.push(CsrSummary {
            label: label.clone(),
            ratios: h.ratios.len(),
            mean_r: h.mean,
            ks_ginibre: h.ks_distance(&ginibre),
            ks_poisson_1d: h.ks_to_cdf(spectral::poisson_1d_cdf),
            ks_poisson_2d: h.ks_to_cdf(spectral::poisson_2d_cdf),
        });
    }
    out.write_json("csr_summary.json", &summary)?;
    let s = seeds(&cfg);
    out.finish("csr", &cfg.raw, s)
}

#[derive(Serialize)]
struct BlockEntry {
    k_row: usize,
    k_col: usize,
    nonzeros: usize,
    max_abs: f64,
}

#[derive(Serialize)]
struct HeisenbergSummary {
    commutant_dims: Vec<(usize, usize)>,
    thresholds: spectral::PersistenceThresholds,
    persistent: Vec<spectral::PersistentMode>,
    persistent_by_weight: Vec<(usize, usize)>,
}

pub fn cmd_heisenberg(cfg: Validated) -> Result<(), CliError> {
    if cfg.raw.hamiltonian != HamiltonianChoice::Heisenberg {
        return Err(CliError::Config("heisenberg requires --hamiltonian heisenberg".into()));
    }
    let alphas = cfg.raw.alpha.clone().expect("validated");
    let mut out = OutputDir::create(&cfg.out)?;
    let full = PauliBasis::full(cfg.sites)?;
    let probe = weight2_probe(&cfg, &full);
    let centers = weight_centers(cfg.sites);
    let h = HamiltonianSpec::heisenberg(cfg.sites)?;

    let commutants: Vec<spectral::Commutant> = (1..=cfg.sites.min(2))
        .map(|w| commutant_basis(&h, w))
        .collect::<Result<_, _>>()?;

    let lu = unitary_pauli_matrix(&h, &full)?;
    let mut blocks = Vec::new();
    for kr in 0..=cfg.sites {
        for kc in 0..=cfg.sites {
            let (mut nnz, mut max) = (0, 0.0f64);
            for i in full.sector(kr) {
                for &(j, v) in &lu.rows[i] {
                    if full.weight_of(j) == kc && v != 0.0 {
                        nnz += 1;
                        max = max.max(v.abs());
                    }
                }
            }
            blocks.push(BlockEntry { k_row: kr, k_col: kc, nonzeros: nnz, max_abs: max });
        }
    }
    let mut block_csv = String::from("k_row,k_col,nonzeros,max_abs\n");
    for b in &blocks {
        writeln!(block_csv, "{},{},{},{}", b.k_row, b.k_col, b.nonzeros, num(b.max_abs)).unwrap();
    }
    out.write("lu_blocks.csv", block_csv.as_bytes())?;

    let alpha_max = alphas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let results: Vec<Result<(Realization, Vec<SpectrumRows>, HeisenbergSummary), CliError>> = (0..cfg.raw.realizations)
        .into_par_iter()
        .map(|index| {
            let r = realize(&cfg, index)?;
            let p = parts(&cfg, &r)?;
            let mut rows = Vec::new();
            let mut sweep = Vec::new();
            for &a in &alphas {
                let request = if a == alpha_max { ModeRequest::Right } else { mode_request(&cfg) };
                let spec = spectral::diagonalize(&assemble(a, &p.l_u, &p.l_d)?, request)?;
                let labels = cluster_by_centers(&spec.eigenvalues, &centers, a)?.labels(spec.len());
                rows.push(analyse(&spec, r.seed, a, labels, &full, &probe)?);
                sweep.push((a, spec));
            }
            let persistent = match persistent_modes(&sweep, cfg.raw.persistence, Some(&r.h), &commutants) {
                Ok(p) => p,
                Err(lindhier::Error::DegenerateSweep(_)) => Vec::new(),
                Err(e) => return Err(e.into()),
            };
            let mut by_weight: Vec<(usize, usize)> = Vec::new();
            for m in &persistent {
                match by_weight.iter_mut().find(|(k, _)| *k == m.weight) {
                    Some(e) => e.1 += 1,
                    None => by_weight.push((m.weight, 1)),
                }
            }
            by_weight.sort_unstable();
            let summary = HeisenbergSummary {
                commutant_dims: commutants.iter().map(|c| (c.weight, c.dim())).collect(),
                thresholds: cfg.raw.persistence,
                persistent,
                persistent_by_weight: by_weight,
            };
            Ok((r, rows, summary))
        })
        .collect();

    let mut csv = eigen_header(cfg.sites);
    let mut summaries = Vec::new();
    for (r, rows, summary) in by_seed(results, |t| t.0.seed)? {
        write_samples(&mut out, &r)?;
        for row in &rows {
            eigen_rows(row, cfg.sites, &mut csv);
        }
        summaries.push(summary);
    }
    out.write("eigenvalues.csv", csv.as_bytes())?;
    out.write_json("heisenberg.json", &summaries)?;
    let centers_out: Vec<(usize, f64)> = (1..=cfg.sites).map(|k| (k, lambda0(k, cfg.sites).unwrap())).collect();
    out.write_json("centers.json", &centers_out)?;
    let s = seeds(&cfg);
    out.finish("heisenberg", &cfg.raw, s)
}

#[derive(Serialize)]
struct DensitySummary {
    alpha: f64,
    re_scale: f64,
    im_scale: f64,
    tv_single_vs_pool: Vec<f64>,
    tv_mean: f64,
    tv_max: f64,
    wide_error_bars: bool,
}

fn density_csv(d: &spectral::SpectralDensity) -> String {
    let mut s = String::from("re_lo,re_hi,im_lo,im_hi,count,density\n");
    let p = d.probabilities();
    let (ra, ia) = (d.re_axis, d.im_axis);
    let rw = (ra.hi - ra.lo) / ra.bins as f64;
    let iw = (ia.hi - ia.lo) / ia.bins as f64;
    for a in 0..ra.bins {
        for b in 0..ia.bins {
            let idx = a * ia.bins + b;
            writeln!(
                s,
                "{},{},{},{},{},{}",
                num(ra.lo + a as f64 * rw),
                num(ra.lo + (a + 1) as f64 * rw),
                num(ia.lo + b as f64 * iw),
                num(ia.lo + (b + 1) as f64 * iw),
                d.counts[idx],
                num(p[idx] / (rw * iw))
            )
            .unwrap();
        }
    }
    s
}

pub fn cmd_density(cfg: Validated) -> Result<(), CliError> {
    let alphas = cfg.raw.alpha.clone().expect("validated");
    let mut out = OutputDir::create(&cfg.out)?;
    let spectra: Vec<Result<(Realization, Vec<Vec<C64>>), CliError>> = (0..cfg.raw.realizations)
        .into_par_iter()
        .map(|index| {
            let r = realize(&cfg, index)?;
            let p = parts(&cfg, &r)?;
            let eigs = alphas
                .iter()
                .map(|&a| Ok(spectral::eigenvalues(&assemble(a, &p.l_u, &p.l_d)?)?))
                .collect::<Result<Vec<_>, CliError>>()?;
            Ok((r, eigs))
        })
        .collect();
    let mut per_alpha: Vec<Vec<Vec<C64>>> = vec![Vec::new(); alphas.len()];
    for (r, eigs) in by_seed(spectra, |t| t.0.seed)? {
        write_samples(&mut out, &r)?;
        for (slot, e) in per_alpha.iter_mut().zip(eigs) {
            slot.push(e);
        }
    }
    let mut summaries = Vec::new();
    for (a, realizations) in alphas.iter().zip(per_alpha) {
        let im_scale = if *a > 0.0 { 1.0 / a } else { 1.0 };
        let pooled: Vec<C64> = realizations.iter().flatten().copied().collect();
        let re_axis = Axis::covering(pooled.iter().map(|l| l.re), cfg.raw.re_bins)?;
        let im_axis = Axis::covering(pooled.iter().map(|l| l.im * im_scale), cfg.raw.im_bins)?;
        let pool = spectral_density(&pooled, re_axis, im_axis, 1.0, im_scale)?;
        out.write(&format!("density_alpha_{a}_pooled.csv"), density_csv(&pool).as_bytes())?;
        let mut tv = Vec::new();
        for (i, e) in realizations.iter().enumerate() {
            let single = spectral_density(e, re_axis, im_axis, 1.0, im_scale)?;
            if i == 0 {
                out.write(&format!("density_alpha_{a}_single.csv"), density_csv(&single).as_bytes())?;
            }
            tv.push(single.tv_distance(&pool)?);
        }
        let tv_mean = tv.iter().sum::<f64>() / tv.len() as f64;
        let tv_max = tv.iter().copied().fold(0.0, f64::max);
        summaries.push(DensitySummary {
            alpha: *a,
            re_scale: 1.0,
            im_scale,
            tv_single_vs_pool: tv,
            tv_mean,
            tv_max,
            wide_error_bars: realizations.len() < 10,
        });
    }
    out.write_json("density_summary.json", &summaries)?;
    let s = seeds(&cfg);
    out.finish("density", &cfg.raw, s)
}

pub fn needs_for(command: &str) -> (Needs, usize) {
    match command {
        "spectrum" | "heisenberg" => (Needs::Alpha, 1),
        "sweep-beta" => (Needs::Beta, 1),
        "density" => (Needs::Alpha, 2),
        _ => (Needs::AlphaOrNone, 1),
    }
}
