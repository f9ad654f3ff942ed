use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use super::input::{self, basis_or_file, complex, level_index, weight_index};
use super::report::{format_f64, Check, Report};
use super::{
    BellArgs, CliError, CliResult, CoherentArgs, GlauberArgs, KindArg, ModeArg, SourceArg, SplitArgs, StateArg,
    StateSelect, UniquenessArgs, VerifyAlgebraArgs,
};
use crate::algebra::{
    casimir_su2, su11_generators, su2_generators, verify_structure, weyl_heisenberg_generators, AlgebraRep, Ket,
    Operator, SpinLabel,
};
use crate::belltest::{horodecki_bound, optimize_chsh, ChshOptions, TSIRELSON};
use crate::coherent::{
    bch_residual, displacement, generalized_coherent, glauber_coherent, isotropy_phase_check, su11_coherent,
    su11_tau_to_eta, su2_coherent, su2_zeta_estimate, CoherentParam, GlauberParam,
};
use crate::splitting::{
    beamsplitter_split, build_isometry, entropy_from_schmidt, factor_state, mean_annihilation, schmidt_values,
    split_state, SplitSpec, DEFAULT_SCHMIDT_TOL,
};
use crate::uniqueness::{haar_scan, minimize_entropy, ScanOptions, ScanRecord, ScanSource};

const ISOMETRY_TOL: f64 = 1e-12;
const NORM_TOL: f64 = 1e-12;
const ISOTROPY_DELTA: f64 = 0.37;
/// Minima below this entropy must lie on the coherent manifold.
const MINIMUM_ENTROPY: f64 = 1e-7;
const MINIMUM_FIDELITY_GAP: f64 = 1e-5;
const SU11_DEFAULT_DIM: usize = 128;
const SU11_SPLIT_DEFAULT_DIM: usize = 64;
const WH_SPLIT_DEFAULT_DIM: usize = 16;

fn config(args: &impl Serialize) -> serde_json::Value {
    serde_json::to_value(args).unwrap_or(serde_json::Value::Null)
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn amplitudes(k: &Ket) -> Vec<[f64; 2]> {
    k.amplitudes().iter().map(|z| pair(*z)).collect()
}

fn corrupt(rep: &mut AlgebraRep) {
    if rep.dim() >= 2 {
        let v = rep.raise.get(1, 0) + Complex64::new(1e-3, 0.0);
        rep.raise.set(1, 0, v);
    }
}

fn structure_checks(report: &mut Report, label: &str, rep: &AlgebraRep, tol: f64) -> Vec<String> {
    let s = verify_structure(rep, tol);
    for r in &s.relations {
        report.check(Check::at_most(format!("{label}: {}", r.relation), r.residual, tol));
    }
    s.failures().iter().map(|f| format!("{label}: {f}")).collect()
}

pub fn verify_algebra(a: &VerifyAlgebraArgs) -> CliResult<Report> {
    let mut report = Report::new("verify-algebra", config(a));
    let mut failed = Vec::new();
    match a.kind {
        KindArg::Su2 => {
            let labels: Vec<SpinLabel> = match &a.j {
                Some(j) => vec![input::spin(j)?],
                None => (0..=input::spin(&a.j_max)?.twice_j()).map(SpinLabel::from_twice).collect(),
            };
            for j in labels {
                let mut rep = su2_generators(j);
                if a.corrupt {
                    corrupt(&mut rep);
                }
                let label = format!("j={j}");
                failed.extend(structure_checks(&mut report, &label, &rep, a.tol));
                let expected = Operator::identity(j.dim()).scale(Complex64::new(j.j() * (j.j() + 1.0), 0.0));
                let dev = casimir_su2(&rep)?.sub(&expected)?.max_abs();
                let c = Check::at_most(format!("{label}: casimir = j(j+1)"), dev, a.tol);
                if !c.pass {
                    failed.push(c.name.clone());
                }
                report.check(c);
            }
        }
        KindArg::Su11 => {
            let mut rep = su11_generators(input::bargmann(&a.k, a.dim)?);
            if a.corrupt {
                corrupt(&mut rep);
            }
            failed.extend(structure_checks(&mut report, &format!("k={} dim={}", a.k, a.dim), &rep, a.tol));
        }
        KindArg::Wh => {
            let mut rep = weyl_heisenberg_generators(a.dim)?;
            if a.corrupt {
                corrupt(&mut rep);
            }
            failed.extend(structure_checks(&mut report, &format!("dim={}", a.dim), &rep, a.tol));
        }
    }
    report.set("failed_relations", failed);
    Ok(report)
}

struct ThreeWays {
    closed: Ket,
    displaced: Ket,
    disentangled: Ket,
    bch: f64,
    bch_tol: f64,
    rep: AlgebraRep,
}

pub fn coherent(a: &CoherentArgs) -> CliResult<Report> {
    let mut report = Report::new("coherent", config(a));
    let ways = match a.kind {
        KindArg::Su2 => {
            let j = input::spin(&a.j)?;
            let p = CoherentParam::new(complex(a.zeta))?;
            let rep = su2_generators(j);
            report.set("zeta", pair(p.zeta()));
            report.set("xi", pair(p.xi()));
            ThreeWays {
                closed: su2_coherent(j, p),
                displaced: displacement(&rep, p.xi())?.apply(&rep.lowest_weight)?,
                disentangled: generalized_coherent(&rep, p.zeta())?,
                bch: bch_residual(&rep, p.xi())?,
                bch_tol: a.tol,
                rep,
            }
        }
        KindArg::Su11 => {
            let k = input::bargmann(&a.k, a.dim.unwrap_or(SU11_DEFAULT_DIM))?;
            let tau = complex(a.zeta);
            let eta = su11_tau_to_eta(tau)?;
            let rep = su11_generators(k);
            report.set("tau", pair(tau));
            report.set("eta", pair(eta));
            ThreeWays {
                closed: su11_coherent(k, tau)?.normalized()?,
                displaced: displacement(&rep, eta)?.apply(&rep.lowest_weight)?,
                disentangled: generalized_coherent(&rep, tau)?,
                bch: bch_residual(&rep, eta)?,
                bch_tol: 1e-8,
                rep,
            }
        }
        KindArg::Wh => {
            let alpha = complex(a.alpha);
            let dim = a.dim.unwrap_or_else(|| GlauberParam::precise_dim(alpha));
            let p = GlauberParam::new(alpha, dim)?;
            let rep = weyl_heisenberg_generators(p.dim())?;
            report.set("alpha", pair(alpha));
            report.set("dim", p.dim());
            ThreeWays {
                closed: glauber_coherent(p),
                displaced: displacement(&rep, alpha)?.apply(&rep.lowest_weight)?,
                disentangled: generalized_coherent(&rep, alpha)?,
                bch: bch_residual(&rep, alpha)?,
                bch_tol: 1e-8,
                rep,
            }
        }
    };
    let fid = |x: &Ket, y: &Ket| x.fidelity(y);
    report.check(Check::above("fidelity closed vs displaced", fid(&ways.closed, &ways.displaced)?, 1.0 - a.tol));
    report.check(Check::above("fidelity closed vs disentangled", fid(&ways.closed, &ways.disentangled)?, 1.0 - a.tol));
    report.check(Check::above(
        "fidelity displaced vs disentangled",
        fid(&ways.displaced, &ways.disentangled)?,
        1.0 - a.tol,
    ));
    report.check(Check::below("bch residual", ways.bch, ways.bch_tol));
    let (phase, iso) = isotropy_phase_check(&ways.rep, ISOTROPY_DELTA)?;
    report.check(Check::below("isotropy phase residual", iso, a.tol));
    report.set("isotropy_phase", pair(phase));
    let amplitude = if a.kind == KindArg::Wh { a.alpha } else { a.zeta };
    if amplitude == [0.0, 0.0] {
        let lw = &ways.rep.lowest_weight;
        let mut worst = 0.0f64;
        for k in [&ways.closed, &ways.displaced, &ways.disentangled] {
            worst = worst.max(k.sub(lw)?.norm());
        }
        report.check(Check::at_most("distance from lowest weight", worst, 0.0));
    }
    report.set("state", amplitudes(&ways.closed));
    Ok(report)
}

/// The split system, its input state and, for coherent input, the expected
/// factors.
struct Prepared {
    spec: SplitSpec,
    psi: Ket,
    expected: Option<(Ket, Ket)>,
    lowest: Option<(Ket, Ket)>,
    spins: Option<(SpinLabel, SpinLabel)>,
}

fn prepare(kind: KindArg, split: Option<&str>, dim: Option<usize>, dim_out: Option<usize>, theta_bs: f64, sel: &StateSelect) -> CliResult<Prepared> {
    let need_split = || split.ok_or_else(|| CliError::Validation("--split is required for this kind".into()));
    let is_cs = sel.state == StateArg::Cs;
    let p = match kind {
        KindArg::Su2 => {
            let (b, c) = input::spin_pair(need_split()?)?;
            let spec = SplitSpec::su2_parts(b, c);
            let SplitSpec::Su2 { a, .. } = spec else { unreachable!() };
            let zeta = CoherentParam::new(complex(sel.zeta))?;
            let psi = if is_cs { su2_coherent(a, zeta) } else { basis_or_file(sel, a.dim(), |m| weight_index(m, a))? };
            Prepared {
                spec,
                psi,
                expected: is_cs.then(|| (su2_coherent(b, zeta), su2_coherent(c, zeta))),
                lowest: Some((Ket::basis(b.dim(), 0), Ket::basis(c.dim(), 0))),
                spins: Some((b, c)),
            }
        }
        KindArg::Su11 => {
            let (kb, kc) = input::parse_pair(need_split()?)?;
            let d = dim.unwrap_or(SU11_SPLIT_DEFAULT_DIM);
            let (b, c) = (input::bargmann(&kb, d)?, input::bargmann(&kc, d)?);
            let a = crate::algebra::BargmannIndex::new(b.k() + c.k(), d)?;
            let spec = SplitSpec::su11(a, b, c)?;
            let (rep_a, rep_b, rep_c) = spec.reps()?;
            let tau = complex(sel.zeta);
            let psi = if is_cs { generalized_coherent(&rep_a, tau)? } else { basis_or_file(sel, d, |m| level_index(m, d))? };
            let expected = if is_cs {
                Some((generalized_coherent(&rep_b, tau)?, generalized_coherent(&rep_c, tau)?))
            } else {
                None
            };
            Prepared {
                spec,
                psi,
                expected,
                lowest: Some((rep_b.lowest_weight.clone(), rep_c.lowest_weight.clone())),
                spins: None,
            }
        }
        KindArg::Wh => {
            let d = dim.unwrap_or(WH_SPLIT_DEFAULT_DIM);
            let d_out = dim_out.unwrap_or(d);
            let spec = SplitSpec::weyl_heisenberg(d, d_out, theta_bs)?;
            let alpha = complex(sel.alpha);
            let psi = if is_cs {
                glauber_coherent(GlauberParam::new(alpha, d)?)
            } else {
                basis_or_file(sel, d, |m| level_index(m, d))?
            };
            let (nu, mu) = theta_bs.sin_cos();
            let expected = if is_cs {
                Some((
                    glauber_coherent(GlauberParam::new(alpha * mu, d_out)?),
                    glauber_coherent(GlauberParam::new(alpha * nu, d_out)?),
                ))
            } else {
                None
            };
            Prepared {
                spec,
                psi,
                expected,
                lowest: Some((Ket::basis(d_out, 0), Ket::basis(d_out, 0))),
                spins: None,
            }
        }
    };
    Ok(p)
}

pub fn split(a: &SplitArgs) -> CliResult<Report> {
    let mut report = Report::new("split", config(a));
    let p = prepare(a.kind, a.split.as_deref(), a.dim, a.dim_out, a.theta_bs, &a.state)?;
    let tol = a.tol.unwrap_or(if a.kind == KindArg::Su2 { 1e-10 } else { 1e-8 });
    let v = build_isometry(&p.spec)?;
    let (_, db, dc) = p.spec.dims();
    report.check(Check::at_most("isometry orthonormality residual", v.orthonormality_residual(), ISOMETRY_TOL));
    let out = split_state(&p.psi, &v)?;
    let raw_norm = (v.matrix() * p.psi.vector()).norm();
    report.check(Check::at_most("split norm deviation", (raw_norm - 1.0).abs(), NORM_TOL));
    let sv = schmidt_values(&out, db, dc)?;
    let weight: f64 = sv.iter().map(|s| s * s).sum();
    report.check(Check::at_most("schmidt weight deviation", (weight - 1.0).abs(), NORM_TOL));
    let entropy = entropy_from_schmidt(&sv);
    let factors = factor_state(&out, db, dc, DEFAULT_SCHMIDT_TOL)?;
    if let Some((eb, ec)) = &p.expected {
        report.check(Check::below("split entropy of coherent input", entropy, tol));
        if let Some((fb, fc)) = &factors {
            report.check(Check::above("factor B fidelity with coherent state", fb.fidelity(eb)?, 1.0 - tol));
            report.check(Check::above("factor C fidelity with coherent state", fc.fidelity(ec)?, 1.0 - tol));
        }
    }
    if a.state.state != StateArg::Cs {
        if let (Some((lb, lc)), true) = (&p.lowest, p.psi == Ket::basis(p.psi.dim(), 0)) {
            let (fb, fc) = factors
                .as_ref()
                .ok_or_else(|| CliError::Failure("lowest weight did not factorize".into()))?;
            report.check(Check::above("factor B fidelity with lowest weight", fb.fidelity(lb)?, 1.0 - tol));
            report.check(Check::above("factor C fidelity with lowest weight", fc.fidelity(lc)?, 1.0 - tol));
        }
    }
    report.set("schmidt_values", &sv);
    report.set("entropy", entropy);
    report.set("factorizes", factors.is_some());
    if let Some((fb, fc)) = &factors {
        if let Some((jb, jc)) = p.spins {
            report.set("zeta_b", su2_zeta_estimate(fb, jb).map(pair));
            report.set("zeta_c", su2_zeta_estimate(fc, jc).map(pair));
        }
        if a.kind == KindArg::Wh {
            report.set("alpha_b", pair(mean_annihilation(fb)));
            report.set("alpha_c", pair(mean_annihilation(fc)));
        }
        report.set("factor_b", amplitudes(fb));
        report.set("factor_c", amplitudes(fc));
    }
    Ok(report)
}

pub fn bell(a: &BellArgs) -> CliResult<Report> {
    let mut report = Report::new("bell", config(a));
    if a.starts == 0 {
        return Err(CliError::Validation("--starts must be at least 1".into()));
    }
    let p = prepare(KindArg::Su2, Some(&a.split), None, None, 0.0, &a.state)?;
    let v = build_isometry(&p.spec)?;
    let (_, db, dc) = p.spec.dims();
    let psi = split_state(&p.psi, &v)?;
    let opts = ChshOptions {
        starts: a.starts,
        tied_settings: a.tied_settings,
        ..ChshOptions::with_seed(a.seed)
    };
    let r = optimize_chsh(&psi, db, dc, &opts)?;
    report.check(Check::at_most("chsh within Tsirelson bound", r.chsh, TSIRELSON + 1e-6));
    if a.tied_settings {
        report.check(Check::at_most("chsh with a'=a, b'=b", r.chsh, 2.0 + 1e-9));
    } else if a.state.state == StateArg::Cs {
        report.check(Check::at_most("|chsh - 2| for coherent input", (r.chsh - 2.0).abs(), 1e-6));
    }
    if db == 2 && dc == 2 {
        let h = horodecki_bound(&psi)?;
        report.set("horodecki_bound", h);
        if !a.tied_settings {
            report.check(Check::at_most("closed form minus optimized", h - r.chsh, 1e-6));
            report.check(Check::at_most("optimized minus closed form", r.chsh - h, 1e-9));
        }
    }
    report.set("chsh", r.chsh);
    report.set("violates", r.chsh > 2.0 + 1e-6);
    report.set("settings", r.settings);
    report.set("method", r.method);
    report.set("converged_starts", r.converged_starts);
    report.set("entropy", entropy_from_schmidt(&schmidt_values(&psi, db, dc)?));
    Ok(report)
}

#[derive(Serialize)]
struct RecordOut {
    sample_id: u64,
    entropy: f64,
    rank1_residual: f64,
    nearest_cs_fidelity: f64,
    nearest_theta: f64,
    nearest_phi: f64,
    nearest_zeta: Option<[f64; 2]>,
    classification: crate::uniqueness::Classification,
    factorizes: bool,
    agreement: bool,
}

impl From<&ScanRecord> for RecordOut {
    fn from(r: &ScanRecord) -> Self {
        RecordOut {
            sample_id: r.sample_id,
            entropy: r.entropy,
            rank1_residual: r.rank1_residual,
            nearest_cs_fidelity: r.nearest_cs_fidelity,
            nearest_theta: r.nearest_theta,
            nearest_phi: r.nearest_phi,
            nearest_zeta: r.nearest_zeta.map(pair),
            classification: r.classification,
            factorizes: r.factorizes,
            agreement: r.agreement,
        }
    }
}

const CSV_HEADER: [&str; 11] = [
    "sample_id",
    "entropy",
    "rank1_residual",
    "nearest_cs_fidelity",
    "nearest_theta",
    "nearest_phi",
    "nearest_zeta_re",
    "nearest_zeta_im",
    "classification",
    "factorizes",
    "agreement",
];

fn records_csv(records: &[ScanRecord]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| CliError::Failure(format!("writing CSV: {e}"));
    w.write_record(CSV_HEADER).map_err(fail)?;
    for r in records {
        let (zr, zi) = r
            .nearest_zeta
            .map_or((String::new(), String::new()), |z| (format_f64(z.re), format_f64(z.im)));
        let class = match r.classification {
            crate::uniqueness::Classification::Coherent => "COHERENT",
            crate::uniqueness::Classification::Entangling => "ENTANGLING",
        };
        w.write_record([
            r.sample_id.to_string(),
            format_f64(r.entropy),
            format_f64(r.rank1_residual),
            format_f64(r.nearest_cs_fidelity),
            format_f64(r.nearest_theta),
            format_f64(r.nearest_phi),
            zr,
            zi,
            class.to_string(),
            r.factorizes.to_string(),
            r.agreement.to_string(),
        ])
        .map_err(fail)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Failure(format!("writing CSV: {e}")))?;
    String::from_utf8(bytes).map_err(|e| CliError::Failure(e.to_string()))
}

pub fn uniqueness(a: &UniquenessArgs) -> CliResult<(Report, String)> {
    let mut report = Report::new("uniqueness", config(a));
    let (b, c) = input::spin_pair(&a.split)?;
    let spec = SplitSpec::su2_parts(b, c);
    let mut table = String::new();
    if matches!(a.mode, ModeArg::Scan | ModeArg::Both) {
        if a.samples == 0 {
            return Err(CliError::Validation("--samples must be at least 1".into()));
        }
        let opts = ScanOptions {
            n_samples: a.samples,
            seed: a.seed,
            entropy_eps: a.entropy_eps,
            fidelity_delta: a.fidelity_delta,
            source: match a.source {
                SourceArg::Haar => ScanSource::Haar,
                SourceArg::Cs => ScanSource::CoherentManifold,
            },
        };
        let (records, summary) = haar_scan(&spec, &opts)?;
        report.check(Check::at_most("classification disagreements", summary.disagreements as f64, 0.0));
        if a.source == SourceArg::Cs {
            report.check(Check::at_least("coherent samples", summary.coherent as f64, a.samples as f64));
        }
        table = records_csv(&records)?;
        report.set("summary", summary);
        report.set("records", records.iter().map(RecordOut::from).collect::<Vec<_>>());
    }
    if matches!(a.mode, ModeArg::Minimize | ModeArg::Both) {
        if a.starts == 0 {
            return Err(CliError::Validation("--starts must be at least 1".into()));
        }
        let minima = minimize_entropy(&spec, a.starts, a.seed)?;
        let bad = minima
            .iter()
            .filter(|m| m.entropy < MINIMUM_ENTROPY && m.nearest_cs_fidelity <= 1.0 - MINIMUM_FIDELITY_GAP)
            .count();
        report.check(Check::at_most("factorizing minima off the coherent manifold", bad as f64, 0.0));
        let rows: Vec<_> = minima
            .iter()
            .map(|m| {
                json!({
                    "start": m.start,
                    "entropy": m.entropy,
                    "nearest_cs_fidelity": m.nearest_cs_fidelity,
                    "converged": m.converged,
                    "evals": m.evals,
                })
            })
            .collect();
        report.set("minima", rows);
    }
    Ok((report, table))
}

pub fn glauber_compare(a: &GlauberArgs) -> CliResult<Report> {
    let mut report = Report::new("glauber-compare", config(a));
    let alpha = complex(a.alpha);
    let dim = match a.dim {
        Some(d) => d,
        None => GlauberParam::precise_dim(alpha),
    };
    let (nu, mu) = a.theta_bs.sin_cos();
    let out = beamsplitter_split(alpha, a.theta_bs, dim)?;
    let expected = glauber_coherent(GlauberParam::new(alpha * mu, dim)?)
        .kron(&glauber_coherent(GlauberParam::new(alpha * nu, dim)?));
    report.check(Check::above("beamsplitter output fidelity with |mu alpha>|nu alpha>", out.fidelity(&expected)?, 1.0 - 1e-8));
    let sv = schmidt_values(&out, dim, dim)?;
    let entropy = entropy_from_schmidt(&sv);
    report.check(Check::below("beamsplitter output entropy", entropy, 1e-8));
    // The entropy check above gates factorization; the leading Schmidt pair
    // still gives amplitude estimates when it fails.
    let (fb, fc) = factor_state(&out, dim, dim, f64::INFINITY)?.expect("infinite tolerance always factors");
    let (ab, ac) = (mean_annihilation(&fb), mean_annihilation(&fc));
    report.check(Check::at_most("|alpha_B - mu alpha|", (ab - mu * alpha).norm(), 1e-6));
    report.check(Check::at_most("|alpha_C - nu alpha|", (ac - nu * alpha).norm(), 1e-6));

    let j = input::spin(&a.j)?;
    let (jb, jc) = match &a.split {
        Some(s) => input::spin_pair(s)?,
        None => {
            let t = j.twice_j();
            (SpinLabel::from_twice(t - t / 2), SpinLabel::from_twice(t / 2))
        }
    };
    let spec = SplitSpec::su2(j, jb, jc)?;
    let zeta = CoherentParam::new(complex(a.zeta))?;
    let su2_out = split_state(&su2_coherent(j, zeta), &build_isometry(&spec)?)?;
    let su2_entropy = entropy_from_schmidt(&schmidt_values(&su2_out, jb.dim(), jc.dim())?);
    report.check(Check::below("su2 split entropy", su2_entropy, 1e-10));
    let (sb, sc) = factor_state(&su2_out, jb.dim(), jc.dim(), DEFAULT_SCHMIDT_TOL)?
        .ok_or_else(|| CliError::Failure("su2 split did not factorize".into()))?;
    let zb = su2_zeta_estimate(&sb, jb);
    let zc = su2_zeta_estimate(&sc, jc);
    for (name, z) in [("B", zb), ("C", zc)] {
        if let Some(z) = z {
            report.check(Check::at_most(format!("|zeta_{name} - zeta|"), (z - zeta.zeta()).norm(), 1e-8));
        }
    }
    report.set("dim", dim);
    report.set("mu", mu);
    report.set("nu", nu);
    report.set("mu_alpha", pair(mu * alpha));
    report.set("nu_alpha", pair(nu * alpha));
    report.set("alpha_b", pair(ab));
    report.set("alpha_c", pair(ac));
    report.set("amplitude_scaling_b", if alpha.norm() > 0.0 { ab.norm() / alpha.norm() } else { f64::NAN });
    report.set("zeta_b", zb.map(pair));
    report.set("zeta_c", zc.map(pair));
    report.set("zeta_scaling_b", zb.map(|z| if zeta.zeta().norm() > 0.0 { z.norm() / zeta.zeta().norm() } else { f64::NAN }));
    report.set("su2_split", json!({"j_a": j.to_string(), "j_b": jb.to_string(), "j_c": jc.to_string()}));
    Ok(report)
}
