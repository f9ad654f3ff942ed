//! Acceptance suite: one pass/fail line per criterion, with its runtime
//! against the budget. Runs without the libtest harness so the summary is
//! always printed; exits nonzero when any criterion fails.

use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, FRAC_PI_6};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use coherent_split::algebra::{
    casimir_su2, su11_generators, su2_generators, verify_structure, weyl_heisenberg_generators, BargmannIndex, Ket,
    Operator, SpinLabel,
};
use coherent_split::belltest::{horodecki_bound, optimize_chsh, ChshOptions, TSIRELSON};
use coherent_split::coherent::{
    bch_residual, displacement, generalized_coherent, glauber_coherent, su11_coherent, su11_tau_to_eta, su2_coherent,
    su2_zeta_estimate, CoherentParam, GlauberParam,
};
use coherent_split::splitting::{
    beamsplitter_split, build_isometry, entropy_from_schmidt, factor_state, mean_annihilation, schmidt_values,
    split_state, SplitSpec,
};
use coherent_split::uniqueness::{haar_scan, minimize_entropy, ScanOptions, ScanSource};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Failures and headline numbers collected by one criterion.
#[derive(Default)]
struct Tally {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Tally {
    fn require(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(what());
        }
    }

    fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }
}

fn criterion(number: u32, title: &str, budget: Duration, body: impl FnOnce(&mut Tally)) -> bool {
    let mut t = Tally::default();
    let start = Instant::now();
    body(&mut t);
    let elapsed = start.elapsed();
    t.require(elapsed < budget, || {
        format!("runtime {:.2} s exceeds the {:.0} s budget", elapsed.as_secs_f64(), budget.as_secs_f64())
    });
    let pass = t.failures.is_empty();
    println!(
        "criterion {number} {title}: {} in {:.2} s (budget {:.0} s); {}",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        budget.as_secs_f64(),
        t.notes.join("; ")
    );
    for f in t.failures.iter().take(10) {
        println!("    {f}");
    }
    if t.failures.len() > 10 {
        println!("    ... {} more", t.failures.len() - 10);
    }
    pass
}

fn random_disk(rng: &mut impl Rng, radius: f64) -> Complex64 {
    Complex64::from_polar(radius * rng.random::<f64>().sqrt(), std::f64::consts::TAU * rng.random::<f64>())
}

fn max_abs_entry(op: &Operator) -> f64 {
    op.matrix().iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Every (j_B, j_C) with j_B + j_C = j_A, both at least 1/2.
fn su2_splits(max_twice_a: u32) -> Vec<(SpinLabel, SpinLabel)> {
    (2..=max_twice_a)
        .flat_map(|a| (1..a).map(move |b| (SpinLabel::from_twice(b), SpinLabel::from_twice(a - b))))
        .collect()
}

fn algebra_validity(t: &mut Tally) {
    let mut worst: f64 = 0.0;
    for twice in 0..=20 {
        let j = SpinLabel::from_twice(twice);
        let rep = su2_generators(j);
        let report = verify_structure(&rep, 1e-12);
        worst = worst.max(report.max_residual());
        t.require(report.passed(), || format!("su2 j={j}: {:?}", report.failures()));
        let expected = Operator::identity(j.dim()).scale(Complex64::new(j.j() * (j.j() + 1.0), 0.0));
        let dev = max_abs_entry(&casimir_su2(&rep).unwrap().sub(&expected).unwrap());
        worst = worst.max(dev);
        t.require(dev < 1e-12, || format!("su2 j={j}: Casimir deviation {dev:e}"));
    }
    // Entries of the truncated su(1,1) generators grow like the truncation, so
    // absolute rounding in the commutators grows like its square; 32 keeps
    // that below the threshold.
    for twice_k in 1..=6 {
        for dim in [16, 32] {
            let k = BargmannIndex::new(f64::from(twice_k) / 2.0, dim).unwrap();
            let report = verify_structure(&su11_generators(k), 1e-12);
            worst = worst.max(report.max_residual());
            t.require(report.passed(), || format!("su11 k={} dim={dim}: {:?}", k.k(), report.failures()));
        }
    }
    for dim in [2, 16, 64, 128] {
        let report = verify_structure(&weyl_heisenberg_generators(dim).unwrap(), 1e-12);
        worst = worst.max(report.max_residual());
        t.require(report.passed(), || format!("wh dim={dim}: {:?}", report.failures()));
    }
    t.note(format!("worst residual {worst:.2e}"));
}

fn cs_construction(t: &mut Tally) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut worst_fid, mut worst_bch): (f64, f64) = (0.0, 0.0);
    for case in 0..100 {
        let j = SpinLabel::from_twice(rng.random_range(0..=20));
        let zeta = random_disk(&mut rng, 5.0);
        let p = CoherentParam::new(zeta).unwrap();
        let rep = su2_generators(j);
        let closed = su2_coherent(j, p);
        let displaced = displacement(&rep, p.xi()).unwrap().apply(&rep.lowest_weight).unwrap();
        let disentangled = generalized_coherent(&rep, zeta).unwrap();
        for other in [&displaced, &disentangled] {
            let gap = 1.0 - closed.fidelity(other).unwrap();
            worst_fid = worst_fid.max(gap);
            t.require(gap < 1e-10, || format!("su2 case {case} j={j} zeta={zeta}: fidelity gap {gap:e}"));
        }
        let bch = bch_residual(&rep, p.xi()).unwrap();
        worst_bch = worst_bch.max(bch);
        t.require(bch < 1e-10, || format!("su2 case {case} j={j} zeta={zeta}: bch residual {bch:e}"));
    }
    let mut worst_bch11: f64 = 0.0;
    for case in 0..100 {
        let k = BargmannIndex::new(f64::from(rng.random_range(1..=6u32)) / 2.0, 128).unwrap();
        let tau = random_disk(&mut rng, 0.7);
        let rep = su11_generators(k);
        let eta = su11_tau_to_eta(tau).unwrap();
        let closed = su11_coherent(k, tau).unwrap().normalized().unwrap();
        let displaced = displacement(&rep, eta).unwrap().apply(&rep.lowest_weight).unwrap();
        let disentangled = generalized_coherent(&rep, tau).unwrap();
        for other in [&displaced, &disentangled] {
            let gap = 1.0 - closed.fidelity(other).unwrap();
            worst_fid = worst_fid.max(gap);
            t.require(gap < 1e-10, || format!("su11 case {case} k={} tau={tau}: fidelity gap {gap:e}", k.k()));
        }
        let bch = bch_residual(&rep, eta).unwrap();
        worst_bch11 = worst_bch11.max(bch);
        t.require(bch < 1e-8, || format!("su11 case {case} k={} tau={tau}: bch residual {bch:e}", k.k()));
    }
    t.note(format!(
        "worst fidelity gap {worst_fid:.2e}, worst bch su2 {worst_bch:.2e}, su11 {worst_bch11:.2e}"
    ));
}

fn factorization(t: &mut Tally) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let zetas: Vec<Complex64> = (0..50).map(|_| random_disk(&mut rng, 5.0)).collect();
    let splits = su2_splits(12);
    let (mut worst_s, mut worst_fid, mut worst_zeta): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for &(b, c) in &splits {
        let spec = SplitSpec::su2_parts(b, c);
        let SplitSpec::Su2 { a, .. } = spec else { unreachable!() };
        let v = build_isometry(&spec).unwrap();
        for &zeta in &zetas {
            let p = CoherentParam::new(zeta).unwrap();
            let out = split_state(&su2_coherent(a, p), &v).unwrap();
            let s = entropy_from_schmidt(&schmidt_values(&out, b.dim(), c.dim()).unwrap());
            worst_s = worst_s.max(s);
            t.require(s < 1e-10, || format!("{a}->{b}+{c} zeta={zeta}: entropy {s:e}"));
            let Some((fb, fc)) = factor_state(&out, b.dim(), c.dim(), f64::INFINITY).unwrap() else { unreachable!() };
            for (label, f, x) in [("B", &fb, b), ("C", &fc, c)] {
                let gap = 1.0 - f.fidelity(&su2_coherent(x, p)).unwrap();
                worst_fid = worst_fid.max(gap);
                t.require(gap < 1e-10, || format!("{a}->{b}+{c} zeta={zeta}: factor {label} gap {gap:e}"));
                let est = su2_zeta_estimate(f, x).unwrap();
                let dz = (est - zeta).norm() / zeta.norm().max(1.0);
                worst_zeta = worst_zeta.max(dz);
                t.require(dz < 1e-8, || format!("{a}->{b}+{c} zeta={zeta}: zeta_{label} = {est}"));
            }
        }
    }
    t.note(format!(
        "{} splits x 50 zeta; worst entropy {worst_s:.2e}, fidelity gap {worst_fid:.2e}, relative zeta error {worst_zeta:.2e}",
        splits.len()
    ));
}

fn glauber_contrast(t: &mut Tally) {
    let (mut worst_fid, mut worst_s, mut worst_amp): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for a in [0.5, 1.0, 2.0] {
        for theta in [FRAC_PI_6, FRAC_PI_4, FRAC_PI_3] {
            let alpha = Complex64::new(a, 0.0);
            let dim = GlauberParam::precise_dim(alpha);
            let (nu, mu) = theta.sin_cos();
            let out = beamsplitter_split(alpha, theta, dim).unwrap();
            let expected = glauber_coherent(GlauberParam::new(alpha * mu, dim).unwrap())
                .kron(&glauber_coherent(GlauberParam::new(alpha * nu, dim).unwrap()));
            let gap = 1.0 - out.fidelity(&expected).unwrap();
            let s = entropy_from_schmidt(&schmidt_values(&out, dim, dim).unwrap());
            let (fb, fc) = factor_state(&out, dim, dim, f64::INFINITY).unwrap().unwrap();
            let db = (mean_annihilation(&fb) - mu * alpha).norm();
            let dc = (mean_annihilation(&fc) - nu * alpha).norm();
            worst_fid = worst_fid.max(gap);
            worst_s = worst_s.max(s);
            worst_amp = worst_amp.max(db).max(dc);
            let at = format!("alpha={a} theta={theta:.4} dim={dim}");
            t.require(gap < 1e-8, || format!("{at}: fidelity gap {gap:e}"));
            t.require(s < 1e-8, || format!("{at}: entropy {s:e}"));
            t.require(db <= 1e-6 && dc <= 1e-6, || format!("{at}: amplitude errors {db:e}, {dc:e}"));
            // The factor amplitude is rescaled, unlike the SU(2) splitting.
            t.require((mean_annihilation(&fb).norm() / a - 1.0).abs() > 0.1, || format!("{at}: no rescaling"));
        }
    }
    t.note(format!(
        "worst fidelity gap {worst_fid:.2e}, entropy {worst_s:.2e}, amplitude error {worst_amp:.2e}"
    ));
}

fn bell(t: &mut Tally) {
    let half = SpinLabel::from_twice(1);
    let spec = SplitSpec::su2_parts(half, half);
    let v = build_isometry(&spec).unwrap();
    let one = SpinLabel::from_twice(2);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut worst_opt, mut worst_h): (f64, f64) = (0.0, 0.0);
    for case in 0..50u64 {
        let zeta = random_disk(&mut rng, 5.0);
        let out = split_state(&su2_coherent(one, CoherentParam::new(zeta).unwrap()), &v).unwrap();
        let chsh = optimize_chsh(&out, 2, 2, &ChshOptions::with_seed(case)).unwrap().chsh;
        let h = horodecki_bound(&out).unwrap();
        worst_opt = worst_opt.max((chsh - 2.0).abs());
        worst_h = worst_h.max((h - 2.0).abs());
        t.require((chsh - 2.0).abs() <= 1e-6, || format!("zeta={zeta}: optimized CHSH {chsh}"));
        t.require((h - 2.0).abs() <= 1e-9, || format!("zeta={zeta}: Horodecki bound {h}"));
    }
    let entangled = split_state(&Ket::basis(3, 1), &v).unwrap();
    let chsh = optimize_chsh(&entangled, 2, 2, &ChshOptions::with_seed(0)).unwrap().chsh;
    t.require((chsh - TSIRELSON).abs() <= 1e-6, || format!("|1,0> split: CHSH {chsh}"));
    t.note(format!(
        "coherent: worst |chsh-2| {worst_opt:.2e}, |horodecki-2| {worst_h:.2e}; |1,0>: {chsh:.12}"
    ));
}

fn uniqueness(t: &mut Tally) {
    let one = SpinLabel::from_twice(2);
    let spec = SplitSpec::su2_parts(one, one);
    let (_, haar) = haar_scan(&spec, &ScanOptions::new(1000, 6)).unwrap();
    t.require(haar.disagreements == 0, || format!("haar scan: {} disagreements", haar.disagreements));
    let cs_opts = ScanOptions { source: ScanSource::CoherentManifold, ..ScanOptions::new(100, 6) };
    let (_, cs) = haar_scan(&spec, &cs_opts).unwrap();
    t.require(cs.disagreements == 0, || format!("cs scan: {} disagreements", cs.disagreements));
    t.require(cs.coherent == 100 && cs.factorizing == 100, || format!("cs scan: {cs:?}"));
    t.note(format!(
        "haar min entropy {:.3}, max fidelity {:.4}; cs max entropy {:.1e}",
        haar.min_entropy, haar.max_fidelity, cs.max_entropy
    ));

    let half = SpinLabel::from_twice(1);
    for (b, c) in [(half, half), (SpinLabel::from_twice(4), SpinLabel::from_twice(2))] {
        let minima = minimize_entropy(&SplitSpec::su2_parts(b, c), 16, 6).unwrap();
        let low: Vec<_> = minima.iter().filter(|m| m.entropy < 1e-7).collect();
        let worst = low.iter().map(|m| m.nearest_cs_fidelity).fold(1.0, f64::min);
        for m in &low {
            t.require(m.nearest_cs_fidelity > 1.0 - 1e-5, || {
                format!("{b}+{c} start {}: entropy {:e} with fidelity {}", m.start, m.entropy, m.nearest_cs_fidelity)
            });
        }
        t.require(!low.is_empty(), || format!("{b}+{c}: no start reached entropy 1e-7"));
        t.note(format!("{b}+{c}: {}/16 minima below 1e-7, worst fidelity {worst:.10}", low.len()));
    }
}

fn su11_splitting(t: &mut Tally) {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for twice_a in [2u32, 4, 6] {
        for twice_b in 1..twice_a {
            let k = |twice: u32| BargmannIndex::new(f64::from(twice) / 2.0, 128).unwrap();
            let spec = SplitSpec::su11(k(twice_a), k(twice_b), k(twice_a - twice_b)).unwrap();
            let (rep_a, _, _) = spec.reps().unwrap();
            let v = build_isometry(&spec).unwrap();
            for _ in 0..5 {
                let tau = random_disk(&mut rng, 0.7);
                let out = split_state(&generalized_coherent(&rep_a, tau).unwrap(), &v).unwrap();
                let s = entropy_from_schmidt(&schmidt_values(&out, 128, 128).unwrap());
                worst = worst.max(s);
                count += 1;
                t.require(s < 1e-8, || {
                    format!("k {}/2 -> {}/2 + {}/2, tau={tau}: entropy {s:e}", twice_a, twice_b, twice_a - twice_b)
                });
            }
        }
    }
    t.note(format!("{count} cases; worst entropy {worst:.2e}"));
}

fn run_cli(args: &[&str], threads: &str) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_coherent-split"))
        .args(args)
        .env("COHERENT_SPLIT_THREADS", threads)
        .output()
        .expect("binary runs");
    out.stdout
}

/// JSON report without its wall-clock line.
fn records(bytes: Vec<u8>) -> String {
    String::from_utf8(bytes)
        .unwrap()
        .lines()
        .filter(|l| !l.trim_start().starts_with("\"wall_time_ms\""))
        .collect::<Vec<_>>()
        .join("\n")
}

fn determinism(t: &mut Tally) {
    let runs: [&[&str]; 4] = [
        &["bell", "--split", "1,1", "--state", "weight", "--m", "-1", "--seed", "9"],
        &["bell", "--zeta", "0.4,-0.9", "--seed", "9"],
        &["uniqueness", "--split", "1/1", "--samples", "40", "--seed", "9", "--mode", "both", "--starts", "4"],
        &["uniqueness", "--split", "1/1", "--samples", "40", "--seed", "9", "--format", "csv"],
    ];
    for args in runs {
        let first = records(run_cli(args, "1"));
        let again = records(run_cli(args, "1"));
        let threaded = records(run_cli(args, "4"));
        t.require(!first.is_empty(), || format!("{args:?}: no output"));
        t.require(first == again, || format!("{args:?}: rerun differs"));
        t.require(first == threaded, || format!("{args:?}: differs with 4 threads"));
    }
    let psi = split_state(&Ket::basis(5, 1), &build_isometry(&SplitSpec::su2_parts(SpinLabel::from_twice(2), SpinLabel::from_twice(2))).unwrap()).unwrap();
    let a = optimize_chsh(&psi, 3, 3, &ChshOptions::with_seed(4)).unwrap();
    let b = optimize_chsh(&psi, 3, 3, &ChshOptions::with_seed(4)).unwrap();
    t.require(a.chsh.to_bits() == b.chsh.to_bits() && a.settings == b.settings, || "optimize_chsh rerun differs".into());
    t.note(format!("{} CLI runs byte-identical across reruns and thread counts", runs.len()));
}

fn main() -> ExitCode {
    let s = Duration::from_secs;
    let results = [
        criterion(1, "algebra validity", s(2), algebra_validity),
        criterion(2, "coherent-state construction", s(10), cs_construction),
        criterion(3, "su2 factorization", s(30), factorization),
        criterion(4, "glauber contrast", s(20), glauber_contrast),
        criterion(5, "bell tests", s(60), bell),
        criterion(6, "uniqueness certificate", s(300), uniqueness),
        criterion(7, "su11 splitting", s(30), su11_splitting),
        criterion(8, "determinism", s(120), determinism),
    ];
    let passed = results.iter().filter(|&&r| r).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
