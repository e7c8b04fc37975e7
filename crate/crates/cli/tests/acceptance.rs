//! One line per acceptance criterion. Runs without the libtest harness so the
//! lines always reach the test log; exits non-zero if any criterion fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use admissible::bridge::{decomp_to_isometry, domain_defect, gram_matrix};
use admissible::carpenter::{carpenter_decompose, keycase_run, CarpenterConfig, ProjectionStream, StreamView};
use admissible::checkers::{ineq_check, sum_of_projections_check};
use admissible::horn::{horn_decompose, mix_two};
use admissible::operators::{
    eigenvalues_desc, frame_operator, residual_norm, CMatrix, CVector, HermOp, RankOneDecomp, UnitVec,
};
use admissible::seqkit::{kadison_check, majorizes_slices, Component, WeightSeq};
use admissible::Scalar;
use nalgebra::Complex;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

fn rand_unit(rng: &mut ChaCha8Rng, dim: usize) -> UnitVec<f64> {
    loop {
        let v = CVector::from_fn(dim, |_, _| Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        if v.norm() > 1e-3 {
            return UnitVec::normalized(v).unwrap();
        }
    }
}

fn rand_unitary(rng: &mut ChaCha8Rng, dim: usize) -> Vec<UnitVec<f64>> {
    let m = CMatrix::from_fn(dim, dim, |_, _| Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let q = m.qr().q();
    (0..dim).map(|j| UnitVec::normalized(q.column(j).into_owned()).unwrap()).collect()
}

fn outer_sum(terms: &[(f64, &UnitVec<f64>)], dim: usize) -> CMatrix<f64> {
    let mut m = CMatrix::zeros(dim, dim);
    for (w, v) in terms {
        m += v.projection() * Complex::new(*w, 0.0);
    }
    m
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut r1, mut r2, mut r3, mut rn) = (0.0f64, f64::MIN, f64::MIN, 0.0f64);
    let mut near_parallel = 0;
    for i in 0..10_000 {
        let (e1, e2) = loop {
            let (a, b): (f64, f64) = (rng.random_range(0.0..2.0), rng.random_range(0.0..2.0));
            if (a - b).abs() > 1e-6 {
                break (a, b);
            }
        };
        let (lo, hi) = (e1.min(e2), e1.max(e2));
        let x1 = rng.random_range(lo.max(1e-9)..=hi);
        let x2 = e1 + e2 - x1;
        let dim = 2;
        let u = rand_unit(&mut rng, dim);
        let up = if i % 4 == 0 {
            // near-parallel pair: γ > 0.99
            let eps = rng.random_range(1e-8..0.1);
            let noise = rand_unit(&mut rng, dim);
            let v = UnitVec::normalized(u.coords() + noise.coords() * Complex::new(eps, 0.0)).unwrap();
            let phase = Complex::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
            UnitVec::normalized(v.coords() * phase).unwrap()
        } else {
            rand_unit(&mut rng, dim)
        };
        let m = match mix_two(e1, e2, &u, &up, x1, x2) {
            Ok(m) => m,
            Err(e) => return outcome(false, format!("instance {i} refused: {e}")),
        };
        if m.gamma > 0.99 {
            near_parallel += 1;
        }
        let lhs = outer_sum(&[(x1, &m.w), (x2, &m.w_prime)], dim);
        let rhs = outer_sum(&[(e1, &u), (e2, &up)], dim);
        r1 = r1.max((lhs - rhs).norm());
        r2 = r2.max(m.sigma.norm_sqr() + m.tau.norm_sqr() - 1.0);
        r3 = r3.max(m.sigma.norm_sqr() - m.z_o);
        rn = rn.max(m.norm_defects.0.max(m.norm_defects.1));
    }
    let t = secs(start.elapsed());
    outcome(
        r1 <= 1e-10 && r2 <= 1e-12 && r3 <= 1e-12 && rn <= 1e-10 && t < 10.0,
        format!(
            "10000 mixes ({near_parallel} with γ > 0.99): max residual {r1:.2e}, max |σ|²+|τ|²−1 {r2:.2e}, \
             max |σ|²−z_o {r3:.2e}, max norm defect {rn:.2e}, {t:.2}s"
        ),
    )
}

/// `ξ ≺ η` with `ξ` of length `m` and `η` of length `n`, built by moving mass
/// from smaller to larger entries.
fn majorized_pair(rng: &mut ChaCha8Rng, n: usize, m: usize) -> (Vec<f64>, Vec<f64>) {
    let xi: Vec<f64> = (0..m).map(|_| rng.random_range(0.01..2.0)).collect();
    let len = n.max(m);
    let mut v = xi.clone();
    v.resize(len, 0.0);
    for _ in 0..3 * len {
        let (i, j) = (rng.random_range(0..len), rng.random_range(0..len));
        if i != j && v[i] >= v[j] {
            let t = rng.random_range(0.0..=1.0) * v[j];
            v[i] += t;
            v[j] -= t;
        }
    }
    v.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let spill: f64 = v[n..].iter().sum();
    v[0] += spill;
    v.truncate(n);
    (xi, v)
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for i in 0..1000 {
        let n = rng.random_range(1..=12);
        let m = rng.random_range(1..=12);
        let (xi, eta) = majorized_pair(&mut rng, n, m);
        let e = if i % 2 == 0 {
            rand_unitary(&mut rng, n)
        } else {
            (0..n).map(|_| rand_unit(&mut rng, n)).collect()
        };
        let d = match horn_decompose(&eta, &e, &xi) {
            Ok(d) => d,
            Err(err) => return outcome(false, format!("instance {i} (n={n}, m={m}) refused: {err}")),
        };
        let target = outer_sum(&eta.iter().zip(&e).map(|(w, v)| (*w, v)).collect::<Vec<_>>(), n);
        let res = (frame_operator(&d).matrix() - target).norm();
        worst = worst.max(res / n as f64);
        let mut got = d.weights();
        let mut want: Vec<f64> = xi.iter().copied().filter(|w| *w > 0.0).collect();
        got.sort_by(|a, b| a.partial_cmp(b).unwrap());
        want.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if got != want {
            return outcome(false, format!("instance {i}: weights {got:?} differ from {want:?}"));
        }
    }
    let t = secs(start.elapsed());
    outcome(
        worst <= 1e-9 && t < 30.0,
        format!("1000 chains, half orthonormal, half oblique: max residual/n {worst:.2e}, weights exact, {t:.2}s"),
    )
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut diag, mut defect, mut spectra) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..1000 {
        let k = rng.random_range(1..=16);
        let dim = rng.random_range(1..=16);
        let mut d = RankOneDecomp::new(dim);
        for _ in 0..k {
            d.push(rng.random_range(0.05..2.0), rand_unit(&mut rng, dim)).unwrap();
        }
        let rec = decomp_to_isometry(&d);
        for (w, x) in d.weights().iter().zip(&rec.diag) {
            diag = diag.max((w - x).abs());
        }
        defect = defect.max(domain_defect(&rec));
        let g = eigenvalues_desc(&gram_matrix(&d));
        let f = eigenvalues_desc(&frame_operator(&d));
        let r = k.min(dim);
        for i in 0..k.max(dim) {
            let a = if i < k { g[i] } else { 0.0 };
            let b = if i < dim { f[i] } else { 0.0 };
            if i < r || a.abs() > 1e-9 || b.abs() > 1e-9 {
                spectra = spectra.max((a - b).abs());
            }
        }
    }
    outcome(
        diag <= 1e-10 && defect <= 1e-10 && spectra <= 1e-9,
        format!("1000 decompositions: diag error {diag:.2e}, domain defect {defect:.2e}, spectrum gap {spectra:.2e}"),
    )
}

fn oracle_kadison(xi: &[BigRational], alpha: &BigRational) -> bool {
    let one = BigRational::from_integer(1.into());
    let mut diff = BigRational::from_integer(0.into());
    for x in xi {
        if x <= alpha {
            diff += x.clone();
        } else {
            diff -= one.clone() - x.clone();
        }
    }
    diff.is_integer()
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let q = |n: i64, d: i64| BigRational::new(n.into(), d.into());
    let values = [q(0, 1), q(1, 4), q(1, 3), q(1, 2), q(2, 3), q(3, 4), q(1, 1)];
    let alphas = [q(3, 10), q(1, 2), q(7, 10)];
    let one = q(1, 1);
    let mut checked = 0usize;
    let mut disagreements = 0usize;
    let sat = |v: &[BigRational], a: &BigRational| kadison_check(&WeightSeq::finite(v.to_vec()).unwrap(), a).unwrap().satisfied;
    for len in 0..=6u32 {
        for code in 0..7usize.pow(len) {
            let xi: Vec<BigRational> = (0..len).map(|p| values[code / 7usize.pow(p) % 7].clone()).collect();
            let base = sat(&xi, &alphas[1]);
            let comp: Vec<BigRational> = xi.iter().map(|x| one.clone() - x.clone()).collect();
            let mut padded = xi.clone();
            padded.extend([q(0, 1), q(1, 1)]);
            let mut ok = base == oracle_kadison(&xi, &alphas[1]);
            for a in &alphas {
                ok &= sat(&xi, a) == base;
            }
            ok &= sat(&comp, &alphas[1]) == base;
            ok &= sat(&padded, &alphas[1]) == base;
            checked += 1;
            if !ok {
                disagreements += 1;
            }
        }
    }
    let t = secs(start.elapsed());
    outcome(
        disagreements == 0,
        format!("{checked} sequences, oracle + 3 alphas + complement + padding: {disagreements} disagreements, {t:.2}s"),
    )
}

fn comp(offset: f64, first: f64, ratio: f64) -> Component<f64> {
    Component::new(offset, first, ratio).unwrap()
}

fn scenarios() -> Vec<(&'static str, WeightSeq<f64>)> {
    vec![
        ("FINITE_RANK", WeightSeq::cyclic_tail(vec![], vec![comp(0.0, 0.5, 0.5), comp(1.0, 0.0, 0.0)]).unwrap()),
        ("MU_DIVERGES", WeightSeq::cyclic_tail(vec![], vec![comp(0.4, 0.0, 0.0), comp(0.9, 0.0, 0.0)]).unwrap()),
        ("LAMBDA_DIVERGES", WeightSeq::constant_tail(vec![0.6, 0.5], 0.75).unwrap()),
        (
            "BOTH_SUMMABLE",
            WeightSeq::cyclic_tail(vec![], vec![comp(0.0, 0.25, 0.5), comp(1.0, -0.25, 0.5)]).unwrap(),
        ),
        ("M_FINITE_N_INF", WeightSeq::cyclic_tail(vec![], vec![comp(1.0, -0.4, 0.6)]).unwrap()),
    ]
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let config = CarpenterConfig {
        stages: 12,
        ..CarpenterConfig::default()
    };
    let streams = [ProjectionStream::OrthonormalBasis, ProjectionStream::BlockOverlap { block: 4 }];
    let mut worst = 0.0f64;
    let mut stages = 0usize;
    for (kind, xi) in scenarios() {
        for s in &streams {
            let out = match carpenter_decompose(&xi, s, &config) {
                Ok(o) => o,
                Err(e) => return outcome(false, format!("{kind} on {s:?}: {e}")),
            };
            if out.case.kind.name() != kind {
                return outcome(false, format!("expected {kind}, classified {}", out.case.kind.name()));
            }
            if out.certificates.len() < 10 {
                return outcome(false, format!("{kind} on {s:?}: only {} stages", out.certificates.len()));
            }
            if !out.certificates.iter().all(|c| c.remainder_ok) {
                return outcome(false, format!("{kind} on {s:?}: remainder out of range"));
            }
            if !out.plans.iter().all(|p| p.majorization_holds()) {
                return outcome(false, format!("{kind} on {s:?}: block majorization fails"));
            }
            stages += out.certificates.len();
            worst = worst.max(out.max_residual());
        }
    }
    let t = secs(start.elapsed());
    outcome(
        worst <= 1e-8 && t < 60.0,
        format!("5 cases x 2 streams, {stages} certified stages: max residual {worst:.2e}, {t:.2}s"),
    )
}

fn criterion_6() -> Outcome {
    let lambda = WeightSeq::geometric_tail(vec![], 0.25f64, 0.5).unwrap();
    let stream = ProjectionStream::OrthonormalBasis;
    let run = match keycase_run(&lambda, &StreamView::whole(&stream), 30) {
        Ok(r) => r,
        Err(e) => return outcome(false, e.to_string()),
    };
    let bounds = run.stages.iter().all(|s| s.bounds_ok);
    let norm = run.stages.iter().fold(0.0f64, |m, s| m.max(s.x_norm()));
    let factors: Vec<f64> = run.tails.iter().map(|t| t / (1.0 - t)).collect();
    let monotone = factors.windows(2).all(|w| w[1] < w[0]);
    let last = *factors.last().unwrap();
    outcome(
        run.stages.len() == 30 && bounds && norm <= 1.0 + 1e-12 && monotone && last < 1e-8,
        format!(
            "30 stages: coefficient bounds {}, max ‖x_n‖ {norm:.15}, factor decreasing {monotone}, final factor {last:.2e}",
            if bounds { "hold" } else { "fail" }
        ),
    )
}

fn criterion_7() -> Outcome {
    let entries = [0.0, 0.5, 1.0, 1.5, 2.0];
    let mut checked = 0;
    let mut disagreements = 0;
    let mut sums = 0;
    let mut worst = 0.0f64;
    for dim in 1..=4u32 {
        for code in 0..5usize.pow(dim) {
            let diag: Vec<f64> = (0..dim).map(|p| entries[code / 5usize.pow(p) % 5]).collect();
            let exact: Vec<BigRational> = diag.iter().map(|x| BigRational::lit(*x)).collect();
            let trace: BigRational = exact.iter().cloned().sum();
            let oracle = trace.is_integer() && {
                let ones = vec![BigRational::lit(1.0); trace.to_f64_lossy() as usize];
                majorizes_slices(&ones, &exact, &BigRational::lit(0.0)).holds
            };
            let a = HermOp::from_diag(&diag);
            let r = sum_of_projections_check(&a, true).unwrap();
            checked += 1;
            if r.is_sum != oracle {
                disagreements += 1;
            }
            if let Some(w) = &r.witness {
                sums += 1;
                worst = worst.max(residual_norm(&a, w).unwrap());
            } else if r.is_sum && trace > BigRational::lit(0.0) {
                disagreements += 1;
            }
        }
    }
    outcome(
        disagreements == 0 && worst <= 1e-8,
        format!("{checked} diagonals: {disagreements} disagreements, {sums} witnesses, max witness residual {worst:.2e}"),
    )
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let config = CarpenterConfig {
        stages: 4,
        ..CarpenterConfig::default()
    };
    let mut pool: Vec<(HermOp<f64>, RankOneDecomp<f64>)> = Vec::new();
    for (_, xi) in scenarios() {
        for s in [ProjectionStream::OrthonormalBasis, ProjectionStream::BlockOverlap { block: 3 }] {
            let out = carpenter_decompose(&xi, &s, &config).unwrap();
            pool.push((out.target.clone(), out.decomp()));
        }
    }
    let mut worst = f64::MIN;
    let mut inflated = 0;
    let total = 100_000;
    for i in 0..total {
        let (a, d) = &pool[i % pool.len()];
        let terms = d.terms();
        let j = rng.random_range(0..terms.len());
        let mut shrunk = RankOneDecomp::new(d.dim());
        for (k, (w, v)) in terms.iter().enumerate() {
            if k != j {
                shrunk.push(w * rng.random_range(0.0..=1.0), v.clone()).unwrap();
            }
        }
        // largest t with Σ_others + t v⊗v <= A is 1 / (v, (A − Σ_others)^+ v)
        let v = &terms[j].1;
        let rest = HermOp::new(a.matrix() - frame_operator(&shrunk).matrix()).unwrap();
        let eig = rest.eig();
        let thr = eig.range_threshold();
        let mut q = 0.0;
        for (k, l) in eig.values.iter().enumerate() {
            if *l > thr {
                q += (eig.vectors.column(k).dotc(v.coords())).norm_sqr() / l;
            }
        }
        let cap = if q > 0.0 { 1.0 / q } else { terms[j].0 };
        let w = if cap > 1.0 {
            inflated += 1;
            1.0 + rng.random_range(0.0..0.999) * (cap - 1.0)
        } else {
            cap * rng.random_range(0.0..=1.0)
        };
        shrunk.push(w, v.clone()).unwrap();
        match ineq_check(a, &shrunk) {
            Ok(r) => worst = worst.max(r.rhs - r.lhs),
            Err(e) => return outcome(false, format!("pair {i}: {e}")),
        }
    }
    let t = secs(start.elapsed());
    outcome(
        worst <= 1e-9,
        format!("{total} pairs ({inflated} with a weight above 1): max violation {worst:.2e}, {t:.2}s"),
    )
}

fn cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_admissible")).args(args).output().expect("binary runs")
}

fn criterion_9() -> Outcome {
    let data = |n: &str| -> PathBuf { Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(n) };
    let p = |b: &PathBuf| b.to_str().unwrap().to_string();
    let dir = std::env::temp_dir().join(format!("admissible-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let (d, a) = (p(&dir.join("d.json")), p(&dir.join("a.json")));
    let mut runs = 0;
    for seq in ["finite_rank", "mu_diverges", "lambda_diverges", "both_summable", "m_finite"] {
        for stream in ["basis", "block_overlap"] {
            let seq_path = p(&data(&format!("{seq}.json")));
            let stream_path = p(&data(&format!("{stream}.json")));
            let args = [
                "decompose", &seq_path, &stream_path, "--stages", "12", "--out", &d, "--operator-out", &a,
            ];
            let first = cli(&args);
            let verify = cli(&["verify", &d, &a]);
            let second = cli(&args);
            runs += 1;
            if first.status.code() != Some(0) || verify.status.code() != Some(0) {
                return outcome(false, format!("{seq} on {stream}: decompose/verify did not exit 0"));
            }
            if first.stdout != second.stdout {
                return outcome(false, format!("{seq} on {stream}: report bytes differ between runs"));
            }
        }
    }
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/decompose_both_random.json");
    let report = cli(&[
        "decompose",
        &p(&data("both_summable.json")),
        &p(&data("random_block.json")),
        "--seed",
        "7",
    ]);
    let matches = std::fs::read(&golden).map(|g| g == report.stdout).unwrap_or(false);
    std::fs::remove_dir_all(&dir).ok();
    outcome(
        matches,
        format!("{runs} decompose→verify pipelines exit 0 with stable reports; golden seeded report matches: {matches}"),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("2x2 mixing lemma", criterion_1),
        ("Horn chains", criterion_2),
        ("bridge round trip", criterion_3),
        ("Kadison checker", criterion_4),
        ("carpenter stage identities", criterion_5),
        ("key-case decay", criterion_6),
        ("sums of projections", criterion_7),
        ("trace inequality", criterion_8),
        ("CLI contract", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        if !o.pass {
            failed += 1;
        }
        println!("criterion {} [{}] {name}: {}", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
