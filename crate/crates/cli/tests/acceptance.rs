//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Oracles are computed independently in this file where possible.

use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spilab_core::capacity::{capacity_profile, interval_capacity, poincare_from_mc};
use spilab_core::gauss_lsi::{c_kappa_chain, claim_check_log, find_kappa1, lsi_defect_check, GaussChainParams};
use spilab_core::hermite::{audit_lp_bound, eval_all, gram_matrix, lp_norm, pr_oscillating_error};
use spilab_core::measure::{Measure1D, Potential};
use spilab_core::orlicz::power_pair;
use spilab_core::spectrum::{draw_test_function, low_spectrum, projection_split, spectral_ospi, verify_spi, SpiTarget};
use spilab_core::transfer::{geometric_grid, mc_to_spi, spi_to_mc, BetaFunction};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn gaussian(nodes: usize) -> Measure1D {
    Measure1D::build(Potential::Gaussian, (-10.0, 10.0), nodes, 1e-10).unwrap()
}

fn ou_spectrum() -> Outcome {
    let t = Instant::now();
    let m = gaussian(2000);
    let spec = low_spectrum(&m, 6, None).unwrap();
    let secs = t.elapsed().as_secs_f64();
    let err = spec
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(i, &l)| (l - i as f64).abs())
        .fold(0.0, f64::max);
    outcome(err <= 1e-3 && secs < 10.0, format!("max |λ_i − i| = {err:.3e}, {secs:.2} s"))
}

/// Trapezoid rule on [−20, 20] for the standard Gaussian.
fn trapezoid_gram(n_max: usize) -> Vec<Vec<f64>> {
    let h = 0.01;
    let steps = (40.0 / h) as usize;
    let mut g = vec![vec![0.0; n_max + 1]; n_max + 1];
    for k in 0..=steps {
        let x = -20.0 + k as f64 * h;
        let w = h * (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let v = eval_all(n_max, x);
        for i in 0..=n_max {
            for j in 0..=i {
                g[i][j] += w * v[i] * v[j];
            }
        }
    }
    g
}

fn hermite_orthonormality() -> Outcome {
    let g = trapezoid_gram(40);
    let norm_err = (0..=40).map(|n| (g[n][n].sqrt() - 1.0).abs()).fold(0.0, f64::max);
    let mut gram_err = 0.0f64;
    let lib = gram_matrix(30).unwrap();
    for i in 0..=30 {
        for j in 0..=i {
            let id = if i == j { 1.0 } else { 0.0 };
            gram_err = gram_err.max((g[i][j] - id).abs()).max((lib[i][j] - id).abs());
        }
    }
    outcome(
        norm_err <= 1e-8 && gram_err <= 1e-8,
        format!("max |‖H_n‖₂ − 1| = {norm_err:.2e}, max |G − I| = {gram_err:.2e}"),
    )
}

/// Coefficients of the orthonormal `H_n`, lowest degree first.
fn hermite_coeffs(n: usize) -> Vec<f64> {
    let mut prev = vec![1.0];
    let mut cur = vec![0.0, 1.0];
    if n == 0 {
        return prev;
    }
    for k in 1..n {
        // He_{k+1} = x He_k − k He_{k−1}
        let mut next = vec![0.0; k + 2];
        for (i, c) in cur.iter().enumerate() {
            next[i + 1] += c;
        }
        for (i, c) in prev.iter().enumerate() {
            next[i] -= k as f64 * c;
        }
        prev = cur;
        cur = next;
    }
    let fact: f64 = (1..=n).map(|k| k as f64).product();
    cur.iter().map(|c| c / fact.sqrt()).collect()
}

/// `E|H_n|^4` from exact Gaussian moments `E x^{2k} = (2k − 1)!!`.
fn fourth_moment(n: usize) -> f64 {
    let c = hermite_coeffs(n);
    let mut sq = vec![0.0; 2 * c.len() - 1];
    for (i, a) in c.iter().enumerate() {
        for (j, b) in c.iter().enumerate() {
            sq[i + j] += a * b;
        }
    }
    let mut quart = vec![0.0; 2 * sq.len() - 1];
    for (i, a) in sq.iter().enumerate() {
        for (j, b) in sq.iter().enumerate() {
            quart[i + j] += a * b;
        }
    }
    let moment = |k: usize| -> f64 {
        if k % 2 == 1 {
            0.0
        } else {
            (1..k).step_by(2).map(|j| j as f64).product()
        }
    };
    quart.iter().enumerate().map(|(k, a)| a * moment(k)).sum()
}

fn lp_oracle() -> Outcome {
    let e2 = (lp_norm(2, 4.0).unwrap() - fourth_moment(2).powf(0.25)).abs();
    let e1 = (lp_norm(1, 4.0).unwrap() - fourth_moment(1).powf(0.25)).abs();
    let exact = (e2 - (lp_norm(2, 4.0).unwrap() - 15f64.powf(0.25)).abs()).abs() < 1e-15
        && (fourth_moment(1) - 3.0).abs() < 1e-15;
    outcome(
        e2 <= 1e-6 && e1 <= 1e-8 && exact,
        format!("|‖H_2‖₄ − 15^¼| = {e2:.2e}, |‖H_1‖₄ − 3^¼| = {e1:.2e}"),
    )
}

fn lp_audit() -> Outcome {
    let audit = audit_lp_bound(40, &[3.0, 4.0, 6.0, 8.0, 12.0]).unwrap();
    let finite = audit.entries.iter().all(|e| e.c.is_finite() && e.c > 0.0) && audit.entries.len() == 200;
    let (a, b) = (audit.max_over(10, 20), audit.max_over(20, 40));
    let rel = (b - a).abs() / a;
    outcome(
        finite && rel <= 0.2,
        format!("c_sup = {:.4}, max[10,20] = {a:.4}, max[20,40] = {b:.4}, rel = {rel:.3}", audit.c_sup),
    )
}

fn plancherel_rotach() -> Outcome {
    let worst = (0..=40)
        .map(|i| -1.0 + i as f64 * 0.05)
        .map(|phi| pr_oscillating_error(200, phi).unwrap())
        .fold(0.0, f64::max);
    let e: Vec<f64> = [100, 200, 400]
        .iter()
        .map(|&n| pr_oscillating_error(n, 0.5).unwrap())
        .collect();
    let decreasing = e[0] > e[1] && e[1] > e[2];
    outcome(
        worst <= 5e-2 && decreasing,
        format!(
            "n = 200 max error {worst:.2e}; φ = 0.5: {:.2e} > {:.2e} > {:.2e}",
            e[0], e[1], e[2]
        ),
    )
}

/// Minimizes `Σ c_i (f_{i+1} − f_i)²` with `f_0 = 0`, `f_last = 1` by a
/// tridiagonal solve and returns the energy.
fn chain_energy(c: &[f64]) -> f64 {
    let n = c.len() - 1;
    if n == 0 {
        return c[0];
    }
    // unknowns f_1..f_n; row i: −c_{i−1} f_{i−1} + (c_{i−1} + c_i) f_i − c_i f_{i+1} = 0
    let mut diag: Vec<f64> = (1..=n).map(|i| c[i - 1] + c[i]).collect();
    let mut rhs = vec![0.0; n];
    rhs[n - 1] = c[n];
    for i in 1..n {
        let w = c[i] / diag[i - 1];
        diag[i] -= w * c[i];
        rhs[i] += w * rhs[i - 1];
    }
    let mut f = vec![0.0; n];
    f[n - 1] = rhs[n - 1] / diag[n - 1];
    for i in (0..n - 1).rev() {
        f[i] = (rhs[i] + c[i + 1] * f[i + 1]) / diag[i];
    }
    let mut full = vec![0.0];
    full.extend(f);
    full.push(1.0);
    c.iter().enumerate().map(|(i, ci)| ci * (full[i + 1] - full[i]).powi(2)).sum()
}

/// Capacity of `[a, b]` by exhaustive search over grid supports.
fn brute_capacity(m: &Measure1D, a: f64, b: f64, cells: usize) -> f64 {
    let lo = m.quantile_left(1e-9).unwrap();
    let hi = m.quantile_right(1e-9).unwrap();
    let mut x: Vec<f64> = (0..=cells).map(|i| lo + (hi - lo) * i as f64 / cells as f64).collect();
    x.retain(|&t| (t - a).abs() > 1e-12 && (t - b).abs() > 1e-12);
    x.push(a);
    x.push(b);
    x.sort_by(f64::total_cmp);
    let ia = x.iter().position(|&t| t == a).unwrap();
    let ib = x.iter().position(|&t| t == b).unwrap();
    let cond: Vec<f64> = x.windows(2).map(|w| m.density(0.5 * (w[0] + w[1])) / (w[1] - w[0])).collect();
    let mass: Vec<f64> = x
        .windows(2)
        .map(|w| {
            let (p, q) = (w[0], w[1]);
            (q - p) / 6.0 * (m.density(p) + 4.0 * m.density(0.5 * (p + q)) + m.density(q))
        })
        .collect();
    let mut prefix = vec![0.0];
    for v in &mass {
        prefix.push(prefix.last().unwrap() + v);
    }
    // left[j]: zero at node j (None: f = 1 up to the lower end)
    let mut left: Vec<(f64, usize)> = vec![(0.0, 0)];
    for j in 0..ia {
        left.push((chain_energy(&cond[j..ia]), j));
    }
    let mut right: Vec<(f64, usize)> = vec![(0.0, x.len() - 1)];
    for k in ib + 1..x.len() {
        let mut c: Vec<f64> = cond[ib..k].to_vec();
        c.reverse();
        right.push((chain_energy(&c), k));
    }
    let mut best = f64::INFINITY;
    for &(el, j) in &left {
        for &(er, k) in &right {
            if prefix[k] - prefix[j] <= 0.5 {
                best = best.min(el + er);
            }
        }
    }
    best
}

fn capacity_oracle() -> Outcome {
    let uniform = Measure1D::on_interval(Potential::expression("0").unwrap(), (0.0, 1.0), 2001).unwrap();
    let u = interval_capacity(&uniform, 0.45, 0.55).unwrap();
    let presets = [
        Potential::Gaussian,
        Potential::DoubleWell,
        Potential::Power { alpha: 1.5 },
        Potential::expression("x^4/4 + x").unwrap(),
    ];
    let measures: Vec<Measure1D> = presets
        .iter()
        .map(|p| Measure1D::build(p.clone(), (-10.0, 10.0), 2001, 1e-10).unwrap())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut worst = 0.0f64;
    for i in 0..20 {
        let m = &measures[i % measures.len()];
        let w = rng.gen_range(0.02..0.3);
        let start = rng.gen_range(0.05..0.95 - w);
        let a = m.quantile_left(start).unwrap();
        let b = m.quantile_left(start + w).unwrap();
        let lib = interval_capacity(m, a, b).unwrap();
        let brute = brute_capacity(m, a, b, 3000);
        worst = worst.max((lib - brute).abs() / brute);
    }
    outcome(
        worst <= 0.02 && (u - 10.0).abs() <= 1e-6,
        format!("max relative gap {worst:.2e} over 20 instances; uniform cap = {u:.12}"),
    )
}

fn poincare_sandwich() -> Outcome {
    let m = gaussian(2001);
    let prof = capacity_profile(&m, &geometric_grid(1e-3, 0.5, 20)).unwrap();
    let (lo, hi) = poincare_from_mc(&prof).unwrap();
    let ratio = hi / lo;
    outcome(
        lo <= 1.0 && 1.0 <= hi && ratio == 4.0,
        format!("[{lo:.4}, {hi:.4}], width ratio {ratio}"),
    )
}

fn endgame() -> Outcome {
    let m = gaussian(2001);
    let grid = geometric_grid(1e-8, 1e-3, 40);
    let prof = capacity_profile(&m, &grid).unwrap();
    let c_sup = audit_lp_bound(40, &[3.0, 4.0, 6.0, 8.0, 12.0]).unwrap().c_sup;
    let family: Vec<GaussChainParams> = [1, 2, 5, 10]
        .iter()
        .map(|&d| GaussChainParams::standard(d, c_sup).unwrap())
        .collect();
    let k1 = find_kappa1(&family).unwrap();
    let shared = family.iter().all(|p| {
        k1.grid
            .iter()
            .filter(|&&l| l >= k1.log_inv_kappa1)
            .all(|&l| claim_check_log(l, p).unwrap().pass)
    });
    let mut dominated = true;
    let mut exact = true;
    let mut min_margin = f64::INFINITY;
    for &(kappa, c) in &prof.entries {
        let chain = c_kappa_chain(kappa, k1.kappa1).unwrap();
        exact &= chain == (1.0 / kappa).ln() / 32.0 || chain == -kappa.ln() / 32.0;
        dominated &= c >= chain;
        min_margin = min_margin.min(c / chain);
    }
    outcome(
        dominated && exact && shared && k1.kappa1 >= 1e-3,
        format!(
            "κ₁ = {:.4e} shared by d ∈ {{1,2,5,10}}; min C_κ/(log(1/κ)/32) = {min_margin:.2}",
            k1.kappa1
        ),
    )
}

fn spi_certification() -> Outcome {
    let m = gaussian(2001);
    let spec = low_spectrum(&m, 14, Some(f64::INFINITY)).unwrap();
    let pair = power_pair(4.0).unwrap();
    let rs = [0.1, 0.5, 1.0];
    let ospi = spectral_ospi(&spec, &pair, &rs).unwrap();
    let mut worst = f64::NEG_INFINITY;
    for &r in &rs {
        let rep = verify_spi(&m, &SpiTarget::Orlicz(&ospi), r, 1000, 7).unwrap();
        worst = worst.max(rep.max_violation);
    }
    let mut q_ok = true;
    for i in 0..200 {
        let f = draw_test_function(&m, 11, i).unwrap().sample(&spec.nodes);
        for &r in &rs {
            let split = projection_split(&m, &spec, &f, r).unwrap();
            q_ok &= split.q_bound_holds(1e-9 * (split.p_part + split.q_part));
        }
    }
    outcome(
        worst <= 1e-8 && q_ok,
        format!("max violation {worst:.3e}; Q-bound on 200 functions: {q_ok}"),
    )
}

fn transfer_round_trip() -> Outcome {
    let beta = BetaFunction::closed(1.0, |r| 1.0 / (r - 1.0));
    let kappas = geometric_grid(1e-300, 0.5, 400);
    let prof = spi_to_mc(&beta, 1.0, &|x: f64| x.sqrt(), 0.01, &kappas).unwrap();
    let back = mc_to_spi(&prof).unwrap();
    let ratio = 1.05f64;
    let r_grid = geometric_grid(1.0, 100.0, 1 + (100f64.ln() / ratio.ln()).ceil() as usize);
    let below = r_grid.iter().filter(|&&r| r <= 8.0 / ratio).all(|&r| back.eval(r).is_none());
    let above = r_grid.iter().filter(|&&r| r >= 8.0 * ratio).all(|&r| back.eval(r).is_some());
    outcome(
        below && above,
        format!("threshold r0′ = {:.4} (target 8, grid ratio {ratio})", back.r0),
    )
}

fn lsi_defect() -> Outcome {
    let m = gaussian(2001);
    let rep = lsi_defect_check(&m, 2.0, 1000, 3).unwrap();
    outcome(
        (1.9..=2.1).contains(&rep.max_ratio) && rep.pass,
        format!(
            "max ratio {:.6} (exponential {:.6}, random {:.6})",
            rep.max_ratio, rep.exponential_max_ratio, rep.random_max_ratio
        ),
    )
}

fn run_cli(dir: &Path, args: &[&str]) {
    let status = Command::new(env!("CARGO_BIN_EXE_spilab"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .arg("--format")
        .arg("csv,json,svg")
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let runs: [&[&str]; 3] = [
        &["spectrum", "--k", "12", "--trials", "50", "--seed", "5"],
        &["gauss-lsi", "--trials", "50", "--seed", "5"],
        &["analyze", "--expr", "abs(x)^1.5", "--seed", "5"],
    ];
    let mut files = 0;
    for (i, args) in runs.iter().enumerate() {
        let a = tmp.path().join(format!("{i}a"));
        let b = tmp.path().join(format!("{i}b"));
        run_cli(&a, args);
        run_cli(&b, args);
        for entry in fs::read_dir(&a).unwrap() {
            let name = entry.unwrap().file_name();
            if fs::read(a.join(&name)).unwrap() != fs::read(b.join(&name)).unwrap() {
                return outcome(false, format!("{} differs between runs", name.to_string_lossy()));
            }
            files += 1;
        }
    }
    outcome(files >= 9, format!("{files} artifacts byte-identical across repeated runs"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("OU spectrum", ou_spectrum),
        ("Hermite orthonormality", hermite_orthonormality),
        ("L^p oracle", lp_oracle),
        ("L^p bound audit", lp_audit),
        ("Plancherel-Rotach", plancherel_rotach),
        ("capacity oracle", capacity_oracle),
        ("Poincare sandwich", poincare_sandwich),
        ("capacity endgame", endgame),
        ("SPI certification", spi_certification),
        ("transfer round trip", transfer_round_trip),
        ("LSI defect", lsi_defect),
        ("determinism", determinism),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let res = panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|e| outcome(false, format!("panicked: {:?}", e.downcast_ref::<String>())));
        let tag = if res.pass { "PASS" } else { "FAIL" };
        println!("{tag} #{:<2} {name}: {}", i + 1, res.detail);
        if !res.pass {
            failures += 1;
        }
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
