//! Acceptance criteria, one PASS/FAIL line each.

use std::panic::{self, AssertUnwindSafe};
use std::process::{Command, ExitCode};

use fdsphere::{Branch, RegimeCase, SphereModel};

type Outcome = Result<String, String>;

const PAIRS: [(u32, f64); 3] = [(2, 0.5), (3, 0.25), (5, 0.3)];

fn model(d: u32, m: f64) -> SphereModel {
    SphereModel::new(d, m).expect("valid reference parameters")
}

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn window_samples(md: &SphereModel, n: u32) -> Vec<f64> {
    let (low, high) = md.fully_supported_window();
    let high = if high.is_finite() { high } else { 4.0 * low };
    (0..n)
        .map(|i| low + (high - low) * (f64::from(i) + 0.5) / f64::from(n))
        .collect()
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fdsphere"))
}

fn kappa1_reproduction() -> Outcome {
    let published = [5.3174, 9.3648, 19.9199];
    let mut worst = 0f64;
    for ((d, m), want) in PAIRS.into_iter().zip(published) {
        worst = worst.max((model(d, m).kappa1() - want).abs());
    }
    ensure(worst <= 5e-4, format!("max |kappa1 - published| = {worst:.2e} (tol 5e-4)"))
}

fn fold_ratio() -> Outcome {
    let md = model(5, 0.3);
    let (k3, _) = md.kappa3_and_alpha_bar().unwrap();
    let ratio = k3 / md.kappa2().unwrap();
    ensure(
        (ratio - 0.88502).abs() <= 1e-3,
        format!("kappa3/kappa2 = {ratio:.6} (target 0.88502 +- 1e-3; published 15.8088/17.8623 = {:.6})", 15.8088 / 17.8623),
    )
}

fn kappa2_dual_oracle() -> Outcome {
    let mut worst = 0f64;
    let mut values = Vec::new();
    for (d, m) in [(3, 0.25), (4, 0.2), (5, 0.3)] {
        let md = model(d, m);
        let closed = md.kappa2().unwrap();
        let quad = md.kappa2_quadrature().unwrap();
        worst = worst.max(((closed - quad) / closed).abs());
        values.push(format!("({d},{m}) {closed:.10}/{quad:.10}"));
    }
    let out = bin().arg("verify").output().expect("run verify");
    let text = String::from_utf8_lossy(&out.stdout);
    let reported = text.lines().any(|l| {
        l.starts_with("NOTE kappa2(3,0.25)")
            && l.contains("closed form 14.056")
            && l.contains("quadrature 14.056")
            && l.contains("12.4453")
    });
    ensure(
        worst <= 1e-8 && reported,
        format!(
            "max rel diff {worst:.2e} (tol 1e-8); {}; verify prints both oracles and the published 12.4453: {reported}",
            values.join(", ")
        ),
    )
}

fn s_bar_quadrature() -> Outcome {
    let mut worst = 0f64;
    for (d, m) in [(3, 0.25), (3, 0.1), (4, 0.2), (5, 0.3), (6, 0.55)] {
        let md = model(d, m);
        worst = worst.max((md.s_bar().unwrap() - md.s_bar_quadrature().unwrap()).abs());
    }
    ensure(worst <= 1e-8, format!("max |closed - quadrature| = {worst:.2e} over 5 pairs (tol 1e-8)"))
}

fn h_limit() -> Outcome {
    let mut worst = 0f64;
    for (d, m) in PAIRS {
        let md = model(d, m);
        worst = worst.max((md.h(1e6).unwrap() * md.kappa1() - 1.0).abs());
    }
    ensure(worst <= 1e-4, format!("max |H(1e6) kappa1 - 1| = {worst:.2e} (tol 1e-4)"))
}

fn h_monotone() -> Outcome {
    let mut violations = 0;
    for (d, m) in [(2, 0.5), (3, 0.25), (3, 0.9), (5, 0.3), (5, 0.65)] {
        let md = model(d, m);
        let increasing = md.case() != RegimeCase::CaseIII;
        let hs: Vec<f64> = (1..=20)
            .map(|i| md.h(10f64.powf(4.0 * f64::from(i) / 20.0)).unwrap())
            .collect();
        violations += hs.windows(2).filter(|w| (w[1] > w[0]) != increasing).count();
    }
    ensure(violations == 0, format!("{violations} ordering violations over 5 pairs x 20 eta"))
}

fn branch_self_consistency() -> Outcome {
    let (mut mass_err, mut moment_err) = (0f64, 0f64);
    for (d, m) in PAIRS {
        let md = model(d, m);
        for kappa in window_samples(&md, 10) {
            let st = md.fully_supported_state(kappa).unwrap();
            let core = st.eta_excess.sqrt().min(1.0);
            let (mass, moment) = md
                .radial_moments(|t| md.rho_kappa_density(&st, t), core)
                .unwrap();
            mass_err = mass_err.max((mass - 1.0).abs());
            moment_err = moment_err.max((moment - st.s).abs());
        }
    }
    ensure(
        mass_err <= 1e-8 && moment_err <= 1e-8,
        format!("max mass err {mass_err:.2e}, max moment err {moment_err:.2e} (tol 1e-8, 30 states)"),
    )
}

fn central<F: Fn(f64) -> f64>(f: F, kappa: f64) -> f64 {
    let h = 1e-5 * kappa;
    (f(kappa + h) - f(kappa - h)) / (2.0 * h)
}

fn slope_identities() -> Outcome {
    let mut singular = 0f64;
    for (d, m) in [(3, 0.25), (5, 0.3)] {
        let md = model(d, m);
        let k2 = md.kappa2().unwrap();
        let samples: Vec<f64> = if md.case() == RegimeCase::CaseIII {
            let (k3, _) = md.kappa3_and_alpha_bar().unwrap();
            (1..=5).map(|i| k3 + (md.kappa1() - k3) * f64::from(i) / 6.0).collect()
        } else {
            [1.1, 1.5, 2.0, 3.0, 5.0].iter().map(|f| f * k2).collect()
        };
        let gap = |k: f64| {
            let a = md.alpha_roots(k).unwrap().upper().unwrap();
            md.energy_uniform(k) - md.energy_singular(a, k).unwrap()
        };
        for kappa in samples {
            let st = *md.singular_states(kappa).unwrap().last().unwrap();
            let want = 0.5 * st.com_norm().powi(2);
            singular = singular.max(((central(gap, kappa) - want) / want).abs());
        }
    }
    let mut g1g2 = 0f64;
    for (d, m) in PAIRS {
        let md = model(d, m);
        let along = |k: f64| md.g1g2_excess(md.solve_eta_excess(k).unwrap()).unwrap().value;
        for kappa in window_samples(&md, 5) {
            let s = md.fully_supported_state(kappa).unwrap().s;
            g1g2 = g1g2.max(((central(along, kappa) - 0.5 * s * s) / (0.5 * s * s)).abs());
        }
    }
    ensure(
        singular <= 1e-4 && g1g2 <= 1e-4,
        format!("max rel err: singular gap slope {singular:.2e}, g1g2 slope {g1g2:.2e} (tol 1e-4)"),
    )
}

fn classification() -> Outcome {
    let mut details = Vec::new();
    let mut ok = true;
    for (d, m) in PAIRS {
        let md = model(d, m);
        let set = md.critical_set().unwrap();
        let top = match md.case() {
            RegimeCase::CaseII => 1.5 * set.kappa2.unwrap(),
            _ => 1.5 * set.kappa1,
        };
        let grid: Vec<f64> = (1..=50).map(|i| top * f64::from(i) / 50.0).collect();
        let mut tags = Vec::new();
        for &kappa in &grid {
            let r = md.classify_minimizer(kappa).unwrap();
            let argmin = r
                .energies()
                .into_iter()
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap()
                .0;
            ok &= argmin == r.minimizer;
            tags.push(r.minimizer);
        }
        let switches: Vec<(f64, f64, Branch)> = grid
            .windows(2)
            .zip(tags.windows(2))
            .filter(|(_, t)| t[0] != t[1])
            .map(|(k, t)| (k[0], k[1], t[1]))
            .collect();
        let expected = match md.case() {
            RegimeCase::CaseI => vec![(set.kappa1, Branch::FullySupported)],
            RegimeCase::CaseII => vec![
                (set.kappa1, Branch::FullySupported),
                (set.kappa2.unwrap(), Branch::SingularUpper),
            ],
            RegimeCase::CaseIII => {
                let kc = set.kappa_c.unwrap();
                ok &= set.kappa3.unwrap() < kc && kc < set.kappa1;
                vec![(kc, Branch::SingularUpper)]
            }
        };
        ok &= switches.len() == expected.len();
        for ((lo, hi, tag), (k, want)) in switches.iter().zip(&expected) {
            ok &= lo < k && k <= hi && tag == want;
            details.push(format!("({d},{m}) {tag} at {k:.4} in ({lo:.3}, {hi:.3}]"));
        }
    }
    ensure(ok, details.join("; "))
}

struct Row {
    kappa: f64,
    branch: String,
    alpha: Option<f64>,
    com_norm: f64,
}

fn sweep_rows(d: u32, m: f64, lo: f64, hi: f64, steps: u32) -> Vec<Row> {
    let out = bin()
        .args(["sweep", "--d", &d.to_string(), "--m", &m.to_string()])
        .args(["--kappa-min", &lo.to_string(), "--kappa-max", &hi.to_string()])
        .args(["--steps", &steps.to_string()])
        .output()
        .expect("run sweep");
    assert!(out.status.success(), "sweep failed: {}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("kappa,branch,alpha,eta,com_norm,energy"));
    lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            Row {
                kappa: f[0].parse().unwrap(),
                branch: f[1].to_string(),
                alpha: (!f[2].is_empty()).then(|| f[2].parse().unwrap()),
                com_norm: f[4].parse().unwrap(),
            }
        })
        .collect()
}

fn of<'a>(rows: &'a [Row], branch: &str) -> Vec<&'a Row> {
    rows.iter().filter(|r| r.branch == branch).collect()
}

fn bifurcation_shape() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;

    // case i: s grows from 0 at kappa1 towards 1
    let md = model(2, 0.5);
    let k1 = md.kappa1();
    let rows = sweep_rows(2, 0.5, 1.0, 6.0 * k1, 300);
    let fs = of(&rows, "fully_supported");
    ok &= fs.iter().all(|r| r.kappa > k1);
    ok &= fs.windows(2).all(|w| w[1].com_norm > w[0].com_norm);
    let (first, last) = (fs[0].com_norm, fs[fs.len() - 1].com_norm);
    ok &= first < 0.15 && last > 0.9 && last < 1.0;
    ok &= of(&rows, "uniform").iter().all(|r| r.com_norm == 0.0);
    notes.push(format!("case i s: {first:.3} -> {last:.3}"));

    // case ii: density branch hands off to the measure branch at kappa2
    let md = model(3, 0.25);
    let (k1, k2, s_bar) = (md.kappa1(), md.kappa2().unwrap(), md.s_bar().unwrap());
    let rows = sweep_rows(3, 0.25, 5.0, 25.0, 401);
    let fs = of(&rows, "fully_supported");
    let up = of(&rows, "singular_upper");
    ok &= fs.iter().all(|r| r.kappa > k1 && r.kappa < k2);
    ok &= up.iter().all(|r| r.kappa > k2);
    ok &= of(&rows, "singular_lower").is_empty();
    let (last_fs, first_up) = (fs[fs.len() - 1], up[0]);
    ok &= last_fs.com_norm < s_bar && first_up.com_norm > s_bar;
    ok &= (first_up.com_norm - last_fs.com_norm).abs() < 0.02;
    notes.push(format!(
        "case ii handoff between kappa {:.3} and {:.3} (kappa2 {k2:.4}), com {:.4} -> {:.4}",
        last_fs.kappa, first_up.kappa, last_fs.com_norm, first_up.com_norm
    ));

    // case iii: two measure-valued branches exactly on (kappa3, kappa2)
    let md = model(5, 0.3);
    let (k3, _) = md.kappa3_and_alpha_bar().unwrap();
    let (k1, k2, s_bar) = (md.kappa1(), md.kappa2().unwrap(), md.s_bar().unwrap());
    let rows = sweep_rows(5, 0.3, 14.0, 22.0, 401);
    let lower = of(&rows, "singular_lower");
    let upper = of(&rows, "singular_upper");
    ok &= lower.iter().all(|r| r.kappa > k3 && r.kappa < k2);
    let grid_inside = rows
        .iter()
        .filter(|r| r.branch == "uniform" && r.kappa > k3 && r.kappa < k2)
        .count();
    ok &= lower.len() == grid_inside && grid_inside > 0;
    ok &= upper.iter().all(|r| r.kappa >= k3);
    ok &= of(&rows, "fully_supported").iter().all(|r| r.kappa > k2 && r.kappa < k1);
    let end = lower[lower.len() - 1];
    ok &= (end.com_norm - s_bar).abs() < 0.01;
    for r in rows.iter().filter(|r| r.branch.starts_with("singular")) {
        let a = r.alpha.unwrap();
        ok &= (r.com_norm - (a + (1.0 - a) * s_bar)).abs() <= 1e-12;
    }
    notes.push(format!(
        "case iii: {} lower rows in ({k3:.4}, {k2:.4}); lower com at kappa {:.3} = {:.4} (s_bar {s_bar})",
        lower.len(),
        end.kappa,
        end.com_norm
    ));
    ensure(ok, notes.join("; "))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let path = dir.path().join(name);
        let status = bin()
            .args(["sweep", "--d", "5", "--m", "0.3", "--kappa-min", "10", "--kappa-max", "25"])
            .args(["--steps", "151", "--out"])
            .arg(&path)
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read(path).unwrap()
    };
    let (a, b) = (run("a.csv"), run("b.csv"));
    ensure(a == b && !a.is_empty(), format!("two sweeps of {} bytes identical: {}", a.len(), a == b))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("kappa1 reproduction", kappa1_reproduction),
        ("kappa3/kappa2 ratio", fold_ratio),
        ("kappa2 dual-oracle consistency", kappa2_dual_oracle),
        ("s_bar closed form vs quadrature", s_bar_quadrature),
        ("H limit at large eta", h_limit),
        ("H monotonicity", h_monotone),
        ("branch self-consistency", branch_self_consistency),
        ("slope identities", slope_identities),
        ("global minimizer classification", classification),
        ("bifurcation diagram shape", bifurcation_shape),
        ("sweep determinism", determinism),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
