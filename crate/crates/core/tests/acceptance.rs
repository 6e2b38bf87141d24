//! Desk-scale acceptance run. Prints one line per criterion and exits
//! nonzero if any criterion fails.

use std::f64::consts::PI;
use std::process::{Command, ExitCode};
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use weyl_lab::localization::{
    default_states, default_times, is_nonincreasing, EnergyWindow, LocalizationProblem, RegionFamily,
};
use weyl_lab::numerics::{eigvalsh, ComplexMatrix};
use weyl_lab::phase_space::{
    mollified_derivative, mollify_indicator, Dependence, Interval, Mollifier, PhaseGrid, Region, Symbol,
};
use weyl_lab::scenarios::{
    box_hamiltonian, constant_scenario, floquet_bands, mathieu_scenario, numeric_spectrum_check,
    predicted_essential_spectrum, step_scenario, tanh_scenario, AnisotropicScenario, BoundaryComponent, BoxOptions,
};
use weyl_lab::weyl::{
    covariance_defect, dequantize, moyal_product_resolved, moyal_product_sampled, moyal_quadrature_probe, quantize,
    quantize_sampled, weyl_multiplier, weyl_system, SampledSymbol,
};

// Tolerances, one block per criterion.
const C1_TOL: f64 = 1e-8;
const C1_SECONDS: f64 = 10.0;
const C2_REL: f64 = 0.02;
const C2_ASSOC: f64 = 1e-9;
const C2_SECONDS: f64 = 60.0;
const C3_SUPPORT: f64 = 1e-12;
const C3_DERIVATIVE: f64 = 1e-5;
const C3_COMPLEMENT: f64 = 1e-10;
const C4_HAUSDORFF: f64 = 0.15;
const C4_SECONDS: f64 = 300.0;
const C5_BAND: f64 = 1e-2;
const C6_JITTER: f64 = 0.05;
const C6_EPSILON: f64 = 0.1;
const C6_PLATEAU: f64 = 0.3;
const C7_EPSILON: f64 = 0.1;
const C8_SLACK: f64 = 1e-6;
const C8_COMMUTATOR: f64 = 1e-9;
const C8_RANDOM_STATES: usize = 100;
const C8_TIMES: usize = 50;
const C9_RATIO: f64 = 0.1;
const C9_FLAT: f64 = 0.05;

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

fn window(alpha: f64, beta: f64) -> EnergyWindow {
    EnergyWindow::new(alpha, beta, 0.5).unwrap()
}

fn problem(s: &AnisotropicScenario, grid: &PhaseGrid, w: EnergyWindow) -> LocalizationProblem {
    let h = box_hamiltonian(s, grid, &BoxOptions::default());
    LocalizationProblem::new(grid, &h, w).unwrap()
}

fn range(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step).round() as usize;
    (0..=n).map(|i| start + step * i as f64).collect()
}

fn dft(grid: &PhaseGrid) -> DMatrix<C64> {
    let n = grid.n_points();
    let (xs, ps) = (grid.positions(), grid.momenta());
    DMatrix::from_fn(n, n, |j, m| C64::from_polar(1.0 / (n as f64).sqrt(), xs[j] * ps[m]))
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let g = PhaseGrid::new(63, 30.0).unwrap();
    let n = g.n_points();
    let mut worst: Vec<(&str, f64)> = Vec::new();

    let one = quantize(&g, &Symbol::real(Dependence::Mixed, |_, _| 1.0));
    worst.push(("unit", one.max_entry_distance(&ComplexMatrix::identity(n))));

    let v = |x: f64| 0.5 * (1.0 + x.tanh()) + 0.2 * (0.3 * x).sin();
    let qv = quantize(&g, &Symbol::real(Dependence::Mixed, move |x, _| v(x)));
    let diag: Vec<f64> = g.positions().iter().map(|&x| v(x)).collect();
    worst.push((
        "position",
        qv.max_entry_distance(&ComplexMatrix::from_real_diagonal(&diag)),
    ));

    let h = |p: f64| p.tanh() + 0.1 * p.cos();
    let qh = quantize(&g, &Symbol::real(Dependence::Mixed, move |_, p| h(p)));
    let f = dft(&g);
    let d = DMatrix::from_diagonal(&DVector::from_iterator(
        n,
        g.momenta().iter().map(|&p| C64::new(h(p), 0.0)),
    ));
    let oracle = ComplexMatrix::new(&f * d * f.adjoint()).unwrap();
    worst.push(("momentum", qh.max_entry_distance(&oracle)));

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let samples = DMatrix::from_fn(n, n, |_, _| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    let s = SampledSymbol::new(g, samples).unwrap();
    let back = dequantize(&g, &quantize_sampled(&s)).unwrap();
    worst.push(("round trip", back.max_distance(&s)));

    let xa = g.lattice_point(4, 1);
    let ya = g.lattice_point(-7, 5);
    let lhs = weyl_system(&g, xa.0, xa.1)
        .unwrap()
        .mul(&weyl_system(&g, ya.0, ya.1).unwrap());
    let rhs = weyl_system(&g, xa.0 + ya.0, xa.1 + ya.1)
        .unwrap()
        .scale(weyl_multiplier(xa, ya));
    worst.push(("projective", lhs.max_entry_distance(&rhs)));

    let (l, dx) = (g.box_length(), g.dx());
    let periodic = Symbol::real(Dependence::Mixed, move |x, p| {
        (2.0 * PI * x / l).cos() * (p * dx).sin() + (4.0 * PI * x / l).sin() + (2.0 * p * dx).cos()
    });
    let (x, p) = g.lattice_point(5, -3);
    worst.push(("covariance", covariance_defect(&g, &periodic, x, p).unwrap()));

    let secs = start.elapsed().as_secs_f64();
    let max = worst.iter().map(|w| w.1).fold(0.0, f64::max);
    let pass = max <= C1_TOL && secs < C1_SECONDS;
    let parts: Vec<String> = worst.iter().map(|(k, e)| format!("{k} {e:.1e}")).collect();
    outcome(pass, format!("{} (tol {C1_TOL:e}); {secs:.2} s", parts.join(", ")))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let gauss = |x: f64, p: f64| (-(x * x + p * p)).exp();
    let f = Symbol::real(Dependence::Mixed, move |x, p| x * gauss(x, p));
    let h = Symbol::real(Dependence::Mixed, move |x, p| p * gauss(x, p));
    let g = PhaseGrid::new(201, 40.0).unwrap();
    let c = g.center();
    let product = moyal_product_resolved(&g, &f, &h);
    let mut worst_rel: f64 = 0.0;
    for (jx, m) in [(0i64, 0i64), (2, 0), (0, 3), (-3, 2), (3, -2)] {
        let (j, q) = ((c as i64 + jx) as usize, (c as i64 + m) as usize);
        let x0 = (g.position(j), g.momentum(q));
        let exact = moyal_quadrature_probe(&f, &h, x0, 6.0, 160, 1e-12).unwrap();
        worst_rel = worst_rel.max((product.get(j, q) - exact).norm() / exact.norm());
    }

    let a = SampledSymbol::from_symbol(&g, &f);
    let b = SampledSymbol::from_symbol(&g, &h);
    let k = SampledSymbol::from_symbol(
        &g,
        &Symbol::real(Dependence::Mixed, move |x, p| gauss(x - 0.5, p + 0.3)),
    );
    let left = moyal_product_sampled(&moyal_product_sampled(&a, &b), &k);
    let right = moyal_product_sampled(&a, &moyal_product_sampled(&b, &k));
    let assoc = left.max_distance(&right) / left.max_abs().max(1e-300);
    let secs = start.elapsed().as_secs_f64();
    let mat_assoc = {
        let (qa, qb, qk) = (quantize_sampled(&a), quantize_sampled(&b), quantize_sampled(&k));
        let l = qa.mul(&qb).mul(&qk);
        l.max_entry_distance(&qa.mul(&qb.mul(&qk))) / l.max_abs()
    };
    let pass = worst_rel <= C2_REL && assoc <= C2_ASSOC && mat_assoc <= C2_ASSOC && secs < C2_SECONDS;
    outcome(
        pass,
        format!(
            "max relative error {worst_rel:.2e} at 5 points (tol {C2_REL}); associativity {assoc:.1e}, matrix {mat_assoc:.1e} (tol {C2_ASSOC:e}); {secs:.2} s"
        ),
    )
}

fn criterion_3() -> Outcome {
    let ix = Interval::new(-2.0, 3.0);
    let ip = Interval::new(-1.0, 1.5);
    let (wx, wp) = (0.4, 0.3);
    let phi = Mollifier::new(wx, wp).unwrap();
    let rect = Region::Rectangle { x: ix, xi: ip };
    let chi = mollify_indicator(&rect, &phi).unwrap();
    let mut support: f64 = 0.0;
    for i in 0..=120 {
        for k in 0..=120 {
            let x = -4.0 + 9.0 * i as f64 / 120.0;
            let p = -3.0 + 6.5 * k as f64 / 120.0;
            let v = chi.eval_re(x, p);
            let inner = x > ix.lo + wx && x < ix.hi - wx && p > ip.lo + wp && p < ip.hi - wp;
            let outer = x > ix.lo - wx && x < ix.hi + wx && p > ip.lo - wp && p < ip.hi + wp;
            if inner {
                support = support.max((v - 1.0).abs());
            } else if !outer {
                support = support.max(v.abs());
            }
        }
    }

    // Central differences of chi^phi against chi^{d^alpha phi}.
    let wide = Mollifier::new(1.0, 0.8).unwrap();
    let chi_w = mollify_indicator(&rect, &wide).unwrap();
    let mut deriv: f64 = 0.0;
    for alpha in [(1, 0), (0, 1), (1, 1), (2, 0)] {
        let exact = mollified_derivative(&rect, &wide, alpha).unwrap();
        for (x, p) in [(-2.3, 0.1), (-1.5, -0.9), (2.6, 1.2), (0.4, 1.9), (3.5, -1.4)] {
            let fd = match alpha {
                (1, 0) => {
                    let e = 1e-4;
                    (chi_w.eval_re(x + e, p) - chi_w.eval_re(x - e, p)) / (2.0 * e)
                }
                (0, 1) => {
                    let e = 1e-4;
                    (chi_w.eval_re(x, p + e) - chi_w.eval_re(x, p - e)) / (2.0 * e)
                }
                (1, 1) => {
                    let e = 1e-3;
                    (chi_w.eval_re(x + e, p + e) - chi_w.eval_re(x + e, p - e) - chi_w.eval_re(x - e, p + e)
                        + chi_w.eval_re(x - e, p - e))
                        / (4.0 * e * e)
                }
                _ => {
                    let e = 1e-3;
                    (chi_w.eval_re(x + e, p) - 2.0 * chi_w.eval_re(x, p) + chi_w.eval_re(x - e, p)) / (e * e)
                }
            };
            deriv = deriv.max((exact.eval_re(x, p) - fd).abs());
        }
    }

    let mut complement: f64 = 0.0;
    for region in [
        Region::PositionAbove { a: 1.3 },
        Region::PositionBelow { a: -0.7 },
        Region::MomentumAbove { b: 2.0 },
        Region::MomentumBelow { b: 0.5 },
        Region::Full,
    ] {
        let a = mollify_indicator(&region, &phi).unwrap();
        let b = mollify_indicator(&region.complement().unwrap(), &phi).unwrap();
        for i in 0..=200 {
            let t = -4.0 + 8.0 * i as f64 / 200.0;
            for (x, p) in [(t, 0.3 * t), (0.5 * t, t), (t, -t)] {
                complement = complement.max((a.eval_re(x, p) + b.eval_re(x, p) - 1.0).abs());
            }
        }
    }
    let pass = support <= C3_SUPPORT && deriv <= C3_DERIVATIVE && complement <= C3_COMPLEMENT;
    outcome(
        pass,
        format!(
            "support {support:.1e} (tol {C3_SUPPORT:e}), derivative {deriv:.1e} (tol {C3_DERIVATIVE:e}), complement {complement:.1e} (tol {C3_COMPLEMENT:e})"
        ),
    )
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let s = tanh_scenario();
    let predicted = predicted_essential_spectrum(&s).unwrap();
    let iv = predicted.intervals();
    let union_ok = iv.len() == 1 && (iv[0].lo - 1.0).abs() < 1e-12 && (iv[0].hi - 9.0).abs() < 1e-12;
    let g = PhaseGrid::new(401, 120.0).unwrap();
    let report = numeric_spectrum_check(&s, &g, &BoxOptions::default()).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let d = report.one_sided_hausdorff;
    let pass = union_ok && d <= C4_HAUSDORFF && secs <= C4_SECONDS;
    let shown: Vec<(f64, f64)> = iv.iter().map(|i| (i.lo, i.hi)).collect();
    outcome(
        pass,
        format!("predicted {shown:?}; one-sided Hausdorff {d:.4} (tol {C4_HAUSDORFF}); {secs:.1} s"),
    )
}

fn criterion_5() -> Outcome {
    let (m, cells) = (15usize, 61usize);
    let s = mathieu_scenario();
    let period = 2.0 * PI;
    let bands = floquet_bands(&s.h_symbol(), &s.v_symbol(), period, m, 32)
        .unwrap()
        .elliptic_tail();
    let g = PhaseGrid::new(m * cells, period * cells as f64).unwrap();
    let ev = eigvalsh(&box_hamiltonian(&s, &g, &BoxOptions::default())).unwrap();
    let (lo, hi) = (ev[0], ev[cells - 1]);
    let b = bands.bands[0];
    let (dlo, dhi) = ((b.lo - lo).abs(), (b.hi - hi).abs());
    let pass = dlo <= C5_BAND && dhi <= C5_BAND;
    outcome(
        pass,
        format!(
            "lowest band [{:.5}, {:.5}] vs box [{lo:.5}, {hi:.5}]; deviations {dlo:.1e}, {dhi:.1e} (tol {C5_BAND})",
            b.lo, b.hi
        ),
    )
}

struct SweepRun {
    norms: Vec<f64>,
    holds: bool,
    worst_margin: f64,
    commutator: f64,
}

fn sweep_with_dynamics(p: &LocalizationProblem, component: BoundaryComponent, offsets: &[f64]) -> SweepRun {
    let g = *p.grid();
    let family = RegionFamily::new(component);
    let phi = Mollifier::for_grid(&g, 4.0).unwrap();
    let states = default_states(p, C8_RANDOM_STATES, 0);
    let times = default_times();
    assert_eq!(times.len(), C8_TIMES + 1);
    let mut norms = Vec::new();
    let mut holds = true;
    let mut worst_margin = f64::NEG_INFINITY;
    for &a in offsets {
        let region = family.region(a, &g).unwrap();
        let r = p.propagation_bound_check(&region, &phi, &states, &times).unwrap();
        holds &= r.dynamical_sup <= r.static_norm + C8_SLACK;
        worst_margin = worst_margin.max(r.dynamical_sup - r.static_norm);
        norms.push(r.static_norm);
    }
    let commutator = p.commutator_defect(*times.last().unwrap()).unwrap();
    SweepRun {
        norms,
        holds,
        worst_margin,
        commutator,
    }
}

fn fmt_curve(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(" ")
}

fn main() -> ExitCode {
    let mut results: Vec<(usize, Outcome)> = Vec::new();
    let mut report = |k: usize, o: Outcome| {
        println!("criterion {k}: {} {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((k, o));
    };
    report(1, criterion_1());
    report(2, criterion_2());
    report(3, criterion_3());
    report(4, criterion_4());
    report(5, criterion_5());

    // Position localization in the step scenario, with its negative control.
    let step_grid = PhaseGrid::new(401, 80.0).unwrap();
    let offsets = range(0.0, step_grid.box_length() / 4.0, 2.0);
    let step = step_scenario();
    let pos = problem(&step, &step_grid, window(0.3, 0.7));
    let neg = problem(&step, &step_grid, window(1.2, 1.6));
    let pos_run = sweep_with_dynamics(&pos, BoundaryComponent::XPlus, &offsets);
    let neg_run = sweep_with_dynamics(&neg, BoundaryComponent::XPlus, &offsets);
    {
        let last = *pos_run.norms.last().unwrap();
        let mono = is_nonincreasing(&pos_run.norms, C6_JITTER, 0.0);
        let floor = neg_run.norms.iter().copied().fold(f64::INFINITY, f64::min);
        let pass = mono && last <= C6_EPSILON && floor >= C6_PLATEAU;
        report(
            6,
            outcome(
                pass,
                format!(
                    "curve [{}]; value {last:.3e} at a = L/4 (tol {C6_EPSILON}); nonincreasing within {C6_JITTER}: {mono}; control minimum {floor:.3} (floor {C6_PLATEAU})",
                    fmt_curve(&pos_run.norms)
                ),
            ),
        );
    }

    let tanh_grid = PhaseGrid::new(401, 120.0).unwrap();
    let tanh = tanh_scenario();
    let mom = problem(&tanh, &tanh_grid, window(1.2, 2.8));
    let b_max = RegionFamily::new(BoundaryComponent::XiPlus).far_end(&tanh_grid);
    let b_offsets = range(0.0, b_max.floor(), 1.0);
    let mom_run = sweep_with_dynamics(&mom, BoundaryComponent::XiPlus, &b_offsets);
    {
        let hit = b_offsets.iter().zip(&mom_run.norms).find(|(_, &v)| v <= C7_EPSILON);
        let pass = hit.is_some();
        let at = hit.map_or("never".to_string(), |(b, v)| format!("at b = {b} ({v:.3e})"));
        report(
            7,
            outcome(
                pass,
                format!(
                    "curve [{}] over b in [0, {}]; reaches {C7_EPSILON} {at}",
                    fmt_curve(&mom_run.norms),
                    b_max.floor()
                ),
            ),
        );
    }

    {
        let runs = [
            ("step", &pos_run),
            ("step control", &neg_run),
            ("tanh momentum", &mom_run),
        ];
        let holds = runs.iter().all(|(_, r)| r.holds);
        let comm = runs.iter().map(|(_, r)| r.commutator).fold(0.0, f64::max);
        let margin = runs
            .iter()
            .map(|(_, r)| r.worst_margin)
            .fold(f64::NEG_INFINITY, f64::max);
        let pass = holds && comm <= C8_COMMUTATOR;
        report(
            8,
            outcome(
                pass,
                format!(
                    "{C8_RANDOM_STATES} random states x {C8_TIMES} times over {} regions; largest dynamical - static {margin:.2e} (slack {C8_SLACK:e}); commutator {comm:.1e} (tol {C8_COMMUTATOR:e})",
                    2 * offsets.len() + b_offsets.len()
                ),
            ),
        );
    }

    {
        let family = RegionFamily::new(BoundaryComponent::XPlus);
        let far = family.far_end(&step_grid);
        let sym_offsets = range(0.0, 2.0 * (0.5 * far).floor() - 2.0, 2.0);
        let decay = pos.symbol_vanishing_check(&family, &sym_offsets).unwrap();
        let ratio = decay.ratio();
        let cst = constant_scenario();
        let flat_p = problem(&cst, &PhaseGrid::new(101, 40.0).unwrap(), window(2.5, 3.5));
        let flat = flat_p.symbol_vanishing_check(&family, &range(0.0, 12.0, 2.0)).unwrap();
        let flat_dev = flat
            .values
            .iter()
            .map(|v| (v / flat.values[0] - 1.0).abs())
            .fold(0.0, f64::max);
        let pass = ratio <= C9_RATIO && flat_dev <= C9_FLAT && flat.values[0] > 0.5;
        report(
            9,
            outcome(
                pass,
                format!(
                    "step decay [{}] ratio {ratio:.2e} (tol {C9_RATIO}); constant control ratio {:.4}, max deviation {flat_dev:.1e} (tol {C9_FLAT})",
                    fmt_curve(&decay.values),
                    flat.ratio()
                ),
            ),
        );
    }

    report(10, criterion_10());

    let failed: Vec<usize> = results.iter().filter(|(_, o)| !o.pass).map(|(k, _)| *k).collect();
    if failed.is_empty() {
        println!("acceptance: all {} criteria pass", results.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failing criteria {failed:?}");
        ExitCode::FAILURE
    }
}

fn criterion_10() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("step.toml");
    std::fs::write(
        &config,
        "scenario = \"step\"\nseed = 17\n[grid]\nN = 121\nL = 40.0\n[energy_window]\nalpha = 0.3\nbeta = 0.7\n\
         [sweep]\ncomponent = \"x_plus\"\nrange = { start = 0.0, stop = 10.0, step = 2.0 }\n[propagation]\nrandom_states = 20\n",
    )
    .unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_weyl-lab"))
            .args(["sweep", "--quiet", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap();
        let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(&out)
            .unwrap()
            .map(|e| e.unwrap().path())
            .filter(|p| p.extension().is_some_and(|e| e == "csv"))
            .map(|p| {
                (
                    p.file_name().unwrap().to_string_lossy().into_owned(),
                    std::fs::read(&p).unwrap(),
                )
            })
            .collect();
        files.sort();
        (status.code(), files)
    };
    let (code_a, a) = run("a");
    let (code_b, b) = run("b");
    let pass = code_a == code_b && !a.is_empty() && a == b;
    let names: Vec<&str> = a.iter().map(|f| f.0.as_str()).collect();
    outcome(
        pass,
        format!(
            "{} CSV files across two runs byte-identical: {} ({})",
            a.len(),
            a == b,
            names.join(", ")
        ),
    )
}
