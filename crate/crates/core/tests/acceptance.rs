//! Acceptance report: one PASS/FAIL line per criterion AC1 to AC10.
//!
//! A red criterion is reported with its measured values and does not fail the
//! test. Only internal errors (solver or oracle returning `Err`, malformed
//! report) panic. The report goes to the raw stdout handle, so it shows up even
//! when the harness captures output.

use std::io::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tvlab::banach::PNormSpace;
use tvlab::curvature::{check_level_set_minimality, compare_ball_residual, min_cut_geometric, CutProblem};
use tvlab::experiments::{
    converge_critical, counterexample_rows, curvature_annulus, projection_demo, radon_bounds, Config,
    CounterexampleParams,
};
use tvlab::grid::{
    ball_indicator, coarea_check, level_set, perimeter, total_variation, Boundary, Grid, IndicatorSet, PerimeterMode,
    ScalarField,
};
use tvlab::oracles::{
    annulus_curvature, lambda_sweep_radial, rof_ball_solution, HeightConvention, RadialSet, SweepOptions,
};
use tvlab::solver::{solve_multilevel, ProblemSpec, SolveOptions};

fn emit(line: &str) {
    let mut out = std::io::stdout().lock();
    writeln!(out, "{line}").expect("write report");
    out.flush().expect("flush report");
}

struct Report {
    lines: Vec<String>,
}

impl Report {
    fn criterion(&mut self, id: &str, pass: bool, summary: String, details: Vec<String>) {
        let line = format!("{id} {}: {summary}", if pass { "PASS" } else { "FAIL" });
        emit(&line);
        for d in &details {
            emit(&format!("    {d}"));
        }
        self.lines.push(line);
    }
}

fn ac1(rep: &mut Report) {
    let start = Instant::now();
    let params = CounterexampleParams { force_numeric: true, keep_fields: false, ..Default::default() };
    let rows = counterexample_rows(&params).expect("counterexample rows");
    let secs = start.elapsed().as_secs_f64();
    let mut pass = secs <= 900.0;
    let mut details = Vec::new();
    let (mut dev_first, mut dev_printed) = (0.0f64, 0.0f64);
    for row in &rows {
        let s = &row.schedule;
        let (bn, sn) = (row.b_numeric.expect("numeric row"), row.s_numeric.expect("numeric row"));
        let dh = row.hausdorff.expect("numeric row");
        let fo = (bn - s.b).abs().max((sn - s.s).abs());
        let pr = (bn - s.b_printed).abs().max((sn - s.s_printed).abs());
        dev_first = dev_first.max(fo);
        dev_printed = dev_printed.max(pr);
        let ok = fo <= 0.03 && row.verdict.ok && dh >= 1.5;
        pass &= ok;
        details.push(format!(
            "n={} α={:.4} ‖w‖={:.4} (grid {:.4}) b: numeric {bn:.4} first-order {:.4} printed {:.4} | s: numeric {sn:.4} first-order {:.4} printed {:.4} | d_H={dh:.3} rule ‖w‖/α={:.3} vs {:.3} ok={} gap={:.1e} r/h={:.2}",
            s.n,
            s.alpha,
            s.w_norm,
            row.w_norm_grid,
            s.b,
            s.b_printed,
            s.s,
            s.s_printed,
            row.verdict.lhs,
            row.verdict.rhs,
            row.verdict.ok,
            row.gap.unwrap_or(f64::NAN),
            s.r / params.h,
        ));
    }
    let closer = if dev_first < dev_printed { "first-order (1 − 3α/r)" } else { "halved (1 − 3α/(2r))" };
    details.push(format!(
        "erratum: largest numeric deviation {dev_first:.4} from first-order heights, {dev_printed:.4} from printed heights; the solver sides with the {closer} shrinkage"
    ));
    details.push(format!("runtime {secs:.0}s (limit 900s)"));
    details.push(
        "rows with r_n < 4h are solved anyway; isotropic forward differences overestimate digital sphere perimeters, which lowers plateau heights on small balls"
            .into(),
    );
    rep.criterion(
        "AC1",
        pass,
        "3D counterexample n=1..3, tolerance 0.03 on heights, d_H ≥ 1.5, rule passes".into(),
        details,
    );
}

fn ac2(rep: &mut Report) {
    let start = Instant::now();
    let h = 1.0 / 32.0;
    let grid = Grid::covering(&[-2.0, -2.0], &[2.0, 2.0], h).expect("grid");
    let f = ScalarField::from_indicator(&ball_indicator(&grid, &[0.0, 0.0], 1.0).expect("disc"), 1.0);
    let mut pass = true;
    let mut details = Vec::new();
    for alpha in [0.1, 0.2, 0.4] {
        let spec =
            ProblemSpec::denoising(&f, None, alpha, PerimeterMode::isotropic(Boundary::Dirichlet)).expect("spec");
        let sol = solve_multilevel(&spec, SolveOptions::with_tol(1e-8), 2).expect("solve");
        let oracle = rof_ball_solution(2, 1.0, 1.0, alpha, HeightConvention::FirstOrder).expect("oracle");
        let height = sol.u.max();
        let rel = (height - oracle).abs() / oracle;
        let ok = rel <= 0.02 && sol.relative_gap() <= 1e-8;
        pass &= ok;
        details.push(format!(
            "α={alpha}: height {height:.5} oracle {oracle:.5} relative error {:.2}% gap {:.2e} (relative {:.2e}) iterations {}",
            100.0 * rel,
            sol.gap,
            sol.relative_gap(),
            sol.iterations
        ));
    }
    let secs = start.elapsed().as_secs_f64();
    pass &= secs <= 60.0;
    details.push(format!("runtime {secs:.1}s (limit 60s)"));
    details.push(
        "the forward-difference isotropic TV measures a digitized circle about 16% longer than 2πR, so the numeric shrinkage exceeds 2α; the excess grows with α"
            .into(),
    );
    rep.criterion("AC2", pass, "single disc heights within 2% of (1 − 2α)^+ at h = 1/32".into(), details);
}

fn ac3(rep: &mut Report) {
    let cfg = Config::default();
    let r = converge_critical(&cfg, 0).expect("converge-critical");
    let rule_ok = r.result.rows.iter().all(|row| row.verdict.ok);
    let pass = rule_ok && r.monotone() && r.final_ok() && r.density_floor() >= 0.05;
    let mut details: Vec<String> = r
        .result
        .rows
        .iter()
        .zip(&r.density)
        .map(|(row, dens)| {
            format!(
                "α={:.5} ‖w‖/α={:.3} d_H={:?} density={dens:.3} support={:.3} L¹={:.4}",
                row.alpha,
                row.w_norm / row.alpha,
                row.hausdorff,
                row.support_radius,
                row.l1_error
            )
        })
        .collect();
    details.push(format!(
        "largest increase {:.4} (slack {:.4}), final {:.4} (bound {:.4}), density floor {:.3}",
        r.max_increase,
        2.0 * r.h,
        r.final_hausdorff,
        3.0 * r.h,
        r.density_floor()
    ));
    rep.criterion("AC3", pass, "critical-case level sets converge in Hausdorff distance".into(), details);
}

fn ac4(rep: &mut Report) {
    let (r1, r2) = (0.5, 1.5);
    let exact = annulus_curvature(r1, r2).expect("oracle");
    let set = RadialSet::annulus(2, vec![0.0, 0.0], r1, r2).expect("annulus");
    let lambdas: Vec<f64> = (1..=80).map(|k| 0.05 * k as f64).collect();
    let sweep = lambda_sweep_radial(&set, &|_| 1.0, &lambdas, &[r1, 1.0, r2], SweepOptions::default()).expect("sweep");
    let transition = sweep.transition.unwrap_or(f64::NAN);
    let radial_err = (transition - exact).abs();
    let closed = 2.0 * (r1 + r2) / (r2 * r2 - r1 * r1);
    let grid = curvature_annulus(&Config::default()).expect("grid sweep");
    let grid_err = grid.relative_error();
    let pass = radial_err <= 1e-8 && (exact - closed).abs() <= 1e-12 && grid_err <= 0.1;
    rep.criterion(
        "AC4",
        pass,
        "annulus curvature: radial transition to 1e-8, grid sweep within 10%".into(),
        vec![
            format!("radial transition {transition:.12} vs 2(r1+r2)/(r2²−r1²) = {closed:.12}, error {radial_err:.2e}"),
            format!(
                "grid sweep at (r2−r1)/h = {:.0}: κ mean {:.4} range [{:.4}, {:.4}] vs {exact:.4}, relative error {:.1}%, unassigned {}",
                (grid.r2 - grid.r1) / grid.h,
                grid.kappa_mean,
                grid.kappa_min,
                grid.kappa_max,
                100.0 * grid_err,
                grid.unassigned
            ),
            "min-cut perimeters are anisotropic: a digitized circle of radius r has ℓ¹ perimeter 8r, a factor 4/π over 2πr, which the curvature inherits".into(),
        ],
    );
}

fn random_field(rng: &mut ChaCha8Rng, grid: &Grid, levels: i32) -> ScalarField {
    let vals = (0..grid.len())
        .map(|_| rng.random_range(-levels..=levels) as f64 * 0.25 + rng.random_range(-0.1..0.1))
        .collect();
    ScalarField::new(grid.clone(), vals).expect("field")
}

fn ac5(rep: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let shapes: [Vec<usize>; 3] = [vec![9, 7], vec![5, 4, 6], vec![13]];
    let boundaries = [Boundary::Dirichlet, Boundary::Neumann, Boundary::Periodic];
    let (mut coarea_worst, mut sub_worst) = (0.0f64, f64::NEG_INFINITY);
    for k in 0..1000 {
        let shape = shapes[k % 3].clone();
        let boundary = boundaries[(k / 3) % 3];
        let grid = Grid::new(shape, rng.random_range(0.1..1.0), vec![0.0; shapes[k % 3].len()]).expect("grid");
        let u = random_field(&mut rng, &grid, 4);
        let c = coarea_check(&u, boundary);
        coarea_worst = coarea_worst.max(c.gap.abs() / c.tv.abs().max(1e-300));
        let mode = PerimeterMode::anisotropic(boundary);
        let e = IndicatorSet::new(grid.clone(), (0..grid.len()).map(|_| rng.random_bool(0.5)).collect()).expect("set");
        let f = IndicatorSet::new(grid.clone(), (0..grid.len()).map(|_| rng.random_bool(0.5)).collect()).expect("set");
        let lhs = perimeter(&e.union(&f).unwrap(), mode) + perimeter(&e.intersection(&f).unwrap(), mode);
        let rhs = perimeter(&e, mode) + perimeter(&f, mode);
        sub_worst = sub_worst.max((lhs - rhs) / rhs.max(1e-300));
    }
    let pass = coarea_worst <= 1e-10 && sub_worst <= 1e-10;
    rep.criterion(
        "AC5",
        pass,
        "coarea exactness and submodularity over 1000 random instances".into(),
        vec![format!(
            "worst relative coarea gap {coarea_worst:.2e}, worst relative submodularity excess {sub_worst:.2e}"
        )],
    );
}

fn ac6(rep: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let grid = Grid::new(vec![4, 4], 1.0, vec![0.0, 0.0]).expect("grid");
    let mut mismatches = 0;
    let mut worst = 0.0f64;
    for k in 0..50 {
        let boundary = [Boundary::Dirichlet, Boundary::Neumann, Boundary::Periodic][k % 3];
        let g = ScalarField::new(grid.clone(), (0..16).map(|_| rng.random_range(-5.0..5.0)).collect()).expect("g");
        let prob = CutProblem::new(g, boundary);
        let cut = min_cut_geometric(&prob).expect("cut");
        let mut best = f64::INFINITY;
        for mask in 0u32..(1 << 16) {
            let set = IndicatorSet::new(grid.clone(), (0..16).map(|i| mask >> i & 1 == 1).collect()).expect("set");
            best = best.min(prob.energy(&set).expect("energy"));
        }
        let attained = prob.energy(&cut.set).expect("energy");
        let err = (cut.energy - best).abs().max((attained - best).abs());
        worst = worst.max(err);
        if err > 1e-9 * (1.0 + best.abs()) {
            mismatches += 1;
        }
    }
    rep.criterion(
        "AC6",
        mismatches == 0,
        "min-cut equals brute force over all 2^16 subsets of a 4×4 grid, 50 fields".into(),
        vec![format!("{mismatches} mismatches, worst energy difference {worst:.2e}")],
    );
}

fn ac7(rep: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    let mut details = Vec::new();
    for p in [1.2, 1.5, 2.0, 3.0, 6.0] {
        let mut worst_p = 0.0f64;
        for _ in 0..1000 {
            let n = rng.random_range(1..12);
            let weights: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..2.0)).collect();
            let space = PNormSpace::new(p, weights).expect("space");
            let dual = space.dual();
            let g: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
            let j = space.duality_map(&g).expect("j");
            let norm = space.norm(&g);
            let back = space.inverse_duality_map(&j).expect("j inverse");
            let scale = 1.0 + norm;
            let errs = [
                (space.pairing(&j, &g) - norm * norm).abs() / (scale * scale),
                (dual.norm(&j) - norm).abs() / scale,
                g.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale,
            ];
            worst_p = errs.iter().copied().fold(worst_p, f64::max);
        }
        details.push(format!("p={p}: worst relative error {worst_p:.2e}"));
        worst = worst.max(worst_p);
    }
    rep.criterion(
        "AC7",
        worst <= 1e-11,
        "duality maps: ⟨j(g), g⟩ = ‖g‖², ‖j(g)‖_* = ‖g‖, j⁻¹(j(g)) = g, 1000 vectors per p".into(),
        details,
    );
}

fn ac8(rep: &mut Report) {
    let cfg = Config::parse("pairs = 1000\nstability_pairs = 1000").expect("config");
    let r = projection_demo(&cfg, 8).expect("projection demo");
    let ratio = r.max_hilbert_ratio();
    let excess = r.max_stability_excess();
    rep.criterion(
        "AC8",
        ratio <= 1.0 + 1e-9 && excess <= 1e-6,
        "Hilbert projection nonexpansive, ℓ^3 stability bound with sampled modulus".into(),
        vec![
            format!("max expansion ratio {ratio:.12} over {} pairs", r.hilbert.len()),
            format!(
                "max ‖π(g1) − π(g2)‖ − ρ(½‖g1 − g2‖) = {excess:.3e} over {} pairs, sampled modulus power type {:.3} (stable {})",
                r.stability.len(),
                r.stability_exponent,
                r.modulus.is_stable()
            ),
        ],
    );
}

fn ac9(rep: &mut Report) {
    let r = radon_bounds(&Config::default()).expect("radon bounds");
    let mut pass = (r.exponent + 0.5).abs() <= 0.1;
    let mut details =
        vec![format!("fitted exponent {:.4} (target −0.5 ± 0.1), prefactor {:.4}", r.exponent, r.prefactor)];
    for (m, rel) in r.rows.iter().zip(&r.refinement) {
        let kappa_exact = m.kappa_annulus == 2.0 / m.n;
        pass &= kappa_exact && *rel < 0.01 && (m.n < 8.0 || m.margin > 0.0);
        details.push(format!(
            "n={}: (1/α)I₁z lower {:.5} κ={} (exact {kappa_exact}) margin {:.5} refinement change {:.3}%",
            m.n,
            m.riesz_lower,
            m.kappa_annulus,
            m.margin,
            100.0 * rel
        ));
    }
    rep.criterion("AC9", pass, "Radon counterexample quantities".into(), details);
}

fn ac10(rep: &mut Report) {
    let h = 1.0 / 16.0;
    let grid = Grid::covering(&[-1.5, -1.5], &[1.5, 1.5], h).expect("grid");
    let disc = ScalarField::from_indicator(&ball_indicator(&grid, &[0.2, -0.1], 0.8).expect("disc"), 1.0);
    let square = ScalarField::from_fn(grid.clone(), |x| if x[0].abs() < 0.7 && x[1].abs() < 0.5 { 2.0 } else { 0.0 })
        .expect("square");
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let noisy =
        ScalarField::new(grid.clone(), disc.values().iter().map(|v| v + 0.2 * rng.random_range(-1.0..1.0)).collect())
            .expect("noisy");
    let mut pass = true;
    let mut details = Vec::new();
    let mut count = 0;
    for (name, f) in [("disc", &disc), ("rectangle", &square), ("noisy disc", &noisy)] {
        for boundary in [Boundary::Dirichlet, Boundary::Neumann] {
            for alpha in [0.05, 0.2] {
                let mode = PerimeterMode::anisotropic(boundary);
                let spec = ProblemSpec::denoising(f, None, alpha, mode).expect("spec");
                let sol = solve_multilevel(&spec, SolveOptions::with_tol(1e-9), 2).expect("solve");
                if sol.relative_gap() > 1e-8 {
                    pass = false;
                    details.push(format!("{name} {boundary} α={alpha}: gap {:.2e} above 1e-8", sol.relative_gap()));
                    continue;
                }
                let (lo, hi) = (sol.u.min(), sol.u.max());
                let thresholds: Vec<f64> = (1..10).map(|k| lo + (hi - lo) * k as f64 / 10.0).collect();
                let check = check_level_set_minimality(&sol.u, &sol.v, &thresholds, boundary).expect("certificate");
                let scale = 1.0 + total_variation(&sol.u, mode) / (hi - lo).max(1e-12);
                let mut ball_worst = f64::NEG_INFINITY;
                for &s in thresholds.iter().filter(|s| **s >= 0.0) {
                    let set = level_set(&sol.u, s);
                    for _ in 0..20 {
                        let c = [rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5)];
                        let r = rng.random_range(2.0 * h..1.0);
                        ball_worst =
                            ball_worst.max(compare_ball_residual(&set, &sol.v, &c, r, boundary).expect("ball"));
                    }
                }
                let ok = check.max_violation() <= 1e-6 * scale && ball_worst <= 1e-6 * scale;
                pass &= ok;
                count += 1;
                details.push(format!(
                    "{name} {boundary} α={alpha}: gap {:.1e} level-set violation {:.2e} ball residual {:.2e} scale {:.2}{}",
                    sol.relative_gap(),
                    check.max_violation(),
                    ball_worst,
                    scale,
                    if ok { "" } else { " FAIL" }
                ));
            }
        }
    }
    rep.criterion(
        "AC10",
        pass,
        format!("{count} anisotropic solves certified by min-cut and ball comparison"),
        details,
    );
}

type Check = (&'static str, fn(&mut Report));

#[test]
fn acceptance_report() {
    let mut rep = Report { lines: Vec::new() };
    let checks: [Check; 10] = [
        ("AC1", ac1),
        ("AC2", ac2),
        ("AC3", ac3),
        ("AC4", ac4),
        ("AC5", ac5),
        ("AC6", ac6),
        ("AC7", ac7),
        ("AC8", ac8),
        ("AC9", ac9),
        ("AC10", ac10),
    ];
    let skip: Vec<String> = std::env::var("TVLAB_ACCEPTANCE_SKIP")
        .map(|s| s.split(',').map(|x| x.trim().to_string()).collect())
        .unwrap_or_default();
    emit("");
    for (id, check) in checks {
        if skip.iter().any(|s| s == id) {
            emit(&format!("{id} SKIPPED"));
            rep.lines.push(format!("{id} SKIPPED"));
            continue;
        }
        check(&mut rep);
    }
    let passed = rep.lines.iter().filter(|l| l.contains(" PASS:")).count();
    emit(&format!("acceptance: {passed}/10 criteria pass"));
    assert_eq!(rep.lines.len(), 10, "every criterion reports exactly once");
}
