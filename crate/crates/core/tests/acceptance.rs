//! Acceptance suite. Each test prints one `criterion N: PASS|FAIL` line with
//! the measured quantities and wall time, then asserts.

use std::f64::consts::PI;
use std::time::Instant;

use landau_core::cluster::{assemble_full, circle_average_range, extract_cluster, two_route_check, TensorBasisSpec, DEFAULT_MEMORY_CAP};
use landau_core::inverse::{forward_convolve, isospectral_compare, mellin_deconvolve, relative_l2, LogGrid, Regularization, RingProfile, DEFAULT_NOISE_FLOOR};
use landau_core::potentials::{make_mixture, GaussianSpec, Potential};
use landau_core::radon::{circle_average, spectral_invariant_checked, PhasePoint};
use landau_core::reduced::{reduced_symbol, szego_check, BasisRule, TestFunction};
use landau_core::specfun::{edge_zero_check, laguerre_zeros, psi_shape, psi_table, zero_counting_sup_gap, SemiclassicalPoint};
use landau_core::weyl::{loglog_slope, radial_eigenvalue, radial_eigenvalue_limit_check, RadialSymbol};

fn report(id: u32, pass: bool, detail: &str, started: Instant, budget_s: f64) -> bool {
    let secs = started.elapsed().as_secs_f64();
    let within = secs <= budget_s;
    println!(
        "criterion {id}: {} | {detail} | {secs:.2} s (budget {budget_s} s{})",
        if pass && within { "PASS" } else { "FAIL" },
        if within { "" } else { ", exceeded" }
    );
    pass && within
}

fn peak_rss_mb() -> Option<f64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: f64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb / 1024.0)
}

#[test]
fn criterion_1_radial_quantization_identities() {
    let t0 = Instant::now();
    let one = RadialSymbol::constant(1.0);
    let osc = RadialSymbol::oscillator();
    let gauss = RadialSymbol::gaussian(1.0, 1.0);
    let (mut worst_one, mut worst_osc, mut worst_gauss) = (0.0f64, 0.0f64, 0.0f64);
    for n in 0..=128usize {
        let pt = SemiclassicalPoint::new(3.0, n).unwrap();
        let h = pt.hbar();
        worst_one = worst_one.max((radial_eigenvalue(&one, n, h).unwrap() - 1.0).abs());
        let want = h * (2 * n + 1) as f64;
        worst_osc = worst_osc.max(((radial_eigenvalue(&osc, n, h).unwrap() - want) / want).abs());
        let want = (1.0 - h).powi(n as i32) / (1.0 + h).powi(n as i32 + 1);
        let got = radial_eigenvalue(&gauss, n, h).unwrap();
        // At n = 1 (hbar = 1) the exact value is 0, where only an absolute error is defined.
        let err = if want == 0.0 { got.abs() } else { ((got - want) / want).abs() };
        worst_gauss = worst_gauss.max(err);
    }
    let pass = worst_one <= 1e-10 && worst_osc <= 1e-8 && worst_gauss <= 1e-8;
    let detail = format!("n<=128, E=3: |1 - l_n| max {worst_one:.2e} (<=1e-10), r^2 rel {worst_osc:.2e} (<=1e-8), e^-r^2 rel {worst_gauss:.2e} (<=1e-8)");
    assert!(report(1, pass, &detail, t0, 10.0));
}

#[test]
fn criterion_2_symbol_convergence_rate() {
    let t0 = Instant::now();
    let g = Potential::unit_gaussian();
    let levels = [8usize, 16, 32, 64, 128];
    let mut parts = Vec::new();
    let mut pass = true;
    for xi in [PhasePoint::new(0.0, 0.0), PhasePoint::new(1.0, 0.0), PhasePoint::new(0.0, 1.5)] {
        let target = circle_average(&g, xi, 3.0).unwrap();
        let mut hbars = Vec::new();
        let mut res = Vec::new();
        for &n in &levels {
            let pt = SemiclassicalPoint::new(3.0, n).unwrap();
            hbars.push(pt.hbar());
            res.push((reduced_symbol(&g, xi, &pt).unwrap() - target).abs());
        }
        let slope = loglog_slope(&hbars, &res);
        let ok = (1.7..=2.3).contains(&slope);
        pass &= ok;
        parts.push(format!("xi=({},{}) slope {slope:.3} res {:.2e}..{:.2e}{}", xi.x2, xi.p2, res[0], res[4], if ok { "" } else { " OUT" }));
    }
    let detail = format!("slope in [1.7, 2.3]: {}", parts.join("; "));
    assert!(report(2, pass, &detail, t0, 60.0));
}

fn szego_gaps_ok(gaps: &[f64]) -> bool {
    gaps.windows(2).all(|w| w[1] < w[0]) && gaps[3] <= 0.25 * gaps[0]
}

#[test]
fn criterion_3_szego_limit() {
    let t0 = Instant::now();
    let g = Potential::unit_gaussian();
    let f = TestFunction::PolyBump { k: 2, half_width: 2.0 };
    let levels = [16usize, 32, 64, 128];
    let rows = szego_check(&g, 3.0, f, &levels, BasisRule::default()).unwrap();
    let gaps: Vec<f64> = rows.iter().map(|r| r.gap).collect();
    let bases: Vec<usize> = rows.iter().map(|r| r.basis).collect();
    let fixed = szego_check(&g, 3.0, f, &levels, BasisRule::Fixed { size: 64 }).unwrap();
    let fixed_gaps: Vec<f64> = fixed.iter().map(|r| r.gap).collect();
    let pass = szego_gaps_ok(&gaps);
    let detail = format!(
        "rho = t^2 bump(t/2), covering basis {bases:?}: gaps {} ratio {:.3} (<=0.25, monotone); fixed M=64 gaps {} ({})",
        gaps.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(" "),
        gaps[3] / gaps[0],
        fixed_gaps.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(" "),
        if szego_gaps_ok(&fixed_gaps) { "also passes" } else { "fails: basis does not cover the symbol at large n" }
    );
    assert!(report(3, pass, &detail, t0, 600.0));
}

#[test]
fn criterion_4_two_route_cluster() {
    let t0 = Instant::now();
    let g = Potential::unit_gaussian();
    let pt = SemiclassicalPoint::new(3.0, 6).unwrap();
    let spec = TensorBasisSpec::new(24, 24, pt.hbar()).unwrap();
    let full = assemble_full(&g, &pt, spec, 48, DEFAULT_MEMORY_CAP).unwrap();
    let report2 = two_route_check(&full, &g, &pt, 16, 10).unwrap();
    let spectrum = full.spectrum().unwrap();
    let cluster = extract_cluster(&spectrum, &pt, &spec).unwrap();
    let (lo, hi) = circle_average_range(&g, 3.0, 201).unwrap();
    let delta = 0.1 * (hi - lo);
    let outside = cluster.eigenvalues.iter().filter(|x| **x < lo - delta || **x > hi + delta).count();
    let pass = report2.max_relative_top_gap <= 1e-2 && outside == 0;
    let rss = peak_rss_mb().map(|m| format!("{m:.0} MB")).unwrap_or_else(|| "n/a".into());
    let detail = format!(
        "n=6 N1=N2=24 q=48 M=16: top-10 max rel gap {:.2e} (<=1e-2), entry gap {:.2e}; {} cluster values in [{:.3}, {:.3}], {outside} outside [{:.3}, {:.3}]; memory estimate {} MB, peak RSS {rss}",
        report2.max_relative_top_gap,
        report2.max_entry_gap,
        cluster.len(),
        cluster.eigenvalues[0],
        cluster.eigenvalues[cluster.len() - 1],
        lo - delta,
        hi + delta,
        full.memory_estimate >> 20
    );
    assert!(full.memory_estimate < 2 << 30);
    assert!(report(4, pass, &detail, t0, 900.0));
}

#[test]
fn criterion_5_laguerre_zero_laws() {
    let t0 = Instant::now();
    let mut bound_ok = true;
    let mut worst = f64::NEG_INFINITY;
    for n in 1..=200usize {
        let z = laguerre_zeros(n).unwrap();
        let slack = z.zero(1) - 3.0 / (2 * n + 1) as f64;
        worst = worst.max(slack);
        bound_ok &= slack <= 0.0;
    }
    let edge: Vec<f64> = [50usize, 100, 200].iter().map(|&n| edge_zero_check(n, 1).unwrap().abs()).collect();
    let edge_ok = edge[1] < edge[0] && edge[2] < edge[1];
    let gap = zero_counting_sup_gap(&laguerre_zeros(200).unwrap(), 4000);
    let pass = bound_ok && edge_ok && gap <= 0.02;
    let detail = format!(
        "max(l_n1 - 3/(2n+1)) over n<=200 = {worst:.3e} (<=0); |Airy residual| n=50,100,200: {:.3e} {:.3e} {:.3e}; CDF sup gap n=200 {gap:.4} (<=0.02)",
        edge[0], edge[1], edge[2]
    );
    assert!(report(5, pass, &detail, t0, 60.0));
}

#[test]
fn criterion_6_psi_figure() {
    let t0 = Instant::now();
    let pt = SemiclassicalPoint::new(3.0, 100).unwrap();
    let shape = psi_shape(&pt, 5.0, 20000).unwrap();
    let table = psi_table(&pt, 5.0, 2000).unwrap();
    let out = std::env::temp_dir().join("landau-acceptance-psi100.csv");
    let mut csv = String::from("u,psi\n");
    for (u, p) in &table {
        csv.push_str(&format!("{u:.12e},{p:.17e}\n"));
    }
    std::fs::write(&out, csv).unwrap();
    let zeros_ok = shape.zeros.len() == 100 && shape.zeros.iter().all(|&z| z > 0.0 && z < 3.05);
    let last = shape.last_critical.unwrap();
    let pass = zeros_ok && last.is_local_max && table.len() == 2000;
    let detail = format!(
        "psi_100, E=3 on [0,5]: {} zeros, largest {:.4} (<3.05); last critical point u={:.4} value {:.4e} local max {}; curve written to {}",
        shape.zeros.len(),
        shape.zeros.last().copied().unwrap_or(f64::NAN),
        last.u,
        last.value,
        last.is_local_max,
        out.display()
    );
    assert!(report(6, pass, &detail, t0, 5.0));
}

#[test]
fn criterion_7_weak_delta_rate() {
    let t0 = Instant::now();
    let rho = RadialSymbol::gaussian(1.0, 1.0);
    let levels = [16usize, 32, 64, 128, 256];
    let check = radial_eigenvalue_limit_check(&rho, 3.0, &levels).unwrap();
    let slope = check.slope.unwrap();
    let pass = slope >= 0.9;
    let detail = format!(
        "rho=e^-r^2, n=16..256: residuals {} slope {slope:.3} (>=0.9)",
        check.residuals.iter().map(|x| format!("{:.3e}", x.abs())).collect::<Vec<_>>().join(" ")
    );
    assert!(report(7, pass, &detail, t0, 30.0));
}

#[test]
fn criterion_8_inverse_pipeline() {
    let t0 = Instant::now();
    let g = Potential::unit_gaussian();
    let mut two_route = Vec::new();
    for r in [0.5, 1.0, 2.0] {
        two_route.push(spectral_invariant_checked(&g, r).unwrap().relative_gap);
    }
    let two_route_ok = two_route.iter().all(|x| *x <= 1e-6);

    let grid = LogGrid::new(0.05, 2e5, 240).unwrap();
    let r = grid.nodes();
    let truth = RingProfile::unit_gaussian(grid);
    let data = forward_convolve(&truth, &r).unwrap().values;
    let dec = mellin_deconvolve(&r, &data, grid, Regularization::Auto { noise_floor: DEFAULT_NOISE_FLOOR }).unwrap();
    let round_trip = relative_l2(&dec.profile.values, &truth.values, grid.middle_half());
    let round_trip_ok = round_trip <= 0.03;

    let v = make_mixture(&[
        GaussianSpec { center: [0.3, -0.2], inverse_width: 1.0, amplitude: 1.0 },
        GaussianSpec { center: [-0.5, 0.4], inverse_width: 2.0, amplitude: 0.5 },
    ])
    .unwrap();
    let radii = [0.5, 1.0, 2.0];
    let s_list = [-2.0, -1.0, 0.0, 1.0, 2.0];
    let rot = isospectral_compare(&v, &v.rotated(0.9), &radii, &s_list, 1e-8).unwrap();
    let tra = isospectral_compare(&v, &v.translated([1.1, -0.7]), &radii, &s_list, 1e-8).unwrap();
    let norm_gap = |rep: &landau_core::inverse::IsospectralReport| rep.sobolev.iter().map(|x| x.3).fold(0.0f64, f64::max);
    let iso_ok = rot.i_isospectral && rot.norms_agree && tra.i_isospectral && tra.norms_agree;

    let pass = two_route_ok && round_trip_ok && iso_ok;
    let detail = format!(
        "I(r) two-route rel gaps {:.2e} {:.2e} {:.2e} (<=1e-6); round trip rel L2 {round_trip:.2e} (<=3e-2), clipped {:.1e}; rotation I gap {:.1e} norm gap {:.1e}; translation I gap {:.1e} norm gap {:.1e} (<=1e-8); sanity s=0 norm = 2pi^3 for unit Gaussian",
        two_route[0],
        two_route[1],
        two_route[2],
        dec.clipped_fraction,
        rot.max_relative_gap,
        norm_gap(&rot),
        tra.max_relative_gap,
        norm_gap(&tra),
    );
    let s0 = landau_core::inverse::sobolev_norm_sq(&g, 0.0, landau_core::inverse::SobolevConvention::Half).unwrap().norm_sq;
    assert!((s0 - 2.0 * PI.powi(3)).abs() < 1e-9 * s0);
    assert!(report(8, pass, &detail, t0, 120.0));
}
