use std::path::Path;

use landau_core::cluster::{assemble_full, circle_average_range, cluster_rows, extract_cluster, two_route_check, TensorBasisSpec};
use landau_core::inverse::{forward_convolve, mellin_deconvolve, sobolev_norm_sq, LogGrid, Regularization, RingProfile, SobolevConvention};
use landau_core::potentials::{Potential, PotentialSpec};
use landau_core::radon::{circle_average, radon_via_fourier, spectral_invariant_i, PhasePoint};
use landau_core::reduced::{reduced_spectrum_with, symbol_residual_rate, szego_check, tail_truncation_check, Assembly, BasisRule, RateFit, TestFunction};
use landau_core::specfun::{edge_zero_check, laguerre_zeros, psi_shape, psi_table, zero_counting_sup_gap, SemiclassicalPoint};
use landau_core::weyl::matrix_to_csv;
use rayon::prelude::*;

use crate::args::*;
use crate::error::CliError;
use crate::output::{Artifact, Cell};

const CI_MAX_LEVEL: usize = 32;
const CI_MAX_BASIS: usize = 128;
const CI_MAX_TENSOR: usize = 16;
const CI_MAX_ORDER: usize = 32;
const CI_MAX_GRID: usize = 64;
const CI_MAX_POINTS: usize = 500;
const CI_MAX_AXIS: usize = 21;
const DESK_MAX_BASIS: usize = 6000;

/// What a command produced; a `failure` is reported after the artifact is written.
pub struct Outcome {
    pub artifact: Artifact,
    pub failure: Option<CliError>,
}

impl From<Artifact> for Outcome {
    fn from(artifact: Artifact) -> Self {
        Outcome { artifact, failure: None }
    }
}

fn load_potential(arg: &PotentialArg) -> Result<Potential, CliError> {
    match &arg.potential {
        None => Ok(Potential::unit_gaussian()),
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            Ok(PotentialSpec::from_json(&text)?.build()?)
        }
    }
}

fn cap(value: usize, preset: Preset, limit: usize) -> usize {
    match preset {
        Preset::Ci => value.min(limit),
        Preset::Desk => value,
    }
}

fn cap_levels(levels: &[usize], preset: Preset) -> Result<Vec<usize>, CliError> {
    let mut out: Vec<usize> = levels.iter().map(|&n| cap(n, preset, CI_MAX_LEVEL)).collect();
    out.dedup();
    if out.is_empty() {
        return Err(CliError::Config("empty level list".into()));
    }
    Ok(out)
}

fn basis_rule(text: &str, preset: Preset) -> Result<BasisRule, CliError> {
    let max = match preset {
        Preset::Ci => CI_MAX_BASIS,
        Preset::Desk => DESK_MAX_BASIS,
    };
    if text == "cover" {
        let BasisRule::Covering { min, tol, .. } = BasisRule::default() else { unreachable!() };
        return Ok(BasisRule::Covering { min, max, tol });
    }
    let size: usize = text.parse().map_err(|_| CliError::Config(format!("basis must be a size or 'cover', got '{text}'")))?;
    if size == 0 {
        return Err(CliError::Config("basis size must be positive".into()));
    }
    Ok(BasisRule::Fixed { size: size.min(max) })
}

pub fn run(command: &Command, preset: Preset, out: Option<&Path>) -> Result<Outcome, CliError> {
    match command {
        Command::Radon(a) => radon(a, preset),
        Command::Symbol(a) => symbol(a, preset),
        Command::ReducedSpectrum(a) => reduced(a, preset),
        Command::SzegoCheck(a) => szego(a, preset),
        Command::ClusterSpectrum(a) => cluster(a, preset),
        Command::TwoRoute(a) => two_route(a, preset, out),
        Command::Inverse(a) => inverse(a, preset),
        Command::Sobolev(a) => sobolev(a),
        Command::LaguerreZeros(a) => zeros(a, preset),
        Command::PsiFigure(a) => psi(a, preset),
    }
}

fn radon(a: &RadonArgs, preset: Preset) -> Result<Outcome, CliError> {
    let v = load_potential(&a.potential)?;
    let mut xs = parse_range(&a.x_range).map_err(CliError::Config)?;
    let mut ps = parse_range(&a.p_range).map_err(CliError::Config)?;
    if preset == Preset::Ci {
        xs = parse_range(&format!("{}:{}:{}", xs[0], xs[xs.len() - 1], xs.len().min(CI_MAX_AXIS))).map_err(CliError::Config)?;
        ps = parse_range(&format!("{}:{}:{}", ps[0], ps[ps.len() - 1], ps.len().min(CI_MAX_AXIS))).map_err(CliError::Config)?;
    }
    let points: Vec<(f64, f64)> = xs.iter().flat_map(|&x| ps.iter().map(move |&p| (x, p))).collect();
    let rows: Vec<(f64, f64, f64, Option<f64>)> = points
        .par_iter()
        .map(|&(x, p)| {
            let xi = PhasePoint::new(x, p);
            let value = circle_average(&v, xi, a.energy)?;
            let check = if a.verify { Some(radon_via_fourier(&v, xi.check(), (a.energy / 2.0).sqrt())?) } else { None };
            Ok((x, p, value, check))
        })
        .collect::<Result<_, landau_core::Error>>()?;
    let mut art = Artifact::new(if a.verify { vec!["x2", "p2", "circle_average", "fourier_route"] } else { vec!["x2", "p2", "circle_average"] });
    let mut worst: f64 = 0.0;
    for (x, p, value, check) in rows {
        let mut cells: Vec<Cell> = vec![x.into(), p.into(), value.into()];
        if let Some(c) = check {
            worst = worst.max((c - value).abs());
            cells.push(c.into());
        }
        art.row(cells);
    }
    art.note("energy", a.energy);
    art.note("radius", (a.energy / 2.0).sqrt());
    if a.verify {
        art.note("max_route_gap", worst);
    }
    Ok(art.into())
}

fn symbol(a: &SymbolArgs, preset: Preset) -> Result<Outcome, CliError> {
    let v = load_potential(&a.potential)?;
    let levels = cap_levels(&a.n_list, preset)?;
    let cols = if a.tail_cut.is_some() { vec!["x2", "p2", "n", "hbar", "phi", "circle_average", "residual", "tail"] } else { vec!["x2", "p2", "n", "hbar", "phi", "circle_average", "residual"] };
    let mut art = Artifact::new(cols);
    let mut slopes = Vec::new();
    for &(x, p) in &a.xi {
        let xi = PhasePoint::new(x, p);
        let target = circle_average(&v, xi, a.energy)?;
        let mut residuals = Vec::new();
        for &n in &levels {
            let pt = SemiclassicalPoint::new(a.energy, n)?;
            let phi = landau_core::reduced::reduced_symbol(&v, xi, &pt)?;
            residuals.push((phi - target).abs());
            let mut cells: Vec<Cell> = vec![x.into(), p.into(), n.into(), pt.hbar().into(), phi.into(), target.into(), (phi - target).abs().into()];
            if let Some(cut) = a.tail_cut {
                cells.push(tail_truncation_check(&v, xi, &pt, cut)?.into());
            }
            art.row(cells);
        }
        if levels.len() >= 4 {
            let rate = symbol_residual_rate(&v, xi, a.energy, &levels)?;
            slopes.push(match rate.fit {
                RateFit::Slope(s) => serde_json::json!({"xi": [x, p], "slope": s}),
                RateFit::Converged => serde_json::json!({"xi": [x, p], "slope": "converged"}),
            });
        }
    }
    art.note("energy", a.energy);
    art.note("levels", &levels);
    art.note("slopes", slopes);
    Ok(art.into())
}

fn assembly(a: AssemblyArg) -> Assembly {
    match a {
        AssemblyArg::Auto => Assembly::Auto,
        AssemblyArg::PhaseGrid => Assembly::PhaseGrid,
        AssemblyArg::Radial => Assembly::Radial,
    }
}

fn reduced(a: &ReducedArgs, preset: Preset) -> Result<Outcome, CliError> {
    let v = load_potential(&a.potential)?;
    let n = cap(a.n, preset, CI_MAX_LEVEL);
    let pt = SemiclassicalPoint::new(a.energy, n)?;
    let size = basis_rule(&a.basis, preset)?.size(&v, &pt);
    let spec = reduced_spectrum_with(&v, &pt, size, assembly(a.assembly))?;
    let mut art = Artifact::new(vec!["k", "eigenvalue"]);
    for (k, l) in spec.decreasing().into_iter().enumerate() {
        art.row(vec![k.into(), l.into()]);
    }
    art.note("energy", a.energy);
    art.note("n", n);
    art.note("hbar", pt.hbar());
    art.note("basis", size);
    art.note("assembly", &spec.meta.assembly);
    art.note("grid_order", spec.meta.grid_order);
    art.note("order", "decreasing");
    Ok(art.into())
}

fn szego(a: &SzegoArgs, preset: Preset) -> Result<Outcome, CliError> {
    let v = load_potential(&a.potential)?;
    let f: TestFunction = a.rho.parse()?;
    let levels = cap_levels(&a.n_list, preset)?;
    let rule = basis_rule(&a.basis, preset)?;
    let rows = szego_check(&v, a.energy, f, &levels, rule)?;
    let mut art = Artifact::new(vec!["n", "hbar", "basis", "trace_side", "integral_side", "gap"]);
    for r in &rows {
        art.row(vec![r.level.into(), r.hbar.into(), r.basis.into(), r.trace_side.into(), r.integral_side.into(), r.gap.into()]);
    }
    art.note("energy", a.energy);
    art.note("rho", f.to_string());
    art.note("basis_rule", rule);
    Ok(art.into())
}

fn tensor_setup(a: &ClusterArgs, preset: Preset) -> Result<(Potential, SemiclassicalPoint, TensorBasisSpec, usize), CliError> {
    let v = load_potential(&a.potential)?;
    let n1 = cap(a.n1, preset, CI_MAX_TENSOR);
    let n2 = cap(a.n2, preset, CI_MAX_TENSOR);
    let q = cap(a.q, preset, CI_MAX_ORDER);
    if a.n >= n1 {
        return Err(CliError::Config(format!("Landau index {} must be below N1 = {n1}", a.n)));
    }
    let pt = SemiclassicalPoint::new(a.energy, a.n)?;
    let spec = TensorBasisSpec::new(n1, n2, pt.hbar())?;
    Ok((v, pt, spec, q))
}

fn cluster(a: &ClusterArgs, preset: Preset) -> Result<Outcome, CliError> {
    let (v, pt, spec, q) = tensor_setup(a, preset)?;
    let full = assemble_full(&v, &pt, spec, q, a.mem_cap_mb << 20)?;
    let spectrum = full.spectrum()?;
    let cluster = extract_cluster(&spectrum, &pt, &spec)?;
    let mut art = Artifact::new(vec!["k", "eigenvalue", "scaled", "in_cluster"]);
    for (k, raw, scaled, inside) in cluster_rows(&spectrum, &pt) {
        art.row(vec![k.into(), raw.into(), scaled.into(), inside.into()]);
    }
    let (lo, hi) = circle_average_range(&v, a.energy, 121)?;
    art.note("energy", a.energy);
    art.note("n", a.n);
    art.note("hbar", pt.hbar());
    art.note("N1", spec.n1);
    art.note("N2", spec.n2);
    art.note("q", q);
    art.note("cluster_size", cluster.len());
    art.note("circle_average_range", [lo, hi]);
    art.note("memory_estimate_bytes", full.memory_estimate);
    art.note("hermitian_defect", full.hermitian_defect);
    Ok(art.into())
}

fn two_route(a: &TwoRouteArgs, preset: Preset, out: Option<&Path>) -> Result<Outcome, CliError> {
    let (v, pt, spec, q) = tensor_setup(&a.cluster, preset)?;
    if a.m > spec.n2 {
        return Err(CliError::Config(format!("M = {} exceeds N2 = {}", a.m, spec.n2)));
    }
    let full = assemble_full(&v, &pt, spec, q, a.cluster.mem_cap_mb << 20)?;
    let rep = two_route_check(&full, &v, &pt, a.m, a.top)?;
    let mut art = Artifact::new(vec!["k", "block", "reduced", "relative_gap"]);
    for (k, (b, r)) in rep.block_top.iter().zip(&rep.reduced_top).enumerate() {
        let scale = b.abs().max(r.abs());
        art.row(vec![k.into(), (*b).into(), (*r).into(), (if scale == 0.0 { 0.0 } else { (b - r).abs() / scale }).into()]);
    }
    art.note("energy", a.cluster.energy);
    art.note("n", a.cluster.n);
    art.note("M", a.m);
    art.note("q", q);
    art.note("max_entry_gap", rep.max_entry_gap);
    art.note("max_relative_top_gap", rep.max_relative_top_gap);
    art.note("flagged", rep.flagged);
    let mut failure = None;
    if rep.flagged {
        let header = [("matrix", "block".to_string())];
        art.extras.push((".block.csv".into(), matrix_to_csv(&rep.block, &header)));
        let header = [("matrix", "reduced".to_string())];
        art.extras.push((".reduced.csv".into(), matrix_to_csv(&rep.reduced, &header)));
        let dumped = if out.is_some() { "matrices dumped next to the output" } else { "pass --out to dump both matrices" };
        failure = Some(CliError::Flagged(format!("entry gap {:.3e} above tolerance; {dumped}", rep.max_entry_gap)));
    }
    Ok(Outcome { artifact: art, failure })
}

fn log_grid(text: &str, preset: Preset) -> Result<LogGrid, CliError> {
    let g: LogGrid = text.parse()?;
    Ok(LogGrid::new(g.rho_min, g.rho_max, cap(g.count, preset, CI_MAX_GRID))?)
}

fn inverse(a: &InverseArgs, preset: Preset) -> Result<Outcome, CliError> {
    let v = load_potential(&a.potential)?;
    let r = log_grid(&a.r_grid, preset)?.nodes();
    let grid = log_grid(&a.rho_grid, preset)?;
    let reg: Regularization = a.lambda.parse()?;
    let truth = RingProfile::of_potential(&v, grid)?;
    let data: Vec<f64> = match a.data {
        InverseData::Invariant => r.par_iter().map(|&x| spectral_invariant_i(&v, x)).collect::<Result<_, _>>()?,
        InverseData::Forward => forward_convolve(&truth, &r)?.values,
    };
    let dec = mellin_deconvolve(&r, &data, grid, reg)?;
    let rho = grid.nodes();
    let mut art = Artifact::new(vec!["rho", "w_true", "w_recovered"]);
    for k in 0..grid.count {
        art.row(vec![rho[k].into(), truth.values[k].into(), dec.profile.values[k].into()]);
    }
    art.note("r_grid", a.r_grid.as_str());
    art.note("rho_grid", grid.to_string());
    art.note("data", a.data);
    art.note("lambda", dec.lambda);
    art.note("residual", dec.residual);
    art.note("relative_residual", dec.relative_residual);
    art.note("discrepancy_reached", dec.discrepancy_reached);
    art.note("residual_flagged", dec.residual_flagged);
    art.note("clipped_fraction", dec.clipped_fraction);
    art.note("condition_number", if dec.condition_number.is_finite() { serde_json::json!(dec.condition_number) } else { serde_json::json!("inf") });
    art.note("ill_conditioned", dec.ill_conditioned);
    art.note("middle_half_relative_l2", landau_core::inverse::relative_l2(&dec.profile.values, &truth.values, grid.middle_half()));
    let mut samples = String::from("r,invariant\n");
    for (x, i) in r.iter().zip(&data) {
        samples.push_str(&format!("{x:?},{i:?}\n"));
    }
    art.extras.push((".data.csv".into(), samples));
    let mut path = String::from("lambda,residual,solution_norm\n");
    for p in &dec.path {
        path.push_str(&format!("{:?},{:?},{:?}\n", p.lambda, p.residual, p.solution_norm));
    }
    art.extras.push((".path.csv".into(), path));
    Ok(art.into())
}

fn sobolev(a: &SobolevArgs) -> Result<Outcome, CliError> {
    let v = load_potential(&a.potential)?;
    let convention: SobolevConvention = a.convention.parse()?;
    let mut art = Artifact::new(vec!["s", "norm_sq"]);
    let mut warnings = Vec::new();
    for &s in &a.s {
        let val = sobolev_norm_sq(&v, s, convention)?;
        if let Some(w) = val.warning {
            warnings.push(w);
        }
        art.row(vec![s.into(), val.norm_sq.into()]);
    }
    art.note("convention", convention);
    if !warnings.is_empty() {
        art.note("warnings", warnings);
    }
    Ok(art.into())
}

fn zeros(a: &ZerosArgs, preset: Preset) -> Result<Outcome, CliError> {
    let n = cap(a.n, preset, 100);
    if n == 0 {
        return Err(CliError::Config("n must be at least 1".into()));
    }
    let z = laguerre_zeros(n)?;
    let mut art = Artifact::new(vec!["k", "zero", "scaled"]);
    for (k, x) in z.zeros.iter().enumerate() {
        art.row(vec![(k + 1).into(), (*x).into(), (x / (4.0 * n as f64)).into()]);
    }
    art.note("n", n);
    art.note("first_zero_bound", 3.0 / (2 * n + 1) as f64);
    art.note("first_zero_within_bound", z.zero(1) <= 3.0 / (2 * n + 1) as f64);
    art.note("edge_residual_m1", edge_zero_check(n, 1)?);
    art.note("counting_sup_gap", zero_counting_sup_gap(&z, 4000));
    Ok(art.into())
}

fn psi(a: &PsiArgs, preset: Preset) -> Result<Outcome, CliError> {
    let n = cap(a.n, preset, 100);
    let points = cap(a.points, preset, CI_MAX_POINTS);
    let pt = SemiclassicalPoint::new(a.energy, n)?;
    let table = psi_table(&pt, a.u_max, points)?;
    let shape = psi_shape(&pt, a.u_max, 20000)?;
    let mut art = Artifact::new(vec!["u", "psi"]);
    for (u, p) in table {
        art.row(vec![u.into(), p.into()]);
    }
    art.note("n", n);
    art.note("energy", a.energy);
    art.note("hbar", pt.hbar());
    art.note("zeros_in_range", shape.zeros.len());
    art.note("largest_zero", shape.zeros.last().copied());
    art.note("last_critical", shape.last_critical);
    Ok(art.into())
}
