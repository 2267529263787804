use std::f64::consts::PI;

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use nccover::action::{
    canonical_map_matrix, full_matrix_algebra, random_action, solve_canonical, Automorphism, CanonicalOutcome, FiniteGroup,
    GroupAction, StarAlgebra,
};
use nccover::circle;
use nccover::connections::{self, FramedModule};
use nccover::dixmier::{self, SingularSeries};
use nccover::frames::{self, BaseRep, RiggedFrameReport, FRAME_TOL, ORTH_TOL};
use nccover::linalg::{self, diag_real, identity, random, DenseMatrix, C64};
use nccover::torus::{self, ModeLattice, TorusElement};

use crate::config::{ensure, Params};
use crate::error::{CliError, Context};
use crate::report::ExperimentReport;

pub const DEFAULT_SEED: u64 = 20240917;

type Outcome = Result<ExperimentReport, CliError>;

fn rng(p: &Params) -> (u64, ChaCha8Rng) {
    let seed = p.seed.unwrap_or(DEFAULT_SEED);
    (seed, ChaCha8Rng::seed_from_u64(seed))
}

fn frame_checks(r: &mut ExperimentReport, prefix: &str, f: &RiggedFrameReport) {
    r.check_max(&format!("{prefix}residual_1mb"), f.residual_1mb, FRAME_TOL);
    r.check_max(&format!("{prefix}residual_1mkx"), f.residual_1mkx, FRAME_TOL);
    r.check_max(&format!("{prefix}residual_eexx"), f.residual_eexx, FRAME_TOL);
    r.check_max(&format!("{prefix}residual_gort"), f.residual_gort, FRAME_TOL);
}

/// Base unitary for root extensions: the q-point clock rotated off the branch cut.
fn rotated_clock(q: usize) -> nccover::Result<DenseMatrix> {
    Ok(torus::clock_shift(q, 1)?.u * C64::from_polar(1.0, 0.1))
}

pub fn bumps(p: &Params) -> Outcome {
    let n = p.pick(&p.grid, 4096, 1024);
    let pair = circle::make_bumps(n).context("make_bumps")?;
    let mut r = ExperimentReport::new("bumps");
    r.param("grid", n);
    r.check_max("partition_residual", pair.partition_residual(), 1e-12);
    let step = 2.0 * PI / n as f64;
    let slope = (0..2)
        .flat_map(|i| {
            let s = &pair.get(i).samples;
            (0..n).map(move |k| (s[(k + 1) % n] - s[k]).norm() / step)
        })
        .fold(0.0, f64::max);
    r.estimate("max_slope", slope);
    let cutoff = ((n - 1) / 2).min(512);
    let coeffs = circle::fourier_of(&pair.b1, cutoff).context("fourier_of")?;
    let tail =
        coeffs.iter().enumerate().filter(|(k, _)| k.abs_diff(cutoff) >= cutoff / 2).map(|(_, c)| c.norm()).fold(0.0, f64::max);
    r.estimate("fourier_tail_max", tail);
    let rows = (0..n).map(|k| vec![circle::grid_angle(k, n), pair.b1.samples[k].re, pair.b2.samples[k].re]).collect();
    r.plot("bumps", &["phi", "b1", "b2"], rows);
    Ok(r)
}

pub fn line_partition(p: &Params) -> Outcome {
    let n = p.pick(&p.grid, 1024, 256);
    let w = p.pick(&p.window, 3, 2);
    let pair = circle::make_bumps(n).context("make_bumps")?;
    let mut r = ExperimentReport::new("line-partition");
    r.param("grid", n).param("window", w);
    r.check_max("line_partition_residual", circle::check_line_partition(&pair, w).context("check_line_partition")?, 1e-12);
    let frame = frames::check_line_frame(&pair, w).context("check_line_frame")?;
    frame_checks(&mut r, "line_frame_", &frame);
    let sum = circle::line_partition_sum(&pair, w).context("line_partition_sum")?;
    let rows = sum.samples.iter().enumerate().map(|(j, z)| vec![sum.point(j), z.re]).collect();
    r.plot("translate_sum", &["x", "sum"], rows);
    Ok(r)
}

pub fn circle_cover(p: &Params) -> Outcome {
    let n = p.pick(&p.grid, 1024, 256);
    let sheets = p.pick(&p.n, 3, 2);
    ensure(sheets >= 1, || "cover degree n must be at least 1".into())?;
    let pair = circle::make_bumps(n).context("make_bumps")?;
    let mut r = ExperimentReport::new("circle-cover");
    r.param("grid", n).param("n", sheets);
    r.check_max(
        "cover_partition_residual",
        circle::check_cover_partition(&pair, sheets).context("check_cover_partition")?,
        1e-12,
    );
    let lifts: Vec<_> = (0..sheets)
        .flat_map(|s| (0..2).map(move |i| (i, s)))
        .map(|(i, s)| circle::lift_to_cover(&pair, i, sheets, s))
        .collect::<nccover::Result<_>>()
        .context("lift_to_cover")?;
    let len = lifts.first().map_or(0, |f| f.len());
    let rows = (0..len).map(|j| {
        let mut row = vec![circle::grid_angle(j, len)];
        row.extend(lifts.iter().map(|f| f.samples[j].re));
        row
    });
    let header: Vec<String> = std::iter::once("psi".to_string())
        .chain((0..sheets).flat_map(|s| (1..=2).map(move |i| format!("b{i}_sheet{s}"))))
        .collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    r.plot("lifted_bumps", &header, rows.collect());
    Ok(r)
}

pub fn torus_cover(p: &Params) -> Outcome {
    let (m, n, k) = (p.m.unwrap_or(2), p.n.unwrap_or(2), p.k.unwrap_or(0));
    let theta = p.theta.unwrap_or(2.0);
    let grid = p.pick(&p.grid, 6, 4);
    ensure(m >= 1 && n >= 1, || "m and n must be positive".into())?;
    let cover = frames::torus_cover(m, n, k, theta, grid).context("torus_cover")?;
    let mut r = ExperimentReport::new("torus-cover");
    r.param("m", m).param("n", n).param("k", k).param("theta", theta).param("grid", grid);
    r.estimate("theta_cover", cover.theta_cover);
    r.estimate("commuting_regime", if cover.is_commuting_regime() { 1.0 } else { 0.0 });
    frame_checks(&mut r, "", &cover.report);
    r.estimate("base_dim", cover.base_dim as f64).estimate("fixed_point_dim", cover.fixed_point_dim as f64);
    r.check_true("fixed_point_dim_matches_base", cover.fixed_point_dim == cover.base_dim);
    r.check_max("fixed_point_residual", cover.fixed_point_residual, 1e-8);
    Ok(r)
}

pub fn torus_area(p: &Params) -> Outcome {
    let tau = C64::new(p.tau_re.unwrap_or(0.0), p.tau_im.unwrap_or(1.0));
    ensure(tau.im > 0.0, || "tau-im must be positive".into())?;
    let cutoff = p.pick(&p.cutoff, 400, 120);
    let series = dixmier::torus_series(tau, cutoff).context("torus_series")?;
    let est = dixmier::nc_integral(&series).context("nc_integral")?;
    let mut r = ExperimentReport::new("torus-area");
    r.param("tau_re", tau.re).param("tau_im", tau.im).param("cutoff", cutoff);
    let area = 2.0 * PI * est.slope;
    r.estimate("slope", est.slope).estimate("stderr", est.stderr).estimate("two_pi_slope", area);
    r.estimate("expected_area", 1.0 / tau.im).estimate("tau_tail", est.tau_tail);
    r.check_max("area_rel_error", (area * tau.im - 1.0).abs(), 0.02);
    r.plot("tau_curve", &["lambda", "tau"], est.tau_curve.iter().map(|&(l, t)| vec![l, t]).collect());
    Ok(r)
}

fn canonical_checks(r: &mut ExperimentReport, action: &GroupAction, expect_galois: bool) -> Result<(), CliError> {
    let outcome = solve_canonical(action).context("solve_canonical")?;
    let map = canonical_map_matrix(action).context("canonical_map_matrix")?;
    r.estimate("domain_dim", map.domain_dim as f64).estimate("codomain_dim", map.codomain_dim as f64);
    r.estimate("rank", map.rank as f64);
    match &outcome {
        CanonicalOutcome::Solved(s) => {
            r.estimate("pairs", s.pairs.len() as f64);
            r.check_max("solution_residual", s.unit_residual.max(s.orthogonality_residual), 1e-8);
        }
        CanonicalOutcome::Infeasible { residual } | CanonicalOutcome::Indeterminate { residual } => {
            r.estimate("least_squares_residual", *residual);
        }
    }
    r.check_true("solver_verdict_as_expected", outcome.is_solved() == expect_galois);
    r.check_true("infeasible_verdict_certified", expect_galois || matches!(outcome, CanonicalOutcome::Infeasible { .. }));
    r.check_true("rank_verdict_agrees", map.bijective == outcome.is_solved());
    Ok(())
}

/// Canonical-map checks on an action read from a document; Galois-ness is whatever the rank test says.
fn galois_check_file(r: &mut ExperimentReport, path: &std::path::Path) -> Result<(), CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read action {}: {e}", path.display())))?;
    let action =
        GroupAction::from_json(&text).map_err(|e| CliError::Config(format!("invalid action {}: {e}", path.display())))?;
    r.param("action", path.display().to_string());
    let bijective = canonical_map_matrix(&action).context("canonical_map_matrix")?.bijective;
    canonical_checks(r, &action, bijective)
}

pub fn galois_check(p: &Params) -> Outcome {
    let mut r = ExperimentReport::new("galois-check");
    if let Some(path) = &p.action {
        ensure(p.preset.is_none() && p.save_action.is_none(), || "--action replaces the preset".into())?;
        galois_check_file(&mut r, path)?;
        return Ok(r);
    }
    let preset = p.preset.clone().unwrap_or_else(|| "boring".into());
    r.param("preset", &preset);
    ensure(preset != "random" || p.save_action.is_none(), || "--save-action needs a single-instance preset".into())?;
    let single = match preset.as_str() {
        "boring" | "smoke" => {
            let group = FiniteGroup::parse(p.group.as_deref().unwrap_or("Z3")).context("group")?;
            let d = p.dim.unwrap_or(if preset == "smoke" { 1 } else { 2 });
            ensure((1..=4).contains(&d), || "dim must be in 1..=4".into())?;
            r.param("group", p.group.as_deref().unwrap_or("Z3")).param("dim", d);
            let frame = frames::boring_frame(&group, d).context("boring_frame")?;
            frame_checks(&mut r, "frame_", &frames::check_frame(&frame));
            canonical_checks(&mut r, &frame.action, true)?;
            Some(frame.action)
        }
        "conjugation" => {
            let action = GroupAction::new(
                FiniteGroup::cyclic(2),
                full_matrix_algebra(2),
                vec![Automorphism::identity_permutation(2), Automorphism::Unitary(diag_real(&[1.0, -1.0]))],
            )
            .context("conjugation action")?;
            canonical_checks(&mut r, &action, true)?;
            Some(action)
        }
        "trivial" => {
            let scalars = StarAlgebra::from_spanning(1, &[identity(1)]).context("scalars")?;
            let action = GroupAction::trivial(FiniteGroup::cyclic(2), scalars);
            canonical_checks(&mut r, &action, false)?;
            Some(action)
        }
        "random" => {
            let count = p.count.unwrap_or(50);
            let (seed, mut rng) = rng(p);
            r.param("count", count).param("seed", seed);
            let (mut agree, mut galois) = (0, 0);
            for _ in 0..count {
                let (action, free) = random_action(&mut rng).context("random_action")?;
                let solved = solve_canonical(&action).context("solve_canonical")?.is_solved();
                let bijective = canonical_map_matrix(&action).context("canonical_map_matrix")?.bijective;
                agree += usize::from(solved == bijective && bijective == free);
                galois += usize::from(free);
            }
            r.estimate("galois_instances", galois as f64);
            r.check_min("agreeing_instances", agree as f64, count as f64);
            None
        }
        other => return Err(CliError::Config(format!("unknown galois-check preset '{other}'"))),
    };
    if let Some(path) = &p.save_action {
        if let Some(action) = single {
            std::fs::write(path, action.to_json() + "\n")?;
        }
    }
    Ok(r)
}

pub fn vn_orth(p: &Params) -> Outcome {
    let dim = p.pick(&p.dim, 8, 8);
    let parts = p.pick(&p.parts, 3, 3);
    let count = p.pick(&p.count, 100, 10);
    ensure(dim >= 1 && parts >= 1, || "dim and parts must be positive".into())?;
    let (seed, mut rng) = rng(p);
    let mut r = ExperimentReport::new("vn-orth");
    r.param("dim", dim).param("parts", parts).param("count", count).param("seed", seed);
    let (mut sum, mut orth, mut range) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..count {
        let e = frames::random_commuting_partition(&mut rng, dim, parts);
        let fam = frames::vn_orthogonalize(&e).context("vn_orthogonalize")?;
        sum = sum.max(fam.report.sum_residual);
        orth = orth.max(fam.report.orthogonality_residual);
        range = range.max(fam.report.range_residual);
    }
    r.check_max("sum_residual", sum, 1e-9);
    r.check_max("orthogonality_residual", orth, 1e-9);
    r.check_max("range_residual", range, ORTH_TOL);
    Ok(r)
}

pub fn star_check(p: &Params) -> Outcome {
    let theta = p.theta.unwrap_or((5f64.sqrt() - 1.0) / 2.0);
    let cutoff = p.pick(&p.cutoff, 3, 2);
    let count = p.pick(&p.count, 20, 5);
    ensure((1..=3).contains(&cutoff), || "cutoff per factor must be in 1..=3 so products stay within R ≤ 6".into())?;
    let (seed, mut rng) = rng(p);
    let lattice = ModeLattice { size: 2 * cutoff + 4 };
    let mut r = ExperimentReport::new("star-check");
    r.param("theta", theta).param("cutoff", cutoff).param("count", count).param("seed", seed);
    let (mut twist, mut assoc, mut homog) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..count {
        let x = TorusElement::random(&mut rng, theta, cutoff);
        let y = TorusElement::random(&mut rng, theta, cutoff);
        let z = TorusElement::random(&mut rng, theta, cutoff);
        twist = twist.max(torus::twist_defect(&lattice, &x, &y).context("twist_defect")?);
        let xy = torus::star_coefficients(&x, &y).context("star")?;
        let left = torus::star_coefficients(&xy, &z).context("star")?;
        let right = torus::star_coefficients(&x, &torus::star_coefficients(&y, &z).context("star")?).context("star")?;
        let scale = left.coeff_distance(&TorusElement::zero(theta, 0)).max(f64::MIN_POSITIVE);
        assoc = assoc.max(left.coeff_distance(&right) / scale);
        homog = homog.max(lattice.homogeneity_defect(&lattice.realize(&x)));
    }
    r.check_max("twist_defect", twist, 1e-10);
    r.check_max("associativity_rel", assoc, 1e-12);
    r.check_max("homogeneity_defect", homog, 1e-12);
    Ok(r)
}

fn random_algebra(rng: &mut ChaCha8Rng, max_dim: usize) -> StarAlgebra {
    use nccover::action::{block_algebra, diagonal_algebra};
    use rand::Rng;
    let d = rng.random_range(1..=max_dim.clamp(1, 4));
    match rng.random_range(0..3) {
        0 => full_matrix_algebra(d),
        1 => diagonal_algebra(d),
        _ => {
            let first = rng.random_range(1..=d);
            if first == d {
                full_matrix_algebra(d)
            } else {
                block_algebra(&[first, d - first])
            }
        }
    }
}

pub fn connection_check(p: &Params) -> Outcome {
    use rand::Rng;
    let count = p.pick(&p.count, 100, 10);
    let max_dim = p.pick(&p.dim, 8, 8);
    ensure(max_dim >= 2, || "dim must be at least 2".into())?;
    let (seed, mut rng) = rng(p);
    let mut r = ExperimentReport::new("connection-check");
    r.param("count", count).param("dim", max_dim).param("seed", seed);
    let ident = |m: &DenseMatrix| m.clone();
    let mut leibniz = 0.0f64;
    let mut free = 0.0f64;
    for _ in 0..count {
        let alg = random_algebra(&mut rng, max_dim / 2);
        let d = alg.ambient_dim();
        let rank = rng.random_range(1..=(max_dim / d).clamp(1, 3));
        let module = connections::random_module(&mut rng, alg.clone(), rank).context("random_module")?;
        let y: Vec<DenseMatrix> = (0..rank).map(|_| connections::random_element(&mut rng, &alg)).collect();
        let x = module.project(&y);
        let a = connections::random_element(&mut rng, &alg);
        let dirac = random::hermitian(&mut rng, d);
        let scale = x.iter().map(linalg::op_norm).fold(1.0, f64::max) * linalg::op_norm(&a).max(1.0) * linalg::op_norm(&dirac);
        leibniz = leibniz.max(connections::leibniz_residual(&module, &x, &a, &dirac, ident) / scale);
        let free_module = FramedModule::free(alg.clone(), rank).context("free module")?;
        let nabla = connections::grassmann_connection(&free_module, &y);
        for (form, yk) in nabla.iter().zip(&y) {
            let got = connections::represent_form(form, &dirac, ident);
            let want = connections::represent_form(&connections::d(yk), &dirac, ident);
            free = free.max(linalg::fro_norm(&(got - want)));
        }
    }
    r.check_max("leibniz_residual_rel", leibniz, 1e-10);
    r.check_max("free_module_residual", free, 0.0);
    Ok(r)
}

fn circle_grid(q: usize) -> (Vec<f64>, DenseMatrix) {
    let angles: Vec<f64> = (0..q).map(|k| -PI + 2.0 * PI * (k as f64 + 0.5) / q as f64).collect();
    let u = linalg::diag(&angles.iter().map(|&a| C64::from_polar(1.0, a)).collect::<Vec<_>>());
    (angles, u)
}

pub fn dirac_lift(p: &Params) -> Outcome {
    let group_name = p.group.clone().unwrap_or_else(|| "Z3".into());
    let group = FiniteGroup::parse(&group_name).context("group")?;
    let d = p.pick(&p.dim, 3, 2);
    let q = p.pick(&p.q, 32, 16);
    let fine = p.pick(&p.grid, 256, 256);
    ensure(q >= 16 && q.is_multiple_of(2), || "q must be even and at least 16".into())?;
    let (seed, mut rng) = rng(p);
    let mut r = ExperimentReport::new("dirac-lift");
    r.param("group", &group_name).param("dim", d).param("q", q).param("grid", fine).param("seed", seed);

    let boring = frames::boring_frame(&group, d).context("boring_frame")?;
    let rep = BaseRep::leading_block(&boring.base, d).context("representation")?;
    let base_dirac = random::hermitian(&mut rng, d);
    let lift = connections::dirac_lift(&boring, &base_dirac, &rep).context("dirac_lift")?;
    let base_spec = linalg::herm_eig(&base_dirac).context("base spectrum")?.values;
    let mut expected: Vec<f64> = base_spec.iter().flat_map(|&x| std::iter::repeat_n(x, group.order())).collect();
    expected.sort_by(f64::total_cmp);
    r.check_max("boring_spectrum_distance", connections::spectrum_distance(&lift.spectrum, &expected), 1e-9);
    r.check_max("boring_equivariance", lift.equivariance_residual, 1e-9);

    let (angles, u) = circle_grid(q);
    let ext = frames::root_extension(&u, 2).context("root_extension")?;
    let frame = &ext.frame;
    let rep = BaseRep::leading_block(&frame.base, q).context("representation")?;
    let dirac = connections::difference_dirac(q);
    let lift = connections::dirac_lift(frame, &dirac, &rep).context("dirac_lift")?;
    r.check_max("circle_equivariance", lift.equivariance_residual, 1e-9);
    let x = frame.e_list[0].adjoint() * &frame.xi_list[0];
    let step = 2.0 * PI / q as f64;
    let plateau = |a: f64| a > 0.0 && a < PI && a.sin() > 2.0 * circle::RAMP_HALF_WIDTH;
    let h = DVector::from_fn(q, |k, _| {
        let a = angles[k];
        C64::from(if plateau(a - step) && plateau(a) && plateau(a + step) { 1.0 + 0.5 * (k as f64).cos() } else { 0.0 })
    });
    r.check_max("locality_residual", lift.locality_residual(frame, &rep, &dirac, &x, &h), 1e-9);

    let (fine_angles, _) = circle_grid(fine);
    let grid_lift = connections::circle_cover_lift(2, &fine_angles, &connections::spectral_dirac(&fine_angles))
        .context("circle_cover_lift")?;
    let spec = linalg::herm_eig(&grid_lift).context("lifted spectrum")?.values;
    let low: Vec<f64> = spec.iter().copied().filter(|x| x.abs() < 2.75).collect();
    let defect = low.iter().map(|&x| connections::lattice_distance(x, 2)).fold(0.0, f64::max);
    r.check_max("half_integer_defect", defect, 2e-2);
    let mut sorted = spec.clone();
    sorted.sort_by(f64::total_cmp);
    r.plot(
        "double_cover_spectrum",
        &["index", "eigenvalue"],
        sorted.iter().enumerate().map(|(i, &v)| vec![i as f64, v]).collect(),
    );
    Ok(r)
}

/// Pointwise σ_λ(A) + σ_μ(B) ≤ σ_{λ+μ}(A+B) and σ_λ(A+B) ≤ σ_λ(A) + σ_λ(B) ≤ σ_{2λ}(A+B) at integer cutoffs.
fn norm_inequality_violation(a: &SingularSeries, b: &SingularSeries, ab: &SingularSeries) -> f64 {
    let n = a.len();
    let mut worst = f64::NEG_INFINITY;
    for l in 0..=n {
        for m in 0..=(n - l) {
            worst = worst.max(a.sigma_int(l) + b.sigma_int(m) - ab.sigma_int(l + m));
        }
        let split = a.sigma_int(l) + b.sigma_int(l);
        worst = worst.max(ab.sigma_int(l) - split);
        if 2 * l <= n {
            worst = worst.max(split - ab.sigma_int(2 * l));
        }
    }
    worst
}

pub fn dixmier(p: &Params) -> Outcome {
    let terms = p.pick(&p.terms, 1_000_000, 100_000);
    let pairs = p.pick(&p.count, 50, 5);
    let dim = p.pick(&p.dim, 64, 32);
    ensure(terms >= dixmier::MIN_TERMS, || format!("terms must be at least {}", dixmier::MIN_TERMS))?;
    let (seed, mut rng) = rng(p);
    let mut r = ExperimentReport::new("dixmier");
    r.param("terms", terms).param("count", pairs).param("dim", dim).param("seed", seed);
    let series = dixmier::circle_series(terms);
    let est = dixmier::nc_integral(&series).context("nc_integral")?;
    r.estimate("slope", est.slope).estimate("stderr", est.stderr).estimate("tau_tail", est.tau_tail);
    r.estimate("tau_oscillation", est.tau_oscillation);
    r.check_max("circle_integral_rel_error", (est.slope - 2.0).abs() / 2.0, 0.005);
    r.check_max("tau_tail_rel_error", (est.tau_tail - 2.0).abs() / 2.0, 0.10);
    for order in [2usize, 4, 6] {
        let lifted = dixmier::lift_series(&series, order).context("lift_series")?;
        let lifted_est = dixmier::nc_integral(&lifted).context("nc_integral")?;
        r.check_max(&format!("lift_{order}_rel_error"), (lifted_est.slope / est.slope - order as f64).abs() / order as f64, 0.02);
        let block = (1..=terms / 4)
            .step_by((terms / 400).max(1))
            .map(|k| (lifted.sigma_int(order * k) - order as f64 * series.sigma_int(k)).abs() / series.sigma_int(k))
            .fold(0.0, f64::max);
        r.check_max(&format!("lift_{order}_block_identity"), block, 1e-12);
    }
    let mut violation = f64::NEG_INFINITY;
    for _ in 0..pairs {
        let a = random::positive(&mut rng, dim);
        let b = random::positive(&mut rng, dim);
        let sa = SingularSeries::from_matrix(&a);
        let sb = SingularSeries::from_matrix(&b);
        let sab = SingularSeries::from_matrix(&(&a + &b));
        violation = violation.max(norm_inequality_violation(&sa, &sb, &sab));
    }
    r.check_max("norm_inequality_violation", violation, 1e-10);
    let rows = (0..64)
        .map(|j| {
            let n = ((terms as f64).powf(j as f64 / 63.0).round() as usize).clamp(1, terms);
            vec![n as f64, (n as f64).ln(), series.sigma_int(n)]
        })
        .collect();
    r.plot("sigma_curve", &["n", "log_n", "sigma"], rows);
    r.plot("tau_curve", &["lambda", "tau"], est.tau_curve.iter().map(|&(l, t)| vec![l, t]).collect());
    Ok(r)
}

pub fn root_extension(p: &Params) -> Outcome {
    let q = p.pick(&p.q, 16, 8);
    let n = p.pick(&p.n, 3, 2);
    ensure((1..=6).contains(&n) && q >= 2, || "need 1 ≤ n ≤ 6 and q ≥ 2".into())?;
    let ext = frames::root_extension(&rotated_clock(q).context("clock")?, n).context("root_extension")?;
    let mut r = ExperimentReport::new("root-extension");
    r.param("q", q).param("n", n);
    r.check_max("root_residual", ext.root_residual, 1e-10);
    frame_checks(&mut r, "", &ext.report());
    r.estimate("cover_dim", ext.frame.cover().dim() as f64).estimate("base_dim", ext.frame.base.dim() as f64);
    Ok(r)
}

pub fn mapping_cone(p: &Params) -> Outcome {
    let n = p.pick(&p.n, 2, 2);
    let t_points = p.pick(&p.t_points, 3, 2);
    let phi_points = p.pick(&p.phi_points, 12, 8);
    ensure(n >= 2 && t_points >= 2 && phi_points >= 4, || "need n ≥ 2, t-points ≥ 2, phi-points ≥ 4".into())?;
    let cone = frames::mapping_cone_cover(n, t_points, phi_points).context("mapping_cone_cover")?;
    let mut r = ExperimentReport::new("mapping-cone");
    r.param("n", n).param("t_points", t_points).param("phi_points", phi_points);
    frame_checks(&mut r, "", &cone.extension.report());
    r.check_min("root_residual_in_base", cone.root_residual_in_base, 1e-3);
    r.check_max("power_residual_in_base", cone.power_residual_in_base, 1e-10);
    r.check_min("root_residual_in_cover_base", cone.root_residual_in_cover_base, 1e-3);
    r.check_max("power_residual_in_cover_base", cone.power_residual_in_cover_base, 1e-10);
    r.check_max("fiber_off_mode_max", cone.fiber_off_mode_max, 1e-12);
    Ok(r)
}

pub fn su2_disconnect(p: &Params) -> Outcome {
    let n = p.n.unwrap_or(3);
    let spread = p.spread.unwrap_or(0.6);
    let join = p.join.unwrap_or(0.2);
    ensure((2..=4).contains(&n), || "n must be in 2..=4".into())?;
    let rep = frames::su2_disconnection(n, spread, join).context("su2_disconnection")?;
    let mut r = ExperimentReport::new("su2-disconnect");
    r.param("n", n).param("spread", spread).param("join", join);
    frame_checks(&mut r, "", &rep.frame);
    r.estimate("factors", rep.factors as f64).estimate("components", rep.components as f64);
    r.check_true("components_equal_n", rep.components == n);
    r.check_max("label_spread", rep.label_spread, 1e-10);
    r.check_max("label_root_defect", rep.label_root_defect, 1e-10);
    r.check_true("labels_distinct", rep.labels_distinct);
    r.plot(
        "labels",
        &["component", "re", "im"],
        rep.labels.iter().enumerate().map(|(i, &(a, b))| vec![i as f64, a, b]).collect(),
    );
    Ok(r)
}
