//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
//! Tolerances are pinned here and nowhere else.

use num_complex::Complex64 as C64;
use torsionlab::boundary::{duality_check, lagrangian_split};
use torsionlab::cylinder::{
    bseries_trace_vanishes, gaussian_cutoff_integral, zeta0_mellin_oracle, zeta0_plus_k,
    BoundarySide, CutoffFunction,
};
use torsionlab::graded::{
    eigenvalue_multiset, hodge_check, sector_bound_check, signature_operator,
};
use torsionlab::linalg::ComplexMatrix;
use torsionlab::models;
use torsionlab::par;
use torsionlab::symbols::{wellposedness_sweep, SymbolSpace};
use torsionlab::twisted::{
    build_twisted_complex, cohomology_report, middle_dim_check, solid_torus_spec,
};
use torsionlab::zeta_eta::{
    det_duality_residual, eta_parity_check, logdet_identity_check, parity_duality_residual,
    ray_singer_norm, rho_element,
};

fn report(criterion: &str, pass: bool, detail: String) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("criterion {criterion}: {verdict} [{detail}]");
    assert!(pass, "criterion {criterion} failed: {detail}");
}

/// 30 seeded chirality complexes, m in {1, 3, 5}, degree dims <= 4.
fn lambda_population() -> Vec<(usize, u64)> {
    (0..30u64).map(|s| ([1usize, 3, 5][s as usize % 3], s)).collect()
}

#[test]
fn criterion_01_lambda_independence() {
    let tol = 1e-9;
    let devs = par::map_vec(lambda_population(), |(m, seed)| {
        let cx = models::random_chirality_complex(m, 4, 46_000 + seed);
        let sig = signature_operator(&cx).expect("valid model");
        let spec = eigenvalue_multiset(&sig.b_even).expect("spectrum");
        let theta = models::admissible_theta(&spec, -0.8);
        let l1 = models::admissible_window(&sig, 0.25);
        let l2 = models::admissible_window(&sig, 0.85);
        if (l2 - l1).abs() < 1e-9 {
            return 0.0;
        }
        let (lo, hi) = if l1 < l2 { (l1, l2) } else { (l2, l1) };
        let r1 = rho_element(&cx, lo, theta, 1e-9).expect("rho at the lower window");
        let r2 = rho_element(&cx, hi, theta, 1e-9).expect("rho at the upper window");
        (r1.rho - r2.rho).norm() / r1.rho.norm().max(1e-300)
    });
    let worst = devs.iter().cloned().fold(0.0f64, f64::max);
    report(
        "1 (window independence of the torsion element)",
        worst < tol,
        format!("30 models, worst relative deviation {worst:.3e} < {tol:.0e}"),
    );
}

#[test]
fn criterion_02_graded_determinant_identity() {
    let tol = 1e-8;
    let devs = par::map_vec(lambda_population(), |(m, seed)| {
        let cx = models::random_acyclic_invertible_complex(m, 2, 52_000 + seed);
        let sig = signature_operator(&cx).expect("valid model");
        let spec = eigenvalue_multiset(&sig.b_even).expect("spectrum");
        let theta = models::admissible_theta(&spec, -0.9);
        logdet_identity_check(&cx, theta)
            .expect("identity evaluates")
            .residual
    });
    let worst = devs.iter().cloned().fold(0.0f64, f64::max);

    // analytic m = 1 case: both sides equal log a
    let a = C64::new(2.0, 0.0);
    let cx = torsionlab::graded::GradedChainComplex {
        dims: vec![1, 1],
        diff: vec![ComplexMatrix::from_rows(&[vec![a]])],
        chi: vec![ComplexMatrix::identity(1), ComplexMatrix::identity(1)],
        inner: None,
    };
    let rep = logdet_identity_check(&cx, -0.9).expect("analytic case");
    let analytic_dev = (rep.lhs - a.ln()).norm().max(rep.residual);
    report(
        "2 (graded log-determinant identity)",
        worst < tol && analytic_dev < 1e-12,
        format!("30 models, worst residual {worst:.3e} < {tol:.0e}; analytic case {analytic_dev:.3e} < 1e-12"),
    );
}

#[test]
fn criterion_03_duality_suite() {
    // Spec(B^{2,+}_q) = Spec(B^{2,-}_{q+1}) within 1e-9 and the Γ transport
    // of the ± parts between parities (domain intertwining)
    let spectral = par::map_vec((0..12u64).collect::<Vec<_>>(), |seed| {
        let m = [1usize, 3, 5][seed as usize % 3];
        let cx = models::random_acyclic_invertible_complex(m, 2, 61_000 + seed);
        let a = det_duality_residual(&cx).expect("spectral duality");
        let b = parity_duality_residual(&cx).expect("parity duality");
        a.max(b)
    });
    let worst_spec = spectral.iter().cloned().fold(0.0f64, f64::max);

    // boundary-condition duality P_{-,L0} Γ = Γ P_{+,L1} within 1e-10
    let boundary = par::map_vec((0..8u64).collect::<Vec<_>>(), |seed| {
        let model = models::random_boundary_model(3, 3, 1, 1, 62_000 + seed);
        let data = lagrangian_split(&model).expect("lagrangian");
        let rep = duality_check(&model, &data).expect("duality report");
        if rep.l0_maps_to_l1 && rep.l1_maps_to_l0 {
            rep.intertwining_residual
        } else {
            f64::INFINITY
        }
    });
    let worst_bdy = boundary.iter().cloned().fold(0.0f64, f64::max);
    report(
        "3 (duality suite: spectra, boundary conditions, domains)",
        worst_spec < 1e-9 && worst_bdy < 1e-10,
        format!("spectral {worst_spec:.3e} < 1e-9, boundary intertwining {worst_bdy:.3e} < 1e-10"),
    );
}

#[test]
fn criterion_04_sector_bounds() {
    let margins = par::map_vec((0..50u64).collect::<Vec<_>>(), |seed| {
        let twist = seed % 2 == 1;
        let model = models::random_sector_model(5 + (seed as usize % 3), 71_000 + seed, twist);
        let rep = sector_bound_check(&model).expect("sector report");
        rep.strip_margin.min(rep.parabola_margin)
    });
    let worst = margins.iter().cloned().fold(f64::INFINITY, f64::min);
    report(
        "4 (spectral sector bounds)",
        worst >= 0.0,
        format!("50 models (identity and random twists), minimum margin {worst:.3e} >= 0"),
    );
}

#[test]
fn criterion_05_cylinder_zeta0() {
    let tol = 1e-6;
    let psi1 = CutoffFunction::psi1();
    // quarter fixture: exact value 1/4 and exact negation on the plus side
    let quarter = models::quarter_fixture();
    let closed = zeta0_plus_k(2, &quarter, BoundarySide::MinusL0);
    let closed_plus = zeta0_plus_k(2, &quarter, BoundarySide::PlusL1);
    let oracle_quarter = zeta0_mellin_oracle(2, &quarter, BoundarySide::MinusL0, &psi1)
        .expect("mellin oracle");
    let quarter_ok = (closed - 0.25).abs() < 1e-15
        && closed_plus == -closed
        && (oracle_quarter - 0.25).abs() < tol;

    let devs = par::map_vec((0..10u64).collect::<Vec<_>>(), |seed| {
        let m = if seed % 2 == 0 { 3 } else { 5 };
        let model = models::random_boundary_spectrum(m, 81_000 + seed, true);
        let psi1 = CutoffFunction::psi1();
        let mut worst = 0.0f64;
        for q in 0..=m {
            let c = zeta0_plus_k(q, &model, BoundarySide::MinusL0);
            let o = zeta0_mellin_oracle(q, &model, BoundarySide::MinusL0, &psi1)
                .expect("mellin oracle");
            worst = worst.max((c - o).abs());
            // the plus side is the exact negation
            assert_eq!(zeta0_plus_k(q, &model, BoundarySide::PlusL1), -c);
        }
        worst
    });
    let worst = devs.iter().cloned().fold(0.0f64, f64::max);
    report(
        "5 (cylinder zeta(0)+k vs Mellin oracle)",
        quarter_ok && worst < tol,
        format!("quarter fixture exact, 10 synthetic models worst |closed - oracle| {worst:.3e} < {tol:.0e}"),
    );
}

#[test]
fn criterion_06_cutoff_asymptotics() {
    let psi1 = CutoffFunction::psi1();
    let mut detail = String::new();
    let mut ok = true;
    for t in [0.1, 0.05, 0.01] {
        let exact = 0.5 * (std::f64::consts::PI * t).sqrt();
        let val = gaussian_cutoff_integral(t, &psi1).expect("quadrature");
        let bound = (-0.17 / t).exp();
        let dev = (val - exact).abs();
        ok &= dev <= bound;
        detail.push_str(&format!("t={t}: {dev:.2e} <= {bound:.2e}; "));
    }
    report("6 (Gaussian cutoff remainder)", ok, detail);
}

#[test]
fn criterion_07_beven_trace_vanishing() {
    let devs = par::map_vec((0..8u64).collect::<Vec<_>>(), |seed| {
        let model = models::random_boundary_model(3, 2, 1, 1, 91_000 + seed);
        let data = lagrangian_split(&model).expect("lagrangian");
        let mut worst = 0.0f64;
        for t in [0.05, 0.4, 1.5] {
            worst = worst.max(bseries_trace_vanishes(&model, &data, t).expect("trace"));
        }
        worst
    });
    let worst = devs.iter().cloned().fold(0.0f64, f64::max);
    report(
        "7 (B_even cylinder trace vanishing)",
        worst <= 1e-12,
        format!("8 models x 3 times, worst residual {worst:.3e} <= 1e-12"),
    );
}

#[test]
fn criterion_08_wellposedness_symbols() {
    let mut ok = true;
    let mut detail = String::new();
    for (dim, rank) in [(2usize, 1usize), (2, 2), (4, 1)] {
        let failures = wellposedness_sweep(SymbolSpace::new(dim, rank), 100, 12_000 + dim as u64);
        ok &= failures == 0;
        detail.push_str(&format!("(m-1={dim}, n={rank}): {failures}/100 failures; "));
    }
    report("8 (well-posedness symbol check)", ok, detail);
}

#[test]
fn criterion_09_ray_singer_norm() {
    let devs = par::map_vec((0..20u64).collect::<Vec<_>>(), |seed| {
        let m = [1usize, 3, 5][seed as usize % 3];
        let cx = models::random_hermitian_complex(m, 3, 13_000 + seed);
        let sig = signature_operator(&cx).expect("valid model");
        let lambda = models::admissible_window(&sig, 0.4);
        let norm = ray_singer_norm(&cx, lambda, -0.8, 1e-9).expect("norm");
        (norm - 1.0).abs()
    });
    let worst = devs.iter().cloned().fold(0.0f64, f64::max);

    let cx = torsionlab::graded::GradedChainComplex {
        dims: vec![1, 1],
        diff: vec![ComplexMatrix::from_rows(&[vec![C64::new(2.0, 0.0)]])],
        chi: vec![ComplexMatrix::identity(1), ComplexMatrix::identity(1)],
        inner: None,
    };
    let analytic = (ray_singer_norm(&cx, 1.0, -0.8, 1e-9).expect("norm") - 1.0).abs();
    report(
        "9 (Ray-Singer norm)",
        worst < 1e-8 && analytic < 1e-12,
        format!("20 Hermitian models worst |norm - 1| {worst:.3e} < 1e-8; analytic case {analytic:.3e} < 1e-12"),
    );
}

#[test]
fn criterion_10_hodge_and_middle_dimension() {
    let hodge_ok = par::map_vec((0..10u64).collect::<Vec<_>>(), |seed| {
        let m = [1usize, 3, 5][seed as usize % 3];
        let cx = models::random_hermitian_complex(m, 3, 14_000 + seed);
        hodge_check(&cx).expect("hodge")
    })
    .iter()
    .all(|ok| *ok);

    // solid torus: trivial and 10 random flat U(1) holonomies
    let mut torus_ok = true;
    let trivial = solid_torus_spec(ComplexMatrix::identity(1)).expect("fixture");
    let rep = cohomology_report(&trivial).expect("report");
    torus_ok &= middle_dim_check(&rep) && rep.boundary[rep.middle_degree] == 2 && rep.rank_j == 1;
    let mut rng = models::rng_from_seed(14_500);
    for _ in 0..10 {
        use rand::Rng;
        let phase: f64 = rng.gen_range(0.0..(2.0 * std::f64::consts::PI));
        let holo = ComplexMatrix::from_rows(&[vec![C64::new(phase.cos(), phase.sin())]]);
        let spec = solid_torus_spec(holo).expect("fixture");
        let _cx = build_twisted_complex(&spec).expect("twisted complex");
        let rep = cohomology_report(&spec).expect("report");
        torus_ok &= middle_dim_check(&rep);
    }
    report(
        "10 (finite Hodge + middle-dimension topology)",
        hodge_ok && torus_ok,
        format!("hodge on 10 Hermitian models: {hodge_ok}; solid-torus middle dimension: {torus_ok}"),
    );
}

#[test]
fn criterion_11_eta_parity() {
    let results = par::map_vec((0..10u64).collect::<Vec<_>>(), |seed| {
        let cx = models::random_acyclic_invertible_complex(3, 2, 15_000 + seed);
        let rep = eta_parity_check(&cx).expect("parity report");
        rep.symmetric_part_ok && rep.concentration_ok
    });
    let ok = results.iter().all(|b| *b);
    report(
        "11 (eta parity)",
        ok,
        format!("10 constructed m=3 models, negation symmetry and middle concentration: {ok}"),
    );
}
