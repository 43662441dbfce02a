use epcore::adiabatic::{
    build_full_diamond, build_full_stub, compare_full_vs_effective, eliminate, generator, induced_coupling, AdiabaticDiamondConfig,
    AdiabaticStubConfig, DECAY_LADDER,
};
use epcore::jordan::detect_structure;
use epcore::linalg::frobenius;
use epcore::models::stub::{site_a, site_b, site_c};
use epcore::models::{build_diamond, build_stub, DiamondRingParams, StubRibbonParams};
use epcore::{ComplexMatrix, ComplexVector, Error, C64};
use ndarray::Array1;
use std::f64::consts::FRAC_PI_2;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn max_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    assert_eq!(a.dim(), b.dim());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn times(end: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| end * k as f64 / (count - 1) as f64).collect()
}

fn unit(dim: usize, site: usize) -> ComplexVector {
    let mut v = Array1::zeros(dim);
    v[site] = c(1.0, 0.0);
    v
}

fn spread(dim: usize) -> ComplexVector {
    let v: ComplexVector = (0..dim).map(|k| c(1.0 + 0.1 * k as f64, 0.3 * (k as f64).sin())).collect();
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.mapv(|z| z / n)
}

fn two_cell(j_ad: f64, j_bd: f64, kappa_d: f64) -> AdiabaticStubConfig {
    AdiabaticStubConfig {
        n: 2,
        j: 1.0,
        j_ab: vec![0.7, 1.1],
        j_ad: vec![j_ad, 0.8 * j_ad],
        j_bd: vec![j_bd, 1.2 * j_bd],
        theta: FRAC_PI_2,
        kappa_a: vec![0.0; 2],
        kappa_b: vec![0.0; 2],
        kappa_c: vec![0.0],
        kappa_d: vec![kappa_d; 2],
    }
}

#[test]
fn induced_hopping_formula() {
    assert_eq!(induced_coupling(1.0, 1.0, 4.0), 0.5);
    let cfg = two_cell(1.0, 1.0, 4.0);
    let tilde = cfg.induced_hopping();
    assert_eq!(tilde[0], 0.5);
    let (h, decay) = build_full_stub(&cfg).unwrap();
    let eff = eliminate(&h, &decay, &cfg.aux_indices(), false).unwrap();
    let (a, b) = (site_a(1), site_b(1));
    // θ = π/2: a†b gains +J̃, b†a loses J̃.
    assert!((eff[[a, b]] - c(0.7 + 0.5, 0.0)).norm() < 1e-14);
    assert!((eff[[b, a]] - c(0.7 - 0.5, 0.0)).norm() < 1e-14);
}

#[test]
fn ep_condition_switches_off_downward_hopping() {
    let target = StubRibbonParams::uniform(3, 1.0, 2.0, 0.0);
    let cfg = AdiabaticStubConfig::for_stub(&target, 50.0).unwrap();
    for k in 0..3 {
        assert!((cfg.j_ab[k] - cfg.induced_hopping()[k]).abs() < 1e-14);
    }
    let (h, decay) = build_full_stub(&cfg).unwrap();
    let eff = eliminate(&h, &decay, &cfg.aux_indices(), false).unwrap();
    for n in 1..=3 {
        assert!(eff[[site_b(n), site_a(n)]].norm() < 1e-14);
        assert!((eff[[site_a(n), site_b(n)]] - c(2.0, 0.0)).norm() < 1e-14);
    }
}

#[test]
fn ideal_effective_stub_equals_lattice_model() {
    for target in [StubRibbonParams::uniform(4, 1.0, 2.0, 0.0), StubRibbonParams::sqrt_profile(4, 1.0, 0.3), StubRibbonParams::uniform(3, 1.0, 1.5, 0.6)] {
        let cfg = AdiabaticStubConfig::for_stub(&target, 1e3).unwrap();
        let (h, decay) = build_full_stub(&cfg).unwrap();
        let eff = eliminate(&h, &decay, &cfg.aux_indices(), false).unwrap();
        assert!(max_diff(&eff, &build_stub(&target).unwrap()) < 1e-13);
    }
}

#[test]
fn two_cell_motion_equations_match_hand_table() {
    let cfg = AdiabaticStubConfig {
        kappa_a: vec![0.1, 0.2],
        kappa_b: vec![0.3, 0.4],
        kappa_c: vec![0.5],
        kappa_d: vec![6.0, 7.0],
        ..two_cell(0.9, 1.3, 6.0)
    };
    let (h, decay) = build_full_stub(&cfg).unwrap();
    let m = generator(&h, &decay).unwrap();
    // ẋ = −iMx, so each motion-equation coefficient is −i·M[i][j].
    let rate = |i: usize, j: usize| c(0.0, -1.0) * m[[i, j]];
    let (a1, b1, c1, a2, b2) = (site_a(1), site_b(1), site_c(1), site_a(2), site_b(2));
    let (d1, d2) = (cfg.site_d(1), cfg.site_d(2));
    assert_eq!(m.dim(), (7, 7));
    let i = c(0.0, 1.0);
    let e = C64::from_polar(1.0, FRAC_PI_2);
    let expected = [
        // ȧ₁ = −iJ^{ab}b₁ − iJ^{ad}e^{iθ}d₁ − κ^a/2·a₁
        (a1, b1, -i * 0.7),
        (a1, d1, -i * 0.9 * e),
        (a1, a1, c(-0.05, 0.0)),
        // ḃ₁ = −iJ^{ab}a₁ − iJc₁ − iJ^{bd}d₁ − κ^b/2·b₁ (no c₀ in the first cell)
        (b1, a1, -i * 0.7),
        (b1, c1, -i),
        (b1, d1, -i * 1.3),
        (b1, b1, c(-0.15, 0.0)),
        // ċ₁ = −iJ(b₁ + b₂) − κ^c/2·c₁
        (c1, b1, -i),
        (c1, b2, -i),
        (c1, c1, c(-0.25, 0.0)),
        // ȧ₂, ḃ₂ with the second cell's couplings
        (a2, b2, -i * 1.1),
        (a2, d2, -i * 0.72 * e),
        (a2, a2, c(-0.1, 0.0)),
        (b2, a2, -i * 1.1),
        (b2, c1, -i),
        (b2, d2, -i * 1.56),
        (b2, b2, c(-0.2, 0.0)),
        // ḋ_n = −iJ^{ad}e^{−iθ}a_n − iJ^{bd}b_n − κ^d/2·d_n
        (d1, a1, -i * 0.9 * e.conj()),
        (d1, b1, -i * 1.3),
        (d1, d1, c(-3.0, 0.0)),
        (d2, a2, -i * 0.72 * e.conj()),
        (d2, b2, -i * 1.56),
        (d2, d2, c(-3.5, 0.0)),
    ];
    let mut covered = ndarray::Array2::from_elem((7, 7), false);
    for &(r, col, v) in &expected {
        assert!((rate(r, col) - v).norm() < 1e-14, "entry ({r},{col}): {} vs {}", rate(r, col), v);
        covered[[r, col]] = true;
    }
    for r in 0..7 {
        for col in 0..7 {
            if !covered[[r, col]] {
                assert_eq!(m[[r, col]], c(0.0, 0.0), "unexpected entry ({r},{col})");
            }
        }
    }
}

#[test]
fn induced_decay_terms_match_closed_forms() {
    let cfg = two_cell(0.9, 1.3, 6.0);
    let (h, decay) = build_full_stub(&cfg).unwrap();
    let eff = eliminate(&h, &decay, &cfg.aux_indices(), true).unwrap();
    // Diagonal −(i/2)κ̃ with κ̃^a = 4(J^{ad})²/κ^d and κ̃^b = 4(J^{bd})²/κ^d.
    assert!((eff[[site_a(1), site_a(1)]] - c(0.0, -0.5 * 4.0 * 0.81 / 6.0)).norm() < 1e-14);
    assert!((eff[[site_b(1), site_b(1)]] - c(0.0, -0.5 * 4.0 * 1.69 / 6.0)).norm() < 1e-14);
    assert_eq!(eff[[site_c(1), site_c(1)]], c(0.0, 0.0));
}

#[test]
fn ideal_effective_diamond_equals_ring_model() {
    for p in [
        DiamondRingParams::real(2.0, 1.0),
        DiamondRingParams::real(-0.7, 0.4),
        DiamondRingParams::imaginary(0.5, -1.0),
        DiamondRingParams::imaginary(-1.0, 0.5),
        DiamondRingParams::real(0.3, -1.3),
    ] {
        let cfg = AdiabaticDiamondConfig::for_diamond(&p, 40.0).unwrap();
        let (h, decay) = build_full_diamond(&cfg).unwrap();
        let eff = eliminate(&h, &decay, &cfg.aux_indices(), false).unwrap();
        assert!(max_diff(&eff, &build_diamond(&p).unwrap()) < 1e-13, "{p:?}");
    }
}

#[test]
fn diamond_realization_induced_couplings() {
    let cfg = AdiabaticDiamondConfig::for_diamond(&DiamondRingParams::real(2.0, 1.0), 10.0).unwrap();
    let tilde = cfg.induced_couplings();
    for (got, want) in tilde.iter().zip([1.0, 2.0, 2.0, 1.0]) {
        assert!((got - want).abs() < 1e-14);
    }
    assert_eq!(cfg.theta, [std::f64::consts::PI, std::f64::consts::PI, 0.0, 0.0]);
    assert_eq!(cfg.g, [1.0, 2.0, 2.0, 1.0]);
    let imag = AdiabaticDiamondConfig::for_diamond(&DiamondRingParams::imaginary(0.5, 2.0), 10.0).unwrap();
    // ε = iε′: G̃₂ = −G̃₃ = ε′, −G₂ = G₃ = ε′κ.
    let t = imag.induced_couplings();
    assert!((t[1] - 0.5).abs() < 1e-14 && (t[2] + 0.5).abs() < 1e-14);
    assert_eq!(imag.g, [1.0, -1.0, 1.0, 1.0]);
}

#[test]
fn full_diamond_is_eight_modes() {
    let cfg = AdiabaticDiamondConfig::for_diamond(&DiamondRingParams::real(2.0, 1.0), 10.0).unwrap();
    let (h, decay) = build_full_diamond(&cfg).unwrap();
    assert_eq!(h.dim(), (8, 8));
    assert_eq!(decay, vec![0.0, 0.0, 0.0, 0.0, 10.0, 10.0, 10.0, 10.0]);
    // Coherent part is Hermitian; f_k only couples to the two ends of its bond.
    assert!(frobenius(&(&h - &epcore::linalg::adjoint(&h))) < 1e-15);
    for (f, ends) in [(4, [0, 1]), (5, [1, 2]), (6, [2, 3]), (7, [3, 0])] {
        for x in 0..4 {
            assert_eq!(h[[x, f]].norm() > 0.0, ends.contains(&x), "mode {x} vs f{}", f - 3);
        }
    }
}

#[test]
fn zero_auxiliary_coupling_is_block_diagonal() {
    let mut cfg = two_cell(0.0, 0.0, 10.0);
    cfg.j_ab = vec![1.0, 1.0];
    let (h, decay) = build_full_stub(&cfg).unwrap();
    for &d in &cfg.aux_indices() {
        for p in 0..cfg.primary_dim() {
            assert_eq!(h[[p, d]], c(0.0, 0.0));
            assert_eq!(h[[d, p]], c(0.0, 0.0));
        }
    }
    let psi0 = spread(cfg.primary_dim());
    for flag in [true, false] {
        let cmp = compare_full_vs_effective(&h, &decay, &cfg.aux_indices(), &psi0, &times(10.0, 21), flag).unwrap();
        assert!(cmp.max_error <= 1e-10, "{}", cmp.max_error);
    }
}

#[test]
fn zero_auxiliary_decay_is_rejected() {
    let cfg = two_cell(1.0, 1.0, 0.0);
    let (h, decay) = build_full_stub(&cfg).unwrap();
    assert!(matches!(eliminate(&h, &decay, &cfg.aux_indices(), true), Err(Error::InvalidParameters(_))));
    assert!(AdiabaticStubConfig::for_stub(&StubRibbonParams::uniform(3, 1.0, 2.0, 0.0), 0.0).is_err());
    assert!(AdiabaticDiamondConfig::for_diamond(&DiamondRingParams::real(2.0, 1.0), -1.0).is_err());
}

fn stub_errors(kappa: f64, flag: bool) -> f64 {
    let target = StubRibbonParams::uniform(3, 1.0, 2.0, 0.0);
    let cfg = AdiabaticStubConfig::for_stub(&target, kappa).unwrap();
    let (h, decay) = build_full_stub(&cfg).unwrap();
    let psi0 = unit(cfg.primary_dim(), site_b(3));
    compare_full_vs_effective(&h, &decay, &cfg.aux_indices(), &psi0, &times(10.0, 101), flag).unwrap().max_error
}

fn diamond_errors(kappa: f64, flag: bool) -> f64 {
    let cfg = AdiabaticDiamondConfig::for_diamond(&DiamondRingParams::real(2.0, 1.0), kappa).unwrap();
    let (h, decay) = build_full_diamond(&cfg).unwrap();
    compare_full_vs_effective(&h, &decay, &cfg.aux_indices(), &spread(4), &times(10.0, 101), flag).unwrap().max_error
}

#[test]
fn large_decay_limit_matches_effective_model() {
    assert!(stub_errors(1e4, true) <= 1e-2);
    assert!(diamond_errors(1e4, true) <= 1e-2);
}

#[test]
fn error_ladder_is_monotone_with_first_order_scaling() {
    for f in [stub_errors as fn(f64, bool) -> f64, diamond_errors] {
        let e: Vec<f64> = DECAY_LADDER.iter().map(|&k| f(k, true)).collect();
        assert!(e[0] > e[1] && e[1] > e[2], "{e:?}");
        // error ≈ c/κ: the constant is positive and stable across the ladder.
        let cs: Vec<f64> = e.iter().zip(DECAY_LADDER).map(|(e, k)| e * k).collect();
        assert!(cs.iter().all(|&c| c > 0.0));
        assert!(cs[1] / cs[2] > 0.5 && cs[1] / cs[2] < 2.0, "{cs:?}");
    }
}

#[test]
fn effective_stub_at_ep_has_one_length_two_chain() {
    let target = StubRibbonParams::uniform(2, 1.0, 2.0, 0.0);
    let cfg = AdiabaticStubConfig::for_stub(&target, 1e3).unwrap();
    let (h, decay) = build_full_stub(&cfg).unwrap();
    let eff = eliminate(&h, &decay, &cfg.aux_indices(), false).unwrap();
    let lengths = |m: &ComplexMatrix| {
        let mut l: Vec<usize> = detect_structure(m).unwrap().chains.iter().flatten().map(|ch| ch.length).collect();
        l.sort();
        l
    };
    let got = lengths(&eff);
    assert_eq!(got.iter().filter(|&&l| l >= 2).collect::<Vec<_>>(), vec![&2], "{got:?}");
    assert_eq!(got, lengths(&build_stub(&target).unwrap()));
}

#[test]
fn reciprocal_couplings_at_zero_phase() {
    let mut cfg = two_cell(0.9, 1.3, 6.0);
    cfg.theta = 0.0;
    let (h, decay) = build_full_stub(&cfg).unwrap();
    let eff = eliminate(&h, &decay, &cfg.aux_indices(), true).unwrap();
    for n in 1..=2 {
        let (a, b) = (site_a(n), site_b(n));
        assert!((eff[[a, b]].norm() - eff[[b, a]].norm()).abs() < 1e-14);
    }
}
