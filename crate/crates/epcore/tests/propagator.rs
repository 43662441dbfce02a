mod common;

use common::*;
use epcore::jordan::*;
use epcore::linalg::*;
use epcore::models::stub::{site_a, site_b};
use epcore::models::*;
use epcore::pcr::*;
use epcore::propagator::*;
use epcore::{Error, Tolerances, C64};
use ndarray::Array1;
use proptest::prelude::*;

fn unit(n: usize, k: usize) -> CVector<f64> {
    let mut v = Array1::zeros(n);
    v[k] = re(1.0);
    v
}

fn stub_h() -> (StubRibbonParams, CMatrix<f64>) {
    let p = StubRibbonParams::uniform(4, 1.0, 2.0, 0.0);
    let h = build_stub(&p).unwrap();
    (p, h)
}

/// |⟨a|b⟩| / (‖a‖‖b‖); 1 for parallel vectors.
fn alignment(a: &CVector<f64>, b: &CVector<f64>) -> f64 {
    inner(a.view(), b.view()).norm() / (vnorm(a) * vnorm(b))
}

#[test]
fn coalescing_state_has_a_single_prefactor() {
    for (name, h) in closure_scenarios() {
        let b = pcr_for(&h).unwrap();
        let nu1 = b.pairs[b.chains[0].pairs[0]].right.clone();
        let pl = plan(&b, &nu1).unwrap();
        for (s, z) in pl.chain_prefactors.iter().enumerate() {
            for (y, zy) in z.iter().enumerate() {
                let want = if s == 0 && y == 0 { 1.0 } else { 0.0 };
                assert!((zy - re(want)).norm() < 1e-12, "{name}: chain {s} position {}", y + 1);
            }
        }
        assert!(pl.simple_prefactors.iter().all(|(_, i)| i.norm() < 1e-12), "{name}");
        let deg = growth_degree(&pl);
        assert_eq!(deg[b.chains[0].pairs[0]], Some(0));
        assert!(matches!(asymptotic_direction(&pl), Ok(Asymptotics::Bounded)) || name.contains("kappa=0.5"));
    }
}

#[test]
fn dimension_mismatch_is_rejected() {
    let (_, h) = stub_h();
    let b = pcr_for(&h).unwrap();
    assert!(matches!(plan(&b, &unit(3, 0)), Err(Error::DimensionMismatch(_))));
    assert!(evolve_oracle(&h, &unit(3, 0), 1.0).is_err());
}

#[test]
fn stub_bottom_site_excites_the_generalized_state() {
    let (p, h) = stub_h();
    let b = pcr_for(&h).unwrap();
    let psi0 = unit(h.nrows(), site_b(4));
    let pl = plan(&b, &psi0).unwrap();
    // Position 2 of the chain is ν_a; its prefactor drives linear growth of ν.
    assert!(pl.chain_prefactors[0][1].norm() > 1e-3);
    let deg = growth_degree(&pl);
    assert_eq!(deg[b.chains[0].pairs[0]], Some(1));
    assert_eq!(top_degree(&pl), Some(1));
    let t = stub_ep_basis(&p).unwrap();
    match asymptotic_direction(&pl).unwrap() {
        Asymptotics::Converges { direction, degree } => {
            assert_eq!(degree, 1);
            let chi = t.vector("chi").unwrap();
            assert!((alignment(&direction, chi) - 1.0).abs() < 1e-10);
            // Σ(−1)^{n+1} J_n^u |A_n⟩ written out.
            let mut expected = Array1::zeros(h.nrows());
            for n in 1..=4 {
                expected[site_a(n)] = re(if n % 2 == 1 { 2.0 } else { -2.0 });
            }
            assert!((alignment(&direction, &expected) - 1.0).abs() < 1e-10);
        }
        other => panic!("unexpected asymptotics {other:?}"),
    }
}

#[test]
fn diamond_top_site_switches_off_the_quadratic_term() {
    let params = DiamondRingParams::real(2.0, 1.0);
    let h = build_diamond(&params).unwrap();
    let b = pcr_for(&h).unwrap();
    let pl = plan(&b, &unit(4, 0)).unwrap();
    assert!(pl.chain_prefactors[0][1].norm() > 1e-3);
    assert!(pl.chain_prefactors[0][2].norm() < 1e-12);
    assert_eq!(growth_degree(&pl)[b.chains[0].pairs[0]], Some(1));

    // Against the table left partners: ⟨ψ₁*|A⟩ = 0, ⟨ψ₂*|A⟩ ≠ 0.
    let t = diamond_analytic_basis(&params).unwrap();
    let a = unit(4, 0);
    assert!(inner(t.vector("psi1").unwrap().mapv(|z| z.conj()).view(), a.view()).norm() < 1e-14);
    assert!(inner(t.vector("psi2").unwrap().mapv(|z| z.conj()).view(), a.view()).norm() > 1e-3);
}

#[test]
fn generic_state_at_third_order_ep_grows_quadratically() {
    let h = build_diamond(&DiamondRingParams::real(2.0, 1.0)).unwrap();
    let b = pcr_for(&h).unwrap();
    let mut r = rng(11);
    let pl = plan(&b, &random_vector(&mut r, 4)).unwrap();
    assert_eq!(growth_degree(&pl)[b.chains[0].pairs[0]], Some(2));
    assert_eq!(top_degree(&pl), Some(2));
}

#[test]
fn jordan_block_closed_form() {
    let h = mat(&[&[re(0.0), re(1.0)], &[re(0.0), re(0.0)]]);
    let b = pcr_for(&h).unwrap();
    let pl = plan(&b, &unit(2, 1)).unwrap();
    for t in [0.0, 0.3, 2.0, 17.0] {
        let psi = evolve_closed_form(&pl, t);
        assert!((psi[0] - c(0.0, -t)).norm() < 1e-12);
        assert!((psi[1] - re(1.0)).norm() < 1e-12);
    }
}

#[test]
fn identity_at_time_zero() {
    let mut r = rng(2);
    for (name, h) in closure_scenarios() {
        let b = pcr_for(&h).unwrap();
        let psi0 = random_vector(&mut r, h.nrows());
        let pl = plan(&b, &psi0).unwrap();
        assert!(vec_diff(&evolve_closed_form(&pl, 0.0), &psi0) < 1e-12, "{name}");
        assert!(vec_diff(&evolve_oracle(&h, &psi0, 0.0).unwrap(), &psi0) < 1e-14);
    }
}

#[test]
fn diamond_closed_form_matches_oracle() {
    let h = build_diamond(&DiamondRingParams::real(2.0, 1.0)).unwrap();
    let b = pcr_for(&h).unwrap();
    let psi0 = unit(4, 1);
    let pl = plan(&b, &psi0).unwrap();
    let oracle = evolve_oracle(&h, &psi0, 5.0).unwrap();
    assert!(relative_error(&evolve_closed_form(&pl, 5.0), &oracle) <= 1e-8);
}

#[test]
fn stub_closed_form_matches_oracle_at_long_time() {
    let (_, h) = stub_h();
    let b = pcr_for(&h).unwrap();
    let psi0 = unit(h.nrows(), site_b(4));
    let pl = plan(&b, &psi0).unwrap();
    let oracle = evolve_oracle(&h, &psi0, 20.0).unwrap();
    assert!(relative_error(&evolve_closed_form(&pl, 20.0), &oracle) <= 1e-7);
}

#[test]
fn hermitian_oracle_is_unitary() {
    let mut r = rng(5);
    let a = random_matrix(&mut r, 6);
    let h = &a + &adjoint(&a);
    let psi0 = random_vector(&mut r, 6);
    for t in [0.5, 3.0, 40.0] {
        let psi = evolve_oracle(&h, &psi0, t).unwrap();
        assert!((vnorm(&psi) - vnorm(&psi0)).abs() <= 1e-10 * vnorm(&psi0));
    }
}

#[test]
fn oracle_equivalence_on_all_scenarios() {
    let mut r = rng(77);
    for (name, h) in closure_scenarios() {
        let b = pcr_for(&h).unwrap();
        for _ in 0..20 {
            let psi0 = random_vector(&mut r, h.nrows());
            let pl = plan(&b, &psi0).unwrap();
            for t in [0.1, 1.0, 5.0, 20.0] {
                let err = relative_error(&evolve_closed_form(&pl, t), &evolve_oracle(&h, &psi0, t).unwrap());
                assert!(err <= 1e-7, "{name}, t = {t}: {err:e}");
            }
        }
    }
}

#[test]
fn semigroup_property() {
    let mut r = rng(8);
    for (name, h) in closure_scenarios() {
        let b = pcr_for(&h).unwrap();
        let psi0 = random_vector(&mut r, h.nrows());
        let pl = plan(&b, &psi0).unwrap();
        let (t1, t2) = (1.7, 3.1);
        let mid = evolve_closed_form(&pl, t1);
        let pl2 = plan(&b, &mid).unwrap();
        let err = relative_error(&evolve_closed_form(&pl2, t2), &evolve_closed_form(&pl, t1 + t2));
        assert!(err <= 1e-8, "{name}: {err:e}");
    }
}

#[test]
fn real_spectrum_norm_grows_as_power_law() {
    // Single-site initial states, the excitations used throughout the model studies.
    for (name, h) in closure_scenarios() {
        let b = pcr_for(&h).unwrap();
        if b.pairs.iter().any(|p| p.eigenvalue.im.abs() > 1e-9) {
            continue;
        }
        for site in 0..h.nrows() {
            let psi0 = unit(h.nrows(), site);
            let pl = plan(&b, &psi0).unwrap();
            let d = top_degree(&pl).unwrap();
            if d == 0 {
                continue;
            }
            // Limit of ‖Ψ‖/t^d: norm of the summed leading chain terms (all chains share E here).
            let mut lead = Array1::<C64>::zeros(h.nrows());
            let fact: f64 = (1..=d).map(|k| k as f64).product();
            for (k, ch) in b.chains.iter().enumerate() {
                if ch.length > d {
                    let coef = c(0.0, -1.0).powi(d as i32) * pl.chain_prefactors[k][d] / fact;
                    lead = lead + b.pairs[ch.pairs[0]].right.mapv(|v| v * coef);
                }
            }
            let limit = vnorm(&lead);
            for t in (0..=30).map(|k| 50.0 + 5.0 * k as f64) {
                let ratio = vnorm(&evolve_closed_form(&pl, t)) / t.powi(d as i32);
                assert!((ratio / limit - 1.0).abs() <= 0.02, "{name}, site {site}: t = {t}, drift {}", ratio / limit - 1.0);
            }
        }
    }
}

#[test]
fn bounded_branch_keeps_the_norm() {
    let (_, h) = stub_h();
    let b = pcr_for(&h).unwrap();
    // ν₁ plus a flat-band state: both at E = 0, no generalized component.
    let nu1 = &b.pairs[b.chains[0].pairs[0]].right;
    let mu = &b.pairs.iter().find(|p| p.kind == PairKind::Simple && p.eigenvalue.norm() < 1e-9).unwrap().right;
    let psi0 = nu1 + mu;
    let pl = plan(&b, &psi0).unwrap();
    assert_eq!(top_degree(&pl), Some(0));
    assert!(matches!(asymptotic_direction(&pl).unwrap(), Asymptotics::Bounded));
    for k in 0..=100 {
        let n = vnorm(&evolve_closed_form(&pl, k as f64));
        assert!((n - vnorm(&psi0)).abs() <= 1e-9 * vnorm(&psi0));
    }
}

#[test]
fn degenerate_ep_transfer_direction() {
    let h = build_diamond(&DiamondRingParams::imaginary(-1.0, -1.0)).unwrap();
    let b = pcr_for(&h).unwrap();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let psi0 = Array1::from(vec![re(0.0), re(s), re(0.0), re(s)]);
    let pl = plan(&b, &psi0).unwrap();
    match asymptotic_direction(&pl).unwrap() {
        Asymptotics::Converges { direction, degree } => {
            assert_eq!(degree, 1);
            let expected = Array1::from(vec![c(0.0, s), re(0.0), re(s), re(0.0)]);
            assert!((alignment(&direction, &expected) - 1.0).abs() < 1e-10);
        }
        other => panic!("unexpected asymptotics {other:?}"),
    }
}

#[test]
fn exact_eigenstate_is_bounded() {
    let h = build_diamond(&DiamondRingParams::real(2.0, 1.0)).unwrap();
    let b = pcr_for(&h).unwrap();
    let simple = b.pairs.iter().find(|p| p.kind == PairKind::Simple).unwrap().right.clone();
    let pl = plan(&b, &simple).unwrap();
    assert!(matches!(asymptotic_direction(&pl).unwrap(), Asymptotics::Bounded));
}

#[test]
fn complex_spectrum_is_refused() {
    let h = build_diamond(&DiamondRingParams::real(2.0, 2.0)).unwrap();
    let b = pcr_for(&h).unwrap();
    let pl = plan(&b, &unit(4, 0)).unwrap();
    assert!(matches!(asymptotic_direction(&pl), Err(Error::ComplexSpectrum { .. })));
    // Closed form still matches the oracle off the EP.
    let err = relative_error(&evolve_closed_form(&pl, 2.0), &evolve_oracle(&h, &unit(4, 0), 2.0).unwrap());
    assert!(err < 1e-9);
}

#[test]
fn distinct_eigenvalue_chains_are_reported_separately() {
    let h = jordan_matrix(&[(1, 2), (2, 2)]);
    let h = h.mapv(|z| C64::new(z.re, 0.0));
    let b = pcr_for(&h).unwrap();
    let pl = plan(&b, &Array1::from_elem(4, re(1.0))).unwrap();
    match asymptotic_direction(&pl).unwrap() {
        Asymptotics::PerChain { degree, components } => {
            assert_eq!(degree, 1);
            assert_eq!(components.len(), 2);
        }
        other => panic!("unexpected asymptotics {other:?}"),
    }
}

#[test]
fn grids_and_populations() {
    let (_, h) = stub_h();
    let b = pcr_for(&h).unwrap();
    let psi0 = unit(h.nrows(), site_b(4));
    let pl = plan(&b, &psi0).unwrap();
    let times: Vec<f64> = (0..20).map(|k| k as f64 * 0.5).collect();
    let closed = evolve_grid(&pl, &times).unwrap();
    let oracle = oracle_grid(&h, &psi0, &times).unwrap();
    for k in 0..times.len() {
        let total: f64 = closed.populations[k].iter().sum();
        assert!((total - closed.norms[k].powi(2)).abs() < 1e-12 * total.max(1.0));
        assert!((closed.norms[k] - oracle.norms[k]).abs() < 1e-8 * oracle.norms[k]);
    }
    assert!(evolve_grid(&pl, &[1.0, 1.0]).is_err());
    assert!(oracle_grid(&h, &psi0, &[2.0, 1.0]).is_err());
}

#[test]
fn single_precision_plan() {
    let h = build_diamond(&DiamondRingParams::real(2.0, 1.0)).unwrap().mapv(|z| num_complex::Complex::<f32>::new(z.re as f32, z.im as f32));
    let b = pcr_for(&h).unwrap();
    let mut psi0 = Array1::zeros(4);
    psi0[1] = num_complex::Complex::<f32>::new(1.0, 0.0);
    let pl = plan(&b, &psi0).unwrap();
    let a = evolve_closed_form(&pl, 1.0);
    let o = evolve_oracle(&h, &psi0, 1.0).unwrap();
    assert!(relative_error(&a, &o) < 1e-3);
}

fn gauge_shift(s: &mut JordanStructure<f64>, alpha: C64) {
    for chains in s.chains.iter_mut() {
        for ch in chains.iter_mut() {
            for k in (1..ch.length).rev() {
                let lower = ch.right_chain[k - 1].mapv(|z| z * alpha);
                ch.right_chain[k] = &ch.right_chain[k] + &lower;
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gauge_shift_leaves_dynamics_unchanged(scenario in 0usize..10, mag in 0.0f64..10.0, arg in -3.14f64..3.14, seed in 0u64..1000) {
        let (_, h) = closure_scenarios().swap_remove(scenario);
        let tol = Tolerances::for_matrix(&h);
        let mut s = detect_structure_with(&h, &tol).unwrap();
        let reference = build_pcr(&h, &s, &tol).unwrap();
        gauge_shift(&mut s, C64::from_polar(mag, arg));
        let shifted = build_pcr(&h, &s, &tol).unwrap();
        let psi0 = random_vector(&mut rng(seed), h.nrows());
        let (pa, pb) = (plan(&reference, &psi0).unwrap(), plan(&shifted, &psi0).unwrap());
        for t in [0.5, 3.0, 12.0] {
            let err = relative_error(&evolve_closed_form(&pb, t), &evolve_closed_form(&pa, t));
            prop_assert!(err <= 1e-9, "t = {}: {:e}", t, err);
        }
    }
}
