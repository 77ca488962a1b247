mod common;

use common::{reference, SEED};
use patchkpp::eigen::{critical_patch_length, lambda1_value};
use patchkpp::pde::Operator;
use patchkpp::steady::{
    attraction_check, compute_steady_state, elliptic_residual, verify_uniqueness, AttractionOptions, AttractionTarget,
    SteadyOptions, PROFILE_HEADER,
};
use patchkpp::{Error, Landscape, Reaction};

fn base() -> Landscape {
    Landscape::new(2.0, 1.0, 1.0, 0.5, 0.4).unwrap()
}

#[test]
fn homogeneous_logistic_steady_state_is_one() {
    for (d, m) in [(1.0, 1.0), (0.3, 2.0)] {
        let ls = Landscape::homogeneous(1.0, 0.5, d).unwrap();
        let r = Reaction::logistic(m, m).unwrap();
        let s = compute_steady_state(&ls, &r, &SteadyOptions::default()).unwrap();
        assert!(s.exists && s.residual < 1e-10);
        assert!(s.p.iter().all(|&v| (v - m).abs() < 1e-10), "d {d} m {m}");
    }
}

#[test]
fn polished_profile_solves_the_discrete_problem() {
    let (ls, r) = reference();
    let s = compute_steady_state(&ls, &r, &SteadyOptions::default()).unwrap();
    assert!(s.exists && s.residual < 1e-8, "{}", s.residual);
    // Recompute the residual independently, interface rows included.
    let op = Operator::assemble(&s.grid, &ls, 0.0);
    let res = elliptic_residual(&op, &r, &s.p);
    let worst = res.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(worst < 1e-8, "{worst}");
    assert!(s.min_p > 0.0 && s.max_p <= r.max_cap() + 1e-12);
}

#[test]
fn three_starts_reach_the_same_profile() {
    let (ls, r) = reference();
    let opts = SteadyOptions::default();
    let s = compute_steady_state(&ls, &r, &opts).unwrap();
    let u = verify_uniqueness(&s, &ls, &r, &opts, SEED).unwrap();
    assert!(u.max_gap < 1e-7, "{:?}", u.gaps);
    assert!(u.monotone_from_above, "{}", u.increase_from_above);
    assert!(u.monotone_from_below, "{}", u.decrease_from_below);
    assert!(u.kappa > 0.0);
}

#[test]
fn persistence_matches_the_sign_of_lambda1() {
    let base = Landscape::new(2.0, 1.0, 1.0, 0.5, 0.4).unwrap();
    for f2 in [-0.5, -1.0, -2.0] {
        let r = Reaction::logistic(1.0, f2).unwrap();
        let l1c = critical_patch_length(&base, &r).unwrap().l1c;
        let at_threshold = lambda1_value(&base.with_l1(l1c).unwrap(), &r).unwrap();
        assert!(at_threshold.abs() < 1e-8, "{at_threshold}");
        for l1 in [1.0, 1.5, 2.5, 3.5] {
            let ls = base.with_l1(l1).unwrap();
            let lam = lambda1_value(&ls, &r).unwrap();
            let s = compute_steady_state(&ls, &r, &SteadyOptions::default()).unwrap();
            assert_eq!(s.exists, lam < 0.0, "f2 {f2} l1 {l1} lambda1 {lam}");
            assert_eq!(lam < 0.0, l1 > l1c);
            if s.exists {
                assert!(s.min_p > 1e-3, "f2 {f2} l1 {l1}: min p {}", s.min_p);
            }
        }
    }
}

#[test]
fn extinction_below_the_critical_length() {
    let r = Reaction::logistic(1.0, -1.0).unwrap();
    let l1c = critical_patch_length(&base(), &r).unwrap().l1c;
    let s = compute_steady_state(&base().with_l1(0.8 * l1c).unwrap(), &r, &SteadyOptions::default()).unwrap();
    assert!(!s.exists && s.p.is_empty());
    let s = compute_steady_state(&base().with_l1(2.0 * l1c).unwrap(), &r, &SteadyOptions::default()).unwrap();
    assert!(s.exists && s.min_p > 0.0);
}

fn attraction() -> AttractionOptions {
    AttractionOptions {
        n_tiles: 12,
        nodes_per_patch: 16,
        dt: 0.05,
        region: 6.0,
    }
}

#[test]
fn bumps_converge_to_the_profile_when_persistent() {
    let (ls, r) = reference();
    let bump = |x: f64| 0.3 * (1.0 - (x / 1.5).powi(2)).max(0.0);
    // Relaxation behind the front is slow: 2.8e-3 at t = 80, 3e-4 at t = 120.
    let rep = attraction_check(&ls, &r, bump, 140.0, &attraction()).unwrap();
    assert_eq!(rep.target, AttractionTarget::SteadyState);
    assert!(rep.distance < 1e-3, "{}", rep.distance);
}

#[test]
fn solutions_vanish_when_not_persistent() {
    let ls = base().with_l1(0.8).unwrap();
    let r = Reaction::logistic(1.0, -1.0).unwrap();
    let rep = attraction_check(&ls, &r, |x| (1.0 - (x / 4.0).powi(2)).max(0.0), 120.0, &attraction()).unwrap();
    assert_eq!(rep.target, AttractionTarget::Zero);
    assert!(rep.sup_norm < 1e-4, "{}", rep.sup_norm);
}

#[test]
fn periodic_profile_matches_a_wide_window() {
    // Starting from p itself, the truncated problem only loses mass near its ends.
    let (ls, r) = reference();
    let opts = attraction();
    let s = compute_steady_state(
        &ls,
        &r,
        &SteadyOptions {
            nodes_per_patch: opts.nodes_per_patch,
            ..SteadyOptions::default()
        },
    )
    .unwrap();
    let grid = patchkpp::pde::Grid::truncated(&ls, opts.n_tiles, opts.nodes_per_patch).unwrap();
    let p = patchkpp::steady::tile_values(&s, &ls, &grid);
    let at = |x: f64| p[grid.find(x, 1e-9).unwrap()];
    let rep = attraction_check(&ls, &r, at, 5.0, &opts).unwrap();
    assert!(rep.distance < 1e-9, "{}", rep.distance);
}

#[test]
fn profile_csv_has_documented_header() {
    let (ls, r) = reference();
    let s = compute_steady_state(&ls, &r, &SteadyOptions { nodes_per_patch: 8, ..SteadyOptions::default() }).unwrap();
    let mut buf = Vec::new();
    s.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(PROFILE_HEADER));
    assert_eq!(lines.count(), s.p.len());
}

#[test]
fn uniqueness_needs_a_persistent_state() {
    let ls = base().with_l1(0.8).unwrap();
    let r = Reaction::logistic(1.0, -1.0).unwrap();
    let opts = SteadyOptions::default();
    let s = compute_steady_state(&ls, &r, &opts).unwrap();
    assert!(matches!(verify_uniqueness(&s, &ls, &r, &opts, SEED), Err(Error::NotPersistent(_))));
}
