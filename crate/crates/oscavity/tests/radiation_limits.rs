//! Cross-checks of the assembled energy density against a direct, unpruned
//! summation of the bounce series, plus continuity in the temperature limit.

use oscavity::dephasing::dephasing;
use oscavity::radiation::{background_density, thermal_kernel, DensityEvaluator};
use oscavity::{validate_config, CavityConfig, RawConfig, TruncationPolicy};

const PI: f64 = std::f64::consts::PI;

fn build(k: u32, r1: f64, r2: f64, alpha_eff: f64, theta: f64) -> CavityConfig {
    validate_config(&RawConfig {
        k: Some(k),
        omega: Some(1.0),
        alpha_eff: Some(alpha_eff),
        r1: Some(r1),
        r2: Some(r2),
        theta: Some(theta),
        ..Default::default()
    })
    .unwrap()
}

/// Plain double-loop assembly of the density: every series summed to a fixed
/// depth with no tables, no pruning, and separations formed directly as
/// differences of dephasing values.
fn brute_force_density(cfg: &CavityConfig, t: f64, n_max: i64) -> f64 {
    let om2 = cfg.omega * cfg.omega;
    let th = cfg.theta;
    let th2 = th * th;
    let kern = |delta: f64| thermal_kernel(delta, th).unwrap();

    let f = |p: i64| dephasing(t, p, cfg).unwrap();
    let fm1 = f(-1);

    // diagonal families
    let diag = |fp: f64| om2 * (fp * fp - 1.0) + th2 * fp * fp;
    let mut acc = cfg.r2 * diag(fm1.derivative);
    for n in 0..=n_max {
        let w = cfg.r.powi(2 * n as i32);
        acc += cfg.t1 * cfg.t2 * w * diag(f(2 * n).derivative);
        acc += cfg.t2 * cfg.t2 * cfg.r1 * w * diag(f(2 * n + 1).derivative);
    }
    let mut e = acc / (48.0 * PI);

    // direct-reflection cross terms
    for n in 0..=n_max {
        let odd = f(2 * n + 1);
        e += cfg.t2 / (8.0 * PI)
            * cfg.r.powi(n as i32 + 1)
            * fm1.derivative
            * odd.derivative
            * kern(fm1.value - odd.value);
    }

    // interference families, full n != m double sums
    let mut even_pairs = 0.0;
    let mut odd_pairs = 0.0;
    for n in 0..=n_max {
        for m in 0..=n_max {
            if n == m {
                continue;
            }
            let w = cfg.r.powi((n + m) as i32);
            let (en, em) = (f(2 * n), f(2 * m));
            even_pairs += w * en.derivative * em.derivative * kern(en.value - em.value);
            let (on, omm) = (f(2 * n + 1), f(2 * m + 1));
            odd_pairs += w * on.derivative * omm.derivative * kern(on.value - omm.value);
        }
    }
    e -= cfg.t1 * cfg.t2 / (16.0 * PI) * even_pairs;
    e -= cfg.t2 * cfg.t2 * cfg.r1 / (16.0 * PI) * odd_pairs;
    e
}

#[test]
fn series_assembly_matches_direct_summation_at_low_finesse() {
    // r = 0.6 makes 80 bounces plenty for 1e-14 series tails, so the direct
    // sum is exact for comparison purposes; both mirror splits are covered.
    for (r1, r2) in [(1.0, 0.36), (0.9, 0.4)] {
        for k in [1u32, 2, 3] {
            for theta in [0.0, 0.7] {
                let cfg = build(k, r1, r2, 0.5, theta);
                let ev = DensityEvaluator::new(&cfg, &TruncationPolicy::default()).unwrap();
                let scale = (cfg.omega * cfg.omega + theta * theta) / (48.0 * PI);
                let period = cfg.period();
                for i in 0..9 {
                    let t = (0.03 + 0.97 * i as f64 / 9.0) * period;
                    let direct = brute_force_density(&cfg, t, 80);
                    let lib = ev.density_at(t).unwrap().e_u;
                    assert!(
                        (direct - lib).abs() <= 3e-11 * scale,
                        "K={k} R1={r1} R2={r2} theta={theta} t={t}: direct {direct} vs assembled {lib}"
                    );
                }
            }
        }
    }
}

#[test]
fn vacuum_is_the_continuous_zero_temperature_limit() {
    // strongly driven output-coupled cavity, near-edge and mid-period points
    let cold = build(3, 1.0, 0.81, 0.9, 1e-8);
    let vac = build(3, 1.0, 0.81, 0.9, 0.0);
    let pol = TruncationPolicy::default();
    let ev_cold = DensityEvaluator::new(&cold, &pol).unwrap();
    let ev_vac = DensityEvaluator::new(&vac, &pol).unwrap();
    let period = vac.period();
    for i in 0..16 {
        let t = (i as f64 + 0.31) / 16.0 * period;
        let a = ev_cold.density_at(t).unwrap().e_u;
        let b = ev_vac.density_at(t).unwrap().e_u;
        let scale = b.abs().max(vac.omega * vac.omega / (48.0 * PI));
        assert!(
            (a - b).abs() <= 1e-5 * scale,
            "t={t}: theta=1e-8 gives {a}, vacuum gives {b}"
        );
    }
}

#[test]
fn high_temperature_suppresses_every_interference_term() {
    // At theta = 50 Omega the kernel underflows for every separation of at
    // least one round trip, so the density must equal the diagonal families
    // alone; pair_cap = 0 disables the interference sums explicitly.
    let cfg = build(2, 1.0, 0.64, 0.8, 50.0);
    let full = DensityEvaluator::new(&cfg, &TruncationPolicy::default()).unwrap();
    let diag_only = DensityEvaluator::new(
        &cfg,
        &TruncationPolicy {
            pair_cap: Some(0),
            ..Default::default()
        },
    )
    .unwrap();
    let period = cfg.period();
    for i in 0..12 {
        let t = (i as f64 + 0.5) / 12.0 * period;
        let a = full.density_at(t).unwrap().e_u;
        let b = diag_only.density_at(t).unwrap().e_u;
        assert!(
            (a - b).abs() <= 1e-12 * a.abs().max(background_density(cfg.theta)),
            "t={t}: full {a} vs diagonal-only {b}"
        );
    }
}
