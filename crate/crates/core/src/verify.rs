//! Self-check battery for one parameter set: every module re-verifies its
//! own postconditions at run time.  Used by the CLI `verify-all` command.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bubble::{hardy_sobolev_map, kelvin_transform, soliton_profile, Bubble};
use crate::groundstate::{
    bubble_integrals, ground_state_report, minimize_f, vector_rayleigh_quotient_spanned,
};
use crate::ode::{
    picard_solve, residual_with_derivatives, InitialData, PicardOptions, ScalarSystem, TwoSystem,
};
use crate::params::{ProblemParams, RegimeTag};
use crate::spectrum::{linearized_decouple, nondegeneracy_check, radial_eigen, GridSpec};
use crate::sync::{solve_sync_2, sync_residual_2_division_form, Branch};

/// One named check with its outcome and a human-readable detail line.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &str, passed: bool, detail: String) -> Check {
    Check { name: name.to_string(), passed, detail }
}

/// Runs the whole battery; random probes are seeded for reproducibility.
pub fn verify_all(params: &ProblemParams, seed: u64) -> Vec<Check> {
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    out.push(check(
        "params",
        true,
        format!(
            "p = {:.12}, gamma = {:.12}, lambda = {:.12}, regime {:?}",
            params.p,
            params.gamma,
            params.lambda,
            params.regime().tag
        ),
    ));

    // closed-form bubble residual through the analytic derivatives
    let bubble = Bubble::new(params.clone(), 1.0).expect("mu = 1");
    let (lo, hi) = bubble.default_window();
    let ts: Vec<f64> = (0..200).map(|i| lo + (hi - lo) * i as f64 / 199.0).collect();
    let phi: Vec<f64> = ts.iter().map(|&t| bubble.phi(t)).collect();
    let d2: Vec<f64> = ts.iter().map(|&t| bubble.d2phi(t)).collect();
    let res = residual_with_derivatives(
        &ScalarSystem(params.clone()),
        &ts,
        &[phi.clone()],
        &[d2.clone()],
    );
    out.push(check("bubble-residual", res < 1e-10, format!("scalar residual {res:.3e}")));

    // soliton form vs closed form
    let peak = bubble.phi(0.0);
    let soliton_dev = ts
        .iter()
        .map(|&t| (bubble.phi_closed_form(t) - soliton_profile(params, t)).abs())
        .fold(0.0f64, f64::max)
        / peak;
    out.push(check(
        "soliton-oracle",
        soliton_dev < 1e-12,
        format!("max deviation {soliton_dev:.3e} of peak"),
    ));

    // Kelvin involution and mu-inversion
    let prof3 = Bubble::new(params.clone(), 3.0).unwrap().profile_auto();
    let invol = kelvin_transform(&kelvin_transform(&prof3));
    let kelvin_dev = prof3
        .values()
        .iter()
        .zip(invol.values())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0f64, f64::max);
    let third = Bubble::new(params.clone(), 1.0 / 3.0).unwrap();
    let reflected = kelvin_transform(&prof3);
    let mu_dev = reflected
        .t_grid()
        .iter()
        .zip(reflected.values())
        .map(|(&t, &v)| (v - third.phi_closed_form(t)).abs())
        .fold(0.0f64, f64::max)
        / peak;
    out.push(check(
        "kelvin",
        kelvin_dev == 0.0 && mu_dev < 1e-12,
        format!("involution {kelvin_dev:.1e}, mu-inversion {mu_dev:.3e}"),
    ));

    // Hardy-Sobolev round trip
    let gamma_hs = 0.5 * params.gamma;
    match hardy_sobolev_map(params, gamma_hs) {
        Ok(map) => {
            let prof = bubble.profile_auto();
            let fwd = map.forward(&prof).unwrap();
            let back = map.inverse(&fwd).unwrap();
            let rt = prof
                .values()
                .iter()
                .zip(back.values())
                .map(|(x, y)| (x - y).abs())
                .fold(0.0f64, f64::max);
            let rfac = (fwd.eval_r(2.0).unwrap() / prof.eval_r(2.0).unwrap()
                - 2f64.powf(map.delta))
            .abs();
            out.push(check(
                "hardy-sobolev",
                rt == 0.0 && rfac < 1e-12,
                format!("round trip {rt:.1e}, r-space factor defect {rfac:.3e}"),
            ));
        }
        Err(e) => out.push(check("hardy-sobolev", false, format!("{e}"))),
    }

    // synchronization roots
    let solve = solve_sync_2(params);
    let positive: Vec<_> = solve
        .roots
        .iter()
        .filter(|r| matches!(r.branch, Branch::Positive { .. }))
        .collect();
    let worst_mult = solve.roots.iter().map(|r| r.residual).fold(0.0f64, f64::max);
    let worst_div = positive
        .iter()
        .map(|r| sync_residual_2_division_form(params, r.c[0], r.c[1]))
        .fold(0.0f64, f64::max);
    out.push(check(
        "sync-roots",
        worst_mult < 1e-12 && worst_div < 1e-12,
        format!(
            "{} positive root(s), residuals: multiplied {worst_mult:.3e}, division {worst_div:.3e}",
            positive.len()
        ),
    ));

    // synchronized pair solves the full system (analytic derivatives)
    if let Some(root) = positive.first() {
        let (c1, c2) = (root.c[0], root.c[1]);
        let phis = [
            phi.iter().map(|v| c1 * v).collect::<Vec<_>>(),
            phi.iter().map(|v| c2 * v).collect::<Vec<_>>(),
        ];
        let d2s = [
            d2.iter().map(|v| c1 * v).collect::<Vec<_>>(),
            d2.iter().map(|v| c2 * v).collect::<Vec<_>>(),
        ];
        let res = residual_with_derivatives(
            &TwoSystem(params.clone()),
            &ts,
            &phis.to_vec(),
            &d2s.to_vec(),
        );
        out.push(check(
            "synchronized-residual",
            res < 1e-8,
            format!("(c1 U, c2 U) full-system residual {res:.3e}"),
        ));

        // quick Picard reproduction
        let k0 = bubble.value_at_origin();
        let init = InitialData::new(vec![c1 * k0, c2 * k0]).unwrap();
        let opts = PicardOptions { r_max: 5.0, n_grid: 16_384, ..Default::default() };
        match picard_solve(&TwoSystem(params.clone()), &init, &opts) {
            Ok(sol) => {
                let mut worst: f64 = 0.0;
                for (j, &rj) in sol.r.iter().enumerate().skip(1) {
                    let exact = c1 * bubble.value(rj).unwrap();
                    worst = worst.max(((sol.u[0][j] - exact) / exact).abs());
                }
                out.push(check(
                    "picard-reproduction",
                    worst < 1e-4,
                    format!(
                        "sup rel deviation {worst:.3e} over [0, 5] ({} windows, {} iterations)",
                        sol.report.windows, sol.report.iterations
                    ),
                ));
            }
            Err(e) => out.push(check("picard-reproduction", false, format!("{e}"))),
        }
    }

    // coupling function minimum and ground-state block
    let regime = params.regime();
    match regime.tag {
        RegimeTag::SymmetryBreaking => {
            let refused = crate::groundstate::sharp_ckn_constant(params).is_err();
            out.push(check(
                "sharp-constant-refusal",
                refused,
                "symmetry-breaking regime: radial sharp constant correctly refused".into(),
            ));
        }
        _ => {
            let m = minimize_f(params);
            match ground_state_report(params) {
                Ok(rep) => {
                    let energy_ok = (rep.energy
                        - (0.5 - 1.0 / params.p)
                            * (rep.f_min * rep.s).powf(params.p / (params.p - 2.0)))
                    .abs()
                        <= 1e-12 * rep.energy.abs();
                    let sbar_ok = (rep.s_bar - rep.s * rep.f_min).abs() <= 1e-12 * rep.s_bar;
                    out.push(check(
                        "ground-state",
                        energy_ok && sbar_ok,
                        format!(
                            "f_min = {:.12} ({:?}), S = {:.10}, S_bar = {:.10}, E = {:.10}",
                            rep.f_min, rep.case_label, rep.s, rep.s_bar, rep.energy
                        ),
                    ));

                    // Nehari identity and dilation invariance
                    let (nl1, dir1) = bubble_integrals(params, 1.0).unwrap();
                    let (nl2, _) = bubble_integrals(params, 2.0).unwrap();
                    let nehari = ((nl1 - dir1) / nl1).abs();
                    let dil = ((nl2 - nl1) / nl1).abs();
                    out.push(check(
                        "sharp-constant-quadrature",
                        nehari < 1e-10 && dil < 1e-10,
                        format!("Nehari defect {nehari:.3e}, dilation defect {dil:.3e}"),
                    ));

                    // sampled vector Rayleigh quotients
                    let mut worst_margin = f64::INFINITY;
                    let mut ok = true;
                    for _ in 0..200 {
                        let x1: f64 = rng.gen_range(0.02..1.0);
                        let x2: f64 = rng.gen_range(0.02..1.0);
                        let mu1 = rng.gen_range(-0.7f64..0.7).exp();
                        let mu2 = rng.gen_range(-0.7f64..0.7).exp();
                        let q = vector_rayleigh_quotient_spanned(params, x1, x2, mu1, mu2)
                            .unwrap();
                        worst_margin = worst_margin.min(q / rep.s_bar - 1.0);
                        ok &= q >= rep.s_bar * (1.0 - 1e-6);
                    }
                    out.push(check(
                        "vector-quotients",
                        ok,
                        format!("200 spanned quotients >= S_bar, min margin {worst_margin:.3e}"),
                    ));
                    let _ = m;
                }
                Err(e) => out.push(check("ground-state", false, format!("{e}"))),
            }

            // spectrum block needs b strictly above the curve for a < 0
            if regime.tag == RegimeTag::Symmetric {
                match radial_eigen(params, 3, &GridSpec { n: 2000, ..Default::default() }) {
                    Ok(res) => {
                        let e1 = (res.eigenvalues[0] - 1.0).abs();
                        let e2 = (res.eigenvalues[1] - (params.p - 1.0)).abs();
                        let margin = res.eigenvalues[2] - (params.p - 1.0);
                        out.push(check(
                            "radial-spectrum",
                            e1 < 1e-3 && e2 < 1e-3 && margin > 0.0,
                            format!(
                                "lambda_1 off by {e1:.2e}, lambda_2 off by {e2:.2e}, \
                                 next margin {margin:.3}",
                            ),
                        ));
                    }
                    Err(e) => out.push(check("radial-spectrum", false, format!("{e}"))),
                }

                let mut nd_ok = true;
                let mut detail = String::new();
                for r in &solve.roots {
                    match nondegeneracy_check(params, r.c[0], r.c[1], 1e-10) {
                        Ok(rep) => {
                            if rep.sufficient_nu_bound && !rep.nondegenerate {
                                nd_ok = false;
                            }
                            if !rep.semi_trivial {
                                let dec =
                                    linearized_decouple(params, r.c[0], r.c[1]).unwrap();
                                let id1 = (dec.eigenvalues.0 - (params.p - 1.0)).abs();
                                let id2 = (dec.eigenvalues.1
                                    - (params.p - 1.0 - rep.lhs))
                                    .abs();
                                if id1 > 1e-10 || id2 > 1e-10 {
                                    nd_ok = false;
                                }
                            }
                        }
                        Err(e) => {
                            nd_ok = false;
                            detail = format!("{e}");
                        }
                    }
                }
                out.push(check(
                    "nondegeneracy",
                    nd_ok,
                    if detail.is_empty() {
                        format!("{} roots checked", solve.roots.len())
                    } else {
                        detail
                    },
                ));
            }
        }
    }

    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn battery_passes_on_reference_params() {
        let p = ProblemParams::new(3, 0.0, 0.25, 0.8, 2.0, 2.0).unwrap();
        let checks = verify_all(&p, 1234);
        for c in &checks {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
        assert!(checks.len() >= 10);
    }

    #[test]
    fn battery_handles_breaking_regime() {
        let b_fs = crate::params::felli_schneider(3, -1.0);
        let b = -1.0 + 0.3 * (b_fs + 1.0);
        let p_exp = 6.0 / (1.0 + 2.0 * (b + 1.0));
        let p = ProblemParams::new(3, -1.0, b, 1.0, p_exp / 2.0, p_exp / 2.0).unwrap();
        let checks = verify_all(&p, 99);
        assert!(checks.iter().any(|c| c.name == "sharp-constant-refusal" && c.passed));
        for c in &checks {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
