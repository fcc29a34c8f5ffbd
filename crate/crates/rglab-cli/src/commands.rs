//! Subcommand pipelines. Each writes its CSV tables and a summary JSON into
//! the output directory.

use std::path::PathBuf;

use nalgebra::DMatrix;
use num_rational::BigRational;
use rand::Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use rglab::frd::{self, BumpProfile};
use rglab::gaussian::Polynomial;
use rglab::hierarchical;
use rglab::meanfield::{self, MeanFieldState};
use rglab::nonpert::{self, BlockFunction};
use rglab::pertflow;
use rglab::rng;
use rglab::scalar::rat;
use rglab::walks_susy::forms::{self, Form};
use rglab::walks_susy::{bubble, saw, walks};
use rglab::{ModelParams, Scalar};

use crate::config::{req, Engine, RunConfig};
use crate::emit::{jnum, num, Output};
use crate::CliError;

type Q = BigRational;

pub fn defaults(cmd: &str) -> RunConfig {
    let base = RunConfig { seed: Some(0), out: Some(PathBuf::from("out")), ..Default::default() };
    let d4 = RunConfig { d: Some(4), l: Some(2), n: Some(1), m2: Some(0.0), ..base.clone() };
    match cmd {
        "hier" => RunConfig { jmax: Some(20), ..d4 },
        "frd" => RunConfig { d: Some(2), l: Some(2), m2: Some(1.0), jmax: Some(3), tol: Some(1e-6), ..base },
        "flow" => RunConfig { big_n: Some(1000), g0: Some(0.05), jmax: Some(30), ..d4 },
        "critical" => RunConfig { big_n: Some(1000), g0: Some(0.02), jmax: Some(200), tol: Some(1e-8), ..d4 },
        "chi" => RunConfig {
            big_n: Some(1000),
            g0: Some(0.05),
            b: Some(1.0),
            eps_min: Some(1e-10),
            eps_max: Some(1e-2),
            eps_points: Some(17),
            ..d4
        },
        "nonpert" => RunConfig {
            d: Some(1),
            l: Some(2),
            big_n: Some(4),
            n: Some(1),
            m2: Some(1.0),
            g0: Some(0.1),
            nu0: Some(0.0),
            engine: Some(Engine::Quadrature),
            nodes: Some(nonpert::DEFAULT_NODES),
            samples: Some(20_000),
            ..base
        },
        "oracle" => RunConfig {
            d: Some(1),
            l: Some(2),
            big_n: Some(2),
            n: Some(1),
            m2: Some(0.3),
            g0: Some(0.5),
            nu0: Some(-0.2),
            order: Some(64),
            tol: Some(1e-6),
            ..base
        },
        "meanfield" => RunConfig {
            n: Some(1),
            beta: Some(vec![0.5, 0.9, 0.99, 1.0, 1.01, 1.1, 1.5]),
            h: Some(vec![0.0, 1e-6, 1e-3, 0.1]),
            ..base
        },
        "walks" => RunConfig { d: Some(2), nmax: Some(10), samples: Some(20_000), ..base },
        "susy-check" => RunConfig { tol: Some(1e-10), ..base },
        _ => base,
    }
}

pub fn dispatch(cmd: &str, cfg: &RunConfig) -> Result<(), CliError> {
    let mut out = Output::create(cfg.out.as_deref().unwrap_or(std::path::Path::new("out")))?;
    match cmd {
        "hier" => hier(cfg, &mut out),
        "frd" => frd(cfg, &mut out),
        "flow" => flow(cfg, &mut out),
        "critical" => critical(cfg, &mut out),
        "chi" => chi(cfg, &mut out),
        "nonpert" => nonpert(cfg, &mut out),
        "oracle" => oracle(cfg, &mut out),
        "meanfield" => meanfield(cfg, &mut out),
        "walks" => walks(cfg, &mut out),
        "susy-check" => susy_check(cfg, &mut out),
        _ => Err(CliError::Validation(format!("unknown subcommand {cmd}"))),
    }
}

fn params(cfg: &RunConfig) -> Result<ModelParams, CliError> {
    Ok(ModelParams::new(req!(cfg, d), req!(cfg, l), cfg.big_n.unwrap_or(1000), req!(cfg, n), req!(cfg, m2))?)
}

fn gate(ok: bool, msg: String) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Gate(msg))
    }
}

fn hier(cfg: &RunConfig, out: &mut Output) -> Result<(), CliError> {
    let p = params(cfg)?;
    let jmax: usize = req!(cfg, jmax);
    let rows: Vec<Vec<String>> = (0..jmax)
        .map(|j| {
            let m = hierarchical::block_moments::<f64>(p.d, p.l, j, &p.m2);
            // row j describes C_{j+1}
            let g = hierarchical::gamma::<f64>(p.l, j + 1, &p.m2);
            vec![j.to_string(), num(m.c), num(m.c2), num(m.c3), num(m.c4), num(g), num(hierarchical::vartheta(p.l, j, p.m2))]
        })
        .collect();
    out.csv("hier.csv", &["j", "c", "c2", "c3", "c4", "gamma", "vartheta"], &rows)?;
    let green = hierarchical::green_diag(p.d, p.l, p.m2, 400)
        .map(|s| json!({"value": jnum(s.value), "tail_bound": jnum(s.tail_bound), "terms": s.terms}))
        .unwrap_or(Value::Null);
    let bubble = hierarchical::hier_bubble(p.d, p.l, p.m2, 400)
        .map(|b| {
            json!({
                "value": jnum(b.sum.value),
                "tail_bound": jnum(b.sum.tail_bound),
                "ratio_log": b.ratio_log.map(jnum),
                "asymptote": b.asymptote.map(jnum),
            })
        })
        .unwrap_or(Value::Null);
    let res = json!({
        "green_diag": green,
        "bubble": bubble,
        "mass_scale": hierarchical::mass_scale(p.l, p.m2),
    });
    out.summary("hier.json", "hier", cfg, res)
}

fn frd(cfg: &RunConfig, out: &mut Output) -> Result<(), CliError> {
    let (d, l, m2): (usize, usize, f64) = (req!(cfg, d), req!(cfg, l), req!(cfg, m2));
    let jmax: usize = req!(cfg, jmax);
    let tol: f64 = req!(cfg, tol);
    if d == 0 || d > 3 {
        return Err(CliError::Validation("frd supports 1 <= d <= 3".into()));
    }
    let profile = BumpProfile::standard();
    let slices = (1..=jmax).map(|j| frd::frd_slice(j, d, l, m2, profile.clone())).collect::<Result<Vec<_>, _>>()?;
    let mut header: Vec<String> = vec!["j".into()];
    header.extend((1..=d).map(|i| format!("x{i}")));
    header.push("value".into());
    let mut rows = Vec::new();
    for s in &slices {
        for x in s.support() {
            let mut r = vec![s.j.to_string()];
            r.extend(x.iter().map(|v| v.to_string()));
            r.push(num(s.kernel_at(&x)));
            rows.push(r);
        }
    }
    let h: Vec<&str> = header.iter().map(String::as_str).collect();
    out.csv("frd_kernels.csv", &h, &rows)?;

    let jsum = 40;
    let mut rng = rng::stream(cfg.seed.unwrap_or(0), &[0]);
    let ks: Vec<Vec<f64>> = (0..20)
        .map(|_| (0..d).map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)).collect())
        .collect();
    let sym: Vec<(f64, f64)> = ks
        .par_iter()
        .map(|k| (frd::symbol_partial_sum(jsum, l, k, m2, &profile), 1.0 / (frd::lattice_symbol(k) + m2)))
        .collect();
    let mut header: Vec<String> = (1..=d).map(|i| format!("k{i}")).collect();
    header.extend(["partial_sum", "exact", "residual"].map(String::from));
    let rows: Vec<Vec<String>> = ks
        .iter()
        .zip(&sym)
        .map(|(k, &(s, e))| {
            let mut r: Vec<String> = k.iter().map(|&v| num(v)).collect();
            r.extend([num(s), num(e), num((s - e).abs())]);
            r
        })
        .collect();
    let h: Vec<&str> = header.iter().map(String::as_str).collect();
    out.csv("frd_symbols.csv", &h, &rows)?;
    let max_res = sym.iter().map(|(s, e)| (s - e).abs()).fold(0.0, f64::max);
    let radii: Vec<usize> = slices.iter().map(|s| s.radius).collect();
    let res = json!({
        "profile_scale": jnum(profile.a),
        "radii": radii,
        "symbol_scales": jsum,
        "max_symbol_residual": jnum(max_res),
        "tolerance": tol,
    });
    out.summary("frd.json", "frd", cfg, res)?;
    gate(max_res < tol, format!("symbol residual {max_res:e} exceeds {tol:e}"))
}

fn flow(cfg: &RunConfig, out: &mut Output) -> Result<(), CliError> {
    let p = params(cfg)?;
    let g0: f64 = req!(cfg, g0);
    let jmax: usize = req!(cfg, jmax);
    let mu0 = match cfg.mu0 {
        Some(m) => m,
        None => pertflow::mu0_backward(g0, &p, 4000)?.mu0,
    };
    let t = pertflow::run_flow(g0, mu0, &p, jmax, None);
    let rows: Vec<Vec<String>> = (0..t.g.len())
        .map(|j| {
            let k = t.coeffs.get(j).copied().unwrap_or_else(|| pertflow::coeffs(j, &p));
            vec![j.to_string(), num(t.g[j]), num(t.mu[j]), num(t.u[j]), num(k.beta), num(k.eta), num(k.xi), num(k.vartheta)]
        })
        .collect();
    out.csv("flow.csv", &["j", "g", "mu", "u", "beta", "eta", "xi", "vartheta"], &rows)?;
    let res = json!({
        "mu0": jnum(mu0),
        "mu0_from": if cfg.mu0.is_some() { "config" } else { "mu0_backward" },
        "steps": t.len(),
        "termination": format!("{:?}", t.termination),
        "replay_residual": jnum(t.replay_residual()),
    });
    out.summary("flow.json", "flow", cfg, res)
}

fn critical(cfg: &RunConfig, out: &mut Output) -> Result<(), CliError> {
    let p = params(cfg)?;
    let g0: f64 = req!(cfg, g0);
    let jmax: usize = req!(cfg, jmax);
    let tol: f64 = req!(cfg, tol);
    let c0 = cfg.c0.unwrap_or(4.0 * (p.n as f64 + 2.0));
    let back = pertflow::mu0_backward(g0, &p, 4000)?;
    let bis = pertflow::mu0_bisection(g0, &p, jmax, c0)?;
    let diff = (back.mu0 - bis).abs();
    let mb = pertflow::mu_bar_sequence(g0, &p, jmax);
    let g = pertflow::g_flow(g0, &p, jmax);
    let rows: Vec<Vec<String>> = (0..=jmax)
        .map(|j| vec![j.to_string(), num(g[j]), num(mb[j]), num(hierarchical::vartheta(p.l, j, p.m2))])
        .collect();
    out.csv("critical.csv", &["j", "g", "mu_bar", "vartheta"], &rows)?;
    let rep = pertflow::replay_backward(g0, &mb, &p, c0);
    let res = json!({
        "mu0c_backward": jnum(back.mu0),
        "mu0c_bisect": jnum(bis),
        "diff": jnum(diff),
        "tail_bound": jnum(back.tail_bound),
        "terms": back.terms,
        "c0": jnum(c0),
        "replay_max_rel_residual": jnum(rep.max_rel_residual),
        "replay_max_bound_ratio": jnum(rep.max_bound_ratio),
    });
    out.summary("critical.json", "critical", cfg, res)?;
    gate(diff < tol, format!("|mu0c_backward - mu0c_bisect| = {diff:e} exceeds {tol:e}"))
}

fn chi(cfg: &RunConfig, out: &mut Output) -> Result<(), CliError> {
    let p = params(cfg)?.with_m2(0.0);
    let g0: f64 = req!(cfg, g0);
    let b: f64 = req!(cfg, b);
    let (lo, hi, k): (f64, f64, usize) = (req!(cfg, eps_min), req!(cfg, eps_max), req!(cfg, eps_points));
    if !(lo > 0.0 && hi > lo && k >= 2) {
        return Err(CliError::Validation("need 0 < eps_min < eps_max and eps_points >= 2".into()));
    }
    let grid = pertflow::log_grid(lo, hi, k);
    let gam = pertflow::gamma_exponent(p.n);
    let ode = pertflow::chi_ode_invert(gam, b, &grid)?;
    let rows: Vec<Vec<String>> =
        ode.eps.iter().zip(&ode.chi).map(|(&e, &c)| vec![num(e), num(c), num(b * c * e)]).collect();
    out.csv("chi_ode.csv", &["eps", "chi", "b_chi_eps"], &rows)?;

    let preds = grid.par_iter().map(|&e| pertflow::chi_prediction(g0, e, &p)).collect::<Result<Vec<_>, _>>()?;
    let rows: Vec<Vec<String>> = preds
        .iter()
        .map(|c| vec![num(c.epsilon), num(c.leading), num(c.amplitude), num(c.effective_mass_chi), num(c.m2), num(c.residual)])
        .collect();
    out.csv("chi.csv", &["eps", "leading", "amplitude", "effective_mass_chi", "m2", "residual"], &rows)?;
    // χε/(log ε⁻¹)^γ over the two smallest decades
    let flat: Vec<f64> = preds
        .iter()
        .filter(|c| c.epsilon <= lo * 100.0 * (1.0 + 1e-12))
        .map(|c| c.effective_mass_chi * c.epsilon / (1.0 / c.epsilon).ln().powf(gam))
        .collect();
    let spread = if flat.is_empty() {
        f64::NAN
    } else {
        let (mn, mx) = flat.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        (mx - mn) / (0.5 * (mx + mn))
    };
    let res = json!({
        "gamma": jnum(gam),
        "ode_fitted_exponent": jnum(ode.exponent),
        "amplitude": jnum(pertflow::chi_amplitude(g0, &p)),
        "effective_mass_spread_last_two_decades": jnum(spread),
        "max_inversion_residual": jnum(preds.iter().map(|c| c.residual).fold(0.0, f64::max)),
    });
    out.summary("chi.json", "chi", cfg, res)
}

fn nonpert(cfg: &RunConfig, out: &mut Output) -> Result<(), CliError> {
    let p = params(cfg)?;
    let (g0, nu0): (f64, f64) = (req!(cfg, g0), req!(cfg, nu0));
    let nodes: usize = req!(cfg, nodes);
    let engine: Engine = req!(cfg, engine);
    let seed = cfg.seed.unwrap_or(0);
    let mut flagged = Vec::new();
    let mut errs: Vec<Option<f64>> = vec![None];
    let flow: Vec<BlockFunction> = match engine {
        Engine::Quadrature => nonpert::run_quadrature_flow(&p, g0, nu0, nodes)?,
        Engine::Mc => {
            let samples: usize = req!(cfg, samples);
            let plan = nonpert::domain_plan(&p);
            let mut fs = vec![nonpert::initial_function(p.n, g0, nu0, plan[0], nodes)?];
            for j in 0..p.big_n {
                let s = nonpert::rg_step_mc(&fs[j], &p, plan[j + 1], nodes, rng::derive_seed(seed, &[j as u64]), samples)?;
                if s.flagged {
                    flagged.push(j + 1);
                }
                errs.push(Some(s.rel_std_err.iter().cloned().fold(0.0, f64::max)));
                fs.push(s.function);
            }
            fs
        }
    };
    let mut rows = Vec::new();
    for (j, f) in flow.iter().enumerate() {
        let c = nonpert::extract_couplings(f, &p)?;
        rows.push(vec![
            j.to_string(),
            num(f.rmax),
            num(c.u),
            num(c.nu),
            num(c.g),
            num(f.tail_fraction),
            errs.get(j).copied().flatten().map(num).unwrap_or_default(),
        ]);
    }
    out.csv("nonpert.csv", &["j", "rmax", "u", "nu", "g", "tail_fraction", "max_rel_std_err"], &rows)?;
    let last = flow.last().expect("flow has at least the initial function");
    let (chi, u4) = if p.n == 1 && p.m2 > 0.0 {
        (Some(nonpert::chi_finite_volume(last, &p)?), Some(nonpert::u4bar(last, &p)?))
    } else {
        (None, None)
    };
    let res = json!({
        "engine": format!("{engine:?}").to_lowercase(),
        "volume": p.lf().powi((p.d * p.big_n) as i32),
        "chi_N": chi.map(jnum),
        "u4bar": u4.map(|u| jnum(u.u4bar)),
        "g_ren": u4.map(|u| jnum(u.g_ren)),
        "flagged_steps": flagged,
    });
    out.summary("nonpert.json", "nonpert", cfg, res)
}

fn oracle(cfg: &RunConfig, out: &mut Output) -> Result<(), CliError> {
    let p = params(cfg)?;
    let (g0, nu0): (f64, f64) = (req!(cfg, g0), req!(cfg, nu0));
    let order: usize = req!(cfg, order);
    let tol: f64 = req!(cfg, tol);
    let r = nonpert::oracle_chi(&p, g0, nu0, order)?;
    let rel = r.rel_diff();
    let u4_rel = ((r.direct_u4 - r.recursive_u4) / r.direct_u4.abs().max(1e-300)).abs();
    let rows = vec![
        vec!["chi".to_string(), num(r.direct_chi), num(r.recursive_chi), num(rel)],
        vec!["u4".to_string(), num(r.direct_u4), num(r.recursive_u4), num(u4_rel)],
    ];
    out.csv("oracle.csv", &["quantity", "direct", "recursive", "rel_diff"], &rows)?;
    let res = json!({
        "direct_chi": jnum(r.direct_chi),
        "recursive_chi": jnum(r.recursive_chi),
        "rel_gap": jnum(rel),
        "direct_u4": jnum(r.direct_u4),
        "recursive_u4": jnum(r.recursive_u4),
        "refinement_change": jnum(r.refinement_change),
        "tolerance": tol,
    });
    out.summary("oracle.json", "oracle", cfg, res)?;
    gate(rel < tol, format!("relative gap {rel:e} exceeds {tol:e}"))
}

fn meanfield(cfg: &RunConfig, out: &mut Output) -> Result<(), CliError> {
    let n: usize = req!(cfg, n);
    let betas: Vec<f64> = req!(cfg, beta);
    let hs: Vec<f64> = req!(cfg, h);
    let states = betas
        .iter()
        .flat_map(|&b| hs.iter().map(move |&h| (b, h)))
        .map(|(b, h)| MeanFieldState::new(n, b, h))
        .collect::<Result<Vec<_>, _>>()?;
    let rows: Vec<Vec<String>> = states
        .par_iter()
        .map(|s| {
            let phi0 = meanfield::solve_magnetisation(s);
            let chi = meanfield::susceptibility(s);
            vec![num(s.beta), num(s.h), num(phi0), num(chi), num(meanfield::v_curvature(phi0, s))]
        })
        .collect();
    out.csv("meanfield.csv", &["beta", "h", "phi0", "chi", "v_curvature"], &rows)?;
    let res = json!({ "n": n, "beta_c": n as f64, "points": rows.len() });
    out.summary("meanfield.json", "meanfield", cfg, res)
}

fn walks(cfg: &RunConfig, out: &mut Output) -> Result<(), CliError> {
    let d: usize = req!(cfg, d);
    let nmax: usize = req!(cfg, nmax);
    let samples: usize = req!(cfg, samples);
    let seed = cfg.seed.unwrap_or(0);

    let pts: Vec<(usize, f64)> = (1..=4).flat_map(|dd| [1e-2, 1e-4, 1e-6, 1e-8].map(|m| (dd, m))).collect();
    let vals = pts.par_iter().map(|&(dd, m)| bubble::euclid_bubble(m, dd)).collect::<Result<Vec<_>, _>>()?;
    let rows: Vec<Vec<String>> =
        pts.iter().zip(&vals).map(|(&(dd, m), v)| vec![dd.to_string(), num(m), num(v.value), num(v.normalised)]).collect();
    out.csv("bubble.csv", &["d", "m2", "value", "normalised"], &rows)?;

    let counts = saw::saw_count(d, nmax)?;
    let check = saw::saw_count_hashset(d, nmax);
    let roots = counts.root_estimates();
    let rows: Vec<Vec<String>> = counts
        .counts
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| vec![k.to_string(), c.to_string(), num(roots.get(k - 1).copied().unwrap_or(f64::NAN))])
        .collect();
    out.csv("saw.csv", &["n", "c_n", "root"], &rows)?;

    let b = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.5, 1.0, 0.0, 2.0, 0.5, 2.0, 0.0]);
    let g = walks::WeightedGraph::new(b, vec![0.4, 0.7, 1.1])?;
    let inv = g.dense_inverse()?;
    let ws = walks::resolvent_walk_sum(&g, 1e-13)?;
    let fk = (0..3)
        .into_par_iter()
        .map(|y| walks::ctrw_feynman_kac(&g, 0, y, rng::derive_seed(seed, &[y as u64]), samples))
        .collect::<Result<Vec<_>, _>>()?;
    let rows: Vec<Vec<String>> = (0..3)
        .map(|y| {
            vec![
                "0".into(),
                y.to_string(),
                num(inv[(0, y)]),
                num(ws.value[(0, y)]),
                num(fk[y].mean),
                num(fk[y].std_err),
            ]
        })
        .collect();
    out.csv("walk_reps.csv", &["x", "y", "inverse", "walk_sum", "fk_mean", "fk_std_err"], &rows)?;

    let res = json!({
        "saw_dimension": d,
        "saw_enumerators_agree": check == counts.counts,
        "connective_bounds_hold": counts.bounds_hold(),
        "submultiplicative": counts.submultiplicative(),
        "walk_sum_max_error": jnum((ws.value - &inv).abs().max()),
        "fk_max_z": jnum((0..3).map(|y| (fk[y].mean - inv[(0, y)]).abs() / fk[y].std_err).fold(0.0, f64::max)),
    });
    out.summary("walks.json", "walks", cfg, res)
}

/// C = MᵀM + I with small integer M.
fn rational_cov(rng: &mut rng::Stream, n: usize) -> Vec<Vec<Q>> {
    let m: Vec<Vec<i64>> = (0..n).map(|_| (0..n).map(|_| rng.random_range(-2..=2)).collect()).collect();
    (0..n)
        .map(|i| (0..n).map(|j| rat((0..n).map(|k| m[k][i] * m[k][j]).sum::<i64>() + i64::from(i == j), 1)).collect())
        .collect()
}

fn to_f64(c: &[Vec<Q>]) -> Vec<Vec<f64>> {
    c.iter().map(|r| r.iter().map(|v| v.to_f64()).collect()).collect()
}

fn susy_check(cfg: &RunConfig, out: &mut Output) -> Result<(), CliError> {
    let tol: f64 = req!(cfg, tol);
    let seed = cfg.seed.unwrap_or(0);
    let mut rng = rng::stream(seed, &[0]);
    let mut rows: Vec<(String, f64, f64)> = Vec::new();

    let mut r_norm: f64 = 0.0;
    for _ in 0..20 {
        let m = DMatrix::from_fn(3, 3, |_, _| rng.random_range(-1.0..1.0));
        let skew = DMatrix::from_fn(3, 3, |i, j| if i < j { 0.7 } else if i > j { -0.7 } else { 0.0 });
        let a = &m * m.transpose() + DMatrix::identity(3, 3) + skew;
        r_norm = r_norm.max(forms::self_normalisation_residual(&a)?);
    }
    rows.push(("normalisation".into(), r_norm, tol.min(1e-12)));

    let mut r_loc: f64 = 0.0;
    for trial in 0..10 {
        let nv = 2 + trial % 2;
        let c = rational_cov(&mut rng, nv);
        let mut f = Polynomial::<Q>::zero(nv);
        for _ in 0..4 {
            let e: Vec<u32> = (0..nv).map(|_| rng.random_range(0..=1)).collect();
            f.add_term(e, rat(rng.random_range(-5..=5), rng.random_range(1..=4)));
        }
        f.add_term(vec![0; nv], rat(rng.random_range(-3..=3), 1));
        let val = forms::super_expectation(&forms::poly_of_tau(&f), &c)?;
        r_loc = r_loc.max((val - f.constant_term()).to_f64().abs());
    }
    rows.push(("localisation".into(), r_loc, 0.0));

    let mut r_two: f64 = 0.0;
    for nv in 2..=4 {
        let c = rational_cov(&mut rng, nv);
        for x in 0..nv {
            for y in 0..nv {
                let k = Form::phi(nv, x).wedge(&Form::phibar(nv, y));
                r_two = r_two.max((forms::super_expectation(&k, &c)? - c[x][y].clone()).to_f64().abs());
            }
        }
    }
    rows.push(("two_point".into(), r_two, 0.0));

    let mut r_saw: f64 = 0.0;
    let mut r_trail: f64 = 0.0;
    for nv in [3usize, 4] {
        let c = to_f64(&rational_cov(&mut rng, nv));
        let scale = 0.1;
        let c: Vec<Vec<f64>> = c.iter().map(|r| r.iter().map(|v| v * scale).collect()).collect();
        let beta: Vec<Vec<f64>> = (0..nv)
            .map(|i| (0..nv).map(|j| if i == j { 0.0 } else { (i + j + 1) as f64 / 7.0 }).collect())
            .collect();
        for x in 0..nv {
            for y in 0..nv {
                if x == y {
                    continue;
                }
                let a = forms::strict_saw_form_value(&c, x, y)?;
                r_saw = r_saw.max((a - forms::strict_saw_sum(&c, x, y)).abs());
                let t = forms::trail_form_value(&beta, x, y)?;
                r_trail = r_trail.max((t - forms::trail_sum(&beta, x, y)).abs());
            }
        }
    }
    rows.push(("strict_saw".into(), r_saw, tol));
    rows.push(("trail".into(), r_trail, tol));

    println!("{:<14} {:>12} {:>10}  status", "identity", "residual", "tolerance");
    for (name, r, t) in &rows {
        println!("{name:<14} {:>12.3e} {:>10.1e}  {}", r, t, if r <= t { "ok" } else { "FAIL" });
    }
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|(n, r, t)| vec![n.clone(), num(*r), num(*t), (r <= t).to_string()])
        .collect();
    out.csv("susy_check.csv", &["identity", "residual", "tolerance", "pass"], &table)?;
    let all = rows.iter().all(|(_, r, t)| r <= t);
    let res = json!({
        "residuals": rows.iter().map(|(n, r, _)| (n.clone(), jnum(*r))).collect::<serde_json::Map<_, _>>(),
        "all_pass": all,
    });
    out.summary("susy_check.json", "susy-check", cfg, res)?;
    gate(all, "an identity residual exceeds its tolerance".into())
}
