//! Acceptance suite: one PASS/FAIL line per criterion; exits nonzero if any fails.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use nalgebra::DMatrix;
use num_rational::BigRational;
use rand::Rng;

use rglab::frd::{self, BumpProfile, FrdSlice};
use rglab::gaussian::{self, Polynomial};
use rglab::hierarchical::{self, HierCovariance, HierGeometry, Scale};
use rglab::meanfield::{self, MeanFieldState};
use rglab::nonpert;
use rglab::pertflow;
use rglab::rng;
use rglab::scalar::rat;
use rglab::walks_susy::forms::{self, Form};
use rglab::walks_susy::{bubble, saw, walks};
use rglab::{ModelParams, Scalar};

type Q = BigRational;
type Outcome = (bool, String);

fn p4(n: usize, m2: f64) -> ModelParams {
    ModelParams::d4(n, m2)
}

fn psd_rational(rng: &mut rng::Stream, n: usize, shift: i64) -> Vec<Vec<Q>> {
    let m: Vec<Vec<i64>> = (0..n).map(|_| (0..n).map(|_| rng.random_range(-2..=2)).collect()).collect();
    (0..n)
        .map(|i| (0..n).map(|j| rat((0..n).map(|k| m[k][i] * m[k][j]).sum::<i64>() + if i == j { shift } else { 0 }, 3)).collect())
        .collect()
}

fn random_poly(rng: &mut rng::Stream, nv: usize, maxdeg: u32, terms: usize) -> Polynomial<Q> {
    let mut p = Polynomial::zero(nv);
    for _ in 0..terms {
        let mut e: Vec<u32> = (0..nv).map(|_| rng.random_range(0..=maxdeg)).collect();
        while e.iter().sum::<u32>() > maxdeg {
            let i = e.iter().position(|&v| v > 0).unwrap();
            e[i] -= 1;
        }
        p.add_term(e, rat(rng.random_range(-6..=6), rng.random_range(1..=5)));
    }
    p
}

fn c1_decomposition() -> Outcome {
    let mut worst: f64 = 0.0;
    for (d, l, n) in [(1usize, 2usize, 8usize), (2, 2, 3), (2, 4, 2), (4, 2, 2), (1, 3, 5), (3, 2, 2)] {
        let geom = HierGeometry::new(d, l, n).unwrap();
        let vol = geom.volume();
        assert!(vol <= 256);
        let pts: Vec<Vec<usize>> = (0..vol).map(|i| geom.coords(i)).collect();
        for m2 in [0.5, 1.7] {
            let a = DMatrix::from_fn(vol, vol, |i, k| {
                -hierarchical::laplacian_entry::<f64>(&geom, &pts[i], &pts[k]) + if i == k { m2 } else { 0.0 }
            });
            let inv = a.try_inverse().unwrap();
            let mut pieces: Vec<HierCovariance<f64>> =
                (1..=n).map(|j| HierCovariance::new(&geom, Scale::Fine(j), m2).unwrap()).collect();
            pieces.push(HierCovariance::new(&geom, Scale::Final, m2).unwrap());
            for i in 0..vol {
                for k in 0..vol {
                    let s: f64 = pieces.iter().map(|c| c.entry(&geom, &pts[i], &pts[k])).sum();
                    worst = worst.max((s - inv[(i, k)]).abs());
                }
            }
        }
        for j in 1..=n {
            let c = HierCovariance::new(&geom, Scale::Fine(j), rat(0, 1)).unwrap();
            for x in [0, vol - 1] {
                let s = (0..vol).fold(rat(0, 1), |acc, y| acc + c.entry(&geom, &pts[x], &pts[y]));
                if s != rat(0, 1) {
                    return (false, format!("zero-sum fails at d={d} L={l} j={j}"));
                }
            }
        }
    }
    (worst < 1e-10, format!("max |sum_j C_j + C_final - inverse| = {worst:.2e} (tol 1e-10); rational zero-sum exact"))
}

fn c2_moments() -> Outcome {
    let mut worst: f64 = 0.0;
    for (d, l, jmax) in [(1usize, 2usize, 6usize), (2, 2, 3), (2, 3, 2), (4, 2, 1), (3, 2, 2)] {
        for j in 0..=jmax {
            let geom = HierGeometry::new(d, l, j + 1).unwrap();
            let pts: Vec<Vec<usize>> = (0..geom.volume()).map(|i| geom.coords(i)).collect();
            let o = &pts[0];
            let c = HierCovariance::new(&geom, Scale::Fine(j + 1), rat(0, 1)).unwrap();
            let e: Vec<Q> = pts.iter().map(|y| c.entry(&geom, o, y)).collect();
            let pow = |k: i32| e.iter().fold(rat(0, 1), |acc, v| acc + Scalar::powi(v, k));
            let t = hierarchical::block_moments::<Q>(d, l, j, &rat(0, 1));
            if t.c != e[0] || t.c2 != pow(2) || t.c3 != pow(3) || t.c4 != pow(4) {
                return (false, format!("rational mismatch at d={d} L={l} j={j}"));
            }
            for m2 in [0.3, 2.5] {
                let cf = HierCovariance::new(&geom, Scale::Fine(j + 1), m2).unwrap();
                let ef: Vec<f64> = pts.iter().map(|y| cf.entry(&geom, o, y)).collect();
                let tf = hierarchical::block_moments::<f64>(d, l, j, &m2);
                for (k, v) in [(2, tf.c2), (3, tf.c3), (4, tf.c4)] {
                    let b: f64 = ef.iter().map(|x| x.powi(k)).sum();
                    worst = worst.max((b - v).abs());
                }
                worst = worst.max((ef[0] - tf.c).abs());
            }
        }
    }
    (worst < 1e-12, format!("rational exact; max float deviation {worst:.2e} (tol 1e-12)"))
}

fn c3_hier_bubble() -> Outcome {
    let m2 = 1e-12;
    let b = hierarchical::hier_bubble(4, 2, m2, 400).unwrap();
    let target = (15.0 / 16.0) / 2f64.ln();
    let r = b.ratio_log.unwrap();
    let dev = (r / target - 1.0).abs();
    (dev < 0.03, format!("B/log m^-1 = {r:.5} vs {target:.5}, deviation {:.2}% (tol 3%)", dev * 100.0))
}

fn c4_euclid_bubble() -> Outcome {
    let m2 = 1e-8;
    let b2 = bubble::euclid_bubble(m2, 2).unwrap().value * 4.0 * PI * m2;
    let b4 = bubble::euclid_bubble(m2, 4).unwrap().value / (1.0 / m2).ln() * 16.0 * PI * PI;
    let (e2, e4) = ((b2 - 1.0).abs(), (b4 - 1.0).abs());
    (
        e2 < 0.03 && e4 < 0.03,
        format!("d=2: B*4pi*m2 = {b2:.6} ({:.3}%); d=4: B*16pi^2/log m^-2 = {b4:.4} ({:.1}%) (tol 3%)", e2 * 100.0, e4 * 100.0),
    )
}

fn c5_gaussian() -> Outcome {
    let mut rng = rng::stream(5, &[]);
    let c = psd_rational(&mut rng, 4, 1);
    let a = Polynomial::<Q>::product_of(4, &[0, 1, 2, 3]);
    let e = c[0][1].clone() * c[2][3].clone() + c[0][2].clone() * c[1][3].clone() + c[0][3].clone() * c[1][2].clone();
    let wick = gaussian::wick_expect(&a, &c) == e;
    let mut semigroup = true;
    for m in 1..=4 {
        for _ in 0..4 {
            let p = random_poly(&mut rng, m, 6, 6);
            let c1 = psd_rational(&mut rng, m, 0);
            let c2 = psd_rational(&mut rng, m, 1);
            let sum: Vec<Vec<Q>> = (0..m).map(|i| (0..m).map(|j| c1[i][j].clone() + c2[i][j].clone()).collect()).collect();
            semigroup &= gaussian::heat_convolve(&gaussian::heat_convolve(&p, &c1), &c2) == gaussian::heat_convolve(&p, &sum);
        }
    }
    let mut round = true;
    for _ in 0..3 {
        let mut mom: Vec<Q> = (0..64).map(|_| rat(rng.random_range(-9..=9), rng.random_range(1..=4))).collect();
        mom[0] = rat(1, 1);
        let cum = gaussian::cumulants_from_moments(&mom).unwrap();
        round &= gaussian::moments_from_cumulants(&cum).unwrap() == mom;
    }
    (wick && semigroup && round, format!("wick4 {wick}, semigroup (deg<=6, M<=4) {semigroup}, cumulant round trip order 6 {round}"))
}

fn c6_frd() -> Outcome {
    let p = BumpProfile::standard();
    let mut rng = rng::stream(6, &[]);
    let mut sym: f64 = 0.0;
    for i in 0..20 {
        let d = 1 + i % 3;
        let k: Vec<f64> = (0..d).map(|_| rng.random_range(-PI..PI)).collect();
        let s = frd::symbol_partial_sum(40, 2, &k, 1.0, &p);
        sym = sym.max((s - 1.0 / (frd::lattice_symbol(&k) + 1.0)).abs());
    }
    let mut zeros: f64 = 0.0;
    for (j, d) in [(2usize, 1usize), (3, 2), (2, 2)] {
        let s = frd::frd_slice(j, d, 2, 1.0, p.clone()).unwrap();
        let r = s.radius as i64;
        let outside: Vec<Vec<i64>> = if d == 1 {
            vec![vec![r + 1], vec![r + 3]]
        } else {
            vec![vec![r + 1, 0], vec![r, r], vec![r + 2, 1]]
        };
        for x in outside {
            zeros = zeros.max(frd::kernel_from_symbol(&s, &x, 24).abs());
        }
    }
    let deg: f64 = [1.5, 3.7, 9.2].iter().map(|&t| frd::p_t_degree_defect(t, &p).abs()).fold(0.0, f64::max);
    let mut torus: f64 = 0.0;
    for (l, n) in [(4usize, 1usize), (2, 2)] {
        let slices: Vec<FrdSlice> = (1..n.max(2)).map(|j| frd::frd_slice(j, 1, l, 1.0, p.clone()).unwrap()).collect();
        let c = frd::torus_covariance(n, &slices).unwrap();
        let inv = frd::torus_inverse(l.pow(n as u32), 1, 1.0).unwrap();
        torus = torus.max((c - inv).amax());
    }
    (
        sym < 1e-6 && zeros < 1e-10 && deg < 1e-10 && torus < 1e-6,
        format!("symbol {sym:.1e} (1e-6), range zeros {zeros:.1e} (1e-10), degree defect {deg:.1e}, 4-site ring {torus:.1e} (1e-6)"),
    )
}

fn c7_g_asymptotics() -> Outcome {
    let p = p4(1, 0.0);
    let g = pertflow::g_flow(0.05, &p, 10_000);
    let b0 = pertflow::coeffs(0, &p).beta;
    let r = g[10_000] * b0 * 10_000.0;
    ((0.95..=1.05).contains(&r), format!("g_j*beta0*j at j=1e4 = {r:.5} (in [0.95, 1.05])"))
}

fn c8_critical_point() -> Outcome {
    let p = p4(1, 0.0);
    let c0 = 4.0 * 3.0;
    let mut diff: f64 = 0.0;
    let mut ratio: f64 = 0.0;
    let mut res: f64 = 0.0;
    for g0 in [0.01, 0.05, 0.1] {
        let b = pertflow::mu0_backward(g0, &p, 4000).unwrap().mu0;
        let s = pertflow::mu0_bisection(g0, &p, 200, c0).unwrap();
        diff = diff.max((b - s).abs());
        let mb = pertflow::mu_bar_sequence(g0, &p, 1000);
        let rep = pertflow::replay_backward(g0, &mb, &p, c0);
        ratio = ratio.max(rep.max_bound_ratio);
        res = res.max(rep.max_rel_residual);
    }
    (
        diff < 1e-8 && ratio <= 1.0 && res < 1e-12,
        format!("max |backward - bisection| = {diff:.1e} (1e-8); replay |mu_j|/(4(n+2) theta g) <= {ratio:.3}, step residual {res:.1e}"),
    )
}

fn c9_nu_c() -> Outcome {
    let g = 1e-3;
    let b = pertflow::mu0_backward(g, &p4(1, 0.0), 4000).unwrap().mu0;
    let r = b / (-3.0 * g * 1.25);
    ((0.9..=1.1).contains(&r), format!("mu0c/(-(n+2) g 5/4) = {r:.5} (in [0.9, 1.1])"))
}

fn c10_derivative() -> Outcome {
    let p = p4(1, 0.0);
    let g0 = 0.05;
    let mu0 = pertflow::mu0_backward(g0, &p, 4000).unwrap().mu0;
    let t = pertflow::run_flow(g0, mu0, &p, 50, None);
    let prod = pertflow::dmu_dmu0(&t)[50];
    let h = 1e-6;
    let up = pertflow::run_flow(g0, mu0 + h, &p, 50, None).mu[50];
    let dn = pertflow::run_flow(g0, mu0 - h, &p, 50, None).mu[50];
    let fd = (up - dn) / (2.0 * h);
    let e = (fd / prod - 1.0).abs();
    (e < 1e-5, format!("product {prod:.6e} vs finite difference {fd:.6e}, rel error {e:.1e} (1e-5)"))
}

fn c11_susceptibility() -> Outcome {
    let grid = pertflow::log_grid(1e-10, 1e-2, 17);
    let e25 = pertflow::chi_ode_invert(0.25, 1.0, &grid).unwrap().exponent;
    let e13 = pertflow::chi_ode_invert(pertflow::gamma_exponent(1), 1.0, &grid).unwrap().exponent;
    let e40 = pertflow::chi_ode_invert(pertflow::gamma_exponent(2), 1.0, &grid).unwrap().exponent;
    let p = p4(1, 0.0);
    let eps = pertflow::log_grid(1e-10, 1e-8, 9);
    let chis: Vec<f64> = eps.iter().map(|&e| pertflow::chi_prediction(0.05, e, &p).unwrap().effective_mass_chi).collect();
    let spread = |gam: f64| {
        let v: Vec<f64> = eps.iter().zip(&chis).map(|(e, c)| c * e / (1.0 / e).ln().powf(gam)).collect();
        let (mn, mx) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
        (mx - mn) / (0.5 * (mx + mn))
    };
    let (s25, s13) = (spread(0.25), spread(1.0 / 3.0));
    let ok = (e25 - 0.25).abs() <= 0.02 && (e13 - 1.0 / 3.0).abs() <= 0.02 && (e40 - 0.4).abs() <= 0.03 && s25 < 0.05 && s13 < 0.05;
    (
        ok,
        format!(
            "ODE exponent {e25:.4} (gamma 1/4), {e13:.4} (gamma 1/3, n=1), {e40:.4} (n=2); flatness {:.2}% (power 1/4), {:.2}% (power 1/3) (tol 5%)",
            s25 * 100.0,
            s13 * 100.0
        ),
    )
}

fn c12_oracle() -> Outcome {
    let triples = [(0.0, 0.2, 0.4), (0.5, -0.2, 0.3), (0.1, 0.0, 1.0), (1.0, 0.3, 0.2), (0.25, -0.1, 0.6)];
    let mut worst: f64 = 0.0;
    let mut gauss: f64 = 0.0;
    for (g, nu0, m2) in triples {
        let p = ModelParams::new(1, 2, 2, 1, m2).unwrap();
        let r = nonpert::oracle_chi(&p, g, nu0, 64).unwrap();
        worst = worst.max(r.rel_diff());
        if g == 0.0 {
            let exact = 1.0 / (nu0 + m2);
            gauss = gauss.max(((r.direct_chi - exact) / exact).abs()).max(((r.recursive_chi - exact) / exact).abs());
        }
    }
    (worst < 1e-6 && gauss < 1e-6, format!("max relative gap {worst:.1e} over 5 triples (1e-6); g=0 vs 1/(nu0+m2) {gauss:.1e}"))
}

fn c13_second_order() -> Outcome {
    let p = ModelParams::new(1, 2, 10, 1, 2.0).unwrap();
    let (slope, ds) = nonpert::defect_slope(&p, &[0.01, 0.02, 0.04], 0.0, nonpert::DEFAULT_NODES).unwrap();
    (
        (slope - 3.0).abs() <= 0.2,
        format!("log-log slope {slope:.3} (3 +- 0.2), defects {:.2e} {:.2e} {:.2e} (d=1, L=2, m2=2, 10 steps)", ds[0], ds[1], ds[2]),
    )
}

fn c14_meanfield() -> Outcome {
    let st = |b: f64, h: f64| MeanFieldState::new(1, b, h).unwrap();
    let chi: f64 = [0.1, 0.5, 0.9, 0.99]
        .iter()
        .map(|&b| (meanfield::susceptibility(&st(b, 0.0)) * (1.0 - b) - 1.0).abs())
        .fold(0.0, f64::max);
    let r1 = meanfield::solve_magnetisation(&st(1.0, 1e-6)) / (3e-6f64).cbrt();
    let r2 = meanfield::solve_magnetisation(&st(1.0 + 1e-4, 0.0)) / (3e-4f64).sqrt();
    (
        chi < 1e-12 && (0.99..=1.01).contains(&r1) && (0.95..=1.05).contains(&r2),
        format!("chi(1-beta) error {chi:.1e}; M(1,h)/(3h)^(1/3) = {r1:.5}; M+/sqrt(3(beta-1)) = {r2:.5}"),
    )
}

fn c15_susy() -> Outcome {
    let mut rng = rng::stream(15, &[]);
    let mut norm: f64 = 0.0;
    for _ in 0..20 {
        let n = rng.random_range(2..=4);
        let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let k = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let a = &m * m.transpose() + DMatrix::identity(n, n) * 0.5 + (&k - k.transpose());
        norm = norm.max(forms::self_normalisation_residual(&a).unwrap());
    }
    let mut loc = true;
    let mut two = true;
    for nv in 2..=4 {
        let c = psd_rational(&mut rng, nv, 1);
        let f = random_poly(&mut rng, nv, 3, 5);
        loc &= forms::super_expectation(&forms::poly_of_tau(&f), &c).unwrap() == f.constant_term();
        for x in 0..nv {
            for y in 0..nv {
                two &= forms::super_expectation(&Form::phi(nv, x).wedge(&Form::phibar(nv, y)), &c).unwrap() == c[x][y];
            }
        }
    }
    let mut reps: f64 = 0.0;
    for nv in [3usize, 4] {
        let c: Vec<Vec<f64>> = (0..nv).map(|i| (0..nv).map(|j| if i == j { 1.0 } else { 0.1 + 0.05 * (i + j) as f64 }).collect()).collect();
        let b: Vec<Vec<f64>> = (0..nv).map(|i| (0..nv).map(|j| if i == j { 0.0 } else { 0.2 + 0.1 * (i * j) as f64 }).collect()).collect();
        for x in 0..nv {
            for y in 0..nv {
                if x != y {
                    reps = reps.max((forms::strict_saw_form_value(&c, x, y).unwrap() - forms::strict_saw_sum(&c, x, y)).abs());
                    reps = reps.max((forms::trail_form_value(&b, x, y).unwrap() - forms::trail_sum(&b, x, y)).abs());
                }
            }
        }
    }
    (
        norm < 1e-12 && loc && two && reps < 1e-10,
        format!("normalisation {norm:.1e} (1e-12, 20 matrices); localisation exact {loc}; two-point exact {two}; SAW/trail on K3,K4 {reps:.1e} (1e-10)"),
    )
}

fn c16_walks() -> Outcome {
    let b3 = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.5, 1.0, 0.0, 2.0, 0.5, 2.0, 0.0]);
    let custom = walks::WeightedGraph::new(b3, vec![0.4, 0.7, 1.1]).unwrap();
    let graphs = [
        walks::WeightedGraph::complete(2, 1.0).unwrap(),
        walks::WeightedGraph::complete(3, 0.5).unwrap(),
        walks::WeightedGraph::complete(4, 0.2).unwrap(),
        walks::WeightedGraph::cycle(4, 0.3).unwrap(),
        custom.clone(),
    ];
    let ws: f64 = graphs
        .iter()
        .map(|g| (walks::resolvent_walk_sum(g, 1e-13).unwrap().value - g.dense_inverse().unwrap()).abs().max())
        .fold(0.0, f64::max);
    let inv = custom.dense_inverse().unwrap();
    let mut fk: f64 = 0.0;
    for y in 0..3 {
        let e = walks::ctrw_feynman_kac(&custom, 0, y, 42, 20_000).unwrap();
        fk = fk.max((e.mean - inv[(0, y)]).abs() / e.std_err);
    }
    let mut wz: f64 = 0.0;
    for (kill, gg, nu) in [(0.0, 0.5, 1.0), (0.3, 0.2, 0.6)] {
        let g = walks::WeightedGraph::complete(2, kill).unwrap();
        for x in 0..2 {
            let r = walks::wsaw_two_point(&g, x, gg, nu, 3 + x as u64, 20_000).unwrap();
            wz = wz.max((r.walk.mean - r.forms).abs() / r.walk.std_err);
        }
    }
    (
        ws < 1e-9 && fk < 3.0 && wz < 3.0,
        format!("walk sum vs inverse {ws:.1e} (1e-9); Feynman-Kac max z {fk:.2} (3); WSAW walk vs forms max z {wz:.2} (3)"),
    )
}

fn c17_saw() -> Outcome {
    let s = saw::saw_count(2, 10).unwrap();
    let first = s.counts[1..=4] == [4, 12, 36, 100];
    let agree = saw::saw_count_hashset(2, 10) == s.counts;
    let s3 = saw::saw_count(3, 7).unwrap();
    let agree3 = saw::saw_count_hashset(3, 7) == s3.counts;
    let bounds = s.bounds_hold() && s3.bounds_hold();
    let sub = s.submultiplicative() && s3.submultiplicative();
    (
        first && agree && agree3 && bounds && sub,
        format!("c1..c4 = {:?}; enumerators agree {}; bounds {bounds}; submultiplicative {sub}", &s.counts[1..=4], agree && agree3),
    )
}

fn c18_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let runs: [&[&str]; 11] = [
        &["hier"],
        &["frd"],
        &["flow"],
        &["critical"],
        &["chi"],
        &["nonpert"],
        &["nonpert", "--engine", "mc", "--N", "2", "--nodes", "33", "--samples", "2000"],
        &["oracle"],
        &["meanfield"],
        &["walks"],
        &["susy-check"],
    ];
    let read = |d: &Path| -> BTreeMap<String, Vec<u8>> {
        fs::read_dir(d)
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
            })
            .collect()
    };
    let mut files = 0;
    for (i, args) in runs.iter().enumerate() {
        let mut outs = Vec::new();
        for (rep, threads) in [(0, "1"), (1, "3")] {
            let out = dir.path().join(format!("{i}-{rep}"));
            let st = Command::new(env!("CARGO_BIN_EXE_rglab"))
                .args(*args)
                .args(["--seed", "2024", "--out"])
                .arg(&out)
                .env("RGLAB_THREADS", threads)
                .output()
                .unwrap();
            if !st.status.success() {
                return (false, format!("{args:?} exited with {:?}", st.status.code()));
            }
            outs.push(read(&out));
        }
        if outs[0] != outs[1] {
            return (false, format!("{args:?} outputs differ between runs"));
        }
        files += outs[0].len();
    }
    (true, format!("{} subcommand runs repeated, {files} output files byte-identical", runs.len()))
}

fn main() {
    let criteria: [(usize, fn() -> Outcome); 18] = [
        (1, c1_decomposition),
        (2, c2_moments),
        (3, c3_hier_bubble),
        (4, c4_euclid_bubble),
        (5, c5_gaussian),
        (6, c6_frd),
        (7, c7_g_asymptotics),
        (8, c8_critical_point),
        (9, c9_nu_c),
        (10, c10_derivative),
        (11, c11_susceptibility),
        (12, c12_oracle),
        (13, c13_second_order),
        (14, c14_meanfield),
        (15, c15_susy),
        (16, c16_walks),
        (17, c17_saw),
        (18, c18_determinism),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = Vec::new();
    for (id, f) in criteria {
        let t = Instant::now();
        let (ok, detail) = match panic::catch_unwind(AssertUnwindSafe(f)) {
            Ok(r) => r,
            Err(e) => {
                let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
                (false, format!("panicked: {}", msg.unwrap_or_default()))
            }
        };
        println!("{} {id:>2}  {detail}  [{:.1}s]", if ok { "PASS" } else { "FAIL" }, t.elapsed().as_secs_f64());
        if !ok {
            failed.push(id);
        }
    }
    println!("{} of 18 criteria pass", 18 - failed.len());
    if !failed.is_empty() {
        println!("failing: {failed:?}");
        std::process::exit(1);
    }
}
