use num_rational::BigRational;
use rglab::gaussian;
use rglab::hierarchical;
use rglab::meanfield::{self, MeanFieldState};
use rglab::pertflow;
use rglab::scalar::rat;
use rglab::walks_susy::saw;
use rglab::ModelParams;

#[test]
fn first_beta_coefficient_by_hand() {
    // C_1 on one 2^4 block: 15/16 on the diagonal, -1/16 off it.
    let c2 = (15.0f64 / 16.0).powi(2) + 15.0 / 256.0;
    for n in 1..=3 {
        let k = pertflow::coeffs(0, &ModelParams::d4(n, 0.0));
        assert!((k.beta - (n as f64 + 8.0) * c2).abs() < 1e-12, "n={n}: {}", k.beta);
    }
    let t = hierarchical::block_moments::<BigRational>(4, 2, 0, &rat(0, 1));
    assert_eq!(t.c2, rat(15, 16));
}

#[test]
fn gaussian_table_has_no_higher_cumulants() {
    let c = vec![
        vec![rat(2, 1), rat(1, 2), rat(0, 1)],
        vec![rat(1, 2), rat(1, 1), rat(-1, 3)],
        vec![rat(0, 1), rat(-1, 3), rat(3, 2)],
    ];
    let vars = [0, 1, 2, 0, 1, 2];
    let m = gaussian::gaussian_moment_table(&vars, &c);
    let k = gaussian::cumulants_from_moments(&m).unwrap();
    for mask in 1..k.len() {
        let bits: Vec<usize> = (0..vars.len()).filter(|b| mask >> b & 1 == 1).collect();
        let want = match bits.len() {
            2 => c[vars[bits[0]]][vars[bits[1]]].clone(),
            _ => rat(0, 1),
        };
        assert_eq!(k[mask], want, "mask {mask:b}");
    }
}

#[test]
fn susceptibility_is_field_derivative() {
    for (beta, h) in [(0.5, 0.3), (1.5, 0.2), (0.9, 0.05)] {
        let dh = 1e-5;
        let m = |h: f64| meanfield::solve_magnetisation(&MeanFieldState::new(1, beta, h).unwrap());
        let fd = (m(h + dh) - m(h - dh)) / (2.0 * dh);
        let chi = meanfield::susceptibility(&MeanFieldState::new(1, beta, h).unwrap());
        assert!((fd / chi - 1.0).abs() < 1e-6, "beta={beta} h={h}: {fd} vs {chi}");
    }
}

#[test]
fn critical_trajectory_stays_bounded_and_perturbations_escape() {
    let p = ModelParams::d4(1, 0.0);
    let g0 = 0.03;
    let mu0 = pertflow::mu0_backward(g0, &p, 4000).unwrap().mu0;
    let t = pertflow::run_flow(g0, mu0, &p, 20, None);
    assert!(t.mu[1..].iter().all(|m| m.abs() < mu0.abs()), "{:?}", t.mu);
    let off = pertflow::run_flow(g0, mu0 + 1e-6, &p, 20, None);
    assert!(off.mu[20] - t.mu[20] > 1e-6 * 4f64.powi(15), "{}", off.mu[20]);
}

#[test]
fn square_lattice_growth_rate() {
    let s = saw::saw_count(2, 12).unwrap();
    assert_eq!(s.counts[12], 324_932);
    let r = s.root_estimates();
    let last = *r.last().unwrap();
    assert!(last > 2.638 && last < 2.9, "{last}");
}
