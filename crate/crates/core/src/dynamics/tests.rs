use super::*;
use crate::quadrature::random_trig_polynomial;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn grid(n: usize) -> Arc<PeriodicGrid> {
    Arc::new(PeriodicGrid::uniform(n).unwrap())
}

fn graph(g: &Arc<PeriodicGrid>, f: impl Fn(f64) -> f64) -> GraphInterface {
    GraphInterface::new(PeriodicField::from_fn(g.clone(), f))
}

fn spec() -> QuadratureSpec {
    QuadratureSpec::default()
}

#[test]
fn constant_graph_has_no_motion() {
    let g = grid(64);
    let u = graph(&g, |_| 0.3);
    let r = interaction_rhs(&u, &u, &spec()).unwrap();
    assert!(r.max_abs() < 1e-14);
    let lo = graph(&g, |_| -0.92);
    let hi = graph(&g, |_| 0.1);
    assert!(interaction_rhs(&hi, &lo, &spec()).unwrap().max_abs() < 1e-14);
}

#[test]
fn small_cosine_decays_at_the_linear_rate() {
    let eps = 1e-3;
    let g = grid(128);
    for k in 1..=3 {
        let kk = k as f64;
        let u = graph(&g, |a| eps * (kk * a).cos());
        let r = interaction_rhs(&u, &u, &spec()).unwrap();
        for (a, v) in g.alphas().iter().zip(r.values()) {
            let expect = -2.0 * PI * kk * eps * (kk * a).cos();
            assert!((v - expect).abs() <= 2.0 * eps * 2.0 * PI * kk * eps, "k={k} a={a}: {v} vs {expect}");
        }
    }
}

#[test]
fn two_phase_flat_and_decoupled() {
    let g = grid(64);
    let st = TwoPhaseState::new(graph(&g, |_| 0.1), graph(&g, |_| -0.92), 20.0 * PI, PI / 20.0).unwrap();
    let (ft, gt) = two_phase_rhs(&st, &spec()).unwrap();
    assert!(ft.max_abs() < 1e-12 && gt.max_abs() < 1e-12);

    let bumpy = TwoPhaseState::new(graph(&g, |a| 0.1 + 0.05 * a.cos()), graph(&g, |a| -0.9 + 0.05 * (2.0 * a).sin()), 0.0, 0.0).unwrap();
    let (ft, gt) = two_phase_rhs(&bumpy, &spec()).unwrap();
    assert_eq!(ft.max_abs(), 0.0);
    assert_eq!(gt.max_abs(), 0.0);

    // with ρ̄₂ = 0 the upper interface evolves on its own
    let one = TwoPhaseState { rho_bar_2: 0.0, rho_bar_1: 1.5, ..bumpy.clone() };
    let (ft, _) = two_phase_rhs(&one, &spec()).unwrap();
    let alone = periodic_graph_rhs(&one.f, 1.5, &spec()).unwrap();
    assert_eq!(ft.values(), alone.values());
}

#[test]
fn cross_terms_in_flux_form_match_the_direct_integral() {
    // with ρ̄₂ = 0, g_t is ρ̄₁ I[g, f]; with ρ̄₁ = 0, f_t is ρ̄₂ I[f, g]
    let errors: Vec<f64> = [64, 128, 256]
        .iter()
        .map(|&n| {
            let g = grid(n);
            let f = graph(&g, |a| 0.3 + 0.1 * a.cos() + 0.05 * (3.0 * a).sin());
            let h = graph(&g, |a| -0.4 + 0.15 * (a - 0.5).sin() + 0.04 * (2.0 * a).cos());
            let st = TwoPhaseState::new(f.clone(), h.clone(), 1.0, 0.0).unwrap();
            let (_, gt) = two_phase_rhs(&st, &spec()).unwrap();
            let st = TwoPhaseState { rho_bar_1: 0.0, rho_bar_2: 1.0, ..st };
            let (ft, _) = two_phase_rhs(&st, &spec()).unwrap();
            let mut err = 0.0f64;
            for (flux, direct) in [(&gt, interaction_rhs(&h, &f, &spec()).unwrap()), (&ft, interaction_rhs(&f, &h, &spec()).unwrap())] {
                let scale = direct.max_abs();
                assert!(flux.mean().abs() < 1e-14 * scale, "mean {:e}", flux.mean());
                let d = flux.values().iter().zip(direct.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
                err = err.max(d / scale);
            }
            err
        })
        .collect();
    // fourth order in the grid spacing
    for w in errors.windows(2) {
        assert!(w[0] / w[1] > 12.0, "{errors:?}");
    }
    assert!(errors[2] < 2e-7, "{errors:?}");
}

#[test]
fn paper_data_lower_bump_is_pushed_up() {
    let g = grid(256);
    let p = PaperParams::default();
    let st = p.initial_state(g.clone()).unwrap();
    let (ft, gt) = two_phase_rhs(&st, &spec()).unwrap();
    assert!(ft.values().iter().chain(gt.values()).all(|v| v.is_finite()));
    // on the bump of g the lower interface rises somewhere and closes the gap
    let bump: Vec<usize> = (0..g.len()).filter(|&i| (g.alphas()[i] - p.m2).abs() < p.r2).collect();
    let rise = bump.iter().map(|&i| gt.values()[i]).fold(f64::NEG_INFINITY, f64::max);
    assert!(rise > 0.0, "largest g_t on the bump: {rise}");
    assert!(bump.iter().any(|&i| gt.values()[i] > ft.values()[i]), "the gap never closes");
}

#[test]
fn contour_flat_and_linear() {
    let g = grid(128);
    let flat = Curve::flat(g.clone(), 4.0 * PI);
    let (a, b) = contour_rhs_periodic(&flat, &spec()).unwrap();
    assert!(a.max_abs() < 1e-14 && b.max_abs() < 1e-14);

    let eps = 1e-3;
    let f = PeriodicField::from_fn(g.clone(), |a| eps * a.cos());
    let c = Curve::from_graph(&f, 4.0 * PI);
    let (z1t, z2t) = contour_rhs_periodic(&c, &spec()).unwrap();
    assert!(z1t.max_abs() < 1e-15);
    for (a, v) in g.alphas().iter().zip(z2t.values()) {
        let expect = -2.0 * PI * eps * a.cos();
        assert!((v - expect).abs() < 2.0 * PI * eps * 2.0 * eps);
    }
}

/// Mirror image: α → -α maps node i to node n - i on a uniform grid.
fn mirror(i: usize, n: usize) -> usize {
    (n - i) % n
}

#[test]
fn odd_curves_have_odd_velocities() {
    let g = grid(128);
    let p = PeriodicField::from_fn(g.clone(), |a| -0.4 * a.sin() + 0.1 * (2.0 * a).sin());
    let q = PeriodicField::from_fn(g.clone(), |a| 0.5 * a.sin() - 0.2 * (3.0 * a).sin());
    let c = Curve::new(p, q, 4.0 * PI).unwrap();
    let (v1, v2) = contour_rhs_periodic(&c, &spec()).unwrap();
    let n = g.len();
    for i in 0..n {
        let j = mirror(i, n);
        assert!((v1.values()[i] + v1.values()[j]).abs() < 1e-9, "v1 parity at {i}");
        assert!((v2.values()[i] + v2.values()[j]).abs() < 1e-9, "v2 parity at {i}");
    }
}

#[test]
fn contour_form_matches_interaction_form_on_graphs() {
    let g = grid(128);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..3 {
        let f = random_trig_polynomial(g.clone(), 4, &mut rng).scale(0.15);
        let c = Curve::from_graph(&f, 4.0 * PI);
        let (_, z2t) = contour_rhs_periodic(&c, &spec()).unwrap();
        let gi = GraphInterface::new(f);
        let i = interaction_rhs(&gi, &gi, &spec()).unwrap();
        let diff = z2t.values().iter().zip(i.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-8, "max difference {diff}");
    }
}

#[test]
fn velocity_off_node_interpolates_node_values() {
    let g = grid(64);
    let p = PeriodicField::from_fn(g.clone(), |a| 0.2 * a.sin());
    let q = PeriodicField::from_fn(g.clone(), |a| 0.3 * a.cos());
    let c = Curve::new(p, q, 4.0 * PI).unwrap();
    let (v1, v2) = contour_rhs_periodic(&c, &spec()).unwrap();
    let i = 17;
    let at = contour_velocity_at(&c, g.alphas()[i], &spec()).unwrap();
    assert!((at[0] - v1.values()[i]).abs() < 1e-10);
    assert!((at[1] - v2.values()[i]).abs() < 1e-10);
    // and varies continuously in between
    let mid = contour_velocity_at(&c, g.alphas()[i] + 1e-7, &spec()).unwrap();
    assert!((mid[0] - at[0]).abs() < 1e-5);
}

#[test]
fn slope_of_horizontal_velocity() {
    let g = grid(128);
    let flat = Curve::flat(g.clone(), 4.0 * PI);
    assert!(dalpha_velocity1(&flat, 0.3, &spec()).unwrap().abs() < 1e-14);

    let eps = 1e-3;
    let c = Curve::from_graph(&PeriodicField::from_fn(g.clone(), |a| eps * a.cos()), 4.0 * PI);
    assert!(dalpha_velocity1(&c, 0.0, &spec()).unwrap().abs() < 10.0 * eps * eps);

    // against a centred difference of the velocity
    let p = PeriodicField::from_fn(g.clone(), |a| 0.2 * a.sin() + 0.05 * (2.0 * a).cos());
    let q = PeriodicField::from_fn(g.clone(), |a| 0.3 * a.cos() + 0.1 * (3.0 * a).sin());
    let c = Curve::new(p, q, 4.0 * PI).unwrap();
    let a0 = 0.37;
    let h = 1e-4;
    let vp = contour_velocity_at(&c, a0 + h, &spec()).unwrap()[0];
    let vm = contour_velocity_at(&c, a0 - h, &spec()).unwrap()[0];
    let fd = (vp - vm) / (2.0 * h);
    let d = dalpha_velocity1(&c, a0, &spec()).unwrap();
    assert!((d - fd).abs() < 1e-5 * (1.0 + d.abs()), "{d} vs {fd}");

    // vertical tangent at the origin
    let p = PeriodicField::from_fn(g.clone(), |a| -a.sin());
    let q = PeriodicField::from_fn(g, |a| a.sin());
    let c = Curve::new(p, q, 4.0 * PI).unwrap();
    assert!(matches!(dalpha_velocity1(&c, 0.0, &spec()), Err(DynamicsError::UseReducida { .. })));
}

#[test]
fn touching_interfaces_are_reported() {
    let g = grid(64);
    let st = TwoPhaseState {
        f: graph(&g, |_| 0.0),
        g: graph(&g, |a| -1e-8 - 0.5 * (1.0 - a.cos())),
        rho_bar_1: 1.0,
        rho_bar_2: 1.0,
    };
    assert!(matches!(two_phase_rhs(&st, &spec()), Err(DynamicsError::NearTouching { .. })));
}

#[test]
fn realline_flat_and_crest() {
    let z = RealLineGraph::from_fn(20.0, 256, |_| 0.0).unwrap();
    assert!(graph_rhs_realline(&z, 4.0 * PI, &spec()).unwrap().iter().all(|v| *v == 0.0));

    let bump = RealLineGraph::from_fn(20.0, 512, |x| if x.abs() < 1.0 { 0.1 * (1.0 - x * x).powi(4) } else { 0.0 }).unwrap();
    let ft = graph_rhs_realline(&bump, 4.0 * PI, &spec()).unwrap();
    assert!(ft[256] < 0.0, "crest velocity {}", ft[256]);
}

#[test]
fn realline_underflowing_tails_stay_finite() {
    // f² underflows at x = ±L, where the exterior log term is evaluated
    let g = RealLineGraph::from_fn(20.0, 128, |x| 0.1 * (-x * x / 2.0).exp()).unwrap();
    let ft = graph_rhs_realline(&g, 4.0 * PI, &spec()).unwrap();
    assert!(ft.iter().all(|v| v.is_finite()));
    // far field of the linearization: 2 ∫f / x²
    let far = 2.0 * 0.1 * (2.0 * PI).sqrt() / 400.0;
    assert!((ft[0] - far).abs() < 0.05 * far && ft[64] < 0.0, "{} {}", ft[0], ft[64]);
}

/// `Λ` of `ε e^{-x²}`: `(ε/√π) ∫₀^∞ ξ e^{-ξ²/4} cos(ξx) dξ`.
fn lambda_gaussian(eps: f64, x: f64) -> f64 {
    let spec = QuadratureSpec::default();
    let v = crate::quadrature::integrate(|k| k * (-k * k / 4.0).exp() * (k * x).cos(), 0.0, 20.0, &spec).unwrap();
    eps / PI.sqrt() * v.value
}

#[test]
fn realline_gaussian_linearization() {
    let eps = 1e-3;
    let gr = RealLineGraph::from_fn(20.0, 1024, |x| eps * (-x * x).exp()).unwrap();
    let ft = graph_rhs_realline(&gr, 4.0 * PI, &spec()).unwrap();
    let scale = 2.0 * PI * lambda_gaussian(eps, 0.0);
    for (x, v) in gr.nodes().iter().zip(&ft) {
        if x.abs() > 4.0 {
            continue;
        }
        let expect = -2.0 * PI * lambda_gaussian(eps, *x);
        assert!((v - expect).abs() < 1e-2 * scale, "x={x}: {v} vs {expect}");
    }
}
