use proptest::prelude::*;

use coupled_fv::coupling::{make_linear_coupling, FluxFamily, Gamma};
use coupled_fv::diagnostics::check_max_principle;
use coupled_fv::exec::Execution;
use coupled_fv::flux::{directional_flux_u, FluxKind, NumericalFlux};
use coupled_fv::io::config::{InitialData, MeshSource};
use coupled_fv::io::{parse_config_str, serialize_config};
use coupled_fv::mesh::{build_cartesian_mesh, derive_dual, BetaRule, BoundingBox};
use coupled_fv::presets::preset;
use coupled_fv::scheme::{run_problem, Problem};
use coupled_fv::verify::{probe_models, sized_preset};

fn simplex(l: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, l + 1).prop_map(move |raw| {
        let s: f64 = raw.iter().sum::<f64>().max(1e-12);
        raw[..l].iter().map(|x| x / s).collect()
    })
}

fn unit_normal() -> impl Strategy<Value = [f64; 2]> {
    (0.0f64..std::f64::consts::TAU).prop_map(|a| [a.cos(), a.sin()])
}

fn kind() -> impl Strategy<Value = FluxKind> {
    prop_oneof![Just(FluxKind::Rusanov), Just(FluxKind::Godunov)]
}

proptest! {
    #[test]
    fn flux_is_consistent_conservative_and_monotone(
        m in 0usize..3,
        kind in kind(),
        raw_v in simplex(2),
        nu in unit_normal(),
        a in -1.5f64..2.5,
        b in -1.5f64..2.5,
        d in 1e-6f64..0.5,
    ) {
        let (_, model) = probe_models().swap_remove(m);
        let v = &raw_v[..model.num_components()];
        let flux = NumericalFlux::new(kind, model.clone());
        let g = |x: f64, y: f64, n: [f64; 2]| flux.eval_u(x, y, v, n).g;
        prop_assert_eq!(g(a, a, nu), directional_flux_u(&model, a, v, nu));
        prop_assert_eq!(g(a, b, nu), -g(b, a, [-nu[0], -nu[1]]));
        // C_0 is increasing in u, so shifts in u are shifts of w with the same sign
        prop_assert!(g(a + d, b, nu) - g(a, b, nu) >= -1e-10);
        prop_assert!(g(a, b + d, nu) - g(a, b, nu) <= 1e-10);
    }

    #[test]
    fn godunov_lies_between_endpoint_fluxes_and_rusanov_bound(
        raw_v in simplex(2),
        nu in unit_normal(),
        a in -1.0f64..2.0,
        b in -1.0f64..2.0,
    ) {
        let (_, model) = probe_models().swap_remove(0);
        let v = &raw_v[..1];
        let god = NumericalFlux::new(FluxKind::Godunov, model.clone()).eval_u(a, b, v, nu).g;
        let (fa, fb) = (directional_flux_u(&model, a, v, nu), directional_flux_u(&model, b, v, nu));
        // the extremum over the interval is below the endpoint minimum (a < b) or above the maximum
        if a <= b {
            prop_assert!(god <= fa.min(fb) + 1e-15);
        } else {
            prop_assert!(god >= fa.max(fb) - 1e-15);
        }
    }

    #[test]
    fn coupling_recovers_domain_equations_at_simplex_vertices(
        s1 in 0.5f64..3.0,
        s2 in 0.5f64..3.0,
        u in -2.0f64..2.0,
        shift in -1.0f64..1.0,
    ) {
        let gammas = vec![Gamma::linear(1.0), Gamma::linear(s1), Gamma::linear(s2)];
        let fluxes = vec![
            FluxFamily::burgers([1.0, 0.0]),
            FluxFamily::Quadratic { direction: [0.3, 1.0], shift },
            FluxFamily::Linear { velocity: [-0.5, 0.25] },
        ];
        let m = make_linear_coupling(gammas.clone(), fluxes.clone()).unwrap();
        let vertices = [vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        for (l, v) in vertices.iter().enumerate() {
            prop_assert_eq!(m.c0(u, v), gammas[l].eval(u));
            let f = m.flux_u(u, v);
            let expect = fluxes[l].eval(gammas[l].eval(u));
            prop_assert!((f[0] - expect[0]).abs() <= 1e-14 * (1.0 + expect[0].abs()));
            prop_assert!((f[1] - expect[1]).abs() <= 1e-14 * (1.0 + expect[1].abs()));
        }
    }

    #[test]
    fn c0_is_increasing_and_inverts(
        m in 0usize..3,
        raw_v in simplex(2),
        u in -3.0f64..3.0,
    ) {
        let (_, model) = probe_models().swap_remove(m);
        let v = &raw_v[..model.num_components()];
        prop_assert!(model.dc0_du(u, v) > 0.0);
        let w = model.c0(u, v);
        let back = model.invert_c0_single(w, v).unwrap();
        prop_assert!((back - u).abs() <= 1e-10 * (1.0 + u.abs()), "{} vs {}", back, u);
    }

    #[test]
    fn dual_fractions_partition_each_cell(nx in 1usize..12, ny in 1usize..12, w in 0.1f64..5.0, h in 0.1f64..5.0) {
        let mesh = build_cartesian_mesh(nx, ny, BoundingBox::new(-1.0, 0.5, -1.0 + w, 0.5 + h)).unwrap();
        for rule in [BetaRule::Centroid, BetaRule::UniformVertexWeights] {
            let dual = derive_dual(&mesh, &rule).unwrap();
            for k in 0..mesh.num_cells() {
                let s: f64 = mesh.face_range(k).map(|f| dual.fractions[f]).sum();
                prop_assert!((s - 1.0).abs() <= 1e-13);
                prop_assert!(mesh.face_range(k).all(|f| dual.fractions[f] > 0.0));
            }
        }
    }

    #[test]
    fn config_round_trips(
        n in 1usize..300,
        cfl in 0.01f64..1.0,
        godunov in any::<bool>(),
        t_end in 0.1f64..10.0,
        fractions in prop::collection::vec(0.0f64..1.0, 0..5),
        x0 in -1.0f64..1.0,
        seed in any::<u64>(),
        random in any::<bool>(),
    ) {
        let mut c = preset("two-domain").unwrap();
        if let MeshSource::Cartesian { bbox, .. } = c.mesh.source {
            c.mesh.source = MeshSource::Cartesian { nx: n, ny: n + 1, bbox };
        }
        c.scheme.cfl_number = cfl;
        c.scheme.flux = if godunov { FluxKind::Godunov } else { FluxKind::Rusanov };
        c.run.t_end = t_end;
        let mut snaps: Vec<f64> = fractions.iter().map(|f| f * t_end).collect();
        snaps.sort_by(f64::total_cmp);
        snaps.dedup();
        c.run.snapshots = snaps;
        c.run.initial = if random {
            InitialData::Random { lo: -0.5, hi: 1.5, seed }
        } else {
            InitialData::Step { x0, left: 1.0, right: 0.0 }
        };
        let text = serialize_config(&c);
        let back = parse_config_str(&text).unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(serialize_config(&back), text);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn short_runs_keep_the_maximum_principle(n in 4usize..16, seed in any::<u64>(), godunov in any::<bool>()) {
        let mut c = sized_preset("two-domain", n);
        c.run.initial = InitialData::Random { lo: 0.0, hi: 1.0, seed };
        c.scheme.flux = if godunov { FluxKind::Godunov } else { FluxKind::Rusanov };
        let mut p = Problem::from_config(&c).unwrap();
        p.max_steps = Some(8);
        let out = run_problem(&p).unwrap();
        prop_assert!(check_max_principle(&out.log) >= -1e-11);
        prop_assert!(out.log.max_conservation_residual() <= 1e-10);
        let u = &out.snapshots.last().unwrap().u;
        prop_assert!(u.iter().all(|&x| (-1e-11..=1.0 + 1e-11).contains(&x)));
    }

    #[test]
    fn constants_are_preserved_exactly(n in 4usize..16, u_star in -2.0f64..2.0, three in any::<bool>()) {
        let mut c = sized_preset(if three { "three-domain" } else { "two-domain" }, n);
        c.run.initial = InitialData::Constant(u_star);
        let mut p = Problem::from_config(&c).unwrap();
        p.max_steps = Some(10);
        p.t_end = f64::MAX;
        p.snapshots.clear();
        let out = run_problem(&p).unwrap();
        prop_assert_eq!(out.steps, 10);
        prop_assert!(out.snapshots.last().unwrap().u.iter().all(|&u| u == u_star));
    }

    #[test]
    fn serial_and_parallel_agree_bitwise(n in 4usize..12, seed in any::<u64>()) {
        let mut c = sized_preset("three-domain", n);
        c.run.initial = InitialData::Random { lo: 0.0, hi: 1.0, seed };
        let mut p = Problem::from_config(&c).unwrap();
        p.max_steps = Some(6);
        p.exec = Execution::Serial;
        let a = run_problem(&p).unwrap();
        p.exec = Execution::Parallel;
        let b = run_problem(&p).unwrap();
        prop_assert_eq!(a, b);
    }
}
