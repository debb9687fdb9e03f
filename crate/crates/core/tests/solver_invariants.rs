use cloak_core::material::CloakConfig;
use cloak_core::metrics::{default_probe, sound_hard_gap, trace_gap};
use cloak_core::solver::{solve_cloak, solve_free};
use cloak_core::Dimension;

const DIMS: [Dimension; 2] = [Dimension::Two, Dimension::Three];

#[test]
fn unit_modes_carry_unit_boundary_flux() {
    for dim in DIMS {
        let c = CloakConfig::reference(dim, 0.03);
        let sol = solve_cloak(&c, &default_probe(dim, c.radius).unwrap()).unwrap();
        let outer = sol.layers.len() - 1;
        for n in 0..=sol.n_max() {
            let (_, flux) = sol.radial_in_layer(n, outer, c.radius).unwrap();
            assert!((flux - 1.0).norm() < 1e-12, "{dim:?} n={n}: {flux}");
        }
    }
}

#[test]
fn field_matches_trace_on_spheres() {
    for dim in DIMS {
        let c = CloakConfig::reference(dim, 0.05);
        let sol = solve_cloak(&c, &default_probe(dim, c.radius).unwrap()).unwrap();
        for r in [0.01, 0.04, 0.07, 1.3] {
            let trace = sol.trace(r).unwrap();
            let (theta, phi) = (0.7f64, -1.1f64);
            let point = match dim {
                Dimension::Two => vec![r * theta.cos(), r * theta.sin()],
                Dimension::Three => vec![
                    r * theta.sin() * phi.cos(),
                    r * theta.sin() * phi.sin(),
                    r * theta.cos(),
                ],
            };
            let a = sol.field_eval(&point).unwrap();
            let b = trace.eval(theta, if dim == Dimension::Two { 0.0 } else { phi });
            assert!((a - b).norm() <= 1e-12 * (1.0 + b.norm()), "{dim:?} r={r}");
        }
        assert!(sol.field_eval(&vec![3.0; dim.as_usize()]).is_err());
        assert!(sol.field_eval(&[0.1]).is_err());
    }
}

#[test]
fn background_cloak_reproduces_the_free_field() {
    for dim in DIMS {
        let mut c = CloakConfig::reference(dim, 0.05);
        c.no_cloak = true;
        let psi = default_probe(dim, c.radius).unwrap();
        let cloak = solve_cloak(&c, &psi).unwrap();
        let free = solve_free(c.omega, c.radius, &psi, dim).unwrap();
        for r in [0.02, 0.5, 2.0] {
            let (a, b) = (cloak.trace(r).unwrap(), free.trace(r).unwrap());
            for n in 0..=a.n_max() {
                for (x, y) in a.row(n).iter().zip(b.row(n)) {
                    assert!((x - y).norm() <= 1e-12 * (1.0 + y.norm()));
                }
            }
        }
        assert!(trace_gap(&c, &psi).unwrap() < 1e-14);
    }
}

#[test]
fn gaps_shrink_with_the_cloak() {
    for dim in DIMS {
        let psi = default_probe(dim, 2.0).unwrap();
        let gaps: Vec<f64> = [0.08, 0.04, 0.02, 0.01]
            .iter()
            .map(|&rho| trace_gap(&CloakConfig::reference(dim, rho), &psi).unwrap())
            .collect();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{dim:?}: {gaps:?}");
        let hard: Vec<f64> = [0.08, 0.04, 0.02, 0.01]
            .iter()
            .map(|&rho| sound_hard_gap(&CloakConfig::reference(dim, rho), &psi).unwrap())
            .collect();
        assert!(hard.windows(2).all(|w| w[1] < w[0]), "{dim:?}: {hard:?}");
    }
}
