use std::f64::consts::PI;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use stokes_liouville::exterior::{farfield_fit, ConstantModel};
use stokes_liouville::extension::{build_extension, verify_extension, VerticalProfile};
use stokes_liouville::flows::{dirichlet_heat_shear, TimeSignal};
use stokes_liouville::multipliers::{helmholtz_check, riesz_decomposition_check};
use stokes_liouville::simulator::{run, SimConfig, TopBoundary};
use stokes_liouville::spectral::random::band_limited;
use stokes_liouville::spectral::snapshot::{read_snapshot, write_snapshot};
use stokes_liouville::spectral::{dft, dft_pair, idft, Geometry, Grid, ScalarField, VectorField};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn mean_free(f: ScalarField) -> ScalarField {
    let m = f.mean();
    f.map(|v| v - m)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn riesz_squares_sum_to_minus_identity(seed in any::<u64>(), dim in 2usize..=3, band in 1usize..=4) {
        let grid = Grid::periodic_box(dim, 16, 2.0 * PI).unwrap();
        let f = mean_free(band_limited(grid, band, &mut rng(seed)));
        let res = riesz_decomposition_check(&f).unwrap();
        prop_assert!(res <= 1e-12, "residual {res}");
    }

    #[test]
    fn helmholtz_idempotent_and_solenoidal(seed in any::<u64>(), dim in 2usize..=3, band in 1usize..=4) {
        let grid = Grid::periodic_box(dim, 16, 2.0 * PI).unwrap();
        let mut r = rng(seed);
        let v = VectorField::new((0..dim).map(|_| band_limited(grid, band, &mut r)).collect()).unwrap();
        let (idem, div) = helmholtz_check(&v).unwrap();
        prop_assert!(idem <= 1e-12 && div <= 1e-12, "idempotence {idem}, div {div}");
    }

    #[test]
    fn dft_round_trip_and_parseval(values in prop::collection::vec(-10.0f64..10.0, 64)) {
        let grid = Grid::periodic_box(2, 8, 1.0).unwrap();
        let f = ScalarField::from_values(grid, values).unwrap();
        let s = dft(&f).unwrap();
        let back = idft(&s);
        prop_assert!(back.max_diff(&f) <= 1e-12 * (1.0 + f.max_abs()));
        let e_phys: f64 = f.values().iter().map(|v| v * v).sum();
        let e_spec: f64 = s.coeffs().iter().map(|c| c.norm_sqr()).sum();
        prop_assert!((e_phys - e_spec).abs() <= 1e-10 * (1.0 + e_phys));
    }

    #[test]
    fn paired_transform_equals_single(seed in any::<u64>(), m in 3usize..=9) {
        let grid = Grid::half_strip(3, 8, 2.0 * PI, 2 * m + 1, 2.0).unwrap();
        let mut r = rng(seed);
        let f = band_limited(grid, 3, &mut r);
        let g = band_limited(grid, 3, &mut r);
        let (a, b) = dft_pair(&f, &g).unwrap();
        let (fa, gb) = (dft(&f).unwrap(), dft(&g).unwrap());
        for (x, y) in a.coeffs().iter().zip(fa.coeffs()).chain(b.coeffs().iter().zip(gb.coeffs())) {
            prop_assert!((x - y).norm() <= 1e-12);
        }
    }

    #[test]
    fn shear_is_linear_and_bounded_by_forcing_mass(
        a in -2.0f64..2.0, b in -1.5f64..-0.5, amp in -3.0f64..3.0, t in -0.4f64..0.0,
    ) {
        let dt = 0.005;
        let f = TimeSignal::bump(-2.0, b, amp, -2.5, 0.0, dt).unwrap();
        let xs: Vec<f64> = (0..=40).map(|k| 0.1 * k as f64).collect();
        let u = dirichlet_heat_shear(&f, &xs, t).unwrap();
        let v = dirichlet_heat_shear(&f.scale(a), &xs, t).unwrap();
        for (p, q) in u.iter().zip(&v) {
            prop_assert!((q - a * p).abs() <= 1e-12 * (1.0 + p.abs()));
        }
        prop_assert!(u[0].abs() <= 1e-14);
        let sup = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!(sup <= f.l1() * (1.0 + 1e-6) + 1e-12, "sup {sup}, l1 {}", f.l1());
    }

    #[test]
    fn extension_is_solenoidal_and_traceless(seed in any::<u64>(), band in 1usize..=4) {
        let grid = Grid::half_strip(3, 16, 2.0 * PI, 33, 4.0).unwrap();
        let wall = grid.wall().unwrap();
        let mut r = rng(seed);
        let g: Vec<ScalarField> = (0..2).map(|_| band_limited(wall, band, &mut r)).collect();
        let ext = build_extension(&g, &grid, &VerticalProfile::standard(4.0).unwrap()).unwrap();
        let rep = verify_extension(&ext, &g).unwrap();
        prop_assert!(rep.div_max <= 1e-12, "div {}", rep.div_max);
        prop_assert_eq!(rep.trace_max, 0.0);
        prop_assert!(rep.support_ok);
    }

    #[test]
    fn farfield_fit_recovers_power_laws(p in -3.0f64..-0.5, c in 0.5f64..5.0, offset in -1.0f64..1.0) {
        let radii: Vec<f64> = (0..9).map(|j| 4.0 + j as f64).collect();
        let values: Vec<Vec<f64>> = radii.iter().map(|r| vec![offset + c * r.powf(p)]).collect();
        let fit = farfield_fit(&radii, &values, &ConstantModel::BestFit(1), 1.0).unwrap();
        prop_assert!((fit.exponent - p).abs() <= 1e-3, "fitted {} for {p}", fit.exponent);
        prop_assert!((fit.constant[0] - offset).abs() <= 1e-6);
    }

    #[test]
    fn snapshot_round_trip(seed in any::<u64>(), geom in 0u8..3, comps in 1usize..=3) {
        let geometry = Geometry::from_code(geom).unwrap();
        let grid = Grid::new(3, 8, 2.0 * PI, 9, 3.0, geometry).unwrap();
        let mut r = rng(seed);
        let fields: Vec<ScalarField> = (0..comps).map(|_| band_limited(grid, 3, &mut r)).collect();
        let mut bytes = Vec::new();
        write_snapshot(&mut bytes, &fields).unwrap();
        let back = read_snapshot(&mut bytes.as_slice()).unwrap();
        prop_assert_eq!(back, fields);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn simulator_energy_never_grows(seed in any::<u64>(), geom in 0u8..3, free_slip in any::<bool>()) {
        let geometry = Geometry::from_code(geom).unwrap();
        let grid = Grid::new(3, 8, 2.0 * PI, 17, 3.0, geometry).unwrap();
        let mut cfg = SimConfig::new(grid, 0.05, 0.5);
        cfg.seed = seed;
        cfg.band = 3;
        if free_slip && geometry == Geometry::HalfStrip {
            cfg.top_bc = TopBoundary::FreeSlip;
        }
        let out = run(&cfg, None).unwrap();
        for w in out.diagnostics.windows(2) {
            prop_assert!(w[1].energy <= w[0].energy * (1.0 + 1e-12), "{} -> {}", w[0].energy, w[1].energy);
        }
        for d in &out.diagnostics {
            prop_assert!(d.div_max <= 1e-10);
        }
    }
}
