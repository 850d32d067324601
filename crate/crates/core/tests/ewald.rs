// Copyright 2026 The fse-stokes Authors
//
// Licensed under the Apache license, version 2.0 (the "license");
// you may not use this file except in compliance with the license.
// You may obtain a copy of the license at
//
//     http://www.apache.org/licenses/license-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the license is distributed on an "as is" basis,
// without warranties or conditions of any kind, either express or implied.
// See the license for the specific language governing permissions and
// limitations under the license.


use std::f64::consts::PI;

use approx::assert_relative_eq;
use fse_core::ewald::{green_kind, next_smooth};
use fse_core::{
    direct_sum, fourier_sum, kspace_scale, make_config, rms_error, spread, spread_direct,
    total_sum, Complex64, FourierField, KernelKind, SourceSystem, Strength, VectorGrid,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_system(kind: KernelKind, n: usize, side: f64, seed: u64) -> SourceSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let positions = (0..n)
        .map(|_| [side * rng.gen::<f64>(), side * rng.gen::<f64>(), side * rng.gen::<f64>()])
        .collect();
    let strengths = (0..n)
        .map(|_| {
            let c: Vec<f64> = (0..kind.arity()).map(|_| 2.0 * rng.gen::<f64>() - 1.0).collect();
            Strength::from_components(kind, &c).unwrap()
        })
        .collect();
    SourceSystem::new(positions, strengths, side).unwrap()
}

#[test]
fn config_derived_quantities() {
    let cfg = make_config(2.0, 7.0, 0.63, 48, 16).unwrap();
    assert_relative_eq!(cfg.spacing(), 1.0 / 24.0, max_relative = 1e-15);
    assert_relative_eq!(cfg.support_width(), 2.0 / 3.0, max_relative = 1e-15);
    assert_relative_eq!(cfg.shape(), 6.921, max_relative = 1e-3);
    assert_relative_eq!(cfg.eta(), 0.4546, max_relative = 1e-3);
    // minimal extension is 25h, padded to a smooth size
    assert_eq!(cfg.ext_grid_size(), next_smooth(73));
    assert_eq!(cfg.ext_grid_size(), 75);
    assert_relative_eq!(cfg.ext_side(), 75.0 / 24.0, max_relative = 1e-14);
    assert_relative_eq!(cfg.k_inf(), 24.0 * PI, max_relative = 1e-14);
    assert_relative_eq!(cfg.radius(), 3f64.sqrt() * cfg.ext_side(), max_relative = 1e-15);
}

#[test]
fn wide_gaussians_extend_by_support_only() {
    // ξd/m > 1, and M + P = 64 is already smooth
    let cfg = make_config(2.0, 12.0, 0.5, 48, 16).unwrap();
    assert!(cfg.eta() >= 1.0);
    assert_relative_eq!(cfg.extension(), cfg.support_width(), max_relative = 1e-14);
    assert_eq!(cfg.ext_grid_size(), 64);
}

#[test]
fn extended_grid_is_whole_and_smooth() {
    for (l, m, p, xi) in [(1.0, 10, 8, 3.0), (3.0, 37, 24, 5.5), (0.7, 5, 4, 20.0), (2.5, 64, 32, 2.0)] {
        let cfg = make_config(l, xi, 0.3, m, p).unwrap();
        let ratio = cfg.ext_side() / cfg.spacing();
        assert!((ratio - ratio.round()).abs() < 1e-9);
        assert_eq!(next_smooth(cfg.ext_grid_size()), cfg.ext_grid_size());
        assert!(cfg.extension() >= cfg.support_width() * (1.0 - 1e-12));
        assert!(cfg.support() <= cfg.ext_grid_size());
    }
}

#[test]
fn config_rejects_bad_input() {
    assert!(make_config(1.0, 5.0, 0.3, 16, 7).is_err());
    assert!(make_config(1.0, 5.0, 0.3, 16, 0).is_err());
    assert!(make_config(1.0, -5.0, 0.3, 16, 8).is_err());
    assert!(make_config(1.0, 5.0, 0.0, 16, 8).is_err());
    assert!(make_config(0.0, 5.0, 0.3, 16, 8).is_err());
    assert!(make_config(1.0, 5.0, 0.3, 0, 8).is_err());
}

#[test]
fn single_source_on_node_spreads_sampled_gaussian() {
    let cfg = make_config(1.0, 6.0, 0.3, 16, 8).unwrap().with_deterministic(true);
    let x0 = cfg.grid_origin()[0];
    let h = cfg.spacing();
    let node = [8usize, 9, 10];
    let pos = node.map(|i| x0 + i as f64 * h);
    let sys = SourceSystem::new(vec![pos], vec![Strength::Vector([1.0, 0.0, 0.0])], 1.0).unwrap();
    let grid = spread(&sys, &cfg, KernelKind::Stokeslet).unwrap();
    let alpha = cfg.gaussian_exponent();
    let norm = (alpha / PI).powf(1.5);
    let n = cfg.ext_grid_size();
    let p = cfg.support();
    let mut support_count = 0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let v = grid.get(0, i, j, k);
                // tie at a node resolves toward the lower index
                let inside = [i, j, k]
                    .iter()
                    .zip(node)
                    .all(|(&a, c)| a + p / 2 >= c && a < c + p / 2);
                if inside {
                    support_count += 1;
                    let x = grid.node_position(i, j, k);
                    let r2: f64 = (0..3).map(|d| (x[d] - pos[d]).powi(2)).sum();
                    assert_relative_eq!(v, norm * (-alpha * r2).exp(), max_relative = 1e-13);
                } else {
                    assert_eq!(v, 0.0);
                }
                assert_eq!(grid.get(1, i, j, k), 0.0);
            }
        }
    }
    assert_eq!(support_count, p * p * p);
}

#[test]
fn spread_integral_recovers_strengths() {
    for kind in KernelKind::ALL {
        let sys = random_system(kind, 40, 1.0, 11);
        let cfg = make_config(1.0, 6.0, 0.3, 20, 16).unwrap();
        let grid = spread(&sys, &cfg, kind).unwrap();
        let bound = (-cfg.shape().powi(2) / 2.0).exp();
        for c in 0..kind.arity() {
            let want: f64 = sys.strengths().iter().map(|f| f.components()[c]).sum();
            let scale: f64 = sys.strengths().iter().map(|f| f.components()[c].abs()).sum();
            assert!((grid.integral(c) - want).abs() <= bound * scale + 1e-13 * scale);
        }
    }
}

#[test]
fn fast_gridding_matches_naive() {
    for (kind, p) in [(KernelKind::Stokeslet, 8), (KernelKind::Stresslet, 16), (KernelKind::Rotlet, 24)] {
        let sys = random_system(kind, 25, 1.3, 5);
        let cfg = make_config(1.3, 5.0, 0.3, 14, p).unwrap().with_deterministic(true);
        let fast = spread(&sys, &cfg, kind).unwrap();
        let slow = spread_direct(&sys, &cfg, kind).unwrap();
        let peak = slow.data().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (a, b) in fast.data().iter().zip(slow.data()) {
            assert!((a - b).abs() <= 1e-13 * peak, "{a} vs {b}");
        }
    }
}

fn transformed_random_field(cfg: &fse_core::EwaldConfig, comps: usize) -> FourierField {
    let n = cfg.ext_grid_size();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut grid = VectorGrid::zeros([n; 3], cfg.spacing(), cfg.grid_origin(), comps).unwrap();
    grid.data_mut().iter_mut().for_each(|v| *v = rng.gen::<f64>() - 0.5);
    FourierField::forward(&grid).unwrap()
}

#[test]
fn stokeslet_scaling_kills_zero_mode_and_is_divergence_free() {
    let cfg = make_config(1.0, 5.0, 0.3, 8, 8).unwrap();
    let kind = KernelKind::Stokeslet;
    let green = cfg.precompute_green(kind).unwrap();
    let ghat = transformed_random_field(&cfg, 3);
    let out = kspace_scale(&ghat, &cfg, kind, &green).unwrap();
    for c in 0..3 {
        assert_eq!(out.get(c, 0, 0, 0), Complex64::new(0.0, 0.0));
    }
    let n = out.size();
    let peak = out.component(0).iter().fold(0.0f64, |m, v| m.max(v.norm()));
    for (i, j, k) in [(1, 2, 3), (5, n - 1, 2), (n / 2, 3, n - 4)] {
        let kv = [out.wavenumber(i), out.wavenumber(j), out.wavenumber(k)];
        let div: Complex64 = (0..3).map(|c| out.get(c, i, j, k) * kv[c]).sum();
        let kn = (kv[0] * kv[0] + kv[1] * kv[1] + kv[2] * kv[2]).sqrt();
        assert!(div.norm() <= 1e-13 * peak * kn);
    }
}

#[test]
fn rotlet_scaling_on_axis() {
    let cfg = make_config(1.0, 5.0, 0.3, 8, 8).unwrap();
    let kind = KernelKind::Rotlet;
    let green = cfg.precompute_green(kind).unwrap();
    let ghat = transformed_random_field(&cfg, 3);
    let out = kspace_scale(&ghat, &cfg, kind, &green).unwrap();
    for i in [1usize, 4, 9] {
        let kappa = out.wavenumber(i);
        let hr = green.at_fft_index(i, 0, 0);
        let e = (-(1.0 - cfg.eta()) * kappa * kappa / (4.0 * cfg.xi().powi(2))).exp();
        let g2 = ghat.get(1, i, 0, 0);
        let g3 = ghat.get(2, i, 0, 0);
        let want = [
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, hr * e) * (-kappa * g3),
            Complex64::new(0.0, hr * e) * (kappa * g2),
        ];
        for c in 0..3 {
            let got = out.get(c, i, 0, 0);
            assert!((got - want[c]).norm() <= 1e-13 * (1.0 + want[c].norm()), "{got} vs {}", want[c]);
        }
    }
}

#[test]
fn kspace_scale_checks_shapes() {
    let cfg = make_config(1.0, 5.0, 0.3, 8, 8).unwrap();
    let green = cfg.precompute_green(KernelKind::Stokeslet).unwrap();
    let ghat = transformed_random_field(&cfg, 9);
    assert!(kspace_scale(&ghat, &cfg, KernelKind::Stokeslet, &green).is_err());
    let wrong = cfg.precompute_green(KernelKind::Rotlet).unwrap();
    let ghat = transformed_random_field(&cfg, 3);
    assert!(kspace_scale(&ghat, &cfg, KernelKind::Stokeslet, &wrong).is_err());
}

#[test]
fn two_sources_match_direct_sum() {
    for kind in KernelKind::ALL {
        let sys = random_system(kind, 2, 1.0, 21);
        // extra oversampling keeps the biharmonic kernels under 1e-12
        let cfg = make_config(1.0, 5.0, 2.0, 32, 24).unwrap().with_oversampling(6.0).unwrap();
        let green = cfg.precompute_green(kind).unwrap();
        let u = total_sum(&sys, kind, &cfg, sys.positions(), &green).unwrap();
        let r = direct_sum(&sys, kind, sys.positions(), true).unwrap();
        let err = rms_error(&u, &r, true).unwrap();
        assert!(err < 1e-12, "{kind}: {err}");
    }
}

#[test]
fn all_kernels_match_direct_sum_with_detached_targets() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let targets: Vec<_> = (0..50).map(|_| [rng.gen(), rng.gen(), rng.gen()]).collect();
    for kind in KernelKind::ALL {
        let sys = random_system(kind, 200, 1.0, 8);
        let cfg = make_config(1.0, 8.0, 0.7, 40, 24).unwrap();
        let green = cfg.precompute_green(kind).unwrap();
        let u = total_sum(&sys, kind, &cfg, &targets, &green).unwrap();
        let r = direct_sum(&sys, kind, &targets, false).unwrap();
        let err = rms_error(&u, &r, true).unwrap();
        assert!(err < 1e-10, "{kind}: {err}");
    }
}

#[test]
fn output_is_linear_in_strengths() {
    let kind = KernelKind::Stresslet;
    let sys = random_system(kind, 60, 1.0, 2);
    let cfg = make_config(1.0, 6.0, 0.5, 20, 16).unwrap().with_deterministic(true);
    let green = cfg.precompute_green(kind).unwrap();
    let u = total_sum(&sys, kind, &cfg, sys.positions(), &green).unwrap();
    let c = -2.75;
    let v = total_sum(&sys.scaled(c), kind, &cfg, sys.positions(), &green).unwrap();
    let scaled = fse_core::Velocities {
        values: u.values.iter().map(|x| x.map(|y| c * y)).collect(),
    };
    assert!(rms_error(&v, &scaled, true).unwrap() < 1e-13);
}

#[test]
fn result_does_not_depend_on_xi() {
    let kind = KernelKind::Stokeslet;
    let sys = random_system(kind, 300, 1.0, 4);
    let run = |xi: f64, rc: f64, m: usize| {
        let cfg = make_config(1.0, xi, rc, m, 24).unwrap();
        let green = cfg.precompute_green(kind).unwrap();
        total_sum(&sys, kind, &cfg, sys.positions(), &green).unwrap()
    };
    let a = run(5.0, 1.0, 24);
    let b = run(9.0, 0.56, 42);
    let r = direct_sum(&sys, kind, sys.positions(), true).unwrap();
    assert!(rms_error(&a, &r, true).unwrap() < 1e-10);
    assert!(rms_error(&b, &r, true).unwrap() < 1e-10);
    assert!(rms_error(&a, &b, true).unwrap() < 2e-10);
}

#[test]
fn spread_and_quadrature_are_adjoint() {
    // S^F is symmetric, so the response at b to a unit force at a along l,
    // component j, equals the response at a to a unit force at b along j,
    // component l.
    let kind = KernelKind::Stokeslet;
    let cfg = make_config(1.0, 5.0, 0.3, 16, 12).unwrap();
    let green = cfg.precompute_green(kind).unwrap();
    let a = [0.21, 0.47, 0.33];
    let b = [0.72, 0.15, 0.58];
    let response = |src: [f64; 3], dir: usize, dst: [f64; 3]| {
        let mut f = [0.0; 3];
        f[dir] = 1.0;
        let sys = SourceSystem::new(vec![src], vec![Strength::Vector(f)], 1.0).unwrap();
        fourier_sum(&sys, &cfg, kind, &[dst], &green).unwrap().values[0]
    };
    for l in 0..3 {
        let ab = response(a, l, b);
        for j in 0..3 {
            let ba = response(b, j, a)[l];
            assert!((ab[j] - ba).abs() < 1e-13 * ab.iter().map(|v| v.abs()).sum::<f64>());
        }
    }
}

#[test]
fn deterministic_mode_is_bitwise_stable() {
    let kind = KernelKind::Rotlet;
    let sys = random_system(kind, 120, 1.0, 6);
    let cfg = make_config(1.0, 6.0, 0.4, 18, 16).unwrap().with_deterministic(true);
    let green = cfg.precompute_green(kind).unwrap();
    let a = total_sum(&sys, kind, &cfg, sys.positions(), &green).unwrap();
    let b = total_sum(&sys, kind, &cfg, sys.positions(), &green).unwrap();
    assert_eq!(a, b);
}

#[test]
fn targets_outside_box_rejected() {
    let kind = KernelKind::Stokeslet;
    let sys = random_system(kind, 5, 1.0, 1);
    let cfg = make_config(1.0, 5.0, 0.3, 8, 8).unwrap();
    let green = cfg.precompute_green(kind).unwrap();
    assert!(matches!(
        fourier_sum(&sys, &cfg, kind, &[[0.5, 1.01, 0.5]], &green),
        Err(fse_core::Error::Parameter(_))
    ));
}

#[test]
fn mismatched_green_rejected() {
    let kind = KernelKind::Stokeslet;
    let sys = random_system(kind, 5, 1.0, 1);
    let cfg = make_config(1.0, 5.0, 0.3, 8, 8).unwrap();
    let other = make_config(1.0, 5.0, 0.3, 10, 8).unwrap();
    assert_eq!(green_kind(kind), fse_core::GreenKind::Biharmonic);
    let green = other.precompute_green(kind).unwrap();
    assert!(matches!(
        fourier_sum(&sys, &cfg, kind, sys.positions(), &green),
        Err(fse_core::Error::Shape(_))
    ));
}
