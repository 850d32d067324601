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

use fse_core::realspace::real_space_sum_dense;
use fse_core::{
    direct_sum, eval_kernel, eval_real_kernel, make_config, real_space_sum, rms_error,
    select_parameters, spread, spread_direct, total_sum, KernelKind, SourceSystem, Strength,
    SystemSummary, Vec3,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn kind_strategy() -> impl Strategy<Value = KernelKind> {
    prop_oneof![
        Just(KernelKind::Stokeslet),
        Just(KernelKind::Stresslet),
        Just(KernelKind::Rotlet)
    ]
}

fn vec3(range: f64) -> impl Strategy<Value = Vec3> {
    [-range..range, -range..range, -range..range]
}

fn separation() -> impl Strategy<Value = Vec3> {
    vec3(2.0).prop_filter("too close to the origin", |r| r.iter().map(|x| x * x).sum::<f64>() > 1e-2)
}

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

fn unit(i: usize) -> Vec3 {
    let mut e = [0.0; 3];
    e[i] = 1.0;
    e
}

fn unit_tensor(l: usize, m: usize) -> Strength {
    let mut t = [[0.0; 3]; 3];
    t[l][m] = 1.0;
    Strength::Tensor(t)
}

/// `G_{jl}` for the vector kernels, column by column.
fn matrix(kind: KernelKind, r: Vec3, xi: Option<f64>) -> [[f64; 3]; 3] {
    let mut g = [[0.0; 3]; 3];
    for l in 0..3 {
        let f = Strength::Vector(unit(l));
        let col = match xi {
            Some(xi) => eval_real_kernel(kind, r, xi, &f).unwrap(),
            None => eval_kernel(kind, r, &f).unwrap(),
        };
        for j in 0..3 {
            g[j][l] = col[j];
        }
    }
    g
}

/// `T_{jlm}` of the stresslet.
fn tensor(r: Vec3, xi: Option<f64>) -> [[[f64; 3]; 3]; 3] {
    let mut t = [[[0.0; 3]; 3]; 3];
    for l in 0..3 {
        for m in 0..3 {
            let f = unit_tensor(l, m);
            let v = match xi {
                Some(xi) => eval_real_kernel(KernelKind::Stresslet, r, xi, &f).unwrap(),
                None => eval_kernel(KernelKind::Stresslet, r, &f).unwrap(),
            };
            for j in 0..3 {
                t[j][l][m] = v[j];
            }
        }
    }
    t
}

fn close(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= 1e-13 * scale.max(1e-300)
}

fn max_abs3(t: &[[f64; 3]; 3]) -> f64 {
    t.iter().flatten().fold(0.0, |m: f64, x| m.max(x.abs()))
}

fn neg(r: Vec3) -> Vec3 {
    r.map(|x| -x)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn stokeslet_is_symmetric_and_even(r in separation(), xi in proptest::option::of(0.5..8.0f64)) {
        let s = matrix(KernelKind::Stokeslet, r, xi);
        let sm = matrix(KernelKind::Stokeslet, neg(r), xi);
        let scale = max_abs3(&s);
        for j in 0..3 {
            for l in 0..3 {
                prop_assert!(close(s[j][l], s[l][j], scale));
                prop_assert!(close(s[j][l], sm[j][l], scale));
            }
        }
    }

    #[test]
    fn rotlet_is_antisymmetric_and_odd(r in separation(), xi in proptest::option::of(0.5..8.0f64)) {
        let o = matrix(KernelKind::Rotlet, r, xi);
        let om = matrix(KernelKind::Rotlet, neg(r), xi);
        let scale = max_abs3(&o);
        for j in 0..3 {
            for l in 0..3 {
                prop_assert!(close(o[j][l], -o[l][j], scale));
                prop_assert!(close(o[j][l], -om[j][l], scale));
            }
        }
    }

    #[test]
    fn stresslet_is_fully_symmetric_and_odd(r in separation(), xi in proptest::option::of(0.5..8.0f64)) {
        let t = tensor(r, xi);
        let tm = tensor(neg(r), xi);
        let scale = t.iter().flatten().flatten().fold(0.0, |m: f64, x| m.max(x.abs()));
        for j in 0..3 {
            for l in 0..3 {
                for m in 0..3 {
                    let v = t[j][l][m];
                    for w in [t[j][m][l], t[l][j][m], t[l][m][j], t[m][j][l], t[m][l][j]] {
                        prop_assert!(close(v, w, scale));
                    }
                    prop_assert!(close(v, -tm[j][l][m], scale));
                }
            }
        }
    }

    #[test]
    fn kernels_scale_with_distance(kind in kind_strategy(), r in separation(), c in 0.1..10.0f64,
                                   comps in proptest::collection::vec(-1.0..1.0f64, 9)) {
        let f = Strength::from_components(kind, &comps[..kind.arity()]).unwrap();
        let u = eval_kernel(kind, r, &f).unwrap();
        let v = eval_kernel(kind, r.map(|x| c * x), &f).unwrap();
        let p = if kind == KernelKind::Stokeslet { 1 } else { 2 };
        let scale = u.iter().fold(0.0, |m: f64, x| m.max(x.abs()));
        for j in 0..3 {
            prop_assert!(close(v[j] * c.powi(p), u[j], scale));
        }
    }

    #[test]
    fn direct_sum_is_linear(kind in kind_strategy(), seed in any::<u64>(), a in -3.0..3.0f64, b in -3.0..3.0f64) {
        let s1 = random_system(kind, 20, 1.0, seed);
        let s2 = random_system(kind, 20, 1.0, seed ^ 0x5555);
        // same positions, independent strengths
        let combo: Vec<Strength> = s1
            .strengths()
            .iter()
            .zip(s2.strengths())
            .map(|(f, g)| {
                let c: Vec<f64> = f.components().iter().zip(g.components()).map(|(x, y)| a * x + b * y).collect();
                Strength::from_components(kind, &c).unwrap()
            })
            .collect();
        let s2 = SourceSystem::new(s1.positions().to_vec(), s2.strengths().to_vec(), 1.0).unwrap();
        let s3 = SourceSystem::new(s1.positions().to_vec(), combo, 1.0).unwrap();
        let x = s1.positions();
        let u1 = direct_sum(&s1, kind, x, true).unwrap();
        let u2 = direct_sum(&s2, kind, x, true).unwrap();
        let u3 = direct_sum(&s3, kind, x, true).unwrap();
        let lin = fse_core::Velocities {
            values: u1.values.iter().zip(&u2.values).map(|(p, q)| [0, 1, 2].map(|j| a * p[j] + b * q[j])).collect(),
        };
        prop_assert!(rms_error(&lin, &u3, false).unwrap() <= 1e-12 * u3.rms().max(1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cell_list_matches_brute_force(kind in kind_strategy(), n in 1usize..500, seed in any::<u64>(),
                                     rc in 0.05..1.9f64, xi in 1.0..10.0f64) {
        let sys = random_system(kind, n, 1.0, seed);
        let x = sys.positions();
        let u = real_space_sum(&sys, kind, xi, rc, x).unwrap();
        let v = real_space_sum_dense(&sys, kind, xi, rc, x).unwrap();
        let scale = v.rms();
        prop_assert!(scale == 0.0 || rms_error(&u, &v, false).unwrap() <= 1e-13 * scale);
    }

    #[test]
    fn fast_gridding_matches_naive(kind in kind_strategy(), n in 1usize..40, seed in any::<u64>(),
                                   m in 8usize..20, p in prop_oneof![Just(4usize), Just(8), Just(12), Just(16)],
                                   xi in 2.0..12.0f64) {
        let sys = random_system(kind, n, 1.0, seed);
        let cfg = make_config(1.0, xi, 0.3, m, p).unwrap();
        let a = spread(&sys, &cfg, kind).unwrap();
        let b = spread_direct(&sys, &cfg, kind).unwrap();
        let scale = b.data().iter().fold(0.0, |s: f64, x| s.max(x.abs()));
        let diff = a.data().iter().zip(b.data()).fold(0.0, |s: f64, (x, y)| s.max((x - y).abs()));
        prop_assert!(diff <= 1e-13 * scale, "{diff} vs {scale}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn total_sum_does_not_depend_on_xi(kind in kind_strategy(), seed in any::<u64>(),
                                       xi_a in 3.0..8.0f64, xi_b in 3.0..8.0f64) {
        let tol = 1e-8;
        let sys = random_system(kind, 100, 1.0, seed);
        let summary = SystemSummary::of(&sys);
        let x = sys.positions();
        let run = |xi: f64| {
            let sel = select_parameters(kind, &summary, xi, tol).unwrap();
            let green = sel.config.precompute_green(kind).unwrap();
            total_sum(&sys, kind, &sel.config, x, &green).unwrap()
        };
        let ua = run(xi_a);
        let ub = run(xi_b);
        prop_assert!(rms_error(&ua, &ub, true).unwrap() <= 2.0 * tol);
    }

    #[test]
    fn selected_parameters_meet_tolerance(kind in kind_strategy(), seed in any::<u64>(), xi in 3.0..10.0f64,
                                          tol in prop_oneof![Just(1e-4), Just(1e-6), Just(1e-8), Just(1e-10)]) {
        let sys = random_system(kind, 200, 1.0, seed);
        let sel = select_parameters(kind, &SystemSummary::of(&sys), xi, tol).unwrap();
        let green = sel.config.precompute_green(kind).unwrap();
        let x = sys.positions();
        let u = total_sum(&sys, kind, &sel.config, x, &green).unwrap();
        let r = direct_sum(&sys, kind, x, true).unwrap();
        prop_assert!(rms_error(&u, &r, true).unwrap() <= tol);
    }
}
