//! Independent reference implementations used by the integration tests and
//! the acceptance run. Everything here is written with plain index loops so
//! that it shares no code path with the library.

#![allow(dead_code)]

use ndarray::{Array1, Array2};
use tae_core::assignment::{lloyd_from_costs, simplex_project};
use tae_core::linear::{assignment_gradient, encoder_gradient};
use tae_core::metrics::mse;
use tae_core::mlp::{mlp_backward, Activation, MLPAutoencoder, TensorizedMLP};
use tae_core::rng::SeededRng;
use tae_core::spectral::{sym_eigen, weighted_covariance};
use tae_core::{AssignmentMatrix, ClusterLinearAE, DataMatrix, SUpdate, TaeModel};

pub const FD_STEP: f64 = 1e-5;
pub const GRADIENT_TOL: f64 = 1e-4;
pub const INSTANCES: u64 = 20;

pub fn gaussian(rows: usize, cols: usize, rng: &mut SeededRng) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || rng.normal())
}

/// `k × n` with strictly positive columns summing to one.
pub fn soft_assignments(k: usize, n: usize, rng: &mut SeededRng) -> Array2<f64> {
    let mut s = Array2::from_shape_simple_fn((k, n), || 0.05 + rng.uniform());
    for i in 0..n {
        let total: f64 = (0..k).map(|j| s[[j, i]]).sum();
        for j in 0..k {
            s[[j, i]] /= total;
        }
    }
    s
}

/// `Σ_j Σ_i S[j,i] (‖y − V U y‖² + λ ‖U y‖²)` with `y = X_i − C_j`.
pub fn naive_linear_loss(
    x: &Array2<f64>,
    s: &Array2<f64>,
    centers: &[Array1<f64>],
    encoders: &[Array2<f64>],
    decoders: &[Array2<f64>],
    lambda: f64,
) -> f64 {
    let (n, d) = x.dim();
    let mut total = 0.0;
    for j in 0..s.nrows() {
        let (u, v) = (&encoders[j], &decoders[j]);
        let h = u.nrows();
        for i in 0..n {
            let y: Vec<f64> = (0..d).map(|a| x[[i, a]] - centers[j][a]).collect();
            let mut code = vec![0.0; h];
            for (l, c) in code.iter_mut().enumerate() {
                for a in 0..d {
                    *c += u[[l, a]] * y[a];
                }
            }
            let mut err = 0.0;
            for a in 0..d {
                let mut r = 0.0;
                for l in 0..h {
                    r += v[[a, l]] * code[l];
                }
                err += (y[a] - r).powi(2);
            }
            let reg: f64 = code.iter().map(|c| c * c).sum();
            total += s[[j, i]] * (err + lambda * reg);
        }
    }
    total
}

fn act(a: Activation, v: f64) -> f64 {
    match a {
        Activation::Relu => v.max(0.0),
        Activation::Tanh => v.tanh(),
        Activation::Identity => v,
    }
}

fn affine(w: &Array2<f64>, b: &Array1<f64>, input: &[f64]) -> Vec<f64> {
    (0..w.nrows())
        .map(|r| b[r] + (0..w.ncols()).map(|c| w[[r, c]] * input[c]).sum::<f64>())
        .collect()
}

/// Pre-activations and outputs of one network on one centered input.
pub struct NaiveForward {
    pub a1: Vec<f64>,
    pub z: Vec<f64>,
    pub a3: Vec<f64>,
    pub r: Vec<f64>,
}

pub fn naive_mlp_forward(y: &[f64], ae: &MLPAutoencoder) -> NaiveForward {
    let a1 = affine(&ae.w1, &ae.b1, y);
    let h1: Vec<f64> = a1.iter().map(|&v| act(ae.activation, v)).collect();
    let z = affine(&ae.w2, &ae.b2, &h1);
    let a3 = affine(&ae.w3, &ae.b3, &z);
    let h3: Vec<f64> = a3.iter().map(|&v| act(ae.activation, v)).collect();
    let r = affine(&ae.w4, &ae.b4, &h3);
    NaiveForward { a1, z, a3, r }
}

pub fn naive_mlp_loss(
    x: &Array2<f64>,
    s: &Array2<f64>,
    centers: &[Array1<f64>],
    nets: &[MLPAutoencoder],
    lambda: f64,
) -> f64 {
    let (n, d) = x.dim();
    let mut total = 0.0;
    for (j, ae) in nets.iter().enumerate() {
        for i in 0..n {
            let y: Vec<f64> = (0..d).map(|a| x[[i, a]] - centers[j][a]).collect();
            let f = naive_mlp_forward(&y, ae);
            let err: f64 = (0..d).map(|a| (y[a] - f.r[a]).powi(2)).sum();
            let reg: f64 = f.z.iter().map(|v| v * v).sum();
            total += s[[j, i]] * (err + lambda * reg);
        }
    }
    total
}

/// Central differences of `f` at `at`, one coordinate at a time.
pub fn central_difference(f: impl Fn(&[f64]) -> f64, at: &[f64], step: f64) -> Vec<f64> {
    let mut p = at.to_vec();
    (0..at.len())
        .map(|i| {
            p[i] = at[i] + step;
            let up = f(&p);
            p[i] = at[i] - step;
            let down = f(&p);
            p[i] = at[i];
            (up - down) / (2.0 * step)
        })
        .collect()
}

/// Largest entrywise difference relative to the largest entry of either
/// tensor.
pub fn relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    assert_eq!(analytic.len(), numeric.len());
    let scale = analytic
        .iter()
        .chain(numeric)
        .fold(0.0_f64, |m, v| m.max(v.abs()))
        .max(1e-12);
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
        / scale
}

/// Random small problem shared by the gradient checks.
pub struct Instance {
    pub x: Array2<f64>,
    pub s: Array2<f64>,
    pub centers: Vec<Array1<f64>>,
    pub k: usize,
    pub h: usize,
    pub lambda: f64,
}

pub fn random_instance(seed: u64) -> Instance {
    let mut rng = SeededRng::new(seed);
    let n = 4 + rng.index(8);
    let d = 2 + rng.index(4);
    let k = 1 + rng.index(3);
    let h = 1 + rng.index(d);
    let lambda = 0.05 + 0.9 * rng.uniform();
    let x = gaussian(n, d, &mut rng);
    let s = soft_assignments(k, n, &mut rng);
    let centers = (0..k)
        .map(|_| gaussian(1, d, &mut rng).row(0).to_owned() * 0.5)
        .collect();
    Instance {
        x,
        s,
        centers,
        k,
        h,
        lambda,
    }
}

fn linear_model(inst: &Instance, encoders: &[Array2<f64>]) -> TaeModel {
    let clusters = encoders
        .iter()
        .zip(&inst.centers)
        .map(|(u, c)| ClusterLinearAE::tied(u.clone(), c.clone()))
        .collect();
    TaeModel::new(clusters, inst.lambda, 0, SUpdate::Lloyd).unwrap()
}

/// Worst relative error of the tied encoder gradient over the instances.
pub fn encoder_gradient_error(instances: u64) -> f64 {
    let mut worst = 0.0_f64;
    for seed in 0..instances {
        let inst = random_instance(1000 + seed);
        let mut rng = SeededRng::new(2000 + seed);
        let d = inst.x.ncols();
        let encoders: Vec<Array2<f64>> =
            (0..inst.k).map(|_| gaussian(inst.h, d, &mut rng)).collect();
        let model = linear_model(&inst, &encoders);
        let x = DataMatrix::new(inst.x.clone()).unwrap();
        let s = AssignmentMatrix::new(inst.s.clone()).unwrap();
        for j in 0..inst.k {
            let analytic = encoder_gradient(&x, &s, &model, j).unwrap();
            let at: Vec<f64> = encoders[j].iter().copied().collect();
            let numeric = central_difference(
                |flat| {
                    let mut enc = encoders.clone();
                    enc[j] = Array2::from_shape_vec((inst.h, d), flat.to_vec()).unwrap();
                    let dec: Vec<Array2<f64>> = enc.iter().map(|u| u.t().to_owned()).collect();
                    naive_linear_loss(&inst.x, &inst.s, &inst.centers, &enc, &dec, inst.lambda)
                },
                &at,
                FD_STEP,
            );
            let analytic: Vec<f64> = analytic.iter().copied().collect();
            worst = worst.max(relative_error(&analytic, &numeric));
        }
    }
    worst
}

/// Worst relative error of the assignment gradient over the instances.
pub fn assignment_gradient_error(instances: u64) -> f64 {
    let mut worst = 0.0_f64;
    for seed in 0..instances {
        let inst = random_instance(3000 + seed);
        let mut rng = SeededRng::new(4000 + seed);
        let d = inst.x.ncols();
        let encoders: Vec<Array2<f64>> =
            (0..inst.k).map(|_| gaussian(inst.h, d, &mut rng)).collect();
        let decoders: Vec<Array2<f64>> = encoders.iter().map(|u| u.t().to_owned()).collect();
        let model = linear_model(&inst, &encoders);
        let x = DataMatrix::new(inst.x.clone()).unwrap();
        let analytic: Vec<f64> = assignment_gradient(&x, &model)
            .unwrap()
            .iter()
            .copied()
            .collect();
        let shape = inst.s.dim();
        let at: Vec<f64> = inst.s.iter().copied().collect();
        let numeric = central_difference(
            |flat| {
                let s = Array2::from_shape_vec(shape, flat.to_vec()).unwrap();
                naive_linear_loss(
                    &inst.x,
                    &s,
                    &inst.centers,
                    &encoders,
                    &decoders,
                    inst.lambda,
                )
            },
            &at,
            FD_STEP,
        );
        worst = worst.max(relative_error(&analytic, &numeric));
    }
    worst
}

/// Distance of the nearest ReLU kink among all pre-activations.
fn kink_margin(inst: &Instance, nets: &[MLPAutoencoder]) -> f64 {
    let (n, d) = inst.x.dim();
    let mut margin = f64::INFINITY;
    for (j, ae) in nets.iter().enumerate() {
        for i in 0..n {
            let y: Vec<f64> = (0..d)
                .map(|a| inst.x[[i, a]] - inst.centers[j][a])
                .collect();
            let f = naive_mlp_forward(&y, ae);
            for v in f.a1.iter().chain(&f.a3) {
                margin = margin.min(v.abs());
            }
        }
    }
    margin
}

/// Worst relative error of every MLP parameter gradient over the instances.
/// ReLU instances whose pre-activations come within `1e-3` of the kink are
/// redrawn, since a finite difference across the kink is meaningless.
pub fn mlp_gradient_error(activation: Activation, instances: u64) -> f64 {
    let mut worst = 0.0_f64;
    let mut seed = 5000;
    let mut done = 0;
    while done < instances {
        seed += 1;
        let inst = random_instance(seed);
        let mut rng = SeededRng::new(seed ^ 0xabcd);
        let d = inst.x.ncols();
        let m = 1 + rng.index(2 * d);
        let nets: Vec<MLPAutoencoder> = (0..inst.k)
            .map(|_| {
                let mut ae = MLPAutoencoder::random(d, inst.h, m, activation, &mut rng);
                // Non-zero biases so their gradients are exercised off zero.
                let flat: Vec<f64> = ae
                    .to_flat()
                    .iter()
                    .map(|v| v + 0.3 * rng.normal())
                    .collect();
                ae.set_flat(&flat).unwrap();
                ae
            })
            .collect();
        if activation == Activation::Relu && kink_margin(&inst, &nets) < 1e-3 {
            continue;
        }
        done += 1;
        let model = TensorizedMLP::new(nets.clone(), inst.centers.clone(), inst.lambda).unwrap();
        let x = DataMatrix::new(inst.x.clone()).unwrap();
        let s = AssignmentMatrix::new(inst.s.clone()).unwrap();
        let grads = mlp_backward(&x, &s, &model).unwrap();
        for j in 0..inst.k {
            let at = nets[j].to_flat();
            let numeric = central_difference(
                |flat| {
                    let mut perturbed = nets.clone();
                    perturbed[j].set_flat(flat).unwrap();
                    naive_mlp_loss(&inst.x, &inst.s, &inst.centers, &perturbed, inst.lambda)
                },
                &at,
                FD_STEP,
            );
            worst = worst.max(relative_error(&grads[j].to_flat(), &numeric));
        }
    }
    worst
}

/// Every labeling of `n` samples into `k` clusters, as one-hot `k × n`.
pub fn all_labelings(n: usize, k: usize) -> Vec<Vec<usize>> {
    let total = k.pow(n as u32);
    (0..total)
        .map(|mut code| {
            (0..n)
                .map(|_| {
                    let l = code % k;
                    code /= k;
                    l
                })
                .collect()
        })
        .collect()
}

/// Checks on random cost matrices that the Lloyd step attains the minimum
/// over every hard assignment. Returns the number of failures.
pub fn lloyd_exhaustive_failures(instances: u64) -> usize {
    let mut failures = 0;
    for seed in 0..instances {
        let mut rng = SeededRng::new(6000 + seed);
        let n = 1 + rng.index(8);
        let k = 1 + rng.index(3);
        // Coarse integer costs make ties common.
        let costs = Array2::from_shape_simple_fn((k, n), || rng.index(4) as f64);
        let s = lloyd_from_costs(costs.view());
        let attained: f64 = (0..n)
            .map(|i| (0..k).map(|j| s.weight(j, i) * costs[[j, i]]).sum::<f64>())
            .sum();
        let best = all_labelings(n, k)
            .iter()
            .map(|labels| {
                labels
                    .iter()
                    .enumerate()
                    .map(|(i, &l)| costs[[l, i]])
                    .sum::<f64>()
            })
            .fold(f64::INFINITY, f64::min);
        if attained != best {
            failures += 1;
        }
    }
    failures
}

/// Exact simplex projection by enumerating supports: on support `A` the
/// optimum is `v_A − (Σ v_A − 1)/|A|`, and the answer is the closest
/// feasible candidate.
pub fn simplex_projection_oracle(v: &[f64]) -> Vec<f64> {
    let k = v.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 1..(1u32 << k) {
        let support: Vec<usize> = (0..k).filter(|&i| mask & (1 << i) != 0).collect();
        let shift = (support.iter().map(|&i| v[i]).sum::<f64>() - 1.0) / support.len() as f64;
        let mut p = vec![0.0; k];
        let mut feasible = true;
        for &i in &support {
            p[i] = v[i] - shift;
            if p[i] < 0.0 {
                feasible = false;
            }
        }
        if !feasible {
            continue;
        }
        let dist: f64 = (0..k).map(|i| (p[i] - v[i]).powi(2)).sum();
        if best.as_ref().is_none_or(|(b, _)| dist < *b) {
            best = Some((dist, p));
        }
    }
    best.expect("the full support is always feasible after clipping")
        .1
}

/// Largest deviation between the library projection and the enumeration
/// oracle, plus whether a grid search over the 3-simplex ever beats the
/// library result.
pub fn simplex_projection_error(instances: u64) -> (f64, bool) {
    let mut worst = 0.0_f64;
    let mut grid_beats = false;
    for seed in 0..instances {
        let mut rng = SeededRng::new(7000 + seed);
        let k = 1 + rng.index(5);
        let v: Vec<f64> = (0..k).map(|_| 2.0 * rng.normal()).collect();
        let got = simplex_project(Array1::from(v.clone()).view());
        let want = simplex_projection_oracle(&v);
        for (a, b) in got.iter().zip(&want) {
            worst = worst.max((a - b).abs());
        }
        if k == 3 {
            let dist = |p: &[f64]| (0..3).map(|i| (p[i] - v[i]).powi(2)).sum::<f64>();
            let got_dist = dist(got.as_slice().unwrap());
            let steps = 200;
            for a in 0..=steps {
                for b in 0..=(steps - a) {
                    let p = [
                        a as f64 / steps as f64,
                        b as f64 / steps as f64,
                        (steps - a - b) as f64 / steps as f64,
                    ];
                    if dist(&p) < got_dist - 1e-12 {
                        grid_beats = true;
                    }
                }
            }
        }
    }
    (worst, grid_beats)
}

pub fn naive_weighted_covariance(x: &Array2<f64>, w: &[f64], c: &[f64]) -> Array2<f64> {
    let (n, d) = x.dim();
    let mut out = Array2::zeros((d, d));
    for i in 0..n {
        for a in 0..d {
            for b in 0..d {
                out[[a, b]] += w[i] * (x[[i, a]] - c[a]) * (x[[i, b]] - c[b]);
            }
        }
    }
    out
}

pub fn naive_mse(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    let mut total = 0.0;
    let mut count = 0;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            total += (a[[i, j]] - b[[i, j]]).powi(2);
            count += 1;
        }
    }
    total / count as f64
}

/// Largest absolute deviation of the weighted covariance and of `mse` from
/// the loop references.
pub fn covariance_and_mse_error(instances: u64) -> f64 {
    let mut worst = 0.0_f64;
    for seed in 0..instances {
        let mut rng = SeededRng::new(8000 + seed);
        let n = 1 + rng.index(30);
        let d = 1 + rng.index(5);
        let k = 1 + rng.index(3);
        let x = gaussian(n, d, &mut rng);
        let s = soft_assignments(k, n, &mut rng);
        let c: Vec<f64> = (0..d).map(|_| rng.normal()).collect();
        let j = rng.index(k);
        let xm = DataMatrix::new(x.clone()).unwrap();
        let sm = AssignmentMatrix::new(s.clone()).unwrap();
        let got = weighted_covariance(&xm, &sm, Array1::from(c.clone()).view(), j).unwrap();
        let want = naive_weighted_covariance(&x, s.row(j).as_slice().unwrap(), &c);
        for (a, b) in got.iter().zip(want.iter()) {
            worst = worst.max((a - b).abs());
        }
        let y = gaussian(n, d, &mut rng);
        worst = worst.max((mse(x.view(), y.view()).unwrap() - naive_mse(&x, &y)).abs());
    }
    worst
}

/// Largest `‖Q Λ Qᵀ − A‖_max / ‖A‖_F` over random symmetric matrices.
pub fn eigen_round_trip_error(instances: u64) -> f64 {
    let mut worst = 0.0_f64;
    for seed in 0..instances {
        let mut rng = SeededRng::new(9000 + seed);
        let d = 1 + rng.index(8);
        let g = gaussian(d, d, &mut rng);
        let a = &g + &g.t();
        let e = sym_eigen(a.view()).unwrap();
        let mut rebuilt = Array2::<f64>::zeros((d, d));
        for r in 0..d {
            for c in 0..d {
                for l in 0..d {
                    rebuilt[[r, c]] += e.vectors[[r, l]] * e.values[l] * e.vectors[[c, l]];
                }
            }
        }
        let norm = a.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
        let err = rebuilt
            .iter()
            .zip(a.iter())
            .map(|(p, q)| (p - q).abs())
            .fold(0.0, f64::max);
        worst = worst.max(err / norm);
    }
    worst
}
