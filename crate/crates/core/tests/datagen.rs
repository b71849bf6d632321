mod common;

use ndarray::Array1;
use seqlasso::conditions::special;
use seqlasso::datagen::{
    gen_coefficients, gen_design, gen_response, replicate_rng, CoefType, StructureKind,
    StructureSpec,
};
use seqlasso::model::Dataset;

#[test]
fn type1_sign_frequency_matches_bernoulli_parameter() {
    let mut neg = 0usize;
    let mut rng = replicate_rng(71, 0);
    let draws = 10_000;
    let beta = gen_coefficients(CoefType::One, draws, 100, &mut rng);
    for b in beta {
        if b < 0.0 {
            neg += 1;
        }
    }
    let freq = neg as f64 / draws as f64;
    assert!((freq - 0.4).abs() <= 0.03, "negative frequency {freq}");
}

#[test]
fn independent_design_has_small_pairwise_correlations() {
    let n = 500;
    let p = 300;
    let spec = StructureSpec::new(StructureKind::A1, None);
    let sample = gen_design(&spec, n, p, 8, &mut replicate_rng(72, 0)).unwrap();
    let d = Dataset::standardize(sample.x, Array1::zeros(n)).unwrap();
    let gram = d.x().t().dot(d.x()) / n as f64;
    let bound = 4.0 / (n as f64).sqrt();
    let mut total = 0usize;
    let mut inside = 0usize;
    for a in 0..p {
        for b in 0..a {
            total += 1;
            if gram[[a, b]].abs() <= bound {
                inside += 1;
            }
        }
    }
    assert!(inside as f64 >= 0.99 * total as f64, "{inside}/{total}");
}

fn empirical_cov(x: &ndarray::Array2<f64>, a: usize, b: usize) -> f64 {
    let nf = x.nrows() as f64;
    let ca = x.column(a);
    let cb = x.column(b);
    let ma = ca.sum() / nf;
    let mb = cb.sum() / nf;
    ca.iter().zip(cb.iter()).map(|(u, v)| (u - ma) * (v - mb)).sum::<f64>() / nf
}

#[test]
fn b1_causal_block_is_uncorrelated() {
    // the 0.05 band sits at the expected maximum of a single n = 2000 draw,
    // so the check runs on the average over a few replicate draws
    let n = 2000;
    let p0 = 8;
    let reps = 4;
    let spec = StructureSpec::new(StructureKind::B1, None);
    let mut acc = ndarray::Array2::<f64>::zeros((p0, p0));
    for rep in 0..reps {
        let sample = gen_design(&spec, n, 40, p0, &mut replicate_rng(73, rep)).unwrap();
        assert_eq!(sample.sigma_causal, ndarray::Array2::eye(p0));
        for a in 0..p0 {
            for b in 0..p0 {
                acc[[a, b]] += empirical_cov(&sample.x, a, b) / reps as f64;
            }
        }
    }
    for a in 0..p0 {
        for b in 0..p0 {
            let want = if a == b { 1.0 } else { 0.0 };
            assert!((acc[[a, b]] - want).abs() <= 0.05, "({a},{b}): {}", acc[[a, b]]);
        }
    }
}

#[test]
fn b2_noncausal_covariance_follows_the_construction() {
    // cov(X_j noncausal, X_k causal) = (row sum of the causal covariance) / p0
    let n = 2000;
    let p0 = 6;
    let rho = 0.5;
    let reps = 4;
    let spec = StructureSpec::new(StructureKind::B2, Some(rho));
    let want = (1.0 + (p0 as f64 - 1.0) * rho) / p0 as f64;
    for j in [p0, p0 + 5, 25usize] {
        for k in 0..p0 {
            let mut acc = 0.0;
            for rep in 0..reps {
                let sample =
                    gen_design(&spec, n, 30, p0, &mut replicate_rng(74, rep)).unwrap();
                acc += empirical_cov(&sample.x, j, k) / reps as f64;
            }
            assert!((acc - want).abs() <= 0.05, "cov(x{j}, x{k}) = {acc}, want {want}");
        }
    }
}

#[test]
fn constant_correlation_quadratic_form_identity() {
    // beta' Sigma beta = (1 - rho) sum beta^2 + rho (sum beta)^2
    let rho = 0.5;
    let p0 = 9;
    let spec = StructureSpec::new(StructureKind::A2, Some(rho));
    let sample = gen_design(&spec, 100, 672, p0, &mut replicate_rng(75, 0)).unwrap();
    let beta = gen_coefficients(CoefType::Two, p0, 100, &mut replicate_rng(75, 1));
    let sum: f64 = beta.iter().sum();
    let sumsq: f64 = beta.iter().map(|b| b * b).sum();
    let closed = (1.0 - rho) * sumsq + rho * sum * sum;
    let mut quad = 0.0;
    for (a, &ba) in beta.iter().enumerate() {
        for (b, &bb) in beta.iter().enumerate() {
            quad += ba * bb * sample.sigma_causal[[a, b]];
        }
    }
    assert!((quad - closed).abs() < 1e-10);

    // and the drawn noise level solves the h ratio against it
    let h = 0.8;
    let (_, sigma) =
        gen_response(&sample.x, &sample.s0, &beta, h, &sample.sigma_causal, &mut replicate_rng(75, 2))
            .unwrap();
    assert!((sigma * sigma - closed * (1.0 - h) / h).abs() < 1e-10);
}

#[test]
fn a2_shadow_of_the_population_separation() {
    // at s = empty the causal features out-correlate the noise features in
    // the overwhelming majority of replicates
    let n = 200;
    let (p0, p) = seqlasso::datagen::dims(n);
    let spec = StructureSpec::new(StructureKind::A2, Some(0.5));
    let mut wins = 0usize;
    let reps = 200u64;
    for rep in 0..reps {
        let mut rng = replicate_rng(76, rep);
        let sample = gen_design(&spec, n, p, p0, &mut rng).unwrap();
        let beta = gen_coefficients(CoefType::One, p0, n, &mut rng);
        let (y, _) =
            gen_response(&sample.x, &sample.s0, &beta, 0.8, &sample.sigma_causal, &mut rng)
                .unwrap();
        let d = Dataset::standardize(sample.x, y).unwrap();
        let cors = d.x().t().dot(d.y()) / n as f64;
        let max_causal =
            sample.s0.iter().map(|&j| cors[j].abs()).fold(0.0_f64, f64::max);
        let max_noise = (0..p)
            .filter(|j| !sample.s0.contains(j))
            .map(|j| cors[j].abs())
            .fold(0.0_f64, f64::max);
        if max_causal > max_noise {
            wins += 1;
        }
    }
    assert!(wins * 10 >= reps as usize * 9, "only {wins}/{reps}");
}

#[test]
fn constant_correlation_cone_fixture_across_rho_grid() {
    for i in 1..=9 {
        let rho = i as f64 / 10.0;
        let p0 = 8;
        let sigma = special::case_i_sigma(2 * p0, rho);
        let tie: Vec<usize> = (0..p0).collect();
        let rep = seqlasso::conditions::check_cone_pop(
            &sigma,
            &seqlasso::model::ActiveSet::new(),
            &tie,
        )
        .unwrap();
        assert!(rep.holds, "rho {rho}");
    }
}

#[test]
fn pure_noise_response_uses_unit_sigma() {
    let spec = StructureSpec::new(StructureKind::A1, None);
    let sample = gen_design(&spec, 50, 20, 3, &mut replicate_rng(77, 0)).unwrap();
    let (_, sigma) = gen_response(
        &sample.x,
        &[],
        &[],
        0.8,
        &ndarray::Array2::zeros((0, 0)),
        &mut replicate_rng(77, 1),
    )
    .unwrap();
    assert_eq!(sigma, 1.0);
}
