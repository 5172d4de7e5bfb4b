use mallows_core::replicate::fold_replicates;
use mallows_core::stitch::{self, TwoSidedSampler};

#[test]
fn window_copies_have_reflected_descent_laws() {
    let (q, w) = (0.8, 15i64);
    let sampler = TwoSidedSampler::new(q, w, stitch::DEFAULT_HORIZON).unwrap();
    let width = w as usize + 1;
    // counts of descents in [1, W] for copy one, of B \ ℕ in [1 − W, 0] for copy two
    let (one, two) = fold_replicates(
        51,
        100_000,
        || (vec![0u64; width], vec![0u64; width]),
        |acc, _, rng| {
            let s = sampler.sample(rng);
            assert_eq!(s.a_positive.len(), s.chi0 as usize);
            assert_eq!(s.b_nonpositive.len(), s.chi0 as usize);
            let a = s.a_positive.iter().filter(|&&x| x <= w).count();
            let b = s.b_nonpositive.iter().filter(|&&x| x > -w).count();
            acc.0[a] += 1;
            acc.1[b] += 1;
        },
        |a, b| {
            a.0.iter_mut().zip(b.0).for_each(|(x, y)| *x += y);
            a.1.iter_mut().zip(b.1).for_each(|(x, y)| *x += y);
        },
    );
    let n = 100_000f64;
    for (c, (&x, &y)) in one.iter().zip(&two).enumerate() {
        let pooled = (x + y) as f64 / (2.0 * n);
        if pooled == 0.0 {
            continue;
        }
        let sigma = (pooled * (1.0 - pooled) * 2.0 / n).sqrt();
        let z = ((x as f64 - y as f64) / n).abs() / sigma;
        assert!(z < 5.0, "count {c}: {x} vs {y}");
    }
}

#[test]
fn near_zero_q_gives_identity_window() {
    let identity = (0..1000u64)
        .filter(|&i| {
            let s = stitch::two_sided_window_sample(1e-6, 8, &mut mallows_core::seed_stream(53, i)).unwrap();
            s.chi0 == 0 && s.entries.iter().all(|e| e.complete && e.index == e.value)
        })
        .count();
    assert!(identity >= 990, "{identity} identity windows");
}

#[test]
fn stationary_start_matches_nu() {
    let sampler = TwoSidedSampler::new(0.9, 5, stitch::DEFAULT_HORIZON).unwrap();
    let nu = sampler.stationary().clone();
    let counts = fold_replicates(
        54,
        200_000,
        || vec![0u64; nu.probabilities.len()],
        |acc, _, rng| acc[sampler.sample(rng).chi0 as usize] += 1,
        |a, b| a.iter_mut().zip(b).for_each(|(x, y)| *x += y),
    );
    for (k, (&c, &p)) in counts.iter().zip(&nu.probabilities).enumerate() {
        assert!(mallows_core::stats::z_score(c, 200_000, p) < 5.0, "χ0={k}");
    }
}
