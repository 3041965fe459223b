//! Structural invariants, mostly as property tests.

use poisson_calculus::calculus::{grad_norm, NormMeasure, Part};
use poisson_calculus::calculus::{diff, Functional};
use poisson_calculus::clark::{compensated_integral, PathGrid};
use poisson_calculus::configuration::{sample_configuration, Configuration, Perturbation};
use poisson_calculus::estimate::Moments;
use poisson_calculus::estimators::engine::{accumulate, batch_rng, Exec, McSpec};
use poisson_calculus::estimators::{expect, orlicz_norm, YoungFunction};
use poisson_calculus::events::{boundary_estimates, count_event, BoundaryKind, CountRelation, EventSet};
use poisson_calculus::kernels::{kernel_measure, KernelDirection};
use poisson_calculus::space::{Point, PointSpace, QuadSpec, Region, SigmaSample};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF, Discrete, Poisson};

fn unit() -> PointSpace {
    PointSpace::unit_interval()
}

fn arb_configuration() -> impl Strategy<Value = Configuration> {
    prop::collection::btree_set(1u32..10_000, 0..7).prop_map(|s| {
        let xs: Vec<f64> = s.into_iter().map(|i| i as f64 / 10_000.0).collect();
        Configuration::from_scalars(&xs).unwrap()
    })
}

fn arb_count_event() -> impl Strategy<Value = EventSet> {
    (1u32..=4, 0usize..3, 0i64..4).prop_map(|(q, r, k)| {
        let s = unit();
        let rel = [CountRelation::Eq, CountRelation::Ge, CountRelation::Le][r];
        count_event(&s, &Region::interval(0.0, q as f64 / 4.0).unwrap(), rel, k).unwrap()
    })
}

fn nodes(seed: u64, n: usize) -> SigmaSample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SigmaSample::draw(&unit(), &QuadSpec::new(n, seed).unwrap(), &mut rng).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sigma_is_additive(a in 0.0f64..1.0, b in 0.0f64..1.0, mass in 0.1f64..5.0) {
        let s = PointSpace::new_box(1, &[1.0], mass).unwrap();
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let left = Region::interval(0.0, lo).unwrap();
        let right = Region::interval(hi, 1.0).unwrap();
        let joined = s.sigma_measure(&left).unwrap() + s.sigma_measure(&right).unwrap();
        let gap = s.sigma_measure(&Region::interval(lo, hi).unwrap()).unwrap();
        prop_assert!((joined + gap - mass).abs() < 1e-12 * mass);
    }

    #[test]
    fn integrated_indicator_matches_measure(lo in 0.0f64..0.5, len in 0.05f64..0.5, seed in 0u64..1000) {
        let s = PointSpace::new_box(2, &[1.0, 2.0], 3.0).unwrap();
        let r = Region::new(vec![lo, 0.0], vec![lo + len, 2.0]).unwrap();
        let est = s
            .integrate_sigma(|x| if r.contains(x) { 1.0 } else { 0.0 }, &QuadSpec::new(4000, seed).unwrap())
            .unwrap();
        prop_assert!(est.within(s.sigma_measure(&r).unwrap(), 4.0), "{est:?}");
    }

    #[test]
    fn perturb_round_trips(w in arb_configuration(), x in 0.00005f64..0.99995) {
        let x = Point::scalar(x);
        prop_assume!(!w.contains(&x));
        let up = w.perturb(&x, Perturbation::Add).unwrap();
        prop_assert_eq!(up.perturb(&x, Perturbation::Remove).unwrap(), w.clone());
        if let Some(y) = w.points().first() {
            let down = w.perturb(y, Perturbation::Remove).unwrap();
            prop_assert_eq!(down.perturb(y, Perturbation::Add).unwrap(), w);
        }
    }

    #[test]
    fn closed_and_generic_gradient_norms_agree(w in arb_configuration(), seed in 0u64..500, p in prop::sample::select(vec![1.0, 2.0, 3.0, f64::INFINITY])) {
        let s = unit();
        let f = Functional::count(&s, &Region::interval(0.25, 0.75).unwrap()).unwrap();
        let g = f.without_closed_forms();
        let nd = nodes(seed, 16);
        for m in [NormMeasure::Sigma, NormMeasure::Omega, NormMeasure::Sym] {
            for part in [Part::Signed, Part::Plus, Part::Minus] {
                let a = grad_norm(&f, &w, p, m, part, &nd).unwrap();
                let b = grad_norm(&g, &w, p, m, part, &nd).unwrap();
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()), "{m:?} {part:?}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn kernel_masses_split(w in arb_configuration(), ev in arb_count_event(), seed in 0u64..500) {
        let nd = nodes(seed, 32);
        for generic in [false, true] {
            let a = if generic { ev.generic() } else { ev.clone() };
            let ac = a.complement();
            for dir in [KernelDirection::Forward, KernelDirection::Backward, KernelDirection::Symmetrized] {
                let total = match dir {
                    KernelDirection::Forward => 1.0,
                    KernelDirection::Backward => w.len() as f64,
                    KernelDirection::Symmetrized => 0.5 * (1.0 + w.len() as f64),
                };
                let sum = kernel_measure(&w, &a, dir, &nd).unwrap() + kernel_measure(&w, &ac, dir, &nd).unwrap();
                prop_assert!((sum - total).abs() < 1e-12, "{dir:?} generic={generic}: {sum} vs {total}");
            }
        }
    }

    #[test]
    fn forward_kernel_is_plus_gradient(w in arb_configuration(), ev in arb_count_event(), seed in 0u64..500) {
        let nd = nodes(seed, 32);
        let ev = ev.generic();
        let f = Functional::indicator(&ev).without_closed_forms();
        let inside = if ev.contains(&w) { 1.0 } else { 0.0 };
        let k = kernel_measure(&w, &ev.complement(), KernelDirection::Forward, &nd).unwrap();
        let d = grad_norm(&f, &w, 1.0, NormMeasure::Sigma, Part::Plus, &nd).unwrap();
        prop_assert!((inside * k - d).abs() < 1e-12, "{} vs {d}", inside * k);
    }

    #[test]
    fn boundary_duality_and_closed_forms(w in arb_configuration(), ev in arb_count_event(), seed in 0u64..500) {
        let nd = nodes(seed, 256);
        let comp = ev.complement();
        let generic = ev.generic();
        for kind in [BoundaryKind::Inner, BoundaryKind::Outer, BoundaryKind::Full] {
            let closed = ev.on_boundary(&w, kind, &nd).unwrap();
            prop_assert_eq!(closed, generic.on_boundary(&w, kind, &nd).unwrap(), "{:?}", kind);
        }
        prop_assert_eq!(ev.on_boundary(&w, BoundaryKind::Inner, &nd).unwrap(), comp.on_boundary(&w, BoundaryKind::Outer, &nd).unwrap());
        prop_assert_eq!(ev.on_boundary(&w, BoundaryKind::Outer, &nd).unwrap(), comp.on_boundary(&w, BoundaryKind::Inner, &nd).unwrap());
        let inner = ev.on_boundary(&w, BoundaryKind::Inner, &nd).unwrap();
        let outer = ev.on_boundary(&w, BoundaryKind::Outer, &nd).unwrap();
        prop_assert_eq!(ev.in_interior(&w, &nd).unwrap(), ev.contains(&w) && !inner);
        prop_assert_eq!(ev.in_closure(&w, &nd).unwrap(), ev.contains(&w) || outer);
    }

    #[test]
    fn sign_flip_under_perturbation(w in arb_configuration(), x in 0.00005f64..0.99995) {
        let f = Functional::total_count(&unit()).map("N^3", |v| v * v * v);
        let x = Point::scalar(x);
        prop_assume!(!w.contains(&x));
        let up = w.perturb(&x, Perturbation::Add).unwrap();
        let a = diff(&f, &w, &x, Part::Signed).unwrap();
        let b = diff(&f, &up, &x, Part::Signed).unwrap();
        prop_assert_eq!(a, -b);
    }

    #[test]
    fn serial_equals_parallel(seed in any::<u64>(), n in 2usize..5000) {
        let mc = McSpec::new(n, seed).unwrap();
        let s = unit();
        let f = |rng: &mut ChaCha8Rng| {
            let w = sample_configuration(&s, 1.3, rng)?;
            Ok([w.len() as f64, (w.len() as f64).powi(2)])
        };
        let a: Moments<2> = accumulate(&mc.with_exec(Exec::Serial), f).unwrap();
        let b: Moments<2> = accumulate(&mc.with_exec(Exec::Parallel), f).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn expect_is_linear(a in -3.0f64..3.0, b in -3.0f64..3.0, seed in 0u64..100) {
        let s = unit();
        let mc = McSpec::new(3000, seed).unwrap();
        let f = Functional::total_count(&s);
        let g = Functional::count(&s, &Region::interval(0.0, 0.3).unwrap()).unwrap().map("g", |v| v * v);
        let (f2, g2) = (f.clone(), g.clone());
        let h = Functional::new("aF+bG", move |w| a * f2.eval(w) + b * g2.eval(w));
        let lhs = expect(&h, &s, 1.0, &mc).unwrap().mean;
        let rhs = a * expect(&f, &s, 1.0, &mc).unwrap().mean + b * expect(&g, &s, 1.0, &mc).unwrap().mean;
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()), "{lhs} vs {rhs}");
    }

    #[test]
    fn orlicz_norm_is_homogeneous(c in 0.1f64..10.0, seed in 0u64..100) {
        let s = unit();
        let mc = McSpec::new(2000, seed).unwrap();
        let f = Functional::total_count(&s).shifted(-1.0);
        for n in [YoungFunction::power(2.0).unwrap(), YoungFunction::power(3.0).unwrap()] {
            let a = orlicz_norm(&f, &n, &s, 1.0, &mc).unwrap().mean;
            let b = orlicz_norm(&f.scaled(c), &n, &s, 1.0, &mc).unwrap().mean;
            prop_assert!((b - c * a).abs() <= 1e-9 * (1.0 + b), "{b} vs {}", c * a);
        }
    }
}

#[test]
fn sigma_nodes_miss_configuration_points() {
    let s = unit();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut hits = 0;
    let mut trials = 0;
    while trials < 1_000_000 {
        let w = sample_configuration(&s, 5.0, &mut rng).unwrap();
        let x = s.sample_point(&mut rng);
        hits += w.points().iter().filter(|p| **p == x).count();
        trials += w.len().max(1);
    }
    assert_eq!(hits, 0);
}

#[test]
fn disjoint_counts_are_independent_poisson() {
    let s = unit();
    let (b1, b2) = (Region::interval(0.0, 0.3).unwrap(), Region::interval(0.5, 1.0).unwrap());
    let n = 20_000;
    let cap = 3usize;
    let mut table = vec![[0usize; 4]; 4];
    for i in 0..n {
        let mut rng = batch_rng(77, i);
        let w = sample_configuration(&s, 2.0, &mut rng).unwrap();
        table[w.count(&b1).min(cap)][w.count(&b2).min(cap)] += 1;
    }
    let law = |mean: f64, k: usize| {
        let p = Poisson::new(mean).unwrap();
        if k < cap {
            p.pmf(k as u64)
        } else {
            1.0 - (0..cap as u64).map(|j| p.pmf(j)).sum::<f64>()
        }
    };
    let mut chi2 = 0.0;
    for (i, row) in table.iter().enumerate() {
        for (j, &obs) in row.iter().enumerate() {
            let exp = n as f64 * law(0.6, i) * law(1.0, j);
            chi2 += (obs as f64 - exp).powi(2) / exp;
        }
    }
    let crit = ChiSquared::new(15.0).unwrap().inverse_cdf(0.9999);
    assert!(chi2 < crit, "chi2 = {chi2} >= {crit}");
}

#[test]
fn superposition_has_poisson_count_law() {
    let s = unit();
    let (lambda, d) = (1.0, 0.4);
    let n = 40_000;
    let mut counts = [0usize; 12];
    for i in 0..n {
        let mut rng = batch_rng(88, i);
        let a = sample_configuration(&s, lambda, &mut rng).unwrap();
        let b = sample_configuration(&s, d, &mut rng).unwrap();
        counts[a.union(&b).unwrap().len().min(11)] += 1;
    }
    let p = Poisson::new(lambda + d).unwrap();
    for (k, &c) in counts.iter().enumerate().take(6) {
        let pk = p.pmf(k as u64);
        let se = (pk * (1.0 - pk) / n as f64).sqrt();
        let emp = c as f64 / n as f64;
        assert!((emp - pk).abs() <= 4.0 * se, "k={k}: {emp} vs {pk}");
    }
}

#[test]
fn boundary_probability_splits_on_one_stream() {
    let s = unit();
    let mc = McSpec::new(20_000, 3).unwrap();
    for ev in [
        count_event(&s, &Region::interval(0.0, 0.5).unwrap(), CountRelation::Eq, 1).unwrap(),
        count_event(&s, &s.full_region(), CountRelation::Ge, 2).unwrap().generic(),
    ] {
        let b = boundary_estimates(&ev, &s, 1.0, &mc, &QuadSpec::new(64, 1).unwrap()).unwrap();
        assert!((b.prob_full.mean - (b.prob_inner.mean + b.prob_outer.mean)).abs() < 1e-12);
    }
}

#[test]
fn compensated_integral_is_a_martingale() {
    // u(t) = 1{N_{t-} even}; the left-point compensator is exact for u
    // piecewise constant between jumps up to O(1/m).
    let s = unit();
    let grid = PathGrid::new(1024).unwrap();
    let mc = McSpec::new(20_000, 9).unwrap();
    let m: Moments<1> = accumulate(&mc, |rng| {
        let w = sample_configuration(&s, 1.0, rng)?;
        Ok([compensated_integral(|c| Ok((c.past.len() % 2 == 0) as u8 as f64), &w, &grid)?])
    })
    .unwrap();
    let e = m.estimate(0, 0.95);
    assert!(e.within(0.0, 4.0), "{e:?}");
}
