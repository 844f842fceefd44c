use proptest::prelude::*;

use copdep::copula::{frechet_m_value, frechet_w_value, EXACT_TOL, VALIDITY_TOL};
use copdep::generators::{
    generate, random_copula, random_product_copula, seeded_rng, SynthModel, TargetFunction,
};
use copdep::star::random_star_operands;
use copdep::{measure, star, CheckerboardCopula, GridBox, GroupSplit, MeasureKind, MeasureOptions};

const CONCENTRATION: f64 = 0.5;

fn resolutions(
    dims: std::ops::RangeInclusive<usize>,
    m: std::ops::RangeInclusive<usize>,
) -> impl Strategy<Value = Vec<usize>> {
    dims.prop_flat_map(move |d| prop::collection::vec(m.clone(), d))
}

fn copula_from(seed: u64, res: &[usize]) -> CheckerboardCopula {
    random_copula(&mut seeded_rng(seed), res, CONCENTRATION).unwrap()
}

fn value(c: &CheckerboardCopula, s: &GroupSplit, kind: MeasureKind) -> f64 {
    measure(c, s, kind, &MeasureOptions::default())
        .unwrap()
        .value
}

fn unit_point(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..=1.0f64, d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cdf_is_lipschitz_and_within_frechet_bounds(
        seed in any::<u64>(),
        res in resolutions(2..=3, 2..=5),
        a in unit_point(3),
        b in unit_point(3),
    ) {
        let c = copula_from(seed, &res);
        let d = res.len();
        let (x, y) = (&a[..d], &b[..d]);
        let (cx, cy) = (c.cdf(x).unwrap(), c.cdf(y).unwrap());
        let l1: f64 = x.iter().zip(y).map(|(p, q)| (p - q).abs()).sum();
        prop_assert!((cx - cy).abs() <= l1 + VALIDITY_TOL);
        prop_assert!(cx >= frechet_w_value(x).unwrap() - VALIDITY_TOL);
        prop_assert!(cx <= frechet_m_value(x).unwrap() + VALIDITY_TOL);
        prop_assert!((c.cdf_table().eval(x) - cx).abs() <= EXACT_TOL);
    }

    #[test]
    fn aligned_box_volume_is_cell_sum(
        seed in any::<u64>(),
        res in resolutions(2..=3, 2..=5),
        picks in prop::collection::vec((0usize..100, 0usize..100), 3),
    ) {
        let c = copula_from(seed, &res);
        let mut lo = Vec::new();
        let mut hi = Vec::new();
        for (k, &m) in res.iter().enumerate() {
            let (p, q) = picks[k];
            let (i, j) = (p % (m + 1), q % (m + 1));
            lo.push(i.min(j));
            hi.push(i.max(j));
        }
        let bx = GridBox::new(
            lo.iter().zip(&res).map(|(&i, &m)| i as f64 / m as f64).collect(),
            hi.iter().zip(&res).map(|(&i, &m)| i as f64 / m as f64).collect(),
        ).unwrap();
        let expected: f64 = (0..c.cell_count())
            .map(|f| (c.cell_index(f), c.mass()[f]))
            .filter(|(cell, _)| cell.iter().enumerate().all(|(k, &i)| i >= lo[k] && i < hi[k]))
            .map(|(_, p)| p)
            .sum();
        prop_assert!((c.c_volume(&bx).unwrap() - expected).abs() <= EXACT_TOL);
    }

    #[test]
    fn sub_volume_is_monotone_in_the_tail(
        seed in any::<u64>(),
        m in 2usize..=5,
        corners in (0.0..=1.0f64, 0.0..=1.0f64),
        tails in (0.0..=1.0f64, 0.0..=1.0f64),
    ) {
        let c = copula_from(seed, &[m, m]);
        let bx = GridBox::new(vec![corners.0.min(corners.1)], vec![corners.0.max(corners.1)]).unwrap();
        let (t0, t1) = (tails.0.min(tails.1), tails.0.max(tails.1));
        let low = c.sub_volume(&bx, &[t0]).unwrap();
        let high = c.sub_volume(&bx, &[t1]).unwrap();
        prop_assert!(low >= -VALIDITY_TOL);
        prop_assert!(low <= high + VALIDITY_TOL);
    }

    #[test]
    fn marginal_commutes_with_permutation(
        seed in any::<u64>(),
        res in resolutions(3..=4, 2..=4),
        perm_seed in any::<u64>(),
    ) {
        use rand::seq::SliceRandom;
        let c = copula_from(seed, &res);
        let d = res.len();
        let mut perm: Vec<usize> = (0..d).collect();
        perm.shuffle(&mut seeded_rng(perm_seed));
        let keep = &perm[..d - 1];
        let direct = c.marginal(keep).unwrap();
        let mut sorted = keep.to_vec();
        sorted.sort_unstable();
        let order: Vec<usize> = keep.iter().map(|a| sorted.iter().position(|b| b == a).unwrap()).collect();
        let via = c.marginal(&sorted).unwrap().permute_axes(&order).unwrap();
        prop_assert!(direct.max_abs_diff(&via).unwrap() <= EXACT_TOL);
    }

    #[test]
    fn product_grids_measure_zero(
        seed in any::<u64>(),
        u_res in resolutions(1..=2, 2..=4),
        v_res in resolutions(1..=2, 2..=4),
    ) {
        let c = random_product_copula(&mut seeded_rng(seed), &u_res, &v_res, CONCENTRATION).unwrap();
        let (nu, nv) = (u_res.len(), v_res.len());
        let s = GroupSplit::new((0..nu).collect(), (nu..nu + nv).collect(), nu + nv).unwrap();
        let kinds: &[MeasureKind] = if nv == 1 {
            &[MeasureKind::TauQuadratic, MeasureKind::TauAlpha(1.0), MeasureKind::RenyiAlpha(0.5)]
        } else {
            &[MeasureKind::GroupTau, MeasureKind::AveragedDependence]
        };
        for &kind in kinds {
            prop_assert!(value(&c, &s, kind).abs() <= EXACT_TOL, "{kind}");
        }
    }

    #[test]
    fn vanishing_tau_means_factorization(seed in any::<u64>(), res in resolutions(2..=3, 2..=4)) {
        let c = copula_from(seed, &res);
        let s = GroupSplit::last_as_target(res.len()).unwrap();
        let v = value(&c, &s, MeasureKind::TauQuadratic);
        prop_assert_eq!(v <= EXACT_TOL, c.factorizes(&s, VALIDITY_TOL).unwrap());
    }

    #[test]
    fn deterministic_assignment_attains_grid_maximum(m in 2usize..=12, perm_seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let mut target: Vec<usize> = (0..m).collect();
        target.shuffle(&mut seeded_rng(perm_seed));
        let mut mass = vec![0.0; m * m];
        for (u, &v) in target.iter().enumerate() {
            mass[u * m + v] = 1.0 / m as f64;
        }
        let c = CheckerboardCopula::new(vec![m, m], mass).unwrap();
        let s = GroupSplit::last_as_target(2).unwrap();
        let v = value(&c, &s, MeasureKind::TauQuadratic);
        prop_assert!((v - (1.0 - 1.0 / m as f64)).abs() <= EXACT_TOL);
    }

    #[test]
    fn reversal_invariance(seed in any::<u64>(), res in resolutions(2..=3, 2..=5), axis in 0usize..3) {
        let c = copula_from(seed, &res);
        let d = res.len();
        let s = GroupSplit::last_as_target(d).unwrap();
        let u_axis = axis % (d - 1);
        for kind in [MeasureKind::TauQuadratic, MeasureKind::TauAlpha(2.5), MeasureKind::RenyiAlpha(1.5), MeasureKind::MutualInformation] {
            let base = value(&c, &s, kind);
            let flipped = value(&c.reverse_axis(u_axis).unwrap(), &s, kind);
            prop_assert_eq!(base, flipped, "{}", kind);
        }
        let base = value(&c, &s, MeasureKind::TauQuadratic);
        let flipped = value(&c.reverse_axis(d - 1).unwrap(), &s, MeasureKind::TauQuadratic);
        prop_assert!((base - flipped).abs() <= EXACT_TOL);
    }

    #[test]
    fn group_tau_stays_below_bound(seed in any::<u64>(), res in resolutions(3..=4, 2..=4)) {
        let c = copula_from(seed, &res);
        let d = res.len();
        let s = GroupSplit::new((0..d - 2).collect(), vec![d - 2, d - 1], d).unwrap();
        let r = measure(&c, &s, MeasureKind::GroupTau, &MeasureOptions::default()).unwrap();
        prop_assert!(r.value >= -VALIDITY_TOL);
        prop_assert!(r.value <= r.upper_bound.unwrap() + VALIDITY_TOL);
    }

    #[test]
    fn star_is_valid_and_keeps_conditioning_marginal(seed in any::<u64>(), n in 1usize..=2, m in 2usize..=4) {
        let (a, b) = random_star_operands(&mut seeded_rng(seed), n, 1, m, CONCENTRATION).unwrap();
        let p = star(&a, &b, n).unwrap();
        prop_assert!(p.validate().pass);
        let u_axes: Vec<usize> = (0..n).collect();
        let pu = p.marginal(&u_axes).unwrap();
        let au = a.marginal(&u_axes).unwrap();
        prop_assert!(pu.max_abs_diff(&au).unwrap() <= EXACT_TOL);
    }

    #[test]
    fn generators_are_deterministic(seed in any::<u64>(), n in 1usize..200) {
        let models = [
            SynthModel::Independent { dims: 3 },
            SynthModel::Mixture { theta: 0.4 },
            SynthModel::Functional { function: TargetFunction::Product(2), sigma: 0.5 },
            SynthModel::Gaussian { correlation: vec![vec![1.0, 0.3], vec![0.3, 1.0]] },
        ];
        for model in &models {
            let first = generate(model, n, seed).unwrap();
            let second = generate(model, n, seed).unwrap();
            prop_assert_eq!(first.columns, second.columns);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn bounded_kinds_stay_in_unit_interval(seed in any::<u64>(), res in resolutions(2..=3, 2..=5)) {
        let c = copula_from(seed, &res);
        let s = GroupSplit::last_as_target(res.len()).unwrap();
        for kind in [MeasureKind::TauQuadratic, MeasureKind::TauAlpha(1.0), MeasureKind::TauAlpha(4.0)] {
            let v = value(&c, &s, kind);
            prop_assert!((-VALIDITY_TOL..=1.0 + VALIDITY_TOL).contains(&v), "{kind}: {v}");
        }
        for kind in [MeasureKind::RenyiAlpha(0.5), MeasureKind::RenyiLimit, MeasureKind::MutualInformation] {
            prop_assert!(value(&c, &s, kind) >= -VALIDITY_TOL, "{kind}");
        }
    }
}
