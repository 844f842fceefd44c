//! Named property suites run from a seed.
//!
//! Each suite checks a family of properties on fixed and seeded random
//! copulas and reports one result per property.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use crate::copula::{CheckerboardCopula, GroupSplit, EXACT_TOL, VALIDITY_TOL};
use crate::equitability::{equitability_suite, EquitabilityInput, Transform};
use crate::error::{Error, Result};
use crate::estimation::{fit_checkerboard, pseudo_observations, ResolutionPolicy};
use crate::generators::{
    generate, mixture_copula, random_copula, random_product_copula, sample_copula, seeded_rng,
    SynthModel, TargetFunction,
};
use crate::measures::{kendall_cdf, measure, MeasureKind, MeasureOptions};
use crate::star::{dpi_report, identity_coupling, random_star_operands, random_uniform_link, star};

/// Dirichlet concentration of random test copulas.
const CONCENTRATION: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Axioms,
    Dpi,
    Equitability,
    Bounds,
}

impl Suite {
    pub const ALL: [Suite; 4] = [
        Suite::Axioms,
        Suite::Dpi,
        Suite::Equitability,
        Suite::Bounds,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Axioms => "axioms",
            Suite::Dpi => "dpi",
            Suite::Equitability => "equitability",
            Suite::Bounds => "bounds",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| {
                Error::invalid(format!(
                    "unknown suite '{s}' (axioms, dpi, equitability, bounds)"
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyResult {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub trials: usize,
    pub properties: Vec<PropertyResult>,
    pub pass: bool,
}

struct Recorder {
    properties: Vec<PropertyResult>,
}

impl Recorder {
    fn check(&mut self, name: &str, pass: bool, detail: String) {
        self.properties.push(PropertyResult {
            name: name.to_string(),
            pass,
            detail,
        });
    }
}

fn value(
    c: &CheckerboardCopula,
    s: &GroupSplit,
    kind: MeasureKind,
    opts: &MeasureOptions,
) -> Result<f64> {
    Ok(measure(c, s, kind, opts)?.value)
}

fn last(d: usize) -> GroupSplit {
    GroupSplit::last_as_target(d).expect("d >= 2")
}

fn random_resolutions(rng: &mut ChaCha20Rng, d: usize, lo: usize, hi: usize) -> Vec<usize> {
    (0..d).map(|_| rng.random_range(lo..=hi)).collect()
}

/// Runs `suite` with `trials` random instances per randomized property.
pub fn run_suite(
    suite: Suite,
    seed: u64,
    trials: usize,
    opts: &MeasureOptions,
) -> Result<SuiteReport> {
    if trials == 0 {
        return Err(Error::invalid("trials must be positive"));
    }
    let mut rec = Recorder {
        properties: Vec::new(),
    };
    let mut rng = seeded_rng(seed);
    match suite {
        Suite::Axioms => axioms(&mut rec, &mut rng, trials, opts)?,
        Suite::Dpi => dpi(&mut rec, &mut rng, trials, opts)?,
        Suite::Equitability => equitability(&mut rec, &mut rng, trials, seed, opts)?,
        Suite::Bounds => bounds(&mut rec, &mut rng, trials, opts)?,
    }
    let pass = rec.properties.iter().all(|p| p.pass);
    Ok(SuiteReport {
        suite,
        seed,
        trials,
        properties: rec.properties,
        pass,
    })
}

const SINGLE_KINDS: [MeasureKind; 6] = [
    MeasureKind::TauQuadratic,
    MeasureKind::TauAlpha(1.0),
    MeasureKind::TauAlpha(3.0),
    MeasureKind::RenyiAlpha(0.5),
    MeasureKind::RenyiAlpha(1.5),
    MeasureKind::RenyiLimit,
];

fn axioms(
    rec: &mut Recorder,
    rng: &mut ChaCha20Rng,
    trials: usize,
    opts: &MeasureOptions,
) -> Result<()> {
    let mut worst = 0.0f64;
    for d in 2..=4 {
        let pi = CheckerboardCopula::independence(&vec![8; d])?;
        for kind in SINGLE_KINDS {
            worst = worst.max(value(&pi, &last(d), kind, opts)?.abs());
        }
        worst = worst.max(value(&pi, &last(d), MeasureKind::MutualInformation, opts)?.abs());
    }
    let pi4 = CheckerboardCopula::independence(&[8; 4])?;
    let group = GroupSplit::new(vec![0, 1], vec![2, 3], 4)?;
    worst = worst.max(value(&pi4, &group, MeasureKind::GroupTau, opts)?.abs());
    rec.check(
        "independence_is_zero",
        worst <= EXACT_TOL,
        format!("largest |value| on independence grids {worst:.3e}"),
    );

    let mut worst = 0.0f64;
    let mut increasing = true;
    for d in [2, 3] {
        let mut prev = 0.0;
        for m in [4, 16, 64] {
            let v = value(
                &CheckerboardCopula::comonotone(d, m)?,
                &last(d),
                MeasureKind::TauQuadratic,
                opts,
            )?;
            worst = worst.max((v - (1.0 - 1.0 / m as f64)).abs());
            increasing &= v > prev;
            prev = v;
        }
    }
    rec.check(
        "complete_dependence_maximum",
        worst <= EXACT_TOL && increasing,
        format!("largest deviation from 1 - 1/m {worst:.3e}, increasing in m: {increasing}"),
    );

    let mut worst = 0.0f64;
    for _ in 0..trials {
        let m: usize = rng.random_range(2..=8);
        let d: usize = rng.random_range(2..=3);
        let u_cells = m.pow(d as u32 - 1);
        let shift = rng.random_range(0..m);
        let mut mass = vec![0.0; u_cells * m];
        for u in 0..u_cells {
            let digits: usize = (0..d - 1).map(|k| u / m.pow(k as u32) % m).sum();
            mass[u * m + (digits + shift) % m] = 1.0 / u_cells as f64;
        }
        let c = CheckerboardCopula::new(vec![m; d], mass)?;
        let v = value(&c, &last(d), MeasureKind::TauQuadratic, opts)?;
        worst = worst.max((v - (1.0 - 1.0 / m as f64)).abs());
    }
    rec.check(
        "deterministic_assignment_maximum",
        worst <= EXACT_TOL,
        format!("largest deviation from 1 - 1/m over {trials} assignments {worst:.3e}"),
    );

    let (mut lo, mut hi, mut entropy_lo) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY);
    for _ in 0..trials {
        let d = rng.random_range(2..=3);
        let res = random_resolutions(rng, d, 2, 6);
        let c = random_copula(rng, &res, CONCENTRATION)?;
        for kind in SINGLE_KINDS {
            let v = value(&c, &last(d), kind, opts)?;
            if kind.is_bounded() {
                lo = lo.min(v);
                hi = hi.max(v);
            } else {
                entropy_lo = entropy_lo.min(v);
            }
        }
    }
    rec.check(
        "tau_range",
        lo >= -VALIDITY_TOL && hi <= 1.0 + VALIDITY_TOL,
        format!("tau values within [{lo:.6}, {hi:.6}]"),
    );
    rec.check(
        "entropy_nonnegative",
        entropy_lo >= -VALIDITY_TOL,
        format!("smallest entropy-form value {entropy_lo:.3e}"),
    );

    let (mut zero_worst, mut dep_min) = (0.0f64, f64::INFINITY);
    for _ in 0..trials {
        let (du, dv) = (rng.random_range(1..=2), rng.random_range(1..=2));
        let u_res = random_resolutions(rng, du, 2, 5);
        let v_res = random_resolutions(rng, dv, 2, 5);
        let p = random_product_copula(rng, &u_res, &v_res, CONCENTRATION)?;
        let (nu, nv) = (u_res.len(), v_res.len());
        let s = GroupSplit::new((0..nu).collect(), (nu..nu + nv).collect(), nu + nv)?;
        let kind = if nv == 1 {
            MeasureKind::TauQuadratic
        } else {
            MeasureKind::GroupTau
        };
        zero_worst = zero_worst.max(value(&p, &s, kind, opts)?.abs());
        let c = random_copula(rng, &[4, 4], CONCENTRATION)?;
        dep_min = dep_min.min(value(&c, &last(2), MeasureKind::TauQuadratic, opts)?);
    }
    rec.check(
        "zero_iff_independent",
        zero_worst <= EXACT_TOL && dep_min > 0.0,
        format!("largest value on product grids {zero_worst:.3e}, smallest on dependent grids {dep_min:.3e}"),
    );

    let data = generate(&SynthModel::SquareLaw, 5000, rng.random())?;
    let c = fit_checkerboard(&pseudo_observations(&data.columns)?, &[16, 16])?;
    let forward = value(&c, &last(2), MeasureKind::TauQuadratic, opts)?;
    let backward = value(
        &c,
        &GroupSplit::new(vec![1], vec![0], 2)?,
        MeasureKind::TauQuadratic,
        opts,
    )?;
    rec.check(
        "nonsymmetry",
        forward > backward + 0.3,
        format!("square law: x -> y {forward:.4}, y -> x {backward:.4}"),
    );

    let mut prev = -1.0;
    let mut monotone = true;
    for theta in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let v = value(
            &mixture_copula(theta, 32)?,
            &last(2),
            MeasureKind::TauQuadratic,
            opts,
        )?;
        monotone &= v > prev;
        prev = v;
    }
    rec.check(
        "mixture_monotone_in_theta",
        monotone,
        "tau increases along theta M + (1 - theta) Pi".to_string(),
    );
    Ok(())
}

fn dpi(
    rec: &mut Recorder,
    rng: &mut ChaCha20Rng,
    trials: usize,
    opts: &MeasureOptions,
) -> Result<()> {
    for kind in [MeasureKind::TauQuadratic, MeasureKind::TauAlpha(1.0)] {
        let mut failures = 0;
        let mut slack = f64::INFINITY;
        for t in 0..trials {
            let n = 1 + t % 2;
            let (a, b) = random_star_operands(rng, n, 1, 8, CONCENTRATION)?;
            let r = dpi_report(&a, &b, n, kind, opts)?;
            failures += usize::from(!r.holds);
            slack = slack.min(r.direct - r.chain);
        }
        rec.check(
            &format!("dpi_{}", kind.tag()),
            failures == 0,
            format!("{failures} violations in {trials} pairs, smallest slack {slack:.3e}"),
        );
    }

    let group_trials = trials.div_ceil(4);
    let mut failures = 0;
    for _ in 0..group_trials {
        let (a, b) = random_star_operands(rng, 1, 2, 5, CONCENTRATION)?;
        failures += usize::from(!dpi_report(&a, &b, 1, MeasureKind::GroupTau, opts)?.holds);
    }
    rec.check(
        "dpi_group_tau",
        failures == 0,
        format!("{failures} violations in {group_trials} pairs"),
    );

    let mut worst = 0.0f64;
    for n in [1, 2] {
        let b = random_uniform_link(rng, n, 8, CONCENTRATION)?;
        for kind in [MeasureKind::TauQuadratic, MeasureKind::TauAlpha(1.0)] {
            let r = dpi_report(&identity_coupling(n, 8)?, &b, n, kind, opts)?;
            worst = worst.max((r.chain - r.direct).abs());
        }
    }
    rec.check(
        "identity_coupling_equality",
        worst <= EXACT_TOL,
        format!("largest |chain - direct| {worst:.3e}"),
    );

    let mut worst = 0.0f64;
    for n in [1, 2] {
        let b = random_uniform_link(rng, n, 4, CONCENTRATION)?;
        let pi = CheckerboardCopula::independence(&vec![4; 2 * n])?;
        let s = GroupSplit::last_as_target(n + 1)?;
        worst = worst.max(value(&star(&pi, &b, n)?, &s, MeasureKind::TauQuadratic, opts)?.abs());
    }
    rec.check(
        "independent_link_is_zero",
        worst <= EXACT_TOL,
        format!("largest value through an independent link {worst:.3e}"),
    );
    Ok(())
}

fn equitability(
    rec: &mut Recorder,
    rng: &mut ChaCha20Rng,
    trials: usize,
    seed: u64,
    opts: &MeasureOptions,
) -> Result<()> {
    let data = generate(
        &SynthModel::Functional {
            function: TargetFunction::SinPlusSquare,
            sigma: 0.3,
        },
        4000,
        seed,
    )?;
    let split = last(3);
    let raw: Vec<Transform> = ["exp:0", "cube:1", "affine:2:2.5:-4", "exp:2", "permute:1,0"]
        .iter()
        .map(|s| Transform::parse(s))
        .collect::<Result<_>>()?;
    let mut kinds = SINGLE_KINDS.to_vec();
    kinds.extend([MeasureKind::MutualInformation]);
    let mut worst = 0.0f64;
    let mut ok = true;
    for kind in &kinds {
        let input = EquitabilityInput::Data {
            columns: &data.columns,
            policy: ResolutionPolicy::fixed(8),
        };
        let r = equitability_suite(input, &split, *kind, &raw, opts)?;
        worst = worst.max(r.max_deviation);
        ok &= r.pass;
    }
    rec.check(
        "raw_monotone_and_permutation",
        ok,
        format!("largest deviation {worst:.3e} over {} kinds", kinds.len()),
    );

    let (mut worst_exact, mut worst_rev) = (0.0f64, 0.0f64);
    let mut ok = true;
    for _ in 0..trials {
        let res = random_resolutions(rng, 3, 2, 6);
        let c = random_copula(rng, &res, CONCENTRATION)?;
        let relabel = [
            Transform::PermuteConditioning(vec![1, 0]),
            Transform::ReverseConditioning(0),
            Transform::ReverseConditioning(1),
        ];
        for kind in &kinds {
            let r =
                equitability_suite(EquitabilityInput::Copula(&c), &split, *kind, &relabel, opts)?;
            worst_exact = worst_exact.max(r.max_deviation);
            ok &= r.pass;
            if kind.is_bounded() {
                let r = equitability_suite(
                    EquitabilityInput::Copula(&c),
                    &split,
                    *kind,
                    &[Transform::ReverseTarget],
                    opts,
                )?;
                worst_rev = worst_rev.max(r.max_deviation);
                ok &= r.pass;
            }
        }
        let res4 = random_resolutions(rng, 4, 2, 4);
        let c4 = random_copula(rng, &res4, CONCENTRATION)?;
        let g = GroupSplit::new(vec![0, 1], vec![2, 3], 4)?;
        for kind in [MeasureKind::GroupTau, MeasureKind::AveragedDependence] {
            let r = equitability_suite(EquitabilityInput::Copula(&c4), &g, kind, &relabel, opts)?;
            worst_exact = worst_exact.max(r.max_deviation);
            ok &= r.pass;
        }
    }
    rec.check(
        "grid_relabel_and_reversal",
        ok,
        format!(
            "relabeling deviation {worst_exact:.3e}, target reversal deviation {worst_rev:.3e}"
        ),
    );
    Ok(())
}

fn bounds(
    rec: &mut Recorder,
    rng: &mut ChaCha20Rng,
    trials: usize,
    opts: &MeasureOptions,
) -> Result<()> {
    let c = random_copula(rng, &[4, 5], CONCENTRATION)?;
    let one = kendall_cdf(&c, &[1])?.max_bound();
    rec.check(
        "single_target_bound_is_one",
        one == 1.0,
        format!("bound {one}"),
    );

    let pi = CheckerboardCopula::independence(&[64, 64])?;
    let grid_bound = kendall_cdf(&pi, &[0, 1])?.max_bound();
    rec.check(
        "independence_pair_bound",
        (grid_bound - 5.0 / 6.0).abs() < 0.01,
        format!("grid bound {grid_bound:.5} against 5/6"),
    );

    let table = pi.cdf_table();
    let draws = 1_000_000;
    let total: f64 = sample_copula(&pi, draws, rng)
        .iter()
        .map(|p| {
            let t = table.eval(p);
            t - t * t
        })
        .sum();
    let mc = 6.0 * total / draws as f64;
    rec.check(
        "independence_pair_bound_monte_carlo",
        (mc - 5.0 / 6.0).abs() < 0.005,
        format!("{draws} draws give {mc:.5} against 5/6"),
    );

    let mut worst = f64::NEG_INFINITY;
    for _ in 0..trials {
        let nu = rng.random_range(1..=2);
        let res = random_resolutions(rng, nu + 2, 2, 5);
        let c = random_copula(rng, &res, CONCENTRATION)?;
        let s = GroupSplit::new((0..nu).collect(), vec![nu, nu + 1], nu + 2)?;
        let r = measure(&c, &s, MeasureKind::GroupTau, opts)?;
        worst = worst.max(r.value - r.upper_bound.expect("group kinds carry a bound"));
    }
    rec.check(
        "group_tau_below_bound",
        worst <= VALIDITY_TOL,
        format!("largest value - bound {worst:.3e}"),
    );

    let mut worst = 0.0f64;
    let mut growing = true;
    let mut prev = 0.0;
    for m in [8, 64] {
        let c = CheckerboardCopula::comonotone(3, m)?;
        let mi = value(&c, &last(3), MeasureKind::MutualInformation, opts)?;
        worst = worst.max((mi - 2.0 * (m as f64).ln()).abs());
        growing &= mi > prev;
        prev = mi;
        let tau = value(&c, &last(3), MeasureKind::TauQuadratic, opts)?;
        growing &= tau <= 1.0;
    }
    rec.check(
        "information_unbounded_tau_bounded",
        worst <= VALIDITY_TOL && growing,
        format!("largest deviation from 2 ln m {worst:.3e}"),
    );

    let mix = value(
        &mixture_copula(0.5, 64)?,
        &last(2),
        MeasureKind::TauQuadratic,
        opts,
    )?;
    rec.check(
        "mixture_calibration",
        (mix - 0.25).abs() < 0.01,
        format!("theta = 0.5 gives {mix:.5} against 0.25"),
    );
    Ok(())
}
