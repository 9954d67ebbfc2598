//! End-to-end acceptance run: one PASS/FAIL line per criterion.
//! Set SIGMA5_EXTENDED=1 to include the full degree-16 search.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::Rng;

use sigma5::contract::Strategy;
use sigma5::f6::{bezout_degree, bezout_report, construct_f6, lift_and_evaluate, random_projections, verify_f6, Grouping};
use sigma5::invariant::{evaluate_quintuple, evaluate_quintuple_with, InvariantSpec, PointFunction, Symmetrization};
use sigma5::linalg::{exact_rank, rank_mod_p};
use sigma5::perm::FactorPermutation;
use sigma5::rng::task_rng;
use sigma5::scalar::{random_prime, residue};
use sigma5::search::{
    build_basis, certificate_polynomial, kernel_on_variety, monomial_interpolation, quotient_by_products,
    QuotientStatus, SearchConfig, Symmetry, POINT_MARGIN,
};
use sigma5::tableau::{random_quintuple, TableauQuintuple};
use sigma5::tensor::{sample_generic, sample_rank1, sample_secant, Sl2Tuple, GENERIC_HEIGHT, SECANT_HEIGHT};

const SEED: u64 = 2024;
const SMOKE_BUDGET: Duration = Duration::from_secs(3600);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn criterion_dims() -> Outcome {
    let expected = [
        (2, 0, 0, 0),
        (4, 5, 1, 0),
        (6, 1, 0, 1),
        (8, 36, 4, 0),
        (10, 15, 0, 2),
        (12, 228, 12, 2),
        (14, 231, 2, 9),
        (16, 1313, 39, 10),
    ];
    let out = Command::new(env!("CARGO_BIN_EXE_sigma5"))
        .args(["dims", "--max-degree", "16", "--format", "json"])
        .output()
        .expect("binary runs");
    let v: serde_json::Value = match serde_json::from_slice(&out.stdout) {
        Ok(v) => v,
        Err(e) => return outcome(false, format!("unparsable output: {e}")),
    };
    let rows: Vec<(u64, u64, u64, u64)> = v["table"]
        .as_array()
        .map(|rows| {
            rows.iter()
                .map(|r| {
                    let f = |k: &str| r[k].as_u64().unwrap_or(u64::MAX);
                    (f("d"), f("U"), f("sym"), f("sgn"))
                })
                .collect()
        })
        .unwrap_or_default();
    let expected: Vec<(u64, u64, u64, u64)> = expected.to_vec();
    let ok = out.status.success() && rows == expected;
    outcome(ok, format!("{} rows, d=16 -> {:?}", rows.len(), rows.last()))
}

fn criterion_f6() -> Outcome {
    let report = verify_f6(SEED);
    let required = [
        "monomial_count",
        "skew_invariance_points",
        "skew_invariance_symbolic",
        "sl2_annihilation",
        "secant_vanishing",
        "rank6_nonvanishing",
    ];
    let failed: Vec<&str> = required
        .iter()
        .copied()
        .filter(|name| !report.check(name).is_some_and(|c| c.pass))
        .collect();
    outcome(
        failed.is_empty() && report.secant_points == 100,
        if failed.is_empty() {
            format!("{} monomials; 120 perms; 10 operators; 100 rank-5 zeros; rank-6 nonzero", construct_f6().len())
        } else {
            format!("failed: {failed:?}")
        },
    )
}

fn criterion_three_routes() -> Outcome {
    let config = SearchConfig::new(SEED);
    let cert = match monomial_interpolation(6, [0; 5], 5, &config) {
        Ok(c) => c,
        Err(e) => return outcome(false, format!("interpolation failed: {e}")),
    };
    if cert.kernel_dim != 1 {
        return outcome(false, format!("interpolation kernel dim {}", cert.kernel_dim));
    }
    let interpolated = certificate_polynomial(&cert, 0).expect("one vector");
    let tableau = InvariantSpec::single(TableauQuintuple::degree_six(), Symmetrization::Signed);
    let explicit = construct_f6();
    let mut rng = task_rng(SEED, 500);
    let mut ratios: Vec<(BigRational, BigRational)> = Vec::new();
    for _ in 0..12 {
        let a = sample_generic(5, GENERIC_HEIGHT, &mut rng);
        let e = explicit.eval_exact(&a).unwrap();
        let t = tableau.eval_exact(&a).unwrap();
        let i = interpolated.eval_exact(&a).unwrap();
        if e.is_zero() || t.is_zero() || i.is_zero() {
            return outcome(false, "a route vanished at a generic point");
        }
        ratios.push((t / &e, i / e));
    }
    let constant = ratios.windows(2).all(|w| w[0] == w[1]);
    outcome(
        constant,
        format!(
            "{} weight-zero monomials; tableau/explicit = {}, interpolated/explicit = {} at 12 points",
            cert.basis_ids.len(),
            ratios[0].0,
            ratios[0].1
        ),
    )
}

fn criterion_pipeline() -> Outcome {
    let config = SearchConfig::new(SEED);
    let mut details = Vec::new();
    let mut ok = true;
    let f6 = construct_f6();
    for (d, symmetry, want_basis, want_kernel) in
        [(6, Symmetry::Sgn, 1, 1), (8, Symmetry::Sym, 4, 0), (10, Symmetry::Sgn, 2, 1)]
    {
        let basis = match build_basis(d, symmetry, &config) {
            Ok(b) => b.basis,
            Err(e) => return outcome(false, format!("d={d}: {e}")),
        };
        let kernel = match kernel_on_variety(&basis, Some(symmetry), 5, basis.len() + POINT_MARGIN, &config) {
            Ok(k) => k,
            Err(e) => return outcome(false, format!("d={d}: {e}")),
        };
        let modular_agree = kernel.modular_dims.iter().all(|m| m.kernel_dim == kernel.kernel_dim);
        ok &= basis.len() == want_basis && kernel.kernel_dim == want_kernel && modular_agree;
        let mut line = format!("d={d} {symmetry}: basis {} kernel {}", basis.len(), kernel.kernel_dim);
        if d > 6 {
            match quotient_by_products(&kernel, f6, Symmetry::Sgn, d - 6, &config) {
                Ok(q) => {
                    ok &= q.new_generators == 0 && q.status == QuotientStatus::Determinate;
                    line += &format!(" new {}", q.new_generators);
                }
                Err(e) => return outcome(false, format!("d={d} quotient: {e}")),
            }
        }
        details.push(line);
    }
    outcome(ok, details.join("; "))
}

fn random_perm<R: Rng>(rng: &mut R) -> FactorPermutation {
    let all = FactorPermutation::all(5);
    all[rng.gen_range(0..all.len())].clone()
}

fn criterion_properties() -> Outcome {
    let mut rng = task_rng(SEED, 600);
    let mut failures = Vec::new();
    let mut count = |name: &str, ok: bool| {
        if !ok {
            failures.push(name.to_string());
        }
    };

    for _ in 0..10 {
        let m = rng.gen_range(1..=3);
        let q = random_quintuple(m, &mut rng);
        for _ in 0..4 {
            let a = sample_generic(5, 10, &mut rng);
            let base = evaluate_quintuple(&q, &a).unwrap();
            for _ in 0..5 {
                let g = Sl2Tuple::random_integer(5, 10, &mut rng);
                count("sl2", evaluate_quintuple(&q, &a.apply_group(&g).unwrap()).unwrap() == base);
            }
            let lambda = BigRational::new(rng.gen_range(1..=9i64).into(), rng.gen_range(1..=9i64).into());
            let scaled = evaluate_quintuple(&q, &a.scale(&lambda)).unwrap();
            count("homogeneity", scaled == base.clone() * num_traits::pow(lambda, 2 * m));
        }
        count("rank1", evaluate_quintuple(&q, &sample_rank1(5, 10, &mut rng)).unwrap().is_zero());
    }

    for _ in 0..2 {
        let q = random_quintuple(2, &mut rng);
        let a = sample_generic(5, 10, &mut rng);
        for sigma in FactorPermutation::all(5) {
            let lhs = evaluate_quintuple(&q.permuted(&sigma), &a).unwrap();
            let rhs = evaluate_quintuple(&q, &a.apply_perm(&sigma.inverse()).unwrap()).unwrap();
            count("equivariance", lhs == rhs);
        }
    }
    let s = random_perm(&mut rng);
    let t = random_perm(&mut rng);
    let a = sample_generic(5, 10, &mut rng);
    count(
        "action",
        a.apply_perm(&s).unwrap().apply_perm(&t).unwrap() == a.apply_perm(&t.compose(&s)).unwrap(),
    );

    for i in 0..50 {
        let m = 1 + i % 4;
        let q = random_quintuple(m, &mut rng);
        let a = sample_generic(5, 5, &mut rng);
        count(
            "strategy",
            evaluate_quintuple_with(&q, &a, Strategy::Enumerate).unwrap()
                == evaluate_quintuple_with(&q, &a, Strategy::Eliminate).unwrap(),
        );
    }

    let p = random_prime(60, &mut rng);
    for _ in 0..100 {
        let rows = rng.gen_range(1..=40);
        let cols = rng.gen_range(1..=40);
        let inner = rng.gen_range(0..=rows.min(cols));
        let l: Vec<Vec<i64>> = (0..rows).map(|_| (0..inner).map(|_| rng.gen_range(-9..=9)).collect()).collect();
        let r: Vec<Vec<i64>> = (0..inner).map(|_| (0..cols).map(|_| rng.gen_range(-9..=9)).collect()).collect();
        let m: Vec<Vec<BigInt>> = (0..rows)
            .map(|i| (0..cols).map(|j| BigInt::from((0..inner).map(|k| l[i][k] * r[k][j]).sum::<i64>())).collect())
            .collect();
        let exact: Vec<Vec<BigRational>> =
            m.iter().map(|row| row.iter().map(|x| BigRational::from_integer(x.clone())).collect()).collect();
        let modular: Vec<Vec<u64>> = m.iter().map(|row| row.iter().map(|x| residue(x, p)).collect()).collect();
        count("rank", exact_rank(&exact) == rank_mod_p(&modular, p));
    }

    outcome(
        failures.is_empty(),
        format!("{} failures (sl2, homogeneity, equivariance x120, rank-1, strategy x50, rank x100)", failures.len()),
    )
}

fn criterion_degree_sixteen() -> Outcome {
    let mut rng = task_rng(SEED, 700);
    let q = random_quintuple(8, &mut rng);
    let f = InvariantSpec::single(q, Symmetrization::Sum);
    let a = sample_secant(5, 5, SECANT_HEIGHT, &mut rng);
    let p = random_prime(60, &mut rng);
    let start = Instant::now();
    let value = f.evaluate_mod_with(&a, p, Strategy::Eliminate);
    let elapsed = start.elapsed();
    let smoke_ok = value.is_ok() && elapsed <= SMOKE_BUDGET;
    let smoke = format!("smoke: one symmetrized d=16 value mod p in {:.2}s (budget {}s)", elapsed.as_secs_f64(), SMOKE_BUDGET.as_secs());
    if std::env::var("SIGMA5_EXTENDED").as_deref() != Ok("1") {
        return outcome(smoke_ok, smoke + "; extended search not requested");
    }
    let config = SearchConfig::new(SEED);
    let basis = match build_basis(16, Symmetry::Sym, &config) {
        Ok(b) => b.basis,
        Err(e) => return outcome(false, format!("{smoke}; extended: {e}")),
    };
    let kernel = match kernel_on_variety(&basis, Some(Symmetry::Sym), 5, 45, &config) {
        Ok(k) => k,
        Err(e) => return outcome(false, format!("{smoke}; extended: {e}")),
    };
    let quotient = match quotient_by_products(&kernel, construct_f6(), Symmetry::Sgn, 10, &config) {
        Ok(q) => q,
        Err(e) => return outcome(false, format!("{smoke}; extended: {e}")),
    };
    let rank = basis.len() - kernel.kernel_dim;
    outcome(
        smoke_ok && basis.len() == 39 && rank == 36 && quotient.new_generators == 1,
        format!(
            "{smoke}; extended: {} invariants, rank {rank} at 45 points, {} new generator(s)",
            basis.len(),
            quotient.new_generators
        ),
    )
}

fn criterion_lift() -> Outcome {
    let mut rng = task_rng(SEED, 800);
    let grouping = Grouping::leading_block(6);
    let f6 = construct_f6();
    let zeros = (0..25)
        .filter(|_| {
            let a = sample_secant(5, 6, SECANT_HEIGHT, &mut rng);
            let p = random_projections(&grouping, SECANT_HEIGHT, &mut rng);
            lift_and_evaluate(&a, &grouping, &p, f6).unwrap().is_zero()
        })
        .count();
    let generic = sample_generic(6, GENERIC_HEIGHT, &mut rng);
    let p = random_projections(&grouping, SECANT_HEIGHT, &mut rng);
    let value = lift_and_evaluate(&generic, &grouping, &p, f6).unwrap();
    outcome(
        zeros == 25 && !value.is_zero(),
        format!("{zeros}/25 zeros at rank-5 n=6 points; generic value {value}"),
    )
}

fn criterion_bezout() -> Outcome {
    let report = bezout_report();
    outcome(
        bezout_degree(&[6, 16]) == 96 && report.lower_bound_check.starts_with("out of scope"),
        format!("deg 6 x 16 = {}; lower bound deg X >= 96 marked out of scope", report.bezout_degree),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("dimension table up to degree 16", criterion_dims),
        ("explicit degree-6 equation", criterion_f6),
        ("three routes to the degree-6 equation", criterion_three_routes),
        ("low-degree search pipeline", criterion_pipeline),
        ("property suites", criterion_properties),
        ("degree-16 evaluation", criterion_degree_sixteen),
        ("lifted degree-6 equation", criterion_lift),
        ("Bezout degree", criterion_bezout),
    ];
    let mut all = true;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        all &= o.pass;
        println!(
            "{} criterion {} ({name}): {} [{:.1}s]",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
