//! One PASS/FAIL line per acceptance criterion. Exits non-zero on any FAIL.

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ietpc::construct::{build_pc_from_iet, rabbit_constant, rotation_pc, verify_semiconjugacy};
use ietpc::iet::{IdocVerdict, Iet};
use ietpc::numeric::{parse_exact, Ball, Dyadic, ExactNumber};
use ietpc::pc::{certify_periodic, empirical_factor, random_half_slope_pc};
use ietpc::words::{complexity, suffix_offsets, SymbolicWord};

type Outcome = Result<String, String>;

/// Name, time limit in seconds, check.
type Criterion = (&'static str, u64, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn alpha() -> ExactNumber {
    ExactNumber::from(2) - ExactNumber::golden_ratio()
}

fn one_minus_half(r: &Ball) -> Ball {
    &Ball::exact(Dyadic::one()) - &r.mul_pow2(-1)
}

fn fibonacci_coding() -> Outcome {
    let expected = "010010100100101001010010010100100101001010010010100";
    let w = Iet::golden_rotation()
        .coding(&alpha(), 51)
        .map_err(|e| e.to_string())?
        .shifted(-1)
        .map_err(|e| e.to_string())?;
    let got: String = w.symbols().iter().map(|d| char::from(b'0' + d)).collect();
    ensure(got == expected, || format!("got {got}"))?;
    Ok("51 letters match".into())
}

fn rabbit_identity() -> Outcome {
    let theta = Iet::golden_rotation()
        .coding(&alpha(), 200)
        .map_err(|e| e.to_string())?;
    let rot = rotation_pc(&theta).map_err(|e| e.to_string())?;
    let r60 = rabbit_constant(60);
    let printed = parse_exact("7098034428612913146/10000000000000000000").expect("literal");
    ensure(r60.contains(&printed), || {
        format!("R enclosure {r60} misses the printed value")
    })?;
    ensure(r60.radius().to_f64() <= 1e-15, || {
        format!("radius {}", r60.radius().to_f64())
    })?;
    ensure(rot.delta.overlaps(&one_minus_half(&r60)), || {
        "δ misses 1 − R/2 at 60 bits".into()
    })?;
    let r300 = rabbit_constant(300);
    ensure(rot.delta.overlaps(&one_minus_half(&r300)), || {
        "δ misses 1 − R/2 at 300 bits".into()
    })?;
    Ok(format!(
        "δ ≈ {:.19}, radius 2^-202; R radius {:.1e}",
        rot.delta.to_f64(),
        r60.radius().to_f64()
    ))
}

fn sturmian_complexity() -> Outcome {
    let w = Iet::golden_rotation()
        .coding(&alpha(), 4000)
        .map_err(|e| e.to_string())?;
    let table = complexity(&w, 30).map_err(|e| e.to_string())?;
    for k in 1..=30 {
        ensure(table.p(k) == Some(k + 1), || format!("p({k}) = {:?}", table.p(k)))?;
    }
    Ok("p(k) = k+1 for k ≤ 30".into())
}

fn refinement_oracle() -> Outcome {
    let k_max = 12;
    let len = 500 * k_max;
    let golden = Iet::golden_rotation();
    let three = Iet::three_interval_example();
    let cert = three.idoc_check(200).map_err(|e| e.to_string())?;
    ensure(cert.verdict == IdocVerdict::PassedToDepth, || {
        format!("3-IET: {cert:?}")
    })?;
    let cases = [
        (&golden, alpha()),
        (&three, ExactNumber::sqrt_of(5).expect("5").mul_pow2(-3)),
    ];
    for (t, x) in &cases {
        let refined = t.refinement_complexity(x, k_max).map_err(|e| e.to_string())?;
        let word = t.coding(x, len).map_err(|e| e.to_string())?;
        let counted = complexity(&word, k_max).map_err(|e| e.to_string())?;
        ensure(refined.table.counts() == counted.counts(), || {
            format!("{:?} vs {:?}", refined.table.counts(), counted.counts())
        })?;
    }
    let p = three
        .refinement_complexity(&cases[1].1, k_max)
        .map_err(|e| e.to_string())?;
    let want: Vec<usize> = (1..=k_max).map(|k| 2 * k + 1).collect();
    ensure(p.table.counts() == want, || format!("3-IET p = {:?}", p.table.counts()))?;
    Ok(format!("both maps agree for k ≤ {k_max}; 3-IET p(k) = 2k+1"))
}

fn construction_end_to_end() -> Outcome {
    let t = Iet::golden_rotation();
    let c = build_pc_from_iet(&t, None, 64).map_err(|e| e.to_string())?;
    let half = ExactNumber::ratio(1, 2);
    ensure(c.pc.slopes().iter().all(|s| s.abs() == half), || {
        "slope not ±1/2".into()
    })?;
    let bp = &c.provenance[0].breakpoint;
    ensure(bp.contains_ball(&rabbit_constant(120)), || {
        format!("breakpoint {bp} misses R")
    })?;
    let report = verify_semiconjugacy(&c, &t, 64, 20).map_err(|e| e.to_string())?;
    ensure(report.disagree == 0, || {
        format!("{} decided disagreements", report.disagree)
    })?;
    Ok(format!(
        "agree {}, disagree 0, undecided {} ({:.1}%)",
        report.agree,
        report.undecided,
        100.0 * report.undecided_fraction()
    ))
}

fn periodicity_certification() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let zero = ExactNumber::zero();
    let mut certified = 0;
    for i in 0..100 {
        let f = random_half_slope_pc(&mut rng);
        if let Some(cert) = certify_periodic(&f, &zero, 5000).map_err(|e| e.to_string())? {
            cert.revalidate(&f).map_err(|e| format!("map {i}: {e}"))?;
            certified += 1;
        }
    }
    ensure(certified >= 90, || format!("only {certified}/100 certified"))?;
    let c = build_pc_from_iet(&Iet::golden_rotation(), None, 64).map_err(|e| e.to_string())?;
    let golden = certify_periodic(&c.family, &zero, 2000).map_err(|e| e.to_string())?;
    ensure(golden.is_none(), || "golden family certified periodic".into())?;
    Ok(format!("{certified}/100 certified and revalidated; golden f_T absent"))
}

fn empirical_recovery() -> Outcome {
    let c = build_pc_from_iet(&Iet::golden_rotation(), None, 64).map_err(|e| e.to_string())?;
    let fac = empirical_factor(&c.family, &ExactNumber::zero(), 50_000, 1001).map_err(|e| e.to_string())?;
    let target = ExactNumber::golden_ratio().to_f64() - 1.0;
    let y1 = fac.breakpoints[1];
    ensure((y1 - target).abs() < 0.01, || format!("ŷ_1 = {y1}"))?;
    ensure(fac.residual < 0.01, || format!("residual {}", fac.residual))?;
    Ok(format!(
        "ŷ_1 = {y1:.5} (φ−1 = {target:.5}), residual {:.2e}",
        fac.residual
    ))
}

fn invariant_suites() -> Outcome {
    // m_ℓ non-increasing: refinement_complexity rejects any increase
    let q = ExactNumber::ratio;
    let runs = [
        (Iet::golden_rotation(), alpha(), 40),
        (
            Iet::three_interval_example(),
            ExactNumber::sqrt_of(5).expect("5").mul_pow2(-3),
            40,
        ),
        (Iet::rotation(&q(1, 3)).expect("valid"), q(1, 6), 20),
        (Iet::rotation(&q(2, 5)).expect("valid"), q(1, 10), 20),
    ];
    for (t, x, k) in &runs {
        let r = t.refinement_complexity(x, *k).map_err(|e| e.to_string())?;
        ensure(r.new_points.windows(2).all(|w| w[0] >= w[1]), || {
            format!("{:?}", r.new_points)
        })?;
    }

    let t = Iet::golden_rotation();
    let c = build_pc_from_iet(&t, None, 64).map_err(|e| e.to_string())?;
    let ord = c.gaps.ordering_report();
    ensure(ord.contradictions == 0, || format!("{ord:?}"))?;
    ensure(ord.inf_order_certified == ord.pairs && ord.pairs == 2016, || {
        format!("{ord:?}")
    })?;
    let checked: usize = c.provenance.iter().map(|p| p.cross_checked.len()).sum();
    ensure(checked > 0, || "no intercept cross-checks ran".into())?;

    let mut codings: Vec<SymbolicWord> = vec![
        t.coding(&alpha(), 2000).map_err(|e| e.to_string())?,
        Iet::three_interval_example()
            .coding(&runs[1].1, 2000)
            .map_err(|e| e.to_string())?,
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..3 {
        let f = random_half_slope_pc(&mut rng);
        codings.push(f.coding(&ExactNumber::ratio(1, 3), 600).map_err(|e| e.to_string())?);
    }
    for w in &codings {
        for q in [1, 2, 5] {
            let offsets = suffix_offsets(w, q, 20).map_err(|e| e.to_string())?;
            let beta = offsets[19];
            ensure(beta <= q, || format!("β = {beta} > q = {q}"))?;
            ensure(offsets[10..].iter().all(|&o| o == beta), || format!("{offsets:?}"))?;
        }
    }
    Ok(format!(
        "{} refinement runs, {} gap pairs, {checked} intercept cross-checks, shift law on {} codings",
        runs.len(),
        ord.pairs,
        codings.len()
    ))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 fibonacci coding", 1, fibonacci_coding),
        ("2 rabbit identity", 1, rabbit_identity),
        ("3 sturmian complexity", 5, sturmian_complexity),
        ("4 refinement oracle equivalence", 30, refinement_oracle),
        ("5 construction end-to-end", 60, construction_end_to_end),
        ("6 periodicity certification", 300, periodicity_certification),
        ("7 empirical factor recovery", 120, empirical_recovery),
        ("8 invariant suites", 60, invariant_suites),
    ];
    let mut failed = 0;
    for (name, limit, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if took > Duration::from_secs(limit) => {
                Err(format!("{detail}; took {took:.2?}, limit {limit}s"))
            }
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS [{name}] {detail} ({took:.2?})"),
            Err(why) => {
                failed += 1;
                println!("FAIL [{name}] {why} ({took:.2?})");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
