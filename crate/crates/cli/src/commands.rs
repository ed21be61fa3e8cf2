use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use ietpc::construct::{build_pc_from_iet, rabbit_constant, rotation_pc, verify_semiconjugacy};
use ietpc::pc::{
    certify_periodic_with, empirical_factor_with, random_half_slope_pc, Arithmetic, CertifyOptions, FactorOptions,
};
use ietpc::words::{complexity, prefix_stability};
use ietpc::{
    parse_exact, AffinePieces, Ball, ComplexityTable, Dyadic, ExactNumber, Iet, MapFile, PcEnclosure,
    PiecewiseContraction, SymbolicWord,
};

use crate::output::{emit, to_json, write_atomic, CliError, Format};

pub struct Out<'a> {
    pub format: Option<Format>,
    pub path: Option<&'a Path>,
    pub force: bool,
}

impl Out<'_> {
    fn format_or(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }

    fn write(&self, text: &str) -> Result<(), CliError> {
        emit(self.path, self.force, text)
    }
}

pub enum Map {
    Iet(Iet),
    Pc(PiecewiseContraction),
}

pub fn load_map(path: &Path) -> Result<Map, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::invalid("io", format!("{}: {e}", path.display())))?;
    let file = MapFile::from_json(&text).map_err(|e| CliError::invalid("map", format!("{}: {e}", path.display())))?;
    Ok(match file {
        MapFile::Iet(spec) => Map::Iet(Iet::from_spec(spec)?),
        MapFile::Pc(spec) => Map::Pc(PiecewiseContraction::from_spec(spec)?),
    })
}

fn load_iet(path: &Path) -> Result<Iet, CliError> {
    match load_map(path)? {
        Map::Iet(t) => Ok(t),
        Map::Pc(_) => Err(CliError::invalid(
            "map",
            format!("{} holds a PC, expected an IET", path.display()),
        )),
    }
}

fn load_pc(path: &Path) -> Result<PiecewiseContraction, CliError> {
    match load_map(path)? {
        Map::Pc(f) => Ok(f),
        Map::Iet(_) => Err(CliError::invalid(
            "map",
            format!("{} holds an IET, expected a PC", path.display()),
        )),
    }
}

/// The enclosure family recorded by `construct`; other sidecar fields are
/// audit data.
fn load_family(path: &Path) -> Result<PcEnclosure, CliError> {
    #[derive(Deserialize)]
    struct Sidecar {
        family: PcEnclosure,
    }
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::invalid("io", format!("{}: {e}", path.display())))?;
    let side: Sidecar =
        serde_json::from_str(&text).map_err(|e| CliError::invalid("sidecar", format!("{}: {e}", path.display())))?;
    Ok(side.family)
}

/// The exact map, or the family from a sidecar after checking that the map
/// is its representative.
fn pc_target(map: &Path, sidecar: Option<&PathBuf>) -> Result<Box<dyn AffinePieces>, CliError> {
    let f = load_pc(map)?;
    match sidecar {
        None => Ok(Box::new(f)),
        Some(path) => {
            let family = load_family(path)?;
            if family.representative().to_spec() != f.to_spec() {
                return Err(CliError::invalid(
                    "sidecar",
                    format!("{} does not describe the map in {}", path.display(), map.display()),
                ));
            }
            Ok(Box::new(family))
        }
    }
}

pub fn parse_point(text: &str) -> Result<ExactNumber, CliError> {
    parse_exact(text).map_err(|e| CliError::invalid("number", format!("{text:?}: {e}")))
}

#[derive(Serialize)]
struct CodingReport<'a> {
    map: &'a str,
    x: &'a ExactNumber,
    length: usize,
    word: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    stop: Option<ietpc::pc::OrbitStop>,
    approximate: bool,
}

fn letters_csv(word: &SymbolicWord) -> String {
    let mut out = String::from("k,letter\n");
    for (k, s) in word.symbols().iter().enumerate() {
        let _ = writeln!(out, "{k},{s}");
    }
    out
}

pub fn code(out: &Out, map: &Path, x: &str, len: usize, bits: Option<u32>) -> Result<(), CliError> {
    let x = parse_point(x)?;
    let (kind, word, stop, approximate) = match (load_map(map)?, bits) {
        (Map::Iet(t), None) => ("iet", t.coding(&x, len)?, None, false),
        (Map::Iet(_), Some(_)) => return Err(CliError::invalid("argument", "--bits applies to PC maps only")),
        (Map::Pc(f), None) => ("pc", f.coding(&x, len)?, None, false),
        (Map::Pc(f), Some(b)) => {
            let c = f.coding_rounded(&x, len, b)?;
            ("pc", c.word, Some(c.stop), c.approximate)
        }
    };
    let text = match out.format_or(Format::Plain) {
        Format::Plain => format!("{}\n", word.to_text()),
        Format::Csv => letters_csv(&word),
        Format::Json => to_json(&CodingReport {
            map: kind,
            x: &x,
            length: word.len(),
            word: word.to_text(),
            stop,
            approximate,
        }),
    };
    out.write(&text)?;
    match stop {
        Some(ietpc::pc::OrbitStop::Undecided { step }) => Err(CliError::inconclusive(format!(
            "letter {step} undecided at this precision"
        ))),
        _ => Ok(()),
    }
}

fn table_text(format: Format, table: &ComplexityTable, json: impl FnOnce() -> String) -> String {
    match format {
        Format::Csv => table.to_csv(),
        Format::Plain => table.values.iter().map(|(k, p)| format!("p({k}) = {p}\n")).collect(),
        Format::Json => json(),
    }
}

pub fn complexity_cmd(
    out: &Out,
    map: &Path,
    x: &str,
    len: usize,
    k_max: usize,
    refinement: bool,
) -> Result<(), CliError> {
    let x = parse_point(x)?;
    let format = out.format_or(Format::Csv);
    let text = if refinement {
        let t = match load_map(map)? {
            Map::Iet(t) => t,
            Map::Pc(_) => return Err(CliError::invalid("argument", "--refinement needs an IET map")),
        };
        let r = t.refinement_complexity(&x, k_max)?;
        table_text(format, &r.table, || to_json(&r))
    } else {
        let word = match load_map(map)? {
            Map::Iet(t) => t.coding(&x, len)?,
            Map::Pc(f) => f.coding(&x, len)?,
        };
        let table = complexity(&word, k_max)?;
        let stability = prefix_stability(&word, k_max)?;
        match format {
            Format::Csv => table.to_csv(),
            Format::Plain => {
                let mut s = table_text(format, &table, String::new);
                let [a, b, c] = stability.lengths;
                let verdict = if stability.changed { "changed" } else { "unchanged" };
                let _ = writeln!(s, "prefixes {a}, {b}, {c}: table {verdict}");
                s
            }
            Format::Json => {
                #[derive(Serialize)]
                struct Counted<'a> {
                    #[serde(flatten)]
                    table: &'a ComplexityTable,
                    prefix_lengths: [usize; 3],
                    changed_over_last_doublings: bool,
                }
                to_json(&Counted {
                    table: &table,
                    prefix_lengths: stability.lengths,
                    changed_over_last_doublings: stability.changed,
                })
            }
        }
    };
    out.write(&text)
}

pub fn idoc(out: &Out, map: &Path, depth: usize) -> Result<(), CliError> {
    let t = load_iet(map)?;
    let evidence = t.minimality_evidence(depth)?;
    let text = match out.format_or(Format::Json) {
        Format::Json => to_json(&evidence),
        Format::Csv => format!(
            "depth,verdict,irreducible,standard,keane_applies\n{},{},{},{},{}\n",
            evidence.idoc.depth,
            verdict_text(&evidence.idoc.verdict),
            evidence.irreducible,
            evidence.standard,
            evidence.keane_applies
        ),
        Format::Plain => format!(
            "i.d.o.c.: {} (depth {})\nirreducible: {}\nstandard: {}\nKeane's criterion applies: {}\n",
            verdict_text(&evidence.idoc.verdict),
            evidence.idoc.depth,
            evidence.irreducible,
            evidence.standard,
            evidence.keane_applies
        ),
    };
    out.write(&text)
}

fn verdict_text(v: &ietpc::IdocVerdict) -> String {
    use ietpc::IdocVerdict::*;
    match v {
        PassedToDepth => "passed".into(),
        FailedDisjoint { i, j, k, l } => format!("failed: T^{k}(x_{i}) = T^{l}(x_{j})"),
        FailedFinite { i, k } => format!("failed: T^{k}(x_{i}) returns to a discontinuity"),
    }
}

pub fn construct(
    out: &Out,
    map: &Path,
    depth: usize,
    seed: Option<&str>,
    sidecar: Option<&Path>,
) -> Result<(), CliError> {
    let t = load_iet(map)?;
    let seed = seed.map(parse_point).transpose()?;
    let c = build_pc_from_iet(&t, seed.as_ref(), depth)?;
    if let Some(path) = sidecar {
        write_atomic(path, out.force, &to_json(&c.sidecar()))?;
    }
    let text = match out.format_or(Format::Json) {
        Format::Json => MapFile::Pc(c.pc.to_spec()).to_json() + "\n",
        Format::Csv => {
            let mut s = String::from("piece,left,right,slope,intercept\n");
            for i in 0..c.pc.pieces() {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{}",
                    i + 1,
                    c.pc.breakpoints()[i],
                    c.pc.breakpoints()[i + 1],
                    c.pc.slopes()[i],
                    c.pc.intercepts()[i]
                );
            }
            s
        }
        Format::Plain => {
            let mut s = format!(
                "seed {}\ndepth {}\nerror bound {:e}\n",
                c.seed,
                depth,
                c.error_bound.to_f64()
            );
            for (i, p) in c.provenance.iter().enumerate() {
                let _ = writeln!(
                    s,
                    "piece {}: slope {}, intercept {}, right breakpoint {}",
                    i + 1,
                    p.slope,
                    p.intercept,
                    p.breakpoint
                );
            }
            s
        }
    };
    out.write(&text)
}

pub struct VerifyArgs<'a> {
    pub map: &'a Path,
    pub depth: usize,
    pub len: usize,
    pub samples: usize,
    pub seed: Option<&'a str>,
}

pub fn verify(out: &Out, a: VerifyArgs) -> Result<(), CliError> {
    let t = load_iet(a.map)?;
    let seed = a.seed.map(parse_point).transpose()?;
    let c = build_pc_from_iet(&t, seed.as_ref(), a.depth)?;
    let r = verify_semiconjugacy(&c, &t, a.len, a.samples)?;
    let text = match out.format_or(Format::Json) {
        Format::Json => to_json(&r),
        Format::Csv => {
            let mut s = String::from("gap,agree,disagree,undecided\n");
            for row in &r.samples {
                let _ = writeln!(s, "{},{},{},{}", row.gap, row.agree, row.disagree, row.undecided);
            }
            s
        }
        Format::Plain => format!(
            "length {}, samples {}\nagree {}, disagree {}, undecided {} ({:.1}%)\n{}\n",
            r.length,
            r.samples.len(),
            r.agree,
            r.disagree,
            r.undecided,
            100.0 * r.undecided_fraction(),
            if r.pass { "pass" } else { "FAIL" }
        ),
    };
    out.write(&text)?;
    if !r.pass {
        let (gap, at) = r.first_disagreement.unwrap_or_default();
        return Err(CliError::invalid(
            "verification",
            format!(
                "{} certified disagreements, first at gap {gap}, letter {at}",
                r.disagree
            ),
        ));
    }
    if r.agree == 0 && r.undecided > 0 {
        return Err(CliError::inconclusive("no letter could be decided"));
    }
    Ok(())
}

#[derive(Serialize)]
struct RabbitReport {
    bits: u32,
    coding_length: usize,
    rabbit: Ball,
    rabbit_lower: String,
    rabbit_upper: String,
    delta: Ball,
    one_minus_half_rabbit: Ball,
    identity_holds: bool,
}

pub fn rabbit(out: &Out, bits: u32, len: usize) -> Result<(), CliError> {
    let r = rabbit_constant(bits);
    let alpha = ExactNumber::from(2) - ExactNumber::golden_ratio();
    let theta = Iet::golden_rotation().coding(&alpha, len)?;
    let rot = rotation_pc(&theta)?;
    let target = &Ball::exact(Dyadic::one()) - &r.mul_pow2(-1);
    let places = (bits as usize * 301).div_ceil(1000) + 2;
    let report = RabbitReport {
        bits,
        coding_length: len,
        rabbit_lower: r.lo().to_decimal(places),
        rabbit_upper: r.hi().to_decimal_ceil(places),
        rabbit: r,
        identity_holds: rot.delta.overlaps(&target),
        delta: rot.delta,
        one_minus_half_rabbit: target,
    };
    let text = match out.format_or(Format::Plain) {
        Format::Json => to_json(&report),
        Format::Csv => format!(
            "quantity,lower,upper\nR,{},{}\ndelta,{},{}\n",
            report.rabbit_lower,
            report.rabbit_upper,
            report.delta.lo().to_decimal(places),
            report.delta.hi().to_decimal_ceil(places)
        ),
        Format::Plain => format!(
            "R in [{}, {}]\ndelta in [{}, {}]\ndelta = 1 - R/2: {}\n",
            report.rabbit_lower,
            report.rabbit_upper,
            report.delta.lo().to_decimal(places),
            report.delta.hi().to_decimal_ceil(places),
            if report.identity_holds {
                "consistent"
            } else {
                "VIOLATED"
            }
        ),
    };
    out.write(&text)?;
    if !report.identity_holds {
        return Err(CliError::invalid("verification", "delta enclosure misses 1 - R/2"));
    }
    Ok(())
}

fn arithmetic(bits: Option<u32>) -> Arithmetic {
    match bits {
        Some(bits) => Arithmetic::Rounded { bits },
        None => CertifyOptions::default().arithmetic,
    }
}

pub struct CertifyArgs<'a> {
    pub map: &'a Path,
    pub sidecar: Option<&'a PathBuf>,
    pub x: &'a str,
    pub budget: usize,
    pub bits: Option<u32>,
}

pub fn certify(out: &Out, a: CertifyArgs) -> Result<(), CliError> {
    let target = pc_target(a.map, a.sidecar)?;
    let x = parse_point(a.x)?;
    let opts = CertifyOptions {
        budget: a.budget,
        arithmetic: arithmetic(a.bits),
    };
    let Some(cert) = certify_periodic_with(target.as_ref(), &x, opts)? else {
        return Err(CliError::inconclusive(format!(
            "no periodic certificate within {} steps",
            a.budget
        )));
    };
    cert.revalidate(target.as_ref())
        .map_err(|e| CliError::invalid("certificate", format!("certificate failed revalidation: {e}")))?;
    let text = match out.format_or(Format::Json) {
        Format::Json => to_json(&cert),
        Format::Csv => format!(
            "preperiod,period,word,cylinder,slope\n{},{},{},\"{}\",{}\n",
            cert.preperiod,
            cert.period,
            cert.word_text(),
            cert.cylinder,
            cert.slope
        ),
        Format::Plain => format!(
            "eventually periodic: preperiod {}, period {}\nperiodic word {}\ncylinder {}\n",
            cert.preperiod,
            cert.period,
            cert.word_text(),
            cert.cylinder
        ),
    };
    out.write(&text)
}

pub struct FactorArgs<'a> {
    pub map: &'a Path,
    pub sidecar: Option<&'a PathBuf>,
    pub x: &'a str,
    pub m: usize,
    pub grid: usize,
    pub budget: usize,
}

pub fn factor(out: &Out, a: FactorArgs) -> Result<(), CliError> {
    let target = pc_target(a.map, a.sidecar)?;
    let x = parse_point(a.x)?;
    let opts = FactorOptions {
        grid_size: a.grid,
        certify_budget: a.budget,
    };
    let fac = empirical_factor_with(target.as_ref(), &x, a.m, opts)?;
    let text = match out.format_or(Format::Json) {
        Format::Json => to_json(&fac),
        Format::Csv => {
            let mut s = String::from("t,h\n");
            for (t, h) in &fac.grid {
                let _ = writeln!(s, "{t},{h}");
            }
            s
        }
        Format::Plain => format!(
            "samples {}\nkept pieces {:?}\nbreakpoints {:?}\nsigns {:?}\ntranslations {:?}\nresidual {:e}\n(floating-point estimate)\n",
            fac.m, fac.kept_pieces, fac.breakpoints, fac.signs, fac.translations, fac.residual
        ),
    };
    out.write(&text)
}

#[derive(Serialize)]
struct SweepRow {
    index: usize,
    map: ietpc::pc::PcSpec,
    certified: bool,
    preperiod: Option<usize>,
    period: Option<usize>,
    word: Option<String>,
}

#[derive(Serialize)]
struct SweepReport {
    seed: u64,
    count: usize,
    budget: usize,
    certified: usize,
    rows: Vec<SweepRow>,
}

pub fn sweep(out: &Out, count: usize, seed: u64, budget: usize, jobs: usize) -> Result<(), CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let maps: Vec<PiecewiseContraction> = (0..count).map(|_| random_half_slope_pc(&mut rng)).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::invalid("argument", e))?;
    let zero = ExactNumber::zero();
    let results: Vec<Result<SweepRow, CliError>> = pool.install(|| {
        use rayon::prelude::*;
        maps.par_iter()
            .enumerate()
            .map(|(index, f)| {
                let opts = CertifyOptions {
                    budget,
                    ..CertifyOptions::default()
                };
                let cert = certify_periodic_with(f, &zero, opts)?;
                if let Some(c) = &cert {
                    c.revalidate(f)
                        .map_err(|e| CliError::invalid("certificate", format!("map {index}: {e}")))?;
                }
                Ok(SweepRow {
                    index,
                    map: f.to_spec(),
                    certified: cert.is_some(),
                    preperiod: cert.as_ref().map(|c| c.preperiod),
                    period: cert.as_ref().map(|c| c.period),
                    word: cert.as_ref().map(|c| c.word_text()),
                })
            })
            .collect()
    });
    let rows = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let report = SweepReport {
        seed,
        count,
        budget,
        certified: rows.iter().filter(|r| r.certified).count(),
        rows,
    };
    let text = match out.format_or(Format::Csv) {
        Format::Json => to_json(&report),
        Format::Csv => {
            let mut s = String::from("index,certified,preperiod,period,word\n");
            for r in &report.rows {
                let opt = |v: Option<usize>| v.map(|v| v.to_string()).unwrap_or_default();
                let _ = writeln!(
                    s,
                    "{},{},{},{},{}",
                    r.index,
                    r.certified,
                    opt(r.preperiod),
                    opt(r.period),
                    r.word.clone().unwrap_or_default()
                );
            }
            s
        }
        Format::Plain => format!(
            "certified {}/{} (seed {seed}, budget {budget})\n",
            report.certified, count
        ),
    };
    out.write(&text)
}
