use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{ArgGroup, Args, Parser, Subcommand};
use num_rational::Ratio;
use serde::Serialize;
use sumnet_core::analysis::{
    applicable_mode, bound_check, composites_of, feasible_decoders, search, wrong_char_bound, AnalysisError,
    BoundContext, BoundMode, BoundStatus, CompositeEncoding, Feasibility, Strategy, DEFAULT_BUDGET,
};
use sumnet_core::coding::{routing_code, scheme_for_instance, verify, CodeError, FracLinCode};
use sumnet_core::constructions::{
    build_bottleneck2, build_for_rate, Family, FamilyInstance, NetManifest, NetParams, PrimeSetMode, RateTarget,
};
use sumnet_core::galois::PrimeField;
use sumnet_core::matrix::Mat;
use sumnet_core::network::SumNetwork;

use crate::format::{read_code, read_manifest, read_network, to_canonical, write_code, write_manifest, write_network};
use crate::report::{bound_json, bound_text, ratio, search_file, verify_json, verify_text};
use crate::run::RunRecorder;

/// Build sum-networks, construct and verify linear codes for them, search
/// for codes, and certify rate bounds.
#[derive(Parser)]
#[command(name = "sumnet", version, about)]
struct Cli {
    /// Write the run manifest here instead of to stderr.
    #[arg(long, global = true, value_name = "PATH")]
    run_manifest: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a network and its manifest sidecar.
    Build(BuildArgs),
    /// Construct a code for a built network.
    Scheme(SchemeArgs),
    /// Check that every terminal recovers the sum.
    Verify(VerifyArgs),
    /// Search for codes by enumerating or sampling middle-edge maps.
    Search(SearchArgs),
    /// Report capacity and bounds, and certify a code against them.
    Bounds(BoundsArgs),
}

#[derive(Args, Serialize)]
#[command(group(ArgGroup::new("what").required(true).args(["family", "rate"])))]
struct BuildArgs {
    /// n1, n2 or bottleneck2.
    #[arg(long)]
    family: Option<String>,
    #[arg(long, requires = "q")]
    m: Option<usize>,
    #[arg(long, requires = "m")]
    q: Option<u64>,
    /// Number of merged copies.
    #[arg(long, default_value_t = 1, conflicts_with = "rate")]
    k: usize,
    /// Target rate `k/n`; picks the family and parameters.
    #[arg(long, requires_all = ["primes", "mode"])]
    rate: Option<String>,
    /// Comma-separated primes.
    #[arg(long, value_delimiter = ',')]
    primes: Vec<u64>,
    /// in-set or not-in-set.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    out: PathBuf,
    /// Also write Graphviz DOT here.
    #[arg(long)]
    dot: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct SchemeArgs {
    #[arg(long)]
    net: PathBuf,
    /// Defaults to the sidecar next to the network.
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long)]
    p: u64,
    /// Plain routing instead of the family scheme.
    #[arg(long)]
    routing: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct VerifyArgs {
    #[arg(long)]
    net: PathBuf,
    #[arg(long)]
    code: PathBuf,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Serialize)]
#[command(group(ArgGroup::new("strategy").required(true).args(["exhaustive", "random"])))]
struct SearchArgs {
    #[arg(long)]
    net: PathBuf,
    #[arg(long)]
    r: usize,
    #[arg(long)]
    l: usize,
    #[arg(long)]
    p: u64,
    #[arg(long)]
    exhaustive: bool,
    /// Largest exhaustive space accepted.
    #[arg(long, default_value_t = DEFAULT_BUDGET, requires = "exhaustive")]
    budget: u64,
    /// Number of random samples.
    #[arg(long, value_name = "N", requires = "seed")]
    random: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Examine the family scheme's own maps first.
    #[arg(long)]
    include_scheme: bool,
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct BoundsArgs {
    #[arg(long)]
    net: PathBuf,
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Certify this code.
    #[arg(long)]
    code: Option<PathBuf>,
    /// Certificate mode; defaults to the one matching the code's field.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    json: bool,
}

/// Runs the CLI and returns the process exit code: 0 on success, 1 when the
/// requested check fails or a construction is refused, 2 on bad input.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let (name, params, seed) = match &cli.command {
        Command::Build(a) => ("build", serde_json::to_value(a), None),
        Command::Scheme(a) => ("scheme", serde_json::to_value(a), None),
        Command::Verify(a) => ("verify", serde_json::to_value(a), None),
        Command::Search(a) => ("search", serde_json::to_value(a), a.seed),
        Command::Bounds(a) => ("bounds", serde_json::to_value(a), None),
    };
    let mut rec = RunRecorder::start(name, params.unwrap_or_default(), seed);
    let result = match &cli.command {
        Command::Build(a) => build(a, &mut rec),
        Command::Scheme(a) => scheme(a, &mut rec),
        Command::Verify(a) => verify_cmd(a),
        Command::Search(a) => search_cmd(a, &mut rec),
        Command::Bounds(a) => bounds(a),
    };
    let code = match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e:#}");
            2
        }
    };
    if let Err(e) = rec.finish(code == 0).emit(cli.run_manifest.as_deref()) {
        eprintln!("error: cannot write run manifest: {e}");
        return 2;
    }
    code
}

/// `net.json` has its manifest at `net.manifest.json`.
pub fn sidecar_path(net: &Path) -> PathBuf {
    let name = net.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let stem = name.strip_suffix(".json").unwrap_or(&name);
    net.with_file_name(format!("{stem}.manifest.json"))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write(path: &Path, text: &str, rec: &mut RunRecorder) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?;
    rec.artifact(path);
    Ok(())
}

fn load_network(path: &Path) -> Result<SumNetwork> {
    read_network(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn load_code(net: &SumNetwork, path: &Path) -> Result<FracLinCode> {
    read_code(net, &read(path)?).with_context(|| format!("in {}", path.display()))
}

fn load_manifest(net: &Path, explicit: Option<&Path>) -> Result<NetManifest> {
    let path = explicit.map(Path::to_path_buf).unwrap_or_else(|| sidecar_path(net));
    read_manifest(&read(&path)?).with_context(|| format!("in {}", path.display()))
}

/// What the manifest says the network is, checked against the network itself.
enum Known {
    Bottleneck,
    Family(Box<FamilyInstance>),
}

fn identify(net: &SumNetwork, man: &NetManifest) -> Result<Known> {
    let strip = |n: &SumNetwork| write_network(&n.clone().with_field_hint(None));
    let (known, rebuilt) = match man.family_kind() {
        Some(family) => {
            let (m, q) = man.m.zip(man.q).ok_or_else(|| anyhow!("manifest lacks m or q"))?;
            let inst = FamilyInstance::new(family, NetParams::new(m, q)?, man.k)?;
            let rebuilt = strip(&inst.network);
            (Known::Family(Box::new(inst)), rebuilt)
        }
        None if man.family == "bottleneck2" => (Known::Bottleneck, strip(&build_bottleneck2())),
        None => bail!("unknown family `{}` in manifest", man.family),
    };
    if rebuilt != strip(net) {
        bail!("network does not match its manifest ({} m={:?} q={:?} k={})", man.family, man.m, man.q, man.k);
    }
    Ok(known)
}

fn build(a: &BuildArgs, rec: &mut RunRecorder) -> Result<bool> {
    let (net, man) = if let Some(rate) = &a.rate {
        let (k, n) = rate.split_once('/').ok_or_else(|| anyhow!("--rate must look like k/n"))?;
        let mode = a.mode.as_deref().unwrap_or_default();
        let target = RateTarget {
            k: k.trim().parse().context("--rate numerator")?,
            n: n.trim().parse().context("--rate denominator")?,
            primes: a.primes.clone(),
            mode: PrimeSetMode::parse(mode).ok_or_else(|| anyhow!("unknown mode `{mode}` (in-set, not-in-set)"))?,
        };
        let (inst, man) = build_for_rate(&target)?;
        (inst.network, man)
    } else {
        let family = a.family.as_deref().unwrap_or_default();
        if family == "bottleneck2" {
            if a.m.is_some() || a.k != 1 {
                bail!("bottleneck2 takes no parameters");
            }
            (build_bottleneck2(), NetManifest::bottleneck2())
        } else {
            let fam =
                Family::parse(family).ok_or_else(|| anyhow!("unknown family `{family}` (n1, n2, bottleneck2)"))?;
            let (m, q) = a.m.zip(a.q).ok_or_else(|| anyhow!("--m and --q are required for {fam}"))?;
            let inst = FamilyInstance::new(fam, NetParams::new(m, q)?, a.k)?;
            let man = NetManifest::for_instance(&inst);
            (inst.network, man)
        }
    };
    write(&a.out, &write_network(&net), rec)?;
    write(&sidecar_path(&a.out), &write_manifest(&man), rec)?;
    if let Some(dot) = &a.dot {
        write(dot, &net.to_dot(), rec)?;
    }
    println!(
        "{} with {} nodes and {} edges, capacity {}",
        a.out.display(),
        net.num_nodes(),
        net.num_edges(),
        ratio(man.capacity)
    );
    Ok(true)
}

/// Scalar code for the two-source bottleneck: the middle edge carries the sum.
fn bottleneck_code(net: &SumNetwork, p: u64) -> Result<FracLinCode> {
    let field = PrimeField::new(p)?;
    let comp = CompositeEncoding { field, r: 1, l: 1, maps: vec![Mat::from_i64(field, 1, 2, &[1, 1])] };
    match feasible_decoders(net, &comp)? {
        Feasibility::Feasible(code) => Ok(code),
        Feasibility::Infeasible { terminal } => bail!("no decoder at {terminal}"),
    }
}

fn scheme(a: &SchemeArgs, rec: &mut RunRecorder) -> Result<bool> {
    let net = load_network(&a.net)?;
    let built = if a.routing {
        routing_code(&net, a.p)
    } else {
        match identify(&net, &load_manifest(&a.net, a.manifest.as_deref())?)? {
            Known::Bottleneck => Ok(bottleneck_code(&net, a.p)?),
            Known::Family(inst) => scheme_for_instance(&inst, a.p),
        }
    };
    let code = match built {
        Ok(c) => c,
        Err(CodeError::Refused(why)) => {
            eprintln!("refused: {why}");
            return Ok(false);
        }
        Err(e) => return Err(e.into()),
    };
    let report = verify(&net, &code)?;
    write(&a.out, &write_code(&net, &code), rec)?;
    println!(
        "(r, l) = ({}, {}) over GF({}), rate {}, {}",
        code.r,
        code.l,
        a.p,
        ratio(code.rate()),
        if report.pass { "verified" } else { "NOT verified" }
    );
    Ok(report.pass)
}

fn verify_cmd(a: &VerifyArgs) -> Result<bool> {
    let net = load_network(&a.net)?;
    let code = load_code(&net, &a.code)?;
    let report = verify(&net, &code)?;
    if a.json {
        print!("{}", to_canonical(&verify_json(&report)));
    } else {
        print!("{}", verify_text(&report));
    }
    Ok(report.pass)
}

fn search_cmd(a: &SearchArgs, rec: &mut RunRecorder) -> Result<bool> {
    let net = load_network(&a.net)?;
    let strategy = match (a.exhaustive, a.random) {
        (true, None) => Strategy::Exhaustive { budget: a.budget },
        (false, Some(samples)) => Strategy::Random { samples, seed: a.seed.unwrap_or_default() },
        _ => bail!("choose exactly one of --exhaustive and --random"),
    };
    let mut seeds = Vec::new();
    if a.include_scheme {
        let built = match identify(&net, &load_manifest(&a.net, a.manifest.as_deref())?)? {
            Known::Bottleneck => Ok(bottleneck_code(&net, a.p)?),
            Known::Family(inst) => scheme_for_instance(&inst, a.p),
        };
        match built {
            Ok(code) if (code.r, code.l) == (a.r, a.l) => seeds.push(composites_of(&net, &code)?),
            Ok(code) => eprintln!("note: scheme has (r, l) = ({}, {}); not seeding", code.r, code.l),
            Err(CodeError::Refused(why)) => eprintln!("note: no scheme to seed ({why})"),
            Err(e) => return Err(e.into()),
        }
    }
    let out = match search(&net, a.r, a.l, a.p, strategy, &seeds) {
        Err(e @ AnalysisError::BudgetExceeded { .. }) => bail!("{e}; raise --budget or use --random"),
        other => other?,
    };
    write(&a.out, &search_file(&net, &out), rec)?;
    println!("examined {}, found {}", out.examined, out.solutions.len());
    Ok(!out.solutions.is_empty())
}

fn bounds(a: &BoundsArgs) -> Result<bool> {
    let net = load_network(&a.net)?;
    let man = load_manifest(&a.net, a.manifest.as_deref())?;
    let inst = match identify(&net, &man)? {
        Known::Family(inst) => inst,
        Known::Bottleneck => {
            if a.code.is_some() {
                bail!("no rank certificate is defined for bottleneck2");
            }
            if a.json {
                print!("{}", to_canonical(&serde_json::json!({"family": "bottleneck2", "capacity": "1"})));
            } else {
                println!("bottleneck2: capacity 1");
            }
            return Ok(true);
        }
    };
    let (m, q, k) = (inst.params.m, inst.params.q, inst.k);
    let wrong = wrong_char_bound(m, q) * Ratio::from_integer(k as u64);
    let mut cert = None;
    if let Some(path) = &a.code {
        let code = load_code(&net, path)?;
        let mode = match &a.mode {
            Some(s) => BoundMode::parse(s).ok_or_else(|| anyhow!("unknown mode `{s}`"))?,
            None => applicable_mode(inst.family, q, code.field.modulus() as u64),
        };
        cert = Some(bound_check(&net, &code, BoundContext::of(&inst), mode)?);
    }
    let pass = cert.as_ref().is_none_or(|c| c.status == BoundStatus::Certified && c.rate_ok);
    if a.json {
        let v = serde_json::json!({
            "family": man.family,
            "m": m,
            "q": q,
            "k": k,
            "capacity": ratio(inst.capacity()),
            "wrong_char_bound": ratio(wrong),
            "certificate": cert.as_ref().map(bound_json),
        });
        print!("{}", to_canonical(&v));
    } else {
        println!("{} m={m} q={q} k={k}", man.family);
        println!("capacity {}", ratio(inst.capacity()));
        println!("wrong-characteristic bound {}", ratio(wrong));
        if let Some(c) = &cert {
            print!("{}", bound_text(c));
        }
    }
    Ok(pass)
}
