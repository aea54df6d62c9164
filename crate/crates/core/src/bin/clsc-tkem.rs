//! Command-line driver for every role: KGC, user, sender and recipient.
//!
//! Exit codes: 0 ok, 1 usage or I/O, 2 rejection (⊥), 3 key validation.
//!
//! Two environment variables exist for reproducible tests and are never
//! meant for real keys:
//! `CLSC_TKEM_RNG_TAPE` (hex) replaces the OS randomness with a fixed tape,
//! and `CLSC_TKEM_STUB_VECTOR` (path to a vector file) installs its stub
//! hash table.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rand::rngs::OsRng;
use rand::{CryptoRng, RngCore};

use clsc_tkem::bench::{cost_report, timing_bench};
use clsc_tkem::codec;
use clsc_tkem::dktuts::{self, Clock, FixedClock, Freshness, SystemClock, Timestamp};
use clsc_tkem::group::{Backend, Group, P256Group, ToyGroup};
use clsc_tkem::hash_suite::HashSuite;
use clsc_tkem::hybrid::{signcrypt, unsigncrypt, Protocol};
use clsc_tkem::kgc::{extract_partial_key, setup, SystemParams};
use clsc_tkem::lsw;
use clsc_tkem::rng::TapeRng;
use clsc_tkem::user_keys::{combine_public_key, gen_full_keys};
use clsc_tkem::vectors::{self, TestVectorFile};
use clsc_tkem::Error;

const RNG_TAPE_VAR: &str = "CLSC_TKEM_RNG_TAPE";
const STUB_VECTOR_VAR: &str = "CLSC_TKEM_STUB_VECTOR";

#[derive(Parser)]
#[command(name = "clsc-tkem", version, about = "Certificateless signcryption tag-KEMs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// KGC setup: system parameters and master key.
    Setup {
        /// 256 selects P-256; 2..=31 selects a toy group of that size.
        #[arg(long, default_value_t = 256)]
        bits: u32,
        #[arg(long)]
        out_params: PathBuf,
        #[arg(long)]
        out_msk: PathBuf,
    },
    /// KGC: extract a partial private key for an identity.
    Extract {
        #[arg(long)]
        msk: PathBuf,
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        id: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// User: validate the partial key and build the full key pair.
    Userkeys {
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        partial: PathBuf,
        #[arg(long)]
        out_priv: PathBuf,
        #[arg(long)]
        out_pub: PathBuf,
    },
    /// Sender: derive K and encapsulate it under a tag.
    Encap {
        #[arg(long, value_enum)]
        protocol: Protocol,
        #[command(flatten)]
        keys: KeyArgs,
        #[arg(long)]
        tag_file: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Where to write K; printed as hex when omitted.
        #[arg(long)]
        out_key: Option<PathBuf>,
        /// Timestamp for DKTUTS, in seconds; defaults to the system clock.
        #[arg(long)]
        now: Option<u64>,
    },
    /// Recipient: verify an encapsulation and recover K.
    Decap {
        #[arg(long, value_enum)]
        protocol: Protocol,
        #[command(flatten)]
        keys: KeyArgs,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        tag_file: PathBuf,
        #[arg(long)]
        out_key: Option<PathBuf>,
        #[command(flatten)]
        time: TimeArgs,
    },
    /// Sender: KEM + DEM in one container.
    Signcrypt {
        #[arg(long, value_enum)]
        protocol: Protocol,
        #[command(flatten)]
        keys: KeyArgs,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        now: Option<u64>,
    },
    /// Recipient: open a signcrypted container.
    Unsigncrypt {
        #[command(flatten)]
        keys: KeyArgs,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        time: TimeArgs,
    },
    /// Operation counts against the reference tables, plus optional timing.
    Bench {
        /// Restrict to one protocol; both by default.
        #[arg(long, value_enum)]
        protocol: Option<Protocol>,
        /// Print the side-by-side table.
        #[arg(long)]
        table: bool,
        /// Write the report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Timed iterations on P-256 (0 skips timing).
        #[arg(long, default_value_t = 0)]
        iterations: usize,
    },
    /// Replay test-vector files.
    Vectors {
        #[arg(long, required = true, num_args = 1..)]
        check: Vec<PathBuf>,
    },
}

#[derive(clap::Args)]
struct KeyArgs {
    #[arg(long)]
    params: PathBuf,
    /// Own private key.
    #[arg(long = "priv")]
    private: PathBuf,
    /// The peer's public key.
    #[arg(long)]
    peer_pub: PathBuf,
}

#[derive(clap::Args)]
struct TimeArgs {
    /// Receive time for DKTUTS, in seconds; defaults to the system clock.
    #[arg(long)]
    now: Option<u64>,
    /// DKTUTS freshness window in seconds.
    #[arg(long, default_value_t = Freshness::default().window_secs)]
    window: u64,
}

enum Failure {
    Usage(String),
    Rejected,
    Validation(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Rejected => 2,
            Failure::Validation(_) => 3,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Usage(m) => eprintln!("error: {m}"),
                Failure::Rejected => eprintln!("rejected"),
                Failure::Validation(m) => eprintln!("key validation failed: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}

fn run(command: Command) -> CliResult {
    match command {
        Command::Setup {
            bits,
            out_params,
            out_msk,
        } => match Backend::for_security_bits(bits)? {
            Backend::P256 => cmd_setup(P256Group, &out_params, &out_msk),
            Backend::Toy { q } => cmd_setup(ToyGroup::new(q)?, &out_params, &out_msk),
        },
        Command::Bench {
            protocol,
            table,
            json,
            iterations,
        } => cmd_bench(protocol, table, json.as_deref(), iterations),
        Command::Vectors { check } => cmd_vectors(&check),
        other => {
            let params_path = match &other {
                Command::Extract { params, .. } | Command::Userkeys { params, .. } => params,
                Command::Encap { keys, .. }
                | Command::Decap { keys, .. }
                | Command::Signcrypt { keys, .. }
                | Command::Unsigncrypt { keys, .. } => &keys.params,
                _ => unreachable!("handled above"),
            };
            let bytes = read(params_path)?;
            match codec::read_header(&bytes)?.0.backend {
                Backend::P256 => with_group(P256Group, &bytes, other),
                Backend::Toy { q } => with_group(ToyGroup::new(q)?, &bytes, other),
            }
        }
    }
}

fn with_group<G: Group>(group: G, params_bytes: &[u8], command: Command) -> CliResult {
    let mut params = codec::decode_params(group, params_bytes)?;
    if let Some(suite) = stub_suite()? {
        params = params.with_suite(suite);
    }
    let mut rng = rng()?;
    let rng = rng.as_mut();
    let g = params.group.clone();
    match command {
        Command::Extract { msk, id, out, .. } => {
            let msk = codec::decode_master_key(&params, &read(&msk)?)?;
            let ppk = extract_partial_key(&msk, &params, id.as_bytes(), rng)?;
            write(&out, &codec::encode_partial_key(&g, &ppk), true)
        }
        Command::Userkeys {
            partial,
            out_priv,
            out_pub,
            ..
        } => {
            let ppk = codec::decode_partial_key(&g, &read(&partial)?)?;
            let sk = gen_full_keys(&params, &ppk, rng).map_err(|e| match e {
                Error::KeyValidation => Failure::Validation("partial private key does not verify".into()),
                e => e.into(),
            })?;
            write(&out_priv, &codec::encode_private_key(&g, &sk), true)?;
            write(&out_pub, &codec::encode_public_key(&g, sk.public()), false)
        }
        Command::Encap {
            protocol,
            keys,
            tag_file,
            out,
            out_key,
            now,
        } => {
            let (sk, peer) = load_keys(&params, &keys)?;
            let peer = combine_public_key(&params, &peer)?;
            let tag = read(&tag_file)?;
            let (k, phi) = match protocol {
                Protocol::Lsw => {
                    let (k, session) = lsw::symmetric_key_gen(&params, &sk, &peer, rng)?;
                    let phi = session.encapsulate(&params, &tag, &sk, rng)?;
                    (k, codec::encode_lsw(&g, &phi))
                }
                Protocol::Dktuts => {
                    let clock = clock(now);
                    let (k, session) = dktuts::symmetric_key_gen(&params, &sk, &peer, clock.as_ref(), rng)?;
                    let phi = session.encapsulate(&params, &tag, &sk, rng)?;
                    (k, codec::encode_dktuts(&g, &phi))
                }
            };
            write(&out, &phi, false)?;
            emit_key(&g, &k, out_key.as_deref())
        }
        Command::Decap {
            protocol,
            keys,
            input,
            tag_file,
            out_key,
            time,
        } => {
            let (sk, peer) = load_keys(&params, &keys)?;
            let tag = read(&tag_file)?;
            let phi = read(&input)?;
            let k = match protocol {
                Protocol::Lsw => {
                    let phi = codec::decode_lsw(&g, &phi).map_err(|_| Failure::Rejected)?;
                    let peer = combine_public_key(&params, &peer)?;
                    lsw::decapsulate(&params, &phi, &tag, &peer, &sk)
                }
                Protocol::Dktuts => {
                    let phi = codec::decode_dktuts(&g, &phi).map_err(|_| Failure::Rejected)?;
                    let clock = clock(time.now);
                    dktuts::decapsulate(&params, &phi, &tag, &peer, &sk, clock.as_ref(), freshness(&time))
                }
            }
            .map_err(|_| Failure::Rejected)?;
            emit_key(&g, &k, out_key.as_deref())
        }
        Command::Signcrypt {
            protocol,
            keys,
            input,
            out,
            now,
        } => {
            let (sk, peer) = load_keys(&params, &keys)?;
            let peer = combine_public_key(&params, &peer)?;
            let msg = read(&input)?;
            let sc = signcrypt(&params, protocol, &msg, &sk, &peer, clock(now).as_ref(), rng)?;
            write(&out, &codec::encode_signcrypted(&g, &sc), false)
        }
        Command::Unsigncrypt {
            keys,
            input,
            out,
            time,
        } => {
            let (sk, peer) = load_keys(&params, &keys)?;
            let peer = combine_public_key(&params, &peer)?;
            let sc = codec::decode_signcrypted(&g, &read(&input)?).map_err(|_| Failure::Rejected)?;
            let msg = unsigncrypt(&params, &sc, &peer, &sk, clock(time.now).as_ref(), freshness(&time))
                .map_err(|_| Failure::Rejected)?;
            write(&out, &msg, false)
        }
        Command::Setup { .. } | Command::Bench { .. } | Command::Vectors { .. } => unreachable!("group-free commands"),
    }
}

fn cmd_setup<G: Group>(group: G, out_params: &Path, out_msk: &Path) -> CliResult {
    let mut rng = rng()?;
    let (params, msk) = setup(group, rng.as_mut());
    write(out_params, &codec::encode_params(&params), false)?;
    write(out_msk, &codec::encode_master_key(&params, &msk), true)
}

fn cmd_bench(protocol: Option<Protocol>, table: bool, json: Option<&Path>, iterations: usize) -> CliResult {
    let protocols = match protocol {
        Some(p) => vec![p],
        None => Protocol::ALL.to_vec(),
    };
    let report = cost_report(&protocols);
    if table || json.is_none() {
        print!("{}", report.to_table());
    }
    let timings: Vec<_> = if iterations > 0 {
        protocols.iter().map(|&p| timing_bench(p, iterations)).collect()
    } else {
        Vec::new()
    };
    for t in &timings {
        println!("{} timing over {} runs on P-256:", t.protocol.name(), t.iterations);
        for p in &t.phases {
            println!("  {:<10} median {:>9} ns  p95 {:>9} ns", format!("{:?}", p.phase), p.median_ns, p.p95_ns);
        }
    }
    if let Some(path) = json {
        let doc = serde_json::json!({ "costs": report, "timing": timings });
        write(path, (serde_json::to_string_pretty(&doc).expect("report serializes") + "\n").as_bytes(), false)?;
    }
    if report.all_match() {
        Ok(())
    } else {
        Err(Failure::Usage("measured counts differ from the reference tables".into()))
    }
}

fn cmd_vectors(paths: &[PathBuf]) -> CliResult {
    let mut failed = false;
    for path in paths {
        let text = String::from_utf8(read(path)?).map_err(|_| Failure::Usage(format!("{}: not UTF-8", path.display())))?;
        let file = TestVectorFile::from_json(&text)?;
        let report = vectors::check(&file)?;
        if report.passed() {
            println!("ok   {} ({} values)", report.name, report.checked);
        } else {
            failed = true;
            println!("FAIL {} ({} of {} values differ)", report.name, report.mismatches.len(), report.checked);
            for m in &report.mismatches {
                println!(
                    "     {}: expected {} computed {}",
                    m.name,
                    m.expected.as_deref().unwrap_or("-"),
                    m.computed.as_deref().unwrap_or("-")
                );
            }
        }
    }
    if failed {
        Err(Failure::Usage("vector mismatch".into()))
    } else {
        Ok(())
    }
}

fn load_keys<G: Group>(
    params: &SystemParams<G>,
    keys: &KeyArgs,
) -> CliResult<(clsc_tkem::user_keys::FullPrivateKey<G>, clsc_tkem::user_keys::FullPublicKey<G>)> {
    let sk = codec::decode_private_key(params, &read(&keys.private)?).map_err(|e| match e {
        Error::KeyValidation => Failure::Validation("private key does not verify".into()),
        e => e.into(),
    })?;
    let peer = codec::decode_public_key(&params.group, &read(&keys.peer_pub)?)?;
    Ok((sk, peer))
}

fn emit_key<G: Group>(g: &G, k: &clsc_tkem::hash_suite::SymmetricKey, out: Option<&Path>) -> CliResult {
    match out {
        Some(path) => write(path, &codec::encode_session_key(g, k), true),
        None => {
            println!("{}", hex::encode(k.as_bytes()));
            Ok(())
        }
    }
}

fn clock(now: Option<u64>) -> Box<dyn Clock> {
    match now {
        Some(t) => Box::new(FixedClock(Timestamp(t))),
        None => Box::new(SystemClock),
    }
}

fn freshness(t: &TimeArgs) -> Freshness {
    Freshness { window_secs: t.window }
}

trait CliRng: RngCore + CryptoRng {}
impl<T: RngCore + CryptoRng> CliRng for T {}

fn rng() -> CliResult<Box<dyn CliRng>> {
    match std::env::var(RNG_TAPE_VAR) {
        Ok(tape) => {
            eprintln!("warning: {RNG_TAPE_VAR} is set; randomness comes from a fixed tape");
            let bytes = hex::decode(tape.trim()).map_err(|_| Failure::Usage(format!("{RNG_TAPE_VAR} is not hex")))?;
            Ok(Box::new(TapeRng::new(bytes)))
        }
        Err(_) => Ok(Box::new(OsRng)),
    }
}

fn stub_suite() -> CliResult<Option<HashSuite>> {
    let Ok(path) = std::env::var(STUB_VECTOR_VAR) else {
        return Ok(None);
    };
    eprintln!("warning: {STUB_VECTOR_VAR} is set; hashes come from a stub table");
    let text = String::from_utf8(read(Path::new(&path))?).map_err(|_| Failure::Usage(format!("{path}: not UTF-8")))?;
    let file = TestVectorFile::from_json(&text)?;
    Ok(Some(HashSuite::stubbed(file.stub_table())))
}

fn read(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn write(path: &Path, bytes: &[u8], secret: bool) -> CliResult {
    let mut opts = fs::OpenOptions::new();
    opts.write(true).create(true).truncate(true);
    #[cfg(unix)]
    if secret {
        use std::os::unix::fs::OpenOptionsExt;
        opts.mode(0o600);
    }
    #[cfg(not(unix))]
    let _ = secret;
    let io = |e: std::io::Error| Failure::Usage(format!("{}: {e}", path.display()));
    let mut f = opts.open(path).map_err(io)?;
    f.write_all(bytes).map_err(io)
}
