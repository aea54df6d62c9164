//! End-to-end runs of the `clsc-tkem` binary.

mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use clsc_tkem::codec;
use clsc_tkem::group::ToyGroup;
use clsc_tkem::kgc::setup_with_master;
use clsc_tkem::vectors::toy;

use common::{load_vector, vector_world};

const BIN: &str = env!("CARGO_BIN_EXE_clsc-tkem");

struct Cli {
    dir: tempfile::TempDir,
    stub: Option<PathBuf>,
}

impl Cli {
    fn new() -> Self {
        Cli {
            dir: tempfile::tempdir().unwrap(),
            stub: None,
        }
    }

    fn with_stub(name: &str) -> Self {
        let mut c = Self::new();
        c.stub = Some(Path::new(env!("CARGO_MANIFEST_DIR")).join("vectors").join(name));
        c
    }

    fn path(&self, name: &str) -> String {
        self.dir.path().join(name).to_str().unwrap().to_string()
    }

    fn read(&self, name: &str) -> Vec<u8> {
        std::fs::read(self.path(name)).unwrap()
    }

    fn write(&self, name: &str, bytes: &[u8]) {
        std::fs::write(self.path(name), bytes).unwrap()
    }

    fn run(&self, tape: Option<&[u8]>, args: &[&str]) -> Output {
        let mut cmd = Command::new(BIN);
        cmd.args(args.iter().map(|a| a.strip_prefix('@').map(|f| self.path(f)).unwrap_or_else(|| a.to_string())));
        cmd.env_remove("CLSC_TKEM_RNG_TAPE").env_remove("CLSC_TKEM_STUB_VECTOR");
        if let Some(t) = tape {
            cmd.env("CLSC_TKEM_RNG_TAPE", hex::encode(t));
        }
        if let Some(s) = &self.stub {
            cmd.env("CLSC_TKEM_STUB_VECTOR", s);
        }
        cmd.output().unwrap()
    }

    fn ok(&self, tape: Option<&[u8]>, args: &[&str]) -> Output {
        let out = self.run(tape, args);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        out
    }

    /// setup, two extractions and two key assemblies with the toy choices.
    fn toy_keys(&self) {
        let w = |v: &[u64]| v.iter().flat_map(|x| x.to_be_bytes()).collect::<Vec<u8>>();
        self.ok(Some(&w(&[toy::X_MSK])), &["setup", "--bits", "4", "--out-params", "@params", "--out-msk", "@msk"]);
        for (id, r, x, who) in [(toy::SENDER, toy::R_A, toy::X_A, "a"), (toy::RECEIVER, toy::R_B, toy::X_B, "b")] {
            let ppk = format!("@{who}.ppk");
            self.ok(Some(&w(&[r])), &["extract", "--msk", "@msk", "--params", "@params", "--id", id, "--out", &ppk]);
            let (sk, pk) = (format!("@{who}.sk"), format!("@{who}.pk"));
            self.ok(Some(&w(&[x])), &["userkeys", "--params", "@params", "--partial", &ppk, "--out-priv", &sk, "--out-pub", &pk]);
        }
        self.write("tag", toy::TAG);
    }
}

fn toy_words(v: &[u64]) -> Vec<u8> {
    v.iter().flat_map(|x| x.to_be_bytes()).collect()
}

#[test]
fn lsw_pipeline_reproduces_toy_vector() {
    let cli = Cli::with_stub("lsw-toy-z13.json");
    cli.toy_keys();
    let vector = load_vector("lsw-toy-z13.json");
    let tape = toy_words(&[toy::LSW_U, toy::LSW_A]);
    let keys = ["--params", "@params", "--priv", "@a.sk", "--peer-pub", "@b.pk"];
    let mut args = vec!["encap", "--protocol", "lsw"];
    args.extend(keys);
    args.extend(["--tag-file", "@tag", "--out", "@phi", "--out-key", "@k.sent"]);
    cli.ok(Some(&tape), &args);
    assert_eq!(hex::encode(cli.read("phi")), vector.expected["phi"]);

    let g = ToyGroup::default();
    let sent = codec::decode_session_key(&g, &cli.read("k.sent")).unwrap();
    assert_eq!(hex::encode(sent.as_bytes()), vector.expected["k"]);
    assert_eq!(sent.as_bytes(), &toy::LSW_K);

    let out = cli.ok(
        None,
        &["decap", "--protocol", "lsw", "--params", "@params", "--priv", "@b.sk", "--peer-pub", "@a.pk", "--in", "@phi", "--tag-file", "@tag"],
    );
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), vector.expected["k"]);

    let mut phi = cli.read("phi");
    *phi.last_mut().unwrap() ^= 1;
    cli.write("phi.bad", &phi);
    let out = cli.run(
        None,
        &["decap", "--protocol", "lsw", "--params", "@params", "--priv", "@b.sk", "--peer-pub", "@a.pk", "--in", "@phi.bad", "--tag-file", "@tag"],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn dktuts_pipeline_reproduces_toy_vector() {
    let cli = Cli::with_stub("dktuts-toy-z13.json");
    cli.toy_keys();
    let vector = load_vector("dktuts-toy-z13.json");
    let mut tape = toy::DKTUTS_K.to_vec();
    tape.extend(toy_words(&[toy::DKTUTS_X, toy::DKTUTS_A]));
    let now = toy::DKTUTS_TS.to_string();
    cli.ok(
        Some(&tape),
        &[
            "encap", "--protocol", "dktuts", "--params", "@params", "--priv", "@a.sk", "--peer-pub", "@b.pk", "--tag-file", "@tag", "--out", "@phi", "--now", &now,
        ],
    );
    assert_eq!(hex::encode(cli.read("phi")), vector.expected["phi"]);

    let decap = |now: &str, input: &str| {
        cli.run(
            None,
            &[
                "decap", "--protocol", "dktuts", "--params", "@params", "--priv", "@b.sk", "--peer-pub", "@a.pk", "--in", input, "--tag-file", "@tag", "--now", now,
                "--out-key", "@k.recv",
            ],
        )
    };
    assert!(decap(&now, "@phi").status.success());
    let got = codec::decode_session_key(&ToyGroup::default(), &cli.read("k.recv")).unwrap();
    assert_eq!(got.as_bytes(), &toy::DKTUTS_K);

    let late = (toy::DKTUTS_TS + 121).to_string();
    assert_eq!(decap(&late, "@phi").status.code(), Some(2));
    let edge = (toy::DKTUTS_TS + 120).to_string();
    assert!(decap(&edge, "@phi").status.success());

    let mut phi = cli.read("phi");
    let n = phi.len();
    phi[n - 20] ^= 1;
    cli.write("phi.bad", &phi);
    assert_eq!(decap(&now, "@phi.bad").status.code(), Some(2));
}

#[test]
fn cli_files_equal_library_encodings() {
    let cli = Cli::with_stub("lsw-toy-z13.json");
    cli.toy_keys();
    let vector = load_vector("lsw-toy-z13.json");
    let w = vector_world(&vector);
    let g = ToyGroup::default();
    let (params, msk) = setup_with_master(g, g.scalar(toy::X_MSK)).unwrap();
    assert_eq!(cli.read("params"), codec::encode_params(&params));
    assert_eq!(cli.read("msk"), codec::encode_master_key(&params, &msk));
    assert_eq!(cli.read("a.sk"), codec::encode_private_key(&g, &w.alice));
    assert_eq!(cli.read("b.sk"), codec::encode_private_key(&g, &w.bob));
    assert_eq!(cli.read("a.pk"), codec::encode_public_key(&g, w.alice.public()));
    assert_eq!(cli.read("b.pk"), codec::encode_public_key(&g, w.bob.public()));
}

#[cfg(unix)]
#[test]
fn secret_files_are_owner_only() {
    use std::os::unix::fs::PermissionsExt;
    let cli = Cli::with_stub("lsw-toy-z13.json");
    cli.toy_keys();
    for f in ["msk", "a.ppk", "a.sk"] {
        let mode = std::fs::metadata(cli.path(f)).unwrap().permissions().mode();
        assert_eq!(mode & 0o077, 0, "{f} has mode {mode:o}");
    }
}

#[test]
fn tampered_partial_key_exits_3() {
    let cli = Cli::with_stub("lsw-toy-z13.json");
    cli.toy_keys();
    let mut ppk = cli.read("a.ppk");
    *ppk.last_mut().unwrap() ^= 1;
    cli.write("a.ppk.bad", &ppk);
    let out = cli.run(
        Some(&toy_words(&[toy::X_A])),
        &["userkeys", "--params", "@params", "--partial", "@a.ppk.bad", "--out-priv", "@x.sk", "--out-pub", "@x.pk"],
    );
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn usage_and_role_errors_exit_1() {
    let cli = Cli::with_stub("lsw-toy-z13.json");
    cli.toy_keys();
    assert_eq!(cli.run(None, &["encap"]).status.code(), Some(1));
    assert_eq!(cli.run(None, &["setup", "--bits", "64", "--out-params", "@p", "--out-msk", "@m"]).status.code(), Some(1));
    // A master key passed where a private key belongs.
    let out = cli.run(
        None,
        &["encap", "--protocol", "lsw", "--params", "@params", "--priv", "@msk", "--peer-pub", "@b.pk", "--tag-file", "@tag", "--out", "@phi"],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(cli.run(None, &["--help"]).status.success());
}

#[test]
fn signcrypt_round_trip_on_p256() {
    let cli = Cli::new();
    cli.ok(None, &["setup", "--out-params", "@params", "--out-msk", "@msk"]);
    for (id, who) in [("drone-17", "a"), ("smart-meter-4", "b")] {
        let ppk = format!("@{who}.ppk");
        cli.ok(None, &["extract", "--msk", "@msk", "--params", "@params", "--id", id, "--out", &ppk]);
        cli.ok(
            None,
            &["userkeys", "--params", "@params", "--partial", &ppk, "--out-priv", &format!("@{who}.sk"), "--out-pub", &format!("@{who}.pk")],
        );
    }
    let msg = b"telemetry frame 0042".repeat(50);
    cli.write("msg", &msg);
    for protocol in ["lsw", "dktuts"] {
        cli.ok(
            None,
            &["signcrypt", "--protocol", protocol, "--params", "@params", "--priv", "@a.sk", "--peer-pub", "@b.pk", "--in", "@msg", "--out", "@sc"],
        );
        let open = |input: &str| {
            cli.run(
                None,
                &["unsigncrypt", "--params", "@params", "--priv", "@b.sk", "--peer-pub", "@a.pk", "--in", input, "--out", "@msg.out"],
            )
        };
        assert!(open("@sc").status.success());
        assert_eq!(cli.read("msg.out"), msg);
        let mut sc = cli.read("sc");
        let n = sc.len();
        sc[n - 1] ^= 0x80;
        cli.write("sc.bad", &sc);
        assert_eq!(open("@sc.bad").status.code(), Some(2), "{protocol}");
    }
}

#[test]
fn vectors_check_exit_codes() {
    let cli = Cli::new();
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("vectors");
    let good = dir.join("lsw-toy-z13.json");
    assert!(cli.ok(None, &["vectors", "--check", good.to_str().unwrap()]).status.success());

    let mut v = load_vector("lsw-toy-z13.json");
    v.expected.insert("s".into(), "0000000000000005".into());
    cli.write("bad.json", v.to_json().as_bytes());
    let out = cli.run(None, &["vectors", "--check", "@bad.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("s: expected 0000000000000005 computed 0000000000000006"));
}

#[test]
fn bench_reports_matching_rows() {
    let cli = Cli::new();
    let out = cli.ok(None, &["bench", "--table", "--json", "@report.json"]);
    let table = String::from_utf8(out.stdout).unwrap();
    assert_eq!(table.matches("match").count(), 4);
    assert!(!table.contains("MISMATCH"));
    let report: serde_json::Value = serde_json::from_slice(&cli.read("report.json")).unwrap();
    assert_eq!(report["costs"]["rows"].as_array().unwrap().len(), 4);
}
