//! Helpers shared by the CLI integration and acceptance suites.

// Each integration-test binary compiles its own copy of this module and
// none of them uses every helper.
#![allow(dead_code)]

use std::io::{Read, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ecg_core::fixtures::write_record_files;
use ecg_core::synth::{fixture_config, generate, SynthConfig, SYNTH_GAIN};

/// The compiled CLI binary under test.
pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ecg-cli"))
}

/// The small checked-in fixture records (30 s / 30 s / 300 s).
pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../ecg-core/tests/fixtures")
}

/// Runs the binary, panicking only on spawn failure (callers inspect the
/// status themselves).
pub fn run(command: &mut Command) -> Output {
    command.output().expect("binary runs")
}

/// stdout as UTF-8.
pub fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("stdout is UTF-8")
}

/// stderr as UTF-8.
pub fn stderr(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).expect("stderr is UTF-8")
}

/// Writes one synthetic record into `dir` as `.hea`/`.dat`/`.atr` files.
pub fn write_synth_record(dir: &Path, name: &str, config: &SynthConfig) {
    let record = generate(config);
    write_record_files(
        dir,
        name,
        config.sampling_rate,
        &record.channels,
        &["MLII", "V1"],
        &record.annotations,
    )
    .expect("fixture record writes");
    // Sanity: the generator quantizes with the gain the header declares.
    assert_eq!(SYNTH_GAIN, 200.0);
}

/// Writes the named full-length synthetic stand-ins (`100`, `208`, `106`)
/// plus any extra configs into `dir`.
pub fn write_corpus(dir: &Path, extra: &[(&str, SynthConfig)]) {
    for name in ["100", "208", "106"] {
        let config = fixture_config(name).expect("known fixture identity");
        write_synth_record(dir, name, &config);
    }
    for (name, config) in extra {
        write_synth_record(dir, name, config);
    }
}

/// Serves the fixture record files over HTTP on a fresh local port,
/// returning the base URL.  The server thread lives until the test process
/// exits; each request is answered with `Connection: close`.
pub fn spawn_fixture_server(dir: PathBuf) -> String {
    let listener = TcpListener::bind("127.0.0.1:0").expect("bind test server");
    let base = format!("http://{}/files/", listener.local_addr().unwrap());
    std::thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { continue };
            let dir = dir.clone();
            std::thread::spawn(move || {
                let mut buffer = [0u8; 4096];
                let mut head = Vec::new();
                // Read until the end of the request head.
                loop {
                    match stream.read(&mut buffer) {
                        Ok(0) | Err(_) => break,
                        Ok(n) => {
                            head.extend_from_slice(&buffer[..n]);
                            if head.windows(4).any(|w| w == b"\r\n\r\n") {
                                break;
                            }
                        }
                    }
                }
                let request = String::from_utf8_lossy(&head);
                let path = request.split_whitespace().nth(1).unwrap_or("/");
                let file = path.rsplit('/').next().unwrap_or("");
                let response = match std::fs::read(dir.join(file)) {
                    Ok(body) => {
                        let mut r = format!(
                            "HTTP/1.1 200 OK\r\nContent-Length: {}\r\nConnection: close\r\n\r\n",
                            body.len()
                        )
                        .into_bytes();
                        r.extend_from_slice(&body);
                        r
                    }
                    Err(_) => b"HTTP/1.1 404 Not Found\r\nContent-Length: 0\r\nConnection: close\r\n\r\n"
                        .to_vec(),
                };
                let _ = stream.write_all(&response);
            });
        }
    });
    base
}
