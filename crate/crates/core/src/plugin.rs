//! Line-oriented subprocess plugins.
//!
//! A plugin is any executable that reads a request on standard input and
//! writes its answer on standard output, then exits with status 0. One child
//! is spawned per call; nothing is shared between calls.
//!
//! Imputation request:
//!
//! ```text
//! IMPUTE <N> <period|0>
//! <value or NA>      (N lines)
//! ```
//!
//! The reply is N lines, each a finite decimal real.
//!
//! Metric request:
//!
//! ```text
//! METRIC <n>
//! <truth> <imputed>  (n lines)
//! ```
//!
//! The reply is exactly one finite real.

use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::{Child, Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::series::GappedSeries;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

/// Marker written for a withheld value.
pub const MISSING_TOKEN: &str = "NA";

const POLL_INTERVAL: Duration = Duration::from_millis(2);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PluginCommand {
    pub program: PathBuf,
    pub args: Vec<String>,
    pub timeout: Duration,
}

impl PluginCommand {
    pub fn new(program: impl Into<PathBuf>, args: Vec<String>) -> Self {
        Self {
            program: program.into(),
            args,
            timeout: DEFAULT_TIMEOUT,
        }
    }

    /// Splits a command line on whitespace: the first word is the program.
    pub fn parse(command_line: &str) -> Result<Self> {
        let mut words = command_line.split_whitespace();
        let program = words
            .next()
            .ok_or_else(|| Error::Config("empty plugin command".into()))?;
        Ok(Self::new(program, words.map(str::to_string).collect()))
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    /// Runs the child with `input` on stdin and returns its stdout.
    pub fn run(&self, input: String) -> Result<String> {
        let mut child = Command::new(&self.program)
            .args(&self.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| {
                Error::Plugin(format!("failed to spawn `{}`: {e}", self.program.display()))
            })?;

        let mut stdin = child.stdin.take().expect("stdin is piped");
        // A child that exits without reading its input produces a broken pipe,
        // which is not an error on our side.
        let writer = thread::spawn(move || {
            let _ = stdin.write_all(input.as_bytes());
        });
        let stdout = spawn_reader(child.stdout.take().expect("stdout is piped"));
        let stderr = spawn_reader(child.stderr.take().expect("stderr is piped"));

        let status = wait_with_deadline(&mut child, self.timeout);
        let _ = writer.join();
        let status = match status {
            Some(status) => status,
            None => {
                return Err(Error::Plugin(format!(
                    "`{}` timed out after {:.1} s",
                    self.program.display(),
                    self.timeout.as_secs_f64()
                )))
            }
        };
        let out = stdout.join().unwrap_or_default();
        let err = stderr.join().unwrap_or_default();
        if !status.success() {
            let err = String::from_utf8_lossy(&err);
            return Err(Error::Plugin(format!(
                "`{}` exited with {status}: {}",
                self.program.display(),
                err.trim()
            )));
        }
        String::from_utf8(out).map_err(|_| {
            Error::Plugin(format!(
                "`{}` wrote non-UTF-8 output",
                self.program.display()
            ))
        })
    }
}

fn spawn_reader<R: Read + Send + 'static>(mut source: R) -> thread::JoinHandle<Vec<u8>> {
    thread::spawn(move || {
        let mut buf = Vec::new();
        let _ = source.read_to_end(&mut buf);
        buf
    })
}

fn wait_with_deadline(child: &mut Child, timeout: Duration) -> Option<std::process::ExitStatus> {
    let deadline = Instant::now() + timeout;
    loop {
        match child.try_wait() {
            Ok(Some(status)) => return Some(status),
            Ok(None) if Instant::now() < deadline => thread::sleep(POLL_INTERVAL),
            _ => {
                let _ = child.kill();
                let _ = child.wait();
                return None;
            }
        }
    }
}

pub fn encode_impute_request(g: &GappedSeries) -> String {
    let mut out = String::with_capacity(g.len() * 12 + 24);
    let _ = writeln!(out, "IMPUTE {} {}", g.len(), g.period().unwrap_or(0));
    for v in g.values() {
        match v {
            Some(x) => {
                let _ = writeln!(out, "{x}");
            }
            None => {
                out.push_str(MISSING_TOKEN);
                out.push('\n');
            }
        }
    }
    out
}

pub fn encode_metric_request(truth: &[f64], imputed: &[f64]) -> String {
    let mut out = String::with_capacity(truth.len() * 24 + 16);
    let _ = writeln!(out, "METRIC {}", truth.len());
    for (t, i) in truth.iter().zip(imputed) {
        let _ = writeln!(out, "{t} {i}");
    }
    out
}

fn parse_finite(token: &str, line: usize) -> Result<f64> {
    let x: f64 = token
        .parse()
        .map_err(|_| Error::Plugin(format!("line {line}: `{token}` is not a number")))?;
    if !x.is_finite() {
        return Err(Error::Plugin(format!(
            "line {line}: `{token}` is not finite"
        )));
    }
    Ok(x)
}

/// Parses an imputation reply of exactly `expected` lines. A single trailing
/// newline is accepted; blank lines elsewhere are not.
pub fn decode_impute_reply(reply: &str, expected: usize) -> Result<Vec<f64>> {
    let body = reply.strip_suffix('\n').unwrap_or(reply);
    let body = body.strip_suffix('\r').unwrap_or(body);
    let lines: Vec<&str> = if body.is_empty() {
        Vec::new()
    } else {
        body.split('\n').collect()
    };
    if lines.len() != expected {
        return Err(Error::Plugin(format!(
            "expected {expected} output lines, got {}",
            lines.len()
        )));
    }
    lines
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let token = l.trim();
            if token == MISSING_TOKEN {
                return Err(Error::Plugin(format!(
                    "line {}: missing marker in output",
                    i + 1
                )));
            }
            parse_finite(token, i + 1)
        })
        .collect()
}

/// Parses a metric reply: exactly one finite real.
pub fn decode_metric_reply(reply: &str) -> Result<f64> {
    let tokens: Vec<&str> = reply.split_whitespace().collect();
    match tokens.as_slice() {
        [one] => parse_finite(one, 1),
        _ => Err(Error::Plugin(format!(
            "expected exactly one number, got {} tokens",
            tokens.len()
        ))),
    }
}
