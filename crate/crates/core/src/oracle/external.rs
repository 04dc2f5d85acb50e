//! Model served by a child process over newline-delimited JSON.
//!
//! For each input the parent writes `{"id":k,"x":[...]}` to the child's
//! stdin and waits for `{"id":k,"y":[...]}` on its stdout. Only one request
//! is in flight at a time. Any protocol failure kills the child; the next
//! query starts a fresh one.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{check_batch, Oracle};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExternalConfig {
    pub command: Vec<String>,
    #[serde(default = "default_timeout")]
    pub timeout_secs: f64,
    pub inputs: usize,
    pub classes: usize,
}

fn default_timeout() -> f64 {
    10.0
}

#[derive(Serialize)]
struct Request<'a> {
    id: u64,
    x: &'a [f64],
}

#[derive(Deserialize)]
struct Response {
    id: u64,
    y: Vec<f64>,
}

struct Session {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
    next_id: u64,
}

impl Session {
    fn spawn(command: &[String]) -> Result<Self> {
        let (program, args) = command
            .split_first()
            .ok_or_else(|| Error::InvalidConfig("external oracle command is empty".into()))?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| Error::OracleProtocol(format!("cannot launch `{program}`: {e}")))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, lines) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(Session { child, stdin, lines, next_id: 0 })
    }

    fn query(&mut self, x: &[f64], classes: usize, timeout: Duration) -> Result<Vec<f64>> {
        let id = self.next_id;
        self.next_id += 1;
        let mut line = serde_json::to_string(&Request { id, x })?;
        line.push('\n');
        self.stdin
            .write_all(line.as_bytes())
            .and_then(|()| self.stdin.flush())
            .map_err(|e| Error::OracleProtocol(format!("cannot write request {id}: {e}")))?;
        let reply = match self.lines.recv_timeout(timeout) {
            Ok(Ok(reply)) => reply,
            Ok(Err(e)) => return Err(Error::OracleProtocol(format!("read failed: {e}"))),
            Err(RecvTimeoutError::Timeout) => return Err(Error::OracleTimeout(timeout.as_secs_f64())),
            Err(RecvTimeoutError::Disconnected) => {
                return Err(Error::OracleProtocol(format!("oracle closed its output before answering request {id}")))
            }
        };
        let response: Response = serde_json::from_str(&reply)
            .map_err(|e| Error::OracleProtocol(format!("malformed response `{reply}`: {e}")))?;
        if response.id != id {
            return Err(Error::OracleProtocol(format!("expected response id {id}, got {}", response.id)));
        }
        if response.y.len() != classes {
            return Err(Error::OracleProtocol(format!(
                "response {id} has {} outputs, expected {classes}",
                response.y.len()
            )));
        }
        if response.y.iter().any(|v| !v.is_finite()) {
            return Err(Error::OracleProtocol(format!("response {id} contains non-finite values")));
        }
        Ok(response.y)
    }
}

impl Drop for Session {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

pub struct ExternalOracle {
    config: ExternalConfig,
    session: Mutex<Option<Session>>,
}

impl ExternalOracle {
    pub fn new(config: ExternalConfig) -> Result<Self> {
        if config.command.is_empty() {
            return Err(Error::InvalidConfig("external oracle command is empty".into()));
        }
        if config.inputs == 0 || config.classes == 0 {
            return Err(Error::InvalidConfig("external oracle needs non-zero inputs and classes".into()));
        }
        if !(config.timeout_secs > 0.0) {
            return Err(Error::InvalidConfig("external oracle timeout must be positive".into()));
        }
        Ok(ExternalOracle { config, session: Mutex::new(None) })
    }

    pub fn query_external(&self, batch: &[&[f64]]) -> Result<Vec<Vec<f64>>> {
        check_batch(batch, self.config.inputs)?;
        let timeout = Duration::from_secs_f64(self.config.timeout_secs);
        let mut guard = self.session.lock().unwrap_or_else(|p| p.into_inner());
        let mut out = Vec::with_capacity(batch.len());
        for x in batch {
            if guard.is_none() {
                *guard = Some(Session::spawn(&self.config.command)?);
            }
            let session = guard.as_mut().expect("session started");
            match session.query(x, self.config.classes, timeout) {
                Ok(y) => out.push(y),
                Err(e) => {
                    *guard = None;
                    return Err(e);
                }
            }
        }
        Ok(out)
    }
}

impl Oracle for ExternalOracle {
    fn input_dim(&self) -> usize {
        self.config.inputs
    }

    fn output_dim(&self) -> usize {
        self.config.classes
    }

    fn predict(&self, batch: &[&[f64]]) -> Result<Vec<Vec<f64>>> {
        self.query_external(batch)
    }
}
