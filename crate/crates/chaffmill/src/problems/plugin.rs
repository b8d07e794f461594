//! Subprocess plug-in protocol: newline-delimited JSON over stdin/stdout.
//!
//! Request:  `{"id": n, "function": "f", "args": [v, ...]}`
//! Response: `{"id": n, "result": v}` or `{"id": n, "error": "reason"}`
//!
//! Values encode as: numbers `{"num": "p/q"}`, strings, booleans, lists as
//! arrays, records `{"ctor": "Name", "fields": [v, ...]}`.
//!
//! Each plug-in process handles one request at a time; requests and
//! responses correlate by id. A call that exceeds its deadline kills the
//! process; the next call respawns it. Failures surface as [`EvalError`]s
//! and become error verdicts upstream, never pipeline aborts.

use super::{EvalError, PluginSpec};
use crate::lang::Value;
use serde_json::json;
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::time::{Duration, Instant};

/// Wire encoding of a [`Value`]; identical to the file encoding.
pub fn value_to_wire(v: &Value) -> serde_json::Value {
    crate::lang::value_to_json(v)
}

/// Decodes the wire encoding; also accepts bare JSON integers for numbers.
pub fn value_from_wire(v: &serde_json::Value) -> Result<Value, String> {
    crate::lang::value_from_json(v)
}

struct LiveProcess {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<Option<String>>,
    next_id: u64,
}

/// One plug-in implementation's subprocess, spawned lazily.
pub struct PluginHandle {
    spec: PluginSpec,
    live: Option<LiveProcess>,
}

impl PluginHandle {
    pub fn new(spec: PluginSpec) -> PluginHandle {
        PluginHandle { spec, live: None }
    }

    fn spawn(&mut self) -> Result<(), EvalError> {
        if self.live.is_some() {
            return Ok(());
        }
        if self.spec.cmd.is_empty() {
            return Err(EvalError::Plugin("empty plugin command".to_string()));
        }
        let mut child = Command::new(&self.spec.cmd[0])
            .args(&self.spec.cmd[1..])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| EvalError::Plugin(format!("spawn {:?}: {}", self.spec.cmd[0], e)))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        std::thread::spawn(move || {
            let reader = BufReader::new(stdout);
            for line in reader.lines() {
                match line {
                    Ok(l) => {
                        if tx.send(Some(l)).is_err() {
                            return;
                        }
                    }
                    Err(_) => break,
                }
            }
            let _ = tx.send(None);
        });
        self.live = Some(LiveProcess {
            child,
            stdin,
            lines: rx,
            next_id: 1,
        });
        Ok(())
    }

    fn kill(&mut self) {
        if let Some(mut live) = self.live.take() {
            let _ = live.child.kill();
            let _ = live.child.wait();
        }
    }

    /// One request/response round trip with the configured deadline.
    pub fn call(&mut self, function: &str, args: &[Value]) -> Result<Value, EvalError> {
        self.spawn()?;
        let timeout = Duration::from_millis(self.spec.timeout_ms);
        let live = self.live.as_mut().expect("spawned above");
        let id = live.next_id;
        live.next_id += 1;
        let request = json!({
            "id": id,
            "function": function,
            "args": args.iter().map(value_to_wire).collect::<Vec<_>>(),
        });
        let sent = writeln!(live.stdin, "{}", request).and_then(|_| live.stdin.flush());
        if let Err(e) = sent {
            self.kill();
            return Err(EvalError::Plugin(format!("write request: {}", e)));
        }
        let deadline = Instant::now() + timeout;
        let line = match live.lines.recv_timeout(deadline.saturating_duration_since(Instant::now())) {
            Ok(Some(line)) => line,
            Ok(None) => {
                self.kill();
                return Err(EvalError::Plugin("plugin closed its stdout".to_string()));
            }
            Err(RecvTimeoutError::Timeout) => {
                self.kill();
                return Err(EvalError::Timeout(self.spec.timeout_ms));
            }
            Err(RecvTimeoutError::Disconnected) => {
                self.kill();
                return Err(EvalError::Plugin("plugin exited".to_string()));
            }
        };
        let response: serde_json::Value = match serde_json::from_str(&line) {
            Ok(v) => v,
            Err(e) => {
                self.kill();
                return Err(EvalError::Plugin(format!("malformed response: {}", e)));
            }
        };
        let got_id = response.get("id").and_then(|v| v.as_u64());
        if got_id != Some(id) {
            self.kill();
            return Err(EvalError::Plugin(format!(
                "response id {:?} does not match request id {}",
                got_id, id
            )));
        }
        if let Some(err) = response.get("error") {
            let msg = err.as_str().unwrap_or("unspecified").to_string();
            return Err(EvalError::Plugin(msg));
        }
        match response.get("result") {
            Some(result) => value_from_wire(result).map_err(EvalError::Plugin),
            None => {
                self.kill();
                Err(EvalError::Plugin("response carries neither result nor error".to_string()))
            }
        }
    }
}

impl Drop for PluginHandle {
    fn drop(&mut self) {
        self.kill();
    }
}

/// One-shot convenience: spawn, call once, tear down.
pub fn plugin_call(
    spec: &PluginSpec,
    function: &str,
    args: &[Value],
) -> Result<Value, EvalError> {
    let mut handle = PluginHandle::new(spec.clone());
    handle.call(function, args)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wire_round_trip() {
        let v = Value::List(vec![
            Value::ratio(-5, 3),
            Value::text("a\"b"),
            Value::Boolean(true),
            Value::Record {
                ctor: "node".to_string(),
                fields: vec![Value::int(1)],
            },
        ]);
        let wire = value_to_wire(&v);
        assert_eq!(value_from_wire(&wire).unwrap(), v);
    }

    #[test]
    fn wire_accepts_bare_integers() {
        let v = value_from_wire(&serde_json::json!([1, 2])).unwrap();
        assert_eq!(v, Value::list(vec![Value::int(1), Value::int(2)]));
    }

    #[test]
    fn missing_command_is_a_plugin_error() {
        let spec = PluginSpec {
            cmd: vec!["/nonexistent/plugin".to_string()],
            timeout_ms: 200,
        };
        assert!(matches!(
            plugin_call(&spec, "f", &[]),
            Err(EvalError::Plugin(_))
        ));
    }
}
