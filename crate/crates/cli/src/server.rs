//! Serve mode: answers protocol requests over stdin/stdout or local TCP.

use std::collections::HashMap;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::{Arc, Mutex};

use coupled_core::io::config::RunConfigDocument;
use coupled_core::{render_run, Error, StabilitySettings};
use serde_json::{json, Value};

use crate::args::{seeded_defaults, still_defaults};
use crate::commands::{cycle_report, stability_report};
use crate::protocol::{read_frame, write_frame, Op, Payload, PixelFormat, Request};

const CACHE_LIMIT: usize = 64;

/// Everything a response carries except the request id.
#[derive(Debug)]
struct Answer {
    body: Value,
    payload: Option<Vec<u8>>,
}

/// Request handler with a result cache keyed by the fully resolved request.
#[derive(Debug, Default)]
pub struct Engine {
    cache: Mutex<HashMap<String, Arc<Answer>>>,
}

/// One response ready to be framed.
#[derive(Debug, Clone, PartialEq)]
pub struct Reply {
    pub envelope: Value,
    pub payload: Option<Vec<u8>>,
}

impl Engine {
    pub fn new() -> Self {
        Self::default()
    }

    /// Handles one request frame. Never fails: problems become error
    /// envelopes.
    pub fn handle(&self, frame: &[u8]) -> Reply {
        let request: Request = match serde_json::from_slice(frame) {
            Ok(r) => r,
            Err(e) => {
                let id = serde_json::from_slice::<Value>(frame)
                    .ok()
                    .and_then(|v| v.get("id").cloned())
                    .unwrap_or(Value::Null);
                return error_reply(id, "request", &e.to_string(), &[]);
            }
        };
        let id = request.id.clone();
        if request.op == Op::Ping {
            return Reply {
                envelope: json!({"id": id, "ok": true, "op": "ping"}),
                payload: None,
            };
        }

        let base = match request.op {
            Op::Stability => server_size(seeded_defaults()),
            _ => server_size(still_defaults()),
        };
        let doc = match base.apply(&request.params) {
            Ok(d) => d,
            Err(e) => return engine_error(id, &e),
        };
        let checks = request.stability.unwrap_or_default();
        let key = cache_key(request.op, &doc, &checks);

        let cached = self.cache.lock().expect("cache lock").get(&key).cloned();
        let answer = match cached {
            Some(a) => a,
            None => match compute(request.op, &doc, &checks) {
                Ok(a) => {
                    let a = Arc::new(a);
                    let mut cache = self.cache.lock().expect("cache lock");
                    if cache.len() >= CACHE_LIMIT {
                        cache.clear();
                    }
                    cache.insert(key, a.clone());
                    a
                }
                Err(e) => return engine_error(id, &e),
            },
        };

        let mut envelope = answer.body.clone();
        envelope["id"] = id;
        Reply {
            envelope,
            payload: answer.payload.clone(),
        }
    }

    /// Serves requests from `reader` until end of stream.
    pub fn serve_stream<R: Read, W: Write>(&self, reader: R, writer: W) -> io::Result<()> {
        let mut reader = BufReader::new(reader);
        let mut writer = BufWriter::new(writer);
        loop {
            let frame = match read_frame(&mut reader) {
                Ok(Some(f)) => f,
                Ok(None) => return Ok(()),
                Err(e) if e.kind() == io::ErrorKind::InvalidData => {
                    // oversized frame: the stream cannot be resynchronised
                    write_reply(&mut writer, &error_reply(Value::Null, "frame", &e.to_string(), &[]))?;
                    writer.flush()?;
                    return Ok(());
                }
                Err(e) => return Err(e),
            };
            write_reply(&mut writer, &self.handle(&frame))?;
            writer.flush()?;
        }
    }

    /// Accepts connections forever, one thread per connection.
    pub fn serve_tcp(self: Arc<Self>, listener: TcpListener) -> io::Result<()> {
        for stream in listener.incoming() {
            let stream: TcpStream = stream?;
            let engine = self.clone();
            std::thread::spawn(move || {
                if let Ok(read_half) = stream.try_clone() {
                    let _ = engine.serve_stream(read_half, stream);
                }
            });
        }
        Ok(())
    }
}

fn server_size(doc: RunConfigDocument) -> RunConfigDocument {
    RunConfigDocument {
        width: coupled_core::raster::EXPLORER_SIZE,
        height: coupled_core::raster::EXPLORER_SIZE,
        ..doc
    }
}

fn cache_key(op: Op, doc: &RunConfigDocument, checks: &StabilitySettings) -> String {
    let checks = if op == Op::Stability {
        serde_json::to_string(checks).expect("settings serialize")
    } else {
        String::new()
    };
    format!("{op:?}|{}|{checks}", doc.to_json_line())
}

fn compute(op: Op, doc: &RunConfigDocument, checks: &StabilitySettings) -> Result<Answer, Error> {
    let params = serde_json::to_value(doc.to_patch()).expect("patch serializes");
    match op {
        Op::Render => {
            let out = render_run(doc, |_, _| {})?;
            let payload = Payload {
                width: out.image.width,
                height: out.image.height,
                format: PixelFormat::Gray8,
                length: out.image.pixels.len(),
            };
            Ok(Answer {
                body: json!({
                    "ok": true,
                    "op": "render",
                    "params": params,
                    "initial": out.initial,
                    "cycle": out.cycle,
                    "total_count": out.raster.total(),
                    "max_count": out.raster.max_count(),
                    "payload": payload,
                }),
                payload: Some(out.image.pixels),
            })
        }
        Op::Cycle => {
            let (initial, cycle) = cycle_report(doc)?;
            Ok(Answer {
                body: json!({"ok": true, "op": "cycle", "params": params, "initial": initial, "cycle": cycle}),
                payload: None,
            })
        }
        Op::Stability => {
            let report = stability_report(doc, checks)?;
            Ok(Answer {
                body: json!({"ok": true, "op": "stability", "params": params, "report": report}),
                payload: None,
            })
        }
        Op::Ping => unreachable!("ping is answered before dispatch"),
    }
}

fn engine_error(id: Value, e: &Error) -> Reply {
    let violations: Vec<String> = e.violations().iter().map(|v| v.to_string()).collect();
    let kind = if violations.is_empty() { "engine" } else { "config" };
    error_reply(id, kind, &e.to_string(), &violations)
}

fn error_reply(id: Value, kind: &str, message: &str, violations: &[String]) -> Reply {
    Reply {
        envelope: json!({
            "id": id,
            "ok": false,
            "error": {"kind": kind, "message": message, "violations": violations},
        }),
        payload: None,
    }
}

fn write_reply<W: Write>(w: &mut W, reply: &Reply) -> io::Result<()> {
    write_frame(w, &serde_json::to_vec(&reply.envelope).expect("envelope serializes"))?;
    if let Some(p) = &reply.payload {
        write_frame(w, p)?;
    }
    Ok(())
}
