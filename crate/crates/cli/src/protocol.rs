//! Serve-mode wire protocol.
//!
//! Every message is a frame: a 4-byte big-endian length followed by that many
//! bytes. A request is one frame holding a JSON object:
//!
//! ```json
//! {"id": 7, "op": "render", "params": {"b": 0.4, "r": 0.6}}
//! ```
//!
//! `op` is one of `render`, `cycle`, `stability`, `ping`. `params` uses the
//! run-configuration keys (defaults: 400×400, seeded ops from seed 0, render
//! and cycle from (0.7, 0.6)). `stability` may carry
//! `{"trials", "dilation", "threshold"}`.
//!
//! A response is one frame holding a JSON envelope with `"ok": true|false`.
//! When the envelope has a `payload` object (`width`, `height`, `format`,
//! `length`), exactly one more frame follows with the raw row-major `gray8`
//! pixels.

use std::io::{self, Read, Write};

use coupled_core::io::config::RunConfigPatch;
use coupled_core::StabilitySettings;
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Frames above this size are refused.
pub const MAX_FRAME: usize = 64 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Op {
    Render,
    Cycle,
    Stability,
    Ping,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Request {
    #[serde(default)]
    pub id: Value,
    pub op: Op,
    #[serde(default)]
    pub params: RunConfigPatch,
    #[serde(default)]
    pub stability: Option<StabilitySettings>,
}

/// Raw pixel buffer description carried in the envelope.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Payload {
    pub width: usize,
    pub height: usize,
    pub format: PixelFormat,
    pub length: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PixelFormat {
    Gray8,
}

/// A decoded response: envelope plus optional pixel buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct Response {
    pub envelope: Value,
    pub payload: Option<Vec<u8>>,
}

pub fn write_frame<W: Write>(w: &mut W, body: &[u8]) -> io::Result<()> {
    let len = u32::try_from(body.len()).map_err(|_| io::Error::new(io::ErrorKind::InvalidInput, "frame too large"))?;
    w.write_all(&len.to_be_bytes())?;
    w.write_all(body)
}

/// `Ok(None)` on a clean end of stream before the length prefix.
pub fn read_frame<R: Read>(r: &mut R) -> io::Result<Option<Vec<u8>>> {
    let mut len = [0u8; 4];
    let mut got = 0;
    while got < 4 {
        match r.read(&mut len[got..])? {
            0 if got == 0 => return Ok(None),
            0 => return Err(io::ErrorKind::UnexpectedEof.into()),
            n => got += n,
        }
    }
    let len = u32::from_be_bytes(len) as usize;
    if len > MAX_FRAME {
        return Err(io::Error::new(
            io::ErrorKind::InvalidData,
            format!("frame of {len} bytes exceeds limit"),
        ));
    }
    let mut body = vec![0; len];
    r.read_exact(&mut body)?;
    Ok(Some(body))
}

/// Client side: send one request object.
pub fn send_request<W: Write>(w: &mut W, request: &Value) -> io::Result<()> {
    write_frame(w, &serde_json::to_vec(request).expect("json value serializes"))?;
    w.flush()
}

/// Client side: read one response (envelope and payload frame if announced).
pub fn read_response<R: Read>(r: &mut R) -> io::Result<Option<Response>> {
    let Some(head) = read_frame(r)? else {
        return Ok(None);
    };
    let envelope: Value =
        serde_json::from_slice(&head).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
    let payload = if envelope.get("payload").is_some_and(|p| !p.is_null()) {
        Some(read_frame(r)?.ok_or(io::ErrorKind::UnexpectedEof)?)
    } else {
        None
    };
    Ok(Some(Response { envelope, payload }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frames_round_trip() {
        let mut buf = Vec::new();
        write_frame(&mut buf, b"hello").unwrap();
        write_frame(&mut buf, b"").unwrap();
        assert_eq!(&buf[..4], &[0, 0, 0, 5]);
        let mut r = &buf[..];
        assert_eq!(read_frame(&mut r).unwrap().unwrap(), b"hello");
        assert_eq!(read_frame(&mut r).unwrap().unwrap(), b"");
        assert!(read_frame(&mut r).unwrap().is_none());
    }

    #[test]
    fn truncated_frame_is_an_error() {
        let mut r: &[u8] = &[0, 0, 0, 9, b'x'];
        assert!(read_frame(&mut r).is_err());
        let mut r: &[u8] = &[0, 0];
        assert!(read_frame(&mut r).is_err());
        let mut r: &[u8] = &[0xff, 0xff, 0xff, 0xff];
        assert!(read_frame(&mut r).is_err());
    }

    #[test]
    fn request_parsing_is_strict() {
        let ok: Request = serde_json::from_str(r#"{"op": "ping"}"#).unwrap();
        assert_eq!(ok.op, Op::Ping);
        assert!(serde_json::from_str::<Request>(r#"{"op": "ping", "extra": 1}"#).is_err());
        assert!(serde_json::from_str::<Request>(r#"{"op": "render", "params": {"bb": 1}}"#).is_err());
        assert!(serde_json::from_str::<Request>(r#"{"op": "explode"}"#).is_err());
    }
}
