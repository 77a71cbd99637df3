//! Plain-text policy checkpoints.
//!
//! ```text
//! floorsyntax-policy v1
//! config dim=32 emb_dim=16 cond_dim=102 max_rooms=8 init_scale=0.01
//! tensor w_x 32 32
//! <32 lines of 32 values>
//! tensor w_t 32 16
//! ...
//! tensor w_c 32 102
//! ...
//! tensor b 32 1
//! ...
//! ```
//!
//! Values use Rust's shortest round-trip float formatting, so a save/load
//! cycle is bit-exact.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use thiserror::Error;

use crate::generator::policy::{Policy, PolicyConfig};

pub const CHECKPOINT_HEADER: &str = "floorsyntax-policy v1";

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
}

fn tensor_shapes(c: &PolicyConfig) -> [(&'static str, usize, usize); 4] {
    [
        ("w_x", c.dim, c.dim),
        ("w_t", c.dim, c.emb_dim),
        ("w_c", c.dim, c.cond_dim),
        ("b", c.dim, 1),
    ]
}

pub fn save_policy<W: Write>(pol: &Policy, mut w: W) -> std::io::Result<()> {
    let c = &pol.config;
    writeln!(w, "{CHECKPOINT_HEADER}")?;
    let rooms = c.max_rooms.map_or("none".to_string(), |m| m.to_string());
    writeln!(
        w,
        "config dim={} emb_dim={} cond_dim={} max_rooms={} init_scale={}",
        c.dim, c.emb_dim, c.cond_dim, rooms, c.init_scale
    )?;
    let mut off = 0;
    for (name, rows, cols) in tensor_shapes(c) {
        writeln!(w, "tensor {name} {rows} {cols}")?;
        for r in 0..rows {
            let row: Vec<String> = pol.params[off + r * cols..off + (r + 1) * cols]
                .iter()
                .map(|v| v.to_string())
                .collect();
            writeln!(w, "{}", row.join(" "))?;
        }
        off += rows * cols;
    }
    Ok(())
}

pub fn load_policy<R: BufRead>(r: R) -> Result<Policy, CheckpointError> {
    let mut lines = r.lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut next = || -> Result<(usize, String), CheckpointError> {
        match lines.next() {
            Some((i, Ok(l))) => Ok((i, l)),
            Some((_, Err(e))) => Err(e.into()),
            None => Err(CheckpointError::Format {
                line: 0,
                message: "unexpected end of file".into(),
            }),
        }
    };
    let fail = |line: usize, m: String| CheckpointError::Format { line, message: m };

    let (n, head) = next()?;
    if head.trim() != CHECKPOINT_HEADER {
        return Err(fail(n, format!("expected header {CHECKPOINT_HEADER:?}")));
    }
    let (n, cfg_line) = next()?;
    let mut fields = BTreeMap::new();
    let mut parts = cfg_line.split_whitespace();
    if parts.next() != Some("config") {
        return Err(fail(n, "expected config line".into()));
    }
    for p in parts {
        let (k, v) = p.split_once('=').ok_or_else(|| fail(n, format!("bad field {p:?}")))?;
        fields.insert(k.to_string(), v.to_string());
    }
    let get = |k: &str| fields.get(k).ok_or_else(|| fail(n, format!("missing {k}")));
    let num = |k: &str| -> Result<usize, CheckpointError> { get(k)?.parse().map_err(|_| fail(n, format!("bad {k}"))) };
    let config = PolicyConfig {
        dim: num("dim")?,
        emb_dim: num("emb_dim")?,
        cond_dim: num("cond_dim")?,
        max_rooms: match get("max_rooms")?.as_str() {
            "none" => None,
            v => Some(v.parse().map_err(|_| fail(n, "bad max_rooms".into()))?),
        },
        init_scale: get("init_scale")?
            .parse()
            .map_err(|_| fail(n, "bad init_scale".into()))?,
    };
    config.validate().map_err(|e| fail(n, e.to_string()))?;

    let mut params = Vec::with_capacity(config.param_count());
    for (name, rows, cols) in tensor_shapes(&config) {
        let (n, head) = next()?;
        let expect = format!("tensor {name} {rows} {cols}");
        if head.trim() != expect {
            return Err(fail(n, format!("expected {expect:?}, found {head:?}")));
        }
        for _ in 0..rows {
            let (n, row) = next()?;
            let vals: Result<Vec<f64>, _> = row.split_whitespace().map(str::parse::<f64>).collect();
            let vals = vals.map_err(|_| fail(n, "bad number".into()))?;
            if vals.len() != cols {
                return Err(fail(n, format!("expected {cols} values, found {}", vals.len())));
            }
            params.extend(vals);
        }
    }
    Ok(Policy { config, params })
}
