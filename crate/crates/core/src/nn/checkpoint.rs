//! Network checkpoints.
//!
//! A checkpoint is a JSON document carrying a format tag, the head kind, every layer spec
//! and all parameters in layer order. Floats are written in shortest round-trip form, so a
//! save/load cycle reproduces the network bit for bit.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::mlp::{HeadKind, LayerSpec, Mlp};
use crate::{Error, Result};

const FORMAT: &str = "agripath-mlp";
const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    format: String,
    version: u32,
    head: HeadKind,
    specs: Vec<LayerSpec>,
    network: Mlp,
}

pub fn to_string(net: &Mlp) -> Result<String> {
    let ck = Checkpoint {
        format: FORMAT.to_string(),
        version: VERSION,
        head: net.head(),
        specs: net.specs(),
        network: net.clone(),
    };
    serde_json::to_string(&ck).map_err(|e| Error::Format {
        kind: "checkpoint",
        detail: e.to_string(),
    })
}

pub fn from_str(text: &str) -> Result<Mlp> {
    let bad = |detail: String| Error::Format {
        kind: "checkpoint",
        detail,
    };
    let ck: Checkpoint = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
    if ck.format != FORMAT || ck.version != VERSION {
        return Err(bad(format!("unsupported format {} v{}", ck.format, ck.version)));
    }
    ck.network.validate()?;
    if ck.network.head() != ck.head || ck.network.specs() != ck.specs {
        return Err(bad("header does not match stored network".into()));
    }
    if ck.network.params().iter().any(|p| p.iter().any(|v| !v.is_finite())) {
        return Err(Error::NonFinite("checkpoint parameters"));
    }
    Ok(ck.network)
}

pub fn save(net: &Mlp, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, to_string(net)?).map_err(|e| Error::io(path, e))
}

pub fn load(path: impl AsRef<Path>) -> Result<Mlp> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_str(&text)
}
