//! Plain-text tensor format for network checkpoints.
//!
//! ```text
//! mlp-params v1
//! layers <count>
//! layer <in_dim> <out_dim> <activation>      (one line per layer)
//! weights <index> <out_dim> <in_dim>
//! <in_dim values>                            (one line per output row)
//! biases <index> <out_dim>
//! <out_dim values>
//! ```
//!
//! Values use Rust's shortest round-trip float formatting, so a save/load
//! cycle is bit-exact. Blank lines and `#` comments are ignored.

use std::fmt::Write as _;
use std::path::Path;

use super::mlp::{Activation, Dense, LayerSpec, MlpParams};
use crate::error::{Error, Result};

const MAGIC: &str = "mlp-params v1";

pub fn to_text(net: &MlpParams) -> String {
    let mut s = String::new();
    writeln!(s, "{MAGIC}").unwrap();
    writeln!(s, "layers {}", net.layers().len()).unwrap();
    for l in net.layers() {
        writeln!(
            s,
            "layer {} {} {}",
            l.spec.in_dim,
            l.spec.out_dim,
            l.spec.activation.name()
        )
        .unwrap();
    }
    for (i, l) in net.layers().iter().enumerate() {
        writeln!(s, "weights {i} {} {}", l.spec.out_dim, l.spec.in_dim).unwrap();
        for row in l.weights.chunks_exact(l.spec.in_dim) {
            push_row(&mut s, row);
        }
        writeln!(s, "biases {i} {}", l.spec.out_dim).unwrap();
        push_row(&mut s, &l.biases);
    }
    s
}

fn push_row(s: &mut String, row: &[f64]) {
    for (j, v) in row.iter().enumerate() {
        if j > 0 {
            s.push(' ');
        }
        write!(s, "{v:?}").unwrap();
    }
    s.push('\n');
}

fn shape_err(msg: impl Into<String>) -> Error {
    Error::Shape(format!("checkpoint: {}", msg.into()))
}

pub fn from_text(text: &str) -> Result<MlpParams> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let mut next = |what: &str| lines.next().ok_or_else(|| shape_err(format!("missing {what}")));

    if next("header")? != MAGIC {
        return Err(shape_err("unrecognized header"));
    }
    let count: usize = parse_tagged(next("layer count")?, "layers", 1)?[0];
    let mut specs = Vec::with_capacity(count);
    for _ in 0..count {
        let line = next("layer spec")?;
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 4 || parts[0] != "layer" {
            return Err(shape_err(format!("bad layer line `{line}`")));
        }
        let in_dim = parse_usize(parts[1])?;
        let out_dim = parse_usize(parts[2])?;
        let act =
            Activation::from_name(parts[3]).ok_or_else(|| shape_err(format!("unknown activation `{}`", parts[3])))?;
        specs.push(LayerSpec::new(in_dim, out_dim, act));
    }
    let mut layers = Vec::with_capacity(count);
    for (i, spec) in specs.iter().enumerate() {
        let dims = parse_tagged(next("weights header")?, "weights", 3)?;
        if dims != [i, spec.out_dim, spec.in_dim] {
            return Err(shape_err(format!("weights header for layer {i} disagrees with spec")));
        }
        let mut weights = Vec::with_capacity(spec.in_dim * spec.out_dim);
        for _ in 0..spec.out_dim {
            weights.extend(parse_row(next("weight row")?, spec.in_dim)?);
        }
        let dims = parse_tagged(next("biases header")?, "biases", 2)?;
        if dims != [i, spec.out_dim] {
            return Err(shape_err(format!("biases header for layer {i} disagrees with spec")));
        }
        let biases = parse_row(next("bias row")?, spec.out_dim)?;
        layers.push(Dense {
            spec: *spec,
            weights,
            biases,
        });
    }
    MlpParams::from_layers(layers)
}

fn parse_usize(s: &str) -> Result<usize> {
    s.parse().map_err(|_| shape_err(format!("`{s}` is not a dimension")))
}

fn parse_tagged(line: &str, tag: &str, n: usize) -> Result<Vec<usize>> {
    let parts: Vec<&str> = line.split_whitespace().collect();
    if parts.len() != n + 1 || parts[0] != tag {
        return Err(shape_err(format!("expected `{tag}` line, got `{line}`")));
    }
    parts[1..].iter().map(|p| parse_usize(p)).collect()
}

fn parse_row(line: &str, n: usize) -> Result<Vec<f64>> {
    let row: Vec<f64> = line
        .split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| shape_err(format!("`{t}` is not a number")))
        })
        .collect::<Result<_>>()?;
    if row.len() != n {
        return Err(shape_err(format!("row has {} values, expected {n}", row.len())));
    }
    Ok(row)
}

pub fn save(net: &MlpParams, path: &Path) -> Result<()> {
    std::fs::write(path, to_text(net)).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

pub fn load(path: &Path) -> Result<MlpParams> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    from_text(&text)
}
