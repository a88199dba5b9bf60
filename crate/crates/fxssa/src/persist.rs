//! Plain-text serialization of fitted nonlinear filters.
//!
//! ```text
//! fxssa-filter 1
//! kind mlp
//! activation tanh
//! sizes 2 4 1
//! weights 0 <outputs × inputs values, row-major>
//! biases 0 <outputs values>
//! ...
//! ```
//!
//! Polynomial filters store `degree`, then per coordinate a `coord` line with
//! shift, scale, ridge flag and `degree + 1` coefficients. Floats use the
//! shortest representation that parses back to the same bits.

use std::fmt::Write as _;

use fxssa_core::nonlinear::{Activation, Dense, MlpNetwork, NonlinearFilter, PolyFilter};
use thiserror::Error;

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "fxssa-filter";

#[derive(Debug, Error, PartialEq)]
pub enum PersistError {
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("unsupported format version {0}")]
    Version(u32),
    #[error("invalid filter: {0}")]
    Invalid(String),
}

pub fn activation_name(a: Activation) -> &'static str {
    match a {
        Activation::Tanh => "tanh",
        Activation::Sigmoid => "sigmoid",
        Activation::Identity => "identity",
    }
}

pub fn parse_activation(s: &str) -> Option<Activation> {
    match s {
        "tanh" => Some(Activation::Tanh),
        "sigmoid" => Some(Activation::Sigmoid),
        "identity" => Some(Activation::Identity),
        _ => None,
    }
}

fn join(values: &[f64]) -> String {
    let mut out = String::new();
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        write!(out, "{v}").unwrap();
    }
    out
}

pub fn write_filter(filter: &NonlinearFilter) -> String {
    let mut out = format!("{MAGIC} {FORMAT_VERSION}\n");
    match filter {
        NonlinearFilter::Mlp(net) => {
            out.push_str("kind mlp\n");
            writeln!(out, "activation {}", activation_name(net.activation)).unwrap();
            let sizes: Vec<String> = net.sizes().iter().map(usize::to_string).collect();
            writeln!(out, "sizes {}", sizes.join(" ")).unwrap();
            for (i, layer) in net.layers.iter().enumerate() {
                writeln!(out, "weights {i} {}", join(&layer.weights)).unwrap();
                writeln!(out, "biases {i} {}", join(&layer.biases)).unwrap();
            }
        }
        NonlinearFilter::Poly(p) => {
            out.push_str("kind poly\n");
            writeln!(out, "degree {}", p.degree).unwrap();
            writeln!(out, "dim {}", p.dim()).unwrap();
            for j in 0..p.dim() {
                writeln!(
                    out,
                    "coord {} {} {} {}",
                    p.shift[j],
                    p.scale[j],
                    u8::from(p.ridged[j]),
                    join(&p.coeffs[j])
                )
                .unwrap();
            }
        }
    }
    out
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn err(&self, reason: impl Into<String>) -> PersistError {
        PersistError::Syntax {
            line: self.line,
            reason: reason.into(),
        }
    }

    /// Next non-empty line split into its keyword and remaining fields.
    fn expect(&mut self, keyword: &str) -> Result<Vec<&'a str>, PersistError> {
        loop {
            let Some((i, text)) = self.inner.next() else {
                self.line += 1;
                return Err(self.err(format!("missing `{keyword}`")));
            };
            self.line = i + 1;
            let mut parts = text.split_whitespace();
            match parts.next() {
                None => continue,
                Some(k) if k == keyword => return Ok(parts.collect()),
                Some(k) => return Err(self.err(format!("expected `{keyword}`, found `{k}`"))),
            }
        }
    }

    fn numbers<T: std::str::FromStr>(&self, fields: &[&str]) -> Result<Vec<T>, PersistError> {
        fields
            .iter()
            .map(|f| f.parse().map_err(|_| self.err(format!("bad number `{f}`"))))
            .collect()
    }

    fn single<T: std::str::FromStr>(&mut self, keyword: &str) -> Result<T, PersistError> {
        let fields = self.expect(keyword)?;
        let mut values = self.numbers(&fields)?;
        if values.len() != 1 {
            return Err(self.err(format!("`{keyword}` takes one value")));
        }
        Ok(values.remove(0))
    }
}

pub fn read_filter(text: &str) -> Result<NonlinearFilter, PersistError> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        line: 0,
    };
    let version: u32 = lines.single(MAGIC)?;
    if version != FORMAT_VERSION {
        return Err(PersistError::Version(version));
    }
    let kind = lines.expect("kind")?;
    match kind.as_slice() {
        ["mlp"] => {
            let act = lines.expect("activation")?;
            let activation = act
                .first()
                .and_then(|a| parse_activation(a))
                .ok_or_else(|| lines.err("unknown activation"))?;
            let sizes_fields = lines.expect("sizes")?;
            let sizes: Vec<usize> = lines.numbers(&sizes_fields)?;
            if sizes.len() < 2 {
                return Err(lines.err("need at least two layer sizes"));
            }
            let mut layers = Vec::with_capacity(sizes.len() - 1);
            for (i, w) in sizes.windows(2).enumerate() {
                let mut read = |keyword: &str, count: usize| -> Result<Vec<f64>, PersistError> {
                    let fields = lines.expect(keyword)?;
                    if fields.first().and_then(|f| f.parse::<usize>().ok()) != Some(i) {
                        return Err(lines.err(format!("expected `{keyword} {i}`")));
                    }
                    let values: Vec<f64> = lines.numbers(&fields[1..])?;
                    if values.len() != count {
                        return Err(lines.err(format!("expected {count} values, found {}", values.len())));
                    }
                    Ok(values)
                };
                let weights = read("weights", w[0] * w[1])?;
                let biases = read("biases", w[1])?;
                layers.push(Dense {
                    inputs: w[0],
                    outputs: w[1],
                    weights,
                    biases,
                });
            }
            MlpNetwork::from_layers(layers, activation)
                .map(NonlinearFilter::Mlp)
                .map_err(|e| PersistError::Invalid(e.to_string()))
        }
        ["poly"] => {
            let degree: usize = lines.single("degree")?;
            let dim: usize = lines.single("dim")?;
            let mut p = PolyFilter {
                degree,
                shift: Vec::with_capacity(dim),
                scale: Vec::with_capacity(dim),
                coeffs: Vec::with_capacity(dim),
                ridged: Vec::with_capacity(dim),
            };
            for _ in 0..dim {
                let fields = lines.expect("coord")?;
                if fields.len() != degree + 4 {
                    return Err(lines.err(format!("expected {} values", degree + 4)));
                }
                let nums: Vec<f64> = lines.numbers(&fields)?;
                p.shift.push(nums[0]);
                p.scale.push(nums[1]);
                p.ridged.push(match fields[2] {
                    "0" => false,
                    "1" => true,
                    _ => return Err(lines.err("ridge flag must be 0 or 1")),
                });
                p.coeffs.push(nums[3..].to_vec());
            }
            if p.scale.iter().any(|s| !(*s > 0.0)) {
                return Err(PersistError::Invalid("scale must be positive".into()));
            }
            Ok(NonlinearFilter::Poly(p))
        }
        _ => Err(lines.err("kind must be `mlp` or `poly`")),
    }
}
