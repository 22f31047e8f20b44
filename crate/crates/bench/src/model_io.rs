//! Plain-text model files.
//!
//! ```text
//! twinsvm-model 1
//! kind wsocp-twsvm
//! kernel rbf 1.0000000000000000e0
//! dim 2
//! scaler-mean <d values>
//! scaler-scale <d values>
//! weights <d1> <d2> <n_pos> <n_neg_after>
//! plane1 <bias> <norm> <coefficients>
//! plane2 <bias> <norm> <coefficients>
//! reference <rows>
//! <one line per reference row>
//! ```
//!
//! Floats are written with 17 significant digits so a reload predicts
//! exactly like the original. The scaler and weights lines are optional.

use std::fmt::Write as _;

use twinsvm_core::classifiers::Representation;
use twinsvm_core::weighting::BiasWeights;
use twinsvm_core::{Kernel, Matrix, ModelKind, Plane, Standardizer, TrainInfo, TwinModel};

use crate::error::ParseError;

pub const MAGIC: &str = "twinsvm-model";
pub const VERSION: u32 = 1;

/// A trained model plus the standardization its inputs need.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub model: TwinModel,
    pub scaler: Option<Standardizer>,
}

impl ModelFile {
    /// Predicts on raw rows, standardizing first when a scaler is stored.
    pub fn predict(&self, x: &[f64]) -> twinsvm_core::Result<(twinsvm_core::Label, f64)> {
        match &self.scaler {
            Some(s) if s.dim() == x.len() => {
                let mut row = x.to_vec();
                s.transform_row_in_place(&mut row);
                twinsvm_core::predict(&self.model, &row)
            }
            _ => twinsvm_core::predict(&self.model, x),
        }
    }
}

fn push_floats(out: &mut String, values: &[f64]) {
    for v in values {
        write!(out, " {v:.16e}").unwrap();
    }
}

pub fn kind_from_name(name: &str) -> Option<ModelKind> {
    [ModelKind::Twsvm, ModelKind::Socp, ModelKind::Wsocp]
        .into_iter()
        .find(|k| k.name() == name)
}

pub fn write_model(file: &ModelFile) -> String {
    let m = &file.model;
    let mut out = format!("{MAGIC} {VERSION}\nkind {}\n", m.kind.name());
    match &m.representation {
        Representation::Linear => out.push_str("kernel linear\n"),
        Representation::Kernel {
            kernel: Kernel::Linear, ..
        } => out.push_str("kernel dot\n"),
        Representation::Kernel {
            kernel: Kernel::Rbf { gamma },
            ..
        } => writeln!(out, "kernel rbf {gamma:.16e}").unwrap(),
    }
    writeln!(out, "dim {}", m.dim()).unwrap();
    if let Some(s) = &file.scaler {
        out.push_str("scaler-mean");
        push_floats(&mut out, s.mean());
        out.push_str("\nscaler-scale");
        push_floats(&mut out, s.scale());
        out.push('\n');
    }
    if let Some(w) = &m.weights {
        writeln!(out, "weights {:.16e} {:.16e} {} {}", w.d1, w.d2, w.n_pos, w.n_neg_after).unwrap();
    }
    for (i, p) in m.planes.iter().enumerate() {
        write!(out, "plane{}", i + 1).unwrap();
        push_floats(&mut out, &[p.bias, p.norm]);
        push_floats(&mut out, &p.coef);
        out.push('\n');
    }
    if let Representation::Kernel { reference, .. } = &m.representation {
        writeln!(out, "reference {}", reference.rows()).unwrap();
        for row in reference.iter_rows() {
            push_floats(&mut out, row);
            out.push('\n');
        }
    }
    out
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Option<(&'a str, Vec<&'a str>)> {
        for (i, l) in self.inner.by_ref() {
            let mut words = l.split_whitespace();
            if let Some(key) = words.next() {
                self.line = i + 1;
                return Some((key, words.collect()));
            }
        }
        None
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError::new(self.line, msg)
    }

    fn floats(&self, words: &[&str]) -> Result<Vec<f64>, ParseError> {
        words
            .iter()
            .map(|w| w.parse().map_err(|_| self.err(format!("cannot parse `{w}` as a number"))))
            .collect()
    }
}

pub fn read_model(text: &str) -> Result<ModelFile, ParseError> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        line: 1,
    };
    match lines.next() {
        Some((MAGIC, v)) if v == [VERSION.to_string().as_str()] => {}
        Some((MAGIC, v)) => return Err(lines.err(format!("unsupported version {}", v.join(" ")))),
        _ => return Err(lines.err("not a twinsvm model file")),
    }
    let (mut kind, mut kernel, mut dim) = (None, None, None);
    let (mut mean, mut scale, mut weights) = (None, None, None);
    let mut planes: [Option<Plane>; 2] = [None, None];
    let mut reference = None;
    while let Some((key, words)) = lines.next() {
        match key {
            "kind" => {
                let name = words.first().copied().unwrap_or("");
                kind = Some(kind_from_name(name).ok_or_else(|| lines.err(format!("unknown kind `{name}`")))?);
            }
            "kernel" => {
                kernel = Some(match words.as_slice() {
                    ["linear"] => None,
                    ["dot"] => Some(Kernel::Linear),
                    ["rbf", g] => Some(Kernel::Rbf {
                        gamma: lines.floats(&[g])?[0],
                    }),
                    _ => return Err(lines.err("expected `kernel linear`, `kernel dot` or `kernel rbf <gamma>`")),
                })
            }
            "dim" => {
                dim = Some(
                    words
                        .first()
                        .and_then(|w| w.parse::<usize>().ok())
                        .ok_or_else(|| lines.err("bad dim"))?,
                )
            }
            "scaler-mean" => mean = Some(lines.floats(&words)?),
            "scaler-scale" => scale = Some(lines.floats(&words)?),
            "weights" => {
                let [d1, d2, p, n] = words.as_slice() else {
                    return Err(lines.err("weights needs 4 fields"));
                };
                let counts = (p.parse(), n.parse());
                let (Ok(n_pos), Ok(n_neg_after)) = counts else {
                    return Err(lines.err("bad weight counts"));
                };
                let d = lines.floats(&[d1, d2])?;
                weights = Some(BiasWeights {
                    d1: d[0],
                    d2: d[1],
                    n_pos,
                    n_neg_after,
                });
            }
            "plane1" | "plane2" => {
                let v = lines.floats(&words)?;
                if v.len() < 3 {
                    return Err(lines.err("a plane needs bias, norm and coefficients"));
                }
                let slot = usize::from(key == "plane2");
                planes[slot] = Some(Plane {
                    bias: v[0],
                    norm: v[1],
                    coef: v[2..].to_vec(),
                });
            }
            "reference" => {
                let rows: usize = words
                    .first()
                    .and_then(|w| w.parse().ok())
                    .ok_or_else(|| lines.err("bad reference row count"))?;
                let mut data = Vec::new();
                for _ in 0..rows {
                    let (first, rest) = lines.next().ok_or_else(|| lines.err("truncated reference matrix"))?;
                    let mut row = lines.floats(&[first])?;
                    row.extend(lines.floats(&rest)?);
                    data.push(row);
                }
                reference = Some(Matrix::from_rows(&data).map_err(|e| lines.err(e.to_string()))?);
            }
            other => return Err(lines.err(format!("unknown record `{other}`"))),
        }
    }

    let kind = kind.ok_or_else(|| lines.err("missing `kind`"))?;
    let kernel = kernel.ok_or_else(|| lines.err("missing `kernel`"))?;
    let dim = dim.ok_or_else(|| lines.err("missing `dim`"))?;
    let [Some(p1), Some(p2)] = planes else {
        return Err(lines.err("missing plane"));
    };
    let representation = match kernel {
        None => Representation::Linear,
        Some(kernel) => {
            let reference = reference.ok_or_else(|| lines.err("kernel model without reference rows"))?;
            Representation::Kernel { kernel, reference }
        }
    };
    let model = TwinModel {
        kind,
        representation,
        planes: [p1, p2],
        weights,
        mask: None,
        info: TrainInfo {
            converged: true,
            ..TrainInfo::default()
        },
    };
    let coef_len = match &model.representation {
        Representation::Linear => dim,
        Representation::Kernel { reference, .. } => {
            if reference.cols() != dim {
                return Err(lines.err(format!("reference rows have {} columns, dim is {dim}", reference.cols())));
            }
            reference.rows()
        }
    };
    if model.planes.iter().any(|p| p.coef.len() != coef_len) {
        return Err(lines.err(format!("plane length does not match {coef_len}")));
    }
    let scaler = match (mean, scale) {
        (Some(m), Some(s)) if m.len() == dim => Some(Standardizer::from_parts(m, s).map_err(|e| lines.err(e.to_string()))?),
        (None, None) => None,
        _ => return Err(lines.err("scaler needs both mean and scale of length dim")),
    };
    Ok(ModelFile { model, scaler })
}
