use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Real;

/// Symmetric kernel samples `K(s_i, s_j)` with their nodes and provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelMatrix<T> {
    nodes: Vec<T>,
    values: Matrix<T>,
    /// Viscosity, or `None` for the asymptotic kernel.
    pub eps: Option<T>,
    /// Quadrature description used for assembly.
    pub quad: String,
}

/// Cell midpoints `(i + 1/2)/m` of `(0, 1)`.
pub fn midpoint_nodes<T: Real>(m: usize) -> Vec<T> {
    let mf = T::from_usize_lossy(m);
    (0..m).map(|i| (T::from_usize_lossy(i) + T::lit(0.5)) / mf).collect()
}

impl<T: Real> KernelMatrix<T> {
    /// Evaluates `f` once per unordered node pair and mirrors, so the result is
    /// exactly symmetric. Rows are computed in parallel; each entry is written
    /// by exactly one task, so the output does not depend on scheduling.
    pub fn from_symmetric_fn(nodes: Vec<T>, eps: Option<T>, quad: String, f: impl Fn(T, T) -> T + Sync) -> Result<Self> {
        let m = nodes.len();
        let upper: Vec<Vec<T>> = (0..m).into_par_iter().map(|i| (i..m).map(|j| f(nodes[i], nodes[j])).collect()).collect();
        let mut values = Matrix::zeros(m, m);
        for (i, row) in upper.iter().enumerate() {
            for (off, &v) in row.iter().enumerate() {
                values[(i, i + off)] = v;
                values[(i + off, i)] = v;
            }
        }
        if !values.all_finite() {
            return Err(Error::invalid("kernel", "non-finite kernel entry"));
        }
        Ok(Self { nodes, values, eps, quad })
    }

    pub fn from_parts(nodes: Vec<T>, values: Matrix<T>, eps: Option<T>, quad: String) -> Result<Self> {
        if values.rows() != nodes.len() || values.cols() != nodes.len() {
            return Err(Error::DimensionMismatch { expected: nodes.len(), found: values.rows() });
        }
        if values.asymmetry() != T::zero() {
            return Err(Error::invalid("values", "kernel matrix must be exactly symmetric"));
        }
        Ok(Self { nodes, values, eps, quad })
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn values(&self) -> &Matrix<T> {
        &self.values
    }

    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[(i, j)]
    }

    /// Entrywise `self - c * other` on matching nodes.
    pub fn minus_scaled(&self, c: T, other: &Self) -> Result<Self> {
        if self.nodes != other.nodes {
            return Err(Error::DimensionMismatch { expected: self.size(), found: other.size() });
        }
        let values = self.values.sub(&other.values.scaled(c))?;
        Ok(Self { nodes: self.nodes.clone(), values, eps: self.eps, quad: self.quad.clone() })
    }

    pub fn scaled(&self, c: T) -> Self {
        Self { nodes: self.nodes.clone(), values: self.values.scaled(c), eps: self.eps, quad: self.quad.clone() }
    }

    pub fn frobenius_norm(&self) -> T {
        self.values.frobenius_norm()
    }

    /// Header line, node line, then one line per row.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let eps = match self.eps {
            Some(e) => format!("{e}"),
            None => "asymptotic".to_string(),
        };
        let _ = writeln!(out, "M={},eps={},quad={}", self.size(), eps, self.quad);
        let join = |row: &mut dyn Iterator<Item = T>| row.map(|v| format!("{v}")).collect::<Vec<_>>().join(",");
        let _ = writeln!(out, "{}", join(&mut self.nodes.iter().copied()));
        for i in 0..self.size() {
            let _ = writeln!(out, "{}", join(&mut self.values.row(i).iter().copied()));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty file".into()))?;
        let (mut m, mut eps, mut quad) = (None, None, None);
        // quad may itself contain commas, so split on the first two keys only.
        let mut rest = header;
        while !rest.is_empty() {
            let (field, tail) = if rest.starts_with("quad=") {
                (rest, "")
            } else {
                match rest.split_once(',') {
                    Some((f, t)) => (f, t),
                    None => (rest, ""),
                }
            };
            let (k, v) = field.split_once('=').ok_or_else(|| Error::Parse(format!("bad header field `{field}`")))?;
            match k.trim() {
                "M" => m = Some(v.trim().parse::<usize>().map_err(|e| Error::Parse(format!("M: {e}")))?),
                "eps" => {
                    eps = Some(if v.trim() == "asymptotic" {
                        None
                    } else {
                        Some(parse_scalar::<T>(v)?)
                    })
                }
                "quad" => quad = Some(v.to_string()),
                other => return Err(Error::Parse(format!("unknown header key `{other}`"))),
            }
            rest = tail;
        }
        let m = m.ok_or_else(|| Error::Parse("missing M".into()))?;
        let eps = eps.ok_or_else(|| Error::Parse("missing eps".into()))?;
        let quad = quad.ok_or_else(|| Error::Parse("missing quad".into()))?;
        let parse_row = |line: Option<&str>, what: &str| -> Result<Vec<T>> {
            let line = line.ok_or_else(|| Error::Parse(format!("missing {what}")))?;
            let row = line.split(',').map(parse_scalar::<T>).collect::<Result<Vec<T>>>()?;
            if row.len() != m {
                return Err(Error::Parse(format!("{what}: expected {m} values, found {}", row.len())));
            }
            Ok(row)
        };
        let nodes = parse_row(lines.next(), "node line")?;
        let mut data = Vec::with_capacity(m * m);
        for i in 0..m {
            data.extend(parse_row(lines.next(), &format!("row {i}"))?);
        }
        if lines.next().is_some() {
            return Err(Error::Parse("trailing data after last row".into()));
        }
        Self::from_parts(nodes, Matrix::from_rows(m, m, data)?, eps, quad)
    }
}

fn parse_scalar<T: Real>(s: &str) -> Result<T> {
    let v: f64 = s.trim().parse().map_err(|e| Error::Parse(format!("`{s}`: {e}")))?;
    T::from_f64(v).ok_or_else(|| Error::Parse(format!("`{s}` not representable")))
}
