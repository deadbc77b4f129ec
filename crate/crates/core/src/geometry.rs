//! Hyperplane units, maxout classifiers and redundancy detection.
//!
//! A classifier here is `f(x) = max_i (w_i·x + b_i)`; the region
//! `{x : f(x) <= 0}` is the intersection of the units' halfspaces. Redundancy
//! is decided leave-one-out: unit k is removable iff the intersection of the
//! remaining halfspaces already lies inside halfspace k.

use std::collections::BTreeSet;
use std::io::{BufRead, Write};
use std::path::Path;

use log::warn;

use crate::error::{Error, Result};
use crate::linalg::{dot, norm};
use crate::lp::{self, LpOutcome};

/// Default tolerance for all geometric predicates in this module.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Weight norms below this are treated as a zero (degenerate) weight vector.
pub(crate) const ZERO_W_TOL: f64 = 1e-12;

/// One linear unit `x -> w·x + b`; doubles as the hyperplane `w·x + b = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineUnit {
    pub w: Vec<f64>,
    pub b: f64,
}

impl AffineUnit {
    pub fn new(w: Vec<f64>, b: f64) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::InvalidParameter("unit dimension must be >= 1".into()));
        }
        if !b.is_finite() || w.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "affine unit".into(),
            });
        }
        Ok(AffineUnit { w, b })
    }

    pub fn dim(&self) -> usize {
        self.w.len()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        dot(&self.w, x) + self.b
    }

    /// A unit with `w = 0` has no proper hyperplane: its level set is empty
    /// or all of space.
    pub fn is_degenerate(&self) -> bool {
        norm(&self.w) <= ZERO_W_TOL
    }

    /// Canonical form `(w/|w|, b/|w|)` with the first nonzero weight
    /// component positive, so that a hyperplane and its negation compare
    /// equal. `None` for degenerate units.
    pub(crate) fn canonical(&self) -> Option<(Vec<f64>, f64)> {
        let n = norm(&self.w);
        if n <= ZERO_W_TOL {
            return None;
        }
        let mut w: Vec<f64> = self.w.iter().map(|v| v / n).collect();
        let mut b = self.b / n;
        let lead = w.iter().find(|v| v.abs() > ZERO_W_TOL);
        if matches!(lead, Some(v) if *v < 0.0) {
            for v in &mut w {
                *v = -*v;
            }
            b = -b;
        }
        Some((w, b))
    }
}

/// Ternary sign classification of `f(x)` against a tolerance band.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignClass {
    Negative,
    Boundary,
    Positive,
}

/// Convex PWL classifier `f(x) = max_i(w_i·x + b_i)`.
#[derive(Debug, Clone)]
pub struct MaxoutClassifier {
    units: Vec<AffineUnit>,
    dim: usize,
}

/// What `redundant_units` found.
#[derive(Debug, Clone, PartialEq)]
pub struct RedundancyReport {
    /// Indices whose removal (all together) leaves `{x : f(x) <= 0}` unchanged.
    pub redundant: BTreeSet<usize>,
    /// A `w = 0` unit with positive bias makes `f` everywhere positive, so the
    /// region is empty; reported instead of attempting further reduction.
    pub empty_region: bool,
}

impl MaxoutClassifier {
    pub fn new(units: Vec<AffineUnit>) -> Result<Self> {
        let Some(first) = units.first() else {
            return Err(Error::InvalidParameter(
                "a maxout classifier needs at least one unit".into(),
            ));
        };
        let dim = first.dim();
        for u in &units {
            if u.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: u.dim(),
                });
            }
        }
        Ok(MaxoutClassifier { units, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn units(&self) -> &[AffineUnit] {
        &self.units
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    /// `f(x)` together with the achieving unit index (lowest index on ties).
    pub fn eval(&self, x: &[f64]) -> Result<(f64, usize)> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "input point".into(),
            });
        }
        let mut best = f64::NEG_INFINITY;
        let mut arg = 0;
        for (i, u) in self.units.iter().enumerate() {
            let v = u.eval(x);
            if v > best {
                best = v;
                arg = i;
            }
        }
        Ok((best, arg))
    }

    /// Classify `f(x)` against the band `[-tau, tau]`.
    pub fn boundary_sign_probe(&self, x: &[f64], tau: f64) -> Result<SignClass> {
        if !(tau > 0.0) {
            return Err(Error::InvalidParameter("tolerance must be positive".into()));
        }
        let (v, _) = self.eval(x)?;
        Ok(if v > tau {
            SignClass::Positive
        } else if v < -tau {
            SignClass::Negative
        } else {
            SignClass::Boundary
        })
    }

    /// Leave-one-out redundancy. Unit k is redundant iff
    /// `sup { w_k·x + b_k : w_j·x + b_j <= 0 for kept j != k } <= 0`;
    /// an unbounded supremum keeps the unit. Duplicates (canonical forms equal
    /// within 1e-9) keep the lowest index. Removal is greedy from the highest
    /// index down, which makes the reported set safe to remove in one go and
    /// the operation idempotent.
    pub fn redundant_units(&self, tol: f64) -> Result<RedundancyReport> {
        let m = self.units.len();
        if m < 2 {
            return Err(Error::InvalidParameter(
                "redundancy needs at least two units".into(),
            ));
        }
        let mut redundant = BTreeSet::new();

        for u in &self.units {
            if u.is_degenerate() && u.b > 0.0 {
                return Ok(RedundancyReport {
                    redundant,
                    empty_region: true,
                });
            }
        }

        // kept = candidate survivors, in ascending index order
        let mut kept: Vec<usize> = Vec::new();
        let mut canon: Vec<Option<(Vec<f64>, f64)>> = Vec::new();
        for (i, u) in self.units.iter().enumerate() {
            if u.is_degenerate() {
                // w = 0, b <= 0: satisfied everywhere, drop (m >= 2 guaranteed)
                redundant.insert(i);
                continue;
            }
            let c = u.canonical().expect("non-degenerate unit");
            let dup = kept.iter().find(|&&j| {
                let (cw, cb) = canon[j].as_ref().unwrap();
                cb_close(cw, *cb, &c.0, c.1)
            });
            if let Some(&j) = dup {
                if self.units[i] != self.units[j] {
                    warn!("units {j} and {i} are near-duplicates; keeping {j}");
                }
                redundant.insert(i);
                canon.push(None);
            } else {
                canon.push(Some(c));
                kept.push(i);
            }
        }

        // Greedy leave-one-out sweep, highest index first.
        let mut active: BTreeSet<usize> = kept.iter().copied().collect();
        for &k in kept.iter().rev() {
            if active.len() < 2 {
                break;
            }
            let constraints: Vec<(Vec<f64>, f64)> = active
                .iter()
                .filter(|&&j| j != k)
                .map(|&j| (self.units[j].w.clone(), -self.units[j].b))
                .collect();
            let outcome = lp::maximize(&self.units[k].w, &constraints, tol)?;
            let sup = match outcome {
                LpOutcome::Optimal { value, .. } => value + self.units[k].b,
                LpOutcome::Unbounded => f64::INFINITY,
                LpOutcome::Infeasible => f64::NEG_INFINITY,
            };
            if sup <= tol {
                redundant.insert(k);
                active.remove(&k);
            }
        }

        Ok(RedundancyReport {
            redundant,
            empty_region: false,
        })
    }

    /// Copy of the classifier without the given unit indices.
    pub fn without_units(&self, drop: &BTreeSet<usize>) -> Result<MaxoutClassifier> {
        let units: Vec<AffineUnit> = self
            .units
            .iter()
            .enumerate()
            .filter(|(i, _)| !drop.contains(i))
            .map(|(_, u)| u.clone())
            .collect();
        MaxoutClassifier::new(units)
    }

    /// Parse from CSV text: one row per unit, d weight columns then the bias;
    /// `#` lines are comments.
    pub fn from_csv_reader<R: BufRead>(reader: R) -> Result<MaxoutClassifier> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(reader);
        let mut units = Vec::new();
        let mut width = None;
        for rec in rdr.records() {
            let rec = rec.map_err(csv_error)?;
            let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
            if rec.iter().all(|f| f.is_empty()) {
                continue;
            }
            let vals: Vec<f64> = rec
                .iter()
                .map(|f| {
                    f.parse::<f64>().map_err(|_| Error::Parse {
                        line,
                        msg: format!("not a number: {f:?}"),
                    })
                })
                .collect::<Result<_>>()?;
            if vals.len() < 2 {
                return Err(Error::Parse {
                    line,
                    msg: "need at least one weight column and a bias column".into(),
                });
            }
            match width {
                None => width = Some(vals.len()),
                Some(w) if w != vals.len() => {
                    return Err(Error::Parse {
                        line,
                        msg: format!("expected {w} columns, got {}", vals.len()),
                    })
                }
                _ => {}
            }
            let b = *vals.last().unwrap();
            units.push(AffineUnit::new(vals[..vals.len() - 1].to_vec(), b)?);
        }
        MaxoutClassifier::new(units)
    }

    pub fn load_csv<P: AsRef<Path>>(path: P) -> Result<MaxoutClassifier> {
        let file = std::fs::File::open(path)?;
        Self::from_csv_reader(std::io::BufReader::new(file))
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let cols: Vec<String> = (1..=self.dim).map(|i| format!("w{i}")).collect();
        writeln!(out, "# {},b", cols.join(","))?;
        for u in &self.units {
            let mut fields: Vec<String> = u.w.iter().map(|v| v.to_string()).collect();
            fields.push(u.b.to_string());
            writeln!(out, "{}", fields.join(","))?;
        }
        Ok(())
    }

    pub fn save_csv<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

fn cb_close(w1: &[f64], b1: f64, w2: &[f64], b2: f64) -> bool {
    (b1 - b2).abs() <= DEFAULT_TOL
        && w1
            .iter()
            .zip(w2)
            .all(|(a, b)| (a - b).abs() <= DEFAULT_TOL)
}

fn csv_error(e: csv::Error) -> Error {
    let line = match e.position() {
        Some(p) => p.line() as usize,
        None => 0,
    };
    Error::Parse {
        line,
        msg: e.to_string(),
    }
}
