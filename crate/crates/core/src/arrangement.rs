//! Hyperplane-arrangement cells and boundary facets of single-hidden-layer
//! rectifier classifiers.
//!
//! Cells are enumerated incrementally: hyperplanes are inserted one at a time
//! and an existing cell splits only when a margin-feasibility LP certifies
//! interior points on both sides. This keeps the work proportional to the
//! actual cell count instead of `2^m`.

use std::io::Write;

use num_traits::ToPrimitive;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::bounds;
use crate::error::{Error, Result};
use crate::geometry::AffineUnit;
use crate::linalg::{self, norm};
use crate::lp::{self, LpOutcome};

/// Desk-scale limits; enumeration cost grows with `G(d, m)`.
pub const MAX_DIM: usize = 6;
pub const MAX_HYPERPLANES: usize = 20;

/// Half-width of the bounding box used to pick deep interior witness points.
const WITNESS_BOX: f64 = 1e4;

/// Strict margin below which a candidate cell is treated as not crossed.
const SPLIT_MARGIN: f64 = 1e-9;

/// Two boundary pieces lie on the same facet hyperplane when their normalized
/// coefficients agree within this tolerance.
const PLANE_TOL: f64 = 1e-7;

/// One full-dimensional cell of an arrangement.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    /// Strict side of each hyperplane (`+1` where `w·x + b > 0`).
    pub signs: Vec<i8>,
    /// Deep interior point (Chebyshev-style center within a large box).
    pub witness: Vec<f64>,
    pub bounded: bool,
}

/// Single-hidden-layer rectifier classifier
/// `f(x) = a · max(0, Wx + b) + c`.
#[derive(Debug, Clone)]
pub struct ShlNetwork {
    pub units: Vec<AffineUnit>,
    pub a: Vec<f64>,
    pub c: f64,
}

impl ShlNetwork {
    pub fn new(units: Vec<AffineUnit>, a: Vec<f64>, c: f64) -> Result<Self> {
        if units.is_empty() {
            return Err(Error::InvalidParameter("network needs hidden units".into()));
        }
        if a.len() != units.len() {
            return Err(Error::DimensionMismatch {
                expected: units.len(),
                got: a.len(),
            });
        }
        let d = units[0].dim();
        for u in &units {
            if u.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: u.dim(),
                });
            }
        }
        if !c.is_finite() || a.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "output weights".into(),
            });
        }
        Ok(ShlNetwork { units, a, c })
    }

    pub fn dim(&self) -> usize {
        self.units[0].dim()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut acc = self.c;
        for (u, &ai) in self.units.iter().zip(&self.a) {
            acc += ai * u.eval(x).max(0.0);
        }
        acc
    }
}

fn check_scale(hyperplanes: &[AffineUnit]) -> Result<usize> {
    let m = hyperplanes.len();
    if m == 0 || m > MAX_HYPERPLANES {
        return Err(Error::ScaleLimit(format!(
            "need 1..={MAX_HYPERPLANES} hyperplanes, got {m}"
        )));
    }
    let d = hyperplanes[0].dim();
    if d == 0 || d > MAX_DIM {
        return Err(Error::ScaleLimit(format!("need 1..={MAX_DIM} dims, got {d}")));
    }
    for (i, h) in hyperplanes.iter().enumerate() {
        if h.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: h.dim(),
            });
        }
        if h.is_degenerate() {
            return Err(Error::ZeroHyperplane { index: i });
        }
    }
    Ok(d)
}

/// Deepest interior point of the region `sign_i (w_i·x + b_i) > 0` inside the
/// witness box: maximize `t` with `sign_i (w_i·x + b_i) >= t |w_i|`.
/// Returns the achieved margin and the point.
fn chebyshev(
    hyperplanes: &[AffineUnit],
    signs: &[i8],
    tol: f64,
) -> Result<(f64, Vec<f64>)> {
    let d = hyperplanes[0].dim();
    let mut cons: Vec<(Vec<f64>, f64)> = Vec::with_capacity(signs.len() + 2 * d);
    for (h, &s) in hyperplanes.iter().zip(signs) {
        // -s w·x + |w| t <= s b
        let mut row: Vec<f64> = h.w.iter().map(|v| -(s as f64) * v).collect();
        row.push(norm(&h.w));
        cons.push((row, s as f64 * h.b));
    }
    for j in 0..d {
        let mut row = vec![0.0; d + 1];
        row[j] = 1.0;
        cons.push((row.clone(), WITNESS_BOX));
        row[j] = -1.0;
        cons.push((row, WITNESS_BOX));
    }
    let mut obj = vec![0.0; d + 1];
    obj[d] = 1.0;
    match lp::maximize(&obj, &cons, tol)? {
        LpOutcome::Optimal { value, point } => Ok((value, point[..d].to_vec())),
        // The box always bounds t from above and admits t -> -inf.
        other => Err(Error::Numeric(format!(
            "witness LP returned {other:?} on a box-bounded problem"
        ))),
    }
}

/// True when the homogeneous system `sign_i (w_i · v) >= 0` admits a nonzero
/// direction, i.e. the cell is unbounded.
fn has_recession_direction(hyperplanes: &[AffineUnit], signs: &[i8], tol: f64) -> Result<bool> {
    let d = hyperplanes[0].dim();
    let mut cons: Vec<(Vec<f64>, f64)> = Vec::with_capacity(signs.len() + 2 * d);
    for (h, &s) in hyperplanes.iter().zip(signs) {
        cons.push((h.w.iter().map(|v| -(s as f64) * v).collect(), 0.0));
    }
    for j in 0..d {
        let mut row = vec![0.0; d];
        row[j] = 1.0;
        cons.push((row.clone(), 1.0));
        row[j] = -1.0;
        cons.push((row, 1.0));
    }
    // The recession cone is nonzero iff it reaches the unit box surface.
    for j in 0..d {
        for sgn in [1.0, -1.0] {
            let mut obj = vec![0.0; d];
            obj[j] = sgn;
            if let LpOutcome::Optimal { value, .. } = lp::maximize(&obj, &cons, tol)? {
                if value > 0.5 {
                    return Ok(true);
                }
            }
        }
    }
    Ok(false)
}

/// Enumerate every full-dimensional cell of the arrangement.
///
/// Duplicate hyperplanes do not create extra cells (the losing side of the
/// split is infeasible); their sign entries simply mirror the first copy.
pub fn enumerate_cells(hyperplanes: &[AffineUnit], tol: f64) -> Result<Vec<Cell>> {
    check_scale(hyperplanes)?;
    let mut cells: Vec<Vec<i8>> = vec![Vec::new()];
    for j in 0..hyperplanes.len() {
        let prefix = &hyperplanes[..=j];
        let mut next: Vec<Vec<i8>> = Vec::with_capacity(cells.len() * 2);
        for signs in &cells {
            let mut plus = signs.clone();
            plus.push(1);
            let mut minus = signs.clone();
            minus.push(-1);
            let (mp, _) = chebyshev(prefix, &plus, tol)?;
            let (mm, _) = chebyshev(prefix, &minus, tol)?;
            match (mp > SPLIT_MARGIN, mm > SPLIT_MARGIN) {
                (true, true) => {
                    next.push(plus);
                    next.push(minus);
                }
                (true, false) => next.push(plus),
                (false, true) => next.push(minus),
                // A full-dimensional parent always leaves interior on at
                // least one side; keep the better one if numerics disagree.
                (false, false) => next.push(if mp >= mm { plus } else { minus }),
            }
        }
        cells = next;
    }

    let mut out = Vec::with_capacity(cells.len());
    for signs in cells {
        let (margin, witness) = chebyshev(hyperplanes, &signs, tol)?;
        if margin <= 0.0 {
            return Err(Error::Numeric(format!(
                "cell {signs:?} lost its interior (margin {margin})"
            )));
        }
        let bounded = !has_recession_direction(hyperplanes, &signs, tol)?;
        out.push(Cell {
            signs,
            witness,
            bounded,
        });
    }
    Ok(out)
}

/// Tally of `(bounded, unbounded)` cells.
pub fn classify_cells(cells: &[Cell]) -> (usize, usize) {
    let bounded = cells.iter().filter(|c| c.bounded).count();
    (bounded, cells.len() - bounded)
}

/// General position: every subset of `min(d, m)` hyperplanes has independent
/// normals, and (when `m > d`) no `d+1` hyperplanes share a point. Decided by
/// rank tests with tolerance on unit-normalized rows.
pub fn is_general_position(hyperplanes: &[AffineUnit], tol: f64) -> Result<bool> {
    if hyperplanes.is_empty() {
        return Err(Error::InvalidParameter("need at least one hyperplane".into()));
    }
    let d = hyperplanes[0].dim();
    for h in hyperplanes.iter().skip(1) {
        if h.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: h.dim(),
            });
        }
    }
    let m = hyperplanes.len();
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut aug: Vec<Vec<f64>> = Vec::with_capacity(m);
    for h in hyperplanes {
        let n = norm(&h.w);
        if n <= 1e-12 {
            return Ok(false);
        }
        let r: Vec<f64> = h.w.iter().map(|v| v / n).collect();
        let mut ra = r.clone();
        ra.push(h.b / n);
        rows.push(r);
        aug.push(ra);
    }

    let k = d.min(m);
    let mut independent = true;
    for_each_combination(m, k, &mut |idx| {
        let sel: Vec<Vec<f64>> = idx.iter().map(|&i| rows[i].clone()).collect();
        if linalg::rank(&sel, tol) < k {
            independent = false;
        }
        independent
    });
    if !independent {
        return Ok(false);
    }
    if m > d {
        let mut pointless = true;
        for_each_combination(m, d + 1, &mut |idx| {
            let sel: Vec<Vec<f64>> = idx.iter().map(|&i| aug[i].clone()).collect();
            // Normals have rank d (checked above); a shared point exists iff
            // the augmented matrix also has rank d.
            if linalg::rank(&sel, tol) < d + 1 {
                pointless = false;
            }
            pointless
        });
        if !pointless {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Visit all k-combinations of `0..m` while `f` keeps returning true.
fn for_each_combination(m: usize, k: usize, f: &mut impl FnMut(&[usize]) -> bool) {
    let mut idx: Vec<usize> = (0..k).collect();
    if k == 0 || k > m {
        return;
    }
    loop {
        if !f(&idx) {
            return;
        }
        // odometer step
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + m - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Boundary piece of `f` inside one cell: the zero set of the cell's affine
/// restriction, recorded by its normalized hyperplane coefficients.
struct Piece {
    cell: usize,
    plane_w: Vec<f64>,
    plane_b: f64,
    raw_w: Vec<f64>,
    raw_b: f64,
}

/// Count the distinct boundary facets of a single-hidden-layer classifier.
///
/// The hidden hyperplanes are deduplicated, their arrangement enumerated, and
/// within each cell the affine restriction of `f` is intersected with the
/// cell interior. Coplanar pieces in adjacent cells that share a
/// `(d-2)`-dimensional interface merge into one facet.
pub fn count_boundary_facets(net: &ShlNetwork, tau: f64) -> Result<usize> {
    if !(tau > 0.0) {
        return Err(Error::InvalidParameter("tolerance must be positive".into()));
    }
    check_scale(&net.units)?;

    // Canonical deduplicated arrangement (a hyperplane equals its negation).
    let mut reps: Vec<AffineUnit> = Vec::new();
    for (i, u) in net.units.iter().enumerate() {
        let Some((w, b)) = u.canonical() else {
            return Err(Error::ZeroHyperplane { index: i });
        };
        let dup = reps.iter().any(|r| {
            (r.b - b).abs() <= 1e-9 && r.w.iter().zip(&w).all(|(x, y)| (x - y).abs() <= 1e-9)
        });
        if !dup {
            reps.push(AffineUnit::new(w, b)?);
        }
    }

    let cells = enumerate_cells(&reps, tau)?;
    let scale: f64 = net
        .a
        .iter()
        .zip(&net.units)
        .map(|(ai, u)| ai.abs() * norm(&u.w))
        .sum::<f64>()
        .max(1.0);

    let mut pieces: Vec<Piece> = Vec::new();
    for (ci, cell) in cells.iter().enumerate() {
        let d = net.dim();
        let mut g = vec![0.0; d];
        let mut h = net.c;
        for (u, &ai) in net.units.iter().zip(&net.a) {
            if u.eval(&cell.witness) > 0.0 {
                for (gj, wj) in g.iter_mut().zip(&u.w) {
                    *gj += ai * wj;
                }
                h += ai * u.b;
            }
        }
        let gn = norm(&g);
        if gn <= tau * scale {
            if h.abs() <= tau * scale {
                return Err(Error::DegenerateBoundary);
            }
            continue; // f is a nonzero constant here: no boundary
        }
        if piece_margin(&reps, &cell.signs, &g, h, tau)? > tau {
            let (pw, pb) = normalize_plane(&g, h, gn);
            pieces.push(Piece {
                cell: ci,
                plane_w: pw,
                plane_b: pb,
                raw_w: g,
                raw_b: h,
            });
        }
    }

    // Merge coplanar pieces that meet across a single non-separating
    // hyperplane in a (d-2)-dimensional interface.
    let mut parent: Vec<usize> = (0..pieces.len()).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let root = find(parent, parent[i]);
            parent[i] = root;
        }
        parent[i]
    }
    for i in 0..pieces.len() {
        for j in i + 1..pieces.len() {
            if !same_plane(&pieces[i], &pieces[j]) {
                continue;
            }
            let (ca, cb) = (&cells[pieces[i].cell], &cells[pieces[j].cell]);
            let diff: Vec<usize> = (0..reps.len())
                .filter(|&k| ca.signs[k] != cb.signs[k])
                .collect();
            if diff.len() != 1 {
                continue;
            }
            if interface_margin(&reps, &ca.signs, diff[0], &pieces[i].raw_w, pieces[i].raw_b, tau)?
                > tau
            {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri] = rj;
                }
            }
        }
    }
    let mut roots: Vec<usize> = (0..pieces.len())
        .map(|i| find(&mut parent, i))
        .collect();
    roots.sort_unstable();
    roots.dedup();
    Ok(roots.len())
}

/// Max margin of the cell constraints on the plane `g·x + h = 0`
/// (`+inf` when the margin grows along a recession direction).
fn piece_margin(
    hyperplanes: &[AffineUnit],
    signs: &[i8],
    g: &[f64],
    h: f64,
    tol: f64,
) -> Result<f64> {
    let d = g.len();
    let mut cons: Vec<(Vec<f64>, f64)> = Vec::with_capacity(signs.len() + 2);
    for (hp, &s) in hyperplanes.iter().zip(signs) {
        let mut row: Vec<f64> = hp.w.iter().map(|v| -(s as f64) * v).collect();
        row.push(norm(&hp.w));
        cons.push((row, s as f64 * hp.b));
    }
    let mut row: Vec<f64> = g.to_vec();
    row.push(0.0);
    cons.push((row.clone(), -h));
    let neg: Vec<f64> = row.iter().map(|v| -v).collect();
    cons.push((neg, h));
    let mut obj = vec![0.0; d + 1];
    obj[d] = 1.0;
    Ok(lp::maximize(&obj, &cons, tol)?.sup())
}

/// Margin of the shared face: both the separating hyperplane and the facet
/// plane as equalities, all other cell constraints strict.
fn interface_margin(
    hyperplanes: &[AffineUnit],
    signs: &[i8],
    skip: usize,
    g: &[f64],
    h: f64,
    tol: f64,
) -> Result<f64> {
    let d = g.len();
    let mut cons: Vec<(Vec<f64>, f64)> = Vec::new();
    for (k, (hp, &s)) in hyperplanes.iter().zip(signs).enumerate() {
        if k == skip {
            let mut row: Vec<f64> = hp.w.clone();
            row.push(0.0);
            cons.push((row.clone(), -hp.b));
            cons.push((row.iter().map(|v| -v).collect(), hp.b));
        } else {
            let mut row: Vec<f64> = hp.w.iter().map(|v| -(s as f64) * v).collect();
            row.push(norm(&hp.w));
            cons.push((row, s as f64 * hp.b));
        }
    }
    let mut row: Vec<f64> = g.to_vec();
    row.push(0.0);
    cons.push((row.clone(), -h));
    cons.push((row.iter().map(|v| -v).collect(), h));
    let mut obj = vec![0.0; d + 1];
    obj[d] = 1.0;
    Ok(lp::maximize(&obj, &cons, tol)?.sup())
}

fn normalize_plane(g: &[f64], h: f64, gn: f64) -> (Vec<f64>, f64) {
    let mut w: Vec<f64> = g.iter().map(|v| v / gn).collect();
    let mut b = h / gn;
    if let Some(lead) = w.iter().find(|v| v.abs() > 1e-12) {
        if *lead < 0.0 {
            for v in &mut w {
                *v = -*v;
            }
            b = -b;
        }
    }
    (w, b)
}

fn same_plane(a: &Piece, b: &Piece) -> bool {
    (a.plane_b - b.plane_b).abs() <= PLANE_TOL
        && a.plane_w
            .iter()
            .zip(&b.plane_w)
            .all(|(x, y)| (x - y).abs() <= PLANE_TOL)
}

/// One run of the facet-count witness experiment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessReport {
    pub d: usize,
    pub m: usize,
    pub seed: u64,
    pub facets: usize,
    /// `C(d,m) - 1`.
    pub lower: u64,
    /// `G(d,m)`.
    pub upper: u64,
    pub pass: bool,
}

/// Sample a general-position arrangement from a seeded generator
/// (standard-normal weights and biases), retrying up to `max_attempts`.
pub fn sample_general_position(
    d: usize,
    m: usize,
    rng: &mut ChaCha8Rng,
    max_attempts: usize,
) -> Result<Vec<AffineUnit>> {
    let normal = StandardNormal;
    for _ in 0..max_attempts {
        let units: Vec<AffineUnit> = (0..m)
            .map(|_| {
                let w: Vec<f64> = (0..d).map(|_| normal.sample(rng)).collect();
                AffineUnit::new(w, normal.sample(rng))
            })
            .collect::<Result<_>>()?;
        if is_general_position(&units, 1e-9)? {
            return Ok(units);
        }
    }
    Err(Error::GeneralPositionRetries {
        attempts: max_attempts,
    })
}

/// Build the facet-maximizing witness net on a random generic arrangement:
/// all-ones output weights and an output bias low enough that `f` is negative
/// on every bounded cell, then count its boundary facets against
/// `[C(d,m)-1, G(d,m)]`.
pub fn theorem5_experiment(d: usize, m: usize, seed: u64, tol: f64) -> Result<WitnessReport> {
    if d < 2 || d > MAX_DIM || m < 1 || m > MAX_HYPERPLANES {
        return Err(Error::ScaleLimit(format!(
            "witness experiment needs 2 <= d <= {MAX_DIM}, 1 <= m <= {MAX_HYPERPLANES} (got d={d}, m={m})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let units = sample_general_position(d, m, &mut rng, 100)?;
    let a = vec![1.0; m];

    // Output bias: below the hidden activation at every arrangement vertex,
    // so f stays negative on all bounded cells (their vertices dominate).
    let mut hmax: f64 = f64::NEG_INFINITY;
    for_each_combination(m, d, &mut |idx| {
        let rows: Vec<Vec<f64>> = idx.iter().map(|&i| units[i].w.clone()).collect();
        let rhs: Vec<f64> = idx.iter().map(|&i| -units[i].b).collect();
        if let Some(v) = linalg::solve(&rows, &rhs, 1e-12) {
            let act: f64 = units
                .iter()
                .zip(&a)
                .map(|(u, ai)| ai * u.eval(&v).max(0.0))
                .sum();
            hmax = hmax.max(act);
        }
        true
    });
    let c = if hmax.is_finite() { -hmax - 1.0 } else { -1.0 };

    let net = ShlNetwork::new(units, a, c)?;
    let facets = count_boundary_facets(&net, tol)?;
    let lower = (bounds::cone_like_count(d as u64, m as u64)?.0)
        .to_u64()
        .expect("desk scale")
        .saturating_sub(1);
    let upper = bounds::regions_max(d as u64, m as u64)?
        .to_u64()
        .expect("desk scale");
    let pass = (facets as u64) >= lower && (facets as u64) <= upper;
    Ok(WitnessReport {
        d,
        m,
        seed,
        facets,
        lower,
        upper,
        pass,
    })
}

/// Cells as CSV: `m` sign columns, `d` witness columns, bounded flag.
pub fn write_cells_csv<W: Write>(cells: &[Cell], mut out: W) -> Result<()> {
    let m = cells.first().map_or(0, |c| c.signs.len());
    let d = cells.first().map_or(0, |c| c.witness.len());
    let mut header: Vec<String> = (1..=m).map(|i| format!("s{i}")).collect();
    header.extend((1..=d).map(|i| format!("x{i}")));
    header.push("bounded".into());
    writeln!(out, "{}", header.join(","))?;
    for cell in cells {
        let mut fields: Vec<String> = cell.signs.iter().map(|s| format!("{s:+}")).collect();
        fields.extend(cell.witness.iter().map(|v| v.to_string()));
        fields.push(if cell.bounded { "1" } else { "0" }.into());
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(())
}
