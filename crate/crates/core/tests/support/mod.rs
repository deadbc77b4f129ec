//! Shared test oracles, all independent of the library's implementation
//! paths: a lattice sign-vector census for cell counts, a scalar folding
//! recursion for the norm nets, the circumscribed-polygon closed form, and a
//! ray-sweep facet census for planar convex classifiers.

use std::collections::HashSet;

use boundres::AffineUnit;

/// Census lattice sized for the conditioned fixtures: vertices live within
/// infinity-norm 4, so a box of half-width 6 covers every bounded cell and
/// gives the unbounded ones room to open up.
pub fn census_resolution(d: usize) -> (f64, usize) {
    match d {
        2 => (6.0, 1601),
        _ => (6.0, 181),
    }
}

/// Distinct sign vectors of the arrangement over a uniform lattice covering
/// `[-half, half]^d`. Points within `margin` of any hyperplane are skipped so
/// that only clear interior evidence is counted.
pub fn lattice_census(
    hyperplanes: &[AffineUnit],
    half: f64,
    points_per_axis: usize,
    margin: f64,
) -> usize {
    let d = hyperplanes[0].dim();
    let mut seen: HashSet<Vec<i8>> = HashSet::new();
    let mut idx = vec![0usize; d];
    let step = 2.0 * half / (points_per_axis as f64 - 1.0);
    let mut point = vec![0.0f64; d];
    'grid: loop {
        for (j, &i) in idx.iter().enumerate() {
            point[j] = -half + step * i as f64;
        }
        let mut signs = Vec::with_capacity(hyperplanes.len());
        let mut ambiguous = false;
        for h in hyperplanes {
            let v = h.eval(&point);
            if v.abs() < margin {
                ambiguous = true;
                break;
            }
            signs.push(if v > 0.0 { 1i8 } else { -1i8 });
        }
        if !ambiguous {
            seen.insert(signs);
        }
        // odometer
        for j in 0..d {
            idx[j] += 1;
            if idx[j] < points_per_axis {
                continue 'grid;
            }
            idx[j] = 0;
        }
        break;
    }
    seen.len()
}

/// Max infinity-norm over all vertices (d-wise hyperplane intersections),
/// used to size the census box. Zero when no vertex exists.
pub fn vertex_reach(hyperplanes: &[AffineUnit]) -> f64 {
    let d = hyperplanes[0].dim();
    let m = hyperplanes.len();
    if m < d {
        return 0.0;
    }
    let mut reach = 0.0f64;
    let mut pick = vec![0usize; d];
    subsets(m, d, &mut pick, 0, 0, &mut |sel| {
        let rows: Vec<Vec<f64>> = sel.iter().map(|&i| hyperplanes[i].w.clone()).collect();
        let rhs: Vec<f64> = sel.iter().map(|&i| -hyperplanes[i].b).collect();
        if let Some(x) = solve_dense(&rows, &rhs) {
            for v in x {
                reach = reach.max(v.abs());
            }
        }
    });
    reach
}

fn subsets(m: usize, k: usize, buf: &mut Vec<usize>, start: usize, depth: usize, f: &mut impl FnMut(&[usize])) {
    if depth == k {
        f(&buf[..k]);
        return;
    }
    for i in start..m {
        buf[depth] = i;
        subsets(m, k, buf, i + 1, depth + 1, f);
    }
}

/// Plain Gaussian elimination, `None` on (near-)singular systems.
fn solve_dense(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, &rhs)| {
            let mut r = row.clone();
            r.push(rhs);
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| {
            m[i][col]
                .abs()
                .partial_cmp(&m[j][col].abs())
                .unwrap()
        })?;
        if m[piv][col].abs() < 1e-10 {
            return None;
        }
        m.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = m[r][col] / m[col][col];
                for c in col..=n {
                    let v = m[col][c];
                    m[r][c] -= f * v;
                }
            }
        }
    }
    Some((0..n).map(|i| m[i][n] / m[i][i]).collect())
}

/// Well-spread base normals: equally spaced directions in 2D, a fixed
/// spread table in 3D. Every d-subset is well-conditioned, so jittered
/// copies keep all arrangement vertices near the origin.
fn spread_normals(d: usize, m: usize) -> Vec<Vec<f64>> {
    assert!(m <= 7, "fixture table covers m <= 7");
    if d == 2 {
        (0..m)
            .map(|j| {
                let t = std::f64::consts::PI * j as f64 / m as f64;
                vec![t.cos(), t.sin()]
            })
            .collect()
    } else {
        // Numerically optimized so that the worst 3-subset of normals still
        // has smallest singular value ~0.21 (axes-plus-diagonals style tables
        // contain exactly singular triples).
        let table: [[f64; 3]; 7] = [
            [0.759852, -0.040948, 0.648806],
            [0.073173, -0.834999, 0.545365],
            [0.805206, 0.571405, -0.158553],
            [0.986985, -0.131717, -0.092251],
            [0.356874, -0.851306, -0.384602],
            [0.027709, -0.506620, -0.861724],
            [-0.507929, -0.382914, 0.771612],
        ];
        assert_eq!(d, 3, "fixtures support d in {{2, 3}}");
        table[..m].iter().map(|r| r.to_vec()).collect()
    }
}

/// Random general-position arrangement conditioned for the lattice oracle:
/// jittered well-spread normals with bounded offsets, accepted only when all
/// arrangement vertices stay within infinity-norm 4 and pairwise at least
/// 0.25 apart. This keeps every cell wide enough that a feasible lattice
/// resolves it; a raw Gaussian sampler instead produces sliver cells with
/// inradius below 1e-2 and vertices hundreds of units out.
pub fn sample_conditioned(
    d: usize,
    m: usize,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Vec<AffineUnit> {
    use rand::Rng;
    use rand_distr::{Distribution, StandardNormal};
    let bases = spread_normals(d, m);
    // 3D triples mixing axes and diagonals have singular values near 0.5, so
    // offsets stay smaller there to keep vertices inside the census box.
    let b_range = if d == 2 { 1.2 } else { 0.8 };
    'outer: for _ in 0..50_000 {
        let units: Vec<AffineUnit> = bases
            .iter()
            .map(|base| {
                let jittered: Vec<f64> = base
                    .iter()
                    .map(|v| v + 0.03 * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng))
                    .collect();
                let n = jittered.iter().map(|v| v * v).sum::<f64>().sqrt();
                let w: Vec<f64> = jittered.iter().map(|v| v / n).collect();
                AffineUnit::new(w, rng.random_range(-b_range..b_range)).unwrap()
            })
            .collect();
        // all vertices in reach and pairwise separated
        let mut vertices: Vec<Vec<f64>> = Vec::new();
        let mut ok = true;
        let mut pick = vec![0usize; d];
        subsets(m, d, &mut pick, 0, 0, &mut |sel| {
            let rows: Vec<Vec<f64>> = sel.iter().map(|&i| units[i].w.clone()).collect();
            let rhs: Vec<f64> = sel.iter().map(|&i| -units[i].b).collect();
            match solve_dense(&rows, &rhs) {
                Some(x) => {
                    if x.iter().any(|v| v.abs() > 4.0) {
                        ok = false;
                    }
                    vertices.push(x);
                }
                None => ok = false,
            }
        });
        if !ok {
            continue 'outer;
        }
        for i in 0..vertices.len() {
            for j in i + 1..vertices.len() {
                let dist: f64 = vertices[i]
                    .iter()
                    .zip(&vertices[j])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                if dist < 0.25 {
                    continue 'outer;
                }
            }
        }
        if !boundres::arrangement::is_general_position(&units, 1e-9).unwrap() {
            continue 'outer;
        }
        return units;
    }
    panic!("could not sample a conditioned arrangement for d={d} m={m}");
}

/// Scalar reference for the 2D folding recursion (abs/cos/sin only).
pub fn fold2d(k: u32, x: f64, y: f64) -> f64 {
    let (mut f, mut fbar) = (x.abs(), y.abs());
    for i in 2..=k {
        let th = std::f64::consts::PI / 2f64.powi(i as i32);
        let (nf, nbar) = (
            th.cos() * f + th.sin() * fbar,
            (-th.sin() * f + th.cos() * fbar).abs(),
        );
        f = nf;
        fbar = nbar;
    }
    f
}

/// Scalar reference for the chained d-dimensional construction.
pub fn fold_nd(k: u32, x: &[f64]) -> f64 {
    let mut g = fold2d(k, x[0], x[1]);
    for &xi in &x[2..] {
        g = fold2d(k, g, xi);
    }
    g
}

/// Exact volume excess of the regular 2^k-gon circumscribing the unit disc:
/// `n tan(pi/n) / pi - 1`.
pub fn polygon_excess(k: u32) -> f64 {
    let n = 2f64.powi(k as i32);
    n * (std::f64::consts::PI / n).tan() / std::f64::consts::PI - 1.0
}

/// Facet census for a planar convex classifier by ray sweep from an interior
/// point: bisect each ray to the boundary, identify the local supporting line
/// by central-difference gradients, and count maximal runs of one line.
/// Directions whose ray never crosses within `r_max` break runs (unbounded
/// sides). Panics when the sweep resolution is too coarse to trust.
pub fn convex_facet_census_2d(
    f: &dyn Fn(f64, f64) -> f64,
    interior: (f64, f64),
    r_max: f64,
    n_angles: usize,
) -> usize {
    assert!(f(interior.0, interior.1) < 0.0, "interior point not inside");
    let mut ids: Vec<Option<(i64, i64, i64)>> = Vec::with_capacity(n_angles);
    for j in 0..n_angles {
        let t = std::f64::consts::TAU * (j as f64 + 0.5) / n_angles as f64;
        let dir = (t.cos(), t.sin());
        let at = |r: f64| f(interior.0 + r * dir.0, interior.1 + r * dir.1);
        if at(r_max) <= 0.0 {
            ids.push(None); // unbounded direction
            continue;
        }
        let (mut lo, mut hi) = (0.0f64, r_max);
        for _ in 0..70 {
            let mid = 0.5 * (lo + hi);
            if at(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let r = 0.5 * (lo + hi);
        let p = (interior.0 + r * dir.0, interior.1 + r * dir.1);
        let h = 1e-6 * (1.0 + p.0.abs().max(p.1.abs()));
        let gx = (f(p.0 + h, p.1) - f(p.0 - h, p.1)) / (2.0 * h);
        let gy = (f(p.0, p.1 + h) - f(p.0, p.1 - h)) / (2.0 * h);
        let n = (gx * gx + gy * gy).sqrt();
        if n < 1e-12 {
            ids.push(None);
            continue;
        }
        let (ux, uy) = (gx / n, gy / n);
        let c = ux * p.0 + uy * p.1; // supporting line u·x = c
        let q = |v: f64| (v / 1e-4).round() as i64;
        ids.push(Some((q(ux), q(uy), q(c))));
    }

    // count circular runs of equal Some(...) identities
    let n = ids.len();
    let mut facets = 0usize;
    let mut run_lengths: Vec<usize> = Vec::new();
    let mut j = 0;
    // rotate to a run boundary to make the circular scan linear
    let start = (0..n)
        .find(|&i| ids[i] != ids[(i + n - 1) % n])
        .unwrap_or(0);
    while j < n {
        let cur = &ids[(start + j) % n];
        let mut len = 1;
        while j + len < n && ids[(start + j + len) % n] == *cur {
            len += 1;
        }
        if cur.is_some() {
            facets += 1;
            run_lengths.push(len);
        }
        j += len;
    }
    assert!(
        run_lengths.iter().all(|&l| l >= 3),
        "sweep too coarse: runs {run_lengths:?}"
    );
    facets
}
