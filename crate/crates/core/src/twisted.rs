//! Twisted cochain complexes for a flat local system: per-cell coboundary
//! terms with holonomy transports, cohomology of the pair (M, Y), and the
//! even-dimensionality of the middle boundary cohomology.
//!
//! The simplicial constructor assigns values of a cochain at the least
//! vertex of each simplex; the coboundary transports the leading face with
//! the edge holonomy g(v0, v1) and keeps the others in place, which makes
//! flatness a per-triangle identity g(v0,v1) g(v1,v2) = g(v0,v2).

use crate::linalg::{ComplexMatrix, LinalgError, Svd};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TwistedError {
    #[error("holonomy is not flat: {0}")]
    NotFlat(String),
    #[error("subcomplex flags do not define a subcomplex: {0}")]
    NotSubcomplex(String),
    #[error("inconsistent incidence data: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// One coboundary term: the (d-1)-cell, an incidence sign, and a holonomy
/// transport in GL(n, C).
#[derive(Debug, Clone)]
pub struct BoundaryTerm {
    pub cell: usize,
    pub sign: i32,
    pub transport: ComplexMatrix,
}

/// Twisted cell structure: cells per dimension, subcomplex membership flags,
/// and coboundary terms for every cell of dimension ≥ 1.
#[derive(Debug, Clone)]
pub struct TwistedComplexSpec {
    pub rank: usize,
    pub cells: Vec<usize>,
    /// in_y[d][cell]: the cell belongs to the boundary subcomplex Y.
    pub in_y: Vec<Vec<bool>>,
    /// boundaries[d-1][cell]: terms of the d-cell against (d-1)-cells.
    pub boundaries: Vec<Vec<Vec<BoundaryTerm>>>,
}

/// Cochain complex of a twisted spec: plain coboundary matrices (no
/// chirality exists on a simplicial complex).
#[derive(Debug, Clone)]
pub struct TwistedCochainComplex {
    pub dims: Vec<usize>,
    /// delta[q]: C^q → C^{q+1}.
    pub delta: Vec<ComplexMatrix>,
}

impl TwistedCochainComplex {
    pub fn top_degree(&self) -> usize {
        self.dims.len() - 1
    }

    pub fn cohomology_dims(&self) -> Vec<usize> {
        cohomology_of_deltas(&self.dims, &self.delta)
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.dims
            .iter()
            .enumerate()
            .map(|(q, n)| if q % 2 == 0 { *n as i64 } else { -(*n as i64) })
            .sum()
    }
}

fn cohomology_of_deltas(dims: &[usize], delta: &[ComplexMatrix]) -> Vec<usize> {
    let top = dims.len() - 1;
    let scale = delta.iter().map(|d| d.max_abs()).fold(1.0f64, f64::max);
    let tol = 1e-10 * scale;
    (0..=top)
        .map(|q| {
            let rank_out = if q < top {
                Svd::new(&delta[q]).expect("finite").rank(tol)
            } else {
                0
            };
            let rank_in = if q > 0 {
                Svd::new(&delta[q - 1]).expect("finite").rank(tol)
            } else {
                0
            };
            dims[q] - rank_out - rank_in
        })
        .collect()
}

impl TwistedComplexSpec {
    pub fn validate(&self) -> Result<(), TwistedError> {
        let dimension = self.cells.len() - 1;
        if self.in_y.len() != self.cells.len() {
            return Err(TwistedError::Inconsistent(
                "subcomplex flags must cover every dimension".to_string(),
            ));
        }
        for (d, flags) in self.in_y.iter().enumerate() {
            if flags.len() != self.cells[d] {
                return Err(TwistedError::Inconsistent(format!(
                    "subcomplex flags at dimension {d} have the wrong length"
                )));
            }
        }
        if self.boundaries.len() != dimension {
            return Err(TwistedError::Inconsistent(
                "boundary data must cover every dimension above zero".to_string(),
            ));
        }
        for d in 1..=dimension {
            let terms = &self.boundaries[d - 1];
            if terms.len() != self.cells[d] {
                return Err(TwistedError::Inconsistent(format!(
                    "boundary terms at dimension {d} have the wrong length"
                )));
            }
            for (cell, list) in terms.iter().enumerate() {
                for t in list {
                    if t.cell >= self.cells[d - 1] {
                        return Err(TwistedError::Inconsistent(format!(
                            "cell {cell} of dimension {d} references a missing face"
                        )));
                    }
                    if t.transport.rows() != self.rank || t.transport.cols() != self.rank {
                        return Err(TwistedError::Inconsistent(
                            "holonomy transport has the wrong rank".to_string(),
                        ));
                    }
                    if t.sign != 1 && t.sign != -1 {
                        return Err(TwistedError::Inconsistent(
                            "incidence signs must be ±1".to_string(),
                        ));
                    }
                }
                // Y-cells may only touch Y-faces
                if self.in_y[d][cell] {
                    for t in list {
                        if !self.in_y[d - 1][t.cell] {
                            return Err(TwistedError::NotSubcomplex(format!(
                                "Y-cell {cell} of dimension {d} has a face outside Y"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn delta_matrix(&self, d: usize, restrict_y: Option<bool>) -> ComplexMatrix {
        // coboundary C^d → C^{d+1}; restrict_y = Some(true): Y-cells only,
        // Some(false): non-Y cells only (the relative complex)
        let keep = |dim: usize, cell: usize| -> bool {
            match restrict_y {
                None => true,
                Some(want) => self.in_y[dim][cell] == want,
            }
        };
        let rows: Vec<usize> = (0..self.cells[d + 1]).filter(|c| keep(d + 1, *c)).collect();
        let cols: Vec<usize> = (0..self.cells[d]).filter(|c| keep(d, *c)).collect();
        let col_of: HashMap<usize, usize> = cols.iter().enumerate().map(|(i, c)| (*c, i)).collect();
        let n = self.rank;
        let mut out = ComplexMatrix::zeros(rows.len() * n, cols.len() * n);
        for (ri, row_cell) in rows.iter().enumerate() {
            for t in &self.boundaries[d][*row_cell] {
                let Some(&ci) = col_of.get(&t.cell) else {
                    continue;
                };
                let s = t.sign as f64;
                for a in 0..n {
                    for b in 0..n {
                        out[(ri * n + a, ci * n + b)] += t.transport[(a, b)] * s;
                    }
                }
            }
        }
        out
    }

    fn dims_filtered(&self, restrict_y: Option<bool>) -> Vec<usize> {
        (0..self.cells.len())
            .map(|d| {
                let count = (0..self.cells[d])
                    .filter(|c| match restrict_y {
                        None => true,
                        Some(want) => self.in_y[d][*c] == want,
                    })
                    .count();
                count * self.rank
            })
            .collect()
    }

    /// Untwisted incidence must square to zero exactly.
    fn check_untwisted_incidence(&self) -> Result<(), TwistedError> {
        let dimension = self.cells.len() - 1;
        for d in 1..dimension {
            let lower = &self.boundaries[d - 1];
            let upper = &self.boundaries[d];
            for (cell, list) in upper.iter().enumerate() {
                let mut acc: HashMap<usize, i64> = HashMap::new();
                for t in list {
                    for u in &lower[t.cell] {
                        *acc.entry(u.cell).or_insert(0) += (t.sign * u.sign) as i64;
                    }
                }
                if acc.values().any(|v| *v != 0) {
                    return Err(TwistedError::Inconsistent(format!(
                        "untwisted ∂∂ ≠ 0 at cell {cell} of dimension {}",
                        d + 1
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Assembles the twisted coboundaries and verifies δδ = 0.
pub fn build_twisted_complex(spec: &TwistedComplexSpec) -> Result<TwistedCochainComplex, TwistedError> {
    spec.validate()?;
    spec.check_untwisted_incidence()?;
    let top = spec.cells.len() - 1;
    let dims = spec.dims_filtered(None);
    let delta: Vec<ComplexMatrix> = (0..top).map(|d| spec.delta_matrix(d, None)).collect();
    let scale = delta.iter().map(|d| d.max_abs()).fold(1.0f64, f64::max);
    for d in 0..top.saturating_sub(1) {
        let dd = delta[d + 1].mul(&delta[d]);
        if dd.max_abs() > 1e-10 * scale * scale {
            return Err(TwistedError::NotFlat(format!(
                "twisted δδ ≠ 0 between dimensions {d} and {} (residual {:.2e})",
                d + 2,
                dd.max_abs()
            )));
        }
    }
    Ok(TwistedCochainComplex { dims, delta })
}

#[derive(Debug, Clone)]
pub struct CohomologyReport {
    pub absolute: Vec<usize>,
    pub relative: Vec<usize>,
    pub boundary: Vec<usize>,
    pub rank_j: usize,
    /// the degree at which rank j* was computed (r - 1)
    pub middle_degree: usize,
}

/// Cohomology of M, of the pair (M, Y), of Y, and the rank of the
/// restriction H^{r-1}(M) → H^{r-1}(Y).
pub fn cohomology_report(spec: &TwistedComplexSpec) -> Result<CohomologyReport, TwistedError> {
    spec.validate()?;
    spec.check_untwisted_incidence()?;
    let top = spec.cells.len() - 1;
    let full = build_twisted_complex(spec)?;
    let absolute = full.cohomology_dims();

    let rel_dims = spec.dims_filtered(Some(false));
    let rel_delta: Vec<ComplexMatrix> = (0..top).map(|d| spec.delta_matrix(d, Some(false))).collect();
    let relative = cohomology_of_deltas(&rel_dims, &rel_delta);

    let y_dims = spec.dims_filtered(Some(true));
    let y_delta: Vec<ComplexMatrix> = (0..top).map(|d| spec.delta_matrix(d, Some(true))).collect();
    let boundary = cohomology_of_deltas(&y_dims, &y_delta);

    // rank of j*: restriction of degree-(r-1) cocycle classes to Y
    let middle_degree = top / 2; // m = top (odd), r - 1 = (m - 1) / 2
    let q = middle_degree;
    let scale = full.delta.iter().map(|d| d.max_abs()).fold(1.0f64, f64::max);
    let tol = 1e-10 * scale;
    let cocycles = if q < top {
        Svd::new(&full.delta[q])?.kernel_basis(tol)
    } else {
        ComplexMatrix::identity(full.dims[q])
    };
    // absolute classes: kill the coboundaries
    let img = if q > 0 {
        Svd::new(&full.delta[q - 1])?.image_basis(tol)
    } else {
        ComplexMatrix::zeros(full.dims[q], 0)
    };
    // restriction map: project to the Y-cell coordinates
    let y_rows = y_row_indices(spec, q);
    let restrict = |m: &ComplexMatrix| -> ComplexMatrix {
        ComplexMatrix::from_fn(y_rows.len(), m.cols(), |i, j| m[(y_rows[i], j)])
    };
    let y_img = if q > 0 {
        let d = spec.delta_matrix(q - 1, Some(true));
        Svd::new(&d)?.image_basis(tol)
    } else {
        ComplexMatrix::zeros(y_dims[q], 0)
    };
    // span of restricted classes and Y-coboundaries modulo Y-coboundaries
    let restricted = restrict(&cocycles);
    let with_img = ComplexMatrix::hcat(&[&restricted, &restrict(&img), &y_img]);
    let base = ComplexMatrix::hcat(&[&restrict(&img), &y_img]);
    let rank_with = if with_img.is_empty() {
        0
    } else {
        Svd::new(&with_img)?.rank(1e-8)
    };
    let rank_base = if base.is_empty() {
        0
    } else {
        Svd::new(&base)?.rank(1e-8)
    };
    let rank_j = rank_with - rank_base;
    Ok(CohomologyReport {
        absolute,
        relative,
        boundary,
        rank_j,
        middle_degree,
    })
}

fn y_row_indices(spec: &TwistedComplexSpec, d: usize) -> Vec<usize> {
    let n = spec.rank;
    let mut rows = Vec::new();
    for cell in 0..spec.cells[d] {
        if spec.in_y[d][cell] {
            for a in 0..n {
                rows.push(cell * n + a);
            }
        }
    }
    rows
}

/// Middle-dimension identity: dim H^{r-1}(Y) = 2 rank j*.
pub fn middle_dim_check(report: &CohomologyReport) -> bool {
    report.boundary[report.middle_degree] == 2 * report.rank_j
}

/// Long exact sequence of the pair: the alternating dimension sum vanishes.
pub fn long_exact_sequence_defect(report: &CohomologyReport) -> i64 {
    // ... → H^q(M, Y) → H^q(M) → H^q(Y) → H^{q+1}(M, Y) → ... is exact, so
    // the alternating sum of dimensions along the sequence vanishes
    let mut acc: i64 = 0;
    for q in 0..report.relative.len() {
        let block =
            report.relative[q] as i64 - report.absolute[q] as i64 + report.boundary[q] as i64;
        acc += if q % 2 == 0 { block } else { -block };
    }
    acc
}

pub fn long_exact_sequence_balanced(report: &CohomologyReport) -> bool {
    long_exact_sequence_defect(report) == 0
}

// ---------------------------------------------------------------------------
// simplicial construction

/// Ordered simplicial complex with edge holonomies in the spanning-tree
/// gauge: edges not listed carry the identity.
pub struct SimplicialSpec {
    pub rank: usize,
    pub vertices: usize,
    /// simplices[d-1]: sorted vertex tuples of the d-simplices, d ≥ 1.
    pub simplices: Vec<Vec<Vec<usize>>>,
    pub holonomy: HashMap<(usize, usize), ComplexMatrix>,
    /// vertex membership of the subcomplex; a simplex is in Y when all its
    /// vertices are and its vertex set passes `y_simplex`
    pub y_simplex: fn(&[usize]) -> bool,
}

impl SimplicialSpec {
    fn edge_transport(&self, u: usize, v: usize) -> ComplexMatrix {
        match self.holonomy.get(&(u, v)) {
            Some(m) => m.clone(),
            None => ComplexMatrix::identity(self.rank),
        }
    }

    /// Per-triangle flatness: g(v0,v1) g(v1,v2) = g(v0,v2).
    pub fn flatness_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.simplices.len() < 2 {
            return out;
        }
        for tri in &self.simplices[1] {
            let (a, b, c) = (tri[0], tri[1], tri[2]);
            let lhs = self.edge_transport(a, b).mul(&self.edge_transport(b, c));
            let rhs = self.edge_transport(a, c);
            let res = lhs.sub(&rhs).max_abs();
            if res > 1e-10 * rhs.max_abs().max(1.0) {
                out.push(format!("triangle {tri:?} violates flatness ({res:.2e})"));
            }
        }
        out
    }

    pub fn to_spec(&self) -> Result<TwistedComplexSpec, TwistedError> {
        let violations = self.flatness_violations();
        if !violations.is_empty() {
            return Err(TwistedError::NotFlat(violations.join("; ")));
        }
        let dimension = self.simplices.len();
        let mut cells = vec![self.vertices];
        for list in &self.simplices {
            cells.push(list.len());
        }
        // index maps for faces
        let mut index: Vec<HashMap<Vec<usize>, usize>> = Vec::new();
        for list in &self.simplices {
            let mut m = HashMap::new();
            for (i, s) in list.iter().enumerate() {
                if m.insert(s.clone(), i).is_some() {
                    return Err(TwistedError::Inconsistent(format!(
                        "duplicate simplex {s:?}"
                    )));
                }
            }
            index.push(m);
        }
        let mut boundaries: Vec<Vec<Vec<BoundaryTerm>>> = Vec::new();
        for d in 1..=dimension {
            let mut per_cell = Vec::with_capacity(cells[d]);
            for s in &self.simplices[d - 1] {
                let mut terms = Vec::with_capacity(s.len());
                for i in 0..s.len() {
                    let mut face: Vec<usize> = s.clone();
                    face.remove(i);
                    let face_id = if d == 1 {
                        face[0]
                    } else {
                        *index[d - 2].get(&face).ok_or_else(|| {
                            TwistedError::Inconsistent(format!(
                                "face {face:?} of {s:?} is missing"
                            ))
                        })?
                    };
                    let sign = if i % 2 == 0 { 1 } else { -1 };
                    let transport = if i == 0 {
                        self.edge_transport(s[0], s[1])
                    } else {
                        ComplexMatrix::identity(self.rank)
                    };
                    terms.push(BoundaryTerm {
                        cell: face_id,
                        sign,
                        transport,
                    });
                }
                per_cell.push(terms);
            }
            boundaries.push(per_cell);
        }
        let mut in_y: Vec<Vec<bool>> = Vec::new();
        in_y.push(
            (0..self.vertices)
                .map(|v| (self.y_simplex)(&[v]))
                .collect(),
        );
        for list in &self.simplices {
            in_y.push(list.iter().map(|s| (self.y_simplex)(s)).collect());
        }
        let spec = TwistedComplexSpec {
            rank: self.rank,
            cells,
            in_y,
            boundaries,
        };
        spec.validate()?;
        Ok(spec)
    }
}

// ---------------------------------------------------------------------------
// bundled fixtures

fn no_subcomplex(_: &[usize]) -> bool {
    false
}

/// Circle with three vertices and three edges; the holonomy sits on the edge
/// (1, 2) in the spanning-tree gauge of the tree {(0,1), (0,2)}.
pub fn circle_spec(holonomy: ComplexMatrix) -> Result<TwistedComplexSpec, TwistedError> {
    let rank = holonomy.rows();
    let mut map = HashMap::new();
    map.insert((1usize, 2usize), holonomy);
    SimplicialSpec {
        rank,
        vertices: 3,
        simplices: vec![vec![vec![0, 1], vec![0, 2], vec![1, 2]]],
        holonomy: map,
        y_simplex: no_subcomplex,
    }
    .to_spec()
}

/// Wrapped level difference in Z/periods, reduced to {-1, 0, 1}.
fn wrapped_step(a: usize, b: usize, period: usize) -> i32 {
    let diff = (b as i64 - a as i64).rem_euclid(period as i64);
    if diff == 0 {
        0
    } else if diff == 1 {
        1
    } else if diff as usize == period - 1 {
        -1
    } else {
        panic!("grid edges only step by one level");
    }
}

fn power(m: &ComplexMatrix, e: i32) -> ComplexMatrix {
    match e {
        0 => ComplexMatrix::identity(m.rows()),
        1 => m.clone(),
        -1 => m.inverse().expect("holonomy must be invertible"),
        _ => unreachable!(),
    }
}

/// Torus from the 3x3 diagonal grid triangulation (9 vertices, 27 edges,
/// 18 triangles). Holonomies `a` (first factor) and `b` (second) must
/// commute for flatness; each edge carries the winding powers of its wrapped
/// grid steps.
pub fn torus_spec(a: ComplexMatrix, b: ComplexMatrix) -> Result<TwistedComplexSpec, TwistedError> {
    let rank = a.rows();
    assert_eq!(b.rows(), rank);
    let id = |i: usize, j: usize| -> usize { (i % 3) * 3 + (j % 3) };
    let mut edges: Vec<Vec<usize>> = Vec::new();
    let mut tris: Vec<Vec<usize>> = Vec::new();
    let push_edge = |edges: &mut Vec<Vec<usize>>, u: usize, v: usize| {
        let mut e = vec![u, v];
        e.sort_unstable();
        if !edges.contains(&e) {
            edges.push(e);
        }
    };
    for i in 0..3 {
        for j in 0..3 {
            let v00 = id(i, j);
            let v10 = id(i + 1, j);
            let v01 = id(i, j + 1);
            let v11 = id(i + 1, j + 1);
            push_edge(&mut edges, v00, v10);
            push_edge(&mut edges, v00, v01);
            push_edge(&mut edges, v00, v11);
            let mut t1 = vec![v00, v10, v11];
            t1.sort_unstable();
            let mut t2 = vec![v00, v01, v11];
            t2.sort_unstable();
            tris.push(t1);
            tris.push(t2);
        }
    }
    // winding steps relative to the grid coordinates
    let coord = |v: usize| -> (usize, usize) { (v / 3, v % 3) };
    let mut map = HashMap::new();
    for e in &edges {
        let (i0, j0) = coord(e[0]);
        let (i1, j1) = coord(e[1]);
        let za = wrapped_step(i0, i1, 3);
        let zb = wrapped_step(j0, j1, 3);
        let g = power(&a, za).mul(&power(&b, zb));
        map.insert((e[0], e[1]), g);
    }
    SimplicialSpec {
        rank,
        vertices: 9,
        simplices: vec![edges, tris],
        holonomy: map,
        y_simplex: no_subcomplex,
    }
    .to_spec()
}

fn solid_torus_triangle_of(v: usize) -> usize {
    v % 3
}

fn solid_torus_level_of(v: usize) -> usize {
    v / 3
}

fn solid_torus_y(s: &[usize]) -> bool {
    // boundary = (edges of the base triangle) x S¹: a simplex is on the
    // boundary torus when its vertices do not use all three base corners
    let mut seen = [false; 3];
    for v in s {
        seen[solid_torus_triangle_of(*v)] = true;
    }
    !(seen[0] && seen[1] && seen[2])
}

/// Solid torus D² × S¹: a triangle base times a three-level circle, prisms
/// split into tetrahedra by the staircase rule. The boundary subcomplex is
/// the torus (∂D²) × S¹; `core` is the holonomy around the S¹ factor.
pub fn solid_torus_spec(core: ComplexMatrix) -> Result<TwistedComplexSpec, TwistedError> {
    let rank = core.rows();
    let vid = |p: usize, level: usize| -> usize { (level % 3) * 3 + p };
    let mut tetra: Vec<Vec<usize>> = Vec::new();
    for level in 0..3 {
        // staircase tetrahedra of the prism between level and level+1
        for k in 0..3 {
            let mut t: Vec<usize> = Vec::new();
            for p in 0..=k {
                t.push(vid(p, level));
            }
            for p in k..3 {
                t.push(vid(p, level + 1));
            }
            t.sort_unstable();
            t.dedup();
            assert_eq!(t.len(), 4);
            tetra.push(t);
        }
    }
    // faces close the complex downward
    let mut tris: Vec<Vec<usize>> = Vec::new();
    let mut edges: Vec<Vec<usize>> = Vec::new();
    for t in &tetra {
        for skip in 0..4 {
            let mut f = t.clone();
            f.remove(skip);
            if !tris.contains(&f) {
                tris.push(f);
            }
        }
    }
    for f in &tris {
        for skip in 0..3 {
            let mut e = f.clone();
            e.remove(skip);
            if !edges.contains(&e) {
                edges.push(e);
            }
        }
    }
    let mut map = HashMap::new();
    for e in &edges {
        let l0 = solid_torus_level_of(e[0]);
        let l1 = solid_torus_level_of(e[1]);
        let z = wrapped_step(l0, l1, 3);
        if z != 0 {
            map.insert((e[0], e[1]), power(&core, z));
        }
    }
    SimplicialSpec {
        rank,
        vertices: 9,
        simplices: vec![edges, tris, tetra],
        holonomy: map,
        y_simplex: solid_torus_y,
    }
    .to_spec()
}
