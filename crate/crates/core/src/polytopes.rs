//! Linear systems over any [`Scalar`], a two-phase simplex with Bland's
//! rule, the permutahedron extended formulation, correlation-polytope
//! slack matrices, and the passage between supports, covers and
//! nondeterministic face-vertex protocols.

use std::fmt;
use std::str::FromStr;

use crate::analyzer::{verify_cover, Cell, FunctionMatrix, Rect};
use crate::bits::BitVector;
use crate::error::{input, Error, Result};
use crate::protocols::{name_width, ProtocolOutcome, Speaker, Transcript};
use crate::scalar::{rational_string, Scalar};
use crate::Rational;

/// Constraints `a . (x, y) <= b` and `a . (x, y) = b` over `n` original
/// variables `x` and `p` auxiliary variables `y`. All variables are free;
/// sign constraints are ordinary rows.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem<T> {
    n: usize,
    p: usize,
    le: Vec<(Vec<T>, T)>,
    eq: Vec<(Vec<T>, T)>,
}

impl<T: Scalar> LinearSystem<T> {
    pub fn new(n: usize, p: usize) -> Self {
        LinearSystem { n, p, le: Vec::new(), eq: Vec::new() }
    }

    pub fn width(&self) -> usize {
        self.n + self.p
    }

    pub fn x_vars(&self) -> usize {
        self.n
    }

    pub fn y_vars(&self) -> usize {
        self.p
    }

    pub fn add_le(&mut self, coeffs: Vec<T>, rhs: T) -> Result<()> {
        self.check_width(&coeffs)?;
        self.le.push((coeffs, rhs));
        Ok(())
    }

    pub fn add_eq(&mut self, coeffs: Vec<T>, rhs: T) -> Result<()> {
        self.check_width(&coeffs)?;
        self.eq.push((coeffs, rhs));
        Ok(())
    }

    fn check_width(&self, coeffs: &[T]) -> Result<()> {
        if coeffs.len() != self.width() {
            return input(format!("row has {} coefficients, system has {} variables", coeffs.len(), self.width()));
        }
        Ok(())
    }

    pub fn le_rows(&self) -> &[(Vec<T>, T)] {
        &self.le
    }

    pub fn eq_rows(&self) -> &[(Vec<T>, T)] {
        &self.eq
    }

    pub fn constraint_count(&self) -> usize {
        self.le.len() + self.eq.len()
    }

    /// Exact membership test for a point `(x, y)`.
    pub fn satisfies(&self, point: &[T]) -> bool {
        let dot = |a: &[T]| a.iter().zip(point).fold(T::zero(), |acc, (u, v)| acc + u.clone() * v.clone());
        point.len() == self.width()
            && self.le.iter().all(|(a, b)| !(dot(a) - b.clone()).is_positive_strict())
            && self.eq.iter().all(|(a, b)| (dot(a) - b.clone()).is_negligible())
    }

    /// Same system with rows reordered by `order` (a permutation of all
    /// rows, inequalities first).
    pub fn permuted(&self, order: &[usize]) -> Self {
        let rows: Vec<(bool, (Vec<T>, T))> = self
            .le
            .iter()
            .map(|r| (true, r.clone()))
            .chain(self.eq.iter().map(|r| (false, r.clone())))
            .collect();
        let mut out = Self::new(self.n, self.p);
        for &i in order {
            let (is_le, row) = rows[i].clone();
            if is_le {
                out.le.push(row);
            } else {
                out.eq.push(row);
            }
        }
        out
    }

    /// Converts every coefficient with `f`.
    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> LinearSystem<U> {
        let conv = |rows: &[(Vec<T>, T)]| rows.iter().map(|(a, b)| (a.iter().map(&f).collect(), f(b))).collect();
        LinearSystem { n: self.n, p: self.p, le: conv(&self.le), eq: conv(&self.eq) }
    }
}

impl fmt::Display for LinearSystem<Rational> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "vars {} {}", self.n, self.p)?;
        for (tag, rows) in [("le", &self.le), ("eq", &self.eq)] {
            for (a, b) in rows {
                let toks: Vec<String> = a.iter().chain(std::iter::once(b)).map(rational_string).collect();
                writeln!(f, "{tag} {}", toks.join(" "))?;
            }
        }
        Ok(())
    }
}

impl FromStr for LinearSystem<Rational> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut lines = s.lines().filter(|l| !l.trim().is_empty());
        let header: Vec<&str> = lines.next().unwrap_or_default().split_whitespace().collect();
        let (n, p) = match header.as_slice() {
            ["vars", n, p] => (
                n.parse().map_err(|_| Error::Input("bad variable count".into()))?,
                p.parse().map_err(|_| Error::Input("bad variable count".into()))?,
            ),
            _ => return input("expected `vars n p` header"),
        };
        let mut sys = LinearSystem::new(n, p);
        for line in lines {
            let mut toks = line.split_whitespace();
            let tag = toks.next().unwrap_or_default();
            let mut vals = toks
                .map(|t| t.parse::<Rational>().map_err(|_| Error::Input(format!("bad rational {t:?}"))))
                .collect::<Result<Vec<_>>>()?;
            let rhs = vals.pop().ok_or_else(|| Error::Input("empty row".into()))?;
            match tag {
                "le" => sys.add_le(vals, rhs)?,
                "eq" => sys.add_eq(vals, rhs)?,
                other => return input(format!("unknown row tag {other:?}")),
            }
        }
        Ok(sys)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution<T> {
    pub value: T,
    /// Values of all `n + p` variables at an optimal basic solution.
    pub point: Vec<T>,
}

impl<T: Clone> LpSolution<T> {
    pub fn x(&self, n: usize) -> Vec<T> {
        self.point[..n].to_vec()
    }
}

/// Dense two-phase simplex tableau for `max c.v, A v = b, v >= 0, b >= 0`.
pub struct Simplex<T> {
    rows: Vec<Vec<T>>,
    basis: Vec<usize>,
    obj: Vec<T>,
    cols: usize,
}

impl<T: Scalar> Simplex<T> {
    fn pivot(&mut self, r: usize, c: usize) {
        let inv = T::one() / self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            *v = v.clone() * inv.clone();
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r && !row[c].is_negligible() {
                let f = row[c].clone();
                for (v, p) in row.iter_mut().zip(&pivot_row) {
                    *v = v.clone() - f.clone() * p.clone();
                }
            }
        }
        if !self.obj[c].is_negligible() {
            let f = self.obj[c].clone();
            for (v, p) in self.obj.iter_mut().zip(&pivot_row) {
                *v = v.clone() - f.clone() * p.clone();
            }
        }
        self.basis[r] = c;
    }

    /// Bland's rule on columns `0..limit`; `Err(Unbounded)` when a column
    /// with negative reduced cost has no positive entry.
    fn optimize(&mut self, limit: usize) -> Result<()> {
        let rhs = self.cols;
        loop {
            let Some(c) = (0..limit).find(|&j| self.obj[j].is_negative_strict()) else {
                return Ok(());
            };
            let mut best: Option<(usize, T)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[c].is_positive_strict() {
                    continue;
                }
                let ratio = row[rhs].clone() / row[c].clone();
                let better = match &best {
                    None => true,
                    Some((bi, bv)) => {
                        let diff = ratio.clone() - bv.clone();
                        diff.is_negative_strict() || (diff.is_negligible() && self.basis[i] < self.basis[*bi])
                    }
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, c),
                None => return Err(Error::Unbounded),
            }
        }
    }

    /// Maximizes `c . v` subject to `a v = b`, `v >= 0`.
    pub fn solve_standard(a: Vec<Vec<T>>, b: Vec<T>, c: &[T]) -> Result<(T, Vec<T>)> {
        let m = a.len();
        let nv = c.len();
        let cols = nv + m;
        let mut rows = Vec::with_capacity(m);
        for (i, (mut row, rhs)) in a.into_iter().zip(b).enumerate() {
            let flip = rhs.is_negative();
            let mut full: Vec<T> = Vec::with_capacity(cols + 1);
            if flip {
                row.iter_mut().for_each(|v| *v = -v.clone());
            }
            full.extend(row);
            full.extend((0..m).map(|j| if j == i { T::one() } else { T::zero() }));
            full.push(if flip { -rhs } else { rhs });
            rows.push(full);
        }
        let mut obj = vec![T::zero(); cols + 1];
        for row in &rows {
            for j in (0..nv).chain(std::iter::once(cols)) {
                obj[j] = obj[j].clone() - row[j].clone();
            }
        }
        let mut tab = Simplex { rows, basis: (nv..cols).collect(), obj, cols };
        tab.optimize(nv)?;
        if tab.obj[cols].is_negative_strict() {
            return Err(Error::Infeasible);
        }
        // Drive artificial variables out of the basis, dropping redundant rows.
        let mut i = 0;
        while i < tab.rows.len() {
            if tab.basis[i] >= nv {
                match (0..nv).find(|&j| !tab.rows[i][j].is_negligible()) {
                    Some(j) => tab.pivot(i, j),
                    None => {
                        tab.rows.remove(i);
                        tab.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
        for row in tab.rows.iter_mut() {
            let rhs = row[cols].clone();
            row.truncate(nv);
            row.push(rhs);
        }
        tab.cols = nv;
        let mut obj: Vec<T> = c.iter().map(|v| -v.clone()).collect();
        obj.push(T::zero());
        for (row, &bcol) in tab.rows.iter().zip(&tab.basis) {
            let cb = c[bcol].clone();
            if cb.is_negligible() {
                continue;
            }
            for (o, v) in obj.iter_mut().zip(row) {
                *o = o.clone() + cb.clone() * v.clone();
            }
        }
        tab.obj = obj;
        tab.optimize(nv)?;
        let mut point = vec![T::zero(); nv];
        for (row, &bcol) in tab.rows.iter().zip(&tab.basis) {
            point[bcol] = row[nv].clone();
        }
        Ok((tab.obj[nv].clone(), point))
    }
}

/// Maximizes `objective . x` over the system (the objective ignores `y`).
/// Free variables are split as `v = v+ - v-` and inequalities get slacks.
pub fn lp_optimize<T: Scalar>(sys: &LinearSystem<T>, objective: &[T]) -> Result<LpSolution<T>> {
    if objective.len() != sys.n {
        return input(format!("objective has {} entries, system has {} x variables", objective.len(), sys.n));
    }
    let w = sys.width();
    let slacks = sys.le.len();
    let nv = 2 * w + slacks;
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (k, (row, rhs)) in sys.le.iter().chain(&sys.eq).enumerate() {
        let mut full = Vec::with_capacity(nv);
        full.extend(row.iter().cloned());
        full.extend(row.iter().map(|v| -v.clone()));
        full.extend((0..slacks).map(|s| if s == k { T::one() } else { T::zero() }));
        a.push(full);
        b.push(rhs.clone());
    }
    let mut c = vec![T::zero(); nv];
    for (i, v) in objective.iter().enumerate() {
        c[i] = v.clone();
        c[w + i] = -v.clone();
    }
    let (value, v) = Simplex::solve_standard(a, b, &c)?;
    let point = (0..w).map(|i| v[i].clone() - v[w + i].clone()).collect();
    Ok(LpSolution { value, point })
}

/// Extended formulation of the permutahedron in `x` (n) and `y` (n^2,
/// row-major `y_ij`): `y >= 0`, every row and column of `y` sums to 1, and
/// `x_i = sum_j j y_ij`. That is `n^2` inequalities and `3n` equalities.
pub fn permutahedron_ef<T: Scalar>(n: usize) -> Result<LinearSystem<T>> {
    if !(2..=5).contains(&n) {
        return input(format!("permutahedron size {n} outside 2..=5"));
    }
    let w = n + n * n;
    let y = |i: usize, j: usize| n + i * n + j;
    let unit = |idx: &[usize], scale: &dyn Fn(usize) -> T| {
        let mut row = vec![T::zero(); w];
        for (k, &c) in idx.iter().enumerate() {
            row[c] = scale(k);
        }
        row
    };
    let mut sys = LinearSystem::new(n, n * n);
    for i in 0..n {
        for j in 0..n {
            sys.add_le(unit(&[y(i, j)], &|_| -T::one()), T::zero())?;
        }
    }
    for i in 0..n {
        let cells: Vec<usize> = (0..n).map(|j| y(i, j)).collect();
        sys.add_eq(unit(&cells, &|_| T::one()), T::one())?;
    }
    for j in 0..n {
        let cells: Vec<usize> = (0..n).map(|i| y(i, j)).collect();
        sys.add_eq(unit(&cells, &|_| T::one()), T::one())?;
    }
    for i in 0..n {
        let mut row = vec![T::zero(); w];
        row[i] = T::one();
        for j in 0..n {
            row[y(i, j)] = -T::from_int(j as i64 + 1);
        }
        sys.add_eq(row, T::zero())?;
    }
    Ok(sys)
}

/// `(x, y)` for the permutation `perm` (0-based images): `x_i = perm[i] + 1`
/// and `y` its permutation matrix.
pub fn permutation_point<T: Scalar>(perm: &[usize]) -> Vec<T> {
    let n = perm.len();
    let mut v = vec![T::zero(); n + n * n];
    for (i, &p) in perm.iter().enumerate() {
        v[i] = T::from_int(p as i64 + 1);
        v[n + i * n + p] = T::one();
    }
    v
}

/// Faces `(a, b)` meaning `a . v <= b`, vertices `v`, entries `b - a . v`.
#[derive(Debug, Clone, PartialEq)]
pub struct SlackMatrix<T> {
    pub faces: Vec<(Vec<T>, T)>,
    pub vertices: Vec<Vec<T>>,
    pub entries: Vec<Vec<T>>,
}

impl<T: Scalar> SlackMatrix<T> {
    pub fn from_faces(faces: Vec<(Vec<T>, T)>, vertices: Vec<Vec<T>>) -> Result<Self> {
        let mut entries = Vec::with_capacity(faces.len());
        for (a, b) in &faces {
            let row: Vec<T> = vertices
                .iter()
                .map(|v| b.clone() - a.iter().zip(v).fold(T::zero(), |acc, (x, y)| acc + x.clone() * y.clone()))
                .collect();
            if row.iter().any(|e| e.is_negative_strict()) {
                return Err(Error::Verification("face inequality is violated by a vertex".into()));
            }
            entries.push(row);
        }
        Ok(SlackMatrix { faces, vertices, entries })
    }

    /// 1 where the slack is positive, 0 where it vanishes.
    pub fn support(&self) -> FunctionMatrix {
        let cols = self.vertices.len();
        FunctionMatrix::two_party(self.faces.len(), cols, |r, c| Cell::from_bool(!self.entries[r][c].is_negligible()))
            .expect("slack matrices are small")
    }
}

/// Face of the correlation polytope for `S` (bitmask over `n` elements):
/// `sum_{i in S} y_ii - sum_{i != j in S} y_ij <= 1`.
pub fn cor_face<T: Scalar>(n: usize, s: usize) -> (Vec<T>, T) {
    let mut a = vec![T::zero(); n * n];
    for i in (0..n).filter(|i| (s >> i) & 1 == 1) {
        for j in (0..n).filter(|j| (s >> j) & 1 == 1) {
            a[i * n + j] = if i == j { T::one() } else { -T::one() };
        }
    }
    (a, T::one())
}

/// Vertex `x_R x_R^T` for the bitmask `R`.
pub fn cor_vertex<T: Scalar>(n: usize, r: usize) -> Vec<T> {
    let mut v = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..n {
            if (r >> i) & 1 == 1 && (r >> j) & 1 == 1 {
                v[i * n + j] = T::one();
            }
        }
    }
    v
}

/// Slack matrix of all `2^n` faces against all `2^n` vertices, indexed by
/// bitmask.
pub fn cor_slack<T: Scalar>(n: usize) -> Result<SlackMatrix<T>> {
    if n > 4 {
        return input(format!("correlation slack matrix capped at n = 4, got {n}"));
    }
    let faces = (0..1 << n).map(|s| cor_face(n, s)).collect();
    let vertices = (0..1 << n).map(|r| cor_vertex(n, r)).collect();
    SlackMatrix::from_faces(faces, vertices)
}

/// Nondeterministic protocol from a 1-cover: the prover names a rectangle
/// in `ceil(log2 t)` bits and each party checks its own side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverProtocol {
    rects: Vec<Rect>,
}

impl CoverProtocol {
    pub fn cost(&self) -> usize {
        name_width(self.rects.len())
    }

    pub fn rects(&self) -> &[Rect] {
        &self.rects
    }

    /// The prover names the first rectangle containing `(row, col)`, or
    /// rectangle 0 when none does; output 1 iff both parties accept.
    pub fn run(&self, row: usize, col: usize) -> ProtocolOutcome {
        let named = self.rects.iter().position(|r| r.contains(&[row, col])).unwrap_or(0);
        let mut transcript = Transcript::new();
        transcript.push(Speaker::Prover, BitVector::from_u64(named as u64, self.cost()));
        let rect = &self.rects[named];
        let output = rect.rows().contains(&row) && rect.cols().contains(&col);
        ProtocolOutcome { output, transcript }
    }
}

pub fn fv_protocol_from_cover(support: &FunctionMatrix, cover: Vec<Rect>) -> Result<CoverProtocol> {
    if cover.is_empty() {
        return input("cover is empty");
    }
    verify_cover(support, true, &cover).map_err(|e| Error::Input(format!("invalid cover: {e}")))?;
    Ok(CoverProtocol { rects: cover })
}

/// Rectangle `j` is (rows where `T[., j] > 0`) x (cols where `U[j, .] > 0`);
/// empty rectangles are skipped.
pub fn factorization_to_cover<T: Scalar>(t: &[Vec<T>], u: &[Vec<T>]) -> Result<Vec<Rect>> {
    let inner = u.len();
    if t.iter().any(|r| r.len() != inner) {
        return input("inner dimensions disagree");
    }
    if t.iter().chain(u).flatten().any(|v| v.is_negative_strict()) {
        return input("factorization has a negative entry");
    }
    Ok((0..inner)
        .map(|j| {
            let rows: Vec<usize> = (0..t.len()).filter(|&r| t[r][j].is_positive_strict()).collect();
            let cols: Vec<usize> = (0..u[j].len()).filter(|&c| u[j][c].is_positive_strict()).collect();
            Rect::pair(rows, cols)
        })
        .filter(|r| !r.rows().is_empty() && !r.cols().is_empty())
        .collect())
}

pub fn mat_mul<T: Scalar>(a: &[Vec<T>], b: &[Vec<T>]) -> Vec<Vec<T>> {
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|c| row.iter().zip(b).fold(T::zero(), |acc, (x, brow)| acc + x.clone() * brow[c].clone()))
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;

    #[test]
    fn permutahedron_shape() {
        let sys: LinearSystem<Rational> = permutahedron_ef(3).unwrap();
        assert_eq!(sys.constraint_count(), 18);
        assert_eq!((sys.x_vars(), sys.y_vars()), (3, 9));
        assert!(sys.satisfies(&permutation_point(&[2, 0, 1])));
        let text = sys.to_string();
        assert_eq!(text.parse::<LinearSystem<Rational>>().unwrap(), sys);
    }

    #[test]
    fn permutahedron_optimum() {
        let sys: LinearSystem<Rational> = permutahedron_ef(3).unwrap();
        let sol = lp_optimize(&sys, &[int(1), int(2), int(3)]).unwrap();
        assert_eq!(sol.value, int(14));
        assert_eq!(sol.x(3), vec![int(1), int(2), int(3)]);
        let zero = lp_optimize(&sys, &[int(0), int(0), int(0)]).unwrap();
        assert_eq!(zero.value, int(0));
        let float: LinearSystem<f64> = permutahedron_ef(3).unwrap();
        let sol = lp_optimize(&float, &[1.0, 2.0, 3.0]).unwrap();
        assert!((sol.value - 14.0).abs() < 1e-9);
    }

    #[test]
    fn non_permutation_is_infeasible() {
        let mut sys: LinearSystem<Rational> = permutahedron_ef(3).unwrap();
        for (i, v) in [1, 1, 3].into_iter().enumerate() {
            let mut row = vec![int(0); sys.width()];
            row[i] = int(1);
            sys.add_eq(row, int(v)).unwrap();
        }
        assert_eq!(lp_optimize(&sys, &[int(0), int(0), int(0)]), Err(Error::Infeasible));
    }

    #[test]
    fn unbounded_detected() {
        let mut sys: LinearSystem<Rational> = LinearSystem::new(1, 0);
        sys.add_le(vec![int(-1)], int(0)).unwrap();
        assert_eq!(lp_optimize(&sys, &[int(1)]), Err(Error::Unbounded));
    }

    #[test]
    fn slack_examples() {
        let s: SlackMatrix<Rational> = cor_slack(2).unwrap();
        assert_eq!(s.entries[0b01][0b01], int(0));
        assert_eq!(s.entries[0b11][0b00], int(1));
    }

    #[test]
    fn cover_protocol_validation() {
        let ones = FunctionMatrix::two_party(2, 2, |_, _| Cell::One).unwrap();
        let p = fv_protocol_from_cover(&ones, vec![Rect::pair(vec![0, 1], vec![0, 1])]).unwrap();
        assert_eq!(p.cost(), 0);
        assert!(p.run(1, 0).output);
        let disj = FunctionMatrix::disjointness(1);
        assert!(fv_protocol_from_cover(&disj, vec![Rect::pair(vec![0, 1], vec![0, 1])]).is_err());
    }

    #[test]
    fn factorization_examples() {
        let col = vec![vec![int(1)], vec![int(2)]];
        let row = vec![vec![int(3), int(1)]];
        assert_eq!(factorization_to_cover(&col, &row).unwrap(), vec![Rect::pair(vec![0, 1], vec![0, 1])]);
        let id: Vec<Vec<Rational>> = (0..4).map(|i| (0..4).map(|j| int((i == j) as i64)).collect()).collect();
        let rects = factorization_to_cover(&id, &id).unwrap();
        assert_eq!(rects.len(), 4);
        assert!(rects.iter().all(|r| r.rows().len() == 1 && r.cols().len() == 1));
        assert!(factorization_to_cover(&[vec![int(-1)]], &[vec![int(1)]]).is_err());
    }
}
