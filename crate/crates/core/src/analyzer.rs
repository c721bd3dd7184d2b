//! Exhaustive analysis of small function matrices: fooling sets, exact
//! monochromatic covers, deterministic communication complexity, box
//! counting for multi-party problems, and distributional checks.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{input, resource, Error, Result};
use crate::Rational;

/// Cap on the number of cells in any matrix.
pub const MAX_CELLS: usize = 1 << 24;
/// Cap on `|X| * |Y|` for exact covers.
pub const COVER_CELL_CAP: usize = 256;
/// Cap on each side for [`det_cc`].
pub const DET_CC_SIDE_CAP: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cell {
    Zero,
    One,
    Star,
}

impl Cell {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Cell::One
        } else {
            Cell::Zero
        }
    }

    fn symbol(self) -> char {
        match self {
            Cell::Zero => '0',
            Cell::One => '1',
            Cell::Star => '*',
        }
    }

    /// The opposite definite value; `*` has none.
    fn opposite(value: bool) -> Cell {
        Cell::from_bool(!value)
    }
}

/// `k`-dimensional array over {0, 1, *}, stored row-major (last index fastest).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionMatrix {
    dims: Vec<usize>,
    cells: Vec<Cell>,
}

impl FunctionMatrix {
    pub fn new(dims: Vec<usize>, cells: Vec<Cell>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return input("every player needs at least one input");
        }
        let total = dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d));
        match total {
            Some(t) if t <= MAX_CELLS => {
                if t != cells.len() {
                    return input(format!("expected {t} cells, found {}", cells.len()));
                }
            }
            _ => return resource(format!("matrix with dimensions {dims:?} exceeds {MAX_CELLS} cells")),
        }
        Ok(FunctionMatrix { dims, cells })
    }

    pub fn from_fn(dims: Vec<usize>, f: impl Fn(&[usize]) -> Cell) -> Result<Self> {
        let total: usize = dims.iter().product();
        if total > MAX_CELLS {
            return resource(format!("matrix with dimensions {dims:?} exceeds {MAX_CELLS} cells"));
        }
        let mut idx = vec![0; dims.len()];
        let mut cells = Vec::with_capacity(total);
        for _ in 0..total {
            cells.push(f(&idx));
            for p in (0..dims.len()).rev() {
                idx[p] += 1;
                if idx[p] < dims[p] {
                    break;
                }
                idx[p] = 0;
            }
        }
        Self::new(dims, cells)
    }

    pub fn two_party(rows: usize, cols: usize, f: impl Fn(usize, usize) -> Cell) -> Result<Self> {
        Self::from_fn(vec![rows, cols], |i| f(i[0], i[1]))
    }

    /// `EQ` on `n`-bit strings.
    pub fn equality(n: usize) -> Self {
        let size = 1 << n;
        Self::two_party(size, size, |x, y| Cell::from_bool(x == y)).expect("small")
    }

    /// `DISJ` on `n`-bit strings (subsets of an `n`-element ground set).
    pub fn disjointness(n: usize) -> Self {
        let size = 1 << n;
        Self::two_party(size, size, |x, y| Cell::from_bool(x & y == 0)).expect("small")
    }

    /// Unique disjointness: 1 when disjoint, 0 when the sets share exactly
    /// one element, `*` otherwise.
    pub fn unique_disjointness(n: usize) -> Self {
        let size = 1 << n;
        Self::two_party(size, size, |x, y| match (x & y).count_ones() {
            0 => Cell::One,
            1 => Cell::Zero,
            _ => Cell::Star,
        })
        .expect("small")
    }

    /// `k`-party disjointness over subsets of `n` elements: 1 when pairwise
    /// disjoint, 0 when some element lies in every set, `*` otherwise.
    pub fn multi_disjointness(k: usize, n: usize) -> Result<Self> {
        if k < 2 {
            return input("multi-party disjointness needs k >= 2");
        }
        Self::from_fn(vec![1 << n; k], |sets| {
            let common = sets.iter().fold(usize::MAX, |a, &s| a & s);
            let pairwise = sets
                .iter()
                .enumerate()
                .all(|(i, &a)| sets[i + 1..].iter().all(|&b| a & b == 0));
            if pairwise {
                Cell::One
            } else if common != 0 {
                Cell::Zero
            } else {
                Cell::Star
            }
        })
    }

    pub fn arity(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn rows(&self) -> usize {
        self.dims[0]
    }

    pub fn cols(&self) -> usize {
        self.dims[1]
    }

    fn offset(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.dims).fold(0, |acc, (&i, &d)| {
            debug_assert!(i < d);
            acc * d + i
        })
    }

    pub fn get(&self, idx: &[usize]) -> Cell {
        self.cells[self.offset(idx)]
    }

    pub fn get2(&self, row: usize, col: usize) -> Cell {
        self.cells[row * self.dims[1] + col]
    }

    pub fn count(&self, value: Cell) -> usize {
        self.cells.iter().filter(|&&c| c == value).count()
    }

    /// Copy with the given cells replaced by `*`.
    pub fn relaxed(&self, idxs: &[Vec<usize>]) -> Self {
        let mut out = self.clone();
        for idx in idxs {
            let off = out.offset(idx);
            out.cells[off] = Cell::Star;
        }
        out
    }

    fn require_two_party(&self) -> Result<()> {
        if self.arity() != 2 {
            return input(format!("operation needs a two-party matrix, got {} players", self.arity()));
        }
        Ok(())
    }
}

impl fmt::Display for FunctionMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dims: Vec<String> = self.dims.iter().map(|d| d.to_string()).collect();
        writeln!(f, "{} {}", self.dims.len(), dims.join(" "))?;
        let last = *self.dims.last().unwrap();
        for row in self.cells.chunks(last) {
            let line: String = row.iter().map(|c| c.symbol()).collect();
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

impl FromStr for FunctionMatrix {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut lines = s.lines();
        let header: Vec<usize> = lines
            .next()
            .ok_or_else(|| Error::Input("empty matrix text".into()))?
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::Input(format!("bad header token {t:?}"))))
            .collect::<Result<_>>()?;
        let (&k, dims) = header
            .split_first()
            .ok_or_else(|| Error::Input("missing arity".into()))?;
        if dims.len() != k {
            return input(format!("header declares {k} players but lists {} sizes", dims.len()));
        }
        let cells = lines
            .flat_map(|l| l.chars())
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                '0' => Ok(Cell::Zero),
                '1' => Ok(Cell::One),
                '*' => Ok(Cell::Star),
                other => Err(Error::Input(format!("bad cell {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        FunctionMatrix::new(dims.to_vec(), cells)
    }
}

/// Product set `A_1 x ... x A_k` of per-player index lists.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rect {
    pub sides: Vec<Vec<usize>>,
}

impl Rect {
    pub fn pair(rows: Vec<usize>, cols: Vec<usize>) -> Self {
        Rect { sides: vec![rows, cols] }
    }

    pub fn rows(&self) -> &[usize] {
        &self.sides[0]
    }

    pub fn cols(&self) -> &[usize] {
        &self.sides[1]
    }

    pub fn contains(&self, idx: &[usize]) -> bool {
        idx.iter().zip(&self.sides).all(|(i, side)| side.contains(i))
    }

    /// Every cell of the box in row-major order.
    pub fn cells(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new()];
        for side in &self.sides {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    side.iter().map(move |&i| {
                        let mut p = prefix.clone();
                        p.push(i);
                        p
                    })
                })
                .collect();
        }
        out
    }

    fn mask(side: &[usize]) -> u64 {
        side.iter().fold(0, |m, &i| m | 1 << i)
    }
}

fn from_mask(mask: u64) -> Vec<usize> {
    (0..64).filter(|i| (mask >> i) & 1 == 1).collect()
}

/// Checks that every `value` cell is covered and no rectangle touches a
/// cell of the opposite value. Rectangles must have nonempty sides.
pub fn verify_cover(m: &FunctionMatrix, value: bool, rects: &[Rect]) -> Result<()> {
    let opposite = Cell::opposite(value);
    for (i, r) in rects.iter().enumerate() {
        if r.sides.len() != m.arity() || r.sides.iter().any(|s| s.is_empty()) {
            return input(format!("rectangle {i} has the wrong shape"));
        }
        if r.sides.iter().zip(m.dims()).any(|(s, &d)| s.iter().any(|&x| x >= d)) {
            return input(format!("rectangle {i} leaves the matrix"));
        }
        if r.cells().iter().any(|c| m.get(c) == opposite) {
            return Err(Error::Verification(format!("rectangle {i} is not monochromatic")));
        }
    }
    let target = Cell::from_bool(value);
    let dims = m.dims().to_vec();
    let mut idx = vec![0; dims.len()];
    for &cell in m.cells() {
        if cell == target && !rects.iter().any(|r| r.contains(&idx)) {
            return Err(Error::Verification(format!("cell {idx:?} is not covered")));
        }
        for p in (0..dims.len()).rev() {
            idx[p] += 1;
            if idx[p] < dims[p] {
                break;
            }
            idx[p] = 0;
        }
    }
    Ok(())
}

/// Condition (i) and (ii) of a fooling set: `f` is constant on the pairs and
/// every cross pair of two members takes the opposite value on at least one
/// side. A `*` cross cell does not count as opposite.
pub fn verify_fooling_set(m: &FunctionMatrix, pairs: &[(usize, usize)]) -> Result<bool> {
    m.require_two_party()?;
    if pairs.iter().any(|&(x, y)| x >= m.rows() || y >= m.cols()) {
        return input("fooling-set member outside the matrix");
    }
    if let Some(&(x, y)) = pairs.iter().find(|&&(x, y)| m.get2(x, y) == Cell::Star) {
        return input(format!("fooling-set member ({x}, {y}) is a * cell"));
    }
    let Some(&(x0, y0)) = pairs.first() else {
        return Ok(true);
    };
    let value = m.get2(x0, y0);
    if pairs.iter().any(|&(x, y)| m.get2(x, y) != value) {
        return Ok(false);
    }
    let flip = if value == Cell::One { Cell::Zero } else { Cell::One };
    for (i, &(x1, y1)) in pairs.iter().enumerate() {
        for &(x2, y2) in &pairs[i + 1..] {
            if (x1, y1) == (x2, y2) {
                return Ok(false);
            }
            if m.get2(x1, y2) != flip && m.get2(x2, y1) != flip {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Exact minimum cover of the `value` cells by monochromatic rectangles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cover {
    pub size: usize,
    pub rects: Vec<Rect>,
}

/// All inclusion-maximal `value`-monochromatic rectangles that contain at
/// least one `value` cell.
pub fn maximal_rectangles(m: &FunctionMatrix, value: bool) -> Result<Vec<Rect>> {
    m.require_two_party()?;
    let (rows, cols) = (m.rows(), m.cols());
    if rows * cols > COVER_CELL_CAP {
        return resource(format!("{rows}x{cols} matrix exceeds the exact cover cap of {COVER_CELL_CAP} cells"));
    }
    let transpose = rows > 16;
    let (small, large) = if transpose { (cols, rows) } else { (rows, cols) };
    let cell = |s: usize, l: usize| if transpose { m.get2(l, s) } else { m.get2(s, l) };
    let opposite = Cell::opposite(value);
    let target = Cell::from_bool(value);
    let opp_of_small: Vec<u64> = (0..small)
        .map(|s| (0..large).filter(|&l| cell(s, l) == opposite).fold(0, |a, l| a | 1 << l))
        .collect();
    let opp_of_large: Vec<u64> = (0..large)
        .map(|l| (0..small).filter(|&s| cell(s, l) == opposite).fold(0, |a, s| a | 1 << s))
        .collect();
    let all_large = if large == 64 { u64::MAX } else { (1u64 << large) - 1 };
    let all_small = (1u64 << small) - 1;
    let mut out = Vec::new();
    for a in 1..=all_small {
        let blocked = from_mask(a).iter().fold(0, |acc, &s| acc | opp_of_small[s]);
        let b = all_large & !blocked;
        if b == 0 {
            continue;
        }
        let closure = all_small & !from_mask(b).iter().fold(0, |acc, &l| acc | opp_of_large[l]);
        if closure != a {
            continue;
        }
        let (sa, lb) = (from_mask(a), from_mask(b));
        if !sa.iter().any(|&s| lb.iter().any(|&l| cell(s, l) == target)) {
            continue;
        }
        out.push(if transpose { Rect::pair(lb, sa) } else { Rect::pair(sa, lb) });
    }
    Ok(out)
}

pub fn min_cover(m: &FunctionMatrix, value: bool) -> Result<Cover> {
    let rects = maximal_rectangles(m, value)?;
    let target = Cell::from_bool(value);
    let cells: Vec<(usize, usize)> = (0..m.rows())
        .flat_map(|r| (0..m.cols()).map(move |c| (r, c)))
        .filter(|&(r, c)| m.get2(r, c) == target)
        .collect();
    if cells.is_empty() {
        return Ok(Cover { size: 0, rects: Vec::new() });
    }
    let covers: Vec<Vec<u64>> = rects
        .iter()
        .map(|rect| {
            let (rm, cm) = (Rect::mask(rect.rows()), Rect::mask(rect.cols()));
            let mut bits = vec![0u64; cells.len().div_ceil(64)];
            for (i, &(r, c)) in cells.iter().enumerate() {
                if (rm >> r) & 1 == 1 && (cm >> c) & 1 == 1 {
                    bits[i / 64] |= 1 << (i % 64);
                }
            }
            bits
        })
        .collect();
    let mut search = CoverSearch::new(cells.len(), covers);
    let chosen = search.solve();
    let rects: Vec<Rect> = chosen.into_iter().map(|i| rects[i].clone()).collect();
    verify_cover(m, value, &rects)?;
    Ok(Cover { size: rects.len(), rects })
}

/// Branch and bound for unweighted set cover over bitsets.
struct CoverSearch {
    n: usize,
    sets: Vec<Vec<u64>>,
    containing: Vec<Vec<usize>>,
    largest: usize,
    best: Vec<usize>,
}

fn popcount(bits: &[u64]) -> usize {
    bits.iter().map(|w| w.count_ones() as usize).sum()
}

fn has(bits: &[u64], i: usize) -> bool {
    (bits[i / 64] >> (i % 64)) & 1 == 1
}

impl CoverSearch {
    fn new(n: usize, sets: Vec<Vec<u64>>) -> Self {
        let containing = (0..n)
            .map(|e| (0..sets.len()).filter(|&s| has(&sets[s], e)).collect())
            .collect();
        let largest = sets.iter().map(|s| popcount(s)).max().unwrap_or(0);
        CoverSearch { n, sets, containing, largest, best: Vec::new() }
    }

    fn solve(&mut self) -> Vec<usize> {
        let mut uncovered = vec![0u64; self.n.div_ceil(64)];
        for i in 0..self.n {
            uncovered[i / 64] |= 1 << (i % 64);
        }
        self.best = self.greedy(uncovered.clone());
        let mut chosen = Vec::new();
        self.branch(&uncovered, &mut chosen);
        self.best.clone()
    }

    fn greedy(&self, mut uncovered: Vec<u64>) -> Vec<usize> {
        let mut picked = Vec::new();
        while popcount(&uncovered) > 0 {
            let (i, _) = self
                .sets
                .iter()
                .enumerate()
                .map(|(i, s)| (i, s.iter().zip(&uncovered).map(|(a, b)| (a & b).count_ones()).sum::<u32>()))
                .max_by_key(|&(i, gain)| (gain, std::cmp::Reverse(i)))
                .expect("every cell lies in some rectangle");
            for (u, s) in uncovered.iter_mut().zip(&self.sets[i]) {
                *u &= !s;
            }
            picked.push(i);
        }
        picked
    }

    fn branch(&mut self, uncovered: &[u64], chosen: &mut Vec<usize>) {
        let left = popcount(uncovered);
        if left == 0 {
            if chosen.len() < self.best.len() {
                self.best = chosen.clone();
            }
            return;
        }
        if chosen.len() + left.div_ceil(self.largest) >= self.best.len() {
            return;
        }
        let pivot = (0..self.n)
            .filter(|&e| has(uncovered, e))
            .min_by_key(|&e| self.containing[e].len())
            .unwrap();
        for s in self.containing[pivot].clone() {
            let next: Vec<u64> = uncovered.iter().zip(&self.sets[s]).map(|(u, x)| u & !x).collect();
            chosen.push(s);
            self.branch(&next, chosen);
            chosen.pop();
        }
    }
}

/// Exact deterministic communication complexity by recursion over
/// subrectangles, each split being a partition of one side in two.
pub fn det_cc(m: &FunctionMatrix) -> Result<usize> {
    m.require_two_party()?;
    let (rows, cols) = (m.rows(), m.cols());
    if rows > DET_CC_SIDE_CAP || cols > DET_CC_SIDE_CAP {
        return resource(format!("det_cc is capped at {DET_CC_SIDE_CAP}x{DET_CC_SIDE_CAP}, got {rows}x{cols}"));
    }
    let mask_of = |cell: Cell| -> Vec<u16> {
        (0..rows)
            .map(|r| (0..cols).filter(|&c| m.get2(r, c) == cell).fold(0, |a, c| a | 1 << c))
            .collect()
    };
    let ctx = DetCc {
        ones: mask_of(Cell::One),
        zeros: mask_of(Cell::Zero),
        memo: HashMap::new(),
    };
    let mut ctx = ctx;
    Ok(ctx.cc((1 << rows) - 1, (1 << cols) - 1))
}

struct DetCc {
    ones: Vec<u16>,
    zeros: Vec<u16>,
    memo: HashMap<(u16, u16), usize>,
}

fn proper_splits(mask: u16) -> impl Iterator<Item = (u16, u16)> {
    // Each unordered split once: the part holding the lowest element is `a`.
    let low = mask & mask.wrapping_neg();
    let rest = mask & !low;
    let mut sub = rest;
    let mut done = false;
    std::iter::from_fn(move || loop {
        if done {
            return None;
        }
        let a = low | sub;
        if sub == 0 {
            done = true;
        } else {
            sub = (sub - 1) & rest;
        }
        if a != mask {
            return Some((a, mask & !a));
        }
    })
}

impl DetCc {
    fn monochromatic(&self, a: u16, b: u16) -> bool {
        let (mut one, mut zero) = (0, 0);
        for r in from_mask(a as u64) {
            one |= self.ones[r];
            zero |= self.zeros[r];
        }
        one & b == 0 || zero & b == 0
    }

    fn cc(&mut self, a: u16, b: u16) -> usize {
        if self.monochromatic(a, b) {
            return 0;
        }
        if let Some(&v) = self.memo.get(&(a, b)) {
            return v;
        }
        let mut best = usize::MAX;
        for (a0, a1) in proper_splits(a) {
            let left = self.cc(a0, b);
            if left + 1 >= best {
                continue;
            }
            best = best.min(1 + left.max(self.cc(a1, b)));
        }
        for (b0, b1) in proper_splits(b) {
            let left = self.cc(a, b0);
            if left + 1 >= best {
                continue;
            }
            best = best.min(1 + left.max(self.cc(a, b1)));
        }
        self.memo.insert((a, b), best);
        best
    }
}

/// Budget on the number of per-player subset combinations enumerated by
/// [`max_box_ones`].
pub const BOX_SEARCH_BUDGET: u64 = 1 << 24;

/// Largest number of 1-cells in a box containing no 0-cell.
pub fn max_box_ones(m: &FunctionMatrix) -> Result<(usize, Rect)> {
    let dims = m.dims();
    let total: usize = dims.iter().product();
    if total > 1 << 20 {
        return resource(format!("{total} cells exceeds the box search cap of 2^20"));
    }
    let k = dims.len();
    if dims.iter().any(|&d| d > 63) {
        return resource("box search supports at most 63 inputs per player");
    }
    let combos: u64 = dims[..k - 1].iter().map(|&d| 1u64 << d).product();
    if combos > BOX_SEARCH_BUDGET {
        return resource(format!("{combos} subset combinations exceed the box search budget"));
    }
    let zero: Vec<bool> = m.cells().iter().map(|&c| c == Cell::Zero).collect();
    let ones: Vec<u32> = m.cells().iter().map(|&c| (c == Cell::One) as u32).collect();
    let mut search = BoxSearch { dims: dims.to_vec(), best: 0, best_box: Vec::new(), chosen: Vec::new() };
    search.player(0, &zero, &ones);
    let rect = Rect { sides: search.best_box };
    Ok((search.best, rect))
}

struct BoxSearch {
    dims: Vec<usize>,
    best: usize,
    best_box: Vec<Vec<usize>>,
    chosen: Vec<Vec<usize>>,
}

impl BoxSearch {
    /// `zero[x_i, rest]`: some chosen prefix makes the cell 0.
    /// `ones[x_i, rest]`: number of chosen prefixes for which the cell is 1.
    fn player(&mut self, i: usize, zero: &[bool], ones: &[u32]) {
        let d = self.dims[i];
        let tail = zero.len() / d;
        if i + 1 == self.dims.len() {
            let side: Vec<usize> = (0..d).filter(|&x| !zero[x]).collect();
            let count: usize = side.iter().map(|&x| ones[x] as usize).sum();
            if !side.is_empty() && (count > self.best || self.best_box.is_empty()) {
                self.best = count;
                self.best_box = self.chosen.clone();
                self.best_box.push(side);
            }
            return;
        }
        let mut acc_zero = vec![false; tail];
        let mut acc_ones = vec![0u32; tail];
        let mut members = Vec::new();
        self.subsets(i, 0, zero, ones, &mut acc_zero, &mut acc_ones, &mut members);
    }

    #[allow(clippy::too_many_arguments)]
    fn subsets(
        &mut self,
        i: usize,
        start: usize,
        zero: &[bool],
        ones: &[u32],
        acc_zero: &mut Vec<bool>,
        acc_ones: &mut Vec<u32>,
        members: &mut Vec<usize>,
    ) {
        let d = self.dims[i];
        let tail = acc_zero.len();
        for x in start..d {
            let saved = (acc_zero.clone(), acc_ones.clone());
            for t in 0..tail {
                acc_zero[t] |= zero[x * tail + t];
                acc_ones[t] += ones[x * tail + t];
            }
            members.push(x);
            self.chosen.push(members.clone());
            self.player(i + 1, acc_zero, acc_ones);
            self.chosen.pop();
            self.subsets(i, x + 1, zero, ones, acc_zero, acc_ones, members);
            members.pop();
            *acc_zero = saved.0;
            *acc_ones = saved.1;
        }
    }
}

/// Deterministic two-party protocol tree. Internal nodes split on the
/// speaker's input: inputs in `ones` send 1 and continue at `one`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProtocolTree {
    Leaf(bool),
    Alice { ones: Vec<bool>, zero: Box<ProtocolTree>, one: Box<ProtocolTree> },
    Bob { ones: Vec<bool>, zero: Box<ProtocolTree>, one: Box<ProtocolTree> },
}

impl ProtocolTree {
    pub fn eval(&self, x: usize, y: usize) -> bool {
        match self {
            ProtocolTree::Leaf(v) => *v,
            ProtocolTree::Alice { ones, zero, one } => {
                if ones[x] { one.eval(x, y) } else { zero.eval(x, y) }
            }
            ProtocolTree::Bob { ones, zero, one } => {
                if ones[y] { one.eval(x, y) } else { zero.eval(x, y) }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            ProtocolTree::Leaf(_) => 0,
            ProtocolTree::Alice { zero, one, .. } | ProtocolTree::Bob { zero, one, .. } => {
                1 + zero.depth().max(one.depth())
            }
        }
    }

    /// One-way protocol: Alice sends the `bits`-bit message `message(x)`
    /// (least significant bit first) and Bob announces `decide(message, y)`.
    pub fn one_way(
        rows: usize,
        cols: usize,
        bits: usize,
        message: &dyn Fn(usize) -> u64,
        decide: &dyn Fn(u64, usize) -> bool,
    ) -> Self {
        fn build(
            rows: usize,
            cols: usize,
            bits: usize,
            level: usize,
            prefix: u64,
            message: &dyn Fn(usize) -> u64,
            decide: &dyn Fn(u64, usize) -> bool,
        ) -> ProtocolTree {
            if level == bits {
                return ProtocolTree::Bob {
                    ones: (0..cols).map(|y| decide(prefix, y)).collect(),
                    zero: Box::new(ProtocolTree::Leaf(false)),
                    one: Box::new(ProtocolTree::Leaf(true)),
                };
            }
            ProtocolTree::Alice {
                ones: (0..rows).map(|x| (message(x) >> level) & 1 == 1).collect(),
                zero: Box::new(build(rows, cols, bits, level + 1, prefix, message, decide)),
                one: Box::new(build(rows, cols, bits, level + 1, prefix | 1 << level, message, decide)),
            }
        }
        build(rows, cols, bits, 0, 0, message, decide)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct YaoReport {
    /// Largest error probability of the mixture over definite inputs.
    pub worst_case_error: Rational,
    /// Distributional error of each component under `D`.
    pub component_errors: Vec<Rational>,
    /// Index of a component with minimum distributional error.
    pub best_component: usize,
}

/// Compares a public-coin protocol, given as a weighted mixture of
/// deterministic trees, with its components under the input distribution
/// `dist` (row-major weights over the matrix cells). `*` cells never count
/// as errors.
pub fn yao_check(m: &FunctionMatrix, dist: &[Rational], mixture: &[(Rational, ProtocolTree)]) -> Result<YaoReport> {
    m.require_two_party()?;
    let (rows, cols) = (m.rows(), m.cols());
    if dist.len() != rows * cols {
        return input("distribution must weight every cell");
    }
    if dist.iter().sum::<Rational>() != Rational::one() || mixture.iter().map(|(w, _)| w).sum::<Rational>() != Rational::one() {
        return input("weights must sum to 1");
    }
    if dist.iter().chain(mixture.iter().map(|(w, _)| w)).any(|w| *w < Rational::zero()) {
        return input("weights must be nonnegative");
    }
    let wrong = |tree: &ProtocolTree, x: usize, y: usize| match m.get2(x, y) {
        Cell::Star => false,
        c => tree.eval(x, y) != (c == Cell::One),
    };
    let mut worst = Rational::zero();
    for x in 0..rows {
        for y in 0..cols {
            let err: Rational = mixture.iter().filter(|(_, t)| wrong(t, x, y)).map(|(w, _)| w).sum();
            if err > worst {
                worst = err;
            }
        }
    }
    let component_errors: Vec<Rational> = mixture
        .iter()
        .map(|(_, t)| {
            (0..rows * cols)
                .filter(|&i| wrong(t, i / cols, i % cols))
                .map(|i| &dist[i])
                .sum()
        })
        .collect();
    let best_component = (0..component_errors.len())
        .min_by(|&a, &b| component_errors[a].cmp(&component_errors[b]))
        .ok_or_else(|| Error::Input("empty mixture".into()))?;
    if component_errors[best_component] > worst {
        return Err(Error::Verification("best component is worse than the mixture's worst case".into()));
    }
    Ok(YaoReport { worst_case_error: worst, component_errors, best_component })
}

/// Number of points within Hamming distance `r` of a point in `{0,1}^n`.
pub fn ball_volume(n: u64, r: u64) -> BigUint {
    let mut term = BigUint::one();
    let mut total = BigUint::one();
    for i in 1..=r.min(n) {
        term = term * BigUint::from(n - i + 1) / BigUint::from(i);
        total += &term;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let m = FunctionMatrix::unique_disjointness(1);
        let text = m.to_string();
        assert_eq!(text, "2 2 2\n11\n10\n");
        assert_eq!(text.parse::<FunctionMatrix>().unwrap(), m);
        assert!("2 2 2\n11\n1".parse::<FunctionMatrix>().is_err());
        assert!("1 2\n1x".parse::<FunctionMatrix>().is_err());
    }

    #[test]
    fn cover_examples() {
        assert_eq!(min_cover(&FunctionMatrix::equality(2), true).unwrap().size, 4);
        assert_eq!(min_cover(&FunctionMatrix::disjointness(1), true).unwrap().size, 2);
        let ones = FunctionMatrix::two_party(4, 4, |_, _| Cell::One).unwrap();
        assert_eq!(min_cover(&ones, true).unwrap().size, 1);
        assert!(matches!(min_cover(&FunctionMatrix::equality(5), true), Err(Error::Resource(_))));
    }

    #[test]
    fn det_cc_examples() {
        let constant = FunctionMatrix::two_party(3, 5, |_, _| Cell::Zero).unwrap();
        assert_eq!(det_cc(&constant).unwrap(), 0);
        assert_eq!(det_cc(&FunctionMatrix::equality(2)).unwrap(), 3);
        assert_eq!(det_cc(&FunctionMatrix::disjointness(1)).unwrap(), 2);
    }

    #[test]
    fn splits_enumerated_once() {
        let splits: Vec<_> = proper_splits(0b1011).collect();
        assert_eq!(splits.len(), 3);
        assert!(splits.iter().all(|&(a, b)| a & b == 0 && a | b == 0b1011 && a & 1 == 1));
    }

    #[test]
    fn fooling_set_examples() {
        let eq = FunctionMatrix::equality(2);
        let diag: Vec<_> = (0..4).map(|x| (x, x)).collect();
        assert!(verify_fooling_set(&eq, &diag).unwrap());
        let disj = FunctionMatrix::disjointness(2);
        let comp: Vec<_> = (0..4).map(|x| (x, 3 - x)).collect();
        assert!(verify_fooling_set(&disj, &comp).unwrap());
        assert!(!verify_fooling_set(&disj, &[(0, 0), (1, 1)]).unwrap());
        assert!(!verify_fooling_set(&disj, &[(0, 0), (2, 2)]).unwrap());
        let ud = FunctionMatrix::unique_disjointness(2);
        assert!(verify_fooling_set(&ud, &[(3, 3)]).is_err());
    }

    #[test]
    fn box_counts() {
        let (count, rect) = max_box_ones(&FunctionMatrix::multi_disjointness(2, 2).unwrap()).unwrap();
        assert_eq!(count, 4);
        assert!(rect.cells().iter().all(|c| c.len() == 2));
        let (ud, _) = max_box_ones(&FunctionMatrix::unique_disjointness(2)).unwrap();
        assert_eq!(ud, 4);
    }

    #[test]
    fn ball_volumes() {
        assert_eq!(ball_volume(4, 1), BigUint::from(5u32));
        assert_eq!(ball_volume(4, 4), BigUint::from(16u32));
        assert_eq!(ball_volume(4, 9), BigUint::from(16u32));
    }
}
