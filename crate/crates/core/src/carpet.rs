//! Geometry of the standard planar Sierpinski carpet.
//!
//! The carpet lives on the square `[-1/2, 1/2]^2` and is generated by eight
//! contractions of ratio `1/3`, one per fixed point on the boundary. All
//! geometric predicates use exact integer lattice coordinates: a value at
//! denominator level `L` stands for `X / (4 * 3^L)`, so a level-`L` cell has
//! side exactly 4 and the unit square is `[-2 * 3^L, 2 * 3^L]^2`.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::CarpetError;

/// Number of similitudes.
pub const N_MAPS: usize = 8;
/// Inverse contraction ratio.
pub const SCALE: i64 = 3;
/// Longest word that fits the packed representation.
pub const MAX_WORD_LEN: usize = 21;

/// Fixed points `p_1 .. p_8`, doubled so that they are integers.
const FIXED_POINTS_X2: [(i64, i64); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
];

/// Position of the child cell `f_i(K)` inside the 3x3 grid of its parent.
const CELL_OFFSETS: [(u64, u64); 8] = [
    (0, 0),
    (1, 0),
    (2, 0),
    (2, 1),
    (2, 2),
    (1, 2),
    (0, 2),
    (0, 1),
];

/// `GRID_SYMBOL[dy][dx]`, 0 marks the removed middle square.
const GRID_SYMBOL: [[u8; 3]; 3] = [[1, 2, 3], [8, 0, 4], [7, 6, 5]];

/// Checks a symbol is in `1..=8`.
pub fn check_symbol(s: u8) -> Result<u8, CarpetError> {
    if (1..=8).contains(&s) {
        Ok(s)
    } else {
        Err(CarpetError::InvalidSymbol(s))
    }
}

/// Fixed point `p_i` as a pair of halves: returns `(2 x, 2 y)`.
pub fn fixed_point_x2(i: u8) -> Result<(i64, i64), CarpetError> {
    let i = check_symbol(i)?;
    Ok(FIXED_POINTS_X2[usize::from(i - 1)])
}

/// Grid offset of the child cell for symbol `i`.
pub fn cell_offset(i: u8) -> Result<(u64, u64), CarpetError> {
    let i = check_symbol(i)?;
    Ok(CELL_OFFSETS[usize::from(i - 1)])
}

/// Symbol occupying grid position `(dx, dy)`, `None` for the hole.
pub fn symbol_at(dx: u64, dy: u64) -> Option<u8> {
    if dx > 2 || dy > 2 {
        return None;
    }
    match GRID_SYMBOL[dy as usize][dx as usize] {
        0 => None,
        s => Some(s),
    }
}

pub(crate) fn pow3(k: u32) -> i64 {
    3i64.pow(k)
}

/// A finite word over `{1..8}`, packed as base-8 digits (`symbol - 1`),
/// most significant symbol first.
///
/// Ordering is by length and then lexicographic, which for a fixed length
/// agrees with the numeric order of [`Word::code`].
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Word {
    len: u8,
    code: u64,
}

impl Word {
    /// The empty word.
    pub const EMPTY: Word = Word { len: 0, code: 0 };

    pub fn new(symbols: &[u8]) -> Result<Self, CarpetError> {
        if symbols.len() > MAX_WORD_LEN {
            return Err(CarpetError::WordTooLong(symbols.len()));
        }
        let mut code = 0u64;
        for &s in symbols {
            code = code * 8 + u64::from(check_symbol(s)? - 1);
        }
        Ok(Word {
            len: symbols.len() as u8,
            code,
        })
    }

    /// Word of length `len` whose packed digits equal `code`.
    pub fn from_code(len: usize, code: u64) -> Result<Self, CarpetError> {
        if len > MAX_WORD_LEN {
            return Err(CarpetError::WordTooLong(len));
        }
        if len < MAX_WORD_LEN && code >= 1u64 << (3 * len) {
            return Err(CarpetError::InvalidWordCode { len, code });
        }
        Ok(Word {
            len: len as u8,
            code,
        })
    }

    pub fn len(&self) -> usize {
        usize::from(self.len)
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Packed digits; equals the index of the word in lexicographic order
    /// among words of the same length.
    pub fn code(&self) -> u64 {
        self.code
    }

    /// Symbol at position `k` (0-based, from the left).
    pub fn symbol(&self, k: usize) -> u8 {
        assert!(k < self.len(), "symbol index out of range");
        let shift = 3 * (self.len() - 1 - k);
        ((self.code >> shift) & 7) as u8 + 1
    }

    pub fn symbols(&self) -> impl Iterator<Item = u8> + '_ {
        (0..self.len()).map(move |k| self.symbol(k))
    }

    /// Concatenation `self · other`.
    pub fn concat(&self, other: &Word) -> Result<Word, CarpetError> {
        let len = self.len() + other.len();
        if len > MAX_WORD_LEN {
            return Err(CarpetError::WordTooLong(len));
        }
        Ok(Word {
            len: len as u8,
            code: (self.code << (3 * other.len())) | other.code,
        })
    }

    /// Appends one symbol.
    pub fn push(&self, s: u8) -> Result<Word, CarpetError> {
        self.concat(&Word::new(&[s])?)
    }

    /// First `k` symbols.
    pub fn prefix(&self, k: usize) -> Word {
        let k = k.min(self.len());
        Word {
            len: k as u8,
            code: self.code >> (3 * (self.len() - k)),
        }
    }

    pub fn has_prefix(&self, w: &Word) -> bool {
        w.len() <= self.len() && self.prefix(w.len()) == *w
    }

    /// Grid position of the cell `K_w` among the `3^n x 3^n` subsquares,
    /// counted from the bottom-left corner.
    pub fn grid_position(&self) -> (u64, u64) {
        self.symbols().fold((0, 0), |(x, y), s| {
            let (dx, dy) = CELL_OFFSETS[usize::from(s - 1)];
            (3 * x + dx, 3 * y + dy)
        })
    }

    /// Inverse of [`Word::grid_position`]; `None` when the square is not a
    /// carpet cell.
    pub fn from_grid(level: usize, mut gx: u64, mut gy: u64) -> Option<Word> {
        if level > MAX_WORD_LEN {
            return None;
        }
        let side = 3u64.checked_pow(level as u32)?;
        if gx >= side || gy >= side {
            return None;
        }
        let mut code = 0u64;
        for k in 0..level {
            let s = symbol_at(gx % 3, gy % 3)?;
            code |= u64::from(s - 1) << (3 * k);
            gx /= 3;
            gy /= 3;
        }
        Some(Word {
            len: level as u8,
            code,
        })
    }

    /// All words of length `n` in lexicographic order.
    pub fn all(n: usize) -> Result<impl Iterator<Item = Word>, CarpetError> {
        if n > MAX_WORD_LEN {
            return Err(CarpetError::WordTooLong(n));
        }
        let count = 1u64 << (3 * n);
        Ok((0..count).map(move |code| Word {
            len: n as u8,
            code,
        }))
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len
            .cmp(&other.len)
            .then_with(|| self.code.cmp(&other.code))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in self.symbols() {
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word(\"{self}\")")
    }
}

impl FromStr for Word {
    type Err = CarpetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let symbols = s
            .bytes()
            .map(|b| match b {
                b'1'..=b'8' => Ok(b - b'0'),
                _ => Err(CarpetError::ParseWord(s.to_string())),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Word::new(&symbols)
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A point with coordinates `(x, y) / (4 * 3^denom_level)`.
///
/// Equality and hashing compare the represented rational point.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LatticePoint {
    pub x: i64,
    pub y: i64,
    pub denom_level: u32,
}

impl LatticePoint {
    pub fn new(x: i64, y: i64, denom_level: u32) -> Self {
        LatticePoint { x, y, denom_level }
    }

    /// Same point expressed at a finer denominator level.
    pub fn at_level(&self, level: u32) -> Result<LatticePoint, CarpetError> {
        if level < self.denom_level {
            let f = pow3(self.denom_level - level);
            if self.x % f != 0 || self.y % f != 0 {
                return Err(CarpetError::NotRepresentable {
                    level: level as usize,
                });
            }
            return Ok(LatticePoint::new(self.x / f, self.y / f, level));
        }
        let f = pow3(level - self.denom_level);
        Ok(LatticePoint::new(self.x * f, self.y * f, level))
    }

    /// Representation with the smallest denominator level.
    pub fn reduced(&self) -> LatticePoint {
        let mut p = *self;
        while p.denom_level > 0 && p.x % 3 == 0 && p.y % 3 == 0 {
            p = LatticePoint::new(p.x / 3, p.y / 3, p.denom_level - 1);
        }
        p
    }

    pub fn to_f64(&self) -> (f64, f64) {
        let d = 4.0 * 3f64.powi(self.denom_level as i32);
        (self.x as f64 / d, self.y as f64 / d)
    }

    /// Euclidean distance.
    pub fn distance(&self, other: &LatticePoint) -> f64 {
        let l = self.denom_level.max(other.denom_level);
        let a = self.at_level(l).expect("refining is exact");
        let b = other.at_level(l).expect("refining is exact");
        let dx = (a.x - b.x) as f64;
        let dy = (a.y - b.y) as f64;
        dx.hypot(dy) / (4.0 * 3f64.powi(l as i32))
    }

    /// Image under the similitude `f_i`.
    pub fn apply_map(&self, i: u8) -> Result<LatticePoint, CarpetError> {
        let (px, py) = fixed_point_x2(i)?;
        let shift = 4 * pow3(self.denom_level);
        Ok(LatticePoint::new(
            self.x + shift * px,
            self.y + shift * py,
            self.denom_level + 1,
        ))
    }

    /// Image under `f_w = f_{w_1} ∘ ... ∘ f_{w_k}`.
    pub fn apply_word(&self, w: &Word) -> LatticePoint {
        let symbols: Vec<u8> = w.symbols().collect();
        symbols.iter().rev().fold(*self, |p, &s| {
            p.apply_map(s).expect("word symbols are valid")
        })
    }

    /// Image under a symmetry of the square.
    pub fn apply_symmetry(&self, t: SymmetryElement) -> LatticePoint {
        let (x, y) = t.apply(self.x, self.y);
        LatticePoint::new(x, y, self.denom_level)
    }
}

impl PartialEq for LatticePoint {
    fn eq(&self, other: &Self) -> bool {
        let (a, b) = (self.reduced(), other.reduced());
        a.x == b.x && a.y == b.y && a.denom_level == b.denom_level
    }
}

impl Eq for LatticePoint {}

impl Hash for LatticePoint {
    fn hash<H: Hasher>(&self, state: &mut H) {
        let r = self.reduced();
        (r.x, r.y, r.denom_level).hash(state);
    }
}

/// Closed axis-parallel square `[min_x, min_x + side] x [min_y, min_y + side]`
/// at a given denominator level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CellBox {
    pub min_x: i64,
    pub min_y: i64,
    pub side: i64,
    pub denom_level: u32,
}

impl CellBox {
    /// The unit square at denominator level 0.
    pub fn unit() -> Self {
        CellBox {
            min_x: -2,
            min_y: -2,
            side: 4,
            denom_level: 0,
        }
    }

    pub fn refine(&self, level: u32) -> CellBox {
        assert!(level >= self.denom_level, "cannot coarsen a box");
        let f = pow3(level - self.denom_level);
        CellBox {
            min_x: self.min_x * f,
            min_y: self.min_y * f,
            side: self.side * f,
            denom_level: level,
        }
    }

    pub fn contains(&self, p: &LatticePoint) -> bool {
        let l = self.denom_level.max(p.denom_level);
        let b = self.refine(l);
        let q = p.at_level(l).expect("refining is exact");
        (b.min_x..=b.min_x + b.side).contains(&q.x) && (b.min_y..=b.min_y + b.side).contains(&q.y)
    }

    pub fn corners(&self) -> [LatticePoint; 4] {
        let (x0, y0, s, l) = (self.min_x, self.min_y, self.side, self.denom_level);
        [
            LatticePoint::new(x0, y0, l),
            LatticePoint::new(x0 + s, y0, l),
            LatticePoint::new(x0 + s, y0 + s, l),
            LatticePoint::new(x0, y0 + s, l),
        ]
    }
}

/// The square `K_w = f_w([-1/2, 1/2]^2)` at denominator level `|w|`.
pub fn cell_box(w: &Word) -> CellBox {
    let symbols: Vec<u8> = w.symbols().collect();
    symbols.iter().rev().fold(CellBox::unit(), |b, &s| {
        let lo = LatticePoint::new(b.min_x, b.min_y, b.denom_level)
            .apply_map(s)
            .expect("word symbols are valid");
        CellBox {
            min_x: lo.x,
            min_y: lo.y,
            side: b.side,
            denom_level: lo.denom_level,
        }
    })
}

/// How two distinct cells of the same level meet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Intersection {
    Disjoint,
    Point,
    Segment,
}

/// Intersection type of `K_v` and `K_w` for `v != w`, `|v| = |w|`.
pub fn cells_intersect(v: &Word, w: &Word) -> Result<Intersection, CarpetError> {
    if v.len() != w.len() {
        return Err(CarpetError::LengthMismatch(v.len(), w.len()));
    }
    if v == w {
        return Err(CarpetError::SameCell(*v));
    }
    let (a, b) = (cell_box(v), cell_box(w));
    Ok(box_intersection(&a, &b))
}

pub(crate) fn box_intersection(a: &CellBox, b: &CellBox) -> Intersection {
    let dx = (a.min_x - b.min_x).abs();
    let dy = (a.min_y - b.min_y).abs();
    let s = a.side;
    match (dx.cmp(&s), dy.cmp(&s)) {
        (Ordering::Greater, _) | (_, Ordering::Greater) => Intersection::Disjoint,
        (Ordering::Equal, Ordering::Equal) => Intersection::Point,
        _ => Intersection::Segment,
    }
}

/// The dihedral group of the square, acting linearly on the plane.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SymmetryElement {
    Identity,
    /// Point reflection `-I`.
    Inversion,
    /// Reflection in the vertical axis, `(x, y) -> (-x, y)`.
    ReflectVertical,
    /// Reflection in the horizontal axis, `(x, y) -> (x, -y)`.
    ReflectHorizontal,
    /// Reflection in the diagonal `y = x`.
    ReflectDiagonal,
    /// Reflection in the anti-diagonal `y = -x`.
    ReflectAntiDiagonal,
    /// Rotation by `+pi/2`.
    RotatePlus,
    /// Rotation by `-pi/2`.
    RotateMinus,
}

impl SymmetryElement {
    pub const ALL: [SymmetryElement; 8] = [
        SymmetryElement::Identity,
        SymmetryElement::Inversion,
        SymmetryElement::ReflectVertical,
        SymmetryElement::ReflectHorizontal,
        SymmetryElement::ReflectDiagonal,
        SymmetryElement::ReflectAntiDiagonal,
        SymmetryElement::RotatePlus,
        SymmetryElement::RotateMinus,
    ];

    /// Row-major 2x2 matrix.
    pub fn matrix(self) -> [[i64; 2]; 2] {
        use SymmetryElement::*;
        match self {
            Identity => [[1, 0], [0, 1]],
            Inversion => [[-1, 0], [0, -1]],
            ReflectVertical => [[-1, 0], [0, 1]],
            ReflectHorizontal => [[1, 0], [0, -1]],
            ReflectDiagonal => [[0, 1], [1, 0]],
            ReflectAntiDiagonal => [[0, -1], [-1, 0]],
            RotatePlus => [[0, -1], [1, 0]],
            RotateMinus => [[0, 1], [-1, 0]],
        }
    }

    fn from_matrix(m: [[i64; 2]; 2]) -> SymmetryElement {
        *Self::ALL
            .iter()
            .find(|t| t.matrix() == m)
            .expect("the group is closed")
    }

    pub fn apply(self, x: i64, y: i64) -> (i64, i64) {
        let m = self.matrix();
        (m[0][0] * x + m[0][1] * y, m[1][0] * x + m[1][1] * y)
    }

    /// `self ∘ other`.
    pub fn compose(self, other: SymmetryElement) -> SymmetryElement {
        let (a, b) = (self.matrix(), other.matrix());
        let mut m = [[0; 2]; 2];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Self::from_matrix(m)
    }

    pub fn inverse(self) -> SymmetryElement {
        *Self::ALL
            .iter()
            .find(|t| self.compose(**t) == SymmetryElement::Identity)
            .expect("every element is invertible")
    }

    /// The symbol permutation `i -> j` with `T(p_i) = p_j`.
    pub fn symbol_map(self, i: u8) -> u8 {
        let (x, y) = FIXED_POINTS_X2[usize::from(check_symbol(i).expect("valid symbol") - 1)];
        let image = self.apply(x, y);
        FIXED_POINTS_X2
            .iter()
            .position(|&p| p == image)
            .expect("symmetries permute the fixed points") as u8
            + 1
    }

    /// Short name used on the command line and in serialized output.
    pub fn name(self) -> &'static str {
        use SymmetryElement::*;
        match self {
            Identity => "id",
            Inversion => "neg",
            ReflectVertical => "tv",
            ReflectHorizontal => "th",
            ReflectDiagonal => "tplus",
            ReflectAntiDiagonal => "tminus",
            RotatePlus => "rplus",
            RotateMinus => "rminus",
        }
    }
}

impl FromStr for SymmetryElement {
    type Err = CarpetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SymmetryElement::ALL
            .iter()
            .copied()
            .find(|t| t.name() == s)
            .ok_or_else(|| CarpetError::UnknownSymmetry(s.to_string()))
    }
}

/// Letterwise action of a symmetry on words, so that `T(K_w) = K_{T(w)}`.
pub fn apply_symmetry(t: SymmetryElement, w: &Word) -> Word {
    let symbols: Vec<u8> = w.symbols().map(|s| t.symbol_map(s)).collect();
    Word::new(&symbols).expect("same length as the input")
}

/// Level-`level` cells containing `p`, by descent from the root.
fn containing_cells(p: &LatticePoint, level: usize) -> Vec<Word> {
    let mut current = if CellBox::unit().contains(p) {
        vec![Word::EMPTY]
    } else {
        Vec::new()
    };
    for _ in 0..level {
        current = current
            .iter()
            .flat_map(|w| (1..=8u8).map(move |s| w.push(s).expect("short word")))
            .filter(|c| cell_box(c).contains(p))
            .collect();
    }
    current
}

/// Adapted scale `n(x, y)`: the largest `n` such that `x` and `y` lie in the
/// same or in intersecting level-`n` cells.
///
/// The search stops three levels below the finer denominator of the inputs;
/// at that depth two distinct lattice points can no longer share or touch a
/// cell. Fails when a point is not on the carpet or the points coincide.
pub fn adapted_scale(x: &LatticePoint, y: &LatticePoint) -> Result<usize, CarpetError> {
    if x == y {
        return Err(CarpetError::CoincidentPoints);
    }
    let cap = x.denom_level.max(y.denom_level) as usize + 3;
    let mut cx = containing_cells(x, 0);
    let mut cy = containing_cells(y, 0);
    if cx.is_empty() || cy.is_empty() {
        return Err(CarpetError::NotInCarpet);
    }
    let mut best = 0;
    for m in 1..=cap {
        cx = cx
            .iter()
            .flat_map(|w| (1..=8u8).map(move |s| w.push(s).expect("short word")))
            .filter(|c| cell_box(c).contains(x))
            .collect();
        cy = cy
            .iter()
            .flat_map(|w| (1..=8u8).map(move |s| w.push(s).expect("short word")))
            .filter(|c| cell_box(c).contains(y))
            .collect();
        if cx.is_empty() || cy.is_empty() {
            return Err(CarpetError::NotInCarpet);
        }
        let touching = cx.iter().any(|v| {
            cy.iter()
                .any(|w| v == w || box_intersection(&cell_box(v), &cell_box(w)) != Intersection::Disjoint)
        });
        if touching {
            best = m;
        } else {
            break;
        }
    }
    Ok(best)
}
