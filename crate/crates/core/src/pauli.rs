//! Pauli strings on `ℓ` sites in the symplectic bit-pair encoding.
//!
//! Site `i` is stored in bit `i` of two masks: `(x, z) = (0,0)` is `I`,
//! `(1,0)` is `X`, `(0,1)` is `Z` and `(1,1)` is `Y`. Products carry their
//! phase separately as a power of `i`, so no matrix is ever materialized
//! unless [`PauliString::to_dense`] is called.
//!
//! Dense matrices use the Kronecker convention with site 0 as the leftmost
//! factor, i.e. site `i` maps to bit `ℓ-1-i` of a computational-basis index.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use faer::Mat;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Largest site count the bitmask encoding supports.
pub const MAX_SITES: usize = 32;
/// Largest site count for which dense `2^ℓ × 2^ℓ` matrices are built.
pub const MAX_DENSE_SITES: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    I,
    X,
    Y,
    Z,
}

impl Letter {
    fn bits(self) -> (bool, bool) {
        match self {
            Letter::I => (false, false),
            Letter::X => (true, false),
            Letter::Y => (true, true),
            Letter::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Letter::I,
            (true, false) => Letter::X,
            (true, true) => Letter::Y,
            (false, true) => Letter::Z,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Letter::I => 'I',
            Letter::X => 'X',
            Letter::Y => 'Y',
            Letter::Z => 'Z',
        }
    }

    pub const NON_IDENTITY: [Letter; 3] = [Letter::X, Letter::Y, Letter::Z];
}

/// A fourth root of unity, stored as the exponent of `i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_power(power: i64) -> Self {
        Phase(power.rem_euclid(4) as u8)
    }

    pub fn power(self) -> u8 {
        self.0
    }

    pub fn to_complex(self) -> C64 {
        match self.0 {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        }
    }

    pub fn is_real(self) -> bool {
        self.0 % 2 == 0
    }
}

impl std::ops::Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

impl std::ops::Neg for Phase {
    type Output = Phase;
    fn neg(self) -> Phase {
        Phase((self.0 + 2) % 4)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    num_sites: usize,
    x: u64,
    z: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PhasedPauli {
    pub phase: Phase,
    pub string: PauliString,
}

fn site_mask(num_sites: usize) -> u64 {
    if num_sites == 64 {
        u64::MAX
    } else {
        (1u64 << num_sites) - 1
    }
}

impl PauliString {
    pub fn identity(num_sites: usize) -> Self {
        assert!(
            (1..=MAX_SITES).contains(&num_sites),
            "site count {num_sites} out of range"
        );
        PauliString { num_sites, x: 0, z: 0 }
    }

    /// Builds a string from raw masks; bits above `num_sites` must be clear.
    pub fn from_bits(num_sites: usize, x: u64, z: u64) -> Result<Self> {
        if !(1..=MAX_SITES).contains(&num_sites) {
            return Err(Error::InvalidBounds(format!(
                "site count {num_sites} outside 1..={MAX_SITES}"
            )));
        }
        let mask = site_mask(num_sites);
        if x & !mask != 0 || z & !mask != 0 {
            return Err(Error::InvalidBounds("mask has bits beyond the last site".into()));
        }
        Ok(PauliString { num_sites, x, z })
    }

    /// Single-site or few-site string given as `(site, letter)` pairs.
    pub fn from_sites(num_sites: usize, letters: &[(usize, Letter)]) -> Result<Self> {
        let mut p = PauliString::from_bits(num_sites, 0, 0)?;
        for &(site, letter) in letters {
            if site >= num_sites {
                return Err(Error::InvalidBounds(format!(
                    "site {site} on a {num_sites}-site chain"
                )));
            }
            p = p.with_letter(site, letter);
        }
        Ok(p)
    }

    pub fn num_sites(&self) -> usize {
        self.num_sites
    }

    pub fn x_bits(&self) -> u64 {
        self.x
    }

    pub fn z_bits(&self) -> u64 {
        self.z
    }

    pub fn weight(&self) -> usize {
        (self.x | self.z).count_ones() as usize
    }

    pub fn support(&self) -> u64 {
        self.x | self.z
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn letter(&self, site: usize) -> Letter {
        Letter::from_bits(self.x >> site & 1 == 1, self.z >> site & 1 == 1)
    }

    pub fn with_letter(mut self, site: usize, letter: Letter) -> Self {
        let (x, z) = letter.bits();
        let bit = 1u64 << site;
        self.x = (self.x & !bit) | if x { bit } else { 0 };
        self.z = (self.z & !bit) | if z { bit } else { 0 };
        self
    }

    /// `(site, letter)` pairs of the non-identity sites in increasing site order.
    pub fn letters(&self) -> impl Iterator<Item = (usize, Letter)> + '_ {
        (0..self.num_sites)
            .map(|s| (s, self.letter(s)))
            .filter(|(_, l)| *l != Letter::I)
    }

    fn check_sites(&self, other: &PauliString) -> Result<()> {
        if self.num_sites != other.num_sites {
            return Err(Error::SiteMismatch {
                left: self.num_sites,
                right: other.num_sites,
            });
        }
        Ok(())
    }

    /// Product `self · other` as a phased string.
    pub fn multiply(&self, other: &PauliString) -> Result<PhasedPauli> {
        self.check_sites(other)?;
        Ok(self.mul_unchecked(other))
    }

    /// Product without the site-count check; hot loops guarantee matching sizes.
    #[inline]
    pub fn mul_unchecked(&self, other: &PauliString) -> PhasedPauli {
        let (x1, z1, x2, z2) = (self.x, self.z, other.x, other.z);
        let (px, py, pz) = (x1 & !z1, x1 & z1, !x1 & z1);
        let (qx, qy, qz) = (x2 & !z2, x2 & z2, !x2 & z2);
        // XY = iZ, YZ = iX, ZX = iY and the reversed orders give -i.
        let plus = (px & qy) | (py & qz) | (pz & qx);
        let minus = (px & qz) | (py & qx) | (pz & qy);
        let power = plus.count_ones() as i64 - minus.count_ones() as i64;
        PhasedPauli {
            phase: Phase::from_power(power),
            string: PauliString {
                num_sites: self.num_sites,
                x: x1 ^ x2,
                z: z1 ^ z2,
            },
        }
    }

    #[inline]
    pub fn commutes_unchecked(&self, other: &PauliString) -> bool {
        ((self.x & other.z) ^ (self.z & other.x)).count_ones() % 2 == 0
    }

    pub fn commutes(&self, other: &PauliString) -> Result<bool> {
        self.check_sites(other)?;
        Ok(self.commutes_unchecked(other))
    }

    /// `[self, other] = 2 · phase · string`, or `None` when the strings commute.
    pub fn commutator(&self, other: &PauliString) -> Result<Option<PhasedPauli>> {
        self.check_sites(other)?;
        if self.commutes_unchecked(other) {
            Ok(None)
        } else {
            Ok(Some(self.mul_unchecked(other)))
        }
    }

    /// x and z masks re-indexed to computational-basis bit positions.
    fn index_masks(&self) -> (usize, usize) {
        let n = self.num_sites;
        let mut xm = 0usize;
        let mut zm = 0usize;
        for s in 0..n {
            let bit = 1usize << (n - 1 - s);
            if self.x >> s & 1 == 1 {
                xm |= bit;
            }
            if self.z >> s & 1 == 1 {
                zm |= bit;
            }
        }
        (xm, zm)
    }

    /// Sparse action on a computational basis state: `P|col⟩ = value |row⟩`.
    pub fn monomial(&self) -> Monomial {
        let (xm, zm) = self.index_masks();
        let ny = (self.x & self.z).count_ones() as i64;
        Monomial {
            x_mask: xm,
            z_mask: zm,
            base: Phase::from_power(ny),
        }
    }

    pub fn to_dense(&self) -> Result<Mat<C64>> {
        if self.num_sites > MAX_DENSE_SITES {
            return Err(Error::ResourceLimit {
                what: "dense Pauli matrix",
                sites: self.num_sites,
                limit: MAX_DENSE_SITES,
            });
        }
        let dim = 1usize << self.num_sites;
        let m = self.monomial();
        let mut out = Mat::<C64>::zeros(dim, dim);
        for col in 0..dim {
            let (row, v) = m.apply(col);
            out[(row, col)] = v;
        }
        Ok(out)
    }

    fn canonical_key(&self) -> impl Iterator<Item = (usize, Letter)> + '_ {
        self.letters()
    }
}

/// A Pauli string seen as a permutation matrix with phases.
#[derive(Clone, Copy, Debug)]
pub struct Monomial {
    x_mask: usize,
    z_mask: usize,
    base: Phase,
}

impl Monomial {
    /// Returns `(row, ⟨row|P|col⟩)`.
    #[inline]
    pub fn apply(&self, col: usize) -> (usize, C64) {
        let sign = if (col & self.z_mask).count_ones() % 2 == 0 {
            Phase::ONE
        } else {
            Phase::MINUS_ONE
        };
        (col ^ self.x_mask, (self.base * sign).to_complex())
    }

    pub fn x_mask(&self) -> usize {
        self.x_mask
    }
}

impl PhasedPauli {
    pub fn new(phase: Phase, string: PauliString) -> Self {
        PhasedPauli { phase, string }
    }

    pub fn multiply(&self, other: &PhasedPauli) -> Result<PhasedPauli> {
        let p = self.string.multiply(&other.string)?;
        Ok(PhasedPauli {
            phase: self.phase * other.phase * p.phase,
            string: p.string,
        })
    }

    pub fn to_dense(&self) -> Result<Mat<C64>> {
        let mut m = self.string.to_dense()?;
        let ph = self.phase.to_complex();
        let n = m.nrows();
        for j in 0..n {
            for i in 0..n {
                m[(i, j)] *= ph;
            }
        }
        Ok(m)
    }
}

impl Ord for PauliString {
    /// Weight first, then lexicographic over `(site, letter)` of the support.
    fn cmp(&self, other: &Self) -> Ordering {
        self.num_sites
            .cmp(&other.num_sites)
            .then(self.weight().cmp(&other.weight()))
            .then_with(|| self.canonical_key().cmp(other.canonical_key()))
    }
}

impl PartialOrd for PauliString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in 0..self.num_sites {
            write!(f, "{}", self.letter(s).as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let n = s.chars().count();
        if n == 0 || n > MAX_SITES {
            return Err(Error::Parse {
                input: s.into(),
                reason: format!("length must be in 1..={MAX_SITES}"),
            });
        }
        let mut p = PauliString::identity(n);
        for (site, c) in s.chars().enumerate() {
            let letter = match c {
                'I' => Letter::I,
                'X' => Letter::X,
                'Y' => Letter::Y,
                'Z' => Letter::Z,
                other => {
                    return Err(Error::Parse {
                        input: s.into(),
                        reason: format!("unexpected character {other:?}"),
                    })
                }
            };
            p = p.with_letter(site, letter);
        }
        Ok(p)
    }
}

impl serde::Serialize for PauliString {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for PauliString {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Binomial coefficient as `u128`; exact for the sizes used here.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Number of weight-`k` strings on `ℓ` sites, `C(ℓ,k)·3^k`.
pub fn sector_size(num_sites: usize, k: usize) -> u128 {
    binomial(num_sites, k) * 3u128.pow(k as u32)
}

#[derive(Clone, Debug)]
enum IndexMap {
    Dense(Vec<u32>),
    Sparse(HashMap<(u64, u64), u32>),
}

const DENSE_INDEX_MAX_SITES: usize = 11;

/// All strings with `min_weight ≤ weight ≤ max_weight`, ordered weight-major
/// and then lexicographically by `(site, letter)` with `X < Y < Z`.
#[derive(Clone, Debug)]
pub struct PauliBasis {
    num_sites: usize,
    min_weight: usize,
    max_weight: usize,
    strings: Vec<PauliString>,
    offsets: Vec<usize>,
    index: IndexMap,
}

impl PauliBasis {
    /// Every string of weight `0..=k_max`, identity included.
    pub fn new(num_sites: usize, k_max: usize) -> Result<Self> {
        Self::with_weights(num_sites, 0, k_max)
    }

    /// The full operator basis of size `4^ℓ`.
    pub fn full(num_sites: usize) -> Result<Self> {
        Self::with_weights(num_sites, 0, num_sites)
    }

    pub fn with_weights(num_sites: usize, min_weight: usize, max_weight: usize) -> Result<Self> {
        if !(1..=MAX_SITES).contains(&num_sites) {
            return Err(Error::InvalidBounds(format!(
                "site count {num_sites} outside 1..={MAX_SITES}"
            )));
        }
        if min_weight > max_weight || max_weight > num_sites {
            return Err(Error::InvalidBounds(format!(
                "weights {min_weight}..={max_weight} on {num_sites} sites"
            )));
        }
        let total: u128 = (min_weight..=max_weight).map(|k| sector_size(num_sites, k)).sum();
        if total > u32::MAX as u128 / 2 {
            return Err(Error::ResourceLimit {
                what: "Pauli basis enumeration",
                sites: num_sites,
                limit: MAX_DENSE_SITES,
            });
        }
        let mut strings = Vec::with_capacity(total as usize);
        let mut offsets = Vec::with_capacity(max_weight - min_weight + 2);
        for k in min_weight..=max_weight {
            offsets.push(strings.len());
            push_weight(PauliString::identity(num_sites), 0, k, &mut strings);
        }
        offsets.push(strings.len());

        let index = if num_sites <= DENSE_INDEX_MAX_SITES {
            let mut table = vec![u32::MAX; 1usize << (2 * num_sites)];
            for (i, p) in strings.iter().enumerate() {
                table[(p.x | (p.z << num_sites)) as usize] = i as u32;
            }
            IndexMap::Dense(table)
        } else {
            IndexMap::Sparse(
                strings
                    .iter()
                    .enumerate()
                    .map(|(i, p)| ((p.x, p.z), i as u32))
                    .collect(),
            )
        };
        Ok(PauliBasis {
            num_sites,
            min_weight,
            max_weight,
            strings,
            offsets,
            index,
        })
    }

    pub fn num_sites(&self) -> usize {
        self.num_sites
    }

    pub fn min_weight(&self) -> usize {
        self.min_weight
    }

    pub fn max_weight(&self) -> usize {
        self.max_weight
    }

    pub fn len(&self) -> usize {
        self.strings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strings.is_empty()
    }

    pub fn strings(&self) -> &[PauliString] {
        &self.strings
    }

    pub fn string_at(&self, i: usize) -> PauliString {
        self.strings[i]
    }

    #[inline]
    pub fn index_of(&self, p: &PauliString) -> Option<usize> {
        if p.num_sites != self.num_sites {
            return None;
        }
        match &self.index {
            IndexMap::Dense(table) => {
                let v = table[(p.x | (p.z << self.num_sites)) as usize];
                (v != u32::MAX).then_some(v as usize)
            }
            IndexMap::Sparse(map) => map.get(&(p.x, p.z)).map(|&v| v as usize),
        }
    }

    /// Index range of the weight-`k` strings (empty when `k` is outside the basis).
    pub fn sector(&self, k: usize) -> Range<usize> {
        if k < self.min_weight || k > self.max_weight {
            return 0..0;
        }
        let j = k - self.min_weight;
        self.offsets[j]..self.offsets[j + 1]
    }

    pub fn weight_of(&self, i: usize) -> usize {
        self.strings[i].weight()
    }
}

fn push_weight(prefix: PauliString, first_site: usize, remaining: usize, out: &mut Vec<PauliString>) {
    if remaining == 0 {
        out.push(prefix);
        return;
    }
    let n = prefix.num_sites;
    for site in first_site..=(n - remaining) {
        for letter in Letter::NON_IDENTITY {
            push_weight(prefix.with_letter(site, letter), site + 1, remaining - 1, out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    fn dense_commutator_norm(a: &PauliString, b: &PauliString) -> f64 {
        let (da, db) = (a.to_dense().unwrap(), b.to_dense().unwrap());
        let c = &da * &db - &db * &da;
        let mut m = 0.0f64;
        for j in 0..c.ncols() {
            for i in 0..c.nrows() {
                m = m.max(c[(i, j)].norm());
            }
        }
        m
    }

    #[test]
    fn weights() {
        assert_eq!(p("II").weight(), 0);
        assert_eq!(p("IXY").weight(), 2);
        assert_eq!(p("YYYYYY").weight(), 6);
    }

    #[test]
    fn products() {
        let r = p("X").multiply(&p("Z")).unwrap();
        assert_eq!(r.phase, Phase::MINUS_I);
        assert_eq!(r.string, p("Y"));
        for s in ["X", "Y", "Z", "XYZ", "IZY"] {
            let r = p(s).multiply(&p(s)).unwrap();
            assert_eq!(r.phase, Phase::ONE);
            assert!(r.string.is_identity());
        }
        let r = p("XI").multiply(&p("IZ")).unwrap();
        assert_eq!((r.phase, r.string), (Phase::ONE, p("XZ")));
    }

    #[test]
    fn commutation() {
        assert!(p("X").commutes(&p("X")).unwrap());
        assert!(!p("X").commutes(&p("Y")).unwrap());
        assert!(p("XY").commutes(&p("YX")).unwrap());
        assert!(dense_commutator_norm(&p("XY"), &p("YX")) < 1e-12);
    }

    #[test]
    fn commutators() {
        let c = p("X").commutator(&p("Y")).unwrap().unwrap();
        assert_eq!((c.phase, c.string), (Phase::I, p("Z")));
        assert!(p("XX").commutator(&p("II")).unwrap().is_none());
        let c = p("XZI").commutator(&p("YZI")).unwrap().unwrap();
        assert_eq!((c.phase, c.string), (Phase::I, p("ZII")));
        // dense check of the same identity
        let lhs = {
            let (a, b) = (p("XZI").to_dense().unwrap(), p("YZI").to_dense().unwrap());
            &a * &b - &b * &a
        };
        let rhs = c.to_dense().unwrap();
        for j in 0..8 {
            for i in 0..8 {
                assert!((lhs[(i, j)] - rhs[(i, j)] * 2.0).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn site_mismatch_is_an_error() {
        assert!(matches!(
            p("XX").multiply(&p("X")),
            Err(Error::SiteMismatch { left: 2, right: 1 })
        ));
        assert!(p("XX").commutes(&p("XXX")).is_err());
        assert!(p("XX").commutator(&p("XXX")).is_err());
    }

    #[test]
    fn dense_forms() {
        let z = p("Z").to_dense().unwrap();
        assert_eq!(z[(0, 0)], C64::new(1.0, 0.0));
        assert_eq!(z[(1, 1)], C64::new(-1.0, 0.0));
        assert_eq!(z[(0, 1)], C64::new(0.0, 0.0));
        let id = p("II").to_dense().unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(id[(i, j)].re, if i == j { 1.0 } else { 0.0 });
            }
        }
        // site 0 is the leftmost Kronecker factor: X⊗I flips the top bit
        let xi = p("XI").to_dense().unwrap();
        assert_eq!(xi[(2, 0)], C64::new(1.0, 0.0));
        let y = p("Y").to_dense().unwrap();
        assert_eq!(y[(1, 0)], C64::new(0.0, 1.0));
        assert_eq!(y[(0, 1)], C64::new(0.0, -1.0));
    }

    #[test]
    fn dense_limit() {
        let big = PauliString::identity(MAX_DENSE_SITES + 1);
        assert!(matches!(big.to_dense(), Err(Error::ResourceLimit { .. })));
    }

    #[test]
    fn basis_sizes() {
        let b = PauliBasis::with_weights(6, 1, 2).unwrap();
        assert_eq!(b.len(), 153);
        assert_eq!(b.sector(2).len(), 135);
        assert_eq!(PauliBasis::new(2, 2).unwrap().len(), 16);
        for l in 1..=8 {
            let b = PauliBasis::full(l).unwrap();
            assert_eq!(b.len(), 1 << (2 * l));
            for k in 0..=l {
                assert_eq!(b.sector(k).len() as u128, sector_size(l, k));
            }
        }
        assert!(PauliBasis::new(3, 4).is_err());
        assert!(PauliBasis::with_weights(3, 2, 1).is_err());
    }

    #[test]
    fn basis_ordering() {
        let b = PauliBasis::new(3, 2).unwrap();
        let names: Vec<String> = b.strings().iter().take(8).map(|s| s.to_string()).collect();
        assert_eq!(names, ["III", "XII", "YII", "ZII", "IXI", "IYI", "IZI", "IIX"]);
        // weight 2 starts with site 0 letter X, then the second site
        let w2: Vec<String> = b.strings()[b.sector(2)].iter().take(4).map(|s| s.to_string()).collect();
        assert_eq!(w2, ["XXI", "XYI", "XZI", "XIX"]);
        for w in b.strings().windows(2) {
            assert!(w[0] < w[1]);
        }
        for i in 0..b.len() {
            assert_eq!(b.index_of(&b.string_at(i)), Some(i));
        }
    }

    #[test]
    fn sparse_index_large_chain() {
        let b = PauliBasis::with_weights(14, 1, 2).unwrap();
        assert_eq!(b.len() as u128, sector_size(14, 1) + sector_size(14, 2));
        for i in (0..b.len()).step_by(7) {
            assert_eq!(b.index_of(&b.string_at(i)), Some(i));
        }
        assert_eq!(b.index_of(&PauliString::identity(14)), None);
    }

    #[test]
    fn parse_errors() {
        assert!("".parse::<PauliString>().is_err());
        assert!("XQ".parse::<PauliString>().is_err());
    }

    #[test]
    fn serde_uses_literal() {
        let s = serde_json::to_string(&p("IXYZ")).unwrap();
        assert_eq!(s, "\"IXYZ\"");
        let back: PauliString = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p("IXYZ"));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_string(n: usize) -> impl Strategy<Value = PauliString> {
            (0u64..(1 << n), 0u64..(1 << n)).prop_map(move |(x, z)| PauliString::from_bits(n, x, z).unwrap())
        }

        proptest! {
            #[test]
            fn literal_round_trip(p in (1usize..=20).prop_flat_map(arb_string)) {
                let back: PauliString = p.to_string().parse().unwrap();
                prop_assert_eq!(back, p);
            }

            #[test]
            fn product_is_associative_with_phases(
                (a, b, c) in (1usize..=16).prop_flat_map(|n| (arb_string(n), arb_string(n), arb_string(n)))
            ) {
                let one = |s| PhasedPauli::new(Phase::ONE, s);
                let left = one(a).multiply(&one(b)).unwrap().multiply(&one(c)).unwrap();
                let right = one(a).multiply(&one(b).multiply(&one(c)).unwrap()).unwrap();
                prop_assert_eq!(left, right);
            }

            #[test]
            fn commutation_is_symmetric_and_matches_product_order(
                (a, b) in (1usize..=16).prop_flat_map(|n| (arb_string(n), arb_string(n)))
            ) {
                let ab = a.mul_unchecked(&b);
                let ba = b.mul_unchecked(&a);
                prop_assert_eq!(ab.string, ba.string);
                let same = ab.phase == ba.phase;
                prop_assert_eq!(same, a.commutes_unchecked(&b));
                prop_assert_eq!(a.commutes_unchecked(&b), b.commutes_unchecked(&a));
            }
        }
    }
}
