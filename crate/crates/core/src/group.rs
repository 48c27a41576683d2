//! Group arithmetic, Pontryagin duality, subgroups, annihilators, coset
//! sections, and Haar normalization.
//!
//! Groups are finite products whose factors are cyclic groups `Z/n`, the
//! integer line `Z`, or the torus `R/Z`. The torus arises as the dual of
//! the integer line; its elements are stored as exact rationals in `[0, 1)`
//! so that membership and coset questions are decided exactly. Haar
//! measure is normalized so that the designated compact-open subgroup `H`
//! has mass one and its annihilator has mass one on the dual side.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use num_rational::Ratio;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// One factor of a product group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Factor {
    /// The cyclic group `Z/n`, residues stored in `[0, n)`.
    Cyclic(u64),
    /// The discrete integer line `Z`.
    IntegerLine,
    /// The circle group `R/Z`; elements are rationals in `[0, 1)`.
    Torus,
}

impl Factor {
    pub fn dual(self) -> Factor {
        match self {
            Factor::Cyclic(n) => Factor::Cyclic(n),
            Factor::IntegerLine => Factor::Torus,
            Factor::Torus => Factor::IntegerLine,
        }
    }

    pub fn order(self) -> Option<u64> {
        match self {
            Factor::Cyclic(n) => Some(n),
            _ => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Factor::Cyclic(_))
    }

    fn zero(self) -> Coord {
        match self {
            Factor::Cyclic(_) => Coord::Residue(0),
            Factor::IntegerLine => Coord::Int(0),
            Factor::Torus => Coord::Rot(Ratio::from_integer(0)),
        }
    }

    fn admits(self, c: &Coord) -> bool {
        matches!(
            (self, c),
            (Factor::Cyclic(_), Coord::Residue(_))
                | (Factor::IntegerLine, Coord::Int(_))
                | (Factor::Torus, Coord::Rot(_))
        )
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Factor::Cyclic(n) => write!(f, "Z/{n}"),
            Factor::IntegerLine => write!(f, "Z"),
            Factor::Torus => write!(f, "T"),
        }
    }
}

impl FromStr for Factor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Factor> {
        let s = s.trim();
        match s {
            "Z" => Ok(Factor::IntegerLine),
            "T" => Ok(Factor::Torus),
            _ => {
                let body = s
                    .strip_prefix("Z/")
                    .ok_or_else(|| Error::InvalidInput(format!("unknown group factor `{s}`")))?;
                let n: u64 = body
                    .parse()
                    .map_err(|_| Error::InvalidInput(format!("bad cyclic order `{s}`")))?;
                if n == 0 {
                    return Err(Error::InvalidOrder);
                }
                Ok(Factor::Cyclic(n))
            }
        }
    }
}

impl Serialize for Factor {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ser.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Factor {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Factor, D::Error> {
        let s = String::deserialize(de)?;
        s.parse().map_err(D::Error::custom)
    }
}

/// A single coordinate of a group element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Coord {
    /// Residue in `[0, n)` for a `Cyclic(n)` factor.
    Residue(u64),
    /// Signed integer for an `IntegerLine` factor.
    Int(i64),
    /// Rational rotation number in `[0, 1)`, lowest terms, for a `Torus` factor.
    Rot(Ratio<i64>),
}

impl Coord {
    fn neg(self, factor: Factor) -> Coord {
        match (self, factor) {
            (Coord::Residue(r), Factor::Cyclic(n)) => {
                Coord::Residue(if r == 0 { 0 } else { n - r })
            }
            (Coord::Int(i), _) => Coord::Int(-i),
            (Coord::Rot(r), _) => Coord::Rot(reduce_mod_one(-r)),
            _ => unreachable!("coordinate kind validated at construction"),
        }
    }

    fn add(self, other: Coord, factor: Factor) -> Coord {
        match (self, other, factor) {
            (Coord::Residue(a), Coord::Residue(b), Factor::Cyclic(n)) => {
                Coord::Residue((a + b) % n)
            }
            (Coord::Int(a), Coord::Int(b), _) => Coord::Int(a + b),
            (Coord::Rot(a), Coord::Rot(b), _) => Coord::Rot(reduce_mod_one(a + b)),
            _ => unreachable!("coordinate kind validated at construction"),
        }
    }

    fn is_zero(&self) -> bool {
        match self {
            Coord::Residue(r) => *r == 0,
            Coord::Int(i) => *i == 0,
            Coord::Rot(r) => r.numer() == &0,
        }
    }
}

fn reduce_mod_one(r: Ratio<i64>) -> Ratio<i64> {
    let f = r.floor();
    r - f
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coord::Residue(r) => write!(f, "{r}"),
            Coord::Int(i) => write!(f, "{i}"),
            Coord::Rot(r) => {
                if r.denom() == &1 {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
        }
    }
}

impl Serialize for Coord {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Coord::Residue(r) => ser.serialize_u64(*r),
            Coord::Int(i) => ser.serialize_i64(*i),
            Coord::Rot(_) => ser.collect_str(self),
        }
    }
}

// Canonical order: residues numerically, integers by magnitude with the
// nonnegative value first (0, 1, -1, 2, -2, ...), rotations by value.
// Mixed kinds never occur inside one factor; they order by discriminant.
impl Ord for Coord {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use Coord::*;
        match (self, other) {
            (Residue(a), Residue(b)) => a.cmp(b),
            (Int(a), Int(b)) => a.unsigned_abs().cmp(&b.unsigned_abs()).then_with(|| b.cmp(a)),
            (Rot(a), Rot(b)) => a.cmp(b),
            (Residue(_), _) => std::cmp::Ordering::Less,
            (_, Residue(_)) => std::cmp::Ordering::Greater,
            (Int(_), _) => std::cmp::Ordering::Less,
            (_, Int(_)) => std::cmp::Ordering::Greater,
        }
    }
}

impl PartialOrd for Coord {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// A raw coordinate as it appears in config or report files: either an
/// integer or a text rational like `"1/3"`. Typed against a group via
/// [`Element::from_raw`].
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum RawCoord {
    Int(i64),
    Text(String),
}

/// An element of a product group. Coordinates are validated and reduced
/// against a [`GroupSpec`] at construction.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Element {
    coords: Vec<Coord>,
}

/// An element of a dual group; duals are ordinary [`GroupSpec`]s, so dual
/// elements share the element representation.
pub type DualElement = Element;

impl Element {
    /// Builds an element of `group`, reducing residues modulo the factor
    /// order and rotation numbers modulo one.
    pub fn new(group: &GroupSpec, coords: Vec<Coord>) -> Result<Element> {
        if coords.len() != group.arity() {
            return Err(Error::ArityMismatch {
                expected: group.arity(),
                got: coords.len(),
            });
        }
        let mut reduced = Vec::with_capacity(coords.len());
        for (i, (c, f)) in coords.iter().zip(group.factors()).enumerate() {
            if !f.admits(c) {
                return Err(Error::CoordKindMismatch { index: i });
            }
            let c = match (c, f) {
                (Coord::Residue(r), Factor::Cyclic(n)) => Coord::Residue(r % n),
                (Coord::Rot(r), _) => Coord::Rot(reduce_mod_one(*r)),
                (c, _) => *c,
            };
            reduced.push(c);
        }
        Ok(Element { coords: reduced })
    }

    /// Convenience constructor from signed integers: residues for cyclic
    /// factors (reduced modulo the order, negatives allowed) and integers
    /// for line factors. Errors on torus factors.
    pub fn from_ints(group: &GroupSpec, vals: &[i64]) -> Result<Element> {
        if vals.len() != group.arity() {
            return Err(Error::ArityMismatch {
                expected: group.arity(),
                got: vals.len(),
            });
        }
        let coords = vals
            .iter()
            .zip(group.factors())
            .enumerate()
            .map(|(i, (&v, f))| match f {
                Factor::Cyclic(n) => {
                    let n = *n as i64;
                    Ok(Coord::Residue(v.rem_euclid(n) as u64))
                }
                Factor::IntegerLine => Ok(Coord::Int(v)),
                Factor::Torus => Err(Error::CoordKindMismatch { index: i }),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Element { coords })
    }

    /// Types a list of raw coordinates against a group. Integers map to
    /// residues or line coordinates; text rationals map to torus rotations.
    pub fn from_raw(group: &GroupSpec, raw: &[RawCoord]) -> Result<Element> {
        if raw.len() != group.arity() {
            return Err(Error::ArityMismatch {
                expected: group.arity(),
                got: raw.len(),
            });
        }
        let coords = raw
            .iter()
            .zip(group.factors())
            .enumerate()
            .map(|(i, (rc, f))| {
                let parse_ratio = |s: &str| -> Result<Ratio<i64>> {
                    let s = s.trim();
                    let (num, den) = match s.split_once('/') {
                        Some((a, b)) => (a.trim(), b.trim()),
                        None => (s, "1"),
                    };
                    let p: i64 = num
                        .parse()
                        .map_err(|_| Error::InvalidInput(format!("bad rational `{s}`")))?;
                    let q: i64 = den
                        .parse()
                        .map_err(|_| Error::InvalidInput(format!("bad rational `{s}`")))?;
                    if q == 0 {
                        return Err(Error::InvalidInput(format!("zero denominator in `{s}`")));
                    }
                    Ok(Ratio::new(p, q))
                };
                match (rc, f) {
                    (RawCoord::Int(v), Factor::Cyclic(n)) => {
                        Ok(Coord::Residue(v.rem_euclid(*n as i64) as u64))
                    }
                    (RawCoord::Int(v), Factor::IntegerLine) => Ok(Coord::Int(*v)),
                    (RawCoord::Int(v), Factor::Torus) => {
                        Ok(Coord::Rot(reduce_mod_one(Ratio::from_integer(*v))))
                    }
                    (RawCoord::Text(s), Factor::Torus) => {
                        Ok(Coord::Rot(reduce_mod_one(parse_ratio(s)?)))
                    }
                    (RawCoord::Text(s), Factor::Cyclic(n)) => {
                        let v: i64 = s.trim().parse().map_err(|_| Error::InvalidInput(
                            format!("coordinate {i}: expected integer for {f}, got `{s}`"),
                        ))?;
                        Ok(Coord::Residue(v.rem_euclid(*n as i64) as u64))
                    }
                    (RawCoord::Text(s), Factor::IntegerLine) => {
                        let v: i64 = s.trim().parse().map_err(|_| Error::InvalidInput(
                            format!("coordinate {i}: expected integer for {f}, got `{s}`"),
                        ))?;
                        Ok(Coord::Int(v))
                    }
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Element { coords })
    }

    pub fn coords(&self) -> &[Coord] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Coord::is_zero)
    }

    /// Concatenates coordinates with `other`, giving an element of the
    /// product group.
    pub fn concat(&self, other: &Element) -> Element {
        let mut coords = self.coords.clone();
        coords.extend(other.coords.iter().cloned());
        Element { coords }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// A product of cyclic, integer-line, and torus factors together with its
/// canonical dual description.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct GroupSpec {
    factors: Vec<Factor>,
}

impl<'de> Deserialize<'de> for GroupSpec {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<GroupSpec, D::Error> {
        let factors = Vec::<Factor>::deserialize(de)?;
        GroupSpec::new(factors).map_err(D::Error::custom)
    }
}

impl GroupSpec {
    pub fn new(factors: Vec<Factor>) -> Result<GroupSpec> {
        if factors.is_empty() {
            return Err(Error::EmptyGroup);
        }
        if factors.iter().any(|f| matches!(f, Factor::Cyclic(0))) {
            return Err(Error::InvalidOrder);
        }
        Ok(GroupSpec { factors })
    }

    /// The cyclic group `Z/n`.
    pub fn cyclic(n: u64) -> GroupSpec {
        GroupSpec {
            factors: vec![Factor::Cyclic(n)],
        }
    }

    /// The integer line `Z`.
    pub fn integer_line() -> GroupSpec {
        GroupSpec {
            factors: vec![Factor::IntegerLine],
        }
    }

    /// The torus `R/Z`.
    pub fn torus() -> GroupSpec {
        GroupSpec {
            factors: vec![Factor::Torus],
        }
    }

    /// The product group with `self`'s factors followed by `other`'s.
    pub fn product(&self, other: &GroupSpec) -> GroupSpec {
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().copied());
        GroupSpec { factors }
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn arity(&self) -> usize {
        self.factors.len()
    }

    /// The Pontryagin dual: `Z/n` is self-dual, the dual of `Z` is the
    /// torus, and the dual of the torus is `Z`.
    pub fn dual(&self) -> GroupSpec {
        GroupSpec {
            factors: self.factors.iter().map(|f| f.dual()).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.factors.iter().all(|f| f.is_finite())
    }

    /// Number of elements for finite groups, `None` otherwise.
    pub fn order(&self) -> Option<usize> {
        self.factors
            .iter()
            .map(|f| f.order().map(|n| n as usize))
            .product()
    }

    pub fn zero(&self) -> Element {
        Element {
            coords: self.factors.iter().map(|f| f.zero()).collect(),
        }
    }

    pub fn contains(&self, e: &Element) -> bool {
        e.coords.len() == self.arity()
            && e.coords.iter().zip(&self.factors).all(|(c, f)| f.admits(c))
    }

    /// All elements of a finite group in canonical (sorted) order.
    pub fn elements(&self) -> Result<Vec<Element>> {
        if !self.is_finite() {
            return Err(Error::InfiniteGroup);
        }
        let mut out = vec![Element { coords: vec![] }];
        for f in &self.factors {
            let n = f.order().expect("finite factor");
            let mut next = Vec::with_capacity(out.len() * n as usize);
            for e in &out {
                for r in 0..n {
                    let mut coords = e.coords.clone();
                    coords.push(Coord::Residue(r));
                    next.push(Element { coords });
                }
            }
            out = next;
        }
        out.sort();
        Ok(out)
    }

    fn check_member(&self, e: &Element) -> Result<()> {
        if e.coords.len() != self.arity() {
            return Err(Error::ArityMismatch {
                expected: self.arity(),
                got: e.coords.len(),
            });
        }
        for (i, (c, f)) in e.coords.iter().zip(&self.factors).enumerate() {
            if !f.admits(c) {
                return Err(Error::CoordKindMismatch { index: i });
            }
        }
        Ok(())
    }
}

/// Componentwise sum with residues reduced.
pub fn group_op(g: &GroupSpec, a: &Element, b: &Element) -> Result<Element> {
    g.check_member(a)?;
    g.check_member(b)?;
    let coords = a
        .coords
        .iter()
        .zip(&b.coords)
        .zip(g.factors())
        .map(|((x, y), f)| x.add(*y, *f))
        .collect();
    Ok(Element { coords })
}

/// Componentwise negation.
pub fn group_neg(g: &GroupSpec, a: &Element) -> Result<Element> {
    g.check_member(a)?;
    let coords = a
        .coords
        .iter()
        .zip(g.factors())
        .map(|(c, f)| c.neg(*f))
        .collect();
    Ok(Element { coords })
}

/// `a - b`.
pub fn group_sub(g: &GroupSpec, a: &Element, b: &Element) -> Result<Element> {
    let nb = group_neg(g, b)?;
    group_op(g, a, &nb)
}

/// The exact rational `r` in `[0, 1)` with `<x, xi> = exp(2 pi i r)`.
pub fn pairing_exponent(g: &GroupSpec, x: &Element, xi: &DualElement) -> Result<Ratio<i64>> {
    g.check_member(x)?;
    g.dual().check_member(xi)?;
    let mut total = Ratio::from_integer(0);
    for ((cx, cxi), f) in x.coords.iter().zip(&xi.coords).zip(g.factors()) {
        let term = match (cx, cxi, f) {
            (Coord::Residue(a), Coord::Residue(b), Factor::Cyclic(n)) => {
                Ratio::new(((a % n) as i64) * ((b % n) as i64) % *n as i64, *n as i64)
            }
            (Coord::Int(m), Coord::Rot(theta), Factor::IntegerLine) => {
                reduce_mod_one(theta * Ratio::from_integer(*m))
            }
            (Coord::Rot(theta), Coord::Int(m), Factor::Torus) => {
                reduce_mod_one(theta * Ratio::from_integer(*m))
            }
            _ => unreachable!("kinds validated above"),
        };
        total = reduce_mod_one(total + term);
    }
    Ok(total)
}

/// The bicharacter `<x, xi>`: a unit-modulus complex number, the product
/// over factors of `exp(2 pi i x_j xi_j / n_j)` for cyclic factors and
/// `exp(2 pi i x_j theta_j)` for line/torus factors.
pub fn pairing(g: &GroupSpec, x: &Element, xi: &DualElement) -> Result<Complex64> {
    let r = pairing_exponent(g, x, xi)?;
    let angle = 2.0 * std::f64::consts::PI * (*r.numer() as f64) / (*r.denom() as f64);
    Ok(Complex64::new(angle.cos(), angle.sin()))
}

/// Exact test for `<x, xi> = 1`.
pub fn pairing_is_one(g: &GroupSpec, x: &Element, xi: &DualElement) -> Result<bool> {
    Ok(pairing_exponent(g, x, xi)?.numer() == &0)
}

/// Cardinality of a subgroup.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SubgroupOrder {
    Finite(usize),
    Infinite,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum SubgroupShape {
    /// Explicit element list (the `elements` field is authoritative).
    Finite,
    /// The whole parent group.
    FullGroup,
    /// Product shape: arbitrary values on `full_factors`, and the finite
    /// list `base` (zero on the full slots) elsewhere.
    Span {
        full_factors: Vec<usize>,
        base: Vec<Element>,
    },
}

/// A subgroup of a [`GroupSpec`]: generators, the full element list when
/// finite, and enough shape information to answer membership questions for
/// the supported infinite shapes (the full group and full-factor spans).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubgroupData {
    parent: GroupSpec,
    generators: Vec<Element>,
    elements: Option<Vec<Element>>,
    order: SubgroupOrder,
    shape: SubgroupShape,
}

impl SubgroupData {
    /// The trivial subgroup `{0}`.
    pub fn trivial(g: &GroupSpec) -> SubgroupData {
        SubgroupData {
            parent: g.clone(),
            generators: vec![],
            elements: Some(vec![g.zero()]),
            order: SubgroupOrder::Finite(1),
            shape: SubgroupShape::Finite,
        }
    }

    /// The whole group as a subgroup of itself.
    pub fn full(g: &GroupSpec) -> SubgroupData {
        let elements = g.elements().ok();
        let order = match g.order() {
            Some(n) => SubgroupOrder::Finite(n),
            None => SubgroupOrder::Infinite,
        };
        SubgroupData {
            parent: g.clone(),
            generators: vec![],
            elements,
            order,
            shape: SubgroupShape::FullGroup,
        }
    }

    /// Builds a finite subgroup from an explicit element list, validating
    /// closure under addition and negation and membership of zero.
    pub fn from_elements(g: &GroupSpec, elements: Vec<Element>) -> Result<SubgroupData> {
        let mut sorted: Vec<Element> = elements;
        sorted.sort();
        sorted.dedup();
        let set: BTreeSet<&Element> = sorted.iter().collect();
        if !set.contains(&g.zero()) {
            return Err(Error::InvalidInput("subgroup must contain zero".into()));
        }
        for a in &sorted {
            g.check_member(a)?;
            if !set.contains(&group_neg(g, a)?) {
                return Err(Error::InvalidInput(
                    "subgroup not closed under negation".into(),
                ));
            }
            for b in &sorted {
                if !set.contains(&group_op(g, a, b)?) {
                    return Err(Error::InvalidInput(
                        "subgroup not closed under addition".into(),
                    ));
                }
            }
        }
        let shape = if g.order() == Some(sorted.len()) {
            SubgroupShape::FullGroup
        } else {
            SubgroupShape::Finite
        };
        Ok(SubgroupData {
            parent: g.clone(),
            generators: sorted.clone(),
            elements: Some(sorted.clone()),
            order: SubgroupOrder::Finite(sorted.len()),
            shape,
        })
    }

    /// The subgroup spanning the listed integer-line factors in full, and
    /// trivial on every other factor.
    pub fn line_span(g: &GroupSpec, line_factors: &[usize]) -> Result<SubgroupData> {
        if line_factors.is_empty() {
            return Ok(SubgroupData::trivial(g));
        }
        let mut idx: Vec<usize> = line_factors.to_vec();
        idx.sort_unstable();
        idx.dedup();
        for &i in &idx {
            match g.factors().get(i) {
                Some(Factor::IntegerLine) => {}
                _ => {
                    return Err(Error::InvalidInput(format!(
                        "factor {i} is not an integer line"
                    )))
                }
            }
        }
        Ok(SubgroupData {
            parent: g.clone(),
            generators: vec![],
            elements: None,
            order: SubgroupOrder::Infinite,
            shape: SubgroupShape::Span {
                full_factors: idx,
                base: vec![g.zero()],
            },
        })
    }

    fn span(g: &GroupSpec, full_factors: Vec<usize>, base: Vec<Element>) -> SubgroupData {
        if full_factors.is_empty() {
            let order = SubgroupOrder::Finite(base.len());
            let shape = if g.order() == Some(base.len()) {
                SubgroupShape::FullGroup
            } else {
                SubgroupShape::Finite
            };
            return SubgroupData {
                parent: g.clone(),
                generators: base.clone(),
                elements: Some(base.clone()),
                order,
                shape,
            };
        }
        // Full group in disguise?
        let finite_slots: Vec<usize> = (0..g.arity()).filter(|i| !full_factors.contains(i)).collect();
        let finite_order: Option<usize> = finite_slots
            .iter()
            .map(|&i| g.factors()[i].order().map(|n| n as usize))
            .product();
        let shape = if finite_order == Some(base.len()) {
            SubgroupShape::FullGroup
        } else {
            SubgroupShape::Span {
                full_factors,
                base: base.clone(),
            }
        };
        SubgroupData {
            parent: g.clone(),
            generators: base,
            elements: None,
            order: SubgroupOrder::Infinite,
            shape,
        }
    }

    pub fn parent(&self) -> &GroupSpec {
        &self.parent
    }

    pub fn generators(&self) -> &[Element] {
        &self.generators
    }

    /// Full element list; defined only for finite subgroups.
    pub fn elements(&self) -> Option<&[Element]> {
        self.elements.as_deref()
    }

    pub fn order(&self) -> SubgroupOrder {
        self.order
    }

    pub fn finite_order(&self) -> Option<usize> {
        match self.order {
            SubgroupOrder::Finite(n) => Some(n),
            SubgroupOrder::Infinite => None,
        }
    }

    pub fn is_full_group(&self) -> bool {
        matches!(self.shape, SubgroupShape::FullGroup)
    }

    pub fn is_trivial(&self) -> bool {
        self.order == SubgroupOrder::Finite(1)
    }

    pub fn contains(&self, e: &Element) -> bool {
        if !self.parent.contains(e) {
            return false;
        }
        match &self.shape {
            SubgroupShape::FullGroup => true,
            SubgroupShape::Finite => self
                .elements
                .as_ref()
                .expect("finite shape has elements")
                .binary_search(e)
                .is_ok(),
            SubgroupShape::Span { full_factors, base } => {
                let mut masked = e.clone();
                for &i in full_factors {
                    masked.coords[i] = self.parent.factors()[i].zero();
                }
                base.binary_search(&masked).is_ok()
            }
        }
    }

    /// True when every element of `other` lies in `self`. Only defined when
    /// `other` is finite or both share a representable shape.
    pub fn contains_subgroup(&self, other: &SubgroupData) -> bool {
        match other.elements() {
            Some(els) => els.iter().all(|e| self.contains(e)),
            None => match (&self.shape, &other.shape) {
                (SubgroupShape::FullGroup, _) => true,
                (
                    SubgroupShape::Span { full_factors: fa, base: _ba },
                    SubgroupShape::Span { full_factors: fb, base: bb },
                ) => fb.iter().all(|i| fa.contains(i)) && bb.iter().all(|e| self.contains(e)),
                _ => false,
            },
        }
    }
}

/// The smallest subgroup containing the generators, with the element list
/// enumerated. Errors when the closure would be infinite (a generator has
/// a nonzero integer-line coordinate).
pub fn subgroup_closure(g: &GroupSpec, generators: &[Element]) -> Result<SubgroupData> {
    for e in generators {
        g.check_member(e)?;
        for c in e.coords() {
            if let Coord::Int(i) = c {
                if *i != 0 {
                    return Err(Error::InfiniteClosure);
                }
            }
        }
    }
    let zero = g.zero();
    let mut seen: BTreeSet<Element> = BTreeSet::new();
    seen.insert(zero.clone());
    let mut frontier = vec![zero];
    while let Some(cur) = frontier.pop() {
        for gen in generators {
            let nxt = group_op(g, &cur, gen)?;
            if seen.insert(nxt.clone()) {
                frontier.push(nxt);
            }
        }
    }
    // Generators of finite order make the closure a group: it is closed
    // under addition by construction and under negation because powers of
    // each generator cycle.
    let elements: Vec<Element> = seen.into_iter().collect();
    let order = SubgroupOrder::Finite(elements.len());
    let shape = if g.order() == Some(elements.len()) {
        SubgroupShape::FullGroup
    } else {
        SubgroupShape::Finite
    };
    Ok(SubgroupData {
        parent: g.clone(),
        generators: generators.to_vec(),
        elements: Some(elements.clone()),
        order,
        shape,
    })
}

/// The annihilator `{xi : <x, xi> = 1 for all x in h}` as a subgroup of the
/// dual group. For finite parents this is an exact scan of the dual; the
/// supported infinite shapes are the trivial subgroup, the full group, and
/// full-factor spans.
pub fn annihilator(g: &GroupSpec, h: &SubgroupData) -> Result<SubgroupData> {
    if h.parent() != g {
        return Err(Error::GroupMismatch);
    }
    let dual = g.dual();
    if h.is_full_group() {
        return Ok(SubgroupData::trivial(&dual));
    }

    // Constraint elements: for span shapes the base plus the full-slot
    // requirement; for finite shapes the element list.
    let (constraints, h_full_slots): (&[Element], &[usize]) = match &h.shape {
        SubgroupShape::FullGroup => unreachable!("handled above"),
        SubgroupShape::Finite => (h.elements().expect("finite"), &[]),
        SubgroupShape::Span { full_factors, base } => (base.as_slice(), full_factors.as_slice()),
    };

    // A nonzero torus coordinate in a constraint would force the dual
    // integer-line coordinate into a proper sublattice `qZ`, which has no
    // representation here.
    for e in constraints {
        for (i, c) in e.coords().iter().enumerate() {
            if matches!(g.factors()[i], Factor::Torus) && !c.is_zero() {
                return Err(Error::UnsupportedInfiniteSubgroup);
            }
        }
    }

    // Dual coordinates on infinite-dual slots: a cyclic slot is always
    // scanned; a torus-dual slot (primal line factor) is free exactly when
    // it is not pinned by a full slot of `h`; pinned slots contribute the
    // zero coordinate. Dual line slots (primal torus factors) must be zero
    // unless unconstrained entirely, which still yields the full line.
    let mut dual_full_slots: Vec<usize> = Vec::new();
    for (i, f) in g.factors().iter().enumerate() {
        match f {
            Factor::Cyclic(_) => {}
            Factor::IntegerLine => {
                // dual slot is a torus
                if !h_full_slots.contains(&i) {
                    dual_full_slots.push(i);
                }
            }
            Factor::Torus => {
                // dual slot is an integer line; constraints are all zero on
                // this slot (checked above), so the full line annihilates.
                dual_full_slots.push(i);
            }
        }
    }

    // Scan the cyclic subproduct for characters trivial on every constraint.
    let cyclic_slots: Vec<usize> = (0..g.arity())
        .filter(|&i| g.factors()[i].is_finite())
        .collect();
    let mut base: Vec<Element> = Vec::new();
    let mut stack: Vec<Vec<u64>> = vec![vec![]];
    while let Some(partial) = stack.pop() {
        if partial.len() == cyclic_slots.len() {
            let mut coords: Vec<Coord> = dual.zero().coords.to_vec();
            for (k, &slot) in cyclic_slots.iter().enumerate() {
                coords[slot] = Coord::Residue(partial[k]);
            }
            let xi = Element { coords };
            let mut ok = true;
            for x in constraints {
                if !pairing_is_one(g, x, &xi)? {
                    ok = false;
                    break;
                }
            }
            if ok {
                base.push(xi);
            }
            continue;
        }
        let slot = cyclic_slots[partial.len()];
        let n = g.factors()[slot].order().expect("cyclic");
        // Push in reverse so the scan visits residues in increasing order.
        for r in (0..n).rev() {
            let mut nxt = partial.clone();
            nxt.push(r);
            stack.push(nxt);
        }
    }
    base.sort();
    Ok(SubgroupData::span(&dual, dual_full_slots, base))
}

/// A set of coset representatives, one per coset, canonical (minimal under
/// the coordinatewise order) and deterministic across runs. Sections of
/// infinite quotients may be truncated to an explicit finite list.
#[derive(Debug, Clone, PartialEq)]
pub struct CosetSection {
    subgroup: SubgroupData,
    representatives: Vec<Element>,
}

impl CosetSection {
    /// Wraps an explicit representative list, validating that the listed
    /// representatives lie in pairwise distinct cosets. Coverage of every
    /// coset is only guaranteed by [`coset_section`]; explicit lists may
    /// truncate an infinite quotient.
    pub fn from_representatives(
        subgroup: SubgroupData,
        representatives: Vec<Element>,
    ) -> Result<CosetSection> {
        if representatives.is_empty() {
            return Err(Error::EmptySet("coset representatives"));
        }
        let g = subgroup.parent().clone();
        for (i, a) in representatives.iter().enumerate() {
            g.check_member(a)?;
            for b in representatives.iter().skip(i + 1) {
                if subgroup.contains(&group_sub(&g, a, b)?) {
                    return Err(Error::DuplicateCoset);
                }
            }
        }
        Ok(CosetSection {
            subgroup,
            representatives,
        })
    }

    pub fn subgroup(&self) -> &SubgroupData {
        &self.subgroup
    }

    pub fn representatives(&self) -> &[Element] {
        &self.representatives
    }

    pub fn len(&self) -> usize {
        self.representatives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.representatives.is_empty()
    }

    /// Index of the representative sharing `e`'s coset, when listed.
    pub fn coset_index_of(&self, e: &Element) -> Result<Option<usize>> {
        let g = self.subgroup.parent().clone();
        for (i, r) in self.representatives.iter().enumerate() {
            if self.subgroup.contains(&group_sub(&g, e, r)?) {
                return Ok(Some(i));
            }
        }
        Ok(None)
    }
}

/// Canonical section of `g / h`: one representative per coset, each minimal
/// in its coset under the coordinatewise order. Requires a finite quotient.
pub fn coset_section(g: &GroupSpec, h: &SubgroupData) -> Result<CosetSection> {
    if h.parent() != g {
        return Err(Error::GroupMismatch);
    }
    if h.is_full_group() {
        return Ok(CosetSection {
            subgroup: h.clone(),
            representatives: vec![g.zero()],
        });
    }
    // The quotient is finite only if every infinite factor of `g` is a full
    // slot of `h`, and the rest is a finite scan.
    let full_slots: Vec<usize> = match &h.shape {
        SubgroupShape::Span { full_factors, .. } => full_factors.clone(),
        _ => vec![],
    };
    for (i, f) in g.factors().iter().enumerate() {
        if !f.is_finite() && !full_slots.contains(&i) {
            return Err(Error::InfiniteQuotient);
        }
    }
    let cyclic_slots: Vec<usize> = (0..g.arity())
        .filter(|&i| g.factors()[i].is_finite())
        .collect();
    // Enumerate the finite subproduct (zero on all other slots) in canonical
    // order; the first element seen in each coset is its minimal member.
    let mut elems: Vec<Element> = vec![g.zero()];
    for &slot in &cyclic_slots {
        let n = g.factors()[slot].order().expect("cyclic");
        let mut next = Vec::with_capacity(elems.len() * n as usize);
        for e in &elems {
            for r in 0..n {
                let mut coords = e.coords.clone();
                coords[slot] = Coord::Residue(r);
                next.push(Element { coords });
            }
        }
        elems = next;
    }
    elems.sort();
    let mut seen: BTreeSet<Element> = BTreeSet::new();
    let mut reps = Vec::new();
    for e in elems {
        if seen.contains(&e) {
            continue;
        }
        // Mark the whole coset within the finite subproduct.
        match &h.shape {
            SubgroupShape::FullGroup => unreachable!("handled above"),
            SubgroupShape::Finite => {
                for x in h.elements().expect("finite") {
                    seen.insert(group_op(g, &e, x)?);
                }
            }
            SubgroupShape::Span { base, .. } => {
                for x in base {
                    seen.insert(group_op(g, &e, x)?);
                }
            }
        }
        reps.push(e);
    }
    Ok(CosetSection {
        subgroup: h.clone(),
        representatives: reps,
    })
}

/// The first member of an increasing subgroup chain containing every
/// element of `s`.
pub fn minimal_chain_member<'a>(
    chain: &'a [SubgroupData],
    s: &[Element],
) -> Result<&'a SubgroupData> {
    if chain.is_empty() {
        return Err(Error::EmptySet("subgroup chain"));
    }
    for w in chain.windows(2) {
        if !w[1].contains_subgroup(&w[0]) {
            return Err(Error::ChainNotIncreasing);
        }
    }
    for member in chain {
        if s.iter().all(|e| member.contains(e)) {
            return Ok(member);
        }
    }
    Err(Error::ChainExhausted)
}

/// Every subgroup of a finite group, via closure of the lattice of cyclic
/// subgroups under pairwise joins.
pub fn all_subgroups(g: &GroupSpec) -> Result<Vec<SubgroupData>> {
    let elems = g.elements()?;
    let mut lists: BTreeSet<Vec<Element>> = BTreeSet::new();
    for e in &elems {
        lists.insert(
            subgroup_closure(g, std::slice::from_ref(e))?
                .elements()
                .expect("finite closure")
                .to_vec(),
        );
    }
    loop {
        let current: Vec<Vec<Element>> = lists.iter().cloned().collect();
        let before = lists.len();
        for (i, a) in current.iter().enumerate() {
            for b in current.iter().skip(i + 1) {
                let mut gens = a.clone();
                gens.extend(b.iter().cloned());
                lists.insert(
                    subgroup_closure(g, &gens)?
                        .elements()
                        .expect("finite closure")
                        .to_vec(),
                );
            }
        }
        if lists.len() == before {
            break;
        }
    }
    lists
        .into_iter()
        .map(|l| SubgroupData::from_elements(g, l))
        .collect()
}

/// Haar normalization attached to a designated compact-open subgroup `H`:
/// each point of a discrete group carries mass `1/|H|` (so `m_G(H) = 1`),
/// and the dual weight is `1/|H_perp|` on finite duals, meaning total mass
/// one on torus factors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HaarWeights {
    pub primal_weight: f64,
    pub dual_weight: f64,
}

impl HaarWeights {
    /// Weights for the normalization `m_G(H) = 1`, `m_dual(H_perp) = 1`.
    /// `H` must be finite (the compact-open model at desk scale).
    pub fn for_subgroup(g: &GroupSpec, h: &SubgroupData) -> Result<HaarWeights> {
        if h.parent() != g {
            return Err(Error::GroupMismatch);
        }
        let h_order = h
            .finite_order()
            .ok_or(Error::UnsupportedInfiniteSubgroup)?;
        let cyclic_product: usize = g
            .factors()
            .iter()
            .filter_map(|f| f.order().map(|n| n as usize))
            .product();
        Ok(HaarWeights {
            primal_weight: 1.0 / h_order as f64,
            dual_weight: h_order as f64 / cyclic_product as f64,
        })
    }

    /// Counting measure on both sides (`H = {0}` on a group with no cyclic
    /// part).
    pub fn counting() -> HaarWeights {
        HaarWeights {
            primal_weight: 1.0,
            dual_weight: 1.0,
        }
    }

    /// The weights seen from the dual side.
    pub fn swapped(&self) -> HaarWeights {
        HaarWeights {
            primal_weight: self.dual_weight,
            dual_weight: self.primal_weight,
        }
    }
}
