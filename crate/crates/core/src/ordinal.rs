//! Ordinals below ω^(ω+1) in Cantor normal form, natural (Hessenberg)
//! arithmetic on them, and ordinal-valued polynomial functions of an index.
//!
//! Text syntax: terms `w^k*c` joined by `+`, highest exponent first. `w`
//! abbreviates `w^1`, a coefficient of one is omitted, `w^w` is the ω
//! exponent and the empty sum is written `0`. Parsing accepts only the
//! canonical form, so `format` and `parse` are mutually inverse.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrdinalError {
    #[error("coefficient-wise dominance fails; difference is not defined")]
    Dominance,
    #[error("minimum of an empty set")]
    EmptySet,
    #[error("ω⃗ is a rank, not an exponent")]
    ArrowOmegaExponent,
    #[error("index {n} is below the validity start {valid_from}")]
    BelowValidFrom { n: u64, valid_from: u64 },
    #[error("coefficient polynomial for exponent {exponent} is negative somewhere from n = {valid_from}")]
    NegativeCoefficient { exponent: Exponent, valid_from: u64 },
    #[error("parse error at {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

fn parse_err(pos: usize, msg: impl Into<String>) -> OrdinalError {
    OrdinalError::Parse { pos, msg: msg.into() }
}

/// Rank of a wnode, section or galaxy: 0, 1, 2, …, ω⃗, ω.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtRank {
    Fin(u32),
    ArrowOmega,
    Omega,
}

impl ExtRank {
    /// The rank written `ρ−1` for the incidence relations: ω−1 is ω⃗.
    /// `None` for rank 0 and for ω⃗, which has no predecessor.
    pub fn predecessor(self) -> Option<ExtRank> {
        match self {
            ExtRank::Fin(0) | ExtRank::ArrowOmega => None,
            ExtRank::Fin(k) => Some(ExtRank::Fin(k - 1)),
            ExtRank::Omega => Some(ExtRank::ArrowOmega),
        }
    }

    /// Exponent of the bound ω^ρ; `None` for ω⃗.
    pub fn exponent(self) -> Option<Exponent> {
        match self {
            ExtRank::Fin(k) => Some(Exponent::Fin(k)),
            ExtRank::ArrowOmega => None,
            ExtRank::Omega => Some(Exponent::Omega),
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtRank::Fin(_))
    }
}

impl fmt::Display for ExtRank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtRank::Fin(k) => write!(f, "{k}"),
            ExtRank::ArrowOmega => f.write_str("warrow"),
            ExtRank::Omega => f.write_str("omega"),
        }
    }
}

impl FromStr for ExtRank {
    type Err = OrdinalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "warrow" | "w->" => Ok(ExtRank::ArrowOmega),
            "omega" | "w" => Ok(ExtRank::Omega),
            t => t
                .parse::<u32>()
                .map(ExtRank::Fin)
                .map_err(|_| parse_err(0, format!("unknown rank `{t}`"))),
        }
    }
}

impl Serialize for ExtRank {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtRank::Fin(k) => s.serialize_u32(*k),
            other => s.serialize_str(&other.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for ExtRank {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(u32),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(k) => Ok(ExtRank::Fin(k)),
            Raw::Text(t) if t == "warrow" => Ok(ExtRank::ArrowOmega),
            Raw::Text(t) if t == "omega" => Ok(ExtRank::Omega),
            Raw::Text(t) => Err(serde::de::Error::custom(format!(
                "rank must be a natural, \"warrow\" or \"omega\", got \"{t}\""
            ))),
        }
    }
}

/// Exponent of a Cantor normal form term: a natural or ω.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Exponent {
    Fin(u32),
    Omega,
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Fin(k) => write!(f, "{k}"),
            Exponent::Omega => f.write_str("w"),
        }
    }
}

/// An ordinal `ω^e1·c1 + … + ω^ek·ck` with `e1 > … > ek` and every `ci > 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Ordinal {
    terms: Vec<(Exponent, u64)>,
}

impl Ordinal {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn finite(n: u64) -> Self {
        Self::from_terms([(Exponent::Fin(0), n)])
    }

    /// Builds an ordinal from arbitrary (exponent, coefficient) pairs,
    /// merging equal exponents and dropping zero coefficients.
    pub fn from_terms(terms: impl IntoIterator<Item = (Exponent, u64)>) -> Self {
        let mut acc: BTreeMap<Exponent, u64> = BTreeMap::new();
        for (e, c) in terms {
            let slot = acc.entry(e).or_insert(0);
            *slot = slot.checked_add(c).expect("ordinal coefficient overflow");
        }
        let terms = acc.into_iter().rev().filter(|&(_, c)| c > 0).collect();
        Ordinal { terms }
    }

    /// ω^e · c as a single term.
    pub fn monomial(e: Exponent, c: u64) -> Self {
        Self::from_terms([(e, c)])
    }

    pub fn terms(&self) -> &[(Exponent, u64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of ω^e (zero when absent).
    pub fn coefficient(&self, e: Exponent) -> u64 {
        self.terms.iter().find(|(x, _)| *x == e).map_or(0, |&(_, c)| c)
    }

    pub fn leading_exponent(&self) -> Option<Exponent> {
        self.terms.first().map(|&(e, _)| e)
    }
}

impl Ord for Ordinal {
    fn cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.terms.iter().zip(&other.terms) {
            match a.0.cmp(&b.0).then(a.1.cmp(&b.1)) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        self.terms.len().cmp(&other.terms.len())
    }
}

impl PartialOrd for Ordinal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub fn compare(a: &Ordinal, b: &Ordinal) -> Ordering {
    a.cmp(b)
}

/// Hessenberg sum: coefficient-wise addition of the normal forms.
pub fn nat_sum(a: &Ordinal, b: &Ordinal) -> Ordinal {
    Ordinal::from_terms(a.terms.iter().chain(&b.terms).copied())
}

pub fn nat_mul(a: &Ordinal, k: u64) -> Ordinal {
    Ordinal::from_terms(a.terms.iter().map(|&(e, c)| {
        (e, c.checked_mul(k).expect("ordinal coefficient overflow"))
    }))
}

/// ω^r as a single-term ordinal; ω^0 = 1.
pub fn omega_pow(r: ExtRank) -> Result<Ordinal, OrdinalError> {
    let e = r.exponent().ok_or(OrdinalError::ArrowOmegaExponent)?;
    Ok(Ordinal::monomial(e, 1))
}

/// Coefficient-wise difference, defined only when every coefficient of `b`
/// is at most the matching coefficient of `a`.
pub fn nat_diff(a: &Ordinal, b: &Ordinal) -> Result<Ordinal, OrdinalError> {
    let mut out = Vec::with_capacity(a.terms.len());
    for &(e, cb) in &b.terms {
        if a.coefficient(e) < cb {
            return Err(OrdinalError::Dominance);
        }
    }
    for &(e, ca) in &a.terms {
        out.push((e, ca - b.coefficient(e)));
    }
    Ok(Ordinal::from_terms(out))
}

pub fn min_ordinal<'a>(s: impl IntoIterator<Item = &'a Ordinal>) -> Result<Ordinal, OrdinalError> {
    s.into_iter().min().cloned().ok_or(OrdinalError::EmptySet)
}

impl fmt::Display for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, &(e, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str("+")?;
            }
            match e {
                Exponent::Fin(0) => write!(f, "{c}")?,
                Exponent::Fin(1) => f.write_str("w")?,
                Exponent::Fin(k) => write!(f, "w^{k}")?,
                Exponent::Omega => f.write_str("w^w")?,
            }
            if e != Exponent::Fin(0) && c != 1 {
                write!(f, "*{c}")?;
            }
        }
        Ok(())
    }
}

/// Reads a canonical decimal natural without leading zeros.
fn take_natural(s: &str, pos: usize) -> Result<(u64, usize), OrdinalError> {
    let len = s[pos..].bytes().take_while(u8::is_ascii_digit).count();
    if len == 0 {
        return Err(parse_err(pos, "expected a natural number"));
    }
    let digits = &s[pos..pos + len];
    if len > 1 && digits.starts_with('0') {
        return Err(parse_err(pos, "leading zero"));
    }
    let v = digits.parse::<u64>().map_err(|_| parse_err(pos, "number too large"))?;
    Ok((v, pos + len))
}

impl FromStr for Ordinal {
    type Err = OrdinalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "0" {
            return Ok(Ordinal::zero());
        }
        let mut terms: Vec<(Exponent, u64)> = Vec::new();
        let mut pos = 0;
        loop {
            let term_start = pos;
            let (e, c);
            if s[pos..].starts_with('w') {
                pos += 1;
                if s[pos..].starts_with('^') {
                    pos += 1;
                    if s[pos..].starts_with('w') {
                        pos += 1;
                        e = Exponent::Omega;
                    } else {
                        let (k, next) = take_natural(s, pos)?;
                        if k < 2 {
                            return Err(parse_err(pos, "exponents 0 and 1 are written without `^`"));
                        }
                        e = Exponent::Fin(u32::try_from(k).map_err(|_| parse_err(pos, "exponent too large"))?);
                        pos = next;
                    }
                } else {
                    e = Exponent::Fin(1);
                }
                if s[pos..].starts_with('*') {
                    let (k, next) = take_natural(s, pos + 1)?;
                    if k < 2 {
                        return Err(parse_err(pos + 1, "coefficient must be at least 2 when written"));
                    }
                    c = k;
                    pos = next;
                } else {
                    c = 1;
                }
            } else {
                let (k, next) = take_natural(s, pos)?;
                if k == 0 {
                    return Err(parse_err(pos, "zero term inside a sum"));
                }
                e = Exponent::Fin(0);
                c = k;
                pos = next;
            }
            if let Some(&(prev, _)) = terms.last() {
                if prev <= e {
                    return Err(parse_err(term_start, "exponents must be strictly descending"));
                }
            }
            terms.push((e, c));
            if pos == s.len() {
                break;
            }
            if !s[pos..].starts_with('+') {
                return Err(parse_err(pos, "expected `+`"));
            }
            pos += 1;
        }
        Ok(Ordinal { terms })
    }
}

impl Serialize for Ordinal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Ordinal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Integer polynomial in one variable, coefficients from the constant term up.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct IntPoly {
    coeffs: Vec<i64>,
}

impl IntPoly {
    pub fn new(mut coeffs: Vec<i64>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        IntPoly { coeffs }
    }

    pub fn constant(c: i64) -> Self {
        Self::new(vec![c])
    }

    /// `slope·n + intercept`.
    pub fn affine(slope: i64, intercept: i64) -> Self {
        Self::new(vec![intercept, slope])
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with the zero polynomial reported as degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> i64 {
        self.coeffs.last().copied().unwrap_or(0)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn eval(&self, n: u64) -> i128 {
        let n = n as i128;
        self.coeffs.iter().rev().fold(0i128, |acc, &c| acc * n + c as i128)
    }

    pub fn add(&self, other: &IntPoly) -> IntPoly {
        let len = self.coeffs.len().max(other.coeffs.len());
        IntPoly::new(
            (0..len)
                .map(|i| self.coeffs.get(i).copied().unwrap_or(0) + other.coeffs.get(i).copied().unwrap_or(0))
                .collect(),
        )
    }

    pub fn scale(&self, k: i64) -> IntPoly {
        IntPoly::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    pub fn sub(&self, other: &IntPoly) -> IntPoly {
        self.add(&other.scale(-1))
    }

    /// Sign of `p(n)` for all sufficiently large `n`.
    pub fn eventual_sign(&self) -> Ordering {
        self.leading().cmp(&0)
    }

    /// Whether `p(n) ≥ 0` for every `n ≥ n0`.
    pub fn nonneg_from(&self, n0: u64) -> bool {
        if self.is_constant() {
            return self.leading() >= 0;
        }
        if self.leading() < 0 {
            return false;
        }
        // Cauchy bound: every real root lies below 1 + max |a_i / a_d|.
        let lead = self.leading().unsigned_abs();
        let bound = 1 + self.coeffs[..self.coeffs.len() - 1]
            .iter()
            .map(|c| c.unsigned_abs().div_ceil(lead))
            .max()
            .unwrap_or(0);
        (n0..bound.max(n0)).all(|n| self.eval(n) >= 0)
    }
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (deg, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            let mag = c.unsigned_abs();
            if first {
                if c < 0 {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if c < 0 { "-" } else { "+" })?;
            }
            first = false;
            match (deg, mag) {
                (0, m) => write!(f, "{m}")?,
                (1, 1) => f.write_str("n")?,
                (1, m) => write!(f, "{m}n")?,
                (d, 1) => write!(f, "n^{d}")?,
                (d, m) => write!(f, "{m}n^{d}")?,
            }
        }
        Ok(())
    }
}

/// Growth of an ordinal polynomial against the bound ω^ρ·μ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GrowthClass {
    BoundedBy(u64),
    Unbounded,
}

/// An ordinal-valued function `n ↦ Σ ω^e · p_e(n)` of a natural index,
/// well formed for every `n ≥ valid_from`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct OrdinalPoly {
    terms: BTreeMap<Exponent, IntPoly>,
    valid_from: u64,
}

impl OrdinalPoly {
    pub fn new(terms: BTreeMap<Exponent, IntPoly>, valid_from: u64) -> Result<Self, OrdinalError> {
        for (&exponent, p) in &terms {
            if !p.nonneg_from(valid_from) {
                return Err(OrdinalError::NegativeCoefficient { exponent, valid_from });
            }
        }
        let terms = terms.into_iter().filter(|(_, p)| !p.is_zero()).collect();
        Ok(OrdinalPoly { terms, valid_from })
    }

    /// The constant function with value `a`.
    pub fn constant(a: &Ordinal) -> Self {
        OrdinalPoly {
            terms: a.terms().iter().map(|&(e, c)| (e, IntPoly::constant(c as i64))).collect(),
            valid_from: 0,
        }
    }

    pub fn terms(&self) -> &BTreeMap<Exponent, IntPoly> {
        &self.terms
    }

    pub fn valid_from(&self) -> u64 {
        self.valid_from
    }

    pub fn coefficient(&self, e: Exponent) -> IntPoly {
        self.terms.get(&e).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn evaluate(&self, n: u64) -> Result<Ordinal, OrdinalError> {
        if n < self.valid_from {
            return Err(OrdinalError::BelowValidFrom { n, valid_from: self.valid_from });
        }
        Ok(Ordinal::from_terms(self.terms.iter().map(|(&e, p)| {
            let v = p.eval(n);
            (e, u64::try_from(v).expect("coefficient polynomial left its valid range"))
        })))
    }

    /// Decides whether `f(n) ≤ ω^ρ·μ` for some μ and all large `n`, with the
    /// least such μ. For ρ = ω⃗ the test is `f(n) < ω^ω` and μ is the least
    /// natural with `f(n) ≤ ω^μ`.
    pub fn growth_class(&self, rho: ExtRank) -> GrowthClass {
        match rho.exponent() {
            None => {
                if self.terms.contains_key(&Exponent::Omega) {
                    return GrowthClass::Unbounded;
                }
                let Some((&Exponent::Fin(top), p)) = self.terms.iter().next_back() else {
                    return GrowthClass::BoundedBy(0);
                };
                let exactly_power = self.terms.len() == 1 && *p == IntPoly::constant(1);
                GrowthClass::BoundedBy(if exactly_power { top as u64 } else { top as u64 + 1 })
            }
            Some(threshold) => {
                if self.terms.range(threshold..).any(|(&e, _)| e > threshold) {
                    return GrowthClass::Unbounded;
                }
                let p = self.coefficient(threshold);
                if !p.is_constant() {
                    return GrowthClass::Unbounded;
                }
                let lower = self.terms.range(..threshold).next().is_some();
                GrowthClass::BoundedBy(p.leading() as u64 + u64::from(lower))
            }
        }
    }

    /// Compares `self(n)` with `other(n)` for all sufficiently large `n`.
    pub fn eventual_cmp(&self, other: &OrdinalPoly) -> Ordering {
        let exps: std::collections::BTreeSet<Exponent> =
            self.terms.keys().chain(other.terms.keys()).copied().collect();
        for e in exps.into_iter().rev() {
            let d = self.coefficient(e).sub(&other.coefficient(e));
            match d.eventual_sign() {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        Ordering::Equal
    }

    /// Per-exponent signed difference `self − other`.
    pub fn difference(&self, other: &OrdinalPoly) -> BTreeMap<Exponent, IntPoly> {
        let exps: std::collections::BTreeSet<Exponent> =
            self.terms.keys().chain(other.terms.keys()).copied().collect();
        exps.into_iter()
            .map(|e| (e, self.coefficient(e).sub(&other.coefficient(e))))
            .filter(|(_, p)| !p.is_zero())
            .collect()
    }

    pub fn nat_sum(&self, other: &OrdinalPoly) -> OrdinalPoly {
        let mut terms = self.terms.clone();
        for (&e, p) in &other.terms {
            let slot = terms.entry(e).or_default();
            *slot = slot.add(p);
        }
        OrdinalPoly { terms, valid_from: self.valid_from.max(other.valid_from) }
    }

    pub fn nat_mul(&self, k: u64) -> OrdinalPoly {
        let terms = if k == 0 {
            BTreeMap::new()
        } else {
            self.terms.iter().map(|(&e, p)| (e, p.scale(k as i64))).collect()
        };
        OrdinalPoly { terms, valid_from: self.valid_from }
    }

    pub fn with_valid_from(mut self, n0: u64) -> Result<OrdinalPoly, OrdinalError> {
        let n0 = n0.max(self.valid_from);
        self.valid_from = n0;
        OrdinalPoly::new(self.terms, n0)
    }
}

impl fmt::Display for OrdinalPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (&e, p)) in self.terms.iter().rev().enumerate() {
            if i > 0 {
                f.write_str("+")?;
            }
            let coeff = if p.coeffs().len() == 1 { p.to_string() } else { format!("({p})") };
            match e {
                Exponent::Fin(0) => f.write_str(&coeff)?,
                Exponent::Fin(1) => write!(f, "w*{coeff}")?,
                Exponent::Fin(k) => write!(f, "w^{k}*{coeff}")?,
                Exponent::Omega => write!(f, "w^w*{coeff}")?,
            }
        }
        Ok(())
    }
}

impl Serialize for OrdinalPoly {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}
