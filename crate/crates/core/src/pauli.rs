//! Pauli strings and real-weighted Pauli sums in symplectic form.
//!
//! A string on n <= 64 qubits is stored as an x mask, a z mask and a global
//! phase exponent s, representing i^s * X^x * Z^z. Qubit k corresponds to
//! mask bit k-1; all public interfaces take 1-based qubit indices.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub const MAX_QUBITS: usize = 64;

/// Single-qubit Pauli letter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Letter {
    I,
    X,
    Y,
    Z,
}

impl Letter {
    fn from_bits(x: bool, z: bool) -> Letter {
        match (x, z) {
            (false, false) => Letter::I,
            (true, false) => Letter::X,
            (true, true) => Letter::Y,
            (false, true) => Letter::Z,
        }
    }

    fn bits(self) -> (bool, bool) {
        match self {
            Letter::I => (false, false),
            Letter::X => (true, false),
            Letter::Y => (true, true),
            Letter::Z => (false, true),
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
}

/// Signed Pauli product on a fixed number of qubits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    x_mask: u64,
    z_mask: u64,
    phase: u8,
}

fn check_qubit_count(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::TooManyQubits(n, MAX_QUBITS));
    }
    Ok(())
}

fn mask_for(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

impl PauliString {
    /// The identity operator on n qubits.
    pub fn identity(n: usize) -> Result<PauliString> {
        check_qubit_count(n)?;
        Ok(PauliString { n, x_mask: 0, z_mask: 0, phase: 0 })
    }

    /// A single letter on the given qubit, identity elsewhere.
    pub fn single(n: usize, qubit: usize, letter: Letter) -> Result<PauliString> {
        check_qubit_count(n)?;
        if qubit == 0 || qubit > n {
            return Err(Error::QubitOutOfRange(qubit, n));
        }
        let (x, z) = letter.bits();
        let bit = 1u64 << (qubit - 1);
        let phase = if letter == Letter::Y { 1 } else { 0 };
        Ok(PauliString {
            n,
            x_mask: if x { bit } else { 0 },
            z_mask: if z { bit } else { 0 },
            phase,
        })
    }

    /// Builds i^phase * X^x * Z^z directly from masks.
    pub fn from_masks(n: usize, x_mask: u64, z_mask: u64, phase: u8) -> Result<PauliString> {
        check_qubit_count(n)?;
        let allowed = mask_for(n);
        if x_mask & !allowed != 0 || z_mask & !allowed != 0 {
            return Err(Error::QubitOutOfRange(64, n));
        }
        Ok(PauliString { n, x_mask, z_mask, phase: phase % 4 })
    }

    /// Builds the unsigned letter product, e.g. letters [Y,X,Y] for "YXY".
    pub fn from_letters(letters: &[Letter]) -> Result<PauliString> {
        check_qubit_count(letters.len())?;
        let mut x_mask = 0u64;
        let mut z_mask = 0u64;
        let mut ys = 0u8;
        for (idx, letter) in letters.iter().enumerate() {
            let (x, z) = letter.bits();
            if x {
                x_mask |= 1 << idx;
            }
            if z {
                z_mask |= 1 << idx;
            }
            if *letter == Letter::Y {
                ys = ys.wrapping_add(1);
            }
        }
        Ok(PauliString { n: letters.len(), x_mask, z_mask, phase: ys % 4 })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x_mask(&self) -> u64 {
        self.x_mask
    }

    pub fn z_mask(&self) -> u64 {
        self.z_mask
    }

    /// Exponent s of the global phase i^s.
    pub fn phase(&self) -> u8 {
        self.phase
    }

    /// Number of qubits carrying Y.
    pub fn y_count(&self) -> u32 {
        (self.x_mask & self.z_mask).count_ones()
    }

    /// Mask of qubits carrying a non-identity letter.
    pub fn support_mask(&self) -> u64 {
        self.x_mask | self.z_mask
    }

    pub fn weight(&self) -> u32 {
        self.support_mask().count_ones()
    }

    pub fn is_identity_letters(&self) -> bool {
        self.support_mask() == 0
    }

    /// Letter at a 1-based qubit index. Panics if out of range.
    pub fn letter(&self, qubit: usize) -> Letter {
        assert!(qubit >= 1 && qubit <= self.n, "qubit {qubit} out of range");
        let bit = 1u64 << (qubit - 1);
        Letter::from_bits(self.x_mask & bit != 0, self.z_mask & bit != 0)
    }

    pub fn letters(&self) -> Vec<Letter> {
        (1..=self.n).map(|q| self.letter(q)).collect()
    }

    /// The product self * other. Phases compose exactly:
    /// (i^s X^a Z^b)(i^t X^c Z^d) = i^(s+t+2|b&c|) X^(a^c) Z^(b^d).
    pub fn mul(&self, other: &PauliString) -> Result<PauliString> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(self.n, other.n));
        }
        let crossings = (self.z_mask & other.x_mask).count_ones();
        let phase = (self.phase as u32 + other.phase as u32 + 2 * crossings) % 4;
        Ok(PauliString {
            n: self.n,
            x_mask: self.x_mask ^ other.x_mask,
            z_mask: self.z_mask ^ other.z_mask,
            phase: phase as u8,
        })
    }

    /// Whether the two products commute as operators.
    pub fn commutes_with(&self, other: &PauliString) -> Result<bool> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(self.n, other.n));
        }
        let sym = (self.x_mask & other.z_mask).count_ones()
            + (self.z_mask & other.x_mask).count_ones();
        Ok(sym % 2 == 0)
    }

    /// Phase exponent relative to the unsigned letter product: 0 means the
    /// string equals its letters, 2 means minus the letters, 1 and 3 mean a
    /// factor of i or -i (not Hermitian).
    fn letter_phase_delta(&self) -> u8 {
        ((self.phase as u32 + 4 - self.y_count() % 4) % 4) as u8
    }

    pub fn is_hermitian(&self) -> bool {
        self.letter_phase_delta() % 2 == 0
    }

    /// +1.0 or -1.0 relative to the unsigned letter product, if Hermitian.
    pub fn hermitian_sign(&self) -> Option<f64> {
        match self.letter_phase_delta() {
            0 => Some(1.0),
            2 => Some(-1.0),
            _ => None,
        }
    }

    /// Splits a Hermitian string into its sign and unsigned letter form.
    pub fn canonical(&self) -> Result<(f64, PauliString)> {
        let sign = self
            .hermitian_sign()
            .ok_or_else(|| Error::NotHermitian(self.to_string()))?;
        Ok((
            sign,
            PauliString {
                n: self.n,
                x_mask: self.x_mask,
                z_mask: self.z_mask,
                phase: (self.y_count() % 4) as u8,
            },
        ))
    }

    pub fn negated(&self) -> PauliString {
        PauliString { phase: (self.phase + 2) % 4, ..*self }
    }

    /// Rebuilds the string under a relabelling of qubits; perm[k-1] is the new
    /// 1-based index of old qubit k, and must be a permutation of 1..=n.
    pub fn relabelled(&self, perm: &[usize]) -> Result<PauliString> {
        if perm.len() != self.n {
            return Err(Error::DimensionMismatch(perm.len(), self.n));
        }
        let mut seen = 0u64;
        let mut x_mask = 0u64;
        let mut z_mask = 0u64;
        for (old, &new) in perm.iter().enumerate() {
            if new == 0 || new > self.n {
                return Err(Error::QubitOutOfRange(new, self.n));
            }
            let bit = 1u64 << (new - 1);
            if seen & bit != 0 {
                return Err(Error::Construction(format!(
                    "relabelling maps two qubits to {new}"
                )));
            }
            seen |= bit;
            if self.x_mask >> old & 1 != 0 {
                x_mask |= bit;
            }
            if self.z_mask >> old & 1 != 0 {
                z_mask |= bit;
            }
        }
        Ok(PauliString { n: self.n, x_mask, z_mask, phase: self.phase })
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.letter_phase_delta() {
            1 => write!(f, "i")?,
            2 => write!(f, "-")?,
            3 => write!(f, "-i")?,
            _ => {}
        }
        for q in 1..=self.n {
            write!(f, "{}", self.letter(q).as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Parses signed letter text such as "ZXZ" or "-YXY". The first letter is
    /// qubit 1. An optional leading + or - sets the sign.
    fn from_str(text: &str) -> Result<PauliString> {
        let bad = |message: &str| Error::BadOperatorText {
            text: text.to_string(),
            message: message.to_string(),
        };
        let trimmed = text.trim();
        let (negative, body) = match trimmed.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, trimmed.strip_prefix('+').unwrap_or(trimmed)),
        };
        if body.is_empty() {
            return Err(bad("no letters"));
        }
        if body.len() > MAX_QUBITS {
            return Err(bad("more than 64 letters"));
        }
        let mut letters = Vec::with_capacity(body.len());
        for c in body.chars() {
            letters.push(match c {
                'I' => Letter::I,
                'X' => Letter::X,
                'Y' => Letter::Y,
                'Z' => Letter::Z,
                _ => return Err(bad(&format!("unexpected character {c:?}"))),
            });
        }
        let p = PauliString::from_letters(&letters)?;
        Ok(if negative { p.negated() } else { p })
    }
}

/// Real-weighted sum of Hermitian Pauli strings on a fixed qubit count.
///
/// Terms are stored with unsigned letter strings (signs folded into the
/// coefficients), sorted by (x_mask, z_mask), with exact-zero terms dropped.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSum {
    n: usize,
    terms: Vec<(f64, PauliString)>,
}

impl PauliSum {
    pub fn zero(n: usize) -> Result<PauliSum> {
        check_qubit_count(n)?;
        Ok(PauliSum { n, terms: Vec::new() })
    }

    /// Collects (coefficient, string) pairs, folding signs, merging duplicate
    /// strings and dropping terms whose coefficient cancels to exactly zero.
    /// Every string must be Hermitian.
    pub fn from_terms<T>(n: usize, terms: T) -> Result<PauliSum>
    where
        T: IntoIterator<Item = (f64, PauliString)>,
    {
        check_qubit_count(n)?;
        let mut collected: Vec<(f64, PauliString)> = Vec::new();
        for (coeff, p) in terms {
            if p.n() != n {
                return Err(Error::DimensionMismatch(p.n(), n));
            }
            let (sign, canonical) = p.canonical()?;
            collected.push((coeff * sign, canonical));
        }
        collected.sort_by_key(|(_, p)| (p.x_mask(), p.z_mask()));
        let mut merged: Vec<(f64, PauliString)> = Vec::with_capacity(collected.len());
        for (coeff, p) in collected {
            match merged.last_mut() {
                Some((last_coeff, last_p))
                    if last_p.x_mask() == p.x_mask() && last_p.z_mask() == p.z_mask() =>
                {
                    *last_coeff += coeff;
                }
                _ => merged.push((coeff, p)),
            }
        }
        merged.retain(|(coeff, _)| *coeff != 0.0);
        Ok(PauliSum { n, terms: merged })
    }

    pub fn from_texts(n: usize, texts: &[(f64, &str)]) -> Result<PauliSum> {
        let mut terms = Vec::with_capacity(texts.len());
        for (coeff, text) in texts {
            let p: PauliString = text.parse()?;
            if p.n() != n {
                return Err(Error::DimensionMismatch(p.n(), n));
            }
            terms.push((*coeff, p));
        }
        PauliSum::from_terms(n, terms)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Terms in ascending (x_mask, z_mask) order; strings are unsigned letter
    /// forms and coefficients carry the signs.
    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &PauliSum) -> Result<PauliSum> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(self.n, other.n));
        }
        PauliSum::from_terms(
            self.n,
            self.terms.iter().chain(other.terms.iter()).map(|&(c, p)| (c, p)),
        )
    }

    pub fn scaled(&self, factor: f64) -> Result<PauliSum> {
        PauliSum::from_terms(self.n, self.terms.iter().map(|&(c, p)| (c * factor, p)))
    }

    /// Operator product, expanded term by term. Cross products with an i or
    /// -i phase are allowed along the way but must cancel; a net imaginary
    /// residue means the product is not Hermitian and is rejected.
    pub fn mul(&self, other: &PauliSum) -> Result<PauliSum> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(self.n, other.n));
        }
        let mut accumulated: std::collections::BTreeMap<(u64, u64), (f64, f64)> =
            std::collections::BTreeMap::new();
        for (ca, pa) in &self.terms {
            for (cb, pb) in &other.terms {
                let product = pa.mul(pb)?;
                let weight = ca * cb;
                let (re, im) = match product.letter_phase_delta() {
                    0 => (weight, 0.0),
                    1 => (0.0, weight),
                    2 => (-weight, 0.0),
                    _ => (0.0, -weight),
                };
                let entry = accumulated
                    .entry((product.x_mask, product.z_mask))
                    .or_insert((0.0, 0.0));
                entry.0 += re;
                entry.1 += im;
            }
        }
        let mut terms = Vec::with_capacity(accumulated.len());
        for ((x_mask, z_mask), (re, im)) in accumulated {
            let canonical = PauliString {
                n: self.n,
                x_mask,
                z_mask,
                phase: ((x_mask & z_mask).count_ones() % 4) as u8,
            };
            if im.abs() > 1e-9 {
                return Err(Error::NotHermitian(canonical.to_string()));
            }
            if re != 0.0 {
                terms.push((re, canonical));
            }
        }
        PauliSum::from_terms(self.n, terms)
    }

    /// Largest absolute coefficient difference against another sum, treating
    /// missing terms as zero.
    pub fn max_coeff_distance(&self, other: &PauliSum) -> Result<f64> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(self.n, other.n));
        }
        let mut worst = 0.0f64;
        let key = |p: &PauliString| (p.x_mask(), p.z_mask());
        let mut i = 0;
        let mut j = 0;
        while i < self.terms.len() || j < other.terms.len() {
            let (da, db) = match (self.terms.get(i), other.terms.get(j)) {
                (Some((ca, pa)), Some((cb, pb))) => match key(pa).cmp(&key(pb)) {
                    std::cmp::Ordering::Less => (*ca, 0.0),
                    std::cmp::Ordering::Greater => (0.0, *cb),
                    std::cmp::Ordering::Equal => (*ca, *cb),
                },
                (Some((ca, _)), None) => (*ca, 0.0),
                (None, Some((cb, _))) => (0.0, *cb),
                (None, None) => break,
            };
            worst = worst.max((da - db).abs());
            if da != 0.0 {
                i += 1;
            }
            if db != 0.0 {
                j += 1;
            }
        }
        Ok(worst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(text: &str) -> PauliString {
        text.parse().unwrap()
    }

    #[test]
    fn x_times_z_is_minus_i_y() {
        let x = PauliString::single(1, 1, Letter::X).unwrap();
        let z = PauliString::single(1, 1, Letter::Z).unwrap();
        let xz = x.mul(&z).unwrap();
        assert_eq!(xz.to_string(), "-iY");
        assert!(!xz.is_hermitian());
        let zx = z.mul(&x).unwrap();
        assert_eq!(zx.to_string(), "iY");
    }

    #[test]
    fn path_generator_product_is_plus_yyz() {
        let g1 = p("XZI");
        let g2 = p("ZXZ");
        let g1g2 = g1.mul(&g2).unwrap();
        assert_eq!(g1g2.to_string(), "YYZ");
        assert_eq!(g1g2.hermitian_sign(), Some(1.0));
        let g3 = p("IZX");
        let g123 = g1g2.mul(&g3).unwrap();
        assert_eq!(g123.to_string(), "-YXY");
        assert_eq!(g123.hermitian_sign(), Some(-1.0));
    }

    #[test]
    fn masks_compose_by_xor() {
        let a = p("XYIZ");
        let b = p("ZYXI");
        let ab = a.mul(&b).unwrap();
        assert_eq!(ab.x_mask(), a.x_mask() ^ b.x_mask());
        assert_eq!(ab.z_mask(), a.z_mask() ^ b.z_mask());
    }

    #[test]
    fn commutation_matches_overlap_parity() {
        assert!(!p("X").commutes_with(&p("Z")).unwrap());
        assert!(p("XX").commutes_with(&p("ZZ")).unwrap());
        assert!(p("XZI").commutes_with(&p("ZXZ")).unwrap());
        assert!(p("Y").commutes_with(&p("Y")).unwrap());
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let err = p("XX").mul(&p("X")).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch(2, 1));
    }

    #[test]
    fn text_roundtrip_keeps_sign_and_letters() {
        for text in ["ZXZ", "-YXY", "IIX", "Y", "-IZ"] {
            let parsed: PauliString = text.parse().unwrap();
            assert_eq!(parsed.to_string(), text);
        }
        let plus: PauliString = "+ZXZ".parse().unwrap();
        assert_eq!(plus.to_string(), "ZXZ");
    }

    #[test]
    fn malformed_text_is_rejected() {
        assert!("".parse::<PauliString>().is_err());
        assert!("-".parse::<PauliString>().is_err());
        assert!("XQZ".parse::<PauliString>().is_err());
        assert!("x".parse::<PauliString>().is_err());
    }

    #[test]
    fn letters_survive_canonicalization() {
        let s = p("-YXY");
        let (sign, canonical) = s.canonical().unwrap();
        assert_eq!(sign, -1.0);
        assert_eq!(canonical.to_string(), "YXY");
        assert_eq!(
            canonical.letters(),
            vec![Letter::Y, Letter::X, Letter::Y]
        );
    }

    #[test]
    fn sums_merge_duplicates_and_drop_zeros() {
        let sum = PauliSum::from_texts(3, &[(1.0, "YYZ"), (1.0, "YYZ"), (2.0, "ZXZ")]).unwrap();
        assert_eq!(sum.len(), 2);
        assert_eq!(sum.terms()[1].0, 2.0);

        let cancelled =
            PauliSum::from_texts(3, &[(1.0, "YYZ"), (-1.0, "YYZ"), (1.0, "ZXZ")]).unwrap();
        assert_eq!(cancelled.len(), 1);
        assert_eq!(cancelled.terms()[0].1.to_string(), "ZXZ");
    }

    #[test]
    fn sign_folds_into_coefficient() {
        let sum = PauliSum::from_texts(3, &[(1.0, "-YXY")]).unwrap();
        let (coeff, string) = sum.terms()[0];
        assert_eq!(coeff, -1.0);
        assert_eq!(string.to_string(), "YXY");
    }

    #[test]
    fn non_hermitian_terms_are_rejected() {
        let x = PauliString::single(1, 1, Letter::X).unwrap();
        let z = PauliString::single(1, 1, Letter::Z).unwrap();
        let xz = x.mul(&z).unwrap();
        let err = PauliSum::from_terms(1, [(1.0, xz)]).unwrap_err();
        assert!(matches!(err, Error::NotHermitian(_)));
    }

    #[test]
    fn terms_stay_sorted_by_masks() {
        let sum =
            PauliSum::from_texts(2, &[(1.0, "ZZ"), (1.0, "XI"), (1.0, "IX"), (1.0, "YY")]).unwrap();
        let keys: Vec<(u64, u64)> =
            sum.terms().iter().map(|(_, p)| (p.x_mask(), p.z_mask())).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }

    #[test]
    fn relabelling_permutes_support() {
        let s = p("XIXZ");
        let relabelled = s.relabelled(&[4, 3, 2, 1]).unwrap();
        assert_eq!(relabelled.to_string(), "ZXIX");
        assert!(s.relabelled(&[1, 1, 2, 3]).is_err());
    }

    #[test]
    fn sum_product_expands_termwise() {
        let a = PauliSum::from_texts(2, &[(1.0, "XI"), (1.0, "ZI")]).unwrap();
        let b = PauliSum::from_texts(2, &[(1.0, "IX"), (2.0, "IZ")]).unwrap();
        let ab = a.mul(&b).unwrap();
        assert_eq!(ab.len(), 4);

        // (X + Z)^2 = 2I: the iY and -iY cross terms cancel exactly.
        let squared = a.mul(&a).unwrap();
        let identity = PauliSum::from_texts(2, &[(2.0, "II")]).unwrap();
        assert_eq!(squared, identity);

        // X times Z alone leaves a bare -iY: not an operator we represent.
        let x = PauliSum::from_texts(1, &[(1.0, "X")]).unwrap();
        let z = PauliSum::from_texts(1, &[(1.0, "Z")]).unwrap();
        assert_eq!(x.mul(&z).unwrap_err(), Error::NotHermitian("Y".to_string()));
    }

    #[test]
    fn identity_masks_are_empty() {
        let id = PauliString::identity(5).unwrap();
        assert_eq!(id.support_mask(), 0);
        assert_eq!(id.to_string(), "IIIII");
        assert!(PauliString::identity(0).is_err());
        assert!(PauliString::identity(65).is_err());
    }
}
