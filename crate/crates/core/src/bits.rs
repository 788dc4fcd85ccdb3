use std::fmt;

/// An ordered sequence of bits, one `u8` (0 or 1) per position.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BitVector(Vec<u8>);

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        BitVector(vec![0; len])
    }

    /// Builds a vector from 0/1 values.
    ///
    /// # Panics
    ///
    /// Panics if any value is not 0 or 1.
    pub fn from_bits(bits: impl Into<Vec<u8>>) -> Self {
        let bits = bits.into();
        assert!(bits.iter().all(|&b| b <= 1), "bit values must be 0 or 1");
        BitVector(bits)
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        BitVector(bits.iter().map(|&b| b as u8).collect())
    }

    /// Parses a string of `0`/`1` characters, ignoring whitespace.
    pub fn parse(s: &str) -> Option<Self> {
        s.chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                '0' => Some(0),
                '1' => Some(1),
                _ => None,
            })
            .collect::<Option<Vec<u8>>>()
            .map(BitVector)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> u8 {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, bit: u8) {
        debug_assert!(bit <= 1);
        self.0[i] = bit;
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [u8] {
        &mut self.0
    }

    pub fn into_inner(self) -> Vec<u8> {
        self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = u8> + '_ {
        self.0.iter().copied()
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b == 1).count()
    }

    /// Number of positions where `self` and `other` differ.
    ///
    /// # Panics
    ///
    /// Panics if lengths differ.
    pub fn hamming_distance(&self, other: &BitVector) -> usize {
        assert_eq!(self.len(), other.len());
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }

    /// Bitwise XOR of two equal-length vectors.
    pub fn xor(&self, other: &BitVector) -> BitVector {
        assert_eq!(self.len(), other.len());
        BitVector(self.0.iter().zip(&other.0).map(|(a, b)| a ^ b).collect())
    }

    pub fn extend_from(&mut self, other: &BitVector) {
        self.0.extend_from_slice(&other.0);
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({self})")
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            f.write_str(if *b == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromIterator<u8> for BitVector {
    fn from_iter<I: IntoIterator<Item = u8>>(iter: I) -> Self {
        BitVector::from_bits(iter.into_iter().collect::<Vec<_>>())
    }
}
