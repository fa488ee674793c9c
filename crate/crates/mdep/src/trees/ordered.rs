use super::TreePattern;
use crate::error::Error;
use crate::Result;
use std::fmt;

/// An ordered rooted tree represented by its depth-first outdegree sequence.
///
/// A sequence (d_1, ..., d_k) is a valid tree exactly when the degrees sum
/// to k-1 and every proper prefix satisfies sum(d_i - 1) > -1. Equality of
/// trees is equality of sequences; the canonical text encoding is the
/// comma-separated degree list, e.g. "2,0,0" for the two-leaf cherry and
/// "0" for the single node.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OrderedTree {
    degrees: Vec<u32>,
}

impl OrderedTree {
    pub fn new(degrees: Vec<u32>) -> Result<Self> {
        validate_degree_sequence(&degrees)?;
        Ok(OrderedTree { degrees })
    }

    pub fn leaf() -> Self {
        OrderedTree { degrees: vec![0] }
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    pub fn size(&self) -> usize {
        self.degrees.len()
    }

    /// Parses the comma-separated degree encoding.
    pub fn parse(s: &str) -> Result<Self> {
        let degrees = s
            .split(',')
            .map(|part| {
                part.trim()
                    .parse::<u32>()
                    .map_err(|e| Error::Parse(format!("bad degree {part:?}: {e}")))
            })
            .collect::<Result<Vec<u32>>>()?;
        OrderedTree::new(degrees)
    }

    pub fn encode(&self) -> String {
        self.degrees
            .iter()
            .map(|d| d.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Number of fringe subtrees equal to `pattern`, i.e. positions where
    /// the depth-first sequence contains `pattern`'s sequence as a complete
    /// subtree block.
    pub fn count_fringe(&self, pattern: &OrderedTree) -> usize {
        let k = pattern.size();
        if k > self.size() {
            return 0;
        }
        (0..=self.size() - k)
            .filter(|&i| self.degrees[i..i + k] == *pattern.degrees())
            .count()
    }
}

/// Checks the depth-first degree-sequence characterization of ordered trees.
pub(crate) fn validate_degree_sequence(degrees: &[u32]) -> Result<()> {
    if degrees.is_empty() {
        return Err(Error::invalid("a tree needs at least one node"));
    }
    if is_valid_degree_sequence_u32(degrees) {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "degree sequence {:?} does not describe an ordered tree",
            degrees
        )))
    }
}

/// True when the sequence sums to len-1 and every proper prefix of the walk
/// sum(d_i - 1) stays above -1.
pub(crate) fn is_valid_degree_sequence_u32(degrees: &[u32]) -> bool {
    if degrees.is_empty() {
        return false;
    }
    let mut walk: i64 = 0;
    for (i, &d) in degrees.iter().enumerate() {
        walk += i64::from(d) - 1;
        if i + 1 < degrees.len() && walk < 0 {
            return false;
        }
    }
    walk == -1
}

impl TreePattern for OrderedTree {
    fn size(&self) -> usize {
        self.size()
    }

    fn label(&self) -> String {
        self.encode()
    }
}

impl fmt::Display for OrderedTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.encode())
    }
}
