use super::TreePattern;
use crate::error::Error;
use crate::Result;
use std::fmt;

/// A binary tree shape. `Empty` is the absent child; a node always has two
/// (possibly empty) children. Size counts nodes, so the single-node tree is
/// `Node(Empty, Empty)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BinaryTree {
    Empty,
    Node(Box<BinaryTree>, Box<BinaryTree>),
}

impl BinaryTree {
    pub fn leaf() -> Self {
        BinaryTree::Node(Box::new(BinaryTree::Empty), Box::new(BinaryTree::Empty))
    }

    pub fn node(left: BinaryTree, right: BinaryTree) -> Self {
        BinaryTree::Node(Box::new(left), Box::new(right))
    }

    pub fn size(&self) -> usize {
        match self {
            BinaryTree::Empty => 0,
            BinaryTree::Node(l, r) => 1 + l.size() + r.size(),
        }
    }

    /// Canonical preorder encoding over {1,0}: `1 left right` for a node,
    /// `0` for an empty child. The single-node tree encodes as "100", the
    /// empty tree as "0".
    pub fn encode(&self) -> String {
        let mut out = String::with_capacity(2 * self.size() + 1);
        fn go(t: &BinaryTree, out: &mut String) {
            match t {
                BinaryTree::Empty => out.push('0'),
                BinaryTree::Node(l, r) => {
                    out.push('1');
                    go(l, out);
                    go(r, out);
                }
            }
        }
        go(self, &mut out);
        out
    }

    /// Parses the canonical encoding; rejects malformed or trailing input.
    pub fn decode(s: &str) -> Result<Self> {
        let bytes = s.as_bytes();
        fn go(bytes: &[u8], pos: &mut usize) -> Result<BinaryTree> {
            match bytes.get(*pos) {
                Some(b'0') => {
                    *pos += 1;
                    Ok(BinaryTree::Empty)
                }
                Some(b'1') => {
                    *pos += 1;
                    let l = go(bytes, pos)?;
                    let r = go(bytes, pos)?;
                    Ok(BinaryTree::node(l, r))
                }
                Some(c) => Err(Error::Parse(format!(
                    "unexpected character '{}' at position {} in binary tree encoding",
                    *c as char, *pos
                ))),
                None => Err(Error::Parse(
                    "binary tree encoding ended before the shape was complete".into(),
                )),
            }
        }
        let mut pos = 0;
        let tree = go(bytes, &mut pos)?;
        if pos != bytes.len() {
            return Err(Error::Parse(format!(
                "trailing input at position {pos} in binary tree encoding"
            )));
        }
        Ok(tree)
    }

    /// Number of fringe subtrees (a node together with all its descendants)
    /// equal to `pattern`.
    pub fn count_fringe(&self, pattern: &BinaryTree) -> usize {
        match self {
            BinaryTree::Empty => 0,
            BinaryTree::Node(l, r) => {
                let here = usize::from(self == pattern);
                here + l.count_fringe(pattern) + r.count_fringe(pattern)
            }
        }
    }

    /// All shapes with exactly `size` nodes, in a deterministic order.
    pub fn enumerate(size: usize) -> Vec<BinaryTree> {
        if size == 0 {
            return vec![BinaryTree::Empty];
        }
        let mut out = Vec::new();
        for left_size in 0..size {
            for l in BinaryTree::enumerate(left_size) {
                for r in BinaryTree::enumerate(size - 1 - left_size) {
                    out.push(BinaryTree::node(l.clone(), r));
                }
            }
        }
        out
    }
}

impl TreePattern for BinaryTree {
    fn size(&self) -> usize {
        self.size()
    }

    fn label(&self) -> String {
        self.encode()
    }
}

impl fmt::Display for BinaryTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.encode())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encoding_round_trips() {
        assert_eq!(BinaryTree::Empty.encode(), "0");
        assert_eq!(BinaryTree::leaf().encode(), "100");
        let t = BinaryTree::node(BinaryTree::leaf(), BinaryTree::Empty);
        assert_eq!(t.encode(), "11000");
        for s in ["0", "100", "11000", "10100", "1110000", "1100100"] {
            assert_eq!(BinaryTree::decode(s).unwrap().encode(), s);
        }
    }

    #[test]
    fn decode_rejects_malformed_input() {
        for s in ["", "1", "10", "1000", "2", "1001", "100x"] {
            assert!(
                BinaryTree::decode(s).is_err(),
                "expected parse failure for {s:?}"
            );
        }
    }

    #[test]
    fn enumeration_counts_match_catalan_numbers() {
        assert_eq!(BinaryTree::enumerate(0).len(), 1);
        assert_eq!(BinaryTree::enumerate(1).len(), 1);
        assert_eq!(BinaryTree::enumerate(2).len(), 2);
        assert_eq!(BinaryTree::enumerate(3).len(), 5);
        assert_eq!(BinaryTree::enumerate(4).len(), 14);
        let all = BinaryTree::enumerate(3);
        for t in &all {
            assert_eq!(t.size(), 3);
        }
        let mut labels: Vec<_> = all.iter().map(|t| t.encode()).collect();
        labels.sort();
        labels.dedup();
        assert_eq!(labels.len(), 5, "enumerated shapes must be distinct");
    }

    #[test]
    fn fringe_counting_walks_all_nodes() {
        // Right path of length 3: nodes at depths 0,1,2; the deepest is a leaf.
        let t = BinaryTree::node(
            BinaryTree::Empty,
            BinaryTree::node(BinaryTree::Empty, BinaryTree::leaf()),
        );
        assert_eq!(t.count_fringe(&BinaryTree::leaf()), 1);
        assert_eq!(t.count_fringe(&t.clone()), 1);
        let two_right = BinaryTree::node(BinaryTree::Empty, BinaryTree::leaf());
        assert_eq!(t.count_fringe(&two_right), 1);
        let two_left = BinaryTree::node(BinaryTree::leaf(), BinaryTree::Empty);
        assert_eq!(t.count_fringe(&two_left), 0);
    }
}
