//! Binary constituent trees for compound words.
//!
//! A compound is formed by combining two words, each of which may itself be
//! a compound, so the structure of a fully analyzed word is a full binary
//! tree: every internal node has exactly two children, the left child is the
//! modifier and the right child is the head. A base word is a single leaf.
//!
//! Trees are written in a bracketed notation where a leaf is a bare token
//! and an internal node is `(left right)`:
//!
//! ```text
//! (heildar ((raf orku) þörf))
//! ```

use std::fmt;

/// Full binary tree over compound parts. Leaf surfaces are non-empty and
/// concatenate left-to-right to the surface of the whole word.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ConstituentTree {
    Leaf(String),
    Node(Box<ConstituentTree>, Box<ConstituentTree>),
}

impl ConstituentTree {
    pub fn leaf(surface: impl Into<String>) -> Self {
        ConstituentTree::Leaf(surface.into())
    }

    pub fn node(left: ConstituentTree, right: ConstituentTree) -> Self {
        ConstituentTree::Node(Box::new(left), Box::new(right))
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, ConstituentTree::Leaf(_))
    }

    /// Concatenation of all leaf surfaces, left to right.
    pub fn surface(&self) -> String {
        let mut out = String::new();
        self.collect_surface(&mut out);
        out
    }

    fn collect_surface(&self, out: &mut String) {
        match self {
            ConstituentTree::Leaf(s) => out.push_str(s),
            ConstituentTree::Node(l, r) => {
                l.collect_surface(out);
                r.collect_surface(out);
            }
        }
    }

    /// Leaf surfaces in left-to-right order.
    pub fn leaves(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            ConstituentTree::Leaf(s) => out.push(s.as_str()),
            ConstituentTree::Node(l, r) => {
                l.collect_leaves(out);
                r.collect_leaves(out);
            }
        }
    }

    /// Depth of the tree; a leaf has depth 0.
    pub fn depth(&self) -> usize {
        match self {
            ConstituentTree::Leaf(_) => 0,
            ConstituentTree::Node(l, r) => 1 + l.depth().max(r.depth()),
        }
    }

    /// Character length (Unicode scalar values) of the surface.
    pub fn surface_char_len(&self) -> usize {
        match self {
            ConstituentTree::Leaf(s) => s.chars().count(),
            ConstituentTree::Node(l, r) => l.surface_char_len() + r.surface_char_len(),
        }
    }

    /// True when every leaf surface is non-empty.
    pub fn leaves_nonempty(&self) -> bool {
        match self {
            ConstituentTree::Leaf(s) => !s.is_empty(),
            ConstituentTree::Node(l, r) => l.leaves_nonempty() && r.leaves_nonempty(),
        }
    }

    /// Render in bracketed notation: bare token for a leaf, `(left right)`
    /// for an internal node.
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.render_into(&mut out);
        out
    }

    fn render_into(&self, out: &mut String) {
        match self {
            ConstituentTree::Leaf(s) => out.push_str(s),
            ConstituentTree::Node(l, r) => {
                out.push('(');
                l.render_into(out);
                out.push(' ');
                r.render_into(out);
                out.push(')');
            }
        }
    }

    /// Parse the bracketed notation produced by [`render`](Self::render).
    pub fn parse(text: &str) -> Result<Self, TreeParseError> {
        let mut parser = Parser {
            chars: text.chars().collect(),
            pos: 0,
        };
        parser.skip_spaces();
        let tree = parser.parse_tree()?;
        parser.skip_spaces();
        if parser.pos != parser.chars.len() {
            return Err(TreeParseError::TrailingInput);
        }
        Ok(tree)
    }
}

impl fmt::Display for ConstituentTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TreeParseError {
    #[error("unbalanced parentheses")]
    Unbalanced,
    #[error("empty leaf")]
    EmptyLeaf,
    #[error("an internal node must have exactly two children")]
    ChildCount,
    #[error("unexpected trailing input after the tree")]
    TrailingInput,
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn skip_spaces(&mut self) {
        while self.peek() == Some(' ') {
            self.pos += 1;
        }
    }

    fn parse_tree(&mut self) -> Result<ConstituentTree, TreeParseError> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                self.skip_spaces();
                let left = self.parse_tree()?;
                self.skip_spaces();
                if self.peek() == Some(')') {
                    return Err(TreeParseError::ChildCount);
                }
                let right = self.parse_tree()?;
                self.skip_spaces();
                match self.peek() {
                    Some(')') => {
                        self.pos += 1;
                        Ok(ConstituentTree::node(left, right))
                    }
                    Some(_) => Err(TreeParseError::ChildCount),
                    None => Err(TreeParseError::Unbalanced),
                }
            }
            Some(')') | None => Err(TreeParseError::Unbalanced),
            Some(_) => {
                let start = self.pos;
                while let Some(c) = self.peek() {
                    if c == '(' || c == ')' || c == ' ' {
                        break;
                    }
                    self.pos += 1;
                }
                if self.pos == start {
                    return Err(TreeParseError::EmptyLeaf);
                }
                let surface: String = self.chars[start..self.pos].iter().collect();
                Ok(ConstituentTree::Leaf(surface))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nested_tree() -> ConstituentTree {
        ConstituentTree::node(
            ConstituentTree::leaf("heildar"),
            ConstituentTree::node(
                ConstituentTree::node(ConstituentTree::leaf("raf"), ConstituentTree::leaf("orku")),
                ConstituentTree::leaf("þörf"),
            ),
        )
    }

    #[test]
    fn surface_concatenates_leaves() {
        assert_eq!(nested_tree().surface(), "heildarraforkuþörf");
        assert_eq!(
            nested_tree().leaves(),
            vec!["heildar", "raf", "orku", "þörf"]
        );
    }

    #[test]
    fn render_round_trips() {
        let t = nested_tree();
        let text = t.render();
        assert_eq!(text, "(heildar ((raf orku) þörf))");
        assert_eq!(ConstituentTree::parse(&text).unwrap(), t);
    }

    #[test]
    fn parse_bare_leaf() {
        assert_eq!(
            ConstituentTree::parse("þörf").unwrap(),
            ConstituentTree::leaf("þörf")
        );
    }

    #[test]
    fn parse_rejects_unbalanced() {
        assert_eq!(
            ConstituentTree::parse("(fót bolti").unwrap_err(),
            TreeParseError::Unbalanced
        );
        assert_eq!(
            ConstituentTree::parse("fót bolti)").unwrap_err(),
            TreeParseError::TrailingInput
        );
    }

    #[test]
    fn parse_rejects_wrong_arity() {
        assert_eq!(
            ConstituentTree::parse("(a b c)").unwrap_err(),
            TreeParseError::ChildCount
        );
        assert_eq!(
            ConstituentTree::parse("(a)").unwrap_err(),
            TreeParseError::ChildCount
        );
    }

    #[test]
    fn parse_tolerates_extra_spaces() {
        let t = ConstituentTree::parse("( fót  bolti )").unwrap();
        assert_eq!(t.render(), "(fót bolti)");
    }

    #[test]
    fn depth_counts_levels() {
        assert_eq!(ConstituentTree::leaf("a").depth(), 0);
        assert_eq!(nested_tree().depth(), 3);
    }
}
