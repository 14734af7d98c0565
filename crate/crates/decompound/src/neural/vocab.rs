//! Character inventory with reserved padding and unknown symbols.

use std::collections::HashMap;

/// Dense character-to-index mapping. Index 0 is PAD, index 1 is UNK, real
/// characters follow in first-occurrence order over the training forms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharVocab {
    chars: Vec<char>,
    index: HashMap<char, usize>,
}

pub const PAD_INDEX: usize = 0;
pub const UNK_INDEX: usize = 1;
const RESERVED: usize = 2;

impl CharVocab {
    /// Collect the characters of the given forms in first-occurrence order.
    pub fn from_forms<'a>(forms: impl IntoIterator<Item = &'a str>) -> Self {
        let mut chars = Vec::new();
        let mut index = HashMap::new();
        for form in forms {
            for c in form.chars() {
                if let std::collections::hash_map::Entry::Vacant(slot) = index.entry(c) {
                    slot.insert(RESERVED + chars.len());
                    chars.push(c);
                }
            }
        }
        Self { chars, index }
    }

    /// Rebuild from the stored character list (deserialization).
    pub fn from_chars(chars: Vec<char>) -> Self {
        let index = chars
            .iter()
            .enumerate()
            .map(|(i, &c)| (c, RESERVED + i))
            .collect();
        Self { chars, index }
    }

    /// Total number of indices including PAD and UNK.
    pub fn size(&self) -> usize {
        RESERVED + self.chars.len()
    }

    /// Index for a character; unknown characters map to UNK.
    pub fn index_of(&self, c: char) -> usize {
        self.index.get(&c).copied().unwrap_or(UNK_INDEX)
    }

    /// The real characters, in index order.
    pub fn chars(&self) -> &[char] {
        &self.chars
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indices_are_dense_and_stable() {
        let v = CharVocab::from_forms(["fót", "bolti"]);
        assert_eq!(v.size(), 2 + 7); // f ó t b o l i
        assert_eq!(v.index_of('f'), 2);
        assert_eq!(v.index_of('ó'), 3);
        assert_eq!(v.index_of('t'), 4);
        assert_eq!(v.index_of('b'), 5);
    }

    #[test]
    fn unknown_maps_to_unk() {
        let v = CharVocab::from_forms(["abc"]);
        assert_eq!(v.index_of('z'), UNK_INDEX);
        assert_ne!(v.index_of('a'), PAD_INDEX);
        assert_ne!(v.index_of('a'), UNK_INDEX);
    }

    #[test]
    fn round_trip_through_char_list() {
        let v = CharVocab::from_forms(["þörf", "raforka"]);
        let rebuilt = CharVocab::from_chars(v.chars().to_vec());
        assert_eq!(v, rebuilt);
    }
}
