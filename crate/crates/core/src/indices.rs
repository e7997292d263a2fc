use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Sorted, duplicate-free list of coordinate indices.
///
/// Stored 0-based; serialized and displayed 1-based, matching the text formats.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Indices(Vec<usize>);

impl Indices {
    pub fn new(mut v: Vec<usize>) -> Self {
        v.sort_unstable();
        v.dedup();
        Indices(v)
    }

    /// Builds from 1-based labels; rejects zero.
    pub fn from_one_based(labels: &[usize]) -> Option<Self> {
        if labels.contains(&0) {
            return None;
        }
        Some(Self::new(labels.iter().map(|l| l - 1).collect()))
    }

    pub fn empty() -> Self {
        Indices(Vec::new())
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn is_subset(&self, other: &Indices) -> bool {
        self.0.iter().all(|&i| other.contains(i))
    }

    pub fn union(&self, other: &Indices) -> Indices {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Indices::new(v)
    }

    pub fn difference(&self, other: &Indices) -> Indices {
        Indices(self.0.iter().copied().filter(|&i| !other.contains(i)).collect())
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.0.iter().map(|i| i + 1).collect()
    }

    /// Membership mask of length `n`.
    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut m = vec![false; n];
        for &i in &self.0 {
            m[i] = true;
        }
        m
    }

    /// All subsets, ordered by size and then lexicographically.
    pub fn subsets_by_size(&self) -> Vec<Indices> {
        let k = self.0.len();
        let mut out = Vec::with_capacity(1usize << k);
        for size in 0..=k {
            let mut pick: Vec<usize> = (0..size).collect();
            loop {
                out.push(Indices(pick.iter().map(|&p| self.0[p]).collect()));
                // advance to next combination in lexicographic order
                let mut pos = size;
                let mut advanced = false;
                while pos > 0 {
                    pos -= 1;
                    if pick[pos] < k - size + pos {
                        pick[pos] += 1;
                        for q in pos + 1..size {
                            pick[q] = pick[q - 1] + 1;
                        }
                        advanced = true;
                        break;
                    }
                }
                if !advanced {
                    break;
                }
            }
        }
        out
    }
}

impl FromIterator<usize> for Indices {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        Indices::new(iter.into_iter().collect())
    }
}

impl fmt::Display for Indices {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        write!(f, "}}")
    }
}

impl Serialize for Indices {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.one_based().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Indices {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Vec::<usize>::deserialize(d)?;
        Indices::from_one_based(&v)
            .ok_or_else(|| serde::de::Error::custom("index lists are 1-based; 0 is not allowed"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsets_are_size_then_lex() {
        let s = Indices::new(vec![4, 1, 2]);
        let subs: Vec<String> = s.subsets_by_size().iter().map(|x| x.to_string()).collect();
        assert_eq!(
            subs,
            ["{}", "{2}", "{3}", "{5}", "{2,3}", "{2,5}", "{3,5}", "{2,3,5}"]
        );
        assert_eq!(Indices::empty().subsets_by_size().len(), 1);
    }

    #[test]
    fn serde_is_one_based() {
        let s = Indices::new(vec![0, 2]);
        assert_eq!(serde_json::to_string(&s).unwrap(), "[1,3]");
        let back: Indices = serde_json::from_str("[3,1]").unwrap();
        assert_eq!(back, s);
        assert!(serde_json::from_str::<Indices>("[0]").is_err());
    }
}
