use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use crate::error::{read_to_string, Error, Result};

/// Name given to the synthetic root when the edge list has several tops.
pub const DEFAULT_ROOT: &str = "entity";

/// A hypernym forest joined under a single root, plus synonym sets.
///
/// Every node has at most one parent. Depth follows the WordNet-style
/// convention: the root sits at depth 1.
#[derive(Debug, Clone)]
pub struct Taxonomy {
    names: Vec<String>,
    index: HashMap<String, usize>,
    parent: Vec<Option<usize>>,
    depth: Vec<u32>,
    root: usize,
    synsets: Vec<Vec<usize>>,
    synsets_of: Vec<Vec<usize>>,
}

impl Taxonomy {
    /// Builds a taxonomy from `(child, parent)` edges and synonym groups.
    ///
    /// Parentless nodes other than the root are attached to it. If the edges
    /// have exactly one top node it becomes the root; otherwise a node named
    /// [`DEFAULT_ROOT`] is used (created when missing).
    pub fn new<S: AsRef<str>>(edges: &[(S, S)], synsets: &[Vec<S>]) -> Result<Self> {
        let mut names: Vec<String> = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut intern = |w: &str, names: &mut Vec<String>| -> usize {
            if let Some(&i) = index.get(w) {
                return i;
            }
            index.insert(w.to_string(), names.len());
            names.push(w.to_string());
            names.len() - 1
        };

        let mut parent_of: HashMap<usize, usize> = HashMap::new();
        for (child, parent) in edges {
            let (child, parent) = (child.as_ref(), parent.as_ref());
            if child == parent {
                return Err(Error::invalid(format!("{child:?} is its own parent")));
            }
            let c = intern(child, &mut names);
            let p = intern(parent, &mut names);
            if let Some(&prev) = parent_of.get(&c) {
                if prev != p {
                    return Err(Error::invalid(format!(
                        "{child:?} has two parents: {:?} and {parent:?}",
                        names[prev]
                    )));
                }
            }
            parent_of.insert(c, p);
        }

        let tops: Vec<usize> = (0..names.len())
            .filter(|i| !parent_of.contains_key(i))
            .collect();
        let root = if tops.len() == 1 {
            tops[0]
        } else {
            intern(DEFAULT_ROOT, &mut names)
        };
        let mut parent: Vec<Option<usize>> = (0..names.len()).map(|i| parent_of.get(&i).copied()).collect();
        for (i, p) in parent.iter_mut().enumerate() {
            if p.is_none() && i != root {
                *p = Some(root);
            }
        }
        if parent[root].is_some() {
            return Err(Error::invalid(format!("root {:?} has a parent", names[root])));
        }

        let depth = compute_depths(&parent, &names)?;

        let index: HashMap<String, usize> = names.iter().enumerate().map(|(i, n)| (n.clone(), i)).collect();
        let mut groups = Vec::with_capacity(synsets.len());
        let mut synsets_of = vec![Vec::new(); names.len()];
        for group in synsets {
            let mut members = BTreeSet::new();
            for w in group {
                let w = w.as_ref();
                let &i = index
                    .get(w)
                    .ok_or_else(|| Error::invalid(format!("synset word {w:?} is not in the taxonomy")))?;
                members.insert(i);
            }
            if members.is_empty() {
                continue;
            }
            let id = groups.len();
            for &m in &members {
                synsets_of[m].push(id);
            }
            groups.push(members.into_iter().collect());
        }

        Ok(Taxonomy {
            names,
            index,
            parent,
            depth,
            root,
            synsets: groups,
            synsets_of,
        })
    }

    /// Parses `child<TAB>parent` lines and, optionally, tab-separated synsets.
    pub fn parse(edges: &str, synsets: Option<&str>) -> Result<Self> {
        let mut pairs = Vec::new();
        for (i, line) in edges.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut cols = line.split('\t');
            match (cols.next(), cols.next(), cols.next()) {
                (Some(c), Some(p), None) if !c.trim().is_empty() && !p.trim().is_empty() => {
                    pairs.push((c.trim().to_string(), p.trim().to_string()))
                }
                _ => {
                    return Err(Error::Malformed {
                        line: i + 1,
                        message: "expected `child<TAB>parent`".into(),
                    })
                }
            }
        }
        let groups: Vec<Vec<String>> = synsets
            .unwrap_or_default()
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                l.split('\t')
                    .map(str::trim)
                    .filter(|w| !w.is_empty())
                    .map(String::from)
                    .collect()
            })
            .collect();
        Self::new(&pairs, &groups)
    }

    pub fn load(edges: &Path, synsets: Option<&Path>) -> Result<Self> {
        let e = read_to_string(edges)?;
        let s = synsets.map(read_to_string).transpose()?;
        Self::parse(&e, s.as_deref())
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn root(&self) -> &str {
        &self.names[self.root]
    }

    pub fn nodes(&self) -> &[String] {
        &self.names
    }

    pub fn parent(&self, word: &str) -> Option<&str> {
        let &i = self.index.get(word)?;
        self.parent[i].map(|p| self.names[p].as_str())
    }

    pub fn depth(&self, word: &str) -> Option<u32> {
        self.index.get(word).map(|&i| self.depth[i])
    }

    /// True when both words share at least one synonym set.
    pub fn are_synonyms(&self, a: &str, b: &str) -> bool {
        let (Some(&ia), Some(&ib)) = (self.index.get(a), self.index.get(b)) else {
            return false;
        };
        self.synsets_of[ia].iter().any(|s| self.synsets_of[ib].contains(s))
    }

    /// Other members of the word's synonym sets, sorted and deduplicated.
    pub fn synonyms(&self, word: &str) -> Vec<&str> {
        let Some(&i) = self.index.get(word) else {
            return Vec::new();
        };
        let set: BTreeSet<&str> = self.synsets_of[i]
            .iter()
            .flat_map(|&s| &self.synsets[s])
            .filter(|&&m| m != i)
            .map(|&m| self.names[m].as_str())
            .collect();
        set.into_iter().collect()
    }

    /// Deepest common ancestor of two nodes (a node is its own ancestor).
    pub fn lowest_common_subsumer(&self, a: &str, b: &str) -> Result<&str> {
        let ia = self.node(a)?;
        let ib = self.node(b)?;
        Ok(&self.names[self.lcs(ia, ib)])
    }

    fn lcs(&self, mut a: usize, mut b: usize) -> usize {
        // Lift the deeper node until both sit at the same depth, then climb
        // in lockstep. Single parents make the meeting point unique.
        while self.depth[a] > self.depth[b] {
            a = self.parent[a].expect("non-root has a parent");
        }
        while self.depth[b] > self.depth[a] {
            b = self.parent[b].expect("non-root has a parent");
        }
        while a != b {
            a = self.parent[a].expect("non-root has a parent");
            b = self.parent[b].expect("non-root has a parent");
        }
        a
    }

    /// Wu-Palmer similarity `2 depth(lcs) / (depth(a) + depth(b))`.
    pub fn wup_similarity(&self, a: &str, b: &str) -> Result<f64> {
        let ia = self.node(a)?;
        let ib = self.node(b)?;
        let l = self.lcs(ia, ib);
        Ok(2.0 * f64::from(self.depth[l]) / f64::from(self.depth[ia] + self.depth[ib]))
    }

    fn node(&self, word: &str) -> Result<usize> {
        self.index
            .get(word)
            .copied()
            .ok_or_else(|| Error::UnknownWord(word.to_string()))
    }
}

fn compute_depths(parent: &[Option<usize>], names: &[String]) -> Result<Vec<u32>> {
    const UNSET: u32 = 0;
    let mut depth = vec![UNSET; parent.len()];
    for start in 0..parent.len() {
        let mut path = Vec::new();
        let mut cur = start;
        while depth[cur] == UNSET {
            if path.len() > parent.len() {
                return Err(Error::invalid(format!("cycle through {:?}", names[start])));
            }
            path.push(cur);
            match parent[cur] {
                Some(p) => cur = p,
                None => {
                    depth[cur] = 1;
                    path.pop();
                    break;
                }
            }
        }
        let mut d = depth[cur];
        for &n in path.iter().rev() {
            d += 1;
            depth[n] = d;
        }
    }
    Ok(depth)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> Taxonomy {
        Taxonomy::new(&[("a", "root"), ("b", "a"), ("c", "b"), ("b1", "a"), ("b2", "a")], &[]).unwrap()
    }

    #[test]
    fn depth_starts_at_one() {
        let t = chain();
        assert_eq!(t.root(), "root");
        assert_eq!(t.depth("root"), Some(1));
        assert_eq!(t.depth("c"), Some(4));
    }

    #[test]
    fn wup_hand_values() {
        let t = chain();
        assert_eq!(t.wup_similarity("c", "c").unwrap(), 1.0);
        assert!((t.wup_similarity("b", "c").unwrap() - 6.0 / 7.0).abs() < 1e-15);
        assert!((t.wup_similarity("b1", "b2").unwrap() - 4.0 / 6.0).abs() < 1e-15);
        assert_eq!(t.lowest_common_subsumer("c", "b2").unwrap(), "a");
    }

    #[test]
    fn unknown_word_is_an_error() {
        assert!(matches!(chain().wup_similarity("zzz", "a"), Err(Error::UnknownWord(_))));
    }

    #[test]
    fn several_tops_join_under_entity() {
        let t = Taxonomy::new(&[("cat", "animal"), ("cup", "container")], &[]).unwrap();
        assert_eq!(t.root(), DEFAULT_ROOT);
        assert_eq!(t.parent("animal"), Some(DEFAULT_ROOT));
        assert_eq!(t.depth("cat"), Some(3));
    }

    #[test]
    fn rejects_cycles_and_double_parents() {
        let cyc = Taxonomy::new(&[("a", "b"), ("b", "c"), ("c", "a"), ("x", "y")], &[]);
        assert!(cyc.is_err());
        let two = Taxonomy::new(&[("a", "b"), ("a", "c")], &[]);
        assert!(two.is_err());
    }

    #[test]
    fn synonyms_and_missing_synset_words() {
        let t = Taxonomy::new(&[("cup", "container"), ("mug", "container")], &[vec!["cup", "mug"]]).unwrap();
        assert!(t.are_synonyms("cup", "mug"));
        assert_eq!(t.synonyms("cup"), ["mug"]);
        assert!(!t.are_synonyms("cup", "container"));
        let bad = Taxonomy::new(&[("cup", "container")], &[vec!["cup", "beaker"]]);
        assert!(bad.is_err());
    }

    #[test]
    fn parses_tab_files() {
        let t = Taxonomy::parse("revolver\tfirearm\nfirearm\tweapon\n", Some("firearm\tgun\n"));
        assert!(t.is_err(), "gun is not a node");
        let t = Taxonomy::parse("revolver\tfirearm\nfirearm\tweapon\ngun\tweapon\n", Some("firearm\tgun\n")).unwrap();
        assert_eq!(t.parent("revolver"), Some("firearm"));
        assert!(t.are_synonyms("gun", "firearm"));
        assert!(Taxonomy::parse("a b\n", None).is_err());
    }
}
