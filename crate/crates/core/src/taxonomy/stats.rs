use std::collections::BTreeMap;

use serde::Serialize;

use super::{Flavor, TagClass};
use crate::bib::BibEntry;
use crate::exec::Execution;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct FlavorCounts {
    pub innovate: usize,
    pub confirm: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TagCount {
    /// Path without the class, e.g. `persistent homology`.
    pub tag: String,
    pub count: usize,
}

/// Corpus summary: year histogram, tags-per-entry histograms, tag popularity
/// and flavor counts.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CorpusStats {
    pub entries: usize,
    pub years: BTreeMap<u16, usize>,
    pub without_year: usize,
    /// number of tags on an entry -> number of entries
    pub tags_per_entry: BTreeMap<usize, usize>,
    pub tags_per_entry_by_class: BTreeMap<TagClass, BTreeMap<usize, usize>>,
    /// Tags of each class, most frequent first, ties by name.
    pub popular_tags: BTreeMap<TagClass, Vec<TagCount>>,
    pub flavors: FlavorCounts,
    #[serde(skip)]
    tag_counts: BTreeMap<TagClass, BTreeMap<String, usize>>,
}

fn bump<K: Ord>(map: &mut BTreeMap<K, usize>, key: K, by: usize) {
    *map.entry(key).or_default() += by;
}

impl CorpusStats {
    fn add(mut self, entry: &BibEntry) -> Self {
        self.entries += 1;
        match entry.year() {
            Some(y) => bump(&mut self.years, y, 1),
            None => self.without_year += 1,
        }
        bump(&mut self.tags_per_entry, entry.tags.len(), 1);
        for class in TagClass::ALL {
            let n = entry.tags.iter().filter(|t| t.class() == class).count();
            bump(self.tags_per_entry_by_class.entry(class).or_default(), n, 1);
        }
        for tag in &entry.tags {
            bump(self.tag_counts.entry(tag.class()).or_default(), tag.path_string(), 1);
        }
        for flavor in &entry.flavors {
            match flavor {
                Flavor::Innovate => self.flavors.innovate += 1,
                Flavor::Confirm => self.flavors.confirm += 1,
            }
        }
        self
    }

    /// Combines statistics of two disjoint shards.
    pub fn merge(mut self, other: CorpusStats) -> Self {
        self.entries += other.entries;
        self.without_year += other.without_year;
        for (y, n) in other.years {
            bump(&mut self.years, y, n);
        }
        for (k, n) in other.tags_per_entry {
            bump(&mut self.tags_per_entry, k, n);
        }
        for (class, hist) in other.tags_per_entry_by_class {
            let mine = self.tags_per_entry_by_class.entry(class).or_default();
            for (k, n) in hist {
                bump(mine, k, n);
            }
        }
        for (class, counts) in other.tag_counts {
            let mine = self.tag_counts.entry(class).or_default();
            for (t, n) in counts {
                bump(mine, t, n);
            }
        }
        self.flavors.innovate += other.flavors.innovate;
        self.flavors.confirm += other.flavors.confirm;
        self.finish()
    }

    fn finish(mut self) -> Self {
        self.popular_tags = self
            .tag_counts
            .iter()
            .map(|(class, counts)| {
                let mut list: Vec<TagCount> =
                    counts.iter().map(|(tag, count)| TagCount { tag: tag.clone(), count: *count }).collect();
                list.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.tag.cmp(&b.tag)));
                (*class, list)
            })
            .collect();
        self
    }

    /// Count for an exact tag path within a class.
    pub fn tag_count(&self, class: TagClass, path: &str) -> usize {
        self.tag_counts.get(&class).and_then(|m| m.get(path)).copied().unwrap_or(0)
    }
}

pub fn corpus_statistics(corpus: &[BibEntry]) -> CorpusStats {
    corpus_statistics_with(corpus, Execution::default())
}

pub fn corpus_statistics_with(corpus: &[BibEntry], exec: Execution) -> CorpusStats {
    exec.fold(corpus, CorpusStats::default, CorpusStats::add, CorpusStats::merge).finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tagged(key: &str, n: usize) -> BibEntry {
        let mut e = BibEntry::new("article", key).with_field("year", "2021");
        for i in 0..n {
            e = e.with_tag(&format!("tool:t{i}"));
        }
        e
    }

    #[test]
    fn empty() {
        let s = corpus_statistics(&[]);
        assert_eq!(s.entries, 0);
        assert!(s.years.is_empty());
        assert!(s.tags_per_entry.is_empty());
        assert!(s.popular_tags.is_empty());
        assert_eq!(s.flavors, FlavorCounts::default());
    }

    #[test]
    fn tags_per_entry_histogram() {
        let corpus = vec![tagged("a", 3), tagged("b", 3), tagged("c", 5)];
        let s = corpus_statistics(&corpus);
        assert_eq!(s.tags_per_entry, BTreeMap::from([(3, 2), (5, 1)]));
        assert_eq!(s.years, BTreeMap::from([(2021, 3)]));
        assert_eq!(s.popular_tags[&TagClass::Tool][0], TagCount { tag: "t0".into(), count: 3 });
        assert_eq!(s.tag_count(TagClass::Tool, "t4"), 1);
        assert_eq!(s.tags_per_entry_by_class[&TagClass::Area], BTreeMap::from([(0, 3)]));
    }

    #[test]
    fn flavor_counts() {
        let corpus: Vec<BibEntry> = (0..431)
            .map(|i| {
                let e = BibEntry::new("article", format!("k{i}"));
                match i % 7 {
                    0 if i / 7 < 58 => e.with_flavor(Flavor::Innovate),
                    1 => e.with_flavor(Flavor::Confirm),
                    _ => e,
                }
            })
            .collect();
        let s = corpus_statistics(&corpus);
        assert_eq!(s.entries, 431);
        assert_eq!(s.flavors.innovate, 58);
        assert_eq!(s.flavors.confirm, 62);
        assert_eq!(s.without_year, 431);
    }

    #[test]
    fn sequential_and_default_agree() {
        let corpus: Vec<BibEntry> = (0..200).map(|i| tagged(&format!("k{i}"), i % 6)).collect();
        assert_eq!(corpus_statistics_with(&corpus, Execution::Sequential), corpus_statistics(&corpus));
    }
}
