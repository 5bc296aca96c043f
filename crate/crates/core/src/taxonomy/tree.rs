use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::TagClass;
use crate::bib::BibEntry;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TagNode {
    pub segment: String,
    /// Path from the class root, e.g. `graphs:directed`.
    pub path: String,
    /// Entries carrying this path or any descendant of it.
    pub count: usize,
    pub children: Vec<TagNode>,
}

/// One forest per tag class, children sorted by segment.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct TagTree {
    pub area: Vec<TagNode>,
    pub tool: Vec<TagNode>,
    pub input: Vec<TagNode>,
}

impl TagTree {
    pub fn roots(&self, class: TagClass) -> &[TagNode] {
        match class {
            TagClass::Area => &self.area,
            TagClass::Tool => &self.tool,
            TagClass::Input => &self.input,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.area.is_empty() && self.tool.is_empty() && self.input.is_empty()
    }

    /// Looks up the node at `path` (segments) under `class`.
    pub fn find(&self, class: TagClass, path: &[&str]) -> Option<&TagNode> {
        let (first, rest) = path.split_first()?;
        let mut node = self.roots(class).iter().find(|n| n.segment == *first)?;
        for seg in rest {
            node = node.children.iter().find(|n| n.segment == *seg)?;
        }
        Some(node)
    }

    /// All nodes of one class, depth first.
    pub fn walk(&self, class: TagClass) -> Vec<&TagNode> {
        fn go<'a>(nodes: &'a [TagNode], out: &mut Vec<&'a TagNode>) {
            for n in nodes {
                out.push(n);
                go(&n.children, out);
            }
        }
        let mut out = Vec::new();
        go(self.roots(class), &mut out);
        out
    }
}

/// Aggregates the corpus tags into per-class trees. An entry counts once per
/// node even when it carries both a tag and one of its descendants.
pub fn tag_tree(corpus: &[BibEntry]) -> TagTree {
    let mut counts: BTreeMap<(TagClass, Vec<String>), usize> = BTreeMap::new();
    for entry in corpus {
        let nodes: BTreeSet<(TagClass, &[String])> =
            entry.tags.iter().flat_map(|t| t.ancestors().map(move |p| (t.class(), p))).collect();
        for (class, path) in nodes {
            *counts.entry((class, path.to_vec())).or_default() += 1;
        }
    }

    let mut tree = TagTree::default();
    for class in TagClass::ALL {
        let paths: Vec<(&Vec<String>, usize)> = counts
            .iter()
            .filter(|((c, _), _)| *c == class)
            .map(|((_, p), n)| (p, *n))
            .collect();
        let roots = build_level(&paths, 0);
        match class {
            TagClass::Area => tree.area = roots,
            TagClass::Tool => tree.tool = roots,
            TagClass::Input => tree.input = roots,
        }
    }
    tree
}

/// `paths` is sorted, so each node is followed by its descendants.
fn build_level(paths: &[(&Vec<String>, usize)], depth: usize) -> Vec<TagNode> {
    let mut nodes = Vec::new();
    let mut i = 0;
    while i < paths.len() {
        let (path, count) = paths[i];
        debug_assert_eq!(path.len(), depth + 1);
        let mut j = i + 1;
        while j < paths.len() && paths[j].0.len() > depth + 1 && paths[j].0[..=depth] == path[..] {
            j += 1;
        }
        nodes.push(TagNode {
            segment: path[depth].clone(),
            path: path.join(":"),
            count,
            children: build_level(&paths[i + 1..j], depth + 1),
        });
        i = j;
    }
    nodes
}
