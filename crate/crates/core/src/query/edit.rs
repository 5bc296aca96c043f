/// Damerau–Levenshtein distance in its optimal-string-alignment form:
/// insertions, deletions, substitutions and transpositions of adjacent
/// characters, each costing 1, with no substring edited twice.
pub fn edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let width = b.len() + 1;
    // three rolling rows: i-2, i-1, i
    let mut rows = vec![vec![0usize; width]; 3];
    for (j, cell) in rows[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=a.len() {
        let (cur, prev, prev2) = (i % 3, (i + 2) % 3, (i + 1) % 3);
        rows[cur][0] = i;
        for j in 1..=b.len() {
            let cost = usize::from(a[i - 1] != b[j - 1]);
            let mut d = (rows[prev][j] + 1).min(rows[cur][j - 1] + 1).min(rows[prev][j - 1] + cost);
            if i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1] {
                d = d.min(rows[prev2][j - 2] + 1);
            }
            rows[cur][j] = d;
        }
    }
    rows[a.len() % 3][b.len()]
}

/// Like [`edit_distance`] but gives up early: `None` when the distance
/// exceeds `max`.
pub fn bounded_edit_distance(a: &str, b: &str, max: usize) -> Option<usize> {
    if a.chars().count().abs_diff(b.chars().count()) > max {
        return None;
    }
    let d = edit_distance(a, b);
    (d <= max).then_some(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_distances() {
        assert_eq!(edit_distance("", ""), 0);
        assert_eq!(edit_distance("abc", ""), 3);
        assert_eq!(edit_distance("homollogy", "homology"), 1);
        assert_eq!(edit_distance("homotopy", "homology"), 2);
        assert_eq!(edit_distance("simplical", "simplicial"), 1);
        assert_eq!(edit_distance("ab", "ba"), 1);
        // optimal string alignment, not the unrestricted distance (which is 2)
        assert_eq!(edit_distance("ca", "abc"), 3);
        assert_eq!(edit_distance("kitten", "sitting"), 3);
    }

    #[test]
    fn bounded() {
        assert_eq!(bounded_edit_distance("homotopy", "homology", 2), Some(2));
        assert_eq!(bounded_edit_distance("homotopy", "hom", 2), None);
        assert_eq!(bounded_edit_distance("kitten", "sitting", 2), None);
    }
}
