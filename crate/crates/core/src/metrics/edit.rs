//! Levenshtein distance over code points and arbitrary sequences.

/// Unit-cost Levenshtein distance, single-row dynamic programming.
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    if short.is_empty() {
        return long.len();
    }
    let mut row: Vec<usize> = (0..=short.len()).collect();
    for (i, x) in long.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, y) in short.iter().enumerate() {
            let above = row[j + 1];
            let cost = usize::from(x != y);
            row[j + 1] = (diag + cost).min(above + 1).min(row[j] + 1);
            diag = above;
        }
    }
    row[short.len()]
}

/// `levenshtein(a, b) / max(|a|, |b|)`, zero when both are empty.
pub fn normalized_sequence_distance<T: PartialEq>(a: &[T], b: &[T]) -> f64 {
    let max = a.len().max(b.len());
    if max == 0 {
        return 0.0;
    }
    levenshtein(a, b) as f64 / max as f64
}

/// Normalized edit distance between two strings, counted in Unicode code
/// points.
pub fn normalized_edit_distance(a: &str, b: &str) -> f64 {
    if a.is_ascii() && b.is_ascii() {
        return normalized_sequence_distance(a.as_bytes(), b.as_bytes());
    }
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    normalized_sequence_distance(&a, &b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        assert_eq!(normalized_edit_distance("abc", "abc"), 0.0);
        assert_eq!(normalized_edit_distance("", ""), 0.0);
        assert_eq!(normalized_edit_distance("", "x"), 1.0);
        assert_eq!(levenshtein(b"kitten", b"sitting"), 3);
        assert!((normalized_edit_distance("kitten", "sitting") - 3.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn counts_code_points() {
        assert_eq!(normalized_edit_distance("文档", "文件"), 0.5);
        assert_eq!(normalized_edit_distance("é", "e"), 1.0);
    }

    #[test]
    fn sequences() {
        assert_eq!(normalized_sequence_distance(&[1, 0], &[0, 1]), 1.0);
        assert!((normalized_sequence_distance(&[0, 2], &[0, 1, 2]) - 1.0 / 3.0).abs() < 1e-12);
    }
}
