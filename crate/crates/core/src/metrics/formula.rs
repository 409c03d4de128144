//! LaTeX token score used in place of rendered-character matching.

use super::edit::normalized_sequence_distance;

/// Splits LaTeX into `\command` words, escaped symbols (`\{`, `\\`), braces
/// and single characters. Whitespace separates tokens and is dropped.
pub fn tokenize_latex(src: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut chars = src.chars().peekable();
    while let Some(c) = chars.next() {
        if c.is_whitespace() {
            continue;
        }
        if c != '\\' {
            tokens.push(c.to_string());
            continue;
        }
        let mut tok = String::from('\\');
        match chars.peek() {
            Some(n) if n.is_ascii_alphabetic() => {
                while let Some(&n) = chars.peek() {
                    if !n.is_ascii_alphabetic() {
                        break;
                    }
                    tok.push(n);
                    chars.next();
                }
            }
            Some(&n) if !n.is_whitespace() => {
                tok.push(n);
                chars.next();
            }
            _ => {}
        }
        tokens.push(tok);
    }
    tokens
}

/// `100 * (1 - normalized token edit distance)`.
pub fn formula_token_score(pred_latex: &str, gt_latex: &str) -> f64 {
    let p = tokenize_latex(pred_latex);
    let g = tokenize_latex(gt_latex);
    100.0 * (1.0 - normalized_sequence_distance(&p, &g))
}
