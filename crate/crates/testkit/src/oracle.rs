//! Slow, obviously-correct reference implementations used as test oracles.
//! Deliberately independent of the production crates.

use std::cmp::Ordering;

/// `(start, end, text)` for every window, by brute-force enumeration over a
/// `Vec<char>`.
pub fn windows(text: &str, size: usize, overlap: usize) -> Vec<(usize, usize, String)> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    for start in (0..chars.len()).step_by(size - overlap) {
        let end = usize::min(start + size, chars.len());
        out.push((start, end, chars[start..end].iter().collect()));
        if end == chars.len() {
            break;
        }
    }
    out
}

/// Cosine similarity computed directly in f64.
pub fn cosine(a: &[f32], b: &[f32]) -> f64 {
    assert_eq!(a.len(), b.len());
    let dot: f64 = a.iter().zip(b).map(|(&x, &y)| x as f64 * y as f64).sum();
    let na: f64 = a.iter().map(|&x| (x as f64).powi(2)).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|&x| (x as f64).powi(2)).sum::<f64>().sqrt();
    dot / (na * nb)
}

/// Scores every record, sorts the full list (score descending, then id
/// ascending) and keeps the first `k`.
pub fn naive_top_k(records: &[(String, Vec<f32>)], query: &[f32], k: usize) -> Vec<(String, f64)> {
    let mut scored: Vec<(String, f64)> = records
        .iter()
        .map(|(id, v)| (id.clone(), cosine(query, v)))
        .collect();
    scored.sort_by(|a, b| match b.1.partial_cmp(&a.1).unwrap_or(Ordering::Equal) {
        Ordering::Equal => a.0.cmp(&b.0),
        other => other,
    });
    scored.truncate(k);
    scored
}
