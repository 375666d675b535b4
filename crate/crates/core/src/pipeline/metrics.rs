/// Relevant entries among the first `k`, divided by `k` even when the list
/// is shorter.
pub fn precision_at_k(relevance: &[bool], k: usize) -> f64 {
    assert!(k >= 1, "k must be at least 1");
    relevance.iter().take(k).filter(|r| **r).count() as f64 / k as f64
}

fn discount(rank: usize) -> f64 {
    1.0 / ((rank + 1) as f64).log2()
}

/// Binary-gain NDCG@k. The ideal ordering has `ideal_relevant` relevant
/// entries at the top; with none, the result is 0.
pub fn ndcg_at_k(relevance: &[bool], k: usize, ideal_relevant: usize) -> f64 {
    assert!(k >= 1, "k must be at least 1");
    if ideal_relevant == 0 {
        return 0.0;
    }
    let dcg: f64 = relevance
        .iter()
        .take(k)
        .enumerate()
        .filter(|(_, r)| **r)
        .map(|(i, _)| discount(i + 1))
        // an empty f64 sum is -0.0
        .fold(0.0, |acc, d| acc + d);
    let idcg: f64 = (1..=k.min(ideal_relevant)).map(discount).sum();
    dcg / idcg
}
