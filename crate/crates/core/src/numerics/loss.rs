use super::layers::softmax;
use super::tensor::Real;

/// Fused softmax + negative log-likelihood. Returns `(−log p[target], softmax − onehot)`.
pub fn cross_entropy_with_logits<T: Real>(logits: &[T], target: usize) -> (T, Vec<T>) {
    let probs = softmax(logits);
    cross_entropy_from_probs(probs, target)
}

/// Same as [`cross_entropy_with_logits`] when the softmax is already computed.
/// Consumes `probs` and turns it into the logit gradient.
pub fn cross_entropy_from_probs<T: Real>(mut probs: Vec<T>, target: usize) -> (T, Vec<T>) {
    assert!(target < probs.len(), "target id {target} outside {} classes", probs.len());
    let tiny = T::min_positive_value();
    let loss = -probs[target].max(tiny).ln();
    probs[target] = probs[target] - T::one();
    (loss, probs)
}
