use crate::error::{Error, Result};
use crate::numcore::{Scalar, Tensor};

/// Added to self-similarity logits so they vanish from every softmax
/// while keeping all arithmetic finite.
const SELF_MASK: f64 = -1e9;
const NORM_EPS: f64 = 1e-8;

fn check_pair<T: Scalar>(op: &'static str, a: &Tensor<T>, b: &Tensor<T>, tau: f64) -> Result<()> {
    if a.ndim() != 2 || a.shape() != b.shape() {
        return Err(Error::shape(op, a.shape(), b.shape()));
    }
    if a.shape()[0] == 0 {
        return Err(Error::invalid(format!("{op}: empty batch")));
    }
    if !(tau > 0.0) {
        return Err(Error::invalid(format!("{op}: temperature must be positive, got {tau}")));
    }
    Ok(())
}

/// Logits over the stacked views `[2B, 2B]` with self-pairs masked.
fn stacked_logits<T: Scalar>(z_a: &Tensor<T>, z_b: &Tensor<T>, tau: f64) -> Result<Tensor<T>> {
    let n = 2 * z_a.shape()[0];
    let z = Tensor::cat(&[z_a.normalize_rows(NORM_EPS), z_b.normalize_rows(NORM_EPS)], 0)?;
    let mut mask = vec![T::zero(); n * n];
    for i in 0..n {
        mask[i * n + i] = crate::numcore::cast(SELF_MASK);
    }
    z.matmul_t(&z)?.scale(1.0 / tau).add(&Tensor::new(mask, &[n, n])?)
}

/// Temperature-scaled InfoNCE with in-batch negatives from both views.
///
/// Every one of the `2B` embeddings acts as an anchor; its positive is the
/// same item's other view and the remaining `2B - 2` embeddings are
/// negatives. Returns the mean over anchors.
pub fn info_nce<T: Scalar>(z_a: &Tensor<T>, z_b: &Tensor<T>, tau: f64) -> Result<Tensor<T>> {
    check_pair("info_nce", z_a, z_b, tau)?;
    let b = z_a.shape()[0];
    let targets: Vec<usize> = (0..2 * b).map(|i| (i + b) % (2 * b)).collect();
    stacked_logits(z_a, z_b, tau)?.cross_entropy(&targets)
}

/// As [`info_nce`] with anchors taken from view `a` only.
pub fn info_nce_one_sided<T: Scalar>(z_a: &Tensor<T>, z_b: &Tensor<T>, tau: f64) -> Result<Tensor<T>> {
    check_pair("info_nce", z_a, z_b, tau)?;
    let b = z_a.shape()[0];
    let logits = stacked_logits(z_a, z_b, tau)?.narrow(0, 0, b)?;
    let targets: Vec<usize> = (0..b).map(|i| i + b).collect();
    logits.cross_entropy(&targets)
}

/// `-mean_i log softmax_k(sim(q_i, k_k) / tau)[i]`: each query against
/// every key of the batch, its own key being the positive.
pub fn cross_view_nce<T: Scalar>(queries: &Tensor<T>, keys: &Tensor<T>, tau: f64) -> Result<Tensor<T>> {
    check_pair("cross_view_nce", queries, keys, tau)?;
    let b = queries.shape()[0];
    let logits = queries.normalize_rows(NORM_EPS).matmul_t(&keys.normalize_rows(NORM_EPS))?.scale(1.0 / tau);
    logits.cross_entropy(&(0..b).collect::<Vec<_>>())
}

/// `-mean_i cos(p_i, z_i)`.
pub fn negative_cosine<T: Scalar>(p: &Tensor<T>, z: &Tensor<T>) -> Result<Tensor<T>> {
    if p.ndim() != 2 || p.shape() != z.shape() {
        return Err(Error::shape("negative_cosine", p.shape(), z.shape()));
    }
    Ok(p.normalize_rows(NORM_EPS).mul(&z.normalize_rows(NORM_EPS))?.sum_axis(1)?.mean().neg())
}

/// Symmetrized negative cosine between predictions and stop-gradient
/// targets. Fails if a target still carries gradient.
pub fn byol_simsiam_loss<T: Scalar>(p_a: &Tensor<T>, z_b: &Tensor<T>, p_b: &Tensor<T>, z_a: &Tensor<T>) -> Result<Tensor<T>> {
    if z_a.requires_grad() || z_b.requires_grad() {
        return Err(Error::StopGradient("byol_simsiam_loss target requires grad".into()));
    }
    negative_cosine(p_a, z_b)?.add(&negative_cosine(p_b, z_a)?).map(|l| l.scale(0.5))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_item_has_zero_loss() {
        let a = Tensor::<f64>::new(vec![0.3, -0.4], &[1, 2]).unwrap();
        let b = Tensor::<f64>::new(vec![1.0, 2.0], &[1, 2]).unwrap();
        assert_eq!(info_nce(&a, &b, 0.1).unwrap().item(), 0.0);
    }

    #[test]
    fn two_item_example() {
        let z = Tensor::<f64>::new(vec![1.0, 0.0, 0.0, 1.0], &[2, 2]).unwrap();
        let l = info_nce(&z, &z, 1.0).unwrap().item();
        let expected = (1.0 + 2.0 / std::f64::consts::E).ln();
        assert!((l - expected).abs() < 1e-12);
        assert!((expected - 0.5514).abs() < 1e-4);
    }

    #[test]
    fn rejects_bad_arguments() {
        let z = Tensor::<f64>::new(vec![1.0, 0.0], &[1, 2]).unwrap();
        assert!(info_nce(&z, &z, 0.0).is_err());
        let w = Tensor::<f64>::new(vec![1.0, 0.0, 1.0], &[1, 3]).unwrap();
        assert!(info_nce(&z, &w, 0.1).is_err());
    }

    #[test]
    fn cosine_extremes() {
        let p = Tensor::<f64>::new(vec![1.0, 0.0, 0.0, 2.0], &[2, 2]).unwrap();
        let q = Tensor::<f64>::new(vec![0.0, 3.0, -1.0, 0.0], &[2, 2]).unwrap();
        assert!((byol_simsiam_loss(&p, &p, &p, &p).unwrap().item() + 1.0).abs() < 1e-12);
        assert_eq!(byol_simsiam_loss(&p, &q, &p, &q).unwrap().item(), 0.0);
    }

    #[test]
    fn tracked_target_is_refused() {
        let p = Tensor::<f64>::param(vec![1.0, 0.0], &[1, 2]).unwrap();
        let z = p.scale(2.0);
        assert!(matches!(byol_simsiam_loss(&p, &z, &p, &z.detach()), Err(Error::StopGradient(_))));
    }
}
