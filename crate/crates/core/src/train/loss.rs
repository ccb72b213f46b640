use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::Real;

/// Mean of `sqrt((pred - target)² + eps²)` over all elements.
pub fn charbonnier<T: Real>(pred: &[T], target: &[T], eps: f64) -> Result<f64> {
    Ok(charbonnier_with_grad(pred, target, eps)?.0)
}

/// Loss and its gradient with respect to `pred`.
pub fn charbonnier_with_grad<T: Real>(pred: &[T], target: &[T], eps: f64) -> Result<(f64, Vec<T>)> {
    if pred.len() != target.len() {
        return Err(Error::shape("charbonnier operands", target.len(), pred.len()));
    }
    if pred.is_empty() {
        return Err(Error::arg("charbonnier of empty arrays"));
    }
    if !(eps > 0.0) {
        return Err(Error::arg(alloc::format!("charbonnier eps must be positive, got {eps}")));
    }
    let n = pred.len() as f64;
    let eps2 = eps * eps;
    let mut total = 0.0;
    let mut grad = Vec::with_capacity(pred.len());
    for (p, t) in pred.iter().zip(target) {
        let d = p.as_f64() - t.as_f64();
        let r = libm::sqrt(d * d + eps2);
        total += r;
        grad.push(T::from_f64(d / (r * n)));
    }
    Ok((total / n, grad))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_inputs_give_eps() {
        let a = [0.3f64, -1.0, 2.0];
        assert_eq!(charbonnier(&a, &a, 1e-3).unwrap(), 1e-3);
    }

    #[test]
    fn closed_form_single_element() {
        let l = charbonnier(&[3.0f64], &[0.0], 1e-3).unwrap();
        assert!((l - libm::sqrt(9.0 + 1e-6)).abs() < 1e-15);
        assert!((l - 3.000000167).abs() < 1e-9);
    }

    #[test]
    fn symmetric_and_bounded_below() {
        let a = [0.1f64, 0.5, -0.2];
        let b = [0.0f64, 1.0, 0.3];
        let (x, y) = (charbonnier(&a, &b, 1e-2).unwrap(), charbonnier(&b, &a, 1e-2).unwrap());
        assert_eq!(x, y);
        assert!(x >= 1e-2);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let p = [0.1f64, -0.4, 0.25];
        let t = [0.0f64, 0.1, 0.25];
        let (_, g) = charbonnier_with_grad(&p, &t, 1e-3).unwrap();
        for i in 0..3 {
            let (mut hi, mut lo) = (p, p);
            hi[i] += 1e-7;
            lo[i] -= 1e-7;
            let fd = (charbonnier(&hi, &t, 1e-3).unwrap() - charbonnier(&lo, &t, 1e-3).unwrap()) / 2e-7;
            assert!((fd - g[i]).abs() < 1e-6);
        }
    }

    #[test]
    fn shape_mismatch() {
        assert!(charbonnier(&[1.0f32], &[1.0, 2.0], 1e-3).is_err());
    }
}
