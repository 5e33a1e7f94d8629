use crate::error::{Error, Result};
use crate::numcore::{cast, Parameter, Scalar};

/// `target <- m * target + (1 - m) * online`, parameter by parameter.
pub fn ema_update<T: Scalar>(target: &[Parameter<T>], online: &[Parameter<T>], m: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&m) {
        return Err(Error::invalid(format!("EMA momentum {m} outside [0, 1]")));
    }
    if target.len() != online.len() {
        return Err(Error::invalid(format!("EMA trees differ: {} target vs {} online parameters", target.len(), online.len())));
    }
    for (t, o) in target.iter().zip(online) {
        if t.name != o.name || t.tensor.shape() != o.tensor.shape() {
            return Err(Error::invalid(format!("EMA trees differ at `{}` vs `{}`", t.name, o.name)));
        }
    }
    let (mt, mo): (T, T) = (cast(m), cast(1.0 - m));
    for (t, o) in target.iter().zip(online) {
        let src = o.tensor.data();
        let mut dst = t.tensor.data_mut();
        for (d, s) in dst.iter_mut().zip(src.iter()) {
            *d = mt * *d + mo * *s;
        }
    }
    Ok(())
}

/// Copies values (not gradients) from `src` into `dst`.
pub fn copy_state<T: Scalar>(dst: &[Parameter<T>], src: &[Parameter<T>]) -> Result<()> {
    ema_update(dst, src, 0.0)
}
