//! Thin float helpers over `libm` so the core stays `no_std`.

pub(crate) use core::f64::consts::PI;

#[inline]
pub(crate) fn cos(x: f64) -> f64 {
    libm::cos(x)
}

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub(crate) fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[inline]
pub(crate) fn deg_to_rad(deg: f64) -> f64 {
    deg * (PI / 180.0)
}

/// `x mod m` in `[0, m)` for `m > 0`.
#[inline]
pub(crate) fn wrap(x: f64, m: f64) -> f64 {
    let r = x % m;
    if r < 0.0 {
        let shifted = r + m;
        // r + m can round up to m for tiny negative r
        if shifted >= m {
            0.0
        } else {
            shifted
        }
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_stays_in_range() {
        assert_eq!(wrap(5.0, 2.0), 1.0);
        assert_eq!(wrap(-0.5, 2.0), 1.5);
        assert_eq!(wrap(-1e-30, 2.0), 0.0);
        assert_eq!(wrap(4.0, 2.0), 0.0);
    }
}
