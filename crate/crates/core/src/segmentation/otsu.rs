use std::cmp::Ordering;

use num_bigint::BigUint;

use super::Histogram256;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OtsuThreshold {
    pub level: u8,
    /// All mass sits on a single level; `level` is that level.
    pub degenerate: bool,
}

/// Above this many samples the squared numerator may overflow u128 and the
/// comparison switches to big integers.
const EXACT_LIMIT: u64 = 500_000_000;

/// Compares `a / b` with `c / d` without overflow (b, d > 0).
fn cmp_fraction(mut a: u128, mut b: u128, mut c: u128, mut d: u128) -> Ordering {
    // Continued-fraction expansion of both sides in lockstep.
    loop {
        let (qa, qc) = (a / b, c / d);
        if qa != qc {
            return qa.cmp(&qc);
        }
        let (ra, rc) = (a % b, c % d);
        match (ra == 0, rc == 0) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            // ra/b vs rc/d  <=>  d/rc vs b/ra
            (false, false) => (a, b, c, d) = (d, rc, b, ra),
        }
    }
}

/// Between-class separation at one threshold as the exact fraction
/// `(S0*N1 - S1*N0)^2 / (N0*N1)`, proportional to the between-class variance.
/// `None` when one class is empty.
fn separation(n0: u64, s0: u64, n: u64, s: u64) -> Option<(u128, u128)> {
    let n1 = n - n0;
    if n0 == 0 || n1 == 0 {
        return None;
    }
    let s1 = s - s0;
    let e = (i128::from(s0) * i128::from(n1) - i128::from(s1) * i128::from(n0)).unsigned_abs();
    Some((e * e, u128::from(n0) * u128::from(n1)))
}

/// Otsu's threshold: the level `t` maximising the between-class variance of
/// `{<= t}` and `{> t}`, smallest `t` on ties.
///
/// Candidates are compared as exact rationals, so equal variances are
/// recognised as ties regardless of floating-point rounding.
pub fn otsu_threshold(hist: &Histogram256) -> Result<OtsuThreshold> {
    let counts = hist.counts();
    let n = hist.total();
    if n == 0 {
        return Err(Error::Empty("otsu threshold of an empty histogram"));
    }
    let mut levels = hist.active_levels();
    let first = levels.next().expect("non-empty histogram");
    if levels.next().is_none() {
        return Ok(OtsuThreshold { level: first, degenerate: true });
    }

    if n > EXACT_LIMIT {
        return Ok(OtsuThreshold { level: otsu_big(counts), degenerate: false });
    }

    let s: u64 = counts.iter().enumerate().map(|(l, &c)| l as u64 * c).sum();
    let mut best: Option<(u8, (u128, u128))> = None;
    let (mut n0, mut s0) = (0u64, 0u64);
    for t in 0..=255usize {
        n0 += counts[t];
        s0 += t as u64 * counts[t];
        let Some(cand) = separation(n0, s0, n, s) else {
            continue;
        };
        let better = match &best {
            None => true,
            Some((_, cur)) => cmp_fraction(cand.0, cand.1, cur.0, cur.1) == Ordering::Greater,
        };
        if better {
            best = Some((t as u8, cand));
        }
    }
    let (level, _) = best.expect("two populated levels give a split");
    Ok(OtsuThreshold { level, degenerate: false })
}

fn otsu_big(counts: &[u64; 256]) -> u8 {
    let n: u128 = counts.iter().map(|&c| u128::from(c)).sum();
    let s: u128 = counts.iter().enumerate().map(|(l, &c)| l as u128 * u128::from(c)).sum();
    let (big_n, big_s) = (BigUint::from(n), BigUint::from(s));
    let mut best: Option<(u8, BigUint, BigUint)> = None;
    let (mut n0, mut s0) = (0u128, 0u128);
    for (t, &c) in counts.iter().enumerate() {
        n0 += u128::from(c);
        s0 += t as u128 * u128::from(c);
        if n0 == 0 || n0 == n {
            continue;
        }
        // S0*N1 - S1*N0 simplifies to S0*N - S*N0.
        let (a, b) = (BigUint::from(s0) * &big_n, &big_s * BigUint::from(n0));
        let e = if a > b { a - b } else { b - a };
        let num = &e * &e;
        let den = BigUint::from(n0) * BigUint::from(n - n0);
        let better = match &best {
            None => true,
            Some((_, bn, bd)) => &num * bd > bn * &den,
        };
        if better {
            best = Some((t as u8, num, den));
        }
    }
    best.expect("two populated levels give a split").0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hist(pairs: &[(usize, u64)]) -> Histogram256 {
        let mut c = [0u64; 256];
        for &(l, n) in pairs {
            c[l] = n;
        }
        Histogram256::from_counts(c)
    }

    #[test]
    fn two_levels_take_smallest_separating_threshold() {
        let t = otsu_threshold(&hist(&[(10, 300), (200, 700)])).unwrap();
        assert_eq!(t, OtsuThreshold { level: 10, degenerate: false });
    }

    #[test]
    fn single_level_is_degenerate() {
        let t = otsu_threshold(&hist(&[(77, 5)])).unwrap();
        assert_eq!(t, OtsuThreshold { level: 77, degenerate: true });
    }

    #[test]
    fn empty_histogram_errors() {
        assert!(otsu_threshold(&Histogram256::from_counts([0; 256])).is_err());
    }

    #[test]
    fn symmetric_tie_resolves_low() {
        // {0} | {1,2} and {0,1} | {2} have identical variance.
        let t = otsu_threshold(&hist(&[(0, 3), (1, 5), (2, 3)])).unwrap();
        assert_eq!(t.level, 0);
    }

    #[test]
    fn big_integer_path_agrees_with_u128_path() {
        let mut x: u64 = 12345;
        for _ in 0..200 {
            let c: [u64; 256] = std::array::from_fn(|_| {
                x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                if x >> 60 < 5 { x >> 40 } else { 0 }
            });
            let h = Histogram256::from_counts(c);
            if h.total() == 0 || h.total() > EXACT_LIMIT || h.active_levels().count() < 2 {
                continue;
            }
            assert_eq!(otsu_threshold(&h).unwrap().level, otsu_big(&c));
        }
        let huge: [u64; 256] = std::array::from_fn(|l| if l % 7 == 0 { 1 << 40 } else { l as u64 });
        assert_eq!(otsu_threshold(&Histogram256::from_counts(huge)).unwrap().level, otsu_big(&huge));
    }

    #[test]
    fn fraction_compare() {
        assert_eq!(cmp_fraction(1, 3, 1, 3), Ordering::Equal);
        assert_eq!(cmp_fraction(2, 6, 1, 3), Ordering::Equal);
        assert_eq!(cmp_fraction(1, 3, 1, 2), Ordering::Less);
        assert_eq!(cmp_fraction(7, 5, 4, 3), Ordering::Greater);
        assert_eq!(cmp_fraction(u128::MAX, u128::MAX - 1, u128::MAX - 1, u128::MAX - 2), Ordering::Less);
        assert_eq!(cmp_fraction(355, 113, 22, 7), Ordering::Less);
    }
}
