//! Exact rational helpers: float conversion and Gaussian elimination.

use alloc::vec::Vec;
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// `num / den` as a float without overflowing either operand.
pub(crate) fn ratio_to_f64(num: &BigUint, den: &BigUint) -> f64 {
    let shift = den.bits().saturating_sub(960);
    let n = (num >> shift).to_f64().unwrap_or(f64::INFINITY);
    let d = (den >> shift).to_f64().unwrap_or(f64::INFINITY);
    n / d
}

pub(crate) fn to_f64(q: &BigRational) -> f64 {
    let neg = q.is_negative();
    let num = q.numer().magnitude();
    let den = q.denom().magnitude();
    let shift = den.bits().max(num.bits()).saturating_sub(960);
    let n = (num >> shift).to_f64().unwrap_or(f64::INFINITY);
    let d = (den >> shift).to_f64().unwrap_or(f64::INFINITY);
    let v = n / d;
    if neg {
        -v
    } else {
        v
    }
}

/// Reduced row echelon form in place; returns the pivot column of each
/// non-zero row.
pub(crate) fn rref(rows: &mut Vec<Vec<BigRational>>, ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..ncols {
        if r == rows.len() {
            break;
        }
        let Some(sel) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(r, sel);
        let inv = rows[r][col].recip();
        for x in rows[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][col].is_zero() {
                let factor = rows[i][col].clone();
                let pivot_row = rows[r].clone();
                for (x, p) in rows[i].iter_mut().zip(&pivot_row) {
                    *x -= &factor * p;
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    rows.truncate(r);
    pivots
}

pub(crate) fn rank(mut rows: Vec<Vec<BigRational>>, ncols: usize) -> usize {
    rref(&mut rows, ncols).len()
}

/// Basis of `{c : G c = 0}` in reduced-echelon order (one vector per free
/// column, ascending).
pub(crate) fn null_space(mut rows: Vec<Vec<BigRational>>, ncols: usize) -> Vec<Vec<BigRational>> {
    let pivots = rref(&mut rows, ncols);
    let free = (0..ncols).filter(|c| !pivots.contains(c));
    free.map(|f| {
        let mut c = alloc::vec![BigRational::zero(); ncols];
        c[f] = BigRational::one();
        for (row, &pc) in rows.iter().zip(&pivots) {
            c[pc] = -row[f].clone();
        }
        c
    })
    .collect()
}

/// Scales a non-zero rational vector to coprime integers with the first
/// non-zero entry positive.
pub(crate) fn primitive_integer(v: &[BigRational]) -> Vec<BigInt> {
    let mut lcm = BigInt::one();
    for x in v {
        lcm = lcm.lcm(x.denom());
    }
    let mut ints: Vec<BigInt> = v.iter().map(|x| (x * BigRational::from_integer(lcm.clone())).to_integer()).collect();
    let mut g = BigInt::zero();
    for x in &ints {
        g = g.gcd(x);
    }
    if !g.is_zero() {
        for x in ints.iter_mut() {
            *x = &*x / &g;
        }
    }
    if let Some(first) = ints.iter().find(|x| !x.is_zero()) {
        if first.is_negative() {
            for x in ints.iter_mut() {
                *x = -&*x;
            }
        }
    }
    ints
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn null_space_of_diagonal_line() {
        let basis = null_space(alloc::vec![alloc::vec![q(1, 1), q(1, 1)]], 2);
        assert_eq!(basis.len(), 1);
        let c = primitive_integer(&basis[0]);
        assert_eq!(c, alloc::vec![BigInt::from(1), BigInt::from(-1)]);
    }

    #[test]
    fn empty_generators_give_unit_basis() {
        let basis = null_space(Vec::new(), 3);
        assert_eq!(basis.len(), 3);
        assert_eq!(basis[0], alloc::vec![q(1, 1), q(0, 1), q(0, 1)]);
    }

    #[test]
    fn float_conversion_of_huge_ratio() {
        let num = BigUint::one() << 3000u32;
        let den = (BigUint::one() << 3001u32) + BigUint::one();
        assert!((ratio_to_f64(&num, &den) - 0.5).abs() < 1e-15);
        assert_eq!(to_f64(&q(-3, 4)), -0.75);
    }
}
