//! Double description for the facet cone of a full-dimensional point set.
//!
//! Given integer rows `A_i = (1, q_i)` spanning `Z^{r+1}`, computes the extreme
//! rays of `{y : A y >= 0}`. Each ray `(b, a)` is a facet inequality
//! `b + a.q >= 0` of `conv{q_i}`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::linalg::{dot_int, inverse, normalize_gcd, primitive_integer, rank, sign};

#[derive(Clone, Debug)]
struct Ray {
    y: Vec<BigInt>,
    zeros: Vec<u64>,
}

fn bit_set(bits: &mut [u64], i: usize) {
    bits[i / 64] |= 1 << (i % 64);
}

fn popcount(bits: &[u64]) -> usize {
    bits.iter().map(|w| w.count_ones() as usize).sum()
}

fn subset(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x & !y == 0)
}

pub(crate) fn facet_rays(rows: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let dim = rows[0].len();
    let words = rows.len().div_ceil(64);

    // Greedy basis of `dim` independent rows.
    let mut basis: Vec<usize> = Vec::with_capacity(dim);
    for (i, row) in rows.iter().enumerate() {
        let mut trial: Vec<Vec<BigRational>> = basis
            .iter()
            .map(|&j| rows[j].iter().cloned().map(BigRational::from).collect())
            .collect();
        trial.push(row.iter().cloned().map(BigRational::from).collect());
        if rank(trial) == basis.len() + 1 {
            basis.push(i);
            if basis.len() == dim {
                break;
            }
        }
    }
    assert_eq!(basis.len(), dim, "rows must span the cone space");

    let b: Vec<Vec<BigRational>> = basis
        .iter()
        .map(|&j| rows[j].iter().cloned().map(BigRational::from).collect())
        .collect();
    let inv = inverse(&b).expect("basis rows are independent");

    let mut rays: Vec<Ray> = (0..dim)
        .map(|col| {
            let column: Vec<BigRational> = inv.iter().map(|r| r[col].clone()).collect();
            let mut zeros = vec![0u64; words];
            for (k, &j) in basis.iter().enumerate() {
                if k != col {
                    bit_set(&mut zeros, j);
                }
            }
            Ray {
                y: primitive_integer(&column),
                zeros,
            }
        })
        .collect();

    for (i, row) in rows.iter().enumerate() {
        if basis.contains(&i) {
            continue;
        }
        let vals: Vec<BigInt> = rays.iter().map(|r| dot_int(row, &r.y)).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&k| sign(&vals[k]) > 0).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&k| sign(&vals[k]) < 0).collect();
        let zer: Vec<usize> = (0..rays.len()).filter(|&k| vals[k].is_zero()).collect();

        let mut next: Vec<Ray> = Vec::with_capacity(rays.len());
        for &k in pos.iter() {
            next.push(rays[k].clone());
        }
        for &k in zer.iter() {
            let mut r = rays[k].clone();
            bit_set(&mut r.zeros, i);
            next.push(r);
        }
        for &p in &pos {
            for &n in &neg {
                let common: Vec<u64> = rays[p].zeros.iter().zip(&rays[n].zeros).map(|(a, b)| a & b).collect();
                if popcount(&common) + 2 < dim {
                    continue;
                }
                let adjacent = rays
                    .iter()
                    .enumerate()
                    .all(|(k, r)| k == p || k == n || !subset(&common, &r.zeros));
                if !adjacent {
                    continue;
                }
                let y: Vec<BigInt> = rays[n]
                    .y
                    .iter()
                    .zip(&rays[p].y)
                    .map(|(yn, yp)| &vals[p] * yn - &vals[n] * yp)
                    .collect();
                let mut zeros = common;
                bit_set(&mut zeros, i);
                next.push(Ray {
                    y: normalize_gcd(y),
                    zeros,
                });
            }
        }
        rays = next;
    }
    rays.into_iter().map(|r| r.y).collect()
}
