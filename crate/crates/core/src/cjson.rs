//! `[re, im]` serialization for complex scalars, vectors and matrices.

use nalgebra::DMatrix;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::expr::C64;

pub fn pair(c: C64) -> [f64; 2] {
    [c.re, c.im]
}

pub fn from_pair(p: [f64; 2]) -> C64 {
    C64::new(p[0], p[1])
}

pub fn vec_pairs(v: &[C64]) -> Vec<[f64; 2]> {
    v.iter().copied().map(pair).collect()
}

/// Row-major nested `[re, im]` arrays.
pub fn matrix_rows(m: &DMatrix<C64>) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| pair(m[(i, j)])).collect())
        .collect()
}

pub fn matrix_from_rows(rows: &[Vec<[f64; 2]>]) -> Result<DMatrix<C64>, String> {
    let n = rows.len();
    if n == 0 {
        return Err("matrix has no rows".into());
    }
    let m = rows[0].len();
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != m) {
        return Err(format!("row {i} has {} entries, expected {m}", r.len()));
    }
    Ok(DMatrix::from_fn(n, m, |i, j| from_pair(rows[i][j])))
}

pub mod c64 {
    use super::*;

    pub fn serialize<S: Serializer>(c: &C64, s: S) -> Result<S::Ok, S::Error> {
        pair(*c).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<C64, D::Error> {
        Ok(from_pair(<[f64; 2]>::deserialize(d)?))
    }
}

pub mod c64_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[C64], s: S) -> Result<S::Ok, S::Error> {
        vec_pairs(v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<C64>, D::Error> {
        Ok(Vec::<[f64; 2]>::deserialize(d)?
            .into_iter()
            .map(from_pair)
            .collect())
    }
}

pub mod matrix {
    use super::*;

    pub fn serialize<S: Serializer>(m: &DMatrix<C64>, s: S) -> Result<S::Ok, S::Error> {
        matrix_rows(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DMatrix<C64>, D::Error> {
        let rows = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
        matrix_from_rows(&rows).map_err(D::Error::custom)
    }
}
