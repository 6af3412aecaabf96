use crate::error::{Error, Result};
use std::sync::OnceLock;

/// Number of bits in a generated coordinate.
pub const BITS: usize = 32;

const JOE_KUO_D6: &str = include_str!("../../data/joe-kuo-d6.1500");

/// Per-dimension direction numbers for base-2 Sobol sequences.
#[derive(Debug, Clone)]
pub struct DirectionTable {
    dims: Vec<[u32; BITS]>,
}

impl DirectionTable {
    /// Parses a table in the Joe-Kuo layout: a header line followed by lines
    /// `d s a m_1 .. m_s` for d = 2, 3, ... Dimension 1 is implicit.
    pub fn parse(text: &str) -> Result<Self> {
        let mut dims = vec![first_dimension()];
        for (lineno, line) in text.lines().enumerate().skip(1) {
            let fields: Vec<u64> = line
                .split_whitespace()
                .map(|t| t.parse::<u64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Config(format!("direction line {}: {e}", lineno + 1)))?;
            if fields.is_empty() {
                continue;
            }
            if fields.len() < 3 {
                return Err(Error::Config(format!("direction line {}: too few fields", lineno + 1)));
            }
            let (d, s, a) = (fields[0] as usize, fields[1] as usize, fields[2] as u32);
            if d != dims.len() + 1 {
                return Err(Error::Config(format!(
                    "direction line {}: expected dimension {}, found {d}",
                    lineno + 1,
                    dims.len() + 1
                )));
            }
            let m = &fields[3..];
            if s == 0 || s > BITS || m.len() != s {
                return Err(Error::Config(format!(
                    "direction line {}: degree/count mismatch",
                    lineno + 1
                )));
            }
            dims.push(recurrence(s, a, m)?);
        }
        Ok(Self { dims })
    }

    /// The bundled Joe-Kuo D(6) table with 1500 dimensions.
    pub fn joe_kuo() -> &'static Self {
        static TABLE: OnceLock<DirectionTable> = OnceLock::new();
        TABLE.get_or_init(|| Self::parse(JOE_KUO_D6).expect("bundled direction numbers are valid"))
    }

    pub fn width(&self) -> usize {
        self.dims.len()
    }

    pub fn dimension(&self, j: usize) -> &[u32; BITS] {
        &self.dims[j]
    }
}

fn first_dimension() -> [u32; BITS] {
    let mut v = [0u32; BITS];
    for (k, vk) in v.iter_mut().enumerate() {
        *vk = 1 << (BITS - 1 - k);
    }
    v
}

fn recurrence(s: usize, a: u32, m_init: &[u64]) -> Result<[u32; BITS]> {
    let mut m = [0u64; BITS];
    for (k, &mk) in m_init.iter().enumerate() {
        if mk % 2 == 0 || mk >= 1 << (k + 1) {
            return Err(Error::Config(format!("invalid initial direction number {mk}")));
        }
        m[k] = mk;
    }
    for k in s..BITS {
        let mut next = m[k - s] ^ (m[k - s] << s);
        for j in 1..s {
            if (a >> (s - 1 - j)) & 1 == 1 {
                next ^= m[k - j] << j;
            }
        }
        m[k] = next;
    }
    let mut v = [0u32; BITS];
    for k in 0..BITS {
        v[k] = (m[k] << (BITS - 1 - k)) as u32;
    }
    Ok(v)
}

/// The first `2^m` points of a `d`-dimensional Sobol sequence.
#[derive(Debug, Clone)]
pub struct DigitalNet {
    dimension: usize,
    log2_count: u32,
    directions: Vec<[u32; BITS]>,
}

impl DigitalNet {
    /// Builds a net from the bundled direction numbers.
    pub fn new(dimension: usize, log2_count: u32) -> Result<Self> {
        Self::with_table(DirectionTable::joe_kuo(), dimension, log2_count)
    }

    pub fn with_table(table: &DirectionTable, dimension: usize, log2_count: u32) -> Result<Self> {
        if dimension == 0 || dimension > table.width() {
            return Err(Error::Config(format!(
                "net dimension {dimension} outside 1..={}",
                table.width()
            )));
        }
        if log2_count as usize >= BITS {
            return Err(Error::Config(format!(
                "log2 point count {log2_count} must be below {BITS}"
            )));
        }
        Ok(Self {
            dimension,
            log2_count,
            directions: table.dims[..dimension].to_vec(),
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn log2_count(&self) -> u32 {
        self.log2_count
    }

    pub fn len(&self) -> usize {
        1 << self.log2_count
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Integer digits of point `i` in natural (non-Gray) order.
    pub fn point_bits(&self, i: usize, out: &mut [u32]) {
        assert!(i < self.len(), "point index out of range");
        let gray = i ^ (i >> 1);
        for (x, v) in out.iter_mut().zip(&self.directions) {
            let mut acc = 0u32;
            let mut g = gray;
            let mut k = 0;
            while g != 0 {
                if g & 1 == 1 {
                    acc ^= v[k];
                }
                g >>= 1;
                k += 1;
            }
            *x = acc;
        }
    }

    /// Point `i` as reals in `[0, 1)`.
    pub fn point(&self, i: usize) -> Vec<f64> {
        let mut bits = vec![0u32; self.dimension];
        self.point_bits(i, &mut bits);
        bits.iter().map(|&b| b as f64 / 4_294_967_296.0).collect()
    }

    /// Iterates over the integer digits of all points, updating a single
    /// buffer in place (Gray-code order).
    pub fn for_each_bits<E>(
        &self,
        mut f: impl FnMut(usize, &[u32]) -> std::result::Result<(), E>,
    ) -> std::result::Result<(), E> {
        let mut x = vec![0u32; self.dimension];
        for i in 0..self.len() {
            if i > 0 {
                let k = i.trailing_zeros() as usize;
                for (xj, v) in x.iter_mut().zip(&self.directions) {
                    *xj ^= v[k];
                }
            }
            f(i, &x)?;
        }
        Ok(())
    }
}
