//! Tables of the k-divisor function d_k(n): the number of ordered k-tuples
//! of positive integers whose product is n (d_1 ≡ 1, d_2 = the usual divisor
//! count). Built by iterated divisor-sum convolution: d_k = d_{k-1} * 1, one
//! O(N log N) harmonic pass per convolution, values kept in full 64-bit
//! integer range.
//!
//! Tables persist to a small binary format (magic `DKTB`, version, k, n_max,
//! the values, and a trailing CRC32 of everything before it) so that large
//! sieves can be built once and reloaded cheaply.

use crate::error::{Error, Result};
use std::io::{Read, Write};
use std::path::Path;

/// Default memory budget: maximum number of table entries built in one call.
pub const DEFAULT_ENTRY_BUDGET: u64 = 100_000_000;

const MAGIC: &[u8; 4] = b"DKTB";
const FORMAT_VERSION: u32 = 1;

/// A sieved table of d_k(n) for 1 ≤ n ≤ n_max.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DivisorTable {
    k: u32,
    /// values[n] = d_k(n); index 0 is unused and holds 0.
    values: Vec<u64>,
}

impl DivisorTable {
    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn n_max(&self) -> u64 {
        (self.values.len() - 1) as u64
    }

    /// d_k(n). Panics if `n` is 0 or beyond `n_max`.
    #[inline]
    pub fn value(&self, n: u64) -> u64 {
        assert!(n >= 1, "d_k(n) requires n >= 1");
        self.values[n as usize]
    }

    /// The full value slice, indexed by n (entry 0 is a placeholder 0).
    pub fn values(&self) -> &[u64] {
        &self.values
    }

    /// Largest d_k(n) for n ≤ `upto`.
    pub fn max_value(&self, upto: u64) -> u64 {
        let end = (upto.min(self.n_max()) + 1) as usize;
        self.values[1..end].iter().copied().max().unwrap_or(0)
    }

    /// Prefix sums D(m) = Σ_{n≤m} d_k(n) for m = 0..=`upto`
    /// (the u64 accumulator cannot overflow at supported table sizes).
    pub fn prefix_sums(&self, upto: u64) -> Result<Vec<u64>> {
        if upto > self.n_max() {
            return Err(Error::Range {
                needed: upto,
                have: self.n_max(),
            });
        }
        let mut acc = 0u64;
        let mut out = Vec::with_capacity(upto as usize + 1);
        out.push(0);
        for n in 1..=upto {
            acc += self.values[n as usize];
            out.push(acc);
        }
        Ok(out)
    }

    /// Checksum of the serialized payload; stable across runs and platforms.
    pub fn checksum(&self) -> u32 {
        let mut hasher = crc32fast::Hasher::new();
        hash_payload(&mut hasher, self.k, &self.values);
        hasher.finalize()
    }

    /// Persist to `path` in the `DKTB` binary format.
    pub fn save<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let file = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(file);
        let mut hasher = crc32fast::Hasher::new();

        let emit = |bytes: &[u8], w: &mut dyn Write, h: &mut crc32fast::Hasher| -> Result<()> {
            h.update(bytes);
            w.write_all(bytes)?;
            Ok(())
        };
        emit(MAGIC, &mut w, &mut hasher)?;
        emit(&FORMAT_VERSION.to_le_bytes(), &mut w, &mut hasher)?;
        emit(&self.k.to_le_bytes(), &mut w, &mut hasher)?;
        emit(&self.n_max().to_le_bytes(), &mut w, &mut hasher)?;
        for n in 1..self.values.len() {
            emit(&self.values[n].to_le_bytes(), &mut w, &mut hasher)?;
        }
        w.write_all(&hasher.finalize().to_le_bytes())?;
        Ok(())
    }

    /// Reload a table persisted by [`DivisorTable::save`]. Rejects bad magic,
    /// unknown versions, truncation, and checksum mismatches.
    pub fn load<P: AsRef<Path>>(path: P) -> Result<DivisorTable> {
        let file = std::fs::File::open(path)?;
        let mut r = std::io::BufReader::new(file);

        let mut header = [0u8; 20];
        read_exact_or_format(&mut r, &mut header, "header")?;
        if &header[0..4] != MAGIC {
            return Err(Error::Format("bad magic (expected DKTB)".into()));
        }
        let version = u32::from_le_bytes(header[4..8].try_into().unwrap());
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let k = u32::from_le_bytes(header[8..12].try_into().unwrap());
        let n_max = u64::from_le_bytes(header[12..20].try_into().unwrap());
        if k == 0 {
            return Err(Error::Format("k = 0 in header".into()));
        }

        let mut hasher = crc32fast::Hasher::new();
        hasher.update(&header);

        let mut values = Vec::with_capacity(n_max as usize + 1);
        values.push(0u64);
        let mut buf = [0u8; 8];
        for n in 1..=n_max {
            read_exact_or_format(&mut r, &mut buf, &format!("value {n} of {n_max}"))?;
            hasher.update(&buf);
            values.push(u64::from_le_bytes(buf));
        }
        read_exact_or_format(&mut r, &mut buf[0..4], "checksum")?;
        let stored = u32::from_le_bytes(buf[0..4].try_into().unwrap());
        let computed = hasher.finalize();
        if stored != computed {
            return Err(Error::Format(format!(
                "checksum mismatch: stored {stored:#010x}, computed {computed:#010x}"
            )));
        }
        Ok(DivisorTable { k, values })
    }
}

fn hash_payload(h: &mut crc32fast::Hasher, k: u32, values: &[u64]) {
    h.update(MAGIC);
    h.update(&FORMAT_VERSION.to_le_bytes());
    h.update(&k.to_le_bytes());
    h.update(&((values.len() - 1) as u64).to_le_bytes());
    for v in &values[1..] {
        h.update(&v.to_le_bytes());
    }
}

fn read_exact_or_format<R: Read>(r: &mut R, buf: &mut [u8], what: &str) -> Result<()> {
    r.read_exact(buf)
        .map_err(|e| Error::Format(format!("truncated file while reading {what}: {e}")))
}

/// Sieve d_k(n) for all n ≤ n_max under the default entry budget.
pub fn sieve_dk(k: u32, n_max: u64) -> Result<DivisorTable> {
    sieve_dk_with_budget(k, n_max, DEFAULT_ENTRY_BUDGET)
}

/// Sieve d_k(n) for all n ≤ n_max, refusing builds beyond `budget` entries.
pub fn sieve_dk_with_budget(k: u32, n_max: u64, budget: u64) -> Result<DivisorTable> {
    if k == 0 {
        return Err(Error::Domain("sieve_dk requires k >= 1".into()));
    }
    if n_max == 0 {
        return Err(Error::Domain("sieve_dk requires n_max >= 1".into()));
    }
    if n_max > budget {
        return Err(Error::Capacity {
            requested: n_max,
            budget,
        });
    }
    let len = n_max as usize + 1;
    // d_1 = 1 everywhere; each pass convolves with the constant-1 function.
    let mut values = vec![1u64; len];
    values[0] = 0;
    for _ in 1..k {
        let mut next = vec![0u64; len];
        for d in 1..len {
            let vd = values[d];
            let mut m = d;
            while m < len {
                next[m] += vd;
                m += d;
            }
        }
        values = next;
    }
    Ok(DivisorTable { k, values })
}

/// d_k(n) for a single n by trial-division factorization:
/// d_k(∏ p_i^{e_i}) = ∏ C(e_i + k - 1, k - 1).
///
/// Independent of the sieve (different algorithm, no shared tables), so the
/// two routes cross-check each other.
pub fn dk_single(k: u32, n: u64) -> u64 {
    assert!(k >= 1, "dk_single requires k >= 1");
    assert!(n >= 1, "dk_single requires n >= 1");
    let mut n = n;
    let mut result = 1u64;
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0u64;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            result *= binomial(e + k as u64 - 1, k as u64 - 1);
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        result *= k as u64; // C(1 + k - 1, k - 1) = k
    }
    result
}

fn binomial(n: u64, mut r: u64) -> u64 {
    if r > n {
        return 0;
    }
    if r > n - r {
        r = n - r;
    }
    let mut acc = 1u64;
    for i in 0..r {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}
