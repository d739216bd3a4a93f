use std::io::{Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use rand::Rng as _;
use rand_distr::StandardNormal;

use super::hash::{bucket_at_level, HashFunction};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::seed;

pub const INDEX_MAGIC: &[u8; 6] = b"ROLSH1";

/// `m` hash functions and the base-level signatures of every indexed point.
///
/// Immutable once built. Each projection also keeps its points sorted by
/// hash value so a query can sweep a bucket range instead of the whole
/// dataset.
#[derive(Debug, Clone)]
pub struct ProjectionTable {
    funcs: Vec<HashFunction>,
    /// n × m, row-major.
    signatures: Vec<i32>,
    n: usize,
    d: usize,
    w: f64,
    seed: u64,
    /// Per projection: `(hash, point id)` sorted ascending.
    sorted: Vec<Vec<(i32, u32)>>,
    min_hash: i64,
    max_hash: i64,
}

/// Draws `m` hash functions from `seed` and hashes every row of `dataset`.
pub fn build_index(dataset: &Matrix, m: usize, w: f64, seed: u64) -> Result<ProjectionTable> {
    if dataset.rows() == 0 || dataset.cols() == 0 {
        return Err(Error::DatasetEmpty);
    }
    if m == 0 || m > u16::MAX as usize {
        return Err(Error::InvalidParameter(format!("projection count {m} outside [1, 65535]")));
    }
    if dataset.rows() > u32::MAX as usize {
        return Err(Error::InvalidParameter("dataset too large".into()));
    }
    if !(w > 0.0) || !w.is_finite() {
        return Err(Error::InvalidParameter(format!("bucket width {w} must be positive")));
    }
    if let Some((row, col)) = dataset.find_non_finite() {
        return Err(Error::InvalidData { row, col });
    }
    let d = dataset.cols();
    let mut rng = seed::rng(seed);
    let mut funcs = Vec::with_capacity(m);
    for _ in 0..m {
        let a: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let b = rng.random_range(0.0..w);
        funcs.push(HashFunction { a, b, w });
    }
    ProjectionTable::from_functions(dataset, funcs, seed)
}

impl ProjectionTable {
    /// Indexes `dataset` under caller-supplied hash functions, which must
    /// share one bucket width. `seed` is recorded, not used.
    pub fn from_functions(dataset: &Matrix, funcs: Vec<HashFunction>, seed: u64) -> Result<Self> {
        let Some(first) = funcs.first() else {
            return Err(Error::InvalidParameter("no hash functions".into()));
        };
        let (d, w) = (dataset.cols(), first.w);
        if dataset.rows() == 0 || d == 0 {
            return Err(Error::DatasetEmpty);
        }
        if funcs.len() > u16::MAX as usize {
            return Err(Error::InvalidParameter(format!("projection count {} above 65535", funcs.len())));
        }
        if let Some(f) = funcs.iter().find(|f| f.dim() != d || f.w != w) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: f.dim(),
            });
        }
        if let Some((row, col)) = dataset.find_non_finite() {
            return Err(Error::InvalidData { row, col });
        }
        let n = dataset.rows();
        let mut signatures = Vec::with_capacity(n * funcs.len());
        for (i, x) in dataset.iter_rows().enumerate() {
            for (j, f) in funcs.iter().enumerate() {
                let h = f.hash(x);
                let h = i32::try_from(h).map_err(|_| Error::HashOverflow { row: i, projection: j })?;
                signatures.push(h);
            }
        }
        Ok(Self::assemble(funcs, signatures, n, d, w, seed))
    }

    fn assemble(funcs: Vec<HashFunction>, signatures: Vec<i32>, n: usize, d: usize, w: f64, seed: u64) -> Self {
        let m = funcs.len();
        let mut sorted = Vec::with_capacity(m);
        for j in 0..m {
            let mut col: Vec<(i32, u32)> = (0..n).map(|i| (signatures[i * m + j], i as u32)).collect();
            col.sort_unstable();
            sorted.push(col);
        }
        let min_hash = signatures.iter().copied().min().unwrap_or(0) as i64;
        let max_hash = signatures.iter().copied().max().unwrap_or(0) as i64;
        Self {
            funcs,
            signatures,
            n,
            d,
            w,
            seed,
            sorted,
            min_hash,
            max_hash,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn m(&self) -> usize {
        self.funcs.len()
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn functions(&self) -> &[HashFunction] {
        &self.funcs
    }

    /// Base-level signature of stored point `i`.
    pub fn signature(&self, i: usize) -> &[i32] {
        let m = self.m();
        &self.signatures[i * m..(i + 1) * m]
    }

    pub(crate) fn sorted_projection(&self, j: usize) -> &[(i32, u32)] {
        &self.sorted[j]
    }

    pub(crate) fn hash_span(&self) -> (i64, i64) {
        (self.min_hash, self.max_hash)
    }

    fn check_dim(&self, query: &[f64]) -> Result<()> {
        if query.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: query.len(),
            });
        }
        Ok(())
    }

    /// Base-level hash values of an arbitrary vector.
    pub fn project(&self, query: &[f64]) -> Result<Vec<i64>> {
        self.check_dim(query)?;
        Ok(self.funcs.iter().map(|f| f.hash(query)).collect())
    }

    /// Writes the index in the `ROLSH1` binary layout.
    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(INDEX_MAGIC)?;
        out.write_u32::<LittleEndian>(self.n as u32)?;
        out.write_u32::<LittleEndian>(self.d as u32)?;
        out.write_u32::<LittleEndian>(self.m() as u32)?;
        out.write_f64::<LittleEndian>(self.w)?;
        out.write_u64::<LittleEndian>(self.seed)?;
        for f in &self.funcs {
            for &v in &f.a {
                out.write_f64::<LittleEndian>(v)?;
            }
            out.write_f64::<LittleEndian>(f.b)?;
        }
        for &s in &self.signatures {
            out.write_i32::<LittleEndian>(s)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::with_capacity(34 + self.m() * (self.d + 1) * 8 + self.signatures.len() * 4);
        self.write_to(&mut buf).expect("writing to a Vec cannot fail");
        buf
    }

    pub fn read_from<R: Read>(mut input: R) -> Result<Self> {
        let mut offset = 0u64;
        let corrupt = |offset: u64, e: std::io::Error| Error::CorruptFile {
            offset,
            reason: e.to_string(),
        };
        let mut magic = [0u8; 6];
        input.read_exact(&mut magic).map_err(|e| corrupt(offset, e))?;
        if &magic != INDEX_MAGIC {
            if &magic[..5] == b"ROLSH" {
                return Err(Error::UnknownVersion(String::from_utf8_lossy(&magic).into_owned()));
            }
            return Err(Error::CorruptFile {
                offset: 0,
                reason: "bad magic".into(),
            });
        }
        offset += 6;
        let mut header = || -> std::io::Result<(u32, u32, u32, f64, u64)> {
            Ok((
                input.read_u32::<LittleEndian>()?,
                input.read_u32::<LittleEndian>()?,
                input.read_u32::<LittleEndian>()?,
                input.read_f64::<LittleEndian>()?,
                input.read_u64::<LittleEndian>()?,
            ))
        };
        let (n, d, m, w, seed) = header().map_err(|e| corrupt(offset, e))?;
        offset += 28;
        let (n, d, m) = (n as usize, d as usize, m as usize);
        if n == 0 || d == 0 || m == 0 || m > u16::MAX as usize || !(w > 0.0) {
            return Err(Error::CorruptFile {
                offset: 6,
                reason: format!("invalid header n={n} d={d} m={m} w={w}"),
            });
        }
        // Every buffer grows as data arrives, so a forged header cannot
        // force a huge allocation up front.
        let mut funcs = Vec::with_capacity(m);
        let mut fchunk = vec![0.0f64; 1 << 13];
        for _ in 0..m {
            let mut a = Vec::new();
            while a.len() < d {
                let take = fchunk.len().min(d - a.len());
                input
                    .read_f64_into::<LittleEndian>(&mut fchunk[..take])
                    .map_err(|e| corrupt(offset, e))?;
                offset += 8 * take as u64;
                a.extend_from_slice(&fchunk[..take]);
            }
            let b = input.read_f64::<LittleEndian>().map_err(|e| corrupt(offset, e))?;
            offset += 8;
            funcs.push(HashFunction { a, b, w });
        }
        let total = n.checked_mul(m).ok_or_else(|| Error::CorruptFile {
            offset: 6,
            reason: "signature count overflows".into(),
        })?;
        let mut signatures = Vec::new();
        let mut chunk = vec![0i32; 1 << 16];
        while signatures.len() < total {
            let take = chunk.len().min(total - signatures.len());
            input
                .read_i32_into::<LittleEndian>(&mut chunk[..take])
                .map_err(|e| corrupt(offset, e))?;
            offset += 4 * take as u64;
            signatures.extend_from_slice(&chunk[..take]);
        }
        Ok(Self::assemble(funcs, signatures, n, d, w, seed))
    }
}

/// Number of projections in which stored point `point_id` shares the
/// query's bucket at `radius_level`.
pub fn collision_count(
    table: &ProjectionTable,
    query: &[f64],
    point_id: usize,
    radius_level: i64,
) -> Result<usize> {
    if point_id >= table.n() {
        return Err(Error::PointOutOfRange {
            id: point_id,
            n: table.n(),
        });
    }
    if radius_level <= 0 {
        return Err(Error::InvalidRadius(radius_level));
    }
    let qh = table.project(query)?;
    let sig = table.signature(point_id);
    let mut count = 0;
    for (&s, &q) in sig.iter().zip(&qh) {
        if bucket_at_level(s as i64, radius_level)? == bucket_at_level(q, radius_level)? {
            count += 1;
        }
    }
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_matrix(n: usize, d: usize, seed: u64, scale: f64) -> Matrix {
        let mut rng = seed::rng(seed);
        let data = (0..n * d).map(|_| rng.random_range(-scale..scale)).collect();
        Matrix::from_vec(n, d, data).unwrap()
    }

    #[test]
    fn forged_sizes_fail_without_allocating() {
        let t = build_index(&random_matrix(5, 3, 1, 5.0), 4, 2.0, 1).unwrap();
        let bytes = t.to_bytes();
        // d, then n, claims about 4 billion; the stream ends long before
        for field in [10usize, 6] {
            let mut forged = bytes.clone();
            forged[field..field + 4].copy_from_slice(&u32::MAX.to_le_bytes());
            assert!(matches!(
                ProjectionTable::read_from(&forged[..]),
                Err(Error::CorruptFile { .. })
            ));
        }
    }

    #[test]
    fn signatures_match_recomputation() {
        let data = random_matrix(100, 4, 11, 10.0);
        let t = build_index(&data, 8, 2.184, 5).unwrap();
        for i in 0..100 {
            for j in 0..8 {
                let f = &t.functions()[j];
                let dot: f64 = f.a.iter().zip(data.row(i)).map(|(a, x)| a * x).sum();
                let expected = ((dot + f.b) / 2.184).floor() as i32;
                assert_eq!(t.signature(i)[j], expected);
            }
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let data = random_matrix(50, 6, 3, 5.0);
        let a = build_index(&data, 16, 2.184, 99).unwrap();
        let b = build_index(&data, 16, 2.184, 99).unwrap();
        assert_eq!(a.to_bytes(), b.to_bytes());
        let c = build_index(&data, 16, 2.184, 100).unwrap();
        assert_ne!(a.to_bytes(), c.to_bytes());
    }

    #[test]
    fn offsets_within_bucket_width() {
        let data = random_matrix(5, 3, 1, 1.0);
        let t = build_index(&data, 64, 2.184, 0).unwrap();
        assert!(t.functions().iter().all(|f| (0.0..2.184).contains(&f.b) && f.a.len() == 3));
    }

    #[test]
    fn build_errors() {
        assert!(matches!(
            build_index(&Matrix::zeros(0, 3), 4, 2.184, 0),
            Err(Error::DatasetEmpty)
        ));
        let mut data = Matrix::zeros(3, 2);
        data.set(2, 1, f64::INFINITY);
        assert!(matches!(
            build_index(&data, 4, 2.184, 0),
            Err(Error::InvalidData { row: 2, col: 1 })
        ));
        assert!(build_index(&Matrix::zeros(3, 2), 0, 2.184, 0).is_err());
        assert!(build_index(&Matrix::zeros(3, 2), 4, 0.0, 0).is_err());
    }

    #[test]
    fn identical_point_collides_everywhere() {
        let data = random_matrix(20, 5, 8, 3.0);
        let t = build_index(&data, 12, 2.184, 4).unwrap();
        for level in [1, 2, 4, 1024] {
            assert_eq!(collision_count(&t, data.row(7), 7, level).unwrap(), 12);
        }
    }

    #[test]
    fn collision_count_errors() {
        let data = random_matrix(4, 2, 8, 3.0);
        let t = build_index(&data, 3, 2.184, 4).unwrap();
        assert!(matches!(
            collision_count(&t, &[0.0, 0.0, 0.0], 0, 1),
            Err(Error::DimensionMismatch { expected: 2, got: 3 })
        ));
        assert!(matches!(collision_count(&t, &[0.0, 0.0], 4, 1), Err(Error::PointOutOfRange { .. })));
        assert!(matches!(collision_count(&t, &[0.0, 0.0], 0, 0), Err(Error::InvalidRadius(0))));
    }

    #[test]
    fn direct_count_with_handmade_table() {
        // four unit projections on four axes with zero offsets and w = 1:
        // the stored point hashes to (1, 2, 3, 4), the query to (1, 2, 0, 0)
        let funcs = (0..4)
            .map(|j| {
                let mut a = vec![0.0; 4];
                a[j] = 1.0;
                HashFunction { a, b: 0.0, w: 1.0 }
            })
            .collect();
        let t = ProjectionTable::assemble(funcs, vec![1, 2, 3, 4], 1, 4, 1.0, 0);
        let q = [1.5, 2.5, 0.5, 0.5];
        assert_eq!(t.project(&q).unwrap(), vec![1, 2, 0, 0]);
        assert_eq!(collision_count(&t, &q, 0, 1).unwrap(), 2);
    }

    #[test]
    fn count_nondecreasing_as_level_coarsens() {
        let data = random_matrix(200, 8, 21, 20.0);
        let t = build_index(&data, 32, 2.184, 2).unwrap();
        let queries = random_matrix(30, 8, 22, 20.0);
        for q in queries.iter_rows() {
            for id in (0..200).step_by(7) {
                let mut last = 0;
                for level in [1, 2, 4, 8, 16, 32, 64, 128] {
                    let c = collision_count(&t, q, id, level).unwrap();
                    assert!(c >= last);
                    last = c;
                }
            }
        }
    }

    #[test]
    fn truncated_blob_is_corrupt() {
        let data = random_matrix(10, 3, 1, 2.0);
        let bytes = build_index(&data, 4, 2.184, 1).unwrap().to_bytes();
        for cut in [3, 20, bytes.len() - 1] {
            assert!(matches!(
                ProjectionTable::read_from(&bytes[..cut]),
                Err(Error::CorruptFile { .. })
            ));
        }
        let mut v2 = bytes.clone();
        v2[5] = b'2';
        assert!(matches!(ProjectionTable::read_from(&v2[..]), Err(Error::UnknownVersion(_))));
    }
}
