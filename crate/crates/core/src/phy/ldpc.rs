//! Systematic LDPC codes: alist I/O, a quasi-cyclic code generator, a
//! linear-time encoder and a normalized min-sum decoder.
//!
//! Codes are stored as a sparse parity-check matrix `H = [H_s | H_p]` whose
//! last `m` columns form a lower-triangular matrix with a unit diagonal. That
//! is the shape of an irregular repeat-accumulate code (block dual-diagonal
//! parity part) and lets the encoder solve for parity bits by forward
//! substitution.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LdpcError {
    #[error("alist parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("parity part is not lower triangular with unit diagonal (row {0})")]
    NotSystematic(usize),
    #[error("expected {expected} bits, got {got}")]
    Length { expected: usize, got: usize },
}

/// Sparse binary matrix in both row and column adjacency form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseMatrix {
    n_cols: usize,
    rows: Vec<Vec<usize>>,
    cols: Vec<Vec<usize>>,
}

impl SparseMatrix {
    pub fn from_rows(n_cols: usize, mut rows: Vec<Vec<usize>>) -> Self {
        let mut cols = vec![Vec::new(); n_cols];
        for (r, row) in rows.iter_mut().enumerate() {
            row.sort_unstable();
            row.dedup();
            for &c in row.iter() {
                cols[c].push(r);
            }
        }
        Self { n_cols, rows, cols }
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }
    pub fn n_cols(&self) -> usize {
        self.n_cols
    }
    pub fn row(&self, r: usize) -> &[usize] {
        &self.rows[r]
    }
    pub fn col(&self, c: usize) -> &[usize] {
        &self.cols[c]
    }
    pub fn n_edges(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Parses the MacKay alist format.
    pub fn from_alist(text: &str) -> Result<Self, LdpcError> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
        let mut next_nums = |what: &str| -> Result<(usize, Vec<usize>), LdpcError> {
            let (i, l) = lines.next().ok_or(LdpcError::Parse { line: 0, msg: format!("missing {what}") })?;
            let nums = l
                .split_whitespace()
                .map(|t| t.parse::<usize>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| LdpcError::Parse { line: i + 1, msg: e.to_string() })?;
            Ok((i + 1, nums))
        };
        let (line, dims) = next_nums("dimensions")?;
        if dims.len() != 2 {
            return Err(LdpcError::Parse { line, msg: "expected `n m`".into() });
        }
        let (n, m) = (dims[0], dims[1]);
        next_nums("max degrees")?;
        let (line, col_deg) = next_nums("column degrees")?;
        if col_deg.len() != n {
            return Err(LdpcError::Parse { line, msg: format!("expected {n} column degrees") });
        }
        let (line, row_deg) = next_nums("row degrees")?;
        if row_deg.len() != m {
            return Err(LdpcError::Parse { line, msg: format!("expected {m} row degrees") });
        }
        let mut cols = Vec::with_capacity(n);
        for &d in &col_deg {
            let (line, entries) = next_nums("column list")?;
            let list: Vec<usize> = entries.into_iter().filter(|&x| x != 0).map(|x| x - 1).collect();
            if list.len() != d || list.iter().any(|&r| r >= m) {
                return Err(LdpcError::Parse { line, msg: "bad column entry list".into() });
            }
            cols.push(list);
        }
        let mut rows = vec![Vec::new(); m];
        for (c, list) in cols.iter().enumerate() {
            for &r in list {
                rows[r].push(c);
            }
        }
        for (r, &d) in row_deg.iter().enumerate() {
            let (line, entries) = next_nums("row list")?;
            let mut list: Vec<usize> = entries.into_iter().filter(|&x| x != 0).map(|x| x - 1).collect();
            list.sort_unstable();
            if list.len() != d || list != rows[r] {
                return Err(LdpcError::Parse { line, msg: format!("row {} disagrees with columns", r + 1) });
            }
        }
        Ok(Self::from_rows(n, rows))
    }

    /// Writes the MacKay alist format (1-based indices, zero padded lists).
    pub fn to_alist(&self) -> String {
        let mut s = String::new();
        let max_col = self.cols.iter().map(Vec::len).max().unwrap_or(0);
        let max_row = self.rows.iter().map(Vec::len).max().unwrap_or(0);
        let join = |v: &mut dyn Iterator<Item = usize>| v.map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        writeln!(s, "{} {}", self.n_cols, self.rows.len()).unwrap();
        writeln!(s, "{max_col} {max_row}").unwrap();
        writeln!(s, "{}", join(&mut self.cols.iter().map(Vec::len))).unwrap();
        writeln!(s, "{}", join(&mut self.rows.iter().map(Vec::len))).unwrap();
        for list in &self.cols {
            let mut v: Vec<usize> = list.iter().map(|r| r + 1).collect();
            v.resize(max_col, 0);
            writeln!(s, "{}", join(&mut v.into_iter())).unwrap();
        }
        for list in &self.rows {
            let mut v: Vec<usize> = list.iter().map(|c| c + 1).collect();
            v.resize(max_row, 0);
            writeln!(s, "{}", join(&mut v.into_iter())).unwrap();
        }
        s
    }
}

/// Parameters of a quasi-cyclic irregular repeat-accumulate code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QcIraParams {
    /// Information block columns.
    pub kb: usize,
    /// Parity block rows (and parity block columns).
    pub mb: usize,
    /// Lifting size.
    pub z: usize,
    /// Block-row degree of every information block column.
    pub info_degree: usize,
    /// Block rows whose parity columns form the accumulator chain; the
    /// remaining rows each own a degree-one parity column. Equal to `mb` for
    /// a plain IRA code.
    pub core_rows: usize,
    /// Edges each extension row draws from the information and core parity
    /// columns.
    pub ext_degree: usize,
    pub seed: u64,
}

/// Builds a QC-IRA parity-check matrix: random circulant shifts in the
/// information part, chosen greedily to avoid length-4 cycles, and an
/// identity dual-diagonal parity part.
pub fn generate_qc_ira(p: &QcIraParams) -> SparseMatrix {
    assert!(p.core_rows >= 1 && p.core_rows <= p.mb, "core rows out of range");
    assert!(p.info_degree <= p.core_rows, "info degree exceeds core rows");
    assert!(p.core_rows == p.mb || p.ext_degree >= 2, "extension rows need two edges");
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    // base[r] = list of (block column, shift)
    let mut base: Vec<Vec<(usize, usize)>> = vec![Vec::new(); p.mb];
    for j in 0..p.mb {
        base[j].push((p.kb + j, 0));
        if j + 1 < p.core_rows {
            base[j + 1].push((p.kb + j, 0));
        }
    }
    let shift_at = |base: &Vec<Vec<(usize, usize)>>, r: usize, c: usize| {
        base[r].iter().find(|e| e.0 == c).map(|e| e.1)
    };
    let creates_4cycle = |base: &Vec<Vec<(usize, usize)>>, r: usize, c: usize, s: usize| {
        for r2 in 0..p.mb {
            if r2 == r {
                continue;
            }
            let Some(s2) = shift_at(base, r2, c) else { continue };
            for &(c3, s3) in &base[r] {
                if let Some(s4) = shift_at(base, r2, c3) {
                    // s(r,c) - s(r,c3) + s(r2,c3) - s(r2,c) == 0 mod z
                    let v = (s + p.z - s3 + s4 + p.z - s2) % p.z;
                    if v == 0 {
                        return true;
                    }
                }
            }
        }
        false
    };
    for c in 0..p.kb {
        let mut chosen = Vec::new();
        for _ in 0..p.info_degree {
            // least-loaded rows first, ties broken randomly
            let mut keyed: Vec<(usize, u32, usize)> = (0..p.core_rows)
                .filter(|r| !chosen.contains(r))
                .map(|r| (base[r].len(), rng.random::<u32>(), r))
                .collect();
            keyed.sort_unstable();
            let order: Vec<usize> = keyed.into_iter().map(|k| k.2).collect();
            let mut placed = false;
            for &r in order.iter().take(4) {
                for _ in 0..64 {
                    let s = rng.random_range(0..p.z);
                    if !creates_4cycle(&base, r, c, s) {
                        base[r].push((c, s));
                        chosen.push(r);
                        placed = true;
                        break;
                    }
                }
                if placed {
                    break;
                }
            }
            if !placed {
                let r = order[0];
                base[r].push((c, rng.random_range(0..p.z)));
                chosen.push(r);
            }
        }
    }
    let mut col_degree: Vec<usize> = (0..p.kb + p.core_rows)
        .map(|c| base.iter().filter(|row| row.iter().any(|e| e.0 == c)).count())
        .collect();
    for r in p.core_rows..p.mb {
        for _ in 0..p.ext_degree {
            let mut keyed: Vec<(usize, u32, usize)> = (0..p.kb + p.core_rows)
                .filter(|&c| shift_at(&base, r, c).is_none())
                .map(|c| (col_degree[c], rng.random::<u32>(), c))
                .collect();
            keyed.sort_unstable();
            let mut placed = None;
            'search: for &(_, _, c) in keyed.iter().take(8) {
                for _ in 0..64 {
                    let s = rng.random_range(0..p.z);
                    if !creates_4cycle(&base, r, c, s) {
                        placed = Some((c, s));
                        break 'search;
                    }
                }
            }
            let (c, s) = placed.unwrap_or_else(|| (keyed[0].2, rng.random_range(0..p.z)));
            base[r].push((c, s));
            col_degree[c] += 1;
        }
    }
    let n = (p.kb + p.mb) * p.z;
    let mut rows = vec![Vec::new(); p.mb * p.z];
    for (br, entries) in base.iter().enumerate() {
        for &(bc, s) in entries {
            for t in 0..p.z {
                rows[br * p.z + t].push(bc * p.z + (t + s) % p.z);
            }
        }
    }
    SparseMatrix::from_rows(n, rows)
}

/// A systematic LDPC code ready for encoding and decoding.
#[derive(Debug, Clone)]
pub struct LdpcCode {
    h: SparseMatrix,
    k: usize,
    // check-major edge layout for the decoder
    row_ptr: Vec<usize>,
    edge_var: Vec<u32>,
}

/// Outcome of one decoding attempt.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeOutput {
    pub bits: Vec<u8>,
    pub iterations: usize,
    pub parity_ok: bool,
}

impl LdpcCode {
    /// Checks the triangular parity structure and builds decoder tables.
    pub fn new(h: SparseMatrix) -> Result<Self, LdpcError> {
        let m = h.n_rows();
        let n = h.n_cols();
        let k = n - m;
        for r in 0..m {
            let row = h.row(r);
            if !row.contains(&(k + r)) || row.iter().any(|&c| c > k + r) {
                return Err(LdpcError::NotSystematic(r));
            }
        }
        let mut row_ptr = Vec::with_capacity(m + 1);
        let mut edge_var = Vec::with_capacity(h.n_edges());
        row_ptr.push(0);
        for r in 0..m {
            edge_var.extend(h.row(r).iter().map(|&c| c as u32));
            row_ptr.push(edge_var.len());
        }
        Ok(Self { h, k, row_ptr, edge_var })
    }

    pub fn from_alist(text: &str) -> Result<Self, LdpcError> {
        Self::new(SparseMatrix::from_alist(text)?)
    }

    pub fn n(&self) -> usize {
        self.h.n_cols()
    }
    pub fn k(&self) -> usize {
        self.k
    }
    pub fn m(&self) -> usize {
        self.h.n_rows()
    }
    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n() as f64
    }
    pub fn parity_check(&self) -> &SparseMatrix {
        &self.h
    }

    /// Systematic encoding: returns `info` followed by `m` parity bits.
    pub fn encode(&self, info: &[u8]) -> Result<Vec<u8>, LdpcError> {
        if info.len() != self.k {
            return Err(LdpcError::Length { expected: self.k, got: info.len() });
        }
        let mut cw = Vec::with_capacity(self.n());
        cw.extend_from_slice(info);
        cw.resize(self.n(), 0);
        for r in 0..self.m() {
            let p = self.h.row(r).iter().filter(|&&c| c != self.k + r).fold(0u8, |acc, &c| acc ^ cw[c]);
            cw[self.k + r] = p;
        }
        Ok(cw)
    }

    /// True when every parity check is satisfied.
    pub fn check(&self, bits: &[u8]) -> bool {
        (0..self.m()).all(|r| self.h.row(r).iter().fold(0u8, |acc, &c| acc ^ bits[c]) == 0)
    }

    fn syndrome_ok(&self, llr: &[f32]) -> bool {
        (0..self.m()).all(|r| {
            let e = &self.edge_var[self.row_ptr[r]..self.row_ptr[r + 1]];
            e.iter().filter(|&&v| llr[v as usize] < 0.0).count() % 2 == 0
        })
    }

    /// Flooding normalized min-sum. LLR sign convention: positive means bit 0.
    pub fn decode(&self, llr: &[f32], max_iterations: usize, normalization: f32) -> Result<DecodeOutput, LdpcError> {
        let n = self.n();
        if llr.len() != n {
            return Err(LdpcError::Length { expected: n, got: llr.len() });
        }
        let mut post: Vec<f32> = llr.to_vec();
        let mut c2v = vec![0f32; self.edge_var.len()];
        let mut v2c = Vec::new();
        let mut iterations = 0;
        let mut ok = self.syndrome_ok(&post);
        while !ok && iterations < max_iterations {
            iterations += 1;
            for r in 0..self.m() {
                let (lo, hi) = (self.row_ptr[r], self.row_ptr[r + 1]);
                v2c.clear();
                let mut min1 = f32::INFINITY;
                let mut min2 = f32::INFINITY;
                let mut min_idx = 0;
                let mut sign = false;
                for e in lo..hi {
                    let v = post[self.edge_var[e] as usize] - c2v[e];
                    v2c.push(v);
                    let a = v.abs();
                    sign ^= v < 0.0;
                    if a < min1 {
                        min2 = min1;
                        min1 = a;
                        min_idx = e;
                    } else if a < min2 {
                        min2 = a;
                    }
                }
                for (i, e) in (lo..hi).enumerate() {
                    let mag = if e == min_idx { min2 } else { min1 } * normalization;
                    let neg = sign ^ (v2c[i] < 0.0);
                    c2v[e] = if neg { -mag } else { mag };
                }
            }
            post.copy_from_slice(llr);
            for (e, &v) in self.edge_var.iter().enumerate() {
                post[v as usize] += c2v[e];
            }
            ok = self.syndrome_ok(&post);
        }
        let bits = post.iter().map(|&l| u8::from(l < 0.0)).collect();
        Ok(DecodeOutput { bits, iterations, parity_ok: ok })
    }
}
