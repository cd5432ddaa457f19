//! Formal segments, multisegments, partitions and compositions.
//!
//! A formal segment is a pair `[a, n]` of a start exponent and a length.
//! Multisegments are finite multisets of formal segments, stored in a
//! canonical order (decreasing length, then increasing start) so equality is
//! structural. Dominance compares the length profiles only.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SegmentError {
    #[error("dominance needs equal total lengths, got {0} and {1}")]
    LengthMismatch(u64, u64),
    #[error("parse error: {0}")]
    Parse(String),
}

/// A formal segment `[a, n]`: start exponent a ∈ Z, length n >= 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FormalSegment {
    pub start: i64,
    pub len: u64,
}

impl FormalSegment {
    pub fn new(start: i64, len: u64) -> Self {
        assert!(len >= 1, "segment length must be >= 1");
        FormalSegment { start, len }
    }
}

impl fmt::Display for FormalSegment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.start, self.len)
    }
}

/// A finite multiset of formal segments in canonical storage order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Multisegment {
    segments: Vec<FormalSegment>,
}

impl Multisegment {
    pub fn new(mut segments: Vec<FormalSegment>) -> Self {
        // decreasing length, then increasing start
        segments.sort_by(|a, b| b.len.cmp(&a.len).then(a.start.cmp(&b.start)));
        Multisegment { segments }
    }

    pub fn empty() -> Self {
        Multisegment::default()
    }

    pub fn segments(&self) -> &[FormalSegment] {
        &self.segments
    }

    /// Sum of the segment lengths.
    pub fn total_length(&self) -> u64 {
        self.segments.iter().map(|s| s.len).sum()
    }

    /// The length profile in decreasing order, as a partition.
    pub fn length_partition(&self) -> Partition {
        Partition::new(self.segments.iter().map(|s| s.len).collect())
    }
}

impl fmt::Display for Multisegment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.segments.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.segments.iter().map(|s| s.to_string()).collect();
        write!(f, "{}", parts.join("+"))
    }
}

impl FromStr for Multisegment {
    type Err = SegmentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "0" || s.is_empty() {
            return Ok(Multisegment::empty());
        }
        let mut segs = Vec::new();
        for piece in s.split('+') {
            let piece = piece.trim();
            let inner = piece
                .strip_prefix('[')
                .and_then(|p| p.strip_suffix(']'))
                .ok_or_else(|| SegmentError::Parse(format!("bad segment '{piece}'")))?;
            let (a, n) = inner
                .split_once(',')
                .ok_or_else(|| SegmentError::Parse(format!("bad segment '{piece}'")))?;
            let start: i64 = a
                .trim()
                .parse()
                .map_err(|_| SegmentError::Parse(format!("bad start in '{piece}'")))?;
            let len: u64 = n
                .trim()
                .parse()
                .map_err(|_| SegmentError::Parse(format!("bad length in '{piece}'")))?;
            if len == 0 {
                return Err(SegmentError::Parse(format!("zero length in '{piece}'")));
            }
            segs.push(FormalSegment::new(start, len));
        }
        Ok(Multisegment::new(segs))
    }
}

/// A partition: weakly decreasing positive parts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Partition {
    parts: Vec<u64>,
}

impl Partition {
    pub fn new(mut parts: Vec<u64>) -> Self {
        assert!(parts.iter().all(|&p| p >= 1), "partition parts must be >= 1");
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Partition { parts }
    }

    pub fn empty() -> Self {
        Partition::default()
    }

    pub fn parts(&self) -> &[u64] {
        &self.parts
    }

    pub fn sum(&self) -> u64 {
        self.parts.iter().sum()
    }

    /// Cumulative sums of the parts, padded with the total out to `width`
    /// entries. Dominance is the pointwise order on these vectors, and their
    /// lexicographic order is the linear extension used for elimination.
    pub fn partial_sums(&self, width: usize) -> Vec<u64> {
        let mut out = Vec::with_capacity(width);
        let mut acc = 0u64;
        for &p in &self.parts {
            acc += p;
            out.push(acc);
        }
        while out.len() < width {
            out.push(acc);
        }
        out
    }

    /// Identifies a partition with the multisegment `[0,n_1]+...+[0,n_r]`.
    pub fn to_multisegment(&self) -> Multisegment {
        Multisegment::new(
            self.parts
                .iter()
                .map(|&n| FormalSegment::new(0, n))
                .collect(),
        )
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.parts.iter().map(|p| p.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl FromStr for Partition {
    type Err = SegmentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let inner = s
            .trim()
            .strip_prefix('(')
            .and_then(|p| p.strip_suffix(')'))
            .ok_or_else(|| SegmentError::Parse(format!("bad partition '{s}'")))?;
        if inner.trim().is_empty() {
            return Ok(Partition::empty());
        }
        let mut parts = Vec::new();
        for piece in inner.split(',') {
            let p: u64 = piece
                .trim()
                .parse()
                .map_err(|_| SegmentError::Parse(format!("bad part '{piece}'")))?;
            if p == 0 {
                return Err(SegmentError::Parse("partition parts must be >= 1".into()));
            }
            parts.push(p);
        }
        Ok(Partition::new(parts))
    }
}

/// Dominance on multisegments of equal total length: compare partial sums of
/// the lengths arranged in decreasing order. Starts are ignored.
pub fn dominance_leq(mu: &Multisegment, nu: &Multisegment) -> Result<bool, SegmentError> {
    let (lm, ln) = (mu.total_length(), nu.total_length());
    if lm != ln {
        return Err(SegmentError::LengthMismatch(lm, ln));
    }
    Ok(partition_dominance_leq(
        &mu.length_partition(),
        &nu.length_partition(),
    ))
}

/// Dominance on partitions of the same total.
pub fn partition_dominance_leq(mu: &Partition, nu: &Partition) -> bool {
    debug_assert_eq!(mu.sum(), nu.sum());
    let k = mu.parts().len().min(nu.parts().len());
    let mut sm = 0u64;
    let mut sn = 0u64;
    for i in 0..k {
        sm += mu.parts()[i];
        sn += nu.parts()[i];
        if sm > sn {
            return false;
        }
    }
    true
}

/// Transpose of the Young diagram.
pub fn conjugate(p: &Partition) -> Partition {
    if p.parts().is_empty() {
        return Partition::empty();
    }
    let rows = p.parts()[0];
    let parts = (1..=rows)
        .map(|col| p.parts().iter().filter(|&&row| row >= col).count() as u64)
        .collect();
    Partition::new(parts)
}

/// All partitions of n, in lexicographically decreasing part order
/// (largest-first generation), deterministic and duplicate-free.
pub fn partitions_of(n: u64) -> Vec<Partition> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn rec(remaining: u64, max_part: u64, current: &mut Vec<u64>, out: &mut Vec<Partition>) {
        if remaining == 0 {
            out.push(Partition::new(current.clone()));
            return;
        }
        let top = max_part.min(remaining);
        for p in (1..=top).rev() {
            current.push(p);
            rec(remaining - p, p, current, out);
            current.pop();
        }
    }
    rec(n, n.max(1), &mut current, &mut out);
    out
}

/// All families (n_1, ..., n_parts) of nonnegative integers summing to n,
/// in lexicographic order starting from (n, 0, ..., 0).
pub fn compositions_of(n: u64, parts: u64) -> Vec<Vec<u64>> {
    assert!(parts >= 1, "compositions need at least one part");
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(parts as usize);
    fn rec(remaining: u64, slots: u64, current: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if slots == 1 {
            current.push(remaining);
            out.push(current.clone());
            current.pop();
            return;
        }
        for v in (0..=remaining).rev() {
            current.push(v);
            rec(remaining - v, slots - 1, current, out);
            current.pop();
        }
    }
    rec(n, parts, &mut current, &mut out);
    out
}

/// Binomial coefficient, exact in u64 for the sweep ranges used here.
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1u128;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}
