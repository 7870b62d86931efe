use std::io::{BufRead, Write};

use super::{check_nq, forward_raw, LatticePoint};
use crate::error::{Error, Result};

/// Fraction of the central cell covered by the default disk image.
pub const DEFAULT_DISK_FRACTION: f64 = 0.36;

/// A set of occupied lattice cells. Each point carries amplitude `1/sqrt(N_d)`
/// when the set is loaded into a register.
///
/// Points are kept sorted by [`LatticePoint::index`] and free of duplicates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageSet {
    n_q: u32,
    points: Vec<LatticePoint>,
}

impl ImageSet {
    pub fn new(n_q: u32, points: impl IntoIterator<Item = LatticePoint>) -> Result<Self> {
        check_nq(n_q)?;
        let mut points: Vec<LatticePoint> = points.into_iter().collect();
        for p in &points {
            p.validate(n_q)?;
        }
        points.sort_unstable_by_key(|p| p.index(n_q));
        points.dedup();
        Ok(ImageSet { n_q, points })
    }

    pub fn single(n_q: u32, p: LatticePoint) -> Result<Self> {
        Self::new(n_q, [p])
    }

    /// Every cell of the central square `-0.5 <= x, y < 0.5`.
    pub fn central_cell(n_q: u32) -> Result<Self> {
        check_nq(n_q)?;
        let n = 1u32 << n_q;
        Self::new(
            n_q,
            (n / 2..3 * n / 2).flat_map(|j| (0..n).map(move |i| LatticePoint { i, j })),
        )
    }

    /// Every cell of the `N × 2N` lattice.
    pub fn full(n_q: u32) -> Result<Self> {
        check_nq(n_q)?;
        let n = 1u32 << n_q;
        Self::new(
            n_q,
            (0..2 * n).flat_map(|j| (0..n).map(move |i| LatticePoint { i, j })),
        )
    }

    /// Filled disk centred at the origin whose area is 36% of the central cell.
    pub fn default_disk(n_q: u32) -> Result<Self> {
        check_nq(n_q)?;
        let r2 = DEFAULT_DISK_FRACTION / std::f64::consts::PI;
        let n = 1u32 << n_q;
        let pts = (n / 2..3 * n / 2).flat_map(|j| {
            (0..n).filter_map(move |i| {
                let p = LatticePoint { i, j };
                let (x, y) = p.coordinates(n_q);
                (x * x + y * y < r2).then_some(p)
            })
        });
        Self::new(n_q, pts)
    }

    pub fn n_q(&self) -> u32 {
        self.n_q
    }

    pub fn points(&self) -> &[LatticePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, p: &LatticePoint) -> bool {
        self.points
            .binary_search_by_key(&p.index(self.n_q), |q| q.index(self.n_q))
            .is_ok()
    }

    /// Amplitude assigned to each point of the set.
    pub fn amplitude(&self) -> f64 {
        1.0 / (self.points.len() as f64).sqrt()
    }

    /// Image of the set after `t` iterations. Colliding points merge, so the
    /// cell count never grows.
    pub fn iterate(&self, t: usize) -> ImageSet {
        let n_q = self.n_q;
        let mut idx: Vec<usize> = self.points.iter().map(|p| p.index(n_q)).collect();
        for _ in 0..t {
            for v in idx.iter_mut() {
                *v = forward_raw(LatticePoint::from_index(*v, n_q), n_q).0.index(n_q);
            }
            idx.sort_unstable();
            idx.dedup();
        }
        ImageSet {
            n_q,
            points: idx
                .into_iter()
                .map(|v| LatticePoint::from_index(v, n_q))
                .collect(),
        }
    }

    /// Number of points present in exactly one of the two sets.
    pub fn symmetric_difference(&self, other: &ImageSet) -> usize {
        let (mut a, mut b) = (self.points.iter().peekable(), other.points.iter().peekable());
        let mut count = 0;
        loop {
            match (a.peek(), b.peek()) {
                (Some(p), Some(q)) => {
                    let (ip, iq) = (p.index(self.n_q), q.index(other.n_q));
                    if ip == iq {
                        a.next();
                        b.next();
                    } else if ip < iq {
                        count += 1;
                        a.next();
                    } else {
                        count += 1;
                        b.next();
                    }
                }
                (Some(_), None) => {
                    count += 1;
                    a.next();
                }
                (None, Some(_)) => {
                    count += 1;
                    b.next();
                }
                (None, None) => return count,
            }
        }
    }

    /// Read an ASCII portable bitmap (`P1`) of `N × N` pixels covering the
    /// central cell. Row 0 is the line just below `y = +0.5`; column 0 is
    /// `x = -0.5`.
    pub fn read_pbm(reader: impl BufRead) -> Result<Self> {
        let mut tokens: Vec<(usize, String)> = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let content = line.split('#').next().unwrap_or("");
            for tok in content.split_whitespace() {
                tokens.push((lineno + 1, tok.to_string()));
            }
        }
        let mut it = tokens.into_iter();
        let parse_err = |line: usize, message: String| Error::Parse { line, message };
        let (line, magic) = it.next().ok_or_else(|| parse_err(1, "empty bitmap".into()))?;
        if magic != "P1" {
            return Err(parse_err(line, format!("expected P1 magic, found {magic:?}")));
        }
        let mut dim = || -> Result<usize> {
            let (line, tok) = it
                .next()
                .ok_or_else(|| parse_err(line, "missing dimensions".into()))?;
            tok.parse::<usize>()
                .map_err(|_| parse_err(line, format!("bad dimension {tok:?}")))
        };
        let (width, height) = (dim()?, dim()?);
        if width != height || !width.is_power_of_two() || width < 2 {
            return Err(Error::Domain(format!(
                "bitmap must be N x N with N a power of two >= 2, got {width} x {height}"
            )));
        }
        let n_q = width.trailing_zeros();
        check_nq(n_q)?;
        let mut bits = Vec::with_capacity(width * height);
        for (line, tok) in it {
            for c in tok.chars() {
                match c {
                    '0' => bits.push(false),
                    '1' => bits.push(true),
                    _ => return Err(parse_err(line, format!("unexpected pixel {c:?}"))),
                }
            }
        }
        if bits.len() != width * height {
            return Err(Error::Domain(format!(
                "bitmap holds {} pixels, expected {}",
                bits.len(),
                width * height
            )));
        }
        let n = width as u32;
        let top = 3 * n / 2 - 1;
        let pts = bits.iter().enumerate().filter(|(_, b)| **b).map(|(k, _)| {
            let row = (k / width) as u32;
            let col = (k % width) as u32;
            LatticePoint { i: col, j: top - row }
        });
        Self::new(n_q, pts)
    }

    /// Write the central-cell part of the set as a `P1` bitmap.
    pub fn write_pbm(&self, mut w: impl Write) -> Result<()> {
        let n = 1u32 << self.n_q;
        writeln!(w, "P1")?;
        writeln!(w, "{n} {n}")?;
        let top = 3 * n / 2 - 1;
        for row in 0..n {
            let line: Vec<&str> = (0..n)
                .map(|i| {
                    if self.contains(&LatticePoint { i, j: top - row }) {
                        "1"
                    } else {
                        "0"
                    }
                })
                .collect();
            writeln!(w, "{}", line.join(" "))?;
        }
        Ok(())
    }

    /// CSV dump with header `i,j`.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "i,j")?;
        for p in &self.points {
            writeln!(w, "{},{}", p.i, p.j)?;
        }
        Ok(())
    }
}
