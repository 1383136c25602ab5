//! Potentials given by samples on a half-offset lattice over `[-L, L)^n`.
//!
//! Sample `(i_1, ..., i_n)` sits at `x_d = -L + (i_d + 1/2) h`, `h = 2L/M`;
//! evaluation returns the sample of the cell containing `x` (no
//! interpolation).
//!
//! Text format: a header line `n N M L`, then one line per sample
//! `i_1 ... i_n re_11 im_11 re_12 im_12 ... re_NN im_NN` with the matrix in
//! row-major order. Blank lines and lines starting with `#` are ignored.
//!
//! Binary format (little-endian): magic `BSPOT001`, `u32 n`, `u32 N`,
//! `u32 M`, `f64 L`, then per sample `n x u32` indices followed by `N^2`
//! pairs `(f64 re, f64 im)`.

use super::PotentialError;
use crate::linalg::{largest_singular_value, CMat};
use num_complex::Complex64 as C64;

pub const BINARY_MAGIC: &[u8; 8] = b"BSPOT001";

#[derive(Clone, Debug, PartialEq)]
pub struct SampledPotential {
    n: usize,
    size: usize,
    samples: usize,
    half_length: f64,
    /// `M^n` matrices of `size^2` entries, row-major, lattice index row-major.
    data: Vec<C64>,
    opnorms: Vec<f64>,
    outside_zero: bool,
}

impl SampledPotential {
    pub fn new(
        n: usize,
        size: usize,
        samples: usize,
        half_length: f64,
        data: Vec<C64>,
    ) -> Result<Self, PotentialError> {
        let bad = |m: String| Err(PotentialError::InvalidParameter(m));
        if n == 0 || size == 0 || samples == 0 {
            return bad(format!("n, N and M must be positive (got {n}, {size}, {samples})"));
        }
        if !(half_length > 0.0 && half_length.is_finite()) {
            return bad(format!("half length must be > 0, got {half_length}"));
        }
        let cells = samples.checked_pow(n as u32).ok_or_else(|| {
            PotentialError::InvalidParameter(format!("lattice {samples}^{n} is too large"))
        })?;
        if data.len() != cells * size * size {
            return bad(format!("expected {} entries, got {}", cells * size * size, data.len()));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return bad("sample values must be finite".into());
        }
        let opnorms = data
            .chunks(size * size)
            .map(|c| largest_singular_value(&CMat::from_vec(size, size, c.to_vec())))
            .collect();
        Ok(SampledPotential { n, size, samples, half_length, data, opnorms, outside_zero: false })
    }

    /// `c I` on every sample.
    pub fn constant(n: usize, size: usize, samples: usize, half_length: f64, c: C64) -> Self {
        let cells = samples.pow(n as u32);
        let one = CMat::identity(size).scale(c).into_vec();
        let data = (0..cells).flat_map(|_| one.iter().cloned()).collect();
        Self::new(n, size, samples, half_length, data).expect("valid constant lattice")
    }

    /// Samples `f` at the lattice points.
    pub fn from_fn(
        n: usize,
        size: usize,
        samples: usize,
        half_length: f64,
        f: impl Fn(&[f64]) -> CMat,
    ) -> Result<Self, PotentialError> {
        let cells = samples.pow(n as u32);
        let h = 2.0 * half_length / samples as f64;
        let mut data = Vec::with_capacity(cells * size * size);
        let mut x = vec![0.0; n];
        for p in 0..cells {
            let mut rem = p;
            for d in (0..n).rev() {
                x[d] = -half_length + ((rem % samples) as f64 + 0.5) * h;
                rem /= samples;
            }
            let m = f(&x);
            if m.rows() != size || m.cols() != size {
                return Err(PotentialError::InvalidParameter("sample has wrong matrix size".into()));
            }
            data.extend_from_slice(m.as_slice());
        }
        Self::new(n, size, samples, half_length, data)
    }

    /// Treat points outside the box as `V = 0` instead of a domain error.
    pub fn with_outside_zero(mut self, yes: bool) -> Self {
        self.outside_zero = yes;
        self
    }

    pub fn outside_zero(&self) -> bool {
        self.outside_zero
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    /// Radius beyond which every point lies outside the box.
    pub fn outer_radius(&self) -> f64 {
        self.half_length * (self.n as f64).sqrt()
    }

    pub fn max_opnorm(&self) -> f64 {
        self.opnorms.iter().cloned().fold(0.0, f64::max)
    }

    pub(crate) fn scale(&mut self, c: C64) {
        self.data.iter_mut().for_each(|z| *z *= c);
        let a = c.norm();
        self.opnorms.iter_mut().for_each(|s| *s *= a);
    }

    pub fn is_hermitian(&self) -> bool {
        self.data
            .chunks(self.size * self.size)
            .all(|c| CMat::from_vec(self.size, self.size, c.to_vec()).hermitian_defect() == 0.0)
    }

    fn cell(&self, x: &[f64]) -> Result<Option<usize>, PotentialError> {
        let h = 2.0 * self.half_length / self.samples as f64;
        let mut p = 0usize;
        for &c in x {
            let k = ((c + self.half_length) / h).floor();
            if !(k >= 0.0 && k < self.samples as f64) {
                if self.outside_zero && c.is_finite() {
                    return Ok(None);
                }
                return Err(PotentialError::Domain { point: x.to_vec() });
            }
            p = p * self.samples + k as usize;
        }
        Ok(Some(p))
    }

    pub fn eval(&self, x: &[f64]) -> Result<CMat, PotentialError> {
        let s2 = self.size * self.size;
        Ok(match self.cell(x)? {
            Some(p) => CMat::from_vec(self.size, self.size, self.data[p * s2..(p + 1) * s2].to_vec()),
            None => CMat::zeros(self.size, self.size),
        })
    }

    pub fn opnorm(&self, x: &[f64]) -> Result<f64, PotentialError> {
        Ok(self.cell(x)?.map_or(0.0, |p| self.opnorms[p]))
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {} {} {}\n", self.n, self.size, self.samples, self.half_length);
        let s2 = self.size * self.size;
        for (p, chunk) in self.data.chunks(s2).enumerate() {
            let idx = self.index_tuple(p);
            let mut fields: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
            for z in chunk {
                fields.push(format!("{:e}", z.re));
                fields.push(format!("{:e}", z.im));
            }
            out.push_str(&fields.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, PotentialError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hl, header) = lines.next().ok_or(PotentialError::Format { line: 0, msg: "empty file".into() })?;
        let h: Vec<&str> = header.split_whitespace().collect();
        let fmt = |line: usize, msg: String| PotentialError::Format { line, msg };
        if h.len() != 4 {
            return Err(fmt(hl, format!("header needs 4 fields 'n N M L', got {}", h.len())));
        }
        let int = |s: &str, line: usize| s.parse::<usize>().map_err(|e| fmt(line, format!("'{s}': {e}")));
        let (n, size, m) = (int(h[0], hl)?, int(h[1], hl)?, int(h[2], hl)?);
        let l: f64 = h[3].parse().map_err(|e| fmt(hl, format!("'{}': {e}", h[3])))?;
        let cells = Self::cell_count(n, m, hl)?;
        let s2 = size * size;
        let mut data = vec![C64::new(0.0, 0.0); cells * s2];
        let mut seen = vec![false; cells];
        for (ln, line) in lines {
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != n + 2 * s2 {
                return Err(fmt(ln, format!("expected {} fields, got {}", n + 2 * s2, f.len())));
            }
            let mut p = 0usize;
            for s in &f[..n] {
                let i = int(s, ln)?;
                if i >= m {
                    return Err(fmt(ln, format!("index {i} out of range 0..{m}")));
                }
                p = p * m + i;
            }
            if std::mem::replace(&mut seen[p], true) {
                return Err(fmt(ln, "duplicate sample".into()));
            }
            for k in 0..s2 {
                let num = |s: &str| s.parse::<f64>().map_err(|e| fmt(ln, format!("'{s}': {e}")));
                data[p * s2 + k] = C64::new(num(f[n + 2 * k])?, num(f[n + 2 * k + 1])?);
            }
        }
        if let Some(p) = seen.iter().position(|s| !s) {
            return Err(fmt(0, format!("missing sample {p} (row-major) of {cells}")));
        }
        Self::new(n, size, m, l, data)
    }

    pub fn to_binary(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(28 + self.data.len() * 16);
        out.extend_from_slice(BINARY_MAGIC);
        for v in [self.n, self.size, self.samples] {
            out.extend_from_slice(&(v as u32).to_le_bytes());
        }
        out.extend_from_slice(&self.half_length.to_le_bytes());
        let s2 = self.size * self.size;
        for (p, chunk) in self.data.chunks(s2).enumerate() {
            for i in self.index_tuple(p) {
                out.extend_from_slice(&(i as u32).to_le_bytes());
            }
            for z in chunk {
                out.extend_from_slice(&z.re.to_le_bytes());
                out.extend_from_slice(&z.im.to_le_bytes());
            }
        }
        out
    }

    pub fn from_binary(bytes: &[u8]) -> Result<Self, PotentialError> {
        let fmt = |msg: String| PotentialError::Format { line: 0, msg };
        if bytes.len() < 28 || &bytes[..8] != BINARY_MAGIC {
            return Err(fmt("missing BSPOT001 header".into()));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as usize;
        let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let (n, size, m, l) = (u32_at(8), u32_at(12), u32_at(16), f64_at(20));
        let cells = Self::cell_count(n, m, 0)?;
        let s2 = size * size;
        let rec = 4 * n + 16 * s2;
        if bytes.len() != 28 + cells * rec {
            return Err(fmt(format!("expected {} bytes, got {}", 28 + cells * rec, bytes.len())));
        }
        let mut data = vec![C64::new(0.0, 0.0); cells * s2];
        let mut seen = vec![false; cells];
        for r in 0..cells {
            let base = 28 + r * rec;
            let mut p = 0usize;
            for d in 0..n {
                let i = u32_at(base + 4 * d);
                if i >= m {
                    return Err(fmt(format!("record {r}: index {i} out of range")));
                }
                p = p * m + i;
            }
            if std::mem::replace(&mut seen[p], true) {
                return Err(fmt(format!("record {r}: duplicate sample")));
            }
            for k in 0..s2 {
                let o = base + 4 * n + 16 * k;
                data[p * s2 + k] = C64::new(f64_at(o), f64_at(o + 8));
            }
        }
        Self::new(n, size, m, l, data)
    }

    /// Reads either format, detected by the magic bytes.
    pub fn read(path: &std::path::Path) -> Result<Self, PotentialError> {
        let bytes = std::fs::read(path).map_err(|e| PotentialError::Io(format!("{}: {e}", path.display())))?;
        if bytes.starts_with(BINARY_MAGIC) {
            Self::from_binary(&bytes)
        } else {
            let text = String::from_utf8(bytes).map_err(|e| PotentialError::Format { line: 0, msg: e.to_string() })?;
            Self::from_text(&text)
        }
    }

    fn cell_count(n: usize, m: usize, line: usize) -> Result<usize, PotentialError> {
        if n == 0 || m == 0 {
            return Err(PotentialError::Format { line, msg: "n and M must be positive".into() });
        }
        m.checked_pow(n as u32)
            .filter(|c| *c <= 1 << 26)
            .ok_or(PotentialError::Format { line, msg: format!("lattice {m}^{n} is too large") })
    }

    fn index_tuple(&self, mut p: usize) -> Vec<usize> {
        let mut idx = vec![0; self.n];
        for d in (0..self.n).rev() {
            idx[d] = p % self.samples;
            p /= self.samples;
        }
        idx
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SampledPotential {
        SampledPotential::from_fn(2, 2, 4, 2.0, |x| {
            CMat::from_vec(2, 2, vec![
                C64::new(x[0], 0.0),
                C64::new(0.0, x[1]),
                C64::new(1.0, 0.0),
                C64::new(x[0] * x[1], -1.0),
            ])
        })
        .unwrap()
    }

    #[test]
    fn nearest_sample_lookup() {
        let s = sample();
        // Cell (0, 3) has centre (-1.5, 1.5).
        let v = s.eval(&[-1.9, 1.01]).unwrap();
        assert_eq!(v[(0, 0)], C64::new(-1.5, 0.0));
        assert_eq!(v[(0, 1)], C64::new(0.0, 1.5));
        assert!(matches!(s.eval(&[2.0, 0.0]), Err(PotentialError::Domain { .. })));
        assert!(matches!(s.eval(&[0.0, -2.01]), Err(PotentialError::Domain { .. })));
        let z = s.clone().with_outside_zero(true);
        assert_eq!(z.eval(&[5.0, 0.0]).unwrap().max_abs(), 0.0);
        assert_eq!(z.opnorm(&[5.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn text_round_trip() {
        let s = sample();
        let back = SampledPotential::from_text(&s.to_text()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn binary_round_trip() {
        let s = sample();
        let bytes = s.to_binary();
        assert_eq!(&bytes[..8], BINARY_MAGIC);
        assert_eq!(u32::from_le_bytes(bytes[16..20].try_into().unwrap()), 4);
        assert_eq!(SampledPotential::from_binary(&bytes).unwrap(), s);
    }

    #[test]
    fn read_detects_format() {
        let dir = tempfile::tempdir().unwrap();
        let s = sample();
        let tp = dir.path().join("v.txt");
        let bp = dir.path().join("v.bin");
        std::fs::write(&tp, s.to_text()).unwrap();
        std::fs::write(&bp, s.to_binary()).unwrap();
        assert_eq!(SampledPotential::read(&tp).unwrap(), s);
        assert_eq!(SampledPotential::read(&bp).unwrap(), s);
        assert!(matches!(SampledPotential::read(&dir.path().join("none")), Err(PotentialError::Io(_))));
    }

    #[test]
    fn malformed_text_is_rejected() {
        assert!(SampledPotential::from_text("").is_err());
        assert!(SampledPotential::from_text("1 1 2").is_err());
        let missing = "1 1 2 1.0\n0 1 0\n";
        assert!(matches!(SampledPotential::from_text(missing), Err(PotentialError::Format { .. })));
        let dup = "1 1 2 1.0\n0 1 0\n0 2 0\n";
        assert!(matches!(SampledPotential::from_text(dup), Err(PotentialError::Format { line: 3, .. })));
        let ok = "# comment\n1 1 2 1.0\n1 2 0\n\n0 1 0.5\n";
        let s = SampledPotential::from_text(ok).unwrap();
        assert_eq!(s.eval(&[0.5]).unwrap()[(0, 0)], C64::new(2.0, 0.0));
        assert_eq!(s.eval(&[-0.5]).unwrap()[(0, 0)], C64::new(1.0, 0.5));
    }
}
