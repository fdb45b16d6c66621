//! Perceptual hashes (dhash and pHash, gray and per-channel color variants),
//! Hamming comparison, and the threshold calibration harness.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{contract, Result};
use crate::imaging::{resize_bilinear, to_gray, ColorImage, GrayImage};
use crate::numerics::{dct2, Matrix};

/// The four supported digest algorithms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HashAlgo {
    DhashGray,
    DhashColor,
    PhashGray,
    PhashColor,
}

impl HashAlgo {
    pub const ALL: [HashAlgo; 4] = [
        HashAlgo::DhashGray,
        HashAlgo::DhashColor,
        HashAlgo::PhashGray,
        HashAlgo::PhashColor,
    ];

    /// Digest width in bits: 64 for gray variants, 192 for color.
    pub fn bit_width(&self) -> u32 {
        match self {
            HashAlgo::DhashGray | HashAlgo::PhashGray => 64,
            HashAlgo::DhashColor | HashAlgo::PhashColor => 192,
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            HashAlgo::DhashGray => "dhash_gray",
            HashAlgo::DhashColor => "dhash_color",
            HashAlgo::PhashGray => "phash_gray",
            HashAlgo::PhashColor => "phash_color",
        }
    }

    pub fn from_tag(tag: &str) -> Option<HashAlgo> {
        match tag {
            "dhash_gray" => Some(HashAlgo::DhashGray),
            "dhash_color" => Some(HashAlgo::DhashColor),
            "phash_gray" => Some(HashAlgo::PhashGray),
            "phash_color" => Some(HashAlgo::PhashColor),
            _ => None,
        }
    }

    /// Operating threshold shipped as the default configuration.
    pub fn default_threshold(&self) -> u32 {
        match self {
            HashAlgo::DhashGray => 34,
            HashAlgo::DhashColor => 36,
            HashAlgo::PhashGray => 23,
            HashAlgo::PhashColor => 23,
        }
    }
}

impl fmt::Display for HashAlgo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Fixed-width bit string tagged with the algorithm that produced it.
///
/// Bits are packed MSB-first: bit `i` lives in byte `i / 8` under mask
/// `0x80 >> (i % 8)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HashDigest {
    algo: HashAlgo,
    bytes: Vec<u8>,
}

impl HashDigest {
    pub fn from_bytes(algo: HashAlgo, bytes: Vec<u8>) -> Result<Self> {
        if bytes.len() != algo.bit_width() as usize / 8 {
            return Err(contract("digest byte length must match the algorithm width"));
        }
        Ok(HashDigest { algo, bytes })
    }

    pub fn algo(&self) -> HashAlgo {
        self.algo
    }

    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn bit(&self, i: u32) -> bool {
        self.bytes[i as usize / 8] & (0x80 >> (i % 8)) != 0
    }

    pub fn popcount(&self) -> u32 {
        self.bytes.iter().map(|b| b.count_ones()).sum()
    }

    /// `algo_tag:lowercase-hex`, e.g. `phash_gray:00ff...` (16 or 48 hex chars).
    pub fn to_hex(&self) -> String {
        let mut s = String::with_capacity(self.algo.tag().len() + 1 + self.bytes.len() * 2);
        s.push_str(self.algo.tag());
        s.push(':');
        for b in &self.bytes {
            let hi = b >> 4;
            let lo = b & 0xf;
            s.push(char::from_digit(hi as u32, 16).unwrap());
            s.push(char::from_digit(lo as u32, 16).unwrap());
        }
        s
    }

    pub fn parse_hex(s: &str) -> Result<HashDigest> {
        let (tag, hex) = s
            .split_once(':')
            .ok_or_else(|| contract("digest must be algo_tag:hex"))?;
        let algo =
            HashAlgo::from_tag(tag).ok_or_else(|| contract("unknown digest algorithm tag"))?;
        let want = algo.bit_width() as usize / 4;
        if hex.len() != want {
            return Err(contract("digest hex length does not match the algorithm"));
        }
        let mut bytes = Vec::with_capacity(want / 2);
        let chars: Vec<char> = hex.chars().collect();
        for pair in chars.chunks_exact(2) {
            let hi = pair[0]
                .to_digit(16)
                .ok_or_else(|| contract("digest contains a non-hex character"))?;
            let lo = pair[1]
                .to_digit(16)
                .ok_or_else(|| contract("digest contains a non-hex character"))?;
            bytes.push(((hi << 4) | lo) as u8);
        }
        HashDigest::from_bytes(algo, bytes)
    }
}

impl fmt::Display for HashDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

/// Gradient hash: resize to 9x8, bit `y*8+x` set iff `I(x+1,y) > I(x,y)`.
pub fn dhash_gray(img: &GrayImage) -> HashDigest {
    let small = resize_bilinear(img, 9, 8);
    let mut bytes = alloc::vec![0u8; 8];
    for y in 0..8u32 {
        for x in 0..8u32 {
            if small.pixel(x + 1, y) > small.pixel(x, y) {
                let i = y * 8 + x;
                bytes[i as usize / 8] |= 0x80 >> (i % 8);
            }
        }
    }
    HashDigest {
        algo: HashAlgo::DhashGray,
        bytes,
    }
}

/// DCT hash: resize to 32x32, orthonormal 2-D DCT, keep the top-left 8x8
/// block, set bit `i` iff the coefficient exceeds the mean of the block's
/// 63 non-DC coefficients (the DC bit uses the same rule).
pub fn phash_gray(img: &GrayImage) -> HashDigest {
    let small = resize_bilinear(img, 32, 32);
    let mut data = Vec::with_capacity(32 * 32);
    for y in 0..32 {
        for x in 0..32 {
            data.push(small.pixel(x, y) as f64);
        }
    }
    let block = Matrix::from_vec(32, 32, data).expect("32x32 block");
    let freq = dct2(&block).expect("square block");

    let mut coeffs = [0.0f64; 64];
    for v in 0..8 {
        for u in 0..8 {
            // snap DCT round-off to zero so exactly-flat inputs keep their
            // analytically-zero AC coefficients (bit rule is a strict >)
            let c = freq.get(v, u);
            coeffs[v * 8 + u] = if c.abs() < 1e-8 { 0.0 } else { c };
        }
    }
    let mean: f64 = coeffs.iter().skip(1).sum::<f64>() / 63.0;

    let mut bytes = alloc::vec![0u8; 8];
    for (i, &c) in coeffs.iter().enumerate() {
        if c > mean {
            bytes[i / 8] |= 0x80 >> (i % 8);
        }
    }
    HashDigest {
        algo: HashAlgo::PhashGray,
        bytes,
    }
}

/// Which base hash a color digest is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseHash {
    Dhash,
    Phash,
}

/// Per-channel color digest: the 64-bit base hash of the R, G and B planes
/// concatenated in that order (R leads, then G, then B) into 192 bits.
pub fn color_hash(img: &ColorImage, base: BaseHash) -> HashDigest {
    let mut bytes = Vec::with_capacity(24);
    for channel in 0..3 {
        let plane = img.channel_plane(channel);
        let seg = match base {
            BaseHash::Dhash => dhash_gray(&plane),
            BaseHash::Phash => phash_gray(&plane),
        };
        bytes.extend_from_slice(seg.bytes());
    }
    let algo = match base {
        BaseHash::Dhash => HashAlgo::DhashColor,
        BaseHash::Phash => HashAlgo::PhashColor,
    };
    HashDigest { algo, bytes }
}

/// Computes the digest of a color image under any of the four algorithms
/// (gray variants convert with BT.601 first).
pub fn hash_color_image(img: &ColorImage, algo: HashAlgo) -> HashDigest {
    match algo {
        HashAlgo::DhashGray => dhash_gray(&to_gray(img)),
        HashAlgo::PhashGray => phash_gray(&to_gray(img)),
        HashAlgo::DhashColor => color_hash(img, BaseHash::Dhash),
        HashAlgo::PhashColor => color_hash(img, BaseHash::Phash),
    }
}

/// Popcount of XOR. Errors if the digests come from different algorithms.
pub fn hamming(a: &HashDigest, b: &HashDigest) -> Result<u32> {
    if a.algo != b.algo {
        return Err(contract("hamming distance requires digests of the same algorithm"));
    }
    Ok(a.bytes
        .iter()
        .zip(&b.bytes)
        .map(|(x, y)| (x ^ y).count_ones())
        .sum())
}

/// Outcome of threshold calibration over labeled pair sets.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationReport {
    pub algo: HashAlgo,
    /// Mean Hamming distance over the similar pairs.
    pub weight_similar: f64,
    /// Mean Hamming distance over the different pairs.
    pub weight_different: f64,
    /// Integer cutoff maximizing accuracy; ties broken toward the smallest.
    pub threshold: u32,
    /// Fraction of pairs classified correctly at `threshold`.
    pub accuracy: f64,
}

/// Calibrates a decision threshold for `algo` over labeled image pairs.
///
/// A pair is classified similar iff its distance is `<= T`; the report keeps
/// the smallest `T` in `[0, bit width]` that maximizes accuracy.
pub fn calibrate(
    similar: &[(ColorImage, ColorImage)],
    different: &[(ColorImage, ColorImage)],
    algo: HashAlgo,
) -> Result<CalibrationReport> {
    if similar.is_empty() || different.is_empty() {
        return Err(contract("calibration requires non-empty pair lists"));
    }
    let dist = |pair: &(ColorImage, ColorImage)| -> u32 {
        let a = hash_color_image(&pair.0, algo);
        let b = hash_color_image(&pair.1, algo);
        hamming(&a, &b).expect("same algorithm")
    };
    let sim: Vec<u32> = similar.iter().map(dist).collect();
    let diff: Vec<u32> = different.iter().map(dist).collect();
    Ok(calibrate_distances(&sim, &diff, algo))
}

/// Threshold sweep over precomputed distances; shared by [`calibrate`] and
/// callers that already hold digests. One side may be empty (its mean is
/// reported as 0), but not both.
pub fn calibrate_distances(sim: &[u32], diff: &[u32], algo: HashAlgo) -> CalibrationReport {
    assert!(!sim.is_empty() || !diff.is_empty());
    let total = (sim.len() + diff.len()) as f64;
    let mut best_t = 0u32;
    let mut best_acc = -1.0f64;
    for t in 0..=algo.bit_width() {
        let correct = sim.iter().filter(|&&d| d <= t).count()
            + diff.iter().filter(|&&d| d > t).count();
        let acc = correct as f64 / total;
        if acc > best_acc {
            best_acc = acc;
            best_t = t;
        }
    }
    let mean = |v: &[u32]| {
        if v.is_empty() {
            0.0
        } else {
            v.iter().map(|&d| d as f64).sum::<f64>() / v.len() as f64
        }
    };
    CalibrationReport {
        algo,
        weight_similar: mean(sim),
        weight_different: mean(diff),
        threshold: best_t,
        accuracy: best_acc,
    }
}
