//! Core kernels for photo place-and-person analysis.
//!
//! Everything in this crate operates on plain in-memory buffers and is
//! `no_std` (with `alloc`): image resampling and integral images, a 2-D DCT
//! and a Jacobi eigensolver, dhash/pHash perceptual hashes, FAST/ORB-style
//! binary features, Haar cascade window evaluation, Eigen/Fisher/LBPH face
//! recognizers, and the two-stage place matching pipeline that ties them
//! together. File formats, decoding and the CLI live in the companion
//! `somiap` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod config;
pub mod error;
pub mod facedetect;
pub mod facerecog;
pub mod features;
pub mod hashing;
pub mod imaging;
pub mod numerics;
pub mod pipeline;

pub use error::{Error, Result};
pub use imaging::{ColorImage, GrayImage, IntegralImage, Rect};
