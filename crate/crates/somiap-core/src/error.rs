//! Error type shared by all core modules.

use alloc::string::String;
use core::fmt;

/// Errors produced by the core kernels.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An operation precondition was violated (shape/size/argument contracts).
    Contract(String),
    /// A rectangle or scan window falls outside the image.
    OutOfBounds {
        x: i64,
        y: i64,
        w: u32,
        h: u32,
        image_w: u32,
        image_h: u32,
    },
    /// A matrix is not positive definite where the algorithm requires it.
    Singular(String),
    /// An id is already present in the index.
    DuplicateId(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Contract(msg) => write!(f, "contract violation: {msg}"),
            Error::OutOfBounds {
                x,
                y,
                w,
                h,
                image_w,
                image_h,
            } => write!(
                f,
                "rect {w}x{h} at ({x},{y}) outside {image_w}x{image_h} image"
            ),
            Error::Singular(msg) => write!(f, "singular matrix: {msg}"),
            Error::DuplicateId(id) => write!(f, "duplicate id: {id}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}
