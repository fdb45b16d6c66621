//! Fixed sampling pattern for the 256-bit binary descriptor.
//!
//! 256 point pairs `[x1, y1, x2, y2]` in patch coordinates, drawn once from
//! an isotropic Gaussian (sigma = 31/5 over a 31x31 patch, coordinates
//! rejected outside [-15, 15], identical-point pairs rejected) by a
//! fixed-seed xorshift64* generator. The table is committed so descriptors
//! are bit-stable; the generator lives in this module's tests and must keep
//! reproducing it.

pub const SAMPLING_PATTERN: [[i8; 4]; 256] = [
    [10, 1, 3, -12], [6, -4, 11, 1], [8, -8, -8, 1], [7, 7, 7, -3],
    [-4, -7, -9, 4], [0, -5, 2, 8], [-3, 5, -6, -3], [-2, -3, -3, 6],
    [2, -11, -4, -9], [6, 7, 0, -3], [3, -11, -1, 3], [3, -3, 5, 7],
    [5, -3, -1, 0], [5, -5, -10, 12], [-5, 3, 3, -4], [2, 3, -1, 4],
    [9, 1, 3, 8], [1, -4, 4, -6], [-14, 0, 4, -5], [-1, -2, 1, -1],
    [-13, -5, 2, -3], [6, -1, 2, -8], [4, 3, -8, 7], [-6, 8, -5, 10],
    [-1, -5, 3, -3], [-5, 3, 2, -7], [3, -2, -11, -7], [0, -10, -2, 6],
    [5, 12, -1, -11], [2, 3, -3, -2], [-10, 3, -7, -4], [3, 7, -1, 3],
    [13, -1, 1, -6], [-10, 0, -4, -8], [10, -1, 8, 5], [-6, 6, 1, 7],
    [4, 1, -1, 11], [-3, 7, 2, 4], [-10, 2, -1, -12], [5, 2, 5, 7],
    [-10, -4, 9, 7], [1, -2, 0, -8], [5, 5, 2, 8], [-6, 0, -7, 2],
    [4, -15, 1, 4], [1, 5, 8, 5], [-12, -5, 6, 3], [7, 0, -6, 2],
    [-14, 4, 11, 4], [13, 4, 6, 2], [3, -11, -5, -12], [7, 3, -2, 7],
    [-14, 7, 5, -7], [-1, -6, -3, -2], [1, -14, 1, 10], [-10, 1, 10, -5],
    [0, -10, -10, 10], [3, -2, 3, 4], [-3, -3, 7, -1], [2, -3, -3, -3],
    [-8, -3, -3, 1], [10, 4, 0, -10], [-5, 8, -10, 2], [-3, -1, 0, 6],
    [8, 4, 6, 3], [-1, 2, -14, 5], [-5, 5, 4, -8], [-9, 2, 4, 8],
    [8, -4, 0, -5], [-5, 6, -4, -4], [8, -9, 5, -3], [-4, 2, -1, -3],
    [-1, -15, 12, -6], [-10, -3, 4, 5], [6, 6, -2, -3], [2, -1, 3, 7],
    [-2, -3, 7, -7], [-6, -2, 4, 7], [-4, -2, 5, 6], [6, 2, 9, 7],
    [-9, -3, 3, -3], [1, -3, -2, 7], [-4, -6, 5, 6], [-7, -5, -6, -7],
    [4, -10, 5, 10], [1, 8, -3, -3], [5, 8, -12, -2], [7, -2, -1, 7],
    [2, 2, 2, -2], [-3, 1, 3, -4], [6, 5, -4, 2], [3, 10, -4, -11],
    [-2, 9, -8, -13], [0, 4, 1, 6], [4, -4, 5, -6], [-9, -7, 12, 2],
    [-4, -7, -5, -4], [1, -5, 13, 0], [-11, 6, -7, 6], [1, 6, -5, 0],
    [5, 9, 1, 10], [-7, -3, -7, -1], [5, -6, -4, 7], [0, -4, 6, 6],
    [7, -9, 9, 9], [6, -9, 1, 5], [-9, 10, -1, 4], [7, -9, 3, 1],
    [-2, -1, 6, -3], [1, -3, 10, 2], [5, 4, -1, -2], [8, 4, -5, 10],
    [7, -1, -3, -14], [-1, -3, 5, -6], [-7, 7, 9, -6], [6, -2, -1, 9],
    [4, 5, 3, 6], [2, -7, 5, 6], [11, 2, 0, 7], [-3, 8, 7, 1],
    [-5, 6, -10, 7], [-3, 12, -8, 11], [-12, 9, 4, -1], [-1, -4, -5, 5],
    [-4, -1, 2, 5], [-3, -2, -3, 7], [4, 1, 10, 4], [-3, -5, 2, 5],
    [9, 2, 1, 8], [2, -2, -2, 2], [-3, -2, 2, -3], [-2, 5, -4, -3],
    [4, -3, -5, 0], [3, -3, 14, -7], [4, 5, 5, 2], [7, 0, 5, 0],
    [11, 12, 2, 7], [3, 10, 2, -7], [-5, -5, -9, 0], [-1, -1, 1, 7],
    [1, 1, 2, 6], [2, -1, -4, 2], [-2, -2, 5, 4], [2, -1, 5, -8],
    [9, -1, 0, -2], [0, -2, -1, -10], [-9, 4, 3, 3], [-6, 8, 4, 14],
    [7, -2, -7, 4], [-1, 1, -10, -3], [-10, 0, 6, 1], [3, -2, -9, 3],
    [9, -12, 5, -2], [4, -4, -13, 0], [-1, 1, -3, 1], [-2, -1, 2, -5],
    [1, 3, 0, -4], [0, 5, 0, 3], [0, -4, -3, 4], [-3, 6, 4, 10],
    [-1, 3, -8, 10], [-7, -3, 0, 7], [1, 2, -5, 4], [-3, 2, -2, -2],
    [1, 5, -4, 6], [12, 5, 5, 9], [1, 3, 1, -1], [14, 5, -5, 2],
    [0, 5, 4, 15], [-6, -1, 3, 3], [7, -3, -3, 12], [-3, -4, 6, -1],
    [9, -5, 1, 8], [4, -10, -13, 4], [-7, 3, 0, 3], [2, 6, -3, -6],
    [-4, 4, 2, 0], [-3, -1, -9, -1], [-12, 5, -3, 5], [-4, -8, -11, -4],
    [-4, -10, -10, -1], [6, -15, 3, 6], [1, 0, -4, 12], [15, -5, -3, 6],
    [-7, 6, 8, -4], [1, -3, 0, 7], [6, 1, 0, -13], [1, -8, 4, -7],
    [0, -3, 0, -4], [4, -5, -6, -7], [0, -2, 10, -6], [-6, -3, -6, -8],
    [-3, -12, 3, -9], [1, -4, 7, -3], [-2, 3, -3, -6], [-1, -1, -11, 0],
    [-1, 5, -12, 5], [-10, 4, -6, 1], [-3, 7, -2, 2], [6, 6, 3, 8],
    [6, 1, -12, 2], [7, -6, 6, -10], [-4, -2, 7, 13], [-3, 9, -5, 4],
    [-6, -3, -1, -5], [0, 11, 0, 5], [-2, 6, -4, 5], [-2, -9, 6, -11],
    [3, -2, 14, 4], [1, 4, 2, 1], [-2, 9, -9, 1], [-8, 0, -1, 3],
    [11, -5, -2, -2], [-3, -5, 3, 3], [0, -11, 4, 9], [3, -4, 5, 4],
    [5, -4, -6, -7], [-2, 2, 6, -9], [0, 0, 4, 0], [-3, 9, 8, 1],
    [2, 3, -8, -7], [-1, 0, 12, 4], [4, -5, -8, -1], [7, -3, 4, 0],
    [-7, 0, -3, 0], [4, 4, 12, 2], [-9, -6, 0, -1], [-5, 8, -9, -2],
    [9, 0, -3, -5], [-10, -2, 2, -12], [-4, 1, -1, -2], [4, -2, -1, 15],
    [6, 2, 2, -5], [4, 6, -4, 5], [-2, -4, 3, 2], [2, -7, -4, 6],
    [-3, 5, -4, -8], [4, 5, 4, -5], [1, -2, -2, 6], [0, 2, -4, 7],
    [1, -7, 12, -1], [3, 2, -2, -4], [2, -2, 3, -11], [-1, -2, 0, -4],
    [10, 0, -8, 9], [-1, -1, -8, 8], [6, 0, -3, 13], [0, -3, -3, 3],
    [0, 3, -9, -7], [-7, -10, 0, -4], [2, 1, 13, 5], [-8, 10, -1, 4],
    [5, -4, 7, 1], [6, 0, -8, 0], [8, -1, 4, -3], [-5, -5, -5, -3],
];
