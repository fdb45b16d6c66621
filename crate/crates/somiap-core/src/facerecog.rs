//! Face recognizers over a labeled gallery: PCA subspace (Eigen), PCA+LDA
//! subspace (Fisher) and local-binary-pattern histograms (LBPH), plus the
//! crop/resize/equalize normalization that feeds them.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::config::RecognizerPolicy;
use crate::error::{contract, Result};
use crate::imaging::{resize_bilinear, GrayImage, Rect};
use crate::numerics::{generalized_symmetric_eig, jacobi_eigh, Matrix};

/// One labeled training face at the gallery's canonical size.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceSample {
    pub label: String,
    pub image: GrayImage,
}

/// A labeled face gallery; all samples share one size.
#[derive(Debug, Clone, PartialEq)]
pub struct Gallery {
    samples: Vec<FaceSample>,
    labels: Vec<String>,
    width: u32,
    height: u32,
}

impl Gallery {
    pub fn new(samples: Vec<FaceSample>) -> Result<Self> {
        let first = samples
            .first()
            .ok_or_else(|| contract("gallery requires at least one sample"))?;
        let (width, height) = (first.image.width(), first.image.height());
        let mut labels: Vec<String> = Vec::new();
        for s in &samples {
            if s.image.width() != width || s.image.height() != height {
                return Err(contract("all gallery samples must share one size"));
            }
            if !labels.contains(&s.label) {
                labels.push(s.label.clone());
            }
        }
        Ok(Gallery {
            samples,
            labels,
            width,
            height,
        })
    }

    pub fn samples(&self) -> &[FaceSample] {
        &self.samples
    }

    /// Distinct labels in first-seen order.
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn size(&self) -> (u32, u32) {
        (self.width, self.height)
    }
}

/// PCA subspace model.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenModel {
    pub width: u32,
    pub height: u32,
    pub mean: Vec<f64>,
    /// d x k column-orthonormal basis (k may be 0 for a degenerate gallery).
    pub components: Matrix,
    pub projections: Vec<Vec<f64>>,
    pub labels: Vec<String>,
}

/// Combined PCA+LDA subspace model.
#[derive(Debug, Clone, PartialEq)]
pub struct FisherModel {
    pub width: u32,
    pub height: u32,
    pub mean: Vec<f64>,
    /// d x (c-1) combined projection (PCA then discriminant directions).
    pub projection: Matrix,
    pub projections: Vec<Vec<f64>>,
    pub labels: Vec<String>,
}

/// Per-sample concatenated cell histograms of LBP codes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LbphModel {
    pub width: u32,
    pub height: u32,
    pub grid: (u32, u32),
    pub histograms: Vec<Vec<u32>>,
    pub labels: Vec<String>,
}

/// A trained recognizer of any flavor.
#[derive(Debug, Clone, PartialEq)]
pub enum FaceModel {
    Eigen(EigenModel),
    Fisher(FisherModel),
    Lbph(LbphModel),
}

/// Nearest-sample answer; `label` is `None` when the distance exceeds the
/// cutoff (UNKNOWN).
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub label: Option<String>,
    pub distance: f64,
    /// The unknown-cutoff in force; `None` means infinity.
    pub threshold_applied: Option<f64>,
}

/// A resolved training algorithm (no `Auto`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrainAlgo {
    Eigen,
    Fisher,
    Lbph,
}

impl TrainAlgo {
    pub fn tag(&self) -> &'static str {
        match self {
            TrainAlgo::Eigen => "eigen",
            TrainAlgo::Fisher => "fisher",
            TrainAlgo::Lbph => "lbph",
        }
    }
}

/// Crop `rect`, resize to the canonical size and histogram-equalize.
pub fn normalize_face(img: &GrayImage, rect: Rect, canonical: (u32, u32)) -> Result<GrayImage> {
    let cropped = img.crop(rect)?;
    let resized = resize_bilinear(&cropped, canonical.0, canonical.1);
    Ok(equalize(&resized))
}

/// Cumulative-histogram remap: v -> round((cdf(v) - cdfmin) / (N - cdfmin) * 255).
///
/// A single-intensity image maps to itself (the formula degenerates to 0/0).
fn equalize(img: &GrayImage) -> GrayImage {
    let mut hist = [0u64; 256];
    for &v in img.data() {
        hist[v as usize] += 1;
    }
    let total = img.data().len() as u64;
    let mut cdf = [0u64; 256];
    let mut acc = 0u64;
    let mut cdf_min = 0u64;
    let mut seen_first = false;
    for v in 0..256 {
        acc += hist[v];
        cdf[v] = acc;
        if !seen_first && hist[v] > 0 {
            cdf_min = acc;
            seen_first = true;
        }
    }
    if cdf_min == total {
        return img.clone();
    }
    let mut lut = [0u8; 256];
    let denom = (total - cdf_min) as f64;
    for v in 0..256 {
        if hist[v] > 0 {
            lut[v] = crate::imaging::round_to_u8((cdf[v] - cdf_min) as f64 / denom * 255.0);
        }
    }
    GrayImage::from_fn(img.width(), img.height(), |x, y| {
        lut[img.pixel(x, y) as usize]
    })
}

fn image_vector(img: &GrayImage) -> Vec<f64> {
    img.data().iter().map(|&v| v as f64).collect()
}

/// Eigenvalues of the N x N Gram matrix mapped back to image space.
/// Returns (mean, centered sample vectors, unit components, eigenvalues).
fn gram_pca(g: &Gallery, max_components: usize) -> (Vec<f64>, Vec<Vec<f64>>, Matrix, Vec<f64>) {
    let n = g.samples.len();
    let d = (g.width * g.height) as usize;
    let vectors: Vec<Vec<f64>> = g.samples.iter().map(|s| image_vector(&s.image)).collect();
    let mut mean = vec![0.0f64; d];
    for v in &vectors {
        for (m, x) in mean.iter_mut().zip(v) {
            *m += x;
        }
    }
    for m in mean.iter_mut() {
        *m /= n as f64;
    }
    let centered: Vec<Vec<f64>> = vectors
        .iter()
        .map(|v| v.iter().zip(&mean).map(|(x, m)| x - m).collect())
        .collect();

    let mut gram = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let dot: f64 = centered[i].iter().zip(&centered[j]).map(|(a, b)| a * b).sum();
            gram.set(i, j, dot);
        }
    }
    let eig = jacobi_eigh(&gram).expect("gram matrix is symmetric");
    let lambda_max = eig.values.first().copied().unwrap_or(0.0);
    let cutoff = lambda_max.max(0.0) * 1e-10;
    let mut kept = 0usize;
    for &l in &eig.values {
        if kept >= max_components || l <= cutoff || l <= 0.0 {
            break;
        }
        kept += 1;
    }

    let mut components = Matrix::zeros(d, kept);
    for c in 0..kept {
        let inv = 1.0 / libm::sqrt(eig.values[c]);
        for r in 0..d {
            let mut acc = 0.0;
            for (i, cv) in centered.iter().enumerate() {
                acc += cv[r] * eig.vectors.get(i, c);
            }
            components.set(r, c, acc * inv);
        }
    }
    (mean, centered, components, eig.values[..kept].to_vec())
}

fn project(basis: &Matrix, centered: &[f64]) -> Vec<f64> {
    let k = basis.cols();
    let mut out = vec![0.0f64; k];
    for c in 0..k {
        let mut acc = 0.0;
        for r in 0..basis.rows() {
            acc += basis.get(r, c) * centered[r];
        }
        out[c] = acc;
    }
    out
}

/// Trains the PCA recognizer with `k` components (the gallery rank may keep
/// fewer; a zero-variance gallery keeps none).
pub fn train_eigen(g: &Gallery, k: usize) -> Result<EigenModel> {
    let n = g.samples.len();
    if k < 1 || k > n.saturating_sub(1) {
        return Err(contract("component count must be in 1..=samples-1"));
    }
    let (mean, centered, components, _) = gram_pca(g, k);
    let projections: Vec<Vec<f64>> = centered.iter().map(|c| project(&components, c)).collect();
    Ok(EigenModel {
        width: g.width,
        height: g.height,
        mean,
        components,
        projections,
        labels: g.samples.iter().map(|s| s.label.clone()).collect(),
    })
}

/// Trains the PCA+LDA recognizer; keeps `classes - 1` discriminant columns.
pub fn train_fisher(g: &Gallery) -> Result<FisherModel> {
    let n = g.samples.len();
    let c = g.labels.len();
    if c < 2 {
        return Err(contract("discriminant training requires at least 2 classes"));
    }
    if n <= c {
        return Err(contract("discriminant training requires more samples than classes"));
    }
    let (mean, centered, pca, _) = gram_pca(g, n - c);
    let k = pca.cols();
    if k == 0 {
        return Err(contract("gallery has no variance to discriminate"));
    }

    // samples in PCA space
    let z: Vec<Vec<f64>> = centered.iter().map(|cv| project(&pca, cv)).collect();

    // per-class means (global mean in PCA space is zero)
    let mut class_means: Vec<Vec<f64>> = Vec::with_capacity(c);
    let mut class_counts: Vec<usize> = Vec::with_capacity(c);
    for label in &g.labels {
        let members: Vec<&Vec<f64>> = g
            .samples
            .iter()
            .zip(&z)
            .filter(|(s, _)| &s.label == label)
            .map(|(_, zi)| zi)
            .collect();
        let mut m = vec![0.0f64; k];
        for zi in &members {
            for (a, b) in m.iter_mut().zip(zi.iter()) {
                *a += b;
            }
        }
        for a in m.iter_mut() {
            *a /= members.len() as f64;
        }
        class_means.push(m);
        class_counts.push(members.len());
    }

    let mut sb = Matrix::zeros(k, k);
    for (m, &count) in class_means.iter().zip(&class_counts) {
        for r in 0..k {
            for q in 0..k {
                sb.set(r, q, sb.get(r, q) + count as f64 * m[r] * m[q]);
            }
        }
    }
    let mut sw = Matrix::zeros(k, k);
    for (s, zi) in g.samples.iter().zip(&z) {
        let ci = g.labels.iter().position(|l| l == &s.label).unwrap();
        let m = &class_means[ci];
        for r in 0..k {
            for q in 0..k {
                sw.set(r, q, sw.get(r, q) + (zi[r] - m[r]) * (zi[q] - m[q]));
            }
        }
    }

    let eig = generalized_symmetric_eig(&sb, &sw)?;
    let cols = (c - 1).min(k);
    let mut lda = Matrix::zeros(k, cols);
    for col in 0..cols {
        for r in 0..k {
            lda.set(r, col, eig.vectors.get(r, col));
        }
    }
    let projection = pca.mul(&lda);
    let projections: Vec<Vec<f64>> = centered.iter().map(|cv| project(&projection, cv)).collect();
    Ok(FisherModel {
        width: g.width,
        height: g.height,
        mean,
        projection,
        projections,
        labels: g.samples.iter().map(|s| s.label.clone()).collect(),
    })
}

/// Neighbor offsets clockwise from the top-left, matching the code bit order
/// (first offset = most significant bit).
const LBP_OFFSETS: [(i64, i64); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
];

/// 8-neighbor LBP code image; bit k is set iff the k-th clockwise neighbor
/// (starting top-left) is >= the center. Border pixels get code 0.
pub fn lbp_image(img: &GrayImage) -> Result<GrayImage> {
    if img.width() < 3 || img.height() < 3 {
        return Err(contract("lbp requires at least a 3x3 image"));
    }
    Ok(GrayImage::from_fn(img.width(), img.height(), |x, y| {
        if x == 0 || y == 0 || x == img.width() - 1 || y == img.height() - 1 {
            return 0;
        }
        let center = img.pixel(x, y);
        let mut code = 0u8;
        for (k, (dx, dy)) in LBP_OFFSETS.iter().enumerate() {
            let v = img.pixel((x as i64 + dx) as u32, (y as i64 + dy) as u32);
            if v >= center {
                code |= 0x80 >> k;
            }
        }
        code
    }))
}

/// Trains the LBPH recognizer over a `grid.0 x grid.1` cell layout.
pub fn train_lbph(g: &Gallery, grid: (u32, u32)) -> Result<LbphModel> {
    let (gx, gy) = grid;
    if gx == 0 || gy == 0 || g.width % gx != 0 || g.height % gy != 0 {
        return Err(contract("canonical size must be divisible by the cell grid"));
    }
    let mut histograms = Vec::with_capacity(g.samples.len());
    for s in &g.samples {
        histograms.push(lbph_histogram(&s.image, grid)?);
    }
    Ok(LbphModel {
        width: g.width,
        height: g.height,
        grid,
        histograms,
        labels: g.samples.iter().map(|s| s.label.clone()).collect(),
    })
}

/// Concatenated 256-bin cell histograms of the LBP code image, cells in
/// row-major order.
pub fn lbph_histogram(img: &GrayImage, grid: (u32, u32)) -> Result<Vec<u32>> {
    let codes = lbp_image(img)?;
    let (gx, gy) = grid;
    let (cw, ch) = (img.width() / gx, img.height() / gy);
    let mut hist = vec![0u32; gx as usize * gy as usize * 256];
    for cy in 0..gy {
        for cx in 0..gx {
            let base = ((cy * gx + cx) as usize) * 256;
            for y in cy * ch..(cy + 1) * ch {
                for x in cx * cw..(cx + 1) * cw {
                    hist[base + codes.pixel(x, y) as usize] += 1;
                }
            }
        }
    }
    Ok(hist)
}

fn chi_square(a: &[u32], b: &[u32]) -> f64 {
    let mut acc = 0.0f64;
    for (&x, &y) in a.iter().zip(b) {
        let sum = x as u64 + y as u64;
        if sum > 0 {
            let diff = x as f64 - y as f64;
            acc += diff * diff / sum as f64;
        }
    }
    acc
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    libm::sqrt(
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>(),
    )
}

fn nearest(distances: impl Iterator<Item = f64>) -> (usize, f64) {
    let mut best = (0usize, f64::INFINITY);
    for (i, d) in distances.enumerate() {
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

impl FaceModel {
    pub fn algo(&self) -> TrainAlgo {
        match self {
            FaceModel::Eigen(_) => TrainAlgo::Eigen,
            FaceModel::Fisher(_) => TrainAlgo::Fisher,
            FaceModel::Lbph(_) => TrainAlgo::Lbph,
        }
    }

    pub fn face_size(&self) -> (u32, u32) {
        match self {
            FaceModel::Eigen(m) => (m.width, m.height),
            FaceModel::Fisher(m) => (m.width, m.height),
            FaceModel::Lbph(m) => (m.width, m.height),
        }
    }

    pub fn sample_labels(&self) -> &[String] {
        match self {
            FaceModel::Eigen(m) => &m.labels,
            FaceModel::Fisher(m) => &m.labels,
            FaceModel::Lbph(m) => &m.labels,
        }
    }

    /// Nearest-sample prediction; `cutoff = None` means always answer.
    ///
    /// Subspace models project the centered query and use Euclidean distance,
    /// LBPH uses chi-square over concatenated histograms. Ties keep the
    /// earliest sample.
    pub fn predict(&self, face: &GrayImage, cutoff: Option<f64>) -> Result<Prediction> {
        let (w, h) = self.face_size();
        if face.width() != w || face.height() != h {
            return Err(contract("query face must be at the model's canonical size"));
        }
        let (idx, distance) = match self {
            FaceModel::Eigen(m) => {
                let centered: Vec<f64> = image_vector(face)
                    .iter()
                    .zip(&m.mean)
                    .map(|(x, mu)| x - mu)
                    .collect();
                let p = project(&m.components, &centered);
                nearest(m.projections.iter().map(|q| euclidean(&p, q)))
            }
            FaceModel::Fisher(m) => {
                let centered: Vec<f64> = image_vector(face)
                    .iter()
                    .zip(&m.mean)
                    .map(|(x, mu)| x - mu)
                    .collect();
                let p = project(&m.projection, &centered);
                nearest(m.projections.iter().map(|q| euclidean(&p, q)))
            }
            FaceModel::Lbph(m) => {
                let hist = lbph_histogram(face, m.grid)?;
                nearest(m.histograms.iter().map(|q| chi_square(&hist, q)))
            }
        };
        let label = match cutoff {
            Some(t) if distance > t => None,
            _ => Some(self.sample_labels()[idx].clone()),
        };
        Ok(Prediction {
            label,
            distance,
            threshold_applied: cutoff,
        })
    }
}

/// Resolves a policy into a concrete algorithm.
///
/// `Auto` picks Fisher when any class's sample mean intensities have a
/// standard deviation above `illumination_std_threshold` gray levels
/// (strong per-identity illumination variation), LBPH otherwise.
pub fn select_recognizer(
    g: &Gallery,
    policy: RecognizerPolicy,
    illumination_std_threshold: f64,
) -> TrainAlgo {
    match policy {
        RecognizerPolicy::Eigen => TrainAlgo::Eigen,
        RecognizerPolicy::Fisher => TrainAlgo::Fisher,
        RecognizerPolicy::Lbph => TrainAlgo::Lbph,
        RecognizerPolicy::Auto => {
            let mut worst = 0.0f64;
            for label in &g.labels {
                let means: Vec<f64> = g
                    .samples
                    .iter()
                    .filter(|s| &s.label == label)
                    .map(|s| {
                        s.image.data().iter().map(|&v| v as f64).sum::<f64>()
                            / s.image.data().len() as f64
                    })
                    .collect();
                let mu = means.iter().sum::<f64>() / means.len() as f64;
                let var =
                    means.iter().map(|m| (m - mu) * (m - mu)).sum::<f64>() / means.len() as f64;
                worst = worst.max(libm::sqrt(var));
            }
            if worst > illumination_std_threshold {
                TrainAlgo::Fisher
            } else {
                TrainAlgo::Lbph
            }
        }
    }
}

/// Trains the requested recognizer (Eigen keeps `samples - 1` components).
pub fn train_model(g: &Gallery, algo: TrainAlgo, grid: (u32, u32)) -> Result<FaceModel> {
    match algo {
        TrainAlgo::Eigen => {
            let k = g.samples.len().saturating_sub(1).max(1);
            Ok(FaceModel::Eigen(train_eigen(g, k)?))
        }
        TrainAlgo::Fisher => Ok(FaceModel::Fisher(train_fisher(g)?)),
        TrainAlgo::Lbph => Ok(FaceModel::Lbph(train_lbph(g, grid)?)),
    }
}
