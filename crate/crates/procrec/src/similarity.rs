//! Similarity between project contexts via principal component analysis.
//!
//! The context matrix is mean-centered (no variance scaling — the variables
//! are binary and constant columns would make z-scores divide by zero) and
//! the covariance matrix, with the n−1 denominator, is diagonalized with
//! cyclic Jacobi rotations. Projects are ranked by Euclidean distance in the
//! retained component space.
//!
//! Determinism matters here: two fits of the same matrix — in any row order —
//! produce bit-identical models. Rows are sorted by game name before any
//! arithmetic, Jacobi sweeps run in a fixed order, and each eigenvector's
//! sign is fixed by making its largest-magnitude entry positive (ties by
//! lowest index).

use serde::Serialize;

use crate::context::{ContextMatrix, ContextVector};
use crate::error::{Error, Result};

const JACOBI_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;
const EIGENVALUE_CLAMP: f64 = -1e-9;

/// A fitted PCA model: column means, all eigenvalues (descending), the
/// retained eigenvector columns, and per-game scores.
///
/// `eigenvalues` always covers the full spectrum so that trace bookkeeping
/// holds even when fewer components are retained.
#[derive(Clone, Debug, PartialEq)]
pub struct PcaModel {
    mean: Vec<f64>,
    eigenvalues: Vec<f64>,
    /// `components[j]` is the j-th retained eigenvector, length = dimension.
    components: Vec<Vec<f64>>,
    /// Per-game coordinates in component space, sorted by game name.
    scores: Vec<(String, Vec<f64>)>,
}

impl PcaModel {
    pub fn dimension(&self) -> usize {
        self.mean.len()
    }

    pub fn retained(&self) -> usize {
        self.components.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// All eigenvalues, descending; their sum equals the covariance trace.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.components
    }

    /// `(game, coordinates)` pairs in game-name order.
    pub fn scores(&self) -> &[(String, Vec<f64>)] {
        &self.scores
    }

    pub fn score_of(&self, game: &str) -> Option<&[f64]> {
        self.scores
            .iter()
            .find(|(name, _)| name == game)
            .map(|(_, coords)| coords.as_slice())
    }

    pub fn contains_game(&self, game: &str) -> bool {
        self.score_of(game).is_some()
    }
}

/// One ranked neighbor: a project and its distance to the target.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Neighbor {
    pub game: String,
    pub distance: f64,
}

/// Projects ranked by ascending distance to a target context. The target
/// itself never appears; ties are broken by ascending game name.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimilarityRanking {
    pub target: String,
    pub neighbors: Vec<Neighbor>,
}

impl SimilarityRanking {
    pub fn neighbor_names(&self) -> Vec<&str> {
        self.neighbors.iter().map(|n| n.game.as_str()).collect()
    }

    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }
}

/// Fits a PCA model over the context matrix, keeping `retained` components.
///
/// Needs at least two rows (covariance is undefined below that) and
/// `1 <= retained <= column count`. Components beyond the matrix rank carry
/// zero eigenvalues and zero scores; asking for them is allowed so that a
/// two-component biplot works on any matrix.
pub fn fit_pca(matrix: &ContextMatrix, retained: usize) -> Result<PcaModel> {
    let n = matrix.len();
    if n < 2 {
        return Err(Error::TooFewRows { rows: n });
    }
    let dim = matrix.rows()[0].values().len();
    if retained < 1 || retained > dim {
        return Err(Error::BadComponentCount {
            requested: retained,
            max: dim,
        });
    }

    // Row order must not leak into the arithmetic: sort by game name first.
    let mut rows: Vec<&ContextVector> = matrix.rows().iter().collect();
    rows.sort_by(|a, b| a.game.cmp(&b.game));
    let data: Vec<Vec<f64>> = rows.iter().map(|r| r.as_reals()).collect();

    let mean = column_means(&data);
    let centered: Vec<Vec<f64>> = data
        .iter()
        .map(|row| row.iter().zip(&mean).map(|(x, m)| x - m).collect())
        .collect();
    let cov = covariance(&centered);

    let (mut eigenvalues, mut vectors) = jacobi_eigen(&cov);
    sort_eigenpairs(&mut eigenvalues, &mut vectors);
    for value in &mut eigenvalues {
        if *value < EIGENVALUE_CLAMP {
            return Err(Error::Internal(format!(
                "covariance eigenvalue {value} below {EIGENVALUE_CLAMP}"
            )));
        }
        if *value < 0.0 {
            *value = 0.0;
        }
    }
    for column in &mut vectors {
        fix_sign(column);
    }

    let components: Vec<Vec<f64>> = vectors.into_iter().take(retained).collect();
    let scores = rows
        .iter()
        .zip(&centered)
        .map(|(row, centered_row)| {
            let coords = components
                .iter()
                .enumerate()
                .map(|(j, comp)| {
                    if eigenvalues[j] == 0.0 {
                        // no variance along this axis; the exact score is 0
                        0.0
                    } else {
                        dot(centered_row, comp)
                    }
                })
                .collect();
            (row.game.clone(), coords)
        })
        .collect();

    Ok(PcaModel {
        mean,
        eigenvalues,
        components,
        scores,
    })
}

/// Coordinates of a context in the model's component space: `(x − mean) · V`.
pub fn project(model: &PcaModel, vector: &ContextVector) -> Result<Vec<f64>> {
    let x = vector.as_reals();
    if x.len() != model.dimension() {
        return Err(Error::DimensionMismatch {
            expected: model.dimension(),
            got: x.len(),
        });
    }
    let centered: Vec<f64> = x.iter().zip(&model.mean).map(|(v, m)| v - m).collect();
    Ok(model.components.iter().map(|c| dot(&centered, c)).collect())
}

/// The `k` projects closest to `target` in score space.
///
/// If the target's game name is part of the model, its stored score is used
/// and it is excluded from the candidates (fit-inclusive mode); otherwise the
/// vector is projected into the existing space.
pub fn find_similar(model: &PcaModel, target: &ContextVector, k: usize) -> Result<SimilarityRanking> {
    if k == 0 {
        return Err(Error::Internal("neighbor count k must be >= 1".into()));
    }
    let mut ranking = rank_all(model, target)?;
    ranking.neighbors.truncate(k);
    Ok(ranking)
}

/// All projects within `threshold` of `target`, closest first. May be empty.
pub fn find_within_threshold(
    model: &PcaModel,
    target: &ContextVector,
    threshold: f64,
) -> Result<SimilarityRanking> {
    // also catches NaN, which compares false either way
    if threshold.is_nan() || threshold < 0.0 {
        return Err(Error::Internal(format!(
            "distance threshold must be >= 0, got {threshold}"
        )));
    }
    let mut ranking = rank_all(model, target)?;
    ranking.neighbors.retain(|n| n.distance <= threshold);
    Ok(ranking)
}

fn rank_all(model: &PcaModel, target: &ContextVector) -> Result<SimilarityRanking> {
    let target_coords: Vec<f64> = match model.score_of(&target.game) {
        Some(stored) => stored.to_vec(),
        None => project(model, target)?,
    };
    let mut neighbors: Vec<Neighbor> = model
        .scores
        .iter()
        .filter(|(game, _)| *game != target.game)
        .map(|(game, coords)| Neighbor {
            game: game.clone(),
            distance: euclidean(coords, &target_coords),
        })
        .collect();
    if neighbors.is_empty() {
        return Err(Error::NoCandidates);
    }
    neighbors.sort_by(|a, b| {
        a.distance
            .total_cmp(&b.distance)
            .then_with(|| a.game.cmp(&b.game))
    });
    Ok(SimilarityRanking {
        target: target.game.clone(),
        neighbors,
    })
}

/// Scores and variable loadings for the first two components as sectioned
/// CSV text: `#scores` with `game,pc1,pc2` rows, then `#loadings` with
/// `variable,pc1,pc2` rows. Values carry 9 significant digits.
pub fn export_biplot(model: &PcaModel) -> Result<String> {
    if model.retained() < 2 {
        return Err(Error::TooFewComponents {
            retained: model.retained(),
        });
    }
    let mut out = String::new();
    out.push_str("#scores\n");
    out.push_str("game,pc1,pc2\n");
    for (game, coords) in &model.scores {
        out.push_str(&format!(
            "{},{},{}\n",
            csv_field(game),
            sig9(coords[0]),
            sig9(coords[1])
        ));
    }
    out.push_str("#loadings\n");
    out.push_str("variable,pc1,pc2\n");
    for i in 0..model.dimension() {
        out.push_str(&format!(
            "v{:02},{},{}\n",
            i + 1,
            sig9(model.components[0][i]),
            sig9(model.components[1][i])
        ));
    }
    Ok(out)
}

/// 9 significant digits, `-0.0` folded into `0.0`.
fn sig9(value: f64) -> String {
    let v = if value == 0.0 { 0.0 } else { value };
    format!("{v:.8e}")
}

fn csv_field(raw: &str) -> String {
    if raw.contains(',') || raw.contains('"') || raw.contains('\n') {
        format!("\"{}\"", raw.replace('"', "\"\""))
    } else {
        raw.to_string()
    }
}

fn column_means(data: &[Vec<f64>]) -> Vec<f64> {
    let n = data.len() as f64;
    let dim = data[0].len();
    let mut mean = vec![0.0; dim];
    for row in data {
        for (m, x) in mean.iter_mut().zip(row) {
            *m += x;
        }
    }
    for m in &mut mean {
        *m /= n;
    }
    mean
}

/// Sample covariance of already centered rows (n−1 denominator), computed on
/// the upper triangle and mirrored so the matrix is exactly symmetric.
fn covariance(centered: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = centered.len();
    let dim = centered[0].len();
    let denom = (n - 1) as f64;
    let mut cov = vec![vec![0.0; dim]; dim];
    for j in 0..dim {
        for l in j..dim {
            let mut sum = 0.0;
            for row in centered {
                sum += row[j] * row[l];
            }
            let value = sum / denom;
            cov[j][l] = value;
            cov[l][j] = value;
        }
    }
    cov
}

/// Cyclic Jacobi diagonalization of a symmetric matrix. Returns the
/// unordered eigenvalues and eigenvector columns.
fn jacobi_eigen(matrix: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = matrix.len();
    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }

    for _sweep in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&a) < JACOBI_TOL {
            break;
        }
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                // symmetric Schur rotation zeroing a[p][q]
                let tau = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                for i in 0..n {
                    let aip = a[i][p];
                    let aiq = a[i][q];
                    a[i][p] = c * aip - s * aiq;
                    a[i][q] = s * aip + c * aiq;
                }
                for j in 0..n {
                    let apj = a[p][j];
                    let aqj = a[q][j];
                    a[p][j] = c * apj - s * aqj;
                    a[q][j] = s * apj + c * aqj;
                }
                a[p][q] = 0.0;
                a[q][p] = 0.0;

                for row in v.iter_mut() {
                    let vip = row[p];
                    let viq = row[q];
                    row[p] = c * vip - s * viq;
                    row[q] = s * vip + c * viq;
                }
            }
        }
    }

    let eigenvalues: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    // transpose the accumulated rotation so each entry is one eigenvector
    let vectors: Vec<Vec<f64>> = (0..n).map(|j| (0..n).map(|i| v[i][j]).collect()).collect();
    (eigenvalues, vectors)
}

fn off_diagonal_norm(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += a[i][j] * a[i][j];
            }
        }
    }
    sum.sqrt()
}

/// Stable descending sort of (eigenvalue, eigenvector) pairs.
fn sort_eigenpairs(values: &mut Vec<f64>, vectors: &mut Vec<Vec<f64>>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]));
    *values = order.iter().map(|&i| values[i]).collect();
    *vectors = order.iter().map(|&i| vectors[i].clone()).collect();
}

/// Makes the largest-magnitude entry positive; ties pick the lowest index.
fn fix_sign(column: &mut [f64]) {
    let mut best = 0;
    for (i, value) in column.iter().enumerate() {
        if value.abs() > column[best].abs() {
            best = i;
        }
    }
    if column[best] < 0.0 {
        for value in column.iter_mut() {
            *value = -*value;
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
