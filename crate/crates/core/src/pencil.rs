//! Hankel pencil `[U1, U0]` and its accurate generalized eigen-solve.
//!
//! For data `s_k = sum_j c_j xi_j^k` the Hankel matrices factor as
//! `U0 = V C V^T` and `U1 = V C Z V^T`, so the nodes are the generalized
//! eigenvalues of `U1 - xi U0` and each weight is `c_j = u_j^T [s_0..s_{m-1}]`
//! for the right eigenvector `u_j` normalised by `V^T u_j = e_j`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, ZERO};
use crate::model::{ExponentialModel, SignalSeries, Term};

/// Singular values of `U0` below this fraction of the largest are treated as zero.
pub const RANK_TOLERANCE: f64 = 1e-12;

/// Eigenvector-to-Vandermonde alignment below which the eigenvector weights
/// are replaced by a joint least-squares fit.
pub const EIGENVECTOR_COSINE_FLOOR: f64 = 1e-8;

/// `|beta| / |T|` below which a generalized eigenvalue is reported as infinite.
pub(crate) const INFINITE_TOLERANCE: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct HankelPencil {
    pub u0: CMatrix,
    pub u1: CMatrix,
    pub n: usize,
}

impl HankelPencil {
    pub fn size(&self) -> usize {
        self.u0.nrows()
    }
}

/// Why an eigenpair was excluded from [`EigenSolution::pairs`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DropReason {
    /// The direction lies in the numerical null space of `U0`.
    RankDeficient,
    /// Infinite or indeterminate generalized eigenvalue.
    Infinite,
}

/// How the weights of a solution were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightMethod {
    Eigenvector,
    VandermondeFallback,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenSolution {
    pub pairs: Vec<Term>,
    /// Per pair: `|v^T u| / (|v| |u|)` between the eigenvector and the
    /// Vandermonde vector of its node. Small values flag ill conditioning.
    pub condition: Vec<f64>,
    pub dropped: Vec<DropReason>,
    pub weight_method: WeightMethod,
}

impl EigenSolution {
    pub fn nodes(&self) -> Vec<Complex64> {
        self.pairs.iter().map(|t| t.node).collect()
    }

    pub fn to_model(&self) -> ExponentialModel {
        ExponentialModel::from_terms_unmerged(self.pairs.clone())
    }
}

/// Builds `U0[i][j] = s_{i+j}` and `U1[i][j] = s_{i+j+1}` of size `n/2`.
pub fn build_pencil(series: &SignalSeries) -> Result<HankelPencil> {
    let n = series.len();
    if !n.is_multiple_of(2) {
        return Err(Error::OddLength(n));
    }
    let s = series.samples();
    let m = n / 2;
    Ok(HankelPencil {
        u0: CMatrix::from_fn(m, m, |i, j| s[i + j]),
        u1: CMatrix::from_fn(m, m, |i, j| s[i + j + 1]),
        n,
    })
}

/// Accurate generalized eigen-solve of the pencil.
///
/// A rank-revealing SVD of `U0` first restricts the problem to its numerical
/// range; the (possibly reduced) pencil is balanced and triangularised by QZ.
/// Directions in the null space of `U0` and infinite eigenvalues are
/// reported in `dropped`.
pub fn solve_pencil(pencil: &HankelPencil, series: &SignalSeries) -> EigenSolution {
    let m = pencil.size();
    let (u, sigma, v) = linalg::sorted_svd(&pencil.u0).unwrap_or_default();
    let smax = sigma.first().copied().unwrap_or(0.0);
    let rank = sigma.iter().take_while(|&&x| x > RANK_TOLERANCE * smax && x > 0.0).count();
    let mut dropped = vec![DropReason::RankDeficient; m - rank];

    if rank == 0 {
        return EigenSolution {
            pairs: Vec::new(),
            condition: Vec::new(),
            dropped,
            weight_method: WeightMethod::Eigenvector,
        };
    }

    // Either the full pencil or its restriction Ur^H (U1, U0) Vr.
    let (a, b, basis) = if rank == m {
        (pencil.u1.clone(), pencil.u0.clone(), None)
    } else {
        let ur = u.columns(0, rank).into_owned();
        let vr = v.columns(0, rank).into_owned();
        let a = ur.adjoint() * &pencil.u1 * &vr;
        let b = CMatrix::from_fn(rank, rank, |i, j| if i == j { Complex64::from(sigma[i]) } else { ZERO });
        (a, b, Some(vr))
    };

    let (ab, bb, right_scale) = linalg::balance(&a, &b);
    let Some(schur) = linalg::qz(&ab, &bb) else {
        dropped.extend(std::iter::repeat_n(DropReason::Infinite, rank));
        return EigenSolution {
            pairs: Vec::new(),
            condition: Vec::new(),
            dropped,
            weight_method: WeightMethod::Eigenvector,
        };
    };
    let mut vectors = linalg::right_eigenvectors(&schur);
    for (i, f) in right_scale.iter().enumerate() {
        vectors.row_mut(i).scale_mut(*f);
    }
    if let Some(vr) = basis {
        vectors = vr * vectors;
    }

    let t_norm = schur.t.norm();
    let data = &series.samples()[..m];
    let mut nodes = Vec::with_capacity(rank);
    let mut weights = Vec::with_capacity(rank);
    let mut condition = Vec::with_capacity(rank);
    for (j, (alpha, beta)) in schur.diagonal().into_iter().enumerate() {
        if beta.norm() <= INFINITE_TOLERANCE * t_norm {
            dropped.push(DropReason::Infinite);
            continue;
        }
        let node = alpha / beta;
        if !(node.re.is_finite() && node.im.is_finite()) {
            dropped.push(DropReason::Infinite);
            continue;
        }
        let u = vectors.column(j);
        // Normalise so that sum_k node^k u_k = 1.
        let mut power = Complex64::from(1.0);
        let mut vt_u = ZERO;
        let mut v_norm_sq = 0.0;
        let mut c = ZERO;
        for k in 0..m {
            vt_u += power * u[k];
            c += u[k] * data[k];
            v_norm_sq += power.norm_sqr();
            power *= node;
        }
        let cosine = vt_u.norm() / (v_norm_sq.sqrt() * u.norm());
        nodes.push(node);
        weights.push(if vt_u.norm() > 0.0 { c / vt_u } else { ZERO });
        condition.push(if cosine.is_finite() { cosine } else { 0.0 });
    }

    let mut weight_method = WeightMethod::Eigenvector;
    if condition.iter().any(|&c| c < EIGENVECTOR_COSINE_FLOOR) || weights.iter().any(|w| !w.re.is_finite() || !w.im.is_finite()) {
        let powers: Vec<usize> = (0..series.len()).collect();
        let vmat = linalg::vandermonde(&nodes, &powers);
        weights = linalg::lstsq_svd(&vmat, series.samples());
        weight_method = WeightMethod::VandermondeFallback;
    }

    EigenSolution {
        pairs: nodes.into_iter().zip(weights).map(|(n, w)| Term::new(w, n)).collect(),
        condition,
        dropped,
        weight_method,
    }
}

/// Finite generalized eigenvalues of several Hankel pencils stacked row-wise.
///
/// Every segment contributes `m` rows of `U0` and `U1` with `m` half the
/// shortest segment length. The rectangular pencil is restricted to the
/// numerical range of the stacked `U0`, which leaves a square problem with
/// the nodes shared by all segments.
pub fn stacked_pencil_nodes(segments: &[&[Complex64]]) -> Result<Vec<Complex64>> {
    let shortest = segments.iter().map(|s| s.len()).min().unwrap_or(0);
    let m = shortest / 2;
    if m == 0 {
        return Err(Error::InsufficientData { order: 1, needed: 2, got: shortest });
    }
    let rows = m * segments.len();
    let entry = |i: usize, j: usize, shift: usize| segments[i / m][i % m + j + shift];
    let u0 = CMatrix::from_fn(rows, m, |i, j| entry(i, j, 0));
    let u1 = CMatrix::from_fn(rows, m, |i, j| entry(i, j, 1));

    let (u, sigma, v) = linalg::sorted_svd(&u0).ok_or(Error::EmptyBase)?;
    let smax = sigma.first().copied().unwrap_or(0.0);
    let rank = sigma.iter().take_while(|&&x| x > RANK_TOLERANCE * smax && x > 0.0).count();
    if rank == 0 {
        return Ok(Vec::new());
    }
    let ur = u.columns(0, rank).into_owned();
    let vr = v.columns(0, rank).into_owned();
    let a = ur.adjoint() * &u1 * &vr;
    let b = CMatrix::from_fn(rank, rank, |i, j| if i == j { Complex64::from(sigma[i]) } else { ZERO });
    let (ab, bb, _) = linalg::balance(&a, &b);
    let schur = linalg::qz(&ab, &bb).ok_or(Error::EmptyBase)?;
    let t_norm = schur.t.norm();
    Ok(schur
        .diagonal()
        .into_iter()
        .filter(|(_, beta)| beta.norm() > INFINITE_TOLERANCE * t_norm)
        .map(|(alpha, beta)| alpha / beta)
        .filter(|z| z.re.is_finite() && z.im.is_finite())
        .collect())
}

/// Keeps the `p_tilde` pairs with the largest `|c|`, ordered by decreasing
/// `|c|`; ties keep the earlier index. Asking for more pairs than available
/// returns all of them.
pub fn truncate_by_weight(sol: &EigenSolution, p_tilde: usize) -> EigenSolution {
    let mut order: Vec<usize> = (0..sol.pairs.len()).collect();
    order.sort_by(|&i, &j| sol.pairs[j].weight.norm().total_cmp(&sol.pairs[i].weight.norm()));
    order.truncate(p_tilde);
    EigenSolution {
        pairs: order.iter().map(|&i| sol.pairs[i]).collect(),
        condition: order.iter().map(|&i| sol.condition[i]).collect(),
        dropped: sol.dropped.clone(),
        weight_method: sol.weight_method,
    }
}

/// Pencil build, accurate solve and truncation in one call.
pub fn accurate_solution(series: &SignalSeries, p_tilde: usize) -> Result<EigenSolution> {
    let pencil = build_pencil(series)?;
    Ok(truncate_by_weight(&solve_pencil(&pencil, series), p_tilde))
}
