//! Approximate condensed density of the pencil eigenvalues.
//!
//! For a noiseless signal `s` observed with noise `sigma`, the density of
//! the generalized eigenvalues of `[U1(a), U0(a)]` is approximated by
//! `(1/2pi n) Laplacian sum_j log mu_j(z)`, where `mu_j(z)` are the
//! eigenvalues of `M(z) = B Bᴴ + (n sigma^2 / 2) A(z)` with
//! `B = U1(s) - z U0(s)` and `A(z)` tridiagonal.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, CMatrix};
use crate::model::ExponentialModel;
use crate::ptransform::map_indexed;

/// Uniform rectangular grid. Values are stored row by row, `y` outer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lattice {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl Lattice {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64, nx: usize, ny: usize) -> Result<Self> {
        if nx < 3 || ny < 3 {
            return Err(Error::InvalidParameter(format!("lattice needs at least 3x3 points, got {nx}x{ny}")));
        }
        if !(x_min < x_max && y_min < y_max) || ![x_min, x_max, y_min, y_max].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter("lattice bounds must be finite and increasing".into()));
        }
        Ok(Self { x_min, x_max, y_min, y_max, nx, ny })
    }

    /// Square lattice `[-half, half]^2` with `points` per side.
    pub fn centered(half: f64, points: usize) -> Result<Self> {
        Self::new(-half, half, -half, half, points, points)
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64
    }

    pub fn dy(&self) -> f64 {
        (self.y_max - self.y_min) / (self.ny - 1) as f64
    }

    pub fn point(&self, ix: usize, iy: usize) -> Complex64 {
        Complex64::new(self.x_min + ix as f64 * self.dx(), self.y_min + iy as f64 * self.dy())
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMap {
    pub lattice: Lattice,
    /// `ny` rows of `nx` values; the outer ring is zero.
    pub values: Vec<f64>,
    pub total_mass: f64,
}

impl DensityMap {
    pub fn value(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.lattice.nx + ix]
    }

    /// Lattice point holding the largest value.
    pub fn argmax(&self) -> Complex64 {
        let (idx, _) = self
            .values
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best });
        self.lattice.point(idx % self.lattice.nx, idx / self.lattice.nx)
    }

    /// Mass inside the closed annulus `r_lo <= |z| <= r_hi`.
    pub fn annulus_mass(&self, r_lo: f64, r_hi: f64) -> f64 {
        let cell = self.lattice.dx() * self.lattice.dy();
        self.cells()
            .filter(|(z, _)| (r_lo..=r_hi).contains(&z.norm()))
            .map(|(_, v)| v * cell)
            .sum()
    }

    /// Mass per radial bin `[edges[i], edges[i+1])`.
    pub fn radial_profile(&self, edges: &[f64]) -> Vec<f64> {
        let cell = self.lattice.dx() * self.lattice.dy();
        let mut bins = vec![0.0; edges.len().saturating_sub(1)];
        for (z, v) in self.cells() {
            let r = z.norm();
            if let Some(b) = edges.windows(2).position(|w| r >= w[0] && r < w[1]) {
                bins[b] += v * cell;
            }
        }
        bins
    }

    fn cells(&self) -> impl Iterator<Item = (Complex64, f64)> + '_ {
        let nx = self.lattice.nx;
        self.values.iter().enumerate().map(move |(i, &v)| (self.lattice.point(i % nx, i / nx), v))
    }

    /// Plain-text grid: header `nx ny x_min x_max y_min y_max`, then one
    /// line of `nx` values per row.
    pub fn to_grid_text(&self) -> String {
        let l = &self.lattice;
        let mut out = format!("{} {} {} {} {} {}\n", l.nx, l.ny, l.x_min, l.x_max, l.y_min, l.y_max);
        for row in self.values.chunks(l.nx) {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }

    pub fn from_grid_text(text: &str) -> Result<Self> {
        let bad = |msg: String| Error::InvalidParameter(msg);
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: Vec<&str> = lines.next().ok_or_else(|| bad("empty grid file".into()))?.split_whitespace().collect();
        if header.len() != 6 {
            return Err(bad(format!("grid header needs 6 fields, got {}", header.len())));
        }
        let int = |s: &str| s.parse::<usize>().map_err(|e| bad(format!("grid header: {e}")));
        let real = |s: &str| s.parse::<f64>().map_err(|e| bad(format!("grid header: {e}")));
        let lattice = Lattice::new(
            real(header[2])?,
            real(header[3])?,
            real(header[4])?,
            real(header[5])?,
            int(header[0])?,
            int(header[1])?,
        )?;
        let mut values = Vec::with_capacity(lattice.len());
        for (row, line) in lines.enumerate() {
            for tok in line.split_whitespace() {
                values.push(tok.parse::<f64>().map_err(|e| bad(format!("grid row {}: {e}", row + 1)))?);
            }
        }
        if values.len() != lattice.len() {
            return Err(bad(format!("grid has {} values, expected {}", values.len(), lattice.len())));
        }
        let total_mass = values.iter().sum::<f64>() * lattice.dx() * lattice.dy();
        Ok(Self { lattice, values, total_mass })
    }
}

/// Tridiagonal `A(z)`: diagonal `1 + |z|^2`, superdiagonal `-z`,
/// subdiagonal `-conj(z)`.
pub fn build_a(z: Complex64, m: usize) -> CMatrix {
    let mut a = CMatrix::zeros(m, m);
    for i in 0..m {
        a[(i, i)] = Complex64::new(1.0 + z.norm_sqr(), 0.0);
        if i + 1 < m {
            a[(i, i + 1)] = -z;
            a[(i + 1, i)] = -z.conj();
        }
    }
    a
}

/// `M(z) = B Bᴴ + (n sigma^2 / 2) A(z)` for `B = U1(s) - z U0(s)`.
pub fn potential_matrix(signal: &[Complex64], sigma: f64, z: Complex64) -> Result<CMatrix> {
    let n = signal.len();
    if n < 2 || n % 2 == 1 {
        return Err(Error::OddLength(n));
    }
    let m = n / 2;
    let b = CMatrix::from_fn(m, m, |i, j| signal[i + j + 1] - z * signal[i + j]);
    let noise = n as f64 * sigma * sigma / 2.0;
    Ok(&b * b.adjoint() + build_a(z, m) * Complex64::new(noise, 0.0))
}

/// `sum log mu_j` over the eigenvalues of `M(z)` above `1e-13 trace / m`.
pub fn log_potential_sum(signal: &[Complex64], sigma: f64, z: Complex64) -> Result<f64> {
    let mat = potential_matrix(signal, sigma, z)?;
    let m = mat.nrows();
    let trace: f64 = (0..m).map(|i| mat[(i, i)].re).sum();
    let tol = 1e-13 * trace / m as f64;
    Ok(hermitian_eigenvalues(&mat).into_iter().filter(|&mu| mu > tol).map(f64::ln).sum())
}

/// Five-point Laplacian of the log potential, scaled by `1/(2 pi n)`.
pub fn condensed_density_map(signal: &[Complex64], sigma: f64, lattice: &Lattice) -> Result<DensityMap> {
    let n = signal.len();
    let (nx, ny) = (lattice.nx, lattice.ny);
    let logs = map_indexed(lattice.len(), |i| log_potential_sum(signal, sigma, lattice.point(i % nx, i / nx)));
    let logs: Vec<f64> = logs.into_iter().collect::<Result<_>>()?;

    let (dx, dy) = (lattice.dx(), lattice.dy());
    let scale = 1.0 / (2.0 * std::f64::consts::PI * n as f64);
    let mut values = vec![0.0; lattice.len()];
    for iy in 1..ny - 1 {
        for ix in 1..nx - 1 {
            let at = |x: usize, y: usize| logs[y * nx + x];
            let c = at(ix, iy);
            let lap = (at(ix + 1, iy) + at(ix - 1, iy) - 2.0 * c) / (dx * dx)
                + (at(ix, iy + 1) + at(ix, iy - 1) - 2.0 * c) / (dy * dy);
            values[iy * nx + ix] = scale * lap;
        }
    }
    let total_mass = values.iter().sum::<f64>() * dx * dy;
    Ok(DensityMap { lattice: *lattice, values, total_mass })
}

/// Candidate neighbourhoods `N_k`: closed disks around guessed nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentifiabilityQuery {
    pub candidates: Vec<(Complex64, f64)>,
}

impl IdentifiabilityQuery {
    pub fn new(candidates: Vec<(Complex64, f64)>) -> Result<Self> {
        if let Some((_, r)) = candidates.iter().find(|(_, r)| !(*r > 0.0 && r.is_finite())) {
            return Err(Error::InvalidParameter(format!("candidate radius must be > 0, got {r}")));
        }
        Ok(Self { candidates })
    }

    /// One disk per node with radius `0.45 x` the distance to the nearest
    /// other node, capped at `max_radius`.
    pub fn around_nodes(nodes: &[Complex64], max_radius: f64) -> Result<Self> {
        let candidates = nodes
            .iter()
            .enumerate()
            .map(|(i, &z)| {
                let nearest = nodes
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, w)| (z - w).norm())
                    .fold(f64::INFINITY, f64::min);
                (z, (0.45 * nearest).min(max_radius))
            })
            .collect();
        Self::new(candidates)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CandidateCheck {
    pub unimodal: bool,
    pub overlaps: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentifiabilityReport {
    pub identifiable: bool,
    pub per_candidate: Vec<CandidateCheck>,
}

/// Each disk must hold exactly one strict local maximum of the map
/// (neighbours taken among lattice points of the same disk), and the disks
/// must be pairwise disjoint.
pub fn check_identifiability(map: &DensityMap, query: &IdentifiabilityQuery) -> Result<IdentifiabilityReport> {
    let l = &map.lattice;
    let mut per_candidate = Vec::with_capacity(query.candidates.len());
    for (k, &(center, radius)) in query.candidates.iter().enumerate() {
        let inside_bounds = center.re - radius >= l.x_min
            && center.re + radius <= l.x_max
            && center.im - radius >= l.y_min
            && center.im + radius <= l.y_max;
        let in_disk = |ix: usize, iy: usize| (l.point(ix, iy) - center).norm() <= radius;
        let points: Vec<(usize, usize)> =
            (0..l.ny).flat_map(|iy| (0..l.nx).map(move |ix| (ix, iy))).filter(|&(ix, iy)| in_disk(ix, iy)).collect();
        if !inside_bounds || points.len() < 9 {
            return Err(Error::RegionNotCovered(k));
        }
        let maxima = points
            .iter()
            .filter(|&&(ix, iy)| {
                let v = map.value(ix, iy);
                let mut neighbours = (-1i64..=1)
                    .flat_map(|dy| (-1i64..=1).map(move |dx| (dx, dy)))
                    .filter(|&d| d != (0, 0))
                    .filter_map(|(dx, dy)| {
                        let x = usize::try_from(ix as i64 + dx).ok()?;
                        let y = usize::try_from(iy as i64 + dy).ok()?;
                        (x < l.nx && y < l.ny && in_disk(x, y)).then_some((x, y))
                    })
                    .peekable();
                neighbours.peek().is_some() && neighbours.all(|(x, y)| map.value(x, y) < v)
            })
            .count();
        let overlaps = query
            .candidates
            .iter()
            .enumerate()
            .any(|(j, &(c, r))| j != k && (c - center).norm() <= r + radius);
        per_candidate.push(CandidateCheck { unimodal: maxima == 1, overlaps });
    }
    let identifiable = per_candidate.iter().all(|c| c.unimodal && !c.overlaps);
    Ok(IdentifiabilityReport { identifiable, per_candidate })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignCandidate {
    pub model: ExponentialModel,
    pub query: IdentifiabilityQuery,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignRow {
    pub candidate: usize,
    pub sigma: f64,
    pub n: usize,
    pub identifiable: bool,
}

/// Identifiability of every candidate for every `(sigma, n)` combination.
pub fn design_experiment(
    candidates: &[DesignCandidate],
    sigmas: &[f64],
    ns: &[usize],
    lattice: &Lattice,
) -> Result<Vec<DesignRow>> {
    if candidates.is_empty() || sigmas.is_empty() || ns.is_empty() {
        return Err(Error::InvalidParameter("design grids must be non-empty".into()));
    }
    let mut rows = Vec::new();
    for (ci, cand) in candidates.iter().enumerate() {
        for &n in ns {
            let signal = cand.model.evaluate(0..n);
            for &sigma in sigmas {
                let map = condensed_density_map(&signal, sigma, lattice)?;
                let identifiable = check_identifiability(&map, &cand.query)?.identifiable;
                rows.push(DesignRow { candidate: ci, sigma, n, identifiable });
            }
        }
    }
    Ok(rows)
}
