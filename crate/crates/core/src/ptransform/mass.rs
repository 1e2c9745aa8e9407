use num_complex::Complex64;

use crate::model::Term;

/// Evaluation points closer than this to a node are nudged off it.
pub const SINGULAR_DISTANCE: f64 = 1e-14;

/// Square `size x size` grid with spacing `delta` centred at `center`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mesh {
    pub center: Complex64,
    pub size: usize,
    pub delta: f64,
}

impl Mesh {
    pub fn new(center: Complex64, size: usize, delta: f64) -> Self {
        Self { center, size, delta }
    }

    /// Distance from the centre to the outer ring along each axis.
    pub fn half_width(&self) -> f64 {
        (self.size - 1) as f64 / 2.0 * self.delta
    }

    pub fn point(&self, i: usize, j: usize) -> Complex64 {
        let h = (self.size - 1) as f64 / 2.0;
        self.center + Complex64::new((i as f64 - h) * self.delta, (j as f64 - h) * self.delta)
    }

    /// True when `z` lies in the closed square spanned by the interior
    /// points, where the stencil is evaluated. A node in the outer ring of
    /// cells is only partly captured.
    pub fn contains(&self, z: Complex64) -> bool {
        let d = z - self.center;
        d.re.abs().max(d.im.abs()) <= self.half_width() - self.delta
    }
}

/// `max(1e-3, s / 3)` where `s` is the root-mean-square distance of the
/// nodes from their mean.
pub fn auto_delta(nodes: &[Complex64]) -> f64 {
    if nodes.is_empty() {
        return 1e-3;
    }
    let count = nodes.len() as f64;
    let mean = nodes.iter().sum::<Complex64>() / count;
    let spread = (nodes.iter().map(|z| (z - mean).norm_sqr()).sum::<f64>() / count).sqrt();
    (spread / 3.0).max(1e-3)
}

fn potential(terms: &[Term], z: Complex64, nudge: f64) -> Complex64 {
    terms
        .iter()
        .map(|t| {
            let mut d = (z - t.node).norm();
            if d < SINGULAR_DISTANCE {
                d = (z + nudge - t.node).norm();
            }
            t.weight * d.ln()
        })
        .sum()
}

/// Integrated discrete Laplacian of `F(z) = (1/2piR) sum c log|z - xi|` over
/// the interior of `mesh`. Each interior stencil value `Delta F * delta^2`
/// is summed, so a unit point mass deep inside the mesh gives about 1.
pub fn laplacian_mass(terms: &[Term], replications: usize, mesh: &Mesh) -> Complex64 {
    let m = mesh.size;
    let nudge = mesh.delta * 1e-6;
    let mut grid = vec![Complex64::new(0.0, 0.0); m * m];
    for i in 0..m {
        for j in 0..m {
            grid[i * m + j] = potential(terms, mesh.point(i, j), nudge);
        }
    }
    let mut mass = Complex64::new(0.0, 0.0);
    for i in 1..m - 1 {
        for j in 1..m - 1 {
            mass += grid[(i + 1) * m + j] + grid[(i - 1) * m + j] + grid[i * m + j + 1] + grid[i * m + j - 1]
                - grid[i * m + j] * 4.0;
        }
    }
    mass / (2.0 * std::f64::consts::PI * replications.max(1) as f64)
}

fn chebyshev(a: Complex64, b: Complex64) -> f64 {
    let d = a - b;
    d.re.abs().max(d.im.abs())
}

/// Closed squares intersect.
pub fn meshes_overlap(a: &Mesh, b: &Mesh) -> bool {
    chebyshev(a.center, b.center) <= a.half_width() + b.half_width()
}

/// Makes the meshes pairwise disjoint. Overlapping pairs are first shrunk
/// symmetrically two points at a time down to 3x3; if that is not enough
/// both spacings are scaled so the half-widths add up to 90% of the centre
/// distance. Of two meshes with the same centre the later one is dropped.
pub fn repair_meshes(meshes: &mut [Option<Mesh>]) {
    for a in 0..meshes.len() {
        for b in a + 1..meshes.len() {
            let (Some(mut ma), Some(mut mb)) = (meshes[a], meshes[b]) else {
                continue;
            };
            let dist = chebyshev(ma.center, mb.center);
            if dist == 0.0 {
                meshes[b] = None;
                continue;
            }
            while meshes_overlap(&ma, &mb) && (ma.size > 3 || mb.size > 3) {
                ma.size = (ma.size - 2).max(3);
                mb.size = (mb.size - 2).max(3);
            }
            if meshes_overlap(&ma, &mb) {
                let scale = 0.9 * dist / (ma.half_width() + mb.half_width());
                ma.delta *= scale;
                mb.delta *= scale;
            }
            meshes[a] = Some(ma);
            meshes[b] = Some(mb);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn containment_excludes_outer_ring() {
        let mesh = Mesh::new(c(0.0, 0.0), 7, 0.1);
        assert!(mesh.contains(c(0.2, -0.2)));
        assert!(!mesh.contains(c(0.25, 0.0)));
        assert!(!mesh.contains(c(0.0, -0.3)));
    }

    #[test]
    fn point_mass_at_centre_is_about_one() {
        let mesh = Mesh::new(c(0.3, -0.2), 7, 0.01);
        let terms = [Term::new(c(1.0, 0.0), mesh.center)];
        let m = laplacian_mass(&terms, 1, &mesh);
        assert!((m - 1.0).norm() < 0.15, "{m}");
    }

    #[test]
    fn split_weight_adds_up() {
        let mesh = Mesh::new(c(0.0, 1.0), 7, 0.02);
        let terms = [Term::new(c(0.5, 0.0), mesh.center), Term::new(c(0.5, 0.0), mesh.center)];
        assert!((laplacian_mass(&terms, 1, &mesh) - 1.0).norm() < 0.15);
    }

    #[test]
    fn exterior_node_is_nearly_harmonic() {
        // The five-point stencil leaves an O(delta^2 / d^2) flux error for a
        // node at distance d beyond the outer ring.
        let mesh = Mesh::new(c(0.0, 0.0), 7, 0.01);
        let at = |x: f64| laplacian_mass(&[Term::new(c(1.0, 0.0), c(x, 0.0))], 1, &mesh).norm();
        assert!(at(0.06) < 3e-3);
        assert!(at(0.09) < 1e-3);
        assert!(at(0.5) < 1e-5);
    }

    #[test]
    fn complex_weight_scales_mass() {
        let mesh = Mesh::new(c(0.5, 0.5), 9, 0.005);
        let w = c(0.3, -1.2);
        let inside = mesh.center + c(0.0021, -0.0013);
        let m = laplacian_mass(&[Term::new(w, inside)], 1, &mesh);
        assert!((m - w).norm() < 0.15 * w.norm(), "{m}");
    }

    #[test]
    fn replication_count_normalises() {
        let mesh = Mesh::new(c(0.0, 0.0), 7, 0.01);
        let terms = vec![Term::new(c(1.0, 0.0), mesh.center); 4];
        assert!((laplacian_mass(&terms, 4, &mesh) - 1.0).norm() < 0.15);
    }

    #[test]
    fn auto_delta_has_floor() {
        assert_eq!(auto_delta(&[c(1.0, 1.0); 3]), 1e-3);
        let d = auto_delta(&[c(-0.3, 0.0), c(0.3, 0.0)]);
        assert!((d - 0.1).abs() < 1e-15);
    }

    #[test]
    fn repair_makes_meshes_disjoint() {
        let mut meshes = vec![
            Some(Mesh::new(c(0.0, 0.0), 7, 0.1)),
            Some(Mesh::new(c(0.2, 0.0), 7, 0.1)),
            Some(Mesh::new(c(0.0, 0.0), 7, 0.1)),
            Some(Mesh::new(c(5.0, 0.0), 7, 0.1)),
        ];
        repair_meshes(&mut meshes);
        assert!(meshes[2].is_none());
        assert_eq!(meshes[3], Some(Mesh::new(c(5.0, 0.0), 7, 0.1)));
        let kept: Vec<Mesh> = meshes.iter().flatten().copied().collect();
        for a in 0..kept.len() {
            for b in a + 1..kept.len() {
                assert!(!meshes_overlap(&kept[a], &kept[b]));
            }
        }
        assert_eq!(kept[0].size, 3);
    }

    #[test]
    fn mild_overlap_only_shrinks() {
        let mut meshes = vec![Some(Mesh::new(c(0.0, 0.0), 7, 0.1)), Some(Mesh::new(c(0.5, 0.0), 7, 0.1))];
        repair_meshes(&mut meshes);
        let a = meshes[0].unwrap();
        assert_eq!((a.size, a.delta), (5, 0.1));
    }
}
