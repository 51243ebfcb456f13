use serde::{Deserialize, Serialize};

use super::NumericsError;

/// Node placement for [`RadialGrid::graded`].
///
/// The local spacing follows `min(mid, first + growth * r, tail(r))`, where
/// `tail` holds `end_spacing` on the last unit interval and grows linearly
/// with `growth` inward from there. Both end spacings are capped at `mid/2`
/// so the ends stay finer than the interior on dense grids. `mid` is solved for so that the grid has
/// exactly `nodes` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub radius: f64,
    pub nodes: usize,
    pub first_spacing: f64,
    pub growth: f64,
    pub end_spacing: f64,
}

impl GridSpec {
    pub fn new(radius: f64, nodes: usize) -> Self {
        Self {
            radius,
            nodes,
            first_spacing: 2e-4,
            growth: 0.04,
            end_spacing: 1.0 / 64.0,
        }
    }

    fn spacing(&self, r: f64, mid: f64) -> f64 {
        let left = self.first_spacing.min(0.5 * mid) + self.growth * r;
        let from_end = (self.radius - 1.0 - r).max(0.0);
        let right = self.end_spacing.min(0.5 * mid) + self.growth * from_end;
        mid.min(left).min(right)
    }
}

/// Ordered radii on `[0, R]` together with quadrature weights for `∫₀^R · dr`.
///
/// Weights come from composite Simpson on consecutive interval pairs with
/// nonuniform spacing (exact for cubics on each pair); an odd trailing
/// interval is integrated with the quadratic through the last three nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl RadialGrid {
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self, NumericsError> {
        if nodes.len() < 3 {
            return Err(NumericsError::InvalidGrid(format!(
                "need at least 3 nodes, got {}",
                nodes.len()
            )));
        }
        if !(nodes[0] >= 0.0) || nodes.iter().any(|r| !r.is_finite()) {
            return Err(NumericsError::InvalidGrid(
                "nodes must be finite with r_0 >= 0".into(),
            ));
        }
        if let Some(i) = nodes.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(NumericsError::InvalidGrid(format!(
                "nodes not strictly increasing at index {}",
                i + 1
            )));
        }
        let weights = simpson_weights(&nodes);
        if let Some(i) = weights.iter().position(|&w| !(w > 0.0)) {
            return Err(NumericsError::InvalidGrid(format!(
                "non-positive quadrature weight at node {i}; spacing ratio too abrupt"
            )));
        }
        Ok(Self { nodes, weights })
    }

    pub fn uniform(radius: f64, nodes: usize) -> Result<Self, NumericsError> {
        if nodes < 3 || !(radius > 0.0) {
            return Err(NumericsError::InvalidGrid(format!(
                "uniform grid needs radius > 0 and >= 3 nodes (got {radius}, {nodes})"
            )));
        }
        let n = nodes - 1;
        let pts = (0..=n)
            .map(|i| if i == n { radius } else { radius * i as f64 / n as f64 })
            .collect();
        Self::from_nodes(pts)
    }

    /// Default graded grid: fine near `r = 0` and near `R`, uniform inside.
    pub fn graded(radius: f64, nodes: usize) -> Result<Self, NumericsError> {
        Self::from_spec(&GridSpec::new(radius, nodes))
    }

    pub fn from_spec(spec: &GridSpec) -> Result<Self, NumericsError> {
        if spec.nodes < 3 || !(spec.radius > 1.0) {
            return Err(NumericsError::InvalidGrid(format!(
                "graded grid needs radius > 1 and >= 3 nodes (got {}, {})",
                spec.radius, spec.nodes
            )));
        }
        if !(spec.first_spacing > 0.0 && spec.growth > 0.0 && spec.end_spacing > 0.0) {
            return Err(NumericsError::InvalidGrid("grading parameters must be positive".into()));
        }
        // Stretched coordinate ξ(r) = ∫ dr / spacing(r), tabulated on a fine mesh.
        let fine = 200_000usize;
        let dr = spec.radius / fine as f64;
        let stretch = |mid: f64| -> Vec<f64> {
            let mut xi = Vec::with_capacity(fine + 1);
            xi.push(0.0);
            let mut acc = 0.0;
            let mut prev = 1.0 / spec.spacing(0.0, mid);
            for k in 1..=fine {
                let cur = 1.0 / spec.spacing(k as f64 * dr, mid);
                acc += 0.5 * dr * (prev + cur);
                xi.push(acc);
                prev = cur;
            }
            xi
        };
        let intervals = (spec.nodes - 1) as f64;
        let (mut lo, mut hi) = (1e-9, spec.radius);
        if stretch(hi)[fine] > intervals {
            return Err(NumericsError::InvalidGrid(format!(
                "{} nodes cannot resolve the boundary grading on [0, {}]",
                spec.nodes, spec.radius
            )));
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if stretch(mid)[fine] > intervals {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-14 * hi {
                break;
            }
        }
        let xi = stretch(hi);
        let total = xi[fine];
        let mut pts = Vec::with_capacity(spec.nodes);
        pts.push(0.0);
        let mut k = 0usize;
        for i in 1..spec.nodes - 1 {
            let target = total * i as f64 / intervals;
            while xi[k + 1] < target {
                k += 1;
            }
            let t = (target - xi[k]) / (xi[k + 1] - xi[k]);
            pts.push((k as f64 + t) * dr);
        }
        pts.push(spec.radius);
        Self::from_nodes(pts)
    }

    /// Grid with every interval bisected.
    pub fn refined(&self) -> Self {
        let mut pts = Vec::with_capacity(2 * self.nodes.len() - 1);
        for w in self.nodes.windows(2) {
            pts.push(w[0]);
            pts.push(0.5 * (w[0] + w[1]));
        }
        pts.push(self.radius());
        Self::from_nodes(pts).expect("bisecting a valid grid keeps it valid")
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn radius(&self) -> f64 {
        *self.nodes.last().expect("grid is never empty")
    }

    /// Number of nodes with `lo <= r <= hi`.
    pub fn count_in(&self, lo: f64, hi: f64) -> usize {
        self.nodes.iter().filter(|&&r| r >= lo && r <= hi).count()
    }
}

fn simpson_weights(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut w = vec![0.0; n];
    let intervals = n - 1;
    let paired = intervals - intervals % 2;
    let mut i = 0;
    while i < paired {
        let h0 = x[i + 1] - x[i];
        let h1 = x[i + 2] - x[i + 1];
        let s = h0 + h1;
        w[i] += s / 6.0 * (2.0 - h1 / h0);
        w[i + 1] += s * s * s / (6.0 * h0 * h1);
        w[i + 2] += s / 6.0 * (2.0 - h0 / h1);
        i += 2;
    }
    if intervals % 2 == 1 {
        let (a, b, c) = (n - 3, n - 2, n - 1);
        let h0 = x[b] - x[a];
        let h1 = x[c] - x[b];
        w[a] += -h1 * h1 * h1 / (6.0 * h0 * (h0 + h1));
        w[b] += h1 * (h1 + 3.0 * h0) / (6.0 * h0);
        w[c] += h1 * (2.0 * h1 + 3.0 * h0) / (6.0 * (h0 + h1));
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_grid_meets_default_grading() {
        let g = RadialGrid::graded(20.0, 2000).unwrap();
        assert_eq!(g.len(), 2000);
        assert_eq!(g.nodes()[0], 0.0);
        assert_eq!(g.radius(), 20.0);
        assert!(g.count_in(0.0, 0.1) >= 50, "{}", g.count_in(0.0, 0.1));
        assert!(g.count_in(19.0, 20.0) >= 50, "{}", g.count_in(19.0, 20.0));
        let total: f64 = g.weights().iter().sum();
        assert!((total - 20.0).abs() <= 1e-12 * 20.0);
        // spacing near both ends finer than in the middle
        let n = g.len();
        let h = |i: usize| g.nodes()[i + 1] - g.nodes()[i];
        assert!(h(1) < h(n / 2) && h(n - 2) <= 1.001 * h(n / 2));
    }

    #[test]
    fn rejects_bad_nodes() {
        assert!(RadialGrid::from_nodes(vec![0.0, 1.0, 1.0, 2.0]).is_err());
        assert!(RadialGrid::from_nodes(vec![-1.0, 1.0, 2.0]).is_err());
        assert!(RadialGrid::from_nodes(vec![0.0, 1.0]).is_err());
    }

    #[test]
    fn refinement_doubles_intervals() {
        let g = RadialGrid::graded(8.0, 301).unwrap();
        let f = g.refined();
        assert_eq!(f.len(), 601);
        assert_eq!(f.nodes()[2], g.nodes()[1]);
    }

    #[test]
    fn too_few_nodes_for_grading() {
        assert!(RadialGrid::graded(20.0, 50).is_err());
    }
}
