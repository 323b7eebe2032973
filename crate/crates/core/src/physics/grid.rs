use super::PhysicsError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridSpacing {
    Logarithmic,
    Custom,
}

/// Photon-energy group edges (keV).
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    edges: Vec<f64>,
    spacing: GridSpacing,
}

impl FrequencyGrid {
    pub fn new(edges: Vec<f64>) -> Result<Self, PhysicsError> {
        if edges.len() < 2 {
            return Err(PhysicsError::Grid("need at least two edges".into()));
        }
        if !(edges[0] > 0.0) {
            return Err(PhysicsError::Grid(format!("first edge {} not positive", edges[0])));
        }
        if edges.windows(2).any(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
            return Err(PhysicsError::Grid("edges must be strictly increasing and finite".into()));
        }
        Ok(Self { edges, spacing: GridSpacing::Custom })
    }

    pub fn logarithmic(lo: f64, hi: f64, groups: usize) -> Result<Self, PhysicsError> {
        if groups == 0 {
            return Err(PhysicsError::Grid("zero groups".into()));
        }
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(PhysicsError::Grid(format!("bad range [{lo}, {hi}]")));
        }
        let (a, b) = (lo.ln(), hi.ln());
        let mut edges: Vec<f64> = (0..=groups)
            .map(|k| (a + (b - a) * k as f64 / groups as f64).exp())
            .collect();
        edges[0] = lo;
        edges[groups] = hi;
        let mut grid = Self::new(edges)?;
        grid.spacing = GridSpacing::Logarithmic;
        Ok(grid)
    }

    /// 30 logarithmic groups on [1e-4, 100] keV.
    pub fn default_experiment() -> Self {
        Self::logarithmic(1e-4, 100.0, 30).expect("valid default grid")
    }

    pub fn groups(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn spacing(&self) -> GridSpacing {
        self.spacing
    }

    pub fn bounds(&self, g: usize) -> (f64, f64) {
        (self.edges[g], self.edges[g + 1])
    }

    pub fn width(&self, g: usize) -> f64 {
        self.edges[g + 1] - self.edges[g]
    }

    /// Geometric centre of group g.
    pub fn center(&self, g: usize) -> f64 {
        (self.edges[g] * self.edges[g + 1]).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid() {
        let g = FrequencyGrid::default_experiment();
        assert_eq!(g.groups(), 30);
        assert_eq!(g.edges()[0], 1e-4);
        assert_eq!(g.edges()[30], 100.0);
        let r0 = g.edges()[1] / g.edges()[0];
        let r1 = g.edges()[20] / g.edges()[19];
        assert!((r0 - r1).abs() < 1e-12);
        assert_eq!(g.spacing(), GridSpacing::Logarithmic);
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(FrequencyGrid::new(vec![1.0]).is_err());
        assert!(FrequencyGrid::new(vec![0.0, 1.0]).is_err());
        assert!(FrequencyGrid::new(vec![1.0, 1.0, 2.0]).is_err());
        assert!(FrequencyGrid::logarithmic(1.0, 0.5, 3).is_err());
    }
}
