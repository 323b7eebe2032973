use super::SolverError;

/// Uniform staggered mesh: N cells (half nodes) between N+1 nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct StaggeredMesh {
    pub length: f64,
    pub cells: usize,
    pub dx: f64,
}

impl StaggeredMesh {
    pub fn new(length: f64, cells: usize) -> Result<Self, SolverError> {
        if cells < 3 {
            return Err(SolverError::Config(format!("need at least 3 cells, got {cells}")));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(SolverError::Config(format!("length must be positive, got {length}")));
        }
        Ok(Self { length, cells, dx: length / cells as f64 })
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.cells).map(|i| i as f64 * self.dx).collect()
    }

    pub fn centers(&self) -> Vec<f64> {
        let x = self.nodes();
        (0..self.cells).map(|j| 0.5 * (x[j] + x[j + 1])).collect()
    }
}
