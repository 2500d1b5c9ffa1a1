use nalgebra::{DMatrix, DMatrixView, DMatrixViewMut};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Named matrix block inside a flat parameter vector. Blocks are stored
/// column-major, i.e. the vec(·) convention.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shape {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
}

impl Shape {
    pub fn new(name: impl Into<String>, rows: usize, cols: usize) -> Self {
        Shape { name: name.into(), rows, cols }
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamPoint {
    data: Vec<f64>,
    shapes: Vec<Shape>,
}

impl ParamPoint {
    pub fn new(data: Vec<f64>, shapes: Vec<Shape>) -> Result<Self> {
        let total: usize = shapes.iter().map(Shape::len).sum();
        if total != data.len() {
            return Err(LabError::Construction(format!(
                "shapes cover {total} entries but data has {}",
                data.len()
            )));
        }
        Ok(ParamPoint { data, shapes })
    }

    /// A plain vector with a single column block.
    pub fn vector(data: Vec<f64>) -> Self {
        let n = data.len();
        ParamPoint { data, shapes: vec![Shape::new("w", n, 1)] }
    }

    pub fn zeros(shapes: Vec<Shape>) -> Self {
        let n = shapes.iter().map(Shape::len).sum();
        ParamPoint { data: vec![0.0; n], shapes }
    }

    /// Flattens a list of matrices (column-major) into one point.
    pub fn from_matrices(mats: &[DMatrix<f64>]) -> Self {
        let mut data = Vec::new();
        let mut shapes = Vec::new();
        for (i, m) in mats.iter().enumerate() {
            shapes.push(Shape::new(format!("W{}", i + 1), m.nrows(), m.ncols()));
            data.extend_from_slice(m.as_slice());
        }
        ParamPoint { data, shapes }
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn shapes(&self) -> &[Shape] {
        &self.shapes
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    fn offset(&self, idx: usize) -> usize {
        self.shapes[..idx].iter().map(Shape::len).sum()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.shapes.iter().position(|s| s.name == name)
    }

    pub fn view(&self, idx: usize) -> DMatrixView<'_, f64> {
        let off = self.offset(idx);
        let s = &self.shapes[idx];
        DMatrixView::from_slice(&self.data[off..off + s.len()], s.rows, s.cols)
    }

    pub fn view_mut(&mut self, idx: usize) -> DMatrixViewMut<'_, f64> {
        let off = self.offset(idx);
        let (r, c, n) = {
            let s = &self.shapes[idx];
            (s.rows, s.cols, s.len())
        };
        DMatrixViewMut::from_slice(&mut self.data[off..off + n], r, c)
    }

    pub fn matrices(&self) -> Vec<DMatrix<f64>> {
        (0..self.shapes.len()).map(|i| self.view(i).into_owned()).collect()
    }

    pub fn norm(&self) -> f64 {
        super::norm(&self.data)
    }
}

impl std::ops::Deref for ParamPoint {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.data
    }
}
