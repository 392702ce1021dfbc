use crate::error::{Error, Result};
use crate::gnn::ModelKind;
use crate::graph::Graph;
use crate::linalg::{CsrMatrix, Matrix};

/// The `S` of `S · H · W`.
#[derive(Debug, Clone, PartialEq)]
pub enum PropagationMatrix {
    /// MLPs ignore the graph.
    Identity(usize),
    Sparse(CsrMatrix),
}

impl PropagationMatrix {
    pub fn n(&self) -> usize {
        match self {
            PropagationMatrix::Identity(n) => *n,
            PropagationMatrix::Sparse(s) => s.n(),
        }
    }

    pub fn apply(&self, x: &Matrix) -> Result<Matrix> {
        match self {
            PropagationMatrix::Identity(n) => {
                if x.rows() != *n {
                    return Err(Error::Dimension(format!(
                        "{} feature rows for {n} nodes",
                        x.rows()
                    )));
                }
                Ok(x.clone())
            }
            PropagationMatrix::Sparse(s) => s.matmul(x),
        }
    }

    /// `Sᵀ · x`, used by the backward pass.
    pub fn apply_transposed(&self, x: &Matrix) -> Result<Matrix> {
        match self {
            PropagationMatrix::Identity(_) => self.apply(x),
            PropagationMatrix::Sparse(s) => s.tr_matmul(x),
        }
    }

    pub fn to_dense(&self) -> Matrix {
        match self {
            PropagationMatrix::Identity(n) => Matrix::identity(*n),
            PropagationMatrix::Sparse(s) => s.to_dense(),
        }
    }
}

/// `D^(-1/2) Â D^(-1/2)` with `Â = A + I` when `self_loops` and `Â = A`
/// otherwise; `D` holds the row sums of `Â`. Identity for MLPs.
pub fn propagation_matrix(
    g: &Graph,
    self_loops: bool,
    kind: ModelKind,
) -> Result<PropagationMatrix> {
    if kind == ModelKind::Mlp {
        return Ok(PropagationMatrix::Identity(g.n()));
    }
    let g = g.set_self_loops(self_loops);
    let inv_sqrt: Vec<f64> = (0..g.n())
        .map(|v| match g.degree(v) {
            0 => Err(Error::ZeroDegree { node: v }),
            d => Ok(1.0 / (d as f64).sqrt()),
        })
        .collect::<Result<_>>()?;
    let rows = (0..g.n())
        .map(|v| {
            g.neighbors(v)
                .iter()
                .map(|&u| (u, inv_sqrt[v] * inv_sqrt[u]))
                .collect()
        })
        .collect();
    Ok(PropagationMatrix::Sparse(CsrMatrix::from_rows(rows)))
}
