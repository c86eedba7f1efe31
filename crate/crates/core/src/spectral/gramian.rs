use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use super::{numerical_jacobian, SpectralError, SpectralOptions, SpectralResult, ORTHONORMAL_TOL};
use crate::operators::{EvidenceDistribution, EvidenceItem, OperatorPair};

/// `Σ_e = DQ·DP_e − DP_e·DQ` for one evidence item.
#[derive(Debug, Clone, PartialEq)]
pub struct Commutator {
    pub evidence_id: String,
    pub sigma: DMatrix<f64>,
    /// `‖DQ‖_F · ‖DP_e‖_F`. Bounds `‖Σ_e‖_F / 2`; entries of `Σ_e` below
    /// `rel_tol · scale` are indistinguishable from differencing error.
    pub scale: f64,
}

impl Commutator {
    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.sigma * v
    }

    pub fn is_zero(&self) -> bool {
        self.sigma.iter().all(|&x| x == 0.0)
    }
}

pub fn commutator_from_jacobians(evidence_id: impl Into<String>, dq: &DMatrix<f64>, dp: &DMatrix<f64>) -> SpectralResult<Commutator> {
    let d = dq.nrows();
    for m in [dq, dp] {
        if m.shape() != (d, d) {
            return Err(SpectralError::Dimension {
                expected: d,
                found: if m.nrows() != d { m.nrows() } else { m.ncols() },
            });
        }
    }
    Ok(Commutator {
        evidence_id: evidence_id.into(),
        sigma: dq * dp - dp * dq,
        scale: dq.norm() * dp.norm(),
    })
}

fn check_redundancy<P: OperatorPair>(pair: &P, e: &P::Evidence, theta_star: &DVector<f64>, tol: f64) -> SpectralResult<()> {
    let norm = (pair.expand(theta_star, e)? - theta_star).norm();
    if !(norm <= tol) {
        return Err(SpectralError::RedundancyViolated {
            evidence_id: e.id().to_string(),
            norm,
        });
    }
    Ok(())
}

fn commutator_with_dq<P: OperatorPair>(
    pair: &P,
    e: &P::Evidence,
    theta_star: &DVector<f64>,
    dq: &DMatrix<f64>,
    opts: &SpectralOptions,
) -> SpectralResult<Commutator> {
    check_redundancy(pair, e, theta_star, opts.redundancy_tol)?;
    let dp = numerical_jacobian(|x| pair.expand(x, e), theta_star, opts.step)?;
    commutator_from_jacobians(e.id(), dq, &dp.matrix)
}

/// Linearised commutator at `θ*`. Fails unless `P_e(θ*) = θ*` within the
/// redundancy tolerance.
pub fn commutator<P: OperatorPair>(pair: &P, e: &P::Evidence, theta_star: &DVector<f64>, opts: &SpectralOptions) -> SpectralResult<Commutator> {
    check_redundancy(pair, e, theta_star, opts.redundancy_tol)?;
    let dq = numerical_jacobian(|x| pair.consolidate(x), theta_star, opts.step)?;
    commutator_with_dq(pair, e, theta_star, &dq.matrix, opts)
}

/// `G = Σ_i p_i Σ_iᵀ Σ_i` together with the terms it was assembled from.
#[derive(Debug, Clone, PartialEq)]
pub struct Gramian {
    pub g: DMatrix<f64>,
    pub commutators: Vec<Commutator>,
    pub probabilities: Vec<f64>,
}

impl Gramian {
    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    /// `vᵀ G v`.
    pub fn quadratic_form(&self, v: &DVector<f64>) -> f64 {
        v.dot(&(&self.g * v))
    }

    /// `Σ_i p_i ‖Σ_i v‖²`, evaluated term by term.
    pub fn expected_commutator_energy(&self, v: &DVector<f64>) -> f64 {
        self.commutators
            .iter()
            .zip(&self.probabilities)
            .map(|(c, p)| p * c.apply(v).norm_squared())
            .sum()
    }

    /// `‖G − Gᵀ‖_max`.
    pub fn symmetry_defect(&self) -> f64 {
        (&self.g - self.g.transpose()).amax()
    }

    /// Eigenvalues of the symmetric part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        sorted_eigen(&symmetrise(&self.g)).0
    }

    /// Largest eigenvalue magnitude of the symmetric part.
    pub fn norm(&self) -> f64 {
        self.eigenvalues().iter().fold(0.0_f64, |m, l| m.max(l.abs()))
    }

    /// Largest operator scale over the support.
    pub fn scale(&self) -> f64 {
        max_scale(&self.commutators)
    }
}

fn max_scale(commutators: &[Commutator]) -> f64 {
    commutators.iter().fold(0.0_f64, |m, c| m.max(c.scale))
}

/// Assemble `G` from precomputed commutators and their probabilities.
pub fn gramian_from_commutators(commutators: Vec<Commutator>, probabilities: Vec<f64>) -> SpectralResult<Gramian> {
    if commutators.len() != probabilities.len() {
        return Err(SpectralError::Dimension {
            expected: commutators.len(),
            found: probabilities.len(),
        });
    }
    let Some(first) = commutators.first() else {
        return Err(SpectralError::InvalidParameter("no commutators".into()));
    };
    let d = first.sigma.nrows();
    let mut g = DMatrix::zeros(d, d);
    for (c, &p) in commutators.iter().zip(&probabilities) {
        if c.sigma.shape() != (d, d) {
            return Err(SpectralError::Dimension {
                expected: d,
                found: c.sigma.nrows(),
            });
        }
        if !(p.is_finite() && p >= 0.0) {
            return Err(SpectralError::InvalidParameter(format!("probability {p}")));
        }
        g += c.sigma.tr_mul(&c.sigma) * p;
    }
    Ok(Gramian {
        g,
        commutators,
        probabilities,
    })
}

/// Commutator Gramian over the support of `dist` at `θ*`, using the
/// effective probabilities there.
pub fn gramian<P: OperatorPair>(
    pair: &P,
    dist: &EvidenceDistribution<P::Evidence>,
    theta_star: &DVector<f64>,
    opts: &SpectralOptions,
) -> SpectralResult<Gramian> {
    let support = dist.support(theta_star)?;
    let dq = numerical_jacobian(|x| pair.consolidate(x), theta_star, opts.step)?;
    let mut commutators = Vec::with_capacity(support.len());
    let mut probabilities = Vec::with_capacity(support.len());
    for (e, p) in support {
        commutators.push(commutator_with_dq(pair, e, theta_star, &dq.matrix, opts)?);
        probabilities.push(p);
    }
    gramian_from_commutators(commutators, probabilities)
}

/// A subspace `W ⊆ ℝ^d` held as a matrix with orthonormal columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    basis: DMatrix<f64>,
}

impl Subspace {
    pub fn full(d: usize) -> SpectralResult<Self> {
        Self::from_orthonormal(DMatrix::identity(d, d))
    }

    pub fn from_orthonormal(basis: DMatrix<f64>) -> SpectralResult<Self> {
        if basis.ncols() == 0 || basis.nrows() == 0 {
            return Err(SpectralError::InvalidSubspace("empty basis".into()));
        }
        if basis.ncols() > basis.nrows() {
            return Err(SpectralError::InvalidSubspace(format!(
                "{} columns in dimension {}",
                basis.ncols(),
                basis.nrows()
            )));
        }
        let defect = (basis.tr_mul(&basis) - DMatrix::<f64>::identity(basis.ncols(), basis.ncols())).amax();
        if !(defect <= ORTHONORMAL_TOL) {
            return Err(SpectralError::InvalidSubspace(format!("columns not orthonormal (defect {defect:e})")));
        }
        Ok(Self { basis })
    }

    /// Orthonormal basis of the span of `vectors`, via SVD with a cutoff of
    /// `rel_tol` times the largest singular value.
    pub fn spanned_by(vectors: &[DVector<f64>], rel_tol: f64) -> SpectralResult<Self> {
        let Some(first) = vectors.first() else {
            return Err(SpectralError::InvalidSubspace("no spanning vectors".into()));
        };
        let d = first.len();
        if let Some(v) = vectors.iter().find(|v| v.len() != d) {
            return Err(SpectralError::Dimension { expected: d, found: v.len() });
        }
        let m = DMatrix::from_columns(vectors);
        let svd = m.svd(true, false);
        let u = svd.u.expect("left singular vectors requested");
        let s_max = svd.singular_values.max();
        if !(s_max > 0.0) {
            return Err(SpectralError::InvalidSubspace("spanning vectors are all zero".into()));
        }
        let keep: Vec<DVector<f64>> = svd
            .singular_values
            .iter()
            .enumerate()
            .filter(|(_, &s)| s > rel_tol * s_max)
            .map(|(i, _)| u.column(i).into_owned())
            .collect();
        Self::from_orthonormal(DMatrix::from_columns(&keep))
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NondegeneracyVerdict {
    pub positive_definite_on_w: bool,
    pub min_eigenvalue: f64,
    /// Eigenvalues of `BᵀGB`, ascending.
    pub eigenvalues: Vec<f64>,
    /// Eigenvalues at or below this count as zero.
    pub threshold: f64,
    /// Unit vector in `W` with `vᵀGv = min_eigenvalue`, when degenerate.
    pub witness: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelVerdict {
    pub trivial: bool,
    /// Dimension of `∩_e ker Σ_e ∩ W`.
    pub nullity: usize,
    pub singular_values: Vec<f64>,
    pub threshold: f64,
    /// Unit vector in the intersection, when nontrivial.
    pub witness: Option<Vec<f64>>,
}

fn symmetrise(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

fn sorted_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let columns: Vec<DVector<f64>> = order.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect();
    let vectors = if columns.is_empty() {
        DMatrix::zeros(m.nrows(), 0)
    } else {
        DMatrix::from_columns(&columns)
    };
    (values, vectors)
}

/// Positive definiteness of `G` restricted to `W`: eigenvalues of `BᵀGB`
/// against `max(rel_tol · ‖G‖, (rel_tol · scale)²)`. The second term keeps a
/// Gramian made of differencing noise from counting as nondegenerate.
pub fn nondegeneracy_check(g: &Gramian, w: &Subspace, rel_tol: f64) -> SpectralResult<NondegeneracyVerdict> {
    if w.ambient_dim() != g.dim() {
        return Err(SpectralError::Dimension {
            expected: g.dim(),
            found: w.ambient_dim(),
        });
    }
    let b = w.basis();
    let compressed = symmetrise(&(b.tr_mul(&g.g) * b));
    let (eigenvalues, vectors) = sorted_eigen(&compressed);
    let threshold = (rel_tol * g.norm()).max((rel_tol * g.scale()).powi(2));
    let min_eigenvalue = eigenvalues[0];
    let positive_definite_on_w = min_eigenvalue > threshold;
    let witness = (!positive_definite_on_w).then(|| {
        let v = b * vectors.column(0);
        (&v / v.norm()).as_slice().to_vec()
    });
    Ok(NondegeneracyVerdict {
        positive_definite_on_w,
        min_eigenvalue,
        eigenvalues,
        threshold,
        witness,
    })
}

/// `∩_e ker Σ_e ∩ W` from the null space of the stacked blocks `Σ_e·B`,
/// with singular values at or below `max(rel_tol · σ_max, rel_tol · scale)`
/// treated as zero.
pub fn kernel_intersection_oracle(commutators: &[Commutator], w: &Subspace, rel_tol: f64) -> SpectralResult<KernelVerdict> {
    let d = w.ambient_dim();
    let m = w.dim();
    let b = w.basis();
    if let Some(c) = commutators.iter().find(|c| c.sigma.ncols() != d) {
        return Err(SpectralError::Dimension {
            expected: d,
            found: c.sigma.ncols(),
        });
    }
    let blocks: Vec<DMatrix<f64>> = commutators.iter().map(|c| &c.sigma * b).collect();
    let rows: usize = blocks.iter().map(|blk| blk.nrows()).sum();
    let mut stacked = DMatrix::zeros(rows.max(m), m);
    let mut r = 0;
    for blk in &blocks {
        stacked.view_mut((r, 0), blk.shape()).copy_from(blk);
        r += blk.nrows();
    }
    let svd = stacked.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let s_max = svd.singular_values.max();
    let threshold = (rel_tol * s_max).max(rel_tol * max_scale(commutators));
    let null: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] <= threshold)
        .collect();
    let mut singular_values: Vec<f64> = svd.singular_values.iter().copied().collect();
    singular_values.sort_by(|a, b| b.total_cmp(a));
    let witness = null.first().map(|&i| {
        let v = b * v_t.row(i).transpose();
        (&v / v.norm()).as_slice().to_vec()
    });
    Ok(KernelVerdict {
        trivial: null.is_empty(),
        nullity: null.len(),
        singular_values,
        threshold,
        witness,
    })
}
