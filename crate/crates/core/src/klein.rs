//! Skew-symmetric matrix models of the Klein-space algebra so(n+1).
//!
//! An h- or v-vector `p ∈ Rⁿ` embeds as the block matrix `[[0, p], [−pᵀ, 0]]`.
//! The Cartan–Killing form `½ tr(aᵀb)` restricts to the Euclidean product on
//! such embeddings. Both sectors use this one implementation, parametrized by
//! dimension.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KleinError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("matrix is not skew-symmetric (max |M + Mᵀ| = {0:e})")]
    NotSkew(f64),
    #[error("matrix must be square of size n+1 with n >= 1, got {0}x{1}")]
    BadShape(usize, usize),
    #[error("non-finite component")]
    NonFinite,
}

const SKEW_TOL: f64 = 1e-12;

/// A plain vector of the h- or v-sector.
#[derive(Clone, Debug, PartialEq)]
pub struct HVector(DVector<f64>);

impl HVector {
    pub fn new(components: Vec<f64>) -> Result<Self, KleinError> {
        if components.iter().any(|c| !c.is_finite()) {
            return Err(KleinError::NonFinite);
        }
        Ok(Self(DVector::from_vec(components)))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DVector::zeros(dim))
    }

    /// The unit tangent `(1, 0, …, 0)`.
    pub fn tangent(dim: usize) -> Self {
        let mut v = DVector::zeros(dim);
        v[0] = 1.0;
        Self(v)
    }

    /// Joins a tangential component and a normal part into `(p∥, p⊥)`.
    pub fn from_parts(parallel: f64, perp: &HVector) -> Self {
        let mut v = DVector::zeros(perp.dim() + 1);
        v[0] = parallel;
        v.rows_mut(1, perp.dim()).copy_from(&perp.0);
        Self(v)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn components(&self) -> &[f64] {
        self.0.as_slice()
    }

    #[inline]
    pub fn as_vector(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn dot(&self, other: &HVector) -> f64 {
        self.0.dot(&other.0)
    }

    pub fn scale(&self, s: f64) -> HVector {
        Self(&self.0 * s)
    }
}

/// An element of so(n+1), stored densely.
#[derive(Clone, Debug, PartialEq)]
pub struct KleinElement {
    dim: usize,
    matrix: DMatrix<f64>,
}

impl KleinElement {
    /// Wraps a square matrix of size `n+1`, checking skew-symmetry entrywise.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self, KleinError> {
        let (r, c) = matrix.shape();
        if r != c || r < 2 {
            return Err(KleinError::BadShape(r, c));
        }
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(KleinError::NonFinite);
        }
        let defect = skew_defect(&matrix);
        if defect > SKEW_TOL {
            return Err(KleinError::NotSkew(defect));
        }
        Ok(Self { dim: r - 1, matrix })
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            matrix: DMatrix::zeros(dim + 1, dim + 1),
        }
    }

    /// `diag(0, w)` for `w ∈ so(n)`, the shape of connection matrices.
    pub fn block_diag(w: &DMatrix<f64>) -> Result<Self, KleinError> {
        let n = w.nrows();
        let mut m = DMatrix::zeros(n + 1, n + 1);
        m.view_mut((1, 1), (n, n)).copy_from(w);
        Self::new(m)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Largest entry of `|M + Mᵀ|`.
    pub fn skew_defect(&self) -> f64 {
        skew_defect(&self.matrix)
    }

    pub fn is_skew(&self) -> bool {
        self.skew_defect() <= SKEW_TOL
    }

    /// Max-norm distance to another element of the same dimension.
    pub fn distance(&self, other: &KleinElement) -> Result<f64, KleinError> {
        same_dim(self, other)?;
        Ok((&self.matrix - &other.matrix).amax())
    }

    pub fn scale(&self, s: f64) -> KleinElement {
        Self {
            dim: self.dim,
            matrix: &self.matrix * s,
        }
    }

    pub fn add(&self, other: &KleinElement) -> Result<KleinElement, KleinError> {
        same_dim(self, other)?;
        Ok(Self {
            dim: self.dim,
            matrix: &self.matrix + &other.matrix,
        })
    }
}

fn skew_defect(m: &DMatrix<f64>) -> f64 {
    (m + m.transpose()).amax()
}

fn same_dim(a: &KleinElement, b: &KleinElement) -> Result<(), KleinError> {
    if a.dim != b.dim {
        Err(KleinError::DimensionMismatch(a.dim, b.dim))
    } else {
        Ok(())
    }
}

/// `[[0, p], [−pᵀ, 0]]`.
pub fn embed_p(p: &HVector) -> KleinElement {
    let n = p.dim();
    let mut m = DMatrix::zeros(n + 1, n + 1);
    for (j, &x) in p.components().iter().enumerate() {
        m[(0, j + 1)] = x;
        m[(j + 1, 0)] = -x;
    }
    KleinElement { dim: n, matrix: m }
}

/// Cartan–Killing inner product `½ tr(aᵀb)`.
pub fn ck_inner(a: &KleinElement, b: &KleinElement) -> Result<f64, KleinError> {
    same_dim(a, b)?;
    Ok(0.5 * a.matrix.dot(&b.matrix))
}

/// Matrix commutator `ab − ba`.
pub fn bracket(a: &KleinElement, b: &KleinElement) -> Result<KleinElement, KleinError> {
    same_dim(a, b)?;
    let ab = &a.matrix * &b.matrix;
    let ba = &b.matrix * &a.matrix;
    Ok(KleinElement {
        dim: a.dim,
        matrix: ab - ba,
    })
}

/// Splits `p` into its component along `(1, 0, …, 0)` and the normal rest.
pub fn decompose(p: &HVector) -> (f64, HVector) {
    if p.dim() == 0 {
        return (0.0, HVector::zeros(0));
    }
    let perp = p.0.rows(1, p.dim() - 1).into_owned();
    (p.0[0], HVector(perp))
}

/// `[[0, a], [−aᵀ, b]]` in so(k+1) for `a ∈ Rᵏ`, `b ∈ so(k)`.
fn bordered(a: &HVector, b: Option<&DMatrix<f64>>) -> DMatrix<f64> {
    let k = a.dim();
    let mut m = DMatrix::zeros(k + 1, k + 1);
    for (j, &x) in a.components().iter().enumerate() {
        m[(0, j + 1)] = x;
        m[(j + 1, 0)] = -x;
    }
    if let Some(b) = b {
        m.view_mut((1, 1), (k, k)).copy_from(b);
    }
    m
}

/// Curve-flow parametrizations of the frame and connection matrices along
/// the arclength direction X and the flow direction Y.
pub mod flow_frame {
    use super::*;

    /// `e_X`: the embedded unit tangent in so(n+1).
    pub fn e_x(n: usize) -> KleinElement {
        embed_p(&HVector::tangent(n))
    }

    /// `e_Y`: the embedded flow direction `(e∥, e⊥)`.
    pub fn e_y(e_par: f64, e_perp: &HVector) -> KleinElement {
        embed_p(&HVector::from_parts(e_par, e_perp))
    }

    /// `Γ_X = diag(0, [[0, v], [−vᵀ, 0]])` for principal normal curvature `v ∈ R^{n−1}`.
    pub fn gamma_x(v: &HVector) -> KleinElement {
        KleinElement::block_diag(&bordered(v, None)).expect("bordered matrix is skew")
    }

    /// `Γ_Y = diag(0, [[0, ϖ], [−ϖᵀ, Θ]])` with `Θ ∈ so(n−1)`.
    pub fn gamma_y(varpi: &HVector, theta: &DMatrix<f64>) -> Result<KleinElement, KleinError> {
        if theta.nrows() != varpi.dim() || theta.ncols() != varpi.dim() {
            return Err(KleinError::DimensionMismatch(theta.nrows(), varpi.dim()));
        }
        KleinElement::block_diag(&bordered(varpi, Some(theta)))
    }

    /// `diag(0, e⊥-block)` with `e⊥-block = [[0, e⊥], [−e⊥ᵀ, 0]] ∈ so(n)`.
    pub fn perp_block(e_perp: &HVector) -> KleinElement {
        KleinElement::block_diag(&bordered(e_perp, None)).expect("bordered matrix is skew")
    }
}

/// One bracket identity evaluated on concrete inputs.
#[derive(Clone, Debug)]
pub struct IdentityResidual {
    pub name: &'static str,
    pub residual: f64,
}

/// Inputs for the structure-equation bracket identities of one sector.
#[derive(Clone, Debug)]
pub struct FrameSample {
    pub v: HVector,
    pub e_par: f64,
    pub e_perp: HVector,
    pub varpi: HVector,
    pub theta: DMatrix<f64>,
}

/// Evaluates the three frame bracket identities and the Cartan–Killing
/// identification on one sample of dimension `n = v.dim() + 1`:
///
/// * `[e_X, e_Y] = −diag(0, e⊥-block)`
/// * `[Γ_Y, e_X] = −embed(0, ϖ)`
/// * `[Γ_X, e_Y] = −embed(−v·e⊥, e∥ v)`
/// * `ck(embed p, embed q) = p·q` for `p = (e∥, e⊥)`, `q = (0, v)`
pub fn frame_identities(s: &FrameSample) -> Result<Vec<IdentityResidual>, KleinError> {
    use flow_frame::*;
    let k = s.v.dim();
    for d in [s.e_perp.dim(), s.varpi.dim()] {
        if d != k {
            return Err(KleinError::DimensionMismatch(d, k));
        }
    }
    let n = k + 1;
    let ex = e_x(n);
    let ey = e_y(s.e_par, &s.e_perp);
    let gx = gamma_x(&s.v);
    let gy = gamma_y(&s.varpi, &s.theta)?;

    let lhs1 = bracket(&ex, &ey)?;
    let rhs1 = perp_block(&s.e_perp).scale(-1.0);

    let lhs2 = bracket(&gy, &ex)?;
    let rhs2 = embed_p(&HVector::from_parts(0.0, &s.varpi)).scale(-1.0);

    let lhs3 = bracket(&gx, &ey)?;
    let rhs3 = embed_p(&HVector::from_parts(-s.v.dot(&s.e_perp), &s.v.scale(s.e_par))).scale(-1.0);

    let p = HVector::from_parts(s.e_par, &s.e_perp);
    let q = HVector::from_parts(0.0, &s.v);
    let ck = ck_inner(&embed_p(&p), &embed_p(&q))?;

    Ok(vec![
        IdentityResidual {
            name: "[e_X, e_Y] = -diag(0, e_perp block)",
            residual: lhs1.distance(&rhs1)?,
        },
        IdentityResidual {
            name: "[Gamma_Y, e_X] = -embed(0, varpi)",
            residual: lhs2.distance(&rhs2)?,
        },
        IdentityResidual {
            name: "[Gamma_X, e_Y] = -embed(-v.e_perp, e_par v)",
            residual: lhs3.distance(&rhs3)?,
        },
        IdentityResidual {
            name: "ck(embed p, embed q) = p.q",
            residual: (ck - p.dot(&q)).abs(),
        },
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hv(c: &[f64]) -> HVector {
        HVector::new(c.to_vec()).unwrap()
    }

    #[test]
    fn embed_examples() {
        let z = embed_p(&HVector::zeros(3));
        assert_eq!(z.matrix().amax(), 0.0);
        let e = embed_p(&hv(&[1.0, 0.0]));
        let want = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(e.matrix(), &want);
        assert!(e.is_skew());
    }

    #[test]
    fn ck_examples() {
        let p = embed_p(&hv(&[3.0, 4.0]));
        assert_eq!(ck_inner(&p, &p).unwrap(), 25.0);
        assert_eq!(ck_inner(&KleinElement::zero(2), &p).unwrap(), 0.0);
        assert!(ck_inner(&KleinElement::zero(3), &p).is_err());
    }

    #[test]
    fn bracket_self_is_zero() {
        let a = embed_p(&hv(&[0.3, -1.2, 2.0]));
        assert_eq!(bracket(&a, &a).unwrap().matrix().amax(), 0.0);
    }

    #[test]
    fn decompose_examples() {
        let (p, q) = decompose(&hv(&[1.0, 0.0, 0.0]));
        assert_eq!((p, q.components()), (1.0, &[0.0, 0.0][..]));
        let (p, q) = decompose(&hv(&[0.6, 0.8]));
        assert_eq!((p, q.components()), (0.6, &[0.8][..]));
        let back = HVector::from_parts(p, &q);
        assert_eq!(back.components(), &[0.6, 0.8]);
    }

    #[test]
    fn rejects_non_skew() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!(matches!(KleinElement::new(m), Err(KleinError::NotSkew(_))));
        assert!(matches!(
            KleinElement::new(DMatrix::zeros(2, 3)),
            Err(KleinError::BadShape(2, 3))
        ));
    }

    #[test]
    fn frame_identities_hold_on_sample() {
        let theta = DMatrix::from_row_slice(2, 2, &[0.0, 0.7, -0.7, 0.0]);
        let s = FrameSample {
            v: hv(&[0.4, -1.1]),
            e_par: 0.6,
            e_perp: hv(&[0.48, 0.64]),
            varpi: hv(&[2.0, 0.25]),
            theta,
        };
        for r in frame_identities(&s).unwrap() {
            assert!(r.residual <= 1e-12, "{}: {}", r.name, r.residual);
        }
    }
}
