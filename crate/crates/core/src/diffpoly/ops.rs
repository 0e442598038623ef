//! Variational derivative, formal integration and the Hamiltonian operators.

use num_traits::Zero;

use super::bivector::BivectorDiffPoly;
use super::lin::Lin;
use super::scalar::ScalarDiffPoly;
use super::text::ToText;
use super::vector::{VectorDiffPoly, VectorTerm};
use super::{int, ratio, DiffAlgebra, DiffPolyError};

impl DiffAlgebra {
    /// Variational derivative `δh/δv = Σ_j (−D)^j ∂h/∂v_j`.
    pub fn euler_operator(&self, h: &ScalarDiffPoly) -> Result<VectorDiffPoly, DiffPolyError> {
        let mut partials: Vec<Lin<VectorTerm>> = Vec::new();
        for (m, c) in h.terms() {
            for (pos, d) in m.dots().iter().enumerate() {
                let rest = m.without(pos);
                for (j, other) in [(d.lo(), d.hi()), (d.hi(), d.lo())] {
                    let j = j as usize;
                    if partials.len() <= j {
                        partials.resize_with(j + 1, Lin::zero);
                    }
                    partials[j].add_term(VectorTerm::new(rest.clone(), other), c.clone());
                }
            }
        }
        let mut out = VectorDiffPoly::zero();
        for (j, p) in partials.into_iter().enumerate() {
            let dj = self.total_derivative_n(&VectorDiffPoly(p), j)?;
            let sign = if j % 2 == 0 { int(1) } else { int(-1) };
            out += &(&dj * &sign);
        }
        Ok(out)
    }

    /// True iff `p` is a total derivative: no constant term and zero
    /// variational derivative.
    pub fn is_exact(&self, p: &ScalarDiffPoly) -> Result<bool, DiffPolyError> {
        Ok(p.constant_term().is_zero() && self.euler_operator(p)?.is_zero())
    }

    /// The unique `q` with zero constant term and `D q = p`.
    pub fn formal_integral(&self, p: &ScalarDiffPoly) -> Result<ScalarDiffPoly, DiffPolyError> {
        if !self.is_exact(p)? {
            return Err(DiffPolyError::NotExact(p.to_text('v')));
        }
        let mut out = ScalarDiffPoly::zero();
        for (w, part) in p.by_weight() {
            let red = self.scalar_echelon(w)?.reduce(&part.0);
            if !red.remainder.is_zero() {
                return Err(DiffPolyError::NotExact(ScalarDiffPoly(red.remainder).to_text('v')));
            }
            out += &ScalarDiffPoly(red.preimage);
        }
        Ok(out)
    }

    /// Canonical representative of `p` modulo total derivatives: every
    /// monomial that leads some element of `im D` is eliminated, so monomials
    /// with the highest derivative orders are traded for lower ones.
    pub fn normal_form(&self, p: &ScalarDiffPoly) -> Result<ScalarDiffPoly, DiffPolyError> {
        let mut out = ScalarDiffPoly::zero();
        for (w, part) in p.by_weight() {
            if w == 0 {
                out += &part;
                continue;
            }
            out += &ScalarDiffPoly(self.scalar_echelon(w)?.reduce(&part.0).remainder);
        }
        Ok(out)
    }

    /// Componentwise `D^{-1}` of a bivector expression.
    pub fn integrate_bivector(
        &self,
        p: &BivectorDiffPoly,
    ) -> Result<BivectorDiffPoly, DiffPolyError> {
        let mut out = BivectorDiffPoly::zero();
        for (w, part) in p.by_weight() {
            let red = self.bivector_echelon(w)?.reduce(&part.0);
            if !red.remainder.is_zero() {
                return Err(DiffPolyError::NotExact(format!(
                    "bivector expression with {} non-integrable terms",
                    red.remainder.len()
                )));
            }
            out += &BivectorDiffPoly(red.preimage);
        }
        Ok(out)
    }

    /// Symplectic operator `J(e) = D e + D^{-1}(<v, e>) v`.
    pub fn op_j(&self, e: &VectorDiffPoly) -> Result<VectorDiffPoly, DiffPolyError> {
        let de = self.total_derivative(e)?;
        let s = self.formal_integral(&e.dot_with_v(0))?;
        Ok(de + VectorDiffPoly::scalar_times_v(&s, 0))
    }

    /// Cosymplectic operator `H(ϖ) = D ϖ + v ⌋ D^{-1}(v ∧ ϖ)`.
    pub fn op_h(&self, varpi: &VectorDiffPoly) -> Result<VectorDiffPoly, DiffPolyError> {
        let dw = self.total_derivative(varpi)?;
        let b = self.integrate_bivector(&BivectorDiffPoly::wedge_v(0, varpi))?;
        Ok(dw + b.interior_v(0))
    }

    /// Recursion operator `R = H ∘ J`.
    pub fn op_r(&self, e: &VectorDiffPoly) -> Result<VectorDiffPoly, DiffPolyError> {
        self.op_h(&self.op_j(e)?)
    }

    /// Recovers a density `h` with `δh/δv = ϖ` by the homotopy formula
    /// `h = Σ_d <v, ϖ_d> / (d+1)` over the degree-`d` parts of `ϖ`, returned
    /// in normal form. Assumes `ϖ` is variational.
    pub fn density_from_covector(
        &self,
        varpi: &VectorDiffPoly,
    ) -> Result<ScalarDiffPoly, DiffPolyError> {
        let mut h = ScalarDiffPoly::zero();
        for (d, part) in varpi.by_degree() {
            h += &(&part.dot_with_v(0) * &ratio(1, d as i64 + 1));
        }
        self.normal_form(&h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffpoly::text::parse_vector;
    use crate::diffpoly::text::parse_scalar;

    fn alg() -> DiffAlgebra {
        DiffAlgebra::default()
    }

    fn s(t: &str) -> ScalarDiffPoly {
        parse_scalar(t, 'v').unwrap()
    }

    fn v(t: &str) -> VectorDiffPoly {
        parse_vector(t, 'v').unwrap()
    }

    #[test]
    fn integral_examples() {
        let a = alg();
        assert_eq!(a.formal_integral(&s("<v0,v1>")).unwrap(), s("1/2*<v0,v0>"));
        assert_eq!(
            a.formal_integral(&s("<v0,v3>")).unwrap(),
            s("<v0,v2> - 1/2*<v1,v1>")
        );
        assert!(matches!(
            a.formal_integral(&s("<v0,v0>")),
            Err(DiffPolyError::NotExact(_))
        ));
        assert!(matches!(
            a.formal_integral(&s("3")),
            Err(DiffPolyError::NotExact(_))
        ));
        assert!(a.formal_integral(&ScalarDiffPoly::zero()).unwrap().is_zero());
    }

    #[test]
    fn euler_examples() {
        let a = alg();
        assert_eq!(a.euler_operator(&s("1/2*<v0,v0>")).unwrap(), v("v0"));
        assert!(a.euler_operator(&s("<v0,v1>")).unwrap().is_zero());
        assert_eq!(
            a.euler_operator(&s("-1/2*<v1,v1> + 1/8*<v0,v0>^2")).unwrap(),
            v("v2 + 1/2*<v0,v0>*v0")
        );
    }

    #[test]
    fn operator_examples() {
        let a = alg();
        assert_eq!(a.op_j(&v("v1")).unwrap(), v("v2 + 1/2*<v0,v0>*v0"));
        assert_eq!(a.op_h(&v("v0")).unwrap(), v("v1"));
        assert!(a.op_h(&VectorDiffPoly::zero()).unwrap().is_zero());
        assert!(a.op_j(&VectorDiffPoly::zero()).unwrap().is_zero());
        assert_eq!(a.op_r(&v("v1")).unwrap(), v("v3 + 3/2*<v0,v0>*v1"));
    }

    #[test]
    fn normal_form_is_invariant_under_exact_shifts() {
        let a = alg();
        let h = s("1/2*<v2,v2> - 3/4*<v0,v0>*<v1,v1>");
        let shift = a.total_derivative(&s("<v0,v0>*<v0,v1> + <v1,v2>")).unwrap();
        assert_eq!(a.normal_form(&(&h + &shift)).unwrap(), a.normal_form(&h).unwrap());
    }
}
