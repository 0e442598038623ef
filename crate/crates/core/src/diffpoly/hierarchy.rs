//! The bi-Hamiltonian mKdV hierarchy generated by `R = H ∘ J`.

use serde::{Deserialize, Serialize};

use super::scalar::ScalarDiffPoly;
use super::vector::VectorDiffPoly;
use super::{Coeff, DiffAlgebra, DiffPolyError};

/// Which half of the h/v splitting a hierarchy lives in. The two sectors
/// carry identical algebra; only the symbol naming the variable differs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sector {
    #[serde(alias = "h")]
    Horizontal,
    #[serde(alias = "v")]
    Vertical,
}

impl Sector {
    /// Symbol of the curvature vector in text output: `v` (h-sector) or `w` (v-sector).
    pub fn symbol(self) -> char {
        match self {
            Sector::Horizontal => 'v',
            Sector::Vertical => 'w',
        }
    }

    pub fn short_name(self) -> &'static str {
        match self {
            Sector::Horizontal => "h",
            Sector::Vertical => "v",
        }
    }
}

/// One rung `(e⊥^(k), ϖ^(k), H^(k))` of the hierarchy.
#[derive(Clone, Debug, PartialEq)]
pub struct HierarchyLevel {
    pub k: usize,
    /// The flow `e⊥^(k) = R^k(v_1)`, weight `2 + 2k`.
    pub flow: VectorDiffPoly,
    /// The covector `ϖ^(k) = J(e⊥^(k−1))`, weight `1 + 2k`.
    pub covector: VectorDiffPoly,
    /// The Hamiltonian density with `δH^(k)/δv = ϖ^(k)`, weight `2 + 2k`.
    pub hamiltonian: ScalarDiffPoly,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Hierarchy {
    pub sector: Sector,
    pub levels: Vec<HierarchyLevel>,
}

impl Hierarchy {
    /// The same expressions attributed to the other sector.
    pub fn renamed(&self, sector: Sector) -> Hierarchy {
        Hierarchy {
            sector,
            levels: self.levels.clone(),
        }
    }
}

/// `flow − c · level_k_flow`: the constant-curvature correction of a flow.
pub fn constant_curvature_shift(
    flow: &VectorDiffPoly,
    level_k_flow: &VectorDiffPoly,
    curvature_const: &Coeff,
) -> VectorDiffPoly {
    flow - &(level_k_flow * curvature_const)
}

impl DiffAlgebra {
    /// Levels `0..=k_max` from `e⊥^(0) = v_1`, `ϖ^(0) = v` by
    /// `ϖ^(k+1) = J(e⊥^(k))`, `e⊥^(k+1) = H(ϖ^(k+1))`.
    pub fn generate_hierarchy(
        &self,
        k_max: usize,
        sector: Sector,
    ) -> Result<Hierarchy, DiffPolyError> {
        let needed = 2 * k_max as u32 + 1;
        if needed > self.max_order() as u32 {
            return Err(DiffPolyError::LevelBudget {
                levels: k_max,
                needed,
                cap: self.max_order(),
            });
        }
        let mut levels = Vec::with_capacity(k_max + 1);
        let mut flow = VectorDiffPoly::v(1);
        let mut covector = VectorDiffPoly::v(0);
        for k in 0..=k_max {
            if k > 0 {
                covector = self.op_j(&flow)?;
                flow = self.op_h(&covector)?;
            }
            let hamiltonian = self.density_from_covector(&covector)?;
            levels.push(HierarchyLevel {
                k,
                flow: flow.clone(),
                covector: covector.clone(),
                hamiltonian,
            });
        }
        Ok(Hierarchy { sector, levels })
    }

    /// The explicit alternative Hamiltonian operator, realized as `R ∘ H`.
    pub fn op_alt_h(&self, varpi: &VectorDiffPoly) -> Result<VectorDiffPoly, DiffPolyError> {
        self.op_r(&self.op_h(varpi)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffpoly::text::{parse_scalar, parse_vector, ToText};
    use crate::diffpoly::{int, ScalingWeight, Weighted};

    #[test]
    fn first_levels() {
        let a = DiffAlgebra::default();
        let h = a.generate_hierarchy(2, Sector::Horizontal).unwrap();
        let l0 = &h.levels[0];
        assert_eq!(l0.flow.to_text('v'), "v1");
        assert_eq!(l0.covector.to_text('v'), "v0");
        assert_eq!(l0.hamiltonian.to_text('v'), "1/2*<v0,v0>");
        assert_eq!(
            h.levels[1].hamiltonian,
            parse_scalar("-1/2*<v1,v1> + 1/8*<v0,v0>^2", 'v').unwrap()
        );
        assert_eq!(
            h.levels[2].hamiltonian,
            parse_scalar(
                "1/2*<v2,v2> - 3/4*<v0,v0>*<v1,v1> - 1/2*<v0,v1>^2 + 1/16*<v0,v0>^3",
                'v'
            )
            .unwrap()
        );
        assert_eq!(
            h.levels[2].flow,
            parse_vector(
                "v5 + 5/2*<v0,v0>*v3 + 5*<v0,v1>*v2 + 5*<v0,v2>*v1 + 5/2*<v1,v1>*v1 \
                 + 15/8*<v0,v0>^2*v1",
                'v'
            )
            .unwrap()
        );
    }

    #[test]
    fn weights_follow_level() {
        let a = DiffAlgebra::default();
        let h = a.generate_hierarchy(3, Sector::Vertical).unwrap();
        for l in &h.levels {
            let k = l.k as u32;
            assert_eq!(l.flow.scaling_weight(), ScalingWeight::Weight(2 + 2 * k));
            assert_eq!(l.covector.scaling_weight(), ScalingWeight::Weight(1 + 2 * k));
            assert_eq!(l.hamiltonian.scaling_weight(), ScalingWeight::Weight(2 + 2 * k));
        }
    }

    #[test]
    fn budget_is_checked() {
        let a = DiffAlgebra::new(6);
        assert!(matches!(
            a.generate_hierarchy(3, Sector::Horizontal),
            Err(DiffPolyError::LevelBudget { .. })
        ));
    }

    #[test]
    fn curvature_shift() {
        let f = VectorDiffPoly::v(3);
        let g = VectorDiffPoly::v(1);
        assert_eq!(constant_curvature_shift(&f, &g, &int(0)), f);
        assert_eq!(
            constant_curvature_shift(&f, &g, &int(2)),
            parse_vector("v3 - 2*v1", 'v').unwrap()
        );
    }

    #[test]
    fn sector_symbols() {
        assert_eq!(Sector::Horizontal.symbol(), 'v');
        assert_eq!(Sector::Vertical.symbol(), 'w');
    }
}
