//! Row-echelon bases of the image of `D` in one weight, with preimages.
//!
//! Reducing an expression against the basis yields its unique remainder
//! supported on non-leading basis elements (the normal form modulo total
//! derivatives) together with an antiderivative of the reduced part.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::lin::Lin;
use super::{Coeff, DiffPolyError};

#[derive(Debug)]
struct Row<K: Ord> {
    image: Lin<K>,
    lead: Coeff,
    preimage: Lin<K>,
}

#[derive(Debug)]
pub(crate) struct Echelon<K: Ord> {
    rows: BTreeMap<K, Row<K>>,
}

pub(crate) struct Reduction<K: Ord> {
    pub remainder: Lin<K>,
    pub preimage: Lin<K>,
}

impl<K: Ord + Clone> Echelon<K> {
    /// Builds the basis from `D` applied to every element of `basis`.
    pub fn build(
        basis: Vec<K>,
        derive: impl Fn(&K) -> Result<Lin<K>, DiffPolyError>,
    ) -> Result<Self, DiffPolyError> {
        let mut rows: BTreeMap<K, Row<K>> = BTreeMap::new();
        for b in basis {
            let mut image = derive(&b)?;
            let mut preimage = Lin::single(b, Coeff::one());
            while let Some((k, c)) = image.leading().map(|(k, c)| (k.clone(), c.clone())) {
                match rows.get(&k) {
                    Some(row) => {
                        let f = -(c / &row.lead);
                        image.add_scaled(&row.image, &f);
                        preimage.add_scaled(&row.preimage, &f);
                    }
                    None => {
                        rows.insert(
                            k,
                            Row {
                                image,
                                lead: c,
                                preimage,
                            },
                        );
                        break;
                    }
                }
            }
        }
        Ok(Self { rows })
    }

    #[cfg(test)]
    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Fully reduces `p`: every term is either eliminated against a row or
    /// moved to the remainder, from the leading term downwards.
    pub fn reduce(&self, p: &Lin<K>) -> Reduction<K> {
        let mut work = p.clone();
        let mut remainder = Lin::zero();
        let mut preimage = Lin::zero();
        while let Some((k, c)) = work.pop_leading() {
            match self.rows.get(&k) {
                Some(row) => {
                    let f = c / &row.lead;
                    // The leading term was popped; subtract the rest of the row.
                    for (rk, rc) in row.image.iter() {
                        if *rk != k {
                            work.add_term(rk.clone(), -(rc * &f));
                        }
                    }
                    preimage.add_scaled(&row.preimage, &f);
                }
                None => remainder.add_term(k, c),
            }
        }
        debug_assert!(remainder.iter().all(|(_, c)| !c.is_zero()));
        Reduction {
            remainder,
            preimage,
        }
    }
}
