use fracflow::diffpoly::eval::{CompiledVector, JetField};
use fracflow::diffpoly::text::{parse_scalar, parse_vector, ToText};
use fracflow::diffpoly::{
    int, ratio, DiffAlgebra, Dot, Monomial, ScalarDiffPoly, ScalingWeight, Sector, VectorDiffPoly,
    VectorTerm, Weighted,
};
use proptest::prelude::*;

fn monomial_strategy(max_order: u8) -> impl Strategy<Value = Monomial> {
    prop::collection::vec((0..=max_order, 0..=max_order), 1..=3)
        .prop_map(|pairs| Monomial::new(pairs.into_iter().map(|(i, j)| Dot::new(i, j)).collect()))
}

fn scalar_strategy(max_order: u8) -> impl Strategy<Value = ScalarDiffPoly> {
    prop::collection::vec((monomial_strategy(max_order), -6i64..=6, 1i64..=4), 1..=4).prop_map(
        |terms| ScalarDiffPoly::from_terms(terms.into_iter().map(|(m, n, d)| (m, ratio(n, d)))),
    )
}

fn vector_strategy(max_order: u8) -> impl Strategy<Value = VectorDiffPoly> {
    prop::collection::vec(
        (
            prop::collection::vec((0..=max_order, 0..=max_order), 0..=2),
            0..=max_order,
            -6i64..=6,
            1i64..=4,
        ),
        1..=4,
    )
    .prop_map(|terms| {
        VectorDiffPoly::from_terms(terms.into_iter().map(|(pairs, j, n, d)| {
            let mono = Monomial::new(pairs.into_iter().map(|(a, b)| Dot::new(a, b)).collect());
            (VectorTerm::new(mono, j), ratio(n, d))
        }))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn euler_operator_annihilates_total_derivatives(p in scalar_strategy(4)) {
        let a = DiffAlgebra::default();
        let dp = a.total_derivative(&p).unwrap();
        prop_assert!(a.euler_operator(&dp).unwrap().is_zero());
        prop_assert!(a.is_exact(&dp).unwrap());
        // The antiderivative is unique up to a constant.
        let back = a.formal_integral(&dp).unwrap();
        let diff = &back - &p;
        prop_assert!((&diff - &ScalarDiffPoly::constant(diff.constant_term())).is_zero());
    }

    #[test]
    fn euler_kernel_is_exactly_the_exact_part(p in scalar_strategy(3)) {
        let a = DiffAlgebra::default();
        let p = &p - &ScalarDiffPoly::constant(p.constant_term());
        let nf = a.normal_form(&p).unwrap();
        prop_assert_eq!(a.euler_operator(&p).unwrap().is_zero(), nf.is_zero());
        prop_assert_eq!(a.euler_operator(&p).unwrap(), a.euler_operator(&nf).unwrap());
    }

    #[test]
    fn scalar_text_round_trip(p in scalar_strategy(5), sym in prop::sample::select(vec!['v', 'w'])) {
        let text = p.to_text(sym);
        prop_assert_eq!(parse_scalar(&text, sym).unwrap(), p);
    }

    #[test]
    fn vector_text_round_trip(p in vector_strategy(5), sym in prop::sample::select(vec!['v', 'w'])) {
        let text = p.to_text(sym);
        prop_assert_eq!(parse_vector(&text, sym).unwrap(), p);
    }

    #[test]
    fn total_derivative_raises_weight_by_one(p in scalar_strategy(4)) {
        let a = DiffAlgebra::default();
        let dp = a.total_derivative(&p).unwrap();
        for (w, part) in p.by_weight() {
            if w == 0 {
                continue;
            }
            let dpart = a.total_derivative(&part).unwrap();
            prop_assert_eq!(dpart.scaling_weight(), ScalingWeight::Weight(w + 1));
        }
        prop_assert!(dp.constant_term() == int(0));
    }
}

#[test]
fn bi_hamiltonian_chain_closes() {
    let a = DiffAlgebra::default();
    for sector in [Sector::Horizontal, Sector::Vertical] {
        let h = a.generate_hierarchy(3, sector).unwrap();
        for (k, l) in h.levels.iter().enumerate() {
            assert_eq!(a.euler_operator(&l.hamiltonian).unwrap(), l.covector, "k = {k}");
            assert_eq!(a.op_h(&l.covector).unwrap(), l.flow, "k = {k}");
            if k > 0 {
                let prev = &h.levels[k - 1];
                assert_eq!(a.op_j(&prev.flow).unwrap(), l.covector, "k = {k}");
                assert_eq!(a.op_r(&prev.flow).unwrap(), l.flow, "k = {k}");
            }
        }
    }
}

#[test]
fn hierarchy_weights_up_to_level_four() {
    let a = DiffAlgebra::default();
    let h = a.generate_hierarchy(4, Sector::Horizontal).unwrap();
    for l in &h.levels {
        let k = l.k as u32;
        assert_eq!(l.flow.scaling_weight(), ScalingWeight::Weight(2 + 2 * k));
        assert_eq!(l.covector.scaling_weight(), ScalingWeight::Weight(1 + 2 * k));
        assert_eq!(l.hamiltonian.scaling_weight(), ScalingWeight::Weight(2 + 2 * k));
        assert_eq!(l.flow.max_order(), Some(1 + 2 * k as u8));
    }
}

#[test]
fn hierarchy_text_round_trips() {
    let a = DiffAlgebra::default();
    let h = a.generate_hierarchy(4, Sector::Vertical).unwrap();
    for l in &h.levels {
        assert_eq!(parse_vector(&l.flow.to_text('w'), 'w').unwrap(), l.flow);
        assert_eq!(parse_scalar(&l.hamiltonian.to_text('w'), 'w').unwrap(), l.hamiltonian);
    }
}

/// Exact jets of a two-component trigonometric profile at `nodes` points of
/// `[0, 2π)`; `orders[j]` holds `v_j`.
fn trig_jets(nodes: usize, max_order: usize) -> JetField {
    // (amplitude, frequency, phase) triples per component.
    let modes: [&[(f64, f64, f64)]; 2] = [
        &[(0.8, 1.0, 0.0), (0.5, 2.0, -0.5)],
        &[(0.3, 1.0, -0.5), (0.2, 3.0, 0.0)],
    ];
    let h = 2.0 * std::f64::consts::PI / nodes as f64;
    let orders = (0..=max_order)
        .map(|j| {
            (0..nodes)
                .flat_map(|i| {
                    let l = i as f64 * h;
                    modes.map(|m| {
                        m.iter()
                            .map(|&(a, k, p)| {
                                // d^j/dl^j cos(k l + p π) = k^j cos(k l + (p + j/2) π)
                                a * k.powi(j as i32)
                                    * (k * l + (p + 0.5 * j as f64) * std::f64::consts::PI).cos()
                            })
                            .sum::<f64>()
                    })
                })
                .collect()
        })
        .collect();
    JetField { components: 2, orders }
}

/// Jets of the field `p(v)`: `D^m p` evaluated from the exact jets of `v`.
fn image_jets(a: &DiffAlgebra, p: &VectorDiffPoly, base: &JetField, max_order: usize) -> JetField {
    let orders = (0..=max_order)
        .map(|m| {
            let dp = a.total_derivative_n(p, m).unwrap();
            base.eval_vector(&CompiledVector::new(&dp), Default::default())
        })
        .collect();
    JetField { components: base.components, orders }
}

fn split(jets: &JetField, node: usize) -> Vec<&[f64]> {
    let c = jets.components;
    jets.orders.iter().map(|o| &o[node * c..(node + 1) * c]).collect()
}

fn linearized(op: &CompiledVector, base: &JetField, dual: &JetField) -> Vec<f64> {
    let c = base.components;
    let mut out = vec![0.0; base.nodes() * c];
    for n in 0..base.nodes() {
        op.eval_linearized(&split(base, n), &split(dual, n), &mut out[n * c..(n + 1) * c]);
    }
    out
}

/// Max-norm of `K_i'[K_j] − K_j'[K_i]` and of its two terms.
fn bracket(a: &DiffAlgebra, ki: &VectorDiffPoly, kj: &VectorDiffPoly, base: &JetField) -> (f64, f64) {
    let ij = linearized(&CompiledVector::new(ki), base, &image_jets(a, kj, base, 5));
    let ji = linearized(&CompiledVector::new(kj), base, &image_jets(a, ki, base, 5));
    let scale = ij.iter().chain(&ji).fold(0.0f64, |m, x| m.max(x.abs()));
    let diff = ij.iter().zip(&ji).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    (diff, scale)
}

#[test]
fn flows_commute_numerically() {
    let a = DiffAlgebra::default();
    let h = a.generate_hierarchy(2, Sector::Horizontal).unwrap();
    let base = trig_jets(200, 11);
    for (i, j) in [(0, 1), (1, 2), (0, 2)] {
        let (diff, scale) = bracket(&a, &h.levels[i].flow, &h.levels[j].flow, &base);
        assert!(scale > 1.0, "degenerate test profile for ({i}, {j})");
        assert!(diff <= 1e-12 * scale, "[K{i}, K{j}] = {diff:e} (scale {scale:e})");
    }
}

#[test]
fn non_hierarchy_flows_do_not_commute() {
    // Sanity check of the bracket: v_3 and |v|^2 v_1 separately do not commute.
    let a = DiffAlgebra::default();
    let base = trig_jets(200, 11);
    let f = VectorDiffPoly::v(3);
    let g = VectorDiffPoly::scalar_times_v(&ScalarDiffPoly::dot(0, 0), 1);
    let (diff, scale) = bracket(&a, &f, &g, &base);
    assert!(diff > 1e-2 * scale, "{diff:e} vs {scale:e}");
}
