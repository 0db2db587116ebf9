//! Randomized structural invariants: measure recurrences, operator
//! adjointness and contraction, decomposition identities, walk stochasticity,
//! pseudorandomness monotonicity.

use std::sync::Arc;

use num_integer::binomial;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hdx_core::decompose::{bottom_up_explicit, bottom_up_recursive, HdBasis};
use hdx_core::generators::{
    complete_complex, hypercube_point, hypercube_vertex, random_complex, random_sparse_boolean,
};
use hdx_core::localization::{garland_localize, garland_restrict};
use hdx_core::spectral::{approximate_eigenvalues, st_rank};
use hdx_core::walks::{assemble_walk, down, up, WalkSpec, WalkTerm};
use hdx_core::{pseudorandomness, FaceFunction, SimplicialComplex};

fn arb_complex() -> impl Strategy<Value = Arc<SimplicialComplex>> {
    (4usize..9, 2usize..4, 5usize..20, any::<u64>()).prop_map(|(n, d, tops, seed)| {
        let d = d.min(n - 1);
        let cap = binomial(n as u64, d as u64) as usize;
        let tops = tops.clamp(1, cap);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        random_complex(n, d, tops, &mut rng).unwrap()
    })
}

fn rand_fn(x: &Arc<SimplicialComplex>, level: usize, seed: u64) -> FaceFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vals = (0..x.num_faces(level))
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    FaceFunction::new(Arc::clone(x), level, vals).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn measure_recurrence_and_normalization(x in arb_complex()) {
        for level in 0..=x.dim() {
            let total: f64 = x.pi(level).iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-12, "level {level} sums to {total}");
        }
        // π_i(τ) = (1/(i+1)) Σ_{σ ⊃ τ} π_{i+1}(σ)
        for level in 0..x.dim() {
            let mut acc = vec![0.0f64; x.num_faces(level)];
            let pi_up = x.pi(level + 1);
            for (r, _) in x.faces(level + 1) {
                let y = x.face(level + 1, r);
                for tau in y.subsets(level) {
                    acc[x.rank_of(&tau).unwrap()] += pi_up[r];
                }
            }
            for (r, &pi) in x.pi(level).iter().enumerate() {
                let pred = acc[r] / (level as f64 + 1.0);
                prop_assert!((pi - pred).abs() < 1e-12);
                prop_assert!(pi > 0.0, "measure must be strictly positive");
            }
        }
    }

    #[test]
    fn faces_are_downward_closed(x in arb_complex()) {
        for level in 1..=x.dim() {
            for (r, _) in x.faces(level) {
                let f = x.face(level, r);
                for sub in f.subsets(level - 1) {
                    prop_assert!(x.rank_of(&sub).is_some(), "{sub} missing below {f}");
                }
            }
        }
    }

    #[test]
    fn link_measure_is_renormalized_parent_measure(x in arb_complex()) {
        let d = x.dim();
        for j in 1..d {
            let tau = x.face(j, 0);
            let link = x.link(&tau).unwrap();
            let m = link.complex.dim();
            let choose = binomial((j + m) as u64, j as u64) as f64;
            let denom = choose * x.pi(j)[0];
            for (r, _) in link.complex.faces(m) {
                let parent_face = link.face_in_parent(m, r);
                let pr = x.rank_of(&parent_face).unwrap();
                let expect = x.pi(j + m)[pr] / denom;
                prop_assert!((link.complex.pi(m)[r] - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn up_down_adjoint(x in arb_complex(), s1 in any::<u64>(), s2 in any::<u64>()) {
        for i in 1..=x.dim() {
            let f = rand_fn(&x, i, s1);
            let g = rand_fn(&x, i - 1, s2);
            let lhs = f.inner(&up(&g).unwrap()).unwrap();
            let rhs = down(&f).unwrap().inner(&g).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-12, "level {i}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn averaging_contracts_every_norm(x in arb_complex(), seed in any::<u64>()) {
        let d = x.dim();
        let f = rand_fn(&x, d - 1, seed);
        let uf = up(&f).unwrap();
        prop_assert!(uf.l1_norm() <= f.l1_norm() + 1e-12);
        prop_assert!(uf.l2_norm() <= f.l2_norm() + 1e-12);
        prop_assert!(uf.sup_norm() <= f.sup_norm() + 1e-12);
        let g = rand_fn(&x, d, seed ^ 1);
        let dg = down(&g).unwrap();
        prop_assert!(dg.l1_norm() <= g.l1_norm() + 1e-12);
        prop_assert!(dg.l2_norm() <= g.l2_norm() + 1e-12);
        prop_assert!(dg.sup_norm() <= g.sup_norm() + 1e-12);
    }

    #[test]
    fn noise_walk_coefficients_are_a_distribution(k in 1usize..6, rho in 0.01f64..0.99) {
        let spec = WalkSpec::noise(k, rho).unwrap();
        prop_assert!((spec.weight() - 1.0).abs() < 1e-12);
        for term in &spec.terms {
            prop_assert!(term.coeff > 0.0);
        }
    }

    #[test]
    fn bottom_up_variants_agree_and_reconstruct(x in arb_complex(), seed in any::<u64>()) {
        let k = x.dim();
        let f = rand_fn(&x, k, seed);
        let rec = bottom_up_recursive(&f).unwrap();
        let exp = bottom_up_explicit(&f).unwrap();
        for i in 0..=k {
            let diff = rec.g[i].sub(&exp.g[i]).unwrap().sup_norm();
            prop_assert!(diff < 1e-12, "g_{i} differs by {diff}");
        }
        let back = exp.reconstruct().unwrap();
        let err = back.sub(&f).unwrap().l2_norm();
        prop_assert!(err < 1e-9 * f.l2_norm().max(1.0), "reconstruction off by {err}");
    }

    #[test]
    fn hypercube_point_round_trips(n in 1usize..11, mask in any::<u32>()) {
        let mask = mask & ((1u32 << n) - 1);
        let p = hypercube_point(n, mask);
        let mut back = 0u32;
        for coord in 1..=n {
            if p.contains(hypercube_vertex(coord, 1)) {
                back |= 1 << (coord - 1);
            } else {
                assert!(p.contains(hypercube_vertex(coord, 0)));
            }
        }
        prop_assert_eq!(back, mask);
    }

    #[test]
    fn pseudorandomness_grows_with_level(x in arb_complex(), seed in any::<u64>(), alpha in 0.1f64..0.9) {
        let k = x.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_sparse_boolean(&x, k, alpha, &mut rng).unwrap();
        let mut prev = -1.0f64;
        for i in 0..k {
            let rep = pseudorandomness(&f, i).unwrap();
            prop_assert!(rep.eps + 1e-12 >= prev, "eps dropped at level {i}");
            prop_assert!(rep.eps_sq <= rep.eps_mean + 1e-12, "nonnegative f");
            prev = rep.eps;
        }
    }

    #[test]
    fn st_rank_is_monotone_in_delta(d1 in 0.0f64..1.2, d2 in 0.0f64..1.2) {
        let (lo, hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        let x = complete_complex(8, 2).unwrap();
        let basis = HdBasis::new(&x, 2).unwrap();
        let profile = approximate_eigenvalues(&x, &WalkSpec::lower(2), &basis).unwrap();
        prop_assert!(st_rank(&profile, lo).unwrap() >= st_rank(&profile, hi).unwrap());
        prop_assert_eq!(st_rank(&profile, 1.0).unwrap(), 0);
    }

    #[test]
    fn garland_identities_are_exact(x in arb_complex(), seed in any::<u64>()) {
        let k = x.dim();
        let f = rand_fn(&x, k, seed);
        for i in 0..k {
            let (lhs, rhs) = garland_restrict(&f, i).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-12, "restrict split at i={i}");
        }
        // localizing needs room above the function's level: level + i ≤ dim
        let g = rand_fn(&x, 1, seed ^ 7);
        for i in 0..=k - 1 {
            let (lhs, rhs) = garland_localize(&g, i).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-12, "localize split at i={i}");
        }
    }

    #[test]
    fn assembled_walks_are_stochastic_and_self_adjoint(
        x in arb_complex(),
        mix in 0.05f64..0.95,
    ) {
        // convex mix of the lower walk and the identity at the top level;
        // assemble_walk rejects anything non-stochastic or non-self-adjoint
        let k = x.dim();
        let mut spec = WalkSpec::lower(k);
        for t in &mut spec.terms {
            t.coeff *= mix;
        }
        spec.terms.push(WalkTerm {
            coeff: 1.0 - mix,
            word: vec![],
        });
        let m = assemble_walk(&x, &spec).unwrap();
        for s in m.row_sums() {
            prop_assert!((s - 1.0).abs() < 1e-9);
        }
        prop_assert!(m.pi_self_adjoint_residual().unwrap() < 1e-9);
    }
}
