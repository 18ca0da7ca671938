use contractlab_core::hardness::{gen_random_finite, gen_random_fosd_cdfp, gen_random_unstructured};
use contractlab_core::{
    best_response_ccdf, best_response_finite, kol_distance, optimal_bounded_contract, optimal_general_contract,
    optimal_linear_contract, principal_utility, tv_distance, Action, Contract, Distribution, FiniteInstance,
    OutcomeSpace, PiecewiseLinearFn, TIE_TOL, TOL,
};
use proptest::prelude::*;

fn pmf(m: usize) -> impl Strategy<Value = Distribution> {
    prop::collection::vec(prop_oneof![1 => Just(0.0), 4 => 0.01f64..1.0], m).prop_filter_map("all zero", |w| {
        let s: f64 = w.iter().sum();
        (s > 0.0).then(|| Distribution::new(w.iter().map(|x| x / s).collect()).unwrap())
    })
}

fn pmf_pair() -> impl Strategy<Value = (Distribution, Distribution)> {
    (2usize..8).prop_flat_map(|m| (pmf(m), pmf(m)))
}

/// Half random, half structured, so both verdicts of the checks show up.
fn small_instance() -> impl Strategy<Value = FiniteInstance> {
    (2usize..=4, 1usize..=6, any::<u64>(), any::<bool>()).prop_map(|(m, n, seed, structured)| {
        if structured {
            gen_random_finite(m, n, seed).unwrap()
        } else {
            gen_random_unstructured(m, n, seed).unwrap()
        }
    })
}

fn brute_fosd(inst: &FiniteInstance) -> bool {
    let a = inst.actions();
    a.iter().all(|x| {
        a.iter().all(|y| x.cost < y.cost || x.dist.ccdf().iter().zip(y.dist.ccdf()).all(|(fx, fy)| *fx >= fy - TOL))
    })
}

fn brute_cdfp(inst: &FiniteInstance) -> bool {
    let a = inst.actions();
    for l in a {
        for k in a {
            for r in a {
                if !(l.cost < k.cost && k.cost < r.cost) {
                    continue;
                }
                let t = (k.cost - l.cost) / (r.cost - l.cost);
                let (fl, fk, fr) = (l.dist.ccdf(), k.dist.ccdf(), r.dist.ccdf());
                if (1..inst.m()).any(|w| fk[w] < (1.0 - t) * fl[w] + t * fr[w] - TOL) {
                    return false;
                }
            }
        }
    }
    true
}

fn scaled(inst: &FiniteInstance, s: f64) -> FiniteInstance {
    let os = OutcomeSpace::new(inst.outcomes().values().iter().map(|v| v * s).collect()).unwrap();
    let actions = inst.actions().iter().map(|a| Action::new(a.cost * s, a.dist.clone())).collect();
    FiniteInstance::new(os, actions).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn kol_at_most_tv((d, e) in pmf_pair()) {
        let (k, t) = (kol_distance(&d, &e).unwrap(), tv_distance(&d, &e).unwrap());
        prop_assert!(k <= t + 1e-12);
        prop_assert!(t <= 1.0 + 1e-12);
        prop_assert!(tv_distance(&d, &d).unwrap() == 0.0);
    }

    #[test]
    fn pmf_ccdf_roundtrip((d, _) in pmf_pair()) {
        let back = Distribution::from_ccdf_tail(&d.ccdf()[1..]);
        for (a, b) in back.pmf().iter().zip(d.pmf()) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn structure_checks_match_brute_force(inst in small_instance()) {
        let fosd = brute_fosd(&inst);
        prop_assert_eq!(inst.check_fosd().is_ok(), fosd);
        if fosd {
            prop_assert_eq!(inst.check_cdfp().is_ok(), brute_cdfp(&inst));
        }
    }

    #[test]
    fn opt_h_invariant_under_action_permutation(m in 2usize..5, n in 2usize..7, seed: u64, rot in 0usize..7, h in 1.0f64..8.0) {
        let inst = gen_random_unstructured(m, n, seed).unwrap();
        let mut actions = inst.actions().to_vec();
        let k = rot % actions.len();
        actions.rotate_left(k);
        actions.reverse();
        let perm = FiniteInstance::new(inst.outcomes().clone(), actions).unwrap();
        let a = optimal_bounded_contract(&inst, h).unwrap().principal_utility;
        let b = optimal_bounded_contract(&perm, h).unwrap().principal_utility;
        prop_assert!((a - b).abs() <= 1e-8, "{} vs {}", a, b);
    }

    #[test]
    fn optimal_contract_is_certified(m in 2usize..5, n in 1usize..7, seed: u64, h in 1.0f64..8.0) {
        let inst = gen_random_unstructured(m, n, seed).unwrap();
        let opt = optimal_bounded_contract(&inst, h).unwrap();
        prop_assert!(opt.contract.is_bounded_by(h + TOL));
        let br = best_response_finite(&inst, &opt.contract).unwrap();
        prop_assert!(br.agent_utility >= -TIE_TOL);
        prop_assert!((br.principal_utility - opt.principal_utility).abs() <= 1e-7);
        let a = &inst.actions()[opt.action];
        let agent = a.dist.expect(opt.contract.payments()) - a.cost;
        prop_assert!(agent >= -TIE_TOL, "IR violated: {}", agent);
    }

    #[test]
    fn scaling_values_costs_and_h(m in 2usize..5, n in 2usize..6, seed: u64, h in 5.0f64..10.0, s in 0.2f64..1.0) {
        let inst = gen_random_unstructured(m, n, seed).unwrap();
        let a = optimal_bounded_contract(&inst, h).unwrap().principal_utility;
        let b = optimal_bounded_contract(&scaled(&inst, s), h * s).unwrap().principal_utility;
        prop_assert!((a * s - b).abs() <= 1e-7, "{} vs {}", a * s, b);
    }

    #[test]
    fn opt_h_nondecreasing_in_h(m in 2usize..5, n in 2usize..7, seed: u64, h in 1.0f64..6.0, dh in 0.0f64..6.0) {
        let inst = gen_random_unstructured(m, n, seed).unwrap();
        let lo = optimal_bounded_contract(&inst, h).unwrap().principal_utility;
        let hi = optimal_bounded_contract(&inst, h + dh).unwrap().principal_utility;
        prop_assert!(hi >= lo - 1e-8);
    }

    #[test]
    fn lin_below_opt_1_below_opt(m in 2usize..5, n in 2usize..7, seed: u64) {
        let inst = gen_random_finite(m, n, seed).unwrap();
        let lin = optimal_linear_contract(&inst).unwrap().lin;
        let opt1 = optimal_bounded_contract(&inst, 1.0).unwrap().principal_utility;
        let general = optimal_general_contract(&inst).unwrap();
        let opt = principal_utility(&inst, &general.contract).unwrap();
        prop_assert!(lin <= opt1 + 1e-8, "LIN {} > OPT_1 {}", lin, opt1);
        prop_assert!(opt1 <= opt + 1e-8, "OPT_1 {} > OPT {}", opt1, opt);
    }

    #[test]
    fn ccdf_best_response_beats_grid(m in 2usize..5, k in 1usize..4, seed: u64, raw in prop::collection::vec(0.0f64..4.0, 4)) {
        let inst = gen_random_fosd_cdfp(m, k, seed).unwrap();
        let mut pay = raw[..m].to_vec();
        pay[0] = 0.0;
        let contract = Contract::new(pay.clone()).unwrap();
        let br = best_response_ccdf(&inst, &contract).unwrap();
        let at = |c: f64| inst.distribution_at(c).expect(&pay) - c;
        prop_assert!((at(br.cost) - br.agent_utility).abs() <= 1e-9);
        let grid_max = (0..=10_000).map(|i| at(i as f64 / 10_000.0)).fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(br.agent_utility >= grid_max - 1e-9, "{} < grid {}", br.agent_utility, grid_max);
    }

    #[test]
    fn pwl_inverse_of_eval(ys in prop::collection::vec(0.001f64..1.0, 1..8), x in 0.0f64..1.0) {
        let n = ys.len();
        let mut acc = 0.0;
        let pts: Vec<(f64, f64)> = std::iter::once((0.0, 0.0))
            .chain(ys.iter().enumerate().map(|(i, dy)| {
                acc += dy;
                ((i + 1) as f64 / n as f64, acc)
            }))
            .collect();
        let f = PiecewiseLinearFn::new(pts).unwrap();
        let y = f.eval(x).unwrap();
        let back = f.inverse(y).unwrap();
        prop_assert!((back - x).abs() <= 1e-8, "{} vs {}", back, x);
        prop_assert!((f.eval(back).unwrap() - y).abs() <= 1e-12);
    }

    #[test]
    fn to_ccdf_reproduces_actions_exactly(m in 2usize..6, n in 1usize..8, seed: u64) {
        let inst = gen_random_finite(m, n, seed).unwrap();
        let ccdf = inst.to_ccdf_instance().unwrap();
        for a in inst.actions() {
            let got = ccdf.ccdf_at(a.cost);
            let want = a.dist.ccdf();
            for w in 1..m {
                prop_assert_eq!(got[w].to_bits(), want[w].clamp(0.0, 1.0).to_bits(), "ω = {}, cost {}", w, a.cost);
            }
        }
    }
}
