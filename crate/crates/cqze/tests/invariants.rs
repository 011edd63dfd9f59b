//! Property tests over randomized inputs: recursion/engine agreement,
//! probability accounting, branch relations and sweep budget semantics.

use proptest::prelude::*;

use cqze::analysis::{
    efficiency_closed_form, fidelity_closed_form, recursion_eps_eta, recursion_trajectory,
    ExitBranch,
};
use cqze::cnot::{
    branch_probability, dual_cqze_run, measure_d0, path_state, BranchPolicy, ExitElement,
};
use cqze::sweep::{sim_cost, sweep_serial, Quantity, SweepSpec};
use cqze::transport::run_transport;
use cqze::zeno::{cqze_outer_run_with, plain_modes, HistoryMode};
use cqze::{BobBasis, Complex64, CycleConfig, Outcome, PathMode, QubitAmplitudes};

fn arb_qubit() -> impl Strategy<Value = QubitAmplitudes> {
    (
        -1.0f64..1.0,
        -1.0f64..1.0,
        -1.0f64..1.0,
        -1.0f64..1.0,
    )
        .prop_filter_map("qubit must have nonzero norm", |(r0, i0, r1, i1)| {
            QubitAmplitudes::normalized(Complex64::new(r0, i0), Complex64::new(r1, i1)).ok()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn engine_block_exit_scales_recursion_by_input_amplitude(
        bob in arb_qubit(),
        m in 1u32..=8,
        n in 1u32..=24,
    ) {
        let cfg = CycleConfig::new(m, n).unwrap();
        let (s, _) = cqze_outer_run_with(&bob, cfg, HistoryMode::None).unwrap();
        let r = recursion_eps_eta(m, n).unwrap();
        let modes = plain_modes();
        prop_assert!((s.amp(BobBasis::Block, modes.outer) - bob.a1() * r.eps).norm() < 1e-12);
        prop_assert!((s.amp(BobBasis::Block, modes.inner) - bob.a1() * r.eta).norm() < 1e-12);
        prop_assert!((s.total_norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn closed_form_quantities_are_probabilities(
        bob in arb_qubit(),
        m in 1u32..=40,
        n in 1u32..=400,
    ) {
        let eff = efficiency_closed_form(m, n, &bob).unwrap();
        prop_assert!((0.0..=1.0).contains(&eff), "efficiency {eff}");
        for branch in [ExitBranch::MainPath, ExitBranch::D0Path] {
            let fid = fidelity_closed_form(m, n, &bob, branch).unwrap();
            prop_assert!(fid <= 1.0 + 1e-12, "fidelity {fid}");
        }
    }

    #[test]
    fn blocked_exit_norm_never_grows_along_the_recursion(
        m in 1u32..=30,
        n in 1u32..=200,
    ) {
        let steps = recursion_trajectory(CycleConfig::new(m, n).unwrap());
        let mut prev = f64::INFINITY;
        for st in steps {
            let norm = st.eps * st.eps + st.eta * st.eta;
            prop_assert!(norm <= prev + 1e-12);
            prev = norm;
        }
    }

    #[test]
    fn gate_probability_accounting_closes(
        photon in arb_qubit(),
        bob in arb_qubit(),
        m in 1u32..=6,
        n in 1u32..=12,
    ) {
        let cfg = CycleConfig::new(m, n).unwrap();
        let (state, _) =
            dual_cqze_run(&photon, &bob, cfg, ExitElement::Bs50, HistoryMode::None).unwrap();
        let p_main = branch_probability(&state, ExitBranch::MainPath);
        let p_d0 = branch_probability(&state, ExitBranch::D0Path);
        let d3 = state.terminal(Outcome::D3);
        let absorbed = state.terminal(Outcome::BobAbsorbed);
        prop_assert!((p_main + p_d0 + d3 + absorbed - 1.0).abs() < 1e-9);

        let out = measure_d0(state, BranchPolicy::FollowAmplitudes);
        prop_assert!(out.branch_probability >= p_main.min(p_d0) - 1e-15);
        prop_assert!((out.loss_probability - (d3 + absorbed)).abs() < 1e-15);
    }

    #[test]
    fn sibling_branches_differ_only_by_lower_beam_sign(
        photon in arb_qubit(),
        bob in arb_qubit(),
    ) {
        let cfg = CycleConfig::new(4, 9).unwrap();
        let (a, _) =
            dual_cqze_run(&photon, &bob, cfg, ExitElement::Bs50, HistoryMode::None).unwrap();
        let flipped = QubitAmplitudes::new(photon.a0(), -photon.a1()).unwrap();
        let (b, _) =
            dual_cqze_run(&flipped, &bob, cfg, ExitElement::Bs50, HistoryMode::None).unwrap();
        let main_of_flipped = path_state(&b, PathMode::LowerPath);
        let d0_of_original = path_state(&a, PathMode::UpperPath);
        for k in 0..4 {
            prop_assert!((main_of_flipped[k] - d0_of_original[k]).norm() < 1e-14);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn transport_accounting_and_transfer_identity(bob in arb_qubit()) {
        let cfg = CycleConfig::new(5, 20).unwrap();
        let res = run_transport(&bob, cfg, BranchPolicy::ForceMain).unwrap();
        let other = res.branch_probabilities[1];
        prop_assert!(
            (res.success_probability + other + res.loss_probability - 1.0).abs() < 1e-9
        );
        prop_assert!((0.0..=1.0 + 1e-12).contains(&res.fidelity));
        let closed = fidelity_closed_form(5, 20, &bob, ExitBranch::MainPath).unwrap();
        prop_assert!((res.transfer_overlap - closed).abs() < 1e-9);
    }

    #[test]
    fn sweep_budget_partitions_cells_exactly(cap in 0u64..2000) {
        let spec = SweepSpec {
            m_values: vec![2, 5, 9],
            n_values: vec![3, 17, 31],
            bob: QubitAmplitudes::equal_superposition(),
            quantity: Quantity::Efficiency,
            with_simulation: true,
            sim_cost_cap: cap,
        };
        let grid = sweep_serial(&spec).unwrap();
        for cell in &grid.cells {
            let within = sim_cost(cell.m, cell.n, Quantity::Efficiency) <= cap;
            prop_assert_eq!(cell.simulated.is_some(), within);
        }
    }
}
