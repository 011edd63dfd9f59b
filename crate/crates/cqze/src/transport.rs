//! Two-round transport of Bob's qubit onto Alice's photon polarization.
//!
//! The abstract circuit: two CNOTs with Hadamards in between swap an unknown
//! qubit onto a fresh |0⟩ wire. Here the CNOT is the two-module gate with Bob
//! as control, so the same wiring moves Bob's superposition onto the photon,
//! round by round:
//!
//! 1. Alice sends an H photon through the gate; both parties apply Hadamards.
//! 2. She sends the photon back through; the exit measurement at D0 picks a
//!    branch; both parties apply Hadamards again, and on the D0 branch Alice
//!    adds an X.
//!
//! Either way the photon ends in α|H⟩ + β|V⟩ while Bob's object collapses
//! toward a basis state. The module carries exact two-qubit oracles for the
//! abstract circuit alongside the full amplitude-level pipeline, plus a
//! closed-form-comparable transfer overlap (see [`run_transport`]).

use num_complex::Complex64;

use crate::amplitudes::{
    BobBasis, Gate, JointState, Outcome, PathMode, PhotonMode, Polarization, QubitAmplitudes,
    BOB_BASIS,
};
use crate::analysis::ExitBranch;
use crate::cnot::{
    branch_probability, dual_cqze_run, exit_port, path_state, project_branch,
    recombine_exit_paths, BranchPolicy, ExitElement,
};
use crate::error::Result;
use crate::zeno::{module_modes, relabel_module_exit, run_chained, ChainHistory, CycleConfig, HistoryMode};

/// Amplitudes over |bob, alice⟩ ∈ {|00⟩, |01⟩, |10⟩, |11⟩}.
pub type TwoQubit = [Complex64; 4];

fn cnot_gate(v: TwoQubit) -> TwoQubit {
    [v[0], v[1], v[3], v[2]]
}

fn hh_gate(v: TwoQubit) -> TwoQubit {
    let h = Complex64::new(0.5, 0.0);
    [
        (v[0] + v[1] + v[2] + v[3]) * h,
        (v[0] - v[1] + v[2] - v[3]) * h,
        (v[0] + v[1] - v[2] - v[3]) * h,
        (v[0] - v[1] - v[2] + v[3]) * h,
    ]
}

fn iz_gate(v: TwoQubit) -> TwoQubit {
    [v[0], -v[1], v[2], -v[3]]
}

fn ix_gate(v: TwoQubit) -> TwoQubit {
    [v[1], v[0], v[3], v[2]]
}

fn swap_circuit_input(input: &QubitAmplitudes) -> TwoQubit {
    let zero = Complex64::new(0.0, 0.0);
    [input.a0(), zero, input.a1(), zero]
}

/// Intermediate states of the plain swap circuit
/// (CNOT, H⊗H, CNOT, H⊗H applied to (α|0⟩+β|1⟩) ⊗ |0⟩), input first.
pub fn circuit_swap_stages(input: &QubitAmplitudes) -> [TwoQubit; 5] {
    let s0 = swap_circuit_input(input);
    let s1 = cnot_gate(s0);
    let s2 = hh_gate(s1);
    let s3 = cnot_gate(s2);
    let s4 = hh_gate(s3);
    [s0, s1, s2, s3, s4]
}

/// Final state of the plain swap circuit: |0⟩ ⊗ (α|0⟩+β|1⟩).
pub fn circuit_swap_oracle(input: &QubitAmplitudes) -> TwoQubit {
    circuit_swap_stages(input)[4]
}

/// Intermediate states of the swap circuit variant with Z before the second
/// CNOT and X at the end (the D0-branch wiring), input first.
pub fn circuit_swap_z_stages(input: &QubitAmplitudes) -> [TwoQubit; 7] {
    let s0 = swap_circuit_input(input);
    let s1 = cnot_gate(s0);
    let s2 = hh_gate(s1);
    let s3 = iz_gate(s2);
    let s4 = cnot_gate(s3);
    let s5 = hh_gate(s4);
    let s6 = ix_gate(s5);
    [s0, s1, s2, s3, s4, s5, s6]
}

/// Final state of the Z/X variant: |1⟩ ⊗ (α|0⟩+β|1⟩).
pub fn circuit_swap_z_oracle(input: &QubitAmplitudes) -> TwoQubit {
    circuit_swap_z_stages(input)[6]
}

/// The state the protocol aims for on a given branch, in
/// [`crate::cnot::JOINT_BASIS`] order: Bob collapsed to pass (main branch) or
/// block (D0 branch), photon carrying his original amplitudes.
pub fn branch_target(branch: ExitBranch, bob: &QubitAmplitudes) -> TwoQubit {
    let zero = Complex64::new(0.0, 0.0);
    match branch {
        ExitBranch::MainPath => [bob.a0(), bob.a1(), zero, zero],
        ExitBranch::D0Path => [zero, zero, bob.a0(), bob.a1()],
    }
}

/// Outcome of one full transport run.
#[derive(Clone, Debug)]
pub struct TransportResult {
    pub branch: ExitBranch,
    /// Probability that the photon survives to this branch's exit port.
    pub success_probability: f64,
    /// Overlap |⟨target|ψ⟩|² between the branch target and the renormalized
    /// surviving state.
    pub fidelity: f64,
    /// Photon polarization conditioned on Bob ending in the branch's basis
    /// state; `None` when nothing survives.
    pub alice_output: Option<QubitAmplitudes>,
    /// Bob's amplitudes conditioned on the photon carrying the target
    /// polarization state.
    pub bob_residual: Option<QubitAmplitudes>,
    /// √2·Re⟨target|ψ⟩ of the unnormalized surviving state, with the
    /// round-1 residual unconverted component removed before round 2. This
    /// is the quantity the closed-form transfer bracket computes.
    pub transfer_overlap: f64,
    /// Same overlap for the untouched coherent pipeline.
    pub coherent_overlap: f64,
    /// Exit-port probabilities [main, D0] before the measurement.
    pub branch_probabilities: [f64; 2],
    /// Probability eaten by the discard detectors and Bob across both rounds.
    pub loss_probability: f64,
    /// Cycle traces for round 1 and round 2 (empty under
    /// [`HistoryMode::None`]).
    pub trace: [ChainHistory; 2],
}

/// Feeds the photon on `beam` back into the entry splitter: its H component
/// restarts on the H-module's outer arm, its V component on the V-module's.
fn reenter(state: &mut JointState, beam: PathMode) {
    let mh = module_modes(Polarization::H);
    let mv = module_modes(Polarization::V);
    for b in BOB_BASIS {
        let h = state.take_amp(b, PhotonMode::live(beam, Polarization::H));
        let v = state.take_amp(b, PhotonMode::live(beam, Polarization::V));
        state.set_amp(b, mh.outer, h);
        state.set_amp(b, mv.outer, v);
    }
}

fn second_round(
    state: &mut JointState,
    cfg: CycleConfig,
    history: HistoryMode,
) -> Result<ChainHistory> {
    state.apply_polarization_gate(Gate::H);
    state.apply_bob_gate(Gate::H);
    reenter(state, PathMode::UpperPath);
    let hist = run_chained(
        state,
        &[
            module_modes(Polarization::H),
            module_modes(Polarization::V),
        ],
        cfg,
        history,
    );
    relabel_module_exit(state, Polarization::H);
    relabel_module_exit(state, Polarization::V);
    recombine_exit_paths(state)?;
    Ok(hist)
}

fn finish_branch(state: &mut JointState, branch: ExitBranch) -> f64 {
    let p = project_branch(state, branch);
    state.apply_polarization_gate(Gate::H);
    state.apply_bob_gate(Gate::H);
    if branch == ExitBranch::D0Path {
        state.apply_polarization_gate(Gate::X);
    }
    p
}

/// Full transport run with no per-step recording.
pub fn run_transport(
    bob: &QubitAmplitudes,
    cfg: CycleConfig,
    policy: BranchPolicy,
) -> Result<TransportResult> {
    run_transport_with(bob, cfg, policy, HistoryMode::None)
}

/// Full transport run.
///
/// Alongside the coherent pipeline, a second copy of the state is evolved
/// with the round-1 block-sector amplitude that kept the input polarization
/// removed. The closed-form transfer bracket treats that residual component
/// as riding along without interfering, so the stripped copy's final overlap
/// matches the bracket to rounding; the coherent copy's overlap is reported
/// next to it and the gap between them measures how much that approximation
/// hides.
pub fn run_transport_with(
    bob: &QubitAmplitudes,
    cfg: CycleConfig,
    policy: BranchPolicy,
    history: HistoryMode,
) -> Result<TransportResult> {
    let (mut state, hist1) = dual_cqze_run(
        &QubitAmplitudes::basis0(),
        bob,
        cfg,
        ExitElement::Direct,
        history,
    )?;

    let mut stripped = state.clone();
    stripped.take_amp(
        BobBasis::Block,
        PhotonMode::live(PathMode::UpperPath, Polarization::H),
    );

    let hist2 = second_round(&mut state, cfg, history)?;
    second_round(&mut stripped, cfg, HistoryMode::None)?;

    let branch_probabilities = [
        branch_probability(&state, ExitBranch::MainPath),
        branch_probability(&state, ExitBranch::D0Path),
    ];
    let branch = match policy {
        BranchPolicy::ForceMain => ExitBranch::MainPath,
        BranchPolicy::ForceD0 => ExitBranch::D0Path,
        BranchPolicy::FollowAmplitudes => {
            if branch_probabilities[1] > branch_probabilities[0] {
                ExitBranch::D0Path
            } else {
                ExitBranch::MainPath
            }
        }
    };
    let loss_probability =
        state.terminal(Outcome::D3) + state.terminal(Outcome::BobAbsorbed);

    let success_probability = finish_branch(&mut state, branch);
    finish_branch(&mut stripped, branch);

    let target = branch_target(branch, bob);
    let psi = path_state(&state, exit_port(branch));
    let psi_stripped = path_state(&stripped, exit_port(branch));
    let overlap_with = |v: &TwoQubit| -> Complex64 {
        target
            .iter()
            .zip(v)
            .map(|(t, a)| t.conj() * a)
            .sum::<Complex64>()
            * std::f64::consts::SQRT_2
    };
    let transfer_overlap = overlap_with(&psi_stripped).re;
    let coherent = overlap_with(&psi);
    let coherent_overlap = coherent.re;

    let norm_sqr: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
    let (fidelity, alice_output, bob_residual) = if norm_sqr > 1e-30 {
        let fidelity = coherent.norm_sqr() / (2.0 * norm_sqr);
        let row = match branch {
            ExitBranch::MainPath => (psi[0], psi[1]),
            ExitBranch::D0Path => (psi[2], psi[3]),
        };
        let alice = QubitAmplitudes::normalized(row.0, row.1).ok();
        let residual = QubitAmplitudes::normalized(
            bob.a0().conj() * psi[0] + bob.a1().conj() * psi[1],
            bob.a0().conj() * psi[2] + bob.a1().conj() * psi[3],
        )
        .ok();
        (fidelity, alice, residual)
    } else {
        (0.0, None, None)
    };

    Ok(TransportResult {
        branch,
        success_probability,
        fidelity,
        alice_output,
        bob_residual,
        transfer_overlap,
        coherent_overlap,
        branch_probabilities,
        loss_probability,
        trace: [hist1, hist2],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{fidelity_closed_form, pass_exit_amplitude, recursion_eps_eta};
    use crate::TOL_EXACT;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn qubit(a0: Complex64, a1: Complex64) -> QubitAmplitudes {
        QubitAmplitudes::normalized(a0, a1).unwrap()
    }

    fn assert4(v: &TwoQubit, want: &TwoQubit, tol: f64) {
        for k in 0..4 {
            assert!((v[k] - want[k]).norm() < tol, "component {k}: {:?} vs {:?}", v[k], want[k]);
        }
    }

    #[test]
    fn swap_stage_lines_for_general_input() {
        let input = qubit(c(0.6, 0.2), c(-0.3, 0.7));
        let (a, b) = (input.a0(), input.a1());
        let zero = c(0.0, 0.0);
        let half = 0.5;
        let stages = circuit_swap_stages(&input);
        assert4(&stages[0], &[a, zero, b, zero], 1e-15);
        assert4(&stages[1], &[a, zero, zero, b], 1e-15);
        let (p, m) = ((a + b) * half, (a - b) * half);
        assert4(&stages[2], &[p, m, m, p], 1e-15);
        assert4(&stages[3], &[p, m, p, m], 1e-15);
        assert4(&stages[4], &[a, b, zero, zero], 1e-15);
    }

    #[test]
    fn swap_z_stage_lines_for_general_input() {
        let input = qubit(c(0.48, -0.11), c(0.31, 0.81));
        let (a, b) = (input.a0(), input.a1());
        let zero = c(0.0, 0.0);
        let half = 0.5;
        let stages = circuit_swap_z_stages(&input);
        let (p, m) = ((a + b) * half, (a - b) * half);
        assert4(&stages[2], &[p, m, m, p], 1e-15);
        assert4(&stages[3], &[p, -m, m, -p], 1e-15);
        assert4(&stages[4], &[p, -m, -p, m], 1e-15);
        assert4(&stages[5], &[zero, zero, b, a], 1e-15);
        assert4(&stages[6], &[zero, zero, a, b], 1e-15);
    }

    #[test]
    fn swap_oracle_basis_and_equal_inputs() {
        let out = circuit_swap_oracle(&QubitAmplitudes::basis0());
        assert4(&out, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)], 1e-15);
        let eq = QubitAmplitudes::equal_superposition();
        let out = circuit_swap_oracle(&eq);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert4(&out, &[c(r, 0.0), c(r, 0.0), c(0.0, 0.0), c(0.0, 0.0)], 1e-15);
    }

    #[test]
    fn swap_z_oracle_basis_rows() {
        let out = circuit_swap_z_oracle(&QubitAmplitudes::basis0());
        assert4(&out, &[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)], 1e-15);
        let out = circuit_swap_z_oracle(&QubitAmplitudes::basis1());
        assert4(&out, &[c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)], 1e-15);
    }

    #[test]
    fn transfer_overlap_equals_closed_form_bracket() {
        let bob = QubitAmplitudes::equal_superposition();
        for (m, n) in [(5u32, 20u32), (10, 80), (15, 300)] {
            let cfg = CycleConfig::new(m, n).unwrap();
            for (policy, branch) in [
                (BranchPolicy::ForceMain, ExitBranch::MainPath),
                (BranchPolicy::ForceD0, ExitBranch::D0Path),
            ] {
                let r = run_transport(&bob, cfg, policy).unwrap();
                let closed = fidelity_closed_form(m, n, &bob, branch).unwrap();
                assert!(
                    (r.transfer_overlap - closed).abs() < 1e-12,
                    "({m},{n}) {branch:?}: {} vs {closed}",
                    r.transfer_overlap
                );
            }
        }
    }

    #[test]
    fn transfer_overlap_matches_bracket_for_complex_bob() {
        let bob = qubit(c(0.48, 0.31), c(-0.62, 0.54));
        let cfg = CycleConfig::new(10, 80).unwrap();
        let r = run_transport(&bob, cfg, BranchPolicy::ForceMain).unwrap();
        let closed = fidelity_closed_form(10, 80, &bob, ExitBranch::MainPath).unwrap();
        assert!((r.transfer_overlap - closed).abs() < 1e-12);
    }

    #[test]
    fn coherent_gap_is_the_uninterfered_cross_term() {
        // for real Bob amplitudes the coherent pipeline differs from the
        // bracket by αβ·ε·(g−ε−η)/2 on the main branch
        let bob = QubitAmplitudes::equal_superposition();
        for (m, n) in [(5u32, 20u32), (10, 80)] {
            let cfg = CycleConfig::new(m, n).unwrap();
            let r = run_transport(&bob, cfg, BranchPolicy::ForceMain).unwrap();
            let rec = recursion_eps_eta(m, n).unwrap();
            let g = pass_exit_amplitude(m);
            let predicted = 0.5 * 0.5 * rec.eps * (g - rec.eps - rec.eta);
            let gap = r.coherent_overlap - r.transfer_overlap;
            assert!((gap - predicted).abs() < 1e-12, "({m},{n}): {gap} vs {predicted}");
        }
    }

    #[test]
    fn pass_only_bob_transports_exactly() {
        // with β = 0 nothing is dropped, so the stripped and coherent
        // overlaps coincide with the bracket at any size, and the final state
        // is (g+ε+η)|pass,H⟩ + (g−ε−η)|block,H⟩ up to scale
        let bob = QubitAmplitudes::basis0();
        let cfg = CycleConfig::new(5, 50).unwrap();
        let r = run_transport(&bob, cfg, BranchPolicy::ForceMain).unwrap();
        let closed = fidelity_closed_form(5, 50, &bob, ExitBranch::MainPath).unwrap();
        assert!((r.transfer_overlap - closed).abs() < 1e-12);
        assert!((r.coherent_overlap - closed).abs() < 1e-12);
        let rec = recursion_eps_eta(5, 50).unwrap();
        let (g, sigma) = (pass_exit_amplitude(5), rec.eps + rec.eta);
        let expected_fid =
            (g + sigma).powi(2) / ((g + sigma).powi(2) + (g - sigma).powi(2));
        assert!((r.fidelity - expected_fid).abs() < TOL_EXACT);
        let alice = r.alice_output.unwrap();
        assert!((alice.a0().norm() - 1.0).abs() < TOL_EXACT);
    }

    #[test]
    fn checkpoint_fidelity_at_moderate_size() {
        // frozen: joint renormalized fidelity 0.999613636, main-port
        // probability 0.413247 at (25, 320), equal superposition
        let bob = QubitAmplitudes::equal_superposition();
        let cfg = CycleConfig::new(25, 320).unwrap();
        let r = run_transport(&bob, cfg, BranchPolicy::ForceMain).unwrap();
        assert!(r.fidelity > 0.86);
        assert!((r.fidelity - 0.999_613_636).abs() < 1e-7);
        assert!((r.success_probability - 0.413_247).abs() < 1e-6);
        assert!(r.transfer_overlap > 0.86);
        assert!((r.transfer_overlap - 0.909_191_024).abs() < 1e-8);
    }

    #[test]
    fn asymptotic_transport_of_basis_state() {
        // frozen: fidelity 0.999983902 at (100, 5000), pure pass Bob
        let bob = QubitAmplitudes::basis0();
        let cfg = CycleConfig::new(100, 5000).unwrap();
        let r = run_transport(&bob, cfg, BranchPolicy::FollowAmplitudes).unwrap();
        assert!(r.fidelity >= 0.999);
        assert!((r.fidelity - 0.999_983_902).abs() < 1e-7);
        let alice = r.alice_output.unwrap();
        assert!(alice.a0().norm_sqr() > 0.999);
    }

    #[test]
    fn branch_equivalence_in_the_asymptotic_regime() {
        let bob = qubit(c(0.21, -0.63), c(0.52, 0.53));
        let cfg = CycleConfig::new(100, 5000).unwrap();
        let main = run_transport(&bob, cfg, BranchPolicy::ForceMain).unwrap();
        let d0 = run_transport(&bob, cfg, BranchPolicy::ForceD0).unwrap();
        let (a, b) = (main.alice_output.unwrap(), d0.alice_output.unwrap());
        let infidelity_gap = 1.0 - a.fidelity_with(&b);
        assert!(infidelity_gap < 1e-3, "gap {infidelity_gap}");
        // Bob's leftover collapses to a different basis state per branch
        let rm = main.bob_residual.unwrap();
        let rd = d0.bob_residual.unwrap();
        assert!(rm.a1().norm_sqr() < 1e-3);
        assert!(rd.a0().norm_sqr() < 1e-3);
    }

    #[test]
    fn both_branches_score_against_their_own_oracle() {
        let bob = qubit(c(0.6, 0.0), c(0.0, 0.8));
        let cfg = CycleConfig::new(100, 5000).unwrap();
        for (policy, oracle) in [
            (BranchPolicy::ForceMain, circuit_swap_oracle(&bob)),
            (BranchPolicy::ForceD0, circuit_swap_z_oracle(&bob)),
        ] {
            let r = run_transport(&bob, cfg, policy).unwrap();
            // the oracle's two-qubit output in joint-basis order equals the
            // branch target, so the reported fidelity is exactly the overlap
            // with the oracle state
            let target = branch_target(r.branch, &bob);
            assert4(&oracle, &target, 1e-15);
            assert!(r.fidelity >= 0.999);
        }
    }

    #[test]
    fn probabilities_account_for_everything() {
        let bob = qubit(c(0.9, 0.1), c(0.2, -0.38));
        let cfg = CycleConfig::new(8, 40).unwrap();
        let r = run_transport(&bob, cfg, BranchPolicy::ForceMain).unwrap();
        let total = r.branch_probabilities[0] + r.branch_probabilities[1] + r.loss_probability;
        assert!((total - 1.0).abs() < 1e-9);
        assert!((r.success_probability - r.branch_probabilities[0]).abs() < TOL_EXACT);
    }

    #[test]
    fn traces_cover_both_rounds() {
        let bob = QubitAmplitudes::equal_superposition();
        let cfg = CycleConfig::new(4, 6).unwrap();
        let r = run_transport_with(
            &bob,
            cfg,
            BranchPolicy::ForceMain,
            HistoryMode::Boundaries,
        )
        .unwrap();
        assert_eq!(r.trace[0].len(), 4 * 7);
        assert_eq!(r.trace[1].len(), 4 * 7);
        // round 2 continues the cumulative loss record of round 1
        let r1_last_d3 = *r.trace[0].cum_d3.last().unwrap();
        assert!(r.trace[1].cum_d3[0] >= r1_last_d3 - TOL_EXACT);
    }

    #[test]
    fn runs_are_deterministic() {
        let bob = qubit(c(0.3, 0.4), c(0.5, -0.2));
        let cfg = CycleConfig::new(7, 23).unwrap();
        let a = run_transport(&bob, cfg, BranchPolicy::FollowAmplitudes).unwrap();
        let b = run_transport(&bob, cfg, BranchPolicy::FollowAmplitudes).unwrap();
        assert_eq!(a.branch, b.branch);
        assert!(a.fidelity == b.fidelity);
        assert!(a.transfer_overlap == b.transfer_overlap);
        assert!(a.success_probability == b.success_probability);
    }

    #[test]
    fn degenerate_single_cycle_run_does_not_panic() {
        // M = 1 sends the pass amplitude entirely into the discard detector,
        // so a pure-pass Bob leaves nothing alive
        let bob = QubitAmplitudes::basis0();
        let cfg = CycleConfig::new(1, 1).unwrap();
        let r = run_transport(&bob, cfg, BranchPolicy::ForceMain).unwrap();
        assert!(r.success_probability < TOL_EXACT);
        assert_eq!(r.fidelity, 0.0);
        assert!(r.alice_output.is_none());
    }
}
