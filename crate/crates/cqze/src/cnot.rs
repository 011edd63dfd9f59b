//! The two-module gate.
//!
//! A polarizing splitter feeds the H component of Alice's photon into the
//! H-input module (upper beam) and the V component into the V-input module
//! (lower beam). Both modules run their chained cycles against the same Bob,
//! who blocks or passes both channels together. For the exiting photon the
//! entry splitter is swapped for a 50:50 one, which rotates the path qubit so
//! that one output port carries the gate's logic output and the other is
//! watched by the nondemolition detector D0.
//!
//! With Bob as control and the photon's polarization as target, the surviving
//! renormalized output approaches the CNOT truth table as the cycle counts
//! grow.

use num_complex::Complex64;

use crate::amplitudes::{
    BobBasis, JointState, Outcome, PathMode, PhotonMode, Polarization, QubitAmplitudes, BOB_BASIS,
};
pub use crate::analysis::ExitBranch;
use crate::error::Result;
use crate::zeno::{
    module_modes, relabel_module_exit, run_chained, ChainHistory, CycleConfig, HistoryMode,
};

/// The element at the gate's left port.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SplitterKind {
    /// Polarizing: routes H to the upper beam, V to the lower beam. The
    /// entry-side element.
    Pbs,
    /// 50:50: rotates the (upper, lower) path pair by a quarter turn. The
    /// exit-side element.
    Bs50,
}

/// What the exiting photon meets before leaving the gate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitElement {
    /// No recombination; the exit beams keep their path labels. Used when
    /// the input was a single polarization, so only one beam is occupied.
    Direct,
    /// The 50:50 recombination feeding the D0 measurement.
    Bs50,
}

/// How the D0 measurement's branch is chosen in this deterministic setting.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BranchPolicy {
    /// Take the port holding more probability (ties go to the main port).
    FollowAmplitudes,
    ForceMain,
    ForceD0,
}

/// One measured branch of the gate.
#[derive(Clone, Debug)]
pub struct CnotOutcome {
    pub branch: ExitBranch,
    /// Probability of the photon being found in this branch's port.
    pub branch_probability: f64,
    /// In-branch state, renormalized (empty when the branch probability
    /// vanishes).
    pub joint_output: JointState,
    /// Probability lost to the discard detector and to Bob's absorber before
    /// the exit measurement.
    pub loss_probability: f64,
}

/// Action of the left-port splitter on Alice's photon, as (path, amplitude)
/// components.
///
/// For [`SplitterKind::Pbs`] the pair (a0, a1) is read as polarization
/// amplitudes (λ, μ); the upper component carries H and the lower V. For
/// [`SplitterKind::Bs50`] the pair is read as already-split path amplitudes
/// (upper, lower), and the quarter-turn rotation sends their sum to the
/// lower port and their difference to the upper port, each scaled by 1/√2.
pub fn split_input(photon: &QubitAmplitudes, splitter: SplitterKind) -> Vec<(PathMode, Complex64)> {
    match splitter {
        SplitterKind::Pbs => vec![
            (PathMode::UpperPath, photon.a0()),
            (PathMode::LowerPath, photon.a1()),
        ],
        SplitterKind::Bs50 => {
            let r = std::f64::consts::FRAC_1_SQRT_2;
            let (u, l) = (photon.a0(), photon.a1());
            vec![
                (PathMode::UpperPath, (u - l) * r),
                (PathMode::LowerPath, (u + l) * r),
            ]
        }
    }
}

/// Applies the exit 50:50 rotation to a two-beam joint state, polarization by
/// polarization.
pub fn recombine_exit_paths(state: &mut JointState) -> Result<()> {
    for pol in [Polarization::H, Polarization::V] {
        state.rotate_pair(
            PhotonMode::live(PathMode::UpperPath, pol),
            PhotonMode::live(PathMode::LowerPath, pol),
            std::f64::consts::FRAC_PI_4,
            None,
        )?;
    }
    Ok(())
}

/// Which beam a branch's photon leaves on: the main output is the lower
/// beam, D0 watches the upper one.
pub fn exit_port(branch: ExitBranch) -> PathMode {
    match branch {
        ExitBranch::MainPath => PathMode::LowerPath,
        ExitBranch::D0Path => PathMode::UpperPath,
    }
}

/// Probability currently sitting on a branch's exit port.
pub fn branch_probability(state: &JointState, branch: ExitBranch) -> f64 {
    let path = exit_port(branch);
    BOB_BASIS
        .iter()
        .flat_map(|&b| {
            [Polarization::H, Polarization::V]
                .into_iter()
                .map(move |p| state.amp(b, PhotonMode::live(path, p)).norm_sqr())
        })
        .sum()
}

/// Removes the port not followed by `branch`, booking its probability as
/// taken by the exit measurement. Returns the surviving branch probability.
pub fn project_branch(state: &mut JointState, branch: ExitBranch) -> f64 {
    let other = match branch {
        ExitBranch::MainPath => ExitBranch::D0Path,
        ExitBranch::D0Path => ExitBranch::MainPath,
    };
    for pol in [Polarization::H, Polarization::V] {
        state.project_to_sink(
            PhotonMode::live(exit_port(other), pol),
            Outcome::D0,
            None,
        );
    }
    branch_probability(state, branch)
}

/// Runs both modules on the polarization-split photon and hands back the
/// exit-side state (recombined or not) together with the shared cycle trace.
/// The trace's channel occupancy sums both modules' channels.
pub fn dual_cqze_run(
    photon: &QubitAmplitudes,
    bob: &QubitAmplitudes,
    cfg: CycleConfig,
    exit: ExitElement,
    history: HistoryMode,
) -> Result<(JointState, ChainHistory)> {
    let mh = module_modes(Polarization::H);
    let mv = module_modes(Polarization::V);
    let mut state = JointState::empty();
    for (b, bob_amp) in [(BobBasis::Pass, bob.a0()), (BobBasis::Block, bob.a1())] {
        state.set_amp(b, mh.outer, bob_amp * photon.a0());
        state.set_amp(b, mv.outer, bob_amp * photon.a1());
    }
    let hist = run_chained(&mut state, &[mh, mv], cfg, history);
    relabel_module_exit(&mut state, Polarization::H);
    relabel_module_exit(&mut state, Polarization::V);
    if exit == ExitElement::Bs50 {
        recombine_exit_paths(&mut state)?;
    }
    Ok((state, hist))
}

/// D0 measurement on the recombined state: picks a branch, removes the other
/// port, and packages the renormalized in-branch state.
pub fn measure_d0(state: JointState, policy: BranchPolicy) -> CnotOutcome {
    let p_main = branch_probability(&state, ExitBranch::MainPath);
    let p_d0 = branch_probability(&state, ExitBranch::D0Path);
    let branch = match policy {
        BranchPolicy::ForceMain => ExitBranch::MainPath,
        BranchPolicy::ForceD0 => ExitBranch::D0Path,
        BranchPolicy::FollowAmplitudes => {
            if p_d0 > p_main {
                ExitBranch::D0Path
            } else {
                ExitBranch::MainPath
            }
        }
    };
    let loss_probability =
        state.terminal(Outcome::D3) + state.terminal(Outcome::BobAbsorbed);
    let mut projected = state;
    let branch_probability = project_branch(&mut projected, branch);
    let joint_output = if branch_probability > 1e-30 {
        projected.renormalized().expect("branch probability checked")
    } else {
        JointState::empty()
    };
    CnotOutcome {
        branch,
        branch_probability,
        joint_output,
        loss_probability,
    }
}

/// The full gate: polarization-split entry, both modules, 50:50 exit, D0
/// measurement following the dominant port.
pub fn dual_cqze_cnot(
    photon: &QubitAmplitudes,
    bob: &QubitAmplitudes,
    cfg: CycleConfig,
) -> Result<CnotOutcome> {
    dual_cqze_cnot_with(photon, bob, cfg, BranchPolicy::FollowAmplitudes)
}

/// The full gate with an explicit branch policy (for regression tests and
/// the transport rounds).
pub fn dual_cqze_cnot_with(
    photon: &QubitAmplitudes,
    bob: &QubitAmplitudes,
    cfg: CycleConfig,
    policy: BranchPolicy,
) -> Result<CnotOutcome> {
    let (state, _) = dual_cqze_run(photon, bob, cfg, ExitElement::Bs50, HistoryMode::None)?;
    Ok(measure_d0(state, policy))
}

/// Basis order for four-component (Bob ⊗ polarization) vectors:
/// (pass H, pass V, block H, block V).
pub const JOINT_BASIS: [(BobBasis, Polarization); 4] = [
    (BobBasis::Pass, Polarization::H),
    (BobBasis::Pass, Polarization::V),
    (BobBasis::Block, Polarization::H),
    (BobBasis::Block, Polarization::V),
];

/// Bob ⊗ polarization amplitudes sitting on one exit path.
pub fn path_state(state: &JointState, path: PathMode) -> [Complex64; 4] {
    JOINT_BASIS.map(|(b, p)| state.amp(b, PhotonMode::live(path, p)))
}

/// What an exact CNOT (Bob control, polarization target) produces from the
/// product input: [αλ, αμ, βμ, βλ] in [`JOINT_BASIS`] order.
pub fn ideal_cnot_output(photon: &QubitAmplitudes, bob: &QubitAmplitudes) -> [Complex64; 4] {
    let (l, u) = (photon.a0(), photon.a1());
    let (a, b) = (bob.a0(), bob.a1());
    [a * l, a * u, b * u, b * l]
}

pub fn state4_norm_sqr(v: &[Complex64; 4]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum()
}

pub fn state4_overlap(a: &[Complex64; 4], b: &[Complex64; 4]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// |⟨a|b⟩|² of the two vectors after normalizing each.
pub fn state4_fidelity(a: &[Complex64; 4], b: &[Complex64; 4]) -> f64 {
    let na = state4_norm_sqr(a);
    let nb = state4_norm_sqr(b);
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    state4_overlap(a, b).norm_sqr() / (na * nb)
}

/// Trace distance between the two pure states: √(1 − fidelity).
pub fn state4_trace_distance(a: &[Complex64; 4], b: &[Complex64; 4]) -> f64 {
    (1.0 - state4_fidelity(a, b)).max(0.0).sqrt()
}
