//! Named self-checks wiring the closed forms, the step engine and the
//! transport pipeline against each other. The CLI `verify` subcommand prints
//! one line per check; `fast` trims the stochastic sample counts and skips
//! the long asymptotic runs.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::amplitudes::{
    BobBasis, Gate, JointState, Outcome, PathMode, PhotonMode, Polarization, QubitAmplitudes,
};
use crate::analysis::{
    efficiency_closed_form, fidelity_closed_form, pass_exit_amplitude, recursion_eps_eta,
    ExitBranch,
};
use crate::cnot::{
    dual_cqze_cnot_with, exit_port, ideal_cnot_output, path_state, state4_fidelity, BranchPolicy,
};
use crate::transport::{circuit_swap_stages, circuit_swap_z_stages, run_transport};
use crate::zeno::{cqze_outer_run_with, michelson_run_with, plain_modes, CycleConfig, HistoryMode};
use crate::{TOL_ACCUM, TOL_EXACT};

#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn bounded(name: &'static str, value: f64, bound: f64) -> Self {
        CheckResult {
            name,
            passed: value < bound,
            detail: format!("max deviation {value:.3e} (bound {bound:.1e})"),
        }
    }
}

pub fn all_passed(results: &[CheckResult]) -> bool {
    results.iter().all(|r| r.passed)
}

/// Runs every check and returns the results in a fixed order.
pub fn run_checks(fast: bool) -> Vec<CheckResult> {
    let mut out = vec![
        check_rotation_gate_algebra(),
        check_norm_conservation(if fast { 200 } else { 1000 }),
        check_recursion_vs_engine(fast),
        check_circuit_oracle_stages(),
        check_efficiency_checkpoint(),
        check_fidelity_checkpoint(),
        check_transfer_matches_closed_form(),
        check_cnot_truth_table(fast),
    ];
    if !fast {
        out.push(check_channel_occupancy_bound());
    }
    out
}

fn random_qubit(rng: &mut ChaCha8Rng) -> QubitAmplitudes {
    loop {
        let c = |rng: &mut ChaCha8Rng| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        };
        if let Ok(q) = QubitAmplitudes::normalized(c(rng), c(rng)) {
            return q;
        }
    }
}

fn check_rotation_gate_algebra() -> CheckResult {
    let modes = plain_modes();
    let other = PhotonMode::live(PathMode::UpperPath, Polarization::V);
    let mut max_dev = 0.0f64;
    let mut track = |d: f64| max_dev = max_dev.max(d);

    let bob = QubitAmplitudes::normalized(Complex64::new(0.6, 0.1), Complex64::new(-0.5, 0.6))
        .unwrap();
    let base = JointState::bob_photon(&bob, modes.outer);

    // forward then inverse rotation restores the state
    let mut s = base.clone();
    s.rotate_pair(modes.outer, modes.inner, 0.41, None).unwrap();
    s.rotate_pair(modes.outer, other, -1.2, Some(BobBasis::Block))
        .unwrap();
    s.rotate_pair(modes.outer, other, 1.2, Some(BobBasis::Block))
        .unwrap();
    s.rotate_pair(modes.outer, modes.inner, -0.41, None).unwrap();
    for (b, m, a) in base.live_amps() {
        track((s.amp(b, m) - a).norm());
    }

    // two half-angle rotations compose to one
    let mut twice = base.clone();
    twice.rotate_pair(modes.outer, modes.inner, 0.3, None).unwrap();
    twice.rotate_pair(modes.outer, modes.inner, 0.3, None).unwrap();
    let mut once = base.clone();
    once.rotate_pair(modes.outer, modes.inner, 0.6, None).unwrap();
    for (b, m, a) in once.live_amps() {
        track((twice.amp(b, m) - a).norm());
    }

    // involutions and the H-conjugation identities on every qubit slot
    for gate in [Gate::H, Gate::X, Gate::Z] {
        let mut s = base.clone();
        s.apply_bob_gate(gate);
        s.apply_bob_gate(gate);
        let mut p = base.clone();
        p.apply_polarization_gate(gate);
        p.apply_polarization_gate(gate);
        for (b, m, a) in base.live_amps() {
            track((s.amp(b, m) - a).norm());
            track((p.amp(b, m) - a).norm());
        }
    }
    let mut hzh = base.clone();
    hzh.apply_bob_gate(Gate::H);
    hzh.apply_bob_gate(Gate::Z);
    hzh.apply_bob_gate(Gate::H);
    let mut x = base.clone();
    x.apply_bob_gate(Gate::X);
    for (b, m, a) in x.live_amps() {
        track((hzh.amp(b, m) - a).norm());
    }

    // projection takes exactly the squared magnitude and is idempotent
    let mut s = base.clone();
    s.rotate_pair(modes.outer, modes.channel, 0.8, None).unwrap();
    let expected: f64 = crate::amplitudes::BOB_BASIS
        .iter()
        .map(|&b| s.amp(b, modes.channel).norm_sqr())
        .sum();
    s.project_to_sink(modes.channel, Outcome::D3, None);
    track((s.terminal(Outcome::D3) - expected).abs());
    let before = s.clone();
    s.project_to_sink(modes.channel, Outcome::D3, None);
    track((s.terminal(Outcome::D3) - before.terminal(Outcome::D3)).abs());

    CheckResult::bounded("rotation-gate-algebra", max_dev, TOL_EXACT)
}

fn check_norm_conservation(sequences: u32) -> CheckResult {
    let live: [PhotonMode; 5] = [
        PhotonMode::live(PathMode::OuterArm, Polarization::H),
        PhotonMode::live(PathMode::InnerArm, Polarization::H),
        PhotonMode::live(PathMode::Channel, Polarization::H),
        PhotonMode::live(PathMode::UpperPath, Polarization::H),
        PhotonMode::live(PathMode::UpperPath, Polarization::V),
    ];
    let gates = [Gate::H, Gate::X, Gate::Z];
    let filters = [None, Some(BobBasis::Pass), Some(BobBasis::Block)];
    let outcomes = [Outcome::D0, Outcome::D3, Outcome::BobAbsorbed];

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_cafe);
    let mut max_dev = 0.0f64;
    for _ in 0..sequences {
        let bob = random_qubit(&mut rng);
        let mut s = JointState::bob_photon(&bob, live[rng.gen_range(0..live.len())]);
        for _ in 0..40 {
            match rng.gen_range(0..4) {
                0 => {
                    let a = live[rng.gen_range(0..live.len())];
                    let mut b = live[rng.gen_range(0..live.len())];
                    while b == a {
                        b = live[rng.gen_range(0..live.len())];
                    }
                    let theta = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
                    s.rotate_pair(a, b, theta, filters[rng.gen_range(0..3)]).unwrap();
                }
                1 => s.apply_bob_gate(gates[rng.gen_range(0..3)]),
                2 => s.apply_polarization_gate(gates[rng.gen_range(0..3)]),
                _ => {
                    let mode = live[rng.gen_range(0..live.len())];
                    s.project_to_sink(mode, outcomes[rng.gen_range(0..3)], filters[rng.gen_range(0..3)]);
                }
            }
            max_dev = max_dev.max((s.total_norm() - 1.0).abs());
        }
    }
    CheckResult {
        name: "norm-conservation",
        passed: max_dev < TOL_ACCUM,
        detail: format!(
            "{sequences} random 40-op sequences, max |norm-1| = {max_dev:.3e} (bound {TOL_ACCUM:.1e})"
        ),
    }
}

fn check_recursion_vs_engine(fast: bool) -> CheckResult {
    let bob = QubitAmplitudes::normalized(Complex64::new(0.48, 0.31), Complex64::new(-0.62, 0.54))
        .unwrap();
    let n_values: &[u32] = if fast { &[1, 4, 16, 40] } else { &[1, 2, 3, 5, 8, 13, 21, 34, 40] };
    let m_max = if fast { 6 } else { 10 };
    let modes = plain_modes();
    let mut max_dev = 0.0f64;
    let mut cells = 0u32;
    for m in 1..=m_max {
        for &n in n_values {
            let cfg = CycleConfig::new(m, n).unwrap();
            let (s, _) = cqze_outer_run_with(&bob, cfg, HistoryMode::None).unwrap();
            let r = recursion_eps_eta(m, n).unwrap();
            let g = pass_exit_amplitude(m);
            let devs = [
                (s.amp(BobBasis::Pass, modes.outer) - bob.a0() * g).norm(),
                (s.amp(BobBasis::Block, modes.outer) - bob.a1() * r.eps).norm(),
                (s.amp(BobBasis::Block, modes.inner) - bob.a1() * r.eta).norm(),
            ];
            for d in devs {
                max_dev = max_dev.max(d);
            }
            cells += 1;
        }
    }
    CheckResult {
        name: "recursion-vs-engine",
        passed: max_dev < TOL_EXACT,
        detail: format!("{cells} (M,N) cells, max amplitude gap {max_dev:.3e} (bound {TOL_EXACT:.1e})"),
    }
}

fn check_circuit_oracle_stages() -> CheckResult {
    let input =
        QubitAmplitudes::normalized(Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)).unwrap();
    let (a, b) = (input.a0(), input.a1());
    let zero = Complex64::new(0.0, 0.0);
    let p = (a + b) / 2.0;
    let q = (a - b) / 2.0;

    let plain = circuit_swap_stages(&input);
    let plain_expected: [[Complex64; 4]; 5] = [
        [a, zero, b, zero],
        [a, zero, zero, b],
        [p, q, q, p],
        [p, q, p, q],
        [a, b, zero, zero],
    ];
    let z = circuit_swap_z_stages(&input);
    let z_expected: [[Complex64; 4]; 7] = [
        [a, zero, b, zero],
        [a, zero, zero, b],
        [p, q, q, p],
        [p, -q, q, -p],
        [p, -q, -p, q],
        [zero, zero, b, a],
        [zero, zero, a, b],
    ];

    let mut max_dev = 0.0f64;
    for (got, want) in plain.iter().zip(&plain_expected) {
        for k in 0..4 {
            max_dev = max_dev.max((got[k] - want[k]).norm());
        }
    }
    for (got, want) in z.iter().zip(&z_expected) {
        for k in 0..4 {
            max_dev = max_dev.max((got[k] - want[k]).norm());
        }
    }
    CheckResult::bounded("circuit-oracle-stages", max_dev, 1e-15)
}

fn check_efficiency_checkpoint() -> CheckResult {
    let value =
        efficiency_closed_form(50, 1250, &QubitAmplitudes::equal_superposition()).unwrap();
    CheckResult {
        name: "efficiency-checkpoint",
        passed: (0.945..0.955).contains(&value),
        detail: format!("(M,N)=(50,1250) equal superposition: {value:.6} (want 0.95±0.005)"),
    }
}

fn check_fidelity_checkpoint() -> CheckResult {
    let bob = QubitAmplitudes::equal_superposition();
    let long = fidelity_closed_form(15, 300, &bob, ExitBranch::MainPath).unwrap();
    let short = fidelity_closed_form(15, 50, &bob, ExitBranch::MainPath).unwrap();
    CheckResult {
        name: "fidelity-checkpoint",
        passed: long > 0.86 && long > short,
        detail: format!("(15,300): {long:.6} > 0.86 and > (15,50): {short:.6}"),
    }
}

fn check_transfer_matches_closed_form() -> CheckResult {
    let bob = QubitAmplitudes::equal_superposition();
    let cfg = CycleConfig::new(5, 20).unwrap();
    let mut max_dev = 0.0f64;
    for (policy, branch) in [
        (BranchPolicy::ForceMain, ExitBranch::MainPath),
        (BranchPolicy::ForceD0, ExitBranch::D0Path),
    ] {
        let res = run_transport(&bob, cfg, policy).unwrap();
        let closed = fidelity_closed_form(5, 20, &bob, branch).unwrap();
        max_dev = max_dev.max((res.transfer_overlap - closed).abs());
    }
    CheckResult::bounded("transfer-matches-closed-form", max_dev, 1e-6)
}

fn check_cnot_truth_table(fast: bool) -> CheckResult {
    let (m, n, pairs, bound) = if fast {
        (40, 1000, 5, 1e-3)
    } else {
        (100, 5000, 20, 1e-3)
    };
    let cfg = CycleConfig::new(m, n).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0xc401);
    let mut max_infidelity = 0.0f64;
    for _ in 0..pairs {
        let photon = random_qubit(&mut rng);
        let bob = random_qubit(&mut rng);
        let out = dual_cqze_cnot_with(&photon, &bob, cfg, BranchPolicy::ForceMain).unwrap();
        let got = path_state(&out.joint_output, exit_port(out.branch));
        let ideal = ideal_cnot_output(&photon, &bob);
        max_infidelity = max_infidelity.max(1.0 - state4_fidelity(&got, &ideal));
    }
    CheckResult {
        name: "cnot-truth-table",
        passed: max_infidelity < bound,
        detail: format!(
            "({m},{n}), {pairs} random input pairs, max infidelity {max_infidelity:.3e} (bound {bound:.1e})"
        ),
    }
}

fn check_channel_occupancy_bound() -> CheckResult {
    let bob = QubitAmplitudes::equal_superposition();
    let mut peaks = Vec::new();
    for n in [200u32, 800] {
        let cfg = CycleConfig::new(50, n).unwrap();
        let (_, hist) =
            michelson_run_with(Polarization::H, &bob, cfg, HistoryMode::Boundaries).unwrap();
        peaks.push(hist.peak_channel_occupancy());
    }
    let bounded = peaks.iter().all(|&p| p < 1e-3);
    let monotone = peaks.windows(2).all(|w| w[1] <= w[0] + 1e-15);
    CheckResult {
        name: "channel-occupancy-bound",
        passed: bounded && monotone,
        detail: format!("M=50 peaks at N=200,800: {:.3e}, {:.3e} (bound 1e-3, non-increasing)", peaks[0], peaks[1]),
    }
}
