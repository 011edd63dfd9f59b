//! The cycle engines.
//!
//! Three devices share one evolution core:
//!
//! * a plain splitter chain (`mz_chain`): N weak splitters between two arms,
//!   with Bob able to absorb in the second arm;
//! * the chained run (`cqze_outer_run`): M outer cycles, each one outer
//!   rotation followed by an N-step inner chain whose far end is the channel
//!   Bob can block, with the leaked pass-branch amplitude discarded once per
//!   cycle;
//! * the polarization-encoded module (`michelson_run`): the same evolution
//!   with arms tagged by polarization, so the exit carries Bob's bit in the
//!   photon's polarization.
//!
//! Per outer cycle the engine applies the outer rotation and then the inner
//! chain. On the final cycle the inner chain runs on the pass sector only:
//! the blocked component stays in place for extraction while the pass-side
//! leak is still routed to its discard detector. This makes the exit
//! amplitudes of the blocked sector exactly the per-cycle rotation/attrition
//! recursion values (see [`crate::analysis::recursion_eps_eta`]) and the pass
//! exit exactly cos^M θ_M.

use num_complex::Complex64;

use crate::amplitudes::{
    BobBasis, JointState, Outcome, PathMode, PhotonMode, Polarization, QubitAmplitudes,
};
use crate::error::{Error, Result};

/// Outer/inner cycle counts with their derived rotation angles
/// θ_M = π/2M and θ_N = π/2N.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CycleConfig {
    m: u32,
    n: u32,
}

impl CycleConfig {
    pub fn new(m: u32, n: u32) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::Config("cycle counts must be at least 1".into()));
        }
        Ok(CycleConfig { m, n })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn theta_m(&self) -> f64 {
        std::f64::consts::PI / (2.0 * f64::from(self.m))
    }

    pub fn theta_n(&self) -> f64 {
        std::f64::consts::PI / (2.0 * f64::from(self.n))
    }
}

/// How much per-step detail a run records.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HistoryMode {
    /// Record nothing (fastest; used by sweeps).
    None,
    /// Channel-occupancy and loss traces every step, state snapshots at
    /// cycle boundaries.
    Boundaries,
    /// Traces and state snapshots every step.
    PerStep,
}

/// Recorded evolution of one run.
///
/// `channel_occupancy[k]` is the squared channel amplitude of the live
/// (post-selected, unnormalized) state after the k-th rotation, sampled
/// before Bob's absorption acts on that step; `cum_d3` / `cum_bob_absorbed`
/// are the terminal probabilities at the same instants. For a chained run the
/// trace has M·(N+1) entries (one after each outer rotation, one after each
/// inner rotation); for a plain chain, N.
#[derive(Clone, Debug, Default)]
pub struct ChainHistory {
    pub states: Vec<JointState>,
    pub channel_occupancy: Vec<f64>,
    pub cum_d3: Vec<f64>,
    pub cum_bob_absorbed: Vec<f64>,
}

impl ChainHistory {
    pub fn peak_channel_occupancy(&self) -> f64 {
        self.channel_occupancy.iter().copied().fold(0.0, f64::max)
    }

    pub fn len(&self) -> usize {
        self.channel_occupancy.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channel_occupancy.is_empty()
    }

    fn push_sample(&mut self, channel: f64, d3: f64, bob: f64) {
        self.channel_occupancy.push(channel);
        self.cum_d3.push(d3);
        self.cum_bob_absorbed.push(bob);
    }
}

/// The three modes one chained module evolves over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ModuleModes {
    pub outer: PhotonMode,
    pub inner: PhotonMode,
    pub channel: PhotonMode,
}

/// Mode set for the plain (polarization-free) chained run.
pub fn plain_modes() -> ModuleModes {
    ModuleModes {
        outer: PhotonMode::live(PathMode::OuterArm, Polarization::H),
        inner: PhotonMode::live(PathMode::InnerArm, Polarization::H),
        channel: PhotonMode::live(PathMode::Channel, Polarization::H),
    }
}

/// Mode set for the module that takes `input` polarization. The inner arm
/// carries the flipped polarization; the channel carries the input one.
pub fn module_modes(input: Polarization) -> ModuleModes {
    ModuleModes {
        outer: PhotonMode::live(PathMode::OuterArm, input),
        inner: PhotonMode::live(PathMode::InnerArm, input.flipped()),
        channel: PhotonMode::live(PathMode::Channel, input),
    }
}

/// Output beam for a module: upper for the H-input module, lower for the
/// V-input module (their positions in the two-module gate).
pub fn module_exit_path(input: Polarization) -> PathMode {
    match input {
        Polarization::H => PathMode::UpperPath,
        Polarization::V => PathMode::LowerPath,
    }
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Per-module scalar working set, indexed [pass, block].
struct ModuleScalars {
    modes: ModuleModes,
    outer: [Complex64; 2],
    inner: [Complex64; 2],
    channel: [Complex64; 2],
}

#[inline]
fn rot(a: &mut Complex64, b: &mut Complex64, c: f64, s: f64) {
    let (va, vb) = (*a, *b);
    *a = va * c - vb * s;
    *b = va * s + vb * c;
}

/// Evolves every listed module through the full M-cycle schedule, in
/// lockstep. Amplitudes on modes outside the listed module sets are left
/// untouched. The arithmetic is the scalar twin of composing
/// [`JointState::rotate_pair`] and [`JointState::project_to_sink`] in the
/// same order, kept separate so long runs avoid per-step map traffic.
pub(crate) fn run_chained(
    state: &mut JointState,
    modules: &[ModuleModes],
    cfg: CycleConfig,
    history: HistoryMode,
) -> ChainHistory {
    let (tm, tn) = (cfg.theta_m(), cfg.theta_n());
    let (cm, sm) = (tm.cos(), tm.sin());
    let (cn, sn) = (tn.cos(), tn.sin());
    let (m_cycles, n_steps) = (cfg.m(), cfg.n());

    let mut mods: Vec<ModuleScalars> = modules
        .iter()
        .map(|&modes| {
            let take = |st: &mut JointState, mode| {
                [
                    st.take_amp(BobBasis::Pass, mode),
                    st.take_amp(BobBasis::Block, mode),
                ]
            };
            ModuleScalars {
                modes,
                outer: take(state, modes.outer),
                inner: take(state, modes.inner),
                channel: take(state, modes.channel),
            }
        })
        .collect();

    let d3_base = state.terminal(Outcome::D3);
    let bob_base = state.terminal(Outcome::BobAbsorbed);
    let mut d3 = 0.0f64;
    let mut bob_abs = 0.0f64;

    let mut hist = ChainHistory::default();
    if history != HistoryMode::None {
        let samples = m_cycles as usize * (n_steps as usize + 1);
        hist.channel_occupancy.reserve(samples);
        hist.cum_d3.reserve(samples);
        hist.cum_bob_absorbed.reserve(samples);
    }

    let channel_prob = |mods: &[ModuleScalars]| -> f64 {
        mods.iter()
            .map(|md| md.channel[0].norm_sqr() + md.channel[1].norm_sqr())
            .sum()
    };
    let snapshot = |state: &JointState, mods: &[ModuleScalars], d3: f64, bob_abs: f64| {
        let mut snap = state.clone();
        for md in mods {
            for (sector, b) in [(0, BobBasis::Pass), (1, BobBasis::Block)] {
                snap.set_amp(b, md.modes.outer, md.outer[sector]);
                snap.set_amp(b, md.modes.inner, md.inner[sector]);
                snap.set_amp(b, md.modes.channel, md.channel[sector]);
            }
        }
        snap.add_terminal(Outcome::D3, d3);
        snap.add_terminal(Outcome::BobAbsorbed, bob_abs);
        snap
    };

    for m in 1..=m_cycles {
        let final_cycle = m == m_cycles;
        for md in mods.iter_mut() {
            rot(&mut md.outer[0], &mut md.inner[0], cm, sm);
            rot(&mut md.outer[1], &mut md.inner[1], cm, sm);
        }
        if history != HistoryMode::None {
            hist.push_sample(channel_prob(&mods), d3_base + d3, bob_base + bob_abs);
            if history == HistoryMode::PerStep {
                hist.states.push(snapshot(state, &mods, d3, bob_abs));
            }
        }
        for _ in 1..=n_steps {
            for md in mods.iter_mut() {
                rot(&mut md.inner[0], &mut md.channel[0], cn, sn);
                if !final_cycle {
                    rot(&mut md.inner[1], &mut md.channel[1], cn, sn);
                }
            }
            if history != HistoryMode::None {
                hist.push_sample(channel_prob(&mods), d3_base + d3, bob_base + bob_abs);
            }
            if !final_cycle {
                for md in mods.iter_mut() {
                    bob_abs += md.channel[1].norm_sqr();
                    md.channel[1] = ZERO;
                }
            }
            if history == HistoryMode::PerStep {
                hist.states.push(snapshot(state, &mods, d3, bob_abs));
            }
        }
        for md in mods.iter_mut() {
            d3 += md.channel[0].norm_sqr();
            md.channel[0] = ZERO;
        }
        if history == HistoryMode::Boundaries {
            hist.states.push(snapshot(state, &mods, d3, bob_abs));
        }
    }

    for md in &mods {
        for (sector, b) in [(0, BobBasis::Pass), (1, BobBasis::Block)] {
            state.set_amp(b, md.modes.outer, md.outer[sector]);
            state.set_amp(b, md.modes.inner, md.inner[sector]);
            state.set_amp(b, md.modes.channel, md.channel[sector]);
        }
    }
    state.add_terminal(Outcome::D3, d3);
    state.add_terminal(Outcome::BobAbsorbed, bob_abs);
    hist
}

/// Relabels a module's exit: the outer arm leaves as the module's input
/// polarization, the inner arm as the flipped one, both on the module's
/// output beam.
pub(crate) fn relabel_module_exit(state: &mut JointState, input: Polarization) {
    let modes = module_modes(input);
    let exit = module_exit_path(input);
    for b in crate::amplitudes::BOB_BASIS {
        let a_outer = state.take_amp(b, modes.outer);
        let a_inner = state.take_amp(b, modes.inner);
        if a_outer != ZERO {
            state.set_amp(b, PhotonMode::live(exit, input), a_outer);
        }
        if a_inner != ZERO {
            state.set_amp(b, PhotonMode::live(exit, input.flipped()), a_inner);
        }
    }
}

fn check_no_sink_amplitude(state: &JointState) -> Result<()> {
    for (_, mode, _) in state.live_amps() {
        if mode.is_sink() {
            return Err(Error::Contract(
                "live amplitude found on a sink mode".into(),
            ));
        }
    }
    Ok(())
}

/// Plain chain of N weak splitters between two arms, Bob absorbing in the
/// second arm after every splitter. For a pass-side input the photon walks
/// fully into the second arm; for a blocked input it survives in the first
/// arm with amplitude cos^N θ_N.
pub fn mz_chain(bob: &QubitAmplitudes, n: u32) -> Result<(JointState, ChainHistory)> {
    if n == 0 {
        return Err(Error::Config("chain length must be at least 1".into()));
    }
    let theta = std::f64::consts::PI / (2.0 * f64::from(n));
    let arm = PhotonMode::live(PathMode::OuterArm, Polarization::H);
    let channel = PhotonMode::live(PathMode::Channel, Polarization::H);
    let mut state = JointState::bob_photon(bob, arm);
    let mut hist = ChainHistory::default();
    for _ in 0..n {
        state.rotate_pair(arm, channel, theta, None)?;
        hist.push_sample(
            state.amp(BobBasis::Pass, channel).norm_sqr()
                + state.amp(BobBasis::Block, channel).norm_sqr(),
            state.terminal(Outcome::D3),
            state.terminal(Outcome::BobAbsorbed),
        );
        state.project_to_sink(channel, Outcome::BobAbsorbed, Some(BobBasis::Block));
        hist.states.push(state.clone());
    }
    Ok((state, hist))
}

/// One inner chain applied to a state already holding amplitude on the inner
/// arm: N rotations toward the channel, Bob absorbing the blocked sector's
/// channel amplitude each step, then the pass sector's accumulated channel
/// amplitude is discarded to D3. The outer arm is untouched.
pub fn cqze_inner_cycle(state: JointState, n: u32) -> Result<(JointState, ChainHistory)> {
    if n == 0 {
        return Err(Error::Config("chain length must be at least 1".into()));
    }
    check_no_sink_amplitude(&state)?;
    let modes = plain_modes();
    let theta = std::f64::consts::PI / (2.0 * f64::from(n));
    let mut state = state;
    let mut hist = ChainHistory::default();
    for _ in 0..n {
        state.rotate_pair(modes.inner, modes.channel, theta, None)?;
        hist.push_sample(
            state.amp(BobBasis::Pass, modes.channel).norm_sqr()
                + state.amp(BobBasis::Block, modes.channel).norm_sqr(),
            state.terminal(Outcome::D3),
            state.terminal(Outcome::BobAbsorbed),
        );
        state.project_to_sink(modes.channel, Outcome::BobAbsorbed, Some(BobBasis::Block));
        hist.states.push(state.clone());
    }
    state.project_to_sink(modes.channel, Outcome::D3, Some(BobBasis::Pass));
    Ok((state, hist))
}

/// Full chained run in the plain geometry, starting from the outer arm,
/// recording cycle-boundary snapshots.
pub fn cqze_outer_run(
    bob: &QubitAmplitudes,
    m: u32,
    n: u32,
) -> Result<(JointState, ChainHistory)> {
    cqze_outer_run_with(bob, CycleConfig::new(m, n)?, HistoryMode::Boundaries)
}

/// Chained run with an explicit history mode.
pub fn cqze_outer_run_with(
    bob: &QubitAmplitudes,
    cfg: CycleConfig,
    history: HistoryMode,
) -> Result<(JointState, ChainHistory)> {
    let modes = plain_modes();
    let mut state = JointState::bob_photon(bob, modes.outer);
    let hist = run_chained(&mut state, &[modes], cfg, history);
    Ok((state, hist))
}

/// Polarization-encoded module run: the chained evolution with the inner arm
/// carrying the flipped polarization, exit relabeled onto the module's output
/// beam. A pass-side input leaves with its polarization kept; a blocked input
/// leaves (mostly) flipped.
pub fn michelson_run(
    input: Polarization,
    bob: &QubitAmplitudes,
    cfg: CycleConfig,
) -> Result<(JointState, ChainHistory)> {
    michelson_run_with(input, bob, cfg, HistoryMode::Boundaries)
}

/// Module run with an explicit history mode.
pub fn michelson_run_with(
    input: Polarization,
    bob: &QubitAmplitudes,
    cfg: CycleConfig,
    history: HistoryMode,
) -> Result<(JointState, ChainHistory)> {
    let modes = module_modes(input);
    let mut state = JointState::bob_photon(bob, modes.outer);
    let hist = run_chained(&mut state, &[modes], cfg, history);
    relabel_module_exit(&mut state, input);
    Ok((state, hist))
}
