//! Joint Bob⊗photon state representation and the elementary operations on it:
//! two-mode rotations, projections into terminal sinks, single-qubit gates and
//! norm bookkeeping.
//!
//! Amplitudes along post-selected branches are kept unnormalized; probability
//! removed by a measurement or loss event is accumulated in a terminal map so
//! that the total norm (live + terminal) stays 1. Renormalization happens only
//! at explicit call sites.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::TOL_EXACT;

/// Bob's two-level object: transparent (`Pass`) or absorbing (`Block`).
/// `Pass` is the computational |0⟩.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BobBasis {
    Pass,
    Block,
}

pub const BOB_BASIS: [BobBasis; 2] = [BobBasis::Pass, BobBasis::Block];

/// Photon polarization. `H` is the computational |0⟩.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Polarization {
    H,
    V,
}

impl Polarization {
    pub fn flipped(self) -> Self {
        match self {
            Polarization::H => Polarization::V,
            Polarization::V => Polarization::H,
        }
    }
}

/// Spatial labels for the photon.
///
/// `OuterArm`, `InnerArm` and `Channel` are the three stages of one chained
/// interferometer module (the channel is the segment Bob can block).
/// `UpperPath` and `LowerPath` are the two output beams of the two-module
/// gate, ahead of and behind the recombining splitter. The `Sink*` variants
/// are absorbing detector/loss positions; amplitude never sits on them, their
/// probability is recorded in the terminal map instead.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PathMode {
    OuterArm,
    InnerArm,
    Channel,
    UpperPath,
    LowerPath,
    SinkD0,
    SinkD3,
    SinkBobAbsorbed,
}

impl PathMode {
    pub fn is_sink(self) -> bool {
        matches!(
            self,
            PathMode::SinkD0 | PathMode::SinkD3 | PathMode::SinkBobAbsorbed
        )
    }
}

/// A concrete photon mode: spatial path plus polarization. Polarization is
/// `None` only on sink paths, where it is not recorded.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PhotonMode {
    pub path: PathMode,
    pub pol: Option<Polarization>,
}

impl PhotonMode {
    /// A live (non-sink) mode carrying a definite polarization.
    pub const fn live(path: PathMode, pol: Polarization) -> Self {
        PhotonMode {
            path,
            pol: Some(pol),
        }
    }

    pub const fn sink(path: PathMode) -> Self {
        PhotonMode { path, pol: None }
    }

    pub fn is_sink(&self) -> bool {
        self.path.is_sink()
    }
}

/// Labels for probability that has left the live state for good.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Outcome {
    /// Path measurement at the recombining splitter.
    D0,
    /// Discard detector at the end of each inner chain.
    D3,
    /// Absorption by Bob's object in the channel.
    BobAbsorbed,
}

pub const OUTCOMES: [Outcome; 3] = [Outcome::D0, Outcome::D3, Outcome::BobAbsorbed];

impl Outcome {
    fn index(self) -> usize {
        match self {
            Outcome::D0 => 0,
            Outcome::D3 => 1,
            Outcome::BobAbsorbed => 2,
        }
    }
}

/// Single-qubit gates used by the transport circuits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gate {
    I,
    H,
    X,
    Z,
}

impl Gate {
    /// Row-major 2×2 matrix. All four gates are real.
    pub fn matrix(self) -> [[f64; 2]; 2] {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            Gate::I => [[1.0, 0.0], [0.0, 1.0]],
            Gate::H => [[r, r], [r, -r]],
            Gate::X => [[0.0, 1.0], [1.0, 0.0]],
            Gate::Z => [[1.0, 0.0], [0.0, -1.0]],
        }
    }
}

fn apply2(m: [[f64; 2]; 2], a0: Complex64, a1: Complex64) -> (Complex64, Complex64) {
    (a0 * m[0][0] + a1 * m[0][1], a0 * m[1][0] + a1 * m[1][1])
}

/// A normalized complex pair: Bob's (α, β) or a photon polarization qubit
/// (λ, μ).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QubitAmplitudes {
    a0: Complex64,
    a1: Complex64,
}

impl QubitAmplitudes {
    /// Requires |a0|² + |a1|² = 1 within `TOL_EXACT`.
    pub fn new(a0: Complex64, a1: Complex64) -> Result<Self> {
        let excess = (a0.norm_sqr() + a1.norm_sqr() - 1.0).abs();
        if !excess.is_finite() || excess > TOL_EXACT {
            return Err(Error::NotNormalized { excess });
        }
        Ok(QubitAmplitudes { a0, a1 })
    }

    /// Scales an arbitrary nonzero pair to unit norm.
    pub fn normalized(a0: Complex64, a1: Complex64) -> Result<Self> {
        let n2 = a0.norm_sqr() + a1.norm_sqr();
        if !n2.is_finite() || n2 < 1e-30 {
            return Err(Error::ZeroNorm);
        }
        let s = n2.sqrt();
        Ok(QubitAmplitudes {
            a0: a0 / s,
            a1: a1 / s,
        })
    }

    pub fn equal_superposition() -> Self {
        let r = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        QubitAmplitudes { a0: r, a1: r }
    }

    pub fn basis0() -> Self {
        QubitAmplitudes {
            a0: Complex64::new(1.0, 0.0),
            a1: Complex64::new(0.0, 0.0),
        }
    }

    pub fn basis1() -> Self {
        QubitAmplitudes {
            a0: Complex64::new(0.0, 0.0),
            a1: Complex64::new(1.0, 0.0),
        }
    }

    pub fn a0(&self) -> Complex64 {
        self.a0
    }

    pub fn a1(&self) -> Complex64 {
        self.a1
    }

    pub fn apply_gate(&self, gate: Gate) -> Self {
        let (a0, a1) = apply2(gate.matrix(), self.a0, self.a1);
        QubitAmplitudes { a0, a1 }
    }

    /// ⟨self|other⟩.
    pub fn overlap(&self, other: &QubitAmplitudes) -> Complex64 {
        self.a0.conj() * other.a0 + self.a1.conj() * other.a1
    }

    /// |⟨self|other⟩|².
    pub fn fidelity_with(&self, other: &QubitAmplitudes) -> f64 {
        self.overlap(other).norm_sqr()
    }
}

/// Complex amplitudes over (Bob basis ⊗ photon mode) plus cumulative terminal
/// outcome probabilities. The invariant Σ|amps|² + Σterminal = 1 holds for
/// every state produced by the operations here (up to rounding), and terminal
/// entries only ever grow.
#[derive(Clone, Debug, PartialEq)]
pub struct JointState {
    amps: BTreeMap<(BobBasis, PhotonMode), Complex64>,
    terminal: [f64; 3],
}

impl JointState {
    /// State with no live amplitude and no recorded outcomes (norm 0). Fill
    /// it with `set_amp` before use.
    pub fn empty() -> Self {
        JointState {
            amps: BTreeMap::new(),
            terminal: [0.0; 3],
        }
    }

    /// Product state: Bob's qubit times a single photon mode.
    pub fn bob_photon(bob: &QubitAmplitudes, mode: PhotonMode) -> Self {
        let mut s = JointState::empty();
        s.set_amp(BobBasis::Pass, mode, bob.a0);
        s.set_amp(BobBasis::Block, mode, bob.a1);
        s
    }

    pub fn amp(&self, bob: BobBasis, mode: PhotonMode) -> Complex64 {
        self.amps
            .get(&(bob, mode))
            .copied()
            .unwrap_or_else(|| Complex64::new(0.0, 0.0))
    }

    /// Writes one amplitude, dropping the entry when it is exactly zero.
    pub fn set_amp(&mut self, bob: BobBasis, mode: PhotonMode, amp: Complex64) {
        if amp.re == 0.0 && amp.im == 0.0 {
            self.amps.remove(&(bob, mode));
        } else {
            self.amps.insert((bob, mode), amp);
        }
    }

    /// Removes and returns one amplitude.
    pub fn take_amp(&mut self, bob: BobBasis, mode: PhotonMode) -> Complex64 {
        self.amps
            .remove(&(bob, mode))
            .unwrap_or_else(|| Complex64::new(0.0, 0.0))
    }

    /// Live entries in deterministic (Bob, mode) order.
    pub fn live_amps(&self) -> impl Iterator<Item = (BobBasis, PhotonMode, Complex64)> + '_ {
        self.amps.iter().map(|(&(b, m), &a)| (b, m, a))
    }

    pub fn terminal(&self, outcome: Outcome) -> f64 {
        self.terminal[outcome.index()]
    }

    pub fn add_terminal(&mut self, outcome: Outcome, probability: f64) {
        self.terminal[outcome.index()] += probability;
    }

    pub fn terminal_total(&self) -> f64 {
        self.terminal.iter().sum()
    }

    /// Σ|amps|² over the live modes.
    pub fn live_norm_sqr(&self) -> f64 {
        self.amps.values().map(|a| a.norm_sqr()).sum()
    }

    /// Σ|amps|² + Σterminal. 1 within rounding for any state evolved from a
    /// unit-norm input.
    pub fn total_norm(&self) -> f64 {
        self.live_norm_sqr() + self.terminal_total()
    }

    /// Rotates the amplitudes on the (`a`, `b`) mode pair:
    /// a′ = cosθ·a − sinθ·b, b′ = sinθ·a + cosθ·b, for each Bob basis state
    /// (or only `filter` when given). This is the splitter/rotator action with
    /// the convention that a pure-`a` input acquires +sinθ on `b`.
    pub fn rotate_pair(
        &mut self,
        a: PhotonMode,
        b: PhotonMode,
        theta: f64,
        filter: Option<BobBasis>,
    ) -> Result<()> {
        if a == b {
            return Err(Error::Contract("rotation modes must differ".into()));
        }
        if a.is_sink() || b.is_sink() {
            return Err(Error::Contract("cannot rotate a sink mode".into()));
        }
        let (c, s) = (theta.cos(), theta.sin());
        for bob in BOB_BASIS {
            if filter.map_or(false, |f| f != bob) {
                continue;
            }
            let va = self.amp(bob, a);
            let vb = self.amp(bob, b);
            self.set_amp(bob, a, va * c - vb * s);
            self.set_amp(bob, b, va * s + vb * c);
        }
        Ok(())
    }

    /// Moves the squared magnitude on `mode` (optionally restricted to one
    /// Bob basis state) into `terminal[outcome]` and zeroes the amplitude.
    /// The live state is not renormalized. Projecting an empty mode is a
    /// no-op, so repeated projection is idempotent.
    pub fn project_to_sink(&mut self, mode: PhotonMode, outcome: Outcome, filter: Option<BobBasis>) {
        for bob in BOB_BASIS {
            if filter.map_or(false, |f| f != bob) {
                continue;
            }
            let amp = self.take_amp(bob, mode);
            self.terminal[outcome.index()] += amp.norm_sqr();
        }
    }

    /// Applies `gate` to Bob's qubit (coherently, across every photon mode).
    pub fn apply_bob_gate(&mut self, gate: Gate) {
        let m = gate.matrix();
        let modes: Vec<PhotonMode> = {
            let mut v: Vec<PhotonMode> = self.amps.keys().map(|&(_, mode)| mode).collect();
            // keys iterate sector-major, so the same mode shows up once per
            // sector and must be sorted before dedup
            v.sort_unstable();
            v.dedup();
            v
        };
        for mode in modes {
            let p = self.amp(BobBasis::Pass, mode);
            let b = self.amp(BobBasis::Block, mode);
            let (p2, b2) = apply2(m, p, b);
            self.set_amp(BobBasis::Pass, mode, p2);
            self.set_amp(BobBasis::Block, mode, b2);
        }
    }

    /// Applies `gate` to the photon polarization qubit on every live path.
    pub fn apply_polarization_gate(&mut self, gate: Gate) {
        let m = gate.matrix();
        let mut paths: Vec<(BobBasis, PathMode)> = self
            .amps
            .keys()
            .filter(|(_, mode)| !mode.is_sink())
            .map(|&(b, mode)| (b, mode.path))
            .collect();
        paths.dedup();
        for (bob, path) in paths {
            let h = PhotonMode::live(path, Polarization::H);
            let v = PhotonMode::live(path, Polarization::V);
            let (ah, av) = (self.amp(bob, h), self.amp(bob, v));
            let (ah2, av2) = apply2(m, ah, av);
            self.set_amp(bob, h, ah2);
            self.set_amp(bob, v, av2);
        }
    }

    /// Applies `gate` to the (upper, lower) output-path qubit, per
    /// polarization. Upper is the qubit's |0⟩.
    pub fn apply_path_gate(&mut self, gate: Gate) {
        let m = gate.matrix();
        for bob in BOB_BASIS {
            for pol in [Polarization::H, Polarization::V] {
                let u = PhotonMode::live(PathMode::UpperPath, pol);
                let l = PhotonMode::live(PathMode::LowerPath, pol);
                let (au, al) = (self.amp(bob, u), self.amp(bob, l));
                if au.norm_sqr() == 0.0 && al.norm_sqr() == 0.0 {
                    continue;
                }
                let (au2, al2) = apply2(m, au, al);
                self.set_amp(bob, u, au2);
                self.set_amp(bob, l, al2);
            }
        }
    }

    /// Returns the state conditioned on survival: live amplitudes scaled to
    /// unit norm, terminal record cleared.
    pub fn renormalized(&self) -> Result<JointState> {
        let n2 = self.live_norm_sqr();
        if n2 < 1e-30 {
            return Err(Error::ZeroNorm);
        }
        let s = n2.sqrt();
        let mut out = JointState::empty();
        for (b, m, a) in self.live_amps() {
            out.set_amp(b, m, a / s);
        }
        Ok(out)
    }
}
