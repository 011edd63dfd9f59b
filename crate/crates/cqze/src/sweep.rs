//! (M, N) grid sweeps of the closed-form quantities with optional step
//! simulation, and their CSV serialization.
//!
//! Every cell always gets its closed-form value. The step simulation is
//! budgeted: a cell whose estimated rotation count exceeds the cap is marked
//! skipped rather than silently left out. With the `parallel` feature
//! (default) cells are evaluated across threads; the output order is the
//! same either way.

use std::io::{self, Write};

use crate::amplitudes::QubitAmplitudes;
use crate::analysis::{efficiency_closed_form, fidelity_closed_form, ExitBranch};
use crate::cnot::BranchPolicy;
use crate::error::{Error, Result};
use crate::transport::run_transport;
use crate::zeno::{cqze_outer_run_with, CycleConfig, HistoryMode};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quantity {
    Efficiency,
    Fidelity,
}

impl Quantity {
    pub fn label(self) -> &'static str {
        match self {
            Quantity::Efficiency => "efficiency",
            Quantity::Fidelity => "fidelity",
        }
    }
}

/// Rotation-step estimate for simulating one cell: one module run for
/// efficiency, the full two-round double pipeline (eight module runs) for
/// fidelity.
pub fn sim_cost(m: u32, n: u32, quantity: Quantity) -> u64 {
    let base = u64::from(m) * (u64::from(n) + 1);
    match quantity {
        Quantity::Efficiency => base,
        Quantity::Fidelity => 8 * base,
    }
}

/// Default per-cell simulation budget.
pub const DEFAULT_SIM_COST_CAP: u64 = 10_000_000;

#[derive(Clone, Debug)]
pub struct SweepSpec {
    pub m_values: Vec<u32>,
    pub n_values: Vec<u32>,
    pub bob: QubitAmplitudes,
    pub quantity: Quantity,
    pub with_simulation: bool,
    pub sim_cost_cap: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepCell {
    pub m: u32,
    pub n: u32,
    pub closed_form: f64,
    /// `None` means the cell was skipped by the simulation budget (or the
    /// sweep ran without simulation).
    pub simulated: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct SweepGrid {
    pub quantity: Quantity,
    pub bob: QubitAmplitudes,
    pub m_values: Vec<u32>,
    pub n_values: Vec<u32>,
    /// Row-major over (m_values × n_values).
    pub cells: Vec<SweepCell>,
}

impl SweepGrid {
    pub fn cell(&self, m: u32, n: u32) -> Option<&SweepCell> {
        self.cells.iter().find(|c| c.m == m && c.n == n)
    }

    /// Closed-form values of one fixed-M row, in n_values order.
    pub fn row(&self, m: u32) -> Vec<f64> {
        self.cells
            .iter()
            .filter(|c| c.m == m)
            .map(|c| c.closed_form)
            .collect()
    }
}

fn compute_cell(spec: &SweepSpec, m: u32, n: u32) -> Result<SweepCell> {
    let closed_form = match spec.quantity {
        Quantity::Efficiency => efficiency_closed_form(m, n, &spec.bob)?,
        Quantity::Fidelity => fidelity_closed_form(m, n, &spec.bob, ExitBranch::MainPath)?,
    };
    let simulated = if spec.with_simulation && sim_cost(m, n, spec.quantity) <= spec.sim_cost_cap
    {
        let cfg = CycleConfig::new(m, n)?;
        Some(match spec.quantity {
            Quantity::Efficiency => {
                let (state, _) = cqze_outer_run_with(&spec.bob, cfg, HistoryMode::None)?;
                state.live_norm_sqr()
            }
            Quantity::Fidelity => {
                run_transport(&spec.bob, cfg, BranchPolicy::ForceMain)?.transfer_overlap
            }
        })
    } else {
        None
    };
    Ok(SweepCell {
        m,
        n,
        closed_form,
        simulated,
    })
}

fn cell_indices(spec: &SweepSpec) -> Result<Vec<(u32, u32)>> {
    if spec.m_values.is_empty() || spec.n_values.is_empty() {
        return Err(Error::Config("sweep grid must be nonempty".into()));
    }
    Ok(spec
        .m_values
        .iter()
        .flat_map(|&m| spec.n_values.iter().map(move |&n| (m, n)))
        .collect())
}

fn assemble(spec: &SweepSpec, cells: Vec<SweepCell>) -> SweepGrid {
    SweepGrid {
        quantity: spec.quantity,
        bob: spec.bob.clone(),
        m_values: spec.m_values.clone(),
        n_values: spec.n_values.clone(),
        cells,
    }
}

/// Evaluates the grid cell by cell on the current thread.
pub fn sweep_serial(spec: &SweepSpec) -> Result<SweepGrid> {
    let cells = cell_indices(spec)?
        .into_iter()
        .map(|(m, n)| compute_cell(spec, m, n))
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(spec, cells))
}

/// Evaluates the grid with cells distributed across the rayon pool. Cell
/// order in the result matches [`sweep_serial`].
#[cfg(feature = "parallel")]
pub fn sweep(spec: &SweepSpec) -> Result<SweepGrid> {
    use rayon::prelude::*;
    let cells = cell_indices(spec)?
        .into_par_iter()
        .map(|(m, n)| compute_cell(spec, m, n))
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(spec, cells))
}

/// Serial stand-in with the same name when the `parallel` feature is off.
#[cfg(not(feature = "parallel"))]
pub fn sweep(spec: &SweepSpec) -> Result<SweepGrid> {
    sweep_serial(spec)
}

/// Writes the grid as CSV:
/// `M,N,alpha_sq,beta_sq,quantity,closed_form,simulated,skipped` with an
/// empty `simulated` field on skipped cells.
pub fn write_csv<W: Write>(grid: &SweepGrid, out: &mut W) -> io::Result<()> {
    writeln!(out, "M,N,alpha_sq,beta_sq,quantity,closed_form,simulated,skipped")?;
    let a2 = grid.bob.a0().norm_sqr();
    let b2 = grid.bob.a1().norm_sqr();
    for cell in &grid.cells {
        let (sim, skipped) = match cell.simulated {
            Some(v) => (v.to_string(), "false"),
            None => (String::new(), "true"),
        };
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            cell.m,
            cell.n,
            a2,
            b2,
            grid.quantity.label(),
            cell.closed_form,
            sim,
            skipped
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eq_spec(quantity: Quantity) -> SweepSpec {
        SweepSpec {
            m_values: vec![5, 10],
            n_values: vec![20, 40, 80],
            bob: QubitAmplitudes::equal_superposition(),
            quantity,
            with_simulation: true,
            sim_cost_cap: DEFAULT_SIM_COST_CAP,
        }
    }

    #[test]
    fn grid_shape_and_order() {
        let grid = sweep_serial(&eq_spec(Quantity::Efficiency)).unwrap();
        assert_eq!(grid.cells.len(), 6);
        let keys: Vec<(u32, u32)> = grid.cells.iter().map(|c| (c.m, c.n)).collect();
        assert_eq!(keys, vec![(5, 20), (5, 40), (5, 80), (10, 20), (10, 40), (10, 80)]);
    }

    #[test]
    fn empty_grid_is_rejected() {
        let mut spec = eq_spec(Quantity::Efficiency);
        spec.n_values.clear();
        assert!(sweep_serial(&spec).is_err());
    }

    #[test]
    fn zero_cap_skips_every_cell_but_keeps_closed_form() {
        let mut spec = eq_spec(Quantity::Efficiency);
        spec.sim_cost_cap = 0;
        let grid = sweep_serial(&spec).unwrap();
        assert!(grid.cells.iter().all(|c| c.simulated.is_none()));
        assert!(grid.cells.iter().all(|c| c.closed_form > 0.0));
    }

    #[test]
    fn cap_boundary_is_per_cell() {
        let mut spec = eq_spec(Quantity::Efficiency);
        // exactly the cost of the (5, 40) cell: (5, 20) and (5, 40) fit,
        // everything costlier is skipped
        spec.sim_cost_cap = sim_cost(5, 40, Quantity::Efficiency);
        let grid = sweep_serial(&spec).unwrap();
        assert!(grid.cell(5, 20).unwrap().simulated.is_some());
        assert!(grid.cell(5, 40).unwrap().simulated.is_some());
        assert!(grid.cell(5, 80).unwrap().simulated.is_none());
        assert!(grid.cell(10, 20).unwrap().simulated.is_none());
    }

    #[test]
    fn simulation_flag_off_means_closed_form_only() {
        let mut spec = eq_spec(Quantity::Fidelity);
        spec.with_simulation = false;
        let grid = sweep_serial(&spec).unwrap();
        assert!(grid.cells.iter().all(|c| c.simulated.is_none()));
    }

    #[test]
    fn efficiency_rows_non_decreasing_in_chain_length() {
        let spec = SweepSpec {
            m_values: vec![5, 10, 25, 50, 75],
            n_values: vec![100, 375, 750, 1125, 1500],
            bob: QubitAmplitudes::equal_superposition(),
            quantity: Quantity::Efficiency,
            with_simulation: false,
            sim_cost_cap: 0,
        };
        let grid = sweep_serial(&spec).unwrap();
        for &m in &spec.m_values {
            let row = grid.row(m);
            for w in row.windows(2) {
                assert!(w[1] >= w[0] - 1e-12, "row M={m} decreases: {row:?}");
            }
        }
    }

    #[test]
    fn fidelity_grid_spot_check() {
        let spec = SweepSpec {
            m_values: vec![15],
            n_values: vec![50, 300],
            bob: QubitAmplitudes::equal_superposition(),
            quantity: Quantity::Fidelity,
            with_simulation: false,
            sim_cost_cap: 0,
        };
        let grid = sweep_serial(&spec).unwrap();
        assert!(
            grid.cell(15, 300).unwrap().closed_form > grid.cell(15, 50).unwrap().closed_form
        );
    }

    #[test]
    fn single_cell_efficiency_checkpoint() {
        let spec = SweepSpec {
            m_values: vec![50],
            n_values: vec![1250],
            bob: QubitAmplitudes::equal_superposition(),
            quantity: Quantity::Efficiency,
            with_simulation: true,
            sim_cost_cap: DEFAULT_SIM_COST_CAP,
        };
        let grid = sweep_serial(&spec).unwrap();
        let cell = grid.cell(50, 1250).unwrap();
        assert!((cell.closed_form - 0.95).abs() < 0.005);
        let sim = cell.simulated.unwrap();
        assert!((sim - 0.952_553_663).abs() < 1e-8);
    }

    #[test]
    fn fidelity_cells_simulate_the_transfer_overlap() {
        let spec = SweepSpec {
            m_values: vec![5],
            n_values: vec![20],
            bob: QubitAmplitudes::equal_superposition(),
            quantity: Quantity::Fidelity,
            with_simulation: true,
            sim_cost_cap: DEFAULT_SIM_COST_CAP,
        };
        let grid = sweep_serial(&spec).unwrap();
        let cell = grid.cell(5, 20).unwrap();
        // simulated and closed-form agree to rounding here
        assert!((cell.simulated.unwrap() - cell.closed_form).abs() < 1e-12);
    }

    #[test]
    fn parallel_and_serial_agree_exactly() {
        for quantity in [Quantity::Efficiency, Quantity::Fidelity] {
            let spec = eq_spec(quantity);
            let a = sweep(&spec).unwrap();
            let b = sweep_serial(&spec).unwrap();
            assert_eq!(a.cells, b.cells);
        }
    }

    #[test]
    fn csv_bytes_are_stable() {
        let spec = SweepSpec {
            m_values: vec![2],
            n_values: vec![1, 4],
            bob: QubitAmplitudes::equal_superposition(),
            quantity: Quantity::Efficiency,
            with_simulation: true,
            // only the (2, 1) cell fits
            sim_cost_cap: 4,
        };
        let grid = sweep_serial(&spec).unwrap();
        let mut buf = Vec::new();
        write_csv(&grid, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "M,N,alpha_sq,beta_sq,quantity,closed_form,simulated,skipped"
        );
        let first = lines.next().unwrap();
        assert!(first.starts_with("2,1,0.5"), "{first}");
        assert!(first.ends_with(",false"));
        let second = lines.next().unwrap();
        assert!(second.contains(",,true"), "{second}");
        assert!(lines.next().is_none());
        // byte-for-byte reproducible
        let mut buf2 = Vec::new();
        write_csv(&sweep_serial(&spec).unwrap(), &mut buf2).unwrap();
        assert_eq!(text.as_bytes(), buf2.as_slice());
    }
}
