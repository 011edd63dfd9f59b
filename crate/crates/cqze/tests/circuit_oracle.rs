//! Cross-checks the two-qubit swap-circuit oracles against an independent
//! matrix construction: explicit 4x4 gates built with a Kronecker product,
//! applied by plain matrix-vector multiplication.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cqze::transport::{
    circuit_swap_oracle, circuit_swap_stages, circuit_swap_z_oracle, circuit_swap_z_stages,
    TwoQubit,
};
use cqze::QubitAmplitudes;

const TOL: f64 = 1e-15;

type Mat2 = [[Complex64; 2]; 2];
type Mat4 = [[Complex64; 4]; 4];

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn kron2(a: Mat2, b: Mat2) -> Mat4 {
    let mut out = [[Complex64::new(0.0, 0.0); 4]; 4];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[2 * i + k][2 * j + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

fn matvec(m: &Mat4, v: &TwoQubit) -> TwoQubit {
    let mut out = [Complex64::new(0.0, 0.0); 4];
    for (row, slot) in m.iter().zip(out.iter_mut()) {
        *slot = row.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
    }
    out
}

fn identity2() -> Mat2 {
    [[c(1.0), c(0.0)], [c(0.0), c(1.0)]]
}

fn hadamard2() -> Mat2 {
    let h = c(std::f64::consts::FRAC_1_SQRT_2);
    [[h, h], [h, -h]]
}

fn pauli_x2() -> Mat2 {
    [[c(0.0), c(1.0)], [c(1.0), c(0.0)]]
}

fn pauli_z2() -> Mat2 {
    [[c(1.0), c(0.0)], [c(0.0), c(-1.0)]]
}

/// CNOT with the first (control) qubit on the high-order slot, so it swaps
/// the |10> and |11> rows.
fn cnot_matrix() -> Mat4 {
    let mut m = [[Complex64::new(0.0, 0.0); 4]; 4];
    m[0][0] = c(1.0);
    m[1][1] = c(1.0);
    m[2][3] = c(1.0);
    m[3][2] = c(1.0);
    m
}

fn max_gap(a: &TwoQubit, b: &TwoQubit) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn random_qubit(rng: &mut ChaCha8Rng) -> QubitAmplitudes {
    loop {
        let a = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let b = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if let Ok(q) = QubitAmplitudes::normalized(a, b) {
            return q;
        }
    }
}

#[test]
fn kronecker_product_factors_on_product_vectors() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x4a0b);
    let mats = [identity2(), hadamard2(), pauli_x2(), pauli_z2()];
    for _ in 0..50 {
        let a = mats[rng.gen_range(0..mats.len())];
        let b = mats[rng.gen_range(0..mats.len())];
        let x = [
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
        ];
        let y = [
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
        ];
        let xy = [x[0] * y[0], x[0] * y[1], x[1] * y[0], x[1] * y[1]];
        let lhs = matvec(&kron2(a, b), &xy);
        let ax = [a[0][0] * x[0] + a[0][1] * x[1], a[1][0] * x[0] + a[1][1] * x[1]];
        let by = [b[0][0] * y[0] + b[0][1] * y[1], b[1][0] * y[0] + b[1][1] * y[1]];
        let rhs = [ax[0] * by[0], ax[0] * by[1], ax[1] * by[0], ax[1] * by[1]];
        assert!(max_gap(&lhs, &rhs) < TOL);
    }
}

#[test]
fn plain_swap_stages_match_matrix_chain() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0c1c);
    let hh = kron2(hadamard2(), hadamard2());
    let gates = [cnot_matrix(), hh, cnot_matrix(), hh];
    for _ in 0..100 {
        let input = random_qubit(&mut rng);
        let stages = circuit_swap_stages(&input);

        let zero = Complex64::new(0.0, 0.0);
        let mut v = [input.a0(), zero, input.a1(), zero];
        assert!(max_gap(&stages[0], &v) < TOL);
        for (gate, stage) in gates.iter().zip(&stages[1..]) {
            v = matvec(gate, &v);
            assert!(max_gap(stage, &v) < TOL);
        }

        let expected_final = [input.a0(), input.a1(), zero, zero];
        assert!(max_gap(&circuit_swap_oracle(&input), &expected_final) < TOL);
    }
}

#[test]
fn z_variant_stages_match_matrix_chain() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0c1d);
    let hh = kron2(hadamard2(), hadamard2());
    let iz = kron2(identity2(), pauli_z2());
    let ix = kron2(identity2(), pauli_x2());
    let gates = [cnot_matrix(), hh, iz, cnot_matrix(), hh, ix];
    for _ in 0..100 {
        let input = random_qubit(&mut rng);
        let stages = circuit_swap_z_stages(&input);

        let zero = Complex64::new(0.0, 0.0);
        let mut v = [input.a0(), zero, input.a1(), zero];
        assert!(max_gap(&stages[0], &v) < TOL);
        for (gate, stage) in gates.iter().zip(&stages[1..]) {
            v = matvec(gate, &v);
            assert!(max_gap(stage, &v) < TOL);
        }

        let expected_final = [zero, zero, input.a0(), input.a1()];
        assert!(max_gap(&circuit_swap_z_oracle(&input), &expected_final) < TOL);
    }
}
