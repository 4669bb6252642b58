mod common;

use common::solve_all;
use su2eth::operators::build_observable;
use su2eth::oracle::multiplet_count;
use su2eth::spectral::matrix_elements;
use su2eth::Observable;

#[test]
fn spin_counts_match_multiplet_formula() {
    for length in [6usize, 8, 10] {
        let solved = solve_all(length, 0, 3.0);
        for spin in 0..=(length / 2) as u32 {
            let n: usize = solved.iter().map(|(_, s)| s.indices_with_spin(spin).len()).sum();
            assert_eq!(n as u64, multiplet_count(length, spin), "L={length} S={spin}");
        }
        assert!(solved.iter().all(|(_, s)| s.spin_residuals.iter().all(|&r| r < 1e-8)));
    }
    let counts: Vec<u64> = (0..=3).map(|s| multiplet_count(6, s)).collect();
    assert_eq!(counts, vec![5, 9, 5, 1]);
}

#[test]
fn magnetized_sectors_hold_only_large_spins() {
    let solved = solve_all(8, 2, 0.0);
    for (_, spec) in &solved {
        assert!(spec.spins.iter().all(|&s| s >= 2));
    }
    let n2: usize = solved.iter().map(|(_, s)| s.indices_with_spin(2).len()).sum();
    assert_eq!(n2 as u64, multiplet_count(8, 2));
}

#[test]
fn selection_rules_hold_exhaustively() {
    for length in [6usize, 8] {
        for lambda in [0.0, 3.0] {
            for (basis, spec) in &solve_all(length, 0, lambda) {
                let a = build_observable(basis, Observable::A).unwrap();
                let b = build_observable(basis, Observable::B).unwrap();
                let ta = matrix_elements(&a, spec, spec, None).unwrap();
                let tb = matrix_elements(&b, spec, spec, None).unwrap();
                for r in &ta.records {
                    if r.s_alpha != r.s_beta {
                        assert!(r.value.norm() < 1e-10, "A mixes spins in {}", basis.sector);
                    }
                }
                for r in &tb.records {
                    let ds = r.s_alpha.abs_diff(r.s_beta);
                    assert_ne!(ds, 1, "|dS| = 1 pair in {}", basis.sector);
                    if ds != 0 && ds != 2 {
                        assert!(r.value.norm() < 1e-10, "B connects dS = {ds} in {}", basis.sector);
                    }
                }
            }
        }
    }
}
