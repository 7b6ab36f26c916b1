"""Acceptance criteria, one PASS/FAIL line each in the terminal summary."""
import math
import time
from pathlib import Path

import numpy as np
import pytest

from latticefold.energy import Penalties, evaluate_batch
from latticefold.hamiltonian import build_hamiltonian
from latticefold.model import (
    TETRAHEDRAL_ANGLE,
    Conformation,
    all_bit_patterns,
    bond_angles,
    enumerate_valid_turns,
    from_bits,
    parse_sequence,
    positions_from_turns,
    to_bits,
    turns_from_bits,
)
from latticefold.polynomial import eval_poly_batch
from latticefold.quadratize import quadratize
from latticefold.resources import (
    fit_quadratic,
    levinthal,
    qubit_count,
    shots_bound,
    shots_bound_exact,
)
from latticefold.screener import count_mutations, device_tier, msa_flag
from latticefold.solvers import (
    AnnealSchedule,
    VqeConfig,
    minimize_poly_bruteforce,
    random_valid_turns,
    solve_anneal,
    solve_cvar_vqe,
    solve_exhaustive,
    solve_qubo_bruteforce,
)
from latticefold.structio import (
    CA_CA_DISTANCE,
    radius_of_gyration,
    rmsd_kabsch,
    to_trace,
    write_pdb,
)

GOLDEN = Path(__file__).parent / "data" / "lhpgagk_exhaustive.pdb"


def test_c1_qubit_anchors(criterion):
    anchors = {12: 33, 22: 118, 141: 4967, 41: 417, 42: 438}
    got = {n: qubit_count(n).total_qubits for n in anchors}
    ok = got == anchors and got[41] <= 433 < got[42]
    criterion("C1 qubit anchors", ok, f"{got}")


def test_c2_quadratic_scaling(criterion):
    fit = fit_quadratic([(n, qubit_count(n).total_qubits) for n in range(4, 23)])
    criterion("C2 quadratic scaling", 0.20 <= fit.a <= 0.30,
              f"N^2 coefficient {fit.a:.4f} (b={fit.b:.4f}, c={fit.c:.4f})")


def test_c3_hamiltonian_matches_oracle(table, criterion):
    t0 = time.perf_counter()
    worst, counted = 0.0, {}
    for codes in ("LHPGAG", "LHPGAGK"):
        seq = parse_sequence(codes)
        ham = build_hamiltonian(seq, table)
        valid = enumerate_valid_turns(len(seq))
        counted[len(seq)] = len(valid)
        cfg = np.array([to_bits(Conformation(tuple(t), seq)) for t in valid])
        anc = all_bit_patterns(ham.layout.n_ancilla)
        h_min = np.array([
            eval_poly_batch(ham.poly, np.hstack([np.tile(r, (len(anc), 1)), anc])).min()
            for r in cfg
        ])
        oracle = evaluate_batch(valid, seq, table, "clamped", Penalties(0.0, 50.0))["total"]
        worst = max(worst, float(np.abs(h_min - oracle).max()))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-9 and counted == {6: 18, 7: 54} and dt < 1.0
    criterion("C3 Hamiltonian = oracle", ok,
              f"max |delta| {worst:.2e} over {counted} states in {dt:.2f}s")


def test_c4_qubo_minimum_preserved(table, criterion):
    rows = []
    ok = True
    for codes in ("LHPGA", "LHPGAG", "LHPGAGK"):
        ham = build_hamiltonian(parse_sequence(codes), table)
        q = quadratize(ham.poly)
        n = ham.layout.size
        native_min, native_arg = minimize_poly_bruteforce(ham.poly, n)
        qubo_min, qubo_arg = solve_qubo_bruteforce(q)
        restricted = sorted({a[:n] for a in qubo_arg})
        same = math.isclose(qubo_min, native_min, abs_tol=1e-9) and restricted == native_arg
        ok &= same
        rows.append(f"N={len(codes)}: {q.n_vars} vars min {qubo_min:.4f}/{native_min:.4f}")
    criterion("C4 QUBO minimum preservation", ok, "; ".join(rows))


def test_c5_zika_pipeline(table, zika, criterion, note):
    t0 = time.perf_counter()
    ex = solve_exhaustive(zika, table, spectrum=True)
    e_min = ex.best_energy
    spectrum = ex.extras["spectrum"]
    # the minimum energy is unique; the lattice minimizer is degenerate in the
    # free terminal bond, and the solver returns the lexicographically first
    tie_ok = ex.best_conformation.turns == min(t for t, e in spectrum if abs(e - e_min) <= 1e-9)
    ok_ex = ex.evaluations == 54 and tie_ok

    sched = AnnealSchedule(restarts=100, rng_seed=2024)
    an = solve_anneal(zika, table, sched)
    an_hits = sum(abs(e - e_min) <= 1e-9 for e in an.extras["restart_bests"])

    vqe_hits = sum(
        abs(solve_cvar_vqe(zika, table, VqeConfig(alpha=0.1, rng_seed=s)).best_energy - e_min)
        <= 1e-9
        for s in range(10)
    )
    dt = time.perf_counter() - t0
    ok = ok_ex and an_hits >= 95 and vqe_hits >= 5 and dt < 120
    criterion(
        "C5 Zika P-loop pipeline", ok,
        f"{ex.evaluations} states, min {e_min:.2f} at {ex.best_conformation.turns} "
        f"(degeneracy {ex.extras['n_degenerate_minima']}); anneal {an_hits}/100; "
        f"VQE {vqe_hits}/10; {dt:.1f}s",
    )
    rg = radius_of_gyration(to_trace(ex.best_conformation))
    note("C5 predicted Rg", f"{rg:.3f} A vs 4.8 +/- 1.0 A (within: {abs(rg - 4.8) <= 1.0}); "
         "crystal RMSD needs user-supplied coordinates")


def test_c6_shots_inverse_square(table, zika, criterion):
    spin = build_hamiltonian(zika, table).spin()
    exact = [shots_bound_exact(spin.h_max, spin.T, e) for e in (1.0, 5.0, 10.0)]
    ratios = [x / exact[-1] for x in exact]
    ceil = [shots_bound(spin.h_max, spin.T, e) for e in (1.0, 5.0, 10.0)]
    ok = np.allclose(ratios, [100.0, 4.0, 1.0], rtol=1e-12, atol=0)
    criterion("C6 measurement bound", ok, f"ratios {ratios}, S = {ceil}")


def test_c7_levinthal(criterion):
    counts = [levinthal(n) for n in range(1, 151)]
    exact = all(lv.conformations == 3 ** (2 * (lv.n - 1)) for lv in counts)
    digits = all(
        len(str(lv.conformations)) == math.floor(2 * (lv.n - 1) * math.log10(3)) + 1
        for lv in counts
    )
    times = [lv.exploration_seconds for lv in counts]
    mono = all(b > a for a, b in zip(times, times[1:])) and math.isfinite(times[-1])
    criterion("C7 Levinthal", exact and digits and mono,
              f"n=150 has {len(str(counts[-1].conformations))} digits, "
              f"{counts[-1].exploration_years:.3e} years")


def test_c8_geometry(criterion):
    rng = np.random.default_rng(8)
    worst_len, worst_ang, round_trip = 0.0, 0.0, True
    for _ in range(1000):
        n = int(rng.integers(4, 31))
        seq = parse_sequence("A" * n)
        conf = Conformation(tuple(random_valid_turns(n, rng)), seq)
        coords = to_trace(conf).coords
        worst_len = max(worst_len, float(np.abs(np.linalg.norm(np.diff(coords, axis=0), axis=1)
                                                - CA_CA_DISTANCE).max()))
        lattice = positions_from_turns(np.array(conf.turns))
        assert (((lattice[1:] - lattice[:-1]) ** 2).sum(1) == 3).all()
        worst_ang = max(worst_ang, float(np.abs(bond_angles(lattice) - TETRAHEDRAL_ANGLE).max()))
        bits = to_bits(conf)
        decoded = tuple(turns_from_bits(np.array([bits]))[0])
        round_trip &= from_bits(bits, seq) == conf and decoded == conf.turns
    ok = worst_len < 1e-9 and worst_ang <= 1e-6 and round_trip
    criterion("C8 geometry", ok,
              f"bond err {worst_len:.1e} A, angle err {worst_ang:.1e} deg, round-trip {round_trip}")


def test_c9_metrics(table, zika, criterion):
    from scipy.spatial.transform import Rotation

    rng = np.random.default_rng(9)
    worst = 0.0
    for k in range(200):
        a = rng.normal(size=(12, 3)) * 4
        b = rng.normal(size=(12, 3)) * 4
        R = Rotation.random(random_state=k).as_matrix()
        t = rng.normal(size=3) * 20
        worst = max(
            worst,
            abs(rmsd_kabsch(a @ R.T + t, b) - rmsd_kabsch(a, b)),
            abs(rmsd_kabsch(a, b) - rmsd_kabsch(b, a)),
            abs(radius_of_gyration(a @ R.T + t) - radius_of_gyration(a)),
        )
    pdb = write_pdb(to_trace(solve_exhaustive(zika, table).best_conformation)).encode()
    golden = pdb == GOLDEN.read_bytes()
    criterion("C9 metrics", worst <= 1e-9 and golden,
              f"max invariance error {worst:.1e}, golden PDB equal: {golden}")


def test_c10_screener(criterion):
    muts = count_mutations(parse_sequence("DAYAQWLKDGGPSSGRPPPS"),
                           parse_sequence("NLYIQWLKDGGPSSGRPPPS"))
    flags = [msa_flag(x) for x in (29.99, 30.0, 59.99, 60.0)]
    tiers = [device_tier(qubit_count(n).total_qubits) for n in (12, 22, 41, 42, 141)]
    ok = (muts == 3 and flags == ["orphan-like", "target", "target", "deep"]
          and tiers == [127, 127, 433, 1121, None])
    criterion("C10 screener", ok, f"mutations {muts}, flags {flags}, tiers {tiers}")
