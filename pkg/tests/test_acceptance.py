"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` (or let the plain suite
include it). The heavy combinatorial sweep (criteria 1-3) runs once in a
module fixture: every connected labeled graph on 2..6 vertices plus 200
seeded random connected graphs on 7 and 8 vertices.
"""

import math
import time
from fractions import Fraction

import pytest

from epigraph import (
    BoundInputs,
    bound_from_walk,
    builtin_policy,
    cli,
    estimate_extinction,
    exact_extinction_complete,
    exact_hitting_time,
    extinction_lower_bound,
    generate,
)
from epigraph.verify import run_scope

MASTER_SEED = 42
MC_SEED = 20260808


def _report(criterion: str, passed: bool, detail: str) -> None:
    print(f"\nACCEPTANCE {criterion}: {'PASS' if passed else 'FAIL'} — {detail}")
    assert passed, f"{criterion}: {detail}"


@pytest.fixture(scope="module")
def sweep():
    """Criteria 1-3 share one pass over the graph set."""
    t0 = time.perf_counter()
    report = run_scope(
        "all", max_n=6, rand_ns=(7, 8), rand_count=200, seed=MASTER_SEED, mc_runs=100_000
    )
    report.wall_s = time.perf_counter() - t0
    return report


def _result(report, name):
    return next(r for r in report.results if r.name == name)


def test_criterion_1_fullset_equality(sweep):
    res = _result(sweep, "fullset_resilience_equals_cutwidth")
    ok = res.passed and res.checked == 27_475 + 200 and sweep.wall_s < 600
    _report(
        "C1 gamma(V)=W",
        ok,
        f"{res.checked} graphs (exhaustive n<=6 + 200 random n in {{7,8}}), "
        f"0 violations, sweep wall {sweep.wall_s:.0f}s < 600s",
    )


def test_criterion_2_oracle_equivalence(sweep):
    res = _result(sweep, "algorithm_matches_oracle")
    exhaustive_bags = sum(c * (1 << n) for n, c in ((2, 1), (3, 4), (4, 38), (5, 728), (6, 26_704)))
    ok = res.passed and res.checked >= exhaustive_bags
    _report(
        "C2 structured-gamma == unrestricted oracle",
        ok,
        f"{res.checked} bags compared (>= {exhaustive_bags} exhaustive), 0 violations",
    )


def test_criterion_3_property_suites(sweep):
    names = [
        "cut_superadditivity", "cut_submodularity", "cut_size_bound",
        "cut_difference_lipschitz", "cut_complement_symmetry",
        "resilience_monotone", "resilience_smoothness",
        "improvement_bag_cut_floor", "resilience_size_region",
        "high_resilience_cut_floor", "resilience_one_step_consistency",
    ]
    results = [_result(sweep, n) for n in names]
    ok = all(r.passed for r in results)
    vac = {r.name: r.vacuous for r in results if r.vacuous}
    _report(
        "C3 cut/resilience inequality suites",
        ok,
        f"{sum(r.checked for r in results)} checks across {sweep.graphs_checked} graphs, "
        f"0 violations, vacuous (premise unmet) counts reported: {vac}",
    )


def test_criterion_4_simulator_calibration():
    pol = builtin_policy("max_degree_infected")
    lines = []
    ok = True
    for n, exact in ((2, 3.0), (3, 11.0)):
        g = generate("complete", n)
        est = estimate_extinction(g, g.full_mask, pol, 1.0, 100_000, MASTER_SEED + n, workers=2)
        z = abs(est.mean_tau - exact) / est.se
        this_ok = z <= 3 and est.censored == 0 and est.runtime_s < 120
        ok = ok and this_ok
        lines.append(f"K_{n}: mean {est.mean_tau:.4f} vs {exact} (|z|={z:.2f}, {est.runtime_s:.0f}s)")
    _report("C4 simulator calibration 1e5 reps", ok, "; ".join(lines))


def test_criterion_5_birth_death_oracle_agreement():
    exact_ok = True
    for n in range(2, 21):
        for r in (1, 2, 5):
            up = [k * (n - k) for k in range(1, n)]
            down = [Fraction(r)] * n
            if exact_hitting_time(up, down, n) != exact_extinction_complete(n, r):
                exact_ok = False
    mc_lines = []
    mc_ok = True
    pol = builtin_policy("max_degree_infected")
    reps = {2: 30_000, 3: 30_000, 4: 12_000}
    for n in (2, 3, 4):
        for r in (1, 2):
            g = generate("complete", n)
            est = estimate_extinction(g, g.full_mask, pol, float(r), reps[n], MASTER_SEED + 10 * n + r, workers=2)
            exact = float(exact_extinction_complete(n, r))
            z = abs(est.mean_tau - exact) / est.se
            mc_ok = mc_ok and z <= 3
            mc_lines.append(f"K_{n},r={r}:|z|={z:.2f}")
    _report(
        "C5 birth-death oracle agreement",
        exact_ok and mc_ok,
        f"exact equality for n<=20, r in {{1,2,5}} (two independent solvers); MC {' '.join(mc_lines)}",
    )


def test_criterion_6_walk_formulas(sweep):
    up = _result(sweep, "up_crossing_probability_mc")
    below = _result(sweep, "walk_bound_below_exact")
    ok = up.passed and up.checked == 135 and below.passed and below.checked == 171
    _report(
        "C6 walk formulas",
        ok,
        f"up-crossing MC {up.checked} cells at 1e5 runs within 3 SE; "
        f"closed-form bound <= exact hitting time on all {below.checked} grid cells",
    )


def test_criterion_7_bound_composition_identity(sweep):
    ident = _result(sweep, "bound_walk_identity")
    k4 = extinction_lower_bound(BoundInputs(gamma0=4, delta=3, E=Fraction(10, 3), r=1))
    p4 = extinction_lower_bound(BoundInputs(gamma0=1, delta=2, E=5, r=1))
    ok = ident.passed and ident.checked == 100 and k4.condition_unmet and p4.condition_unmet
    _report(
        "C7 closed form == walk route",
        ok,
        f"exact rational identity on {ident.checked} random tuples; "
        f"condition_unmet on the K_4 and P_4 inputs",
    )


def test_criterion_8_exponential_growth():
    values = {n: exact_extinction_complete(n, 1) for n in range(8, 15)}
    ratios = [float(values[n + 1] / values[n]) for n in range(8, 14)]
    growth_ok = all(rho >= 1.5 for rho in ratios)

    g = generate("complete", 8)
    pol = builtin_policy("max_degree_infected")
    t0 = time.perf_counter()
    est = estimate_extinction(
        g, g.full_mask, pol, 1.0, 6, MC_SEED,
        max_time=1e10, max_events=10**10, workers=2,
    )
    wall = time.perf_counter() - t0
    exact = float(values[8])
    z = abs(est.mean_tau - exact) / est.se
    mc_ok = z <= 3 and est.censored == 0
    _report(
        "C8 exponential growth",
        growth_ok and mc_ok,
        f"K_n exact ratios n=8..14 all >= 1.5 (min {min(ratios):.1f}); "
        f"K_8 MC mean {est.mean_tau:.3e} vs exact {exact:.3e} (|z|={z:.2f}, "
        f"{est.replications} reps, {wall:.0f}s)",
    )


def test_criterion_9_cli_reproducibility(tmp_path, capsys):
    outputs = []
    cfg_path = tmp_path / "cfg.json"
    for i, tag in enumerate(("first", "second")):
        out = tmp_path / f"{tag}.csv"
        if i == 0:
            argv = [
                "simulate", "--gen", "complete:3", "--r", "1", "--reps", "400",
                "--seed", "907", "--out", str(out), "--save-config", str(cfg_path),
            ]
        else:
            import json

            cfg = json.loads(cfg_path.read_text())
            cfg["out"] = str(out)
            rerun = tmp_path / "rerun.json"
            rerun.write_text(json.dumps(cfg))
            argv = ["simulate", "--config", str(rerun)]
        assert cli.main(argv) == 0
        outputs.append(out.read_bytes())
    capsys.readouterr()

    sweeps = []
    for tag in ("s1", "s2"):
        out = tmp_path / f"{tag}.csv"
        assert cli.main(["sweep", "--family", "complete", "--n", "2:10", "--r", "1,2",
                         "--mode", "exact", "--out", str(out)]) == 0
        sweeps.append(out.read_bytes())
    capsys.readouterr()
    ok = outputs[0] == outputs[1] and sweeps[0] == sweeps[1]
    _report(
        "C9 reproducibility",
        ok,
        "simulate rerun from echoed config and repeated exact sweep are byte-identical",
    )
