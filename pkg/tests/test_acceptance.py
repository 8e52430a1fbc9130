"""Acceptance criteria, each run at its stated tolerance.

Every test prints one ``ACCEPTANCE <n> [PASS|FAIL] ...`` line; the lines
are collected again in the terminal summary.  Run alone with

    pytest tests/test_acceptance.py -v
"""
import subprocess
import sys
import time

import numpy as np

from conftest import EQUAL_GEOMETRIES, POTENTIALS, case, report_criterion, smooth_pair, spectrum, unit_geometry
from frozen_spectrum import (Potential, PotentialCharFunction, Spectrum, check_conditions, compute_spectrum,
                             compute_z, fd_spectrum, fit_asymptotics, reconstruct_charfn, recovery_errors,
                             run_recovery)
from frozen_spectrum.characterization import _delta_signs, representation_sides


def test_1_forward_matches_finite_differences():
    start = time.perf_counter()
    geom = unit_geometry()
    details, ok = [], True
    for name, q in (("zero", Potential.zero()), ("smooth", smooth_pair(geom))):
        exact = compute_spectrum(q, geom, 10).values
        gaps = [np.max(np.abs(fd_spectrum(q, geom, h, 10).values - exact) / np.abs(exact)) for h in (5e-4, 2.5e-4)]
        ratio = gaps[0] / gaps[1]
        ok &= gaps[0] <= 1e-3 and 3.0 <= ratio <= 5.0
        details.append(f"{name}: gap {gaps[0]:.2e} at h=5e-4, shrinks {ratio:.2f}x at h=2.5e-4")
    elapsed = time.perf_counter() - start
    ok &= elapsed <= 60
    assert report_criterion(1, "forward vs finite differences", ok, "; ".join(details) + f"; {elapsed:.1f}s")


def test_2_asymptotics_of_forward_spectrum():
    geom, _ = case("unit", "smooth")
    fit = fit_asymptotics(spectrum("unit", "smooth", 400), geom)
    ok = fit.pass_ and abs(fit.u - 1.0) <= 0.05
    assert report_criterion(2, "eigenvalue asymptotics (N=400)", ok,
                            f"l2 tail test {'passed' if fit.pass_ else 'failed'}, u = {fit.u.real:.6f} (q(0) = 1)")


def test_3_basis_zero_asymptotics():
    geom = unit_geometry()
    n = np.arange(1, 201)
    r = np.abs(n ** 3 * (compute_z(geom, 200).z - np.pi * n / geom.l - 1 / (geom.d * np.pi * n)))[9:]
    first, second = np.max(r[:91]), np.max(r[91:])
    ok = bool(np.all(np.isfinite(r)) and second <= 1.05 * first)
    assert report_criterion(3, "z_n third-order asymptotics", ok,
                            f"max n^3|residual| = {np.max(r):.4f} over n=10..200 "
                            f"(n<=100: {first:.4f}, n>100: {second:.4f})")


def test_4_round_trip_recovery():
    start = time.perf_counter()
    geom, q = case("unit", "smooth")
    errs = {}
    for N in (200, 400):
        errs[N] = recovery_errors(run_recovery(spectrum("unit", "smooth", N), geom).potential, q, geom)
    elapsed = time.perf_counter() - start
    e = errs[200]
    ok = e["left"] <= 1e-2 and e["right"] <= 1e-2 and errs[400]["total"] < e["total"] and elapsed <= 300
    assert report_criterion(4, "round-trip recovery", ok,
                            f"N=200 left {e['left']:.2e} right {e['right']:.2e} total {e['total']:.2e}; "
                            f"N=400 left {errs[400]['left']:.2e} right {errs[400]['right']:.2e} "
                            f"total {errs[400]['total']:.2e}; {elapsed:.1f}s")


def test_5_characteristic_function_from_spectrum():
    lam = np.linspace(-50.0, 50.0, 200)
    details, ok = [], True
    for name in ("smooth", "damped"):
        geom, q = case("unit", name)
        product = reconstruct_charfn(spectrum("unit", name, 400), geom, 400)(lam)
        exact = PotentialCharFunction(q, geom)(lam)
        rel = float(np.max(np.abs(product - exact) / np.abs(exact)))
        ok &= rel <= 1e-6
        details.append(f"{name} {rel:.2e}")
    assert report_criterion(5, "product vs potential characteristic function", ok, "max rel " + ", ".join(details))


def _inflated(spec, geom):
    fit = fit_asymptotics(spec, geom)
    n = np.arange(1, spec.count)
    l, d = geom.l, geom.d
    rho = (np.pi * n / (2 * l) + 2 / (d * np.pi * n) + 4 * l * _delta_signs(n) * fit.u / (np.pi ** 2 * n ** 2)
           + n * fit.mu.values / n ** 2)
    return Spectrum.from_values(np.concatenate([spec.values[:1], rho ** 2]))


def test_6_characterization_necessity_and_perturbations():
    admitted, missed_perturbations, missed_inflations, total_perturbed = [], [], [], 0
    for gname in EQUAL_GEOMETRIES:
        for pname in POTENTIALS:
            geom, _ = case(gname, pname)
            spec = spectrum(gname, pname, 400)
            if check_conditions(spec, geom).overall:
                admitted.append((gname, pname))
            if check_conditions(_inflated(spec, geom), geom).overall:
                missed_inflations.append((gname, pname))
            # every eigenvalue in the unit case, a spread of indices elsewhere
            indices = range(spec.count) if gname == "unit" and pname == "smooth" else (0, 1, 3, 10, 50, 200, 399)
            for i in indices:
                vals = np.array(spec.values)
                vals[i] += 0.5
                total_perturbed += 1
                if check_conditions(Spectrum.from_values(vals), geom).overall:
                    missed_perturbations.append((gname, pname, i))
    n_cases = len(EQUAL_GEOMETRIES) * len(POTENTIALS)
    ok = len(admitted) == n_cases and not missed_perturbations and not missed_inflations
    assert report_criterion(6, "characterization verdicts", ok,
                            f"{len(admitted)}/{n_cases} forward spectra admitted; "
                            f"{total_perturbed - len(missed_perturbations)}/{total_perturbed} single +0.5 "
                            f"perturbations rejected; {n_cases - len(missed_inflations)}/{n_cases} "
                            f"n-inflated spectra rejected")


def test_7_representation_identity():
    rho = np.linspace(0.5, 30.0, 50)
    details, ok = [], True
    for name in ("smooth", "damped"):
        geom, q = case("unit", name)
        lhs, rhs = representation_sides(q, geom, rho)
        rel = float(np.max(np.abs(lhs - rhs) / np.maximum(np.abs(lhs), np.abs(rhs))))
        ok &= rel <= 1e-6
        details.append(f"{name} {rel:.2e}")
    assert report_criterion(7, "W representation identity at 50 points", ok, "max rel " + ", ".join(details))


def _cli(args, cwd):
    return subprocess.run([sys.executable, "-m", "frozen_spectrum", *args], cwd=cwd, capture_output=True, text=True)


def test_8_cli_determinism(tmp_path):
    (tmp_path / "g.json").write_text('{"gamma": 1, "d": 1, "l": 1}')
    (tmp_path / "q.json").write_text('{"left": "cos(pi*t)", "right": "t - 2", "dleft": "-pi*sin(pi*t)"}')
    assert _cli(["forward", "--potential", "q.json", "--geometry", "g.json", "-N", "200", "--out", "spec.json"],
                tmp_path).returncode == 0
    commands = {
        "forward": ["forward", "--potential", "q.json", "--geometry", "g.json", "-N", "200"],
        "inverse": ["inverse", "--spectrum", "spec.json", "--geometry", "g.json"],
        "roundtrip": ["roundtrip", "--potential", "q.json", "--geometry", "g.json", "-N", "200"],
        "zeros": ["zeros", "--geometry", "g.json", "-N", "200"],
        "check": ["check", "--spectrum", "spec.json", "--geometry", "g.json"],
        "oracle": ["oracle", "--potential", "q.json", "--geometry", "g.json", "--h", "0.001", "-N", "10"],
        "plotdata-roundtrip": ["plotdata", "--kind", "roundtrip", "--potential", "q.json", "--geometry", "g.json"],
        "plotdata-asymptotics": ["plotdata", "--kind", "asymptotics", "--spectrum", "spec.json", "--geometry",
                                 "g.json"],
    }
    differing, failed = [], []
    for name, args in commands.items():
        outputs = []
        for run, threads in enumerate(("1", "1", "8")):
            out = f"{name}.{run}.out"
            proc = _cli(["--threads", threads, *args, "--out", out], tmp_path)
            if proc.returncode != 0:
                failed.append(name)
                break
            outputs.append((tmp_path / out).read_bytes())
        else:
            if not outputs[0] == outputs[1] == outputs[2]:
                differing.append(name)
    ok = not differing and not failed
    assert report_criterion(8, "CLI determinism", ok,
                            f"{len(commands) - len(differing) - len(failed)}/{len(commands)} commands byte-identical "
                            f"across two runs and --threads 1 vs 8"
                            + (f"; differing {differing}" if differing else "")
                            + (f"; failed {failed}" if failed else ""))
