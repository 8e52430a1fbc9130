"""Decide whether a sequence of numbers can be the spectrum of some potential.

The check applies to equal segment lengths (l = gamma).  It fits the
eigenvalue asymptotics, then tests two coefficient sequences for square
summability.  Next it rebuilds the auxiliary function W and tests the
vanishing condition at the segment end.  A genuine spectrum passes; moving
one eigenvalue by 0.5 or inflating the asymptotic residuals does not.

    python3 demos/admissibility_check.py
"""
import numpy as np

from frozen_spectrum import Geometry, Potential, Spectrum, check_conditions, compute_spectrum

geom = Geometry(1.0, 1.0, 1.0, l_over_gamma=1)
q = Potential.from_callables(lambda t: np.cos(np.pi * t), lambda t: t - 2.0, geom,
                             dleft=lambda t: -np.pi * np.sin(np.pi * t))
spec = compute_spectrum(q, geom, 400)


def report(label, verdict):
    stages = verdict.to_dict()["stages"]
    failed = [k for k, ok in stages.items() if not ok]
    print(f"{label:<32} overall = {verdict.overall!s:<5}  failed stages: {', '.join(failed) or 'none'}")


verdict = check_conditions(spec, geom, potential=q)
report("forward spectrum", verdict)
print(f"  fitted constants: q(0) ~ {verdict.u.real:.5f}, q(l) ~ {verdict.c.real:.5f}, "
      f"h1 = {verdict.h1.real:.5f}, h2 = {verdict.h2.real:.5f}")

for i in (0, 5, 40, 150, 399):
    values = np.array(spec.values)
    values[i] += 0.5
    report(f"lambda_{i} moved by +0.5", check_conditions(Spectrum.from_values(values), geom))
