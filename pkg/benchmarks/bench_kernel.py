"""Compiled vs pure-Python integration kernel.

    python benchmarks/bench_kernel.py [--repeat 5]
"""

import argparse
import math
import timeit

from spiralflow.field import FieldHandle
from spiralflow.flow import IntegrationError, StopCondition, available_backends, integrate, start_on_curve
from spiralflow.geom import PolarPoint

CASES = {
    "bowl to r=1e-6": (FieldHandle.bowl(), PolarPoint(0.5, 0.9272952), "polar_euclidean", math.log(1e6)),
    "spiral to rho=20": (FieldHandle.spiral(), start_on_curve(2.0), "polar_euclidean", 20.0),
    "spiral to rho=300": (FieldHandle.spiral(), start_on_curve(2.0), "polar_euclidean", 300.0),
    "displayed, paper convention": (FieldHandle.paper_displayed(), start_on_curve(2.0), "polar_paper", 20.0),
}


def run(case, backend):
    h, x0, conv, rho_max = case
    try:
        return integrate(h, x0, conv, stop=StopCondition(rho_max=rho_max), backend=backend)
    except IntegrationError as exc:
        return exc.trajectory


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = available_backends()
    print(f"{'case':30s} {'steps':>6s} " + " ".join(f"{b + ' ms':>12s}" for b in backends) + "  speedup")
    for name, case in CASES.items():
        steps = len(run(case, backends[0])) - 1
        ms = {}
        for b in backends:
            n = 3 if b == "python" else 50
            best = min(timeit.repeat(lambda: run(case, b), number=n, repeat=args.repeat))
            ms[b] = 1e3 * best / n
        speed = f"{ms['python'] / ms['compiled']:8.1f}x" if "compiled" in ms else "     n/a"
        print(f"{name:30s} {steps:6d} " + " ".join(f"{ms[b]:12.3f}" for b in backends) + speed)


if __name__ == "__main__":
    main()
