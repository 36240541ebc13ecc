"""Time the compiled RK4 kernel against the pure-Python/scipy fallback.

Runs the same driven span through both implementations, checks they agree
to near machine precision, and reports steps/second and the speedup.

    python3 benchmarks/compare_backends.py --n-max 64 --t-end 200
"""
import argparse
import math
import time

import numpy as np

from tcsync.backend import get_span_impl
from tcsync.hamiltonian import Operators, SystemParams
from tcsync.hilbert import FockTruncation, prepare_initial


def run(span_impl, ops, psi0, dt, n_samples, steps_per_sample):
    psi = psi0.copy()
    dim = psi.size
    sz1 = np.empty(n_samples)
    sz2 = np.empty(n_samples)
    nbar = np.empty(n_samples)
    norm = np.empty(n_samples)
    indptr, indices, hvals, dvals = ops.merged
    p = ops.params
    t0 = time.perf_counter()
    status, did = span_impl(psi, indptr, indices, hvals, dvals, dt,
                            0, n_samples, steps_per_sample,
                            p.alpha0, p.omega_d, p.tau,
                            dim - 8, 1.0, False,
                            sz1, sz2, nbar, norm, 0, None)
    elapsed = time.perf_counter() - t0
    if status != 0 or did != n_samples:
        raise RuntimeError(f"span aborted: status={status} samples={did}")
    return psi, elapsed


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-max", type=int, default=64)
    ap.add_argument("--dt", type=float, default=0.01)
    ap.add_argument("--t-end", type=float, default=200.0)
    ap.add_argument("--alpha0", type=float, default=0.052)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    params = SystemParams(alpha0=args.alpha0)
    trunc = FockTruncation(args.n_max, leakage_tol=0.999)
    ops = Operators.build(params, trunc)
    psi0 = prepare_initial(math.pi / 4, 5 * math.pi / 12, trunc).amplitudes
    steps_per_sample = max(1, round(0.5 / args.dt))
    n_samples = max(1, round(args.t_end / (steps_per_sample * args.dt)))
    n_steps = n_samples * steps_per_sample
    print(f"dim={trunc.dim}  steps={n_steps}  dt={args.dt}  "
          f"alpha0={args.alpha0}")

    results = {}
    for name in ("python", "compiled"):
        try:
            impl = get_span_impl(name)
        except (ImportError, KeyError) as exc:
            print(f"{name:>8}: unavailable ({exc})")
            continue
        best = math.inf
        for _ in range(args.repeat):
            psi, elapsed = run(impl, ops, psi0, args.dt, n_samples,
                               steps_per_sample)
            best = min(best, elapsed)
        results[name] = (psi, best)
        print(f"{name:>8}: {best:8.3f} s   {n_steps / best:10.0f} steps/s")

    if len(results) == 2:
        dpsi = np.max(np.abs(results["python"][0] - results["compiled"][0]))
        speedup = results["python"][1] / results["compiled"][1]
        print(f"agreement max|dpsi| = {dpsi:.3e}")
        print(f"speedup (python/compiled) = {speedup:.1f}x")


if __name__ == "__main__":
    main()
