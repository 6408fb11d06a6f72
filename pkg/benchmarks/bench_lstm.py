"""Compiled vs numpy LSTM recurrence, forward and backward.

    python3 benchmarks/bench_lstm.py [--repeat 5]

Reports the best of ``--repeat`` timings per (hidden size, sequence length)
and the speedup of the compiled kernel. A second table times one full
forward/backward pass of the classifier, where the recurrence is only part of
the work.
"""

import argparse
import time

import numpy as np

from rotprobe import model
from rotprobe.numerics import Tape, kernels
from rotprobe import numerics as nx


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_kernel(name, d, T, repeat):
    rng = np.random.default_rng(0)
    gx = rng.normal(size=(T, 4 * d))
    wh = rng.normal(size=(4 * d, d)) * 0.1
    dh = rng.normal(size=(T, d))
    k = kernels.BACKENDS[name]

    def run():
        h, c, g = k.lstm_forward(gx, wh, False)
        k.lstm_backward(dh, h, c, g, wh, False)

    return best_of(run, repeat)


def bench_model(name, d, repeat):
    hp = model.HyperParams(hops=10, hidden=d, seed=0)
    net = model.LcrRotHop(hp)
    rng = np.random.default_rng(1)
    emb = {"left": rng.normal(size=(8, 300)), "target": rng.normal(size=(2, 300)), "right": rng.normal(size=(10, 300))}

    def run():
        with Tape() as tape:
            loss, _ = model.batch_loss(net, [(emb, 0)], None, training=False)
        tape.backward(loss)
        nx.zero_grad(net.params.values())

    nx.set_backend(name)
    try:
        return best_of(run, repeat)
    finally:
        nx.set_backend(kernels._default())


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    names = sorted(kernels.BACKENDS)
    if "compiled" not in names:
        print("compiled kernel not built; only the numpy fallback is available")

    print("recurrence only (forward + backward), seconds")
    print(f"{'d':>5} {'T':>5} " + " ".join(f"{n:>10}" for n in names) + ("    speedup" if len(names) > 1 else ""))
    for d in (16, 64, 300):
        for T in (5, 20, 60):
            t = {n: bench_kernel(n, d, T, args.repeat) for n in names}
            line = f"{d:>5} {T:>5} " + " ".join(f"{t[n]:>10.6f}" for n in names)
            if len(names) > 1:
                line += f"    {t['python'] / t['compiled']:>6.2f}x"
            print(line)

    print("\nfull model step (10 hops, 20 words), seconds")
    for d in (16, 300):
        t = {n: bench_model(n, d, max(1, args.repeat // 2)) for n in names}
        line = f"{d:>5}       " + " ".join(f"{t[n]:>10.4f}" for n in names)
        if len(names) > 1:
            line += f"    {t['python'] / t['compiled']:>6.2f}x"
        print(line)


if __name__ == "__main__":
    main()
