"""Compare the numba and numpy kernel backends.

Times each kernel on the activation shapes of the default Q-network at a
training batch, then one full forward+backward pass through the network.

Run: python benchmarks/bench_kernels.py --batch 256 --repeats 200
"""
import argparse
import time

import numpy as np

from cmdp_ids import kernels, nn


def best_ms(func, repeats):
    func()  # warm-up, triggers numba compilation
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        func()
        times.append(time.perf_counter() - t0)
    return 1000.0 * min(times)


def kernel_cases(batch, rng):
    # (name, x shape, w shape) for the three convolutions of the default network on 8 features
    convs = [("conv16", (batch, 1, 8), (16, 1, 2)),
             ("conv32", (batch, 16, 7), (32, 16, 2)),
             ("conv64", (batch, 32, 3), (64, 32, 2))]
    for name, xs, ws in convs:
        x, w = rng.normal(size=xs), rng.normal(size=ws)
        b = rng.normal(size=ws[0])
        dy = np.maximum(rng.normal(size=(xs[0], ws[0], xs[2] - ws[2] + 1)), 0.0)
        yield f"{name} fwd", lambda be, x=x, w=w, b=b: be.conv1d_forward(x, w, b, 1)
        yield f"{name} bwd", lambda be, x=x, w=w, dy=dy: be.conv1d_backward(x, w, dy, 1)
    x = rng.normal(size=(batch, 32, 6))
    _, idx = kernels.NUMPY.maxpool1d_forward(x, 2)
    dy = rng.normal(size=idx.shape)
    yield "pool fwd", lambda be: be.maxpool1d_forward(x, 2)
    yield "pool bwd", lambda be: be.maxpool1d_backward(dy, idx, 2, 6)


def network_step(batch, rng):
    params = nn.init_params(nn.unsw_qnet(8, 3), 0)
    x = rng.random((batch, 8))
    g = rng.normal(size=(batch, 3))

    def step():
        _, cache = nn.forward(params, x)
        nn.backward(params, cache, g)
    return step


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--batch", type=int, default=256)
    p.add_argument("--repeats", type=int, default=200)
    args = p.parse_args()
    rng = np.random.default_rng(0)
    backends = [kernels.get_backend("numpy"), kernels.get_backend("numba")]

    print(f"{'kernel':<14}{'numpy ms':>10}{'numba ms':>10}{'speedup':>9}")
    for name, fn in kernel_cases(args.batch, rng):
        t_np, t_nb = (best_ms(lambda be=be: fn(be), args.repeats) for be in backends)
        print(f"{name:<14}{t_np:>10.4f}{t_nb:>10.4f}{t_np / t_nb:>8.2f}x")

    step = network_step(args.batch, rng)
    results = []
    saved = kernels.active
    try:
        for be in backends:
            kernels.active = be
            results.append(best_ms(step, args.repeats))
    finally:
        kernels.active = saved
    print(f"{'net fwd+bwd':<14}{results[0]:>10.4f}{results[1]:>10.4f}{results[0] / results[1]:>8.2f}x")


if __name__ == "__main__":
    main()
