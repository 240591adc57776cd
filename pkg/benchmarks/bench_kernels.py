"""Time the compiled and numpy kernel backends on training-sized batches.

    python benchmarks/bench_kernels.py [--repeat 5] [--batch 128] [--dtype float32]

Prints one line per kernel with the best-of-N wall time of each backend, the
speed-up and whether the outputs agree.  It also times one full training step
of a desk-scale MNIST network under each backend.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from shiftinv import kernels
from shiftinv.kernels import _pykernels

KERNEL_NAMES = [n for n in kernels.__all__ if n not in ("BACKEND", "python_backend", "compiled_backend")]


def _cases(batch, dtype):
    rng = np.random.default_rng(0)
    x = rng.standard_normal((batch, 8, 48, 48)).astype(dtype)
    blur = np.outer([1, 4, 6, 4, 1], [1, 4, 6, 4, 1]).astype(dtype) / 256
    _, arg = _pykernels.maxpool_forward(x, 2, 2, 0)
    dout = rng.standard_normal((batch, 8, 24, 24)).astype(dtype)
    cols = rng.standard_normal((batch * 48 * 48, 8 * 9)).astype(dtype)
    return {
        "im2col 3x3 p1": lambda b: b.im2col(x, 3, 1, 1),
        "col2im 3x3 p1": lambda b: b.col2im(cols, x.shape, 3, 1, 1),
        "maxpool fwd 2x2 s2": lambda b: b.maxpool_forward(x, 2, 2, 0),
        "maxpool fwd 2x2 s1 p1": lambda b: b.maxpool_forward(x, 2, 1, 1),
        "maxpool bwd 2x2 s2": lambda b: b.maxpool_backward(dout, arg, x.shape),
        "avgpool fwd 2x2 s2": lambda b: b.avgpool_forward(x, 2, 2, 0),
        "avgpool bwd 2x2 s2": lambda b: b.avgpool_backward(dout, x.shape, 2, 2, 0),
        "blur fwd 5x5 s2 p2": lambda b: b.depthwise_forward(x, blur, 2, 2),
    }


def _agree(a, b) -> bool:
    a = a if isinstance(a, tuple) else (a,)
    b = b if isinstance(b, tuple) else (b,)
    return all(np.allclose(np.asarray(u, dtype=np.float64), np.asarray(v, dtype=np.float64), rtol=1e-5, atol=1e-5)
               for u, v in zip(a, b))


def _best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def bench_kernels(repeat, batch, dtype):
    if kernels.compiled_backend is None:
        print("compiled backend unavailable; timing the numpy fallback only")
    print(f"{'kernel':<24}{'numpy ms':>10}{'cython ms':>11}{'speed-up':>10}  agree")
    for name, call in _cases(batch, dtype).items():
        t_py = _best(lambda: call(_pykernels), repeat)
        if kernels.compiled_backend is None:
            print(f"{name:<24}{1e3 * t_py:>10.1f}")
            continue
        t_c = _best(lambda: call(kernels.compiled_backend), repeat)
        ok = _agree(call(_pykernels), call(kernels.compiled_backend))
        print(f"{name:<24}{1e3 * t_py:>10.1f}{1e3 * t_c:>11.1f}{t_py / t_c:>9.1f}x  {'yes' if ok else 'NO'}")


def bench_train_step(repeat, batch, dtype):
    """One forward/backward pass of the desk MNIST network (48x48 canvas)."""
    from shiftinv import autodiff
    from shiftinv.config import resolve

    spec = resolve({"dataset": "mnist"}).networks[0].network_spec()
    params = autodiff.init_parameters(spec, seed=0, dtype=dtype)
    rng = np.random.default_rng(1)
    x = rng.random((batch, 1, 48, 48)).astype(dtype)
    y = rng.integers(0, 10, batch)
    times = {}
    for label, backend in (("numpy", _pykernels), ("cython", kernels.compiled_backend)):
        if backend is None:
            continue
        saved = {name: getattr(kernels, name) for name in KERNEL_NAMES}
        try:
            for name in KERNEL_NAMES:
                setattr(kernels, name, getattr(backend, name))
            times[label] = _best(lambda: autodiff.loss_and_grads(spec, params, x, y), repeat)
        finally:
            for name, fn in saved.items():
                setattr(kernels, name, fn)
    line = "  ".join(f"{k} {1e3 * v:.0f} ms" for k, v in times.items())
    if len(times) == 2:
        line += f"  speed-up {times['numpy'] / times['cython']:.1f}x"
    print(f"train step (batch {batch}): {line}")


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--batch", type=int, default=128)
    parser.add_argument("--dtype", default="float32", choices=("float32", "float64"))
    args = parser.parse_args(argv)
    bench_kernels(args.repeat, args.batch, np.dtype(args.dtype))
    bench_train_step(args.repeat, args.batch, np.dtype(args.dtype))


if __name__ == "__main__":
    main()
