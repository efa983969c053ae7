"""Smoke test for the rosenlab extension module.

Build first, for example:
    cargo build --release -p rosenlab-py --features extension-module
    cp target/release/librosenlab.so python/rosenlab.so
or `maturin develop -m crates/python/Cargo.toml --features extension-module`.
"""

import math
import sys

import rosenlab


def main():
    sim = rosenlab.Simulator(0.7, 256, oversample=8)
    a, b = sim.path(1), sim.path(2)
    assert len(a) == 257 and a.values[0] == 0.0
    assert a.values == sim.path(1).values

    assert abs(rosenlab.covariance(1.0, 1.0, 0.7) - 1.0) < 1e-12

    s = rosenlab.slt(a, 0.05)
    i = rosenlab.ilt(a, b, 0.05)
    c = rosenlab.clt(a, b, 0.05, y=0.1)
    assert min(s, i, c) >= 0.0

    try:
        rosenlab.Simulator(0.5, 16)
    except ValueError:
        pass
    else:
        raise AssertionError("H = 1/2 accepted")

    spec = rosenlab.Spectrum(0.7, nodes=400, omega=300.0, truncation=100)
    phi = spec.char_function(0.0)
    assert abs(phi - 1) < 1e-12
    assert abs(spec.sum_squares() - 0.5) < 0.05
    w = spec.density_half_width()
    step = 0.05
    xs = [-w + step * k for k in range(int(round(2 * w / step)) + 1)]
    dens = spec.density(xs)
    assert abs(sum(dens) * step - 1.0) < 1e-2

    ex = rosenlab.theoretical_exponents("slt", 0.7)
    assert ex["exists"] and abs(ex["time_exponent_sup"] - 0.3) < 1e-12

    slope, _, _ = rosenlab.fit_exponent([(d, d ** 1.5) for d in (0.1, 0.2, 0.4)], 1)
    assert abs(slope - 1.5) < 1e-9

    study = rosenlab.epsilon_study("slt", 0.7, 128, [0.1, 0.05], 20, oversample=4)
    assert len(study["differences"]) == 1

    rep = rosenlab.holder_experiment("time", "slt", 0.7, 100, 0.05, 0.2, [0.1, 0.2, 0.4], 20, oversample=4)
    assert math.isfinite(rep["slope"])

    print("rosenlab smoke test ok:", f"slt={s:.4f} ilt={i:.4f} clt={c:.4f} slope={rep['slope']:.3f}")


if __name__ == "__main__":
    sys.exit(main())
