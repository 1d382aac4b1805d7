"""Smoke test for the pytsampling extension module."""

import cmath
import random

import pytsampling as ts


def shift(n):
    return [[1 if i == (k + 1) % n else 0 for k in range(n)] for i in range(n)]


def close(u, v, tol):
    return max(abs(a - b) for a, b in zip(u, v)) <= tol


def main():
    bank = ts.SplineBank(3, 4)
    assert str(bank.g1) == "4 z^-1 + 19 + 4 z", bank.g1
    assert str(bank.g2) == "10 z^-1 + 16 + z", bank.g2
    assert str(bank.h1) == "-38/243 z - 5/486 z^2", bank.h1
    assert str(bank.h2) == "79/486 z + 10/243 z^2", bank.h2
    assert bank.residual.is_zero()
    assert bank.h1.coeff(2) == (-5, 486)
    ok, torus, round_trip = bank.pr_check()
    assert ok and torus <= 1e-12 and round_trip <= 1e-10

    low, values = ts.bspline(3, 4)
    assert low == -4 and values[4] == 19
    m, w, positive = ts.positivity_certificate(bank.g1)
    assert abs(m - 11) < 1e-9 and w == 0.5 and positive

    h1, h2 = ts.bezout(bank.g1, bank.g2)
    assert h1 == bank.h1 and h2 == bank.h2

    # Two samplers at period 2 on a 4-cycle.
    rng = random.Random(1)
    rand = lambda: complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
    samplers = [[rand() for _ in range(4)] for _ in range(2)]
    problem = ts.CyclicProblem(shift(4), [[1, 0, 0, 0]], [4], samplers, 2)
    assert problem.is_recoverable()
    rank, sv = problem.rank()
    assert rank == 4 and len(sv) == 4
    x = problem.synthesize([rand() for _ in range(4)])
    back = problem.reconstruct(problem.samples(x))
    assert close(back, x, 1e-10), (back, x)

    starved = ts.CyclicProblem(shift(4), [[1, 0, 0, 0]], [4], samplers[:1], 2)
    assert not starved.is_recoverable()
    try:
        starved.reconstruct([0j, 0j])
    except ts.TsamplingError:
        pass
    else:
        raise AssertionError("rank deficient problem reconstructed")

    # Z2 x Z2 translations on C^4, sampled on {(0,0), (1,0)}.
    t1 = [[1 if i == (k + 2) % 4 else 0 for k in range(4)] for i in range(4)]
    t2 = [[1 if i == (k // 2) * 2 + (k + 1) % 2 else 0 for k in range(4)] for i in range(4)]
    group = ts.GroupSampling(
        [2, 2], [[1, 0], [0, 1]], [[1, 0]], [t1, t2],
        [1, 0.5, 0.25, 0.125], [[1, 0, 0, 0], [0, 1, 0, 0]],
    )
    assert group.r == 2
    alpha, beta = group.frame_constants()
    assert 0 < alpha <= beta
    x = group.synthesize([rand() for _ in range(4)])
    assert close(group.reconstruct(group.samples(x)), x, 1e-10)

    a, b = ts.spectral_frame_constants([[(0, [1])]], 1)
    assert abs(a - 1) < 1e-12 and abs(b - 1) < 1e-12
    spectra = [[(-1, [0.2, 1.0, 0.3])], [(0, [0.5, -0.4])]]
    assert ts.spectral_dual_residual(spectra, 2) < 1e-9
    assert abs(bank.g1.eval_torus(0.5) - 11) < 1e-12
    assert abs(bank.g1.eval(cmath.exp(1j)) - (19 + 8 * cmath.cos(1))) < 1e-12

    print("pytsampling smoke test passed")


if __name__ == "__main__":
    main()
