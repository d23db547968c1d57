"""Writes the example inputs in this directory."""
import cmath
import json
import math
import pathlib

HERE = pathlib.Path(__file__).parent


def term(out, alpha, re, im=0.0):
    return {"out": out, "alpha": alpha, "re": re, "im": im}


def jet(k, terms, cap=2):
    return {"dim_in": k, "dim_out": k, "degree_cap": cap, "terms": terms}


def chain(window, exponents, mult, eps, terms, radius, cap=2):
    k = sum(mult)
    n = window[1] - window[0] + 1
    return {
        "window": window,
        "spectrum": {"exponents": exponents, "multiplicities": mult},
        "params": {"epsilon": eps},
        "blocks": mult,
        "maps": [jet(k, terms, cap) for _ in range(n)],
        "radii": [radius] * n,
        "extension": "constant",
    }


def point(zs):
    return [{"re": z.real, "im": z.imag} for z in zs]


def mono(alpha, c=1.0):
    return {"alpha": alpha, "re": complex(c).real, "im": complex(c).imag}


def endo(k, d, comps, pt, branch="seeded", **extra):
    j = {"k": k, "d": d, "components": comps, "point": point(pt), "branch": branch}
    j.update(extra)
    return j


def write(name, obj):
    (HERE / name).write_text(json.dumps(obj, indent=2) + "\n")


L2, L3, L4 = math.log(2), math.log(3), math.log(4)

write("spectrum_log4_log2.json", {"exponents": [L4, L2], "multiplicities": [1, 1]})
write("spectrum_log2.json", {"exponents": [L2], "multiplicities": [1]})
write("spectrum_log3_log2.json", {"exponents": [L3, L2], "multiplicities": [1, 1]})

write("chain_koenigs.json",
      chain([-20, 20], [L2], [1], 0.001, [term(0, [1], 0.5), term(0, [2], 0.1)], 0.004))
write("chain_resonant.json",
      chain([-10, 10], [L4, L2], [1, 1], 0.001,
            [term(0, [1, 0], 0.25), term(0, [0, 2], 0.1), term(1, [0, 1], 0.5)], 0.004))
write("chain_nonresonant.json",
      chain([-10, 10], [L3, L2], [1, 1], 0.001,
            [term(0, [1, 0], 1 / 3), term(0, [0, 2], 0.05), term(1, [0, 1], 0.5),
             term(1, [1, 1], 0.05)], 0.004))
write("chain_linear.json",
      chain([-10, 10], [L4, L2], [1, 1], 0.001, [term(0, [1, 0], 0.25), term(1, [0, 1], 0.5)], 1.0, cap=1))

square = [[mono([2, 0])], [mono([0, 2])]]
write("z2_fixed.json", endo(1, 2, square, [1, 1], branch="nearest"))
write("z2_circle.json", endo(1, 2, square, [cmath.exp(0.7j), 1]))
write("z2_critical.json", endo(1, 2, square, [0, 1]))
write("z2_minus_1.json",
      endo(1, 2, [[mono([2, 0]), mono([0, 2], -1.0)], [mono([0, 2])]], [0.3 + 0.2j, 1],
           equilibrium_seed=point([0.3 + 0.2j, 1])))
write("torus_square.json",
      endo(2, 2, [[mono([2, 0, 0])], [mono([0, 2, 0])], [mono([0, 0, 2])]],
           [cmath.exp(0.3j), cmath.exp(2.1j), 1]))
