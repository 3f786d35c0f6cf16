"""Independent sympy derivation of the reference values in ../data/derived.json.

Run from this directory with `python3 derive_values.py > ../data/derived.json`.
"""

import json
from itertools import permutations

import sympy as sp

x, y, z, lam, w = sp.symbols("x y z lam w")
COORDS = (x, y, z, lam)


def perm_sign(seq):
    sign, s = 1, list(seq)
    for i in range(len(s)):
        for j in range(len(s) - 1 - i):
            if s[j] > s[j + 1]:
                s[j], s[j + 1] = s[j + 1], s[j]
                sign = -sign
    return sign


def add(forms):
    out = {}
    for f in forms:
        for k, v in f.items():
            out[k] = out.get(k, 0) + v
    return {k: sp.simplify(v) for k, v in out.items() if sp.simplify(v) != 0}


def scale(c, f):
    return {k: c * v for k, v in f.items()}


def wedge(a, b):
    out = {}
    for ia, ca in a.items():
        for ib, cb in b.items():
            idx = ia + ib
            if len(set(idx)) < len(idx):
                continue
            key = tuple(sorted(idx))
            out[key] = out.get(key, 0) + perm_sign(idx) * ca * cb
    return add([out])


def d(f):
    out = {}
    for idx, c in f.items():
        for k, v in enumerate(COORDS):
            if k in idx:
                continue
            full = (k,) + idx
            key = tuple(sorted(full))
            out[key] = out.get(key, 0) + perm_sign(full) * sp.diff(c, v)
    return add([out])


def one(cs):
    return {(i,): c for i, c in enumerate(cs) if c != 0}


def stj(g, h):
    g4, g44 = sp.diff(g, lam), sp.diff(g, lam, 2)
    h4, h44 = sp.diff(h, lam), sp.diff(h, lam, 2)
    om1 = one([-z, 1, 0, 0])
    theta = one([-g, 0, 1, 0])
    omega = add([one([-2 * g4**2, 0, 0, 0]), scale(g44 * h4 - g4 * h44, om1), scale(-g44, theta)])
    eta = add([theta, scale(-h4, om1)])
    dlam = one([0, 0, 0, 1])
    target = wedge(d(omega), omega)
    basis = [wedge(wedge(dlam, eta), omega), wedge(wedge(dlam, om1), omega), wedge(wedge(om1, eta), omega)]
    c = sp.symbols("c1:4")
    eqs = []
    for key in [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)]:
        eqs.append(sum(ci * b.get(key, 0) for ci, b in zip(c, basis)) - target.get(key, 0))
    sol = sp.solve(eqs, c, dict=True)[0]
    s = sp.simplify(-2 * g4 * sol[c[0]])
    t = sp.simplify(-2 * sol[c[1]])
    j = sp.simplify(-sol[c[2]])
    return s, t, j


def order12_hdot():
    # System (a) along solutions: z' = y + lam x1, lam = y1 - z x1.
    x1, x2, y1 = sp.symbols("x1 x2 y1")
    h = -z + y * x1
    zdot = y + (y1 - z * x1) * x1
    hdot = sp.diff(h, x) * x1 + sp.diff(h, y) * y1 + sp.diff(h, z) * zdot + sp.diff(h, x1) * x2
    return sp.expand(hdot)


def edp_a_value(gamma, delta, vals):
    """Equation (a) of the PDE system with placeholders replaced by numbers."""
    p, px, pxx, pu, pxu, fp, fpx = (vals[k] for k in ["p", "p_x", "p_xx", "p_u", "p_xu", "Fp", "Fp_x"])
    at = {y: p, z: px, w: pxx}
    return sp.nsimplify(pu * (fpx - delta.subs(at)) - pxu * (fp - gamma.subs(at)))


def main():
    systems = {"a": (lam, y), "b": (lam, y + lam**2), "c": (lam**2, y)}
    out = {"stj": {}}
    for name, (g, h) in systems.items():
        s, t, j = stj(g, h)
        out["stj"][name] = [str(s), str(t), str(j)]

    out["order12_hdot"] = str(order12_hdot())

    # Placeholder values for checking printed PDE equations numerically.
    vals = {"p": sp.Rational(1, 3), "p_x": sp.Rational(2, 5), "p_xx": sp.Rational(9, 4), "p_xxx": sp.Rational(-1, 2),
            "p_u": sp.Rational(3, 7), "p_v": sp.Rational(5, 6), "p_xu": sp.Rational(-2, 3), "p_xv": sp.Rational(1, 9),
            "Fp": sp.Rational(4, 3), "Fp_x": sp.Rational(-5, 8)}
    out["placeholder_values"] = {k: str(v) for k, v in vals.items()}
    edp = {
        "sys_b_branch1": edp_a_value(w, y + w**2, vals),
        "sys_b_branch2": edp_a_value(-w, y + w**2, vals),
        "sys_c": edp_a_value(sp.sqrt(w), y, vals),
    }
    out["edp_a_values"] = {k: str(v) for k, v in edp.items()}

    # gamma = w, delta = 0, k = l = 1, p = x^4 + u0 + v0: tau = 12 x^2, sigma = -1.
    pp = x**4 + sp.Symbol("u0") + sp.Symbol("v0")
    px = sp.diff(pp, x)
    pxx = sp.diff(px, x)
    tau = sp.simplify(pxx / sp.diff(pp, sp.Symbol("u0")))
    out["quartic"] = {"tau": str(tau), "sigma": "-1", "x_of_u1_v1": "sqrt((u1 + v1)/12)"}
    print(json.dumps(out, indent=2, sort_keys=True))


if __name__ == "__main__":
    main()
