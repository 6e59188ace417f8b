"""JSON model files for piecewise quadratic systems.

Layout::

    {
      "state_dim": 2,
      "modes": [{"guard": {"L": [[1, 0]], "rho": [0]},
                 "quadratic": [Q_1, ..., Q_n], "linear": A, "offset": d}],
      "initial_set": {"center": c, "generators": G_c,
                      "binary_generators": G_b, "exponents": E,
                      "constraints": {"A_c": ..., "A_b": ..., "b": ..., "R": ...}},
      "input_set": {...},
      "horizon": 5,
      "sampling": {"grid_res": 21, "max_points": 20000, "seed": 0}
    }

``binary_generators``, ``exponents``, ``constraints``, ``input_set`` and
``sampling`` are optional. Matrices are lists of rows. Unknown keys are
rejected.
"""

import json

import numpy as np

from hpz.core import HybridPolynomialZonotope
from hpz.errors import DimensionMismatch, HPZError, ParseError, SchemaError
from hpz.nonlinear import QuadraticAffineMap
from hpz.reach import Mode, Polyhedron, PwnaModel

TOP_KEYS = {"state_dim", "modes", "initial_set", "input_set", "horizon", "sampling"}
MODE_KEYS = {"guard", "quadratic", "linear", "offset"}
GUARD_KEYS = {"L", "rho"}
SET_KEYS = {"center", "generators", "binary_generators", "exponents", "constraints"}
CONSTRAINT_KEYS = {"A_c", "A_b", "b", "R"}
SAMPLING_KEYS = {"grid_res", "max_points", "seed"}


def _obj(v, path, allowed, required):
    if not isinstance(v, dict):
        raise SchemaError(f"{path}: expected an object")
    unknown = sorted(set(v) - allowed)
    if unknown:
        raise SchemaError(f"{path}: unknown key(s) {', '.join(unknown)}")
    missing = sorted(k for k in required if k not in v)
    if missing:
        raise SchemaError(f"{path}: missing key(s) {', '.join(missing)}")
    return v


def _int(v, path, minimum=0):
    if isinstance(v, bool) or not isinstance(v, int) or v < minimum:
        raise SchemaError(f"{path}: expected an integer >= {minimum}")
    return v


def _vector(v, path):
    if not isinstance(v, list) or any(isinstance(x, (list, dict, bool)) or not isinstance(x, (int, float)) for x in v):
        raise SchemaError(f"{path}: expected a list of numbers")
    return np.array(v, dtype=float)


def _matrix(v, path, rows=None, cols=None):
    if not isinstance(v, list) or not all(isinstance(r, list) for r in v):
        raise SchemaError(f"{path}: expected a list of rows")
    widths = {len(r) for r in v}
    if len(widths) > 1:
        raise DimensionMismatch(f"{path}: rows have different lengths {sorted(widths)}")
    M = np.array([_vector(r, f"{path}[{i}]") for i, r in enumerate(v)], dtype=float).reshape(len(v), -1)
    if rows is not None and M.shape[0] != rows:
        raise DimensionMismatch(f"{path}: expected {rows} rows, got {M.shape[0]}")
    if cols is not None and M.shape[1] != cols:
        raise DimensionMismatch(f"{path}: expected {cols} columns, got {M.shape[1]}")
    return M


def _set(v, path, n=None):
    v = _obj(v, path, SET_KEYS, {"center", "generators"})
    c = _vector(v["center"], f"{path}.center")
    n = c.size if n is None else n
    if c.size != n:
        raise DimensionMismatch(f"{path}.center: expected length {n}, got {c.size}")
    G = _matrix(v["generators"], f"{path}.generators", rows=n)
    Gb = _matrix(v.get("binary_generators", [[]] * n), f"{path}.binary_generators", rows=n)
    E = None
    if "exponents" in v:
        E = _matrix(v["exponents"], f"{path}.exponents", cols=G.shape[1])
    A_c = A_b = b = R = None
    if "constraints" in v:
        con = _obj(v["constraints"], f"{path}.constraints", CONSTRAINT_KEYS, {"A_c", "b"})
        b = _vector(con["b"], f"{path}.constraints.b")
        A_c = _matrix(con["A_c"], f"{path}.constraints.A_c", rows=b.size)
        if "A_b" in con:
            A_b = _matrix(con["A_b"], f"{path}.constraints.A_b", rows=b.size, cols=Gb.shape[1])
        if "R" in con:
            R = _matrix(con["R"], f"{path}.constraints.R", cols=A_c.shape[1])
    try:
        return HybridPolynomialZonotope(c, G, Gb, E, A_c, A_b, b, R)
    except HPZError as err:
        err.args = (f"{path}: {err}",)
        raise


def model_from_dict(doc):
    """Validate a decoded model document and build the model."""
    doc = _obj(doc, "$", TOP_KEYS, {"state_dim", "modes", "initial_set", "horizon"})
    n = _int(doc["state_dim"], "$.state_dim", 1)
    if not isinstance(doc["modes"], list) or not doc["modes"]:
        raise SchemaError("$.modes: expected a non-empty list")
    X0 = _set(doc["initial_set"], "$.initial_set", n)
    U = _set(doc["input_set"], "$.input_set") if doc.get("input_set") is not None else None
    n_in = n + (0 if U is None else U.n)
    modes = []
    for i, m in enumerate(doc["modes"]):
        p = f"$.modes[{i}]"
        m = _obj(m, p, MODE_KEYS, MODE_KEYS)
        g = _obj(m["guard"], f"{p}.guard", GUARD_KEYS, GUARD_KEYS)
        rho = _vector(g["rho"], f"{p}.guard.rho")
        L = _matrix(g["L"], f"{p}.guard.L", rows=rho.size, cols=n)
        if not isinstance(m["quadratic"], list) or len(m["quadratic"]) != n:
            raise DimensionMismatch(f"{p}.quadratic: expected {n} matrices (one per state coordinate)")
        Q = [_matrix(q, f"{p}.quadratic[{r}]", rows=n_in, cols=n_in) for r, q in enumerate(m["quadratic"])]
        A = _matrix(m["linear"], f"{p}.linear", rows=n, cols=n_in)
        d = _vector(m["offset"], f"{p}.offset")
        if d.size != n:
            raise DimensionMismatch(f"{p}.offset: expected length {n}, got {d.size}")
        modes.append(Mode(Polyhedron(L, rho), QuadraticAffineMap(Q, A, d)))
    horizon = _int(doc["horizon"], "$.horizon")
    sampling = {}
    if "sampling" in doc:
        s = _obj(doc["sampling"], "$.sampling", SAMPLING_KEYS, set())
        for k in SAMPLING_KEYS & set(s):
            sampling[k] = _int(s[k], f"$.sampling.{k}", 0 if k == "seed" else 1)
    return PwnaModel(n, modes, X0, U, horizon, sampling)


def parse_model(path):
    """Read and validate a model file.

    Raises
    ------
    ParseError
        Invalid JSON (with line and column).
    SchemaError, DimensionMismatch
        Invalid content, naming the offending field.
    """
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as err:
        raise ParseError(f"{path}: cannot read file ({err.strerror})") from err
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise ParseError(f"{path}: line {err.lineno}, column {err.colno}: {err.msg}") from err
    return model_from_dict(doc)


def _set_to_dict(Z):
    out = {"center": Z.c.tolist(), "generators": Z.G_c.tolist()}
    if Z.n_b:
        out["binary_generators"] = Z.G_b.tolist()
    out["exponents"] = Z.E.tolist()
    if Z.n_c:
        out["constraints"] = {"A_c": Z.A_c.tolist(), "A_b": Z.A_b.tolist(), "b": Z.b.tolist(), "R": Z.R.tolist()}
    return out


def model_to_dict(model):
    doc = {
        "state_dim": model.state_dim,
        "modes": [
            {
                "guard": {"L": m.guard.L.tolist(), "rho": m.guard.rho.tolist()},
                "quadratic": [q.tolist() for q in m.dynamics.Q],
                "linear": m.dynamics.A.tolist(),
                "offset": m.dynamics.d.tolist(),
            }
            for m in model.modes
        ],
        "initial_set": _set_to_dict(model.initial_set),
        "horizon": model.horizon,
    }
    if model.input_set is not None:
        doc["input_set"] = _set_to_dict(model.input_set)
    if model.sampling:
        doc["sampling"] = dict(model.sampling)
    return doc


def write_model(model, path):
    with open(path, "w") as fh:
        json.dump(model_to_dict(model), fh, indent=2)
        fh.write("\n")


def models_equal(a, b):
    """Structural equality of two models."""
    if (a.state_dim, a.horizon, a.sampling) != (b.state_dim, b.horizon, b.sampling):
        return False
    if len(a.modes) != len(b.modes) or not a.initial_set.structurally_equal(b.initial_set):
        return False
    if (a.input_set is None) != (b.input_set is None):
        return False
    if a.input_set is not None and not a.input_set.structurally_equal(b.input_set):
        return False
    for ma, mb in zip(a.modes, b.modes):
        fa, fb = ma.dynamics, mb.dynamics
        same = (
            np.array_equal(ma.guard.L, mb.guard.L)
            and np.array_equal(ma.guard.rho, mb.guard.rho)
            and np.array_equal(fa.A, fb.A)
            and np.array_equal(fa.d, fb.d)
            and all(np.array_equal(qa, qb) for qa, qb in zip(fa.Q, fb.Q))
        )
        if not same:
            return False
    return True
