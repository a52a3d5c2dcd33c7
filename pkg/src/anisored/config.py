"""Run configuration: strict JSON parsing, defaults and tensor construction.

Precedence is command-line flags > config file > defaults.
"""
import copy
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .errors import FieldFileError, ParseError, ValidationError
from .fields import CoefficientTensor, Grid2, PolyField

DEFAULTS = {
    "domain": {"center": [0.0, 0.0], "half_width": 0.5},
    "grid": {"n": 17},
    "tolerances": {"factor_res": 1e-9, "sylvester_res": 1e-10, "sep_tol": 1e-8,
                   "identity_res": 1e-10, "min_order": 1.8},
    "carleman": {"tau": [20.0, 40.0, 80.0, 160.0], "nu": 1.0, "r_min": None,
                 "weight_mode": "log", "max_spread": 10.0},
    "verify": {"n_random": 50, "degree": 3, "seed": 0, "levels": 3},
    "vanish": {"radii": [0.4, 0.2, 0.1, 0.05]},
    "sigma": None, "nu": None, "nu0": None,
}

SHAPES = {"A": (2, 2, 2, 2), "B": (2, 2, 2), "C": (2, 2)}


def schema():
    return json.loads(resources.files("anisored").joinpath("schemas/config.schema.json").read_text())


def _merge(base, over):
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


@dataclass
class RunConfig:
    raw: dict
    base_dir: Path = field(default=Path("."), repr=False)

    def __getitem__(self, key):
        return self.raw[key]

    @property
    def grid(self):
        d = self.raw["domain"]
        return Grid2(d["half_width"], self.raw["grid"]["n"], tuple(d["center"]))

    @property
    def center(self):
        return tuple(float(v) for v in self.raw["domain"]["center"])

    def has_tensor(self):
        return "coefficients" in self.raw or "example5" in self.raw

    def tensor(self):
        if "coefficients" in self.raw:
            return build_tensor(self.raw["coefficients"], self.grid, self.base_dir)
        if "example5" in self.raw:
            from .checkers import Example5Params, example5
            e = self.raw["example5"]
            return example5(Example5Params(e["a"], e["b"], e["c"], e["f"]))[0]
        raise ValidationError("config has neither 'coefficients' nor 'example5'")

    def echo(self):
        return copy.deepcopy(self.raw)


def validate(obj, base_dir=Path(".")):
    """Schema check plus the invariants JSON Schema cannot express."""
    try:
        jsonschema.validate(obj, schema())
    except jsonschema.ValidationError as e:
        path = ".".join(str(p) for p in e.absolute_path) or "<root>"
        raise ValidationError(f"{path}: {e.message}") from None
    cfg = _merge(DEFAULTS, obj)
    n = cfg["grid"]["n"]
    if n < 9 or n % 2 == 0:
        raise ValidationError("grid.n must be odd ≥ 9")
    tau = cfg["carleman"]["tau"]
    if any(b <= a for a, b in zip(tau, tau[1:])):
        raise ValidationError("carleman.tau must be strictly ascending")
    coeffs = cfg.get("coefficients")
    if coeffs:
        for name, entry in coeffs.items():
            if isinstance(entry, dict) and "file" in entry:
                if not (base_dir / entry["file"]).is_file():
                    raise ValidationError(f"coefficients.{name}: file {entry['file']} does not exist")
    return RunConfig(cfg, base_dir)


def parse_config(path=None, text=None):
    """Strict parse of a JSON config; unknown keys are rejected."""
    base = Path(".")
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as e:
            raise ParseError(f"cannot read config: {e}") from None
        base = Path(path).resolve().parent
    if text is None:
        return validate({}, base)
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, line=e.lineno) from None
    if not isinstance(obj, dict):
        raise ParseError("config must be a JSON object", line=1)
    return validate(obj, base)


def _load_entry(entry, base_dir):
    if isinstance(entry, dict):
        try:
            return json.loads((base_dir / entry["file"]).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise FieldFileError(f"cannot load {entry['file']}: {e}") from None
    return entry


def _poly_leaf(leaf, where):
    if isinstance(leaf, (int, float)):
        return PolyField(np.array([[float(leaf)]]))
    if not isinstance(leaf, list):
        raise ValidationError(f"{where}: expected a number or a monomial list")
    terms = []
    for m in leaf:
        if not (isinstance(m, dict) and set(m) == {"i", "j", "coeff"}):
            raise ValidationError(f"{where}: monomials are {{i, j, coeff}} objects")
        terms.append((int(m["i"]), int(m["j"]), float(m["coeff"])))
    return PolyField.from_monomials(terms)


def _nested(entry, shape, where):
    """Walk a nested list of the given tensor shape, returning its leaves row-major."""
    if not shape:
        return [entry]
    if not isinstance(entry, list) or len(entry) != shape[0]:
        raise ValidationError(f"{where}: expected {shape[0]} entries along this axis")
    out = []
    for k, sub in enumerate(entry):
        out.extend(_nested(sub, shape[1:], f"{where}[{k}]"))
    return out


def build_tensor(coeffs, grid, base_dir=Path(".")):
    mode = coeffs["mode"]
    parts = {}
    for name, shape in SHAPES.items():
        if name not in coeffs:
            parts[name] = None
            continue
        entry = _load_entry(coeffs[name], base_dir)
        where = f"coefficients.{name}"
        leaves = _nested(entry, shape, where)
        if mode == "constant":
            try:
                parts[name] = np.array(leaves, dtype=float).reshape(shape)
            except (TypeError, ValueError):
                raise ValidationError(f"{where}: constant mode needs numeric leaves") from None
        elif mode == "poly":
            parts[name] = PolyField.stack([_poly_leaf(l, where) for l in leaves], shape)
        else:
            try:
                arr = np.array(leaves, dtype=float)
            except (TypeError, ValueError):
                raise ValidationError(f"{where}: grid mode needs numeric sample arrays") from None
            if arr.shape[1:] != (grid.n, grid.n):
                raise ValidationError(f"{where}: samples must be {grid.n} x {grid.n}")
            parts[name] = np.moveaxis(arr.reshape(shape + (grid.n, grid.n)), (-2, -1), (0, 1))
    if mode == "constant":
        return CoefficientTensor.constant(parts["A"], parts["B"], parts["C"])
    if mode == "poly":
        return CoefficientTensor.polynomial(parts["A"], parts["B"], parts["C"])
    return CoefficientTensor.sampled(parts["A"], parts["B"], parts["C"], grid)


def load_field_file(path):
    """Grid field file: {"half_width", "n", "center"?, "values"} with values (n, n) or (n, n, k)."""
    try:
        obj = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise FieldFileError(f"cannot load field file {path}: {e}") from None
    try:
        grid = Grid2(float(obj["half_width"]), int(obj["n"]), tuple(obj.get("center", (0.0, 0.0))))
        values = np.array(obj["values"], dtype=float)
    except (KeyError, TypeError, ValueError) as e:
        raise FieldFileError(f"malformed field file {path}: {e}") from None
    if values.shape[:2] != (grid.n, grid.n):
        raise FieldFileError(f"field values must start with shape ({grid.n}, {grid.n})")
    return grid, values
