"""Check reports: one record per executed check, serialized as stable JSON."""
import dataclasses
import json
from datetime import datetime, timezone

import numpy as np

from . import __version__


def jsonable(x):
    """Plain JSON types; complex values become {"re", "im"}, non-finite floats strings."""
    if dataclasses.is_dataclass(x) and not isinstance(x, type):
        return {f.name: jsonable(getattr(x, f.name)) for f in dataclasses.fields(x)
                if f.repr}
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        if np.iscomplexobj(x):
            return {"re": jsonable(x.real.tolist()), "im": jsonable(x.imag.tolist())}
        return jsonable(x.tolist())
    if isinstance(x, (complex, np.complexfloating)):
        return {"re": jsonable(float(x.real)), "im": jsonable(float(x.imag))}
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if np.isnan(x):
            return "undefined"
        if np.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return x


class Report:
    def __init__(self, command, config=None):
        self.command = command
        self.config = config
        self.checks = []
        self.results = {}
        self.error = None

    def check(self, name, passed, value=None, tolerance=None, location=None, identity=""):
        self.checks.append({"name": name, "status": "pass" if passed else "fail",
                            "value": value, "tolerance": tolerance,
                            "location": location, "identity": identity})
        return passed

    def below(self, name, value, tolerance, **kw):
        """Pass when value <= tolerance."""
        return self.check(name, bool(value <= tolerance), value, tolerance, **kw)

    def skip(self, name, reason, identity=""):
        self.checks.append({"name": name, "status": "skip", "value": reason,
                            "tolerance": None, "location": None, "identity": identity})

    @property
    def n_failed(self):
        return sum(c["status"] == "fail" for c in self.checks)

    def to_json(self, timestamp=True):
        out = {
            "tool": "anisored", "version": __version__, "command": self.command,
            "config": self.config, "checks": self.checks, "results": self.results,
            "summary": {s: sum(c["status"] == s for c in self.checks)
                        for s in ("pass", "fail", "skip")},
        }
        if self.error is not None:
            out["error"] = self.error
        if timestamp:
            out["timestamp"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
        return jsonable(out)

    def dumps(self, timestamp=True):
        return json.dumps(self.to_json(timestamp), sort_keys=True, indent=1)
