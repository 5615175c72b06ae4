"""Experiment configuration: JSON schema, defaults and validation.

Validation errors carry the 1-based line of the offending key in the
source file, so messages read ``config.json:7: sparsities[1] ...``.
"""

import json
import re
from dataclasses import asdict, dataclass, field
from pathlib import Path

from ..design import DescentConfig, SearchConfig
from ..errors import BoundlabError
from ..solvers import SolverConfig

EXPERIMENTS = (
    "cacti-rrmse",
    "cacti-eigen",
    "trace-general",
    "trace-cacti",
    "tang-looseness",
    "ric-looseness",
    "mmse-compare",
)

CACTI_ARMS = ("random", "coherence", "avg-coherence")

_CACTI_DIMS = ("n1", "n2")
_GENERAL_DIMS = ("m", "n")

_TOP_KEYS = {
    "experiment", "dims", "T", "shifts", "sparsities", "k", "num_vectors", "eps", "eta",
    "seed", "solver", "descent", "search", "search_solver", "output_dir", "arms", "z",
    "train_vectors", "normalize", "scaled", "label",
}


class ConfigError(BoundlabError, ValueError):
    """Invalid experiment configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    dims: dict
    seed: int = 0
    T: int = None
    shifts: tuple = None
    sparsities: tuple = ()
    k: tuple = ()
    num_vectors: int = 100
    eps: float = 1e-5
    eta: float = 1e-5
    solver: SolverConfig = field(default_factory=SolverConfig)
    descent: DescentConfig = field(default_factory=DescentConfig)
    search: SearchConfig = field(default_factory=SearchConfig)
    search_solver: SolverConfig = field(default_factory=lambda: SolverConfig(max_iters=1000))
    output_dir: str = "out"
    arms: tuple = ()
    z: int = 3
    train_vectors: int = 50
    normalize: bool = True
    scaled: bool = False
    label: str = ""

    @property
    def is_cacti(self):
        return "n1" in self.dims

    def to_dict(self):
        d = asdict(self)
        d["shifts"] = [list(s) for s in self.shifts] if self.shifts is not None else None
        for key in ("sparsities", "k", "arms"):
            d[key] = list(d[key])
        return d


def _key_lines(text):
    lines = {}
    for i, line in enumerate(text.splitlines(), 1):
        for key in re.findall(r'"([^"\\]+)"\s*:', line):
            lines.setdefault(key, i)
    return lines


class _Checker:
    def __init__(self, source, text):
        self.source = source
        self.lines = _key_lines(text)

    def fail(self, key, msg):
        line = self.lines.get(key.split(".")[-1].split("[")[0])
        where = f"{self.source}:{line}" if line else self.source
        raise ConfigError(f"{where}: {key}: {msg}")

    def count(self, d, key, default=None, minimum=1):
        v = d.get(key, default)
        if v is None:
            self.fail(key, "is required")
        if isinstance(v, bool) or not isinstance(v, int) or v < minimum:
            self.fail(key, f"must be an integer >= {minimum}, got {v!r}")
        return v

    def real(self, d, key, default, positive=False):
        v = d.get(key, default)
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            self.fail(key, f"must be a number, got {v!r}")
        if v < 0 or (positive and v == 0):
            self.fail(key, f"must be {'>' if positive else '>='} 0, got {v!r}")
        return float(v)

    def sub(self, d, key, cls, default=None):
        raw = d.get(key)
        if raw is None:
            return default if default is not None else cls()
        if not isinstance(raw, dict):
            self.fail(key, "must be an object")
        known = set(cls.__dataclass_fields__)
        extra = sorted(set(raw) - known)
        if extra:
            self.fail(f"{key}.{extra[0]}", f"unknown field (allowed: {', '.join(sorted(known))})")
        try:
            return cls(**raw)
        except (TypeError, ValueError) as exc:
            self.fail(key, str(exc))


def parse_config(data, source="<config>", text=None):
    """Validate a decoded JSON object and return an :class:`ExperimentConfig`.

    Raises
    ------
    ConfigError
        Naming the offending field and, when ``text`` is given, its line.
    """
    chk = _Checker(source, text if text is not None else json.dumps(data, indent=1))
    if not isinstance(data, dict):
        raise ConfigError(f"{source}: top level must be a JSON object")
    unknown = sorted(set(data) - _TOP_KEYS)
    if unknown:
        chk.fail(unknown[0], "unknown field")
    exp = data.get("experiment")
    if exp not in EXPERIMENTS:
        chk.fail("experiment", f"must be one of {', '.join(EXPERIMENTS)}, got {exp!r}")

    dims = data.get("dims")
    if not isinstance(dims, dict):
        chk.fail("dims", "is required and must be an object")
    cacti_exp = exp in ("cacti-rrmse", "cacti-eigen", "trace-cacti")
    if cacti_exp or (exp == "mmse-compare" and "n1" in dims):
        wanted = _CACTI_DIMS
    else:
        wanted = _GENERAL_DIMS
    if set(dims) != set(wanted):
        chk.fail("dims", f"{exp} needs exactly the sizes {', '.join(wanted)}, got {sorted(dims)}")
    dims = {key: chk.count(dims, key) for key in wanted}
    if wanted == _GENERAL_DIMS and dims["m"] > dims["n"]:
        chk.fail("dims", f"m={dims['m']} must not exceed n={dims['n']}")

    kw = {"experiment": exp, "dims": dims}
    seed = data.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        chk.fail("seed", f"must be a nonnegative integer, got {seed!r}")
    kw["seed"] = seed

    if wanted == _CACTI_DIMS:
        T = chk.count(data, "T")
        shifts = data.get("shifts")
        if shifts is None:
            chk.fail("shifts", "is required for CACTI experiments")
        if not isinstance(shifts, list) or len(shifts) != T:
            chk.fail("shifts", f"must be a list of T={T} [dy, dx] pairs")
        for i, s in enumerate(shifts):
            if not (isinstance(s, list) and len(s) == 2 and all(isinstance(v, int) and not isinstance(v, bool) for v in s)):
                chk.fail(f"shifts[{i}]", f"must be an integer pair [dy, dx], got {s!r}")
        kw["T"] = T
        kw["shifts"] = tuple(tuple(s) for s in shifts)

    sp = data.get("sparsities", [])
    if not isinstance(sp, list):
        chk.fail("sparsities", "must be a list")
    for i, s in enumerate(sp):
        if isinstance(s, bool) or not isinstance(s, (int, float)) or not 0 < s <= 1:
            chk.fail(f"sparsities[{i}]", f"must lie in (0, 1], got {s!r}")
    ks = data.get("k", [])
    if isinstance(ks, int) and not isinstance(ks, bool):
        ks = [ks]
    if not isinstance(ks, list):
        chk.fail("k", "must be an integer or a list of integers")
    for i, v in enumerate(ks):
        if isinstance(v, bool) or not isinstance(v, int) or v < 1:
            chk.fail(f"k[{i}]", f"must be an integer >= 1, got {v!r}")
    if exp in ("cacti-rrmse", "cacti-eigen", "tang-looseness", "mmse-compare") and not sp:
        chk.fail("sparsities", f"{exp} needs at least one sparsity")
    if exp == "ric-looseness" and not (sp or ks):
        chk.fail("k", "ric-looseness needs k or sparsities")
    if exp == "mmse-compare" and len(sp) != 1:
        chk.fail("sparsities", "mmse-compare takes exactly one target sparsity")
    kw["sparsities"] = tuple(float(s) for s in sp)
    kw["k"] = tuple(ks)

    kw["num_vectors"] = chk.count(data, "num_vectors", 100)
    kw["eps"] = chk.real(data, "eps", 1e-5)
    kw["eta"] = chk.real(data, "eta", kw["eps"])
    kw["solver"] = chk.sub(data, "solver", SolverConfig)
    kw["descent"] = chk.sub(data, "descent", DescentConfig)
    kw["search"] = chk.sub(data, "search", SearchConfig)
    kw["search_solver"] = chk.sub(data, "search_solver", SolverConfig, SolverConfig(max_iters=1000))
    out = data.get("output_dir", "out")
    if not isinstance(out, str) or not out:
        chk.fail("output_dir", "must be a nonempty path string")
    kw["output_dir"] = out

    arms = data.get("arms")
    if arms is not None:
        if exp not in ("cacti-rrmse", "cacti-eigen", "trace-cacti"):
            chk.fail("arms", f"{exp} has fixed arms")
        if not isinstance(arms, list) or not arms or any(a not in CACTI_ARMS for a in arms):
            chk.fail("arms", f"must be a nonempty list drawn from {', '.join(CACTI_ARMS)}")
        if len(set(arms)) != len(arms):
            chk.fail("arms", "must not repeat")
        kw["arms"] = tuple(arms)
    elif exp in ("cacti-rrmse", "cacti-eigen", "trace-cacti"):
        kw["arms"] = ("random", "coherence")
    elif exp == "mmse-compare":
        kw["arms"] = ("random", "coherence", "mse")
    else:
        kw["arms"] = ("random",)

    z = data.get("z", 3)
    if z is not None and (isinstance(z, bool) or not isinstance(z, int) or z < 1):
        chk.fail("z", f"must be an integer >= 1 or null, got {z!r}")
    kw["z"] = z
    kw["train_vectors"] = chk.count(data, "train_vectors", 50)
    for key in ("normalize", "scaled"):
        # Tang's measure is reported on the raw Gaussian matrix
        v = data.get(key, key == "normalize" and exp != "tang-looseness")
        if not isinstance(v, bool):
            chk.fail(key, f"must be true or false, got {v!r}")
        kw[key] = v
    label = data.get("label", "")
    if not isinstance(label, str):
        chk.fail("label", "must be a string")
    kw["label"] = label
    return ExperimentConfig(**kw)


def load_config(path):
    """Read and validate a JSON config file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read ({exc.strerror})") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}: invalid JSON ({exc.msg})") from None
    return parse_config(data, str(path), text)
