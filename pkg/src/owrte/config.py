"""Run configuration: declarative TOML file, validated dataclass blocks, stable hash."""

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field, fields
from typing import Optional

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib
import tomli_w

from .errors import ConfigurationError


@dataclass
class MediumBlock:
    type: str = "gaussian"
    variance_scale: float = 1.0
    r0: float = 1.0
    q_cutoff: float = 1e3
    path: Optional[str] = None


@dataclass
class ParamsBlock:
    k: float = 1.0
    ell: float = 20.0
    alpha: float = 0.1
    d: int = 1
    kappa_max: Optional[float] = None


@dataclass
class GridBlock:
    n_kappa: int = 64
    n_radial: int = 16
    n_angular: int = 32
    rule: str = "gauss"
    half_width: Optional[float] = None


@dataclass
class SourceBlock:
    kind: str = "gaussian"
    kappa_width: float = 0.05
    normalization: float = 1.0
    samples_path: Optional[str] = None


@dataclass
class SolverBlock:
    method: str = "rk4"
    z: str = "0,0.5S,1S,2S"
    steps_per_mfp: int = 50
    imag: bool = True
    threads: int = 1
    drift_power: int = 1


@dataclass
class WignerBlock:
    x_extent: float = 40.0      # box length in units of S(0)
    n_x: int = 256
    beam_width: float = 0.5     # Gaussian width of the profile in units of S(0)


@dataclass
class MCBlock:
    particles: int = 100000
    start: str = "source"       # 'source' or 'mono'
    kappa0: float = 0.0


@dataclass
class OutputBlock:
    directory: str = "out"
    formats: list = field(default_factory=lambda: ["csv", "json"])


@dataclass
class ChecksBlock:
    hg: float = 1e-10
    hg_norm: float = 1e-12
    rte3d: float = 1e-12
    paraxial_kernel: float = 0.02
    paraxial_l1: float = 0.02
    diffusion_rate: float = 0.05
    diffusion_a0: float = 1e-10
    mc_bin_fraction: float = 0.99
    n_sigma: float = 4.0
    chi2_alpha: float = 1e-3
    coherent_decay: float = 1e-12


_BLOCKS = {
    "medium": MediumBlock, "params": ParamsBlock, "grid": GridBlock, "source": SourceBlock,
    "solver": SolverBlock, "wigner": WignerBlock, "mc": MCBlock, "output": OutputBlock,
    "checks": ChecksBlock,
}


@dataclass
class RunConfig:
    medium: MediumBlock = field(default_factory=MediumBlock)
    params: ParamsBlock = field(default_factory=ParamsBlock)
    grid: GridBlock = field(default_factory=GridBlock)
    source: SourceBlock = field(default_factory=SourceBlock)
    solver: SolverBlock = field(default_factory=SolverBlock)
    wigner: WignerBlock = field(default_factory=WignerBlock)
    mc: MCBlock = field(default_factory=MCBlock)
    output: OutputBlock = field(default_factory=OutputBlock)
    checks: ChecksBlock = field(default_factory=ChecksBlock)
    seed: int = 42

    # --- serialization ---

    def to_dict(self):
        out = {"seed": self.seed}
        for name in _BLOCKS:
            blk = dataclasses.asdict(getattr(self, name))
            out[name] = {k: v for k, v in blk.items() if v is not None}
        return out

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise ConfigurationError("configuration must be a table")
        unknown = set(data) - set(_BLOCKS) - {"seed"}
        if unknown:
            raise ConfigurationError(f"unknown section(s) {sorted(unknown)}", sorted(unknown)[0])
        kw = {}
        for name, typ in _BLOCKS.items():
            blk = data.get(name, {})
            if not isinstance(blk, dict):
                raise ConfigurationError("expected a table", name)
            kw[name] = _build_block(name, typ, blk)
        seed = data.get("seed", 42)
        if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
            raise ConfigurationError("seed must be a nonnegative integer", "seed")
        return cls(seed=seed, **kw)

    def to_toml(self):
        return tomli_w.dumps(self.to_dict())

    @classmethod
    def from_toml(cls, text):
        try:
            data = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigurationError(f"malformed TOML: {exc}") from None
        return cls.from_dict(data)

    @classmethod
    def load(cls, path):
        try:
            with open(path, encoding="utf-8") as fh:
                return cls.from_toml(fh.read())
        except OSError as exc:
            raise ConfigurationError(f"cannot read config: {exc.strerror}", str(path)) from None

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_toml())

    def config_hash(self):
        """sha256 of the canonical JSON form.

        The output directory is left out: it decides where results go, not
        what they are.
        """
        data = self.to_dict()
        data.get("output", {}).pop("directory", None)
        blob = json.dumps(data, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def override(self, dotted, value):
        """Return a copy with ``section.key`` set from a string (TOML value syntax)."""
        data = self.to_dict()
        if dotted == "seed":
            data["seed"] = _parse_value(value)
            return RunConfig.from_dict(data)
        try:
            sec, key = dotted.split(".", 1)
        except ValueError:
            raise ConfigurationError("override keys look like section.key", dotted) from None
        data.setdefault(sec, {})[key] = _parse_value(value)
        return RunConfig.from_dict(data)


def _parse_value(text):
    if not isinstance(text, str):
        return text
    try:
        return tomllib.loads(f"v = {text}")["v"]
    except tomllib.TOMLDecodeError:
        return text


def _build_block(name, typ, blk):
    known = {f.name: f for f in fields(typ)}
    unknown = set(blk) - set(known)
    if unknown:
        key = sorted(unknown)[0]
        raise ConfigurationError(f"unknown key {key!r}", f"{name}.{key}")
    kw = {}
    for key, val in blk.items():
        default = known[key].default
        kw[key] = _coerce(val, default, f"{name}.{key}", known[key].type)
    return typ(**kw)


def _coerce(val, default, path, annotation):
    text = str(annotation)
    if "float" in text:
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            raise ConfigurationError(f"expected a number, got {val!r}", path)
        return float(val)
    if "int" in text and "Optional" not in text:
        if isinstance(val, float) and val.is_integer():
            val = int(val)
        if isinstance(val, bool) or not isinstance(val, int):
            raise ConfigurationError(f"expected an integer, got {val!r}", path)
        return val
    if "bool" in text:
        if not isinstance(val, bool):
            raise ConfigurationError(f"expected true/false, got {val!r}", path)
        return val
    if "list" in text:
        if not isinstance(val, list):
            raise ConfigurationError(f"expected a list, got {val!r}", path)
        return list(val)
    if not isinstance(val, str):
        raise ConfigurationError(f"expected a string, got {val!r}", path)
    return val
