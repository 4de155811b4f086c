"""``key = value`` run configuration files.

Keys cover the reconstruction, network and simulation settings; unknown keys
are rejected so that typos do not pass silently.
"""
from dataclasses import asdict, dataclass, fields

from .recon import ReconConfig
from .unet import UNetConfig


@dataclass
class RunConfig:
    # network
    depth: int = 4
    filters: int = 128
    kernel: int = 3
    slope: float = 0.1
    # optimization
    lr: float = 1e-3
    iterations: int = 2000
    lam: float = 0.0
    seed: int = 0
    checkpoint_every: int = 0
    checkpoint_dir: str = ""
    plateau_stop: bool = False
    # simulation
    h: int = 64
    w: int = 64
    coils: int = 8
    pattern: str = "uniform1d"
    r: str = "4"
    acs: int = 16
    noise: float = 0.0
    phase_strength: float = 1.0

    def recon_config(self):
        unet = UNetConfig(depth=self.depth, filters=self.filters, kernel=self.kernel,
                          slope=self.slope, seed=self.seed)
        return ReconConfig(unet=unet, lr=self.lr, iterations=self.iterations, lam=self.lam,
                           seed=self.seed, checkpoint_every=self.checkpoint_every,
                           checkpoint_dir=self.checkpoint_dir, plateau_stop=self.plateau_stop)


# file key -> field name
_ALIASES = {"lambda": "lam"}
_FIELDS = {f.name: f for f in fields(RunConfig)}


class ConfigError(ValueError):
    pass


def _convert(name, text):
    typ = _FIELDS[name].type
    if typ in ("bool", bool):
        low = text.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{name}: expected a boolean, got {text!r}")
    conv = {"int": int, "float": float, "str": str}.get(typ, typ)
    try:
        return conv(text)
    except ValueError:
        raise ConfigError(f"{name}: cannot parse {text!r} as {conv.__name__}") from None


def parse(text, base=None):
    """Parse config text; values override ``base`` (default: defaults)."""
    values = asdict(base) if base is not None else {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, val = (p.strip() for p in line.split("=", 1))
        name = _ALIASES.get(key, key)
        if name not in _FIELDS or key == "lam":
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        values[name] = _convert(name, val)
    return RunConfig(**values)


def serialize(cfg):
    inv = {v: k for k, v in _ALIASES.items()}
    out = []
    for name, val in asdict(cfg).items():
        if isinstance(val, float):
            val = repr(val)
        elif isinstance(val, bool):
            val = "true" if val else "false"
        out.append(f"{inv.get(name, name)} = {val}")
    return "\n".join(out) + "\n"


def load(path, base=None):
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read(), base)


def save(path, cfg):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize(cfg))
