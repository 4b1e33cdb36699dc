"""Run configuration: line-based `key = value` files with [section] headers.

Unknown keys are hard errors (typos in estimate knobs must not pass
silently) and physics parameters carry no defaults: nu, dt, t_end and the
initial amplitude must be explicit in every simulate config.
"""

from dataclasses import dataclass, field

from ..errors import ConfigError

# key -> (type, default); REQUIRED means no default exists
REQUIRED = object()

_SCHEMA = {
    "grid.n": (int, REQUIRED),
    "grid.length": (float, REQUIRED),
    "fluid.nu": (float, REQUIRED),
    "time.dt": (float, REQUIRED),
    "time.t_end": (float, REQUIRED),
    "time.snapshot_every": (int, 1),
    "init.kind": (str, REQUIRED),
    "init.amplitude": (float, REQUIRED),
    "init.seed": (int, 0),
    "init.spectrum_slope": (float, 2.0),
    "init.snapshot": (str, ""),
    "forcing.kind": (str, "none"),
    "forcing.amplitude": (float, 0.0),
    "forcing.decay": (float, 0.0),
    "audit.constant_C": (float, 1.0),
    "audit.lemma18_pairs": (int, 8),
    "scatter.nk": (int, 64),
    "scatter.kmax": (float, 8.0),
    "scatter.lebedev": (int, 26),
    "scatter.born_order": (int, 2),
    "paths.out": (str, ""),
}

_SUBCOMMAND_REQUIRED = {
    "simulate": ("grid.n", "grid.length", "fluid.nu", "time.dt", "time.t_end",
                 "init.kind", "init.amplitude"),
    "audit": (),
    "scatter": ("scatter.nk", "scatter.kmax", "scatter.lebedev",
                "scatter.born_order"),
    "reconstruct": (),
    "rollnik": (),
    "selftest": (),
}


@dataclass
class RunConfig:
    values: dict = field(default_factory=dict)

    def __getitem__(self, key):
        if key in self.values:
            return self.values[key]
        typ, default = _SCHEMA[key]
        if default is REQUIRED:
            raise ConfigError(f"missing required key '{key}'")
        return default

    def get(self, key, fallback=None):
        try:
            return self[key]
        except ConfigError:
            return fallback

    def has(self, key):
        return key in self.values

    def require(self, subcommand: str):
        missing = [k for k in _SUBCOMMAND_REQUIRED.get(subcommand, ())
                   if k not in self.values]
        if missing:
            raise ConfigError(
                f"'{subcommand}' needs explicit keys: {', '.join(missing)}")
        self.validate()
        return self

    def validate(self):
        n = self.get("grid.n")
        if n is not None:
            if n < 8 or n % 2 != 0:
                raise ConfigError(f"grid.n must be even and >= 8, got {n}")
        for key in ("grid.length", "fluid.nu", "time.dt", "time.t_end"):
            v = self.get(key)
            if v is not None and not (v > 0):
                raise ConfigError(f"{key} must be positive, got {v}")
        dt, t_end = self.get("time.dt"), self.get("time.t_end")
        if dt is not None and t_end is not None and dt > t_end:
            raise ConfigError("time.dt exceeds time.t_end")
        kind = self.get("init.kind")
        if kind is not None and kind not in ("taylor-green", "random-solenoidal",
                                             "from-snapshot"):
            raise ConfigError(f"unknown init.kind '{kind}'")
        fk = self.get("forcing.kind")
        if fk not in (None, "none", "taylor-green", "snapshot-sequence"):
            raise ConfigError(f"unknown forcing.kind '{fk}'")

    def resolved(self) -> dict:
        """Every schema key with its effective value (echoed into reports)."""
        out = {}
        for key, (typ, default) in sorted(_SCHEMA.items()):
            if key in self.values:
                out[key] = self.values[key]
            elif default is not REQUIRED:
                out[key] = default
        return out


def parse_config(text: str, origin: str = "<config>") -> RunConfig:
    values = {}
    section = ""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if not section:
                raise ConfigError(f"{origin}:{lineno}: empty section header")
            continue
        if "=" not in line:
            raise ConfigError(f"{origin}:{lineno}: expected 'key = value'")
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        full = f"{section}.{key}" if section else key
        if full not in _SCHEMA:
            raise ConfigError(f"{origin}:{lineno}: unknown key '{full}'")
        typ, _ = _SCHEMA[full]
        try:
            parsed = typ(val)
        except ValueError as exc:
            raise ConfigError(
                f"{origin}:{lineno}: cannot parse '{val}' as {typ.__name__} "
                f"for '{full}'") from exc
        if typ is float and not _finite(parsed):
            raise ConfigError(f"{origin}:{lineno}: non-finite value for '{full}'")
        values[full] = parsed
    cfg = RunConfig(values)
    cfg.validate()
    return cfg


def _finite(x: float) -> bool:
    return x == x and abs(x) != float("inf")


def load_config(path) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config '{path}': {exc}") from exc
    return parse_config(text, origin=str(path))


def dump_config(cfg: RunConfig) -> str:
    lines = []
    section = None
    for key, val in sorted(cfg.resolved().items()):
        sec, _, name = key.partition(".")
        if sec != section:
            lines.append(f"[{sec}]")
            section = sec
        lines.append(f"{name} = {val}")
    return "\n".join(lines) + "\n"
