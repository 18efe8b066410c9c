"""Experiment configuration: a flat, sectioned key-value file.

Format: ``[section]`` headers followed by ``key = value`` lines; ``#`` starts
a comment; values are strings (optionally quoted), numbers, booleans, or
comma-separated lists of those.  ``print_schema`` documents every recognized
key.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from .errors import ConfigError
from .optimize import OptimizerConfig
from .path_space import DiscretePathSpace, exp_weighted_space, uniform_space
from .process_sim import KINDS, ProcessSpec

SCHEMA = """\
# fquant experiment config: sectioned key = value lines, '#' comments.

[process]
kind = brownian        # one of: brownian, bridge, ou, fbm, diffusion_euler,
                       #         gamma, compound_poisson, stable_levy
                       # (diffusion_euler needs callables and is API-only)
H = 0.75               # fbm only
c = 1.0                # ou only: covariance exp(-c|s-t|)
a = 1.0                # gamma only: rate
lam = 1.0              # compound_poisson only: jump intensity
jump_law = normal      # compound_poisson only: normal | uniform | exponential
rho = 1.5              # stable_levy only
x0 = 0.0               # start value (brownian only)

[space]
m = 512                # grid nodes (>= 2)
t_end = 1.0            # grid spans [0, t_end]
p = 2.0                # norm exponent (>= 1)
d = 1                  # coordinate dimension
measure = lebesgue     # lebesgue | exp:<b>  (quadrature for e^{-b t} dt)

[quantizer]
n = 8                  # codebook size
r = 2.0                # distortion exponent (>= 1)

[optimizer]
method = lloyd         # lloyd | sgd
max_iters = 200
tol = 1e-9
c0 = 0.1               # optional: SGD step numerator
decay = 0.0001         # optional: SGD step decay
empty_cell_policy = split_largest   # split_largest | resample

[sample]
n_paths = 10000
seed = 12345

[bounds]               # bounds subcommand only
marginal_sizes = 2,2   # one size per coordinate, product <= n
norm = lp              # lp | sup
cap = 4096

[output]
dir = out
formats = json,csv,binary
"""

_KNOWN_SECTIONS = ("process", "space", "quantizer", "optimizer", "sample",
                   "bounds", "output")


def _parse_scalar(text: str):
    text = text.strip()
    if len(text) >= 2 and text[0] == text[-1] and text[0] in "'\"":
        return text[1:-1]
    low = text.lower()
    if low in ("true", "false"):
        return low == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    return text


def parse_config_text(text: str) -> dict:
    """Parse the sectioned key-value format into {section: {key: value}}."""
    sections: dict[str, dict] = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if not current:
                raise ConfigError(f"line {lineno}: empty section name")
            sections.setdefault(current, {})
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        if current is None:
            raise ConfigError(f"line {lineno}: key outside any [section]")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key or not value:
            raise ConfigError(f"line {lineno}: malformed 'key = value' in {raw!r}")
        if "," in value:
            sections[current][key] = [_parse_scalar(v) for v in value.split(",")]
        else:
            sections[current][key] = _parse_scalar(value)
    return sections


@dataclass(frozen=True)
class ExperimentConfig:
    process: dict
    space: dict
    quantizer: dict
    optimizer: dict
    sample: dict
    bounds: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)
    raw_text: str = ""

    @property
    def config_hash(self) -> str:
        canon = repr(sorted((s, sorted(d.items())) for s, d in [
            ("process", self.process), ("space", self.space),
            ("quantizer", self.quantizer), ("optimizer", self.optimizer),
            ("sample", self.sample), ("bounds", self.bounds),
            ("output", self.output)]))
        return hashlib.sha256(canon.encode()).hexdigest()[:16]

    def build_space(self) -> DiscretePathSpace:
        sp = self.space
        m = int(sp.get("m", 128))
        t_end = float(sp.get("t_end", 1.0))
        p = float(sp.get("p", 2.0))
        d = int(sp.get("d", 1))
        measure = str(sp.get("measure", "lebesgue"))
        if measure == "lebesgue":
            return uniform_space(t_end, m, p=p, d=d)
        if measure.startswith("exp:"):
            return exp_weighted_space(t_end, m, b=float(measure[4:]), p=p, d=d)
        raise ConfigError(f"unknown measure {measure!r}; use 'lebesgue' or 'exp:<b>'")

    def build_process_spec(self) -> ProcessSpec:
        pr = dict(self.process)
        kind = pr.pop("kind", None)
        if kind not in KINDS:
            raise ConfigError(f"[process] kind must be one of {KINDS}, got {kind!r}")
        if kind == "diffusion_euler":
            raise ConfigError("diffusion_euler needs drift/diffusion callables; "
                              "build its ProcessSpec in code, not from a config file")
        x0 = float(pr.pop("x0", 0.0))
        params = {k: v for k, v in pr.items()}
        try:
            return ProcessSpec(kind=kind, params=params, x0=x0)
        except Exception as exc:
            raise ConfigError(f"[process] {exc}") from exc

    def build_optimizer(self, seed: int) -> OptimizerConfig:
        op = self.optimizer
        try:
            return OptimizerConfig(
                method=str(op.get("method", "lloyd")),
                max_iters=int(op.get("max_iters", 200)),
                tol=float(op.get("tol", 1e-9)),
                sgd_c0=float(op["c0"]) if "c0" in op else None,
                sgd_decay=float(op["decay"]) if "decay" in op else None,
                empty_cell_policy=str(op.get("empty_cell_policy", "split_largest")),
                seed=seed,
            )
        except ConfigError:
            raise
        except Exception as exc:
            raise ConfigError(f"[optimizer] {exc}") from exc

    @property
    def n(self) -> int:
        return int(self.quantizer.get("n", 8))

    @property
    def r(self) -> float:
        return float(self.quantizer.get("r", 2.0))

    @property
    def n_paths(self) -> int:
        return int(self.sample.get("n_paths", 1000))

    @property
    def seed(self) -> int:
        return int(self.sample.get("seed", 0))

    def validate(self):
        if self.r < 1:
            raise ConfigError(f"[quantizer] r must be >= 1, got {self.r}")
        if self.n < 1:
            raise ConfigError(f"[quantizer] n must be >= 1, got {self.n}")
        if self.n_paths < 1:
            raise ConfigError("[sample] n_paths must be >= 1")
        self.build_space()
        self.build_process_spec()
        self.build_optimizer(self.seed)


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    sections = parse_config_text(text)
    unknown = set(sections) - set(_KNOWN_SECTIONS)
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    for required in ("process", "space", "quantizer", "sample"):
        if required not in sections:
            raise ConfigError(f"missing required section [{required}]")
    cfg = ExperimentConfig(
        process=sections.get("process", {}),
        space=sections.get("space", {}),
        quantizer=sections.get("quantizer", {}),
        optimizer=sections.get("optimizer", {}),
        sample=sections.get("sample", {}),
        bounds=sections.get("bounds", {}),
        output=sections.get("output", {}),
        raw_text=text,
    )
    cfg.validate()
    return cfg


def print_schema() -> str:
    return SCHEMA
