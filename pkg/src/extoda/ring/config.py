"""Truncation bounds shared by every exact computation in the package."""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields, replace
from pathlib import Path

try:  # Python >= 3.11
    import tomllib
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

ENV_PREFIX = "EXTODA_"


@dataclass(frozen=True)
class TruncationConfig:
    """Orders at which the truncated arithmetic is cut.

    eps_order     drop eps^k with k > eps_order
    jet_order     highest x-derivative v^{(m)}, u^{(m)} allowed
    coupling_degree  highest degree in the couplings t^{a,p}, not counting t^{1,0}
    divisor_degree   highest power of Q = exp(t^{2,0})
    p_max         highest descendant level p of a coupling t^{a,p}
    """

    eps_order: int = 6
    jet_order: int = 6
    coupling_degree: int = 5
    divisor_degree: int = 3
    p_max: int = 3

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not isinstance(value, int) or value < 0:
                raise ValueError(f"{f.name} must be a non-negative integer, got {value!r}")

    def with_(self, **changes) -> "TruncationConfig":
        return replace(self, **changes)

    def working(self, extra_eps: int = 2) -> "TruncationConfig":
        """Config with headroom for computations that divide by eps."""
        eps = self.eps_order + extra_eps
        return replace(self, eps_order=eps, jet_order=max(self.jet_order, min(eps + 5, 15)))

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_mapping(cls, data: dict) -> "TruncationConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown truncation keys: {sorted(unknown)}")
        return cls(**{k: int(v) for k, v in data.items()})

    @classmethod
    def load(cls, path: str | os.PathLike | None = None, env: dict | None = None) -> "TruncationConfig":
        """Read a TOML or JSON file, then apply ``EXTODA_<KEY>`` environment overrides.

        A TOML file may keep the keys at top level or under a ``[truncation]`` table.
        """
        data: dict = {}
        if path is not None:
            p = Path(path)
            text = p.read_text()
            if p.suffix.lower() == ".json":
                data = json.loads(text)
            else:
                data = tomllib.loads(text)
            data = dict(data.get("truncation", data))
        env = os.environ if env is None else env
        for f in fields(cls):
            key = ENV_PREFIX + f.name.upper()
            if key in env:
                data[f.name] = env[key]
        return cls.from_mapping(data)


DEFAULT = TruncationConfig()
