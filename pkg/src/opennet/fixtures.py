"""Bundled example networks, loadable offline."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from opennet.errors import ValidationError
from opennet.io import parse_edge_list, parse_roles
from opennet.network import NetworkSpec

NAMES = (
    "chain1", "chain2", "chain3", "chain4", "chain5", "chain6",
    "fig4_dag", "fig5_weighted", "star", "ring", "layered_dag",
)


def fixture_path(name: str, suffix: str = ".edges") -> Path:
    if name not in NAMES:
        raise ValidationError(f"unknown fixture {name!r}; choose from {', '.join(NAMES)}")
    return Path(str(resources.files("opennet") / "data" / f"{name}{suffix}"))


def load_fixture(name: str) -> NetworkSpec:
    """Network with its bundled roles applied."""
    spec = parse_edge_list(fixture_path(name))
    roles = fixture_path(name, ".roles.json")
    if roles.exists():
        spec = spec.with_roles(*parse_roles(roles, spec))
    return spec
