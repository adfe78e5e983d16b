"""Bundled example documents."""

from importlib import resources


def path(name: str):
    """Filesystem path of a bundled fixture, e.g. ``path("singlet_state.json")``."""
    return resources.files(__name__).joinpath(name)


def names() -> list[str]:
    return sorted(p.name for p in resources.files(__name__).iterdir() if p.name.endswith(".json"))
