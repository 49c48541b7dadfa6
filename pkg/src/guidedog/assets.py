"""Access to the data files shipped with the package (maps, task libraries)."""

from __future__ import annotations

from importlib import resources

BUNDLED = {
    "map": {
        "office": "office_map.json",
        "small": "small_map.json",
        "ablation": "ablation_map.json",
    },
    "library": {
        "tasks77": "task_library.json",
        "ablation": "ablation_library.json",
    },
    "rules": {
        "demo": "demo_rules.json",
    },
}


def bundled_path(kind: str, name: str) -> str | None:
    """Filesystem path of a bundled asset, or None if the name is not bundled."""
    filename = BUNDLED.get(kind, {}).get(name)
    if filename is None:
        return None
    return str(resources.files("guidedog").joinpath("data", filename))


def bundled_names(kind: str) -> list[str]:
    return sorted(BUNDLED.get(kind, {}))
