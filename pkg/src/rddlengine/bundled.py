"""Registry of the example domains shipped with the package.

Each domain lives in its own directory holding ``domain.rddl`` and one or
more ``instance*.rddl`` files.  Setting ``RDDL_EXAMPLES_DIR`` points the
lookup at another directory with the same layout.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional, Tuple

ENV_VAR = "RDDL_EXAMPLES_DIR"


@dataclass(frozen=True)
class BundledDomain:
    name: str
    description: str
    domain_path: Path
    instance_paths: Tuple[Path, ...]

    @property
    def domain_source(self) -> str:
        return self.domain_path.read_text(encoding="utf-8")

    def instance_path(self, which: Optional[str] = None) -> Path:
        if which is None:
            return self.instance_paths[0]
        for p in self.instance_paths:
            if which in (p.stem, p.name) or which == p.stem.replace("instance", ""):
                return p
        raise KeyError(f"domain {self.name!r} has no instance {which!r}")


def examples_dir() -> Path:
    override = os.environ.get(ENV_VAR)
    if override:
        return Path(override)
    return Path(__file__).resolve().parent / "domains"


def _description(path: Path) -> str:
    for line in path.read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line.startswith("//"):
            return line.lstrip("/").strip()
        if line:
            break
    return ""


def bundled_domains() -> Dict[str, BundledDomain]:
    root = examples_dir()
    found: Dict[str, BundledDomain] = {}
    if not root.is_dir():
        return found
    for d in sorted(p for p in root.iterdir() if p.is_dir()):
        domain = d / "domain.rddl"
        if not domain.is_file():
            continue
        instances = tuple(sorted(d.glob("instance*.rddl")))
        found[d.name] = BundledDomain(d.name, _description(domain), domain, instances)
    return found


def get_bundled(name: str) -> BundledDomain:
    domains = bundled_domains()
    if name not in domains:
        raise KeyError(f"no bundled domain {name!r}; available: "
                       f"{', '.join(domains) or 'none'}")
    return domains[name]
