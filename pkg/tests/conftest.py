from __future__ import annotations

import math
from typing import Sequence, Tuple

import pytest

from rddlengine import bundled
from rddlengine.env import Environment
from rddlengine.grounder import ground
from rddlengine.parser import parse


def grounded_from(domain: str, instance: str = ""):
    doc = parse(domain)
    if instance:
        doc = doc.merge(parse(instance))
    return ground(doc.domain, doc.instance())


def env_from(domain: str, instance: str = "", **kwargs) -> Environment:
    return Environment.from_sources(domain, instance, **kwargs)


def simple_instance(domain: str, horizon: int = 5, objects: str = "",
                    non_fluents: str = "", init: str = "",
                    max_nondef: str = "pos-inf", discount: str = "1.0") -> str:
    """Instance and non-fluents text for small hand-written test domains."""
    nf = f"""
non-fluents nf {{
    domain = {domain};
    {f"objects {{ {objects} }};" if objects else ""}
    {f"non-fluents {{ {non_fluents} }};" if non_fluents else ""}
}}
"""
    inst = f"""
instance inst {{
    domain = {domain};
    non-fluents = nf;
    {f"init-state {{ {init} }};" if init else ""}
    max-nondef-actions = {max_nondef};
    horizon = {horizon};
    discount = {discount};
}}
"""
    return nf + inst


# An independent cart-pole transition written straight from the continuous
# equations and their forward-Euler discretisation; it shares no code with
# the parser or evaluator.
CARTPOLE_CONSTANTS = dict(g=9.8, M=1.0, m=0.1, l=0.5, T=0.02,
                          x_lim=2.4, th_lim=0.2094395102)


def cartpole_oracle_step(state: Sequence[float], force: float, g=9.8, M=1.0,
                         m=0.1, l=0.5, T=0.02) -> Tuple[float, float, float, float]:
    x, vx, th, vth = state
    t = (force + l * m * vth ** 2 * math.sin(th)) / (m + M)
    u_th = (g * math.sin(th) - math.cos(th) * t) / (
        l * (4.0 / 3.0 - m * math.cos(th) ** 2 / (m + M)))
    u_x = t - l * m * u_th * math.cos(th) / (m + M)
    return (x + T * vx, vx + T * u_x, th + T * vth, vth + T * u_th)


def cartpole_out_of_bounds(state, x_lim=2.4, th_lim=0.2094395102) -> bool:
    x, _, th, _ = state
    return x < -x_lim or x > x_lim or th < -th_lim or th > th_lim


def balance_force(state) -> float:
    """Linear state feedback that keeps the default pole upright."""
    x, v, th, w = state
    return max(-10.0, min(10.0, 1.0 * x + 2.0 * v + 30.0 * th + 5.0 * w))


STATE_KEYS = ("pos", "vel", "ang-pos", "ang-vel")


def as_tuple(obs) -> Tuple[float, ...]:
    return tuple(obs[k] for k in STATE_KEYS)


@pytest.fixture
def cartpole_env() -> Environment:
    b = bundled.get_bundled("cartpole_continuous")
    return Environment.from_files(b.domain_path, b.instance_path())


@pytest.fixture
def pomdp_env() -> Environment:
    b = bundled.get_bundled("cartpole_pomdp")
    return Environment.from_files(b.domain_path, b.instance_path(), seed=3)


@pytest.fixture
def fire_env() -> Environment:
    b = bundled.get_bundled("fire_fighting")
    return Environment.from_files(b.domain_path, b.instance_path(), seed=1)


def bundled_source(name: str, instance=None) -> Tuple[str, str]:
    b = bundled.get_bundled(name)
    return b.domain_source, b.instance_path(instance).read_text(encoding="utf-8")
