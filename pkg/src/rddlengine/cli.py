"""Command-line entry point.

Exit codes: 0 success, 1 model or domain error, 2 I/O or configuration error.
``--domain`` accepts a file path or the name of a bundled domain; for a
bundled domain ``--instance`` may name one of its instances.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple

from . import bundled
from .engine.rng import RandomSource
from .env import Environment, dumps_record, run_episode
from .errors import RDDLError
from .model import DERIVED, INTERM, OBSERV, STATE, format_value
from .parser import parse
from .printer import expr_to_str, to_rddl
from .scheduler import build_graph, references, schedule
from .validation import has_errors, validate


class ConfigError(Exception):
    """Bad flags or inconsistent inputs; exit code 2."""


@dataclass
class RunConfig:
    domain: Path
    instance: Optional[Path]
    seed: int = 0
    episodes: int = 1
    policy: str = "random"
    out: Optional[Path] = None
    enforce_preconditions: bool = False

    def __post_init__(self) -> None:
        if self.episodes < 1:
            raise ConfigError("--episodes must be at least 1")
        if self.policy not in ("random", "default") and not self.policy.startswith("plan:"):
            raise ConfigError(f"unknown policy {self.policy!r}; use random, default "
                              "or plan:PATH")


# ---------------------------------------------------------------------------
# input resolution


def resolve(domain: str, instance: Optional[str]) -> Tuple[Path, Optional[Path]]:
    dpath = Path(domain)
    if not dpath.exists():
        try:
            b = bundled.get_bundled(domain)
        except KeyError:
            raise FileNotFoundError(f"no such domain file or bundled domain: {domain}") \
                from None
        if instance is not None and Path(instance).exists():
            return b.domain_path, Path(instance)
        try:
            return b.domain_path, b.instance_path(instance)
        except (KeyError, IndexError) as err:
            raise ConfigError(str(err)) from None
    if instance is None:
        return dpath, None
    ipath = Path(instance)
    if not ipath.exists():
        raise FileNotFoundError(f"no such instance file: {instance}")
    return dpath, ipath


def load_env(args, **kwargs) -> Environment:
    dpath, ipath = resolve(args.domain, args.instance)
    return Environment.from_files(dpath, ipath, **kwargs)


# ---------------------------------------------------------------------------
# commands


def cmd_list(args, out) -> int:
    for name, b in bundled.bundled_domains().items():
        instances = ", ".join(p.stem for p in b.instance_paths)
        print(f"{name}: {b.description} [{instances}]", file=out)
    return 0


def cmd_parse(args, out) -> int:
    path = Path(args.path)
    if not path.exists():
        try:
            path = bundled.get_bundled(args.path).domain_path
        except KeyError:
            raise FileNotFoundError(f"no such file: {args.path}") from None
    doc = parse(path.read_text(encoding="utf-8"), str(path))
    diagnostics = list(doc.diagnostics)
    if doc.domain is not None:
        diagnostics += validate(doc.domain)
    for d in diagnostics:
        print(d, file=sys.stderr)
    if has_errors(diagnostics):
        return 1
    out.write(to_rddl(doc))
    return 0


def cmd_ground(args, out) -> int:
    env = load_env(args)
    model = env.model
    print(f"domain {model.domain_name}, instance {model.instance_name}", file=out)
    print("fluents:", file=out)
    for key, f in model.fluents.items():
        value = ""
        if f.fluent_class == STATE:
            value = f" = {format_value(model.init_state[key])}"
        elif f.default is not None:
            value = f" = {format_value(model.non_fluent_values.get(key, f.default))}"
        print(f"  {key} : {f.fluent_class}, {f.range}{value}", file=out)
    print("cpfs (evaluation order):", file=out)
    for key in env.order:
        print(f"  [{env.order.levels[key]}] {key} = {expr_to_str(model.cpfs[key])}",
              file=out)
    print(f"reward = {expr_to_str(model.reward)}", file=out)
    for title, exprs in (("action-preconditions", model.preconditions),
                         ("state-invariants", model.invariants),
                         ("termination", model.termination)):
        if exprs:
            print(f"{title}:", file=out)
            for e in exprs:
                print(f"  {expr_to_str(e)}", file=out)
    if model.bounds:
        print("action bounds:", file=out)
        for k, (lo, hi) in model.bounds.items():
            print(f"  {k} in [{lo}, {hi}]", file=out)
    for w in model.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return 0


def cmd_info(args, out) -> int:
    env = load_env(args)
    m = env.model
    print(f"domain: {m.domain_name}", file=out)
    print(f"instance: {m.instance_name}", file=out)
    print(f"model: {'POMDP' if env.is_pomdp else 'MDP'}", file=out)
    print(f"horizon: {env.horizon}", file=out)
    print(f"discount: {env.discount}", file=out)
    print(f"concurrent actions: {env.num_concurrent_actions}", file=out)
    print(f"state fluents: {len(m.states)}", file=out)
    for title, space in (("action space", env.action_space),
                         ("observation space", env.observation_space)):
        print(f"{title}:", file=out)
        width = max((len(k) for k in space), default=0)
        for k, s in space.items():
            print(f"  {k.ljust(width)}  {s.describe()}", file=out)
    return 0


def _plan_policy(path: str, env: Environment):
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as err:
        raise ConfigError(f"plan file {path} is not valid JSON: {err}") from None
    actions = data.get("actions") if isinstance(data, dict) else None
    if not isinstance(actions, list):
        raise ConfigError(f"plan file {path} has no action list")
    if len(actions) != env.horizon:
        raise ConfigError(f"plan has {len(actions)} steps but the horizon is "
                          f"{env.horizon}")
    return lambda obs, e: actions[e.t]


def cmd_run(args, out) -> int:
    config = RunConfig(Path(args.domain), args.instance, args.seed, args.episodes,
                       args.policy, Path(args.out) if args.out else None,
                       args.enforce_preconditions)
    env = load_env(args, seed=config.seed,
                   enforce_preconditions=config.enforce_preconditions)
    if config.policy == "random":
        rng = RandomSource(config.seed).spawn()
        policy = lambda obs, e: e.sample_action(rng)  # noqa: E731
    elif config.policy == "default":
        policy = lambda obs, e: {}  # noqa: E731
    else:
        policy = _plan_policy(config.policy[len("plan:"):], env)
    lines: List[str] = []
    returns, lengths = [], []
    for ep in range(config.episodes):
        records, total = run_episode(env, policy, episode=ep)
        lines.extend(dumps_record(r) for r in records)
        returns.append(total)
        lengths.append(len(records))
    text = "\n".join(lines) + "\n"
    summary = out if config.out else sys.stderr
    if config.out:
        config.out.write_text(text, encoding="utf-8")
    else:
        out.write(text)
    mean = sum(returns) / len(returns)
    print(f"episodes: {config.episodes}", file=summary)
    print(f"mean return: {mean:.6f}", file=summary)
    print(f"episode lengths: {' '.join(map(str, lengths))}", file=summary)
    return 0


def _q(name: str) -> str:
    return '"' + name.replace("\\", "\\\\").replace('"', '\\"') + '"'


def dot_graph(model) -> str:
    """DOT digraph of the fluent dependencies of one step."""
    graph = build_graph(model)
    schedule(model)
    groups = {"state": [], "action": [], DERIVED: [], INTERM: [], "next-state": [],
              OBSERV: []}
    visible = set()
    for k in model.states:
        groups["state"].append(k)
    for k in model.actions:
        groups["action"].append(k)
    for k in model.order:
        cls = model.cpf_class(k)
        groups["next-state" if cls == STATE else cls].append(k)
    for keys in groups.values():
        visible.update(keys)
    lines = [f"digraph {_q(model.domain_name)} {{", "    rankdir=LR;",
             "    node [shape=ellipse];"]
    titles = {"state": "state", "action": "action", DERIVED: "derived",
              INTERM: "interm", "next-state": "next state", OBSERV: "observation"}
    for g, keys in groups.items():
        if not keys:
            continue
        lines.append(f"    subgraph {_q('cluster_' + g)} {{")
        lines.append(f"        label={_q(titles[g])};")
        shape = "box" if g == "action" else "ellipse"
        for k in keys:
            lines.append(f"        {_q(k)} [shape={shape}];")
        lines.append("    }")
    edges = []
    for v in model.order:
        for u in sorted(set(graph.edges[v]) | set(graph.roots[v])):
            if u in visible:
                edges.append((u, v))
    reward_refs = sorted(r for r in references(model.reward) if r in visible)
    lines.append('    "reward" [shape=diamond];')
    edges.extend((u, "reward") for u in reward_refs)
    if model.termination:
        lines.append('    "termination" [shape=octagon];')
        refs = set()
        for e in model.termination:
            refs |= references(e)
        # termination is evaluated on the post-transition state
        refs = {r + "'" if r in model.fluents and model.cpf_class(r) == STATE
                and (r + "'") in visible else r for r in refs}
        edges.extend((u, "termination") for u in sorted(refs) if u in visible)
    for u, v in edges:
        lines.append(f"    {_q(u)} -> {_q(v)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def cmd_graph(args, out) -> int:
    text = dot_graph(load_env(args).model)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        out.write(text)
    return 0


def _parse_mode(mode: str):
    if mode == "slp":
        return "slp", None
    if mode.startswith("mpc:"):
        try:
            lookahead = int(mode[4:])
        except ValueError:
            lookahead = 0
        if lookahead < 1:
            raise ConfigError(f"bad MPC lookahead in {mode!r}")
        return "mpc", lookahead
    raise ConfigError(f"unknown mode {mode!r}; use slp or mpc:N")


def cmd_plan(args, out) -> int:
    from .diffplan import PlanParameters, RelaxedModel, execute_plan, plan_mpc, plan_slp
    mode, lookahead = _parse_mode(args.mode)
    if args.budget < 0:
        raise ConfigError("--budget must be non-negative")
    if not args.tau > 0:
        raise ConfigError("--tau must be positive")
    env = load_env(args, seed=args.seed)
    params = PlanParameters(step_size=args.step_size, budget=args.budget, seed=args.seed,
                            tau=args.tau, tnorm=args.tnorm, noise=args.noise)
    relaxed = RelaxedModel(env.model, params.tnorm, params.tau, params.noise)
    settings = dict(mode=args.mode, tau=args.tau, tnorm=args.tnorm, budget=args.budget,
                    seed=args.seed, noise=args.noise)
    if mode == "slp":
        result = plan_slp(env.model, params, relaxed=relaxed)
        total = execute_plan(env, result.actions)
        text = result.to_json(**settings)
        print(f"relaxed objective: {result.objective:.6f}", file=out)
    else:
        logger = (lambda line: print(line, file=out))
        result = plan_mpc(env, lookahead, params, relaxed=relaxed, log=logger)
        total = result.total_return
        from .env import json_value
        text = json.dumps(dict(settings, horizon=len(result.actions),
                               objective_trace=result.planned_objectives,
                               actions=[json_value(a) for a in result.actions],
                               rewards=result.rewards), indent=2)
    print(f"true-env return: {total:.6f}", file=out)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    return 0


# ---------------------------------------------------------------------------


def _model_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--domain", required=True, help="domain file or bundled domain name")
    p.add_argument("--instance", help="instance file (or instance name of a bundled "
                                      "domain)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rddlengine",
                                     description="Parse, simulate and plan on RDDL.")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("list", help="list bundled domains")

    p = sub.add_parser("parse", help="parse and validate a file, print it back")
    p.add_argument("path")

    for name, helptext in (("ground", "dump the grounded model"),
                           ("info", "horizon, discount and space tables"),
                           ("graph", "write the dependency graph as DOT")):
        p = sub.add_parser(name, help=helptext)
        _model_args(p)
        if name == "graph":
            p.add_argument("--out")

    p = sub.add_parser("run", help="simulate episodes, write a JSONL trajectory")
    _model_args(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--episodes", type=int, default=1)
    p.add_argument("--policy", default="random", help="random | default | plan:PATH")
    p.add_argument("--enforce-preconditions", action="store_true")
    p.add_argument("--out")

    p = sub.add_parser("plan", help="gradient-based planning on the relaxed model")
    _model_args(p)
    p.add_argument("--mode", default="slp", help="slp | mpc:N")
    p.add_argument("--tau", type=float, default=0.1)
    p.add_argument("--tnorm", default="product", choices=["product", "godel"])
    p.add_argument("--budget", type=int, default=500)
    p.add_argument("--step-size", type=float, default=0.1)
    p.add_argument("--noise", default="mean", choices=["mean", "reparam"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    return parser


COMMANDS = {"list": cmd_list, "parse": cmd_parse, "ground": cmd_ground,
            "info": cmd_info, "run": cmd_run, "graph": cmd_graph, "plan": cmd_plan}


def main(argv: Optional[List[str]] = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args, out)
    except RDDLError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except (OSError, ConfigError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
