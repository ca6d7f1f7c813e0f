"""Scalar computation graphs with code-generated reverse-mode gradients.

A graph is a topologically ordered list of nodes.  Instead of walking the
node list on every call, the graph is compiled into two straight-line Python
functions: one returning the output value and one returning the value plus
the gradient with respect to every input.  Each generated line computes one
node, so a failing line number identifies the failing node.
"""
from __future__ import annotations

import linecache
import math
import sys
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..errors import GraphStateError, NumericalError
from . import tnorm as _tn


def _sgn(x):
    return (x > 0.0) - (x < 0.0)


def _pow(a, b):
    return math.pow(a, b)


def _dpow_a(a, b):
    if b == 0.0:
        return 0.0
    if a == 0.0:
        return 0.0 if b > 1.0 else (1.0 if b == 1.0 else math.inf)
    return b * math.pow(a, b - 1.0)


def _dpow_b(a, v):
    return v * math.log(a) if a > 0.0 else 0.0


def _dsqrt(v):
    return 0.5 / v if v > 0.0 else 0.0


def _round(x):
    return float(math.floor(x + 0.5))


_HELPERS = {
    "_sgn": _sgn, "_pow": _pow, "_dpow_a": _dpow_a, "_dpow_b": _dpow_b,
    "_dsqrt": _dsqrt, "_exp": math.exp, "_log": math.log, "_sqrt": math.sqrt,
    "_sin": math.sin, "_cos": math.cos, "_tan": math.tan, "_tanh": math.tanh,
    "_floor": lambda x: float(math.floor(x)), "_ceil": lambda x: float(math.ceil(x)),
    "_round": _round, "_sig": _tn.sigmoid, "_sech2": _tn.sech2, "inf": math.inf,
}

# op -> (forward template, derivative templates per argument; None = zero)
# placeholders: {0} {1} {2} arguments, {v} own value, {g} own adjoint, {p} payload
OPS: Dict[str, Tuple[str, Tuple[Optional[str], ...]]] = {
    "add": ("{0} + {1}", ("{g}", "{g}")),
    "sub": ("{0} - {1}", ("{g}", "-{g}")),
    "mul": ("{0} * {1}", ("{g} * {1}", "{g} * {0}")),
    "div": ("{0} / {1}", ("{g} / {1}", "-{g} * {v} / {1}")),
    "neg": ("-{0}", ("-{g}",)),
    "one_minus": ("1.0 - {0}", ("-{g}",)),
    "pow": ("_pow({0}, {1})", ("{g} * _dpow_a({0}, {1})", "{g} * _dpow_b({0}, {v})")),
    "exp": ("_exp({0})", ("{g} * {v}",)),
    "ln": ("_log({0})", ("{g} / {0}",)),
    "sqrt": ("_sqrt({0})", ("{g} * _dsqrt({v})",)),
    "sin": ("_sin({0})", ("{g} * _cos({0})",)),
    "cos": ("_cos({0})", ("-{g} * _sin({0})",)),
    "tan": ("_tan({0})", ("{g} * (1.0 + {v} * {v})",)),
    "abs": ("abs({0})", ("{g} * _sgn({0})",)),
    "sgn": ("float(_sgn({0}))", (None,)),
    "floor": ("_floor({0})", (None,)),
    "ceil": ("_ceil({0})", (None,)),
    "round": ("_round({0})", (None,)),
    "min": ("({0} if {0} <= {1} else {1})",
            ("({g} if {0} <= {1} else 0.0)", "(0.0 if {0} <= {1} else {g})")),
    "max": ("({0} if {0} >= {1} else {1})",
            ("({g} if {0} >= {1} else 0.0)", "(0.0 if {0} >= {1} else {g})")),
    "sigmoid": ("_sig({0})", ("{g} * {v} * (1.0 - {v})",)),
    "sech2": ("_sech2({0})", ("-2.0 * {g} * {v} * _tanh({0})",)),
    "ite": ("{0} * {1} + (1.0 - {0}) * {2}",
            ("{g} * ({1} - {2})", "{g} * {0}", "{g} * (1.0 - {0})")),
    "tnorm": ("_tn[{p}].fn({0}, {1})",
              ("{g} * _tn[{p}].grad({0}, {1})[0]", "{g} * _tn[{p}].grad({0}, {1})[1]")),
}
ARITY = {name: len(d) for name, (_, d) in OPS.items()}


@dataclass(frozen=True)
class Node:
    op: str                 # 'input', 'const' or a key of OPS
    args: Tuple[int, ...] = ()
    value: float = 0.0      # constants only
    payload: Optional[str] = None
    label: str = ""


class GraphBuilder:
    """Incrementally assembles a graph, sharing identical nodes."""

    def __init__(self) -> None:
        self.nodes: List[Node] = []
        self.inputs: List[Tuple[str, int]] = []
        self.label = ""
        self._memo: Dict[tuple, int] = {}
        self.tnorms: Dict[str, _tn.TNorm] = {}

    def _add(self, node: Node, key) -> int:
        found = self._memo.get(key)
        if found is not None:
            return found
        self.nodes.append(node)
        self._memo[key] = len(self.nodes) - 1
        return len(self.nodes) - 1

    def input(self, name: str) -> int:
        self.nodes.append(Node("input", label=name))
        idx = len(self.nodes) - 1
        self.inputs.append((name, idx))
        return idx

    def const(self, value: float) -> int:
        value = float(value)
        return self._add(Node("const", value=value, label=self.label),
                         ("const", repr(value)))

    def is_const(self, i: int, value: Optional[float] = None) -> bool:
        n = self.nodes[i]
        return n.op == "const" and (value is None or n.value == value)

    def op(self, name: str, *args: int, payload: Optional[str] = None) -> int:
        if len(args) != ARITY[name]:
            raise ValueError(f"{name} takes {ARITY[name]} argument(s)")
        if all(self.nodes[a].op == "const" for a in args):
            fn = _interpreter(name, payload)
            return self.const(fn(*(self.nodes[a].value for a in args), self.tnorms))
        # exact simplifications only
        if name == "mul":
            if self.is_const(args[0], 1.0):
                return args[1]
            if self.is_const(args[1], 1.0):
                return args[0]
        if name == "ite" and self.nodes[args[0]].op == "const":
            c = self.nodes[args[0]].value
            if c == 1.0:
                return args[1]
            if c == 0.0:
                return args[2]
        return self._add(Node(name, tuple(args), payload=payload, label=self.label),
                         (name, tuple(args), payload))

    def tnorm(self, t: _tn.TNorm, a: int, b: int) -> int:
        if t.name == "product":
            return self.op("mul", a, b)
        if t.name == "godel":
            return self.op("min", a, b)
        self.tnorms[t.name] = t
        return self.op("tnorm", a, b, payload=repr(t.name))

    def build(self, output: int) -> "RelaxedGraph":
        return RelaxedGraph(self.nodes, self.inputs, output, dict(self.tnorms))


_INTERP_CACHE: Dict[tuple, object] = {}


def _interpreter(op: str, payload: Optional[str]):
    key = (op, payload)
    fn = _INTERP_CACHE.get(key)
    if fn is None:
        template = OPS[op][0]
        names = [f"_a{i}" for i in range(ARITY[op])]
        body = template.format(*names, p=payload)
        fn = eval(f"lambda {', '.join(names)}, _tn: {body}", dict(_HELPERS))
        _INTERP_CACHE[key] = fn
    return fn


class RelaxedGraph:
    """Compiled differentiable graph with one scalar output."""

    _counter = 0

    def __init__(self, nodes: Sequence[Node], inputs: Sequence[Tuple[str, int]],
                 output: int, tnorms=None) -> None:
        self.nodes = list(nodes)
        self.input_names = [n for n, _ in inputs]
        self._input_ids = [i for _, i in inputs]
        self.output = output
        self.tnorms = dict(tnorms or {})
        self._last_inputs: Optional[List[float]] = None
        self._compile()

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def n_inputs(self) -> int:
        return len(self._input_ids)

    # -- code generation --------------------------------------------------

    def _ref(self, i: int) -> str:
        n = self.nodes[i]
        return repr(n.value) if n.op == "const" else f"v{i}"

    def _live(self) -> List[bool]:
        live = [False] * len(self.nodes)
        live[self.output] = True
        for i in range(self.output, -1, -1):
            if live[i]:
                for a in self.nodes[i].args:
                    live[a] = True
        return live

    def _compile(self) -> None:
        live = self._live()
        slot = {i: k for k, i in enumerate(self._input_ids)}
        needs = [False] * len(self.nodes)   # depends on some input
        fwd: List[Tuple[str, int]] = []
        for i, n in enumerate(self.nodes):
            if n.op == "input":
                needs[i] = True
                fwd.append((f"v{i} = x[{slot[i]}]", i))
            elif n.op != "const":
                needs[i] = any(needs[a] for a in n.args)
                if live[i]:
                    body = OPS[n.op][0].format(*(self._ref(a) for a in n.args), p=n.payload)
                    fwd.append((f"v{i} = {body}", i))
        out = self._ref(self.output)

        bwd: List[Tuple[str, int]] = []
        assigned = set()
        if needs[self.output]:
            bwd.append((f"g{self.output} = 1.0", self.output))
            assigned.add(self.output)
        for i in range(self.output, -1, -1):
            n = self.nodes[i]
            if i not in assigned or n.op in ("input", "const"):
                continue
            for pos, a in enumerate(n.args):
                template = OPS[n.op][1][pos]
                if template is None or not needs[a]:
                    continue
                refs = [self._ref(b) for b in n.args]
                expr = template.format(*refs, v=f"v{i}", g=f"g{i}", p=n.payload)
                if a in assigned:
                    bwd.append((f"g{a} += {expr}", i))
                else:
                    bwd.append((f"g{a} = {expr}", i))
                    assigned.add(a)
        grads = ", ".join(f"g{i}" if i in assigned else "0.0" for i in self._input_ids)

        value_src = ["def value(x):"] + [f"    {s}" for s, _ in fwd] + [f"    return {out}"]
        vag_src = (["def value_and_grad(x):"] + [f"    {s}" for s, _ in fwd]
                   + [f"    {s}" for s, _ in bwd] + [f"    return {out}, [{grads}]"])
        # line number -> node, for error reports (line 1 is the def)
        self._value_lines = [None] + [i for _, i in fwd] + [self.output]
        self._vag_lines = [None] + [i for _, i in fwd] + [i for _, i in bwd] + [self.output]

        namespace = dict(_HELPERS)
        namespace["_tn"] = self.tnorms
        RelaxedGraph._counter += 1
        tag = RelaxedGraph._counter
        for name, src, lines in (("value", value_src, self._value_lines),
                                 ("value_and_grad", vag_src, self._vag_lines)):
            filename = f"<relaxed-graph-{tag}-{name}>"
            text = "\n".join(src) + "\n"
            linecache.cache[filename] = (len(text), None, text.splitlines(True), filename)
            exec(compile(text, filename, "exec"), namespace)
        self._value_fn = namespace["value"]
        self._vag_fn = namespace["value_and_grad"]

    # -- evaluation -------------------------------------------------------

    def describe(self, i: int) -> str:
        n = self.nodes[i]
        where = f" in {n.label}" if n.label else ""
        return f"node {i} ({n.op}){where}"

    def _fail(self, err: Exception, lines) -> NumericalError:
        tb = sys.exc_info()[2]
        node = None
        while tb is not None:
            if tb.tb_frame.f_code.co_filename.startswith("<relaxed-graph-"):
                lineno = tb.tb_lineno - 1
                if 0 <= lineno < len(lines):
                    node = lines[lineno]
            tb = tb.tb_next
        where = self.describe(node) if node is not None else "unknown node"
        return NumericalError(f"{type(err).__name__}: {err} at {where}")

    def _check_finite(self, value: float, x) -> None:
        if not math.isfinite(value):
            values = self.node_values(x)
            bad = next((i for i, v in enumerate(values) if not math.isfinite(v)),
                       self.output)
            raise NumericalError(f"non-finite value {values[bad]} at {self.describe(bad)}")

    def _coerce(self, inputs) -> List[float]:
        x = [float(v) for v in inputs]
        if len(x) != self.n_inputs:
            raise ValueError(f"graph takes {self.n_inputs} inputs, got {len(x)}")
        return x

    def forward(self, inputs) -> float:
        x = self._coerce(inputs)
        try:
            value = self._value_fn(x)
        except (ArithmeticError, ValueError) as err:
            raise self._fail(err, self._value_lines) from None
        self._check_finite(value, x)
        self._last_inputs = x
        return value

    def value_and_grad(self, inputs) -> Tuple[float, np.ndarray]:
        x = self._coerce(inputs)
        try:
            value, grad = self._vag_fn(x)
        except (ArithmeticError, ValueError) as err:
            raise self._fail(err, self._vag_lines) from None
        self._check_finite(value, x)
        grad = np.asarray(grad, dtype=float)
        if not np.all(np.isfinite(grad)):
            raise NumericalError("non-finite gradient component for input "
                                 f"{self.input_names[int(np.argmin(np.isfinite(grad)))]}")
        self._last_inputs = x
        return value, grad

    def backward(self) -> np.ndarray:
        """Gradient of the output at the inputs of the last forward pass."""
        if self._last_inputs is None:
            raise GraphStateError("backward called before forward")
        return self.value_and_grad(self._last_inputs)[1]

    def node_values(self, inputs) -> List[float]:
        """Every node's value, computed by a plain interpreter."""
        x = self._coerce(inputs)
        slot = {i: k for k, i in enumerate(self._input_ids)}
        values: List[float] = []
        for i, n in enumerate(self.nodes):
            if n.op == "input":
                values.append(x[slot[i]])
            elif n.op == "const":
                values.append(n.value)
            else:
                try:
                    values.append(_interpreter(n.op, n.payload)(
                        *(values[a] for a in n.args), self.tnorms))
                except (ArithmeticError, ValueError):
                    values.append(math.nan)
        return values
