"""Declarative scenario format, parser, and execution engine.

The grammar is line-oriented so scenario files diff cleanly:

    subsystem <label> dim=<d> basis=<l0,l1,...>
    init <label>=<basis_label>
    init <label> amps=<c0,c1,...>        # product-state factor for one subsystem
    init amps=<complex list>             # full-dimension amplitude vector
    copy <src> -> <dst>
    premeasure <system> -> <apparatus>
    multicopy <src> -> <dst1,dst2,...> mode=<source|chain>
    measure <label> basis=<symbol|theta=<radians>>
    escape <label>
    erase <all|seq|first-last>
    metric <entropy|coherence|mutualinfo|qmi|fidelity> <args>
    trials <n>
    seed <n>

``#`` starts a comment. Complex literals are written ``a+bi``. Metric lines
are evaluated at the point in the script where they appear. Trial t runs with
seed ``seed + t`` so per-trial streams are independent yet reproducible.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .copier import (
    CHAINED,
    FROM_SOURCE,
    CopierSpec,
    CopyRecord,
    apply_copy,
    erase_copies,
    multi_copy,
)
from .errors import ScenarioParseError, SimulationError
from .infometrics import (
    quantum_mutual_information,
    transinformation,
    von_neumann_entropy,
)
from .measurement import SYMBOL, measure, premeasure
from .qstate import StateVector, Subsystem, SubsystemLayout, fidelity, make_state, partial_trace

FIXED_EVENT = "fixed-event"
REVOCABLE = "revocable"

_LABEL_RE = re.compile(r"^[A-Za-z0-9_]+$")
_METRIC_NAMES = ("entropy", "coherence", "mutualinfo", "qmi", "fidelity")


@dataclass(frozen=True)
class Step:
    """One script operation; unused fields stay at their defaults."""

    kind: str
    line: int
    source: str | None = None
    targets: tuple[str, ...] = ()
    label: str | None = None
    basis: str | float = SYMBOL
    mode: str = FROM_SOURCE
    selector: tuple | None = None


@dataclass(frozen=True)
class MetricRequest:
    name: str
    args: tuple[str, ...]
    after_step: int  # 0 = before any step
    line: int


@dataclass(frozen=True)
class Scenario:
    """Parsed, fully validated experiment description."""

    name: str
    layout: SubsystemLayout
    script: tuple[Step, ...]
    metrics: tuple[MetricRequest, ...]
    trials: int = 1
    seed: int = 0
    init_basis: dict = field(default_factory=dict)
    init_factor: dict = field(default_factory=dict)
    init_full: tuple | None = None

    def initial_state(self) -> StateVector:
        if self.init_full is not None:
            return make_state(self.layout, amps=np.asarray(self.init_full))
        vec = np.ones(1, dtype=np.complex128)
        for entry in self.layout.entries:
            if entry.label in self.init_factor:
                factor = np.asarray(self.init_factor[entry.label], dtype=np.complex128)
            else:
                factor = np.zeros(entry.dim, dtype=np.complex128)
                factor[self.layout.basis_index(entry.label, self.init_basis[entry.label])] = 1.0
            vec = np.kron(vec, factor)
        return make_state(self.layout, amps=vec)


@dataclass(frozen=True)
class OutcomeRow:
    trial: int
    step: int
    subsystem: str
    basis: str
    outcome: int
    probability: float


@dataclass(frozen=True)
class MetricRow:
    trial: int
    name: str
    args: tuple[str, ...]
    value: float
    after_step: int


@dataclass
class TrialResult:
    trial: int
    outcomes: list[OutcomeRow]
    metrics: list[MetricRow]
    log: list[CopyRecord]
    error: tuple[int, str, str] | None  # (step index, error name, message)
    event: str


@dataclass
class RunReport:
    """Per-trial outcomes, metric values, provenance, and abort records."""

    scenario: str
    seed: int
    trials: int
    results: list[TrialResult]

    def outcomes_csv(self) -> str:
        lines = ["trial,step,subsystem,basis,outcome,probability"]
        for tr in self.results:
            for row in tr.outcomes:
                lines.append(
                    f"{row.trial},{row.step},{row.subsystem},{row.basis},"
                    f"{row.outcome},{row.probability:.9g}"
                )
            if tr.error is not None:
                step, name, _ = tr.error
                lines.append(f"{tr.trial},{step},,,{name},")
        return "\n".join(lines) + "\n"

    def metrics_csv(self) -> str:
        lines = ["trial,metric,args,value"]
        for tr in self.results:
            for row in tr.metrics:
                lines.append(
                    f"{row.trial},{row.name},{' '.join(row.args)},{row.value:.9g}"
                )
            lines.append(f"{tr.trial},event_status,,{tr.event}")
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        return self.outcomes_csv() + "\n" + self.metrics_csv()

    def to_text(self) -> str:
        out = [f"scenario {self.scenario}: trials={self.trials} seed={self.seed}"]
        for tr in self.results:
            status = "aborted" if tr.error else "ok"
            out.append(f"trial {tr.trial}: {status}, {tr.event}")
            for row in tr.metrics:
                out.append(
                    f"  metric {row.name} {' '.join(row.args)} "
                    f"(after step {row.after_step}) = {row.value:.9g}"
                )
            for row in tr.outcomes:
                out.append(
                    f"  step {row.step}: measured {row.subsystem} in {row.basis} "
                    f"-> {row.outcome} (p={row.probability:.9g})"
                )
            if tr.error is not None:
                step, name, message = tr.error
                out.append(f"  step {step}: {name}: {message}")
            if tr.log:
                held = ", ".join(
                    f"#{r.seq} {r.source}->{r.target}" + (" escaped" if r.escaped else "")
                    for r in tr.log
                )
                out.append(f"  copies held: {held}")
        return "\n".join(out) + "\n"

    def hard_failure_count(self) -> int:
        """Trials aborted by anything other than an escaped-subsystem refusal."""
        return sum(
            1
            for tr in self.results
            if tr.error is not None and tr.error[1] != "EscapedSubsystemError"
        )


def event_status(log: list[CopyRecord], branch_outcome: int | None = None) -> str:
    """Whether a branch outcome is revocable or a fixed event.

    A single escaped record in the provenance makes the outcome impossible to
    revoke, regardless of how many copies exist. The copy log is shared by
    all branches of a run, so ``branch_outcome`` is informational.
    """
    return FIXED_EVENT if any(r.escaped for r in log) else REVOCABLE


def _parse_complex(token: str, line: int) -> complex:
    try:
        return complex(token.strip().replace("i", "j"))
    except ValueError:
        raise ScenarioParseError(line, f"bad complex literal {token!r}") from None


def _parse_complex_list(text: str, line: int) -> tuple[complex, ...]:
    parts = [p for p in text.split(",") if p.strip()]
    if not parts:
        raise ScenarioParseError(line, "empty amplitude list")
    return tuple(_parse_complex(p, line) for p in parts)


def _split_kv(token: str, key: str, line: int) -> str:
    if not token.startswith(key + "="):
        raise ScenarioParseError(line, f"expected {key}=..., got {token!r}")
    return token[len(key) + 1:]


def _check_label(label: str, line: int) -> str:
    if not _LABEL_RE.match(label):
        raise ScenarioParseError(line, f"invalid label {label!r}")
    return label


class _Parser:
    def __init__(self, name: str):
        self.name = name
        self.subsystems: list[Subsystem] = []
        self.by_label: dict[str, Subsystem] = {}
        self.init_basis: dict[str, str] = {}
        self.init_factor: dict[str, tuple[complex, ...]] = {}
        self.init_full: tuple[complex, ...] | None = None
        self.init_full_line = 0
        self.steps: list[Step] = []
        self.metrics: list[MetricRequest] = []
        self.trials = 1
        self.seed = 0
        self.last_line = 0

    def require(self, label: str, line: int) -> Subsystem:
        if label not in self.by_label:
            raise ScenarioParseError(line, f"unknown subsystem label {label!r}")
        return self.by_label[label]

    def no_steps_yet(self, what: str, line: int) -> None:
        if self.steps or self.metrics:
            raise ScenarioParseError(line, f"{what} must precede script steps")

    def handle(self, line_no: int, tokens: list[str]) -> None:
        self.last_line = line_no
        head, rest = tokens[0], tokens[1:]
        handler = getattr(self, f"_do_{head}", None)
        if handler is None:
            raise ScenarioParseError(line_no, f"unknown directive {head!r}")
        handler(line_no, rest)

    def _do_subsystem(self, line, rest):
        if len(rest) != 3:
            raise ScenarioParseError(line, "usage: subsystem <label> dim=<d> basis=<l0,l1,...>")
        self.no_steps_yet("subsystem declarations", line)
        label = _check_label(rest[0], line)
        if label in self.by_label:
            raise ScenarioParseError(line, f"duplicate subsystem label {label!r}")
        try:
            dim = int(_split_kv(rest[1], "dim", line))
        except ValueError:
            raise ScenarioParseError(line, f"bad dimension {rest[1]!r}") from None
        basis = tuple(
            _check_label(b, line) for b in _split_kv(rest[2], "basis", line).split(",") if b
        )
        try:
            sub = Subsystem(label, dim, basis)
        except ValueError as exc:
            raise ScenarioParseError(line, str(exc)) from None
        self.subsystems.append(sub)
        self.by_label[label] = sub

    def _do_init(self, line, rest):
        self.no_steps_yet("init lines", line)
        if len(rest) == 1 and rest[0].startswith("amps="):
            if self.init_full is not None:
                raise ScenarioParseError(line, "duplicate full-state init")
            self.init_full = _parse_complex_list(_split_kv(rest[0], "amps", line), line)
            self.init_full_line = line
            return
        if len(rest) == 2 and rest[1].startswith("amps="):
            label = self.require(rest[0], line).label
            amps = _parse_complex_list(_split_kv(rest[1], "amps", line), line)
            if len(amps) != self.by_label[label].dim:
                raise ScenarioParseError(
                    line,
                    f"{label!r} needs {self.by_label[label].dim} amplitudes, got {len(amps)}",
                )
            if math.sqrt(sum(abs(a) ** 2 for a in amps)) < 1e-12:
                raise ScenarioParseError(line, f"zero-norm amplitudes for {label!r}")
            self._mark_init(label, line)
            self.init_factor[label] = amps
            return
        if len(rest) == 1 and "=" in rest[0]:
            label, _, basis_label = rest[0].partition("=")
            sub = self.require(label, line)
            if basis_label not in sub.symbol_basis:
                raise ScenarioParseError(
                    line, f"{label!r} has no basis label {basis_label!r}"
                )
            self._mark_init(label, line)
            self.init_basis[label] = basis_label
            return
        raise ScenarioParseError(line, "usage: init <label>=<basis_label> | init <label> amps=<...> | init amps=<...>")

    def _mark_init(self, label: str, line: int) -> None:
        if label in self.init_basis or label in self.init_factor:
            raise ScenarioParseError(line, f"duplicate init for {label!r}")

    def _arrow(self, rest, line, usage):
        if len(rest) < 3 or rest[1] != "->":
            raise ScenarioParseError(line, f"usage: {usage}")
        return rest[0], rest[2], rest[3:]

    def _do_copy(self, line, rest):
        src, dst, extra = self._arrow(rest, line, "copy <src> -> <dst>")
        if extra:
            raise ScenarioParseError(line, "usage: copy <src> -> <dst>")
        s, d = self.require(src, line), self.require(dst, line)
        if src == dst:
            raise ScenarioParseError(line, "copy source and target must differ")
        if s.dim != d.dim:
            raise ScenarioParseError(line, f"dimension mismatch {src!r}/{dst!r}")
        self.steps.append(Step("copy", line, source=src, targets=(dst,)))

    def _do_premeasure(self, line, rest):
        src, dst, extra = self._arrow(rest, line, "premeasure <system> -> <apparatus>")
        if extra:
            raise ScenarioParseError(line, "usage: premeasure <system> -> <apparatus>")
        s, d = self.require(src, line), self.require(dst, line)
        if src == dst or s.dim != d.dim:
            raise ScenarioParseError(line, f"bad premeasure pair {src!r}/{dst!r}")
        self.steps.append(Step("premeasure", line, source=src, targets=(dst,)))

    def _do_multicopy(self, line, rest):
        src, dsts, extra = self._arrow(
            rest, line, "multicopy <src> -> <dst1,dst2,...> mode=<source|chain>"
        )
        mode = FROM_SOURCE
        if extra:
            if len(extra) != 1:
                raise ScenarioParseError(line, "unexpected tokens after multicopy targets")
            raw = _split_kv(extra[0], "mode", line)
            if raw not in ("source", "chain"):
                raise ScenarioParseError(line, f"mode must be source or chain, got {raw!r}")
            mode = FROM_SOURCE if raw == "source" else CHAINED
        source = self.require(src, line).label
        targets = []
        for d in dsts.split(","):
            if not d:
                continue
            sub = self.require(d, line)
            if sub.dim != self.by_label[source].dim:
                raise ScenarioParseError(line, f"dimension mismatch {src!r}/{d!r}")
            targets.append(d)
        if not targets:
            raise ScenarioParseError(line, "multicopy needs at least one target")
        self.steps.append(Step("multicopy", line, source=source, targets=tuple(targets), mode=mode))

    def _do_measure(self, line, rest):
        if not rest:
            raise ScenarioParseError(line, "usage: measure <label> basis=<symbol|theta=<radians>>")
        sub = self.require(rest[0], line)
        basis: str | float = SYMBOL
        if len(rest) == 2:
            raw = _split_kv(rest[1], "basis", line)
            if raw == SYMBOL:
                basis = SYMBOL
            elif raw.startswith("theta="):
                try:
                    basis = float(raw[6:])
                except ValueError:
                    raise ScenarioParseError(line, f"bad angle in {raw!r}") from None
                if sub.dim != 2:
                    raise ScenarioParseError(
                        line, f"rotated readout needs a 2-level subsystem, {sub.label!r} has dim {sub.dim}"
                    )
            else:
                raise ScenarioParseError(line, f"basis must be symbol or theta=<radians>, got {raw!r}")
        elif len(rest) > 2:
            raise ScenarioParseError(line, "unexpected tokens after measure basis")
        self.steps.append(Step("measure", line, label=sub.label, basis=basis))

    def _do_escape(self, line, rest):
        if len(rest) != 1:
            raise ScenarioParseError(line, "usage: escape <label>")
        self.steps.append(Step("escape", line, label=self.require(rest[0], line).label))

    def _do_erase(self, line, rest):
        if len(rest) != 1:
            raise ScenarioParseError(line, "usage: erase <all|seq|first-last>")
        raw = rest[0]
        if raw == "all":
            selector = ("all",)
        elif re.fullmatch(r"\d+-\d+", raw):
            a, b = (int(x) for x in raw.split("-"))
            if a > b:
                raise ScenarioParseError(line, f"empty record range {raw!r}")
            selector = ("range", a, b)
        elif raw.isdigit():
            selector = ("seq", int(raw))
        else:
            raise ScenarioParseError(line, f"bad erase selector {raw!r}")
        self.steps.append(Step("erase", line, selector=selector))

    def _do_metric(self, line, rest):
        if not rest or rest[0] not in _METRIC_NAMES:
            raise ScenarioParseError(
                line, f"metric must be one of {', '.join(_METRIC_NAMES)}"
            )
        name, args = rest[0], tuple(rest[1:])
        if name == "entropy":
            if len(args) != 1:
                raise ScenarioParseError(line, "usage: metric entropy <label[,label...]>")
            for lbl in args[0].split(","):
                self.require(lbl, line)
        elif name == "coherence":
            if len(args) not in (1, 3):
                raise ScenarioParseError(line, "usage: metric coherence <label> [<i> <j>]")
            sub = self.require(args[0], line)
            if len(args) == 3:
                try:
                    i, j = int(args[1]), int(args[2])
                except ValueError:
                    raise ScenarioParseError(line, "coherence element indices must be integers") from None
                if not (0 <= i < sub.dim and 0 <= j < sub.dim):
                    raise ScenarioParseError(line, f"element ({i},{j}) out of range for {sub.label!r}")
        elif name == "mutualinfo":
            if len(args) != 2:
                raise ScenarioParseError(line, "usage: metric mutualinfo <labelX> <labelY>")
            self.require(args[0], line)
            self.require(args[1], line)
            if args[0] == args[1]:
                raise ScenarioParseError(line, "mutualinfo labels must differ")
        elif name == "qmi":
            if len(args) != 2:
                raise ScenarioParseError(line, "usage: metric qmi <labels> <labels>")
            side_a = {self.require(l, line).label for l in args[0].split(",") if l}
            side_b = {self.require(l, line).label for l in args[1].split(",") if l}
            if not side_a or not side_b or side_a & side_b:
                raise ScenarioParseError(line, "qmi needs two disjoint nonempty label sets")
        elif name == "fidelity":
            if args != ("initial",):
                raise ScenarioParseError(line, "usage: metric fidelity initial")
        self.metrics.append(MetricRequest(name, args, after_step=len(self.steps), line=line))

    def _do_trials(self, line, rest):
        if len(rest) != 1 or not rest[0].isdigit() or int(rest[0]) < 1:
            raise ScenarioParseError(line, "usage: trials <positive integer>")
        self.trials = int(rest[0])

    def _do_seed(self, line, rest):
        try:
            (raw,) = rest
            self.seed = int(raw)
        except ValueError:
            raise ScenarioParseError(line, "usage: seed <integer>") from None

    def finish(self) -> Scenario:
        if not self.subsystems:
            raise ScenarioParseError(self.last_line or 1, "no subsystems declared")
        try:
            layout = SubsystemLayout(tuple(self.subsystems))
        except ValueError as exc:
            raise ScenarioParseError(self.last_line, str(exc)) from None
        if self.init_full is not None:
            if self.init_basis or self.init_factor:
                raise ScenarioParseError(
                    self.init_full_line, "full-state init cannot be combined with per-label inits"
                )
            if len(self.init_full) != layout.total_dim:
                raise ScenarioParseError(
                    self.init_full_line,
                    f"full-state init needs {layout.total_dim} amplitudes, got {len(self.init_full)}",
                )
        else:
            missing = set(layout.labels) - set(self.init_basis) - set(self.init_factor)
            if missing:
                raise ScenarioParseError(
                    self.last_line, f"subsystems never initialized: {sorted(missing)}"
                )
        return Scenario(
            name=self.name,
            layout=layout,
            script=tuple(self.steps),
            metrics=tuple(self.metrics),
            trials=self.trials,
            seed=self.seed,
            init_basis=dict(self.init_basis),
            init_factor=dict(self.init_factor),
            init_full=self.init_full,
        )


def parse_scenario(text: str, name: str = "scenario") -> Scenario:
    """Parse and validate a scenario document; errors carry line numbers."""
    parser = _Parser(name)
    for line_no, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].strip()
        if not stripped:
            continue
        parser.handle(line_no, stripped.split())
    return parser.finish()


def _symbol_joint(state: StateVector, x: str, y: str) -> np.ndarray:
    """Exact joint outcome distribution of two symbol-basis measurements."""
    px, py = state.layout.position(x), state.layout.position(y)
    weights = np.abs(state.tensor()) ** 2
    axes = tuple(i for i in range(weights.ndim) if i not in (px, py))
    joint = weights.sum(axis=axes) if axes else weights
    return joint.T if px > py else joint


def _evaluate_metric(
    req: MetricRequest, state: StateVector, initial: StateVector
) -> float:
    if req.name == "entropy":
        return von_neumann_entropy(partial_trace(state, req.args[0].split(",")))
    if req.name == "coherence":
        i, j = (int(req.args[1]), int(req.args[2])) if len(req.args) == 3 else (0, 1)
        rho = partial_trace(state, {req.args[0]})
        return float(abs(rho.elems[i, j]))
    if req.name == "mutualinfo":
        return transinformation(_symbol_joint(state, req.args[0], req.args[1]))
    if req.name == "qmi":
        return quantum_mutual_information(
            state, req.args[0].split(","), req.args[1].split(",")
        )
    if req.name == "fidelity":
        return fidelity(state, initial)
    raise ValueError(f"unknown metric {req.name!r}")


class _TrialRun:
    def __init__(self, scenario: Scenario, trial: int, initial: StateVector, rng):
        self.s = scenario
        self.trial = trial
        self.state = initial
        self.initial = initial
        self.rng = rng
        self.log: list[CopyRecord] = []
        self.escaped: set[str] = set()
        self.outcomes: list[OutcomeRow] = []
        self.metric_rows: list[MetricRow] = []

    def _mark_new_records(self, start: int) -> None:
        # records born touching an escaped subsystem can never be undone
        for r in self.log[start:]:
            if r.source in self.escaped or r.target in self.escaped:
                r.mark_escaped()

    def execute(self, index: int, step: Step) -> None:
        if step.kind == "copy":
            before = len(self.log)
            self.state, self.log = apply_copy(
                self.state, CopierSpec(source=step.source, target=step.targets[0]), self.log
            )
            self._mark_new_records(before)
        elif step.kind == "premeasure":
            self.state = premeasure(self.state, step.source, step.targets[0])
        elif step.kind == "multicopy":
            before = len(self.log)
            self.state, self.log = multi_copy(
                self.state, step.source, step.targets, chain_mode=step.mode, log=self.log
            )
            self._mark_new_records(before)
        elif step.kind == "measure":
            out = measure(self.state, step.label, step.basis, self.rng)
            self.outcomes.append(
                OutcomeRow(
                    trial=self.trial,
                    step=index,
                    subsystem=step.label,
                    basis=out.basis,
                    outcome=out.result,
                    probability=out.probability,
                )
            )
            self.state = out.post_state
        elif step.kind == "escape":
            self.escaped.add(step.label)
            for r in self.log:
                if r.source == step.label or r.target == step.label:
                    r.mark_escaped()
        elif step.kind == "erase":
            self.state, self.log = erase_copies(self.state, self.log, self._select(step))
        else:
            raise ValueError(f"unknown step kind {step.kind!r}")

    def _select(self, step: Step) -> list[CopyRecord]:
        kind = step.selector[0]
        if kind == "all":
            return list(self.log)
        if kind == "seq":
            lo = hi = step.selector[1]
        else:
            lo, hi = step.selector[1], step.selector[2]
        chosen = [r for r in self.log if lo <= r.seq <= hi]
        if not chosen:
            raise ValueError(f"no records with seq in {lo}-{hi}")
        return chosen

    def run_metrics(self, position: int) -> None:
        for req in self.s.metrics:
            if req.after_step == position:
                value = _evaluate_metric(req, self.state, self.initial)
                self.metric_rows.append(
                    MetricRow(self.trial, req.name, req.args, value, position)
                )


def run_scenario(
    scenario: Scenario, seed: int | None = None, trials: int | None = None
) -> RunReport:
    """Execute every trial; step errors abort the trial and are recorded."""
    base_seed = scenario.seed if seed is None else seed
    n_trials = scenario.trials if trials is None else trials
    initial = scenario.initial_state()
    results: list[TrialResult] = []
    for trial in range(n_trials):
        rng = np.random.default_rng(base_seed + trial)
        run = _TrialRun(scenario, trial, initial, rng)
        error = None
        index = 0
        try:
            run.run_metrics(0)
            for index, step in enumerate(scenario.script, start=1):
                run.execute(index, step)
                run.run_metrics(index)
        except (SimulationError, ValueError, KeyError) as exc:
            error = (index, type(exc).__name__, str(exc))
        results.append(
            TrialResult(
                trial=trial,
                outcomes=run.outcomes,
                metrics=run.metric_rows,
                log=run.log,
                error=error,
                event=event_status(run.log),
            )
        )
    return RunReport(
        scenario=scenario.name, seed=base_seed, trials=n_trials, results=results
    )


def preset_names() -> list[str]:
    root = resources.files(__package__) / "presets"
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".scn"))


def load_preset(name: str) -> Scenario:
    path = resources.files(__package__) / "presets" / f"{name}.scn"
    if not path.is_file():
        raise KeyError(f"unknown preset {name!r}; available: {', '.join(preset_names())}")
    return parse_scenario(path.read_text(encoding="utf-8"), name=name)
