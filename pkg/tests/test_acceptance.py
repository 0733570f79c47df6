"""Acceptance gate: one test per release criterion, each at its stated
tolerance, printing one PASS line on success (run with ``pytest -s`` to see
the lines as they appear)."""

import numpy as np
import pytest

from qcopysim import (
    CopierSpec,
    EscapedSubsystemError,
    FIXED_EVENT,
    SubsystemLayout,
    apply_copy,
    build_copier,
    build_ngram,
    erase_copies,
    event_status,
    fidelity,
    load_preset,
    make_state,
    multi_copy,
    observer_surprisal,
    Observer,
    parse_scenario,
    perspective_state,
    preset_names,
    quantum_mutual_information,
    readout_channel,
    run_scenario,
    shannon_entropy,
    transinformation,
)
from qcopysim.cli import main

RT2 = 1 / np.sqrt(2)


def report(number, text):
    print(f"ACCEPTANCE {number} PASS: {text}")


def pair_layout():
    return SubsystemLayout.build(("A", 2), ("B", 2, ("pm", "um")))


def medium_layout(dim):
    basis = ("pm", "um") if dim == 2 else tuple(f"m{i}" for i in range(dim))
    return SubsystemLayout.build(("A", dim), ("B", dim, basis))


def chain_layout(n):
    systems = [("A", 2)] + [(f"B{i}", 2, ("pm", "um")) for i in range(1, n + 1)]
    return SubsystemLayout.build(*systems)


def superposed(layout, alpha, beta):
    vec = np.zeros(layout.total_dim, dtype=complex)
    vec[0] = alpha
    vec[layout.total_dim // 2] = beta
    return make_state(layout, amps=vec)


def test_criterion_1_copier_truth_table_and_unitarity():
    u2 = build_copier(CopierSpec("A", "B"), pair_layout()).matrix
    transitions = {
        (0, 0): (0, 0),  # |0, pm> -> |0, 0>
        (1, 0): (1, 1),  # |1, pm> -> |1, 1>
        (0, 1): (0, 1),  # |0, um> -> |0, 1>
        (1, 1): (1, 0),  # |1, um> -> |1, 0>
    }
    for (i, t), (oi, ot) in transitions.items():
        col = np.zeros(4)
        col[i * 2 + t] = 1
        expect = np.zeros(4)
        expect[oi * 2 + ot] = 1
        assert np.array_equal(u2 @ col, expect)
    for dim in (2, 3, 4):
        u = build_copier(CopierSpec("A", "B"), medium_layout(dim)).matrix
        assert np.abs(u.conj().T @ u - np.eye(dim * dim)).max() < 1e-10
    report(1, "two-level copier matches the four defining rows; unitary for d=2,3,4")


def test_criterion_2_no_cloning_witness():
    layout = pair_layout()
    for theta, expected in ((np.pi / 4, 0.5), (0.0, 1.0), (np.pi / 2, 1.0)):
        a, b = np.cos(theta), np.sin(theta)
        s = make_state(layout, amps=[a, 0, b, 0])
        out, _ = apply_copy(s, CopierSpec("A", "B"))
        clone = make_state(layout, amps=np.kron([a, b], [a, b]))
        assert abs(fidelity(out, clone) - expected) < 1e-10
    report(2, "clone fidelity 0.5 at theta=pi/4, exactly 1.0 at the symbol states")


def test_criterion_3_shared_reality_at_scale():
    n, alpha2, trials = 10, 0.3, 10_000
    targets = ",".join(f"B{i}" for i in range(1, n + 1))
    text = (
        "subsystem A dim=2 basis=0,1\n"
        + "".join(f"subsystem B{i} dim=2 basis=pm,um\n" for i in range(1, n + 1))
        + f"init A amps={float(np.sqrt(alpha2))!r},{float(np.sqrt(1 - alpha2))!r}\n"
        + "".join(f"init B{i}=pm\n" for i in range(1, n + 1))
        + f"multicopy A -> {targets}\n"
        + "measure A\n"
        + "".join(f"measure B{i}\n" for i in range(1, n + 1))
        + f"trials {trials}\nseed 424242\n"
    )
    result = run_scenario(parse_scenario(text))
    discordant = 0
    all_zeros = 0
    for tr in result.results:
        assert tr.error is None
        outcomes = {row.outcome for row in tr.outcomes}
        assert len(tr.outcomes) == n + 1
        discordant += len(outcomes) != 1
        all_zeros += outcomes == {0}
    assert discordant == 0
    frequency = all_zeros / trials
    assert 0.286 <= frequency <= 0.314
    report(3, f"10,000 trials, n=10: zero discordant readouts, P(all zeros)={frequency:.4f}")


def test_criterion_4_decoherence_after_environment_copy():
    from qcopysim import partial_trace

    for alpha2 in (0.25, 0.5, 0.7):
        layout = SubsystemLayout.build(("A", 2), ("E", 2, ("pm", "um")))
        s = make_state(layout, amps=[np.sqrt(alpha2), 0, np.sqrt(1 - alpha2), 0])
        out, _ = apply_copy(s, CopierSpec("A", "E"))
        rho = partial_trace(out, {"A"}).elems
        assert abs(rho[0, 1]) < 1e-12 and abs(rho[1, 0]) < 1e-12
        assert abs(rho[0, 0].real - alpha2) < 1e-10
        assert abs(rho[1, 1].real - (1 - alpha2)) < 1e-10
    report(4, "one environment copy kills off-diagonals; diagonal keeps Born weights")


def test_criterion_5_eraser_and_local_irreversibility():
    layout = chain_layout(2)
    s = superposed(layout, RT2, RT2)
    copied, log = multi_copy(s, "A", ("B1", "B2"))
    restored, rest = erase_copies(copied, log, log)
    assert fidelity(restored, s) >= 1 - 1e-10
    assert rest == []

    copied, log = multi_copy(s, "A", ("B1", "B2"))
    log[0].mark_escaped()
    with pytest.raises(EscapedSubsystemError):
        erase_copies(copied, log, log)
    assert event_status(log) == FIXED_EVENT
    report(5, "LIFO erase restores the state; an escaped record blocks it for good")


def test_criterion_6_readout_ambiguity_sweep():
    layout = pair_layout()
    s = make_state(layout, amps=[RT2, 0, RT2, 0])
    joint, _ = apply_copy(s, CopierSpec("A", "B"))
    grid = np.linspace(0.0, np.pi / 2, 16)
    values = [
        transinformation(readout_channel(joint, "A", "B", t).joint_with_uniform_source())
        for t in grid
    ]
    assert abs(values[0] - 1.0) < 1e-9
    assert abs(values[-1] - 0.0) < 1e-9
    assert all(a > b for a, b in zip(values, values[1:]))
    report(6, "readout information: 1 bit aligned, 0 bits orthogonal, strictly decreasing")


def _enumerate_joint(state, order):
    """Brute-force branch enumeration; keys are outcomes sorted by label."""
    dist = {}

    def walk(amps, prefix, weight):
        if len(prefix) == len(order):
            key = tuple(k for _, k in sorted(prefix))
            dist[key] = dist.get(key, 0.0) + weight
            return
        label = order[len(prefix)]
        pos = state.layout.position(label)
        moved = np.moveaxis(amps.reshape(state.layout.dims), pos, 0)
        for k in range(state.layout.dims[pos]):
            p = float(np.vdot(moved[k], moved[k]).real)
            if p < 1e-14:
                continue
            branch = moved.copy()
            mask = np.zeros(state.layout.dims[pos])
            mask[k] = 1
            branch *= mask.reshape((-1,) + (1,) * (branch.ndim - 1))
            walk(
                (np.moveaxis(branch, 0, pos) / np.sqrt(p)).reshape(-1),
                prefix + [(label, k)],
                weight * p,
            )

    walk(np.array(state.amps), [], 1.0)
    return dist


def test_criterion_7_border_invariance():
    alpha2 = 0.3
    systems = [("e", 2)]
    systems += [(f"f{i}", 2, ("pm", "um")) for i in (1, 2, 3, 4)]
    systems += [("d", 2, ("pm", "um"))]
    layout = SubsystemLayout.build(*systems)
    vec = np.zeros(layout.total_dim, dtype=complex)
    vec[0], vec[-1] = np.sqrt(alpha2), np.sqrt(1 - alpha2)
    state = make_state(layout, amps=vec)

    for outcome in (0, 1):
        holders = ["d", "f1", "f2", "f3", "f4"]
        matrices = [
            perspective_state(
                state,
                Observer(h, frozenset({h}), {h: outcome}),
                {"e"},
            ).elems
            for h in holders
        ]
        for m in matrices[1:]:
            assert np.abs(m - matrices[0]).max() < 1e-10

    labels = list(layout.labels)
    reference = _enumerate_joint(state, labels)
    for order in (labels[::-1], labels[2:] + labels[:2], [labels[-1]] + labels[:-1]):
        alt = _enumerate_joint(state, order)
        assert set(alt) == set(reference)
        for key, value in reference.items():
            assert abs(alt[key] - value) < 1e-12
    report(7, "the electron looks the same from behind any record; order never matters")


def test_criterion_8_pair_state_mutual_information():
    for alpha2 in (0.25, 0.5, 0.75):
        layout = pair_layout()
        s = make_state(layout, amps=[np.sqrt(alpha2), 0, 0, np.sqrt(1 - alpha2)])
        expected = 2 * shannon_entropy([alpha2, 1 - alpha2])
        got = quantum_mutual_information(s, {"A"}, {"B"})
        assert abs(got - expected) < 1e-8
    report(8, "pair-state mutual information doubles the binary entropy")


def test_criterion_9_surprisal_example():
    memorized = "whether tis nobler in the mind"
    assert observer_surprisal(memorized, memorized) == 0.0
    model = build_ngram("ababab", 0)
    assert abs(observer_surprisal(model, "ababab") - 1.0) < 1e-10
    report(9, "memorizing reader pays 0 bits; order-0 reader pays 1 bit per symbol")


def test_criterion_10_preset_reproducibility(tmp_path):
    for name in preset_names():
        first = tmp_path / f"{name}_1.csv"
        second = tmp_path / f"{name}_2.csv"
        assert main(["--preset", name, "--seed", "31", "--out", str(first)]) == 0
        assert main(["--preset", name, "--seed", "31", "--out", str(second)]) == 0
        assert first.read_bytes() == second.read_bytes()
    report(10, "every shipped preset reproduces byte-identical CSV under a fixed seed")
