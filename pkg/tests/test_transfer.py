from __future__ import annotations

import itertools
import warnings

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import FIXTURE_NAMES, load_fixture, path_sum, symbolic_transfer, three_sessions
from ianc.errors import MincutViolation, PreconditionViolated
from ianc.rng import Stream
from ianc.transfer import (
    CaseKind,
    CaseTag,
    IdentityVerdict,
    MincutWarning,
    NetworkModel,
    TransferModel,
    VerdictKind,
    VirtualTransferModel,
    analyze,
    asymmetry_certificate,
    classify,
    evaluate_transfer,
    proportionality_test,
    rank_probe,
    ratio_constancy_test,
    triviality_test,
    verify_witness,
)


class PolyModel(TransferModel):
    """Synthetic transfer matrix given as a vectorized function of the variables."""

    def __init__(self, p, num_vars, fn, degree=4):
        self.p = p
        self.num_vars = num_vars
        self._fn = fn
        self._degree = degree

    def degree(self, i, j):
        return self._degree

    def evaluate_batch(self, xi):
        xi = np.atleast_2d(np.asarray(xi, dtype=np.int64)) % self.p
        cols = [xi[:, k] for k in range(self.num_vars)]
        rows = self._fn(*cols)
        out = np.stack([np.stack([np.broadcast_to(e, xi.shape[:1]) for e in r], -1) for r in rows], -2)
        return out % self.p


def proportional_model(p):
    # m11 = 2 m12 identically; everything else on its own variables
    def fn(u, v, c, d, e, f, g, h):
        return [[2 * u * v, u * v, c], [d, e * f, g], [h, e, f * g]]

    return PolyModel(p, 8, fn)


def g_equals_h_model(p):
    # m11 m32 / (m12 m31) equals a/b identically
    def fn(u, v, y, z, q, r):
        return [[u * v % p * y, u * v, v], [u, q, y], [z, z, r]]

    return PolyModel(p, 6, fn)


class TestEvaluate:
    def test_line_network_unit_coefficients(self):
        net = three_sessions([("S1", "a"), ("a", "D1"), ("S2", "D2"), ("S3", "D3")], ["a"])
        assert evaluate_transfer(net, [1] * net.s).m(1, 1) == 1

    def test_partial_m12_zero(self, nets):
        model = NetworkModel(nets["partial"])
        xi = Stream(3).field_elements(model.p, 50 * model.num_vars).reshape(50, -1)
        assert not model.evaluate_batch(xi)[:, 0, 1].any()

    @pytest.mark.parametrize("name", FIXTURE_NAMES)
    def test_path_sum_oracle(self, nets, name):
        p = 65537
        net = nets[name].with_prime(p)
        model = NetworkModel(net)
        xi = Stream(11, name).field_elements(p, 100 * net.s).reshape(100, -1)
        got = model.evaluate_batch(xi)
        for k in range(100):
            for i, j in itertools.product((1, 2, 3), repeat=2):
                assert got[k, i - 1, j - 1] == path_sum(net, xi[k], i, j, p)

    def test_wrong_length(self, nets):
        with pytest.raises(ValueError):
            evaluate_transfer(nets["dualrelay"], [1, 2, 3])

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32), st.integers(1, 65536))
    def test_linear_in_each_source_injection(self, seed, c):
        # scaling S1's injection coefficient scales column 1 and nothing else
        net = load_fixture("dualrelay")
        model = NetworkModel(net, 65537)
        xi = Stream(seed).field_elements(65537, net.s)
        k = net.coefficients.index_of("S1", None, 0)
        scaled = xi.copy()
        scaled[k] = xi[k] * c % 65537
        a, b = model.evaluate_batch(np.stack([xi, scaled]))
        assert (b[:, 0] == a[:, 0] * c % 65537).all()
        assert (b[:, 1:] == a[:, 1:]).all()


class TestTriviality:
    def test_partial_zero(self, nets):
        v = triviality_test(nets["partial"], 1, 2, samples=20)
        assert v.kind is VerdictKind.LIKELY_ZERO
        # L = 4: the longest source-destination path carries 4 coefficients
        assert v.error_bound <= (4 / nets["partial"].field_prime) ** 20

    def test_dualrelay_nonzero(self, nets):
        net = nets["dualrelay"].with_prime(65537)
        v = triviality_test(net, 1, 1, samples=1)
        assert v.kind is VerdictKind.CERTIFIED_NONZERO
        assert verify_witness(net, v)

    def test_no_path(self):
        net = three_sessions([("S1", "D2"), ("S2", "D2"), ("S3", "D3"), ("S2", "D1")])
        assert triviality_test(net, 1, 1).kind is VerdictKind.LIKELY_ZERO
        with pytest.raises(MincutViolation):
            classify(net)

    def test_zero_diagonal_in_model(self):
        model = PolyModel(101, 2, lambda a, b: [[0, a, b], [b, a, a], [a, b, a]])
        with pytest.raises(MincutViolation):
            classify(model)


class TestProportionality:
    def test_bottleneck_distinct(self, nets):
        v = proportionality_test(nets["bottleneck"], 1, 2)
        assert v.kind is VerdictKind.CERTIFIED_DISTINCT
        assert verify_witness(nets["bottleneck"], v)

    def test_synthetic_proportional(self):
        model = proportional_model(65537)
        v = proportionality_test(model, 1, 2)
        assert v.kind is VerdictKind.LIKELY_PROPORTIONAL
        assert v.value == 2
        assert classify(model) == CaseTag(CaseKind.BROKEN_A1, pair=(1, 2))

    def test_synthetic_proportional_exhaustive_f5(self):
        model = proportional_model(5)
        xi = np.array(list(itertools.product(range(5), repeat=8)), dtype=np.int64)
        vals = model.evaluate_batch(xi)
        assert (vals[:, 0, 0] == 2 * vals[:, 0, 1] % 5).all()

    def test_same_index(self, nets):
        with pytest.raises(PreconditionViolated):
            proportionality_test(nets["dualrelay"], 2, 2)

    def test_trivial_pair(self, nets):
        with pytest.raises(PreconditionViolated):
            proportionality_test(nets["partial"], 1, 2)


class TestRatio:
    def test_bottleneck_symbolic(self, nets):
        _, m = symbolic_transfer(nets["bottleneck"])
        a = m[0][1] * m[1][2] * m[2][0]
        b = m[1][0] * m[0][2] * m[2][1]
        assert sympy.expand(a - b) == 0

    def test_bottleneck_constant_f7(self, nets):
        v = ratio_constancy_test(nets["bottleneck"].with_prime(7))
        assert v.kind is VerdictKind.LIKELY_CONSTANT
        assert v.value == 1

    def test_dualrelay_nonconstant(self, nets):
        net = nets["dualrelay"].with_prime(65537)
        v = ratio_constancy_test(net, samples=20)
        assert v.kind is VerdictKind.CERTIFIED_NONCONSTANT
        assert verify_witness(net, v)

    def test_dualrelay_nonconstant_symbolic(self, nets):
        _, m = symbolic_transfer(nets["dualrelay"])
        a = m[0][1] * m[1][2] * m[2][0]
        b = m[1][0] * m[0][2] * m[2][1]
        assert sympy.cancel(a / b).free_symbols

    def test_needs_nonzero_offdiagonal(self, nets):
        with pytest.raises(PreconditionViolated):
            ratio_constancy_test(nets["partial"])


class TestAsymmetry:
    def test_bottleneck_g_is_one(self, nets):
        _, m = symbolic_transfer(nets["bottleneck"])
        assert sympy.cancel(m[0][0] * m[2][1] / (m[0][1] * m[2][0])) == 1
        v = asymmetry_certificate(nets["bottleneck"], "A2", budget=800)
        assert v.kind is VerdictKind.UNVERIFIED

    @pytest.mark.parametrize("budget", [8, 200, 2000])
    def test_g_equals_h_never_certified(self, budget):
        model = g_equals_h_model(65537)
        assert asymmetry_certificate(model, "A2", budget=budget).kind is VerdictKind.UNVERIFIED

    @pytest.mark.parametrize("which", ["A2", "A3", "A4"])
    def test_dualrelay_certified(self, nets, which):
        v = asymmetry_certificate(nets["dualrelay"], which, budget=10_000)
        assert v.kind is VerdictKind.CERTIFIED_ASYMMETRIC
        assert verify_witness(nets["dualrelay"], v)
        assert v.samples <= 10_000

    def test_unknown_function(self, nets):
        with pytest.raises(ValueError):
            asymmetry_certificate(nets["dualrelay"], "A5")

    def test_budget_respected(self):
        v = asymmetry_certificate(g_equals_h_model(65537), "A2", budget=100)
        assert v.samples <= 100


class TestClassify:
    def test_fixtures(self, nets):
        assert classify(nets["bottleneck"]).kind is CaseKind.DEGENERATE
        assert classify(nets["dualrelay"]).kind is CaseKind.GENERIC_RATIO
        assert classify(nets["partial"]) == CaseTag(CaseKind.CASE_II, trivial_pairs=((1, 2),))
        assert classify(nets["bypass"]) == CaseTag(CaseKind.CONSTANT_RATIO, c_tilde=1)

    def test_rank_probe_over_f101(self, nets):
        assert rank_probe(nets["bottleneck"].with_prime(101)) == 1
        assert rank_probe(nets["dualrelay"].with_prime(101)) == 3

    def test_rank_monotone_under_edge_removal(self, nets):
        # partial is dualrelay with two edges removed
        assert rank_probe(nets["partial"]) <= rank_probe(nets["dualrelay"])

    def test_mincut_warning(self, nets):
        net = nets["dualrelay"]
        bigger = type(net)(net.nodes, net.edges + (("S1", "D1"),), net.sessions, net.field_prime)
        with pytest.warns(MincutWarning):
            classify(bigger)

    def test_deterministic(self, nets):
        for name in FIXTURE_NAMES:
            assert classify(nets[name], rng_seed=5) == classify(nets[name], rng_seed=5)

    @pytest.mark.parametrize(
        "tag",
        [
            CaseTag(CaseKind.GENERIC_RATIO),
            CaseTag(CaseKind.CONSTANT_RATIO, c_tilde=7),
            CaseTag(CaseKind.CASE_II, trivial_pairs=((2, 1), (1, 2))),
            CaseTag(CaseKind.BROKEN_A1, pair=(3, 1)),
        ],
    )
    def test_tag_json_roundtrip(self, tag):
        assert CaseTag.from_json(tag.to_json()) == tag

    def test_case_ii_requires_offdiagonal_pairs(self):
        with pytest.raises(ValueError):
            CaseTag(CaseKind.CASE_II)
        with pytest.raises(ValueError):
            CaseTag(CaseKind.CASE_II, trivial_pairs=((1, 1),))


class TestAnalyze:
    def test_partial_uses_virtual_model(self, nets):
        report = analyze(nets["partial"], budget=4000)
        assert report["case"] == {"kind": "CaseII", "trivial_pairs": [[1, 2]]}
        assert report["ratio"] is None
        assert report["a1"][0][1] is None
        assert all(v["kind"] == "CertifiedAsymmetric" for v in report["asymmetry"].values())

    def test_witnesses_reverify(self, nets):
        net = nets["dualrelay"]
        report = analyze(net, budget=4000)
        for w, doc in report["asymmetry"].items():
            v = IdentityVerdict(VerdictKind(doc["kind"]), tuple(doc["target"]),
                                witness=tuple(tuple(x) for x in doc["witness"]))
            assert verify_witness(net, v)

    def test_deterministic(self, nets):
        assert analyze(nets["bypass"], rng_seed=3, budget=800) == analyze(nets["bypass"], rng_seed=3, budget=800)

    def test_virtual_model_slots(self, nets):
        base = NetworkModel(nets["partial"])
        vm = VirtualTransferModel(base, [(1, 2)])
        xi = Stream(1).field_elements(base.p, vm.num_vars)
        vals = vm.evaluate_batch(xi)[0]
        assert vals[0, 1] == xi[-1]
        assert (np.delete(vals.ravel(), 1) == np.delete(base.evaluate_batch(xi[:-1])[0].ravel(), 1)).all()


def test_no_warnings_on_unit_mincut(nets):
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        classify(nets["dualrelay"])
