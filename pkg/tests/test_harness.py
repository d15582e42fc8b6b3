import json
import math

import numpy as np
import pytest

from conftest import FAST, fixture_f1
from twoweight import Instance, Measure, ValidationError, build_tree, indicator
from twoweight.harness import cli
from twoweight.harness.fuzz import baseline_instance, fuzz
from twoweight.harness.instances import (
    InstanceSpec,
    LambdaGen,
    MeasureGen,
    digest,
    dumps,
    gen,
    instance_from_dict,
    loads,
)
from twoweight.harness.report import RATIO_NAMES, VALUE_NAMES, Report, evaluate, ratio, ratio_operands
from twoweight.harness.suites import SUITES, SuiteConfig, UnknownSuiteError, check

F1_PINNED = {
    "digest": "0a29f307afb8b953",
    "T": 4.4814389456868335,
    "M": 3.2782747685940734,
    "I": 4.39784828954835,
    "I_star": 4.359018185532583,
    "S": 2.937115173966817,
    "N": 3.1598227887815282,
    "fw_sigma_omega": 1.4625,
    "fw_omega_sigma": 1.5,
}


class TestGeneration:
    def test_deterministic(self):
        spec = InstanceSpec(depth=3, sigma=MeasureGen("uniform", total=4.0), seed=7)
        assert gen(spec) == gen(spec)
        assert gen(spec) != gen(InstanceSpec(depth=3, sigma=MeasureGen("uniform", total=4.0), seed=8))

    def test_streams_independent(self):
        a = gen(InstanceSpec(depth=2, seed=3))
        b = gen(InstanceSpec(depth=2, seed=3, lam=LambdaGen(density=0.9)))
        assert np.array_equal(a.sigma.leaf_mass, b.sigma.leaf_mass)
        assert np.array_equal(a.omega.leaf_mass, b.omega.leaf_mass)

    def test_riesz(self):
        spec = InstanceSpec(depth=3, sigma=MeasureGen("exponential"), lam=LambdaGen("riesz", alpha=0.5), seed=1)
        inst = gen(spec)
        t = inst.tree
        expect = inst.sigma.cube_mass * 2.0 ** (t.level / 2)
        assert np.allclose(inst.lam, expect, rtol=1e-14)

    def test_single_cube_and_heavy_leaf(self):
        spec = InstanceSpec(depth=2, sigma=MeasureGen("single-heavy-leaf", floor=1e-3),
                            lam=LambdaGen("single-cube", path="1:1", scale=2.0), same_measure=True)
        inst = gen(spec)
        assert inst.lam.tolist() == [0, 0, 2.0, 0, 0, 0, 0]
        assert inst.sigma is inst.omega
        assert (inst.sigma.leaf_mass == 1.0).sum() == 1

    @pytest.mark.parametrize(
        "spec,path",
        [
            (InstanceSpec(q=3.0), "q"),
            (InstanceSpec(p=1.0), "p"),
            (InstanceSpec(depth=-1), "depth"),
            (InstanceSpec(sigma=MeasureGen("weird")), "sigma.kind"),
            (InstanceSpec(omega=MeasureGen("explicit", values=(1.0,))), "omega.values"),
            (InstanceSpec(lam=LambdaGen("riesz", alpha=1.5)), "lam.alpha"),
            (InstanceSpec(lam=LambdaGen("random-sparse", density=2.0)), "lam.density"),
            (InstanceSpec(lam=LambdaGen("single-cube", path="5:0")), "lam.path"),
            (InstanceSpec(lam=LambdaGen("explicit", values={"1:0": -1.0})), "lam.values['1:0']"),
        ],
    )
    def test_validation_paths(self, spec, path):
        with pytest.raises(ValidationError) as info:
            gen(spec)
        assert info.value.path == path

    def test_spec_dict_round_trip(self):
        spec = InstanceSpec(depth=3, sigma=MeasureGen("explicit", values=(1.0, 2.0, 0.0, 3.5, 1, 1, 1, 1)),
                            lam=LambdaGen("explicit", values={"0:0": 1.5, "2:3": 0.25}), seed=11)
        again = InstanceSpec.from_dict(json.loads(json.dumps(spec.to_dict())))
        assert again == spec
        with pytest.raises(ValidationError):
            InstanceSpec.from_dict({"sigma": {"bogus": 1}})


class TestSerialization:
    def test_round_trip_bit_exact(self):
        rng = np.random.default_rng(0)
        t = build_tree(2, 2)
        lam = rng.exponential(size=t.n_cubes) * (rng.random(t.n_cubes) < 0.5)
        inst = Instance(Measure(t, rng.exponential(size=16) / 3), Measure(t, rng.random(16) * 1e-7), lam, 2.5, 0.3)
        again = loads(dumps(inst))
        assert again == inst
        assert dumps(again) == dumps(inst)
        assert digest(again) == digest(inst)

    def test_format(self):
        data = json.loads(dumps(fixture_f1()))
        assert data["lambda"] == {"0:0": 1.0, "1:0": 0.5, "2:3": 2.0}
        assert data["sigma"] == [1.0, 2.0, 1.0, 4.0]

    @pytest.mark.parametrize(
        "text,path",
        [
            ("[1, 2]", "file"),
            ("not json", "file"),
            ('{"dimension": 1}', "depth"),
        ],
    )
    def test_load_errors(self, text, path):
        with pytest.raises(ValidationError) as info:
            loads(text)
        assert info.value.path == path

    def test_bad_lambda_key(self):
        data = json.loads(dumps(fixture_f1()))
        data["lambda"]["9:9"] = 1.0
        with pytest.raises(ValidationError):
            instance_from_dict(data)


class TestReport:
    def test_single_cube(self):
        t = build_tree(1, 2)
        mu = Measure.uniform(t, 4.0)
        inst = Instance(mu, mu, indicator(t, [t.root]), 3.0, 2.0)
        rep = evaluate(inst, FAST)
        expect = 4.0 ** (1 / 2 - 1 / 3)
        for name in ("T", "M", "S", "N"):
            assert rep.values[name] == pytest.approx(expect, rel=1e-6)
        assert rep.ratios["S_over_N"] == pytest.approx(1.0, rel=1e-12)
        assert rep.values["fw_sigma_omega"] == 1.0 and rep.values["dlbo"] == 1.0
        assert rep.passed

    def test_zero_lambda(self):
        t = build_tree(1, 2)
        mu = Measure.uniform(t, 2.0)
        rep = evaluate(Instance(mu, mu, np.zeros(7), 3.0, 2.0), FAST)
        for name in ("T", "M", "n1", "n2", "I", "I_star", "S", "N", "V1", "V2"):
            assert rep.values[name] == 0.0
        assert rep.passed and all(rep.checks.values())
        assert rep.ratios["T_over_M"] is None

    def test_f1_pinned(self):
        rep = evaluate(fixture_f1(), FAST)
        assert rep.digest == F1_PINNED["digest"]
        for name in ("I", "I_star", "S", "N", "fw_sigma_omega", "fw_omega_sigma"):
            assert rep.values[name] == pytest.approx(F1_PINNED[name], rel=1e-12)
        for name in ("T", "M"):
            assert rep.values[name] == pytest.approx(F1_PINNED[name], rel=1e-6)
        # q <= 1: the pair and potential quantities are not defined
        assert rep.values["n1"] is None and rep.values["V1"] is None
        assert rep.values["dlbo"] == math.inf
        assert rep.passed

    def test_ratios_rederivable(self):
        rep = evaluate(fixture_f1(), FAST)
        assert set(rep.ratios) == set(RATIO_NAMES)
        for name, value in rep.ratios.items():
            a, b = ratio_operands(name)
            assert value == ratio(rep.values[a], rep.values[b])

    def test_json_round_trip(self):
        rep = evaluate(fixture_f1(), FAST)
        again = Report.from_json(rep.to_json())
        assert again == rep
        assert loads(json.dumps(again.instance)) == fixture_f1()

    def test_csv_rows(self):
        rep = evaluate(fixture_f1(), FAST)
        rows = rep.csv_rows()
        assert len(rows) == len(VALUE_NAMES) + len(RATIO_NAMES) + len(rep.checks)
        assert {r["digest"] for r in rows} == {rep.digest}

    def test_ratio_helpers(self):
        assert ratio(1.0, 0.0) is None and ratio(None, 1.0) is None
        assert ratio_operands("I_star_over_S") == ("I_star", "S")
        with pytest.raises(KeyError):
            ratio_operands("S_over_T")


class TestSuites:
    def test_unknown(self):
        with pytest.raises(UnknownSuiteError):
            check("nope")

    @pytest.mark.parametrize("name", ["holder-direction", "sparse", "equivalent-expressions", "hl"])
    def test_quick_suites_pass_and_write(self, name, tmp_path):
        res = check(name, SuiteConfig(instances=20, out_dir=str(tmp_path)))
        assert res.passed
        assert (tmp_path / f"{name}.csv").read_text() == res.csv()
        payload = json.loads((tmp_path / f"{name}.json").read_text())
        assert payload["passed"] is True and payload["suite"] == name

    def test_small_estimator_suites(self):
        for name in ("anchor", "wolff", "maximal-pair", "maximal-scale"):
            assert check(name, SuiteConfig(instances=3, depths=(2,))).passed, name

    def test_env_out_dir(self, tmp_path, monkeypatch):
        monkeypatch.setenv("TWOWEIGHT_OUT_DIR", str(tmp_path))
        check("sparse", SuiteConfig(instances=3))
        assert (tmp_path / "sparse.csv").exists()

    def test_seed_changes_rows(self):
        a = check("holder-direction", SuiteConfig(instances=5, seed=1)).csv()
        b = check("holder-direction", SuiteConfig(instances=5, seed=2)).csv()
        assert a != b

    def test_registry(self):
        assert set(SUITES) >= {"maximal-scale", "holder-direction", "sparse", "hl"}


class TestFuzz:
    def test_budget_zero(self):
        res = fuzz("S_over_N", 0, seed=3, opts=FAST)
        assert res.instance == baseline_instance(1, 2, 2.0, 1.0)
        assert res.ratio == pytest.approx(1.0, rel=1e-12)
        assert res.evaluations == 1

    def test_deterministic_and_monotone(self):
        a = fuzz("S_over_N", 6, seed=5, opts=FAST)
        b = fuzz("S_over_N", 6, seed=5, opts=FAST)
        assert a.ratio == b.ratio and a.instance == b.instance
        assert a.ratio >= 1.0 - 1e-12
        scores = [s for _, s in a.history]
        assert scores == sorted(scores)

    def test_bad_arguments(self):
        with pytest.raises(KeyError):
            fuzz("nope", 1)
        with pytest.raises(ValueError):
            fuzz("S_over_N", -1)


class TestCli:
    def run(self, *argv):
        return cli.main(list(argv))

    def test_gen_eval_norm(self, tmp_path, capsys):
        inst_path = tmp_path / "i.json"
        assert self.run("gen", "--depth", "2", "--seed", "4", "--out", str(inst_path)) == 0
        inst = loads(inst_path.read_text())
        assert inst.tree.depth == 2
        out = tmp_path / "r.csv"
        assert self.run("eval", str(inst_path), "--restarts", "4", "--format", "csv", "--out", str(out)) == 0
        assert out.read_text().startswith("digest,kind,name,value\n")
        assert self.run("norm", str(inst_path), "--restarts", "4", "--kind", "summation") == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["digest"] == digest(inst) and "maximal" not in payload

    def test_gen_same_seed_identical(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        for path in (a, b):
            assert self.run("gen", "--seed", "9", "--lambda-kind", "riesz", "--out", str(path)) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_check_exit_codes(self, tmp_path, capsys):
        assert self.run("check", "sparse", "--instances", "5", "--out", str(tmp_path)) == 0
        assert "sparse: PASS" in capsys.readouterr().out
        assert self.run("check", "nope") == 2

    def test_usage_errors(self, tmp_path, capsys):
        assert self.run("gen", "--lambda-kind", "riesz", "--alpha", "1.5") == 2
        assert "lam.alpha" in capsys.readouterr().err
        assert self.run("eval", str(tmp_path / "missing.json")) == 2
        assert self.run("fuzz", "--target", "bogus", "--budget", "1") == 2
        with pytest.raises(SystemExit) as info:
            self.run("frobnicate")
        assert info.value.code == 2

    def test_fuzz_writes_instance(self, tmp_path):
        out = tmp_path / "worst.json"
        assert self.run("fuzz", "--budget", "2", "--restarts", "4", "--out", str(out)) == 0
        assert isinstance(loads(out.read_text()), Instance)
